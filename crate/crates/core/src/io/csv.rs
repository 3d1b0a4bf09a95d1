//! Plain-text CSV exports of frequency responses and spectrograms.
//!
//! Output is byte-for-byte deterministic: floats use the shortest
//! representation that round-trips.

use std::fmt::Write as _;
use std::path::Path;

use crate::bank::FilterBank;
use crate::design::bin_freq;
use crate::error::{domain, Result};
use crate::transform::{filterbank_response, Coefficients};

/// Level written for a zero magnitude in the response table, in dB.
const RESPONSE_FLOOR_DB: f64 = -300.0;

fn db(mag: f64, floor: f64) -> f64 {
    if mag > 0.0 {
        (20.0 * mag.log10()).max(floor)
    } else {
        floor
    }
}

/// Response table over the bins from DC to Nyquist: `freq_hz`, the summed
/// response `H0`, then `|H_k|` of every channel in dB.
pub fn response_csv(fb: &FilterBank) -> String {
    let h0 = filterbank_response(fb);
    let dense: Vec<Vec<f64>> = fb.channels.iter().map(|c| c.dense(fb.len).iter().map(|v| v.norm()).collect()).collect();
    let mut out = String::from("freq_hz,H0");
    for (k, c) in fb.channels.iter().enumerate() {
        let _ = write!(out, ",ch{k}_{}", c.center);
    }
    out.push('\n');
    for j in 0..=fb.len / 2 {
        let _ = write!(out, "{},{}", bin_freq(j, fb.len, fb.fs), h0[j]);
        for h in &dense {
            let _ = write!(out, ",{}", db(h[j], RESPONSE_FLOOR_DB));
        }
        out.push('\n');
    }
    out
}

/// Writes [`response_csv`] to `path`.
pub fn export_response_csv(path: impl AsRef<Path>, fb: &FilterBank) -> Result<()> {
    std::fs::write(path, response_csv(fb))?;
    Ok(())
}

/// Spectrogram table of `20·log10|y_k|` clipped below at `floor_db`.
///
/// The header holds `time_s` and the channel centers. Rows follow the finest
/// coefficient grid; coarser channels repeat each value until their next
/// sample.
pub fn spectrogram_csv(c: &Coefficients, floor_db: f64) -> Result<String> {
    c.validate()?;
    if !floor_db.is_finite() {
        return domain("spectrogram floor must be finite");
    }
    let Some(&step) = c.d.iter().min() else {
        return domain("coefficients have no channels");
    };
    let mut out = String::from("time_s");
    for f in &c.centers {
        let _ = write!(out, ",{f}");
    }
    out.push('\n');
    for r in 0..c.len / step {
        let t = r * step;
        let _ = write!(out, "{}", t as f64 / c.fs);
        for (y, &d) in c.channels.iter().zip(&c.d) {
            let _ = write!(out, ",{}", db(y[t / d].norm(), floor_db));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes [`spectrogram_csv`] to `path`.
pub fn export_spectrogram_csv(path: impl AsRef<Path>, c: &Coefficients, floor_db: f64) -> Result<()> {
    std::fs::write(path, spectrogram_csv(c, floor_db)?)?;
    Ok(())
}
