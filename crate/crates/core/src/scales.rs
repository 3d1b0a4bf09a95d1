//! Auditory frequency scales.
//!
//! Each scale maps frequency in Hz to auditory units and back, and gives an
//! auditory bandwidth in Hz. ERB and Mel have closed-form inverses; Bark is
//! inverted by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Highest frequency the scale maps accept, in Hz.
pub const MAX_FREQ_HZ: f64 = 192_000.0;

/// A perceptual frequency scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyScale {
    Erb,
    Bark,
    Mel,
}

impl std::str::FromStr for FrequencyScale {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "erb" => Ok(FrequencyScale::Erb),
            "bark" => Ok(FrequencyScale::Bark),
            "mel" => Ok(FrequencyScale::Mel),
            other => domain(format!("unknown scale '{other}'")),
        }
    }
}

fn check_freq(freq_hz: f64) -> Result<()> {
    if !freq_hz.is_finite() || freq_hz < 0.0 {
        return domain(format!("frequency must be finite and nonnegative, got {freq_hz}"));
    }
    if freq_hz > MAX_FREQ_HZ {
        return domain(format!("frequency {freq_hz} Hz above supported maximum {MAX_FREQ_HZ} Hz"));
    }
    Ok(())
}

fn erb_fwd(f: f64) -> f64 {
    9.265 * (1.0 + f / 228.8455).ln()
}

fn bark_fwd(f: f64) -> f64 {
    13.0 * (0.00076 * f).atan() + 3.5 * (f / 7500.0).powi(2).atan()
}

fn mel_fwd(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn raw_forward(scale: FrequencyScale, f: f64) -> f64 {
    match scale {
        FrequencyScale::Erb => erb_fwd(f),
        FrequencyScale::Bark => bark_fwd(f),
        FrequencyScale::Mel => mel_fwd(f),
    }
}

/// Maps a frequency in Hz to auditory units.
pub fn aud_forward(scale: FrequencyScale, freq_hz: f64) -> Result<f64> {
    check_freq(freq_hz)?;
    Ok(raw_forward(scale, freq_hz))
}

/// Maps auditory units back to Hz.
pub fn aud_inverse(scale: FrequencyScale, aud_units: f64) -> Result<f64> {
    if !aud_units.is_finite() || aud_units < 0.0 {
        return domain(format!("auditory value must be finite and nonnegative, got {aud_units}"));
    }
    let limit = raw_forward(scale, MAX_FREQ_HZ);
    if aud_units > limit {
        return domain(format!("auditory value {aud_units} beyond scale limit {limit}"));
    }
    Ok(match scale {
        FrequencyScale::Erb => 228.8455 * ((aud_units / 9.265).exp() - 1.0),
        FrequencyScale::Mel => 700.0 * (10f64.powf(aud_units / 2595.0) - 1.0),
        FrequencyScale::Bark => bark_inverse(aud_units),
    })
}

fn bark_inverse(a: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, MAX_FREQ_HZ);
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if bark_fwd(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Auditory bandwidth in Hz at `freq_hz`.
///
/// The Mel scale has no bandwidth formula; this returns the distance between
/// the neighbours one mel unit below and above, which is the half-overlap
/// width of a grid with unit spacing. Banks on a Mel grid use
/// [`grid_bandwidths`] instead.
pub fn aud_bandwidth(scale: FrequencyScale, freq_hz: f64) -> Result<f64> {
    check_freq(freq_hz)?;
    Ok(match scale {
        FrequencyScale::Erb => 24.7 + freq_hz / 9.265,
        FrequencyScale::Bark => 25.0 + 75.0 * (1.0 + 1.4e-6 * freq_hz * freq_hz).powf(0.69),
        FrequencyScale::Mel => {
            let m = mel_fwd(freq_hz);
            let up = aud_inverse(scale, m + 1.0)?;
            if m >= 1.0 {
                up - aud_inverse(scale, m - 1.0)?
            } else {
                2.0 * (up - freq_hz)
            }
        }
    })
}

/// Bandwidths for a designed grid of centers.
///
/// ERB and Bark use their formulas. Mel uses `ξ_{k+1} − ξ_{k−1}` with
/// one-sided doubled differences at the two ends.
pub fn grid_bandwidths(scale: FrequencyScale, centers: &[f64]) -> Result<Vec<f64>> {
    match scale {
        FrequencyScale::Mel if centers.len() >= 2 => {
            let n = centers.len();
            Ok((0..n)
                .map(|k| {
                    if k == 0 {
                        2.0 * (centers[1] - centers[0])
                    } else if k == n - 1 {
                        2.0 * (centers[n - 1] - centers[n - 2])
                    } else {
                        centers[k + 1] - centers[k - 1]
                    }
                })
                .collect())
        }
        _ => centers.iter().map(|&f| aud_bandwidth(scale, f)).collect(),
    }
}

/// Center frequencies spread linearly on the auditory scale from `fmin` to
/// `fmax`, both included.
///
/// The span `F(fmax) − F(fmin)` is cut into `ceil(V·span)` equal steps, so
/// the step never exceeds `1/V`. A span shorter than `1e-9/V` yields the
/// single center `fmin`.
pub fn aud_space(scale: FrequencyScale, fmin_hz: f64, fmax_hz: f64, density: f64) -> Result<Vec<f64>> {
    if !(density > 0.0) || !density.is_finite() {
        return domain(format!("density must be positive, got {density}"));
    }
    if !(fmin_hz >= 0.0 && fmin_hz < fmax_hz) {
        return domain(format!("need 0 <= fmin < fmax, got {fmin_hz}, {fmax_hz}"));
    }
    let a0 = aud_forward(scale, fmin_hz)?;
    let a1 = aud_forward(scale, fmax_hz)?;
    let span = a1 - a0;
    let steps = (density * span - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(vec![fmin_hz]);
    }
    aud_space_count(scale, fmin_hz, fmax_hz, steps + 1)
}

/// `count` centers spread linearly on the auditory scale from `fmin` to `fmax`.
pub fn aud_space_count(scale: FrequencyScale, fmin_hz: f64, fmax_hz: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return domain("center count must be positive");
    }
    if !(fmin_hz >= 0.0 && fmin_hz <= fmax_hz) {
        return domain(format!("need 0 <= fmin <= fmax, got {fmin_hz}, {fmax_hz}"));
    }
    if count == 1 {
        return Ok(vec![fmin_hz]);
    }
    let a0 = aud_forward(scale, fmin_hz)?;
    let a1 = aud_forward(scale, fmax_hz)?;
    let step = (a1 - a0) / (count - 1) as f64;
    let mut out = Vec::with_capacity(count);
    out.push(fmin_hz);
    for k in 1..count - 1 {
        out.push(aud_inverse(scale, a0 + k as f64 * step)?);
    }
    out.push(fmax_hz);
    Ok(out)
}
