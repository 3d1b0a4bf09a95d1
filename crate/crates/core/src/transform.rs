//! Analysis and synthesis in the DFT domain.
//!
//! Signals are periodic with period `L`. Analysis multiplies the spectrum by
//! `H_k`, folds it onto `L/d_k` bins and inverts, which equals circular
//! convolution followed by keeping every `d_k`-th sample. Synthesis tiles
//! each sub-band spectrum `d_k` times, weights it by `G_k` and sums. Paired
//! channels enter synthesis twice through the real part.

use rustfft::num_complex::Complex64;

use crate::bank::FilterBank;
use crate::error::{domain, Result};
use crate::fft;

/// Sub-band coefficients `y_k`, one complex sequence of length `L/d_k` per
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub channels: Vec<Vec<Complex64>>,
    pub d: Vec<usize>,
    pub centers: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub len: usize,
    pub fs: f64,
    /// Fingerprint of the bank that produced the coefficients.
    pub fingerprint: [u8; 32],
}

impl Coefficients {
    /// All-zero coefficients laid out for `fb`.
    pub fn zeros(fb: &FilterBank) -> Coefficients {
        Coefficients {
            channels: fb.channels.iter().map(|c| vec![Complex64::new(0.0, 0.0); fb.len / c.d]).collect(),
            d: fb.downsampling(),
            centers: fb.centers(),
            bandwidths: fb.channels.iter().map(|c| c.bandwidth).collect(),
            len: fb.len,
            fs: fb.fs,
            fingerprint: fb.fingerprint(),
        }
    }

    /// Weighted energy `Σ_k w_k ‖y_k‖²` under the weights of `fb`.
    pub fn weighted_energy(&self, fb: &FilterBank) -> f64 {
        self.channels
            .iter()
            .zip(&fb.channels)
            .map(|(y, ch)| ch.weight() * y.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Total number of complex coefficients.
    pub fn total_len(&self) -> usize {
        self.channels.iter().map(|c| c.len()).sum()
    }

    /// Checks that every length matches its factor.
    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != self.d.len() {
            return domain("channel count and factor list differ");
        }
        for (k, (y, &d)) in self.channels.iter().zip(&self.d).enumerate() {
            if d == 0 || y.len() * d != self.len {
                return domain(format!("channel {k}: length {} with d = {d} does not give L = {}", y.len(), self.len));
            }
        }
        Ok(())
    }

    /// Same layout with every value mapped through `f`.
    pub fn map(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Coefficients {
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(k, y)| y.iter().enumerate().map(|(n, &v)| f(k, n, v)).collect())
            .collect();
        Coefficients { channels, ..self.clone() }
    }
}

/// Analysis `y_k[n] = (h_k ∗ x)[n·d_k]`.
pub fn analyze(x: &[f64], fb: &FilterBank) -> Result<Coefficients> {
    if x.len() != fb.len {
        return domain(format!("signal length {} differs from bank length {}", x.len(), fb.len));
    }
    let spec = fft::forward_real(x);
    Ok(analyze_spectrum(&spec, fb))
}

/// Analysis of a signal given by its unnormalized DFT.
pub fn analyze_spectrum(spec: &[Complex64], fb: &FilterBank) -> Coefficients {
    let len = fb.len;
    let mut out = Coefficients::zeros(fb);
    for (ch, y) in fb.channels.iter().zip(out.channels.iter_mut()) {
        let m = len / ch.d;
        for (j, h) in ch.bins(len) {
            y[j % m] += spec[j] * h;
        }
        fft::inverse(y);
        let scale = 1.0 / len as f64;
        for v in y.iter_mut() {
            *v *= scale;
        }
    }
    out
}

/// Unnormalized DFT of the synthesis output, before taking the real part.
pub(crate) fn synthesis_spectrum(c: &Coefficients, fb: &FilterBank) -> Vec<Complex64> {
    let len = fb.len;
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    for (ch, y) in fb.channels.iter().zip(&c.channels) {
        let m = len / ch.d;
        let mut yh = y.clone();
        fft::forward(&mut yh);
        let w = ch.weight();
        for (j, g) in ch.bins(len) {
            acc[j] += g * yh[j % m] * w;
        }
    }
    acc
}

/// Synthesis `x̃ = Σ_k g_k ∗ ↑_{d_k} y_k`, real part, paired channels doubled.
pub fn synthesize(c: &Coefficients, fb_syn: &FilterBank) -> Result<Vec<f64>> {
    check_compatible(c, fb_syn)?;
    Ok(fft::inverse_real(synthesis_spectrum(c, fb_syn)))
}

/// Rejects coefficients produced by a bank with another fingerprint or layout.
pub fn check_compatible(c: &Coefficients, fb: &FilterBank) -> Result<()> {
    c.validate()?;
    if c.fingerprint != fb.fingerprint() {
        return domain("coefficients were produced by a different bank (fingerprint mismatch)");
    }
    if c.len != fb.len || c.d != fb.downsampling() {
        return domain("coefficient layout does not match the synthesis bank");
    }
    Ok(())
}

/// Sampled bank response `𝓗₀[j] = Σ_k (|H_k[j]|² + paired·|H_k[−j]|²)/d_k`.
pub fn filterbank_response(fb: &FilterBank) -> Vec<f64> {
    let len = fb.len;
    let mut h0 = vec![0.0; len];
    for ch in &fb.channels {
        let inv_d = 1.0 / ch.d as f64;
        for (j, h) in ch.bins(len) {
            let p = h.norm_sqr() * inv_d;
            h0[j] += p;
            if ch.paired {
                h0[(len - j) % len] += p;
            }
        }
    }
    h0
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Changes the rate of `y` by `p/q` in the frequency domain.
///
/// The spectrum is band-limited to the `n` bins centered on DC, scaled by
/// `p` (ideal interpolation gain), and folded onto `n·p/q` bins with factor
/// `1/q`, the spectrum of keeping every `q`-th sample. For `p = 1` this is
/// plain decimation; for `q = 1` it is ideal band-limited interpolation.
pub fn resample_rational(y: &[Complex64], p: usize, q: usize) -> Result<Vec<Complex64>> {
    if p == 0 || q == 0 {
        return domain("rate factors must be positive");
    }
    let g = gcd(p, q);
    let (p, q) = (p / g, q / g);
    let n = y.len();
    if !(n * p).is_multiple_of(q) {
        return domain(format!("length {n} times {p}/{q} is not an integer"));
    }
    let out_len = n * p / q;
    if out_len == 0 {
        return domain("output would be empty");
    }
    let mut spec = y.to_vec();
    fft::forward(&mut spec);
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    let up = n * p;
    let gain = p as f64 / q as f64;
    for (j, v) in spec.iter().enumerate() {
        // Signed bin in (−n/2, n/2], placed on the length n·p grid.
        let signed = if 2 * j <= n { j as i64 } else { j as i64 - n as i64 };
        let pos = signed.rem_euclid(up as i64) as usize;
        out[pos % out_len] += v * gain;
    }
    fft::inverse(&mut out);
    for v in out.iter_mut() {
        *v /= out_len as f64;
    }
    Ok(out)
}
