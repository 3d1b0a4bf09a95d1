#![allow(dead_code)]

use audlet::{BankSpec, Channel, FilterBank, FrequencyScale};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

pub const FS: f64 = 16000.0;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn noise(len: usize, rng: &mut StdRng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn hann(len: usize, density: f64, redfac: f64) -> FilterBank {
    BankSpec::audlet(FS, len, density, redfac).build().unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(a).max(1e-300)
}

/// Bank of explicit dense responses, one unpaired channel each.
pub fn hand_bank(len: usize, responses: &[(Vec<Complex64>, usize)]) -> FilterBank {
    let channels = responses
        .iter()
        .enumerate()
        .map(|(k, (h, d))| {
            let mut ch = Channel::from_dense(k as f64, 1.0, h, false);
            ch.d = *d;
            ch
        })
        .collect();
    FilterBank::new(channels, FS, len, FrequencyScale::Erb, true, None).unwrap()
}

/// Naive inverse DFT, `h[m] = (1/L) Σ_j H[j] e^{2πijm/L}`.
pub fn naive_idft(h: &[Complex64]) -> Vec<Complex64> {
    let len = h.len();
    (0..len)
        .map(|m| {
            h.iter()
                .enumerate()
                .filter(|(_, v)| v.norm() > 0.0)
                .map(|(j, v)| v * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((j * m) % len) as f64 / len as f64))
                .sum::<Complex64>()
                / len as f64
        })
        .collect()
}
