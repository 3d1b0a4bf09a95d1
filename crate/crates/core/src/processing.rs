//! Coefficient-domain processing: masking and soft thresholding.

use rustfft::num_complex::Complex64;

use crate::error::{domain, Result};
use crate::transform::Coefficients;

/// Per-channel real gains in `[0, 1]` on the coefficient grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub channels: Vec<Vec<f64>>,
}

impl Mask {
    /// Constant mask shaped like `c`.
    pub fn constant(c: &Coefficients, value: f64) -> Mask {
        Mask { channels: c.channels.iter().map(|y| vec![value; y.len()]).collect() }
    }

    /// `1 − m`.
    pub fn complement(&self) -> Mask {
        Mask { channels: self.channels.iter().map(|m| m.iter().map(|v| 1.0 - v).collect()).collect() }
    }

    /// Checks that every value lies in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        for (k, m) in self.channels.iter().enumerate() {
            if let Some(v) = m.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return domain(format!("mask channel {k} holds {v}, outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Whether every value is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.channels.iter().flatten().all(|&v| v == 0.0 || v == 1.0)
    }
}

/// Point-wise product `m_k[n]·y_k[n]`.
pub fn apply_mask(c: &Coefficients, m: &Mask) -> Result<Coefficients> {
    if m.channels.len() != c.channels.len()
        || m.channels.iter().zip(&c.channels).any(|(a, b)| a.len() != b.len())
    {
        return domain("mask shape does not match the coefficients");
    }
    m.validate()?;
    Ok(c.map(|k, n, v| v * m.channels[k][n]))
}

/// Complex soft thresholding `sgn(y)·(|y| − η)₊` with `sgn(y) = y/|y|`.
pub fn soft_threshold(c: &Coefficients, eta: f64) -> Result<Coefficients> {
    if !(eta >= 0.0) {
        return domain(format!("threshold must be nonnegative, got {eta}"));
    }
    Ok(c.map(|_, _, v| shrink(v, eta)))
}

fn shrink(v: Complex64, eta: f64) -> Complex64 {
    let a = v.norm();
    if a <= eta {
        Complex64::new(0.0, 0.0)
    } else {
        v * ((a - eta) / a)
    }
}

/// Binary mask keeping the coefficients where the target dominates.
pub fn oracle_binary_mask(target: &Coefficients, interferer: &Coefficients) -> Result<Mask> {
    if target.d != interferer.d || target.len != interferer.len {
        return domain("target and interferer coefficients have different layouts");
    }
    Ok(Mask {
        channels: target
            .channels
            .iter()
            .zip(&interferer.channels)
            .map(|(t, i)| t.iter().zip(i).map(|(a, b)| if a.norm() > b.norm() { 1.0 } else { 0.0 }).collect())
            .collect(),
    })
}
