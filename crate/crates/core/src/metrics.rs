//! Reconstruction and separation measures.
//!
//! Ratios that would be infinite are reported as [`DB_CAP`].

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

/// Value reported for an infinite ratio, in dB.
pub const DB_CAP: f64 = 300.0;

/// Whether a dB value is the infinity sentinel.
pub fn is_capped(db: f64) -> bool {
    db >= DB_CAP
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        return DB_CAP;
    }
    (10.0 * (num / den).log10()).min(DB_CAP)
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return domain(format!("lengths differ: {} vs {}", a.len(), b.len()));
    }
    Ok(())
}

/// `‖x̃ − x‖/‖x‖`.
pub fn rel_error(x: &[f64], x_rec: &[f64]) -> Result<f64> {
    same_len(x, x_rec)?;
    let nx = energy(x).sqrt();
    if nx == 0.0 {
        return domain("reference signal is zero");
    }
    let err: f64 = x.iter().zip(x_rec).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(err / nx)
}

/// [`rel_error`] after undoing a circular delay of `delay` samples in `x_rec`.
pub fn rel_error_delayed(x: &[f64], x_rec: &[f64], delay: usize) -> Result<f64> {
    same_len(x, x_rec)?;
    let n = x.len();
    let shifted: Vec<f64> = (0..n).map(|i| x_rec[(i + delay) % n.max(1)]).collect();
    rel_error(x, &shifted)
}

/// `10·log10(‖ref‖²/‖ref − est‖²)`.
pub fn snr(reference: &[f64], est: &[f64]) -> Result<f64> {
    same_len(reference, est)?;
    let e = energy(reference);
    if e == 0.0 {
        return domain("reference signal is zero");
    }
    let err: f64 = reference.iter().zip(est).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ratio_db(e, err))
}

/// Segmental SNR over non-overlapping frames of `frame_ms`, each frame's SNR
/// clipped to `[lo, hi]` dB before averaging. Frames with a silent reference
/// are skipped and a trailing partial frame is ignored.
pub fn segsnr(reference: &[f64], est: &[f64], fs: f64, frame_ms: f64, clip: (f64, f64)) -> Result<f64> {
    same_len(reference, est)?;
    let frame = (frame_ms * 1e-3 * fs).round() as usize;
    if frame == 0 || reference.len() < frame {
        return domain(format!("signal of {} samples is shorter than one {frame_ms} ms frame", reference.len()));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (r, e) in reference.chunks_exact(frame).zip(est.chunks_exact(frame)) {
        let er = energy(r);
        if er == 0.0 {
            continue;
        }
        let err: f64 = r.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum();
        sum += ratio_db(er, err).clamp(clip.0, clip.1);
        count += 1;
    }
    if count == 0 {
        return domain("every frame of the reference is silent");
    }
    Ok(sum / count as f64)
}

/// [`segsnr`] with 32 ms frames clipped to `[−10, 35]` dB.
pub fn segsnr_default(reference: &[f64], est: &[f64], fs: f64) -> Result<f64> {
    segsnr(reference, est, fs, 32.0, (-10.0, 35.0))
}

/// Separation scores in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BssScores {
    pub sdr: f64,
    pub sir: f64,
    pub sar: f64,
}

/// Decomposition of an estimate into target, interference and artifacts.
#[derive(Debug, Clone)]
pub struct BssParts {
    pub target: Vec<f64>,
    pub interference: Vec<f64>,
    pub artifacts: Vec<f64>,
}

/// Splits `est` by whole-signal orthogonal projections onto the target
/// reference and onto the span of all references.
pub fn bss_decompose(refs: &[Vec<f64>], est: &[f64], target_index: usize) -> Result<BssParts> {
    if refs.len() < 2 {
        return domain("need at least two reference sources");
    }
    if target_index >= refs.len() {
        return domain(format!("target index {target_index} out of range"));
    }
    for r in refs {
        same_len(r, est)?;
    }
    let n = est.len();
    let m = refs.len();
    let s = &refs[target_index];
    let es = energy(s);
    if es == 0.0 {
        return domain("target reference is zero");
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let coef = dot(est, s) / es;
    let target: Vec<f64> = s.iter().map(|v| coef * v).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&refs[i], &refs[j]));
    let rhs = DVector::from_fn(m, |i, _| dot(&refs[i], est));
    let diag_max = (0..m).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let chol = gram.cholesky().ok_or_else(|| Error::Domain("reference sources are linearly dependent".into()))?;
    let l = chol.l();
    let pivot_min = (0..m).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if pivot_min <= 1e-12 * diag_max {
        return domain("reference sources are linearly dependent");
    }
    let w = chol.solve(&rhs);
    let mut p_all = vec![0.0; n];
    for (i, r) in refs.iter().enumerate() {
        for (p, v) in p_all.iter_mut().zip(r) {
            *p += w[i] * v;
        }
    }
    let interference = p_all.iter().zip(&target).map(|(p, t)| p - t).collect();
    let artifacts = est.iter().zip(&p_all).map(|(e, p)| e - p).collect();
    Ok(BssParts { target, interference, artifacts })
}

/// SDR, SIR and SAR of `est` against `refs[target_index]`.
pub fn bss_eval(refs: &[Vec<f64>], est: &[f64], target_index: usize) -> Result<BssScores> {
    let parts = bss_decompose(refs, est, target_index)?;
    let et = energy(&parts.target);
    let ei = energy(&parts.interference);
    let ea = energy(&parts.artifacts);
    let distortion: f64 = parts
        .interference
        .iter()
        .zip(&parts.artifacts)
        .map(|(i, a)| (i + a) * (i + a))
        .sum();
    let ti: f64 = parts.target.iter().zip(&parts.interference).map(|(t, i)| (t + i) * (t + i)).sum();
    Ok(BssScores { sdr: ratio_db(et, distortion), sir: ratio_db(et, ei), sar: ratio_db(ti, ea) })
}
