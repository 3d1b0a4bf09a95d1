//! Frame-theoretic tools: bank response and alias terms, explicit duals,
//! the frame operator, iterative inversion and bound estimates.
//!
//! With `D = lcm(d_k)`, `N = L/D` and `q_k = D/d_k`, the reconstruction
//! `x̃ = synthesize(analyze(x, H), G)` has spectrum
//! `X̃[j] = Σ_s T_s[j]·X[j + sN]` with
//! `T_s[j] = Σ_{k : q_k | s} G_k[j]·H_k[j + sN]/d_k`, summed over channels
//! and their mirrors. For `G = conj(H)` the terms are `𝓗₀` and the alias
//! terms `𝓗_s`; perfect reconstruction means `T_0 = 1` and `T_s = 0`.

mod cg;
mod uniform;

pub use cg::{cg_solve, cg_synthesize, estimate_frame_bounds, BoundEstimate, CgOptions, CgReport};
pub use uniform::{to_uniform, uniform_dual, UniformBank, UniformDual, UniformLimits};

use std::collections::BTreeMap;

use rustfft::num_complex::Complex64;

use crate::bank::{Channel, FilterBank};
use crate::error::{domain, Result};
use crate::transform::{analyze, filterbank_response, synthesize};

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `lcm` of the downsampling factors.
pub fn common_factor(fb: &FilterBank) -> usize {
    fb.channels.iter().fold(1, |acc, c| acc / gcd(acc, c.d) * c.d)
}

/// Frame diagnostics of a bank.
#[derive(Debug, Clone)]
pub struct FrameDiagnostics {
    /// Sampled bank response `𝓗₀`.
    pub h0: Vec<f64>,
    /// `max_j |𝓗_s[j]|` for `s = 1 … D−1`.
    pub alias_norms: Vec<f64>,
    /// Lower frame bound: exact when painless, otherwise `max(A₀, 0)`.
    pub a: f64,
    /// Upper frame bound: exact when painless, otherwise `B₀`.
    pub b: f64,
    /// `min_j (𝓗₀ − Σ_s |𝓗_s|)`.
    pub a0: f64,
    /// `max_j (𝓗₀ + Σ_s |𝓗_s|)`.
    pub b0: f64,
    pub painless: bool,
    pub diag_dominant: bool,
    pub redundancy: f64,
    /// `D = lcm(d_k)`.
    pub lcm: usize,
    /// `q_k = D/d_k`.
    pub q: Vec<usize>,
}

/// Whether every support fits in one period of its downsampled spectrum.
pub fn supports_fit(fb: &FilterBank) -> bool {
    fb.channels.iter().all(|c| c.support_len() * c.d <= fb.len)
}

/// Computes `𝓗₀`, alias terms, diagonal-dominance bounds and flags.
pub fn diagnostics(fb: &FilterBank) -> FrameDiagnostics {
    let h0 = filterbank_response(fb);
    let dd = common_factor(fb);
    let adj = fb.adjoint();
    let mut alias_norms = vec![0.0; dd.saturating_sub(1)];
    let mut row_sum = vec![0.0; fb.len];
    transfer_terms(fb, &adj, |s, buf, touched| {
        if s == 0 {
            return;
        }
        let mut m: f64 = 0.0;
        for &j in touched {
            let a = buf[j].norm();
            m = m.max(a);
            row_sum[j] += a;
        }
        alias_norms[s - 1] = m;
    });
    let a0 = h0.iter().zip(&row_sum).map(|(h, r)| h - r).fold(f64::INFINITY, f64::min);
    let b0 = h0.iter().zip(&row_sum).map(|(h, r)| h + r).fold(f64::NEG_INFINITY, f64::max);
    let hmin = h0.iter().copied().fold(f64::INFINITY, f64::min);
    let hmax = h0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let painless = supports_fit(fb) && hmin > 0.0;
    let (a, b) = if painless { (hmin, hmax) } else { (a0.max(0.0), b0) };
    FrameDiagnostics {
        h0,
        alias_norms,
        a,
        b,
        a0,
        b0,
        painless,
        diag_dominant: a0 > 0.0,
        redundancy: fb.redundancy(),
        lcm: dd,
        q: fb.channels.iter().map(|c| dd / c.d).collect(),
    }
}

fn overlaps(a_start: usize, a_len: usize, b_start: usize, b_len: usize, len: usize) -> bool {
    if a_len == 0 || b_len == 0 {
        return false;
    }
    (b_start + len - a_start) % len < a_len || (a_start + len - b_start) % len < b_len
}

/// Visits the transfer terms `T_s` of the pair (`ana`, `syn`) for every shift
/// `s` that can be nonzero, in increasing order. The callback receives the
/// shift, a length-`L` buffer and the bins where the buffer was written;
/// other bins are zero.
pub fn transfer_terms(ana: &FilterBank, syn: &FilterBank, mut visit: impl FnMut(usize, &[Complex64], &[usize])) {
    let len = ana.len;
    let dd = common_factor(ana);
    let n_step = len / dd;
    let h: Vec<Channel> = ana.expanded();
    let g: Vec<Channel> = syn.expanded();
    // shift index s -> list of (channel, alias multiple a) with s = a·q_c.
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    groups.insert(0, Vec::new());
    for (c, (hc, gc)) in h.iter().zip(&g).enumerate() {
        let m_c = len / hc.d;
        for a in 0..hc.d {
            let shift = a * m_c;
            let h_start = (hc.start + len - shift % len) % len;
            if overlaps(gc.start, gc.support_len(), h_start, hc.support_len(), len) {
                groups.entry(shift / n_step).or_default().push((c, a));
            }
        }
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut written = vec![false; len];
    let mut touched: Vec<usize> = Vec::new();
    for (s, members) in groups {
        for &(c, a) in &members {
            let (hc, gc) = (&h[c], &g[c]);
            let shift = a * (len / hc.d);
            let inv_d = 1.0 / hc.d as f64;
            let nh = hc.support_len();
            for (j, gv) in gc.bins(len) {
                let off = (j + shift + len - hc.start) % len;
                if off < nh {
                    if !written[j] {
                        written[j] = true;
                        touched.push(j);
                    }
                    buf[j] += gv * hc.values[off] * inv_d;
                }
            }
        }
        if s == 0 {
            // T_0 is defined on every bin, zero where nothing contributes.
            for j in 0..len {
                if !written[j] {
                    written[j] = true;
                    touched.push(j);
                }
            }
        }
        visit(s, &buf, &touched);
        for &j in &touched {
            buf[j] = Complex64::new(0.0, 0.0);
            written[j] = false;
        }
        touched.clear();
    }
}

/// Perfect-reconstruction residual `max_{j,s} |T_s[j] − δ_s|`, i.e. the
/// deviation of the alias-cancellation product from `[D, 0, …, 0]` divided by
/// `D`.
pub fn pr_residual(fb_ana: &FilterBank, fb_syn: &FilterBank) -> Result<f64> {
    if fb_ana.len != fb_syn.len || fb_ana.downsampling() != fb_syn.downsampling() {
        return domain("analysis and synthesis banks have different layouts");
    }
    let mut worst: f64 = 0.0;
    transfer_terms(fb_ana, fb_syn, |s, buf, touched| {
        for &j in touched {
            let target = if s == 0 { 1.0 } else { 0.0 };
            worst = worst.max((buf[j] - target).norm());
        }
    });
    Ok(worst)
}

/// Canonical dual of a painless bank, `G_k = conj(H_k)/𝓗₀`.
pub fn painless_dual(fb: &FilterBank) -> Result<FilterBank> {
    let h0 = filterbank_response(fb);
    if !supports_fit(fb) || h0.iter().any(|&v| !(v > 0.0)) {
        return domain("bank is not painless (supports exceed 1/d_k or the response vanishes); use cg_synthesize or uniform_dual");
    }
    let len = fb.len;
    let channels = fb
        .channels
        .iter()
        .map(|ch| {
            let values = ch.bins(len).map(|(j, h)| h.conj() / h0[j]).collect();
            Channel { values, ..ch.clone() }
        })
        .collect();
    Ok(fb.with_responses(channels))
}

/// Transposed synthesis bank `G_k = conj(H_k)/c` with `c` the mean of
/// `𝓗₀`, i.e. time-reversed analysis filters with a common gain. It is exact
/// only for tight banks.
pub fn transposed_synthesis(fb: &FilterBank) -> FilterBank {
    let h0 = filterbank_response(fb);
    let mean = h0.iter().sum::<f64>() / h0.len() as f64;
    let inv = if mean > 0.0 { 1.0 / mean } else { 0.0 };
    let adj = fb.adjoint();
    let channels = adj
        .channels
        .iter()
        .map(|ch| Channel { values: ch.values.iter().map(|v| v * inv).collect(), ..ch.clone() })
        .collect();
    fb.with_responses(channels)
}

/// Frame operator `S x = synthesize(analyze(x, H), conj(H))`.
pub fn apply_frame_operator(x: &[f64], fb: &FilterBank) -> Result<Vec<f64>> {
    let adj = fb.adjoint();
    synthesize(&analyze(x, fb)?, &adj)
}
