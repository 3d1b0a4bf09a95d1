//! Conjugate-gradient inversion of the frame operator.
//!
//! Synthesis solves `S x = b` with `b = synthesize(c, conj(H))`. The optional
//! preconditioner divides each DFT bin by `𝓗₀`, the diagonal of `S` in the
//! frequency domain. Iteration stops on the true relative residual
//! `‖S x − b‖/‖b‖`.

use rand::{rngs::StdRng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::bank::FilterBank;
use crate::error::Result;
use crate::fft;
use crate::transform::{analyze_spectrum, check_compatible, filterbank_response, synthesis_spectrum, Coefficients};

/// Settings for [`cg_synthesize`].
#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub precondition: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter: 500, precondition: true }
    }
}

/// Iteration record of a CG run.
#[derive(Debug, Clone)]
pub struct CgReport {
    pub iterations: usize,
    /// Relative residual after each iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Frame operator bound to one bank, with cached adjoint and response.
struct Operator<'a> {
    fb: &'a FilterBank,
    adj: FilterBank,
    inv_h0: Vec<f64>,
}

impl<'a> Operator<'a> {
    fn new(fb: &'a FilterBank) -> Self {
        let h0 = filterbank_response(fb);
        let peak = h0.iter().copied().fold(0.0, f64::max);
        let floor = peak * 1e-14;
        let inv_h0 = h0.iter().map(|&v| if v > floor { 1.0 / v } else { 1.0 / floor.max(f64::MIN_POSITIVE) }).collect();
        Operator { fb, adj: fb.adjoint(), inv_h0 }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let spec = fft::forward_real(x);
        let c = analyze_spectrum(&spec, self.fb);
        fft::inverse_real(synthesis_spectrum(&c, &self.adj))
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let mut spec = fft::forward_real(r);
        for (v, w) in spec.iter_mut().zip(&self.inv_h0) {
            *v *= *w;
        }
        fft::inverse_real(spec)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn solve(op: &Operator, b: &[f64], opts: CgOptions) -> (Vec<f64>, CgReport) {
    let len = b.len();
    let nb = norm(b);
    let mut x = vec![0.0; len];
    if nb == 0.0 {
        return (x, CgReport { iterations: 0, residuals: Vec::new(), converged: true });
    }
    let mut r = b.to_vec();
    let mut z = if opts.precondition { op.precondition(&r) } else { r.clone() };
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residuals = Vec::new();
    let mut best = (f64::INFINITY, x.clone());
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / nb;
        residuals.push(rel);
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= opts.tol {
            converged = true;
            break;
        }
        z = if opts.precondition { op.precondition(&r) } else { r.clone() };
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    let iterations = residuals.len();
    if !converged {
        log::warn!("CG stopped after {iterations} iterations at residual {:.3e}", best.0);
        x = best.1;
    }
    (x, CgReport { iterations, residuals, converged })
}

/// Solves `S x = b` for the frame operator of `fb`.
pub fn cg_solve(b: &[f64], fb: &FilterBank, opts: CgOptions) -> (Vec<f64>, CgReport) {
    solve(&Operator::new(fb), b, opts)
}

/// Reconstructs a signal from analysis coefficients of `fb` by CG.
///
/// Non-convergence is reported through the flag in the returned report; the
/// best iterate is returned in that case.
pub fn cg_synthesize(c: &Coefficients, fb: &FilterBank, opts: CgOptions) -> Result<(Vec<f64>, CgReport)> {
    check_compatible(c, fb)?;
    let op = Operator::new(fb);
    let b = fft::inverse_real(synthesis_spectrum(c, &op.adj));
    Ok(solve(&op, &b, opts))
}

/// Frame bound estimates from power iteration and inverse iteration.
#[derive(Debug, Clone, Copy)]
pub struct BoundEstimate {
    pub a: f64,
    pub b: f64,
    pub a_converged: bool,
    pub b_converged: bool,
    pub iterations: usize,
}

fn random_unit(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Estimates the optimal frame bounds: power iteration on `S` for `B`,
/// inverse iteration (each step a CG solve) for `A`. Each stops after
/// `max_iter` steps or when the Rayleigh quotient changes by less than `tol`
/// relative.
pub fn estimate_frame_bounds(fb: &FilterBank, max_iter: usize, tol: f64) -> BoundEstimate {
    let op = Operator::new(fb);
    let len = fb.len;
    let (b, b_conv, it_b) = power(len, max_iter, tol, |v| op.apply(v));
    let inner = CgOptions { tol: 1e-12, max_iter: 2000, precondition: true };
    let (mu, a_conv, it_a) = power(len, max_iter, tol, |v| solve(&op, v, inner).0);
    let a = if mu > 0.0 { 1.0 / mu } else { 0.0 };
    BoundEstimate { a, b, a_converged: a_conv, b_converged: b_conv, iterations: it_a.max(it_b) }
}

fn power(len: usize, max_iter: usize, tol: f64, apply: impl Fn(&[f64]) -> Vec<f64>) -> (f64, bool, usize) {
    let mut v = random_unit(len, 0x5eed);
    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let w = apply(&v);
        let next = dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return (0.0, true, it);
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if it > 1 && (next - lambda).abs() <= tol * next.abs() {
            return (next, true, it);
        }
        lambda = next;
    }
    (lambda, false, max_iter)
}
