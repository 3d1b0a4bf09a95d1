//! Equivalent uniform bank and its canonical dual.
//!
//! Channel `k` with factor `d_k` splits into `q_k = D/d_k` channels
//! `h_k^{(l)} = h_k ∗ δ_{l·d_k}`, all downsampled by `D`, with
//! `y_k^{(l)}[n] = y_k[n·q_k − l]`. In the DFT domain the bins
//! `j₀ + uN` (`N = L/D`, `u = 0 … D−1`) of one residue class couple only
//! among themselves through `M[u,t] = Σ_k q_k·H_k[j₀+uN]·conj(H_k[j₀+tN])`,
//! summed over channels with `q_k | (u − t)`. The canonical dual solves these
//! small Hermitian systems, split into connected blocks.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rustfft::num_complex::Complex64;

use crate::bank::{Channel, FilterBank};
use crate::error::{Error, Result};
use crate::fft;
use crate::frame::common_factor;
use crate::transform::{check_compatible, Coefficients};

/// Size limits for the uniform expansion.
#[derive(Debug, Clone, Copy)]
pub struct UniformLimits {
    /// Largest allowed `D = lcm(d_k)`.
    pub max_lcm: usize,
    /// Largest allowed `Σ q_k`.
    pub max_channels: usize,
}

impl Default for UniformLimits {
    fn default() -> Self {
        UniformLimits { max_lcm: 8192, max_channels: 4096 }
    }
}

/// Uniform expansion of a non-uniform bank.
#[derive(Debug, Clone)]
pub struct UniformBank {
    /// Common factor `D`.
    pub lcm: usize,
    /// `q_k = D/d_k` per original channel.
    pub q: Vec<usize>,
    /// Original channel and delay index `(k, l)` of each uniform channel.
    pub map: Vec<(usize, usize)>,
    bank: FilterBank,
}

/// Expands `fb` into `Σ q_k` channels sharing the factor `D`.
pub fn to_uniform(fb: &FilterBank, limits: UniformLimits) -> Result<UniformBank> {
    let dd = common_factor(fb);
    if dd > limits.max_lcm {
        return Err(Error::Capacity(format!(
            "lcm of downsampling factors is {dd}, above the limit of {}",
            limits.max_lcm
        )));
    }
    let q: Vec<usize> = fb.channels.iter().map(|c| dd / c.d).collect();
    let total: usize = q.iter().sum();
    if total > limits.max_channels {
        return Err(Error::Capacity(format!(
            "uniform expansion needs {total} channels, above the limit of {}",
            limits.max_channels
        )));
    }
    let map = q.iter().enumerate().flat_map(|(k, &qk)| (0..qk).map(move |l| (k, l))).collect();
    Ok(UniformBank { lcm: dd, q, map, bank: fb.clone() })
}

impl UniformBank {
    pub fn num_channels(&self) -> usize {
        self.map.len()
    }

    /// The non-uniform bank this expansion came from.
    pub fn source(&self) -> &FilterBank {
        &self.bank
    }

    /// Response of uniform channel `idx`: `H_k[j]·e^{−2πi·j·l·d_k/L}`.
    pub fn channel_response(&self, idx: usize) -> Channel {
        let (k, l) = self.map[idx];
        let ch = &self.bank.channels[k];
        let len = self.bank.len;
        let step = (l * ch.d) % len;
        let values = ch
            .bins(len)
            .map(|(j, h)| {
                let phase = -2.0 * std::f64::consts::PI * ((j * step) % len) as f64 / len as f64;
                h * Complex64::from_polar(1.0, phase)
            })
            .collect();
        Channel { values, d: self.lcm, ..ch.clone() }
    }

    /// The uniform channels as a bank with every factor equal to `D`.
    pub fn as_filter_bank(&self) -> Result<FilterBank> {
        let channels = (0..self.num_channels()).map(|i| self.channel_response(i)).collect();
        FilterBank::new(channels, self.bank.fs, self.bank.len, self.bank.scale, self.bank.real_signal, None)
    }

    /// Rebuilds non-uniform coefficients from uniform sub-bands via
    /// `y_k[m] = y_k^{(l)}[(m + l)/q_k]` with `l = (−m) mod q_k`.
    pub fn regroup(&self, uniform: &[Vec<Complex64>]) -> Result<Coefficients> {
        if uniform.len() != self.num_channels() {
            return Err(Error::Domain(format!(
                "expected {} uniform channels, got {}",
                self.num_channels(),
                uniform.len()
            )));
        }
        let n = self.bank.len / self.lcm;
        let mut out = Coefficients::zeros(&self.bank);
        let mut first = 0;
        for (k, &qk) in self.q.iter().enumerate() {
            let y = &mut out.channels[k];
            for (m, v) in y.iter_mut().enumerate() {
                let l = (qk - m % qk) % qk;
                let idx = ((m + l) / qk) % n;
                *v = uniform[first + l][idx];
            }
            first += qk;
        }
        Ok(out)
    }
}

struct Block {
    /// Positions `u` of the block within the residue class.
    us: Vec<usize>,
    chol: Cholesky<Complex64, Dyn>,
}

/// Canonical dual of the uniform expansion, stored as factorized blocks.
pub struct UniformDual {
    ub: UniformBank,
    /// Blocks per residue class `j₀`.
    blocks: Vec<Vec<Block>>,
}

impl std::fmt::Debug for UniformDual {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UniformDual").field("lcm", &self.ub.lcm).field("classes", &self.blocks.len()).finish()
    }
}

/// Entries `(u, value)` of channel `e` (expanded) in residue class `j₀`.
fn class_entries(expanded: &[Channel], len: usize, n: usize) -> Vec<Vec<(usize, usize, Complex64)>> {
    let mut by_class: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); n];
    for (e, ch) in expanded.iter().enumerate() {
        for (j, h) in ch.bins(len) {
            if h.norm_sqr() > 0.0 {
                by_class[j % n].push((e, j / n, h));
            }
        }
    }
    by_class
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Computes the canonical dual of `ub` by solving each residue class.
pub fn uniform_dual(ub: &UniformBank) -> Result<UniformDual> {
    let fb = &ub.bank;
    let len = fb.len;
    let dd = ub.lcm;
    let n = len / dd;
    let expanded = fb.expanded();
    let q_e: Vec<usize> = expanded.iter().map(|c| dd / c.d).collect();
    let entries = class_entries(&expanded, len, n);
    let mut blocks = Vec::with_capacity(n);
    let mut parent: Vec<usize> = (0..dd).collect();
    let mut local = vec![usize::MAX; dd];
    for (j0, list) in entries.iter().enumerate() {
        for (u, p) in parent.iter_mut().enumerate() {
            *p = u;
        }
        let mut covered = vec![false; dd];
        // Union bins that share a channel and differ by a multiple of q_e.
        let mut last_in_class: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
        for &(e, u, _) in list {
            covered[u] = true;
            let key = (e, u % q_e[e]);
            if let Some(&prev) = last_in_class.get(&key) {
                let (a, b) = (find(&mut parent, prev), find(&mut parent, u));
                if a != b {
                    parent[a] = b;
                }
            } else {
                last_in_class.insert(key, u);
            }
        }
        if let Some(u) = covered.iter().position(|&c| !c) {
            let f = (j0 + u * n) as f64 * fb.fs / len as f64;
            return Err(Error::Frame(format!("no filter covers {f:.3} Hz")));
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
        for u in 0..dd {
            let r = find(&mut parent, u);
            groups.entry(r).or_default().push(u);
        }
        let mut class_blocks = Vec::with_capacity(groups.len());
        let mut mats: Vec<DMatrix<Complex64>> = Vec::with_capacity(groups.len());
        let mut block_of = vec![0usize; dd];
        for (b, us) in groups.values().enumerate() {
            for (i, &u) in us.iter().enumerate() {
                local[u] = i;
                block_of[u] = b;
            }
            mats.push(DMatrix::zeros(us.len(), us.len()));
        }
        // Accumulate M over pairs of entries of the same channel.
        let mut per_channel: std::collections::HashMap<usize, Vec<(usize, Complex64)>> = std::collections::HashMap::new();
        for &(e, u, h) in list {
            per_channel.entry(e).or_default().push((u, h));
        }
        for (e, items) in per_channel {
            let qe = q_e[e];
            let w = qe as f64;
            for &(u, hu) in &items {
                for &(t, ht) in &items {
                    if (u + dd - t).is_multiple_of(qe) {
                        let b = block_of[u];
                        mats[b][(local[u], local[t])] += hu * ht.conj() * w;
                    }
                }
            }
        }
        for (us, m) in groups.into_values().zip(mats) {
            let scale = (0..m.nrows()).map(|i| m[(i, i)].re).fold(0.0, f64::max);
            let chol = Cholesky::new(m).ok_or_else(|| {
                let f = (j0 + us[0] * n) as f64 * fb.fs / len as f64;
                Error::Frame(format!("rank-deficient alias system near {f:.3} Hz"))
            })?;
            let lmin = (0..chol.l_dirty().nrows()).map(|i| chol.l_dirty()[(i, i)].re).fold(f64::INFINITY, f64::min);
            if lmin * lmin < 1e-13 * scale {
                let f = (j0 + us[0] * n) as f64 * fb.fs / len as f64;
                return Err(Error::Frame(format!("ill-conditioned alias system near {f:.3} Hz")));
            }
            class_blocks.push(Block { us, chol });
        }
        blocks.push(class_blocks);
    }
    Ok(UniformDual { ub: ub.clone(), blocks })
}

impl UniformDual {
    pub fn uniform_bank(&self) -> &UniformBank {
        &self.ub
    }

    /// Reconstructs a signal from non-uniform coefficients with the canonical
    /// dual of the uniform expansion.
    pub fn synthesize(&self, c: &Coefficients) -> Result<Vec<f64>> {
        let fb = &self.ub.bank;
        check_compatible(c, fb)?;
        let len = fb.len;
        let dd = self.ub.lcm;
        let n = len / dd;
        // Adjoint spectrum over channels and mirrors.
        let mut direct = vec![Complex64::new(0.0, 0.0); len];
        let mut paired = vec![Complex64::new(0.0, 0.0); len];
        for (ch, y) in fb.channels.iter().zip(&c.channels) {
            let m = len / ch.d;
            let mut yh = y.clone();
            fft::forward(&mut yh);
            let acc = if ch.paired { &mut paired } else { &mut direct };
            for (j, h) in ch.bins(len) {
                acc[j] += h.conj() * yh[j % m];
            }
        }
        let v: Vec<Complex64> = (0..len).map(|j| direct[j] + paired[j] + paired[(len - j) % len].conj()).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (j0, class_blocks) in self.blocks.iter().enumerate() {
            for block in class_blocks {
                let rhs = DVector::from_iterator(block.us.len(), block.us.iter().map(|&u| v[j0 + u * n].conj()));
                let w = block.chol.solve(&rhs);
                for (i, &t) in block.us.iter().enumerate() {
                    out[j0 + t * n] = w[i].conj() * dd as f64;
                }
            }
        }
        Ok(fft::inverse_real(out))
    }

    /// Synthesis responses of uniform channels `(k, l)` for the given `l`,
    /// `G_k^{(l)}[j₀+tN] = D·Σ_u conj(H_k^{(l)}[j₀+uN])·M⁻¹[u,t]`.
    fn dual_responses(&self, l: usize) -> Vec<Vec<Complex64>> {
        let fb = &self.ub.bank;
        let len = fb.len;
        let dd = self.ub.lcm;
        let n = len / dd;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); len]; fb.channels.len()];
        let dense: Vec<Vec<Complex64>> = fb.channels.iter().map(|c| c.dense(len)).collect();
        for (j0, class_blocks) in self.blocks.iter().enumerate() {
            for block in class_blocks {
                let inv = block.chol.inverse();
                for (k, ch) in fb.channels.iter().enumerate() {
                    if l >= self.ub.q[k] {
                        continue;
                    }
                    let step = (l * ch.d) % len;
                    for (i, &u) in block.us.iter().enumerate() {
                        let j = j0 + u * n;
                        let h = dense[k][j];
                        if h.norm_sqr() == 0.0 {
                            continue;
                        }
                        let phase = 2.0 * std::f64::consts::PI * ((j * step) % len) as f64 / len as f64;
                        let hc = h.conj() * Complex64::from_polar(dd as f64, phase);
                        for (t_i, &t) in block.us.iter().enumerate() {
                            out[k][j0 + t * n] += hc * inv[(i, t_i)];
                        }
                    }
                }
            }
        }
        out
    }

    /// Non-uniform synthesis bank `g_k = g_k^{(0)}`, valid when the dual
    /// responses agree across delays (see [`UniformDual::consistency_error`]).
    pub fn nonuniform_filters(&self) -> FilterBank {
        let fb = &self.ub.bank;
        let channels = self
            .dual_responses(0)
            .iter()
            .zip(&fb.channels)
            .map(|(g, ch)| {
                let mut c = Channel::from_dense(ch.center, ch.bandwidth, g, ch.paired);
                c.d = ch.d;
                c
            })
            .collect();
        fb.with_responses(channels)
    }

    /// Largest relative gap between `G_k^{(1)}` and the advanced
    /// `G_k^{(0)}·e^{2πi·j·d_k/L}`; zero when the dual maps back exactly.
    pub fn consistency_error(&self) -> f64 {
        let fb = &self.ub.bank;
        let len = fb.len;
        let g0 = self.dual_responses(0);
        let g1 = self.dual_responses(1);
        let mut worst: f64 = 0.0;
        for (k, ch) in fb.channels.iter().enumerate() {
            if self.ub.q[k] < 2 {
                continue;
            }
            let peak = g0[k].iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for j in 0..len {
                let phase = 2.0 * std::f64::consts::PI * ((j * ch.d) % len) as f64 / len as f64;
                let pred = g0[k][j] * Complex64::from_polar(1.0, phase);
                worst = worst.max((g1[k][j] - pred).norm() / peak);
            }
        }
        worst
    }
}
