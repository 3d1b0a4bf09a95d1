//! Filter bank construction.
//!
//! AUDlet filters are prototype shapes placed on an auditory grid in the
//! frequency domain. Gammatone and roex banks reuse the same grid for
//! comparison. Every response is sampled on the length-`L` DFT grid and
//! rescaled to unit time-domain energy, `Σ_j |H[j]|² = L`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bank::{circular_support, Channel, FilterBank};
use crate::error::{domain, Result};
use crate::fft;
use crate::scales::{self, FrequencyScale};

/// Standard deviation of the Gaussian prototype in bandwidth units.
pub const GAUSS_SIGMA: f64 = 0.564_189_583_547_756_3; // 1/sqrt(pi)

/// Responses below this fraction of the peak are cut from gammatone and
/// roex supports.
pub const TAIL_FLOOR: f64 = 1e-8;

/// Prototype shape `w` with unit equivalent rectangular bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prototype {
    /// `cos²(πξ/S)` on `|ξ| ≤ S/2` with `S = 8/3`.
    Hann,
    /// `exp(−ξ²/2σ²)` with `σ = 1/√π`, cut at `4σ`.
    Gaussian,
    /// Samples of a user shape spread evenly over `[−support/2, support/2]`,
    /// linearly interpolated. The samples should have unit ERB.
    Tabulated { support: f64, samples: Vec<f64> },
}

impl Prototype {
    /// Full support width in bandwidth units.
    pub fn support(&self) -> f64 {
        match self {
            Prototype::Hann => 8.0 / 3.0,
            Prototype::Gaussian => 8.0 * GAUSS_SIGMA,
            Prototype::Tabulated { support, .. } => *support,
        }
    }

    /// Shape value at `x` bandwidths from the center.
    pub fn eval(&self, x: f64) -> f64 {
        let half = 0.5 * self.support();
        if x.abs() >= half {
            return 0.0;
        }
        match self {
            Prototype::Hann => (PI * x / self.support()).cos().powi(2),
            Prototype::Gaussian => (-x * x / (2.0 * GAUSS_SIGMA * GAUSS_SIGMA)).exp(),
            Prototype::Tabulated { support, samples } => {
                let n = samples.len();
                if n < 2 {
                    return samples.first().copied().unwrap_or(0.0);
                }
                let pos = (x + half) / support * (n - 1) as f64;
                let i = (pos.floor() as usize).min(n - 2);
                let t = pos - i as f64;
                samples[i] * (1.0 - t) + samples[i + 1] * t
            }
        }
    }
}

impl std::str::FromStr for Prototype {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" => Ok(Prototype::Hann),
            "gauss" | "gaussian" => Ok(Prototype::Gaussian),
            other => domain(format!("unknown prototype '{other}'")),
        }
    }
}

/// Filter family of a designed bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Audlet { prototype: Prototype },
    Gammatone { beta: f64, order: u32, ir_length: usize },
    Roex { r: f64 },
}

/// How many centers to place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    /// Filters per auditory unit.
    Density(f64),
    /// Number of steps `K` on the grid, giving `K + 1` centers.
    Count(usize),
}

/// Canonical parameters of a designed bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankSpec {
    #[serde(flatten)]
    pub family: Family,
    pub scale: FrequencyScale,
    pub fs: f64,
    pub len: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub spacing: Spacing,
    pub bw_divisor: f64,
    pub redfac: f64,
    /// Downsampling factors, filled in once chosen.
    #[serde(default)]
    pub d: Vec<usize>,
}

impl BankSpec {
    /// Hann AUDlet defaults on the ERB scale over `[0, fs/2]`.
    pub fn audlet(fs: f64, len: usize, density: f64, redfac: f64) -> BankSpec {
        BankSpec {
            family: Family::Audlet { prototype: Prototype::Hann },
            scale: FrequencyScale::Erb,
            fs,
            len,
            fmin: 0.0,
            fmax: fs / 2.0,
            spacing: Spacing::Density(density),
            bw_divisor: 1.0,
            redfac,
            d: Vec::new(),
        }
    }

    /// Same grid with another family.
    pub fn with_family(&self, family: Family) -> BankSpec {
        BankSpec { family, d: Vec::new(), ..self.clone() }
    }

    /// Gammatone family with `γ = 4`, `β = 1.019/bw_divisor` folded in at
    /// build time, and 6000-sample impulse responses.
    pub fn gammatone_family() -> Family {
        Family::Gammatone { beta: 1.019, order: 4, ir_length: 6000 }
    }

    /// JSON text hashed into the bank fingerprint.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// Builds the bank, choosing downsampling factors unless `d` is set.
    ///
    /// Gammatone and roex banks take the factors of the Hann AUDlet bank on
    /// the same grid so that all families share one coefficient layout.
    pub fn build(&self) -> Result<FilterBank> {
        let grid = design_grid(self)?;
        let bank = match &self.family {
            Family::Audlet { prototype } => audlet_from_grid(self, &grid, prototype)?,
            Family::Gammatone { beta, order, ir_length } => {
                gammatone_from_grid(self, &grid, *beta, *order, *ir_length)?
            }
            Family::Roex { r } => roex_from_grid(self, &grid, *r)?,
        };
        let d = if !self.d.is_empty() {
            self.d.clone()
        } else {
            match self.family {
                Family::Audlet { .. } => select_downsampling(&bank, self.redfac)?.0.downsampling(),
                _ => {
                    let hann = self.with_family(Family::Audlet { prototype: Prototype::Hann });
                    let hb = audlet_from_grid(&hann, &grid, &Prototype::Hann)?;
                    select_downsampling(&hb, self.redfac)?.0.downsampling()
                }
            }
        };
        bank.with_downsampling(&d)
    }
}

/// Centers, bandwidths and pairing flags for a design.
#[derive(Debug, Clone)]
pub struct Grid {
    pub centers: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub paired: Vec<bool>,
}

/// Places the centers of a design, adding DC and Nyquist channels when the
/// range stops short of them.
pub fn design_grid(spec: &BankSpec) -> Result<Grid> {
    let nyq = spec.fs / 2.0;
    if !(spec.fs > 0.0) {
        return domain("sample rate must be positive");
    }
    if spec.len < 2 {
        return domain(format!("signal length must be at least 2, got {}", spec.len));
    }
    if spec.fmax > nyq {
        return domain(format!("fmax {} above Nyquist {}", spec.fmax, nyq));
    }
    if !(spec.fmin >= 0.0 && spec.fmin < spec.fmax) {
        return domain(format!("need 0 <= fmin < fmax, got {}, {}", spec.fmin, spec.fmax));
    }
    if !(spec.bw_divisor >= 1.0) {
        return domain(format!("bandwidth divisor must be >= 1, got {}", spec.bw_divisor));
    }
    let inner = match spec.spacing {
        Spacing::Density(v) => scales::aud_space(spec.scale, spec.fmin, spec.fmax, v)?,
        Spacing::Count(k) => scales::aud_space_count(spec.scale, spec.fmin, spec.fmax, k + 1)?,
    };
    let inner_bw = scales::grid_bandwidths(spec.scale, &inner)?;
    let mut centers = Vec::with_capacity(inner.len() + 2);
    let mut bandwidths = Vec::with_capacity(inner.len() + 2);
    if spec.fmin > 0.0 {
        centers.push(0.0);
        bandwidths.push(inner_bw[0]);
    }
    centers.extend_from_slice(&inner);
    bandwidths.extend_from_slice(&inner_bw);
    if spec.fmax < nyq {
        centers.push(nyq);
        bandwidths.push(*inner_bw.last().unwrap());
    }
    let bandwidths = bandwidths.iter().map(|b| b / spec.bw_divisor).collect();
    let paired = centers.iter().map(|&c| c > 0.0 && c < nyq).collect();
    Ok(Grid { centers, bandwidths, paired })
}

/// Signed frequency of bin `j` in Hz.
pub fn bin_freq(j: usize, len: usize, fs: f64) -> f64 {
    let j = j as f64;
    let l = len as f64;
    if j <= l / 2.0 {
        j * fs / l
    } else {
        (j - l) * fs / l
    }
}

/// Circular distance from `center` to the frequency of bin `j`, in
/// `[−fs/2, fs/2)`.
fn circ_dist(j: usize, len: usize, fs: f64, center: f64) -> f64 {
    let f = j as f64 * fs / len as f64;
    (f - center + fs / 2.0).rem_euclid(fs) - fs / 2.0
}

/// Samples `shape(distance in Hz)` around `center` over at most `half_width`
/// Hz on each side, then rescales to unit energy.
fn sample_shape(
    center: f64,
    bandwidth: f64,
    paired: bool,
    len: usize,
    fs: f64,
    half_width: f64,
    shape: impl Fn(f64) -> f64,
) -> Channel {
    let df = fs / len as f64;
    let mut dense = vec![Complex64::new(0.0, 0.0); len];
    if half_width * 2.0 >= fs {
        for (j, v) in dense.iter_mut().enumerate() {
            *v = Complex64::new(shape(circ_dist(j, len, fs, center)), 0.0);
        }
    } else {
        let lo = ((center - half_width) / df).floor() as i64;
        let hi = ((center + half_width) / df).ceil() as i64;
        for jj in lo..=hi {
            let j = jj.rem_euclid(len as i64) as usize;
            dense[j] = Complex64::new(shape(circ_dist(j, len, fs, center)), 0.0);
        }
    }
    let mut ch = Channel::from_dense(center, bandwidth, &dense, paired);
    normalize(&mut ch, len);
    ch
}

fn normalize(ch: &mut Channel, len: usize) {
    let e = ch.energy();
    if e > 0.0 {
        let g = (len as f64 / e).sqrt();
        for v in &mut ch.values {
            *v *= g;
        }
    }
}

/// Parameters of [`audlet_filters`].
#[derive(Debug, Clone)]
pub struct AudletParams {
    pub scale: FrequencyScale,
    pub fs: f64,
    pub len: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub spacing: Spacing,
    pub prototype: Prototype,
    pub bw_divisor: f64,
}

/// AUDlet bank `H_k(ξ) ∝ w((ξ − ξ_k)/Γ_k)` with every `d_k = 1`.
pub fn audlet_filters(p: &AudletParams) -> Result<FilterBank> {
    let spec = BankSpec {
        family: Family::Audlet { prototype: p.prototype.clone() },
        scale: p.scale,
        fs: p.fs,
        len: p.len,
        fmin: p.fmin,
        fmax: p.fmax,
        spacing: p.spacing,
        bw_divisor: p.bw_divisor,
        redfac: 1.0,
        d: Vec::new(),
    };
    let grid = design_grid(&spec)?;
    audlet_from_grid(&spec, &grid, &p.prototype)
}

fn audlet_from_grid(spec: &BankSpec, grid: &Grid, proto: &Prototype) -> Result<FilterBank> {
    if !(proto.support() > 0.0) {
        return domain("prototype has zero support");
    }
    let mut channels = Vec::with_capacity(grid.centers.len());
    for k in 0..grid.centers.len() {
        let (c, g) = (grid.centers[k], grid.bandwidths[k]);
        let ch = sample_shape(c, g, grid.paired[k], spec.len, spec.fs, 0.5 * proto.support() * g, |dist| {
            proto.eval(dist / g)
        });
        if ch.values.is_empty() {
            return domain(format!("channel at {c} Hz has no bins on the grid"));
        }
        channels.push(ch);
    }
    let mut spec = spec.clone();
    spec.d = vec![1; channels.len()];
    FilterBank::new(channels, spec.fs, spec.len, spec.scale, true, Some(spec))
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Outcome of [`select_downsampling`].
#[derive(Debug, Clone)]
pub struct DownsamplingReport {
    /// Largest factors keeping each support inside one period.
    pub painless_factors: Vec<usize>,
    /// True when `redfac ≥ 1` and every support fits in `L/d_k` bins.
    pub painless_possible: bool,
    /// Channels whose support covers the whole grid, forced to `d = 1`.
    pub fallback: Vec<usize>,
}

/// Chooses `d_k` as the divisor of `L` nearest to `d_k^painless / redfac`,
/// where `d_k^painless` is the largest divisor with `support·d ≤ L`.
pub fn select_downsampling(fb: &FilterBank, redfac: f64) -> Result<(FilterBank, DownsamplingReport)> {
    if !(redfac > 0.0) || !redfac.is_finite() {
        return domain(format!("redfac must be positive, got {redfac}"));
    }
    let divs = divisors(fb.len);
    let mut painless = Vec::with_capacity(fb.channels.len());
    let mut chosen = Vec::with_capacity(fb.channels.len());
    let mut fallback = Vec::new();
    for (k, ch) in fb.channels.iter().enumerate() {
        let n = ch.support_len().max(1);
        if n >= fb.len {
            log::warn!("channel {k} covers the whole grid; using d = 1");
            fallback.push(k);
        }
        let dp = *divs.iter().rev().find(|&&d| d * n <= fb.len).unwrap_or(&1);
        let target = dp as f64 / redfac;
        let d = *divs
            .iter()
            .min_by(|&&a, &&b| {
                let da = (a as f64 - target).abs();
                let db = (b as f64 - target).abs();
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .unwrap();
        painless.push(dp);
        chosen.push(if fallback.last() == Some(&k) { 1 } else { d });
    }
    let out = fb.with_downsampling(&chosen)?;
    let fits = out.channels.iter().all(|c| c.support_len() * c.d <= fb.len);
    let mut out = out;
    if let Some(spec) = out.spec.as_mut() {
        spec.redfac = redfac;
    }
    let out = FilterBank::new(out.channels, out.fs, out.len, out.scale, out.real_signal, out.spec)?;
    Ok((
        out,
        DownsamplingReport { painless_factors: painless, painless_possible: redfac >= 1.0 && fits, fallback },
    ))
}

/// Gammatone bank `h(t) = t^{γ−1} e^{2πt(iξ_k − λ_k)}` with
/// `λ_k = β·ERB(ξ_k)/bw_divisor`, sampled for `ir_length` samples and
/// transformed to the length-`L` grid.
pub fn gammatone_filters(
    fs: f64,
    len: usize,
    centers: &[f64],
    beta: f64,
    order: u32,
    ir_length: usize,
    bw_divisor: f64,
) -> Result<FilterBank> {
    let nyq = fs / 2.0;
    let bandwidths = centers
        .iter()
        .map(|&c| scales::aud_bandwidth(FrequencyScale::Erb, c).map(|b| b / bw_divisor))
        .collect::<Result<Vec<_>>>()?;
    let paired = centers.iter().map(|&c| c > 0.0 && c < nyq).collect();
    let grid = Grid { centers: centers.to_vec(), bandwidths, paired };
    let channels = gammatone_channels(fs, len, &grid, beta, order, ir_length)?;
    FilterBank::new(channels, fs, len, FrequencyScale::Erb, true, None)
}

fn gammatone_from_grid(spec: &BankSpec, grid: &Grid, beta: f64, order: u32, ir_length: usize) -> Result<FilterBank> {
    let mut grid = grid.clone();
    for (b, &c) in grid.bandwidths.iter_mut().zip(&grid.centers) {
        *b = scales::aud_bandwidth(FrequencyScale::Erb, c)? / spec.bw_divisor;
    }
    let channels = gammatone_channels(spec.fs, spec.len, &grid, beta, order, ir_length)?;
    let mut spec = spec.clone();
    spec.d = vec![1; channels.len()];
    FilterBank::new(channels, spec.fs, spec.len, spec.scale, true, Some(spec))
}

fn gammatone_channels(fs: f64, len: usize, grid: &Grid, beta: f64, order: u32, ir_length: usize) -> Result<Vec<Channel>> {
    if order < 1 {
        return domain("gammatone order must be at least 1");
    }
    if ir_length > len || ir_length == 0 {
        return domain(format!("impulse response length {ir_length} must be in 1..={len}"));
    }
    let mut out = Vec::with_capacity(grid.centers.len());
    for k in 0..grid.centers.len() {
        let (c, g) = (grid.centers[k], grid.bandwidths[k]);
        let lambda = beta * g;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (n, v) in buf.iter_mut().take(ir_length).enumerate() {
            let t = n as f64 / fs;
            let amp = t.powi(order as i32 - 1) * (-2.0 * PI * lambda * t).exp();
            *v = Complex64::from_polar(amp, 2.0 * PI * c * t);
        }
        fft::forward(&mut buf);
        out.push(truncated_channel(c, g, grid.paired[k], &buf, len));
    }
    Ok(out)
}

fn truncated_channel(center: f64, bandwidth: f64, paired: bool, dense: &[Complex64], len: usize) -> Channel {
    let peak = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = peak * TAIL_FLOOR;
    let (start, n) = circular_support(dense, |v| v.norm() >= floor);
    let values = (0..n).map(|i| dense[(start + i) % len]).collect();
    let mut ch = Channel { center, bandwidth, d: 1, start, values, paired };
    normalize(&mut ch, len);
    ch
}

/// Result of tuning a roex slope.
#[derive(Debug, Clone, Copy)]
pub struct RoexTuning {
    pub p: f64,
    pub iterations: usize,
    pub measured_erb: f64,
}

/// Roex bank `(1 − r)(1 + g)e^{−g} + r` with `g = p_k|ξ − ξ_k|/ξ_k`, each
/// `p_k` tuned so that the sampled response has the target ERB. A channel at
/// 0 Hz uses the Hann prototype instead.
pub fn roex_filters(fs: f64, len: usize, centers: &[f64], r: f64, bw_divisor: f64) -> Result<FilterBank> {
    let nyq = fs / 2.0;
    let bandwidths = centers
        .iter()
        .map(|&c| scales::aud_bandwidth(FrequencyScale::Erb, c).map(|b| b / bw_divisor))
        .collect::<Result<Vec<_>>>()?;
    let paired = centers.iter().map(|&c| c > 0.0 && c < nyq).collect();
    let grid = Grid { centers: centers.to_vec(), bandwidths, paired };
    let channels = roex_channels(fs, len, &grid, r)?;
    FilterBank::new(channels, fs, len, FrequencyScale::Erb, true, None)
}

fn roex_from_grid(spec: &BankSpec, grid: &Grid, r: f64) -> Result<FilterBank> {
    let channels = roex_channels(spec.fs, spec.len, grid, r)?;
    let mut spec = spec.clone();
    spec.d = vec![1; channels.len()];
    FilterBank::new(channels, spec.fs, spec.len, spec.scale, true, Some(spec))
}

fn roex_channels(fs: f64, len: usize, grid: &Grid, r: f64) -> Result<Vec<Channel>> {
    if !(0.0..1.0).contains(&r) {
        return domain(format!("roex floor r must be in [0, 1), got {r}"));
    }
    let mut out = Vec::with_capacity(grid.centers.len());
    for k in 0..grid.centers.len() {
        let (c, g, paired) = (grid.centers[k], grid.bandwidths[k], grid.paired[k]);
        if c <= 0.0 {
            let proto = Prototype::Hann;
            out.push(sample_shape(c, g, paired, len, fs, 0.5 * proto.support() * g, |dist| proto.eval(dist / g)));
        } else {
            let t = tune_roex(fs, len, c, g, r)?;
            out.push(roex_channel(fs, len, c, g, paired, t.p, r));
        }
    }
    Ok(out)
}

/// `g` beyond which `(1 + g)e^{−g}` drops under [`TAIL_FLOOR`].
fn roex_cutoff() -> f64 {
    let mut g: f64 = 20.0;
    for _ in 0..50 {
        // Newton on ln(1+g) − g − ln(floor).
        let f = (1.0 + g).ln() - g - TAIL_FLOOR.ln();
        let df = 1.0 / (1.0 + g) - 1.0;
        g -= f / df;
    }
    g
}

fn roex_channel(fs: f64, len: usize, center: f64, bandwidth: f64, paired: bool, p: f64, r: f64) -> Channel {
    let half = if r > 0.0 { fs } else { roex_cutoff() * center / p };
    sample_shape(center, bandwidth, paired, len, fs, half, |dist| {
        let g = p * dist.abs() / center;
        (1.0 - r) * (1.0 + g) * (-g).exp() + r
    })
}

/// Equivalent rectangular bandwidth `Σ|H|²·Δf / max|H|²` of a sampled
/// response, in Hz.
pub fn measured_erb(ch: &Channel, len: usize, fs: f64) -> f64 {
    let peak = ch.values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    ch.energy() * fs / len as f64 / peak
}

/// Finds the roex slope `p` whose sampled response has ERB `target` Hz by
/// bisection on `ln p`, starting from `4ξ/target`.
pub fn tune_roex(fs: f64, len: usize, center: f64, target: f64, r: f64) -> Result<RoexTuning> {
    if !(center > 0.0) {
        return domain("roex center must be positive");
    }
    let erb_of = |p: f64| measured_erb(&roex_channel(fs, len, center, target, true, p, r), len, fs);
    let p0 = 4.0 * center / target;
    let (mut lo, mut hi) = (p0.ln() - 3.0, p0.ln() + 3.0);
    // The measured ERB falls as p grows; widen until the target is bracketed.
    let mut widen = 0;
    while erb_of(lo.exp()) < target && widen < 20 {
        lo -= 3.0;
        widen += 1;
    }
    while erb_of(hi.exp()) > target && widen < 40 {
        hi += 3.0;
        widen += 1;
    }
    let mut iterations = 0;
    while hi - lo > 1e-10 && iterations < 100 {
        let mid = 0.5 * (lo + hi);
        if erb_of(mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let p = (0.5 * (lo + hi)).exp();
    Ok(RoexTuning { p, iterations, measured_erb: erb_of(p) })
}
