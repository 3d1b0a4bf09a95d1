//! Filter bank containers.
//!
//! Responses live on the length-`L` DFT grid. Each channel stores a
//! contiguous run of bins that may wrap around bin 0. A channel flagged as
//! `paired` stands for itself plus its implicit mirror image
//! `conj(H[L − j])`, which carries the negative-frequency half of a real
//! filter pair; DC and Nyquist channels are their own mirror.

use rustfft::num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::design::BankSpec;
use crate::error::{domain, Result};
use crate::scales::FrequencyScale;

/// One filter of a bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    /// Center frequency in Hz.
    pub center: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    /// Downsampling factor, a divisor of the signal length.
    pub d: usize,
    /// First bin of the stored support.
    pub start: usize,
    /// Response values on bins `start, start+1, …` modulo `L`.
    pub values: Vec<Complex64>,
    /// Whether the channel implies a mirrored negative-frequency partner.
    pub paired: bool,
}

impl Channel {
    /// Builds a channel from a dense length-`L` response, keeping the
    /// shortest circular run that holds every nonzero bin.
    pub fn from_dense(center: f64, bandwidth: f64, dense: &[Complex64], paired: bool) -> Channel {
        let (start, len) = circular_support(dense, |v| v.norm_sqr() > 0.0);
        let l = dense.len();
        let values = (0..len).map(|i| dense[(start + i) % l]).collect();
        Channel { center, bandwidth, d: 1, start, values, paired }
    }

    /// Synthesis weight: 2 for paired channels, 1 otherwise.
    pub fn weight(&self) -> f64 {
        if self.paired {
            2.0
        } else {
            1.0
        }
    }

    /// Number of stored bins.
    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// Discrete energy `Σ|H[j]|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Dense length-`len` response.
    pub fn dense(&self, len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, v) in self.values.iter().enumerate() {
            out[(self.start + i) % len] += *v;
        }
        out
    }

    /// The mirrored response `conj(H[L − j])` as an explicit channel.
    pub fn mirror(&self, len: usize) -> Channel {
        let n = self.values.len();
        let start = if n == 0 { 0 } else { (2 * len - self.start - (n - 1)) % len };
        let values = (0..n).map(|m| self.values[n - 1 - m].conj()).collect();
        Channel {
            center: -self.center,
            bandwidth: self.bandwidth,
            d: self.d,
            start,
            values,
            paired: false,
        }
    }

    /// Iterates over `(bin, value)` pairs of the support.
    pub fn bins(&self, len: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| ((self.start + i) % len, *v))
    }
}

/// Shortest circular interval containing every index where `keep` holds.
/// Returns `(start, length)`; an all-false input yields `(0, 0)`.
pub(crate) fn circular_support<T>(data: &[T], keep: impl Fn(&T) -> bool) -> (usize, usize) {
    let n = data.len();
    let mask: Vec<bool> = data.iter().map(&keep).collect();
    if !mask.iter().any(|&m| m) {
        return (0, 0);
    }
    if mask.iter().all(|&m| m) {
        return (0, n);
    }
    // Longest circular run of dropped bins; the support is its complement.
    let first_kept = mask.iter().position(|&m| m).unwrap();
    let (mut best_len, mut best_end) = (0usize, 0usize);
    let mut run = 0usize;
    for step in 1..=n {
        let i = (first_kept + step) % n;
        if mask[i] {
            if run > best_len {
                best_len = run;
                best_end = i;
            }
            run = 0;
        } else {
            run += 1;
        }
    }
    (best_end, n - best_len)
}

/// A filter bank sampled on the DFT grid of length `len`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub channels: Vec<Channel>,
    /// Sample rate in Hz.
    pub fs: f64,
    /// Signal length in samples.
    pub len: usize,
    pub scale: FrequencyScale,
    /// Whether the bank acts on real signals through paired channels.
    pub real_signal: bool,
    /// Canonical design parameters, when the bank came from a design routine.
    pub spec: Option<BankSpec>,
    fingerprint: [u8; 32],
}

#[derive(Serialize)]
struct Geometry<'a> {
    fs: f64,
    len: usize,
    centers: Vec<f64>,
    bandwidths: Vec<f64>,
    d: Vec<usize>,
    paired: Vec<bool>,
    scale: &'a FrequencyScale,
}

impl FilterBank {
    /// Wraps explicit channels into a bank, checking the geometry.
    pub fn new(
        channels: Vec<Channel>,
        fs: f64,
        len: usize,
        scale: FrequencyScale,
        real_signal: bool,
        spec: Option<BankSpec>,
    ) -> Result<FilterBank> {
        if len < 1 {
            return domain("signal length must be positive");
        }
        for (k, ch) in channels.iter().enumerate() {
            if ch.d == 0 || !len.is_multiple_of(ch.d) {
                return domain(format!("channel {k}: d = {} does not divide L = {len}", ch.d));
            }
            if ch.values.len() > len || ch.start >= len.max(1) {
                return domain(format!("channel {k}: support exceeds the grid"));
            }
        }
        let mut fb = FilterBank { channels, fs, len, scale, real_signal, spec, fingerprint: [0; 32] };
        fb.fingerprint = fb.compute_fingerprint();
        Ok(fb)
    }

    /// SHA-256 of the canonical descriptor, or of the channel geometry for
    /// banks built by hand.
    pub fn fingerprint(&self) -> [u8; 32] {
        self.fingerprint
    }

    fn compute_fingerprint(&self) -> [u8; 32] {
        let text = match &self.spec {
            Some(spec) => spec.canonical_json(),
            None => serde_json::to_string(&Geometry {
                fs: self.fs,
                len: self.len,
                centers: self.centers(),
                bandwidths: self.channels.iter().map(|c| c.bandwidth).collect(),
                d: self.downsampling(),
                paired: self.channels.iter().map(|c| c.paired).collect(),
                scale: &self.scale,
            })
            .expect("geometry serializes"),
        };
        Sha256::digest(text.as_bytes()).into()
    }

    /// Same geometry and fingerprint with new responses.
    pub fn with_responses(&self, channels: Vec<Channel>) -> FilterBank {
        assert_eq!(channels.len(), self.channels.len());
        FilterBank { channels, ..self.clone() }
    }

    /// Copy with new downsampling factors; the fingerprint is recomputed.
    pub fn with_downsampling(&self, d: &[usize]) -> Result<FilterBank> {
        if d.len() != self.channels.len() {
            return domain(format!("{} factors for {} channels", d.len(), self.channels.len()));
        }
        let mut channels = self.channels.clone();
        for (ch, &dk) in channels.iter_mut().zip(d) {
            ch.d = dk;
        }
        let spec = self.spec.clone().map(|mut s| {
            s.d = d.to_vec();
            s
        });
        FilterBank::new(channels, self.fs, self.len, self.scale, self.real_signal, spec)
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.center).collect()
    }

    pub fn downsampling(&self) -> Vec<usize> {
        self.channels.iter().map(|c| c.d).collect()
    }

    /// Channels with every mirror made explicit.
    pub fn expanded(&self) -> Vec<Channel> {
        let mut out = Vec::with_capacity(2 * self.channels.len());
        for ch in &self.channels {
            let mut c = ch.clone();
            c.paired = false;
            out.push(c);
            if ch.paired {
                out.push(ch.mirror(self.len));
            }
        }
        out
    }

    /// The adjoint bank `conj(H_k)`, used for synthesis by the frame operator.
    pub fn adjoint(&self) -> FilterBank {
        let channels = self
            .channels
            .iter()
            .map(|ch| Channel { values: ch.values.iter().map(|v| v.conj()).collect(), ..ch.clone() })
            .collect();
        self.with_responses(channels)
    }

    /// Redundancy `Σ w_k / d_k`.
    pub fn redundancy(&self) -> f64 {
        self.channels.iter().map(|c| c.weight() / c.d as f64).sum()
    }
}
