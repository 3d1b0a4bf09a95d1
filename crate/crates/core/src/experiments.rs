//! Experiment pipelines: reconstruction comparison against gammatone and
//! roex banks, soft-threshold denoising and oracle-mask separation.
//!
//! Also provides a deterministic speech-like test signal so that the
//! pipelines can run without a speech corpus.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::bank::FilterBank;
use crate::design::{BankSpec, Family};
use crate::error::{domain, Result};
use crate::frame::{cg_synthesize, diagnostics, painless_dual, transposed_synthesis, CgOptions};
use crate::metrics::{bss_eval, rel_error, segsnr_default, snr, BssScores};
use crate::processing::{apply_mask, oracle_binary_mask, soft_threshold};
use crate::transform::{analyze, synthesize, Coefficients};

/// Voiced/unvoiced syllable sequence with formant-shaped harmonics, peak
/// normalized to 0.5. `f0` sets the mean pitch in Hz.
pub fn speech_like(fs: f64, len: usize, f0: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut x = vec![0.0; len];
    let vowels = [(700.0, 1200.0, 2600.0), (300.0, 2300.0, 3000.0), (500.0, 900.0, 2500.0), (350.0, 1000.0, 2300.0)];
    let mut pos = (0.02 * fs) as usize;
    while pos < len {
        let syl = ((0.12 + 0.18 * rng.random::<f64>()) * fs) as usize;
        let end = (pos + syl).min(len);
        let voiced = rng.random::<f64>() < 0.75;
        if voiced {
            let (f1, f2, f3) = vowels[rng.random_range(0..vowels.len())];
            let pitch = f0 * (0.85 + 0.3 * rng.random::<f64>());
            let glide = 0.15 * (rng.random::<f64>() - 0.5);
            let nh = ((0.45 * fs) / pitch) as usize;
            let amps: Vec<f64> = (1..=nh)
                .map(|h| {
                    let f = h as f64 * pitch;
                    let res = |fc: f64, bw: f64| 1.0 / (1.0 + ((f - fc) / bw).powi(2));
                    (res(f1, 90.0) + 0.6 * res(f2, 120.0) + 0.3 * res(f3, 180.0) + 0.02) / (h as f64).sqrt()
                })
                .collect();
            let mut phase: Vec<f64> = (0..nh).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
            for n in pos..end {
                let u = (n - pos) as f64 / (end - pos) as f64;
                let env = (PI * u).sin().powi(2);
                let p = pitch * (1.0 + glide * u) / fs;
                let mut s = 0.0;
                for (h, (a, ph)) in amps.iter().zip(phase.iter_mut()).enumerate() {
                    *ph += 2.0 * PI * p * (h + 1) as f64;
                    s += a * ph.sin();
                }
                x[n] += env * s;
            }
        } else {
            let mut prev = 0.0;
            for n in pos..end {
                let u = (n - pos) as f64 / (end - pos) as f64;
                let w: f64 = rng.sample(StandardNormal);
                x[n] += 0.15 * (PI * u).sin() * (w - prev);
                prev = w;
            }
        }
        pos = end + ((0.02 + 0.08 * rng.random::<f64>()) * fs) as usize;
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    x
}

/// White Gaussian noise with standard deviation `sigma`.
pub fn white_noise(len: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Reconstructs from AUDlet coefficients: the painless dual when it exists,
/// conjugate gradients otherwise.
pub fn reconstruct(c: &Coefficients, fb: &FilterBank) -> Result<Vec<f64>> {
    if diagnostics(fb).painless {
        synthesize(c, &painless_dual(fb)?)
    } else {
        Ok(cg_synthesize(c, fb, CgOptions::default())?.0)
    }
}

/// Analysis followed by time-reversed (transposed) synthesis.
pub fn transposed_roundtrip(x: &[f64], fb: &FilterBank) -> Result<Vec<f64>> {
    synthesize(&analyze(x, fb)?, &transposed_synthesis(fb))
}

/// Banks sharing one grid and one set of downsampling factors.
#[derive(Debug, Clone)]
pub struct BankTrio {
    pub audlet: FilterBank,
    pub gammatone: FilterBank,
    pub roex: FilterBank,
}

/// Hann AUDlet, gammatone and roex banks on the ERB grid over `[0, fs/2]`.
pub fn bank_trio(fs: f64, len: usize, density: f64, bw_divisor: f64, redfac: f64) -> Result<BankTrio> {
    let spec = BankSpec { bw_divisor, ..BankSpec::audlet(fs, len, density, redfac) };
    let audlet = spec.build()?;
    let d = audlet.downsampling();
    let with = |family| BankSpec { d: d.clone(), ..spec.with_family(family) };
    Ok(BankTrio {
        gammatone: with(BankSpec::gammatone_family()).build()?,
        roex: with(Family::Roex { r: 0.0 }).build()?,
        audlet,
    })
}

/// One row of the reconstruction comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub redfac: f64,
    pub redundancy: f64,
    pub audlet: f64,
    /// True when the AUDlet bank was inverted by its painless dual.
    pub painless: bool,
    pub roex: f64,
    pub gammatone: f64,
}

/// Relative reconstruction errors of the three families at each `redfac`.
pub fn compare_gammatone(x: &[f64], fs: f64, density: f64, bw_divisor: f64, redfacs: &[f64]) -> Result<Vec<ComparisonRow>> {
    redfacs
        .iter()
        .map(|&redfac| {
            let t = bank_trio(fs, x.len(), density, bw_divisor, redfac)?;
            let c = analyze(x, &t.audlet)?;
            Ok(ComparisonRow {
                redfac,
                redundancy: t.audlet.redundancy(),
                audlet: rel_error(x, &reconstruct(&c, &t.audlet)?)?,
                painless: diagnostics(&t.audlet).painless,
                roex: rel_error(x, &transposed_roundtrip(x, &t.roex)?)?,
                gammatone: rel_error(x, &transposed_roundtrip(x, &t.gammatone)?)?,
            })
        })
        .collect()
}

/// Text table of comparison rows.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = format!("{:>8} {:>8} {:>12} {:>12} {:>12}\n", "redfac", "R", "AUDlet", "roex", "gammatone");
    for r in rows {
        out += &format!(
            "{:>8.2} {:>8.3} {:>12.2e} {:>12.3} {:>12.3}\n",
            r.redfac, r.redundancy, r.audlet, r.roex, r.gammatone
        );
    }
    out
}

/// Output quality of one denoised signal.
#[derive(Debug, Clone, Copy)]
pub struct Quality {
    pub snr: f64,
    pub segsnr: f64,
}

fn quality(clean: &[f64], est: &[f64], fs: f64) -> Result<Quality> {
    Ok(Quality { snr: snr(clean, est)?, segsnr: segsnr_default(clean, est, fs)? })
}

/// Result of [`denoise`].
#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub input: Quality,
    pub audlet: Quality,
    pub gammatone: Quality,
    pub audlet_output: Vec<f64>,
    pub gammatone_output: Vec<f64>,
}

/// Soft-thresholds `noisy` with threshold `eta` in the AUDlet bank
/// (inverted exactly) and the gammatone bank (transposed synthesis), scoring
/// both against `clean`.
pub fn denoise(clean: &[f64], noisy: &[f64], trio: &BankTrio, eta: f64) -> Result<DenoiseOutcome> {
    if clean.len() != noisy.len() {
        return domain("clean and noisy signals differ in length");
    }
    let fs = trio.audlet.fs;
    let a = reconstruct(&soft_threshold(&analyze(noisy, &trio.audlet)?, eta)?, &trio.audlet)?;
    let g = synthesize(
        &soft_threshold(&analyze(noisy, &trio.gammatone)?, eta)?,
        &transposed_synthesis(&trio.gammatone),
    )?;
    Ok(DenoiseOutcome {
        input: quality(clean, noisy, fs)?,
        audlet: quality(clean, &a, fs)?,
        gammatone: quality(clean, &g, fs)?,
        audlet_output: a,
        gammatone_output: g,
    })
}

/// Noise standard deviation giving `snr_db` against `clean`.
pub fn sigma_for_snr(clean: &[f64], snr_db: f64) -> f64 {
    let p = clean.iter().map(|v| v * v).sum::<f64>() / clean.len().max(1) as f64;
    (p / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Result of [`separate`].
#[derive(Debug, Clone)]
pub struct SeparationOutcome {
    pub audlet: BssScores,
    pub gammatone: BssScores,
    pub audlet_output: Vec<f64>,
    pub gammatone_output: Vec<f64>,
}

/// Masks the mixture `target + interferer` with the binary mask where the
/// target's AUDlet coefficients dominate, applies the same mask in both
/// banks and scores the estimates.
pub fn separate(target: &[f64], interferer: &[f64], trio: &BankTrio) -> Result<SeparationOutcome> {
    if target.len() != interferer.len() {
        return domain("sources differ in length");
    }
    let mix: Vec<f64> = target.iter().zip(interferer).map(|(a, b)| a + b).collect();
    let mask = oracle_binary_mask(&analyze(target, &trio.audlet)?, &analyze(interferer, &trio.audlet)?)?;
    let a = reconstruct(&apply_mask(&analyze(&mix, &trio.audlet)?, &mask)?, &trio.audlet)?;
    let g = synthesize(
        &apply_mask(&analyze(&mix, &trio.gammatone)?, &mask)?,
        &transposed_synthesis(&trio.gammatone),
    )?;
    let refs = [target.to_vec(), interferer.to_vec()];
    Ok(SeparationOutcome {
        audlet: bss_eval(&refs, &a, 0)?,
        gammatone: bss_eval(&refs, &g, 0)?,
        audlet_output: a,
        gammatone_output: g,
    })
}
