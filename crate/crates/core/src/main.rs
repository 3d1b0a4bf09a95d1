//! Command-line front end: bank design, analysis, synthesis, exports and
//! the comparison, separation and denoising experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use audlet::design::{BankSpec, Family, Prototype, Spacing};
use audlet::error::{Error, Result};
use audlet::experiments::{self, BankTrio};
use audlet::frame::{self, CgOptions, UniformLimits};
use audlet::io::{self, Precision, Signal, WavEncoding};
use audlet::metrics::BssScores;
use audlet::processing::{apply_mask, oracle_binary_mask};
use audlet::{analyze, synthesize, Coefficients, FilterBank, FrequencyScale};

const EXIT_HELP: &str = "Exit codes: 0 success, 2 usage or invalid argument, 3 file format or I/O error, \
4 numerical failure (no convergence, not a frame, size limits).";

#[derive(Parser)]
#[command(name = "audlet", version, about = "Invertible auditory filter banks", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Proto {
    Hann,
    Gauss,
    Roex,
    Gammatone,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Painless,
    Uniform,
    Cg,
    Transposed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Erb,
    Bark,
    Mel,
}

impl From<Scale> for FrequencyScale {
    fn from(s: Scale) -> Self {
        match s {
            Scale::Erb => FrequencyScale::Erb,
            Scale::Bark => FrequencyScale::Bark,
            Scale::Mel => FrequencyScale::Mel,
        }
    }
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Reconstruction method.
    #[arg(long, value_enum, default_value = "cg")]
    method: Method,
    /// Relative residual tolerance for conjugate gradients.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration limit for conjugate gradients.
    #[arg(long, default_value_t = 500)]
    maxit: usize,
    /// Disable the diagonal preconditioner.
    #[arg(long)]
    noprecond: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Design a bank and write its descriptor.
    Design {
        #[arg(long, value_enum, default_value = "erb")]
        scale: Scale,
        #[arg(long, default_value_t = 16000.0)]
        fs: f64,
        #[arg(long, default_value_t = 63840)]
        len: usize,
        #[arg(long, default_value_t = 0.0)]
        fmin: f64,
        /// Upper edge in Hz, Nyquist by default.
        #[arg(long)]
        fmax: Option<f64>,
        /// Filters per auditory unit.
        #[arg(long, conflicts_with = "k")]
        v: Option<f64>,
        /// Number of grid steps.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "hann")]
        proto: Proto,
        #[arg(long, default_value_t = 1.0)]
        bwdiv: f64,
        #[arg(long, default_value_t = 1.0)]
        redfac: f64,
        /// Descriptor output path.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Analyze a WAV file into a coefficient file.
    Analyze {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Store single-precision values.
        #[arg(long)]
        single: bool,
    },
    /// Resynthesize a WAV file from a coefficient file.
    Synthesize {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Write the bank response as CSV.
    Respond {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write the coefficient magnitudes of a WAV file as CSV.
    Spectrogram {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = -80.0, allow_hyphen_values = true)]
        floor: f64,
    },
    /// Reconstruction errors of AUDlet, roex and gammatone banks.
    CompareGammatone {
        /// Test signal; a synthetic speech-like signal when omitted.
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 16000.0)]
        fs: f64,
        #[arg(long, default_value_t = 63840)]
        len: usize,
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        #[arg(long, default_value_t = 1.0)]
        bwdiv: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.38, 0.5, 1.0, 2.0])]
        redfac: Vec<f64>,
    },
    /// Masked resynthesis of a mixture with separation scores.
    MaskSeparate {
        /// AUDlet bank descriptor; the gammatone bank shares its grid.
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        interferer: PathBuf,
        /// Mask file; the oracle binary mask is used when omitted.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Where to save the mask in use.
        #[arg(long)]
        save_mask: Option<PathBuf>,
        /// Separated target output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Soft-threshold denoising of a noisy copy of a clean WAV file.
    Denoise {
        #[arg(long, short)]
        input: PathBuf,
        /// Noise standard deviation.
        #[arg(long)]
        sigma: f64,
        /// Threshold, equal to sigma by default.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6.0)]
        v: f64,
        #[arg(long, default_value_t = 6.0)]
        bwdiv: f64,
        #[arg(long, default_value_t = 0.38)]
        redfac: f64,
        /// Denoised AUDlet output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn fit_length(sig: &Signal, fb: &FilterBank) -> Result<Vec<f64>> {
    if sig.fs != fb.fs {
        return Err(Error::Domain(format!("signal rate {} Hz differs from bank rate {} Hz", sig.fs, fb.fs)));
    }
    if sig.samples.len() > fb.len {
        return Err(Error::Domain(format!("signal has {} samples, bank length is {}", sig.samples.len(), fb.len)));
    }
    let mut x = sig.samples.clone();
    if x.len() < fb.len {
        log::info!("zero-padding {} samples to {}", x.len(), fb.len);
        x.resize(fb.len, 0.0);
    }
    Ok(x)
}

fn reconstruct(c: &Coefficients, fb: &FilterBank, args: &SynthArgs) -> Result<Vec<f64>> {
    match args.method {
        Method::Painless => synthesize(c, &frame::painless_dual(fb)?),
        Method::Transposed => synthesize(c, &frame::transposed_synthesis(fb)),
        Method::Uniform => {
            let ub = frame::to_uniform(fb, UniformLimits::default())?;
            frame::uniform_dual(&ub)?.synthesize(c)
        }
        Method::Cg => {
            let opts = CgOptions { tol: args.tol, max_iter: args.maxit, precondition: !args.noprecond };
            let (x, rep) = frame::cg_synthesize(c, fb, opts)?;
            if !rep.converged {
                let last = rep.residuals.last().copied().unwrap_or(f64::NAN);
                return Err(Error::NotConverged(format!(
                    "{} iterations, relative residual {last:.3e} above {:.1e}",
                    rep.iterations, args.tol
                )));
            }
            log::info!("conjugate gradients converged in {} iterations", rep.iterations);
            Ok(x)
        }
    }
}

fn write_output(path: &Path, samples: Vec<f64>, fs: f64) -> Result<()> {
    io::write_wav(path, &Signal { samples, fs }, WavEncoding::Float32)
}

fn scores_row(name: &str, s: &BssScores) -> String {
    format!("{name:<10} {:>8.2} {:>8.2} {:>8.2}\n", s.sdr, s.sir, s.sar)
}

fn trio_from(fb: &FilterBank) -> Result<BankTrio> {
    let spec = fb.spec.clone().ok_or_else(|| Error::Domain("bank has no design parameters".into()))?;
    if !matches!(spec.family, Family::Audlet { .. }) {
        return Err(Error::Domain("separation needs an AUDlet bank".into()));
    }
    let gt = BankSpec { d: fb.downsampling(), ..spec.with_family(BankSpec::gammatone_family()) }.build()?;
    let roex = BankSpec { d: fb.downsampling(), ..spec.with_family(Family::Roex { r: 0.0 }) }.build()?;
    Ok(BankTrio { audlet: fb.clone(), gammatone: gt, roex })
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Design { scale, fs, len, fmin, fmax, v, k, proto, bwdiv, redfac, out } => {
            let spacing = match (v, k) {
                (_, Some(k)) => Spacing::Count(k),
                (Some(v), None) => Spacing::Density(v),
                (None, None) => Spacing::Density(1.0),
            };
            let family = match proto {
                Proto::Hann => Family::Audlet { prototype: Prototype::Hann },
                Proto::Gauss => Family::Audlet { prototype: Prototype::Gaussian },
                Proto::Roex => Family::Roex { r: 0.0 },
                Proto::Gammatone => BankSpec::gammatone_family(),
            };
            let spec = BankSpec {
                family,
                scale: scale.into(),
                fs,
                len,
                fmin,
                fmax: fmax.unwrap_or(fs / 2.0),
                spacing,
                bw_divisor: bwdiv,
                redfac,
                d: Vec::new(),
            };
            let fb = spec.build()?;
            let diag = frame::diagnostics(&fb);
            println!("channels  {}", fb.num_channels());
            println!("K         {}", fb.num_channels().saturating_sub(1));
            println!("R         {:.4}", fb.redundancy());
            println!("painless  {}", diag.painless);
            println!("A, B      {:.4}, {:.4}", diag.a, diag.b);
            io::write_bank(&out, &fb)
        }
        Command::Analyze { bank, input, out, single } => {
            let fb = io::read_bank(&bank)?;
            let x = fit_length(&io::read_wav(&input)?, &fb)?;
            let precision = if single { Precision::Complex64 } else { Precision::Complex128 };
            io::write_coefficients(&out, &analyze(&x, &fb)?, precision)
        }
        Command::Synthesize { bank, input, out, synth } => {
            let fb = io::read_bank(&bank)?;
            let c = io::read_coefficients(&input, Some(fb.fingerprint()))?;
            let x = reconstruct(&c, &fb, &synth)?;
            write_output(&out, x, fb.fs)
        }
        Command::Respond { bank, out } => io::export_response_csv(&out, &io::read_bank(&bank)?),
        Command::Spectrogram { bank, input, out, floor } => {
            let fb = io::read_bank(&bank)?;
            let x = fit_length(&io::read_wav(&input)?, &fb)?;
            io::export_spectrogram_csv(&out, &analyze(&x, &fb)?, floor)
        }
        Command::CompareGammatone { input, fs, len, v, bwdiv, redfac } => {
            let (x, fs) = match input {
                Some(p) => {
                    let s = io::read_wav(&p)?;
                    (s.samples, s.fs)
                }
                None => (experiments::speech_like(fs, len, 120.0, 1), fs),
            };
            let rows = experiments::compare_gammatone(&x, fs, v, bwdiv, &redfac)?;
            print!("{}", experiments::format_comparison(&rows));
            Ok(())
        }
        Command::MaskSeparate { bank, target, interferer, mask, save_mask, out } => {
            let fb = io::read_bank(&bank)?;
            let t = fit_length(&io::read_wav(&target)?, &fb)?;
            let i = fit_length(&io::read_wav(&interferer)?, &fb)?;
            let trio = trio_from(&fb)?;
            let (ct, ci) = (analyze(&t, &fb)?, analyze(&i, &fb)?);
            let m = match mask {
                Some(p) => io::read_mask(&p, Some(&ct))?,
                None => oracle_binary_mask(&ct, &ci)?,
            };
            if let Some(p) = save_mask {
                io::write_mask(&p, &m, &ct)?;
            }
            let mix: Vec<f64> = t.iter().zip(&i).map(|(a, b)| a + b).collect();
            let a = experiments::reconstruct(&apply_mask(&analyze(&mix, &fb)?, &m)?, &fb)?;
            let g = synthesize(
                &apply_mask(&analyze(&mix, &trio.gammatone)?, &m)?,
                &frame::transposed_synthesis(&trio.gammatone),
            )?;
            let refs = [t, i];
            let sa = audlet::metrics::bss_eval(&refs, &a, 0)?;
            let sg = audlet::metrics::bss_eval(&refs, &g, 0)?;
            println!("{:<10} {:>8} {:>8} {:>8}", "bank", "SDR", "SIR", "SAR");
            print!("{}{}", scores_row("AUDlet", &sa), scores_row("gammatone", &sg));
            if let Some(p) = out {
                write_output(&p, a, fb.fs)?;
            }
            Ok(())
        }
        Command::Denoise { input, sigma, eta, seed, v, bwdiv, redfac, out } => {
            if !(sigma > 0.0) {
                return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
            }
            let clean = io::read_wav(&input)?;
            let trio = experiments::bank_trio(clean.fs, clean.samples.len(), v, bwdiv, redfac)?;
            let noise = experiments::white_noise(clean.samples.len(), sigma, seed);
            let noisy: Vec<f64> = clean.samples.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let r = experiments::denoise(&clean.samples, &noisy, &trio, eta.unwrap_or(sigma))?;
            println!("{:<10} {:>8} {:>8}", "signal", "SNR", "segSNR");
            for (name, q) in [("input", r.input), ("AUDlet", r.audlet), ("gammatone", r.gammatone)] {
                println!("{name:<10} {:>8.2} {:>8.2}", q.snr, q.segsnr);
            }
            if let Some(p) = out {
                write_output(&p, r.audlet_output, clean.fs)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
