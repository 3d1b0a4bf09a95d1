//! WAV input and output through `hound`.

use std::path::Path;

use hound::{SampleFormat, WavSpec};

use crate::error::{Error, Result};

/// A real signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub fs: f64,
}

/// Sample encoding for [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn wav_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::Format(other.to_string()),
    }
}

/// Reads a PCM16 or float32 WAV file. PCM values are scaled by `1/32768`;
/// for multichannel files only the first channel is kept.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let mut reader = hound::WavReader::open(path.as_ref()).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    if channels > 1 {
        log::info!("{}: {channels} channels, keeping the first", path.as_ref().display());
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .step_by(channels)
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (fmt, bits) => {
            let kind = if fmt == SampleFormat::Int { "integer PCM" } else { "float" };
            return Err(Error::Format(format!("unsupported WAV encoding: {bits}-bit {kind}")));
        }
    };
    Ok(Signal { samples, fs: spec.sample_rate as f64 })
}

/// Writes a mono WAV file. PCM16 output clips to `[−1, 1)`.
pub fn write_wav(path: impl AsRef<Path>, signal: &Signal, encoding: WavEncoding) -> Result<()> {
    if !(signal.fs > 0.0) || signal.fs.fract() != 0.0 || signal.fs > u32::MAX as f64 {
        return Err(Error::Domain(format!("sample rate {} is not a positive integer", signal.fs)));
    }
    let (bits, fmt) = match encoding {
        WavEncoding::Pcm16 => (16, SampleFormat::Int),
        WavEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec { channels: 1, sample_rate: signal.fs as u32, bits_per_sample: bits, sample_format: fmt };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec).map_err(wav_err)?;
    for &v in &signal.samples {
        match encoding {
            WavEncoding::Pcm16 => {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q).map_err(wav_err)?;
            }
            WavEncoding::Float32 => writer.write_sample(v as f32).map_err(wav_err)?,
        }
    }
    writer.finalize().map_err(wav_err)
}
