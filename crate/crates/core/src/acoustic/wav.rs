use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn header_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) if source.kind() == std::io::ErrorKind::NotFound => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::CorruptHeader(format!("{}: {other}", path.display())),
    }
}

/// Reads 16-bit integer or 32-bit float WAV, averaging channels to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let mut reader = WavReader::open(path).map_err(|e| header_error(path, e))?;
    let spec = reader.spec();
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Int, bits) => return Err(Error::UnsupportedEncoding(format!("{bits}-bit integer PCM"))),
        (SampleFormat::Float, bits) => return Err(Error::UnsupportedEncoding(format!("{bits}-bit float"))),
    }
    .map_err(|e| header_error(path, e))?;

    let channels = usize::from(spec.channels.max(1));
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    if mono.is_empty() {
        return Err(Error::CorruptHeader(format!("{}: no sample frames", path.display())));
    }
    AudioSignal::new(mono, spec.sample_rate)
}

/// Writes a mono WAV. 16-bit output clips to `[-1, 1)`.
pub fn write_wav(path: impl AsRef<Path>, signal: &AudioSignal, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let (bits, format) = match encoding {
        WavEncoding::Pcm16 => (16, SampleFormat::Int),
        WavEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: bits,
        sample_format: format,
    };
    let io_err = |e: hound::Error| match e {
        hound::Error::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::InvalidParameter(other.to_string()),
    };
    let mut writer = WavWriter::create(path, spec).map_err(io_err)?;
    for &v in signal.samples() {
        match encoding {
            WavEncoding::Pcm16 => writer.write_sample((v * 32768.0).round().clamp(-32768.0, 32767.0) as i16),
            WavEncoding::Float32 => writer.write_sample(v as f32),
        }
        .map_err(io_err)?;
    }
    writer.finalize().map_err(io_err)
}
