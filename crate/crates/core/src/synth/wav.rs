use std::io::{Seek, Write};
use std::path::Path;

use crate::error::{Error, Result};

fn spec(sample_rate: u32) -> hound::WavSpec {
    hound::WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int }
}

fn to_i16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16
}

fn wav_err(e: hound::Error) -> Error {
    Error::Io(e.to_string())
}

/// 16-bit mono PCM.
pub fn write_wav_to<W: Write + Seek>(out: W, audio: &[f64], sample_rate: u32) -> Result<()> {
    let mut w = hound::WavWriter::new(out, spec(sample_rate)).map_err(wav_err)?;
    for &x in audio {
        w.write_sample(to_i16(x)).map_err(wav_err)?;
    }
    w.finalize().map_err(wav_err)
}

pub fn write_wav(path: impl AsRef<Path>, audio: &[f64], sample_rate: u32) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_wav_to(f, audio, sample_rate)
}

/// Samples rescaled to [-1, 1] and the file's sample rate.
pub fn read_wav(path: impl AsRef<Path>) -> Result<(Vec<f64>, u32)> {
    let mut r = hound::WavReader::open(path).map_err(wav_err)?;
    let rate = r.spec().sample_rate;
    let samples = r
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / i16::MAX as f64))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    Ok((samples, rate))
}
