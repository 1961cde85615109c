use std::f64::consts::PI;
use std::path::Path;

use super::AudioClip;
use crate::error::{Error, Result};

/// Reads integer or float PCM WAV and downmixes to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Audio(format!("{}: {other}", path.display())),
    })?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Audio(format!("{}: zero channels", path.display())));
    }

    let interleaved: Vec<f32> = match spec.sample_format {
        hound::SampleFormat::Float => reader.samples::<f32>().collect::<Result<_, _>>(),
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f32 * scale))
                .collect::<Result<_, _>>()
        }
    }
    .map_err(|e| Error::Audio(format!("{}: {e}", path.display())))?;

    let mono: Vec<f32> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f32>() / channels as f32)
        .collect();
    AudioClip::new(mono, spec.sample_rate).map_err(|_| Error::Audio(format!("{}: no audio frames", path.display())))
}

const SINC_ZEROS: usize = 32;

/// Band-limited resampling with a Hann-windowed sinc kernel.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(Error::InvalidParameter("target sample rate must be positive".into()));
    }
    if clip.sample_rate == target_rate {
        return Ok(clip.clone());
    }
    let ratio = target_rate as f64 / clip.sample_rate as f64;
    let cutoff = ratio.min(1.0);
    let half_width = SINC_ZEROS as f64 / cutoff;
    let n_out = ((clip.samples.len() as f64) * ratio).round().max(1.0) as usize;
    let src = &clip.samples;

    let out = (0..n_out)
        .map(|j| {
            let t = j as f64 / ratio;
            let lo = (t - half_width).ceil().max(0.0) as usize;
            let hi = ((t + half_width).floor() as usize).min(src.len() - 1);
            let mut acc = 0.0;
            for (i, &s) in src.iter().enumerate().take(hi + 1).skip(lo) {
                let x = i as f64 - t;
                let window = 0.5 + 0.5 * (PI * x / half_width).cos();
                acc += s as f64 * cutoff * sinc(cutoff * x) * window;
            }
            acc as f32
        })
        .collect();
    AudioClip::new(out, target_rate)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}
