use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{AudioClip, FeatureGram, GramKind};
use crate::error::{Error, Result};

/// MFCC settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccParams {
    pub n_mfcc: usize,
    pub n_mels: usize,
    pub n_fft: usize,
    pub hop_length: usize,
    pub fmin: f64,
    /// Defaults to Nyquist.
    pub fmax: Option<f64>,
    /// Power floor before the log.
    pub log_floor: f64,
}

impl Default for MfccParams {
    fn default() -> Self {
        Self {
            n_mfcc: 20,
            n_mels: 128,
            n_fft: 2048,
            hop_length: 512,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
        }
    }
}

// Slaney's auditory-toolbox mel scale: linear below 1 kHz, logarithmic above.
const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;

fn log_step() -> f64 {
    6.4f64.ln() / 27.0
}

pub(crate) fn hz_to_mel(hz: f64) -> f64 {
    if hz >= MIN_LOG_HZ {
        MIN_LOG_MEL + (hz / MIN_LOG_HZ).ln() / log_step()
    } else {
        hz / F_SP
    }
}

pub(crate) fn mel_to_hz(mel: f64) -> f64 {
    if mel >= MIN_LOG_MEL {
        MIN_LOG_HZ * (log_step() * (mel - MIN_LOG_MEL)).exp()
    } else {
        F_SP * mel
    }
}

/// Triangular, area-normalized mel filters, `n_mels × (n_fft/2 + 1)`.
pub fn mel_filterbank(sample_rate: f64, n_fft: usize, n_mels: usize, fmin: f64, fmax: f64) -> Array2<f64> {
    let n_bins = n_fft / 2 + 1;
    let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();

    let mut fb = Array2::zeros((n_mels, n_bins));
    for m in 0..n_mels {
        let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let enorm = 2.0 / (hi - lo);
        for k in 0..n_bins {
            let f = k as f64 * sample_rate / n_fft as f64;
            let w = ((f - lo) / (mid - lo)).min((hi - f) / (hi - mid)).max(0.0);
            fb[[m, k]] = w * enorm;
        }
    }
    fb
}

/// Mel-frequency cepstral coefficients, `n_mfcc × frames`.
///
/// Hann-windowed power spectra on centred, zero-padded frames, a Slaney mel
/// filterbank, `10 log10(max(power, floor))`, then an orthonormal DCT-II.
pub fn compute_mfcc(clip: &AudioClip, params: &MfccParams) -> Result<FeatureGram> {
    let n_fft = params.n_fft;
    if n_fft < 2 || params.hop_length == 0 || params.n_mels == 0 || params.n_mfcc == 0 || params.n_mfcc > params.n_mels {
        return Err(Error::InvalidParameter(format!("MFCC parameters {params:?}")));
    }
    if clip.samples.len() < n_fft {
        return Err(Error::ClipTooShort {
            samples: clip.samples.len(),
            needed: n_fft,
        });
    }
    let sr = clip.sample_rate as f64;
    let fmax = params.fmax.unwrap_or(sr / 2.0);
    let fb = mel_filterbank(sr, n_fft, params.n_mels, params.fmin, fmax);

    let window: Vec<f64> = (0..n_fft).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / n_fft as f64).cos()).collect();
    let x: Vec<f64> = clip.samples.iter().map(|&s| s as f64).collect();
    let n_frames = 1 + x.len() / params.hop_length;
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let dct = dct_matrix(params.n_mfcc, params.n_mels);

    let mut out = Array2::zeros((params.n_mfcc, n_frames));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut power = ndarray::Array1::<f64>::zeros(n_fft / 2 + 1);
    for t in 0..n_frames {
        let start = (t * params.hop_length) as isize - (n_fft / 2) as isize;
        for (n, b) in buf.iter_mut().enumerate() {
            let i = start + n as isize;
            let s = if i >= 0 && (i as usize) < x.len() { x[i as usize] } else { 0.0 };
            *b = Complex64::new(s * window[n], 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        let log_mel = fb.dot(&power).mapv(|e| 10.0 * e.max(params.log_floor).log10());
        out.column_mut(t).assign(&dct.dot(&log_mel));
    }

    Ok(FeatureGram {
        values: out,
        kind: GramKind::Mfcc,
        hop_s: params.hop_length as f64 / sr,
    })
}

fn dct_matrix(n_out: usize, n_in: usize) -> Array2<f64> {
    Array2::from_shape_fn((n_out, n_in), |(k, n)| {
        let scale = if k == 0 { (1.0 / n_in as f64).sqrt() } else { (2.0 / n_in as f64).sqrt() };
        scale * (PI * k as f64 * (2 * n + 1) as f64 / (2 * n_in) as f64).cos()
    })
}
