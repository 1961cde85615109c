//! Deterministic inputs shared by the benchmarks.

use std::f64::consts::PI;

use emogap_core::AudioClip;
use ndarray::Array2;

/// A cheap deterministic pseudo-random matrix in `[-1, 1)`.
pub fn matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    Array2::from_shape_fn((rows, cols), |_| {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        let bits = state.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11;
        bits as f64 / (1u64 << 52) as f64 - 1.0
    })
}

/// `matrix` shifted by `offset` in every coordinate.
pub fn shifted(rows: usize, cols: usize, seed: u64, offset: f64) -> Array2<f64> {
    matrix(rows, cols, seed) + offset
}

/// A two-note chord at 22.05 kHz.
pub fn chord(seconds: f64) -> AudioClip {
    let sr = 22_050u32;
    let n = (seconds * sr as f64) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr as f64;
            (0.3 * (2.0 * PI * 220.0 * t).sin() + 0.2 * (2.0 * PI * 329.6 * t).sin()) as f32
        })
        .collect();
    AudioClip::new(samples, sr).expect("valid clip")
}

/// Row labels `0, 0, …, 1, 1, …` for `groups` equal groups.
pub fn group_labels(n: usize, groups: usize) -> Vec<String> {
    (0..n).map(|i| format!("g{}", i * groups / n)).collect()
}
