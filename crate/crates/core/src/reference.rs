//! Published real-data results, used by the real-data harness to check a run
//! on user-supplied corpora. None of these can be reproduced without the
//! licensed audio and the foundation-model embeddings.

use serde::Serialize;

use crate::eval::EvalResult;

/// `(avg, arousal, valence)` R².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct R2Triple {
    pub avg: f64,
    pub arousal: f64,
    pub valence: f64,
}

const fn r2(avg: f64, arousal: f64, valence: f64) -> R2Triple {
    R2Triple { avg, arousal, valence }
}

/// Representations trained and tested on EmoMusic.
pub const EMOMUSIC_BY_REPRESENTATION: [(&str, R2Triple); 3] = [
    ("chroma", r2(0.259, 0.261, 0.258)),
    ("mfcc", r2(0.499, 0.579, 0.419)),
    ("jukebox", r2(0.674, 0.708, 0.640)),
];

/// `(input, training, testing, R²)` for the combined-training experiment.
pub const COMBINED_TRAINING: [(&str, &str, &str, R2Triple); 12] = [
    ("Jukebox", "EmoMusic", "EmoMusic", r2(0.674, 0.708, 0.640)),
    ("Jukebox", "EmoMusic", "DEAM", r2(0.454, 0.490, 0.418)),
    ("Jukebox", "EmoMusic", "WCMED", r2(-0.835, -1.115, -0.555)),
    ("Jukebox", "Combined", "Combined", r2(0.632, 0.685, 0.580)),
    ("Jukebox", "Combined", "DEAM", r2(0.619, 0.618, 0.620)),
    ("Jukebox", "Combined", "WCMED", r2(0.082, 0.336, -0.172)),
    ("Jukebox+Chroma", "EmoMusic", "EmoMusic", r2(0.651, 0.692, 0.610)),
    ("Jukebox+Chroma", "EmoMusic", "DEAM", r2(0.479, 0.528, 0.430)),
    ("Jukebox+Chroma", "EmoMusic", "WCMED", r2(0.002, 0.232, -0.228)),
    ("Jukebox+Chroma", "Combined", "Combined", r2(0.684, 0.745, 0.622)),
    ("Jukebox+Chroma", "Combined", "DEAM", r2(0.830, 0.826, 0.835)),
    ("Jukebox+Chroma", "Combined", "WCMED", r2(0.277, 0.366, 0.188)),
];

/// `(row, col, wd_data, js_data, wd_annot, js_annot)` between dataset pairs.
pub const DIVERGENCES: [(&str, &str, f64, f64, f64, f64); 10] = [
    ("D", "E", 0.03, 0.02, 0.05, 0.13),
    ("P", "E", 0.20, 0.15, 0.11, 0.03),
    ("P", "D", 0.19, 0.14, 0.10, 0.16),
    ("W1", "E", 0.37, 0.25, 0.12, 0.49),
    ("W1", "D", 0.45, 0.31, 0.18, 0.47),
    ("W1", "P", 0.37, 0.26, 0.15, 0.60),
    ("W2", "E", 1.71, 0.46, 0.14, 0.02),
    ("W2", "D", 1.74, 0.47, 0.19, 0.05),
    ("W2", "P", 1.71, 0.46, 0.15, 0.11),
    ("W2", "W1", 1.59, 0.43, 0.13, 0.51),
];

/// Inter-centroid distance mean and variance of the t-SNE of embeddings.
pub const EMBEDDING_CENTROID_SPREAD: (f64, f64) = (28.23, 255.39);

/// Tolerance for the chroma-only EmoMusic check.
pub const CHROMA_TOLERANCE: f64 = 0.10;
/// Tolerance for the embedding EmoMusic in-distribution check.
pub const EMBEDDING_TOLERANCE: f64 = 0.05;

pub fn emomusic_reference(representation: &str) -> Option<R2Triple> {
    EMOMUSIC_BY_REPRESENTATION
        .iter()
        .find(|(name, _)| *name == representation)
        .map(|(_, r)| *r)
}

/// Largest absolute difference between a result and a reference triple.
pub fn max_abs_deviation(result: &EvalResult, reference: &R2Triple) -> f64 {
    [
        result.r2_avg - reference.avg,
        result.r2_arousal - reference.arousal,
        result.r2_valence - reference.valence,
    ]
    .iter()
    .fold(0.0, |m, d| m.max(d.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages_are_consistent() {
        for (_, r) in EMOMUSIC_BY_REPRESENTATION.iter() {
            assert!((r.avg - (r.arousal + r.valence) / 2.0).abs() <= 0.0011);
        }
        for (_, _, _, r) in COMBINED_TRAINING.iter() {
            assert!((r.avg - (r.arousal + r.valence) / 2.0).abs() <= 0.0011, "{r:?}");
        }
    }

    #[test]
    fn lookups() {
        assert_eq!(emomusic_reference("chroma").unwrap().avg, 0.259);
        assert!(emomusic_reference("encodec").is_none());
        let e = EvalResult {
            r2_avg: 0.3,
            r2_arousal: 0.2,
            r2_valence: 0.258,
            n_test: 75,
        };
        assert!((max_abs_deviation(&e, &emomusic_reference("chroma").unwrap()) - 0.061).abs() < 1e-12);
    }
}
