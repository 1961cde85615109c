use ndarray::{s, Array1, Array2, ArrayView1, Axis};

use super::{FeatureGram, FeatureVector, GramKind, VectorKind};
use crate::error::{Error, Result};

fn kth_difference(row: ArrayView1<f64>, k: usize) -> Array1<f64> {
    let mut d = row.to_owned();
    for _ in 0..k {
        d = &d.slice(s![1..]) - &d.slice(s![..-1]);
    }
    // front-pad back to the original frame count
    let mut out = Array1::zeros(row.len());
    out.slice_mut(s![k..]).assign(&d);
    out
}

/// Appends the 1st..`max_order`-th temporal differences below the original
/// bands. Order-`k` rows are the k-fold first difference with `k` leading zeros.
pub fn stack_derivatives(gram: &FeatureGram, max_order: usize) -> Result<FeatureGram> {
    let (bands, frames) = gram.values.dim();
    if frames <= max_order {
        return Err(Error::TooFewFrames {
            frames,
            needed: max_order,
        });
    }
    let mut out = Array2::zeros((bands * (max_order + 1), frames));
    for k in 0..=max_order {
        for b in 0..bands {
            out.row_mut(k * bands + b).assign(&kth_difference(gram.values.row(b), k));
        }
    }
    Ok(FeatureGram {
        values: out,
        kind: gram.kind,
        hop_s: gram.hop_s,
    })
}

/// Per-band mean and population standard deviation of the value and each
/// difference order up to `derivative_orders`.
///
/// Layout: for each order (0 first), for each band, `(mean, std)`. The length
/// is `bands × (orders + 1) × 2`, e.g. 72 for a chromagram with two orders.
pub fn summarize_stats(gram: &FeatureGram, derivative_orders: usize) -> Result<FeatureVector> {
    let frames = gram.n_frames();
    if frames < 2 || frames <= derivative_orders {
        return Err(Error::TooFewFrames {
            frames,
            needed: derivative_orders.max(1),
        });
    }
    let mut values = Vec::with_capacity(gram.n_bands() * (derivative_orders + 1) * 2);
    for k in 0..=derivative_orders {
        for row in gram.values.axis_iter(Axis(0)) {
            let d = kth_difference(row, k);
            let mean = d.mean().expect("non-empty");
            let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / frames as f64;
            values.push(mean);
            values.push(var.sqrt());
        }
    }
    let kind = match gram.kind {
        GramKind::Chroma => VectorKind::ChromaStat,
        GramKind::Mfcc => VectorKind::MfccStat,
    };
    FeatureVector::new(values, kind)
}

/// Concatenates two descriptors, `a` first.
pub fn concat_features(a: &FeatureVector, b: &FeatureVector) -> FeatureVector {
    let mut values = Vec::with_capacity(a.dim() + b.dim());
    values.extend_from_slice(&a.values);
    values.extend_from_slice(&b.values);
    FeatureVector {
        values,
        kind: VectorKind::Fused,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gram(values: Array2<f64>, kind: GramKind) -> FeatureGram {
        FeatureGram {
            values,
            kind,
            hop_s: 512.0 / 22_050.0,
        }
    }

    fn random_gram(bands: usize, frames: usize, seed: u64) -> FeatureGram {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed, 9);
        gram(Array2::from_shape_fn((bands, frames), |_| rng.random_range(0.0..1.0)), GramKind::Chroma)
    }

    #[test]
    fn chroma_stack_to_48_bands() {
        let g = random_gram(12, 20, 0);
        assert_eq!(stack_derivatives(&g, 3).unwrap().n_bands(), 48);
        assert_eq!(stack_derivatives(&g, 0).unwrap(), g);
    }

    #[test]
    fn constant_gram_has_zero_derivatives() {
        let g = gram(Array2::from_elem((12, 10), 0.3), GramKind::Chroma);
        let st = stack_derivatives(&g, 3).unwrap();
        assert!(st.values.slice(s![12.., ..]).iter().all(|&v| v == 0.0));
        let v = summarize_stats(&g, 2).unwrap();
        assert_eq!(v.dim(), 72);
        for (i, pair) in v.values.chunks(2).enumerate() {
            assert!(pair[1].abs() < 1e-15);
            if i >= 12 {
                assert_eq!(pair[0], 0.0);
            } else {
                assert!((pair[0] - 0.3).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn descriptor_dimensions() {
        assert_eq!(summarize_stats(&random_gram(12, 30, 1), 2).unwrap().dim(), 72);
        assert_eq!(summarize_stats(&random_gram(12, 30, 1), 3).unwrap().dim(), 96);
        let m = gram(random_gram(20, 30, 2).values, GramKind::Mfcc);
        let v = summarize_stats(&m, 3).unwrap();
        assert_eq!(v.dim(), 160);
        assert_eq!(v.kind, VectorKind::MfccStat);
    }

    #[test]
    fn known_values() {
        // row [0, 1, 3]: diff [0, 1, 2], second diff [0, 0, 1]
        let g = gram(ndarray::array![[0.0, 1.0, 3.0]], GramKind::Chroma);
        let v = summarize_stats(&g, 2).unwrap().values;
        let pop_std = |xs: [f64; 3]| {
            let m = xs.iter().sum::<f64>() / 3.0;
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 3.0).sqrt()
        };
        let expect = [4.0 / 3.0, pop_std([0.0, 1.0, 3.0]), 1.0, pop_std([0.0, 1.0, 2.0]), 1.0 / 3.0, pop_std([0.0, 0.0, 1.0])];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_count_errors() {
        let g = random_gram(12, 1, 0);
        assert!(matches!(summarize_stats(&g, 0), Err(Error::TooFewFrames { .. })));
        let g = random_gram(12, 3, 0);
        assert!(matches!(stack_derivatives(&g, 3), Err(Error::TooFewFrames { .. })));
    }

    #[test]
    fn concat_cases() {
        let a = FeatureVector::new(vec![0.5; 4800], VectorKind::Embedding).unwrap();
        let b = FeatureVector::new(vec![1.0; 72], VectorKind::ChromaStat).unwrap();
        let f = concat_features(&a, &b);
        assert_eq!(f.dim(), 4872);
        assert_eq!(f.kind, VectorKind::Fused);
        assert_eq!(f.values[4799], 0.5);
        assert_eq!(f.values[4800], 1.0);
        let empty = FeatureVector::new(vec![], VectorKind::Embedding).unwrap();
        assert_eq!(concat_features(&a, &empty).values, a.values);
        let c = FeatureVector::new(vec![2.0, 3.0], VectorKind::Embedding).unwrap();
        assert_eq!(concat_features(&concat_features(&a, &b), &c).values, concat_features(&a, &concat_features(&b, &c)).values);
    }

    proptest! {
        #[test]
        fn reversal_keeps_order_zero_stats(bands in 1usize..6, frames in 2usize..40, seed in any::<u64>()) {
            let g = random_gram(bands, frames, seed);
            let mut rev = g.clone();
            rev.values.invert_axis(Axis(1));
            let a = summarize_stats(&g, 0).unwrap().values;
            let b = summarize_stats(&rev, 0).unwrap().values;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn stacking_composes_with_stats(bands in 1usize..6, frames in 5usize..40, orders in 0usize..4, seed in any::<u64>()) {
            let g = random_gram(bands, frames, seed);
            let direct = summarize_stats(&g, orders).unwrap().values;
            let stacked = summarize_stats(&stack_derivatives(&g, orders).unwrap(), 0).unwrap().values;
            prop_assert_eq!(direct.len(), stacked.len());
            for (x, y) in direct.iter().zip(&stacked) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
