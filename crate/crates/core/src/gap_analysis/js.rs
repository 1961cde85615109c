//! Histogram Jensen-Shannon divergence in bits.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 32;

fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>()
}

/// JS divergence between two probability vectors, `H(m) - (H(p) + H(q)) / 2`
/// with `m` their midpoint. Inputs are normalized to sum to one first.
pub fn js_from_histograms(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let normalize = |h: &[f64]| -> Result<Vec<f64>> {
        if h.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("histogram entries must be finite and non-negative".into()));
        }
        let total: f64 = h.iter().sum();
        if total <= 0.0 {
            return Err(Error::Empty("histogram has no mass"));
        }
        Ok(h.iter().map(|v| v / total).collect())
    };
    let p = normalize(p)?;
    let q = normalize(q)?;
    let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (a + b) / 2.0).collect();
    // clamp rounding noise so the documented [0, 1] range holds exactly
    Ok((entropy_bits(&m) - (entropy_bits(&p) + entropy_bits(&q)) / 2.0).clamp(0.0, 1.0))
}

/// Counts of `values` over `bins` equal-width bins spanning `[lo, hi]`; the
/// top edge is inclusive. A zero-width range puts everything in bin 0.
pub fn histogram(values: impl Iterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    let width = hi - lo;
    for v in values {
        let b = if width > 0.0 {
            (((v - lo) / width * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1.0;
    }
    counts
}

/// Mean over dimensions of the JS divergence between per-dimension histograms
/// of `x` and `y`, binned over the shared min-max range of both sets.
pub fn js_divergence(x: ArrayView2<f64>, y: ArrayView2<f64>, bins: usize) -> Result<f64> {
    if x.nrows() == 0 || y.nrows() == 0 {
        return Err(Error::Empty("sample set"));
    }
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: y.ncols(),
        });
    }
    if x.ncols() == 0 {
        return Err(Error::Empty("zero-dimensional samples"));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample value".into()));
    }
    let mut total = 0.0;
    for (cx, cy) in x.columns().into_iter().zip(y.columns()) {
        let (lo, hi) = cx
            .iter()
            .chain(cy.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let hx = histogram(cx.iter().copied(), lo, hi, bins);
        let hy = histogram(cy.iter().copied(), lo, hi, bins);
        total += js_from_histograms(&hx, &hy)?;
    }
    Ok(total / x.ncols() as f64)
}
