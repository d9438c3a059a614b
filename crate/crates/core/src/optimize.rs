//! Derivative-free one-dimensional minimization.

use thiserror::Error;

/// 1/phi, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("coarse minimum at window edge {edge} (window [{lo}, {hi}])")]
    MinimumAtEdge { edge: f64, lo: f64, hi: f64 },
    #[error("need at least 3 samples and lo < hi")]
    BadWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section search on `[a, b]` until the bracket is narrower than
/// `width`; returns the midpoint of the final bracket.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, width: f64) -> Minimum {
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while b - a > width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    Minimum { x, fx, evaluations: evaluations + 1 }
}

/// Evenly spaced samples of `f` over `[lo, hi]`.
pub fn scan<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64)> {
    let step = (hi - lo) / (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            let x = if i + 1 == samples { hi } else { lo + i as f64 * step };
            (x, f(x))
        })
        .collect()
}

/// Coarse scan of `samples` points to bracket the global minimum, then
/// golden-section refinement inside the neighbouring samples. A coarse
/// minimum on either edge means the window does not contain the minimum.
pub fn scan_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    samples: usize,
    width: f64,
) -> Result<Minimum, ScanError> {
    if samples < 3 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(ScanError::BadWindow);
    }
    let pts = scan(&mut f, lo, hi, samples);
    let (imin, _) = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .expect("non-empty scan");
    if imin == 0 || imin + 1 == samples {
        return Err(ScanError::MinimumAtEdge { edge: pts[imin].0, lo, hi });
    }
    let mut m = golden_section(&mut f, pts[imin - 1].0, pts[imin + 1].0, width);
    m.evaluations += samples;
    Ok(m)
}
