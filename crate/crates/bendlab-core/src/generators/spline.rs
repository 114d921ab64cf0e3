//! Centered cardinal B-spline evaluation.
//!
//! The order-k cardinal B-spline is the k-fold convolution of the unit box
//! with itself: a piecewise polynomial of degree k−1 with k−2 continuous
//! derivatives, supported on an interval of length k. It is evaluated here
//! exactly (no sampling) by the triangular Cox–de Boor recursion on the
//! integer knot sequence, then shifted so the support is `[−k/2, k/2]` and
//! the peak sits at the origin.

/// Value of the *uncentered* cardinal B-spline of order `k` at `t`
/// (support `[0, k]`), by the Cox–de Boor recursion on integer knots.
///
/// Uses the half-open convention at the right endpoint, so `eval(k, k) = 0`;
/// this only affects the single support-edge point where the spline is zero
/// anyway for k ≥ 2.
fn bspline_uncentered(k: u32, t: f64) -> f64 {
    let k = k as usize;
    if !(0.0..(k as f64)).contains(&t) {
        return 0.0;
    }
    // First order: indicator functions of [i, i+1).
    let mut n: Vec<f64> = (0..k)
        .map(|i| {
            if (i as f64..(i + 1) as f64).contains(&t) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    // Raise the order: N_{i,ord}(t) over knots i .. i+ord.
    for ord in 2..=k {
        let denom = (ord - 1) as f64;
        for i in 0..=(k - ord) {
            let left = (t - i as f64) / denom * n[i];
            let right = ((i + ord) as f64 - t) / denom * n[i + 1];
            n[i] = left + right;
        }
    }
    n[0]
}

/// Value of the centered cardinal B-spline of order `k` at `x`
/// (support `[−k/2, k/2]`, peak at 0).
pub fn bspline_centered(k: u32, x: f64) -> f64 {
    bspline_uncentered(k, x + k as f64 / 2.0)
}

/// `∫ B_k(x)² dx` for the centered order-k spline, computed exactly via the
/// convolution identity `∫ B_k(x) B_k(x) dx = B_{2k}(0)` (B_k is even).
pub fn bspline_l2_norm_sq(k: u32) -> f64 {
    bspline_centered(2 * k, 0.0)
}
