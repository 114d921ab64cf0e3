//! Adaptive transform quadrature: exact stripes along the wavelet axis,
//! recursive one-dimensional refinement across rows.
//!
//! The wavelet direction is the hostile one — the generator oscillates
//! through ~2M−1 sign changes — and the shared row integrator handles it
//! exactly, pairing piecewise-constant row samples with the wavelet's
//! antiderivative between bisected transition points. What is left is the
//! integral of the row value over the window height: a one-dimensional
//! function that is smooth wherever the signal edge crosses rows
//! transversally, with isolated square-root kinks where a stripe is born
//! or dies. Adaptive Simpson with budget splitting concentrates row
//! evaluations at those kinks and resolves the smooth remainder at high
//! order, so the requested absolute tolerance is actually met — a
//! two-dimensional point-sampled scheme cannot certify edge cells whose
//! membership samples happen to agree, and stalls at a tolerance-
//! independent error.
//!
//! Raster signals make the row value a staircase in `v` (one step per
//! pixel row), each step forcing a full-depth refinement chain; they work,
//! but the scaled grid is the better tool for them.

use crate::generators::GeneratorPair;
use crate::geometry::{AlphaScale, Cone, Point, ShearParams};
use crate::signals::Signal;

use super::RowIntegrator;

/// Safety factor applied to the requested tolerance before it is split
/// into per-interval budgets. Budget halving makes the accepted residuals
/// sum to at most the scaled tolerance for smooth pieces; the margin
/// covers kink intervals, where the Simpson difference understates the
/// true error by a bounded factor.
const SAFETY: f64 = 0.05;

/// Minimum bisection depth before acceptance: 2⁵ = 32 intervals across
/// the window, so a signal feature spanning a fraction of the atom height
/// cannot be missed entirely by the first few Simpson stencils.
const MIN_DEPTH: u32 = 5;

/// Maximum bisection depth. Kinks and raster steps drive local chains
/// this deep; the leftover per-feature residual is O(2^{−MAX_DEPTH}).
const MAX_DEPTH: u32 = 40;

/// Column oversampling of the row transition scan — twice the default
/// grid density, so stripes narrow enough to slip between scan nodes
/// carry mass well below the tolerances in use.
const SCAN_OVERSAMPLING: u32 = 32;

/// Simpson's rule over an interval of length `h`.
#[inline]
fn simpson(f_lo: f64, f_mid: f64, f_hi: f64, h: f64) -> f64 {
    h / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
}

/// Integral of the row value over `[lo, hi]`, given its samples at the
/// ends and midpoint and the whole-interval Simpson estimate.
#[allow(clippy::too_many_arguments)]
fn interval(
    rows: &mut RowIntegrator,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_mid: f64,
    f_hi: f64,
    whole: f64,
    budget: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let f_lm = rows.row_value(0.5 * (lo + mid));
    let f_rm = rows.row_value(0.5 * (mid + hi));
    let half = 0.5 * (hi - lo);
    let left = simpson(f_lo, f_lm, f_mid, half);
    let right = simpson(f_mid, f_rm, f_hi, half);
    let refined = left + right;
    let converged = (refined - whole).abs() <= budget;
    if (converged && depth >= MIN_DEPTH) || depth >= MAX_DEPTH {
        // Halving shrinks smooth-interval Simpson error 16×; extrapolate.
        return refined + (refined - whole) / 15.0;
    }
    let child_budget = 0.5 * budget;
    interval(rows, lo, mid, f_lo, f_lm, f_mid, left, child_budget, depth + 1)
        + interval(rows, mid, hi, f_mid, f_rm, f_hi, right, child_budget, depth + 1)
}

/// Adaptive-quadrature coefficient ⟨f, atom⟩ for the given parameters.
pub(super) fn adaptive_coefficient(
    gen: &GeneratorPair,
    sig: &Signal,
    scale: &AlphaScale,
    shear: &ShearParams,
    t: Point,
    iota: Cone,
    tolerance: f64,
) -> f64 {
    // coefficient = a^{(1+α)/2} · ∫ row_value(v) dv; the budget for the
    // row-value integral absorbs that prefactor.
    let prefactor = (scale.a() * scale.a_pow_alpha()).sqrt();
    let mut rows = RowIntegrator::new(gen, sig, scale, shear, t, iota, SCAN_OVERSAMPLING);
    let f_lo = rows.row_value(-0.5);
    let f_mid = rows.row_value(0.0);
    let f_hi = rows.row_value(0.5);
    let whole = simpson(f_lo, f_mid, f_hi, 1.0);
    let budget = SAFETY * tolerance / prefactor;
    prefactor * interval(&mut rows, -0.5, 0.5, f_lo, f_mid, f_hi, whole, budget, 0)
}
