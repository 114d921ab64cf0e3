//! Decay-rate fitting and boundary-point classification.
//!
//! A [`DecayCurve`] records coefficient magnitudes along dyadic scales;
//! on a log-log plot these approach a line whose slope is the decay
//! exponent. This module fits that slope ([`fit_rate`]), knows the three
//! finite theoretical exponents and their strict ordering
//! ([`theoretical_rates`], exactly over rationals via
//! [`theoretical_rates_exact`]), and combines both into a point
//! classifier ([`classify_point`]) that searches an `(s, b, ι)` grid for
//! the slowest-decaying parameter cell, labels the point by the nearest
//! theoretical rate on the log scale, and, for matched points, reports
//! the boundary normal and the curvature `K = 2|b′| / (1 + s′²)^{3/2}`.
//!
//! Conventions baked into the decision rule (the theorem behind it gives
//! rates, not thresholds):
//! * the selection statistic is the finest-scale magnitude — the
//!   slowest-decaying cell is the one still largest as `a → 0`, and that
//!   statistic stays meaningful where slope fits get noisy;
//! * case boundaries sit at geometric midpoints between the theoretical
//!   rates, with ties broken toward the slower-decaying case;
//! * a point is off-boundary only on exact evidence: every curve floored
//!   at every scale finer than `j = 4`;
//! * evidence that contradicts itself (a fitted rate in the
//!   wrong-orientation band while finest-scale coefficients have not hit
//!   the floor) keeps its label but is flagged `unresolved`.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::GeneratorPair;
use crate::geometry::{cone_swap, Cone, Point};
use crate::signals::{PointType, Signal};
use crate::transform::{sweep, DecayCurve, QuadratureSpec, TransformError};

/// Errors from rate fitting and classification.
#[derive(Debug, Error)]
pub enum AnalysisError {
    /// The anisotropy exponent must lie in `(0, 1/2]`.
    #[error("alpha must lie in (0, 1/2], got {0}")]
    InvalidAlpha(f64),
    /// At least one vanishing moment is required.
    #[error("the generator must have at least 1 vanishing moment, got {0}")]
    InvalidMoments(u32),
    /// At `alpha = 1/2` the matched and wrong-bending rates coincide, so
    /// bending cannot be classified.
    #[error(
        "alpha = {0} makes the matched and wrong-bending rates coincide; \
         parabolic scaling cannot separate bending — use alpha < 1/2"
    )]
    DegenerateAlpha(f64),
    /// Every sample sits at the magnitude floor: compatible with an
    /// off-boundary point, but no slope can be fitted.
    #[error("every sample of the curve is floored; no rate can be fitted")]
    AllFloored,
    /// A slope needs at least two usable points.
    #[error("rate fitting needs at least 2 non-floored samples, got {usable}")]
    NotEnoughUsablePoints { usable: usize },
    /// Classification needs at least one cone to search.
    #[error("classification requires a nonempty cone list")]
    EmptyCones,
    /// Coefficient evaluation failed.
    #[error(transparent)]
    Transform(#[from] TransformError),
    /// The signal could not be prepared (e.g. swapped for a cone check).
    #[error(transparent)]
    Signal(#[from] crate::signals::SignalError),
}

/// A least-squares line through the log-log decay data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Fitted exponent: magnitudes ≈ C·a^slope.
    pub slope: f64,
    /// Fitted `ln C`.
    pub intercept: f64,
    /// RMS residual of the fit in log-magnitude units.
    pub residual: f64,
    /// Number of samples that entered the fit.
    pub points_used: usize,
    /// Number of floored samples excluded from the fit.
    pub floored_excluded: usize,
}

/// Fits `ln |c| = slope·ln a + intercept` by least squares over the
/// non-floored samples.
pub fn fit_rate_samples(
    samples: &[crate::transform::ScaleSample],
) -> Result<RateFit, AnalysisError> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| !s.floored)
        .map(|s| (s.a.ln(), s.magnitude.ln()))
        .collect();
    let floored_excluded = samples.len() - pts.len();
    if pts.is_empty() {
        return Err(AnalysisError::AllFloored);
    }
    if pts.len() < 2 {
        return Err(AnalysisError::NotEnoughUsablePoints { usable: pts.len() });
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &pts {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    debug_assert!(sxx > 0.0, "decay samples must span distinct scales");
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss_res / n).sqrt(),
        points_used: pts.len(),
        floored_excluded,
    })
}

/// Fits the decay exponent of a whole curve. See [`fit_rate_samples`].
pub fn fit_rate(curve: &DecayCurve) -> Result<RateFit, AnalysisError> {
    fit_rate_samples(&curve.samples)
}

/// The theoretical decay exponents at anisotropy `α` with `M` vanishing
/// moments. Off-boundary points decay faster than any power (the
/// coefficients are exactly zero below a point-dependent scale), recorded
/// here as `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalRates {
    /// `(1+α)/2` — orientation, bending, and location all agree.
    pub matched: f64,
    /// `(2−α)/2` — right orientation, wrong bending.
    pub wrong_bending: f64,
    /// `(1−α)(M+1) + (1+α)/2` — wrong orientation.
    pub wrong_shear: f64,
    /// Off the boundary entirely: faster than any power.
    pub off_boundary: f64,
    /// Whether `matched` and `wrong_bending` coincide (`α = 1/2`), which
    /// makes bending unclassifiable.
    pub degenerate: bool,
}

fn validate_rate_inputs(alpha: f64, moments: u32) -> Result<(), AnalysisError> {
    if !(alpha.is_finite() && 0.0 < alpha && alpha <= 0.5) {
        return Err(AnalysisError::InvalidAlpha(alpha));
    }
    if moments < 1 {
        return Err(AnalysisError::InvalidMoments(moments));
    }
    Ok(())
}

/// The three finite theoretical rates (floating point).
pub fn theoretical_rates(alpha: f64, moments: u32) -> Result<TheoreticalRates, AnalysisError> {
    validate_rate_inputs(alpha, moments)?;
    let matched = (1.0 + alpha) / 2.0;
    let wrong_bending = (2.0 - alpha) / 2.0;
    let wrong_shear = (1.0 - alpha) * (moments as f64 + 1.0) + matched;
    Ok(TheoreticalRates {
        matched,
        wrong_bending,
        wrong_shear,
        off_boundary: f64::INFINITY,
        degenerate: matched == wrong_bending,
    })
}

/// The theoretical rates over exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactRates {
    pub matched: Ratio<i64>,
    pub wrong_bending: Ratio<i64>,
    pub wrong_shear: Ratio<i64>,
    pub degenerate: bool,
}

/// The three finite theoretical rates in exact rational arithmetic.
pub fn theoretical_rates_exact(
    alpha: Ratio<i64>,
    moments: u32,
) -> Result<ExactRates, AnalysisError> {
    let half = Ratio::new(1, 2);
    if alpha <= Ratio::from_integer(0) || alpha > half {
        return Err(AnalysisError::InvalidAlpha(
            alpha.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if moments < 1 {
        return Err(AnalysisError::InvalidMoments(moments));
    }
    let one = Ratio::from_integer(1);
    let matched = (one + alpha) * half;
    let wrong_bending = (Ratio::from_integer(2) - alpha) * half;
    let wrong_shear = (one - alpha) * Ratio::from_integer(moments as i64 + 1) + matched;
    Ok(ExactRates {
        matched,
        wrong_bending,
        wrong_shear,
        degenerate: matched == wrong_bending,
    })
}

/// Curvature of the boundary through a typed point:
/// `K = 2|b′| / (1 + s′²)^{3/2}`.
pub fn curvature_of(pt: &PointType) -> f64 {
    2.0 * pt.b_prime.abs() / (1.0 + pt.s_prime * pt.s_prime).powf(1.5)
}

/// The four classification outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseLabel {
    /// All coefficients exactly floored at fine scales.
    OffBoundary,
    /// Decay near `(1−α)(M+1) + (1+α)/2`.
    WrongOrientation,
    /// Decay near `(2−α)/2`.
    WrongBending,
    /// Decay near `(1+α)/2`: orientation and bending both recovered.
    Matched,
}

/// How strongly the evidence supports the reported label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    /// Tight log-log fit (RMS residual < 0.1).
    High,
    /// Usable fit (RMS residual < 0.35).
    Medium,
    /// Loose fit; treat the label as indicative.
    Low,
    /// Internally inconsistent evidence: a wrong-orientation rate while
    /// finest-scale coefficients have not floored.
    Unresolved,
}

/// Outcome of classifying one query point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    /// The assigned case.
    pub case: CaseLabel,
    /// Best shear found by the search.
    pub s: f64,
    /// Best bending found by the search.
    pub b: f64,
    /// Cone index of the best cell: `+1` horizontal, `−1` vertical.
    pub iota: i8,
    /// Fitted decay exponent (absent off the boundary).
    pub rate: Option<f64>,
    /// RMS log-residual of the fit (absent off the boundary).
    pub residual: Option<f64>,
    /// Unit boundary normal, populated only for matched points.
    pub normal: Option<[f64; 2]>,
    /// Boundary curvature, populated only for matched points.
    pub curvature: Option<f64>,
    /// Evidence quality.
    pub confidence: Confidence,
}

/// Search protocol for [`classify_point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifySettings {
    /// Cones to search.
    pub cones: Vec<Cone>,
    /// Shear grid (values must lie in `[−1, 1]`).
    pub s_grid: Vec<f64>,
    /// Bending grid.
    pub b_grid: Vec<f64>,
    /// Coarsest dyadic scale index.
    pub j_min: u32,
    /// Finest dyadic scale index.
    pub j_max: u32,
    /// Quadrature for all coefficients.
    pub quad: QuadratureSpec,
    /// Whether to re-search a 5× finer local grid around the coarse
    /// argmax before fitting.
    pub refine: bool,
}

/// Evenly spaced grid from `lo` to `hi` inclusive with the given step
/// (the step is treated as a count hint; endpoints are hit exactly).
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi > lo, "grid requires hi > lo and step > 0");
    let n = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=n)
        .map(|k| (lo * (n - k) as f64 + hi * k as f64) / n as f64)
        .collect()
}

impl Default for ClassifySettings {
    /// Both cones; `s ∈ [−1, 1]` step 0.05; `b ∈ [−5, 5]` step 0.1
    /// (covers curvatures up to `K = 10` on a unit domain); scales
    /// `j = 4..8`; default grid quadrature; one 5× refinement pass.
    fn default() -> Self {
        ClassifySettings {
            cones: vec![Cone::Horizontal, Cone::Vertical],
            s_grid: uniform_grid(-1.0, 1.0, 0.05),
            b_grid: uniform_grid(-5.0, 5.0, 0.1),
            j_min: 4,
            j_max: 8,
            quad: QuadratureSpec::default_grid(),
            refine: true,
        }
    }
}

/// Whether the matched-case lower bound is in force at this `α` (it
/// needs `1/3 < α < 1/2`); outside that band classification still runs,
/// but matched-case decay is only bounded from above.
pub fn alpha_supports_matched_lower_bound(alpha: f64) -> bool {
    alpha > 1.0 / 3.0 && alpha < 0.5
}

/// The curve with the largest finest-scale magnitude; first wins ties,
/// so the outcome is independent of the evaluation schedule.
fn slowest_decaying(curves: &[DecayCurve]) -> &DecayCurve {
    let mut best = &curves[0];
    for c in &curves[1..] {
        if c.finest().magnitude > best.finest().magnitude {
            best = c;
        }
    }
    best
}

/// Grid spacing near the entry equal to `at` (`None` for single-point
/// grids, where that axis cannot be refined).
fn local_step(grid: &[f64], at: f64) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let mut idx = 0;
    for (i, &g) in grid.iter().enumerate() {
        if (g - at).abs() < (grid[idx] - at).abs() {
            idx = i;
        }
    }
    let step = if idx + 1 < grid.len() {
        grid[idx + 1] - grid[idx]
    } else {
        grid[idx] - grid[idx - 1]
    };
    Some(step.abs())
}

/// `center ± step` at 5× the coarse resolution, optionally clamped.
fn local_grid(center: f64, step: Option<f64>, clamp: Option<(f64, f64)>) -> Vec<f64> {
    let Some(step) = step else {
        return vec![center];
    };
    let mut vals: Vec<f64> = (-5..=5)
        .map(|k| center + k as f64 * step / 5.0)
        .map(|v| match clamp {
            Some((lo, hi)) => v.clamp(lo, hi),
            None => v,
        })
        .collect();
    vals.dedup();
    vals
}

/// Assigns the case whose theoretical rate is nearest to the fitted
/// slope on the log scale; ties go to the slower-decaying case.
fn nearest_case(slope: f64, rates: &TheoreticalRates) -> CaseLabel {
    let s = slope.max(1e-12).ln();
    // Ordered slowest-first so a strict `<` scan breaks ties downward.
    let candidates = [
        (CaseLabel::Matched, rates.matched),
        (CaseLabel::WrongBending, rates.wrong_bending),
        (CaseLabel::WrongOrientation, rates.wrong_shear),
    ];
    let mut best = candidates[0].0;
    let mut best_d = (s - candidates[0].1.ln()).abs();
    for &(label, rate) in &candidates[1..] {
        let d = (s - rate.ln()).abs();
        if d < best_d {
            best = label;
            best_d = d;
        }
    }
    best
}

/// Classifies a query point by sweeping the `(s, b, ι)` grid, selecting
/// the slowest-decaying cell, and comparing its fitted rate to the
/// theoretical ones. See the module docs for the decision rule.
pub fn classify_point(
    gen: &GeneratorPair,
    alpha: f64,
    sig: &Signal,
    t: Point,
    settings: &ClassifySettings,
) -> Result<ClassificationResult, AnalysisError> {
    if settings.cones.is_empty() {
        return Err(AnalysisError::EmptyCones);
    }
    let rates = theoretical_rates(alpha, gen.vanishing_moments())?;
    if rates.degenerate {
        return Err(AnalysisError::DegenerateAlpha(alpha));
    }

    let mut curves = Vec::new();
    for &cone in &settings.cones {
        curves.extend(sweep(
            gen,
            alpha,
            sig,
            t,
            cone,
            &settings.s_grid,
            &settings.b_grid,
            settings.j_min,
            settings.j_max,
            &settings.quad,
        )?);
    }

    // Off-boundary needs exact evidence: every sample strictly finer
    // than j = 4 floored, in every cell. (With no scales beyond j = 4
    // the shortcut cannot fire and classification proceeds by rate.)
    let have_fine_scales = curves[0].samples.iter().any(|s| s.j > 4);
    if have_fine_scales
        && curves
            .iter()
            .all(|c| c.samples.iter().filter(|s| s.j > 4).all(|s| s.floored))
    {
        let sel = slowest_decaying(&curves);
        return Ok(ClassificationResult {
            case: CaseLabel::OffBoundary,
            s: sel.s,
            b: sel.b,
            iota: sel.iota.index(),
            rate: None,
            residual: None,
            normal: None,
            curvature: None,
            confidence: Confidence::High,
        });
    }

    let mut sel = slowest_decaying(&curves).clone();
    if settings.refine {
        let s_loc = local_grid(sel.s, local_step(&settings.s_grid, sel.s), Some((-1.0, 1.0)));
        let b_loc = local_grid(sel.b, local_step(&settings.b_grid, sel.b), None);
        if s_loc.len() > 1 || b_loc.len() > 1 {
            let refined = sweep(
                gen,
                alpha,
                sig,
                t,
                sel.iota,
                &s_loc,
                &b_loc,
                settings.j_min,
                settings.j_max,
                &settings.quad,
            )?;
            sel = slowest_decaying(&refined).clone();
        }
    }

    let fit = fit_rate(&sel)?;
    let case = nearest_case(fit.slope, &rates);
    let confidence = if case == CaseLabel::WrongOrientation && !sel.finest().floored {
        // A wrong-orientation rate should drive coefficients into the
        // floor within a few scales; persistent mass contradicts it.
        Confidence::Unresolved
    } else if fit.residual < 0.1 {
        Confidence::High
    } else if fit.residual < 0.35 {
        Confidence::Medium
    } else {
        Confidence::Low
    };

    let (normal, curvature) = if case == CaseLabel::Matched {
        let len = (1.0 + sel.s * sel.s).sqrt();
        let n = match sel.iota {
            Cone::Horizontal => [1.0 / len, -sel.s / len],
            Cone::Vertical => [-sel.s / len, 1.0 / len],
        };
        let k = curvature_of(&PointType {
            s_prime: sel.s,
            b_prime: sel.b,
            iota: sel.iota,
        });
        (Some(n), Some(k))
    } else {
        (None, None)
    };

    Ok(ClassificationResult {
        case,
        s: sel.s,
        b: sel.b,
        iota: sel.iota.index(),
        rate: Some(fit.slope),
        residual: Some(fit.residual),
        normal,
        curvature,
        confidence,
    })
}

/// Convenience for equivariance checks: classifies the coordinate-swapped
/// problem (swapped signal at the swapped point).
pub fn classify_point_swapped(
    gen: &GeneratorPair,
    alpha: f64,
    sig: &Signal,
    t: Point,
    settings: &ClassifySettings,
) -> Result<ClassificationResult, AnalysisError> {
    let swapped = sig.swapped()?;
    classify_point(gen, alpha, &swapped, cone_swap(t), settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{boundary_type, AnalyticRegion};
    use crate::transform::{decay_curve, ScaleSample, MAGNITUDE_FLOOR};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const ALPHA: f64 = 0.335;

    fn synthetic_curve(prefactor: f64, exponent: f64, j_range: std::ops::RangeInclusive<u32>) -> DecayCurve {
        let gen = GeneratorPair::default_pair();
        let samples = j_range
            .map(|j| {
                let a = 0.5f64.powi(j as i32);
                let mag = prefactor * a.powf(exponent);
                ScaleSample {
                    j,
                    a,
                    raw: mag,
                    magnitude: mag.max(MAGNITUDE_FLOOR),
                    floored: mag < MAGNITUDE_FLOOR,
                }
            })
            .collect();
        DecayCurve {
            alpha: ALPHA,
            s: 0.0,
            b: 0.0,
            t: (0.0, 0.0),
            iota: Cone::Horizontal,
            generator: gen.descriptor(),
            samples,
        }
    }

    fn disk(r: f64) -> Signal {
        Signal::analytic(AnalyticRegion::Disk {
            center: (0.0, 0.0),
            radius: r,
        })
    }

    #[test]
    fn exact_power_law_recovers_exponent_and_intercept() {
        let fit = fit_rate(&synthetic_curve(1.0, 0.75, 2..=9)).unwrap();
        assert_relative_eq!(fit.slope, 0.75, epsilon = 1e-10);
        assert!(fit.residual < 1e-10);
        assert_eq!(fit.points_used, 8);
        assert_eq!(fit.floored_excluded, 0);

        let fit = fit_rate(&synthetic_curve(3.0, 2.0, 2..=9)).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-10);
        assert_relative_eq!(fit.intercept, 3.0f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn fit_distinguishes_all_floored_from_short_curves() {
        // Fast decay from a tiny prefactor: everything under the floor.
        let dead = synthetic_curve(1e-20, 1.0, 4..=8);
        assert!(matches!(fit_rate(&dead), Err(AnalysisError::AllFloored)));
        // Exactly one sample above the floor.
        let mut short = synthetic_curve(1.0, 8.0, 3..=8);
        short.samples[0].floored = false;
        for s in &mut short.samples[1..] {
            s.floored = true;
        }
        assert!(matches!(
            fit_rate(&short),
            Err(AnalysisError::NotEnoughUsablePoints { usable: 1 })
        ));
    }

    #[test]
    fn fitted_slope_excludes_floored_tail() {
        let mut curve = synthetic_curve(1.0, 0.75, 2..=9);
        // Corrupt the tail the way flooring does; the fit must ignore it.
        for s in &mut curve.samples[5..] {
            s.floored = true;
            s.magnitude = MAGNITUDE_FLOOR;
        }
        let fit = fit_rate(&curve).unwrap();
        assert_relative_eq!(fit.slope, 0.75, epsilon = 1e-10);
        assert_eq!(fit.floored_excluded, 3);
    }

    #[test]
    fn rates_match_the_reference_table_exactly() {
        let r = theoretical_rates_exact(Ratio::new(1, 3), 8).unwrap();
        assert_eq!(r.wrong_shear, Ratio::new(20, 3));
        assert_eq!(r.wrong_bending, Ratio::new(5, 6));
        assert_eq!(r.matched, Ratio::new(2, 3));
        assert!(!r.degenerate);
    }

    #[test]
    fn float_rates_match_independent_arithmetic() {
        let r = theoretical_rates(0.335, 8).unwrap();
        assert_relative_eq!(r.matched, 0.6675, epsilon = 1e-12);
        assert_relative_eq!(r.wrong_bending, 0.8325, epsilon = 1e-12);
        assert_relative_eq!(r.wrong_shear, 6.6525, epsilon = 1e-12);
        assert!(r.off_boundary.is_infinite());
    }

    #[test]
    fn half_alpha_is_degenerate_in_both_arithmetics() {
        let r = theoretical_rates(0.5, 8).unwrap();
        assert_eq!(r.matched, 0.75);
        assert_eq!(r.wrong_bending, 0.75);
        assert!(r.degenerate);
        let e = theoretical_rates_exact(Ratio::new(1, 2), 8).unwrap();
        assert_eq!(e.matched, Ratio::new(3, 4));
        assert!(e.degenerate);
    }

    #[test]
    fn rate_inputs_are_validated() {
        assert!(matches!(
            theoretical_rates(0.0, 8),
            Err(AnalysisError::InvalidAlpha(_))
        ));
        assert!(matches!(
            theoretical_rates(0.6, 8),
            Err(AnalysisError::InvalidAlpha(_))
        ));
        assert!(matches!(
            theoretical_rates(0.3, 0),
            Err(AnalysisError::InvalidMoments(0))
        ));
        assert!(theoretical_rates_exact(Ratio::new(2, 3), 8).is_err());
    }

    proptest! {
        #[test]
        fn rates_are_strictly_ordered_below_half(alpha in 0.001f64..0.4999, m in 1u32..=12) {
            let r = theoretical_rates(alpha, m).unwrap();
            prop_assert!(r.matched < r.wrong_bending);
            prop_assert!(r.wrong_bending < r.wrong_shear);
            prop_assert!(!r.degenerate);
        }
    }

    #[test]
    fn exact_rates_are_strictly_ordered_on_a_mesh() {
        for num in 1..=9 {
            let alpha = Ratio::new(num, 20);
            for m in 1..=10 {
                let r = theoretical_rates_exact(alpha, m).unwrap();
                assert!(r.matched < r.wrong_bending && r.wrong_bending < r.wrong_shear);
            }
        }
    }

    #[test]
    fn curvature_formula_reference_values() {
        let k = |s, b| {
            curvature_of(&PointType {
                s_prime: s,
                b_prime: b,
                iota: Cone::Horizontal,
            })
        };
        assert_eq!(k(0.0, -0.5), 1.0);
        assert_eq!(k(0.0, 0.0), 0.0);
        assert_relative_eq!(k(1.0, 1.0), 2.0 / 2.0f64.powf(1.5), epsilon = 1e-15);
    }

    #[test]
    fn disk_curvature_recovers_reciprocal_radius() {
        for i in 0..8 {
            let r = 0.10 + 0.05 * i as f64;
            let sig = disk(r);
            let pt = boundary_type(&sig, (r, 0.0)).unwrap();
            assert_relative_eq!(curvature_of(&pt), 1.0 / r, epsilon = 1e-12);
        }
    }

    #[test]
    fn nearest_case_uses_log_midpoints_with_downward_ties() {
        let rates = theoretical_rates(ALPHA, 8).unwrap();
        assert_eq!(nearest_case(0.67, &rates), CaseLabel::Matched);
        assert_eq!(nearest_case(0.83, &rates), CaseLabel::WrongBending);
        assert_eq!(nearest_case(5.0, &rates), CaseLabel::WrongOrientation);
        // The geometric midpoint between matched and wrong-bending
        // belongs to the slower-decaying (matched) side.
        let mid = (rates.matched * rates.wrong_bending).sqrt();
        assert_eq!(nearest_case(mid, &rates), CaseLabel::Matched);
        // Non-positive slopes are treated as very slow decay.
        assert_eq!(nearest_case(-0.3, &rates), CaseLabel::Matched);
    }

    fn small_settings(s_grid: Vec<f64>, b_grid: Vec<f64>, refine: bool) -> ClassifySettings {
        ClassifySettings {
            cones: vec![Cone::Horizontal, Cone::Vertical],
            s_grid,
            b_grid,
            j_min: 4,
            j_max: 7,
            quad: QuadratureSpec::default_grid(),
            refine,
        }
    }

    #[test]
    fn far_point_is_off_boundary() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        let settings = small_settings(vec![-0.5, 0.0, 0.5], vec![-2.0, 0.0], false);
        let res = classify_point(&gen, ALPHA, &sig, (0.9, 0.9), &settings).unwrap();
        assert_eq!(res.case, CaseLabel::OffBoundary);
        assert_eq!(res.rate, None);
        assert_eq!(res.normal, None);
        assert_eq!(res.curvature, None);
        assert_eq!(res.confidence, Confidence::High);
    }

    #[test]
    fn matched_disk_point_recovers_orientation_bending_and_curvature() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        // The default scale depth matters here: at j_max = 7 the
        // neighboring cell b = −1 is still pre-asymptotically larger
        // than the true b = −2; the crossover happens by j = 8.
        let mut settings = small_settings(
            vec![-0.25, 0.0, 0.25],
            vec![-3.0, -2.0, -1.0, 0.0],
            false,
        );
        settings.j_max = 8;
        let res = classify_point(&gen, ALPHA, &sig, (0.25, 0.0), &settings).unwrap();
        assert_eq!(res.case, CaseLabel::Matched);
        assert_eq!((res.s, res.b, res.iota), (0.0, -2.0, 1));
        assert_eq!(res.curvature, Some(4.0));
        let n = res.normal.unwrap();
        assert_relative_eq!(n[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(n[1], 0.0, epsilon = 1e-15);
        let rate = res.rate.unwrap();
        assert!(
            (rate - 0.6675).abs() < 0.1,
            "matched rate off: {rate} vs 0.6675"
        );
    }

    #[test]
    fn refinement_stays_within_one_fine_step_of_the_oracle() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        let mut settings = small_settings(vec![0.0], vec![-3.0, -2.0, -1.0, 0.0], true);
        settings.j_max = 8;
        let res = classify_point(&gen, ALPHA, &sig, (0.25, 0.0), &settings).unwrap();
        assert_eq!(res.case, CaseLabel::Matched);
        // Coarse step 1.0, refinement step 0.2; the true bending is −2.
        assert!(
            (res.b + 2.0).abs() <= 0.2 + 1e-12,
            "refined bending {} strayed from -2",
            res.b
        );
    }

    #[test]
    fn bending_starved_grid_reports_wrong_bending_rate() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        let settings = small_settings(vec![-0.25, 0.0, 0.25], vec![0.0], false);
        let res = classify_point(&gen, ALPHA, &sig, (0.25, 0.0), &settings).unwrap();
        assert_eq!(res.case, CaseLabel::WrongBending);
        assert_eq!((res.s, res.iota), (0.0, 1));
        let rate = res.rate.unwrap();
        assert!(
            (rate - 0.8325).abs() < 0.15,
            "wrong-bending rate off: {rate} vs 0.8325"
        );
        assert_eq!(res.normal, None);
    }

    #[test]
    fn classification_is_cone_equivariant() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        let settings = small_settings(vec![-0.25, 0.0, 0.25], vec![-3.0, -2.0, -1.0], false);
        let t = (0.25, 0.0);
        let direct = classify_point(&gen, ALPHA, &sig, t, &settings).unwrap();
        let mirrored = classify_point_swapped(&gen, ALPHA, &sig, t, &settings).unwrap();
        assert_eq!(direct.case, mirrored.case);
        assert_eq!(direct.iota, -mirrored.iota);
        assert_eq!((direct.s, direct.b), (mirrored.s, mirrored.b));
        assert_relative_eq!(
            direct.rate.unwrap(),
            mirrored.rate.unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn amplitude_scaling_does_not_move_slopes_or_labels() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        let scaled = disk(0.25).with_gain(3.0);
        let settings = small_settings(vec![0.0], vec![-2.0, 0.0], false);
        let plain = classify_point(&gen, ALPHA, &sig, (0.25, 0.0), &settings).unwrap();
        let boosted = classify_point(&gen, ALPHA, &scaled, (0.25, 0.0), &settings).unwrap();
        assert_eq!(plain.case, boosted.case);
        assert_eq!((plain.s, plain.b, plain.iota), (boosted.s, boosted.b, boosted.iota));
        assert_relative_eq!(plain.rate.unwrap(), boosted.rate.unwrap(), epsilon = 1e-9);
        assert_eq!(plain.curvature, boosted.curvature);
    }

    #[test]
    fn degenerate_alpha_is_rejected_by_classification() {
        let gen = GeneratorPair::default_pair();
        let sig = disk(0.25);
        let settings = small_settings(vec![0.0], vec![0.0], false);
        assert!(matches!(
            classify_point(&gen, 0.5, &sig, (0.25, 0.0), &settings),
            Err(AnalysisError::DegenerateAlpha(_))
        ));
    }

    #[test]
    fn matched_transform_curve_fits_near_its_theoretical_rate() {
        let gen = GeneratorPair::default_pair();
        let sig = Signal::analytic(AnalyticRegion::HalfPlane {
            s_prime: 0.0,
            offset: (0.0, 0.0),
        });
        let curve = decay_curve(
            &gen,
            ALPHA,
            &sig,
            0.0,
            0.0,
            (0.0, 0.0),
            Cone::Horizontal,
            4,
            8,
            &QuadratureSpec::default_grid(),
        )
        .unwrap();
        let fit = fit_rate(&curve).unwrap();
        assert!(
            (fit.slope - 0.6675).abs() < 0.1,
            "slope {} strayed from 0.6675",
            fit.slope
        );
        assert_eq!(fit.floored_excluded, 0);
    }

    #[test]
    fn uniform_grid_hits_endpoints_exactly() {
        let g = uniform_grid(-1.0, 1.0, 0.05);
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[40], 1.0);
        assert_eq!(g[20], 0.0);
        let b = uniform_grid(-5.0, 5.0, 0.1);
        assert_eq!(b.len(), 101);
        assert_eq!(b[50], 0.0);
    }
}
