//! Construction and evaluation of the separable generator ψ = ψ¹ ⊗ φ¹.
//!
//! The oscillating factor ψ¹ is a compactly supported Daubechies wavelet
//! with M vanishing moments, produced from scratch by spectral
//! factorization and the cascade algorithm ([`daubechies`]); the smooth
//! low-pass factor φ¹ is a centered cardinal B-spline ([`spline`]). The
//! classification theory needs three things from the pair, all checked
//! numerically here: ψ¹ bounded with M vanishing moments, φ¹ ∈ C^L with
//! L > M, and — for the lower decay bounds only — φ¹(0) and the two
//! parabolic half-plane integrals of ψ¹ nonzero
//! ([`verify_theorem_conditions`]).
//!
//! # Normalization convention
//!
//! [`Wavelet1D`] and [`Window1D`] keep their classical raw conventions
//! (ψ¹ on `[0, 2M−1]` from the cascade, φ¹ on `[−k/2, k/2]`). The
//! [`GeneratorPair`] rescales each factor affinely onto the **unit interval
//! `[−1/2, 1/2]` with unit L² norm** and evaluates the product of the
//! rescaled factors. The transform's scale parameter then has an exact
//! geometric meaning — an atom at scale `a` occupies an `a × a^α` box
//! before shearing — independent of the filter length, which keeps
//! "off the boundary" statements scale-honest. All reported pair-level
//! quantities (φ¹(0), half-plane integrals, L² norms) refer to the
//! rescaled factors.

mod daubechies;
mod spline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

pub use daubechies::{cascade, daubechies_filter, quadrature_mirror};
pub use spline::{bspline_centered, bspline_l2_norm_sq};

/// Default number of vanishing moments (the featured experimental setup).
pub const DEFAULT_VANISHING_MOMENTS: u32 = 8;
/// Default cascade depth: samples at spacing 2^{−10}.
pub const DEFAULT_CASCADE_DEPTH: u32 = 10;
/// Default B-spline window order (C⁹ smoothness, exceeding M = 8).
pub const DEFAULT_WINDOW_ORDER: u32 = 11;

/// Threshold below which a theorem-condition quantity counts as zero.
pub const CONDITION_TOLERANCE: f64 = 1e-8;

/// Relative tolerance for the vanishing-moment verification.
pub const MOMENT_TOLERANCE: f64 = 1e-6;

/// Errors from generator construction.
#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    /// Daubechies construction supports 1..=10 vanishing moments.
    #[error("vanishing moments must be in 1..=10, got {0}")]
    UnsupportedMoments(u32),
    /// Cascade depth outside the supported range.
    #[error("cascade depth must be in 8..=16, got {0}")]
    UnsupportedDepth(u32),
    /// The eigenvector solve for the scaling-function values failed.
    #[error("cascade bootstrap failed for {0} vanishing moments")]
    CascadeFailed(u32),
    /// B-spline windows need order at least 2.
    #[error("spline window order must be at least 2, got {0}")]
    WindowOrderTooSmall(u32),
    /// A wavelet whose moment check fails would violate the analysis
    /// contract; this is a construction-time internal consistency error.
    #[error("vanishing moment check failed at order {order}: relative size {relative:e}")]
    MomentCheckFailed { order: u32, relative: f64 },
}

/// A compactly supported wavelet ψ¹ sampled on a dyadic grid.
///
/// Samples live on `[0, 2M−1]` with spacing `2^{−depth}` and are exact
/// point values of the wavelet (the cascade transports exact integer-grid
/// values; no iteration error). Evaluation between samples interpolates
/// linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet1D {
    /// Number of vanishing moments M.
    m: u32,
    /// Dyadic sampling depth; spacing is 2^{−depth}.
    depth: u32,
    /// The orthonormal low-pass two-scale filter (2M taps).
    filter_lo: Vec<f64>,
    /// Wavelet samples on [0, 2M−1], length (2M−1)·2^depth + 1.
    samples: Vec<f64>,
    /// Sup-norm bound (max |sample|; exact on the sample grid).
    sup_norm: f64,
}

impl Wavelet1D {
    /// Number of vanishing moments M.
    #[inline]
    pub fn vanishing_moments(&self) -> u32 {
        self.m
    }

    /// The dyadic sampling depth.
    #[inline]
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Support interval `[0, 2M−1]`.
    #[inline]
    pub fn support(&self) -> (f64, f64) {
        (0.0, (2 * self.m - 1) as f64)
    }

    /// Sample spacing `2^{−depth}`.
    #[inline]
    pub fn sample_spacing(&self) -> f64 {
        (2.0f64).powi(-(self.depth as i32))
    }

    /// The raw sample array.
    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// The low-pass filter h the wavelet was built from.
    #[inline]
    pub fn filter(&self) -> &[f64] {
        &self.filter_lo
    }

    /// Bound on |ψ¹| (the largest sample magnitude).
    #[inline]
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// ψ¹(x) by linear interpolation; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&x) {
            return 0.0;
        }
        let pos = x * (1u64 << self.depth) as f64;
        let i = pos.floor() as usize;
        if i + 1 >= self.samples.len() {
            return self.samples[self.samples.len() - 1];
        }
        let frac = pos - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Trapezoid quadrature of `x^k ψ¹(x)` over the support grid.
    pub fn moment(&self, k: u32) -> f64 {
        self.weighted_sum(|x, v| x.powi(k as i32) * v)
    }

    /// Trapezoid quadrature of `|x|^k |ψ¹(x)|` (the scale the moment is
    /// compared against).
    pub fn moment_scale(&self, k: u32) -> f64 {
        self.weighted_sum(|x, v| x.abs().powi(k as i32) * v.abs())
    }

    /// Trapezoid quadrature of `ψ¹(x)²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.weighted_sum(|_, v| v * v)
    }

    fn weighted_sum(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let h = self.sample_spacing();
        let n = self.samples.len();
        let mut acc = 0.0;
        for (i, &v) in self.samples.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * f(i as f64 * h, v);
        }
        acc * h
    }
}

/// Builds the Daubechies wavelet with `m` vanishing moments at the default
/// cascade depth.
pub fn build_daubechies(m: u32) -> Result<Wavelet1D, GeneratorError> {
    build_daubechies_with_depth(m, DEFAULT_CASCADE_DEPTH)
}

/// Builds the Daubechies wavelet with `m` vanishing moments, sampled at
/// spacing `2^{−depth}` (depth 8..=16).
pub fn build_daubechies_with_depth(m: u32, depth: u32) -> Result<Wavelet1D, GeneratorError> {
    if !(8..=16).contains(&depth) {
        return Err(GeneratorError::UnsupportedDepth(depth));
    }
    let h = daubechies_filter(m)?;
    let (_, psi) = cascade(&h, depth)?;
    let sup_norm = psi.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let wavelet = Wavelet1D {
        m,
        depth,
        filter_lo: h,
        samples: psi,
        sup_norm,
    };
    // Construction-time sanity: the vanishing moments the analysis relies
    // on must actually hold on the sample grid.
    for k in 0..m {
        let moment = wavelet.moment(k);
        let scale = wavelet.moment_scale(k).max(f64::MIN_POSITIVE);
        let relative = moment.abs() / scale;
        if relative > MOMENT_TOLERANCE {
            return Err(GeneratorError::MomentCheckFailed { order: k, relative });
        }
    }
    Ok(wavelet)
}

/// A centered cardinal B-spline window φ¹ of order k: support
/// `[−k/2, k/2]`, smoothness C^{k−2}, evaluated exactly (no sampling).
#[derive(Debug, Clone, PartialEq)]
pub struct Window1D {
    /// Spline order k (degree k−1).
    order: u32,
    /// The integer-spaced knots `−k/2, −k/2+1, …, k/2`.
    knots: Vec<f64>,
}

impl Window1D {
    /// Spline order k.
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    /// The knot sequence.
    #[inline]
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Support interval `[−k/2, k/2]`.
    #[inline]
    pub fn support(&self) -> (f64, f64) {
        let half = self.order as f64 / 2.0;
        (-half, half)
    }

    /// Smoothness exponent L = k − 2 (φ¹ ∈ C^L).
    #[inline]
    pub fn smoothness(&self) -> u32 {
        self.order - 2
    }

    /// φ¹(x), exact piecewise-polynomial evaluation.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        bspline_centered(self.order, x)
    }

    /// `∫ φ¹(x)² dx`, exact via the convolution identity.
    #[inline]
    pub fn l2_norm_sq(&self) -> f64 {
        bspline_l2_norm_sq(self.order)
    }
}

/// Builds the centered B-spline window of order `k ≥ 2`.
pub fn build_spline_window(k: u32) -> Result<Window1D, GeneratorError> {
    if k < 2 {
        return Err(GeneratorError::WindowOrderTooSmall(k));
    }
    let half = k as f64 / 2.0;
    let knots = (0..=k).map(|i| -half + i as f64).collect();
    Ok(Window1D { order: k, knots })
}

/// Resolution of the window's fast lookup table (2^16 cells across the
/// unit support; interpolation error ≈ 1e−9, far below every quadrature
/// tolerance used downstream).
const WINDOW_TABLE_BITS: u32 = 16;

/// The separable generator ψ = ψ¹ ⊗ φ¹ with both factors rescaled onto
/// `[−1/2, 1/2]` at unit L² norm (see the module docs for why).
///
/// Immutable after construction; evaluation is pure and thread-safe.
#[derive(Debug, Clone)]
pub struct GeneratorPair {
    psi1: Wavelet1D,
    phi1: Window1D,
    /// Raw ψ¹ support length 2M−1 (the unit-support stretch factor).
    psi_units: f64,
    /// Amplitude making the rescaled ψ¹ unit-L².
    psi_amp: f64,
    /// Raw φ¹ support length k.
    phi_units: f64,
    /// Amplitude making the rescaled φ¹ unit-L².
    phi_amp: f64,
    /// Uniform samples of the rescaled φ¹ over [−1/2, 1/2] for the
    /// evaluation hot path (2^16 + 1 exact node values).
    phi_table: Vec<f64>,
    /// Trapezoid antiderivative of the raw ψ¹ samples (same grid), used
    /// for exact-in-ψ integration between signal transitions. Uniformly
    /// accurate: the cumulative trapezoid error stays O(h²·ψ′) pointwise
    /// rather than accumulating.
    psi_cum: Vec<f64>,
    /// ∫∫_{x₁ ≤ −x₂²} ψ¹(x₁) dx over the unit support box.
    half_integral_left: f64,
    /// ∫∫_{x₁ ≥ x₂²} ψ¹(x₁) dx over the unit support box.
    half_integral_right: f64,
    /// Whether the window smoothness exceeds the wavelet's moment count
    /// (L > M, the smoothness hypothesis of the decay estimates).
    smoothness_ok: bool,
}

impl GeneratorPair {
    /// Assembles the pair from raw factors, applying the unit-support /
    /// unit-L² rescaling and computing the condition metadata.
    pub fn new(psi1: Wavelet1D, phi1: Window1D) -> Self {
        let psi_units = (2 * psi1.vanishing_moments() - 1) as f64;
        let psi_amp = (psi_units / psi1.l2_norm_sq()).sqrt();
        let phi_units = phi1.order() as f64;
        let phi_amp = (phi_units / phi1.l2_norm_sq()).sqrt();
        let smoothness_ok = phi1.smoothness() > psi1.vanishing_moments();

        let n = 1usize << WINDOW_TABLE_BITS;
        let phi_table: Vec<f64> = (0..=n)
            .map(|i| {
                let v = -0.5 + i as f64 / n as f64;
                phi_amp * phi1.eval(v * phi_units)
            })
            .collect();

        let h = psi1.sample_spacing();
        let samples = psi1.samples();
        let mut psi_cum = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        psi_cum.push(0.0);
        for w in samples.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * h;
            psi_cum.push(acc);
        }

        let mut pair = Self {
            psi1,
            phi1,
            psi_units,
            psi_amp,
            phi_units,
            phi_amp,
            phi_table,
            psi_cum,
            half_integral_left: 0.0,
            half_integral_right: 0.0,
            smoothness_ok,
        };
        let (left, right) = pair.parabolic_half_integrals();
        pair.half_integral_left = left;
        pair.half_integral_right = right;
        pair
    }

    /// The default experimental pair: M = 8 wavelet × order-11 spline.
    pub fn default_pair() -> Self {
        let psi = build_daubechies(DEFAULT_VANISHING_MOMENTS)
            .expect("default wavelet parameters are valid");
        let phi =
            build_spline_window(DEFAULT_WINDOW_ORDER).expect("default window order is valid");
        Self::new(psi, phi)
    }

    /// Builds the pair described by a serialized descriptor.
    pub fn from_descriptor(desc: &GeneratorDescriptor) -> Result<Self, GeneratorError> {
        let psi = build_daubechies_with_depth(
            desc.wavelet.vanishing_moments,
            desc.wavelet.cascade_depth,
        )?;
        let phi = build_spline_window(desc.window.order)?;
        Ok(Self::new(psi, phi))
    }

    /// The descriptor reproducing this pair.
    pub fn descriptor(&self) -> GeneratorDescriptor {
        GeneratorDescriptor {
            wavelet: WaveletDescriptor {
                vanishing_moments: self.psi1.vanishing_moments(),
                cascade_depth: self.psi1.depth(),
            },
            window: WindowDescriptor {
                order: self.phi1.order(),
            },
        }
    }

    /// The raw wavelet factor (classical `[0, 2M−1]` convention).
    #[inline]
    pub fn wavelet(&self) -> &Wavelet1D {
        &self.psi1
    }

    /// The raw window factor (classical `[−k/2, k/2]` convention).
    #[inline]
    pub fn window(&self) -> &Window1D {
        &self.phi1
    }

    /// Number of vanishing moments of ψ¹.
    #[inline]
    pub fn vanishing_moments(&self) -> u32 {
        self.psi1.vanishing_moments()
    }

    /// The rescaled ψ¹ factor at `u` (support `[−1/2, 1/2]`, unit L²).
    #[inline]
    pub fn psi1_eval(&self, u: f64) -> f64 {
        if !(-0.5..=0.5).contains(&u) {
            return 0.0;
        }
        self.psi_amp * self.psi1.eval((u + 0.5) * self.psi_units)
    }

    /// Antiderivative of the rescaled ψ¹: `∫_{−1/2}^{u} ψ¹`, clamping `u`
    /// to the support. Exact for the piecewise-linear interpolant that
    /// `psi1_eval` returns: inside a sample cell the integral is quadratic
    /// in the offset, and dropping that term to a secant would silently
    /// integrate the staircase of cell averages instead — a different
    /// function from the one pointwise quadratures see, which shows up as
    /// a method-dependent limit when edge cuts sit still across many rows.
    #[inline]
    pub fn psi1_cumulative(&self, u: f64) -> f64 {
        let u = u.clamp(-0.5, 0.5);
        let h = self.psi1.sample_spacing();
        let w = (u + 0.5) * self.psi_units / h;
        let i = (w.floor() as usize).min(self.psi_cum.len() - 2);
        let frac = w - i as f64;
        let samples = self.psi1.samples();
        let (s0, s1) = (samples[i], samples[i + 1]);
        let raw = self.psi_cum[i] + h * frac * (s0 + 0.5 * frac * (s1 - s0));
        self.psi_amp / self.psi_units * raw
    }

    /// `∫_{u0}^{u1} ψ¹` over the rescaled support (clamped endpoints).
    #[inline]
    pub fn psi1_integral(&self, u0: f64, u1: f64) -> f64 {
        self.psi1_cumulative(u1) - self.psi1_cumulative(u0)
    }

    /// The rescaled φ¹ factor at `v` (support `[−1/2, 1/2]`, unit L²),
    /// via the lookup table.
    #[inline]
    pub fn phi1_eval(&self, v: f64) -> f64 {
        if !(-0.5..=0.5).contains(&v) {
            return 0.0;
        }
        let n = (self.phi_table.len() - 1) as f64;
        let pos = (v + 0.5) * n;
        let i = (pos.floor() as usize).min(self.phi_table.len() - 2);
        let frac = pos - i as f64;
        self.phi_table[i] * (1.0 - frac) + self.phi_table[i + 1] * frac
    }

    /// The rescaled φ¹ factor evaluated exactly (no table); used where a
    /// slow path with zero interpolation error matters.
    #[inline]
    pub fn phi1_eval_exact(&self, v: f64) -> f64 {
        self.phi_amp * self.phi1.eval(v * self.phi_units)
    }

    /// ψ(x) = ψ¹(x₁)·φ¹(x₂) in rescaled coordinates; zero outside the
    /// unit support box.
    #[inline]
    pub fn eval(&self, x: Point) -> f64 {
        let p = self.psi1_eval(x.0);
        if p == 0.0 {
            return 0.0;
        }
        p * self.phi1_eval(x.1)
    }

    /// Support box of the rescaled generator: `[−1/2,1/2] × [−1/2,1/2]`.
    #[inline]
    pub fn support_box(&self) -> ((f64, f64), (f64, f64)) {
        ((-0.5, 0.5), (-0.5, 0.5))
    }

    /// Raw ψ¹ support length 2M−1 — the factor by which the unit support
    /// compresses the wavelet's oscillations. Quadrature rules divide the
    /// first axis this much finer to keep the same per-oscillation
    /// resolution.
    #[inline]
    pub fn psi_support_units(&self) -> f64 {
        self.psi_units
    }

    /// φ¹(0) of the rescaled window (nonzero is a lower-bound condition).
    #[inline]
    pub fn phi_at_zero(&self) -> f64 {
        self.phi_amp * self.phi1.eval(0.0)
    }

    /// ∫∫_{x₁ ≤ −x₂²} ψ¹(x₁) dx over the unit support box.
    #[inline]
    pub fn half_integral_left(&self) -> f64 {
        self.half_integral_left
    }

    /// ∫∫_{x₁ ≥ x₂²} ψ¹(x₁) dx over the unit support box.
    #[inline]
    pub fn half_integral_right(&self) -> f64 {
        self.half_integral_right
    }

    /// Whether the window smoothness strictly exceeds the moment count.
    #[inline]
    pub fn smoothness_ok(&self) -> bool {
        self.smoothness_ok
    }

    /// The two parabolic half-plane integrals of ψ¹ over the unit box,
    /// reduced to one dimension: with `Ψ(y) = ∫_{−1/2}^{y} ψ¹`,
    ///
    /// ```text
    /// ∫∫_{x₁ ≤ −x₂²} ψ¹(x₁) dx = ∫ Ψ(−v²) dv
    /// ∫∫_{x₁ ≥  x₂²} ψ¹(x₁) dx = ∫ [Ψ(1/2) − Ψ(v²)] dv ,
    /// ```
    ///
    /// both over v ∈ [−1/2, 1/2]. Ψ is the exact cumulative trapezoid of
    /// the samples (piecewise linear), and the v-integrals use a fine
    /// midpoint rule on the smooth composition.
    fn parabolic_half_integrals(&self) -> (f64, f64) {
        // Cumulative trapezoid of the rescaled ψ¹ on its sample grid.
        let raw = self.psi1.samples();
        let h_unit = self.psi1.sample_spacing() / self.psi_units;
        let mut cumulative = Vec::with_capacity(raw.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in raw.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * h_unit * self.psi_amp;
            cumulative.push(acc);
        }
        let total = *cumulative.last().unwrap();
        let interp = |y: f64| -> f64 {
            // y ∈ [−1/2, 1/2] in unit coordinates.
            let pos = (y + 0.5) / h_unit;
            let i = (pos.floor() as usize).min(cumulative.len() - 2);
            let frac = pos - i as f64;
            cumulative[i] * (1.0 - frac) + cumulative[i + 1] * frac
        };

        let n = 200_001usize;
        let dv = 1.0 / n as f64;
        let mut left = 0.0;
        let mut right = 0.0;
        for i in 0..n {
            let v = -0.5 + (i as f64 + 0.5) * dv;
            left += interp(-v * v);
            right += total - interp(v * v);
        }
        (left * dv, right * dv)
    }
}

/// Evaluates the (rescaled) separable generator at a point.
#[inline]
pub fn eval_generator(g: &GeneratorPair, x: Point) -> f64 {
    g.eval(x)
}

/// Numerical report on the hypotheses behind the decay lower bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremConditionReport {
    /// φ¹(0) of the rescaled window.
    pub phi_at_zero: f64,
    /// ∫∫_{x₁ ≤ −x₂²} ψ¹(x₁) dx over the unit support box.
    pub left_parabolic_integral: f64,
    /// ∫∫_{x₁ ≥ x₂²} ψ¹(x₁) dx over the unit support box.
    pub right_parabolic_integral: f64,
    /// Whether each quantity clears the zero threshold.
    pub phi_at_zero_ok: bool,
    pub left_ok: bool,
    pub right_ok: bool,
    /// Window smoothness minus vanishing moments (must be positive).
    pub smoothness_margin: i64,
    /// All conditions pass.
    pub all_ok: bool,
}

impl std::fmt::Display for TheoremConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "phi1(0)                 = {:+.6e}  [{}]", self.phi_at_zero, flag(self.phi_at_zero_ok))?;
        writeln!(
            f,
            "int. left of -x2^2      = {:+.6e}  [{}]",
            self.left_parabolic_integral,
            flag(self.left_ok)
        )?;
        writeln!(
            f,
            "int. right of +x2^2     = {:+.6e}  [{}]",
            self.right_parabolic_integral,
            flag(self.right_ok)
        )?;
        writeln!(
            f,
            "smoothness margin L - M = {:+}         [{}]",
            self.smoothness_margin,
            flag(self.smoothness_margin > 0)
        )
    }
}

/// Checks the generator pair against the hypotheses the decay *lower*
/// bounds rely on (nonzero φ¹(0) and parabolic half-plane integrals,
/// window smoothness above the moment count). Failures are reported, not
/// raised: the decay upper bounds hold regardless.
pub fn verify_theorem_conditions(g: &GeneratorPair) -> TheoremConditionReport {
    let phi0 = g.phi_at_zero();
    let left = g.half_integral_left();
    let right = g.half_integral_right();
    let phi_ok = phi0.abs() > CONDITION_TOLERANCE;
    let left_ok = left.abs() > CONDITION_TOLERANCE;
    let right_ok = right.abs() > CONDITION_TOLERANCE;
    let margin = g.window().smoothness() as i64 - g.vanishing_moments() as i64;
    TheoremConditionReport {
        phi_at_zero: phi0,
        left_parabolic_integral: left,
        right_parabolic_integral: right,
        phi_at_zero_ok: phi_ok,
        left_ok,
        right_ok,
        smoothness_margin: margin,
        all_ok: phi_ok && left_ok && right_ok && margin > 0,
    }
}

/// Serializable description of a generator pair, for reproducible runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDescriptor {
    pub wavelet: WaveletDescriptor,
    pub window: WindowDescriptor,
}

/// Daubechies wavelet parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDescriptor {
    /// Vanishing moments M (1..=10).
    pub vanishing_moments: u32,
    /// Dyadic sampling depth (8..=16).
    #[serde(default = "default_depth")]
    pub cascade_depth: u32,
}

/// Spline window parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDescriptor {
    /// Spline order k ≥ 2.
    pub order: u32,
}

fn default_depth() -> u32 {
    DEFAULT_CASCADE_DEPTH
}

impl Default for GeneratorDescriptor {
    fn default() -> Self {
        Self {
            wavelet: WaveletDescriptor {
                vanishing_moments: DEFAULT_VANISHING_MOMENTS,
                cascade_depth: DEFAULT_CASCADE_DEPTH,
            },
            window: WindowDescriptor {
                order: DEFAULT_WINDOW_ORDER,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn haar_wavelet_step_values() {
        let w = build_daubechies(1).unwrap();
        assert_eq!(w.support(), (0.0, 1.0));
        assert_relative_eq!(w.eval(0.25), 1.0, epsilon = 1e-14);
        assert_relative_eq!(w.eval(0.75), -1.0, epsilon = 1e-14);
        assert_eq!(w.eval(1.5), 0.0);
        assert_eq!(w.eval(-0.1), 0.0);
    }

    #[test]
    fn db8_support_and_moments() {
        let w = build_daubechies(8).unwrap();
        assert_eq!(w.support(), (0.0, 15.0));
        for k in 0..8 {
            let rel = w.moment(k).abs() / w.moment_scale(k);
            assert!(rel < 1e-6, "moment {k} relative size {rel:e}");
        }
    }

    #[test]
    fn db2_moments_by_quadrature() {
        let w = build_daubechies(2).unwrap();
        for k in 0..2 {
            let rel = w.moment(k).abs() / w.moment_scale(k);
            assert!(rel < 1e-6, "moment {k} relative size {rel:e}");
        }
        // One moment it does *not* have: the quadratic one is macroscopic.
        assert!(w.moment(2).abs() / w.moment_scale(2) > 1e-3);
    }

    #[test]
    fn wavelet_l2_norm_is_unity() {
        for m in [1u32, 2, 8] {
            let w = build_daubechies(m).unwrap();
            assert!((w.l2_norm_sq() - 1.0).abs() < 2e-3, "m={m}");
        }
    }

    #[test]
    fn psi_cumulative_matches_quadrature_and_vanishes_at_ends() {
        let g = GeneratorPair::default_pair();
        // Total integral is the zeroth moment: zero to rounding.
        assert!(g.psi1_cumulative(0.5).abs() < 1e-12);
        assert_eq!(g.psi1_cumulative(-0.5), 0.0);
        // Interval additivity is exact by construction.
        let whole = g.psi1_integral(-0.4, 0.3);
        let split = g.psi1_integral(-0.4, -0.1) + g.psi1_integral(-0.1, 0.3);
        assert_relative_eq!(whole, split, epsilon = 1e-15);
        // Cross-check against a fine midpoint quadrature of the factor.
        let n = 200_000;
        let (lo, hi) = (-0.37, 0.22);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += g.psi1_eval(lo + (i as f64 + 0.5) * h);
        }
        assert_relative_eq!(g.psi1_integral(lo, hi), acc * h, epsilon = 1e-6);
    }

    #[test]
    fn window_orders_and_values() {
        let hat = build_spline_window(2).unwrap();
        assert_eq!(hat.eval(0.0), 1.0);
        assert_eq!(hat.support(), (-1.0, 1.0));
        assert_eq!(hat.smoothness(), 0);

        let cubic = build_spline_window(4).unwrap();
        assert_relative_eq!(cubic.eval(0.0), 2.0 / 3.0, epsilon = 1e-14);

        let wide = build_spline_window(11).unwrap();
        assert_eq!(wide.smoothness(), 9);
        assert!(wide.smoothness() > 8, "window must out-smooth the moments");
        assert!(build_spline_window(1).is_err());
    }

    #[test]
    fn pair_factors_are_unit_norm_on_unit_support() {
        let pair = GeneratorPair::default_pair();
        // Midpoint quadrature of each rescaled factor's square over
        // [-1/2, 1/2].
        let n = 60_000usize;
        let h = 1.0 / n as f64;
        let mut psi_sq = 0.0;
        let mut phi_sq = 0.0;
        for i in 0..n {
            let u = -0.5 + (i as f64 + 0.5) * h;
            psi_sq += pair.psi1_eval(u).powi(2);
            phi_sq += pair.phi1_eval_exact(u).powi(2);
        }
        assert_relative_eq!(psi_sq * h, 1.0, epsilon = 2e-3);
        assert_relative_eq!(phi_sq * h, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn pair_eval_is_separable_and_compactly_supported() {
        let pair = GeneratorPair::default_pair();
        let x = (0.13, -0.21);
        assert_relative_eq!(
            eval_generator(&pair, x),
            pair.psi1_eval(x.0) * pair.phi1_eval(x.1),
            max_relative = 1e-15
        );
        assert_eq!(eval_generator(&pair, (0.51, 0.0)), 0.0);
        assert_eq!(eval_generator(&pair, (0.0, -0.500001)), 0.0);
        assert_eq!(eval_generator(&pair, (5.0, 5.0)), 0.0);
        // On the x₂ axis the window contributes its central value.
        assert_relative_eq!(
            eval_generator(&pair, (0.2, 0.0)),
            pair.psi1_eval(0.2) * pair.phi_at_zero(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn window_table_matches_exact_evaluation() {
        let pair = GeneratorPair::default_pair();
        for i in 0..1000 {
            let v = -0.5 + (i as f64 + 0.37) / 1000.0;
            let table = pair.phi1_eval(v);
            let exact = pair.phi1_eval_exact(v);
            assert!(
                (table - exact).abs() < 1e-8,
                "v={v}: table {table} vs exact {exact}"
            );
        }
    }

    /// 2D midpoint-quadrature oracle for the parabolic half-plane
    /// integrals, independent of the 1D reduction used by the pair.
    fn parabolic_integrals_2d_oracle(pair: &GeneratorPair, n: usize) -> (f64, f64) {
        let h = 1.0 / n as f64;
        let mut left = 0.0;
        let mut right = 0.0;
        for i in 0..n {
            let u = -0.5 + (i as f64 + 0.5) * h;
            let psi = pair.psi1_eval(u);
            if psi == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = -0.5 + (j as f64 + 0.5) * h;
                if u <= -v * v {
                    left += psi;
                }
                if u >= v * v {
                    right += psi;
                }
            }
        }
        (left * h * h, right * h * h)
    }

    #[test]
    fn half_plane_integrals_match_analytic_values_for_shifted_haar() {
        // Unit-rescaled Haar: +amp on (−1/2, 0), −amp on (0, 1/2). With
        // Ψ(y) = amp·(y + 1/2) on the left half, the left parabolic
        // integral is amp·∫(1/2 − v²)dv = amp·(1/2 − 1/12) = 5·amp/12,
        // and the right one is its negative by antisymmetry.
        let pair = GeneratorPair::new(
            build_daubechies(1).unwrap(),
            build_spline_window(2).unwrap(),
        );
        let amp = pair.psi1_eval(-0.25);
        let expect = 5.0 * amp / 12.0;
        assert_relative_eq!(pair.half_integral_left(), expect, max_relative = 1e-3);
        assert_relative_eq!(pair.half_integral_right(), -expect, max_relative = 1e-3);
    }

    #[test]
    fn half_plane_integrals_match_2d_oracle_for_default_pair() {
        let pair = GeneratorPair::default_pair();
        let (left2d, right2d) = parabolic_integrals_2d_oracle(&pair, 2048);
        assert!(
            (pair.half_integral_left() - left2d).abs() < 5e-3,
            "left: 1d {} vs 2d {}",
            pair.half_integral_left(),
            left2d
        );
        assert!(
            (pair.half_integral_right() - right2d).abs() < 5e-3,
            "right: 1d {} vs 2d {}",
            pair.half_integral_right(),
            right2d
        );
    }

    #[test]
    fn default_pair_satisfies_all_conditions() {
        let pair = GeneratorPair::default_pair();
        let report = verify_theorem_conditions(&pair);
        assert!(report.phi_at_zero_ok);
        assert!(report.left_ok, "left integral {}", report.left_parabolic_integral);
        assert!(report.right_ok, "right integral {}", report.right_parabolic_integral);
        assert_eq!(report.smoothness_margin, 1);
        assert!(report.all_ok);
        // The report prints one line per condition.
        let text = report.to_string();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn hat_window_pair_reports_but_does_not_reject_low_smoothness() {
        // Haar × hat: the lower-bound hypotheses fail (L = 0 is not > M),
        // yet construction succeeds and the report carries the verdict.
        let pair = GeneratorPair::new(
            build_daubechies(1).unwrap(),
            build_spline_window(2).unwrap(),
        );
        let report = verify_theorem_conditions(&pair);
        assert!(report.phi_at_zero_ok);
        assert!(!pair.smoothness_ok());
        assert!(report.smoothness_margin <= 0);
        assert!(!report.all_ok);
    }

    #[test]
    fn descriptor_round_trip() {
        let desc = GeneratorDescriptor::default();
        let json = serde_json::to_string(&desc).unwrap();
        let back: GeneratorDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(desc, back);
        let pair = GeneratorPair::from_descriptor(&back).unwrap();
        assert_eq!(pair.descriptor(), desc);
        assert_eq!(pair.vanishing_moments(), 8);
    }

    #[test]
    fn depth_bounds_are_enforced() {
        assert!(build_daubechies_with_depth(8, 7).is_err());
        assert!(build_daubechies_with_depth(8, 17).is_err());
        assert!(build_daubechies_with_depth(8, 8).is_ok());
    }
}
