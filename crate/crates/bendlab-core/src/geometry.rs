//! Exact coordinate operators underlying the transform.
//!
//! Everything in this module is elementary plane geometry: the anisotropic
//! scaling `diag(a, a^α)`, the l-th order shearing map
//! `(x₁, x₂) ↦ (x₁ + Σ_m r_m x₂^m, x₂)`, their composition into the argument
//! of the unitary representation, and the coordinate swap used to move
//! between the horizontal and vertical cone. The maps are pure functions on
//! immutable value types; no operator mutates its input, so parameter
//! objects can be shared freely across sweep threads.
//!
//! The shearing map is linear for order l = 1 (an ordinary shear) and
//! genuinely nonlinear for l ≥ 2 — the first coordinate picks up polynomial
//! terms in x₂ — but it always preserves the second coordinate and has unit
//! Jacobian determinant, which is what makes the inverse trivial (negate the
//! coefficient vector) and keeps all quadrature cell volumes exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point (or vector) in the plane, `(x₁, x₂)`.
pub type Point = (f64, f64);

/// Largest shear order for which [`ShearParams::new`] accepts a coefficient
/// vector by default. The maps themselves are generic in the order; the cap
/// exists to catch accidentally huge coefficient vectors early.
pub const MAX_SHEAR_ORDER: usize = 4;

/// Errors from constructing geometry parameter objects.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// Scale parameter must be strictly positive (and finite).
    #[error("scale parameter a must be positive and finite, got {0}")]
    InvalidScale(f64),
    /// The anisotropy exponent is restricted to [0, 1].
    #[error("anisotropy exponent alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    /// Shear order must be between 1 and the supported maximum.
    #[error("shear order must be in 1..={max}, got {got}")]
    InvalidOrder { got: usize, max: usize },
    /// Cone-adapted parameters restrict the scale to (0, 1).
    #[error("cone-adapted scale a must lie in (0, 1), got {0}")]
    ScaleOutOfRange(f64),
    /// Cone-adapted parameters restrict the shear to [-1, 1].
    #[error("cone-adapted shear s must lie in [-1, 1], got {0}")]
    ShearOutOfRange(f64),
    /// Parameters must be finite numbers.
    #[error("parameter {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
}

/// The anisotropic scaling `diag(a, a^α)`.
///
/// `alpha = 1` scales isotropically, `alpha = 1/2` is parabolic scaling,
/// `alpha = 0` stretches only the first axis. The induced 2×2 matrix has
/// determinant `a^{1+α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaScale {
    /// Scale, strictly positive.
    a: f64,
    /// Anisotropy exponent in [0, 1].
    alpha: f64,
}

impl AlphaScale {
    /// Validates `a > 0` (finite) and `alpha ∈ [0, 1]`.
    pub fn new(a: f64, alpha: f64) -> Result<Self, GeometryError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(GeometryError::InvalidScale(a));
        }
        if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
            return Err(GeometryError::InvalidAlpha(alpha));
        }
        Ok(Self { a, alpha })
    }

    /// The scale `a`.
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// The anisotropy exponent `α`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The second-axis factor `a^α`.
    #[inline]
    pub fn a_pow_alpha(&self) -> f64 {
        self.a.powf(self.alpha)
    }

    /// Determinant of the induced matrix, `a^{1+α}`.
    #[inline]
    pub fn det(&self) -> f64 {
        self.a.powf(1.0 + self.alpha)
    }
}

/// Applies the scaling: `x ↦ (a·x₁, a^α·x₂)`.
#[inline]
pub fn apply_alpha_scale(sc: AlphaScale, x: Point) -> Point {
    (sc.a * x.0, sc.a_pow_alpha() * x.1)
}

/// Applies the inverse scaling: `x ↦ (x₁/a, x₂/a^α)`.
#[inline]
pub fn apply_inverse_alpha_scale(sc: AlphaScale, x: Point) -> Point {
    (x.0 / sc.a, x.1 / sc.a_pow_alpha())
}

/// Coefficients `r = (r₁, …, r_l)` of an l-th order shearing map.
///
/// The map sends `(x₁, x₂)` to `(x₁ + Σ_{m=1}^{l} r_m x₂^m, x₂)`. Order
/// l = 1 is an ordinary shear; for l = 2, `r₁` shears and `r₂` bends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearParams {
    /// Polynomial coefficients; `r[m-1]` multiplies `x₂^m`. Length = order.
    r: Vec<f64>,
}

impl ShearParams {
    /// Validates `1 ≤ r.len() ≤ MAX_SHEAR_ORDER` and finiteness.
    pub fn new(r: Vec<f64>) -> Result<Self, GeometryError> {
        if r.is_empty() || r.len() > MAX_SHEAR_ORDER {
            return Err(GeometryError::InvalidOrder {
                got: r.len(),
                max: MAX_SHEAR_ORDER,
            });
        }
        if let Some(&bad) = r.iter().find(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite {
                name: "r",
                value: bad,
            });
        }
        Ok(Self { r })
    }

    /// Second-order (shear `s`, bending `b`) parameters — the bendlet case.
    pub fn second_order(s: f64, b: f64) -> Self {
        Self { r: vec![s, b] }
    }

    /// The shear order l.
    #[inline]
    pub fn order(&self) -> usize {
        self.r.len()
    }

    /// The coefficient vector.
    #[inline]
    pub fn coefficients(&self) -> &[f64] {
        &self.r
    }

    /// The polynomial offset `Σ_{m=1}^{l} r_m y^m`, evaluated by Horner's
    /// scheme. This is the amount added to the first coordinate when the
    /// second coordinate equals `y`.
    #[inline]
    pub fn offset_at(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for &rm in self.r.iter().rev() {
            acc = (acc + rm) * y;
        }
        acc
    }

    /// The same parameters with every coefficient negated (the inverse map).
    pub fn negated(&self) -> Self {
        Self {
            r: self.r.iter().map(|v| -v).collect(),
        }
    }
}

/// Applies the shearing: `x ↦ (x₁ + Σ_m r_m x₂^m, x₂)`.
#[inline]
pub fn apply_shear(sh: &ShearParams, x: Point) -> Point {
    (x.0 + sh.offset_at(x.1), x.1)
}

/// Applies the inverse shearing, i.e. the shearing with negated
/// coefficients. Because the second coordinate is a fixed point of every
/// shearing, negation inverts the map exactly (not just to first order).
#[inline]
pub fn apply_inverse_shear(sh: &ShearParams, x: Point) -> Point {
    (x.0 - sh.offset_at(x.1), x.1)
}

/// A full parameter point `(a, r, t)` of the l-th order system, together
/// with the anisotropy exponent α of the scaling family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderParams {
    /// The anisotropic scaling `diag(a, a^α)`.
    pub scale: AlphaScale,
    /// The shearing coefficients `r`.
    pub shear: ShearParams,
    /// The translation `t`.
    pub t: Point,
}

impl HigherOrderParams {
    /// Validates all components.
    pub fn new(a: f64, alpha: f64, r: Vec<f64>, t: Point) -> Result<Self, GeometryError> {
        let scale = AlphaScale::new(a, alpha)?;
        let shear = ShearParams::new(r)?;
        if !t.0.is_finite() || !t.1.is_finite() {
            return Err(GeometryError::NonFinite {
                name: "t",
                value: if t.0.is_finite() { t.1 } else { t.0 },
            });
        }
        Ok(Self { scale, shear, t })
    }
}

/// The argument of the representation action:
/// `x ↦ A_{a,α}^{-1} S_{-r} (x − t)`.
///
/// An atom with parameters `p` evaluates the generator at exactly this
/// point, so this map is the single place where translation, inverse shear,
/// and inverse scaling compose.
#[inline]
pub fn representation_arg(p: &HigherOrderParams, x: Point) -> Point {
    let shifted = (x.0 - p.t.0, x.1 - p.t.1);
    let sheared = apply_inverse_shear(&p.shear, shifted);
    apply_inverse_alpha_scale(p.scale, sheared)
}

/// Swaps the coordinates: `(x₁, x₂) ↦ (x₂, x₁)`. Involutive.
///
/// The vertical-cone system is defined through this swap: a vertical-cone
/// atom evaluated at `x` equals the corresponding horizontal-cone atom
/// evaluated at `cone_swap(x)` with swapped translation.
#[inline]
pub fn cone_swap(x: Point) -> Point {
    (x.1, x.0)
}

/// Cone index ι of the cone-adapted system: `Horizontal` is ι = +1 (the
/// generator's oscillating factor runs along x₁), `Vertical` is ι = −1
/// (coordinates swapped).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cone {
    /// ι = +1.
    Horizontal,
    /// ι = −1.
    Vertical,
}

impl Cone {
    /// The signed index: +1 or −1.
    #[inline]
    pub fn index(&self) -> i8 {
        match self {
            Cone::Horizontal => 1,
            Cone::Vertical => -1,
        }
    }

    /// The other cone.
    #[inline]
    pub fn flipped(&self) -> Self {
        match self {
            Cone::Horizontal => Cone::Vertical,
            Cone::Vertical => Cone::Horizontal,
        }
    }

    /// Parses a signed index (+1 / −1).
    pub fn from_index(i: i8) -> Result<Self, GeometryError> {
        match i {
            1 => Ok(Cone::Horizontal),
            -1 => Ok(Cone::Vertical),
            _ => Err(GeometryError::NonFinite {
                name: "iota",
                value: i as f64,
            }),
        }
    }
}

/// A cone-adapted second-order parameter point: scale `a ∈ (0,1]`, shear
/// `s ∈ [−1,1]`, bending `b`, translation `t`, and cone index ι.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendletParams {
    /// Scale in (0, 1].
    pub a: f64,
    /// Shear in [−1, 1] (the cone adaptation keeps it there).
    pub s: f64,
    /// Bending (unrestricted).
    pub b: f64,
    /// Translation.
    pub t: Point,
    /// Cone index.
    pub iota: Cone,
}

impl BendletParams {
    /// Validates the cone-adapted ranges `0 < a ≤ 1`, `−1 ≤ s ≤ 1`. The
    /// endpoint `a = 1` is the mother-atom scale; decay analysis always
    /// works strictly below it.
    pub fn new(a: f64, s: f64, b: f64, t: Point, iota: Cone) -> Result<Self, GeometryError> {
        if !(a.is_finite() && 0.0 < a && a <= 1.0) {
            return Err(GeometryError::ScaleOutOfRange(a));
        }
        if !(s.is_finite() && (-1.0..=1.0).contains(&s)) {
            return Err(GeometryError::ShearOutOfRange(s));
        }
        for (name, v) in [("b", b), ("t1", t.0), ("t2", t.1)] {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite { name, value: v });
            }
        }
        Ok(Self { a, s, b, t, iota })
    }

    /// The full parameter point `(a, (s,b), t)` with the given α, forgetting
    /// the cone index (the transform handles ι by swapping coordinates).
    pub fn to_higher_order(&self, alpha: f64) -> Result<HigherOrderParams, GeometryError> {
        HigherOrderParams::new(self.a, alpha, vec![self.s, self.b], self.t)
    }
}
