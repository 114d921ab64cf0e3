//! Bendlet atoms and transform coefficients ⟨f, ψ_{a,s,b,t,ι}⟩.
//!
//! An atom is the generator pushed through the representation: scaled by
//! `diag(a, a^α)`, sheared by the polynomial map `(s, b)` (or a general
//! coefficient vector for higher orders), translated to `t`, and
//! normalized by `a^{−(1+α)/2}` so its L² norm matches the generator's.
//! The vertical cone (ι = −1) is the same construction with the two
//! coordinates swapped.
//!
//! Coefficients are integrals of the signal against an atom. Both
//! quadrature methods sample the *signal* pointwise in signal coordinates
//! on the (mapped) support box, so analytic membership stays an exact
//! inequality:
//!
//! * **Scaled grid** — midpoint nodes on the shear-following grid, with
//!   the oscillating factor laid out at `q` nodes per lobe and rows at a
//!   physical spacing of `min(a, a^α)/q`. Within a row, the wavelet
//!   factor is integrated through its cumulative table between signal
//!   transitions located by bisection on membership. The correction
//!   matters: raw midpoint node weights leave an O(step) error hugging
//!   every signal edge, which would drown the fast-decay regimes this
//!   library exists to measure. Rows on which the signal is constant
//!   contribute through the vanishing total integral, so constants are
//!   annihilated to rounding and signals missing the support give an
//!   exact 0.0.
//! * **Adaptive** — recursive cell subdivision in the atom's unit frame
//!   (see [`adaptive`](self)), used as an independent cross-check of the
//!   grid method.
//!
//! Everything here is pure given an immutable signal and generator;
//! [`sweep`] fans out over parameter cells in parallel with one
//! accumulator per cell, so results are bitwise independent of the
//! thread schedule.

mod adaptive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{GeneratorDescriptor, GeneratorPair};
use crate::geometry::{
    cone_swap, AlphaScale, BendletParams, Cone, GeometryError, HigherOrderParams, Point,
    ShearParams,
};
use crate::signals::Signal;

/// Default grid oversampling: nodes per oscillation lobe along the
/// wavelet axis, and per `min(a, a^α)` of physical length across rows.
pub const DEFAULT_OVERSAMPLING: u32 = 16;

/// Smallest accepted oversampling factor.
pub const MIN_OVERSAMPLING: u32 = 4;

/// Default adaptive-quadrature tolerance (absolute, in coefficient units).
pub const DEFAULT_ADAPTIVE_TOLERANCE: f64 = 1e-8;

/// Coefficient magnitudes below this are recorded as the floor and
/// flagged, so log-log fits can exclude machine-noise points.
pub const MAGNITUDE_FLOOR: f64 = 1e-14;

/// Bisection iterations when locating a signal transition inside a grid
/// cell (resolves the cut to ~2^{−48} of a cell).
const BISECTION_STEPS: u32 = 48;

/// Errors from coefficient computation and parameter validation.
#[derive(Debug, Error)]
pub enum TransformError {
    /// Invalid scale/shear/translation parameters.
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    /// Grid oversampling below the minimum.
    #[error("oversampling must be at least {MIN_OVERSAMPLING}, got {0}")]
    OversamplingTooSmall(u32),
    /// Adaptive tolerance must be a positive number.
    #[error("adaptive tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    /// The raster cannot resolve an atom this thin.
    #[error(
        "raster pixel size {pixel_size:.3e} exceeds the atom width {a:.3e}; \
         finest feasible scale index is j = {max_feasible_j}"
    )]
    ResolutionTooCoarse {
        a: f64,
        pixel_size: f64,
        max_feasible_j: i32,
    },
    /// Scale ranges need at least two scales to speak of decay.
    #[error("scale range requires j_min < j_max, got {j_min}..{j_max}")]
    EmptyScaleRange { j_min: u32, j_max: u32 },
    /// Sweeps need nonempty parameter grids.
    #[error("sweep parameter grids must be nonempty")]
    EmptyGrid,
}

/// Which quadrature evaluates coefficients, with its knob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Midpoint rule on the shear-following scaled grid.
    ScaledGrid {
        /// Oversampling factor (nodes per resolved feature), ≥ 4.
        q: u32,
    },
    /// Recursive cell subdivision to a local agreement tolerance.
    Adaptive {
        /// Absolute tolerance in coefficient units.
        tolerance: f64,
    },
}

impl QuadratureSpec {
    /// The default grid method (`q = 16`).
    pub fn default_grid() -> Self {
        QuadratureSpec::ScaledGrid {
            q: DEFAULT_OVERSAMPLING,
        }
    }

    /// The default adaptive method (`tolerance = 1e−8`).
    pub fn default_adaptive() -> Self {
        QuadratureSpec::Adaptive {
            tolerance: DEFAULT_ADAPTIVE_TOLERANCE,
        }
    }

    /// Checks the knob ranges.
    pub fn validate(&self) -> Result<(), TransformError> {
        match *self {
            QuadratureSpec::ScaledGrid { q } if q < MIN_OVERSAMPLING => {
                Err(TransformError::OversamplingTooSmall(q))
            }
            QuadratureSpec::Adaptive { tolerance } if !(tolerance.is_finite() && tolerance > 0.0) => {
                Err(TransformError::InvalidTolerance(tolerance))
            }
            _ => Ok(()),
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::default_grid()
    }
}

/// Axis-aligned bounding box of an atom's support in signal coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

impl SupportBox {
    /// Whether `p` lies inside (boundary inclusive).
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        (self.x1_min..=self.x1_max).contains(&p.0) && (self.x2_min..=self.x2_max).contains(&p.1)
    }

    /// The box grown by `pad` on every side.
    pub fn inflated(&self, pad: f64) -> SupportBox {
        SupportBox {
            x1_min: self.x1_min - pad,
            x1_max: self.x1_max + pad,
            x2_min: self.x2_min - pad,
            x2_max: self.x2_max + pad,
        }
    }

    fn swapped(&self) -> SupportBox {
        SupportBox {
            x1_min: self.x2_min,
            x1_max: self.x2_max,
            x2_min: self.x1_min,
            x2_max: self.x1_max,
        }
    }
}

/// Hull of the shear polynomial `w ↦ s·w + b·w²` over `[−h, h]`.
fn shear_offset_range(s: f64, b: f64, h: f64) -> (f64, f64) {
    let at = |w: f64| s * w + b * w * w;
    let mut lo = at(-h).min(at(h));
    let mut hi = at(-h).max(at(h));
    if b != 0.0 {
        let vertex = -s / (2.0 * b);
        if vertex.abs() <= h {
            let v = at(vertex);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// A second-order atom with its cached geometry: parameters, support box
/// in signal coordinates, and the L²-preserving normalization factor.
#[derive(Debug, Clone)]
pub struct Atom<'g> {
    gen: &'g GeneratorPair,
    params: BendletParams,
    scale: AlphaScale,
    support: SupportBox,
    norm: f64,
}

impl<'g> Atom<'g> {
    /// Builds the atom, validating parameters and caching the support box.
    pub fn new(
        gen: &'g GeneratorPair,
        alpha: f64,
        params: BendletParams,
    ) -> Result<Self, TransformError> {
        let scale = AlphaScale::new(params.a, alpha)?;
        let a = scale.a();
        let aa = scale.a_pow_alpha();
        let swap = params.iota == Cone::Vertical;
        let t_eff = if swap { cone_swap(params.t) } else { params.t };
        let h = aa / 2.0;
        let (off_lo, off_hi) = shear_offset_range(params.s, params.b, h);
        let plus_box = SupportBox {
            x1_min: t_eff.0 - a / 2.0 + off_lo,
            x1_max: t_eff.0 + a / 2.0 + off_hi,
            x2_min: t_eff.1 - h,
            x2_max: t_eff.1 + h,
        };
        let support = if swap { plus_box.swapped() } else { plus_box };
        let norm = scale.det().sqrt().recip();
        Ok(Self {
            gen,
            params,
            scale,
            support,
            norm,
        })
    }

    /// The parameter point.
    pub fn params(&self) -> &BendletParams {
        &self.params
    }

    /// The anisotropy exponent.
    pub fn alpha(&self) -> f64 {
        self.scale.alpha()
    }

    /// The normalization factor `a^{−(1+α)/2}`.
    pub fn norm_factor(&self) -> f64 {
        self.norm
    }

    /// The cached support bounding box in signal coordinates.
    pub fn support_box(&self) -> SupportBox {
        self.support
    }

    /// Atom value at `x`; exactly 0.0 outside the cached support box.
    pub fn eval(&self, x: Point) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        let swap = self.params.iota == Cone::Vertical;
        let (xe, te) = if swap {
            (cone_swap(x), cone_swap(self.params.t))
        } else {
            (x, self.params.t)
        };
        let z2 = xe.1 - te.1;
        let y1 = (xe.0 - te.0 - self.params.s * z2 - self.params.b * z2 * z2) / self.scale.a();
        let y2 = z2 / self.scale.a_pow_alpha();
        self.norm * self.gen.eval((y1, y2))
    }

    /// L² norm of the atom by midpoint quadrature on the shear-following
    /// grid in signal coordinates. Exercises the full evaluation path, so
    /// it checks that the Jacobian really cancels the normalization.
    pub fn l2_norm_quadrature(&self, q: u32) -> f64 {
        let a = self.scale.a();
        let aa = self.scale.a_pow_alpha();
        let swap = self.params.iota == Cone::Vertical;
        let t_eff = if swap { cone_swap(self.params.t) } else { self.params.t };
        let n_cols = q as usize * self.gen.psi_support_units() as usize;
        let rows = (q as f64 * aa / a).ceil() as usize;
        let du = 1.0 / n_cols as f64;
        let dv = 1.0 / rows as f64;
        let mut acc = 0.0;
        for r in 0..rows {
            let v = -0.5 + (r as f64 + 0.5) * dv;
            let w = aa * v;
            let x2 = t_eff.1 + w;
            let row_origin = t_eff.0 + self.params.s * w + self.params.b * w * w;
            for i in 0..n_cols {
                let u = -0.5 + (i as f64 + 0.5) * du;
                let x1 = row_origin + a * u;
                let x = if swap { (x2, x1) } else { (x1, x2) };
                let val = self.eval(x);
                acc += val * val;
            }
        }
        (acc * a * aa * du * dv).sqrt()
    }
}

/// Atom value at a point (free-function form of [`Atom::eval`]).
#[inline]
pub fn atom_eval(at: &Atom<'_>, x: Point) -> f64 {
    at.eval(x)
}

/// Value of an atom of arbitrary shear order at `x`: the generator at the
/// representation argument, normalized by `det(A)^{−1/2} = a^{−(1+α)/2}`.
/// The vertical cone swaps both the query point and the translation.
pub fn atom_eval_higher(
    gen: &GeneratorPair,
    params: &HigherOrderParams,
    iota: Cone,
    x: Point,
) -> f64 {
    let (xe, te) = if iota == Cone::Vertical {
        (cone_swap(x), cone_swap(params.t))
    } else {
        (x, params.t)
    };
    let z2 = xe.1 - te.1;
    let y1 = (xe.0 - te.0 - params.shear.offset_at(z2)) / params.scale.a();
    let y2 = z2 / params.scale.a_pow_alpha();
    params.scale.det().sqrt().recip() * gen.eval((y1, y2))
}

/// Locates the signal transition inside `(lo, hi)` by bisection, given
/// that the signal value at `lo` is `lo_val` and differs at `hi`. Only
/// pointwise signal queries are used, so exact analytic membership (or
/// raster pixel lookup) drives the cut.
fn bisect_transition<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, lo_val: f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if f(mid) == lo_val {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Shared row machinery of both quadrature methods: the x₂-direction
/// integrand of a coefficient, exact in x₁.
///
/// At height `v ∈ [−1/2, 1/2]` the signal along the sheared row is
/// piecewise constant in the wavelet variable `u`, so its pairing with the
/// wavelet factor integrates exactly through the antiderivative between
/// transition points (located by a node scan plus bisection). What remains
/// for the caller is a one-dimensional integral over `v` — the scaled grid
/// takes midpoint rows, the adaptive method refines recursively.
struct RowIntegrator<'a> {
    gen: &'a GeneratorPair,
    sig: &'a Signal,
    a: f64,
    aa: f64,
    shear: &'a ShearParams,
    t_eff: Point,
    swap: bool,
    u_nodes: Vec<f64>,
    psi_total: f64,
    /// Scratch buffer of row samples, reused across rows.
    f_row: Vec<f64>,
}

impl<'a> RowIntegrator<'a> {
    /// `q` is the column oversampling: `q·(2M−1)` scan nodes across the
    /// wavelet support, so narrower stripes than `1/q` of an oscillation
    /// can slip past the transition scan.
    fn new(
        gen: &'a GeneratorPair,
        sig: &'a Signal,
        scale: &AlphaScale,
        shear: &'a ShearParams,
        t: Point,
        iota: Cone,
        q: u32,
    ) -> Self {
        let swap = iota == Cone::Vertical;
        let n_cols = q as usize * gen.psi_support_units() as usize;
        let du = 1.0 / n_cols as f64;
        let u_nodes: Vec<f64> = (0..n_cols).map(|i| -0.5 + (i as f64 + 0.5) * du).collect();
        // Interior smoothness check: the wavelet's node weights on any
        // full row cancel to rounding (row integrals go through the
        // cumulative instead, but the cancellation guards the tables).
        debug_assert!(u_nodes.iter().map(|&u| gen.psi1_eval(u)).sum::<f64>().abs() * du < 1e-12);
        RowIntegrator {
            gen,
            sig,
            a: scale.a(),
            aa: scale.a_pow_alpha(),
            shear,
            t_eff: if swap { cone_swap(t) } else { t },
            swap,
            u_nodes,
            psi_total: gen.psi1_integral(-0.5, 0.5),
            f_row: vec![0.0; n_cols],
        }
    }

    /// φ¹(v) · ∫ f(row at height v) ψ¹(u) du — zero outside the window
    /// support, exact in u for piecewise-constant rows.
    fn row_value(&mut self, v: f64) -> f64 {
        let phi = self.gen.phi1_eval(v);
        if phi == 0.0 {
            return 0.0;
        }
        let w = self.aa * v;
        let x2 = self.t_eff.1 + w;
        let row_origin = self.t_eff.0 + self.shear.offset_at(w);
        let (a, sig, swap) = (self.a, self.sig, self.swap);
        let sample = move |u: f64| {
            let x1 = row_origin + a * u;
            if swap {
                sig.membership((x2, x1))
            } else {
                sig.membership((x1, x2))
            }
        };
        for (slot, &u) in self.f_row.iter_mut().zip(&self.u_nodes) {
            *slot = sample(u);
        }
        let f_row = &self.f_row;
        let uniform = f_row.windows(2).all(|pair| pair[0] == pair[1]);
        let row_int = if uniform {
            f_row[0] * self.psi_total
        } else {
            // Stripe-exact integration: between transitions the signal is
            // constant along the row, so the wavelet factor integrates
            // through its cumulative between bisected cut points.
            let mut sum = 0.0;
            let mut stripe_start = -0.5;
            let mut stripe_val = f_row[0];
            for i in 0..f_row.len() - 1 {
                if f_row[i + 1] != f_row[i] {
                    let cut =
                        bisect_transition(&sample, self.u_nodes[i], self.u_nodes[i + 1], f_row[i]);
                    sum += stripe_val * self.gen.psi1_integral(stripe_start, cut);
                    stripe_start = cut;
                    stripe_val = f_row[i + 1];
                }
            }
            sum + stripe_val * self.gen.psi1_integral(stripe_start, 0.5)
        };
        phi * row_int
    }
}

/// Scaled-grid coefficient for an arbitrary-order shear. See the module
/// docs for the scheme.
fn grid_coefficient(
    gen: &GeneratorPair,
    sig: &Signal,
    scale: &AlphaScale,
    shear: &ShearParams,
    t: Point,
    iota: Cone,
    q: u32,
) -> f64 {
    let a = scale.a();
    let aa = scale.a_pow_alpha();
    let rows = (q as f64 * aa / a).ceil() as usize;
    let dv = 1.0 / rows as f64;
    let mut row = RowIntegrator::new(gen, sig, scale, shear, t, iota, q);
    let mut acc = 0.0;
    for r in 0..rows {
        let v = -0.5 + (r as f64 + 0.5) * dv;
        acc += row.row_value(v);
    }
    (a * aa).sqrt() * dv * acc
}

/// Errors if a raster signal cannot resolve atoms of width `a`, naming
/// the finest feasible dyadic scale index.
fn check_raster_resolution(sig: &Signal, a: f64) -> Result<(), TransformError> {
    if let Some(raster) = sig.raster_data() {
        let pixel_size = raster.pixel_size();
        if a < pixel_size {
            return Err(TransformError::ResolutionTooCoarse {
                a,
                pixel_size,
                max_feasible_j: (1.0 / pixel_size).log2().floor() as i32,
            });
        }
    }
    Ok(())
}

/// The transform coefficient ⟨f, ψ_{a,s,b,t,ι}⟩ of the second-order
/// system.
pub fn coefficient(
    gen: &GeneratorPair,
    alpha: f64,
    sig: &Signal,
    params: &BendletParams,
    quad: &QuadratureSpec,
) -> Result<f64, TransformError> {
    let higher = params.to_higher_order(alpha)?;
    coefficient_higher_order(gen, sig, &higher, params.iota, quad)
}

/// The transform coefficient for an arbitrary-order shear vector.
pub fn coefficient_higher_order(
    gen: &GeneratorPair,
    sig: &Signal,
    params: &HigherOrderParams,
    iota: Cone,
    quad: &QuadratureSpec,
) -> Result<f64, TransformError> {
    quad.validate()?;
    check_raster_resolution(sig, params.scale.a())?;
    Ok(match *quad {
        QuadratureSpec::ScaledGrid { q } => {
            grid_coefficient(gen, sig, &params.scale, &params.shear, params.t, iota, q)
        }
        QuadratureSpec::Adaptive { tolerance } => adaptive::adaptive_coefficient(
            gen,
            sig,
            &params.scale,
            &params.shear,
            params.t,
            iota,
            tolerance,
        ),
    })
}

/// One scale of a decay curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSample {
    /// Dyadic scale index (`a = 2^{−j}`).
    pub j: u32,
    /// The scale itself.
    pub a: f64,
    /// Signed coefficient as computed (kept for exact-zero checks).
    pub raw: f64,
    /// `|raw|`, floored at [`MAGNITUDE_FLOOR`] for log-log fitting.
    pub magnitude: f64,
    /// Whether the floor was applied.
    pub floored: bool,
}

/// Coefficient magnitudes along dyadic scales at fixed `(s, b, t, ι)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub alpha: f64,
    pub s: f64,
    pub b: f64,
    pub t: Point,
    pub iota: Cone,
    pub generator: GeneratorDescriptor,
    /// Samples ordered by increasing `j` (strictly decreasing scale).
    pub samples: Vec<ScaleSample>,
}

impl DecayCurve {
    /// The scales `a_j`, strictly decreasing.
    pub fn scales(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.a).collect()
    }

    /// The floored magnitudes, parallel to [`DecayCurve::scales`].
    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.magnitude).collect()
    }

    /// The finest-scale sample.
    pub fn finest(&self) -> &ScaleSample {
        self.samples.last().expect("curves contain at least two scales")
    }
}

/// Computes the decay curve at `a_j = 2^{−j}` for `j = j_min..=j_max`.
#[allow(clippy::too_many_arguments)]
pub fn decay_curve(
    gen: &GeneratorPair,
    alpha: f64,
    sig: &Signal,
    s: f64,
    b: f64,
    t: Point,
    iota: Cone,
    j_min: u32,
    j_max: u32,
    quad: &QuadratureSpec,
) -> Result<DecayCurve, TransformError> {
    if j_min >= j_max {
        return Err(TransformError::EmptyScaleRange { j_min, j_max });
    }
    let mut samples = Vec::with_capacity((j_max - j_min + 1) as usize);
    for j in j_min..=j_max {
        let a = 0.5f64.powi(j as i32);
        let params = BendletParams::new(a, s, b, t, iota)?;
        let raw = coefficient(gen, alpha, sig, &params, quad)?;
        let floored = raw.abs() < MAGNITUDE_FLOOR;
        samples.push(ScaleSample {
            j,
            a,
            raw,
            magnitude: if floored { MAGNITUDE_FLOOR } else { raw.abs() },
            floored,
        });
    }
    Ok(DecayCurve {
        alpha,
        s,
        b,
        t,
        iota,
        generator: gen.descriptor(),
        samples,
    })
}

/// Decay curves over the Cartesian `(s, b)` grid at a fixed point, one
/// curve per cell in row-major order (`s` outer, `b` inner).
///
/// Cells are evaluated in parallel; each cell owns its accumulators, so
/// the results are bitwise independent of the thread schedule.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    gen: &GeneratorPair,
    alpha: f64,
    sig: &Signal,
    t: Point,
    iota: Cone,
    s_grid: &[f64],
    b_grid: &[f64],
    j_min: u32,
    j_max: u32,
    quad: &QuadratureSpec,
) -> Result<Vec<DecayCurve>, TransformError> {
    if s_grid.is_empty() || b_grid.is_empty() {
        return Err(TransformError::EmptyGrid);
    }
    let cells: Vec<(f64, f64)> = s_grid
        .iter()
        .flat_map(|&s| b_grid.iter().map(move |&b| (s, b)))
        .collect();
    cells
        .par_iter()
        .map(|&(s, b)| decay_curve(gen, alpha, sig, s, b, t, iota, j_min, j_max, quad))
        .collect()
}

/// Verifies the exchange between pre-composition with the parabolic warp
/// `Q_p(x) = (x₁ − p·x₂², x₂)` and a parameter shift, for 0-scaled atoms:
/// the unsheared-bending atom at `(a, s, 0, t)` composed with `Q_p`
/// equals the atom at `(a, s + 2pt₂, p, (t₁ + pt₂², t₂))`. Returns the
/// maximum absolute deviation over `samples` seeded random points spread
/// over (and slightly beyond) the atom support.
pub fn qp_shear_identity_check(
    gen: &GeneratorPair,
    p: f64,
    a: f64,
    s: f64,
    t: Point,
    samples: u32,
    seed: u64,
) -> Result<f64, TransformError> {
    use rand::{Rng, SeedableRng};
    let left = HigherOrderParams::new(a, 0.0, vec![s, 0.0], t)?;
    let shifted_s = s + 2.0 * p * t.1;
    let shifted_t = (t.0 + p * t.1 * t.1, t.1);
    let right = HigherOrderParams::new(a, 0.0, vec![shifted_s, p], shifted_t)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    for _ in 0..samples.max(1) {
        let y1: f64 = rng.random_range(-0.6..0.6);
        let y2: f64 = rng.random_range(-0.6..0.6);
        // Place x through the shifted atom's frame (α = 0 ⟹ a^α = 1) so
        // the sample cloud covers the support and a margin around it.
        let x2 = shifted_t.1 + y2;
        let x1 = shifted_t.0 + shifted_s * y2 + p * y2 * y2 + a * y1;
        let x = (x1, x2);
        let warped = (x.0 - p * x.1 * x.1, x.1);
        let lhs = atom_eval_higher(gen, &left, Cone::Horizontal, warped);
        let rhs = atom_eval_higher(gen, &right, Cone::Horizontal, x);
        max_dev = max_dev.max((lhs - rhs).abs());
    }
    Ok(max_dev)
}

/// Writes decay curves as CSV with a schema tag line. One row per scale
/// per curve: `j,a,s,b,t1,t2,iota,magnitude,floored`.
pub fn write_decay_csv<W: std::io::Write>(
    curves: &[DecayCurve],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "# bendlab.decay.v1")?;
    writeln!(out, "j,a,s,b,t1,t2,iota,magnitude,floored")?;
    for curve in curves {
        for smp in &curve.samples {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                smp.j,
                smp.a,
                curve.s,
                curve.b,
                curve.t.0,
                curve.t.1,
                curve.iota.index(),
                smp.magnitude,
                smp.floored as u8,
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::AnalyticRegion;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    const ALPHA: f64 = 0.335;

    fn pair() -> GeneratorPair {
        GeneratorPair::default_pair()
    }

    fn half_plane(s_prime: f64, offset: Point) -> Signal {
        Signal::analytic(AnalyticRegion::HalfPlane { s_prime, offset })
    }

    fn disk(cx: f64, cy: f64, r: f64) -> Signal {
        Signal::analytic(AnalyticRegion::Disk {
            center: (cx, cy),
            radius: r,
        })
    }

    #[test]
    fn identity_parameters_reduce_to_generator() {
        let g = pair();
        let params = BendletParams::new(1.0, 0.0, 0.0, (0.0, 0.0), Cone::Horizontal).unwrap();
        let at = Atom::new(&g, 0.5, params).unwrap();
        for &x in &[(0.3, -0.2), (0.0, 0.0), (-0.49, 0.49), (0.7, 0.0)] {
            assert_eq!(at.eval(x), g.eval(x));
        }
    }

    #[test]
    fn vertical_atom_is_swapped_horizontal_atom() {
        let g = pair();
        let t = (0.3, -0.1);
        let v = Atom::new(
            &g,
            ALPHA,
            BendletParams::new(0.25, 0.4, -1.0, t, Cone::Vertical).unwrap(),
        )
        .unwrap();
        let h = Atom::new(
            &g,
            ALPHA,
            BendletParams::new(0.25, 0.4, -1.0, (t.1, t.0), Cone::Horizontal).unwrap(),
        )
        .unwrap();
        for &x in &[(0.31, -0.05), (-0.1, 0.35), (0.3, -0.1), (0.25, 0.0)] {
            assert_eq!(v.eval(x), h.eval((x.1, x.0)));
        }
    }

    #[test]
    fn atom_value_composes_scale_shear_and_normalization() {
        // a=1/4, α=1/2, s=0, b=−1/2, t=(1,0): the representation argument
        // of x=(0.9,0.2) is (−0.32, 0.4), and the prefactor is 4^{3/4}.
        let g = pair();
        let params = BendletParams::new(0.25, 0.0, -0.5, (1.0, 0.0), Cone::Horizontal).unwrap();
        let at = Atom::new(&g, 0.5, params).unwrap();
        let expect = 4.0f64.powf(0.75) * g.eval((-0.32, 0.4));
        assert_relative_eq!(at.eval((0.9, 0.2)), expect, epsilon = 1e-12);
    }

    #[test]
    fn higher_order_path_agrees_with_second_order_atom() {
        let g = pair();
        let params = BendletParams::new(0.125, -0.3, 2.0, (0.1, 0.2), Cone::Vertical).unwrap();
        let at = Atom::new(&g, ALPHA, params).unwrap();
        let higher = params.to_higher_order(ALPHA).unwrap();
        for &x in &[(0.1, 0.25), (0.12, 0.18), (0.3, 0.3)] {
            let direct = at.eval(x);
            let generic = atom_eval_higher(&g, &higher, Cone::Vertical, x);
            assert_relative_eq!(direct, generic, epsilon = 1e-12);
        }
    }

    #[test]
    fn atom_vanishes_outside_cached_support_box() {
        let g = pair();
        for iota in [Cone::Horizontal, Cone::Vertical] {
            let params = BendletParams::new(0.0625, 0.4, -1.5, (0.2, -0.1), iota).unwrap();
            let at = Atom::new(&g, ALPHA, params).unwrap();
            let outer = at.support_box().inflated(1e-9);
            let big = at.support_box().inflated(0.5);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
            let mut tested = 0;
            while tested < 10_000 {
                let x = (
                    rng.random_range(big.x1_min..big.x1_max),
                    rng.random_range(big.x2_min..big.x2_max),
                );
                if outer.contains(x) {
                    continue;
                }
                assert_eq!(at.eval(x), 0.0, "nonzero outside support at {x:?}");
                tested += 1;
            }
        }
    }

    #[test]
    fn atom_l2_norm_matches_generator_norm() {
        let g = pair();
        for iota in [Cone::Horizontal, Cone::Vertical] {
            for j in [0i32, 3, 6, 9] {
                let a = 0.5f64.powi(j);
                let params = BendletParams::new(a, 0.25, -0.8, (0.0, 0.0), iota).unwrap();
                let at = Atom::new(&g, ALPHA, params).unwrap();
                let norm = at.l2_norm_quadrature(DEFAULT_OVERSAMPLING);
                assert!(
                    (norm - 1.0).abs() < 0.01,
                    "isometry off at a=2^-{j}, {iota:?}: {norm}"
                );
            }
        }
    }

    #[test]
    fn constant_signal_is_annihilated() {
        let g = pair();
        // Region covering every atom support used here: membership ≡ 1.
        let sig = half_plane(0.0, (100.0, 0.0));
        let params = BendletParams::new(0.03125, 0.3, 1.0, (0.0, 0.0), Cone::Horizontal).unwrap();
        for quad in [QuadratureSpec::default_grid(), QuadratureSpec::default_adaptive()] {
            let c = coefficient(&g, ALPHA, &sig, &params, &quad).unwrap();
            assert!(c.abs() < 1e-8, "constant leaked through {quad:?}: {c:e}");
        }
    }

    #[test]
    fn signal_missing_the_support_gives_exact_zero() {
        let g = pair();
        // Edge at x₁ = 0, atom well to the right of it.
        let sig = half_plane(0.0, (0.0, 0.0));
        let params = BendletParams::new(0.0625, 0.3, 0.5, (0.2, 0.0), Cone::Horizontal).unwrap();
        for quad in [QuadratureSpec::default_grid(), QuadratureSpec::default_adaptive()] {
            let c = coefficient(&g, ALPHA, &sig, &params, &quad).unwrap();
            assert_eq!(c, 0.0, "support miss must be exact through {quad:?}");
        }
    }

    #[test]
    fn grid_and_adaptive_agree_on_disk_fixture() {
        let g = pair();
        let sig = disk(0.0, 0.0, 1.0);
        let params = BendletParams::new(
            0.5f64.powi(6),
            0.0,
            -0.5,
            (1.0, 0.0),
            Cone::Horizontal,
        )
        .unwrap();
        let grid = coefficient(&g, ALPHA, &sig, &params, &QuadratureSpec::default_grid()).unwrap();
        let adapt =
            coefficient(&g, ALPHA, &sig, &params, &QuadratureSpec::default_adaptive()).unwrap();
        assert!(grid.abs() > 1e-6, "expected a macroscopic coefficient");
        assert!(
            (grid - adapt).abs() / adapt.abs() < 1e-3,
            "grid {grid:e} vs adaptive {adapt:e}"
        );
    }

    #[test]
    fn matched_half_plane_ratios_follow_the_scaling_exponent() {
        let g = pair();
        let sig = half_plane(0.0, (0.0, 0.0));
        let curve = decay_curve(
            &g,
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
        let expect = 0.5f64.powf((1.0 + ALPHA) / 2.0);
        for pair in curve.samples.windows(2) {
            let ratio = pair[1].magnitude / pair[0].magnitude;
            assert_relative_eq!(ratio, expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn doubling_oversampling_barely_moves_disk_coefficients() {
        let g = pair();
        let sig = disk(0.0, 0.0, 0.25);
        for j in [5, 6, 7] {
            let params =
                BendletParams::new(0.5f64.powi(j), 0.0, -2.0, (0.25, 0.0), Cone::Horizontal)
                    .unwrap();
            let c16 =
                coefficient(&g, ALPHA, &sig, &params, &QuadratureSpec::ScaledGrid { q: 16 })
                    .unwrap();
            let c32 =
                coefficient(&g, ALPHA, &sig, &params, &QuadratureSpec::ScaledGrid { q: 32 })
                    .unwrap();
            assert!(
                ((c32 - c16) / c16).abs() < 1e-3,
                "q-refinement moved j={j}: {c16:e} -> {c32:e}"
            );
        }
    }

    #[test]
    fn swapped_signal_with_negated_cone_gives_same_coefficient() {
        let g = pair();
        let sig = disk(0.2, -0.1, 0.5);
        let swapped = sig.swapped().unwrap();
        let t = (0.62, -0.2);
        let quad = QuadratureSpec::default_grid();
        let direct = coefficient(
            &g,
            ALPHA,
            &sig,
            &BendletParams::new(0.03125, 0.3, 0.7, t, Cone::Vertical).unwrap(),
            &quad,
        )
        .unwrap();
        let mirrored = coefficient(
            &g,
            ALPHA,
            &swapped,
            &BendletParams::new(0.03125, 0.3, 0.7, (t.1, t.0), Cone::Horizontal).unwrap(),
            &quad,
        )
        .unwrap();
        assert_relative_eq!(direct, mirrored, max_relative = 1e-12);
    }

    #[test]
    fn parabolic_warp_identity_holds_for_zero_scaled_atoms() {
        let g = pair();
        // p = 0 collapses both sides to the same parameters.
        let dev0 = qp_shear_identity_check(&g, 0.0, 0.25, 0.2, (0.3, 0.4), 100, 1).unwrap();
        assert_eq!(dev0, 0.0);
        let dev = qp_shear_identity_check(&g, 1.0, 0.0625, 0.2, (0.3, 0.4), 1000, 7).unwrap();
        assert!(dev < 1e-9, "warp identity deviation {dev:e}");
    }

    #[test]
    fn off_boundary_curve_floors_and_keeps_exact_zeros() {
        let g = pair();
        let sig = half_plane(0.0, (0.0, 0.0));
        let curve = decay_curve(
            &g,
            ALPHA,
            &sig,
            0.3,
            0.5,
            (0.2, 0.0),
            Cone::Horizontal,
            4,
            7,
            &QuadratureSpec::default_grid(),
        )
        .unwrap();
        let scales = curve.scales();
        assert!(scales.windows(2).all(|w| w[1] < w[0]));
        for smp in &curve.samples {
            assert_eq!(smp.raw, 0.0);
            assert!(smp.floored);
            assert_eq!(smp.magnitude, MAGNITUDE_FLOOR);
        }
    }

    #[test]
    fn sweep_is_schedule_independent_and_permutation_invariant() {
        let g = pair();
        let sig = disk(0.0, 0.0, 0.25);
        let t = (0.25, 0.0);
        let quad = QuadratureSpec::default_grid();
        let s_grid = [-0.4, 0.0, 0.4];
        let b_grid = [-2.0, 0.0];
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                sweep(&g, ALPHA, &sig, t, Cone::Horizontal, &s_grid, &b_grid, 4, 6, &quad).unwrap()
            })
        };
        let single = run(1);
        let multi = run(4);
        assert_eq!(single.len(), 6);
        for (a, b) in single.iter().zip(&multi) {
            for (sa, sb) in a.samples.iter().zip(&b.samples) {
                assert_eq!(sa.raw.to_bits(), sb.raw.to_bits());
            }
        }
        // Shuffled grid: same values per (s, b) cell.
        let shuffled = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap()
            .install(|| {
                sweep(
                    &g,
                    ALPHA,
                    &sig,
                    t,
                    Cone::Horizontal,
                    &[0.4, -0.4, 0.0],
                    &b_grid,
                    4,
                    6,
                    &quad,
                )
                .unwrap()
            });
        for curve in &shuffled {
            let twin = single
                .iter()
                .find(|c| c.s == curve.s && c.b == curve.b)
                .expect("same cells");
            for (sa, sb) in curve.samples.iter().zip(&twin.samples) {
                assert_eq!(sa.raw.to_bits(), sb.raw.to_bits());
            }
        }
    }

    #[test]
    fn matched_sweep_cell_dominates_at_the_finest_scale() {
        let g = pair();
        let sig = disk(0.0, 0.0, 0.25);
        let curves = sweep(
            &g,
            ALPHA,
            &sig,
            (0.25, 0.0),
            Cone::Horizontal,
            &[-0.5, 0.0, 0.5],
            &[-2.0, 0.0, 2.0],
            4,
            6,
            &QuadratureSpec::default_grid(),
        )
        .unwrap();
        let best = curves
            .iter()
            .max_by(|x, y| {
                x.finest()
                    .magnitude
                    .partial_cmp(&y.finest().magnitude)
                    .unwrap()
            })
            .unwrap();
        assert_eq!((best.s, best.b), (0.0, -2.0));
    }

    #[test]
    fn raster_signals_reject_scales_below_pixel_size() {
        let g = pair();
        let raster = crate::signals::rasterize(
            &AnalyticRegion::Disk {
                center: (0.0, 0.0),
                radius: 0.5,
            },
            64,
            crate::signals::DomainRect::unit(),
            false,
        )
        .unwrap();
        let sig = Signal::raster(raster);
        let quad = QuadratureSpec::default_grid();
        let fine = BendletParams::new(0.5f64.powi(6), 0.0, 0.0, (0.5, 0.0), Cone::Horizontal)
            .unwrap();
        match coefficient(&g, ALPHA, &sig, &fine, &quad) {
            Err(TransformError::ResolutionTooCoarse { max_feasible_j, .. }) => {
                assert_eq!(max_feasible_j, 5)
            }
            other => panic!("expected resolution error, got {other:?}"),
        }
        let ok = BendletParams::new(0.5f64.powi(5), 0.0, 0.0, (0.5, 0.0), Cone::Horizontal)
            .unwrap();
        coefficient(&g, ALPHA, &sig, &ok, &quad).unwrap();
    }

    #[test]
    fn knob_validation_rejects_degenerate_requests() {
        let g = pair();
        let sig = half_plane(0.0, (0.0, 0.0));
        assert!(matches!(
            decay_curve(
                &g,
                ALPHA,
                &sig,
                0.0,
                0.0,
                (0.0, 0.0),
                Cone::Horizontal,
                5,
                5,
                &QuadratureSpec::default_grid()
            ),
            Err(TransformError::EmptyScaleRange { .. })
        ));
        let params = BendletParams::new(0.5, 0.0, 0.0, (0.0, 0.0), Cone::Horizontal).unwrap();
        assert!(matches!(
            coefficient(&g, ALPHA, &sig, &params, &QuadratureSpec::ScaledGrid { q: 3 }),
            Err(TransformError::OversamplingTooSmall(3))
        ));
        assert!(matches!(
            coefficient(
                &g,
                ALPHA,
                &sig,
                &params,
                &QuadratureSpec::Adaptive { tolerance: -1.0 }
            ),
            Err(TransformError::InvalidTolerance(_))
        ));
        assert!(matches!(
            sweep(
                &g,
                ALPHA,
                &sig,
                (0.0, 0.0),
                Cone::Horizontal,
                &[],
                &[0.0],
                4,
                6,
                &QuadratureSpec::default_grid()
            ),
            Err(TransformError::EmptyGrid)
        ));
    }

    #[test]
    fn decay_csv_has_schema_tag_and_one_row_per_scale() {
        let g = pair();
        let sig = half_plane(0.0, (0.0, 0.0));
        let curve = decay_curve(
            &g,
            ALPHA,
            &sig,
            0.0,
            0.0,
            (0.0, 0.0),
            Cone::Horizontal,
            4,
            6,
            &QuadratureSpec::default_grid(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_decay_csv(std::slice::from_ref(&curve), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# bendlab.decay.v1");
        assert_eq!(lines[1], "j,a,s,b,t1,t2,iota,magnitude,floored");
        assert_eq!(lines.len(), 2 + 3);
        assert!(lines[2].starts_with("4,0.0625,0,0,0,0,1,"));
    }
}
