//! Piecewise-constant test signals and boundary point typing.
//!
//! A [`Signal`] is the characteristic function of a region — either an
//! [`AnalyticRegion`] whose boundary is known in closed form (half-plane,
//! disk, polynomial graph, or a complement of one of those) or a
//! [`RasterSignal`] loaded from a PGM image. Analytic membership is an
//! exact inequality; raster membership is a nearest-pixel lookup, which
//! keeps the signal genuinely piecewise constant (bilinear smoothing would
//! change the decay behavior under study).
//!
//! [`boundary_type`] computes the local graph expansion `(s′, b′, ι′)` of
//! an analytic boundary at a given point: slope, half-curvature
//! coefficient, and the cone in which the expansion keeps `|s′| ≤ 1`.
//! Steep boundary points are automatically retyped into the other cone via
//! the exact transformation `s̃′ = 1/s′`, `b̃′ = −b′/s′³` of the inverted
//! graph.

mod pgm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Cone, Point};

pub use pgm::PgmFormat;

/// Tolerance on the region's defining function when checking that a point
/// lies on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Errors from signal construction, typing, and raster I/O.
#[derive(Debug, Error)]
pub enum SignalError {
    /// Radius (or another size parameter) must be positive.
    #[error("region size parameter must be positive and finite, got {0}")]
    InvalidSize(f64),
    /// Raster resolution below the minimum.
    #[error("raster resolution must be at least 2, got {0}")]
    InvalidResolution(usize),
    /// Domain rectangle has zero or negative extent.
    #[error("domain rectangle is degenerate: [{x_min}, {x_max}] x [{y_min}, {y_max}]")]
    DegenerateDomain {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Pixel array length disagrees with width × height.
    #[error("pixel array length {len} does not match {width} x {height}")]
    PixelCountMismatch {
        len: usize,
        width: usize,
        height: usize,
    },
    /// The queried point does not lie on the region boundary.
    #[error("point is not on the boundary (defining function residual {residual:e})")]
    NotOnBoundary { residual: f64 },
    /// Boundary typing requires an analytic region.
    #[error("operation requires an analytic region, but the signal is a raster")]
    NotAnalytic,
    /// The image file could not be found or opened.
    #[error("image file not found: {0}")]
    MissingFile(String),
    /// File exists but the PGM header is malformed.
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    /// File parses but uses an unsupported netpbm flavor or bit depth.
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    /// Underlying I/O failure other than missing file.
    #[error("image I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

/// An axis-aligned domain rectangle in signal coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl DomainRect {
    /// The default experiment domain `[−1, 1]²`.
    pub fn unit() -> Self {
        Self {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        }
    }

    /// Validates a nondegenerate rectangle.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, SignalError> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
            && x_min < x_max
            && y_min < y_max;
        if !ok {
            return Err(SignalError::DegenerateDomain {
                x_min,
                x_max,
                y_min,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    #[inline]
    pub fn contains(&self, x: Point) -> bool {
        (self.x_min..=self.x_max).contains(&x.0) && (self.y_min..=self.y_max).contains(&x.1)
    }
}

impl Default for DomainRect {
    fn default() -> Self {
        Self::unit()
    }
}

/// A region of the plane with analytically known boundary.
///
/// `GraphRegion` is the general local model: for `iota = Horizontal` the
/// region is `{x : x₁ ≤ g(x₂)}` with
/// `g(y) = p₁ + s′·(y−p₂) + b′·(y−p₂)² + Σᵢ hᵢ·(y−p₂)^{i+3}`,
/// and for `iota = Vertical` the roles of the axes swap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticRegion {
    /// `{x : x₁ ≤ offset₁ + s′·(x₂ − offset₂)}` — a straight edge with
    /// graph slope `s′` through `offset`.
    HalfPlane { s_prime: f64, offset: Point },
    /// A closed disk.
    Disk { center: Point, radius: f64 },
    /// Region below/left of a polynomial graph (see the type docs).
    GraphRegion {
        /// Boundary point the expansion is anchored at.
        p: Point,
        /// Slope of the graph at `p`.
        s_prime: f64,
        /// Half the second derivative of the graph at `p`.
        b_prime: f64,
        /// Higher-order coefficients: `higher[i]` multiplies `Δ^{i+3}`.
        #[serde(default)]
        higher: Vec<f64>,
        /// Which axis carries the graph.
        iota: Cone,
    },
    /// Complement of an inner region.
    Complement { inner: Box<AnalyticRegion> },
}

impl AnalyticRegion {
    /// Validates size parameters (finite, positive radius).
    pub fn validate(&self) -> Result<(), SignalError> {
        match self {
            AnalyticRegion::Disk { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(SignalError::InvalidSize(*radius));
                }
            }
            AnalyticRegion::Complement { inner } => inner.validate()?,
            _ => {}
        }
        Ok(())
    }

    /// Exact membership indicator: 1.0 inside (boundary included), 0.0
    /// outside.
    pub fn membership(&self, x: Point) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }

    fn contains(&self, x: Point) -> bool {
        match self {
            AnalyticRegion::HalfPlane { s_prime, offset } => {
                x.0 - offset.0 <= s_prime * (x.1 - offset.1)
            }
            AnalyticRegion::Disk { center, radius } => {
                let dx = x.0 - center.0;
                let dy = x.1 - center.1;
                dx * dx + dy * dy <= radius * radius
            }
            AnalyticRegion::GraphRegion {
                p,
                s_prime,
                b_prime,
                higher,
                iota,
            } => {
                let (graph_var, value_var, anchor_graph, anchor_value) = match iota {
                    Cone::Horizontal => (x.1, x.0, p.1, p.0),
                    Cone::Vertical => (x.0, x.1, p.0, p.1),
                };
                let d = graph_var - anchor_graph;
                let mut g = anchor_value + s_prime * d + b_prime * d * d;
                let mut dk = d * d * d;
                for &hi in higher {
                    g += hi * dk;
                    dk *= d;
                }
                value_var <= g
            }
            AnalyticRegion::Complement { inner } => !inner.contains(x),
        }
    }

    /// The same region under the coordinate swap `(x₁,x₂) ↦ (x₂,x₁)`:
    /// `membership(swapped, x) = membership(self, swap(x))` exactly.
    pub fn swapped(&self) -> AnalyticRegion {
        match self {
            AnalyticRegion::HalfPlane { s_prime, offset } => AnalyticRegion::GraphRegion {
                p: (offset.1, offset.0),
                s_prime: *s_prime,
                b_prime: 0.0,
                higher: Vec::new(),
                iota: Cone::Vertical,
            },
            AnalyticRegion::Disk { center, radius } => AnalyticRegion::Disk {
                center: (center.1, center.0),
                radius: *radius,
            },
            AnalyticRegion::GraphRegion {
                p,
                s_prime,
                b_prime,
                higher,
                iota,
            } => AnalyticRegion::GraphRegion {
                p: (p.1, p.0),
                s_prime: *s_prime,
                b_prime: *b_prime,
                higher: higher.clone(),
                iota: iota.flipped(),
            },
            AnalyticRegion::Complement { inner } => AnalyticRegion::Complement {
                inner: Box::new(inner.swapped()),
            },
        }
    }

    /// Signed defining-function residual at `x` (zero on the boundary).
    fn boundary_residual(&self, x: Point) -> f64 {
        match self {
            AnalyticRegion::HalfPlane { s_prime, offset } => {
                (x.0 - offset.0) - s_prime * (x.1 - offset.1)
            }
            AnalyticRegion::Disk { center, radius } => {
                let dx = x.0 - center.0;
                let dy = x.1 - center.1;
                (dx * dx + dy * dy).sqrt() - radius
            }
            AnalyticRegion::GraphRegion {
                p,
                s_prime,
                b_prime,
                higher,
                iota,
            } => {
                let (graph_var, value_var, anchor_graph, anchor_value) = match iota {
                    Cone::Horizontal => (x.1, x.0, p.1, p.0),
                    Cone::Vertical => (x.0, x.1, p.0, p.1),
                };
                let d = graph_var - anchor_graph;
                let mut g = anchor_value + s_prime * d + b_prime * d * d;
                let mut dk = d * d * d;
                for &hi in higher {
                    g += hi * dk;
                    dk *= d;
                }
                value_var - g
            }
            AnalyticRegion::Complement { inner } => inner.boundary_residual(x),
        }
    }
}

/// The local graph type `(s′, b′, ι′)` of a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointType {
    /// Graph slope at the point, `|s′| ≤ 1` by cone choice.
    pub s_prime: f64,
    /// Half the graph's second derivative (the "bending").
    pub b_prime: f64,
    /// Cone in which the expansion lives.
    pub iota: Cone,
}

impl PointType {
    /// Retypes into the other cone via the exact inverted-graph expansion
    /// `s̃′ = 1/s′`, `b̃′ = −b′/s′³`. Requires `s′ ≠ 0`.
    pub fn cone_flipped(&self) -> Option<PointType> {
        if self.s_prime == 0.0 {
            return None;
        }
        Some(PointType {
            s_prime: 1.0 / self.s_prime,
            b_prime: -self.b_prime / self.s_prime.powi(3),
            iota: self.iota.flipped(),
        })
    }

    /// Whether the point sits on the cone seam (`|s′| = 1`), where the
    /// typing convention picks the horizontal cone.
    pub fn on_cone_seam(&self) -> bool {
        (self.s_prime.abs() - 1.0).abs() < 1e-12
    }

    /// Normalizes into the cone with `|s′| ≤ 1`, flipping if necessary.
    fn into_cone_range(self) -> PointType {
        if self.s_prime.abs() <= 1.0 {
            self
        } else {
            self.cone_flipped()
                .expect("slope with |s'| > 1 is nonzero, so the flip exists")
        }
    }
}

/// A sampled raster signal on a domain rectangle.
///
/// Pixels are stored row-major with the first row at the *top* of the
/// domain (image convention). Values are arbitrary reals; files loaded
/// from PGM scale to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterSignal {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    domain: DomainRect,
}

impl RasterSignal {
    /// Wraps raw pixel data (row-major, top row first).
    pub fn new(
        width: usize,
        height: usize,
        pixels: Vec<f64>,
        domain: DomainRect,
    ) -> Result<Self, SignalError> {
        if width < 2 || height < 2 {
            return Err(SignalError::InvalidResolution(width.min(height)));
        }
        if pixels.len() != width * height {
            return Err(SignalError::PixelCountMismatch {
                len: pixels.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            domain,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn domain(&self) -> DomainRect {
        self.domain
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Pixel value at (row, col); row 0 is the top.
    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Side length of a pixel cell in signal coordinates (the larger of
    /// the two if the domain is not square).
    pub fn pixel_size(&self) -> f64 {
        let dx = self.domain.width() / self.width as f64;
        let dy = self.domain.height() / self.height as f64;
        dx.max(dy)
    }

    /// Nearest-pixel lookup: the value of the pixel cell containing `x`,
    /// or 0.0 outside the domain.
    pub fn membership(&self, x: Point) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        let fx = (x.0 - self.domain.x_min) / self.domain.width() * self.width as f64;
        let fy = (self.domain.y_max - x.1) / self.domain.height() * self.height as f64;
        let col = (fx.floor() as usize).min(self.width - 1);
        let row = (fy.floor() as usize).min(self.height - 1);
        self.pixel(row, col)
    }

    /// Multiplies every pixel by a constant (e.g. to test transform
    /// linearity).
    pub fn scaled(&self, c: f64) -> RasterSignal {
        RasterSignal {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|v| v * c).collect(),
            domain: self.domain,
        }
    }

    /// Writes the pixel grid as CSV (one row per image row, top first).
    pub fn to_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in 0..self.height {
            let mut line = String::new();
            for col in 0..self.width {
                if col > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", self.pixel(row, col)));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// A piecewise-constant signal: an analytic indicator or a raster, with an
/// optional constant gain (useful for linearity checks; `c·χ_D` has the
/// same boundary geometry as `χ_D`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    Analytic {
        region: AnalyticRegion,
        #[serde(default = "one")]
        gain: f64,
    },
    Raster {
        raster: RasterSignal,
        #[serde(default = "one")]
        gain: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Signal {
    /// Wraps an analytic region with unit gain.
    pub fn analytic(region: AnalyticRegion) -> Self {
        Signal::Analytic { region, gain: 1.0 }
    }

    /// Wraps a raster with unit gain.
    pub fn raster(raster: RasterSignal) -> Self {
        Signal::Raster { raster, gain: 1.0 }
    }

    /// The same signal with its values multiplied by `c`.
    pub fn with_gain(&self, c: f64) -> Self {
        match self {
            Signal::Analytic { region, gain } => Signal::Analytic {
                region: region.clone(),
                gain: gain * c,
            },
            Signal::Raster { raster, gain } => Signal::Raster {
                raster: raster.clone(),
                gain: gain * c,
            },
        }
    }

    /// Signal value at `x`.
    #[inline]
    pub fn membership(&self, x: Point) -> f64 {
        match self {
            Signal::Analytic { region, gain } => gain * region.membership(x),
            Signal::Raster { raster, gain } => gain * raster.membership(x),
        }
    }

    /// The analytic region, if this signal has one.
    pub fn region(&self) -> Option<&AnalyticRegion> {
        match self {
            Signal::Analytic { region, .. } => Some(region),
            Signal::Raster { .. } => None,
        }
    }

    /// The raster, if this signal is one.
    pub fn raster_data(&self) -> Option<&RasterSignal> {
        match self {
            Signal::Raster { raster, .. } => Some(raster),
            Signal::Analytic { .. } => None,
        }
    }

    /// The coordinate-swapped signal (analytic only):
    /// `membership(swapped, x) = membership(self, swap(x))`.
    pub fn swapped(&self) -> Result<Signal, SignalError> {
        match self {
            Signal::Analytic { region, gain } => Ok(Signal::Analytic {
                region: region.swapped(),
                gain: *gain,
            }),
            Signal::Raster { .. } => Err(SignalError::NotAnalytic),
        }
    }
}

/// Signal value at a point (free-function form of [`Signal::membership`]).
#[inline]
pub fn membership(sig: &Signal, x: Point) -> f64 {
    sig.membership(x)
}

/// The local graph type `(s′, b′, ι′)` of the analytic boundary at `p`.
///
/// `p` must satisfy the region's defining equation to within
/// [`BOUNDARY_TOLERANCE`]. The returned type always has `|s′| ≤ 1`: points
/// whose natural graph is steeper are retyped into the other cone via the
/// inverted expansion. Exactly diagonal points (`|s′| = 1`) stay in the
/// cone their region variant naturally parametrizes, and
/// [`PointType::on_cone_seam`] reports them.
pub fn boundary_type(sig: &Signal, p: Point) -> Result<PointType, SignalError> {
    let region = sig.region().ok_or(SignalError::NotAnalytic)?;
    boundary_type_of_region(region, p)
}

fn boundary_type_of_region(region: &AnalyticRegion, p: Point) -> Result<PointType, SignalError> {
    let residual = region.boundary_residual(p);
    if residual.abs() > BOUNDARY_TOLERANCE {
        return Err(SignalError::NotOnBoundary { residual });
    }
    let raw = match region {
        AnalyticRegion::HalfPlane { s_prime, .. } => PointType {
            s_prime: *s_prime,
            b_prime: 0.0,
            iota: Cone::Horizontal,
        },
        AnalyticRegion::Disk { center, radius } => {
            let dx = p.0 - center.0;
            let dy = p.1 - center.1;
            let r2 = radius * radius;
            if dx.abs() >= dy.abs() {
                // Horizontal graph x₁ = c₁ ± √(r² − (x₂−c₂)²):
                // slope −Δ₂/Δ₁, second derivative −sign(Δ₁)·r²/|Δ₁|³.
                PointType {
                    s_prime: -dy / dx,
                    b_prime: -dx.signum() * r2 / (2.0 * dx.abs().powi(3)),
                    iota: Cone::Horizontal,
                }
            } else {
                PointType {
                    s_prime: -dx / dy,
                    b_prime: -dy.signum() * r2 / (2.0 * dy.abs().powi(3)),
                    iota: Cone::Vertical,
                }
            }
        }
        AnalyticRegion::GraphRegion {
            p: anchor,
            s_prime,
            b_prime,
            higher,
            iota,
        } => {
            // Differentiate the polynomial graph at the queried point.
            let d = match iota {
                Cone::Horizontal => p.1 - anchor.1,
                Cone::Vertical => p.0 - anchor.0,
            };
            let mut g1 = s_prime + 2.0 * b_prime * d;
            let mut g2 = 2.0 * b_prime;
            let mut dk1 = d; // d^{i+1} at iteration i
            for (i, &hi) in higher.iter().enumerate() {
                let k = (i + 3) as f64;
                g2 += k * (k - 1.0) * hi * dk1;
                g1 += k * hi * dk1 * d;
                dk1 *= d;
            }
            PointType {
                s_prime: g1,
                b_prime: g2 / 2.0,
                iota: *iota,
            }
        }
        AnalyticRegion::Complement { inner } => {
            // The boundary curve (and its graph expansion) is the inner
            // region's; only the side the region lies on flips, which the
            // decay analysis is insensitive to.
            return boundary_type_of_region(inner, p);
        }
    };
    Ok(raw.into_cone_range())
}

/// Rasterizes an analytic region onto an n×n grid over `domain`: each
/// pixel holds the exact membership value at its center, or a 4×4
/// supersampled average when `supersample` is set.
pub fn rasterize(
    region: &AnalyticRegion,
    n: usize,
    domain: DomainRect,
    supersample: bool,
) -> Result<RasterSignal, SignalError> {
    if n < 2 {
        return Err(SignalError::InvalidResolution(n));
    }
    region.validate()?;
    let dx = domain.width() / n as f64;
    let dy = domain.height() / n as f64;
    let mut pixels = Vec::with_capacity(n * n);
    for row in 0..n {
        let yc = domain.y_max - (row as f64 + 0.5) * dy;
        for col in 0..n {
            let xc = domain.x_min + (col as f64 + 0.5) * dx;
            let v = if supersample {
                let mut acc = 0.0;
                for sy in 0..4 {
                    let y = yc + (sy as f64 - 1.5) / 4.0 * dy;
                    for sx in 0..4 {
                        let x = xc + (sx as f64 - 1.5) / 4.0 * dx;
                        acc += region.membership((x, y));
                    }
                }
                acc / 16.0
            } else {
                region.membership((xc, yc))
            };
            pixels.push(v);
        }
    }
    RasterSignal::new(n, n, pixels, domain)
}

/// Loads an 8-bit PGM (P2 or P5) file as a raster over `domain`, scaling
/// pixel values to [0, 1].
pub fn load_raster<P: AsRef<std::path::Path>>(
    path: P,
    domain: DomainRect,
) -> Result<RasterSignal, SignalError> {
    let path = path.as_ref();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(SignalError::MissingFile(path.display().to_string()));
        }
        Err(e) => return Err(SignalError::Io(e)),
    };
    let image = pgm::decode(&bytes)?;
    let pixels = image
        .samples
        .iter()
        .map(|&v| v as f64 / image.maxval as f64)
        .collect();
    RasterSignal::new(image.width, image.height, pixels, domain)
}

/// Saves a raster as an 8-bit PGM file. Values are clamped to [0, 1] and
/// quantized to 0..=255.
pub fn save_raster<P: AsRef<std::path::Path>>(
    raster: &RasterSignal,
    path: P,
    format: PgmFormat,
) -> Result<(), SignalError> {
    let samples: Vec<u8> = raster
        .pixels()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let bytes = pgm::encode(raster.width(), raster.height(), &samples, format);
    std::fs::write(path, bytes)?;
    Ok(())
}
