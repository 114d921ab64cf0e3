//! Numerical core of the bendlet transform: second-order (and general l-th
//! order) α-shearlet systems with compactly supported separable generators,
//! coefficient evaluation by quadrature, decay-curve sweeps over scale
//! ladders, and decay-rate analysis that classifies points of
//! piecewise-constant images by location, orientation, and curvature.
//!
//! The crate is organized along the data flow of an experiment:
//!
//! * [`geometry`] — the exact coordinate operators: anisotropic α-scaling,
//!   l-th order shearing (shear + bending for l = 2), the representation
//!   argument map, and the cone swap.
//! * [`generators`] — construction of the separable generator ψ = ψ¹ ⊗ φ¹
//!   from a Daubechies wavelet and a B-spline window, with verified
//!   vanishing moments and smoothness metadata.
//! * [`signals`] — piecewise-constant test signals with analytically known
//!   boundaries, boundary point typing, rasterization, and PGM ingestion.
//! * [`transform`] — atom evaluation and coefficient computation
//!   ⟨f, ψ_{a,s,b,t,ι}⟩ by scaled-grid or adaptive quadrature, decay curves
//!   over dyadic scale ladders, and deterministic parallel parameter sweeps.
//! * [`analysis`] — least-squares decay-rate fitting, the theoretical rate
//!   table, point classification, and curvature extraction.
//!
//! All value types are immutable and cheap to clone; every evaluation path
//! is pure, so the same objects can serve any number of threads without
//! synchronization.

pub mod analysis;
pub mod generators;
pub mod geometry;
pub mod signals;
pub mod transform;
