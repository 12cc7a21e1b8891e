//! Simulation laboratory for STIT tessellations restricted to a convex window.
//!
//! The crate builds everything on an exact rational geometry kernel
//! ([`geometry`]), so tessellation identities that hold in law can also be
//! tested as exact equalities of rational polytopes. On top of the kernel:
//!
//! - [`measure`]: translation-invariant driving measures on hyperplanes
//!   (discrete directions, isotropic, one-dimensional Lebesgue) with exact
//!   hitting masses and hitting-distribution samplers,
//! - [`sim`]: the Markov jump-process construction of a STIT tessellation in
//!   a window (exponential cell lifetimes, measure-distributed splits),
//! - [`iteration`]: the iteration operation of tessellations and
//!   rescale-restrict plumbing,
//! - [`renorm`]: the renormalized discrete-time chain obtained by geometric
//!   time sampling and rescaling,
//! - [`field`] and [`factor`]: a counter-based randomness field, the
//!   finitary factor-map recursion driven by it, coalescence certificates and
//!   a coupling-from-the-past sampler,
//! - [`verify`]: Monte Carlo verification suites with machine-readable
//!   reports,
//! - [`io`] and [`render`]: file formats (JSON tessellations, event logs,
//!   reports, configs) and deterministic SVG rendering.
//!
//! Randomness discipline: every random quantity is derived from a master
//! seed through named, counter-based streams (see [`rng`]), so identical
//! configurations and seeds reproduce identical artifacts byte for byte.
//!
//! The `examples/` directory contains one runnable example per major
//! capability; the thin `stitlab` binary exposes the same capabilities as
//! `simulate`, `chain`, `cftp`, `verify` and `render` subcommands.

pub mod factor;
pub mod field;
pub mod geometry;
pub mod io;
pub mod iteration;
pub mod measure;
pub mod render;
pub mod renorm;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod tess;
pub mod verify;

pub use geometry::{CellKey, ConvexPolytope, Direction, Hyperplane, Window};
pub use measure::{DrivingMeasure, HittingMass};
pub use scalar::Scalar;
pub use tess::Tessellation;
