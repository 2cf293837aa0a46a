//! Simulation and numerical verification toolkit for vertex-reinforced
//! jump processes (VRJP), linearly edge-reinforced random walks (ERRW),
//! and the random Schrödinger operator whose multivariate
//! inverse-Gaussian potential mixes them.
//!
//! The crate is organized around the pipeline
//!
//! 1. [`graph`] — finite weighted graphs, lattice boxes, wired boundary;
//! 2. [`potential`] — the random potential: density, exact sequential
//!    sampler, closed-form Laplace/Ward oracles;
//! 3. [`green`] — the operator `2[β] − Δ_W`, its inverse, random-walk
//!    expansion, conductances, recurrence diagnostics;
//! 4. [`process`] — VRJP/ERRW simulation, the quadratic time change,
//!    quenched jump processes, exact trajectory densities;
//! 5. [`estimators`] — fractional-moment Monte Carlo, decay fits,
//!    recurrence thresholds, path-distribution tests;
//! 6. [`localization`] — spectra, inverse participation ratios, the
//!    single-site conditional density and its edge regularity.
//!
//! All Monte Carlo is driven by explicit seeds with per-replica ChaCha
//! streams ([`rng`]); results are bit-identical across worker counts.

pub mod error;
pub mod estimators;
pub mod graph;
pub mod green;
pub mod localization;
pub mod potential;
pub mod process;
pub mod quad;
pub mod rng;
pub mod stats;
#[doc(hidden)]
pub mod testkit;

pub use error::{CoreError, Result};
pub use estimators::{DecayFit, EdgeWeightLaw, EstimateReport};
pub use graph::{build_box, scale_to_unit_theta, wire_box, BoxSpec, GraphDoc, WeightedGraph};
pub use green::{assemble_h, green, GreenMatrix, SchrodingerMatrix};
pub use localization::{SingleSiteDensity, SpectralReport};
pub use potential::{GigParams, LaplacePoint, PotentialSample};
pub use process::{StopRule, Trajectory};
