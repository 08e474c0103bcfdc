//! Period-doubling renormalization of strongly dissipative Henon-like maps.
//!
//! The crate is organized bottom-up:
//! - [`cheb`]: Chebyshev series on intervals and rectangles;
//! - [`unimodal`]: the 1D doubling operator and its fixed point;
//! - [`henon`]: the 2D renormalization step, towers and microscope charts;
//! - [`attractor`]: Cantor-set pieces, tip, average Jacobian, universal a(x);
//! - [`manifolds`]: stable/unstable manifold pieces and the saddle-region
//!   hierarchy;
//! - [`invariants`]: tangencies, kappa, j_k, widths, Morse-Smale checks;
//! - [`paramscan`]: locating the doubling cascade and bifurcation loci in
//!   parameter space.

pub mod attractor;
pub mod cheb;
pub mod error;
pub mod geom;
pub mod henon;
pub mod invariants;
pub mod manifolds;
pub mod par;
pub mod paramscan;
pub mod roots;
pub mod unimodal;

pub use error::{Error, Result};
