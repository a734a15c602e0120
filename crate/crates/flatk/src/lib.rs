//! Exact geometry on flat surfaces glued from rational polygons.
//!
//! The crate models half-translation surfaces (polygons with translation and
//! half-turn edge gluings), traces straight lines across charts, enumerates
//! saddle connections and cylinders, tightens combinatorial curves to flat
//! geodesics with a certified angle criterion, applies Dehn twists, evaluates
//! directional-foliation and Liouville pairings, and computes the asymmetric
//! stretch distance between two marked flat metrics.
//!
//! Everything geometric runs on exact rational arithmetic; floating point
//! appears only in reported lengths, angles, and quadrature sums.

pub mod complex;
pub mod corpus;
pub mod cylinder;
pub mod error;
pub mod exec;
pub mod intersect;
pub mod kdist;
pub mod num;
pub mod pairing;
pub mod saddle;
pub mod surface;
pub mod tighten;
pub mod trace;
pub mod twist;
pub mod word;

pub use error::{FlatError, Result};

/// Knobs shared by the geometric operations.
#[derive(Clone, Debug)]
pub struct Config {
    /// Comparison tolerance for derived floating quantities (lengths, angles).
    pub tol: f64,
    /// Upper bound on elementary search steps (developed triangles, march
    /// steps) before an operation gives up with `CapTooLarge`.
    pub work_budget: u64,
    /// Rays pass straight through marked (2π) vertices when set.
    pub continue_through_marked: bool,
    pub parallelism: exec::Parallelism,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: 1e-9,
            work_budget: 10_000_000,
            continue_through_marked: true,
            parallelism: exec::Parallelism::default(),
        }
    }
}
