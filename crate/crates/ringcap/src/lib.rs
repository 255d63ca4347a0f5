//! Quantitative bounds for ring condensers under integral constraints.
//!
//! The crate computes, cross-checks and exports the objects that make a
//! distortion-controlled mapping class quantitative:
//!
//! * spherical means `q(t)` of a nonnegative dilatation field `Q`, the radial
//!   ring integral `I` built from them, and the modulus/capacity upper bound
//!   `omega / I^(p-1)` ([`radial`]);
//! * uniform lower bounds on `I` over every field satisfying an Orlicz mass
//!   constraint, and the radius below which the bound exceeds a target
//!   ([`orlicz`]);
//! * exact and discrete condenser p-capacities, plus the classical volume
//!   (Maz'ya) and diameter (Kruglikov) lower bounds, serving as independent
//!   oracles ([`capacity`]);
//! * equicontinuity certificates composed from the above: capacity-decay
//!   curves and explicit modulus-of-continuity curves ([`certify`]);
//! * a scenario runner that executes named tasks from a config file and
//!   writes deterministic delimited-text outputs ([`scenario`]).
//!
//! Field variants (`constant`, `radial-power`, `log-power`, `grid`) and gauge
//! variants (`exp`, `power-exp`, `power`, `tabulated`) live behind the
//! [`fields::Field`] and [`gauges::Gauge`] traits and are constructed by name
//! through small registries, so scenarios select them at runtime.

pub mod capacity;
pub mod certify;
pub mod chordal;
pub mod dims;
pub mod error;
pub mod extended;
pub mod fields;
pub mod gauges;
pub mod geom;
pub mod mass;
pub mod orlicz;
pub mod quad;
pub mod radial;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use extended::{ext_div, ExtendedNonneg};
