//! Secrecy capacity of 1-2-1 atomic networks.
//!
//! A 1-2-1 atomic network is described by `h = [h_1, ..., h_Hv]`: subgraph
//! `i` offers `h_i` edge-disjoint source-destination paths that all pass
//! through one shared relay (its atom), and relays can only point one beam
//! in and one beam out per time slot. The source and destination can each
//! steer `M` beams. A passive eavesdropper taps `K` edges of its choice.
//!
//! The crate provides:
//!
//! * [`network`]: the `h`-vector model, its explicit graph, and the 1-2-1
//!   activation check.
//! * [`packing`]: how many groups of `ell` vertex-disjoint paths can be
//!   formed, computed three independent ways, and the per-round schedule.
//! * [`bounds`]: achievable-rate and converse bounds as exact fractions.
//! * [`coding`] and [`field`]: Vandermonde MDS keys over GF(p) or GF(2^8).
//! * [`scheme`]: an executable transmission with an exhaustive eavesdropper
//!   that measures leakage exactly by rank.

pub mod bounds;
pub mod coding;
pub mod error;
pub mod field;
mod flow;
pub mod matrix;
pub mod network;
pub mod packing;
pub mod rate;
pub mod scheme;

pub use bounds::{bounds_baseline, bounds_report, capacity_if_matched, rate_lower, rate_upper, BoundsReport};
pub use error::{Error, Result};
pub use field::Field;
pub use network::{expand, AtomicNetworkSpec, EdgeId, ExpandedGraph, PathId};
pub use packing::{build_schedule, RoundSchedule};
pub use rate::Rate;
pub use scheme::{adversary_sweep, run_scheme, SchemeParams, SweepMode, Transcript};
