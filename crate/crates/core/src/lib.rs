//! Exact arithmetic for random iteration of piecewise-linear maps of the unit
//! interval: compositions and their variation, sufficient conditions for unique
//! ergodicity, finitely supported measures, and reference constructions.
#![no_std]

extern crate alloc;

pub mod certificates;
pub mod constructions;
pub mod error;
pub mod measures;
pub mod pwl;
pub mod rational;
pub mod sampling;
pub mod system;

pub use error::{Error, Result};
pub use pwl::{lower_envelope, upper_envelope, Interval, Preimages, PwlFunction, DEFAULT_BREAKPOINT_BUDGET};
pub use rational::{ParseRationalError, Rational};
pub use system::{BvReport, FunctionSystem, SampleOutcome, VariationTrace, Word};
pub use certificates::{
    check_corner_crossing, check_mu_injective, check_u_conditions, verify_tableaux, CoveringCertificate, CrossingKind,
    CrossingReport, CrossingWitness, IntervalCovering, MuInjectivityReport, TableauxViolation, UReport, ViolationReason,
};
pub use measures::{
    birkhoff_indicator_average, estimate_stationary, mass_ordering, mass_ordering_holds, stationarity_residual,
    support_diagnostics, wasserstein1, DiscreteMeasure, HistogramBin, MassDirection, MassOrderingResult,
    StationaryEstimate, SupportReport,
};
pub use constructions::{
    build_compensation, build_monotone_demo, build_tableaux_example, verify_compensation, CompensationPair,
    CompensationParams, CompensationReport, LevelData,
};
