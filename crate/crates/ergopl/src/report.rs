//! JSON reports printed by the command-line tool. Every report is an object
//! with `schema_version` and `report` (its kind) followed by kind-specific
//! fields; rationals are `"p/q"` strings and floats are only used for
//! estimated fractions and masses.

use std::collections::BTreeMap;

use ergopl_core::{
    BvReport, CompensationReport, CoveringCertificate, CrossingKind, CrossingReport, FunctionSystem,
    MassDirection, MassOrderingResult, MuInjectivityReport, Rational, StationaryEstimate, SupportReport,
    TableauxViolation, UReport, ViolationReason,
};
use serde::Serialize;

use crate::format::RationalText;

pub const SCHEMA_VERSION: u32 = 1;

type Q = RationalText;

fn q(r: &Rational) -> Q {
    RationalText(r.clone())
}

fn pair(lo: &Rational, hi: &Rational) -> [Q; 2] {
    [q(lo), q(hi)]
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub report: &'static str,
    #[serde(flatten)]
    pub body: T,
}

pub fn render<T: Serialize>(kind: &'static str, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Report {
        schema_version: SCHEMA_VERSION,
        report: kind,
        body,
    })
    .expect("serializable report");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct MapSummary {
    pub label: String,
    pub weight: Q,
    pub breakpoints: usize,
    pub variation: Q,
    pub lipschitz: Q,
    pub monotone: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidateBody {
    pub valid: bool,
    pub maps: Vec<MapSummary>,
}

impl ValidateBody {
    pub fn new(system: &FunctionSystem) -> Self {
        ValidateBody {
            valid: true,
            maps: system
                .maps()
                .iter()
                .zip(system.labels())
                .zip(system.weights())
                .map(|((g, label), w)| MapSummary {
                    label: label.clone(),
                    weight: q(w),
                    breakpoints: g.num_breakpoints(),
                    variation: q(&g.variation()),
                    lipschitz: q(&g.lipschitz_constant()),
                    monotone: g.is_monotone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BvBody {
    pub threshold: Q,
    pub horizon: usize,
    pub sample_count: usize,
    pub below_count: usize,
    pub fraction_below: f64,
    pub max_observed_sup: Option<Q>,
    pub budget_exceeded: usize,
    pub seed: u64,
}

impl From<&BvReport> for BvBody {
    fn from(r: &BvReport) -> Self {
        BvBody {
            threshold: q(&r.threshold),
            horizon: r.horizon,
            sample_count: r.sample_count,
            below_count: r.below_count,
            fraction_below: r.fraction_below,
            max_observed_sup: r.max_observed_sup.as_ref().map(q),
            budget_exceeded: r.budget_exceeded,
            seed: r.seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ViolationBody {
    pub map: String,
    pub interval: [Q; 2],
    pub reason: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turning_point: Option<Q>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<[Q; 2]>,
}

#[derive(Debug, Serialize)]
pub struct TableauxBody {
    pub holds: bool,
    pub covering: Vec<[Q; 2]>,
    /// Map label to `φ_g` as a list of receiving-interval indices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<BTreeMap<String, Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variation_bound: Option<Q>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationBody>,
}

impl TableauxBody {
    pub fn new(
        system: &FunctionSystem,
        covering: &ergopl_core::IntervalCovering,
        outcome: &Result<CoveringCertificate, TableauxViolation>,
    ) -> Self {
        let intervals = covering.intervals();
        let cover = intervals.iter().map(|iv| pair(iv.lo(), iv.hi())).collect();
        match outcome {
            Ok(cert) => TableauxBody {
                holds: true,
                covering: cover,
                phi: Some(system.labels().iter().cloned().zip(cert.phi.iter().cloned()).collect()),
                variation_bound: Some(q(&cert.variation_bound)),
                violation: None,
            },
            Err(v) => {
                let iv = &intervals[v.interval];
                let (reason, turning_point, image) = match &v.reason {
                    ViolationReason::NonMonotone { turning_point } => ("non-monotone", Some(q(turning_point)), None),
                    ViolationReason::ImageNotContained { image } => {
                        ("image-not-contained", None, Some(pair(image.lo(), image.hi())))
                    }
                    ViolationReason::Malformed => ("malformed", None, None),
                };
                TableauxBody {
                    holds: false,
                    covering: cover,
                    phi: None,
                    variation_bound: None,
                    violation: Some(ViolationBody {
                        map: system.labels()[v.map].clone(),
                        interval: pair(iv.lo(), iv.hi()),
                        reason,
                        turning_point,
                        image,
                    }),
                }
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CrossingWitnessBody {
    pub map: String,
    pub x: Q,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Q>,
}

#[derive(Debug, Serialize)]
pub struct CrossingBody {
    pub holds: bool,
    pub witness: Option<CrossingWitnessBody>,
}

impl CrossingBody {
    pub fn new(system: &FunctionSystem, r: &CrossingReport) -> Self {
        CrossingBody {
            holds: r.holds,
            witness: r.witness.as_ref().map(|w| {
                let (kind, boundary) = match &w.kind {
                    CrossingKind::NonMonotone => ("non-monotone", None),
                    CrossingKind::InteriorCrossing { boundary } => ("interior-crossing", Some(q(boundary))),
                };
                CrossingWitnessBody {
                    map: system.labels()[w.map].clone(),
                    x: q(&w.x),
                    kind,
                    boundary,
                }
            }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InjectiveBody {
    pub injective: bool,
    pub max_integral: Option<Q>,
    pub max_level: Option<Q>,
    pub generic_max_integral: Option<Q>,
    pub generic_max_level: Option<Q>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_segment: Option<FlatSegmentBody>,
}

#[derive(Debug, Serialize)]
pub struct FlatSegmentBody {
    pub map: String,
    pub interval: [Q; 2],
}

impl From<&MuInjectivityReport> for InjectiveBody {
    fn from(r: &MuInjectivityReport) -> Self {
        InjectiveBody {
            injective: r.injective,
            max_integral: Some(q(&r.max_integral)),
            max_level: Some(q(&r.max_level)),
            generic_max_integral: Some(q(&r.generic_max_integral)),
            generic_max_level: Some(q(&r.generic_max_level)),
            flat_segment: None,
        }
    }
}

impl InjectiveBody {
    pub fn flat(map: String, lo: &Rational, hi: &Rational) -> Self {
        InjectiveBody {
            injective: false,
            max_integral: None,
            max_level: None,
            generic_max_integral: None,
            generic_max_level: None,
            flat_segment: Some(FlatSegmentBody {
                map,
                interval: pair(lo, hi),
            }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct UBody {
    pub u1: bool,
    pub u2: bool,
    pub u1_witness: Option<Q>,
    pub u2_witness: Option<Q>,
}

impl From<&UReport> for UBody {
    fn from(r: &UReport) -> Self {
        UBody {
            u1: r.u1,
            u2: r.u2,
            u1_witness: r.u1_witness.as_ref().map(q),
            u2_witness: r.u2_witness.as_ref().map(q),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SupportBody {
    pub epsilon: Q,
    pub mass_near_zero: f64,
    pub mass_near_one: f64,
    pub atom_at_zero: f64,
    pub atom_at_one: f64,
}

impl From<&SupportReport> for SupportBody {
    fn from(r: &SupportReport) -> Self {
        SupportBody {
            epsilon: q(&r.epsilon),
            mass_near_zero: r.mass_near_zero.to_f64(),
            mass_near_one: r.mass_near_one.to_f64(),
            atom_at_zero: r.atom_at_zero.to_f64(),
            atom_at_one: r.atom_at_one.to_f64(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StationaryBody {
    pub x0: Q,
    pub burn_in: usize,
    pub samples: usize,
    pub seed: u64,
    pub atoms: usize,
    pub mean: f64,
    pub endpoint_mass_0: f64,
    pub endpoint_mass_1: f64,
    /// Wasserstein distance between the estimate and its one-step pushforward.
    pub stationarity_residual: f64,
    pub support: SupportBody,
}

impl StationaryBody {
    pub fn new(est: &StationaryEstimate, residual: &Rational, support: &SupportReport) -> Self {
        StationaryBody {
            x0: q(&est.x0),
            burn_in: est.burn_in,
            samples: est.samples,
            seed: est.seed,
            atoms: est.measure.len(),
            mean: est.measure.mean().to_f64(),
            endpoint_mass_0: est.endpoint_mass_0,
            endpoint_mass_1: est.endpoint_mass_1,
            stationarity_residual: residual.to_f64(),
            support: support.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WassersteinBody {
    pub distance: Q,
    pub distance_approx: f64,
}

#[derive(Debug, Serialize)]
pub struct MassOrderBody {
    pub a: Q,
    pub b: Q,
    pub direction: &'static str,
}

impl From<&MassOrderingResult> for MassOrderBody {
    fn from(r: &MassOrderingResult) -> Self {
        MassOrderBody {
            a: q(&r.a),
            b: q(&r.b),
            direction: match r.direction {
                MassDirection::FirstBelowSecond => "first-below-second",
                MassDirection::SecondBelowFirst => "second-below-first",
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LipschitzBody {
    pub constants: Vec<Q>,
    pub first_failure: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct CompensationBody {
    pub passed: bool,
    pub failures: Vec<String>,
    pub f1_below_diagonal_witness: Option<Q>,
    pub f2_above_diagonal_witness: Option<Q>,
    pub lipschitz: LipschitzBody,
    pub words: usize,
    pub word_length: usize,
    pub max_word_variation: Option<Q>,
    pub words_over_budget: usize,
    pub level_variations: Vec<Q>,
    pub negative_control: Option<LipschitzBody>,
}

impl From<&CompensationReport> for CompensationBody {
    fn from(r: &CompensationReport) -> Self {
        let lip = |c: &ergopl_core::constructions::LipschitzCheck| LipschitzBody {
            constants: c.constants.iter().map(q).collect(),
            first_failure: c.first_failure,
        };
        CompensationBody {
            passed: r.passed(),
            failures: r.failures(),
            f1_below_diagonal_witness: r.f1_below_diagonal.as_ref().map(q),
            f2_above_diagonal_witness: r.f2_above_diagonal.as_ref().map(q),
            lipschitz: lip(&r.lipschitz),
            words: r.words.words,
            word_length: r.words.word_length,
            max_word_variation: r.words.max_variation.as_ref().map(q),
            words_over_budget: r.words.budget_exceeded,
            level_variations: r.level_variations.iter().map(q).collect(),
            negative_control: r.negative_control.as_ref().map(lip),
        }
    }
}
