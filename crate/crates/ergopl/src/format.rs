//! JSON file formats. Every rational is written as a `"p/q"` string.
//!
//! System file:
//! ```json
//! { "maps": [ { "label": "g0", "points": [["0/1", "1/8"], ["1/1", "5/8"]] } ],
//!   "weights": ["1/1"] }
//! ```
//! Measure file: `[["1/4", "1/2"], ["3/4", "1/2"]]` (position, mass).
//! Covering file: `[["0/1", "1/2"], ["1/2", "1/1"]]` (lo, hi).

use std::fmt;
use std::fs;
use std::path::Path;

use ergopl_core::{DiscreteMeasure, FunctionSystem, Interval, IntervalCovering, PwlFunction, Rational};
use serde::de::{self, DeserializeOwned, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A rational carried through serde as its `"p/q"` text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RationalText;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational written as a \"p/q\" string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RationalText, E> {
                v.parse().map(RationalText).map_err(E::custom)
            }
        }
        d.deserialize_str(V)
    }
}

impl From<&Rational> for RationalText {
    fn from(r: &Rational) -> Self {
        RationalText(r.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    pub label: String,
    pub points: Vec<[RationalText; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub maps: Vec<MapEntry>,
    pub weights: Vec<RationalText>,
}

pub type PairList = Vec<[RationalText; 2]>;

/// Where and why an input file was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub source: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    /// JSON path of the offending field, e.g. `maps[1].points[2][0]`.
    pub path: Option<String>,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.source)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, ":{l}:{c}")?;
        }
        if let Some(p) = &self.path {
            write!(f, ": at `{p}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for FormatError {}

impl FormatError {
    fn semantic(source: &str, path: impl Into<String>, message: impl fmt::Display) -> Self {
        FormatError {
            source: source.to_string(),
            line: None,
            column: None,
            path: Some(path.into()),
            message: message.to_string(),
        }
    }
}

fn parse_json<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        FormatError {
            source: source.to_string(),
            line: Some(inner.line()),
            column: Some(inner.column()),
            path: (path != ".").then_some(path),
            message: inner.to_string(),
        }
    })?;
    Ok(value)
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| FormatError {
        source: path.display().to_string(),
        line: None,
        column: None,
        path: None,
        message: e.to_string(),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

impl SystemFile {
    pub fn from_system(system: &FunctionSystem) -> Self {
        SystemFile {
            maps: system
                .maps()
                .iter()
                .zip(system.labels())
                .map(|(g, label)| MapEntry {
                    label: label.clone(),
                    points: g.points().map(|(x, y)| [x.into(), y.into()]).collect(),
                })
                .collect(),
            weights: system.weights().iter().map(RationalText::from).collect(),
        }
    }

    pub fn to_system(&self, source: &str) -> Result<FunctionSystem, FormatError> {
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| {
                PwlFunction::from_points(m.points.iter().map(|[x, y]| (x.0.clone(), y.0.clone())))
                    .map_err(|e| FormatError::semantic(source, format!("maps[{i}].points"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labels = self.maps.iter().map(|m| m.label.clone()).collect();
        let weights = self.weights.iter().map(|w| w.0.clone()).collect();
        FunctionSystem::new(maps, weights, labels).map_err(|e| FormatError::semantic(source, "weights", e))
    }
}

pub fn parse_system(text: &str, source: &str) -> Result<FunctionSystem, FormatError> {
    parse_json::<SystemFile>(text, source)?.to_system(source)
}

pub fn read_system(path: &Path) -> Result<FunctionSystem, FormatError> {
    parse_system(&read_text(path)?, &path.display().to_string())
}

pub fn system_to_json(system: &FunctionSystem) -> String {
    to_json(&SystemFile::from_system(system))
}

pub fn parse_measure(text: &str, source: &str) -> Result<DiscreteMeasure, FormatError> {
    let pairs: PairList = parse_json(text, source)?;
    let atoms = pairs.into_iter().map(|[p, m]| (p.0, m.0)).collect();
    DiscreteMeasure::from_weighted_atoms(atoms).map_err(|e| FormatError::semantic(source, ".", e))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, FormatError> {
    parse_measure(&read_text(path)?, &path.display().to_string())
}

pub fn measure_to_json(measure: &DiscreteMeasure) -> String {
    let pairs: PairList = measure.atoms().map(|(p, m)| [p.into(), m.into()]).collect();
    to_json(&pairs)
}

pub fn parse_covering(text: &str, source: &str) -> Result<IntervalCovering, FormatError> {
    let pairs: PairList = parse_json(text, source)?;
    let intervals = pairs
        .into_iter()
        .enumerate()
        .map(|(i, [lo, hi])| Interval::new(lo.0, hi.0).map_err(|e| FormatError::semantic(source, format!("[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    IntervalCovering::new(intervals).map_err(|e| FormatError::semantic(source, ".", e))
}

pub fn read_covering(path: &Path) -> Result<IntervalCovering, FormatError> {
    parse_covering(&read_text(path)?, &path.display().to_string())
}

pub fn covering_to_json(covering: &IntervalCovering) -> String {
    let pairs: PairList = covering
        .intervals()
        .iter()
        .map(|iv| [iv.lo().into(), iv.hi().into()])
        .collect();
    to_json(&pairs)
}

/// Histogram rows `bin_lo,bin_hi,mass` as decimals.
pub fn histogram_csv(measure: &DiscreteMeasure, bins: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_lo", "bin_hi", "mass"]).expect("in-memory write");
    for b in measure.histogram(bins) {
        w.write_record([b.lo.to_f64().to_string(), b.hi.to_f64().to_string(), b.mass.to_f64().to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergopl_core::build_monotone_demo;

    #[test]
    fn system_round_trip_is_byte_exact() {
        let json = system_to_json(&build_monotone_demo());
        let back = parse_system(&json, "demo").unwrap();
        assert_eq!(back, build_monotone_demo());
        assert_eq!(system_to_json(&back), json);
        assert!(json.contains("\"1/8\""));
    }

    #[test]
    fn decimals_are_rejected_with_a_path() {
        let text = r#"{"maps": [{"label": "g", "points": [["0", "0"], ["1", 0.5]]}], "weights": ["1"]}"#;
        let err = parse_system(text, "bad.json").unwrap_err();
        assert_eq!(err.path.as_deref(), Some("maps[0].points[1][1]"));
        assert_eq!(err.line, Some(1));
        assert!(err.message.contains("p/q"), "{err}");

        let text = r#"{"maps": [{"label": "g", "points": [["0", "0"], ["1", "0.5"]]}], "weights": ["1"]}"#;
        let err = parse_system(text, "bad.json").unwrap_err();
        assert_eq!(err.path.as_deref(), Some("maps[0].points[1][1]"));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = r#"{"maps": [{"label": "g", "points": [["0", "0"], ["1/2", "3/2"], ["1", "0"]]}], "weights": ["1"]}"#;
        let err = parse_system(text, "s").unwrap_err();
        assert_eq!(err.path.as_deref(), Some("maps[0].points"));
        let text = r#"{"maps": [{"label": "g", "points": [["0", "0"], ["1", "1"]]}], "weights": ["1/2"]}"#;
        assert_eq!(parse_system(text, "s").unwrap_err().path.as_deref(), Some("weights"));
        let text = r#"{"maps": [], "weights": [], "extra": 1}"#;
        assert!(parse_system(text, "s").unwrap_err().message.contains("extra"));
    }

    #[test]
    fn measures_and_coverings() {
        let m = parse_measure(r#"[["3/4", "1/2"], ["1/4", "1/2"]]"#, "m").unwrap();
        assert_eq!(m.positions()[0], "1/4".parse().unwrap());
        assert_eq!(parse_measure(&measure_to_json(&m), "m").unwrap(), m);
        assert!(parse_measure(r#"[["1/4", "1/3"]]"#, "m").is_err());
        let c = parse_covering(r#"[["0", "1/2"], ["1/2", "1"]]"#, "c").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(parse_covering(&covering_to_json(&c), "c").unwrap(), c);
        assert_eq!(parse_covering(r#"[["0", "1/2"], ["3/4", "1/2"]]"#, "c").unwrap_err().path.as_deref(), Some("[1]"));
    }

    #[test]
    fn histogram_has_header_and_rows() {
        let m = parse_measure(r#"[["1/4", "1/2"], ["3/4", "1/2"]]"#, "m").unwrap();
        let csv = histogram_csv(&m, 2);
        assert_eq!(csv, "bin_lo,bin_hi,mass\n0,0.5,0.5\n0.5,1,0.5\n");
    }
}
