//! Canonical JSON reports: sorted keys, shortest round-trip floats, and a
//! fixed schema so reports are diffable golden files.

use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;

use crate::surface::{FaceRegularity, QuotientComplex, Surface, VertexFigureReport};

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub config: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotient: Option<QuotientSection>,
    pub checks: Vec<CheckEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSection {
    pub space: String,
    pub params: Vec<f64>,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSection {
    pub kind: String,
    pub generators: usize,
    pub elements: usize,
    pub depth: usize,
    pub truncated: bool,
    pub cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceSection {
    pub v: usize,
    pub e: usize,
    pub f: usize,
    pub closed: bool,
    pub orientable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientSection {
    pub v: i64,
    pub e: i64,
    pub f: i64,
    pub chi: i64,
    pub genus: i64,
    pub orientable: bool,
    pub valencies: BTreeMap<String, usize>,
}

impl SurfaceSection {
    pub fn from_surface(s: &Surface) -> Self {
        SurfaceSection {
            v: s.vertex_count(),
            e: s.edge_count(),
            f: s.face_count(),
            closed: s.is_closed(),
            orientable: s.orientable,
        }
    }
}

impl QuotientSection {
    pub fn from_quotient(q: &QuotientComplex) -> Self {
        QuotientSection {
            v: q.v,
            e: q.e,
            f: q.f,
            chi: q.euler,
            genus: q.genus,
            orientable: q.orientable,
            valencies: q.valencies.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

pub fn regularity_checks(faces: &FaceRegularity, figs: &VertexFigureReport) -> Vec<CheckEntry> {
    vec![
        CheckEntry {
            name: "face-edge-regularity".into(),
            pass: faces.max_edge_spread <= faces.tolerance,
            measured: faces.max_edge_spread,
            tolerance: faces.tolerance,
        },
        CheckEntry {
            name: "face-angle-regularity".into(),
            pass: faces.max_angle_spread <= faces.tolerance,
            measured: faces.max_angle_spread,
            tolerance: faces.tolerance,
        },
        CheckEntry {
            name: "single-edge-congruence-class".into(),
            pass: faces.cross_face_edge_spread <= faces.tolerance,
            measured: faces.cross_face_edge_spread,
            tolerance: faces.tolerance,
        },
        CheckEntry {
            name: "vertex-figure-invariant".into(),
            pass: figs.invariant_spread <= figs.tolerance,
            measured: figs.invariant_spread,
            tolerance: figs.tolerance,
        },
        CheckEntry {
            name: "vertex-figure-witness".into(),
            pass: figs.witness_pass,
            measured: figs.witness_defect,
            tolerance: figs.tolerance,
        },
    ]
}

/// Serialize with recursively sorted object keys (serde_json's BTreeMap map
/// representation already sorts; this guards any future map type change).
pub fn to_canonical_json(report: &Report) -> String {
    let v = serde_json::to_value(report).expect("report serializes");
    serde_json::to_string_pretty(&sort_value(v)).expect("canonical json")
}

fn sort_value(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut sorted = Map::new();
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            for (k, val) in entries {
                sorted.insert(k, sort_value(val));
            }
            Value::Object(sorted)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_value).collect()),
        other => other,
    }
}
