//! The JSON fan document and its canonical writer.
//!
//! ```json
//! {
//!   "color_table": {"a1": [0], "a2": [1], "a3": [-1]},
//!   "datum": {...},
//!   "format_version": 1,
//!   "lattice_rank": 1,
//!   "maximal_cones": [...],
//!   "mode": "horospherical",
//!   "rays": [...]
//! }
//! ```
//!
//! Integers are JSON numbers, or decimal strings when they do not fit in
//! 64 bits. Keys are written sorted, so [`FanDocument::to_json`] of a parsed
//! canonical document reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fan::{ColorId, ColoredCone, ColoredFan, ValidationReport, ValuationCone};
use crate::horo::{HorosphericalDatum, HorosphericalEmbedding};
use crate::linalg::IntVec;
use crate::roots::{DynkinDiagram, Weight};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Toric,
    Horospherical,
    SphericalValidateOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanDocument {
    pub mode: Mode,
    pub fan: ColoredFan,
    pub datum: Option<HorosphericalDatum>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Int(BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Int;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an integer or a decimal string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Int, E> {
                Ok(Int(v.into()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Int, E> {
                Ok(Int(v.into()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Int, E> {
                v.parse()
                    .map(Int)
                    .map_err(|_| E::custom(format!("bad integer {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    rays: Vec<usize>,
    #[serde(default)]
    colors: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    #[serde(default)]
    fundamental: BTreeMap<String, Int>,
    #[serde(default)]
    central: Vec<Int>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    diagram: String,
    parabolic: Vec<String>,
    #[serde(default)]
    central_rank: usize,
    m_basis: Vec<RawWeight>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: u32,
    mode: Mode,
    lattice_rank: usize,
    rays: Vec<Vec<Int>>,
    maximal_cones: Vec<RawCone>,
    color_table: BTreeMap<String, Vec<Int>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datum: Option<RawDatum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valuation_halfspaces: Option<Vec<Vec<Int>>>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn ints(v: &[Int]) -> IntVec {
    v.iter().map(|x| x.0.clone()).collect()
}

fn raw_ints(v: &[BigInt]) -> Vec<Int> {
    v.iter().cloned().map(Int).collect()
}

fn vector(v: &[Int], n: usize, path: String) -> Result<IntVec> {
    if v.len() != n {
        return Err(schema(
            path,
            format!("expected {n} entries, found {}", v.len()),
        ));
    }
    Ok(ints(v))
}

impl FanDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            match inner.classify() {
                serde_json::error::Category::Data => schema(path, inner.to_string()),
                _ => Error::Parse {
                    path,
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                },
            }
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawDocument) -> Result<Self> {
        if raw.format_version != FORMAT_VERSION {
            return Err(schema(
                "format_version",
                format!("unsupported version {}", raw.format_version),
            ));
        }
        let n = raw.lattice_rank;
        let mut rays: Vec<IntVec> = Vec::new();
        for (i, r) in raw.rays.iter().enumerate() {
            let v = vector(r, n, format!("rays[{i}]"))?;
            if let Some(j) = rays.iter().position(|x| *x == v) {
                return Err(schema(
                    format!("rays[{i}]"),
                    format!("duplicates rays[{j}]"),
                ));
            }
            rays.push(v);
        }
        let mut color_table = BTreeMap::new();
        for (c, v) in &raw.color_table {
            color_table.insert(
                ColorId::new(c.clone()),
                vector(v, n, format!("color_table.{c}"))?,
            );
        }
        let mut maximal_cones = Vec::new();
        for (i, c) in raw.maximal_cones.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for (k, &r) in c.rays.iter().enumerate() {
                if r >= rays.len() {
                    return Err(schema(
                        format!("maximal_cones[{i}].rays[{k}]"),
                        format!("no ray {r}"),
                    ));
                }
                if !seen.insert(r) {
                    return Err(schema(
                        format!("maximal_cones[{i}].rays[{k}]"),
                        format!("ray {r} repeated"),
                    ));
                }
            }
            maximal_cones.push(ColoredCone::new(
                c.rays.clone(),
                c.colors.iter().map(|s| ColorId::new(s.clone())),
            ));
        }
        let valuation_cone = match (&raw.valuation_halfspaces, raw.mode) {
            (None, _) => ValuationCone::FullSpace,
            (Some(h), Mode::SphericalValidateOnly) => ValuationCone::Halfspaces(
                h.iter()
                    .enumerate()
                    .map(|(i, v)| vector(v, n, format!("valuation_halfspaces[{i}]")))
                    .collect::<Result<_>>()?,
            ),
            (Some(_), _) => {
                return Err(schema(
                    "valuation_halfspaces",
                    "only spherical-validate-only documents carry a valuation cone",
                ))
            }
        };
        let datum = match (raw.datum, raw.mode) {
            (None, Mode::Horospherical) => {
                return Err(schema("datum", "horospherical documents need a datum"))
            }
            (Some(_), Mode::Toric) => {
                return Err(schema("datum", "toric documents carry no datum"))
            }
            (None, _) => None,
            (Some(d), _) => Some(Self::datum_from_raw(d, n)?),
        };
        Ok(FanDocument {
            mode: raw.mode,
            fan: ColoredFan {
                lattice_rank: n,
                rays,
                color_table,
                maximal_cones,
                valuation_cone,
            },
            datum,
        })
    }

    fn datum_from_raw(d: RawDatum, n: usize) -> Result<HorosphericalDatum> {
        let diagram =
            DynkinDiagram::parse(&d.diagram).map_err(|e| schema("datum.diagram", e.to_string()))?;
        if d.m_basis.len() != n {
            return Err(schema(
                "datum.m_basis",
                format!("expected {n} weights, found {}", d.m_basis.len()),
            ));
        }
        let mut m_basis = Vec::new();
        for (i, w) in d.m_basis.iter().enumerate() {
            for node in w.fundamental.keys() {
                if !diagram.contains(node) {
                    return Err(schema(
                        format!("datum.m_basis[{i}].fundamental.{node}"),
                        "unknown node",
                    ));
                }
            }
            let central = if w.central.is_empty() {
                vec![BigInt::default(); d.central_rank]
            } else {
                vector(
                    &w.central,
                    d.central_rank,
                    format!("datum.m_basis[{i}].central"),
                )?
            };
            let fundamental = w
                .fundamental
                .iter()
                .map(|(k, v)| (k.clone(), v.0.clone()))
                .collect();
            m_basis.push(Weight::new(fundamental, central));
        }
        for (i, node) in d.parabolic.iter().enumerate() {
            if !diagram.contains(node) {
                return Err(schema(
                    format!("datum.parabolic[{i}]"),
                    format!("unknown node {node}"),
                ));
            }
        }
        Ok(HorosphericalDatum {
            diagram,
            parabolic: d.parabolic.into_iter().collect(),
            central_rank: d.central_rank,
            m_basis,
        })
    }

    fn to_raw(&self) -> RawDocument {
        let f = &self.fan;
        RawDocument {
            format_version: FORMAT_VERSION,
            mode: self.mode,
            lattice_rank: f.lattice_rank,
            rays: f.rays.iter().map(|r| raw_ints(r)).collect(),
            maximal_cones: f
                .maximal_cones
                .iter()
                .map(|c| RawCone {
                    rays: c.rays.clone(),
                    colors: c.colors.iter().map(|x| x.0.clone()).collect(),
                })
                .collect(),
            color_table: f
                .color_table
                .iter()
                .map(|(c, v)| (c.0.clone(), raw_ints(v)))
                .collect(),
            datum: self.datum.as_ref().map(|d| RawDatum {
                diagram: d.diagram.to_string(),
                parabolic: d.parabolic.iter().cloned().collect(),
                central_rank: d.central_rank,
                m_basis: d
                    .m_basis
                    .iter()
                    .map(|w| RawWeight {
                        fundamental: w
                            .fundamental
                            .iter()
                            .map(|(k, v)| (k.clone(), Int(v.clone())))
                            .collect(),
                        central: raw_ints(&w.central),
                    })
                    .collect(),
            }),
            valuation_halfspaces: match &f.valuation_cone {
                ValuationCone::FullSpace => None,
                ValuationCone::Halfspaces(h) => Some(h.iter().map(|v| raw_ints(v)).collect()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self.to_raw()).expect("documents serialize");
        to_canonical_string(&v)
    }

    pub fn from_embedding(emb: &HorosphericalEmbedding) -> Self {
        let toric = emb.is_toric() && emb.datum == HorosphericalDatum::torus(emb.fan.lattice_rank);
        FanDocument {
            mode: if toric {
                Mode::Toric
            } else {
                Mode::Horospherical
            },
            fan: emb.fan.clone(),
            datum: (!toric).then(|| emb.datum.clone()),
        }
    }

    pub fn from_toric(fan: ColoredFan) -> Self {
        FanDocument {
            mode: Mode::Toric,
            fan,
            datum: None,
        }
    }

    pub fn embedding(&self) -> Result<HorosphericalEmbedding> {
        match (self.mode, &self.datum) {
            (Mode::SphericalValidateOnly, _) => Err(Error::ValuationConeMode),
            (_, Some(d)) => Ok(HorosphericalEmbedding {
                datum: d.clone(),
                fan: self.fan.clone(),
            }),
            (_, None) => Ok(HorosphericalEmbedding::toric(self.fan.clone())),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self.embedding() {
            Ok(e) => e.validate_embedding(),
            Err(_) => self.fan.validate(),
        }
    }
}

/// `{"num": "...", "den": "..."}` with decimal strings.
pub fn rational_json(q: &BigRational) -> Value {
    serde_json::json!({"num": q.numer().to_string(), "den": q.denom().to_string()})
}

/// Sorted keys, two-space indentation; short arrays and objects of scalars
/// stay on one line. Ends with a newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn compact(v: &Value) -> String {
    match v {
        Value::Array(a) => {
            let parts: Vec<String> = a.iter().map(compact).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(o) => {
            let parts: Vec<String> = o
                .iter()
                .map(|(k, x)| format!("{}: {}", Value::String(k.clone()), compact(x)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        _ => v.to_string(),
    }
}

fn inline(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_array() && !x.is_object()),
        Value::Object(o) => {
            o.values().all(|x| inline(x) && !x.is_object()) && compact(v).len() <= 80
        }
        _ => true,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    if inline(v) {
        out.push_str(&compact(v));
        return;
    }
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad);
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", "  ".repeat(indent));
        }
        Value::Object(o) => {
            out.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", Value::String(k.clone()));
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", "  ".repeat(indent));
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P2: &str = r#"{
  "color_table": {},
  "format_version": 1,
  "lattice_rank": 2,
  "maximal_cones": [
    {"colors": [], "rays": [0, 1]},
    {"colors": [], "rays": [1, 2]},
    {"colors": [], "rays": [0, 2]}
  ],
  "mode": "toric",
  "rays": [
    [1, 0],
    [0, 1],
    [-1, -1]
  ]
}
"#;

    #[test]
    fn p2_round_trip() {
        let d = FanDocument::parse(P2).unwrap();
        assert!(d.validate().is_valid());
        assert_eq!(d.fan.rays.len(), 3);
        assert_eq!(d.to_json(), P2);
    }

    #[test]
    fn duplicate_ray() {
        let text = P2.replace("[-1, -1]", "[1, 0]");
        match FanDocument::parse(&text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "rays[2]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_paths() {
        let text = P2.replace("[0, 1]}", "[0, \"x\"]}");
        match FanDocument::parse(&text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "maximal_cones[0].rays[1]"),
            other => panic!("{other:?}"),
        }
        match FanDocument::parse("{\"mode\": ") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn big_integers_are_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let v = serde_json::to_value(Int(big.clone())).unwrap();
        assert_eq!(v, Value::String(big.to_string()));
        let back: Int = serde_json::from_value(v).unwrap();
        assert_eq!(back.0, big);
    }
}
