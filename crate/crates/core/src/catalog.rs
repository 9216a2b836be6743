//! Built-in example fans.
//!
//! Names take optional integer parameters, written `hirzebruch:2` or
//! `hirzebruch(2)`; `a*b` builds a product.

use std::collections::BTreeSet;

use crate::document::FanDocument;
use crate::error::{Error, Result};
use crate::fan::{ColorId, ColoredCone, ColoredFan, ValuationCone};
use crate::horo::{HorosphericalDatum, HorosphericalEmbedding};
use crate::linalg::ivec;
use crate::roots::{DynkinDiagram, Weight};

/// `(name, parameter names, description)` of every entry.
pub const ENTRIES: &[(&str, &str, &str)] = &[
    ("p1", "", "projective line"),
    ("p2", "", "projective plane"),
    ("p1xp1", "", "product of two projective lines"),
    ("p1p1p1", "", "product of three projective lines"),
    ("hirzebruch", "a", "Hirzebruch surface F_a"),
    ("f1", "", "Hirzebruch surface F_1"),
    ("p112", "", "weighted projective plane P(1,1,2)"),
    ("f1xp1", "", "F_1 times a projective line"),
    (
        "incidence",
        "m,k",
        "two-orbit horospherical SL(m+1)-variety of Picard number two",
    ),
    (
        "incidence-blowup",
        "m,k",
        "incidence with the ray +1 uncolored",
    ),
];

/// Entry names with their parameters, as accepted by [`catalog_spec`].
pub fn list() -> Vec<String> {
    ENTRIES
        .iter()
        .map(|(n, p, _)| {
            if p.is_empty() {
                n.to_string()
            } else {
                format!("{n}:{p}")
            }
        })
        .collect()
}

/// Parses `name`, `name:1,2`, `name(1,2)` or a `*`-separated product.
pub fn catalog_spec(spec: &str) -> Result<FanDocument> {
    let parts: Vec<&str> = spec.split('*').map(str::trim).collect();
    if parts.len() > 1 {
        let mut factors = Vec::new();
        for p in parts {
            factors.push(catalog_spec(p)?.embedding()?);
        }
        return Ok(FanDocument::from_embedding(
            &HorosphericalEmbedding::product(&factors),
        ));
    }
    let (name, params) = split_params(spec)?;
    catalog(name, &params)
}

fn split_params(spec: &str) -> Result<(&str, Vec<i64>)> {
    let (name, rest) = if let Some(i) = spec.find([':', '(']) {
        let rest = spec[i + 1..].trim_end_matches(')');
        (&spec[..i], rest)
    } else {
        (spec, "")
    };
    let params = rest
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<i64>()
                .map_err(|_| Error::BadParams(format!("{s:?} is not an integer")))
        })
        .collect::<Result<_>>()?;
    Ok((name.trim(), params))
}

pub fn catalog(name: &str, params: &[i64]) -> Result<FanDocument> {
    let arity = ENTRIES
        .iter()
        .find(|e| e.0 == name)
        .map(|e| {
            if e.1.is_empty() {
                0
            } else {
                e.1.split(',').count()
            }
        })
        .ok_or_else(|| Error::UnknownName(name.to_string()))?;
    if params.len() != arity {
        return Err(Error::BadParams(format!(
            "{name} takes {arity} parameters, got {}",
            params.len()
        )));
    }
    let toric = |f: ColoredFan| Ok(FanDocument::from_toric(f));
    match name {
        "p1" => toric(p1()),
        "p2" => toric(ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -1]],
            &[&[0, 1], &[1, 2], &[0, 2]],
        )),
        "p1xp1" => toric(ColoredFan::product(&[p1(), p1()])),
        "p1p1p1" => toric(ColoredFan::product(&[p1(), p1(), p1()])),
        "hirzebruch" => toric(hirzebruch(params[0])),
        "f1" => toric(hirzebruch(1)),
        "p112" => toric(ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -2]],
            &[&[0, 1], &[1, 2], &[0, 2]],
        )),
        "f1xp1" => toric(ColoredFan::product(&[hirzebruch(1), p1()])),
        "incidence" => incidence(params[0], params[1], false),
        "incidence-blowup" => incidence(params[0], params[1], true),
        _ => unreachable!(),
    }
}

fn p1() -> ColoredFan {
    ColoredFan::toric_i64(1, &[&[1], &[-1]], &[&[0], &[1]])
}

fn hirzebruch(a: i64) -> ColoredFan {
    ColoredFan::toric_i64(
        2,
        &[&[1, 0], &[0, 1], &[-1, a], &[0, -1]],
        &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
    )
}

/// Type `A_m`, `I = S \ {a_{k-1}, a_k, a_{k+1}}`, `M = Z(ω_k − ω_{k+1})`,
/// rays `±1` colored by `a_k` and `a_{k+1}`.
fn incidence(m: i64, k: i64, blowup: bool) -> Result<FanDocument> {
    if m < 3 || k < 2 || k > m - 1 {
        return Err(Error::BadParams(format!(
            "incidence needs m >= 3 and 2 <= k <= m-1, got m = {m}, k = {k}"
        )));
    }
    let node = |i: i64| DynkinDiagram::node_id(0, (i - 1) as usize);
    let diagram = DynkinDiagram::parse(&format!("A{m}"))?;
    let colors: BTreeSet<String> = [k - 1, k, k + 1].into_iter().map(node).collect();
    let parabolic = diagram
        .nodes()
        .into_iter()
        .filter(|x| !colors.contains(x))
        .collect();
    let (ck, ck1) = (node(k), node(k + 1));
    let datum = HorosphericalDatum {
        diagram,
        parabolic,
        central_rank: 0,
        m_basis: vec![Weight::from_pairs(
            &[(ck.as_str(), 1), (ck1.as_str(), -1)],
            0,
        )],
    };
    let rho = datum.color_rho()?.rho;
    let plus = if blowup {
        ColoredCone::uncolored(vec![0])
    } else {
        ColoredCone::new(vec![0], [ColorId::new(ck)])
    };
    let fan = ColoredFan {
        lattice_rank: 1,
        rays: vec![ivec(&[1]), ivec(&[-1])],
        color_table: rho,
        maximal_cones: vec![plus, ColoredCone::new(vec![1], [ColorId::new(ck1)])],
        valuation_cone: ValuationCone::FullSpace,
    };
    Ok(FanDocument::from_embedding(&HorosphericalEmbedding {
        datum,
        fan,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_validates_and_round_trips() {
        for spec in [
            "p1",
            "p2",
            "p1xp1",
            "p1p1p1",
            "hirzebruch:0",
            "hirzebruch(2)",
            "f1",
            "p112",
            "f1xp1",
            "incidence:4,2",
            "incidence-blowup:4,2",
            "incidence:5,3",
            "p2*p1",
            "incidence:4,2*p1",
        ] {
            let d = catalog_spec(spec).unwrap();
            assert!(d.validate().is_valid(), "{spec}: {:?}", d.validate());
            let text = d.to_json();
            assert_eq!(FanDocument::parse(&text).unwrap().to_json(), text, "{spec}");
        }
    }

    #[test]
    fn incidence_data() {
        let e = catalog("incidence", &[4, 2]).unwrap().embedding().unwrap();
        assert_eq!(e.datum.parabolic, BTreeSet::from(["a4".to_string()]));
        assert_eq!(
            e.fan.maximal_cones[0].colors,
            BTreeSet::from([ColorId::from("a2")])
        );
        assert_eq!(
            e.fan.maximal_cones[1].colors,
            BTreeSet::from([ColorId::from("a3")])
        );
        assert_eq!(e.picard_number().unwrap(), 2);
        let b = catalog("incidence-blowup", &[4, 2])
            .unwrap()
            .embedding()
            .unwrap();
        assert_eq!(b.picard_number().unwrap(), 3);
    }

    #[test]
    fn errors() {
        assert_eq!(catalog_spec("p3"), Err(Error::UnknownName("p3".into())));
        assert!(matches!(
            catalog_spec("incidence:4,4"),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            catalog_spec("incidence:2,2"),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            catalog_spec("hirzebruch"),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn hirzebruch_zero_is_p1xp1() {
        let h = catalog("hirzebruch", &[0]).unwrap().fan;
        assert!(h.is_isomorphic_to(&catalog("p1xp1", &[]).unwrap().fan));
    }
}
