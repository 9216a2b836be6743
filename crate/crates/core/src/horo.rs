//! Horospherical homogeneous spaces `G/H` given by `(S, I, M)` and their
//! embeddings.
//!
//! `M` is stored through an ordered basis of weights; `N = Zʳ` is its dual,
//! so the image of the color `D_α` is the vector of pairings
//! `(⟨χ_j, α^∨⟩)_j`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fan::{ColorId, ColoredFan, ValidationReport, ValuationCone, Violation};
use crate::linalg::{rank, IntVec};
use crate::roots::{DynkinDiagram, NodeId, Weight};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HorosphericalDatum {
    pub diagram: DynkinDiagram,
    /// The parabolic subset `I ⊆ S`.
    pub parabolic: BTreeSet<NodeId>,
    /// Rank of the central torus factor of `G`.
    pub central_rank: usize,
    pub m_basis: Vec<Weight>,
}

/// Colors of `G/H` with their images, and the zero-image subset `𝔇₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorData {
    pub rho: BTreeMap<ColorId, IntVec>,
    pub d0: BTreeSet<ColorId>,
}

impl HorosphericalDatum {
    /// The datum of a torus `(C*)^r`: no simple roots, `M = Zʳ`.
    pub fn torus(r: usize) -> Self {
        let m_basis = (0..r)
            .map(|i| {
                let mut c = vec![BigInt::zero(); r];
                c[i] = BigInt::from(1);
                Weight::new(BTreeMap::new(), c)
            })
            .collect();
        HorosphericalDatum {
            diagram: DynkinDiagram::default(),
            parabolic: BTreeSet::new(),
            central_rank: r,
            m_basis,
        }
    }

    pub fn rank(&self) -> usize {
        self.m_basis.len()
    }

    /// Every violated condition, as text.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for n in &self.parabolic {
            if !self.diagram.contains(n) {
                out.push(format!("parabolic node {n} is not in the diagram"));
            }
        }
        for (j, w) in self.m_basis.iter().enumerate() {
            for n in w.fundamental.keys() {
                if !self.diagram.contains(n) {
                    out.push(format!("weight {j} uses unknown node {n}"));
                } else if self.parabolic.contains(n) {
                    out.push(format!("weight {j} pairs nontrivially with {n} in I"));
                }
            }
            if w.central.len() != self.central_rank {
                out.push(format!(
                    "weight {j} has {} central coordinates, expected {}",
                    w.central.len(),
                    self.central_rank
                ));
            }
        }
        if out.is_empty() {
            let nodes = self.diagram.nodes();
            let coords: Vec<IntVec> = self.m_basis.iter().map(|w| w.coordinates(&nodes)).collect();
            if rank(&coords) != coords.len() {
                out.push("weights of the M basis are dependent".to_string());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().into_iter().next() {
            None => Ok(()),
            Some(p) => Err(Error::InvalidDatum(p)),
        }
    }

    /// `S \ I`, in diagram order.
    pub fn color_nodes(&self) -> Vec<NodeId> {
        self.diagram
            .nodes()
            .into_iter()
            .filter(|n| !self.parabolic.contains(n))
            .collect()
    }

    pub fn color_rho(&self) -> Result<ColorData> {
        self.validate()?;
        let mut rho = BTreeMap::new();
        let mut d0 = BTreeSet::new();
        for node in self.color_nodes() {
            let v: IntVec = self
                .m_basis
                .iter()
                .map(|w| w.pairing(&self.diagram, &node))
                .collect::<Result<_>>()?;
            let id = ColorId::new(node);
            if v.iter().all(Zero::is_zero) {
                d0.insert(id.clone());
            }
            rho.insert(id, v);
        }
        Ok(ColorData { rho, d0 })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HorosphericalEmbedding {
    pub datum: HorosphericalDatum,
    pub fan: ColoredFan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmoothnessProfile {
    pub locally_factorial: bool,
    /// The associated toric fan (colors dropped) is smooth.
    pub toric_fan_smooth: bool,
}

impl HorosphericalEmbedding {
    /// A toric variety as a horospherical embedding for the torus. The fan
    /// must have an empty color table.
    pub fn toric(fan: ColoredFan) -> Self {
        HorosphericalEmbedding {
            datum: HorosphericalDatum::torus(fan.lattice_rank),
            fan,
        }
    }

    pub fn is_toric(&self) -> bool {
        self.datum.diagram.components.is_empty()
    }

    pub fn validate_embedding(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let datum_problems = self.datum.problems();
        let datum_ok = datum_problems.is_empty();
        report
            .violations
            .extend(datum_problems.into_iter().map(Violation::Datum));
        if self.fan.valuation_cone != ValuationCone::FullSpace {
            report.violations.push(Violation::Datum(
                "valuation cone must be the full space".into(),
            ));
        }
        if self.fan.lattice_rank != self.datum.rank() {
            report.violations.push(Violation::Datum(format!(
                "fan has rank {}, M has rank {}",
                self.fan.lattice_rank,
                self.datum.rank()
            )));
        }
        if datum_ok {
            let data = self.datum.color_rho().expect("datum checked");
            for (c, v) in &self.fan.color_table {
                match data.rho.get(c) {
                    None => report.violations.push(Violation::Datum(format!(
                        "color {c} is not a simple root outside I"
                    ))),
                    Some(w) if w != v => report.violations.push(Violation::Datum(format!(
                        "color {c} has image {v:?} in the table but {w:?} from the datum"
                    ))),
                    _ => {}
                }
            }
            for c in data.rho.keys() {
                if !self.fan.color_table.contains_key(c) {
                    report.violations.push(Violation::Datum(format!(
                        "color {c} missing from the table"
                    )));
                }
            }
        }
        report.violations.extend(self.fan.validate().violations);
        report
    }

    pub fn require_valid(&self) -> Result<()> {
        self.validate_embedding().into_result()
    }

    pub fn color_data(&self) -> Result<ColorData> {
        self.datum.color_rho()
    }

    /// `𝔇(G/H) \ 𝔇_X`.
    pub fn unattached_colors(&self) -> BTreeSet<ColorId> {
        let attached = self.fan.attached_colors();
        self.fan
            .color_table
            .keys()
            .filter(|c| !attached.contains(*c))
            .cloned()
            .collect()
    }

    /// Dimension of the orbit attached to the cone spanned by `rays`; the
    /// empty cone gives `dim X`.
    pub fn orbit_dimension(&self, rays: &[usize]) -> Result<usize> {
        self.require_valid()?;
        self.orbit_dimension_unchecked(rays)
    }

    pub(crate) fn orbit_dimension_unchecked(&self, rays: &[usize]) -> Result<usize> {
        let colors = self.fan.colors_of_cone_unchecked(rays)?;
        let d = rank(&self.fan.ray_vectors(rays));
        let mut parabolic = self.datum.parabolic.clone();
        parabolic.extend(colors.into_iter().map(|c| c.0));
        Ok(self.datum.rank() - d + self.datum.diagram.dim_flag(&parabolic)?)
    }

    /// Orbit dimension of every face of the fan, keyed by ray set.
    pub fn orbit_dimensions(&self) -> Result<BTreeMap<Vec<usize>, usize>> {
        self.require_valid()?;
        self.fan
            .faces()
            .into_iter()
            .map(|f| Ok((f.rays.clone(), self.orbit_dimension_unchecked(&f.rays)?)))
            .collect()
    }

    pub fn dimension(&self) -> Result<usize> {
        self.orbit_dimension(&[])
    }

    /// `m − r + d` for complete Q-factorial embeddings.
    pub fn picard_number(&self) -> Result<usize> {
        self.require_valid()?;
        if !self.fan.support_unchecked().complete {
            return Err(Error::NotComplete);
        }
        if let Some(w) = self.fan.factoriality_unchecked().q_factorial_witness {
            return Err(Error::NotQFactorial(w));
        }
        Ok(self.fan.rays.len() - self.datum.rank() + self.unattached_colors().len())
    }

    pub fn smoothness_profile(&self) -> Result<SmoothnessProfile> {
        self.require_valid()?;
        Ok(SmoothnessProfile {
            locally_factorial: self.fan.factoriality_unchecked().locally_factorial,
            toric_fan_smooth: self.fan.is_smooth(),
        })
    }

    /// Product embedding of `G₁ × G₂ × …`. Diagram components and central
    /// tori are concatenated; node ids of later factors shift accordingly.
    pub fn product(factors: &[HorosphericalEmbedding]) -> HorosphericalEmbedding {
        let mut components = Vec::new();
        let mut parabolic = BTreeSet::new();
        let central_rank: usize = factors.iter().map(|f| f.datum.central_rank).sum();
        let mut m_basis = Vec::new();
        let mut fans = Vec::new();
        let mut comp_shift = 0;
        let mut central_shift = 0;
        for f in factors {
            let d = &f.datum;
            let relabel = |node: &str| -> NodeId {
                let (c, i) = d.diagram.locate(node).expect("node of a valid datum");
                DynkinDiagram::node_id(c + comp_shift, i)
            };
            components.extend(d.diagram.components.iter().cloned());
            parabolic.extend(d.parabolic.iter().map(|x| relabel(x)));
            for w in &d.m_basis {
                let mut central = vec![BigInt::zero(); central_rank];
                for (k, v) in w.central.iter().enumerate() {
                    central[central_shift + k] = v.clone();
                }
                let fundamental = w
                    .fundamental
                    .iter()
                    .map(|(x, v)| (relabel(x), v.clone()))
                    .collect();
                m_basis.push(Weight::new(fundamental, central));
            }
            let mut fan = f.fan.clone();
            let rename = |c: &ColorId| ColorId::new(relabel(c.as_str()));
            fan.color_table = fan
                .color_table
                .iter()
                .map(|(c, v)| (rename(c), v.clone()))
                .collect();
            for c in fan.maximal_cones.iter_mut() {
                c.colors = c.colors.iter().map(rename).collect();
            }
            fans.push(fan);
            comp_shift += d.diagram.components.len();
            central_shift += d.central_rank;
        }
        HorosphericalEmbedding {
            datum: HorosphericalDatum {
                diagram: DynkinDiagram::new(components),
                parabolic,
                central_rank,
                m_basis,
            },
            fan: ColoredFan::product(&fans),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::ColoredCone;
    use crate::linalg::ivec;

    fn incidence42() -> HorosphericalEmbedding {
        let datum = HorosphericalDatum {
            diagram: DynkinDiagram::parse("A4").unwrap(),
            parabolic: BTreeSet::from(["a4".to_string()]),
            central_rank: 0,
            m_basis: vec![Weight::from_pairs(&[("a2", 1), ("a3", -1)], 0)],
        };
        let rho = datum.color_rho().unwrap().rho;
        let fan = ColoredFan {
            lattice_rank: 1,
            rays: vec![ivec(&[1]), ivec(&[-1])],
            color_table: rho,
            maximal_cones: vec![
                ColoredCone::new(vec![0], [ColorId::from("a2")]),
                ColoredCone::new(vec![1], [ColorId::from("a3")]),
            ],
            valuation_cone: ValuationCone::FullSpace,
        };
        HorosphericalEmbedding { datum, fan }
    }

    #[test]
    fn incidence_colors() {
        let e = incidence42();
        let data = e.color_data().unwrap();
        assert_eq!(data.rho[&ColorId::from("a1")], ivec(&[0]));
        assert_eq!(data.rho[&ColorId::from("a2")], ivec(&[1]));
        assert_eq!(data.rho[&ColorId::from("a3")], ivec(&[-1]));
        assert_eq!(data.d0, BTreeSet::from([ColorId::from("a1")]));
    }

    #[test]
    fn single_root_color() {
        let d = HorosphericalDatum {
            diagram: DynkinDiagram::parse("A1").unwrap(),
            parabolic: BTreeSet::new(),
            central_rank: 0,
            m_basis: vec![Weight::from_pairs(&[("a1", 1)], 0)],
        };
        let data = d.color_rho().unwrap();
        assert_eq!(data.rho[&ColorId::from("a1")], ivec(&[1]));
        assert!(data.d0.is_empty());
    }

    #[test]
    fn weight_must_vanish_on_parabolic() {
        let d = HorosphericalDatum {
            diagram: DynkinDiagram::parse("A2").unwrap(),
            parabolic: BTreeSet::from(["a1".to_string()]),
            central_rank: 0,
            m_basis: vec![Weight::from_pairs(&[("a1", 1)], 0)],
        };
        assert!(matches!(d.color_rho(), Err(Error::InvalidDatum(_))));
    }

    #[test]
    fn incidence_dimensions_and_picard() {
        let e = incidence42();
        assert!(e.validate_embedding().is_valid());
        assert_eq!(e.orbit_dimension(&[]).unwrap(), 10);
        assert_eq!(e.orbit_dimension(&[0]).unwrap(), 8);
        assert_eq!(e.orbit_dimension(&[1]).unwrap(), 7);
        assert_eq!(e.picard_number().unwrap(), 2);
    }

    #[test]
    fn invalid_embeddings() {
        let mut e = incidence42();
        e.fan.maximal_cones[0].colors.insert(ColorId::from("a1"));
        assert!(!e.validate_embedding().is_valid());

        let mut e = incidence42();
        e.fan.color_table.insert(ColorId::from("a4"), ivec(&[0]));
        assert!(!e.validate_embedding().is_valid());
    }

    #[test]
    fn toric_orbits() {
        let fan = ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -1]],
            &[&[0, 1], &[1, 2], &[0, 2]],
        );
        let e = HorosphericalEmbedding::toric(fan);
        assert!(e.validate_embedding().is_valid());
        assert_eq!(e.orbit_dimension(&[]).unwrap(), 2);
        assert_eq!(e.orbit_dimension(&[0]).unwrap(), 1);
        assert_eq!(e.orbit_dimension(&[0, 1]).unwrap(), 0);
        assert_eq!(e.picard_number().unwrap(), 1);
    }
}
