//! Colored cones and colored fans.
//!
//! A [`ColoredFan`] stores only its maximal colored cones; faces and their
//! induced colors are derived when needed. In full-space mode every face of a
//! cone is a colored face, which covers the toric and horospherical cases. In
//! half-space mode the fan can be validated against a user-supplied valuation
//! cone but the downstream modules refuse it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cone::{fmt_vec, Membership, RatCone};
use crate::error::{Error, Result};
use crate::linalg::{
    is_z_basis_extendable, make_primitive, rank, solve, sublattice_index, to_rat, IntVec,
};

/// Color label. Ordered naturally, so `a2 < a10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColorId(pub String);

impl ColorId {
    pub fn new(s: impl Into<String>) -> Self {
        ColorId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn natural_key(&self) -> (&str, Option<u64>, &str) {
        let s = self.0.as_str();
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (head, tail) = s.split_at(split);
        (head, tail.parse().ok(), tail)
    }
}

impl Ord for ColorId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.natural_key().cmp(&other.natural_key())
    }
}

impl PartialOrd for ColorId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ColorId {
    fn from(s: &str) -> Self {
        ColorId(s.to_string())
    }
}

/// A B-stable prime divisor: a boundary divisor (uncolored ray) or a color.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DivisorId {
    Boundary(usize),
    Color(ColorId),
}

impl fmt::Display for DivisorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivisorId::Boundary(i) => write!(f, "r{i}"),
            DivisorId::Color(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredCone {
    /// Indices into [`ColoredFan::rays`], sorted.
    pub rays: Vec<usize>,
    pub colors: BTreeSet<ColorId>,
}

impl ColoredCone {
    pub fn new(mut rays: Vec<usize>, colors: impl IntoIterator<Item = ColorId>) -> Self {
        rays.sort();
        rays.dedup();
        ColoredCone {
            rays,
            colors: colors.into_iter().collect(),
        }
    }

    pub fn uncolored(rays: Vec<usize>) -> Self {
        Self::new(rays, [])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValuationCone {
    FullSpace,
    /// `{x : h · x ≥ 0}` for each listed covector.
    Halfspaces(Vec<IntVec>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredFan {
    pub lattice_rank: usize,
    pub rays: Vec<IntVec>,
    pub color_table: BTreeMap<ColorId, IntVec>,
    pub maximal_cones: Vec<ColoredCone>,
    pub valuation_cone: ValuationCone,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WrongLength { what: String },
    ZeroRay(usize),
    NonPrimitiveRay(usize),
    DuplicateRay(usize, usize),
    BadRayIndex { cone: usize, index: usize },
    EmptyFan,
    UnknownColor { cone: usize, color: ColorId },
    NotStrictlyConvex(usize),
    RayNotExtremal { cone: usize, ray: usize },
    ZeroColorAttached { cone: usize, color: ColorId },
    ColorOutsideCone { cone: usize, color: ColorId },
    NotGeneratedByColorsAndValuations(usize),
    InteriorMissesValuationCone(usize),
    ImproperIntersection(usize, usize),
    InconsistentColors(usize, usize),
    NonMaximalCone { cone: usize, inside: usize },
    UnusedRay(usize),
    Datum(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            WrongLength { what } => write!(f, "{what} has the wrong length"),
            ZeroRay(i) => write!(f, "ray {i} is zero"),
            NonPrimitiveRay(i) => write!(f, "ray {i} is not primitive"),
            DuplicateRay(i, j) => write!(f, "rays {i} and {j} coincide"),
            BadRayIndex { cone, index } => write!(f, "cone {cone} refers to missing ray {index}"),
            EmptyFan => write!(f, "fan has no cones"),
            UnknownColor { cone, color } => write!(f, "cone {cone} carries unknown color {color}"),
            NotStrictlyConvex(c) => write!(f, "cone {c} is not strictly convex"),
            RayNotExtremal { cone, ray } => write!(f, "ray {ray} is not extremal in cone {cone}"),
            ZeroColorAttached { cone, color } => {
                write!(f, "cone {cone} carries color {color} with zero image")
            }
            ColorOutsideCone { cone, color } => {
                write!(f, "image of color {color} lies outside cone {cone}")
            }
            NotGeneratedByColorsAndValuations(c) => write!(
                f,
                "cone {c} is not generated by its colors and valuation-cone elements"
            ),
            InteriorMissesValuationCone(c) => {
                write!(f, "relative interior of cone {c} misses the valuation cone")
            }
            ImproperIntersection(i, j) => {
                write!(
                    f,
                    "cones {i} and {j} share interior points of the valuation cone"
                )
            }
            InconsistentColors(i, j) => {
                write!(
                    f,
                    "cones {i} and {j} induce different colors on a common face"
                )
            }
            NonMaximalCone { cone, inside } => write!(f, "cone {cone} is a face of cone {inside}"),
            UnusedRay(i) => write!(f, "ray {i} lies in no cone"),
            Datum(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidFan(v.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorialityProfile {
    pub q_factorial: bool,
    pub locally_factorial: bool,
    /// First maximal cone failing Q-factoriality.
    pub q_factorial_witness: Option<usize>,
    /// First maximal cone failing local factoriality.
    pub locally_factorial_witness: Option<usize>,
}

/// A codimension-one face shared by two full-dimensional maximal cones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wall {
    pub rays: Vec<usize>,
    /// Index of `μ₊` in `maximal_cones`.
    pub plus: usize,
    pub minus: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportInfo {
    pub complete: bool,
    pub walls: Vec<Wall>,
}

/// A face of the fan with its induced colors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FanFace {
    pub rays: Vec<usize>,
    pub colors: BTreeSet<ColorId>,
}

impl ColoredFan {
    /// A toric fan: full-space valuation cone and no colors.
    pub fn toric(lattice_rank: usize, rays: Vec<IntVec>, cones: Vec<Vec<usize>>) -> Self {
        ColoredFan {
            lattice_rank,
            rays,
            color_table: BTreeMap::new(),
            maximal_cones: cones.into_iter().map(ColoredCone::uncolored).collect(),
            valuation_cone: ValuationCone::FullSpace,
        }
    }

    pub fn toric_i64(lattice_rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Self {
        Self::toric(
            lattice_rank,
            rays.iter().map(|r| crate::linalg::ivec(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn is_full_space(&self) -> bool {
        self.valuation_cone == ValuationCone::FullSpace
    }

    pub fn ray_vectors(&self, idx: &[usize]) -> Vec<IntVec> {
        idx.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn cone(&self, idx: &[usize]) -> RatCone {
        RatCone::new(self.lattice_rank, &self.ray_vectors(idx))
    }

    pub fn rho(&self, c: &ColorId) -> Option<&IntVec> {
        self.color_table.get(c)
    }

    fn valuation_ratcone(&self) -> RatCone {
        match &self.valuation_cone {
            ValuationCone::FullSpace => RatCone::full_space(self.lattice_rank),
            ValuationCone::Halfspaces(h) => RatCone::from_halfspaces(self.lattice_rank, h),
        }
    }

    /// Checks every axiom of a strictly convex colored fan.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.lattice_rank;
        for (i, r) in self.rays.iter().enumerate() {
            if r.len() != n {
                v.push(Violation::WrongLength {
                    what: format!("ray {i}"),
                });
            }
        }
        for (c, rho) in &self.color_table {
            if rho.len() != n {
                v.push(Violation::WrongLength {
                    what: format!("image of color {c}"),
                });
            }
        }
        if let ValuationCone::Halfspaces(hs) = &self.valuation_cone {
            if hs.iter().any(|h| h.len() != n) {
                v.push(Violation::WrongLength {
                    what: "valuation half-space".into(),
                });
            }
        }
        if !v.is_empty() {
            return ValidationReport { violations: v };
        }
        for (i, r) in self.rays.iter().enumerate() {
            if crate::linalg::is_zero(r) {
                v.push(Violation::ZeroRay(i));
            } else if &make_primitive(r) != r {
                v.push(Violation::NonPrimitiveRay(i));
            }
            for j in 0..i {
                if &self.rays[j] == r {
                    v.push(Violation::DuplicateRay(j, i));
                }
            }
        }
        if self.maximal_cones.is_empty() {
            v.push(Violation::EmptyFan);
        }
        for (ci, c) in self.maximal_cones.iter().enumerate() {
            for &i in &c.rays {
                if i >= self.rays.len() {
                    v.push(Violation::BadRayIndex { cone: ci, index: i });
                }
            }
            for col in &c.colors {
                if !self.color_table.contains_key(col) {
                    v.push(Violation::UnknownColor {
                        cone: ci,
                        color: col.clone(),
                    });
                }
            }
        }
        if !v.is_empty() {
            return ValidationReport { violations: v };
        }

        let vcone = self.valuation_ratcone();
        let cones: Vec<RatCone> = self
            .maximal_cones
            .iter()
            .map(|c| self.cone(&c.rays))
            .collect();
        for (ci, (c, k)) in self.maximal_cones.iter().zip(&cones).enumerate() {
            if !k.is_strictly_convex() {
                v.push(Violation::NotStrictlyConvex(ci));
                continue;
            }
            for &r in &c.rays {
                if !k.rays().contains(&self.rays[r]) {
                    v.push(Violation::RayNotExtremal { cone: ci, ray: r });
                }
            }
            for col in &c.colors {
                let rho = &self.color_table[col];
                if crate::linalg::is_zero(rho) {
                    v.push(Violation::ZeroColorAttached {
                        cone: ci,
                        color: col.clone(),
                    });
                } else if !k.contains(rho, Membership::Closed) {
                    v.push(Violation::ColorOutsideCone {
                        cone: ci,
                        color: col.clone(),
                    });
                }
            }
            if let ValuationCone::Halfspaces(_) = &self.valuation_cone {
                let color_rays: Vec<IntVec> = c
                    .colors
                    .iter()
                    .map(|col| make_primitive(&self.color_table[col]))
                    .collect();
                let generated = k
                    .rays()
                    .iter()
                    .all(|r| color_rays.contains(r) || vcone.contains(r, Membership::Closed));
                if !generated {
                    v.push(Violation::NotGeneratedByColorsAndValuations(ci));
                }
                let meet = k.intersection(&vcone);
                if !k.contains(&meet.interior_point(), Membership::Interior) {
                    v.push(Violation::InteriorMissesValuationCone(ci));
                }
            }
        }
        let mut used = vec![false; self.rays.len()];
        for c in &self.maximal_cones {
            for &r in &c.rays {
                used[r] = true;
            }
        }
        for (i, u) in used.iter().enumerate() {
            if !u {
                v.push(Violation::UnusedRay(i));
            }
        }
        if !v.is_empty() {
            return ValidationReport { violations: v };
        }

        match &self.valuation_cone {
            ValuationCone::FullSpace => self.check_pairs_full(&cones, &mut v),
            ValuationCone::Halfspaces(_) => self.check_pairs_halfspace(&cones, &vcone, &mut v),
        }
        ValidationReport { violations: v }
    }

    fn induced_colors(&self, colors: &BTreeSet<ColorId>, face: &RatCone) -> BTreeSet<ColorId> {
        colors
            .iter()
            .filter(|c| face.contains(&self.color_table[*c], Membership::Closed))
            .cloned()
            .collect()
    }

    fn check_pairs_full(&self, cones: &[RatCone], v: &mut Vec<Violation>) {
        let face_sets: Vec<BTreeSet<RatCone>> = cones
            .iter()
            .map(|k| k.all_faces().into_iter().collect())
            .collect();
        for i in 0..cones.len() {
            for j in i + 1..cones.len() {
                let meet =
                    if disjoint_sorted(&self.maximal_cones[i].rays, &self.maximal_cones[j].rays)
                        && cones[i].dim() + cones[j].dim() <= self.lattice_rank
                        && rank(
                            &self.ray_vectors(
                                &[
                                    self.maximal_cones[i].rays.clone(),
                                    self.maximal_cones[j].rays.clone(),
                                ]
                                .concat(),
                            ),
                        ) == cones[i].dim() + cones[j].dim()
                    {
                        RatCone::zero(self.lattice_rank)
                    } else {
                        cones[i].intersection(&cones[j])
                    };
                if !face_sets[i].contains(&meet) || !face_sets[j].contains(&meet) {
                    v.push(Violation::ImproperIntersection(i, j));
                    continue;
                }
                if meet == cones[i] {
                    v.push(Violation::NonMaximalCone { cone: i, inside: j });
                } else if meet == cones[j] {
                    v.push(Violation::NonMaximalCone { cone: j, inside: i });
                }
                let ci = self.induced_colors(&self.maximal_cones[i].colors, &meet);
                let cj = self.induced_colors(&self.maximal_cones[j].colors, &meet);
                if ci != cj {
                    v.push(Violation::InconsistentColors(i, j));
                }
            }
        }
    }

    fn check_pairs_halfspace(&self, cones: &[RatCone], vcone: &RatCone, v: &mut Vec<Violation>) {
        // colored faces: faces whose relative interior meets the valuation cone
        let mut colored: Vec<(usize, RatCone, BTreeSet<ColorId>)> = Vec::new();
        for (ci, k) in cones.iter().enumerate() {
            for f in k.all_faces() {
                let meet = f.intersection(vcone);
                if f.contains(&meet.interior_point(), Membership::Interior) {
                    let cols = self.induced_colors(&self.maximal_cones[ci].colors, &f);
                    colored.push((ci, f, cols));
                }
            }
        }
        let mut reported = BTreeSet::new();
        for a in 0..colored.len() {
            for b in a + 1..colored.len() {
                let (ia, fa, ca) = &colored[a];
                let (ib, fb, cb) = &colored[b];
                if ia == ib || reported.contains(&(*ia, *ib)) {
                    continue;
                }
                if fa == fb {
                    if ca != cb {
                        reported.insert((*ia, *ib));
                        v.push(Violation::InconsistentColors(*ia, *ib));
                    }
                    continue;
                }
                let k = fa.intersection(fb).intersection(vcone);
                let p = k.interior_point();
                if fa.contains(&p, Membership::Interior) && fb.contains(&p, Membership::Interior) {
                    reported.insert((*ia, *ib));
                    v.push(Violation::ImproperIntersection(*ia, *ib));
                }
            }
        }
    }

    pub fn require_valid(&self) -> Result<()> {
        self.validate().into_result()
    }

    /// Colors attached to at least one cone (`𝔇_X`).
    pub fn attached_colors(&self) -> BTreeSet<ColorId> {
        self.maximal_cones
            .iter()
            .flat_map(|c| c.colors.iter().cloned())
            .collect()
    }

    /// Rays whose induced color set is empty: the boundary divisors `𝒱_X`.
    pub fn uncolored_rays(&self) -> Vec<usize> {
        let attached = self.attached_colors();
        (0..self.rays.len())
            .filter(|&i| {
                !attached
                    .iter()
                    .any(|c| on_ray(&self.color_table[c], &self.rays[i]))
            })
            .collect()
    }

    /// Every face of every maximal cone with its induced colors, sorted by
    /// dimension and then by ray set. Requires full-space mode.
    pub fn faces(&self) -> Vec<FanFace> {
        let mut out: BTreeMap<Vec<usize>, BTreeSet<ColorId>> = BTreeMap::new();
        for c in &self.maximal_cones {
            for sub in self.face_ray_sets(&c.rays) {
                let cols = self.induced_colors(&c.colors, &self.cone(&sub));
                out.insert(sub, cols);
            }
        }
        let mut faces: Vec<FanFace> = out
            .into_iter()
            .map(|(rays, colors)| FanFace { rays, colors })
            .collect();
        faces.sort_by(|a, b| {
            let da = rank(&self.ray_vectors(&a.rays));
            let db = rank(&self.ray_vectors(&b.rays));
            (da, &a.rays).cmp(&(db, &b.rays))
        });
        faces
    }

    /// Faces of the cone spanned by the given rays, as sorted ray-index sets.
    pub fn face_ray_sets(&self, rays: &[usize]) -> Vec<Vec<usize>> {
        let vecs = self.ray_vectors(rays);
        if rank(&vecs) == rays.len() {
            // simplicial: every subset
            let mut out = Vec::new();
            for mask in 0u64..(1u64 << rays.len()) {
                let sub: Vec<usize> = (0..rays.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| rays[b])
                    .collect();
                out.push(sub);
            }
            return out;
        }
        let k = self.cone(rays);
        let index: HashMap<&IntVec, usize> = rays.iter().map(|&r| (&self.rays[r], r)).collect();
        k.face_ray_sets()
            .into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.iter().map(|&i| index[&k.rays()[i]]).collect();
                v.sort();
                v
            })
            .collect()
    }

    /// Maximal cones as ray sets whose dimension equals the lattice rank.
    pub fn full_dimensional_cones(&self) -> Vec<usize> {
        (0..self.maximal_cones.len())
            .filter(|&i| rank(&self.ray_vectors(&self.maximal_cones[i].rays)) == self.lattice_rank)
            .collect()
    }

    pub fn factoriality_profile(&self) -> Result<FactorialityProfile> {
        self.require_valid()?;
        Ok(self.factoriality_unchecked())
    }

    pub(crate) fn factoriality_unchecked(&self) -> FactorialityProfile {
        let uncolored: BTreeSet<usize> = self.uncolored_rays().into_iter().collect();
        let mut p = FactorialityProfile {
            q_factorial: true,
            locally_factorial: true,
            q_factorial_witness: None,
            locally_factorial_witness: None,
        };
        for (ci, c) in self.maximal_cones.iter().enumerate() {
            let mut vecs: Vec<IntVec> = c
                .rays
                .iter()
                .filter(|r| uncolored.contains(r))
                .map(|&r| self.rays[r].clone())
                .collect();
            vecs.extend(c.colors.iter().map(|col| self.color_table[col].clone()));
            if rank(&vecs) < vecs.len() {
                if p.q_factorial {
                    p.q_factorial = false;
                    p.q_factorial_witness = Some(ci);
                }
                if p.locally_factorial {
                    p.locally_factorial = false;
                    p.locally_factorial_witness = Some(ci);
                }
            } else if p.locally_factorial && !is_z_basis_extendable(self.lattice_rank, &vecs) {
                p.locally_factorial = false;
                p.locally_factorial_witness = Some(ci);
            }
        }
        p
    }

    pub fn support_and_walls(&self) -> Result<SupportInfo> {
        self.require_valid()?;
        Ok(self.support_unchecked())
    }

    pub(crate) fn support_unchecked(&self) -> SupportInfo {
        let n = self.lattice_rank;
        let full = self.full_dimensional_cones();
        let mut facets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for &ci in &full {
            for f in self.face_ray_sets(&self.maximal_cones[ci].rays) {
                if n > 0 && rank(&self.ray_vectors(&f)) == n - 1 {
                    facets.entry(f).or_default().push(ci);
                }
            }
        }
        let mut walls = Vec::new();
        let mut boundary = Vec::new();
        for (f, owners) in &facets {
            match owners.as_slice() {
                [a, b] => {
                    let ka = self.cone(&self.maximal_cones[*a].rays);
                    let kb = self.cone(&self.maximal_cones[*b].rays);
                    let (plus, minus) = if ka <= kb { (*a, *b) } else { (*b, *a) };
                    walls.push(Wall {
                        rays: f.clone(),
                        plus,
                        minus,
                    });
                }
                [a] => boundary.push((f.clone(), *a)),
                _ => {}
            }
        }
        let complete = !full.is_empty()
            && match &self.valuation_cone {
                ValuationCone::FullSpace => {
                    boundary.is_empty() && full.len() == self.maximal_cones.len()
                }
                ValuationCone::Halfspaces(_) => self.halfspace_complete(&full),
            };
        SupportInfo { complete, walls }
    }

    /// Support covers the valuation cone: the pieces `C ∩ 𝒱` of the full
    /// dimensional cones have no facet in the interior of `𝒱` that is not
    /// shared with another piece.
    fn halfspace_complete(&self, full: &[usize]) -> bool {
        let n = self.lattice_rank;
        let vcone = self.valuation_ratcone();
        let vfacets: BTreeSet<IntVec> = vcone.hrep().inequalities.iter().cloned().collect();
        let pieces: Vec<RatCone> = full
            .iter()
            .map(|&ci| self.cone(&self.maximal_cones[ci].rays).intersection(&vcone))
            .filter(|k| k.dim() == n)
            .collect();
        if pieces.is_empty() {
            return false;
        }
        let mut count: HashMap<Vec<IntVec>, usize> = HashMap::new();
        let mut on_boundary: BTreeSet<Vec<IntVec>> = BTreeSet::new();
        for p in &pieces {
            for h in &p.hrep().inequalities {
                let facet = RatCone::new(
                    n,
                    &p.rays()
                        .iter()
                        .filter(|r| crate::linalg::dot(h, r).is_zero())
                        .cloned()
                        .collect::<Vec<_>>(),
                )
                .generators()
                .to_vec();
                if vfacets.contains(h) {
                    on_boundary.insert(facet.clone());
                }
                *count.entry(facet).or_default() += 1;
            }
        }
        count
            .iter()
            .all(|(f, c)| *c >= 2 || on_boundary.contains(f))
    }

    /// Colors attached to the fan whose image lies in the cone (full-space
    /// mode).
    pub fn colors_of_cone(&self, rays: &[usize]) -> Result<BTreeSet<ColorId>> {
        self.require_valid()?;
        if !self.is_full_space() {
            return Err(Error::ValuationConeMode);
        }
        self.colors_of_cone_unchecked(rays)
    }

    pub(crate) fn colors_of_cone_unchecked(&self, rays: &[usize]) -> Result<BTreeSet<ColorId>> {
        let mut sorted = rays.to_vec();
        sorted.sort();
        sorted.dedup();
        if !self.contains_face(&sorted) {
            return Err(Error::ConeNotInFan(sorted));
        }
        let k = self.cone(&sorted);
        Ok(self
            .attached_colors()
            .into_iter()
            .filter(|c| k.contains(&self.color_table[c], Membership::Closed))
            .collect())
    }

    /// Whether the sorted ray set spans a face of some maximal cone.
    pub fn contains_face(&self, rays: &[usize]) -> bool {
        self.maximal_cones.iter().any(|c| {
            rays.iter().all(|r| c.rays.contains(r))
                && self.face_ray_sets(&c.rays).iter().any(|f| f == rays)
        })
    }

    /// Maps each ray to its divisor: the attached color spanning it, or the
    /// boundary divisor.
    pub fn ray_divisor_map(&self) -> Result<BTreeMap<usize, DivisorId>> {
        self.require_valid()?;
        if !self.is_full_space() {
            return Err(Error::ValuationConeMode);
        }
        let prof = self.factoriality_unchecked();
        if let Some(w) = prof.q_factorial_witness {
            return Err(Error::NotQFactorial(w));
        }
        self.ray_divisor_map_unchecked()
    }

    pub(crate) fn ray_divisor_map_unchecked(&self) -> Result<BTreeMap<usize, DivisorId>> {
        let attached = self.attached_colors();
        let mut out = BTreeMap::new();
        for (i, r) in self.rays.iter().enumerate() {
            let on: Vec<&ColorId> = attached
                .iter()
                .filter(|c| on_ray(&self.color_table[*c], r))
                .collect();
            let d = match on.as_slice() {
                [] => DivisorId::Boundary(i),
                [c] => DivisorId::Color((*c).clone()),
                _ => return Err(Error::AmbiguousRay(i)),
            };
            out.insert(i, d);
        }
        Ok(out)
    }

    /// The associated toric fan: same rays and cones, colors dropped.
    pub fn uncolored(&self) -> ColoredFan {
        ColoredFan {
            lattice_rank: self.lattice_rank,
            rays: self.rays.clone(),
            color_table: BTreeMap::new(),
            maximal_cones: self
                .maximal_cones
                .iter()
                .map(|c| ColoredCone::uncolored(c.rays.clone()))
                .collect(),
            valuation_cone: ValuationCone::FullSpace,
        }
    }

    pub fn is_simplicial(&self) -> bool {
        self.maximal_cones
            .iter()
            .all(|c| rank(&self.ray_vectors(&c.rays)) == c.rays.len())
    }

    /// Every maximal cone is generated by part of a lattice basis.
    pub fn is_smooth(&self) -> bool {
        self.maximal_cones
            .iter()
            .all(|c| is_z_basis_extendable(self.lattice_rank, &self.ray_vectors(&c.rays)))
    }

    /// Multiplicity of a simplicial cone.
    pub fn multiplicity(&self, rays: &[usize]) -> Result<BigInt> {
        sublattice_index(self.lattice_rank, &self.ray_vectors(rays))
    }

    /// Sorts rays lexicographically and cones by ray set.
    pub fn canonicalize(&self) -> ColoredFan {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut new_index = vec![0; self.rays.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut cones: Vec<ColoredCone> = self
            .maximal_cones
            .iter()
            .map(|c| {
                ColoredCone::new(
                    c.rays.iter().map(|&r| new_index[r]).collect(),
                    c.colors.clone(),
                )
            })
            .collect();
        cones.sort();
        ColoredFan {
            lattice_rank: self.lattice_rank,
            rays: order.iter().map(|&i| self.rays[i].clone()).collect(),
            color_table: self.color_table.clone(),
            maximal_cones: cones,
            valuation_cone: self.valuation_cone.clone(),
        }
    }

    /// Product fan in `N₁ ⊕ N₂ ⊕ …`. Color labels must be distinct across
    /// factors.
    pub fn product(fans: &[ColoredFan]) -> ColoredFan {
        let n: usize = fans.iter().map(|f| f.lattice_rank).sum();
        let mut rays = Vec::new();
        let mut color_table = BTreeMap::new();
        let mut offsets = Vec::new();
        let mut shift = 0;
        for f in fans {
            offsets.push(rays.len());
            for r in &f.rays {
                rays.push(embed(r, shift, n));
            }
            for (c, rho) in &f.color_table {
                color_table.insert(c.clone(), embed(rho, shift, n));
            }
            shift += f.lattice_rank;
        }
        let mut cones = vec![ColoredCone::uncolored(Vec::new())];
        for (f, off) in fans.iter().zip(&offsets) {
            let mut next = Vec::new();
            for base in &cones {
                for c in &f.maximal_cones {
                    let mut r = base.rays.clone();
                    r.extend(c.rays.iter().map(|x| x + off));
                    let mut cols = base.colors.clone();
                    cols.extend(c.colors.iter().cloned());
                    next.push(ColoredCone::new(r, cols));
                }
            }
            cones = next;
        }
        ColoredFan {
            lattice_rank: n,
            rays,
            color_table,
            maximal_cones: cones,
            valuation_cone: ValuationCone::FullSpace,
        }
    }

    /// Star subdivision of a toric fan at the cone spanned by `rays`: the new
    /// ray is the primitive vector on the sum of their generators.
    pub fn star_subdivision(&self, rays: &[usize]) -> Result<ColoredFan> {
        let mut sorted = rays.to_vec();
        sorted.sort();
        if sorted.is_empty() || !self.contains_face(&sorted) {
            return Err(Error::ConeNotInFan(sorted));
        }
        let mut sum = vec![BigInt::zero(); self.lattice_rank];
        for &r in &sorted {
            for (a, b) in sum.iter_mut().zip(&self.rays[r]) {
                *a += b;
            }
        }
        let v = make_primitive(&sum);
        if sorted.len() == 1 {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        let new = out.rays.len();
        out.rays.push(v);
        let mut cones = Vec::new();
        for c in &self.maximal_cones {
            if sorted.iter().all(|r| c.rays.contains(r)) {
                for &drop in &sorted {
                    let mut rs: Vec<usize> =
                        c.rays.iter().copied().filter(|&x| x != drop).collect();
                    rs.push(new);
                    cones.push(ColoredCone::new(rs, c.colors.clone()));
                }
            } else {
                cones.push(c.clone());
            }
        }
        out.maximal_cones = cones;
        Ok(out)
    }

    /// Whether some unimodular change of coordinates carries this fan onto
    /// `other`, preserving colors by label.
    pub fn is_isomorphic_to(&self, other: &ColoredFan) -> bool {
        if self.lattice_rank != other.lattice_rank
            || self.rays.len() != other.rays.len()
            || self.maximal_cones.len() != other.maximal_cones.len()
            || self.color_table.keys().ne(other.color_table.keys())
        {
            return false;
        }
        let n = self.lattice_rank;
        let basis = independent_subset(&self.rays, n);
        if basis.len() != n {
            // rays do not span; compare directly
            return self.canonicalize() == other.canonicalize();
        }
        let target_cones: BTreeSet<ColoredCone> =
            other.canonicalize().maximal_cones.into_iter().collect();
        let other_c = other.canonicalize();
        let mut assignment = Vec::new();
        search_iso(self, &other_c, &basis, &mut assignment, &target_cones)
    }
}

fn search_iso(
    a: &ColoredFan,
    b: &ColoredFan,
    basis: &[usize],
    assignment: &mut Vec<usize>,
    target_cones: &BTreeSet<ColoredCone>,
) -> bool {
    if assignment.len() == basis.len() {
        return check_iso(a, b, basis, assignment, target_cones);
    }
    for cand in 0..b.rays.len() {
        if assignment.contains(&cand) {
            continue;
        }
        assignment.push(cand);
        if search_iso(a, b, basis, assignment, target_cones) {
            return true;
        }
        assignment.pop();
    }
    false
}

fn check_iso(
    a: &ColoredFan,
    b: &ColoredFan,
    basis: &[usize],
    assignment: &[usize],
    target_cones: &BTreeSet<ColoredCone>,
) -> bool {
    let n = a.lattice_rank;
    // T with T(a_basis_i) = b_assignment_i; solve row by row: T^t rows
    let src: Vec<_> = basis.iter().map(|&i| to_rat(&a.rays[i])).collect();
    let mut t_rows = Vec::new();
    for k in 0..n {
        let rhs: Vec<_> = assignment
            .iter()
            .map(|&j| num_rational::BigRational::from_integer(b.rays[j][k].clone()))
            .collect();
        match solve(&src, n, &rhs) {
            Some(row) if row.iter().all(|x| x.is_integer()) => {
                t_rows.push(row.iter().map(|x| x.to_integer()).collect::<IntVec>())
            }
            _ => return false,
        }
    }
    let t = crate::linalg::IntMatrix::from_rows(n, &t_rows);
    if !t.determinant().abs().is_one() {
        return false;
    }
    let index: HashMap<IntVec, usize> = b
        .rays
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), i))
        .collect();
    let mut map = Vec::new();
    for r in &a.rays {
        match index.get(&t.mul_vec(r)) {
            Some(&j) => map.push(j),
            None => return false,
        }
    }
    for (c, rho) in &a.color_table {
        if b.color_table.get(c) != Some(&t.mul_vec(rho)) {
            return false;
        }
    }
    a.maximal_cones.iter().all(|c| {
        target_cones.contains(&ColoredCone::new(
            c.rays.iter().map(|&r| map[r]).collect(),
            c.colors.clone(),
        ))
    })
}

fn independent_subset(vecs: &[IntVec], n: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..vecs.len() {
        let mut trial: Vec<IntVec> = chosen.iter().map(|&j| vecs[j].clone()).collect();
        trial.push(vecs[i].clone());
        if rank(&trial) == trial.len() {
            chosen.push(i);
            if chosen.len() == n {
                break;
            }
        }
    }
    chosen
}

fn embed(v: &[BigInt], shift: usize, n: usize) -> IntVec {
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in v.iter().enumerate() {
        out[shift + i] = x.clone();
    }
    out
}

fn disjoint_sorted(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

/// Whether the nonzero vector `v` lies on the ray through `r`.
pub(crate) fn on_ray(v: &[BigInt], r: &[BigInt]) -> bool {
    !crate::linalg::is_zero(v)
        && make_primitive(v) == *r
        && v.iter().zip(r).all(|(a, b)| !(a * b).is_negative())
}

pub(crate) fn describe_cone(fan: &ColoredFan, rays: &[usize]) -> String {
    if rays.is_empty() {
        return "{0}".to_string();
    }
    let parts: Vec<String> = rays.iter().map(|&r| fmt_vec(&fan.rays[r])).collect();
    format!("<{}>", parts.join(","))
}
