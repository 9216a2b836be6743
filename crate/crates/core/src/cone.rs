//! Rational polyhedral cones.
//!
//! A [`RatCone`] is kept in canonical form: a canonical basis of its
//! lineality space (rows of the reduced echelon form, both signs included as
//! generators) together with its extremal rays projected onto the orthogonal
//! complement of that space. Two cones are equal iff their canonical
//! generator lists are equal.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::linalg::{
    canonical_subspace_basis, dot, dot_mixed, is_zero, make_primitive, project_out, rank, IntVec,
};

/// Facet description: `eq · x = 0` for every equation, `ineq · x ≥ 0` for
/// every (irredundant) inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HRep {
    pub equations: Vec<IntVec>,
    pub inequalities: Vec<IntVec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Closed,
    /// Relative interior.
    Interior,
}

pub struct RatCone {
    ambient: usize,
    lineality: Vec<IntVec>,
    rays: Vec<IntVec>,
    generators: Vec<IntVec>,
    hrep: OnceLock<HRep>,
}

impl Clone for RatCone {
    fn clone(&self) -> Self {
        RatCone {
            ambient: self.ambient,
            lineality: self.lineality.clone(),
            rays: self.rays.clone(),
            generators: self.generators.clone(),
            hrep: self.hrep.clone(),
        }
    }
}

impl PartialEq for RatCone {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.generators == other.generators
    }
}

impl Eq for RatCone {}

impl std::hash::Hash for RatCone {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.generators.hash(state);
    }
}

impl PartialOrd for RatCone {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatCone {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.ambient, &self.generators).cmp(&(other.ambient, &other.generators))
    }
}

impl fmt::Debug for RatCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RatCone{:?}",
            self.generators
                .iter()
                .map(|g| fmt_vec(g))
                .collect::<Vec<_>>()
        )
    }
}

pub(crate) fn fmt_vec(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

impl RatCone {
    /// The cone generated by `gens` in `Q^ambient`.
    pub fn new(ambient: usize, gens: &[IntVec]) -> RatCone {
        let gens: Vec<IntVec> = gens
            .iter()
            .inspect(|g| assert_eq!(g.len(), ambient, "generator of wrong length"))
            .filter(|g| !is_zero(g))
            .map(|g| make_primitive(g))
            .collect();
        if rank(&gens) == gens.len() {
            let mut rays = gens;
            rays.sort();
            rays.dedup();
            return Self::from_parts(ambient, Vec::new(), rays);
        }
        let (dl, dr) = double_description(ambient, &gens);
        let mut ineqs = dr;
        for l in &dl {
            ineqs.push(l.clone());
            ineqs.push(l.iter().map(|x| -x).collect());
        }
        let (l, r) = double_description(ambient, &ineqs);
        Self::from_parts(ambient, l, r)
    }

    pub fn from_i64(ambient: usize, gens: &[&[i64]]) -> RatCone {
        let gens: Vec<IntVec> = gens.iter().map(|g| crate::linalg::ivec(g)).collect();
        Self::new(ambient, &gens)
    }

    /// `{x : h · x ≥ 0 for all h}`.
    pub fn from_halfspaces(ambient: usize, ineqs: &[IntVec]) -> RatCone {
        let (l, r) = double_description(ambient, ineqs);
        Self::from_parts(ambient, l, r)
    }

    pub fn zero(ambient: usize) -> RatCone {
        Self::from_parts(ambient, Vec::new(), Vec::new())
    }

    pub fn full_space(ambient: usize) -> RatCone {
        Self::from_parts(
            ambient,
            crate::linalg::IntMatrix::identity(ambient).to_rows(),
            Vec::new(),
        )
    }

    fn from_parts(ambient: usize, lineality: Vec<IntVec>, rays: Vec<IntVec>) -> RatCone {
        let lineality = canonical_subspace_basis(ambient, &lineality);
        let mut rays: Vec<IntVec> = rays
            .iter()
            .map(|r| project_out(r, &lineality))
            .filter(|r| !is_zero(r))
            .collect();
        rays.sort();
        rays.dedup();
        let mut generators = rays.clone();
        for l in &lineality {
            generators.push(l.clone());
            generators.push(l.iter().map(|x| -x).collect());
        }
        generators.sort();
        RatCone {
            ambient,
            lineality,
            rays,
            generators,
            hrep: OnceLock::new(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Canonical generators, sorted lexicographically.
    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    /// Extremal rays of the pointed part (all extremal rays when strictly
    /// convex).
    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[IntVec] {
        &self.lineality
    }

    pub fn dim(&self) -> usize {
        self.lineality.len() + rank(&self.rays)
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn hrep(&self) -> &HRep {
        self.hrep.get_or_init(|| {
            let (l, r) = double_description(self.ambient, &self.generators);
            let equations = canonical_subspace_basis(self.ambient, &l);
            let mut inequalities: Vec<IntVec> = r
                .iter()
                .map(|h| project_out(h, &equations))
                .filter(|h| !is_zero(h))
                .collect();
            inequalities.sort();
            inequalities.dedup();
            HRep {
                equations,
                inequalities,
            }
        })
    }

    /// `{φ : φ(c) ≥ 0 for all c ∈ C}`.
    pub fn dual(&self) -> RatCone {
        let h = self.hrep();
        Self::from_parts(self.ambient, h.equations.clone(), h.inequalities.clone())
    }

    pub fn contains(&self, v: &[BigInt], mode: Membership) -> bool {
        let h = self.hrep();
        if h.equations.iter().any(|e| !dot(e, v).is_zero()) {
            return false;
        }
        match mode {
            Membership::Closed => h.inequalities.iter().all(|f| !dot(f, v).is_negative()),
            Membership::Interior => h.inequalities.iter().all(|f| dot(f, v).is_positive()),
        }
    }

    pub fn contains_rat(&self, v: &[BigRational], mode: Membership) -> bool {
        let h = self.hrep();
        if h.equations.iter().any(|e| !dot_mixed(e, v).is_zero()) {
            return false;
        }
        match mode {
            Membership::Closed => h
                .inequalities
                .iter()
                .all(|f| !dot_mixed(f, v).is_negative()),
            Membership::Interior => h.inequalities.iter().all(|f| dot_mixed(f, v).is_positive()),
        }
    }

    pub fn contains_cone(&self, other: &RatCone) -> bool {
        other
            .generators
            .iter()
            .all(|g| self.contains(g, Membership::Closed))
    }

    /// A point of the relative interior.
    pub fn interior_point(&self) -> IntVec {
        let mut p = vec![BigInt::zero(); self.ambient];
        for r in &self.rays {
            for (a, b) in p.iter_mut().zip(r) {
                *a += b;
            }
        }
        p
    }

    pub fn intersection(&self, other: &RatCone) -> RatCone {
        let mut ineqs = Vec::new();
        for c in [self, other] {
            let h = c.hrep();
            ineqs.extend(h.inequalities.iter().cloned());
            for e in &h.equations {
                ineqs.push(e.clone());
                ineqs.push(e.iter().map(|x| -x).collect());
            }
        }
        Self::from_halfspaces(self.ambient, &ineqs)
    }

    /// Faces as sets of indices into [`RatCone::rays`]. Every face contains
    /// the lineality space; the minimal face is the empty set.
    pub fn face_ray_sets(&self) -> BTreeSet<Vec<usize>> {
        let ineqs = &self.hrep().inequalities;
        let all: Vec<usize> = (0..self.rays.len()).collect();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut stack = vec![all];
        while let Some(face) = stack.pop() {
            if !seen.insert(face.clone()) {
                continue;
            }
            for h in ineqs {
                let sub: Vec<usize> = face
                    .iter()
                    .copied()
                    .filter(|&i| dot(h, &self.rays[i]).is_zero())
                    .collect();
                if sub.len() < face.len() && !seen.contains(&sub) {
                    stack.push(sub);
                }
            }
        }
        seen
    }

    fn face_from_rays(&self, idx: &[usize]) -> RatCone {
        let rays: Vec<IntVec> = idx.iter().map(|&i| self.rays[i].clone()).collect();
        let mut rays_sorted = rays;
        rays_sorted.sort();
        let mut generators = rays_sorted.clone();
        for l in &self.lineality {
            generators.push(l.clone());
            generators.push(l.iter().map(|x| -x).collect());
        }
        generators.sort();
        RatCone {
            ambient: self.ambient,
            lineality: self.lineality.clone(),
            rays: rays_sorted,
            generators,
            hrep: OnceLock::new(),
        }
    }

    /// All faces of the given dimension, in canonical order.
    pub fn faces(&self, dim: usize) -> Vec<RatCone> {
        let mut out: Vec<RatCone> = self
            .face_ray_sets()
            .into_iter()
            .map(|s| self.face_from_rays(&s))
            .filter(|f| f.dim() == dim)
            .collect();
        out.sort();
        out
    }

    pub fn all_faces(&self) -> Vec<RatCone> {
        let mut out: Vec<RatCone> = self
            .face_ray_sets()
            .into_iter()
            .map(|s| self.face_from_rays(&s))
            .collect();
        out.sort_by(|a, b| (a.dim(), a).cmp(&(b.dim(), b)));
        out
    }

    pub fn is_face_of(&self, other: &RatCone) -> bool {
        other.contains_cone(self) && other.faces(self.dim()).contains(self)
    }
}

/// Double description by incremental half-space insertion.
///
/// Returns `(lineality basis, extremal rays)` of `{x : a · x ≥ 0 ∀ a}`.
/// Rays are determined modulo the lineality space.
pub fn double_description(n: usize, ineqs: &[IntVec]) -> (Vec<IntVec>, Vec<IntVec>) {
    let mut lin: Vec<IntVec> = crate::linalg::IntMatrix::identity(n).to_rows();
    let mut rays: Vec<IntVec> = Vec::new();
    let mut processed: Vec<IntVec> = Vec::new();

    for a in ineqs {
        if is_zero(a) {
            continue;
        }
        if let Some(pos) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lin.remove(pos);
            if dot(a, &l).is_negative() {
                l = l.iter().map(|x| -x).collect();
            }
            let al = dot(a, &l);
            lin = lin
                .iter()
                .map(|x| combine(&al, x, &-dot(a, x), &l))
                .collect();
            rays = rays
                .iter()
                .map(|x| combine(&al, x, &-dot(a, x), &l))
                .collect();
            rays.push(make_primitive(&l));
            processed.push(a.clone());
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| dot(a, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            processed.push(a.clone());
            continue;
        }
        let d = n - lin.len();
        let tight: Vec<Vec<usize>> = rays
            .iter()
            .map(|r| {
                (0..processed.len())
                    .filter(|&k| dot(&processed[k], r).is_zero())
                    .collect()
            })
            .collect();
        let mut next: Vec<IntVec> = (0..rays.len())
            .filter(|i| !vals[*i].is_negative())
            .map(|i| rays[i].clone())
            .collect();
        for &p in &pos {
            for &q in &neg {
                let common: Vec<usize> = tight[p]
                    .iter()
                    .copied()
                    .filter(|k| tight[q].contains(k))
                    .collect();
                if d >= 2 && common.len() + 2 < d {
                    continue;
                }
                let rows: Vec<IntVec> = common.iter().map(|&k| processed[k].clone()).collect();
                if rank(&rows) + 2 != d {
                    continue;
                }
                let v = combine(&vals[p], &rays[q], &-vals[q].clone(), &rays[p]);
                next.push(make_primitive(&v));
            }
        }
        next.sort();
        next.dedup();
        rays = next;
        processed.push(a.clone());
    }
    (lin, rays)
}

/// `s·x + t·y`, made primitive.
fn combine(s: &BigInt, x: &[BigInt], t: &BigInt, y: &[BigInt]) -> IntVec {
    let v: IntVec = x.iter().zip(y).map(|(a, b)| s * a + t * b).collect();
    make_primitive(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ivec;

    #[test]
    fn dual_examples() {
        let orth = RatCone::from_i64(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(orth.dual(), orth);
        assert_eq!(RatCone::zero(2).dual(), RatCone::full_space(2));
        let half = RatCone::from_i64(2, &[&[1, 0], &[0, 1], &[0, -1]]);
        assert_eq!(half.dual(), RatCone::from_i64(2, &[&[1, 0]]));
        assert_eq!(half.dual().dual(), half);
    }

    #[test]
    fn canonical_form_drops_interior_generators() {
        let c = RatCone::from_i64(2, &[&[1, 0], &[1, 1], &[0, 2], &[2, 0]]);
        assert_eq!(c.generators(), &[ivec(&[0, 1]), ivec(&[1, 0])]);
    }

    #[test]
    fn face_counts() {
        let c = RatCone::from_i64(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(
            c.faces(1),
            vec![
                RatCone::from_i64(2, &[&[0, 1]]),
                RatCone::from_i64(2, &[&[1, 0]])
            ]
        );
        let s = RatCone::from_i64(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(s.all_faces().len(), 8);
        let sq = RatCone::from_i64(3, &[&[0, 0, 1], &[1, 0, 1], &[1, 1, 1], &[0, 1, 1]]);
        assert_eq!(sq.faces(2).len(), 4);
        assert_eq!(sq.faces(1).len(), 4);
        assert_eq!(sq.all_faces().len(), 10);
    }

    #[test]
    fn membership_examples() {
        let c = RatCone::from_i64(2, &[&[1, 0], &[0, 1]]);
        assert!(c.contains(&ivec(&[1, 1]), Membership::Interior));
        assert!(!c.contains(&ivec(&[1, 0]), Membership::Interior));
        assert!(c.contains(&ivec(&[1, 0]), Membership::Closed));
        assert!(!c.contains(&ivec(&[-1, 0]), Membership::Closed));
        let z = RatCone::zero(2);
        assert!(z.contains(&ivec(&[0, 0]), Membership::Interior));
    }

    #[test]
    fn strict_convexity() {
        assert!(!RatCone::from_i64(2, &[&[1, 0], &[-1, 0]]).is_strictly_convex());
        assert!(RatCone::from_i64(2, &[&[1, 0], &[0, 1]]).is_strictly_convex());
        assert!(RatCone::zero(2).is_strictly_convex());
    }

    #[test]
    fn intersection_of_quadrants() {
        let a = RatCone::from_i64(2, &[&[1, 0], &[0, 1]]);
        let b = RatCone::from_i64(2, &[&[1, 0], &[0, -1]]);
        assert_eq!(a.intersection(&b), RatCone::from_i64(2, &[&[1, 0]]));
        let c = RatCone::from_i64(2, &[&[1, 1]]);
        assert!(!c.is_face_of(&a));
        assert!(RatCone::from_i64(2, &[&[1, 0]]).is_face_of(&a));
    }

    #[test]
    fn dimensions() {
        assert_eq!(RatCone::zero(3).dim(), 0);
        assert_eq!(RatCone::full_space(3).dim(), 3);
        assert_eq!(
            RatCone::from_i64(3, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0]]).dim(),
            2
        );
        assert_eq!(RatCone::from_i64(2, &[&[1, 0], &[0, 1], &[0, -1]]).dim(), 2);
    }
}
