//! B-stable divisors, class groups, piecewise linear functions, B-stable
//! curves and the comparison of nef and pseudo-effective divisor cones.
//!
//! Everything here is computed from a [`Geometry`], which caches the walls,
//! the divisor list `𝔅(X)` and the per-cone divisor sets of a complete
//! embedding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cone::{Membership, RatCone};
use crate::error::{Error, Result};
use crate::fan::{describe_cone, ColorId, ColoredFan, DivisorId, FactorialityProfile, Wall};
use crate::horo::HorosphericalEmbedding;
use crate::linalg::{
    clear_denominators, dot, dot_mixed, is_zero, make_primitive, rank_rat, smith_normal_form,
    solve, to_rat, IntMatrix, IntVec, RatVec,
};

/// Rational combination of B-stable prime divisors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BDivisor {
    pub coefficients: BTreeMap<DivisorId, BigRational>,
}

impl BDivisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn prime(d: DivisorId) -> Self {
        Self::from_terms([(d, BigRational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (DivisorId, BigRational)>) -> Self {
        let mut out = BDivisor::zero();
        for (d, c) in terms {
            *out.coefficients.entry(d).or_insert_with(BigRational::zero) += c;
        }
        out.coefficients.retain(|_, c| !c.is_zero());
        out
    }

    pub fn coefficient(&self, d: &DivisorId) -> BigRational {
        self.coefficients
            .get(d)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &BDivisor) -> BDivisor {
        Self::from_terms(
            self.coefficients
                .iter()
                .chain(&other.coefficients)
                .map(|(d, c)| (d.clone(), c.clone())),
        )
    }

    pub fn scale(&self, k: &BigRational) -> BDivisor {
        Self::from_terms(self.coefficients.iter().map(|(d, c)| (d.clone(), c * k)))
    }
}

impl fmt::Display for BDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coefficients
            .iter()
            .map(|(d, c)| {
                if c.is_one() {
                    format!("D[{d}]")
                } else {
                    format!("{c}*D[{d}]")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// One covector `χ_Y ∈ M_Q` per maximal cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlFunction {
    pub chi: Vec<RatVec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlResult {
    pub pl: PlFunction,
    pub cartier: bool,
    pub q_cartier: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveClass {
    /// The curve of a wall, given by the wall's ray indices.
    Wall(Vec<usize>),
    /// `C_{D,Y}` for a color `D` and the closed orbit of maximal cone `Y`.
    ColorCurve(ColorId, usize),
    /// `C_D` for `D ∈ 𝔇₀`.
    ZeroColorCurve(ColorId),
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveClass::Wall(r) => write!(f, "wall{r:?}"),
            CurveClass::ColorCurve(d, y) => write!(f, "C({d}, cone {y})"),
            CurveClass::ZeroColorCurve(d) => write!(f, "C({d})"),
        }
    }
}

/// Intersection numbers with the Pic_Q basis.
pub type NumClass = RatVec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGroup {
    pub free_rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
    /// Rows `ρ(D)` for `D ∈ 𝔅(X)`: the map `M → Z^𝔅(X)`.
    pub presentation: Vec<IntVec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violating {
    pub divisor: DivisorId,
    pub curve: CurveClass,
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NefPsefResult {
    pub equal: bool,
    pub certificate: Option<Violating>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Positivity {
    pub nef: bool,
    pub ample: bool,
}

/// Cached combinatorics of a complete embedding.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub emb: HorosphericalEmbedding,
    pub walls: Vec<Wall>,
    pub factoriality: FactorialityProfile,
    /// `𝔅(X)`: boundary divisors by ray, then every color.
    pub divisors: Vec<DivisorId>,
    pub rho: Vec<IntVec>,
    /// Per maximal cone: indices into `divisors` of `𝔅_Y`.
    pub cone_divisors: Vec<Vec<usize>>,
    /// Per maximal cone: `𝔇_Y`.
    pub cone_colors: Vec<BTreeSet<ColorId>>,
    pub d0: BTreeSet<ColorId>,
}

impl Geometry {
    /// Requires a valid, complete embedding.
    pub fn new(emb: &HorosphericalEmbedding) -> Result<Geometry> {
        emb.require_valid()?;
        let fan = &emb.fan;
        let support = fan.support_unchecked();
        if !support.complete {
            return Err(Error::NotComplete);
        }
        let mut divisors = Vec::new();
        let mut rho = Vec::new();
        let uncolored = fan.uncolored_rays();
        for &i in &uncolored {
            divisors.push(DivisorId::Boundary(i));
            rho.push(fan.rays[i].clone());
        }
        for (c, v) in &fan.color_table {
            divisors.push(DivisorId::Color(c.clone()));
            rho.push(v.clone());
        }
        let index: BTreeMap<DivisorId, usize> = divisors
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, d)| (d, i))
            .collect();
        let mut cone_divisors = Vec::new();
        let mut cone_colors = Vec::new();
        for c in &fan.maximal_cones {
            let colors = fan.colors_of_cone_unchecked(&c.rays)?;
            let mut ids: Vec<usize> = c
                .rays
                .iter()
                .filter(|r| uncolored.contains(r))
                .map(|&r| index[&DivisorId::Boundary(r)])
                .collect();
            ids.extend(
                colors
                    .iter()
                    .map(|col| index[&DivisorId::Color(col.clone())]),
            );
            ids.sort();
            cone_divisors.push(ids);
            cone_colors.push(colors);
        }
        let d0 = fan
            .color_table
            .iter()
            .filter(|(_, v)| is_zero(v))
            .map(|(c, _)| c.clone())
            .collect();
        Ok(Geometry {
            emb: emb.clone(),
            walls: support.walls,
            factoriality: fan.factoriality_unchecked(),
            divisors,
            rho,
            cone_divisors,
            cone_colors,
            d0,
        })
    }

    pub fn fan(&self) -> &ColoredFan {
        &self.emb.fan
    }

    pub fn rank(&self) -> usize {
        self.emb.fan.lattice_rank
    }

    fn require_q_factorial(&self) -> Result<()> {
        match self.factoriality.q_factorial_witness {
            Some(w) => Err(Error::NotQFactorial(w)),
            None => Ok(()),
        }
    }

    pub fn divisor_index(&self, d: &DivisorId) -> Result<usize> {
        self.divisors
            .iter()
            .position(|x| x == d)
            .ok_or_else(|| Error::UnknownDivisor(d.to_string()))
    }

    /// Looks a divisor up by its display name (`r3` or a color label).
    pub fn parse_divisor(&self, name: &str) -> Result<DivisorId> {
        self.divisors
            .iter()
            .find(|d| d.to_string() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownDivisor(name.to_string()))
    }

    /// Parses sums like `2*r0 + a2 - 1/2*r1`.
    pub fn parse_bdivisor(&self, expr: &str) -> Result<BDivisor> {
        let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::UnknownDivisor(expr.to_string());
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i] == b'+' || bytes[i] == b'-' {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        let mut out = BDivisor::zero();
        for t in terms {
            let (sign, body) = match t.as_bytes().first() {
                Some(b'-') => (-1, &t[1..]),
                Some(b'+') => (1, &t[1..]),
                _ => (1, t),
            };
            let (coef, name) = match body.split_once('*') {
                Some((c, n)) => (c.parse::<BigRational>().map_err(|_| bad())?, n),
                None => (BigRational::one(), body),
            };
            if name.is_empty() {
                return Err(bad());
            }
            let d = BDivisor::prime(self.parse_divisor(name)?);
            out = out.add(&d.scale(&(coef * BigRational::from_integer(sign.into()))));
        }
        Ok(out)
    }

    pub fn class_group(&self) -> ClassGroup {
        let r = self.rank();
        let presentation = self.rho.clone();
        if presentation.is_empty() || r == 0 {
            return ClassGroup {
                free_rank: presentation.len(),
                torsion: Vec::new(),
                presentation,
            };
        }
        let snf = smith_normal_form(&IntMatrix::from_rows(r, &presentation));
        let f = snf.invariant_factors();
        ClassGroup {
            free_rank: presentation.len() - f.len(),
            torsion: f.into_iter().filter(|d| !d.is_one()).collect(),
            presentation,
        }
    }

    fn check_divisor(&self, delta: &BDivisor) -> Result<()> {
        for d in delta.coefficients.keys() {
            self.divisor_index(d)?;
        }
        Ok(())
    }

    pub fn pl_function(&self, delta: &BDivisor) -> Result<PlResult> {
        self.check_divisor(delta)?;
        let r = self.rank();
        let mut chi = Vec::new();
        for (y, ids) in self.cone_divisors.iter().enumerate() {
            let a: Vec<RatVec> = ids.iter().map(|&i| to_rat(&self.rho[i])).collect();
            let b: RatVec = ids
                .iter()
                .map(|&i| delta.coefficient(&self.divisors[i]))
                .collect();
            match solve(&a, r, &b) {
                Some(x) => chi.push(x),
                None => return Err(Error::Inconsistent(y)),
            }
        }
        let cartier = chi.iter().all(|x| x.iter().all(|c| c.is_integer()));
        Ok(PlResult {
            pl: PlFunction { chi },
            cartier,
            q_cartier: true,
        })
    }

    fn full_dimensional(&self, y: usize) -> bool {
        self.emb.fan.full_dimensional_cones().contains(&y)
    }

    fn wall_by_rays(&self, rays: &[usize]) -> Option<&Wall> {
        self.walls.iter().find(|w| w.rays == rays)
    }

    pub fn check_curve(&self, c: &CurveClass) -> Result<()> {
        match c {
            CurveClass::Wall(rays) => {
                if self.wall_by_rays(rays).is_none() {
                    return Err(Error::InvalidCurve(format!("{rays:?} is not a wall")));
                }
            }
            CurveClass::ColorCurve(d, y) => {
                let rho = self
                    .emb
                    .fan
                    .rho(d)
                    .ok_or_else(|| Error::InvalidCurve(format!("unknown color {d}")))?;
                if is_zero(rho) {
                    return Err(Error::InvalidCurve(format!("color {d} has zero image")));
                }
                if *y >= self.cone_colors.len() || !self.full_dimensional(*y) {
                    return Err(Error::InvalidCurve(format!(
                        "cone {y} is not a closed orbit"
                    )));
                }
                if self.cone_colors[*y].contains(d) {
                    return Err(Error::InvalidCurve(format!("color {d} contains orbit {y}")));
                }
            }
            CurveClass::ZeroColorCurve(d) => {
                if !self.d0.contains(d) {
                    return Err(Error::InvalidCurve(format!("color {d} is not in D0")));
                }
            }
        }
        Ok(())
    }

    /// Primitive `χ_μ ∈ M` vanishing on the wall and positive on `μ₊`,
    /// together with a ray of `μ₊` outside the wall.
    pub fn wall_covector(&self, w: &Wall) -> (IntVec, usize) {
        let fan = &self.emb.fan;
        let r = self.rank();
        let rows: Vec<RatVec> = fan.ray_vectors(&w.rays).iter().map(|v| to_rat(v)).collect();
        let kernel = crate::linalg::rational_kernel(&rows, r);
        debug_assert_eq!(kernel.len(), 1);
        let mut chi = make_primitive(&kernel[0]);
        let out = fan.maximal_cones[w.plus]
            .rays
            .iter()
            .copied()
            .find(|x| !w.rays.contains(x))
            .expect("full-dimensional cone has a ray off its facet");
        if dot(&chi, &fan.rays[out]).is_negative() {
            chi = chi.iter().map(|x| -x).collect();
        }
        (chi, out)
    }

    /// Intersection number `δ · C`.
    pub fn intersect_curve(&self, delta: &BDivisor, c: &CurveClass) -> Result<BigRational> {
        self.check_curve(c)?;
        let pl = match self.pl_function(delta) {
            Ok(p) => p.pl,
            Err(Error::Inconsistent(_)) => return Err(Error::NotQCartier),
            Err(e) => return Err(e),
        };
        Ok(self.intersect_with(delta, &pl, c))
    }

    fn intersect_with(&self, delta: &BDivisor, pl: &PlFunction, c: &CurveClass) -> BigRational {
        match c {
            CurveClass::Wall(rays) => {
                let w = self.wall_by_rays(rays).expect("checked wall");
                let (chi, out) = self.wall_covector(w);
                let v = &self.emb.fan.rays[out];
                let diff: RatVec = pl.chi[w.plus]
                    .iter()
                    .zip(&pl.chi[w.minus])
                    .map(|(a, b)| a - b)
                    .collect();
                dot_mixed(v, &diff) / BigRational::from_integer(dot(&chi, v))
            }
            CurveClass::ColorCurve(d, y) => {
                let rho = &self.emb.fan.color_table[d];
                delta.coefficient(&DivisorId::Color(d.clone())) - dot_mixed(rho, &pl.chi[*y])
            }
            CurveClass::ZeroColorCurve(d) => delta.coefficient(&DivisorId::Color(d.clone())),
        }
    }

    /// Walls in order, then `C_{D,Y}` by cone and color, then `C_D` for
    /// `D ∈ 𝔇₀`.
    pub fn curves(&self) -> Vec<CurveClass> {
        let mut out: Vec<CurveClass> = self
            .walls
            .iter()
            .map(|w| CurveClass::Wall(w.rays.clone()))
            .collect();
        let fan = &self.emb.fan;
        for y in fan.full_dimensional_cones() {
            for (d, v) in &fan.color_table {
                if !is_zero(v) && !self.cone_colors[y].contains(d) {
                    out.push(CurveClass::ColorCurve(d.clone(), y));
                }
            }
        }
        out.extend(
            self.d0
                .iter()
                .map(|d| CurveClass::ZeroColorCurve(d.clone())),
        );
        out
    }

    /// Lexicographically first subset of `𝔅(X)` whose classes form a basis
    /// of `Pic_Q`.
    pub fn pic_basis(&self) -> Vec<usize> {
        let k = self.divisors.len();
        let r = self.rank();
        let mut span: Vec<RatVec> = (0..r)
            .map(|j| {
                self.rho
                    .iter()
                    .map(|v| BigRational::from_integer(v[j].clone()))
                    .collect()
            })
            .collect();
        let mut current = rank_rat(&span);
        let mut basis = Vec::new();
        for i in 0..k {
            let mut e = vec![BigRational::zero(); k];
            e[i] = BigRational::one();
            span.push(e);
            let next = rank_rat(&span);
            if next > current {
                basis.push(i);
                current = next;
            } else {
                span.pop();
            }
        }
        basis
    }

    /// Matrix of intersection numbers: `table[i][j] = D_i · C_j` for every
    /// divisor of `𝔅(X)` and every curve of [`Geometry::curves`].
    pub fn pairing_table(&self) -> Result<(Vec<CurveClass>, Vec<Vec<BigRational>>)> {
        self.require_q_factorial()?;
        let curves = self.curves();
        let mut table = Vec::new();
        for d in &self.divisors {
            let delta = BDivisor::prime(d.clone());
            let pl = self.pl_function(&delta)?.pl;
            table.push(
                curves
                    .iter()
                    .map(|c| self.intersect_with(&delta, &pl, c))
                    .collect(),
            );
        }
        Ok((curves, table))
    }

    pub fn curve_numclasses(&self) -> Result<Vec<(CurveClass, NumClass)>> {
        let (curves, table) = self.pairing_table()?;
        let basis = self.pic_basis();
        Ok(curves
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                let v = basis.iter().map(|&b| table[b][j].clone()).collect();
                (c, v)
            })
            .collect())
    }

    /// Whether some divisor is positive on every curve.
    pub fn projective(&self) -> Result<bool> {
        let classes = self.curve_numclasses()?;
        let dim = self.pic_basis().len();
        if classes.iter().any(|(_, v)| v.iter().all(Zero::is_zero)) {
            return Ok(false);
        }
        let gens: Vec<IntVec> = classes.iter().map(|(_, v)| clear_denominators(v)).collect();
        Ok(RatCone::new(dim, &gens).is_strictly_convex())
    }

    fn require_projective(&self) -> Result<()> {
        if self.projective()? {
            Ok(())
        } else {
            Err(Error::NotProjective)
        }
    }

    /// Equality `Nef¹ = Psef¹`: every divisor of `𝔅(X)` is nonnegative on
    /// every curve. The certificate is the first negative pair, scanning
    /// curves in order and divisors within each curve.
    pub fn nef1_eq_psef1(&self) -> Result<NefPsefResult> {
        self.require_projective()?;
        let (curves, table) = self.pairing_table()?;
        for (j, c) in curves.iter().enumerate() {
            for (i, d) in self.divisors.iter().enumerate() {
                if table[i][j].is_negative() {
                    return Ok(NefPsefResult {
                        equal: false,
                        certificate: Some(Violating {
                            divisor: d.clone(),
                            curve: c.clone(),
                            value: table[i][j].clone(),
                        }),
                    });
                }
            }
        }
        Ok(NefPsefResult {
            equal: true,
            certificate: None,
        })
    }

    pub fn positivity(&self, delta: &BDivisor) -> Result<Positivity> {
        self.require_q_factorial()?;
        self.check_divisor(delta)?;
        let pl = self.pl_function(delta)?.pl;
        let values: Vec<BigRational> = self
            .curves()
            .iter()
            .map(|c| self.intersect_with(delta, &pl, c))
            .collect();
        Ok(Positivity {
            nef: values.iter().all(|v| !v.is_negative()),
            ample: values.iter().all(|v| v.is_positive()),
        })
    }

    /// Coordinates of the class of `δ` in the Pic_Q basis.
    pub fn class_coordinates(&self, delta: &BDivisor) -> Result<RatVec> {
        self.check_divisor(delta)?;
        let basis = self.pic_basis();
        let k = self.divisors.len();
        let r = self.rank();
        // columns: basis unit vectors, then the columns of the presentation
        let ncols = basis.len() + r;
        let a: Vec<RatVec> = (0..k)
            .map(|i| {
                let mut row: RatVec = basis
                    .iter()
                    .map(|&b| {
                        if b == i {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect();
                row.extend(
                    self.rho[i]
                        .iter()
                        .map(|x| BigRational::from_integer(x.clone())),
                );
                row
            })
            .collect();
        let b: RatVec = self.divisors.iter().map(|d| delta.coefficient(d)).collect();
        let x = solve(&a, ncols, &b).expect("basis spans the class group");
        Ok(x[..basis.len()].to_vec())
    }

    /// `Psef¹` in Pic_Q coordinates: generated by the classes of `𝔅(X)`.
    pub fn psef_cone(&self) -> Result<RatCone> {
        let dim = self.pic_basis().len();
        let mut gens = Vec::new();
        for d in &self.divisors {
            gens.push(clear_denominators(
                &self.class_coordinates(&BDivisor::prime(d.clone()))?,
            ));
        }
        Ok(RatCone::new(dim, &gens))
    }

    /// `Nef¹` in Pic_Q coordinates: the dual of the cone of curve classes.
    pub fn nef_cone(&self) -> Result<RatCone> {
        let dim = self.pic_basis().len();
        let gens: Vec<IntVec> = self
            .curve_numclasses()?
            .iter()
            .map(|(_, v)| clear_denominators(v))
            .collect();
        Ok(RatCone::new(dim, &gens).dual())
    }

    pub fn nef_subset_psef(&self) -> Result<bool> {
        Ok(self.psef_cone()?.contains_cone(&self.nef_cone()?))
    }

    /// Whether the class of `δ` lies in the nef cone, via Pic_Q coordinates.
    pub fn class_is_nef(&self, delta: &BDivisor) -> Result<bool> {
        let x = self.class_coordinates(delta)?;
        Ok(self.nef_cone()?.contains_rat(&x, Membership::Closed))
    }

    pub fn describe_curve(&self, c: &CurveClass) -> String {
        let fan = &self.emb.fan;
        match c {
            CurveClass::Wall(r) => format!("wall {}", describe_cone(fan, r)),
            CurveClass::ColorCurve(d, y) => {
                format!(
                    "C({d}, {})",
                    describe_cone(fan, &fan.maximal_cones[*y].rays)
                )
            }
            CurveClass::ZeroColorCurve(d) => format!("C({d})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{ColoredCone, ValuationCone};
    use crate::horo::HorosphericalDatum;
    use crate::linalg::ivec;
    use crate::roots::{DynkinDiagram, Weight};

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn incidence42(blown_up: bool) -> HorosphericalEmbedding {
        let datum = HorosphericalDatum {
            diagram: DynkinDiagram::parse("A4").unwrap(),
            parabolic: BTreeSet::from(["a4".to_string()]),
            central_rank: 0,
            m_basis: vec![Weight::from_pairs(&[("a2", 1), ("a3", -1)], 0)],
        };
        let rho = datum.color_rho().unwrap().rho;
        let plus = if blown_up {
            vec![]
        } else {
            vec![ColorId::from("a2")]
        };
        let fan = ColoredFan {
            lattice_rank: 1,
            rays: vec![ivec(&[1]), ivec(&[-1])],
            color_table: rho,
            maximal_cones: vec![
                ColoredCone::new(vec![0], plus),
                ColoredCone::new(vec![1], [ColorId::from("a3")]),
            ],
            valuation_cone: ValuationCone::FullSpace,
        };
        HorosphericalEmbedding { datum, fan }
    }

    fn toric(rays: &[&[i64]], cones: &[&[usize]]) -> Geometry {
        let n = rays[0].len();
        Geometry::new(&HorosphericalEmbedding::toric(ColoredFan::toric_i64(
            n, rays, cones,
        )))
        .unwrap()
    }

    fn color(s: &str) -> DivisorId {
        DivisorId::Color(ColorId::from(s))
    }

    #[test]
    fn incidence_class_group_and_pl() {
        let g = Geometry::new(&incidence42(false)).unwrap();
        assert_eq!(g.divisors, vec![color("a1"), color("a2"), color("a3")]);
        let cg = g.class_group();
        assert_eq!(cg.free_rank, 2);
        assert!(cg.torsion.is_empty());
        let delta = BDivisor::from_terms([
            (color("a1"), q(5)),
            (color("a2"), q(2)),
            (color("a3"), q(3)),
        ]);
        let pl = g.pl_function(&delta).unwrap();
        assert!(pl.cartier);
        assert_eq!(pl.pl.chi[0], vec![q(2)]);
        assert_eq!(pl.pl.chi[1], vec![q(-3)]);
        assert_eq!(
            g.intersect_curve(&delta, &CurveClass::Wall(vec![]))
                .unwrap(),
            q(5)
        );
        assert_eq!(g.pic_basis(), vec![0, 1]);
    }

    #[test]
    fn incidence_curves() {
        let g = Geometry::new(&incidence42(false)).unwrap();
        let d1 = BDivisor::prime(color("a1"));
        let d2 = BDivisor::prime(color("a2"));
        let zero = CurveClass::ZeroColorCurve(ColorId::from("a1"));
        let wall = CurveClass::Wall(vec![]);
        assert_eq!(g.intersect_curve(&d2, &wall).unwrap(), q(1));
        assert_eq!(g.intersect_curve(&d1, &zero).unwrap(), q(1));
        assert_eq!(g.intersect_curve(&d1, &wall).unwrap(), q(0));
        let classes: BTreeSet<NumClass> = g
            .curve_numclasses()
            .unwrap()
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        assert_eq!(
            classes,
            BTreeSet::from([vec![q(1), q(0)], vec![q(0), q(1)]])
        );
        assert!(g.projective().unwrap());
        assert!(g.nef1_eq_psef1().unwrap().equal);
        let p = g.positivity(&d1.add(&d2)).unwrap();
        assert!(p.nef && p.ample);
        let p = g.positivity(&d1).unwrap();
        assert!(p.nef && !p.ample);
        assert!(g.nef_subset_psef().unwrap());
    }

    #[test]
    fn blowup_has_three_classes() {
        let g = Geometry::new(&incidence42(true)).unwrap();
        assert_eq!(g.class_group().free_rank, 3);
        assert_eq!(g.emb.picard_number().unwrap(), 3);
        let curves = g.curves();
        assert_eq!(curves.len(), 5);
    }

    #[test]
    fn p2_and_f1() {
        let p2 = toric(&[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]);
        assert_eq!(p2.class_group().free_rank, 1);
        let classes = p2.curve_numclasses().unwrap();
        assert!(classes.iter().all(|(_, v)| *v == vec![q(1)]));
        assert!(p2.nef1_eq_psef1().unwrap().equal);
        let zero = p2.pl_function(&BDivisor::zero()).unwrap();
        assert!(zero.cartier);

        let f1 = toric(
            &[&[1, 0], &[0, 1], &[-1, 1], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
        );
        let res = f1.nef1_eq_psef1().unwrap();
        assert!(!res.equal);
        let cert = res.certificate.unwrap();
        assert_eq!(cert.divisor, DivisorId::Boundary(1));
        assert_eq!(cert.curve, CurveClass::Wall(vec![1]));
        assert_eq!(cert.value, q(-1));
        let distinct: BTreeSet<NumClass> = f1
            .curve_numclasses()
            .unwrap()
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        // fiber, exceptional curve and the section of self-intersection one
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn p112_is_q_cartier_but_not_cartier() {
        let g = toric(&[&[1, 0], &[0, 1], &[-1, -2]], &[&[0, 1], &[1, 2], &[0, 2]]);
        let pl = g
            .pl_function(&BDivisor::prime(DivisorId::Boundary(0)))
            .unwrap();
        assert!(pl.q_cartier);
        assert!(!pl.cartier);
    }
}
