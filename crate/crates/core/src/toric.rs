//! Intersection theory on complete simplicial toric fans.
//!
//! Classes are rational combinations of orbit closures `V(σ)`, keyed by the
//! sorted ray indices of `σ`. Products with a divisor `D_v` use the
//! transverse rule when `v ∉ σ` and move `D_v` off `σ` by a principal
//! divisor otherwise.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fan::ColoredFan;
use crate::linalg::{dot_mixed, saturation_and_complement, solve, to_rat, IntVec, RatVec};

/// A codimension-`k` cycle class: `Σ c_σ V(σ)` over cones of dimension `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycleClass {
    pub codim: usize,
    pub terms: BTreeMap<Vec<usize>, BigRational>,
}

impl CycleClass {
    pub fn zero(codim: usize) -> Self {
        CycleClass {
            codim,
            terms: BTreeMap::new(),
        }
    }

    pub fn orbit(cone: Vec<usize>) -> Self {
        let codim = cone.len();
        let mut terms = BTreeMap::new();
        terms.insert(cone, BigRational::one());
        CycleClass { codim, terms }
    }

    fn add_term(&mut self, cone: Vec<usize>, c: BigRational) {
        let e = self.terms.entry(cone).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &CycleClass) -> CycleClass {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> CycleClass {
        let mut out = CycleClass::zero(self.codim);
        if !s.is_zero() {
            for (k, v) in &self.terms {
                out.terms.insert(k.clone(), v * s);
            }
        }
        out
    }

    /// Sum of coefficients; the degree of a zero-cycle.
    pub fn degree(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A complete simplicial fan with its cones and multiplicities.
#[derive(Clone, Debug)]
pub struct ToricFan {
    pub fan: ColoredFan,
    mult: BTreeMap<Vec<usize>, BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NefkResult {
    pub equal: bool,
    /// First negative pairing `(τ, σ, V(τ)·V(σ))` in lexicographic order.
    pub certificate: Option<(Vec<usize>, Vec<usize>, BigRational)>,
}

impl ToricFan {
    /// Colors are dropped; the underlying fan must be valid, complete and
    /// simplicial.
    pub fn new(fan: &ColoredFan) -> Result<ToricFan> {
        let fan = fan.uncolored();
        fan.require_valid()?;
        if !fan.support_unchecked().complete {
            return Err(Error::NotComplete);
        }
        if let Some(w) = fan.factoriality_unchecked().q_factorial_witness {
            return Err(Error::NotQFactorial(w));
        }
        let mut mult = BTreeMap::new();
        for c in &fan.maximal_cones {
            for f in fan.face_ray_sets(&c.rays) {
                if let std::collections::btree_map::Entry::Vacant(slot) = mult.entry(f) {
                    let m = fan.multiplicity(slot.key())?;
                    slot.insert(m);
                }
            }
        }
        Ok(ToricFan { fan, mult })
    }

    pub fn dim(&self) -> usize {
        self.fan.lattice_rank
    }

    pub fn contains(&self, cone: &[usize]) -> bool {
        self.mult.contains_key(cone)
    }

    pub fn mult(&self, cone: &[usize]) -> Result<&BigInt> {
        self.mult
            .get(cone)
            .ok_or_else(|| Error::ConeNotInFan(cone.to_vec()))
    }

    /// All cones of dimension `k`, sorted.
    pub fn cones_of_dim(&self, k: usize) -> Vec<Vec<usize>> {
        self.mult.keys().filter(|c| c.len() == k).cloned().collect()
    }

    fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
        let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
        u.sort();
        u
    }

    fn ratio(&self, num: &[&BigInt], den: &BigInt) -> BigRational {
        let n: BigInt = num.iter().copied().product();
        BigRational::new(n, den.clone())
    }

    pub fn transverse_product(&self, sigma: &[usize], tau: &[usize]) -> Result<CycleClass> {
        let ms = self.mult(sigma)?;
        let mt = self.mult(tau)?;
        if sigma.iter().any(|r| tau.contains(r)) {
            return Err(Error::OverlappingCones(sigma.to_vec(), tau.to_vec()));
        }
        let gamma = Self::union(sigma, tau);
        let mut out = CycleClass::zero(gamma.len());
        if let Some(mg) = self.mult.get(&gamma) {
            out.add_term(gamma.clone(), self.ratio(&[ms, mt], mg));
        }
        Ok(out)
    }

    /// `m ∈ M_Q` with `⟨m, v⟩ = 1`, vanishing on the other rays of `τ` and on
    /// a fixed lattice complement of `span(τ)`.
    fn local_character(&self, v: usize, tau: &[usize]) -> RatVec {
        let n = self.dim();
        let vecs: Vec<IntVec> = tau.iter().map(|&r| self.fan.rays[r].clone()).collect();
        let (_, complement) = saturation_and_complement(n, &vecs);
        let mut rows: Vec<RatVec> = vecs.iter().map(|x| to_rat(x)).collect();
        let mut rhs: RatVec = tau
            .iter()
            .map(|&r| {
                if r == v {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        for c in &complement {
            rows.push(to_rat(c));
            rhs.push(BigRational::zero());
        }
        solve(&rows, n, &rhs).expect("simplicial cone")
    }

    pub fn divisor_dot_orbit(&self, v: usize, tau: &[usize]) -> Result<CycleClass> {
        let mt = self.mult(tau)?.clone();
        if v >= self.fan.rays.len() {
            return Err(Error::ConeNotInFan(vec![v]));
        }
        let mut out = CycleClass::zero(tau.len() + 1);
        if !tau.contains(&v) {
            let g = Self::union(tau, &[v]);
            if let Some(mg) = self.mult.get(&g) {
                out.add_term(g.clone(), BigRational::new(mt, mg.clone()));
            }
            return Ok(out);
        }
        let m = self.local_character(v, tau);
        for w in 0..self.fan.rays.len() {
            if tau.contains(&w) {
                continue;
            }
            let g = Self::union(tau, &[w]);
            if let Some(mg) = self.mult.get(&g) {
                let c =
                    -dot_mixed(&self.fan.rays[w], &m) * BigRational::new(mt.clone(), mg.clone());
                if !c.is_zero() {
                    out.add_term(g, c);
                }
            }
        }
        Ok(out)
    }

    pub fn divisor_dot_cycle(&self, v: usize, z: &CycleClass) -> Result<CycleClass> {
        let mut out = CycleClass::zero(z.codim + 1);
        for (cone, c) in &z.terms {
            out = out.add(&self.divisor_dot_orbit(v, cone)?.scale(c));
        }
        Ok(out)
    }

    /// Product with a divisor given by one coefficient per ray.
    pub fn combination_dot_cycle(
        &self,
        coeffs: &[BigRational],
        z: &CycleClass,
    ) -> Result<CycleClass> {
        let mut out = CycleClass::zero(z.codim + 1);
        for (v, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.divisor_dot_cycle(v, z)?.scale(c));
            }
        }
        Ok(out)
    }

    /// Degree of `D_{v₁} ⋯ D_{v_k} · V(start)`, which must be a zero-cycle.
    pub fn intersection_number(&self, divisors: &[usize], start: &[usize]) -> Result<BigRational> {
        self.mult(start)?;
        if divisors.len() + start.len() != self.dim() {
            return Err(Error::NotTopDegree);
        }
        let mut z = CycleClass::orbit(start.to_vec());
        for &v in divisors {
            z = self.divisor_dot_cycle(v, &z)?;
        }
        Ok(z.degree())
    }

    /// `V(τ) · V(σ)` for cones of complementary dimension.
    pub fn orbit_pairing(&self, tau: &[usize], sigma: &[usize]) -> Result<BigRational> {
        let mt = BigRational::from_integer(self.mult(tau)?.clone());
        Ok(mt * self.intersection_number(tau, sigma)?)
    }

    /// `Nef^k = Psef^k`: every `V(τ)` with `dim τ = k` is nonnegative on
    /// every `V(σ)` with `dim σ = n − k`.
    pub fn nefk_eq_psefk(&self, k: usize) -> Result<NefkResult> {
        let n = self.dim();
        if k == 0 || k >= n {
            return Err(Error::Unsupported(format!(
                "k = {k} outside 1..{}",
                n.saturating_sub(1)
            )));
        }
        let emb = crate::horo::HorosphericalEmbedding::toric(self.fan.clone());
        if !crate::divisors::Geometry::new(&emb)?.projective()? {
            return Err(Error::NotProjective);
        }
        let taus = self.cones_of_dim(k);
        let sigmas = self.cones_of_dim(n - k);
        let pairs: Vec<(&Vec<usize>, &Vec<usize>)> = taus
            .iter()
            .flat_map(|t| sigmas.iter().map(move |s| (t, s)))
            .collect();
        let values: Vec<Result<Option<BigRational>>> = pairs
            .par_iter()
            .map(|(t, s)| {
                let v = self.orbit_pairing(t, s)?;
                Ok(v.is_negative().then_some(v))
            })
            .collect();
        for ((t, s), v) in pairs.iter().zip(values) {
            if let Some(v) = v? {
                return Ok(NefkResult {
                    equal: false,
                    certificate: Some(((*t).clone(), (*s).clone(), v)),
                });
            }
        }
        Ok(NefkResult {
            equal: true,
            certificate: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p2() -> ToricFan {
        ToricFan::new(&ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -1]],
            &[&[0, 1], &[1, 2], &[0, 2]],
        ))
        .unwrap()
    }

    fn p112() -> ToricFan {
        ToricFan::new(&ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -2]],
            &[&[0, 1], &[1, 2], &[0, 2]],
        ))
        .unwrap()
    }

    fn f1() -> ToricFan {
        ToricFan::new(&ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, 1], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
        ))
        .unwrap()
    }

    fn p1xp1() -> ToricFan {
        ToricFan::new(&ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
        ))
        .unwrap()
    }

    #[test]
    fn transverse_products() {
        let f = p112();
        let a = f.transverse_product(&[0], &[1]).unwrap();
        assert_eq!(a.terms[&vec![0, 1]], q(1, 1));
        let b = f.transverse_product(&[0], &[2]).unwrap();
        assert_eq!(b.terms[&vec![0, 2]], q(1, 2));
        assert!(matches!(
            f.transverse_product(&[0], &[0, 1]),
            Err(Error::OverlappingCones(..))
        ));
        let p = p2();
        assert_eq!(
            p.transverse_product(&[0], &[1]).unwrap().terms[&vec![0, 1]],
            q(1, 1)
        );
    }

    #[test]
    fn divisor_times_orbit() {
        assert_eq!(p2().divisor_dot_orbit(0, &[1]).unwrap().degree(), q(1, 1));
        assert_eq!(f1().divisor_dot_orbit(1, &[1]).unwrap().degree(), q(-1, 1));
        assert!(p1xp1().divisor_dot_orbit(0, &[0]).unwrap().is_zero());
    }

    #[test]
    fn intersection_numbers() {
        assert_eq!(p2().intersection_number(&[0, 0], &[]).unwrap(), q(1, 1));
        assert_eq!(p1xp1().intersection_number(&[0, 1], &[]).unwrap(), q(1, 1));
        assert_eq!(p1xp1().intersection_number(&[0, 0], &[]).unwrap(), q(0, 1));
        assert_eq!(f1().intersection_number(&[1, 1], &[]).unwrap(), q(-1, 1));
        assert_eq!(p112().intersection_number(&[0, 0], &[]).unwrap(), q(1, 2));
        assert_eq!(
            p2().intersection_number(&[0], &[]),
            Err(Error::NotTopDegree)
        );
    }

    #[test]
    fn nefk_small() {
        assert!(p2().nefk_eq_psefk(1).unwrap().equal);
        let r = f1().nefk_eq_psefk(1).unwrap();
        assert!(!r.equal);
        assert_eq!(r.certificate.unwrap(), (vec![1], vec![1], q(-1, 1)));
    }
}
