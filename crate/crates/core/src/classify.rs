//! Product structures and the classification pipeline for embeddings with
//! `Nef¹ = Psef¹`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::divisors::{Geometry, NefPsefResult};
use crate::error::{Error, Result};
use crate::fan::{ColorId, ColoredCone, ColoredFan, ValuationCone};
use crate::horo::{HorosphericalDatum, HorosphericalEmbedding, SmoothnessProfile};
use crate::linalg::{
    rank, rational_kernel, saturation_and_complement, solve, to_rat, IntMatrix, IntVec, RatVec,
};
use crate::roots::{NodeId, Weight};

/// Number of coarsenings tried before a fan is declared indecomposable.
pub const DEFAULT_MERGE_BUDGET: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectiveProduct {
    /// `[d₁, …, d_ρ]`, one entry per group.
    pub partition: Vec<usize>,
    /// Ray indices of each group, ordered by first ray.
    pub groups: Vec<Vec<usize>>,
    /// Primitive positive relation of each group.
    pub coefficients: Vec<IntVec>,
    /// Smooth with all coefficients one: a product of projective spaces.
    pub exact: bool,
    /// Only a finite cover by a product of projective spaces.
    pub cover: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductDecomposition {
    pub groups: Vec<Vec<usize>>,
    /// Basis of each `Nᵢ`.
    pub sublattices: Vec<Vec<IntVec>>,
    pub colors: Vec<BTreeSet<ColorId>>,
    pub factors: Vec<HorosphericalEmbedding>,
    /// The coarsening search ran out of budget.
    pub budget_exhausted: bool,
}

impl ProductDecomposition {
    pub fn is_indecomposable(&self) -> bool {
        self.factors.len() == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoroReduction {
    pub d1: BTreeSet<ColorId>,
    /// `S \ D1`, in the original labels: the parabolic of the target `G/P₀`.
    pub target_parabolic: BTreeSet<NodeId>,
    pub target_dimension: usize,
    pub fiber: HorosphericalEmbedding,
    /// Fiber node id to original node id.
    pub node_map: BTreeMap<NodeId, NodeId>,
    /// Every weight of `M` vanishes on `D1`.
    pub pairings_vanish_on_d1: bool,
    /// Every weight of `M` vanishes on `I`.
    pub pairings_vanish_on_i: bool,
}

impl HoroReduction {
    /// The fiber fan with colors renamed back to the original node ids.
    pub fn fiber_fan_in_original_labels(&self) -> ColoredFan {
        let rename = |c: &ColorId| ColorId::new(self.node_map[c.as_str()].clone());
        let mut fan = self.fiber.fan.clone();
        fan.color_table = fan
            .color_table
            .iter()
            .map(|(c, v)| (rename(c), v.clone()))
            .collect();
        for c in fan.maximal_cones.iter_mut() {
            c.colors = c.colors.iter().map(rename).collect();
        }
        fan
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineReport {
    pub picard_number: usize,
    pub nef1: NefPsefResult,
    pub d0: BTreeSet<ColorId>,
    /// `𝔇(G/H) \ 𝔇_X = 𝔇₀`, checked when `Nef¹ = Psef¹`.
    pub unattached_is_d0: Option<bool>,
    pub reduction: Option<HoroReduction>,
    pub fiber_decomposition: Option<ProductDecomposition>,
    pub factor_picard_numbers: Option<Vec<usize>>,
    /// Number of factors plus `|𝔇₀|` equals the Picard number.
    pub picard_accounted: Option<bool>,
    /// `𝔇_X = ∅`.
    pub toroidal: bool,
    /// Toroidal with `Nef¹ = Psef¹`: rational homogeneous.
    pub rational_homogeneous: bool,
    pub toric_product: Option<Option<ProjectiveProduct>>,
    pub smoothness: SmoothnessProfile,
}

/// Positive circuits among the given vectors: minimal dependent subsets
/// whose relation has all coefficients positive. Each is returned with its
/// primitive relation.
pub fn positive_circuits(vectors: &[IntVec], n: usize) -> Vec<(Vec<usize>, IntVec)> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    subsets(
        vectors.len(),
        n + 1,
        0,
        &mut current,
        &mut |s: &[usize]| {
            if s.len() < 2 {
                return;
            }
            if let Some(rel) = positive_relation(vectors, s, n) {
                out.push((s.to_vec(), rel));
            }
        },
    );
    out
}

fn subsets(m: usize, max: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    f(cur);
    if cur.len() == max {
        return;
    }
    for i in start..m {
        cur.push(i);
        subsets(m, max, i + 1, cur, f);
        cur.pop();
    }
}

/// The primitive relation of `s` if `s` is a circuit with a positive one.
fn positive_relation(vectors: &[IntVec], s: &[usize], n: usize) -> Option<IntVec> {
    let rows: Vec<RatVec> = (0..n)
        .map(|j| {
            s.iter()
                .map(|&i| BigRational::from_integer(vectors[i][j].clone()))
                .collect()
        })
        .collect();
    let ker = rational_kernel(&rows, s.len());
    if ker.len() != 1 {
        return None;
    }
    let k = &ker[0];
    if k.iter().all(|x| x.is_positive()) {
        Some(k.clone())
    } else if k.iter().all(|x| x.is_negative()) {
        Some(k.iter().map(|x| -x).collect())
    } else {
        None
    }
}

/// Connected components of the graph joining rays in a common positive
/// circuit, ordered by smallest member.
fn circuit_components(m: usize, circuits: &[(Vec<usize>, IntVec)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (s, _) in circuits {
        for w in s.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Recognizes fans of products of projective spaces and their finite
/// quotients.
pub fn detect_product_of_projective_spaces(fan: &ColoredFan) -> Result<Option<ProjectiveProduct>> {
    let fan = fan.uncolored();
    fan.require_valid()?;
    if !fan.support_unchecked().complete {
        return Err(Error::NotComplete);
    }
    if let Some(w) = fan.factoriality_unchecked().q_factorial_witness {
        return Err(Error::NotQFactorial(w));
    }
    let n = fan.lattice_rank;
    let m = fan.rays.len();
    let circuits = positive_circuits(&fan.rays, n);
    let groups = circuit_components(m, &circuits);
    if groups.len() + n != m {
        return Ok(None);
    }
    let mut coefficients = Vec::new();
    let mut total_rank = 0;
    for g in &groups {
        match positive_relation(&fan.rays, g, n) {
            Some(rel) => coefficients.push(rel),
            None => return Ok(None),
        }
        total_rank += g.len() - 1;
    }
    if total_rank != n {
        return Ok(None);
    }
    let mut expected: BTreeSet<Vec<usize>> = BTreeSet::from([Vec::new()]);
    for g in &groups {
        let mut next = BTreeSet::new();
        for base in &expected {
            for omit in g {
                let mut c = base.clone();
                c.extend(g.iter().filter(|x| *x != omit));
                c.sort();
                next.insert(c);
            }
        }
        expected = next;
    }
    let actual: BTreeSet<Vec<usize>> = fan.maximal_cones.iter().map(|c| c.rays.clone()).collect();
    if actual != expected {
        return Ok(None);
    }
    let exact = fan.is_smooth() && coefficients.iter().all(|c| c.iter().all(|x| x.is_one()));
    Ok(Some(ProjectiveProduct {
        partition: groups.iter().map(|g| g.len() - 1).collect(),
        groups,
        coefficients,
        exact,
        cover: !exact,
    }))
}

/// Splits an embedding into a product of colored fans, or returns it as a
/// single factor.
pub fn decompose_fan_product(emb: &HorosphericalEmbedding) -> Result<ProductDecomposition> {
    decompose_with_budget(emb, DEFAULT_MERGE_BUDGET)
}

pub fn decompose_with_budget(
    emb: &HorosphericalEmbedding,
    budget: usize,
) -> Result<ProductDecomposition> {
    emb.require_valid()?;
    let fan = &emb.fan;
    if !fan.support_unchecked().complete {
        return Err(Error::NotComplete);
    }
    let unattached = emb.unattached_colors();
    if !unattached.is_empty() {
        return Err(Error::PreconditionFailed(format!(
            "colors {:?} are not attached to any cone",
            unattached.iter().map(|c| c.as_str()).collect::<Vec<_>>()
        )));
    }
    let n = fan.lattice_rank;
    let circuits = positive_circuits(&fan.rays, n);
    let start = circuit_components(fan.rays.len(), &circuits);
    let mut queue: VecDeque<Vec<Vec<usize>>> = VecDeque::from([start]);
    let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut tried = 0;
    while let Some(p) = queue.pop_front() {
        if !seen.insert(p.clone()) {
            continue;
        }
        if tried >= budget {
            break;
        }
        tried += 1;
        if let Some(d) = verify_partition(emb, &p)? {
            return Ok(d);
        }
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let mut merged: Vec<Vec<usize>> = Vec::new();
                let mut both: Vec<usize> = p[i].iter().chain(&p[j]).copied().collect();
                both.sort();
                for (k, g) in p.iter().enumerate() {
                    if k == i {
                        merged.push(both.clone());
                    } else if k != j {
                        merged.push(g.clone());
                    }
                }
                merged.sort();
                queue.push_back(merged);
            }
        }
    }
    let all: Vec<usize> = (0..fan.rays.len()).collect();
    let mut d = verify_partition(emb, &[all])?.expect("a single group always splits");
    d.budget_exhausted = true;
    Ok(d)
}

fn verify_partition(
    emb: &HorosphericalEmbedding,
    groups: &[Vec<usize>],
) -> Result<Option<ProductDecomposition>> {
    let fan = &emb.fan;
    let n = fan.lattice_rank;
    let k = groups.len();
    // sublattices
    let mut bases = Vec::new();
    for g in groups {
        let (sat, _) = saturation_and_complement(n, &fan.ray_vectors(g));
        bases.push(sat);
    }
    let all: Vec<IntVec> = bases.iter().flatten().cloned().collect();
    if all.len() != n || (n > 0 && !IntMatrix::from_rows(n, &all).determinant().abs().is_one()) {
        return Ok(None);
    }
    // colors
    let mut color_group: BTreeMap<ColorId, usize> = BTreeMap::new();
    for (c, rho) in &fan.color_table {
        let owners: Vec<usize> = (0..k)
            .filter(|&i| {
                let mut vs = bases[i].clone();
                vs.push(rho.clone());
                rank(&vs) == bases[i].len()
            })
            .collect();
        match owners.as_slice() {
            [i] => {
                color_group.insert(c.clone(), *i);
            }
            _ => return Ok(None),
        }
    }
    if !emb.is_toric() {
        let comp_of = |c: &ColorId| emb.datum.diagram.locate(c.as_str()).map(|(comp, _)| comp);
        for (a, ga) in &color_group {
            for (b, gb) in &color_group {
                if ga != gb && comp_of(a)? == comp_of(b)? {
                    return Ok(None);
                }
            }
        }
    }
    // cones split into one cone per factor and every product occurs
    let mut parts: Vec<BTreeMap<Vec<usize>, BTreeSet<ColorId>>> = vec![BTreeMap::new(); k];
    let mut tuples = BTreeSet::new();
    for c in &fan.maximal_cones {
        let mut tuple = Vec::new();
        for (i, g) in groups.iter().enumerate() {
            let part: Vec<usize> = c.rays.iter().copied().filter(|r| g.contains(r)).collect();
            let cols: BTreeSet<ColorId> = c
                .colors
                .iter()
                .filter(|x| color_group[*x] == i)
                .cloned()
                .collect();
            match parts[i].get(&part) {
                Some(existing) if *existing != cols => return Ok(None),
                _ => {
                    parts[i].insert(part.clone(), cols);
                }
            }
            tuple.push(part);
        }
        tuples.insert(tuple);
    }
    let product: usize = parts.iter().map(|p| p.len()).product();
    if tuples.len() != fan.maximal_cones.len() || product != tuples.len() {
        return Ok(None);
    }
    // factor data
    let basis_rows: Vec<RatVec> = (0..n)
        .map(|j| {
            all.iter()
                .map(|b| BigRational::from_integer(b[j].clone()))
                .collect()
        })
        .collect();
    let coords = |x: &IntVec| -> Vec<BigInt> {
        let c = solve(&basis_rows, n, &to_rat(x)).expect("unimodular basis");
        c.iter().map(|v| v.to_integer()).collect()
    };
    let mut offsets = Vec::new();
    let mut off = 0;
    for b in &bases {
        offsets.push(off);
        off += b.len();
    }
    let dual = dual_weights(emb, &all)?;
    let mut factors = Vec::new();
    let mut colors = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let ri = bases[i].len();
        let local = |x: &IntVec| -> IntVec { coords(x)[offsets[i]..offsets[i] + ri].to_vec() };
        let rays: Vec<IntVec> = g.iter().map(|&r| local(&fan.rays[r])).collect();
        let color_table: BTreeMap<ColorId, IntVec> = color_group
            .iter()
            .filter(|(_, gi)| **gi == i)
            .map(|(c, _)| (c.clone(), local(&fan.color_table[c])))
            .collect();
        let maximal_cones = parts[i]
            .iter()
            .map(|(p, cols)| {
                ColoredCone::new(
                    p.iter()
                        .map(|r| g.iter().position(|x| x == r).unwrap())
                        .collect(),
                    cols.iter().cloned(),
                )
            })
            .collect();
        let factor_fan = ColoredFan {
            lattice_rank: ri,
            rays,
            color_table: color_table.clone(),
            maximal_cones,
            valuation_cone: ValuationCone::FullSpace,
        };
        let datum = if emb.is_toric() {
            HorosphericalDatum::torus(ri)
        } else {
            let own: BTreeSet<NodeId> = color_table.keys().map(|c| c.0.clone()).collect();
            HorosphericalDatum {
                diagram: emb.datum.diagram.clone(),
                parabolic: emb
                    .datum
                    .diagram
                    .nodes()
                    .into_iter()
                    .filter(|x| !own.contains(x))
                    .collect(),
                central_rank: emb.datum.central_rank,
                m_basis: dual[offsets[i]..offsets[i] + ri].to_vec(),
            }
        };
        colors.push(color_table.keys().cloned().collect());
        factors.push(HorosphericalEmbedding {
            datum,
            fan: factor_fan,
        });
    }
    Ok(Some(ProductDecomposition {
        groups: groups.to_vec(),
        sublattices: bases,
        colors,
        factors,
        budget_exhausted: false,
    }))
}

/// Weights dual to the lattice basis `basis` of `N`: the `k`-th weight
/// pairs to `δ_{jk}` with the `j`-th basis vector.
fn dual_weights(emb: &HorosphericalEmbedding, basis: &[IntVec]) -> Result<Vec<Weight>> {
    let n = basis.len();
    let mut out = Vec::new();
    for k in 0..n {
        // χ'_k = Σ_j c_j χ_j with Σ_j c_j b_l[j] = δ_{kl}
        let rows: Vec<RatVec> = basis.iter().map(|b| to_rat(b)).collect();
        let rhs: RatVec = (0..n)
            .map(|l| {
                if l == k {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        let c = solve(&rows, n, &rhs).ok_or(Error::DependentInput)?;
        let mut fundamental: BTreeMap<NodeId, BigInt> = BTreeMap::new();
        let mut central = vec![BigInt::zero(); emb.datum.central_rank];
        for (cj, w) in c.iter().zip(&emb.datum.m_basis) {
            let cj = cj.to_integer();
            for (node, v) in &w.fundamental {
                *fundamental.entry(node.clone()).or_insert_with(BigInt::zero) += &cj * v;
            }
            for (x, v) in central.iter_mut().zip(&w.central) {
                *x += &cj * v;
            }
        }
        out.push(Weight::new(fundamental, central));
    }
    Ok(out)
}

/// The fiber of the morphism to `G/P_{S \ D1}` induced by `D1 ⊆ 𝔇₀`.
pub fn horo_reduce(emb: &HorosphericalEmbedding, d1: &BTreeSet<ColorId>) -> Result<HoroReduction> {
    emb.require_valid()?;
    if !emb.fan.support_unchecked().complete {
        return Err(Error::NotComplete);
    }
    let d0 = emb.color_data()?.d0;
    if let Some(bad) = d1.iter().find(|c| !d0.contains(*c)) {
        return Err(Error::NotInD0(bad.clone()));
    }
    let diagram = &emb.datum.diagram;
    let keep: BTreeSet<NodeId> = diagram
        .nodes()
        .into_iter()
        .filter(|x| !d1.contains(&ColorId::new(x.clone())))
        .collect();
    let (sub, node_map) = diagram.restrict(&keep)?;
    let inverse: BTreeMap<&NodeId, &NodeId> = node_map.iter().map(|(a, b)| (b, a)).collect();
    let parabolic: BTreeSet<NodeId> = emb
        .datum
        .parabolic
        .iter()
        .map(|x| inverse[x].clone())
        .collect();
    let m_basis: Vec<Weight> = emb
        .datum
        .m_basis
        .iter()
        .map(|w| {
            let f = w
                .fundamental
                .iter()
                .filter(|(x, _)| keep.contains(*x))
                .map(|(x, v)| (inverse[x].clone(), v.clone()))
                .collect();
            Weight::new(f, w.central.clone())
        })
        .collect();
    let rename = |c: &ColorId| ColorId::new(inverse[&c.0].clone());
    let mut fan = emb.fan.clone();
    fan.color_table = emb
        .fan
        .color_table
        .iter()
        .filter(|(c, _)| !d1.contains(*c))
        .map(|(c, v)| (rename(c), v.clone()))
        .collect();
    for c in fan.maximal_cones.iter_mut() {
        c.colors = c.colors.iter().map(rename).collect();
    }
    let fiber = HorosphericalEmbedding {
        datum: HorosphericalDatum {
            diagram: sub,
            parabolic,
            central_rank: emb.datum.central_rank,
            m_basis,
        },
        fan,
    };
    let pairings_vanish_on_d1 = emb.datum.m_basis.iter().all(|w| {
        d1.iter()
            .all(|c| w.fundamental.get(c.as_str()).is_none_or(|v| v.is_zero()))
    });
    let pairings_vanish_on_i = emb.datum.m_basis.iter().all(|w| {
        emb.datum
            .parabolic
            .iter()
            .all(|x| w.fundamental.get(x).is_none_or(|v| v.is_zero()))
    });
    fiber.require_valid()?;
    Ok(HoroReduction {
        d1: d1.clone(),
        target_dimension: diagram.dim_flag(&keep)?,
        target_parabolic: keep,
        fiber,
        node_map,
        pairings_vanish_on_d1,
        pairings_vanish_on_i,
    })
}

pub fn classify_pipeline(emb: &HorosphericalEmbedding) -> Result<PipelineReport> {
    let g = Geometry::new(emb)?;
    let picard_number = emb.picard_number()?;
    let nef1 = g.nef1_eq_psef1()?;
    let d0 = g.d0.clone();
    let smoothness = emb.smoothness_profile()?;
    let toroidal = emb.fan.attached_colors().is_empty();
    let mut report = PipelineReport {
        picard_number,
        nef1: nef1.clone(),
        d0: d0.clone(),
        unattached_is_d0: None,
        reduction: None,
        fiber_decomposition: None,
        factor_picard_numbers: None,
        picard_accounted: None,
        toroidal,
        rational_homogeneous: toroidal && nef1.equal,
        toric_product: None,
        smoothness,
    };
    if emb.is_toric() {
        report.toric_product = Some(detect_product_of_projective_spaces(&emb.fan)?);
    }
    if !nef1.equal {
        return Ok(report);
    }
    let unattached_ok = emb.unattached_colors() == d0;
    report.unattached_is_d0 = Some(unattached_ok);
    if !unattached_ok {
        return Ok(report);
    }
    let red = horo_reduce(emb, &d0)?;
    let dec = decompose_fan_product(&red.fiber)?;
    let pics: Vec<usize> = dec
        .factors
        .iter()
        .map(|f| f.picard_number())
        .collect::<Result<_>>()?;
    report.picard_accounted = Some(dec.factors.len() + d0.len() == picard_number);
    report.factor_picard_numbers = Some(pics);
    report.reduction = Some(red);
    report.fiber_decomposition = Some(dec);
    Ok(report)
}
