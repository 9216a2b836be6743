//! Extremal rays of the cone of curves and their contractions.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cone::{Membership, RatCone};
use crate::divisors::{CurveClass, Geometry, NumClass};
use crate::error::{Error, Result};
use crate::fan::{on_ray, ColorId, ColoredCone, ColoredFan, ValidationReport, ValuationCone, Wall};
use crate::horo::HorosphericalEmbedding;
use crate::linalg::{
    clear_denominators, is_zero, make_primitive, rank, saturation_and_complement, solve, to_rat,
    IntVec, RatVec,
};

/// The relation `Σ aᵢeᵢ = 0` of a wall, `a_{r+1} = 1`.
///
/// `rays[..r-1]` span the wall, ordered negative, zero, positive by
/// coefficient; `rays[r-1]` lies in `μ₊` and `rays[r]` in `μ₋`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallData {
    pub wall: Wall,
    pub rays: Vec<usize>,
    pub e: Vec<IntVec>,
    pub a: Vec<BigRational>,
    pub alpha: usize,
    pub beta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalRay {
    pub generator: IntVec,
    pub curves: Vec<CurveClass>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContractionKind {
    Fiber,
    Divisorial,
    Small,
    Unsupported,
}

/// Image of a fiber type contraction in `N' = N / span{eᵢ : aᵢ > 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    /// Basis of the saturated kernel of `N → N'`.
    pub kernel: Vec<IntVec>,
    /// Rows of the projection `N → N'`.
    pub projection: Vec<IntVec>,
    pub fan: ColoredFan,
    /// Colors mapped to zero.
    pub dominant: BTreeSet<ColorId>,
    pub report: ValidationReport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionResult {
    pub kind: ContractionKind,
    /// Ray indices (in the source fan) of the cone of the exceptional orbit.
    pub exceptional_cone: Option<Vec<usize>>,
    /// Generators and colors of the cone of the image orbit.
    pub image_cone: Option<(Vec<IntVec>, BTreeSet<ColorId>)>,
    pub target: Option<HorosphericalEmbedding>,
    pub quotient: Option<Quotient>,
    pub note: Option<String>,
}

impl ContractionResult {
    fn unsupported(note: impl Into<String>) -> Self {
        ContractionResult {
            kind: ContractionKind::Unsupported,
            exceptional_cone: None,
            image_cone: None,
            target: None,
            quotient: None,
            note: Some(note.into()),
        }
    }
}

fn require_projective(g: &Geometry) -> Result<()> {
    if g.projective()? {
        Ok(())
    } else {
        Err(Error::NotProjective)
    }
}

pub fn wall_data(g: &Geometry, wall_rays: &[usize]) -> Result<WallData> {
    let wall = g
        .walls
        .iter()
        .find(|w| w.rays == wall_rays)
        .cloned()
        .ok_or_else(|| Error::NotAWall(wall_rays.to_vec()))?;
    let fan = g.fan();
    let r = fan.lattice_rank;
    let outside = |ci: usize| -> Result<usize> {
        let extra: Vec<usize> = fan.maximal_cones[ci]
            .rays
            .iter()
            .copied()
            .filter(|x| !wall.rays.contains(x))
            .collect();
        match extra.as_slice() {
            [x] if wall.rays.len() + 1 == r => Ok(*x),
            _ => Err(Error::NotQFactorial(ci)),
        }
    };
    let er = outside(wall.plus)?;
    let er1 = outside(wall.minus)?;
    // a_1 e_1 + … + a_r e_r = −e_{r+1}
    let mut cols: Vec<usize> = wall.rays.clone();
    cols.push(er);
    let rows: Vec<RatVec> = (0..r)
        .map(|j| {
            cols.iter()
                .map(|&c| BigRational::from_integer(fan.rays[c][j].clone()))
                .collect()
        })
        .collect();
    let rhs: RatVec = (0..r)
        .map(|j| -BigRational::from_integer(fan.rays[er1][j].clone()))
        .collect();
    let sol = solve(&rows, cols.len(), &rhs).ok_or(Error::NotQFactorial(wall.plus))?;
    let mut on_wall: Vec<(usize, BigRational)> =
        wall.rays.iter().copied().zip(sol.iter().cloned()).collect();
    on_wall.sort_by_key(|(ray, a)| {
        let block = if a.is_negative() {
            0
        } else if a.is_zero() {
            1
        } else {
            2
        };
        (block, *ray)
    });
    let alpha = on_wall.iter().filter(|(_, a)| a.is_negative()).count();
    let beta = alpha + on_wall.iter().filter(|(_, a)| a.is_zero()).count();
    let mut rays: Vec<usize> = on_wall.iter().map(|(x, _)| *x).collect();
    let mut a: Vec<BigRational> = on_wall.into_iter().map(|(_, c)| c).collect();
    rays.push(er);
    a.push(sol[wall.rays.len()].clone());
    rays.push(er1);
    a.push(BigRational::one());
    Ok(WallData {
        e: rays.iter().map(|&i| fan.rays[i].clone()).collect(),
        wall,
        rays,
        a,
        alpha,
        beta,
    })
}

/// Extreme rays of the cone spanned by all curve classes, each with the
/// curves whose class lies on it.
pub fn extremal_rays(g: &Geometry) -> Result<Vec<ExtremalRay>> {
    require_projective(g)?;
    let classes = g.curve_numclasses()?;
    extremal_rays_of(&classes, g.pic_basis().len())
}

pub(crate) fn extremal_rays_of(
    classes: &[(CurveClass, NumClass)],
    dim: usize,
) -> Result<Vec<ExtremalRay>> {
    let ints: Vec<IntVec> = classes.iter().map(|(_, v)| clear_denominators(v)).collect();
    let cone = RatCone::new(dim, &ints);
    Ok(cone
        .rays()
        .iter()
        .map(|ray| ExtremalRay {
            generator: ray.clone(),
            curves: classes
                .iter()
                .zip(&ints)
                .filter(|(_, v)| on_ray(v, ray))
                .map(|((c, _), _)| c.clone())
                .collect(),
        })
        .collect())
}

pub fn contract(g: &Geometry, ray: usize) -> Result<ContractionResult> {
    let rays = extremal_rays(g)?;
    let er = rays.get(ray).ok_or(Error::NotExtremal(ray))?;
    let walls: Vec<&Vec<usize>> = er
        .curves
        .iter()
        .filter_map(|c| match c {
            CurveClass::Wall(w) => Some(w),
            _ => None,
        })
        .collect();
    if let Some(first) = walls.first() {
        let wd = wall_data(g, first)?;
        if wd.alpha == 0 {
            return fiber_contraction(g, &wd);
        }
        return birational_wall_contraction(g, &wd, &walls);
    }
    for c in &er.curves {
        if let CurveClass::ColorCurve(d, y) = c {
            if let Some(res) = color_contraction(g, d, *y)? {
                return Ok(res);
            }
        }
    }
    Ok(ContractionResult::unsupported(
        "the target of a contraction of a curve C_D with D in D0 is not described combinatorially; \
         see the reduction over D0 instead",
    ))
}

fn birational_wall_contraction(
    g: &Geometry,
    wd: &WallData,
    walls: &[&Vec<usize>],
) -> Result<ContractionResult> {
    let fan = g.fan();
    let n = fan.lattice_rank;
    // union-find over maximal cones
    let mut parent: Vec<usize> = (0..fan.maximal_cones.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for w in walls {
        let w = g
            .walls
            .iter()
            .find(|x| &&x.rays == w)
            .expect("wall of the fan");
        let (a, b) = (find(&mut parent, w.plus), find(&mut parent, w.minus));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..fan.maximal_cones.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut new_cones: Vec<(Vec<IntVec>, BTreeSet<ColorId>)> = Vec::new();
    for members in groups.values() {
        let mut gens: Vec<usize> = members
            .iter()
            .flat_map(|&i| fan.maximal_cones[i].rays.iter().copied())
            .collect();
        gens.sort();
        gens.dedup();
        let k = fan.cone(&gens);
        let colors = members
            .iter()
            .flat_map(|&i| fan.maximal_cones[i].colors.iter().cloned())
            .collect();
        new_cones.push((k.rays().to_vec(), colors));
    }
    let target_fan = assemble(n, fan.color_table.clone(), &new_cones);
    let target = HorosphericalEmbedding {
        datum: g.emb.datum.clone(),
        fan: target_fan,
    };
    let exceptional: Vec<usize> = {
        let mut v = wd.rays[..wd.alpha].to_vec();
        v.sort();
        v
    };
    let mut image_idx: Vec<usize> = wd.rays[..wd.alpha].to_vec();
    image_idx.extend_from_slice(&wd.rays[wd.beta..]);
    let image_k = fan.cone(&image_idx);
    let image_colors = fan
        .attached_colors()
        .into_iter()
        .filter(|c| image_k.contains(&fan.color_table[c], Membership::Closed))
        .collect();
    Ok(ContractionResult {
        kind: if wd.alpha == 1 {
            ContractionKind::Divisorial
        } else {
            ContractionKind::Small
        },
        exceptional_cone: Some(exceptional),
        image_cone: Some((image_k.rays().to_vec(), image_colors)),
        target: Some(target),
        quotient: None,
        note: None,
    })
}

/// Builds a fan from cones given by generators, keeping only the rays in
/// use, sorted.
fn assemble(
    n: usize,
    color_table: BTreeMap<ColorId, IntVec>,
    cones: &[(Vec<IntVec>, BTreeSet<ColorId>)],
) -> ColoredFan {
    let mut rays: Vec<IntVec> = cones.iter().flat_map(|(g, _)| g.iter().cloned()).collect();
    rays.sort();
    rays.dedup();
    let index: BTreeMap<&IntVec, usize> = rays.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut maximal: Vec<ColoredCone> = cones
        .iter()
        .map(|(g, c)| ColoredCone::new(g.iter().map(|r| index[r]).collect(), c.iter().cloned()))
        .collect();
    maximal.sort();
    maximal.dedup();
    ColoredFan {
        lattice_rank: n,
        rays: rays.clone(),
        color_table,
        maximal_cones: maximal,
        valuation_cone: ValuationCone::FullSpace,
    }
}

fn fiber_contraction(g: &Geometry, wd: &WallData) -> Result<ContractionResult> {
    let fan = g.fan();
    let n = fan.lattice_rank;
    let positive: Vec<IntVec> =
        wd.e.iter()
            .zip(&wd.a)
            .filter(|(_, a)| a.is_positive())
            .map(|(e, _)| e.clone())
            .collect();
    let (kernel, complement) = saturation_and_complement(n, &positive);
    let basis: Vec<IntVec> = kernel.iter().chain(&complement).cloned().collect();
    let k = kernel.len();
    // coordinates in `basis`; the last n − k are the image in N'
    let cols: Vec<RatVec> = (0..n)
        .map(|j| {
            basis
                .iter()
                .map(|b| BigRational::from_integer(b[j].clone()))
                .collect()
        })
        .collect();
    let project = |x: &IntVec| -> IntVec {
        let c = solve(&cols, n, &to_rat(x)).expect("unimodular basis");
        c[k..].iter().map(|v| v.to_integer()).collect()
    };
    let m = n - k;
    let mut table = BTreeMap::new();
    let mut dominant = BTreeSet::new();
    for (c, rho) in &fan.color_table {
        let p = project(rho);
        if is_zero(&p) {
            dominant.insert(c.clone());
        } else {
            table.insert(c.clone(), p);
        }
    }
    let mut cones: Vec<(Vec<IntVec>, BTreeSet<ColorId>)> = Vec::new();
    for c in &fan.maximal_cones {
        let gens: Vec<IntVec> = c
            .rays
            .iter()
            .map(|&r| project(&fan.rays[r]))
            .filter(|v| !is_zero(v))
            .collect();
        let cone = RatCone::new(m, &gens);
        let colors = c
            .colors
            .iter()
            .filter(|x| table.contains_key(*x))
            .cloned()
            .collect();
        cones.push((cone.rays().to_vec(), colors));
    }
    // drop cones that are faces of other image cones
    let ratcones: Vec<RatCone> = cones.iter().map(|(g, _)| RatCone::new(m, g)).collect();
    let keep: Vec<(Vec<IntVec>, BTreeSet<ColorId>)> = cones
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            !ratcones.iter().enumerate().any(|(j, other)| {
                j != *i && other != &ratcones[*i] && ratcones[*i].is_face_of(other)
            })
        })
        .map(|(_, c)| c.clone())
        .collect();
    let image = assemble(m, table, &keep);
    let report = image.validate();
    Ok(ContractionResult {
        kind: ContractionKind::Fiber,
        exceptional_cone: None,
        image_cone: None,
        target: None,
        quotient: Some(Quotient {
            kernel,
            projection: transpose_projection(&complement, &basis, n, k),
            fan: image,
            dominant,
            report,
        }),
        note: None,
    })
}

/// Rows of the linear map `x ↦ (coordinates of x in basis)[k..]`.
fn transpose_projection(
    complement: &[IntVec],
    basis: &[IntVec],
    n: usize,
    k: usize,
) -> Vec<IntVec> {
    let cols: Vec<RatVec> = (0..n)
        .map(|j| {
            basis
                .iter()
                .map(|b| BigRational::from_integer(b[j].clone()))
                .collect()
        })
        .collect();
    let images: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut e = vec![BigRational::zero(); n];
            e[i] = BigRational::one();
            let c = solve(&cols, n, &e).expect("unimodular basis");
            c[k..].iter().map(|v| v.to_integer()).collect()
        })
        .collect();
    (0..complement.len())
        .map(|row| (0..n).map(|i| images[i][row].clone()).collect())
        .collect()
}

/// Adds the color `D` to the cones containing the face spanned by the rays
/// that carry `ρ(D)` in the closed orbit `Y`.
fn color_contraction(g: &Geometry, d: &ColorId, y: usize) -> Result<Option<ContractionResult>> {
    let fan = g.fan();
    let n = fan.lattice_rank;
    let rho = &fan.color_table[d];
    let yrays = &fan.maximal_cones[y].rays;
    let ky = fan.cone(yrays);
    if is_zero(rho) || !ky.contains(rho, Membership::Closed) {
        return Ok(None);
    }
    let rows: Vec<RatVec> = (0..n)
        .map(|j| {
            yrays
                .iter()
                .map(|&r| BigRational::from_integer(fan.rays[r][j].clone()))
                .collect()
        })
        .collect();
    let coeffs = solve(&rows, yrays.len(), &to_rat(rho)).ok_or(Error::NotQFactorial(y))?;
    let sigma: Vec<usize> = yrays
        .iter()
        .zip(&coeffs)
        .filter(|(_, a)| a.is_positive())
        .map(|(&r, _)| r)
        .collect();
    let mut target_fan = fan.clone();
    for c in target_fan.maximal_cones.iter_mut() {
        if sigma.iter().all(|r| c.rays.contains(r)) {
            c.colors.insert(d.clone());
        }
    }
    let sigma_vecs = fan.ray_vectors(&sigma);
    let mut image_colors: BTreeSet<ColorId> = fan
        .attached_colors()
        .into_iter()
        .filter(|c| {
            fan.cone(&sigma)
                .contains(&fan.color_table[c], Membership::Closed)
        })
        .collect();
    image_colors.insert(d.clone());
    let kind = if rank(&sigma_vecs) == 1 {
        ContractionKind::Divisorial
    } else {
        ContractionKind::Small
    };
    Ok(Some(ContractionResult {
        kind,
        exceptional_cone: Some(sigma),
        image_cone: Some((
            sigma_vecs.iter().map(|v| make_primitive(v)).collect(),
            image_colors,
        )),
        target: Some(HorosphericalEmbedding {
            datum: g.emb.datum.clone(),
            fan: target_fan,
        }),
        quotient: None,
        note: None,
    }))
}

/// Dimension of the exceptional locus of a birational contraction.
pub fn exceptional_dimension(g: &Geometry, res: &ContractionResult) -> Result<Option<usize>> {
    match &res.exceptional_cone {
        Some(c)
            if matches!(
                res.kind,
                ContractionKind::Divisorial | ContractionKind::Small
            ) =>
        {
            Ok(Some(g.emb.orbit_dimension_unchecked(c)?))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ivec;

    fn geometry(rays: &[&[i64]], cones: &[&[usize]]) -> Geometry {
        let n = rays[0].len();
        Geometry::new(&HorosphericalEmbedding::toric(ColoredFan::toric_i64(
            n, rays, cones,
        )))
        .unwrap()
    }

    fn f1() -> Geometry {
        geometry(
            &[&[1, 0], &[0, 1], &[-1, 1], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
        )
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn wall_relations() {
        let wd = wall_data(&f1(), &[1]).unwrap();
        assert_eq!(wd.a, vec![q(-1), q(1), q(1)]);
        assert_eq!((wd.alpha, wd.beta), (1, 1));
        let p1p1 = geometry(
            &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
        );
        let wd = wall_data(&p1p1, &[0]).unwrap();
        assert_eq!(wd.a, vec![q(0), q(1), q(1)]);
        assert_eq!((wd.alpha, wd.beta), (0, 1));
        assert!(matches!(wall_data(&p1p1, &[0, 1]), Err(Error::NotAWall(_))));
    }

    #[test]
    fn f1_blows_down_to_p2() {
        let g = f1();
        let rays = extremal_rays(&g).unwrap();
        assert_eq!(rays.len(), 2);
        let idx = rays
            .iter()
            .position(|r| r.curves == vec![CurveClass::Wall(vec![1])])
            .unwrap();
        let res = contract(&g, idx).unwrap();
        assert_eq!(res.kind, ContractionKind::Divisorial);
        assert_eq!(res.exceptional_cone, Some(vec![1]));
        let target = res.target.unwrap();
        assert!(target.validate_embedding().is_valid());
        assert_eq!(target.picard_number().unwrap(), 1);
        let p2 = ColoredFan::toric_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -1]],
            &[&[0, 1], &[1, 2], &[0, 2]],
        );
        assert!(target.fan.is_isomorphic_to(&p2));
        assert_eq!(
            target.fan.rays,
            vec![ivec(&[-1, 1]), ivec(&[0, -1]), ivec(&[1, 0])]
        );
    }

    #[test]
    fn f1_ruling_is_a_fiber_contraction() {
        let g = f1();
        let rays = extremal_rays(&g).unwrap();
        let idx = rays
            .iter()
            .position(|r| r.curves.contains(&CurveClass::Wall(vec![0])))
            .unwrap();
        let res = contract(&g, idx).unwrap();
        assert_eq!(res.kind, ContractionKind::Fiber);
        let q = res.quotient.unwrap();
        assert_eq!(q.fan.lattice_rank, 1);
        assert_eq!(q.fan.rays.len(), 2);
        assert!(q.report.is_valid());
    }
}
