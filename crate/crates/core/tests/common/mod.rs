#![allow(dead_code)]

use fanlab_core::catalog::catalog_spec;
use fanlab_core::fan::ColoredFan;
use fanlab_core::horo::HorosphericalEmbedding;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const TORIC: &[&str] = &[
    "p1",
    "p2",
    "p1xp1",
    "p1p1p1",
    "hirzebruch:0",
    "hirzebruch:2",
    "hirzebruch:3",
    "f1",
    "p112",
    "f1xp1",
];

pub const HORO: &[&str] = &[
    "incidence:4,2",
    "incidence-blowup:4,2",
    "incidence:5,3",
    "incidence:6,2",
    "incidence-blowup:5,4",
];

/// Toric entries that are not products themselves.
pub const PRIME_TORIC: &[&str] = &["p1", "p2", "f1", "hirzebruch:2", "p112"];

pub fn fan(spec: &str) -> ColoredFan {
    catalog_spec(spec).unwrap().fan
}

pub fn emb(spec: &str) -> HorosphericalEmbedding {
    catalog_spec(spec).unwrap().embedding().unwrap()
}

/// A catalog fan of rank at most 3 refined by up to three random star
/// subdivisions.
pub fn random_star_fan(seed: u64) -> ColoredFan {
    let mut rng = StdRng::seed_from_u64(seed);
    let base = [
        "p1",
        "p2",
        "p1xp1",
        "f1",
        "hirzebruch:2",
        "p112",
        "p1p1p1",
        "f1xp1",
    ];
    let mut f = fan(base[rng.random_range(0..base.len())]);
    let steps = rng.random_range(1..=3);
    for _ in 0..steps {
        let c = f.maximal_cones[rng.random_range(0..f.maximal_cones.len())]
            .rays
            .clone();
        let mut face: Vec<usize> = c.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
        if face.len() < 2 {
            face = c[..2.min(c.len())].to_vec();
        }
        if face.len() < 2 {
            continue;
        }
        f = f.star_subdivision(&face).unwrap();
    }
    f
}
