//! Dynkin diagrams, Cartan matrices and positive roots.
//!
//! Nodes are named by component letter and Bourbaki index: the first
//! component's nodes are `a1, a2, …`, the second's `b1, b2, …` and so on.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl CartanType {
    pub fn letter(self) -> &'static str {
        match self {
            CartanType::A => "A",
            CartanType::B => "B",
            CartanType::C => "C",
            CartanType::D => "D",
            CartanType::E => "E",
            CartanType::F => "F",
            CartanType::G => "G",
        }
    }

    pub fn parse(s: &str) -> Option<CartanType> {
        Some(match s {
            "A" => CartanType::A,
            "B" => CartanType::B,
            "C" => CartanType::C,
            "D" => CartanType::D,
            "E" => CartanType::E,
            "F" => CartanType::F,
            "G" => CartanType::G,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Component {
    pub kind: CartanType,
    pub rank: usize,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.rank)
    }
}

impl Component {
    /// Validates the rank. Low-rank aliases such as `B1` or `C2` are rejected.
    pub fn new(kind: CartanType, rank: usize) -> Result<Component> {
        let ok = match kind {
            CartanType::A => rank >= 1,
            CartanType::B => rank >= 2,
            CartanType::C => rank >= 3,
            CartanType::D => rank >= 4,
            CartanType::E => (6..=8).contains(&rank),
            CartanType::F => rank == 4,
            CartanType::G => rank == 2,
        };
        if ok {
            Ok(Component { kind, rank })
        } else {
            Err(Error::BadDynkinType(format!("{}{}", kind.letter(), rank)))
        }
    }

    pub fn parse(s: &str) -> Result<Component> {
        let bad = || Error::BadDynkinType(s.to_string());
        let mut chars = s.chars();
        let kind = chars
            .next()
            .and_then(|c| CartanType::parse(&c.to_string()))
            .ok_or_else(bad)?;
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        Component::new(kind, rank)
    }

    /// `cartan[i][j] = ⟨α_j, α_i^∨⟩`, Bourbaki numbering.
    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.rank;
        let chain = |n: usize| {
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                m[i][i] = 2;
                if i + 1 < n {
                    m[i][i + 1] = -1;
                    m[i + 1][i] = -1;
                }
            }
            m
        };
        match self.kind {
            CartanType::A => chain(n),
            CartanType::B => {
                // α_n short
                let mut m = chain(n);
                m[n - 1][n - 2] = -2;
                m
            }
            CartanType::C => {
                // α_n long
                let mut m = chain(n);
                m[n - 2][n - 1] = -2;
                m
            }
            CartanType::D => {
                // α_{n-2} branches to α_{n-1} and α_n
                let mut m = chain(n);
                m[n - 2][n - 1] = 0;
                m[n - 1][n - 2] = 0;
                m[n - 1][n - 3] = -1;
                m[n - 3][n - 1] = -1;
                m
            }
            CartanType::E => {
                let full: [[i64; 8]; 8] = [
                    [2, 0, -1, 0, 0, 0, 0, 0],
                    [0, 2, 0, -1, 0, 0, 0, 0],
                    [-1, 0, 2, -1, 0, 0, 0, 0],
                    [0, -1, -1, 2, -1, 0, 0, 0],
                    [0, 0, 0, -1, 2, -1, 0, 0],
                    [0, 0, 0, 0, -1, 2, -1, 0],
                    [0, 0, 0, 0, 0, -1, 2, -1],
                    [0, 0, 0, 0, 0, 0, -1, 2],
                ];
                full[..n].iter().map(|r| r[..n].to_vec()).collect()
            }
            CartanType::F => vec![
                vec![2, -1, 0, 0],
                vec![-1, 2, -1, 0],
                vec![0, -2, 2, -1],
                vec![0, 0, -1, 2],
            ],
            CartanType::G => vec![vec![2, -3], vec![-1, 2]],
        }
    }

    /// Positive roots in simple-root coordinates, lexicographically sorted.
    pub fn positive_roots(&self) -> Vec<Vec<i64>> {
        let c = self.cartan_matrix();
        let n = self.rank;
        let mut found: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            found.insert(e.clone());
            queue.push_back(e);
        }
        while let Some(beta) = queue.pop_front() {
            for i in 0..n {
                // p: how far the α_i-string extends downward from β.
                let mut p = 0;
                let mut down = beta.clone();
                loop {
                    down[i] -= 1;
                    if found.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let pairing: i64 = (0..n).map(|j| beta[j] * c[i][j]).sum();
                let q = p - pairing;
                if q > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if found.insert(up.clone()) {
                        queue.push_back(up);
                    }
                }
            }
        }
        let mut out: Vec<Vec<i64>> = found.into_iter().collect();
        out.sort();
        out
    }
}

pub type NodeId = String;

/// A disjoint union of connected Dynkin diagrams.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DynkinDiagram {
    pub components: Vec<Component>,
}

pub fn component_letter(idx: usize) -> String {
    let mut s = String::new();
    let mut i = idx;
    loop {
        s.insert(0, (b'a' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s
}

impl fmt::Display for DynkinDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

impl DynkinDiagram {
    pub fn new(components: Vec<Component>) -> Self {
        DynkinDiagram { components }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut comps = Vec::new();
        for part in spec
            .split(['x', '×', '*'])
            .map(str::trim)
            .filter(|p| !p.is_empty())
        {
            comps.push(Component::parse(part)?);
        }
        Ok(DynkinDiagram { components: comps })
    }

    pub fn node_id(comp: usize, index: usize) -> NodeId {
        format!("{}{}", component_letter(comp), index + 1)
    }

    /// All nodes, in component order.
    pub fn nodes(&self) -> Vec<NodeId> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(c, comp)| (0..comp.rank).map(move |i| Self::node_id(c, i)))
            .collect()
    }

    /// `(component, 0-based index)` of a node.
    pub fn locate(&self, node: &str) -> Result<(usize, usize)> {
        let unknown = || Error::UnknownNode(node.to_string());
        let split = node
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(unknown)?;
        let (letters, digits) = node.split_at(split);
        let idx: usize = digits.parse().map_err(|_| unknown())?;
        let comp = (0..self.components.len())
            .find(|&c| component_letter(c) == letters)
            .ok_or_else(unknown)?;
        if idx == 0 || idx > self.components[comp].rank {
            return Err(unknown());
        }
        Ok((comp, idx - 1))
    }

    pub fn contains(&self, node: &str) -> bool {
        self.locate(node).is_ok()
    }

    pub fn adjacent(&self, a: &str, b: &str) -> Result<bool> {
        let (ca, ia) = self.locate(a)?;
        let (cb, ib) = self.locate(b)?;
        if ca != cb || ia == ib {
            return Ok(false);
        }
        Ok(self.components[ca].cartan_matrix()[ia][ib] != 0)
    }

    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.rank).sum()
    }

    pub fn num_positive_roots(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.positive_roots().len())
            .sum()
    }

    /// Number of positive roots whose support is not contained in `parabolic`:
    /// the dimension of `G/P_I`.
    pub fn dim_flag(&self, parabolic: &BTreeSet<NodeId>) -> Result<usize> {
        for n in parabolic {
            self.locate(n)?;
        }
        let mut total = 0;
        for (c, comp) in self.components.iter().enumerate() {
            let inside: Vec<bool> = (0..comp.rank)
                .map(|i| parabolic.contains(&Self::node_id(c, i)))
                .collect();
            total += comp
                .positive_roots()
                .iter()
                .filter(|r| r.iter().enumerate().any(|(i, &x)| x != 0 && !inside[i]))
                .count();
        }
        Ok(total)
    }

    /// Connected components of the subgraph induced on `nodes`.
    pub fn connected_components(&self, nodes: &BTreeSet<NodeId>) -> Result<Vec<BTreeSet<NodeId>>> {
        for n in nodes {
            self.locate(n)?;
        }
        let mut remaining: BTreeSet<NodeId> = nodes.clone();
        let mut out = Vec::new();
        while let Some(start) = remaining.iter().next().cloned() {
            remaining.remove(&start);
            let mut comp = BTreeSet::from([start.clone()]);
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                let next: Vec<NodeId> = remaining
                    .iter()
                    .filter(|y| self.adjacent(&x, y).unwrap_or(false))
                    .cloned()
                    .collect();
                for y in next {
                    remaining.remove(&y);
                    comp.insert(y.clone());
                    stack.push(y);
                }
            }
            out.push(comp);
        }
        out.sort();
        Ok(out)
    }

    /// The Cartan integer `⟨α_b, α_a^∨⟩`.
    pub fn cartan_entry(&self, a: &str, b: &str) -> Result<i64> {
        let (ca, ia) = self.locate(a)?;
        let (cb, ib) = self.locate(b)?;
        if ca != cb {
            return Ok(0);
        }
        Ok(self.components[ca].cartan_matrix()[ia][ib])
    }

    /// Restricts to the subdiagram on `nodes`, identifying the type of each
    /// connected piece. Returns the new diagram and a map from new node ids
    /// to the original ones. Pieces are ordered by their first original node.
    pub fn restrict(
        &self,
        nodes: &BTreeSet<NodeId>,
    ) -> Result<(DynkinDiagram, BTreeMap<NodeId, NodeId>)> {
        let mut pieces = self.connected_components(nodes)?;
        let order_key =
            |s: &BTreeSet<NodeId>| s.iter().map(|n| self.locate(n).unwrap()).min().unwrap();
        pieces.sort_by_key(|p| order_key(p));
        let mut comps = Vec::new();
        let mut map = BTreeMap::new();
        for (k, piece) in pieces.iter().enumerate() {
            let mut orig: Vec<NodeId> = piece.iter().cloned().collect();
            orig.sort_by_key(|n| self.locate(n).unwrap());
            let (comp, perm) = self.identify(&orig)?;
            for (new_idx, &o) in perm.iter().enumerate() {
                map.insert(Self::node_id(k, new_idx), orig[o].clone());
            }
            comps.push(comp);
        }
        Ok((DynkinDiagram { components: comps }, map))
    }

    /// Finds a type and a Bourbaki numbering for a connected set of nodes.
    /// `perm[i]` is the position in `orig` of the node numbered `i`; among
    /// all numberings the lexicographically smallest `perm` is chosen.
    fn identify(&self, orig: &[NodeId]) -> Result<(Component, Vec<usize>)> {
        let k = orig.len();
        let sub: Vec<Vec<i64>> = orig
            .iter()
            .map(|a| {
                orig.iter()
                    .map(|b| self.cartan_entry(a, b).unwrap())
                    .collect()
            })
            .collect();
        let kinds = [
            CartanType::A,
            CartanType::B,
            CartanType::C,
            CartanType::D,
            CartanType::E,
            CartanType::F,
            CartanType::G,
        ];
        for kind in kinds {
            let Ok(comp) = Component::new(kind, k) else {
                continue;
            };
            let target = comp.cartan_matrix();
            let mut perm = Vec::new();
            let mut used = vec![false; k];
            if match_perm(&target, &sub, &mut perm, &mut used) {
                return Ok((comp, perm));
            }
        }
        Err(Error::BadDynkinType(format!("subdiagram {orig:?}")))
    }
}

fn match_perm(
    target: &[Vec<i64>],
    sub: &[Vec<i64>],
    perm: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let i = perm.len();
    if i == target.len() {
        return true;
    }
    for cand in 0..sub.len() {
        if used[cand] {
            continue;
        }
        let ok = (0..i)
            .all(|j| target[i][j] == sub[cand][perm[j]] && target[j][i] == sub[perm[j]][cand]);
        if !ok {
            continue;
        }
        used[cand] = true;
        perm.push(cand);
        if match_perm(target, sub, perm, used) {
            return true;
        }
        perm.pop();
        used[cand] = false;
    }
    false
}

/// A character of `B`: fundamental-weight coordinates on the semisimple
/// nodes plus coordinates on a central torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Weight {
    pub fundamental: BTreeMap<NodeId, BigInt>,
    pub central: Vec<BigInt>,
}

impl Weight {
    pub fn new(fundamental: BTreeMap<NodeId, BigInt>, central: Vec<BigInt>) -> Self {
        let fundamental = fundamental
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Weight {
            fundamental,
            central,
        }
    }

    /// A sum of fundamental weights `Σ c·ω_node` without central part.
    pub fn from_pairs(pairs: &[(&str, i64)], central_rank: usize) -> Self {
        let mut map = BTreeMap::new();
        for (n, c) in pairs {
            *map.entry(n.to_string()).or_insert_with(BigInt::zero) += BigInt::from(*c);
        }
        Self::new(map, vec![BigInt::zero(); central_rank])
    }

    /// `⟨w, α_node^∨⟩`.
    pub fn pairing(&self, diagram: &DynkinDiagram, node: &str) -> Result<BigInt> {
        diagram.locate(node)?;
        Ok(self.fundamental.get(node).cloned().unwrap_or_default())
    }

    /// Coordinates over `nodes` followed by the central part.
    pub fn coordinates(&self, nodes: &[NodeId]) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = nodes
            .iter()
            .map(|n| self.fundamental.get(n).cloned().unwrap_or_default())
            .collect();
        v.extend(self.central.iter().cloned());
        v
    }
}
