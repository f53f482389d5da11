//! Mod 2 simplicial homology.
//!
//! Boundary matrices are reduced column by column in sparse form with the
//! clearing optimisation; a dense bit-packed eliminator is kept for small
//! matrices and as an independent rank oracle.

use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};

/// Facet incidences of a (sub)complex, renumbered densely per dimension.
#[derive(Clone, Debug, Default)]
pub struct ChainComplex {
    counts: Vec<usize>,
    /// Per dimension `p >= 1`, `p + 1` facet ordinals per simplex, flattened.
    facets: Vec<Vec<u32>>,
}

impl ChainComplex {
    pub fn from_complex(k: &SimplicialComplex) -> Self {
        let n = k.dim().map_or(0, |n| n + 1);
        let counts: Vec<usize> = (0..n).map(|p| k.count(p)).collect();
        let facets = (0..n)
            .map(|p| {
                if p == 0 {
                    return Vec::new();
                }
                (0..counts[p]).flat_map(|i| k.facet_ordinals(p, i).iter().copied()).collect()
            })
            .collect();
        ChainComplex { counts, facets }
    }

    /// The subcomplex of `k` selected by `member[p][i]`; the selection must be face-closed.
    pub fn from_selection(k: &SimplicialComplex, member: &[Vec<bool>]) -> Self {
        let mut renumber: Vec<Vec<u32>> = Vec::with_capacity(member.len());
        let mut counts = Vec::new();
        let mut facets = Vec::new();
        for (p, sel) in member.iter().enumerate() {
            let mut next = 0u32;
            let map: Vec<u32> = sel
                .iter()
                .map(|&m| {
                    if m {
                        next += 1;
                        next - 1
                    } else {
                        u32::MAX
                    }
                })
                .collect();
            if next == 0 {
                break;
            }
            let mut flat = Vec::new();
            if p > 0 {
                flat.reserve(next as usize * (p + 1));
                for (i, _) in sel.iter().enumerate().filter(|(_, &m)| m) {
                    for &f in k.facet_ordinals(p, i) {
                        let r = renumber[p - 1][f as usize];
                        debug_assert!(r != u32::MAX, "selection is not face-closed");
                        flat.push(r);
                    }
                }
            }
            counts.push(next as usize);
            facets.push(flat);
            renumber.push(map);
        }
        ChainComplex { counts, facets }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn facets_of(&self, p: usize, i: usize) -> &[u32] {
        &self.facets[p][i * (p + 1)..(i + 1) * (p + 1)]
    }

    /// Dense bit-packed `∂_p` (rows: `(p-1)`-simplices, columns: `p`-simplices).
    pub fn boundary_bits(&self, p: usize) -> BitMatrix {
        let rows = if p == 0 { 0 } else { self.counts.get(p - 1).copied().unwrap_or(0) };
        let cols = self.counts.get(p).copied().unwrap_or(0);
        let mut m = BitMatrix::new(rows, cols);
        if p > 0 {
            for j in 0..cols {
                for &r in self.facets_of(p, j) {
                    m.toggle(r as usize, j);
                }
            }
        }
        m
    }

    /// `rank ∂_p` for every `p`, by sparse reduction from the top dimension down.
    pub fn boundary_ranks(&self) -> Vec<usize> {
        let (ranks, _) = self.reduce(None);
        ranks
    }

    /// Ranks, plus per-label rank counts when a label is supplied for every
    /// simplex of every dimension. Labels must be constant on connected pieces.
    fn reduce(&self, labels: Option<&[Vec<u32>]>) -> (Vec<usize>, Vec<Vec<usize>>) {
        let n = self.counts.len();
        let mut ranks = vec![0; n + 1];
        let n_labels = labels.map_or(0, |l| {
            l.iter().flat_map(|v| v.iter()).map(|&x| x as usize + 1).max().unwrap_or(0)
        });
        let mut per_label = vec![vec![0usize; n + 1]; n_labels];
        let mut cleared: Vec<bool> = Vec::new();
        for p in (1..n).rev() {
            let rows = self.counts[p - 1];
            let cols = self.counts[p];
            let mut pivot_col: Vec<u32> = vec![u32::MAX; rows];
            let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); cols];
            let mut next_cleared = vec![false; rows];
            let mut scratch = Vec::new();
            for j in 0..cols {
                if cleared.get(j).copied().unwrap_or(false) {
                    continue;
                }
                let mut col: Vec<u32> = self.facets_of(p, j).to_vec();
                col.sort_unstable();
                while let Some(&low) = col.last() {
                    let other = pivot_col[low as usize];
                    if other == u32::MAX {
                        break;
                    }
                    xor_sorted(&col, &reduced[other as usize], &mut scratch);
                    std::mem::swap(&mut col, &mut scratch);
                }
                if let Some(&low) = col.last() {
                    pivot_col[low as usize] = j as u32;
                    next_cleared[low as usize] = true;
                    ranks[p] += 1;
                    if let Some(l) = labels {
                        per_label[l[p][j] as usize][p] += 1;
                    }
                    reduced[j] = col;
                }
            }
            cleared = next_cleared;
        }
        (ranks, per_label)
    }

    pub fn betti(&self) -> BettiVector {
        let ranks = self.boundary_ranks();
        BettiVector::from_ranks(&self.counts, &ranks)
    }

    /// Connected component label per vertex, by union-find over edges.
    pub fn vertex_components(&self) -> (Vec<u32>, usize) {
        let nv = self.counts.first().copied().unwrap_or(0);
        let mut uf = UnionFind::new(nv);
        if self.counts.len() > 1 {
            for e in 0..self.counts[1] {
                let f = self.facets_of(1, e);
                uf.union(f[0] as usize, f[1] as usize);
            }
        }
        uf.labels()
    }

    /// Betti vector of every connected component, in order of their least vertex.
    pub fn component_bettis(&self) -> Vec<BettiVector> {
        let (vlab, nc) = self.vertex_components();
        if nc == 0 {
            return Vec::new();
        }
        let n = self.counts.len();
        let mut labels: Vec<Vec<u32>> = vec![vlab];
        for p in 1..n {
            let lab: Vec<u32> = (0..self.counts[p])
                .map(|i| {
                    let mut f = self.facets_of(p, i)[0];
                    for q in (1..p).rev() {
                        f = self.facets_of(q, f as usize)[0];
                    }
                    labels[0][f as usize]
                })
                .collect();
            labels.push(lab);
        }
        let (_, per_label) = self.reduce(Some(&labels));
        let mut counts = vec![vec![0usize; n]; nc];
        for (p, lab) in labels.iter().enumerate() {
            for &c in lab {
                counts[c as usize][p] += 1;
            }
        }
        (0..nc)
            .map(|c| {
                let ranks = per_label.get(c).cloned().unwrap_or_else(|| vec![0; n + 1]);
                BettiVector::from_ranks(&counts[c], &ranks)
            })
            .collect()
    }
}

fn xor_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Mod 2 Betti numbers `b_0..b_dim`; empty for the empty complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    fn from_ranks(counts: &[usize], ranks: &[usize]) -> Self {
        BettiVector(
            (0..counts.len())
                .map(|p| counts[p] - ranks[p] - ranks.get(p + 1).copied().unwrap_or(0))
                .collect(),
        )
    }

    pub fn get(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn chi(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    /// Drops trailing zeros, so that vectors of different lengths compare by value.
    pub fn trimmed(&self) -> BettiVector {
        let mut v = self.0.clone();
        while v.last() == Some(&0) {
            v.pop();
        }
        BettiVector(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl std::fmt::Display for BettiVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Betti numbers of `k`, refusing complexes with more than `cap` simplices.
pub fn betti_capped(k: &SimplicialComplex, cap: u128) -> Result<BettiVector> {
    let total = k.total_count() as u128;
    if total > cap {
        return Err(Error::CapExceeded {
            what: format!("homology of {}", k.name()),
            needed: total,
            cap,
        });
    }
    Ok(ChainComplex::from_complex(k).betti())
}

pub fn betti(k: &SimplicialComplex) -> Result<BettiVector> {
    betti_capped(k, crate::DEFAULT_MAX_SIMPLICES)
}

/// True iff `k` has the mod 2 homology of `S^m`. `m = -1` means the empty sphere.
pub fn is_sphere_homology(k: &SimplicialComplex, m: isize) -> bool {
    if m < 0 {
        return k.is_empty();
    }
    if k.is_empty() {
        return false;
    }
    let b = ChainComplex::from_complex(k).betti().trimmed();
    let m = m as usize;
    if m == 0 {
        return b.0 == vec![2];
    }
    let mut want = vec![0; m + 1];
    want[0] = 1;
    want[m] = 1;
    b.0 == want
}

/// First simplex of `v` whose link fails to be a homology `(m - j - 1)`-sphere.
pub fn first_non_sphere_link(v: &SimplicialComplex, m: usize) -> Option<Simplex> {
    for s in v.iter() {
        let lk = v.link(s).expect("simplex taken from the complex");
        if !is_sphere_homology(&lk, m as isize - s.dim() as isize - 1) {
            return Some(s.clone());
        }
    }
    None
}

/// Sphere-link test against `m = dim v`; vacuously true for the empty complex.
pub fn has_sphere_link_everywhere(v: &SimplicialComplex) -> bool {
    match v.dim() {
        None => true,
        Some(m) => first_non_sphere_link(v, m).is_none(),
    }
}

/// Connected components as vertex-id lists.
pub fn connected_components(k: &SimplicialComplex) -> Vec<Vec<u32>> {
    let cc = ChainComplex::from_complex(k);
    let (labels, n) = cc.vertex_components();
    let mut out = vec![Vec::new(); n];
    for (i, &l) in labels.iter().enumerate() {
        out[l as usize].push(k.simplex(0, i).vertices()[0]);
    }
    out
}

pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb as u32,
            std::cmp::Ordering::Greater => self.parent[rb] = ra as u32,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Dense labels numbered by first appearance, and their count.
    pub fn labels(&mut self) -> (Vec<u32>, usize) {
        let n = self.parent.len();
        let mut map = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = self.find(i);
            if map[r] == u32::MAX {
                map[r] = next;
                next += 1;
            }
            out.push(map[r]);
        }
        (out, next as usize)
    }
}

/// Dense matrix over the two-element field, one bit-packed row per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.stride + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn toggle(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / 64] ^= 1 << (c % 64);
    }

    /// Product over the two-element field.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = BitMatrix::new(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    for w in 0..other.stride {
                        out.data[r * out.stride + w] ^= other.data[k * other.stride + w];
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }
}

/// Rank by Gaussian elimination, pivots taken left to right.
pub fn rank_gf2(m: &BitMatrix) -> usize {
    let mut rows: Vec<Vec<u64>> = (0..m.rows)
        .map(|r| m.data[r * m.stride..(r + 1) * m.stride].to_vec())
        .collect();
    let mut rank = 0;
    for c in 0..m.cols {
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let Some(pr) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pr);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[w] & bit != 0 {
                for (x, y) in row[w..].iter_mut().zip(&pivot[w..]) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}
