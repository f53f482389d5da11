#![allow(dead_code)]

use std::collections::HashMap;

use num::{One, Zero};
use randsub::rational::{pow_q, q_int};
use randsub::{Simplex, SimplicialComplex, Q};

pub struct Entry {
    pub complex: SimplicialComplex,
    pub manifold: bool,
}

pub fn simplex(n: usize) -> SimplicialComplex {
    SimplicialComplex::standard_simplex(n)
}

pub fn sphere(n: usize) -> SimplicialComplex {
    SimplicialComplex::boundary_sphere(n).unwrap()
}

pub fn octahedron() -> SimplicialComplex {
    let mut tris = Vec::new();
    for a in [0u32, 1] {
        for b in [2u32, 3] {
            for c in [4u32, 5] {
                tris.push(vec![a, b, c]);
            }
        }
    }
    SimplicialComplex::from_vertex_lists("octahedron", &tris).unwrap()
}

pub fn rp2_6() -> SimplicialComplex {
    let tris = [
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 5],
        [0, 1, 5],
        [1, 2, 4],
        [2, 3, 5],
        [1, 3, 4],
        [2, 4, 5],
        [1, 3, 5],
    ];
    let lists: Vec<Vec<u32>> = tris.iter().map(|t| t.to_vec()).collect();
    SimplicialComplex::from_vertex_lists("RP2_6", &lists).unwrap()
}

/// Small complexes on which every cochain can be enumerated.
pub fn corpus() -> Vec<Entry> {
    let mut out: Vec<Entry> = (1..=3)
        .map(|n| Entry { complex: simplex(n), manifold: false })
        .collect();
    for n in 2..=4 {
        out.push(Entry { complex: sphere(n), manifold: true });
    }
    out.push(Entry { complex: octahedron(), manifold: true });
    out.push(Entry { complex: rp2_6(), manifold: true });
    out
}

pub fn nus() -> Vec<Q> {
    vec![Q::zero(), Q::new(1.into(), 3.into()), Q::new(1.into(), 2.into()), Q::one()]
}

/// Rank over the two-element field of a matrix given as rows of bits.
pub fn rank2(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, |r| r.len() * 64);
    for col in 0..width {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & b != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Flags of `K` as chains of indices into `simplices`, built from the face relation alone.
pub struct Flags {
    pub simplices: Vec<Vec<u32>>,
    pub flags: Vec<Vec<usize>>,
}

fn subset(a: &[u32], b: &[u32]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.contains(x))
}

impl Flags {
    pub fn of(k: &SimplicialComplex) -> Self {
        let simplices: Vec<Vec<u32>> = k.iter().map(|s| s.vertices().to_vec()).collect();
        let mut flags = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..simplices.len()).map(|i| vec![i]).collect();
        while let Some(chain) = stack.pop() {
            let last = &simplices[*chain.last().unwrap()];
            for (j, s) in simplices.iter().enumerate() {
                if subset(last, s) {
                    let mut c = chain.clone();
                    c.push(j);
                    stack.push(c);
                }
            }
            flags.push(chain);
        }
        Flags { simplices, flags }
    }
}

fn k_subsets(v: &[u32], size: usize) -> Vec<Vec<u32>> {
    let n = v.len();
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| v[i]).collect())
        .collect()
}

/// Integer statistics of one `V_ε`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub f: Vec<i64>,
    pub b: Vec<i64>,
    pub chi: i64,
    pub cw: Vec<i64>,
    pub blocks: Vec<i64>,
}

/// Brute-force `V_ε` for the `(k-1)`-cochain given by `bits` (indexed like `K`'s `(k-1)`-simplices).
pub fn brute_stats(k: &SimplicialComplex, flags: &Flags, kk: usize, bits: &[bool]) -> Stats {
    let n = k.dim().unwrap();
    let label: HashMap<Vec<u32>, bool> = k
        .simplices(kk - 1)
        .iter()
        .zip(bits)
        .map(|(s, &b)| (s.vertices().to_vec(), b))
        .collect();
    let d_eps = |tau: &[u32]| -> bool {
        k_subsets(tau, kk).iter().fold(false, |acc, f| acc ^ label[f])
    };
    let active: Vec<bool> = flags
        .simplices
        .iter()
        .map(|s| s.len() > kk && k_subsets(s, kk + 1).iter().any(|t| d_eps(t)))
        .collect();

    let members: Vec<&Vec<usize>> = flags.flags.iter().filter(|c| active[c[0]]).collect();
    let top = n - kk;
    let mut by_len: Vec<Vec<Vec<usize>>> = vec![Vec::new(); top + 1];
    for c in &members {
        assert!(c.len() - 1 <= top, "V_ε exceeds dimension n-k");
        let mut s = c.to_vec();
        s.sort_unstable();
        by_len[c.len() - 1].push(s);
    }
    let index: Vec<HashMap<Vec<usize>, usize>> = by_len
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
        .collect();
    let f: Vec<i64> = by_len.iter().map(|l| l.len() as i64).collect();
    let mut ranks = vec![0usize; top + 2];
    for p in 1..=top {
        let words = by_len[p - 1].len().div_ceil(64).max(1);
        let rows: Vec<Vec<u64>> = by_len[p]
            .iter()
            .map(|s| {
                let mut row = vec![0u64; words];
                for skip in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(skip);
                    let r = *index[p - 1].get(&face).expect("V_ε is face-closed");
                    row[r / 64] ^= 1 << (r % 64);
                }
                row
            })
            .collect();
        ranks[p] = rank2(rows);
    }
    let b: Vec<i64> = (0..=top)
        .map(|p| f[p] - ranks[p] as i64 - ranks[p + 1] as i64)
        .collect();
    let chi = f.iter().enumerate().map(|(i, x)| if i % 2 == 0 { *x } else { -x }).sum();

    let cw = if kk == 1 {
        (0..n)
            .map(|p| {
                k.simplices(p + 1)
                    .iter()
                    .filter(|s| {
                        let v = s.vertices();
                        v.iter().any(|x| label[&vec![*x]] != label[&vec![v[0]]])
                    })
                    .count() as i64
            })
            .collect()
    } else {
        Vec::new()
    };
    let blocks = (0..=top)
        .map(|i| {
            let dim = n - i;
            (0..flags.simplices.len())
                .filter(|&s| flags.simplices[s].len() == dim + 1)
                .filter(|&s| members.iter().any(|c| c[0] == s))
                .count() as i64
        })
        .collect();
    Stats { f, b, chi, cw, blocks }
}

/// Statistics of every cochain summed per number of ones.
pub struct Table {
    pub len: usize,
    pub sums: Vec<Stats>,
}

fn add_into(acc: &mut Vec<i64>, x: &[i64]) {
    if acc.len() < x.len() {
        acc.resize(x.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

pub fn exhaustive_table(k: &SimplicialComplex, kk: usize) -> Table {
    let flags = Flags::of(k);
    let len = k.count(kk - 1);
    assert!(len <= 20, "oracle enumeration too large");
    let mut sums = vec![Stats::default(); len + 1];
    for m in 0u64..1 << len {
        let bits: Vec<bool> = (0..len).map(|i| m >> i & 1 == 1).collect();
        let s = brute_stats(k, &flags, kk, &bits);
        let acc = &mut sums[m.count_ones() as usize];
        add_into(&mut acc.f, &s.f);
        add_into(&mut acc.b, &s.b);
        acc.chi += s.chi;
        add_into(&mut acc.cw, &s.cw);
        add_into(&mut acc.blocks, &s.blocks);
    }
    Table { len, sums }
}

/// Exact averages of the statistics under the measure with parameter `nu`.
pub struct Averages {
    pub f: Vec<Q>,
    pub b: Vec<Q>,
    pub chi: Q,
    pub cw: Vec<Q>,
    pub blocks: Vec<Q>,
}

impl Table {
    pub fn average(&self, nu: &Q) -> Averages {
        let weights: Vec<Q> = (0..=self.len)
            .map(|w| pow_q(nu, self.len - w) * pow_q(&(Q::one() - nu), w))
            .collect();
        let vec_avg = |get: &dyn Fn(&Stats) -> &Vec<i64>| -> Vec<Q> {
            let width = self.sums.iter().map(|s| get(s).len()).max().unwrap_or(0);
            (0..width)
                .map(|i| {
                    self.sums
                        .iter()
                        .zip(&weights)
                        .map(|(s, w)| q_int(get(s).get(i).copied().unwrap_or(0)) * w)
                        .sum()
                })
                .collect()
        };
        Averages {
            f: vec_avg(&|s| &s.f),
            b: vec_avg(&|s| &s.b),
            cw: vec_avg(&|s| &s.cw),
            blocks: vec_avg(&|s| &s.blocks),
            chi: self.sums.iter().zip(&weights).map(|(s, w)| q_int(s.chi) * w).sum(),
        }
    }
}

pub fn q_at(v: &[Q], i: usize) -> Q {
    v.get(i).cloned().unwrap_or_else(Q::zero)
}

pub fn sx(v: &[u32]) -> Simplex {
    Simplex::from_unsorted(v.to_vec()).unwrap()
}
