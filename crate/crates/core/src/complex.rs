//! Immutable finite simplicial complexes.
//!
//! Simplices of each dimension are kept in lexicographic order, and that
//! order defines the ordinal index used for cochain bit layouts and boundary
//! matrices. Every `p`-simplex also stores the ordinals of its `p + 1`
//! facets (in the order obtained by deleting vertex 0, 1, ...).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use num::traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q_int, Poly, Q};

pub type VertexId = u32;

/// A simplex given by its strictly increasing vertex list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<VertexId>);

impl Simplex {
    pub fn new(vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedSimplex { vertices });
        }
        Ok(Simplex(vertices))
    }

    /// Sorts the input first; duplicates are still rejected.
    pub fn from_unsorted(mut vertices: Vec<VertexId>) -> Result<Self> {
        vertices.sort_unstable();
        Simplex::new(vertices)
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<VertexId>) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, the `i`-th one omitting vertex `i`.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }

    /// All non-empty faces, including the simplex itself.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (1u64..(1u64 << n))
            .map(|mask| {
                Simplex(
                    (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| self.0[i])
                        .collect(),
                )
            })
            .collect()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        is_sorted_subset(&self.0, &other.0)
    }

    pub fn is_disjoint(&self, other: &Simplex) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Vertices of `self` not in `other`, or `None` if nothing is left.
    pub fn difference(&self, other: &Simplex) -> Option<Simplex> {
        let rest: Vec<_> = self
            .0
            .iter()
            .copied()
            .filter(|v| other.0.binary_search(v).is_err())
            .collect();
        (!rest.is_empty()).then_some(Simplex(rest))
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let mut v: Vec<_> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn is_sorted_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

#[derive(Clone, Debug, Default)]
struct Level {
    simplices: Vec<Simplex>,
    index: HashMap<Simplex, u32>,
    /// `(p + 1)` facet ordinals per simplex, flattened; empty for `p = 0`.
    facets: Vec<u32>,
}

/// A finite simplicial complex. The empty complex has no simplices at all.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    name: String,
    levels: Vec<Level>,
    offsets: Vec<usize>,
    star: OnceLock<Vec<Vec<u32>>>,
}

/// On-disk form: `{"name": ..., "maximal_simplices": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComplexFile {
    pub name: String,
    pub maximal_simplices: Vec<Vec<VertexId>>,
}

impl SimplicialComplex {
    pub fn empty(name: impl Into<String>) -> Self {
        SimplicialComplex {
            name: name.into(),
            levels: Vec::new(),
            offsets: vec![0],
            star: OnceLock::new(),
        }
    }

    /// Face closure of the given simplices.
    pub fn from_maximal(name: impl Into<String>, maximal: Vec<Simplex>) -> Self {
        let mut per_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        for s in maximal {
            if per_dim.len() <= s.dim() {
                per_dim.resize_with(s.dim() + 1, BTreeSet::new);
            }
            if per_dim[s.dim()].contains(&s) {
                continue;
            }
            for face in s.faces() {
                per_dim[face.dim()].insert(face);
            }
        }
        let lists = per_dim.into_iter().map(|set| set.into_iter().collect()).collect();
        Self::from_face_closed(name, lists).expect("face closure is closed")
    }

    /// Validates raw vertex lists and takes their face closure.
    pub fn from_vertex_lists(name: impl Into<String>, lists: &[Vec<VertexId>]) -> Result<Self> {
        let simplices = lists
            .iter()
            .map(|l| Simplex::new(l.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_maximal(name, simplices))
    }

    /// Builds from per-dimension lists that are already face-closed.
    /// Lists are sorted and deduplicated here.
    pub fn from_face_closed(name: impl Into<String>, mut per_dim: Vec<Vec<Simplex>>) -> Result<Self> {
        while per_dim.last().is_some_and(|l| l.is_empty()) {
            per_dim.pop();
        }
        let mut levels: Vec<Level> = Vec::with_capacity(per_dim.len());
        for (p, mut list) in per_dim.into_iter().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(bad) = list.iter().find(|s| s.dim() != p) {
                return Err(Error::invalid(format!("simplex {bad} listed in dimension {p}")));
            }
            let index: HashMap<Simplex, u32> = list
                .iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), i as u32))
                .collect();
            let mut facets = Vec::new();
            if p > 0 {
                facets.reserve(list.len() * (p + 1));
                let below = &levels[p - 1].index;
                for s in &list {
                    for f in s.facets() {
                        match below.get(&f) {
                            Some(&i) => facets.push(i),
                            None => return Err(Error::NotFaceClosed(f.0)),
                        }
                    }
                }
            }
            levels.push(Level {
                simplices: list,
                index,
                facets,
            });
        }
        let mut offsets = vec![0];
        for l in &levels {
            offsets.push(offsets.last().unwrap() + l.simplices.len());
        }
        Ok(SimplicialComplex {
            name: name.into(),
            levels,
            offsets,
            star: OnceLock::new(),
        })
    }

    /// The full simplex on vertices `0..=n`.
    pub fn standard_simplex(n: usize) -> Self {
        let top = Simplex((0..=n as u32).collect());
        Self::from_maximal(format!("Delta_{n}"), vec![top])
    }

    /// The boundary of the `n`-simplex, an `(n-1)`-sphere.
    pub fn boundary_sphere(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("boundary_sphere needs n >= 1"));
        }
        let top = Simplex((0..=n as u32).collect());
        Ok(Self::from_maximal(format!("bdDelta_{n}"), top.facets().collect()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Top dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.levels.len().checked_sub(1)
    }

    pub fn count(&self, p: usize) -> usize {
        self.levels.get(p).map_or(0, |l| l.simplices.len())
    }

    pub fn total_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.simplices.len()).collect()
    }

    pub fn simplices(&self, p: usize) -> &[Simplex] {
        self.levels.get(p).map_or(&[], |l| &l.simplices)
    }

    pub fn simplex(&self, p: usize, i: usize) -> &Simplex {
        &self.levels[p].simplices[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.levels.iter().flat_map(|l| l.simplices.iter())
    }

    /// Ordinal of `s` among simplices of its dimension.
    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.levels
            .get(s.dim())
            .and_then(|l| l.index.get(s))
            .map(|&i| i as usize)
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index_of(s).is_some()
    }

    pub fn facet_ordinals(&self, p: usize, i: usize) -> &[u32] {
        if p == 0 {
            return &[];
        }
        &self.levels[p].facets[i * (p + 1)..(i + 1) * (p + 1)]
    }

    /// Position of `(p, i)` in the concatenation of all dimensions.
    pub fn global_id(&self, p: usize, i: usize) -> usize {
        self.offsets[p] + i
    }

    pub fn from_global_id(&self, g: usize) -> (usize, usize) {
        let p = self.offsets.partition_point(|&o| o <= g) - 1;
        (p, g - self.offsets[p])
    }

    pub fn dim_offset(&self, p: usize) -> usize {
        self.offsets[p.min(self.offsets.len() - 1)]
    }

    pub fn max_vertex(&self) -> Option<VertexId> {
        self.simplices(0).last().map(|s| s.0[0])
    }

    fn star_index(&self) -> &Vec<Vec<u32>> {
        self.star.get_or_init(|| {
            let mut star = vec![Vec::new(); self.count(0)];
            for (p, level) in self.levels.iter().enumerate() {
                for (i, s) in level.simplices.iter().enumerate() {
                    let g = (self.offsets[p] + i) as u32;
                    for v in &s.0 {
                        let vi = self.levels[0].index[&Simplex(vec![*v])];
                        star[vi as usize].push(g);
                    }
                }
            }
            star
        })
    }

    /// All simplices having `s` as a face (the open star), including `s`.
    pub fn star(&self, s: &Simplex) -> Result<Vec<Simplex>> {
        if !self.contains(s) {
            return Err(Error::NotInComplex(s.0.clone()));
        }
        let star = self.star_index();
        let smallest = s
            .0
            .iter()
            .map(|v| &star[self.levels[0].index[&Simplex(vec![*v])] as usize])
            .min_by_key(|l| l.len())
            .unwrap();
        Ok(smallest
            .iter()
            .map(|&g| {
                let (p, i) = self.from_global_id(g as usize);
                self.simplex(p, i)
            })
            .filter(|t| s.is_face_of(t))
            .cloned()
            .collect())
    }

    pub fn closed_star(&self, s: &Simplex) -> Result<SimplicialComplex> {
        let cofaces = self.star(s)?;
        Ok(Self::from_maximal(format!("St({s})"), cofaces))
    }

    /// `{ γ : γ ∩ σ = ∅, γ ∪ σ ∈ K }`
    pub fn link(&self, s: &Simplex) -> Result<SimplicialComplex> {
        let cofaces = self.star(s)?;
        let mut per_dim: Vec<Vec<Simplex>> = Vec::new();
        for t in cofaces {
            if let Some(rest) = t.difference(s) {
                if per_dim.len() <= rest.dim() {
                    per_dim.resize_with(rest.dim() + 1, Vec::new);
                }
                per_dim[rest.dim()].push(rest);
            }
        }
        Self::from_face_closed(format!("Lk({s})"), per_dim)
    }

    /// Join `K * L`; `L`'s vertices are shifted above `K`'s.
    pub fn join(&self, other: &SimplicialComplex) -> SimplicialComplex {
        let shift = self.max_vertex().map_or(0, |v| v + 1);
        let other_shifted: Vec<Vec<Simplex>> = other
            .levels
            .iter()
            .map(|l| {
                l.simplices
                    .iter()
                    .map(|s| Simplex(s.0.iter().map(|v| v + shift).collect()))
                    .collect()
            })
            .collect();
        let top = match (self.dim(), other.dim()) {
            (None, None) => return SimplicialComplex::empty(format!("{}*{}", self.name, other.name)),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a + b + 1,
        };
        let mut per_dim: Vec<Vec<Simplex>> = vec![Vec::new(); top + 1];
        for l in &self.levels {
            for s in &l.simplices {
                per_dim[s.dim()].push(s.clone());
            }
        }
        for l in &other_shifted {
            for s in l {
                per_dim[s.dim()].push(s.clone());
            }
        }
        for a in self.iter() {
            for l in &other_shifted {
                for b in l {
                    let mut v = a.0.clone();
                    v.extend_from_slice(&b.0);
                    let u = Simplex(v);
                    per_dim[u.dim()].push(u);
                }
            }
        }
        Self::from_face_closed(format!("{}*{}", self.name, other.name), per_dim)
            .expect("join of complexes is face-closed")
    }

    /// Simplices that are not a proper face of another simplex.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut is_face: Vec<Vec<bool>> = self.levels.iter().map(|l| vec![false; l.simplices.len()]).collect();
        for p in 1..self.levels.len() {
            for &f in &self.levels[p].facets {
                is_face[p - 1][f as usize] = true;
            }
        }
        let mut out = Vec::new();
        for (p, l) in self.levels.iter().enumerate() {
            for (i, s) in l.simplices.iter().enumerate() {
                if !is_face[p][i] {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    pub fn face_polynomial(&self) -> FacePolynomial {
        FacePolynomial::from_counts(&self.f_vector())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(p, &f)| if p % 2 == 0 { f as i64 } else { -(f as i64) })
            .sum()
    }

    /// `R_K(T) = T q_K(T) - χ(K) T`
    pub fn r_polynomial(&self) -> FacePolynomial {
        FacePolynomial::r_from_counts(&self.f_vector())
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            name: self.name.clone(),
            maximal_simplices: self.maximal_simplices().into_iter().map(|s| s.0).collect(),
        }
    }

    pub fn from_file(file: &ComplexFile) -> Result<Self> {
        Self::from_vertex_lists(file.name.clone(), &file.maximal_simplices)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ComplexFile = serde_json::from_str(s)?;
        Self::from_file(&file)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("complex serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// `q_K(T) = Σ f_p T^p`, or any polynomial of expected counts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FacePolynomial(pub Poly);

impl FacePolynomial {
    pub fn from_counts(f: &[usize]) -> Self {
        FacePolynomial(Poly::new(f.iter().map(|&x| q_int(x as i64)).collect()))
    }

    fn r_from_counts(f: &[usize]) -> Self {
        let q = Self::from_counts(f);
        let chi = q.0.eval(&-Q::one());
        FacePolynomial(q.0.shift_up(1).sub(&Poly::monomial(chi, 1)))
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.0.coeff(i)
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.eval(t)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.to_strings()
    }
}

/// True iff `R_K(-1 - T) = (-1)^{n+1} R_K(T)` exactly, `n = dim K`.
/// Holds for closed homology manifolds; manifoldness is not checked.
pub fn macdonald_symmetry_check(k: &SimplicialComplex) -> bool {
    let Some(n) = k.dim() else { return false };
    let r = k.r_polynomial().0;
    let lhs = r.compose_affine(&-Q::one(), &-Q::one());
    let rhs = if n % 2 == 1 { r.clone() } else { r.scale(&-Q::one()) };
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn malformed_simplices_are_rejected() {
        assert!(Simplex::new(vec![]).is_err());
        assert!(Simplex::new(vec![1, 0]).is_err());
        assert!(Simplex::new(vec![1, 1]).is_err());
        assert!(SimplicialComplex::from_vertex_lists("bad", &[vec![0, 2, 1]]).is_err());
    }

    #[test]
    fn from_maximal_examples() {
        let t = SimplicialComplex::from_vertex_lists("t", &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(t.f_vector(), vec![4, 6, 4, 1]);
        let b = SimplicialComplex::from_vertex_lists(
            "b",
            &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        )
        .unwrap();
        assert_eq!(b.f_vector(), vec![4, 6, 4]);
        let pt = SimplicialComplex::from_vertex_lists("pt", &[vec![0]]).unwrap();
        assert_eq!(pt.f_vector(), vec![1]);
    }

    #[test]
    fn simplices_and_spheres() {
        assert_eq!(SimplicialComplex::standard_simplex(2).f_vector(), vec![3, 3, 1]);
        let c = SimplicialComplex::boundary_sphere(2).unwrap();
        assert_eq!(c.f_vector(), vec![3, 3]);
        assert_eq!(c.euler_characteristic(), 0);
        assert_eq!(SimplicialComplex::boundary_sphere(3).unwrap().euler_characteristic(), 2);
        assert_eq!(SimplicialComplex::standard_simplex(3).euler_characteristic(), 1);
        assert!(SimplicialComplex::boundary_sphere(0).is_err());
        for n in 0..6 {
            let f = SimplicialComplex::standard_simplex(n).f_vector();
            for (p, &fp) in f.iter().enumerate() {
                assert_eq!(fp as u128, crate::rational::binomial(n + 1, p + 1));
            }
        }
    }

    #[test]
    fn ordinals_are_lexicographic() {
        let t = SimplicialComplex::standard_simplex(3);
        let edges: Vec<_> = t.simplices(1).iter().map(|s| s.vertices().to_vec()).collect();
        assert_eq!(
            edges,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        // facets of [0,1,2] in deletion order: [1,2], [0,2], [0,1]
        let i = t.index_of(&s(&[0, 1, 2])).unwrap();
        assert_eq!(t.facet_ordinals(2, i), &[3, 1, 0]);
        let g = t.global_id(2, i);
        assert_eq!(t.from_global_id(g), (2, i));
    }

    #[test]
    fn links() {
        let b = SimplicialComplex::boundary_sphere(3).unwrap();
        assert_eq!(b.link(&s(&[0])).unwrap().f_vector(), vec![3, 3]);
        assert_eq!(b.link(&s(&[0, 1])).unwrap().f_vector(), vec![2]);
        let t = SimplicialComplex::standard_simplex(3);
        assert!(t.link(&s(&[0, 1, 2, 3])).unwrap().is_empty());
        assert!(matches!(b.link(&s(&[0, 1, 2, 3])), Err(Error::NotInComplex(_))));
        assert_eq!(b.closed_star(&s(&[0])).unwrap().f_vector(), vec![4, 6, 3]);
        assert_eq!(b.star(&s(&[0])).unwrap().len(), 1 + 3 + 3);
    }

    #[test]
    fn link_star_duality() {
        let b = SimplicialComplex::boundary_sphere(4).unwrap();
        for sigma in b.iter() {
            let lk = b.link(sigma).unwrap();
            for gamma in lk.iter() {
                assert!(gamma.is_disjoint(sigma));
                assert!(b.contains(&gamma.union(sigma)));
            }
            for t in b.iter() {
                if t.is_disjoint(sigma) && b.contains(&t.union(sigma)) {
                    assert!(lk.contains(t));
                }
            }
        }
    }

    #[test]
    fn joins() {
        let pt = SimplicialComplex::standard_simplex(0);
        assert_eq!(pt.join(&pt).f_vector(), vec![2, 1]);
        let s0 = SimplicialComplex::boundary_sphere(1).unwrap();
        let sq = s0.join(&s0);
        assert_eq!(sq.f_vector(), vec![4, 4]);
        assert_eq!(sq.euler_characteristic(), 0);
        let e = SimplicialComplex::empty("e");
        assert_eq!(sq.join(&e).f_vector(), sq.f_vector());
        assert_eq!(e.join(&sq).f_vector(), sq.f_vector());
    }

    #[test]
    fn face_polynomials() {
        let b = SimplicialComplex::boundary_sphere(3).unwrap();
        assert_eq!(b.face_polynomial().0, Poly::from_ints([4, 6, 4]));
        assert_eq!(b.euler_characteristic(), 2);
        let r = b.r_polynomial();
        assert_eq!(r.0, Poly::from_ints([0, 2, 6, 4]));
        assert_eq!(r.coeff(0), q_int(0));
        let half = crate::rational::q_frac(-1, 2);
        assert_eq!(b.face_polynomial().eval(&half), q_int(2));
    }

    #[test]
    fn macdonald_examples() {
        assert!(macdonald_symmetry_check(&SimplicialComplex::boundary_sphere(3).unwrap()));
        assert!(macdonald_symmetry_check(&SimplicialComplex::boundary_sphere(2).unwrap()));
        assert!(!macdonald_symmetry_check(&SimplicialComplex::standard_simplex(2)));
        assert!(!macdonald_symmetry_check(&SimplicialComplex::empty("e")));
    }

    #[test]
    fn maximal_and_json_round_trip() {
        let k = SimplicialComplex::from_vertex_lists("mixed", &[vec![0, 1, 2], vec![2, 3], vec![5]]).unwrap();
        let file = k.to_file();
        assert_eq!(file.maximal_simplices, vec![vec![5], vec![2, 3], vec![0, 1, 2]]);
        let back = SimplicialComplex::from_json_str(&k.to_json_string()).unwrap();
        assert_eq!(back.f_vector(), k.f_vector());
        assert_eq!(back.name(), "mixed");
    }

    #[test]
    fn not_face_closed_is_detected() {
        let err = SimplicialComplex::from_face_closed("x", vec![vec![s(&[0])], vec![s(&[0, 1])]]);
        assert!(matches!(err, Err(Error::NotFaceClosed(_))));
    }
}
