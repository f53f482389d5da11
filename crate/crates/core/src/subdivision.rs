//! Barycentric subdivision, interior face counts and the f-vector transfer matrix.

use std::sync::Arc;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, Poly, Q};

/// `Sd(K)`: its vertices are the global ids of the simplices of `K` and its
/// simplices are flags `σ_0 < … < σ_p`. Since a proper face always has a
/// smaller global id, the vertex list of a flag is ascending and its first
/// and last vertices are `ini` and `fin`.
#[derive(Clone, Debug)]
pub struct FlagComplex {
    base: Arc<SimplicialComplex>,
    complex: SimplicialComplex,
}

impl FlagComplex {
    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<SimplicialComplex> {
        &self.base
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn into_complex(self) -> SimplicialComplex {
        self.complex
    }

    /// Global id (in the base) of the smallest simplex of the flag `(p, i)`.
    pub fn ini(&self, p: usize, i: usize) -> usize {
        self.complex.simplex(p, i).vertices()[0] as usize
    }

    /// Global id (in the base) of the largest simplex of the flag `(p, i)`.
    pub fn fin(&self, p: usize, i: usize) -> usize {
        *self.complex.simplex(p, i).vertices().last().unwrap() as usize
    }

    /// The base simplex behind a vertex of `Sd(K)`.
    pub fn base_simplex(&self, vertex: u32) -> &Simplex {
        let (p, i) = self.base.from_global_id(vertex as usize);
        self.base.simplex(p, i)
    }
}

/// Subdivides once, refusing when the result would exceed `cap` simplices.
pub fn barycentric_subdivide_capped(k: &Arc<SimplicialComplex>, cap: u128) -> Result<FlagComplex> {
    let f: Vec<u128> = k.f_vector().iter().map(|&x| x as u128).collect();
    let projected: u128 = project_f_vector(&f, 1)?.iter().sum();
    if projected > cap {
        return Err(Error::CapExceeded {
            what: format!("subdivision of {}", k.name()),
            needed: projected,
            cap,
        });
    }
    let top = k.dim().map_or(0, |n| n + 1);
    let mut per_dim: Vec<Vec<Simplex>> = vec![Vec::new(); top];
    let mut chain = Vec::with_capacity(top);
    for (q, level) in (0..top).map(|q| (q, k.simplices(q))) {
        for (t, tau) in level.iter().enumerate() {
            let g = k.global_id(q, t) as u32;
            chain.clear();
            chain.push(g);
            let full = (1u32 << tau.vertices().len()) - 1;
            extend_chains(k, tau, full, &mut chain, &mut per_dim);
        }
    }
    let complex = SimplicialComplex::from_face_closed(format!("Sd({})", k.name()), per_dim)?;
    Ok(FlagComplex {
        base: Arc::clone(k),
        complex,
    })
}

/// Records the chain (stored top-down) and then extends it downward by
/// every proper non-empty sub-face of `mask`.
fn extend_chains(
    k: &SimplicialComplex,
    tau: &Simplex,
    mask: u32,
    chain: &mut Vec<u32>,
    out: &mut [Vec<Simplex>],
) {
    let mut flag: Vec<u32> = chain.clone();
    flag.reverse();
    out[flag.len() - 1].push(Simplex::from_sorted_unchecked(flag));
    let mut sub = (mask - 1) & mask;
    while sub != 0 {
        let verts: Vec<u32> = tau
            .vertices()
            .iter()
            .enumerate()
            .filter(|(i, _)| sub >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let face = Simplex::from_sorted_unchecked(verts);
        let p = face.dim();
        let g = k.global_id(p, k.index_of(&face).expect("face of a simplex is present")) as u32;
        chain.push(g);
        extend_chains(k, tau, sub, chain, out);
        chain.pop();
        sub = (sub - 1) & mask;
    }
}

/// Subdivides once with the default cap.
pub fn barycentric_subdivide(k: &SimplicialComplex) -> Result<FlagComplex> {
    barycentric_subdivide_capped(&Arc::new(k.clone()), crate::DEFAULT_MAX_SIMPLICES)
}

/// `Sd^d(K)` as a plain complex; `d = 0` returns a copy of `K`.
pub fn subdivide_iter(k: &SimplicialComplex, d: usize, cap: u128) -> Result<SimplicialComplex> {
    let f: Vec<u128> = k.f_vector().iter().map(|&x| x as u128).collect();
    let projected: u128 = project_f_vector(&f, d)?.iter().sum();
    if projected > cap {
        return Err(Error::CapExceeded {
            what: format!("Sd^{d}({})", k.name()),
            needed: projected,
            cap,
        });
    }
    let mut cur = k.clone();
    for _ in 0..d {
        cur = barycentric_subdivide_capped(&Arc::new(cur), cap)?.into_complex();
    }
    if d > 0 {
        cur = cur.with_name(format!("Sd^{d}({})", k.name()));
    }
    Ok(cur)
}

/// `λ_{l,i}`, the number of interior `(i-1)`-faces of `Sd(Δ_{l-1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTable {
    rows: Vec<Vec<u128>>,
}

/// Largest `l` for which every `λ_{l,i}` fits in `u128`.
pub const LAMBDA_MAX: usize = 30;

impl LambdaTable {
    /// Surjection count `Σ_j C(i,j) (-1)^{i-j} j^l`.
    pub fn by_formula(max_l: usize) -> Result<Self> {
        if max_l > LAMBDA_MAX {
            return Err(Error::invalid(format!("lambda table limited to l <= {LAMBDA_MAX}")));
        }
        let rows = (0..=max_l)
            .map(|l| {
                (0..=l)
                    .map(|i| {
                        let mut acc = BigInt::zero();
                        for j in 0..=i {
                            let term = BigInt::from(binomial(i, j)) * BigInt::from(j).pow(l as u32);
                            if (i - j) % 2 == 0 {
                                acc += term;
                            } else {
                                acc -= term;
                            }
                        }
                        u128::try_from(acc).expect("surjection count fits")
                    })
                    .collect()
            })
            .collect();
        Ok(LambdaTable { rows })
    }

    /// Counts flags of `Sd(Δ_{l-1})` ending at the top simplex.
    pub fn by_direct_count(max_l: usize) -> Result<Self> {
        if max_l > 8 {
            return Err(Error::invalid("direct lambda count limited to l <= 8"));
        }
        let mut rows = vec![vec![1u128]];
        for l in 1..=max_l {
            let delta = Arc::new(SimplicialComplex::standard_simplex(l - 1));
            let sd = barycentric_subdivide_capped(&delta, u128::MAX)?;
            let top = delta.total_count() - 1;
            let mut row = vec![0u128; l + 1];
            for (p, slot) in row.iter_mut().enumerate().skip(1) {
                let dim = p - 1;
                *slot = (0..sd.complex().count(dim)).filter(|&i| sd.fin(dim, i) == top).count() as u128;
            }
            rows.push(row);
        }
        Ok(LambdaTable { rows })
    }

    pub fn max_l(&self) -> usize {
        self.rows.len() - 1
    }

    /// `λ_{l,i}`, zero when `i > l`.
    pub fn get(&self, l: usize, i: usize) -> u128 {
        self.rows.get(l).and_then(|r| r.get(i)).copied().unwrap_or(0)
    }
}

/// `λ_{l,i}` for a single entry.
pub fn lambda(l: usize, i: usize) -> u128 {
    if i > l {
        return 0;
    }
    LambdaTable::by_formula(l).map(|t| t.get(l, i)).unwrap_or(0)
}

/// `Λ` with `f(Sd K) = Λ f(K)` for `dim K <= n`; entry `[j][p] = λ_{p+1,j+1}`.
pub fn transfer_matrix(n: usize) -> Result<Vec<Vec<u128>>> {
    let table = LambdaTable::by_formula(n + 1)?;
    Ok((0..=n)
        .map(|j| (0..=n).map(|p| table.get(p + 1, j + 1)).collect())
        .collect())
}

/// `Λ^d f`, with overflow reported as a cap error.
pub fn project_f_vector(f: &[u128], d: usize) -> Result<Vec<u128>> {
    if f.is_empty() {
        return Ok(Vec::new());
    }
    let n = f.len() - 1;
    let m = transfer_matrix(n)?;
    let mut cur = f.to_vec();
    for _ in 0..d {
        let mut next = vec![0u128; n + 1];
        for (j, slot) in next.iter_mut().enumerate() {
            for p in j..=n {
                *slot = m[j][p]
                    .checked_mul(cur[p])
                    .and_then(|x| slot.checked_add(x))
                    .ok_or_else(|| Error::CapExceeded {
                        what: format!("f-vector of Sd^{d}"),
                        needed: u128::MAX,
                        cap: u128::MAX,
                    })?;
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Exact limit shape `f_p(Sd^d K) ~ q_{p,n} (n+1)!^d f_n(K)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QCoefficients {
    pub n: usize,
    pub q: Vec<Q>,
}

impl QCoefficients {
    pub fn poly(&self) -> Poly {
        Poly::new(self.q.clone())
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.poly().eval(t)
    }

    pub fn get(&self, p: usize) -> Q {
        self.q.get(p).cloned().unwrap_or_else(Q::zero)
    }
}

/// Solves `Λ q = (n+1)! q` with `q_n = 1`, by fraction-free elimination.
pub fn q_coefficients(n: usize) -> Result<QCoefficients> {
    if n == 0 {
        return Err(Error::invalid("q coefficients need n >= 1"));
    }
    let m = transfer_matrix(n)?;
    let eig = BigInt::from(factorial(n + 1));
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(|(p, &x)| BigInt::from(x) - if j == p { eig.clone() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let null = bareiss_nullspace(&mut a);
    let v = null
        .into_iter()
        .next()
        .ok_or_else(|| Error::VerificationFailed("transfer matrix has no eigenvector".into()))?;
    let top = v[n].clone();
    if top.is_zero() {
        return Err(Error::VerificationFailed("eigenvector has q_n = 0".into()));
    }
    let q = v.into_iter().map(|x| x / top.clone()).collect();
    Ok(QCoefficients { n, q })
}

/// Kernel basis of an integer matrix; `a` is overwritten by its echelon form.
fn bareiss_nullspace(a: &mut [Vec<BigInt>]) -> Vec<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Q::zero(); cols];
        x[free] = Q::one();
        for (ri, &pc) in pivots.iter().enumerate().rev() {
            let mut s = Q::zero();
            for j in pc + 1..cols {
                s += Q::from_integer(a[ri][j].clone()) * &x[j];
            }
            x[pc] = -s / Q::from_integer(a[ri][pc].clone());
        }
        basis.push(x);
    }
    basis
}

/// `q_n^∞(t) = Σ_p q_{p,n} t^p`.
pub fn q_infinity_eval(n: usize, t: &Q) -> Result<Q> {
    Ok(q_coefficients(n)?.eval(t))
}

/// `C(p+1, l+1) λ_{p-l, i}`, the number of flags `σ_0 < … < σ_i = Δ_p` with `dim σ_0 = l`.
pub fn index_count(l: usize, p: usize, i: usize) -> u128 {
    if l > p {
        return 0;
    }
    binomial(p + 1, l + 1) * lambda(p - l, i)
}

/// True iff every entry of `v` is positive.
pub fn all_positive(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_frac, q_int};

    fn sd(k: &SimplicialComplex) -> FlagComplex {
        barycentric_subdivide(k).unwrap()
    }

    #[test]
    fn small_subdivisions() {
        assert_eq!(sd(&SimplicialComplex::standard_simplex(1)).complex().f_vector(), vec![3, 2]);
        let s2 = sd(&SimplicialComplex::standard_simplex(2));
        assert_eq!(s2.complex().f_vector(), vec![7, 12, 6]);
        assert_eq!(s2.complex().euler_characteristic(), 1);
        let t = SimplicialComplex::standard_simplex(3);
        let sd2 = subdivide_iter(&t, 2, u128::MAX).unwrap();
        assert_eq!(sd2.f_vector()[3], 576);
    }

    #[test]
    fn flags_expose_ini_and_fin() {
        let s2 = sd(&SimplicialComplex::standard_simplex(2));
        let base = s2.base();
        for p in 0..3 {
            for i in 0..s2.complex().count(p) {
                let ini = s2.base_simplex(s2.ini(p, i) as u32);
                let fin = s2.base_simplex(s2.fin(p, i) as u32);
                assert!(ini.is_face_of(fin));
                let vs = s2.complex().simplex(p, i).vertices();
                for w in vs.windows(2) {
                    let a = s2.base_simplex(w[0]);
                    let b = s2.base_simplex(w[1]);
                    assert!(a.is_face_of(b) && a != b);
                }
            }
        }
        assert_eq!(base.total_count(), 7);
    }

    #[test]
    fn lambda_conventions_and_methods_agree() {
        let a = LambdaTable::by_formula(6).unwrap();
        let b = LambdaTable::by_direct_count(6).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(2, 1), 1);
        assert_eq!(a.get(0, 0), 1);
        for l in 1..=6 {
            assert_eq!(a.get(l, 0), 0);
            assert_eq!(a.get(l, l), factorial(l));
        }
        assert_eq!(
            (1..=4).map(|i| a.get(4, i)).collect::<Vec<_>>(),
            vec![1, 14, 36, 24]
        );
    }

    #[test]
    fn transfer_matrices() {
        assert_eq!(transfer_matrix(1).unwrap(), vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(
            transfer_matrix(2).unwrap(),
            vec![vec![1, 1, 1], vec![0, 2, 6], vec![0, 0, 6]]
        );
        assert_eq!(project_f_vector(&[3, 3, 1], 1).unwrap(), vec![7, 12, 6]);
        for n in 0..5 {
            let m = transfer_matrix(n).unwrap();
            for (p, row) in m.iter().enumerate() {
                assert_eq!(row[p], factorial(p + 1));
            }
        }
    }

    #[test]
    fn projection_matches_materialization() {
        let k = SimplicialComplex::boundary_sphere(3).unwrap();
        for d in 0..3 {
            let f: Vec<u128> = k.f_vector().iter().map(|&x| x as u128).collect();
            let direct = subdivide_iter(&k, d, u128::MAX).unwrap();
            let got: Vec<u128> = direct.f_vector().iter().map(|&x| x as u128).collect();
            assert_eq!(project_f_vector(&f, d).unwrap(), got);
            assert_eq!(direct.euler_characteristic(), 2);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let k = SimplicialComplex::standard_simplex(3);
        let err = subdivide_iter(&k, 3, 1000).unwrap_err();
        assert!(err.is_cap_exceeded());
    }

    #[test]
    fn q_vectors() {
        assert_eq!(q_coefficients(1).unwrap().q, vec![q_int(1), q_int(1)]);
        assert_eq!(
            q_coefficients(2).unwrap().q,
            vec![q_frac(1, 2), q_frac(3, 2), q_int(1)]
        );
        assert!(q_infinity_eval(1, &q_int(-1)).unwrap().is_zero());
        assert!(q_infinity_eval(2, &q_frac(-1, 2)).unwrap().is_zero());
        assert!(q_coefficients(0).is_err());
    }

    #[test]
    fn index_count_matches_flags() {
        for p in 0..=5usize {
            let delta = Arc::new(SimplicialComplex::standard_simplex(p));
            let s = barycentric_subdivide_capped(&delta, u128::MAX).unwrap();
            let top = delta.total_count() - 1;
            for i in 0..=p {
                for l in 0..=p {
                    let direct = (0..s.complex().count(i))
                        .filter(|&j| s.fin(i, j) == top && s.base_simplex(s.ini(i, j) as u32).dim() == l)
                        .count() as u128;
                    assert_eq!(direct, index_count(l, p, i), "l={l} p={p} i={i}");
                }
            }
        }
    }
}
