//! Exact expected values under the product measure.

use num::traits::{One, Zero};
use serde::Serialize;

use crate::complex::{FacePolynomial, SimplicialComplex};
use crate::error::{Error, Result};
use crate::measure::{m_k_density, mu_z_auto};
use crate::rational::{binomial, pow_q, q_frac, q_int, q_u128, Poly, Q};
use crate::subdivision::{lambda, q_coefficients, LambdaTable};

/// `δ^{p,k}(T)`: expected face polynomial of `V_ε` inside the open simplex `Δ̊_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaPolynomial {
    pub p: usize,
    pub k: usize,
    pub nu: Q,
    pub coeffs: Vec<Q>,
}

impl DeltaPolynomial {
    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn poly(&self) -> Poly {
        Poly::new(self.coeffs.clone())
    }

    /// `τ_p = δ^{p,k}(-1)`
    pub fn at_minus_one(&self) -> Q {
        self.poly().eval(&-Q::one())
    }
}

fn check_pk(p: usize, k: usize) -> Result<()> {
    if k == 0 || k > p {
        return Err(Error::invalid(format!("need 1 <= k <= p, got k={k}, p={p}")));
    }
    Ok(())
}

fn complement_mu(nu: &Q, k: usize, l: usize) -> Result<Q> {
    Ok(Q::one() - mu_z_auto(nu, k, l)?)
}

/// `δ^{p,k}_i = Σ_{l=k}^{p-i} C(p+1,l+1) λ_{p-l,i} (1 - μ(Z^{k-1}(Δ_l)))`
pub fn delta_polynomial(p: usize, k: usize, nu: &Q) -> Result<DeltaPolynomial> {
    check_pk(p, k)?;
    let table = LambdaTable::by_formula(p)?;
    let mut coeffs = Vec::with_capacity(p - k + 1);
    for i in 0..=p - k {
        let mut acc = Q::zero();
        for l in k..=p - i {
            let w = binomial(p + 1, l + 1) * table.get(p - l, i);
            if w != 0 {
                acc += q_u128(w) * complement_mu(nu, k, l)?;
            }
        }
        coeffs.push(acc);
    }
    Ok(DeltaPolynomial {
        p,
        k,
        nu: nu.clone(),
        coeffs,
    })
}

/// The same coefficients through the surjection-count form
/// `Σ_j C(i,j)(-1)^{i-j} Σ_{l=i}^{p-k} C(p+1,l)(1 - μ(Δ_{p-l})) j^l`, with `0^0 = 1`.
pub fn delta_polynomial_surjection(p: usize, k: usize, nu: &Q) -> Result<Vec<Q>> {
    check_pk(p, k)?;
    let mut coeffs = Vec::with_capacity(p - k + 1);
    for i in 0..=p - k {
        let mut acc = Q::zero();
        for j in 0..=i {
            let mut inner = Q::zero();
            for l in i..=p - k {
                let jl = if l == 0 { Q::one() } else { pow_q(&q_int(j as i64), l) };
                inner += q_u128(binomial(p + 1, l)) * complement_mu(nu, k, p - l)? * jl;
            }
            let term = q_u128(binomial(i, j)) * inner;
            if (i - j) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        coeffs.push(acc);
    }
    Ok(coeffs)
}

/// `τ_p = Σ_{l=k}^{p} C(p+1,l+1) (-1)^{p-l} (1 - μ(Z^{k-1}(Δ_l)))`
pub fn tau(p: usize, k: usize, nu: &Q) -> Result<Q> {
    check_pk(p, k)?;
    let mut acc = Q::zero();
    for l in k..=p {
        let term = q_u128(binomial(p + 1, l + 1)) * complement_mu(nu, k, l)?;
        if (p - l).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

fn f_q(k: &SimplicialComplex, p: usize) -> Q {
    q_int(k.count(p) as i64)
}

/// `E(q_{V_ε}(T)) = Σ_{p=k}^n f_p(K) δ^{p,k}(T)`
pub fn expected_face_polynomial(kc: &SimplicialComplex, k: usize, nu: &Q) -> Result<FacePolynomial> {
    let f: Vec<u128> = kc.f_vector().iter().map(|&x| x as u128).collect();
    expected_face_polynomial_from_f(&f, k, nu)
}

/// As [`expected_face_polynomial`], from an f-vector alone.
pub fn expected_face_polynomial_from_f(f: &[u128], k: usize, nu: &Q) -> Result<FacePolynomial> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut acc = Poly::zero();
    for (p, &fp) in f.iter().enumerate().skip(k) {
        if fp == 0 {
            continue;
        }
        acc = acc.add(&delta_polynomial(p, k, nu)?.poly().scale(&q_u128(fp)));
    }
    Ok(FacePolynomial(acc))
}

/// `E(χ(V_ε)) = Σ_{p=k}^n f_p(K) τ_p`
pub fn expected_chi(kc: &SimplicialComplex, k: usize, nu: &Q) -> Result<Q> {
    let f: Vec<u128> = kc.f_vector().iter().map(|&x| x as u128).collect();
    expected_chi_from_f(&f, k, nu)
}

pub fn expected_chi_from_f(f: &[u128], k: usize, nu: &Q) -> Result<Q> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut acc = Q::zero();
    for (p, &fp) in f.iter().enumerate().skip(k) {
        acc += q_u128(fp) * tau(p, k, nu)?;
    }
    Ok(acc)
}

/// `E(χ) = ν q_K(-ν) + (1-ν) q_K(ν-1) - χ(K)` for `k = 1`.
pub fn expected_chi_k1(kc: &SimplicialComplex, nu: &Q) -> Q {
    let q = kc.face_polynomial();
    let one_minus = Q::one() - nu;
    nu * q.eval(&-nu.clone()) + &one_minus * q.eval(&-one_minus.clone()) - q_int(kc.euler_characteristic())
}

/// `E(f̃_p) = f_{p+1}(K) (1 - ν^{p+2} - (1-ν)^{p+2})`, `p = 0..n-1`.
pub fn expected_cw_polynomial(kc: &SimplicialComplex, nu: &Q) -> FacePolynomial {
    let n = kc.dim().unwrap_or(0);
    let one_minus = Q::one() - nu;
    FacePolynomial(Poly::new(
        (0..n)
            .map(|p| f_q(kc, p + 1) * (Q::one() - pow_q(nu, p + 2) - pow_q(&one_minus, p + 2)))
            .collect(),
    ))
}

/// `(q_K(T) - ν q_K(νT) - (1-ν) q_K((1-ν)T)) / T`
pub fn expected_cw_by_generating_function(kc: &SimplicialComplex, nu: &Q) -> FacePolynomial {
    let q = kc.face_polynomial().0;
    let one_minus = Q::one() - nu;
    let a = q.compose_affine(&Q::zero(), nu).scale(nu);
    let b = q.compose_affine(&Q::zero(), &one_minus).scale(&one_minus);
    let t_qtilde = q.sub(&a).sub(&b);
    FacePolynomial(t_qtilde.shift_down().expect("constant term cancels"))
}

/// `E(f̌_i) = f_{n-i}(K) · (1 - μ(Z^{k-1}(Δ_{n-i})))`, `i = 0..n-k`.
pub fn expected_block_counts(kc: &SimplicialComplex, k: usize, nu: &Q) -> Result<Vec<Q>> {
    let Some(n) = kc.dim() else { return Ok(Vec::new()) };
    if k == 0 || k > n {
        return Ok(Vec::new());
    }
    (0..=n - k)
        .map(|i| Ok(f_q(kc, n - i) * m_k_density(nu, k, n - i)?))
        .collect()
}

/// `c_i^+(n,k)` for `i = 0..n-k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CPlusConstants {
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "serialize_qs")]
    pub c: Vec<Q>,
}

fn serialize_qs<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl CPlusConstants {
    pub fn alternating_sum(&self) -> Q {
        self.c
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 0 { c.clone() } else { -c.clone() })
            .sum()
    }
}

/// `c_i^+(n,k) = Σ_{p=k+i}^n δ^{p,k}_i q_{p,n}`
pub fn c_plus(n: usize, k: usize, nu: &Q) -> Result<CPlusConstants> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let q = q_coefficients(n)?;
    let deltas = (k..=n)
        .map(|p| delta_polynomial(p, k, nu))
        .collect::<Result<Vec<_>>>()?;
    let c = (0..=n - k)
        .map(|i| {
            (k + i..=n)
                .map(|p| deltas[p - k].coeff(i) * q.get(p))
                .sum()
        })
        .collect();
    Ok(CPlusConstants { n, k, c })
}

/// `c_i^+` regrouped by the dimension of `ini`:
/// `Σ_{p=k}^{n-i} (1 - μ(Δ_p)) Σ_{h=p+i}^n q_{h,n} f_p(Δ_h) λ_{h-p,i}`.
pub fn c_plus_by_ini_dimension(n: usize, k: usize, nu: &Q) -> Result<Vec<Q>> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let q = q_coefficients(n)?;
    (0..=n - k)
        .map(|i| {
            let mut acc = Q::zero();
            for p in k..=n - i {
                let mut inner = Q::zero();
                for h in p + i..=n {
                    inner += q.get(h) * q_u128(binomial(h + 1, p + 1) * lambda(h - p, i));
                }
                acc += complement_mu(nu, k, p)? * inner;
            }
            Ok(acc)
        })
        .collect()
}

/// `Σ_{p=k}^n τ_p q_{p,n}`
pub fn tau_q_sum(n: usize, k: usize, nu: &Q) -> Result<Q> {
    let q = q_coefficients(n)?;
    (k..=n).map(|p| Ok(tau(p, k, nu)? * q.get(p))).sum()
}

/// `E(χ) = ((-1)^n - 1) R_K(-ν)`; meaningful when `K` is a closed homology manifold.
pub fn expected_chi_homology_manifold(kc: &SimplicialComplex, nu: &Q) -> Q {
    let Some(n) = kc.dim() else { return Q::zero() };
    if n % 2 == 0 {
        return Q::zero();
    }
    q_int(-2) * kc.r_polynomial().eval(&-nu.clone())
}

/// `(χ(K), Σ_p (-1/2)^p f_p(K))`
pub fn euler_identity_even_manifold(kc: &SimplicialComplex) -> (Q, Q) {
    (
        q_int(kc.euler_characteristic()),
        kc.face_polynomial().eval(&q_frac(-1, 2)),
    )
}

/// `(χ(K), ν q_K(-ν) + (1-ν) q_K(ν-1))`
pub fn euler_identity_general(kc: &SimplicialComplex, nu: &Q) -> (Q, Q) {
    let q = kc.face_polynomial();
    let one_minus = Q::one() - nu;
    (
        q_int(kc.euler_characteristic()),
        nu * q.eval(&-nu.clone()) + &one_minus * q.eval(&-one_minus.clone()),
    )
}
