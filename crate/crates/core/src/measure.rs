//! Probability that a random cochain on `Δ_p` is a cocycle, and the density of `m_k`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num::traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{binomial, pow_q, q_frac, q_int, Q};

/// How `mu_z` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuRoute {
    /// Closed form if one applies, else enumeration, else recursion;
    /// every route cheap enough is also run and compared.
    Auto,
    #[serde(rename = "enum")]
    Enumeration,
    #[serde(rename = "recursive")]
    Recursion,
    #[serde(rename = "closed")]
    Closed,
}

impl std::str::FromStr for MuRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MuRoute::Auto),
            "enum" => Ok(MuRoute::Enumeration),
            "recursive" => Ok(MuRoute::Recursion),
            "closed" => Ok(MuRoute::Closed),
            _ => Err(Error::invalid(format!("unknown route {s:?}"))),
        }
    }
}

/// Bit count up to which `Auto` runs every applicable route.
pub const CROSS_CHECK_BITS: usize = 16;

/// Lexicographically ordered `(size)`-subsets of `0..n` as bit masks.
fn subsets(n: usize, size: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() as usize == size).collect();
    out.sort_by_key(|&m| {
        let mut v: Vec<u32> = (0..n as u32).filter(|i| m >> i & 1 == 1).collect();
        v.resize(size, u32::MAX);
        v
    });
    out
}

/// For each `size`-face of the vertex set `0..n`, the bit mask of its
/// facets among the `(size-1)`-faces.
fn facet_masks(n: usize, size: usize) -> Vec<u64> {
    let lower = subsets(n, size - 1);
    let pos: HashMap<u32, usize> = lower.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    subsets(n, size)
        .into_iter()
        .map(|m| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| 1u64 << pos[&(m & !(1 << i))])
                .fold(0, |a, b| a | b)
        })
        .collect()
}

/// Coboundary of the cochain `mask` on the `(size-1)`-faces, as a mask on the `size`-faces.
fn coboundary_mask(masks: &[u64], eps: u64) -> u64 {
    masks
        .iter()
        .enumerate()
        .filter(|(_, &f)| (f & eps).count_ones() % 2 == 1)
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

fn check_range(k: usize, p: usize) -> Result<()> {
    if k == 0 || k > p {
        return Err(Error::invalid(format!("mu_z needs 1 <= k <= p, got k={k}, p={p}")));
    }
    Ok(())
}

fn check_nu(nu: &Q) -> Result<()> {
    if *nu < Q::zero() || *nu > Q::one() {
        return Err(Error::invalid(format!("nu = {nu} is outside [0, 1]")));
    }
    Ok(())
}

fn enumeration_bits(k: usize, p: usize) -> usize {
    binomial(p + 1, k) as usize
}

fn recursion_bits(k: usize, p: usize) -> usize {
    binomial(p, k - 1) as usize
}

fn cap_error(route: &str, needed: usize, cap: usize) -> Error {
    Error::CapExceeded {
        what: format!("{route} route of mu_z"),
        needed: needed as u128,
        cap: cap as u128,
    }
}

/// Direct enumeration of `Z^{k-1}(Δ_p)`.
pub fn mu_z_enumeration(nu: &Q, k: usize, p: usize, max_bits: usize) -> Result<Q> {
    check_range(k, p)?;
    check_nu(nu)?;
    let bits = enumeration_bits(k, p);
    if bits > max_bits.min(40) {
        return Err(cap_error("enumeration", bits, max_bits.min(40)));
    }
    let masks = facet_masks(p + 1, k + 1);
    let mut by_weight = vec![0u64; bits + 1];
    for eps in 0u64..1 << bits {
        if masks.iter().all(|&f| (f & eps).count_ones() % 2 == 0) {
            by_weight[eps.count_ones() as usize] += 1;
        }
    }
    let one_minus = Q::one() - nu;
    Ok(by_weight
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| q_int(c as i64) * pow_q(nu, bits - w) * pow_q(&one_minus, w))
        .sum())
}

/// `Σ_{η ∈ C^{k-2}(Δ_{p-1})} μ(η) μ(dη)`, for `k >= 2`.
pub fn mu_z_recursion(nu: &Q, k: usize, p: usize, max_bits: usize) -> Result<Q> {
    check_range(k, p)?;
    check_nu(nu)?;
    if k < 2 {
        return Err(Error::invalid("recursive route needs k >= 2"));
    }
    let bits = recursion_bits(k, p);
    if bits > max_bits.min(40) {
        return Err(cap_error("recursion", bits, max_bits.min(40)));
    }
    let d_bits = binomial(p, k) as usize;
    let masks = facet_masks(p, k);
    let mut pairs: HashMap<(usize, usize), u64> = HashMap::new();
    for eta in 0u64..1 << bits {
        let d = coboundary_mask(&masks, eta);
        *pairs
            .entry((eta.count_ones() as usize, d.count_ones() as usize))
            .or_default() += 1;
    }
    let one_minus = Q::one() - nu;
    let mut keys: Vec<_> = pairs.into_iter().collect();
    keys.sort_unstable();
    Ok(keys
        .into_iter()
        .map(|((a, b), c)| {
            q_int(c as i64)
                * pow_q(nu, bits - a + d_bits - b)
                * pow_q(&one_minus, a + b)
        })
        .sum())
}

/// The closed forms, or `None` when none applies.
pub fn mu_z_closed(nu: &Q, k: usize, p: usize) -> Result<Option<Q>> {
    check_range(k, p)?;
    check_nu(nu)?;
    let one_minus = Q::one() - nu;
    let sign_form = || {
        let s = pow_q(&(q_int(2) * nu - Q::one()), k + 1);
        (Q::one() + s) / q_int(2)
    };
    if nu.is_zero() || nu.is_one() {
        return Ok(Some(sign_form()));
    }
    if *nu == q_frac(1, 2) {
        let e = binomial(p, k) as usize;
        return Ok(Some(pow_q(&q_frac(1, 2), e)));
    }
    if k == 1 {
        return Ok(Some(pow_q(nu, p + 1) + pow_q(&one_minus, p + 1)));
    }
    if k == p {
        return Ok(Some(sign_form()));
    }
    if k == 2 {
        let mut acc = Q::zero();
        for l in 0..=p {
            let zeros = l + binomial(l, 2) as usize + binomial(p - l, 2) as usize;
            let ones = (l + 1) * (p - l);
            acc += q_int(binomial(p, l) as i64) * pow_q(nu, zeros) * pow_q(&one_minus, ones);
        }
        return Ok(Some(acc));
    }
    Ok(None)
}

type CacheKey = (Q, usize, usize, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Q>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Q>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `μ_ν(Z^{k-1}(Δ_p))` by the requested route.
pub fn mu_z(nu: &Q, k: usize, p: usize, route: MuRoute, max_bits: usize) -> Result<Q> {
    match route {
        MuRoute::Enumeration => mu_z_enumeration(nu, k, p, max_bits),
        MuRoute::Recursion => mu_z_recursion(nu, k, p, max_bits),
        MuRoute::Closed => mu_z_closed(nu, k, p)?
            .ok_or_else(|| Error::invalid(format!("no closed form for k={k}, p={p}, nu={nu}"))),
        MuRoute::Auto => {
            let key = (nu.clone(), k, p, max_bits);
            if let Some(v) = cache().lock().unwrap().get(&key) {
                return Ok(v.clone());
            }
            let v = mu_z_auto_uncached(nu, k, p, max_bits)?;
            cache().lock().unwrap().insert(key, v.clone());
            Ok(v)
        }
    }
}

fn mu_z_auto_uncached(nu: &Q, k: usize, p: usize, max_bits: usize) -> Result<Q> {
    let mut results: Vec<(&str, Q)> = Vec::new();
    if let Some(v) = mu_z_closed(nu, k, p)? {
        results.push(("closed", v));
    }
    let eb = enumeration_bits(k, p);
    if eb <= max_bits && (results.is_empty() || eb <= CROSS_CHECK_BITS) {
        results.push(("enum", mu_z_enumeration(nu, k, p, max_bits)?));
    }
    let rb = recursion_bits(k, p);
    if k >= 2 && rb <= max_bits && (results.is_empty() || rb <= CROSS_CHECK_BITS) {
        results.push(("recursive", mu_z_recursion(nu, k, p, max_bits)?));
    }
    let Some((_, first)) = results.first().cloned() else {
        return Err(Error::CapExceeded {
            what: format!("mu_z(k={k}, p={p}) without a closed form"),
            needed: rb.min(eb) as u128,
            cap: max_bits as u128,
        });
    };
    for (name, v) in &results[1..] {
        if *v != first {
            return Err(Error::RouteMismatch {
                what: format!("mu_z(nu={nu}, k={k}, p={p})"),
                detail: format!("{} gave {first}, {name} gave {v}", results[0].0),
            });
        }
    }
    Ok(first)
}

/// `mu_z` by the automatic route with the default enumeration bound.
pub fn mu_z_auto(nu: &Q, k: usize, p: usize) -> Result<Q> {
    mu_z(nu, k, p, MuRoute::Auto, crate::DEFAULT_MAX_ENUM_BITS)
}

/// Probability that the barycenter of a `p`-simplex lies in `V_ε`.
/// `k = 0` gives the counting density 1.
pub fn m_k_density(nu: &Q, k: usize, p: usize) -> Result<Q> {
    check_nu(nu)?;
    if k == 0 {
        return Ok(Q::one());
    }
    if p < k {
        return Ok(Q::zero());
    }
    Ok(Q::one() - mu_z_auto(nu, k, p)?)
}

/// `m_k(K^{[p]}) = f_p(K) · density`.
pub fn m_k_of_dimension_class(k_complex: &crate::complex::SimplicialComplex, nu: &Q, k: usize, p: usize) -> Result<Q> {
    Ok(q_int(k_complex.count(p) as i64) * m_k_density(nu, k, p)?)
}
