//! Z/2 cochains, coboundaries and the product Bernoulli measure.

use num::traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::rational::{pow_q, q_to_f64, Q};

/// A mod 2 cochain; bit `i` is its value on the `i`-th simplex of dimension
/// `degree` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cochain {
    degree: usize,
    len: usize,
    words: Vec<u64>,
}

impl Cochain {
    pub fn zero(degree: usize, len: usize) -> Self {
        Cochain {
            degree,
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(degree: usize, len: usize) -> Self {
        let mut c = Self::zero(degree, len);
        for i in 0..len {
            c.set(i, true);
        }
        c
    }

    pub fn from_bits(degree: usize, bits: &[bool]) -> Self {
        let mut c = Self::zero(degree, bits.len());
        for (i, &b) in bits.iter().enumerate() {
            c.set(i, b);
        }
        c
    }

    /// Low `len` bits of `mask`; `len <= 64`.
    pub fn from_mask(degree: usize, len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut c = Self::zero(degree, len);
        if len > 0 {
            c.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        c
    }

    /// The zero cochain on the `degree`-simplices of `k`.
    pub fn zero_on(k: &SimplicialComplex, degree: usize) -> Self {
        Self::zero(degree, k.count(degree))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Big-endian hex of `Σ ε_i 2^i`, padded to `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let mut nib = 0u32;
                for b in 0..4 {
                    let i = 4 * d + b;
                    if i < self.len && self.get(i) {
                        nib |= 1 << b;
                    }
                }
                char::from_digit(nib, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(degree: usize, len: usize, hex: &str) -> Result<Self> {
        let hex = hex.trim();
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        let mut c = Self::zero(degree, len);
        for (pos, ch) in hex.chars().rev().enumerate() {
            let nib = ch
                .to_digit(16)
                .ok_or_else(|| Error::Hex(format!("invalid digit {ch:?} in {hex:?}")))?;
            for b in 0..4 {
                if nib >> b & 1 == 1 {
                    let i = 4 * pos + b;
                    if i >= len {
                        return Err(Error::Hex(format!("{hex:?} sets bit {i} but the cochain has {len} bits")));
                    }
                    c.set(i, true);
                }
            }
        }
        Ok(c)
    }

    fn check_on(&self, k: &SimplicialComplex) -> Result<()> {
        let dim = k.dim();
        if dim.is_none_or(|n| self.degree > n) {
            return Err(Error::DegreeOutOfRange {
                degree: self.degree,
                dim,
            });
        }
        if k.count(self.degree) != self.len {
            return Err(Error::CochainLength {
                degree: self.degree,
                expected: k.count(self.degree),
                got: self.len,
            });
        }
        Ok(())
    }

    pub fn to_file(&self, complex: &str) -> CochainFile {
        CochainFile {
            k_minus_1: self.degree,
            bits_hex: self.to_hex(),
            complex: complex.to_string(),
        }
    }
}

/// `{"k_minus_1": int, "bits_hex": string, "complex": name}`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CochainFile {
    pub k_minus_1: usize,
    pub bits_hex: String,
    pub complex: String,
}

impl CochainFile {
    pub fn to_cochain(&self, k: &SimplicialComplex) -> Result<Cochain> {
        let c = Cochain::from_hex(self.k_minus_1, k.count(self.k_minus_1), &self.bits_hex)?;
        c.check_on(k)?;
        Ok(c)
    }
}

/// `⟨dε, σ⟩` is the parity of the facets of `σ` on which `ε` is 1.
pub fn coboundary(k: &SimplicialComplex, eps: &Cochain) -> Result<Cochain> {
    eps.check_on(k)?;
    let p = eps.degree + 1;
    let mut out = Cochain::zero(p, k.count(p));
    for i in 0..k.count(p) {
        let parity = k
            .facet_ordinals(p, i)
            .iter()
            .filter(|&&f| eps.get(f as usize))
            .count()
            % 2;
        if parity == 1 {
            out.set(i, true);
        }
    }
    Ok(out)
}

pub fn is_cocycle(k: &SimplicialComplex, eps: &Cochain) -> Result<bool> {
    Ok(coboundary(k, eps)?.is_zero())
}

/// Every cochain of the given degree, in increasing mask order.
pub fn enumerate_cochains(
    k: &SimplicialComplex,
    degree: usize,
    max_bits: usize,
) -> Result<impl Iterator<Item = Cochain>> {
    if k.dim().is_none_or(|n| degree > n) {
        return Err(Error::DegreeOutOfRange { degree, dim: k.dim() });
    }
    let len = k.count(degree);
    if len > max_bits.min(63) {
        return Err(Error::CapExceeded {
            what: format!("enumeration of {len}-bit cochains"),
            needed: len as u128,
            cap: max_bits.min(63) as u128,
        });
    }
    Ok((0..1u64 << len).map(move |m| Cochain::from_mask(degree, len, m)))
}

/// `|Z^degree(K)|` by enumeration.
pub fn cocycle_count(k: &SimplicialComplex, degree: usize, max_bits: usize) -> Result<u64> {
    let mut count = 0;
    for eps in enumerate_cochains(k, degree, max_bits)? {
        if is_cocycle(k, &eps)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Product measure: each simplex independently gets 0 with probability `ν`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    nu: Q,
}

impl Measure {
    pub fn new(nu: Q) -> Result<Self> {
        if nu < Q::zero() || nu > Q::one() {
            return Err(Error::invalid(format!("nu = {nu} is outside [0, 1]")));
        }
        Ok(Measure { nu })
    }

    pub fn nu(&self) -> &Q {
        &self.nu
    }

    pub fn nu_f64(&self) -> f64 {
        q_to_f64(&self.nu)
    }

    /// `ν^zeros (1-ν)^ones`
    pub fn mass_counts(&self, zeros: usize, ones: usize) -> Q {
        pow_q(&self.nu, zeros) * pow_q(&(Q::one() - &self.nu), ones)
    }

    pub fn mass(&self, eps: &Cochain) -> Q {
        let ones = eps.count_ones();
        self.mass_counts(eps.len() - ones, ones)
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: &SimplicialComplex, degree: usize, rng: &mut R) -> Cochain {
        sample_bits(self.nu_f64(), degree, k.count(degree), rng)
    }
}

/// Bit is 1 with probability `1 - nu`.
pub fn sample_bits<R: Rng + ?Sized>(nu: f64, degree: usize, len: usize, rng: &mut R) -> Cochain {
    let mut c = Cochain::zero(degree, len);
    for i in 0..len {
        if rng.gen::<f64>() >= nu {
            c.set(i, true);
        }
    }
    c
}

/// Independent stream for one trial of a seeded experiment.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
