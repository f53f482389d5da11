//! Exhaustive and Monte Carlo experiments over random cochains.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cochain::{sample_bits, trial_rng, Cochain, Measure};
use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::expectation::{c_plus, expected_chi_from_f, expected_face_polynomial_from_f};
use crate::homology::BettiVector;
use crate::rational::{factorial, pow_q, q_int, q_to_f64, q_u128, Q};
use crate::subcomplex::{block_counts, build_v, cw_cell_counts, VSubcomplex};
use crate::subdivision::{barycentric_subdivide_capped, project_f_vector, subdivide_iter, FlagComplex};

/// Two-sided 99% normal quantile.
pub const Z_99_TWO_SIDED: f64 = 2.5758293035489004;
/// One-sided 99% normal quantile.
pub const Z_99_ONE_SIDED: f64 = 2.3263478740408408;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_simplices: u128,
    pub max_enum_bits: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_simplices: crate::DEFAULT_MAX_SIMPLICES,
            max_enum_bits: crate::DEFAULT_MAX_ENUM_BITS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    #[serde(rename = "montecarlo")]
    MonteCarlo { trials: u64 },
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub complex: SimplicialComplex,
    pub k: usize,
    pub nu: Q,
    /// Number of subdivisions applied to the complex before `ε` is drawn.
    pub depth: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Also tally connected components of `V_ε` by Betti type.
    pub census: bool,
    pub caps: Caps,
}

impl ExperimentSpec {
    pub fn exhaustive(complex: SimplicialComplex, k: usize, nu: Q) -> Self {
        ExperimentSpec {
            complex,
            k,
            nu,
            depth: 0,
            mode: Mode::Exhaustive,
            seed: 0,
            census: false,
            caps: Caps::default(),
        }
    }

    pub fn monte_carlo(complex: SimplicialComplex, k: usize, nu: Q, trials: u64, seed: u64) -> Self {
        ExperimentSpec {
            mode: Mode::MonteCarlo { trials },
            seed,
            ..Self::exhaustive(complex, k, nu)
        }
    }
}

/// One statistic of a report. Exact runs fill `exact`; Monte Carlo runs fill
/// `mean`, `variance` and the 99% `ci_radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_radius: Option<f64>,
}

impl Statistic {
    /// Exact value as a float, or the sample mean.
    pub fn value(&self) -> f64 {
        match (&self.exact, self.mean) {
            (Some(s), _) => crate::rational::parse_q(s).map(|q| q_to_f64(&q)).unwrap_or(f64::NAN),
            (None, Some(m)) => m,
            _ => f64::NAN,
        }
    }

    pub fn exact_q(&self) -> Option<Q> {
        self.exact.as_deref().and_then(|s| crate::rational::parse_q(s).ok())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub artifact_version: String,
    pub complex: String,
    pub n: usize,
    pub k: usize,
    pub nu: String,
    pub depth: usize,
    #[serde(flatten)]
    pub mode: Mode,
    pub approx: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// `(n+1)!^d · f_n(K)`
    pub normalization: String,
    pub host_f_vector: Vec<usize>,
    pub statistics: Vec<Statistic>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<serde_json::Value>,
}

impl ExperimentReport {
    pub fn get(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "statistic,d,value,ci_radius,normalization"
    }

    /// CSV rows with the header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        let norm = normalization_f64(&self.normalization);
        for s in &self.statistics {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.name,
                self.depth,
                s.value(),
                s.ci_radius.map_or(String::new(), |r| r.to_string()),
                norm
            ));
        }
        out
    }
}

fn normalization_f64(s: &str) -> f64 {
    crate::rational::parse_q(s).map(|q| q_to_f64(&q)).unwrap_or(f64::NAN)
}

/// Connected components of `V_ε` tallied by trimmed Betti vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaCount {
    pub components: usize,
    pub by_type: BTreeMap<String, usize>,
}

impl SigmaCount {
    fn key(b: &[usize]) -> String {
        b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn count(&self, betti: &[usize]) -> usize {
        self.by_type.get(&Self::key(betti)).copied().unwrap_or(0)
    }

    /// Components with Betti vector `(1,0,1)`.
    pub fn spheres(&self) -> usize {
        self.count(&[1, 0, 1])
    }

    /// Components with Betti vector `(1,1)`.
    pub fn circles(&self) -> usize {
        self.count(&[1, 1])
    }

    /// Components with Betti vector `(1,2g,1)`.
    pub fn genus(&self, g: usize) -> usize {
        self.count(&[1, 2 * g, 1])
    }
}

pub fn census_from_bettis(bettis: &[BettiVector]) -> SigmaCount {
    let mut by_type = BTreeMap::new();
    for b in bettis {
        *by_type.entry(SigmaCount::key(&b.trimmed().0)).or_insert(0) += 1;
    }
    SigmaCount {
        components: bettis.len(),
        by_type,
    }
}

pub fn component_census(v: &VSubcomplex) -> SigmaCount {
    census_from_bettis(&v.chain_complex().component_bettis())
}

/// Host complexes and the statistic layout for a spec.
struct Evaluator {
    host: Arc<FlagComplex>,
    k: usize,
    n: usize,
    census: bool,
    names: Vec<String>,
}

impl Evaluator {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        let n = spec
            .complex
            .dim()
            .ok_or_else(|| Error::invalid("experiments need a non-empty complex"))?;
        if spec.k == 0 || spec.k > n {
            return Err(Error::invalid(format!("k = {} must lie in 1..={n}", spec.k)));
        }
        let base = subdivide_iter(&spec.complex, spec.depth, spec.caps.max_simplices)?;
        let host = Arc::new(barycentric_subdivide_capped(&Arc::new(base), spec.caps.max_simplices)?);
        let top = n - spec.k;
        let mut names = Vec::new();
        names.extend((0..=top).map(|i| format!("f_{i}")));
        names.extend((0..=top).map(|i| format!("b_{i}")));
        names.push("chi".into());
        if spec.k == 1 {
            names.extend((0..n).map(|p| format!("cw_{p}")));
        }
        names.extend((0..=top).map(|i| format!("block_{i}")));
        if spec.census {
            names.push("components".into());
            names.push("sphere_components".into());
        }
        Ok(Evaluator {
            host,
            k: spec.k,
            n,
            census: spec.census,
            names,
        })
    }

    fn degree_len(&self) -> usize {
        self.host.base().count(self.k - 1)
    }

    fn eval(&self, eps: &Cochain) -> Result<Vec<i64>> {
        let top = self.n - self.k;
        let v = build_v(&self.host, eps, self.k)?;
        let f = v.f_vector();
        let cc = v.chain_complex();
        let (betti, census) = if self.census {
            let per = cc.component_bettis();
            let mut total = vec![0usize; top + 1];
            for b in &per {
                for (i, &x) in b.0.iter().enumerate() {
                    total[i] += x;
                }
            }
            (BettiVector(total), Some(census_from_bettis(&per)))
        } else {
            (cc.betti(), None)
        };
        let mut out = Vec::with_capacity(self.names.len());
        out.extend((0..=top).map(|i| f.get(i).copied().unwrap_or(0) as i64));
        out.extend((0..=top).map(|i| betti.get(i) as i64));
        out.push(betti.chi());
        let base = self.host.base();
        if self.k == 1 {
            out.extend(cw_cell_counts(base, eps)?.into_iter().map(|x| x as i64));
        }
        out.extend(block_counts(base, eps, self.k)?.into_iter().map(|x| x as i64));
        if let Some(c) = census {
            out.push(c.components as i64);
            out.push(c.spheres() as i64);
        }
        Ok(out)
    }
}

pub fn normalization(complex: &SimplicialComplex, depth: usize) -> Q {
    let n = complex.dim().unwrap_or(0);
    pow_q(&q_u128(factorial(n + 1)), depth) * q_int(complex.count(n) as i64)
}

/// Runs an experiment and assembles its report.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let measure = Measure::new(spec.nu.clone())?;
    let ev = Evaluator::new(spec)?;
    let len = ev.degree_len();
    let statistics = match spec.mode {
        Mode::Exhaustive => {
            let bits_cap = spec.caps.max_enum_bits.min(40);
            if len > bits_cap {
                return Err(Error::CapExceeded {
                    what: format!("exhaustive run over {len}-bit cochains"),
                    needed: len as u128,
                    cap: bits_cap as u128,
                });
            }
            exhaustive(&ev, &measure, len)?
        }
        Mode::MonteCarlo { trials } => {
            if trials == 0 {
                return Err(Error::invalid("trials must be positive"));
            }
            monte_carlo(&ev, measure.nu_f64(), len, trials, spec.seed)?
        }
    };
    Ok(ExperimentReport {
        artifact_version: crate::ARTIFACT_VERSION.to_string(),
        complex: spec.complex.name().to_string(),
        n: ev.n,
        k: spec.k,
        nu: spec.nu.to_string(),
        depth: spec.depth,
        mode: spec.mode,
        approx: matches!(spec.mode, Mode::MonteCarlo { .. }),
        seed: matches!(spec.mode, Mode::MonteCarlo { .. }).then_some(spec.seed),
        normalization: normalization(&spec.complex, spec.depth).to_string(),
        host_f_vector: ev.host.complex().f_vector(),
        statistics,
        config: None,
    })
}

fn exhaustive(ev: &Evaluator, measure: &Measure, len: usize) -> Result<Vec<Statistic>> {
    let total = 1u64 << len;
    let chunk = 1u64 << len.min(10);
    let nstat = ev.names.len();
    let partials: Vec<Vec<Vec<i64>>> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| -> Result<Vec<Vec<i64>>> {
            let mut sums = vec![vec![0i64; nstat]; len + 1];
            for m in c * chunk..((c + 1) * chunk).min(total) {
                let eps = Cochain::from_mask(ev.k - 1, len, m);
                let w = m.count_ones() as usize;
                for (s, x) in sums[w].iter_mut().zip(ev.eval(&eps)?) {
                    *s += x;
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![vec![0i64; nstat]; len + 1];
    for part in partials {
        for (row, prow) in sums.iter_mut().zip(part) {
            for (s, x) in row.iter_mut().zip(prow) {
                *s += x;
            }
        }
    }
    let weights: Vec<Q> = (0..=len).map(|w| measure.mass_counts(len - w, w)).collect();
    Ok(ev
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let e: Q = (0..=len)
                .filter(|&w| sums[w][j] != 0)
                .map(|w| q_int(sums[w][j]) * &weights[w])
                .sum();
            Statistic {
                name: name.clone(),
                exact: Some(e.to_string()),
                mean: None,
                variance: None,
                ci_radius: None,
            }
        })
        .collect())
}

fn monte_carlo(ev: &Evaluator, nu: f64, len: usize, trials: u64, seed: u64) -> Result<Vec<Statistic>> {
    let samples: Vec<Vec<i64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let eps = sample_bits(nu, ev.k - 1, len, &mut rng);
            ev.eval(&eps)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&ev.names, &samples))
}

/// Mean, unbiased variance and 99% normal-approximation radius, reduced in trial order.
pub fn summarize(names: &[String], samples: &[Vec<i64>]) -> Vec<Statistic> {
    let t = samples.len() as f64;
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let sum: i64 = samples.iter().map(|s| s[j]).sum();
            let mean = sum as f64 / t;
            let ss: f64 = samples.iter().map(|s| (s[j] as f64 - mean).powi(2)).sum();
            let variance = if samples.len() > 1 { ss / (t - 1.0) } else { 0.0 };
            Statistic {
                name: name.clone(),
                exact: None,
                mean: Some(mean),
                variance: Some(variance),
                ci_radius: Some(Z_99_TWO_SIDED * (variance / t).sqrt()),
            }
        })
        .collect()
}

/// One depth of a convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub d: usize,
    pub normalization: String,
    pub f_vector: Vec<String>,
    /// Exact `E(f_i)` for `i = 0..n-k`, then `E(χ)`.
    pub exact: Vec<(String, String)>,
    /// The exact column divided by the normalization.
    pub normalized: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<Vec<Statistic>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub complex: String,
    pub k: usize,
    pub nu: String,
    pub rows: Vec<ConvergenceRow>,
    /// `c_i^+(n,k)`
    pub c_plus: Vec<String>,
    /// `Σ (-1)^i c_i^+(n,k)`, the limit of the normalized `E(χ)`.
    pub chi_limit: String,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ExperimentReport::csv_header());
        out.push('\n');
        for row in &self.rows {
            let norm = normalization_f64(&row.normalization);
            for (name, v) in &row.exact {
                out.push_str(&format!("E_{name},{},{},,{norm}\n", row.d, normalization_f64(v)));
            }
            for s in row.monte_carlo.iter().flatten() {
                out.push_str(&format!(
                    "mc_{},{},{},{},{norm}\n",
                    s.name,
                    row.d,
                    s.value(),
                    s.ci_radius.unwrap_or(0.0)
                ));
            }
        }
        for (i, c) in self.c_plus.iter().enumerate() {
            out.push_str(&format!("c_plus_{i},inf,{},,1\n", normalization_f64(c)));
        }
        out.push_str(&format!("chi_limit,inf,{},,1\n", normalization_f64(&self.chi_limit)));
        out
    }
}

/// Monte Carlo columns for a convergence table.
#[derive(Clone, Copy, Debug)]
pub struct McColumns {
    pub trials: u64,
    pub seed: u64,
}

/// Exact normalized `E_{ν,d}(χ)` without materializing `Sd^d(K)`.
pub fn normalized_expected_chi(complex: &SimplicialComplex, k: usize, nu: &Q, d: usize) -> Result<Q> {
    let f: Vec<u128> = complex.f_vector().iter().map(|&x| x as u128).collect();
    let fd = project_f_vector(&f, d)?;
    Ok(expected_chi_from_f(&fd, k, nu)? / normalization(complex, d))
}

pub fn convergence_table(
    complex: &SimplicialComplex,
    k: usize,
    nu: &Q,
    d_max: usize,
    mc: Option<McColumns>,
    caps: Caps,
) -> Result<ConvergenceTable> {
    let n = complex
        .dim()
        .ok_or_else(|| Error::invalid("convergence needs a non-empty complex"))?;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    let f: Vec<u128> = complex.f_vector().iter().map(|&x| x as u128).collect();
    let mut rows = Vec::new();
    for d in 0..=d_max {
        let fd = project_f_vector(&f, d)?;
        let norm = normalization(complex, d);
        let poly = expected_face_polynomial_from_f(&fd, k, nu)?;
        let chi = expected_chi_from_f(&fd, k, nu)?;
        let mut exact: Vec<(String, Q)> = (0..=n - k).map(|i| (format!("f_{i}"), poly.coeff(i))).collect();
        exact.push(("chi".into(), chi));
        let normalized = exact
            .iter()
            .map(|(name, v)| (name.clone(), (v / &norm).to_string()))
            .collect();
        let monte_carlo = match mc {
            None => None,
            Some(m) => {
                let spec = ExperimentSpec {
                    complex: complex.clone(),
                    k,
                    nu: nu.clone(),
                    depth: d,
                    mode: Mode::MonteCarlo { trials: m.trials },
                    seed: m.seed,
                    census: false,
                    caps,
                };
                let report = run(&spec)?;
                Some(
                    report
                        .statistics
                        .into_iter()
                        .filter(|s| s.name.starts_with("b_") || s.name == "chi")
                        .collect(),
                )
            }
        };
        rows.push(ConvergenceRow {
            d,
            normalization: norm.to_string(),
            f_vector: fd.iter().map(|x| x.to_string()).collect(),
            exact: exact.into_iter().map(|(a, b)| (a, b.to_string())).collect(),
            normalized,
            monte_carlo,
        });
    }
    let c = c_plus(n, k, nu)?;
    Ok(ConvergenceTable {
        complex: complex.name().to_string(),
        k,
        nu: nu.to_string(),
        rows,
        chi_limit: c.alternating_sum().to_string(),
        c_plus: c.c.iter().map(|x| x.to_string()).collect(),
    })
}

/// `1 / 2^{f_{k-1}(Sd^m(Δ_n)) - 1}`
pub fn p_sigma_lower_bound(n: usize, k: usize, m: usize) -> Result<Q> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let f: Vec<u128> = (0..=n).map(|p| crate::rational::binomial(n + 1, p + 1)).collect();
    let fm = project_f_vector(&f, m)?;
    let bits = fm[k - 1];
    const MAX_EXPONENT: u128 = 1 << 20;
    if bits - 1 > MAX_EXPONENT {
        return Err(Error::CapExceeded {
            what: "exponent of p_sigma".into(),
            needed: bits - 1,
            cap: MAX_EXPONENT,
        });
    }
    Ok(Q::one() / pow_q(&q_int(2), (bits - 1) as usize))
}

/// `p_Σ / (n+1)!^m`
pub fn c_sigma(n: usize, k: usize, m: usize) -> Result<Q> {
    Ok(p_sigma_lower_bound(n, k, m)? / pow_q(&q_u128(factorial(n + 1)), m))
}

/// Whether a one-sided 99% test fails to reject `mean >= bound`.
pub fn one_sided_at_least(mean: f64, variance: f64, trials: u64, bound: f64) -> bool {
    mean + Z_99_ONE_SIDED * (variance / trials as f64).sqrt() >= bound
}

/// `E(q)` coefficient check helper: `true` iff `|mean - exact| <= radius`.
pub fn within(stat: &Statistic, exact: &Q) -> bool {
    match (stat.mean, stat.ci_radius) {
        (Some(m), Some(r)) => (m - q_to_f64(exact)).abs() <= r,
        _ => stat.exact_q().is_some_and(|q| q == *exact),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    fn half() -> Q {
        q_frac(1, 2)
    }

    #[test]
    fn sphere_exhaustive() {
        let b = SimplicialComplex::boundary_sphere(3).unwrap();
        let r = run(&ExperimentSpec::exhaustive(b, 1, half())).unwrap();
        assert_eq!(r.get("chi").unwrap().exact.as_deref(), Some("0"));
        assert_eq!(r.get("b_0").unwrap().exact, r.get("b_1").unwrap().exact);
        assert!(!r.approx);
    }

    #[test]
    fn top_degree_exhaustive() {
        let t = SimplicialComplex::standard_simplex(3);
        let r = run(&ExperimentSpec::exhaustive(t, 3, half())).unwrap();
        assert_eq!(r.get("chi").unwrap().exact.as_deref(), Some("1/2"));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let b = SimplicialComplex::boundary_sphere(3).unwrap();
        let spec = ExperimentSpec::monte_carlo(b, 1, half(), 200, 42);
        let a = run(&spec).unwrap().to_json();
        let c = run(&spec).unwrap().to_json();
        assert_eq!(a, c);
        assert!(a.contains("\"approx\": true"));
    }

    #[test]
    fn p_sigma_examples() {
        assert_eq!(p_sigma_lower_bound(3, 1, 1).unwrap(), Q::one() / pow_q(&q_int(2), 14));
        assert_eq!(p_sigma_lower_bound(1, 1, 0).unwrap(), half());
        assert_eq!(
            c_sigma(3, 1, 1).unwrap(),
            Q::one() / pow_q(&q_int(2), 14) / q_int(24)
        );
    }

    #[test]
    fn convergence_rows() {
        let tri = SimplicialComplex::standard_simplex(2);
        let t = convergence_table(&tri, 1, &half(), 3, None, Caps::default()).unwrap();
        assert_eq!(t.rows.len(), 4);
        let direct = run(&ExperimentSpec::exhaustive(tri, 1, half())).unwrap();
        let row0 = &t.rows[0];
        let chi0 = &row0.exact.iter().find(|(n, _)| n == "chi").unwrap().1;
        assert_eq!(Some(chi0.as_str()), direct.get("chi").unwrap().exact.as_deref());
        let circle = SimplicialComplex::boundary_sphere(2).unwrap();
        for d in 0..5 {
            let v = normalized_expected_chi(&circle, 1, &half(), d).unwrap() / q_int(2) / half();
            assert_eq!(v, half());
        }
        assert!(t.to_csv().starts_with("statistic,d,value,ci_radius,normalization\n"));
    }

    #[test]
    fn census_counts() {
        let k = SimplicialComplex::from_vertex_lists("two", &[vec![0, 1, 2, 3], vec![1, 2, 3, 4]]).unwrap();
        let sd = subdivide_iter(&k, 1, u128::MAX).unwrap();
        let host2 = Arc::new(barycentric_subdivide_capped(&Arc::new(sd.clone()), u128::MAX).unwrap());
        let n0 = sd.count(0);
        let mut eps = Cochain::ones(0, n0);
        let tets: Vec<usize> = (k.global_id(3, 0)..=k.global_id(3, 1)).collect();
        for g in tets {
            eps.set(g, false);
        }
        let v = build_v(&host2, &eps, 1).unwrap();
        let c = component_census(&v);
        assert_eq!(c.components, 2);
        assert_eq!(c.spheres(), 2);
        let empty = build_v(&host2, &Cochain::zero(0, n0), 1).unwrap();
        assert_eq!(component_census(&empty), SigmaCount::default());
    }
}
