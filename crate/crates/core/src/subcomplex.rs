//! The subcomplex `V_ε` of `Sd(K)`, its CW and dual-block counts, and its links.

use std::sync::Arc;

use crate::cochain::{coboundary, Cochain};
use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::homology::{BettiVector, ChainComplex};
use crate::subdivision::{barycentric_subdivide_capped, FlagComplex};

/// Per base simplex (by global id): does `dε` restricted to it vanish?
/// A simplex is active when it has a `k`-face on which `dε = 1`.
pub fn active_simplices(k_complex: &SimplicialComplex, eps: &Cochain, k: usize) -> Result<Vec<bool>> {
    if k == 0 || eps.degree() + 1 != k {
        return Err(Error::invalid(format!(
            "cochain of degree {} does not match k = {k}",
            eps.degree()
        )));
    }
    let d = coboundary(k_complex, eps)?;
    let mut active = vec![false; k_complex.total_count()];
    let Some(n) = k_complex.dim() else {
        return Ok(active);
    };
    for i in 0..k_complex.count(k) {
        active[k_complex.global_id(k, i)] = d.get(i);
    }
    for p in k + 1..=n {
        for i in 0..k_complex.count(p) {
            let on = k_complex
                .facet_ordinals(p, i)
                .iter()
                .any(|&f| active[k_complex.global_id(p - 1, f as usize)]);
            active[k_complex.global_id(p, i)] = on;
        }
    }
    Ok(active)
}

/// `V_ε` stored as a selection of flags of the host `Sd(K)`.
#[derive(Clone, Debug)]
pub struct VSubcomplex {
    host: Arc<FlagComplex>,
    k: usize,
    epsilon: Cochain,
    active: Vec<bool>,
    member: Vec<Vec<bool>>,
}

/// Builds `V_ε` from the membership rule on `ini`.
pub fn build_v(host: &Arc<FlagComplex>, eps: &Cochain, k: usize) -> Result<VSubcomplex> {
    let active = active_simplices(host.base(), eps, k)?;
    let sd = host.complex();
    let top = sd.dim().map_or(0, |n| n + 1);
    let member = (0..top)
        .map(|p| (0..sd.count(p)).map(|i| active[host.ini(p, i)]).collect())
        .collect();
    Ok(VSubcomplex {
        host: Arc::clone(host),
        k,
        epsilon: eps.clone(),
        active,
        member,
    })
}

/// Builds `V_ε` as the face closure of the flags whose `ini` is a `k`-simplex with `dε = 1`.
pub fn build_v_by_closure(host: &Arc<FlagComplex>, eps: &Cochain, k: usize) -> Result<VSubcomplex> {
    let base = host.base();
    let d = coboundary(base, eps)?;
    if k == 0 || eps.degree() + 1 != k {
        return Err(Error::invalid("cochain degree does not match k"));
    }
    let sd = host.complex();
    let top = sd.dim().map_or(0, |n| n + 1);
    let mut member: Vec<Vec<bool>> = (0..top).map(|p| vec![false; sd.count(p)]).collect();
    for p in 0..top {
        for i in 0..sd.count(p) {
            let ini = host.ini(p, i);
            let (dim, ord) = base.from_global_id(ini);
            if dim == k && d.get(ord) {
                for face in sd.simplex(p, i).faces() {
                    let j = sd.index_of(&face).expect("faces of a flag are flags");
                    member[face.dim()][j] = true;
                }
            }
        }
    }
    let active = active_simplices(base, eps, k)?;
    Ok(VSubcomplex {
        host: Arc::clone(host),
        k,
        epsilon: eps.clone(),
        active,
        member,
    })
}

impl VSubcomplex {
    pub fn host(&self) -> &Arc<FlagComplex> {
        &self.host
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> &Cochain {
        &self.epsilon
    }

    /// Per base simplex global id, whether `dε` is nonzero on it.
    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn membership(&self) -> &[Vec<bool>] {
        &self.member
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.host
            .complex()
            .index_of(s)
            .is_some_and(|i| self.member[s.dim()][i])
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.member.iter().map(|m| m.iter().filter(|&&x| x).count()).collect();
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn is_empty(&self) -> bool {
        self.member.first().is_none_or(|m| !m.iter().any(|&x| x))
    }

    pub fn chain_complex(&self) -> ChainComplex {
        ChainComplex::from_selection(self.host.complex(), &self.member)
    }

    pub fn betti(&self) -> BettiVector {
        self.chain_complex().betti()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(p, &f)| if p % 2 == 0 { f as i64 } else { -(f as i64) })
            .sum()
    }

    /// Materializes `V_ε` as a complex whose vertices keep their host ids.
    pub fn complex(&self) -> SimplicialComplex {
        let sd = self.host.complex();
        let per_dim = self
            .member
            .iter()
            .enumerate()
            .map(|(p, m)| {
                m.iter()
                    .enumerate()
                    .filter(|(_, &x)| x)
                    .map(|(i, _)| sd.simplex(p, i).clone())
                    .collect()
            })
            .collect();
        SimplicialComplex::from_face_closed(format!("V({})", sd.name()), per_dim)
            .expect("V is face-closed")
    }

    /// Count of flags in `V_ε` of each length whose `fin` is the given base simplex.
    pub fn interior_counts(&self, fin: usize) -> Vec<usize> {
        self.member
            .iter()
            .enumerate()
            .map(|(p, m)| {
                (0..m.len())
                    .filter(|&i| m[i] && self.host.fin(p, i) == fin)
                    .count()
            })
            .collect()
    }
}

/// `f̃_p`: `(p+1)`-simplices of `K` on which the 0-cochain `ε` is not constant, `p = 0..n-1`.
pub fn cw_cell_counts(k_complex: &SimplicialComplex, eps: &Cochain) -> Result<Vec<usize>> {
    if eps.degree() != 0 {
        return Err(Error::invalid("CW cell counts need k = 1"));
    }
    let active = active_simplices(k_complex, eps, 1)?;
    let n = k_complex.dim().unwrap_or(0);
    Ok((0..n)
        .map(|p| {
            (0..k_complex.count(p + 1))
                .filter(|&i| active[k_complex.global_id(p + 1, i)])
                .count()
        })
        .collect())
}

/// `f̌_i`: `(n-i)`-simplices of `K` with `dε` nonzero on them, `i = 0..n-k`.
pub fn block_counts(k_complex: &SimplicialComplex, eps: &Cochain, k: usize) -> Result<Vec<usize>> {
    let active = active_simplices(k_complex, eps, k)?;
    let Some(n) = k_complex.dim() else {
        return Ok(Vec::new());
    };
    if k > n {
        return Ok(Vec::new());
    }
    Ok((0..=n - k)
        .map(|i| {
            let p = n - i;
            (0..k_complex.count(p))
                .filter(|&j| active[k_complex.global_id(p, j)])
                .count()
        })
        .collect())
}

/// Link of `σ` inside `V_ε`.
pub fn v_link(v: &VSubcomplex, sigma: &Simplex) -> Result<SimplicialComplex> {
    if !v.contains(sigma) {
        return Err(Error::NotInComplex(sigma.vertices().to_vec()));
    }
    v.complex().link(sigma)
}

/// `(V_ε ∩ Bd σ_0) ∗ Sd(Bd(σ_1 ∖ σ_0)) ∗ … ∗ Sd(Lk(σ_p, K))` for the flag `σ = [σ_0 … σ_p]`.
pub fn link_join_decomposition(v: &VSubcomplex, sigma: &Simplex) -> Result<SimplicialComplex> {
    if !v.contains(sigma) {
        return Err(Error::NotInComplex(sigma.vertices().to_vec()));
    }
    let host = v.host();
    let base = host.base();
    let chain: Vec<&Simplex> = sigma.vertices().iter().map(|&g| host.base_simplex(g)).collect();
    let s0 = chain[0];

    let sd = host.complex();
    let mut bottom: Vec<Vec<Simplex>> = Vec::new();
    for (p, m) in v.membership().iter().enumerate() {
        for i in (0..m.len()).filter(|&i| m[i]) {
            let fin = host.base_simplex(host.fin(p, i) as u32);
            if fin != s0 && fin.is_face_of(s0) {
                if bottom.len() <= p {
                    bottom.resize_with(p + 1, Vec::new);
                }
                bottom[p].push(sd.simplex(p, i).clone());
            }
        }
    }
    let mut acc = SimplicialComplex::from_face_closed("V∩Bd", bottom)?;

    let cap = u128::MAX;
    for w in chain.windows(2) {
        let diff = w[1].difference(w[0]).expect("flag is strictly increasing");
        let factor = match diff.dim() {
            0 => SimplicialComplex::empty("Bd(pt)"),
            _ => SimplicialComplex::from_maximal("Bd", diff.facets().collect()),
        };
        acc = acc.join(&subdivide_plain(factor, cap)?);
    }
    let lk = base.link(chain.last().unwrap())?;
    acc = acc.join(&subdivide_plain(lk, cap)?);
    Ok(acc)
}

fn subdivide_plain(k: SimplicialComplex, cap: u128) -> Result<SimplicialComplex> {
    if k.is_empty() {
        return Ok(k);
    }
    Ok(barycentric_subdivide_capped(&Arc::new(k), cap)?.into_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::enumerate_cochains;
    use crate::homology::{betti, is_sphere_homology};

    fn host(k: &SimplicialComplex) -> Arc<FlagComplex> {
        Arc::new(barycentric_subdivide_capped(&Arc::new(k.clone()), u128::MAX).unwrap())
    }

    fn vertex_indicator(k: &SimplicialComplex, v: usize) -> Cochain {
        let mut c = Cochain::zero_on(k, 0);
        c.set(v, true);
        c
    }

    #[test]
    fn zero_cochain_gives_empty() {
        let k = SimplicialComplex::boundary_sphere(3).unwrap();
        let h = host(&k);
        let v = build_v(&h, &Cochain::zero_on(&k, 0), 1).unwrap();
        assert!(v.is_empty());
        assert!(v.complex().is_empty());
        assert_eq!(v.betti().0, Vec::<usize>::new());
    }

    #[test]
    fn edge_gives_a_point() {
        let k = SimplicialComplex::standard_simplex(1);
        let v = build_v(&host(&k), &Cochain::from_bits(0, &[false, true]), 1).unwrap();
        assert_eq!(v.f_vector(), vec![1]);
        assert_eq!(v.complex().simplices(0)[0].vertices(), &[2]);
    }

    #[test]
    fn tetrahedron_cone() {
        let t = SimplicialComplex::standard_simplex(3);
        let h = host(&t);
        let v = build_v(&h, &Cochain::ones(1, 6), 2).unwrap();
        assert_eq!(v.f_vector(), vec![5, 4]);
        let bary = Simplex::new(vec![14]).unwrap();
        let lk = v_link(&v, &bary).unwrap();
        assert_eq!(lk.f_vector(), vec![4]);
        assert!(!is_sphere_homology(&lk, 0));
        assert_eq!(block_counts(&t, &Cochain::ones(1, 6), 2).unwrap(), vec![1, 4]);
    }

    #[test]
    fn vertex_indicator_on_sphere() {
        let k = SimplicialComplex::boundary_sphere(3).unwrap();
        let eps = vertex_indicator(&k, 0);
        assert_eq!(cw_cell_counts(&k, &eps).unwrap(), vec![3, 3]);
        assert_eq!(block_counts(&k, &eps, 1).unwrap(), vec![3, 3]);
        let v = build_v(&host(&k), &eps, 1).unwrap();
        assert_eq!(v.betti().0, vec![1, 1]);
        assert_eq!(v.euler_characteristic(), 0);
        let vc = v.complex();
        let x = vc.simplices(0)[0].clone();
        assert!(is_sphere_homology(&v_link(&v, &x).unwrap(), 0));
        let top = vc.simplices(1)[0].clone();
        assert!(v_link(&v, &top).unwrap().is_empty());
    }

    #[test]
    fn constant_cochains_and_trivial_counts() {
        let k = SimplicialComplex::boundary_sphere(3).unwrap();
        assert_eq!(cw_cell_counts(&k, &Cochain::ones(0, 4)).unwrap(), vec![0, 0]);
        assert_eq!(block_counts(&k, &Cochain::zero_on(&k, 0), 1).unwrap(), vec![0, 0]);
        let e = SimplicialComplex::standard_simplex(1);
        assert_eq!(cw_cell_counts(&e, &Cochain::from_bits(0, &[false, true])).unwrap(), vec![1]);
        assert!(cw_cell_counts(&k, &Cochain::zero_on(&k, 1)).is_err());
    }

    #[test]
    fn membership_rules_agree() {
        for k_complex in [
            SimplicialComplex::standard_simplex(3),
            SimplicialComplex::boundary_sphere(3).unwrap(),
        ] {
            let h = host(&k_complex);
            for k in 1..=k_complex.dim().unwrap() {
                for eps in enumerate_cochains(&k_complex, k - 1, 24).unwrap() {
                    let a = build_v(&h, &eps, k).unwrap();
                    let b = build_v_by_closure(&h, &eps, k).unwrap();
                    assert_eq!(a.membership(), b.membership());
                }
            }
        }
    }

    #[test]
    fn cw_euler_matches_homology() {
        let k = SimplicialComplex::boundary_sphere(3).unwrap();
        let h = host(&k);
        for eps in enumerate_cochains(&k, 0, 24).unwrap() {
            let cw = cw_cell_counts(&k, &eps).unwrap();
            let chi_cw: i64 = cw.iter().enumerate().map(|(p, &f)| if p % 2 == 0 { f as i64 } else { -(f as i64) }).sum();
            let v = build_v(&h, &eps, 1).unwrap();
            assert_eq!(chi_cw, v.betti().chi());
            assert_eq!(chi_cw, betti(&v.complex()).unwrap().chi());
        }
    }

    #[test]
    fn link_decomposition_matches() {
        let k = SimplicialComplex::boundary_sphere(3).unwrap();
        let h = host(&k);
        for eps in enumerate_cochains(&k, 0, 24).unwrap() {
            let v = build_v(&h, &eps, 1).unwrap();
            let vc = v.complex();
            for s in vc.iter() {
                let a = v_link(&v, s).unwrap();
                let b = link_join_decomposition(&v, s).unwrap();
                assert_eq!(a.f_vector(), b.f_vector());
                assert_eq!(betti(&a).unwrap(), betti(&b).unwrap());
            }
        }
        let v = build_v(&h, &vertex_indicator(&k, 0), 1).unwrap();
        let outside = Simplex::new(vec![0]).unwrap();
        assert!(v_link(&v, &outside).is_err());
    }
}
