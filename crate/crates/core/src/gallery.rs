//! Explicit 0-cochains on `Sd^d(Δ_3)` whose `V_ε` is a prescribed surface.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cochain::Cochain;
use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::harness::component_census;
use crate::homology::first_non_sphere_link;
use crate::subcomplex::{build_v, VSubcomplex};
use crate::subdivision::{barycentric_subdivide_capped, subdivide_iter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceTarget {
    Sphere,
    HoledSphere { r: usize },
    Genus { g: usize },
}

impl SurfaceTarget {
    pub fn descriptor(&self) -> String {
        match self {
            SurfaceTarget::Sphere => "sphere".into(),
            SurfaceTarget::HoledSphere { r } => format!("sphere with {r} holes"),
            SurfaceTarget::Genus { g } => format!("closed orientable surface of genus {g}"),
        }
    }

    /// Trimmed mod 2 Betti vector of the intended surface.
    pub fn expected_betti(&self) -> Vec<usize> {
        match *self {
            SurfaceTarget::Sphere | SurfaceTarget::HoledSphere { r: 0 } => vec![1, 0, 1],
            SurfaceTarget::HoledSphere { r: 1 } => vec![1],
            SurfaceTarget::HoledSphere { r } => vec![1, r - 1],
            SurfaceTarget::Genus { g } => vec![1, 2 * g, 1],
        }
    }

    pub fn expected_chi(&self) -> i64 {
        match *self {
            SurfaceTarget::Sphere => 2,
            SurfaceTarget::HoledSphere { r } => 2 - r as i64,
            SurfaceTarget::Genus { g } => 2 - 2 * g as i64,
        }
    }

    fn is_closed(&self) -> bool {
        !matches!(self, SurfaceTarget::HoledSphere { r } if *r > 0)
    }
}

/// A cochain `ε` on the vertices of `Sd^d(Δ_3)` together with how it was chosen.
#[derive(Clone, Debug)]
pub struct SurfaceConstruction {
    pub depth: usize,
    pub target: SurfaceTarget,
    /// `Sd^d(Δ_3)`; its vertices are the simplices of `Sd^{d-1}(Δ_3)`.
    pub base: Arc<SimplicialComplex>,
    pub epsilon: Cochain,
    /// Interior triangles of `Sd^{d-1}(Δ_3)` on the dual spanning tree.
    pub tree: Vec<Simplex>,
    /// Extra interior triangles, one per handle.
    pub handles: Vec<Simplex>,
}

fn sd_delta3(depth: usize) -> Result<SimplicialComplex> {
    subdivide_iter(&SimplicialComplex::standard_simplex(3), depth, crate::DEFAULT_MAX_SIMPLICES)
}

/// `ε = 0` on the barycenter of `Δ_3`, 1 on every other vertex of `Sd(Δ_3)`.
pub fn sphere_epsilon() -> Result<SurfaceConstruction> {
    let mut c = holed_sphere_epsilon(0)?;
    c.target = SurfaceTarget::Sphere;
    Ok(c)
}

/// As [`sphere_epsilon`], with the first `r` triangle barycenters (lexicographic) also set to 0.
pub fn holed_sphere_epsilon(r: usize) -> Result<SurfaceConstruction> {
    if r > 4 {
        return Err(Error::invalid(format!("a tetrahedron has 4 faces, cannot punch {r} holes")));
    }
    let delta = SimplicialComplex::standard_simplex(3);
    let base = sd_delta3(1)?;
    let mut eps = Cochain::ones(0, base.count(0));
    eps.set(delta.global_id(3, 0), false);
    for t in 0..r {
        eps.set(delta.global_id(2, t), false);
    }
    Ok(SurfaceConstruction {
        depth: 1,
        target: SurfaceTarget::HoledSphere { r },
        base: Arc::new(base),
        epsilon: eps,
        tree: Vec::new(),
        handles: Vec::new(),
    })
}

/// Largest genus allowed at depth `d`: `2 - 2g >= 4·6^{d-1} - 2·24^{d-1}`.
pub fn max_genus(d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let e = (d - 1) as u32;
    let rhs = 4i128
        .checked_mul(6i128.checked_pow(e).ok_or_else(|| Error::invalid("depth too large"))?)
        .and_then(|a| 24i128.checked_pow(e).and_then(|b| a.checked_sub(2 * b)))
        .ok_or_else(|| Error::invalid("depth too large"))?;
    Ok(if rhs > 2 { 0 } else { ((2 - rhs) / 2) as usize })
}

/// Number of triangles of `Sd^{d-1}(Δ_3)` shared by two tetrahedra.
pub fn interior_triangle_count(k: &SimplicialComplex) -> usize {
    triangle_cofaces(k).iter().filter(|c| c.len() == 2).count()
}

fn triangle_cofaces(k: &SimplicialComplex) -> Vec<Vec<usize>> {
    let mut cof = vec![Vec::new(); k.count(2)];
    for t in 0..k.count(3) {
        for &f in k.facet_ordinals(3, t) {
            cof[f as usize].push(t);
        }
    }
    cof
}

/// Spanning tree of the tetrahedra/interior-triangle dual graph, breadth first
/// from tetrahedron 0; returns tree triangles and the remaining interior triangles.
pub fn dual_spanning_tree(k: &SimplicialComplex) -> Result<(Vec<usize>, Vec<usize>)> {
    let cof = triangle_cofaces(k);
    let ntet = k.count(3);
    let mut seen = vec![false; ntet];
    let mut tree = Vec::new();
    let mut queue = VecDeque::new();
    if ntet > 0 {
        seen[0] = true;
        queue.push_back(0);
    }
    while let Some(t) = queue.pop_front() {
        let mut facets: Vec<u32> = k.facet_ordinals(3, t).to_vec();
        facets.sort_unstable();
        for f in facets {
            let c = &cof[f as usize];
            if c.len() != 2 {
                continue;
            }
            let other = if c[0] == t { c[1] } else { c[0] };
            if !seen[other] {
                seen[other] = true;
                tree.push(f as usize);
                queue.push_back(other);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::VerificationFailed("dual graph is disconnected".into()));
    }
    tree.sort_unstable();
    let rest = (0..k.count(2))
        .filter(|&f| cof[f].len() == 2 && tree.binary_search(&f).is_err())
        .collect();
    Ok((tree, rest))
}

/// Genus-`g` surface from the tetrahedra of `Sd^{d-1}(Δ_3)` joined along a
/// spanning tree of interior triangles, plus `g` further interior triangles.
pub fn genus_surface_epsilon(g: usize, d: usize) -> Result<SurfaceConstruction> {
    let bound = max_genus(d)?;
    if g > bound {
        return Err(Error::invalid(format!(
            "genus {g} violates the bound 2 - 2g >= 4*6^(d-1) - 2*24^(d-1) at depth {d} (max genus {bound})"
        )));
    }
    let coarse = sd_delta3(d - 1)?;
    let (tree, rest) = dual_spanning_tree(&coarse)?;
    if rest.len() < g {
        return Err(Error::invalid(format!(
            "only {} spare interior triangles for genus {g}",
            rest.len()
        )));
    }
    let handles = &rest[..g];
    let cof = triangle_cofaces(&coarse);
    let base = Arc::new(barycentric_subdivide_capped(&Arc::new(coarse.clone()), crate::DEFAULT_MAX_SIMPLICES)?.into_complex());
    let mut eps = Cochain::ones(0, base.count(0));
    for t in 0..coarse.count(3) {
        eps.set(coarse.global_id(3, t), false);
    }
    for &f in tree.iter().chain(handles) {
        debug_assert_eq!(cof[f].len(), 2);
        eps.set(coarse.global_id(2, f), false);
    }
    Ok(SurfaceConstruction {
        depth: d,
        target: if g == 0 && d == 1 {
            SurfaceTarget::Sphere
        } else {
            SurfaceTarget::Genus { g }
        },
        base,
        epsilon: eps,
        tree: tree.iter().map(|&f| coarse.simplex(2, f).clone()).collect(),
        handles: handles.iter().map(|&f| coarse.simplex(2, f).clone()).collect(),
    })
}

/// Upper bound on the subdivision depth needed to realize a surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub target: String,
    pub upper_bound: usize,
    pub epsilon_hex: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub target: String,
    pub depth: usize,
    pub epsilon_hex: String,
    pub v_f_vector: Vec<usize>,
    pub expected_betti: Vec<usize>,
    pub betti: Vec<usize>,
    pub chi: i64,
    pub components: usize,
    /// `None` when the surface has boundary and the test does not apply.
    pub link_test: Option<bool>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub complexity: Option<ComplexityRecord>,
}

impl VerificationReport {
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::VerificationFailed(self.diagnostic.unwrap_or_default()))
        }
    }
}

impl SurfaceConstruction {
    pub fn build_v(&self) -> Result<VSubcomplex> {
        let host = Arc::new(barycentric_subdivide_capped(&self.base, crate::DEFAULT_MAX_SIMPLICES)?);
        build_v(&host, &self.epsilon, 1)
    }
}

/// Builds `V_ε` and checks Betti numbers, connectedness, `χ` and (for closed
/// targets) that every link is a mod 2 homology sphere.
pub fn verify_construction(c: &SurfaceConstruction) -> Result<VerificationReport> {
    let v = c.build_v()?;
    let betti = v.betti().trimmed().0;
    let chi = v.euler_characteristic();
    let census = component_census(&v);
    let expected = c.target.expected_betti();
    let mut problems = Vec::new();
    if betti != expected {
        problems.push(format!("Betti numbers {betti:?}, expected {expected:?}"));
    }
    if census.components != 1 {
        problems.push(format!("{} components: {:?}", census.components, census.by_type));
    }
    if chi != c.target.expected_chi() {
        problems.push(format!("chi = {chi}, expected {}", c.target.expected_chi()));
    }
    let link_test = if c.target.is_closed() {
        let vc = v.complex();
        let bad = first_non_sphere_link(&vc, 2);
        if let Some(s) = &bad {
            problems.push(format!("link of {s} is not a mod 2 homology sphere"));
        }
        Some(bad.is_none())
    } else {
        None
    };
    let passed = problems.is_empty();
    let epsilon_hex = c.epsilon.to_hex();
    Ok(VerificationReport {
        target: c.target.descriptor(),
        depth: c.depth,
        v_f_vector: v.f_vector(),
        expected_betti: expected,
        betti,
        chi,
        components: census.components,
        link_test,
        passed,
        diagnostic: (!passed).then(|| problems.join("; ")),
        complexity: passed.then(|| ComplexityRecord {
            target: c.target.descriptor(),
            upper_bound: c.depth,
            epsilon_hex: epsilon_hex.clone(),
        }),
        epsilon_hex,
    })
}
