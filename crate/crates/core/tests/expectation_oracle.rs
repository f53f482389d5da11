mod common;

use common::*;
use num::{One, Signed, Zero};
use randsub::expectation::{
    expected_block_counts, expected_chi, expected_chi_k1, expected_cw_by_generating_function,
    expected_cw_polynomial, expected_face_polynomial,
};
use randsub::harness::{run, ExperimentSpec};
use randsub::rational::{pow_q, q_int, Poly};
use randsub::Q;

fn alternating_tail(v: &[Q], i: usize) -> Q {
    (0..=i)
        .map(|j| if (i - j).is_multiple_of(2) { v[j].clone() } else { -v[j].clone() })
        .sum()
}

#[test]
fn expectations_equal_exhaustive_averages() {
    for entry in corpus() {
        let k = &entry.complex;
        let n = k.dim().unwrap();
        for kk in 1..=n {
            let table = exhaustive_table(k, kk);
            for nu in nus() {
                let avg = table.average(&nu);
                let tag = format!("{} k={kk} nu={nu}", k.name());

                let face = expected_face_polynomial(k, kk, &nu).unwrap();
                for i in 0..=n - kk {
                    assert_eq!(face.coeff(i), q_at(&avg.f, i), "E(f_{i}) {tag}");
                }
                assert!(face.coeff(n - kk + 1).is_zero(), "{tag}");
                assert_eq!(expected_chi(k, kk, &nu).unwrap(), avg.chi, "E(chi) {tag}");

                let blocks = expected_block_counts(k, kk, &nu).unwrap();
                for (i, b) in blocks.iter().enumerate() {
                    assert_eq!(*b, q_at(&avg.blocks, i), "E(block_{i}) {tag}");
                }

                if kk == 1 {
                    assert_eq!(expected_chi_k1(k, &nu), avg.chi, "k=1 chi {tag}");
                    let cw = expected_cw_polynomial(k, &nu);
                    let gf = expected_cw_by_generating_function(k, &nu);
                    for p in 0..n {
                        assert_eq!(cw.coeff(p), q_at(&avg.cw, p), "E(cw_{p}) {tag}");
                        assert_eq!(gf.coeff(p), q_at(&avg.cw, p), "gf cw_{p} {tag}");
                    }
                }
            }
        }
    }
}

#[test]
fn average_morse_inequalities() {
    for entry in corpus() {
        let k = &entry.complex;
        let n = k.dim().unwrap();
        for kk in 1..=n {
            let table = exhaustive_table(k, kk);
            for nu in nus() {
                let avg = table.average(&nu);
                let top = n - kk;
                let b: Vec<Q> = (0..=top).map(|i| q_at(&avg.b, i)).collect();
                let f: Vec<Q> = (0..=top).map(|i| q_at(&avg.f, i)).collect();
                for i in 0..=top {
                    assert!(b[i] <= f[i], "{} k={kk} nu={nu} i={i}", k.name());
                    assert!(alternating_tail(&b, i) <= alternating_tail(&f, i));
                }
                assert_eq!(alternating_tail(&b, top), alternating_tail(&f, top));
                let chi_b: Q = b
                    .iter()
                    .enumerate()
                    .map(|(i, x)| if i % 2 == 0 { x.clone() } else { -x.clone() })
                    .sum();
                assert_eq!(chi_b, avg.chi);
            }
        }
    }
}

#[test]
fn betti_upper_bound_for_k1() {
    for entry in corpus() {
        let k = &entry.complex;
        let n = k.dim().unwrap();
        let table = exhaustive_table(k, 1);
        for nu in nus() {
            let avg = table.average(&nu);
            let om = Q::one() - &nu;
            for i in 0..n {
                let bound = q_int(k.count(i + 1) as i64)
                    * (Q::one() - pow_q(&nu, i + 2) - pow_q(&om, i + 2));
                assert!(q_at(&avg.b, i) <= bound, "{} nu={nu} i={i}", k.name());
            }
        }
    }
}

fn expected_r(avg: &Averages) -> Poly {
    let q = Poly::new(avg.f.clone());
    q.shift_up(1).sub(&Poly::monomial(avg.chi.clone(), 1))
}

#[test]
fn r_polynomial_symmetry_on_spheres() {
    for n in [3usize, 4] {
        let k = sphere(n);
        let dim = k.dim().unwrap();
        let table = exhaustive_table(&k, 1);
        for nu in nus() {
            let r = expected_r(&table.average(&nu));
            let reflected = r.compose_affine(&q_int(-1), &q_int(-1));
            let signed = if dim.is_multiple_of(2) { r.clone() } else { r.scale(&q_int(-1)) };
            assert_eq!(reflected, signed, "bdDelta_{n} nu={nu}");
        }
    }
}

#[test]
fn harness_exhaustive_matches_oracle() {
    for entry in corpus() {
        let k = &entry.complex;
        let n = k.dim().unwrap();
        for kk in 1..=n {
            let table = exhaustive_table(k, kk);
            let nu = Q::new(1.into(), 3.into());
            let avg = table.average(&nu);
            let report = run(&ExperimentSpec::exhaustive(k.clone(), kk, nu.clone())).unwrap();
            let get = |name: &str| report.get(name).unwrap().exact_q().unwrap();
            for i in 0..=n - kk {
                assert_eq!(get(&format!("f_{i}")), q_at(&avg.f, i));
                assert_eq!(get(&format!("b_{i}")), q_at(&avg.b, i));
                assert_eq!(get(&format!("block_{i}")), q_at(&avg.blocks, i));
            }
            assert_eq!(get("chi"), avg.chi);
        }
    }
}

#[test]
fn sphere_b0_equals_b1_at_half() {
    let k = sphere(3);
    let avg = exhaustive_table(&k, 1).average(&Q::new(1.into(), 2.into()));
    assert!(avg.chi.is_zero());
    assert_eq!(avg.b[0], avg.b[1]);
    assert!(avg.b[0].is_positive());
}
