//! Closed-form oracles for the submersion tensors of a torus quotient of flat
//! ℍ^m. With generators ξ̂_a, fundamental fields K^a(x) = −ξ̂_a x and
//! G = KᵀK, metric compatibility in the flat ambient gives, for horizontal u, w
//! and vertical directions K^a:
//!   A_u w           = Σ_a (G⁻¹ s)_a K^a,    s_b = ⟨ξ̂_b u, w⟩
//!   ⟨T_{K^a} w, K^b⟩ = −⟨w, ξ̂_b ξ̂_a x⟩
//!   A_u K^b         = P_H(−ξ̂_b u)
//!   SF^{A,a}(u, K^b) = ⟨u, A0 ξ̂_a K^b⟩ (after lowering by dμ)

use hkreduce::level::{split_tangent, Projectors};
use hkreduce::linalg::{columns, max_abs_vec};
use hkreduce::quat::Structure;
use hkreduce::random;
use hkreduce::scene::Scenario;
use hkreduce::submersion::{lower_vertical, oneill_tensors, second_fundamental_form, weingarten_fiber, FdOptions};
use hkreduce::verify::{sample_points, VerifyConfig};
use nalgebra::{DMatrix, DVector};

fn scenarios() -> Vec<Scenario> {
    vec![Scenario::eguchi_hanson([1.0, 0.0, 0.0]), Scenario::torus_sp3([[1.0, 0.3, -0.2], [0.5, -0.4, 0.7]])]
}

fn points(s: &Scenario, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut cfg = VerifyConfig::new(s.clone());
    cfg.points = count;
    cfg.seed = seed;
    sample_points(&cfg).unwrap().into_iter().map(|p| p.x).collect()
}

fn gram(k: &DMatrix<f64>) -> DMatrix<f64> {
    k.transpose() * k
}

#[test]
fn a_tensor_on_horizontal_pairs_matches_closed_form() {
    let opts = FdOptions::default();
    for s in scenarios() {
        for x in points(&s, 4, 1) {
            let k = s.fundamental_matrix(&x).unwrap();
            let ginv = gram(&k).try_inverse().unwrap();
            let h = columns(&split_tangent(&s, &x, 1e-9).unwrap().basis_h);
            for (u, w) in [(&h[0], &h[1]), (&h[1], &h[3]), (&h[2], &h[0])] {
                let sv = DVector::from_fn(s.k(), |b, _| (s.generator_real(b) * u).dot(w));
                let expected = &k * (&ginv * sv);
                let a = oneill_tensors(&s, &x, u, w, &opts).unwrap().a;
                assert!(max_abs_vec(&(a - expected)) < 1e-6);
            }
        }
    }
}

#[test]
fn a_tensor_on_vertical_argument_matches_closed_form() {
    let opts = FdOptions::default();
    for s in scenarios() {
        for x in points(&s, 3, 2) {
            let ph = Projectors::at(&s, &x).unwrap().horizontal;
            let k = s.fundamental_matrix(&x).unwrap();
            for u in columns(&split_tangent(&s, &x, 1e-9).unwrap().basis_h) {
                for b in 0..s.k() {
                    let kb = k.column(b).into_owned();
                    let expected = &ph * -(s.generator_real(b) * &u);
                    let a = oneill_tensors(&s, &x, &u, &kb, &opts).unwrap().a;
                    assert!(max_abs_vec(&(a - expected)) < 1e-6);
                }
            }
        }
    }
}

#[test]
fn t_tensor_and_fiber_weingarten_map_match_closed_form() {
    let opts = FdOptions::default();
    for s in scenarios() {
        for x in points(&s, 3, 3) {
            let k = s.fundamental_matrix(&x).unwrap();
            for w in columns(&split_tangent(&s, &x, 1e-9).unwrap().basis_h) {
                for a in 0..s.k() {
                    let ka = k.column(a).into_owned();
                    let expected = DVector::from_fn(s.k(), |b, _| -w.dot(&(s.generator_real(b) * s.generator_real(a) * &x)));
                    let t = oneill_tensors(&s, &x, &ka, &w, &opts).unwrap().t;
                    assert!(max_abs_vec(&(lower_vertical(&s, &x, &t).unwrap() - &expected)) < 1e-6);
                    let weingarten = weingarten_fiber(&s, &x, &ka, &w, &opts).unwrap();
                    assert!(max_abs_vec(&(lower_vertical(&s, &x, &weingarten).unwrap() + &expected)) < 1e-6);
                }
            }
        }
    }
}

#[test]
fn second_fundamental_form_against_vertical_matches_closed_form() {
    for s in scenarios() {
        let mut rng = random::seeded(4);
        for x in points(&s, 5, 4) {
            let k = s.fundamental_matrix(&x).unwrap();
            let u = (Projectors::at(&s, &x).unwrap().tangent * random::gaussian_vector(&mut rng, s.dim())).normalize();
            for b in 0..s.k() {
                let kb = k.column(b).into_owned();
                let sf = second_fundamental_form(&s, &x, &u, &kb).unwrap();
                for st in Structure::ALL {
                    let expected = DVector::from_fn(s.k(), |a, _| u.dot(&(s.structure(st) * s.generator_real(a) * &kb)));
                    assert!(max_abs_vec(&(sf.component(st) - expected)) < 1e-12);
                }
            }
        }
    }
}

/// On Eguchi–Hanson the U(1) orbit through x is the circle t ↦ e^{it}x of
/// radius |x|; its acceleration −x has horizontal part P_H x, so the fibers are
/// geodesic only where P_H x = 0. At x ∝ (2, j) this fails, and SF(·, K) is
/// nonzero there as well.
#[test]
fn eguchi_hanson_orbits_are_not_geodesic() {
    let s = Scenario::eguchi_hanson([1.0, 0.0, 0.0]);
    // (2, j) in component-block layout: a = (2, 0), c = (0, 1)
    let mut x = DVector::from_vec(vec![2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let mu = s.moment_map(&x).unwrap().get(Structure::I, 0);
    assert!(mu.abs() > 0.0 && mu.signum() == 1.0, "μ_I = {mu}");
    x /= mu.sqrt();
    assert!(s.level_residual(&x).unwrap() < 1e-12);

    let proj = Projectors::at(&s, &x).unwrap();
    let curvature_of_orbit = &proj.horizontal * (-&x);
    assert!(curvature_of_orbit.norm() > 0.1);

    let kvec = s.fundamental_matrix(&x).unwrap().column(0).into_owned();
    let h = columns(&split_tangent(&s, &x, 1e-9).unwrap().basis_h);
    let worst = h.iter().map(|u| max_abs_vec(&second_fundamental_form(&s, &x, u, &kvec).unwrap().vector)).fold(0.0, f64::max);
    assert!(worst > 0.1);

    // ⟨𝓦_K̂ η, K̂⟩ = −⟨T_K η, K⟩/|K|² = −⟨η, x⟩/|x|² for the unit field K̂
    let opts = FdOptions::default();
    let kn = kvec.normalize();
    for eta in &h {
        let w = weingarten_fiber(&s, &x, &kn, eta, &opts).unwrap();
        let expected = -eta.dot(&x) / x.norm_squared();
        assert!((w.dot(&kn) - expected).abs() < 1e-6);
    }
}
