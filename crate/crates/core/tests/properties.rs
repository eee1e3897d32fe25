use hkreduce::level::{retract, split_tangent, Projectors};
use hkreduce::lie::{decompose, to_adapted, Flavor, SplitSpec};
use hkreduce::linalg::{max_abs, max_abs_vec};
use hkreduce::quat::embed_real;
use hkreduce::random;
use hkreduce::scene::Scenario;
use hkreduce::submersion::{oneill_tensors, second_fundamental_form, FdOptions};
use nalgebra::DVector;
use proptest::prelude::*;

fn torus() -> Scenario {
    Scenario::torus_sp3([[1.0, 0.3, -0.2], [0.5, -0.4, 0.7]])
}

fn vec_of(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    proptest::collection::vec(-2.0f64..2.0, dim).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_map_is_torus_invariant(x in vec_of(12), t1 in -3.2f64..3.2, t2 in -3.2f64..3.2) {
        let s = torus();
        prop_assert!(s.check_equivariance(&x, &[t1, t2]).unwrap() < 1e-12 * (1.0 + x.norm_squared()));
    }

    #[test]
    fn moment_map_is_quadratic(x in vec_of(12), c in -3.0f64..3.0) {
        let s = Scenario::torus_sp3([[0.0; 3]; 2]);
        let scaled = s.moment_map(&(&x * c)).unwrap().values;
        let expected = s.moment_map(&x).unwrap().values * (c * c);
        prop_assert!(max_abs_vec(&(scaled - expected)) < 1e-12 * (1.0 + x.norm_squared() * c * c));
    }

    #[test]
    fn decomposition_reconstructs(seed in any::<u64>(), quat in any::<bool>()) {
        let mut rng = random::seeded(seed);
        let (spec, x) = if quat {
            (SplitSpec::new(1, 2, Flavor::QuatSp), to_adapted(1, 2, &embed_real(&random::anti_hermitian(&mut rng, 3)).unwrap()))
        } else {
            (SplitSpec::new(1, 2, Flavor::RealSo), random::antisymmetric(&mut rng, 12))
        };
        let d = decompose(&x, &spec).unwrap();
        prop_assert!(max_abs(&(d.reconstruct() - &x)) < 1e-12);
        // the complement part is orthogonal to the subalgebra part
        let inner = (d.f_part.transpose() * (&d.h1_part + &d.h2_part)).trace();
        prop_assert!(inner.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn level_set_tensors_have_their_symmetries(y in vec_of(12), a in vec_of(12), b in vec_of(12)) {
        let s = torus();
        prop_assume!(y.norm() > 0.5);
        let Ok(r) = retract(&s, &y, 1e-12, 50) else { return Ok(()) };
        let x = r.point.x;
        prop_assume!(split_tangent(&s, &x, 1e-9).is_ok());
        let p = Projectors::at(&s, &x).unwrap();
        let (u, v) = (&p.tangent * a, &p.tangent * b);
        let sf_uv = second_fundamental_form(&s, &x, &u, &v).unwrap().vector;
        let sf_vu = second_fundamental_form(&s, &x, &v, &u).unwrap().vector;
        prop_assert!(max_abs_vec(&(sf_uv - sf_vu)) < 1e-12 * (1.0 + u.norm() * v.norm()));

        // A is alternating on horizontal vectors
        let (hu, hv) = (&p.horizontal * &u, &p.horizontal * &v);
        let opts = FdOptions::default();
        let auv = oneill_tensors(&s, &x, &hu, &hv, &opts).unwrap().a;
        let avu = oneill_tensors(&s, &x, &hv, &hu, &opts).unwrap().a;
        prop_assert!(max_abs_vec(&(auv + avu)) < 1e-5 * (1.0 + hu.norm() * hv.norm()));
    }
}
