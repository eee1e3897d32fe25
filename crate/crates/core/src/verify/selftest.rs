//! Built-in sanity checks run by `hkreduce selftest`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::level::{adapted_frame, split_tangent, Projectors};
use crate::lie::{check_ad_invariance, form_to_section, section_to_form, Flavor, FrameAtPoint, SplitSpec};
use crate::linalg::{columns, max_abs};
use crate::quat::{embed_real, extract_components, Structure};
use crate::random;
use crate::scene::Scenario;
use crate::submersion::{induced_derivative, lower_vertical, submersion_curvature, weingarten_fiber, FdOptions};

use super::config::VerifyConfig;
use super::sample::sample_points;

const ALGEBRA_TOL: f64 = 1e-10;
/// Base step of the Richardson probe; `h`, `h/2`, `h/4` must all sit in the
/// truncation-dominated regime.
const RICHARDSON_STEP: f64 = 4e-3;

#[derive(Debug, Clone, Serialize)]
pub struct SelftestCheck {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn below(name: impl Into<String>, value: f64, tol: f64) -> SelftestCheck {
    SelftestCheck { name: name.into(), value, passed: value <= tol }
}

fn quaternion_algebra(seed: u64) -> Result<Vec<SelftestCheck>> {
    let mut rng = random::stream(seed, 0);
    let mut hom: f64 = 0.0;
    let mut round: f64 = 0.0;
    for m in 1..=3 {
        let a = random::quat_matrix(&mut rng, m, m);
        let b = random::quat_matrix(&mut rng, m, m);
        let ab = embed_real(&a.try_mul(&b)?)?;
        hom = hom.max(max_abs(&(ab - embed_real(&a)? * embed_real(&b)?)));
        let back = extract_components(&embed_real(&a)?, ALGEBRA_TOL)?;
        round = round.max(back.try_add(&a.scale(-1.0))?.max_abs());
    }
    Ok(vec![below("embedding is multiplicative", hom, ALGEBRA_TOL), below("embedding round trip", round, ALGEBRA_TOL)])
}

fn reductive_splittings(seed: u64) -> Result<Vec<SelftestCheck>> {
    let mut out = Vec::new();
    for (n, k) in [(1, 1), (2, 1), (1, 2)] {
        for (flavor, tag) in [(Flavor::RealSo, "so"), (Flavor::QuatSp, "sp")] {
            let defect = check_ad_invariance(&SplitSpec::new(n, k, flavor), 10, seed)?;
            out.push(below(format!("Ad-invariant complement ({tag}, n={n}, k={k})"), defect, ALGEBRA_TOL));
        }
    }
    Ok(out)
}

fn correspondence(seed: u64) -> Result<SelftestCheck> {
    let mut rng = random::stream(seed, 1);
    let dim = 8;
    let p = random::uniform_matrix(&mut rng, dim, dim) + DMatrix::identity(dim, dim) * 3.0;
    let frame = FrameAtPoint::new(p, DVector::zeros(dim))?;
    let omega = random::antisymmetric(&mut rng, dim);
    let back = section_to_form(&frame, &form_to_section(&frame, &omega)?)?;
    Ok(below("form/section round trip", max_abs(&(back - omega)), ALGEBRA_TOL))
}

/// `|q(h) − q(h/2)| / |q(h/2) − q(h/4)|`; close to 4 for a second-order scheme.
fn richardson_ratio(q: impl Fn(f64) -> Result<DVector<f64>>) -> Result<f64> {
    let (a, b, c) = (q(RICHARDSON_STEP)?, q(RICHARDSON_STEP / 2.0)?, q(RICHARDSON_STEP / 4.0)?);
    Ok((&a - &b).norm() / (&b - &c).norm())
}

fn fd_convergence_order(seed: u64) -> Result<Vec<SelftestCheck>> {
    let scenario = Scenario::eguchi_hanson([1.0, 0.0, 0.0]);
    let mut cfg = VerifyConfig::new(scenario.clone());
    cfg.points = 1;
    cfg.seed = seed;
    let x = sample_points(&cfg)?.remove(0).x;
    let split = split_tangent(&scenario, &x, 1e-9)?;
    adapted_frame(&scenario, &x, &split)?;
    let proj = Projectors::at(&scenario, &x)?;
    let h = columns(&split.basis_h);
    let (xi, eta) = (&h[0], &h[1]);
    let v = split.basis_v.column(0).into_owned();
    let i0 = scenario.structure(Structure::I);
    let opts = FdOptions::with_step;
    let s = &scenario;
    let x = &x;
    let probes: [(&str, f64); 4] = [
        ("fiber Weingarten map", richardson_ratio(|h| weingarten_fiber(s, x, &v, xi, &opts(h)))?),
        ("lowered curvature", richardson_ratio(|h| lower_vertical(s, x, &(submersion_curvature(s, x, xi, eta, &opts(h))?.vector * -0.5)))?),
        ("rotated curvature", richardson_ratio(|h| Ok(submersion_curvature(s, x, &(i0 * xi), &(i0 * eta), &opts(h))?.vector))?),
        (
            "horizontal derivative of K",
            richardson_ratio(|h| Ok(&proj.horizontal * induced_derivative(s, x, xi, |y| s.fundamental_field(&[1.0], y), &opts(h))?))?,
        ),
    ];
    Ok(probes
        .into_iter()
        .map(|(name, ratio)| SelftestCheck { name: format!("second-order finite differences: {name}"), value: ratio, passed: (3.0..=5.0).contains(&ratio) })
        .collect())
}

pub fn run_selftest(seed: u64) -> Result<SelftestReport> {
    let mut checks = quaternion_algebra(seed)?;
    checks.extend(reductive_splittings(seed)?);
    checks.push(correspondence(seed)?);
    checks.extend(fd_convergence_order(seed)?);
    Ok(SelftestReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let report = run_selftest(0).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{} = {}", c.name, c.value);
        }
    }
}
