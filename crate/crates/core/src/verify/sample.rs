use crate::error::{Error, Result};
use crate::level::{check_regular, retract, DEFAULT_MAX_ITER, DEFAULT_RETRACT_TOL};
use crate::random;
use crate::scene::HkPoint;

use super::config::VerifyConfig;

const ATTEMPTS_PER_POINT: usize = 50;

/// Deterministic level-set points: Gaussian directions scaled to the sampling
/// radius, retracted onto `μ⁻¹(ζ)`; non-free or non-regular points are redrawn.
pub fn sample_points(cfg: &VerifyConfig) -> Result<Vec<HkPoint>> {
    let scenario = &cfg.scenario;
    let mut rng = random::seeded(cfg.seed);
    let budget = ATTEMPTS_PER_POINT * cfg.points + 100;
    let mut out = Vec::with_capacity(cfg.points);
    let mut attempts = 0;
    while out.len() < cfg.points {
        if attempts == budget {
            return Err(Error::SamplingExhausted { attempts });
        }
        attempts += 1;
        let g = random::gaussian_vector(&mut rng, scenario.dim());
        let norm = g.norm();
        if norm == 0.0 {
            continue;
        }
        let y = g * (cfg.radius / norm);
        if scenario.k() == 0 {
            out.push(HkPoint::new(y));
            continue;
        }
        let Ok(r) = retract(scenario, &y, DEFAULT_RETRACT_TOL, DEFAULT_MAX_ITER) else {
            continue;
        };
        if check_regular(scenario, &r.point.x).is_ok() {
            out.push(r.point);
        }
    }
    Ok(out)
}
