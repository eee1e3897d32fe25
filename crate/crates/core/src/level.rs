//! Pointwise geometry of the level set `μ⁻¹(ζ)`: the orthogonal splitting
//! `ℝ^{4m} = H ⊕ 𝔤 ⊕ (I𝔤 ⊕ J𝔤 ⊕ K𝔤)`, adapted quaternionic frames, and a
//! Newton retraction back onto the level set.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{adapted_index, FrameAtPoint};
use crate::linalg::{from_columns, gram_schmidt, orthonormal_complement, pinv_apply, polar_factor, projector_onto, reject, singular_ratio};
use crate::quat::{right_multiplication, Quaternion};
use crate::scene::{HkPoint, Scenario};

/// Smallest admissible `σ_min / σ_max` for the fundamental fields and for `dμ`.
pub const REGULARITY_RATIO: f64 = 1e-6;
pub const DEFAULT_RETRACT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Orthogonal projectors onto the pieces of the splitting at a point.
#[derive(Debug, Clone)]
pub struct Projectors {
    pub tangent: DMatrix<f64>,
    pub vertical: DMatrix<f64>,
    pub horizontal: DMatrix<f64>,
    pub normal: DMatrix<f64>,
}

impl Projectors {
    /// Needs a free, regular point but not level-set membership, so it can be
    /// evaluated along curves.
    pub fn at(scenario: &Scenario, y: &DVector<f64>) -> Result<Self> {
        let dim = scenario.dim();
        let kmat = scenario.fundamental_matrix(y)?;
        let vertical = projector_onto(&kmat).map_err(|_| Error::NotFree { ratio: 0.0 })?;
        let jt = scenario.dmoment(y)?.transpose();
        let normal = projector_onto(&jt).map_err(|_| Error::NotRegular { ratio: 0.0 })?;
        let tangent = DMatrix::identity(dim, dim) - &normal;
        let horizontal = &tangent - &vertical;
        Ok(Self { tangent, vertical, horizontal, normal })
    }
}

#[derive(Debug, Clone)]
pub struct TangentSplitting {
    pub base: DVector<f64>,
    /// `4m × 4n`
    pub basis_h: DMatrix<f64>,
    /// `4m × k`
    pub basis_v: DMatrix<f64>,
    /// `4m × 3k`
    pub basis_n: DMatrix<f64>,
}

impl TangentSplitting {
    pub fn n(&self) -> usize {
        self.basis_h.ncols() / 4
    }

    pub fn k(&self) -> usize {
        self.basis_v.ncols()
    }

    /// Orthonormal basis of `ker dμ_x`, horizontal part first.
    pub fn tangent_basis(&self) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.base.len(), self.basis_h.ncols() + self.basis_v.ncols());
        t.columns_mut(0, self.basis_h.ncols()).copy_from(&self.basis_h);
        t.columns_mut(self.basis_h.ncols(), self.basis_v.ncols()).copy_from(&self.basis_v);
        t
    }
}

/// Checks freeness and regularity of the action at `x`, returning `(K, dμ)`.
pub fn check_regular(scenario: &Scenario, x: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let kmat = scenario.fundamental_matrix(x)?;
    let ratio = singular_ratio(&kmat);
    if ratio < REGULARITY_RATIO {
        return Err(Error::NotFree { ratio });
    }
    let j = scenario.dmoment(x)?;
    let ratio = singular_ratio(&j);
    if ratio < REGULARITY_RATIO {
        return Err(Error::NotRegular { ratio });
    }
    Ok((kmat, j))
}

pub fn split_tangent(scenario: &Scenario, x: &DVector<f64>, tol: f64) -> Result<TangentSplitting> {
    let dim = scenario.dim();
    let residual = scenario.level_residual(x)?;
    if residual > tol {
        return Err(Error::OffLevelSet { residual });
    }
    if scenario.k() == 0 {
        return Ok(TangentSplitting {
            base: x.clone(),
            basis_h: DMatrix::identity(dim, dim),
            basis_v: DMatrix::zeros(dim, 0),
            basis_n: DMatrix::zeros(dim, 0),
        });
    }
    let (kmat, j) = check_regular(scenario, x)?;
    let v = gram_schmidt(&crate::linalg::columns(&kmat), 1e-12)?;
    let rows: Vec<DVector<f64>> = j.row_iter().map(|r| r.transpose()).collect();
    let nrm = gram_schmidt(&rows, 1e-12)?;
    let known: Vec<DVector<f64>> = v.iter().chain(&nrm).cloned().collect();
    let h = orthonormal_complement(&known, dim);
    Ok(TangentSplitting {
        base: x.clone(),
        basis_h: from_columns(dim, &h),
        basis_v: from_columns(dim, &v),
        basis_n: from_columns(dim, &nrm),
    })
}

/// `[Id, R_i, R_j, R_k]` on ℝ^{4m}.
fn right_units(m: usize) -> [DMatrix<f64>; 4] {
    [
        DMatrix::identity(4 * m, 4 * m),
        right_multiplication(m, Quaternion::i()),
        right_multiplication(m, Quaternion::j()),
        right_multiplication(m, Quaternion::k()),
    ]
}

/// A quaternionic orthonormal frame at `x` whose first `n` quaternionic slots
/// span `H_x` and whose last `k` span `𝔤 ⊗ ℍ`, with the real sub-block of the
/// latter in `𝔤`. `frame.p` is in the global component-block layout: column
/// `c·m + j` is `u_j·e_c` for the unit quaternions `e_c = 1, i, j, k`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub frame: FrameAtPoint,
    pub n: usize,
    pub k: usize,
}

impl AdaptedFrame {
    pub fn m(&self) -> usize {
        self.n + self.k
    }

    /// First-slot vector of quaternionic slot `j`.
    pub fn slot(&self, j: usize) -> DVector<f64> {
        self.frame.p.column(j).into_owned()
    }

    /// Frame columns reordered to the adapted layout `ℍ^n ⊕ ℍ^k`.
    pub fn adapted_matrix(&self) -> DMatrix<f64> {
        let p = &self.frame.p;
        let mut out = DMatrix::zeros(p.nrows(), p.ncols());
        for g in 0..p.ncols() {
            out.set_column(adapted_index(self.n, self.k, g), &p.column(g));
        }
        out
    }

    /// The `4n` columns spanning `H_x`.
    pub fn horizontal_block(&self) -> DMatrix<f64> {
        self.adapted_matrix().columns(0, 4 * self.n).into_owned()
    }

    /// The `4k` columns spanning `𝔤 ⊗ ℍ`, real sub-block first.
    pub fn vertical_block(&self) -> DMatrix<f64> {
        self.adapted_matrix().columns(4 * self.n, 4 * self.k).into_owned()
    }

    fn from_slots(n: usize, k: usize, base: DVector<f64>, slots: &[DVector<f64>]) -> Result<Self> {
        let m = n + k;
        let units = right_units(m);
        let mut p = DMatrix::zeros(4 * m, 4 * m);
        for (j, u) in slots.iter().enumerate() {
            for (c, r) in units.iter().enumerate() {
                p.set_column(c * m + j, &(r * u));
            }
        }
        Ok(Self { frame: FrameAtPoint::new(p, base)?, n, k })
    }
}

/// Quaternionic Gram–Schmidt: vertical slots seeded by the orthonormalized
/// fundamental fields, horizontal slots completed from coordinate vectors,
/// pivoting on the largest residual.
pub fn adapted_frame(scenario: &Scenario, x: &DVector<f64>, splitting: &TangentSplitting) -> Result<AdaptedFrame> {
    let m = scenario.m();
    let (n, k) = (scenario.n(), scenario.k());
    if splitting.n() != n || splitting.k() != k || splitting.base.len() != 4 * m {
        return Err(Error::Dimension(format!(
            "splitting has n={}, k={} for a scenario with n={n}, k={k}",
            splitting.n(),
            splitting.k()
        )));
    }
    let units = right_units(m);
    let mut spanned: Vec<DVector<f64>> = Vec::with_capacity(4 * m);
    let push_slot = |u: &DVector<f64>, spanned: &mut Vec<DVector<f64>>| {
        for r in &units {
            spanned.push(r * u);
        }
    };

    let mut vertical = Vec::with_capacity(k);
    for seed in splitting.basis_v.column_iter() {
        let seed = seed.into_owned();
        let r = reject(&seed, &spanned);
        let norm = r.norm();
        if norm <= 1e-10 * seed.norm() {
            return Err(Error::GramSchmidtBreakdown { residual: norm });
        }
        let u = r / norm;
        push_slot(&u, &mut spanned);
        vertical.push(u);
    }

    let dim = 4 * m;
    let mut horizontal = Vec::with_capacity(n);
    for _ in 0..n {
        let (norm, r) = (0..dim)
            .map(|i| {
                let e = DVector::from_fn(dim, |row, _| if row == i { 1.0 } else { 0.0 });
                let r = reject(&e, &spanned);
                (r.norm(), r)
            })
            .fold((f64::NEG_INFINITY, DVector::zeros(dim)), |acc, c| if c.0 > acc.0 { c } else { acc });
        if norm <= 1e-8 {
            return Err(Error::GramSchmidtBreakdown { residual: norm });
        }
        let u = r / norm;
        push_slot(&u, &mut spanned);
        horizontal.push(u);
    }

    let slots: Vec<DVector<f64>> = horizontal.into_iter().chain(vertical).collect();
    AdaptedFrame::from_slots(n, k, x.clone(), &slots)
}

/// Adapted frame at a nearby point `y` obtained from `base` by projecting its
/// horizontal and vertical columns onto `H_y`, `𝔤_y` and taking polar factors.
/// The result is smooth in `y` and equivariant under constant changes of
/// frame by `Sp(n) × SO(k)`.
pub fn transport_frame(scenario: &Scenario, base: &AdaptedFrame, y: &DVector<f64>) -> Result<AdaptedFrame> {
    let (n, k) = (base.n, base.k);
    let m = n + k;
    let proj = Projectors::at(scenario, y)?;
    let adapted = base.adapted_matrix();
    let h = polar_factor(&(&proj.horizontal * adapted.columns(0, 4 * n)))?;
    let v = polar_factor(&(&proj.vertical * adapted.columns(4 * n, k)))?;
    let units = right_units(m);
    let mut p = DMatrix::zeros(4 * m, 4 * m);
    for c in 0..4 {
        for j in 0..n {
            p.set_column(c * m + j, &h.column(c * n + j));
        }
        for a in 0..k {
            p.set_column(c * m + n + a, &(&units[c] * v.column(a)));
        }
    }
    Ok(AdaptedFrame { frame: FrameAtPoint::new(p, y.clone())?, n, k })
}

#[derive(Debug, Clone)]
pub struct Retraction {
    pub point: HkPoint,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton iteration `y ← y − dμ_y⁺ (μ(y) − ζ)`; each step is orthogonal to
/// `ker dμ_y`.
pub fn retract(scenario: &Scenario, y: &DVector<f64>, tol: f64, max_iter: usize) -> Result<Retraction> {
    let mut y = y.clone();
    let mut iterations = 0;
    loop {
        let defect = scenario.level_defect(&y)?;
        let residual = crate::linalg::max_abs_vec(&defect);
        if !residual.is_finite() {
            return Err(Error::NonConvergence { iterations, residual });
        }
        if residual <= tol {
            return Ok(Retraction { point: HkPoint::new(y), iterations, residual });
        }
        if iterations == max_iter {
            return Err(Error::NonConvergence { iterations, residual });
        }
        let step = pinv_apply(&scenario.dmoment(&y)?, &defect)?;
        y -= step;
        iterations += 1;
    }
}
