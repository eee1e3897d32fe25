//! Extrinsic and submersion geometry of `μ⁻¹(ζ) → μ⁻¹(ζ)/G`: the second
//! fundamental form through the Hessian of μ, induced covariant derivatives
//! along the level set, O'Neill's `A` and `T` tensors, and the connection
//! matrix of the ambient flat connection in an adapted frame.
//!
//! Derivatives along the level set are central differences along the curve
//! `t ↦ retract(x + t·û)`, taken on the unit direction and rescaled.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::level::{retract, transport_frame, AdaptedFrame, Projectors, DEFAULT_MAX_ITER, DEFAULT_RETRACT_TOL};
use crate::linalg::{max_abs, max_abs_vec, pinv_apply};
use crate::quat::Structure;
use crate::scene::Scenario;

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const MIN_FD_STEP: f64 = 1e-10;
/// Relative tolerance for tangency / horizontality preconditions.
pub const PRECONDITION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    pub step: f64,
    pub retract_tol: f64,
    pub max_iter: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { step: DEFAULT_FD_STEP, retract_tol: DEFAULT_RETRACT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

impl FdOptions {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }
}

fn check_tangent(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>) -> Result<()> {
    let defect = max_abs_vec(&(scenario.dmoment(x)? * u));
    if defect > PRECONDITION_TOL * u.norm() * x.norm().max(1.0) {
        return Err(Error::NotTangent { defect });
    }
    Ok(())
}

fn check_horizontal(proj: &Projectors, u: &DVector<f64>) -> Result<()> {
    let defect = max_abs_vec(&(u - &proj.horizontal * u));
    if defect > PRECONDITION_TOL * u.norm().max(1.0) {
        return Err(Error::NotHorizontal { defect });
    }
    Ok(())
}

fn check_vertical(proj: &Projectors, u: &DVector<f64>) -> Result<()> {
    let defect = max_abs_vec(&(u - &proj.vertical * u));
    if defect > PRECONDITION_TOL * u.norm().max(1.0) {
        return Err(Error::NotVertical { defect });
    }
    Ok(())
}

/// Points `retract(x ± h·û)` and the scale `‖u‖`, or `None` for `u = 0`.
fn curve_points(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, opts: &FdOptions) -> Result<Option<(DVector<f64>, DVector<f64>, f64)>> {
    if !(opts.step >= MIN_FD_STEP) || !opts.step.is_finite() {
        return Err(Error::StepUnderflow(opts.step));
    }
    let norm = u.norm();
    if norm == 0.0 {
        return Ok(None);
    }
    let dir = u / norm;
    let plus = retract(scenario, &(x + &dir * opts.step), opts.retract_tol, opts.max_iter)?.point.x;
    let minus = retract(scenario, &(x - &dir * opts.step), opts.retract_tol, opts.max_iter)?.point.x;
    Ok(Some((plus, minus, norm)))
}

/// Ambient directional derivative of a field along the level set.
pub fn ambient_derivative<F>(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, field: F, opts: &FdOptions) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    match curve_points(scenario, x, u, opts)? {
        None => Ok(DVector::zeros(field(x)?.len())),
        Some((plus, minus, norm)) => Ok((field(&plus)? - field(&minus)?) * (norm / (2.0 * opts.step))),
    }
}

/// Levi-Civita derivative `∇_u V` of the level set: the tangential part of
/// the ambient derivative.
pub fn induced_derivative<F>(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, field: F, opts: &FdOptions) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    check_tangent(scenario, x, u)?;
    let d = ambient_derivative(scenario, x, u, field, opts)?;
    Ok(Projectors::at(scenario, x)?.tangent * d)
}

/// Normal-bundle derivative `D_u N`: the normal part of the ambient derivative.
pub fn normal_derivative<F>(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, field: F, opts: &FdOptions) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    check_tangent(scenario, x, u)?;
    let d = ambient_derivative(scenario, x, u, field, opts)?;
    Ok(Projectors::at(scenario, x)?.normal * d)
}

/// `Hess(μ_A^a)(u, v) = −uᵀ (A ρ(ξ_a)) v`, structure-major.
pub fn hessian_moment(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_tangent(scenario, x, u)?;
    check_tangent(scenario, x, v)?;
    Ok(hessian_unchecked(scenario, u, v))
}

fn hessian_unchecked(scenario: &Scenario, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let k = scenario.k();
    let mut out = DVector::zeros(3 * k);
    for s in Structure::ALL {
        let a0 = scenario.structure(s);
        for a in 0..k {
            // both orders summed so the value is exactly symmetric
            let m = a0 * scenario.generator_real(a);
            out[s.index() * k + a] = -0.5 * (u.dot(&(&m * v)) + v.dot(&(&m * u)));
        }
    }
    out
}

/// Normal vector `SF(u, v)` together with its components `SF^A = dμ^A ∘ SF`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalValue {
    pub vector: DVector<f64>,
    pub components: DVector<f64>,
    pub k: usize,
}

impl SecondFundamentalValue {
    /// `SF^A`, one entry per generator.
    pub fn component(&self, s: Structure) -> DVector<f64> {
        self.components.rows(s.index() * self.k, self.k).into_owned()
    }
}

/// `SF(u, v) = −(dμ|_N)⁻¹ Hess μ(u, v)`.
pub fn second_fundamental_form(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<SecondFundamentalValue> {
    let hess = hessian_moment(scenario, x, u, v)?;
    let components = -hess;
    let vector = pinv_apply(&scenario.dmoment(x)?, &components)?;
    Ok(SecondFundamentalValue { vector, components, k: scenario.k() })
}

/// Derivatives of the vertical and horizontal projector fields at `x` along
/// `w`, as `(D_w P_V, D_w P_H)`.
pub fn projector_derivatives(scenario: &Scenario, x: &DVector<f64>, w: &DVector<f64>, opts: &FdOptions) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dim = scenario.dim();
    match curve_points(scenario, x, w, opts)? {
        None => Ok((DMatrix::zeros(dim, dim), DMatrix::zeros(dim, dim))),
        Some((plus, minus, norm)) => {
            let p = Projectors::at(scenario, &plus)?;
            let q = Projectors::at(scenario, &minus)?;
            let s = norm / (2.0 * opts.step);
            Ok(((p.vertical - q.vertical) * s, (p.horizontal - q.horizontal) * s))
        }
    }
}

/// Projector derivatives along the horizontal and vertical parts of one
/// direction `u`; evaluates `A_u` and `T_u` on any number of vectors.
///
/// Vector fields are extended by projecting a constant vector, so
/// `∇_w(P_V v) = P_T (D_w P_V) v`.
#[derive(Debug, Clone)]
pub struct ProjectorJet {
    pub at: Projectors,
    d_vertical_along_h: DMatrix<f64>,
    d_horizontal_along_h: DMatrix<f64>,
    d_vertical_along_v: DMatrix<f64>,
    d_horizontal_along_v: DMatrix<f64>,
}

impl ProjectorJet {
    pub fn new(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, opts: &FdOptions) -> Result<Self> {
        check_tangent(scenario, x, u)?;
        let at = Projectors::at(scenario, x)?;
        let (dv_h, dh_h) = projector_derivatives(scenario, x, &(&at.horizontal * u), opts)?;
        let (dv_v, dh_v) = projector_derivatives(scenario, x, &(&at.vertical * u), opts)?;
        Ok(Self {
            at,
            d_vertical_along_h: dv_h,
            d_horizontal_along_h: dh_h,
            d_vertical_along_v: dv_v,
            d_horizontal_along_v: dh_v,
        })
    }

    /// `A_u v = 𝓗∇_{𝓗u}𝓥v + 𝓥∇_{𝓗u}𝓗v`.
    pub fn a(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.at.horizontal * (&self.d_vertical_along_h * v) + &self.at.vertical * (&self.d_horizontal_along_h * v)
    }

    /// `T_u v = 𝓗∇_{𝓥u}𝓥v + 𝓥∇_{𝓥u}𝓗v`.
    pub fn t(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.at.horizontal * (&self.d_vertical_along_v * v) + &self.at.vertical * (&self.d_horizontal_along_v * v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ONeillValue {
    pub a: DVector<f64>,
    pub t: DVector<f64>,
}

pub fn oneill_tensors(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, opts: &FdOptions) -> Result<ONeillValue> {
    check_tangent(scenario, x, v)?;
    let jet = ProjectorJet::new(scenario, x, u, opts)?;
    Ok(ONeillValue { a: jet.a(v), t: jet.t(v) })
}

/// A vertical vector and its coordinates in the fundamental-field basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalValue {
    pub vector: DVector<f64>,
    pub coefficients: DVector<f64>,
}

/// Coordinates `r` with `v = Σ r_a K^{e_a}_x`, for vertical `v`.
pub fn vertical_coefficients(scenario: &Scenario, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let kmat = scenario.fundamental_matrix(x)?;
    if kmat.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    let chol = (kmat.transpose() * &kmat).cholesky().ok_or(Error::NotFree { ratio: 0.0 })?;
    Ok(chol.solve(&(kmat.transpose() * v)))
}

/// Metric lowering to `𝔤*`: `(g(v, K^{e_a}_x))_a`.
pub fn lower_vertical(scenario: &Scenario, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(scenario.fundamental_matrix(x)?.transpose() * v)
}

/// Curvature of the horizontal distribution, `R(u, v) = −2 A_u v`, evaluated
/// through the antisymmetrized estimate `−(A_u v − A_v u)`.
pub fn submersion_curvature(scenario: &Scenario, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, opts: &FdOptions) -> Result<VerticalValue> {
    let proj = Projectors::at(scenario, x)?;
    check_horizontal(&proj, u)?;
    check_horizontal(&proj, v)?;
    let auv = ProjectorJet::new(scenario, x, u, opts)?.a(v);
    let avu = ProjectorJet::new(scenario, x, v, opts)?.a(u);
    let vector = &proj.vertical * (avu - auv);
    let coefficients = vertical_coefficients(scenario, x, &vector)?;
    Ok(VerticalValue { vector, coefficients })
}

/// `𝓦_ξ(u) = −T_ξ u` for vertical `ξ` and horizontal `u`: the shape operator
/// of the fiber through `x` in the direction of `u`.
pub fn weingarten_fiber(scenario: &Scenario, x: &DVector<f64>, xi: &DVector<f64>, u: &DVector<f64>, opts: &FdOptions) -> Result<DVector<f64>> {
    let proj = Projectors::at(scenario, x)?;
    check_vertical(&proj, xi)?;
    check_horizontal(&proj, u)?;
    Ok(-ProjectorJet::new(scenario, x, xi, opts)?.t(u))
}

/// The connection matrix `ω(u)` of the flat ambient connection in an adapted
/// frame, in the adapted layout `ℍ^n ⊕ ℍ^k`:
///
/// ```text
/// ⎡ M1   * ⎤   M2 = ⎡M2¹⎤ (k rows)      M3 = ⎡M3¹  * ⎤
/// ⎣ M2  M3 ⎦        ⎣M2²⎦ (3k rows)          ⎣M3²  M3³⎦
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedConnectionBlocks {
    pub n: usize,
    pub k: usize,
    pub full: DMatrix<f64>,
}

impl AdaptedConnectionBlocks {
    pub fn m1(&self) -> DMatrix<f64> {
        self.full.view((0, 0), (4 * self.n, 4 * self.n)).into_owned()
    }

    pub fn m2(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n, 0), (4 * self.k, 4 * self.n)).into_owned()
    }

    pub fn m3(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n, 4 * self.n), (4 * self.k, 4 * self.k)).into_owned()
    }

    pub fn m2_1(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n, 0), (self.k, 4 * self.n)).into_owned()
    }

    pub fn m2_2(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n + self.k, 0), (3 * self.k, 4 * self.n)).into_owned()
    }

    pub fn m3_1(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n, 4 * self.n), (self.k, self.k)).into_owned()
    }

    /// Rows `(B3; C3; D3)`: imaginary rows against the real columns of `M3`.
    pub fn m3_2(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n + self.k, 4 * self.n), (3 * self.k, self.k)).into_owned()
    }

    pub fn m3_3(&self) -> DMatrix<f64> {
        self.full.view((4 * self.n + self.k, 4 * self.n + self.k), (3 * self.k, 3 * self.k)).into_owned()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        max_abs(&(&self.full + self.full.transpose()))
    }
}

fn check_frame(scenario: &Scenario, x: &DVector<f64>, frame: &AdaptedFrame) -> Result<()> {
    if frame.n != scenario.n() || frame.k != scenario.k() || frame.frame.base.len() != x.len() {
        return Err(Error::Dimension("frame does not match the scenario".into()));
    }
    let offset = max_abs_vec(&(&frame.frame.base - x));
    if offset > 1e-12 * x.norm().max(1.0) {
        return Err(Error::Invalid(format!("frame is based at another point (offset {offset:.3e})")));
    }
    let defect = frame.frame.orthogonality_defect();
    if defect > 1e-10 {
        return Err(Error::Invalid(format!("frame is not orthonormal (defect {defect:.3e})")));
    }
    Ok(())
}

/// Derivative of the transported frame field (adapted layout) along `u`.
fn frame_derivative(scenario: &Scenario, x: &DVector<f64>, frame: &AdaptedFrame, u: &DVector<f64>, opts: &FdOptions) -> Result<DMatrix<f64>> {
    let dim = scenario.dim();
    match curve_points(scenario, x, u, opts)? {
        None => Ok(DMatrix::zeros(dim, dim)),
        Some((plus, minus, norm)) => {
            let p = transport_frame(scenario, frame, &plus)?.adapted_matrix();
            let q = transport_frame(scenario, frame, &minus)?.adapted_matrix();
            Ok((p - q) * (norm / (2.0 * opts.step)))
        }
    }
}

/// `pᵀ D_u p` for the transported frame field, without any block assembly.
pub fn connection_value_fd(scenario: &Scenario, x: &DVector<f64>, frame: &AdaptedFrame, u: &DVector<f64>, opts: &FdOptions) -> Result<DMatrix<f64>> {
    check_frame(scenario, x, frame)?;
    check_tangent(scenario, x, u)?;
    Ok(frame.adapted_matrix().transpose() * frame_derivative(scenario, x, frame, u, opts)?)
}

/// Assembles `ω(u)` block by block: tangent–tangent entries from the induced
/// derivative, `M2¹` from `A + T`, normal–tangent entries (`M2²`, `M3²`) from
/// the second fundamental form, their mirror by antisymmetry, and `M3³` from
/// the normal derivative.
pub fn assemble_blocks(scenario: &Scenario, x: &DVector<f64>, frame: &AdaptedFrame, u: &DVector<f64>, opts: &FdOptions) -> Result<AdaptedConnectionBlocks> {
    check_frame(scenario, x, frame)?;
    check_tangent(scenario, x, u)?;
    let (n, k) = (frame.n, frame.k);
    let dim = scenario.dim();
    let tang = 4 * n + k;
    let p = frame.adapted_matrix();
    let dp = frame_derivative(scenario, x, frame, u, opts)?;
    let proj = Projectors::at(scenario, x)?;
    let mut full = DMatrix::zeros(dim, dim);

    let dt = &proj.tangent * &dp;
    for c in 0..tang {
        for r in 0..tang {
            full[(r, c)] = p.column(r).dot(&dt.column(c));
        }
    }

    if k > 0 && n > 0 {
        let jet = ProjectorJet::new(scenario, x, u, opts)?;
        for c in 0..4 * n {
            let h = p.column(c).into_owned();
            let at = jet.a(&h) + jet.t(&h);
            for a in 0..k {
                full[(4 * n + a, c)] = p.column(4 * n + a).dot(&at);
            }
        }
    }

    for c in 0..tang {
        let col = p.column(c).into_owned();
        let sf = second_fundamental_form(scenario, x, u, &col)?.vector;
        for r in tang..dim {
            let v = p.column(r).dot(&sf);
            full[(r, c)] = v;
            full[(c, r)] = -v;
        }
    }

    let dn = &proj.normal * &dp;
    for c in tang..dim {
        for r in tang..dim {
            full[(r, c)] = p.column(r).dot(&dn.column(c));
        }
    }

    Ok(AdaptedConnectionBlocks { n, k, full })
}
