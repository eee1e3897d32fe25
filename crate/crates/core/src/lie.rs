//! Reductive splittings of 𝔰𝔬(4m) and 𝔰𝔭(m), the connection projection, and
//! the pointwise correspondence between Lie-algebra values and endomorphisms.
//!
//! Matrices here live in the *adapted layout* of ℝ^{4m} = ℍ^n ⊕ ℍ^k: the
//! component-block coordinates of ℍ^n come first, then those of ℍ^k. The
//! first `4n + k` coordinates (ℍ^n and the real part of ℍ^k) model the tangent
//! space of the level set and the last `3k` its normal space.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{antisymmetry_defect, max_abs};
use crate::quat::{embed_blocks, standard_structures, RealStructureTriple, DEFAULT_TOL};
use crate::random::{self, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// 𝔰𝔬(4m) = 𝔰𝔬(4n+k) ⊕ 𝔰𝔬(3k) ⊕ 𝔣
    RealSo,
    /// 𝔰𝔭(m) = 𝔰𝔭(n) ⊕ 𝔬(k) ⊕ 𝔣, with 𝔬(k) embedded diagonally in 𝔰𝔭(k)
    QuatSp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n: usize,
    pub k: usize,
    pub flavor: Flavor,
}

impl SplitSpec {
    pub fn new(n: usize, k: usize, flavor: Flavor) -> Self {
        Self { n, k, flavor }
    }

    pub fn m(&self) -> usize {
        self.n + self.k
    }

    pub fn ambient(&self) -> usize {
        4 * self.m()
    }

    /// Size of the first diagonal block.
    pub fn head(&self) -> usize {
        match self.flavor {
            Flavor::RealSo => 4 * self.n + self.k,
            Flavor::QuatSp => 4 * self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieDecomposition {
    pub h1_part: DMatrix<f64>,
    pub h2_part: DMatrix<f64>,
    pub f_part: DMatrix<f64>,
}

impl LieDecomposition {
    pub fn reduced(&self) -> DMatrix<f64> {
        &self.h1_part + &self.h2_part
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.h1_part + &self.h2_part + &self.f_part
    }
}

/// Index of global component-block coordinate `g` in the adapted layout.
pub fn adapted_index(n: usize, k: usize, g: usize) -> usize {
    let m = n + k;
    let (comp, slot) = (g / m, g % m);
    if slot < n {
        comp * n + slot
    } else {
        4 * n + comp * k + (slot - n)
    }
}

/// Permutation matrix `Π` with `Π v_global = v_adapted`.
pub fn adapted_permutation(n: usize, k: usize) -> DMatrix<f64> {
    let dim = 4 * (n + k);
    let mut p = DMatrix::zeros(dim, dim);
    for g in 0..dim {
        p[(adapted_index(n, k, g), g)] = 1.0;
    }
    p
}

/// Reorders a global-layout operator into the adapted layout.
pub fn to_adapted(n: usize, k: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = 4 * (n + k);
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            out[(adapted_index(n, k, r), adapted_index(n, k, c))] = x[(r, c)];
        }
    }
    out
}

pub fn vector_to_adapted(n: usize, k: usize, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for g in 0..v.len() {
        out[adapted_index(n, k, g)] = v[g];
    }
    out
}

/// The complex structures of ℍ^n ⊕ ℍ^k written in the adapted layout.
pub fn adapted_structures(n: usize, k: usize) -> Result<RealStructureTriple> {
    let st = standard_structures(n + k)?;
    Ok(RealStructureTriple { i: to_adapted(n, k, &st.i), j: to_adapted(n, k, &st.j), k: to_adapted(n, k, &st.k) })
}

fn check_input(x: &DMatrix<f64>, spec: &SplitSpec) -> Result<()> {
    let dim = spec.ambient();
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::Dimension(format!("expected {dim}x{dim}, got {}x{}", x.nrows(), x.ncols())));
    }
    let defect = antisymmetry_defect(x);
    if defect > DEFAULT_TOL {
        return Err(Error::NotAntisymmetric { defect });
    }
    if spec.flavor == Flavor::QuatSp && dim > 0 {
        let st = adapted_structures(spec.n, spec.k)?;
        let defect = st.iter().map(|(_, a)| max_abs(&(x * a - a * x))).fold(0.0, f64::max);
        if defect > DEFAULT_TOL {
            return Err(Error::NotQuaternionic { defect });
        }
    }
    Ok(())
}

/// Splits an element of the ambient algebra into 𝔥₁ ⊕ 𝔥₂ ⊕ 𝔣.
pub fn decompose(x: &DMatrix<f64>, spec: &SplitSpec) -> Result<LieDecomposition> {
    check_input(x, spec)?;
    let dim = spec.ambient();
    let head = spec.head();
    let tail = dim - head;

    let mut h1 = DMatrix::zeros(dim, dim);
    h1.view_mut((0, 0), (head, head)).copy_from(&x.view((0, 0), (head, head)));

    let mut h2 = DMatrix::zeros(dim, dim);
    match spec.flavor {
        Flavor::RealSo => {
            h2.view_mut((head, head), (tail, tail)).copy_from(&x.view((head, head), (tail, tail)));
        }
        Flavor::QuatSp => {
            // Orthogonal projection onto the diagonal copy of 𝔬(k): average the
            // four diagonal k×k blocks of the ℍ^k corner.
            let k = spec.k;
            let mut avg = DMatrix::zeros(k, k);
            for b in 0..4 {
                avg += x.view((head + b * k, head + b * k), (k, k));
            }
            avg *= 0.25;
            for b in 0..4 {
                h2.view_mut((head + b * k, head + b * k), (k, k)).copy_from(&avg);
            }
        }
    }
    let f = x - &h1 - &h2;
    Ok(LieDecomposition { h1_part: h1, h2_part: h2, f_part: f })
}

/// `pr_𝔥` of a connection value: the 𝔥₁ ⊕ 𝔥₂ part.
pub fn project_connection_value(omega: &DMatrix<f64>, spec: &SplitSpec) -> Result<DMatrix<f64>> {
    Ok(decompose(omega, spec)?.reduced())
}

/// Norm of the 𝔥-component of `h ξ h⁻¹`.
pub fn ad_invariance_defect(spec: &SplitSpec, h: &DMatrix<f64>, xi: &DMatrix<f64>) -> Result<f64> {
    let h_inv = h.clone().try_inverse().ok_or(Error::SingularFrame)?;
    let conj = h * xi * h_inv;
    // Conjugation is antisymmetric only up to rounding; symmetrize first.
    let conj = (&conj - conj.transpose()) * 0.5;
    Ok(max_abs(&project_connection_value(&conj, spec)?))
}

/// Random element of the reduced subalgebra 𝔥₁ ⊕ 𝔥₂.
pub fn random_subalgebra_element(spec: &SplitSpec, rng: &mut SeededRng) -> DMatrix<f64> {
    let dim = spec.ambient();
    let head = spec.head();
    let mut x = DMatrix::zeros(dim, dim);
    match spec.flavor {
        Flavor::RealSo => {
            x.view_mut((0, 0), (head, head)).copy_from(&random::antisymmetric(rng, head));
            let tail = dim - head;
            x.view_mut((head, head), (tail, tail)).copy_from(&random::antisymmetric(rng, tail));
        }
        Flavor::QuatSp => {
            let sp_n = embed_blocks(&random::anti_hermitian(rng, spec.n));
            x.view_mut((0, 0), (head, head)).copy_from(&sp_n);
            let a = random::antisymmetric(rng, spec.k);
            for b in 0..4 {
                x.view_mut((head + b * spec.k, head + b * spec.k), (spec.k, spec.k)).copy_from(&a);
            }
        }
    }
    x
}

/// Random element of the complement 𝔣.
pub fn random_complement_element(spec: &SplitSpec, rng: &mut SeededRng) -> DMatrix<f64> {
    let dim = spec.ambient();
    let full = match spec.flavor {
        Flavor::RealSo => random::antisymmetric(rng, dim),
        Flavor::QuatSp => to_adapted(spec.n, spec.k, &embed_blocks(&random::anti_hermitian(rng, spec.m()))),
    };
    decompose(&full, spec).expect("random element is valid").f_part
}

/// Samples `h = exp(X)` for random `X` in the reduced subalgebra and random
/// `ξ ∈ 𝔣`, returning the largest 𝔥-component of `Ad_h ξ`.
pub fn check_ad_invariance(spec: &SplitSpec, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let mut rng = random::seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h = random_subalgebra_element(spec, &mut rng).exp();
        let xi = random_complement_element(spec, &mut rng);
        worst = worst.max(ad_invariance_defect(spec, &h, &xi)?);
    }
    Ok(worst)
}

/// A linear frame `p: ℝ^{4m} → T_xM` at a base point, stored as the matrix
/// whose columns are the frame vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAtPoint {
    pub p: DMatrix<f64>,
    pub base: DVector<f64>,
}

impl FrameAtPoint {
    pub fn new(p: DMatrix<f64>, base: DVector<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() || p.nrows() != base.len() {
            return Err(Error::Dimension(format!(
                "frame is {}x{} at a point of dimension {}",
                p.nrows(),
                p.ncols(),
                base.len()
            )));
        }
        Ok(Self { p, base })
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let lu = self.p.clone().lu();
        if self.dim() > 0 && lu.determinant().abs() <= f64::EPSILON * max_abs(&self.p).powi(self.dim() as i32) {
            return Err(Error::SingularFrame);
        }
        lu.try_inverse().ok_or(Error::SingularFrame)
    }

    /// Soldering value `p⁻¹ v` of a tangent vector.
    pub fn solder(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.inverse()? * v)
    }

    pub fn orthogonality_defect(&self) -> f64 {
        max_abs(&(self.p.transpose() * &self.p - DMatrix::identity(self.dim(), self.dim())))
    }

    /// Frame after right action by a structure-group element: `p·g`.
    pub fn act(&self, g: &DMatrix<f64>) -> FrameAtPoint {
        FrameAtPoint { p: &self.p * g, base: self.base.clone() }
    }
}

fn check_square(frame: &FrameAtPoint, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != frame.dim() || m.ncols() != frame.dim() {
        return Err(Error::Dimension(format!(
            "value is {}x{}, frame dimension {}",
            m.nrows(),
            m.ncols(),
            frame.dim()
        )));
    }
    Ok(())
}

/// Endomorphism `p ω p⁻¹` of the tangent space represented by `ω` in frame `p`.
pub fn form_to_section(frame: &FrameAtPoint, omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(frame, omega)?;
    Ok(&frame.p * omega * frame.inverse()?)
}

/// Lie-algebra value `p⁻¹ S p` of an endomorphism in frame `p`.
pub fn section_to_form(frame: &FrameAtPoint, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(frame, s)?;
    Ok(frame.inverse()? * s * &frame.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::is_quaternionic;

    fn specs() -> Vec<SplitSpec> {
        let mut out = Vec::new();
        for (n, k) in [(1, 1), (2, 1), (1, 2)] {
            for flavor in [Flavor::RealSo, Flavor::QuatSp] {
                out.push(SplitSpec::new(n, k, flavor));
            }
        }
        out
    }

    fn trace_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a.transpose() * b).trace()
    }

    #[test]
    fn zero_decomposes_to_zero() {
        for spec in specs() {
            let d = decompose(&DMatrix::zeros(spec.ambient(), spec.ambient()), &spec).unwrap();
            assert_eq!(max_abs(&d.reconstruct()), 0.0);
            assert_eq!(max_abs(&d.f_part), 0.0);
        }
    }

    #[test]
    fn block_diagonal_has_no_complement_part() {
        let mut rng = random::seeded(1);
        for spec in specs() {
            let x = random_subalgebra_element(&spec, &mut rng);
            let d = decompose(&x, &spec).unwrap();
            assert!(max_abs(&d.f_part) < 1e-15, "{spec:?}");
            assert!(max_abs(&(project_connection_value(&x, &spec).unwrap() - &x)) < 1e-15);
        }
    }

    #[test]
    fn random_decomposition_reconstructs_and_is_orthogonal() {
        let mut rng = random::seeded(2);
        for spec in specs() {
            for _ in 0..20 {
                let x = match spec.flavor {
                    Flavor::RealSo => random::antisymmetric(&mut rng, spec.ambient()),
                    Flavor::QuatSp => to_adapted(spec.n, spec.k, &embed_blocks(&random::anti_hermitian(&mut rng, spec.m()))),
                };
                let d = decompose(&x, &spec).unwrap();
                assert!(max_abs(&(d.reconstruct() - &x)) < 1e-14);
                assert!(trace_inner(&d.h1_part, &d.h2_part).abs() < 1e-13);
                assert!(trace_inner(&d.h1_part, &d.f_part).abs() < 1e-13);
                assert!(trace_inner(&d.h2_part, &d.f_part).abs() < 1e-13);
                // idempotent per part
                let again = decompose(&d.f_part, &spec).unwrap();
                assert!(max_abs(&(again.f_part - &d.f_part)) < 1e-15);
                if spec.flavor == Flavor::QuatSp {
                    let st = adapted_structures(spec.n, spec.k).unwrap();
                    for part in [&d.h1_part, &d.h2_part, &d.f_part] {
                        for (_, a) in st.iter() {
                            assert!(max_abs(&(part * a - a * part)) < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn complement_is_trivial_for_quaternionic_input_only() {
        let spec = SplitSpec::new(1, 1, Flavor::QuatSp);
        let mut rng = random::seeded(3);
        let x = random::antisymmetric(&mut rng, 8);
        assert!(matches!(decompose(&x, &spec), Err(Error::NotQuaternionic { .. })));
        let y = random::uniform_matrix(&mut rng, 8, 8);
        assert!(matches!(decompose(&y, &spec), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn ad_invariance_holds_for_both_flavors() {
        for spec in specs() {
            let defect = check_ad_invariance(&spec, 100, 7).unwrap();
            assert!(defect < 1e-10, "{spec:?}: {defect:e}");
        }
    }

    #[test]
    fn identity_group_element_has_zero_defect() {
        let spec = SplitSpec::new(1, 1, Flavor::RealSo);
        let mut rng = random::seeded(4);
        let xi = random_complement_element(&spec, &mut rng);
        let d = ad_invariance_defect(&spec, &DMatrix::identity(8, 8), &xi).unwrap();
        assert_eq!(d, 0.0);
        assert!(check_ad_invariance(&spec, 0, 1).is_err());
    }

    #[test]
    fn projection_commutes_with_subgroup_conjugation() {
        let mut rng = random::seeded(5);
        for spec in specs() {
            for _ in 0..10 {
                let h = random_subalgebra_element(&spec, &mut rng).exp();
                let hinv = h.clone().try_inverse().unwrap();
                let x = match spec.flavor {
                    Flavor::RealSo => random::antisymmetric(&mut rng, spec.ambient()),
                    Flavor::QuatSp => to_adapted(spec.n, spec.k, &embed_blocks(&random::anti_hermitian(&mut rng, spec.m()))),
                };
                let conj = &h * &x * &hinv;
                let conj = (&conj - conj.transpose()) * 0.5;
                let lhs = project_connection_value(&conj, &spec).unwrap();
                let rhs = &h * project_connection_value(&x, &spec).unwrap() * &hinv;
                assert!(max_abs(&(lhs - rhs)) < 1e-10);
            }
        }
    }

    #[test]
    fn adapted_layout_keeps_quaternionic_blocks() {
        // An element of sp(n) ⊕ sp(k) embedded globally becomes block diagonal
        // in the adapted layout with embedded blocks.
        let mut rng = random::seeded(6);
        let (n, k) = (2, 1);
        let q = random::anti_hermitian(&mut rng, n + k);
        let global = embed_blocks(&q);
        assert!(is_quaternionic(&global, 1e-14).unwrap().quaternionic);
        let ad = to_adapted(n, k, &global);
        let top = ad.view((0, 0), (4 * n, 4 * n)).into_owned();
        assert!(is_quaternionic(&top, 1e-14).unwrap().quaternionic);
        let p = adapted_permutation(n, k);
        assert!(max_abs(&(&p * &global * p.transpose() - ad)) == 0.0);
    }

    #[test]
    fn correspondence_examples() {
        let mut rng = random::seeded(8);
        let base = DVector::zeros(8);
        let p = FrameAtPoint::new(DMatrix::identity(8, 8), base.clone()).unwrap();
        let omega = random::antisymmetric(&mut rng, 8);
        assert_eq!(form_to_section(&p, &omega).unwrap(), omega);
        assert_eq!(section_to_form(&p, &omega).unwrap(), omega);
        let zero = DMatrix::zeros(8, 8);
        let q = FrameAtPoint::new(random::uniform_matrix(&mut rng, 8, 8), base).unwrap();
        assert_eq!(max_abs(&form_to_section(&q, &zero).unwrap()), 0.0);
        assert_eq!(max_abs(&section_to_form(&q, &zero).unwrap()), 0.0);
    }

    #[test]
    fn correspondence_round_trip_and_equivariance() {
        let mut rng = random::seeded(9);
        for _ in 0..100 {
            let p = random::antisymmetric(&mut rng, 8).exp() * (DMatrix::identity(8, 8) + random::uniform_matrix(&mut rng, 8, 8) * 0.1);
            let frame = FrameAtPoint::new(p, DVector::zeros(8)).unwrap();
            let s = random::uniform_matrix(&mut rng, 8, 8);
            let back = form_to_section(&frame, &section_to_form(&frame, &s).unwrap()).unwrap();
            assert!(max_abs(&(back - &s)) < 1e-12);
            let w = random::antisymmetric(&mut rng, 8);
            let again = section_to_form(&frame, &form_to_section(&frame, &w).unwrap()).unwrap();
            assert!(max_abs(&(again - &w)) < 1e-12);

            // p → p·g with ω → Ad_{g⁻¹} ω leaves the endomorphism fixed.
            let g = random::antisymmetric(&mut rng, 8).exp();
            let moved = frame.act(&g);
            let w_moved = g.transpose() * &w * &g;
            let lhs = form_to_section(&moved, &w_moved).unwrap();
            let rhs = form_to_section(&frame, &w).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn singular_frame_is_rejected() {
        let frame = FrameAtPoint::new(DMatrix::zeros(4, 4), DVector::zeros(4)).unwrap();
        assert!(matches!(section_to_form(&frame, &DMatrix::identity(4, 4)), Err(Error::SingularFrame)));
    }
}
