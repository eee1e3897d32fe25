//! Quaternions, quaternionic matrices and their real embedding.
//!
//! Vectors in ℍ^m are stored in component-block layout: the real parts of all
//! `m` slots first, then the `i`, `j` and `k` parts. A quaternionic matrix
//! `A + iB + jC + kD` acting by left multiplication then becomes the real
//! block matrix
//!
//! ```text
//! | A  -B  -C  -D |
//! | B   A  -D   C |
//! | C   D   A  -B |
//! | D  -C   B   A |
//! ```
//!
//! The complex structures act by right scalar multiplication, which commutes
//! with every embedded matrix.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::max_abs;

/// Default absolute tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn one() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub const fn i() -> Self {
        Self::new(0.0, 1.0, 0.0, 0.0)
    }

    pub const fn j() -> Self {
        Self::new(0.0, 0.0, 1.0, 0.0)
    }

    pub const fn k() -> Self {
        Self::new(0.0, 0.0, 0.0, 1.0)
    }

    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn components(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.a, self.b, self.c, self.d)
    }
}

/// One of the three complex structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Structure {
    I,
    J,
    K,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::I, Structure::J, Structure::K];

    pub fn index(self) -> usize {
        match self {
            Structure::I => 0,
            Structure::J => 1,
            Structure::K => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Structure::I => "I",
            Structure::J => "J",
            Structure::K => "K",
        }
    }
}

/// Quaternionic matrix `A + iB + jC + kD` stored by real components.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatMatrix {
    comps: [DMatrix<f64>; 4],
}

impl QuatMatrix {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let shape = a.shape();
        for (name, m) in [("B", &b), ("C", &c), ("D", &d)] {
            if m.shape() != shape {
                return Err(Error::Dimension(format!(
                    "component {name} has shape {:?}, expected {:?}",
                    m.shape(),
                    shape
                )));
            }
        }
        Ok(Self { comps: [a, b, c, d] })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        let z = DMatrix::zeros(rows, cols);
        Self { comps: [z.clone(), z.clone(), z.clone(), z] }
    }

    pub fn identity(n: usize) -> Self {
        let mut q = Self::zeros(n, n);
        q.comps[0] = DMatrix::identity(n, n);
        q
    }

    /// 1×1 matrix holding a single quaternion.
    pub fn scalar(q: Quaternion) -> Self {
        Self::from_fn(1, 1, |_, _| q)
    }

    /// Diagonal matrix with the given quaternion entries.
    pub fn diagonal(entries: &[Quaternion]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| if r == c { entries[r] } else { Quaternion::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut q = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                q.set(r, c, f(r, c));
            }
        }
        q
    }

    pub fn rows(&self) -> usize {
        self.comps[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.comps[0].ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn component(&self, idx: usize) -> &DMatrix<f64> {
        &self.comps[idx]
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.comps[0]
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.comps[1]
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.comps[2]
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.comps[3]
    }

    pub fn into_components(self) -> [DMatrix<f64>; 4] {
        self.comps
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        Quaternion::new(self.comps[0][(r, c)], self.comps[1][(r, c)], self.comps[2][(r, c)], self.comps[3][(r, c)])
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        for (m, v) in self.comps.iter_mut().zip(q.components()) {
            m[(r, c)] = v;
        }
    }

    /// Conjugate transpose `Q†`.
    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = &self.comps;
        Self { comps: [a.transpose(), -b.transpose(), -c.transpose(), -d.transpose()] }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { comps: self.comps.clone().map(|m| m * s) }
    }

    /// Checked product; errors on incompatible shapes.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let [a, b, c, d] = &self.comps;
        let [e, f, g, h] = &rhs.comps;
        Ok(Self {
            comps: [
                a * e - b * f - c * g - d * h,
                a * f + b * e + c * h - d * g,
                a * g - b * h + c * e + d * f,
                a * h + b * g - c * f + d * e,
            ],
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::Dimension("cannot add matrices of different shapes".into()));
        }
        let mut out = self.clone();
        for (o, r) in out.comps.iter_mut().zip(&rhs.comps) {
            *o += r;
        }
        Ok(out)
    }

    /// Max-entry defect of `Q + Q†`; zero exactly for anti-Hermitian matrices.
    pub fn anti_hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let [a, b, c, d] = &self.comps;
        let da = max_abs(&(a + a.transpose()));
        let db = max_abs(&(b - b.transpose()));
        let dc = max_abs(&(c - c.transpose()));
        let dd = max_abs(&(d - d.transpose()));
        da.max(db).max(dc).max(dd)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(max_abs).fold(0.0, f64::max)
    }
}

impl Mul for &QuatMatrix {
    type Output = QuatMatrix;
    fn mul(self, rhs: &QuatMatrix) -> QuatMatrix {
        self.try_mul(rhs).expect("quaternionic matrix shapes must agree")
    }
}

/// Real block embedding of a possibly rectangular quaternionic matrix.
pub(crate) fn embed_blocks(q: &QuatMatrix) -> DMatrix<f64> {
    let (r, c) = (q.rows(), q.cols());
    let mut out = DMatrix::zeros(4 * r, 4 * c);
    // (component, sign) for each block position of the left-multiplication matrix.
    const LAYOUT: [[(usize, f64); 4]; 4] = [
        [(0, 1.0), (1, -1.0), (2, -1.0), (3, -1.0)],
        [(1, 1.0), (0, 1.0), (3, -1.0), (2, 1.0)],
        [(2, 1.0), (3, 1.0), (0, 1.0), (1, -1.0)],
        [(3, 1.0), (2, -1.0), (1, 1.0), (0, 1.0)],
    ];
    for (bi, row) in LAYOUT.iter().enumerate() {
        for (bj, &(comp, sign)) in row.iter().enumerate() {
            out.view_mut((bi * r, bj * c), (r, c)).copy_from(&(q.component(comp) * sign));
        }
    }
    out
}

/// Reads the components back out of the first block column.
pub(crate) fn extract_blocks(x: &DMatrix<f64>) -> QuatMatrix {
    let (r, c) = (x.nrows() / 4, x.ncols() / 4);
    let comp = |i: usize| x.view((i * r, 0), (r, c)).into_owned();
    QuatMatrix { comps: [comp(0), comp(1), comp(2), comp(3)] }
}

/// Real `4n×4n` matrix of left multiplication by `q`.
pub fn embed_real(q: &QuatMatrix) -> Result<DMatrix<f64>> {
    if !q.is_square() {
        return Err(Error::Dimension(format!("embed_real needs a square matrix, got {}x{}", q.rows(), q.cols())));
    }
    Ok(embed_blocks(q))
}

/// Matrix of right scalar multiplication `v ↦ v·q` on ℍ^m.
pub fn right_multiplication(m: usize, q: Quaternion) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(4 * m, 4 * m);
    for col in 0..4 {
        let mut basis = [0.0; 4];
        basis[col] = 1.0;
        let v = Quaternion::new(basis[0], basis[1], basis[2], basis[3]) * q;
        for (row, val) in v.components().into_iter().enumerate() {
            if val != 0.0 {
                for s in 0..m {
                    out[(row * m + s, col * m + s)] = val;
                }
            }
        }
    }
    out
}

/// The standard complex structures on ℝ^{4m}.
#[derive(Debug, Clone, PartialEq)]
pub struct RealStructureTriple {
    pub i: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl RealStructureTriple {
    pub fn get(&self, s: Structure) -> &DMatrix<f64> {
        match s {
            Structure::I => &self.i,
            Structure::J => &self.j,
            Structure::K => &self.k,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Structure, &DMatrix<f64>)> {
        Structure::ALL.into_iter().map(move |s| (s, self.get(s)))
    }

    pub fn dim(&self) -> usize {
        self.i.nrows()
    }
}

/// `I0`, `J0` are right multiplication by `i` and `j`; `K0 = I0·J0`.
///
/// Right multiplications compose in reverse order, so `K0` is right
/// multiplication by `j·i = −k`.
pub fn standard_structures(m: usize) -> Result<RealStructureTriple> {
    if m == 0 {
        return Err(Error::Invalid("quaternionic dimension must be at least 1".into()));
    }
    let i = right_multiplication(m, Quaternion::i());
    let j = right_multiplication(m, Quaternion::j());
    let k = &i * &j;
    Ok(RealStructureTriple { i, j, k })
}

/// Outcome of [`is_quaternionic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuaternionicCheck {
    pub quaternionic: bool,
    /// Largest max-entry norm of `[X, A0]` over the three structures.
    pub defect: f64,
}

pub fn is_quaternionic(x: &DMatrix<f64>, tol: f64) -> Result<QuaternionicCheck> {
    let n = x.nrows();
    if x.ncols() != n || !n.is_multiple_of(4) {
        return Err(Error::Dimension(format!("expected a square matrix with side divisible by 4, got {}x{}", n, x.ncols())));
    }
    if n == 0 {
        return Ok(QuaternionicCheck { quaternionic: true, defect: 0.0 });
    }
    let st = standard_structures(n / 4)?;
    let defect = st.iter().map(|(_, a)| max_abs(&(x * a - a * x))).fold(0.0, f64::max);
    Ok(QuaternionicCheck { quaternionic: defect <= tol, defect })
}

/// Inverse of [`embed_real`] on the commutant of the structures.
pub fn extract_components(x: &DMatrix<f64>, tol: f64) -> Result<QuatMatrix> {
    let check = is_quaternionic(x, tol)?;
    if !check.quaternionic {
        return Err(Error::NotQuaternionic { defect: check.defect });
    }
    Ok(extract_blocks(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quat_matrix(n: usize) -> impl Strategy<Value = QuatMatrix> {
        proptest::collection::vec(-1.0f64..1.0, 4 * n * n).prop_map(move |v| {
            let comp = |i: usize| DMatrix::from_column_slice(n, n, &v[i * n * n..(i + 1) * n * n]);
            QuatMatrix::new(comp(0), comp(1), comp(2), comp(3)).unwrap()
        })
    }

    fn pair(max_n: usize) -> impl Strategy<Value = (QuatMatrix, QuatMatrix)> {
        (1..=max_n).prop_flat_map(|n| (quat_matrix(n), quat_matrix(n)))
    }

    #[test]
    fn identity_embeds_to_identity() {
        let e = embed_real(&QuatMatrix::identity(1)).unwrap();
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn embedding_of_i_matches_block_form() {
        let e = embed_real(&QuatMatrix::scalar(Quaternion::i())).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[0., -1., 0., 0., 1., 0., 0., 0., 0., 0., 0., -1., 0., 0., 1., 0.],
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn multiplication_table_is_respected() {
        // ij = k, computed directly on quaternions.
        assert_eq!(Quaternion::i() * Quaternion::j(), Quaternion::k());
        let pi = embed_real(&QuatMatrix::scalar(Quaternion::i())).unwrap();
        let pj = embed_real(&QuatMatrix::scalar(Quaternion::j())).unwrap();
        let pk = embed_real(&QuatMatrix::scalar(Quaternion::k())).unwrap();
        assert_eq!(&pi * &pj, pk);
    }

    #[test]
    fn embedding_rejects_rectangular_input() {
        assert!(matches!(embed_real(&QuatMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn mismatched_components_are_rejected() {
        let r = QuatMatrix::new(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2), DMatrix::zeros(2, 3), DMatrix::zeros(2, 2));
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn structure_relations() {
        let st = standard_structures(1).unwrap();
        let id = DMatrix::<f64>::identity(4, 4);
        for (_, a) in st.iter() {
            assert!(max_abs(&(a * a + &id)) == 0.0);
            assert!(max_abs(&(a.transpose() * a - &id)) == 0.0);
            assert!(max_abs(&(a + a.transpose())) == 0.0);
        }
        assert_eq!(&st.i * &st.j - &st.k, DMatrix::zeros(4, 4));
        assert!(standard_structures(0).is_err());
    }

    #[test]
    fn structures_are_right_multiplications() {
        // v·i for v = 1 + 2i + 3j + 4k, via the multiplication table.
        let v = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let st = standard_structures(1).unwrap();
        let vec = nalgebra::DVector::from_vec(v.components().to_vec());
        let vi = &st.i * &vec;
        assert_eq!(vi.as_slice(), (v * Quaternion::i()).components());
        let vj = &st.j * &vec;
        assert_eq!(vj.as_slice(), (v * Quaternion::j()).components());
    }

    #[test]
    fn identity_is_quaternionic() {
        let c = is_quaternionic(&DMatrix::identity(8, 8), DEFAULT_TOL).unwrap();
        assert!(c.quaternionic);
        assert_eq!(c.defect, 0.0);
    }

    #[test]
    fn reflection_is_not_quaternionic() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        let c = is_quaternionic(&x, DEFAULT_TOL).unwrap();
        assert!(!c.quaternionic);
        // [X, I0] has entries ±2 where the k-row meets the j-column.
        assert_eq!(c.defect, 2.0);
        assert!(matches!(extract_components(&x, DEFAULT_TOL), Err(Error::NotQuaternionic { .. })));
    }

    #[test]
    fn is_quaternionic_rejects_bad_sides() {
        assert!(is_quaternionic(&DMatrix::identity(6, 6), DEFAULT_TOL).is_err());
    }

    #[test]
    fn extract_examples() {
        let q = extract_components(&DMatrix::identity(4, 4), DEFAULT_TOL).unwrap();
        assert_eq!(q, QuatMatrix::identity(1));
        let e = embed_real(&QuatMatrix::scalar(Quaternion::i())).unwrap();
        let q = extract_components(&e, DEFAULT_TOL).unwrap();
        assert_eq!(q.get(0, 0), Quaternion::i());
    }

    proptest! {
        #[test]
        fn embedding_is_an_algebra_homomorphism((p, q) in pair(4)) {
            let ep = embed_real(&p).unwrap();
            let eq = embed_real(&q).unwrap();
            let prod = embed_real(&(&p * &q)).unwrap();
            prop_assert!(max_abs(&(prod - &ep * &eq)) < 1e-12);
            let sum = embed_real(&p.try_add(&q).unwrap()).unwrap();
            prop_assert!(max_abs(&(sum - (&ep + &eq))) < 1e-15);
            let adj = embed_real(&p.adjoint()).unwrap();
            prop_assert_eq!(adj, ep.transpose());
        }

        #[test]
        fn embedded_matrices_commute_with_structures(q in (1usize..=3).prop_flat_map(quat_matrix)) {
            let e = embed_real(&q).unwrap();
            let c = is_quaternionic(&e, 1e-12).unwrap();
            prop_assert!(c.quaternionic);
            let back = extract_components(&e, 1e-12).unwrap();
            prop_assert!(max_abs(&(embed_real(&back).unwrap() - e)) < 1e-14);
        }

        #[test]
        fn anti_hermitian_embeds_antisymmetric(q in (1usize..=3).prop_flat_map(quat_matrix)) {
            let ah = q.try_add(&q.adjoint().scale(-1.0)).unwrap();
            prop_assert!(ah.is_anti_hermitian(1e-15));
            let e = embed_real(&ah).unwrap();
            prop_assert!(max_abs(&(&e + e.transpose())) < 1e-15);
        }
    }
}
