//! Flat ℍ^m with its hyperkähler structure and a linear tri-Hamiltonian torus
//! action generated by commuting anti-Hermitian quaternionic matrices.
//!
//! The group acts on the right, `x.h = ρ(h)⁻¹ x`, so the fundamental field of
//! `ξ` is `K^ξ_x = −ρ(ξ) x`. The moment map is the quadratic
//! `μ_A^a(x) = ½ ω_A(K^{e_a}_x, x)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_vec};
use crate::quat::{embed_real, standard_structures, QuatMatrix, Quaternion, RealStructureTriple, Structure, DEFAULT_TOL};

/// A point of ℝ^{4m} ≅ ℍ^m.
#[derive(Debug, Clone, PartialEq)]
pub struct HkPoint {
    pub x: DVector<f64>,
}

impl HkPoint {
    pub fn new(x: DVector<f64>) -> Self {
        Self { x }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self { x: DVector::from_column_slice(v) }
    }
}

impl From<DVector<f64>> for HkPoint {
    fn from(x: DVector<f64>) -> Self {
        Self { x }
    }
}

/// Values `μ_A^a`, stored structure-major: index `A·k + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub values: DVector<f64>,
    pub k: usize,
}

impl MomentValue {
    pub fn get(&self, s: Structure, a: usize) -> f64 {
        self.values[s.index() * self.k + a]
    }

    /// `[μ_I, μ_J, μ_K]` for each generator.
    pub fn triples(&self) -> Vec<[f64; 3]> {
        (0..self.k)
            .map(|a| [self.values[a], self.values[self.k + a], self.values[2 * self.k + a]])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    name: String,
    m: usize,
    generators: Vec<QuatMatrix>,
    generators_real: Vec<DMatrix<f64>>,
    level: DVector<f64>,
    structures: RealStructureTriple,
}

impl Scenario {
    /// Validates the generators (anti-Hermitian, pairwise commuting, at most
    /// `m` of them) and stores the level as one `[ζ_I, ζ_J, ζ_K]` per generator.
    pub fn new(name: impl Into<String>, m: usize, generators: Vec<QuatMatrix>, level: Vec<[f64; 3]>) -> Result<Self> {
        let structures = standard_structures(m)?;
        let k = generators.len();
        if k > m {
            return Err(Error::Invalid(format!("{k} generators exceed quaternionic dimension {m}")));
        }
        if level.len() != k {
            return Err(Error::Dimension(format!("level has {} triples for {k} generators", level.len())));
        }
        for (index, g) in generators.iter().enumerate() {
            if g.rows() != m || g.cols() != m {
                return Err(Error::Dimension(format!("generator {index} is {}x{}, expected {m}x{m}", g.rows(), g.cols())));
            }
            let defect = g.anti_hermitian_defect();
            if defect > DEFAULT_TOL {
                return Err(Error::NotAntiHermitian { index, defect });
            }
        }
        let generators_real: Vec<DMatrix<f64>> = generators.iter().map(embed_real).collect::<Result<_>>()?;
        for a in 0..k {
            for b in a + 1..k {
                let (x, y) = (&generators_real[a], &generators_real[b]);
                let defect = max_abs(&(x * y - y * x));
                if defect > DEFAULT_TOL {
                    return Err(Error::NonCommuting { a, b, defect });
                }
            }
        }
        let mut flat = DVector::zeros(3 * k);
        for (a, t) in level.iter().enumerate() {
            for s in 0..3 {
                flat[s * k + a] = t[s];
            }
        }
        Ok(Self { name: name.into(), m, generators, generators_real, level: flat, structures })
    }

    /// Diagonal circle actions: generator `a` is `diag(i·w_a)`.
    pub fn weighted(name: impl Into<String>, m: usize, weights: &[Vec<f64>], level: Vec<[f64; 3]>) -> Result<Self> {
        let gens = weights
            .iter()
            .map(|w| {
                if w.len() != m {
                    return Err(Error::Dimension(format!("weight vector has length {}, expected {m}", w.len())));
                }
                Ok(QuatMatrix::diagonal(&w.iter().map(|&x| Quaternion::i().scale(x)).collect::<Vec<_>>()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, m, gens, level)
    }

    /// U(1) with weights (1,1) on ℍ².
    pub fn eguchi_hanson(level: [f64; 3]) -> Self {
        Self::weighted("eguchi-hanson", 2, &[vec![1.0, 1.0]], vec![level]).expect("valid preset")
    }

    /// U(1)² ⊂ Sp(3) with weights (1,1,0) and (0,1,1).
    pub fn torus_sp3(level: [[f64; 3]; 2]) -> Self {
        Self::weighted("torus-sp3", 3, &[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]], level.to_vec()).expect("valid preset")
    }

    /// No group at all on ℍ^m.
    pub fn trivial(m: usize) -> Result<Self> {
        Self::new("trivial", m, Vec::new(), Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.generators.len()
    }

    /// Quaternionic dimension of the quotient.
    pub fn n(&self) -> usize {
        self.m - self.k()
    }

    pub fn dim(&self) -> usize {
        4 * self.m
    }

    pub fn generators(&self) -> &[QuatMatrix] {
        &self.generators
    }

    pub fn generator_real(&self, a: usize) -> &DMatrix<f64> {
        &self.generators_real[a]
    }

    pub fn level(&self) -> &DVector<f64> {
        &self.level
    }

    pub fn level_triples(&self) -> Vec<[f64; 3]> {
        MomentValue { values: self.level.clone(), k: self.k() }.triples()
    }

    pub fn structures(&self) -> &RealStructureTriple {
        &self.structures
    }

    pub fn structure(&self, s: Structure) -> &DMatrix<f64> {
        self.structures.get(s)
    }

    fn check_vec(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!("vector has length {}, expected {}", v.len(), self.dim())));
        }
        Ok(())
    }

    pub fn metric(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_vec(u)?;
        self.check_vec(v)?;
        Ok(u.dot(v))
    }

    /// `ω_A(u, v) = g(A u, v)`.
    pub fn omega(&self, s: Structure, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_vec(u)?;
        self.check_vec(v)?;
        Ok((self.structure(s) * u).dot(v))
    }

    /// `K^ξ_x` for `ξ = Σ c_a e_a`.
    pub fn fundamental_field(&self, coeffs: &[f64], x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_vec(x)?;
        if coeffs.len() != self.k() {
            return Err(Error::Dimension(format!("{} coefficients for {} generators", coeffs.len(), self.k())));
        }
        let mut out = DVector::zeros(self.dim());
        for (c, g) in coeffs.iter().zip(&self.generators_real) {
            out.gemv(-c, g, x, 1.0);
        }
        Ok(out)
    }

    /// Columns `K^{e_a}_x`, a `4m × k` matrix.
    pub fn fundamental_matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_vec(x)?;
        let mut out = DMatrix::zeros(self.dim(), self.k());
        for (a, g) in self.generators_real.iter().enumerate() {
            out.set_column(a, &(-(g * x)));
        }
        Ok(out)
    }

    pub fn moment_map(&self, x: &DVector<f64>) -> Result<MomentValue> {
        let kmat = self.fundamental_matrix(x)?;
        let k = self.k();
        let mut values = DVector::zeros(3 * k);
        for s in Structure::ALL {
            let a0 = self.structure(s);
            for a in 0..k {
                values[s.index() * k + a] = 0.5 * (a0 * kmat.column(a)).dot(x);
            }
        }
        Ok(MomentValue { values, k })
    }

    /// `μ(x) − ζ`, structure-major.
    pub fn level_defect(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.moment_map(x)?.values - &self.level)
    }

    pub fn level_residual(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(max_abs_vec(&self.level_defect(x)?))
    }

    /// Exact differential of μ: row `A·k + a` is `(A K^{e_a}_x)ᵀ`.
    pub fn dmoment(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let kmat = self.fundamental_matrix(x)?;
        let k = self.k();
        let mut out = DMatrix::zeros(3 * k, self.dim());
        for s in Structure::ALL {
            let a0 = self.structure(s);
            for a in 0..k {
                out.set_row(s.index() * k + a, &(a0 * kmat.column(a)).transpose());
            }
        }
        Ok(out)
    }

    /// Matrix of the action of `exp(Σ θ_a e_a)` on ℝ^{4m}.
    pub fn action_matrix(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        if theta.len() != self.k() {
            return Err(Error::Dimension(format!("{} torus coordinates for {} generators", theta.len(), self.k())));
        }
        let mut gen = DMatrix::zeros(self.dim(), self.dim());
        for (t, g) in theta.iter().zip(&self.generators_real) {
            gen -= g * *t;
        }
        Ok(gen.exp())
    }

    /// `x.h` for `h = exp(Σ θ_a e_a)`.
    pub fn act(&self, x: &DVector<f64>, theta: &[f64]) -> Result<HkPoint> {
        self.check_vec(x)?;
        Ok(HkPoint::new(self.action_matrix(theta)? * x))
    }

    /// `‖μ(x.h) − μ(x)‖∞`; for a torus this is the full equivariance defect.
    pub fn check_equivariance(&self, x: &DVector<f64>, theta: &[f64]) -> Result<f64> {
        let moved = self.act(x, theta)?;
        Ok(max_abs_vec(&(self.moment_map(&moved.x)?.values - self.moment_map(x)?.values)))
    }
}
