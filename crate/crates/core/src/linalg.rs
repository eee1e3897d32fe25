//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest absolute entry (elementwise sup norm). Zero for empty matrices.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn antisymmetry_defect(m: &DMatrix<f64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m + m.transpose()))
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Ratio of smallest to largest singular value; 0 for a zero matrix.
pub fn singular_ratio(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Build a matrix from column vectors (all of length `dim`).
pub fn from_columns(dim: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

pub fn columns(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// Projects `v` onto the orthogonal complement of the orthonormal columns in `basis`.
pub fn reject(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&r);
            r.axpy(-c, b, 1.0);
        }
    }
    r
}

/// Modified Gram-Schmidt. Fails when a residual falls below `rel_tol` times
/// the norm of the vector it came from.
pub fn gram_schmidt(vectors: &[DVector<f64>], rel_tol: f64) -> Result<Vec<DVector<f64>>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        let r = reject(v, &out);
        let n = r.norm();
        if scale == 0.0 || n <= rel_tol * scale {
            return Err(Error::GramSchmidtBreakdown { residual: n });
        }
        out.push(r / n);
    }
    Ok(out)
}

/// Completes the orthonormal vectors in `basis` to an orthonormal basis of
/// ℝ^dim, returning only the new vectors. Coordinate vectors are projected
/// and the one with the largest residual is taken at each step.
pub fn orthonormal_complement(basis: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut all: Vec<DVector<f64>> = basis.to_vec();
    let mut out = Vec::new();
    while all.len() < dim {
        let (_, best) = (0..dim)
            .map(|i| {
                let r = reject(&DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 }), &all);
                (r.norm(), r)
            })
            .fold((f64::NEG_INFINITY, DVector::zeros(dim)), |acc, cand| if cand.0 > acc.0 { cand } else { acc });
        let u = &best / best.norm();
        all.push(u.clone());
        out.push(u);
    }
    out
}

/// Sine of the largest principal angle between the column spans of two
/// matrices with orthonormal columns. Returns 1 when the dimensions differ.
pub fn max_sin_principal_angle(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> f64 {
    if q1.ncols() != q2.ncols() || q1.nrows() != q2.nrows() {
        return 1.0;
    }
    if q1.ncols() == 0 {
        return 0.0;
    }
    let residual = q2 - q1 * (q1.transpose() * q2);
    spectral_norm(&residual).min(1.0)
}

/// Orthonormal basis (as columns) of the column span of `m`, via SVD,
/// keeping singular values above `rel_tol · σ_max`.
pub fn range_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let max = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| max > 0.0 && svd.singular_values[i] > rel_tol * max)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthogonal projector onto the column span of the full-column-rank `m`.
pub fn projector_onto(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = m.nrows();
    if m.ncols() == 0 {
        return Ok(DMatrix::zeros(dim, dim));
    }
    let gram = m.transpose() * m;
    let inv = gram.cholesky().ok_or(Error::SingularFrame)?.inverse();
    Ok(m * inv * m.transpose())
}

/// Minimum-norm solution of `J z = r` for full-row-rank `J`, i.e. `J⁺ r`.
pub fn pinv_apply(j: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    if j.nrows() == 0 {
        return Ok(DVector::zeros(j.ncols()));
    }
    let gram = j * j.transpose();
    let chol = gram.cholesky().ok_or(Error::NotRegular { ratio: 0.0 })?;
    Ok(j.transpose() * chol.solve(r))
}

/// Polar (orthogonal) factor `U Vᵀ` of a full-column-rank matrix.
pub fn polar_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.ncols() == 0 {
        return Ok(m.clone());
    }
    let svd = m.clone().svd(true, true);
    if svd.singular_values.min() <= 1e-12 * svd.singular_values.max().max(1e-300) {
        return Err(Error::SingularFrame);
    }
    Ok(svd.u.expect("requested U") * svd.v_t.expect("requested Vt"))
}
