//! Real dense helpers used by the hull geometry, backed by nalgebra.

use nalgebra::{DMatrix, DVector};

use super::C64;

/// Singular values in descending order.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with singular values `>= rel_tol * largest`.
pub(crate) fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&largest) if largest > 0.0 => s.iter().filter(|&&x| x >= rel_tol * largest).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the span of the given vectors, via
/// modified Gram–Schmidt with one re-orthogonalization pass.
pub(crate) fn orthonormal_basis(vectors: &[Vec<f64>], drop_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        let original = norm(&w);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let len = norm(&w);
        if len > drop_tol * original.max(f64::MIN_POSITIVE) {
            w.iter_mut().for_each(|x| *x /= len);
            basis.push(w);
        }
    }
    basis
}

/// Component of `v` orthogonal to the span of an orthonormal `basis`.
pub(crate) fn orthogonal_residual(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &w);
            axpy(-c, q, &mut w);
        }
    }
    w
}

/// Pseudo-inverse with relative singular value cutoff.
pub(crate) fn pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tol * largest;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for idx in 0..k {
        let s = svd.singular_values[idx];
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let vcol = v_t.row(idx).transpose();
        let ucol = u.column(idx);
        out += (vcol * ucol.transpose()) / s;
    }
    out
}

/// Unit vector spanning (approximately) the null space of `m` when its smallest
/// singular value is below `rel_tol * largest`. Wide matrices are padded with
/// zero rows so the full right singular basis is available.
pub(crate) fn null_vector(m: &DMatrix<f64>, rel_tol: f64) -> Option<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return None;
    }
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s = &svd.singular_values;
    let largest = s.iter().copied().fold(0.0, f64::max);
    let (idx, &smallest) = s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    if largest == 0.0 || smallest <= rel_tol * largest {
        Some(v_t.row(idx).transpose())
    } else {
        None
    }
}

/// Roots of `Σ coeffs[k] z^k` via the eigenvalues of the companion matrix.
/// Leading coefficients below `rel_tol * max|c|` are dropped first.
pub(crate) fn polynomial_roots(coeffs: &[C64], rel_tol: f64) -> Vec<C64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree].norm() <= rel_tol * scale {
        degree -= 1;
    }
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let companion = DMatrix::<C64>::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -coeffs[degree - 1 - j] / lead
        } else if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    companion
        .schur()
        .eigenvalues()
        .map(|ev| ev.iter().copied().collect())
        .unwrap_or_default()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
