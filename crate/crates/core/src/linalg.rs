//! Small dense kernels shared by the eigen, selection and metrics modules.
//!
//! Everything here works on `ndarray` owned arrays and is sized for the
//! `c × c` blocks and `n`-vectors that show up per component; none of it is
//! meant for full `p × p` factorizations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

pub(crate) fn dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.dot(&b)
}

pub(crate) fn sq_norm(a: ArrayView1<'_, f64>) -> f64 {
    a.dot(&a)
}

/// Flips the sign of `v` so that its largest-magnitude entry is positive.
/// Ties on magnitude go to the lowest index.
pub fn apply_sign_rule(v: &mut Array1<f64>) {
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if best_abs > 0.0 && v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

/// Orthogonalizes `v` against the orthonormal `basis` with two classical
/// Gram-Schmidt passes and returns the accumulated coefficients.
pub(crate) fn orthogonalize(basis: &[Array1<f64>], v: &mut Array1<f64>) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (k, q) in basis.iter().enumerate() {
            let c = q.dot(v);
            v.scaled_add(-c, q);
            coeffs[k] += c;
        }
    }
    coeffs
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
///
/// Fails with the index of the first pivot `L_kk²` that does not exceed
/// `min_pivot`.
pub(crate) fn cholesky(a: ArrayView2<'_, f64>, min_pivot: f64) -> Result<Array2<f64>, usize> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > min_pivot) {
            return Err(j);
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub(crate) fn solve_lower(l: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub(crate) fn solve_lower_transposed(l: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `R x = b` for upper-triangular `R`.
pub(crate) fn solve_upper(r: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= r[[i, k]] * x[k];
        }
        x[i] = s / r[[i, i]];
    }
    x
}

/// Thin QR of the columns of `t` by modified Gram-Schmidt with
/// reorthogonalization. Returns the orthonormal columns, or the index of the
/// first column whose residual squared norm falls below `rel_tol` times its
/// original squared norm.
pub(crate) fn orthonormal_columns(t: ArrayView2<'_, f64>, rel_tol: f64) -> Result<Vec<Array1<f64>>, usize> {
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(t.ncols());
    for (j, col) in t.columns().into_iter().enumerate() {
        let orig = sq_norm(col);
        let mut v = col.to_owned();
        orthogonalize(&basis, &mut v);
        let res = sq_norm(v.view());
        if !(res > rel_tol * orig) || orig == 0.0 {
            return Err(j);
        }
        v /= res.sqrt();
        basis.push(v);
    }
    Ok(basis)
}

/// Least-squares coefficients of `y` on the columns of `design` through a
/// thin QR. Fails like [`orthonormal_columns`] on dependent columns.
pub(crate) fn least_squares(design: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, rel_tol: f64) -> Result<Array1<f64>, usize> {
    let k = design.ncols();
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(k);
    let mut r = Array2::<f64>::zeros((k, k));
    for (j, col) in design.columns().into_iter().enumerate() {
        let orig = sq_norm(col);
        let mut v = col.to_owned();
        let coeffs = orthogonalize(&basis, &mut v);
        let res = sq_norm(v.view());
        if !(res > rel_tol * orig) || orig == 0.0 {
            return Err(j);
        }
        for (i, c) in coeffs.into_iter().enumerate() {
            r[[i, j]] = c;
        }
        r[[j, j]] = res.sqrt();
        v /= res.sqrt();
        basis.push(v);
    }
    let qty: Array1<f64> = basis.iter().map(|q| q.dot(&y)).collect();
    Ok(solve_upper(r.view(), qty.view()))
}

/// Squared norm of the orthogonal projection of `y` onto the span of the
/// orthonormal `basis`.
pub(crate) fn projected_sq_norm(basis: &[Array1<f64>], y: ArrayView1<'_, f64>) -> f64 {
    basis.iter().map(|q| q.dot(&y).powi(2)).sum()
}
