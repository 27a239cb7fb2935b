// Independent reference implementations used only by tests. Nothing here
// shares code with the library's numerical paths: eigenproblems go through
// cyclic Jacobi rotations, least squares through normal equations and
// Gaussian elimination, projections through explicit dense projectors.
#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn random_matrix(n: usize, p: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, p), |_| StandardNormal.sample(&mut rng))
}

pub fn random_vector(n: usize, seed: u64) -> Array1<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array1::from_shape_fn(n, |_| StandardNormal.sample(&mut rng))
}

pub fn random_psd(d: usize, seed: u64) -> Array2<f64> {
    let m = random_matrix(d, d, seed);
    m.t().dot(&m)
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
/// Eigenvalues are returned in decreasing order with matching eigenvector columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(1e-300);
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let vals = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        vecs.column_mut(k).assign(&v.column(i));
    }
    (vals, vecs)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().partial_cmp(&m[[j, col]].abs()).unwrap())
            .unwrap();
        if piv != col {
            for k in 0..n {
                m.swap([col, k], [piv, k]);
            }
            rhs.swap(col, piv);
        }
        for i in (col + 1)..n {
            let f = m[[i, col]] / m[[col, col]];
            for k in col..n {
                m[[i, k]] -= f * m[[col, k]];
            }
            rhs[i] -= f * rhs[col];
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= m[[i, k]] * x[k];
        }
        x[i] = s / m[[i, i]];
    }
    x
}

pub fn inverse(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let e = Array1::from_shape_fn(n, |i| if i == j { 1.0 } else { 0.0 });
        inv.column_mut(j).assign(&gauss_solve(a, &e));
    }
    inv
}

pub fn columns(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((x.nrows(), idx.len()));
    for (k, &j) in idx.iter().enumerate() {
        out.column_mut(k).assign(&x.column(j));
    }
    out
}

/// Least-squares coefficients of `y` on `block` via the normal equations.
pub fn normal_equations(block: &Array2<f64>, y: ArrayView1<f64>) -> Array1<f64> {
    let g = block.t().dot(block);
    let rhs = block.t().dot(&y);
    gauss_solve(&g, &rhs)
}

/// Squared norm of the fitted values of `y` regressed on `block`.
pub fn fitted_sq_norm(block: &Array2<f64>, y: ArrayView1<f64>) -> f64 {
    if block.ncols() == 0 {
        return 0.0;
    }
    let coef = normal_equations(block, y);
    let fit = block.dot(&coef);
    fit.dot(&fit)
}

pub struct NaiveSelection {
    pub indices: Vec<usize>,
    pub r2_path: Vec<f64>,
}

/// Greedy forward selection that refits every candidate block from scratch.
/// Mirrors the library's stopping, exclusion and tie rules.
pub fn naive_greedy(x: ArrayView2<f64>, u: ArrayView1<f64>, alpha: f64, max_card: usize, tol: f64) -> NaiveSelection {
    let p = x.ncols();
    let uu = u.dot(&u);
    let mut selected: Vec<usize> = Vec::new();
    let mut excluded = vec![false; p];
    let mut r2 = 0.0;
    let mut path = Vec::new();
    while selected.len() < max_card && r2 < alpha - 1e-12 {
        let block = columns(x, &selected);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..p {
            if excluded[j] || selected.contains(&j) {
                continue;
            }
            let xj = x.column(j);
            let orig = xj.dot(&xj);
            let resid = orig - fitted_sq_norm(&block, xj);
            if orig == 0.0 || resid <= tol * orig {
                excluded[j] = true;
                continue;
            }
            let mut idx = selected.clone();
            idx.push(j);
            let gain = fitted_sq_norm(&columns(x, &idx), u) - r2 * uu;
            match best {
                Some((_, g)) if gain <= g + 1e-12 * uu => {}
                _ => best = Some((j, gain)),
            }
        }
        match best {
            Some((j, gain)) if gain > 1e-14 * uu => {
                selected.push(j);
                r2 = fitted_sq_norm(&columns(x, &selected), u) / uu;
                path.push(r2);
            }
            _ => break,
        }
    }
    NaiveSelection { indices: selected, r2_path: path }
}

/// `(I − t t'/t't) Q` with the projector formed explicitly.
pub fn dense_projector_deflate(q: &Array2<f64>, t: &Array1<f64>) -> Array2<f64> {
    let n = t.len();
    let tt = t.dot(t);
    let mut proj = Array2::<f64>::eye(n);
    for i in 0..n {
        for j in 0..n {
            proj[[i, j]] -= t[i] * t[j] / tt;
        }
    }
    proj.dot(q)
}

/// `trace(X'T(T'T)⁻¹T'X)` with an explicit inverse.
pub fn trace_vexp(x: &Array2<f64>, t: &Array2<f64>) -> f64 {
    let inv = inverse(&t.t().dot(t));
    let xt = x.t().dot(t);
    let m = xt.dot(&inv).dot(&xt.t());
    m.diag().sum()
}

/// Best unit-norm loadings of cardinality `c` maximizing `a'Sa`, by
/// enumerating subsets and diagonalizing each principal submatrix with Jacobi.
pub fn brute_force_norm(s: &Array2<f64>, c: usize) -> (Vec<usize>, f64) {
    let p = s.nrows();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut idx: Vec<usize> = (0..c).collect();
    loop {
        let sub = Array2::from_shape_fn((c, c), |(i, j)| s[[idx[i], idx[j]]]);
        let (vals, _) = jacobi_eigen(&sub);
        if vals[0] > best.1 + 1e-12 * vals[0].abs().max(1.0) {
            best = (idx.clone(), vals[0]);
        }
        // next combination in lexicographic order
        let mut i = c;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < p - c + i {
                idx[i] += 1;
                for k in (i + 1)..c {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// OLS coefficients of `y` on the columns of `design` via normal equations.
pub fn ols_normal(design: &Array2<f64>, y: &Array1<f64>) -> Array1<f64> {
    normal_equations(design, y.view())
}

pub fn pearson(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
