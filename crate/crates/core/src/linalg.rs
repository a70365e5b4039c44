//! Dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
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

/// Numerical rank with threshold `rel * σ_max`.
pub fn rank(m: &DMatrix<C64>, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|x| **x > rel * top).count(),
        _ => 0,
    }
}

/// Rank of the matrix whose columns are the given vectors, after scaling each column to unit length.
pub fn column_rank(columns: &[Vec<C64>], dim: usize, rel: f64) -> usize {
    let cols: Vec<&Vec<C64>> = columns
        .iter()
        .filter(|c| c.iter().any(|x| x.norm() > 0.0))
        .collect();
    if cols.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(dim, cols.len(), |i, j| {
        let n = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols[j][i] / n
    });
    rank(&m, rel)
}

/// `[Re J, -Im J; Im J, Re J]`, the real form of `J` acting on `(Re x, Im x)`.
pub fn realify(j: &DMatrix<C64>) -> DMatrix<f64> {
    let (r, c) = j.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, k| {
        let v = j[(i % r, k % c)];
        match (i < r, k < c) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// `(Re v, Im v)` stacked.
pub fn realify_vec(v: &[C64]) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`realify_vec`].
pub fn complexify(v: &DVector<f64>) -> Vec<C64> {
    let n = v.len() / 2;
    (0..n).map(|i| C64::new(v[i], v[i + n])).collect()
}

/// Minimal-norm least-squares solution of `a x = b`, singular values below
/// `rel * σ_max` discarded. Also returns the singular values (descending).
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel: f64) -> (DVector<f64>, Vec<f64>) {
    let (_, cols) = a.shape();
    if a.is_empty() {
        return (DVector::zeros(cols), Vec::new());
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut x = DVector::zeros(cols);
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > rel * top && *s > 0.0 {
            let coef = u.column(k).dot(b) / s;
            x += vt.row(k).transpose() * coef;
        }
    }
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    (x, sv)
}

/// Orthonormal basis (as columns) of the real span of the given vectors.
pub fn real_span_basis(vectors: &[DVector<f64>], dim: usize, rel: f64) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let svd = m.svd(true, false);
    let top = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    let u = svd.u.expect("u requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > rel * top)
        .collect();
    DMatrix::from_fn(dim, keep.len(), |i, j| u[(i, keep[j])])
}

/// Orthonormal basis (as columns) of the complex span of the given vectors.
pub fn complex_span_basis(vectors: &[Vec<C64>], dim: usize, rel: f64) -> DMatrix<C64> {
    if vectors.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let svd = m.svd(true, false);
    let top = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    let u = svd.u.expect("u requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > rel * top)
        .collect();
    DMatrix::from_fn(dim, keep.len(), |i, j| u[(i, keep[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realify_matches_complex_product() {
        let j = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 2.0),
                C64::new(0.0, -1.0),
                C64::new(3.0, 0.5),
                C64::new(-2.0, 1.0),
            ],
        );
        let x = [C64::new(0.3, -0.7), C64::new(1.1, 0.2)];
        let y = &j * DVector::from_row_slice(&x);
        let yr = realify(&j) * realify_vec(&x);
        let back = complexify(&yr);
        for k in 0..2 {
            assert!((back[k] - y[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn pinv_gives_minimal_norm() {
        // x + y = 2 has minimal-norm solution (1, 1)
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let (x, _) = pinv_solve(&a, &DVector::from_row_slice(&[2.0]), 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_of_dependent_columns() {
        let v = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
        let w: Vec<C64> = v.iter().map(|x| x * C64::new(2.0, -3.0)).collect();
        assert_eq!(column_rank(&[v, w], 3, 1e-8), 1);
    }
}
