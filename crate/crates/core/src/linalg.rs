//! Small dense helpers: Cholesky solves and least squares with an intercept.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::scalar::Scalar;

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a pivot falls below `rel_tol` times the largest diagonal entry.
pub fn cholesky<F: Scalar>(a: ArrayView2<'_, F>, rel_tol: F) -> Option<Array2<F>> {
    let k = a.nrows();
    let scale = a.diag().iter().fold(F::zero(), |m, &v| m.max(v.abs()));
    if scale == F::zero() {
        return if k == 0 { Some(Array2::zeros((0, 0))) } else { None };
    }
    let mut l = Array2::<F>::zeros((k, k));
    for j in 0..k {
        let mut d = a[[j, j]];
        for m in 0..j {
            d -= l[[j, m]] * l[[j, m]];
        }
        if !(d > rel_tol * scale) {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..k {
            let mut s = a[[i, j]];
            for m in 0..j {
                s -= l[[i, m]] * l[[j, m]];
            }
            l[[i, j]] = s / d;
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
pub fn cholesky_solve<F: Scalar>(l: &Array2<F>, b: ArrayView1<'_, F>) -> Array1<F> {
    let k = l.nrows();
    let mut y = b.to_owned();
    for i in 0..k {
        let mut s = y[i];
        for m in 0..i {
            s -= l[[i, m]] * y[m];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..k).rev() {
        let mut s = y[i];
        for m in (i + 1)..k {
            s -= l[[m, i]] * y[m];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

pub fn solve_spd<F: Scalar>(a: ArrayView2<'_, F>, b: ArrayView1<'_, F>) -> Option<Array1<F>> {
    let l = cholesky(a, F::epsilon() * F::lit(1e3))?;
    Some(cholesky_solve(&l, b))
}

/// Column means.
pub fn column_means<F: Scalar>(x: ArrayView2<'_, F>) -> Array1<F> {
    let n = F::from_count(x.nrows());
    x.axis_iter(Axis(1)).map(|c| c.iter().copied().sum::<F>() / n).collect()
}

/// `X_c^T X_c` and `X_c^T y_c` for column- and response-centered data.
pub fn centered_gram<F: Scalar>(x: ArrayView2<'_, F>, y: ArrayView1<'_, F>) -> (Array2<F>, Array1<F>, Array1<F>, F) {
    let n = F::from_count(x.nrows());
    let means = column_means(x);
    let ybar = y.iter().copied().sum::<F>() / n;
    let mut xc = x.to_owned();
    for (mut col, &m) in xc.axis_iter_mut(Axis(1)).zip(means.iter()) {
        col.mapv_inplace(|v| v - m);
    }
    let yc = y.mapv(|v| v - ybar);
    let gram = xc.t().dot(&xc);
    let xty = xc.t().dot(&yc);
    (gram, xty, means, ybar)
}

/// Ordinary least squares with an unpenalized intercept; `None` if the
/// centered design is rank deficient.
pub fn ols_with_intercept<F: Scalar>(x: ArrayView2<'_, F>, y: ArrayView1<'_, F>) -> Option<(F, Array1<F>)> {
    let (gram, xty, means, ybar) = centered_gram(x, y);
    let beta = solve_spd(gram.view(), xty.view())?;
    let intercept = ybar - means.dot(&beta);
    Some((intercept, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_solves_spd_system() {
        let a: Array2<f64> = array![[4.0, 2.0, 0.4], [2.0, 3.0, 0.5], [0.4, 0.5, 2.0]];
        let b = array![1.0, -2.0, 0.5];
        let x = solve_spd(a.view(), b.view()).unwrap();
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(solve_spd(a.view(), array![1.0, 1.0].view()).is_none());
    }

    #[test]
    fn ols_recovers_exact_plane() {
        let x: Array2<f64> = array![[1.0, 0.0], [0.0, 1.0], [2.0, 1.0], [3.0, -1.0]];
        let y = x.column(0).mapv(|v| 2.0 * v) - x.column(1).mapv(|v| 3.0 * v) + 0.5;
        let (b0, b) = ols_with_intercept(x.view(), y.view()).unwrap();
        assert!((b0 - 0.5).abs() < 1e-12 && (b[0] - 2.0).abs() < 1e-12 && (b[1] + 3.0).abs() < 1e-12);
    }
}
