//! Small numeric helpers shared across modules.

use nalgebra::DMatrix;

/// Fourth-order central difference of a vector-valued function along axis `i`.
pub fn central_diff<F>(f: F, x: &[f64], i: usize, h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut p = x.to_vec();
    let mut at = |s: f64| {
        p[i] = x[i] + s * h;
        f(&p)
    };
    let f2p = at(2.0);
    let f1p = at(1.0);
    let f1m = at(-1.0);
    let f2m = at(-2.0);
    f2p.iter()
        .zip(&f1p)
        .zip(f1m.iter().zip(&f2m))
        .map(|((a, b), (c, e))| (-a + 8.0 * b - 8.0 * c + e) / (12.0 * h))
        .collect()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Log-log slope of `y` against `x`; `None` if any value is non-positive.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().chain(y).any(|v| *v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).map(|(s, _)| s)
}

/// Symmetric positive square root of a symmetric positive-definite matrix.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let sq = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sq) * eig.eigenvectors.transpose()
}

/// Dense row-major `m x m` real matrix times complex vector, accumulated.
#[inline]
pub fn matvec_acc(mat: &[f64], x: &[crate::C64], out: &mut [crate::C64], scale: f64) {
    let m = x.len();
    for r in 0..m {
        let row = &mat[r * m..(r + 1) * m];
        let mut acc = crate::C64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(x) {
            if *a != 0.0 {
                acc += b * *a;
            }
        }
        out[r] += acc * scale;
    }
}

/// Row-major copy of a square matrix.
pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            v.push(m[(r, c)]);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_diff_is_fourth_order() {
        let f = |x: &[f64]| vec![x[0].sin() * x[1].exp()];
        let x = [0.4, -0.2];
        let exact = 0.4f64.cos() * (-0.2f64).exp();
        let e1 = (central_diff(f, &x, 0, 0.1)[0] - exact).abs();
        let e2 = (central_diff(f, &x, 0, 0.05)[0] - exact).abs();
        assert!((e1 / e2).log2() > 3.8);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.4, 0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&x, &[0.0, 1.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let s = sym_sqrt(&m);
        assert!((&s * &s - m).norm() < 1e-13);
    }
}
