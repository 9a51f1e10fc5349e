use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Settings for [`expmv`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Krylov subspace dimension per step.
    pub dim: usize,
    /// Local error target per unit time, relative to `‖v‖`.
    pub tol: f64,
    /// Upper bound on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            dim: 40,
            tol: 1e-10,
            max_steps: 100_000,
        }
    }
}

/// Work counters from one [`expmv`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrylovStats {
    pub steps: usize,
    pub rejected: usize,
    pub matvecs: usize,
    /// Accumulated local error estimate.
    pub error: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(t A) v` by restarted Arnoldi with Expokit-style step control.
///
/// `apply(x, y)` must write `A x` into `y`. `anorm` is an estimate of `‖A‖`
/// used only for the first step size.
pub fn expmv<F>(apply: F, t: f64, v: &[C64], anorm: f64, opts: KrylovOptions) -> Result<(Vec<C64>, KrylovStats)>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = v.len();
    let mut w = v.to_vec();
    let mut stats = KrylovStats::default();
    let beta0 = norm(v);
    if beta0 == 0.0 || t == 0.0 {
        return Ok((w, stats));
    }
    let m = opts.dim.min(n).max(1);
    let tol = opts.tol * beta0;
    let anorm = anorm.max(1e-300);
    let (gamma, delta) = (0.9, 1.2);
    let fact = ((m as f64 + 1.0) / std::f64::consts::E).powf(m as f64 + 1.0)
        * (2.0 * std::f64::consts::PI * (m as f64 + 1.0)).sqrt();
    let mut t_step = (1.0 / anorm) * ((fact * tol) / (4.0 * beta0 * anorm)).powf(1.0 / m as f64);
    t_step = t_step.min(t);
    let mut t_now = 0.0;
    let zero = C64::new(0.0, 0.0);
    let mut basis: Vec<Vec<C64>> = (0..=m).map(|_| vec![zero; n]).collect();
    let mut av = vec![zero; n];

    while t_now < t {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::Krylov(format!("step budget exhausted at t = {t_now:e} of {t:e}")));
        }
        let beta = norm(&w);
        for (b, x) in basis[0].iter_mut().zip(&w) {
            *b = x / beta;
        }
        let mut h = DMatrix::<C64>::zeros(m + 2, m + 2);
        let mut breakdown = None;
        for j in 0..m {
            let (head, tail) = basis.split_at_mut(j + 1);
            let next = &mut tail[0];
            apply(&head[j], next);
            stats.matvecs += 1;
            for (i, vi) in head.iter().enumerate() {
                let hij = dot(vi, next);
                h[(i, j)] = hij;
                for (x, y) in next.iter_mut().zip(vi) {
                    *x -= hij * y;
                }
            }
            let s = norm(next);
            if s <= 1e-12 * beta.max(1.0) * anorm.max(1.0) * 1e-2 {
                breakdown = Some(j + 1);
                break;
            }
            h[(j + 1, j)] = C64::new(s, 0.0);
            for x in next.iter_mut() {
                *x /= s;
            }
        }
        let (mx, avnorm) = match breakdown {
            Some(k) => {
                t_step = t - t_now;
                (k, 0.0)
            }
            None => {
                h[(m + 1, m)] = C64::new(1.0, 0.0);
                apply(&basis[m], &mut av);
                stats.matvecs += 1;
                (m + 2, norm(&av))
            }
        };

        loop {
            let hs = h.view((0, 0), (mx, mx)).map(|x| x * t_step);
            let f = hs.exp();
            let err_loc = if breakdown.is_some() {
                0.0
            } else {
                let p1 = f[(m, 0)].norm() * beta;
                let p2 = f[(m + 1, 0)].norm() * beta * avnorm;
                if p1 > 10.0 * p2 {
                    p2
                } else if p1 > p2 {
                    p1 * p2 / (p1 - p2)
                } else {
                    p1
                }
            };
            let xm = if breakdown.is_none() && err_loc == 0.0 { 1.0 } else { 1.0 / m as f64 };
            if err_loc <= delta * t_step * tol {
                let cols = breakdown.unwrap_or(m + 1);
                for x in w.iter_mut() {
                    *x = zero;
                }
                for (k, b) in basis.iter().take(cols).enumerate() {
                    let c = f[(k, 0)] * beta;
                    for (x, y) in w.iter_mut().zip(b) {
                        *x += c * y;
                    }
                }
                t_now += t_step;
                stats.steps += 1;
                stats.error += err_loc;
                let grow = if err_loc > 0.0 {
                    gamma * (t_step * tol / err_loc).powf(xm)
                } else {
                    10.0
                };
                t_step = (t_step * grow.min(5.0)).min(t - t_now);
                break;
            }
            stats.rejected += 1;
            if stats.steps + stats.rejected >= opts.max_steps {
                return Err(Error::Krylov("too many rejected steps".into()));
            }
            t_step *= (gamma * (t_step * tol / err_loc).powf(xm)).clamp(0.1, 0.9);
        }
        if t - t_now < 1e-15 * t {
            break;
        }
    }
    Ok((w, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_exponential() {
        let n = 30;
        let a = DMatrix::<C64>::from_fn(n, n, |i, j| {
            let base = if i == j { -(i as f64) * 2.0 } else { 0.0 };
            let off = if (i as i64 - j as i64).abs() == 1 { 1.5 } else { 0.0 };
            C64::new(base + off, 0.1 * ((i * 7 + j * 3) as f64).sin())
        });
        let v: Vec<C64> = (0..n).map(|i| C64::new((i as f64).cos(), 0.0)).collect();
        let t = 0.7;
        let exact = (&a * C64::new(t, 0.0)).exp() * nalgebra::DVector::from_vec(v.clone());
        let apply = |x: &[C64], y: &mut [C64]| {
            let r = &a * nalgebra::DVector::from_column_slice(x);
            y.copy_from_slice(r.as_slice());
        };
        let anorm = a.iter().map(|x| x.norm()).fold(0.0, f64::max) * 3.0;
        let opts = KrylovOptions { dim: 8, ..Default::default() };
        let (w, stats) = expmv(apply, t, &v, anorm, opts).unwrap();
        let err: f64 = w.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err {err:e}");
        assert!(stats.steps > 1);
    }

    #[test]
    fn zero_vector_and_zero_time() {
        let apply = |x: &[C64], y: &mut [C64]| y.copy_from_slice(x);
        let v = vec![C64::new(1.0, 0.0); 4];
        let (w, _) = expmv(apply, 0.0, &v, 1.0, KrylovOptions::default()).unwrap();
        assert_eq!(w, v);
        let (w, _) = expmv(apply, 1.0, &v, 1.0, KrylovOptions::default()).unwrap();
        assert!((w[0] - C64::new(std::f64::consts::E, 0.0)).norm() < 1e-9);
    }
}
