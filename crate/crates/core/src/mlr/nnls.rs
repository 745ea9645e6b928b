//! Lawson–Hanson active-set non-negative least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance, relative to `‖A‖_F ‖b‖`, of the dual feasibility test.
pub const NNLS_DUAL_TOLERANCE: f64 = 1e-10;

/// Least squares restricted to the columns flagged in `passive`.
/// Returns `None` when those columns are numerically dependent.
fn restricted_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool], col_norm_max: f64) -> Option<DVector<f64>> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let m = a.nrows();
    let p = cols.len();
    let mut x = DVector::zeros(passive.len());
    if p == 0 {
        return Some(x);
    }
    if p > m {
        return None;
    }
    let sub = DMatrix::from_fn(m, p, |i, j| a[(i, cols[j])]);
    let qr = sub.qr();
    let r = qr.r();
    let threshold = 1e-11 * col_norm_max.max(f64::MIN_POSITIVE);
    if (0..p).any(|k| r[(k, k)].abs() <= threshold) {
        return None;
    }
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    let z = r.solve_upper_triangular(&qtb.rows(0, p).into_owned())?;
    for (k, &j) in cols.iter().enumerate() {
        x[j] = z[k];
    }
    Some(x)
}

/// Solves `min ‖A x − b‖²` subject to `x ≥ 0`.
///
/// Outer iterations (variables entering the passive set) are capped at
/// `3·F`; exceeding the cap is reported as a numerical failure.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Shape {
            what: "nnls response length",
            got: b.len(),
            expected: m,
        });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite input to nnls".into()));
    }
    let mut x = DVector::zeros(n);
    if n == 0 || m == 0 {
        return Ok(x);
    }
    let col_norm_max = (0..n).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    let tol = NNLS_DUAL_TOLERANCE * (a.norm() * b.norm()).max(f64::MIN_POSITIVE);
    let max_iter = 3 * n;

    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let mut iterations = 0;
    loop {
        let w = a.tr_mul(&(b - a * &x));
        let mut entering = None;
        for j in 0..n {
            if !passive[j] && !blocked[j] && w[j] > tol && entering.is_none_or(|t: usize| w[j] > w[t]) {
                entering = Some(j);
            }
        }
        let Some(t) = entering else { break };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::Numerical(format!("nnls exceeded {max_iter} iterations")));
        }

        passive[t] = true;
        let mut z = match restricted_lstsq(a, b, &passive, col_norm_max) {
            Some(z) if z[t] > 0.0 => z,
            _ => {
                passive[t] = false;
                blocked[t] = true;
                continue;
            }
        };
        blocked.iter_mut().for_each(|f| *f = false);

        loop {
            if (0..n).all(|j| !passive[j] || z[j] > 0.0) {
                x = z;
                break;
            }
            // Step from x toward z until the first passive variable hits zero.
            let mut alpha = f64::INFINITY;
            let mut leaving = 0;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    let gap = x[j] - z[j];
                    let ratio = if gap > 0.0 { x[j] / gap } else { 0.0 };
                    if ratio < alpha {
                        alpha = ratio;
                        leaving = j;
                    }
                }
            }
            x += (&z - &x) * alpha;
            passive[leaving] = false;
            x[leaving] = 0.0;
            for j in 0..n {
                if passive[j] && x[j] <= 0.0 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            z = restricted_lstsq(a, b, &passive, col_norm_max)
                .ok_or_else(|| Error::Numerical("nnls passive set became rank deficient".into()))?;
        }
    }
    Ok(x)
}
