use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ridge added to the normal equations (intercept excluded) so collinear
/// probability columns still give a unique solution.
pub const OLS_RIDGE: f64 = 1e-10;

/// Least squares via regularized normal equations. With `intercept`, the
/// returned vector is `[α_0, α_1, ..., α_F]`.
pub fn ols(a: &DMatrix<f64>, b: &DVector<f64>, intercept: bool) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Shape {
            what: "ols response length",
            got: b.len(),
            expected: m,
        });
    }
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite input to ols".into()));
    }
    let offset = usize::from(intercept);
    let design = if intercept {
        DMatrix::from_fn(m, n + 1, |i, j| if j == 0 { 1.0 } else { a[(i, j - 1)] })
    } else {
        a.clone()
    };
    let mut gram = design.tr_mul(&design);
    for j in offset..n + offset {
        gram[(j, j)] += OLS_RIDGE;
    }
    let rhs = design.tr_mul(b);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("normal equations are not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}
