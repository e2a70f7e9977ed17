use super::CharacterizeError;
use crate::scalar::{CompensatedSum, Scalar};

/// Ordinary least-squares solution with parameter standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T, const N: usize> {
    pub coefficients: [T; N],
    /// √diag(σ̂²·(XᵀX)⁻¹); zero when there are no spare degrees of freedom.
    pub standard_errors: [T; N],
    /// `y − Xβ` in input order.
    pub residuals: Vec<T>,
}

/// Solves `min ‖Xβ − y‖²` through the normal equations.
///
/// Columns are scaled to unit max-magnitude before the products are formed and
/// every sum is compensated, so the result does not depend on row order beyond
/// the last few ulps.
pub fn least_squares<T: Scalar, const N: usize>(
    rows: &[([T; N], T)],
) -> Result<LeastSquares<T, N>, CharacterizeError> {
    if rows.len() < N {
        return Err(CharacterizeError::RankDeficient);
    }
    let mut scale = [T::zero(); N];
    for (x, _) in rows {
        for j in 0..N {
            scale[j] = scale[j].max(x[j].abs());
        }
    }
    if scale.iter().any(|s| !(*s > T::zero()) || !s.is_finite()) {
        return Err(CharacterizeError::RankDeficient);
    }

    let mut ata = [[CompensatedSum::<T>::new(); N]; N];
    let mut aty = [CompensatedSum::<T>::new(); N];
    for (x, y) in rows {
        let xs: [T; N] = std::array::from_fn(|j| x[j] / scale[j]);
        for i in 0..N {
            aty[i].add(xs[i] * *y);
            for j in i..N {
                ata[i][j].add(xs[i] * xs[j]);
            }
        }
    }
    let mut gram = [[T::zero(); N]; N];
    for i in 0..N {
        for j in i..N {
            gram[i][j] = ata[i][j].total();
            gram[j][i] = gram[i][j];
        }
    }
    let rhs: [T; N] = std::array::from_fn(|i| aty[i].total());

    let scaled = solve(gram, rhs)?;
    let coefficients: [T; N] = std::array::from_fn(|j| scaled[j] / scale[j]);

    let residuals: Vec<T> = rows
        .iter()
        .map(|(x, y)| {
            let mut fit = CompensatedSum::new();
            for j in 0..N {
                fit.add(x[j] * coefficients[j]);
            }
            *y - fit.total()
        })
        .collect();

    let dof = rows.len() - N;
    let mut standard_errors = [T::zero(); N];
    if dof > 0 {
        let rss = crate::scalar::compensated_sum(residuals.iter().map(|r| *r * *r));
        let s2 = rss / T::from_usize_lossy(dof);
        for j in 0..N {
            let mut e = [T::zero(); N];
            e[j] = T::one();
            let col = solve(gram, e)?;
            standard_errors[j] = (s2 * col[j]).max(T::zero()).sqrt() / scale[j];
        }
    }

    Ok(LeastSquares {
        coefficients,
        standard_errors,
        residuals,
    })
}

/// Gaussian elimination with partial pivoting on a symmetric positive
/// semi-definite system; tiny pivots signal rank deficiency.
fn solve<T: Scalar, const N: usize>(mut a: [[T; N]; N], mut b: [T; N]) -> Result<[T; N], CharacterizeError> {
    let trace_max = (0..N).fold(T::zero(), |m, i| m.max(a[i][i].abs()));
    let tol = trace_max * T::epsilon() * T::lit(1e3) * T::from_usize_lossy(N);
    for k in 0..N {
        let p = (k..N)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(k);
        if !(a[p][k].abs() > tol) {
            return Err(CharacterizeError::RankDeficient);
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
            let v = b[k];
            b[i] -= f * v;
        }
    }
    let mut x = [T::zero(); N];
    for k in (0..N).rev() {
        let mut acc = b[k];
        for j in k + 1..N {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Ok(x)
}
