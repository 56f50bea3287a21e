//! Small quadrature and summation helpers shared by the solvers.

use crate::{Error, Result};

/// Composite Simpson rule for samples on a uniform grid with spacing `h`.
///
/// `values.len()` must be odd and at least 3.
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    check_odd(values.len())?;
    let n = values.len();
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[n - 1]))
}

/// Running integral `∫_0^{t_k} f` at every grid index.
///
/// Even indices are exact Simpson prefixes. An odd index adds the partial
/// panel `[t_{k-1}, t_k]` integrated against the quadratic through
/// `k-1, k, k+1`, so the whole curve keeps fourth-order accuracy.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Result<Vec<f64>> {
    check_odd(values.len())?;
    let n = values.len();
    let mut out = vec![0.0; n];
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            out[k - 2] + h / 3.0 * (values[k - 2] + 4.0 * values[k - 1] + values[k])
        } else {
            out[k - 1] + h / 12.0 * (5.0 * values[k - 1] + 8.0 * values[k] - values[k + 1])
        };
    }
    Ok(out)
}

/// `S_k = ∫_0^{t_k} exp(2 (I(t_k) - I(s))) ds` for a running integral `I`
/// sampled on the grid.
///
/// Algebraically this is `e^{2 I_k}` times the cumulative Simpson integral
/// of `e^{-2 I}`, but every exponential that appears has argument
/// `2 (I_k - I_j)` over at most two steps, so nothing overflows when `I`
/// is large in magnitude.
pub fn cumulative_discounted(running: &[f64], h: f64) -> Result<Vec<f64>> {
    check_odd(running.len())?;
    let n = running.len();
    let g = |k: usize, j: usize| (2.0 * (running[k] - running[j])).exp();
    let mut out = vec![0.0; n];
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            let carry = g(k, k - 2);
            carry * out[k - 2] + h / 3.0 * (carry + 4.0 * g(k, k - 1) + 1.0)
        } else {
            let carry = g(k, k - 1);
            carry * out[k - 1] + h / 12.0 * (5.0 * carry + 8.0 - g(k, k + 1))
        };
    }
    Ok(out)
}

/// Pairwise (tree) summation in index order. The result depends only on
/// the slice contents, never on how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

fn check_odd(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::BadGrid(format!(
            "need an odd number of points >= 3, got {n}"
        )));
    }
    Ok(())
}
