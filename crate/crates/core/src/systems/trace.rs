//! Polynomial coefficients of `tr(L(μ)^k)` for `L(μ) = L₀ + Σ μ_i X_i`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

/// Map from exponent vectors `(e_1, …, e_N)` to the coefficient of `Π μ_i^{e_i}`.
pub type TraceCoefficients = BTreeMap<Vec<usize>, f64>;

/// Expands `tr((L₀ + Σ μ_i X_i)^k)` by summing over all `(N+1)^k` words.
pub fn trace_power_coefficients(l0: &DMatrix<f64>, xs: &[DMatrix<f64>], k: usize) -> TraceCoefficients {
    let letters: Vec<&DMatrix<f64>> = std::iter::once(l0).chain(xs.iter()).collect();
    let base = letters.len();
    let n = l0.nrows();
    let mut out = TraceCoefficients::new();
    if k == 0 {
        out.insert(vec![0; xs.len()], n as f64);
        return out;
    }
    let total = base.pow(k as u32);
    let mut word = vec![0usize; k];
    for idx in 0..total {
        let mut rem = idx;
        for w in word.iter_mut() {
            *w = rem % base;
            rem /= base;
        }
        let mut prod = letters[word[0]].clone();
        for &w in &word[1..] {
            prod *= letters[w];
        }
        let mut exps = vec![0usize; xs.len()];
        for &w in &word {
            if w > 0 {
                exps[w - 1] += 1;
            }
        }
        *out.entry(exps).or_insert(0.0) += prod.trace();
    }
    out
}

/// Evaluates the expansion at a given `μ`.
pub fn evaluate(coeffs: &TraceCoefficients, mu: &[f64]) -> f64 {
    coeffs.iter().map(|(exps, c)| c * exps.iter().zip(mu).map(|(e, m)| m.powi(*e as i32)).product::<f64>()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_matches_direct_power() {
        let l0 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -0.5, -1.0, 0.0, 0.3, 0.5, -0.3, 0.0]);
        let x1 = DMatrix::from_row_slice(3, 3, &[0.36, 0.48, 0.0, 0.48, 0.64, 0.0, 0.0, 0.0, 0.0]);
        let x2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 0.5]);
        for k in 1..=4 {
            let coeffs = trace_power_coefficients(&l0, &[x1.clone(), x2.clone()], k);
            let mu = [0.7, -1.3];
            let l = &l0 + &x1 * mu[0] + &x2 * mu[1];
            let mut p = DMatrix::identity(3, 3);
            for _ in 0..k {
                p *= &l;
            }
            assert!((evaluate(&coeffs, &mu) - p.trace()).abs() < 1e-12, "k = {k}");
        }
    }
}
