//! Matrix exponential by scaling and squaring with a fixed [6/6] Padé approximant.

use nalgebra::DMatrix;

const PADE_DEGREE: usize = 6;

fn pade_coefficients() -> [f64; PADE_DEGREE + 1] {
    // c_k = (2q-k)! q! / ((2q)! k! (q-k)!)
    let q = PADE_DEGREE;
    let mut c = [0.0; PADE_DEGREE + 1];
    c[0] = 1.0;
    for k in 1..=q {
        c[k] = c[k - 1] * (q - k + 1) as f64 / (k * (2 * q - k + 1)) as f64;
    }
    c
}

/// `exp(a)` for a square matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * 0.5f64.powi(squarings);

    let c = pade_coefficients();
    let id = DMatrix::<f64>::identity(n, n);
    let mut num = &id * c[0];
    let mut den = &id * c[0];
    let mut power = id.clone();
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        let term = &power * *ck;
        num += &term;
        if k % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut result = den.lu().solve(&num).expect("Padé denominator is nonsingular for ‖A‖ ≤ 1/2");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
