//! Lagrange multipliers for linear velocity constraints.
//!
//! Body equation `M ω̇ = F + Σ_r λ_r α_r`, peripheral equations
//! `D_j Ẇ_j = Σ_{r ∈ j} λ_r b_r`, and differentiated constraints
//! `⟨α_r, ω̇⟩ + b_r · Ẇ_{j(r)} = c_r`. Everything is in bivector coordinates.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::liecore::{adjoint_matrix, SubspaceBasis};
use crate::operators::spd_factor;

/// One scalar constraint.
#[derive(Clone, Debug)]
pub struct ConstraintRow {
    /// Body-frame covector `α_r`.
    pub alpha: DVector<f64>,
    /// Peripheral block index and coefficient vector `b_r`.
    pub peripheral: Option<(usize, DVector<f64>)>,
}

/// Scalar mass and dimension of one peripheral velocity block.
#[derive(Clone, Copy, Debug)]
pub struct PeripheralBlock {
    pub mass: f64,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct MultiplierSolution {
    pub body_accel: DVector<f64>,
    pub peripheral_accel: Vec<DVector<f64>>,
    pub lambda: DVector<f64>,
    /// Body reaction `Σ λ_r α_r`.
    pub reaction: DVector<f64>,
}

/// Solves for accelerations and multipliers. `bias` defaults to zero.
pub fn solve_multipliers(
    mass: &Cholesky<f64, Dyn>,
    force: &DVector<f64>,
    rows: &[ConstraintRow],
    blocks: &[PeripheralBlock],
    bias: Option<&DVector<f64>>,
) -> Result<MultiplierSolution> {
    let nb = force.len();
    let k = rows.len();
    let free = mass.solve(force);
    let mut peripheral_accel: Vec<DVector<f64>> = blocks.iter().map(|b| DVector::zeros(b.dim)).collect();
    if k == 0 {
        return Ok(MultiplierSolution {
            body_accel: free,
            peripheral_accel,
            lambda: DVector::zeros(0),
            reaction: DVector::zeros(nb),
        });
    }
    let mut alphas = DMatrix::zeros(nb, k);
    for (r, row) in rows.iter().enumerate() {
        alphas.set_column(r, &row.alpha);
    }
    let y = mass.solve(&alphas);
    let mut gram = alphas.transpose() * &y;
    for (r, row_r) in rows.iter().enumerate() {
        let Some((jr, br)) = &row_r.peripheral else { continue };
        for (s, row_s) in rows.iter().enumerate() {
            if let Some((js, bs)) = &row_s.peripheral {
                if jr == js {
                    gram[(r, s)] += br.dot(bs) / blocks[*jr].mass;
                }
            }
        }
    }
    let mut rhs = -(alphas.transpose() * &free);
    if let Some(c) = bias {
        rhs += c;
    }
    let gram = (&gram + gram.transpose()) * 0.5;
    let factor = spd_factor(&gram).ok_or(Error::Singular { what: "constraint Gram matrix" })?;
    let lambda = factor.solve(&rhs);
    let body_accel = free + &y * &lambda;
    for (r, row) in rows.iter().enumerate() {
        if let Some((j, b)) = &row.peripheral {
            peripheral_accel[*j] += b * (lambda[r] / blocks[*j].mass);
        }
    }
    let reaction = &alphas * &lambda;
    Ok(MultiplierSolution { body_accel, peripheral_accel, lambda, reaction })
}

/// Body covectors `α_r = Ad_{g⁻¹} a_r` for a space-fixed basis, as columns.
pub fn body_covectors(g: &DMatrix<f64>, basis: &SubspaceBasis) -> DMatrix<f64> {
    adjoint_matrix(g).transpose() * basis.coordinate_matrix()
}

/// Rows `⟨α_r, ω⟩ = 0` with no peripheral coupling.
pub fn pure_rows(alphas: &DMatrix<f64>) -> Vec<ConstraintRow> {
    alphas.column_iter().map(|c| ConstraintRow { alpha: c.into_owned(), peripheral: None }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint_by_hand() {
        // M = diag(1, 2, 4), F = (1, 1, 1), ⟨e_1, ω̇⟩ = 0:
        // λ = -F_1, ω̇ = (0, 1/2, 1/4).
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 4.0]));
        let f = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let rows = [ConstraintRow { alpha: DVector::from_vec(vec![1.0, 0.0, 0.0]), peripheral: None }];
        let sol = solve_multipliers(&Cholesky::new(m).unwrap(), &f, &rows, &[], None).unwrap();
        assert!((sol.lambda[0] + 1.0).abs() < 1e-15);
        assert!((sol.body_accel - DVector::from_vec(vec![0.0, 0.5, 0.25])).amax() < 1e-15);
    }

    #[test]
    fn peripheral_coupling_by_hand() {
        // ω̇_1 + ρ Ẇ = 0 with M = 1, D Ẇ = ρ λ, ω̇_1 = F_1 + λ.
        let (rho, d, f1) = (2.0, 3.0, 1.5);
        let m = DMatrix::identity(3, 3);
        let f = DVector::from_vec(vec![f1, 0.0, 0.0]);
        let rows = [ConstraintRow {
            alpha: DVector::from_vec(vec![1.0, 0.0, 0.0]),
            peripheral: Some((0, DVector::from_vec(vec![rho]))),
        }];
        let blocks = [PeripheralBlock { mass: d, dim: 1 }];
        let sol = solve_multipliers(&Cholesky::new(m).unwrap(), &f, &rows, &blocks, None).unwrap();
        let lambda = -f1 / (1.0 + rho * rho / d);
        assert!((sol.lambda[0] - lambda).abs() < 1e-15);
        assert!((sol.body_accel[0] + rho * sol.peripheral_accel[0][0]).abs() < 1e-15);
    }

    #[test]
    fn dependent_rows_are_singular() {
        let m = DMatrix::identity(3, 3);
        let a = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let rows =
            [ConstraintRow { alpha: a.clone(), peripheral: None }, ConstraintRow { alpha: a * 2.0, peripheral: None }];
        let f = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let err = solve_multipliers(&Cholesky::new(m).unwrap(), &f, &rows, &[], None).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }
}
