//! Seeded random data for tests, sweeps and the CLI.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::liecore::{bivector_dim, Rotation, SkewMatrix, SubspaceBasis, UnitVector};
use crate::operators::InertiaOperator;

/// Deterministic sampler over a ChaCha8 stream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn normal_vector(&mut self, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |_, _| self.normal())
    }

    pub fn unit_vector(&mut self, n: usize) -> UnitVector {
        loop {
            let v = self.normal_vector(n);
            if v.norm() > 1e-3 {
                return UnitVector::normalized(v).expect("nonzero");
            }
        }
    }

    pub fn skew(&mut self, n: usize, scale: f64) -> SkewMatrix {
        let c = self.normal_vector(bivector_dim(n)) * scale;
        SkewMatrix::from_coord_vector(n, &c).expect("bivector length")
    }

    /// Haar-distributed rotation via QR of a Gaussian matrix.
    pub fn rotation(&mut self, n: usize) -> Rotation {
        let m = DMatrix::from_fn(n, n, |_, _| self.normal());
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        let mut q = q;
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        Rotation::project(&q).expect("orthogonal by construction")
    }

    /// Positive diagonal in `[lo, hi]`.
    pub fn positive(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }

    /// Dense SPD operator with eigenvalues in `[lo, hi]`.
    pub fn spd_inertia(&mut self, n: usize, lo: f64, hi: f64) -> InertiaOperator {
        let nb = bivector_dim(n);
        let m = DMatrix::from_fn(nb, nb, |_, _| self.normal());
        let q = m.qr().q();
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.positive(nb, lo, hi)));
        let s = &q * d * q.transpose();
        let s = (&s + s.transpose()) * 0.5;
        InertiaOperator::dense(n, s).expect("SPD by construction")
    }

    /// Rigid-body inertia `I(E_ij) = (a_i + a_j) E_ij` with `a_i ∈ [lo, hi]`.
    pub fn rigid_body_inertia(&mut self, n: usize, lo: f64, hi: f64) -> InertiaOperator {
        let a = self.positive(n, lo, hi);
        let d: Vec<f64> = crate::liecore::bivector_pairs(n).map(|(i, j)| a[i] + a[j]).collect();
        InertiaOperator::diagonal(n, &d).expect("positive")
    }

    /// Random `k`-dimensional subspace of so(n).
    pub fn subspace(&mut self, n: usize, k: usize) -> SubspaceBasis {
        let gens: Vec<SkewMatrix> = (0..k).map(|_| self.skew(n, 1.0)).collect();
        let report = SubspaceBasis::orthonormal_basis_of(n, &gens).expect("dimensions agree");
        report.basis
    }

    /// `ω` orthogonal to the given body-frame covectors (columns).
    pub fn skew_orthogonal_to(&mut self, n: usize, alphas: &DMatrix<f64>, scale: f64) -> SkewMatrix {
        let w = self.normal_vector(bivector_dim(n)) * scale;
        let w = if alphas.ncols() == 0 {
            w
        } else {
            let gram = alphas.transpose() * alphas;
            let coef = gram.lu().solve(&(alphas.transpose() * &w)).expect("independent covectors");
            w - alphas * coef
        };
        SkewMatrix::from_coord_vector(n, &w).expect("bivector length")
    }

    /// Tangent vector at unit `γ`.
    pub fn tangent(&mut self, gamma: &DVector<f64>, scale: f64) -> DVector<f64> {
        let v = self.normal_vector(gamma.len()) * scale;
        &v - gamma * gamma.dot(&v)
    }
}
