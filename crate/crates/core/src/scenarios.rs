//! Seeded random admissible setups for every system kind.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::liecore::{wedge, SubspaceBasis};
use crate::phase::{PhasePoint, System, SystemKind};
use crate::sampling::Sampler;
use crate::systems::multipliers::body_covectors;
use crate::systems::{
    CotangentSystem, CoupledParams, CoupledReducedSystem, CoupledSystem, GsrSystem, LStarSystem, LplusRMode,
    LplusRSystem, LrSystem, NCoupledBody, NCoupledSystem, RubberChaplyginSystem, SupportSystem,
};

pub struct RandomScenario {
    pub system: Box<dyn System>,
    pub x0: PhasePoint,
}

/// Kinds with a random generator.
pub const RANDOM_KINDS: [SystemKind; 12] = [
    SystemKind::Lr,
    SystemKind::Lplusr,
    SystemKind::GeodesicLpr,
    SystemKind::Coupled,
    SystemKind::CoupledReduced,
    SystemKind::Ncoupled,
    SystemKind::Support,
    SystemKind::RubberSupport,
    SystemKind::RubberChaplygin,
    SystemKind::Cotangent,
    SystemKind::LstarGeodesic,
    SystemKind::Gsr,
];

/// Number of `LR` constraints used at dimension `n`.
pub fn lr_constraint_count(n: usize) -> usize {
    if n <= 3 {
        1
    } else {
        2
    }
}

/// Random coupling data: `𝔥₀` and the `𝔥_i` cut from one random orthonormal family.
pub fn random_coupled_params(s: &mut Sampler, n: usize) -> Result<CoupledParams> {
    let dims: &[usize] = if n <= 3 { &[1, 1] } else { &[1, 2, 1] };
    let total: usize = dims.iter().sum();
    let family = s.subspace(n, total);
    let elems = family.elements().to_vec();
    let mut parts = Vec::new();
    let mut off = 0;
    for d in dims {
        parts.push(SubspaceBasis::from_orthonormal(n, elems[off..off + d].to_vec())?);
        off += d;
    }
    let h0 = parts.remove(0);
    let rhos = (0..parts.len()).map(|_| s.uniform(0.6, 1.6)).collect();
    Ok(CoupledParams { inertia: s.spd_inertia(n, 1.0, 3.0), h0, hs: parts, d: s.uniform(0.5, 2.0), rhos })
}

pub fn random_scenario(kind: SystemKind, n: usize, seed: u64) -> Result<RandomScenario> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("random scenarios need n >= 3, got {n}")));
    }
    let mut s = Sampler::new(seed ^ ((n as u64) << 32) ^ (kind as u64).wrapping_mul(0x9E37_79B9));
    let g = s.rotation(n).into_matrix();
    let boxed = |sys: Box<dyn System>, x0: PhasePoint| Ok(RandomScenario { system: sys, x0 });
    match kind {
        SystemKind::Lr => {
            let sys = LrSystem::new(s.spd_inertia(n, 1.0, 3.0), s.subspace(n, lr_constraint_count(n)))?;
            let w = s.skew_orthogonal_to(n, &sys.alphas(&g), 1.0);
            let x0 = sys.state(g, &w);
            boxed(Box::new(sys), x0)
        }
        SystemKind::Lplusr | SystemKind::GeodesicLpr => {
            let mode = if kind == SystemKind::Lplusr { LplusRMode::Nonholonomic } else { LplusRMode::Geodesic };
            let sys = LplusRSystem::new(s.spd_inertia(n, 1.0, 3.0), s.spd_inertia(n, 0.2, 2.0), mode)?;
            let x0 = sys.state(g, &s.skew(n, 1.0));
            boxed(Box::new(sys), x0)
        }
        SystemKind::Coupled | SystemKind::CoupledReduced => {
            let params = random_coupled_params(&mut s, n)?;
            let w = s.skew_orthogonal_to(n, &body_covectors(&g, &params.h0), 1.0);
            if kind == SystemKind::Coupled {
                let sys = CoupledSystem::new(params)?;
                let big_w = sys.consistent_w(&g, &w, &s.skew(n, 0.5));
                let x0 = sys.state(g, &w, &big_w);
                boxed(Box::new(sys), x0)
            } else {
                let sys = CoupledReducedSystem::new(params)?;
                let x0 = sys.state(g, &w);
                boxed(Box::new(sys), x0)
            }
        }
        SystemKind::Ncoupled => {
            let gamma = s.unit_vector(n);
            let bodies = vec![
                NCoupledBody::commutator(&s.skew(n, 1.0), s.uniform(0.6, 1.6), s.uniform(0.5, 2.0)),
                NCoupledBody::rubber(&gamma, s.uniform(0.6, 1.6), s.uniform(0.5, 2.0)),
            ];
            let sys = NCoupledSystem::new(s.spd_inertia(n, 1.0, 3.0), bodies)?;
            let x0 = sys.consistent_state(g, &s.skew(n, 1.0))?;
            boxed(Box::new(sys), x0)
        }
        SystemKind::Support | SystemKind::RubberSupport => {
            let count = 2;
            let contacts = (0..count).map(|_| s.unit_vector(n)).collect();
            let d = s.positive(count, 0.5, 2.0);
            let rho = s.positive(count, 0.5, 1.5);
            let sys =
                SupportSystem::new(s.spd_inertia(n, 1.0, 3.0), contacts, d, rho, kind == SystemKind::RubberSupport)?;
            let x0 = sys.state(g, &s.skew(n, 1.0));
            boxed(Box::new(sys), x0)
        }
        SystemKind::RubberChaplygin => {
            let sys = RubberChaplyginSystem::new(s.spd_inertia(n, 1.0, 3.0), s.uniform(0.5, 2.0), s.uniform(0.5, 1.5))?;
            let gamma = sys.gamma(&g);
            let w = wedge(&gamma, &s.tangent(&gamma, 1.0))?;
            let x0 = sys.state(g, &w);
            boxed(Box::new(sys), x0)
        }
        SystemKind::Cotangent => {
            let sys = CotangentSystem::new(s.spd_inertia(n, 1.0, 3.0), s.uniform(0.5, 2.0), s.uniform(0.5, 1.5))?;
            let gamma = s.unit_vector(n).into_vector();
            let xi = s.tangent(&gamma, 1.0);
            let p = sys.momentum_of_velocity(&gamma, &xi)?;
            let x0 = sys.state(&gamma, &p);
            boxed(Box::new(sys), x0)
        }
        SystemKind::LstarGeodesic => {
            let sys = LStarSystem::new(&s.positive(n, 0.5, 2.0))?;
            let gamma = s.unit_vector(n).into_vector();
            let v = s.tangent(&gamma, 1.0);
            let x0 = sys.state(&gamma, &v);
            boxed(Box::new(sys), x0)
        }
        SystemKind::Gsr => {
            let sys = GsrSystem::new(s.spd_inertia(n, 1.0, 3.0), s.uniform(0.5, 2.0), s.uniform(0.5, 1.5))?;
            let x0 = sys.state(&s.skew(n, 1.0), &s.skew(n, 1.0));
            boxed(Box::new(sys), x0)
        }
        SystemKind::ClassicalRubber | SystemKind::ClassicalChaplygin => {
            Err(Error::InvalidParameter(format!("no random generator for {kind}")))
        }
    }
}

/// Special inertia `I(E_ij) = (A_iA_j - mρ²)E_ij` with `A` positive and `mρ² < min A_iA_j`.
pub fn random_special(s: &mut Sampler, n: usize) -> (Vec<f64>, f64, f64) {
    let a = s.positive(n, 0.8, 2.0);
    let min_pair = a.iter().fold(f64::INFINITY, |m, x| m.min(*x)).powi(2);
    let m = s.uniform(0.5, 1.5);
    let rho = (s.uniform(0.2, 0.8) * min_pair / m).sqrt();
    (a, m, rho)
}

/// A random admissible `(γ, p)` for the cotangent system.
pub fn random_cotangent_state(s: &mut Sampler, sys: &CotangentSystem, speed: f64) -> Result<PhasePoint> {
    let gamma: DVector<f64> = s.unit_vector(sys.n()).into_vector();
    let xi = s.tangent(&gamma, speed);
    Ok(sys.state(&gamma, &sys.momentum_of_velocity(&gamma, &xi)?))
}
