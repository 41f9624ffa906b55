//! Channel distances and the analytic distance bounds they are checked against.
//!
//! `induced_trace_distance` maximizes `||(Φ - Ψ)(|v><v|)||_1` over unit
//! vectors by alternating ascent from many random starts, so it is a lower bound
//! on the true value. `diamond_distance` solves the semidefinite program on the
//! Choi matrix of the difference and is certified by the duality gap.

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity;
use crate::channels::{self, Channel, SncInstance};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::lr::LrParams;
use crate::network::SpinNetwork;
use crate::random;
use crate::sdp;

pub const DEFAULT_RESTARTS: usize = 64;
/// Slack applied to every inequality check.
pub const BOUND_SLACK: f64 = 1e-6;
/// Largest Choi dimension `d_in * d_out` accepted by the diamond SDP.
pub const MAX_DIAMOND_CHOI_DIM: usize = 64;
const ASCENT_MAX_STEPS: usize = 500;
const ASCENT_TOL: f64 = 1e-13;

fn check_same_dims(phi: &Channel, psi: &Channel) -> Result<()> {
    if phi.input_dim() != psi.input_dim() || phi.output_dim() != psi.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channels {} -> {} and {} -> {}",
            phi.input_dim(),
            phi.output_dim(),
            psi.input_dim(),
            psi.output_dim()
        )));
    }
    Ok(())
}

/// Sign of a Hermitian matrix, `P_+ - P_-`, and its trace norm.
fn sign_and_norm(d: &CMat) -> (CMat, f64) {
    let (vals, vecs) = linalg::eigh(d);
    let n = d.nrows();
    let mut s = CMat::zeros(n, n);
    let mut norm = 0.0;
    for (k, &lambda) in vals.iter().enumerate() {
        norm += lambda.abs();
        if lambda != 0.0 {
            let v = vecs.column(k);
            s += (v * v.adjoint()) * c(lambda.signum(), 0.0);
        }
    }
    (s, norm)
}

/// Local maximum of `||Δ(|v><v|)||_1` from a start vector.
fn ascend(phi: &Channel, psi: &Channel, mut v: CVec) -> f64 {
    let mut best = 0.0f64;
    for _ in 0..ASCENT_MAX_STEPS {
        let rho = linalg::outer(&v);
        let delta = phi.apply(&rho) - psi.apply(&rho);
        let (sign, value) = sign_and_norm(&delta);
        if value <= best + ASCENT_TOL {
            best = best.max(value);
            break;
        }
        best = value;
        let pulled = phi.apply_adjoint(&sign) - psi.apply_adjoint(&sign);
        let (_, vecs) = linalg::eigh(&pulled);
        v = vecs.column(vecs.ncols() - 1).into_owned();
    }
    best
}

/// Best value of `max_v ||(Φ - Ψ)(|v><v|)||_1` over `restarts` random starts,
/// run in parallel on independent streams of `seed`.
pub fn induced_trace_distance(phi: &Channel, psi: &Channel, restarts: usize, seed: u64) -> Result<f64> {
    check_same_dims(phi, psi)?;
    let d = phi.input_dim();
    let mut starts: Vec<CVec> = (0..d)
        .map(|i| {
            let mut e = CVec::zeros(d);
            e[i] = linalg::ONE;
            e
        })
        .collect();
    starts.extend((0..restarts.max(1)).map(|k| random::random_pure_state(d, &mut random::rng_stream(seed, k as u64))));
    Ok(starts.into_par_iter().map(|v| ascend(phi, psi, v)).reduce(|| 0.0, f64::max))
}

/// Diamond distance together with the duality gap of the underlying program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiamondValue {
    pub value: f64,
    pub gap: f64,
}

/// `||Φ - Ψ||_◇` normalized so that perfectly distinguishable channels give 2.
pub fn diamond_distance_with_gap(phi: &Channel, psi: &Channel) -> Result<DiamondValue> {
    check_same_dims(phi, psi)?;
    let (d_in, d_out) = (phi.input_dim(), phi.output_dim());
    if d_in * d_out > MAX_DIAMOND_CHOI_DIM {
        return Err(Error::TooLarge(format!(
            "diamond-norm check needs Choi dimension <= {MAX_DIAMOND_CHOI_DIM}, got {}",
            d_in * d_out
        )));
    }
    let j = phi.choi() - psi.choi();
    let program = sdp::build_diamond_program(&j, d_in, d_out)?;
    let sol = sdp::solve(&program, sdp::DEFAULT_TOL)?;
    Ok(DiamondValue { value: 2.0 * sol.primal_value, gap: 2.0 * sol.gap })
}

pub fn diamond_distance(phi: &Channel, psi: &Channel) -> Result<f64> {
    Ok(diamond_distance_with_gap(phi, psi)?.value)
}

/// `||(Φ ⊗ id - Ψ ⊗ id)(|ψ><ψ|)||_1` for a vector on input ⊗ ancilla.
pub fn entangled_input_distance(phi: &Channel, psi: &Channel, input: &CVec) -> Result<f64> {
    check_same_dims(phi, psi)?;
    let d = phi.input_dim();
    if input.len() != d * d {
        return Err(Error::DimensionMismatch(format!("input of length {} for a {d}-dimensional channel", input.len())));
    }
    let rho = linalg::outer(input);
    let lift = |ch: &Channel| {
        let mut out = CMat::zeros(ch.output_dim() * d, ch.output_dim() * d);
        for k in ch.kraus() {
            let kk = linalg::kron(k, &linalg::identity(d));
            out += &kk * &rho * kk.adjoint();
        }
        out
    };
    Ok(linalg::nuclear_norm(&(lift(phi) - lift(psi))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub induced: f64,
    pub diamond: f64,
    /// `induced <= diamond`
    pub lower_ok: bool,
    /// `diamond <= 2 m_q induced`
    pub upper_ok: bool,
    /// `diamond <= 2`
    pub ceiling_ok: bool,
}

impl SandwichCheck {
    pub fn all(&self) -> bool {
        self.lower_ok && self.upper_ok && self.ceiling_ok
    }
}

/// Checks `induced <= diamond <= 2 m_q induced` and the ceiling `diamond <= 2`.
pub fn sandwich_check(phi: &Channel, psi: &Channel, m_q: usize, restarts: usize, seed: u64) -> Result<SandwichCheck> {
    let induced = induced_trace_distance(phi, psi, restarts, seed)?;
    let diamond = diamond_distance(phi, psi)?;
    Ok(SandwichCheck {
        induced,
        diamond,
        lower_ok: induced <= diamond + BOUND_SLACK,
        upper_ok: diamond <= 2.0 * m_q as f64 * induced + BOUND_SLACK,
        ceiling_ok: diamond <= 2.0 + BOUND_SLACK,
    })
}

/// `M_A^2 eps`.
pub fn trace_bound_from_epsilon(m_a: usize, epsilon: f64) -> f64 {
    (m_a * m_a) as f64 * epsilon
}

/// `M eps` with `M = 2 min{M_A^4, M_A^3 M_B M_C}`.
pub fn diamond_bound_from_epsilon(m_a: usize, m_b: usize, m_c: usize, epsilon: f64) -> f64 {
    capacity::m_factor(m_a as u64, m_b as u64, m_c as u64) as f64 * epsilon
}

/// `2 M_A^3 eps`.
pub fn swap_diamond_bound_from_epsilon(m_a: usize, epsilon: f64) -> f64 {
    2.0 * (m_a * m_a * m_a) as f64 * epsilon
}

pub fn trace_bound_rhs(net: &SpinNetwork, lr: &LrParams, t: f64) -> Result<f64> {
    Ok(trace_bound_from_epsilon(net.m_a(), lr.epsilon_for(net, t)?))
}

pub fn diamond_bound_rhs(net: &SpinNetwork, lr: &LrParams, t: f64) -> Result<f64> {
    Ok(diamond_bound_from_epsilon(net.m_a(), net.m_b(), net.m_c(), lr.epsilon_for(net, t)?))
}

pub fn swap_diamond_bound_rhs(net: &SpinNetwork, lr: &LrParams, t: f64) -> Result<f64> {
    Ok(swap_diamond_bound_from_epsilon(net.m_a(), lr.epsilon_for(net, t)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    pub induced_lower: f64,
    pub diamond: f64,
    pub diamond_gap: f64,
    pub analytic_rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Multiplies the envelope before it enters the bounds; 1 in normal use.
    pub epsilon_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, seed: 0, epsilon_scale: 1.0 }
    }
}

/// Measured and analytic sides of both distance bounds at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyReport {
    pub epsilon: f64,
    /// `Φ` vs `Φ_DP^(0)` against `M_A^2 eps`; judged on the induced distance.
    pub trace: DistanceReport,
    /// `Φ` vs `Φ_DP^(1)` against `M eps`; judged on the diamond distance.
    pub diamond: DistanceReport,
}

/// Evaluates both distance bounds for `inst` at its own time.
pub fn verify_bounds(inst: &SncInstance, lr: &LrParams, opts: &VerifyOptions) -> Result<VerifyReport> {
    let net = inst.net();
    let t = inst.time();
    let epsilon = lr.epsilon_for(net, t)? * opts.epsilon_scale;
    let m_q = inst.memory_dim();

    let phi = channels::snc_channel(inst)?;
    let phi0 = channels::depolarizing_phi0(net, t, m_q)?;
    let phi1 = channels::depolarizing_phi1(net, t, m_q)?;

    let trace_rhs = trace_bound_from_epsilon(net.m_a(), epsilon);
    let induced0 = induced_trace_distance(&phi, &phi0, opts.restarts, opts.seed)?;
    let dia0 = diamond_distance_with_gap(&phi, &phi0)?;
    let trace = DistanceReport {
        induced_lower: induced0,
        diamond: dia0.value,
        diamond_gap: dia0.gap,
        analytic_rhs: trace_rhs,
        satisfied: induced0 <= trace_rhs + BOUND_SLACK,
    };

    let diamond_rhs = diamond_bound_from_epsilon(net.m_a(), net.m_b(), net.m_c(), epsilon);
    let induced1 = induced_trace_distance(&phi, &phi1, opts.restarts, opts.seed)?;
    let dia1 = diamond_distance_with_gap(&phi, &phi1)?;
    let diamond = DistanceReport {
        induced_lower: induced1,
        diamond: dia1.value,
        diamond_gap: dia1.gap,
        analytic_rhs: diamond_rhs,
        satisfied: dia1.value <= diamond_rhs + BOUND_SLACK,
    };
    Ok(VerifyReport { epsilon, trace, diamond })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{swap_encoding, Encoding};
    use crate::linalg::{identity, kron, matrix_unit, pauli_x, pauli_y, pauli_z};
    use crate::network::{Graph, HamiltonianTerm, Partition, Region};

    fn constant(d_in: usize, sigma: &CMat) -> Channel {
        Channel::constant(d_in, sigma).unwrap()
    }

    #[test]
    fn identical_channels_are_at_zero() {
        let mut r = random::rng(1);
        let ch = random::random_channel(2, 2, 3, &mut r);
        assert!(induced_trace_distance(&ch, &ch, 8, 0).unwrap() < 1e-12);
        let dia = diamond_distance_with_gap(&ch, &ch).unwrap();
        assert!(dia.value.abs() < 1e-6 && dia.gap <= 1e-6);
    }

    #[test]
    fn orthogonal_constants_are_at_two() {
        let a = constant(2, &matrix_unit(2, 0, 0));
        let b = constant(2, &matrix_unit(2, 1, 1));
        assert!((induced_trace_distance(&a, &b, 8, 0).unwrap() - 2.0).abs() < 1e-12);
        assert!((diamond_distance(&a, &b).unwrap() - 2.0).abs() < 1e-6);
        let s = sandwich_check(&a, &b, 2, 8, 0).unwrap();
        assert!(s.all());
    }

    #[test]
    fn identity_versus_fully_mixing() {
        let id = Channel::identity(2);
        let mix = constant(2, &(identity(2) * c(0.5, 0.0)));
        // pure input |0>: |0><0| - I/2 has eigenvalues ±1/2
        assert!((induced_trace_distance(&id, &mix, 16, 3).unwrap() - 1.0).abs() < 1e-9);
        // maximally entangled input: Omega/2 - I/4 has eigenvalues 3/4, -1/4 x3
        assert!((diamond_distance(&id, &mix).unwrap() - 1.5).abs() < 1e-5);
        let mut phi = CVec::zeros(4);
        phi[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        phi[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!((entangled_input_distance(&id, &mix, &phi).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn diamond_dominates_entangled_inputs() {
        let mut r = random::rng(2);
        for _ in 0..5 {
            let a = random::random_channel(2, 2, 2, &mut r);
            let b = random::random_channel(2, 2, 2, &mut r);
            let dia = diamond_distance(&a, &b).unwrap();
            for _ in 0..50 {
                let v = random::random_pure_state(4, &mut r);
                assert!(entangled_input_distance(&a, &b, &v).unwrap() <= dia + 1e-6);
            }
        }
    }

    #[test]
    fn random_sandwich() {
        let mut r = random::rng(3);
        for d in [2, 3] {
            for _ in 0..4 {
                let a = random::random_channel(d, 2, 2, &mut r);
                let b = random::random_channel(d, 2, 3, &mut r);
                let s = sandwich_check(&a, &b, d, 16, 5).unwrap();
                assert!(s.all(), "{s:?}");
            }
        }
    }

    #[test]
    fn dimension_errors() {
        assert!(induced_trace_distance(&Channel::identity(2), &Channel::identity(3), 1, 0).is_err());
        let big = Channel::identity(9);
        assert!(matches!(diamond_distance(&big, &big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn analytic_sides() {
        assert!((trace_bound_from_epsilon(2, 0.1) - 0.4).abs() < 1e-15);
        assert_eq!(trace_bound_from_epsilon(2, 0.2), 2.0 * trace_bound_from_epsilon(2, 0.1));
        assert_eq!(diamond_bound_from_epsilon(2, 2, 2, 1.0), 32.0);
        assert_eq!(diamond_bound_from_epsilon(2, 4, 4, 1.0), 32.0);
        assert!((swap_diamond_bound_from_epsilon(2, 0.1) - 1.6).abs() < 1e-15);
        assert_eq!(swap_diamond_bound_from_epsilon(4, 1.0), 8.0 * swap_diamond_bound_from_epsilon(2, 1.0));
    }

    fn heisenberg_chain3(tau: CMat) -> SpinNetwork {
        let bond = kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y()) + kron(&pauli_z(), &pauli_z());
        let g = Graph::path(3).unwrap();
        let p = Partition::new(
            &g,
            Region::new(vec![0]).unwrap(),
            Region::new(vec![2]).unwrap(),
            Region::new(vec![1]).unwrap(),
        )
        .unwrap();
        let terms = vec![
            HamiltonianTerm::new(Region::new(vec![0, 1]).unwrap(), bond.clone()).unwrap(),
            HamiltonianTerm::new(Region::new(vec![1, 2]).unwrap(), bond).unwrap(),
        ];
        SpinNetwork::new(g, vec![2, 2, 2], terms, p, tau).unwrap()
    }

    #[test]
    fn verify_degenerate_cases() {
        let mut r = random::rng(4);
        let tau = kron(&random::random_density(2, &mut r), &random::random_density(4, &mut r));
        let net = heisenberg_chain3(tau);
        let lr = LrParams::finite_range(crate::lr::heuristic_zeta(&net).unwrap(), 1).unwrap();
        let opts = VerifyOptions { restarts: 8, ..Default::default() };

        let ident = SncInstance::new(net.clone(), Encoding::identity(2, 2), 0.05).unwrap();
        let rep = verify_bounds(&ident, &lr, &opts).unwrap();
        assert!(rep.trace.induced_lower < 1e-9 && rep.trace.satisfied && rep.diamond.satisfied);

        let swap = SncInstance::new(net.clone(), swap_encoding(2, 2).unwrap(), 0.0).unwrap();
        let rep = verify_bounds(&swap, &lr, &opts).unwrap();
        assert_eq!(rep.epsilon, 0.0);
        assert!(rep.trace.induced_lower < 1e-9 && rep.diamond.diamond < 1e-6);
        assert!(rep.trace.satisfied && rep.diamond.satisfied);

        for &t in &[0.01, 0.03, 0.05] {
            let rep = verify_bounds(&swap.at_time(t), &lr, &opts).unwrap();
            assert!(rep.trace.satisfied && rep.diamond.satisfied, "t={t}: {rep:?}");
            assert!(rep.trace.induced_lower <= rep.trace.diamond + BOUND_SLACK);
            assert!(rep.diamond.diamond_gap <= 1e-6);
        }
    }
}
