//! Continuity bounds on the capacities of the spin-network channel.
//!
//! All logarithms are base 2. The comparator channels carry zero capacity, so
//! each bound is a function of `eps_AB(t)` and the dimension factors alone.

use serde::Serialize;

use crate::channels::SncInstance;
use crate::error::{Error, Result};
use crate::lr::LrParams;

fn check_nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{name} must be finite and nonnegative, got {x}")))
    }
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `H2(y) = -y log y - (1 - y) log(1 - y)`.
pub fn binary_entropy(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfRange(format!("binary entropy needs 0 <= y <= 1, got {y}")));
    }
    Ok(-xlog2x(y) - xlog2x(1.0 - y))
}

/// `g(x) = (1 + x) H2(x / (1 + x)) = (1 + x) log(1 + x) - x log x`.
pub fn g_function(x: f64) -> Result<f64> {
    check_nonnegative("g argument", x)?;
    Ok((1.0 + x) * x.ln_1p() / std::f64::consts::LN_2 - xlog2x(x))
}

/// `M = 2 min{M_A^4, M_A^3 M_B M_C}`.
pub fn m_factor(m_a: u64, m_b: u64, m_c: u64) -> u64 {
    let cube = m_a.saturating_pow(3);
    2u64.saturating_mul(cube.saturating_mul(m_a).min(cube.saturating_mul(m_b).saturating_mul(m_c)))
}

/// `M_* = min{M_A^2, M_A M_B M_C}`.
pub fn m_star(m_a: u64, m_b: u64, m_c: u64) -> u64 {
    m_a.saturating_mul(m_a).min(m_a.saturating_mul(m_b).saturating_mul(m_c))
}

/// `M' = min{M_A, M_B}`.
pub fn m_prime(m_a: u64, m_b: u64) -> u64 {
    m_a.min(m_b)
}

/// Holevo-capacity bound `(M_A^2 eps / 2) log M_B + g(M_A^2 eps / 2)`.
pub fn holevo_bound(epsilon: f64, m_a: u64, m_b: u64) -> Result<f64> {
    check_nonnegative("epsilon", epsilon)?;
    let x = (m_a * m_a) as f64 * epsilon / 2.0;
    Ok(x * (m_b as f64).log2() + g_function(x)?)
}

/// Common bound on `Q` and `C`: `M eps log M_B + g(M eps / 2)`.
pub fn qc_bounds(epsilon: f64, m_factor: u64, m_b: u64) -> Result<f64> {
    check_nonnegative("epsilon", epsilon)?;
    let me = m_factor as f64 * epsilon;
    Ok(me * (m_b as f64).log2() + g_function(me / 2.0)?)
}

/// Entanglement-assisted bound `M eps log M' + g(M eps / 2)`.
pub fn ce_bound(epsilon: f64, m_factor: u64, m_prime: u64) -> Result<f64> {
    check_nonnegative("epsilon", epsilon)?;
    let me = m_factor as f64 * epsilon;
    Ok(me * (m_prime as f64).log2() + g_function(me / 2.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalBounds {
    /// Shared bound on `C_P`, `C` and `C_E`.
    pub classical_family: f64,
    /// Bound on `Q`, half of the classical-family value.
    pub quantum: f64,
}

/// The entanglement-assisted bound propagated through `C_P <= C <= C_E` and `Q <= C_E / 2`.
pub fn final_bounds(epsilon: f64, m_factor: u64, m_prime: u64) -> Result<FinalBounds> {
    let classical_family = ce_bound(epsilon, m_factor, m_prime)?;
    Ok(FinalBounds { classical_family, quantum: 0.5 * classical_family })
}

/// Bounds clipped to the dimension ceilings of a channel from `Q` to `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CappedBounds {
    pub c1: f64,
    pub c: f64,
    pub cp: f64,
    pub q: f64,
    pub ce: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityReport {
    pub epsilon: f64,
    pub m_a: u64,
    pub m_b: u64,
    pub m_c: u64,
    pub m_q: u64,
    pub m_factor: u64,
    pub m_prime: u64,
    pub m_star: u64,
    pub c1_bound: f64,
    pub c_bound: f64,
    pub cp_bound: f64,
    pub q_bound: f64,
    pub ce_bound: f64,
    /// The intermediate `Q, C` bound that uses `log M_B`.
    pub qc_intermediate: f64,
    pub capped: CappedBounds,
}

/// Report for given `eps` and dimensions; the ceilings use `log min{M_Q, M_B}`.
pub fn report_from_epsilon(epsilon: f64, m_a: u64, m_b: u64, m_c: u64, m_q: u64) -> Result<CapacityReport> {
    let m = m_factor(m_a, m_b, m_c);
    let mp = m_prime(m_a, m_b);
    let c1 = holevo_bound(epsilon, m_a, m_b)?;
    let fin = final_bounds(epsilon, m, mp)?;
    let qc = qc_bounds(epsilon, m, m_b)?;
    let ceiling = (m_q.min(m_b) as f64).log2();
    let capped = CappedBounds {
        c1: c1.min(ceiling),
        c: fin.classical_family.min(ceiling),
        cp: fin.classical_family.min(ceiling),
        q: fin.quantum.min(ceiling),
        ce: fin.classical_family.min(2.0 * ceiling),
    };
    Ok(CapacityReport {
        epsilon,
        m_a,
        m_b,
        m_c,
        m_q,
        m_factor: m,
        m_prime: mp,
        m_star: m_star(m_a, m_b, m_c),
        c1_bound: c1,
        c_bound: fin.classical_family,
        cp_bound: fin.classical_family,
        q_bound: fin.quantum,
        ce_bound: fin.classical_family,
        qc_intermediate: qc,
        capped,
    })
}

/// Capacity report at the instance's time, with `eps` from `lr`.
pub fn report(inst: &SncInstance, lr: &LrParams) -> Result<CapacityReport> {
    let net = inst.net();
    let eps = lr.epsilon_for(net, inst.time())?;
    report_from_epsilon(eps, net.m_a() as u64, net.m_b() as u64, net.m_c() as u64, inst.memory_dim() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        let expected = 2.0 - 0.75 * 3f64.log2();
        assert!((binary_entropy(0.25).unwrap() - expected).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_function(0.0).unwrap(), 0.0);
        assert!((g_function(1.0).unwrap() - 2.0).abs() < 1e-15);
        let via_entropy = 4.0 / 3.0 * binary_entropy(0.25).unwrap();
        assert!((g_function(1.0 / 3.0).unwrap() - via_entropy).abs() < 1e-14);
        assert!(g_function(-1e-3).is_err());
    }

    #[test]
    fn dimension_factors() {
        assert_eq!(m_factor(2, 2, 2), 32);
        assert_eq!(m_factor(2, 4, 4), 32);
        assert_eq!(m_factor(4, 2, 2), 512);
        assert_eq!(m_star(2, 2, 2), 4);
        assert_eq!(m_star(4, 2, 1), 8);
        assert_eq!(m_star(1, 5, 5), 1);
        assert_eq!(m_prime(3, 2), 2);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(holevo_bound(0.0, 2, 2).unwrap(), 0.0);
        assert!((holevo_bound(0.5, 2, 2).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(qc_bounds(0.0, 32, 2).unwrap(), 0.0);
        assert!((qc_bounds(2.0 / 32.0, 32, 2).unwrap() - 4.0).abs() < 1e-14);
        assert!((ce_bound(2.0 / 32.0, 32, 2).unwrap() - 4.0).abs() < 1e-14);
        assert!((ce_bound(0.1, 32, 1).unwrap() - g_function(1.6).unwrap()).abs() < 1e-15);
        let f = final_bounds(2.0 / 32.0, 32, 2).unwrap();
        assert!((f.classical_family - 4.0).abs() < 1e-14 && (f.quantum - 2.0).abs() < 1e-14);
        assert_eq!(final_bounds(0.0, 32, 2).unwrap(), FinalBounds { classical_family: 0.0, quantum: 0.0 });
        assert!(ce_bound(-1.0, 2, 2).is_err());
    }

    #[test]
    fn report_at_one_sixteenth() {
        let r = report_from_epsilon(1.0 / 16.0, 2, 2, 2, 2).unwrap();
        // M = 32, M eps = 2, M' = 2: classical 2 + g(1) = 4; Holevo x = 1/8
        assert_eq!((r.m_factor, r.m_prime, r.m_star), (32, 2, 4));
        assert!((r.c_bound - 4.0).abs() < 1e-14);
        assert!((r.q_bound - 2.0).abs() < 1e-14);
        let x: f64 = 0.125;
        let g = (1.0 + x) * (1.0 + x).log2() - x * x.log2();
        assert!((r.c1_bound - (x + g)).abs() < 1e-14);
        assert!((r.qc_intermediate - 4.0).abs() < 1e-14);
        assert_eq!(r.capped.c, 1.0);
        assert_eq!(r.capped.ce, 2.0);
    }

    proptest! {
        #[test]
        fn g_is_increasing(a in 0.0f64..50.0, b in 0.0f64..50.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(g_function(hi).unwrap() > g_function(lo).unwrap());
        }

        #[test]
        fn quantum_is_half(eps in 0.0f64..1.0, m_a in 1u64..5, m_b in 1u64..5) {
            let f = final_bounds(eps, m_factor(m_a, m_b, 2), m_prime(m_a, m_b)).unwrap();
            prop_assert_eq!(f.quantum, f.classical_family / 2.0);
        }

        #[test]
        fn holevo_dominated_by_qc(eps in 0.0f64..1.0, m_a in 1u64..5, m_b in 1u64..5, m_c in 1u64..5) {
            let h = holevo_bound(eps, m_a, m_b).unwrap();
            let qc = qc_bounds(eps, m_factor(m_a, m_b, m_c), m_b).unwrap();
            prop_assert!(h <= qc + 1e-12);
        }

        #[test]
        fn bounds_are_continuous(eps in 0.0f64..1.0) {
            let h = 1e-9;
            for f in [
                |e: f64| holevo_bound(e, 2, 2).unwrap(),
                |e: f64| qc_bounds(e, 32, 2).unwrap(),
                |e: f64| ce_bound(e, 32, 2).unwrap(),
            ] {
                prop_assert!((f(eps + h) - f(eps)).abs() < 1e-6);
            }
        }
    }
}
