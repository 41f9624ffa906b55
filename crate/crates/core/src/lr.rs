//! Lieb-Robinson envelopes `eps_AB(t)` and the decay hypotheses behind them.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{Distance, SpinNetwork};

/// Envelope constants. The exponential-decay envelope uses the same `mu`
/// in its decay hypothesis and in `exp(-mu d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrParams {
    FiniteRange { zeta: f64, dbar: usize },
    ExponentialDecay { c: f64, v: f64, mu: f64, s: f64 },
    PowerLaw { c: f64, v: f64, mu: f64, s: f64 },
}

impl LrParams {
    pub fn finite_range(zeta: f64, dbar: usize) -> Result<Self> {
        let p = LrParams::FiniteRange { zeta, dbar };
        p.validate()?;
        Ok(p)
    }

    pub fn exponential_decay(c: f64, v: f64, mu: f64, s: f64) -> Result<Self> {
        let p = LrParams::ExponentialDecay { c, v, mu, s };
        p.validate()?;
        Ok(p)
    }

    pub fn power_law(c: f64, v: f64, mu: f64, s: f64) -> Result<Self> {
        let p = LrParams::PowerLaw { c, v, mu, s };
        p.validate()?;
        Ok(p)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LrParams::FiniteRange { .. } => "finite_range",
            LrParams::ExponentialDecay { .. } => "exponential_decay",
            LrParams::PowerLaw { .. } => "power_law",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidLrParams(format!("{name} must be positive and finite, got {x}")))
            }
        };
        match *self {
            LrParams::FiniteRange { zeta, dbar } => {
                positive("zeta", zeta)?;
                if dbar == 0 {
                    return Err(Error::InvalidLrParams("dbar must be at least 1".into()));
                }
            }
            LrParams::ExponentialDecay { c, v, mu, s } | LrParams::PowerLaw { c, v, mu, s } => {
                positive("C", c)?;
                positive("v", v)?;
                positive("mu", mu)?;
                positive("s", s)?;
            }
        }
        Ok(())
    }

    /// Dispatches to the envelope of the configured kind.
    pub fn epsilon(&self, abs_a: usize, abs_b: usize, dist: usize, t: f64) -> Result<f64> {
        match self {
            LrParams::FiniteRange { .. } => epsilon_finite_range(abs_a, abs_b, dist, self, t),
            LrParams::ExponentialDecay { .. } => epsilon_exp_decay(abs_a, abs_b, dist, self, t),
            LrParams::PowerLaw { .. } => epsilon_power_law(abs_a, abs_b, dist, self, t),
        }
    }

    /// Envelope for the network's own A/B partition. Disconnected A and B give 0.
    pub fn epsilon_for(&self, net: &SpinNetwork, t: f64) -> Result<f64> {
        let p = net.partition();
        match net.ab_distance() {
            Distance::Unreachable => Ok(0.0),
            Distance::Finite(d) => self.epsilon(p.a().len(), p.b().len(), d, t),
        }
    }
}

fn check_dist(dist: usize) -> Result<()> {
    if dist == 0 {
        Err(Error::OutOfRange("d(A, B) must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `2|A||B| (2 e zeta dbar |t| / d)^(d / dbar)`.
pub fn epsilon_finite_range(abs_a: usize, abs_b: usize, dist: usize, p: &LrParams, t: f64) -> Result<f64> {
    let LrParams::FiniteRange { zeta, dbar } = *p else {
        return Err(Error::WrongKind { expected: "finite_range", actual: p.kind_name() });
    };
    check_dist(dist)?;
    let d = dist as f64;
    let dbar = dbar as f64;
    let base = 2.0 * E * zeta * dbar * t.abs() / d;
    Ok(2.0 * (abs_a * abs_b) as f64 * base.powf(d / dbar))
}

/// `C|A||B| (e^{v|t|} - 1) e^{-mu d}`.
pub fn epsilon_exp_decay(abs_a: usize, abs_b: usize, dist: usize, p: &LrParams, t: f64) -> Result<f64> {
    let LrParams::ExponentialDecay { c, v, mu, .. } = *p else {
        return Err(Error::WrongKind { expected: "exponential_decay", actual: p.kind_name() });
    };
    check_dist(dist)?;
    Ok(c * (abs_a * abs_b) as f64 * (v * t.abs()).exp_m1() * (-mu * dist as f64).exp())
}

/// `C|A||B| (e^{v|t|} - 1) / (1 + d)^mu`.
pub fn epsilon_power_law(abs_a: usize, abs_b: usize, dist: usize, p: &LrParams, t: f64) -> Result<f64> {
    let LrParams::PowerLaw { c, v, mu, .. } = *p else {
        return Err(Error::WrongKind { expected: "power_law", actual: p.kind_name() });
    };
    check_dist(dist)?;
    Ok(c * (abs_a * abs_b) as f64 * (v * t.abs()).exp_m1() / (1.0 + dist as f64).powf(mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    Exponential,
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    pub value: f64,
    pub within_budget: bool,
}

/// `sup_x sum_{X containing x} |X| ||H_X|| w(D(X))` with `w = e^{mu D}` or `(1 + D)^mu`,
/// compared against `budget`.
pub fn decay_condition_check(net: &SpinNetwork, mode: DecayMode, mu: f64, budget: f64) -> DecayCheck {
    let mut per_site = vec![0.0f64; net.graph().vertex_count()];
    for term in net.terms() {
        let diameter = net
            .graph()
            .region_diameter(&term.support)
            .expect("term supports are validated")
            .as_f64();
        let weight = match mode {
            DecayMode::Exponential => (mu * diameter).exp(),
            DecayMode::PowerLaw => (1.0 + diameter).powf(mu),
        };
        let contribution = term.support.len() as f64 * linalg::spectral_norm(&term.matrix) * weight;
        for &x in term.support.vertices() {
            per_site[x] += contribution;
        }
    }
    let value = per_site.into_iter().fold(0.0, f64::max);
    DecayCheck { value, within_budget: value <= budget }
}

/// `sup_x sum_{X containing x} ||H_X||`, a seed value for `zeta`.
///
/// This is a heuristic: it is not a rigorous Lieb-Robinson constant, and
/// bound checks built on it are conditional on the choice.
pub fn heuristic_zeta(net: &SpinNetwork) -> Result<f64> {
    if net.terms().is_empty() {
        return Err(Error::InvalidLrParams("heuristic zeta needs at least one term".into()));
    }
    let mut per_site = vec![0.0f64; net.graph().vertex_count()];
    for term in net.terms() {
        let norm = linalg::spectral_norm(&term.matrix);
        for &x in term.support.vertices() {
            per_site[x] += norm;
        }
    }
    Ok(per_site.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, kron, pauli_z, CMat};
    use crate::network::{Graph, HamiltonianTerm, Partition, Region};
    use proptest::prelude::*;

    fn fr(zeta: f64, dbar: usize) -> LrParams {
        LrParams::finite_range(zeta, dbar).unwrap()
    }

    #[test]
    fn finite_range_examples() {
        assert_eq!(epsilon_finite_range(1, 1, 2, &fr(1.0, 1), 0.0).unwrap(), 0.0);
        let v = epsilon_finite_range(1, 1, 1, &fr(1.0, 1), 1.0 / (2.0 * E)).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let v = epsilon_finite_range(1, 1, 2, &fr(1.0, 1), 1.0 / E).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert!(epsilon_finite_range(1, 1, 0, &fr(1.0, 1), 1.0).is_err());
        let pl = LrParams::power_law(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(epsilon_finite_range(1, 1, 1, &pl, 1.0), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn exp_decay_examples() {
        let p = LrParams::exponential_decay(1.0, 1.0, 2f64.ln(), 1.0).unwrap();
        assert_eq!(epsilon_exp_decay(3, 2, 4, &p, 0.0).unwrap(), 0.0);
        let v = epsilon_exp_decay(1, 1, 1, &p, 2f64.ln()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v2 = epsilon_exp_decay(2, 1, 1, &p, 2f64.ln()).unwrap();
        assert!((v2 - 2.0 * v).abs() < 1e-15);
        assert!(epsilon_exp_decay(1, 1, 1, &fr(1.0, 1), 1.0).is_err());
    }

    #[test]
    fn power_law_examples() {
        let p = LrParams::power_law(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(epsilon_power_law(1, 1, 1, &p, 0.0).unwrap(), 0.0);
        let v = epsilon_power_law(1, 1, 1, &p, 2f64.ln()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let steeper = LrParams::power_law(1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(epsilon_power_law(1, 1, 1, &steeper, 1.0).unwrap() < epsilon_power_law(1, 1, 1, &p, 1.0).unwrap());
        assert!(epsilon_power_law(1, 1, 1, &fr(1.0, 1), 1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LrParams::finite_range(0.0, 1).is_err());
        assert!(LrParams::finite_range(1.0, 0).is_err());
        assert!(LrParams::power_law(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(LrParams::exponential_decay(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn finite_range_decreases_with_distance_inside_validity() {
        let p = fr(0.7, 1);
        for k in 1..20 {
            let t = 0.002 * k as f64;
            for d in 1..8usize {
                if 2.0 * E * 0.7 * t >= d as f64 {
                    continue;
                }
                let near = epsilon_finite_range(1, 1, d, &p, t).unwrap();
                let far = epsilon_finite_range(1, 1, d + 1, &p, t).unwrap();
                assert!(far < near, "t={t} d={d}");
            }
        }
    }

    fn all_params() -> Vec<LrParams> {
        vec![
            fr(1.3, 1),
            fr(0.4, 2),
            LrParams::exponential_decay(0.8, 1.7, 0.5, 1.0).unwrap(),
            LrParams::power_law(1.1, 0.9, 2.5, 1.0).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn envelopes_even_nonnegative_and_increasing(t in 1e-3f64..3.0, dt in 1e-3f64..1.0, d in 1usize..6) {
            for p in all_params() {
                let v = p.epsilon(1, 2, d, t).unwrap();
                prop_assert!(v >= 0.0);
                prop_assert_eq!(v, p.epsilon(1, 2, d, -t).unwrap());
                prop_assert!(p.epsilon(1, 2, d, t + dt).unwrap() > v);
                prop_assert_eq!(p.epsilon(1, 2, d, 0.0).unwrap(), 0.0);
            }
        }

        #[test]
        fn envelopes_linear_in_region_sizes(t in 1e-3f64..2.0, a in 1usize..5, b in 1usize..5, d in 1usize..5) {
            for p in all_params() {
                let unit = p.epsilon(1, 1, d, t).unwrap();
                let v = p.epsilon(a, b, d, t).unwrap();
                prop_assert!((v - (a * b) as f64 * unit).abs() <= 1e-12 * v.abs().max(1e-300));
            }
        }
    }

    fn zz_chain(n: usize, scale: f64) -> SpinNetwork {
        let g = Graph::path(n).unwrap();
        let terms = (1..n)
            .map(|k| {
                HamiltonianTerm::new(Region::new(vec![k - 1, k]).unwrap(), kron(&pauli_z(), &pauli_z()) * c(scale, 0.0))
                    .unwrap()
            })
            .collect();
        let p = Partition::new(
            &g,
            Region::new(vec![0]).unwrap(),
            Region::new(vec![n - 1]).unwrap(),
            Region::new((1..n - 1).collect()).unwrap(),
        )
        .unwrap();
        let d = 1 << n;
        SpinNetwork::new(g, vec![2; n], terms, p, identity(d) / c(d as f64, 0.0)).unwrap()
    }

    fn single_z() -> SpinNetwork {
        let g = Graph::path(2).unwrap();
        let p = Partition::new(&g, Region::new(vec![0]).unwrap(), Region::new(vec![1]).unwrap(), Region::empty())
            .unwrap();
        let t = HamiltonianTerm::new(Region::new(vec![0]).unwrap(), pauli_z()).unwrap();
        SpinNetwork::new(g, vec![2, 2], vec![t], p, identity(4) / c(4.0, 0.0)).unwrap()
    }

    #[test]
    fn decay_condition_examples() {
        let g = Graph::path(2).unwrap();
        let p = Partition::new(&g, Region::new(vec![0]).unwrap(), Region::new(vec![1]).unwrap(), Region::empty())
            .unwrap();
        let free = SpinNetwork::new(g, vec![2, 2], vec![], p, identity(4) / c(4.0, 0.0)).unwrap();
        assert_eq!(decay_condition_check(&free, DecayMode::Exponential, 1.0, 0.5).value, 0.0);
        assert!(decay_condition_check(&free, DecayMode::Exponential, 1.0, 0.5).within_budget);

        let one = decay_condition_check(&single_z(), DecayMode::Exponential, 3.0, 1.0);
        assert_eq!(one.value, 1.0);
        assert!(one.within_budget);
    }

    #[test]
    fn decay_condition_zz_chain_against_direct_sum() {
        // Direct per-site sum: site 1 lies in both bonds, each contributing
        // |X| * ||ZZ|| * (1 + D)^mu = 2 * 1 * 2 = 4.
        let net = zz_chain(3, 1.0);
        let per_site = [4.0, 8.0, 4.0];
        let expected = per_site.iter().cloned().fold(0.0, f64::max);
        let got = decay_condition_check(&net, DecayMode::PowerLaw, 1.0, 7.9);
        assert!((got.value - expected).abs() < 1e-12);
        assert!(!got.within_budget);
        let exp = decay_condition_check(&net, DecayMode::Exponential, 0.5, 100.0);
        assert!((exp.value - 2.0 * 2.0 * 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn heuristic_zeta_examples() {
        assert!((heuristic_zeta(&single_z()).unwrap() - 1.0).abs() < 1e-14);
        assert!((heuristic_zeta(&zz_chain(3, 1.0)).unwrap() - 2.0).abs() < 1e-14);
        assert!((heuristic_zeta(&zz_chain(3, 2.5)).unwrap() - 5.0).abs() < 1e-13);
        let g = Graph::path(2).unwrap();
        let p = Partition::new(&g, Region::new(vec![0]).unwrap(), Region::new(vec![1]).unwrap(), Region::empty())
            .unwrap();
        let free = SpinNetwork::new(g, vec![2, 2], vec![], p, CMat::identity(4, 4) / c(4.0, 0.0)).unwrap();
        assert!(heuristic_zeta(&free).is_err());
    }
}
