//! Unitary dynamics by exact diagonalization and the commutator-norm oracle.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, OperatorMatrix};
use crate::network::{Region, SpinNetwork};

/// Spectral decomposition of a Hamiltonian, reused across times.
#[derive(Debug, Clone)]
pub struct Propagator {
    energies: Vec<f64>,
    vectors: CMat,
}

impl Propagator {
    pub fn new(h: &CMat) -> Result<Self> {
        linalg::ensure_hermitian(h, linalg::HERMITIAN_TOL)?;
        let (energies, vectors) = linalg::eigh(h);
        Ok(Self { energies, vectors })
    }

    pub fn for_network(net: &SpinNetwork) -> Self {
        Self::new(&net.assemble_hamiltonian()).expect("assembled Hamiltonian is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let phase = c(0.0, -self.energies[k] * t).exp();
            for r in 0..n {
                scaled[(r, k)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i h t)` through the eigendecomposition of `h`.
pub fn evolve_unitary(h: &CMat, t: f64) -> Result<CMat> {
    Ok(Propagator::new(h)?.unitary(t))
}

/// Heisenberg-picture operator `U(t)^dagger a U(t)`.
pub fn heisenberg_evolve(a: &OperatorMatrix, h: &CMat, t: f64) -> Result<OperatorMatrix> {
    if a.matrix().shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "operator {:?} vs Hamiltonian {:?}",
            a.matrix().shape(),
            h.shape()
        )));
    }
    let u = evolve_unitary(h, t)?;
    OperatorMatrix::new(u.adjoint() * a.matrix() * &u, a.dims().to_vec())
}

/// Commutator oracle for local operators on two disjoint regions of a network.
pub struct CommutatorOracle {
    propagator: Propagator,
    a_full: CMat,
    b_full: CMat,
}

impl CommutatorOracle {
    pub fn new(
        net: &SpinNetwork,
        a: &OperatorMatrix,
        region_a: &Region,
        b: &OperatorMatrix,
        region_b: &Region,
    ) -> Result<Self> {
        if region_a.intersects(region_b) {
            return Err(Error::InvalidRegion("operator supports overlap".into()));
        }
        net.graph().check_region(region_a)?;
        net.graph().check_region(region_b)?;
        let dims = net.local_dims();
        let a_full = linalg::embed_operator(a.matrix(), dims, region_a.vertices())?;
        let b_full = linalg::embed_operator(b.matrix(), dims, region_b.vertices())?;
        Ok(Self {
            propagator: Propagator::for_network(net),
            a_full,
            b_full,
        })
    }

    /// `||[A(t), B]||` in operator norm.
    pub fn norm_at(&self, t: f64) -> f64 {
        let u = self.propagator.unitary(t);
        let a_t = u.adjoint() * &self.a_full * &u;
        let comm = &a_t * &self.b_full - &self.b_full * &a_t;
        linalg::spectral_norm(&comm)
    }
}

/// Exact `||[A(t), B]||` with `A` on `region_a`, `B` on `region_b`, and `A`
/// evolved under the network Hamiltonian.
pub fn commutator_norm_exact(
    a: &OperatorMatrix,
    region_a: &Region,
    b: &OperatorMatrix,
    region_b: &Region,
    net: &SpinNetwork,
    t: f64,
) -> Result<f64> {
    Ok(CommutatorOracle::new(net, a, region_a, b, region_b)?.norm_at(t))
}
