//! Quantum channels: Kraus/Choi conversion, the spin-network channel from the
//! sender memory Q to region B, and its zero-capacity comparators.
//!
//! Choi matrices use the output-major convention
//! `J = sum_ij Phi(|i><j|) ⊗ |i><j|`, so `Tr_out J = I_in` for trace-preserving maps.
//!
//! The joint memory/network space orders factors as `[Q, v_0, v_1, ...]`.
//! Encodings act on `Q ⊗ A` with the A vertices in ascending order.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::Propagator;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, DensityMatrix, ONE};
use crate::network::SpinNetwork;

/// Eigenvalues of a Choi matrix below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-11;
/// Tolerance on `sum K^dagger K = I` and on the Choi marginal.
pub const TP_TOL: f64 = 1e-9;
/// Tolerance on negative Choi eigenvalues.
pub const CP_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map given by Kraus operators
/// of shape `output_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: Vec<CMat>,
    input_dim: usize,
    output_dim: usize,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (output_dim, input_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (output_dim, input_dim)) {
            return Err(Error::InvalidChannel("Kraus operators of different shapes".into()));
        }
        let mut sum = CMat::zeros(input_dim, input_dim);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (sum - linalg::identity(input_dim)).camax();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { kraus, input_dim, output_dim })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![linalg::identity(d)], input_dim: d, output_dim: d }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `rho -> Tr(rho) sigma`.
    pub fn constant(input_dim: usize, sigma: &CMat) -> Result<Self> {
        let (vals, vecs) = linalg::eigh(sigma);
        let out = sigma.nrows();
        let mut kraus = Vec::new();
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda <= KRAUS_CUTOFF {
                continue;
            }
            let col = vecs.column(k) * c(lambda.sqrt(), 0.0);
            for j in 0..input_dim {
                let mut m = CMat::zeros(out, input_dim);
                m.set_column(j, &col);
                kraus.push(m);
            }
        }
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Linear action `sum K x K^dagger` on any operator.
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.output_dim, self.output_dim);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Heisenberg-picture action `sum K^dagger y K`.
    pub fn apply_adjoint(&self, y: &CMat) -> CMat {
        let mut out = CMat::zeros(self.input_dim, self.input_dim);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    pub fn choi(&self) -> CMat {
        choi_from_map(self.input_dim, self.output_dim, |x| self.apply(x))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.output_dim != next.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed a {}-dimensional output into a {}-dimensional input",
                self.output_dim, next.input_dim
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Channel { kraus, input_dim: self.input_dim, output_dim: next.output_dim })
    }

    /// Minimal Kraus form through the Choi eigendecomposition.
    pub fn canonical(&self) -> Result<Channel> {
        kraus_from_choi(&self.choi(), self.input_dim, self.output_dim)
    }
}

pub fn apply_channel(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} vs state dimension {}",
            ch.input_dim,
            rho.dim()
        )));
    }
    DensityMatrix::new(ch.apply(rho.matrix()), vec![ch.output_dim])
}

pub fn choi_of(ch: &Channel) -> CMat {
    ch.choi()
}

/// Choi matrix of an arbitrary linear map given by its action on matrix units.
pub fn choi_from_map(input_dim: usize, output_dim: usize, map: impl Fn(&CMat) -> CMat + Sync) -> CMat {
    let blocks: Vec<(usize, usize, CMat)> = (0..input_dim * input_dim)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / input_dim, k % input_dim);
            (i, j, map(&linalg::matrix_unit(input_dim, i, j)))
        })
        .collect();
    let n = input_dim * output_dim;
    let mut choi = CMat::zeros(n, n);
    for (i, j, out) in blocks {
        for o in 0..output_dim {
            for p in 0..output_dim {
                choi[(o * input_dim + i, p * input_dim + j)] = out[(o, p)];
            }
        }
    }
    choi
}

/// Kraus operators from the eigendecomposition of a Choi matrix.
pub fn kraus_from_choi(choi: &CMat, input_dim: usize, output_dim: usize) -> Result<Channel> {
    let n = input_dim * output_dim;
    if choi.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Choi matrix {:?} for a {input_dim} -> {output_dim} map",
            choi.shape()
        )));
    }
    linalg::ensure_hermitian(choi, 1e-9)?;
    let mut marginal = CMat::zeros(input_dim, input_dim);
    for o in 0..output_dim {
        for i in 0..input_dim {
            for j in 0..input_dim {
                marginal[(i, j)] += choi[(o * input_dim + i, o * input_dim + j)];
            }
        }
    }
    let dev = (marginal - linalg::identity(input_dim)).camax();
    if dev > TP_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    let (vals, vecs) = linalg::eigh(choi);
    if let Some(&min) = vals.first() {
        if min < -CP_TOL {
            return Err(Error::NotCompletelyPositive(min));
        }
    }
    let mut kraus = Vec::new();
    for (k, &lambda) in vals.iter().enumerate().rev() {
        if lambda < KRAUS_CUTOFF {
            continue;
        }
        let s = c(lambda.sqrt(), 0.0);
        kraus.push(CMat::from_fn(output_dim, input_dim, |o, i| vecs[(o * input_dim + i, k)] * s));
    }
    Channel::new(kraus)
}

/// Channel from the action of a CPTP map, canonicalized through its Choi matrix.
pub fn channel_from_map(input_dim: usize, output_dim: usize, map: impl Fn(&CMat) -> CMat + Sync) -> Result<Channel> {
    kraus_from_choi(&choi_from_map(input_dim, output_dim, map), input_dim, output_dim)
}

/// Encoding channel on `Q ⊗ A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    channel: Channel,
    memory_dim: usize,
    a_dim: usize,
}

impl Encoding {
    pub fn new(channel: Channel, memory_dim: usize, a_dim: usize) -> Result<Self> {
        let d = memory_dim * a_dim;
        if channel.input_dim != d || channel.output_dim != d {
            return Err(Error::DimensionMismatch(format!(
                "encoding must act on Q ⊗ A of dimension {d}, got {} -> {}",
                channel.input_dim, channel.output_dim
            )));
        }
        Ok(Self { channel, memory_dim, a_dim })
    }

    /// Leaves both Q and A untouched.
    pub fn identity(memory_dim: usize, a_dim: usize) -> Self {
        Self { channel: Channel::identity(memory_dim * a_dim), memory_dim, a_dim }
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn memory_dim(&self) -> usize {
        self.memory_dim
    }

    pub fn a_dim(&self) -> usize {
        self.a_dim
    }
}

/// Unitary swap of Q and an isomorphic A.
pub fn swap_encoding(memory_dim: usize, a_dim: usize) -> Result<Encoding> {
    if memory_dim != a_dim {
        return Err(Error::DimensionMismatch(format!(
            "swap needs equal memory and A dimensions, got {memory_dim} and {a_dim}"
        )));
    }
    let d = a_dim;
    let mut swap = CMat::zeros(d * d, d * d);
    for q in 0..d {
        for a in 0..d {
            swap[(a * d + q, q * d + a)] = ONE;
        }
    }
    Encoding::new(Channel::unitary(swap)?, d, d)
}

/// Controlled encoding: Q is read in the computational basis and symbol `alpha`
/// applies `maps[alpha]` to A. Kraus operators are `|alpha><alpha| ⊗ K`.
pub fn classical_encoding_family(maps: &[Channel]) -> Result<Encoding> {
    let first = maps.first().ok_or_else(|| Error::InvalidChannel("empty encoding family".into()))?;
    let a_dim = first.input_dim;
    if maps.iter().any(|m| m.input_dim != a_dim || m.output_dim != a_dim) {
        return Err(Error::DimensionMismatch("all maps must act on A with a common dimension".into()));
    }
    let m = maps.len();
    let mut kraus = Vec::new();
    for (alpha, map) in maps.iter().enumerate() {
        let proj = linalg::matrix_unit(m, alpha, alpha);
        for k in map.kraus() {
            kraus.push(linalg::kron(&proj, k));
        }
    }
    Encoding::new(Channel::new(kraus)?, m, a_dim)
}

/// `X_A -> Tr_Q[E_QA(rho_Q ⊗ X_A)]` as a channel on A alone.
pub fn reduced_encoding_on_a(enc: &Encoding, rho_q: &DensityMatrix) -> Result<Channel> {
    if rho_q.dim() != enc.memory_dim {
        return Err(Error::DimensionMismatch(format!(
            "memory state of dimension {} for a {}-dimensional memory",
            rho_q.dim(),
            enc.memory_dim
        )));
    }
    let dims = [enc.memory_dim, enc.a_dim];
    channel_from_map(enc.a_dim, enc.a_dim, |x| {
        let joint = enc.channel.apply(&linalg::kron(rho_q.matrix(), x));
        linalg::partial_trace_matrix(&joint, &dims, &[1]).expect("static factor layout")
    })
}

/// `E_A[.] = Tr_Q[E_QA(rho_Q ⊗ .)]` acting on the whole network ABC.
pub fn reduced_encoding(enc: &Encoding, rho_q: &DensityMatrix, net: &SpinNetwork) -> Result<Channel> {
    if enc.a_dim != net.m_a() {
        return Err(Error::DimensionMismatch(format!(
            "encoding A dimension {} vs network M_A = {}",
            enc.a_dim,
            net.m_a()
        )));
    }
    let local = reduced_encoding_on_a(enc, rho_q)?;
    let a = net.partition().a().vertices();
    let kraus = local
        .kraus()
        .iter()
        .map(|k| linalg::embed_operator(k, net.local_dims(), a))
        .collect::<Result<Vec<_>>>()?;
    Channel::new(kraus)
}

/// Network, encoding and transfer time defining a spin-network channel.
#[derive(Debug, Clone)]
pub struct SncInstance {
    net: SpinNetwork,
    encoding: Encoding,
    time: f64,
    propagator: Arc<Propagator>,
}

impl SncInstance {
    pub fn new(net: SpinNetwork, encoding: Encoding, time: f64) -> Result<Self> {
        if encoding.a_dim != net.m_a() {
            return Err(Error::DimensionMismatch(format!(
                "encoding A dimension {} vs network M_A = {}",
                encoding.a_dim,
                net.m_a()
            )));
        }
        let propagator = Arc::new(Propagator::for_network(&net));
        Ok(Self { net, encoding, time, propagator })
    }

    /// Same network and encoding at another time; reuses the diagonalization.
    pub fn at_time(&self, time: f64) -> Self {
        Self { time, ..self.clone() }
    }

    pub fn net(&self) -> &SpinNetwork {
        &self.net
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn memory_dim(&self) -> usize {
        self.encoding.memory_dim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    fn evolution(&self) -> NetworkEvolution<'_> {
        NetworkEvolution::new(&self.net, self.propagator.unitary(self.time))
    }

    /// `rho_Q -> Tr_Q[E_QA(rho_Q ⊗ tau_ABC)]`, a channel from Q to ABC.
    pub fn encoding_map(&self) -> Result<Channel> {
        let lift = EncodingLift::new(&self.net, &self.encoding)?;
        let tau = self.net.initial_state().matrix();
        channel_from_map(self.memory_dim(), self.net.total_dim(), |x| lift.encode_reduced(x, tau))
    }
}

/// `U(t) . U(t)^dagger` followed by the trace over A and C.
struct NetworkEvolution<'a> {
    net: &'a SpinNetwork,
    u: CMat,
}

impl<'a> NetworkEvolution<'a> {
    fn new(net: &'a SpinNetwork, u: CMat) -> Self {
        Self { net, u }
    }

    fn evolve_to_b(&self, x: &CMat) -> CMat {
        let evolved = &self.u * x * self.u.adjoint();
        linalg::partial_trace_matrix(&evolved, self.net.local_dims(), self.net.partition().b().vertices())
            .expect("partition validated")
    }
}

/// Encoding Kraus operators embedded into the joint `[Q, v_0, ...]` space.
struct EncodingLift {
    kraus: Vec<CMat>,
    dims: Vec<usize>,
    memory_dim: usize,
}

impl EncodingLift {
    fn new(net: &SpinNetwork, enc: &Encoding) -> Result<Self> {
        let mut dims = vec![enc.memory_dim];
        dims.extend_from_slice(net.local_dims());
        let mut targets = vec![0];
        targets.extend(net.partition().a().vertices().iter().map(|v| v + 1));
        let kraus = enc
            .channel
            .kraus()
            .iter()
            .map(|k| linalg::embed_operator(k, &dims, &targets))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kraus, dims, memory_dim: enc.memory_dim })
    }

    /// `Tr_Q[E_QA(x ⊗ tau)]` for any operator `x` on Q.
    fn encode_reduced(&self, x: &CMat, tau: &CMat) -> CMat {
        debug_assert_eq!(x.nrows(), self.memory_dim);
        let joint = linalg::kron(x, tau);
        let mut out = CMat::zeros(joint.nrows(), joint.ncols());
        for k in &self.kraus {
            out += k * &joint * k.adjoint();
        }
        let network: Vec<usize> = (1..self.dims.len()).collect();
        linalg::partial_trace_matrix(&out, &self.dims, &network).expect("static factor layout")
    }
}

/// The spin-network channel `rho_Q -> Tr_{QAC}[U E_QA(rho_Q ⊗ tau) U^dagger]`,
/// built from its Choi matrix.
pub fn snc_channel(inst: &SncInstance) -> Result<Channel> {
    let lift = EncodingLift::new(&inst.net, &inst.encoding)?;
    let evo = inst.evolution();
    let tau = inst.net.initial_state().matrix();
    channel_from_map(inst.memory_dim(), inst.net.m_b(), |x| evo.evolve_to_b(&lift.encode_reduced(x, tau)))
}

/// Unperturbed evolved state of B: `Tr_AC[U tau U^dagger]`.
pub fn rho_b0(net: &SpinNetwork, t: f64) -> CMat {
    let evo = NetworkEvolution::new(net, Propagator::for_network(net).unitary(t));
    evo.evolve_to_b(net.initial_state().matrix())
}

/// `tau_A ⊗ tau_BC` laid out in vertex order.
pub fn decoupled_initial_state(net: &SpinNetwork) -> CMat {
    let dims = net.local_dims();
    let a = net.partition().a().vertices();
    let rest = net.partition().b().union(net.partition().c());
    let tau = net.initial_state().matrix();
    let tau_a = linalg::partial_trace_matrix(tau, dims, a).expect("partition validated");
    let tau_bc = linalg::partial_trace_matrix(tau, dims, rest.vertices()).expect("partition validated");
    linalg::tensor_on_factors(&tau_a, &tau_bc, dims, a).expect("partition validated")
}

/// A-decoupled evolved state of B: `Tr_AC[U (tau_A ⊗ tau_BC) U^dagger]`.
pub fn rho_b1(net: &SpinNetwork, t: f64) -> CMat {
    let evo = NetworkEvolution::new(net, Propagator::for_network(net).unitary(t));
    evo.evolve_to_b(&decoupled_initial_state(net))
}

/// Constant channel onto the unperturbed output `rho_B^(0)(t)`.
pub fn depolarizing_phi0(net: &SpinNetwork, t: f64, memory_dim: usize) -> Result<Channel> {
    Channel::constant(memory_dim, &rho_b0(net, t))
}

/// Constant channel onto the A-decoupled output `rho_B^(1)(t)`.
pub fn depolarizing_phi1(net: &SpinNetwork, t: f64, memory_dim: usize) -> Result<Channel> {
    Channel::constant(memory_dim, &rho_b1(net, t))
}

/// `X_ABC -> Tr_AC[U X U^dagger]`.
pub fn psi_map(net: &SpinNetwork, t: f64) -> Result<Channel> {
    let evo = NetworkEvolution::new(net, Propagator::for_network(net).unitary(t));
    channel_from_map(net.total_dim(), net.m_b(), |x| evo.evolve_to_b(x))
}

/// `X_ABC -> Tr_AC[U (tau_A ⊗ Tr_A X) U^dagger]`.
pub fn psi_dp1_map(net: &SpinNetwork, t: f64) -> Result<Channel> {
    let evo = NetworkEvolution::new(net, Propagator::for_network(net).unitary(t));
    let dims = net.local_dims();
    let a = net.partition().a().vertices();
    let rest = net.partition().b().union(net.partition().c());
    let tau_a = linalg::partial_trace_matrix(net.initial_state().matrix(), dims, a)?;
    channel_from_map(net.total_dim(), net.m_b(), |x| {
        let x_bc = linalg::partial_trace_matrix(x, dims, rest.vertices()).expect("partition validated");
        let replaced = linalg::tensor_on_factors(&tau_a, &x_bc, dims, a).expect("partition validated");
        evo.evolve_to_b(&replaced)
    })
}

/// Swap-in/swap-out channel `rho -> Tr_AC[U (rho_A ⊗ tau_BC) U^dagger]`, built directly.
pub fn swap_channel(net: &SpinNetwork, t: f64) -> Result<Channel> {
    let evo = NetworkEvolution::new(net, Propagator::for_network(net).unitary(t));
    let dims = net.local_dims();
    let a = net.partition().a().vertices();
    let rest = net.partition().b().union(net.partition().c());
    let tau_bc = linalg::partial_trace_matrix(net.initial_state().matrix(), dims, rest.vertices())?;
    channel_from_map(net.m_a(), net.m_b(), |x| {
        let placed = linalg::tensor_on_factors(x, &tau_bc, dims, a).expect("partition validated");
        evo.evolve_to_b(&placed)
    })
}

/// Output of B when the A-channel `map` is applied to the initial state.
pub fn rho_b_after_local_map(net: &SpinNetwork, t: f64, map: &Channel) -> Result<CMat> {
    let a = net.partition().a().vertices();
    let lifted = map
        .kraus()
        .iter()
        .map(|k| linalg::embed_operator(k, net.local_dims(), a))
        .collect::<Result<Vec<_>>>()?;
    let tau = net.initial_state().matrix();
    let mut perturbed = CMat::zeros(tau.nrows(), tau.ncols());
    for k in &lifted {
        perturbed += k * tau * k.adjoint();
    }
    let evo = NetworkEvolution::new(net, Propagator::for_network(net).unitary(t));
    Ok(evo.evolve_to_b(&perturbed))
}

/// Entrywise max distance between two Choi matrices.
pub fn choi_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.input_dim != b.input_dim || a.output_dim != b.output_dim {
        return Err(Error::DimensionMismatch("channels with different dimensions".into()));
    }
    Ok((a.choi() - b.choi()).camax())
}
