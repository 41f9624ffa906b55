//! JSON network configuration: parsing, validation, and conversion into the
//! core types.
//!
//! Complex matrices are `{"re": [[...]], "im": [[...]]}` with `im` optional.
//! Sites are referred to by their string ids; vertex indices follow the order
//! of the `sites` array.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use lrcap::channels::{self, Channel, Encoding};
use lrcap::linalg::{self, c, CMat, CVec, DensityMatrix};
use lrcap::lr::{self, LrParams};
use lrcap::network::{Graph, HamiltonianTerm, Partition, Region, SpinNetwork};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub sites: Vec<SiteConfig>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub hamiltonian: Vec<TermConfig>,
    pub partition: PartitionConfig,
    pub initial_state: InitialStateConfig,
    pub lr: LrConfig,
    pub encoding: EncodingConfig,
    pub time_grid: TimeGridConfig,
    #[serde(default)]
    pub chain_family: Option<ChainFamilyConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    pub id: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

/// Weighted Pauli string such as `{"ops": "XZ", "coeff": 0.5}`; qubit sites only.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliTerm {
    pub ops: String,
    pub coeff: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub support: Vec<String>,
    #[serde(default)]
    pub matrix: Option<MatrixJson>,
    #[serde(default)]
    pub paulis: Option<Vec<PauliTerm>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub a: Vec<String>,
    pub b: Vec<String>,
    #[serde(default)]
    pub c: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub site: String,
    #[serde(default)]
    pub vector: Option<VectorJson>,
    #[serde(default)]
    pub matrix: Option<MatrixJson>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    /// One factor per site, each a state vector or a density matrix.
    Product { factors: Vec<FactorConfig> },
    MaximallyMixed,
    /// Full density matrix in site order.
    Explicit { matrix: MatrixJson },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ZetaInput {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LrConfig {
    /// `zeta` may be `"auto_zeta"`; `dbar` defaults to the largest term diameter.
    FiniteRange { zeta: ZetaInput, #[serde(default)] dbar: Option<usize> },
    ExponentialDecay { c: f64, v: f64, mu: f64, s: f64 },
    PowerLaw { c: f64, v: f64, mu: f64, s: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausList {
    pub kraus: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncodingConfig {
    /// Memory left untouched; `memory_dim` defaults to `M_A`.
    Identity {
        #[serde(default)]
        memory_dim: Option<usize>,
    },
    Swap,
    /// Symbol `alpha` of the memory applies `maps[alpha]` to A.
    ClassicalList { maps: Vec<KrausList> },
    /// Kraus operators on `Q ⊗ A`.
    ExplicitKraus { memory_dim: usize, kraus: Vec<MatrixJson> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ChainInitial {
    MaximallyMixed,
    AllZero,
}

/// Path graphs `0 - 1 - ... - (n-1)` with A the first site, B the last, and a
/// uniform nearest-neighbour coupling.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFamilyConfig {
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    #[serde(default)]
    pub coupling: Option<MatrixJson>,
    #[serde(default)]
    pub coupling_paulis: Option<Vec<PauliTerm>>,
    pub lengths: Vec<usize>,
    pub t: f64,
    #[serde(default = "default_chain_initial")]
    pub initial: ChainInitial,
}

fn default_local_dim() -> usize {
    2
}

fn default_chain_initial() -> ChainInitial {
    ChainInitial::MaximallyMixed
}

/// Everything needed to evaluate bounds over a time grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub net: SpinNetwork,
    pub encoding: Encoding,
    pub lr: LrParams,
    pub times: Vec<f64>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Invalid { field: field.into(), message: message.into() }
}

fn core_err(field: &str) -> impl Fn(lrcap::Error) -> CliError + '_ {
    move |e| invalid(field, e.to_string())
}

/// Reads, parses and fully validates a configuration file.
pub fn load_config(path: &Path) -> Result<NetworkConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let cfg = parse_config(&text).map_err(|e| match e {
        CliError::Parse { line, column, message, .. } => {
            CliError::Parse { path: path.display().to_string(), line, column, message }
        }
        other => other,
    })?;
    Ok(cfg)
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<NetworkConfig, CliError> {
    let cfg: NetworkConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: "<input>".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.build()?;
    if cfg.chain_family.is_some() {
        cfg.chain_scenarios()?;
    }
    Ok(cfg)
}

fn matrix(json: &MatrixJson, field: &str) -> Result<CMat, CliError> {
    let rows = json.re.len();
    if rows == 0 {
        return Err(invalid(field, "matrix has no rows"));
    }
    let cols = json.re[0].len();
    if json.re.iter().any(|r| r.len() != cols) {
        return Err(invalid(field, "ragged rows in re"));
    }
    if let Some(im) = &json.im {
        if im.len() != rows || im.iter().any(|r| r.len() != cols) {
            return Err(invalid(field, format!("im must match re's {rows}x{cols} shape")));
        }
    }
    let m = CMat::from_fn(rows, cols, |r, col| {
        let im = json.im.as_ref().map_or(0.0, |im| im[r][col]);
        c(json.re[r][col], im)
    });
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid(field, "matrix entries must be finite"));
    }
    Ok(m)
}

fn vector(json: &VectorJson, field: &str) -> Result<CVec, CliError> {
    if let Some(im) = &json.im {
        if im.len() != json.re.len() {
            return Err(invalid(field, "im must match the length of re"));
        }
    }
    Ok(CVec::from_fn(json.re.len(), |k, _| c(json.re[k], json.im.as_ref().map_or(0.0, |im| im[k]))))
}

fn pauli_matrix(terms: &[PauliTerm], width: usize, field: &str) -> Result<CMat, CliError> {
    let d = 1usize << width;
    let mut total = CMat::zeros(d, d);
    for (k, term) in terms.iter().enumerate() {
        if term.ops.chars().count() != width {
            return Err(invalid(format!("{field}[{k}].ops"), format!("needs {width} Pauli letters, got {:?}", term.ops)));
        }
        let mut op = linalg::identity(1);
        for ch in term.ops.chars() {
            let p = match ch {
                'I' => linalg::identity(2),
                'X' => linalg::pauli_x(),
                'Y' => linalg::pauli_y(),
                'Z' => linalg::pauli_z(),
                other => return Err(invalid(format!("{field}[{k}].ops"), format!("unknown Pauli letter {other:?}"))),
            };
            op = linalg::kron(&op, &p);
        }
        total += op * c(term.coeff, 0.0);
    }
    Ok(total)
}

fn kraus_channel(list: &[MatrixJson], field: &str) -> Result<Channel, CliError> {
    let kraus = list
        .iter()
        .enumerate()
        .map(|(k, m)| matrix(m, &format!("{field}[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Channel::new(kraus).map_err(core_err(field))
}

fn linspace(grid: &TimeGridConfig) -> Result<Vec<f64>, CliError> {
    if grid.points == 0 {
        return Err(invalid("time_grid.points", "must be at least 1"));
    }
    if !grid.start.is_finite() || !grid.stop.is_finite() {
        return Err(invalid("time_grid", "start and stop must be finite"));
    }
    if grid.points == 1 {
        return Ok(vec![grid.start]);
    }
    let step = (grid.stop - grid.start) / (grid.points - 1) as f64;
    Ok((0..grid.points)
        .map(|k| if k + 1 == grid.points { grid.stop } else { grid.start + step * k as f64 })
        .collect())
}

fn max_term_diameter(net: &SpinNetwork) -> usize {
    net.terms()
        .iter()
        .filter_map(|t| net.graph().region_diameter(&t.support).ok().and_then(|d| d.finite()))
        .max()
        .unwrap_or(1)
        .max(1)
}

fn build_lr(cfg: &LrConfig, net: &SpinNetwork) -> Result<LrParams, CliError> {
    match cfg {
        LrConfig::FiniteRange { zeta, dbar } => {
            let zeta = match zeta {
                ZetaInput::Value(z) => *z,
                ZetaInput::Keyword(k) if k == "auto_zeta" => lr::heuristic_zeta(net).map_err(core_err("lr.zeta"))?,
                ZetaInput::Keyword(k) => {
                    return Err(invalid("lr.zeta", format!("expected a number or \"auto_zeta\", got {k:?}")))
                }
            };
            let dbar = dbar.unwrap_or_else(|| max_term_diameter(net));
            if !net.finite_range_check(dbar) {
                return Err(invalid("lr.dbar", format!("some Hamiltonian term has diameter larger than {dbar}")));
            }
            LrParams::finite_range(zeta, dbar).map_err(core_err("lr"))
        }
        LrConfig::ExponentialDecay { c, v, mu, s } => LrParams::exponential_decay(*c, *v, *mu, *s).map_err(core_err("lr")),
        LrConfig::PowerLaw { c, v, mu, s } => LrParams::power_law(*c, *v, *mu, *s).map_err(core_err("lr")),
    }
}

fn build_encoding(cfg: &EncodingConfig, m_a: usize) -> Result<Encoding, CliError> {
    match cfg {
        EncodingConfig::Identity { memory_dim } => {
            let mq = memory_dim.unwrap_or(m_a);
            if mq == 0 {
                return Err(invalid("encoding.memory_dim", "must be positive"));
            }
            Ok(Encoding::identity(mq, m_a))
        }
        EncodingConfig::Swap => channels::swap_encoding(m_a, m_a).map_err(core_err("encoding")),
        EncodingConfig::ClassicalList { maps } => {
            let chans = maps
                .iter()
                .enumerate()
                .map(|(k, m)| kraus_channel(&m.kraus, &format!("encoding.maps[{k}].kraus")))
                .collect::<Result<Vec<_>, _>>()?;
            let enc = channels::classical_encoding_family(&chans).map_err(core_err("encoding.maps"))?;
            if enc.a_dim() != m_a {
                return Err(invalid("encoding.maps", format!("maps act on dimension {}, but M_A = {m_a}", enc.a_dim())));
            }
            Ok(enc)
        }
        EncodingConfig::ExplicitKraus { memory_dim, kraus } => {
            let ch = kraus_channel(kraus, "encoding.kraus")?;
            Encoding::new(ch, *memory_dim, m_a).map_err(core_err("encoding.kraus"))
        }
    }
}

impl NetworkConfig {
    fn site_index(&self) -> Result<HashMap<&str, usize>, CliError> {
        let mut index = HashMap::new();
        for (k, s) in self.sites.iter().enumerate() {
            if s.dim == 0 {
                return Err(invalid(format!("sites[{k}].dim"), "must be positive"));
            }
            if index.insert(s.id.as_str(), k).is_some() {
                return Err(invalid(format!("sites[{k}].id"), format!("duplicate id {:?}", s.id)));
            }
        }
        if index.is_empty() {
            return Err(invalid("sites", "at least one site is required"));
        }
        Ok(index)
    }

    fn region(&self, index: &HashMap<&str, usize>, ids: &[String], field: &str) -> Result<Region, CliError> {
        let vertices = ids
            .iter()
            .map(|id| index.get(id.as_str()).copied().ok_or_else(|| invalid(field, format!("unknown site id {id:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Region::new(vertices).map_err(core_err(field))
    }

    fn initial_state(&self, index: &HashMap<&str, usize>, dims: &[usize]) -> Result<CMat, CliError> {
        match &self.initial_state {
            InitialStateConfig::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(dims.to_vec()).into_matrix()),
            InitialStateConfig::Explicit { matrix: m } => matrix(m, "initial_state.matrix"),
            InitialStateConfig::Product { factors } => {
                let mut per_site: Vec<Option<DensityMatrix>> = vec![None; dims.len()];
                for (k, f) in factors.iter().enumerate() {
                    let field = format!("initial_state.factors[{k}]");
                    let v = *index
                        .get(f.site.as_str())
                        .ok_or_else(|| invalid(&field, format!("unknown site id {:?}", f.site)))?;
                    let state = match (&f.vector, &f.matrix) {
                        (Some(vj), None) => {
                            let psi = vector(vj, &field)?;
                            let n = psi.norm();
                            if n == 0.0 {
                                return Err(invalid(&field, "zero state vector"));
                            }
                            DensityMatrix::pure(&(psi / c(n, 0.0)), vec![dims[v]]).map_err(core_err(&field))?
                        }
                        (None, Some(mj)) => DensityMatrix::new(matrix(mj, &field)?, vec![dims[v]]).map_err(core_err(&field))?,
                        _ => return Err(invalid(&field, "give exactly one of vector or matrix")),
                    };
                    if state.dim() != dims[v] {
                        return Err(invalid(&field, format!("site {:?} has dimension {}", f.site, dims[v])));
                    }
                    if per_site[v].replace(state).is_some() {
                        return Err(invalid(&field, format!("site {:?} listed twice", f.site)));
                    }
                }
                let factors = per_site
                    .into_iter()
                    .enumerate()
                    .map(|(v, s)| s.ok_or_else(|| invalid("initial_state.factors", format!("no factor for site {:?}", self.sites[v].id))))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(DensityMatrix::product(&factors).into_matrix())
            }
        }
    }

    /// Builds the network, encoding, envelope and time grid.
    pub fn build(&self) -> Result<Scenario, CliError> {
        let index = self.site_index()?;
        let dims: Vec<usize> = self.sites.iter().map(|s| s.dim).collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, [u, v]) in self.edges.iter().enumerate() {
            let field = format!("edges[{k}]");
            let look = |id: &String| index.get(id.as_str()).copied().ok_or_else(|| invalid(&field, format!("unknown site id {id:?}")));
            edges.push((look(u)?, look(v)?));
        }
        let graph = Graph::new(dims.len(), &edges).map_err(core_err("edges"))?;

        let mut terms = Vec::with_capacity(self.hamiltonian.len());
        for (k, t) in self.hamiltonian.iter().enumerate() {
            let field = format!("hamiltonian[{k}]");
            let support = self.region(&index, &t.support, &format!("{field}.support"))?;
            if support.len() != t.support.len() {
                return Err(invalid(format!("{field}.support"), "repeated site id"));
            }
            // the matrix acts on the support in the listed order; reorder to ascending vertices
            let listed: Vec<usize> = t.support.iter().map(|id| index[id.as_str()]).collect();
            let m = match (&t.matrix, &t.paulis) {
                (Some(mj), None) => matrix(mj, &format!("{field}.matrix"))?,
                (None, Some(p)) => {
                    if listed.iter().any(|&v| dims[v] != 2) {
                        return Err(invalid(format!("{field}.paulis"), "Pauli strings need qubit sites"));
                    }
                    pauli_matrix(p, listed.len(), &format!("{field}.paulis"))?
                }
                _ => return Err(invalid(&field, "give exactly one of matrix or paulis")),
            };
            let m = reorder_to_ascending(&m, &listed, &dims).map_err(|e| invalid(format!("{field}.matrix"), e))?;
            terms.push(HamiltonianTerm::new(support, m).map_err(core_err(&field))?);
        }

        let a = self.region(&index, &self.partition.a, "partition.a")?;
        let b = self.region(&index, &self.partition.b, "partition.b")?;
        let cc = self.region(&index, &self.partition.c, "partition.c")?;
        let partition = Partition::new(&graph, a, b, cc).map_err(core_err("partition"))?;
        let tau = self.initial_state(&index, &dims)?;
        let net = SpinNetwork::new(graph, dims, terms, partition, tau).map_err(core_err("network"))?;
        let lr = build_lr(&self.lr, &net)?;
        let encoding = build_encoding(&self.encoding, net.m_a())?;
        let times = linspace(&self.time_grid)?;
        Ok(Scenario { net, encoding, lr, times })
    }

    /// One scenario per chain length of `chain_family`, each at the family's time.
    pub fn chain_scenarios(&self) -> Result<Vec<(usize, Result<Scenario, CliError>)>, CliError> {
        let fam = self.chain_family.as_ref().ok_or_else(|| invalid("chain_family", "required for distance sweeps"))?;
        if fam.local_dim == 0 {
            return Err(invalid("chain_family.local_dim", "must be positive"));
        }
        let d = fam.local_dim;
        let coupling = match (&fam.coupling, &fam.coupling_paulis) {
            (Some(mj), None) => matrix(mj, "chain_family.coupling")?,
            (None, Some(p)) if d == 2 => pauli_matrix(p, 2, "chain_family.coupling_paulis")?,
            (None, Some(_)) => return Err(invalid("chain_family.coupling_paulis", "Pauli strings need local_dim 2")),
            _ => return Err(invalid("chain_family", "give exactly one of coupling or coupling_paulis")),
        };
        if coupling.shape() != (d * d, d * d) {
            return Err(invalid("chain_family.coupling", format!("must be {0}x{0}", d * d)));
        }
        linalg::ensure_hermitian(&coupling, linalg::HERMITIAN_TOL).map_err(core_err("chain_family.coupling"))?;
        if fam.lengths.is_empty() {
            return Err(invalid("chain_family.lengths", "needs at least one length"));
        }
        Ok(fam.lengths.iter().map(|&n| (n, self.chain_scenario(fam, &coupling, n))).collect())
    }

    fn chain_scenario(&self, fam: &ChainFamilyConfig, coupling: &CMat, n: usize) -> Result<Scenario, CliError> {
        let field = format!("chain_family.lengths[{n}]");
        if n < 2 {
            return Err(invalid(&field, "chains need at least 2 sites"));
        }
        let d = fam.local_dim;
        let graph = Graph::path(n).map_err(core_err(&field))?;
        let terms = (1..n)
            .map(|k| HamiltonianTerm::new(Region::new(vec![k - 1, k]).expect("distinct"), coupling.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(core_err(&field))?;
        let partition = Partition::new(
            &graph,
            Region::new(vec![0]).expect("single vertex"),
            Region::new(vec![n - 1]).expect("single vertex"),
            Region::new((1..n - 1).collect()).expect("distinct"),
        )
        .map_err(core_err(&field))?;
        let dims = vec![d; n];
        let total = d.checked_pow(n as u32).ok_or_else(|| invalid(&field, "dimension overflow"))?;
        let tau = match fam.initial {
            ChainInitial::MaximallyMixed => DensityMatrix::maximally_mixed(dims.clone()).into_matrix(),
            ChainInitial::AllZero => linalg::matrix_unit(total, 0, 0),
        };
        let net = SpinNetwork::new(graph, dims, terms, partition, tau).map_err(core_err(&field))?;
        let lr = build_lr(&self.lr, &net)?;
        let encoding = build_encoding(&self.encoding, net.m_a())?;
        Ok(Scenario { net, encoding, lr, times: vec![fam.t] })
    }
}

/// Permutes the tensor factors of `m` from the listed site order to ascending order.
fn reorder_to_ascending(m: &CMat, listed: &[usize], dims: &[usize]) -> Result<CMat, String> {
    let local: Vec<usize> = listed.iter().map(|&v| dims[v]).collect();
    let total: usize = local.iter().product();
    if m.shape() != (total, total) {
        return Err(format!("support needs a {total}x{total} matrix, got {:?}", m.shape()));
    }
    let mut order: Vec<usize> = (0..listed.len()).collect();
    order.sort_by_key(|&k| listed[k]);
    if order.iter().enumerate().all(|(i, &k)| i == k) {
        return Ok(m.clone());
    }
    // new index digits are the old digits taken in `order`
    let digits = |mut idx: usize, ds: &[usize]| {
        let mut out = vec![0; ds.len()];
        for k in (0..ds.len()).rev() {
            out[k] = idx % ds[k];
            idx /= ds[k];
        }
        out
    };
    let new_dims: Vec<usize> = order.iter().map(|&k| local[k]).collect();
    let map: Vec<usize> = (0..total)
        .map(|new_idx| {
            let nd = digits(new_idx, &new_dims);
            let mut old = vec![0; local.len()];
            for (pos, &k) in order.iter().enumerate() {
                old[k] = nd[pos];
            }
            old.iter().zip(&local).fold(0, |acc, (&dg, &dd)| acc * dd + dg)
        })
        .collect();
    Ok(CMat::from_fn(total, total, |r, col| m[(map[r], map[col])]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "sites": [{"id": "a", "dim": 2}, {"id": "c", "dim": 2}, {"id": "b", "dim": 2}],
        "edges": [["a", "c"], ["c", "b"]],
        "hamiltonian": [
            {"support": ["a", "c"], "paulis": [{"ops": "XX", "coeff": 1.0}, {"ops": "YY", "coeff": 1.0}, {"ops": "ZZ", "coeff": 1.0}]},
            {"support": ["c", "b"], "paulis": [{"ops": "XX", "coeff": 1.0}, {"ops": "YY", "coeff": 1.0}, {"ops": "ZZ", "coeff": 1.0}]}
        ],
        "partition": {"a": ["a"], "b": ["b"], "c": ["c"]},
        "initial_state": {"kind": "maximally_mixed"},
        "lr": {"kind": "finite_range", "zeta": "auto_zeta"},
        "encoding": {"kind": "swap"},
        "time_grid": {"start": 0.0, "stop": 0.05, "points": 3}
    }"#;

    fn with(replace: &str, by: &str) -> String {
        assert!(MINIMAL.contains(replace));
        MINIMAL.replace(replace, by)
    }

    #[test]
    fn minimal_chain_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        let s = cfg.build().unwrap();
        assert_eq!(s.net.total_dim(), 8);
        assert_eq!(s.times, vec![0.0, 0.025, 0.05]);
        assert_eq!(s.lr, LrParams::finite_range(6.0, 1).unwrap());
        assert_eq!(s.encoding.memory_dim(), 2);
    }

    #[test]
    fn overlapping_regions_are_rejected() {
        let err = parse_config(&with(r#""b": ["b"], "c": ["c"]"#, r#""b": ["b", "a"], "c": ["c"]"#)).unwrap_err();
        assert!(matches!(&err, CliError::Invalid { field, .. } if field == "partition"), "{err}");
    }

    #[test]
    fn non_hermitian_term_is_rejected() {
        let text = with(
            r#"{"support": ["a", "c"], "paulis": [{"ops": "XX", "coeff": 1.0}, {"ops": "YY", "coeff": 1.0}, {"ops": "ZZ", "coeff": 1.0}]}"#,
            r#"{"support": ["a"], "matrix": {"re": [[0, 1], [0, 0]]}}"#,
        );
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(&err, CliError::Invalid { field, .. } if field == "hamiltonian[0]"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_config("{\n  \"sites\": [,]\n}").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_ids_name_the_field() {
        let err = parse_config(&with(r#"["c", "b"]]"#, r#"["c", "z"]]"#)).unwrap_err();
        assert!(matches!(&err, CliError::Invalid { field, .. } if field == "edges[1]"), "{err}");
    }

    #[test]
    fn term_order_follows_listed_sites() {
        // Z on the first listed site, identity on the second; listing (c, a) puts Z on c
        let text = with(
            r#"{"support": ["a", "c"], "paulis": [{"ops": "XX", "coeff": 1.0}, {"ops": "YY", "coeff": 1.0}, {"ops": "ZZ", "coeff": 1.0}]}"#,
            r#"{"support": ["c", "a"], "paulis": [{"ops": "ZI", "coeff": 1.0}]}"#,
        );
        let s = parse_config(&text).unwrap().build().unwrap();
        let expected = linalg::kron(&linalg::identity(2), &linalg::pauli_z());
        assert!((&s.net.terms()[0].matrix - expected).norm() < 1e-15);
    }

    #[test]
    fn product_state_and_explicit_encoding() {
        let text = with(
            r#""initial_state": {"kind": "maximally_mixed"}"#,
            r#""initial_state": {"kind": "product", "factors": [
                {"site": "a", "vector": {"re": [1, 0]}},
                {"site": "b", "vector": {"re": [0, 1]}},
                {"site": "c", "matrix": {"re": [[0.5, 0], [0, 0.5]]}}]}"#,
        )
        .replace(
            r#""encoding": {"kind": "swap"}"#,
            r#""encoding": {"kind": "classical_list", "maps": [
                {"kraus": [{"re": [[1, 0], [0, 1]]}]},
                {"kraus": [{"re": [[0, 1], [1, 0]]}]}]}"#,
        );
        let s = parse_config(&text).unwrap().build().unwrap();
        assert!((s.net.initial_state().matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert_eq!(s.encoding.memory_dim(), 2);
    }

    #[test]
    fn chain_family_builds_each_length() {
        let text = with(
            r#""time_grid""#,
            r#""chain_family": {"coupling_paulis": [{"ops": "ZZ", "coeff": 1.0}], "lengths": [3, 4], "t": 0.01},
            "time_grid""#,
        );
        let cfg = parse_config(&text).unwrap();
        let chains = cfg.chain_scenarios().unwrap();
        assert_eq!(chains.len(), 2);
        assert_eq!(chains[1].1.as_ref().unwrap().net.total_dim(), 16);
    }

    #[test]
    fn reorder_matches_swap_conjugation() {
        let m = linalg::kron(&linalg::pauli_x(), &linalg::pauli_z());
        let swapped = reorder_to_ascending(&m, &[1, 0], &[2, 2]).unwrap();
        assert!((swapped - linalg::kron(&linalg::pauli_z(), &linalg::pauli_x())).norm() < 1e-15);
    }
}
