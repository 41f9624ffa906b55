//! Spin networks: graph metric, A/B/C partition, local dimensions and the
//! Hamiltonian assembled from local terms.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, DensityMatrix};

/// Graph distance; `Unreachable` compares greater than every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Distance {
    Finite(usize),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    /// Real-valued view, infinity when unreachable.
    pub fn as_f64(self) -> f64 {
        match self {
            Distance::Finite(d) => d as f64,
            Distance::Unreachable => f64::INFINITY,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Unreachable => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Edges are unordered; duplicates are merged, self-loops rejected.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= vertex_count {
                    return Err(Error::InvalidVertex { index: x, count: vertex_count });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self { vertex_count, edges: normalized, adjacency })
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
        Self::new(n, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x >= self.vertex_count {
            Err(Error::InvalidVertex { index: x, count: self.vertex_count })
        } else {
            Ok(())
        }
    }

    /// BFS distances from `source` to every vertex.
    pub fn distances_from(&self, source: usize) -> Result<Vec<Distance>> {
        self.check_vertex(source)?;
        let mut dist = vec![Distance::Unreachable; self.vertex_count];
        dist[source] = Distance::Finite(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].finite().expect("queued vertices are reached");
            for &w in &self.adjacency[u] {
                if dist[w] == Distance::Unreachable {
                    dist[w] = Distance::Finite(du + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Least number of edges between `x` and `y`.
    pub fn shortest_path_distance(&self, x: usize, y: usize) -> Result<Distance> {
        self.check_vertex(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// `min { d(x, y) : x in X, y in Y }`.
    pub fn region_distance(&self, x: &Region, y: &Region) -> Result<Distance> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::EmptyRegion);
        }
        self.check_region(x)?;
        self.check_region(y)?;
        let mut best = Distance::Unreachable;
        for &u in x.vertices() {
            let dist = self.distances_from(u)?;
            for &v in y.vertices() {
                best = best.min(dist[v]);
            }
        }
        Ok(best)
    }

    /// `max { d(x, y) : x, y in X }`.
    pub fn region_diameter(&self, x: &Region) -> Result<Distance> {
        if x.is_empty() {
            return Err(Error::EmptyRegion);
        }
        self.check_region(x)?;
        let mut worst = Distance::Finite(0);
        for &u in x.vertices() {
            let dist = self.distances_from(u)?;
            for &v in x.vertices() {
                worst = worst.max(dist[v]);
            }
        }
        Ok(worst)
    }

    pub fn check_region(&self, x: &Region) -> Result<()> {
        for &v in x.vertices() {
            self.check_vertex(v)?;
        }
        Ok(())
    }
}

/// Sorted set of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRegion(format!("duplicate vertices in {vertices:?}")));
        }
        Ok(Self(vertices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        Region(v)
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.0.iter().any(|&v| other.contains(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    a: Region,
    b: Region,
    c: Region,
}

impl Partition {
    /// A and B must be non-empty and separated; A, B, C must tile the vertex set.
    pub fn new(graph: &Graph, a: Region, b: Region, c: Region) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidPartition("regions A and B must be non-empty".into()));
        }
        for r in [&a, &b, &c] {
            graph.check_region(r)?;
        }
        if a.intersects(&b) || a.intersects(&c) || b.intersects(&c) {
            return Err(Error::InvalidPartition("regions A, B, C must be pairwise disjoint".into()));
        }
        let covered = a.len() + b.len() + c.len();
        if covered != graph.vertex_count() {
            return Err(Error::InvalidPartition(format!(
                "regions cover {covered} of {} vertices",
                graph.vertex_count()
            )));
        }
        if graph.region_distance(&a, &b)? == Distance::Finite(0) {
            return Err(Error::InvalidPartition("d(A, B) must be positive".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &Region {
        &self.a
    }

    pub fn b(&self) -> &Region {
        &self.b
    }

    pub fn c(&self) -> &Region {
        &self.c
    }
}

/// A local Hamiltonian term `H_X`, acting on the vertices of `support` in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub support: Region,
    pub matrix: CMat,
}

impl HamiltonianTerm {
    pub fn new(support: Region, matrix: CMat) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidTerm("empty support".into()));
        }
        linalg::ensure_hermitian(&matrix, linalg::HERMITIAN_TOL)
            .map_err(|e| Error::InvalidTerm(format!("support {:?}: {e}", support.vertices())))?;
        Ok(Self { support, matrix })
    }

    fn check_against(&self, local_dims: &[usize]) -> Result<()> {
        let mut dim = 1usize;
        for &v in self.support.vertices() {
            let d = local_dims.get(v).ok_or(Error::InvalidVertex { index: v, count: local_dims.len() })?;
            dim *= d;
        }
        if self.matrix.shape() != (dim, dim) {
            return Err(Error::InvalidTerm(format!(
                "support {:?} needs a {dim}x{dim} matrix, got {:?}",
                self.support.vertices(),
                self.matrix.shape()
            )));
        }
        Ok(())
    }
}

/// Sum of terms, each embedded with the identity outside its support.
pub fn assemble_hamiltonian(local_dims: &[usize], terms: &[HamiltonianTerm]) -> Result<CMat> {
    let total: usize = local_dims.iter().product();
    let mut h = CMat::zeros(total, total);
    for term in terms {
        term.check_against(local_dims)?;
        h += linalg::embed_operator(&term.matrix, local_dims, term.support.vertices())?;
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct SpinNetwork {
    graph: Graph,
    local_dims: Vec<usize>,
    terms: Vec<HamiltonianTerm>,
    partition: Partition,
    initial_state: DensityMatrix,
}

impl SpinNetwork {
    pub fn new(
        graph: Graph,
        local_dims: Vec<usize>,
        terms: Vec<HamiltonianTerm>,
        partition: Partition,
        initial_state: CMat,
    ) -> Result<Self> {
        if local_dims.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} local dimensions for {} vertices",
                local_dims.len(),
                graph.vertex_count()
            )));
        }
        if local_dims.contains(&0) {
            return Err(Error::DimensionMismatch("local dimensions must be positive".into()));
        }
        for term in &terms {
            graph.check_region(&term.support)?;
            term.check_against(&local_dims)?;
        }
        let initial_state = DensityMatrix::new(initial_state, local_dims.clone())?;
        Ok(Self { graph, local_dims, terms, partition, initial_state })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    /// Copy of this network with a different initial state.
    pub fn with_initial_state(&self, state: CMat) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.local_dims.clone(),
            self.terms.clone(),
            self.partition.clone(),
            state,
        )
    }

    /// Product of local dimensions over `x`; 1 for the empty region.
    pub fn dimension_of(&self, x: &Region) -> usize {
        x.vertices().iter().map(|&v| self.local_dims[v]).product()
    }

    pub fn assemble_hamiltonian(&self) -> CMat {
        assemble_hamiltonian(&self.local_dims, &self.terms).expect("terms validated at construction")
    }

    /// True iff every term's support has diameter at most `dbar`.
    pub fn finite_range_check(&self, dbar: usize) -> bool {
        self.terms.iter().all(|t| {
            self.graph
                .region_diameter(&t.support)
                .map(|d| d <= Distance::Finite(dbar))
                .unwrap_or(false)
        })
    }

    /// d(A, B) for the configured partition.
    pub fn ab_distance(&self) -> Distance {
        self.graph
            .region_distance(&self.partition.a, &self.partition.b)
            .expect("partition regions validated")
    }

    pub fn m_a(&self) -> usize {
        self.dimension_of(&self.partition.a)
    }

    pub fn m_b(&self) -> usize {
        self.dimension_of(&self.partition.b)
    }

    pub fn m_c(&self) -> usize {
        self.dimension_of(&self.partition.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, pauli_z};

    fn region(v: &[usize]) -> Region {
        Region::new(v.to_vec()).unwrap()
    }

    #[test]
    fn shortest_paths() {
        let g = Graph::path(3).unwrap();
        assert_eq!(g.shortest_path_distance(0, 2).unwrap(), Distance::Finite(2));
        assert_eq!(g.shortest_path_distance(1, 1).unwrap(), Distance::Finite(0));
        let iso = Graph::new(2, &[]).unwrap();
        assert_eq!(iso.shortest_path_distance(0, 1).unwrap(), Distance::Unreachable);
        assert!(matches!(g.shortest_path_distance(0, 3), Err(Error::InvalidVertex { .. })));
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(2, &[(0, 0)]).is_err());
        assert!(Graph::new(2, &[(0, 2)]).is_err());
        assert_eq!(Graph::new(3, &[(1, 0), (0, 1)]).unwrap().edges(), &[(0, 1)]);
    }

    #[test]
    fn region_metrics() {
        let g = Graph::path(3).unwrap();
        assert_eq!(g.region_distance(&region(&[0]), &region(&[2])).unwrap(), Distance::Finite(2));
        assert_eq!(g.region_distance(&region(&[0, 1]), &region(&[1])).unwrap(), Distance::Finite(0));
        assert_eq!(g.region_distance(&region(&[0]), &region(&[1, 2])).unwrap(), Distance::Finite(1));
        assert_eq!(g.region_distance(&region(&[0]), &Region::empty()), Err(Error::EmptyRegion));
        assert_eq!(g.region_diameter(&region(&[1])).unwrap(), Distance::Finite(0));
        assert_eq!(g.region_diameter(&region(&[0, 2])).unwrap(), Distance::Finite(2));
        let split = Graph::new(3, &[(0, 1)]).unwrap();
        assert_eq!(split.region_diameter(&region(&[0, 2])).unwrap(), Distance::Unreachable);
        assert_eq!(g.region_diameter(&Region::empty()), Err(Error::EmptyRegion));
    }

    #[test]
    fn regions_reject_duplicates() {
        assert!(Region::new(vec![1, 0, 1]).is_err());
        assert_eq!(region(&[2, 0]).vertices(), &[0, 2]);
    }

    #[test]
    fn partition_validation() {
        let g = Graph::path(3).unwrap();
        assert!(Partition::new(&g, region(&[0]), region(&[2]), region(&[1])).is_ok());
        // overlapping
        assert!(Partition::new(&g, region(&[0, 1]), region(&[1, 2]), Region::empty()).is_err());
        // adjacent is fine, touching is not
        assert!(Partition::new(&g, region(&[0]), region(&[1]), region(&[2])).is_ok());
        // missing vertex
        assert!(Partition::new(&g, region(&[0]), region(&[2]), Region::empty()).is_err());
        assert!(Partition::new(&g, Region::empty(), region(&[2]), region(&[0, 1])).is_err());
    }

    fn qubits(n: usize, terms: Vec<HamiltonianTerm>) -> SpinNetwork {
        let g = Graph::path(n).unwrap();
        let p = Partition::new(
            &g,
            region(&[0]),
            region(&[n - 1]),
            Region::new((1..n - 1).collect()).unwrap(),
        )
        .unwrap();
        let d = 1 << n;
        SpinNetwork::new(g, vec![2; n], terms, p, CMat::identity(d, d) / c(d as f64, 0.0)).unwrap()
    }

    #[test]
    fn dimensions() {
        let net = qubits(3, vec![]);
        assert_eq!(net.dimension_of(&region(&[0, 1])), 4);
        assert_eq!(net.dimension_of(&Region::empty()), 1);
        let g = Graph::path(2).unwrap();
        let p = Partition::new(&g, region(&[0]), region(&[1]), Region::empty()).unwrap();
        let mixed = SpinNetwork::new(g, vec![2, 3], vec![], p, CMat::identity(6, 6) / c(6.0, 0.0)).unwrap();
        assert_eq!(mixed.dimension_of(&region(&[0, 1])), 6);
    }

    #[test]
    fn hamiltonian_assembly() {
        let empty = qubits(2, vec![]);
        assert_eq!(empty.assemble_hamiltonian(), CMat::zeros(4, 4));
        let z0 = HamiltonianTerm::new(region(&[0]), pauli_z()).unwrap();
        let net = qubits(2, vec![z0.clone()]);
        let diag: Vec<f64> = net.assemble_hamiltonian().diagonal().iter().map(|v| v.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        let z1 = HamiltonianTerm::new(region(&[1]), pauli_z() * c(0.5, 0.0)).unwrap();
        let both = qubits(2, vec![z0.clone(), z1.clone()]).assemble_hamiltonian();
        let sum = qubits(2, vec![z0]).assemble_hamiltonian() + qubits(2, vec![z1]).assemble_hamiltonian();
        assert!((both - sum).norm() < 1e-15);
    }

    #[test]
    fn term_validation() {
        assert!(HamiltonianTerm::new(region(&[0]), crate::linalg::matrix_unit(2, 0, 1)).is_err());
        let bad_dim = HamiltonianTerm::new(region(&[0, 1]), pauli_z()).unwrap();
        let g = Graph::path(2).unwrap();
        let p = Partition::new(&g, region(&[0]), region(&[1]), Region::empty()).unwrap();
        let err = SpinNetwork::new(g, vec![2, 2], vec![bad_dim.clone()], p, CMat::identity(4, 4) / c(4.0, 0.0));
        assert!(matches!(err, Err(Error::InvalidTerm(_))));
        assert!(assemble_hamiltonian(&[2, 2], &[bad_dim]).is_err());
    }

    #[test]
    fn finite_range() {
        let zz = crate::linalg::kron(&pauli_z(), &pauli_z());
        let nn = vec![
            HamiltonianTerm::new(region(&[0, 1]), zz.clone()).unwrap(),
            HamiltonianTerm::new(region(&[1, 2]), zz.clone()).unwrap(),
        ];
        assert!(qubits(3, nn).finite_range_check(1));
        let three = crate::linalg::kron(&zz, &pauli_z());
        let wide = vec![HamiltonianTerm::new(region(&[0, 1, 2]), three).unwrap()];
        assert!(!qubits(3, wide).finite_range_check(1));
        assert!(qubits(3, vec![]).finite_range_check(1));
    }
}
