//! Dense primal-dual interior-point solver for small semidefinite programs.
//!
//! Problems are stated over complex Hermitian blocks as a maximization,
//! `max sum_k Re Tr[C_k W_k]` subject to linear constraints on the blocks and
//! `W_k >= 0`. Internally each block is mapped to the real symmetric embedding
//! `[[A, -B], [B, A]]` of `A + iB`, inequalities get 1x1 slack blocks, and a
//! Mehrotra predictor-corrector with Nesterov-Todd scaling solves the resulting
//! standard-form problem `min <C, X>, <A_i, X> = b_i, X >= 0`.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ONE};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 200;
/// Bound on the constraint residuals of a returned solution.
pub const FEASIBILITY_TOL: f64 = 1e-8;

type RMat = DMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Eq,
    /// `Re Tr[A W] <= b`
    Le,
    /// `Re Tr[A W] >= b`
    Ge,
}

/// Hermitian matrix stored as its nonzero entries, both triangles included.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseHermitian {
    pub fn new(dim: usize, entries: Vec<(usize, usize, C64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, col, v) in entries {
            if r >= dim || col >= dim {
                return Err(Error::InvalidProblem(format!("entry ({r}, {col}) outside a {dim}x{dim} block")));
            }
            *merged.entry((r, col)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        for (&(r, col), &v) in &merged {
            let partner = merged.get(&(col, r)).copied().unwrap_or_default();
            if (v - partner.conj()).norm() > 1e-12 * (1.0 + v.norm()) {
                return Err(Error::InvalidProblem(format!("coefficient matrix not Hermitian at ({r}, {col})")));
            }
        }
        let entries = merged.into_iter().filter(|(_, v)| v.norm() > 0.0).map(|((r, col), v)| (r, col, v)).collect();
        Ok(Self { dim, entries })
    }

    pub fn from_dense(m: &CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidProblem("coefficient matrix must be square".into()));
        }
        let mut entries = Vec::new();
        for col in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, col)].norm() > 0.0 {
                    entries.push((r, col, m[(r, col)]));
                }
            }
        }
        Self::new(m.nrows(), entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }
}

/// `sum_k Re Tr[A_k W_{block_k}]  (=, <=, >=)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, SparseHermitian)>,
    pub kind: ConstraintKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    objective: Vec<CMat>,
    constraints: Vec<LinearConstraint>,
}

impl SdpProblem {
    /// Problem with zero objective on blocks of the given sizes.
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::InvalidProblem("blocks must be non-empty".into()));
        }
        let objective = block_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        Ok(Self { block_dims, objective, constraints: Vec::new() })
    }

    pub fn set_objective(&mut self, block: usize, c_k: CMat) -> Result<()> {
        let n = *self.block_dims.get(block).ok_or_else(|| Error::InvalidProblem(format!("no block {block}")))?;
        if c_k.shape() != (n, n) {
            return Err(Error::InvalidProblem(format!("objective for block {block} must be {n}x{n}")));
        }
        crate::linalg::ensure_hermitian(&c_k, 1e-12).map_err(|e| Error::InvalidProblem(format!("objective: {e}")))?;
        self.objective[block] = c_k;
        Ok(())
    }

    pub fn add_constraint(&mut self, constraint: LinearConstraint) -> Result<()> {
        if !constraint.rhs.is_finite() {
            return Err(Error::InvalidProblem("constraint right-hand side must be finite".into()));
        }
        for (block, a) in &constraint.terms {
            let n = *self.block_dims.get(*block).ok_or_else(|| Error::InvalidProblem(format!("no block {block}")))?;
            if a.dim != n {
                return Err(Error::InvalidProblem(format!("coefficient of dimension {} on block {block} of size {n}", a.dim)));
            }
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn objective(&self) -> &[CMat] {
        &self.objective
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// `sum_k Re Tr[C_k W_k]`.
    pub fn objective_value(&self, blocks: &[CMat]) -> f64 {
        self.objective.iter().zip(blocks).map(|(ck, wk)| (ck * wk).trace().re).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_matrix: Vec<CMat>,
    pub iterations: usize,
    pub gap: f64,
    /// Largest absolute constraint residual of `primal_matrix`.
    pub residual: f64,
}

/// Standard-form real problem; constraint entries list both triangles.
struct RealSdp {
    dims: Vec<usize>,
    c: Vec<RMat>,
    a: Vec<Vec<(usize, usize, usize, f64)>>,
    b: DVector<f64>,
}

impl RealSdp {
    fn from_problem(p: &SdpProblem) -> Self {
        let mut dims: Vec<usize> = p.block_dims.iter().map(|n| 2 * n).collect();
        let mut c = p.objective.iter().map(|ck| embed(ck) * -0.5).collect::<Vec<_>>();
        let mut a = Vec::with_capacity(p.constraints.len());
        let mut b = Vec::with_capacity(p.constraints.len());
        for con in &p.constraints {
            let mut entries = Vec::new();
            for (block, coeff) in &con.terms {
                let n = p.block_dims[*block];
                for &(r, col, v) in &coeff.entries {
                    let (re, im) = (0.5 * v.re, 0.5 * v.im);
                    if re != 0.0 {
                        entries.push((*block, r, col, re));
                        entries.push((*block, r + n, col + n, re));
                    }
                    if im != 0.0 {
                        entries.push((*block, r, col + n, -im));
                        entries.push((*block, r + n, col, im));
                    }
                }
            }
            let sign = match con.kind {
                ConstraintKind::Eq => None,
                ConstraintKind::Le => Some(1.0),
                ConstraintKind::Ge => Some(-1.0),
            };
            if let Some(s) = sign {
                dims.push(1);
                c.push(RMat::zeros(1, 1));
                entries.push((dims.len() - 1, 0, 0, s));
            }
            a.push(entries);
            b.push(con.rhs);
        }
        Self { dims, c, a, b: DVector::from_vec(b) }
    }

    fn apply_a(&self, x: &[RMat]) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|row| row.iter().map(|&(k, r, col, v)| v * x[k][(r, col)]).sum()))
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<RMat> {
        let mut out: Vec<RMat> = self.dims.iter().map(|&n| RMat::zeros(n, n)).collect();
        for (row, &yi) in self.a.iter().zip(y.iter()) {
            for &(k, r, col, v) in row {
                out[k][(r, col)] += yi * v;
            }
        }
        out
    }

    fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`.
fn embed(m: &CMat) -> RMat {
    let n = m.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for col in 0..n {
        for r in 0..n {
            let v = m[(r, col)];
            out[(r, col)] = v.re;
            out[(r + n, col + n)] = v.re;
            out[(r, col + n)] = -v.im;
            out[(r + n, col)] = v.im;
        }
    }
    out
}

fn extract(y: &RMat, n: usize) -> CMat {
    CMat::from_fn(n, n, |r, col| {
        let re = 0.5 * (y[(r, col)] + y[(r + n, col + n)]);
        let im = 0.5 * (y[(r + n, col)] - y[(r, col + n)]);
        c(re, im)
    })
}

fn inner(x: &[RMat], s: &[RMat]) -> f64 {
    x.iter().zip(s).map(|(a, b)| a.dot(b)).sum()
}

fn sym(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

fn max_abs(blocks: &[RMat]) -> f64 {
    blocks.iter().map(|b| b.amax()).fold(0.0, f64::max)
}

/// Cholesky factor of a symmetric positive-definite matrix, with a tiny diagonal
/// shift if rounding has pushed it to the boundary.
fn chol_lower(m: &RMat) -> Option<RMat> {
    let sm = sym(m);
    if let Some(ch) = Cholesky::new(sm.clone()) {
        return Some(ch.l());
    }
    let scale = sm.diagonal().amax().max(1e-300);
    let mut shift = 1e-14 * scale;
    for _ in 0..6 {
        let shifted = &sm + RMat::identity(sm.nrows(), sm.nrows()) * shift;
        if let Some(ch) = Cholesky::new(shifted) {
            return Some(ch.l());
        }
        shift *= 100.0;
    }
    None
}

/// Nesterov-Todd scaling of one block: `W = G G^T`, `G^{-1} X G^{-T} = G^T S G = diag(sigma)`.
struct BlockScaling {
    g: RMat,
    g_inv: RMat,
    w: RMat,
    sigma: DVector<f64>,
}

impl BlockScaling {
    fn new(x: &RMat, s: &RMat) -> Option<Self> {
        let lx = chol_lower(x)?;
        let ls = chol_lower(s)?;
        let prod = ls.transpose() * &lx;
        let svd = SVD::new(prod, true, true);
        let v = svd.v_t?.transpose();
        let sigma = svd.singular_values;
        if sigma.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let inv_sqrt = DVector::from_iterator(sigma.len(), sigma.iter().map(|v| 1.0 / v.sqrt()));
        let sqrt = DVector::from_iterator(sigma.len(), sigma.iter().map(|v| v.sqrt()));
        let g = &lx * &v * RMat::from_diagonal(&inv_sqrt);
        let lx_inv = lx.clone().solve_lower_triangular(&RMat::identity(lx.nrows(), lx.nrows()))?;
        let g_inv = RMat::from_diagonal(&sqrt) * v.transpose() * lx_inv;
        let w = sym(&(&g * g.transpose()));
        Some(Self { g, g_inv, w, sigma })
    }
}

/// Largest step `alpha` with `x + alpha dx` positive semidefinite.
fn max_step(x: &RMat, dx: &RMat) -> f64 {
    let Some(l) = chol_lower(x) else { return 0.0 };
    let Some(li) = l.clone().solve_lower_triangular(&RMat::identity(l.nrows(), l.nrows())) else {
        return 0.0;
    };
    let m = sym(&(&li * dx * li.transpose()));
    let lambda_min = SymmetricEigen::new(m).eigenvalues.min();
    if lambda_min < 0.0 {
        -1.0 / lambda_min
    } else {
        f64::INFINITY
    }
}

struct Direction {
    dx: Vec<RMat>,
    dy: DVector<f64>,
    ds: Vec<RMat>,
}

struct Kernel<'a> {
    p: &'a RealSdp,
    scal: Vec<BlockScaling>,
    schur: Cholesky<f64, nalgebra::Dyn>,
}

impl<'a> Kernel<'a> {
    fn new(p: &'a RealSdp, x: &[RMat], s: &[RMat]) -> Option<Self> {
        let scal = x.iter().zip(s).map(|(xk, sk)| BlockScaling::new(xk, sk)).collect::<Option<Vec<_>>>()?;
        let m = p.a.len();
        let mut schur = RMat::zeros(m, m);
        for j in 0..m {
            let mut wajw: Vec<Option<RMat>> = vec![None; p.dims.len()];
            for &(k, r, col, v) in &p.a[j] {
                let w = &scal[k].w;
                let n = p.dims[k];
                let target = wajw[k].get_or_insert_with(|| RMat::zeros(n, n));
                target.ger(v, &w.column(r), &w.row(col).transpose(), 1.0);
            }
            for i in j..m {
                let mut acc = 0.0;
                for &(k, r, col, v) in &p.a[i] {
                    if let Some(bk) = &wajw[k] {
                        acc += v * bk[(r, col)];
                    }
                }
                schur[(i, j)] = acc;
                schur[(j, i)] = acc;
            }
        }
        let schur = match Cholesky::new(schur.clone()) {
            Some(ch) => ch,
            None => {
                let scale = schur.diagonal().amax().max(1e-300);
                let mut shift = 1e-13 * scale;
                loop {
                    let shifted = &schur + RMat::identity(m, m) * shift;
                    if let Some(ch) = Cholesky::new(shifted) {
                        break ch;
                    }
                    shift *= 100.0;
                    if shift > scale {
                        return None;
                    }
                }
            }
        };
        Some(Self { p, scal, schur })
    }

    /// Solves `A(dX) = rp`, `A*(dy) + dS = rd`, `dX + W dS W = r`.
    fn direction(&self, rp: &DVector<f64>, rd: &[RMat], r: &[RMat]) -> Direction {
        let shifted: Vec<RMat> = r
            .iter()
            .zip(rd)
            .zip(&self.scal)
            .map(|((rk, rdk), sc)| rk - &sc.w * rdk * &sc.w)
            .collect();
        let rhs = rp - self.p.apply_a(&shifted);
        let dy = self.schur.solve(&rhs);
        let aty = self.p.apply_at(&dy);
        let ds: Vec<RMat> = rd.iter().zip(&aty).map(|(a, b)| sym(&(a - b))).collect();
        let dx: Vec<RMat> = r
            .iter()
            .zip(&ds)
            .zip(&self.scal)
            .map(|((rk, dsk), sc)| sym(&(rk - &sc.w * dsk * &sc.w)))
            .collect();
        Direction { dx, dy, ds }
    }

    /// Right-hand side `G Rt G^T` of the scaled complementarity equation
    /// `L_V(Rt) = 2 (target I - V^2 - sym(dXt dSt))` with `V` diagonal.
    fn complementarity(&self, target: f64, corrector: Option<&Direction>) -> Vec<RMat> {
        self.scal
            .iter()
            .enumerate()
            .map(|(k, sc)| {
                let n = sc.sigma.len();
                let mut h = RMat::zeros(n, n);
                for i in 0..n {
                    h[(i, i)] = 2.0 * (target - sc.sigma[i] * sc.sigma[i]);
                }
                if let Some(d) = corrector {
                    let dxt = &sc.g_inv * &d.dx[k] * sc.g_inv.transpose();
                    let dst = sc.g.transpose() * &d.ds[k] * &sc.g;
                    h -= sym(&(dxt * dst)) * 2.0;
                }
                let rt = RMat::from_fn(n, n, |i, j| h[(i, j)] / (sc.sigma[i] + sc.sigma[j]));
                sym(&(&sc.g * rt * sc.g.transpose()))
            })
            .collect()
    }
}

fn step_lengths(x: &[RMat], s: &[RMat], d: &Direction) -> (f64, f64) {
    let ap = x.iter().zip(&d.dx).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
    let ad = s.iter().zip(&d.ds).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
    (ap, ad)
}

fn axpy(x: &[RMat], alpha: f64, dx: &[RMat]) -> Vec<RMat> {
    x.iter().zip(dx).map(|(a, b)| sym(&(a + b * alpha))).collect()
}

/// Solves `p` to an absolute duality gap of `tol` with constraint residuals
/// below [`FEASIBILITY_TOL`].
pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidProblem(format!("tolerance must be positive, got {tol}")));
    }
    let real = RealSdp::from_problem(p);
    let m = real.a.len();
    let n_total = real.total_dim() as f64;

    let mut x = Vec::with_capacity(real.dims.len());
    let mut s = Vec::with_capacity(real.dims.len());
    for (k, &n) in real.dims.iter().enumerate() {
        let mut a_norm = vec![0.0f64; m];
        for (i, row) in real.a.iter().enumerate() {
            for &(blk, _, _, v) in row {
                if blk == k {
                    a_norm[i] += v * v;
                }
            }
        }
        let root_n = (n as f64).sqrt();
        let mut xi: f64 = 10.0f64.max(root_n);
        let mut eta: f64 = 10.0f64.max(root_n).max(real.c[k].norm());
        for i in 0..m {
            let an = a_norm[i].sqrt();
            if an > 0.0 {
                xi = xi.max(n as f64 * (1.0 + real.b[i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        x.push(RMat::identity(n, n) * xi);
        s.push(RMat::identity(n, n) * eta);
    }
    let mut y = DVector::zeros(m);
    let blowup = 1e12 * (1.0 + max_abs(&x)) * (1.0 + max_abs(&s));

    let mut last_gap = f64::INFINITY;
    for iter in 0..MAX_ITERATIONS {
        let rp = &real.b - real.apply_a(&x);
        let aty = real.apply_at(&y);
        let rd: Vec<RMat> = real.c.iter().zip(&aty).zip(&s).map(|((ck, ak), sk)| ck - ak - sk).collect();
        let pobj = inner(&real.c, &x);
        let dobj = real.b.dot(&y);
        let gap = (pobj - dobj).abs();
        last_gap = gap;
        let p_inf = rp.amax();
        let d_inf = max_abs(&rd);
        if gap <= tol && p_inf <= FEASIBILITY_TOL && d_inf <= FEASIBILITY_TOL {
            return Ok(finish(p, &real, &x, &y, iter, gap));
        }
        if max_abs(&x) > blowup {
            return Err(Error::Infeasible("dual problem appears infeasible (primal iterates diverge)".into()));
        }
        if y.amax() > blowup || max_abs(&s) > blowup {
            return Err(Error::Infeasible("primal problem appears infeasible (dual iterates diverge)".into()));
        }
        let mu = inner(&x, &s) / n_total;
        let Some(kernel) = Kernel::new(&real, &x, &s) else {
            return Err(Error::NonConvergence { iterations: iter, gap });
        };

        let r_aff = kernel.complementarity(0.0, None);
        let pred = kernel.direction(&rp, &rd, &r_aff);
        let (ap, ad) = step_lengths(&x, &s, &pred);
        let (ap1, ad1) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = inner(&axpy(&x, ap1, &pred.dx), &axpy(&s, ad1, &pred.ds)) / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let r_corr = kernel.complementarity(sigma * mu, Some(&pred));
        let dir = kernel.direction(&rp, &rd, &r_corr);
        let (ap, ad) = step_lengths(&x, &s, &dir);
        let gamma = 0.9 + 0.09 * ap1.min(ad1);
        let alpha_p = (gamma * ap).min(1.0);
        let alpha_d = (gamma * ad).min(1.0);
        if alpha_p < 1e-12 && alpha_d < 1e-12 {
            return Err(Error::NonConvergence { iterations: iter, gap });
        }
        x = axpy(&x, alpha_p, &dir.dx);
        s = axpy(&s, alpha_d, &dir.ds);
        y += &dir.dy * alpha_d;
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, gap: last_gap })
}

fn finish(p: &SdpProblem, real: &RealSdp, x: &[RMat], y: &DVector<f64>, iterations: usize, gap: f64) -> SdpSolution {
    let primal_matrix: Vec<CMat> = p.block_dims.iter().zip(x).map(|(&n, xk)| extract(xk, n)).collect();
    let primal_value = p.objective_value(&primal_matrix);
    let dual_value = -real.b.dot(y);
    let mut residual = 0.0f64;
    for (i, con) in p.constraints.iter().enumerate() {
        let lhs: f64 = con
            .terms
            .iter()
            .map(|(k, a)| a.entries.iter().map(|&(r, col, v)| (v * primal_matrix[*k][(col, r)]).re).sum::<f64>())
            .sum();
        let slack = real.a[i]
            .iter()
            .filter(|&&(k, _, _, _)| k >= p.block_dims.len())
            .map(|&(k, _, _, v)| v * x[k][(0, 0)])
            .sum::<f64>();
        residual = residual.max((lhs + slack - con.rhs).abs());
    }
    SdpSolution { primal_value, dual_value, primal_matrix, iterations, gap, residual }
}

/// `½‖Δ‖_◇ = max Re Tr[J W]` over `0 <= W <= I_out ⊗ rho`, `rho >= 0`, `Tr rho = 1`,
/// for the Choi matrix `J` of a Hermiticity-preserving `Δ` in output ⊗ input order.
///
/// Blocks are `[W, Z, rho]`, with the operator inequality written as
/// `W + Z - I_out ⊗ rho = 0`.
pub fn build_diamond_program(choi_difference: &CMat, d_in: usize, d_out: usize) -> Result<SdpProblem> {
    let n = d_in * d_out;
    if choi_difference.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Choi matrix {:?} for a {d_in} -> {d_out} map",
            choi_difference.shape()
        )));
    }
    crate::linalg::ensure_hermitian(choi_difference, 1e-9)?;
    let herm = (choi_difference + choi_difference.adjoint()) * c(0.5, 0.0);
    let mut p = SdpProblem::new(vec![n, n, d_in])?;
    p.set_objective(0, herm)?;
    let half = c(0.5, 0.0);
    let ihalf = c(0.0, 0.5);
    for pr in 0..n {
        for q in pr..n {
            let (o1, i1) = (pr / d_in, pr % d_in);
            let (o2, i2) = (q / d_in, q % d_in);
            let patterns: Vec<Vec<(usize, usize, C64)>> = if pr == q {
                vec![vec![(pr, pr, ONE)]]
            } else {
                vec![
                    vec![(pr, q, half), (q, pr, half)],
                    vec![(pr, q, ihalf), (q, pr, -ihalf)],
                ]
            };
            for pat in patterns {
                let mut terms = vec![
                    (0, SparseHermitian::new(n, pat.clone())?),
                    (1, SparseHermitian::new(n, pat.clone())?),
                ];
                if o1 == o2 {
                    let rho_pat = pat
                        .iter()
                        .map(|&(r, _, v)| if r == pr { (i1, i2, -v) } else { (i2, i1, -v) })
                        .collect();
                    terms.push((2, SparseHermitian::new(d_in, rho_pat)?));
                }
                p.add_constraint(LinearConstraint { terms, kind: ConstraintKind::Eq, rhs: 0.0 })?;
            }
        }
    }
    let trace = SparseHermitian::new(d_in, (0..d_in).map(|i| (i, i, ONE)).collect())?;
    p.add_constraint(LinearConstraint { terms: vec![(2, trace)], kind: ConstraintKind::Eq, rhs: 1.0 })?;
    Ok(p)
}
