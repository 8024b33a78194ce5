//! Symmetric NMF (`X ≈ H Hᵀ`) and orthogonal symmetric non-negative
//! tri-factorization (`X ≈ H S Hᵀ`, `HᵀH ≈ I`) by multiplicative updates.
//!
//! SNMF update:
//!
//! ```text
//! H ← H ⊙ (1/2 + 1/2 · (X H) / (H HᵀH + ε))
//! ```
//!
//! OSNTF sweep, `S` first and then `H`:
//!
//! ```text
//! S ← S ⊙ sqrt((HᵀX H) / (HᵀH S HᵀH + ε))
//! H ← H ⊙ sqrt((X H S) / (H HᵀX H S + ε))
//! ```
//!
//! `S` starts at `H₀ᵀ X H₀`. Orthogonality of `H` is never enforced; its
//! drift `‖HᵀH − I‖_F` is reported instead.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::matrix::DenseSymMatrix;
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NmfError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("initial factor entry ({row}, {col}) = {value} is not strictly positive; zero entries never move under multiplicative updates")]
    NonPositiveInit { row: usize, col: usize, value: f64 },
    #[error("input entry ({row}, {col}) = {value} is negative")]
    NegativeInput { row: usize, col: usize, value: f64 },
    #[error("update produced a non-finite value at iteration {iteration}; rescale the input")]
    NonFiniteUpdate { iteration: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("row {0} of the factor has no positive entry")]
    AllZeroRow(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `|f_prev − f| / f_prev` falls below this.
    pub rel_tol: f64,
    /// ε added to every update denominator.
    pub denom_guard: f64,
    /// Added to the indicator matrix when building `H₀` from a partition.
    pub init_offset: f64,
    /// When set, stop once `‖X − Ĥ‖_F / ‖X‖_F` drops below this value
    /// instead of testing the relative objective change.
    pub target_rel_residual: Option<f64>,
    /// Scale the SNMF start by the scalar that best fits `X` with
    /// `c · H₀H₀ᵀ`. Without it the first step from a unit-column start can
    /// raise the objective.
    pub rescale_init: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tol: 1e-6,
            denom_guard: 1e-12,
            init_offset: 0.2,
            target_rel_residual: None,
            rescale_init: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), NmfError> {
        let bad = |what: &str| Err(NmfError::InvalidConfig(what.to_string()));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad("rel_tol must lie in (0, 1)");
        }
        if !(self.denom_guard > 0.0 && self.denom_guard.is_finite()) {
            return bad("denom_guard must be positive");
        }
        if !(self.init_offset > 0.0 && self.init_offset.is_finite()) {
            return bad("init_offset must be positive");
        }
        if let Some(t) = self.target_rel_residual {
            if !(t > 0.0) {
                return bad("target_rel_residual must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub h: DMatrix<f64>,
    /// Present for OSNTF only.
    pub s: Option<DMatrix<f64>>,
    /// `‖X − H S Hᵀ‖_F` (or `‖X − H Hᵀ‖_F`) at the start and after every
    /// iteration, so it has `iterations + 1` entries.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// `‖HᵀH − I‖_F`, OSNTF only.
    pub orthogonality_drift: Option<f64>,
    pub converged: bool,
}

impl Factorization {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial objective")
    }

    /// Largest step-to-step increase of the objective, relative to the
    /// value before the step; 0 when the trace never rises.
    pub fn max_relative_increase(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else { w[1] - w[0] })
            .fold(0.0, f64::max)
    }

    /// `H S Hᵀ`, or `H Hᵀ` without `S`.
    pub fn reconstruction(&self) -> DMatrix<f64> {
        reconstruct(&self.h, self.s.as_ref())
    }
}

fn reconstruct(h: &DMatrix<f64>, s: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    match s {
        Some(s) => (h * s) * h.transpose(),
        None => h * h.transpose(),
    }
}

fn residual(x: &DMatrix<f64>, h: &DMatrix<f64>, s: Option<&DMatrix<f64>>) -> f64 {
    (x - reconstruct(h, s)).norm()
}

pub fn orthogonality_drift(h: &DMatrix<f64>) -> f64 {
    let k = h.ncols();
    (h.transpose() * h - DMatrix::identity(k, k)).norm()
}

fn check_inputs(x: &DenseSymMatrix, k: usize, h0: &DMatrix<f64>, cfg: &SolverConfig) -> Result<(), NmfError> {
    cfg.validate()?;
    if k == 0 || h0.nrows() != x.n() || h0.ncols() != k {
        return Err(NmfError::DimensionMismatch(format!(
            "x is {n}×{n}, k = {k}, h0 is {}×{}",
            h0.nrows(),
            h0.ncols(),
            n = x.n()
        )));
    }
    let m = x.as_matrix();
    for col in 0..m.ncols() {
        for row in 0..m.nrows() {
            let value = m[(row, col)];
            if !(value >= 0.0) {
                return Err(NmfError::NegativeInput { row, col, value });
            }
        }
    }
    for col in 0..k {
        for row in 0..h0.nrows() {
            let value = h0[(row, col)];
            if !(value > 0.0 && value.is_finite()) {
                return Err(NmfError::NonPositiveInit { row, col, value });
            }
        }
    }
    Ok(())
}

struct Stopper<'a> {
    cfg: &'a SolverConfig,
    x_norm: f64,
}

impl Stopper<'_> {
    fn done(&self, prev: f64, current: f64) -> bool {
        match self.cfg.target_rel_residual {
            Some(target) => current <= target * self.x_norm,
            None => prev <= 0.0 || (prev - current).abs() / prev < self.cfg.rel_tol,
        }
    }
}

fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Symmetric NMF of a non-negative symmetric `x` from a strictly positive
/// start `h0` (`N × k`).
pub fn snmf(x: &DenseSymMatrix, k: usize, h0: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Factorization, NmfError> {
    check_inputs(x, k, h0, cfg)?;
    let x = x.as_matrix();
    let mut h = h0.clone();
    if cfg.rescale_init {
        let hht = &h * h.transpose();
        let fit = x.dot(&hht);
        let scale = hht.norm_squared();
        if fit > 0.0 && scale > 0.0 {
            h *= (fit / scale).sqrt();
        }
    }
    let stopper = Stopper { cfg, x_norm: x.norm() };
    let mut trace = vec![residual(x, &h, None)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        snmf_step(x, &mut h, cfg.denom_guard);
        iterations += 1;
        if !all_finite(&h) {
            return Err(NmfError::NonFiniteUpdate { iteration: iterations });
        }
        let objective = residual(x, &h, None);
        let prev = *trace.last().unwrap();
        trace.push(objective);
        if stopper.done(prev, objective) {
            converged = true;
            break;
        }
    }
    Ok(Factorization {
        h,
        s: None,
        objective_trace: trace,
        iterations,
        orthogonality_drift: None,
        converged,
    })
}

/// Orthogonal symmetric non-negative tri-factorization of `x` from a
/// strictly positive start `h0` (`N × k`).
pub fn osntf(x: &DenseSymMatrix, k: usize, h0: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Factorization, NmfError> {
    check_inputs(x, k, h0, cfg)?;
    let x = x.as_matrix();
    let eps = cfg.denom_guard;
    let mut h = h0.clone();
    let mut s = h.transpose() * (x * &h);
    symmetrize(&mut s);
    let stopper = Stopper { cfg, x_norm: x.norm() };
    let mut trace = vec![residual(x, &h, Some(&s))];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        osntf_step(x, &mut h, &mut s, eps);
        iterations += 1;
        if !all_finite(&h) || !all_finite(&s) {
            return Err(NmfError::NonFiniteUpdate { iteration: iterations });
        }
        let objective = residual(x, &h, Some(&s));
        let prev = *trace.last().unwrap();
        trace.push(objective);
        if stopper.done(prev, objective) {
            converged = true;
            break;
        }
    }
    let drift = orthogonality_drift(&h);
    Ok(Factorization {
        h,
        s: Some(s),
        objective_trace: trace,
        iterations,
        orthogonality_drift: Some(drift),
        converged,
    })
}

fn snmf_step(x: &DMatrix<f64>, h: &mut DMatrix<f64>, eps: f64) {
    let xh = x * &*h;
    let denom = &*h * (h.transpose() * &*h);
    h.zip_zip_apply(&xh, &denom, |hv, num, den| {
        *hv *= 0.5 + 0.5 * num / (den + eps);
    });
}

fn osntf_step(x: &DMatrix<f64>, h: &mut DMatrix<f64>, s: &mut DMatrix<f64>, eps: f64) {
    let hth = h.transpose() * &*h;
    let xh = x * &*h;
    let htxh = h.transpose() * &xh;

    let s_denom = &hth * &*s * &hth;
    s.zip_zip_apply(&htxh, &s_denom, |sv, num, den| {
        *sv *= (num / (den + eps)).sqrt();
    });
    symmetrize(s);

    let xhs = &xh * &*s;
    let h_denom = &*h * (&htxh * &*s);
    h.zip_zip_apply(&xhs, &h_denom, |hv, num, den| {
        *hv *= (num / (den + eps)).sqrt();
    });
}

fn symmetrize(s: &mut DMatrix<f64>) {
    let k = s.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let mean = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = mean;
            s[(j, i)] = mean;
        }
    }
}

/// Node `i` goes to the column holding the largest entry of row `i`; ties go
/// to the smallest column.
pub fn assign_communities(h: &DMatrix<f64>) -> Result<Partition, NmfError> {
    if h.ncols() == 0 {
        return Err(NmfError::DimensionMismatch("factor has no columns".into()));
    }
    let labels = (0..h.nrows())
        .map(|i| row_argmax(h, i).ok_or(NmfError::AllZeroRow(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Partition::new(labels))
}

/// As [`assign_communities`], but rows without a positive entry go to
/// community 0. The simulation harness uses this for isolated nodes.
pub fn assign_communities_or_zero(h: &DMatrix<f64>) -> Partition {
    Partition::new((0..h.nrows()).map(|i| row_argmax(h, i).unwrap_or(0)).collect())
}

fn row_argmax(h: &DMatrix<f64>, i: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..h.ncols() {
        let v = h[(i, j)];
        if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j)
}

/// `‖Hᵀ X H‖_F`. For `H` with orthonormal columns,
/// `‖X − H(HᵀXH)Hᵀ‖_F² = ‖X‖_F² − ‖HᵀXH‖_F²`, so maximizing this value is
/// the same as minimizing the tri-factorization residual.
pub fn osntf_objective(x: &DenseSymMatrix, h: &DMatrix<f64>) -> Result<f64, NmfError> {
    if h.nrows() != x.n() {
        return Err(NmfError::DimensionMismatch(format!(
            "x is {n}×{n}, h has {} rows",
            h.nrows(),
            n = x.n()
        )));
    }
    Ok((h.transpose() * x.as_matrix() * h).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactnessReport {
    /// `‖X − H S Hᵀ‖_F` (`S` omitted for SNMF).
    pub residual: f64,
    pub relative_residual: f64,
    /// `‖HᵀH − I‖_F`; only meaningful for OSNTF factors.
    pub orthogonality_drift: f64,
    /// Fraction of rows whose second-largest entry is below `1e-6` times the
    /// largest; an exact OSNTF factor scores 1.
    pub row_sparsity: f64,
}

pub fn exactness_diagnostics(x: &DenseSymMatrix, f: &Factorization) -> ExactnessReport {
    let res = residual(x.as_matrix(), &f.h, f.s.as_ref());
    let x_norm = x.frobenius_norm();
    ExactnessReport {
        residual: res,
        relative_residual: if x_norm > 0.0 { res / x_norm } else { res },
        orthogonality_drift: orthogonality_drift(&f.h),
        row_sparsity: row_sparsity(&f.h),
    }
}

pub fn row_sparsity(h: &DMatrix<f64>) -> f64 {
    if h.nrows() == 0 {
        return 1.0;
    }
    let sparse = h
        .row_iter()
        .filter(|row| {
            let mut values: Vec<f64> = row.iter().copied().collect();
            values.sort_by(|a, b| b.total_cmp(a));
            match values.as_slice() {
                [] | [_] => true,
                [largest, second, ..] => *largest > 0.0 && *second < 1e-6 * largest,
            }
        })
        .count();
    sparse as f64 / h.nrows() as f64
}

/// One matrix row per line, entries separated by single spaces, written
/// with enough digits to round-trip exactly.
pub fn write_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v:e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(text: &str) -> Result<DMatrix<f64>, NmfError> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|w| w.parse::<f64>().map_err(|_| NmfError::DimensionMismatch(format!("bad entry {w:?}"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(NmfError::DimensionMismatch("rows have different lengths".into()));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}
