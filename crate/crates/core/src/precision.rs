//! Sparse precision estimation by partial-correlation screening, and diagonal truncation.
//!
//! For each node the estimator runs a greedy forward selection on empirical partial
//! correlations, optionally prunes the selected set, and refits the node regression on what
//! remains. The greedy order does not depend on the tuning parameters, so one selection
//! path per class serves a whole grid of `(q1, q2, delta_screen, L)` values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_row_major, SparseSym};
use crate::math;

pub use crate::linalg::log_det;

/// Tuning parameters of the screening estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcsConfig {
    /// Entry gate quantile.
    pub q1: f64,
    /// Retention gate quantile.
    pub q2: f64,
    /// Minimum absolute partial correlation for a stage to enter.
    pub delta_screen: f64,
    /// Maximum neighborhood size.
    pub l: usize,
    /// Ridge added to a node system that is numerically singular.
    pub ridge: f64,
    /// Base level for the gates; the family-wise level of the entry gate is `q1 * alpha0`.
    pub alpha0: f64,
}

impl Default for PcsConfig {
    fn default() -> Self {
        PcsConfig {
            q1: 0.5,
            q2: 0.5,
            delta_screen: 0.1,
            l: 30,
            ridge: 1e-8,
            alpha0: 0.05,
        }
    }
}

impl PcsConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("q1", self.q1), ("q2", self.q2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(name, format!("{v} is outside (0, 1]")));
            }
        }
        if self.l < 1 {
            return Err(invalid("L", "must be at least 1"));
        }
        if !(self.delta_screen >= 0.0 && self.delta_screen < 1.0) {
            return Err(invalid(
                "delta_screen",
                format!("{} is outside [0, 1)", self.delta_screen),
            ));
        }
        if !(self.ridge > 0.0) {
            return Err(invalid("ridge", "must be positive"));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0) {
            return Err(invalid("alpha0", "must be in (0, 1)"));
        }
        Ok(())
    }

    /// Minimum sample count accepted by the estimator.
    pub fn min_samples(&self) -> usize {
        10usize.max(2 * self.l)
    }

    /// Gate on the Fisher-z statistic for quantile `q` at dimension `p`.
    pub fn gate(&self, q: f64, p: usize) -> f64 {
        let pairs = (p as f64) * ((p as f64) - 1.0).max(1.0);
        math::normal_upper_quantile(q * self.alpha0 / pairs)
    }
}

/// A fitted sparse precision matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionEstimate {
    pub entries: SparseSym,
    /// Recovered off-diagonal support, `i < j`.
    pub support: Vec<(usize, usize)>,
    pub config: PcsConfig,
    /// Nodes whose regression needed the ridge fallback.
    pub fallback_nodes: Vec<usize>,
    /// Features with zero sample variance; their rows are set to the identity.
    pub constant_features: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct NodePath {
    order: Vec<usize>,
    stat: Vec<f64>,
    abs_rho: Vec<f64>,
    /// Row-major correlation matrix of `[node, order...]`.
    gram: Vec<f64>,
}

/// Greedy selection paths for every node, computed once per data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcsPath {
    n: usize,
    p: usize,
    sd: Vec<f64>,
    nodes: Vec<NodePath>,
    widest: PcsConfig,
}

const COLLINEAR_TOL: f64 = 1e-8;
const BLOCK: usize = 256;

fn standardize(data: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let (n, p) = data.shape();
    let mut z = data.clone();
    let mut sd = vec![0.0; p];
    for j in 0..p {
        let mut col = z.column_mut(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let mut ss = 0.0;
        for v in col.iter_mut() {
            *v -= mean;
            ss += *v * *v;
        }
        let s = math::sqrt(ss / (n as f64 - 1.0));
        sd[j] = s;
        // Scale so that z_j' z_k is the sample correlation.
        let f = if s > 0.0 { 1.0 / math::sqrt(ss) } else { 0.0 };
        for v in col.iter_mut() {
            *v *= f;
        }
    }
    (z, sd)
}

impl PcsPath {
    /// Run the selection for every node, stopping each path at the loosest limits of
    /// `widest` (largest `q1`, smallest `delta_screen`, largest `L`).
    pub fn build(data: &DMatrix<f64>, widest: &PcsConfig) -> Result<Self> {
        widest.validate()?;
        let (n, p) = data.shape();
        if n < widest.min_samples() {
            return Err(Error::TooFewSamples {
                needed: widest.min_samples(),
                have: n,
            });
        }
        let (z, sd) = standardize(data);
        let gate = widest.gate(widest.q1, p);
        let mut nodes = Vec::with_capacity(p);
        let mut start = 0;
        while start < p {
            let width = BLOCK.min(p - start);
            let block = z.columns(start, width).transpose() * &z;
            for b in 0..width {
                let i = start + b;
                let row: Vec<f64> = block.row(b).iter().copied().collect();
                nodes.push(select_node(&z, i, row, sd[i] > 0.0, &sd, gate, widest));
            }
            start += width;
        }
        Ok(PcsPath {
            n,
            p,
            sd,
            nodes,
            widest: *widest,
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    /// Assemble the estimate for one configuration at least as strict as the path limits.
    pub fn estimate(&self, config: &PcsConfig) -> Result<PrecisionEstimate> {
        config.validate()?;
        if config.l > self.widest.l
            || config.q1 > self.widest.q1
            || config.delta_screen < self.widest.delta_screen
            || config.alpha0 > self.widest.alpha0
        {
            return Err(invalid(
                "config",
                "looser than the limits the path was built with",
            ));
        }
        let (n, p) = (self.n, self.p);
        let gate1 = config.gate(config.q1, p);
        let gate2 = config.gate(config.q2, p);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
        let mut diag = vec![1.0; p];
        let mut fallback_nodes = Vec::new();
        let mut constant_features = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if !(self.sd[i] > 0.0) {
                constant_features.push(i);
                continue;
            }
            let mut k = 0;
            while k < node.order.len()
                && k < config.l
                && node.stat[k] >= gate1
                && node.abs_rho[k] >= config.delta_screen
            {
                k += 1;
            }
            let width = node.order.len() + 1;
            let g = |a: usize, b: usize| node.gram[a * width + b];
            // Retention: partial correlations given the rest of the selected set.
            let mut kept: Vec<usize> = (1..=k).collect();
            if k > 0 {
                let dim = k + 1;
                let mut sub = vec![0.0; dim * dim];
                for a in 0..dim {
                    for b in 0..dim {
                        sub[a * dim + b] = g(a, b);
                    }
                }
                let (prec, _) = spd_inverse(sub, dim, config.ridge);
                let df = n as f64 - k as f64 - 2.0;
                kept.retain(|&a| {
                    let r = -prec[a] / math::sqrt(prec[0] * prec[a * dim + a]);
                    df > 0.0 && fisher(r.abs(), df) >= gate2
                });
            }
            // Refit on the retained neighbors.
            let m = kept.len();
            let mut sigma2 = 1.0;
            let mut coef = Vec::new();
            if m > 0 {
                let mut a = vec![0.0; m * m];
                let mut rhs = vec![0.0; m];
                for (r, &ka) in kept.iter().enumerate() {
                    rhs[r] = g(ka, 0);
                    for (c, &kb) in kept.iter().enumerate() {
                        a[r * m + c] = g(ka, kb);
                    }
                }
                let (sol, used_ridge) = spd_solve(a, m, &rhs, config.ridge);
                if used_ridge {
                    fallback_nodes.push(i);
                }
                sigma2 = 1.0 - rhs.iter().zip(&sol).map(|(x, y)| x * y).sum::<f64>();
                if !(sigma2 > COLLINEAR_TOL) {
                    if !used_ridge {
                        fallback_nodes.push(i);
                    }
                    sigma2 = COLLINEAR_TOL;
                }
                coef = sol;
            }
            let si = self.sd[i];
            diag[i] = 1.0 / (sigma2 * si * si);
            for (&ka, &b) in kept.iter().zip(&coef) {
                let j = node.order[ka - 1];
                rows[i].push((j, -b / (sigma2 * si * self.sd[j])));
            }
        }
        // Symmetrize by averaging the two node-wise estimates.
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                entries.push((i.min(j), i.max(j), 0.5 * v));
            }
        }
        let entries = SparseSym::new(diag, entries)?;
        let mut support: Vec<(usize, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, _)| (i.min(j), i.max(j))))
            .collect();
        support.sort_unstable();
        support.dedup();
        Ok(PrecisionEstimate {
            entries,
            support,
            config: *config,
            fallback_nodes,
            constant_features,
        })
    }
}

fn fisher(abs_rho: f64, df: f64) -> f64 {
    math::atanh(abs_rho.min(1.0 - 1e-16)) * math::sqrt(df)
}

fn select_node(
    z: &DMatrix<f64>,
    i: usize,
    row_i: Vec<f64>,
    active: bool,
    sd: &[f64],
    gate: f64,
    widest: &PcsConfig,
) -> NodePath {
    let (n, p) = z.shape();
    let mut order = Vec::new();
    let mut stat = Vec::new();
    let mut abs_rho = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    if active {
        let mut in_set = vec![false; p];
        in_set[i] = true;
        let mut pc = row_i.clone();
        let mut pv = vec![1.0; p];
        let mut pvi = 1.0;
        let mut w_rows: Vec<Vec<f64>> = Vec::new();
        while order.len() < widest.l {
            let df = n as f64 - order.len() as f64 - 3.0;
            if df <= 0.0 || !(pvi > COLLINEAR_TOL) {
                break;
            }
            let mut best = usize::MAX;
            let mut best_r = -1.0;
            for j in 0..p {
                if in_set[j] || !(sd[j] > 0.0) || !(pv[j] > COLLINEAR_TOL) {
                    continue;
                }
                let r = (pc[j] / math::sqrt(pvi * pv[j])).abs();
                if r > best_r {
                    best_r = r;
                    best = j;
                }
            }
            if best == usize::MAX {
                break;
            }
            let s = fisher(best_r, df);
            if s < gate || best_r < widest.delta_screen {
                break;
            }
            let m = best;
            let col_m: Vec<f64> = z.tr_mul(&z.column(m)).iter().copied().collect();
            let root = math::sqrt(pv[m]);
            let mut w = col_m.clone();
            for wr in &w_rows {
                let f = wr[m];
                for (x, y) in w.iter_mut().zip(wr) {
                    *x -= f * y;
                }
            }
            for x in w.iter_mut() {
                *x /= root;
            }
            let wi = w[i];
            for j in 0..p {
                pv[j] -= w[j] * w[j];
                pc[j] -= wi * w[j];
            }
            pvi -= wi * wi;
            in_set[m] = true;
            order.push(m);
            stat.push(s);
            abs_rho.push(best_r);
            cols.push(col_m);
            w_rows.push(w);
        }
    }
    let width = order.len() + 1;
    let mut gram = vec![0.0; width * width];
    let members: Vec<usize> = core::iter::once(i).chain(order.iter().copied()).collect();
    gram[0] = 1.0;
    for a in 1..width {
        let col = &cols[a - 1];
        gram[a * width] = col[i];
        gram[a] = col[i];
        for (b, &mb) in members.iter().enumerate().skip(1) {
            gram[a * width + b] = if a == b { 1.0 } else { col[mb] };
        }
    }
    NodePath {
        order,
        stat,
        abs_rho,
        gram,
    }
}

/// Solve `A x = b` for symmetric `A`, adding `ridge * I` only if the plain factorization fails.
fn spd_solve(a: Vec<f64>, k: usize, b: &[f64], ridge: f64) -> (Vec<f64>, bool) {
    let (l, used) = factor_with_fallback(a, k, ridge);
    let mut x = b.to_vec();
    for i in 0..k {
        let mut s = x[i];
        for j in 0..i {
            s -= l[i * k + j] * x[j];
        }
        x[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = x[i];
        for j in i + 1..k {
            s -= l[j * k + i] * x[j];
        }
        x[i] = s / l[i * k + i];
    }
    (x, used)
}

fn spd_inverse(a: Vec<f64>, k: usize, ridge: f64) -> (Vec<f64>, bool) {
    let mut inv = vec![0.0; k * k];
    let (l, used) = factor_with_fallback(a, k, ridge);
    for c in 0..k {
        let mut x = vec![0.0; k];
        x[c] = 1.0;
        for i in 0..k {
            let mut s = x[i];
            for j in 0..i {
                s -= l[i * k + j] * x[j];
            }
            x[i] = s / l[i * k + i];
        }
        for i in (0..k).rev() {
            let mut s = x[i];
            for j in i + 1..k {
                s -= l[j * k + i] * x[j];
            }
            x[i] = s / l[i * k + i];
        }
        for r in 0..k {
            inv[r * k + c] = x[r];
        }
    }
    (inv, used)
}

fn factor_with_fallback(a: Vec<f64>, k: usize, ridge: f64) -> (Vec<f64>, bool) {
    if let Ok(l) = cholesky_row_major(a.clone(), k) {
        let min_pivot = (0..k).map(|i| l[i * k + i]).fold(f64::INFINITY, f64::min);
        if min_pivot * min_pivot > COLLINEAR_TOL {
            return (l, false);
        }
    }
    let mut lam = ridge;
    loop {
        let mut b = a.clone();
        for i in 0..k {
            b[i * k + i] += lam;
        }
        if let Ok(l) = cholesky_row_major(b, k) {
            return (l, true);
        }
        lam *= 10.0;
    }
}

/// Screening estimate of the precision matrix of `data` (`n x p`, rows are observations).
pub fn pcs_estimate(data: &DMatrix<f64>, config: &PcsConfig) -> Result<PrecisionEstimate> {
    PcsPath::build(data, config)?.estimate(config)
}

/// `T(M; t)`: zero every diagonal entry with `|M_ii| <= t`.
pub fn truncate_diagonal(m: &SparseSym, t: f64) -> SparseSym {
    m.map_diag(|d| if d.abs() <= t { 0.0 } else { d })
}

/// Dense version of [`truncate_diagonal`].
pub fn truncate_diagonal_dense(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    for i in 0..m.nrows().min(m.ncols()) {
        if out[(i, i)].abs() <= t {
            out[(i, i)] = 0.0;
        }
    }
    out
}

/// `sqrt(2 ln p / n)`.
pub fn single_band(p: usize, n: usize) -> f64 {
    math::sqrt(2.0 * math::ln(p as f64) / n as f64)
}

/// `T(M - I; band) + I` with the default band `sqrt(2 ln p / n)`.
pub fn adjust_single(omega_hat: &SparseSym, p: usize, n: usize) -> SparseSym {
    adjust_single_band(omega_hat, single_band(p, n))
}

/// `T(M - I; band) + I`: diagonals within `band` of one become exactly one.
pub fn adjust_single_band(omega_hat: &SparseSym, band: f64) -> SparseSym {
    omega_hat.map_diag(|d| if (d - 1.0).abs() <= band { 1.0 } else { d })
}

/// `T(M0 - M1; 2 sqrt(2 ln p / n))`.
pub fn diff_threshold(
    omega0_hat: &SparseSym,
    omega1_hat: &SparseSym,
    p: usize,
    n: usize,
) -> Result<SparseSym> {
    diff_threshold_at(omega0_hat, omega1_hat, 2.0 * single_band(p, n))
}

pub fn diff_threshold_at(
    omega0_hat: &SparseSym,
    omega1_hat: &SparseSym,
    t: f64,
) -> Result<SparseSym> {
    Ok(truncate_diagonal(&omega0_hat.sub(omega1_hat)?, t))
}
