//! The rare-and-weak signal model: parameters, generators and theoretical regions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{BlockCholesky, SparseSym};
use crate::math;

/// Exponent parameterization of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArwParams {
    pub p: usize,
    pub delta: f64,
    pub zeta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Prior `P(Y = 1)`.
    pub q: f64,
}

fn open_unit(name: &'static str, v: f64, hi: f64) -> Result<()> {
    if v > 0.0 && v < hi {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} is outside (0, {hi})")))
    }
}

impl ArwParams {
    /// Validated constructor with `q = 0.5`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: usize,
        delta: f64,
        zeta: f64,
        theta: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
    ) -> Result<Self> {
        let params = ArwParams {
            p,
            delta,
            zeta,
            theta,
            alpha,
            beta,
            gamma,
            q: 0.5,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_q(mut self, q: f64) -> Result<Self> {
        self.q = q;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(invalid("p", "must be positive"));
        }
        open_unit("delta", self.delta, 1.0)?;
        open_unit("zeta", self.zeta, 1.0)?;
        open_unit("theta", self.theta, 1.0)?;
        open_unit("alpha", self.alpha, 1.0)?;
        open_unit("beta", self.beta, 2.0)?;
        open_unit("gamma", self.gamma, 1.0)?;
        open_unit("q", self.q, 1.0)?;
        if !(self.beta > 1.0 - 2.0 * self.alpha) {
            return Err(invalid(
                "beta",
                format!(
                    "beta = {} must exceed 1 - 2 alpha = {}",
                    self.beta,
                    1.0 - 2.0 * self.alpha
                ),
            ));
        }
        Ok(())
    }

    /// `2 - 2 alpha - beta`.
    pub fn kappa1(&self) -> f64 {
        2.0 - 2.0 * self.alpha - self.beta
    }

    /// `1 - 2 theta - zeta`.
    pub fn kappa2(&self) -> f64 {
        1.0 - 2.0 * self.theta - self.zeta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa1().max(self.kappa2())
    }

    pub fn rho(&self) -> f64 {
        rho_branch(self.zeta, self.delta)
    }
}

/// Scales implied by the exponents at a given `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSet {
    pub n: usize,
    pub eps: f64,
    pub tau: f64,
    pub eta: f64,
    pub nu: f64,
    pub xi: f64,
}

impl ScaleSet {
    /// Construct directly. Scales may be anywhere in `[0, 1]`, which allows degenerate
    /// models (no signals, full support) for testing.
    pub fn new(n: usize, eps: f64, tau: f64, eta: f64, nu: f64, xi: f64) -> Result<Self> {
        let s = ScaleSet {
            n,
            eps,
            tau,
            eta,
            nu,
            xi,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", format!("{} is below 2", self.n)));
        }
        for (name, v) in [
            ("eps", self.eps),
            ("tau", self.tau),
            ("eta", self.eta),
            ("nu", self.nu),
            ("xi", self.xi),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("{v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// `n = round(p^delta)` and the five scales `p^{-exponent}`.
pub fn derive_scales(params: &ArwParams) -> Result<ScaleSet> {
    params.validate()?;
    if params.p < 4 {
        return Err(invalid("p", format!("{} is below 4", params.p)));
    }
    let p = params.p as f64;
    let pw = |e: f64| math::powf(p, -e);
    let n = math::round(math::powf(p, params.delta)) as usize;
    ScaleSet::new(
        n,
        pw(params.zeta),
        pw(params.theta),
        pw(params.alpha),
        pw(params.beta),
        pw(params.gamma),
    )
}

/// Mean vector with all nonzero entries equal to `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector {
    pub values: Vec<f64>,
    pub support: Vec<usize>,
}

impl MeanVector {
    pub fn zeros(p: usize) -> Self {
        MeanVector {
            values: vec![0.0; p],
            support: Vec::new(),
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        let support = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        MeanVector { values, support }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn negated(&self) -> Vec<f64> {
        self.values.iter().map(|v| -v).collect()
    }
}

/// Each entry is `tau` with probability `eps`, else zero.
pub fn sample_mu<R: Rng + ?Sized>(scales: &ScaleSet, p: usize, rng: &mut R) -> MeanVector {
    let mut values = vec![0.0; p];
    let mut support = Vec::new();
    for (i, v) in values.iter_mut().enumerate() {
        if rng.random::<f64>() < scales.eps {
            *v = scales.tau;
            support.push(i);
        }
    }
    MeanVector { values, support }
}

/// How the diagonal of a generated precision matrix is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalLaw {
    /// Every diagonal entry is `1 + xi`.
    #[default]
    Fixed,
    /// Each diagonal entry is `1 + xi` or `1 - xi` with probability one half.
    RandomSign,
}

/// Generator policy knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    pub diagonal: DiagonalLaw,
    /// Draws attempted before a non-positive-definite precision matrix is an error.
    pub max_pd_attempts: usize,
    /// Label draws attempted before an empty class is an error.
    pub max_label_attempts: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            diagonal: DiagonalLaw::Fixed,
            max_pd_attempts: 20,
            max_label_attempts: 100,
        }
    }
}

/// A symmetric positive definite precision matrix with a sparse off-diagonal pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionMatrix {
    matrix: SparseSym,
}

impl PrecisionMatrix {
    /// Wrap a matrix after checking positive definiteness.
    pub fn new(matrix: SparseSym) -> Result<Self> {
        matrix.cholesky()?;
        Ok(PrecisionMatrix { matrix })
    }

    pub fn identity(p: usize) -> Self {
        PrecisionMatrix {
            matrix: SparseSym::identity(p),
        }
    }

    pub fn entries(&self) -> &SparseSym {
        &self.matrix
    }

    pub fn into_inner(self) -> SparseSym {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn offdiag_support(&self) -> Vec<(usize, usize)> {
        self.matrix.offdiag_support()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }
}

/// Draw the off-diagonal part `V`: each pair present with probability `nu`, value `±eta`.
pub fn sample_offdiag<R: Rng + ?Sized>(
    eta: f64,
    nu: f64,
    p: usize,
    rng: &mut R,
) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    if p < 2 || nu <= 0.0 {
        return out;
    }
    let total = p * (p - 1) / 2;
    // Skip ahead by geometric gaps over the linearized upper triangle.
    let log_q = libm::log1p(-nu.min(1.0));
    let (mut row, mut row_start) = (0usize, 0usize);
    let mut k = 0usize;
    loop {
        let gap = if nu >= 1.0 {
            0
        } else {
            let u: f64 = 1.0 - rng.random::<f64>();
            let g = math::floor(math::ln(u) / log_q);
            if g >= total as f64 {
                break;
            }
            g as usize
        };
        k = match k.checked_add(gap) {
            Some(v) if v < total => v,
            _ => break,
        };
        while k >= row_start + (p - 1 - row) {
            row_start += p - 1 - row;
            row += 1;
        }
        let col = row + 1 + (k - row_start);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        out.push((row, col, sign * eta));
        k += 1;
        if k >= total {
            break;
        }
    }
    out
}

fn draw_precision<R: Rng + ?Sized>(
    scales: &ScaleSet,
    p: usize,
    options: &ModelOptions,
    rng: &mut R,
) -> SparseSym {
    let diag: Vec<f64> = match options.diagonal {
        DiagonalLaw::Fixed => vec![1.0 + scales.xi; p],
        DiagonalLaw::RandomSign => (0..p)
            .map(|_| {
                if rng.random::<bool>() {
                    1.0 + scales.xi
                } else {
                    1.0 - scales.xi
                }
            })
            .collect(),
    };
    let off = sample_offdiag(scales.eta, scales.nu, p, rng);
    SparseSym::new(diag, off).expect("generated indices are in range")
}

/// Draw `Omega = D + V`, resampling while the draw is not positive definite.
pub fn sample_precision<R: Rng + ?Sized>(
    scales: &ScaleSet,
    p: usize,
    rng: &mut R,
) -> Result<PrecisionMatrix> {
    sample_precision_with(scales, p, &ModelOptions::default(), rng)
}

pub fn sample_precision_with<R: Rng + ?Sized>(
    scales: &ScaleSet,
    p: usize,
    options: &ModelOptions,
    rng: &mut R,
) -> Result<PrecisionMatrix> {
    for _ in 0..options.max_pd_attempts.max(1) {
        let m = draw_precision(scales, p, options, rng);
        if m.cholesky().is_ok() {
            return Ok(PrecisionMatrix { matrix: m });
        }
    }
    Err(Error::PositiveDefiniteRejected {
        attempts: options.max_pd_attempts.max(1),
    })
}

/// Labeled sample. `x` is `n x p`, one observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DMatrix<f64>,
    pub y: Vec<u8>,
    pub n0: usize,
    pub n1: usize,
}

impl LabeledDataset {
    /// Labels must be 0 or 1. A single-class dataset is representable; the training
    /// routines reject it.
    pub fn new(x: DMatrix<f64>, y: Vec<u8>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(invalid("y", format!("label {bad} is not 0 or 1")));
        }
        let n1 = y.iter().filter(|&&v| v == 1).count();
        let n0 = y.len() - n1;
        Ok(LabeledDataset { x, y, n0, n1 })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::MissingClass { class: 0 });
        }
        if self.n1 == 0 {
            return Err(Error::MissingClass { class: 1 });
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn class_indices(&self, k: u8) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.y[i] == k).collect()
    }

    /// Rows of class `k` as their own matrix.
    pub fn class_matrix(&self, k: u8) -> DMatrix<f64> {
        self.x.select_rows(self.class_indices(k).iter())
    }

    /// Per-feature sample mean of class `k`.
    pub fn class_mean(&self, k: u8) -> Vec<f64> {
        let idx = self.class_indices(k);
        let m = idx.len().max(1) as f64;
        (0..self.p())
            .map(|j| idx.iter().map(|&i| self.x[(i, j)]).sum::<f64>() / m)
            .collect()
    }

    /// Subset of rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        let x = self.x.select_rows(rows.iter());
        let y = rows.iter().map(|&i| self.y[i]).collect();
        LabeledDataset::new(x, y).expect("subset of a valid dataset")
    }
}

/// Draws from `N(mean, Omega^{-1})` with the factorization of `Omega` computed once.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: Vec<f64>,
    factor: BlockCholesky,
}

impl GaussianSampler {
    pub fn new(mean: Vec<f64>, omega: &SparseSym) -> Result<Self> {
        if mean.len() != omega.dim() {
            return Err(Error::DimensionMismatch {
                expected: omega.dim(),
                found: mean.len(),
            });
        }
        Ok(GaussianSampler {
            mean,
            factor: omega.cholesky()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dim())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut x = self.factor.whiten_inverse(&z);
        for (v, m) in x.iter_mut().zip(&self.mean) {
            *v += m;
        }
        x
    }
}

/// The two-class Gaussian mixture with means `-mu` and `+mu`.
#[derive(Debug, Clone)]
pub struct MixtureSampler {
    classes: [GaussianSampler; 2],
    max_label_attempts: usize,
}

impl MixtureSampler {
    pub fn new(
        mu: &MeanVector,
        omega0: &PrecisionMatrix,
        omega1: &PrecisionMatrix,
    ) -> Result<Self> {
        Ok(MixtureSampler {
            classes: [
                GaussianSampler::new(mu.negated(), omega0.entries())?,
                GaussianSampler::new(mu.values.clone(), omega1.entries())?,
            ],
            max_label_attempts: ModelOptions::default().max_label_attempts,
        })
    }

    pub fn with_label_attempts(mut self, attempts: usize) -> Self {
        self.max_label_attempts = attempts.max(1);
        self
    }

    pub fn dim(&self) -> usize {
        self.classes[0].dim()
    }

    /// One observation from class `k`.
    pub fn sample_class<R: Rng + ?Sized>(&self, k: u8, rng: &mut R) -> Vec<f64> {
        self.classes[k as usize].sample(rng)
    }

    /// `count` observations from class `k`, as rows.
    pub fn sample_class_matrix<R: Rng + ?Sized>(
        &self,
        k: u8,
        count: usize,
        rng: &mut R,
    ) -> DMatrix<f64> {
        let p = self.dim();
        let mut x = DMatrix::zeros(count, p);
        for i in 0..count {
            let row = self.sample_class(k, rng);
            for (j, v) in row.into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        x
    }

    /// `n` labeled draws with `P(Y = 1) = q`. For `0 < q < 1` labels are redrawn until both
    /// classes appear; `q = 0` or `q = 1` yields a single-class sample.
    pub fn sample_dataset<R: Rng + ?Sized>(
        &self,
        n: usize,
        q: f64,
        rng: &mut R,
    ) -> Result<LabeledDataset> {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid("q", format!("{q} is outside [0, 1]")));
        }
        let degenerate = q == 0.0 || q == 1.0;
        let mut labels = None;
        for _ in 0..self.max_label_attempts {
            let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < q)).collect();
            let n1 = y.iter().filter(|&&v| v == 1).count();
            if degenerate || (n1 > 0 && n1 < n) {
                labels = Some(y);
                break;
            }
        }
        let y = labels.ok_or(Error::EmptyClass {
            attempts: self.max_label_attempts,
        })?;
        let p = self.dim();
        let mut x = DMatrix::zeros(n, p);
        for (i, &k) in y.iter().enumerate() {
            let row = self.sample_class(k, rng);
            for (j, v) in row.into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        LabeledDataset::new(x, y)
    }
}

/// Labeled mixture draw; see [`MixtureSampler::sample_dataset`].
pub fn sample_dataset<R: Rng + ?Sized>(
    mu: &MeanVector,
    omega0: &PrecisionMatrix,
    omega1: &PrecisionMatrix,
    n: usize,
    q: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    MixtureSampler::new(mu, omega0, omega1)?.sample_dataset(n, q, rng)
}

fn rho_branch(zeta: f64, delta: f64) -> f64 {
    if zeta <= (1.0 - delta) / 2.0 {
        0.5 - zeta
    } else if zeta <= 1.0 - delta {
        delta / 2.0
    } else {
        (1.0 - zeta) / 2.0
    }
}

/// The detection boundary for mean signals.
pub fn rho_delta(zeta: f64, delta: f64) -> Result<f64> {
    open_unit("zeta", zeta, 1.0)?;
    open_unit("delta", delta, 1.0)?;
    Ok(rho_branch(zeta, delta))
}

/// `eta * b(p, beta)`, a high-probability bound on the spectral norm of `V`.
pub fn spectral_bound(scales: &ScaleSet, p: usize, beta: f64) -> f64 {
    let pf = p as f64;
    let b = if beta < 1.0 {
        3.0 * math::sqrt(pf * scales.nu)
    } else if beta == 1.0 {
        2.0 * math::sqrt(math::ln(pf) / math::ln(math::ln(pf)))
    } else {
        2.0 / (beta - 1.0)
    };
    scales.eta * b
}

/// Region verdict for a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    PossibleQdaW,
    PossibleQdaFs,
    Impossible,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PossibleQdaW => "PossibleQDAw",
            Verdict::PossibleQdaFs => "PossibleQDAfs",
            Verdict::Impossible => "Impossible",
            Verdict::Indeterminate => "Indeterminate",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a clause asserts when it holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    PossibleQdaW,
    PossibleQdaFs,
    Impossible,
    /// Statements about classifiers outside the verdict (ideal QDA, plain QDA, known mean).
    Informational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    /// Stable identifier, e.g. `all_unknown.qdafs.a`.
    pub id: &'static str,
    /// The condition in words.
    pub condition: String,
    pub kind: ClauseKind,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionLabel {
    pub verdict: Verdict,
    /// Every evaluated clause, in a fixed order.
    pub reasons: Vec<Clause>,
}

impl RegionLabel {
    pub fn fired(&self) -> impl Iterator<Item = &Clause> {
        self.reasons.iter().filter(|c| c.satisfied)
    }
}

/// Evaluate the possibility and impossibility clause sets at a parameter point.
///
/// The verdict is `Impossible` when an impossibility clause holds and no possibility
/// clause does, `PossibleQDAw`/`PossibleQDAfs` in the mirror case, and `Indeterminate`
/// when nothing applies or the clauses disagree.
pub fn region_classify(params: &ArwParams) -> RegionLabel {
    let ArwParams {
        delta: d,
        zeta: z,
        theta: th,
        alpha: a,
        beta: b,
        gamma: g,
        ..
    } = *params;
    let rho = rho_branch(z, d);
    let k1 = params.kappa1();
    let k2 = params.kappa2();
    let omega_exp = (1.0 - 2.0 * g).max(k1);
    let strong_mu = th < d / 2.0;
    let pcs_regime = a < d / 2.0 && 1.0 - d / 2.0 < b && b < 2.0;
    let pcs_a = g < d / 2.0;
    let pcs_b_lhs = g > (2.0 * a + b - 1.0) / 2.0;
    let pcs_c = g > 0.5 * 1.0f64.min(2.0 * a + b - 1.0) && th < rho;

    let mut reasons = Vec::new();
    let mut push = |id, condition: String, kind, satisfied| {
        reasons.push(Clause {
            id,
            condition,
            kind,
            satisfied,
        })
    };
    use ClauseKind::*;

    push(
        "known_omega.lower",
        format!("max(1-2gamma, 2-2alpha-beta) = {omega_exp:.4} < 0 and theta > rho = {rho:.4}"),
        Impossible,
        omega_exp < 0.0 && th > rho,
    );
    push(
        "known_omega.qdaw.a",
        format!("theta >= delta/2 and max(1-2gamma, 2-2alpha-beta) = {omega_exp:.4} > 0"),
        PossibleQdaW,
        !strong_mu && omega_exp > 0.0,
    );
    push(
        "known_omega.qdaw.b",
        format!("theta >= delta/2 and theta < rho = {rho:.4}"),
        PossibleQdaW,
        !strong_mu && th < rho,
    );
    push(
        "known_omega.qdafs.a",
        format!("theta < delta/2 and max(1-2gamma, 2-2alpha-beta) = {omega_exp:.4} > 0"),
        PossibleQdaFs,
        strong_mu && omega_exp > 0.0,
    );
    push(
        "known_omega.qdafs.b",
        format!("theta < delta/2 and theta < rho = {rho:.4}"),
        PossibleQdaFs,
        strong_mu && th < rho,
    );
    push(
        "ideal.possible",
        format!("2-2alpha-beta = {k1:.4} > 0 or gamma < 1/2 or 1-2theta-zeta = {k2:.4} > 0"),
        Informational,
        k1 > 0.0 || g < 0.5 || k2 > 0.0,
    );
    push(
        "ideal.impossible",
        format!("2-2alpha-beta = {k1:.4} < 0, gamma > 1/2 and 1-2theta-zeta = {k2:.4} < 0"),
        Impossible,
        k1 < 0.0 && g > 0.5 && k2 < 0.0,
    );
    push(
        "pcs.regime",
        "alpha < delta/2 and 1-delta/2 < beta < 2".to_string(),
        Informational,
        pcs_regime,
    );
    push(
        "pcs.qdaw.a",
        "theta >= delta/2 and gamma < delta/2".to_string(),
        PossibleQdaW,
        pcs_regime && !strong_mu && pcs_a,
    );
    push(
        "pcs.qdaw.b",
        "theta >= delta/2, gamma > (2alpha+beta-1)/2 and 2alpha+beta-2 < 0".to_string(),
        PossibleQdaW,
        pcs_regime && !strong_mu && pcs_b_lhs && 2.0 * a + b - 2.0 < 0.0,
    );
    push(
        "pcs.qdaw.c",
        "theta >= delta/2, gamma > min(1, 2alpha+beta-1)/2 and theta < rho".to_string(),
        PossibleQdaW,
        pcs_regime && !strong_mu && pcs_c,
    );
    push(
        "pcs.qdafs.a",
        "theta < delta/2 and gamma < delta/2".to_string(),
        PossibleQdaFs,
        pcs_regime && strong_mu && pcs_a,
    );
    push(
        "pcs.qdafs.b",
        "theta < delta/2, gamma > (2alpha+beta-1)/2 and 2alpha+beta-2 < 0".to_string(),
        PossibleQdaFs,
        pcs_regime && strong_mu && pcs_b_lhs && 2.0 * a + b - 2.0 < 0.0,
    );
    push(
        "pcs.qdafs.c",
        "theta < delta/2, gamma > min(1, 2alpha+beta-1)/2 and theta < rho".to_string(),
        PossibleQdaFs,
        pcs_regime && strong_mu && pcs_c,
    );
    push(
        "pcs.lower",
        "gamma > 1/2, 2alpha+beta-2 > 0 and theta > rho".to_string(),
        Impossible,
        pcs_regime && g > 0.5 && 2.0 * a + b - 2.0 > 0.0 && th > rho,
    );
    let all_unknown = pcs_regime && g > 0.5;
    push(
        "all_unknown.qdafs.a",
        format!("gamma > 1/2, theta < delta/2 and 2-2alpha-beta = {k1:.4} > 0"),
        PossibleQdaFs,
        all_unknown && strong_mu && k1 > 0.0,
    );
    push(
        "all_unknown.qdafs.b",
        format!("gamma > 1/2, theta < delta/2 and 1-2theta-zeta = {k2:.4} > 0"),
        PossibleQdaFs,
        all_unknown && strong_mu && k2 > 0.0,
    );
    push(
        "all_unknown.lower",
        "gamma > 1/2, theta < delta/2, 2-2alpha-beta < 0 and 1-2theta-zeta < 0".to_string(),
        Impossible,
        all_unknown && strong_mu && k1 < 0.0 && k2 < 0.0,
    );
    let kappa = k1.max(k2);
    push(
        "plain_qda.kappa",
        format!("kappa = {kappa:.4} > (1-delta)/2 = {:.4}", (1.0 - d) / 2.0),
        Informational,
        kappa > (1.0 - d) / 2.0,
    );

    let fired = |kind: ClauseKind| reasons.iter().any(|c| c.satisfied && c.kind == kind);
    let w = fired(PossibleQdaW);
    let fs = fired(PossibleQdaFs);
    let imp = fired(Impossible);
    let verdict = match (w, fs, imp) {
        (false, false, true) => Verdict::Impossible,
        (true, false, false) => Verdict::PossibleQdaW,
        (false, true, false) => Verdict::PossibleQdaFs,
        _ => Verdict::Indeterminate,
    };
    RegionLabel { verdict, reasons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;
    use proptest::prelude::*;

    #[test]
    fn scales_examples() {
        let s = derive_scales(&ArwParams::new(100, 0.5, 0.3, 0.2, 0.3, 1.2, 0.6).unwrap()).unwrap();
        assert_eq!(s.n, 10);
        let s =
            derive_scales(&ArwParams::new(1000, 0.5, 0.3, 0.2, 0.3, 1.2, 0.6).unwrap()).unwrap();
        assert!((s.eps - 0.125_892_541_179_416_7).abs() < 1e-12);
        let delta = libm::log(181.0) / libm::log(8491.0);
        assert!((delta - 0.574_625_152_948_417_8).abs() < 1e-12);
        let s =
            derive_scales(&ArwParams::new(8491, delta, 0.5, 0.2, 0.3, 1.2, 0.6).unwrap()).unwrap();
        assert_eq!(s.n, 181);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ArwParams::new(100, 0.5, 0.3, 0.2, 0.1, 0.7, 0.6).is_err());
        assert!(ArwParams::new(100, 1.0, 0.3, 0.2, 0.3, 1.2, 0.6).is_err());
        assert!(ArwParams::new(100, 0.5, 0.3, 0.2, 0.3, 2.0, 0.6).is_err());
        let small = ArwParams::new(3, 0.5, 0.3, 0.2, 0.3, 1.2, 0.6).unwrap();
        assert!(derive_scales(&small).is_err());
    }

    #[test]
    fn rho_examples() {
        assert!((rho_delta(0.1, 0.5).unwrap() - 0.4).abs() < 1e-15);
        assert!((rho_delta(0.4, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((rho_delta(0.8, 0.5).unwrap() - 0.1).abs() < 1e-15);
        assert!(rho_delta(0.0, 0.5).is_err());
    }

    #[test]
    fn spectral_bound_examples() {
        let s = ScaleSet::new(10, 0.1, 0.1, 0.1, 0.01, 0.1).unwrap();
        assert!((spectral_bound(&s, 100, 1.5) - 0.4).abs() < 1e-12);
        let s = ScaleSet::new(10, 0.1, 0.1, 0.05, 1e-2, 0.1).unwrap();
        assert!((spectral_bound(&s, 10_000, 0.5) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn mu_degenerate_cases() {
        let mut rng = from_seed(1);
        let none = ScaleSet::new(10, 0.0, 0.3, 0.1, 0.1, 0.1).unwrap();
        let m = sample_mu(&none, 50, &mut rng);
        assert!(m.values.iter().all(|&v| v == 0.0) && m.support.is_empty());
        let all = ScaleSet::new(10, 1.0, 0.3, 0.1, 0.1, 0.1).unwrap();
        let m = sample_mu(&all, 50, &mut rng);
        assert!(m.values.iter().all(|&v| v == 0.3) && m.support.len() == 50);
    }

    #[test]
    fn mu_support_count_within_band() {
        let s = ScaleSet::new(10, 0.1, 0.3, 0.1, 0.1, 0.1).unwrap();
        let (mean, half) = (1000.0, 4.0 * libm::sqrt(1e4 * 0.1 * 0.9));
        let mut inside = 0;
        for seed in 0..1000 {
            let m = sample_mu(&s, 10_000, &mut from_seed(seed));
            if ((m.support.len() as f64) - mean).abs() <= half {
                inside += 1;
            }
        }
        assert!(inside >= 999, "{inside}");
    }

    #[test]
    fn no_offdiag_gives_diagonal() {
        let s = ScaleSet::new(10, 0.1, 0.3, 0.2, 0.0, 0.25).unwrap();
        let om = sample_precision(&s, 30, &mut from_seed(3)).unwrap();
        assert!(om.offdiag_support().is_empty());
        assert!(om.entries().diag().iter().all(|&d| d == 1.25));
    }

    #[test]
    fn full_offdiag_density_covers_every_pair() {
        let pairs = sample_offdiag(0.01, 1.0, 7, &mut from_seed(4));
        assert_eq!(pairs.len(), 21);
        let mut k = 0;
        for i in 0..7 {
            for j in i + 1..7 {
                assert_eq!((pairs[k].0, pairs[k].1), (i, j));
                k += 1;
            }
        }
    }

    #[test]
    fn offdiag_count_within_binomial_band() {
        let params = ArwParams::new(2000, 0.5, 0.3, 0.2, 0.3, 1.2, 0.6).unwrap();
        let s = derive_scales(&params).unwrap();
        let total = 2000.0 * 1999.0 / 2.0;
        let om = sample_precision(&s, 2000, &mut from_seed(5)).unwrap();
        let count = om.offdiag_support().len() as f64;
        let band = 4.0 * libm::sqrt(total * s.nu * (1.0 - s.nu));
        assert!(
            (count - total * s.nu).abs() <= band,
            "{count} vs {}",
            total * s.nu
        );
        assert!(om.entries().offdiag().iter().all(|e| e.2.abs() == s.eta));
        assert!(om.entries().min_eigenvalue() > 0.0);
    }

    #[test]
    fn pd_rejection_is_reported() {
        let s = ScaleSet::new(10, 0.1, 0.3, 1.0, 1.0, 0.0).unwrap();
        let err = sample_precision(&s, 20, &mut from_seed(6)).unwrap_err();
        assert_eq!(err, Error::PositiveDefiniteRejected { attempts: 20 });
    }

    #[test]
    fn dataset_degenerate_prior() {
        let om = PrecisionMatrix::identity(3);
        let mu = MeanVector::zeros(3);
        let d = sample_dataset(&mu, &om, &om, 20, 1.0, &mut from_seed(7)).unwrap();
        assert!(d.y.iter().all(|&v| v == 1));
        assert!(d.require_both_classes().is_err());
    }

    #[test]
    fn dataset_moments() {
        let om = PrecisionMatrix::identity(10);
        let mu = MeanVector::zeros(10);
        let d = sample_dataset(&mu, &om, &om, 1000, 0.5, &mut from_seed(8)).unwrap();
        let x = &d.x;
        let mean = x.row_mean();
        let mut c = DMatrix::zeros(10, 10);
        for i in 0..1000 {
            let r = x.row(i) - &mean;
            c += r.transpose() * &r;
        }
        c /= 999.0;
        let diff = c - DMatrix::<f64>::identity(10, 10);
        let op = nalgebra::SymmetricEigen::new(diff)
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(op < 0.3, "{op}");

        let mu = MeanVector::from_values(vec![0.5, -0.2, 0.0, 1.0, 0.3]);
        let om = PrecisionMatrix::new(
            SparseSym::new(vec![2.0; 5], vec![(0, 1, 0.4), (2, 3, -0.5)]).unwrap(),
        )
        .unwrap();
        let d = sample_dataset(&mu, &om, &om, 2000, 0.5, &mut from_seed(9)).unwrap();
        for (k, sign) in [(0u8, -1.0), (1u8, 1.0)] {
            let m = d.class_mean(k);
            let nk = if k == 0 { d.n0 } else { d.n1 } as f64;
            for j in 0..5 {
                assert!((m[j] - sign * mu.values[j]).abs() < 4.0 / libm::sqrt(nk));
            }
        }
    }

    #[test]
    fn generator_is_reproducible() {
        let params = ArwParams::new(200, 0.7, 0.3, 0.2, 0.2, 1.2, 0.6).unwrap();
        let s = derive_scales(&params).unwrap();
        let draw = |seed| {
            let mut rng = from_seed(seed);
            let mu = sample_mu(&s, 200, &mut rng);
            let o0 = sample_precision(&s, 200, &mut rng).unwrap();
            let o1 = sample_precision(&s, 200, &mut rng).unwrap();
            sample_dataset(&mu, &o0, &o1, s.n, 0.5, &mut rng).unwrap()
        };
        let (a, b) = (draw(11), draw(11));
        assert_eq!(a, b);
        assert!(a
            .x
            .iter()
            .zip(b.x.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn region_examples() {
        let p = ArwParams::new(1000, 0.7, 0.3, 0.2, 0.2, 1.2, 0.6).unwrap();
        let r = region_classify(&p);
        assert_eq!(r.verdict, Verdict::PossibleQdaFs);
        assert!(r.fired().any(|c| c.id == "all_unknown.qdafs.a"));
        let p = ArwParams::new(1000, 0.7, 0.5, 0.45, 0.45, 1.8, 0.6).unwrap();
        assert_eq!(region_classify(&p).verdict, Verdict::Impossible);
        let p = ArwParams::new(1000, 0.5, 0.1, 0.3, 0.45, 1.8, 0.6).unwrap();
        let r = region_classify(&p);
        assert_eq!(r.verdict, Verdict::PossibleQdaW);
        assert!(r.fired().any(|c| c.id == "known_omega.qdaw.b"));
    }

    proptest! {
        #[test]
        fn rho_is_continuous(delta in 0.01f64..0.99) {
            for z0 in [(1.0 - delta) / 2.0, 1.0 - delta] {
                let lo = rho_branch(z0 - 1e-13, delta);
                let hi = rho_branch(z0 + 1e-13, delta);
                prop_assert!((lo - hi).abs() < 1e-12);
            }
        }

        #[test]
        fn region_is_deterministic(
            delta in 0.05f64..0.95, zeta in 0.01f64..0.99, theta in 0.01f64..0.99,
            alpha in 0.01f64..0.99, beta in 0.01f64..1.99, gamma in 0.01f64..0.99,
        ) {
            prop_assume!(beta > 1.0 - 2.0 * alpha);
            let p = ArwParams::new(500, delta, zeta, theta, alpha, beta, gamma).unwrap();
            let a = region_classify(&p);
            let b = region_classify(&p);
            prop_assert_eq!(&a, &b);
            // Clause order does not change the verdict.
            let mut reversed = a.reasons.clone();
            reversed.reverse();
            let any = |k| reversed.iter().any(|c: &Clause| c.satisfied && c.kind == k);
            let v = match (any(ClauseKind::PossibleQdaW), any(ClauseKind::PossibleQdaFs), any(ClauseKind::Impossible)) {
                (false, false, true) => Verdict::Impossible,
                (true, false, false) => Verdict::PossibleQdaW,
                (false, true, false) => Verdict::PossibleQdaFs,
                _ => Verdict::Indeterminate,
            };
            prop_assert_eq!(v, a.verdict);
        }

        #[test]
        fn precision_draws_are_symmetric_pd_and_frobenius_exact(seed in 0u64..200) {
            let s = ScaleSet::new(20, 0.1, 0.2, 0.2, 0.02, 0.1).unwrap();
            let om = sample_precision(&s, 120, &mut from_seed(seed)).unwrap();
            let dense = om.to_dense();
            prop_assert!(dense == dense.transpose());
            prop_assert!(om.entries().min_eigenvalue() > 0.0);
            let v = om.entries().offdiag_part();
            let k = om.offdiag_support().len() as f64;
            if k > 0.0 {
                prop_assert!((v.frobenius_sq() / (2.0 * s.eta * s.eta * k) - 1.0).abs() < 1e-12);
            }
        }
    }
}
