//! Quadratic discriminant classifiers.
//!
//! Every trained model scores a point as `Q = x'Ax + 2w'x + C` and predicts class 1 iff
//! `Q > 0`. Variants differ in how `A`, `w` and `C` are built from data.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::arw::{LabeledDataset, MeanVector};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, SparseSym};
use crate::math;
use crate::precision::{
    adjust_single_band, pcs_estimate, single_band, truncate_diagonal, PcsConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    IdealQda,
    QdaW,
    QdaFs,
    QdaWPcs,
    QdaFsPcs,
    Algorithm2,
    Lda,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::IdealQda,
        Variant::QdaW,
        Variant::QdaFs,
        Variant::QdaWPcs,
        Variant::QdaFsPcs,
        Variant::Algorithm2,
        Variant::Lda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::IdealQda => "ideal-qda",
            Variant::QdaW => "qdaw",
            Variant::QdaFs => "qdafs",
            Variant::QdaWPcs => "qdaw-pcs",
            Variant::QdaFsPcs => "qdafs-pcs",
            Variant::Algorithm2 => "algorithm2",
            Variant::Lda => "lda",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|v| v.name() == s)
    }
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the linear coefficient vector `d` is thresholded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ThresholdRule {
    /// `d_j * 1{|d_j| >= t}`.
    #[default]
    Hard,
    /// `sign(d_j) * min(|d_j|, t)`.
    Clip,
}

impl ThresholdRule {
    pub fn apply(&self, d: f64, t: f64) -> f64 {
        match self {
            ThresholdRule::Hard => {
                if d.abs() >= t {
                    d
                } else {
                    0.0
                }
            }
            ThresholdRule::Clip => {
                if d == 0.0 {
                    0.0
                } else {
                    d.signum() * d.abs().min(t)
                }
            }
        }
    }
}

/// Per-feature standardization `x_j = (X_j - center_j) / scale_j`. Features with
/// `scale_j == 0` map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaling {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .zip(&self.scale)
            .map(|((v, c), s)| if *s > 0.0 { (v - c) / s } else { 0.0 })
            .collect()
    }
}

/// The three parts of a score and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdaScore {
    pub quadratic: f64,
    pub linear: f64,
    pub constant: f64,
    pub total: f64,
}

impl QdaScore {
    fn new(quadratic: f64, linear: f64, constant: f64) -> Self {
        QdaScore {
            quadratic,
            linear,
            constant,
            total: quadratic + linear + constant,
        }
    }

    /// `1{Q > 0}`; a tie goes to class 0.
    pub fn label(&self) -> u8 {
        u8::from(self.total > 0.0)
    }
}

/// A fitted classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub variant: Variant,
    /// `A` in `x'Ax`.
    pub quad: SparseSym,
    /// `w` in `2w'x`.
    pub linear: Vec<f64>,
    pub constant: f64,
    /// Standardization applied before the quadratic term.
    pub scaling: Option<Scaling>,
    /// Whether the linear term also uses the standardized point.
    pub linear_on_scaled: bool,
    pub omega0: Option<SparseSym>,
    pub omega1: Option<SparseSym>,
    pub omega_diff: Option<SparseSym>,
    pub mu0_hat: Vec<f64>,
    pub mu1_hat: Vec<f64>,
    /// Unthresholded linear coefficients.
    pub d: Vec<f64>,
    /// Selection indicator, entries 0 or 1.
    pub d_sel: Vec<u8>,
    pub t: f64,
    /// Features removed because their variance was zero.
    pub dropped: Vec<usize>,
}

impl TrainedClassifier {
    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// Add the prior term `2 ln(q / (1 - q))` to the constant.
    pub fn with_prior(mut self, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid("q", "prior must be in (0, 1)"));
        }
        self.constant += 2.0 * math::ln(q / (1.0 - q));
        Ok(self)
    }

    pub fn score(&self, x: &[f64]) -> Result<QdaScore> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let scaled = self.scaling.as_ref().map(|s| s.apply(x));
        let xs = scaled.as_deref().unwrap_or(x);
        let quadratic = self.quad.quad_form(xs);
        let lin_x = if self.linear_on_scaled { xs } else { x };
        let linear = 2.0 * dot(&self.linear, lin_x);
        Ok(QdaScore::new(quadratic, linear, self.constant))
    }

    pub fn predict(&self, x: &[f64]) -> Result<(u8, QdaScore)> {
        let s = self.score(x)?;
        Ok((s.label(), s))
    }

    /// Predict every row of `x`.
    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<Vec<u8>> {
        let mut row = vec![0.0; x.ncols()];
        (0..x.nrows())
            .map(|i| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = x[(i, j)];
                }
                self.predict(&row).map(|r| r.0)
            })
            .collect()
    }

    fn base(variant: Variant, p: usize) -> Self {
        TrainedClassifier {
            variant,
            quad: SparseSym::zeros(p),
            linear: vec![0.0; p],
            constant: 0.0,
            scaling: None,
            linear_on_scaled: false,
            omega0: None,
            omega1: None,
            omega_diff: None,
            mu0_hat: Vec::new(),
            mu1_hat: Vec::new(),
            d: Vec::new(),
            d_sel: Vec::new(),
            t: 0.0,
            dropped: Vec::new(),
        }
    }
}

fn check_dim(m: &SparseSym, p: usize) -> Result<()> {
    if m.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: m.dim(),
        });
    }
    Ok(())
}

fn require_classes(data: &LabeledDataset) -> Result<()> {
    data.require_both_classes()
}

/// The Bayes rule with all parameters known (class means `-mu` and `mu`).
pub fn ideal_qda(
    mu: &MeanVector,
    omega0: &SparseSym,
    omega1: &SparseSym,
) -> Result<TrainedClassifier> {
    let p = mu.dim();
    check_dim(omega0, p)?;
    check_dim(omega1, p)?;
    let quad = omega0.sub(omega1)?;
    let linear = omega0.add(omega1)?.mul_vec(&mu.values);
    let constant = quad.quad_form(&mu.values) + omega1.log_det()? - omega0.log_det()?;
    let mut m = TrainedClassifier::base(Variant::IdealQda, p);
    m.quad = quad;
    m.linear = linear;
    m.constant = constant;
    m.omega0 = Some(omega0.clone());
    m.omega1 = Some(omega1.clone());
    m.mu0_hat = mu.negated();
    m.mu1_hat = mu.values.clone();
    m.d = m.linear.clone();
    m.d_sel = vec![1; p];
    Ok(m)
}

pub fn ideal_qda_score(
    x: &[f64],
    mu: &MeanVector,
    omega0: &SparseSym,
    omega1: &SparseSym,
) -> Result<QdaScore> {
    ideal_qda(mu, omega0, omega1)?.score(x)
}

/// Weak-signal rule with known `Omega1` and `Omega0 = I`; `mu_hat = p^{(c-1)/2} * 1`.
pub fn train_qdaw(data: &LabeledDataset, omega1: &SparseSym, c: f64) -> Result<TrainedClassifier> {
    let mut m = qdaw_core(data, omega1, c)?;
    m.omega1 = Some(omega1.clone());
    Ok(m)
}

fn qdaw_core(data: &LabeledDataset, omega1: &SparseSym, c: f64) -> Result<TrainedClassifier> {
    require_classes(data)?;
    if !(c > 0.0 && c < 1.0) {
        return Err(invalid("c", "must be in (0, 1)"));
    }
    let p = data.p();
    check_dim(omega1, p)?;
    let a = math::powf(p as f64, (c - 1.0) / 2.0);
    let mu_hat = vec![a; p];
    let mu0 = data.class_mean(0);
    let mu1 = data.class_mean(1);
    let eye = SparseSym::identity(p);
    let om_minus_i = omega1.sub(&eye)?;
    let constant =
        om_minus_i.quad_form(&mu0) + omega1.log_det()? + om_minus_i.trace() / data.n0 as f64;
    let mut linear = omega1.mul_vec(&mu_hat);
    for (w, m) in linear.iter_mut().zip(&mu_hat) {
        *w += m;
    }
    let mut m = TrainedClassifier::base(Variant::QdaW, p);
    m.quad = eye.sub(omega1)?;
    m.d = linear.clone();
    m.linear = linear;
    m.constant = constant;
    m.mu0_hat = mu0;
    m.mu1_hat = mu1;
    m.d_sel = vec![1; p];
    Ok(m)
}

/// `2 sqrt(ln p) / sqrt(n)` when some `|d_j|` exceeds `2 ln p / sqrt(n)`, else 0.
pub fn adaptive_threshold(d: &[f64], p: usize, n: usize) -> f64 {
    adaptive_threshold_ln(d, math::ln(p as f64), n as f64)
}

fn adaptive_threshold_ln(d: &[f64], lp: f64, n: f64) -> f64 {
    let rn = math::sqrt(n);
    let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 2.0 * lp / rn {
        2.0 * math::sqrt(lp) / rn
    } else {
        0.0
    }
}

/// Feature-selection rule with known `Omega1` and `Omega0 = I`.
pub fn train_qdafs(data: &LabeledDataset, omega1: &SparseSym, t: f64) -> Result<TrainedClassifier> {
    let mut m = qdafs_core(data, omega1, Some(t))?;
    m.omega1 = Some(omega1.clone());
    Ok(m)
}

/// As [`train_qdafs`] with the threshold chosen by [`adaptive_threshold`].
pub fn train_qdafs_adaptive(
    data: &LabeledDataset,
    omega1: &SparseSym,
) -> Result<TrainedClassifier> {
    let mut m = qdafs_core(data, omega1, None)?;
    m.omega1 = Some(omega1.clone());
    Ok(m)
}

fn qdafs_core(
    data: &LabeledDataset,
    omega1: &SparseSym,
    t: Option<f64>,
) -> Result<TrainedClassifier> {
    require_classes(data)?;
    let p = data.p();
    check_dim(omega1, p)?;
    let mu0 = data.class_mean(0);
    let mu1 = data.class_mean(1);
    let mut d = omega1.mul_vec(&mu1);
    for (v, m) in d.iter_mut().zip(&mu0) {
        *v -= m;
    }
    let t = t.unwrap_or_else(|| adaptive_threshold(&d, p, data.n()));
    if !(t >= 0.0) {
        return Err(invalid("t", "threshold must be non-negative"));
    }
    let sel: Vec<u8> = d.iter().map(|v| u8::from(v.abs() >= t)).collect();
    let idx: Vec<usize> = (0..p).filter(|&j| sel[j] == 1).collect();
    let mu0_sel: Vec<f64> = mu0
        .iter()
        .zip(&sel)
        .map(|(m, &s)| if s == 1 { *m } else { 0.0 })
        .collect();
    let eye = SparseSym::identity(p);
    let quad = eye.sub(omega1)?;
    let sub = omega1.submatrix(&idx);
    let tr = sub.trace() - idx.len() as f64;
    let constant = quad.quad_form(&mu0_sel) + omega1.log_det()? + tr / data.n0 as f64;
    let mut m = TrainedClassifier::base(Variant::QdaFs, p);
    m.linear = d
        .iter()
        .zip(&sel)
        .map(|(v, &s)| if s == 1 { *v } else { 0.0 })
        .collect();
    m.quad = quad;
    m.constant = constant;
    m.mu0_hat = mu0;
    m.mu1_hat = mu1;
    m.d = d;
    m.d_sel = sel;
    m.t = t;
    Ok(m)
}

/// Weak (`mu_hat = p^{(c-1)/2} 1`) or strong (thresholded `d`) linear part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcsMode {
    Weak {
        c: f64,
    },
    /// `None` selects the adaptive threshold.
    Strong {
        t: Option<f64>,
    },
}

/// Whether `Omega0` is the identity or must be estimated too.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega0 {
    Identity,
    Estimated,
}

/// Threshold multipliers for the estimated-precision rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcsThresholds {
    /// Multiplier of `sqrt(2 ln p / n)` for the single-class diagonal snap.
    pub single: f64,
    /// Multiplier of `sqrt(2 ln p / n)` for the difference diagonal truncation.
    pub diff: f64,
}

impl Default for PcsThresholds {
    fn default() -> Self {
        PcsThresholds {
            single: 1.0,
            diff: 2.0,
        }
    }
}

/// Rules with estimated precision matrices.
///
/// With `Omega0::Identity` the class-1 estimate is snapped toward the identity and passed
/// to the weak or strong known-precision rule. With `Omega0::Estimated` both classes are
/// estimated and only the strong mode is defined.
pub fn train_qda_pcs(
    data: &LabeledDataset,
    mode: PcsMode,
    omega0: Omega0,
    config: &PcsConfig,
) -> Result<TrainedClassifier> {
    require_classes(data)?;
    let est1 = pcs_estimate(&data.class_matrix(1), config)?.entries;
    let est0 = match omega0 {
        Omega0::Identity => None,
        Omega0::Estimated => Some(pcs_estimate(&data.class_matrix(0), config)?.entries),
    };
    qda_pcs_from_estimates(data, mode, est0.as_ref(), &est1, &PcsThresholds::default())
}

/// [`train_qda_pcs`] with the raw estimates supplied by the caller.
pub fn qda_pcs_from_estimates(
    data: &LabeledDataset,
    mode: PcsMode,
    omega0_hat: Option<&SparseSym>,
    omega1_hat: &SparseSym,
    thresholds: &PcsThresholds,
) -> Result<TrainedClassifier> {
    require_classes(data)?;
    let (p, n) = (data.p(), data.n());
    check_dim(omega1_hat, p)?;
    let band = single_band(p, n);
    match omega0_hat {
        None => {
            let adjusted = adjust_single_band(omega1_hat, thresholds.single * band);
            let mut m = match mode {
                PcsMode::Weak { c } => {
                    let mut m = qdaw_core(data, &adjusted, c)?;
                    m.variant = Variant::QdaWPcs;
                    m
                }
                PcsMode::Strong { t } => {
                    let mut m = qdafs_core(data, &adjusted, t)?;
                    m.variant = Variant::QdaFsPcs;
                    m
                }
            };
            m.omega1 = Some(adjusted);
            Ok(m)
        }
        Some(est0) => {
            check_dim(est0, p)?;
            let t = match mode {
                PcsMode::Strong { t } => t,
                PcsMode::Weak { .. } => {
                    return Err(invalid("mode", "the weak rule needs Omega0 = I"))
                }
            };
            let diff = truncate_diagonal(&est0.sub(omega1_hat)?, thresholds.diff * band);
            let mu0 = data.class_mean(0);
            let mu1 = data.class_mean(1);
            let d0 = est0.mul_vec(&mu0);
            let d: Vec<f64> = omega1_hat
                .mul_vec(&mu1)
                .iter()
                .zip(&d0)
                .map(|(a, b)| a - b)
                .collect();
            let t = t.unwrap_or_else(|| adaptive_threshold(&d, p, n));
            if !(t >= 0.0) {
                return Err(invalid("t", "threshold must be non-negative"));
            }
            let sel: Vec<u8> = d.iter().map(|v| u8::from(v.abs() >= t)).collect();
            let mu0_sel: Vec<f64> = mu0
                .iter()
                .zip(&sel)
                .map(|(m, &s)| if s == 1 { *m } else { 0.0 })
                .collect();
            let unit0 = est0.map_diag(|_| 1.0);
            let unit1 = omega1_hat.map_diag(|_| 1.0);
            let constant = diff.quad_form(&mu0_sel) + unit0.log_det()? - unit1.log_det()?;
            let mut m = TrainedClassifier::base(Variant::QdaFsPcs, p);
            m.linear = d
                .iter()
                .zip(&sel)
                .map(|(v, &s)| if s == 1 { *v } else { 0.0 })
                .collect();
            m.quad = diff.clone();
            m.constant = constant;
            m.omega0 = Some(est0.clone());
            m.omega1 = Some(omega1_hat.clone());
            m.omega_diff = Some(diff);
            m.mu0_hat = mu0;
            m.mu1_hat = mu1;
            m.d = d;
            m.d_sel = sel;
            m.t = t;
            Ok(m)
        }
    }
}

/// Options shared by the real-data rule and its linear baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Algorithm2Options {
    /// Use the standardized point in the linear term as well as the quadratic one.
    pub linear_on_scaled: bool,
    /// Thresholding rule for the linear baseline.
    pub lda_rule: ThresholdRule,
}

impl Default for Algorithm2Options {
    fn default() -> Self {
        Algorithm2Options {
            linear_on_scaled: false,
            lda_rule: ThresholdRule::Clip,
        }
    }
}

/// Everything the real-data rule needs that does not depend on `(t, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm2Parts {
    pub omega0: SparseSym,
    pub omega1: SparseSym,
    /// Off-diagonal part of `Omega0_hat - Omega1_hat`, dropped features removed.
    pub omega_diff: SparseSym,
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    /// `Omega1 mu1 / s1 - Omega0 mu0 / s0`, zero on dropped features.
    pub d: Vec<f64>,
    pub scaling: Scaling,
    pub dropped: Vec<usize>,
}

fn class_sd(x: &DMatrix<f64>, mean: &[f64]) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let ss: f64 = x
                .column(j)
                .iter()
                .map(|v| (v - mean[j]) * (v - mean[j]))
                .sum();
            if n > 1.0 {
                math::sqrt(ss / (n - 1.0))
            } else {
                0.0
            }
        })
        .collect()
}

impl Algorithm2Parts {
    /// Compute the parts from data and the two raw precision estimates.
    pub fn new(
        data: &LabeledDataset,
        omega0_hat: &SparseSym,
        omega1_hat: &SparseSym,
    ) -> Result<Self> {
        require_classes(data)?;
        let p = data.p();
        check_dim(omega0_hat, p)?;
        check_dim(omega1_hat, p)?;
        let x0 = data.class_matrix(0);
        let x1 = data.class_matrix(1);
        let mu0 = data.class_mean(0);
        let mu1 = data.class_mean(1);
        let s0 = class_sd(&x0, &mu0);
        let s1 = class_sd(&x1, &mu1);
        let (n0, n1) = (data.n0 as f64, data.n1 as f64);
        let denom = n0 + n1 - 2.0;
        let mut scale = vec![0.0; p];
        let mut dropped = Vec::new();
        for j in 0..p {
            let pooled = if denom > 0.0 {
                math::sqrt(((n0 - 1.0) * s0[j] * s0[j] + (n1 - 1.0) * s1[j] * s1[j]) / denom)
            } else {
                0.0
            };
            if pooled > 0.0 && s0[j] > 0.0 && s1[j] > 0.0 {
                scale[j] = pooled;
            } else {
                dropped.push(j);
            }
        }
        let a0 = omega0_hat.mul_vec(&mu0);
        let a1 = omega1_hat.mul_vec(&mu1);
        let d: Vec<f64> = (0..p)
            .map(|j| {
                if scale[j] > 0.0 {
                    a1[j] / s1[j] - a0[j] / s0[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut diff = omega0_hat.sub(omega1_hat)?.offdiag_part();
        if !dropped.is_empty() {
            let keep: Vec<(usize, usize, f64)> = diff
                .offdiag()
                .iter()
                .filter(|e| scale[e.0] > 0.0 && scale[e.1] > 0.0)
                .copied()
                .collect();
            diff = SparseSym::new(vec![0.0; p], keep)?;
        }
        let center = mu0.iter().zip(&mu1).map(|(a, b)| 0.5 * (a + b)).collect();
        Ok(Algorithm2Parts {
            omega0: omega0_hat.clone(),
            omega1: omega1_hat.clone(),
            omega_diff: diff,
            mu0,
            mu1,
            d,
            scaling: Scaling { center, scale },
            dropped,
        })
    }

    /// Assemble a classifier. `quadratic = false` forces the quadratic term to zero.
    pub fn classifier(
        &self,
        variant: Variant,
        t: f64,
        c: f64,
        rule: ThresholdRule,
        quadratic: bool,
        linear_on_scaled: bool,
    ) -> TrainedClassifier {
        let p = self.d.len();
        let linear: Vec<f64> = self.d.iter().map(|&v| rule.apply(v, t)).collect();
        let mut m = TrainedClassifier::base(variant, p);
        m.d_sel = linear.iter().map(|&w| u8::from(w != 0.0)).collect();
        if rule == ThresholdRule::Hard {
            m.d_sel = self.d.iter().map(|v| u8::from(v.abs() >= t)).collect();
        }
        m.linear = linear;
        m.quad = if quadratic {
            self.omega_diff.clone()
        } else {
            SparseSym::zeros(p)
        };
        m.omega_diff = Some(m.quad.clone());
        m.constant = c;
        m.scaling = Some(self.scaling.clone());
        m.linear_on_scaled = linear_on_scaled;
        m.omega0 = Some(self.omega0.clone());
        m.omega1 = Some(self.omega1.clone());
        m.mu0_hat = self.mu0.clone();
        m.mu1_hat = self.mu1.clone();
        m.d = self.d.clone();
        m.t = t;
        m.dropped = self.dropped.clone();
        m
    }
}

fn estimate_both(data: &LabeledDataset, config: &PcsConfig) -> Result<(SparseSym, SparseSym)> {
    require_classes(data)?;
    let e0 = pcs_estimate(&data.class_matrix(0), config)?.entries;
    let e1 = pcs_estimate(&data.class_matrix(1), config)?.entries;
    Ok((e0, e1))
}

/// The real-data rule: both precisions by screening, standardized quadratic term,
/// hard-thresholded `d`, user-chosen `t` and `C`.
pub fn train_algorithm2(
    data: &LabeledDataset,
    t: f64,
    c: f64,
    config: &PcsConfig,
) -> Result<TrainedClassifier> {
    train_algorithm2_with(data, t, c, config, &Algorithm2Options::default())
}

pub fn train_algorithm2_with(
    data: &LabeledDataset,
    t: f64,
    c: f64,
    config: &PcsConfig,
    options: &Algorithm2Options,
) -> Result<TrainedClassifier> {
    let (e0, e1) = estimate_both(data, config)?;
    let parts = Algorithm2Parts::new(data, &e0, &e1)?;
    Ok(parts.classifier(
        Variant::Algorithm2,
        t,
        c,
        ThresholdRule::Hard,
        true,
        options.linear_on_scaled,
    ))
}

/// The linear baseline: the real-data rule with no quadratic term and clipped `d`.
pub fn train_lda(
    data: &LabeledDataset,
    t: f64,
    c: f64,
    config: &PcsConfig,
) -> Result<TrainedClassifier> {
    train_lda_with(data, t, c, config, &Algorithm2Options::default())
}

pub fn train_lda_with(
    data: &LabeledDataset,
    t: f64,
    c: f64,
    config: &PcsConfig,
    options: &Algorithm2Options,
) -> Result<TrainedClassifier> {
    let (e0, e1) = estimate_both(data, config)?;
    let parts = Algorithm2Parts::new(data, &e0, &e1)?;
    Ok(parts.classifier(
        Variant::Lda,
        t,
        c,
        options.lda_rule,
        false,
        options.linear_on_scaled,
    ))
}
