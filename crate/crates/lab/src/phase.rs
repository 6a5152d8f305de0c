//! Monte Carlo grids over the model exponents.

use std::cell::OnceCell;

use rayon::prelude::*;
use rwqda_core::arw::{
    derive_scales, region_classify, sample_mu, sample_precision, ArwParams, LabeledDataset,
    MeanVector, MixtureSampler, PrecisionMatrix,
};
use rwqda_core::classify::{
    adaptive_threshold, ideal_qda, qda_pcs_from_estimates, train_qdafs_adaptive, train_qdaw,
    Algorithm2Parts, PcsMode, PcsThresholds, ThresholdRule, TrainedClassifier, Variant,
};
use rwqda_core::linalg::SparseSym;
use rwqda_core::moments::estimate_mr_with;
use rwqda_core::precision::{pcs_estimate, PcsConfig};
use rwqda_core::rng::{stream, StreamTag};

use crate::error::{LabError, Result};
use crate::params::{Axis, KvFile, ParamName, PCS_KEYS};

/// How `Omega0` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega0Law {
    /// Drawn from the same law as `Omega1`, independently.
    Arw,
    /// Fixed to the identity.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Values of the swept exponents here are placeholders.
    pub fixed: ArwParams,
    pub classifiers: Vec<Variant>,
    pub p_list: Vec<usize>,
    pub reps: usize,
    pub n_test: usize,
    pub seed: u64,
    pub omega0: Omega0Law,
    pub pcs: PcsConfig,
    /// Exponent for the weak rules; `None` picks one from the cell.
    pub c: Option<f64>,
}

pub const GRID_KEYS: [&str; 19] = [
    "axis1",
    "axis2",
    "p",
    "delta",
    "zeta",
    "theta",
    "alpha",
    "beta",
    "gamma",
    "q",
    "seed",
    "classifiers",
    "reps",
    "n_test",
    "omega0",
    "c",
    "q1",
    "q2",
    "delta_screen",
];

impl GridSpec {
    pub fn new(
        axis1: Axis,
        axis2: Axis,
        fixed: ArwParams,
        classifiers: Vec<Variant>,
        p_list: Vec<usize>,
    ) -> Self {
        GridSpec {
            axis1,
            axis2,
            fixed,
            classifiers,
            p_list,
            reps: 50,
            n_test: 200,
            seed: 0,
            omega0: Omega0Law::Arw,
            pcs: PcsConfig::default(),
            c: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis1.name == self.axis2.name {
            return Err(LabError::usage(
                "axis1 and axis2 must sweep different parameters",
            ));
        }
        if self.reps < 1 {
            return Err(LabError::usage("reps must be at least 1"));
        }
        if self.n_test < 2 {
            return Err(LabError::usage("n_test must be at least 2"));
        }
        if self.classifiers.is_empty() {
            return Err(LabError::usage("no classifiers requested"));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|&p| p < 4) {
            return Err(LabError::usage("p list must be nonempty with every p >= 4"));
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c < 1.0) {
                return Err(LabError::usage("c must lie in (0, 1)"));
            }
        }
        self.pcs.validate()?;
        Ok(())
    }

    /// Read a grid file: the parameter keys plus axis, classifier and budget keys.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let mut allowed: Vec<&str> = GRID_KEYS.to_vec();
        allowed.extend_from_slice(&PCS_KEYS);
        kv.check_known(&allowed)?;
        let axis = |key: &str| -> Result<Axis> {
            let raw: String = kv.required(key)?;
            raw.parse::<Axis>()
                .map_err(|e| LabError::data(format!("{}: {key}: {e}", kv.origin())))
        };
        let axis1 = axis("axis1")?;
        let axis2 = axis("axis2")?;
        let mut fixed = ArwParams {
            p: 0,
            delta: 0.0,
            zeta: 0.0,
            theta: 0.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            q: kv.parsed("q")?.unwrap_or(0.5),
        };
        for name in ParamName::ALL {
            let v = match kv.parsed::<f64>(name.name())? {
                Some(v) => v,
                None if name == axis1.name => axis1.min,
                None if name == axis2.name => axis2.min,
                None => {
                    return Err(LabError::data(format!(
                        "{}: missing key {:?}",
                        kv.origin(),
                        name.name()
                    )))
                }
            };
            name.set(&mut fixed, v);
        }
        let p_list: Vec<usize> = kv
            .list("p")?
            .ok_or_else(|| LabError::data(format!("{}: missing key \"p\"", kv.origin())))?;
        fixed.p = p_list[0];
        let classifiers = match kv.list::<String>("classifiers")? {
            None => vec![Variant::QdaFsPcs],
            Some(names) => names
                .iter()
                .map(|s| {
                    Variant::from_name(s).ok_or_else(|| {
                        LabError::data(format!("{}: unknown classifier {s:?}", kv.origin()))
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let mut spec = GridSpec::new(axis1, axis2, fixed, classifiers, p_list);
        if let Some(v) = kv.parsed("reps")? {
            spec.reps = v;
        }
        if let Some(v) = kv.parsed("n_test")? {
            spec.n_test = v;
        }
        if let Some(v) = kv.parsed("seed")? {
            spec.seed = v;
        }
        spec.c = kv.parsed("c")?;
        spec.omega0 = match kv.get("omega0") {
            None | Some("arw") => Omega0Law::Arw,
            Some("identity") => Omega0Law::Identity,
            Some(other) => {
                return Err(LabError::data(format!(
                    "{}: omega0 must be arw or identity, got {other:?}",
                    kv.origin()
                )))
            }
        };
        spec.pcs = crate::params::pcs_config(kv, PcsConfig::default())?;
        spec.validate()?;
        Ok(spec)
    }

    /// Parameters at grid point `(i, j)` and dimension `p`, not yet validated.
    pub fn point(&self, i: usize, j: usize, p: usize) -> ArwParams {
        let mut params = self.fixed;
        params.p = p;
        self.axis1.name.set(&mut params, self.axis1.values()[i]);
        self.axis2.name.set(&mut params, self.axis2.values()[j]);
        params
    }
}

/// One (grid point, classifier, p) entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub i: usize,
    pub j: usize,
    pub axis1: f64,
    pub axis2: f64,
    pub classifier: Variant,
    pub p: usize,
    /// `None` when every replicate failed.
    pub mr: Option<f64>,
    pub se: Option<f64>,
    pub reps_ok: usize,
    pub reps_failed: usize,
    pub region: String,
    /// First failure message, if any.
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryName {
    RhoCurve,
    Kappa1Zero,
    Kappa2Zero,
    KappaPlainQda,
}

impl BoundaryName {
    pub const ALL: [BoundaryName; 4] = [
        BoundaryName::RhoCurve,
        BoundaryName::Kappa1Zero,
        BoundaryName::Kappa2Zero,
        BoundaryName::KappaPlainQda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryName::RhoCurve => "rho_curve",
            BoundaryName::Kappa1Zero => "kappa1_zero",
            BoundaryName::Kappa2Zero => "kappa2_zero",
            BoundaryName::KappaPlainQda => "kappa_plain_qda",
        }
    }
}

/// A theoretical curve as points `(x, y)` in the plane of two exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: BoundaryName,
    pub x: ParamName,
    pub y: ParamName,
    pub points: Vec<(f64, f64)>,
}

/// Sample a named boundary. Exponents not on the curve's axes come from `fixed`.
///
/// `rho_curve`, `kappa2_zero` and `kappa_plain_qda` live in the (zeta, theta) plane and
/// `kappa1_zero` in the (alpha, beta) plane. `kappa_plain_qda` is the locus
/// `max(kappa1, kappa2) = (1 - delta)/2`; it is empty when `kappa1` alone already exceeds
/// that level.
pub fn theoretical_boundary(name: BoundaryName, fixed: &ArwParams, samples: usize) -> Curve {
    let samples = samples.max(2);
    let grid = (0..samples).map(move |k| k as f64 / (samples - 1) as f64);
    let (x, y, points): (ParamName, ParamName, Vec<(f64, f64)>) = match name {
        BoundaryName::RhoCurve => (
            ParamName::Zeta,
            ParamName::Theta,
            grid.map(|z| {
                let mut p = *fixed;
                p.zeta = z;
                (z, p.rho())
            })
            .collect(),
        ),
        BoundaryName::Kappa1Zero => (
            ParamName::Alpha,
            ParamName::Beta,
            grid.map(|a| (a, 2.0 - 2.0 * a)).collect(),
        ),
        BoundaryName::Kappa2Zero => (
            ParamName::Zeta,
            ParamName::Theta,
            grid.map(|z| (z, (1.0 - z) / 2.0)).collect(),
        ),
        BoundaryName::KappaPlainQda => {
            let level = (1.0 - fixed.delta) / 2.0;
            let pts = if fixed.kappa1() > level {
                Vec::new()
            } else {
                grid.map(|z| (z, (1.0 - z - level) / 2.0))
                    .filter(|&(_, t)| t >= 0.0)
                    .collect()
            };
            (ParamName::Zeta, ParamName::Theta, pts)
        }
    };
    Curve { name, x, y, points }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseResult {
    pub axis1: Axis,
    pub axis2: Axis,
    pub classifiers: Vec<Variant>,
    pub p_list: Vec<usize>,
    pub reps: usize,
    pub n_test: usize,
    /// Sorted by classifier (request order), then p, then `i`, then `j`.
    pub cells: Vec<CellResult>,
    pub boundaries: Vec<Curve>,
}

/// Run every cell and replicate on the current rayon pool.
///
/// Each replicate draws its model, training set and test points from streams keyed by
/// `(seed, cell, replicate)`, so results do not depend on scheduling or on the other
/// cells. All classifiers in a replicate share the same data and test points.
pub fn run_phase_grid(spec: &GridSpec) -> Result<PhaseResult> {
    spec.validate()?;
    let (s1, s2) = (spec.axis1.steps, spec.axis2.steps);
    let mut jobs = Vec::new();
    for (pi, &p) in spec.p_list.iter().enumerate() {
        for i in 0..s1 {
            for j in 0..s2 {
                for r in 0..spec.reps {
                    jobs.push((pi, p, i, j, r));
                }
            }
        }
    }
    let outcomes: Vec<Vec<std::result::Result<f64, String>>> = jobs
        .par_iter()
        .map(|&(pi, p, i, j, r)| {
            let params = spec.point(i, j, p);
            replicate(spec, &params, cell_id(i, j, pi), r as u64)
        })
        .collect();

    let v1 = spec.axis1.values();
    let v2 = spec.axis2.values();
    let mut cells = Vec::new();
    for (ci, &variant) in spec.classifiers.iter().enumerate() {
        for (pi, &p) in spec.p_list.iter().enumerate() {
            for i in 0..s1 {
                for j in 0..s2 {
                    let base = ((pi * s1 + i) * s2 + j) * spec.reps;
                    let mut sum = 0.0;
                    let mut ok = 0;
                    let mut first_error = None;
                    for out in &outcomes[base..base + spec.reps] {
                        match &out[ci] {
                            Ok(mr) => {
                                sum += mr;
                                ok += 1;
                            }
                            Err(e) => {
                                if first_error.is_none() {
                                    first_error = Some(e.clone());
                                }
                            }
                        }
                    }
                    let (mr, se) = if ok > 0 {
                        let mr = sum / ok as f64;
                        let se = (mr * (1.0 - mr) / (ok * spec.n_test) as f64).sqrt();
                        (Some(mr), Some(se))
                    } else {
                        (None, None)
                    };
                    let params = spec.point(i, j, p);
                    let region = match params.validate() {
                        Ok(()) => region_classify(&params).verdict.as_str().to_string(),
                        Err(_) => "Invalid".to_string(),
                    };
                    cells.push(CellResult {
                        i,
                        j,
                        axis1: v1[i],
                        axis2: v2[j],
                        classifier: variant,
                        p,
                        mr,
                        se,
                        reps_ok: ok,
                        reps_failed: spec.reps - ok,
                        region,
                        first_error,
                    });
                }
            }
        }
    }
    let boundaries = BoundaryName::ALL
        .iter()
        .map(|&b| theoretical_boundary(b, &spec.fixed, 101))
        .collect();
    Ok(PhaseResult {
        axis1: spec.axis1,
        axis2: spec.axis2,
        classifiers: spec.classifiers.clone(),
        p_list: spec.p_list.clone(),
        reps: spec.reps,
        n_test: spec.n_test,
        cells,
        boundaries,
    })
}

/// Replicate summary at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub classifier: Variant,
    pub mr: Option<f64>,
    pub se: Option<f64>,
    pub reps_ok: usize,
    pub reps_failed: usize,
    pub first_error: Option<String>,
}

/// Run `spec.reps` replicates of every classifier in `spec` at `params`, with streams
/// keyed by `cell`. The grid axes of `spec` are ignored.
pub fn run_point(spec: &GridSpec, params: &ArwParams, cell: u64) -> Vec<PointResult> {
    let outcomes: Vec<Vec<std::result::Result<f64, String>>> = (0..spec.reps)
        .into_par_iter()
        .map(|r| replicate(spec, params, cell, r as u64))
        .collect();
    spec.classifiers
        .iter()
        .enumerate()
        .map(|(ci, &classifier)| {
            let ok: Vec<f64> = outcomes
                .iter()
                .filter_map(|o| o[ci].as_ref().ok().copied())
                .collect();
            let first_error = outcomes.iter().find_map(|o| o[ci].as_ref().err().cloned());
            let (mr, se) = if ok.is_empty() {
                (None, None)
            } else {
                let mr = ok.iter().sum::<f64>() / ok.len() as f64;
                (
                    Some(mr),
                    Some((mr * (1.0 - mr) / (ok.len() * spec.n_test) as f64).sqrt()),
                )
            };
            PointResult {
                classifier,
                mr,
                se,
                reps_ok: ok.len(),
                reps_failed: spec.reps - ok.len(),
                first_error,
            }
        })
        .collect()
}

fn cell_id(i: usize, j: usize, pi: usize) -> u64 {
    ((i as u64) << 40) | ((j as u64) << 20) | pi as u64
}

/// Weak-rule exponent: half the Frobenius exponent of `Omega1 - I` when positive.
pub fn default_c(params: &ArwParams) -> f64 {
    let c = 0.5 * (1.0 - 2.0 * params.gamma).max(params.kappa1());
    if c > 0.0 && c < 1.0 {
        c
    } else {
        0.5
    }
}

/// One model draw, one training set, every requested classifier.
fn replicate(
    spec: &GridSpec,
    params: &ArwParams,
    cell: u64,
    rep: u64,
) -> Vec<std::result::Result<f64, String>> {
    let k = spec.classifiers.len();
    match draw(spec, params, cell, rep) {
        Err(e) => vec![Err(e.to_string()); k],
        Ok((mu, o0, o1, sampler, train)) => {
            let ctx = FitContext {
                spec,
                params,
                mu: &mu,
                o0: &o0,
                o1: &o1,
                train: &train,
                est0: OnceCell::new(),
                est1: OnceCell::new(),
                parts: OnceCell::new(),
            };
            spec.classifiers
                .iter()
                .map(|&v| {
                    let model = ctx.fit(v).map_err(|e| e.to_string())?;
                    let mut rng = stream(spec.seed, StreamTag::Test, cell, rep);
                    estimate_mr_with(&model, &sampler, spec.n_test, &mut rng)
                        .map(|m| m.mr)
                        .map_err(|e| e.to_string())
                })
                .collect()
        }
    }
}

type Draw = (
    MeanVector,
    PrecisionMatrix,
    PrecisionMatrix,
    MixtureSampler,
    LabeledDataset,
);

fn draw(spec: &GridSpec, params: &ArwParams, cell: u64, rep: u64) -> rwqda_core::Result<Draw> {
    params.validate()?;
    let scales = derive_scales(params)?;
    let p = params.p;
    let mut rng = stream(spec.seed, StreamTag::Model, cell, rep);
    let mu = sample_mu(&scales, p, &mut rng);
    let o0 = match spec.omega0 {
        Omega0Law::Identity => PrecisionMatrix::identity(p),
        Omega0Law::Arw => sample_precision(&scales, p, &mut rng)?,
    };
    let o1 = sample_precision(&scales, p, &mut rng)?;
    let sampler = MixtureSampler::new(&mu, &o0, &o1)?;
    let mut rng = stream(spec.seed, StreamTag::Train, cell, rep);
    let train = sampler.sample_dataset(scales.n, params.q, &mut rng)?;
    Ok((mu, o0, o1, sampler, train))
}

struct FitContext<'a> {
    spec: &'a GridSpec,
    params: &'a ArwParams,
    mu: &'a MeanVector,
    o0: &'a PrecisionMatrix,
    o1: &'a PrecisionMatrix,
    train: &'a LabeledDataset,
    est0: OnceCell<rwqda_core::Result<SparseSym>>,
    est1: OnceCell<rwqda_core::Result<SparseSym>>,
    parts: OnceCell<rwqda_core::Result<Algorithm2Parts>>,
}

impl FitContext<'_> {
    fn estimate(&self, k: u8) -> rwqda_core::Result<SparseSym> {
        let cell = if k == 0 { &self.est0 } else { &self.est1 };
        cell.get_or_init(|| {
            self.train.require_both_classes()?;
            let x = self.train.class_matrix(k);
            let config = PcsConfig {
                l: crate::bench::effective_l(self.spec.pcs.l, x.nrows()),
                ..self.spec.pcs
            };
            Ok(pcs_estimate(&x, &config)?.entries)
        })
        .clone()
    }

    fn parts(&self) -> rwqda_core::Result<Algorithm2Parts> {
        self.parts
            .get_or_init(|| {
                Algorithm2Parts::new(self.train, &self.estimate(0)?, &self.estimate(1)?)
            })
            .clone()
    }

    fn fit(&self, v: Variant) -> rwqda_core::Result<TrainedClassifier> {
        let c = self.spec.c.unwrap_or_else(|| default_c(self.params));
        let th = PcsThresholds::default();
        match v {
            Variant::IdealQda => ideal_qda(self.mu, self.o0.entries(), self.o1.entries()),
            Variant::QdaW => train_qdaw(self.train, self.o1.entries(), c),
            Variant::QdaFs => train_qdafs_adaptive(self.train, self.o1.entries()),
            Variant::QdaWPcs => qda_pcs_from_estimates(
                self.train,
                PcsMode::Weak { c },
                None,
                &self.estimate(1)?,
                &th,
            ),
            Variant::QdaFsPcs => {
                let e0 = match self.spec.omega0 {
                    Omega0Law::Identity => None,
                    Omega0Law::Arw => Some(self.estimate(0)?),
                };
                qda_pcs_from_estimates(
                    self.train,
                    PcsMode::Strong { t: None },
                    e0.as_ref(),
                    &self.estimate(1)?,
                    &th,
                )
            }
            Variant::Algorithm2 | Variant::Lda => {
                let parts = self.parts()?;
                let t = adaptive_threshold(&parts.d, self.train.p(), self.train.n());
                Ok(if v == Variant::Algorithm2 {
                    parts.classifier(v, t, 0.0, ThresholdRule::Hard, true, false)
                } else {
                    parts.classifier(v, t, 0.0, ThresholdRule::Clip, false, false)
                })
            }
        }
    }
}
