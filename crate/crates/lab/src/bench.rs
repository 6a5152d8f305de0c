//! Stratified train/test splits, grid search and the quadratic-versus-linear benchmark.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use rwqda_core::arw::{
    derive_scales, sample_mu, sample_precision, ArwParams, LabeledDataset, MixtureSampler,
};
use rwqda_core::classify::{Algorithm2Parts, ThresholdRule, TrainedClassifier, Variant};
use rwqda_core::precision::{PcsConfig, PcsPath};
use rwqda_core::rng::{stream, StreamTag};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub n_splits: usize,
    /// Test share of each class.
    pub fraction: f64,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            n_splits: 15,
            fraction: 0.25,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class test count: `fraction * n_k` rounded half up.
pub fn test_size(n_k: usize, fraction: f64) -> usize {
    (fraction * n_k as f64 + 0.5).floor() as usize
}

/// Stratified splits. Split `s` shuffles class `k` with its own stream, so splits can be
/// regenerated independently.
pub fn make_splits(y: &[u8], plan: &SplitPlan) -> Result<Vec<Split>> {
    if plan.n_splits < 1 {
        return Err(LabError::usage("need at least one split"));
    }
    if !(plan.fraction > 0.0 && plan.fraction < 1.0) {
        return Err(LabError::usage(format!(
            "split fraction {} is outside (0, 1)",
            plan.fraction
        )));
    }
    let classes: [Vec<usize>; 2] = [0u8, 1].map(|k| (0..y.len()).filter(|&i| y[i] == k).collect());
    let sizes: Vec<usize> = classes
        .iter()
        .map(|c| test_size(c.len(), plan.fraction))
        .collect();
    for k in 0..2 {
        if sizes[k] == 0 || sizes[k] >= classes[k].len() {
            return Err(LabError::data(format!(
                "class {k} has {} samples, too few to hold out a fraction of {}",
                classes[k].len(),
                plan.fraction
            )));
        }
    }
    Ok((0..plan.n_splits)
        .map(|s| {
            let mut train = Vec::with_capacity(y.len());
            let mut test = Vec::new();
            for k in 0..2 {
                let mut idx = classes[k].clone();
                let mut rng = stream(plan.seed, StreamTag::Split, s as u64, k as u64);
                idx.shuffle(&mut rng);
                test.extend_from_slice(&idx[..sizes[k]]);
                train.extend_from_slice(&idx[sizes[k]..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Split { train, test }
        })
        .collect())
}

/// Hyperparameter grid shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Thresholds run from 0 to `t_max` (default `max_j |d_j|`) in this step.
    pub t_step: f64,
    pub t_max: Option<f64>,
    /// The step is widened if the threshold grid would exceed this many values.
    pub max_t_values: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_step: f64,
    /// Values for both screening quantiles.
    pub q_grid: Vec<f64>,
    /// `(delta_screen, L)` pairs.
    pub screen: Vec<(f64, usize)>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            t_step: 0.1,
            t_max: None,
            max_t_values: 2000,
            c_min: -50.0,
            c_max: 50.0,
            c_step: 1.0,
            q_grid: (1..=10).map(|k| k as f64 / 10.0).collect(),
            screen: vec![(0.1, 30), (0.1, 50)],
        }
    }
}

fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_step > 0.0) || !(self.c_step > 0.0) {
            return Err(LabError::usage("grid steps must be positive"));
        }
        if !(self.c_min <= self.c_max) {
            return Err(LabError::usage("c_min must not exceed c_max"));
        }
        if self.q_grid.is_empty() || self.screen.is_empty() || self.max_t_values < 1 {
            return Err(LabError::usage("search grids must be nonempty"));
        }
        for &q in &self.q_grid {
            if !(q > 0.0 && q <= 1.0) {
                return Err(LabError::usage(format!("q value {q} is outside (0, 1]")));
            }
        }
        if let Some(t) = self.t_max {
            if !(t >= 0.0) {
                return Err(LabError::usage("t_max must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn c_values(&self) -> Vec<f64> {
        let n = ((self.c_max - self.c_min) / self.c_step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| tidy(self.c_min + k as f64 * self.c_step))
            .collect()
    }

    pub fn t_values(&self, max_abs_d: f64) -> Vec<f64> {
        let top = self.t_max.unwrap_or(max_abs_d);
        let mut step = self.t_step;
        let mut n = (top / step + 1e-9).floor() as usize + 1;
        if n > self.max_t_values {
            n = self.max_t_values;
            step = if n > 1 { top / (n - 1) as f64 } else { step };
        }
        (0..n).map(|k| tidy(k as f64 * step)).collect()
    }

    /// Every `(q1, q2, delta_screen, L)` combination.
    pub fn configs(&self) -> Vec<(f64, f64, f64, usize)> {
        let mut out = Vec::new();
        for &(ds, l) in &self.screen {
            for &q1 in &self.q_grid {
                for &q2 in &self.q_grid {
                    out.push((q1, q2, ds, l));
                }
            }
        }
        out
    }
}

/// A scoring rule over the shared parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub name: &'static str,
    pub variant: Variant,
    pub quadratic: bool,
    pub rule: ThresholdRule,
}

pub const QDA: Method = Method {
    name: "qda",
    variant: Variant::Algorithm2,
    quadratic: true,
    rule: ThresholdRule::Hard,
};

pub const LDA: Method = Method {
    name: "lda",
    variant: Variant::Lda,
    quadratic: false,
    rule: ThresholdRule::Clip,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestParams {
    pub q1: f64,
    pub q2: f64,
    pub delta_screen: f64,
    pub l: usize,
    pub t: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub params: BestParams,
    pub train_err: f64,
    /// Screening configurations that failed and were skipped.
    pub configs_failed: usize,
}

/// Neighborhood cap actually used for a class with `n_k` training samples.
pub fn effective_l(l: usize, n_k: usize) -> usize {
    l.min(n_k / 2).max(1)
}

/// Screening paths for both classes of one training set.
#[derive(Debug)]
pub struct ClassPaths {
    paths: [PcsPath; 2],
    counts: [usize; 2],
}

impl ClassPaths {
    pub fn build(train: &LabeledDataset, space: &SearchSpace) -> Result<Self> {
        train.require_both_classes()?;
        let q1 = space.q_grid.iter().copied().fold(0.0f64, f64::max);
        let ds = space
            .screen
            .iter()
            .map(|s| s.0)
            .fold(f64::INFINITY, f64::min);
        let l = space.screen.iter().map(|s| s.1).max().unwrap_or(1);
        let counts = [train.n0, train.n1];
        let build = |k: u8| -> Result<PcsPath> {
            let widest = PcsConfig {
                q1,
                q2: 1.0,
                delta_screen: ds,
                l: effective_l(l, counts[k as usize]),
                ..PcsConfig::default()
            };
            Ok(PcsPath::build(&train.class_matrix(k), &widest)?)
        };
        Ok(ClassPaths {
            paths: [build(0)?, build(1)?],
            counts,
        })
    }

    pub fn parts(
        &self,
        train: &LabeledDataset,
        cfg: (f64, f64, f64, usize),
    ) -> Result<Algorithm2Parts> {
        let (q1, q2, delta_screen, l) = cfg;
        let est = |k: usize| -> Result<_> {
            let c = PcsConfig {
                q1,
                q2,
                delta_screen,
                l: effective_l(l, self.counts[k]),
                ..PcsConfig::default()
            };
            Ok(self.paths[k].estimate(&c)?.entries)
        };
        Ok(Algorithm2Parts::new(train, &est(0)?, &est(1)?)?)
    }
}

/// Paths keyed by a hash of the training index set.
#[derive(Debug, Default)]
pub struct PathCache {
    map: Mutex<HashMap<u64, Arc<ClassPaths>>>,
}

impl PathCache {
    pub fn key(indices: &[usize]) -> u64 {
        let mut h = DefaultHasher::new();
        indices.hash(&mut h);
        h.finish()
    }

    pub fn get_or_build(
        &self,
        indices: &[usize],
        train: &LabeledDataset,
        space: &SearchSpace,
    ) -> Result<Arc<ClassPaths>> {
        let key = Self::key(indices);
        if let Some(p) = self.map.lock().unwrap().get(&key) {
            return Ok(Arc::clone(p));
        }
        let built = Arc::new(ClassPaths::build(train, space)?);
        self.map.lock().unwrap().insert(key, Arc::clone(&built));
        Ok(built)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Strict order on candidates: errors, then `t`, then `|C|`, then `C`, then the
/// screening parameters. The search result therefore does not depend on enumeration order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    errors: usize,
    t: f64,
    c: f64,
    cfg: (f64, f64, f64, usize),
}

impl Candidate {
    fn better_than(&self, o: &Candidate) -> bool {
        use std::cmp::Ordering::*;
        let ord = self
            .errors
            .cmp(&o.errors)
            .then(self.t.total_cmp(&o.t))
            .then(self.c.abs().total_cmp(&o.c.abs()))
            .then(self.c.total_cmp(&o.c))
            .then(self.cfg.0.total_cmp(&o.cfg.0))
            .then(self.cfg.1.total_cmp(&o.cfg.1))
            .then(self.cfg.2.total_cmp(&o.cfg.2))
            .then(self.cfg.3.cmp(&o.cfg.3));
        ord == Less
    }
}

fn keep_best(best: &mut Option<Candidate>, c: Candidate) {
    if best.as_ref().is_none_or(|b| c.better_than(b)) {
        *best = Some(c);
    }
}

/// Sweep `(t, C)` for one set of parts without building classifiers.
///
/// The linear term is updated incrementally as features leave the selection, so the
/// whole threshold grid costs about one pass over the data.
fn sweep(
    parts: &Algorithm2Parts,
    train: &LabeledDataset,
    method: &Method,
    ts: &[f64],
    cs: &[f64],
    cfg: (f64, f64, f64, usize),
) -> Option<Candidate> {
    let (n, p) = (train.n(), train.p());
    let d = &parts.d;
    let quad: Vec<f64> = (0..n)
        .map(|i| {
            if method.quadratic {
                parts
                    .omega_diff
                    .quad_form(&parts.scaling.apply(&train.row(i)))
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()).then(a.cmp(&b)));
    // Hard: lin = sum over selected of d_j x_j. Clip: lin = a + t * b with a over
    // clipped-away-from features (|d_j| < t) and b the signs of the rest.
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..p {
            let x = train.x[(i, j)];
            match method.rule {
                ThresholdRule::Hard => a[i] += d[j] * x,
                ThresholdRule::Clip => {
                    if d[j] != 0.0 {
                        b[i] += d[j].signum() * x;
                    }
                }
            }
        }
    }
    let mut next = 0;
    let mut best = None;
    let mut base = vec![0.0; n];
    for &t in ts {
        while next < p && d[order[next]].abs() < t {
            let j = order[next];
            for i in 0..n {
                let x = train.x[(i, j)];
                match method.rule {
                    ThresholdRule::Hard => a[i] -= d[j] * x,
                    ThresholdRule::Clip => {
                        if d[j] != 0.0 {
                            a[i] += d[j] * x;
                            b[i] -= d[j].signum() * x;
                        }
                    }
                }
            }
            next += 1;
        }
        for i in 0..n {
            let lin = match method.rule {
                ThresholdRule::Hard => a[i],
                ThresholdRule::Clip => a[i] + t * b[i],
            };
            base[i] = quad[i] + 2.0 * lin;
        }
        for &c in cs {
            let errors = (0..n)
                .filter(|&i| u8::from(base[i] + c > 0.0) != train.y[i])
                .count();
            keep_best(&mut best, Candidate { errors, t, c, cfg });
        }
    }
    best
}

/// Fraction of rows of `data` that `model` gets wrong.
pub fn error_rate(model: &TrainedClassifier, data: &LabeledDataset) -> Result<f64> {
    let pred = model.predict_batch(&data.x)?;
    let wrong = pred.iter().zip(&data.y).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / data.n() as f64)
}

/// Grid search for several methods over shared screening estimates.
///
/// Each `(q1, q2, delta_screen, L)` is estimated once and every method re-scores it over
/// the `(t, C)` grid. Selection is by training error.
pub fn grid_search_methods(
    train: &LabeledDataset,
    paths: &ClassPaths,
    space: &SearchSpace,
    methods: &[Method],
) -> Vec<Result<(GridResult, TrainedClassifier)>> {
    let configs = space.configs();
    let cs = space.c_values();
    let per_config: Vec<std::result::Result<Vec<Option<Candidate>>, String>> = configs
        .par_iter()
        .map(|&cfg| {
            let parts = paths.parts(train, cfg).map_err(|e| e.to_string())?;
            let max_abs = parts.d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let ts = space.t_values(max_abs);
            Ok(methods
                .iter()
                .map(|m| sweep(&parts, train, m, &ts, &cs, cfg))
                .collect())
        })
        .collect();
    let failed = per_config.iter().filter(|r| r.is_err()).count();
    methods
        .iter()
        .enumerate()
        .map(|(mi, method)| {
            let mut best = None;
            for c in per_config.iter().flatten().filter_map(|v| v[mi]) {
                keep_best(&mut best, c);
            }
            let Some(best) = best else {
                let first = per_config.iter().find_map(|r| r.as_ref().err().cloned());
                return Err(LabError::data(format!(
                    "{}: every grid cell failed{}",
                    method.name,
                    first.map_or(String::new(), |e| format!(" ({e})"))
                )));
            };
            let parts = paths.parts(train, best.cfg)?;
            let model = parts.classifier(
                method.variant,
                best.t,
                best.c,
                method.rule,
                method.quadratic,
                false,
            );
            let (q1, q2, delta_screen, l) = best.cfg;
            let result = GridResult {
                params: BestParams {
                    q1,
                    q2,
                    delta_screen,
                    l,
                    t: best.t,
                    c: best.c,
                },
                train_err: error_rate(&model, train)?,
                configs_failed: failed,
            };
            Ok((result, model))
        })
        .collect()
}

/// Grid search for a single method.
pub fn grid_search(
    train: &LabeledDataset,
    space: &SearchSpace,
    method: &Method,
) -> Result<GridResult> {
    space.validate()?;
    let paths = ClassPaths::build(train, space)?;
    grid_search_methods(train, &paths, space, &[*method])
        .pop()
        .expect("one method")
        .map(|r| r.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: &'static str,
    pub params: BestParams,
    pub train_err: f64,
    pub test_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSplit {
    pub index: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// One entry per method, in request order; `Err` holds the failure message.
    pub outcomes: Vec<std::result::Result<MethodResult, String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub methods: Vec<&'static str>,
    pub splits: Vec<BenchSplit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    /// Splits where the first method's test error is at most the second's.
    pub first_not_worse: usize,
    /// Splits where it is strictly lower.
    pub first_better: usize,
    pub mean_test_err: Vec<f64>,
    pub failed_splits: usize,
}

impl BenchReport {
    pub fn test_errors(&self, method: usize) -> Vec<Option<f64>> {
        self.splits
            .iter()
            .map(|s| s.outcomes[method].as_ref().ok().map(|r| r.test_err))
            .collect()
    }

    pub fn summary(&self) -> BenchSummary {
        let mut first_not_worse = 0;
        let mut first_better = 0;
        let mut failed = 0;
        for s in &self.splits {
            match (s.outcomes.first(), s.outcomes.get(1)) {
                (Some(Ok(a)), Some(Ok(b))) => {
                    first_not_worse += usize::from(a.test_err <= b.test_err);
                    first_better += usize::from(a.test_err < b.test_err);
                }
                _ => failed += usize::from(s.outcomes.iter().any(|o| o.is_err())),
            }
        }
        let mean_test_err = (0..self.methods.len())
            .map(|m| {
                let v: Vec<f64> = self.test_errors(m).into_iter().flatten().collect();
                if v.is_empty() {
                    f64::NAN
                } else {
                    v.iter().sum::<f64>() / v.len() as f64
                }
            })
            .collect();
        BenchSummary {
            first_not_worse,
            first_better,
            mean_test_err,
            failed_splits: failed,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("split,method,q1,q2,delta,L,t,C,train_err,test_err\n");
        for sp in &self.splits {
            for (m, o) in self.methods.iter().zip(&sp.outcomes) {
                match o {
                    Ok(r) => {
                        let p = &r.params;
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{},{},{},{}",
                            sp.index,
                            m,
                            p.q1,
                            p.q2,
                            p.delta_screen,
                            p.l,
                            p.t,
                            p.c,
                            r.train_err,
                            r.test_err
                        );
                    }
                    Err(_) => {
                        let _ = writeln!(s, "{},{},NA,NA,NA,NA,NA,NA,NA,NA", sp.index, m);
                    }
                }
            }
        }
        s
    }
}

/// Run the quadratic rule against the linear baseline on every split.
pub fn run_benchmark(
    data: &LabeledDataset,
    plan: &SplitPlan,
    space: &SearchSpace,
) -> Result<BenchReport> {
    run_benchmark_with(data, plan, space, &[QDA, LDA])
}

/// [`run_benchmark`] for any list of methods; all share the same grids and estimates.
pub fn run_benchmark_with(
    data: &LabeledDataset,
    plan: &SplitPlan,
    space: &SearchSpace,
    methods: &[Method],
) -> Result<BenchReport> {
    space.validate()?;
    if methods.is_empty() {
        return Err(LabError::usage("no methods to compare"));
    }
    data.require_both_classes()?;
    let splits = make_splits(&data.y, plan)?;
    let cache = PathCache::default();
    let out: Vec<BenchSplit> = splits
        .par_iter()
        .enumerate()
        .map(|(index, split)| {
            let train = data.subset(&split.train);
            let test = data.subset(&split.test);
            let outcomes = match cache.get_or_build(&split.train, &train, space) {
                Err(e) => vec![Err(e.to_string()); methods.len()],
                Ok(paths) => grid_search_methods(&train, &paths, space, methods)
                    .into_iter()
                    .zip(methods)
                    .map(|(r, m)| {
                        let (g, model) = r.map_err(|e| e.to_string())?;
                        let test_err = error_rate(&model, &test).map_err(|e| e.to_string())?;
                        Ok(MethodResult {
                            method: m.name,
                            params: g.params,
                            train_err: g.train_err,
                            test_err,
                        })
                    })
                    .collect(),
            };
            BenchSplit {
                index,
                n_train: split.train.len(),
                n_test: split.test.len(),
                outcomes,
            }
        })
        .collect();
    Ok(BenchReport {
        methods: methods.iter().map(|m| m.name).collect(),
        splits: out,
    })
}

/// A labeled draw from the model at `params` with exactly `n0` and `n1` rows per class,
/// `Omega0` and `Omega1` drawn independently. Rows are class 0 first.
pub fn surrogate_dataset(
    params: &ArwParams,
    n0: usize,
    n1: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    params.validate()?;
    let scales = derive_scales(params)?;
    let mut rng = stream(seed, StreamTag::Simulate, 1, 0);
    let mu = sample_mu(&scales, params.p, &mut rng);
    let o0 = sample_precision(&scales, params.p, &mut rng)?;
    let o1 = sample_precision(&scales, params.p, &mut rng)?;
    let sampler = MixtureSampler::new(&mu, &o0, &o1)?;
    let mut rng = stream(seed, StreamTag::Simulate, 1, 1);
    let x0 = sampler.sample_class_matrix(0, n0, &mut rng);
    let x1 = sampler.sample_class_matrix(1, n1, &mut rng);
    let mut x = nalgebra::DMatrix::zeros(n0 + n1, params.p);
    x.rows_mut(0, n0).copy_from(&x0);
    x.rows_mut(n0, n1).copy_from(&x1);
    let mut y = vec![0u8; n0];
    y.extend(std::iter::repeat_n(1u8, n1));
    Ok(LabeledDataset::new(x, y)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes_round_half_up() {
        assert_eq!(test_size(120, 0.25), 30);
        assert_eq!(test_size(61, 0.25), 15);
        assert_eq!(test_size(6, 0.25), 2);
        let mut y = vec![0u8; 120];
        y.extend(vec![1u8; 61]);
        let plan = SplitPlan::default();
        let splits = make_splits(&y, &plan).unwrap();
        assert_eq!(splits.len(), 15);
        for s in &splits {
            let t1 = s.test.iter().filter(|&&i| y[i] == 1).count();
            assert_eq!((s.test.len() - t1, t1), (30, 15));
            assert_eq!(s.train.len() + s.test.len(), 181);
            assert!(s.train.iter().all(|i| s.test.binary_search(i).is_err()));
        }
        assert_eq!(make_splits(&y, &plan).unwrap(), splits);
        assert_ne!(splits[0], splits[1]);
    }

    #[test]
    fn split_errors() {
        let y = [0u8, 0, 1, 1];
        let mut plan = SplitPlan {
            fraction: 0.0,
            ..SplitPlan::default()
        };
        assert!(make_splits(&y, &plan).is_err());
        plan.fraction = 0.1;
        assert!(make_splits(&y, &plan).is_err());
    }

    #[test]
    fn grids() {
        let s = SearchSpace::default();
        let c = s.c_values();
        assert_eq!(c.len(), 101);
        assert_eq!((c[0], c[50], c[100]), (-50.0, 0.0, 50.0));
        let t = s.t_values(0.35);
        assert_eq!(t, vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(s.q_grid.len(), 10);
        assert_eq!(s.q_grid[2], 0.3);
        assert_eq!(s.configs().len(), 200);
        let capped = SearchSpace {
            max_t_values: 3,
            ..SearchSpace::default()
        };
        assert_eq!(capped.t_values(10.0), vec![0.0, 5.0, 10.0]);
    }

    fn toy_train() -> LabeledDataset {
        use rand::Rng;
        let mut rng = stream(3, StreamTag::Misc, 0, 0);
        let (n, p) = (60, 8);
        let y: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
        let x = nalgebra::DMatrix::from_fn(n, p, |i, j| {
            let z: f64 = rng.random::<f64>() - 0.5;
            z * if y[i] == 1 && j < 3 { 2.5 } else { 1.0 }
                + if y[i] == 1 && j == 0 { 0.4 } else { 0.0 }
        });
        LabeledDataset::new(x, y).unwrap()
    }

    #[test]
    fn sweep_counts_match_rebuilt_classifier() {
        let train = toy_train();
        let space = SearchSpace {
            t_step: 0.05,
            c_min: -6.0,
            c_max: 6.0,
            c_step: 0.5,
            q_grid: vec![1.0],
            screen: vec![(0.1, 5)],
            ..SearchSpace::default()
        };
        let paths = ClassPaths::build(&train, &space).unwrap();
        let cfg = space.configs()[0];
        let parts = paths.parts(&train, cfg).unwrap();
        for method in [QDA, LDA] {
            let max_abs = parts.d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for &t in &space.t_values(max_abs) {
                for &c in &space.c_values() {
                    let got = sweep(&parts, &train, &method, &[t], &[c], cfg).unwrap();
                    let model = parts.classifier(
                        method.variant,
                        t,
                        c,
                        method.rule,
                        method.quadratic,
                        false,
                    );
                    let err = error_rate(&model, &train).unwrap();
                    assert_eq!(
                        got.errors as f64 / train.n() as f64,
                        err,
                        "{} t={t} c={c}",
                        method.name
                    );
                }
            }
        }
    }

    #[test]
    fn candidate_order_is_strict() {
        let cfg = (0.5, 0.5, 0.1, 30);
        let a = Candidate {
            errors: 3,
            t: 0.1,
            c: 2.0,
            cfg,
        };
        let b = Candidate {
            errors: 3,
            t: 0.1,
            c: -2.0,
            cfg,
        };
        assert!(b.better_than(&a) && !a.better_than(&b));
        let c = Candidate {
            errors: 3,
            t: 0.0,
            c: 9.0,
            cfg,
        };
        assert!(c.better_than(&a));
        assert!(!a.better_than(&a));
    }
}
