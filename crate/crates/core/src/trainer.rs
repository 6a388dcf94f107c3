//! Training of [`MpmcModel`]s against L2-type discrepancy objectives.
//!
//! A run trains `batch_size` independent models that share one set of
//! hyperparameters; element `b` has its own input set and initialization.
//! The optimizer is AdamW. After `max_initial_steps` the learning rate is
//! divided by `lr_decay_factor` whenever the batch-minimum evaluated
//! objective has not improved for `plateau_window` steps, and training ends
//! once it falls below `lr_floor` or `max_steps` is reached. Each element
//! keeps the best parameters seen at an evaluation; the returned element is
//! the one whose best output minimizes the selection objective.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::discrepancy::{hickernell_squared, sample_projections, warnock_l2_squared, ProjectionMode, ProjectionSpec};
use crate::generators::{self, GeneratorKind, GeneratorSpec};
use crate::gnn::{self, build_radius_graph, Checkpoint, Graph, MpmcModel};
use crate::seed::{self, stream};
use crate::{Error, PointSet, ProjectionIndexSet, Result};

/// Allowed batch sizes.
pub const BATCH_SIZES: [usize; 3] = [8, 16, 32];

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const DIVERGENCE_FACTOR: f64 = 10.0;
const DIVERGENCE_EVALS: usize = 100;

/// Human-readable optimizer description recorded alongside results.
pub const OPTIMIZER: &str = "adamw(beta1=0.9, beta2=0.999, eps=1e-8)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Uniform,
    Qmc,
    ShiftedQmc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Squared L2 star discrepancy of the full point set.
    Warnock,
    /// Sum of squared L2 discrepancies over projections. Random specs are
    /// redrawn at every step; evaluations use the spec's own seed.
    Hickernell(ProjectionSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// 5000 initial steps, plateau window 500.
    Desk,
    /// 100000 initial steps, plateau window 2000.
    Full,
}

fn default_qmc_kind() -> GeneratorKind {
    GeneratorKind::Sobol
}

fn default_shift_bound() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub n_points: usize,
    pub dim: usize,
    pub input_kind: InputKind,
    /// Construction used by the `qmc` and `shifted_qmc` input kinds.
    #[serde(default = "default_qmc_kind")]
    pub qmc_kind: GeneratorKind,
    /// Upper bound of the per-coordinate shift for `shifted_qmc`.
    #[serde(default = "default_shift_bound")]
    pub shift_bound: f64,
    pub radius: f64,
    pub hidden: usize,
    pub layers: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_initial_steps: u64,
    pub plateau_window: u64,
    pub eval_every: u64,
    pub lr_decay_factor: f64,
    pub lr_floor: f64,
    /// Hard step budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_spec: Option<ProjectionSpec>,
    pub seed: u64,
}

impl TrainConfig {
    /// Warnock objective on uniform random inputs with the given schedule.
    pub fn new(n_points: usize, dim: usize, schedule: Schedule) -> Self {
        let (initial, window) = match schedule {
            Schedule::Desk => (5_000, 500),
            Schedule::Full => (100_000, 2_000),
        };
        Self {
            n_points,
            dim,
            input_kind: InputKind::Uniform,
            qmc_kind: GeneratorKind::Sobol,
            shift_bound: 0.1,
            radius: (0.5f64).min((dim as f64).sqrt()),
            hidden: 32,
            layers: 2,
            learning_rate: 1e-3,
            weight_decay: 1e-6,
            batch_size: 8,
            max_initial_steps: initial,
            plateau_window: window,
            eval_every: 100,
            lr_decay_factor: 10.0,
            lr_floor: 1e-6,
            max_steps: Some(4 * initial),
            objective: Objective::Warnock,
            selection_spec: None,
            seed: 0,
        }
    }

    pub fn desk(n_points: usize, dim: usize) -> Self {
        Self::new(n_points, dim, Schedule::Desk)
    }

    pub fn full(n_points: usize, dim: usize) -> Self {
        Self::new(n_points, dim, Schedule::Full)
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_points == 0 || self.dim == 0 {
            return bad(format!("n_points {} and dim {} must be positive", self.n_points, self.dim));
        }
        if self.hidden == 0 {
            return bad("hidden must be positive".into());
        }
        if !BATCH_SIZES.contains(&self.batch_size) {
            return bad(format!("batch_size {} not in {BATCH_SIZES:?}", self.batch_size));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be finite and non-negative", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight_decay {} must be finite and non-negative", self.weight_decay));
        }
        if !(self.lr_floor > 0.0) {
            return bad(format!("lr_floor {} must be positive", self.lr_floor));
        }
        if !(self.lr_decay_factor > 1.0) {
            return bad(format!("lr_decay_factor {} must exceed 1", self.lr_decay_factor));
        }
        if self.eval_every == 0 || self.plateau_window == 0 {
            return bad("eval_every and plateau_window must be positive".into());
        }
        let max_r = (self.dim as f64).sqrt();
        if !(0.0..=max_r).contains(&self.radius) {
            return Err(Error::InvalidRadius { radius: self.radius, max: max_r });
        }
        if let Objective::Hickernell(spec) = &self.objective {
            spec.validate(self.dim)?;
        }
        if let Some(spec) = &self.selection_spec {
            spec.validate(self.dim)?;
        }
        Ok(())
    }

    fn element_seed(&self, stream: u64, element: usize) -> u64 {
        seed::derive_path(self.seed, &[stream, element as u64])
    }
}

/// One input set per batch element.
pub fn make_inputs(config: &TrainConfig) -> Result<Vec<PointSet<f64>>> {
    let (n, d) = (config.n_points, config.dim);
    let qmc = || GeneratorSpec::new(config.qmc_kind, n).with_dim(d).generate::<f64>();
    let check = |p: PointSet<f64>| {
        if p.dim() != d || p.n_points() != n {
            return Err(Error::InvalidConfig(format!(
                "{} produced a {}x{} set, expected {n}x{d}",
                config.qmc_kind.name(),
                p.n_points(),
                p.dim()
            )));
        }
        Ok(p)
    };
    (0..config.batch_size)
        .map(|b| {
            let s = config.element_seed(stream::INPUTS, b);
            match config.input_kind {
                InputKind::Uniform => generators::uniform_random(n, d, s),
                InputKind::Qmc => check(qmc()?),
                InputKind::ShiftedQmc => generators::random_shift(&check(qmc()?)?, s, config.shift_bound),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: u64,
    /// Batch-minimum evaluated objective.
    pub objective: f64,
    pub learning_rate: f64,
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub best_model: MpmcModel,
    pub best_points: PointSet<f64>,
    /// Input set of the selected element (the model's graph is built on it).
    pub inputs: PointSet<f64>,
    pub history: Vec<HistoryEntry>,
    /// Selection objective of the returned element, as a sum of squared L2
    /// discrepancies.
    pub selection_value: f64,
    /// Selection objective per batch element; `None` for diverged elements.
    pub selection_values: Vec<Option<f64>>,
    pub selected_element: usize,
    /// Seed the selected element's model was initialized from.
    pub model_seed: u64,
    pub steps: u64,
    pub final_learning_rate: f64,
    pub config: TrainConfig,
}

impl TrainResult {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(self.best_model.clone(), self.model_seed, self.config.radius, Some(&self.inputs))
    }

    /// `step,objective` CSV.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("step,objective\n");
        for h in &self.history {
            writeln!(out, "{},{:.16e}", h.step, h.objective).unwrap();
        }
        out
    }
}

/// AdamW moments for one parameter list.
#[derive(Clone, Debug)]
pub struct AdamW {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl AdamW {
    pub fn new(model: &MpmcModel) -> Self {
        let zeros: Vec<Vec<f64>> = model.params().iter().map(|p| vec![0.0; p.data().len()]).collect();
        Self { m: zeros.clone(), v: zeros, t: 0 }
    }

    pub fn step(&mut self, params: Vec<&mut Tensor>, grads: &[Tensor], lr: f64, weight_decay: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((x, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = BETA1 * *mi + (1.0 - BETA1) * gi;
                *vi = BETA2 * *vi + (1.0 - BETA2) * gi * gi;
                *x -= lr * weight_decay * *x;
                *x -= lr * (*mi / c1) / ((*vi / c2).sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Evaluated objective: the training objective with fixed projections.
struct Evaluator {
    subsets: Option<Vec<ProjectionIndexSet>>,
}

impl Evaluator {
    fn new(objective: &Objective, dim: usize) -> Result<Self> {
        Ok(match objective {
            Objective::Warnock => Self { subsets: None },
            Objective::Hickernell(spec) => Self { subsets: Some(spec.subsets(dim)?) },
        })
    }

    fn from_selection(config: &TrainConfig) -> Result<Self> {
        match &config.selection_spec {
            Some(spec) => Ok(Self { subsets: Some(spec.subsets(config.dim)?) }),
            None => Self::new(&config.objective, config.dim),
        }
    }

    fn eval(&self, points: &PointSet<f64>) -> Result<f64> {
        match &self.subsets {
            None => warnock_l2_squared(points),
            Some(s) => hickernell_squared(points, s),
        }
    }
}

struct Element {
    model: MpmcModel,
    seed: u64,
    opt: AdamW,
    inputs: PointSet<f64>,
    input_tensor: Tensor,
    graph: Graph,
    best_model: MpmcModel,
    best_value: f64,
    initial_value: Option<f64>,
    over_limit: usize,
    diverged: bool,
}

struct StepContext<'a> {
    config: &'a TrainConfig,
    evaluator: Evaluator,
    /// Training projections for exhaustive and explicit Hickernell objectives.
    fixed: Option<Arc<[ProjectionIndexSet]>>,
}

struct StepOutcome {
    value: Option<f64>,
    grads: Option<Vec<Tensor>>,
    finite: bool,
}

impl Element {
    fn run_step(&self, ctx: &StepContext, eval: bool, step: u64, index: usize, want_grad: bool) -> Result<StepOutcome> {
        let config = ctx.config;
        let mut tape = Tape::new();
        let params: Vec<Var> = self.model.params().into_iter().map(|t| tape.leaf(t.clone())).collect();
        let x = tape.constant(self.input_tensor.clone());
        let out = self.model.forward_on_tape(&mut tape, &params, x, &self.graph)?;
        let loss = match &config.objective {
            Objective::Warnock => tape.warnock_loss(out)?,
            Objective::Hickernell(spec) => {
                let subsets: Arc<[ProjectionIndexSet]> = match spec.mode {
                    ProjectionMode::Random => {
                        let s = seed::derive_path(config.seed, &[stream::PROJECTIONS, index as u64, step]);
                        sample_projections(spec, config.dim, &mut seed::rng(s)).into()
                    }
                    _ => ctx.fixed.clone().expect("fixed projections resolved"),
                };
                tape.hickernell_loss(out, subsets)?
            }
        };
        let loss_value = tape.value(loss).data()[0];
        let value = match (eval, &config.objective) {
            (false, _) => None,
            (true, Objective::Warnock) => Some(loss_value),
            (true, Objective::Hickernell(_)) => {
                let t = tape.value(out);
                Some(ctx.evaluator.eval(&PointSet::new(t.rows(), t.cols(), t.data().to_vec())?)?)
            }
        };
        if !loss_value.is_finite() {
            return Ok(StepOutcome { value, grads: None, finite: false });
        }
        if !want_grad {
            return Ok(StepOutcome { value, grads: None, finite: true });
        }
        tape.backward(loss)?;
        let grads: Vec<Tensor> = params
            .iter()
            .map(|&p| tape.grad(p).cloned().unwrap_or_else(|| {
                let v = tape.value(p);
                Tensor::zeros(v.rows(), v.cols())
            }))
            .collect();
        let finite = grads.iter().all(|g| g.data().iter().all(|v| v.is_finite()));
        Ok(StepOutcome { value, grads: Some(grads), finite })
    }
}

/// Trains `config.batch_size` models and returns the best element.
pub fn train(config: &TrainConfig) -> Result<TrainResult> {
    config.validate()?;
    let inputs = make_inputs(config)?;
    let evaluator = Evaluator::new(&config.objective, config.dim)?;
    let fixed = match &config.objective {
        Objective::Hickernell(spec) if spec.mode != ProjectionMode::Random => evaluator.subsets.clone().map(Into::into),
        _ => None,
    };
    let ctx = StepContext { config, evaluator, fixed };

    let mut elements: Vec<Element> = inputs
        .into_iter()
        .enumerate()
        .map(|(b, inputs)| {
            let seed = config.element_seed(stream::MODEL_INIT, b);
            let model = gnn::init_model(config.dim, config.hidden, config.layers, seed)?;
            let graph = build_radius_graph(&inputs, config.radius)?;
            Ok(Element {
                opt: AdamW::new(&model),
                best_model: model.clone(),
                model,
                seed,
                input_tensor: Tensor::from_points(&inputs),
                inputs,
                graph,
                best_value: f64::INFINITY,
                initial_value: None,
                over_limit: 0,
                diverged: false,
            })
        })
        .collect::<Result<_>>()?;

    let mut lr = config.learning_rate;
    let mut history = Vec::new();
    let mut best_batch = f64::INFINITY;
    let mut last_improvement = 0u64;
    let mut step = 0u64;
    let mut divergence_step = None;

    loop {
        let at_budget = config.max_steps.is_some_and(|m| step >= m);
        let is_eval = step.is_multiple_of(config.eval_every) || at_budget;
        let stop_now = at_budget || lr < config.lr_floor;
        let outcomes: Vec<Result<Option<StepOutcome>>> = elements
            .par_iter()
            .enumerate()
            .map(|(b, el)| {
                if el.diverged {
                    return Ok(None);
                }
                el.run_step(&ctx, is_eval, step, b, !stop_now).map(Some)
            })
            .collect();

        let mut batch_min = f64::INFINITY;
        for (el, outcome) in elements.iter_mut().zip(outcomes) {
            let Some(outcome) = outcome? else { continue };
            if !outcome.finite {
                el.diverged = true;
                divergence_step.get_or_insert(step);
                continue;
            }
            if let Some(v) = outcome.value {
                if !v.is_finite() {
                    el.diverged = true;
                    divergence_step.get_or_insert(step);
                    continue;
                }
                let initial = *el.initial_value.get_or_insert(v);
                el.over_limit = if v > DIVERGENCE_FACTOR * initial { el.over_limit + 1 } else { 0 };
                if el.over_limit >= DIVERGENCE_EVALS {
                    el.diverged = true;
                    divergence_step.get_or_insert(step);
                    continue;
                }
                if v < el.best_value {
                    el.best_value = v;
                    el.best_model = el.model.clone();
                }
                batch_min = batch_min.min(v);
            }
            if let Some(grads) = outcome.grads {
                el.opt.step(el.model.params_mut(), &grads, lr, config.weight_decay);
            }
        }

        if elements.iter().all(|e| e.diverged) {
            let last = elements
                .iter()
                .filter(|e| e.best_value.is_finite())
                .min_by(|a, b| a.best_value.total_cmp(&b.best_value))
                .map(|e| Box::new(e.best_model.clone()));
            return Err(Error::TrainingDiverged { step: divergence_step.unwrap_or(step), last_finite: last });
        }

        if is_eval {
            history.push(HistoryEntry { step, objective: batch_min, learning_rate: lr });
            if batch_min < best_batch {
                best_batch = batch_min;
                last_improvement = step;
            } else if step >= config.max_initial_steps && step - last_improvement >= config.plateau_window {
                lr /= config.lr_decay_factor;
                last_improvement = step;
            }
        }
        if stop_now || lr < config.lr_floor {
            break;
        }
        step += 1;
    }

    select(config, elements, history, step, lr)
}

fn select(config: &TrainConfig, elements: Vec<Element>, history: Vec<HistoryEntry>, steps: u64, lr: f64) -> Result<TrainResult> {
    let selector = Evaluator::from_selection(config)?;
    let scored: Vec<Option<(f64, PointSet<f64>)>> = elements
        .par_iter()
        .map(|el| {
            if el.diverged && !el.best_value.is_finite() {
                return Ok(None);
            }
            let pts = gnn::forward(&el.best_model, &el.inputs, &el.graph)?;
            let v = selector.eval(&pts)?;
            Ok(v.is_finite().then_some((v, pts)))
        })
        .collect::<Result<_>>()?;
    let selection_values: Vec<Option<f64>> = scored.iter().map(|s| s.as_ref().map(|s| s.0)).collect();
    let (selected, _) = selection_values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(Error::TrainingDiverged { step: steps, last_finite: None })?;
    let (selection_value, best_points) = scored.into_iter().nth(selected).flatten().expect("selected element is scored");
    let el = elements.into_iter().nth(selected).expect("index in range");
    Ok(TrainResult {
        best_model: el.best_model,
        best_points,
        inputs: el.inputs,
        history,
        selection_value,
        selection_values,
        selected_element: selected,
        model_seed: el.seed,
        steps,
        final_learning_rate: lr,
        config: config.clone(),
    })
}

/// Outcome of one random-search trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub config: TrainConfig,
    pub selection_value: Option<f64>,
    pub error: Option<String>,
}

pub struct SearchResult {
    pub best: TrainResult,
    pub best_trial: usize,
    pub trials: Vec<TrialRecord>,
}

/// Hyperparameters of trial `trial`, drawn from the search space.
pub fn sample_trial(base: &TrainConfig, seed: u64, trial: usize) -> TrainConfig {
    let mut rng = seed::rng(seed::derive_path(seed, &[stream::SEARCH, trial as u64]));
    let log_uniform = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| {
        (rng.random_range(lo.ln()..=hi.ln())).exp().clamp(lo, hi)
    };
    let mut c = base.clone();
    c.learning_rate = log_uniform(&mut rng, 1e-4, 1e-2);
    c.weight_decay = log_uniform(&mut rng, 1e-8, 1e-2);
    c.hidden = [32, 64, 128, 256][rng.random_range(0..4)];
    c.layers = rng.random_range(1..=10);
    c.batch_size = BATCH_SIZES[rng.random_range(0..3)];
    let u: f64 = rng.random();
    c.radius = (base.dim as f64).sqrt() * (1.0 - u);
    c.seed = seed::derive_path(seed, &[stream::SEARCH, trial as u64, 0]);
    c
}

/// Trains `n_trials` sampled configurations and keeps the one with the
/// smallest selection value (ties go to the lower trial index).
pub fn random_search(base: &TrainConfig, n_trials: usize, seed: u64) -> Result<SearchResult> {
    if n_trials == 0 {
        return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
    }
    let configs: Vec<TrainConfig> = (0..n_trials).map(|t| sample_trial(base, seed, t)).collect();
    let runs: Vec<Result<TrainResult>> = configs.par_iter().map(train).collect();
    let mut trials = Vec::with_capacity(n_trials);
    let mut best: Option<(usize, TrainResult)> = None;
    for (t, (config, run)) in configs.into_iter().zip(runs).enumerate() {
        match run {
            Ok(r) => {
                trials.push(TrialRecord { trial: t, config, selection_value: Some(r.selection_value), error: None });
                if best.as_ref().is_none_or(|(_, b)| r.selection_value < b.selection_value) {
                    best = Some((t, r));
                }
            }
            Err(e) => trials.push(TrialRecord { trial: t, config, selection_value: None, error: Some(e.to_string()) }),
        }
    }
    let (best_trial, best) = best.ok_or(Error::SearchFailed(n_trials))?;
    Ok(SearchResult { best, best_trial, trials })
}
