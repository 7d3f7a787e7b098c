//! Evaluation runs and the summary table.

use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_ci, mean, median, normalize_costs, BOOTSTRAP_RESAMPLES, NORMALIZE_HI, NORMALIZE_LO};
use crate::baselines::LinearGainPolicy;
use crate::error::{Error, Result};
use crate::ipp::{ipp_env, GainKind, GcbOraclePolicy, HeuristicPolicy, IppPolicy, LearnedIppPolicy, OneStepOraclePolicy, SensorModel};
use crate::learn::{par_map, Regressor};
use crate::rng::{derive, rng_for};
use crate::sail::LearnedSelector;
use crate::search::{run_search_with, AStar, Greedy, Heuristic, Mha, Outcome, SearchOptions, SearchResult, Selector};
use crate::worldgen::ProblemInstance;

/// Tag used for methods without a trained model.
pub const NO_MODEL: &str = "-";

#[derive(Clone, Debug)]
pub enum SearchMethod<'m> {
    AStar,
    GreedyEuclidean,
    GreedyManhattan,
    Mha,
    Learned {
        name: String,
        model: &'m Regressor,
        config_hash: String,
    },
}

impl SearchMethod<'_> {
    /// Parses a classical method name.
    pub fn classical(name: &str) -> Option<Self> {
        Some(match name {
            "astar" => SearchMethod::AStar,
            "greedy-euc" => SearchMethod::GreedyEuclidean,
            "greedy-man" => SearchMethod::GreedyManhattan,
            "mha" => SearchMethod::Mha,
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            SearchMethod::AStar => "astar".into(),
            SearchMethod::GreedyEuclidean => "greedy-euc".into(),
            SearchMethod::GreedyManhattan => "greedy-man".into(),
            SearchMethod::Mha => "mha".into(),
            SearchMethod::Learned { name, .. } => name.clone(),
        }
    }

    pub fn config_hash(&self) -> &str {
        match self {
            SearchMethod::Learned { config_hash, .. } => config_hash,
            _ => NO_MODEL,
        }
    }

    pub fn run(&self, inst: &ProblemInstance, budget: usize) -> Result<SearchResult> {
        self.run_with(inst, budget, SearchOptions::default())
    }

    pub fn run_with(&self, inst: &ProblemInstance, budget: usize, opts: SearchOptions) -> Result<SearchResult> {
        let mut sel: Box<dyn Selector + '_> = match self {
            SearchMethod::AStar => Box::new(AStar::default()),
            SearchMethod::GreedyEuclidean => Box::new(Greedy::new(Heuristic::Euclidean)),
            SearchMethod::GreedyManhattan => Box::new(Greedy::new(Heuristic::Manhattan)),
            SearchMethod::Mha => Box::new(Mha::standard()),
            SearchMethod::Learned { model, .. } => Box::new(LearnedSelector::new(model)?),
        };
        run_search_with(inst, sel.as_mut(), budget, opts, &mut ())
    }
}

/// Runs every method on every instance. Results are indexed
/// `[method][instance]`.
pub fn eval_search(instances: &[ProblemInstance], methods: &[SearchMethod<'_>], budget: usize) -> Result<Vec<Vec<SearchResult>>> {
    let n = instances.len();
    let flat = par_map(methods.len() * n, |k| methods[k / n].run(&instances[k % n], budget));
    let mut out: Vec<Vec<SearchResult>> = methods.iter().map(|_| Vec::with_capacity(n)).collect();
    for (k, r) in flat.into_iter().enumerate() {
        out[k / n].push(r?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub enum IppMethod<'m> {
    Heuristic { kind: GainKind, lambda: f64 },
    Learned {
        name: String,
        models: &'m [Regressor],
        config_hash: String,
    },
    Linear {
        policy: LinearGainPolicy,
        config_hash: String,
    },
    OneStepOracle,
    GcbOracle,
}

impl IppMethod<'_> {
    pub fn name(&self) -> String {
        match self {
            IppMethod::Heuristic { kind, lambda } if *lambda == 0.0 => kind.name().to_string(),
            IppMethod::Heuristic { kind, lambda } => format!("{}-l{lambda}", kind.name()),
            IppMethod::Learned { name, .. } => name.clone(),
            IppMethod::Linear { .. } => "cem".into(),
            IppMethod::OneStepOracle => "oracle-onestep".into(),
            IppMethod::GcbOracle => "oracle-gcb".into(),
        }
    }

    pub fn config_hash(&self) -> &str {
        match self {
            IppMethod::Learned { config_hash, .. } | IppMethod::Linear { config_hash, .. } => config_hash,
            _ => NO_MODEL,
        }
    }

    fn policy(&self) -> Result<Box<dyn IppPolicy + '_>> {
        Ok(match self {
            IppMethod::Heuristic { kind, lambda } => Box::new(HeuristicPolicy::new(*kind, *lambda)?),
            IppMethod::Learned { models, .. } => Box::new(LearnedIppPolicy::new(models)?),
            IppMethod::Linear { policy, .. } => Box::new(policy.clone()),
            IppMethod::OneStepOracle => Box::new(OneStepOraclePolicy),
            IppMethod::GcbOracle => Box::new(GcbOraclePolicy),
        })
    }
}

/// One roll-out's outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IppRun {
    pub coverage: f64,
    pub cost: f64,
    pub within_budget: bool,
}

/// Final coverage of every method on every instance, `[method][instance]`.
pub fn eval_ipp(
    instances: &[ProblemInstance],
    methods: &[IppMethod<'_>],
    horizon: usize,
    budget: Option<f64>,
    sensor: Option<SensorModel>,
) -> Result<Vec<Vec<IppRun>>> {
    let n = instances.len();
    let flat = par_map(methods.len() * n, |k| -> Result<IppRun> {
        let (m, i) = (k / n, k % n);
        let env = ipp_env(&instances[i], sensor, horizon, budget)?;
        let mut p = methods[m].policy()?;
        let steps = env.rollout(p.as_mut(), &mut rng_for(0, &[i as u64]))?;
        let last = steps.last().expect("roll-outs include the start");
        Ok(IppRun {
            coverage: last.coverage,
            cost: last.cost,
            within_budget: budget.is_none_or(|b| last.cost <= b + 1e-9),
        })
    });
    let mut out: Vec<Vec<IppRun>> = methods.iter().map(|_| Vec::with_capacity(n)).collect();
    for (k, r) in flat.into_iter().enumerate() {
        out[k / n].push(r?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub dataset: String,
    pub method: String,
    /// `expansions` or `coverage`.
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Presentational scale for expansion counts; absent for coverage.
    pub normalized: Option<f64>,
    pub config_hash: String,
    /// Eval seed; each row's bootstrap draws from its own stream of it.
    pub seed: u64,
}

impl EvalRow {
    pub fn from_values(
        dataset: &str,
        method: &str,
        metric: &str,
        values: &[f64],
        successes: usize,
        config_hash: &str,
        seed: u64,
        stream: u64,
    ) -> Self {
        let (ci_lo, ci_hi) = bootstrap_ci(values, BOOTSTRAP_RESAMPLES, 0.05, derive(seed, &[stream]));
        EvalRow {
            dataset: dataset.into(),
            method: method.into(),
            metric: metric.into(),
            n: values.len(),
            mean: mean(values),
            median: median(values),
            success_rate: if values.is_empty() { 0.0 } else { successes as f64 / values.len() as f64 },
            ci_lo,
            ci_hi,
            normalized: None,
            config_hash: config_hash.into(),
            seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "dataset,method,metric,n,mean,median,success_rate,ci_lo,ci_hi,normalized_cost,config_hash,seed";

    /// Rows for search results; expansion means are normalized with the
    /// fixed bracket across the whole table.
    pub fn search(dataset: &str, methods: &[SearchMethod<'_>], results: &[Vec<SearchResult>], seed: u64) -> Result<Self> {
        let mut rows = Vec::with_capacity(methods.len());
        for (m, (method, rs)) in methods.iter().zip(results).enumerate() {
            let values: Vec<f64> = rs.iter().map(|r| r.expansions as f64).collect();
            let ok = rs.iter().filter(|r| r.outcome == Outcome::Found).count();
            rows.push(EvalRow::from_values(
                dataset,
                &method.name(),
                "expansions",
                &values,
                ok,
                method.config_hash(),
                seed,
                m as u64,
            ));
        }
        let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
        for (row, v) in rows.iter_mut().zip(normalize_costs(&means, NORMALIZE_LO, NORMALIZE_HI)?) {
            row.normalized = Some(v);
        }
        Ok(EvalReport { rows })
    }

    pub fn ipp(dataset: &str, methods: &[IppMethod<'_>], runs: &[Vec<IppRun>], seed: u64) -> Self {
        let rows = methods
            .iter()
            .zip(runs)
            .enumerate()
            .map(|(m, (method, rs))| {
                let values: Vec<f64> = rs.iter().map(|r| r.coverage).collect();
                let ok = rs.iter().filter(|r| r.within_budget).count();
                EvalRow::from_values(
                    dataset,
                    &method.name(),
                    "coverage",
                    &values,
                    ok,
                    method.config_hash(),
                    seed,
                    m as u64,
                )
            })
            .collect();
        EvalReport { rows }
    }

    pub fn row(&self, method: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{}\n",
                r.dataset,
                r.method,
                r.metric,
                r.n,
                r.mean,
                r.median,
                r.success_rate,
                r.ci_lo,
                r.ci_hi,
                r.normalized.map_or(String::new(), |v| format!("{v:.4}")),
                r.config_hash,
                r.seed
            ));
        }
        out
    }
}

/// Per-run CSV (with wall time) for search evaluations.
pub fn search_runs_csv(methods: &[SearchMethod<'_>], results: &[Vec<SearchResult>]) -> String {
    let mut out = format!("{}\n", SearchResult::csv_header());
    for (method, rs) in methods.iter().zip(results) {
        let name = method.name();
        for (i, r) in rs.iter().enumerate() {
            out.push_str(&r.csv_row(i, &name));
            out.push('\n');
        }
    }
    out
}

/// Checks that a method list names only known classical methods or the
/// given learned names.
pub fn check_method_names(names: &[&str], learned: &[&str]) -> Result<()> {
    for n in names {
        if SearchMethod::classical(n).is_none() && !learned.contains(n) {
            return Err(Error::config("methods", format!("unknown method `{n}`")));
        }
    }
    Ok(())
}
