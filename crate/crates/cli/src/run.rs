use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use clairvoyant::baselines::{
    train_behavior_cloning, train_cem_ipp, train_cem_search, train_qlearning, CemConfig, CemLog, QlConfig,
};
use clairvoyant::bench::{
    check_method_names, config_hash, eval_ipp, eval_search, load_model, render_frames, save_model, search_runs_csv,
    EvalReport, IppMethod, ModelMeta, ModelPayload, SearchMethod,
};
use clairvoyant::ipp::{train_ipp, GainKind, IppTrainConfig, SensorModel};
use clairvoyant::learn::{IterationLog, Regressor, Schema};
use clairvoyant::sail::{train_sail, ComplexityReport, LearnedSelector, SailConfig};
use clairvoyant::search::{run_search, AStar, Heuristic, SearchOptions, SearchResult};
use clairvoyant::worldgen::{
    read_dataset, sample_ipp_instance, sample_search_instance, write_dataset, DatasetMeta, Family, FamilyParams,
    ProblemInstance, Task, WorldSpec,
};
use clairvoyant::{Error, Result};

use crate::cli::{EvalArgs, GenArgs, LedgerArgs, RenderArgs, TrainArgs, TrainMethod};

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))
}

fn load_instances(dir: &Path) -> Result<Vec<ProblemInstance>> {
    let ds = read_dataset(dir)?;
    if ds.instances.is_empty() {
        return Err(Error::config("data", format!("{} holds no instances", dir.display())));
    }
    Ok(ds.instances)
}

fn dataset_name(dir: &Path) -> String {
    dir.file_name().map_or_else(|| "data".into(), |s| s.to_string_lossy().into_owned())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let family: Family = args.family.parse()?;
    let mut params: FamilyParams = read_json(args.params.as_deref())?;
    if let Some(s) = args.size {
        params.width = s;
        params.height = s;
    }
    params.validate()?;
    let spec = WorldSpec::new(family, params.clone(), args.seed);
    let instances = (0..args.count as u64)
        .map(|i| match args.nodes {
            Some(n) => sample_ipp_instance(&spec, i, n).map(|r| r.0),
            None => sample_search_instance(&spec, i).map(|r| r.0),
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = DatasetMeta {
        family,
        params,
        seed: args.seed,
    };
    let manifest = write_dataset(&instances, &meta, &args.out)?;
    info!("wrote {} {} instances to {}", manifest.entries.len(), family, args.out.display());
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CemDomain {
    #[default]
    Search,
    Ipp,
}

/// Config file for `train cem`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CemTrainConfig {
    pub domain: CemDomain,
    pub cem: CemConfig,
    /// Expansion budget per scored search.
    pub search_budget: Option<usize>,
    pub horizon: usize,
    pub travel_budget: Option<f64>,
    pub sensor: Option<SensorModel>,
}

impl Default for CemTrainConfig {
    fn default() -> Self {
        CemTrainConfig {
            domain: CemDomain::Search,
            cem: CemConfig::default(),
            search_budget: None,
            horizon: 15,
            travel_budget: None,
            sensor: None,
        }
    }
}

fn iteration_csv(logs: &[IterationLog]) -> String {
    let mut out = format!("{}\n", IterationLog::CSV_HEADER);
    for l in logs {
        out.push_str(&l.csv_row());
        out.push('\n');
    }
    out
}

fn cem_csv(logs: &[CemLog]) -> String {
    let mut out = format!("{}\n", CemLog::CSV_HEADER);
    for l in logs {
        out.push_str(&l.csv_row());
        out.push('\n');
    }
    out
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let data = load_instances(&args.data)?;
    let cfg_path = args.config.as_deref();
    let (method, payload, hash, log) = match args.method {
        TrainMethod::Sail | TrainMethod::Sl => {
            let mut cfg: SailConfig = read_json(cfg_path)?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.validate()?;
            let t = if args.method == TrainMethod::Sail {
                train_sail(&data, &cfg)?
            } else {
                train_behavior_cloning(&data, &cfg)?
            };
            let tag = if args.method == TrainMethod::Sail { "sail" } else { "sl" };
            (tag.to_string(), ModelPayload::Stationary(t.policy), config_hash(&cfg), iteration_csv(&t.logs))
        }
        TrainMethod::Ql => {
            let mut cfg: QlConfig = read_json(cfg_path)?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.validate()?;
            let t = train_qlearning(&data, &cfg)?;
            ("ql".into(), ModelPayload::Stationary(t.policy), config_hash(&cfg), iteration_csv(&t.logs))
        }
        TrainMethod::Ipp => {
            let mut cfg: IppTrainConfig = read_json(cfg_path)?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.validate()?;
            let t = train_ipp(&data, &cfg)?;
            let payload = if cfg.variant.is_forward() {
                ModelPayload::PerStep(t.policies)
            } else {
                ModelPayload::Stationary(t.policies.into_iter().next().expect("aggregation yields one policy"))
            };
            (format!("ipp-{}", cfg.variant.slug()), payload, config_hash(&cfg), iteration_csv(&t.logs))
        }
        TrainMethod::Cem => {
            let mut cfg: CemTrainConfig = read_json(cfg_path)?;
            cfg.cem.seed = args.seed.unwrap_or(cfg.cem.seed);
            cfg.cem.validate()?;
            let hash = config_hash(&cfg);
            match cfg.domain {
                CemDomain::Search => {
                    let t = train_cem_search(&data, &cfg.cem, cfg.search_budget)?;
                    ("cem".into(), ModelPayload::Stationary(t.policy), hash, cem_csv(&t.logs))
                }
                CemDomain::Ipp => {
                    let t = train_cem_ipp(&data, &cfg.cem, cfg.horizon, cfg.travel_budget, cfg.sensor)?;
                    ("cem-ipp".into(), ModelPayload::LinearGains(t.policy), hash, cem_csv(&t.logs))
                }
            }
        }
    };
    let meta = ModelMeta::new(method, &payload, hash);
    save_model(&args.out, &payload, &meta)?;
    let log_path = args.log.clone().unwrap_or_else(|| {
        let mut s = args.out.as_os_str().to_owned();
        s.push(".log.csv");
        PathBuf::from(s)
    });
    write(&log_path, log)?;
    info!("saved {} model to {}", meta.method, args.out.display());
    Ok(())
}

/// Loaded model files for the learned methods named in an eval run.
struct Loaded {
    name: String,
    payload: ModelPayload,
    hash: String,
}

fn load_named(model_dir: &Path, name: &str) -> Result<Loaded> {
    let (payload, meta) = load_model(&model_dir.join(format!("{name}.bin")))?;
    Ok(Loaded {
        name: name.to_string(),
        payload,
        hash: meta.train_config_hash,
    })
}

fn search_model(l: &Loaded) -> Result<&Regressor> {
    match &l.payload {
        ModelPayload::Stationary(r) if r.schema() == Schema::Search => Ok(r),
        _ => Err(Error::config("methods", format!("model `{}` is not a search policy", l.name))),
    }
}

const IPP_ORACLES: [&str; 2] = ["oracle-onestep", "oracle-gcb"];

pub fn eval(args: &EvalArgs) -> Result<()> {
    let data = load_instances(&args.data)?;
    let name = dataset_name(&args.data);
    let is_search = matches!(data[0].task, Task::Search { .. });
    let learned: Vec<&str> = args
        .methods
        .iter()
        .map(String::as_str)
        .filter(|m| {
            if is_search {
                SearchMethod::classical(m).is_none()
            } else {
                m.parse::<GainKind>().is_err() && !IPP_ORACLES.contains(m)
            }
        })
        .collect();
    let loaded = learned.iter().map(|m| load_named(&args.model_dir, m)).collect::<Result<Vec<_>>>()?;
    let find = |m: &str| loaded.iter().find(|l| l.name == m).expect("learned methods are loaded");

    let report = if is_search {
        let names: Vec<&str> = args.methods.iter().map(String::as_str).collect();
        check_method_names(&names, &learned)?;
        let methods = names
            .iter()
            .map(|m| match SearchMethod::classical(m) {
                Some(c) => Ok(c),
                None => {
                    let l = find(m);
                    Ok(SearchMethod::Learned {
                        name: l.name.clone(),
                        model: search_model(l)?,
                        config_hash: l.hash.clone(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let results = eval_search(&data, &methods, args.budget)?;
        if let Some(p) = &args.runs {
            write(p, search_runs_csv(&methods, &results))?;
        }
        EvalReport::search(&name, &methods, &results, args.seed)?
    } else {
        let methods = args
            .methods
            .iter()
            .map(|m| -> Result<IppMethod<'_>> {
                if let Ok(kind) = m.parse::<GainKind>() {
                    return Ok(IppMethod::Heuristic {
                        kind,
                        lambda: args.lambda,
                    });
                }
                Ok(match m.as_str() {
                    "oracle-onestep" => IppMethod::OneStepOracle,
                    "oracle-gcb" => IppMethod::GcbOracle,
                    _ => {
                        let l = find(m);
                        match &l.payload {
                            ModelPayload::LinearGains(p) => IppMethod::Linear {
                                policy: p.clone(),
                                config_hash: l.hash.clone(),
                            },
                            p => IppMethod::Learned {
                                name: l.name.clone(),
                                models: p.regressors(),
                                config_hash: l.hash.clone(),
                            },
                        }
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let runs = eval_ipp(&data, &methods, args.horizon, args.travel_budget, None)?;
        EvalReport::ipp(&name, &methods, &runs, args.seed)
    };
    write(&args.out, report.to_csv())?;
    info!("wrote {} rows to {}", report.rows.len(), args.out.display());
    Ok(())
}

fn search_instances(data: Vec<ProblemInstance>) -> Result<Vec<ProblemInstance>> {
    if data.iter().any(|i| i.start_goal().is_none()) {
        return Err(Error::config("data", "expected a search dataset"));
    }
    Ok(data)
}

pub fn ledger(args: &LedgerArgs) -> Result<()> {
    let data = search_instances(load_instances(&args.data)?)?;
    let (payload, _) = load_model(&args.model)?;
    let ModelPayload::Stationary(model) = &payload else {
        return Err(Error::config("model", "expected a single search policy"));
    };
    let pairs = data
        .iter()
        .map(|inst| -> Result<(SearchResult, SearchResult)> {
            let a = run_search(inst, &mut LearnedSelector::new(model)?, args.budget)?;
            let b = run_search(inst, &mut AStar::new(Heuristic::Zero), args.budget)?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = ComplexityReport::from_pairs(pairs.iter().map(|(a, b)| (a, b)));
    write(&args.out, report.to_csv())?;
    info!("fraction with A^2 < B: {:.4}", report.fraction());
    Ok(())
}

pub fn render(args: &RenderArgs) -> Result<()> {
    let data = search_instances(load_instances(&args.data)?)?;
    let inst = data
        .get(args.index)
        .ok_or_else(|| Error::config("index", format!("{} out of range (dataset has {})", args.index, data.len())))?;
    let (start, goal) = inst.start_goal().expect("search instance");
    let loaded;
    let method = match SearchMethod::classical(&args.method) {
        Some(m) => m,
        None => {
            loaded = load_model(Path::new(&args.method))?;
            let ModelPayload::Stationary(model) = &loaded.0 else {
                return Err(Error::config("method", "expected a single search policy"));
            };
            SearchMethod::Learned {
                name: args.method.clone(),
                model,
                config_hash: loaded.1.train_config_hash.clone(),
            }
        }
    };
    let r = method.run_with(inst, args.budget, SearchOptions { trace: true })?;
    let trace = r.trace.as_deref().unwrap_or_default();
    let n = render_frames(&inst.world, start, goal, trace, r.path.as_deref(), &args.out, args.scale)?;
    info!("wrote {n} frames to {}", args.out.display());
    Ok(())
}
