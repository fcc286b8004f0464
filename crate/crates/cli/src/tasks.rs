//! Dispatch from a config to the library operations.

use std::path::{Path, PathBuf};

use entrolab::caps::Caps;
use entrolab::error::Error;
use entrolab::group::{FiniteSubset, GroupSpec};
use entrolab::measure::{
    amplified_entropy_check, naive_measure_entropy_estimate, CylinderTable, Distribution,
    Partition, ShiftMeasure,
};
use entrolab::metric::{sep_number, span_number, FiniteMetricSpace, SolveMode};
use entrolab::sofic::{
    build_sofic_graph, decompose, exhaustive_maximal_families, quality, sofic_entropy_estimate,
    theorem1_parameters, MicrostateOptions, SoficEntropyParams, SoficMap, EXHAUSTIVE_MAX_N,
};
use entrolab::subshift::Subshift;
use entrolab::topological::{
    entropy_via_separation, naive_topological_entropy_estimate, symbolic_sep_number,
    SeparationParams,
};
use serde::Deserialize;
use serde_json::json;

use crate::config::{
    ExperimentConfig, MeasureSpec, MicrostateSpec, PartitionSpec, SoficSpec, Task,
};
use crate::output::{Item, Status};
use crate::CliError;

const COMMON_FIELDS: &[&str] = &["task", "seed", "caps", "output"];

/// Config fields each task reads besides the common ones.
fn task_fields(task: Task) -> &'static [&'static str] {
    match task {
        Task::MeasureEntropy => &["group", "schedule", "measure", "partition", "amplification"],
        Task::TopologicalEntropy => &["system", "schedule", "separation"],
        Task::SepSpan => &["metric", "eps", "mode"],
        Task::SoficGen => &["group", "sofic"],
        Task::SoficQuality => &["group", "sofic", "test_set"],
        Task::SoficEntropy => &[
            "system",
            "sofic",
            "shape",
            "eps",
            "delta",
            "n_floor",
            "microstates",
            "radius",
        ],
        Task::Decompose => &["group", "sofic", "shape", "test_set", "k"],
        Task::CertifyTheorem1 => &["system", "schedule", "kappa", "eps", "sofic"],
    }
}

/// Rejects fields the task would silently ignore.
pub fn check_fields(task: Task, config: &ExperimentConfig) -> Result<(), CliError> {
    let value = serde_json::to_value(config).expect("serializable");
    let allowed = task_fields(task);
    for key in value.as_object().expect("config is an object").keys() {
        if !COMMON_FIELDS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
            return Err(CliError::Schema {
                path: key.clone(),
                message: format!("field is not used by {}", task.name()),
            });
        }
    }
    Ok(())
}

/// What a task produced, before it is stamped and written.
pub struct Outcome {
    pub status: Status,
    pub items: Vec<Item>,
    pub details: serde_json::Value,
    /// Extra output files, by name.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn ok(items: Vec<Item>, details: serde_json::Value) -> Self {
        Outcome {
            status: Status::Ok,
            items,
            details,
            files: Vec::new(),
        }
    }
}

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    /// Directory that relative input paths resolve against.
    pub base: PathBuf,
    pub caps: Caps,
    /// Input files read so far, hashed into the result.
    pub inputs: Vec<(String, String)>,
}

fn req<'a, T>(field: &'static str, value: &'a Option<T>) -> Result<&'a T, CliError> {
    ExperimentConfig::require(field, value)
}

impl Context<'_> {
    fn seed(&self, why: &str) -> Result<u64, CliError> {
        self.config.seed.ok_or_else(|| CliError::Schema {
            path: "seed".into(),
            message: format!("a seed is required: {why}"),
        })
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let full = self.base.join(path);
        let text = std::fs::read_to_string(&full)
            .map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
        self.inputs.push((path.display().to_string(), text.clone()));
        Ok(text)
    }

    fn system(&mut self) -> Result<Subshift, CliError> {
        let path = req("system", &self.config.system)?.clone();
        Ok(Subshift::from_json(&self.read(&path)?)?)
    }

    fn group_for_system(&self, s: &Subshift) -> Result<GroupSpec, CliError> {
        match self.config.group {
            Some(g) if g != s.group() => Err(CliError::Schema {
                path: "group".into(),
                message: format!("config names {g} but the system lives on {}", s.group()),
            }),
            _ => Ok(s.group()),
        }
    }

    fn schedule(&self, group: GroupSpec) -> Result<Vec<FiniteSubset>, CliError> {
        Ok(req("schedule", &self.config.schedule)?.build(group)?)
    }

    /// The configured sofic sequence. `group` is the group the maps must
    /// act by; when `None` it comes from the config or the map files.
    fn sequence(&mut self, group: Option<GroupSpec>) -> Result<Vec<SoficMap>, CliError> {
        let spec = req("sofic", &self.config.sofic)?.clone();
        let group = group.or(self.config.group);
        let maps = match spec {
            SoficSpec::Generate { sizes, model } => {
                let group = group.ok_or_else(|| CliError::Schema {
                    path: "group".into(),
                    message: "generated sofic maps need a group".into(),
                })?;
                let seed = if model.is_random() {
                    Some(self.seed("random permutation maps")?)
                } else {
                    None
                };
                sizes
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| SoficMap::generate(group, n, &model.model(seed, i)))
                    .collect::<Result<Vec<_>, _>>()?
            }
            SoficSpec::Files(paths) => {
                let mut maps = Vec::with_capacity(paths.len());
                for p in &paths {
                    let map = SoficMap::from_json(&self.read(p)?)?;
                    if let Some(g) = group {
                        if map.group() != g {
                            return Err(CliError::Core(Error::Argument(format!(
                                "{} acts by {}, expected {g}",
                                p.display(),
                                map.group()
                            ))));
                        }
                    }
                    maps.push(map);
                }
                maps
            }
        };
        if maps.is_empty() {
            return Err(CliError::Schema {
                path: "sofic".into(),
                message: "empty sofic sequence".into(),
            });
        }
        if let Some(first) = maps.first() {
            if maps.iter().any(|m| m.group() != first.group()) {
                return Err(CliError::Core(Error::Argument(
                    "sofic maps act by different groups".into(),
                )));
            }
        }
        Ok(maps)
    }

    fn eps_grid(&self) -> Result<&[f64], CliError> {
        let eps = req("eps", &self.config.eps)?;
        if eps.is_empty() {
            return Err(CliError::Schema {
                path: "eps".into(),
                message: "empty epsilon grid".into(),
            });
        }
        Ok(eps)
    }
}

pub fn run_task(task: Task, ctx: &mut Context) -> Result<Outcome, CliError> {
    match task {
        Task::MeasureEntropy => measure_entropy(ctx),
        Task::TopologicalEntropy => topological_entropy(ctx),
        Task::SepSpan => sep_span(ctx),
        Task::SoficGen => sofic_gen(ctx),
        Task::SoficQuality => sofic_quality(ctx),
        Task::SoficEntropy => sofic_entropy(ctx),
        Task::Decompose => decompose_task(ctx),
        Task::CertifyTheorem1 => certify(ctx),
    }
}

fn measure_entropy(ctx: &mut Context) -> Result<Outcome, CliError> {
    let cfg = ctx.config;
    let group = *req("group", &cfg.group)?;
    let schedule = ctx.schedule(group)?;
    let measure = match req("measure", &cfg.measure)? {
        MeasureSpec::Bernoulli(p) => ShiftMeasure::bernoulli(group, Distribution::new(p.clone())?),
        MeasureSpec::Explicit {
            alphabet_size,
            domain,
            probabilities,
        } => ShiftMeasure::explicit(CylinderTable::new(
            *alphabet_size,
            FiniteSubset::parse(group, domain)?,
            probabilities.clone(),
        )?),
    };
    let alpha = match cfg.partition.as_ref().unwrap_or(&PartitionSpec::Letters) {
        PartitionSpec::Letters => Partition::letters(&measure)?,
        PartitionSpec::Coarse(cells) => Partition::coarse_letters(&measure, cells)?,
    };
    let est = naive_measure_entropy_estimate(&measure, &alpha, &schedule, &ctx.caps)?;
    let items = est
        .rows
        .iter()
        .map(|r| {
            Item::new(&r.label, r.size, Some(r.value), est.bound).with_running_min(r.running_min)
        })
        .collect();
    let mut details = json!({
        "estimate_nats": est.estimate,
        "bound_kind": est.bound,
        "rows": est.rows.iter().map(|r| json!({
            "label": r.label,
            "joint_entropy_nats": r.joint_entropy,
            "method": r.method,
        })).collect::<Vec<_>>(),
    });
    if let Some(amp) = &cfg.amplification {
        let w = amp.window.build(group)?;
        let report = amplified_entropy_check(&measure, &alpha, &w, &schedule, &ctx.caps)?;
        details["amplification"] = json!({
            "window": w.label(),
            "all_agree": report.all_agree,
            "rows": report.rows,
        });
    }
    Ok(Outcome::ok(items, details))
}

fn count_string(c: Option<u128>) -> serde_json::Value {
    c.map_or(serde_json::Value::Null, |c| c.to_string().into())
}

fn topological_entropy(ctx: &mut Context) -> Result<Outcome, CliError> {
    let s = ctx.system()?;
    let group = ctx.group_for_system(&s)?;
    let schedule = ctx.schedule(group)?;
    let est = naive_topological_entropy_estimate(&s, &schedule, &ctx.caps)?;
    let items = est
        .rows
        .iter()
        .map(|r| {
            Item::new(&r.label, r.size, Some(r.value), est.bound).with_running_min(r.running_min)
        })
        .collect();
    let mut details = json!({
        "estimate_nats": est.estimate,
        "bound_kind": est.bound,
        "rows": est.rows.iter().map(|r| json!({
            "label": r.label,
            "count": count_string(r.count),
            "count_bound": r.bound,
            "log_count": r.log_count,
            "method": r.method,
        })).collect::<Vec<_>>(),
    });
    if let Some(sep) = &ctx.config.separation {
        let params = SeparationParams {
            eps: sep.eps,
            radius: sep.radius,
            budget: sep.budget,
            seed: ctx.seed("the separation probe samples points")?,
        };
        let report = entropy_via_separation(&s, &schedule, &params, &ctx.caps)?;
        details["separation"] = serde_json::to_value(&report).expect("serializable");
    }
    Ok(Outcome::ok(items, details))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    #[serde(default)]
    points: Option<Vec<String>>,
    distances: Vec<Vec<f64>>,
}

fn sep_span(ctx: &mut Context) -> Result<Outcome, CliError> {
    let path = req("metric", &ctx.config.metric)?.clone();
    let text = ctx.read(&path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: MetricFile = serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })?;
    let m = match file.points {
        Some(points) => FiniteMetricSpace::new(points, file.distances)?,
        None => FiniteMetricSpace::from_matrix(file.distances)?,
    };
    let mode = ctx.config.mode.unwrap_or(SolveMode::Exact);
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for &eps in ctx.eps_grid()? {
        let sep = sep_number(&m, eps, mode)?;
        let spn = span_number(&m, eps, mode)?;
        items.push(Item::new(
            format!("sep(eps={eps})"),
            m.len(),
            Some((sep.value as f64).ln()),
            sep.bound,
        ));
        items.push(Item::new(
            format!("spn(eps={eps})"),
            m.len(),
            Some((spn.value as f64).ln()),
            spn.bound,
        ));
        rows.push(json!({
            "eps": eps,
            "sep": sep,
            "spn": spn,
            "chain_holds": spn.value <= sep.value,
        }));
    }
    Ok(Outcome::ok(
        items,
        json!({ "points": m.points(), "mode": mode, "rows": rows }),
    ))
}

fn sofic_gen(ctx: &mut Context) -> Result<Outcome, CliError> {
    let maps = ctx.sequence(None)?;
    let mut files = Vec::new();
    let mut listed = Vec::new();
    for (i, map) in maps.iter().enumerate() {
        let name = format!("sofic_{i}_n{}.json", map.n());
        listed.push(json!({ "n": map.n(), "file": name }));
        files.push((name, map.to_json() + "\n"));
    }
    let mut out = Outcome::ok(
        Vec::new(),
        json!({ "group": maps[0].group(), "maps": listed }),
    );
    out.files = files;
    Ok(out)
}

fn sofic_quality(ctx: &mut Context) -> Result<Outcome, CliError> {
    let maps = ctx.sequence(None)?;
    let s = req("test_set", &ctx.config.test_set)?.build(maps[0].group())?;
    let reports = maps
        .iter()
        .map(|m| quality(m, &s))
        .collect::<Result<Vec<_>, _>>()?;
    let min =
        |f: fn(&entrolab::sofic::QualityReport) -> f64| reports.iter().map(f).fold(1.0, f64::min);
    Ok(Outcome::ok(
        Vec::new(),
        json!({
            "test_set": s.label(),
            "min_multiplicativity": min(|r| r.min_multiplicativity),
            "min_freeness": min(|r| r.min_freeness),
            "reports": reports,
        }),
    ))
}

fn sofic_entropy(ctx: &mut Context) -> Result<Outcome, CliError> {
    let s = ctx.system()?;
    let group = ctx.group_for_system(&s)?;
    let maps = ctx.sequence(Some(group))?;
    let cfg = ctx.config;
    let f = req("shape", &cfg.shape)?.build(group)?;
    let delta = *req("delta", &cfg.delta)?;
    let micro = cfg
        .microstates
        .clone()
        .unwrap_or(MicrostateSpec::Exhaustive);
    let seed = match micro {
        MicrostateSpec::Sample { .. } => Some(ctx.seed("sampled microstates")?),
        MicrostateSpec::Exhaustive => None,
    };
    let options = MicrostateOptions {
        mode: micro.mode(seed),
        radius: cfg.radius,
    };
    let mut items = Vec::new();
    let mut reports = Vec::new();
    for &eps in ctx.eps_grid()? {
        let params = SoficEntropyParams {
            eps,
            delta,
            n_floor: cfg.n_floor.unwrap_or(0),
        };
        let report = sofic_entropy_estimate(&maps, &s, &f, &params, &options, &ctx.caps)?;
        for row in &report.rows {
            items.push(Item::new(
                format!("n={},eps={eps}", row.n),
                row.n,
                row.value,
                row.bound,
            ));
        }
        reports.push(json!({ "eps": eps, "report": report }));
    }
    Ok(Outcome::ok(
        items,
        json!({ "shape": f.label(), "delta": delta, "runs": reports }),
    ))
}

fn decompose_task(ctx: &mut Context) -> Result<Outcome, CliError> {
    let maps = ctx.sequence(None)?;
    let group = maps[0].group();
    let cfg = ctx.config;
    let f = req("shape", &cfg.shape)?.build(group)?;
    let s_test = req("test_set", &cfg.test_set)?.build(group)?;
    let k = *req("k", &cfg.k)?;
    let mut runs = Vec::new();
    for map in &maps {
        let g = build_sofic_graph(map, &f, &s_test, None)?;
        g.check_bounds()?;
        let d = decompose(&g, k)?;
        let exhaustive = if g.n <= EXHAUSTIVE_MAX_N {
            Some(exhaustive_maximal_families(&g, k)?)
        } else {
            None
        };
        runs.push(json!({
            "n": g.n,
            "good": g.good_count(),
            "j_size": g.j_count(),
            "i_size": g.i_count(),
            "max_degree": g.max_degree,
            "decomposition": d,
            "exhaustive": exhaustive,
        }));
    }
    Ok(Outcome::ok(
        Vec::new(),
        json!({ "shape": f.label(), "test_set": s_test.label(), "k": k, "runs": runs }),
    ))
}

fn certify(ctx: &mut Context) -> Result<Outcome, CliError> {
    let s = ctx.system()?;
    let group = ctx.group_for_system(&s)?;
    let kappa = *req("kappa", &ctx.config.kappa)?;
    let eps = match ctx.eps_grid()? {
        [eps] => *eps,
        _ => {
            return Err(CliError::Schema {
                path: "eps".into(),
                message: "certification takes a single epsilon".into(),
            })
        }
    };
    let schedule = ctx.schedule(group)?;
    let sequence = if ctx.config.sofic.is_some() {
        ctx.sequence(Some(group))?
    } else {
        Vec::new()
    };
    let exact = |c: entrolab::subshift::PatternCount| {
        c.count.ok_or_else(|| {
            CliError::Core(Error::Argument(
                "separated number too large to count".into(),
            ))
        })
    };
    let identity = FiniteSubset::singleton(group.identity());
    let sep_half = exact(symbolic_sep_number(&s, eps / 2.0, &identity, &ctx.caps)?)?;
    let mut items = Vec::new();
    let mut candidates = Vec::new();
    for f in schedule {
        let c = symbolic_sep_number(&s, eps / 4.0, &f, &ctx.caps)?;
        items.push(Item::new(
            f.label(),
            f.len(),
            Some(c.log_count / f.len() as f64),
            c.bound,
        ));
        candidates.push((f, exact(c)?));
    }
    let base = json!({
        "kappa": kappa,
        "eps": eps,
        "sep_half": sep_half.to_string(),
        "sep_quarter": candidates.iter().map(|(f, c)| json!({"label": f.label(), "count": c.to_string()})).collect::<Vec<_>>(),
    });
    match theorem1_parameters(kappa, eps, sep_half, &candidates, &sequence) {
        Ok(p) => {
            let checks = p.verify();
            let valid = p.is_valid();
            let mut details = base;
            details["parameters"] = serde_json::to_value(&p).expect("serializable");
            details["checks"] = serde_json::to_value(&checks).expect("serializable");
            details["valid"] = valid.into();
            if !valid {
                return Err(CliError::Core(Error::Argument(
                    "chosen parameters fail their own re-evaluation".into(),
                )));
            }
            Ok(Outcome::ok(items, details))
        }
        Err(Error::CertificationUnavailable(reason)) => {
            let mut details = base;
            details["reason"] = reason.into();
            Ok(Outcome {
                status: Status::CertificationUnavailable,
                items,
                details,
                files: Vec::new(),
            })
        }
        Err(e) => Err(e.into()),
    }
}
