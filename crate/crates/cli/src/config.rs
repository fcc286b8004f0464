//! Experiment configuration files.

use std::path::{Path, PathBuf};

use entrolab::group::{FiniteSubset, GroupSpec};
use entrolab::metric::SolveMode;
use entrolab::sofic::{MicrostateMode, SoficModel};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MeasureEntropy,
    TopologicalEntropy,
    SepSpan,
    SoficGen,
    SoficQuality,
    SoficEntropy,
    Decompose,
    CertifyTheorem1,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::MeasureEntropy => "measure-entropy",
            Task::TopologicalEntropy => "topological-entropy",
            Task::SepSpan => "sep-span",
            Task::SoficGen => "sofic-gen",
            Task::SoficQuality => "sofic-quality",
            Task::SoficEntropy => "sofic-entropy",
            Task::Decompose => "decompose",
            Task::CertifyTheorem1 => "certify-theorem1",
        }
    }
}

/// A finite subset of the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Ball(usize),
    /// `[lo, hi]` in the integers.
    Interval([i64; 2]),
    /// `{e, g, ..., g^(n-1)}` for a generator index.
    Powers {
        generator: usize,
        count: usize,
    },
    Words(Vec<String>),
}

impl SetSpec {
    pub fn build(&self, group: GroupSpec) -> entrolab::error::Result<FiniteSubset> {
        match self {
            SetSpec::Ball(r) => group.ball(*r),
            SetSpec::Interval([lo, hi]) => group.interval(*lo, *hi),
            SetSpec::Powers { generator, count } => {
                if *count == 0 {
                    return Err(entrolab::error::Error::Argument(
                        "powers need a positive count".into(),
                    ));
                }
                group.generator_powers(*generator, count - 1)
            }
            SetSpec::Words(words) => FiniteSubset::parse(group, words),
        }
    }
}

/// A sequence of finite sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Balls of the given radii.
    Balls(Vec<usize>),
    /// Intervals `[0, n]` of the integers.
    Intervals(Vec<i64>),
    /// Powers `{e, g, ..., g^(n-1)}` of one generator for each count.
    Powers {
        generator: usize,
        counts: Vec<usize>,
    },
    Sets(Vec<SetSpec>),
}

impl ScheduleSpec {
    pub fn build(&self, group: GroupSpec) -> entrolab::error::Result<Vec<FiniteSubset>> {
        match self {
            ScheduleSpec::Balls(radii) => radii.iter().map(|&r| group.ball(r)).collect(),
            ScheduleSpec::Intervals(ns) => ns.iter().map(|&n| group.interval(0, n)).collect(),
            ScheduleSpec::Powers { generator, counts } => counts
                .iter()
                .map(|&count| {
                    SetSpec::Powers {
                        generator: *generator,
                        count,
                    }
                    .build(group)
                })
                .collect(),
            ScheduleSpec::Sets(sets) => sets.iter().map(|s| s.build(group)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Product measure of a base distribution on the letters.
    Bernoulli(Vec<f64>),
    /// Shift-invariant cylinder probabilities on a finite domain, first
    /// domain element (canonical order) most significant.
    Explicit {
        alphabet_size: usize,
        domain: Vec<String>,
        probabilities: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PartitionSpec {
    /// The time-zero letter partition.
    Letters,
    /// Letters merged by a cell index per letter.
    Coarse(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplificationSpec {
    pub window: SetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSpec {
    pub eps: f64,
    pub radius: usize,
    pub budget: usize,
}

/// Sofic maps either generated per size or read from files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SoficSpec {
    Generate { sizes: Vec<usize>, model: ModelSpec },
    Files(Vec<PathBuf>),
}

/// The seed of random models comes from the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSpec {
    RandomPermutation,
    Cyclic,
}

impl ModelSpec {
    pub fn is_random(self) -> bool {
        matches!(self, ModelSpec::RandomPermutation)
    }

    /// Sizes get distinct seeds so a sequence is not one map repeated.
    pub fn model(self, seed: Option<u64>, index: usize) -> SoficModel {
        match self {
            ModelSpec::RandomPermutation => SoficModel::RandomPermutation {
                seed: entrolab::rng::derive_seed(seed.expect("checked before use"), index as u64),
            },
            ModelSpec::Cyclic => SoficModel::Cyclic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MicrostateSpec {
    Exhaustive,
    Sample { budget: usize },
}

impl MicrostateSpec {
    pub fn mode(&self, seed: Option<u64>) -> MicrostateMode {
        match self {
            MicrostateSpec::Exhaustive => MicrostateMode::Exhaustive,
            MicrostateSpec::Sample { budget } => MicrostateMode::Sample {
                budget: *budget,
                seed: seed.expect("checked before use"),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsSpec {
    pub group_elements: Option<usize>,
    pub cells: Option<u64>,
}

/// One experiment. Fields a task does not read must be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    /// Subshift description, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<PathBuf>,
    /// Finite metric space file for `sep-span`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplification: Option<AmplificationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<SeparationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sofic: Option<SoficSpec>,
    /// The finite set `F` of sofic tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<SetSpec>,
    /// Test set for quality and the sofic graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_set: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_floor: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SolveMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub microstates: Option<MicrostateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<CapsSpec>,
    /// Output directory, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config, naming the offending field on schema errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn require<'a, T>(field: &'static str, value: &'a Option<T>) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| CliError::Schema {
            path: field.to_string(),
            message: "missing field required by this task".into(),
        })
    }

    /// Canonical bytes hashed into every result.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_errors_name_the_field() {
        let err = ExperimentConfig::parse(r#"{"schedule":{"balls":[0,"x"]}}"#).unwrap_err();
        match err {
            CliError::Schema { path, .. } => assert_eq!(path, "schedule.balls[1]"),
            other => panic!("{other:?}"),
        }
        let err = ExperimentConfig::parse(r#"{"sead": 3}"#).unwrap_err();
        assert!(matches!(err, CliError::Schema { .. }));
    }

    #[test]
    fn schedules_build() {
        let c =
            ExperimentConfig::parse(r#"{"schedule":{"powers":{"generator":1,"counts":[1,3]}}}"#)
                .unwrap();
        let f2 = GroupSpec::free(2).unwrap();
        let sets = c.schedule.unwrap().build(f2).unwrap();
        assert_eq!(sets[1].label(), "{e,b,bb}");
        let c = ExperimentConfig::parse(
            r#"{"sofic":{"generate":{"sizes":[4,6],"model":"cyclic"}},"microstates":{"sample":{"budget":9}}}"#,
        )
        .unwrap();
        assert_eq!(
            c.sofic,
            Some(SoficSpec::Generate {
                sizes: vec![4, 6],
                model: ModelSpec::Cyclic
            })
        );
    }
}
