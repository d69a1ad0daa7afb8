//! Experiment configuration files.

use std::path::Path;

use ergopart::amenable::FolnerSequence;
use ergopart::dynamics::{BaseMetric, GroupElement, Irrational, SystemAction};
use ergopart::pattern_entropy::Strategy;
use ergopart::{MeasureSpace, Partition, Rational};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    EntropyProfile,
    ComplexityProfile,
    PatternEntropy,
    MetricProfile,
    Crosscheck,
    TemperedCheck,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::EntropyProfile => "entropy_profile",
            Quantity::ComplexityProfile => "complexity_profile",
            Quantity::PatternEntropy => "pattern_entropy",
            Quantity::MetricProfile => "metric_profile",
            Quantity::Crosscheck => "crosscheck",
            Quantity::TemperedCheck => "tempered_check",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `angle` is `"golden"`, `"sqrt2"` or a rational `"p/q"`.
    Rotation {
        angle: String,
    },
    Doubling,
    Odometer {
        base: u32,
    },
    FinitePermutation {
        perm: Vec<usize>,
        weights: Option<Vec<f64>>,
    },
    TorusRotation {
        angles: Vec<String>,
    },
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    /// Interior cut points of `[0,1)`.
    pub cuts: Option<Vec<String>>,
    /// One atom label per point of a finite space.
    pub labels: Option<Vec<usize>>,
    /// The partition text format.
    pub text: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFamily {
    Boxes,
    Dyadic,
    Explicit,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub family: WindowFamily,
    #[serde(default = "one")]
    pub rank: usize,
    /// Box sides, for `boxes`.
    pub sizes: Option<Vec<usize>>,
    /// Shorthand for sides `1..=max`, for `boxes`.
    pub max: Option<usize>,
    /// `[k_min, k_max]`, sides `2^k`, for `dyadic`.
    pub exponents: Option<[u32; 2]>,
    /// Explicit windows, for `explicit`.
    pub sets: Option<Vec<Vec<GroupElement>>>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverSolver {
    #[default]
    Greedy,
    Exact,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    #[default]
    Cells,
    Samples,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternSearch {
    #[default]
    Exhaustive,
    Greedy,
    Beam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Circle,
    Discrete,
    TorusMax,
    Zero,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub cover: CoverSolver,
    #[serde(default)]
    pub table: TableKind,
    /// Sample count for `table = "samples"` and for metric profiles.
    pub samples: Option<usize>,
    #[serde(default)]
    pub pattern: PatternSearch,
    pub beam_width: Option<usize>,
    pub metric: Option<MetricName>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub json: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub quantity: Quantity,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub n_max: Option<usize>,
    pub n_values: Option<Vec<usize>>,
    pub system: Option<SystemSpec>,
    pub partition: Option<PartitionSpec>,
    pub windows: WindowSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

pub const DEFAULT_METRIC_SAMPLES: usize = 100_000;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::config(msg.into())
}

fn parse_rational(field: &str, s: &str) -> Result<Rational, CliError> {
    s.trim().parse::<Rational>().map_err(|e| invalid(format!("{field}: {e}")))
}

fn parse_angle(field: &str, s: &str) -> Result<Rational, CliError> {
    match s.trim() {
        "golden" => Ok(Irrational::GoldenConjugate.convergent(ergopart::dynamics::MIN_ANGLE_DENOMINATOR)),
        "sqrt2" => Ok(Irrational::Sqrt2Minus1.convergent(ergopart::dynamics::MIN_ANGLE_DENOMINATOR)),
        other => parse_rational(field, other),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| invalid(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text)
            .map_err(|e| CliError { message: format!("{}: {}", path.display(), e.message), ..e })
    }

    /// Field presence and ranges, per quantity.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(invalid("name must be nonempty and use only ASCII letters, digits, '_' or '-'"));
        }
        let q = self.quantity;
        let needs_eps = matches!(q, Quantity::ComplexityProfile | Quantity::MetricProfile | Quantity::Crosscheck);
        if needs_eps {
            match self.epsilon {
                None => return Err(invalid(format!("missing field `epsilon` (required for {})", q.as_str()))),
                Some(e) if !(e > 0.0 && e < 1.0) => {
                    return Err(invalid(format!("field `epsilon` must lie in (0,1), got {e}")))
                }
                _ => {}
            }
        }
        if q != Quantity::TemperedCheck {
            if self.system.is_none() {
                return Err(invalid(format!("missing table `system` (required for {})", q.as_str())));
            }
            if q != Quantity::MetricProfile && self.partition.is_none() {
                return Err(invalid(format!("missing table `partition` (required for {})", q.as_str())));
            }
        }
        if q == Quantity::PatternEntropy && self.n_values.as_ref().is_none_or(|v| v.is_empty() || v.contains(&0)) {
            return Err(invalid("missing field `n_values` (positive integers, required for pattern_entropy)"));
        }
        if q == Quantity::TemperedCheck && self.n_max.is_none() {
            return Err(invalid("missing field `n_max` (required for tempered_check)"));
        }
        if self.solver.pattern == PatternSearch::Beam && self.solver.beam_width.is_none_or(|w| w == 0) {
            return Err(invalid("missing field `solver.beam_width` (positive, required for beam search)"));
        }
        self.sequence()?;
        if let Some(sys) = &self.system {
            let sys = self.build_system_from(sys)?;
            if sys.rank() != self.windows.rank {
                return Err(invalid(format!(
                    "windows.rank {} does not match the system's group rank {}",
                    self.windows.rank,
                    sys.rank()
                )));
            }
            if q != Quantity::MetricProfile {
                self.build_partition(&sys)?;
            }
        }
        Ok(())
    }

    pub fn sequence(&self) -> Result<FolnerSequence, CliError> {
        let w = &self.windows;
        let seq = match w.family {
            WindowFamily::Boxes => {
                let sizes = match (&w.sizes, w.max) {
                    (Some(s), None) => s.clone(),
                    (None, Some(m)) => (1..=m).collect(),
                    _ => return Err(invalid("windows: give exactly one of `sizes` or `max` for boxes")),
                };
                FolnerSequence::boxes(w.rank, &sizes)
            }
            WindowFamily::Dyadic => {
                let [lo, hi] =
                    w.exponents.ok_or_else(|| invalid("missing field `windows.exponents` for dyadic boxes"))?;
                if lo > hi || hi > 30 {
                    return Err(invalid("windows.exponents must satisfy k_min ≤ k_max ≤ 30"));
                }
                FolnerSequence::dyadic_boxes(w.rank, lo..=hi)
            }
            WindowFamily::Explicit => {
                let sets =
                    w.sets.clone().ok_or_else(|| invalid("missing field `windows.sets` for explicit windows"))?;
                FolnerSequence::from_sets(w.rank, sets)
            }
        };
        seq.map_err(|e| invalid(format!("windows: {e}")))
    }

    pub fn build_system(&self) -> Result<SystemAction, CliError> {
        let spec = self.system.as_ref().ok_or_else(|| invalid("missing table `system`"))?;
        self.build_system_from(spec)
    }

    fn build_system_from(&self, spec: &SystemSpec) -> Result<SystemAction, CliError> {
        let sys = match spec {
            SystemSpec::Rotation { angle } => Ok(SystemAction::rotation(parse_angle("system.angle", angle)?)),
            SystemSpec::Doubling => Ok(SystemAction::doubling()),
            SystemSpec::Odometer { base } => SystemAction::odometer(*base),
            SystemSpec::FinitePermutation { perm, weights } => {
                let space = match weights {
                    Some(w) => MeasureSpace::weighted_points(w.clone()),
                    None => MeasureSpace::uniform_points(perm.len()),
                }
                .map_err(|e| invalid(format!("system: {e}")))?;
                SystemAction::finite_permutation(&space, perm.clone())
            }
            SystemSpec::TorusRotation { angles } => {
                let a = angles.iter().map(|s| parse_angle("system.angles", s)).collect::<Result<Vec<_>, _>>()?;
                SystemAction::torus_rotation(a)
            }
        };
        sys.map_err(|e| invalid(format!("system: {e}")))
    }

    pub fn build_partition(&self, sys: &SystemAction) -> Result<Partition, CliError> {
        let spec = self.partition.as_ref().ok_or_else(|| invalid("missing table `partition`"))?;
        let given = [spec.cuts.is_some(), spec.labels.is_some(), spec.text.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(invalid("partition: give exactly one of `cuts`, `labels` or `text`"));
        }
        let p = if let Some(cuts) = &spec.cuts {
            let cuts = cuts.iter().map(|c| parse_rational("partition.cuts", c)).collect::<Result<Vec<_>, _>>()?;
            Partition::from_cuts(&cuts)
        } else if let Some(labels) = &spec.labels {
            Partition::from_labels(sys.space(), labels)
        } else {
            Partition::from_text(spec.text.as_deref().unwrap_or_default(), sys.space())
        }
        .map_err(|e| invalid(format!("partition: {e}")))?;
        if !p.space().same_as(sys.space()) {
            return Err(invalid("partition: lives on a different space than the system"));
        }
        Ok(p)
    }

    pub fn cover_solver(&self) -> ergopart::complexity::Solver {
        match self.solver.cover {
            CoverSolver::Greedy => ergopart::complexity::Solver::Greedy,
            CoverSolver::Exact => ergopart::complexity::Solver::Exact,
        }
    }

    pub fn table_mode(&self, seed: u64) -> ergopart::complexity::TableMode {
        match self.solver.table {
            TableKind::Cells => ergopart::complexity::TableMode::Cells,
            TableKind::Samples => ergopart::complexity::TableMode::Samples {
                n: self.solver.samples.unwrap_or(DEFAULT_METRIC_SAMPLES),
                seed,
            },
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self.solver.pattern {
            PatternSearch::Exhaustive => Strategy::Exhaustive,
            PatternSearch::Greedy => Strategy::Greedy,
            PatternSearch::Beam => Strategy::Beam { width: self.solver.beam_width.unwrap_or(1) },
        }
    }

    pub fn metric(&self, sys: &SystemAction) -> BaseMetric {
        match self.solver.metric {
            None => sys.default_metric(),
            Some(MetricName::Circle) => BaseMetric::Circle,
            Some(MetricName::Discrete) => BaseMetric::Discrete,
            Some(MetricName::TorusMax) => BaseMetric::TorusMax,
            Some(MetricName::Zero) => BaseMetric::Zero,
        }
    }

    pub fn metric_samples(&self) -> usize {
        self.solver.samples.unwrap_or(DEFAULT_METRIC_SAMPLES)
    }
}
