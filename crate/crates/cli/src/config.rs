//! Run configuration, read from a single TOML file.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use setgauge_core::function::Integrand;
use setgauge_core::geometry::{DirectionGrid, Vector};
use setgauge_core::integrate::{IntegralKind, IntegrationOptions, Schedule, TagPolicy, DEFAULT_MAX_INTERVALS};
use setgauge_core::partition::{Gauge, DEFAULT_MAX_DEPTH};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Vector,
    Set,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    ConstantDyadic { levels: u32 },
    StepDyadic { levels: u32 },
    Graded { points: Vec<f64>, levels: u32 },
    PowerOrigin { c0: f64, p: f64, origin0: f64, levels: u32 },
    Explicit { gauges: Vec<Gauge> },
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<Schedule> {
        Ok(match self {
            ScheduleSpec::ConstantDyadic { levels } => Schedule::constant_dyadic(*levels),
            ScheduleSpec::StepDyadic { levels } => Schedule::step_dyadic(*levels),
            ScheduleSpec::Graded { points, levels } => Schedule::graded(points, *levels)?,
            ScheduleSpec::PowerOrigin { c0, p, origin0, levels } => Schedule::power_origin(*c0, *p, *origin0, *levels)?,
            ScheduleSpec::Explicit { gauges } => Schedule::new(gauges.clone())?,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Number of directions; the dimension's default when absent.
    pub size: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum TagSpec {
    #[default]
    Cousin,
    Adversarial {
        #[serde(default = "default_samples")]
        samples: usize,
        direction: Option<Vec<f64>>,
    },
}

fn default_samples() -> usize {
    17
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSpec {
    pub trials: Option<usize>,
    pub cases: Option<usize>,
    pub n: Option<usize>,
    /// Uniform mid-tagged partition size for `orthonormal_h`.
    pub partition_size: Option<usize>,
    pub tol: Option<f64>,
    pub gauge: Option<Gauge>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub gauge: Gauge,
    #[serde(default)]
    pub perron: bool,
    pub max_depth: Option<u32>,
    pub max_intervals: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub cases: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub integrand: Option<Integrand>,
    #[serde(default)]
    pub mode: Mode,
    pub integral: Option<IntegralKind>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_intervals: Option<usize>,
    pub max_depth: Option<u32>,
    pub schedule: Option<ScheduleSpec>,
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tags: TagSpec,
    pub demo: Option<DemoSpec>,
    pub partition: Option<PartitionSpec>,
    pub check: Option<CheckSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        if let Some(tol) = cfg.tol {
            if !(tol > 0.0) {
                bail!("field `tol`: must be > 0, got {tol}");
            }
        }
        if let Some(g) = &cfg.integrand {
            g.validate().context("field `integrand`")?;
        }
        Ok(cfg)
    }

    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.seed)
            .context("this command is randomized: pass --seed or set `seed` in the config")
    }

    pub fn options(&self, dim: usize) -> Result<IntegrationOptions> {
        let tol = self.tol.context("field `tol` is required for integrate")?;
        let mut opts = IntegrationOptions::new(tol);
        opts.max_depth = self.max_depth.unwrap_or(DEFAULT_MAX_DEPTH);
        opts.max_intervals = self.max_intervals.unwrap_or(DEFAULT_MAX_INTERVALS);
        if let Some(s) = &self.schedule {
            opts.schedule = Some(s.build().context("section `schedule`")?);
        }
        if let Some(GridSpec { size: Some(m) }) = &self.grid {
            let grid = DirectionGrid::with_size(dim, *m).context("section `grid`")?;
            opts.grid = Some(Arc::new(grid));
        }
        opts.tags = match &self.tags {
            TagSpec::Cousin => TagPolicy::Cousin,
            TagSpec::Adversarial { samples, direction } => TagPolicy::Adversarial {
                samples: *samples,
                direction: match direction {
                    Some(d) => Some(Vector::new(d.clone()).context("field `tags.direction`")?),
                    None => None,
                },
            },
        };
        Ok(opts)
    }
}
