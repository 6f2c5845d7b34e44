//! Run settings: defaults, an optional `key = value` file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vbe_core::clustering::{DistanceKind, KMeansConfig};
use vbe_core::metrics::EntropyMeasure;
use vbe_core::model::WindowSpec;
use vbe_core::pipeline::{PipelineConfig, WeightSource};

use crate::error::{Error, Result};
use crate::ingest::{Dialect, Sources};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Usage(format!("unknown format `{other}` (json or csv)"))),
        }
    }
}

/// Every setting a config file or flag can change. `out` and `config` are
/// not echoed into reports so the same run writes the same bytes anywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub votes: Option<PathBuf>,
    pub balances: Option<PathBuf>,
    pub proposals: Option<PathBuf>,
    pub dialect: Option<Dialect>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub window: usize,
    /// Defaults to `window` (non-overlapping windows).
    pub stride: Option<usize>,
    pub drop_partial_tail: bool,
    pub k: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iterations: usize,
    pub measures: Vec<String>,
    pub distance: DistanceKind,
    pub include_inactive: bool,
    pub weight_source: WeightSource,
    pub normalize: bool,
    pub lenient: bool,
}

/// Keys accepted in a config file; each has a matching `--flag`.
pub const KEYS: &[&str] = &[
    "votes",
    "balances",
    "proposals",
    "dialect",
    "out",
    "format",
    "window",
    "stride",
    "drop_partial_tail",
    "k",
    "seed",
    "n_init",
    "max_iterations",
    "measures",
    "distance",
    "include_inactive",
    "weight_source",
    "normalize",
    "lenient",
];

impl Default for Settings {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        Settings {
            votes: None,
            balances: None,
            proposals: None,
            dialect: None,
            out: None,
            format: Format::Json,
            window: pipeline.window.length,
            stride: None,
            drop_partial_tail: pipeline.window.drop_partial_tail,
            k: pipeline.clustering.k,
            seed: DEFAULT_SEED,
            n_init: pipeline.clustering.n_init,
            max_iterations: pipeline.clustering.max_iterations,
            measures: pipeline.measure_labels(),
            distance: pipeline.distance,
            include_inactive: pipeline.include_inactive,
            weight_source: pipeline.weight_source,
            normalize: false,
            lenient: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Usage(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

fn core<T>(r: vbe_core::Result<T>) -> Result<T> {
    r.map_err(|e| Error::Usage(e.to_string()))
}

impl Settings {
    /// Sets one key from its text form. Dashes and underscores are
    /// interchangeable in keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let path = || Some(PathBuf::from(value.trim()));
        match key.as_str() {
            "votes" => self.votes = path(),
            "balances" => self.balances = path(),
            "proposals" => self.proposals = path(),
            "dialect" => self.dialect = Some(value.parse()?),
            "out" => self.out = path(),
            "format" => self.format = value.parse()?,
            "window" => self.window = parse(&key, value)?,
            "stride" => self.stride = Some(parse(&key, value)?),
            "drop_partial_tail" => self.drop_partial_tail = parse_bool(&key, value)?,
            "k" => self.k = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "n_init" => self.n_init = parse(&key, value)?,
            "max_iterations" => self.max_iterations = parse(&key, value)?,
            "measures" => {
                self.measures = value.split(',').map(|m| m.trim().to_string()).filter(|m| !m.is_empty()).collect()
            }
            "distance" => self.distance = core(value.parse())?,
            "include_inactive" => self.include_inactive = parse_bool(&key, value)?,
            "weight_source" => self.weight_source = core(value.parse())?,
            "normalize" => self.normalize = parse_bool(&key, value)?,
            "lenient" => self.lenient = parse_bool(&key, value)?,
            other => return Err(Error::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment; blank lines are
    /// ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text).map_err(|e| match e {
            Error::Usage(m) => Error::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Usage(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn entropy_measures(&self) -> Result<Vec<EntropyMeasure>> {
        if self.measures.is_empty() {
            return Err(Error::Usage("at least one measure is required".into()));
        }
        self.measures
            .iter()
            .map(|m| core(m.parse::<EntropyMeasure>()).map(|e| if self.normalize { e.normalized(true) } else { e }))
            .collect()
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        if self.k == 0 || self.n_init == 0 || self.max_iterations == 0 {
            return Err(Error::Usage("k, n_init and max_iterations must be at least 1".into()));
        }
        Ok(PipelineConfig {
            window: core(WindowSpec::new(self.window, self.stride.unwrap_or(self.window), self.drop_partial_tail))?,
            measures: self.entropy_measures()?,
            clustering: KMeansConfig {
                k: self.k,
                seed: self.seed,
                n_init: self.n_init,
                max_iterations: self.max_iterations,
                ..KMeansConfig::default()
            },
            distance: self.distance,
            weight_source: self.weight_source,
            include_inactive: self.include_inactive,
        })
    }

    /// Fills in values that default to other settings, so reports echo
    /// what actually ran.
    pub fn resolved(mut self) -> Self {
        self.stride = Some(self.stride.unwrap_or(self.window));
        self
    }

    pub fn sources(&self) -> Sources {
        Sources {
            votes: self.votes.clone(),
            balances: self.balances.clone(),
            proposals: self.proposals.clone(),
            dialect: self.dialect,
        }
    }
}
