//! Command-line front end. [`run`] never exits the process; it returns the
//! exit code so tests can drive it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vbe_core::lab::{gen_consensus_collapse_pair, gen_random_dao, verify_theorem, Theorem, TokenDistribution};
use vbe_core::model::{Dataset, RoundTag};
use vbe_core::pipeline::{baselines, compare_rounds, window_series, WeightSource};

use crate::config::{Format, Settings, DEFAULT_SEED};
use crate::error::{exit, Error, Result};
use crate::ingest::{load_balances_csv, load_dataset, write_dataset};
use crate::report::{write_output, BaselineReport, CompareReport, ComputeReport, Document, RoundSummary, SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "ovbe", version, about = "Observable voting-bloc entropy for token-weighted governance")]
pub struct Cli {
    /// Report warnings and progress on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rolling-window oVBE over a dataset.
    Compute(DataArgs),
    /// Compare oVBE between two rounds of the same dataset.
    CompareRounds(CompareArgs),
    /// Check a transformation result on seeded synthetic DAOs.
    Verify(VerifyArgs),
    /// Gini, Nakamoto coefficient and singleton-bloc entropy of balances.
    Baselines(BaselineArgs),
    /// Write a synthetic dataset.
    GenSynthetic(GenArgs),
}

/// Flags shared by the dataset commands. Each one overrides the same key
/// from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Settings file with `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Votes CSV, or a platform JSON export.
    #[arg(long, value_name = "FILE")]
    pub votes: Option<PathBuf>,
    /// Balances CSV (address,balance).
    #[arg(long, value_name = "FILE")]
    pub balances: Option<PathBuf>,
    /// Proposals CSV (proposal_id,ordinal,title,round_tag[,arity]).
    #[arg(long, value_name = "FILE")]
    pub proposals: Option<PathBuf>,
    /// Export dialect: offchain_snapshot_style or onchain_tally_style.
    #[arg(long)]
    pub dialect: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// json or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Proposals per window.
    #[arg(long)]
    pub window: Option<usize>,
    /// Proposals between window starts.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Drop a final window shorter than --window.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub drop_partial_tail: Option<bool>,
    /// Clusters per window.
    #[arg(long)]
    pub k: Option<usize>,
    /// Clustering seed (default 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// k-means restarts.
    #[arg(long)]
    pub n_init: Option<usize>,
    /// Lloyd iteration cap.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Comma-separated: min, shannon, renyi:<alpha>.
    #[arg(long)]
    pub measures: Option<String>,
    /// euclidean or cosine.
    #[arg(long)]
    pub distance: Option<String>,
    /// Keep token holders that never voted.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_inactive: Option<bool>,
    /// static_balances or ballot_voting_power.
    #[arg(long)]
    pub weight_source: Option<String>,
    /// Divide each entropy by log2 of the bloc count.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
    /// Zero-fill voters missing from the balances.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lenient: Option<bool>,
}

impl DataArgs {
    pub fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let text = |v: &Option<String>| v.clone();
        fn show<T: ToString>(v: Option<T>) -> Option<String> {
            v.map(|v| v.to_string())
        }
        let flags: [(&str, Option<String>); 19] = [
            ("votes", path(&self.votes)),
            ("balances", path(&self.balances)),
            ("proposals", path(&self.proposals)),
            ("dialect", text(&self.dialect)),
            ("out", path(&self.out)),
            ("format", text(&self.format)),
            ("window", show(self.window)),
            ("stride", show(self.stride)),
            ("drop_partial_tail", show(self.drop_partial_tail)),
            ("k", show(self.k)),
            ("seed", show(self.seed)),
            ("n_init", show(self.n_init)),
            ("max_iterations", show(self.max_iterations)),
            ("measures", text(&self.measures)),
            ("distance", text(&self.distance)),
            ("include_inactive", show(self.include_inactive)),
            ("weight_source", text(&self.weight_source)),
            ("normalize", show(self.normalize)),
            ("lenient", show(self.lenient)),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, &v)?;
            }
        }
        Ok(s.resolved())
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Round tag of the first series.
    #[arg(long, default_value = "offchain")]
    pub round_a: String,
    /// Round tag of the second series.
    #[arg(long, default_value = "onchain")]
    pub round_b: String,
}

fn theorem(s: &str) -> std::result::Result<Theorem, String> {
    Theorem::from_str(s).map_err(|_| {
        let names: Vec<&str> = Theorem::ALL.iter().map(|t| t.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Result to check, e.g. sybil, apathy, delegation, herding, slates, bribery.
    #[arg(value_parser = theorem)]
    pub theorem: Theorem,
    /// Number of seeded trials.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Balances CSV (address,balance).
    #[arg(long, value_name = "FILE")]
    pub balances: PathBuf,
    /// Comma-separated: min, shannon, renyi:<alpha>.
    #[arg(long)]
    pub measures: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SyntheticKind {
    /// Two rounds where the second collapses toward the first round's plurality.
    Collapse,
    /// A DAO with explicit utilities, as JSON.
    Dao,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: SyntheticKind,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub players: usize,
    #[arg(long, default_value_t = 30)]
    pub elections: usize,
    /// Collapse: chance a dissenting vote follows the first-round plurality.
    #[arg(long, default_value_t = 0.5)]
    pub strength: f64,
    /// Dao: uniform, uniform:<low>:<high> or pareto:<alpha>.
    #[arg(long, default_value = "uniform")]
    pub token_dist: String,
    /// Dao: utility magnitude unit; epsilon is a tenth of it.
    #[arg(long, default_value_t = 1.0)]
    pub utility_scale: f64,
    /// Dao: share of players with every utility in the deadzone.
    #[arg(long, default_value_t = 0.2)]
    pub apathetic_fraction: f64,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                exit::USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                exit::OK
            };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Compute(args) => compute(&args.settings()?, cli.verbose, stdout, stderr),
        Command::CompareRounds(args) => {
            compare(&args.data.settings()?, &args.round_a, &args.round_b, cli.verbose, stdout, stderr)
        }
        Command::Verify(args) => verify(&args, cli.verbose, stdout, stderr),
        Command::Baselines(args) => baseline(&args, stdout),
        Command::GenSynthetic(args) => generate(&args, cli.verbose, stderr),
    }
}

fn warn(stderr: &mut dyn Write, warnings: &[String]) {
    for w in warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
}

fn load(settings: &Settings) -> Result<(Dataset, Vec<String>)> {
    if settings.balances.is_none() && settings.weight_source == WeightSource::StaticBalances {
        return Err(Error::Usage("--balances is required unless --weight-source ballot_voting_power".into()));
    }
    // without a balance file every voter is zero-filled by construction
    let lenient = settings.lenient || settings.balances.is_none();
    let (dataset, report) = load_dataset(&settings.sources(), lenient)?;
    Ok((dataset, report.warnings))
}

pub fn compute(settings: &Settings, verbose: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let pipeline = settings.pipeline()?;
    let (dataset, warnings) = load(settings)?;
    let series = window_series(&dataset.votes, &dataset.balances, &dataset.proposals, &pipeline)?;
    let base = if dataset.balances.total() > 0.0 { Some(baselines(&dataset.balances, &pipeline.measures)?) } else { None };
    let report = ComputeReport::new(settings.clone(), series, base, warnings);
    warn(stderr, &report.warnings);
    if verbose {
        let _ = writeln!(
            stderr,
            "{} proposals, {} votes, {} windows",
            dataset.proposals.len(),
            dataset.votes.len(),
            report.windows.len()
        );
    }
    write_output(&report.encode(settings.format)?, settings.out.as_deref(), stdout)?;
    Ok(exit::OK)
}

fn compare(
    settings: &Settings,
    round_a: &str,
    round_b: &str,
    verbose: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let pipeline = settings.pipeline()?;
    let tag = |s: &str| RoundTag::from_str(s).map_err(|e| Error::Usage(e.to_string()));
    let (tag_a, tag_b) = (tag(round_a)?, tag(round_b)?);
    let (dataset, mut warnings) = load(settings)?;
    let mut rounds = Vec::new();
    for t in [tag_a, tag_b] {
        let part = dataset.filter_round(t);
        if part.proposals.is_empty() {
            return Err(Error::Invalid(vec![format!("round `{}` has no proposals (is round_tag set?)", t.as_str())]));
        }
        let series = window_series(&part.votes, &part.balances, &part.proposals, &pipeline)?;
        warnings.extend(series.warnings.iter().map(|w| format!("{}: {w}", t.as_str())));
        rounds.push((t, part.proposals.len(), series));
    }
    let comparison = compare_rounds(&rounds[0].2, &rounds[1].2)?;
    let mut summaries = rounds.into_iter().map(|(t, proposals, s)| RoundSummary {
        round: t.as_str().into(),
        proposals,
        windows: s.results,
        aggregates: s.aggregates,
    });
    let report = CompareReport {
        schema: SCHEMA.into(),
        config: settings.clone(),
        round_a: summaries.next().expect("two rounds"),
        round_b: summaries.next().expect("two rounds"),
        comparison,
        warnings,
    };
    warn(stderr, &report.warnings);
    if verbose {
        for m in &report.comparison.measures {
            let _ = writeln!(stderr, "{}: {} vs {} ({:?})", m.measure, m.avg_a, m.avg_b, m.verdict);
        }
    }
    write_output(&report.encode(settings.format)?, settings.out.as_deref(), stdout)?;
    Ok(exit::OK)
}

fn verify(args: &VerifyArgs, verbose: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let format: Format = args.format.parse()?;
    let report = verify_theorem(args.theorem, args.trials as usize, args.seed)?;
    if verbose || !report.all_passed() {
        let _ = writeln!(
            stderr,
            "{}: {}/{} trials passed, master condition {}/{}",
            args.theorem.as_str(),
            report.passes,
            report.trials,
            report.master_holds,
            report.master_checks
        );
    }
    write_output(&report.encode(format)?, args.out.as_deref(), stdout)?;
    Ok(if report.all_passed() { exit::OK } else { exit::VALIDATION })
}

fn baseline(args: &BaselineArgs, stdout: &mut dyn Write) -> Result<i32> {
    let format: Format = args.format.parse()?;
    let mut settings = Settings::default();
    if let Some(m) = &args.measures {
        settings.set("measures", m)?;
    }
    if let Some(n) = args.normalize {
        settings.normalize = n;
    }
    let loaded = load_balances_csv(&args.balances)?;
    loaded.report.check()?;
    let report = BaselineReport {
        schema: SCHEMA.into(),
        balances: args.balances.display().to_string(),
        baselines: baselines(&loaded.value, &settings.entropy_measures()?)?,
    };
    write_output(&report.encode(format)?, args.out.as_deref(), stdout)?;
    Ok(exit::OK)
}

fn generate(args: &GenArgs, verbose: bool, stderr: &mut dyn Write) -> Result<i32> {
    match args.kind {
        SyntheticKind::Collapse => {
            let (a, b) = gen_consensus_collapse_pair(args.seed, args.players, args.elections, args.strength)?;
            let mut merged = a;
            merged.proposals.extend(b.proposals);
            merged.votes.extend(b.votes);
            merged.provenance =
                vec![format!("collapse seed={} players={} elections={} strength={}", args.seed, args.players, args.elections, args.strength)];
            write_dataset(&args.out, &merged)?;
        }
        SyntheticKind::Dao => {
            let dist: TokenDistribution = args.token_dist.parse().map_err(|e: vbe_core::Error| Error::Usage(e.to_string()))?;
            let dao = gen_random_dao(args.seed, args.players, args.elections, dist, args.utility_scale, args.apathetic_fraction)?;
            let path = args.out.join("dao.json");
            std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
            let mut bytes = serde_json::to_vec_pretty(&dao).expect("dao serializes");
            bytes.push(b'\n');
            write_output(&bytes, Some(Path::new(&path)), &mut std::io::sink())?;
        }
    }
    if verbose {
        let _ = writeln!(stderr, "wrote {}", args.out.display());
    }
    Ok(exit::OK)
}
