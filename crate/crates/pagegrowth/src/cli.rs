//! Command-line interface.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pagegrowth_core::aggregate::{FollowerRule, QuarterAnchor};
use pagegrowth_core::calendar::Timescale;
use pagegrowth_core::cohort::Protocol;
use pagegrowth_core::growth::{Metric, SizeScheme};
use pagegrowth_core::model::ModelCoefficients;

use crate::error::{AppError, Result};
use crate::io::{self, Format, Loaded};
use crate::pipeline::{self, AnalyzeConfig, CohortConfig, ModelConfig, SimulateConfig};
use crate::synth::{self, SynthConfig};

pub const BUILTIN_COEFFICIENTS: &str = "builtin-table1";

#[derive(Debug, Parser)]
#[command(name = "pagegrowth", version, about = "Growth dynamics of news pages on social media")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Post file (.csv, or .jsonl/.ndjson).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Page metadata CSV.
    #[arg(long, global = true)]
    pub pages: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated subset of D,W,M,Q.
    #[arg(long, global = true, value_delimiter = ',')]
    pub timescales: Option<Vec<Timescale>>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Size-class scheme CSV with columns label,lower,upper.
    #[arg(long, global = true)]
    pub classes: Option<PathBuf>,
    /// Lower and upper trimming percentiles for the engagement covariate.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1, default_value = "5,95")]
    pub trim: Vec<f64>,
    #[arg(long, global = true, default_value = "engagement")]
    pub metric: Metric,
    /// Coefficients CSV, or `builtin-table1` for the published set.
    #[arg(long, global = true, default_value = BUILTIN_COEFFICIENTS)]
    pub coefficients: String,
    /// Which end of a quarter supplies its follower count.
    #[arg(long, global = true, value_enum, default_value_t = Anchor::Latest)]
    pub quarter_anchor: Anchor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Anchor {
    Latest,
    Earliest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FileFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roll posts into per-page windowed series.
    Aggregate,
    /// Size-class tests, distribution fits and symmetry checks.
    Analyze,
    /// Fit the growth model coefficients.
    Model {
        /// Smallest bin given a Laplace fit.
        #[arg(long, default_value_t = 30)]
        min_bin: usize,
    },
    /// Simulate follower and engagement trajectories.
    Simulate {
        /// Starting follower counts.
        #[arg(long = "f0", value_delimiter = ',', default_value = "25000,250000,1000000")]
        initial_followers: Vec<f64>,
        /// Starting engagement.
        #[arg(long = "e0", default_value_t = 10_000.0)]
        initial_engagement: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
    },
    /// Label pages by reliability, build the matched sample and compare.
    Cohort {
        /// Pair closest couples first instead of minimising the total distance.
        #[arg(long)]
        greedy: bool,
    },
    /// Generate synthetic post and page files.
    Synth {
        #[arg(long = "n-pages", default_value_t = 50)]
        n_pages: usize,
        #[arg(long, default_value = "2018-01-01")]
        start: NaiveDate,
        #[arg(long, default_value_t = 104)]
        weeks: usize,
        #[arg(long, default_value_t = 3)]
        posts_per_week: usize,
        /// Use size-independent growth: the weekly coefficients' intercepts
        /// evaluated at 100K followers and 10K engagement.
        #[arg(long)]
        gibrat: bool,
        /// Posts before this date carry no follower count.
        #[arg(long)]
        followers_from: Option<NaiveDate>,
        #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
        format: FileFormat,
    },
}

impl Global {
    fn timescales(&self, default: &[Timescale]) -> Result<Vec<Timescale>> {
        let mut t = self.timescales.clone().unwrap_or_else(|| default.to_vec());
        if t.is_empty() {
            return Err(AppError::input("--timescales is empty"));
        }
        t.sort();
        t.dedup();
        Ok(t)
    }

    fn scheme(&self) -> Result<SizeScheme> {
        match &self.classes {
            Some(path) => io::read_scheme(io::open(path)?),
            None => Ok(SizeScheme::standard()),
        }
    }

    fn trim(&self) -> Result<(f64, f64)> {
        match self.trim[..] {
            [lo, hi] if 0.0 <= lo && lo < hi && hi <= 100.0 => Ok((lo, hi)),
            _ => Err(AppError::input("--trim takes two percentiles lo,hi with 0 <= lo < hi <= 100")),
        }
    }

    fn coefficients(&self) -> Result<ModelCoefficients> {
        if self.coefficients == BUILTIN_COEFFICIENTS {
            return Ok(ModelCoefficients::published());
        }
        io::read_coefficients(io::open(Path::new(&self.coefficients))?)
    }

    fn rule(&self) -> FollowerRule {
        FollowerRule {
            quarter: match self.quarter_anchor {
                Anchor::Latest => QuarterAnchor::Latest,
                Anchor::Earliest => QuarterAnchor::Earliest,
            },
        }
    }

    fn load(&self) -> Result<Loaded> {
        let input = self.input.as_deref().ok_or_else(|| AppError::input("--input is required"))?;
        let pages = self.pages.as_deref().ok_or_else(|| AppError::input("--pages is required"))?;
        for p in [input, pages] {
            if !p.is_file() {
                return Err(AppError::input(format!("{}: no such file", p.display())));
            }
        }
        let loaded = io::load_dataset(input, pages)?;
        pipeline::write_rejections(
            &self.out.join("rejections.csv"),
            &[("posts", &loaded.post_rejections), ("pages", &loaded.page_rejections)],
        )?;
        let rejected = loaded.post_rejections.len() + loaded.page_rejections.len();
        if rejected > 0 {
            eprintln!("warning: {rejected} rows rejected, see {}", self.out.join("rejections.csv").display());
        }
        Ok(loaded)
    }
}

const ALL_SCALES: [Timescale; 4] = Timescale::ALL;
const MODEL_SCALES: [Timescale; 3] = [Timescale::Weekly, Timescale::Monthly, Timescale::Quarterly];

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Aggregate => {
            let loaded = g.load()?;
            let all = pipeline::aggregate_all(&loaded.dataset, &g.timescales(&ALL_SCALES)?, g.rule());
            pipeline::write_aggregated(&g.out.join("aggregated.csv"), &all)?;
        }
        Command::Analyze => {
            let loaded = g.load()?;
            let cfg = AnalyzeConfig {
                timescales: g.timescales(&ALL_SCALES)?,
                scheme: g.scheme()?,
                trim: g.trim()?,
                metric: g.metric,
                rule: g.rule(),
            };
            let a = pipeline::analyze(&loaded.dataset, &cfg)?;
            warn(&a.warnings);
            pipeline::write_analysis(&g.out, &a)?;
        }
        Command::Model { min_bin } => {
            let loaded = g.load()?;
            let cfg = ModelConfig {
                timescales: g.timescales(&MODEL_SCALES)?,
                scheme: g.scheme()?,
                trim: g.trim()?,
                rule: g.rule(),
                min_bin: (*min_bin).max(2),
            };
            let run = pipeline::fit_model(&loaded.dataset, &cfg)?;
            warn(&run.warnings);
            pipeline::write_model(&g.out, &run)?;
        }
        Command::Simulate {
            initial_followers,
            initial_engagement,
            steps,
            runs,
        } => {
            let cfg = SimulateConfig {
                timescales: g.timescales(&MODEL_SCALES)?,
                initial_followers: initial_followers.clone(),
                initial_engagement: *initial_engagement,
                steps: *steps,
                runs: *runs,
                seed: g.seed,
            };
            let sims = pipeline::run_simulations(&g.coefficients()?, &cfg)?;
            pipeline::write_simulations(&g.out, &sims)?;
        }
        Command::Cohort { greedy } => {
            let loaded = g.load()?;
            let cfg = CohortConfig {
                timescales: g.timescales(&ALL_SCALES)?,
                protocol: if *greedy { Protocol::Greedy } else { Protocol::Optimal },
                rule: g.rule(),
            };
            let run = pipeline::run_cohort(&loaded.dataset, &cfg)?;
            warn(&run.warnings);
            pipeline::write_cohort(&g.out, &run)?;
        }
        Command::Synth {
            n_pages,
            start,
            weeks,
            posts_per_week,
            gibrat,
            followers_from,
            format,
        } => {
            let mut coefficients = g.coefficients()?;
            if *gibrat {
                coefficients = gibrat_from(&coefficients)?;
            }
            let cfg = SynthConfig {
                pages: *n_pages,
                start: *start,
                weeks: *weeks,
                posts_per_week: *posts_per_week,
                coefficients: coefficients.clone(),
                followers_from: *followers_from,
                seed: g.seed,
                ..SynthConfig::default()
            };
            let out = synth::generate(&cfg)?;
            let format = match format {
                FileFormat::Csv => Format::Csv,
                FileFormat::Jsonl => Format::Jsonl,
            };
            synth::write_synth(&g.out, &out, &coefficients, format)?;
        }
    }
    Ok(())
}

/// Size-independent law with the weekly parameters a 100K-follower page
/// with 10K weekly engagement has under `coefficients`.
fn gibrat_from(coefficients: &ModelCoefficients) -> Result<ModelCoefficients> {
    use pagegrowth_core::model::{eval_c_k, eval_mu_b};
    let (l, _) = eval_mu_b(coefficients, Timescale::Weekly, 1e5, 1e4)?;
    let (b, _) = eval_c_k(coefficients, Timescale::Weekly, 1e5)?;
    Ok(synth::gibrat_coefficients(l.mu, l.b, b.c, b.k))
}
