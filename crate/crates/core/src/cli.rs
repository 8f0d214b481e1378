//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{self, builtin_presets, clifton_csv, dissipation_slope, table_report};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::io::{self, residual_csv, ArtifactWriter, RunManifest, SummaryMetrics};
use crate::params::SourceLaw;
use crate::solver;
use crate::verification;

#[derive(Debug, Parser)]
#[command(name = "failwave", version, about = "Failure-wave simulator")]
pub struct Cli {
    /// Output directory. Falls back to `output.dir` in the scenario, then to
    /// `failwave_out/<name>`.
    #[arg(long, global = true, env = "FAILWAVE_OUT")]
    pub out: Option<PathBuf>,

    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write snapshots, gauges, energy log and manifest.
    Run {
        config: PathBuf,
        /// Snapshot cadence in steps (overrides the scenario).
        #[arg(long)]
        snapshots: Option<usize>,
        /// Front threshold as a fraction of the reference damage.
        #[arg(long)]
        level: Option<f64>,
    },
    /// Cumulative dissipation of the scenario for a list of λ.
    CliftonStudy {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,0")]
        lambdas: Vec<f64>,
    },
    /// Predicted reaction times and widths against the published data.
    Tables,
    /// Lagrange residuals of the scenario over three space-time refinements.
    VerifyVariational {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Refinement suites with observed orders.
    Convergence {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Elastic,
    Diffusion,
    Variational,
    Kpp,
    All,
}

struct Ctx {
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn dir(&self, cfg: Option<&ScenarioConfig>, fallback: &str) -> PathBuf {
        if let Some(d) = &self.out {
            return d.clone();
        }
        match cfg {
            Some(c) => c
                .output
                .dir
                .as_ref()
                .map(PathBuf::from)
                .unwrap_or_else(|| Path::new("failwave_out").join(&c.name)),
            None => Path::new("failwave_out").join(fallback),
        }
    }
}

/// Parses arguments, runs the command and maps errors to exit codes: 1 for
/// configuration problems, 2 for failures during integration.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        out: cli.out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Run {
            config,
            snapshots,
            level,
        } => cmd_run(&ctx, &config, snapshots, level),
        Command::CliftonStudy { config, lambdas } => cmd_clifton(&ctx, &config, &lambdas),
        Command::Tables => cmd_tables(&ctx),
        Command::VerifyVariational { config, levels } => cmd_variational(&ctx, &config, levels),
        Command::Convergence { suite } => cmd_convergence(&ctx, suite),
    }
}

fn cmd_run(ctx: &Ctx, path: &Path, snapshots: Option<usize>, level: Option<f64>) -> Result<()> {
    let mut cfg = io::load_scenario(path)?;
    if let Some(n) = snapshots {
        cfg.output.snapshot_every = n;
    }
    if let Some(l) = level {
        cfg.analysis.front_level = l;
    }
    cfg.validate()?;
    let started = io::wall_clock();
    ctx.say(format!("{}: {} steps", cfg.name, cfg.steps()));
    let (out, err) = if cfg.material.lambda == 0.0 {
        (solver::run_clifton(&cfg)?, None)
    } else {
        solver::run_partial(&cfg)
    };
    let wave = if err.is_none() {
        analysis::wave_metrics(&cfg, &out).ok()
    } else {
        None
    };
    let dir = ctx.dir(Some(&cfg), "run");
    let manifest = io::write_run(&cfg, &out, wave, err.as_ref(), &dir, started)?;
    ctx.say(summary(&manifest));
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn summary(m: &RunManifest) -> String {
    let s = &m.metrics;
    let mut t = format!(
        "{} steps to t = {:e}; energy imbalance {:.2e} (relative); min ZdG/dt {:.3e} of peak {:.3e}; {} files",
        s.steps,
        s.final_time,
        s.relative_imbalance,
        s.min_z_gammadot,
        s.peak_z_gammadot,
        m.files.len()
    );
    if let Some(w) = &s.wave {
        t += &format!(
            "\nfront speed {:.6e} (R^2 {:.6}), rise time {:.4e}, predicted {:.4e}",
            w.v_f, w.fit_r2, w.tau, w.tau_predicted
        );
    }
    t
}

fn cmd_clifton(ctx: &Ctx, path: &Path, lambdas: &[f64]) -> Result<()> {
    let cfg = io::load_scenario(path)?;
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidValue("--lambdas".into(), "values must be finite and ≥ 0".into()));
    }
    let started = io::wall_clock();
    let rows = analysis::clifton_limit_study(&cfg, lambdas)?;
    let csv = clifton_csv(&rows);
    print!("{csv}");
    if let Some(s) = dissipation_slope(&rows) {
        ctx.say(format!("dissipation slope d ln D / d ln lambda = {s:.6}"));
    }
    let mut w = ArtifactWriter::new(ctx.dir(Some(&cfg), "clifton"))?;
    w.write("clifton_study.csv", &csv)?;
    finish(w, &cfg, started)
}

fn cmd_tables(ctx: &Ctx) -> Result<()> {
    let rep = table_report(&builtin_presets())?;
    let text = rep.to_text();
    print!("{text}");
    let mut w = ArtifactWriter::new(ctx.dir(None, "tables"))?;
    w.write("tables.csv", &rep.to_csv())?;
    w.write("tables.txt", &text)?;
    Ok(())
}

fn cmd_variational(ctx: &Ctx, path: &Path, levels: usize) -> Result<()> {
    let cfg = io::load_scenario(path)?;
    if levels == 0 {
        return Err(Error::InvalidValue("--levels".into(), "must be ≥ 1".into()));
    }
    let started = io::wall_clock();
    let study = verification::variational_refinement(&cfg, levels)?;
    let mut w = ArtifactWriter::new(ctx.dir(Some(&cfg), "variational"))?;
    for (k, l) in study.levels.iter().enumerate() {
        w.write(&format!("residuals_level{k}.csv"), &residual_csv(&l.report))?;
    }
    let csv = study.to_csv();
    print!("{csv}");
    w.write("refinement.csv", &csv)?;
    finish(w, &cfg, started)
}

fn cmd_convergence(ctx: &Ctx, suite: Suite) -> Result<()> {
    let all = suite == Suite::All;
    let mut w = ArtifactWriter::new(ctx.dir(None, "convergence"))?;
    if all || suite == Suite::Elastic {
        let r = verification::elastic_convergence(&[64, 128, 256])?;
        ctx.say(format!("elastic: observed orders {:?}", r.orders));
        print!("{}", r.to_csv());
        w.write("convergence_elastic.csv", &r.to_csv())?;
    }
    if all || suite == Suite::Diffusion {
        let r = verification::diffusion_convergence(&[80, 160, 320])?;
        ctx.say(format!("diffusion: observed orders {:?}", r.orders));
        print!("{}", r.to_csv());
        w.write("convergence_diffusion.csv", &r.to_csv())?;
    }
    if all || suite == Suite::Variational {
        let s = verification::variational_refinement(&crate::scenarios::quick(), 3)?;
        ctx.say(format!("variational: residual ratios {:?}", s.ratios()));
        print!("{}", s.to_csv());
        w.write("convergence_variational.csv", &s.to_csv())?;
    }
    if all || suite == Suite::Kpp {
        let (cfg, m) = verification::kpp_check()?;
        let rate = match cfg.material.source_law {
            SourceLaw::Logistic { rate, .. } => rate,
            SourceLaw::LinearDecay => 0.0,
        };
        let exact = 2.0 * (cfg.material.d1 * rate).sqrt();
        let csv = format!(
            "v_f,v_f_exact,fit_r2,tau,v_f_predicted\n{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            m.v_f, exact, m.fit_r2, m.tau, m.v_f_predicted
        );
        ctx.say(format!("kpp: front speed {:.4} (pulled-front value {exact:.4})", m.v_f));
        print!("{csv}");
        w.write("convergence_kpp.csv", &csv)?;
    }
    Ok(())
}

fn finish(w: ArtifactWriter, cfg: &ScenarioConfig, started: f64) -> Result<()> {
    w.finish(RunManifest {
        scenario: cfg.name.clone(),
        config_hash: io::config_hash(cfg),
        started,
        finished: io::wall_clock(),
        files: Vec::new(),
        metrics: SummaryMetrics::default(),
    })?;
    Ok(())
}
