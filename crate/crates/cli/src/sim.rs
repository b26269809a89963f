use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Subcommand;
use spindecouple::simulate::{run_sweep, slope_scan, Regime, SweepConfig};

use crate::{emit, read_file, to_json, usage, write_file, CliError, CliResult, Ctx};

#[derive(clap::Args)]
pub struct ConfigArgs {
    /// One of fig6-ideal, fig6-finite, fig11.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML file with [hamiltonian], [sequence], [sweep], [numerics].
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    regime: Option<Regime>,
    /// Comma-separated sequence names (`NoDD` for free evolution).
    #[arg(long, value_delimiter = ',')]
    seqs: Option<Vec<String>>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand)]
pub enum SimCmd {
    /// Average distance over a grid of noise strengths; CSV output.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Grid size `NxM` along tau_delta and tau_Delta.
        #[arg(long)]
        grid: Option<String>,
        /// Fix tau_delta.
        #[arg(long)]
        delta: Option<f64>,
        /// Fix tau_Delta.
        #[arg(long = "Delta")]
        big_delta: Option<f64>,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Best-protocol map JSON path.
        #[arg(long)]
        best: Option<PathBuf>,
        /// Leave out the `# generated_at_unix=` header line.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Log-log slope of the mean distance over one decade.
    Slope {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seq: String,
        /// Lower end of the decade (tau_Delta, or tau_delta for single-field models).
        #[arg(long, default_value_t = 1e-3)]
        start: f64,
        /// tau_delta / tau_Delta along the scan.
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        #[arg(long, default_value_t = 6)]
        points: usize,
    },
    /// Print a preset (or the defaults) as TOML.
    Config {
        #[arg(long)]
        preset: Option<String>,
    },
}

impl ConfigArgs {
    fn resolve(&self, ctx: &Ctx) -> Result<SweepConfig, CliError> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(p), _) => SweepConfig::preset(p)?,
            (None, Some(path)) => SweepConfig::from_toml(&read_file(path)?)?,
            (None, None) => match self.regime {
                Some(Regime::Finite) => SweepConfig::preset("fig6-finite")?,
                _ => SweepConfig::preset("fig6-ideal")?,
            },
        };
        if let Some(r) = self.regime {
            cfg.sequence.regime = r;
            if r == Regime::Finite && self.preset.is_none() && self.config.is_none() {
                cfg.sequence.tau0 = 0.0;
            }
        }
        if let Some(n) = self.samples {
            cfg.sweep.samples = n;
        }
        if let Some(s) = &self.seqs {
            cfg.sequence.names = s.clone();
        }
        if let Some(s) = self.steps {
            cfg.numerics.steps_per_pulse = s;
        }
        if let Some(seed) = ctx.seed {
            cfg.sweep.seed = seed;
        }
        cfg.numerics.threads = ctx.threads;
        Ok(cfg)
    }
}

fn parse_grid(s: &str) -> Result<[usize; 2], CliError> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| usage(format!("grid '{s}' should look like 16x16")))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|_| usage(format!("bad grid size '{s}'")));
    Ok([p(a)?, p(b)?])
}

pub fn run(cmd: SimCmd, ctx: &Ctx) -> CliResult {
    match cmd {
        SimCmd::Sweep { cfg, grid, delta, big_delta, out, best, no_timestamp } => {
            let mut cfg = cfg.resolve(ctx)?;
            if let Some(g) = grid {
                cfg.sweep.grid = parse_grid(&g)?;
            }
            if let Some(d) = delta {
                cfg.sweep.x_range = [d, d];
            }
            if let Some(d) = big_delta {
                cfg.sweep.y_range = [d, d];
            }
            let result = run_sweep(&cfg)?;
            let stamp = (!no_timestamp).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
            let csv = result.to_csv(stamp);
            let summary: Vec<String> =
                result.summary().iter().map(|(s, d)| format!("{s}: mean D over grid = {d:.6e}")).collect();
            if out.is_some() {
                emit(out.as_deref(), &csv)?;
                println!("{}", summary.join("\n"));
            } else {
                emit(None, &csv)?;
                eprintln!("{}", summary.join("\n"));
            }
            if let Some(p) = best {
                write_file(&p, &to_json(&result.best_map()))?;
            }
            Ok(())
        }
        SimCmd::Slope { cfg, seq, start, ratio, points } => {
            let cfg = cfg.resolve(ctx)?;
            let scan = slope_scan(&cfg, &seq, start, ratio, points)?;
            if scan.slope.is_none() {
                println!("{}", to_json(&scan));
                return Err(CliError::Numerical("distance vanished; no slope to fit".into()));
            }
            emit(None, &to_json(&scan))
        }
        SimCmd::Config { preset } => {
            let cfg = match preset {
                Some(p) => SweepConfig::preset(&p)?,
                None => SweepConfig::default(),
            };
            emit(None, &cfg.to_toml())
        }
    }
}
