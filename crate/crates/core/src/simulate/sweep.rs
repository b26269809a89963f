//! Parameter sweeps of the average distance over random Hamiltonians.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{random_unit_vector, DisorderDipolarSample};
use super::propagate::{distance, propagate_finite, propagate_ideal, FiniteOptions};
use super::SimError;
use crate::algebra::{spin_operators, Matrix, Operator, Spin, C64};
use crate::sequence::{builtin, Item, Profile, PulseSequence, PulseTiming};

/// Name of the free-evolution baseline in sweep configs.
pub const BASELINE: &str = "NoDD";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Instantaneous pulses separated by `tau0`.
    Ideal,
    /// Pulses of duration `|θ|/χ` separated by `tau0` (usually zero).
    Finite,
}

impl std::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" => Ok(Regime::Ideal),
            "finite" => Ok(Regime::Finite),
            _ => Err(format!("unknown regime '{s}' (ideal|finite)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `x Ĥ_dis + y Ĥ_dd` on spins-1/2 with RWA disorder and dipolar parts of
    /// unit norm.
    DisPlusDdRwa,
    /// `x n̂·J` on a single spin with a random direction per sample.
    AxisField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianSection {
    pub model: NoiseModel,
    /// Number of sites.
    pub sites: usize,
    /// Spin quantum number of every site.
    pub spin: f64,
}

impl Default for HamiltonianSection {
    fn default() -> Self {
        HamiltonianSection { model: NoiseModel::DisPlusDdRwa, sites: 4, spin: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceSection {
    /// Builtin names, plus `NoDD` for free evolution over the shortest cycle.
    pub names: Vec<String>,
    pub regime: Regime,
    /// Wait between pulses.
    pub tau0: f64,
    /// Finite regime only.
    pub profile: Profile,
    /// Peak control rate `χ` in the finite regime.
    pub amplitude: f64,
}

impl Default for SequenceSection {
    fn default() -> Self {
        SequenceSection {
            names: vec![BASELINE.into(), "TEDDY".into()],
            regime: Regime::Ideal,
            tau0: 1.0,
            profile: Profile::Rect,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Points along `tau_delta` and `tau_Delta`.
    pub grid: [usize; 2],
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    /// Logarithmic spacing when both ends are positive.
    pub log: bool,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { grid: [16, 16], x_range: [1e-4, 1e-1], y_range: [1e-4, 1e-1], log: true, samples: 20, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub steps_per_pulse: usize,
    /// Worker cap; 0 uses every core.
    pub threads: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection { steps_per_pulse: 64, threads: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub hamiltonian: HamiltonianSection,
    pub sequence: SequenceSection,
    pub sweep: SweepSection,
    pub numerics: NumericsSection,
}

pub fn preset_names() -> &'static [&'static str] {
    &["fig6-ideal", "fig6-finite", "fig11"]
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn preset(name: &str) -> Result<Self, SimError> {
        let mut cfg = SweepConfig::default();
        match name.to_ascii_lowercase().as_str() {
            "fig6-ideal" => {
                cfg.sequence.names = names(&[BASELINE, "TEDDY", "TEDDY_REFL", "FOUR_PULSE"]);
            }
            "fig6-finite" => {
                cfg.sequence.names = names(&[BASELINE, "TEDDY", "TEDDY_REFL", "FOUR_PULSE"]);
                cfg.sequence.regime = Regime::Finite;
                cfg.sequence.tau0 = 0.0;
            }
            "fig11" => {
                cfg.hamiltonian = HamiltonianSection { model: NoiseModel::AxisField, sites: 1, spin: 3.0 };
                cfg.sequence.names = names(&["C3D2", "TDD1", "TDD2"]);
                cfg.sweep.grid = [11, 1];
                cfg.sweep.x_range = [1e-3, 1e-2];
                cfg.sweep.y_range = [0.0, 0.0];
                cfg.sweep.samples = 1000;
            }
            _ => return Err(SimError::Config(format!("unknown preset '{name}' (one of {})", preset_names().join(", ")))),
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        let h = &self.hamiltonian;
        if h.sites == 0 {
            return bad("hamiltonian.sites must be positive".into());
        }
        Spin::new(h.spin).map_err(|e| SimError::Config(e.to_string()))?;
        if h.model == NoiseModel::AxisField && h.sites != 1 {
            return bad("axis_field acts on a single site".into());
        }
        if h.model == NoiseModel::DisPlusDdRwa && h.spin != 0.5 {
            return bad("dis_plus_dd_rwa uses spins-1/2".into());
        }
        let s = &self.sequence;
        if s.names.is_empty() {
            return bad("sequence.names is empty".into());
        }
        if !(s.tau0 >= 0.0 && s.tau0.is_finite()) {
            return bad(format!("sequence.tau0 = {} must be non-negative", s.tau0));
        }
        if s.regime == Regime::Finite {
            if s.profile == Profile::Ideal {
                return bad("finite regime needs a rect or sin2 profile".into());
            }
            if !(s.amplitude > 0.0 && s.amplitude.is_finite()) {
                return bad("sequence.amplitude must be positive".into());
            }
        }
        let w = &self.sweep;
        if w.grid[0] == 0 || w.grid[1] == 0 || w.samples == 0 {
            return Err(SimError::EmptyGrid);
        }
        for r in [w.x_range, w.y_range] {
            if r.iter().any(|v| !v.is_finite() || *v < 0.0) || r[0] > r[1] {
                return bad(format!("range {r:?} must be ordered and non-negative"));
            }
        }
        if self.numerics.steps_per_pulse == 0 {
            return bad("numerics.steps_per_pulse must be at least 1".into());
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        axis_points(self.sweep.x_range, self.sweep.grid[0], self.sweep.log)
    }

    pub fn ys(&self) -> Vec<f64> {
        axis_points(self.sweep.y_range, self.sweep.grid[1], self.sweep.log)
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn axis_points([lo, hi]: [f64; 2], n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            if log && lo > 0.0 {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect()
}

/// One sequence evaluated on one Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub sequence: String,
    pub tau_delta: f64,
    pub tau_big_delta: f64,
    pub sample: usize,
    pub distance: f64,
    pub trace_abs: f64,
    pub duration: f64,
}

/// Sample average at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau_delta: f64,
    #[serde(rename = "tau_Delta")]
    pub tau_big_delta: f64,
    pub sequence: String,
    pub mean_d: f64,
    pub std_d: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub sequences: Vec<String>,
    /// Ordered by x, then y, then sequence.
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn row(&self, seq: &str, ix: usize, iy: usize) -> Option<&SweepRow> {
        let k = self.sequences.iter().position(|s| s.eq_ignore_ascii_case(seq))?;
        self.rows.get((ix * self.ys.len() + iy) * self.sequences.len() + k)
    }

    pub fn mean(&self, seq: &str, ix: usize, iy: usize) -> Option<f64> {
        self.row(seq, ix, iy).map(|r| r.mean_d)
    }

    /// Log-log slope of the mean distance against `tau_delta + tau_Delta`
    /// along the given grid points.
    pub fn slope_along(&self, seq: &str, points: &[(usize, usize)]) -> Option<f64> {
        let pts: Option<Vec<(f64, f64)>> =
            points.iter().map(|&(ix, iy)| self.mean(seq, ix, iy).map(|d| (self.xs[ix] + self.ys[iy], d))).collect();
        loglog_slope(&pts?)
    }

    /// Mean distance per sequence over the whole grid.
    pub fn summary(&self) -> Vec<(String, f64)> {
        self.sequences
            .iter()
            .map(|s| {
                let v: Vec<f64> = self.rows.iter().filter(|r| &r.sequence == s).map(|r| r.mean_d).collect();
                (s.clone(), v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect()
    }

    pub fn to_csv(&self, timestamp: Option<u64>) -> String {
        let mut out = String::new();
        if let Some(t) = timestamp {
            let _ = writeln!(out, "# generated_at_unix={t}");
        }
        out.push_str("tau_delta,tau_Delta,sequence,mean_D,std_D,n_samples,seed\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:e},{:e},{},{:e},{:e},{},{}",
                r.tau_delta, r.tau_big_delta, r.sequence, r.mean_d, r.std_d, r.n_samples, r.seed
            );
        }
        out
    }

    /// Argmin over sequences per grid point; `best[iy][ix]`.
    pub fn best_map(&self) -> BestMap {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let mut best = vec![vec![String::new(); nx]; ny];
        let mut mean_d = vec![vec![0.0; nx]; ny];
        for ix in 0..nx {
            for iy in 0..ny {
                let (name, d) = self
                    .sequences
                    .iter()
                    .map(|s| (s.clone(), self.mean(s, ix, iy).unwrap_or(f64::INFINITY)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("at least one sequence");
                best[iy][ix] = name;
                mean_d[iy][ix] = d;
            }
        }
        BestMap { tau_delta: self.xs.clone(), tau_big_delta: self.ys.clone(), sequences: self.sequences.clone(), best, mean_d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestMap {
    pub tau_delta: Vec<f64>,
    #[serde(rename = "tau_Delta")]
    pub tau_big_delta: Vec<f64>,
    pub sequences: Vec<String>,
    pub best: Vec<Vec<String>>,
    pub mean_d: Vec<Vec<f64>>,
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// points or any non-positive value.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Random Hamiltonian shape of one sample, scaled per grid point.
enum Shape {
    DisDd(DisorderDipolarSample),
    Axis { dims: Vec<usize>, generator: Matrix },
}

impl Shape {
    fn draw(cfg: &SweepConfig, sample: usize) -> Shape {
        // common random numbers: the same Hamiltonian shapes at every grid point
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.sweep.seed);
        rng.set_stream(sample as u64);
        let spin = Spin::new(cfg.hamiltonian.spin).expect("validated");
        let spins = vec![spin; cfg.hamiltonian.sites];
        match cfg.hamiltonian.model {
            NoiseModel::DisPlusDdRwa => Shape::DisDd(DisorderDipolarSample::draw(&spins, &mut rng)),
            NoiseModel::AxisField => {
                let n = random_unit_vector(&mut rng);
                Shape::Axis { dims: vec![spin.dim()], generator: spin_operators(spin).along(n) }
            }
        }
    }

    fn at(&self, x: f64, y: f64) -> Operator {
        let (dims, m) = match self {
            Shape::DisDd(s) => (s.dims.clone(), s.scaled(x, y)),
            Shape::Axis { dims, generator } => (dims.clone(), generator * C64::from(x)),
        };
        Operator::new(dims, m).expect("dims match")
    }
}

/// Builtins with the configured timing, plus the baseline.
pub fn resolve_sequences(cfg: &SweepConfig) -> Result<Vec<PulseSequence>, SimError> {
    let s = &cfg.sequence;
    let timing = match s.regime {
        Regime::Ideal => PulseTiming::Ideal,
        Regime::Finite => PulseTiming::Amplitude { profile: s.profile, amplitude: s.amplitude },
    };
    let mut out: Vec<Option<PulseSequence>> = Vec::new();
    for name in &s.names {
        if name.eq_ignore_ascii_case(BASELINE) {
            out.push(None);
            continue;
        }
        let seq = builtin(name).map_err(|e| SimError::Config(e.to_string()))?;
        out.push(Some(seq.with_timing(s.tau0, timing)?.renamed(name)));
    }
    let shortest = out.iter().flatten().map(|q| q.duration()).fold(f64::INFINITY, f64::min);
    let t = if shortest.is_finite() { shortest } else { s.tau0 };
    out.into_iter()
        .map(|q| match q {
            Some(q) => Ok(q),
            None => Ok(PulseSequence::new(BASELINE, vec![Item::Wait { duration: t }])?),
        })
        .collect()
}

fn evaluate(
    seqs: &[PulseSequence],
    regime: Regime,
    opts: &FiniteOptions,
    h: &Operator,
    x: f64,
    y: f64,
    sample: usize,
) -> Result<Vec<SimResult>, SimError> {
    seqs.iter()
        .map(|seq| {
            let u = match regime {
                Regime::Ideal => propagate_ideal(seq, h)?,
                Regime::Finite => propagate_finite(seq, h, opts)?,
            };
            Ok(SimResult {
                sequence: seq.meta.name.clone(),
                tau_delta: x,
                tau_big_delta: y,
                sample,
                distance: distance(&u)?,
                trace_abs: u.trace().norm() / u.nrows() as f64,
                duration: seq.duration(),
            })
        })
        .collect()
}

/// Mean and standard deviation of the distance over samples at arbitrary
/// `(x, y)` points. Rows come out ordered by point, then sequence.
pub fn sweep_points(cfg: &SweepConfig, points: &[(f64, f64)]) -> Result<Vec<SweepRow>, SimError> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    let seqs = resolve_sequences(cfg)?;
    let opts = FiniteOptions { steps_per_pulse: cfg.numerics.steps_per_pulse, control_error: None };
    let samples = cfg.sweep.samples;
    let regime = cfg.sequence.regime;
    let work = || -> Result<Vec<Vec<Vec<SimResult>>>, SimError> {
        (0..samples)
            .into_par_iter()
            .map(|s| {
                let shape = Shape::draw(cfg, s);
                points.iter().map(|&(x, y)| evaluate(&seqs, regime, &opts, &shape.at(x, y), x, y, s)).collect()
            })
            .collect()
    };
    let per_sample = if cfg.numerics.threads == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.numerics.threads)
            .build()
            .map_err(|e| SimError::Config(e.to_string()))?
            .install(work)?
    };
    let mut rows = Vec::with_capacity(points.len() * seqs.len());
    for (p, &(x, y)) in points.iter().enumerate() {
        for (k, seq) in seqs.iter().enumerate() {
            let d: Vec<f64> = per_sample.iter().map(|s| s[p][k].distance).collect();
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let var = if d.len() > 1 { d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            if !mean.is_finite() {
                return Err(SimError::NonFinite);
            }
            rows.push(SweepRow {
                tau_delta: x,
                tau_big_delta: y,
                sequence: seq.meta.name.clone(),
                mean_d: mean,
                std_d: var.sqrt(),
                n_samples: d.len(),
                seed: cfg.sweep.seed,
            });
        }
    }
    Ok(rows)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput, SimError> {
    cfg.validate()?;
    let (xs, ys) = (cfg.xs(), cfg.ys());
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let rows = sweep_points(cfg, &points)?;
    let sequences = resolve_sequences(cfg)?.into_iter().map(|s| s.meta.name).collect();
    Ok(SweepOutput { xs, ys, sequences, rows })
}

/// Distance of one sequence along a log-spaced decade at fixed `x/y` ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeScan {
    pub sequence: String,
    pub points: Vec<(f64, f64, f64)>,
    pub slope: Option<f64>,
}

/// Scans `y` over `[start, 10 start]` with `x = ratio · y` (with `y = 0`,
/// `x` over the decade, for single-parameter models) and fits the slope.
pub fn slope_scan(cfg: &SweepConfig, seq: &str, start: f64, ratio: f64, n: usize) -> Result<SlopeScan, SimError> {
    if n < 2 || !(start > 0.0) {
        return Err(SimError::Config("slope scan needs at least two positive points".into()));
    }
    let mut cfg = cfg.clone();
    cfg.sequence.names = vec![seq.to_string()];
    let ts = axis_points([start, 10.0 * start], n, true);
    let points: Vec<(f64, f64)> = match cfg.hamiltonian.model {
        NoiseModel::AxisField => ts.iter().map(|&t| (t, 0.0)).collect(),
        NoiseModel::DisPlusDdRwa => ts.iter().map(|&t| (ratio * t, t)).collect(),
    };
    let rows = sweep_points(&cfg, &points)?;
    let pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.tau_delta, r.tau_big_delta, r.mean_d)).collect();
    let slope = loglog_slope(&pts.iter().zip(&ts).map(|(p, &t)| (t, p.2)).collect::<Vec<_>>());
    Ok(SlopeScan { sequence: seq.to_string(), points: pts, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(names: &[&str]) -> SweepConfig {
        let mut cfg = SweepConfig::default();
        cfg.hamiltonian.sites = 2;
        cfg.sequence.names = super::names(names);
        cfg.sweep.grid = [2, 2];
        cfg.sweep.samples = 3;
        cfg
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e-3, 2e-3, 5e-3, 1e-2].iter().map(|&x| (x, 7.0 * x * x * x)).collect();
        assert!((loglog_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(1.0, 0.0), (2.0, 1.0)]), None);
        assert_eq!(loglog_slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn axis_spacing() {
        assert_eq!(axis_points([0.0, 0.0], 1, true), vec![0.0]);
        let v = axis_points([1e-4, 1e-1], 16, true);
        assert!((v[5] / v[0] - 10.0).abs() < 1e-12 && (v[15] - 0.1).abs() < 1e-15);
        assert_eq!(axis_points([0.0, 1.0], 3, true), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn zero_noise_gives_zero_distance() {
        let mut cfg = small(&[BASELINE, "TEDDY"]);
        cfg.sweep.grid = [1, 1];
        cfg.sweep.x_range = [0.0, 0.0];
        cfg.sweep.y_range = [0.0, 0.0];
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows.iter().all(|r| r.mean_d < 1e-7 && r.std_d < 1e-7));
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let mut cfg = small(&[BASELINE, "TEDDY", "FOUR_PULSE"]);
        let a = run_sweep(&cfg).unwrap().to_csv(None);
        cfg.numerics.threads = 1;
        let b = run_sweep(&cfg).unwrap().to_csv(None);
        assert_eq!(a, b);
        cfg.sweep.seed = 9;
        assert_ne!(a, run_sweep(&cfg).unwrap().to_csv(None));
    }

    #[test]
    fn csv_and_best_map_layout() {
        let out = run_sweep(&small(&[BASELINE, "TEDDY"])).unwrap();
        let csv = out.to_csv(Some(12));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# generated_at_unix=12"));
        assert_eq!(lines.next(), Some("tau_delta,tau_Delta,sequence,mean_D,std_D,n_samples,seed"));
        assert_eq!(lines.count(), 8);
        let best = out.best_map();
        assert_eq!(best.best.len(), 2);
        assert!(best.best.iter().flatten().all(|b| b == "TEDDY"));
    }

    #[test]
    fn baseline_matches_shortest_cycle() {
        let cfg = small(&[BASELINE, "TEDDY_REFL", "TEDDY"]);
        let seqs = resolve_sequences(&cfg).unwrap();
        assert_eq!(seqs[0].duration(), 8.0);
        let mut cfg = cfg;
        cfg.sequence.regime = Regime::Finite;
        cfg.sequence.tau0 = 0.0;
        let seqs = resolve_sequences(&cfg).unwrap();
        assert!((seqs[0].duration() - 8.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn config_round_trip_and_errors() {
        for p in preset_names() {
            let cfg = SweepConfig::preset(p).unwrap();
            assert_eq!(SweepConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
        let partial = SweepConfig::from_toml("[sweep]\nsamples = 5\n").unwrap();
        assert_eq!(partial.sweep.samples, 5);
        assert_eq!(partial.sequence, SequenceSection::default());
        assert!(matches!(SweepConfig::from_toml("[sweep]\nsampels = 5\n"), Err(SimError::Config(_))));
        assert!(matches!(SweepConfig::from_toml("[sweep]\ngrid = [0, 4]\n"), Err(SimError::EmptyGrid)));
        assert!(SweepConfig::preset("fig7").is_err());
        let mut cfg = small(&["NOT_A_SEQUENCE"]);
        assert!(matches!(run_sweep(&cfg), Err(SimError::Config(_))));
        cfg.sequence.names.clear();
        assert!(run_sweep(&cfg).is_err());
    }
}
