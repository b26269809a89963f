use std::path::{Path, PathBuf};

use clap::{Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use spindecouple::algebra::{Operator, Spin};
use spindecouple::pointgroup::{closure, named_group, PointGroup};
use spindecouple::sequence::{
    builtin, builtin_names, cayley_graph, euler_sequence, hamiltonian_sequence, nest, parse_with, print, CayleyError,
    EdgeOrder, ParseOptions, PulseSequence, PulseTiming,
};
use spindecouple::simulate::{build_hamiltonian, magnus, HamiltonianKind, HamiltonianSpec};
use spindecouple::symmetry::{is_decoupling_group, InteractionSubspace};

use crate::{emit, read_file, to_json, usage, CliError, CliResult, Ctx};

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    Euler,
    Hamiltonian,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Order {
    Lowest,
    Rotate,
}

#[derive(Subcommand)]
pub enum SeqCmd {
    /// Names of the builtin sequences.
    List,
    /// A builtin sequence as DSL text, or as a JSON schedule with `--json`.
    Builtin {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        tau0: f64,
        /// Merge adjacent pulses.
        #[arg(long)]
        merged: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sequence from a Cayley graph: Eulerian circuit or Hamiltonian cycle.
    Synth {
        #[arg(long)]
        group: String,
        /// `label=<pulse statement>`, e.g. `a=axis=(1,0,0) angle=pi`.
        #[arg(long = "gen", required = true)]
        generators: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::Euler)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Order::Lowest)]
        order: Order,
        #[arg(long, default_value_t = 1.0)]
        tau0: f64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parses a DSL file and prints it back in canonical form.
    Parse {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        tau0: f64,
        #[arg(long)]
        json: bool,
    },
    /// Replaces every wait of OUTER by INNER.
    Nest {
        outer: String,
        inner: String,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical DSL text of a builtin name or a DSL file.
    Print { seq: String },
    /// Magnus terms and group-averaging report for a Hamiltonian.
    Check {
        /// Builtin name or DSL file.
        #[arg(long)]
        seq: String,
        /// Hamiltonian kind (random parameters from the seed) or a JSON spec file.
        #[arg(long)]
        hamiltonian: String,
        #[arg(long, default_value_t = 3)]
        sites: usize,
        #[arg(long, default_value_t = 0.5)]
        spin: f64,
        /// Group for the symmetrization report; defaults to the sequence's own.
        #[arg(long)]
        group: Option<String>,
    },
}

/// A builtin name, or a DSL file when the path exists.
pub fn load_sequence(arg: &str, tau0: f64) -> Result<PulseSequence, CliError> {
    if Path::new(arg).is_file() {
        let text = read_file(&PathBuf::from(arg))?;
        return parse_with(&text, ParseOptions { tau0 }).map_err(|e| usage(format!("{arg}:{e}")));
    }
    let seq = builtin(arg).map_err(usage)?;
    if tau0 == 1.0 {
        Ok(seq)
    } else {
        seq.with_timing(tau0, PulseTiming::Ideal).map_err(usage)
    }
}

fn render(seq: &PulseSequence, json: bool) -> String {
    if json {
        seq.to_schedule_json()
    } else {
        print(seq)
    }
}

fn synth_error(e: CayleyError) -> CliError {
    match e {
        CayleyError::NotInGroup(_) => usage(e),
        _ => CliError::Infeasible(e.to_string()),
    }
}

pub fn run(cmd: SeqCmd, ctx: &Ctx) -> CliResult {
    match cmd {
        SeqCmd::List => {
            for n in builtin_names() {
                println!("{n}");
            }
            Ok(())
        }
        SeqCmd::Builtin { name, tau0, merged, json, out } => {
            let mut seq = load_sequence(&name, tau0)?;
            if merged {
                seq = seq.merged();
            }
            emit(out.as_deref(), &render(&seq, json))
        }
        SeqCmd::Synth { group, generators, mode, order, tau0, json, out } => {
            let g = named_group(&group).map_err(usage)?;
            let mut gens = Vec::new();
            for spec in &generators {
                let (label, stmt) = spec.split_once('=').ok_or_else(|| usage(format!("generator '{spec}' needs label=pulse")))?;
                let stmt = stmt.trim();
                let stmt = if stmt.starts_with("pulse") { stmt.to_string() } else { format!("pulse {stmt}") };
                let parsed = parse_with(&stmt, ParseOptions::default()).map_err(|e| usage(format!("generator '{label}': {e}")))?;
                let pulse = *parsed.pulses().next().ok_or_else(|| usage(format!("generator '{label}' has no pulse")))?;
                gens.push((label.trim().to_string(), pulse));
            }
            let graph = cayley_graph(&g, &gens).map_err(synth_error)?;
            let seq = match mode {
                Mode::Euler => {
                    let order = match order {
                        Order::Lowest => EdgeOrder::LowestIndex,
                        Order::Rotate => EdgeOrder::RotateLabels,
                    };
                    euler_sequence(&graph, tau0, 0, order)
                }
                Mode::Hamiltonian => hamiltonian_sequence(&graph, tau0, ctx.seed).map_err(synth_error)?,
            };
            emit(out.as_deref(), &render(&seq, json))
        }
        SeqCmd::Parse { file, tau0, json } => {
            let text = read_file(&file)?;
            let seq = parse_with(&text, ParseOptions { tau0 }).map_err(|e| usage(format!("{}:{e}", file.display())))?;
            emit(None, &render(&seq, json))
        }
        SeqCmd::Nest { outer, inner, json, out } => {
            let seq = nest(&load_sequence(&inner, 1.0)?, &load_sequence(&outer, 1.0)?).map_err(usage)?;
            emit(out.as_deref(), &render(&seq, json))
        }
        SeqCmd::Print { seq } => emit(None, &print(&load_sequence(&seq, 1.0)?)),
        SeqCmd::Check { seq, hamiltonian, sites, spin, group } => {
            let seq = load_sequence(&seq, 1.0)?;
            let h = load_hamiltonian(&hamiltonian, sites, spin, ctx.seed())?;
            let m = magnus(&seq, &h)?;
            let hn = h.norm();
            // the stored group name loses the orientation; rebuild from the frames
            let g = match group {
                Some(name) => named_group(&name).map_err(usage)?,
                None => {
                    let frames: Vec<_> = seq.frames().into_iter().map(|(g, _)| g).collect();
                    let elements = closure(&frames, 120).map_err(usage)?;
                    PointGroup::from_elements(elements).map_err(usage)?
                }
            };
            let symmetry = is_decoupling_group(&g, &InteractionSubspace::from_operator(&h.traceless()));
            let report = json!({
                "sequence": seq.meta.name,
                "hamiltonian": h.label,
                "hamiltonian_norm": hn,
                "duration": m.duration,
                "order1_norm": m.norm1,
                "order2_norm": m.norm2,
                "order1_relative": if hn > 0.0 { m.norm1 / hn } else { 0.0 },
                "order2_relative": if hn > 0.0 { m.norm2 / (hn * hn * m.duration) } else { 0.0 },
                "symmetry": symmetry,
            });
            println!("{}", to_json(&report));
            Ok(())
        }
    }
}

/// A JSON `HamiltonianSpec` file, or a kind name with seeded random parameters.
pub fn load_hamiltonian(arg: &str, sites: usize, spin: f64, seed: u64) -> Result<Operator, CliError> {
    let spec = if Path::new(arg).is_file() {
        serde_json::from_str::<HamiltonianSpec>(&read_file(&PathBuf::from(arg))?).map_err(|e| usage(format!("{arg}: {e}")))?
    } else {
        let kind: HamiltonianKind = arg.parse().map_err(usage)?;
        let spin = Spin::new(spin).map_err(usage)?;
        let (spin, n) = match kind {
            HamiltonianKind::QuditDephasing if spin == Spin::HALF => (Spin::from_twice(4), 1),
            HamiltonianKind::QuditDephasing => (spin, 1),
            _ => (spin, sites),
        };
        if n == 0 {
            return Err(usage("--sites must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        HamiltonianSpec::random(kind, vec![spin; n], &mut rng)
    };
    Ok(build_hamiltonian(&spec)?)
}
