use std::path::PathBuf;

use clap::Subcommand;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use spindecouple::algebra::{multipole_basis, spin_operators, Matrix, Operator, Spin, C64};
use spindecouple::majorana::{constellation, constellation_from_coefficients, crosscheck_symmetry, MajoranaError};
use spindecouple::pointgroup::named_group;
use spindecouple::simulate::{build_hamiltonian, random_single_spin, Coupling, HamiltonianKind, HamiltonianSpec};
use spindecouple::symmetry::{is_decoupling_group, is_invariant, InteractionSubspace, Symmetry, SYMMETRY_TOL};

use crate::{read_file, to_json, usage, CliError, CliResult, Ctx};

#[derive(clap::Args)]
pub struct OpArgs {
    /// jx, jy, jz, t:L:M, random, dipolar_rwa_pair or dis_plus_dd.
    #[arg(long, conflicts_with_all = ["matrix", "coeffs"])]
    op: Option<String>,
    /// Spin for single-spin operators.
    #[arg(long, default_value_t = 1.0)]
    spin: f64,
    /// JSON matrix `[[[re, im], ...], ...]` on one spin.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// JSON `{"l": L, "c": [[re, im], ...]}` with `M = -L..L`.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum MajoranaCmd {
    /// Star pairs of every nonzero rank component.
    Stars {
        #[command(flatten)]
        op: OpArgs,
        /// Only this rank.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Invariance under a group, decided on matrices and on constellations,
    /// plus whether the group average removes the operator.
    Detect {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long)]
        group: String,
    },
}

fn majorana_error(e: MajoranaError) -> CliError {
    match e {
        MajoranaError::NotHermitian(_) | MajoranaError::Algebra(_) => usage(e),
        _ => CliError::Numerical(e.to_string()),
    }
}

fn complex_pair(v: &Value) -> Option<C64> {
    let a = v.as_array()?;
    Some(C64::new(a.first()?.as_f64()?, a.get(1).and_then(Value::as_f64).unwrap_or(0.0)))
}

fn named_operator(name: &str, spin: f64, seed: u64) -> Result<Operator, CliError> {
    let spin = Spin::new(spin).map_err(usage)?;
    let ops = spin_operators(spin);
    let pair = vec![Spin::HALF; 2];
    let op = match name {
        "jx" => Operator::single(ops.jx),
        "jy" => Operator::single(ops.jy),
        "jz" => Operator::single(ops.jz),
        "random" => Operator::single(random_single_spin(spin, spin.twice() as usize, &mut ChaCha8Rng::seed_from_u64(seed))),
        "dipolar_rwa_pair" => {
            let mut spec = HamiltonianSpec::new(HamiltonianKind::DipolarRwa, pair);
            spec.couplings = vec![Coupling { i: 0, j: 1, strength: 1.0, axis: None }];
            build_hamiltonian(&spec)?
        }
        "dis_plus_dd" => {
            let mut spec = HamiltonianSpec::new(HamiltonianKind::DisPlusDdRwa, pair);
            spec.deltas = vec![0.7, -0.4];
            spec.couplings = vec![Coupling { i: 0, j: 1, strength: 1.0, axis: None }];
            build_hamiltonian(&spec)?
        }
        _ => {
            let parts: Vec<&str> = name.split(':').collect();
            let (l, m) = match parts.as_slice() {
                ["t", l, m] => (l.parse::<usize>().map_err(usage)?, m.parse::<i64>().map_err(usage)?),
                _ => return Err(usage(format!("unknown operator '{name}'"))),
            };
            let basis = multipole_basis(spin);
            if l > basis.max_rank() || m.unsigned_abs() as usize > l {
                return Err(usage(format!("T_{l}{m} does not exist for spin {}", spin.j())));
            }
            let t = basis.get(l, m);
            Operator::single((t + t.adjoint()) * C64::from(0.5))
        }
    };
    Ok(op.with_label(name))
}

fn matrix_operator(path: &PathBuf) -> Result<Operator, CliError> {
    let v: Value = serde_json::from_str(&read_file(path)?).map_err(usage)?;
    let rows = v.as_array().ok_or_else(|| usage("matrix must be a JSON array of rows"))?;
    let d = rows.len();
    let mut m = Matrix::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == d).ok_or_else(|| usage("matrix must be square"))?;
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = complex_pair(z).ok_or_else(|| usage("entries are [re, im] pairs"))?;
        }
    }
    Spin::from_dim(d).map_err(usage)?;
    Ok(Operator::single(m).with_label(path.display().to_string()))
}

pub fn run(cmd: MajoranaCmd, ctx: &Ctx) -> CliResult {
    match cmd {
        MajoranaCmd::Stars { op, rank } => {
            if let Some(path) = &op.coeffs {
                let v: Value = serde_json::from_str(&read_file(path)?).map_err(usage)?;
                let l = v["l"].as_u64().ok_or_else(|| usage("coefficient file needs an integer 'l'"))? as usize;
                let c: Option<Vec<C64>> = v["c"].as_array().map(|a| a.iter().map(complex_pair).collect()).unwrap_or(None);
                let c = c.filter(|c| c.len() == 2 * l + 1).ok_or_else(|| usage("'c' needs 2l+1 [re, im] pairs"))?;
                let cons = constellation_from_coefficients(l, &c).map_err(majorana_error)?;
                println!("{}", to_json(&json!({ "constellations": [cons] })));
                return Ok(());
            }
            let operator = operator_from(&op, ctx)?;
            let max_l: usize = operator.spins().iter().map(|s| s.twice() as usize).sum();
            let ranks: Vec<usize> = match rank {
                Some(l) if l == 0 || l > max_l => return Err(usage(format!("rank must lie in 1..={max_l}"))),
                Some(l) => vec![l],
                None => (1..=max_l).collect(),
            };
            let scale = operator.hs_norm().max(1e-300);
            let mut out = Vec::new();
            for l in ranks {
                let cons = constellation(&operator, l).map_err(majorana_error)?;
                if rank.is_some() || cons.radius > SYMMETRY_TOL * scale {
                    out.push(cons);
                }
            }
            println!("{}", to_json(&json!({ "operator": operator.label, "constellations": out })));
            Ok(())
        }
        MajoranaCmd::Detect { op, group } => {
            let operator = operator_from(&op, ctx)?;
            let g = named_group(&group).map_err(usage)?;
            let invariant = is_invariant(&operator, &Symmetry::Finite(g.clone()));
            // constellations exist only when each rank lies in a single irreducible copy
            let mut via: Option<bool> = Some(true);
            for e in &g.elements {
                match crosscheck_symmetry(&operator, e) {
                    Ok(c) => via = via.map(|v| v && c.via_constellations),
                    Err(MajoranaError::Algebra(_)) => {
                        via = None;
                        break;
                    }
                    Err(e) => return Err(majorana_error(e)),
                }
            }
            let report = is_decoupling_group(&g, &InteractionSubspace::from_operator(&operator.traceless()));
            let out = json!({
                "operator": operator.label,
                "group": g.name(),
                "invariant": invariant,
                "invariant_via_constellations": via,
                "methods_agree": via.map(|v| v == invariant),
                "decouples": report.is_decoupling,
                "residual": report.residual,
            });
            println!("{}", to_json(&out));
            Ok(())
        }
    }
}

fn operator_from(op: &OpArgs, ctx: &Ctx) -> Result<Operator, CliError> {
    let operator = match (&op.op, &op.matrix) {
        (Some(name), _) => named_operator(name, op.spin, ctx.seed())?,
        (None, Some(path)) => matrix_operator(path)?,
        (None, None) => return Err(usage("give --op, --matrix or --coeffs")),
    };
    let dev = operator.hermitian_deviation();
    if dev > 1e-9 * operator.hs_norm().max(1.0) {
        return Err(majorana_error(MajoranaError::NotHermitian(dev)));
    }
    Ok(operator)
}
