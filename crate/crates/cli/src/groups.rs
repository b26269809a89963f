use clap::Subcommand;
use serde_json::json;
use spindecouple::pointgroup::{factorize, named_group, subgroups, PointGroup};

use crate::{to_json, usage, CliError, CliResult};

#[derive(Subcommand)]
pub enum GroupsCmd {
    /// The point-group families and their orders.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Complementary subgroup factorizations `G = G1·G2`.
    Factorize {
        name: String,
        /// Every embedding instead of one per conjugacy class.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// All subgroups.
    Subgroups {
        name: String,
        #[arg(long)]
        json: bool,
    },
    /// Elements, generators and orientation as JSON.
    Show { name: String },
}

fn group(name: &str) -> Result<PointGroup, CliError> {
    named_group(name).map_err(usage)
}

pub fn run(cmd: GroupsCmd) -> CliResult {
    match cmd {
        GroupsCmd::List { json } => {
            let families = [
                ("C<n>", "cyclic", "n"),
                ("D<n>", "dihedral", "2n"),
                ("T", "tetrahedral", "12"),
                ("O", "octahedral", "24"),
                ("I", "icosahedral", "60"),
            ];
            if json {
                let v: Vec<_> = families.iter().map(|(n, f, o)| json!({"name": n, "family": f, "order": o})).collect();
                println!("{}", to_json(&v));
            } else {
                for (n, f, o) in families {
                    println!("{n:<6}{f:<13}order {o}");
                }
                println!("named orientations: D2fig5, C3lg3");
            }
        }
        GroupsCmd::Factorize { name, all, json } => {
            let g = group(&name)?;
            let facts = factorize(&g, all).map_err(usage)?;
            if json {
                let v: Vec<_> = facts
                    .iter()
                    .map(|f| {
                        json!({
                            "label": f.label(),
                            "first": f.first.name(),
                            "second": f.second.name(),
                            "first_order": f.first.order(),
                            "second_order": f.second.order(),
                        })
                    })
                    .collect();
                println!("{}", to_json(&v));
            } else {
                println!("{} (order {}): {} factorization(s)", g.name(), g.order(), facts.len());
                for f in &facts {
                    println!("  {}", f.label());
                }
            }
        }
        GroupsCmd::Subgroups { name, json } => {
            let g = group(&name)?;
            let subs = subgroups(&g).map_err(usage)?;
            if json {
                let v: Vec<_> = subs.iter().map(|s| json!({"name": s.name(), "order": s.order()})).collect();
                println!("{}", to_json(&v));
            } else {
                println!("{} (order {}): {} subgroup(s)", g.name(), g.order(), subs.len());
                for s in &subs {
                    println!("  {:<5} order {}", s.name(), s.order());
                }
            }
        }
        GroupsCmd::Show { name } => println!("{}", group(&name)?.to_json()),
    }
    Ok(())
}
