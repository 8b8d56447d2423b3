//! Batch command-line surface over the core library. Reports go to stdout as
//! JSON, diagnostics to stderr. Exit codes: 0 pass, 1 property failure with
//! a witness, 2 input error, 3 budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cubecc_core::freegrp::Budget;
use cubecc_core::gos::HorizontalQuotient;
use cubecc_core::json as schema;
use cubecc_core::pipeline::{self, HrushovskiOptions, HrushovskiOutcome, Target};

#[derive(Parser)]
#[command(name = "cubecc", version, about = "cube complex checks and extension constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// cap on parallel candidate evaluation
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Npc,
    Special,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Npc => Target::Npc,
            TargetArg::Special => Target::Special,
        }
    }
}

#[derive(clap::Args, Clone)]
struct BudgetArgs {
    /// largest permutation degree tried in quotient searches
    #[arg(long, default_value_t = 8)]
    budget_degree: usize,
    /// wall-clock budget for searches, in seconds
    #[arg(long, default_value_t = 60.0)]
    budget_seconds: f64,
    /// seed for the pseudorandom candidate stage
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl From<&BudgetArgs> for Budget {
    fn from(b: &BudgetArgs) -> Budget {
        Budget { max_degree: b.budget_degree, max_seconds: b.budget_seconds, seed: b.seed }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structural validation of a complex file
    Validate { file: PathBuf },
    /// Links of one cell or of every vertex
    Links {
        file: PathBuf,
        #[arg(long)]
        cell: Option<String>,
    },
    /// Nonpositive curvature verdict
    Npc { file: PathBuf },
    /// Specialness report with witnesses
    Special { file: PathBuf },
    /// Hyperplanes: dual classes, sidedness, carriers
    Hyperplanes { file: PathBuf },
    /// Immersion / local isometry verdicts for a map file
    Localiso { file: PathBuf },
    /// Build the realization of an instance file as a graph of spaces
    Realize {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Horizontal quotient of a graph of spaces
    Hquotient {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wall- and cross-injectivity and edge-space osculation
    Controlled { file: PathBuf },
    /// Search for a finite quotient separating coset products
    Separate {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a verified cover of an instance's realization
    Cover {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "npc")]
        target: TargetArg,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Full construction: extend every partial map to an automorphism
    Hrushovski {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "npc")]
        target: TargetArg,
        #[command(flatten)]
        budget: BudgetArgs,
        /// drop maps that are restrictions of other maps
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DOT export of skeletons, links, carriers, or graphs
    ExportDot {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "skeleton")]
        what: DotWhat,
        /// cell id, for link exports
        #[arg(long)]
        cell: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DotWhat {
    Skeleton,
    Link,
    Carriers,
    Graph,
    Horizontal,
}

/// pass / property-failure / input-error / exhausted
enum Outcome {
    Pass(Value),
    Fail(Value),
    Exhausted(Value),
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_complex(path: &Path) -> Result<cubecc_core::CubeComplex> {
    let v: schema::ComplexV1 = read_json(path)?;
    schema::complex_from_json(&v).map_err(|e| anyhow!("{e}"))
}

/// Write the artifact to `--out` when given; otherwise return it for
/// embedding into the report.
fn artifact(out: &Option<PathBuf>, value: Value) -> Result<Value> {
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(&value)?)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
        Ok(Value::String(path.display().to_string()))
    } else {
        Ok(value)
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Validate { file } => {
            let v: schema::ComplexV1 = read_json(&file)?;
            match schema::complex_from_json(&v) {
                Ok(x) => Ok(Outcome::Pass(json!({
                    "schema": "validation.v1",
                    "ok": true,
                    "cells": x.cell_count(),
                    "dim": x.dim(),
                }))),
                Err(e) => Ok(Outcome::Fail(json!({
                    "schema": "validation.v1",
                    "ok": false,
                    "error": e.to_string(),
                }))),
            }
        }
        Command::Links { file, cell } => {
            let x = load_complex(&file)?;
            let cells: Vec<String> = match cell {
                Some(c) => vec![c],
                None => x.vertices.iter().cloned().collect(),
            };
            let mut links = serde_json::Map::new();
            for c in cells {
                let l = x.link(&c).map_err(|e| anyhow!("{e}"))?;
                links.insert(
                    c,
                    json!({
                        "vertices": l.vertices.len(),
                        "one_simplices": l.edges.len(),
                        "two_simplices": l.triangles.len(),
                        "simplicial": l.is_simplicial(),
                    }),
                );
            }
            Ok(Outcome::Pass(json!({"schema": "links.v1", "links": links})))
        }
        Command::Npc { file } => {
            let x = load_complex(&file)?;
            match x.is_npc() {
                Ok(()) => Ok(Outcome::Pass(json!({"schema": "npc.v1", "npc": true}))),
                Err(w) => Ok(Outcome::Fail(json!({
                    "schema": "npc.v1",
                    "npc": false,
                    "witness": serde_json::to_value(w)?,
                }))),
            }
        }
        Command::Special { file } => {
            let x = load_complex(&file)?;
            let report = cubecc_core::hyperplane::is_special(&x);
            let value = schema::specialness_to_json(&report);
            if report.special {
                Ok(Outcome::Pass(value))
            } else {
                Ok(Outcome::Fail(value))
            }
        }
        Command::Hyperplanes { file } => {
            let x = load_complex(&file)?;
            let (_, hps) = cubecc_core::hyperplane::hyperplanes(&x);
            let list: Vec<Value> = hps
                .iter()
                .map(|h| {
                    json!({
                        "id": h.id,
                        "dual_edges": h.dual_edges,
                        "two_sided": h.orientation.is_some(),
                        "carrier_cells": h.carrier.cells.len(),
                    })
                })
                .collect();
            Ok(Outcome::Pass(json!({"schema": "hyperplanes.v1", "hyperplanes": list})))
        }
        Command::Localiso { file } => {
            let v: schema::MapV1 = read_json(&file)?;
            let f = schema::map_from_json(&v).map_err(|e| anyhow!("{e}"))?;
            let immersion = f.is_immersion();
            let li = f.is_local_isometry();
            let pass = li.is_ok();
            let value = json!({
                "schema": "localiso.v1",
                "immersion": immersion.is_ok(),
                "local_isometry": pass,
                "witness": match li { Ok(()) => Value::Null, Err(w) => serde_json::to_value(w)? },
            });
            Ok(if pass { Outcome::Pass(value) } else { Outcome::Fail(value) })
        }
        Command::Realize { file, out } => {
            let v: schema::InstanceV1 = read_json(&file)?;
            let (y, maps) = schema::instance_from_json(&v).map_err(|e| anyhow!("{e}"))?;
            let gos = cubecc_core::gos::realization(&y, &maps).map_err(|e| anyhow!("{e}"))?;
            let gv = schema::gos_to_json(&gos).map_err(|e| anyhow!("{e}"))?;
            let art = artifact(&out, serde_json::to_value(&gv)?)?;
            Ok(Outcome::Pass(json!({
                "schema": "realize.v1",
                "maps": maps.len(),
                "vertex_cells": y.cell_count(),
                "gos": art,
            })))
        }
        Command::Hquotient { file, out } => {
            let v: schema::GosV1 = read_json(&file)?;
            let gos = schema::gos_from_json(&v).map_err(|e| anyhow!("{e}"))?;
            let t = cubecc_core::gos::assemble(&gos).map_err(|e| anyhow!("{e}"))?;
            match cubecc_core::gos::horizontal_quotient(&t).map_err(|e| anyhow!("{e}"))? {
                HorizontalQuotient::Strict(sq) => {
                    let cx = schema::complex_to_json(&sq.complex);
                    let art = artifact(&out, serde_json::to_value(&cx)?)?;
                    Ok(Outcome::Pass(json!({
                        "schema": "hquotient.v1",
                        "strict": true,
                        "cells": sq.complex.cell_count(),
                        "quotient": art,
                    })))
                }
                HorizontalQuotient::NonStrict(w) => Ok(Outcome::Fail(json!({
                    "schema": "hquotient.v1",
                    "strict": false,
                    "witness": serde_json::to_value(w)?,
                }))),
            }
        }
        Command::Controlled { file } => {
            let v: schema::GosV1 = read_json(&file)?;
            let gos = schema::gos_from_json(&v).map_err(|e| anyhow!("{e}"))?;
            let report = cubecc_core::gos::is_controlled(&gos);
            let pass = report.is_controlled();
            let value = json!({
                "schema": "controlled.v1",
                "controlled": pass,
                "report": serde_json::to_value(&report)?,
            });
            Ok(if pass { Outcome::Pass(value) } else { Outcome::Fail(value) })
        }
        Command::Separate { file, budget, out } => {
            let raw: Value = read_json(&file)?;
            let list: Vec<schema::ProductV1> = if raw.is_array() {
                serde_json::from_value(raw)?
            } else {
                vec![serde_json::from_value(raw)?]
            };
            let products: Vec<_> = list
                .iter()
                .map(schema::product_from_json)
                .collect::<Result<_, _>>()
                .map_err(|e| anyhow!("{e}"))?;
            let rank = products.first().map(|p| p.rank).unwrap_or(1);
            if products.iter().any(|p| p.rank != rank) {
                return Err(anyhow!("all products must share one rank"));
            }
            match cubecc_core::freegrp::find_separating_quotient(rank, &products, &(&budget).into())
            {
                Ok(q) => {
                    let qv = schema::quotient_to_json(&q);
                    let art = artifact(&out, serde_json::to_value(&qv)?)?;
                    Ok(Outcome::Pass(json!({
                        "schema": "separate.v1",
                        "found": true,
                        "degree": q.degree,
                        "order": q.order(),
                        "quotient": art,
                    })))
                }
                Err(e) => Ok(Outcome::Exhausted(json!({
                    "schema": "separate.v1",
                    "found": false,
                    "trace": serde_json::to_value(&e.trace)?,
                }))),
            }
        }
        Command::Cover { file, target, budget } => {
            let v: schema::InstanceV1 = read_json(&file)?;
            let (y, maps) = schema::instance_from_json(&v).map_err(|e| anyhow!("{e}"))?;
            let real = cubecc_core::gos::realization(&y, &maps).map_err(|e| anyhow!("{e}"))?;
            match pipeline::search_cover(&real, target.into(), &(&budget).into()) {
                Ok((cover, verified)) => Ok(Outcome::Pass(json!({
                    "schema": "cover.v1",
                    "found": true,
                    "quotient": serde_json::to_value(schema::quotient_to_json(&cover.quotient))?,
                    "ledger": serde_json::to_value(&verified.ledger)?,
                }))),
                Err(e) => Ok(Outcome::Exhausted(json!({
                    "schema": "cover.v1",
                    "found": false,
                    "trace": serde_json::to_value(&e.trace)?,
                }))),
            }
        }
        Command::Hrushovski { file, target, budget, prune, out } => {
            let v: schema::InstanceV1 = read_json(&file)?;
            let (y, maps) = schema::instance_from_json(&v).map_err(|e| anyhow!("{e}"))?;
            let opts = HrushovskiOptions {
                target: target.into(),
                budget: (&budget).into(),
                prune_restrictions: prune,
            };
            match pipeline::hrushovski(&y, &maps, &opts).map_err(|e| anyhow!("{e}"))? {
                HrushovskiOutcome::Certificate(cert) => {
                    let cv = schema::certificate_to_json(&cert).map_err(|e| anyhow!("{e}"))?;
                    let art = artifact(&out, serde_json::to_value(&cv)?)?;
                    let pass = cert.ledger.all_required_pass();
                    let value = json!({
                        "schema": "hrushovski.v1",
                        "ok": pass,
                        "cells": cert.complex.cell_count(),
                        "dim": cert.complex.dim(),
                        "automorphisms": cert.autos.len(),
                        "certificate": art,
                    });
                    Ok(if pass { Outcome::Pass(value) } else { Outcome::Fail(value) })
                }
                HrushovskiOutcome::Exhausted(e) => Ok(Outcome::Exhausted(json!({
                    "schema": "hrushovski.v1",
                    "ok": false,
                    "trace": serde_json::to_value(&e.trace)?,
                }))),
            }
        }
        Command::ExportDot { file, what, cell, out } => {
            let dot = match what {
                DotWhat::Skeleton => {
                    let x = load_complex(&file)?;
                    cubecc_core::dot::skeleton(&x, "skeleton")
                }
                DotWhat::Link => {
                    let x = load_complex(&file)?;
                    let c = cell.ok_or_else(|| anyhow!("--cell is required for link export"))?;
                    let l = x.link(&c).map_err(|e| anyhow!("{e}"))?;
                    cubecc_core::dot::link(&l, &format!("link_{c}"))
                }
                DotWhat::Carriers => {
                    let x = load_complex(&file)?;
                    let (_, hps) = cubecc_core::hyperplane::hyperplanes(&x);
                    let mut s = String::new();
                    for h in &hps {
                        s.push_str(&cubecc_core::dot::carrier(&x, h, &format!("carrier_{}", h.id)));
                    }
                    s
                }
                DotWhat::Graph => {
                    let v: schema::GosV1 = read_json(&file)?;
                    let gos = schema::gos_from_json(&v).map_err(|e| anyhow!("{e}"))?;
                    cubecc_core::dot::ugraph(&gos.graph, "underlying")
                }
                DotWhat::Horizontal => {
                    let v: schema::GosV1 = read_json(&file)?;
                    let gos = schema::gos_from_json(&v).map_err(|e| anyhow!("{e}"))?;
                    let t = cubecc_core::gos::assemble(&gos).map_err(|e| anyhow!("{e}"))?;
                    let c = cell
                        .ok_or_else(|| anyhow!("--cell is required for horizontal export"))?;
                    let hg = cubecc_core::gos::horizontal_graph(&t, &c)
                        .map_err(|e| anyhow!("{e}"))?;
                    cubecc_core::dot::horizontal(&hg, &format!("horizontal_{c}"))
                }
            };
            if let Some(path) = &out {
                fs::write(path, &dot).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            } else {
                print!("{dot}");
            }
            Ok(Outcome::Pass(json!({"schema": "dot.v1", "ok": true})))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    match run(cli) {
        Ok(Outcome::Pass(v)) => {
            if v.get("schema").map(|s| s != "dot.v1").unwrap_or(true) {
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            }
            ExitCode::from(0)
        }
        Ok(Outcome::Fail(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            ExitCode::from(1)
        }
        Ok(Outcome::Exhausted(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
