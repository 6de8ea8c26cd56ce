//! Command-line front end: direct solver invocations plus the reproduction
//! scenario runner. Exit code 0 only when every certificate in the produced
//! report passes.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use lgsolve::emit::CsvField;
use lgsolve::geom::pt;
use lgsolve::oracle::verify_least_gradient;
use lgsolve::scenario::{
    self, list_scenarios, load_scenario, run_scenario, CatenoidSpec, DataSpec, DomainSpec,
    NormSpec, OracleSpec, OutputSpec, Scenario, ScenarioMeta, SolverSpec, UnboundedSpec,
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lgsolve",
    about = "Level-set chord solvers for least gradient problems on strictly convex planar domains"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bounded-domain solve with the chord construction.
    Solve {
        #[arg(long, default_value = "disc")]
        domain: String,
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value_t = 200)]
        levels: usize,
        #[arg(long, default_value_t = 1e-3)]
        mollify_eps: f64,
        #[arg(long, default_value_t = 0.0)]
        mollify_beta: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Run the norm-regularization loop with this k_max (for norms
        /// without a strictly convex ball).
        #[arg(long, default_value_t = 0)]
        regularize_kmax: u32,
        #[arg(long)]
        allow_nonconvex_exterior: bool,
        #[arg(long)]
        out_grid: Option<String>,
        #[arg(long)]
        out_levels: Option<String>,
        #[arg(long)]
        report: Option<String>,
        #[arg(long, default_value_t = 50)]
        grid_n: usize,
    },
    /// Truncation loop on an unbounded domain.
    SolveUnbounded {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value_t = 200)]
        levels: usize,
        #[arg(long, default_value_t = 5.0)]
        probe_depth: f64,
        #[arg(long, default_value_t = 1e-4)]
        stab_tol: f64,
        /// none | axis-x | axis-y | mixed:<x0>
        #[arg(long, default_value = "none")]
        bias: String,
        #[arg(long)]
        allow_nonconvex_exterior: bool,
        #[arg(long)]
        out_grid: Option<String>,
        #[arg(long)]
        out_levels: Option<String>,
        #[arg(long)]
        report: Option<String>,
    },
    /// Finite-difference minimizer of the relaxed functional.
    Oracle {
        #[arg(long, default_value = "disc")]
        domain: String,
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        /// Cells across the domain diameter.
        #[arg(long, default_value_t = 64)]
        h: usize,
        #[arg(long, default_value_t = 20000)]
        iters: usize,
        #[arg(long)]
        out_grid: Option<String>,
        #[arg(long)]
        report: Option<String>,
    },
    /// Verify a CSV candidate field on a window.
    Verify {
        #[arg(long)]
        candidate: PathBuf,
        /// x0,y0,x1,y1
        #[arg(long)]
        window: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value_t = 48)]
        divisions: usize,
        #[arg(long, default_value_t = 20000)]
        iters: usize,
    },
    /// Closed-form discs-versus-catenoid comparison.
    Catenoid {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        critical: bool,
    },
    /// Run committed scenarios by name ("all" runs every scenario).
    Reproduce {
        names: Vec<String>,
        #[arg(long, default_value = "docs/scenarios")]
        scenarios_dir: PathBuf,
        /// Run independent scenarios concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List scenario names available in the scenarios directory.
    ListScenarios {
        #[arg(long, default_value = "docs/scenarios")]
        scenarios_dir: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if !all_pass {
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Solve {
            domain,
            data,
            norm,
            levels,
            mollify_eps,
            mollify_beta,
            seed,
            regularize_kmax,
            allow_nonconvex_exterior,
            out_grid,
            out_levels,
            report,
            grid_n,
        } => {
            let sc = Scenario {
                scenario: ScenarioMeta { name: "cli-solve".into(), mode: "bounded".into() },
                domain: DomainSpec { preset: domain, allow_nonconvex_exterior },
                data: DataSpec { preset: data, csv: None },
                norm: NormSpec { preset: norm },
                solver: SolverSpec {
                    levels,
                    mollify_eps,
                    mollify_beta,
                    seed,
                    regularize_kmax,
                },
                unbounded: UnboundedSpec::default(),
                oracle: OracleSpec::default(),
                catenoid: CatenoidSpec::default(),
                output: OutputSpec {
                    grid_csv: out_grid,
                    levels_svg: out_levels,
                    report_json: report,
                    grid_n,
                    samples: vec![],
                },
            };
            finish(run_scenario(&sc)?)
        }
        Cmd::SolveUnbounded {
            domain,
            data,
            norm,
            levels,
            probe_depth,
            stab_tol,
            bias,
            allow_nonconvex_exterior,
            out_grid,
            out_levels,
            report,
        } => {
            let mode = if bias == "none" { "unbounded" } else { "steer" };
            let sc = Scenario {
                scenario: ScenarioMeta { name: "cli-unbounded".into(), mode: mode.into() },
                domain: DomainSpec { preset: domain, allow_nonconvex_exterior },
                data: DataSpec { preset: data, csv: None },
                norm: NormSpec { preset: norm },
                solver: SolverSpec { levels, ..Default::default() },
                unbounded: UnboundedSpec {
                    probe_depth,
                    stab_tol,
                    offsets: None,
                    bias: Some(bias),
                    strip_bv_certificate: false,
                    verify_window: None,
                },
                oracle: OracleSpec::default(),
                catenoid: CatenoidSpec::default(),
                output: OutputSpec {
                    grid_csv: out_grid,
                    levels_svg: out_levels,
                    report_json: report,
                    grid_n: 50,
                    samples: vec![],
                },
            };
            finish(run_scenario(&sc)?)
        }
        Cmd::Oracle { domain, data, norm, h, iters, out_grid, report } => {
            let sc = Scenario {
                scenario: ScenarioMeta { name: "cli-oracle".into(), mode: "oracle".into() },
                domain: DomainSpec { preset: domain, allow_nonconvex_exterior: false },
                data: DataSpec { preset: data, csv: None },
                norm: NormSpec { preset: norm },
                solver: SolverSpec::default(),
                unbounded: UnboundedSpec::default(),
                oracle: OracleSpec { divisions: h, iters },
                catenoid: CatenoidSpec::default(),
                output: OutputSpec {
                    grid_csv: out_grid,
                    levels_svg: None,
                    report_json: report,
                    grid_n: 50,
                    samples: vec![],
                },
            };
            finish(run_scenario(&sc)?)
        }
        Cmd::Verify { candidate, window, norm, divisions, iters } => {
            let parts: Vec<f64> = window
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .context("window must be x0,y0,x1,y1")?;
            if parts.len() != 4 {
                bail!("window must have four comma-separated numbers");
            }
            let field = CsvField::load(&candidate)
                .with_context(|| format!("loading {}", candidate.display()))?;
            let n = build_norm_cli(&norm)?;
            let cert = verify_least_gradient(
                &field,
                (pt(parts[0], parts[1]), pt(parts[2], parts[3])),
                &n,
                divisions,
                iters,
            )?;
            println!(
                "candidate energy {:.6}, oracle energy {:.6}, gap {:.3e} (tol {:.3e}): {}",
                cert.candidate_energy,
                cert.oracle_energy,
                cert.gap,
                cert.tol,
                if cert.pass { "PASS" } else { "FAIL" }
            );
            Ok(cert.pass)
        }
        Cmd::Catenoid { a, critical } => {
            let sc = Scenario {
                scenario: ScenarioMeta { name: "cli-catenoid".into(), mode: "catenoid".into() },
                domain: DomainSpec::default(),
                data: DataSpec::default(),
                norm: NormSpec::default(),
                solver: SolverSpec::default(),
                unbounded: UnboundedSpec::default(),
                oracle: OracleSpec::default(),
                catenoid: CatenoidSpec { a, critical },
                output: OutputSpec::default(),
            };
            let rep = run_scenario(&sc)?;
            if let Some(cat) = &rep.catenoid {
                println!("a             = {:.10}", cat.a);
                if let Some(astar) = cat.critical_a {
                    println!("critical a*   = {:.10}", astar);
                }
                println!("disc area     = {:.10}", cat.disc_area);
                match cat.catenoid_area {
                    Some(v) => println!("catenoid area = {:.10}", v),
                    None => println!("catenoid area = (no catenoid spans the circles)"),
                }
                println!("regime        = {} ({})", cat.regime, cat.formula_id);
            }
            finish(rep)
        }
        Cmd::Reproduce { names, scenarios_dir, jobs } => {
            let names = if names.len() == 1 && names[0] == "all" {
                list_scenarios(&scenarios_dir)
            } else {
                names
            };
            if names.is_empty() {
                println!("no scenarios requested");
                return Ok(true);
            }
            let run_one = |name: &String| -> (String, Result<scenario::Report>) {
                let path = scenario::scenario_path(&scenarios_dir, name);
                let r = load_scenario(&path)
                    .map_err(|e| anyhow!("{e}"))
                    .and_then(|sc| run_scenario(&sc).map_err(|e| anyhow!("{e}")));
                (name.clone(), r)
            };
            let results: Vec<(String, Result<scenario::Report>)> = if jobs > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .context("thread pool")?;
                pool.install(|| {
                    use rayon::prelude::*;
                    names.par_iter().map(run_one).collect()
                })
            } else {
                names.iter().map(run_one).collect()
            };
            let mut all = true;
            for (name, r) in results {
                match r {
                    Ok(rep) => {
                        let pass = rep.all_pass();
                        all &= pass;
                        println!(
                            "{name}: {} ({} certificates, {:.2}s)",
                            if pass { "PASS" } else { "FAIL" },
                            rep.certificates.len(),
                            rep.wall_clock_s
                        );
                        for c in rep.certificates.iter().filter(|c| !c.pass) {
                            println!("  failed {}: {}", c.name, c.detail);
                        }
                    }
                    Err(e) => {
                        all = false;
                        println!("{name}: ERROR {e:#}");
                    }
                }
            }
            Ok(all)
        }
        Cmd::ListScenarios { scenarios_dir } => {
            for name in list_scenarios(&scenarios_dir) {
                println!("{name}");
            }
            Ok(true)
        }
    }
}

fn finish(rep: scenario::Report) -> Result<bool> {
    println!(
        "scenario {} [{}]: {} in {:.2}s",
        rep.scenario,
        rep.mode,
        if rep.all_pass() { "PASS" } else { "FAIL" },
        rep.wall_clock_s
    );
    for c in &rep.certificates {
        println!("  [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    for s in &rep.samples {
        println!("  u({:.4}, {:.4}) = {:.6}", s.x, s.y, s.u);
    }
    Ok(rep.all_pass())
}

fn build_norm_cli(preset: &str) -> Result<lgsolve::anisotropy::Norm2D> {
    match preset {
        "l2" => Ok(lgsolve::anisotropy::Norm2D::l2()),
        "l1" => Ok(lgsolve::anisotropy::Norm2D::l1()),
        "linf" => Ok(lgsolve::anisotropy::Norm2D::linf()),
        other => {
            if let Some(arg) = other.strip_prefix("lp(").and_then(|s| s.strip_suffix(')')) {
                Ok(lgsolve::anisotropy::Norm2D::lp(arg.trim().parse()?))
            } else {
                bail!("unsupported norm on the verify path: {other}")
            }
        }
    }
}
