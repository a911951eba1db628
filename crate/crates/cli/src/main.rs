//! Command-line front end: build networks from a config, evaluate them on
//! grids, run error/size sweeps and the deep-vs-shallow gap experiment,
//! and emit CSV reports plus SVG plots.

mod config;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use config::Config;
use deepapprox::analysis::{count_breakpoints_1d, gap_experiment, BreakKind};
use deepapprox::combinators::{
    build_gaussian, build_ridge, combine_product, combine_sum, compose,
};
use deepapprox::multivariate::{
    build_linear_product, build_multinomial, build_poly_then_chain, LinearFormSet,
};
use deepapprox::univariate::{build_polynomial, build_smooth, build_square};
use deepapprox::{grid, serial, BuildReport, Network};
use output::Series;
use std::path::{Path, PathBuf};

const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "deepapprox", version, about = "Constructive relu/step network builder and verifier")]
struct Cli {
    /// Output directory for nets, CSV reports and plots
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized verification grids (falls back to
    /// DEEPAPPROX_SEED, then 7)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid points for `eval`
    #[arg(long, global = true, default_value_t = 1001)]
    grid: usize,
    /// Break-point scan resolution (grid of 2^m cells)
    #[arg(long, global = true, default_value_t = 16)]
    resolution: u32,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one network from a config and append its report row
    Build {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a serialized network over a grid
    Eval {
        #[arg(long)]
        net: PathBuf,
        /// Compare against a registry target and report the sup error
        #[arg(long)]
        target: Option<String>,
    },
    /// Build across an epsilon list; CSV + SVG of log error vs size
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Deep-vs-shallow gap experiment; CSV + SVG of sizes vs log(1/eps)
    Gap {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scan a serialized 1-D network for break points
    Breakpoints {
        #[arg(long)]
        net: PathBuf,
    },
}

fn resolve_seed(flag: Option<u64>, cfg: Option<u64>) -> u64 {
    flag.or(cfg)
        .or_else(|| {
            std::env::var("DEEPAPPROX_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_SEED)
}

fn run_build(cfg: &Config, eps: f64, seed: u64) -> Result<(Network, BuildReport)> {
    let built = match cfg.kind.as_str() {
        "square" => build_square(eps),
        "polynomial" => build_polynomial(cfg.coeffs.as_ref().unwrap(), eps),
        "smooth" => {
            let t = cfg.lookup_target(cfg.name.as_ref().unwrap())?;
            build_smooth(&t, eps)
        }
        "sum" => {
            let targets = cfg
                .targets
                .as_ref()
                .unwrap()
                .iter()
                .map(|n| cfg.lookup_target(n))
                .collect::<Result<Vec<_>>>()?;
            combine_sum(&targets, cfg.beta.as_ref().unwrap(), eps)
        }
        "product" => {
            let targets = cfg
                .targets
                .as_ref()
                .unwrap()
                .iter()
                .map(|n| cfg.lookup_target(n))
                .collect::<Result<Vec<_>>>()?;
            combine_product(&targets, eps)
        }
        "compose" => compose(&cfg.chain_plan()?, eps),
        "ridge" => {
            let g = cfg.lookup_target(cfg.target.as_ref().unwrap())?;
            build_ridge(cfg.a.as_ref().unwrap(), &g, eps, seed)
        }
        "gaussian" => build_gaussian(cfg.dim.unwrap(), eps, seed),
        "linear_product" => {
            let forms = LinearFormSet::new(cfg.rows.clone().unwrap())?;
            build_linear_product(&forms, eps, seed)
        }
        "multinomial" => build_multinomial(&cfg.term_list()?, cfg.dim.unwrap(), eps, seed),
        "poly_chain" => build_poly_then_chain(
            &cfg.term_list()?,
            cfg.dim.unwrap(),
            &cfg.chain_plan()?,
            eps,
            seed,
        ),
        other => bail!("unknown kind `{other}`"),
    };
    Ok(built?)
}

/// Per-point triangle-inequality audit of a cascade: realized stage errors
/// and clamp losses, weighted by the downstream Lipschitz bounds, against
/// the total deviation.
fn log_compose_audit(cfg: &Config, eps: f64) -> Result<()> {
    let plan = cfg.chain_plan()?;
    let (net, _, probes) = deepapprox::combinators::compose_with_probes(&plan, eps)?;
    // probes run innermost-first; chain stages are listed outermost-first
    let stages: Vec<_> = plan.stages.iter().rev().collect();
    println!("x,stage_contributions,budget_at_x,actual_error");
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let values = net.forward(&[x]);
        let mut input = x;
        let mut budget = 0.0;
        let mut parts = Vec::new();
        for (stage, probe) in stages.iter().zip(&probes) {
            let realized = probe.output.eval(&values);
            let err = (stage.eval1(input) - realized * (1.0 + probe.tol)).abs();
            let contribution = probe.downstream_lip * (err + probe.tol * realized.abs());
            parts.push(format!("{}={contribution:.3e}", probe.name));
            budget += contribution;
            input = realized;
        }
        let actual = (plan.eval(x) - net.eval_unchecked(&[x])).abs();
        println!("{x},{},{budget:.3e},{actual:.3e}", parts.join("|"));
    }
    Ok(())
}

fn cmd_build(cli: &Cli, config: &Path) -> Result<()> {
    let cfg = Config::load(config)?;
    let eps = cfg.eps()?;
    let seed = resolve_seed(cli.seed, cfg.seed);
    let (net, report) = run_build(&cfg, eps, seed)?;
    if cli.verbose && cfg.kind == "compose" {
        log_compose_audit(&cfg, eps)?;
    }
    std::fs::create_dir_all(&cli.out)?;
    let net_path = cli.out.join(format!("{}.net.json", cfg.kind));
    std::fs::write(&net_path, serial::serialize(&net))?;
    output::append_csv(
        &cli.out.join("reports.csv"),
        output::REPORT_HEADER,
        &[output::report_row(&report)],
    )?;
    if cli.verbose {
        println!(
            "{}: depth {}, total {}, bound {}, measured {}",
            report.builder, report.counts.depth, report.counts.total, report.bound, report.measured
        );
    }
    println!(
        "built {} -> {} (measured {} <= bound {})",
        report.builder,
        net_path.display(),
        report.measured,
        report.bound
    );
    Ok(())
}

fn cmd_eval(cli: &Cli, net_path: &Path, target_name: Option<&str>) -> Result<()> {
    let text = std::fs::read_to_string(net_path)
        .with_context(|| format!("reading {}", net_path.display()))?;
    let net = serial::deserialize(&text)?;
    let seed = resolve_seed(cli.seed, None);
    let spec = if net.input_dim == 1 {
        grid::GridSpec::Uniform1d { points: cli.grid }
    } else {
        grid::GridSpec::Random {
            dim: net.input_dim,
            points: cli.grid,
            seed,
        }
    };
    let rows_data = grid::eval_grid(&net, &spec)?;

    let target = target_name
        .map(|n| {
            deepapprox::target::by_name(n).ok_or_else(|| anyhow!("unknown target `{n}`"))
        })
        .transpose()?;
    let mut header = String::new();
    for i in 0..net.input_dim {
        header.push_str(&format!("x{i},"));
    }
    header.push_str("value");
    if target.is_some() {
        header.push_str(",truth,abs_err");
    }
    let mut sup = 0.0f64;
    let rows: Vec<String> = rows_data
        .iter()
        .map(|(p, v)| {
            let mut row = String::new();
            for x in p {
                row.push_str(&format!("{x},"));
            }
            row.push_str(&v.to_string());
            if let Some(t) = &target {
                let truth = t.eval(p);
                let err = (v - truth).abs();
                sup = sup.max(err);
                row.push_str(&format!(",{truth},{err}"));
            }
            row
        })
        .collect();
    std::fs::create_dir_all(&cli.out)?;
    output::write_csv(&cli.out.join("eval.csv"), &header, &rows)?;
    if target.is_some() {
        println!("sup error over {} points: {sup}", rows.len());
    } else {
        println!("evaluated {} points", rows.len());
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, config: &Path) -> Result<()> {
    let cfg = Config::load(config)?;
    let eps_list = cfg.eps_list()?;
    let seed = resolve_seed(cli.seed, cfg.seed);
    let mut rows = Vec::new();
    let mut measured_series = Vec::new();
    let mut bound_series = Vec::new();
    for &eps in &eps_list {
        let (_, report) = run_build(&cfg, eps, seed)
            .with_context(|| format!("sweep entry eps={eps}"))?;
        measured_series.push((report.counts.total as f64, report.measured.log2()));
        bound_series.push((report.counts.total as f64, report.bound.log2()));
        rows.push(output::report_row(&report));
    }
    std::fs::create_dir_all(&cli.out)?;
    output::write_csv(&cli.out.join("sweep.csv"), output::REPORT_HEADER, &rows)?;
    let svg = output::line_chart(
        &format!("{} sweep", cfg.kind),
        "network size",
        "log2 sup error",
        &[
            Series {
                label: "measured",
                points: measured_series,
                color: "steelblue",
            },
            Series {
                label: "bound",
                points: bound_series,
                color: "firebrick",
            },
        ],
    );
    std::fs::write(cli.out.join("sweep.svg"), svg)?;
    println!("sweep: {} rows -> {}", rows.len(), cli.out.join("sweep.csv").display());
    Ok(())
}

const GAP_HEADER: &str = "function,epsilon,ns,nd,ls,ld,shallow_measured,deep_measured,breaks,required_breaks,vacuous,verdict_a,verdict_b,verdict_c,verdict_d";

fn cmd_gap(cli: &Cli, config: &Path) -> Result<()> {
    let cfg = Config::load(config)?;
    let name = cfg.name.clone().unwrap_or_else(|| "square".into());
    let target = cfg.lookup_target(&name)?;
    let eps_list = cfg.eps_list()?;
    let resolution = cfg.resolution.unwrap_or(cli.resolution);
    let report = gap_experiment(&target, &eps_list, resolution)?;

    let verdict = |v: bool| if v { "pass" } else { "fail" };
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                name,
                r.epsilon,
                r.shallow_total,
                r.deep_total,
                r.shallow_depth,
                r.deep_depth,
                r.shallow_measured,
                r.deep_measured,
                r.deep_breaks,
                r.required_breaks,
                r.bound_vacuous || r.breaks_vacuous,
                verdict(r.verdict_a),
                verdict(r.verdict_b),
                verdict(r.verdict_c),
                verdict(r.verdict_d),
            )
        })
        .collect();
    std::fs::create_dir_all(&cli.out)?;
    output::write_csv(&cli.out.join("gap.csv"), GAP_HEADER, &rows)?;
    let shallow: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| ((1.0 / r.epsilon).log2(), r.shallow_total as f64))
        .collect();
    let deep: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| ((1.0 / r.epsilon).log2(), r.deep_total as f64))
        .collect();
    let svg = output::line_chart(
        &format!("deep vs shallow size for {name}"),
        "log2(1/eps)",
        "network size",
        &[
            Series {
                label: "shallow",
                points: shallow,
                color: "firebrick",
            },
            Series {
                label: "deep",
                points: deep,
                color: "steelblue",
            },
        ],
    );
    std::fs::write(cli.out.join("gap.svg"), svg)?;
    if cli.verbose {
        for r in &report.rows {
            println!(
                "eps={}: ns={} nd={} breaks={} (required {})",
                r.epsilon, r.shallow_total, r.deep_total, r.deep_breaks, r.required_breaks
            );
        }
    }
    println!(
        "gap: {} rows, fitted c = {}, all verdicts pass: {}",
        report.rows.len(),
        report.fitted_c,
        report.all_pass
    );
    if !report.all_pass {
        bail!("gap experiment has failing verdicts");
    }
    Ok(())
}

fn cmd_breakpoints(cli: &Cli, net_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(net_path)
        .with_context(|| format!("reading {}", net_path.display()))?;
    let net = serial::deserialize(&text)?;
    let scan = count_breakpoints_1d(&net, cli.resolution)?;
    let rows: Vec<String> = scan
        .points
        .iter()
        .map(|(z, kind)| {
            format!(
                "{z},{}",
                match kind {
                    BreakKind::Jump => "jump",
                    BreakKind::Kink => "kink",
                }
            )
        })
        .collect();
    std::fs::create_dir_all(&cli.out)?;
    output::write_csv(&cli.out.join("breakpoints.csv"), "location,kind", &rows)?;
    println!(
        "{} break points at resolution {}",
        scan.count(),
        scan.resolution
    );
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build { config } => cmd_build(&cli, config),
        Command::Eval { net, target } => cmd_eval(&cli, net, target.as_deref()),
        Command::Sweep { config } => cmd_sweep(&cli, config),
        Command::Gap { config } => cmd_gap(&cli, config),
        Command::Breakpoints { net } => cmd_breakpoints(&cli, net),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
