//! Command-line front end: configuration, orchestration, CSV/JSON/SVG
//! emission.
//!
//! Exit codes: 0 on success with all verdicts passing, 2 when any verdict
//! fails, 1 on usage or parameter errors. Every run writes its fully
//! resolved configuration into the output directory. Config precedence is
//! defaults < key=value file < command-line flags; `CML_SEED` supplies the
//! default seed.

pub mod output;

use crate::analysis::exponent_grid;
use crate::construction::{BranchingSchedule, Realization};
use crate::error::{Error, Result};
use crate::experiments::adjoint::{adjoint_identity_check, random_plan_for_adjoint};
use crate::experiments::maximal::{
    bump_indicator, maximal_apply, sharpness_experiment, support_point, MaximalGrid,
};
use crate::experiments::phi::{phi_adversary, phi_scaling_experiment, phi_search};
use crate::experiments::salem::salem_scan;
use crate::experiments::sampling::rng_for;
use crate::experiments::{net_sup, tail, ExperimentConfig, ExperimentReport, Verdict};
use crate::geometry::{line_integral, IntegrandKind, LineIntegral, LineParams, Region};
use crate::scalar::DyadicRat;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use output::{exponents_svg, fmt_f64, fmt_rational, report_table, OutDir};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "cml", version, about = "Random Cantor maximal-operator laboratory")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// RNG seed (default: $CML_SEED, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = library default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exact rational arithmetic where supported.
    #[arg(long, global = true)]
    exact: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Table/plot format for commands that support it.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Flat key=value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exponent landscape p0(s) with the sharpness and comparison curves.
    Exponents {
        /// Grid start:stop:step inside (1/2, 1).
        #[arg(long)]
        s_grid: Option<String>,
    },
    /// Deterministic branching schedule (a_n, beta_n).
    Schedule {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Sample one realization and archive it with regularity diagnostics.
    Simulate {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Line integrals X_n, Y_n, Z_n along one line.
    Lines {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Comma-separated offsets in [-4, 0].
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Comma-separated slopes in [1, 2].
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        n_lo: Option<usize>,
        #[arg(long)]
        n_hi: Option<usize>,
    },
    /// Monte Carlo tail verification for X_n / Z_n on a stratum.
    Tails(ExperimentArgs),
    /// Net supremum of |X_n| over a dyadic parameter net.
    NetSup(ExperimentArgs),
    /// Adversarial lower-bound functional and random search.
    Phi(ExperimentArgs),
    /// Discretized maximal operator applied to a shrinking indicator.
    Maximal(ExperimentArgs),
    /// Duality identity check for even d.
    AdjointCheck(ExperimentArgs),
    /// Unboundedness slope scan below p = 1/s.
    Sharpness(ExperimentArgs),
    /// Fourier decay scan of nu_n.
    Salem(ExperimentArgs),
}

#[derive(Args, Debug, Default)]
struct ExperimentArgs {
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n_lo: Option<usize>,
    #[arg(long)]
    n_hi: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    spacing_log2: Option<u32>,
    #[arg(long)]
    points_per_axis: Option<usize>,
    #[arg(long)]
    x_grid_log2: Option<u32>,
    #[arg(long)]
    r_grid_log2: Option<u32>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    delta_lo: Option<u32>,
    #[arg(long)]
    delta_hi: Option<u32>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    xi_max: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

/// key=value file contents; later flags take precedence over it.
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::invalid(
                        "config_file",
                        format!("line {}: expected key=value, got {line:?}", lineno + 1),
                    ));
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::invalid("config_file", format!("key {key}: cannot parse {raw:?}"))
            }),
        }
    }
}

fn resolve<T: std::str::FromStr + Clone>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T> {
    Ok(flag.or(file.get(key)?).unwrap_or(default))
}

fn resolve_opt<T: std::str::FromStr + Clone>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
) -> Result<Option<T>> {
    Ok(flag.or(file.get(key)?))
}

fn parse_coords(raw: &str, op: &'static str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(op, format!("bad coordinate {t:?}")))
        })
        .collect()
}

fn coords_to_dyadic(vals: &[f64], op: &'static str) -> Result<Vec<DyadicRat>> {
    vals.iter()
        .map(|&v| {
            DyadicRat::try_from_f64(v)
                .ok_or_else(|| Error::invalid(op, format!("coordinate {v} is not representable")))
        })
        .collect()
}

/// Entry point used by the `cml` binary; returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let mut argv: Vec<String> = vec!["cml".to_string()];
    argv.extend(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    let file = FileConfig::load(cli.global.config.as_ref())?;
    let env_seed = std::env::var("CML_SEED")
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or(0);
    let seed = resolve(cli.global.seed, &file, "seed", env_seed)?;
    let threads = resolve(cli.global.threads, &file, "threads", 0usize)?;
    let out_dir = match cli.global.out_dir.clone() {
        Some(d) => d,
        None => PathBuf::from(file.get::<String>("out_dir")?.unwrap_or_else(|| "out".into())),
    };
    let format = cli.global.format.unwrap_or(OutputFormat::Csv);
    let exact = cli.global.exact || file.get::<bool>("exact")?.unwrap_or(false);
    let out = OutDir::new(&out_dir)?;

    let ctx = Ctx {
        seed,
        threads,
        exact,
        format,
        out,
        file,
        out_dir_str: out_dir.display().to_string(),
    };

    if threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?;
        pool.install(|| run_command(cli.cmd, &ctx))
    } else {
        run_command(cli.cmd, &ctx)
    }
}

struct Ctx {
    seed: u64,
    threads: usize,
    exact: bool,
    format: OutputFormat,
    out: OutDir,
    file: FileConfig,
    out_dir_str: String,
}

impl Ctx {
    fn base_config(&self, s: f64, d: usize, trials: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(s, d, self.seed, trials);
        cfg.threads = self.threads;
        cfg.out_dir = Some(self.out_dir_str.clone());
        cfg
    }

    fn emit(&self, name: &str, report: &ExperimentReport) -> Result<()> {
        self.out.write_report(&format!("{name}_report.json"), report)?;
        let (header, rows) = report_table(report);
        self.out.write_csv(&format!("{name}_table.csv"), &header, &rows)?;
        println!("{}", summary_line(report));
        for v in &report.verdicts {
            println!(
                "  [{}] {}: {}",
                if v.pass { "pass" } else { "FAIL" },
                v.name,
                v.detail
            );
        }
        Ok(())
    }
}

fn summary_line(report: &ExperimentReport) -> String {
    match &report.fit {
        Some(f) => format!(
            "{}: {} levels, slope {:.4} (residual {:.4})",
            report.kind,
            report.per_level.len(),
            f.slope,
            f.residual_rms
        ),
        None => format!("{}: {} levels", report.kind, report.per_level.len()),
    }
}

fn run_command(cmd: Cmd, ctx: &Ctx) -> Result<bool> {
    match cmd {
        Cmd::Exponents { s_grid } => cmd_exponents(ctx, s_grid),
        Cmd::Schedule { s, n_max } => cmd_schedule(ctx, s, n_max),
        Cmd::Simulate { s, n_max } => cmd_simulate(ctx, s, n_max),
        Cmd::Lines {
            s,
            n_max,
            x,
            r,
            n_lo,
            n_hi,
        } => cmd_lines(ctx, s, n_max, x, r, n_lo, n_hi),
        Cmd::Tails(a) => cmd_tails(ctx, a),
        Cmd::NetSup(a) => cmd_net_sup(ctx, a),
        Cmd::Phi(a) => cmd_phi(ctx, a),
        Cmd::Maximal(a) => cmd_maximal(ctx, a),
        Cmd::AdjointCheck(a) => cmd_adjoint(ctx, a),
        Cmd::Sharpness(a) => cmd_sharpness(ctx, a),
        Cmd::Salem(a) => cmd_salem(ctx, a),
    }
}

fn cmd_exponents(ctx: &Ctx, s_grid: Option<String>) -> Result<bool> {
    let spec = resolve(s_grid, &ctx.file, "s_grid", "0.505:0.995:0.005".to_string())?;
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::invalid("cmd_exponents", "s-grid must be start:stop:step"));
    }
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::invalid("cmd_exponents", format!("bad grid number {t:?}")))
    };
    let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !(start > 0.5 && stop < 1.0 && start <= stop) {
        return Err(Error::invalid(
            "cmd_exponents",
            "grid must lie inside (1/2, 1)",
        ));
    }
    let profiles = exponent_grid(start, stop, step)?;
    let rows: Vec<Vec<String>> = profiles
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.s),
                p.d.to_string(),
                fmt_f64(p.theta0),
                fmt_f64(p.xi0),
                fmt_f64(p.p0),
                fmt_f64(p.sharp_lower),
                p.lp_p0.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    ctx.out.write_csv(
        "exponents.csv",
        &["s", "d", "theta0", "xi0", "p0", "inv_s", "lp_p0"],
        &rows,
    )?;
    if ctx.format == OutputFormat::Svg {
        ctx.out.write_text("exponents.svg", &exponents_svg(&profiles))?;
    }
    let config = serde_json::json!({
        "command": "exponents", "s_grid": spec, "seed": ctx.seed,
        "threads": ctx.threads, "exact": ctx.exact, "out_dir": ctx.out_dir_str,
    });
    ctx.out
        .write_text("exponents_config.json", &serde_json::to_string_pretty(&config)?)?;
    println!("exponents: {} rows", profiles.len());
    Ok(true)
}

fn cmd_schedule(ctx: &Ctx, s: Option<f64>, n_max: Option<usize>) -> Result<bool> {
    let s = resolve(s, &ctx.file, "s", 0.75)?;
    let n_max = resolve(n_max, &ctx.file, "n_max", 16usize)?;
    let sch = BranchingSchedule::build(s, n_max)?;
    let rows: Vec<Vec<String>> = (1..=n_max)
        .map(|n| {
            vec![
                n.to_string(),
                sch.a_at(n).to_string(),
                sch.beta_at(n).to_string(),
            ]
        })
        .collect();
    ctx.out.write_csv("schedule.csv", &["n", "a_n", "beta_n"], &rows)?;
    let config = serde_json::json!({
        "command": "schedule", "s": s, "n_max": n_max, "seed": ctx.seed,
        "threads": ctx.threads, "out_dir": ctx.out_dir_str,
        "a": sch.a(), "beta": sch.beta(), "window_holds": sch.window_holds(),
    });
    ctx.out
        .write_text("schedule.json", &serde_json::to_string_pretty(&config)?)?;
    println!("schedule: s={s} n_max={n_max} window_holds={}", sch.window_holds());
    Ok(sch.window_holds())
}

fn cmd_simulate(ctx: &Ctx, s: Option<f64>, n_max: Option<usize>) -> Result<bool> {
    let s = resolve(s, &ctx.file, "s", 0.75)?;
    let n_max = resolve(n_max, &ctx.file, "n_max", 12usize)?;
    let sch = BranchingSchedule::build(s, n_max)?;
    let real = Realization::sample(&sch, ctx.seed);
    let record = real.to_record();
    ctx.out
        .write_text("realization.json", &serde_json::to_string_pretty(&record)?)?;
    let mut ok = true;
    let rows: Vec<Vec<String>> = (0..=n_max)
        .map(|n| {
            let ratio = real.ahlfors_ratio(n);
            ok &= ratio <= 3.0;
            let support = real.level(n).len() as f64 * (-(n as f64)).exp2();
            vec![
                n.to_string(),
                real.level(n).len().to_string(),
                fmt_f64(support),
                fmt_f64(ratio),
                fmt_f64(real.nu_value(n).to_f64()),
            ]
        })
        .collect();
    ctx.out.write_csv(
        "simulate_table.csv",
        &["n", "cells", "support_length", "ahlfors_ratio", "nu_sup"],
        &rows,
    )?;
    println!("simulate: s={s} n_max={n_max} seed={} ahlfors_ok={ok}", ctx.seed);
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_lines(
    ctx: &Ctx,
    s: Option<f64>,
    n_max: Option<usize>,
    x: Option<String>,
    r: Option<String>,
    n_lo: Option<usize>,
    n_hi: Option<usize>,
) -> Result<bool> {
    let s = resolve(s, &ctx.file, "s", 0.5)?;
    let x_raw = resolve(x, &ctx.file, "x", "-4,-4".to_string())?;
    let r_raw = resolve(r, &ctx.file, "r", "1,1".to_string())?;
    let xs = coords_to_dyadic(&parse_coords(&x_raw, "cmd_lines")?, "cmd_lines")?;
    let rs = coords_to_dyadic(&parse_coords(&r_raw, "cmd_lines")?, "cmd_lines")?;
    let line = LineParams::new(xs, rs)?;
    let n_lo = resolve(n_lo, &ctx.file, "n_lo", 0usize)?;
    let n_hi = resolve(n_hi, &ctx.file, "n_hi", 6usize)?;
    let n_max = resolve(n_max, &ctx.file, "n_max", n_hi + 1)?.max(n_hi + 1);
    let sch = BranchingSchedule::build(s, n_max)?;
    let real = Realization::sample(&sch, ctx.seed);

    let mut rows = Vec::new();
    for n in n_lo..=n_hi {
        let row = if ctx.exact {
            let xv: LineIntegral<BigRational> =
                line_integral(&real, n, &line, IntegrandKind::Lambda, Region::All)?;
            let yv: LineIntegral<BigRational> =
                line_integral(&real, n, &line, IntegrandKind::Mu, Region::All)?;
            let zv: LineIntegral<BigRational> =
                line_integral(&real, n, &line, IntegrandKind::MuDiff, Region::All)?;
            vec![
                n.to_string(),
                fmt_rational(&xv.dz),
                fmt_f64(xv.h1),
                fmt_rational(&yv.dz),
                fmt_f64(yv.h1),
                fmt_rational(&zv.dz),
                fmt_f64(zv.h1),
            ]
        } else {
            let xv: LineIntegral<f64> =
                line_integral(&real, n, &line, IntegrandKind::Lambda, Region::All)?;
            let yv: LineIntegral<f64> =
                line_integral(&real, n, &line, IntegrandKind::Mu, Region::All)?;
            let zv: LineIntegral<f64> =
                line_integral(&real, n, &line, IntegrandKind::MuDiff, Region::All)?;
            vec![
                n.to_string(),
                fmt_f64(xv.dz),
                fmt_f64(xv.h1),
                fmt_f64(yv.dz),
                fmt_f64(yv.h1),
                fmt_f64(zv.dz),
                fmt_f64(zv.h1),
            ]
        };
        rows.push(row);
    }
    ctx.out.write_csv(
        "lines_table.csv",
        &["n", "x_dz", "x_h1", "y_dz", "y_h1", "z_dz", "z_h1"],
        &rows,
    )?;
    let config = serde_json::json!({
        "command": "lines", "s": s, "x": x_raw, "r": r_raw, "n_lo": n_lo, "n_hi": n_hi,
        "n_max": n_max, "seed": ctx.seed, "exact": ctx.exact, "threads": ctx.threads,
        "out_dir": ctx.out_dir_str, "speed": line.speed(),
    });
    ctx.out
        .write_text("lines_config.json", &serde_json::to_string_pretty(&config)?)?;
    println!("lines: {} levels along speed-{:.4} line", rows.len(), line.speed());
    Ok(true)
}

fn experiment_config(ctx: &Ctx, a: &ExperimentArgs, defaults: (f64, usize, usize)) -> Result<ExperimentConfig> {
    let s = resolve(a.s, &ctx.file, "s", defaults.0)?;
    let d = resolve(a.d, &ctx.file, "d", defaults.1)?;
    let trials = resolve(a.trials, &ctx.file, "trials", defaults.2)?;
    let mut cfg = ctx.base_config(s, d, trials);
    cfg.m = resolve_opt(a.m, &ctx.file, "m")?;
    let n_lo = resolve_opt(a.n_lo, &ctx.file, "n_lo")?;
    let n_hi = resolve_opt(a.n_hi, &ctx.file, "n_hi")?;
    if let (Some(lo), Some(hi)) = (n_lo, n_hi) {
        cfg.n_range = Some((lo, hi));
    } else if let Some(n) = resolve_opt(a.n, &ctx.file, "n")? {
        cfg.n_range = Some((n, n));
    }
    cfg.theta = resolve_opt(a.theta, &ctx.file, "theta")?;
    cfg.xi = resolve_opt(a.xi, &ctx.file, "xi")?;
    if let Some(x) = resolve_opt(a.x.clone(), &ctx.file, "x")? {
        cfg.line_x = Some(parse_coords(&x, "experiment")?);
    }
    if let Some(r) = resolve_opt(a.r.clone(), &ctx.file, "r")? {
        cfg.line_r = Some(parse_coords(&r, "experiment")?);
    }
    cfg.net_spacing_log2 = resolve_opt(a.spacing_log2, &ctx.file, "spacing_log2")?;
    cfg.net_points_per_axis = resolve_opt(a.points_per_axis, &ctx.file, "points_per_axis")?;
    cfg.x_grid_log2 = resolve_opt(a.x_grid_log2, &ctx.file, "x_grid_log2")?;
    cfg.r_grid_log2 = resolve_opt(a.r_grid_log2, &ctx.file, "r_grid_log2")?;
    cfg.budget = resolve_opt(a.budget, &ctx.file, "budget")?;
    cfg.p = resolve_opt(a.p, &ctx.file, "p")?;
    cfg.q = resolve_opt(a.q, &ctx.file, "q")?;
    cfg.xi_max = resolve_opt(a.xi_max, &ctx.file, "xi_max")?;
    cfg.eps = resolve_opt(a.eps, &ctx.file, "eps")?;
    let delta_lo = resolve_opt(a.delta_lo, &ctx.file, "delta_lo")?;
    let delta_hi = resolve_opt(a.delta_hi, &ctx.file, "delta_hi")?;
    if let (Some(lo), Some(hi)) = (delta_lo, delta_hi) {
        if lo > hi {
            return Err(Error::invalid("experiment", "delta_lo must be <= delta_hi"));
        }
        cfg.delta_log2_list = Some((lo..=hi).collect());
    }
    Ok(cfg)
}

fn cmd_tails(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let mut cfg = experiment_config(ctx, &a, (0.8, 2, 200))?;
    if cfg.m.is_none() {
        cfg.m = Some(3);
    }
    if cfg.n_range.is_none() {
        cfg.n_range = Some((6, 14));
    }
    let report = tail::tail_experiment(&cfg)?;
    ctx.emit("tails", &report)?;
    Ok(report.all_pass())
}

fn cmd_net_sup(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let mut cfg = experiment_config(ctx, &a, (0.8, 2, 50))?;
    if cfg.m.is_none() {
        cfg.m = Some(3);
    }
    if cfg.n_range.is_none() {
        cfg.n_range = Some((8, 12));
    }
    if cfg.net_spacing_log2.is_none() {
        cfg.net_spacing_log2 = Some(8);
    }
    let report = net_sup::net_sup_experiment(&cfg)?;
    ctx.emit("net_sup", &report)?;
    Ok(report.all_pass())
}

fn cmd_phi(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let mut cfg = experiment_config(ctx, &a, (0.6, 2, 50))?;
    if cfg.n_range.is_none() {
        cfg.n_range = Some((6, 12));
    }
    let mut report = phi_scaling_experiment(&cfg)?;
    if let Some(budget) = cfg.budget {
        // one search run on the first realization at the deepest fitted level
        let levels = report.fit.as_ref().map(|f| f.levels.clone()).unwrap_or_default();
        if let Some(&k) = levels.last() {
            let sch = BranchingSchedule::build(cfg.s, k + 1)?;
            let real = Realization::sample(&sch, cfg.seed);
            let grid = cfg.x_grid_log2.unwrap_or(8);
            let adv = phi_adversary(&real, k, cfg.d, grid)?;
            let best = phi_search(&real, k, cfg.d, budget, cfg.seed, grid)?;
            report.constants.insert("search_best".into(), best);
            report.constants.insert("search_adversary".into(), adv.value);
            report.verdicts.push(Verdict::new(
                "search_dominates_adversary",
                best >= adv.value,
                format!("best {best:.6e} vs adversary {:.6e} at k={k}", adv.value),
            ));
        }
    }
    ctx.emit("phi", &report)?;
    Ok(report.all_pass())
}

fn cmd_maximal(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let cfg = experiment_config(ctx, &a, (0.75, 1, 1))?;
    let n = cfg
        .n_range
        .map(|(_, hi)| hi)
        .ok_or_else(|| Error::invalid("cmd_maximal", "requires --n"))?;
    let delta_log2 = cfg
        .delta_log2_list
        .as_ref()
        .and_then(|l| l.first().copied())
        .unwrap_or(6);
    let p = cfg.p.unwrap_or(1.2);
    let q = cfg.q.unwrap_or(p);
    let sch = BranchingSchedule::build(cfg.s, n)?;
    let real = Realization::sample(&sch, ctx.seed);
    let x0 = support_point(&real, n);
    let f = bump_indicator(x0, delta_log2, n as u32 + 1)?;
    let grid = MaximalGrid {
        x_lo: -x0,
        x_hi: DyadicRat::from_int(0),
        x_grid_log2: cfg.x_grid_log2.unwrap_or(6),
        r_grid_log2: cfg.r_grid_log2.unwrap_or(8),
        witness_center: Some(x0.to_f64()),
    };
    let res = maximal_apply(&real, n, &f, &grid, p, q)?;
    let rows: Vec<Vec<String>> = res
        .xs
        .iter()
        .zip(&res.values)
        .map(|(x, v)| vec![fmt_f64(*x), fmt_f64(*v)])
        .collect();
    ctx.out.write_csv("maximal_table.csv", &["x", "maximal_value"], &rows)?;
    let mut report = ExperimentReport::new("maximal", cfg.clone());
    report.constants.insert("x0".into(), x0.to_f64());
    report.constants.insert("f_norm_p".into(), res.f_norm_p);
    report.constants.insert("mf_norm_q".into(), res.mf_norm_q);
    report.constants.insert("norm_ratio".into(), res.norm_ratio);
    ctx.out.write_report("maximal_report.json", &report)?;
    println!(
        "maximal: n={n} delta=2^-{delta_log2} ratio={:.6}",
        res.norm_ratio
    );
    Ok(true)
}

fn cmd_adjoint(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let k_max = resolve(a.k_max, &ctx.file, "k_max", 6usize)?;
    let instances = resolve(a.instances, &ctx.file, "instances", 100usize)?;
    let cfg = experiment_config(ctx, &a, (0.75, 2, 1))?;
    let sch = BranchingSchedule::build(cfg.s, k_max + 1)?;
    let real = Realization::sample(&sch, cfg.seed);
    let mut rng = rng_for(cfg.seed, 0xADC);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for i in 0..instances {
        let k = i % (k_max + 1);
        let plan = random_plan_for_adjoint(&mut rng, 3);
        let chk = adjoint_identity_check(&real, k, &plan, cfg.d)?;
        worst = worst.max(chk.gap);
        rows.push(vec![
            i.to_string(),
            k.to_string(),
            fmt_f64(chk.lhs),
            fmt_f64(chk.rhs),
            fmt_f64(chk.gap),
        ]);
    }
    ctx.out
        .write_csv("adjoint_table.csv", &["instance", "k", "lhs", "rhs", "gap"], &rows)?;
    let mut report = ExperimentReport::new("adjoint-check", cfg);
    report.constants.insert("worst_gap".into(), worst);
    report.verdicts.push(Verdict::new(
        "duality_gap",
        worst <= 1e-9,
        format!("worst |lhs - rhs| = {worst:.3e} over {instances} instances"),
    ));
    ctx.emit("adjoint", &report)?;
    Ok(report.all_pass())
}

fn cmd_sharpness(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let mut cfg = experiment_config(ctx, &a, (0.75, 1, 1))?;
    if cfg.n_range.is_none() {
        cfg.n_range = Some((14, 14));
    }
    if cfg.p.is_none() {
        cfg.p = Some(1.2);
    }
    if cfg.delta_log2_list.is_none() {
        cfg.delta_log2_list = Some((4..=10).collect());
    }
    let report = sharpness_experiment(&cfg)?;
    ctx.emit("sharpness", &report)?;
    Ok(report.all_pass())
}

fn cmd_salem(ctx: &Ctx, a: ExperimentArgs) -> Result<bool> {
    let cfg = experiment_config(ctx, &a, (0.75, 1, 1))?;
    let n = cfg.n_range.map(|(_, hi)| hi).unwrap_or(10);
    let xi_max = cfg.xi_max.unwrap_or(256.0);
    let eps = cfg.eps.unwrap_or(0.1);
    let sch = BranchingSchedule::build(cfg.s, n.max(1))?;
    let real = Realization::sample(&sch, cfg.seed);
    let scan = salem_scan(&real, n, xi_max, eps)?;
    let mut report = ExperimentReport::new("salem", cfg);
    report.constants.insert("statistic".into(), scan.statistic);
    report.constants.insert("arg_xi".into(), scan.arg_xi);
    report.constants.insert("eps".into(), scan.eps);
    ctx.emit("salem", &report)?;
    Ok(true)
}
