//! `jumpmart`: reproducible runs of the exponential-martingale lab.
//!
//! Subcommands: `simulate`, `exponential`, `check-inequalities`, `novikov`,
//! `martingale-test`, `example-optimality`. Every run is fully determined by
//! its configuration and seed; reports are byte-identical across thread
//! counts. Option precedence: CLI flags > config file > defaults, with
//! `JUMPMART_THREADS` as an environment default for `--threads`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use jumpmart_core::calculus::{sde_residual_check, stochastic_exponential};
use jumpmart_core::criteria::{
    example_conditions, martingale_test, novikov_functional, search_example_params,
    ExampleParams, MartingaleTestParams, NovikovParams, DEFAULT_EPS_GRID, DEFAULT_MOM_BLOCKS,
};
use jumpmart_core::generators::{gen_path_with_step, RngStream};
use jumpmart_core::inequalities::{scan_all, worst_case_csv, DEFAULT_REL_TOL};
use jumpmart_core::model::{JumpLaw, ModelSpec, SamplePath};
use jumpmart_core::report::{to_json_pretty, Report};

const ARTIFACT: &str = "jumpmart";
const VERSION: &str = env!("CARGO_PKG_VERSION");
const THREADS_ENV: &str = "JUMPMART_THREADS";

#[derive(Parser)]
#[command(
    name = "jumpmart",
    version,
    about = "Simulation and verification lab for exponential martingales with nonnegative jumps"
)]
struct Cli {
    /// Flat key = value config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; a fully-defaulted run is reproducible from (command, seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads ("auto" or a count); results never depend on this.
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Report file path (default: <command>.<ext> in the working directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Two-sided confidence level for Monte Carlo intervals.
    #[arg(long, global = true)]
    ci_level: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// brownian | compensated_poisson | compound_poisson_martingale |
    /// stopped_scaled_cpp | zero
    #[arg(long)]
    model: Option<String>,
    /// Brownian volatility.
    #[arg(long)]
    sigma: Option<f64>,
    /// Poisson intensity.
    #[arg(long)]
    intensity: Option<f64>,
    /// Jump size (compensated Poisson) / scale a (stopped model).
    #[arg(long)]
    a: Option<f64>,
    /// Drift slope parameter b of the stopped model.
    #[arg(long)]
    b: Option<f64>,
    /// Mean jump size of the compound model.
    #[arg(long)]
    jump_mean: Option<f64>,
    /// exponential | deterministic
    #[arg(long)]
    jump_law: Option<String>,
    /// Positive real, or "until-stop" (stopped model only).
    #[arg(long)]
    horizon: Option<String>,
    /// Brownian grid step (default horizon / 1024).
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one path and dump it as t,value,is_jump CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Replicate index to dump.
        #[arg(long)]
        rep: Option<u64>,
    },
    /// Evaluate the stochastic exponential along one path and cross-check
    /// its closed form where one exists.
    Exponential {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        rep: Option<u64>,
    },
    /// Adversarial scan of the five inequality margins.
    CheckInequalities {
        /// Quasi-random points per lemma.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Sample the criterion functional g(eps) over an epsilon grid.
    Novikov {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated decreasing epsilon grid.
        #[arg(long)]
        eps_grid: Option<String>,
        #[arg(long)]
        reps: Option<u64>,
        /// Discount multiplying the rate (1-eps)/2.
        #[arg(long)]
        rate_scale: Option<f64>,
    },
    /// Monte Carlo test of E[E(M)_t] = 1.
    MartingaleTest {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluation time (default: the horizon; stopped model: its stop).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        mom_blocks: Option<usize>,
    },
    /// Reproduce the stopped-model counterexample conditions.
    ExampleOptimality {
        #[arg(long)]
        delta: Option<f64>,
        /// Scale a; searched from delta when omitted.
        #[arg(long)]
        a: Option<f64>,
        /// Parameter b; searched from delta when omitted.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        mom_blocks: Option<usize>,
    },
}

/// Flat `key = value` config file mirroring the flag names.
struct Cfg(HashMap<String, String>);

impl Cfg {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    anyhow!("config line {} is not `key = value`: {line}", lineno + 1)
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Cfg(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key {key} = {raw}: {e}")),
        }
    }

    fn get_raw(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }
}

fn pick<T>(cli: Option<T>, cfg: Option<T>, default: T) -> T {
    cli.or(cfg).unwrap_or(default)
}

fn pick_opt<T>(cli: Option<T>, cfg: Option<T>) -> Option<T> {
    cli.or(cfg)
}

fn resolve_threads(cli: Option<String>, cfg: &Cfg) -> Result<Option<usize>> {
    let raw = cli
        .or_else(|| cfg.get_raw("threads"))
        .or_else(|| std::env::var(THREADS_ENV).ok());
    match raw.as_deref() {
        None | Some("auto") => Ok(None),
        Some(s) => {
            let n: usize = s
                .parse()
                .map_err(|_| anyhow!("--threads must be a positive count or \"auto\", got {s}"))?;
            if n == 0 {
                bail!("--threads must be positive");
            }
            Ok(Some(n))
        }
    }
}

fn resolve_model(args: &ModelArgs, cfg: &Cfg) -> Result<(ModelSpec, Option<f64>)> {
    let kind = pick(
        args.model.clone(),
        cfg.get_raw("model"),
        "compensated_poisson".to_string(),
    );
    let horizon_raw = pick_opt(args.horizon.clone(), cfg.get_raw("horizon"));
    let fixed_horizon = |raw: &Option<String>| -> Result<f64> {
        match raw.as_deref() {
            None => Ok(1.0),
            Some("until-stop") => {
                bail!("horizon \"until-stop\" is only legal for stopped_scaled_cpp")
            }
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| anyhow!("invalid horizon {s}")),
        }
    };
    let step = pick_opt(args.step, cfg.get::<f64>("step")?);
    let spec = match kind.as_str() {
        "brownian" => {
            let sigma = pick(args.sigma, cfg.get("sigma")?, 1.0);
            ModelSpec::brownian(sigma, fixed_horizon(&horizon_raw)?)?
        }
        "compensated_poisson" => {
            let intensity = pick(args.intensity, cfg.get("intensity")?, 1.0);
            let a = pick(args.a, cfg.get("a")?, 1.0);
            ModelSpec::compensated_poisson(intensity, a, fixed_horizon(&horizon_raw)?)?
        }
        "compound_poisson_martingale" => {
            let intensity = pick(args.intensity, cfg.get("intensity")?, 1.0);
            let mean = pick(args.jump_mean, cfg.get("jump_mean")?, 1.0);
            let law = match pick(
                args.jump_law.clone(),
                cfg.get_raw("jump_law"),
                "exponential".to_string(),
            )
            .as_str()
            {
                "exponential" => JumpLaw::Exponential { mean },
                "deterministic" => JumpLaw::Deterministic { size: mean },
                other => bail!("unknown jump law {other}"),
            };
            ModelSpec::compound_poisson_martingale(intensity, law, fixed_horizon(&horizon_raw)?)?
        }
        "stopped_scaled_cpp" => {
            if horizon_raw.as_deref().is_some_and(|h| h != "until-stop") {
                bail!("stopped_scaled_cpp runs until its stopping time; use horizon = until-stop");
            }
            let a = pick(args.a, cfg.get("a")?, 1.0);
            let b = pick(args.b, cfg.get("b")?, 0.4);
            ModelSpec::stopped_scaled_cpp(a, b)?
        }
        "zero" => ModelSpec::zero(fixed_horizon(&horizon_raw)?)?,
        other => bail!("unknown model {other}"),
    };
    Ok((spec, step))
}

enum Format {
    Json,
    Csv,
}

fn resolve_format(cli: Option<String>, cfg: &Cfg, default: Format) -> Result<Format> {
    match pick_opt(cli, cfg.get_raw("format")).as_deref() {
        None => Ok(default),
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(other) => bail!("unknown format {other}; expected csv or json"),
    }
}

fn write_out(path: &PathBuf, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = Cfg::load(cli.config.as_ref())?;
    let seed = pick(cli.seed, cfg.get("seed")?, 42);
    let ci_level = pick(cli.ci_level, cfg.get("ci_level")?, 0.99);
    let threads = resolve_threads(cli.threads.clone(), &cfg)?;
    let body = || dispatch(&cli, &cfg, seed, ci_level);
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot build thread pool")?
            .install(body),
        None => body(),
    }
}

fn dispatch(cli: &Cli, cfg: &Cfg, seed: u64, ci_level: f64) -> Result<u8> {
    match &cli.command {
        Command::Simulate { model, rep } => {
            let (spec, step) = resolve_model(model, cfg)?;
            let rep = pick(*rep, cfg.get("rep")?, 0);
            cmd_simulate(cli, spec, step, seed, rep)
        }
        Command::Exponential { model, rep } => {
            let (spec, step) = resolve_model(model, cfg)?;
            let rep = pick(*rep, cfg.get("rep")?, 0);
            cmd_exponential(cli, spec, step, seed, rep)
        }
        Command::CheckInequalities { samples } => {
            let samples = pick(*samples, cfg.get("samples")?, 1_000_000);
            cmd_check_inequalities(cli, cfg, samples, seed)
        }
        Command::Novikov {
            model,
            alpha,
            eps_grid,
            reps,
            rate_scale,
        } => {
            let (spec, _) = resolve_model(model, cfg)?;
            let params = NovikovParams {
                alpha: pick(*alpha, cfg.get("alpha")?, 1.0),
                eps_grid: parse_eps_grid(pick_opt(eps_grid.clone(), cfg.get_raw("eps_grid")))?,
                n_reps: pick(*reps, cfg.get("reps")?, 100_000),
                seed,
                ci_level,
                rate_scale: pick(*rate_scale, cfg.get("rate_scale")?, 1.0),
            };
            cmd_novikov(cli, cfg, spec, params)
        }
        Command::MartingaleTest {
            model,
            t,
            reps,
            mom_blocks,
        } => {
            let (spec, step) = resolve_model(model, cfg)?;
            let params = MartingaleTestParams {
                n_reps: pick(*reps, cfg.get("reps")?, 100_000),
                seed,
                ci_level,
                mom_blocks: pick(*mom_blocks, cfg.get("mom_blocks")?, DEFAULT_MOM_BLOCKS),
                brownian_step: step,
            };
            let t = pick_opt(*t, cfg.get("t")?);
            cmd_martingale_test(cli, cfg, spec, t, params)
        }
        Command::ExampleOptimality {
            delta,
            a,
            b,
            alpha,
            reps,
            mom_blocks,
        } => {
            let delta = pick(*delta, cfg.get("delta")?, 0.75);
            let (a, b) = match (
                pick_opt(*a, cfg.get("a")?),
                pick_opt(*b, cfg.get("b")?),
            ) {
                (Some(a), Some(b)) => (a, b),
                (None, None) => search_example_params(delta)?,
                _ => bail!("provide both --a and --b, or neither (search)"),
            };
            let params = ExampleParams {
                delta,
                a,
                b,
                alpha: pick(*alpha, cfg.get("alpha")?, 1.0),
                n_reps: pick(*reps, cfg.get("reps")?, 100_000),
                seed,
                ci_level,
                mom_blocks: pick(*mom_blocks, cfg.get("mom_blocks")?, DEFAULT_MOM_BLOCKS),
            };
            cmd_example_optimality(cli, cfg, params)
        }
    }
}

fn parse_eps_grid(raw: Option<String>) -> Result<Vec<f64>> {
    match raw {
        None => Ok(DEFAULT_EPS_GRID.to_vec()),
        Some(s) => s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("invalid eps grid entry {tok}"))
            })
            .collect(),
    }
}

fn default_out(cli: &Cli, name: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(name))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_simulate(cli: &Cli, spec: ModelSpec, step: Option<f64>, seed: u64, rep: u64) -> Result<u8> {
    let path = gen_path_with_step(&spec, RngStream::new(seed, rep), step)?;
    let mut buf = Vec::new();
    path.dump_csv(&mut buf)?;
    let out = default_out(cli, "simulate.csv");
    write_out(&out, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
    println!(
        "simulate: model={} seed={seed} rep={rep} jumps={} terminal_t={} M_terminal={}",
        spec.kind_name(),
        path.jumps.len(),
        path.terminal_time(),
        path.terminal_value(),
    );
    println!("wrote {}", out.display());
    Ok(0)
}

/// Closed-form value of E(M) at the terminal time, for models that have one.
fn exponential_closed_form(path: &SamplePath) -> Option<f64> {
    match path.model {
        ModelSpec::CompensatedPoisson {
            intensity,
            jump_size,
            horizon,
        } => {
            // (1+a)^{N_T} exp(-a λ T)
            let n = path.jumps.len() as f64;
            Some((n * (1.0 + jump_size).ln() - jump_size * intensity * horizon).exp())
        }
        ModelSpec::StoppedScaledCpp { a, b } => {
            let theta = (1.0 + b) * (1.0 + a).ln() - a;
            Some((theta * path.stop_time.expect("stopped path")).exp() / (1.0 + a))
        }
        ModelSpec::Zero { .. } => Some(1.0),
        _ => None,
    }
}

fn cmd_exponential(
    cli: &Cli,
    spec: ModelSpec,
    step: Option<f64>,
    seed: u64,
    rep: u64,
) -> Result<u8> {
    let path = gen_path_with_step(&spec, RngStream::new(seed, rep), step)?;
    let mut times: Vec<(f64, bool)> = vec![(0.0, false)];
    times.extend(path.jumps.iter().map(|j| (j.time, true)));
    times.extend(
        path.grid_times
            .iter()
            .skip(1)
            .map(|&t| (t, false)),
    );
    times.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(y.1.cmp(&x.1)));
    let terminal = path.terminal_time();
    if times.last().is_none_or(|&(t, _)| t < terminal) {
        times.push((terminal, false));
    }
    let mut csv = String::from("t,em,is_jump\n");
    for (t, is_jump) in &times {
        let em = stochastic_exponential(&path, *t)?;
        writeln!(csv, "{t},{em},{}", u8::from(*is_jump)).expect("string write");
    }
    let out = default_out(cli, "exponential.csv");
    write_out(&out, &csv)?;

    let em_terminal = stochastic_exponential(&path, terminal)?;
    let mut failed = false;
    if let Some(closed) = exponential_closed_form(&path) {
        let rel = ((em_terminal - closed) / closed).abs();
        if rel > 1e-12 {
            eprintln!("closed-form cross-check failed: {em_terminal} vs {closed} (rel {rel})");
            failed = true;
        } else {
            println!("closed-form cross-check ok (rel err {rel:.3e})");
        }
    }
    if spec.is_pure_jump() {
        let residual = sde_residual_check(&path)?;
        if residual > 1e-10 {
            eprintln!("sde residual too large: {residual}");
            failed = true;
        } else {
            println!("sde residual ok ({residual:.3e})");
        }
    }
    println!(
        "exponential: model={} seed={seed} rep={rep} E(M) at t={terminal} = {em_terminal}",
        spec.kind_name()
    );
    println!("wrote {}", out.display());
    Ok(u8::from(failed))
}

#[derive(Serialize)]
struct InequalitiesConfig {
    samples: u64,
    rel_tol: f64,
}

fn cmd_check_inequalities(cli: &Cli, cfg: &Cfg, samples: u64, seed: u64) -> Result<u8> {
    let cases = scan_all(samples, seed, DEFAULT_REL_TOL);
    let all_hold = cases.iter().all(|c| c.holds);
    for c in &cases {
        println!(
            "{:<13} worst rel margin {:+.3e} at x={:.6e}  {}",
            c.lemma.name(),
            c.margin.rel_worst(),
            c.margin.point.x,
            if c.holds { "ok" } else { "VIOLATED" }
        );
    }
    let format = resolve_format(cli.format.clone(), cfg, Format::Csv)?;
    let out = match format {
        Format::Csv => {
            let out = default_out(cli, "check_inequalities.csv");
            write_out(&out, &worst_case_csv(&cases))?;
            out
        }
        Format::Json => {
            let report = Report {
                artifact: ARTIFACT,
                version: VERSION,
                command: "check-inequalities".into(),
                seed,
                config: InequalitiesConfig {
                    samples,
                    rel_tol: DEFAULT_REL_TOL,
                },
                results: &cases,
            };
            let out = default_out(cli, "check_inequalities.json");
            write_out(&out, &to_json_pretty(&report))?;
            out
        }
    };
    println!("wrote {}", out.display());
    Ok(u8::from(!all_hold))
}

#[derive(Serialize)]
struct NovikovConfig {
    model: ModelSpec,
    params: NovikovParams,
}

fn cmd_novikov(cli: &Cli, cfg: &Cfg, spec: ModelSpec, params: NovikovParams) -> Result<u8> {
    let curve = novikov_functional(&spec, &params)?;
    for (eps, g) in curve.eps_grid.iter().zip(&curve.values) {
        println!("eps={eps:<6} g(eps)={}", g.as_f64());
    }
    println!("verdict: {:?}", curve.verdict);
    let format = resolve_format(cli.format.clone(), cfg, Format::Json)?;
    let out = match format {
        Format::Json => {
            let report = Report {
                artifact: ARTIFACT,
                version: VERSION,
                command: "novikov".into(),
                seed: params.seed,
                config: NovikovConfig {
                    model: spec,
                    params: params.clone(),
                },
                results: &curve,
            };
            let out = default_out(cli, "novikov.json");
            write_out(&out, &to_json_pretty(&report))?;
            out
        }
        Format::Csv => {
            let mut csv = String::from("eps,g,expectation,source\n");
            for (i, eps) in curve.eps_grid.iter().enumerate() {
                writeln!(
                    csv,
                    "{eps},{},{},{:?}",
                    curve.values[i].as_f64(),
                    curve.estimates[i].expectation.as_f64(),
                    curve.estimates[i].source
                )
                .expect("string write");
            }
            let out = default_out(cli, "novikov.csv");
            write_out(&out, &csv)?;
            out
        }
    };
    println!("wrote {}", out.display());
    Ok(0)
}

#[derive(Serialize)]
struct MartingaleConfig {
    model: ModelSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    params: MartingaleTestParams,
}

fn cmd_martingale_test(
    cli: &Cli,
    cfg: &Cfg,
    spec: ModelSpec,
    t: Option<f64>,
    params: MartingaleTestParams,
) -> Result<u8> {
    let report = martingale_test(&spec, t, &params)?;
    println!(
        "martingale-test: model={} mean={} se={} ci=[{}, {}] verdict={:?}{}",
        spec.kind_name(),
        report.estimate.mean,
        report.estimate.std_error,
        report.estimate.ci_low,
        report.estimate.ci_high,
        report.verdict,
        if report.estimate.tail_flag {
            " [heavy tails]"
        } else {
            ""
        }
    );
    if let Some(oracle) = report.oracle {
        println!("oracle E[E(M)] = {oracle}");
    }
    let anomaly = report.anomaly;
    let format = resolve_format(cli.format.clone(), cfg, Format::Json)?;
    let out = match format {
        Format::Json => {
            let envelope = Report {
                artifact: ARTIFACT,
                version: VERSION,
                command: "martingale-test".into(),
                seed: params.seed,
                config: MartingaleConfig {
                    model: spec,
                    t,
                    params: params.clone(),
                },
                results: &report,
            };
            let out = default_out(cli, "martingale_test.json");
            write_out(&out, &to_json_pretty(&envelope))?;
            out
        }
        Format::Csv => {
            let e = &report.estimate;
            let csv = format!(
                "mean,std_error,ci_low,ci_high,n_reps,seed,verdict,oracle,tail_flag\n{},{},{},{},{},{},{:?},{},{}\n",
                e.mean,
                e.std_error,
                e.ci_low,
                e.ci_high,
                e.n_reps,
                e.seed,
                report.verdict,
                report.oracle.map(|o| o.to_string()).unwrap_or_default(),
                e.tail_flag
            );
            let out = default_out(cli, "martingale_test.csv");
            write_out(&out, &csv)?;
            out
        }
    };
    println!("wrote {}", out.display());
    Ok(u8::from(anomaly))
}

fn cmd_example_optimality(cli: &Cli, cfg: &Cfg, params: ExampleParams) -> Result<u8> {
    let report = example_conditions(&params)?;
    println!(
        "example-optimality: delta={} a={} b={} alpha={}",
        report.delta, report.a, report.b, report.alpha
    );
    println!(
        "cond1: E exp(theta T_b) = {} (MC {}) < {} ? {} (margin {})",
        report.cond1_lhs_oracle,
        report.cond1_lhs_mc.mean,
        report.cond1_rhs,
        report.cond1_holds,
        report.cond1_margin
    );
    println!(
        "cond2: rate {} <= boundary {} ? {}",
        report.exp_moment_rate, report.boundary, report.cond2_holds
    );
    println!(
        "E[E(M)_inf] oracle = {} (median-of-means {} in [{}, {}]) verdict {:?}",
        report.e_em_infty_oracle,
        report.e_em_infty_mc.mean,
        report.e_em_infty_mc.ci_low,
        report.e_em_infty_mc.ci_high,
        report.ui_verdict
    );
    let passed = report.cond1_holds && report.cond2_holds && report.oracle_gate.passed;
    let format = resolve_format(cli.format.clone(), cfg, Format::Json)?;
    let out = match format {
        Format::Json => {
            let envelope = Report {
                artifact: ARTIFACT,
                version: VERSION,
                command: "example-optimality".into(),
                seed: params.seed,
                config: &params,
                results: &report,
            };
            let out = default_out(cli, "example_optimality.json");
            write_out(&out, &to_json_pretty(&envelope))?;
            out
        }
        Format::Csv => {
            let csv = format!(
                "delta,a,b,alpha,cond1_lhs_oracle,cond1_rhs,cond1_holds,exp_moment_rate,boundary,cond2_holds,e_em_infty_oracle,ui_verdict\n{},{},{},{},{},{},{},{},{},{},{},{:?}\n",
                report.delta,
                report.a,
                report.b,
                report.alpha,
                report.cond1_lhs_oracle,
                report.cond1_rhs,
                report.cond1_holds,
                report.exp_moment_rate,
                report.boundary,
                report.cond2_holds,
                report.e_em_infty_oracle,
                report.ui_verdict
            );
            let out = default_out(cli, "example_optimality.csv");
            write_out(&out, &csv)?;
            out
        }
    };
    println!("wrote {}", out.display());
    if !passed {
        println!("verification failed: see report");
    }
    Ok(u8::from(!passed))
}
