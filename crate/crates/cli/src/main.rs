use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rig_giant_core::branching::predict_giant_fraction;
use rig_giant_core::error::{Error, Result};
use rig_giant_core::explore::{
    big_vertex_census, explore_component, ExplorationConfig, Mode, OmegaRule,
};
use rig_giant_core::graph::{
    attribute_multiplicity, component_census, degree_census, limit_degree_pmf, sample_graph,
    write_dump, GraphParams, GraphSample,
};
use rig_giant_core::harness::{
    emit_report, render_report, run_experiment, DistributionSpec, ExperimentConfig, ReportFormat,
};
use rig_giant_core::hypergeom::{
    check_lemma1, verify_grid, BoundReport, IntersectionProbabilities, IntersectionQuery,
};
use rig_giant_core::{parse_pmf, SizeDistribution};

const THREADS_VAR: &str = "RIG_GIANT_THREADS";

#[derive(Parser)]
#[command(
    name = "rig-giant",
    version,
    about = "Giant components of random intersection graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DistArgs {
    /// JSON file holding a family (`{"family":"point","size":2}`) or a pmf
    /// (`{"pmf":[[0,0.5],[3,0.5]]}`).
    #[arg(long)]
    dist: Option<PathBuf>,
    /// Inline pmf, e.g. "0:0.5,3:0.5".
    #[arg(long)]
    pmf: Option<String>,
}

impl DistArgs {
    fn load(&self) -> Result<SizeDistribution> {
        match (&self.dist, &self.pmf) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let spec: DistributionSpec =
                    serde_json::from_str(&text).map_err(|source| Error::ConfigParse {
                        path: path.clone(),
                        source,
                    })?;
                spec.build()
            }
            (None, Some(text)) => parse_pmf(text),
            (None, None) => Err(Error::Config("one of --dist or --pmf is required".into())),
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SampleArgs {
    fn sample(&self) -> Result<(SizeDistribution, GraphSample)> {
        let q = self.dist.load()?;
        let g = sample_graph(GraphParams::from_beta(self.n, self.beta)?, &q, self.seed)?;
        Ok((q, g))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the branching fixed point and print the predicted giant fraction.
    Rho {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[command(flatten)]
        dist: DistArgs,
    },
    /// Sample one graph and report its largest component.
    Simulate {
        #[command(flatten)]
        sample: SampleArgs,
        /// Also write the attribute sets to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run a replicate sweep described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<ReportFormat>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Intersection probabilities and their bounds for one query, or the
    /// whole verification grid up to `k` with `--grid`.
    Hypergeom {
        #[arg(long, required_unless_present = "grid")]
        a: Option<u64>,
        #[arg(long, required_unless_present = "grid")]
        b: Option<u64>,
        #[arg(long, default_value_t = 0)]
        h: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        grid: bool,
    },
    /// Big-vertex censuses in the three exploration modes.
    Explore {
        #[command(flatten)]
        sample: SampleArgs,
        /// log, twothirds or a fixed integer.
        #[arg(long, default_value = "log")]
        omega: OmegaRule,
        /// Coloured-vertex budget as a multiple of omega; 0 disables it.
        #[arg(long, default_value_t = 3)]
        budget_factor: usize,
        /// Print the exploration record of this root instead of the census.
        #[arg(long)]
        root: Option<usize>,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        /// Per-vertex CSV of big-vertex flags.
        #[arg(long)]
        flags: Option<PathBuf>,
    },
    /// Empirical degree law against its mixed-Poisson limit.
    Degree {
        #[command(flatten)]
        sample: SampleArgs,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Full,
    Regular,
    Simple,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Regular => Mode::Regular,
            ModeArg::Simple => Mode::Simple,
        }
    }
}

fn print_json(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("json value serializes");
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn rho(beta: f64, dist: &DistArgs) -> Result<()> {
    let q = dist.load()?;
    let p = predict_giant_fraction(&q, beta)?;
    let sol = &p.solution;
    print_json(&json!({
        "theta": sol.theta,
        "extinction": sol.extinct.iter().map(|&(t, x)| json!({"t": t, "x": x})).collect::<Vec<_>>(),
        "survival": sol.survival_table().iter().map(|&(s, r)| json!({"s": s, "rho": r})).collect::<Vec<_>>(),
        "rho_tilde": p.rho_tilde,
        "q0": p.q0,
        "beta_star": p.beta_star,
        "prediction": p.fraction,
        "direct": p.direct,
        "route_gap": p.route_gap,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "converged": sol.converged,
    }));
    Ok(())
}

fn simulate(args: &SampleArgs, dump: Option<&Path>) -> Result<()> {
    let (q, g) = args.sample()?;
    if let Some(path) = dump {
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        write_dump(&g, BufWriter::new(file)).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
    }
    let c = component_census(&g);
    let pred = predict_giant_fraction(&q, args.beta)?.fraction;
    let mut sizes = c.sizes.clone();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes.truncate(5);
    print_json(&json!({
        "n": g.n(),
        "m": g.m(),
        "seed": g.seed,
        "n1": c.n1,
        "n1_frac": c.n1 as f64 / g.n() as f64,
        "pred": pred,
        "components": c.count,
        "largest": sizes,
        "max_fw": attribute_multiplicity(&g).max,
    }));
    Ok(())
}

fn experiment(
    config: &Path,
    out: Option<PathBuf>,
    format: Option<ReportFormat>,
    seed: Option<u64>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(format) = format {
        cfg.format = format;
    }
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if out.is_some() {
        cfg.output = out;
    }
    let report = run_experiment(&cfg)?;
    let summary = to_value(&report);
    match &cfg.output {
        Some(path) => {
            emit_report(&report.rows, cfg.format, path)?;
            print_json(&summary);
        }
        None => {
            let _ = std::io::stdout()
                .lock()
                .write_all(render_report(&report.rows, cfg.format).as_bytes());
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
        }
    }
    Ok(())
}

fn bound_json(r: &BoundReport) -> Value {
    let f = |x: &num_rational::BigRational| -> f64 {
        num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
    };
    json!({
        "bound": r.bound.name(),
        "quantity": r.quantity,
        "value": f(&r.value),
        "lower": r.lower.as_ref().map(f),
        "upper": f(&r.upper),
        "holds": r.holds,
        "vacuous": r.vacuous,
        "exact": {
            "value": r.value.to_string(),
            "lower": r.lower.as_ref().map(ToString::to_string),
            "upper": r.upper.to_string(),
        },
    })
}

fn hypergeom(a: Option<u64>, b: Option<u64>, h: u64, k: u64, grid: bool) -> Result<()> {
    if grid {
        let s = verify_grid(4..=k)?;
        print_json(&json!({
            "k_max": k,
            "queries": s.queries,
            "reports": s.reports,
            "vacuous": s.vacuous,
            "violations": s.violations.iter().map(|(q, bound, quantity)| json!({
                "a": q.a, "b": q.b, "h": q.h, "k": q.k,
                "bound": bound.name(), "quantity": quantity,
            })).collect::<Vec<_>>(),
        }));
        return Ok(());
    }
    let (a, b) = (a.expect("required by clap"), b.expect("required by clap"));
    let p = IntersectionProbabilities::closed_form(a, b, h, k)?;
    let prob = |x: &num_rational::BigRational| json!({"exact": x.to_string(), "value": num_traits::ToPrimitive::to_f64(x)});
    let bounds = match check_lemma1(IntersectionQuery::new(a, b, h, k)) {
        Ok(reports) => Value::Array(reports.iter().map(bound_json).collect()),
        Err(e @ Error::Precondition(_)) => json!({"skipped": e.to_string()}),
        Err(e) => return Err(e),
    };
    print_json(&json!({
        "query": {"a": a, "b": b, "h": h, "k": k},
        "p_hit": prob(&p.p_hit),
        "p_one": prob(&p.p_one),
        "p_two": prob(&p.p_two),
        "p_one_avoid": prob(&p.p_one_avoid),
        "p_one_hit": prob(&p.p_one_hit),
        "bounds": bounds,
    }));
    Ok(())
}

fn explore(
    args: &SampleArgs,
    omega: OmegaRule,
    budget_factor: usize,
    root: Option<usize>,
    mode: Mode,
    flags: Option<&Path>,
) -> Result<()> {
    let (_, g) = args.sample()?;
    let omega = omega.omega(g.n());
    let budget = (budget_factor > 0).then(|| budget_factor * omega);
    if let Some(v) = root {
        let cfg = ExplorationConfig {
            colored_budget: budget,
            ..ExplorationConfig::new(mode, omega)
        };
        let record = explore_component(&g, v, &cfg)?;
        print_json(
            &json!({"config": to_value(&cfg), "stop_rule": cfg.stop_rule(), "record": to_value(&record)}),
        );
        return Ok(());
    }
    let census = big_vertex_census(&g, omega, budget)?;
    if let Some(path) = flags {
        let io = |source| Error::Io {
            path: path.into(),
            source,
        };
        let file = File::create(path).map_err(io)?;
        census.write_flags_csv(BufWriter::new(file)).map_err(io)?;
    }
    let mut v = to_value(&census);
    v["n"] = json!(g.n());
    v["m"] = json!(g.m());
    v["seed"] = json!(g.seed);
    print_json(&v);
    Ok(())
}

fn degree(args: &SampleArgs) -> Result<()> {
    let (q, g) = args.sample()?;
    let d = degree_census(&g);
    let tv = d.tv_to_limit(&q, args.beta)?;
    let law = limit_degree_pmf(&q, args.beta, d.max_degree())?;
    print_json(&json!({
        "n": g.n(),
        "m": g.m(),
        "seed": g.seed,
        "mean": d.mean,
        "rate": law.rate,
        "tv": tv,
        "pmf": d.pmf,
        "limit_pmf": law.pmf,
    }));
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Rho { beta, dist } => rho(beta, &dist),
        Command::Simulate { sample, dump } => simulate(&sample, dump.as_deref()),
        Command::Experiment {
            config,
            out,
            format,
            seed,
        } => experiment(&config, out, format, seed),
        Command::Hypergeom { a, b, h, k, grid } => hypergeom(a, b, h, k, grid),
        Command::Explore {
            sample,
            omega,
            budget_factor,
            root,
            mode,
            flags,
        } => explore(
            &sample,
            omega,
            budget_factor,
            root,
            mode.into(),
            flags.as_deref(),
        ),
        Command::Degree { sample } => degree(&sample),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
