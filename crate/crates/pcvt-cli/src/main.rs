//! Command-line driver for the pcvt experiment harness.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use pcvt::{build_tessellation, energy, regularity, GeneratorSet, Vec2};
use pcvt_cli::config::{
    DeltaRuleSpec, DomainKind, DomainSpec, ExperimentConfig, InnerSpec, MethodSpec,
};
use pcvt_cli::export;
use pcvt_cli::render::{render_svg, RenderOptions};
use pcvt_cli::runner;

#[derive(Parser)]
#[command(
    name = "pcvt",
    version,
    about = "Periodic centroidal Voronoi tessellations: solvers, landscape probing, statistics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single experiment and write its artifacts.
    Run(RunArgs),
    /// Run a seeded batch of independent experiments.
    Batch(RunArgs),
    /// Sweep the preconditioning number K over a list of values.
    SweepK(SweepArgs),
    /// Summarize hybrid and baseline result CSVs into the comparison table.
    Stats(StatsArgs),
    /// Render a tessellation from a batch JSON document.
    Render(RenderArgs),
    /// Check whether N admits a perfect honeycomb on the hexagonal torus.
    CheckN { n: usize },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain: "square", "hex", optionally with side length ("square:2.0").
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Method: lloyd | lbfgs | plbfgs | hybrid | anneal.
    #[arg(long)]
    method: Option<String>,
    /// Quasi-Newton memory M.
    #[arg(long)]
    m: Option<usize>,
    /// Preconditioning period T.
    #[arg(long)]
    t: Option<usize>,
    /// Preconditioning number K (hybrid).
    #[arg(long)]
    k: Option<usize>,
    /// Probing number Q (hybrid).
    #[arg(long)]
    q: Option<usize>,
    /// Annealing-step rule: fixed-delta | intrinsic | random-neighbor | random-angle.
    #[arg(long)]
    rule: Option<String>,
    /// Inner optimizer of hybrid/anneal: lloyd | lbfgs:M | plbfgs:M,T.
    #[arg(long)]
    inner: Option<String>,
    /// Annealing stages.
    #[arg(long)]
    stages: Option<usize>,
    /// Annealing initial temperature.
    #[arg(long)]
    t0: Option<f64>,
    /// Annealing temperature decay per stage.
    #[arg(long)]
    decay: Option<f64>,
    /// Annealing perturbation amplitude factor.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Convergence tolerance on ||DE||/N.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory (default: $PCVT_OUT_DIR or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render the lowest-energy final tessellation to SVG.
    #[arg(long)]
    render: bool,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Output file stem (default derived from method, n and seed).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated K values, e.g. "2000,4000,6000,8000".
    #[arg(long, required = true)]
    ks: String,
}

#[derive(Args)]
struct StatsArgs {
    /// Hybrid batch CSV (per-stage rows).
    #[arg(long, required = true)]
    hybrid: PathBuf,
    /// Baseline CSVs as name=path; repeatable.
    #[arg(long = "baseline", required = true)]
    baselines: Vec<String>,
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    /// Write the summary as JSON here as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Batch JSON document.
    #[arg(long, required = true)]
    input: PathBuf,
    /// Run index to render (default: the lowest-energy run).
    #[arg(long)]
    run: Option<usize>,
    #[arg(long, required = true)]
    output: PathBuf,
    #[arg(long)]
    color_min: Option<f64>,
    #[arg(long)]
    color_max: Option<f64>,
}

fn parse_domain(text: &str) -> anyhow::Result<DomainSpec> {
    let (kind, size) = match text.split_once(':') {
        Some((k, s)) => (k, Some(s.parse::<f64>().context("domain size")?)),
        None => (text, None),
    };
    let kind = match kind {
        "square" => DomainKind::Square,
        "hex" | "hexagonal" => DomainKind::Hexagonal,
        other => bail!("unknown domain kind '{other}'"),
    };
    Ok(DomainSpec { kind, size })
}

fn parse_inner(text: &str) -> anyhow::Result<InnerSpec> {
    if text == "lloyd" {
        return Ok(InnerSpec::Lloyd);
    }
    if let Some(m) = text.strip_prefix("lbfgs:") {
        return Ok(InnerSpec::Lbfgs { m: m.parse()? });
    }
    if let Some(mt) = text.strip_prefix("plbfgs:") {
        let (m, t) = mt.split_once(',').context("plbfgs:M,T")?;
        return Ok(InnerSpec::Plbfgs {
            m: m.parse()?,
            t: t.parse()?,
        });
    }
    bail!("unknown inner optimizer '{text}'")
}

fn parse_rule(text: &str) -> anyhow::Result<DeltaRuleSpec> {
    Ok(match text {
        "fixed-delta" | "fixed_delta" | "delta" => DeltaRuleSpec::FixedDelta,
        "intrinsic" | "intrinsic-length-scale" => DeltaRuleSpec::IntrinsicLengthScale,
        "random-neighbor" | "random_neighbor" => DeltaRuleSpec::RandomNeighbor,
        "random-angle" | "random_angle" => DeltaRuleSpec::RandomAngle,
        other => bail!("unknown delta rule '{other}'"),
    })
}

fn build_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)
            .with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig {
            domain: DomainSpec {
                kind: DomainKind::Square,
                size: None,
            },
            n: 0,
            method: MethodSpec::Lloyd,
            runs: 1,
            master_seed: 0,
            tol: None,
            out_dir: None,
            render: false,
            epsilon: 0.005,
            threads: None,
            max_iterations: 1_000_000,
        },
    };

    if let Some(d) = &args.domain {
        cfg.domain = parse_domain(d)?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(method) = &args.method {
        cfg.method = match method.as_str() {
            "lloyd" => MethodSpec::Lloyd,
            "lbfgs" => MethodSpec::Lbfgs {
                m: args.m.unwrap_or(7),
            },
            "plbfgs" => MethodSpec::Plbfgs {
                m: args.m.unwrap_or(20),
                t: args.t.unwrap_or(20),
            },
            "hybrid" => MethodSpec::Hybrid {
                k: args.k.context("hybrid requires --k")?,
                q: args.q.context("hybrid requires --q")?,
                rule: args
                    .rule
                    .as_deref()
                    .map(parse_rule)
                    .transpose()?
                    .unwrap_or(DeltaRuleSpec::FixedDelta),
                inner: args
                    .inner
                    .as_deref()
                    .map(parse_inner)
                    .transpose()?
                    .unwrap_or(InnerSpec::Lloyd),
            },
            "anneal" => MethodSpec::Anneal {
                stages: args.stages.context("anneal requires --stages")?,
                t0: args.t0.context("anneal requires --t0")?,
                decay: args.decay.unwrap_or(0.9),
                amplitude: args.amplitude.unwrap_or(0.5),
                inner: args
                    .inner
                    .as_deref()
                    .map(parse_inner)
                    .transpose()?
                    .unwrap_or(InnerSpec::Lbfgs { m: 7 }),
            },
            other => bail!("unknown method '{other}'"),
        };
    } else {
        // Method-shape tweaks on top of a config file.
        if let MethodSpec::Hybrid { k, q, .. } = &mut cfg.method {
            if let Some(nk) = args.k {
                *k = nk;
            }
            if let Some(nq) = args.q {
                *q = nq;
            }
        }
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.tol = Some(tol);
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    if args.render {
        cfg.render = true;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    if let Some(mi) = args.max_iterations {
        cfg.max_iterations = mi;
    }
    if cfg.n == 0 {
        bail!("the number of generators must be set (--n or config file)");
    }
    Ok(cfg)
}

fn stem(cfg: &ExperimentConfig, name: &Option<String>) -> String {
    name.clone().unwrap_or_else(|| {
        let method = cfg
            .method
            .label()
            .replace(['(', ',', '='], "_")
            .replace(')', "");
        format!("{}_n{}_s{}", method, cfg.n, cfg.master_seed)
    })
}

fn cmd_batch(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = build_config(args)?;
    if let Some(w) = cfg.admissibility_warning() {
        eprintln!("warning: {w}");
    }
    let out_dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let stem = stem(&cfg, &args.name);

    let total = cfg.runs;
    let records = runner::run_batch_with(&cfg, |rec| {
        let best = rec.best_e_minus_1();
        eprintln!(
            "run {}/{total}: best E-1 = {best:.6e}{}",
            rec.run + 1,
            rec.error.as_deref().map(|e| format!(" [failed: {e}]")).unwrap_or_default()
        );
    })?;

    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));
    export::write_csv_file(&csv_path, &records)?;
    export::write_json_file(&json_path, &cfg, &records)?;
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());

    if cfg.render {
        if let Some(best) = records
            .iter()
            .filter(|r| r.error.is_none())
            .min_by(|a, b| a.best_e_minus_1().partial_cmp(&b.best_e_minus_1()).unwrap())
        {
            let svg_path = out_dir.join(format!("{stem}.svg"));
            render_record(&cfg, best, None, None, &svg_path)?;
            eprintln!("wrote {}", svg_path.display());
        }
    }

    let ok = records.iter().filter(|r| r.error.is_none()).count();
    let best = records
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| r.best_e_minus_1())
        .fold(f64::INFINITY, f64::min);
    println!("{ok}/{total} runs complete; best E-1 = {best:.6e}");
    Ok(())
}

fn render_record(
    cfg: &ExperimentConfig,
    rec: &runner::ResultRecord,
    color_min: Option<f64>,
    color_max: Option<f64>,
    path: &std::path::Path,
) -> anyhow::Result<()> {
    let domain = cfg.domain.build()?;
    let gens = GeneratorSet::new(
        &domain,
        rec.positions.iter().map(|&(x, y)| Vec2::new(x, y)).collect(),
    )?;
    let tess = build_tessellation(&domain, &gens)?;
    let rep = energy(&domain, &gens, &tess);
    let reg = regularity(&tess, cfg.epsilon);
    let opts = RenderOptions {
        color_range: match (color_min, color_max) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        },
        ..Default::default()
    };
    render_svg(&domain, &tess, &rep, &reg, &opts, path)?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let cfg = build_config(&args.run)?;
    let ks: Vec<usize> = args
        .ks
        .split(',')
        .map(|s| s.trim().parse::<usize>().context("K value"))
        .collect::<anyhow::Result<_>>()?;
    let points = runner::sweep_k(&cfg, &ks)?;
    let out_dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let path = out_dir.join(format!("{}_sweepk.csv", stem(&cfg, &args.run.name)));
    export::write_sweep_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), &points)?;
    eprintln!("wrote {}", path.display());
    for p in &points {
        println!(
            "k={} stage={} mean(E-1)={:.6e} min(E-1)={:.6e}",
            p.k, p.stage, p.mean_e_minus_1, p.min_e_minus_1
        );
    }
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> anyhow::Result<()> {
    let hybrid_rows = export::read_csv_file(&args.hybrid)?;
    let hybrid = export::stage_samples(&hybrid_rows);
    let mut baselines = Vec::new();
    for spec in &args.baselines {
        let (name, path) = spec
            .split_once('=')
            .context("baseline must be name=path.csv")?;
        let rows = export::read_csv_file(std::path::Path::new(path))?;
        baselines.push((name.to_string(), export::flat_samples(&rows)));
    }
    let summary = pcvt::summarize(&hybrid, &baselines, args.epsilon)?;

    println!(
        "E_min-1 = {:.6e}   E_ref-1 = {:.6e}   tau = {:.6e}",
        summary.e_min_minus_1, summary.e_ref_minus_1, summary.tau
    );
    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8}",
        "column", "<E-1>", "sigma", "min", "max", "f*_E", "1-f*_R", "1-f*_H"
    );
    for (q, c) in summary.hybrid_stages.iter().enumerate() {
        println!(
            "{:<10} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>8.3} {:>8.3} {:>8.3}",
            format!("stage {q}"),
            c.e_minus_1.mean,
            c.e_minus_1.std,
            c.e_minus_1.min,
            c.e_minus_1.max,
            c.e_minus_1.f_star,
            c.r_eps.f_star,
            c.h.f_star
        );
    }
    for (name, c) in &summary.baselines {
        println!(
            "{:<10} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>8} {:>8} {:>8}",
            name, c.e_minus_1.mean, c.e_minus_1.std, c.e_minus_1.min, c.e_minus_1.max, "-", "-", "-"
        );
    }
    if let Some(out) = &args.out {
        let doc = serde_json::json!({
            "e_min_minus_1": summary.e_min_minus_1,
            "e_ref_minus_1": summary.e_ref_minus_1,
            "tau": summary.tau,
            "epsilon": summary.epsilon,
            "stages": summary.hybrid_stages.iter().map(|c| serde_json::json!({
                "mean_e_minus_1": c.e_minus_1.mean,
                "std_e_minus_1": c.e_minus_1.std,
                "min_e_minus_1": c.e_minus_1.min,
                "max_e_minus_1": c.e_minus_1.max,
                "f_star_e": c.e_minus_1.f_star,
                "f_star_r_eps": c.r_eps.f_star,
                "f_star_h": c.h.f_star,
                "rho": c.rho,
            })).collect::<Vec<_>>(),
        });
        std::fs::write(out, serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> anyhow::Result<()> {
    let doc = export::read_json_file(&args.input)?;
    let rec = match args.run {
        Some(idx) => doc
            .records
            .iter()
            .find(|r| r.run == idx)
            .context("run index not in document")?,
        None => doc
            .records
            .iter()
            .filter(|r| r.error.is_none())
            .min_by(|a, b| a.best_e_minus_1().partial_cmp(&b.best_e_minus_1()).unwrap())
            .context("document has no successful runs")?,
    };
    render_record(&doc.config, rec, args.color_min, args.color_max, &args.output)?;
    eprintln!("wrote {}", args.output.display());
    Ok(())
}

fn cmd_check_n(n: usize) -> anyhow::Result<()> {
    let check = pcvt_cli::admissible_hex_n(n);
    let doc = serde_json::json!({
        "n": n,
        "admissible": check.admissible,
        "decomposition": check.decomposition.map(|(a, b)| vec![a, b]),
        "nearest_below": check.nearest_below,
        "nearest_above": check.nearest_above,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(args) => {
            let mut args = args.clone();
            args.runs = Some(args.runs.unwrap_or(1));
            cmd_batch(&args)
        }
        Cmd::Batch(args) => cmd_batch(args),
        Cmd::SweepK(args) => cmd_sweep(args),
        Cmd::Stats(args) => cmd_stats(args),
        Cmd::Render(args) => cmd_render(args),
        Cmd::CheckN { n } => cmd_check_n(*n),
    };
    if let Err(e) = result {
        eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
        std::process::exit(1);
    }
}
