use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pmseq_core::density::{self, DensityProfile, DensityVerdict};
use pmseq_core::distfn::DEFAULT_TOL;
use pmseq_core::harness::{self, DEFAULT_EPS, DEFAULT_HORIZON};
use pmseq_core::{
    levy_distance, Analyzer, LambdaSeq, PMSpace, PlantSpec, SetDescription, StepDistFn, SuiteConfig, SymbolicSequence,
    TNorm, TriangleFn,
};

#[derive(Parser)]
#[command(name = "pmseq", version, about = "Strong λ-statistical convergence in finite PM spaces")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the Menger axioms of a space by enumerating all triples.
    CheckSpace { space: PathBuf },
    /// Modified Lévy distance between two step distribution functions.
    Dl {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Apply the triangle function of a t-norm.
    Tau {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value = "min")]
        tnorm: TNorm,
    },
    /// λ-density and null verdict of a set description.
    Density {
        set: PathBuf,
        #[command(flatten)]
        params: Params,
        /// Write the top-decade density profile as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Build a planted sequence from a plant spec.
    Generate {
        spec: PathBuf,
        #[arg(long, env = "PMSEQ_SEED")]
        seed: Option<u64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite.
    Verify {
        /// `all` or a comma-separated list of property ids.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "PMSEQ_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Directory for report.json and witness files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Replace the first menger-axioms instance by a broken space.
        #[arg(long)]
        corrupt_axioms: bool,
    },
}

#[derive(Subcommand)]
enum Analyze {
    Converge {
        seq: PathBuf,
        #[command(flatten)]
        params: Params,
        /// Candidate limit; searched for when omitted.
        #[arg(long)]
        candidate: Option<String>,
    },
    Cauchy {
        seq: PathBuf,
        #[command(flatten)]
        params: Params,
    },
    Points {
        seq: PathBuf,
        #[command(flatten)]
        params: Params,
    },
    #[command(name = "extract-G")]
    ExtractG {
        seq: PathBuf,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        candidate: String,
    },
}

#[derive(Args)]
struct Params {
    #[arg(long, default_value = "identity")]
    lambda: LambdaSeq,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: u64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

/// What a command hands back: a JSON value, its table rendering and
/// whether the checked property held.
struct Output {
    json: Value,
    table: String,
    ok: bool,
}

impl Output {
    fn of<T: Serialize>(v: &T, table: String) -> Result<Self> {
        Ok(Output { json: serde_json::to_value(v)?, table, ok: true })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_seq(path: &Path) -> Result<SymbolicSequence> {
    Ok(SymbolicSequence::from_json(&read(path)?, path.parent())?)
}

fn analyzer(seq: &Path, p: &Params) -> Result<Analyzer> {
    Ok(Analyzer::new(&read_seq(seq)?, &p.lambda, p.horizon, p.eps)?)
}

fn kv_table(v: &Value) -> String {
    match v {
        Value::Object(m) => m
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k:<20} {s}\n"),
                Value::Array(a) if a.len() > 8 => format!("{k:<20} [{} entries]\n", a.len()),
                other => format!("{k:<20} {other}\n"),
            })
            .collect(),
        other => format!("{other}\n"),
    }
}

fn run(cli: Cli) -> Result<Output> {
    match cli.cmd {
        Cmd::CheckSpace { space } => {
            let s = PMSpace::from_json(&read(&space)?)?;
            let report = s.verify_axioms()?;
            let mut json = serde_json::to_value(&report)?;
            if report.passed {
                json["t_star"] = json!(s.t_star());
            }
            let table = kv_table(&json);
            Ok(Output { json, table, ok: report.passed })
        }
        Cmd::Dl { f, g, tol } => {
            let f: StepDistFn = read_json(&f)?;
            let g: StepDistFn = read_json(&g)?;
            let d = levy_distance(&f, &g, tol)?;
            Output::of(&d, format!("{}\n", d.value))
        }
        Cmd::Tau { f, g, tnorm } => {
            let f: StepDistFn = read_json(&f)?;
            let g: StepDistFn = read_json(&g)?;
            let h = TriangleFn::new(tnorm).apply(&f, &g)?;
            let table = h.jumps().iter().map(|(a, v)| format!("{a:>12}  {v}\n")).collect();
            Output::of(&h, table)
        }
        Cmd::Density { set, params, csv } => {
            let m: SetDescription = read_json(&set)?;
            density::check_horizon(params.horizon)?;
            density::validate_lambda(&params.lambda, params.horizon)?;
            let value = density::exact_density(&m, &params.lambda, params.horizon);
            let verdict = density::decide_null(&m, &params.lambda, params.horizon, params.eps)?;
            if let Some(path) = csv {
                let profile = DensityProfile::new(&m, &params.lambda, params.horizon);
                let start = profile.top_decade_start();
                let rows: Vec<_> = (start..=params.horizon).map(|n| profile.checkpoint(n)).collect();
                let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                density::write_csv(std::io::BufWriter::new(file), &rows)?;
            }
            let mut table = format!("set      {m}\nlambda   {}\n", params.lambda.name());
            match &value {
                DensityVerdict::Exact { value } => table.push_str(&format!("density  {value} (exact)\n")),
                DensityVerdict::Empirical { liminf, limsup, .. } => {
                    table.push_str(&format!("density  [{liminf:.6}, {limsup:.6}] (empirical)\n"))
                }
            }
            table.push_str(&format!("null     {:?}\n", verdict.class));
            Output::of(&json!({ "set": m, "lambda": params.lambda, "density": value, "null": verdict }), table)
        }
        Cmd::Analyze { what } => analyze(what),
        Cmd::Generate { spec, seed, out } => {
            let mut spec: PlantSpec = read_json(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let seq = harness::generate(&spec)?;
            let json = seq.to_json_value();
            if let Some(path) = out {
                fs::write(&path, serde_json::to_string_pretty(&json)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let table = (1..=20).map(|k| seq.term_label(k)).collect::<Vec<_>>().join(" ") + " ...\n";
            Ok(Output { json, table, ok: true })
        }
        Cmd::Verify { suite, config, seed, instances, horizon, eps, out_dir, corrupt_axioms } => {
            let mut cfg: SuiteConfig = match &config {
                Some(p) => read_json(p)?,
                None => SuiteConfig::default(),
            };
            if let Some(s) = suite {
                cfg.properties = s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = instances {
                cfg.instances = n;
                cfg.overrides = BTreeMap::new();
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if let Some(e) = eps {
                cfg.eps = e;
            }
            cfg.corrupt_axioms |= corrupt_axioms;
            density::check_horizon(cfg.horizon)?;
            density::check_eps(cfg.eps)?;
            let report = harness::run_suite(&cfg, out_dir.as_deref())?;
            if let Some(dir) = &out_dir {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            }
            let mut out = Output::of(&report, report.table())?;
            out.ok = report.pass;
            Ok(out)
        }
    }
}

fn analyze(what: Analyze) -> Result<Output> {
    match what {
        Analyze::Converge { seq, params, candidate } => {
            let an = analyzer(&seq, &params)?;
            match candidate {
                Some(c) => {
                    let r = an.check_convergence(&c)?;
                    let table = format!("candidate {}  verdict {:?}\n", r.candidate, r.verdict)
                        + &r.per_t
                            .iter()
                            .map(|s| format!("  t={:<10} null={:?}\n", s.t.to_string(), s.null.class))
                            .collect::<String>();
                    Output::of(&r, table)
                }
                None => {
                    let limit = an.find_limit()?;
                    let table = format!("limit {}\n", limit.as_deref().unwrap_or("none"));
                    Output::of(&json!({ "limit": limit }), table)
                }
            }
        }
        Analyze::Cauchy { seq, params } => {
            let r = analyzer(&seq, &params)?.check_cauchy()?;
            Output::of(&r, format!("cauchy {}\n", r.cauchy))
        }
        Analyze::Points { seq, params } => {
            let r = analyzer(&seq, &params)?.point_sets()?;
            let list = |s: &std::collections::BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
            let table = format!(
                "strong limit points       {}\nstatistical limit points  {}\nstatistical cluster points {}\n",
                list(&r.strong_limit_points),
                list(&r.stat_limit_points),
                list(&r.stat_cluster_points)
            );
            Output::of(&r, table)
        }
        Analyze::ExtractG { seq, params, candidate } => {
            let r = analyzer(&seq, &params)?.extract_full_density_subsequence(&candidate)?;
            let table = format!(
                "converges {}  t_max {}  min ratio from 1e4 {}\n",
                r.converges,
                r.t_max,
                r.min_ratio_from_1e4.map_or("-".into(), |m| format!("{m:.6}"))
            );
            Output::of(&r, table)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable")),
                Format::Table => print!("{}", out.table),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
