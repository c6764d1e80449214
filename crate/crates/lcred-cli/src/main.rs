use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcred::lc::DEFAULT_OPT_BUDGET;
use lcred::pipeline::{
    self, Artifact, Check, PipelineSpec, Report, SampledIkw, Solution, Stage, DEFAULT_NODE_BUDGET,
};
use lcred::{gen, rng, suites, Error, TwoCspInstance};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lcred", version, about = "Label cover reductions, recovery maps and sensitivity checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Master seed for subcommands that need one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enumeration budget for exhaustive oracles.
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Directory for artifacts, keyed by content hash.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// `key = value` file supplying defaults for the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a planted 2-CSP or label cover instance.
    Gen {
        #[arg(long, value_enum, default_value = "csp")]
        what: What,
        /// Base graph for CSPs: triangle, prism, k33, cycle:N, complete:N.
        #[arg(long, default_value = "triangle")]
        base: String,
        #[arg(long, default_value_t = 2)]
        sigma: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        /// Label cover shape: n_left,n_right,sigma_left,sigma_right,edges.
        #[arg(long, default_value = "3,3,3,2,6")]
        shape: String,
    },
    /// Apply transform stages to an instance.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// One stage as JSON, e.g. '{"stage":"dr","d":4,"seed":1}'; repeatable.
        #[arg(long, required = true)]
        stage: Vec<String>,
    },
    /// Pull a solution of a transformed instance back to the source.
    Recover {
        /// Source instance the transform was applied to.
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        stage: String,
        /// Solution of the transformed instance.
        #[arg(long)]
        solution: PathBuf,
    },
    /// Exact objective of a solution.
    Value {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Exact optimum by exhaustive search or branch and bound.
    Opt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Exact swap sensitivity of the built-in oracle over random swaps.
    Sens {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        swaps: usize,
    },
    /// Run shipped verification suites.
    Verify {
        suites: Vec<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        list: bool,
    },
    /// Run a JSON pipeline spec, or the built-in end-to-end demo.
    Pipeline {
        spec: Option<PathBuf>,
        #[arg(long)]
        demo: bool,
    },
    /// Build the parallel-repetition label cover of a base 2-CSP.
    Ikw {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        kprime: usize,
        /// exhaustive or sampled:M
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value = "1/4")]
        epsilon: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Csp,
    LabelCover,
}

struct Settings {
    seed: u64,
    budget: u128,
    out_dir: Option<PathBuf>,
    format: Format,
    node_budget: u64,
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = settings(&cli.global).and_then(|s| run(cli.cmd, &s));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(2),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn settings(g: &Global) -> std::result::Result<Settings, Failure> {
    let cfg = match &g.config {
        Some(p) => pipeline::parse_config(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    for k in cfg.keys() {
        if !["seed", "budget", "node_budget", "out_dir", "format"].contains(&k.as_str()) {
            return Err(Failure::Usage(format!("unknown config key {k}")));
        }
    }
    fn num<T: std::str::FromStr>(cfg: &BTreeMap<String, String>, k: &str) -> std::result::Result<Option<T>, Failure> {
        cfg.get(k)
            .map(|v| v.parse().map_err(|_| Failure::Usage(format!("config {k}: not a number: {v}"))))
            .transpose()
    }
    let format = match (g.format, cfg.get("format").map(String::as_str)) {
        (Some(f), _) => f,
        (None, Some("json")) => Format::Json,
        (None, Some("text") | None) => Format::Text,
        (None, Some(other)) => return Err(Failure::Usage(format!("config format: {other}"))),
    };
    Ok(Settings {
        seed: g.seed.or(num(&cfg, "seed")?).unwrap_or(0),
        budget: g.budget.or(num(&cfg, "budget")?).unwrap_or(DEFAULT_OPT_BUDGET),
        out_dir: g.out_dir.clone().or_else(|| cfg.get("out_dir").map(PathBuf::from)),
        format,
        node_budget: num(&cfg, "node_budget")?.unwrap_or(DEFAULT_NODE_BUDGET),
    })
}

fn run(cmd: Cmd, s: &Settings) -> Outcome {
    match cmd {
        Cmd::Gen { what, base, sigma, density, shape } => {
            let mut r = rng::stream(s.seed, rng::task::GENERATOR);
            let (art, sol) = match what {
                What::Csp => {
                    let (n, edges) = pipeline::parse_base(&base)?;
                    let (csp, planted) = gen::planted_csp(n, &edges, sigma, density, &mut r);
                    (Artifact::TwoCsp(csp), Solution::Labels(planted))
                }
                What::LabelCover => {
                    let p: Vec<usize> = shape
                        .split(',')
                        .map(|x| x.trim().parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Failure::Usage(format!("bad shape {shape}")))?;
                    let [nl, nr, sl, sr, ne] = p[..] else {
                        return Err(Failure::Usage("shape needs five numbers".into()));
                    };
                    if nl == 0 || nr == 0 || sl == 0 || sr == 0 {
                        return Err(Failure::Usage("shape entries must be positive".into()));
                    }
                    let (inst, pi) = gen::planted_label_cover(nl, nr, sl, sr, ne, density, &mut r);
                    (Artifact::LabelCover(inst), Solution::Assignment(pi))
                }
            };
            let hash = art.hash();
            let paths = persist(s, &art, Some(&sol))?;
            emit(s, json!({"hash": hash, "kind": art.kind(), "stats": art.stats(), "files": paths, "instance": art, "planted": sol}), |v| {
                format!("{} {}\n{}", lcred::hash::short(&hash), kind_name(&v["kind"]), stats_text(&art.stats()))
                    + &files_text(&v["files"])
            })
        }
        Cmd::Transform { input, stage } => {
            let art = read_artifact(&input)?;
            let stages = stage.iter().map(|x| parse_stage(x)).collect::<std::result::Result<Vec<_>, _>>()?;
            let spec = PipelineSpec { stages, budget: Some(s.budget), node_budget: Some(s.node_budget), freeze: BTreeMap::new() };
            let report = pipeline::run_pipeline_from(&spec, Some(art), s.out_dir.as_deref())?;
            report_out(s, &report)
        }
        Cmd::Recover { source, stage, solution } => {
            let art = read_artifact(&source)?;
            let stage = parse_stage(&stage)?;
            let target: Solution = serde_json::from_str(&std::fs::read_to_string(&solution)?)?;
            let (sol, rep) = pipeline::recover_one(&stage, &art, target, s.seed, s.budget)?;
            let ok = rep.checks.iter().all(|c| c.holds);
            emit(s, json!({"solution": sol, "checks": rep.checks, "measurements": rep.measurements}), |_| {
                let mut t = checks_text(&rep.checks);
                for (k, v) in &rep.measurements {
                    t.push_str(&format!("{k}: {v}\n"));
                }
                t + &format!("solution: {}", serde_json::to_string(&sol).unwrap_or_default())
            })?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Cmd::Value { input, solution } => {
            let art = read_artifact(&input)?;
            let sol: Solution = serde_json::from_str(&std::fs::read_to_string(&solution)?)?;
            let v = pipeline::evaluate(&art, &sol)?;
            emit(s, json!(v), |_| stats_text(&v))
        }
        Cmd::Opt { input, node_budget } => {
            let art = read_artifact(&input)?;
            let (v, sol) = pipeline::optimum(&art, s.budget, node_budget.unwrap_or(s.node_budget))?;
            emit(s, json!({"optimum": v, "solution": sol}), |_| {
                let mut t = stats_text(&v);
                if let Some(sol) = &sol {
                    t.push_str(&format!("solution: {}", serde_json::to_string(sol).unwrap_or_default()));
                }
                t
            })
        }
        Cmd::Sens { input, swaps } => {
            let art = read_artifact(&input)?;
            let spec = PipelineSpec {
                stages: vec![Stage::Sens { swaps, seed: s.seed }],
                budget: Some(s.budget),
                node_budget: Some(s.node_budget),
                freeze: BTreeMap::new(),
            };
            let report = pipeline::run_pipeline_from(&spec, Some(art), None)?;
            report_out(s, &report)
        }
        Cmd::Verify { suites: names, all, list } => {
            if list {
                return emit(s, json!(suites::SUITES), |_| suites::SUITES.join("\n"));
            }
            let names: Vec<String> = if all { suites::SUITES.iter().map(|x| x.to_string()).collect() } else { names };
            if names.is_empty() {
                return Err(Failure::Usage("name a suite, or pass --all or --list".into()));
            }
            let reports = names.iter().map(|n| suites::verify_suite(n)).collect::<lcred::Result<Vec<_>>>()?;
            let ok = reports.iter().all(|r| r.passed);
            emit(s, json!(reports), |_| {
                reports
                    .iter()
                    .map(|r| {
                        let failed = r.checks.iter().filter(|c| !c.holds).count();
                        let head = format!("{} {}: {} checks, {} failed\n", mark(r.passed), r.suite, r.checks.len(), failed);
                        head + &checks_text(&r.checks.iter().filter(|c| !c.holds).cloned().collect::<Vec<_>>())
                    })
                    .collect::<String>()
            })?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Cmd::Pipeline { spec, demo } => {
            let spec = match (spec, demo) {
                (None, true) => pipeline::demo_spec(s.seed),
                (Some(p), false) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                _ => return Err(Failure::Usage("give a spec file or --demo".into())),
            };
            let cache = s.out_dir.clone().unwrap_or_else(|| PathBuf::from(".cache"));
            let report = pipeline::run_pipeline(&spec, Some(&cache))?;
            report_out(s, &report)
        }
        Cmd::Ikw { base, k, kprime, mode, epsilon } => {
            let text = std::fs::read_to_string(&base)?;
            let csp = match serde_json::from_str::<Artifact>(&text) {
                Ok(Artifact::TwoCsp(c)) => c,
                Ok(other) => return Err(Failure::Usage(format!("base is a {:?}, not a 2-CSP", other.kind()))),
                Err(_) => serde_json::from_str::<TwoCspInstance>(&text)?,
            };
            let sampled = match mode.as_str() {
                "exhaustive" => None,
                m => {
                    let draws = m
                        .strip_prefix("sampled:")
                        .and_then(|x| x.parse().ok())
                        .ok_or_else(|| Failure::Usage(format!("mode must be exhaustive or sampled:M, got {m}")))?;
                    Some(SampledIkw { draws, seed: s.seed })
                }
            };
            let spec = PipelineSpec {
                stages: vec![Stage::Ikw { k, k_prime: kprime, epsilon, sampled }],
                budget: Some(s.budget),
                node_budget: None,
                freeze: BTreeMap::new(),
            };
            let report = pipeline::run_pipeline_from(&spec, Some(Artifact::TwoCsp(csp)), s.out_dir.as_deref())?;
            report_out(s, &report)
        }
    }
}

fn parse_stage(text: &str) -> std::result::Result<Stage, Failure> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).map_err(|e| Failure::Usage(format!("stage {text}: {e}")))
}

fn read_artifact(path: &Path) -> std::result::Result<Artifact, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes the artifact (and an accompanying solution) under the output
/// directory, returning the written paths.
fn persist(s: &Settings, art: &Artifact, sol: Option<&Solution>) -> std::result::Result<Vec<String>, Failure> {
    let Some(dir) = &s.out_dir else { return Ok(Vec::new()) };
    std::fs::create_dir_all(dir)?;
    let hash = art.hash();
    let mut out = Vec::new();
    let p = dir.join(format!("{hash}.json"));
    std::fs::write(&p, serde_json::to_vec(art)?)?;
    out.push(p.display().to_string());
    if let Some(sol) = sol {
        let p = dir.join(format!("{hash}.solution.json"));
        std::fs::write(&p, serde_json::to_vec(sol)?)?;
        out.push(p.display().to_string());
    }
    Ok(out)
}

fn report_out(s: &Settings, report: &Report) -> Outcome {
    emit(s, serde_json::to_value(report)?, |_| report.to_text())?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn emit(s: &Settings, v: Value, text: impl FnOnce(&Value) -> String) -> Outcome {
    let body = match s.format {
        Format::Json => serde_json::to_string_pretty(&v)?,
        Format::Text => text(&v).trim_end().to_string(),
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    match writeln!(std::io::stdout().lock(), "{body}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok  "
    } else {
        "FAIL"
    }
}

fn checks_text(checks: &[Check]) -> String {
    checks.iter().map(|c| format!("    {} {}: {} {} {}\n", mark(c.holds), c.name, c.lhs, c.op, c.rhs)).collect()
}

fn stats_text(m: &BTreeMap<String, Value>) -> String {
    m.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

fn files_text(v: &Value) -> String {
    v.as_array().into_iter().flatten().filter_map(Value::as_str).map(|p| format!("wrote {p}\n")).collect()
}

fn kind_name(v: &Value) -> &str {
    v.as_str().unwrap_or("?")
}
