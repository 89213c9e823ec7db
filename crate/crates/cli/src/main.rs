//! `hyperconsensus`: generate hypergraphs, simulate, predict, check
//! assumptions, run ensembles and inspect spectra.
//!
//! Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on
//! errors.

mod config;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperconsensus::io::{read_hypergraph, read_state, write_hypergraph, write_state};
use hyperconsensus::motif::{spectrum_csv, DENSE_LIMIT};
use hyperconsensus::*;

use config::{ExperimentConfig, GraphKind, InteractionKind};

#[derive(Parser)]
#[command(name = "hyperconsensus", version, about = "Nonlinear three-body consensus on 3-uniform hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a hypergraph file.
    Generate(Options),
    /// Run the dynamics once and compare with the predictions.
    Simulate(Options),
    /// Closed-form predictions.
    Predict(Options),
    /// Check the hypergraph assumptions.
    Check(Options),
    /// Monte Carlo ensemble with concentration reports.
    Ensemble(Options),
    /// Spectrum of the motif graph and certificates.
    Spectra(Options),
}

/// Flags shared by every subcommand; each overrides the matching config key.
#[derive(Args)]
struct Options {
    /// Config file with `section.key = value` lines.
    #[arg(long)]
    config: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Seed for both the hypergraph and the initial state.
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads for the ensemble command.
    #[arg(long)]
    jobs: Option<usize>,
    /// Hypergraph kind: er, complete, torus or file.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "p-edge")]
    p_edge: Option<String>,
    /// Torus side length.
    #[arg(long = "L")]
    side: Option<String>,
    /// Torus dimension.
    #[arg(long = "d")]
    dim: Option<String>,
    /// Hypergraph file to read.
    #[arg(long)]
    input: Option<String>,
    /// exponential or power_series.
    #[arg(long)]
    interaction: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Comma-separated power series coefficients a_0, a_1, ...
    #[arg(long, allow_hyphen_values = true)]
    coefficients: Option<String>,
    #[arg(long = "p-init")]
    p_init: Option<String>,
    /// Initial state file.
    #[arg(long = "init-file")]
    init_file: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long = "t-max")]
    t_max: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    /// Constant C in epsilon.
    #[arg(long = "C")]
    c: Option<String>,
    #[arg(long = "m-max")]
    m_max: Option<String>,
    /// Relative gap accepted by simulate.
    #[arg(long)]
    acceptance: Option<String>,
    /// Anti-concentration level a.
    #[arg(long)]
    a: Option<String>,
    /// Target accuracy for the convergence-time estimate.
    #[arg(long)]
    target: Option<String>,
}

impl Options {
    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            cfg.apply_text(&text).map_err(|e| format!("{path}: {e}"))?;
        }
        let overrides: [(&str, &[&str], &Option<String>); 22] = [
            ("--out", &["output.dir"], &self.out),
            ("--seed", &["graph.seed", "init.seed"], &self.seed),
            ("--kind", &["graph.kind"], &self.kind),
            ("--n", &["graph.n"], &self.n),
            ("--p-edge", &["graph.p_edge"], &self.p_edge),
            ("--L", &["graph.side"], &self.side),
            ("--d", &["graph.dim"], &self.dim),
            ("--input", &["graph.file"], &self.input),
            ("--interaction", &["interaction.kind"], &self.interaction),
            ("--lambda", &["interaction.lambda"], &self.lambda),
            ("--coefficients", &["interaction.coefficients"], &self.coefficients),
            ("--p-init", &["init.p_init"], &self.p_init),
            ("--init-file", &["init.file"], &self.init_file),
            ("--tol", &["run.tol"], &self.tol),
            ("--t-max", &["run.t_max"], &self.t_max),
            ("--stride", &["run.stride"], &self.stride),
            ("--runs", &["run.runs"], &self.runs),
            ("--C", &["run.c"], &self.c),
            ("--m-max", &["run.m_max"], &self.m_max),
            ("--acceptance", &["run.acceptance"], &self.acceptance),
            ("--a", &["run.a"], &self.a),
            ("--target", &["run.target"], &self.target),
        ];
        for (flag, keys, value) in overrides {
            if let Some(v) = value {
                for key in keys {
                    cfg.set(key, v).map_err(|e| format!("{flag}: {e}"))?;
                }
            }
        }
        if cfg.graph_kind.is_none() && cfg.graph_file.is_some() {
            cfg.graph_kind = Some(GraphKind::File);
        }
        Ok(cfg)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn build_hypergraph(cfg: &ExperimentConfig) -> Result<Hypergraph3, Failure> {
    let need_n = || cfg.graph_n.ok_or_else(|| usage("graph.n (--n) is required for this kind"));
    match cfg.graph_kind {
        None => Err(usage("no hypergraph: set graph.kind (--kind) or graph.file (--input)")),
        Some(GraphKind::ErdosRenyi) => {
            let p = cfg.graph_p_edge.ok_or_else(|| usage("graph.p_edge (--p-edge) is required for er"))?;
            Ok(generate_erdos_renyi(need_n()?, p, cfg.graph_seed)?)
        }
        Some(GraphKind::Complete) => Ok(generate_complete(need_n()?)?),
        Some(GraphKind::Torus) => {
            let side = cfg.graph_side.ok_or_else(|| usage("graph.side (--L) is required for torus"))?;
            Ok(generate_torus(side, cfg.graph_dim)?)
        }
        Some(GraphKind::File) => {
            let path = cfg.graph_file.as_ref().ok_or_else(|| usage("graph.file (--input) is required"))?;
            let file = fs::File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let (h, dups) = read_hypergraph(std::io::BufReader::new(file))
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            if dups > 0 {
                log::warn!("{}: collapsed {dups} duplicate triples", path.display());
            }
            Ok(h)
        }
    }
}

fn interaction(cfg: &ExperimentConfig) -> Result<InteractionFunction, Failure> {
    Ok(match cfg.interaction_kind {
        InteractionKind::Exponential => InteractionFunction::exponential(cfg.lambda),
        InteractionKind::PowerSeries => {
            let a = cfg
                .coefficients
                .clone()
                .ok_or_else(|| usage("interaction.coefficients is required for power_series"))?;
            InteractionFunction::power_series(a, cfg.lambda)?
        }
    })
}

fn initial_state(cfg: &ExperimentConfig, n: usize) -> Result<StateVector, Failure> {
    match &cfg.init_file {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let x = read_state(std::io::BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            if x.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: x.len() }.into());
            }
            Ok(x)
        }
        None => Ok(rademacher_init(n, cfg.p_init, cfg.init_seed)?),
    }
}

struct Output<'a> {
    dir: &'a Path,
}

impl Output<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::write(self.dir.join(name), contents)?;
        Ok(())
    }

    /// Writes `<name>.txt` and `<name>.json` and echoes the text to stdout.
    fn report(&self, name: &str, entries: &[(String, String)]) -> Result<(), Failure> {
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        print!("{text}");
        self.write(&format!("{name}.txt"), &text)?;
        self.write(&format!("{name}.json"), &to_json(entries))
    }
}

fn to_json(entries: &[(String, String)]) -> String {
    let mut map = serde_json::Map::new();
    for (k, v) in entries {
        let value = match v.as_str() {
            "none" => serde_json::Value::Null,
            "true" => true.into(),
            "false" => false.into(),
            _ => match v.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                Some(n) if v.parse::<i64>().is_err() => serde_json::Value::Number(n),
                _ => match v.parse::<i64>() {
                    Ok(i) => i.into(),
                    Err(_) => v.clone().into(),
                },
            },
        };
        map.insert(k.clone(), value);
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("serializable");
    s.push('\n');
    s
}

fn prefixed(prefix: &str, r: &dyn Report) -> Vec<(String, String)> {
    r.entries().into_iter().map(|(k, v)| (format!("{prefix}.{k}"), v)).collect()
}

fn cmd_generate(cfg: &ExperimentConfig, out: &Output) -> Outcome {
    let h = build_hypergraph(cfg)?;
    let mut buf = Vec::new();
    write_hypergraph(&h, &mut buf)?;
    out.write("hypergraph.txt", std::str::from_utf8(&buf).expect("ascii"))?;
    out.report(
        "generate",
        &[
            ("n".into(), h.n().to_string()),
            ("hyperedges".into(), h.num_triples().to_string()),
            ("min_degree".into(), h.min_degree().to_string()),
            ("max_degree".into(), h.max_degree().to_string()),
        ],
    )?;
    Ok(true)
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Output) -> Outcome {
    let h = build_hypergraph(cfg)?;
    let g = MotifGraph::build(&h);
    let f = interaction(cfg)?;
    let x0 = initial_state(cfg, h.n())?;
    let control = RunControl { tol: cfg.tol, t_max: cfg.t_max, stride: cfg.stride, exec: Exec::default() };
    let trace = run(&h, &x0, &f, &control)?;
    out.write("trace.csv", &trace.to_csv())?;
    let mut buf = Vec::new();
    write_state(&trace.final_state, &mut buf)?;
    out.write("final_state.txt", std::str::from_utf8(&buf).expect("ascii"))?;

    let mut entries = vec![
        ("mode".to_string(), if f.is_linear() { "linear" } else { "nonlinear" }.to_string()),
        ("interaction".to_string(), f.describe()),
    ];
    entries.extend(trace.entries());
    let mut passed = trace.steps_to_converge.is_some();
    let target = cfg.target.unwrap_or(cfg.tol);
    let prediction = if x0.is_binary() { Some(predict(&h, &g, &x0, cfg.p_init, &f, target)) } else { None };
    match prediction {
        Some(Ok(p)) => {
            entries.extend(p.entries());
            let reference = p.predicted_consensus_theorem;
            let gap = if reference != 0.0 {
                ((trace.consensus_value - reference) / reference).abs()
            } else {
                (trace.consensus_value - reference).abs()
            };
            let gap_ok = gap <= cfg.acceptance;
            passed &= gap_ok;
            entries.push(("relative_gap".into(), gap.to_string()));
            entries.push(("acceptance".into(), cfg.acceptance.to_string()));
            entries.push(("gap_ok".into(), gap_ok.to_string()));
        }
        Some(Err(e)) => entries.push(("prediction".into(), format!("unavailable ({e})"))),
        None => {
            let mu = weighted_average(&g, &x0)?;
            entries.push(("mu_bar".into(), mu.to_string()));
            entries.push(("prediction".into(), "unavailable (initial state is not ±1)".into()));
        }
    }
    entries.push(("verdict".into(), if passed { "pass" } else { "fail" }.into()));
    out.report("simulate", &entries)?;
    Ok(passed)
}

fn cmd_predict(cfg: &ExperimentConfig, out: &Output) -> Outcome {
    let f = interaction(cfg)?;
    let mut entries = vec![
        ("interaction".to_string(), f.describe()),
        ("p_init".to_string(), cfg.p_init.to_string()),
        ("shift_theorem".to_string(), shift_theorem(cfg.p_init, &f)?.to_string()),
    ];
    if let Some(n) = cfg.graph_n {
        let a = (cfg.p_init * n as f64).round() as u64;
        entries.push(("mean_field.n".into(), n.to_string()));
        entries.push(("mean_field.a".into(), a.to_string()));
        entries.push(("mean_field.consensus".into(), mean_field_consensus(n as u64, a, &f)?.to_string()));
    }
    if cfg.graph_kind.is_some() {
        let h = build_hypergraph(cfg)?;
        let g = MotifGraph::build(&h);
        let x0 = initial_state(cfg, h.n())?;
        let p = predict(&h, &g, &x0, cfg.p_init, &f, cfg.target.unwrap_or(cfg.tol))?;
        entries.extend(prefixed("graph", &p));
    }
    out.report("predict", &entries)?;
    Ok(true)
}

fn cmd_check(cfg: &ExperimentConfig, out: &Output) -> Outcome {
    let h = build_hypergraph(cfg)?;
    let g = MotifGraph::build(&h);
    let r = check_assumptions(&h, &g, cfg.p_init, cfg.c, cfg.m_max)?;
    out.report("check", &r.entries())?;
    Ok(r.verdict)
}

fn cmd_ensemble(cfg: &ExperimentConfig, out: &Output, jobs: Option<usize>) -> Outcome {
    let h = build_hypergraph(cfg)?;
    let g = MotifGraph::build(&h);
    let f = interaction(cfg)?;
    let params = EnsembleParams {
        p_init: cfg.p_init,
        runs: cfg.runs,
        tol: cfg.tol,
        t_max: cfg.t_max,
        base_seed: cfg.init_seed,
        exec: Exec::default(),
    };
    let e = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| usage(format!("--jobs: {e}")))?
            .install(|| run_ensemble(&h, &f, &params))?,
        None => run_ensemble(&h, &f, &params)?,
    };
    out.write("runs.csv", &e.to_csv())?;
    let conc = concentration_report(&e, &f, &g)?;
    let mut entries = prefixed("ensemble", &e);
    entries.extend(prefixed("concentration", &conc));
    let mut passed = conc.verdict && e.failed_count == 0;
    if cfg.p_init == 0.5 {
        let a = cfg.a.unwrap_or_else(|| (h.n() as f64).powf(-0.75));
        let anti = anticoncentration_report(&e, &g, a)?;
        passed &= anti.passed;
        entries.extend(prefixed("anticoncentration", &anti));
    }
    entries.push(("verdict".into(), if passed { "pass" } else { "fail" }.into()));
    out.report("ensemble", &entries)?;
    Ok(passed)
}

fn cmd_spectra(cfg: &ExperimentConfig, out: &Output) -> Outcome {
    let h = build_hypergraph(cfg)?;
    let g = MotifGraph::build(&h);
    let s = spectral_summary(&g)?;
    let mut entries = s.entries();
    let mut passed = true;
    if h.n() <= DENSE_LIMIT {
        out.write("spectrum.csv", &spectrum_csv(&g)?)?;
        let c = spectral_comparison_certificate(&g)?;
        passed &= c.passed;
        entries.extend(prefixed("comparison", &c));
        if let (Some(GraphKind::ErdosRenyi), Some(p)) = (cfg.graph_kind, cfg.graph_p_edge) {
            let er = er_spectrum_certificate(&g, p)?;
            passed &= er.passed;
            entries.extend(prefixed("erdos_renyi", &er));
        }
    }
    entries.push(("verdict".into(), if passed { "pass" } else { "fail" }.into()));
    out.report("spectra", &entries)?;
    Ok(passed)
}

fn execute(cli: Cli) -> Outcome {
    let opts = match &cli.command {
        Command::Generate(o)
        | Command::Simulate(o)
        | Command::Predict(o)
        | Command::Check(o)
        | Command::Ensemble(o)
        | Command::Spectra(o) => o,
    };
    let cfg = opts.resolve().map_err(Failure::Usage)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let out = Output { dir: &cfg.out_dir };
    out.write("config.txt", &cfg.to_text())?;
    match &cli.command {
        Command::Generate(_) => cmd_generate(&cfg, &out),
        Command::Simulate(_) => cmd_simulate(&cfg, &out),
        Command::Predict(_) => cmd_predict(&cfg, &out),
        Command::Check(_) => cmd_check(&cfg, &out),
        Command::Ensemble(o) => cmd_ensemble(&cfg, &out, o.jobs),
        Command::Spectra(_) => cmd_spectra(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
