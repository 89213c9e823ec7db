//! Experiment configuration: `section.key = value` lines, `#` comments.

use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    ErdosRenyi,
    Complete,
    Torus,
    File,
}

impl GraphKind {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "er" => Ok(GraphKind::ErdosRenyi),
            "complete" => Ok(GraphKind::Complete),
            "torus" => Ok(GraphKind::Torus),
            "file" => Ok(GraphKind::File),
            _ => Err(format!("unknown graph kind {s:?} (expected er, complete, torus or file)")),
        }
    }

    fn name(self) -> &'static str {
        match self {
            GraphKind::ErdosRenyi => "er",
            GraphKind::Complete => "complete",
            GraphKind::Torus => "torus",
            GraphKind::File => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionKind {
    Exponential,
    PowerSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph_kind: Option<GraphKind>,
    pub graph_n: Option<usize>,
    pub graph_p_edge: Option<f64>,
    pub graph_side: Option<usize>,
    pub graph_dim: usize,
    pub graph_seed: u64,
    pub graph_file: Option<PathBuf>,
    pub interaction_kind: InteractionKind,
    pub lambda: f64,
    pub coefficients: Option<Vec<f64>>,
    pub p_init: f64,
    pub init_seed: u64,
    pub init_file: Option<PathBuf>,
    pub tol: f64,
    pub t_max: u64,
    pub stride: Option<u64>,
    pub runs: u64,
    pub c: f64,
    pub m_max: u32,
    pub acceptance: f64,
    pub a: Option<f64>,
    pub target: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph_kind: None,
            graph_n: None,
            graph_p_edge: None,
            graph_side: None,
            graph_dim: 1,
            graph_seed: 0,
            graph_file: None,
            interaction_kind: InteractionKind::Exponential,
            lambda: 0.0,
            coefficients: None,
            p_init: 0.5,
            init_seed: 0,
            init_file: None,
            tol: 1e-9,
            t_max: 10_000,
            stride: None,
            runs: 50,
            c: hyperconsensus::DEFAULT_C,
            m_max: 100,
            acceptance: 0.1,
            a: None,
            target: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?} as a number"))
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| num(s.trim())).collect()
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "graph.kind" => self.graph_kind = Some(GraphKind::parse(v)?),
            "graph.n" => self.graph_n = Some(num(v)?),
            "graph.p_edge" => self.graph_p_edge = Some(num(v)?),
            "graph.side" => self.graph_side = Some(num(v)?),
            "graph.dim" => self.graph_dim = num(v)?,
            "graph.seed" => self.graph_seed = num(v)?,
            "graph.file" => self.graph_file = Some(PathBuf::from(v)),
            "interaction.kind" => {
                self.interaction_kind = match v {
                    "exponential" => InteractionKind::Exponential,
                    "power_series" => InteractionKind::PowerSeries,
                    _ => return Err(format!("unknown interaction kind {v:?} (expected exponential or power_series)")),
                }
            }
            "interaction.lambda" => self.lambda = num(v)?,
            "interaction.coefficients" => self.coefficients = Some(list(v)?),
            "init.p_init" => self.p_init = num(v)?,
            "init.seed" => self.init_seed = num(v)?,
            "init.file" => self.init_file = Some(PathBuf::from(v)),
            "run.tol" => self.tol = num(v)?,
            "run.t_max" => self.t_max = num(v)?,
            "run.stride" => self.stride = Some(num(v)?),
            "run.runs" => self.runs = num(v)?,
            "run.c" => self.c = num(v)?,
            "run.m_max" => self.m_max = num(v)?,
            "run.acceptance" => self.acceptance = num(v)?,
            "run.a" => self.a = Some(num(v)?),
            "run.target" => self.target = Some(num(v)?),
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. Errors carry the line number.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected \"section.key = value\"", i + 1))?;
            self.set(key.trim(), value).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    /// Canonical text form; parsing it back yields the same config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(k) = self.graph_kind {
            put("graph.kind", k.name().into());
        }
        if let Some(n) = self.graph_n {
            put("graph.n", n.to_string());
        }
        if let Some(p) = self.graph_p_edge {
            put("graph.p_edge", p.to_string());
        }
        if let Some(s) = self.graph_side {
            put("graph.side", s.to_string());
        }
        put("graph.dim", self.graph_dim.to_string());
        put("graph.seed", self.graph_seed.to_string());
        if let Some(f) = &self.graph_file {
            put("graph.file", f.display().to_string());
        }
        put(
            "interaction.kind",
            match self.interaction_kind {
                InteractionKind::Exponential => "exponential",
                InteractionKind::PowerSeries => "power_series",
            }
            .into(),
        );
        put("interaction.lambda", self.lambda.to_string());
        if let Some(c) = &self.coefficients {
            put("interaction.coefficients", c.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        }
        put("init.p_init", self.p_init.to_string());
        put("init.seed", self.init_seed.to_string());
        if let Some(f) = &self.init_file {
            put("init.file", f.display().to_string());
        }
        put("run.tol", self.tol.to_string());
        put("run.t_max", self.t_max.to_string());
        if let Some(s) = self.stride {
            put("run.stride", s.to_string());
        }
        put("run.runs", self.runs.to_string());
        put("run.c", self.c.to_string());
        put("run.m_max", self.m_max.to_string());
        put("run.acceptance", self.acceptance.to_string());
        if let Some(a) = self.a {
            put("run.a", a.to_string());
        }
        if let Some(t) = self.target {
            put("run.target", t.to_string());
        }
        put("output.dir", self.out_dir.display().to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# experiment\ngraph.kind = er\ngraph.n = 200 # vertices\n\ninteraction.lambda = -0.3\n").unwrap();
        assert_eq!(c.graph_kind, Some(GraphKind::ErdosRenyi));
        assert_eq!(c.graph_n, Some(200));
        assert_eq!(c.lambda, -0.3);
    }

    #[test]
    fn errors_name_the_line() {
        let mut c = ExperimentConfig::default();
        let e = c.apply_text("graph.n = 10\ngraph.n 12\n").unwrap_err();
        assert!(e.starts_with("line 2:"), "{e}");
        let e = c.apply_text("\n\nrun.tol = fast\n").unwrap_err();
        assert!(e.starts_with("line 3:"), "{e}");
        let e = c.apply_text("graph.colour = red\n").unwrap_err();
        assert!(e.contains("unknown key"), "{e}");
    }

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::default();
        c.apply_text("graph.kind = torus\ngraph.side = 6\ninteraction.kind = power_series\ninteraction.coefficients = 1, 1, 0.5\nrun.a = 0.01\n")
            .unwrap();
        let mut back = ExperimentConfig::default();
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }
}
