//! Command-line front end. [`run`] does all the work and returns what the
//! process should print, so it can be tested without spawning.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::encoding::Codebook;
use crate::graph::{RawInstance, RppInstance};
use crate::oracle;
use crate::pipeline::{self, Decision, PipelineConfig};
use crate::script::{self, ScriptEnv, ScriptError};
use crate::tube::{AnnealMode, TubeError, DEFAULT_CAP};

/// Largest vertex count literal annealing is run on.
pub const LITERAL_MAX_VERTICES: usize = 4;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tubesim", version, about = "Simulated test-tube computing for the rural postman problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Codebook seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Annealing enumerator.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Assembly)]
    mode: Mode,

    /// Maximum distinct strands per tube.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,

    /// Decode a circuit from the detected strand.
    #[arg(long, global = true)]
    witness: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Where to write the tube script of the run.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide an instance with the tube algorithm.
    Solve { instance: PathBuf },
    /// Decide an instance by exhaustive search.
    Oracle { instance: PathBuf },
    /// Print the codebook used for an instance.
    Encode { instance: PathBuf },
    /// Solve and write the executed tube script (default `<instance>.tube`).
    EmitScript { instance: PathBuf },
    /// Execute a tube script and print its DETECT results.
    RunScript { script: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Assembly,
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// What the process prints and returns.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Outcome {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

fn usage(message: impl Into<String>) -> Outcome {
    Outcome::fail(EXIT_USAGE, format!("error: {}", message.into()))
}

fn load_instance(path: &Path) -> Result<RppInstance, Outcome> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let raw = RawInstance::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    RppInstance::validate(&raw).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl Cli {
    fn config(&self, inst: &RppInstance) -> Result<PipelineConfig, Outcome> {
        let mode = match self.mode {
            Mode::Assembly => AnnealMode::Assembly,
            Mode::Literal => AnnealMode::Literal,
        };
        if mode == AnnealMode::Literal && inst.vertex_count() > LITERAL_MAX_VERTICES {
            return Err(usage(format!(
                "literal annealing supports at most {LITERAL_MAX_VERTICES} vertices, instance has {}",
                inst.vertex_count()
            )));
        }
        if self.cap == 0 {
            return Err(usage("--cap must be at least 1"));
        }
        Ok(PipelineConfig {
            mode,
            seed: self.seed,
            cap: self.cap,
            trace: false,
            witness: self.witness,
            ..PipelineConfig::default()
        })
    }

    fn solve(&self, inst: &RppInstance, trace: Option<&Path>) -> Result<Decision, Outcome> {
        let mut cfg = self.config(inst)?;
        let codebook_path = trace.map(|t| {
            let mut p = t.as_os_str().to_owned();
            p.push(".codebook");
            PathBuf::from(p)
        });
        if let Some(cb) = &codebook_path {
            cfg.trace = true;
            cfg.trace_codebook = cb
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        let decision = pipeline::solve(inst, &cfg).map_err(|e| {
            let code = if e.is_capacity() { EXIT_CAPACITY } else { EXIT_USAGE };
            Outcome::fail(code, format!("error: {e}"))
        })?;
        if let (Some(trace_path), Some(cb_path)) = (trace, &codebook_path) {
            // Short-circuited runs issue no statements; the trace is then just
            // the header and the codebook of the renumbered instance.
            let (program, cb) = match (&decision.trace, &decision.codebook) {
                (Some(p), Some(cb)) => (p.clone(), cb.clone()),
                _ => {
                    let (_, _, cb) = pipeline::prepare(inst, &cfg).map_err(|e| usage(e.to_string()))?;
                    (script::TubeProgram::new(Some(cfg.trace_codebook.clone()), Vec::new()), cb)
                }
            };
            let write = |p: &Path, text: String| fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())));
            write(cb_path, cb.dump())?;
            write(trace_path, program.print())?;
        }
        Ok(decision)
    }

    fn render_decision(&self, d: &Decision) -> String {
        match self.format {
            Format::Json => serde_json::to_string(d).expect("serializable") + "\n",
            Format::Text => {
                let mut out = format!("{}\n", d.answer.as_str());
                if let Some(w) = &d.witness {
                    let labels: Vec<String> = w.iter().map(usize::to_string).collect();
                    out += &format!("witness: {}\n", labels.join(" "));
                }
                if let Some(c) = d.cost {
                    out += &format!("cost: {c}\n");
                }
                out += &format!(
                    "operations: {} (+{} in the final sweep)\nmax distinct strands: {}\n",
                    d.stats.operations.total(),
                    d.stats.sweep.total(),
                    d.stats.max_distinct
                );
                out
            }
        }
    }

    fn execute(&self) -> Result<String, Outcome> {
        match &self.command {
            Command::Solve { instance } => {
                let inst = load_instance(instance)?;
                let d = self.solve(&inst, self.trace.as_deref())?;
                Ok(self.render_decision(&d))
            }
            Command::EmitScript { instance } => {
                let inst = load_instance(instance)?;
                let trace = self.trace.clone().unwrap_or_else(|| instance.with_extension("tube"));
                let d = self.solve(&inst, Some(&trace))?;
                Ok(match self.format {
                    Format::Json => {
                        json!({"script": trace.display().to_string(), "answer": d.answer.as_str()}).to_string() + "\n"
                    }
                    Format::Text => format!("{}\n", trace.display()),
                })
            }
            Command::Oracle { instance } => {
                let inst = load_instance(instance)?;
                let r = oracle::bruteforce(&inst).map_err(|e| usage(e.to_string()))?;
                Ok(match self.format {
                    Format::Json => {
                        let mut v = json!({"answer": r.answer()});
                        let extra = serde_json::to_value(&r).expect("serializable");
                        v.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
                        v.to_string() + "\n"
                    }
                    Format::Text => {
                        let mut out = format!("{}\n", r.answer());
                        if let (Some(c), Some(cycle)) = (r.min_cost, &r.best_cycle) {
                            let labels: Vec<String> = cycle.iter().map(usize::to_string).collect();
                            out += &format!("best cycle: {}\nmin cost: {c}\n", labels.join(" "));
                        } else {
                            out += "no circuit through every required edge\n";
                        }
                        out
                    }
                })
            }
            Command::Encode { instance } => {
                let inst = load_instance(instance)?;
                let cfg = PipelineConfig {
                    seed: self.seed,
                    ..PipelineConfig::default()
                };
                let (_, _, cb) = pipeline::prepare(&inst, &cfg).map_err(|e| usage(e.to_string()))?;
                Ok(cb.dump())
            }
            Command::RunScript { script: path } => self.run_script(path),
        }
    }

    fn run_script(&self, path: &Path) -> Result<String, Outcome> {
        let name = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{name}: {e}")))?;
        let program = script::parse(&text).map_err(|d| Outcome::fail(EXIT_USAGE, d.render(&name)))?;
        let codebook = match &program.codebook {
            Some(rel) => {
                let cb_path = path.parent().unwrap_or(Path::new("")).join(rel);
                let dump = fs::read_to_string(&cb_path).map_err(|e| usage(format!("{}: {e}", cb_path.display())))?;
                Some(Codebook::parse_dump(&dump).map_err(|e| usage(format!("{}: {e}", cb_path.display())))?)
            }
            None => None,
        };
        let mode = match self.mode {
            Mode::Assembly => AnnealMode::Assembly,
            Mode::Literal => AnnealMode::Literal,
        };
        let mut env = ScriptEnv::new(codebook, mode, self.cap);
        env.execute_detailed(&program).map_err(|(d, e)| {
            let capacity = matches!(e, ScriptError::Tube(TubeError::CapacityExceeded { .. }));
            let code = if capacity { EXIT_CAPACITY } else { EXIT_USAGE };
            Outcome::fail(code, d.render(&name))
        })?;
        Ok(match self.format {
            Format::Json => serde_json::to_string(env.detect_log()).expect("serializable") + "\n",
            Format::Text => env
                .detect_log()
                .iter()
                .map(|e| format!("{}: DETECT {} -> {}\n", e.line, e.tube, e.detected))
                .collect(),
        })
    }
}

/// Parses `argv` (program name first) and runs the requested command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.exit_code() == 0 {
                Outcome::ok(text)
            } else {
                Outcome::fail(EXIT_USAGE, text)
            };
        }
    };
    match cli.execute() {
        Ok(stdout) => Outcome::ok(stdout),
        Err(outcome) => outcome,
    }
}
