//! The four-phase tube algorithm for the rural postman decision problem.
//!
//! Phase 1 anneals vertex and edge words into every closed walk of `v` steps
//! through the anchor edge. Phase 2 keeps walks using every other required
//! edge, phase 3 keeps walks visiting every vertex, and phase 4 lengthens each
//! strand by the cost of its free edges and sweeps the admissible lengths.
//!
//! Every tube operation is issued as a [`Statement`] to a [`Lab`], so a run
//! doubles as a replayable tube script.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::encoding::{Codebook, CodebookError, WORD};
use crate::graph::{canonical_cycle, Relabeling, RppInstance};
use crate::script::{DetectEvent, Region, ScriptEnv, ScriptError, Statement, TubeProgram};
use crate::strand::Strand;
use crate::tube::{append_chunks, AnnealMode, FillerPolicy, TubeError, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

impl PipelineError {
    pub fn is_capacity(&self) -> bool {
        matches!(self, PipelineError::Script(ScriptError::Tube(TubeError::CapacityExceeded { .. })))
    }
}

/// Executes tube statements.
pub trait Lab {
    /// Runs one statement. Returns the outcome of a `DETECT`.
    fn run(&mut self, line: usize, stmt: &Statement) -> Result<Option<bool>, ScriptError>;

    /// Smallest strand held by `tube`, if the lab keeps contents.
    fn first_strand(&self, tube: &str) -> Option<Strand>;

    fn max_distinct(&self) -> usize {
        0
    }
}

impl Lab for ScriptEnv {
    fn run(&mut self, line: usize, stmt: &Statement) -> Result<Option<bool>, ScriptError> {
        self.step(line, stmt)
    }

    fn first_strand(&self, tube: &str) -> Option<Strand> {
        ScriptEnv::first_strand(self, tube)
    }

    fn max_distinct(&self) -> usize {
        ScriptEnv::max_distinct(self)
    }
}

/// Holds no strands and reports every `DETECT` as positive, so a run issues
/// the longest statement sequence the instance allows.
#[derive(Debug, Default, Clone, Copy)]
pub struct DryLab;

impl Lab for DryLab {
    fn run(&mut self, _line: usize, stmt: &Statement) -> Result<Option<bool>, ScriptError> {
        Ok(matches!(stmt, Statement::Detect { .. }).then_some(true))
    }

    fn first_strand(&self, _tube: &str) -> Option<Strand> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub mode: AnnealMode,
    pub seed: u64,
    /// Maximum distinct strands per tube.
    pub cap: usize,
    /// Keep the executed statements as a script.
    pub trace: bool,
    /// Decode a circuit from the detected strand.
    pub witness: bool,
    /// Root of the depth-first renumbering.
    pub dfs_root: usize,
    /// Codebook path written in the trace header.
    pub trace_codebook: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: AnnealMode::Assembly,
            seed: 0,
            cap: DEFAULT_CAP,
            trace: false,
            witness: false,
            dfs_root: 1,
            trace_codebook: "codebook.txt".into(),
        }
    }
}

/// Operation counts by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub inputs: u64,
    pub merges: u64,
    pub copies: u64,
    pub detects: u64,
    pub separations: u64,
    pub selections: u64,
    pub anneals: u64,
    pub denatures: u64,
    pub discards: u64,
    pub appends: u64,
}

impl OpCounts {
    fn record(&mut self, stmt: &Statement) {
        let slot = match stmt {
            Statement::Input { .. } => &mut self.inputs,
            Statement::Merge { .. } => &mut self.merges,
            Statement::Copy { .. } => &mut self.copies,
            Statement::Detect { .. } => &mut self.detects,
            Statement::Separate { .. } => &mut self.separations,
            Statement::Select { .. } => &mut self.selections,
            Statement::Anneal { .. } => &mut self.anneals,
            Statement::Denature { .. } => &mut self.denatures,
            Statement::Discard { .. } => &mut self.discards,
            Statement::Append { .. } => &mut self.appends,
        };
        *slot += 1;
    }

    pub fn total(&self) -> u64 {
        self.inputs
            + self.merges
            + self.copies
            + self.detects
            + self.separations
            + self.selections
            + self.anneals
            + self.denatures
            + self.discards
            + self.appends
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PipelineStats {
    /// Everything except the final length sweep.
    pub operations: OpCounts,
    /// The final `SELECT`/`DETECT` sweep over lengths.
    pub sweep: OpCounts,
    pub total: u64,
    pub max_distinct: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Answer {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
}

impl Answer {
    pub fn from_bool(b: bool) -> Answer {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub answer: Answer,
    /// Circuit in the instance's own labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
    pub stats: PipelineStats,
    /// The strand found by the sweep.
    #[serde(skip)]
    pub detected: Option<Strand>,
    #[serde(skip)]
    pub detect_log: Vec<DetectEvent>,
    #[serde(skip)]
    pub trace: Option<TubeProgram>,
    /// Codebook of the renumbered instance; absent for short-circuited runs.
    #[serde(skip)]
    pub codebook: Option<Codebook>,
    #[serde(skip)]
    pub relabeling: Option<Relabeling>,
}

impl Decision {
    fn short_circuit(answer: Answer) -> Decision {
        Decision {
            answer,
            witness: None,
            cost: None,
            stats: PipelineStats::default(),
            detected: None,
            detect_log: Vec::new(),
            trace: None,
            codebook: None,
            relabeling: None,
        }
    }
}

/// Issues the algorithm's statements against a lab. Works on an instance
/// already renumbered to match the codebook.
pub struct Pipeline<'a, L: Lab> {
    inst: &'a RppInstance,
    cb: &'a Codebook,
    lab: L,
    statements: Vec<Statement>,
    log: Vec<DetectEvent>,
    ops: OpCounts,
    sweep: OpCounts,
    in_sweep: bool,
}

impl<'a, L: Lab> Pipeline<'a, L> {
    pub fn new(inst: &'a RppInstance, cb: &'a Codebook, lab: L) -> Pipeline<'a, L> {
        Pipeline {
            inst,
            cb,
            lab,
            statements: Vec::new(),
            log: Vec::new(),
            ops: OpCounts::default(),
            sweep: OpCounts::default(),
            in_sweep: false,
        }
    }

    pub fn lab(&self) -> &L {
        &self.lab
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn detect_log(&self) -> &[DetectEvent] {
        &self.log
    }

    pub fn counts(&self) -> (OpCounts, OpCounts) {
        (self.ops, self.sweep)
    }

    fn emit(&mut self, stmt: Statement) -> Result<Option<bool>, ScriptError> {
        // Lines as in the printed trace, which starts with a CODEBOOK header.
        let line = TubeProgram::canonical_line(true, self.statements.len());
        if self.in_sweep {
            self.sweep.record(&stmt);
        } else {
            self.ops.record(&stmt);
        }
        let out = self.lab.run(line, &stmt)?;
        if let (Some(detected), Statement::Detect { tube }) = (out, &stmt) {
            self.log.push(DetectEvent {
                line,
                tube: tube.clone(),
                detected,
            });
        }
        self.statements.push(stmt);
        Ok(out)
    }

    fn detect(&mut self, tube: &str) -> Result<bool, ScriptError> {
        Ok(self.emit(Statement::Detect { tube: tube.into() })?.unwrap_or(false))
    }

    fn input(&mut self, tube: &str, strands: Vec<Strand>) -> Result<(), ScriptError> {
        let contents = strands.into_iter().map(|s| (BigUint::one(), s)).collect();
        self.emit(Statement::Input {
            tube: tube.into(),
            contents,
        })?;
        Ok(())
    }

    fn merge(&mut self, into: &str, from: &str) -> Result<(), ScriptError> {
        self.emit(Statement::Merge {
            into: into.into(),
            from: from.into(),
        })?;
        Ok(())
    }

    fn separate(&mut self, src: &str, patterns: Vec<Strand>, dst: &str, region: Region) -> Result<(), ScriptError> {
        self.emit(Statement::Separate {
            src: src.into(),
            patterns,
            dst: dst.into(),
            region,
        })?;
        Ok(())
    }

    fn select(&mut self, src: &str, len: usize, dst: &str) -> Result<(), ScriptError> {
        self.emit(Statement::Select {
            src: src.into(),
            len,
            dst: dst.into(),
        })?;
        Ok(())
    }

    fn single(&mut self, stmt: fn(String) -> Statement, tube: &str) -> Result<(), ScriptError> {
        self.emit(stmt(tube.into()))?;
        Ok(())
    }

    fn lengthen(&mut self, tube: &str, total: u64) -> Result<(), ScriptError> {
        for len in append_chunks(total as usize) {
            self.emit(Statement::Append {
                tube: tube.into(),
                strand: FillerPolicy::default().filler(len),
            })?;
        }
        Ok(())
    }

    /// Builds every closed walk of `v` steps through the anchor as a lower
    /// strand of `20v` nucleotides in tube `R`.
    pub fn phase1_generate(&mut self) -> Result<&'static str, ScriptError> {
        let v = self.cb.vertex_count();
        self.input("P", self.cb.tube_p())?;
        self.input("Q", self.cb.tube_q())?;
        self.input("R", self.cb.tube_r())?;
        self.merge("P", "Q")?;
        self.merge("P", "R")?;
        self.single(|tube| Statement::Anneal { tube }, "P")?;
        self.single(|tube| Statement::Denature { tube }, "P")?;
        self.select("P", WORD * v, "R")?;
        // Upper strands are also 20v long; keep the edge-side ones, which
        // open with a complemented half.
        let caps: Vec<Strand> = self.cb.halves().iter().map(Strand::complement).collect();
        self.separate("R", caps, "S", Region::Whole)?;
        self.single(|tube| Statement::Discard { tube }, "R")?;
        self.merge("R", "S")?;
        Ok("R")
    }

    /// Filters by every required edge other than the anchor. Returns the name
    /// of the surviving tube.
    pub fn phase2_require_edges(&mut self) -> Result<String, ScriptError> {
        self.emit(Statement::Copy {
            src: "R".into(),
            dst: "L_1".into(),
        })?;
        let anchor = self.cb.anchor();
        let rest: Vec<_> = self.inst.required().iter().copied().filter(|e| Some(*e) != anchor).collect();
        let mut current = "L_1".to_string();
        for (i, e) in rest.into_iter().enumerate() {
            let next = format!("L_{}", i + 2);
            self.separate(&current, self.cb.edge_patterns(e).to_vec(), &next, Region::Whole)?;
            current = next;
        }
        Ok(current)
    }

    /// Keeps strands visiting every vertex, moving them to `N`. False as soon
    /// as some vertex is missing from every strand.
    pub fn phase3_vertex_check(&mut self, lm: &str) -> Result<bool, ScriptError> {
        for i in 1..=self.cb.vertex_count() {
            self.separate(lm, vec![self.cb.vertex_pattern(i)], "Temp", Region::Whole)?;
            if !self.detect("Temp")? {
                return Ok(false);
            }
            self.single(|tube| Statement::Discard { tube }, lm)?;
            self.merge(lm, "Temp")?;
        }
        self.merge("N", lm)?;
        Ok(true)
    }

    /// Encodes free-edge costs as length past the marker and sweeps the
    /// admissible lengths from longest to shortest. Returns whether a strand
    /// was detected and, if the lab keeps contents, that strand.
    pub fn phase4_cost_check(&mut self) -> Result<(bool, Option<Strand>), ScriptError> {
        let v = self.cb.vertex_count();
        self.emit(Statement::Append {
            tube: "N".into(),
            strand: self.cb.marker().clone(),
        })?;
        // Every walk closes through the anchor, so a free anchor is paid by all.
        let mut free_total = 0u64;
        if let Some(a) = self.cb.anchor().filter(|a| !self.inst.is_required(*a)) {
            let len = self.inst.length(a).expect("anchor is an edge");
            self.lengthen("N", len)?;
            free_total += len;
        }
        let free: Vec<_> = self
            .inst
            .free_edges()
            .filter(|e| Some(*e) != self.cb.anchor())
            .collect();
        for (i, e) in free.into_iter().enumerate() {
            let z = format!("Z_{}", i + 1);
            let len = self.inst.length(e).expect("free edge");
            free_total += len;
            self.separate("N", self.cb.edge_patterns(e).to_vec(), &z, Region::PreMarker)?;
            if self.detect(&z)? {
                self.lengthen(&z, len)?;
            }
            self.merge("N", &z)?;
        }
        let c = self.inst.free_budget();
        debug_assert!(c >= 0);
        // No strand is longer than every free edge together.
        let c = (c as u128).min(free_total as u128) as usize;
        let base = WORD * v + WORD;
        self.in_sweep = true;
        for i in 0..=c {
            self.select("N", base + c - i, "F")?;
            if self.detect("F")? {
                self.in_sweep = false;
                return Ok((true, self.lab.first_strand("F")));
            }
        }
        self.in_sweep = false;
        Ok((false, None))
    }

    /// All four phases. The strand is the sweep's hit, when kept.
    pub fn run_all(&mut self) -> Result<(bool, Option<Strand>), ScriptError> {
        self.phase1_generate()?;
        let lm = self.phase2_require_edges()?;
        if !self.phase3_vertex_check(&lm)? {
            return Ok((false, None));
        }
        self.phase4_cost_check()
    }
}

/// Renumbers `inst` and builds its codebook.
pub fn prepare(inst: &RppInstance, cfg: &PipelineConfig) -> Result<(RppInstance, Relabeling, Codebook), PipelineError> {
    let (renumbered, relabel) = inst.dfs_renumber(cfg.dfs_root);
    let cb = Codebook::build(&renumbered, cfg.seed)?;
    Ok((renumbered, relabel, cb))
}

fn solve_in<L: Lab>(inst: &RppInstance, cfg: &PipelineConfig, make_lab: impl FnOnce(&Codebook) -> L) -> Result<Decision, PipelineError> {
    let start = Instant::now();
    if inst.free_budget() < 0 || inst.edge_count() == 0 {
        return Ok(Decision::short_circuit(Answer::No));
    }
    let (renumbered, relabel, cb) = prepare(inst, cfg)?;
    let mut run = Pipeline::new(&renumbered, &cb, make_lab(&cb));
    let (found, strand) = run.run_all()?;
    let (ops, sweep) = run.counts();
    let stats = PipelineStats {
        operations: ops,
        sweep,
        total: ops.total() + sweep.total(),
        max_distinct: run.lab().max_distinct(),
        wall_time: start.elapsed(),
    };
    let (witness, cost) = match (&strand, cfg.witness) {
        (Some(s), true) => match cb.decode_walk(s) {
            Some(walk) => {
                let cycle = canonical_cycle(&relabel.to_original(&walk));
                let cost = inst.cycle_cost(&cycle);
                (Some(cycle), cost)
            }
            None => (None, None),
        },
        _ => (None, None),
    };
    let trace = cfg.trace.then(|| TubeProgram::new(Some(cfg.trace_codebook.clone()), run.statements().to_vec()));
    let detect_log = run.detect_log().to_vec();
    Ok(Decision {
        answer: Answer::from_bool(found),
        witness,
        cost,
        stats,
        detected: strand,
        detect_log,
        trace,
        codebook: Some(cb),
        relabeling: Some(relabel),
    })
}

/// Runs the algorithm on simulated tubes.
pub fn solve(inst: &RppInstance, cfg: &PipelineConfig) -> Result<Decision, PipelineError> {
    solve_in(inst, cfg, |cb| ScriptEnv::new(Some(cb.clone()), cfg.mode, cfg.cap))
}

/// Issues the statements of the longest possible run without simulating any
/// tube. Every `DETECT` counts as positive, so the answer is always YES and no
/// witness is produced; the operation counts are the point.
pub fn dry_run(inst: &RppInstance, cfg: &PipelineConfig) -> Result<Decision, PipelineError> {
    solve_in(inst, cfg, |_| DryLab)
}
