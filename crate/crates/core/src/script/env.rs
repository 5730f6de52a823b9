use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::parse::{Category, Diagnostic};
use super::{Region, Statement, TubeProgram};
use crate::encoding::Codebook;
use crate::strand::Strand;
use crate::tube::{AnnealMode, HybridizationRule, MatchRegion, PatternSet, Tube, TubeError, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Tube(#[from] TubeError),
    #[error("tube {0} does not exist")]
    UnknownTube(String),
    #[error("{0} needs a codebook")]
    NoCodebook(&'static str),
}

/// One executed `DETECT`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetectEvent {
    pub line: usize,
    pub tube: String,
    pub detected: bool,
}

/// Named tubes plus what `ANNEAL` and `PREMARKER` need.
#[derive(Debug, Clone)]
pub struct ScriptEnv {
    tubes: BTreeMap<String, Tube>,
    codebook: Option<Codebook>,
    rule: Option<HybridizationRule>,
    mode: AnnealMode,
    cap: usize,
    log: Vec<DetectEvent>,
    max_distinct: usize,
}

impl Default for ScriptEnv {
    fn default() -> Self {
        ScriptEnv::new(None, AnnealMode::default(), DEFAULT_CAP)
    }
}

impl ScriptEnv {
    pub fn new(codebook: Option<Codebook>, mode: AnnealMode, cap: usize) -> ScriptEnv {
        let rule = codebook.as_ref().map(Codebook::hybridization_rule);
        ScriptEnv {
            tubes: BTreeMap::new(),
            codebook,
            rule,
            mode,
            cap,
            log: Vec::new(),
            max_distinct: 0,
        }
    }

    pub fn codebook(&self) -> Option<&Codebook> {
        self.codebook.as_ref()
    }

    pub fn tube(&self, name: &str) -> Option<&Tube> {
        self.tubes.get(name)
    }

    pub fn tubes(&self) -> impl Iterator<Item = (&str, &Tube)> {
        self.tubes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn detect_log(&self) -> &[DetectEvent] {
        &self.log
    }

    /// Largest distinct-strand count any tube reached after a statement.
    pub fn max_distinct(&self) -> usize {
        self.max_distinct
    }

    /// Runs every statement in order. On failure the environment keeps the
    /// effects of the statements before the failing one.
    pub fn execute(&mut self, program: &TubeProgram) -> Result<(), Diagnostic> {
        self.execute_detailed(program).map_err(|(d, _)| d)
    }

    /// [`ScriptEnv::execute`], also returning the underlying error.
    pub fn execute_detailed(&mut self, program: &TubeProgram) -> Result<(), (Diagnostic, ScriptError)> {
        for (i, stmt) in program.statements.iter().enumerate() {
            let line = program.line_of(i);
            if let Err(e) = self.step(line, stmt) {
                let d = Diagnostic::new(line, 1, Category::Runtime, format!("{}: {e}", stmt.keyword()));
                return Err((d, e));
            }
        }
        Ok(())
    }

    /// Executes one statement; returns the result of a `DETECT`.
    pub fn step(&mut self, line: usize, stmt: &Statement) -> Result<Option<bool>, ScriptError> {
        let out = self.apply(stmt)?;
        if let Some(detected) = out {
            let Statement::Detect { tube } = stmt else { unreachable!() };
            self.log.push(DetectEvent {
                line,
                tube: tube.clone(),
                detected,
            });
        }
        for name in stmt.sources().into_iter().chain(stmt.destination()) {
            if let Some(t) = self.tubes.get(name) {
                self.max_distinct = self.max_distinct.max(t.distinct());
            }
        }
        Ok(out)
    }

    fn get(&mut self, name: &str) -> Result<&mut Tube, ScriptError> {
        self.tubes
            .get_mut(name)
            .ok_or_else(|| ScriptError::UnknownTube(name.to_string()))
    }

    fn take(&mut self, name: &str) -> Result<Tube, ScriptError> {
        self.tubes
            .remove(name)
            .ok_or_else(|| ScriptError::UnknownTube(name.to_string()))
    }

    fn take_or_new(&mut self, name: &str) -> Tube {
        self.tubes
            .remove(name)
            .unwrap_or_else(|| Tube::new(name, self.cap))
    }

    /// Runs `f` on two distinct tubes and puts both back whatever happens.
    /// Same-name pairs get a scratch destination that then replaces the tube.
    fn with_pair<F>(&mut self, src: &str, dst: &str, f: F) -> Result<(), ScriptError>
    where
        F: FnOnce(&mut Tube, &mut Tube) -> Result<(), TubeError>,
    {
        let mut a = self.take(src)?;
        if src == dst {
            let mut b = Tube::new(dst, self.cap);
            let r = f(&mut a, &mut b);
            self.tubes.insert(src.to_string(), if r.is_ok() { b } else { a });
            return r.map_err(ScriptError::from);
        }
        let mut b = self.take_or_new(dst);
        let r = f(&mut a, &mut b);
        self.tubes.insert(src.to_string(), a);
        self.tubes.insert(dst.to_string(), b);
        r.map_err(ScriptError::from)
    }

    fn apply(&mut self, stmt: &Statement) -> Result<Option<bool>, ScriptError> {
        match stmt {
            Statement::Input { tube, contents } => {
                let mut t = Tube::new(tube.as_str(), self.cap);
                t.input(contents.iter().cloned().map(|(c, s)| (s, c)))?;
                self.tubes.insert(tube.clone(), t);
            }
            Statement::Merge { into, from } => {
                if into != from {
                    let mut from_tube = self.take(from)?;
                    let mut into_tube = self.take_or_new(into);
                    let r = into_tube.merge(&mut from_tube);
                    self.tubes.insert(into.clone(), into_tube);
                    self.tubes.insert(from.clone(), from_tube);
                    r?;
                } else {
                    // Merging a tube into itself leaves it as it is.
                    self.get(from)?;
                }
            }
            Statement::Copy { src, dst } => {
                self.with_pair(src, dst, |a, b| a.copy_to(b))?;
            }
            Statement::Detect { tube } => return Ok(Some(self.get(tube)?.detect())),
            Statement::Separate {
                src,
                patterns,
                dst,
                region,
            } => {
                let set = PatternSet::new(patterns.iter().cloned())?;
                let region = match region {
                    Region::Whole => MatchRegion::Whole,
                    Region::PreMarker => {
                        let cb = self.codebook.as_ref().ok_or(ScriptError::NoCodebook("PREMARKER"))?;
                        MatchRegion::BeforeMarker(cb.marker().clone())
                    }
                };
                self.with_pair(src, dst, |a, b| a.separate(&set, &region, b))?;
            }
            Statement::Select { src, len, dst } => {
                let len = *len;
                self.with_pair(src, dst, |a, b| a.select(len, b))?;
            }
            Statement::Anneal { tube } => {
                let rule = self.rule.clone().ok_or(ScriptError::NoCodebook("ANNEAL"))?;
                let mode = self.mode;
                self.get(tube)?.anneal(&rule, mode)?;
            }
            Statement::Denature { tube } => self.get(tube)?.denature(),
            Statement::Discard { tube } => self.get(tube)?.discard(),
            Statement::Append { tube, strand } => self.get(tube)?.append(strand)?,
        }
        Ok(None)
    }

    /// Smallest strand of a tube.
    pub fn first_strand(&self, tube: &str) -> Option<Strand> {
        self.tubes.get(tube).and_then(|t| t.first_strand().cloned())
    }
}
