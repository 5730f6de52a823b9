use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use super::{Region, Statement, TubeProgram};
use crate::strand::Strand;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    /// Bad characters, bad nucleotides, unterminated quotes.
    Lexical,
    /// Unknown keywords, wrong operand counts or shapes.
    Syntactic,
    /// References to undeclared tubes.
    Semantic,
    /// Failures while executing.
    Runtime,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Lexical => "lexical",
            Category::Syntactic => "syntactic",
            Category::Semantic => "semantic",
            Category::Runtime => "runtime",
        })
    }
}

/// A located message. Columns are 1-based character positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub category: Category,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, category: Category, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line,
            col,
            category,
            message: message.into(),
        }
    }

    /// `file:line:col: category: message`.
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.category, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    /// Contents of a single-quoted literal.
    Quoted(String),
    Open,
    Close,
    Comma,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
    /// Column just past the token.
    end: usize,
}

fn lex(line_no: usize, line: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break,
            '{' | '}' | ',' => {
                let tok = match c {
                    '{' => Tok::Open,
                    '}' => Tok::Close,
                    _ => Tok::Comma,
                };
                out.push(Token { tok, col, end: col + 1 });
                i += 1;
            }
            '\'' => {
                let close = chars[i + 1..].iter().position(|&x| x == '\'').ok_or_else(|| {
                    Diagnostic::new(line_no, col, Category::Lexical, "unterminated strand literal")
                })?;
                let body: String = chars[i + 1..i + 1 + close].iter().collect();
                i += close + 2;
                out.push(Token {
                    tok: Tok::Quoted(body),
                    col,
                    end: i + 1,
                });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    col,
                    end: i + 1,
                });
            }
            other => {
                return Err(Diagnostic::new(
                    line_no,
                    col,
                    Category::Lexical,
                    format!("unexpected character {other:?}"),
                ))
            }
        }
    }
    Ok(out)
}

struct Line<'a> {
    no: usize,
    toks: &'a [Token],
    pos: usize,
    /// Column just past the last character, for "missing operand" reports.
    eol: usize,
    keyword: &'a str,
}

impl<'a> Line<'a> {
    fn syntax(&self, col: usize, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.no, col, Category::Syntactic, msg)
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<&'a Token, Diagnostic> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.syntax(self.eol, format!("{} expects {what}", self.keyword))),
        }
    }

    fn tube(&mut self) -> Result<(String, usize), Diagnostic> {
        let t = self.next("a tube name")?;
        match &t.tok {
            Tok::Word(w) if w.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => Ok((w.clone(), t.col)),
            _ => Err(self.syntax(t.col, "expected a tube name")),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), Diagnostic> {
        let t = self.next(what)?;
        if t.tok == want {
            Ok(())
        } else {
            Err(self.syntax(t.col, format!("expected {what}")))
        }
    }

    fn strand(&mut self) -> Result<Strand, Diagnostic> {
        let t = self.next("a strand")?;
        strand_of(self.no, t).ok_or_else(|| self.syntax(t.col, "expected a strand"))?
    }

    /// `{ item, ... }` where `item` is read by `f`.
    fn braced<T>(&mut self, what: &str, mut f: impl FnMut(&mut Self) -> Result<T, Diagnostic>) -> Result<Vec<T>, Diagnostic> {
        self.expect(Tok::Open, "'{'")?;
        let mut items = Vec::new();
        if matches!(self.peek(), Some(Token { tok: Tok::Close, .. })) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(f(self)?);
            let t = self.next(&format!("',' or '}}' in {what}"))?;
            match t.tok {
                Tok::Comma => continue,
                Tok::Close => return Ok(items),
                _ => return Err(self.syntax(t.col, format!("expected ',' or '}}' in {what}"))),
            }
        }
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.syntax(t.col, format!("too many operands for {}", self.keyword))),
        }
    }
}

/// Reads a word or quoted literal as a strand; `None` if the token is neither.
fn strand_of(line: usize, t: &Token) -> Option<Result<Strand, Diagnostic>> {
    let (body, offset) = match &t.tok {
        Tok::Word(w) => (w.as_str(), 0),
        Tok::Quoted(q) => (q.as_str(), 1),
        _ => return None,
    };
    Some(body.parse::<Strand>().map_err(|e| {
        let col = t.col + offset + body[..e.offset].chars().count();
        Diagnostic::new(line, col, Category::Lexical, format!("invalid nucleotide {:?}", e.found))
    }))
}

fn multiset_item(line: &mut Line) -> Result<(BigUint, Strand), Diagnostic> {
    let t = line.next("a strand")?;
    if let Tok::Word(w) = &t.tok {
        let digits = w.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 && w[digits..].starts_with('x') {
            let count: BigUint = w[..digits].parse().expect("digits");
            let rest = &w[digits + 1..];
            if !rest.is_empty() {
                let tail = Token {
                    tok: Tok::Word(rest.to_string()),
                    col: t.col + digits + 1,
                    end: t.end,
                };
                return Ok((count, strand_of(line.no, &tail).expect("word")?));
            }
            // `3x'ACG'` or `3x''`.
            if let Some(next) = line.peek() {
                if matches!(next.tok, Tok::Quoted(_)) && next.col == t.end {
                    line.pos += 1;
                    return Ok((count, strand_of(line.no, next).expect("quoted")?));
                }
            }
            return Err(line.syntax(t.end, "expected a strand after the count"));
        }
    }
    let s = strand_of(line.no, t).ok_or_else(|| line.syntax(t.col, "expected a strand"))??;
    Ok((BigUint::one(), s))
}

fn statement(line: &mut Line, declared: &mut BTreeSet<String>) -> Result<Statement, Diagnostic> {
    let mut uses: Vec<(String, usize)> = Vec::new();
    let source = |line: &mut Line, uses: &mut Vec<(String, usize)>| -> Result<String, Diagnostic> {
        let (name, col) = line.tube()?;
        uses.push((name.clone(), col));
        Ok(name)
    };
    let stmt = match line.keyword {
        "INPUT" => {
            let (tube, _) = line.tube()?;
            let contents = line.braced("multiset", multiset_item)?;
            Statement::Input { tube, contents }
        }
        "MERGE" => {
            let (into, _) = line.tube()?;
            let from = source(line, &mut uses)?;
            Statement::Merge { into, from }
        }
        "COPY" => {
            let src = source(line, &mut uses)?;
            let (dst, _) = line.tube()?;
            Statement::Copy { src, dst }
        }
        "SEPARATE" => {
            let src = source(line, &mut uses)?;
            let open_col = line.peek().map_or(line.eol, |t| t.col);
            let patterns = line.braced("pattern set", |l| l.strand())?;
            if patterns.is_empty() {
                return Err(line.syntax(open_col, "pattern set is empty"));
            }
            let (dst, _) = line.tube()?;
            let region = match line.peek() {
                None => Region::Whole,
                Some(t) => {
                    line.pos += 1;
                    match &t.tok {
                        Tok::Word(w) if w == "WHOLE" => Region::Whole,
                        Tok::Word(w) if w == "PREMARKER" => Region::PreMarker,
                        _ => return Err(line.syntax(t.col, "expected WHOLE or PREMARKER")),
                    }
                }
            };
            Statement::Separate { src, patterns, dst, region }
        }
        "SELECT" => {
            let src = source(line, &mut uses)?;
            let t = line.next("a length")?;
            let len = match &t.tok {
                Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                    w.parse().map_err(|_| line.syntax(t.col, "length out of range"))?
                }
                _ => return Err(line.syntax(t.col, "expected a length")),
            };
            let (dst, _) = line.tube()?;
            Statement::Select { src, len, dst }
        }
        "DETECT" => Statement::Detect {
            tube: source(line, &mut uses)?,
        },
        "ANNEAL" => Statement::Anneal {
            tube: source(line, &mut uses)?,
        },
        "DENATURE" => Statement::Denature {
            tube: source(line, &mut uses)?,
        },
        "DISCARD" => Statement::Discard {
            tube: source(line, &mut uses)?,
        },
        "APPEND" => {
            let tube = source(line, &mut uses)?;
            let strand = line.strand()?;
            Statement::Append { tube, strand }
        }
        other => {
            let col = line.toks[0].col;
            return Err(line.syntax(col, format!("unknown statement {other:?}")));
        }
    };
    line.finish()?;
    for (name, col) in uses {
        if !declared.contains(&name) {
            return Err(Diagnostic::new(
                line.no,
                col,
                Category::Semantic,
                format!("tube {name} is used before it is declared"),
            ));
        }
    }
    if let Some(d) = stmt.destination() {
        declared.insert(d.to_string());
    }
    Ok(stmt)
}

/// Parses and validates a program. Stops at the first diagnostic.
pub fn parse(text: &str) -> Result<TubeProgram, Diagnostic> {
    let mut program = TubeProgram::default();
    let mut declared = BTreeSet::new();
    let mut seen_statement = false;
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let trimmed = raw.trim_start();
        if let Some(rest) = trimmed.strip_prefix("CODEBOOK") {
            if rest.is_empty() || rest.starts_with([' ', '\t']) {
                let col = raw.len() - trimmed.len() + 1;
                if seen_statement || program.codebook.is_some() {
                    return Err(Diagnostic::new(no, col, Category::Syntactic, "CODEBOOK must be the first statement"));
                }
                let path = rest.split('#').next().unwrap_or("").trim();
                if path.is_empty() {
                    return Err(Diagnostic::new(no, col + 8, Category::Syntactic, "CODEBOOK expects a path"));
                }
                program.codebook = Some(path.to_string());
                seen_statement = true;
                continue;
            }
        }
        let toks = lex(no, raw)?;
        let Some(first) = toks.first() else { continue };
        let keyword = match &first.tok {
            Tok::Word(w) => w.as_str(),
            _ => return Err(Diagnostic::new(no, first.col, Category::Syntactic, "expected a statement keyword")),
        };
        let mut line = Line {
            no,
            toks: &toks,
            pos: 1,
            eol: raw.chars().count() + 1,
            keyword,
        };
        let stmt = statement(&mut line, &mut declared)?;
        program.statements.push(stmt);
        program.lines.push(no);
        seen_statement = true;
    }
    Ok(program)
}
