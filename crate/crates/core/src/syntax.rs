//! Textual concrete syntax.
//!
//! Two notations share one abstract syntax. Arrow notation writes
//! `initial state A;` and `A - e [g] / a -> B;`; keyword notation writes
//! `*state A;` and `from A on e [g] do a goto B;`. Arrow is always
//! accepted, keyword only when the selection enables it.
//!
//! ```text
//! model     := "statechart" IDENT stereo* "{" decl* "}"
//! decl      := vardecl | statedecl | trans
//! vardecl   := ("vars" | "events" | "actions") IDENT ("," IDENT)* ";"
//! stereo    := "<<" IDENT (":" IDENT)? ">>"
//! statedecl := ("initial" "state" | "*" "state" | "state") IDENT stereo*
//!              (";" | "{" (statedecl | trans)* "}")
//! trans     := IDENT "-" events guard? ("/" IDENT)? "->" IDENT ";"
//!            | "from" IDENT "on" events guard? ("do" IDENT)? "goto" IDENT ";"
//! events    := IDENT ("," IDENT)*
//! guard     := "[" conj "]"
//! conj      := unary ("&" unary)*
//! unary     := "!" unary | "(" conj ")" | "true" | IDENT
//! ```
//!
//! `events` and `actions` declarations extend the model interface beyond
//! the events and actions its transitions mention.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{
    allowed_stereotypes, apply_constraint, wellformed, AbstractStatechart, Guard, GuardExpr,
    GuardLanguage, Origin, ScopeId, StateNode, Stereotype, TransitionNode, Violation, RESERVED,
};
use crate::feature_model::{Abbreviation, VariantSelection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Notation {
    Arrow,
    Keyword,
}

impl fmt::Display for Notation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notation::Arrow => "arrow",
            Notation::Keyword => "keyword",
        })
    }
}

/// One model file's content, labeled with the notation it was written in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteText {
    pub source: String,
    pub notation: Notation,
}

impl ConcreteText {
    pub fn new(source: impl Into<String>, notation: Notation) -> Self {
        ConcreteText {
            source: source.into(),
            notation,
        }
    }

    pub fn arrow(source: impl Into<String>) -> Self {
        Self::new(source, Notation::Arrow)
    }

    pub fn keyword(source: impl Into<String>) -> Self {
        Self::new(source, Notation::Keyword)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    SyntaxError,
    WellFormednessError,
    VariantViolation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: DiagnosticKind,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::SyntaxError => "syntax error",
            DiagnosticKind::WellFormednessError => "ill-formed",
            DiagnosticKind::VariantViolation => "variant violation",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)
    }
}

/// A rejected text; always carries at least one diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", render_diagnostics(.diagnostics))]
pub struct ParseFailure {
    pub diagnostics: Vec<ParseDiagnostic>,
}

fn render_diagnostics(d: &[ParseDiagnostic]) -> String {
    d.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl ParseFailure {
    pub fn has_kind(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    LBracket,
    RBracket,
    Slash,
    Dash,
    Arrow,
    StereoOpen,
    StereoClose,
    Colon,
    Star,
    Amp,
    Bang,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Slash => "`/`",
            Tok::Dash => "`-`",
            Tok::Arrow => "`->`",
            Tok::StereoOpen => "`<<`",
            Tok::StereoClose => "`>>`",
            Tok::Colon => "`:`",
            Tok::Star => "`*`",
            Tok::Amp => "`&`",
            Tok::Bang => "`!`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn syntax_error(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic {
        line: pos.line,
        column: pos.column,
        message: message.into(),
        kind: DiagnosticKind::SyntaxError,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseDiagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let next = chars.get(i + 1).copied();
        let mut width = 1;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '/' => Some(Tok::Slash),
            '-' if next == Some('>') => {
                width = 2;
                Some(Tok::Arrow)
            }
            '-' => Some(Tok::Dash),
            '<' if next == Some('<') => {
                width = 2;
                Some(Tok::StereoOpen)
            }
            '>' if next == Some('>') => {
                width = 2;
                Some(Tok::StereoClose)
            }
            ':' => Some(Tok::Colon),
            '*' => Some(Tok::Star),
            '&' => Some(Tok::Amp),
            '!' => Some(Tok::Bang),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + width < chars.len()
                    && (chars[i + width].is_ascii_alphanumeric() || chars[i + width] == '_')
                {
                    width += 1;
                }
                Some(Tok::Ident(chars[start..start + width].iter().collect()))
            }
            other => return Err(syntax_error(pos, format!("unexpected character `{other}`"))),
        };
        if let Some(t) = tok {
            out.push((t, pos));
        }
        i += width;
        col += width;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    sel: &'s VariantSelection,
    spans: HashMap<Origin, Pos>,
    violations: Vec<ParseDiagnostic>,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> PResult<Pos> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            Err(syntax_error(
                self.here(),
                format!("expected {t}, found {}", self.peek()),
            ))
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn kw(&mut self, kw: &str) -> PResult<Pos> {
        if self.at_kw(kw) {
            Ok(self.bump().1)
        } else {
            Err(syntax_error(
                self.here(),
                format!("expected `{kw}`, found {}", self.peek()),
            ))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let p = self.bump().1;
                Ok((s, p))
            }
            Tok::Ident(s) => Err(syntax_error(
                self.here(),
                format!("expected identifier, found keyword `{s}`"),
            )),
            other => Err(syntax_error(
                self.here(),
                format!("expected identifier, found {other}"),
            )),
        }
    }

    fn violation(&mut self, pos: Pos, message: impl Into<String>) {
        self.violations.push(ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            kind: DiagnosticKind::VariantViolation,
        });
    }

    fn stereotypes(&mut self) -> PResult<Vec<(Stereotype, Pos)>> {
        let mut out = Vec::new();
        while *self.peek() == Tok::StereoOpen {
            let p = self.bump().1;
            let (name, _) = self.ident()?;
            let value = if *self.peek() == Tok::Colon {
                self.bump();
                Some(self.ident()?.0)
            } else {
                None
            };
            self.expect(Tok::StereoClose)?;
            out.push((Stereotype { name, value }, p));
        }
        Ok(out)
    }

    fn check_stereotypes(&mut self, stereos: &[(Stereotype, Pos)]) {
        for (s, p) in stereos {
            if !self.sel.stereotypes.iter().any(|pat| pat.matches(s)) {
                self.violation(*p, format!("stereotype <<{s}>> is not enabled"));
            }
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.ident()?.0];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.ident()?.0);
        }
        self.expect(Tok::Semi)?;
        Ok(out)
    }

    fn model(&mut self) -> PResult<AbstractStatechart> {
        let start = self.kw("statechart")?;
        self.spans.insert(Origin::Model, start);
        self.spans.insert(Origin::Scope(None), start);
        let (name, _) = self.ident()?;
        let stereos = self.stereotypes()?;
        self.check_stereotypes(&stereos);
        let mut m = AbstractStatechart::new(&name);
        m.stereotypes = stereos.into_iter().map(|(s, _)| s).collect();
        self.expect(Tok::LBrace)?;
        let (states, transitions) = self.body(None, &mut m)?;
        m.states = states;
        m.transitions = transitions;
        self.expect(Tok::RBrace)?;
        if *self.peek() != Tok::Eof {
            return Err(syntax_error(
                self.here(),
                format!("expected end of input, found {}", self.peek()),
            ));
        }
        Ok(m)
    }

    fn body(
        &mut self,
        scope: ScopeId,
        m: &mut AbstractStatechart,
    ) -> PResult<(Vec<StateNode>, Vec<TransitionNode>)> {
        let mut states = Vec::new();
        let mut transitions = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace | Tok::Eof => break,
                Tok::Ident(k) if k == "vars" || k == "events" || k == "actions" => {
                    let p = self.bump().1;
                    if scope.is_some() {
                        return Err(syntax_error(
                            p,
                            format!("`{k}` is only allowed at top level"),
                        ));
                    }
                    let names = self.ident_list()?;
                    match k.as_str() {
                        "vars" => m.guard_vars.extend(names),
                        "events" => m.declared_events.extend(names),
                        _ => m.declared_actions.extend(names),
                    }
                }
                Tok::Ident(k) if k == "initial" => {
                    self.bump();
                    self.kw("state")?;
                    states.push(self.state(true, m)?);
                }
                Tok::Ident(k) if k == "state" => {
                    self.bump();
                    states.push(self.state(false, m)?);
                }
                Tok::Star => {
                    let p = self.bump().1;
                    self.notation(Notation::Keyword, p);
                    self.kw("state")?;
                    states.push(self.state(true, m)?);
                }
                Tok::Ident(k) if k == "from" => {
                    let p = self.bump().1;
                    self.notation(Notation::Keyword, p);
                    self.spans.insert(
                        Origin::Transition {
                            scope: scope.clone(),
                            index: transitions.len(),
                        },
                        p,
                    );
                    transitions.push(self.keyword_transition()?);
                }
                Tok::Ident(_) => {
                    let p = self.here();
                    self.spans.insert(
                        Origin::Transition {
                            scope: scope.clone(),
                            index: transitions.len(),
                        },
                        p,
                    );
                    transitions.push(self.arrow_transition()?);
                }
                other => {
                    return Err(syntax_error(
                        self.here(),
                        format!("expected a declaration or transition, found {other}"),
                    ))
                }
            }
        }
        Ok((states, transitions))
    }

    fn notation(&mut self, n: Notation, p: Pos) {
        if !self.sel.allows_notation(n) {
            self.violation(p, format!("{n} notation is not enabled"));
        }
    }

    fn state(&mut self, is_initial: bool, m: &mut AbstractStatechart) -> PResult<StateNode> {
        let (name, p) = self.ident()?;
        self.spans.entry(Origin::State(name.clone())).or_insert(p);
        self.spans.insert(Origin::Scope(Some(name.clone())), p);
        let stereos = self.stereotypes()?;
        self.check_stereotypes(&stereos);
        let mut node = StateNode::leaf(&name);
        node.is_initial = is_initial;
        node.stereotypes = stereos.into_iter().map(|(s, _)| s).collect();
        if *self.peek() == Tok::LBrace {
            let brace = self.bump().1;
            let (children, transitions) = self.body(Some(name), m)?;
            if !children.is_empty() && !self.sel.abbreviations.contains(&Abbreviation::Hierarchy) {
                self.violation(brace, "hierarchical states are not enabled");
            }
            node.children = children;
            node.transitions = transitions;
            self.expect(Tok::RBrace)?;
        } else {
            self.expect(Tok::Semi)?;
        }
        Ok(node)
    }

    fn events(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.ident()?.0];
        while *self.peek() == Tok::Comma {
            let p = self.bump().1;
            if out.len() == 1 && !self.sel.abbreviations.contains(&Abbreviation::MultiTrigger) {
                self.violation(p, "multi-trigger transitions are not enabled");
            }
            out.push(self.ident()?.0);
        }
        Ok(out)
    }

    fn guard_opt(&mut self) -> PResult<GuardExpr> {
        let language = self.sel.guard_language();
        if *self.peek() != Tok::LBracket {
            return Ok(GuardExpr::always(GuardLanguage::Gl0));
        }
        let p = self.bump().1;
        let expr = self.conj()?;
        self.expect(Tok::RBracket)?;
        if language.admits(&expr) {
            Ok(GuardExpr::new(language, expr))
        } else {
            self.violation(p, format!("guard `{expr}` is not admitted by {language}"));
            Ok(GuardExpr::always(GuardLanguage::Gl0))
        }
    }

    fn conj(&mut self) -> PResult<Guard> {
        let mut g = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            g = Guard::and(g, self.unary()?);
        }
        Ok(g)
    }

    fn unary(&mut self) -> PResult<Guard> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Guard::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let g = self.conj()?;
                self.expect(Tok::RParen)?;
                Ok(g)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Guard::True)
            }
            _ => Ok(Guard::Var(self.ident()?.0)),
        }
    }

    fn arrow_transition(&mut self) -> PResult<TransitionNode> {
        let (source, _) = self.ident()?;
        self.expect(Tok::Dash)?;
        let events = self.events()?;
        let guard = self.guard_opt()?;
        let action = if *self.peek() == Tok::Slash {
            self.bump();
            Some(self.ident()?.0)
        } else {
            None
        };
        self.expect(Tok::Arrow)?;
        let (target, _) = self.ident()?;
        self.expect(Tok::Semi)?;
        Ok(TransitionNode {
            source,
            events,
            guard,
            action,
            target,
        })
    }

    fn keyword_transition(&mut self) -> PResult<TransitionNode> {
        let (source, _) = self.ident()?;
        self.kw("on")?;
        let events = self.events()?;
        let guard = self.guard_opt()?;
        let action = if self.at_kw("do") {
            self.bump();
            Some(self.ident()?.0)
        } else {
            None
        };
        self.kw("goto")?;
        let (target, _) = self.ident()?;
        self.expect(Tok::Semi)?;
        Ok(TransitionNode {
            source,
            events,
            guard,
            action,
            target,
        })
    }
}

/// The partial parse mapping: succeeds only on texts that are syntactically
/// valid, well-formed, and inside the variant language of `selection`.
pub fn parse(
    text: &ConcreteText,
    selection: &VariantSelection,
) -> Result<AbstractStatechart, ParseFailure> {
    parse_str(&text.source, selection)
}

pub fn parse_str(
    source: &str,
    selection: &VariantSelection,
) -> Result<AbstractStatechart, ParseFailure> {
    let fail = |d: ParseDiagnostic| ParseFailure {
        diagnostics: vec![d],
    };
    if source.trim().is_empty() {
        return Err(fail(syntax_error(
            Pos { line: 1, column: 1 },
            "empty model",
        )));
    }
    let toks = lex(source).map_err(fail)?;
    let mut p = Parser {
        toks,
        pos: 0,
        sel: selection,
        spans: HashMap::new(),
        violations: Vec::new(),
    };
    let m = p.model().map_err(fail)?;

    let mut diagnostics = std::mem::take(&mut p.violations);
    let model_pos = p.spans[&Origin::Model];
    let located = |v: &Violation| {
        let pos = p.spans.get(&v.origin()).copied().unwrap_or(model_pos);
        ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: v.to_string(),
            kind: DiagnosticKind::WellFormednessError,
        }
    };
    let wf = wellformed(&m);
    diagnostics.extend(wf.violations.iter().map(located));
    if wf.holds() {
        for c in &selection.constraints {
            if !apply_constraint(&m, *c) {
                diagnostics.push(ParseDiagnostic {
                    line: model_pos.line,
                    column: model_pos.column,
                    message: format!("model violates constraint {c}"),
                    kind: DiagnosticKind::VariantViolation,
                });
            }
        }
    }
    debug_assert!(!diagnostics.is_empty() || allowed_stereotypes(&m, &selection.stereotypes));
    if diagnostics.is_empty() {
        Ok(m)
    } else {
        Err(ParseFailure { diagnostics })
    }
}

/// Renders a well-formed model in the given notation. Parsing the result
/// under a selection that admits the model yields the model again.
pub fn unparse(m: &AbstractStatechart, notation: Notation) -> ConcreteText {
    let mut out = String::new();
    let _ = write!(out, "statechart {}", m.name);
    write_stereotypes(&mut out, m.stereotypes.iter());
    out.push_str(" {\n");
    for (kw, names) in [
        ("vars", &m.guard_vars),
        ("events", &m.declared_events),
        ("actions", &m.declared_actions),
    ] {
        if !names.is_empty() {
            let _ = writeln!(out, "  {kw} {};", names.join(", "));
        }
    }
    write_scope(&mut out, &m.states, &m.transitions, 1, notation);
    out.push_str("}\n");
    ConcreteText::new(out, notation)
}

fn write_stereotypes<'a>(out: &mut String, stereos: impl Iterator<Item = &'a Stereotype>) {
    for s in stereos {
        let _ = write!(out, " <<{s}>>");
    }
}

fn write_scope(
    out: &mut String,
    states: &[StateNode],
    transitions: &[TransitionNode],
    depth: usize,
    notation: Notation,
) {
    let pad = "  ".repeat(depth);
    for s in states {
        let marker = match (s.is_initial, notation) {
            (false, _) => "state",
            (true, Notation::Arrow) => "initial state",
            (true, Notation::Keyword) => "*state",
        };
        let _ = write!(out, "{pad}{marker} {}", s.name);
        write_stereotypes(out, s.stereotypes.iter());
        if s.children.is_empty() && s.transitions.is_empty() {
            out.push_str(";\n");
        } else {
            out.push_str(" {\n");
            write_scope(out, &s.children, &s.transitions, depth + 1, notation);
            let _ = writeln!(out, "{pad}}}");
        }
    }
    for t in transitions {
        out.push_str(&pad);
        write_transition(out, t, notation);
        out.push('\n');
    }
}

fn write_transition(out: &mut String, t: &TransitionNode, notation: Notation) {
    let events = t.events.join(", ");
    let guard = if t.guard.is_trivial() {
        String::new()
    } else {
        format!(" [{}]", t.guard.expr)
    };
    match notation {
        Notation::Arrow => {
            let action = t
                .action
                .as_ref()
                .map(|a| format!(" / {a}"))
                .unwrap_or_default();
            let _ = write!(
                out,
                "{} - {events}{guard}{action} -> {};",
                t.source, t.target
            );
        }
        Notation::Keyword => {
            let action = t
                .action
                .as_ref()
                .map(|a| format!(" do {a}"))
                .unwrap_or_default();
            let _ = write!(
                out,
                "from {} on {events}{guard}{action} goto {};",
                t.source, t.target
            );
        }
    }
}

/// The notation a text is written in: keyword if it uses any keyword-only
/// construct, arrow otherwise (also for texts that do not lex).
pub fn detect_notation(source: &str) -> Notation {
    let keyword = lex(source).is_ok_and(|toks| {
        toks.iter()
            .any(|(t, _)| matches!(t, Tok::Star) || matches!(t, Tok::Ident(k) if k == "from"))
    });
    if keyword {
        Notation::Keyword
    } else {
        Notation::Arrow
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", located(path, failure))]
    Parse {
        path: PathBuf,
        failure: ParseFailure,
    },
}

fn located(path: &Path, failure: &ParseFailure) -> String {
    failure
        .diagnostics
        .iter()
        .map(|d| format!("{}:{d}", path.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `.sc` files under `path` (recursively), sorted; `path` itself if it is a file.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    };
    if path.is_file() {
        return Ok(vec![path.to_owned()]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_dir() {
            out.extend(corpus_files(&p)?);
        } else if p.extension().is_some_and(|e| e == "sc") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Reads every `.sc` file under `path`, labeling each with its notation.
pub fn read_corpus(path: &Path) -> Result<Vec<(PathBuf, ConcreteText)>, CorpusError> {
    corpus_files(path)?
        .into_iter()
        .map(|p| {
            let source = fs::read_to_string(&p).map_err(|source| CorpusError::Io {
                path: p.clone(),
                source,
            })?;
            let notation = detect_notation(&source);
            Ok((p, ConcreteText::new(source, notation)))
        })
        .collect()
}

/// Reads and parses every `.sc` file under `path`.
pub fn load_corpus(
    path: &Path,
    selection: &VariantSelection,
) -> Result<Vec<(PathBuf, AbstractStatechart)>, CorpusError> {
    read_corpus(path)?
        .into_iter()
        .map(|(p, text)| match parse(&text, selection) {
            Ok(m) => Ok((p, m)),
            Err(failure) => Err(CorpusError::Parse { path: p, failure }),
        })
        .collect()
}

/// A parse function; the presentation checks accept arbitrary ones so that
/// faulty parsers can be checked as well.
pub type ParseFn<'a> = dyn Fn(&ConcreteText) -> Result<AbstractStatechart, ParseFailure> + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementWitness {
    pub index: usize,
    pub base: AbstractStatechart,
    pub variant: AbstractStatechart,
}

/// Outcome of comparing two parse functions on their common domain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgreementReport {
    pub texts: usize,
    pub common: usize,
    pub base_only: usize,
    pub variant_only: usize,
    /// Texts neither parser accepts; skipped.
    pub neither: usize,
    pub witness: Option<AgreementWitness>,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Texts accepted by both the base and the variant parser must yield the
/// same abstract syntax.
pub fn check_presentation_agreement(
    corpus: &[ConcreteText],
    base: &VariantSelection,
    variant: &VariantSelection,
) -> AgreementReport {
    check_presentation_agreement_with(corpus, &|t| parse(t, base), &|t| parse(t, variant))
}

pub fn check_presentation_agreement_with(
    corpus: &[ConcreteText],
    parse_base: &ParseFn<'_>,
    parse_variant: &ParseFn<'_>,
) -> AgreementReport {
    let mut report = AgreementReport {
        texts: corpus.len(),
        ..Default::default()
    };
    for (index, text) in corpus.iter().enumerate() {
        match (parse_base(text), parse_variant(text)) {
            (Ok(b), Ok(v)) => {
                report.common += 1;
                if b != v && report.witness.is_none() {
                    report.witness = Some(AgreementWitness {
                        index,
                        base: b,
                        variant: v,
                    });
                }
            }
            (Ok(_), Err(_)) => report.base_only += 1,
            (Err(_), Ok(_)) => report.variant_only += 1,
            (Err(_), Err(_)) => report.neither += 1,
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressibilityFailure {
    pub index: usize,
    pub rendering: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpressibilityReport {
    /// Texts accepted by the variant parser, by the notation they are labeled with.
    pub per_notation: BTreeMap<Notation, usize>,
    pub checked: usize,
    pub failure: Option<ExpressibilityFailure>,
}

impl ExpressibilityReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Every text the variant accepts must be expressible in the base language:
/// it is re-rendered in arrow notation and re-parsed by the base parser.
pub fn check_presentation_expressibility(
    corpus: &[ConcreteText],
    base: &VariantSelection,
    variant: &VariantSelection,
) -> ExpressibilityReport {
    check_presentation_expressibility_with(
        corpus,
        &|t| parse(t, variant),
        &|m| unparse(m, Notation::Arrow),
        &|t| parse(t, base),
    )
}

pub fn check_presentation_expressibility_with(
    corpus: &[ConcreteText],
    parse_variant: &ParseFn<'_>,
    render_base: &dyn Fn(&AbstractStatechart) -> ConcreteText,
    parse_base: &ParseFn<'_>,
) -> ExpressibilityReport {
    let mut report = ExpressibilityReport::default();
    for (index, text) in corpus.iter().enumerate() {
        let Ok(m1) = parse_variant(text) else {
            continue;
        };
        *report.per_notation.entry(text.notation).or_default() += 1;
        report.checked += 1;
        if report.failure.is_some() {
            continue;
        }
        let rendered = render_base(&m1);
        let reason = match parse_base(&rendered) {
            Ok(m2) if m2 == m1 => continue,
            Ok(_) => "base rendering parses to a different model".to_owned(),
            Err(e) => format!("base parser rejects the rendering: {e}"),
        };
        report.failure = Some(ExpressibilityFailure {
            index,
            rendering: rendered.source,
            reason,
        });
    }
    report
}

/// Finds two distinct texts of the corpus with equal abstract syntax.
pub fn exists_presentation_option(
    corpus: &[ConcreteText],
    selection: &VariantSelection,
) -> Option<(usize, usize)> {
    exists_presentation_option_with(corpus, &|t| parse(t, selection))
}

pub fn exists_presentation_option_with(
    corpus: &[ConcreteText],
    parse_fn: &ParseFn<'_>,
) -> Option<(usize, usize)> {
    let parsed: Vec<Option<AbstractStatechart>> = corpus.iter().map(|t| parse_fn(t).ok()).collect();
    for i in 0..corpus.len() {
        for j in i + 1..corpus.len() {
            if let (Some(a), Some(b)) = (&parsed[i], &parsed[j]) {
                if corpus[i].source != corpus[j].source && a == b {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::StereotypePattern;

    fn sel(features: &[&str]) -> VariantSelection {
        VariantSelection::from_features(features.iter().copied())
    }

    fn two_state() -> AbstractStatechart {
        AbstractStatechart::new("M")
            .with_states(vec![StateNode::leaf("A").initial(), StateNode::leaf("B")])
            .with_transitions(vec![TransitionNode::simple("A", "e", "B")])
    }

    #[test]
    fn arrow_text_parses_to_expected_tree() {
        let m = parse_str(
            "statechart M { initial state A; state B; A - e -> B; }",
            &VariantSelection::base(),
        )
        .unwrap();
        assert_eq!(m, two_state());
        assert_eq!(
            m.transitions[0].guard,
            GuardExpr::always(GuardLanguage::Gl0)
        );
    }

    #[test]
    fn keyword_text_parses_to_same_tree() {
        let k = parse_str(
            "statechart M { *state A; state B; from A on e goto B; }",
            &sel(&["Keyword"]),
        )
        .unwrap();
        assert_eq!(k, two_state());
    }

    #[test]
    fn keyword_notation_requires_the_option() {
        let err = parse_str(
            "statechart M { *state A; from A on e goto A; }",
            &VariantSelection::base(),
        )
        .unwrap_err();
        assert_eq!(err.diagnostics.len(), 2);
        assert!(err
            .diagnostics
            .iter()
            .all(|d| d.kind == DiagnosticKind::VariantViolation));
        assert_eq!(
            (err.diagnostics[0].line, err.diagnostics[0].column),
            (1, 16)
        );
    }

    #[test]
    fn unknown_target_is_a_wellformedness_error() {
        let err = parse_str(
            "statechart M {\n  initial state A;\n  A - e -> C;\n}",
            &VariantSelection::base(),
        )
        .unwrap_err();
        assert_eq!(
            err.diagnostics,
            vec![ParseDiagnostic {
                line: 3,
                column: 3,
                message: "unknown target C".into(),
                kind: DiagnosticKind::WellFormednessError,
            }]
        );
    }

    #[test]
    fn gl0_rejects_variable_guards() {
        let text = "statechart M { vars g1; initial state A; A - e [g1] -> A; }";
        let err = parse_str(text, &sel(&["GL0"])).unwrap_err();
        assert!(err.has_kind(DiagnosticKind::VariantViolation));
        assert_eq!(err.diagnostics.len(), 1);
        let m = parse_str(text, &sel(&["GL1"])).unwrap();
        assert_eq!(m.transitions[0].guard, GuardExpr::gl1(Guard::var("g1")));
        // `true` is a GL0 sentence
        parse_str(
            "statechart M { initial state A; A - e [true] -> A; }",
            &sel(&["GL0"]),
        )
        .unwrap();
    }

    #[test]
    fn gl1_rejects_negated_conjunctions() {
        let text = "statechart M { vars a, b; initial state A; A - e [!(a & b)] -> A; }";
        let err = parse_str(text, &sel(&["GL1"])).unwrap_err();
        assert!(err.has_kind(DiagnosticKind::VariantViolation));
    }

    #[test]
    fn undeclared_guard_variable() {
        let err = parse_str(
            "statechart M { initial state A; A - e [g] -> A; }",
            &sel(&["GL1"]),
        )
        .unwrap_err();
        assert_eq!(err.diagnostics[0].message, "undeclared guard variable g");
    }

    #[test]
    fn stereotypes_outside_allow_list_are_rejected() {
        let text = "statechart M <<prio:outer>> { initial state A; }";
        let err = parse_str(text, &VariantSelection::base()).unwrap_err();
        assert_eq!(err.diagnostics[0].kind, DiagnosticKind::VariantViolation);
        assert_eq!(err.diagnostics[0].column, 14);
        let m = parse_str(text, &sel(&["PrioOuter", "OuterFirst"])).unwrap();
        assert!(m.stereotypes.contains(&Stereotype::prio_outer()));
    }

    #[test]
    fn hierarchy_and_multitrigger_are_abbreviations() {
        let h = "statechart M { initial state C { initial state C1; } }";
        assert!(parse_str(h, &VariantSelection::base()).is_err());
        assert!(parse_str(h, &sel(&["Hierarchy"])).is_ok());
        let mt = "statechart M { initial state A; A - e, f -> A; }";
        assert!(parse_str(mt, &VariantSelection::base()).is_err());
        assert_eq!(
            parse_str(mt, &sel(&["MultiTrigger"])).unwrap().transitions[0].events,
            vec!["e", "f"]
        );
    }

    #[test]
    fn constraints_filter_the_language() {
        let text = "statechart M { initial state A; state B; A - e -> A; A - e -> B; }";
        assert!(parse_str(text, &VariantSelection::base()).is_ok());
        let err = parse_str(text, &sel(&["DetOnly"])).unwrap_err();
        assert_eq!(
            err.diagnostics[0].message,
            "model violates constraint DetOnly"
        );
    }

    #[test]
    fn syntax_errors() {
        let base = VariantSelection::base();
        for (text, line, col) in [
            ("", 1, 1),
            ("   \n ", 1, 1),
            ("statechart { }", 1, 12),
            ("statechart M { initial state A }", 1, 32),
            ("statechart M { initial state A; A - e => A; }", 1, 39),
            ("statechart M {\n state goto; }", 2, 8),
            ("statechart M { state A; } extra", 1, 27),
            ("statechart M { state A { vars g; } }", 1, 26),
        ] {
            let err = parse_str(text, &base).unwrap_err();
            assert_eq!(err.diagnostics.len(), 1, "{text}");
            let d = &err.diagnostics[0];
            assert_eq!(d.kind, DiagnosticKind::SyntaxError, "{text}: {d}");
            assert_eq!((d.line, d.column), (line, col), "{text}: {d}");
        }
    }

    #[test]
    fn comments_and_whitespace_are_not_syntax() {
        let a = parse_str(
            "// header\nstatechart M {\n  initial state A; // the start\n  state B;\n  A - e -> B;\n}\n",
            &VariantSelection::base(),
        )
        .unwrap();
        assert_eq!(a, two_state());
    }

    #[test]
    fn unparse_renders_both_notations() {
        let m = two_state();
        let arrow = unparse(&m, Notation::Arrow);
        assert!(arrow.source.contains("A - e -> B;"));
        assert!(arrow.source.contains("initial state A;"));
        let kw = unparse(&m, Notation::Keyword);
        assert!(kw.source.contains("from A on e goto B;"));
        assert!(kw.source.contains("*state A;"));
        let all = VariantSelection::permissive();
        assert_eq!(parse(&arrow, &all).unwrap(), m);
        assert_eq!(parse(&kw, &all).unwrap(), m);
    }

    #[test]
    fn single_state_round_trip() {
        let m = AbstractStatechart::new("S").with_states(vec![StateNode::leaf("A").initial()]);
        for n in [Notation::Arrow, Notation::Keyword] {
            assert_eq!(parse(&unparse(&m, n), &sel(&["Keyword"])).unwrap(), m);
        }
    }

    #[test]
    fn round_trip_of_everything() {
        let text = "statechart Big <<prio:outer>> <<doc>> {
            vars g1, g2;
            events e, f, h;
            actions a;
            initial state C <<kind:x>> {
                initial state C1;
                state C2 { initial state C21; C21 - e -> C1; }
                C1 - e, f [g1 & !g2] / a -> C2;
            }
            state A;
            state L { L - e -> A; }
            C - f [g1 & (g2 & true)] -> A;
            A - h / b -> C;
        }";
        let mut all = VariantSelection::permissive();
        all.stereotypes = vec![StereotypePattern::Any];
        let m = parse_str(text, &all).unwrap();
        for n in [Notation::Arrow, Notation::Keyword] {
            let t = unparse(&m, n);
            assert_eq!(parse(&t, &all).unwrap(), m, "{}", t.source);
        }
    }

    fn corpus_pair() -> Vec<ConcreteText> {
        let m = two_state();
        vec![unparse(&m, Notation::Arrow), unparse(&m, Notation::Keyword)]
    }

    #[test]
    fn agreement_on_arrow_only_corpus() {
        let corpus = vec![
            ConcreteText::arrow("statechart M { initial state A; state B; A - e -> B; }"),
            ConcreteText::arrow("statechart N { initial state A; }"),
        ];
        let r =
            check_presentation_agreement(&corpus, &VariantSelection::base(), &sel(&["Keyword"]));
        assert!(r.passed());
        assert_eq!(r.common, 2);
    }

    #[test]
    fn agreement_common_domain_of_both_renderings() {
        let r = check_presentation_agreement(
            &corpus_pair(),
            &VariantSelection::base(),
            &sel(&["Keyword"]),
        );
        assert!(r.passed());
        assert_eq!(r.common, 1);
        assert_eq!(r.variant_only, 1);
    }

    #[test]
    fn agreement_detects_faulty_variant_parser() {
        let base = VariantSelection::base();
        let variant = sel(&["Keyword"]);
        let broken = |t: &ConcreteText| {
            parse(t, &variant).map(|mut m| {
                for s in &mut m.states {
                    s.is_initial = !s.is_initial;
                }
                m
            })
        };
        let r = check_presentation_agreement_with(&corpus_pair(), &|t| parse(t, &base), &broken);
        assert!(!r.passed());
        assert_eq!(r.witness.unwrap().index, 0);
    }

    #[test]
    fn expressibility() {
        let base = VariantSelection::base();
        let variant = sel(&["Keyword"]);
        let keyword_only = vec![unparse(&two_state(), Notation::Keyword)];
        assert!(check_presentation_expressibility(&keyword_only, &base, &variant).passed());
        let empty = check_presentation_expressibility(&[], &base, &variant);
        assert!(empty.passed());
        assert_eq!(empty.checked, 0);
        let mixed = check_presentation_expressibility(&corpus_pair(), &base, &variant);
        assert!(mixed.passed());
        assert_eq!(mixed.per_notation[&Notation::Arrow], 1);
        assert_eq!(mixed.per_notation[&Notation::Keyword], 1);

        let broken = check_presentation_expressibility_with(
            &keyword_only,
            &|t| parse(t, &variant),
            &|m| unparse(m, Notation::Keyword),
            &|t| parse(t, &base),
        );
        assert!(!broken.passed());
    }

    #[test]
    fn presentation_option_witness() {
        let s = sel(&["Keyword"]);
        assert_eq!(exists_presentation_option(&corpus_pair(), &s), Some((0, 1)));
        assert_eq!(exists_presentation_option(&corpus_pair()[..1], &s), None);
        let distinct = vec![
            ConcreteText::arrow("statechart M { initial state A; }"),
            ConcreteText::arrow("statechart M { initial state B; }"),
        ];
        assert_eq!(exists_presentation_option(&distinct, &s), None);
    }
}
