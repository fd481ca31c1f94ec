//! Feature diagrams documenting the language's variation points.
//!
//! Every feature is optional unless marked otherwise, xor groups hold
//! exclusive alternatives, `requires` edges are inclusion constraints and
//! `refines` edges record a checked refinement between two alternatives of
//! one xor group together with the report that backs it.
//!
//! File format (`.fm`):
//!
//! ```text
//! featuremodel NAME {
//!   root NAME {
//!     [optional] group NAME { ... }
//!     [optional] xor NAME { ... }
//!     [optional] feature NAME;
//!   }
//!   requires A -> B;
//!   refines A -> B "reports/evidence.txt";
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::ast::{ConstraintId, GuardLanguage, Stereotype, StereotypePattern};
use crate::reduction::Priority;
use crate::semantics::{PartialMapping, Realization, Unmatched};
use crate::syntax::Notation;

/// The feature model shipped with the workbench.
pub const SHIPPED_FM: &str = include_str!("../../../data/StatechartLang.fm");

pub fn shipped() -> FeatureModel {
    parse_fm(SHIPPED_FM).expect("shipped feature model parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    AndGroup,
    XorGroup,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    pub optional: bool,
    pub children: Vec<Feature>,
}

impl Feature {
    fn walk<'a>(
        &'a self,
        parent: Option<&'a Feature>,
        f: &mut impl FnMut(&'a Feature, Option<&'a Feature>),
    ) {
        f(self, parent);
        for c in &self.children {
            c.walk(Some(self), f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementEdge {
    /// The refining (stronger) alternative.
    pub from: String,
    pub to: String,
    /// Path of the analysis report that established the refinement.
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    pub name: String,
    pub root: Feature,
    pub requires: Vec<(String, String)>,
    pub refines: Vec<RefinementEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate feature {0}")]
    DuplicateFeature(String),
    #[error("xor group {0} needs at least two alternatives")]
    XorTooSmall(String),
    #[error("{context} references unknown feature {name}")]
    UnknownFeature { context: &'static str, name: String },
    #[error("{from} and {to} are not alternatives of one xor group")]
    NotSiblings { from: String, to: String },
    #[error("refinement {from} -> {to} needs an evidence reference")]
    MissingEvidence { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigViolation {
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error("exclusive alternatives in {group}: {}", .chosen.join(", "))]
    ExclusiveAlternatives { group: String, chosen: Vec<String> },
    #[error("{feature} requires {required}")]
    MissingRequirement { feature: String, required: String },
}

impl FeatureModel {
    /// Features in depth-first order with their parents.
    pub fn features(&self) -> Vec<(&Feature, Option<&Feature>)> {
        let mut out = Vec::new();
        self.root.walk(None, &mut |f, p| out.push((f, p)));
        out
    }

    pub fn feature(&self, name: &str) -> Option<&Feature> {
        self.features()
            .into_iter()
            .map(|(f, _)| f)
            .find(|f| f.name == name)
    }

    fn parent_of(&self, name: &str) -> Option<&Feature> {
        self.features()
            .into_iter()
            .find(|(f, _)| f.name == name)
            .and_then(|(_, p)| p)
    }

    pub fn xor_groups(&self) -> Vec<&Feature> {
        self.features()
            .into_iter()
            .map(|(f, _)| f)
            .filter(|f| f.kind == FeatureKind::XorGroup)
            .collect()
    }

    /// Checks the structural invariants: unique names, xor groups with at
    /// least two alternatives, edges between existing features, refines
    /// edges between siblings of one xor group.
    pub fn check(&self) -> Result<(), FeatureModelError> {
        let mut seen = BTreeSet::new();
        for (f, _) in self.features() {
            if !seen.insert(f.name.as_str()) {
                return Err(FeatureModelError::DuplicateFeature(f.name.clone()));
            }
            if f.kind == FeatureKind::XorGroup && f.children.len() < 2 {
                return Err(FeatureModelError::XorTooSmall(f.name.clone()));
            }
        }
        for (a, b) in &self.requires {
            for n in [a, b] {
                if !seen.contains(n.as_str()) {
                    return Err(FeatureModelError::UnknownFeature {
                        context: "requires",
                        name: n.clone(),
                    });
                }
            }
        }
        for e in &self.refines {
            self.check_refinement(&e.from, &e.to, &e.evidence)?;
        }
        Ok(())
    }

    fn check_refinement(
        &self,
        from: &str,
        to: &str,
        evidence: &str,
    ) -> Result<(), FeatureModelError> {
        for n in [from, to] {
            if self.feature(n).is_none() {
                return Err(FeatureModelError::UnknownFeature {
                    context: "refines",
                    name: n.to_owned(),
                });
            }
        }
        let siblings = match (self.parent_of(from), self.parent_of(to)) {
            (Some(p), Some(q)) => p.name == q.name && p.kind == FeatureKind::XorGroup && from != to,
            _ => false,
        };
        if !siblings {
            return Err(FeatureModelError::NotSiblings {
                from: from.to_owned(),
                to: to.to_owned(),
            });
        }
        if evidence.trim().is_empty() {
            return Err(FeatureModelError::MissingEvidence {
                from: from.to_owned(),
                to: to.to_owned(),
            });
        }
        Ok(())
    }

    /// Features implied by `sel`: the selected ones, their ancestors, and
    /// mandatory children of included groups.
    fn closure(&self, sel: &BTreeSet<String>) -> BTreeSet<String> {
        fn include(
            f: &Feature,
            sel: &BTreeSet<String>,
            forced: bool,
            out: &mut BTreeSet<String>,
        ) -> bool {
            let mut any = forced || sel.contains(&f.name);
            for c in &f.children {
                let mandatory = any && f.kind == FeatureKind::AndGroup && !c.optional;
                any |= include(c, sel, mandatory, out);
            }
            // a second pass picks up mandatory children of groups that only
            // became included through a later sibling's descendant
            if any && f.kind == FeatureKind::AndGroup {
                for c in f.children.iter().filter(|c| !c.optional) {
                    include(c, sel, true, out);
                }
            }
            if any {
                out.insert(f.name.clone());
            }
            any
        }
        let mut out = BTreeSet::new();
        include(&self.root, sel, true, &mut out);
        out
    }

    pub fn validate_config<S: AsRef<str>>(
        &self,
        selected: &[S],
    ) -> Result<VariantSelection, Vec<ConfigViolation>> {
        let mut violations = Vec::new();
        let sel: BTreeSet<String> = selected.iter().map(|s| s.as_ref().to_owned()).collect();
        for s in &sel {
            if self.feature(s).is_none() {
                violations.push(ConfigViolation::UnknownFeature(s.clone()));
            }
        }
        let included = self.closure(&sel);
        for g in self.xor_groups() {
            let chosen: Vec<String> = g
                .children
                .iter()
                .filter(|c| included.contains(&c.name))
                .map(|c| c.name.clone())
                .collect();
            if chosen.len() > 1 {
                violations.push(ConfigViolation::ExclusiveAlternatives {
                    group: g.name.clone(),
                    chosen,
                });
            }
        }
        for (a, b) in &self.requires {
            if included.contains(a) && !included.contains(b) {
                violations.push(ConfigViolation::MissingRequirement {
                    feature: a.clone(),
                    required: b.clone(),
                });
            }
        }
        if violations.is_empty() {
            Ok(VariantSelection::from_features(included))
        } else {
            Err(violations)
        }
    }

    pub fn add_refinement_edge(
        &self,
        from: &str,
        to: &str,
        evidence: &str,
    ) -> Result<FeatureModel, FeatureModelError> {
        self.check_refinement(from, to, evidence)?;
        let mut fm = self.clone();
        fm.refines.push(RefinementEdge {
            from: from.to_owned(),
            to: to.to_owned(),
            evidence: evidence.to_owned(),
        });
        Ok(fm)
    }

    /// Serializes to the `.fm` format; `parse_fm` reads it back unchanged.
    pub fn export(&self) -> String {
        fn feature(f: &Feature, indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            let opt = if f.optional { "optional " } else { "" };
            match f.kind {
                FeatureKind::Leaf => {
                    let _ = writeln!(out, "{pad}{opt}feature {};", f.name);
                }
                FeatureKind::AndGroup | FeatureKind::XorGroup => {
                    let kw = if f.kind == FeatureKind::XorGroup {
                        "xor"
                    } else {
                        "group"
                    };
                    let _ = writeln!(out, "{pad}{opt}{kw} {} {{", f.name);
                    for c in &f.children {
                        feature(c, indent + 1, out);
                    }
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "featuremodel {} {{", self.name);
        let _ = writeln!(out, "  root {} {{", self.root.name);
        for c in &self.root.children {
            feature(c, 2, &mut out);
        }
        out.push_str("  }\n");
        for (a, b) in &self.requires {
            let _ = writeln!(out, "  requires {a} -> {b};");
        }
        for e in &self.refines {
            let _ = writeln!(
                out,
                "  refines {} -> {} \"{}\";",
                e.from,
                e.to,
                escape(&e.evidence)
            );
        }
        out.push_str("}\n");
        out
    }

    /// Graphviz rendering: xor groups become labeled clusters, requires
    /// edges are dotted and refines edges dashed.
    pub fn export_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", self.name);
        out.push_str("  rankdir=TB;\n  node [shape=box];\n");
        let mut clustered = BTreeSet::new();
        for (f, _) in self.features() {
            if f.kind == FeatureKind::XorGroup {
                let _ = writeln!(out, "  subgraph \"cluster_{}\" {{", f.name);
                let _ = writeln!(out, "    label=\"{} (xor)\";", f.name);
                for c in &f.children {
                    let _ = writeln!(out, "    \"{}\";", c.name);
                    clustered.insert(c.name.as_str());
                }
                out.push_str("  }\n");
            }
        }
        for (f, _) in self.features() {
            if !clustered.contains(f.name.as_str()) {
                let shape = if f.kind == FeatureKind::Leaf {
                    "box"
                } else {
                    "folder"
                };
                let _ = writeln!(out, "  \"{}\" [shape={shape}];", f.name);
            }
        }
        for (f, parent) in self.features() {
            if let Some(p) = parent {
                let head = if p.kind == FeatureKind::XorGroup {
                    "none"
                } else if f.optional {
                    "odot"
                } else {
                    "dot"
                };
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [arrowhead={head}];",
                    p.name, f.name
                );
            }
        }
        for (a, b) in &self.requires {
            let _ = writeln!(
                out,
                "  \"{a}\" -> \"{b}\" [style=dotted, label=\"requires\"];"
            );
        }
        for e in &self.refines {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [style=dashed, label=\"refines\", tooltip=\"{}\"];",
                e.from,
                e.to,
                escape(&e.evidence)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    Semi,
    Arrow,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, FeatureModelError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                c if c.is_whitespace() => {}
                '/' if matches!(chars.peek(), Some((_, '/'))) => break,
                '{' => out.push((Tok::LBrace, line_no)),
                '}' => out.push((Tok::RBrace, line_no)),
                ';' => out.push((Tok::Semi, line_no)),
                '-' if matches!(chars.peek(), Some((_, '>'))) => {
                    chars.next();
                    out.push((Tok::Arrow, line_no));
                }
                '"' => {
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '\\')) => match chars.next() {
                                Some((_, c)) => s.push(c),
                                None => break,
                            },
                            Some((_, '"')) => {
                                out.push((Tok::Str(s), line_no));
                                break;
                            }
                            Some((_, c)) => s.push(c),
                            None => {
                                return Err(FeatureModelError::Syntax {
                                    line: line_no,
                                    message: "unterminated string".into(),
                                })
                            }
                        }
                    }
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut end = i + c.len_utf8();
                    while let Some(&(j, d)) = chars.peek() {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            end = j + d.len_utf8();
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Ident(line[i..end].to_owned()), line_no));
                }
                other => {
                    return Err(FeatureModelError::Syntax {
                        line: line_no,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
    }
    Ok(out)
}

struct FmParser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl FmParser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map(|t| t.1)
            .unwrap_or(1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FeatureModelError> {
        Err(FeatureModelError::Syntax {
            line: self.line(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn expect(&mut self, t: Tok) -> Result<(), FeatureModelError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn ident(&mut self) -> Result<String, FeatureModelError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), FeatureModelError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn children(&mut self) -> Result<Vec<Feature>, FeatureModelError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            if self.peek().is_none() {
                return self.err("unexpected end of input");
            }
            out.push(self.feature()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn feature(&mut self) -> Result<Feature, FeatureModelError> {
        let optional = self.at_keyword("optional");
        if optional {
            self.pos += 1;
        }
        let kind = match self.peek() {
            Some(Tok::Ident(s)) if s == "feature" => FeatureKind::Leaf,
            Some(Tok::Ident(s)) if s == "group" => FeatureKind::AndGroup,
            Some(Tok::Ident(s)) if s == "xor" => FeatureKind::XorGroup,
            _ => return self.err("expected `feature`, `group` or `xor`"),
        };
        self.pos += 1;
        let name = self.ident()?;
        let children = if kind == FeatureKind::Leaf {
            self.expect(Tok::Semi)?;
            Vec::new()
        } else {
            self.children()?
        };
        Ok(Feature {
            name,
            kind,
            optional,
            children,
        })
    }
}

pub fn parse_fm(text: &str) -> Result<FeatureModel, FeatureModelError> {
    let mut p = FmParser {
        toks: tokenize(text)?,
        pos: 0,
    };
    p.keyword("featuremodel")?;
    let name = p.ident()?;
    p.expect(Tok::LBrace)?;
    p.keyword("root")?;
    let root_name = p.ident()?;
    let root = Feature {
        name: root_name,
        kind: FeatureKind::AndGroup,
        optional: false,
        children: p.children()?,
    };
    let mut requires = Vec::new();
    let mut refines = Vec::new();
    loop {
        if p.at_keyword("requires") {
            p.pos += 1;
            let a = p.ident()?;
            p.expect(Tok::Arrow)?;
            let b = p.ident()?;
            p.expect(Tok::Semi)?;
            requires.push((a, b));
        } else if p.at_keyword("refines") {
            p.pos += 1;
            let from = p.ident()?;
            p.expect(Tok::Arrow)?;
            let to = p.ident()?;
            let evidence = match p.peek() {
                Some(Tok::Str(s)) => s.clone(),
                _ => return p.err("refines edge needs a quoted evidence reference"),
            };
            p.pos += 1;
            p.expect(Tok::Semi)?;
            refines.push(RefinementEdge { from, to, evidence });
        } else {
            break;
        }
    }
    p.expect(Tok::RBrace)?;
    if p.peek().is_some() {
        return p.err("trailing input after feature model");
    }
    let fm = FeatureModel {
        name,
        root,
        requires,
        refines,
    };
    fm.check()?;
    Ok(fm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Abbreviation {
    Hierarchy,
    MultiTrigger,
}

/// One configuration of every variation point. `None` fields are variation
/// points left open: mapping points then denote the union over their
/// variants, syntax points fall back to the base language.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariantSelection {
    pub selected: BTreeSet<String>,
    pub presentation: BTreeSet<Notation>,
    pub abbreviations: BTreeSet<Abbreviation>,
    pub stereotypes: Vec<StereotypePattern>,
    pub guard_language: Option<GuardLanguage>,
    pub constraints: BTreeSet<ConstraintId>,
    pub priority: Option<Priority>,
    pub unmatched: Option<Unmatched>,
    pub realization: Option<Realization>,
}

impl VariantSelection {
    /// The fully open selection: nothing chosen.
    pub fn base() -> Self {
        VariantSelection::default()
    }

    /// Resolves feature names to variation-point views without checking
    /// them against a feature model; later alternatives of one xor group
    /// override earlier ones. Use `FeatureModel::validate_config` for
    /// checked selections.
    pub fn from_features<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = VariantSelection::base();
        for n in names {
            let n = n.as_ref();
            v.selected.insert(n.to_owned());
            match n {
                "Keyword" => {
                    v.presentation.insert(Notation::Keyword);
                }
                "Hierarchy" => {
                    v.abbreviations.insert(Abbreviation::Hierarchy);
                }
                "MultiTrigger" => {
                    v.abbreviations.insert(Abbreviation::MultiTrigger);
                }
                "PrioOuter" => v
                    .stereotypes
                    .push(StereotypePattern::Exact(Stereotype::prio_outer())),
                "GL0" => v.guard_language = Some(GuardLanguage::Gl0),
                "GL1" => v.guard_language = Some(GuardLanguage::Gl1),
                "InnerFirst" => v.priority = Some(Priority::InnerFirst),
                "OuterFirst" => v.priority = Some(Priority::OuterFirst),
                "Chaos" => v.unmatched = Some(Unmatched::Chaos),
                "Stutter" => v.unmatched = Some(Unmatched::Stutter),
                "Open" => v.realization = Some(Realization::Open),
                "Enum" => v.realization = Some(Realization::Enum),
                "Pattern" => v.realization = Some(Realization::Pattern),
                other => {
                    if let Ok(c) = other.parse::<ConstraintId>() {
                        v.constraints.insert(c);
                    }
                }
            }
        }
        v
    }

    /// A selection enabling every syntactic construct of the workbench:
    /// both notations, both abbreviations, GL1 guards and any stereotype.
    pub fn permissive() -> Self {
        let mut v =
            VariantSelection::from_features(["Keyword", "Hierarchy", "MultiTrigger", "GL1"]);
        v.stereotypes = vec![StereotypePattern::Any];
        v
    }

    pub fn guard_language(&self) -> GuardLanguage {
        self.guard_language.unwrap_or(GuardLanguage::Gl0)
    }

    pub fn priority(&self) -> Priority {
        self.priority.unwrap_or(Priority::InnerFirst)
    }

    pub fn allows_notation(&self, n: Notation) -> bool {
        n == Notation::Arrow || self.presentation.contains(&n)
    }

    pub fn mapping(&self) -> PartialMapping {
        PartialMapping {
            unmatched: self.unmatched,
            realization: self.realization,
        }
    }
}

impl fmt::Display for VariantSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn open<T: fmt::Debug>(o: &Option<T>) -> String {
            o.as_ref().map_or("Unset".to_owned(), |v| format!("{v:?}"))
        }
        let set = |items: Vec<String>| {
            if items.is_empty() {
                "{}".to_owned()
            } else {
                format!("{{{}}}", items.join(", "))
            }
        };
        let mut rows: BTreeMap<&str, String> = BTreeMap::new();
        rows.insert("1 selected", set(self.selected.iter().cloned().collect()));
        rows.insert(
            "2 presentation",
            set(self.presentation.iter().map(|n| format!("{n:?}")).collect()),
        );
        rows.insert(
            "3 abbreviations",
            set(self
                .abbreviations
                .iter()
                .map(|a| format!("{a:?}"))
                .collect()),
        );
        rows.insert(
            "4 stereotypes",
            set(self.stereotypes.iter().map(|s| s.to_string()).collect()),
        );
        rows.insert("5 guard language", open(&self.guard_language));
        rows.insert(
            "6 constraints",
            set(self.constraints.iter().map(|c| c.to_string()).collect()),
        );
        rows.insert("7 priority", open(&self.priority));
        rows.insert("8 unmatched", open(&self.unmatched));
        rows.insert("9 realization", open(&self.realization));
        for (k, v) in rows {
            writeln!(f, "{:<16} {v}", &k[2..])?;
        }
        Ok(())
    }
}
