//! A finite object-based system model fragment: classes, a subclass
//! relation, operations with parameter sets and result types, and types
//! with carrier sets. Semantic-domain variants are predicates over it and
//! are compared by exhaustive enumeration within small bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    pub id: String,
    pub class: String,
    pub name: String,
    pub params: BTreeSet<String>,
    pub res_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MiniSystemModel {
    pub name: String,
    pub classes: BTreeSet<String>,
    /// Stored `(subclass, superclass)` pairs, before closure.
    pub sub: BTreeSet<(String, String)>,
    pub ops: Vec<Operation>,
    /// Carrier set of each type.
    pub types: BTreeMap<String, BTreeSet<String>>,
}

/// Reading of the subclass relation used by the predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubReading {
    /// Transitive closure of the stored pairs.
    #[default]
    Irreflexive,
    /// Transitive closure plus every `(c, c)`.
    Reflexive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("reflexive subclass pair {0} < {0}")]
    ReflexiveSub(String),
    #[error("subclass relation is cyclic through {0}")]
    CyclicSub(String),
    #[error("{context} refers to unknown class {name}")]
    UnknownClass { context: String, name: String },
    #[error("{context} refers to unknown type {name}")]
    UnknownType { context: String, name: String },
    #[error("duplicate {kind} {name}")]
    Duplicate { kind: &'static str, name: String },
    #[error("unknown property `{0}` (known: TypeSafeOps, TypeSafeOpsStrict, SingleInheritance)")]
    UnknownProp(String),
    #[error("invalid bounds: {0}")]
    Bounds(String),
}

impl MiniSystemModel {
    pub fn new(name: impl Into<String>) -> Self {
        MiniSystemModel {
            name: name.into(),
            classes: BTreeSet::new(),
            sub: BTreeSet::new(),
            ops: Vec::new(),
            types: BTreeMap::new(),
        }
    }

    pub fn car(&self, ty: &str) -> Option<&BTreeSet<String>> {
        self.types.get(ty)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), SmError> {
        for (c, p) in &self.sub {
            if c == p {
                return Err(SmError::ReflexiveSub(c.clone()));
            }
            for x in [c, p] {
                if !self.classes.contains(x) {
                    return Err(SmError::UnknownClass {
                        context: format!("sub {c} < {p}"),
                        name: x.clone(),
                    });
                }
            }
        }
        if let Some((c, _)) = self
            .closure(SubReading::Irreflexive)
            .iter()
            .find(|(c, p)| c == p)
        {
            return Err(SmError::CyclicSub(c.clone()));
        }
        let mut ids = BTreeSet::new();
        for op in &self.ops {
            if !ids.insert(&op.id) {
                return Err(SmError::Duplicate {
                    kind: "operation",
                    name: op.id.clone(),
                });
            }
            if !self.classes.contains(&op.class) {
                return Err(SmError::UnknownClass {
                    context: format!("operation {}", op.id),
                    name: op.class.clone(),
                });
            }
            if !self.types.contains_key(&op.res_type) {
                return Err(SmError::UnknownType {
                    context: format!("operation {}", op.id),
                    name: op.res_type.clone(),
                });
            }
        }
        Ok(())
    }

    /// Transitive closure of the stored pairs under the given reading.
    pub fn closure(&self, reading: SubReading) -> BTreeSet<(String, String)> {
        let mut rel = self.sub.clone();
        loop {
            let extra: Vec<(String, String)> = rel
                .iter()
                .flat_map(|(a, b)| {
                    rel.iter()
                        .filter(move |(c, _)| c == b)
                        .map(move |(_, d)| (a.clone(), d.clone()))
                })
                .filter(|p| !rel.contains(p))
                .collect();
            if extra.is_empty() {
                break;
            }
            rel.extend(extra);
        }
        if reading == SubReading::Reflexive {
            rel.extend(self.classes.iter().map(|c| (c.clone(), c.clone())));
        }
        rel
    }

    fn carrier(&self, ty: &str) -> BTreeSet<String> {
        self.types.get(ty).cloned().unwrap_or_default()
    }

    fn overriding_ok(&self, reading: SubReading, strict: bool) -> bool {
        let closure = self.closure(reading);
        self.ops.iter().all(|op1| {
            let car1 = self.carrier(&op1.res_type);
            closure
                .iter()
                .filter(|(_, parent)| *parent == op1.class)
                .all(|(c, _)| {
                    self.ops.iter().any(|op2| {
                        let car2 = self.carrier(&op2.res_type);
                        op2.class == *c
                            && op2.name == op1.name
                            && if strict {
                                op1.params == op2.params && car1 == car2
                            } else {
                                op1.params.is_subset(&op2.params) && car2.is_subset(&car1)
                            }
                    })
                })
        })
    }
}

/// Co-variant parameter extension, contra-variant result carriers.
pub fn valid_type_safe_ops(sm: &MiniSystemModel) -> bool {
    sm.overriding_ok(SubReading::Irreflexive, false)
}

/// Overriding operations keep parameters and result carriers unchanged.
pub fn valid_type_safe_ops_strict(sm: &MiniSystemModel) -> bool {
    sm.overriding_ok(SubReading::Irreflexive, true)
}

/// At most one direct superclass per class in the stored pairs.
pub fn single_inheritance(sm: &MiniSystemModel) -> bool {
    let mut parents: BTreeMap<&str, usize> = BTreeMap::new();
    for (c, _) in &sm.sub {
        *parents.entry(c).or_default() += 1;
    }
    parents.values().all(|n| *n <= 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropId {
    TypeSafeOps,
    TypeSafeOpsStrict,
    SingleInheritance,
}

impl PropId {
    pub const REGISTRY: [PropId; 3] = [
        PropId::TypeSafeOps,
        PropId::TypeSafeOpsStrict,
        PropId::SingleInheritance,
    ];

    pub fn eval(&self, sm: &MiniSystemModel, reading: SubReading) -> bool {
        match self {
            PropId::TypeSafeOps => sm.overriding_ok(reading, false),
            PropId::TypeSafeOpsStrict => sm.overriding_ok(reading, true),
            PropId::SingleInheritance => single_inheritance(sm),
        }
    }
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropId::TypeSafeOps => "TypeSafeOps",
            PropId::TypeSafeOpsStrict => "TypeSafeOpsStrict",
            PropId::SingleInheritance => "SingleInheritance",
        })
    }
}

impl FromStr for PropId {
    type Err = SmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropId::REGISTRY
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SmError::UnknownProp(s.to_string()))
    }
}

/// Conjunction of properties: the variant's domain is the set of models
/// satisfying all of them.
pub fn satisfies_all(sm: &MiniSystemModel, props: &[PropId], reading: SubReading) -> bool {
    props.iter().all(|p| p.eval(sm, reading))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SmBounds {
    pub max_classes: usize,
    pub max_ops: usize,
    pub max_types: usize,
    pub max_param_tokens: usize,
    pub max_value_tokens: usize,
}

/// Per-bound cap.
pub const SM_CAP: usize = 3;
/// Largest enumeration that will be run.
pub const SM_LIMIT: u128 = 20_000_000;

impl Default for SmBounds {
    fn default() -> Self {
        SmBounds::uniform(2)
    }
}

impl SmBounds {
    pub fn uniform(n: usize) -> Self {
        SmBounds {
            max_classes: n,
            max_ops: n,
            max_types: n,
            max_param_tokens: n,
            max_value_tokens: n,
        }
    }

    fn check(&self) -> Result<(), SmError> {
        let all = [
            ("classes", self.max_classes),
            ("ops", self.max_ops),
            ("types", self.max_types),
            ("param tokens", self.max_param_tokens),
            ("value tokens", self.max_value_tokens),
        ];
        for (what, v) in all {
            if v == 0 || v > SM_CAP {
                return Err(SmError::Bounds(format!(
                    "{what} bound {v} outside 1..={SM_CAP}"
                )));
            }
        }
        let estimate = self.estimate();
        if estimate > SM_LIMIT {
            return Err(SmError::Bounds(format!(
                "about {estimate} system models exceed the limit of {SM_LIMIT}"
            )));
        }
        Ok(())
    }

    /// Exact number of labeled models within these bounds.
    pub fn estimate(&self) -> u128 {
        let mut total: u128 = 0;
        for n in 1..=self.max_classes {
            let subs = acyclic_relations(n).len() as u128;
            for k in 1..=self.max_ops {
                for t in 1..=self.max_types {
                    let per_op = (n * self.max_ops * (1 << self.max_param_tokens) * t) as u128;
                    let per_type = 1u128 << self.max_value_tokens;
                    total += subs * per_op.pow(k as u32) * per_type.pow(t as u32);
                }
            }
        }
        total
    }
}

/// `default`, a single number for every bound, or `key=value` pairs over
/// `classes`, `ops`, `types`, `params`, `values` (others stay at the default).
impl FromStr for SmBounds {
    type Err = SmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("default") {
            return Ok(SmBounds::default());
        }
        let num = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| SmError::Bounds(format!("`{v}` is not a number")))
        };
        if let Ok(n) = s.parse::<usize>() {
            return Ok(SmBounds::uniform(n));
        }
        let mut b = SmBounds::default();
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| SmError::Bounds(format!("expected key=value, found `{part}`")))?;
            let slot = match k.trim() {
                "classes" => &mut b.max_classes,
                "ops" => &mut b.max_ops,
                "types" => &mut b.max_types,
                "params" => &mut b.max_param_tokens,
                "values" => &mut b.max_value_tokens,
                other => return Err(SmError::Bounds(format!("unknown bound `{other}`"))),
            };
            *slot = num(v)?;
        }
        Ok(b)
    }
}

const CLASS_POOL: [&str; 3] = ["A", "B", "C"];
const NAME_POOL: [&str; 3] = ["foo", "bar", "baz"];

fn acyclic_relations(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
        .collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, p)| *p)
                .collect::<Vec<_>>()
        })
        .filter(|rel| is_acyclic(n, rel))
        .collect()
}

fn is_acyclic(n: usize, rel: &[(usize, usize)]) -> bool {
    // Kahn's algorithm
    let mut indeg = vec![0; n];
    for (_, p) in rel {
        indeg[*p] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|i| indeg[*i] == 0).collect();
    let mut seen = 0;
    while let Some(c) = ready.pop() {
        seen += 1;
        for (x, p) in rel {
            if *x == c {
                indeg[*p] -= 1;
                if indeg[*p] == 0 {
                    ready.push(*p);
                }
            }
        }
    }
    seen == n
}

#[derive(Debug, Clone)]
struct SmBlock {
    classes: usize,
    ops: usize,
    types: usize,
    offset: u64,
}

/// Every labeled system model within bounds, in a fixed order: class count,
/// operation count, type count, then subclass relation, carriers and
/// operation signatures as mixed-radix digits.
#[derive(Debug, Clone)]
pub struct SystemModelSpace {
    bounds: SmBounds,
    relations: Vec<Vec<Vec<(usize, usize)>>>,
    blocks: Vec<SmBlock>,
    len: u64,
}

impl SystemModelSpace {
    pub fn new(bounds: SmBounds) -> Result<Self, SmError> {
        bounds.check()?;
        let relations: Vec<_> = (0..=bounds.max_classes).map(acyclic_relations).collect();
        let mut blocks = Vec::new();
        let mut offset = 0u64;
        for (n, rels) in relations.iter().enumerate().skip(1) {
            for k in 1..=bounds.max_ops {
                for t in 1..=bounds.max_types {
                    blocks.push(SmBlock {
                        classes: n,
                        ops: k,
                        types: t,
                        offset,
                    });
                    let per_op = (n * bounds.max_ops * (1 << bounds.max_param_tokens) * t) as u64;
                    let per_type = 1u64 << bounds.max_value_tokens;
                    offset += rels.len() as u64 * per_op.pow(k as u32) * per_type.pow(t as u32);
                }
            }
        }
        Ok(SystemModelSpace {
            bounds,
            relations,
            blocks,
            len: offset,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: u64) -> MiniSystemModel {
        assert!(index < self.len, "system model index out of range");
        let b = self
            .blocks
            .iter()
            .rev()
            .find(|b| b.offset <= index)
            .expect("index inside some block");
        let mut rest = index - b.offset;
        let mut digit = |radix: usize| {
            let d = (rest % radix as u64) as usize;
            rest /= radix as u64;
            d
        };
        let bounds = &self.bounds;
        let mut sm = MiniSystemModel::new(format!("sm{index}"));
        sm.classes = CLASS_POOL[..b.classes]
            .iter()
            .map(|c| c.to_string())
            .collect();
        let rels = &self.relations[b.classes];
        for (c, p) in &rels[digit(rels.len())] {
            sm.sub
                .insert((CLASS_POOL[*c].to_string(), CLASS_POOL[*p].to_string()));
        }
        for t in 0..b.types {
            let mask = digit(1 << bounds.max_value_tokens);
            let car = (0..bounds.max_value_tokens)
                .filter(|v| mask >> v & 1 == 1)
                .map(|v| format!("v{}", v + 1))
                .collect();
            sm.types.insert(format!("T{}", t + 1), car);
        }
        for o in 0..b.ops {
            let class = digit(b.classes);
            let name = digit(bounds.max_ops);
            let mask = digit(1 << bounds.max_param_tokens);
            let ty = digit(b.types);
            sm.ops.push(Operation {
                id: format!("op{}", o + 1),
                class: CLASS_POOL[class].to_string(),
                name: NAME_POOL[name].to_string(),
                params: (0..bounds.max_param_tokens)
                    .filter(|p| mask >> p & 1 == 1)
                    .map(|p| format!("p{}", p + 1))
                    .collect(),
                res_type: format!("T{}", ty + 1),
            });
        }
        sm
    }

    pub fn iter(&self) -> impl Iterator<Item = MiniSystemModel> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

pub fn enumerate_system_models(bounds: SmBounds) -> Result<SystemModelSpace, SmError> {
    SystemModelSpace::new(bounds)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainReport {
    pub strong: PropId,
    pub weak: PropId,
    pub bounds: SmBounds,
    pub models_checked: u64,
    pub counterexamples: u64,
    /// First counterexample in enumeration order.
    pub first_counterexample: Option<MiniSystemModel>,
}

impl DomainReport {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }

    /// Plain-text evidence; identical inputs give identical text.
    pub fn render(&self) -> String {
        let b = &self.bounds;
        let mut out = format!(
            "check: domain refinement {} => {}\nverdict: {}\nproof: bounded\n\
             bounds: classes={} ops={} types={} param_tokens={} value_tokens={}\n\
             models checked: {}\ncounterexamples: {}\n",
            self.strong,
            self.weak,
            if self.passed() { "PASS" } else { "FAIL" },
            b.max_classes,
            b.max_ops,
            b.max_types,
            b.max_param_tokens,
            b.max_value_tokens,
            self.models_checked,
            self.counterexamples,
        );
        if let Some(sm) = &self.first_counterexample {
            out.push_str("counterexample:\n");
            for line in sm.to_string().lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

/// Checks `strong(sm) => weak(sm)` for every enumerated model.
pub fn check_domain_refinement(
    strong: PropId,
    weak: PropId,
    bounds: SmBounds,
    reading: SubReading,
) -> Result<DomainReport, SmError> {
    let space = enumerate_system_models(bounds)?;
    let fails = |i: &u64| {
        let sm = space.get(*i);
        strong.eval(&sm, reading) && !weak.eval(&sm, reading)
    };
    let counterexamples = (0..space.len()).into_par_iter().filter(fails).count() as u64;
    let first = (0..space.len())
        .into_par_iter()
        .find_first(fails)
        .map(|i| space.get(i));
    Ok(DomainReport {
        strong,
        weak,
        bounds,
        models_checked: space.len(),
        counterexamples,
        first_counterexample: first,
    })
}

/// The example in which a subclass widens an inherited operation's
/// parameters: type-safe, but not strictly so.
pub fn widened_params_model() -> MiniSystemModel {
    parse_sm(WIDENED_PARAMS_SMX).expect("fixture parses")
}

pub const WIDENED_PARAMS_SMX: &str = include_str!("../../../data/sysmodels/widened_params.smx");

impl fmt::Display for MiniSystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |it: &mut dyn Iterator<Item = &String>| {
            it.map(String::as_str).collect::<Vec<_>>().join(", ")
        };
        writeln!(f, "systemmodel {} {{", self.name)?;
        writeln!(f, "  classes {};", join(&mut self.classes.iter()))?;
        for (c, p) in &self.sub {
            writeln!(f, "  sub {c} < {p};")?;
        }
        for (t, car) in &self.types {
            if car.is_empty() {
                writeln!(f, "  type {t} = {{}};")?;
            } else {
                writeln!(f, "  type {t} = {{ {} }};", join(&mut car.iter()))?;
            }
        }
        for (k, op) in self.ops.iter().enumerate() {
            write!(f, "  op ")?;
            if op.id != format!("op{}", k + 1) {
                write!(f, "{} = ", op.id)?;
            }
            writeln!(
                f,
                "{}.{} params {{{}}} : {};",
                op.class,
                op.name,
                join(&mut op.params.iter()),
                op.res_type
            )?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Lexer {
    fn new(text: &str) -> Result<Self, SmError> {
        let mut toks = Vec::new();
        let (mut line, mut col) = (1, 1);
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            if c == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                col += 1;
                i += 1;
                continue;
            }
            if c.is_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), line, col));
                col += i - start;
                continue;
            }
            if "{};,<=.:".contains(c) {
                toks.push((Tok::Punct(c), line, col));
                col += 1;
                i += 1;
                continue;
            }
            return Err(SmError::Syntax {
                line,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
        Ok(Lexer {
            toks,
            pos: 0,
            end: (line, col),
        })
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |(_, l, c)| (*l, *c))
    }

    fn error(&self, message: String) -> SmError {
        let (line, column) = self.here();
        SmError::Syntax {
            line,
            column,
            message,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn ident(&mut self) -> Result<String, SmError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other:?}"))),
        }
    }

    fn eat(&mut self, p: char) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: char) -> Result<(), SmError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`")))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SmError> {
        let (line, column) = self.here();
        match self.ident()? {
            s if s == kw => Ok(()),
            s => Err(SmError::Syntax {
                line,
                column,
                message: format!("expected `{kw}`, found `{s}`"),
            }),
        }
    }

    /// `{ a, b }`, possibly empty.
    fn set(&mut self) -> Result<BTreeSet<String>, SmError> {
        self.expect('{')?;
        let mut out = BTreeSet::new();
        if self.eat('}') {
            return Ok(out);
        }
        loop {
            out.insert(self.ident()?);
            if self.eat('}') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }
}

/// Parses and validates the `.smx` text format.
pub fn parse_sm(text: &str) -> Result<MiniSystemModel, SmError> {
    let mut lx = Lexer::new(text)?;
    lx.keyword("systemmodel")?;
    let mut sm = MiniSystemModel::new(lx.ident()?);
    lx.expect('{')?;
    while !lx.eat('}') {
        let (line, column) = lx.here();
        match lx.ident()?.as_str() {
            "classes" => loop {
                let c = lx.ident()?;
                if !sm.classes.insert(c.clone()) {
                    return Err(SmError::Duplicate {
                        kind: "class",
                        name: c,
                    });
                }
                if !lx.eat(',') {
                    break;
                }
            },
            "sub" => {
                let c = lx.ident()?;
                lx.expect('<')?;
                let p = lx.ident()?;
                if c == p {
                    return Err(SmError::ReflexiveSub(c));
                }
                sm.sub.insert((c, p));
            }
            "type" => {
                let t = lx.ident()?;
                lx.expect('=')?;
                let car = lx.set()?;
                if sm.types.insert(t.clone(), car).is_some() {
                    return Err(SmError::Duplicate {
                        kind: "type",
                        name: t,
                    });
                }
            }
            "op" => {
                let first = lx.ident()?;
                let (id, class) = if lx.eat('=') {
                    (first, lx.ident()?)
                } else {
                    (format!("op{}", sm.ops.len() + 1), first)
                };
                lx.expect('.')?;
                let name = lx.ident()?;
                let params = if lx.peek() == Some(&Tok::Ident("params".into())) {
                    lx.pos += 1;
                    lx.set()?
                } else {
                    BTreeSet::new()
                };
                lx.expect(':')?;
                let res_type = lx.ident()?;
                sm.ops.push(Operation {
                    id,
                    class,
                    name,
                    params,
                    res_type,
                });
            }
            other => {
                return Err(SmError::Syntax {
                    line,
                    column,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
        lx.expect(';')?;
    }
    if lx.peek().is_some() {
        return Err(lx.error("trailing input after model".into()));
    }
    sm.validate()?;
    Ok(sm)
}
