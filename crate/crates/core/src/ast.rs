//! Abstract syntax of the statechart language.
//!
//! A model is a forest of states plus transitions owned by the scope they
//! were written in. `wellformed` carves out the well-formed subset; the
//! stereotype allow-list and the constraint registry carve out variant
//! sub-languages of it. Guards are the language-parameter seam: each guard
//! is tagged with the sublanguage that produced it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use thiserror::Error;

/// Words that the concrete syntax reserves and which therefore cannot name
/// states, events, actions or guard variables.
pub const RESERVED: &[&str] = &[
    "statechart",
    "state",
    "initial",
    "vars",
    "events",
    "actions",
    "from",
    "on",
    "do",
    "goto",
    "true",
];

/// True if `s` lexes as a single identifier that is not reserved.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stereotype {
    pub name: String,
    pub value: Option<String>,
}

impl Stereotype {
    pub fn new(name: impl Into<String>, value: Option<&str>) -> Self {
        Stereotype {
            name: name.into(),
            value: value.map(str::to_owned),
        }
    }

    /// The `<<prio:outer>>` marker that switches hierarchy flattening to
    /// outer-first priority.
    pub fn prio_outer() -> Self {
        Stereotype::new("prio", Some("outer"))
    }

    pub fn is_prio(&self) -> bool {
        self.name == "prio"
    }
}

impl fmt::Display for Stereotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Some(v) => write!(f, "{}:{}", self.name, v),
            None => f.write_str(&self.name),
        }
    }
}

/// One entry of a stereotype allow-list.
///
/// Textual forms: `*` (anything), `name:*` (any value), `name:value` and
/// `name` (exactly that stereotype, without a value).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StereotypePattern {
    Any,
    AnyValue(String),
    Exact(Stereotype),
}

impl StereotypePattern {
    pub fn matches(&self, s: &Stereotype) -> bool {
        match self {
            StereotypePattern::Any => true,
            StereotypePattern::AnyValue(name) => &s.name == name,
            StereotypePattern::Exact(e) => e == s,
        }
    }
}

impl FromStr for StereotypePattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "*" {
            return Ok(StereotypePattern::Any);
        }
        let (name, value) = match s.split_once(':') {
            Some((n, v)) => (n.trim(), Some(v.trim())),
            None => (s, None),
        };
        if name.is_empty() {
            return Err(format!("empty stereotype name in pattern `{s}`"));
        }
        Ok(match value {
            Some("*") => StereotypePattern::AnyValue(name.to_owned()),
            Some("") => return Err(format!("empty stereotype value in pattern `{s}`")),
            v => StereotypePattern::Exact(Stereotype::new(name, v)),
        })
    }
}

impl fmt::Display for StereotypePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StereotypePattern::Any => f.write_str("*"),
            StereotypePattern::AnyValue(n) => write!(f, "{n}:*"),
            StereotypePattern::Exact(s) => write!(f, "{s}"),
        }
    }
}

/// Guard sublanguages that can be plugged into the transition grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GuardLanguage {
    /// Only the trivial guard: absent or `true`.
    Gl0,
    /// Conjunctions of possibly negated guard variables.
    Gl1,
}

impl GuardLanguage {
    pub const REGISTRY: &'static [GuardLanguage] = &[GuardLanguage::Gl0, GuardLanguage::Gl1];

    pub fn id(self) -> &'static str {
        match self {
            GuardLanguage::Gl0 => "GL0",
            GuardLanguage::Gl1 => "GL1",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::REGISTRY
            .iter()
            .copied()
            .find(|l| l.id().eq_ignore_ascii_case(id))
    }

    /// Whether `g` is a sentence of this sublanguage.
    pub fn admits(self, g: &Guard) -> bool {
        match self {
            GuardLanguage::Gl0 => matches!(g, Guard::True),
            GuardLanguage::Gl1 => g.is_literal_conjunction(),
        }
    }
}

impl fmt::Display for GuardLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    True,
    Var(String),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("guard variable `{0}` has no value in the assignment")]
    MissingVariable(String),
}

impl Guard {
    pub fn var(name: &str) -> Guard {
        Guard::Var(name.to_owned())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(g: Guard) -> Guard {
        Guard::Not(Box::new(g))
    }

    pub fn and(a: Guard, b: Guard) -> Guard {
        Guard::And(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, assignment: &BTreeMap<String, bool>) -> Result<bool, GuardError> {
        Ok(match self {
            Guard::True => true,
            Guard::Var(v) => *assignment
                .get(v)
                .ok_or_else(|| GuardError::MissingVariable(v.clone()))?,
            Guard::Not(g) => !g.eval(assignment)?,
            Guard::And(a, b) => {
                // evaluate both sides so a missing variable is always reported
                let (a, b) = (a.eval(assignment)?, b.eval(assignment)?);
                a && b
            }
        })
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Guard::True => {}
            Guard::Var(v) => {
                out.insert(v);
            }
            Guard::Not(g) => g.collect_vars(out),
            Guard::And(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn is_literal_conjunction(&self) -> bool {
        match self {
            Guard::True | Guard::Var(_) => true,
            Guard::Not(g) => matches!(**g, Guard::Var(_)),
            Guard::And(a, b) => a.is_literal_conjunction() && b.is_literal_conjunction(),
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => f.write_str("true"),
            Guard::Var(v) => f.write_str(v),
            Guard::Not(g) => match **g {
                Guard::And(..) => write!(f, "!({g})"),
                _ => write!(f, "!{g}"),
            },
            Guard::And(a, b) => {
                write!(f, "{a} & ")?;
                match **b {
                    Guard::And(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

/// A guard together with the sublanguage it was written in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuardExpr {
    pub language: GuardLanguage,
    pub expr: Guard,
}

impl GuardExpr {
    pub fn always(language: GuardLanguage) -> Self {
        GuardExpr {
            language,
            expr: Guard::True,
        }
    }

    pub fn gl1(expr: Guard) -> Self {
        Self::new(GuardLanguage::Gl1, expr)
    }

    /// Tags `expr` with `language`; the trivial guard is tagged GL0, the
    /// sublanguage every guard language contains.
    pub fn new(language: GuardLanguage, expr: Guard) -> Self {
        let language = if expr == Guard::True {
            GuardLanguage::Gl0
        } else {
            language
        };
        GuardExpr { language, expr }
    }

    pub fn is_trivial(&self) -> bool {
        self.expr == Guard::True
    }

    pub fn eval(&self, assignment: &BTreeMap<String, bool>) -> Result<bool, GuardError> {
        match self.language {
            GuardLanguage::Gl0 => Ok(true),
            GuardLanguage::Gl1 => self.expr.eval(assignment),
        }
    }
}

/// Evaluates `g` under `assignment`; every variable of `g` must be bound.
pub fn guard_eval(g: &GuardExpr, assignment: &BTreeMap<String, bool>) -> Result<bool, GuardError> {
    g.eval(assignment)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionNode {
    pub source: String,
    /// More than one entry only before multi-trigger expansion.
    pub events: Vec<String>,
    pub guard: GuardExpr,
    pub action: Option<String>,
    pub target: String,
}

impl TransitionNode {
    pub fn simple(source: &str, event: &str, target: &str) -> Self {
        TransitionNode {
            source: source.to_owned(),
            events: vec![event.to_owned()],
            guard: GuardExpr::always(GuardLanguage::Gl0),
            action: None,
            target: target.to_owned(),
        }
    }

    pub fn with_action(mut self, action: &str) -> Self {
        self.action = Some(action.to_owned());
        self
    }

    pub fn with_guard(mut self, guard: GuardExpr) -> Self {
        self.guard = guard;
        self
    }

    pub fn with_events(mut self, events: &[&str]) -> Self {
        self.events = events.iter().map(|e| (*e).to_owned()).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateNode {
    pub name: String,
    pub is_initial: bool,
    pub stereotypes: BTreeSet<Stereotype>,
    /// Empty for leaves.
    pub children: Vec<StateNode>,
    /// Transitions written inside this state's body.
    pub transitions: Vec<TransitionNode>,
}

impl StateNode {
    pub fn leaf(name: &str) -> Self {
        StateNode {
            name: name.to_owned(),
            is_initial: false,
            stereotypes: BTreeSet::new(),
            children: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn initial(mut self) -> Self {
        self.is_initial = true;
        self
    }

    pub fn with_children(mut self, children: Vec<StateNode>) -> Self {
        self.children = children;
        self
    }

    pub fn with_transitions(mut self, transitions: Vec<TransitionNode>) -> Self {
        self.transitions = transitions;
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaf names under (and including) this state, in declaration order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.name);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    /// Follows initial children down to a leaf. Falls back to the first
    /// child when a scope has no initial marker (only on ill-formed input).
    pub fn initial_leaf(&self) -> &str {
        if self.is_leaf() {
            return &self.name;
        }
        self.children
            .iter()
            .find(|c| c.is_initial)
            .unwrap_or(&self.children[0])
            .initial_leaf()
    }

    fn canonicalize(&mut self) {
        for c in &mut self.children {
            c.canonicalize();
        }
        self.children.sort_by(|a, b| a.name.cmp(&b.name));
    }
}

/// A state visited during a traversal, with its nesting depth (top level = 1).
#[derive(Debug, Clone, Copy)]
pub struct StateRef<'a> {
    pub node: &'a StateNode,
    pub depth: usize,
    pub parent: Option<&'a StateNode>,
}

/// Identifies the scope owning a transition: `None` is the model body.
pub type ScopeId = Option<String>;

#[derive(Debug, Clone, Eq)]
pub struct AbstractStatechart {
    pub name: String,
    pub stereotypes: BTreeSet<Stereotype>,
    pub guard_vars: Vec<String>,
    /// Interface declarations; events and actions used by transitions are
    /// part of the interface whether declared or not.
    pub declared_events: Vec<String>,
    pub declared_actions: Vec<String>,
    pub states: Vec<StateNode>,
    pub transitions: Vec<TransitionNode>,
}

/// Structural equality: the order of state declarations is irrelevant, the
/// order of transitions within a scope is not.
impl PartialEq for AbstractStatechart {
    fn eq(&self, other: &Self) -> bool {
        if self.name != other.name
            || self.stereotypes != other.stereotypes
            || self.guard_vars != other.guard_vars
            || self.declared_events != other.declared_events
            || self.declared_actions != other.declared_actions
            || self.transitions != other.transitions
        {
            return false;
        }
        self.canonical().states == other.canonical().states
    }
}

impl Hash for AbstractStatechart {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.name.hash(h);
        self.stereotypes.hash(h);
        self.guard_vars.hash(h);
        self.declared_events.hash(h);
        self.declared_actions.hash(h);
        self.transitions.hash(h);
        self.canonical().states.hash(h);
    }
}

impl AbstractStatechart {
    pub fn new(name: &str) -> Self {
        AbstractStatechart {
            name: name.to_owned(),
            stereotypes: BTreeSet::new(),
            guard_vars: Vec::new(),
            declared_events: Vec::new(),
            declared_actions: Vec::new(),
            states: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn with_states(mut self, states: Vec<StateNode>) -> Self {
        self.states = states;
        self
    }

    pub fn with_transitions(mut self, transitions: Vec<TransitionNode>) -> Self {
        self.transitions = transitions;
        self
    }

    /// Copy with state children sorted by name at every level.
    pub fn canonical(&self) -> AbstractStatechart {
        let mut m = self.clone();
        for s in &mut m.states {
            s.canonicalize();
        }
        m.states.sort_by(|a, b| a.name.cmp(&b.name));
        m
    }

    /// All states in depth-first declaration order.
    pub fn all_states(&self) -> Vec<StateRef<'_>> {
        fn walk<'a>(
            nodes: &'a [StateNode],
            depth: usize,
            parent: Option<&'a StateNode>,
            out: &mut Vec<StateRef<'a>>,
        ) {
            for n in nodes {
                out.push(StateRef {
                    node: n,
                    depth,
                    parent,
                });
                walk(&n.children, depth + 1, Some(n), out);
            }
        }
        let mut out = Vec::new();
        walk(&self.states, 1, None, &mut out);
        out
    }

    pub fn find_state(&self, name: &str) -> Option<StateRef<'_>> {
        self.all_states().into_iter().find(|s| s.node.name == name)
    }

    pub fn leaves(&self) -> Vec<&str> {
        self.states.iter().flat_map(|s| s.leaves()).collect()
    }

    /// Resolved initial leaf of the top-level scope.
    pub fn initial_leaf(&self) -> Option<&str> {
        let top = self
            .states
            .iter()
            .find(|s| s.is_initial)
            .or(self.states.first())?;
        Some(top.initial_leaf())
    }

    pub fn max_depth(&self) -> usize {
        self.all_states().iter().map(|s| s.depth).max().unwrap_or(0)
    }

    pub fn is_hierarchical(&self) -> bool {
        self.states.iter().any(|s| !s.is_leaf())
    }

    pub fn has_multitrigger(&self) -> bool {
        self.transitions_by_scope()
            .iter()
            .any(|(_, t)| t.events.len() > 1)
    }

    /// Every transition with its owning scope, model body first, then states
    /// in depth-first declaration order.
    pub fn transitions_by_scope(&self) -> Vec<(ScopeId, &TransitionNode)> {
        let mut out: Vec<(ScopeId, &TransitionNode)> =
            self.transitions.iter().map(|t| (None, t)).collect();
        for s in self.all_states() {
            out.extend(
                s.node
                    .transitions
                    .iter()
                    .map(|t| (Some(s.node.name.clone()), t)),
            );
        }
        out
    }

    /// Declared plus used events, sorted.
    pub fn events(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.declared_events.iter().cloned().collect();
        for (_, t) in self.transitions_by_scope() {
            out.extend(t.events.iter().cloned());
        }
        out
    }

    /// Declared plus used actions, sorted.
    pub fn actions(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.declared_actions.iter().cloned().collect();
        for (_, t) in self.transitions_by_scope() {
            out.extend(t.action.iter().cloned());
        }
        out
    }

    /// Stereotypes on the model and on every state.
    pub fn all_stereotypes(&self) -> Vec<&Stereotype> {
        let mut out: Vec<&Stereotype> = self.stereotypes.iter().collect();
        for s in self.all_states() {
            out.extend(s.node.stereotypes.iter());
        }
        out
    }

    /// Calls `f` on every transition list, model body first.
    pub fn for_each_scope_mut(&mut self, mut f: impl FnMut(&mut Vec<TransitionNode>)) {
        fn walk(nodes: &mut [StateNode], f: &mut impl FnMut(&mut Vec<TransitionNode>)) {
            for n in nodes {
                f(&mut n.transitions);
                walk(&mut n.children, f);
            }
        }
        f(&mut self.transitions);
        walk(&mut self.states, &mut f);
    }
}

/// Where in a model a violation sits; the parser maps these to positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Origin {
    Model,
    State(String),
    Scope(ScopeId),
    Transition { scope: ScopeId, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("unknown source {name}")]
    UnknownSource {
        scope: ScopeId,
        index: usize,
        name: String,
    },
    #[error("unknown target {name}")]
    UnknownTarget {
        scope: ScopeId,
        index: usize,
        name: String,
    },
    #[error("duplicate state {name}")]
    DuplicateState { name: String },
    #[error("{} has {count} initial states, expected exactly one", scope_label(.scope))]
    InitialCount { scope: ScopeId, count: usize },
    #[error("undeclared guard variable {name}")]
    UndeclaredGuardVar {
        scope: ScopeId,
        index: usize,
        name: String,
    },
    #[error("guard `{guard}` is not a {language} guard")]
    GuardOutsideLanguage {
        scope: ScopeId,
        index: usize,
        guard: String,
        language: GuardLanguage,
    },
    #[error("transition without trigger")]
    EmptyTrigger { scope: ScopeId, index: usize },
    #[error("`{name}` is not a valid identifier")]
    InvalidIdentifier { origin: Origin, name: String },
}

fn scope_label(scope: &ScopeId) -> String {
    match scope {
        None => "top level".to_owned(),
        Some(s) => format!("state {s}"),
    }
}

impl Violation {
    pub fn origin(&self) -> Origin {
        match self {
            Violation::UnknownSource { scope, index, .. }
            | Violation::UnknownTarget { scope, index, .. }
            | Violation::UndeclaredGuardVar { scope, index, .. }
            | Violation::GuardOutsideLanguage { scope, index, .. }
            | Violation::EmptyTrigger { scope, index } => Origin::Transition {
                scope: scope.clone(),
                index: *index,
            },
            Violation::DuplicateState { name } => Origin::State(name.clone()),
            Violation::InitialCount { scope, .. } => Origin::Scope(scope.clone()),
            Violation::InvalidIdentifier { origin, .. } => origin.clone(),
        }
    }
}

/// Result of the well-formedness predicate: all violations, not just the first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WellFormedness {
    pub violations: Vec<Violation>,
}

impl WellFormedness {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn wellformed(m: &AbstractStatechart) -> WellFormedness {
    let mut violations = Vec::new();
    let ident = |origin: Origin, name: &str, out: &mut Vec<Violation>| {
        if !is_identifier(name) {
            out.push(Violation::InvalidIdentifier {
                origin,
                name: name.to_owned(),
            });
        }
    };

    ident(Origin::Model, &m.name, &mut violations);
    for n in m
        .guard_vars
        .iter()
        .chain(&m.declared_events)
        .chain(&m.declared_actions)
    {
        ident(Origin::Model, n, &mut violations);
    }

    let states = m.all_states();
    let mut seen = HashSet::new();
    for s in &states {
        ident(
            Origin::State(s.node.name.clone()),
            &s.node.name,
            &mut violations,
        );
        if !seen.insert(s.node.name.as_str()) {
            violations.push(Violation::DuplicateState {
                name: s.node.name.clone(),
            });
        }
    }

    let initial_count = |nodes: &[StateNode]| nodes.iter().filter(|n| n.is_initial).count();
    let top = initial_count(&m.states);
    if top != 1 {
        violations.push(Violation::InitialCount {
            scope: None,
            count: top,
        });
    }
    for s in &states {
        if !s.node.is_leaf() {
            let c = initial_count(&s.node.children);
            if c != 1 {
                violations.push(Violation::InitialCount {
                    scope: Some(s.node.name.clone()),
                    count: c,
                });
            }
        }
    }

    let declared_vars: HashSet<&str> = m.guard_vars.iter().map(String::as_str).collect();
    let scopes: Vec<(ScopeId, &Vec<TransitionNode>)> = std::iter::once((None, &m.transitions))
        .chain(
            states
                .iter()
                .map(|s| (Some(s.node.name.clone()), &s.node.transitions)),
        )
        .collect();
    for (scope, ts) in scopes {
        for (index, t) in ts.iter().enumerate() {
            let origin = Origin::Transition {
                scope: scope.clone(),
                index,
            };
            if !seen.contains(t.source.as_str()) {
                violations.push(Violation::UnknownSource {
                    scope: scope.clone(),
                    index,
                    name: t.source.clone(),
                });
            }
            if !seen.contains(t.target.as_str()) {
                violations.push(Violation::UnknownTarget {
                    scope: scope.clone(),
                    index,
                    name: t.target.clone(),
                });
            }
            if t.events.is_empty() {
                violations.push(Violation::EmptyTrigger {
                    scope: scope.clone(),
                    index,
                });
            }
            for e in t.events.iter().chain(&t.action) {
                ident(origin.clone(), e, &mut violations);
            }
            for v in t.guard.expr.variables() {
                if !declared_vars.contains(v) {
                    violations.push(Violation::UndeclaredGuardVar {
                        scope: scope.clone(),
                        index,
                        name: v.to_owned(),
                    });
                }
            }
            if !t.guard.language.admits(&t.guard.expr) {
                violations.push(Violation::GuardOutsideLanguage {
                    scope: scope.clone(),
                    index,
                    guard: t.guard.expr.to_string(),
                    language: t.guard.language,
                });
            }
        }
    }

    WellFormedness { violations }
}

/// True iff every stereotype on the model or any of its states matches
/// some entry of `allow`.
pub fn allowed_stereotypes(m: &AbstractStatechart, allow: &[StereotypePattern]) -> bool {
    m.all_stereotypes()
        .into_iter()
        .all(|s| allow.iter().any(|p| p.matches(s)))
}

/// Syntactic language constraints, registered by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintId {
    /// No two transitions whose sources share a leaf react to a common
    /// event under guards that can hold simultaneously.
    DetOnly,
    /// State nesting depth at most two.
    MaxDepth2,
    /// Every state is a leaf.
    NoHierarchy,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown constraint `{0}` (known: DetOnly, MaxDepth2, NoHierarchy)")]
pub struct UnknownConstraint(pub String);

impl ConstraintId {
    pub const REGISTRY: &'static [ConstraintId] = &[
        ConstraintId::DetOnly,
        ConstraintId::MaxDepth2,
        ConstraintId::NoHierarchy,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ConstraintId::DetOnly => "DetOnly",
            ConstraintId::MaxDepth2 => "MaxDepth2",
            ConstraintId::NoHierarchy => "NoHierarchy",
        }
    }
}

impl FromStr for ConstraintId {
    type Err = UnknownConstraint;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::REGISTRY
            .iter()
            .copied()
            .find(|c| c.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownConstraint(s.to_owned()))
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

pub fn apply_constraint(m: &AbstractStatechart, c: ConstraintId) -> bool {
    match c {
        ConstraintId::DetOnly => is_deterministic(m),
        ConstraintId::MaxDepth2 => m.max_depth() <= 2,
        ConstraintId::NoHierarchy => !m.is_hierarchical(),
    }
}

fn is_deterministic(m: &AbstractStatechart) -> bool {
    let leaves_of = |name: &str| -> BTreeSet<String> {
        m.find_state(name)
            .map(|s| s.node.leaves().into_iter().map(str::to_owned).collect())
            .unwrap_or_default()
    };
    let ts: Vec<&TransitionNode> = m
        .transitions_by_scope()
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    let leaf_sets: Vec<BTreeSet<String>> = ts.iter().map(|t| leaves_of(&t.source)).collect();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let (a, b) = (ts[i], ts[j]);
            if leaf_sets[i].is_disjoint(&leaf_sets[j]) {
                continue;
            }
            if !a.events.iter().any(|e| b.events.contains(e)) {
                continue;
            }
            if guards_overlap(&a.guard, &b.guard) {
                return false;
            }
        }
    }
    true
}

/// Whether some assignment satisfies both guards, by enumerating the
/// variables the two guards mention.
pub fn guards_overlap(a: &GuardExpr, b: &GuardExpr) -> bool {
    let vars: Vec<&str> = a
        .expr
        .variables()
        .union(&b.expr.variables())
        .copied()
        .collect();
    let overlap = all_assignments(&vars)
        .any(|asg| a.eval(&asg).unwrap_or(false) && b.eval(&asg).unwrap_or(false));
    overlap
}

/// Every total assignment over `vars`, in binary counting order with the
/// first variable as the most significant bit.
pub fn all_assignments<'a, S: AsRef<str>>(
    vars: &'a [S],
) -> impl Iterator<Item = BTreeMap<String, bool>> + 'a {
    let n = vars.len();
    (0u64..1 << n).map(move |bits| {
        vars.iter()
            .enumerate()
            .map(|(i, v)| (v.as_ref().to_owned(), bits >> (n - 1 - i) & 1 == 1))
            .collect()
    })
}
