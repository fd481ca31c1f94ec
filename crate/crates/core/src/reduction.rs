//! The reduction from well-formed to reduced abstract syntax: multi-trigger
//! expansion followed by hierarchy flattening.
//!
//! Flattening rules:
//!
//! * the states of the result are the leaves of the input;
//! * the initial state is the top-level initial state, followed through
//!   initial children down to a leaf;
//! * a transition targeting a composite is redirected to that composite's
//!   initial leaf;
//! * a transition sourced at a composite is replicated once per leaf below
//!   it;
//! * when replicas of different source depths compete for the same
//!   `(leaf, event)`, inner-first keeps only the deepest-sourced ones and
//!   outer-first only the shallowest-sourced ones. Guards are ignored for
//!   this decision and equal-depth competitors all survive;
//! * exact duplicates are dropped;
//! * `<<prio:outer>>` on the model forces outer-first and is consumed.
//!
//! Output order: scopes are visited children-first (a composite's body
//! before the scope that contains it), transitions in textual order within
//! a scope, replicas in leaf order. Reduced inputs therefore come out
//! unchanged.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::ast::{AbstractStatechart, GuardExpr, StateNode, Stereotype, TransitionNode};
use crate::feature_model::Abbreviation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Priority {
    InnerFirst,
    OuterFirst,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Priority::InnerFirst => "inner-first",
            Priority::OuterFirst => "outer-first",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatTransition {
    pub source: String,
    pub event: String,
    pub guard: GuardExpr,
    pub action: Option<String>,
    pub target: String,
}

impl FlatTransition {
    pub fn new(source: &str, event: &str, action: Option<&str>, target: &str) -> Self {
        FlatTransition {
            source: source.to_owned(),
            event: event.to_owned(),
            guard: GuardExpr::always(crate::ast::GuardLanguage::Gl0),
            action: action.map(str::to_owned),
            target: target.to_owned(),
        }
    }
}

/// Reduced abstract syntax: a flat automaton with single-event transitions.
#[derive(Debug, Clone, Eq)]
pub struct FlatAutomaton {
    pub name: String,
    pub stereotypes: BTreeSet<Stereotype>,
    /// Leaf states in declaration order, with their stereotypes.
    pub states: Vec<(String, BTreeSet<Stereotype>)>,
    pub initial: String,
    pub guard_vars: Vec<String>,
    pub declared_events: Vec<String>,
    pub declared_actions: Vec<String>,
    pub transitions: Vec<FlatTransition>,
}

/// Equality ignores the order of state declarations.
impl PartialEq for FlatAutomaton {
    fn eq(&self, other: &Self) -> bool {
        let sorted = |s: &[(String, BTreeSet<Stereotype>)]| {
            let mut v = s.to_vec();
            v.sort();
            v
        };
        self.name == other.name
            && self.stereotypes == other.stereotypes
            && self.initial == other.initial
            && self.guard_vars == other.guard_vars
            && self.declared_events == other.declared_events
            && self.declared_actions == other.declared_actions
            && self.transitions == other.transitions
            && sorted(&self.states) == sorted(&other.states)
    }
}

impl FlatAutomaton {
    /// A bare automaton over `states` (the first is initial).
    pub fn new(name: &str, states: &[&str], transitions: Vec<FlatTransition>) -> Self {
        FlatAutomaton {
            name: name.to_owned(),
            stereotypes: BTreeSet::new(),
            states: states
                .iter()
                .map(|s| ((*s).to_owned(), BTreeSet::new()))
                .collect(),
            initial: states.first().map(|s| (*s).to_owned()).unwrap_or_default(),
            guard_vars: Vec::new(),
            declared_events: Vec::new(),
            declared_actions: Vec::new(),
            transitions,
        }
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(|(n, _)| n.as_str())
    }

    /// Declared plus used events, sorted.
    pub fn events(&self) -> BTreeSet<String> {
        self.declared_events
            .iter()
            .cloned()
            .chain(self.transitions.iter().map(|t| t.event.clone()))
            .collect()
    }

    /// Declared plus used actions, sorted.
    pub fn actions(&self) -> BTreeSet<String> {
        self.declared_actions
            .iter()
            .cloned()
            .chain(self.transitions.iter().filter_map(|t| t.action.clone()))
            .collect()
    }

    /// Actions that label some transition.
    pub fn used_actions(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .filter_map(|t| t.action.clone())
            .collect()
    }

    /// Events that label some transition.
    pub fn used_events(&self) -> BTreeSet<String> {
        self.transitions.iter().map(|t| t.event.clone()).collect()
    }

    /// The same automaton as a (flat) abstract statechart.
    pub fn to_statechart(&self) -> AbstractStatechart {
        let mut m = AbstractStatechart::new(&self.name);
        m.stereotypes = self.stereotypes.clone();
        m.guard_vars = self.guard_vars.clone();
        m.declared_events = self.declared_events.clone();
        m.declared_actions = self.declared_actions.clone();
        m.states = self
            .states
            .iter()
            .map(|(n, st)| {
                let mut s = StateNode::leaf(n);
                s.is_initial = *n == self.initial;
                s.stereotypes = st.clone();
                s
            })
            .collect();
        m.transitions = self
            .transitions
            .iter()
            .map(|t| TransitionNode {
                source: t.source.clone(),
                events: vec![t.event.clone()],
                guard: t.guard.clone(),
                action: t.action.clone(),
                target: t.target.clone(),
            })
            .collect();
        m
    }
}

/// Replaces every transition with k > 1 events by k single-event
/// transitions, in order.
pub fn expand_multitrigger(m: &AbstractStatechart) -> AbstractStatechart {
    let mut out = m.clone();
    out.for_each_scope_mut(|ts| {
        *ts = ts
            .iter()
            .flat_map(|t| {
                t.events.iter().map(move |e| TransitionNode {
                    events: vec![e.clone()],
                    ..t.clone()
                })
            })
            .collect();
    });
    out
}

/// No composites, no multi-triggers, no stereotype that configures the
/// reduction itself, all transitions at top level and no exact duplicates.
pub fn is_reduced(m: &AbstractStatechart) -> bool {
    let mut seen = HashSet::new();
    !m.is_hierarchical()
        && !m.has_multitrigger()
        && !m.stereotypes.iter().any(Stereotype::is_prio)
        && m.states.iter().all(|s| s.transitions.is_empty())
        && m.transitions.iter().all(|t| seen.insert(t))
}

/// Whether `m` uses only abbreviations from `allowed`.
pub fn uses_only(m: &AbstractStatechart, allowed: &BTreeSet<Abbreviation>) -> bool {
    (!m.is_hierarchical() || allowed.contains(&Abbreviation::Hierarchy))
        && (!m.has_multitrigger() || allowed.contains(&Abbreviation::MultiTrigger))
}

struct Replica {
    t: FlatTransition,
    depth: usize,
}

pub(crate) fn flatten_traced(
    m: &AbstractStatechart,
    priority: Priority,
) -> (FlatAutomaton, Vec<usize>) {
    let m = expand_multitrigger(m);
    let priority = if m.stereotypes.contains(&Stereotype::prio_outer()) {
        Priority::OuterFirst
    } else {
        priority
    };

    let states = m.all_states();
    let by_name: BTreeMap<&str, (&StateNode, usize)> = states
        .iter()
        .map(|s| (s.node.name.as_str(), (s.node, s.depth)))
        .collect();
    let leaves_of = |name: &str| -> Vec<String> {
        by_name
            .get(name)
            .map(|(n, _)| n.leaves().into_iter().map(str::to_owned).collect())
            .unwrap_or_else(|| vec![name.to_owned()])
    };
    let resolve_target = |name: &str| -> String {
        by_name
            .get(name)
            .map(|(n, _)| n.initial_leaf().to_owned())
            .unwrap_or_else(|| name.to_owned())
    };

    fn scopes_children_first<'a>(
        states: &'a [StateNode],
        own: &'a [TransitionNode],
        out: &mut Vec<&'a TransitionNode>,
    ) {
        for s in states {
            scopes_children_first(&s.children, &s.transitions, out);
        }
        out.extend(own);
    }
    let mut ordered = Vec::new();
    scopes_children_first(&m.states, &m.transitions, &mut ordered);

    let mut replicas = Vec::new();
    for t in ordered {
        let depth = by_name.get(t.source.as_str()).map_or(1, |(_, d)| *d);
        let target = resolve_target(&t.target);
        for leaf in leaves_of(&t.source) {
            replicas.push(Replica {
                t: FlatTransition {
                    source: leaf,
                    event: t.events[0].clone(),
                    guard: t.guard.clone(),
                    action: t.action.clone(),
                    target: target.clone(),
                },
                depth,
            });
        }
    }

    let mut winning_depth: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for r in &replicas {
        let key = (r.t.source.as_str(), r.t.event.as_str());
        let d = winning_depth.entry(key).or_insert(r.depth);
        *d = match priority {
            Priority::InnerFirst => (*d).max(r.depth),
            Priority::OuterFirst => (*d).min(r.depth),
        };
    }
    let mut seen = HashSet::new();
    let mut transitions = Vec::new();
    let mut depths = Vec::new();
    for r in &replicas {
        if winning_depth[&(r.t.source.as_str(), r.t.event.as_str())] != r.depth {
            continue;
        }
        if seen.insert(r.t.clone()) {
            transitions.push(r.t.clone());
            depths.push(r.depth);
        }
    }

    let flat_states = states
        .iter()
        .filter(|s| s.node.is_leaf())
        .map(|s| (s.node.name.clone(), s.node.stereotypes.clone()))
        .collect();
    let flat = FlatAutomaton {
        name: m.name.clone(),
        stereotypes: m
            .stereotypes
            .iter()
            .filter(|s| !s.is_prio())
            .cloned()
            .collect(),
        states: flat_states,
        initial: m.initial_leaf().unwrap_or_default().to_owned(),
        guard_vars: m.guard_vars.clone(),
        declared_events: m.declared_events.clone(),
        declared_actions: m.declared_actions.clone(),
        transitions,
    };
    (flat, depths)
}

/// Flattens a well-formed model. Multi-triggers are expanded first, so
/// `flatten` alone is the complete reduction.
pub fn flatten(m: &AbstractStatechart, priority: Priority) -> FlatAutomaton {
    flatten_traced(m, priority).0
}

/// A reduction from models to flat automata, as used by the agreement check.
pub type ReduceFn<'a> = dyn Fn(&AbstractStatechart) -> FlatAutomaton + 'a;

#[derive(Debug, Clone, PartialEq)]
pub enum AbbrevFailure {
    /// The two reductions disagree on a model both accept.
    Disagreement {
        index: usize,
        base: Box<FlatAutomaton>,
        extended: Box<FlatAutomaton>,
    },
    /// The extended reduction's result is not a base model reducing to itself.
    NotExpressible { index: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AbbrevReport {
    pub models: usize,
    /// Models in the domain of both reductions.
    pub common: usize,
    /// Models in the extended domain only; each got a base witness.
    pub extended_only: usize,
    pub failure: Option<AbbrevFailure>,
}

impl AbbrevReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Agreement and expressibility of an extended abbreviation variant with
/// respect to a base variant, using `flatten` (inner-first) for both.
pub fn check_abbrev_agreement(
    corpus: &[AbstractStatechart],
    base: &BTreeSet<Abbreviation>,
    extended: &BTreeSet<Abbreviation>,
) -> AbbrevReport {
    let t = |m: &AbstractStatechart| flatten(m, Priority::InnerFirst);
    check_abbrev_agreement_with(corpus, base, extended, &t, &t)
}

pub fn check_abbrev_agreement_with(
    corpus: &[AbstractStatechart],
    base: &BTreeSet<Abbreviation>,
    extended: &BTreeSet<Abbreviation>,
    reduce_base: &ReduceFn<'_>,
    reduce_extended: &ReduceFn<'_>,
) -> AbbrevReport {
    let mut report = AbbrevReport {
        models: corpus.len(),
        ..Default::default()
    };
    for (index, m) in corpus.iter().enumerate() {
        if !uses_only(m, extended) {
            continue;
        }
        let ext = reduce_extended(m);
        let failure = if uses_only(m, base) {
            report.common += 1;
            let b = reduce_base(m);
            (b != ext).then(|| AbbrevFailure::Disagreement {
                index,
                base: Box::new(b),
                extended: Box::new(ext),
            })
        } else {
            report.extended_only += 1;
            let witness = ext.to_statechart();
            if !uses_only(&witness, base) || !is_reduced(&witness) {
                Some(AbbrevFailure::NotExpressible {
                    index,
                    reason: "reduced form still uses an abbreviation".into(),
                })
            } else if reduce_base(&witness) != ext {
                Some(AbbrevFailure::NotExpressible {
                    index,
                    reason: "base reduction of the witness differs".into(),
                })
            } else {
                None
            }
        };
        if report.failure.is_none() {
            report.failure = failure;
        }
    }
    report
}
