//! Set-valued semantics of flat automata over a bounded machine domain.
//!
//! A [`Machine`] is a total, possibly nondeterministic input/output machine
//! with a realization tag. Inputs are an event plus a total assignment to
//! the model's guard variables; outputs are an action or ε. A machine
//! conforms to a model under a [`MappingSelection`] if a simulation-style
//! relation links its initial state to the model's initial state:
//!
//! * where the model has enabled transitions for an input, every move of
//!   the machine must be matched by one of them (same output, related
//!   successor);
//! * where none is enabled, `Stutter` demands ε and no state change while
//!   `Chaos` allows anything;
//! * `Enum`/`Pattern` realization demand the corresponding tag, `Open`
//!   accepts any.
//!
//! The relation is computed as a greatest fixpoint: start from all pairs
//! and delete violating ones until stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::all_assignments;
use crate::reduction::FlatAutomaton;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unmatched {
    Chaos,
    Stutter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Realization {
    Open,
    Enum,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RealizationTag {
    Enum,
    Pattern,
    Other,
}

impl RealizationTag {
    pub const ALL: [RealizationTag; 3] = [
        RealizationTag::Enum,
        RealizationTag::Pattern,
        RealizationTag::Other,
    ];
}

impl fmt::Display for RealizationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RealizationTag::Enum => "enum",
            RealizationTag::Pattern => "pattern",
            RealizationTag::Other => "other",
        })
    }
}

impl FromStr for RealizationTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "enum" => Ok(RealizationTag::Enum),
            "pattern" => Ok(RealizationTag::Pattern),
            "other" => Ok(RealizationTag::Other),
            other => Err(format!("unknown realization tag `{other}`")),
        }
    }
}

/// A fully-set choice for both semantic-mapping variation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MappingSelection {
    pub unmatched: Unmatched,
    pub realization: Realization,
}

impl MappingSelection {
    pub const fn new(unmatched: Unmatched, realization: Realization) -> Self {
        MappingSelection {
            unmatched,
            realization,
        }
    }

    /// Every fully-set selection, weakest first.
    pub const ALL: [MappingSelection; 6] = [
        MappingSelection::new(Unmatched::Chaos, Realization::Open),
        MappingSelection::new(Unmatched::Chaos, Realization::Enum),
        MappingSelection::new(Unmatched::Chaos, Realization::Pattern),
        MappingSelection::new(Unmatched::Stutter, Realization::Open),
        MappingSelection::new(Unmatched::Stutter, Realization::Enum),
        MappingSelection::new(Unmatched::Stutter, Realization::Pattern),
    ];

    /// Whether each clause of `self` implies the corresponding clause of
    /// `weaker` for every machine and model: Stutter implies Chaos, a
    /// concrete realization implies Open.
    pub fn pointwise_implies(&self, weaker: &MappingSelection) -> bool {
        let u = self.unmatched == weaker.unmatched || weaker.unmatched == Unmatched::Chaos;
        let r = self.realization == weaker.realization || weaker.realization == Realization::Open;
        u && r
    }

    fn tag_ok(&self, tag: RealizationTag) -> bool {
        match self.realization {
            Realization::Open => true,
            Realization::Enum => tag == RealizationTag::Enum,
            Realization::Pattern => tag == RealizationTag::Pattern,
        }
    }
}

impl fmt::Display for MappingSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = match self.unmatched {
            Unmatched::Chaos => "chaos",
            Unmatched::Stutter => "stutter",
        };
        let r = match self.realization {
            Realization::Open => "open",
            Realization::Enum => "enum",
            Realization::Pattern => "pattern",
        };
        write!(f, "{u},{r}")
    }
}

/// `"stutter,open"` style shorthand; both fields are required.
impl FromStr for MappingSelection {
    type Err = SemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PartialMapping::parse(s, false)?.require_full()
    }
}

/// A mapping selection whose variation points may be left open (`None`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PartialMapping {
    pub unmatched: Option<Unmatched>,
    pub realization: Option<Realization>,
}

impl PartialMapping {
    /// Parses `"unmatched,realization"` shorthand. With `open_is_unset`,
    /// `open` and omitted fields leave the variation point open instead of
    /// selecting the `Open` realization.
    pub fn parse(s: &str, open_is_unset: bool) -> Result<Self, SemError> {
        let mut out = PartialMapping::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "chaos" => out.unmatched = Some(Unmatched::Chaos),
                "stutter" => out.unmatched = Some(Unmatched::Stutter),
                "open" if open_is_unset => out.realization = None,
                "open" => out.realization = Some(Realization::Open),
                "enum" => out.realization = Some(Realization::Enum),
                "pattern" => out.realization = Some(Realization::Pattern),
                "unset" => {}
                other => return Err(SemError::Selection(format!("unknown variant `{other}`"))),
            }
        }
        Ok(out)
    }

    pub fn require_full(&self) -> Result<MappingSelection, SemError> {
        match (self.unmatched, self.realization) {
            (Some(u), Some(r)) => Ok(MappingSelection::new(u, r)),
            (None, _) => Err(SemError::Unset("unmatched-event mapping")),
            (_, None) => Err(SemError::Unset("state realization")),
        }
    }

    /// The fully-set selections this partial one stands for.
    pub fn completions(&self) -> Vec<MappingSelection> {
        MappingSelection::ALL
            .into_iter()
            .filter(|s| {
                self.unmatched.is_none_or(|u| u == s.unmatched)
                    && self.realization.is_none_or(|r| r == s.realization)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("machine and model alphabets differ")]
    AlphabetMismatch,
    #[error("sets were computed over different bounds or alphabets")]
    BoundsMismatch,
    #[error("no machine sets to intersect")]
    NoSets,
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("alphabet too large for enumeration: {events} events, {guard_vars} guard variables (limits: 2 events, 1 guard variable)")]
    AlphabetTooLarge { events: usize, guard_vars: usize },
    #[error("machine space too large: about {estimate} machines (limit {limit})")]
    TooLarge { estimate: String, limit: u64 },
    #[error("{0} is left open; a fully-set selection is required")]
    Unset(&'static str),
    #[error("invalid selection: {0}")]
    Selection(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Input {
    pub event: String,
    pub guard_assignment: BTreeMap<String, bool>,
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.event)?;
        if !self.guard_assignment.is_empty() {
            let parts: Vec<String> = self
                .guard_assignment
                .iter()
                .map(|(k, v)| format!("{k}={}", u8::from(*v)))
                .collect();
            write!(f, "{{{}}}", parts.join(","))?;
        }
        Ok(())
    }
}

/// An action, or ε for `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Output(pub Option<String>);

/// Input and output alphabets derived from a model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    pub events: Vec<String>,
    pub guard_vars: Vec<String>,
    pub actions: Vec<String>,
}

impl Alphabet {
    pub fn of(m: &FlatAutomaton) -> Self {
        Alphabet {
            events: m.events().into_iter().collect(),
            guard_vars: m.guard_vars.clone(),
            actions: m.actions().into_iter().collect(),
        }
    }

    /// Events in sorted order, each with every assignment in binary order.
    pub fn inputs(&self) -> Vec<Input> {
        self.events
            .iter()
            .flat_map(|e| {
                all_assignments(&self.guard_vars).map(move |a| Input {
                    event: e.clone(),
                    guard_assignment: a,
                })
            })
            .collect()
    }

    pub fn input_count(&self) -> usize {
        self.events.len() << self.guard_vars.len()
    }

    /// ε first, then the actions.
    pub fn outputs(&self) -> Vec<Output> {
        std::iter::once(Output(None))
            .chain(self.actions.iter().map(|a| Output(Some(a.clone()))))
            .collect()
    }

    pub fn output_count(&self) -> usize {
        self.actions.len() + 1
    }
}

/// One move of a machine: output index (0 = ε) and successor state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub output: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Machine {
    pub alphabet: Arc<Alphabet>,
    pub states: usize,
    pub init: usize,
    /// Moves for `(state, input)` at index `state * inputs + input`,
    /// sorted and never empty.
    pub moves: Vec<Vec<Move>>,
    pub tag: RealizationTag,
}

impl Machine {
    /// Builds a machine from explicit steps `(from, input, output, to)`,
    /// checking totality.
    pub fn from_steps(
        alphabet: Arc<Alphabet>,
        states: usize,
        init: usize,
        steps: &[(usize, usize, usize, usize)],
        tag: RealizationTag,
    ) -> Result<Self, SemError> {
        let inputs = alphabet.input_count();
        let outputs = alphabet.output_count();
        if states == 0 || init >= states {
            return Err(SemError::InvalidMachine(
                "bad state count or initial state".into(),
            ));
        }
        let mut moves = vec![Vec::new(); states * inputs];
        for &(from, input, output, to) in steps {
            if from >= states || to >= states || input >= inputs || output >= outputs {
                return Err(SemError::InvalidMachine(format!(
                    "step ({from}, {input}, {output}, {to}) out of range"
                )));
            }
            moves[from * inputs + input].push(Move { output, to });
        }
        for (k, ms) in moves.iter_mut().enumerate() {
            if ms.is_empty() {
                return Err(SemError::InvalidMachine(format!(
                    "no move for state q{} on input {}",
                    k / inputs,
                    k % inputs
                )));
            }
            ms.sort();
            ms.dedup();
        }
        Ok(Machine {
            alphabet,
            states,
            init,
            moves,
            tag,
        })
    }

    pub fn input_count(&self) -> usize {
        self.alphabet.input_count()
    }

    pub fn moves_of(&self, state: usize, input: usize) -> &[Move] {
        &self.moves[state * self.input_count() + input]
    }

    /// All steps `(from, input, output, to)`.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let n = self.input_count();
        self.moves
            .iter()
            .enumerate()
            .flat_map(move |(k, ms)| ms.iter().map(move |m| (k / n, k % n, m.output, m.to)))
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states];
        let mut stack = vec![self.init];
        seen[self.init] = true;
        while let Some(q) = stack.pop() {
            for i in 0..self.input_count() {
                for m in self.moves_of(q, i) {
                    if !seen[m.to] {
                        seen[m.to] = true;
                        stack.push(m.to);
                    }
                }
            }
        }
        seen
    }

    /// The same machine with state `q` renamed to `perm[q]`.
    pub fn renamed(&self, perm: &[usize]) -> Machine {
        let steps: Vec<_> = self
            .steps()
            .map(|(f, i, o, t)| (perm[f], i, o, perm[t]))
            .collect();
        Machine::from_steps(
            self.alphabet.clone(),
            self.states,
            perm[self.init],
            &steps,
            self.tag,
        )
        .expect("renaming preserves totality")
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inputs = self.alphabet.inputs();
        let outputs = self.alphabet.outputs();
        let names: Vec<String> = (0..self.states).map(|q| format!("q{q}")).collect();
        writeln!(f, "machine {{")?;
        writeln!(f, "  states {};", names.join(","))?;
        writeln!(f, "  init q{};", self.init)?;
        writeln!(f, "  tag {};", self.tag)?;
        for (from, i, o, to) in self.steps() {
            write!(f, "  step q{from} {}", inputs[i])?;
            if let Some(a) = &outputs[o].0 {
                write!(f, " / {a}")?;
            }
            writeln!(f, " -> q{to};")?;
        }
        write!(f, "}}")
    }
}

/// Model transitions indexed by (state, input), ready for repeated
/// conformance checks.
#[derive(Debug, Clone)]
pub(crate) struct CompiledModel {
    pub states: usize,
    pub initial: usize,
    pub inputs: usize,
    /// Enabled `(output, target)` pairs per `state * inputs + input`.
    pub enabled: Vec<Vec<(usize, usize)>>,
    /// Inputs whose event labels no transition of the model.
    pub foreign_input: Vec<bool>,
    /// Outputs (by index) that label some transition, plus ε.
    pub model_output: Vec<bool>,
}

impl CompiledModel {
    pub fn new(m: &FlatAutomaton, alphabet: &Alphabet) -> Self {
        let names: Vec<&str> = m.state_names().collect();
        let index = |s: &str| names.iter().position(|n| *n == s).expect("declared state");
        let inputs = alphabet.inputs();
        let out_index = |a: &Option<String>| match a {
            None => 0,
            Some(a) => {
                1 + alphabet
                    .actions
                    .iter()
                    .position(|x| x == a)
                    .expect("action in alphabet")
            }
        };
        let mut enabled = vec![Vec::new(); names.len() * inputs.len()];
        for t in &m.transitions {
            let x = index(&t.source);
            for (i, input) in inputs.iter().enumerate() {
                if input.event == t.event && t.guard.eval(&input.guard_assignment).unwrap_or(false)
                {
                    let entry = (out_index(&t.action), index(&t.target));
                    let slot = &mut enabled[x * inputs.len() + i];
                    if !slot.contains(&entry) {
                        slot.push(entry);
                    }
                }
            }
        }
        let used_events = m.used_events();
        let foreign_input = inputs
            .iter()
            .map(|i| !used_events.contains(&i.event))
            .collect();
        let used_actions = m.used_actions();
        let model_output = alphabet
            .outputs()
            .iter()
            .map(|o| o.0.as_ref().is_none_or(|a| used_actions.contains(a)))
            .collect();
        CompiledModel {
            states: names.len(),
            initial: index(&m.initial),
            inputs: inputs.len(),
            enabled,
            foreign_input,
            model_output,
        }
    }

    fn pair_ok(
        &self,
        s: &Machine,
        q: usize,
        x: usize,
        rel: &[bool],
        sel: MappingSelection,
    ) -> bool {
        (0..self.inputs).all(|i| {
            let moves = s.moves_of(q, i);
            let enabled = &self.enabled[x * self.inputs + i];
            if !enabled.is_empty() {
                moves.iter().all(|mv| {
                    enabled
                        .iter()
                        .any(|&(o, t)| o == mv.output && rel[mv.to * self.states + t])
                })
            } else {
                match sel.unmatched {
                    Unmatched::Stutter => moves.iter().all(|mv| mv.output == 0 && mv.to == q),
                    Unmatched::Chaos => true,
                }
            }
        })
    }

    /// Greatest-fixpoint conformance; also returns the number of deletion rounds.
    pub fn conforms_counted(&self, s: &Machine, sel: MappingSelection) -> (bool, usize) {
        if !sel.tag_ok(s.tag) {
            return (false, 0);
        }
        let mut rel = vec![true; s.states * self.states];
        let mut rounds = 0;
        loop {
            let mut changed = false;
            for q in 0..s.states {
                for x in 0..self.states {
                    let k = q * self.states + x;
                    if rel[k] && !self.pair_ok(s, q, x, &rel, sel) {
                        rel[k] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
            rounds += 1;
        }
        (rel[s.init * self.states + self.initial], rounds)
    }

    pub fn conforms(&self, s: &Machine, sel: MappingSelection) -> bool {
        self.conforms_counted(s, sel).0
    }
}

/// Membership of `s` in the semantics of `m` under `sel`.
pub fn conforms(s: &Machine, m: &FlatAutomaton, sel: MappingSelection) -> Result<bool, SemError> {
    let alphabet = Alphabet::of(m);
    if *s.alphabet != alphabet {
        return Err(SemError::AlphabetMismatch);
    }
    Ok(CompiledModel::new(m, &alphabet).conforms(s, sel))
}

/// Membership in the inner semantics: conformance under some fully-set
/// selection.
pub fn inner_member(s: &Machine, m: &FlatAutomaton) -> Result<bool, SemError> {
    let alphabet = Alphabet::of(m);
    if *s.alphabet != alphabet {
        return Err(SemError::AlphabetMismatch);
    }
    let cm = CompiledModel::new(m, &alphabet);
    Ok(MappingSelection::ALL.iter().any(|sel| cm.conforms(s, *sel)))
}

/// Most states a bounded machine may have.
pub const STATE_CAP: usize = 2;
/// Largest machine space that will be enumerated.
pub const MACHINE_LIMIT: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineBounds {
    pub max_states: usize,
    pub tags: BTreeSet<RealizationTag>,
}

impl MachineBounds {
    pub fn new(max_states: usize, tags: impl IntoIterator<Item = RealizationTag>) -> Self {
        MachineBounds {
            max_states,
            tags: tags.into_iter().collect(),
        }
    }

    /// All three tags.
    pub fn all_tags(max_states: usize) -> Self {
        Self::new(max_states, RealizationTag::ALL)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Block {
    states: usize,
    offset: u64,
    /// Nonempty move sets per (state, input): 2^(outputs * states) - 1.
    choices: u64,
    len: u64,
}

/// The bounded machine universe for one alphabet, in a fixed order: state
/// count, then step relation (mixed radix over (state, input) slots, first
/// slot least significant), then tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineSpace {
    alphabet: Arc<Alphabet>,
    bounds: MachineBounds,
    tags: Vec<RealizationTag>,
    blocks: Vec<Block>,
    len: u64,
}

fn estimate_size(alphabet: &Alphabet, states: usize, tags: usize) -> Option<u64> {
    let bits = u32::try_from(alphabet.output_count() * states).ok()?;
    let choices = 2u64.checked_pow(bits)?.checked_sub(1)?;
    let slots = u32::try_from(states * alphabet.input_count()).ok()?;
    choices.checked_pow(slots)?.checked_mul(tags as u64)
}

impl MachineSpace {
    pub fn new(alphabet: Alphabet, bounds: &MachineBounds) -> Result<Self, SemError> {
        if bounds.max_states == 0 {
            return Err(SemError::Bounds("max_states must be at least 1".into()));
        }
        if bounds.max_states > STATE_CAP {
            return Err(SemError::Bounds(format!(
                "max_states {} exceeds the cap of {STATE_CAP}",
                bounds.max_states
            )));
        }
        if bounds.tags.is_empty() {
            return Err(SemError::Bounds(
                "at least one realization tag is required".into(),
            ));
        }
        if alphabet.events.len() > 2 || alphabet.guard_vars.len() > 1 {
            return Err(SemError::AlphabetTooLarge {
                events: alphabet.events.len(),
                guard_vars: alphabet.guard_vars.len(),
            });
        }
        let tags: Vec<RealizationTag> = bounds.tags.iter().copied().collect();
        let mut blocks = Vec::new();
        let mut offset: u64 = 0;
        for n in 1..=bounds.max_states {
            let too_large = || SemError::TooLarge {
                estimate: "more than 2^64".into(),
                limit: MACHINE_LIMIT,
            };
            let len = estimate_size(&alphabet, n, tags.len()).ok_or_else(too_large)?;
            let choices = (1u64 << (alphabet.output_count() * n)) - 1;
            blocks.push(Block {
                states: n,
                offset,
                choices,
                len,
            });
            offset = offset.checked_add(len).ok_or_else(too_large)?;
        }
        if offset > MACHINE_LIMIT {
            return Err(SemError::TooLarge {
                estimate: offset.to_string(),
                limit: MACHINE_LIMIT,
            });
        }
        Ok(MachineSpace {
            alphabet: Arc::new(alphabet),
            bounds: bounds.clone(),
            tags,
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

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn bounds(&self) -> &MachineBounds {
        &self.bounds
    }

    pub fn get(&self, index: u64) -> Machine {
        assert!(index < self.len, "machine index out of range");
        let block = self
            .blocks
            .iter()
            .rev()
            .find(|b| b.offset <= index)
            .expect("index inside some block");
        let n = block.states;
        let local = index - block.offset;
        let ntags = self.tags.len() as u64;
        let tag = self.tags[(local % ntags) as usize];
        let mut rel = local / ntags;
        let slots = n * self.alphabet.input_count();
        let bits = self.alphabet.output_count() * n;
        let mut moves = Vec::with_capacity(slots);
        for _ in 0..slots {
            let subset = rel % block.choices + 1;
            rel /= block.choices;
            moves.push(
                (0..bits)
                    .filter(|b| subset >> b & 1 == 1)
                    .map(|b| Move {
                        output: b / n,
                        to: b % n,
                    })
                    .collect(),
            );
        }
        Machine {
            alphabet: self.alphabet.clone(),
            states: n,
            init: 0,
            moves,
            tag,
        }
    }

    /// Position of `s` in this space, if it belongs to it.
    pub fn index_of(&self, s: &Machine) -> Option<u64> {
        if s.alphabet != self.alphabet || s.init != 0 {
            return None;
        }
        let block = self.blocks.iter().find(|b| b.states == s.states)?;
        let tag = self.tags.iter().position(|t| *t == s.tag)? as u64;
        let mut rel: u64 = 0;
        for ms in s.moves.iter().rev() {
            let subset: u64 = ms
                .iter()
                .map(|m| 1u64 << (m.output * s.states + m.to))
                .sum();
            rel = rel * block.choices + (subset - 1);
        }
        Some(block.offset + rel * self.tags.len() as u64 + tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = Machine> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// Exhaustive, deterministically ordered enumeration of the bounded
/// machines over `m`'s alphabet.
pub fn enumerate_machines(
    m: &FlatAutomaton,
    bounds: &MachineBounds,
) -> Result<MachineSpace, SemError> {
    MachineSpace::new(Alphabet::of(m), bounds)
}

/// A subset of a machine space, stored as machine indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSet {
    pub space: MachineSpace,
    pub members: BTreeSet<u64>,
}

impl MachineSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &Machine) -> bool {
        self.space
            .index_of(s)
            .is_some_and(|i| self.members.contains(&i))
    }

    pub fn machines(&self) -> impl Iterator<Item = Machine> + '_ {
        self.members.iter().map(|&i| self.space.get(i))
    }

    fn same_space(&self, other: &MachineSet) -> Result<(), SemError> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(SemError::BoundsMismatch)
        }
    }

    pub fn is_subset(&self, other: &MachineSet) -> Result<bool, SemError> {
        self.same_space(other)?;
        Ok(self.members.is_subset(&other.members))
    }

    /// First member (in enumeration order) missing from `other`.
    pub fn first_not_in(&self, other: &MachineSet) -> Result<Option<Machine>, SemError> {
        self.same_space(other)?;
        Ok(self
            .members
            .difference(&other.members)
            .next()
            .map(|&i| self.space.get(i)))
    }

    pub fn union(&self, other: &MachineSet) -> Result<MachineSet, SemError> {
        self.same_space(other)?;
        Ok(MachineSet {
            space: self.space.clone(),
            members: self.members.union(&other.members).copied().collect(),
        })
    }
}

/// Classifies the whole space once against several selections.
pub(crate) fn classify(
    space: &MachineSpace,
    cm: &CompiledModel,
    sels: &[MappingSelection],
) -> Vec<BTreeSet<u64>> {
    let hits: Vec<(u64, Vec<bool>)> = (0..space.len())
        .into_par_iter()
        .filter_map(|i| {
            let s = space.get(i);
            let v: Vec<bool> = sels.iter().map(|sel| cm.conforms(&s, *sel)).collect();
            v.iter().any(|b| *b).then_some((i, v))
        })
        .collect();
    let mut out = vec![BTreeSet::new(); sels.len()];
    for (i, v) in hits {
        for (k, hit) in v.into_iter().enumerate() {
            if hit {
                out[k].insert(i);
            }
        }
    }
    out
}

/// The bounded semantics: every enumerated machine conforming to `m`.
pub fn sem_bounded(
    m: &FlatAutomaton,
    sel: MappingSelection,
    bounds: &MachineBounds,
) -> Result<MachineSet, SemError> {
    let space = enumerate_machines(m, bounds)?;
    let cm = CompiledModel::new(m, space.alphabet());
    let members = classify(&space, &cm, &[sel]).pop().unwrap_or_default();
    Ok(MachineSet { space, members })
}

/// Bounded semantics for several selections over one shared space.
pub fn sem_bounded_many(
    m: &FlatAutomaton,
    sels: &[MappingSelection],
    bounds: &MachineBounds,
) -> Result<Vec<MachineSet>, SemError> {
    let space = enumerate_machines(m, bounds)?;
    let cm = CompiledModel::new(m, space.alphabet());
    Ok(classify(&space, &cm, sels)
        .into_iter()
        .map(|members| MachineSet {
            space: space.clone(),
            members,
        })
        .collect())
}

/// Inner semantics: the union of the bounded semantics over every fully-set
/// mapping selection.
pub fn inner_sem_bounded(
    m: &FlatAutomaton,
    bounds: &MachineBounds,
) -> Result<MachineSet, SemError> {
    let sets = sem_bounded_many(m, &MappingSelection::ALL, bounds)?;
    let mut it = sets.into_iter();
    let first = it.next().expect("six selections");
    it.try_fold(first, |acc, s| acc.union(&s))
}

/// Integrated semantics of several models: the intersection of their sets.
pub fn intersect_sem(sets: &[MachineSet]) -> Result<MachineSet, SemError> {
    let (first, rest) = sets.split_first().ok_or(SemError::NoSets)?;
    let mut out = first.clone();
    for s in rest {
        out.same_space(s)?;
        out.members = out.members.intersection(&s.members).copied().collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refinement {
    Holds,
    /// A machine of the refining model outside the refined model's semantics.
    Fails {
        witness: Machine,
    },
}

/// Model refinement: `refined`'s bounded semantics is contained in
/// `original`'s.
pub fn model_refines(
    refined: &FlatAutomaton,
    original: &FlatAutomaton,
    sel: MappingSelection,
    bounds: &MachineBounds,
) -> Result<Refinement, SemError> {
    if Alphabet::of(refined) != Alphabet::of(original) {
        return Err(SemError::AlphabetMismatch);
    }
    let narrow = sem_bounded(refined, sel, bounds)?;
    let wide = sem_bounded(original, sel, bounds)?;
    Ok(match narrow.first_not_in(&wide)? {
        None => Refinement::Holds,
        Some(witness) => Refinement::Fails { witness },
    })
}
