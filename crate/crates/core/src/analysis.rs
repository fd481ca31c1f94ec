//! Checkers over corpora and bounded universes: semantic language
//! refinement, property preservation, invariant properties and
//! expressiveness preservation under syntactic constraints.
//!
//! Bounded checks are evidence, not proofs. A passing language refinement
//! is labeled `pointwise` when the selections' clauses imply each other
//! (which holds for every machine), `bounded` otherwise.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::{apply_constraint, ConstraintId};
use crate::reduction::{FlatAutomaton, FlatTransition};
use crate::semantics::{
    classify, enumerate_machines, sem_bounded_many, Alphabet, CompiledModel, Machine,
    MachineBounds, MappingSelection, Realization, SemError, Unmatched,
};
use crate::syntax::{unparse, Notation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("missing refinement evidence: {0}")]
    MissingEvidence(String),
    #[error("invalid model bounds: {0}")]
    Bounds(String),
    #[error("unknown variation point `{0}` (known: UnmatchedEvent, StateRealization)")]
    UnknownVariationPoint(String),
    #[error("unknown property `{0}` (known: OutputsInModel, StutterOnUnmatched, Deterministic)")]
    UnknownProperty(String),
}

/// Decidable machine predicates, evaluated over reachable states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyId {
    /// Every output is ε or an action labeling some transition of the model.
    OutputsInModel,
    /// Inputs whose event labels no transition keep the state and output ε.
    StutterOnUnmatched,
    /// At most one move per state and input.
    Deterministic,
}

impl PropertyId {
    pub const REGISTRY: [PropertyId; 3] = [
        PropertyId::OutputsInModel,
        PropertyId::StutterOnUnmatched,
        PropertyId::Deterministic,
    ];

    pub(crate) fn holds_compiled(&self, s: &Machine, cm: &CompiledModel) -> bool {
        let reachable = s.reachable();
        let inputs = s.input_count();
        (0..s.states).filter(|q| reachable[*q]).all(|q| {
            (0..inputs).all(|i| {
                let moves = s.moves_of(q, i);
                match self {
                    PropertyId::OutputsInModel => moves.iter().all(|m| cm.model_output[m.output]),
                    PropertyId::StutterOnUnmatched => {
                        !cm.foreign_input[i] || moves.iter().all(|m| m.output == 0 && m.to == q)
                    }
                    PropertyId::Deterministic => moves.len() == 1,
                }
            })
        })
    }

    /// Evaluates the property of `s` relative to `m`.
    pub fn holds(&self, s: &Machine, m: &FlatAutomaton) -> Result<bool, SemError> {
        let alphabet = Alphabet::of(m);
        if *s.alphabet != alphabet {
            return Err(SemError::AlphabetMismatch);
        }
        Ok(self.holds_compiled(s, &CompiledModel::new(m, &alphabet)))
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyId::OutputsInModel => "OutputsInModel",
            PropertyId::StutterOnUnmatched => "StutterOnUnmatched",
            PropertyId::Deterministic => "Deterministic",
        })
    }
}

impl FromStr for PropertyId {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::REGISTRY
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AnalysisError::UnknownProperty(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariationPointId {
    UnmatchedEvent,
    StateRealization,
}

impl VariationPointId {
    /// The selections obtained by varying this point of `base`.
    pub fn variants(&self, base: MappingSelection) -> Vec<MappingSelection> {
        match self {
            VariationPointId::UnmatchedEvent => [Unmatched::Chaos, Unmatched::Stutter]
                .into_iter()
                .map(|u| MappingSelection::new(u, base.realization))
                .collect(),
            VariationPointId::StateRealization => {
                [Realization::Open, Realization::Enum, Realization::Pattern]
                    .into_iter()
                    .map(|r| MappingSelection::new(base.unmatched, r))
                    .collect()
            }
        }
    }
}

impl fmt::Display for VariationPointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariationPointId::UnmatchedEvent => "UnmatchedEvent",
            VariationPointId::StateRealization => "StateRealization",
        })
    }
}

impl FromStr for VariationPointId {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            VariationPointId::UnmatchedEvent,
            VariationPointId::StateRealization,
        ]
        .into_iter()
        .find(|v| v.to_string().eq_ignore_ascii_case(s.trim()))
        .ok_or_else(|| AnalysisError::UnknownVariationPoint(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofKind {
    /// Follows from clause-wise implication; holds beyond the bounds.
    Pointwise,
    /// Exhaustive within the stated bounds only.
    Bounded,
}

impl fmt::Display for ProofKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofKind::Pointwise => "pointwise",
            ProofKind::Bounded => "bounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub model: String,
    pub variant: Option<MappingSelection>,
    pub machine: Option<Machine>,
    /// Serialized model, when the witness is a model.
    pub model_text: Option<String>,
}

impl Counterexample {
    fn machine(model: &FlatAutomaton, variant: MappingSelection, machine: Machine) -> Self {
        Counterexample {
            model: model.name.clone(),
            variant: Some(variant),
            machine: Some(machine),
            model_text: None,
        }
    }

    fn model(m: &FlatAutomaton) -> Self {
        Counterexample {
            model: m.name.clone(),
            variant: None,
            machine: None,
            model_text: Some(unparse(&m.to_statechart(), Notation::Arrow).source),
        }
    }

    fn render(&self, out: &mut String) {
        let _ = writeln!(out, "  model: {}", self.model);
        if let Some(v) = &self.variant {
            let _ = writeln!(out, "  variant: {v}");
        }
        for text in [
            self.machine.as_ref().map(|m| m.to_string()),
            self.model_text.clone(),
        ]
        .into_iter()
        .flatten()
        {
            for line in text.lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
    }
}

/// Result of one check, renderable as a deterministic evidence file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub check: String,
    pub verdict: Verdict,
    pub proof: ProofKind,
    pub bounds: String,
    pub models_checked: usize,
    pub universe_size: u64,
    pub violations: u64,
    pub counterexample: Option<Counterexample>,
    pub notes: Vec<String>,
    /// Selections `(v1, v2)` whose refinement this report establishes.
    pub refinement: Option<(MappingSelection, MappingSelection)>,
    pub evidence_path: Option<PathBuf>,
}

impl AnalysisReport {
    fn new(check: impl Into<String>, bounds: String) -> Self {
        AnalysisReport {
            check: check.into(),
            verdict: Verdict::Pass,
            proof: ProofKind::Bounded,
            bounds,
            models_checked: 0,
            universe_size: 0,
            violations: 0,
            counterexample: None,
            notes: Vec::new(),
            refinement: None,
            evidence_path: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Plain-text rendering; identical inputs give identical text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "check: {}", self.check);
        let _ = writeln!(out, "verdict: {}", self.verdict);
        let _ = writeln!(out, "proof: {}", self.proof);
        let _ = writeln!(out, "bounds: {}", self.bounds);
        let _ = writeln!(out, "models checked: {}", self.models_checked);
        let _ = writeln!(out, "universe size: {}", self.universe_size);
        let _ = writeln!(out, "violations: {}", self.violations);
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        if let Some(c) = &self.counterexample {
            let _ = writeln!(out, "counterexample:");
            c.render(&mut out);
        }
        out
    }

    /// Writes the rendering to `dir/name.txt` and records the path.
    pub fn write_evidence(&mut self, dir: &Path, name: &str) -> io::Result<PathBuf> {
        let path = write_text(dir, name, &self.render())?;
        self.evidence_path = Some(path.clone());
        Ok(path)
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.txt"));
    fs::write(&path, text)?;
    Ok(path)
}

fn describe_bounds(b: &MachineBounds) -> String {
    let tags: Vec<String> = b.tags.iter().map(|t| t.to_string()).collect();
    format!("max_states={} tags={}", b.max_states, tags.join(","))
}

/// Semantic language refinement: `sem_v2(m) ⊆ sem_v1(m)` for every corpus
/// model. Always checked exhaustively at the bounds; labeled pointwise when
/// `v2`'s clauses imply `v1`'s.
pub fn check_language_refinement(
    v1: MappingSelection,
    v2: MappingSelection,
    corpus: &[FlatAutomaton],
    bounds: &MachineBounds,
) -> Result<AnalysisReport, AnalysisError> {
    if corpus.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let mut report = AnalysisReport::new(
        format!("language refinement v1={v1} v2={v2}"),
        describe_bounds(bounds),
    );
    report.refinement = Some((v1, v2));
    let pointwise = v2.pointwise_implies(&v1);
    for m in corpus {
        let sets = sem_bounded_many(m, &[v1, v2], bounds)?;
        let (wide, narrow) = (&sets[0], &sets[1]);
        report.models_checked += 1;
        report.universe_size += wide.space.len();
        let extra = narrow.members.difference(&wide.members).count() as u64;
        if extra > 0 {
            report.violations += extra;
            if report.counterexample.is_none() {
                let s = narrow.first_not_in(wide)?.expect("nonempty difference");
                report.counterexample = Some(Counterexample::machine(m, v2, s));
            }
        }
    }
    if report.violations > 0 {
        report.verdict = Verdict::Fail;
        if pointwise {
            report
                .notes
                .push("clause-wise implication holds but the bounded check disagrees".into());
        }
    } else if pointwise {
        report.proof = ProofKind::Pointwise;
        report.notes.push(format!(
            "{v2} implies {v1} clause by clause; confirmed exhaustively on the corpus"
        ));
    }
    Ok(report)
}

fn property_over(prop: PropertyId, set: &[Machine], cm: &CompiledModel) -> Option<Machine> {
    set.iter().find(|s| !prop.holds_compiled(s, cm)).cloned()
}

/// Property preservation: if `prop` holds for all of `sem_v1(m)` it must
/// hold for all of `sem_v2(m)`. Requires a passing refinement report for
/// the same `(v1, v2)`.
pub fn check_property_preservation(
    prop: PropertyId,
    m: &FlatAutomaton,
    v1: MappingSelection,
    v2: MappingSelection,
    bounds: &MachineBounds,
    refinement: &AnalysisReport,
) -> Result<AnalysisReport, AnalysisError> {
    match refinement.refinement {
        Some(pair) if pair == (v1, v2) && refinement.passed() => {}
        Some(_) if !refinement.passed() => {
            return Err(AnalysisError::MissingEvidence(format!(
                "refinement of {v1} by {v2} failed"
            )))
        }
        _ => {
            return Err(AnalysisError::MissingEvidence(format!(
                "no passing refinement report for v1={v1} v2={v2}"
            )))
        }
    }
    check_property_preservation_unchecked(prop, m, v1, v2, bounds)
}

/// As [`check_property_preservation`] without the refinement premise.
pub fn check_property_preservation_unchecked(
    prop: PropertyId,
    m: &FlatAutomaton,
    v1: MappingSelection,
    v2: MappingSelection,
    bounds: &MachineBounds,
) -> Result<AnalysisReport, AnalysisError> {
    let sets = sem_bounded_many(m, &[v1, v2], bounds)?;
    let cm = CompiledModel::new(m, sets[0].space.alphabet());
    let s1: Vec<Machine> = sets[0].machines().collect();
    let s2: Vec<Machine> = sets[1].machines().collect();
    let mut report = AnalysisReport::new(
        format!("property preservation {prop} on {} v1={v1} v2={v2}", m.name),
        describe_bounds(bounds),
    );
    report.models_checked = 1;
    report.universe_size = sets[0].space.len();
    let premise_witness = property_over(prop, &s1, &cm);
    match premise_witness {
        Some(_) => report.notes.push(format!(
            "premise false: {prop} fails for some machine under {v1}; implication holds vacuously"
        )),
        None => {
            report
                .notes
                .push(format!("premise true under {v1} ({} machines)", s1.len()));
            let violations = s2.iter().filter(|s| !prop.holds_compiled(s, &cm)).count() as u64;
            if violations > 0 {
                report.verdict = Verdict::Fail;
                report.violations = violations;
                let w = property_over(prop, &s2, &cm).expect("violation exists");
                report.counterexample = Some(Counterexample::machine(m, v2, w));
            } else {
                report.notes.push(format!(
                    "conclusion true under {v2} ({} machines)",
                    s2.len()
                ));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantWitness {
    pub model: String,
    pub variant: MappingSelection,
    pub machine: Machine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invariance {
    /// Holds for every model in scope.
    Global,
    /// Holds for the listed models only.
    Local {
        holds_for: Vec<String>,
        witness: InvariantWitness,
    },
    /// Holds for no model in scope.
    NotInvariant { witness: InvariantWitness },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub property: PropertyId,
    pub variation_point: VariationPointId,
    pub base: MappingSelection,
    pub bounds: String,
    pub models_checked: usize,
    pub universe_size: u64,
    pub outcome: Invariance,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.outcome == Invariance::Global
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "check: invariant property {} w.r.t. {} (base {})",
            self.property, self.variation_point, self.base
        );
        let (label, witness) = match &self.outcome {
            Invariance::Global => ("globally invariant".to_string(), None),
            Invariance::Local { holds_for, witness } => (
                format!("locally invariant for {}", holds_for.join(", ")),
                Some(witness),
            ),
            Invariance::NotInvariant { witness } => ("not invariant".to_string(), Some(witness)),
        };
        let _ = writeln!(out, "verdict: {label}");
        let _ = writeln!(out, "proof: bounded");
        let _ = writeln!(out, "bounds: {}", self.bounds);
        let _ = writeln!(out, "models checked: {}", self.models_checked);
        let _ = writeln!(out, "universe size: {}", self.universe_size);
        if let Some(w) = witness {
            let _ = writeln!(out, "counterexample:");
            let _ = writeln!(out, "  model: {}", w.model);
            let _ = writeln!(out, "  variant: {}", w.variant);
            for line in w.machine.to_string().lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
        out
    }
}

/// Whether `prop` holds for every machine of every variant of `vp` (other
/// points fixed by `base`), per model of the scope.
pub fn check_invariant_property(
    prop: PropertyId,
    vp: VariationPointId,
    scope: &[FlatAutomaton],
    base: MappingSelection,
    bounds: &MachineBounds,
) -> Result<InvariantReport, AnalysisError> {
    if scope.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let variants = vp.variants(base);
    let mut holds_for = Vec::new();
    let mut first_witness = None;
    let mut universe_size = 0;
    for m in scope {
        let sets = sem_bounded_many(m, &variants, bounds)?;
        universe_size += sets[0].space.len();
        let cm = CompiledModel::new(m, sets[0].space.alphabet());
        let witness = variants.iter().zip(&sets).find_map(|(v, set)| {
            set.machines()
                .find(|s| !prop.holds_compiled(s, &cm))
                .map(|machine| InvariantWitness {
                    model: m.name.clone(),
                    variant: *v,
                    machine,
                })
        });
        match witness {
            None => holds_for.push(m.name.clone()),
            Some(w) => {
                first_witness.get_or_insert(w);
            }
        }
    }
    let outcome = match first_witness {
        None => Invariance::Global,
        Some(witness) if holds_for.is_empty() => Invariance::NotInvariant { witness },
        Some(witness) => Invariance::Local { holds_for, witness },
    };
    Ok(InvariantReport {
        property: prop,
        variation_point: vp,
        base,
        bounds: describe_bounds(bounds),
        models_checked: scope.len(),
        universe_size,
        outcome,
    })
}

/// Bounds for the flat model space of the expressiveness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelBounds {
    pub max_states: usize,
    pub events: usize,
    pub actions: usize,
}

impl Default for ModelBounds {
    fn default() -> Self {
        ModelBounds {
            max_states: 2,
            events: 1,
            actions: 1,
        }
    }
}

/// Every flat model with states `S1..Sn` (`S1` initial, n up to the bound),
/// the declared event `e` and action `a`, and any subset of the possible
/// unguarded transitions. Order: state count, then transition subset.
pub fn enumerate_flat_models(b: ModelBounds) -> Result<Vec<FlatAutomaton>, AnalysisError> {
    if b.max_states == 0 || b.max_states > 2 || b.events != 1 || b.actions > 1 {
        return Err(AnalysisError::Bounds(format!(
            "expected 1..=2 states, exactly 1 event, at most 1 action; got {} states, {} events, {} actions",
            b.max_states, b.events, b.actions
        )));
    }
    let actions: Vec<Option<&str>> = std::iter::once(None)
        .chain((b.actions == 1).then_some(Some("a")))
        .collect();
    let mut out = Vec::new();
    for n in 1..=b.max_states {
        let names: Vec<String> = (1..=n).map(|k| format!("S{k}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut candidates = Vec::new();
        for s in &refs {
            for t in &refs {
                for a in &actions {
                    candidates.push(FlatTransition::new(s, "e", *a, t));
                }
            }
        }
        for mask in 0u32..1 << candidates.len() {
            let ts = candidates
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect();
            let mut m = FlatAutomaton::new(&format!("F{}", out.len()), &refs, ts);
            m.declared_events = vec!["e".into()];
            m.declared_actions = actions.iter().flatten().map(|a| a.to_string()).collect();
            out.push(m);
        }
    }
    Ok(out)
}

/// Expressiveness under a syntactic constraint. The forward direction
/// (every constrained model has a semantically equal unconstrained one) is
/// reported for completeness; the converse detects loss and decides the
/// verdict: Fail when some unconstrained model's semantics equals no
/// constrained model's.
pub fn check_expressiveness_preservation(
    c: ConstraintId,
    model_bounds: ModelBounds,
    machine_bounds: &MachineBounds,
    sel: MappingSelection,
) -> Result<AnalysisReport, AnalysisError> {
    let models = enumerate_flat_models(model_bounds)?;
    let space = enumerate_machines(&models[0], machine_bounds)?;
    let sems: Vec<BTreeSet<u64>> = models
        .par_iter()
        .map(|m| {
            let cm = CompiledModel::new(m, space.alphabet());
            classify(&space, &cm, &[sel]).pop().unwrap_or_default()
        })
        .collect();
    let constrained: Vec<bool> = models
        .iter()
        .map(|m| apply_constraint(&m.to_statechart(), c))
        .collect();
    let reachable: BTreeSet<&BTreeSet<u64>> = sems
        .iter()
        .zip(&constrained)
        .filter(|(_, ok)| **ok)
        .map(|(s, _)| s)
        .collect();
    let everything: BTreeSet<&BTreeSet<u64>> = sems.iter().collect();
    let forward_misses = sems
        .iter()
        .zip(&constrained)
        .filter(|(s, ok)| **ok && !everything.contains(s))
        .count();
    let lost: Vec<usize> = (0..models.len())
        .filter(|&k| !reachable.contains(&sems[k]))
        .collect();

    let mut report = AnalysisReport::new(
        format!("expressiveness under {c} sel={sel}"),
        format!(
            "models: max_states={} events={} actions={}; machines: {}",
            model_bounds.max_states,
            model_bounds.events,
            model_bounds.actions,
            describe_bounds(machine_bounds)
        ),
    );
    report.models_checked = models.len();
    report.universe_size = space.len();
    report.notes.push(format!(
        "{} of {} models satisfy {c}",
        constrained.iter().filter(|b| **b).count(),
        models.len()
    ));
    report.notes.push(format!(
        "forward (constrained to unconstrained): {forward_misses} models without an equal"
    ));
    report.notes.push(format!(
        "converse (unconstrained to constrained): {} models without an equal",
        lost.len()
    ));
    report.notes.push(format!(
        "{} distinct semantics overall, {} reachable under {c}",
        everything.len(),
        reachable.len()
    ));
    report.violations = lost.len() as u64;
    if let Some(&k) = lost.first() {
        report.verdict = Verdict::Fail;
        report.counterexample = Some(Counterexample::model(&models[k]));
    }
    Ok(report)
}
