//! Variants of a small statechart language: concrete syntax with
//! presentation options, abstract syntax with well-formedness and
//! constraints, reduction of abbreviations, a set-valued semantics over
//! bounded machines, a mini object system model, feature models of the
//! variation points, and checkers relating the variants.

pub mod analysis;
pub mod ast;
pub mod feature_model;
pub mod reduction;
pub mod semantics;
pub mod syntax;
pub mod system_model;

pub use analysis::{
    check_expressiveness_preservation, check_invariant_property, check_language_refinement,
    check_property_preservation, check_property_preservation_unchecked, enumerate_flat_models,
    write_text, AnalysisError, AnalysisReport, Invariance, InvariantReport, ModelBounds, ProofKind,
    PropertyId, VariationPointId, Verdict,
};
pub use ast::{
    apply_constraint, wellformed, AbstractStatechart, ConstraintId, Guard, GuardExpr,
    GuardLanguage, StateNode, Stereotype, StereotypePattern, TransitionNode, Violation,
};
pub use feature_model::{
    parse_fm, Abbreviation, ConfigViolation, FeatureModel, FeatureModelError, VariantSelection,
};
pub use reduction::{flatten, is_reduced, FlatAutomaton, FlatTransition, Priority};
pub use semantics::{
    conforms, enumerate_machines, inner_member, inner_sem_bounded, intersect_sem, model_refines,
    sem_bounded, Alphabet, Machine, MachineBounds, MachineSet, MachineSpace, MappingSelection,
    PartialMapping, Realization, RealizationTag, Refinement, SemError, Unmatched,
};
pub use syntax::{
    corpus_files, detect_notation, load_corpus, parse, parse_str, read_corpus, unparse,
    ConcreteText, CorpusError, Notation, ParseDiagnostic, ParseFailure,
};
pub use system_model::{
    check_domain_refinement, enumerate_system_models, parse_sm, DomainReport, MiniSystemModel,
    PropId, SmBounds, SmError, SubReading,
};
