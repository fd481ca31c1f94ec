//! Fixtures shared by the benchmarks.

use std::path::{Path, PathBuf};

use lvw_core::{
    flatten, load_corpus, AbstractStatechart, CorpusError, FlatAutomaton, Priority,
    VariantSelection,
};

/// The arrow-notation corpus shipped with the workspace.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus/arrow")
}

pub fn corpus_models() -> Result<Vec<AbstractStatechart>, CorpusError> {
    Ok(load_corpus(&corpus_dir(), &VariantSelection::permissive())?
        .into_iter()
        .map(|(_, m)| m)
        .collect())
}

pub fn flat_corpus() -> Result<Vec<FlatAutomaton>, CorpusError> {
    Ok(corpus_models()?
        .iter()
        .map(|m| flatten(m, Priority::InnerFirst))
        .collect())
}
