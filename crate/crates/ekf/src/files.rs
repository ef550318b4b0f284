//! Loaders for the text configuration files and the binary vector table.

use std::fs;
use std::path::Path;

use ekf_core::embedding::{EmbeddingError, StoredVectors};
use ekf_core::eval::GoldSnapshot;
use ekf_core::ontology::{ClassGraph, TypeMapping};
use ekf_core::quote::StopList;
use ekf_core::resolver::{KeywordStubScorer, QuestionTemplates, TriggerLexicon};
use ekf_core::vecfile::{render_index, VectorTable};

use crate::error::{EkfError, Result};
use crate::records::{read_text, write_bytes};

fn input_err(path: &Path, e: impl ToString) -> EkfError {
    EkfError::Input { path: path.to_path_buf(), reason: e.to_string() }
}

pub fn load_taxonomy(path: &Path) -> Result<ClassGraph> {
    ClassGraph::from_tsv(&read_text(path)?).map_err(|e| input_err(path, e))
}

pub fn load_mapping(path: &Path, graph: &ClassGraph) -> Result<TypeMapping> {
    TypeMapping::from_tsv(&read_text(path)?, graph).map_err(|e| input_err(path, e))
}

/// Question templates from a file, or the built-in defaults.
pub fn load_templates(path: Option<&Path>) -> Result<QuestionTemplates> {
    match path {
        Some(p) => QuestionTemplates::parse(&read_text(p)?).map_err(|e| input_err(p, e)),
        None => Ok(QuestionTemplates::default()),
    }
}

/// The default stop headings plus any listed in the file.
pub fn load_stoplist(path: Option<&Path>) -> Result<StopList> {
    let mut stop = StopList::default();
    if let Some(p) = path {
        stop.extend_from_text(&read_text(p)?);
    }
    Ok(stop)
}

pub fn load_triggers(path: &Path) -> Result<TriggerLexicon> {
    TriggerLexicon::parse(&read_text(path)?).map_err(|e| input_err(path, e))
}

pub fn load_stub_scorer(templates: QuestionTemplates, morph_prefixes: Option<&Path>) -> Result<KeywordStubScorer> {
    let scorer = KeywordStubScorer::new(templates);
    match morph_prefixes {
        Some(p) => {
            let pairs = KeywordStubScorer::parse_prefix_pairs(&read_text(p)?).map_err(|e| input_err(p, e))?;
            Ok(scorer.with_prefix_pairs(pairs))
        }
        None => Ok(scorer),
    }
}

pub fn load_gold_snapshot(path: &Path) -> Result<GoldSnapshot> {
    GoldSnapshot::from_tsv(&read_text(path)?).map_err(|e| input_err(path, e))
}

/// Opens precomputed vectors in the interop format.
pub fn file_provider(vectors: &Path, index: &Path) -> Result<StoredVectors> {
    let bytes = fs::read(vectors).map_err(|e| EkfError::io(vectors, e))?;
    let table = VectorTable::decode(&bytes).map_err(|e| input_err(vectors, e))?;
    StoredVectors::from_parts(table, &read_text(index)?).map_err(|e| match e {
        EmbeddingError::File(_) | EmbeddingError::IndexRow { .. } | EmbeddingError::DuplicateHash(_) => input_err(index, e),
        other => other.into(),
    })
}

/// Writes a store as a vector file plus its sidecar index.
pub fn write_vectors(store: &StoredVectors, vectors: &Path, index: &Path) -> Result<()> {
    write_bytes(vectors, &store.table().encode())?;
    write_bytes(index, render_index(store.hashes_by_row()).as_bytes())
}
