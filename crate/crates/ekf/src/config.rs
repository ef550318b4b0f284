//! The flat TOML pipeline configuration.
//!
//! Relative paths resolve against the directory holding the config file.
//! The only environment override is `EKF_OUTPUT_DIR`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use ekf_core::alignment::{AlignmentConfig, DEFAULT_MIN_COMMUNITY_SIZE, DEFAULT_THRESHOLD};
use ekf_core::ontology::DEFAULT_MAX_DEPTH;
use ekf_core::resolver::{PassageScope, ResolverConfig, DEFAULT_SCORE_FLOOR};
use serde::Deserialize;

use crate::error::{EkfError, Result};
use crate::records::read_text;

pub const OUTPUT_DIR_ENV: &str = "EKF_OUTPUT_DIR";
pub const DEFAULT_HASH_DIM: usize = 256;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Hash,
    File,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    corpus: Option<PathBuf>,
    taxonomy: Option<PathBuf>,
    mapping: Option<PathBuf>,
    templates: Option<PathBuf>,
    stoplist: Option<PathBuf>,
    triggers: Option<PathBuf>,
    event_mentions: Option<PathBuf>,
    morph_prefixes: Option<PathBuf>,
    gold_snapshot: Option<PathBuf>,
    gold_records: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    threshold: Option<f64>,
    min_community_size: Option<usize>,
    max_depth: Option<usize>,
    score_floor: Option<f64>,
    provider: Option<ProviderKind>,
    hash_dim: Option<usize>,
    hash_seed: Option<u64>,
    vectors: Option<PathBuf>,
    vector_index: Option<PathBuf>,
    passage_scope: Option<PassageScope>,
    strict_eval: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProviderConfig {
    Hash { dim: usize, seed: u64 },
    File { vectors: PathBuf, index: PathBuf },
}

/// Validated configuration with absolute or config-relative paths resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub taxonomy: PathBuf,
    pub mapping: PathBuf,
    pub templates: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub triggers: Option<PathBuf>,
    pub event_mentions: Option<PathBuf>,
    pub morph_prefixes: Option<PathBuf>,
    pub gold_snapshot: Option<PathBuf>,
    pub gold_records: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub alignment: AlignmentConfig,
    pub resolver: ResolverConfig,
    pub provider: ProviderConfig,
    pub strict_eval: bool,
}

impl PipelineConfig {
    /// Reads and validates a config file, honouring `EKF_OUTPUT_DIR`.
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_output_override(path, std::env::var_os(OUTPUT_DIR_ENV))
    }

    pub fn load_with_output_override(path: &Path, output_dir: Option<OsString>) -> Result<Self> {
        let text = read_text(path).map_err(|e| EkfError::config("--config", e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml(&text, base, output_dir.map(PathBuf::from))
    }

    pub fn from_toml(text: &str, base: &Path, output_override: Option<PathBuf>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| EkfError::config("config", e.message().to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let existing = |field: &str, p: Option<PathBuf>| -> Result<Option<PathBuf>> {
            match p.map(resolve) {
                Some(p) if !p.exists() => Err(EkfError::config(field, format!("path {} does not exist", p.display()))),
                other => Ok(other),
            }
        };
        let required = |field: &str, p: Option<PathBuf>| -> Result<PathBuf> {
            existing(field, p)?.ok_or_else(|| EkfError::config(field, "required path is missing"))
        };

        let corpus = required("corpus", raw.corpus)?;
        let taxonomy = required("taxonomy", raw.taxonomy)?;
        let mapping = required("mapping", raw.mapping)?;

        let threshold = raw.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(EkfError::config("threshold", format!("must lie in (0, 1], got {threshold}")));
        }
        let min_community_size = raw.min_community_size.unwrap_or(DEFAULT_MIN_COMMUNITY_SIZE);
        if min_community_size == 0 {
            return Err(EkfError::config("min_community_size", "must be at least 1"));
        }
        let score_floor = raw.score_floor.unwrap_or(DEFAULT_SCORE_FLOOR);
        if !(0.0..=1.0).contains(&score_floor) {
            return Err(EkfError::config("score_floor", format!("must lie in [0, 1], got {score_floor}")));
        }
        let max_depth = raw.max_depth.unwrap_or(DEFAULT_MAX_DEPTH);
        if max_depth > 64 {
            return Err(EkfError::config("max_depth", format!("must be at most 64, got {max_depth}")));
        }

        let vectors = existing("vectors", raw.vectors)?;
        let vector_index = existing("vector_index", raw.vector_index)?;
        let provider = match raw.provider.unwrap_or(ProviderKind::Hash) {
            ProviderKind::Hash => {
                let dim = raw.hash_dim.unwrap_or(DEFAULT_HASH_DIM);
                if dim < 8 {
                    return Err(EkfError::config("hash_dim", format!("must be at least 8, got {dim}")));
                }
                ProviderConfig::Hash { dim, seed: raw.hash_seed.unwrap_or(0) }
            }
            ProviderKind::File => ProviderConfig::File {
                vectors: vectors.ok_or_else(|| EkfError::config("vectors", "required when provider = \"file\""))?,
                index: vector_index.ok_or_else(|| EkfError::config("vector_index", "required when provider = \"file\""))?,
            },
        };

        let output_dir = match output_override {
            Some(dir) if dir.as_os_str().is_empty() => {
                return Err(EkfError::config(OUTPUT_DIR_ENV, "must not be empty"));
            }
            Some(dir) => dir,
            None => resolve(raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))),
        };

        Ok(Self {
            corpus,
            taxonomy,
            mapping,
            templates: existing("templates", raw.templates)?,
            stoplist: existing("stoplist", raw.stoplist)?,
            triggers: existing("triggers", raw.triggers)?,
            event_mentions: existing("event_mentions", raw.event_mentions)?,
            morph_prefixes: existing("morph_prefixes", raw.morph_prefixes)?,
            gold_snapshot: existing("gold_snapshot", raw.gold_snapshot)?,
            gold_records: existing("gold_records", raw.gold_records)?,
            output_dir,
            alignment: AlignmentConfig { threshold, min_community_size },
            resolver: ResolverConfig {
                max_depth,
                score_floor,
                scope: raw.passage_scope.unwrap_or(PassageScope::Sentence),
            },
            provider,
            strict_eval: raw.strict_eval.unwrap_or(true),
        })
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn dir_with_inputs() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        for f in ["corpus.jsonl", "tax.tsv", "map.tsv"] {
            fs::write(d.path().join(f), "").unwrap();
        }
        d
    }

    const MINIMAL: &str = "corpus = \"corpus.jsonl\"\ntaxonomy = \"tax.tsv\"\nmapping = \"map.tsv\"\n";

    #[test]
    fn defaults_and_relative_paths() {
        let d = dir_with_inputs();
        let cfg = PipelineConfig::from_toml(MINIMAL, d.path(), None).unwrap();
        assert_eq!(cfg.corpus, d.path().join("corpus.jsonl"));
        assert_eq!(cfg.output_dir, d.path().join("out"));
        assert_eq!(cfg.alignment, AlignmentConfig::default());
        assert_eq!(cfg.resolver, ResolverConfig::default());
        assert_eq!(cfg.provider, ProviderConfig::Hash { dim: DEFAULT_HASH_DIM, seed: 0 });
        assert!(cfg.strict_eval);
    }

    #[test]
    fn missing_field_is_named() {
        let d = dir_with_inputs();
        let err = PipelineConfig::from_toml("taxonomy = \"tax.tsv\"\nmapping = \"map.tsv\"", d.path(), None).unwrap_err();
        assert!(matches!(&err, EkfError::Config { field, .. } if field == "corpus"), "{err}");
        let err = PipelineConfig::from_toml(&MINIMAL.replace("corpus.jsonl", "nope.jsonl"), d.path(), None).unwrap_err();
        assert!(err.to_string().contains("corpus") && err.to_string().contains("does not exist"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn range_checks() {
        let d = dir_with_inputs();
        for (extra, field) in [
            ("threshold = 0.0", "threshold"),
            ("threshold = 1.5", "threshold"),
            ("min_community_size = 0", "min_community_size"),
            ("score_floor = -0.1", "score_floor"),
            ("hash_dim = 4", "hash_dim"),
            ("provider = \"file\"", "vectors"),
        ] {
            let err = PipelineConfig::from_toml(&format!("{MINIMAL}{extra}\n"), d.path(), None).unwrap_err();
            assert!(matches!(&err, EkfError::Config { field: f, .. } if f == field), "{extra}: {err}");
        }
        assert!(PipelineConfig::from_toml(&format!("{MINIMAL}bogus = 1\n"), d.path(), None).is_err());
    }

    #[test]
    fn output_override() {
        let d = dir_with_inputs();
        let cfg = PipelineConfig::from_toml(MINIMAL, d.path(), Some(PathBuf::from("/tmp/elsewhere"))).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/elsewhere"));
    }
}
