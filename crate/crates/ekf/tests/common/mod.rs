#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use ekf::{run_stage, PipelineConfig, Stage};

pub const BUILD_STAGES: [Stage; 6] = [Stage::Ingest, Stage::Quotes, Stage::Align, Stage::Resolve, Stage::Emit, Stage::Stats];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_config(out: &Path) -> PipelineConfig {
    PipelineConfig::load_with_output_override(&fixtures().join("pipeline.toml"), Some(out.into())).unwrap()
}

pub fn run_stages(cfg: &PipelineConfig, stages: &[Stage]) {
    for &stage in stages {
        if let Err(e) = run_stage(stage, cfg) {
            panic!("stage {} failed: {e}", stage.name());
        }
    }
}

/// Runs `stages` on the fixture config in a pool of `threads` workers.
pub fn run_fixture(out: &Path, stages: &[Stage], threads: usize) -> PipelineConfig {
    let cfg = fixture_config(out);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_stages(&cfg, stages));
    cfg
}

pub fn read(path: impl AsRef<Path>) -> Vec<u8> {
    let path = path.as_ref();
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn json_lines(path: impl AsRef<Path>) -> Vec<serde_json::Value> {
    String::from_utf8(read(path))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}
