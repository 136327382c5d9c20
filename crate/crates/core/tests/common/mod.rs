#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use foon::merge::merge;
use foon::parser::{load_kitchen, load_rates, load_subgraph, SubgraphDocument};
use foon::{Kitchen, MotionRateTable, UniversalFoon};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
}

pub fn corpus() -> Vec<SubgraphDocument> {
    corpus_paths()
        .iter()
        .map(|p| load_subgraph(p).unwrap())
        .collect()
}

pub fn universal() -> UniversalFoon {
    merge(&corpus())
}

pub fn kitchen() -> Kitchen {
    load_kitchen(&fixtures().join("kitchen.txt")).unwrap()
}

pub fn rates() -> MotionRateTable {
    load_rates(&fixtures().join("rates.txt")).unwrap()
}

pub fn foon_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foon"))
        .args(args)
        .output()
        .expect("failed to spawn foon")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
