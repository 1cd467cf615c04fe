#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arrowlab_cli::commands::two_time_rows;
use arrowlab_cli::config::{DynamicsSpec, PartitionSpec, RegionSpec, SystemSpec, TwoTimeSpec};

pub fn arrowlab(args: &[&str]) -> Output {
    arrowlab_with_env(args, &[])
}

pub fn arrowlab_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_arrowlab"));
    command.args(args).env_remove("ARROWLAB_THREADS");
    for (key, value) in env {
        command.env(key, value);
    }
    command.output().expect("arrowlab binary runs")
}

pub fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

pub const CAMPAIGN_CELLS: usize = 10_000;
pub const CAMPAIGN_SEEDS: u64 = 100;

/// Two equal macrostates, ε0 = εT = Δ1, seeded random permutation.
pub fn campaign_spec(seed: u64) -> TwoTimeSpec {
    TwoTimeSpec {
        system: SystemSpec {
            cell_count: CAMPAIGN_CELLS,
            partition: PartitionSpec::Equal { blocks: 2 },
            dynamics: DynamicsSpec::Random { seed: Some(seed) },
        },
        epsilon0: RegionSpec::Block { label: "D1".into() },
        epsilon_t: RegionSpec::Block { label: "D1".into() },
        t: 1,
        final_time: 10,
    }
}

pub struct CampaignSeed {
    pub seed: u64,
    pub mean_gap: f64,
    pub max_defect: f64,
}

pub fn campaign_seed(seed: u64) -> CampaignSeed {
    let rows = two_time_rows(&campaign_spec(seed), seed).unwrap();
    let mean_gap = rows.iter().map(|r| r.abs_gap).sum::<f64>() / rows.len() as f64;
    let max_defect = rows.iter().map(|r| r.mixing_defect).fold(0.0, f64::max);
    CampaignSeed {
        seed,
        mean_gap,
        max_defect,
    }
}
