#![allow(dead_code)]

pub mod fuzz;
pub mod gen;
pub mod oracles;

use std::path::PathBuf;

use collacc::sim::{load_scenario, World};

pub const FIXTURES: [&str; 4] = ["restaurant", "restaurant-mb", "basketball", "letter"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.toml"))
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.trace"))
}

pub fn load_fixture(name: &str) -> World {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    load_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Runs a fixture to the end and returns the final world.
pub fn run_fixture(name: &str) -> World {
    load_fixture(name).run()
}

pub fn p(s: &str) -> collacc::logic::Formula {
    collacc::logic::parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}
