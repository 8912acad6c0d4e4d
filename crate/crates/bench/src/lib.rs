//! Shared inputs for the benchmarks.

use arrayeq::{parse, parse_with_overrides, Addg};

pub const FIXTURES: [&str; 4] = ["fig1a.c", "fig1b.c", "fig1c.c", "fig1d.c"];

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn graph(name: &str) -> Addg {
    Addg::build(&parse(&fixture(name)).unwrap()).unwrap()
}

/// The graph of a fixture with `N` overridden.
pub fn graph_at(name: &str, n: i64) -> Addg {
    Addg::build(&parse_with_overrides(&fixture(name), &[("N".to_string(), n)].into()).unwrap()).unwrap()
}
