//! Generators and brute-force oracles shared by the property tests and the
//! acceptance suite. Oracles work from the generated raw values, never from the
//! library's own parsed tables.

#![allow(dead_code)]

pub mod checks;
pub mod gen;
pub mod oracle;

pub const TOLERANCE: f64 = 1e-9;

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE * a.abs().max(b.abs()).max(1.0)
}
