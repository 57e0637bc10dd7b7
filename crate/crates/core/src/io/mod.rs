//! Data ingestion, synthetic problems with known optima, reference
//! solutions and trajectory CSV.

mod csv;
mod libsvm;
mod reference;
mod synthetic;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use csv::{read_trajectories, write_trajectories, write_trajectory_file, CSV_HEADER};
pub use libsvm::{parse_libsvm, parse_ratings, write_libsvm};
pub use reference::{compute_reference, ReferenceMethod, ReferenceSolution};
pub use synthetic::{gen_synthetic_ridge, gen_synthetic_ridge_with_truth, SyntheticProblem, SyntheticSpec};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::objectives::Rating;

/// Shortest round-trip representation, switching to exponent notation
/// outside `[1e-4, 1e16)` so that no field grows beyond 17 significant
/// digits plus an exponent.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_libsvm_file(path: impl AsRef<Path>, dim: Option<usize>) -> Result<Dataset> {
    parse_libsvm(open(path.as_ref())?, dim)
}

pub fn read_ratings_file(path: impl AsRef<Path>) -> Result<Vec<Rating>> {
    parse_ratings(open(path.as_ref())?)
}
