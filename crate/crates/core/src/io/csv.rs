use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use super::format_float;
use crate::error::{Error, Result};
use crate::optimizers::{Algorithm, Sample, Trajectory};

pub const CSV_HEADER: &str = "algo,seed,eta,epoch,passes,fx,subopt,wall_secs";

const DIVERGED: &str = "diverged";

/// Long-format CSV, one row per sample. A diverged run ends with a row whose
/// `fx` and `subopt` read `diverged` at the pass count where it stopped.
/// `wall_secs` is left empty unless `timing` is set, which keeps the file a
/// pure function of configuration and seed.
pub fn write_trajectories(
    trajectories: &[Trajectory],
    mut out: impl Write,
    timing: bool,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for t in trajectories {
        let prefix = format!("{},{},{}", t.algo, t.seed, format_float(t.eta));
        for s in &t.samples {
            let subopt = s.subopt.map(format_float).unwrap_or_default();
            let wall = if timing { format_float(s.wall_secs) } else { String::new() };
            writeln!(
                out,
                "{prefix},{},{},{},{subopt},{wall}",
                s.epoch,
                format_float(s.passes),
                format_float(s.fx)
            )?;
        }
        if let Some(passes) = t.diverged_at {
            let epoch = t.last().map_or(0, |s| s.epoch);
            writeln!(
                out,
                "{prefix},{epoch},{},{DIVERGED},{DIVERGED},",
                format_float(passes)
            )?;
        }
    }
    out.flush()
}

pub fn write_trajectory_file(
    path: impl AsRef<Path>,
    trajectories: &[Trajectory],
    timing: bool,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectories(trajectories, BufWriter::new(file), timing).map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_trajectories`]. Consecutive rows with the
/// same `(algo, seed, eta)` form one trajectory; an empty `wall_secs` reads
/// as zero.
pub fn read_trajectories(reader: impl BufRead) -> Result<Vec<Trajectory>> {
    let mut out: Vec<Trajectory> = Vec::new();
    let mut closed = true;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let err = |message: String| Error::Parse { line: lineno, message };
        let line = line.map_err(|e| err(format!("read failed: {e}")))?;
        if k == 0 {
            if line != CSV_HEADER {
                return Err(err(format!("unexpected header `{line}`")));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("invalid number `{s}`")));
        let algo: Algorithm = f[0].parse().map_err(|_| err(format!("unknown algorithm `{}`", f[0])))?;
        let seed: u64 = f[1].parse().map_err(|_| err(format!("invalid seed `{}`", f[1])))?;
        let eta = num(f[2])?;
        let epoch: usize = f[3].parse().map_err(|_| err(format!("invalid epoch `{}`", f[3])))?;
        let passes = num(f[4])?;
        let same = out
            .last()
            .is_some_and(|t| t.algo == algo && t.seed == seed && t.eta.to_bits() == eta.to_bits());
        if closed || !same {
            out.push(Trajectory::new(algo, seed, eta));
        }
        closed = false;
        let t = out.last_mut().expect("trajectory pushed above");
        if f[5] == DIVERGED {
            t.diverged_at = Some(passes);
            closed = true;
            continue;
        }
        t.samples.push(Sample {
            epoch,
            passes,
            fx: num(f[5])?,
            subopt: if f[6].is_empty() { None } else { Some(num(f[6])?) },
            wall_secs: if f[7].is_empty() { 0.0 } else { num(f[7])? },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(algo: Algorithm, seed: u64, samples: usize) -> Trajectory {
        let mut t = Trajectory::new(algo, seed, 0.1 + seed as f64 / 3.0);
        for k in 0..samples {
            t.samples.push(Sample {
                epoch: k,
                passes: k as f64 * 4.0 / 3.0,
                fx: 1.0 / (k as f64 + 7.0),
                subopt: Some(1e-9 / (k as f64 + 1.0)),
                wall_secs: 0.001 * k as f64,
            });
        }
        t
    }

    fn render(ts: &[Trajectory], timing: bool) -> String {
        let mut buf = Vec::new();
        write_trajectories(ts, &mut buf, timing).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(render(&[], false), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_record_two_lines() {
        let mut t = Trajectory::new(Algorithm::Sgd, 3, 0.5);
        t.samples.push(Sample { epoch: 0, passes: 0.0, fx: 2.5, subopt: None, wall_secs: 1.0 });
        let s = render(&[t], false);
        assert_eq!(s, format!("{CSV_HEADER}\nsgd,3,0.5,0,0,2.5,,\n"));
        assert_eq!(s.lines().count(), 2);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut div = traj(Algorithm::Slbfgs, 2, 3);
        div.diverged_at = Some(7.25);
        let ts = vec![traj(Algorithm::Slbfgs, 1, 4), div, traj(Algorithm::Slbfgs, 2, 2), traj(Algorithm::Sqn, 1, 3)];
        let text = render(&ts, true);
        let back = read_trajectories(text.as_bytes()).unwrap();
        assert_eq!(back, ts);
        assert!(text.contains(",diverged,diverged,"));
    }

    #[test]
    fn unwritable_destination() {
        let err = write_trajectory_file("/nonexistent/dir/out.csv", &[], false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
