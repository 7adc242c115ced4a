use std::path::{Path, PathBuf};

use serde::Serialize;

use super::report::write_atomic;
use crate::bounds_stats::{
    chernoff_abort_bound, hoeffding_false_abort_bound, required_rounds_for,
    required_rounds_robust_for, scaling_factor, FCurve,
};
use crate::Error;

#[derive(Debug, Clone)]
pub struct BoundsParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Devices per round.
    pub devices: u64,
    pub curve: FCurve,
    /// Last `l` of the round sweep.
    pub sweep_rounds: u64,
}

/// The bounds at `(epsilon, delta, m)`. Chernoff and Hoeffding values are
/// taken at `l_robust`, the length of the robust run they describe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
    pub f: f64,
    pub l: u64,
    pub l_robust: u64,
    pub s: f64,
    pub mu: f64,
    pub failure_budget: u64,
    pub chernoff_bound: f64,
    pub chernoff_exact: f64,
    pub hoeffding_bound: f64,
    pub hoeffding_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundsSweepRow {
    pub l: u64,
    pub f: f64,
    /// `f^l`
    pub soundness_bound: f64,
    pub chernoff_bound: f64,
    pub chernoff_exact: f64,
    pub hoeffding_bound: f64,
    pub hoeffding_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonSweepRow {
    pub epsilon: f64,
    pub f: f64,
    pub l: u64,
    pub l_robust: u64,
    /// `l_robust / l`
    pub ratio: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTables {
    pub bounds: BoundsRow,
    pub rounds_sweep: Vec<RoundsSweepRow>,
    pub epsilon_sweep: Vec<EpsilonSweepRow>,
}

fn bounds_row(epsilon: f64, delta: f64, m: u64, f: f64) -> Result<BoundsRow, Error> {
    let l = required_rounds_for(f, delta)?;
    let l_robust = required_rounds_robust_for(f, delta)?;
    let c = chernoff_abort_bound(f, l_robust)?;
    let h = hoeffding_false_abort_bound(f, m, l_robust)?;
    Ok(BoundsRow {
        epsilon,
        delta,
        m,
        f,
        l,
        l_robust,
        s: scaling_factor(f)?,
        mu: h.mu,
        failure_budget: crate::bounds_stats::failure_budget(f, l_robust),
        chernoff_bound: c.bound,
        chernoff_exact: c.exact,
        hoeffding_bound: h.bound,
        hoeffding_exact: h.exact,
    })
}

pub fn bound_tables(params: &BoundsParams) -> Result<BoundTables, Error> {
    let f = params.curve.f_of_eps(params.epsilon)?;
    let bounds = bounds_row(params.epsilon, params.delta, params.devices, f)?;
    let rounds_sweep = (1..=params.sweep_rounds)
        .map(|l| {
            let c = chernoff_abort_bound(f, l)?;
            let h = hoeffding_false_abort_bound(f, params.devices, l)?;
            Ok(RoundsSweepRow {
                l,
                f,
                soundness_bound: f.powf(l as f64),
                chernoff_bound: c.bound,
                chernoff_exact: c.exact,
                hoeffding_bound: h.bound,
                hoeffding_exact: h.exact,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let epsilon_sweep = params
        .curve
        .points()
        .iter()
        .filter(|&&(_, v)| v < 1.0)
        .map(|&(eps, _)| {
            let f = params.curve.f_of_eps(eps)?;
            let l = required_rounds_for(f, params.delta)?;
            let l_robust = required_rounds_robust_for(f, params.delta)?;
            Ok(EpsilonSweepRow {
                epsilon: eps,
                f,
                l,
                l_robust,
                ratio: l_robust as f64 / l as f64,
                s: scaling_factor(f)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(BoundTables {
        bounds,
        rounds_sweep,
        epsilon_sweep,
    })
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

impl BoundTables {
    pub fn bounds_csv(&self) -> Result<String, Error> {
        to_csv(std::slice::from_ref(&self.bounds))
    }

    pub fn rounds_sweep_csv(&self) -> Result<String, Error> {
        to_csv(&self.rounds_sweep)
    }

    pub fn epsilon_sweep_csv(&self) -> Result<String, Error> {
        to_csv(&self.epsilon_sweep)
    }
}

/// Writes `bounds.json`, `bounds.csv`, `sweep_rounds.csv` and
/// `sweep_epsilon.csv` into `dir`; returns the paths written.
pub fn emit_bound_tables(
    params: &BoundsParams,
    dir: &Path,
) -> Result<(BoundTables, Vec<PathBuf>), Error> {
    let tables = bound_tables(params)?;
    let files = [
        (
            "bounds.json",
            serde_json::to_string_pretty(&tables.bounds).expect("bounds serialize") + "\n",
        ),
        ("bounds.csv", tables.bounds_csv()?),
        ("sweep_rounds.csv", tables.rounds_sweep_csv()?),
        ("sweep_epsilon.csv", tables.epsilon_sweep_csv()?),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
    }
    Ok((tables, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BoundsParams {
        BoundsParams {
            epsilon: 0.1,
            delta: 1e-6,
            devices: 10,
            curve: FCurve::illustrative(),
            sweep_rounds: 100,
        }
    }

    #[test]
    fn rounds_sweep_is_monotone() {
        let mut p = params();
        p.curve = FCurve::new(vec![(0.01, 0.99), (0.1, 0.9), (0.2, 0.8)]).unwrap();
        let t = bound_tables(&p).unwrap();
        assert_eq!(t.rounds_sweep.len(), 100);
        assert!(t.rounds_sweep.iter().all(|r| r.f == 0.9));
        assert!(t
            .rounds_sweep
            .windows(2)
            .all(|w| w[1].chernoff_bound < w[0].chernoff_bound));
        let first = &t.rounds_sweep[0];
        assert!((first.chernoff_bound - (-0.1f64 / 8.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn epsilon_sweep_follows_the_table() {
        let p = params();
        let t = bound_tables(&p).unwrap();
        let table: Vec<_> = p.curve.points().iter().filter(|(_, v)| *v < 1.0).collect();
        assert_eq!(t.epsilon_sweep.len(), table.len());
        for (row, &&(eps, v)) in t.epsilon_sweep.iter().zip(&table) {
            assert_eq!((row.epsilon, row.f), (eps, v));
            // l_robust lies in (s (l - 1), s l + 1]
            assert!((row.ratio - row.s).abs() <= row.s.max(1.0) / row.l as f64 + 1e-12);
        }
    }

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let (_, files) = emit_bound_tables(&params(), dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        for f in files {
            assert!(std::fs::metadata(&f).unwrap().len() > 0);
        }
        let sweep = std::fs::read_to_string(dir.path().join("sweep_rounds.csv")).unwrap();
        assert_eq!(sweep.lines().count(), 101);
        assert!(sweep.starts_with("l,f,soundness_bound,chernoff_bound"));
    }
}
