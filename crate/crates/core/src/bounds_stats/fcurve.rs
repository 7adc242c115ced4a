use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::BoundsError;

/// Sample curve shipped with the crate. The values are illustrative
/// placeholders with the right shape (non-increasing, between 3/4 and 1);
/// they are not derived from any SDP bound.
pub const ILLUSTRATIVE_CURVE_CSV: &str = "\
# ILLUSTRATIVE f(epsilon) curve: placeholder values, not an SDP result.
# Supply a real certified curve for any security-relevant use.
epsilon,v
0.01,0.995
0.02,0.99
0.05,0.975
0.1,0.95
0.15,0.925
0.2,0.9
0.25,0.875
0.3,0.85
0.35,0.825
0.4,0.8
0.45,0.775
0.5,0.75
";

/// Tabulated Mermin values `v = f(eps)` needed to certify output bias `eps`,
/// queried with a step-down rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FCurve {
    points: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct Row {
    epsilon: f64,
    v: f64,
}

impl FCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, BoundsError> {
        if points.is_empty() {
            return Err(BoundsError::InvalidInput("curve has no points".into()));
        }
        for (i, &(eps, v)) in points.iter().enumerate() {
            if !eps.is_finite() || eps < 0.0 {
                return Err(BoundsError::InvalidInput(format!(
                    "epsilon {eps} at row {i}"
                )));
            }
            if !(0.75..=1.0).contains(&v) {
                return Err(BoundsError::InvalidInput(format!(
                    "v = {v} at epsilon {eps} outside [3/4, 1]"
                )));
            }
            if i > 0 {
                let (prev_eps, prev_v) = points[i - 1];
                if eps <= prev_eps {
                    return Err(BoundsError::InvalidInput(format!(
                        "epsilon not strictly ascending at row {i}"
                    )));
                }
                if v > prev_v {
                    return Err(BoundsError::InvalidInput(format!(
                        "v increases from {prev_v} to {v} at row {i}"
                    )));
                }
            }
        }
        Ok(FCurve { points })
    }

    pub fn illustrative() -> Self {
        Self::from_csv_reader(ILLUSTRATIVE_CURVE_CSV.as_bytes()).expect("shipped curve is valid")
    }

    /// CSV with header `epsilon,v`; lines starting with `#` are comments.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, BoundsError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| BoundsError::Format(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["epsilon", "v"] {
            return Err(BoundsError::Format(format!(
                "expected header \"epsilon,v\", found {headers:?}"
            )));
        }
        let mut points = Vec::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| BoundsError::Format(format!("row {}: {e}", i + 1)))?;
            points.push((row.epsilon, row.v));
        }
        Self::new(points)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, BoundsError> {
        let file = std::fs::File::open(path)
            .map_err(|e| BoundsError::Format(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// `v` at the largest tabulated `eps_i <= eps`. Since `v` is non-increasing
    /// this never undercuts the requirement anywhere in `[eps_i, eps]`.
    pub fn f_of_eps(&self, eps: f64) -> Result<f64, BoundsError> {
        let (low, high) = self.range();
        if !(eps >= low && eps <= high) {
            return Err(BoundsError::OutOfRange { eps, low, high });
        }
        let idx = self.points.partition_point(|&(e, _)| e <= eps);
        Ok(self.points[idx - 1].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> FCurve {
        FCurve::new(vec![(0.1, 0.99), (0.2, 0.95), (0.3, 0.9)]).unwrap()
    }

    #[test]
    fn step_down_rule() {
        let c = curve();
        assert_eq!(c.f_of_eps(0.2).unwrap(), 0.95);
        assert_eq!(c.f_of_eps(0.25).unwrap(), 0.95);
        assert_eq!(c.f_of_eps(0.1).unwrap(), 0.99);
        assert_eq!(c.f_of_eps(0.3).unwrap(), 0.9);
    }

    #[test]
    fn out_of_range() {
        let c = curve();
        assert!(matches!(
            c.f_of_eps(0.05),
            Err(BoundsError::OutOfRange { .. })
        ));
        assert!(matches!(
            c.f_of_eps(0.31),
            Err(BoundsError::OutOfRange { .. })
        ));
        assert!(c.f_of_eps(f64::NAN).is_err());
    }

    #[test]
    fn validation() {
        assert!(FCurve::new(vec![(0.1, 0.7)]).is_err());
        assert!(FCurve::new(vec![(0.1, 0.9), (0.2, 0.95)]).is_err());
        assert!(FCurve::new(vec![(0.2, 0.9), (0.1, 0.8)]).is_err());
    }

    #[test]
    fn csv_parsing() {
        let c = FCurve::illustrative();
        assert_eq!(c.points().len(), 12);
        assert!(FCurve::from_csv_reader("eps,v\n0.1,0.9\n".as_bytes()).is_err());
        let c = FCurve::from_csv_reader("epsilon,v\n0.1, 0.9\n0.2,0.8\n".as_bytes()).unwrap();
        assert_eq!(c.f_of_eps(0.15).unwrap(), 0.9);
    }

    #[test]
    fn sweep_is_bounded_and_non_increasing() {
        let c = FCurve::illustrative();
        let (lo, hi) = c.range();
        let mut prev = 1.0;
        for i in 0..=1000 {
            let eps = (lo + (hi - lo) * i as f64 / 1000.0).min(hi);
            let v = c.f_of_eps(eps).unwrap();
            assert!((0.75..=1.0).contains(&v));
            assert!(v <= prev);
            prev = v;
        }
    }
}
