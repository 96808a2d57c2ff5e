//! Residual aggregation over point clouds: max and RMS per identity, with
//! the worst point recorded. Evaluation is parallel; masked points (domain
//! errors) are skipped and counted, hard errors abort the scan.

use rayon::prelude::*;

use crate::point::Point2;
use crate::{Error, Result};

/// Aggregated residual of one identity over an evaluation set.
#[derive(Clone, Debug)]
pub struct ResidualStat {
    pub label: String,
    pub max_abs: f64,
    pub rms: f64,
    pub worst: Point2,
    /// Points that actually entered the statistics.
    pub samples: usize,
    /// Points skipped by dynamic masks.
    pub masked: usize,
}

impl ResidualStat {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.samples > 0 && self.max_abs.is_finite() && self.max_abs < tolerance
    }
}

/// Named map from identity label to its aggregated residual.
#[derive(Clone, Debug, Default)]
pub struct ResidualReport {
    pub entries: Vec<ResidualStat>,
}

impl ResidualReport {
    pub fn push(&mut self, stat: ResidualStat) {
        self.entries.push(stat);
    }

    pub fn get(&self, label: &str) -> Option<&ResidualStat> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn max_over(&self, labels: &[&str]) -> f64 {
        self.entries
            .iter()
            .filter(|e| labels.contains(&e.label.as_str()))
            .fold(0.0_f64, |m, e| m.max(e.max_abs))
    }
}

/// Evaluate a pointwise |residual| over a cloud. The closure returns the
/// absolute residual magnitude at a point, `Err` with a masked-point error to
/// skip the point, or a hard error to abort.
pub fn scan<F>(label: &str, points: &[Point2], f: F) -> Result<ResidualStat>
where
    F: Fn(Point2) -> Result<f64> + Sync,
{
    let rows: Vec<std::result::Result<(Point2, f64), bool>> = points
        .par_iter()
        .map(|&p| match f(p) {
            Ok(v) => Ok((p, v.abs())),
            Err(e) if e.is_masked_point() => Err(true),
            Err(_) => Err(false),
        })
        .collect();
    let mut masked = 0usize;
    let mut kept: Vec<(Point2, f64)> = Vec::with_capacity(rows.len());
    for r in rows {
        match r {
            Ok(pair) => kept.push(pair),
            Err(true) => masked += 1,
            Err(false) => {
                // rerun serially to surface the original error
                for &p in points {
                    if let Err(e) = f(p) {
                        if !e.is_masked_point() {
                            return Err(e);
                        }
                    }
                }
                unreachable!("hard error vanished on rerun");
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::DependencyFailed {
            check: label.into(),
            reason: "every evaluation point was masked".into(),
        });
    }
    let mut max_abs = -1.0;
    let mut worst = kept[0].0;
    let mut sq = 0.0;
    for (p, v) in &kept {
        if *v > max_abs {
            max_abs = *v;
            worst = *p;
        }
        sq += v * v;
    }
    Ok(ResidualStat {
        label: label.into(),
        max_abs,
        rms: (sq / kept.len() as f64).sqrt(),
        worst,
        samples: kept.len(),
        masked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_aggregates_and_masks() {
        let pts: Vec<Point2> = (0..10)
            .map(|i| Point2 {
                x: i as f64,
                y: 0.0,
            })
            .collect();
        let stat = scan("demo", &pts, |p| {
            if p.x == 5.0 {
                Err(Error::DegeneratePoint { rho: 0.0 })
            } else {
                Ok(p.x)
            }
        })
        .unwrap();
        assert_eq!(stat.samples, 9);
        assert_eq!(stat.masked, 1);
        assert_eq!(stat.max_abs, 9.0);
        assert_eq!(stat.worst.x, 9.0);
    }

    #[test]
    fn hard_errors_abort() {
        let pts = [Point2 { x: 0.0, y: 0.0 }];
        let r = scan("demo", &pts, |_| {
            Err(Error::ConfigInvalid {
                message: "boom".into(),
            })
        });
        assert!(matches!(r, Err(Error::ConfigInvalid { .. })));
    }

    #[test]
    fn all_masked_is_a_dependency_failure() {
        let pts = [Point2 { x: 0.0, y: 0.0 }];
        let r = scan("demo", &pts, |_| Err(Error::DegeneratePoint { rho: 0.0 }));
        assert!(matches!(r, Err(Error::DependencyFailed { .. })));
    }
}
