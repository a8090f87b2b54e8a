use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::table::LogTable;

fn log_standard_is(table: &LogTable) -> Result<f64> {
    let mut terms = Vec::with_capacity(table.m());
    for (i, p) in table.x.iter().enumerate() {
        if p.log_q == f64::NEG_INFINITY {
            return Err(Error::ZeroDensity {
                density: "q",
                index: table.n() + i,
            });
        }
        terms.push(p.log_phi - p.log_q);
    }
    Ok(log_sum_exp(&terms) - (table.m() as f64).ln())
}

fn log_reverse_is(table: &LogTable) -> Result<f64> {
    let mut terms = Vec::with_capacity(table.n());
    for (i, p) in table.y.iter().enumerate() {
        if p.log_phi == f64::NEG_INFINITY {
            return Err(Error::ZeroDensity {
                density: "phi",
                index: i,
            });
        }
        terms.push(p.log_q - p.log_phi);
    }
    Ok((table.n() as f64).ln() - log_sum_exp(&terms))
}

/// Standard importance sampling, `(1/M) sum_x phi(x)/q(x)`.
pub fn standard_is(table: &LogTable) -> Result<f64> {
    Ok(log_standard_is(table)?.exp())
}

/// Reverse importance sampling, `[(1/N) sum_y q(y)/phi(y)]^-1`.
pub fn reverse_is(table: &LogTable) -> Result<f64> {
    Ok(log_reverse_is(table)?.exp())
}

/// `sqrt(is * ris)`
pub fn geometric_mean(is: f64, ris: f64) -> f64 {
    (is * ris).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricEstimate {
    /// `sqrt(Stand-IS * RIS)`
    pub z_geo: f64,
    /// `sqrt(N/M) * z_geo`, the estimate that the reciprocal scoring rule
    /// converges to.
    pub z_bad: f64,
}

/// Geometric mean of standard and reverse IS, together with `Z_bad`.
pub fn geometric_mean_estimator(table: &LogTable) -> Result<GeometricEstimate> {
    let log_geo = 0.5 * (log_standard_is(table)? + log_reverse_is(table)?);
    let log_ratio = 0.5 * ((table.n() as f64).ln() - (table.m() as f64).ln());
    Ok(GeometricEstimate {
        z_geo: log_geo.exp(),
        z_bad: (log_geo + log_ratio).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GaussianEnergy, GaussianProposal, SampleSet};
    use crate::table::LogPair;

    fn table(ys: Vec<f64>, xs: Vec<f64>) -> LogTable {
        let s = SampleSet::from_points(1, ys, xs).unwrap();
        LogTable::evaluate(&s, &GaussianEnergy::new(1), &[1.0], &GaussianProposal::new(0.0, 2.0)).unwrap()
    }

    #[test]
    fn standard_is_two_points() {
        let t = table(vec![0.0], vec![0.0, 1.0]);
        let r = standard_is(&t).unwrap();
        assert!((r - 4.229407013699199).abs() < 1e-13, "{r}");
    }

    #[test]
    fn reverse_is_two_points() {
        let t = table(vec![0.0, 1.0], vec![0.0]);
        let r = reverse_is(&t).unwrap();
        assert!((r - 4.084133671026837).abs() < 1e-13, "{r}");
    }

    #[test]
    fn proportional_is_exact() {
        let c: f64 = 3.7;
        let pair = |l: f64| LogPair::new(c.ln() + l, l);
        let t =
            LogTable::from_log_pairs(vec![pair(-1.0), pair(-0.2)], vec![pair(-3.0), pair(0.4), pair(-0.9)]).unwrap();
        for v in [
            standard_is(&t).unwrap(),
            reverse_is(&t).unwrap(),
            geometric_mean_estimator(&t).unwrap().z_geo,
        ] {
            assert!((v - c).abs() <= 4.0 * f64::EPSILON * c, "{v}");
        }
    }

    #[test]
    fn geometric_mean_and_bad_estimate() {
        assert_eq!(geometric_mean(4.0, 9.0), 6.0);
        let pairs = |k: usize| {
            (0..k)
                .map(|i| LogPair::new(-(i as f64) * 0.1, -0.5))
                .collect::<Vec<_>>()
        };
        let t = LogTable::from_log_pairs(pairs(8), pairs(2)).unwrap();
        let g = geometric_mean_estimator(&t).unwrap();
        assert!((g.z_bad - 2.0 * g.z_geo).abs() < 1e-14 * g.z_bad);
    }

    #[test]
    fn zero_densities_are_errors() {
        let t = LogTable::from_log_pairs(
            vec![LogPair::new(0.0, 0.0)],
            vec![LogPair::new(f64::NEG_INFINITY, f64::NEG_INFINITY)],
        )
        .unwrap();
        assert_eq!(
            standard_is(&t).unwrap_err(),
            Error::ZeroDensity { density: "q", index: 1 }
        );
        let t = LogTable::from_log_pairs(
            vec![LogPair::new(f64::NEG_INFINITY, f64::NEG_INFINITY)],
            vec![LogPair::new(0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(
            reverse_is(&t).unwrap_err(),
            Error::ZeroDensity {
                density: "phi",
                index: 0
            }
        );
    }
}
