use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub response_rate_treated: f64,
    pub response_rate_control: f64,
    pub welch_t_statistic: f64,
    pub p_value: f64,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Arm response rates plus a two-sided Welch t-test on the binary outcomes.
pub fn summary_stats(ds: &Dataset) -> Result<SummaryStats> {
    let (treated, control) = ds.arm_indices();
    if treated.len() < 2 || control.len() < 2 {
        return Err(Error::TooFewRows { needed: 2, treated: treated.len(), control: control.len() });
    }
    let y = ds.outcome_f64();
    let yt: Vec<f64> = treated.iter().map(|&i| y[i]).collect();
    let yc: Vec<f64> = control.iter().map(|&i| y[i]).collect();
    let (mt, vt) = mean_var(&yt);
    let (mc, vc) = mean_var(&yc);
    let (nt, nc) = (yt.len() as f64, yc.len() as f64);
    let se2 = vt / nt + vc / nc;
    let diff = mt - mc;

    let (t, p) = if se2 == 0.0 {
        if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = diff / se2.sqrt();
        let df = se2 * se2 / ((vt / nt).powi(2) / (nt - 1.0) + (vc / nc).powi(2) / (nc - 1.0));
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(e.to_string()))?;
        (t, (2.0 * dist.cdf(-t.abs())).min(1.0))
    };
    Ok(SummaryStats { response_rate_treated: mt, response_rate_control: mc, welch_t_statistic: t, p_value: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use proptest::prelude::*;

    fn ds(t: &[u8], y: &[u8]) -> Dataset {
        let x = Matrix::new(t.len(), 1, vec![0.0; t.len()]).unwrap();
        Dataset::from_flags(x, t, y).unwrap()
    }

    #[test]
    fn rates_arithmetic() {
        let s = summary_stats(&ds(&[1, 1, 1, 1, 0, 0, 0, 0], &[1, 1, 0, 0, 0, 0, 0, 0])).unwrap();
        assert_eq!(s.response_rate_treated, 0.5);
        assert_eq!(s.response_rate_control, 0.0);
    }

    #[test]
    fn identical_arms_give_zero_statistic() {
        let s = summary_stats(&ds(&[1, 1, 1, 0, 0, 0], &[1, 0, 1, 1, 0, 1])).unwrap();
        assert_eq!(s.welch_t_statistic, 0.0);
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn welch_against_hand_computation() {
        // treated [1,1,1,0] mean .75 var .25; control [0,0,1,0] mean .25 var .25
        let s = summary_stats(&ds(&[1, 1, 1, 1, 0, 0, 0, 0], &[1, 1, 1, 0, 0, 0, 1, 0])).unwrap();
        let t = 0.5 / (0.25f64 / 4.0 + 0.25 / 4.0).sqrt();
        assert!((s.welch_t_statistic - t).abs() < 1e-12);
        // df = 6 for equal variances and sizes; two-sided p for t=1.41421 at df 6 is 0.20703
        assert!((s.p_value - 0.207_031_5).abs() < 1e-4, "{}", s.p_value);
    }

    #[test]
    fn empty_arm_is_an_error() {
        assert!(summary_stats(&ds(&[1, 1, 1], &[1, 0, 1])).is_err());
    }

    proptest! {
        #[test]
        fn rates_are_brute_force_arm_means(rows in proptest::collection::vec((0u8..2, 0u8..2), 4..40)) {
            let t: Vec<u8> = rows.iter().map(|r| r.0).collect();
            let y: Vec<u8> = rows.iter().map(|r| r.1).collect();
            let nt = t.iter().filter(|&&v| v == 1).count();
            prop_assume!(nt >= 2 && t.len() - nt >= 2);
            let s = summary_stats(&ds(&t, &y)).unwrap();
            let mut st = 0.0; let mut sc = 0.0;
            for i in 0..t.len() {
                if t[i] == 1 { st += f64::from(y[i]); } else { sc += f64::from(y[i]); }
            }
            prop_assert!((s.response_rate_treated - st / nt as f64).abs() < 1e-15);
            prop_assert!((s.response_rate_control - sc / (t.len() - nt) as f64).abs() < 1e-15);
        }
    }
}
