//! Least-squares log-log slope fitting for the uniformity sweeps.

/// Outcome of a log-log slope fit.
#[derive(Debug, Clone, PartialEq)]
pub enum SlopeFit {
    /// Ordinary least squares over `(ln eps, ln value)`.
    Fitted {
        slope: f64,
        intercept: f64,
        /// root-mean-square residual of the fit in log space
        rms_residual: f64,
        /// half-width of the 95% confidence interval on the slope
        slope_ci95: f64,
        /// points dropped because their value was not positive
        dropped: usize,
    },
    /// Fewer than three usable points.
    NotEnoughPoints { usable: usize, dropped: usize },
}

impl SlopeFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            SlopeFit::Fitted { slope, .. } => Some(*slope),
            SlopeFit::NotEnoughPoints { .. } => None,
        }
    }
}

/// two-sided 97.5% Student-t quantiles for small dof (dof >= 1)
fn t975(dof: usize) -> f64 {
    const TABLE: [f64; 10] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    ];
    if dof == 0 {
        f64::INFINITY
    } else if dof <= TABLE.len() {
        TABLE[dof - 1]
    } else {
        1.96 + 2.4 / dof as f64
    }
}

/// Fit `ln value = slope * ln eps + intercept` by ordinary least squares.
///
/// Points with non-positive values are dropped (and counted); fewer than
/// three usable points yields `NotEnoughPoints`.
pub fn fit_log_log(points: &[(f64, f64)]) -> SlopeFit {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, v)| *e > 0.0 && *v > 0.0)
        .map(|&(e, v)| (e.ln(), v.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    let m = usable.len();
    if m < 3 {
        return SlopeFit::NotEnoughPoints { usable: m, dropped };
    }
    let mf = m as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let mx = sx / mf;
    let my = sy / mf;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let rms_residual = (ss_res / mf).sqrt();
    let dof = m - 2;
    let se = if dof > 0 {
        (ss_res / dof as f64 / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    SlopeFit::Fitted {
        slope,
        intercept,
        rms_residual,
        slope_ci95: t975(dof) * se,
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovered() {
        let a = -1.37;
        let pts: Vec<(f64, f64)> = [0.25, 0.125, 0.0625, 0.03125]
            .iter()
            .map(|&e: &f64| (e, 3.0 * e.powf(a)))
            .collect();
        match fit_log_log(&pts) {
            SlopeFit::Fitted { slope, rms_residual, .. } => {
                assert!((slope - a).abs() < 1e-12, "slope {slope}");
                assert!(rms_residual < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_values_give_zero_slope() {
        let pts: Vec<(f64, f64)> = [0.25, 0.125, 0.0625].iter().map(|&e| (e, 7.0)).collect();
        assert!(fit_log_log(&pts).slope().unwrap().abs() < 1e-13);
    }

    #[test]
    fn too_few_points() {
        let pts = [(0.25, 1.0), (0.125, 1.1)];
        assert!(matches!(
            fit_log_log(&pts),
            SlopeFit::NotEnoughPoints { usable: 2, dropped: 0 }
        ));
    }

    #[test]
    fn nonpositive_values_dropped() {
        let pts = [(0.25, 1.0), (0.125, 0.0), (0.0625, 1.2), (0.03125, 1.1)];
        match fit_log_log(&pts) {
            SlopeFit::Fitted { dropped, .. } => assert_eq!(dropped, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn noisy_power_law_within_tolerance() {
        // deterministic "noise" from a fixed irrational rotation, about 1%
        let a = 0.5;
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let e = 0.5f64.powi(i + 1);
                let noise = 1.0 + 0.01 * ((i as f64 * 2.399963).sin());
                (e, 2.0 * e.powf(a) * noise)
            })
            .collect();
        let slope = fit_log_log(&pts).slope().unwrap();
        assert!((slope - a).abs() < 0.02, "slope {slope}");
    }
}
