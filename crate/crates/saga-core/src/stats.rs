//! Cost-model arithmetic, trace smoothing and alignment, and the summary
//! statistics used to compare algorithm arms (mean ± std, Welch's t-test).
//!
//! The Student-t distribution function is computed via the regularized
//! incomplete beta function (continued fraction), accurate to well under
//! 1e-8 over the degrees of freedom that arise here.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::GaError;
use crate::report::RunReport;

/// Relative cost of the surrogate stage for an induction algorithm whose
/// training cost scales as `n^c` in the number of instances.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostModel {
    /// 1 for tree-like linear cost, 2 for quadratic, 3 for cubic.
    pub complexity_exponent: f64,
    /// Sampling-schedule base.
    pub a: f64,
    /// Number of surrogate levels.
    pub b: usize,
}

impl CostModel {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.complexity_exponent < 1.0 {
            return Err(GaError::BadConfig(
                "complexity exponent below 1 breaks the cost bound".to_string(),
            ));
        }
        if self.a.is_nan() || self.a <= 1.0 || self.b < 1 {
            return Err(GaError::BadConfig(
                "cost model needs a > 1 and b >= 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// `Σ_{i=1..b} (a^-i)^c`: surrogate-stage training cost relative to one
/// full-data stage at equal per-level evaluation counts. Strictly below 1
/// for any valid model.
pub fn schedule_cost_ratio(model: &CostModel) -> Result<f64, GaError> {
    model.validate()?;
    let mut total = 0.0;
    for i in 1..=model.b {
        total += libm::pow(model.a, -(i as f64) * model.complexity_exponent);
    }
    Ok(total)
}

/// Moving average with partial warm-up windows: element `t` averages the
/// last `min(t+1, window)` values, so output length equals input length.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>, GaError> {
    if series.is_empty() {
        return Err(GaError::BadConfig(
            "cannot smooth an empty series".to_string(),
        ));
    }
    if window < 1 {
        return Err(GaError::BadConfig(
            "smoothing window must be at least 1".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (t, &x) in series.iter().enumerate() {
        sum += x;
        if t >= window {
            sum -= series[t - window];
        }
        let span = (t + 1).min(window);
        out.push(sum / span as f64);
    }
    Ok(out)
}

/// Sample mean and standard deviation (n−1 denominator; 0 for n = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Result<Summary, GaError> {
    if values.is_empty() {
        return Err(GaError::BadConfig(
            "cannot summarize zero values".to_string(),
        ));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    };
    Ok(Summary { mean, std, n })
}

/// Per-metric summaries over a set of runs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSummary {
    pub validation_accuracy: Summary,
    pub test_accuracy: Summary,
    pub elapsed_secs: Summary,
    pub instances_processed: Summary,
}

pub fn summarize_runs(runs: &[RunReport]) -> Result<RunSummary, GaError> {
    let collect = |f: &dyn Fn(&RunReport) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
    Ok(RunSummary {
        validation_accuracy: summarize(&collect(&|r| r.best_validation_accuracy))?,
        test_accuracy: summarize(&collect(&|r| r.test_accuracy))?,
        elapsed_secs: summarize(&collect(&|r| r.elapsed_secs))?,
        instances_processed: summarize(&collect(&|r| r.counters.instances_processed as f64))?,
    })
}

const BETA_EPS: f64 = 1e-12;
const BETA_FPMIN: f64 = 1e-300;

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < BETA_FPMIN {
        d = BETA_FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < BETA_FPMIN {
            d = BETA_FPMIN;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < BETA_FPMIN {
            c = BETA_FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < BETA_FPMIN {
            d = BETA_FPMIN;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < BETA_FPMIN {
            c = BETA_FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < BETA_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log(1.0 - x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability of Student's t distribution:
/// `P(|T| >= |t|)` at `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Variance floor applied only when both samples are exactly constant but
/// their means differ, so maximal separation yields a finite, tiny p.
const VARIANCE_FLOOR: f64 = 1e-12;

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of
/// freedom. Returns `(t, two_sided_p)`. Two constant samples with equal
/// means give `(0, 1)` by convention.
pub fn welch_t(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64), GaError> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(GaError::BadConfig(
            "each sample needs at least two values".to_string(),
        ));
    }
    let a = summarize(sample_a)?;
    let b = summarize(sample_b)?;
    let mut va = a.std * a.std;
    let mut vb = b.std * b.std;
    if va == 0.0 && vb == 0.0 {
        if a.mean == b.mean {
            return Ok((0.0, 1.0));
        }
        va = VARIANCE_FLOOR;
        vb = VARIANCE_FLOOR;
    }
    let na = a.n as f64;
    let nb = b.n as f64;
    let se2 = va / na + vb / nb;
    let t = (a.mean - b.mean) / libm::sqrt(se2);
    let df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    Ok((t, student_t_two_sided(t, df)))
}

/// Uniform grid of `points` values from 0 to `max_x` inclusive, used to
/// align traces of different lengths before averaging.
pub fn alignment_grid(max_x: f64, points: usize) -> Result<Vec<f64>, GaError> {
    if points < 2 || max_x.is_nan() || max_x <= 0.0 {
        return Err(GaError::BadConfig(
            "alignment needs at least two points over a positive span".to_string(),
        ));
    }
    // Scale a [0, 1] fraction rather than accumulating a rounded step so the
    // final grid point equals `max_x` exactly.
    let span = (points - 1) as f64;
    Ok((0..points).map(|i| max_x * (i as f64 / span)).collect())
}

/// Samples a step function (right-continuous, holding the last value) at
/// each grid point; grid points before the first x take the first y.
pub fn resample_step(xs: &[f64], ys: &[f64], grid: &[f64]) -> Result<Vec<f64>, GaError> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(GaError::BadConfig(
            "resampling needs matching, non-empty coordinates".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(grid.len());
    for &g in grid {
        // Last index with xs[i] <= g; partition_point gives the count.
        let idx = xs.partition_point(|&x| x <= g);
        out.push(if idx == 0 { ys[0] } else { ys[idx - 1] });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(c: f64) -> CostModel {
        CostModel {
            complexity_exponent: c,
            a: 2.0,
            b: 4,
        }
    }

    #[test]
    fn cost_ratios_match_exact_rationals() {
        assert!((schedule_cost_ratio(&model(1.0)).unwrap() - 0.9375).abs() < 1e-12);
        assert!((schedule_cost_ratio(&model(2.0)).unwrap() - 85.0 / 256.0).abs() < 1e-12);
        assert!((schedule_cost_ratio(&model(3.0)).unwrap() - 585.0 / 4096.0).abs() < 1e-12);
    }

    #[test]
    fn cost_ratio_decreases_in_exponent_and_stays_below_one() {
        let r1 = schedule_cost_ratio(&model(1.0)).unwrap();
        let r2 = schedule_cost_ratio(&model(2.0)).unwrap();
        let r3 = schedule_cost_ratio(&model(3.0)).unwrap();
        assert!(r1 > r2 && r2 > r3);
        assert!(r1 < 1.0);
    }

    #[test]
    fn cost_ratio_approaches_one_for_deep_linear_schedules() {
        // Mathematically 1 - 2^-60; the accumulated f64 sum rounds to 1.0
        // once terms fall below the ulp of 1, so allow equality.
        let deep = CostModel {
            complexity_exponent: 1.0,
            a: 2.0,
            b: 60,
        };
        let r = schedule_cost_ratio(&deep).unwrap();
        assert!(r <= 1.0);
        assert!(r > 0.999_999_9);
    }

    #[test]
    fn cost_model_rejects_sublinear_exponent() {
        let bad = CostModel {
            complexity_exponent: 0.5,
            a: 2.0,
            b: 4,
        };
        assert!(schedule_cost_ratio(&bad).is_err());
    }

    #[test]
    fn moving_average_warm_up_uses_partial_windows() {
        assert_eq!(
            moving_average(&[1.0, 2.0, 3.0], 2).unwrap(),
            vec![1.0, 1.5, 2.5]
        );
        assert_eq!(
            moving_average(&[1.0, 2.0, 3.0, 4.0], 10).unwrap(),
            vec![1.0, 1.5, 2.0, 2.5]
        );
    }

    #[test]
    fn moving_average_window_one_is_identity() {
        let xs = vec![3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(moving_average(&xs, 1).unwrap(), xs);
    }

    #[test]
    fn moving_average_fixes_constants_and_rejects_bad_input() {
        assert_eq!(moving_average(&[2.0; 6], 3).unwrap(), vec![2.0; 6]);
        assert!(moving_average(&[], 3).is_err());
        assert!(moving_average(&[1.0], 0).is_err());
    }

    #[test]
    fn moving_average_preserves_monotonicity() {
        let xs = vec![0.1, 0.1, 0.3, 0.3, 0.3, 0.7, 0.9, 0.9, 1.0];
        let smooth = moving_average(&xs, 4).unwrap();
        for w in smooth.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
    }

    #[test]
    fn summarize_single_and_pair() {
        let one = summarize(&[0.5]).unwrap();
        assert_eq!(one.mean, 0.5);
        assert_eq!(one.std, 0.0);
        let pair = summarize(&[1.0, 3.0]).unwrap();
        assert_eq!(pair.mean, 2.0);
        assert!((pair.std - libm::sqrt(2.0)).abs() < 1e-15);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summarize_matches_independent_recomputation() {
        // Spreadsheet recomputation: mean 5.06, sample std 2.8646...
        let values = vec![1.2, 3.4, 5.6, 7.8, 9.0, 2.1, 4.3, 6.5, 8.7, 2.0];
        let s = summarize(&values).unwrap();
        assert!((s.mean - 5.06).abs() < 1e-12);
        assert!((s.std - 2.886_828_324_957_648).abs() < 1e-12);
    }

    #[test]
    fn t_distribution_matches_reference_values() {
        let cases = [
            (1.0, 1.0, 0.5),
            (2.0, 5.0, 0.101_939_478_829_858_28),
            (-1.5, 7.3, 0.175_563_092_803_086_02),
            (2.776, 4.0, 0.050_022_778_319_976_4),
            (0.0, 3.0, 1.0),
            (5.5114, 4.0, 0.005_288_456_834_505_647),
        ];
        for (t, df, expected) in cases {
            let p = student_t_two_sided(t, df);
            assert!(
                (p - expected).abs() < 1e-8,
                "p({t}, {df}) = {p}, expected {expected}"
            );
        }
    }

    #[test]
    fn welch_identical_samples_give_unit_p() {
        let xs = [0.8, 0.9, 0.85, 0.95];
        let (t, p) = welch_t(&xs, &xs).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn welch_constant_separated_samples_are_significant() {
        let (t, p) = welch_t(&[0.0; 4], &[1.0; 4]).unwrap();
        assert!(t < 0.0);
        assert!(p < 0.001);
    }

    #[test]
    fn welch_constant_equal_samples_follow_convention() {
        let (t, p) = welch_t(&[2.0; 3], &[2.0; 5]).unwrap();
        assert_eq!((t, p), (0.0, 1.0));
    }

    #[test]
    fn welch_matches_closed_form_fixture() {
        // Hand evaluation: means 2.3 and 3.2, both variances 0.04, so
        // t = -0.9 / sqrt(0.08/3) and df = 4.
        let a = [2.1, 2.5, 2.3];
        let b = [3.0, 3.4, 3.2];
        let (t, p) = welch_t(&a, &b).unwrap();
        assert!((t - (-5.511_351_921_262_157)).abs() < 1e-6, "t = {t}");
        assert!((p - 0.005_288_623_386_241_498).abs() < 1e-8, "p = {p}");
    }

    #[test]
    fn welch_is_antisymmetric() {
        let a = [0.91, 0.88, 0.95, 0.90];
        let b = [0.80, 0.85, 0.79, 0.83, 0.81];
        let (t_ab, p_ab) = welch_t(&a, &b).unwrap();
        let (t_ba, p_ba) = welch_t(&b, &a).unwrap();
        assert_eq!(t_ab, -t_ba);
        assert_eq!(p_ab, p_ba);
    }

    #[test]
    fn welch_rejects_tiny_samples() {
        assert!(welch_t(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn alignment_grid_is_uniform_inclusive() {
        let grid = alignment_grid(10.0, 5).unwrap();
        assert_eq!(grid, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert!(alignment_grid(0.0, 5).is_err());
        assert!(alignment_grid(1.0, 1).is_err());
    }

    #[test]
    fn resample_holds_last_value() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.1, 0.5, 0.9];
        let grid = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
        let out = resample_step(&xs, &ys, &grid).unwrap();
        assert_eq!(out, vec![0.1, 0.1, 0.5, 0.5, 0.9, 0.9]);
        // A grid point before the first event takes the first value.
        let early = resample_step(&[1.0], &[0.7], &[0.0]).unwrap();
        assert_eq!(early, vec![0.7]);
        assert!(resample_step(&[], &[], &[0.0]).is_err());
    }
}
