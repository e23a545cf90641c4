//! Running averages, standard errors and Welch's t-test.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// `out[t] = mean(xs[..=t])`.
pub fn running_average(xs: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            total += x;
            total / (i + 1) as f64
        })
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; `None` below two samples.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Sample standard deviation over `sqrt(n)`.
pub fn standard_error(xs: &[f64]) -> Option<f64> {
    sample_variance(xs).map(|v| (v / xs.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's unequal-variance t-test. `None` when either sample has fewer than
/// two points or both variances vanish.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<WelchTest> {
    let (va, vb) = (sample_variance(a)?, sample_variance(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 <= 0.0 || !se2.is_finite() {
        return None;
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Some(WelchTest { t, df, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_average_examples() {
        assert_eq!(running_average(&[2.0, 4.0, 0.0]), vec![2.0, 3.0, 2.0]);
        assert!(running_average(&[]).is_empty());
    }

    #[test]
    fn standard_error_of_known_sample() {
        // variance of 1..=5 is 2.5
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((standard_error(&xs).unwrap() - (2.5f64 / 5.0).sqrt()).abs() < 1e-15);
        assert_eq!(standard_error(&[1.0]), None);
    }

    #[test]
    fn constant_samples_have_no_test() {
        assert_eq!(welch_t_test(&[1.0; 10], &[1.0; 10]), None);
    }

    #[test]
    fn welch_matches_hand_computation() {
        // means 3 and 6, variances 2.5 each, n = 5: t = -3, df = 8
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [4.0, 5.0, 6.0, 7.0, 8.0];
        let w = welch_t_test(&a, &b).unwrap();
        assert!((w.t + 3.0).abs() < 1e-12);
        assert!((w.df - 8.0).abs() < 1e-12);
        // two-sided tail of t(8) at 3, from tables
        assert!((w.p - 0.01707).abs() < 1e-4);
    }
}
