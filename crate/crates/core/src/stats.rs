//! Small descriptive statistics shared by the evaluation code.

use crate::error::{Error, Result};

/// Mean and population standard deviation. `(0, 0)` for empty input.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Percentile with linear interpolation between the closest ranks.
///
/// `n = 50` is the median and `n = 100` the maximum. With rank
/// `r = n/100 * (len - 1)` the result is `(1 - f) v[floor r] + f v[floor r + 1]`.
pub fn percentile(values: &[f64], n: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=100.0).contains(&n) {
        return Err(Error::BadVariant(format!("percentile {n} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(percentile_of_sorted(&sorted, n))
}

pub(crate) fn percentile_of_sorted(sorted: &[f64], n: f64) -> f64 {
    let rank = n / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if frac == 0.0 || lo + 1 >= sorted.len() {
        sorted[lo]
    } else {
        (1.0 - frac) * sorted[lo] + frac * sorted[lo + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[5.0], 0.0).unwrap(), 5.0);
        assert_eq!(percentile(&[5.0], 37.0).unwrap(), 5.0);
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 50.0).unwrap(), 2.5);
        assert_eq!(percentile(&[0.0, 10.0], 25.0).unwrap(), 2.5);
        assert_eq!(percentile(&[3.0, 9.0, 1.0], 100.0).unwrap(), 9.0);
        assert_eq!(percentile(&[3.0, 9.0, 1.0], 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&[0.0, 1.0, 2.0, 3.0], 50.0).unwrap(), 1.5);
    }

    #[test]
    fn percentile_errors() {
        assert_eq!(percentile(&[], 50.0), Err(Error::EmptyInput));
        assert!(matches!(percentile(&[1.0], 101.0), Err(Error::BadVariant(_))));
        assert!(matches!(percentile(&[1.0], f64::NAN), Err(Error::BadVariant(_))));
    }

    #[test]
    fn mean_std_population() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }
}
