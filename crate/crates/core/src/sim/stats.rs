use super::SimError;

fn check(values: &[f64]) -> Result<(), SimError> {
    if values.is_empty() {
        return Err(SimError::EmptyPopulation);
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(SimError::NegativeBalance);
    }
    Ok(())
}

/// Mean absolute difference over all ordered pairs divided by `2 n^2 mean`.
pub fn gini(values: &[f64]) -> Result<f64, SimError> {
    check(values)?;
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Err(SimError::AllZero);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // Sum over pairs of |x_i - x_j| equals 2 * sum_i (2i - n + 1) x_(i) for ascending order.
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x).sum();
    Ok(2.0 * weighted / (2.0 * n * total))
}

/// Share of the total held by the `ceil(fraction * n)` largest values. Zero
/// when everything is zero.
pub fn top_share(values: &[f64], fraction: f64) -> Result<f64, SimError> {
    check(values)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SimError::ConfigInvalid(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let n = values.len();
    // Guard against products like 0.1 * 30 rounding just above an integer.
    let k = ((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[..k.min(n)].iter().sum::<f64>() / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_gini(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let diffs: f64 = v.iter().flat_map(|a| v.iter().map(move |b| (a - b).abs())).sum();
        diffs / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[100.0, 0.0, 0.0, 0.0]).unwrap(), 0.75);
        assert_eq!(gini(&[5.0; 8]).unwrap(), 0.0);
        let n = 6;
        let mut v = vec![1.0; n - 1];
        v.push(1e12);
        assert!((gini(&v).unwrap() - (n as f64 - 1.0) / n as f64).abs() < 1e-9);
        assert_eq!(gini(&[0.0, 0.0]), Err(SimError::AllZero));
        assert_eq!(gini(&[]), Err(SimError::EmptyPopulation));
        assert_eq!(gini(&[-1.0, 2.0]), Err(SimError::NegativeBalance));
    }

    #[test]
    fn top_share_examples() {
        let mut v = vec![0.0; 10];
        v[0] = 100.0;
        assert_eq!(top_share(&v, 0.1).unwrap(), 1.0);
        assert!((top_share(&[3.0; 10], 0.1).unwrap() - 0.1).abs() < 1e-12);
        // 0.1 * 30 is 3.0000000000000004 in binary floating point.
        assert!((top_share(&[1.0; 30], 0.1).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(top_share(&[], 0.1), Err(SimError::EmptyPopulation));
        assert!(matches!(top_share(&[1.0], 0.0), Err(SimError::ConfigInvalid(_))));
    }

    proptest! {
        #[test]
        fn gini_matches_pairwise_definition(v in prop::collection::vec(0.0f64..1000.0, 1..40)) {
            prop_assume!(v.iter().sum::<f64>() > 0.0);
            let g = gini(&v).unwrap();
            prop_assert!((g - brute_gini(&v)).abs() < 1e-9);
            prop_assert!((0.0..1.0).contains(&g));
        }

        #[test]
        fn top_share_is_monotone_in_fraction(v in prop::collection::vec(0.0f64..1000.0, 1..40), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(top_share(&v, lo).unwrap() <= top_share(&v, hi).unwrap() + 1e-12);
            prop_assert!(top_share(&v, hi).unwrap() <= 1.0 + 1e-12);
        }
    }
}
