use crate::scalar::Real;

/// `c(x) = K (M - 2K (x-x0)^2) / (M + K (x-x0)^2)^(5/2)`.
pub fn doping_profile_candidate<T: Real>(k: T, m: T, x0: T, x: T) -> T {
    let s = (x - x0) * (x - x0);
    k * (m - T::lit(2.0) * k * s) / (m + k * s).powf(T::lit(2.5))
}

/// Distance from `x0` beyond which the candidate is negative, `sqrt(M / 2K)`.
pub fn doping_sign_radius<T: Real>(k: T, m: T) -> T {
    (m / (T::lit(2.0) * k)).sqrt()
}

/// Scans `samples` equispaced points of `[lo, hi]` for a negative value of
/// `profile` and returns a witness on the negative side of the sign change,
/// refined by bisection.
///
/// If the profile is already negative at `lo`, the first negative-to-
/// non-negative change is refined instead; a profile negative on the whole
/// grid yields `lo`.
pub fn check_positivity_fails<T: Real>(
    profile: impl Fn(T) -> T,
    lo: T,
    hi: T,
    samples: usize,
) -> Option<T> {
    let samples = samples.max(2);
    let at = |i: usize| lo + (hi - lo) * T::from_count(i) / T::from_count(samples - 1);
    let negative = |v: T| v < T::zero();
    let first_negative = negative(profile(lo));
    let mut prev = lo;
    for i in 1..samples {
        let x = at(i);
        if negative(profile(x)) != first_negative {
            // Bracket [prev, x] with the negative end known.
            let (mut neg, mut pos) = if first_negative { (prev, x) } else { (x, prev) };
            for _ in 0..200 {
                let mid = (neg + pos) * T::lit(0.5);
                if mid == neg || mid == pos {
                    break;
                }
                if negative(profile(mid)) {
                    neg = mid;
                } else {
                    pos = mid;
                }
            }
            return Some(neg);
        }
        prev = x;
    }
    first_negative.then_some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_values() {
        assert!((doping_profile_candidate(1.0f64, 1.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        let v = doping_profile_candidate(1.0f64, 1.0, 0.0, 1.0);
        assert!((v + 1.0 / 2f64.powf(2.5)).abs() < 1e-15);
    }

    #[test]
    fn witnesses() {
        let w = check_positivity_fails(
            |x: f64| doping_profile_candidate(1.0, 1.0, 0.0, x),
            -5.0,
            5.0,
            1001,
        )
        .unwrap();
        assert!((w.abs() - 0.5f64.sqrt()).abs() < 1e-12, "{w}");
        assert!(doping_profile_candidate(1.0, 1.0, 0.0, w) < 0.0);
        assert_eq!(check_positivity_fails(|_| 1.0, -1.0, 1.0, 100), None);
        let w: f64 = check_positivity_fails(|x: f64| 1.0 - x * x, -2.0, 2.0, 101).unwrap();
        assert!(w.abs() > 1.0 && (w.abs() - 1.0) < 1e-12);
        assert_eq!(check_positivity_fails(|_| -1.0, 0.0, 1.0, 10), Some(0.0));
    }
}
