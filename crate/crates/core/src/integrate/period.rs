use crate::error::{Error, Result};
use crate::scalar::{distance, max_abs, Real};

use super::events::{scan, Direction};
use super::{integrate_until, IntegratorConfig, VectorField};

/// Measured return time of an orbit through a Poincare section.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodResult<T> {
    pub period: T,
    /// Euclidean distance between the state at `t = period` and the initial
    /// state. Large values mean the orbit is not closed.
    pub return_error: T,
    /// Number of section crossings examined.
    pub n_crossings_used: usize,
    /// Index of the state component defining the section.
    pub section_component: usize,
}

/// Distance below which a return is accepted immediately, relative to the
/// state scale.
const CLOSE_RETURN: f64 = 1e-8;

/// Measures the period of the orbit through `state0`.
///
/// The section is `{ s_k = state0_k }` crossed in the same direction as at
/// `t = 0`, with `k` the component of largest initial velocity. Among the
/// crossings found up to `config.t_max` the earliest one whose full-state
/// return distance is within `2 d_min + 1e-8 * scale` of the best is chosen,
/// which rejects both section-only (aliased) returns and later multiples of
/// the period. Integration stops at the first crossing that closes to
/// `1e-8 * scale`.
pub fn measure_period<T, F>(
    field: &F,
    state0: &[T],
    config: &IntegratorConfig<T>,
) -> Result<PeriodResult<T>>
where
    T: Real,
    F: VectorField<T> + ?Sized,
{
    let dim = field.dim();
    if state0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: state0.len(),
        });
    }
    let mut velocity = vec![T::zero(); dim];
    field.eval(T::zero(), state0, &mut velocity)?;
    let (k, speed) = velocity
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bk, bv), (i, v)| {
            if v.abs() > bv.abs() {
                (i, *v)
            } else {
                (bk, bv)
            }
        });
    if speed == T::zero() {
        // Equilibrium: nothing returns.
        return Err(Error::NoReturn {
            t_max: config.t_max.to_f64_lossy(),
        });
    }
    let direction = if speed > T::zero() {
        Direction::Rising
    } else {
        Direction::Falling
    };
    let level = state0[k];
    let scale = T::one().max(max_abs(state0));
    let close = T::lit(CLOSE_RETURN) * scale;

    let mut candidates: Vec<(T, T)> = Vec::new();
    let mut scanned = 0usize;
    let mut buf = vec![T::zero(); dim];
    let section = |_: T, s: &[T]| s[k] - level;

    let traj = integrate_until(field, state0, config, |traj| {
        let mut closed = false;
        scan(traj, &section, direction, scanned, |t| {
            traj.eval_into(t, &mut buf);
            let d = distance(&buf, state0);
            candidates.push((t, d));
            closed = d <= close;
            closed
        });
        scanned = traj.steps();
        closed
    })?;

    if candidates.is_empty() {
        traj.check()?;
        return Err(Error::NoReturn {
            t_max: config.t_max.to_f64_lossy(),
        });
    }

    let d_min = candidates.iter().fold(T::infinity(), |m, c| m.min(c.1));
    let accept = T::lit(2.0) * d_min + close;
    let (period, return_error) = *candidates
        .iter()
        .find(|c| c.1 <= accept)
        .expect("minimum candidate always qualifies");

    Ok(PeriodResult {
        period,
        return_error,
        n_crossings_used: candidates.len(),
        section_component: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::FnField;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_period() {
        let field = FnField::new(2, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[1];
            out[1] = -s[0];
        });
        let cfg = IntegratorConfig::default().with_t_max(20.0);
        let r = measure_period(&field, &[0.5, 0.0], &cfg).unwrap();
        assert!((r.period - 2.0 * PI).abs() < 1e-8, "{}", r.period);
        assert!(r.return_error <= 1e-8);
        assert_eq!(r.section_component, 1);
    }

    #[test]
    fn equilibrium_has_no_return() {
        let field = FnField::new(2, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[1];
            out[1] = -s[0];
        });
        let cfg = IntegratorConfig::default().with_t_max(20.0);
        assert!(matches!(
            measure_period(&field, &[0.0, 0.0], &cfg),
            Err(Error::NoReturn { .. })
        ));
    }

    #[test]
    fn short_horizon_has_no_return() {
        let field = FnField::new(2, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[1];
            out[1] = -s[0];
        });
        let cfg = IntegratorConfig::default().with_t_max(3.0);
        assert!(matches!(
            measure_period(&field, &[1.0, 0.0], &cfg),
            Err(Error::NoReturn { .. })
        ));
    }

    #[test]
    fn open_orbit_reports_return_error() {
        // Slowly decaying oscillator: returns but never closes.
        let field = FnField::new(2, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[1];
            out[1] = -s[0] - 0.01 * s[1];
        });
        let cfg = IntegratorConfig::default().with_t_max(15.0);
        let r = measure_period(&field, &[1.0, 0.0], &cfg).unwrap();
        assert!(r.return_error > 1e-3);
        assert!((r.period - 2.0 * PI).abs() < 0.05);
    }
}
