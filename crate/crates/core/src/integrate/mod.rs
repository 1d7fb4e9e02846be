mod dopri;
mod events;
mod period;
mod trajectory;

use std::sync::Arc;

pub use events::{find_event, find_events, refine_root, Direction};
pub use period::{measure_period, PeriodResult};
pub use trajectory::{Termination, Trajectory};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::SystemDef;

use dopri::{dense_coefficients, A, C, DENSE_ORDER, E, STAGES};

/// A first-order system `s' = f(t, s)` of fixed dimension.
pub trait VectorField<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `f(t, state)` into `out`. Errors signal that `state` is outside
    /// the region where the field is defined.
    fn eval(&self, t: T, state: &[T], out: &mut [T]) -> Result<()>;
}

/// The autonomous characteristic system `(x, Y)' = (Q, S)`.
impl<T: Real> VectorField<T> for SystemDef<T> {
    fn dim(&self) -> usize {
        self.n() + 1
    }

    fn eval(&self, _t: T, state: &[T], out: &mut [T]) -> Result<()> {
        self.rhs_into(state[0], &state[1..], out)
    }
}

impl<T: Real, F: VectorField<T> + ?Sized> VectorField<T> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: T, state: &[T], out: &mut [T]) -> Result<()> {
        (**self).eval(t, state, out)
    }
}

impl<T: Real, F: VectorField<T> + ?Sized> VectorField<T> for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: T, state: &[T], out: &mut [T]) -> Result<()> {
        (**self).eval(t, state, out)
    }
}

/// Infallible closure-backed field, handy for tests and ad-hoc systems.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F> VectorField<T> for FnField<F>
where
    F: Fn(T, &[T], &mut [T]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: T, state: &[T], out: &mut [T]) -> Result<()> {
        (self.f)(t, state, out);
        Ok(())
    }
}

/// Step-size control and horizon settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    /// Underflow guard; a rejected step below this size ends the integration.
    pub h_min: T,
    pub t_max: T,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            h_init: T::lit(1e-3),
            h_min: T::lit(1e-14),
            t_max: T::one(),
            max_steps: 2_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_t_max(mut self, t_max: T) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_tolerances(mut self, rtol: T, atol: T) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > T::zero() && self.atol > T::zero()) {
            return Err(Error::InvalidConfig(
                "rtol and atol must be positive".into(),
            ));
        }
        if !(self.h_min > T::zero() && self.h_min < self.h_init) {
            return Err(Error::InvalidConfig("require 0 < h_min < h_init".into()));
        }
        if !(self.t_max >= T::zero()) {
            return Err(Error::InvalidConfig("t_max must be non-negative".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Integrates `field` from `state0` at `t = 0` up to `config.t_max`.
///
/// Abnormal stops (step underflow, domain exit) are reported through
/// [`Trajectory::termination`]; only exceeding `max_steps` is an error.
pub fn integrate<T, F>(
    field: &F,
    state0: &[T],
    config: &IntegratorConfig<T>,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: VectorField<T> + ?Sized,
{
    integrate_until(field, state0, config, |_| false)
}

/// Like [`integrate`], but calls `stop` after every accepted step; returning
/// `true` ends the integration with [`Termination::EventFired`].
pub fn integrate_until<T, F, S>(
    field: &F,
    state0: &[T],
    config: &IntegratorConfig<T>,
    mut stop: S,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: VectorField<T> + ?Sized,
    S: FnMut(&Trajectory<T>) -> bool,
{
    config.validate()?;
    let dim = field.dim();
    if state0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: state0.len(),
        });
    }

    let mut traj = Trajectory::new(dim, T::zero(), state0);
    let t_end = config.t_max;
    if t_end <= T::zero() {
        return Ok(traj);
    }

    let mut k: [Vec<T>; STAGES] = std::array::from_fn(|_| vec![T::zero(); dim]);
    field.eval(T::zero(), state0, &mut k[0])?;

    let mut t = T::zero();
    let mut y = state0.to_vec();
    let mut y_new = vec![T::zero(); dim];
    let mut stage = vec![T::zero(); dim];
    let mut coeffs = vec![T::zero(); DENSE_ORDER * dim];
    let mut h = config.h_init.min(t_end);
    let mut steps = 0usize;

    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(5.0);
    let expo = T::lit(-0.2);

    loop {
        if t >= t_end {
            traj.set_termination(Termination::ReachedEnd);
            return Ok(traj);
        }
        if steps >= config.max_steps {
            return Err(Error::MaxStepsExceeded {
                t: t.to_f64_lossy(),
                max_steps: config.max_steps,
            });
        }

        let remaining = t_end - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        } else if h < config.h_min || t + h <= t {
            traj.set_termination(Termination::StepUnderflow { t, h });
            return Ok(traj);
        }

        // Stages 2..7; stage 1 is carried over (FSAL).
        let mut failure: Option<Error> = None;
        for s in 1..STAGES {
            for i in 0..dim {
                let mut acc = T::zero();
                for j in 0..s {
                    if A[s][j] != 0.0 {
                        acc += T::lit(A[s][j]) * k[j][i];
                    }
                }
                stage[i] = y[i] + h * acc;
            }
            if s == STAGES - 1 {
                y_new.copy_from_slice(&stage);
            }
            if let Err(e) = field.eval(t + T::lit(C[s]) * h, &stage, &mut k[s]) {
                failure = Some(e);
                break;
            }
        }

        let err = if failure.is_none() {
            let mut worst = T::zero();
            for i in 0..dim {
                let mut e = T::zero();
                for s in 0..STAGES {
                    if E[s] != 0.0 {
                        e += T::lit(E[s]) * k[s][i];
                    }
                }
                let e = (h * e).abs();
                let scale = config.atol + config.rtol * y[i].abs().max(y_new[i].abs());
                worst = worst.max(e / scale);
            }
            worst
        } else {
            T::infinity()
        };

        if err.is_finite() && err <= T::one() {
            let t_new = if last { t_end } else { t + h };
            let h_taken = t_new - t;
            dense_coefficients(h_taken, &y, &y_new, &k, &mut coeffs);
            traj.push_step(t_new, &y_new, &coeffs);
            steps += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[STAGES - 2]);

            let fac = if err == T::zero() {
                fac_max
            } else {
                (safety * err.powf(expo)).clamp(fac_min, fac_max)
            };
            h *= fac;

            if stop(&traj) {
                traj.set_termination(Termination::EventFired { t });
                return Ok(traj);
            }
        } else {
            let fac = if err.is_finite() {
                (safety * err.powf(expo)).clamp(fac_min, T::one())
            } else {
                T::lit(0.25)
            };
            h *= fac;
            if h < config.h_min {
                let termination = match failure {
                    Some(e) => Termination::DomainExit {
                        t,
                        reason: e.to_string(),
                    },
                    None => Termination::StepUnderflow { t, h },
                };
                traj.set_termination(termination);
                return Ok(traj);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> FnField<impl Fn(f64, &[f64], &mut [f64]) + Send + Sync> {
        FnField::new(2, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[1];
            out[1] = -s[0];
        })
    }

    #[test]
    fn harmonic_full_period() {
        let cfg = IntegratorConfig::default().with_t_max(2.0 * std::f64::consts::PI);
        let traj = integrate(&harmonic(), &[1.0, 0.0], &cfg).unwrap();
        let end = traj.final_state();
        assert!(
            (end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8,
            "{end:?}"
        );
        assert_eq!(traj.termination(), &Termination::ReachedEnd);
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_span_keeps_initial_state_only() {
        let cfg = IntegratorConfig::default().with_t_max(0.0);
        let traj = integrate(&harmonic(), &[0.3, -0.2], &cfg).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.final_state(), &[0.3, -0.2]);
    }

    #[test]
    fn tangent_blowup_underflows_near_half_pi() {
        let field = FnField::new(1, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = -s[0] * s[0] - 1.0;
        });
        let cfg = IntegratorConfig::default().with_t_max(2.0);
        let traj = integrate(&field, &[0.0], &cfg).unwrap();
        match traj.termination() {
            Termination::StepUnderflow { t, .. } => {
                assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "t = {t}")
            }
            other => panic!("unexpected termination {other:?}"),
        }
        assert!(matches!(traj.check(), Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn dense_output_reproduces_samples() {
        let cfg = IntegratorConfig::default().with_t_max(3.0);
        let traj = integrate(&harmonic(), &[1.0, 0.0], &cfg).unwrap();
        let mut buf = [0.0; 2];
        for k in 0..traj.steps() {
            traj.eval_segment_into(k, traj.time(k), &mut buf);
            assert!((buf[0] - traj.state(k)[0]).abs() <= 1e-12);
            traj.eval_segment_into(k, traj.time(k + 1), &mut buf);
            assert!((buf[1] - traj.state(k + 1)[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn dense_output_is_accurate_between_samples() {
        let cfg = IntegratorConfig::default().with_t_max(6.0);
        let traj = integrate(&harmonic(), &[1.0, 0.0], &cfg).unwrap();
        let worst = (0..600)
            .map(|i| {
                let t = i as f64 * 0.01;
                let s = traj.eval(t);
                (s[0] - t.cos()).abs().max((s[1] + t.sin()).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "dense error {worst:e}");
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = IntegratorConfig::<f64> {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&harmonic(), &[1.0, 0.0], &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn max_steps_is_an_error() {
        let mut cfg = IntegratorConfig::default().with_t_max(100.0);
        cfg.max_steps = 10;
        assert!(matches!(
            integrate(&harmonic(), &[1.0, 0.0], &cfg),
            Err(Error::MaxStepsExceeded { .. })
        ));
    }

    #[test]
    fn runs_in_single_precision() {
        let cfg = IntegratorConfig::<f32> {
            rtol: 1e-5,
            atol: 1e-6,
            h_init: 1e-2,
            h_min: 1e-6,
            t_max: std::f32::consts::PI,
            max_steps: 10_000,
        };
        let field = FnField::new(2, |_t: f32, s: &[f32], out: &mut [f32]| {
            out[0] = s[1];
            out[1] = -s[0];
        });
        let traj = integrate(&field, &[1.0f32, 0.0], &cfg).unwrap();
        assert!((traj.final_state()[0] + 1.0).abs() < 1e-3);
    }
}
