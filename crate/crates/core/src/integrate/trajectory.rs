use crate::error::{Error, Result};
use crate::scalar::Real;

use super::dopri::{dense_eval, DENSE_ORDER};

/// Why an integration stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination<T> {
    /// Reached `t_max`.
    ReachedEnd,
    /// A caller-supplied stop condition fired at `t`.
    EventFired { t: T },
    /// Step size fell below `h_min`: a finite-time singularity of the
    /// integrated quantities is suspected.
    StepUnderflow { t: T, h: T },
    /// The state could not be advanced without leaving the field's domain.
    DomainExit { t: T, reason: String },
}

impl<T: Real> Termination<T> {
    pub fn is_abnormal(&self) -> bool {
        matches!(self, Self::StepUnderflow { .. } | Self::DomainExit { .. })
    }
}

/// Dense-output time series of an integration.
///
/// Samples are stored at strictly increasing times; each step between two
/// consecutive samples carries a quartic interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    dim: usize,
    times: Vec<T>,
    states: Vec<T>,
    dense: Vec<T>,
    termination: Termination<T>,
}

impl<T: Real> Trajectory<T> {
    pub(crate) fn new(dim: usize, t0: T, state0: &[T]) -> Self {
        Self {
            dim,
            times: vec![t0],
            states: state0.to_vec(),
            dense: Vec::new(),
            termination: Termination::ReachedEnd,
        }
    }

    pub(crate) fn push_step(&mut self, t: T, state: &[T], coeffs: &[T]) {
        debug_assert!(t > *self.times.last().unwrap());
        debug_assert_eq!(coeffs.len(), DENSE_ORDER * self.dim);
        self.times.push(t);
        self.states.extend_from_slice(state);
        self.dense.extend_from_slice(coeffs);
    }

    pub(crate) fn set_termination(&mut self, termination: Termination<T>) {
        self.termination = termination;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored samples (steps + 1).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn time(&self, i: usize) -> T {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn t_start(&self) -> T {
        self.times[0]
    }

    pub fn t_final(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> &[T] {
        self.state(self.len() - 1)
    }

    pub fn termination(&self) -> &Termination<T> {
        &self.termination
    }

    /// Converts an abnormal termination into the corresponding error.
    pub fn check(&self) -> Result<()> {
        match &self.termination {
            Termination::StepUnderflow { t, h } => Err(Error::StepUnderflow {
                t: t.to_f64_lossy(),
                h: h.to_f64_lossy(),
            }),
            Termination::DomainExit { t, reason } => Err(Error::DomainExit {
                system: "trajectory".into(),
                x: t.to_f64_lossy(),
                detail: reason.clone(),
            }),
            _ => Ok(()),
        }
    }

    /// Index `k` of the step `[t_k, t_{k+1}]` containing `t` (clamped).
    pub fn segment_index(&self, t: T) -> usize {
        let steps = self.steps();
        if steps == 0 {
            return 0;
        }
        let k = self.times.partition_point(|s| *s <= t);
        k.saturating_sub(1).min(steps - 1)
    }

    /// Interpolates step `k` at time `t`.
    pub fn eval_segment_into(&self, k: usize, t: T, out: &mut [T]) {
        let t0 = self.times[k];
        let t1 = self.times[k + 1];
        let theta = (t - t0) / (t1 - t0);
        let coeffs = &self.dense[k * DENSE_ORDER * self.dim..(k + 1) * DENSE_ORDER * self.dim];
        dense_eval(coeffs, self.dim, theta, out);
    }

    /// Interpolated state at `t`; times outside the covered span are clamped
    /// to the end points.
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        if self.steps() == 0 || t <= self.t_start() {
            out.copy_from_slice(self.state(0));
            return;
        }
        if t >= self.t_final() {
            out.copy_from_slice(self.final_state());
            return;
        }
        let k = self.segment_index(t);
        self.eval_segment_into(k, t, out);
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// Interpolated values of a single component on a time grid.
    pub fn component_on(&self, component: usize, grid: &[T]) -> Vec<T> {
        let mut buf = vec![T::zero(); self.dim];
        grid.iter()
            .map(|&t| {
                self.eval_into(t, &mut buf);
                buf[component]
            })
            .collect()
    }
}
