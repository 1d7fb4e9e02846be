use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Right-hand side writer: fills `out[0] = Q(x, Y)` and `out[1..=n] = S(x, Y)`.
pub type FieldFn<T> = Arc<dyn Fn(T, &[T], &mut [T]) -> Result<()> + Send + Sync>;

/// Analytic Jacobian writer: fills the `(n+1) x (n+1)` block
/// `[[Q_x, Q_Y], [S_x, S_Y]]`.
pub type JacobianFn<T> = Arc<dyn Fn(T, &[T], &mut DMatrix<T>) -> Result<()> + Send + Sync>;

/// Open interval `(lo, hi)`; either bound may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn unbounded() -> Self {
        Self {
            lo: -T::infinity(),
            hi: T::infinity(),
        }
    }

    /// Symmetric interval `(-r, r)`.
    pub fn symmetric(r: T) -> Self {
        Self { lo: -r, hi: r }
    }

    /// Strict containment. `NaN` is never contained.
    #[inline]
    pub fn contains(&self, v: T) -> bool {
        v > self.lo && v < self.hi
    }

    /// A finite window inside the interval used for sampling checks.
    pub fn sample_window(&self, default_radius: T) -> (T, T) {
        let lo = if self.lo.is_finite() {
            self.lo
        } else {
            -default_radius
        };
        let hi = if self.hi.is_finite() {
            self.hi
        } else {
            default_radius
        };
        // Pull strictly inside so sampled points are admissible.
        let pad = (hi - lo) * T::lit(1e-3);
        (lo + pad, hi - pad)
    }
}

/// Validity region: an interval of `x` times a box in `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    pub x: Interval<T>,
    pub y: Vec<Interval<T>>,
}

impl<T: Real> Domain<T> {
    pub fn unbounded(n: usize) -> Self {
        Self {
            x: Interval::unbounded(),
            y: vec![Interval::unbounded(); n],
        }
    }

    pub fn contains(&self, x: T, y: &[T]) -> bool {
        self.x.contains(x) && self.y.iter().zip(y).all(|(iv, v)| iv.contains(*v))
    }
}

/// Position on a characteristic: `(t, x, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharState<T> {
    pub t: T,
    pub x: T,
    pub y: Vec<T>,
}

impl<T: Real> CharState<T> {
    /// Flat `[x, Y...]` vector as consumed by the integrators.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.y.len() + 1);
        v.push(self.x);
        v.extend_from_slice(&self.y);
        v
    }
}

/// Characteristic state plus the flow-gradient indicator `q` and the spatial
/// derivatives `y = Y_x` carried along the characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState<T> {
    pub base: CharState<T>,
    pub q: T,
    pub grad: Vec<T>,
}

impl<T: Real> AugmentedState<T> {
    /// Initial augmented state; `q` starts at exactly one.
    pub fn initial(x: T, y: Vec<T>, grad: Vec<T>) -> Self {
        Self {
            base: CharState { t: T::zero(), x, y },
            q: T::one(),
            grad,
        }
    }

    /// Flat `[x, Y..., q, y...]` vector.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = self.base.to_vec();
        v.push(self.q);
        v.extend_from_slice(&self.grad);
        v
    }

    /// Inverse of [`to_vec`](Self::to_vec) for an `n`-component system.
    pub fn from_slice(t: T, n: usize, s: &[T]) -> Self {
        Self {
            base: CharState {
                t,
                x: s[0],
                y: s[1..=n].to_vec(),
            },
            q: s[n + 1],
            grad: s[n + 2..2 * n + 2].to_vec(),
        }
    }
}

/// A characteristic system with its domain and optional analytic partials.
#[derive(Clone)]
pub struct SystemDef<T> {
    name: String,
    n: usize,
    field: FieldFn<T>,
    jacobian: Option<JacobianFn<T>>,
    domain: Domain<T>,
    equilibrium_waived: bool,
}

impl<T> fmt::Debug for SystemDef<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("analytic_partials", &self.jacobian.is_some())
            .field("equilibrium_waived", &self.equilibrium_waived)
            .finish()
    }
}

impl<T: Real> SystemDef<T> {
    pub fn new(name: impl Into<String>, n: usize, domain: Domain<T>, field: FieldFn<T>) -> Self {
        assert!(
            n > 0,
            "a characteristic system needs at least one Y component"
        );
        assert_eq!(
            domain.y.len(),
            n,
            "domain box must have one interval per Y component"
        );
        Self {
            name: name.into(),
            n,
            field,
            jacobian: None,
            domain,
            equilibrium_waived: false,
        }
    }

    pub fn with_jacobian(mut self, jacobian: JacobianFn<T>) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    /// Marks the system as a deliberate counterexample without the zero
    /// equilibrium `Q(x, 0) = 0`, `S(x, 0) = 0`.
    pub fn waive_zero_equilibrium(mut self) -> Self {
        self.equilibrium_waived = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of `Y` components.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the characteristic system, `n + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn zero_equilibrium_waived(&self) -> bool {
        self.equilibrium_waived
    }

    fn domain_exit(&self, x: T, y: &[T], what: &str) -> Error {
        Error::DomainExit {
            system: self.name.clone(),
            x: x.to_f64_lossy(),
            detail: format!(
                "{what}: Y = {:?}",
                y.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
            ),
        }
    }

    /// Writes `[Q, S_1..S_n]` into `out` after checking the domain.
    pub fn rhs_into(&self, x: T, y: &[T], out: &mut [T]) -> Result<()> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        if !self.domain.contains(x, y) {
            return Err(self.domain_exit(x, y, "outside domain box"));
        }
        (self.field)(x, y, out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(self.domain_exit(x, y, "non-finite right-hand side"));
        }
        Ok(())
    }

    /// Evaluates the characteristic right-hand side: `(dx, dY) = (Q, S)`.
    pub fn eval_rhs(&self, x: T, y: &[T]) -> Result<(T, Vec<T>)> {
        let mut out = vec![T::zero(); self.n + 1];
        self.rhs_into(x, y, &mut out)?;
        let dx = out[0];
        out.remove(0);
        Ok((dx, out))
    }

    /// The block matrix `[[Q_x, Q_Y], [S_x, S_Y]]` at `(x, Y)`.
    ///
    /// Uses the analytic partials when present, central differences otherwise.
    pub fn eval_linearization(&self, x: T, y: &[T]) -> Result<DMatrix<T>> {
        let mut jac = DMatrix::zeros(self.n + 1, self.n + 1);
        self.linearization_into(x, y, &mut jac)?;
        Ok(jac)
    }

    pub fn linearization_into(&self, x: T, y: &[T], jac: &mut DMatrix<T>) -> Result<()> {
        match &self.jacobian {
            Some(j) => {
                if !self.domain.contains(x, y) {
                    return Err(self.domain_exit(x, y, "outside domain box"));
                }
                j(x, y, jac)
            }
            None => self.fd_linearization_into(x, y, jac),
        }
    }

    /// Central-difference linearization, ignoring any analytic partials.
    ///
    /// Step per coordinate is `max(1e-6, 1e-6 |value|)`; the whole stencil must
    /// stay inside the domain.
    pub fn finite_difference_linearization(&self, x: T, y: &[T]) -> Result<DMatrix<T>> {
        let mut jac = DMatrix::zeros(self.n + 1, self.n + 1);
        self.fd_linearization_into(x, y, &mut jac)?;
        Ok(jac)
    }

    fn fd_linearization_into(&self, x: T, y: &[T], jac: &mut DMatrix<T>) -> Result<()> {
        let dim = self.n + 1;
        let mut point = Vec::with_capacity(dim);
        point.push(x);
        point.extend_from_slice(y);
        let mut plus = vec![T::zero(); dim];
        let mut minus = vec![T::zero(); dim];
        let floor = T::lit(1e-6);
        for j in 0..dim {
            let v = point[j];
            let h = floor.max(floor * v.abs());
            point[j] = v + h;
            self.rhs_into(point[0], &point[1..], &mut plus)?;
            point[j] = v - h;
            self.rhs_into(point[0], &point[1..], &mut minus)?;
            point[j] = v;
            let two_h = (v + h) - (v - h);
            for i in 0..dim {
                jac[(i, j)] = (plus[i] - minus[i]) / two_h;
            }
        }
        Ok(())
    }

    /// Largest `|Q(x, 0)|, |S(x, 0)|` over `samples` points of the x-window.
    pub fn zero_equilibrium_residual(&self, samples: usize) -> Result<T> {
        let (lo, hi) = self.domain.x.sample_window(T::lit(10.0));
        let zero = vec![T::zero(); self.n];
        let mut out = vec![T::zero(); self.n + 1];
        let mut worst = T::zero();
        for k in 0..samples.max(2) {
            let x = lo + (hi - lo) * T::from_count(k) / T::from_count(samples.max(2) - 1);
            // Skip sample points where the zero state itself is outside the box.
            if !self.domain.contains(x, &zero) {
                continue;
            }
            self.rhs_into(x, &zero, &mut out)?;
            worst = worst.max(crate::scalar::max_abs(&out));
        }
        Ok(worst)
    }

    /// Checks `Q(x, 0) = 0`, `S(x, 0) = 0` at tolerance `1e-12` on a sample
    /// grid. Systems flagged with [`waive_zero_equilibrium`](Self::waive_zero_equilibrium)
    /// pass unconditionally.
    pub fn check_zero_equilibrium(&self, samples: usize) -> Result<bool> {
        if self.equilibrium_waived {
            return Ok(true);
        }
        Ok(self.zero_equilibrium_residual(samples)? <= T::lit(1e-12))
    }

    /// Worst mismatch between analytic and finite-difference partials at the
    /// given points, measured as `|a - b| / max(1, |a|, |b|)`.
    ///
    /// Returns zero when no analytic partials are attached.
    pub fn partials_mismatch(&self, points: &[(T, Vec<T>)]) -> Result<T> {
        if self.jacobian.is_none() {
            return Ok(T::zero());
        }
        let mut worst = T::zero();
        for (x, y) in points {
            let a = self.eval_linearization(*x, y)?;
            let b = self.finite_difference_linearization(*x, y)?;
            for (u, v) in a.iter().zip(b.iter()) {
                let scale = T::one().max(u.abs()).max(v.abs());
                worst = worst.max((*u - *v).abs() / scale);
            }
        }
        Ok(worst)
    }
}
