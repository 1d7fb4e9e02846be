use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrate::{
    find_event, integrate, integrate_until, Direction, IntegratorConfig, Termination, Trajectory,
    VectorField,
};
use crate::scalar::Real;
use crate::system::SystemDef;

/// Characteristic system coupled with its variational equation, dimension
/// `2(n+1)`, state layout `[x, Y, q, y]`.
#[derive(Debug, Clone)]
pub struct AugmentedField<T> {
    sys: SystemDef<T>,
}

/// Builds the augmented field of `sys`.
pub fn augment<T: Real>(sys: &SystemDef<T>) -> AugmentedField<T> {
    AugmentedField { sys: sys.clone() }
}

impl<T: Real> AugmentedField<T> {
    pub fn system(&self) -> &SystemDef<T> {
        &self.sys
    }

    /// Index of `q` in the flat state.
    pub fn q_index(&self) -> usize {
        self.sys.n() + 1
    }
}

impl<T: Real> VectorField<T> for AugmentedField<T> {
    fn dim(&self) -> usize {
        2 * self.sys.dim()
    }

    fn eval(&self, _t: T, state: &[T], out: &mut [T]) -> Result<()> {
        let d = self.sys.dim();
        let (base, lin) = state.split_at(d);
        let (out_base, out_lin) = out.split_at_mut(d);
        self.sys.rhs_into(base[0], &base[1..], out_base)?;
        let mut jac = DMatrix::zeros(d, d);
        self.sys.linearization_into(base[0], &base[1..], &mut jac)?;
        for (i, o) in out_lin.iter_mut().enumerate() {
            *o = (0..d).fold(T::zero(), |acc, j| acc + jac[(i, j)] * lin[j]);
        }
        Ok(())
    }
}

/// Characteristic system coupled with the matrix variational equation
/// `Phi' = M(t) Phi`; state layout `[x, Y, Phi (column-major)]`.
#[derive(Debug, Clone)]
pub struct FundamentalField<T> {
    sys: SystemDef<T>,
}

impl<T: Real> FundamentalField<T> {
    pub fn new(sys: &SystemDef<T>) -> Self {
        Self { sys: sys.clone() }
    }

    /// Flat initial state with `Phi(0) = phi0`.
    pub fn initial_state(&self, x0: T, y0: &[T], phi0: &DMatrix<T>) -> Vec<T> {
        let d = self.sys.dim();
        assert_eq!(phi0.shape(), (d, d));
        let mut s = Vec::with_capacity(d + d * d);
        s.push(x0);
        s.extend_from_slice(y0);
        s.extend_from_slice(phi0.as_slice());
        s
    }

    /// Extracts `Phi` from a flat state.
    pub fn matrix(&self, state: &[T]) -> DMatrix<T> {
        let d = self.sys.dim();
        DMatrix::from_column_slice(d, d, &state[d..d + d * d])
    }
}

impl<T: Real> VectorField<T> for FundamentalField<T> {
    fn dim(&self) -> usize {
        let d = self.sys.dim();
        d + d * d
    }

    fn eval(&self, _t: T, state: &[T], out: &mut [T]) -> Result<()> {
        let d = self.sys.dim();
        self.sys.rhs_into(state[0], &state[1..d], &mut out[..d])?;
        let mut jac = DMatrix::zeros(d, d);
        self.sys
            .linearization_into(state[0], &state[1..d], &mut jac)?;
        let phi = DMatrix::from_column_slice(d, d, &state[d..]);
        out[d..].copy_from_slice((jac * phi).as_slice());
        Ok(())
    }
}

/// What became singular first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupKind {
    /// `q` reached zero: characteristics focus and `Y_x` is unbounded.
    Gradient,
    /// The integrator could not continue before `q` vanished: the state
    /// itself (or the field) is singular.
    State,
}

/// Outcome of [`detect_blowup`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport<T> {
    pub blown: bool,
    /// First zero of `q`, or the time the integration broke down.
    pub t_star: Option<T>,
    /// Smallest `q` on the examined span, which ends at `t_star` when a
    /// zero is found (at most one).
    pub q_min: T,
    pub horizon: T,
    pub kind: Option<BlowupKind>,
}

/// Integrates the augmented system from `(x0, Y0)` with `q = 1`,
/// `y = grad0` and reports the first zero of `q` within `horizon`.
pub fn detect_blowup<T: Real>(
    sys: &SystemDef<T>,
    x0: T,
    y0: &[T],
    grad0: &[T],
    config: &IntegratorConfig<T>,
    horizon: T,
) -> Result<BlowupReport<T>> {
    detect_blowup_traced(sys, x0, y0, grad0, config, horizon).map(|(r, _)| r)
}

/// [`detect_blowup`] that also returns the augmented trajectory.
pub fn detect_blowup_traced<T: Real>(
    sys: &SystemDef<T>,
    x0: T,
    y0: &[T],
    grad0: &[T],
    config: &IntegratorConfig<T>,
    horizon: T,
) -> Result<(BlowupReport<T>, Trajectory<T>)> {
    let n = sys.n();
    if y0.len() != n || grad0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if y0.len() != n { y0.len() } else { grad0.len() },
        });
    }
    let field = augment(sys);
    let qi = field.q_index();
    let mut state0 = Vec::with_capacity(2 * n + 2);
    state0.push(x0);
    state0.extend_from_slice(y0);
    state0.push(T::one());
    state0.extend_from_slice(grad0);
    // An initial state outside the domain is a usage error, not a blow-up.
    sys.rhs_into(x0, y0, &mut vec![T::zero(); n + 1])?;

    let cfg = (*config).with_t_max(horizon);
    let traj = integrate_until(&field, &state0, &cfg, |traj| {
        traj.final_state()[qi] <= T::zero()
    })?;

    let q_zero = find_event(&traj, |_, s| s[qi], Direction::Falling);
    let q_min_samples = (0..traj.len()).fold(T::one(), |m, i| m.min(traj.state(i)[qi]));
    let report = match (q_zero, traj.termination()) {
        (Some(t), _) => BlowupReport {
            blown: true,
            t_star: Some(t),
            // q is positive before the located root and zero at it.
            q_min: T::zero(),
            horizon,
            kind: Some(BlowupKind::Gradient),
        },
        (None, Termination::StepUnderflow { t, .. }) => BlowupReport {
            blown: true,
            t_star: Some(*t),
            q_min: q_min_samples,
            horizon,
            kind: Some(BlowupKind::State),
        },
        (None, Termination::DomainExit { .. }) => {
            traj.check()?;
            unreachable!("domain exit always converts to an error")
        }
        (None, _) => BlowupReport {
            blown: false,
            t_star: None,
            q_min: q_min_samples,
            horizon,
            kind: None,
        },
    };
    Ok((report, traj))
}

/// The four blocks of a Riccati coefficient matrix at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiBlocks<T: Real> {
    /// `k x k`
    pub m11: DMatrix<T>,
    /// `k x m`
    pub m12: DMatrix<T>,
    /// `m x k`
    pub m21: DMatrix<T>,
    /// `m x m`
    pub m22: DMatrix<T>,
}

impl<T: Real> RiccatiBlocks<T> {
    pub fn zeros(k: usize, m: usize) -> Self {
        Self {
            m11: DMatrix::zeros(k, k),
            m12: DMatrix::zeros(k, m),
            m21: DMatrix::zeros(m, k),
            m22: DMatrix::zeros(m, m),
        }
    }

    /// The full `(k+m) x (k+m)` matrix `[[M11, M12], [M21, M22]]`.
    pub fn assemble(&self) -> DMatrix<T> {
        let k = self.m11.nrows();
        let m = self.m22.nrows();
        let mut full = DMatrix::zeros(k + m, k + m);
        full.view_mut((0, 0), (k, k)).copy_from(&self.m11);
        full.view_mut((0, k), (k, m)).copy_from(&self.m12);
        full.view_mut((k, 0), (m, k)).copy_from(&self.m21);
        full.view_mut((k, k), (m, m)).copy_from(&self.m22);
        full
    }
}

pub type BlocksFn<T> = Arc<dyn Fn(T, &mut RiccatiBlocks<T>) -> Result<()> + Send + Sync>;

/// `W' = M21 + M22 W - W M11 - W M12 W` with `W` of shape `m x k`.
#[derive(Clone)]
pub struct RiccatiSpec<T: Real> {
    k: usize,
    m: usize,
    blocks: BlocksFn<T>,
    w0: DMatrix<T>,
}

impl<T: Real> std::fmt::Debug for RiccatiSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiccatiSpec")
            .field("k", &self.k)
            .field("m", &self.m)
            .field("w0", &self.w0)
            .finish()
    }
}

impl<T: Real> RiccatiSpec<T> {
    /// Time-dependent blocks. The block shapes are checked at `t = 0`.
    pub fn new(k: usize, m: usize, blocks: BlocksFn<T>, w0: DMatrix<T>) -> Result<Self> {
        if w0.shape() != (m, k) {
            return Err(Error::InvalidParameter(format!(
                "initial W must be {m}x{k}, got {}x{}",
                w0.nrows(),
                w0.ncols()
            )));
        }
        let spec = Self { k, m, blocks, w0 };
        spec.blocks_at(T::zero())?;
        Ok(spec)
    }

    pub fn constant(blocks: RiccatiBlocks<T>, w0: DMatrix<T>) -> Result<Self> {
        let k = blocks.m11.nrows();
        let m = blocks.m22.nrows();
        let shapes = [
            (blocks.m11.shape(), (k, k)),
            (blocks.m12.shape(), (k, m)),
            (blocks.m21.shape(), (m, k)),
            (blocks.m22.shape(), (m, m)),
        ];
        if shapes.iter().any(|(got, want)| got != want) {
            return Err(Error::InvalidParameter(
                "inconsistent Riccati block shapes".into(),
            ));
        }
        let fixed = blocks.clone();
        Self::new(
            k,
            m,
            Arc::new(move |_, b: &mut RiccatiBlocks<T>| {
                b.clone_from(&fixed);
                Ok(())
            }),
            w0,
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn w0(&self) -> &DMatrix<T> {
        &self.w0
    }

    pub fn blocks_at(&self, t: T) -> Result<RiccatiBlocks<T>> {
        let mut b = RiccatiBlocks::zeros(self.k, self.m);
        (self.blocks)(t, &mut b)?;
        let (k, m) = (self.k, self.m);
        if b.m11.shape() != (k, k)
            || b.m12.shape() != (k, m)
            || b.m21.shape() != (m, k)
            || b.m22.shape() != (m, m)
        {
            return Err(Error::InvalidParameter(format!(
                "Riccati blocks at t = {t} have wrong shapes"
            )));
        }
        Ok(b)
    }
}

struct DirectRiccati<'a, T: Real>(&'a RiccatiSpec<T>);

impl<T: Real> VectorField<T> for DirectRiccati<'_, T> {
    fn dim(&self) -> usize {
        self.0.m * self.0.k
    }

    fn eval(&self, t: T, state: &[T], out: &mut [T]) -> Result<()> {
        let b = self.0.blocks_at(t)?;
        let w = DMatrix::from_column_slice(self.0.m, self.0.k, state);
        let dw = &b.m21 + &b.m22 * &w - &w * &b.m11 - &w * &b.m12 * &w;
        out.copy_from_slice(dw.as_slice());
        Ok(())
    }
}

struct LinearCompanion<'a, T: Real>(&'a RiccatiSpec<T>);

impl<T: Real> VectorField<T> for LinearCompanion<'_, T> {
    fn dim(&self) -> usize {
        (self.0.k + self.0.m) * self.0.k
    }

    fn eval(&self, t: T, state: &[T], out: &mut [T]) -> Result<()> {
        let full = self.0.blocks_at(t)?.assemble();
        let y = DMatrix::from_column_slice(self.0.k + self.0.m, self.0.k, state);
        out.copy_from_slice((full * y).as_slice());
        Ok(())
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<T> {
    let Some(&last) = grid.last() else {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    };
    if grid[0] < T::zero() || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "sample times must be non-negative and sorted".into(),
        ));
    }
    Ok(last)
}

/// Integrates the Riccati equation itself and samples `W` on `grid`
/// (sorted, starting at or after zero).
///
/// A finite-time escape of `W` before the last sample is reported as
/// [`Error::StepUnderflow`].
pub fn solve_riccati_direct<T: Real>(
    spec: &RiccatiSpec<T>,
    grid: &[T],
    config: &IntegratorConfig<T>,
) -> Result<Vec<DMatrix<T>>> {
    let t_end = check_grid(grid)?;
    let traj = integrate(
        &DirectRiccati(spec),
        spec.w0.as_slice(),
        &(*config).with_t_max(t_end),
    )?;
    traj.check()?;
    Ok(grid
        .iter()
        .map(|&t| DMatrix::from_vec(spec.m, spec.k, traj.eval(t)))
        .collect())
}

/// One sample of the Radon reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonSample<T: Real> {
    pub t: T,
    pub det_q: T,
    /// `P Q^{-1}`, absent where `|det Q| < 1e-12`.
    pub w: Option<DMatrix<T>>,
}

impl<T: Real> RadonSample<T> {
    pub fn is_singular(&self) -> bool {
        self.w.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct RadonPath<T: Real> {
    pub samples: Vec<RadonSample<T>>,
    /// First sign change of `det Q` on the integrated span.
    pub first_singular_time: Option<T>,
}

/// Threshold on `|det Q|` below which `W = P Q^{-1}` is not reconstructed.
pub const SINGULAR_DET: f64 = 1e-12;

/// Solves the linear system `(Q, P)' = [[M11, M12], [M21, M22]] (Q, P)` from
/// `(I, W0)` and reconstructs `W = P Q^{-1}` on `grid`.
pub fn radon_reconstruct<T: Real>(
    spec: &RiccatiSpec<T>,
    grid: &[T],
    config: &IntegratorConfig<T>,
) -> Result<RadonPath<T>> {
    let t_end = check_grid(grid)?;
    let (k, m) = (spec.k, spec.m);
    let mut y0 = DMatrix::zeros(k + m, k);
    y0.view_mut((0, 0), (k, k)).fill_with_identity();
    y0.view_mut((k, 0), (m, k)).copy_from(&spec.w0);
    let traj = integrate(
        &LinearCompanion(spec),
        y0.as_slice(),
        &(*config).with_t_max(t_end),
    )?;
    traj.check()?;

    let split = |s: &[T]| {
        let y = DMatrix::from_column_slice(k + m, k, s);
        (y.rows(0, k).into_owned(), y.rows(k, m).into_owned())
    };
    let det_of = |s: &[T]| split(s).0.determinant();

    let samples = grid
        .iter()
        .map(|&t| {
            let (q, p) = split(&traj.eval(t));
            let det_q = q.determinant();
            let w = if det_q.abs() < T::lit(SINGULAR_DET) {
                None
            } else {
                q.try_inverse().map(|qi| p * qi)
            };
            RadonSample { t, det_q, w }
        })
        .collect();
    let first_singular_time = find_event(&traj, |_, s| det_of(s), Direction::Any);
    Ok(RadonPath {
        samples,
        first_singular_time,
    })
}

/// Riccati problem for `W = y / q` along the characteristic through
/// `(x0, Y0)`: `k = 1`, `m = n`, blocks taken from the Jacobian on the
/// characteristic, `W0 = grad0`.
///
/// The characteristic is integrated once up to `t_max` and interpolated.
pub fn riccati_along_characteristic<T: Real>(
    sys: &SystemDef<T>,
    x0: T,
    y0: &[T],
    grad0: &[T],
    config: &IntegratorConfig<T>,
) -> Result<RiccatiSpec<T>> {
    let n = sys.n();
    let mut state0 = vec![x0];
    state0.extend_from_slice(y0);
    let traj = integrate(sys, &state0, config)?;
    traj.check()?;
    let traj = Arc::new(traj);
    let sys = sys.clone();
    let blocks: BlocksFn<T> = Arc::new(move |t, b: &mut RiccatiBlocks<T>| {
        let s = traj.eval(t);
        let jac = sys.eval_linearization(s[0], &s[1..])?;
        b.m11.copy_from(&jac.view((0, 0), (1, 1)));
        b.m12.copy_from(&jac.view((0, 1), (1, n)));
        b.m21.copy_from(&jac.view((1, 0), (n, 1)));
        b.m22.copy_from(&jac.view((1, 1), (n, n)));
        Ok(())
    });
    RiccatiSpec::new(1, n, blocks, DMatrix::from_column_slice(n, 1, grad0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_spec(m11: f64, m12: f64, m21: f64, m22: f64, w0: f64) -> RiccatiSpec<f64> {
        let blocks = RiccatiBlocks {
            m11: DMatrix::from_element(1, 1, m11),
            m12: DMatrix::from_element(1, 1, m12),
            m21: DMatrix::from_element(1, 1, m21),
            m22: DMatrix::from_element(1, 1, m22),
        };
        RiccatiSpec::constant(blocks, DMatrix::from_element(1, 1, w0)).unwrap()
    }

    #[test]
    fn decaying_scalar_riccati() {
        // w' = -w^2
        let spec = scalar_spec(0.0, 1.0, 0.0, 0.0, 1.0);
        let cfg = IntegratorConfig::default();
        let w = solve_riccati_direct(&spec, &[0.0, 1.0], &cfg).unwrap();
        assert!((w[1][(0, 0)] - 0.5).abs() < 1e-10);
        let radon = radon_reconstruct(&spec, &[1.0, 3.0], &cfg).unwrap();
        assert!((radon.samples[0].det_q - 2.0).abs() < 1e-10);
        assert!((radon.samples[1].w.as_ref().unwrap()[(0, 0)] - 0.25).abs() < 1e-10);
        assert!(radon.first_singular_time.is_none());
    }

    #[test]
    fn tangent_riccati_escapes() {
        // w' = 1 + w^2
        let spec = scalar_spec(0.0, -1.0, 1.0, 0.0, 0.0);
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            solve_riccati_direct(&spec, &[2.0], &cfg),
            Err(Error::StepUnderflow { .. })
        ));
        let radon = radon_reconstruct(&spec, &[1.0, 2.0], &cfg).unwrap();
        let t = radon.first_singular_time.unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{t}");
        assert!((radon.samples[0].det_q - 1f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn bad_block_shapes_rejected() {
        let blocks = RiccatiBlocks::<f64> {
            m11: DMatrix::zeros(1, 1),
            m12: DMatrix::zeros(2, 1),
            m21: DMatrix::zeros(1, 1),
            m22: DMatrix::zeros(1, 1),
        };
        assert!(RiccatiSpec::constant(blocks, DMatrix::zeros(1, 1)).is_err());
    }
}
