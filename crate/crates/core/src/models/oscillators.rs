use std::sync::Arc;

use nalgebra::DMatrix;

use crate::criteria::InvolutionPotential;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::{Domain, FieldFn, Interval, JacobianFn, SystemDef};

/// `x' = Y`, `Y' = -x`. Its characteristics oscillate isochronously while
/// every derivative `Y_x` blows up, since `Q(x, 0) = 0` fails.
pub fn hopf_potential<T: Real>() -> SystemDef<T> {
    let field: FieldFn<T> = Arc::new(|x, y, out| {
        out[0] = y[0];
        out[1] = -x;
        Ok(())
    });
    let jacobian: JacobianFn<T> = Arc::new(|_, _, jac: &mut DMatrix<T>| {
        jac.copy_from_slice(&[T::zero(), -T::one(), T::one(), T::zero()]);
        Ok(())
    });
    SystemDef::new("hopf_potential", 1, Domain::unbounded(1), field)
        .with_jacobian(jacobian)
        .waive_zero_equilibrium()
}

/// Linear oscillator `Z1' = Z2`, `Z2' = -Z1` carried by the passive position
/// equation `x' = x Z1'`.
pub fn harmonic<T: Real>() -> SystemDef<T> {
    let field: FieldFn<T> = Arc::new(|x, y, out| {
        out[0] = x * y[1];
        out[1] = y[1];
        out[2] = -y[0];
        Ok(())
    });
    let jacobian: JacobianFn<T> = Arc::new(|x, y, jac: &mut DMatrix<T>| {
        let (z, o) = (T::zero(), T::one());
        jac.copy_from_slice(&[y[1], z, z, z, z, -o, x, o, z]);
        Ok(())
    });
    SystemDef::new("harmonic", 2, Domain::unbounded(2), field).with_jacobian(jacobian)
}

pub type Function2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
pub type Gradient2<T> = Arc<dyn Fn(T, T) -> (T, T) + Send + Sync>;

/// Invertible change of variables `X1 = F1(Z1, Z2)`, `X2 = F2(Z1, Z2)` with
/// `F(0, 0) = 0`.
#[derive(Clone)]
pub struct Transformation<T> {
    pub f1: Function2<T>,
    pub f2: Function2<T>,
    /// `((F1)_1, (F1)_2)`; differenced when absent.
    pub grad1: Option<Gradient2<T>>,
    pub grad2: Option<Gradient2<T>>,
}

impl<T> std::fmt::Debug for Transformation<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transformation")
            .field(
                "analytic_partials",
                &(self.grad1.is_some() && self.grad2.is_some()),
            )
            .finish()
    }
}

/// Determinant below which the transformation is treated as singular.
pub const SINGULAR_TRANSFORMATION: f64 = 1e-10;

impl<T: Real> Transformation<T> {
    pub fn new(f1: Function2<T>, f2: Function2<T>) -> Self {
        Self {
            f1,
            f2,
            grad1: None,
            grad2: None,
        }
    }

    pub fn with_partials(mut self, grad1: Gradient2<T>, grad2: Gradient2<T>) -> Self {
        self.grad1 = Some(grad1);
        self.grad2 = Some(grad2);
        self
    }

    pub fn identity() -> Self {
        Self::new(Arc::new(|a, _| a), Arc::new(|_, b| b)).with_partials(
            Arc::new(|_, _| (T::one(), T::zero())),
            Arc::new(|_, _| (T::zero(), T::one())),
        )
    }

    fn gradient(f: &Function2<T>, g: &Option<Gradient2<T>>, z1: T, z2: T) -> (T, T) {
        match g {
            Some(g) => g(z1, z2),
            None => {
                let h1 = T::lit(1e-6) * T::one().max(z1.abs());
                let h2 = T::lit(1e-6) * T::one().max(z2.abs());
                let two = T::lit(2.0);
                (
                    (f(z1 + h1, z2) - f(z1 - h1, z2)) / (two * h1),
                    (f(z1, z2 + h2) - f(z1, z2 - h2)) / (two * h2),
                )
            }
        }
    }

    /// `(Z1', Z2') = (Delta1 / Delta, Delta2 / Delta)`: the image of the
    /// linear oscillator `X1' = X2`, `X2' = -X1` under the inverse map.
    pub fn velocity(&self, z1: T, z2: T) -> Result<(T, T)> {
        let (f1, f2) = ((self.f1)(z1, z2), (self.f2)(z1, z2));
        let (a11, a12) = Self::gradient(&self.f1, &self.grad1, z1, z2);
        let (a21, a22) = Self::gradient(&self.f2, &self.grad2, z1, z2);
        let det = a11 * a22 - a12 * a21;
        if !(det.abs() >= T::lit(SINGULAR_TRANSFORMATION)) {
            return Err(Error::SingularTransformation {
                z1: z1.to_f64_lossy(),
                z2: z2.to_f64_lossy(),
                det: det.to_f64_lossy(),
            });
        }
        let d1 = f2 * a22 + f1 * a12;
        let d2 = -a11 * f1 - f2 * a21;
        Ok((d1 / det, d2 / det))
    }
}

/// Oscillator `Z' = Delta_i / Delta` obtained by transforming the linear
/// oscillator, with the passive position equation `x' = x Z1'`.
///
/// The position factor keeps `Q(x, 0) = 0` and makes `x` a function of the
/// phase (`x = x0 exp(Z1 - Z1(0))`), so closed `Z` orbits give closed
/// characteristics. Supplying analytic partials of `F` is recommended:
/// the system Jacobian is differenced on top of them.
pub fn transformed_oscillator<T: Real>(tr: Transformation<T>) -> Result<SystemDef<T>> {
    let tiny = T::lit(1e-12);
    if ((tr.f1)(T::zero(), T::zero())).abs() > tiny || ((tr.f2)(T::zero(), T::zero())).abs() > tiny
    {
        return Err(Error::InvalidParameter(
            "transformation must fix the origin".into(),
        ));
    }
    // Invertibility near the origin.
    let r = T::lit(1e-3);
    tr.velocity(T::zero(), T::zero())?;
    for k in 0..8 {
        let a = T::two_pi() * T::from_count(k) / T::lit(8.0);
        tr.velocity(r * a.cos(), r * a.sin())?;
    }
    let field: FieldFn<T> = Arc::new(move |x, y, out| {
        let (dz1, dz2) = tr.velocity(y[0], y[1])?;
        out[0] = x * dz1;
        out[1] = dz1;
        out[2] = dz2;
        Ok(())
    });
    Ok(SystemDef::new(
        "transformed",
        2,
        Domain::unbounded(2),
        field,
    ))
}

/// `x' = Y`, `Y' = -g(x)` for the restoring force of an involution
/// potential, defined on the involution's interval.
pub fn involution_hamiltonian<T: Real>(potential: &InvolutionPotential<T>) -> SystemDef<T> {
    let pot = potential.clone();
    let domain = Domain {
        x: potential.spec().interval(),
        y: vec![Interval::unbounded()],
    };
    let field: FieldFn<T> = Arc::new(move |x, y, out| {
        out[0] = y[0];
        out[1] = -pot.g(x);
        Ok(())
    });
    SystemDef::new("involution_hamiltonian", 1, domain, field).waive_zero_equilibrium()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_rotation() {
        let (a, b) = Transformation::<f64>::identity()
            .velocity(0.3, -0.2)
            .unwrap();
        assert!((a + 0.2).abs() < 1e-15 && (b + 0.3).abs() < 1e-15);
    }

    #[test]
    fn swap_is_valid_and_rotates_backwards() {
        let tr = Transformation::<f64>::new(Arc::new(|_, b| b), Arc::new(|a, _| a));
        let (a, b) = tr.velocity(0.3, -0.2).unwrap();
        assert!((a - 0.2).abs() < 1e-9 && (b - 0.3).abs() < 1e-9);
        assert!(transformed_oscillator(tr).is_ok());
    }

    #[test]
    fn degenerate_transformation_rejected() {
        let tr = Transformation::<f64>::new(Arc::new(|a, b| a + b), Arc::new(|a, b| a + b));
        assert!(matches!(
            transformed_oscillator(tr),
            Err(Error::SingularTransformation { .. })
        ));
    }

    #[test]
    fn hopf_and_harmonic_partials() {
        let pts = vec![(0.4, vec![0.1]), (-1.0, vec![2.0])];
        assert!(hopf_potential::<f64>().partials_mismatch(&pts).unwrap() < 1e-8);
        let pts = vec![(0.4, vec![0.1, -0.3]), (-1.0, vec![2.0, 0.5])];
        assert!(harmonic::<f64>().partials_mismatch(&pts).unwrap() < 1e-8);
        assert!(hopf_potential::<f64>().zero_equilibrium_waived());
    }
}
