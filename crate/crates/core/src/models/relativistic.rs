use std::sync::Arc;

use nalgebra::DMatrix;

use crate::criteria::quadrature::adaptive_simpson;
use crate::criteria::{doping_profile_candidate, doping_sign_radius, ScalarFn};
use crate::error::{Error, Result};
use crate::integrate::VectorField;
use crate::scalar::Real;
use crate::system::{Domain, FieldFn, Interval, JacobianFn, SystemDef};

/// Background density profile.
#[derive(Clone)]
pub enum DopingProfile<T: Real> {
    Constant(T),
    /// The candidate `K (M - 2K s^2) / (M + K s^2)^(5/2)`, `s = x - x0`,
    /// restricted to where it is positive.
    Candidate {
        k: T,
        m: T,
        x0: T,
    },
    /// A user profile positive on `interval`; the derivative is differenced
    /// when absent.
    Custom {
        c: ScalarFn<T>,
        dc: Option<ScalarFn<T>>,
        interval: Interval<T>,
    },
}

impl<T: Real> std::fmt::Debug for DopingProfile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Candidate { k, m, x0 } => write!(f, "Candidate {{ k: {k}, m: {m}, x0: {x0} }}"),
            Self::Custom { interval, .. } => write!(f, "Custom {{ interval: {interval:?} }}"),
        }
    }
}

impl<T: Real> DopingProfile<T> {
    pub fn c(&self, x: T) -> T {
        match self {
            Self::Constant(c) => *c,
            Self::Candidate { k, m, x0 } => doping_profile_candidate(*k, *m, *x0, x),
            Self::Custom { c, .. } => c(x),
        }
    }

    pub fn dc(&self, x: T) -> T {
        match self {
            Self::Constant(_) => T::zero(),
            Self::Candidate { k, m, x0 } => {
                // d/dx of K (M - 2K s^2)(M + K s^2)^(-5/2)
                let s = x - *x0;
                let u = *m + *k * s * s;
                let num = *m - T::lit(2.0) * *k * s * s;
                *k * (-T::lit(4.0) * *k * s * u.powf(T::lit(-2.5))
                    - T::lit(5.0) * *k * s * num * u.powf(T::lit(-3.5)))
            }
            Self::Custom { c, dc, .. } => match dc {
                Some(d) => d(x),
                None => {
                    let h = T::lit(1e-5) * T::one().max(x.abs());
                    (c(x + h) - c(x - h)) / (T::lit(2.0) * h)
                }
            },
        }
    }

    /// Interval on which the profile is positive.
    pub fn interval(&self) -> Interval<T> {
        match self {
            Self::Constant(_) => Interval::unbounded(),
            Self::Candidate { k, m, x0 } => {
                let r = doping_sign_radius(*k, *m);
                Interval::new(*x0 - r, *x0 + r)
            }
            Self::Custom { interval, .. } => *interval,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(c) if !(*c > T::zero()) => Err(Error::InvalidParameter(format!(
                "background density must be positive, got {c}"
            ))),
            Self::Candidate { k, m, .. } if !(*k > T::zero() && *m > T::zero()) => Err(
                Error::InvalidParameter("candidate profile needs K, M > 0".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// `x' = P / sqrt(1+P^2)`, `P' = -E`, `E' = c(x) P / sqrt(1+P^2)`.
pub fn relativistic_plasma<T: Real>(profile: DopingProfile<T>) -> Result<SystemDef<T>> {
    profile.validate()?;
    let domain = Domain {
        x: profile.interval(),
        y: vec![Interval::unbounded(); 2],
    };
    let name = format!("relativistic({profile:?})");
    let p_field = profile.clone();
    let field: FieldFn<T> = Arc::new(move |x, y, out| {
        let (p, e) = (y[0], y[1]);
        let v = p / (T::one() + p * p).sqrt();
        out[0] = v;
        out[1] = -e;
        out[2] = p_field.c(x) * v;
        Ok(())
    });
    let jacobian: JacobianFn<T> = Arc::new(move |x, y, jac: &mut DMatrix<T>| {
        let p = y[0];
        let w = T::one() + p * p;
        let v = p / w.sqrt();
        let dv = T::one() / (w * w.sqrt());
        let z = T::zero();
        jac.copy_from_slice(&[
            z,
            z,
            profile.dc(x) * v,
            dv,
            z,
            profile.c(x) * dv,
            z,
            -T::one(),
            z,
        ]);
        Ok(())
    });
    Ok(SystemDef::new(name, 2, domain, field).with_jacobian(jacobian))
}

/// Refinement target for the cached field `E(x)`.
const E_CACHE_TOL: f64 = 1e-11;
const MIN_CELL: f64 = 1e-6;

/// Second-order form of the relativistic oscillation along one
/// characteristic, `x'' = -E(x) (1 - x'^2)^(3/2)`, state `(x, v = x')`.
///
/// `E(x) = E0 + int_{x0}^x c` and `Phi(x) = sqrt(1 + P0^2) - int_{x0}^x E`
/// (the Lorentz factor as a function of position) are tabulated on an
/// adaptive grid of `window` and evaluated by cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct RelativisticReduced<T: Real> {
    x0: T,
    v0: T,
    window: Interval<T>,
    nodes: Vec<T>,
    c: Vec<T>,
    e: Vec<T>,
    phi: Vec<T>,
}

pub fn relativistic_reduced<T: Real>(
    profile: &DopingProfile<T>,
    x0: T,
    p0: T,
    e0: T,
    window: (T, T),
) -> Result<RelativisticReduced<T>> {
    RelativisticReduced::new(profile, x0, p0, e0, window)
}

impl<T: Real> RelativisticReduced<T> {
    pub fn new(profile: &DopingProfile<T>, x0: T, p0: T, e0: T, window: (T, T)) -> Result<Self> {
        profile.validate()?;
        let (lo, hi) = window;
        if !(lo < x0 && x0 < hi) || !p0.is_finite() || !e0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite data with x0 inside the window, got x0 = {x0}, window = ({lo}, {hi})"
            )));
        }
        let allowed = profile.interval();
        if !(allowed.contains(lo) && allowed.contains(hi)) {
            return Err(Error::InvalidParameter(
                "window must lie where the profile is positive".into(),
            ));
        }
        let c = |x: T| profile.c(x);
        let quad = |a: T, b: T| adaptive_simpson(c, a, b, T::lit(1e-14));

        // Nodes from x0 outward on each side, cells split until the cubic
        // Hermite interpolant of E matches quadrature at the cell midpoint.
        let mut right = vec![(x0, e0)];
        extend_side(&c, &quad, x0, e0, hi, &mut right)?;
        let mut left = vec![(x0, e0)];
        extend_side(&c, &quad, x0, e0, lo, &mut left)?;
        left.reverse();
        left.pop();
        let table: Vec<(T, T)> = left.into_iter().chain(right).collect();

        let nodes: Vec<T> = table.iter().map(|p| p.0).collect();
        let e: Vec<T> = table.iter().map(|p| p.1).collect();
        let cs: Vec<T> = nodes.iter().map(|&x| c(x)).collect();
        let start = nodes.iter().position(|&x| x == x0).expect("x0 is a node");
        let mut phi = vec![T::zero(); nodes.len()];
        phi[start] = (T::one() + p0 * p0).sqrt();
        // Phi' = -E with E cubic: the cell integral of E is exact in closed form.
        let cell_integral = |i: usize| {
            let h = nodes[i + 1] - nodes[i];
            h * (e[i] + e[i + 1]) / T::lit(2.0) + h * h * (cs[i] - cs[i + 1]) / T::lit(12.0)
        };
        for i in start..nodes.len() - 1 {
            phi[i + 1] = phi[i] - cell_integral(i);
        }
        for i in (0..start).rev() {
            phi[i] = phi[i + 1] + cell_integral(i);
        }
        let v0 = p0 / (T::one() + p0 * p0).sqrt();
        Ok(Self {
            x0,
            v0,
            window: Interval::new(lo, hi),
            nodes,
            c: cs,
            e,
            phi,
        })
    }

    /// Initial state `(x0, P0 / sqrt(1 + P0^2))`.
    pub fn initial_state(&self) -> [T; 2] {
        [self.x0, self.v0]
    }

    pub fn window(&self) -> Interval<T> {
        self.window
    }

    pub fn grid_len(&self) -> usize {
        self.nodes.len()
    }

    fn cell(&self, x: T) -> usize {
        let k = self.nodes.partition_point(|n| *n <= x);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Electric field at `x`.
    pub fn e_field(&self, x: T) -> T {
        let i = self.cell(x);
        hermite(
            self.nodes[i],
            self.nodes[i + 1],
            self.e[i],
            self.e[i + 1],
            self.c[i],
            self.c[i + 1],
            x,
        )
    }

    /// Lorentz factor as a function of position.
    pub fn phi(&self, x: T) -> T {
        let i = self.cell(x);
        hermite(
            self.nodes[i],
            self.nodes[i + 1],
            self.phi[i],
            self.phi[i + 1],
            -self.e[i],
            -self.e[i + 1],
            x,
        )
    }
}

fn extend_side<T: Real>(
    c: &impl Fn(T) -> T,
    quad: &impl Fn(T, T) -> Result<T>,
    x0: T,
    e0: T,
    end: T,
    out: &mut Vec<(T, T)>,
) -> Result<()> {
    let base_cells = 64usize;
    let step = (end - x0) / T::from_count(base_cells);
    let mut xa = x0;
    let mut ea = e0;
    for k in 1..=base_cells {
        let xb = if k == base_cells {
            end
        } else {
            x0 + step * T::from_count(k)
        };
        let eb = ea + quad(xa, xb)?;
        refine_cell(c, quad, xa, ea, xb, eb, out)?;
        xa = xb;
        ea = eb;
    }
    Ok(())
}

/// Pushes the nodes of `(xa, xb]`, splitting the cell as needed.
fn refine_cell<T: Real>(
    c: &impl Fn(T) -> T,
    quad: &impl Fn(T, T) -> Result<T>,
    xa: T,
    ea: T,
    xb: T,
    eb: T,
    out: &mut Vec<(T, T)>,
) -> Result<()> {
    let mid = (xa + xb) * T::lit(0.5);
    let e_mid = ea + quad(xa, mid)?;
    let interp = hermite(xa, xb, ea, eb, c(xa), c(xb), mid);
    if (interp - e_mid).abs() <= T::lit(E_CACHE_TOL) || (xb - xa).abs() <= T::lit(MIN_CELL) {
        out.push((xb, eb));
        return Ok(());
    }
    refine_cell(c, quad, xa, ea, mid, e_mid, out)?;
    refine_cell(c, quad, mid, e_mid, xb, eb, out)
}

/// Cubic Hermite interpolant on `[a, b]` with values `fa, fb` and slopes
/// `da, db`. Works for `a > b` as well.
fn hermite<T: Real>(a: T, b: T, fa: T, fb: T, da: T, db: T, x: T) -> T {
    let h = b - a;
    let s = (x - a) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    h00 * fa + h10 * h * da + h01 * fb + h11 * h * db
}

impl<T: Real> VectorField<T> for RelativisticReduced<T> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _t: T, state: &[T], out: &mut [T]) -> Result<()> {
        let (x, v) = (state[0], state[1]);
        let w = T::one() - v * v;
        if !self.window.contains(x) || !(w > T::zero()) {
            return Err(Error::DomainExit {
                system: "relativistic_reduced".into(),
                x: x.to_f64_lossy(),
                detail: format!(
                    "speed {v} (must stay below 1) or position outside the tabulated window"
                ),
            });
        }
        out[0] = v;
        out[1] = -self.e_field(x) * w * w.sqrt();
        Ok(())
    }
}
