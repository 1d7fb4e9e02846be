use crate::scalar::{max_abs, Real};

use super::Trajectory;

/// Required direction of the sign change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From negative to non-negative.
    Rising,
    /// From positive to non-positive.
    Falling,
    Any,
}

impl Direction {
    fn matches<T: Real>(self, before: T, after: T) -> bool {
        let zero = T::zero();
        match self {
            Direction::Rising => before < zero && after >= zero,
            Direction::Falling => before > zero && after <= zero,
            Direction::Any => (before < zero && after >= zero) || (before > zero && after <= zero),
        }
    }
}

/// Illinois (modified regula falsi) refinement of a bracketed root of `f` on
/// `[a, b]`, where `f(a)` and `f(b)` have opposite signs or `f(b) = 0`.
///
/// Stops when `|f| <= f_tol` or the bracket shrinks to a few ulps.
pub fn refine_root<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, fa: T, fb: T, f_tol: T) -> T {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fb == T::zero() {
        return b;
    }
    if fa == T::zero() {
        return a;
    }
    let mut side = 0i8;
    for iter in 0..200 {
        let width_floor = T::lit(4.0) * T::eps() * a.abs().max(b.abs()).max(T::one());
        if (b - a).abs() <= width_floor {
            break;
        }
        // Fall back to bisection every few iterations to guarantee progress.
        let c = if iter % 4 == 3 {
            (a + b) * T::lit(0.5)
        } else {
            let c = (a * fb - b * fa) / (fb - fa);
            if c > a.min(b) && c < a.max(b) {
                c
            } else {
                (a + b) * T::lit(0.5)
            }
        };
        let fc = f(c);
        if fc.abs() <= f_tol {
            return c;
        }
        if (fc < T::zero()) == (fb < T::zero()) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= T::lit(0.5);
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= T::lit(0.5);
            }
            side = 1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Every sign change of `g(t, state)` with the requested direction, in order.
///
/// A root exactly at the starting time is excluded. Roots are refined on the
/// step interpolants to `|g| <= 1e-12 * max(1, |state|)`.
pub fn find_events<T, G>(traj: &Trajectory<T>, g: G, direction: Direction) -> Vec<T>
where
    T: Real,
    G: Fn(T, &[T]) -> T,
{
    let mut out = Vec::new();
    scan(traj, &g, direction, 0, |t| {
        out.push(t);
        false
    });
    out
}

/// First sign change of `g` with the requested direction, if any.
pub fn find_event<T, G>(traj: &Trajectory<T>, g: G, direction: Direction) -> Option<T>
where
    T: Real,
    G: Fn(T, &[T]) -> T,
{
    let mut found = None;
    scan(traj, &g, direction, 0, |t| {
        found = Some(t);
        true
    });
    found
}

/// Scans steps `first_step..` and hands each located root to `sink`; stops
/// early when `sink` returns `true`.
pub(crate) fn scan<T, G>(
    traj: &Trajectory<T>,
    g: &G,
    direction: Direction,
    first_step: usize,
    mut sink: impl FnMut(T) -> bool,
) where
    T: Real,
    G: Fn(T, &[T]) -> T,
{
    let dim = traj.dim();
    let mut buf = vec![T::zero(); dim];
    if traj.steps() <= first_step {
        return;
    }
    let mut g_prev = g(traj.time(first_step), traj.state(first_step));
    for k in first_step..traj.steps() {
        let t0 = traj.time(k);
        let t1 = traj.time(k + 1);
        let g_next = g(t1, traj.state(k + 1));
        if direction.matches(g_prev, g_next) {
            let scale = T::one()
                .max(max_abs(traj.state(k)))
                .max(max_abs(traj.state(k + 1)));
            let tol = T::lit(1e-12) * scale;
            let root = refine_root(
                |t| {
                    traj.eval_segment_into(k, t, &mut buf);
                    g(t, &buf)
                },
                t0,
                t1,
                g_prev,
                g_next,
                tol,
            );
            if sink(root) {
                return;
            }
        }
        g_prev = g_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, FnField, IntegratorConfig};
    use std::f64::consts::PI;

    fn harmonic_traj(t_max: f64) -> Trajectory<f64> {
        let field = FnField::new(2, |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = s[1];
            out[1] = -s[0];
        });
        integrate(
            &field,
            &[1.0, 0.0],
            &IntegratorConfig::default().with_t_max(t_max),
        )
        .unwrap()
    }

    #[test]
    fn velocity_zero_crossings() {
        // x2 = -sin t: rising through zero at pi, falling at 2 pi; t = 0 excluded.
        let traj = harmonic_traj(7.0);
        let rising = find_event(&traj, |_, s| s[1], Direction::Rising).unwrap();
        assert!((rising - PI).abs() < 1e-9, "{rising}");
        let falling = find_event(&traj, |_, s| s[1], Direction::Falling).unwrap();
        assert!((falling - 2.0 * PI).abs() < 1e-9, "{falling}");
        let any = find_events(&traj, |_, s| s[1], Direction::Any);
        assert_eq!(any.len(), 2);
    }

    #[test]
    fn no_sign_change_gives_none() {
        let traj = harmonic_traj(5.0);
        assert!(find_event(&traj, |_, s| 2.0 + s[0], Direction::Any).is_none());
    }

    #[test]
    fn refine_root_on_closed_form() {
        let r = refine_root(
            |t: f64| t.cos() + t.sin(),
            2.0,
            3.0,
            2f64.cos() + 2f64.sin(),
            3f64.cos() + 3f64.sin(),
            1e-15,
        );
        assert!((r - 0.75 * PI).abs() < 1e-13);
    }
}
