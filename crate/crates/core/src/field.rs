use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{
    find_event, integrate, refine_root, Direction, IntegratorConfig, Termination, Trajectory,
};
use crate::scalar::{max_abs, Real};
use crate::system::SystemDef;
use crate::variational::augment;

pub type ProfileFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// Initial data `Y(0, x) = Y0(x)` seeded at `n_x` equispaced points of
/// `[x_lo, x_hi]`.
#[derive(Clone)]
pub struct InitialProfile<T: Real> {
    y0: ProfileFn<T>,
    dy0: Option<ProfileFn<T>>,
    pub x_lo: T,
    pub x_hi: T,
    pub n_x: usize,
}

impl<T: Real> std::fmt::Debug for InitialProfile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialProfile")
            .field("x_lo", &self.x_lo)
            .field("x_hi", &self.x_hi)
            .field("n_x", &self.n_x)
            .field("analytic_derivative", &self.dy0.is_some())
            .finish()
    }
}

impl<T: Real> InitialProfile<T> {
    pub fn new(y0: ProfileFn<T>, x_lo: T, x_hi: T, n_x: usize) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::InsufficientPoints {
                needed: 2,
                got: n_x,
            });
        }
        if !(x_lo < x_hi) {
            return Err(Error::InvalidParameter(format!(
                "empty window [{x_lo}, {x_hi}]"
            )));
        }
        Ok(Self {
            y0,
            dy0: None,
            x_lo,
            x_hi,
            n_x,
        })
    }

    /// Supplies the exact derivative `Y0'`; otherwise it is differenced.
    pub fn with_derivative(mut self, dy0: ProfileFn<T>) -> Self {
        self.dy0 = Some(dy0);
        self
    }

    pub fn spacing(&self) -> T {
        (self.x_hi - self.x_lo) / T::from_count(self.n_x - 1)
    }

    pub fn seeds(&self) -> Vec<T> {
        (0..self.n_x)
            .map(|i| self.x_lo + self.spacing() * T::from_count(i))
            .collect()
    }

    pub fn value(&self, x: T) -> Vec<T> {
        (self.y0)(x)
    }

    pub fn derivative(&self, x: T) -> Vec<T> {
        match &self.dy0 {
            Some(d) => d(x),
            None => {
                let h = T::lit(1e-4) * T::one().max(x.abs());
                let at = |s: T| (self.y0)(x + s * h);
                let (m2, m1, p1, p2) = (
                    at(-T::lit(2.0)),
                    at(-T::one()),
                    at(T::one()),
                    at(T::lit(2.0)),
                );
                (0..m1.len())
                    .map(|k| {
                        (m2[k] - T::lit(8.0) * m1[k] + T::lit(8.0) * p1[k] - p2[k])
                            / (T::lit(12.0) * h)
                    })
                    .collect()
            }
        }
    }

    /// Augmented initial state `[x, Y0(x), 1, Y0'(x)]` of the seed at `x`.
    fn seed_state(&self, x: T) -> Vec<T> {
        let mut s = vec![x];
        s.extend(self.value(x));
        s.push(T::one());
        s.extend(self.derivative(x));
        s
    }
}

/// State of one characteristic in a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPoint<T> {
    pub seed: T,
    pub x: T,
    pub y: Vec<T>,
    pub q: T,
    /// `y = Y_x q`; the spatial derivative is `y / q`.
    pub grad: Vec<T>,
    /// False once the characteristic could not be continued up to this time
    /// (its last reachable state is reported instead).
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot<T> {
    pub t: T,
    pub points: Vec<FieldPoint<T>>,
    /// Positions strictly increasing in seed order.
    pub ordered: bool,
}

impl<T: Real> FieldSnapshot<T> {
    pub fn min_q(&self) -> T {
        self.points.iter().fold(T::infinity(), |m, p| m.min(p.q))
    }
}

fn check_profile<T: Real>(sys: &SystemDef<T>, profile: &InitialProfile<T>) -> Result<()> {
    let probe = profile.value(profile.x_lo);
    if probe.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            got: probe.len(),
        });
    }
    Ok(())
}

/// Integrates every seeded characteristic with its variational data and
/// samples them at the (sorted, non-negative) times `t_grid`.
pub fn reconstruct_field<T: Real>(
    sys: &SystemDef<T>,
    profile: &InitialProfile<T>,
    t_grid: &[T],
    config: &IntegratorConfig<T>,
) -> Result<Vec<FieldSnapshot<T>>> {
    check_profile(sys, profile)?;
    if t_grid.iter().any(|t| *t < T::zero()) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "snapshot times must be non-negative and sorted".into(),
        ));
    }
    let t_end = t_grid.last().copied().unwrap_or(T::zero());
    let field = augment(sys);
    let n = sys.n();
    let cfg = (*config).with_t_max(t_end);
    let columns = profile
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let traj = integrate(&field, &profile.seed_state(seed), &cfg)?;
            Ok(t_grid
                .iter()
                .map(|&t| {
                    let s = traj.eval(t);
                    FieldPoint {
                        seed,
                        x: s[0],
                        y: s[1..=n].to_vec(),
                        q: s[n + 1],
                        grad: s[n + 2..].to_vec(),
                        alive: t <= traj.t_final(),
                    }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let points: Vec<_> = columns.iter().map(|c| c[k].clone()).collect();
            let ordered = points.windows(2).all(|w| w[1].x > w[0].x);
            FieldSnapshot { t, points, ordered }
        })
        .collect())
}

/// Outcome of [`detect_crossing`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport<T> {
    pub found: bool,
    /// Adjacent seed indices `(i, i + 1)` that collide first.
    pub pair: Option<(usize, usize)>,
    pub t_cross: Option<T>,
    /// `|X_i - X_{i+1}|` at the located crossing time.
    pub gap_at_cross: Option<T>,
    /// First zero of `q` over all characteristics: `(seed index, time)`.
    pub q_zero: Option<(usize, T)>,
    /// `2 dx * max|Q|` over the examined span, the resolution within which
    /// the crossing and the first `q` zero are expected to agree.
    pub coherence_bound: T,
    /// Whether both signals fired and agree within `coherence_bound`, or
    /// neither fired.
    pub coherent: bool,
    /// First characteristic whose integration broke down: `(index, time)`.
    /// The scan stops there.
    pub breakdown: Option<(usize, T)>,
    /// Time span actually examined.
    pub t_examined: T,
}

/// Length of the integration windows of [`detect_crossing`].
const CHUNK: f64 = 25.0;

/// Follows the characteristic fan up to `t_max` and locates the first sign
/// change of the gaps `X_{i+1} - X_i`, together with the first zero of the
/// `q` indicators. The fan is integrated in windows so memory stays bounded
/// for long horizons.
pub fn detect_crossing<T: Real>(
    sys: &SystemDef<T>,
    profile: &InitialProfile<T>,
    t_max: T,
    config: &IntegratorConfig<T>,
) -> Result<CrossingReport<T>> {
    check_profile(sys, profile)?;
    let field = augment(sys);
    let qi = field.q_index();
    let seeds = profile.seeds();
    let mut states: Vec<Vec<T>> = seeds.iter().map(|&x| profile.seed_state(x)).collect();
    let mut t0 = T::zero();
    let chunk = T::lit(CHUNK);
    let mut q_zero: Option<(usize, T)> = None;
    let mut speed = T::zero();
    let mut out = vec![T::zero(); sys.dim()];

    let mut crossing = None;
    let mut breakdown = None;
    while t0 < t_max {
        let span = chunk.min(t_max - t0);
        let cfg = (*config).with_t_max(span);
        let trajs = states
            .par_iter()
            .map(|s| integrate(&field, s, &cfg))
            .collect::<Result<Vec<Trajectory<T>>>>()?;

        // Characteristics that stopped early bound the usable window.
        breakdown = trajs
            .iter()
            .enumerate()
            .filter(|(_, tr)| !matches!(tr.termination(), Termination::ReachedEnd))
            .map(|(i, tr)| (i, tr.t_final()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite times"));
        let usable = breakdown.map_or(span, |b| b.1);

        for tr in &trajs {
            for k in 0..tr.len() {
                let st = tr.state(k);
                if tr.time(k) <= usable && sys.rhs_into(st[0], &st[1..=sys.n()], &mut out).is_ok() {
                    speed = speed.max(out[0].abs());
                }
            }
        }
        if q_zero.is_none() {
            q_zero = trajs
                .iter()
                .enumerate()
                .filter_map(|(i, tr)| {
                    find_event(tr, |_, s| s[qi], Direction::Falling).map(|t| (i, t))
                })
                .filter(|(_, t)| *t <= usable)
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite times"))
                .map(|(i, t)| (i, t0 + t));
        }
        crossing = first_crossing(&trajs, usable).map(|(i, t, g)| (i, t0 + t, g));
        if crossing.is_some() || breakdown.is_some() {
            breakdown = breakdown.map(|(i, t)| (i, t0 + t));
            t0 += usable;
            break;
        }
        for (s, tr) in states.iter_mut().zip(&trajs) {
            s.copy_from_slice(tr.final_state());
        }
        t0 += span;
    }

    let bound = T::lit(2.0) * profile.spacing() * speed;
    let coherent = match (crossing, q_zero) {
        (Some((_, tc, _)), Some((_, tq))) => (tc - tq).abs() <= bound,
        (None, None) => true,
        _ => false,
    };
    Ok(CrossingReport {
        found: crossing.is_some(),
        pair: crossing.map(|(i, _, _)| (i, i + 1)),
        t_cross: crossing.map(|(_, t, _)| t),
        gap_at_cross: crossing.map(|(_, _, g)| g),
        q_zero,
        coherence_bound: bound,
        coherent,
        breakdown,
        t_examined: t0.min(t_max),
    })
}

/// Earliest sign change of `X_{i+1} - X_i` on `[0, t_end]`:
/// `(i, t, |gap|)`.
fn first_crossing<T: Real>(trajs: &[Trajectory<T>], t_end: T) -> Option<(usize, T, T)> {
    let dim = trajs.first()?.dim();
    let mut best: Option<(usize, T, T)> = None;
    let mut a = vec![T::zero(); dim];
    let mut b = vec![T::zero(); dim];
    for i in 0..trajs.len().saturating_sub(1) {
        let (left, right) = (&trajs[i], &trajs[i + 1]);
        let mut gap = |t: T| {
            left.eval_into(t, &mut a);
            right.eval_into(t, &mut b);
            b[0] - a[0]
        };
        let mut times: Vec<T> = left
            .times()
            .iter()
            .chain(right.times())
            .copied()
            .filter(|t| *t <= t_end)
            .collect();
        times.sort_by(|x, y| x.partial_cmp(y).expect("finite times"));
        times.dedup();
        let horizon = best.map_or(t_end, |b| b.1);
        let mut prev_t = T::zero();
        let mut prev_g = gap(prev_t);
        for &t in times.iter().skip(1) {
            if t > horizon {
                break;
            }
            let g = gap(t);
            if prev_g > T::zero() && g <= T::zero() {
                let scale = T::one()
                    .max(left.eval(t)[0].abs())
                    .max(right.eval(t)[0].abs());
                let root = refine_root(&mut gap, prev_t, t, prev_g, g, T::lit(1e-12) * scale);
                let at_root = gap(root).abs();
                if best.is_none_or(|b| root < b.1) {
                    best = Some((i, root, at_root));
                }
                break;
            }
            prev_t = t;
            prev_g = g;
        }
    }
    best
}

/// Largest `|Y - Y0|` over the alive points of a snapshot, comparing each
/// point with the initial data at its current position.
pub fn profile_deviation<T: Real>(snapshot: &FieldSnapshot<T>, profile: &InitialProfile<T>) -> T {
    snapshot
        .points
        .iter()
        .filter(|p| p.alive)
        .map(|p| {
            let y0 = profile.value(p.x);
            let diff: Vec<T> = p.y.iter().zip(&y0).map(|(a, b)| *a - *b).collect();
            max_abs(&diff).max((p.x - p.seed).abs())
        })
        .fold(T::zero(), |m, v| m.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hopf_potential, plasma_radial};

    #[test]
    fn differenced_derivative() {
        let p = InitialProfile::new(Arc::new(|x: f64| vec![x.sin(), x * x]), -1.0, 1.0, 5).unwrap();
        let d = p.derivative(0.3);
        assert!((d[0] - 0.3f64.cos()).abs() < 1e-10 && (d[1] - 0.6).abs() < 1e-10);
    }

    #[test]
    fn hopf_linear_profile_focuses_uniformly() {
        let p = InitialProfile::new(Arc::new(|x: f64| vec![x]), -1.0, 1.0, 5).unwrap();
        let snaps = reconstruct_field(
            &hopf_potential(),
            &p,
            &[0.0, 2.0, 2.5],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let q = |t: f64| t.cos() + t.sin();
        for s in &snaps {
            for pt in &s.points {
                assert!((pt.q - q(s.t)).abs() < 1e-8);
            }
        }
        assert!(snaps[0].ordered && snaps[1].ordered && !snaps[2].ordered);
    }

    #[test]
    fn zero_profile_is_static() {
        let p = InitialProfile::new(Arc::new(|_: f64| vec![0.0, 0.0]), -1.0, 1.0, 4).unwrap();
        let sys = plasma_radial(2).unwrap();
        let r = detect_crossing(&sys, &p, 30.0, &IntegratorConfig::default()).unwrap();
        assert!(!r.found && r.coherent && r.q_zero.is_none());
    }
}
