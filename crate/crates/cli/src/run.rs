use std::sync::Arc;

use isochrone::criteria::{sabatini_tau, sabatini_verdict};
use isochrone::field::{detect_crossing, reconstruct_field, InitialProfile, ProfileFn};
use isochrone::integrate::{integrate, IntegratorConfig, Termination, Trajectory};
use isochrone::isochrony::{classify_isochronous, monodromy, period_derivative, Classification};
use isochrone::models::{relativistic_reduced, ModelSpec};
use isochrone::system::SystemDef;
use isochrone::variational::{augment, detect_blowup_traced, BlowupKind};
use serde_json::{json, Map, Value};

use crate::args::{
    BlowupArgs, CrossingArgs, FieldArgs, IntegratorArgs, InvolutionArgs, ModelKind, MonodromyArgs,
    PeriodMapArgs, ProfileArgs, ProfileKind, Range, SabatiniArgs, SimulateArgs, StartArgs,
};
use crate::emit::{Cell, Plot, Report, Series, Table};
use crate::error::{CliError, Result};
use crate::model::{build_model, Model};

/// Amplitude of the family member used when no start is given.
const DEFAULT_AMPLITUDE: f64 = 0.2;
const DEFAULT_H: Range = Range {
    lo: 0.05,
    hi: 0.3,
    n: 6,
};

fn integrator(args: &IntegratorArgs, t_max: f64) -> Result<IntegratorConfig<f64>> {
    let base = IntegratorConfig::default();
    let cfg = IntegratorConfig {
        rtol: args.rtol.unwrap_or(base.rtol),
        atol: args.atol.unwrap_or(base.atol),
        h_init: args.h_init.unwrap_or(base.h_init),
        h_min: args.h_min.unwrap_or(base.h_min),
        max_steps: args.max_steps.unwrap_or(base.max_steps),
        t_max: args.t_max.unwrap_or(t_max),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn integrator_echo(cfg: &IntegratorConfig<f64>) -> Value {
    json!({
        "method": "dopri5",
        "rtol": cfg.rtol,
        "atol": cfg.atol,
        "h_init": cfg.h_init,
        "h_min": cfg.h_min,
        "max_steps": cfg.max_steps,
        "t_max": cfg.t_max,
    })
}

fn system(model: &Model) -> Result<SystemDef<f64>> {
    model
        .spec
        .system()
        .map_err(|e| CliError::model(e.to_string()))
}

/// Start `(x0, Y0, y0)` from the flags, falling back on the family member
/// at the default amplitude and a zero gradient.
fn start(
    model: &Model,
    sys: &SystemDef<f64>,
    args: &StartArgs,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (fx, fy) = (model.family())(DEFAULT_AMPLITUDE);
    let x0 = args.x0.unwrap_or(fx);
    let n = sys.n();
    let state = match &args.state {
        Some(s) if s.0.len() == n => s.0.clone(),
        Some(s) => {
            return Err(CliError::usage(format!(
                "--state needs {n} values, got {}",
                s.0.len()
            )));
        }
        None => fy,
    };
    let grad = match &args.y0 {
        Some(g) if g.0.len() == n => g.0.clone(),
        Some(g) if g.0.len() == 1 => vec![g.0[0]; n],
        Some(g) => {
            return Err(CliError::usage(format!(
                "--y0 needs 1 or {n} values, got {}",
                g.0.len()
            )))
        }
        None => vec![0.0; n],
    };
    Ok((x0, state, grad))
}

fn termination_echo(traj: &Trajectory<f64>) -> Value {
    match traj.termination() {
        Termination::ReachedEnd => json!({"kind": "reached_end"}),
        Termination::EventFired { t } => json!({"kind": "event", "t": t}),
        Termination::StepUnderflow { t, h } => json!({"kind": "step_underflow", "t": t, "h": h}),
        Termination::DomainExit { t, reason } => {
            json!({"kind": "domain_exit", "t": t, "reason": reason})
        }
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn sampled_table(traj: &Trajectory<f64>, columns: Vec<String>, samples: usize) -> (Table, Plot) {
    let times = uniform(0.0, traj.t_final(), samples.max(2));
    let mut table = Table::new(columns.clone());
    let mut series: Vec<Series> = columns[1..]
        .iter()
        .map(|c| Series {
            label: c.clone(),
            points: Vec::with_capacity(times.len()),
        })
        .collect();
    for &t in &times {
        let s = traj.eval(t);
        let mut row = vec![Cell::Num(t)];
        row.extend(s.iter().map(|v| Cell::Num(*v)));
        for (series, v) in series.iter_mut().zip(&s) {
            series.points.push((t, *v));
        }
        table.push(row);
    }
    let plot = Plot {
        title: String::new(),
        x_label: "t".into(),
        y_label: "state".into(),
        series,
    };
    (table, plot)
}

pub fn simulate(args: &SimulateArgs) -> Result<Report> {
    let model = build_model(&args.model, args.start.x0)?;
    let cfg = integrator(&args.integrator, 10.0)?;
    let mut results = Map::new();
    let (traj, columns) = if let ModelSpec::RelativisticReduced {
        profile,
        x0,
        p0,
        e0,
        window,
    } = &model.spec
    {
        let red = relativistic_reduced(profile, *x0, *p0, *e0, *window)?;
        results.insert("tabulation_nodes".into(), json!(red.grid_len()));
        let traj = integrate(&red, &red.initial_state(), &cfg)?;
        (traj, vec!["t".to_string(), "x".into(), "v".into()])
    } else {
        let sys = system(&model)?;
        let (x0, y, grad) = start(&model, &sys, &args.start)?;
        let n = sys.n();
        let mut s0 = vec![x0];
        s0.extend(&y);
        s0.push(1.0);
        s0.extend(&grad);
        results.insert("x0".into(), json!(x0));
        results.insert("state0".into(), json!(y));
        results.insert("y0".into(), json!(grad));
        let traj = integrate(&augment(&sys), &s0, &cfg)?;
        let mut columns = vec!["t".to_string(), "x".into()];
        columns.extend((1..=n).map(|i| format!("Y{i}")));
        columns.push("q".into());
        columns.extend((1..=n).map(|i| format!("y{i}")));
        (traj, columns)
    };
    results.insert("termination".into(), termination_echo(&traj));
    results.insert("t_final".into(), json!(traj.t_final()));
    results.insert("steps".into(), json!(traj.steps()));
    let (table, mut plot) = sampled_table(&traj, columns, args.samples);
    plot.title = format!("simulate {}", model.label());
    let summary = format!(
        "simulate {}: integrated to t = {:.6} ({}), {} samples",
        model.label(),
        traj.t_final(),
        results["termination"]["kind"].as_str().unwrap_or("?"),
        table.rows.len()
    );
    Ok(Report {
        analysis: "simulate",
        model: model.echo,
        integrator: integrator_echo(&cfg),
        verdict: None,
        results,
        table,
        plot: Some(plot),
        summary,
    })
}

fn period_table(c: &Classification<f64>) -> (Table, Series) {
    let mut table = Table::new(["h", "T", "return_error"]);
    let mut points = Vec::new();
    for e in &c.period_map.entries {
        table.push(vec![
            Cell::Num(e.h),
            Cell::opt(e.period),
            Cell::opt(e.return_error),
        ]);
        points.push((e.h, e.period.unwrap_or(f64::NAN)));
    }
    (
        table,
        Series {
            label: "T(h)".into(),
            points,
        },
    )
}

fn classification_results(c: &Classification<f64>) -> Map<String, Value> {
    let mut r = Map::new();
    r.insert("family".into(), json!(c.period_map.family));
    r.insert("tol_iso".into(), json!(c.tol_iso));
    r.insert("spread".into(), json!(c.spread));
    r.insert("max_dev_identity".into(), json!(c.max_dev_identity));
    r.insert(
        "max_multiplier_modulus".into(),
        json!(c.max_multiplier_modulus),
    );
    let status: Vec<Value> = c
        .period_map
        .entries
        .iter()
        .map(|e| {
            let s = match &e.status {
                isochrone::isochrony::EntryStatus::Closed => "closed".to_string(),
                isochrone::isochrony::EntryStatus::NotClosed => "not_closed".to_string(),
                isochrone::isochrony::EntryStatus::NoReturn(why) => format!("no_return: {why}"),
            };
            json!({"h": e.h, "status": s})
        })
        .collect();
    r.insert("entries".into(), Value::Array(status));
    let derivative = period_derivative(&c.period_map).ok().map(|d| {
        d.iter()
            .map(|(h, v)| json!({"h": h, "dT_dh": v}))
            .collect::<Vec<_>>()
    });
    r.insert("period_derivative".into(), json!(derivative));
    let mono: Vec<Value> = c
        .monodromy
        .iter()
        .map(|(h, m)| json!({"h": h, "period": m.period.period, "dev_identity": m.dev_identity}))
        .collect();
    r.insert("monodromy_samples".into(), Value::Array(mono));
    r
}

pub fn period_map(args: &PeriodMapArgs) -> Result<Report> {
    let model = build_model(&args.model, None)?;
    let sys = system(&model)?;
    let cfg = integrator(&args.integrator, 20.0)?;
    let h = args.h.unwrap_or(DEFAULT_H);
    let c = classify_isochronous(
        &sys,
        &model.family(),
        model.family_description(),
        (h.lo, h.hi),
        h.n,
        &cfg,
        args.tol_iso,
    )?;
    let (table, series) = period_table(&c);
    let summary = format!(
        "period-map {}: {} amplitudes in [{}, {}], spread {}, verdict {}",
        model.label(),
        h.n,
        h.lo,
        h.hi,
        c.spread.map_or("n/a".to_string(), |s| format!("{s:.3e}")),
        c.verdict.as_str()
    );
    Ok(Report {
        analysis: "period-map",
        model: model.echo.clone(),
        integrator: integrator_echo(&cfg),
        verdict: Some(c.verdict.as_str().into()),
        results: classification_results(&c),
        table,
        plot: Some(Plot {
            title: format!("period map {}", model.label()),
            x_label: "h".into(),
            y_label: "T".into(),
            series: vec![series],
        }),
        summary,
    })
}

pub fn monodromy_run(args: &MonodromyArgs) -> Result<Report> {
    let model = build_model(&args.model, args.start.x0)?;
    let sys = system(&model)?;
    let cfg = integrator(&args.integrator, 20.0)?;
    let (x0, y, _) = start(&model, &sys, &args.start)?;
    let m = monodromy(&sys, x0, &y, &cfg)?;
    let d = m.matrix.nrows();
    let mut columns = vec!["row".to_string()];
    columns.extend((0..d).map(|j| format!("m{j}")));
    let mut table = Table::new(columns);
    for i in 0..d {
        let mut row = vec![Cell::Int(i as i64)];
        row.extend((0..d).map(|j| Cell::Num(m.matrix[(i, j)])));
        table.push(row);
    }
    let mut results = Map::new();
    results.insert("x0".into(), json!(x0));
    results.insert("state0".into(), json!(y));
    results.insert("period".into(), json!(m.period.period));
    results.insert("return_error".into(), json!(m.period.return_error));
    results.insert("dev_identity".into(), json!(m.dev_identity));
    results.insert(
        "max_multiplier_modulus".into(),
        json!(m.max_multiplier_modulus()),
    );
    let multipliers: Vec<Value> = m
        .multipliers
        .iter()
        .map(|z| json!({"re": z.re, "im": z.im, "modulus": (z.re * z.re + z.im * z.im).sqrt()}))
        .collect();
    results.insert("multipliers".into(), Value::Array(multipliers));
    let summary = format!(
        "monodromy {}: period {:.10}, |M - I| = {:.3e}, max |multiplier| = {:.10}",
        model.label(),
        m.period.period,
        m.dev_identity,
        m.max_multiplier_modulus()
    );
    Ok(Report {
        analysis: "monodromy",
        model: model.echo,
        integrator: integrator_echo(&cfg),
        verdict: None,
        results,
        table,
        plot: None,
        summary,
    })
}

pub fn blowup(args: &BlowupArgs) -> Result<Report> {
    let model = build_model(&args.model, args.start.x0)?;
    let sys = system(&model)?;
    let cfg = integrator(&args.integrator, 50.0)?;
    let (x0, y, grad) = start(&model, &sys, &args.start)?;
    let (r, traj) = detect_blowup_traced(&sys, x0, &y, &grad, &cfg, cfg.t_max)?;
    let qi = sys.n() + 1;
    let mut table = Table::new(["t", "x", "q"]);
    let mut points = Vec::new();
    for t in uniform(0.0, traj.t_final(), 401) {
        let s = traj.eval(t);
        table.push(vec![Cell::Num(t), Cell::Num(s[0]), Cell::Num(s[qi])]);
        points.push((t, s[qi]));
    }
    let mut results = Map::new();
    results.insert("blown".into(), json!(r.blown));
    results.insert("t_star".into(), json!(r.t_star));
    results.insert("q_min".into(), json!(r.q_min));
    results.insert("horizon".into(), json!(r.horizon));
    results.insert(
        "kind".into(),
        json!(r.kind.map(|k| match k {
            BlowupKind::Gradient => "gradient",
            BlowupKind::State => "state",
        })),
    );
    results.insert("x0".into(), json!(x0));
    results.insert("state0".into(), json!(y));
    results.insert("y0".into(), json!(grad));
    let verdict = if r.blown { "blow_up" } else { "no_blow_up" };
    let summary = match r.t_star {
        Some(t) => format!("blowup {}: {verdict} at t* = {t:.12}", model.label()),
        None => format!(
            "blowup {}: {verdict} up to t = {}, min q = {:.6e}",
            model.label(),
            r.horizon,
            r.q_min
        ),
    };
    Ok(Report {
        analysis: "blowup",
        model: model.echo.clone(),
        integrator: integrator_echo(&cfg),
        verdict: Some(verdict.into()),
        results,
        table,
        plot: Some(Plot {
            title: format!("gradient indicator {}", model.label()),
            x_label: "t".into(),
            y_label: "q".into(),
            series: vec![Series {
                label: "q".into(),
                points,
            }],
        }),
        summary,
    })
}

pub fn sabatini(args: &SabatiniArgs) -> Result<Report> {
    let model = build_model(&args.model, None)?;
    let lienard = model.spec.lienard().ok_or_else(|| {
        CliError::model(format!("{} has no Lienard reduction", model.spec.kind()))
    })?;
    // The closed form quoted for the radial plasma family divides by 2
    // where the definition gives 9; both are reported.
    let printed_factor = matches!(model.spec, ModelSpec::PlasmaRadial { .. }).then_some(9.0 / 2.0);
    let mut table = Table::new(["z", "tau", "tau_over_z6", "tau_printed_normalisation"]);
    let mut points = Vec::new();
    let mut values = Vec::new();
    for &z in &args.z.0 {
        let tau = sabatini_tau(&lienard, z)?;
        let printed = printed_factor.map(|f| f * tau);
        table.push(vec![
            Cell::Num(z),
            Cell::Num(tau),
            Cell::Num(tau / z.powi(6)),
            Cell::opt(printed),
        ]);
        points.push((z, tau));
        values.push(json!({"z": z, "tau": tau, "tau_printed_normalisation": printed}));
    }
    let outcome = sabatini_verdict(&lienard, args.half_width, args.samples, args.tol)?;
    let mut results = Map::new();
    results.insert("tau".into(), Value::Array(values));
    results.insert("worst_ratio".into(), json!(outcome.worst_ratio));
    results.insert("odd_defect".into(), json!(outcome.odd_defect));
    results.insert("half_width".into(), json!(args.half_width));
    results.insert("samples".into(), json!(args.samples));
    results.insert("tol".into(), json!(args.tol));
    let first = args.z.0.first().copied().unwrap_or(f64::NAN);
    let first_tau = table.rows.first().and_then(|r| match r[1] {
        Cell::Num(v) => Some(v),
        _ => None,
    });
    let summary = format!(
        "sabatini {}: tau({first}) = {:.12}, verdict {}",
        model.label(),
        first_tau.unwrap_or(f64::NAN),
        outcome.verdict.as_str()
    );
    Ok(Report {
        analysis: "sabatini",
        model: model.echo.clone(),
        integrator: Value::Null,
        verdict: Some(outcome.verdict.as_str().into()),
        results,
        table,
        plot: Some(Plot {
            title: format!("Sabatini tau {}", model.label()),
            x_label: "z".into(),
            y_label: "tau".into(),
            series: vec![Series {
                label: "tau(z)".into(),
                points,
            }],
        }),
        summary,
    })
}

pub fn involution(args: &InvolutionArgs) -> Result<Report> {
    let mut margs = args.model.clone();
    match margs.model {
        None | Some(ModelKind::Involution) => margs.model = Some(ModelKind::Involution),
        Some(other) => {
            return Err(CliError::usage(format!(
                "the involution analysis builds its own model; --model {other:?} is not accepted"
            )))
        }
    }
    let model = build_model(&margs, None)?;
    let ModelSpec::InvolutionHamiltonian { involution } = &model.spec else {
        unreachable!("involution model requested");
    };
    let expected = isochrone::criteria::build_involution_potential(involution).period();
    let sys = system(&model)?;
    let cfg = integrator(&args.integrator, 4.0 * expected)?;
    let c = classify_isochronous(
        &sys,
        &model.family(),
        model.family_description(),
        (args.h.lo, args.h.hi),
        args.h.n,
        &cfg,
        isochrone::isochrony::DEFAULT_TOL_ISO,
    )?;
    let (table, series) = period_table(&c);
    let max_dev = c
        .period_map
        .entries
        .iter()
        .map(|e| e.period.map_or(f64::INFINITY, |t| (t - expected).abs()))
        .fold(0.0f64, f64::max);
    let mut results = classification_results(&c);
    results.insert("expected_period".into(), json!(expected));
    results.insert("max_period_deviation".into(), json!(max_dev));
    let summary = format!(
        "involution {}: expected period {expected:.10}, max deviation {max_dev:.3e}, verdict {}",
        model.label(),
        c.verdict.as_str()
    );
    Ok(Report {
        analysis: "involution",
        model: model.echo.clone(),
        integrator: integrator_echo(&cfg),
        verdict: Some(c.verdict.as_str().into()),
        results,
        table,
        plot: Some(Plot {
            title: format!("involution oscillator {}", model.label()),
            x_label: "h".into(),
            y_label: "T".into(),
            series: vec![series],
        }),
        summary,
    })
}

fn profile(args: &ProfileArgs, n: usize) -> Result<InitialProfile<f64>> {
    let a = args.amplitude;
    let last = n - 1;
    let (value, deriv): (ProfileFn<f64>, ProfileFn<f64>) = match args.profile {
        ProfileKind::Gaussian => (
            Arc::new(move |x: f64| {
                let mut v = vec![0.0; n];
                v[last] = a * (-x * x).exp();
                v
            }),
            Arc::new(move |x: f64| {
                let mut v = vec![0.0; n];
                v[last] = -2.0 * a * x * (-x * x).exp();
                v
            }),
        ),
        ProfileKind::Constant => (
            Arc::new(move |_| {
                let mut v = vec![0.0; n];
                v[last] = a;
                v
            }),
            Arc::new(move |_| vec![0.0; n]),
        ),
        ProfileKind::Linear => (
            Arc::new(move |x| vec![a * x; n]),
            Arc::new(move |_| vec![a; n]),
        ),
        ProfileKind::Zero => (
            Arc::new(move |_| vec![0.0; n]),
            Arc::new(move |_| vec![0.0; n]),
        ),
    };
    InitialProfile::new(value, args.seeds.lo, args.seeds.hi, args.nx)
        .map(|p| p.with_derivative(deriv))
        .map_err(|e| CliError::usage(e.to_string()))
}

fn profile_echo(args: &ProfileArgs) -> Value {
    json!({
        "kind": format!("{:?}", args.profile).to_lowercase(),
        "amplitude": args.amplitude,
        "seeds": [args.seeds.lo, args.seeds.hi],
        "nx": args.nx,
    })
}

pub fn field(args: &FieldArgs) -> Result<Report> {
    let model = build_model(&args.model, None)?;
    let sys = system(&model)?;
    let cfg = integrator(&args.integrator, 10.0)?;
    let prof = profile(&args.profile, sys.n())?;
    let times = match args.times {
        Some(r) => uniform(r.lo, r.hi, r.n),
        None => uniform(0.0, cfg.t_max, 101),
    };
    let snaps = reconstruct_field(&sys, &prof, &times, &cfg)?;
    let n = sys.n();
    let mut columns = vec!["t".to_string(), "seed".into(), "x".into()];
    columns.extend((1..=n).map(|i| format!("Y{i}")));
    columns.push("q".into());
    columns.extend((1..=n).map(|i| format!("Yx{i}")));
    columns.push("alive".into());
    let mut table = Table::new(columns);
    let mut fan: Vec<Series> = prof
        .seeds()
        .iter()
        .map(|s| Series {
            label: format!("{s:.4}"),
            points: Vec::with_capacity(times.len()),
        })
        .collect();
    let mut flags = Vec::new();
    for snap in &snaps {
        for (k, p) in snap.points.iter().enumerate() {
            let mut row = vec![Cell::Num(snap.t), Cell::Num(p.seed), Cell::Num(p.x)];
            row.extend(p.y.iter().map(|v| Cell::Num(*v)));
            row.push(Cell::Num(p.q));
            row.extend(
                p.grad
                    .iter()
                    .map(|g| Cell::Num(if p.q != 0.0 { g / p.q } else { f64::NAN })),
            );
            row.push(Cell::Bool(p.alive));
            table.push(row);
            fan[k]
                .points
                .push((snap.t, if p.alive { p.x } else { f64::NAN }));
        }
        flags.push(json!({"t": snap.t, "ordered": snap.ordered, "min_q": snap.min_q()}));
    }
    let first_unordered = snaps.iter().find(|s| !s.ordered).map(|s| s.t);
    let mut results = Map::new();
    results.insert("profile".into(), profile_echo(&args.profile));
    results.insert("snapshots".into(), Value::Array(flags));
    results.insert("first_unordered_t".into(), json!(first_unordered));
    let verdict = if first_unordered.is_some() {
        "ordering_lost"
    } else {
        "ordered"
    };
    let summary = format!(
        "field {}: {} characteristics, {} snapshots on [{}, {}], {}",
        model.label(),
        args.profile.nx,
        times.len(),
        times.first().unwrap_or(&0.0),
        times.last().unwrap_or(&0.0),
        match first_unordered {
            Some(t) => format!("ordering lost by t = {t}"),
            None => "ordering preserved".to_string(),
        }
    );
    Ok(Report {
        analysis: "field",
        model: model.echo.clone(),
        integrator: integrator_echo(&cfg),
        verdict: Some(verdict.into()),
        results,
        table,
        plot: Some(Plot {
            title: format!("characteristic fan {}", model.label()),
            x_label: "t".into(),
            y_label: "X".into(),
            series: fan,
        }),
        summary,
    })
}

pub fn crossing(args: &CrossingArgs) -> Result<Report> {
    let model = build_model(&args.model, None)?;
    let sys = system(&model)?;
    let cfg = integrator(&args.integrator, 500.0)?;
    let prof = profile(&args.profile, sys.n())?;
    let r = detect_crossing(&sys, &prof, cfg.t_max, &cfg)?;
    let mut table = Table::new([
        "found",
        "pair_left",
        "pair_right",
        "t_cross",
        "gap_at_cross",
        "q_zero_index",
        "q_zero_t",
        "coherence_bound",
        "coherent",
        "t_examined",
    ]);
    let int = |v: Option<usize>| v.map_or(Cell::Empty, |i| Cell::Int(i as i64));
    table.push(vec![
        Cell::Bool(r.found),
        int(r.pair.map(|p| p.0)),
        int(r.pair.map(|p| p.1)),
        Cell::opt(r.t_cross),
        Cell::opt(r.gap_at_cross),
        int(r.q_zero.map(|q| q.0)),
        Cell::opt(r.q_zero.map(|q| q.1)),
        Cell::Num(r.coherence_bound),
        Cell::Bool(r.coherent),
        Cell::Num(r.t_examined),
    ]);
    let mut results = Map::new();
    results.insert("profile".into(), profile_echo(&args.profile));
    results.insert("found".into(), json!(r.found));
    results.insert("pair".into(), json!(r.pair));
    results.insert("t_cross".into(), json!(r.t_cross));
    results.insert("gap_at_cross".into(), json!(r.gap_at_cross));
    results.insert(
        "q_zero".into(),
        json!(r.q_zero.map(|(i, t)| json!({"index": i, "t": t}))),
    );
    results.insert("coherence_bound".into(), json!(r.coherence_bound));
    results.insert("coherent".into(), json!(r.coherent));
    results.insert(
        "breakdown".into(),
        json!(r.breakdown.map(|(i, t)| json!({"index": i, "t": t}))),
    );
    results.insert("t_examined".into(), json!(r.t_examined));
    let verdict = if r.found { "crossing" } else { "no_crossing" };
    let summary = match r.t_cross {
        Some(t) => format!(
            "crossing {}: characteristics {:?} cross at t = {t:.6} (first q zero {})",
            model.label(),
            r.pair.unwrap_or_default(),
            r.q_zero
                .map_or("none".to_string(), |q| format!("{:.6}", q.1))
        ),
        None => format!(
            "crossing {}: no crossing up to t = {}",
            model.label(),
            r.t_examined
        ),
    };
    Ok(Report {
        analysis: "crossing",
        model: model.echo.clone(),
        integrator: integrator_echo(&cfg),
        verdict: Some(verdict.into()),
        results,
        table,
        plot: None,
        summary,
    })
}
