use std::sync::Arc;

use isochrone::criteria::InvolutionSpec;
use isochrone::models::{DopingProfile, Family, ModelSpec, Transformation};
use isochrone::system::Interval;
use serde_json::{json, Map, Value};

use crate::args::{InvolutionKind, ModelArgs, ModelKind, TransformKind};
use crate::error::{CliError, Result};

/// A resolved model with its parameter echo for output files.
pub struct Model {
    pub spec: ModelSpec<f64>,
    pub echo: Value,
}

impl Model {
    /// `kind(param=value, ...)` for summaries.
    pub fn label(&self) -> String {
        let Value::Object(map) = &self.echo else {
            return String::new();
        };
        let params: Vec<String> = map
            .iter()
            .filter(|(k, _)| k.as_str() != "kind")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if params.is_empty() {
            return self.spec.kind().to_string();
        }
        format!("{}({})", self.spec.kind(), params.join(", ")).replace('"', "")
    }

    pub fn family(&self) -> Family<f64> {
        self.spec.family()
    }

    /// Human description of the default amplitude family.
    pub fn family_description(&self) -> &'static str {
        match self.spec {
            ModelSpec::PlasmaRadial { .. } | ModelSpec::PlasmaCalibrated { .. } => {
                "x0 = 1, Y0 = (0, h)"
            }
            ModelSpec::Relativistic { .. } => "x0 = background centre, (P0, E0) = (h, 0)",
            ModelSpec::RelativisticReduced { .. } => "x0 fixed, P0 = h",
            ModelSpec::HopfPotential | ModelSpec::InvolutionHamiltonian { .. } => "x0 = h, Y0 = 0",
            ModelSpec::Harmonic | ModelSpec::Transformed { .. } => "x0 = 1, Z = (h, 0)",
        }
    }

    /// Default start `(x0, Y0)`: the family member at amplitude zero.
    pub fn default_start(&self) -> (f64, Vec<f64>) {
        (self.family())(0.0)
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str, model: &str) -> Result<T> {
    value.ok_or_else(|| CliError::usage(format!("--model {model} needs --{flag}")))
}

fn doping(args: &ModelArgs, model: &str) -> Result<(DopingProfile<f64>, Map<String, Value>)> {
    let mut echo = Map::new();
    let profile = match (args.c, args.doping_k, args.doping_m) {
        (Some(c), None, None) => {
            echo.insert("c".into(), json!(c));
            DopingProfile::Constant(c)
        }
        (None, Some(k), Some(m)) => {
            echo.insert("doping_k".into(), json!(k));
            echo.insert("doping_m".into(), json!(m));
            echo.insert("doping_x0".into(), json!(args.doping_x0));
            DopingProfile::Candidate {
                k,
                m,
                x0: args.doping_x0,
            }
        }
        (None, None, None) => {
            return Err(CliError::usage(format!(
                "--model {model} needs --c or both --doping-k and --doping-m"
            )))
        }
        _ => {
            return Err(CliError::usage(
                "give either --c or both --doping-k and --doping-m",
            ))
        }
    };
    profile
        .validate()
        .map_err(|e| CliError::model(e.to_string()))?;
    Ok((profile, echo))
}

fn transformation(kind: TransformKind) -> Transformation<f64> {
    match kind {
        TransformKind::Identity => Transformation::identity(),
        TransformKind::Swap => Transformation::new(Arc::new(|_, b| b), Arc::new(|a, _| a))
            .with_partials(Arc::new(|_, _| (0.0, 1.0)), Arc::new(|_, _| (1.0, 0.0))),
        TransformKind::Parabolic => {
            Transformation::new(Arc::new(|a, b| a + b * b), Arc::new(|_, b| b))
                .with_partials(Arc::new(|_, b| (1.0, 2.0 * b)), Arc::new(|_, _| (0.0, 1.0)))
        }
    }
}

fn involution(args: &ModelArgs) -> Result<(InvolutionSpec<f64>, Map<String, Value>)> {
    let kind = require(args.involution, "involution", "involution")?;
    let omega = args.omega.unwrap_or(1.0);
    let j = args
        .interval
        .unwrap_or(crate::args::Interval { lo: -1.0, hi: 1.0 });
    let mut echo = Map::new();
    let spec = match kind {
        InvolutionKind::Trivial => {
            echo.insert("involution".into(), json!("trivial"));
            InvolutionSpec::new(
                Arc::new(|x: f64| -x),
                Some(Arc::new(|_| -1.0)),
                Interval::new(j.lo, j.hi),
                omega,
            )
        }
        InvolutionKind::Mobius => {
            let a = require(args.a, "a", "involution --involution mobius")?;
            echo.insert("involution".into(), json!("mobius"));
            echo.insert("a".into(), json!(a));
            InvolutionSpec::new(
                Arc::new(move |x: f64| -x / (1.0 + a * x)),
                Some(Arc::new(move |x: f64| {
                    -1.0 / ((1.0 + a * x) * (1.0 + a * x))
                })),
                Interval::new(j.lo, j.hi),
                omega,
            )
        }
    }
    .map_err(|e| CliError::model(e.to_string()))?;
    echo.insert("omega".into(), json!(omega));
    echo.insert("interval".into(), json!([j.lo, j.hi]));
    Ok((spec, echo))
}

/// Resolves the model flags. `x0` is the start position, used by the
/// reduced relativistic model whose tabulation is anchored there.
pub fn build_model(args: &ModelArgs, x0: Option<f64>) -> Result<Model> {
    let kind = args
        .model
        .ok_or_else(|| CliError::usage("--model is required"))?;
    let mut echo = Map::new();
    let spec = match kind {
        ModelKind::Plasma => {
            let d = require(args.d, "d", "plasma")?;
            echo.insert("d".into(), json!(d));
            ModelSpec::PlasmaRadial { d }
        }
        ModelKind::PlasmaCalibrated => {
            let d = require(args.d, "d", "plasma-calibrated")?;
            let gamma = require(args.gamma, "gamma", "plasma-calibrated")?;
            echo.insert("d".into(), json!(d));
            echo.insert("gamma".into(), json!(gamma));
            ModelSpec::PlasmaCalibrated { d, gamma }
        }
        ModelKind::Relativistic => {
            let (profile, params) = doping(args, "relativistic")?;
            echo.extend(params);
            ModelSpec::Relativistic { profile }
        }
        ModelKind::RelativisticReduced => {
            let (profile, params) = doping(args, "relativistic-reduced")?;
            echo.extend(params);
            let p0 = require(args.p0, "p0", "relativistic-reduced")?;
            let e0 = args.e0.unwrap_or(0.0);
            let x0 = x0.unwrap_or(args.doping_x0);
            let window = match args.window {
                Some(w) => (w.lo, w.hi),
                None => {
                    let j = profile.interval();
                    let pad = |v: f64, inner: f64| {
                        if v.is_finite() {
                            v + 1e-3 * (inner - v)
                        } else {
                            inner
                        }
                    };
                    (pad(j.lo, x0 - 2.0), pad(j.hi, x0 + 2.0))
                }
            };
            echo.insert("x0".into(), json!(x0));
            echo.insert("p0".into(), json!(p0));
            echo.insert("e0".into(), json!(e0));
            echo.insert("window".into(), json!([window.0, window.1]));
            ModelSpec::RelativisticReduced {
                profile,
                x0,
                p0,
                e0,
                window,
            }
        }
        ModelKind::Hopf => ModelSpec::HopfPotential,
        ModelKind::Harmonic => ModelSpec::Harmonic,
        ModelKind::Transformed => {
            let t = require(args.transform, "transform", "transformed")?;
            echo.insert("transform".into(), json!(format!("{t:?}").to_lowercase()));
            ModelSpec::Transformed {
                transformation: transformation(t),
            }
        }
        ModelKind::Involution => {
            let (spec, params) = involution(args)?;
            echo.extend(params);
            ModelSpec::InvolutionHamiltonian { involution: spec }
        }
    };
    let mut full = Map::new();
    full.insert("kind".into(), json!(spec.kind()));
    full.extend(echo);
    Ok(Model {
        spec,
        echo: Value::Object(full),
    })
}
