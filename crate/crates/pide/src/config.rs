//! JSON experiment configuration: schema, named analytic primitives, and
//! validation with JSON-pointer error locations.
//!
//! Coefficients and sources are named primitives rather than arbitrary
//! expressions, so identical configs produce byte-identical outputs:
//!
//! - `const:<c>`
//! - `cos1` / `cos1@<axis>`  : cos(2 pi x_axis), axis defaults to 0
//! - `sin1` / `sin1@<axis>`  : sin(2 pi x_axis)
//! - `cos2d`                 : cos(2 pi x0) cos(2 pi x1)
//! - `shifted-cos@<axis>`    : 0.5 + 0.5 cos(2 pi x_axis)  (nonnegative)
//! - `bump@<axis>`           : (0.5 + 0.5 cos(2 pi x_axis))^2
//! - `scaled:<c>:<prim>`     : c * prim
//! - `sum[p1;p2;...]`

use crate::error::{Error, Result};
use crate::levy::{Discretization, JumpFunctionSpec, LevyMeasureSpec, NonlocalOperatorSpec, Normalization};
use crate::scheme::{Coefficient, GradientTermSpec, LocalTermSpec, ProblemSpec};
use crate::torus::{make_grid, sample, Block, GridField, TorusGrid};
use serde::Deserialize;
use std::f64::consts::PI;

fn cfg_err(pointer: &str, message: impl Into<String>) -> Error {
    Error::Config {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Analytic primitives
// ---------------------------------------------------------------------------

/// Parses a primitive and samples it on the grid. Constants stay symbolic so
/// coefficient maxima are exact.
pub fn parse_primitive(text: &str, grid: TorusGrid, pointer: &str) -> Result<Coefficient> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("const:") {
        let c: f64 = rest
            .parse()
            .map_err(|e| cfg_err(pointer, format!("bad constant '{rest}': {e}")))?;
        if !c.is_finite() {
            return Err(cfg_err(pointer, "constant must be finite"));
        }
        return Ok(Coefficient::Const(c));
    }
    if let Some(rest) = text.strip_prefix("scaled:") {
        let (c_str, inner) = rest
            .split_once(':')
            .ok_or_else(|| cfg_err(pointer, "scaled:<c>:<prim> needs two parts"))?;
        let c: f64 = c_str
            .parse()
            .map_err(|e| cfg_err(pointer, format!("bad scale '{c_str}': {e}")))?;
        let base = parse_primitive(inner, grid, pointer)?;
        return Ok(match base {
            Coefficient::Const(v) => Coefficient::Const(c * v),
            Coefficient::Field(mut f) => {
                f.map_inplace(|v| c * v);
                Coefficient::Field(f)
            }
        });
    }
    if let Some(rest) = text.strip_prefix("sum[") {
        let inner = rest
            .strip_suffix(']')
            .ok_or_else(|| cfg_err(pointer, "sum[...] missing closing bracket"))?;
        let mut field = GridField::zeros(grid);
        let mut shift = 0.0;
        for part in inner.split(';') {
            match parse_primitive(part, grid, pointer)? {
                Coefficient::Const(c) => shift += c,
                Coefficient::Field(f) => field.axpy(1.0, &f),
            }
        }
        field.add_constant(shift);
        return Ok(Coefficient::Field(field));
    }
    let (name, axis) = match text.split_once('@') {
        Some((name, ax)) => {
            let axis: usize = ax
                .parse()
                .map_err(|e| cfg_err(pointer, format!("bad axis '{ax}': {e}")))?;
            (name, axis)
        }
        None => (text, 0usize),
    };
    if name != "cos2d" && axis >= grid.dim() {
        return Err(cfg_err(
            pointer,
            format!("axis {axis} out of range for a {}-dimensional grid", grid.dim()),
        ));
    }
    let field = match name {
        "cos1" => sample(grid, |x| (2.0 * PI * x[axis]).cos())?,
        "sin1" => sample(grid, |x| (2.0 * PI * x[axis]).sin())?,
        "shifted-cos" => sample(grid, |x| 0.5 + 0.5 * (2.0 * PI * x[axis]).cos())?,
        "bump" => sample(grid, |x| {
            let s = 0.5 + 0.5 * (2.0 * PI * x[axis]).cos();
            s * s
        })?,
        "cos2d" => {
            if grid.dim() != 2 {
                return Err(cfg_err(pointer, "cos2d needs a 2-dimensional grid"));
            }
            sample(grid, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos())?
        }
        other => return Err(cfg_err(pointer, format!("unknown primitive '{other}'"))),
    };
    Ok(Coefficient::Field(field))
}

fn coefficient_to_field(c: Coefficient, grid: TorusGrid) -> GridField {
    match c {
        Coefficient::Const(v) => GridField::constant(grid, v),
        Coefficient::Field(f) => f,
    }
}

// ---------------------------------------------------------------------------
// Raw JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    problem: RawProblem,
    mode: String,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    d1: usize,
    d2: usize,
    n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(default)]
    local: Vec<RawLocal>,
    #[serde(default)]
    nonlocal: Vec<RawNonlocal>,
    #[serde(default)]
    gradient: Vec<RawGradient>,
    f: String,
    #[serde(default = "default_m")]
    m: f64,
}

fn default_m() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocal {
    block: Block,
    a: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlocal {
    block: Block,
    discretization: Discretization,
    beta: f64,
    #[serde(default)]
    jump: Option<RawJump>,
    #[serde(default)]
    normalization: Option<Normalization>,
    #[serde(default)]
    truncation_radius: Option<f64>,
    #[serde(default)]
    inner_cut: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum RawJump {
    Identity,
    Scaled { a2: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGradient {
    block: Block,
    b: String,
    k: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
struct RawParams {
    #[serde(rename = "T")]
    horizon: Option<f64>,
    window: Option<f64>,
    delta_schedule: Option<Vec<f64>>,
    tol: Option<f64>,
    snapshot_times: Option<Vec<f64>>,
    u0: Option<String>,
    example_id: Option<String>,
}

// ---------------------------------------------------------------------------
// Validated configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cauchy,
    ErgodicVd,
    ErgodicLt,
    Convergence,
    Audit,
    Reproduce,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Cauchy => "cauchy",
            Mode::ErgodicVd => "ergodic-vd",
            Mode::ErgodicLt => "ergodic-lt",
            Mode::Convergence => "convergence",
            Mode::Audit => "audit",
            Mode::Reproduce => "reproduce",
        }
    }
}

/// Mode parameters, with defaults applied and the mode's requirements checked.
#[derive(Debug, Clone)]
pub struct ModeParams {
    pub horizon: f64,
    pub window: f64,
    pub delta_schedule: Vec<f64>,
    pub tol: f64,
    pub snapshot_times: Vec<f64>,
    pub u0: GridField,
    pub example_id: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: TorusGrid,
    pub problem: ProblemSpec,
    pub mode: Mode,
    pub params: ModeParams,
    pub seed: u64,
    pub output_dir: Option<String>,
    /// Parsed JSON document, echoed into the run manifest.
    pub raw: serde_json::Value,
}

pub const DEFAULT_DELTA_SCHEDULE: [f64; 3] = [0.2, 0.1, 0.05];
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_HORIZON: f64 = 10.0;

/// Parses and validates a JSON config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw_value: serde_json::Value = serde_json::from_str(text)?;
    let raw: RawConfig = serde_json::from_value(raw_value.clone())
        .map_err(|e| cfg_err("/", format!("schema violation: {e}")))?;

    let grid = make_grid(raw.grid.d1, raw.grid.d2, raw.grid.n)
        .map_err(|e| cfg_err("/grid", e.to_string()))?;

    let mut local_terms = Vec::new();
    for (i, t) in raw.problem.local.iter().enumerate() {
        let ptr = format!("/problem/local/{i}");
        if grid.block_axes(t.block).is_empty() {
            return Err(cfg_err(&format!("{ptr}/block"), "block selects no axis"));
        }
        let a = parse_primitive(&t.a, grid, &format!("{ptr}/a"))?;
        if a.min(grid.len()) < 0.0 {
            return Err(cfg_err(&format!("{ptr}/a"), "local coefficient must be >= 0"));
        }
        local_terms.push(LocalTermSpec { block: t.block, a });
    }

    let mut nonlocal_terms = Vec::new();
    for (i, t) in raw.problem.nonlocal.iter().enumerate() {
        let ptr = format!("/problem/nonlocal/{i}");
        if grid.block_axes(t.block).is_empty() {
            return Err(cfg_err(&format!("{ptr}/block"), "block selects no axis"));
        }
        if !(t.beta > 1.0 && t.beta < 2.0) {
            return Err(cfg_err(
                &format!("{ptr}/beta"),
                format!("beta = {} out of range (1,2)", t.beta),
            ));
        }
        let jump = match &t.jump {
            None | Some(RawJump::Identity) => JumpFunctionSpec::Identity,
            Some(RawJump::Scaled { a2 }) => {
                let field = coefficient_to_field(
                    parse_primitive(a2, grid, &format!("{ptr}/jump/a2"))?,
                    grid,
                );
                if field.values().iter().any(|&v| v < 0.0) {
                    return Err(cfg_err(&format!("{ptr}/jump/a2"), "a2 must be >= 0"));
                }
                JumpFunctionSpec::Scaled { scale_field: field }
            }
        };
        match t.discretization {
            Discretization::Spectral => {
                if !jump.is_identity() {
                    return Err(cfg_err(
                        &format!("{ptr}/jump"),
                        "spectral discretization requires the identity jump",
                    ));
                }
                if t.normalization == Some(Normalization::RawKernel) {
                    return Err(cfg_err(
                        &format!("{ptr}/normalization"),
                        "spectral terms are always normalized-multiplier",
                    ));
                }
                let mut spec = NonlocalOperatorSpec::spectral(t.block, t.beta)
                    .map_err(|e| cfg_err(&ptr, e.to_string()))?;
                spec.measure = LevyMeasureSpec::new(t.beta, grid.block_axes(t.block).len())
                    .map_err(|e| cfg_err(&format!("{ptr}/beta"), e.to_string()))?;
                nonlocal_terms.push(spec);
            }
            Discretization::Quadrature => {
                if grid.block_axes(t.block).len() != 1 {
                    return Err(cfg_err(
                        &format!("{ptr}/block"),
                        "quadrature blocks must be one-dimensional",
                    ));
                }
                let mut spec = NonlocalOperatorSpec::quadrature(
                    t.block,
                    t.beta,
                    jump,
                    t.normalization.unwrap_or(Normalization::NormalizedMultiplier),
                    grid,
                )
                .map_err(|e| cfg_err(&ptr, e.to_string()))?;
                if let Some(r) = t.truncation_radius {
                    if r < 1.0 {
                        return Err(cfg_err(
                            &format!("{ptr}/truncation_radius"),
                            "truncation radius must be >= 1",
                        ));
                    }
                    spec.truncation_radius = r;
                }
                if let Some(c) = t.inner_cut {
                    if !(c > 0.0 && c <= grid.h()) {
                        return Err(cfg_err(
                            &format!("{ptr}/inner_cut"),
                            format!("inner cut must lie in (0, {}]", grid.h()),
                        ));
                    }
                    spec.inner_cut = c;
                }
                nonlocal_terms.push(spec);
            }
        }
    }

    let mut gradient_terms = Vec::new();
    for (i, t) in raw.problem.gradient.iter().enumerate() {
        let ptr = format!("/problem/gradient/{i}");
        if grid.block_axes(t.block).is_empty() {
            return Err(cfg_err(&format!("{ptr}/block"), "block selects no axis"));
        }
        if t.k < 0.0 {
            return Err(cfg_err(&format!("{ptr}/k"), "exponent k must be >= 0"));
        }
        let b = parse_primitive(&t.b, grid, &format!("{ptr}/b"))?;
        gradient_terms.push(GradientTermSpec {
            block: t.block,
            b,
            k: t.k,
        });
    }

    let f = coefficient_to_field(parse_primitive(&raw.problem.f, grid, "/problem/f")?, grid);
    let problem = ProblemSpec {
        grid,
        local_terms,
        nonlocal_terms,
        gradient_terms,
        f,
        hamiltonian_exponent: raw.problem.m,
    };
    problem
        .validate()
        .map_err(|e| cfg_err("/problem", e.to_string()))?;

    let mode = match raw.mode.as_str() {
        "cauchy" => Mode::Cauchy,
        "ergodic-vd" => Mode::ErgodicVd,
        "ergodic-lt" => Mode::ErgodicLt,
        "convergence" => Mode::Convergence,
        "audit" => Mode::Audit,
        "reproduce" => Mode::Reproduce,
        other => return Err(cfg_err("/mode", format!("unknown mode '{other}'"))),
    };

    let tol = raw.params.tol.unwrap_or(DEFAULT_TOL);
    if tol <= 0.0 {
        return Err(cfg_err("/params/tol", "tolerance must be positive"));
    }
    let horizon = raw.params.horizon.unwrap_or(DEFAULT_HORIZON);
    if horizon <= 0.0 {
        return Err(cfg_err("/params/T", "horizon must be positive"));
    }
    let window = raw.params.window.unwrap_or((horizon / 8.0).max(1.0));
    if mode == Mode::ErgodicLt || mode == Mode::Convergence {
        if !(window > 0.0 && horizon >= 4.0 * window) {
            return Err(cfg_err("/params/window", "need T >= 4*window > 0"));
        }
    }
    let delta_schedule = raw
        .params
        .delta_schedule
        .unwrap_or_else(|| DEFAULT_DELTA_SCHEDULE.to_vec());
    if mode == Mode::ErgodicVd {
        if delta_schedule.len() < 3 {
            return Err(cfg_err("/params/delta_schedule", "need at least 3 deltas"));
        }
        if delta_schedule.windows(2).any(|w| w[1] >= w[0]) || delta_schedule[0] <= 0.0 {
            return Err(cfg_err(
                "/params/delta_schedule",
                "deltas must be positive and strictly decreasing",
            ));
        }
    }
    let snapshot_times = raw.params.snapshot_times.unwrap_or_else(|| {
        (0..=20).map(|i| horizon * i as f64 / 20.0).collect()
    });
    if snapshot_times.iter().any(|&t| t < 0.0 || t > horizon) {
        return Err(cfg_err(
            "/params/snapshot_times",
            "snapshot times must lie in [0, T]",
        ));
    }
    let u0 = match &raw.params.u0 {
        Some(text) => coefficient_to_field(parse_primitive(text, grid, "/params/u0")?, grid),
        None => GridField::zeros(grid),
    };
    if mode == Mode::Reproduce && raw.params.example_id.is_none() {
        return Err(cfg_err("/params/example_id", "reproduce mode needs example_id"));
    }

    Ok(ExperimentConfig {
        grid,
        problem,
        mode,
        params: ModeParams {
            horizon,
            window,
            delta_schedule,
            tol,
            snapshot_times,
            u0,
            example_id: raw.params.example_id.clone(),
        },
        seed: raw.seed,
        output_dir: raw.output_dir,
        raw: raw_value,
    })
}
