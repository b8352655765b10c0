//! Built-in example catalog: named experiment configurations with expected
//! metrics for the `reproduce` workflow.

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{Error, Result};

/// One check performed when reproducing a catalog entry.
#[derive(Debug, Clone)]
pub struct ExpectedMetric {
    /// Metric computed by the reproduction run (see `runner::reproduce`).
    pub metric: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub config_json: &'static str,
    pub expected: &'static [ExpectedMetric],
}

impl CatalogEntry {
    pub fn config(&self) -> Result<ExperimentConfig> {
        parse_config(self.config_json)
    }
}

macro_rules! expect {
    ($($metric:expr => $value:expr, $tol:expr);* $(;)?) => {
        &[$(ExpectedMetric { metric: $metric, value: $value, tolerance: $tol }),*]
    };
}

/// A fractional Laplacian of order 1.5 with a first-order drift whose sign
/// changes across the torus, driven by a mean-zero source.
const FRACTIONAL_DRIFT: CatalogEntry = CatalogEntry {
    id: "fractional-drift",
    description: "1-d spectral fractional diffusion (beta = 1.5) with a sign-changing linear drift",
    config_json: r#"{
        "grid": {"d1": 0, "d2": 1, "n": 64},
        "problem": {
            "nonlocal": [{"block": "x2", "discretization": "spectral", "beta": 1.5}],
            "gradient": [{"block": "x2", "b": "sum[const:0.2;scaled:0.5:sin1@0]", "k": 1}],
            "f": "cos1@0",
            "m": 1.0
        },
        "mode": "reproduce",
        "params": {"example_id": "fractional-drift", "T": 8.0, "tol": 1e-8,
                   "delta_schedule": [0.2, 0.1, 0.05, 0.025]}
    }"#,
    expected: expect! {
        "lambda_gap" => 0.0, 1e-3;
        "residual_vd" => 0.0, 5e-2;
        "profile_osc" => 0.0, 1e-2;
    },
};

/// Fractional diffusion with both a linear drift and a superlinear
/// quadratic-gradient term.
const SUPERLINEAR: CatalogEntry = CatalogEntry {
    id: "superlinear",
    description: "1-d fractional diffusion with linear drift plus a quadratic gradient nonlinearity",
    config_json: r#"{
        "grid": {"d1": 0, "d2": 1, "n": 64},
        "problem": {
            "nonlocal": [{"block": "x2", "discretization": "spectral", "beta": 1.5}],
            "gradient": [{"block": "x2", "b": "scaled:0.5:cos1@0", "k": 1},
                         {"block": "x2", "b": "const:1", "k": 2}],
            "f": "cos1@0",
            "m": 2.0
        },
        "mode": "reproduce",
        "params": {"example_id": "superlinear", "T": 8.0, "tol": 1e-8,
                   "delta_schedule": [0.2, 0.1, 0.05, 0.025]}
    }"#,
    expected: expect! {
        "lambda_gap" => 0.0, 1e-3;
        "residual_vd" => 0.0, 5e-2;
        "profile_osc" => 0.0, 1e-2;
    },
};

/// Degenerate local diffusion composed with a state-scaled jump operator;
/// the two diffusions cover each other's degeneracies.
const COMPOSED: CatalogEntry = CatalogEntry {
    id: "composed",
    description: "degenerate local diffusion plus a state-scaled singular jump operator",
    config_json: r#"{
        "grid": {"d1": 1, "d2": 0, "n": 64},
        "problem": {
            "local": [{"block": "x1", "a": "sum[const:0.5;scaled:-0.5:cos1@0]"}],
            "nonlocal": [{"block": "x1", "discretization": "quadrature", "beta": 1.5,
                          "jump": {"kind": "scaled", "a2": "bump@0"},
                          "normalization": "normalized-multiplier"}],
            "gradient": [{"block": "x1", "b": "const:1", "k": 2}],
            "f": "cos1@0",
            "m": 2.0
        },
        "mode": "reproduce",
        "params": {"example_id": "composed", "T": 8.0, "tol": 1e-8,
                   "delta_schedule": [0.2, 0.1, 0.05, 0.025]}
    }"#,
    expected: expect! {
        "lambda_gap" => 0.0, 1e-3;
        "residual_vd" => 0.0, 5e-2;
        "profile_osc" => 0.0, 1e-2;
    },
};

/// The mixed model problem: local diffusion in x1, fractional diffusion in
/// x2, and a quadratic gradient term on the full gradient.
const TOY_MIXED: CatalogEntry = CatalogEntry {
    id: "toy-mixed",
    description: "mixed local/nonlocal diffusion on the 2-d torus with a quadratic full-gradient term",
    config_json: r#"{
        "grid": {"d1": 1, "d2": 1, "n": 64},
        "problem": {
            "local": [{"block": "x1", "a": "const:1"}],
            "nonlocal": [{"block": "x2", "discretization": "spectral", "beta": 1.5}],
            "gradient": [{"block": "full", "b": "const:1", "k": 2}],
            "f": "sum[cos1@0;cos1@1]",
            "m": 2.0
        },
        "mode": "reproduce",
        "params": {"example_id": "toy-mixed", "T": 8.0, "tol": 1e-8,
                   "delta_schedule": [0.2, 0.1, 0.05, 0.025]}
    }"#,
    expected: expect! {
        "lambda_gap" => 0.0, 1e-3;
        "residual_vd" => 0.0, 5e-2;
        "profile_osc" => 0.0, 1e-2;
    },
};

/// Blockwise linear drifts with sign-changing coefficients on each factor.
const MIXED_GRADIENTS: CatalogEntry = CatalogEntry {
    id: "mixed-gradients",
    description: "mixed diffusions with separate sign-changing linear drifts on each block",
    config_json: r#"{
        "grid": {"d1": 1, "d2": 1, "n": 32},
        "problem": {
            "local": [{"block": "x1", "a": "sum[const:1;scaled:0.5:cos1@0]"}],
            "nonlocal": [{"block": "x2", "discretization": "spectral", "beta": 1.5}],
            "gradient": [{"block": "x1", "b": "cos1@0", "k": 1},
                         {"block": "x2", "b": "cos1@1", "k": 1}],
            "f": "sum[cos1@0;cos1@1]",
            "m": 1.0
        },
        "mode": "reproduce",
        "params": {"example_id": "mixed-gradients", "T": 8.0, "tol": 1e-8,
                   "delta_schedule": [0.2, 0.1, 0.05, 0.025]}
    }"#,
    expected: expect! {
        "lambda_gap" => 0.0, 1e-3;
        "residual_vd" => 0.0, 5e-2;
        "profile_osc" => 0.0, 1e-2;
    },
};

/// Sublinear blockwise drifts together with a superlinear full-gradient term.
const SUB_VS_SUPER: CatalogEntry = CatalogEntry {
    id: "sub-vs-super",
    description: "blockwise linear drifts combined with a quadratic full-gradient nonlinearity",
    config_json: r#"{
        "grid": {"d1": 1, "d2": 1, "n": 32},
        "problem": {
            "local": [{"block": "x1", "a": "const:1"}],
            "nonlocal": [{"block": "x2", "discretization": "spectral", "beta": 1.5}],
            "gradient": [{"block": "x1", "b": "scaled:0.5:cos1@0", "k": 1},
                         {"block": "x2", "b": "scaled:0.5:cos1@1", "k": 1},
                         {"block": "full", "b": "const:1", "k": 2}],
            "f": "sum[cos1@0;cos1@1]",
            "m": 2.0
        },
        "mode": "reproduce",
        "params": {"example_id": "sub-vs-super", "T": 8.0, "tol": 1e-8,
                   "delta_schedule": [0.2, 0.1, 0.05, 0.025]}
    }"#,
    expected: expect! {
        "lambda_gap" => 0.0, 1e-3;
        "residual_vd" => 0.0, 5e-2;
        "profile_osc" => 0.0, 1e-2;
    },
};

pub const CATALOG: [CatalogEntry; 6] = [
    FRACTIONAL_DRIFT,
    SUPERLINEAR,
    COMPOSED,
    TOY_MIXED,
    MIXED_GRADIENTS,
    SUB_VS_SUPER,
];

pub fn find(id: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownExample(id.to_string()))
}
