//! Monotone discretizations of the local and first-order terms, assembly of
//! the full spatial operator, and the CFL bound for explicit stepping.
//!
//! Orientation: every term is returned so that the semi-discrete evolution is
//! du/dt = -apply_spatial_operator(u). Diffusive terms come back in the -Lap
//! (positive) form, gradient terms are Godunov/Rouy-Tourin upwinded, and the
//! source f is subtracted.

use crate::error::{Error, Result};
use crate::levy::{
    apply_quadrature_with_table, central_gradient, Discretization, NonlocalOperatorSpec,
    QuadratureTable, SpectralPlan,
};
use crate::torus::{discrete_lipschitz, Block, GridField, TorusGrid};
use std::f64::consts::PI;

/// Constant or node-wise coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Const(f64),
    Field(GridField),
}

impl Coefficient {
    pub fn at(&self, idx: usize) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Field(f) => f.values()[idx],
        }
    }

    pub fn max_abs(&self, len: usize) -> f64 {
        match self {
            Coefficient::Const(c) => c.abs(),
            Coefficient::Field(f) => {
                debug_assert_eq!(f.len(), len);
                f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }
    }

    pub fn min(&self, len: usize) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Field(f) => {
                debug_assert_eq!(f.len(), len);
                f.values().iter().fold(f64::INFINITY, |m, &v| m.min(v))
            }
        }
    }
}

/// a(x) * (-Lap_block), a >= 0 nodewise.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTermSpec {
    pub block: Block,
    pub a: Coefficient,
}

/// b(x) |D_block u|^k with sign-changing b split into upwind mirror stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTermSpec {
    pub block: Block,
    pub b: Coefficient,
    pub k: f64,
}

/// The full right-hand structure of the evolution: local + nonlocal +
/// gradient terms minus the source f. `hamiltonian_exponent` names the
/// exponent of the designated H-term for the assumption audits.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub grid: TorusGrid,
    pub local_terms: Vec<LocalTermSpec>,
    pub nonlocal_terms: Vec<NonlocalOperatorSpec>,
    pub gradient_terms: Vec<GradientTermSpec>,
    pub f: GridField,
    pub hamiltonian_exponent: f64,
}

/// Minimal nodewise ellipticity coverage required of a problem.
pub const ELLIPTICITY_FLOOR: f64 = 1e-6;

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        for t in &self.local_terms {
            if self.grid.block_axes(t.block).is_empty() {
                return Err(Error::EmptyBlock(t.block.name().into()));
            }
            if let Coefficient::Field(f) = &t.a {
                if f.grid() != self.grid {
                    return Err(Error::GridMismatch);
                }
            }
            if t.a.min(self.grid.len()) < 0.0 {
                return Err(Error::Precondition("local coefficient a < 0".into()));
            }
        }
        for t in &self.gradient_terms {
            if self.grid.block_axes(t.block).is_empty() {
                return Err(Error::EmptyBlock(t.block.name().into()));
            }
            if t.k < 0.0 {
                return Err(Error::NegativeExponent(t.k));
            }
            if let Coefficient::Field(f) = &t.b {
                if f.grid() != self.grid {
                    return Err(Error::GridMismatch);
                }
            }
        }
        for t in &self.nonlocal_terms {
            if self.grid.block_axes(t.block).is_empty() {
                return Err(Error::EmptyBlock(t.block.name().into()));
            }
            if t.discretization == Discretization::Spectral && !t.jump.is_identity() {
                return Err(Error::SpectralNeedsIdentityJump);
            }
        }
        if self.local_terms.is_empty() && self.nonlocal_terms.is_empty() {
            return Err(Error::Precondition("no diffusive term present".into()));
        }
        // ellipticity coverage: at every node, local coefficients plus
        // the nonlocal term strengths must stay above a positive floor
        for idx in 0..self.grid.len() {
            let mut coverage = 0.0;
            for t in &self.local_terms {
                coverage += t.a.at(idx);
            }
            for t in &self.nonlocal_terms {
                coverage += match &t.jump {
                    crate::levy::JumpFunctionSpec::Identity => 1.0,
                    crate::levy::JumpFunctionSpec::Scaled { scale_field } => {
                        scale_field.values()[idx]
                    }
                };
            }
            if coverage < ELLIPTICITY_FLOOR {
                return Err(Error::Precondition(format!(
                    "ellipticity coverage {coverage} below floor at node {idx}"
                )));
            }
        }
        Ok(())
    }
}

/// a(x) * sum over block axes of (2u(i) - u(i-1) - u(i+1)) / h^2.
pub fn local_laplacian(u: &GridField, term: &LocalTermSpec) -> Result<GridField> {
    let grid = u.grid();
    let axes = grid.block_axes(term.block);
    if axes.is_empty() {
        return Err(Error::EmptyBlock(term.block.name().into()));
    }
    let h2 = grid.h() * grid.h();
    let mut out = GridField::zeros(grid);
    for idx in 0..grid.len() {
        let mut s = 0.0;
        for &axis in &axes {
            s += 2.0 * u.values()[idx]
                - u.values()[grid.shift(idx, axis, -1)]
                - u.values()[grid.shift(idx, axis, 1)];
        }
        out.values_mut()[idx] = term.a.at(idx) * s / h2;
    }
    Ok(out)
}

/// Rouy-Tourin upwind magnitude for terms entering with a + sign:
/// sqrt(sum over block axes of max(D-u, -D+u, 0)^2).
pub fn upwind_grad_plus(u: &GridField, block: Block) -> GridField {
    upwind_grad(u, block, true)
}

/// Mirror stencil max(D+u, -D-u, 0) for sign-flipped coefficients.
pub fn upwind_grad_minus(u: &GridField, block: Block) -> GridField {
    upwind_grad(u, block, false)
}

fn upwind_grad(u: &GridField, block: Block, plus: bool) -> GridField {
    let grid = u.grid();
    let axes = grid.block_axes(block);
    let h = grid.h();
    let mut out = GridField::zeros(grid);
    for idx in 0..grid.len() {
        let mut s = 0.0;
        for &axis in &axes {
            let fwd = (u.values()[grid.shift(idx, axis, 1)] - u.values()[idx]) / h;
            let bwd = (u.values()[idx] - u.values()[grid.shift(idx, axis, -1)]) / h;
            let g = if plus {
                bwd.max(-fwd).max(0.0)
            } else {
                fwd.max(-bwd).max(0.0)
            };
            s += g * g;
        }
        out.values_mut()[idx] = s.sqrt();
    }
    out
}

/// b+(x) (upwind_grad_plus)^k - b-(x) (upwind_grad_minus)^k.
pub fn gradient_term(u: &GridField, term: &GradientTermSpec) -> Result<GridField> {
    if term.k < 0.0 {
        return Err(Error::NegativeExponent(term.k));
    }
    let grid = u.grid();
    let gp = upwind_grad_plus(u, term.block);
    let gm = upwind_grad_minus(u, term.block);
    let mut out = GridField::zeros(grid);
    for idx in 0..grid.len() {
        let b = term.b.at(idx);
        let (bp, bm) = (b.max(0.0), (-b).max(0.0));
        out.values_mut()[idx] =
            bp * gp.values()[idx].powf(term.k) - bm * gm.values()[idx].powf(term.k);
    }
    Ok(out)
}

enum CompiledNonlocal {
    Spectral(SpectralPlan),
    Quadrature {
        spec: NonlocalOperatorSpec,
        table: QuadratureTable,
        alpha_max: f64,
    },
}

/// Spatial operator compiled from a [`ProblemSpec`]: FFT plans and quadrature
/// tables are built once and reused across steps.
pub struct SpatialOperator {
    problem: ProblemSpec,
    nonlocal: Vec<CompiledNonlocal>,
    needs_grad: bool,
}

impl SpatialOperator {
    pub fn new(problem: ProblemSpec) -> Result<Self> {
        problem.validate()?;
        let mut nonlocal = Vec::new();
        let mut needs_grad = false;
        for spec in &problem.nonlocal_terms {
            match spec.discretization {
                Discretization::Spectral => {
                    nonlocal.push(CompiledNonlocal::Spectral(SpectralPlan::new(
                        problem.grid,
                        spec.measure.beta,
                        spec.block,
                    )?));
                }
                Discretization::Quadrature => {
                    if spec.inner_cut <= 0.0 || spec.inner_cut > problem.grid.h() {
                        return Err(Error::InnerCutTooLarge {
                            delta_cut: spec.inner_cut,
                            h: problem.grid.h(),
                        });
                    }
                    let table = QuadratureTable::build(
                        spec.measure.beta,
                        spec.inner_cut,
                        spec.truncation_radius,
                        spec.normalization,
                    )?;
                    let alpha_max = match &spec.jump {
                        crate::levy::JumpFunctionSpec::Identity => 1.0,
                        crate::levy::JumpFunctionSpec::Scaled { scale_field } => scale_field
                            .values()
                            .iter()
                            .fold(0.0f64, |m, &v| m.max(v.powf(1.0 / spec.measure.beta))),
                    };
                    needs_grad = true;
                    nonlocal.push(CompiledNonlocal::Quadrature {
                        spec: spec.clone(),
                        table,
                        alpha_max,
                    });
                }
            }
        }
        Ok(SpatialOperator {
            problem,
            nonlocal,
            needs_grad,
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn grid(&self) -> TorusGrid {
        self.problem.grid
    }

    /// Sum of all terms minus f; du/dt = -apply(u).
    pub fn apply(&self, u: &GridField) -> Result<GridField> {
        let grid = self.problem.grid;
        if u.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let mut out = GridField::zeros(grid);
        for term in &self.problem.local_terms {
            out.axpy(1.0, &local_laplacian(u, term)?);
        }
        let grads: Vec<GridField> = if self.needs_grad {
            (0..grid.dim()).map(|a| central_gradient(u, a)).collect()
        } else {
            Vec::new()
        };
        for nl in &self.nonlocal {
            match nl {
                CompiledNonlocal::Spectral(plan) => out.axpy(1.0, &plan.apply(u)?),
                CompiledNonlocal::Quadrature { spec, table, .. } => {
                    out.axpy(1.0, &apply_quadrature_with_table(u, spec, table, &grads)?)
                }
            }
        }
        for term in &self.problem.gradient_terms {
            out.axpy(1.0, &gradient_term(u, term)?);
        }
        out.axpy(-1.0, &self.problem.f);
        Ok(out)
    }

    /// Sum of the explicit stability rates at gradient bound `lip`.
    pub fn rate_sum(&self, lip: f64) -> f64 {
        let grid = self.problem.grid;
        let h = grid.h();
        let len = grid.len();
        let mut rate = 0.0;
        for t in &self.problem.local_terms {
            let d_b = grid.block_axes(t.block).len() as f64;
            rate += 2.0 * d_b * t.a.max_abs(len) / (h * h);
        }
        for (nl, spec) in self.nonlocal.iter().zip(&self.problem.nonlocal_terms) {
            match nl {
                CompiledNonlocal::Spectral(_) => {
                    // worst multiplier on this grid
                    rate += (2.0 * PI * grid.n() as f64 / 2.0).powf(spec.measure.beta);
                }
                CompiledNonlocal::Quadrature { table, alpha_max, .. } => {
                    rate += table.rate_bound(*alpha_max, h);
                }
            }
        }
        for t in &self.problem.gradient_terms {
            let d_b = grid.block_axes(t.block).len() as f64;
            let g = if t.k >= 1.0 {
                lip.powf(t.k - 1.0)
            } else if t.k > 0.0 {
                // |p|^k has an unbounded derivative at 0; clamp at one cell
                lip.max(h).powf(t.k - 1.0)
            } else {
                0.0
            };
            rate += t.k * t.b.max_abs(len) * g * 2.0 * d_b / h;
        }
        rate
    }

    /// dt = safety / rate_sum, with the gradient rates evaluated at the
    /// current discrete Lipschitz bound of `u`.
    pub fn cfl_timestep(&self, u: &GridField, safety: f64) -> Result<f64> {
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::Precondition(format!("safety {safety} not in (0,1]")));
        }
        let rate = self.rate_sum(discrete_lipschitz(u));
        if rate <= 0.0 {
            return Err(Error::DegenerateRate);
        }
        Ok(safety / rate)
    }
}

/// Convenience one-shot form of the compiled operator.
pub fn apply_spatial_operator(u: &GridField, problem: &ProblemSpec) -> Result<GridField> {
    SpatialOperator::new(problem.clone())?.apply(u)
}

pub fn cfl_timestep(problem: &ProblemSpec, u: &GridField, safety: f64) -> Result<f64> {
    SpatialOperator::new(problem.clone())?.cfl_timestep(u, safety)
}
