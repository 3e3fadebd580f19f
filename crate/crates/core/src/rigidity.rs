//! Harmonic variations and rigidity of maps into spheres.
//!
//! A section `V` along `φ` is a harmonic variation when `exp(tV)` stays
//! harmonic for every `t`. On spheres this is decided by three pointwise
//! conditions (Jacobi, trace condition, constant norm); [`harmonic_variation_check`]
//! evaluates both the conditions and the flowed maps so the verdicts can be
//! compared. The fitting routines recover a rotation generator `X ∈ so(n+1)`
//! with `V = X∘φ` and compare `exp(tV)` with the rotation flow.

use crate::catalog;
use crate::error::{Error, Result};
use crate::geometry::{Manifold, Matrix, Point, Vector};
use crate::jacobi::{self, Section};
use crate::maps::{self, SmoothMap};
use crate::tolerances::{
    FIT_CONDITION, FLOW_TENSION, GEODESIC_FIELD, JACOBI, K_CONDITION, NORM_CONSTANCY,
};
use rayon::prelude::*;
use serde::Serialize;

/// An element of `so(dim)`, stored as its strictly lower triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewGenerator {
    dim: usize,
    lower: Vec<f64>,
}

impl SkewGenerator {
    pub fn zero(dim: usize) -> Self {
        SkewGenerator {
            dim,
            lower: vec![0.0; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Skew part `(K - Kᵀ)/2` of a square matrix.
    pub fn from_matrix(k: &Matrix) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::InvalidArgument(format!(
                "generator must be square, got {}x{}",
                k.nrows(),
                k.ncols()
            )));
        }
        let dim = k.nrows();
        let mut lower = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
        for i in 1..dim {
            for j in 0..i {
                lower.push(0.5 * (k[(i, j)] - k[(j, i)]));
            }
        }
        Ok(SkewGenerator { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> Matrix {
        let mut k = Matrix::zeros(self.dim, self.dim);
        let mut idx = 0;
        for i in 1..self.dim {
            for j in 0..i {
                k[(i, j)] = self.lower[idx];
                k[(j, i)] = -self.lower[idx];
                idx += 1;
            }
        }
        k
    }

    /// The induced field `p ↦ X p`.
    pub fn apply(&self, p: &Vector) -> Vector {
        self.matrix() * p
    }

    /// Row-major entries of the full matrix.
    pub fn row_major(&self) -> Vec<f64> {
        let k = self.matrix();
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(k[(i, j)]);
            }
        }
        out
    }

    /// The rotation `exp(tX)`.
    pub fn flow(&self, t: f64) -> Matrix {
        (self.matrix() * t).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationReport {
    pub jacobi_residual: f64,
    pub k_residual: f64,
    pub norm_variation: f64,
    pub projectability_residual: Option<f64>,
    #[serde(rename = "in_J")]
    pub in_j: bool,
    #[serde(rename = "in_K")]
    pub in_k: bool,
    #[serde(rename = "in_H")]
    pub in_h: bool,
}

fn require_sphere_codomain(phi: &SmoothMap) -> Result<()> {
    if phi.codomain().is_sphere() {
        Ok(())
    } else {
        Err(Error::UnsupportedDomain(format!(
            "rigidity checks need a sphere codomain, got {}",
            phi.codomain().label()
        )))
    }
}

/// Max over the grid of `|Σ_i <dφ(e_i), ∇_{e_i} V>|`.
pub fn k_condition_residual(v: &Section, grid: &[(Point, f64)]) -> f64 {
    grid.par_iter()
        .map(|(p, _)| jacobi::trace_dphi_nabla(v, p.chart(), p.ambient()).abs())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// `(max - min) / max` of `|V|` over the grid; zero for the zero section.
pub fn norm_variation(v: &Section, grid: &[(Point, f64)]) -> f64 {
    let (lo, hi) = grid
        .iter()
        .map(|(p, _)| v.eval_ambient(p.ambient()).norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), n| (lo.min(n), hi.max(n)));
    if hi == 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    }
}

/// Max over grid points `x` and sampled fiber points `x'` of `|V(x) - V(x')|`.
pub fn projectability_residual(v: &Section, grid: &[(Point, f64)], fiber_samples: usize) -> Result<f64> {
    let phi = v.map();
    if !phi.has_fiber_sampler() {
        return Err(Error::FiberSamplingUnavailable(phi.name().to_string()));
    }
    let parts: Vec<f64> = grid
        .par_iter()
        .map(|(p, _)| {
            let x = p.ambient();
            let base = v.eval_ambient(x);
            phi.fiber_points(x, fiber_samples)
                .map(|pts| pts.iter().map(|q| (v.eval_ambient(q) - &base).norm()).fold(0.0, f64::max))
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(parts.into_iter().fold(0.0, f64::max))
}

/// Membership of `V` in `J(φ) ⊇ K(φ) ⊇ H(φ)`.
pub fn variation_report(v: &Section, grid: &[(Point, f64)], fiber_samples: usize) -> Result<VariationReport> {
    require_sphere_codomain(v.map())?;
    let jacobi_residual = jacobi::jacobi_sup(v, grid);
    let k_residual = k_condition_residual(v, grid);
    let norm_variation = norm_variation(v, grid);
    let projectability_residual = match projectability_residual(v, grid, fiber_samples) {
        Ok(r) => Some(r),
        Err(Error::FiberSamplingUnavailable(_)) => None,
        Err(e) => return Err(e),
    };
    let in_j = jacobi_residual < JACOBI;
    let in_k = in_j && k_residual < K_CONDITION;
    let in_h = in_k && norm_variation < NORM_CONSTANCY;
    Ok(VariationReport {
        jacobi_residual,
        k_residual,
        norm_variation,
        projectability_residual,
        in_j,
        in_k,
        in_h,
    })
}

/// The map `x ↦ exp_{φ(x)}(t V(x))`.
pub fn flowed_map(v: &Section, t: f64) -> SmoothMap {
    let phi = v.map().clone();
    let n = phi.codomain().clone();
    let v = v.clone();
    SmoothMap::new(
        format!("exp({t} {})", v.name()),
        phi.domain().clone(),
        n.clone(),
        move |x| n.geodesic(&phi.eval_ambient(x), &v.eval_ambient(x), t).0,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTension {
    pub t: f64,
    pub tension: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicVariationCheck {
    pub report: VariationReport,
    pub flow: Vec<FlowTension>,
    pub max_flow_tension: f64,
    pub criteria_pass: bool,
    pub flow_pass: bool,
    pub agree: bool,
}

/// Evaluates the three criteria and, independently, the tension of `exp(tV)`.
pub fn harmonic_variation_check(
    v: &Section,
    grid: &[(Point, f64)],
    t_samples: &[f64],
    fiber_samples: usize,
) -> Result<HarmonicVariationCheck> {
    let report = variation_report(v, grid, fiber_samples)?;
    let flow: Vec<FlowTension> = t_samples
        .iter()
        .map(|t| FlowTension {
            t: *t,
            tension: maps::harmonicity_report(&flowed_map(v, *t), grid),
        })
        .collect();
    let max_flow_tension = flow.iter().map(|f| f.tension).fold(0.0, f64::max);
    let criteria_pass = report.in_h;
    let flow_pass = max_flow_tension < FLOW_TENSION;
    Ok(HarmonicVariationCheck {
        report,
        flow,
        max_flow_tension,
        criteria_pass,
        flow_pass,
        agree: criteria_pass == flow_pass,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewFit {
    pub generator: SkewGenerator,
    pub fit_residual: f64,
    pub condition: f64,
}

/// Least-squares `X ∈ so(n+1)` minimising `Σ |V(x) - X φ(x)|²` over the grid.
pub fn fit_skew_generator(v: &Section, grid: &[(Point, f64)]) -> Result<SkewFit> {
    let phi = v.map();
    require_sphere_codomain(phi)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let dim = phi.codomain().ambient_dim();
    let basis = catalog::so_basis(dim);
    let rows = grid.len() * dim;
    let mut a = Matrix::zeros(rows, basis.len());
    let mut b = Vector::zeros(rows);
    let samples: Vec<(Vector, Vector)> = grid
        .par_iter()
        .map(|(p, _)| (phi.eval_ambient(p.ambient()), v.eval_ambient(p.ambient())))
        .collect();
    for (r, (y, val)) in samples.iter().enumerate() {
        for (c, (_, k)) in basis.iter().enumerate() {
            a.view_mut((r * dim, c), (dim, 1)).copy_from(&(k * y));
        }
        b.rows_mut(r * dim, dim).copy_from(val);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= FIT_CONDITION) {
        return Err(Error::IllConditionedFit { condition });
    }
    let coeffs = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::ConvergenceFailure(e.to_string()))?;
    let mut k = Matrix::zeros(dim, dim);
    for (c, (_, g)) in basis.iter().enumerate() {
        k += g * coeffs[c];
    }
    let resid = &a * &coeffs - &b;
    let fit_residual = (resid.norm_squared() / grid.len() as f64).sqrt();
    Ok(SkewFit {
        generator: SkewGenerator::from_matrix(&k)?,
        fit_residual,
        condition,
    })
}

/// Max of `|∇_X X| = |P(y) X² y|` over the points `ys` of a sphere.
pub fn geodesic_field_residual(n: &Manifold, x: &SkewGenerator, ys: &[Vector]) -> f64 {
    let k = x.matrix();
    let k2 = &k * &k;
    ys.iter()
        .map(|y| n.project_tangent(y, &(&k2 * y)).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalRigidity {
    pub generator: SkewGenerator,
    pub fit_residual: Option<f64>,
    pub flow_mismatch: f64,
    pub geodesic_residual: f64,
}

impl LocalRigidity {
    pub fn passes(&self) -> bool {
        self.flow_mismatch < crate::tolerances::FLOW_MISMATCH && self.geodesic_residual < GEODESIC_FIELD
    }
}

/// Compares `exp(tV)` with the rotation flow `exp(tX)∘φ`.
///
/// Without a `generator`, `X` is fitted from `V`. The `∇_X X` residual is
/// measured on a codomain grid of the given resolution.
pub fn local_rigidity_check(
    v: &Section,
    generator: Option<&SkewGenerator>,
    grid: &[(Point, f64)],
    t_samples: &[f64],
    codomain_resolution: usize,
) -> Result<LocalRigidity> {
    let phi = v.map();
    require_sphere_codomain(phi)?;
    let n = phi.codomain();
    let dim = n.intrinsic_dim();
    if dim.is_multiple_of(2) {
        return Err(Error::NotApplicable(format!(
            "the codomain S^{dim} is even-dimensional, where no Killing field has constant norm"
        )));
    }
    let variation = norm_variation(v, grid);
    if variation >= NORM_CONSTANCY {
        return Err(Error::NotConstantNorm { variation });
    }
    let (x, fit_residual) = match generator {
        Some(g) => {
            if g.dim() != n.ambient_dim() {
                return Err(Error::InvalidArgument(format!(
                    "generator acts on R^{}, codomain lives in R^{}",
                    g.dim(),
                    n.ambient_dim()
                )));
            }
            (g.clone(), None)
        }
        None => {
            let fit = fit_skew_generator(v, grid)?;
            (fit.generator, Some(fit.fit_residual))
        }
    };
    let flows: Vec<(f64, Matrix)> = t_samples.iter().map(|t| (*t, x.flow(*t))).collect();
    let flow_mismatch = grid
        .par_iter()
        .map(|(p, _)| {
            let y = phi.eval_ambient(p.ambient());
            let vx = v.eval_ambient(p.ambient());
            flows
                .iter()
                .map(|(t, g)| (n.geodesic(&y, &vx, *t).0 - g * &y).norm())
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let ys: Vec<Vector> = n
        .quadrature_grid(codomain_resolution)?
        .into_iter()
        .map(|(p, _)| p.ambient().clone())
        .collect();
    let geodesic_residual = geodesic_field_residual(n, &x, &ys);
    Ok(LocalRigidity {
        generator: x,
        fit_residual,
        flow_mismatch,
        geodesic_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_generator_round_trips() {
        let k = catalog::plane_generator(4, 0, 2) * 0.5 + catalog::plane_generator(4, 1, 3);
        let g = SkewGenerator::from_matrix(&k).unwrap();
        assert_eq!(g.matrix(), k);
        assert_eq!(g.row_major().len(), 16);
        let m = g.matrix();
        assert_eq!(m.transpose(), -m);
    }

    #[test]
    fn flow_is_a_rotation() {
        let g = SkewGenerator::from_matrix(&catalog::plane_generator(3, 0, 1)).unwrap();
        let r = g.flow(0.4);
        assert!((r.transpose() * &r - Matrix::identity(3, 3)).amax() < 1e-14);
        assert!((r[(1, 0)] - 0.4f64.sin()).abs() < 1e-14);
    }
}
