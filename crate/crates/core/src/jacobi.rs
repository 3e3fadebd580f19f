//! Sections along maps, the pullback connection and the Jacobi operator.
//!
//! Everything is computed in ambient coordinates: for a section `V` along
//! `φ: M → N`, `∇^φ_X V = P_N(φ(x)) D_X V`, where `D_X V` is the ordinary
//! derivative of the ambient vector `V` along a curve with velocity `X`.

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{Manifold, Matrix, Point, TangentVector, Vector};
use crate::maps::{self, SmoothMap};
use crate::tolerances::{COMPOSITION, HARMONIC, NEAR_CRITICAL_DILATION, POLE_MARGIN, RICHARDSON_STEP};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type FieldFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type FieldDerivFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

/// A tangent vector field on a manifold, in ambient coordinates.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    manifold: Manifold,
    eval: FieldFn,
    deriv: Option<FieldDerivFn>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .finish()
    }
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        manifold: Manifold,
        eval: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            name: name.into(),
            manifold,
            eval: Arc::new(eval),
            deriv: None,
        }
    }

    /// Ambient derivative `D_w X` of an extension of the field.
    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    /// The linear field `y ↦ K y` of a skew matrix `K`.
    pub fn linear(name: impl Into<String>, manifold: Manifold, k: Matrix) -> Self {
        let k2 = k.clone();
        VectorField::new(name, manifold, move |y| &k * y).with_derivative(move |_, w| &k2 * w)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn eval_ambient(&self, y: &Vector) -> Vector {
        (self.eval)(y)
    }

    pub fn derivative_ambient(&self, y: &Vector, w: &Vector) -> Vector {
        match &self.deriv {
            Some(d) => d(y, w),
            None => fd_along(&self.manifold, y, w, |c| (self.eval)(c)),
        }
    }
}

/// Richardson derivative of `f` along the geodesic through `x` with velocity `v`.
fn fd_along(m: &Manifold, x: &Vector, v: &Vector, f: impl Fn(&Vector) -> Vector) -> Vector {
    let speed = v.norm();
    if speed == 0.0 {
        return f(x) * 0.0;
    }
    let dir = v / speed;
    let h = RICHARDSON_STEP * m.feature_scale();
    fd::richardson(|t| f(&m.geodesic(x, &dir, t).0), h) * speed
}

/// A section `V ∈ Γ(φ⁻¹TN)`: `V(x) ∈ T_{φ(x)}N` for every domain point `x`.
#[derive(Clone)]
pub struct Section {
    name: String,
    map: SmoothMap,
    eval: FieldFn,
    deriv: Option<FieldDerivFn>,
    field: Option<VectorField>,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section")
            .field("name", &self.name)
            .field("map", &self.map.name())
            .field("projectable", &self.field.is_some())
            .finish()
    }
}

impl Section {
    pub fn new(
        name: impl Into<String>,
        map: SmoothMap,
        eval: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Section {
            name: name.into(),
            map,
            eval: Arc::new(eval),
            deriv: None,
            field: None,
        }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    /// Drops the analytic derivative so every derivative goes through finite differences.
    pub fn without_derivative(mut self) -> Self {
        self.deriv = None;
        self
    }

    /// `X ∘ φ` for a vector field `X` on the codomain of `φ`.
    pub fn from_field(field: &VectorField, map: &SmoothMap) -> Result<Section> {
        if field.manifold() != map.codomain() {
            return Err(Error::DomainMismatch(format!(
                "field `{}` lives on {} but `{}` maps into {}",
                field.name(),
                field.manifold().label(),
                map.name(),
                map.codomain().label()
            )));
        }
        let (f, m) = (field.clone(), map.clone());
        let mut s = Section::new(
            format!("{} o {}", field.name(), map.name()),
            map.clone(),
            move |x| f.eval_ambient(&m.eval_ambient(x)),
        );
        if field.deriv.is_some() && map.has_analytic_differential() {
            let (f, m) = (field.clone(), map.clone());
            s = s.with_derivative(move |x, v| {
                f.derivative_ambient(&m.eval_ambient(x), &m.differential_ambient(x, v))
            });
        }
        s.field = Some(field.clone());
        Ok(s)
    }

    pub fn zero(map: &SmoothMap) -> Section {
        let k = map.codomain().ambient_dim();
        let field = VectorField::new("zero", map.codomain().clone(), move |_| Vector::zeros(k))
            .with_derivative(move |_, _| Vector::zeros(k));
        Section::from_field(&field, map).expect("zero field matches its own codomain")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    /// The codomain field when the section was built as `X ∘ φ`.
    pub fn field(&self) -> Option<&VectorField> {
        self.field.as_ref()
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn eval_ambient(&self, x: &Vector) -> Vector {
        (self.eval)(x)
    }

    pub fn eval_at(&self, p: &Point) -> Result<TangentVector> {
        let q = self.map.eval(p)?;
        Ok(self.map.codomain().tangent_from_ambient(&q, &self.eval_ambient(p.ambient())))
    }

    /// Ambient derivative `D_v V` at ambient `x` (not projected).
    pub fn derivative_ambient(&self, x: &Vector, v: &Vector) -> Vector {
        match &self.deriv {
            Some(d) => d(x, v),
            None => self.derivative_fd_ambient(x, v),
        }
    }

    pub fn derivative_fd_ambient(&self, x: &Vector, v: &Vector) -> Vector {
        fd_along(self.map.domain(), x, v, |c| (self.eval)(c))
    }

    /// `V ∘ φ`, a section along `self.map() ∘ φ`.
    pub fn pullback(&self, phi: &SmoothMap) -> Result<Section> {
        let composed = maps::compose(phi, &self.map)?;
        let (ev, p) = (self.eval.clone(), phi.clone());
        let mut s = Section::new(format!("{} o {}", self.name, phi.name()), composed, move |x| {
            ev(&p.eval_ambient(x))
        });
        if let (Some(d), true) = (self.deriv.clone(), phi.has_analytic_differential()) {
            let p = phi.clone();
            s = s.with_derivative(move |x, v| d(&p.eval_ambient(x), &p.differential_ambient(x, v)));
        }
        s.field = self.field.clone();
        Ok(s)
    }

    /// `Σ c_i V_i` for sections along the same map.
    pub fn combination(name: impl Into<String>, parts: &[Section], coeffs: &[f64]) -> Result<Section> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?;
        if parts.len() != coeffs.len() {
            return Err(Error::InvalidArgument("coefficient count mismatch".into()));
        }
        let evals: Vec<(FieldFn, f64)> = parts.iter().map(|s| s.eval.clone()).zip(coeffs.iter().cloned()).collect();
        let k = first.map.codomain().ambient_dim();
        let mut s = Section::new(name, first.map.clone(), move |x| {
            let mut acc = Vector::zeros(k);
            for (e, c) in &evals {
                acc += e(x) * *c;
            }
            acc
        });
        if parts.iter().all(|p| p.deriv.is_some()) {
            let derivs: Vec<(FieldDerivFn, f64)> = parts
                .iter()
                .map(|s| s.deriv.clone().expect("checked above"))
                .zip(coeffs.iter().cloned())
                .collect();
            s = s.with_derivative(move |x, v| {
                let mut acc = Vector::zeros(k);
                for (d, c) in &derivs {
                    acc += d(x, v) * *c;
                }
                acc
            });
        }
        Ok(s)
    }
}

fn check_interior(m: &Manifold, p: &Point) -> Result<()> {
    let margin = m.chart_margin(p.chart(), p.coords());
    if margin < POLE_MARGIN {
        return Err(Error::ChartSingularity {
            chart: p.chart(),
            margin,
        });
    }
    Ok(())
}

/// `∇^φ_X V` at ambient `x`.
pub fn pullback_derivative_ambient(v: &Section, x: &Vector, dir: &Vector) -> Vector {
    let y = v.map.eval_ambient(x);
    v.map.codomain().project_tangent(&y, &v.derivative_ambient(x, dir))
}

pub fn pullback_derivative_at(v: &Section, p: &Point, x: &TangentVector) -> Result<TangentVector> {
    check_interior(v.map.domain(), p)?;
    let q = v.map.eval(p)?;
    let w = pullback_derivative_ambient(v, p.ambient(), x.ambient());
    Ok(v.map.codomain().tangent_from_ambient(&q, &w))
}

/// `∇^φ_X V` through finite differences of `V`, ignoring any analytic derivative.
pub fn pullback_derivative_fd_at(v: &Section, p: &Point, x: &TangentVector) -> Result<TangentVector> {
    check_interior(v.map.domain(), p)?;
    let q = v.map.eval(p)?;
    let y = q.ambient();
    let d = v.derivative_fd_ambient(p.ambient(), x.ambient());
    Ok(v.map.codomain().tangent_from_ambient(&q, &v.map.codomain().project_tangent(y, &d)))
}

/// `∇^φ_X V = ∂_X V^γ + Γ^γ_{αβ} (dφX)^α V^β` in the chart of `φ(p)`.
pub fn pullback_derivative_chart_at(
    v: &Section,
    p: &Point,
    x: &TangentVector,
) -> Result<TangentVector> {
    check_interior(v.map.domain(), p)?;
    let n = v.map.codomain();
    let q = v.map.eval(p)?;
    check_interior(n, &q)?;
    let chart = q.chart();
    let components = |y: &Vector, w: &Vector| -> Vector {
        let u = n.chart_coords(chart, y);
        let e = n.chart_jacobian(chart, &u);
        let gram = e.transpose() * &e;
        gram.cholesky()
            .map(|c| c.solve(&(e.transpose() * w)))
            .unwrap_or_else(|| Vector::zeros(n.intrinsic_dim()))
    };
    let dom = v.map.domain();
    let dvc = fd_along(dom, p.ambient(), x.ambient(), |c| {
        components(&v.map.eval_ambient(c), &v.eval_ambient(c))
    });
    let vc = components(q.ambient(), &v.eval_ambient(p.ambient()));
    let dphi = v.map.differential_ambient(p.ambient(), x.ambient());
    let xc = components(q.ambient(), &dphi);
    let gamma = n.christoffel_in_chart(chart, q.coords());
    let dim = n.intrinsic_dim();
    let mut out = dvc;
    for g in 0..dim {
        for a in 0..dim {
            for b in 0..dim {
                out[g] += gamma.get(g, a, b) * xc[a] * vc[b];
            }
        }
    }
    Ok(n.tangent_from_components(&q, out))
}

/// `∇²_{X,Y} V` at ambient `x`: `Y` is extended by parallel transport along the
/// geodesic in direction `X`, which removes the `∇_{∇_X Y}` term.
pub fn second_cov_derivative_ambient(v: &Section, x: &Vector, dx: &Vector, dy: &Vector) -> Vector {
    let speed = dx.norm();
    let n = v.map.codomain();
    if speed == 0.0 {
        return Vector::zeros(n.ambient_dim());
    }
    let dom = v.map.domain();
    let dir = dx / speed;
    let h = RICHARDSON_STEP * dom.feature_scale();
    let du = fd::richardson(
        |t| {
            let c = dom.geodesic(x, &dir, t).0;
            let yt = dom.transport_along_geodesic(x, &dir, dy, t);
            pullback_derivative_ambient(v, &c, &yt)
        },
        h,
    );
    let y = v.map.eval_ambient(x);
    n.project_tangent(&y, &du) * speed
}

pub fn second_cov_derivative_at(
    v: &Section,
    p: &Point,
    x: &TangentVector,
    y: &TangentVector,
) -> Result<TangentVector> {
    check_interior(v.map.domain(), p)?;
    let q = v.map.eval(p)?;
    let w = second_cov_derivative_ambient(v, p.ambient(), x.ambient(), y.ambient());
    Ok(v.map.codomain().tangent_from_ambient(&q, &w))
}

/// `Δ^φ V = -Σ ∇²_{e_i,e_i} V` over the frame of `chart`.
pub fn rough_laplacian_ambient(v: &Section, chart: usize, x: &Vector) -> Vector {
    let mut acc = Vector::zeros(v.map.codomain().ambient_dim());
    for e in v.map.domain().orthonormal_frame_in_chart(chart, x) {
        acc -= second_cov_derivative_ambient(v, x, &e, &e);
    }
    acc
}

pub fn rough_laplacian_at(v: &Section, p: &Point) -> Result<TangentVector> {
    check_interior(v.map.domain(), p)?;
    let q = v.map.eval(p)?;
    let w = rough_laplacian_ambient(v, p.chart(), p.ambient());
    Ok(v.map.codomain().tangent_from_ambient(&q, &w))
}

/// `Σ R^N(dφ e_i, V) dφ e_i`.
pub fn curvature_term_ambient(v: &Section, chart: usize, x: &Vector) -> Vector {
    let n = v.map.codomain();
    let y = v.map.eval_ambient(x);
    let val = v.eval_ambient(x);
    let d = v.map.differential_columns(chart, x);
    let mut acc = Vector::zeros(n.ambient_dim());
    for i in 0..d.ncols() {
        let col = d.column(i).into_owned();
        acc += n.curvature_ambient(&y, &col, &val, &col);
    }
    acc
}

pub fn curvature_term_at(v: &Section, p: &Point) -> Result<TangentVector> {
    check_interior(v.map.domain(), p)?;
    let q = v.map.eval(p)?;
    let w = curvature_term_ambient(v, p.chart(), p.ambient());
    Ok(v.map.codomain().tangent_from_ambient(&q, &w))
}

/// `J^φ V = Δ^φ V - Σ R^N(dφ e_i, V) dφ e_i` at ambient `x`.
pub fn jacobi_ambient(v: &Section, chart: usize, x: &Vector) -> Vector {
    rough_laplacian_ambient(v, chart, x) - curvature_term_ambient(v, chart, x)
}

/// The Jacobi operator at a point, with a flag when the base map is not harmonic there.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiValue {
    pub value: TangentVector,
    pub tension_norm: f64,
    pub not_harmonic: bool,
}

pub fn jacobi_apply_at(v: &Section, p: &Point) -> Result<JacobiValue> {
    check_interior(v.map.domain(), p)?;
    let q = v.map.eval(p)?;
    let w = jacobi_ambient(v, p.chart(), p.ambient());
    let tension_norm = maps::tension_ambient(&v.map, p.chart(), p.ambient()).norm();
    Ok(JacobiValue {
        value: v.map.codomain().tangent_from_ambient(&q, &w),
        tension_norm,
        not_harmonic: tension_norm > HARMONIC,
    })
}

/// `J^φ V_s` for several sections along the same map, sharing the geodesics,
/// transported frames and curvature data between them.
pub fn jacobi_ambient_many(sections: &[Section], chart: usize, x: &Vector) -> Vec<Vector> {
    let Some(first) = sections.first() else {
        return Vec::new();
    };
    let map = &first.map;
    let (dom, n) = (map.domain(), map.codomain());
    let y = map.eval_ambient(x);
    let h = RICHARDSON_STEP * dom.feature_scale();
    let frame = dom.orthonormal_frame_in_chart(chart, x);
    let mut out: Vec<Vector> = sections.iter().map(|_| Vector::zeros(n.ambient_dim())).collect();
    let offsets = [h, -h, 0.5 * h, -0.5 * h];
    for e in &frame {
        // U_s(t) = ∇^φ_{Y(t)} V_s at c(t), with c a geodesic and Y parallel along it
        let mut samples: Vec<Vec<Vector>> = vec![Vec::with_capacity(4); sections.len()];
        for t in offsets {
            let c = dom.geodesic(x, e, t).0;
            let yt = dom.transport_along_geodesic(x, e, e, t);
            let img = map.eval_ambient(&c);
            for (s, v) in sections.iter().enumerate() {
                samples[s].push(n.project_tangent(&img, &v.derivative_ambient(&c, &yt)));
            }
        }
        for (s, u) in samples.iter().enumerate() {
            let coarse = (&u[0] - &u[1]) / (2.0 * h);
            let fine = (&u[2] - &u[3]) / h;
            out[s] -= n.project_tangent(&y, &((fine * 4.0 - coarse) / 3.0));
        }
    }
    let cols: Vec<Vector> = frame.iter().map(|e| map.differential_ambient(x, e)).collect();
    for (s, v) in sections.iter().enumerate() {
        let val = v.eval_ambient(x);
        for col in &cols {
            out[s] -= n.curvature_ambient(&y, col, &val, col);
        }
    }
    out
}

/// Largest `|J^φ V_s|` over a grid, for each section.
pub fn jacobi_sup_many(sections: &[Section], grid: &[(Point, f64)]) -> Vec<f64> {
    let per_point: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|(p, _)| {
            jacobi_ambient_many(sections, p.chart(), p.ambient())
                .iter()
                .map(|v| v.norm())
                .collect()
        })
        .collect();
    let mut out = vec![0.0f64; sections.len()];
    for row in per_point {
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(v);
        }
    }
    out
}

/// Largest `|J^φ V|` over a grid.
pub fn jacobi_sup(v: &Section, grid: &[(Point, f64)]) -> f64 {
    grid.par_iter()
        .map(|(p, _)| jacobi_ambient(v, p.chart(), p.ambient()).norm())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Both sides of `J^{ψ∘φ}(V∘φ) = λ² J^ψ(V)∘φ` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionResidual {
    pub residual: f64,
    pub lhs_norm: f64,
    pub rhs_norm: f64,
    pub dilation: f64,
    pub tolerance: f64,
}

impl CompositionResidual {
    pub fn passes(&self) -> bool {
        self.residual < self.tolerance
    }
}

fn check_section_of(v: &Section, psi: &SmoothMap) -> Result<()> {
    if v.map.domain() != psi.domain() || v.map.codomain() != psi.codomain() {
        return Err(Error::DomainMismatch(format!(
            "section `{}` is not along `{}`",
            v.name,
            psi.name()
        )));
    }
    Ok(())
}

/// Composition residual with a precomputed pullback `W = V∘φ`.
pub fn composition_residual_with(
    phi: &SmoothMap,
    v: &Section,
    w: &Section,
    p: &Point,
) -> Result<CompositionResidual> {
    check_interior(phi.domain(), p)?;
    let lhs = jacobi_ambient(w, p.chart(), p.ambient());
    let q = phi.eval(p)?;
    let rhs_inner = jacobi_ambient(v, q.chart(), q.ambient());
    let conf = maps::conformality(phi, p.chart(), p.ambient());
    let lambda = conf.dilation;
    let rhs = &rhs_inner * (lambda * lambda);
    let tolerance = if lambda < NEAR_CRITICAL_DILATION {
        COMPOSITION * (1.0 + rhs_inner.norm())
    } else {
        COMPOSITION
    };
    Ok(CompositionResidual {
        residual: (&lhs - &rhs).norm(),
        lhs_norm: lhs.norm(),
        rhs_norm: rhs.norm(),
        dilation: lambda,
        tolerance,
    })
}

pub fn composition_residual_at(
    phi: &SmoothMap,
    psi: &SmoothMap,
    v: &Section,
    p: &Point,
) -> Result<CompositionResidual> {
    check_section_of(v, psi)?;
    let w = v.pullback(phi)?;
    composition_residual_with(phi, v, &w, p)
}

/// Grid-wide composition residuals, in grid order.
pub fn composition_residuals(
    phi: &SmoothMap,
    psi: &SmoothMap,
    v: &Section,
    grid: &[(Point, f64)],
) -> Result<Vec<CompositionResidual>> {
    check_section_of(v, psi)?;
    let w = v.pullback(phi)?;
    grid.par_iter()
        .map(|(p, _)| composition_residual_with(phi, v, &w, p))
        .collect()
}

/// `E(φ) = ½ ∫ |dφ|²`.
pub fn energy(phi: &SmoothMap, grid: &[(Point, f64)]) -> f64 {
    let parts: Vec<f64> = grid
        .par_iter()
        .map(|(p, w)| 0.5 * w * phi.differential_columns(p.chart(), p.ambient()).norm_squared())
        .collect();
    parts.into_iter().sum()
}

/// `H_φ(V, W) = ∫ <J^φ V, W>`.
pub fn hessian_form(v: &Section, w: &Section, grid: &[(Point, f64)]) -> Result<f64> {
    if v.map.domain() != w.map.domain() || v.map.codomain() != w.map.codomain() {
        return Err(Error::DomainMismatch(format!(
            "sections `{}` and `{}` are along different maps",
            v.name, w.name
        )));
    }
    let parts: Vec<f64> = grid
        .par_iter()
        .map(|(p, wt)| wt * jacobi_ambient(v, p.chart(), p.ambient()).dot(&w.eval_ambient(p.ambient())))
        .collect();
    Ok(parts.into_iter().sum())
}

/// `∫ λ² α |W|²` with `W = V∘φ`.
pub fn scaled_norm_integral(phi: &SmoothMap, w: &Section, alpha: f64, grid: &[(Point, f64)]) -> f64 {
    let parts: Vec<f64> = grid
        .par_iter()
        .map(|(p, wt)| {
            let l = maps::conformality(phi, p.chart(), p.ambient()).dilation;
            wt * l * l * alpha * w.eval_ambient(p.ambient()).norm_squared()
        })
        .collect();
    parts.into_iter().sum()
}

/// `Σ_i <dφ(e_i), ∇^φ_{e_i} V>` at ambient `x`.
pub fn trace_dphi_nabla(v: &Section, chart: usize, x: &Vector) -> f64 {
    let frame = v.map.domain().orthonormal_frame_in_chart(chart, x);
    frame
        .iter()
        .map(|e| {
            v.map
                .differential_ambient(x, e)
                .dot(&pullback_derivative_ambient(v, x, e))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat_identity() -> SmoothMap {
        let r2 = Manifold::euclidean(2);
        SmoothMap::new("id", r2.clone(), r2, |x| x.clone())
            .with_jacobian(|_| Matrix::identity(2, 2))
    }

    #[test]
    fn flat_second_derivative_is_hessian() {
        let phi = flat_identity();
        // V = (x², xy)
        let v = Section::new("quad", phi.clone(), |x| Vector::from_vec(vec![x[0] * x[0], x[0] * x[1]]));
        let x = Vector::from_vec(vec![0.7, -0.2]);
        let a = Vector::from_vec(vec![1.0, 2.0]);
        let b = Vector::from_vec(vec![-0.5, 1.5]);
        let got = second_cov_derivative_ambient(&v, &x, &a, &b);
        // D²V[a,b] = (2 a0 b0, a0 b1 + a1 b0)
        let want = Vector::from_vec(vec![2.0 * a[0] * b[0], a[0] * b[1] + a[1] * b[0]]);
        assert!((got - want).amax() < 1e-8);
    }

    #[test]
    fn constant_section_has_zero_derivative() {
        let phi = flat_identity();
        let v = Section::new("const", phi, |_| Vector::from_vec(vec![1.0, -3.0]));
        let x = Vector::from_vec(vec![0.1, 0.2]);
        let d = pullback_derivative_ambient(&v, &x, &Vector::from_vec(vec![0.3, 0.4]));
        assert!(d.amax() < 1e-12);
    }

    #[test]
    fn field_domain_mismatch() {
        let phi = flat_identity();
        let f = VectorField::new("f", Manifold::unit_sphere(2), |y| y.clone());
        assert!(matches!(Section::from_field(&f, &phi), Err(Error::DomainMismatch(_))));
        let _ = PI;
    }
}
