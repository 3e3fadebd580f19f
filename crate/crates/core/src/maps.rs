//! Smooth maps between embedded manifolds and their first-order invariants.

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{Manifold, Matrix, Point, TangentVector, Vector};
use crate::tolerances::{
    CONFORMALITY, CRITICAL_DIFFERENTIAL, HARMONIC, INDETERMINATE_FACTOR, KERNEL_SINGULAR_VALUE,
    RICHARDSON_STEP,
};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type EvalFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type DifferentialFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type FiberFn = Arc<dyn Fn(&Vector, usize) -> Vec<Vector> + Send + Sync>;

/// A map `φ: M → N` given by its ambient coordinate functions.
///
/// `eval` takes ambient coordinates of a domain point and returns ambient
/// coordinates of the image. The optional analytic differential is the
/// directional derivative of an extension of `eval` to a neighbourhood of `M`;
/// it is only applied to tangent vectors. The optional fiber sampler lists domain points with
/// the same image.
#[derive(Clone)]
pub struct SmoothMap {
    name: String,
    domain: Manifold,
    codomain: Manifold,
    eval: EvalFn,
    jacobian: Option<DifferentialFn>,
    fibers: Option<FiberFn>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .field("analytic_differential", &self.jacobian.is_some())
            .finish()
    }
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        domain: Manifold,
        codomain: Manifold,
        eval: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        SmoothMap {
            name: name.into(),
            domain,
            codomain,
            eval: Arc::new(eval),
            jacobian: None,
            fibers: None,
        }
    }

    /// Analytic differential given as the ambient Jacobian matrix.
    pub fn with_jacobian(self, jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.with_differential(move |x, v| jac(x) * v)
    }

    /// Analytic differential given as a directional derivative `(x, v) ↦ Dφ_x[v]`.
    pub fn with_differential(
        mut self,
        d: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(d));
        self
    }

    pub fn with_fibers(
        mut self,
        fibers: impl Fn(&Vector, usize) -> Vec<Vector> + Send + Sync + 'static,
    ) -> Self {
        self.fibers = Some(Arc::new(fibers));
        self
    }

    /// Drops the analytic differential, forcing the finite-difference path.
    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = None;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Manifold {
        &self.domain
    }

    pub fn codomain(&self) -> &Manifold {
        &self.codomain
    }

    pub fn has_analytic_differential(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn has_fiber_sampler(&self) -> bool {
        self.fibers.is_some()
    }

    /// Ambient image of ambient domain coordinates (torus images not wrapped).
    pub fn eval_ambient(&self, x: &Vector) -> Vector {
        (self.eval)(x)
    }

    pub fn eval(&self, p: &Point) -> Result<Point> {
        let y = self.eval_ambient(p.ambient());
        self.codomain.point(y)
    }

    /// `dφ_x(X)` for an ambient tangent vector `X` at ambient `x`.
    pub fn differential_ambient(&self, x: &Vector, v: &Vector) -> Vector {
        match &self.jacobian {
            Some(jac) => {
                let y = self.eval_ambient(x);
                self.codomain.project_tangent(&y, &jac(x, v))
            }
            None => self.differential_fd_ambient(x, v),
        }
    }

    /// Finite-difference differential along the geodesic through `x` with velocity `v`.
    pub fn differential_fd_ambient(&self, x: &Vector, v: &Vector) -> Vector {
        let speed = v.norm();
        if speed == 0.0 {
            return Vector::zeros(self.codomain.ambient_dim());
        }
        let dir = v / speed;
        let y = self.eval_ambient(x);
        let h = RICHARDSON_STEP * self.domain.feature_scale();
        let d = fd::richardson(
            |t| {
                let (c, _) = self.domain.geodesic(x, &dir, t);
                self.codomain.ambient_difference(&self.eval_ambient(&c), &y)
            },
            h,
        );
        self.codomain.project_tangent(&y, &d) * speed
    }

    pub fn differential_at(&self, p: &Point, v: &TangentVector) -> Result<TangentVector> {
        if (v.base().ambient() - p.ambient()).norm() > 1e-12 * (1.0 + p.ambient().norm()) {
            return Err(Error::MixedBasePoints);
        }
        let q = self.eval(p)?;
        let w = self.differential_ambient(p.ambient(), v.ambient());
        Ok(self.codomain.tangent_from_ambient(&q, &w))
    }

    pub fn differential_fd_at(&self, p: &Point, v: &TangentVector) -> Result<TangentVector> {
        let q = self.eval(p)?;
        let w = self.differential_fd_ambient(p.ambient(), v.ambient());
        Ok(self.codomain.tangent_from_ambient(&q, &w))
    }

    /// Columns `dφ(e_i)` for the orthonormal frame of `chart` at ambient `x`.
    pub fn differential_columns(&self, chart: usize, x: &Vector) -> Matrix {
        let frame = self.domain.orthonormal_frame_in_chart(chart, x);
        let mut d = Matrix::zeros(self.codomain.ambient_dim(), frame.len());
        for (i, e) in frame.iter().enumerate() {
            d.set_column(i, &self.differential_ambient(x, e));
        }
        d
    }

    /// Other domain points of the fiber through `x` (including `x` itself).
    pub fn fiber_points(&self, x: &Vector, count: usize) -> Result<Vec<Vector>> {
        match &self.fibers {
            Some(f) => Ok(f(x, count)),
            None => Err(Error::FiberSamplingUnavailable(self.name.clone())),
        }
    }
}

/// `ψ ∘ φ`; the differential follows the chain rule when both factors are analytic.
pub fn compose(phi: &SmoothMap, psi: &SmoothMap) -> Result<SmoothMap> {
    if phi.codomain != psi.domain {
        return Err(Error::DomainMismatch(format!(
            "`{}` lands in {} but `{}` starts from {}",
            phi.name,
            phi.codomain.label(),
            psi.name,
            psi.domain.label()
        )));
    }
    let (e1, e2) = (phi.eval.clone(), psi.eval.clone());
    let mut out = SmoothMap {
        name: format!("{} o {}", psi.name, phi.name),
        domain: phi.domain.clone(),
        codomain: psi.codomain.clone(),
        eval: Arc::new(move |x| e2(&e1(x))),
        jacobian: None,
        fibers: None,
    };
    if let (Some(j1), Some(j2)) = (phi.jacobian.clone(), psi.jacobian.clone()) {
        let (e1, mid) = (phi.eval.clone(), phi.codomain.clone());
        out.jacobian = Some(Arc::new(move |x, v| {
            let y = e1(x);
            j2(&y, &mid.project_tangent(&y, &j1(x, v)))
        }));
    }
    Ok(out)
}

/// Pointwise horizontal conformality data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalityReport {
    pub dilation: f64,
    pub residual: f64,
    pub rank: usize,
    pub is_critical: bool,
    pub indeterminate: bool,
}

/// Kernel (vertical) and orthogonal complement (horizontal) of `dφ_p`.
pub fn vertical_horizontal_split(
    phi: &SmoothMap,
    p: &Point,
) -> Result<(Vec<TangentVector>, Vec<TangentVector>)> {
    let m = phi.domain.intrinsic_dim();
    let frame = phi.domain.orthonormal_frame_in_chart(p.chart(), p.ambient());
    let d = phi.differential_columns(p.chart(), p.ambient());
    let rows = d.nrows().max(m);
    let mut padded = Matrix::zeros(rows, m);
    padded.view_mut((0, 0), d.shape()).copy_from(&d);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let threshold = KERNEL_SINGULAR_VALUE * smax.max(1.0);
    let (mut vertical, mut horizontal) = (Vec::new(), Vec::new());
    for (k, s) in svd.singular_values.iter().enumerate() {
        let mut amb = Vector::zeros(phi.domain.ambient_dim());
        for (i, e) in frame.iter().enumerate() {
            amb += e * vt[(k, i)];
        }
        let t = phi.domain.tangent_from_ambient(p, &amb);
        if *s <= threshold {
            vertical.push(t);
        } else {
            horizontal.push(t);
        }
    }
    Ok((vertical, horizontal))
}

/// Conformality data at ambient `x`, never failing.
pub fn conformality(phi: &SmoothMap, chart: usize, x: &Vector) -> ConformalityReport {
    let d = phi.differential_columns(chart, x);
    let hs = d.norm();
    if hs < CRITICAL_DIFFERENTIAL {
        return ConformalityReport {
            dilation: 0.0,
            residual: 0.0,
            rank: 0,
            is_critical: true,
            indeterminate: false,
        };
    }
    let y = phi.eval_ambient(x);
    let n = phi.codomain.intrinsic_dim() as f64;
    let a = &d * d.transpose();
    let lambda2 = a.trace() / n;
    let residual = (a - phi.codomain.tangent_projector(&y) * lambda2).amax() / lambda2;
    let sv = d.singular_values();
    let threshold = KERNEL_SINGULAR_VALUE * sv.max().max(1.0);
    ConformalityReport {
        dilation: lambda2.sqrt(),
        residual,
        rank: sv.iter().filter(|s| **s > threshold).count(),
        is_critical: false,
        indeterminate: hs < CRITICAL_DIFFERENTIAL * INDETERMINATE_FACTOR,
    }
}

/// Dilation `λ(p)`; fails when `dφ_p` is nonzero and not horizontally conformal.
pub fn dilation_at(phi: &SmoothMap, p: &Point) -> Result<ConformalityReport> {
    let r = conformality(phi, p.chart(), p.ambient());
    if !r.is_critical && r.residual > CONFORMALITY {
        return Err(Error::NotHorizontallyConformal {
            residual: r.residual,
        });
    }
    Ok(r)
}

/// Tension field `τ = Σ ∇^φ_{e_i} dφ(e_i) - dφ(∇_{e_i} e_i)` at ambient `x`,
/// using the orthonormal frame field of `chart`.
pub fn tension_ambient(phi: &SmoothMap, chart: usize, x: &Vector) -> Vector {
    let dom = &phi.domain;
    let y = phi.eval_ambient(x);
    let h = RICHARDSON_STEP * dom.feature_scale();
    let frame = dom.orthonormal_frame_in_chart(chart, x);
    let mut tau = Vector::zeros(phi.codomain.ambient_dim());
    for (i, e) in frame.iter().enumerate() {
        let along = |t: f64| dom.geodesic(x, e, t).0;
        let d_dphi = fd::richardson(
            |t| {
                let c = along(t);
                let ei = &dom.orthonormal_frame_in_chart(chart, &c)[i];
                phi.differential_ambient(&c, ei)
            },
            h,
        );
        let de = fd::richardson(
            |t| dom.orthonormal_frame_in_chart(chart, &along(t))[i].clone(),
            h,
        );
        let nabla_e = dom.project_tangent(x, &de);
        tau += phi.codomain.project_tangent(&y, &d_dphi) - phi.differential_ambient(x, &nabla_e);
    }
    tau
}

pub fn tension_field_at(phi: &SmoothMap, p: &Point) -> Result<TangentVector> {
    let margin = phi.domain.chart_margin(p.chart(), p.coords());
    if margin < crate::tolerances::POLE_MARGIN {
        return Err(Error::ChartSingularity {
            chart: p.chart(),
            margin,
        });
    }
    let q = phi.eval(p)?;
    let tau = tension_ambient(phi, p.chart(), p.ambient());
    Ok(phi.codomain.tangent_from_ambient(&q, &tau))
}

/// Tension field as `Σ P (φ∘c_i)''(0)` along geodesics `c_i` with `c_i'(0) = e_i`.
pub fn tension_geodesic_ambient(phi: &SmoothMap, chart: usize, x: &Vector) -> Vector {
    let dom = &phi.domain;
    let y = phi.eval_ambient(x);
    let h = RICHARDSON_STEP * dom.feature_scale();
    let mut acc = Vector::zeros(phi.codomain.ambient_dim());
    for e in dom.orthonormal_frame_in_chart(chart, x) {
        acc += fd::richardson_second(
            |t| {
                let c = dom.geodesic(x, &e, t).0;
                phi.codomain.ambient_difference(&phi.eval_ambient(&c), &y)
            },
            h,
        );
    }
    phi.codomain.project_tangent(&y, &acc)
}

/// Largest tension norm over a grid.
pub fn harmonicity_report(phi: &SmoothMap, grid: &[(Point, f64)]) -> f64 {
    grid.par_iter()
        .map(|(p, _)| tension_ambient(phi, p.chart(), p.ambient()).norm())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// A refined zero of `dφ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub differential_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorphismReport {
    pub harmonic_residual: f64,
    pub conformality_residual: f64,
    pub critical_points: Vec<CriticalPoint>,
    pub indeterminate_points: usize,
    pub min_dilation: f64,
    pub max_dilation: f64,
    pub is_harmonic: bool,
    pub is_horizontally_conformal: bool,
    pub is_morphism: bool,
}

/// Harmonicity plus horizontal weak conformality over a grid.
pub fn morphism_report(phi: &SmoothMap, grid: &[(Point, f64)]) -> MorphismReport {
    let harmonic_residual = harmonicity_report(phi, grid);
    let reports: Vec<(ConformalityReport, f64)> = grid
        .par_iter()
        .map(|(p, _)| {
            let d = phi.differential_columns(p.chart(), p.ambient());
            (conformality(phi, p.chart(), p.ambient()), d.norm())
        })
        .collect();
    let mut worst = 0.0f64;
    let mut indeterminate = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (r, _) in &reports {
        lo = lo.min(r.dilation);
        hi = hi.max(r.dilation);
        if r.is_critical {
            continue;
        }
        if r.indeterminate {
            indeterminate += 1;
            continue;
        }
        worst = worst.max(r.residual);
    }
    let norms: Vec<f64> = reports.iter().map(|(_, n)| *n).collect();
    let critical_points = find_critical_points(phi, grid, &norms);
    let is_harmonic = harmonic_residual < HARMONIC;
    let is_horizontally_conformal = worst < CONFORMALITY;
    MorphismReport {
        harmonic_residual,
        conformality_residual: worst,
        critical_points,
        indeterminate_points: indeterminate,
        min_dilation: if lo.is_finite() { lo } else { 0.0 },
        max_dilation: hi,
        is_harmonic,
        is_horizontally_conformal,
        is_morphism: is_harmonic && is_horizontally_conformal,
    }
}

fn hs_norm_sq(phi: &SmoothMap, x: &Vector) -> f64 {
    let p = match phi.domain.point(x.clone()) {
        Ok(p) => p,
        Err(_) => return f64::INFINITY,
    };
    phi.differential_columns(p.chart(), p.ambient()).norm_squared()
}

/// Newton minimisation of `|dφ|²` from a seed, in geodesic normal coordinates.
fn refine_critical_point(phi: &SmoothMap, seed: &Vector) -> (Vector, f64) {
    let dom = &phi.domain;
    let m = dom.intrinsic_dim();
    let h = RICHARDSON_STEP * dom.feature_scale();
    let mut x = seed.clone();
    for _ in 0..30 {
        let p = match dom.point(x.clone()) {
            Ok(p) => p,
            Err(_) => break,
        };
        let frame = dom.orthonormal_frame_in_chart(p.chart(), &x);
        let at = |u: &[f64]| {
            let mut v = Vector::zeros(dom.ambient_dim());
            for (e, c) in frame.iter().zip(u) {
                v += e * *c;
            }
            let y = dom.geodesic(&x, &v, 1.0).0;
            dom.project_to_manifold(&y)
                .map(|q| hs_norm_sq(phi, q.ambient()))
                .unwrap_or(f64::INFINITY)
        };
        let f0 = at(&vec![0.0; m]);
        let mut grad = Vector::zeros(m);
        let mut hess = Matrix::zeros(m, m);
        for i in 0..m {
            let mut up = vec![0.0; m];
            up[i] = h;
            let mut dn = vec![0.0; m];
            dn[i] = -h;
            let (fp, fm) = (at(&up), at(&dn));
            grad[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let mut pp = vec![0.0; m];
                pp[i] = h;
                pp[j] = h;
                let mut mm = vec![0.0; m];
                mm[i] = -h;
                mm[j] = -h;
                let mut pm = vec![0.0; m];
                pm[i] = h;
                pm[j] = -h;
                let mut mp = vec![0.0; m];
                mp[i] = -h;
                mp[j] = h;
                let v = (at(&pp) - at(&pm) - at(&mp) + at(&mm)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let step = match hess.clone().cholesky() {
            Some(c) => -c.solve(&grad),
            None => -grad * 0.1,
        };
        let step_len = step.norm();
        let mut v = Vector::zeros(dom.ambient_dim());
        for (e, c) in frame.iter().zip(step.iter()) {
            v += e * *c;
        }
        let candidate = match dom.project_to_manifold(&dom.geodesic(&x, &v, 1.0).0) {
            Ok(q) => q.ambient().clone(),
            Err(_) => break,
        };
        if hs_norm_sq(phi, &candidate) > f0 {
            break;
        }
        x = candidate;
        if step_len < 1e-13 * dom.feature_scale() {
            break;
        }
    }
    let value = hs_norm_sq(phi, &x).sqrt();
    (x, value)
}

fn find_critical_points(phi: &SmoothMap, grid: &[(Point, f64)], norms: &[f64]) -> Vec<CriticalPoint> {
    let max = norms.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    let mut candidates: Vec<usize> = (0..grid.len()).filter(|&i| norms[i] < 0.25 * max).collect();
    candidates.sort_by(|a, b| norms[*a].total_cmp(&norms[*b]).then(a.cmp(b)));
    let radius = 0.5 * phi.domain.feature_scale();
    let mut seeds: Vec<Vector> = Vec::new();
    for i in candidates {
        let x = grid[i].0.ambient();
        if seeds
            .iter()
            .all(|s| phi.domain.ambient_difference(s, x).norm() > radius)
        {
            seeds.push(x.clone());
        }
    }
    let mut found: Vec<CriticalPoint> = Vec::new();
    for s in seeds {
        let (x, value) = refine_critical_point(phi, &s);
        if value < CRITICAL_DIFFERENTIAL * INDETERMINATE_FACTOR
            && found.iter().all(|c| {
                let y = Vector::from_column_slice(&c.location);
                phi.domain.ambient_difference(&y, &x).norm() > 1e-6
            })
        {
            found.push(CriticalPoint {
                location: x.iter().cloned().collect(),
                differential_norm: value,
            });
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle_map(k: i32) -> SmoothMap {
        let s1 = Manifold::unit_sphere(1);
        SmoothMap::new("circle", s1.clone(), s1, move |x| {
            let t = x[1].atan2(x[0]) * k as f64;
            Vector::from_vec(vec![t.cos(), t.sin()])
        })
    }

    #[test]
    fn fd_differential_of_circle_cover() {
        let phi = circle_map(3);
        let p = phi.domain().point(Vector::from_vec(vec![0.6, 0.8])).unwrap();
        let x = phi
            .domain()
            .tangent_from_ambient(&p, &Vector::from_vec(vec![-0.8, 0.6]));
        let d = phi.differential_at(&p, &x).unwrap();
        assert!((d.norm() - 3.0).abs() < 1e-9);
        let r = dilation_at(&phi, &p).unwrap();
        assert!((r.dilation - 3.0).abs() < 1e-9);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn compose_checks_domains() {
        let phi = circle_map(2);
        let s2 = Manifold::unit_sphere(2);
        let other = SmoothMap::new("id", s2.clone(), s2, |x| x.clone());
        assert!(matches!(compose(&phi, &other), Err(Error::DomainMismatch(_))));
        let psi = circle_map(3);
        let c = compose(&phi, &psi).unwrap();
        let x = Vector::from_vec(vec![(0.3f64).cos(), (0.3f64).sin()]);
        let y = c.eval_ambient(&x);
        assert!((y[0] - (1.8f64).cos()).abs() < 1e-14);
        assert!((y[1] - (1.8f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn fd_tension_of_cover_vanishes() {
        let phi = circle_map(2);
        let grid = phi.domain().quadrature_grid(16).unwrap();
        assert!(harmonicity_report(&phi, &grid) < 1e-8);
        let p = &grid[3].0;
        let t = tension_geodesic_ambient(&phi, p.chart(), p.ambient());
        assert!(t.norm() < 1e-8);
        let _ = PI;
    }

    #[test]
    fn fibers_need_a_sampler() {
        let phi = circle_map(2);
        let x = Vector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(
            phi.fiber_points(&x, 4),
            Err(Error::FiberSamplingUnavailable(_))
        ));
    }
}
