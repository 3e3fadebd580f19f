//! Model Riemannian manifolds embedded in Euclidean space.
//!
//! Every manifold is stored through its embedding: points and tangent vectors
//! carry ambient coordinates (authoritative) together with the coordinates of
//! one chart of a small atlas. Levi-Civita quantities of the induced metric are
//! available both chart-free (tangential projection of ambient derivatives) and
//! in chart coordinates (Christoffel symbols), so each can check the other.
//!
//! Curvature follows the sign convention
//!
//! ```text
//! R(X,Y)Z = ∇_Y ∇_X Z - ∇_X ∇_Y Z + ∇_[X,Y] Z
//! ```
//!
//! which on a space form of curvature `c` reads `R(X,Y)Z = c(<X,Z>Y - <Y,Z>X)`.
//! With it, `Σ_i R(e_i, V) e_i = (n-1) c V` on an `n`-dimensional space form,
//! so Killing fields of the round sphere lie in the kernel of the Jacobi
//! operator of the identity map.

use crate::error::{Error, Result};
use crate::tolerances::{EMBEDDING, FD_STEP, POLE_MARGIN};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    FlatTorus,
    Product,
}

/// An embedded model space.
///
/// * `Euclidean { dim }` is `R^dim` with its identity embedding.
/// * `Sphere { dim, radius }` is the round `S^dim ⊂ R^{dim+1}`.
/// * `FlatTorus { periods }` is `R^m / (L_1 Z × ... × L_m Z)`; its ambient
///   coordinates are the coordinates of the fundamental domain `[0, L_i)`.
/// * `Product(a, b)` concatenates ambient and chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Manifold {
    Euclidean { dim: usize },
    Sphere { dim: usize, radius: f64 },
    FlatTorus { periods: Vec<f64> },
    Product(Box<Manifold>, Box<Manifold>),
}

/// One parametrization `u ↦ x(u)` of the atlas and its coordinate box.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub id: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// A point of a manifold: ambient coordinates plus the coordinates of one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    ambient: Vector,
    chart: usize,
    coords: Vector,
}

impl Point {
    pub fn ambient(&self) -> &Vector {
        &self.ambient
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }
}

/// A tangent vector with both chart-frame components and its ambient image.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: Point,
    components: Vector,
    ambient: Vector,
}

impl TangentVector {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &Vector {
        &self.components
    }

    pub fn ambient(&self) -> &Vector {
        &self.ambient
    }

    pub fn norm(&self) -> f64 {
        self.ambient.norm()
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.ambient.dot(&other.ambient)
    }

    pub fn scaled(&self, f: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            components: &self.components * f,
            ambient: &self.ambient * f,
        }
    }

    pub fn try_add(&self, other: &TangentVector) -> Result<TangentVector> {
        if !same_base(&self.base, &other.base) {
            return Err(Error::MixedBasePoints);
        }
        Ok(TangentVector {
            base: self.base.clone(),
            components: &self.components + &other.components,
            ambient: &self.ambient + &other.ambient,
        })
    }
}

fn same_base(a: &Point, b: &Point) -> bool {
    (&a.ambient - &b.ambient).norm() <= 1e-12 * (1.0 + a.ambient.norm())
}

/// Christoffel symbols `Γ^k_{ij}` of one chart, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(dim: usize) -> Self {
        Christoffel {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_{ij}`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        let d = self.dim;
        self.data[(k * d + i) * d + j] = value;
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// hyperspherical coordinates on the unit S^n
//
// u = (t_0, ..., t_{n-2}, ϕ); y_n = cos t_0, y_{n-1} = sin t_0 cos t_1, ...,
// (y_0, y_1) = sin t_0 ... sin t_{n-2} (cos ϕ, sin ϕ). For n = 2 this is
// (sin θ cos ϕ, sin θ sin ϕ, cos θ).
// ---------------------------------------------------------------------------

fn hyperspherical(n: usize, u: &[f64]) -> Vector {
    let mut y = Vector::zeros(n + 1);
    let mut prod = 1.0;
    for j in 0..n - 1 {
        y[n - j] = prod * u[j].cos();
        prod *= u[j].sin();
    }
    let phi = u[n - 1];
    y[0] = prod * phi.cos();
    y[1] = prod * phi.sin();
    y
}

fn hyperspherical_jacobian(n: usize, u: &[f64]) -> Matrix {
    let mut jac = Matrix::zeros(n + 1, n);
    let phi = u[n - 1];
    for q in 0..n {
        let mut prod = 1.0;
        for j in 0..n - 1 {
            let (c, s) = (u[j].cos(), u[j].sin());
            if j < q {
                prod *= s;
            } else if j == q {
                jac[(n - j, q)] = -prod * s;
                prod *= c;
            } else {
                jac[(n - j, q)] = prod * c;
                prod *= s;
            }
        }
        if q == n - 1 {
            jac[(0, q)] = -prod * phi.sin();
            jac[(1, q)] = prod * phi.cos();
        } else {
            jac[(0, q)] = prod * phi.cos();
            jac[(1, q)] = prod * phi.sin();
        }
    }
    jac
}

fn hyperspherical_inverse(n: usize, y: &Vector) -> Vector {
    let mut u = Vector::zeros(n);
    for j in 0..n - 1 {
        let rest: f64 = (0..n - j).map(|i| y[i] * y[i]).sum::<f64>().sqrt();
        u[j] = rest.atan2(y[n - j]);
    }
    let mut phi = y[1].atan2(y[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi -= 2.0 * PI;
    }
    u[n - 1] = phi;
    u
}

/// Cyclic shift of ambient coordinates used by the second sphere chart; it
/// moves the singular set of chart 0 away from that of chart 1.
fn sphere_shift(n: usize) -> usize {
    if n >= 2 {
        2
    } else {
        1
    }
}

fn reduce_periodic(x: f64, offset: f64, period: f64) -> f64 {
    let mut r = (x - offset).rem_euclid(period) + offset;
    if r >= offset + period {
        r -= period;
    }
    r
}

fn gram_schmidt(columns: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(columns.len());
    for c in columns {
        let mut v = c.clone();
        for _ in 0..2 {
            for e in &out {
                let proj = e.dot(&v);
                v -= e * proj;
            }
        }
        let n = v.norm();
        out.push(v / n);
    }
    out
}

impl Manifold {
    pub fn euclidean(dim: usize) -> Self {
        Manifold::Euclidean { dim }
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sphere needs dim >= 1 and radius > 0 (got dim {dim}, radius {radius})"
            )));
        }
        Ok(Manifold::Sphere { dim, radius })
    }

    pub fn unit_sphere(dim: usize) -> Self {
        Manifold::Sphere { dim, radius: 1.0 }
    }

    pub fn flat_torus(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "flat torus needs at least one positive period".into(),
            ));
        }
        Ok(Manifold::FlatTorus { periods })
    }

    pub fn product(a: Manifold, b: Manifold) -> Self {
        Manifold::Product(Box::new(a), Box::new(b))
    }

    pub fn kind(&self) -> ManifoldKind {
        match self {
            Manifold::Euclidean { .. } => ManifoldKind::Euclidean,
            Manifold::Sphere { .. } => ManifoldKind::Sphere,
            Manifold::FlatTorus { .. } => ManifoldKind::FlatTorus,
            Manifold::Product(..) => ManifoldKind::Product,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Manifold::Euclidean { dim } => *dim,
            Manifold::Sphere { dim, .. } => *dim,
            Manifold::FlatTorus { periods } => periods.len(),
            Manifold::Product(a, b) => a.intrinsic_dim() + b.intrinsic_dim(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Manifold::Euclidean { dim } => *dim,
            Manifold::Sphere { dim, .. } => dim + 1,
            Manifold::FlatTorus { periods } => periods.len(),
            Manifold::Product(a, b) => a.ambient_dim() + b.ambient_dim(),
        }
    }

    /// Constant sectional curvature when the manifold is a space form.
    pub fn space_form_curvature(&self) -> Option<f64> {
        match self {
            Manifold::Euclidean { .. } | Manifold::FlatTorus { .. } => Some(0.0),
            Manifold::Sphere { radius, .. } => Some(1.0 / (radius * radius)),
            Manifold::Product(a, b) => match (a.space_form_curvature(), b.space_form_curvature()) {
                (Some(x), Some(y)) if x == 0.0 && y == 0.0 => Some(0.0),
                _ => None,
            },
        }
    }

    /// Length scale used to size finite-difference steps.
    pub fn feature_scale(&self) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 1.0,
            Manifold::Sphere { radius, .. } => *radius,
            Manifold::FlatTorus { periods } => {
                periods.iter().cloned().fold(f64::INFINITY, f64::min) / (2.0 * PI)
            }
            Manifold::Product(a, b) => a.feature_scale().min(b.feature_scale()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Manifold::Euclidean { dim } => format!("R^{dim}"),
            Manifold::Sphere { dim, radius } if *radius == 1.0 => format!("S^{dim}"),
            Manifold::Sphere { dim, radius } => format!("S^{dim}({radius})"),
            Manifold::FlatTorus { periods } => format!("T^{}", periods.len()),
            Manifold::Product(a, b) => format!("{} x {}", a.label(), b.label()),
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Manifold::Sphere { .. })
    }

    fn split_ambient(&self, x: &Vector) -> (Vector, Vector) {
        match self {
            Manifold::Product(a, _) => {
                let ka = a.ambient_dim();
                (x.rows(0, ka).into_owned(), x.rows(ka, x.len() - ka).into_owned())
            }
            _ => unreachable!("split_ambient on a non-product manifold"),
        }
    }

    fn split_coords(&self, u: &Vector) -> (Vector, Vector) {
        match self {
            Manifold::Product(a, _) => {
                let ma = a.intrinsic_dim();
                (u.rows(0, ma).into_owned(), u.rows(ma, u.len() - ma).into_owned())
            }
            _ => unreachable!("split_coords on a non-product manifold"),
        }
    }

    fn join(a: &Vector, b: &Vector) -> Vector {
        let mut out = Vector::zeros(a.len() + b.len());
        out.rows_mut(0, a.len()).copy_from(a);
        out.rows_mut(a.len(), b.len()).copy_from(b);
        out
    }

    // -----------------------------------------------------------------------
    // atlas
    // -----------------------------------------------------------------------

    pub fn chart_count(&self) -> usize {
        match self {
            Manifold::Euclidean { .. } => 1,
            Manifold::Sphere { .. } | Manifold::FlatTorus { .. } => 2,
            Manifold::Product(a, b) => a.chart_count() * b.chart_count(),
        }
    }

    pub fn charts(&self) -> Vec<Chart> {
        (0..self.chart_count()).map(|id| self.chart(id)).collect()
    }

    fn chart(&self, id: usize) -> Chart {
        match self {
            Manifold::Euclidean { dim } => Chart {
                id,
                lower: vec![f64::NEG_INFINITY; *dim],
                upper: vec![f64::INFINITY; *dim],
            },
            Manifold::Sphere { dim, .. } => {
                let mut lower = vec![POLE_MARGIN; dim - 1];
                let mut upper = vec![PI - POLE_MARGIN; dim - 1];
                lower.push(0.0);
                upper.push(2.0 * PI);
                Chart { id, lower, upper }
            }
            Manifold::FlatTorus { periods } => {
                let lower: Vec<f64> = periods.iter().map(|l| id as f64 * 0.5 * l).collect();
                let upper = lower.iter().zip(periods).map(|(o, l)| o + l).collect();
                Chart { id, lower, upper }
            }
            Manifold::Product(a, b) => {
                let nb = b.chart_count();
                let (ca, cb) = (a.chart(id / nb), b.chart(id % nb));
                Chart {
                    id,
                    lower: [ca.lower, cb.lower].concat(),
                    upper: [ca.upper, cb.upper].concat(),
                }
            }
        }
    }

    /// The parametrization `x(u)` of chart `chart`.
    pub fn chart_embed(&self, chart: usize, u: &Vector) -> Vector {
        match self {
            Manifold::Euclidean { .. } => u.clone(),
            Manifold::Sphere { dim, radius } => {
                let n = *dim;
                let y = hyperspherical(n, u.as_slice());
                let shift = sphere_shift(n) * chart;
                let mut x = Vector::zeros(n + 1);
                for i in 0..=n {
                    x[(i + shift) % (n + 1)] = radius * y[i];
                }
                x
            }
            Manifold::FlatTorus { periods } => Vector::from_iterator(
                periods.len(),
                periods
                    .iter()
                    .enumerate()
                    .map(|(i, l)| reduce_periodic(u[i], 0.0, *l)),
            ),
            Manifold::Product(a, b) => {
                let nb = b.chart_count();
                let (ua, ub) = self.split_coords(u);
                Self::join(&a.chart_embed(chart / nb, &ua), &b.chart_embed(chart % nb, &ub))
            }
        }
    }

    /// Analytic Jacobian `∂x/∂u` (ambient × intrinsic).
    pub fn chart_jacobian(&self, chart: usize, u: &Vector) -> Matrix {
        match self {
            Manifold::Euclidean { dim } => Matrix::identity(*dim, *dim),
            Manifold::FlatTorus { periods } => Matrix::identity(periods.len(), periods.len()),
            Manifold::Sphere { dim, radius } => {
                let n = *dim;
                let jac = hyperspherical_jacobian(n, u.as_slice());
                let shift = sphere_shift(n) * chart;
                let mut out = Matrix::zeros(n + 1, n);
                for i in 0..=n {
                    for q in 0..n {
                        out[((i + shift) % (n + 1), q)] = radius * jac[(i, q)];
                    }
                }
                out
            }
            Manifold::Product(a, b) => {
                let nb = b.chart_count();
                let (ua, ub) = self.split_coords(u);
                let ja = a.chart_jacobian(chart / nb, &ua);
                let jb = b.chart_jacobian(chart % nb, &ub);
                let mut out = Matrix::zeros(ja.nrows() + jb.nrows(), ja.ncols() + jb.ncols());
                out.view_mut((0, 0), ja.shape()).copy_from(&ja);
                out.view_mut((ja.nrows(), ja.ncols()), jb.shape()).copy_from(&jb);
                out
            }
        }
    }

    /// Inverse of [`chart_embed`](Self::chart_embed); no singularity check.
    pub fn chart_coords(&self, chart: usize, x: &Vector) -> Vector {
        match self {
            Manifold::Euclidean { .. } => x.clone(),
            Manifold::Sphere { dim, radius } => {
                let n = *dim;
                let shift = sphere_shift(n) * chart;
                let y = Vector::from_iterator(n + 1, (0..=n).map(|i| x[(i + shift) % (n + 1)] / radius));
                hyperspherical_inverse(n, &y)
            }
            Manifold::FlatTorus { periods } => Vector::from_iterator(
                periods.len(),
                periods
                    .iter()
                    .enumerate()
                    .map(|(i, l)| reduce_periodic(x[i], chart as f64 * 0.5 * l, *l)),
            ),
            Manifold::Product(a, b) => {
                let nb = b.chart_count();
                let (xa, xb) = self.split_ambient(x);
                Self::join(&a.chart_coords(chart / nb, &xa), &b.chart_coords(chart % nb, &xb))
            }
        }
    }

    /// Distance of chart coordinates to the chart's degenerate set.
    pub fn chart_margin(&self, chart: usize, u: &Vector) -> f64 {
        match self {
            Manifold::Sphere { dim, .. } if *dim >= 2 => (0..dim - 1)
                .map(|j| u[j].min(PI - u[j]))
                .fold(f64::INFINITY, f64::min),
            Manifold::Product(a, b) => {
                let nb = b.chart_count();
                let (ua, ub) = self.split_coords(u);
                a.chart_margin(chart / nb, &ua).min(b.chart_margin(chart % nb, &ub))
            }
            _ => f64::INFINITY,
        }
    }

    fn best_chart(&self, x: &Vector) -> (usize, Vector) {
        let mut best: Option<(usize, Vector, f64)> = None;
        for id in 0..self.chart_count() {
            let u = self.chart_coords(id, x);
            let margin = self.chart_margin(id, &u);
            match &best {
                Some((_, _, m)) if *m >= margin => {}
                _ => best = Some((id, u, margin)),
            }
        }
        let (id, u, _) = best.expect("atlas is never empty");
        (id, u)
    }

    // -----------------------------------------------------------------------
    // points and tangent vectors
    // -----------------------------------------------------------------------

    /// Relative violation of the embedding constraint.
    pub fn constraint_violation(&self, x: &Vector) -> f64 {
        if x.len() != self.ambient_dim() {
            return f64::INFINITY;
        }
        match self {
            Manifold::Euclidean { .. } | Manifold::FlatTorus { .. } => {
                if x.iter().all(|v| v.is_finite()) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Manifold::Sphere { radius, .. } => (x.norm() - radius).abs() / radius,
            Manifold::Product(a, b) => {
                let (xa, xb) = self.split_ambient(x);
                a.constraint_violation(&xa).max(b.constraint_violation(&xb))
            }
        }
    }

    /// Wraps torus coordinates into the fundamental domain; identity otherwise.
    pub fn reduce(&self, x: &Vector) -> Vector {
        match self {
            Manifold::FlatTorus { periods } => Vector::from_iterator(
                periods.len(),
                periods
                    .iter()
                    .enumerate()
                    .map(|(i, l)| reduce_periodic(x[i], 0.0, *l)),
            ),
            Manifold::Product(a, b) => {
                let (xa, xb) = self.split_ambient(x);
                Self::join(&a.reduce(&xa), &b.reduce(&xb))
            }
            _ => x.clone(),
        }
    }

    /// `a - b` in ambient coordinates, using the minimal image on tori.
    pub fn ambient_difference(&self, a: &Vector, b: &Vector) -> Vector {
        match self {
            Manifold::FlatTorus { periods } => Vector::from_iterator(
                periods.len(),
                periods.iter().enumerate().map(|(i, l)| {
                    let d = a[i] - b[i];
                    d - l * (d / l).round()
                }),
            ),
            Manifold::Product(m1, m2) => {
                let (a1, a2) = self.split_ambient(a);
                let (b1, b2) = self.split_ambient(b);
                Self::join(&m1.ambient_difference(&a1, &b1), &m2.ambient_difference(&a2, &b2))
            }
            _ => a - b,
        }
    }

    /// Builds a point from ambient coordinates, choosing the chart farthest from
    /// its singular set.
    pub fn point(&self, ambient: Vector) -> Result<Point> {
        let violation = self.constraint_violation(&ambient);
        if !(violation <= EMBEDDING) {
            return Err(Error::OffManifold { violation });
        }
        let ambient = self.reduce(&ambient);
        let (chart, coords) = self.best_chart(&ambient);
        Ok(Point {
            ambient,
            chart,
            coords,
        })
    }

    /// Builds a point from chart coordinates.
    pub fn point_in_chart(&self, chart: usize, u: Vector) -> Result<Point> {
        if chart >= self.chart_count() || u.len() != self.intrinsic_dim() {
            return Err(Error::InvalidArgument(format!(
                "chart {chart} with {} coordinates is not valid on {}",
                u.len(),
                self.label()
            )));
        }
        let margin = self.chart_margin(chart, &u);
        if margin < POLE_MARGIN {
            return Err(Error::ChartSingularity { chart, margin });
        }
        let ambient = self.chart_embed(chart, &u);
        let coords = self.chart_coords(chart, &ambient);
        Ok(Point {
            ambient,
            chart,
            coords,
        })
    }

    fn check_chart(&self, p: &Point) -> Result<()> {
        let margin = self.chart_margin(p.chart, &p.coords);
        if margin < POLE_MARGIN {
            return Err(Error::ChartSingularity {
                chart: p.chart,
                margin,
            });
        }
        Ok(())
    }

    pub fn zero_vector(&self, p: &Point) -> TangentVector {
        TangentVector {
            base: p.clone(),
            components: Vector::zeros(self.intrinsic_dim()),
            ambient: Vector::zeros(self.ambient_dim()),
        }
    }

    /// Tangent vector from chart-frame components.
    pub fn tangent_from_components(&self, p: &Point, components: Vector) -> TangentVector {
        let ambient = self.chart_jacobian(p.chart, &p.coords) * &components;
        TangentVector {
            base: p.clone(),
            components,
            ambient,
        }
    }

    /// Tangent vector from an ambient vector, projected onto `T_p M` first.
    pub fn tangent_from_ambient(&self, p: &Point, v: &Vector) -> TangentVector {
        let ambient = self.project_tangent(&p.ambient, v);
        let e = self.chart_jacobian(p.chart, &p.coords);
        let gram = e.transpose() * &e;
        let rhs = e.transpose() * &ambient;
        let components = gram
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or_else(|| Vector::zeros(self.intrinsic_dim()));
        TangentVector {
            base: p.clone(),
            components,
            ambient,
        }
    }

    /// Nearest-point projection onto the manifold.
    pub fn project_to_manifold(&self, y: &Vector) -> Result<Point> {
        if y.len() != self.ambient_dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} ambient coordinates, got {}",
                self.ambient_dim(),
                y.len()
            )));
        }
        let x = self.project_ambient(y)?;
        self.point(x)
    }

    fn project_ambient(&self, y: &Vector) -> Result<Vector> {
        match self {
            Manifold::Sphere { radius, .. } => {
                let n = y.norm();
                if !(n > 1e-12 * radius) {
                    return Err(Error::NotProjectable);
                }
                Ok(y * (radius / n))
            }
            Manifold::Product(a, b) => {
                let (ya, yb) = self.split_ambient(y);
                Ok(Self::join(&a.project_ambient(&ya)?, &b.project_ambient(&yb)?))
            }
            _ => Ok(self.reduce(y)),
        }
    }

    // -----------------------------------------------------------------------
    // chart-free Levi-Civita machinery
    // -----------------------------------------------------------------------

    /// Orthogonal projection of `v` onto the tangent space at ambient `x`.
    pub fn project_tangent(&self, x: &Vector, v: &Vector) -> Vector {
        match self {
            Manifold::Sphere { radius, .. } => v - x * (x.dot(v) / (radius * radius)),
            Manifold::Product(a, b) => {
                let (xa, xb) = self.split_ambient(x);
                let (va, vb) = self.split_ambient(v);
                Self::join(&a.project_tangent(&xa, &va), &b.project_tangent(&xb, &vb))
            }
            _ => v.clone(),
        }
    }

    pub fn tangent_projector(&self, x: &Vector) -> Matrix {
        let k = self.ambient_dim();
        let mut p = Matrix::zeros(k, k);
        for j in 0..k {
            let mut e = Vector::zeros(k);
            e[j] = 1.0;
            p.set_column(j, &self.project_tangent(x, &e));
        }
        p
    }

    /// `(D P_x[dir]) w`: derivative of the tangent projector in direction `dir`.
    pub fn projector_derivative(&self, x: &Vector, dir: &Vector, w: &Vector) -> Vector {
        match self {
            Manifold::Sphere { radius, .. } => {
                -(dir * x.dot(w) + x * dir.dot(w)) / (radius * radius)
            }
            Manifold::Product(a, b) => {
                let (xa, xb) = self.split_ambient(x);
                let (da, db) = self.split_ambient(dir);
                let (wa, wb) = self.split_ambient(w);
                Self::join(
                    &a.projector_derivative(&xa, &da, &wa),
                    &b.projector_derivative(&xb, &db, &wb),
                )
            }
            _ => Vector::zeros(x.len()),
        }
    }

    /// Position and velocity at time `t` along the geodesic from `x` with
    /// initial velocity `v` (ambient, torus coordinates not wrapped).
    pub fn geodesic(&self, x: &Vector, v: &Vector, t: f64) -> (Vector, Vector) {
        match self {
            Manifold::Euclidean { .. } | Manifold::FlatTorus { .. } => (x + v * t, v.clone()),
            Manifold::Sphere { radius, .. } => {
                let speed = v.norm();
                if speed == 0.0 {
                    return (x.clone(), v.clone());
                }
                let u = v / speed;
                let s = t * speed / radius;
                let (sn, cs) = s.sin_cos();
                (x * cs + &u * (radius * sn), (x * (-sn / radius) + &u * cs) * speed)
            }
            Manifold::Product(..) => {
                let (pos, vel, _) = self.integrate_geodesic(x, v, None, t);
                (pos, vel)
            }
        }
    }

    /// Parallel transport of `w` along the geodesic `t ↦ exp_x(t v)`.
    pub fn transport_along_geodesic(&self, x: &Vector, v: &Vector, w: &Vector, t: f64) -> Vector {
        match self {
            Manifold::Euclidean { .. } | Manifold::FlatTorus { .. } => w.clone(),
            Manifold::Sphere { radius, .. } => {
                let speed = v.norm();
                if speed == 0.0 {
                    return w.clone();
                }
                let u = v / speed;
                let along = w.dot(&u);
                let perp = w - &u * along;
                let s = t * speed / radius;
                let (sn, cs) = s.sin_cos();
                perp + (x * (-sn / radius) + &u * cs) * along
            }
            Manifold::Product(..) => {
                let (_, _, moved) = self.integrate_geodesic(x, v, Some(w), t);
                moved.expect("transported vector requested")
            }
        }
    }

    fn rk4_geodesic(
        &self,
        x: &Vector,
        v: &Vector,
        w: Option<&Vector>,
        t: f64,
        steps: usize,
    ) -> (Vector, Vector, Option<Vector>) {
        let h = t / steps as f64;
        let rhs = |x: &Vector, v: &Vector, w: &Option<Vector>| {
            let a = self.projector_derivative(x, v, v);
            let b = w.as_ref().map(|w| self.projector_derivative(x, v, w));
            (v.clone(), a, b)
        };
        let (mut x, mut v, mut w) = (x.clone(), v.clone(), w.cloned());
        let axpy = |base: &Option<Vector>, d: &Option<Vector>, s: f64| match (base, d) {
            (Some(b), Some(d)) => Some(b + d * s),
            _ => None,
        };
        for _ in 0..steps {
            let (k1x, k1v, k1w) = rhs(&x, &v, &w);
            let (k2x, k2v, k2w) = rhs(&(&x + &k1x * (0.5 * h)), &(&v + &k1v * (0.5 * h)), &axpy(&w, &k1w, 0.5 * h));
            let (k3x, k3v, k3w) = rhs(&(&x + &k2x * (0.5 * h)), &(&v + &k2v * (0.5 * h)), &axpy(&w, &k2w, 0.5 * h));
            let (k4x, k4v, k4w) = rhs(&(&x + &k3x * h), &(&v + &k3v * h), &axpy(&w, &k3w, h));
            x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
            v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
            if let (Some(wv), Some(a), Some(b), Some(c), Some(d)) = (w.as_mut(), k1w, k2w, k3w, k4w) {
                *wv += (a + b * 2.0 + c * 2.0 + d) * (h / 6.0);
            }
        }
        (x, v, w)
    }

    /// Fourth-order geodesic (and transport) integration with step doubling
    /// until two successive resolutions agree.
    fn integrate_geodesic(
        &self,
        x: &Vector,
        v: &Vector,
        w: Option<&Vector>,
        t: f64,
    ) -> (Vector, Vector, Option<Vector>) {
        if t == 0.0 {
            return (x.clone(), v.clone(), w.cloned());
        }
        let scale = 1.0 + x.norm() + (v * t).norm() + w.map(|w| w.norm()).unwrap_or(0.0);
        let mut steps = 8usize;
        let mut coarse = self.rk4_geodesic(x, v, w, t, steps);
        loop {
            let fine = self.rk4_geodesic(x, v, w, t, 2 * steps);
            let mut err = (&fine.0 - &coarse.0).amax().max((&fine.1 - &coarse.1).amax());
            if let (Some(a), Some(b)) = (&fine.2, &coarse.2) {
                err = err.max((a - b).amax());
            }
            steps *= 2;
            if err <= 1e-13 * scale || steps >= 1 << 16 {
                return fine;
            }
            coarse = fine;
        }
    }

    /// The point at parameter `t` on the geodesic with initial velocity `v`.
    pub fn exponential_map(&self, p: &Point, v: &TangentVector, t: f64) -> Result<Point> {
        if !same_base(p, &v.base) {
            return Err(Error::MixedBasePoints);
        }
        if t == 0.0 {
            return Ok(p.clone());
        }
        let (x, _) = self.geodesic(&p.ambient, &v.ambient, t);
        let x = self.project_ambient(&x)?;
        self.point(x)
    }

    /// `R(X,Y)Z` for ambient vectors tangent at `x`.
    pub fn curvature_ambient(&self, x: &Vector, a: &Vector, b: &Vector, c: &Vector) -> Vector {
        match self {
            Manifold::Sphere { radius, dim } => {
                if *dim == 1 {
                    return Vector::zeros(x.len());
                }
                let k = 1.0 / (radius * radius);
                (b * a.dot(c) - a * b.dot(c)) * k
            }
            Manifold::Product(m1, m2) => {
                let (x1, x2) = self.split_ambient(x);
                let (a1, a2) = self.split_ambient(a);
                let (b1, b2) = self.split_ambient(b);
                let (c1, c2) = self.split_ambient(c);
                Self::join(
                    &m1.curvature_ambient(&x1, &a1, &b1, &c1),
                    &m2.curvature_ambient(&x2, &a2, &b2, &c2),
                )
            }
            _ => Vector::zeros(x.len()),
        }
    }

    pub fn curvature_at(
        &self,
        p: &Point,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
    ) -> Result<TangentVector> {
        if !(same_base(p, &x.base) && same_base(p, &y.base) && same_base(p, &z.base)) {
            return Err(Error::MixedBasePoints);
        }
        let r = self.curvature_ambient(&p.ambient, &x.ambient, &y.ambient, &z.ambient);
        Ok(self.tangent_from_ambient(p, &r))
    }

    // -----------------------------------------------------------------------
    // chart quantities
    // -----------------------------------------------------------------------

    pub fn metric_in_chart(&self, chart: usize, u: &Vector) -> Matrix {
        let e = self.chart_jacobian(chart, u);
        e.transpose() * e
    }

    /// First fundamental form of the point's chart.
    pub fn metric_at(&self, p: &Point) -> Result<Matrix> {
        self.check_chart(p)?;
        Ok(self.metric_in_chart(p.chart, &p.coords))
    }

    /// Analytic Christoffel symbols in chart coordinates.
    pub fn christoffel_in_chart(&self, chart: usize, u: &Vector) -> Christoffel {
        match self {
            Manifold::Euclidean { dim } => Christoffel::zeros(*dim),
            Manifold::FlatTorus { periods } => Christoffel::zeros(periods.len()),
            Manifold::Sphere { dim, radius } => {
                let n = *dim;
                // diagonal metric g_q = r^2 Π_{i<q, i polar} sin^2 u_i
                let mut g = vec![radius * radius; n];
                for q in 1..n {
                    g[q] = g[q - 1] * u[q - 1].sin().powi(2);
                }
                // dg[i][q] = ∂_i g_q
                let mut dg = vec![vec![0.0; n]; n];
                for i in 0..n.saturating_sub(1) {
                    let cot = u[i].cos() / u[i].sin();
                    for q in i + 1..n {
                        dg[i][q] = 2.0 * cot * g[q];
                    }
                }
                let mut gamma = Christoffel::zeros(n);
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut v = 0.0;
                            if k == j {
                                v += dg[i][k];
                            }
                            if k == i {
                                v += dg[j][k];
                            }
                            if i == j {
                                v -= dg[k][i];
                            }
                            gamma.set(k, i, j, v / (2.0 * g[k]));
                        }
                    }
                }
                gamma
            }
            Manifold::Product(a, b) => {
                let nb = b.chart_count();
                let (ua, ub) = self.split_coords(u);
                let ga = a.christoffel_in_chart(chart / nb, &ua);
                let gb = b.christoffel_in_chart(chart % nb, &ub);
                let (ma, mb) = (ga.dim(), gb.dim());
                let mut gamma = Christoffel::zeros(ma + mb);
                for k in 0..ma {
                    for i in 0..ma {
                        for j in 0..ma {
                            gamma.set(k, i, j, ga.get(k, i, j));
                        }
                    }
                }
                for k in 0..mb {
                    for i in 0..mb {
                        for j in 0..mb {
                            gamma.set(ma + k, ma + i, ma + j, gb.get(k, i, j));
                        }
                    }
                }
                gamma
            }
        }
    }

    /// Christoffel symbols from central differences of the chart metric.
    pub fn christoffel_fd_in_chart(&self, chart: usize, u: &Vector) -> Christoffel {
        let m = self.intrinsic_dim();
        let h = FD_STEP * self.feature_scale();
        let dmetric: Vec<Matrix> = (0..m)
            .map(|i| {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[i] += h;
                dn[i] -= h;
                (self.metric_in_chart(chart, &up) - self.metric_in_chart(chart, &dn)) / (2.0 * h)
            })
            .collect();
        let ginv = self
            .metric_in_chart(chart, u)
            .try_inverse()
            .unwrap_or_else(|| Matrix::zeros(m, m));
        let mut gamma = Christoffel::zeros(m);
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let v: f64 = (0..m)
                        .map(|l| {
                            ginv[(k, l)]
                                * (dmetric[i][(l, j)] + dmetric[j][(l, i)] - dmetric[l][(i, j)])
                        })
                        .sum();
                    gamma.set(k, i, j, 0.5 * v);
                }
            }
        }
        gamma
    }

    pub fn christoffel_at(&self, p: &Point) -> Result<Christoffel> {
        self.check_chart(p)?;
        Ok(self.christoffel_in_chart(p.chart, &p.coords))
    }

    pub fn christoffel_fd_at(&self, p: &Point) -> Result<Christoffel> {
        self.check_chart(p)?;
        Ok(self.christoffel_fd_in_chart(p.chart, &p.coords))
    }

    /// `R(X,Y)Z` assembled in chart coordinates from finite differences of the
    /// analytic Christoffel symbols; an independent route to [`curvature_at`](Self::curvature_at).
    pub fn curvature_from_christoffels_at(
        &self,
        p: &Point,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
    ) -> Result<TangentVector> {
        if !(same_base(p, &x.base) && same_base(p, &y.base) && same_base(p, &z.base)) {
            return Err(Error::MixedBasePoints);
        }
        self.check_chart(p)?;
        let m = self.intrinsic_dim();
        let u = &p.coords;
        let h = FD_STEP * self.feature_scale();
        let gamma = self.christoffel_in_chart(p.chart, u);
        let dgamma: Vec<Christoffel> = (0..m)
            .map(|i| {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[i] += h;
                dn[i] -= h;
                let gp = self.christoffel_in_chart(p.chart, &up);
                let gm = self.christoffel_in_chart(p.chart, &dn);
                Christoffel {
                    dim: m,
                    data: gp.data.iter().zip(&gm.data).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
                }
            })
            .collect();
        let (xc, yc, zc) = (x.components(), y.components(), z.components());
        let mut out = Vector::zeros(m);
        for l in 0..m {
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let coeff = xc[i] * yc[j] * zc[k];
                        if coeff == 0.0 {
                            continue;
                        }
                        let mut r = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                        for mu in 0..m {
                            r += gamma.get(l, i, mu) * gamma.get(mu, j, k)
                                - gamma.get(l, j, mu) * gamma.get(mu, i, k);
                        }
                        // the standard tensor with the opposite sign
                        acc -= coeff * r;
                    }
                }
            }
            out[l] = acc;
        }
        Ok(self.tangent_from_components(p, out))
    }

    /// Orthonormal frame from Gram–Schmidt of the chart coordinate vectors,
    /// evaluated at ambient `x` in a fixed chart.
    pub fn orthonormal_frame_in_chart(&self, chart: usize, x: &Vector) -> Vec<Vector> {
        let u = self.chart_coords(chart, x);
        let e = self.chart_jacobian(chart, &u);
        let cols: Vec<Vector> = (0..e.ncols()).map(|j| e.column(j).into_owned()).collect();
        gram_schmidt(&cols)
    }

    pub fn orthonormal_frame(&self, p: &Point) -> Result<Vec<TangentVector>> {
        self.check_chart(p)?;
        Ok(self
            .orthonormal_frame_in_chart(p.chart, &p.ambient)
            .into_iter()
            .map(|v| self.tangent_from_ambient(p, &v))
            .collect())
    }

    /// Quadrature nodes and positive weights approximating the Riemannian volume.
    pub fn quadrature_grid(&self, resolution: usize) -> Result<Vec<(Point, f64)>> {
        if resolution < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be at least 4 (got {resolution})"
            )));
        }
        match self {
            Manifold::Euclidean { .. } => Err(Error::UnsupportedDomain(format!(
                "no quadrature rule on the non-compact {}",
                self.label()
            ))),
            Manifold::Sphere { dim: 1, radius } => {
                let w = 2.0 * PI * radius / resolution as f64;
                (0..resolution)
                    .map(|j| {
                        let theta = 2.0 * PI * j as f64 / resolution as f64;
                        Ok((self.point_in_chart(0, Vector::from_element(1, theta))?, w))
                    })
                    .collect()
            }
            Manifold::Sphere { dim, radius } => {
                let n = *dim;
                let polar = (resolution / 2).max(2);
                let dt = PI / polar as f64;
                let dphi = 2.0 * PI / resolution as f64;
                let total = polar.pow((n - 1) as u32) * resolution;
                let mut out = Vec::with_capacity(total);
                for idx in 0..total {
                    let mut rest = idx;
                    let mut u = Vector::zeros(n);
                    let mut weight = radius.powi(n as i32) * dt.powi((n - 1) as i32) * dphi;
                    u[n - 1] = dphi * (rest % resolution) as f64;
                    rest /= resolution;
                    for j in (0..n - 1).rev() {
                        u[j] = dt * ((rest % polar) as f64 + 0.5);
                        rest /= polar;
                        weight *= u[j].sin().powi((n - 1 - j) as i32);
                    }
                    out.push((self.point_in_chart(0, u)?, weight));
                }
                Ok(out)
            }
            Manifold::FlatTorus { periods } => {
                let m = periods.len();
                let total = resolution.pow(m as u32);
                let weight: f64 = periods.iter().map(|l| l / resolution as f64).product();
                (0..total)
                    .map(|idx| {
                        let mut rest = idx;
                        let mut u = Vector::zeros(m);
                        for i in (0..m).rev() {
                            u[i] = periods[i] * (rest % resolution) as f64 / resolution as f64;
                            rest /= resolution;
                        }
                        Ok((self.point_in_chart(0, u)?, weight))
                    })
                    .collect()
            }
            Manifold::Product(a, b) => {
                let ga = a.quadrature_grid(resolution)?;
                let gb = b.quadrature_grid(resolution)?;
                let mut out = Vec::with_capacity(ga.len() * gb.len());
                for (pa, wa) in &ga {
                    for (pb, wb) in &gb {
                        out.push((self.point(Self::join(&pa.ambient, &pb.ambient))?, wa * wb));
                    }
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn s2() -> Manifold {
        Manifold::unit_sphere(2)
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn projects_onto_sphere_and_torus() {
        let p = s2().project_to_manifold(&v(&[0.0, 0.0, 2.0])).unwrap();
        assert_relative_eq!(p.ambient(), &v(&[0.0, 0.0, 1.0]), epsilon = 1e-15);
        assert_eq!(
            s2().project_to_manifold(&v(&[0.0, 0.0, 0.0])),
            Err(Error::NotProjectable)
        );
        let torus = Manifold::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let q = torus.project_to_manifold(&v(&[7.0, -1.0])).unwrap();
        assert_relative_eq!(q.ambient()[0], 7.0 - 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(q.ambient()[1], 2.0 * PI - 1.0, epsilon = 1e-14);
        let e = Manifold::euclidean(2).project_to_manifold(&v(&[3.0, -4.0])).unwrap();
        assert_eq!(e.ambient(), &v(&[3.0, -4.0]));
    }

    #[test]
    fn sphere_metric_in_spherical_chart() {
        let p = s2().point_in_chart(0, v(&[PI / 3.0, 0.4])).unwrap();
        let g = s2().metric_at(&p).unwrap();
        assert_relative_eq!(g, Matrix::from_diagonal(&v(&[1.0, 0.75])), epsilon = 1e-14);
        // chart 0 is the usual (sin θ cos ϕ, sin θ sin ϕ, cos θ)
        let x = p.ambient();
        assert_relative_eq!(x[2], (PI / 3.0).cos(), epsilon = 1e-15);
        assert_relative_eq!(x[0], (PI / 3.0).sin() * 0.4f64.cos(), epsilon = 1e-15);
    }

    #[test]
    fn flat_metrics_are_identity() {
        let r2 = Manifold::euclidean(2);
        let p = r2.point(v(&[0.3, -2.0])).unwrap();
        assert_eq!(r2.metric_at(&p).unwrap(), Matrix::identity(2, 2));
        let t = Manifold::flat_torus(vec![1.0, 3.0]).unwrap();
        let q = t.point(v(&[0.5, 2.5])).unwrap();
        assert_eq!(t.metric_at(&q).unwrap(), Matrix::identity(2, 2));
    }

    #[test]
    fn pole_is_a_chart_singularity() {
        assert!(matches!(
            s2().point_in_chart(0, v(&[0.0, 0.0])),
            Err(Error::ChartSingularity { chart: 0, .. })
        ));
        // the pole itself is reachable through the other chart
        let p = s2().point(v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.chart(), 1);
        assert!(s2().metric_at(&p).is_ok());
    }

    #[test]
    fn sphere_christoffels_at_quarter_pi() {
        let p = s2().point_in_chart(0, v(&[PI / 4.0, 1.0])).unwrap();
        let g = s2().christoffel_at(&p).unwrap();
        assert_relative_eq!(g.get(0, 1, 1), -0.5, epsilon = 1e-14);
        assert_relative_eq!(g.get(1, 0, 1), 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.get(1, 1, 0), 1.0, epsilon = 1e-14);
        let fd = s2().christoffel_fd_at(&p).unwrap();
        assert!(g.max_abs_diff(&fd) < 1e-8);
    }

    #[test]
    fn flat_christoffels_vanish() {
        let t = Manifold::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let q = t.point(v(&[1.0, 2.0])).unwrap();
        assert!(t.christoffel_at(&q).unwrap().data.iter().all(|x| *x == 0.0));
        let r3 = Manifold::euclidean(3);
        let p = r3.point(v(&[1.0, 2.0, 3.0])).unwrap();
        assert!(r3.christoffel_at(&p).unwrap().data.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn sectional_curvature_sign() {
        let m = s2();
        let p = m.point(v(&[0.0, 0.6, 0.8])).unwrap();
        let x = m.tangent_from_ambient(&p, &v(&[1.0, 0.0, 0.0]));
        let y = m.tangent_from_ambient(&p, &v(&[0.0, 0.8, -0.6]));
        let ryy = m.curvature_at(&p, &x, &y, &y).unwrap();
        assert_relative_eq!(ryy.dot(&x), -1.0, epsilon = 1e-14);
        let ryx = m.curvature_at(&p, &x, &y, &x).unwrap();
        assert_relative_eq!(ryx.dot(&y), 1.0, epsilon = 1e-14);
        let same = m.curvature_at(&p, &x, &x, &y).unwrap();
        assert_eq!(same.norm(), 0.0);
    }

    #[test]
    fn flat_torus_curvature_is_zero() {
        let t = Manifold::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let p = t.point(v(&[1.0, 1.0])).unwrap();
        let a = t.tangent_from_ambient(&p, &v(&[1.0, 2.0]));
        let b = t.tangent_from_ambient(&p, &v(&[-1.0, 0.5]));
        assert_eq!(t.curvature_at(&p, &a, &b, &a).unwrap().norm(), 0.0);
    }

    #[test]
    fn mixed_base_points_are_rejected() {
        let m = s2();
        let p = m.point(v(&[1.0, 0.0, 0.0])).unwrap();
        let q = m.point(v(&[0.0, 1.0, 0.0])).unwrap();
        let x = m.tangent_from_ambient(&p, &v(&[0.0, 1.0, 0.0]));
        let y = m.tangent_from_ambient(&q, &v(&[1.0, 0.0, 0.0]));
        assert_eq!(m.curvature_at(&p, &x, &y, &x), Err(Error::MixedBasePoints));
        assert_eq!(m.exponential_map(&q, &x, 1.0), Err(Error::MixedBasePoints));
    }

    #[test]
    fn exponential_map_examples() {
        let m = s2();
        let p = m.point(v(&[1.0, 0.0, 0.0])).unwrap();
        let x = m.tangent_from_ambient(&p, &v(&[0.0, 1.0, 0.0]));
        let q = m.exponential_map(&p, &x, PI / 2.0).unwrap();
        assert_relative_eq!(q.ambient(), &v(&[0.0, 1.0, 0.0]), epsilon = 1e-15);
        assert_eq!(m.exponential_map(&p, &x, 0.0).unwrap(), p);
        let r2 = Manifold::euclidean(2);
        let a = r2.point(v(&[1.0, 2.0])).unwrap();
        let w = r2.tangent_from_ambient(&a, &v(&[3.0, 0.0]));
        assert_eq!(r2.exponential_map(&a, &w, 2.0).unwrap().ambient(), &v(&[7.0, 2.0]));
    }

    #[test]
    fn product_exponential_matches_factors() {
        let m = Manifold::product(s2(), Manifold::unit_sphere(1));
        let x = v(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let p = m.point(x).unwrap();
        let w = m.tangent_from_ambient(&p, &v(&[0.0, 0.5, 0.0, -2.0, 0.0]));
        let q = m.exponential_map(&p, &w, 1.3).unwrap();
        let (s, c) = (0.65f64).sin_cos();
        let (s1, c1) = (2.6f64).sin_cos();
        let expected = v(&[c, s, 0.0, -s1, c1]);
        assert!((q.ambient() - expected).amax() < 1e-10);
    }

    #[test]
    fn frames_are_orthonormal() {
        let m = s2();
        let p = m.point_in_chart(0, v(&[PI / 2.0, 0.3])).unwrap();
        let f = m.orthonormal_frame(&p).unwrap();
        let e = m.chart_jacobian(0, p.coords());
        assert_relative_eq!(f[0].ambient(), &e.column(0).into_owned(), epsilon = 1e-14);
        assert_relative_eq!(f[1].ambient(), &e.column(1).into_owned(), epsilon = 1e-14);
        let r2 = Manifold::euclidean(2);
        let q = r2.point(v(&[5.0, 1.0])).unwrap();
        let g = r2.orthonormal_frame(&q).unwrap();
        assert_eq!(g[0].ambient(), &v(&[1.0, 0.0]));
        assert_eq!(g[1].ambient(), &v(&[0.0, 1.0]));
    }

    #[test]
    fn quadrature_weights() {
        let s1 = Manifold::unit_sphere(1);
        let g = s1.quadrature_grid(8).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g.iter().all(|(_, w)| (w - 2.0 * PI / 8.0).abs() < 1e-15));

        let total: f64 = s2().quadrature_grid(64).unwrap().iter().map(|(_, w)| w).sum();
        assert!((total / (4.0 * PI) - 1.0).abs() < 1e-3);

        let torus = Manifold::flat_torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        let total: f64 = torus.quadrature_grid(16).unwrap().iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 4.0 * PI * PI, epsilon = 1e-12);

        let s3 = Manifold::unit_sphere(3);
        let total: f64 = s3.quadrature_grid(32).unwrap().iter().map(|(_, w)| w).sum();
        assert!((total / (2.0 * PI * PI) - 1.0).abs() < 1e-2);

        assert!(matches!(
            Manifold::euclidean(2).quadrature_grid(8),
            Err(Error::UnsupportedDomain(_))
        ));
        assert!(matches!(s1.quadrature_grid(3), Err(Error::InvalidArgument(_))));
    }
}
