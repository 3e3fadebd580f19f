//! Spectra of Jacobi operators along maps from a circle.
//!
//! The operator is represented in the basis `b_f(θ) Ẽ_j(θ)`, where `b_f` are
//! L²-normalised Fourier modes and `Ẽ` is a parallel orthonormal frame of
//! `φ⁻¹TN` twisted by a constant rotation so that it closes up. Entries are the
//! weak form `∫ <∇B_a, ∇B_b> - <R(dφe, B_a)dφe, B_b>`, so the matrix is the
//! Galerkin section of `J^φ` and its eigenvalues approximate those of `J^φ`.
//! For sphere domains only a Rayleigh–Ritz probe on a fixed dictionary is
//! offered; it gives a lower bound for the index.

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Matrix, Point, Vector};
use crate::jacobi::{self, Section};
use crate::maps::{self, SmoothMap};
use crate::tolerances::{RAYLEIGH_NOISE, SPECTRAL_ZERO};
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Parallel frame along `θ ↦ φ(r cos θ, r sin θ)`, stored on a fine table.
#[derive(Clone, Debug)]
struct FrameTable {
    step: f64,
    frames: Vec<Vec<Vector>>,
    omega: Matrix,
    holonomy: Matrix,
}

#[derive(Clone, Debug)]
pub struct DiscreteJacobiOperator {
    pub map: String,
    pub m_max: usize,
    pub rank: usize,
    pub quadrature_nodes: usize,
    pub tension_residual: f64,
    pub matrix: Matrix,
    radius: f64,
    table: Arc<FrameTable>,
    phi: SmoothMap,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub map: String,
    #[serde(rename = "M_max")]
    pub m_max: usize,
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub nullity: usize,
    pub zero_tolerance: f64,
}

fn circle_radius(phi: &SmoothMap) -> Result<f64> {
    match phi.domain() {
        Manifold::Sphere { dim: 1, radius } => Ok(*radius),
        other => Err(Error::UnsupportedDomain(format!(
            "spectral assembly needs a circle domain, got {}",
            other.label()
        ))),
    }
}

fn circle_point(r: f64, theta: f64) -> Vector {
    Vector::from_vec(vec![r * theta.cos(), r * theta.sin()])
}

fn circle_velocity(r: f64, theta: f64) -> Vector {
    Vector::from_vec(vec![-r * theta.sin(), r * theta.cos()])
}

/// One RK4 step of `w' = DP_y[y'] w` along the image curve.
fn transport_step(phi: &SmoothMap, r: f64, theta: f64, h: f64, frame: &[Vector]) -> Vec<Vector> {
    let n = phi.codomain();
    let rhs = |t: f64, w: &Vector| {
        let x = circle_point(r, t);
        let y = phi.eval_ambient(&x);
        let dy = phi.differential_ambient(&x, &circle_velocity(r, t));
        n.projector_derivative(&y, &dy, w)
    };
    frame
        .iter()
        .map(|w| {
            let k1 = rhs(theta, w);
            let k2 = rhs(theta + 0.5 * h, &(w + &k1 * (0.5 * h)));
            let k3 = rhs(theta + 0.5 * h, &(w + &k2 * (0.5 * h)));
            let k4 = rhs(theta + h, &(w + &k3 * h));
            w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
        })
        .collect()
}

/// Real logarithm `Ω` of a rotation `H` with `exp(2πΩ) = H`.
fn rotation_log(h: &Matrix) -> Result<Matrix> {
    let d = h.nrows();
    let id = Matrix::identity(d, d);
    if (h.transpose() * h - &id).amax() > 1e-6 {
        return Err(Error::FrameConstructionFailure(
            "transported frame lost orthonormality".into(),
        ));
    }
    if (h - &id).amax() < 1e-12 {
        return Ok(Matrix::zeros(d, d));
    }
    if h.determinant() < 0.0 {
        return Err(Error::FrameConstructionFailure(
            "holonomy reverses orientation".into(),
        ));
    }
    let log = match d {
        1 => Matrix::zeros(1, 1),
        _ if (h - &id).amax() < 1e-9 => Matrix::zeros(d, d),
        2 => {
            let a = h[(1, 0)].atan2(h[(0, 0)]);
            Matrix::from_row_slice(2, 2, &[0.0, -a, a, 0.0])
        }
        3 => {
            let angle = ((h.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
            let skew = (h - h.transpose()) * 0.5;
            let s = angle.sin();
            let axis = if s > 1e-6 {
                Vector::from_vec(vec![skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]]) / s
            } else {
                // angle near π: axis from the symmetric part
                let b = (h + &id) * 0.5;
                let k = (0..3).max_by(|a, c| b[(*a, *a)].total_cmp(&b[(*c, *c)])).unwrap_or(0);
                let col = b.column(k).into_owned();
                col.normalize()
            };
            let a = axis * angle;
            Matrix::from_row_slice(3, 3, &[0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0])
        }
        _ => {
            return Err(Error::FrameConstructionFailure(format!(
                "no rotation logarithm implemented for rank {d} holonomy"
            )))
        }
    };
    Ok(log / (2.0 * PI))
}

fn build_frame_table(phi: &SmoothMap, r: f64, nodes: usize) -> Result<FrameTable> {
    let n = phi.codomain();
    let x0 = circle_point(r, 0.0);
    let p0 = phi.eval(&phi.domain().point(x0.clone())?)?;
    let start: Vec<Vector> = n
        .orthonormal_frame(&p0)?
        .into_iter()
        .map(|t| t.ambient().clone())
        .collect();
    // substeps per node interval so that the image moves at most ~1e-3 per step
    let interval = 2.0 * PI / nodes as f64;
    let mut speed = 0.0f64;
    for q in 0..nodes {
        let th = interval * q as f64;
        let v = phi.differential_ambient(&circle_point(r, th), &circle_velocity(r, th));
        speed = speed.max(v.norm());
    }
    let sub = ((interval * speed.max(1.0) / 1e-3).ceil() as usize).max(4);
    let total = nodes * sub;
    let step = 2.0 * PI / total as f64;
    let mut frames = Vec::with_capacity(total + 1);
    frames.push(start.clone());
    let mut cur = start.clone();
    for s in 0..total {
        cur = transport_step(phi, r, step * s as f64, step, &cur);
        frames.push(cur.clone());
    }
    let rank = start.len();
    let mut holonomy = Matrix::zeros(rank, rank);
    for i in 0..rank {
        for j in 0..rank {
            holonomy[(i, j)] = start[i].dot(&cur[j]);
        }
    }
    let omega = rotation_log(&holonomy)?;
    Ok(FrameTable {
        step,
        frames,
        omega,
        holonomy,
    })
}

impl FrameTable {
    /// The twisted frame `Ẽ(θ) = E(θ) exp(-θΩ)`.
    fn twisted(&self, phi: &SmoothMap, r: f64, theta: f64) -> Vec<Vector> {
        let theta = theta.rem_euclid(2.0 * PI);
        let idx = ((theta / self.step).round() as usize).min(self.frames.len() - 1);
        let base = idx as f64 * self.step;
        let delta = theta - base;
        let raw = if delta == 0.0 {
            self.frames[idx].clone()
        } else {
            transport_step(phi, r, base, delta, &self.frames[idx])
        };
        let q = (&self.omega * (-theta)).exp();
        let rank = raw.len();
        (0..rank)
            .map(|j| {
                let mut v = Vector::zeros(raw[0].len());
                for (i, e) in raw.iter().enumerate() {
                    v += e * q[(i, j)];
                }
                v
            })
            .collect()
    }
}

/// `b_f(θ)` and `b_f'(θ)` for the L²-normalised Fourier basis on a circle of radius `r`.
fn fourier(f: usize, theta: f64, r: f64) -> (f64, f64) {
    if f == 0 {
        return (1.0 / (2.0 * PI * r).sqrt(), 0.0);
    }
    let m = f.div_ceil(2) as f64;
    let norm = 1.0 / (PI * r).sqrt();
    let (s, c) = (m * theta).sin_cos();
    if f % 2 == 1 {
        (norm * c, -norm * m * s)
    } else {
        (norm * s, norm * m * c)
    }
}

/// Galerkin matrix of `J^φ` for a map from a circle.
pub fn assemble_circle_domain(phi: &SmoothMap, m_max: usize) -> Result<DiscreteJacobiOperator> {
    let r = circle_radius(phi)?;
    let n = phi.codomain();
    let nodes = (8 * (m_max + 1)).max(16);
    let table = build_frame_table(phi, r, nodes)?;
    let rank = n.intrinsic_dim();
    let modes = 2 * m_max + 1;
    let dim = rank * modes;
    let w = 2.0 * PI * r / nodes as f64;
    let omega = &table.omega;

    let contributions: Vec<Matrix> = (0..nodes)
        .into_par_iter()
        .map(|q| {
            let theta = 2.0 * PI * q as f64 / nodes as f64;
            let x = circle_point(r, theta);
            let y = phi.eval_ambient(&x);
            let e = circle_velocity(r, theta) / r;
            let de = phi.differential_ambient(&x, &e);
            let frame = table.twisted(phi, r, theta);
            let mut curv = Matrix::zeros(rank, rank);
            for j in 0..rank {
                let rj = n.curvature_ambient(&y, &de, &frame[j], &de);
                for l in 0..rank {
                    curv[(j, l)] = rj.dot(&frame[l]);
                }
            }
            let vals: Vec<(f64, f64)> = (0..modes).map(|f| fourier(f, theta, r)).collect();
            // gradient components of each basis section in the twisted frame
            let mut grad = Matrix::zeros(dim, rank);
            for j in 0..rank {
                for (f, (b, db)) in vals.iter().enumerate() {
                    let a = j * modes + f;
                    for i in 0..rank {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        grad[(a, i)] = (db * delta - b * omega[(i, j)]) / r;
                    }
                }
            }
            let mut local = &grad * grad.transpose();
            for j in 0..rank {
                for l in 0..rank {
                    let c = curv[(j, l)];
                    if c == 0.0 {
                        continue;
                    }
                    for (f, (bf, _)) in vals.iter().enumerate() {
                        for (g, (bg, _)) in vals.iter().enumerate() {
                            local[(j * modes + f, l * modes + g)] -= bf * bg * c;
                        }
                    }
                }
            }
            local * w
        })
        .collect();
    let mut a = Matrix::zeros(dim, dim);
    for c in contributions {
        a += c;
    }
    let matrix = (&a + a.transpose()) * 0.5;

    let grid: Vec<(Point, f64)> = (0..nodes)
        .map(|q| {
            let theta = 2.0 * PI * q as f64 / nodes as f64;
            phi.domain().point(circle_point(r, theta)).map(|p| (p, w))
        })
        .collect::<Result<_>>()?;
    let tension_residual = maps::harmonicity_report(phi, &grid);
    Ok(DiscreteJacobiOperator {
        map: phi.name().to_string(),
        m_max,
        rank,
        quadrature_nodes: nodes,
        tension_residual,
        matrix,
        radius: r,
        table: Arc::new(table),
        phi: phi.clone(),
    })
}

impl DiscreteJacobiOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn holonomy(&self) -> &Matrix {
        &self.table.holonomy
    }

    /// Largest `|A - Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Quadratic form `cᵀ A d`.
    pub fn form(&self, c: &[f64], d: &[f64]) -> f64 {
        let c = Vector::from_column_slice(c);
        let d = Vector::from_column_slice(d);
        c.dot(&(&self.matrix * d))
    }

    /// The section `Σ c_a B_a` along the assembled map.
    pub fn basis_section(&self, coeffs: &[f64]) -> Result<Section> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        let coeffs = coeffs.to_vec();
        let (table, phi, r) = (self.table.clone(), self.phi.clone(), self.radius);
        let (rank, modes) = (self.rank, 2 * self.m_max + 1);
        let k = self.phi.codomain().ambient_dim();
        Ok(Section::new("galerkin", self.phi.clone(), move |x| {
            let theta = x[1].atan2(x[0]);
            let frame = table.twisted(&phi, r, theta);
            let mut v = Vector::zeros(k);
            for j in 0..rank {
                let mut s = 0.0;
                for f in 0..modes {
                    let c = coeffs[j * modes + f];
                    if c != 0.0 {
                        s += c * fourier(f, theta, r).0;
                    }
                }
                v += &frame[j] * s;
            }
            v
        }))
    }

    /// Full eigendecomposition, eigenvalues ascending with matching eigenvector columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, Matrix)> {
        let eig = SymmetricEigen::try_new(self.matrix.clone(), 1e-15, 10_000).ok_or_else(|| {
            Error::ConvergenceFailure(format!("symmetric eigensolver on {}x{}", self.dim(), self.dim()))
        })?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]).then(a.cmp(b)));
        let values = order.iter().map(|i| eig.eigenvalues[*i]).collect();
        let mut vectors = Matrix::zeros(self.dim(), self.dim());
        for (c, i) in order.iter().enumerate() {
            vectors.set_column(c, &eig.eigenvectors.column(*i));
        }
        Ok((values, vectors))
    }
}

pub fn default_zero_tolerance(eigenvalues: &[f64]) -> f64 {
    let top = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    SPECTRAL_ZERO * (1.0 + top)
}

/// Eigenvalues, index and nullity of an assembled operator.
pub fn index_nullity(op: &DiscreteJacobiOperator, zero_tolerance: Option<f64>) -> Result<SpectralReport> {
    let (eigenvalues, _) = op.eigen()?;
    let tol = zero_tolerance.unwrap_or_else(|| default_zero_tolerance(&eigenvalues));
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("zero tolerance must be nonnegative (got {tol})")));
    }
    Ok(SpectralReport {
        map: op.map.clone(),
        m_max: op.m_max,
        index: eigenvalues.iter().filter(|v| **v < -tol).count(),
        nullity: eigenvalues.iter().filter(|v| v.abs() <= tol).count(),
        eigenvalues,
        zero_tolerance: tol,
    })
}

pub fn spectrum(phi: &SmoothMap, m_max: usize, zero_tolerance: Option<f64>) -> Result<SpectralReport> {
    index_nullity(&assemble_circle_domain(phi, m_max)?, zero_tolerance)
}

/// CSV rows `mode_index,eigenvalue`.
pub fn write_csv<W: std::io::Write>(report: &SpectralReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["mode_index", "eigenvalue"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for (i, v) in report.eigenvalues.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:?}")])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub phi: String,
    pub psi: String,
    pub index_psi: usize,
    pub index_composite: usize,
    pub nullity_psi: usize,
    pub nullity_composite: usize,
    pub pass: bool,
}

/// Index and nullity of `ψ` and `ψ∘φ` for a harmonic morphism `φ` between circles.
pub fn corollary_check(phi: &SmoothMap, psi: &SmoothMap, m_max: usize) -> Result<CorollaryReport> {
    circle_radius(phi)?;
    circle_radius(psi)?;
    if !matches!(phi.codomain(), Manifold::Sphere { dim: 1, .. }) {
        return Err(Error::DomainMismatch(format!(
            "`{}` must map into a circle",
            phi.name()
        )));
    }
    let composite = maps::compose(phi, psi)?;
    let a = spectrum(psi, m_max, None)?;
    let b = spectrum(&composite, m_max, None)?;
    Ok(CorollaryReport {
        phi: phi.name().to_string(),
        psi: psi.name().to_string(),
        pass: b.index >= a.index && b.nullity >= a.nullity,
        index_psi: a.index,
        index_composite: b.index,
        nullity_psi: a.nullity,
        nullity_composite: b.nullity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportedForm {
    pub form: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// `H_{ψ∘φ}(W, W)` for `W = V∘φ` against `∫ λ² α |W|²`.
pub fn transported_field_form(
    phi: &SmoothMap,
    v: &Section,
    alpha: f64,
    grid: &[(Point, f64)],
) -> Result<TransportedForm> {
    let w = v.pullback(phi)?;
    let form = jacobi::hessian_form(&w, &w, grid)?;
    let expected = jacobi::scaled_norm_integral(phi, &w, alpha, grid);
    let relative_error = (form - expected).abs() / expected.abs().max(1e-300);
    Ok(TransportedForm {
        form,
        expected,
        relative_error,
    })
}

/// `H_{ψ∘φ}(V_i∘φ, V_j∘φ)`.
pub fn transported_cross_term(
    phi: &SmoothMap,
    vi: &Section,
    vj: &Section,
    grid: &[(Point, f64)],
) -> Result<f64> {
    jacobi::hessian_form(&vi.pullback(phi)?, &vj.pullback(phi)?, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayleighBound {
    pub map: String,
    pub dictionary_size: usize,
    pub retained: usize,
    pub ritz_values: Vec<f64>,
    pub index_lower_bound: usize,
    pub zero_tolerance: f64,
    /// `H(V,V) / ∫|V|²` of each negative Ritz eigenfield, evaluated through the strong form.
    pub certificates: Vec<f64>,
    /// Negative Ritz values whose eigenfield failed the strong-form check.
    pub unconfirmed: usize,
}

/// Dictionary `P(φ) e_a` and `P(φ)(φ_b e_a)` of sections along a map into a sphere.
pub fn rayleigh_dictionary(phi: &SmoothMap) -> Result<Vec<Section>> {
    let n = phi.codomain().clone();
    if !n.is_sphere() {
        return Err(Error::UnsupportedDomain(format!(
            "the Rayleigh probe needs a sphere codomain, got {}",
            n.label()
        )));
    }
    let k = n.ambient_dim();
    let mut out = Vec::new();
    let mut push = |name: String, lin: Option<usize>, a: usize| {
        let (m1, m2, n1, n2) = (phi.clone(), phi.clone(), n.clone(), n.clone());
        let coeff = move |y: &Vector| -> Vector {
            let mut c = Vector::zeros(k);
            c[a] = lin.map(|b| y[b]).unwrap_or(1.0);
            c
        };
        let coeff2 = coeff;
        let s = Section::new(name, phi.clone(), move |x| {
            let y = m1.eval_ambient(x);
            n1.project_tangent(&y, &coeff(&y))
        })
        .with_derivative(move |x, v| {
            let y = m2.eval_ambient(x);
            let dy = m2.differential_ambient(x, v);
            let mut dc = Vector::zeros(k);
            if let Some(b) = lin {
                dc[a] = dy[b];
            }
            n2.projector_derivative(&y, &dy, &coeff2(&y)) + n2.project_tangent(&y, &dc)
        });
        out.push(s);
    };
    for a in 0..k {
        push(format!("P e{a}"), None, a);
    }
    for b in 0..k {
        for a in 0..k {
            push(format!("P y{b} e{a}"), Some(b), a);
        }
    }
    Ok(out)
}

/// Rayleigh–Ritz lower bound for the index on a compact domain.
pub fn rayleigh_index_bound(phi: &SmoothMap, grid: &[(Point, f64)]) -> Result<RayleighBound> {
    let dict = rayleigh_dictionary(phi)?;
    let d = dict.len();
    let n = phi.codomain();
    let parts: Vec<(Matrix, Matrix)> = grid
        .par_iter()
        .map(|(p, w)| {
            let x = p.ambient();
            let y = phi.eval_ambient(x);
            let frame = phi.domain().orthonormal_frame_in_chart(p.chart(), x);
            let cols: Vec<Vector> = frame.iter().map(|e| phi.differential_ambient(x, e)).collect();
            let vals: Vec<Vector> = dict.iter().map(|s| s.eval_ambient(x)).collect();
            let grads: Vec<Vec<Vector>> = dict
                .iter()
                .map(|s| frame.iter().map(|e| jacobi::pullback_derivative_ambient(s, x, e)).collect())
                .collect();
            let curv: Vec<Vector> = vals
                .iter()
                .map(|v| {
                    let mut acc = Vector::zeros(n.ambient_dim());
                    for c in &cols {
                        acc += n.curvature_ambient(&y, c, v, c);
                    }
                    acc
                })
                .collect();
            let mut h = Matrix::zeros(d, d);
            let mut g = Matrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let s: f64 = grads[a].iter().zip(&grads[b]).map(|(u, v)| u.dot(v)).sum();
                    h[(a, b)] = w * (s - curv[a].dot(&vals[b]));
                    g[(a, b)] = w * vals[a].dot(&vals[b]);
                }
            }
            (h, g)
        })
        .collect();
    let mut h = Matrix::zeros(d, d);
    let mut g = Matrix::zeros(d, d);
    for (hp, gp) in parts {
        h += hp;
        g += gp;
    }
    let h = (&h + h.transpose()) * 0.5;
    let g = (&g + g.transpose()) * 0.5;
    let ge = SymmetricEigen::try_new(g, 1e-15, 10_000)
        .ok_or_else(|| Error::ConvergenceFailure("Gram matrix eigensolver".into()))?;
    let gmax = ge.eigenvalues.max();
    let keep: Vec<usize> = (0..d).filter(|i| ge.eigenvalues[*i] > 1e-10 * gmax).collect();
    let mut whiten = Matrix::zeros(d, keep.len());
    for (c, i) in keep.iter().enumerate() {
        whiten.set_column(c, &(ge.eigenvectors.column(*i) / ge.eigenvalues[*i].sqrt()));
    }
    let reduced = whiten.transpose() * h * &whiten;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let re = SymmetricEigen::try_new(reduced, 1e-15, 10_000)
        .ok_or_else(|| Error::ConvergenceFailure("Ritz eigensolver".into()))?;
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|a, b| re.eigenvalues[*a].total_cmp(&re.eigenvalues[*b]));
    let ritz: Vec<f64> = order.iter().map(|i| re.eigenvalues[*i]).collect();
    let top = ritz.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = RAYLEIGH_NOISE * top;
    let mut certificates = Vec::new();
    for (rank, i) in order.iter().enumerate() {
        if ritz[rank] >= -tol {
            break;
        }
        let coeffs = &whiten * re.eigenvectors.column(*i);
        let field = Section::combination("ritz", &dict, coeffs.as_slice())?;
        let h = jacobi::hessian_form(&field, &field, grid)?;
        let norm: f64 = grid
            .iter()
            .map(|(p, w)| w * field.eval_ambient(p.ambient()).norm_squared())
            .sum();
        certificates.push(h / norm);
    }
    Ok(RayleighBound {
        map: phi.name().to_string(),
        dictionary_size: d,
        retained: keep.len(),
        index_lower_bound: certificates.iter().filter(|c| **c < 0.0).count(),
        unconfirmed: certificates.iter().filter(|c| **c >= 0.0).count(),
        certificates,
        ritz_values: ritz,
        zero_tolerance: tol,
    })
}
