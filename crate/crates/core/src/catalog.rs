//! Built-in maps and fields, addressed by stable string ids.
//!
//! Map ids: `circle:k=K`, `great-circle:k=K[,n=N]`, `latitude:theta=T`, `hopf`,
//! `zpow:k=K`, `identity:sN` (N = 1, 2, 3), `identity:t2`, `torus-proj:i`,
//! `constant:s2`.
//!
//! Field ids: `killing:x|y|z|IJ|complex|complex2[,c=C]`, `zero`, and for maps
//! with circle domain `normal:m=M`, `normal-sin:m=M`, `tangent:m=M`,
//! `tangent-sin:m=M`.

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Matrix, Vector};
use crate::jacobi::{Section, VectorField};
use crate::maps::SmoothMap;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub domain: &'static str,
    pub codomain: &'static str,
    pub harmonic: bool,
    pub morphism: bool,
    pub fibers: bool,
}

pub fn entries() -> Vec<CatalogEntry> {
    let e = |id, domain, codomain, harmonic, morphism, fibers| CatalogEntry {
        id,
        domain,
        codomain,
        harmonic,
        morphism,
        fibers,
    };
    vec![
        e("circle:k=K", "S^1", "S^1", true, true, true),
        e("great-circle:k=K[,n=N]", "S^1", "S^N", true, false, true),
        e("latitude:theta=T", "S^1", "S^2", false, false, true),
        e("hopf", "S^3", "S^2", true, true, true),
        e("zpow:k=K", "S^2", "S^2", true, true, true),
        e("identity:sN", "S^N", "S^N", true, true, true),
        e("identity:t2", "T^2", "T^2", true, true, true),
        e("torus-proj:i", "T^2", "S^1", true, true, true),
        e("constant:s2", "S^2", "S^2", true, true, false),
    ]
}

pub fn field_ids() -> Vec<&'static str> {
    vec![
        "killing:x|y|z|IJ|complex|complex2[,c=C]",
        "zero",
        "normal:m=M",
        "normal-sin:m=M",
        "tangent:m=M",
        "tangent-sin:m=M",
    ]
}

fn split_id(id: &str) -> (&str, &str) {
    match id.split_once(':') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (id.trim(), ""),
    }
}

fn params(id: &str, rest: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::UnknownCatalogId(id.to_string()))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn int_param(id: &str, p: &BTreeMap<String, String>, key: &str, default: Option<i64>) -> Result<i64> {
    match p.get(key) {
        Some(v) => v
            .parse::<i64>()
            .map_err(|_| Error::UnknownCatalogId(id.to_string())),
        None => default.ok_or_else(|| Error::UnknownCatalogId(id.to_string())),
    }
}

fn real_param(id: &str, p: &BTreeMap<String, String>, key: &str, default: Option<f64>) -> Result<f64> {
    match p.get(key) {
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::UnknownCatalogId(id.to_string())),
        None => default.ok_or_else(|| Error::UnknownCatalogId(id.to_string())),
    }
}

fn only_keys(id: &str, p: &BTreeMap<String, String>, keys: &[&str]) -> Result<()> {
    if p.keys().all(|k| keys.contains(&k.as_str())) {
        Ok(())
    } else {
        Err(Error::UnknownCatalogId(id.to_string()))
    }
}

fn rotate_plane(x: &Vector, i: usize, j: usize, angle: f64) -> Vector {
    let (s, c) = angle.sin_cos();
    let mut y = x.clone();
    y[i] = c * x[i] - s * x[j];
    y[j] = s * x[i] + c * x[j];
    y
}

fn cyclic_fibers(k: usize) -> impl Fn(&Vector, usize) -> Vec<Vector> + Send + Sync {
    move |x, _| (0..k).map(|j| rotate_plane(x, 0, 1, 2.0 * PI * j as f64 / k as f64)).collect()
}

fn trivial_fibers(x: &Vector, _: usize) -> Vec<Vector> {
    vec![x.clone()]
}

/// `z^k` on the unit circle, padded with zeros to `dim` ambient coordinates.
fn winding_map(name: String, k: i64, codomain: Manifold) -> SmoothMap {
    let dim = codomain.ambient_dim();
    SmoothMap::new(name, Manifold::unit_sphere(1), codomain, move |x| {
        let w = Complex64::new(x[0], x[1]).powi(k as i32);
        let mut y = Vector::zeros(dim);
        y[0] = w.re;
        y[1] = w.im;
        y
    })
    .with_jacobian(move |x| {
        let d = Complex64::new(x[0], x[1]).powi(k as i32 - 1) * k as f64;
        let mut j = Matrix::zeros(dim, 2);
        j[(0, 0)] = d.re;
        j[(0, 1)] = -d.im;
        j[(1, 0)] = d.im;
        j[(1, 1)] = d.re;
        j
    })
    .with_fibers(cyclic_fibers(k as usize))
}

fn hopf() -> SmoothMap {
    SmoothMap::new("hopf", Manifold::unit_sphere(3), Manifold::unit_sphere(2), |x| {
        Vector::from_vec(vec![
            2.0 * (x[0] * x[2] + x[1] * x[3]),
            2.0 * (x[1] * x[2] - x[0] * x[3]),
            x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3],
        ])
    })
    .with_jacobian(|x| {
        Matrix::from_row_slice(
            3,
            4,
            &[
                2.0 * x[2], 2.0 * x[3], 2.0 * x[0], 2.0 * x[1],
                -2.0 * x[3], 2.0 * x[2], 2.0 * x[1], -2.0 * x[0],
                2.0 * x[0], 2.0 * x[1], -2.0 * x[2], -2.0 * x[3],
            ],
        )
    })
    .with_fibers(|x, count| {
        (0..count.max(1))
            .map(|j| {
                let a = 2.0 * PI * j as f64 / count.max(1) as f64;
                rotate_plane(&rotate_plane(x, 0, 1, a), 2, 3, a)
            })
            .collect()
    })
}

/// Homogeneous coordinates `[a : b]` of the stereographic image `z = a / b`
/// (projection from `(0,0,1)`), with their derivatives along `e_j`.
fn homogeneous(x: &Vector) -> (Complex64, Complex64, [(Complex64, Complex64); 3]) {
    if x[2] <= 0.0 {
        let a = Complex64::new(x[0], x[1]);
        let b = Complex64::new(1.0 - x[2], 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        (a, b, [(one, zero), (i, zero), (zero, -one)])
    } else {
        let a = Complex64::new(1.0 + x[2], 0.0);
        let b = Complex64::new(x[0], -x[1]);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        (a, b, [(zero, one), (zero, -i), (one, zero)])
    }
}

fn zpow(k: i64) -> SmoothMap {
    let s2 = Manifold::unit_sphere(2);
    SmoothMap::new(format!("zpow:k={k}"), s2.clone(), s2, move |x| {
        let (a, b, _) = homogeneous(x);
        let (pa, pb) = (a.powi(k as i32), b.powi(k as i32));
        let s = pa.norm_sqr() + pb.norm_sqr();
        let w = pa * pb.conj() * 2.0;
        Vector::from_vec(vec![w.re / s, w.im / s, (pa.norm_sqr() - pb.norm_sqr()) / s])
    })
    .with_jacobian(move |x| {
        let (a, b, da) = homogeneous(x);
        let kk = k as i32;
        let (pa, pb) = (a.powi(kk), b.powi(kk));
        let (ka, kb) = (a.powi(kk - 1) * k as f64, b.powi(kk - 1) * k as f64);
        let s = pa.norm_sqr() + pb.norm_sqr();
        let w = pa * pb.conj() * 2.0;
        let n = [w.re, w.im, pa.norm_sqr() - pb.norm_sqr()];
        let mut jac = Matrix::zeros(3, 3);
        for (j, (dab, dbb)) in da.iter().enumerate() {
            let dpa = ka * dab;
            let dpb = kb * dbb;
            let dsa = 2.0 * (pa.conj() * dpa).re;
            let dsb = 2.0 * (pb.conj() * dpb).re;
            let ds = dsa + dsb;
            let dw = (dpa * pb.conj() + pa * dpb.conj()) * 2.0;
            let dn = [dw.re, dw.im, dsa - dsb];
            for r in 0..3 {
                jac[(r, j)] = dn[r] / s - n[r] * ds / (s * s);
            }
        }
        jac
    })
    .with_fibers(cyclic_fibers(k as usize))
}

fn identity(m: Manifold, name: String) -> SmoothMap {
    SmoothMap::new(name, m.clone(), m, |x| x.clone())
        .with_differential(|_, v| v.clone())
        .with_fibers(trivial_fibers)
}

pub fn standard_torus() -> Manifold {
    Manifold::flat_torus(vec![2.0 * PI, 2.0 * PI]).expect("positive periods")
}

/// Resolves a map id.
pub fn map(id: &str) -> Result<SmoothMap> {
    let unknown = || Error::UnknownCatalogId(id.to_string());
    let (name, rest) = split_id(id);
    match name {
        "circle" => {
            let p = params(id, rest)?;
            only_keys(id, &p, &["k"])?;
            let k = int_param(id, &p, "k", None)?;
            if !(1..=64).contains(&k) {
                return Err(Error::InvalidArgument(format!("winding number must lie in 1..=64 (got {k})")));
            }
            Ok(winding_map(format!("circle:k={k}"), k, Manifold::unit_sphere(1)))
        }
        "great-circle" => {
            let p = params(id, rest)?;
            only_keys(id, &p, &["k", "n"])?;
            let k = int_param(id, &p, "k", None)?;
            let n = int_param(id, &p, "n", Some(2))?;
            if !(1..=64).contains(&k) || !(2..=8).contains(&n) {
                return Err(Error::InvalidArgument(format!(
                    "great-circle needs 1 <= k <= 64 and 2 <= n <= 8 (got k={k}, n={n})"
                )));
            }
            let name = if n == 2 {
                format!("great-circle:k={k}")
            } else {
                format!("great-circle:k={k},n={n}")
            };
            Ok(winding_map(name, k, Manifold::unit_sphere(n as usize)))
        }
        "latitude" => {
            let p = params(id, rest)?;
            only_keys(id, &p, &["theta"])?;
            let t = real_param(id, &p, "theta", None)?;
            if !(t > 0.0 && t < PI) {
                return Err(Error::InvalidArgument(format!("latitude needs 0 < theta < pi (got {t})")));
            }
            let (s, c) = t.sin_cos();
            Ok(SmoothMap::new(
                format!("latitude:theta={t}"),
                Manifold::unit_sphere(1),
                Manifold::unit_sphere(2),
                move |x| Vector::from_vec(vec![s * x[0], s * x[1], c]),
            )
            .with_jacobian(move |_| Matrix::from_row_slice(3, 2, &[s, 0.0, 0.0, s, 0.0, 0.0]))
            .with_fibers(trivial_fibers))
        }
        "hopf" if rest.is_empty() => Ok(hopf()),
        "zpow" => {
            let p = params(id, rest)?;
            only_keys(id, &p, &["k"])?;
            let k = int_param(id, &p, "k", None)?;
            if !(1..=16).contains(&k) {
                return Err(Error::InvalidArgument(format!("zpow needs 1 <= k <= 16 (got {k})")));
            }
            Ok(zpow(k))
        }
        "identity" => match rest {
            "s1" | "s2" | "s3" => {
                let n: usize = rest[1..].parse().map_err(|_| unknown())?;
                Ok(identity(Manifold::unit_sphere(n), format!("identity:{rest}")))
            }
            "t2" => Ok(identity(standard_torus(), "identity:t2".into())),
            _ => Err(unknown()),
        },
        "torus-proj" => {
            let i: usize = rest.parse().map_err(|_| unknown())?;
            if i > 1 {
                return Err(unknown());
            }
            let other = 1 - i;
            Ok(SmoothMap::new(
                format!("torus-proj:{i}"),
                standard_torus(),
                Manifold::unit_sphere(1),
                move |x| Vector::from_vec(vec![x[i].cos(), x[i].sin()]),
            )
            .with_jacobian(move |x| {
                let mut j = Matrix::zeros(2, 2);
                j[(0, i)] = -x[i].sin();
                j[(1, i)] = x[i].cos();
                j
            })
            .with_fibers(move |x, count| {
                (0..count.max(1))
                    .map(|j| {
                        let mut y = x.clone();
                        y[other] = 2.0 * PI * j as f64 / count.max(1) as f64;
                        y
                    })
                    .collect()
            }))
        }
        "constant" if rest == "s2" => {
            let s2 = Manifold::unit_sphere(2);
            Ok(
                SmoothMap::new("constant:s2", s2.clone(), s2, |_| Vector::from_vec(vec![0.0, 0.0, 1.0]))
                    .with_jacobian(|_| Matrix::zeros(3, 3)),
            )
        }
        _ => Err(unknown()),
    }
}

/// The generator of the rotation taking `e_i` towards `e_j`: `K e_i = e_j`, `K e_j = -e_i`.
pub fn plane_generator(dim: usize, i: usize, j: usize) -> Matrix {
    let mut k = Matrix::zeros(dim, dim);
    k[(j, i)] = 1.0;
    k[(i, j)] = -1.0;
    k
}

/// The standard basis of `so(dim)`, ordered by planes `(i, j)` with `i < j`.
pub fn so_basis(dim: usize) -> Vec<((usize, usize), Matrix)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push(((i, j), plane_generator(dim, i, j)));
        }
    }
    out
}

/// The skew matrix `c Σ K_ij` of a `killing:*` id, acting on `R^dim`.
pub fn killing_generator(id: &str, dim: usize) -> Result<Matrix> {
    let unknown = || Error::UnknownCatalogId(id.to_string());
    let (name, rest) = split_id(id);
    if name != "killing" {
        return Err(unknown());
    }
    let mut parts = rest.split(',');
    let which = parts.next().unwrap_or("").trim();
    let p = params(id, &parts.collect::<Vec<_>>().join(","))?;
    only_keys(id, &p, &["c"])?;
    let c = real_param(id, &p, "c", Some(1.0))?;
    let planes: Vec<(usize, usize)> = match which {
        "x" => vec![(1, 2)],
        "y" => vec![(2, 0)],
        "z" => vec![(0, 1)],
        "complex" => vec![(0, 1), (2, 3)],
        "complex2" => vec![(0, 2), (1, 3)],
        digits if digits.len() == 2 && digits.chars().all(|ch| ch.is_ascii_digit()) => {
            let b = digits.as_bytes();
            let (i, j) = ((b[0] - b'0') as usize, (b[1] - b'0') as usize);
            if i == j {
                return Err(unknown());
            }
            vec![(i, j)]
        }
        _ => return Err(unknown()),
    };
    if planes.iter().any(|(i, j)| *i >= dim || *j >= dim) {
        return Err(Error::InvalidArgument(format!(
            "field `{id}` needs at least {} ambient coordinates",
            planes.iter().map(|(i, j)| i.max(j) + 1).max().unwrap_or(0)
        )));
    }
    let mut k = Matrix::zeros(dim, dim);
    for (i, j) in planes {
        k += plane_generator(dim, i, j);
    }
    Ok(k * c)
}

/// Resolves a field id that names a vector field on `manifold`.
pub fn codomain_field(id: &str, manifold: &Manifold) -> Result<VectorField> {
    let unknown = || Error::UnknownCatalogId(id.to_string());
    let (name, rest) = split_id(id);
    match name {
        "zero" if rest.is_empty() => {
            let k = manifold.ambient_dim();
            Ok(VectorField::new("zero", manifold.clone(), move |_| Vector::zeros(k))
                .with_derivative(move |_, _| Vector::zeros(k)))
        }
        "killing" => {
            if !manifold.is_sphere() {
                return Err(Error::InvalidArgument(format!(
                    "Killing fields are built for spheres, not {}",
                    manifold.label()
                )));
            }
            let k = killing_generator(id, manifold.ambient_dim())?;
            Ok(VectorField::linear(id.trim(), manifold.clone(), k))
        }
        _ => Err(unknown()),
    }
}

/// Resolves a field id into a section along `map`.
pub fn section(id: &str, map: &SmoothMap) -> Result<Section> {
    let (name, rest) = split_id(id);
    match name {
        "zero" | "killing" => {
            let f = codomain_field(id, map.codomain())?;
            Section::from_field(&f, map)
        }
        "normal" | "normal-sin" | "tangent" | "tangent-sin" => {
            if map.domain() != &Manifold::unit_sphere(1) {
                return Err(Error::UnsupportedDomain(format!(
                    "`{id}` is defined along maps from the unit circle, not {}",
                    map.domain().label()
                )));
            }
            let p = params(id, rest)?;
            only_keys(id, &p, &["m"])?;
            let m = int_param(id, &p, "m", None)?;
            if m < 0 {
                return Err(Error::InvalidArgument(format!("mode must be nonnegative (got {m})")));
            }
            let sine = name.ends_with("-sin");
            let normal = name.starts_with("normal");
            let codomain = map.codomain().clone();
            if normal && !(codomain.is_sphere() && codomain.intrinsic_dim() >= 2) {
                return Err(Error::InvalidArgument(format!(
                    "normal fields need a sphere of dimension >= 2, not {}",
                    codomain.label()
                )));
            }
            let phi = map.clone();
            Ok(Section::new(id.trim(), map.clone(), move |x| {
                let w = Complex64::new(x[0], x[1]).powi(m as i32);
                let f = if sine { w.im } else { w.re };
                let y = phi.eval_ambient(x);
                let t = phi.differential_ambient(x, &Vector::from_vec(vec![-x[1], x[0]]));
                let t = &t / t.norm();
                if normal {
                    let mut e = Vector::zeros(codomain.ambient_dim());
                    e[2] = 1.0;
                    let mut nu = codomain.project_tangent(&y, &e);
                    nu -= &t * nu.dot(&t);
                    nu.normalize() * f
                } else {
                    t * f
                }
            }))
        }
        _ => Err(Error::UnknownCatalogId(id.to_string())),
    }
}
