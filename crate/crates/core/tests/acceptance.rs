use clap::Parser;
use hmjacobi::catalog;
use hmjacobi::cli::{self, Cli};
use hmjacobi::geometry::{Manifold, Vector};
use hmjacobi::jacobi::{self, Section};
use hmjacobi::maps::SmoothMap;
use hmjacobi::rigidity::{self, SkewGenerator};
use hmjacobi::spectral;
use hmjacobi::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: f64) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t.as_secs_f64() < limit, || format!("took {:.1}s, budget {limit}s", t.as_secs_f64()))?;
    Ok(t)
}

fn map(id: &str) -> SmoothMap {
    catalog::map(id).unwrap()
}

fn grid(phi: &SmoothMap, res: usize) -> Vec<(hmjacobi::Point, f64)> {
    phi.domain().quadrature_grid(res).unwrap()
}

fn sign_calibration() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        let phi = map(&format!("identity:s{n}"));
        let sections: Vec<Section> = catalog::so_basis(n + 1)
            .into_iter()
            .map(|((i, j), _)| catalog::section(&format!("killing:{i}{j}"), &phi).unwrap())
            .collect();
        for (s, r) in sections.iter().zip(jacobi::jacobi_sup_many(&sections, &grid(&phi, 64))) {
            ensure(r < 1e-5, || format!("S^{n} {}: {r:.2e}", s.name()))?;
            worst = worst.max(r);
        }
    }
    let t = within(start, 5.0)?;
    Ok(format!("max |J(V)| {worst:.1e} over 13 Killing fields, {:.2}s", t.as_secs_f64()))
}

fn composition_suite() -> Outcome {
    let start = Instant::now();
    let triples = [
        ("circle:k=2", "great-circle:k=1", "normal:m=1"),
        ("circle:k=3", "great-circle:k=2", "tangent-sin:m=2"),
        ("circle:k=2", "great-circle:k=3", "normal-sin:m=3"),
        ("circle:k=1", "great-circle:k=2", "normal:m=0"),
        ("circle:k=2", "great-circle:k=2", "tangent:m=1"),
        ("circle:k=3", "great-circle:k=1", "normal:m=4"),
        ("hopf", "identity:s2", "killing:x"),
        ("hopf", "identity:s2", "killing:y"),
        ("hopf", "identity:s2", "killing:z"),
        ("zpow:k=2", "identity:s2", "killing:x"),
        ("zpow:k=2", "identity:s2", "killing:z"),
    ];
    let mut worst = 0.0f64;
    for (phi_id, psi_id, field) in triples {
        let phi = map(phi_id);
        let psi = map(psi_id);
        let v = catalog::section(field, &psi).unwrap();
        let res = if phi.domain().intrinsic_dim() == 1 { 64 } else { 32 };
        let r = jacobi::composition_residuals(&phi, &psi, &v, &grid(&phi, res))
            .map_err(|e| format!("{phi_id} {psi_id} {field}: {e}"))?
            .into_iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max);
        ensure(r < 1e-4, || format!("{phi_id} {psi_id} {field}: {r:.2e}"))?;
        worst = worst.max(r);
    }
    let t = within(start, 60.0)?;
    Ok(format!("{} triples, max residual {worst:.1e}, {:.2}s", triples.len(), t.as_secs_f64()))
}

fn oracle(m_max: usize, k: i64, normal: bool) -> Vec<f64> {
    let mut out = Vec::new();
    for m in 0..=m_max as i64 {
        for _ in 0..if m == 0 { 1 } else { 2 } {
            out.push((m * m) as f64);
            if normal {
                out.push((m * m - k * k) as f64);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn exact_spectra() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 1..=3usize {
        for (id, normal, want) in [
            (format!("circle:k={k}"), false, (0, 1)),
            (format!("great-circle:k={k}"), true, (2 * k - 1, 3)),
        ] {
            let phi = map(&id);
            for m in [8, 10, 12] {
                let r = spectral::spectrum(&phi, m, None).map_err(|e| e.to_string())?;
                ensure((r.index, r.nullity) == want, || {
                    format!("{id} at M={m}: ({}, {})", r.index, r.nullity)
                })?;
                for (a, b) in r.eigenvalues.iter().zip(oracle(m, k as i64, normal)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    ensure(worst < 1e-8, || format!("oracle deviation {worst:.2e}"))?;
    let t = within(start, 10.0)?;
    Ok(format!("oracle deviation {worst:.1e}, {:.2}s", t.as_secs_f64()))
}

fn corollary() -> Outcome {
    let start = Instant::now();
    let mut worst_form = 0.0f64;
    let mut worst_cross = 0.0f64;
    for l in 1..=3usize {
        for k in 1..=3usize {
            let phi = map(&format!("circle:k={l}"));
            let psi = map(&format!("great-circle:k={k}"));
            let r = spectral::corollary_check(&phi, &psi, 2 * k * l + 4).map_err(|e| e.to_string())?;
            ensure(
                r.pass
                    && r.index_composite == 2 * k * l - 1
                    && r.index_psi == 2 * k - 1
                    && r.nullity_composite == 3
                    && r.nullity_psi == 3,
                || format!("(l,k)=({l},{k}): {r:?}"),
            )?;
            let g = grid(&phi, 128);
            let modes: Vec<(Section, f64)> = [("normal:m=0", 0), ("normal-sin:m=1", 1), ("tangent:m=2", 2)]
                .into_iter()
                .map(|(f, m)| {
                    let normal = f.starts_with("normal");
                    let alpha = (m * m) as f64 - if normal { (k * k) as f64 } else { 0.0 };
                    (catalog::section(f, &psi).unwrap(), alpha)
                })
                .collect();
            for (v, alpha) in &modes {
                let f = spectral::transported_field_form(&phi, v, *alpha, &g).map_err(|e| e.to_string())?;
                let err = if f.expected == 0.0 { f.form.abs() } else { f.relative_error };
                ensure(err < 1e-4, || format!("(l,k)=({l},{k}) {}: {f:?}", v.name()))?;
                worst_form = worst_form.max(err);
            }
            for i in 0..modes.len() {
                for j in i + 1..modes.len() {
                    let c = spectral::transported_cross_term(&phi, &modes[i].0, &modes[j].0, &g)
                        .map_err(|e| e.to_string())?
                        .abs();
                    ensure(c < 1e-5, || format!("(l,k)=({l},{k}) cross term {c:.2e}"))?;
                    worst_cross = worst_cross.max(c);
                }
            }
        }
    }
    let t = within(start, 30.0)?;
    Ok(format!(
        "nine pairs exact, form error {worst_form:.1e}, cross terms {worst_cross:.1e}, {:.2}s",
        t.as_secs_f64()
    ))
}

fn energies() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let phi = map(&format!("great-circle:k={k}"));
        let e = jacobi::energy(&phi, &grid(&phi, 64));
        let d = (e - PI * (k * k) as f64).abs();
        ensure(d < 1e-6, || format!("k={k}: E={e}"))?;
        worst = worst.max(d);
    }
    let id = map("identity:s2");
    let e = jacobi::energy(&id, &grid(&id, 128));
    let rel = (e - 4.0 * PI).abs() / (4.0 * PI);
    ensure(rel < 1e-3, || format!("id:S2 E={e}"))?;
    Ok(format!("great circles within {worst:.1e}, id:S2 relative {rel:.1e}"))
}

fn toth_consistency() -> Outcome {
    let pairs = [
        ("great-circle:k=1", "tangent:m=0", true),
        ("great-circle:k=1", "zero", true),
        ("circle:k=2", "killing:z", true),
        ("hopf", "killing:z", false),
        ("identity:s3", "killing:complex", true),
        ("identity:s2", "killing:z", false),
        ("great-circle:k=1", "normal:m=0", false),
        ("identity:s1", "tangent:m=1", false),
    ];
    let mut negative = false;
    for (m, f, expect) in pairs {
        let phi = map(m);
        let v = catalog::section(f, &phi).unwrap();
        let res = if phi.domain().intrinsic_dim() == 1 { 32 } else { 10 };
        let c = rigidity::harmonic_variation_check(&v, &grid(&phi, res), &[0.1, 0.5, 1.0], 8)
            .map_err(|e| format!("{m} {f}: {e}"))?;
        ensure(c.agree && c.criteria_pass == expect, || format!("{m} {f}: {c:?}"))?;
        if m == "identity:s2" {
            negative = c.report.in_k && !c.report.in_h && c.max_flow_tension >= 1e-4;
        }
    }
    ensure(negative, || "Killing field on id:S2 was not certified negative".into())?;
    Ok(format!("{} pairs agree, id:S2 negative certified", pairs.len()))
}

fn infinitesimal_rigidity() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases: Vec<(&str, usize)> = vec![("hopf", 8)];
    cases.extend([("circle:k=1", 32), ("circle:k=2", 32), ("circle:k=3", 32)]);
    for (id, res) in &cases {
        let phi = map(id);
        let g = grid(&phi, *res);
        let dim = phi.codomain().ambient_dim();
        for ((i, j), k) in catalog::so_basis(dim) {
            let v = catalog::section(&format!("killing:{i}{j}"), &phi).unwrap();
            let fit = rigidity::fit_skew_generator(&v, &g).map_err(|e| format!("{id} {i}{j}: {e}"))?;
            let err = fit.fit_residual.max((fit.generator.matrix() - k).amax());
            ensure(err < 1e-8, || format!("{id} {i}{j}: {err:.2e}"))?;
            worst = worst.max(err);
        }
    }
    let eps = 1e-2;
    let mut ratios = Vec::new();
    for (id, res) in [("hopf", 8), ("circle:k=2", 32)] {
        let phi = map(id);
        let g = grid(&phi, res);
        let base = catalog::section("killing:z", &phi).unwrap();
        let n = phi.codomain().clone();
        let e1 = Vector::from_fn(n.ambient_dim(), |r, _| if r == 1 { 1.0 } else { 0.0 });
        let bump = {
            let phi = phi.clone();
            move |x: &Vector| {
                let s = if x.len() == 4 { x[0] * x[2] - x[1] * x[3] } else { x[0] * x[0] - x[1] * x[1] };
                n.project_tangent(&phi.eval_ambient(x), &e1) * s
            }
        };
        let rms = (g.iter().map(|(p, _)| bump(p.ambient()).norm_squared()).sum::<f64>() / g.len() as f64).sqrt();
        let perturbed = Section::new("perturbed", phi.clone(), move |x| base.eval_ambient(x) + bump(x) * (eps / rms));
        let fit = rigidity::fit_skew_generator(&perturbed, &g).map_err(|e| e.to_string())?;
        let ratio = fit.fit_residual / eps;
        ensure((0.3..=3.0).contains(&ratio), || format!("{id}: residual {:.2e}", fit.fit_residual))?;
        ratios.push(ratio);
    }
    Ok(format!(
        "recovery within {worst:.1e}, perturbed residual/eps {:.2} and {:.2}",
        ratios[0], ratios[1]
    ))
}

fn local_rigidity() -> Outcome {
    let t = [0.3, 1.0, 2.5];
    let cases = [
        ("circle:k=1", "killing:z", None),
        ("circle:k=2", "killing:z,c=1.5", None),
        ("circle:k=3", "killing:z", None),
        ("identity:s3", "killing:complex", None),
        ("great-circle:k=1,n=3", "killing:complex2", Some("killing:complex2")),
        ("great-circle:k=2,n=3", "killing:complex2", Some("killing:complex2")),
    ];
    let mut mismatch = 0.0f64;
    let mut geodesic = 0.0f64;
    for (id, field, gen) in cases {
        let phi = map(id);
        let v = catalog::section(field, &phi).unwrap();
        let x = gen.map(|g| {
            SkewGenerator::from_matrix(&catalog::killing_generator(g, phi.codomain().ambient_dim()).unwrap()).unwrap()
        });
        let res = if phi.domain().intrinsic_dim() == 1 { 32 } else { 8 };
        let l = rigidity::local_rigidity_check(&v, x.as_ref(), &grid(&phi, res), &t, 12)
            .map_err(|e| format!("{id} {field}: {e}"))?;
        ensure(l.flow_mismatch < 1e-6 && l.geodesic_residual < 1e-6, || format!("{id} {field}: {l:?}"))?;
        mismatch = mismatch.max(l.flow_mismatch);
        geodesic = geodesic.max(l.geodesic_residual);
    }
    for (id, field) in [("hopf", "killing:z"), ("great-circle:k=1", "killing:z")] {
        let phi = map(id);
        let v = catalog::section(field, &phi).unwrap();
        let res = if phi.domain().intrinsic_dim() == 1 { 32 } else { 6 };
        let r = rigidity::local_rigidity_check(&v, None, &grid(&phi, res), &t, 8);
        ensure(matches!(r, Err(Error::NotApplicable(_))), || format!("{id}: {r:?}"))?;
    }
    Ok(format!(
        "{} odd-n cases, flow mismatch {mismatch:.1e}, geodesic residual {geodesic:.1e}, even n rejected",
        cases.len()
    ))
}

fn random_point(m: &Manifold, rng: &mut ChaCha8Rng) -> hmjacobi::Point {
    let n = m.ambient_dim();
    let ambient = if m.is_sphere() {
        loop {
            let v = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            if v.norm() > 0.2 && v.norm() < 1.0 {
                break v.normalize();
            }
        }
    } else {
        Vector::from_fn(n, |_, _| rng.random_range(0.0..2.0 * PI))
    };
    m.point(ambient).unwrap()
}

fn report_bytes(args: &[&str]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let path = out.to_str().unwrap().to_string();
    let argv = std::iter::once("hmjacobi").chain(args.iter().copied()).chain(["--out", &path]);
    cli::main_with(Cli::parse_from(argv));
    std::fs::read(out).unwrap_or_default()
}

fn cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240917);
    let mut worst = [0.0f64; 3];
    let manifolds = [
        Manifold::unit_sphere(1),
        Manifold::unit_sphere(2),
        Manifold::unit_sphere(3),
        catalog::standard_torus(),
    ];
    for m in &manifolds {
        for _ in 0..100 {
            let p = random_point(m, &mut rng);
            let d = m.christoffel_at(&p).unwrap().max_abs_diff(&m.christoffel_fd_at(&p).unwrap());
            ensure(d < 1e-6, || format!("{} Christoffels at {:?}: {d:.2e}", m.label(), p.ambient()))?;
            worst[0] = worst[0].max(d);
        }
    }
    let maps = [
        "circle:k=3",
        "great-circle:k=2",
        "great-circle:k=1,n=3",
        "latitude:theta=1",
        "hopf",
        "zpow:k=2",
        "identity:s2",
        "identity:s3",
        "identity:t2",
        "torus-proj:1",
        "constant:s2",
    ];
    for id in maps {
        let phi = map(id);
        for _ in 0..100 {
            let p = random_point(phi.domain(), &mut rng);
            for e in phi.domain().orthonormal_frame(&p).unwrap() {
                let a = phi.differential_at(&p, &e).unwrap();
                let b = phi.differential_fd_at(&p, &e).unwrap();
                let d = (a.ambient() - b.ambient()).norm();
                ensure(d < 1e-6, || format!("{id} differential at {:?}: {d:.2e}", p.ambient()))?;
                worst[1] = worst[1].max(d);
            }
        }
    }
    let sections = [
        ("great-circle:k=2", "normal:m=1"),
        ("great-circle:k=3", "tangent-sin:m=2"),
        ("latitude:theta=1", "killing:x"),
        ("hopf", "killing:x"),
        ("zpow:k=2", "killing:y"),
        ("identity:s2", "killing:z"),
        ("identity:s3", "killing:complex"),
        ("circle:k=2", "killing:z"),
    ];
    for (id, field) in sections {
        let phi = map(id);
        let v = catalog::section(field, &phi).unwrap();
        for _ in 0..100 {
            let p = random_point(phi.domain(), &mut rng);
            for e in phi.domain().orthonormal_frame(&p).unwrap() {
                let a = jacobi::pullback_derivative_at(&v, &p, &e).unwrap();
                let b = jacobi::pullback_derivative_fd_at(&v, &p, &e).unwrap();
                let d = (a.ambient() - b.ambient()).norm();
                ensure(d < 1e-6, || format!("{id} {field} at {:?}: {d:.2e}", p.ambient()))?;
                worst[2] = worst[2].max(d);
            }
        }
    }
    for args in [
        &["spectrum", "--map", "great-circle:k=2", "--mmax", "8"][..],
        &["verify-theorem", "--phi", "hopf", "--psi", "identity:s2", "--field", "killing:x", "--grid", "8"][..],
        &["rigidity", "--phi", "hopf", "--field", "killing:z", "--fit", "--grid", "8"][..],
    ] {
        let a = report_bytes(args);
        let b = report_bytes(args);
        ensure(!a.is_empty() && a == b, || format!("{} report differs between runs", args[0]))?;
    }
    Ok(format!(
        "Christoffels {:.1e}, differentials {:.1e}, pullback derivatives {:.1e}, reports byte-identical",
        worst[0], worst[1], worst[2]
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("sign calibration", sign_calibration),
        ("composition residuals", composition_suite),
        ("exact spectra", exact_spectra),
        ("index and nullity under composition", corollary),
        ("energies", energies),
        ("harmonic variation criterion", toth_consistency),
        ("infinitesimal rigidity", infinitesimal_rigidity),
        ("local rigidity", local_rigidity),
        ("cross-validation", cross_validation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
