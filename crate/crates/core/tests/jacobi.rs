use hmjacobi::catalog;
use hmjacobi::geometry::Vector;
use hmjacobi::jacobi::{self, Section, VectorField};
use hmjacobi::Error;
use std::f64::consts::PI;

fn unit(v: Vec<f64>) -> Vector {
    Vector::from_vec(v).normalize()
}

#[test]
fn killing_fields_are_jacobi_fields_of_identities() {
    for (id, dim) in [("identity:s1", 1usize), ("identity:s2", 2), ("identity:s3", 3)] {
        let phi = catalog::map(id).unwrap();
        let grid = phi.domain().quadrature_grid(8).unwrap();
        let sections: Vec<Section> = catalog::so_basis(dim + 1)
            .into_iter()
            .map(|((i, j), _)| catalog::section(&format!("killing:{i}{j}"), &phi).unwrap())
            .collect();
        let sups = jacobi::jacobi_sup_many(&sections, &grid);
        for (s, r) in sections.iter().zip(&sups) {
            assert!(*r < 1e-8, "{id} {}: {r}", s.name());
        }
        // the batched and single-section routes agree
        assert!((jacobi::jacobi_sup(&sections[0], &grid) - sups[0]).abs() < 1e-12);
    }
}

#[test]
fn fourier_modes_along_great_circles_are_eigenfields() {
    for k in 1..=3 {
        let phi = catalog::map(&format!("great-circle:k={k}")).unwrap();
        for m in 0..=3 {
            for (kind, eig) in [("normal", (m * m - k * k) as f64), ("tangent", (m * m) as f64)] {
                let v = catalog::section(&format!("{kind}:m={m}"), &phi).unwrap();
                for (p, _) in phi.domain().quadrature_grid(7).unwrap() {
                    let j = jacobi::jacobi_ambient(&v, p.chart(), p.ambient());
                    let want = v.eval_ambient(p.ambient()) * eig;
                    assert!((j - want).norm() < 1e-6, "k={k} {kind} m={m}");
                }
            }
        }
    }
}

#[test]
fn pullback_derivative_routes_agree() {
    let cases = [
        ("hopf", "killing:x"),
        ("zpow:k=2", "killing:y"),
        ("great-circle:k=2", "normal:m=1"),
        ("identity:s3", "killing:complex"),
    ];
    for (map_id, field) in cases {
        let phi = catalog::map(map_id).unwrap();
        let v = catalog::section(field, &phi).unwrap();
        for (p, _) in phi.domain().quadrature_grid(6).unwrap().iter().step_by(3) {
            let frame = phi.domain().orthonormal_frame(p).unwrap();
            for e in &frame {
                let a = jacobi::pullback_derivative_at(&v, p, e).unwrap();
                let b = jacobi::pullback_derivative_fd_at(&v, p, e).unwrap();
                let c = jacobi::pullback_derivative_chart_at(&v, p, e).unwrap();
                assert!((a.ambient() - b.ambient()).norm() < 1e-6, "{map_id} {field}");
                assert!((a.ambient() - c.ambient()).norm() < 1e-6, "{map_id} {field}");
            }
        }
    }
}

#[test]
fn composition_identity_holds_on_small_grids() {
    let cases = [
        ("circle:k=2", "great-circle:k=1", "normal:m=1", 16),
        ("circle:k=3", "great-circle:k=2", "tangent-sin:m=2", 16),
        ("hopf", "identity:s2", "killing:z", 6),
        ("zpow:k=2", "identity:s2", "killing:x", 8),
    ];
    for (phi_id, psi_id, field, res) in cases {
        let phi = catalog::map(phi_id).unwrap();
        let psi = catalog::map(psi_id).unwrap();
        let v = catalog::section(field, &psi).unwrap();
        let grid = phi.domain().quadrature_grid(res).unwrap();
        for r in jacobi::composition_residuals(&phi, &psi, &v, &grid).unwrap() {
            assert!(r.passes(), "{phi_id} {psi_id} {field}: {r:?}");
        }
    }
}

#[test]
fn composition_scales_non_jacobi_fields_by_dilation_squared() {
    // V is not a Jacobi field along ψ, so both sides are nonzero
    let phi = catalog::map("circle:k=2").unwrap();
    let psi = catalog::map("great-circle:k=1").unwrap();
    let v = catalog::section("normal:m=3", &psi).unwrap();
    let p = phi.domain().point(unit(vec![0.2, 0.9])).unwrap();
    let r = jacobi::composition_residual_at(&phi, &psi, &v, &p).unwrap();
    assert!(r.rhs_norm > 1.0 && r.residual < 1e-6);
    assert!((r.dilation - 2.0).abs() < 1e-12);
}

#[test]
fn section_along_the_wrong_map_is_rejected() {
    let phi = catalog::map("circle:k=2").unwrap();
    let psi = catalog::map("great-circle:k=1").unwrap();
    let other = catalog::map("great-circle:k=1,n=3").unwrap();
    let v = catalog::section("normal:m=1", &other).unwrap();
    let p = phi.domain().point(unit(vec![1.0, 0.0])).unwrap();
    assert!(matches!(
        jacobi::composition_residual_at(&phi, &psi, &v, &p),
        Err(Error::DomainMismatch(_))
    ));
}

#[test]
fn energies_of_model_maps() {
    for k in 1..=3 {
        let phi = catalog::map(&format!("great-circle:k={k}")).unwrap();
        let e = jacobi::energy(&phi, &phi.domain().quadrature_grid(64).unwrap());
        assert!((e - PI * (k * k) as f64).abs() < 1e-9);
    }
    let id = catalog::map("identity:s2").unwrap();
    let e = jacobi::energy(&id, &id.domain().quadrature_grid(64).unwrap());
    assert!((e - 4.0 * PI).abs() / (4.0 * PI) < 1e-3);
}

#[test]
fn hessian_form_is_symmetric_and_matches_fourier_oracle() {
    let phi = catalog::map("great-circle:k=2").unwrap();
    let grid = phi.domain().quadrature_grid(64).unwrap();
    let a = catalog::section("normal:m=1", &phi).unwrap();
    let b = catalog::section("normal:m=3", &phi).unwrap();
    let c = Section::combination("a+b", &[a.clone(), b.clone()], &[1.0, 0.5]).unwrap();
    let ab = jacobi::hessian_form(&a, &c, &grid).unwrap();
    let ba = jacobi::hessian_form(&c, &a, &grid).unwrap();
    assert!((ab - ba).abs() < 1e-6);
    // ∫ (m² - k²) cos²(mθ) = (1 - 4) π for m = 1
    let aa = jacobi::hessian_form(&a, &a, &grid).unwrap();
    assert!((aa + 3.0 * PI).abs() < 1e-6, "{aa}");
}

#[test]
fn non_harmonic_base_map_is_flagged() {
    let phi = catalog::map("latitude:theta=1").unwrap();
    let v = catalog::section("killing:z", &phi).unwrap();
    let p = phi.domain().point(unit(vec![1.0, 1.0])).unwrap();
    let j = jacobi::jacobi_apply_at(&v, &p).unwrap();
    assert!(j.not_harmonic);
    assert!((j.tension_norm - 1f64.sin() * 1f64.cos()).abs() < 1e-8);
}

#[test]
fn trace_condition_of_rotation_fields() {
    let phi = catalog::map("great-circle:k=2").unwrap();
    let v = catalog::section("tangent:m=0", &phi).unwrap();
    let id = catalog::map("identity:s1").unwrap();
    let w = catalog::section("tangent:m=1", &id).unwrap();
    for (p, _) in phi.domain().quadrature_grid(12).unwrap() {
        assert!(jacobi::trace_dphi_nabla(&v, p.chart(), p.ambient()).abs() < 1e-8);
        // f = cos θ gives trace f' = -sin θ
        let t = p.ambient()[1].atan2(p.ambient()[0]);
        assert!((jacobi::trace_dphi_nabla(&w, p.chart(), p.ambient()) + t.sin()).abs() < 1e-8);
    }
}

#[test]
fn vector_fields_without_derivative_fall_back_to_differences() {
    let s2 = hmjacobi::Manifold::unit_sphere(2);
    let k = catalog::plane_generator(3, 0, 1);
    let k2 = k.clone();
    let plain = VectorField::new("rot", s2.clone(), move |y| &k2 * y);
    let exact = VectorField::linear("rot", s2, k);
    let y = unit(vec![0.3, -0.5, 0.8]);
    let w = Vector::from_vec(vec![0.5, 0.3, 0.0]);
    assert!((plain.derivative_ambient(&y, &w) - exact.derivative_ambient(&y, &w)).norm() < 1e-8);
    let id = catalog::map("identity:s2").unwrap();
    let s = Section::from_field(&plain, &id).unwrap();
    assert!(jacobi::jacobi_sup(&s, &id.domain().quadrature_grid(6).unwrap()) < 1e-6);
}
