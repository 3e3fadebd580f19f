//! Thresholds used to classify numerical results.
//!
//! Every pass/fail decision in the library and in the scenario runner reads
//! from this table, and [`table`] exports it verbatim into report metadata.

use std::collections::BTreeMap;

/// Relative tolerance for accepting a user-supplied point as lying on the manifold.
pub const EMBEDDING: f64 = 1e-9;
/// Chart boxes stop this far (radians) from spherical-coordinate poles.
pub const POLE_MARGIN: f64 = 1e-3;

/// Step for plain central differences (metric derivatives, Christoffel cross-checks).
pub const FD_STEP: f64 = 1e-5;
/// Base step for Richardson-extrapolated derivatives that are differentiated again.
pub const RICHARDSON_STEP: f64 = 1e-3;

/// Singular values at or below this (relative to `max(1, sigma_max)`) span the vertical space.
pub const KERNEL_SINGULAR_VALUE: f64 = 1e-9;
/// Hilbert-Schmidt norm of `dφ` below which a point is critical.
pub const CRITICAL_DIFFERENTIAL: f64 = 1e-8;
/// Points within this factor of the critical threshold are reported as indeterminate.
pub const INDETERMINATE_FACTOR: f64 = 10.0;
/// Horizontal conformality residual, relative to `λ²`.
pub const CONFORMALITY: f64 = 1e-6;
/// Sup-norm of the tension field for a map to count as harmonic.
pub const HARMONIC: f64 = 1e-5;

/// Pointwise residual of the composition identity `J(V∘φ) = λ² J(V)∘φ`.
pub const COMPOSITION: f64 = 1e-4;
/// Dilation below which the composition tolerance is relaxed to `COMPOSITION * (1 + |J V|)`.
pub const NEAR_CRITICAL_DILATION: f64 = 1e-6;

/// Sup-norm of `J V` for `V` to count as a Jacobi field.
pub const JACOBI: f64 = 1e-5;
/// Sup-norm of `trace <dφ, ∇V>` for membership in `K(φ)`.
pub const K_CONDITION: f64 = 1e-6;
/// Relative variation `(max - min) / max` of `|V|` for constant norm.
pub const NORM_CONSTANCY: f64 = 1e-6;
/// Maximal fiber mismatch for a section to count as projectable.
pub const PROJECTABILITY: f64 = 1e-8;
/// Tension threshold applied to the flowed maps `exp(tV)`.
pub const FLOW_TENSION: f64 = 1e-4;
/// Exact-recovery threshold for the so(n+1) least-squares fit.
pub const FIT_RESIDUAL: f64 = 1e-8;
/// Condition number above which the so(n+1) fit is refused.
pub const FIT_CONDITION: f64 = 1e8;
/// Mismatch between `exp(tV)` and the rotation flow `g_t ∘ φ`.
pub const FLOW_MISMATCH: f64 = 1e-6;
/// Residual of `∇_X X` for a constant-norm Killing field.
pub const GEODESIC_FIELD: f64 = 1e-6;

/// Relative factor for the default spectral zero tolerance `1e-7 (1 + |μ_max|)`.
pub const SPECTRAL_ZERO: f64 = 1e-7;

/// Ritz values above `-RAYLEIGH_NOISE * max|ritz|` are not counted as negative (quadrature noise floor).
pub const RAYLEIGH_NOISE: f64 = 1e-2;

/// The full tolerance table, keyed by lower_snake_case names.
pub fn table() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("embedding", EMBEDDING),
        ("pole_margin", POLE_MARGIN),
        ("fd_step", FD_STEP),
        ("richardson_step", RICHARDSON_STEP),
        ("kernel_singular_value", KERNEL_SINGULAR_VALUE),
        ("critical_differential", CRITICAL_DIFFERENTIAL),
        ("indeterminate_factor", INDETERMINATE_FACTOR),
        ("conformality", CONFORMALITY),
        ("harmonic", HARMONIC),
        ("composition", COMPOSITION),
        ("near_critical_dilation", NEAR_CRITICAL_DILATION),
        ("jacobi", JACOBI),
        ("k_condition", K_CONDITION),
        ("norm_constancy", NORM_CONSTANCY),
        ("projectability", PROJECTABILITY),
        ("flow_tension", FLOW_TENSION),
        ("fit_residual", FIT_RESIDUAL),
        ("fit_condition", FIT_CONDITION),
        ("flow_mismatch", FLOW_MISMATCH),
        ("geodesic_field", GEODESIC_FIELD),
        ("spectral_zero", SPECTRAL_ZERO),
        ("rayleigh_noise", RAYLEIGH_NOISE),
    ])
}
