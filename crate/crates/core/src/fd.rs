//! Central finite differences on vector-valued functions of one real parameter.

use nalgebra::DVector;

/// Plain central difference `(f(h) - f(-h)) / 2h`.
pub fn central<F>(f: F, h: f64) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    (f(h) - f(-h)) / (2.0 * h)
}

/// Central difference with one Richardson extrapolation level, `O(h^4)`.
pub fn richardson<F>(f: F, h: f64) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    let coarse = (f(h) - f(-h)) / (2.0 * h);
    let fine = (f(0.5 * h) - f(-0.5 * h)) / h;
    (fine * 4.0 - coarse) / 3.0
}

/// Second central difference with one Richardson extrapolation level.
pub fn richardson_second<F>(f: F, h: f64) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    let f0 = f(0.0);
    let coarse = (f(h) - &f0 * 2.0 + f(-h)) / (h * h);
    let hh = 0.5 * h;
    let fine = (f(hh) - &f0 * 2.0 + f(-hh)) / (hh * hh);
    (fine * 4.0 - coarse) / 3.0
}

/// Scalar central difference.
pub fn central_scalar<F>(f: F, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(h) - f(-h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig(t: f64) -> DVector<f64> {
        DVector::from_vec(vec![t.sin(), (2.0 * t).cos(), t * t * t])
    }

    #[test]
    fn richardson_beats_plain_central() {
        let exact = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let plain = (central(trig, 1e-2) - &exact).amax();
        let rich = (richardson(trig, 1e-2) - &exact).amax();
        assert!(rich < plain * 1e-2, "plain {plain:e} rich {rich:e}");
        assert!(rich < 1e-9);
    }

    #[test]
    fn second_derivative_of_cubic_and_trig() {
        let d2 = richardson_second(trig, 1e-3);
        assert!((d2[0] - 0.0).abs() < 1e-8);
        assert!((d2[1] + 4.0).abs() < 1e-8);
        assert!(d2[2].abs() < 1e-8);
    }
}
