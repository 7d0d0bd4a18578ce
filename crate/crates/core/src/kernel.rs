//! Truncated convolution weighting function `Ghat_tr(xi, zeta)`.
//!
//! For isotropic collisions with `B(g, chi) = g^lambda * B`, the weighting
//! function is the Fourier transform over the ball `|g| <= g_tr` of
//!
//! ```text
//! G(g, zeta) = 4 pi B g^lambda [exp(i zeta.g / 2) sinc(g |zeta| / 2) - 1].
//! ```
//!
//! For Maxwell molecules (`lambda = 0`) it has the closed form
//! `4 pi B [G1(|zeta|/2, |xi - zeta/2|) - G2(|xi|)]` with
//!
//! ```text
//! G1(X, Y) = 2 pi / (p q X Y) [q sin(g_tr p) - p sin(g_tr q)],  p = X - Y, q = X + Y
//! G2(Z)    = 4 pi / Z^3 [sin(g_tr Z) - g_tr Z cos(g_tr Z)]
//! ```
//!
//! Both are evaluated in forms that stay accurate near their removable
//! singularities. `G1` is rewritten as
//! `4 pi int_0^g_tr (sin tX / X)(sin tY / Y) dt`, which yields the
//! sinc-difference form `2 pi g_tr / (XY) [sinc(g_tr p) - sinc(g_tr q)]` and
//! power series in the small arguments.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Below this `|x|`, `sin(x)/x` uses its Taylor polynomial.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-4;
/// Below this `g_tr * min(X, Y)`, `G1` uses an expansion in the small argument.
pub const SMALL_ARG_THRESHOLD: f64 = 1e-3;
/// Below this `g_tr * max(X, Y)`, `G1` uses its double power series.
pub const DOUBLE_SERIES_THRESHOLD: f64 = 0.5;
/// Below this `g_tr * Z`, the radial moments use their power series.
pub const RADIAL_SERIES_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    /// Kernel exponent, `0 <= lambda <= 1`.
    pub lambda: f64,
    /// Constant angular kernel.
    pub b_tilde: f64,
    /// Relative-speed cutoff.
    pub g_tr: f64,
}

impl CollisionParams {
    pub fn new(lambda: f64, b_tilde: f64, g_tr: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        if !(b_tilde.is_finite() && b_tilde > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "B must be positive, got {b_tilde}"
            )));
        }
        if !(g_tr.is_finite() && g_tr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "g_tr must be positive, got {g_tr}"
            )));
        }
        Ok(Self {
            lambda,
            b_tilde,
            g_tr,
        })
    }

    /// Maxwell molecules with `B = 1/(4 pi)`.
    pub fn maxwell(g_tr: f64) -> Result<Self> {
        Self::new(0.0, 1.0 / (4.0 * PI), g_tr)
    }

    #[inline]
    pub fn prefactor(&self) -> f64 {
        4.0 * PI * self.b_tilde
    }

    pub(crate) fn require_maxwell(&self) -> Result<()> {
        if self.lambda != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "closed-form weighting function needs lambda = 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// `sin(x) / x`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `int_0^g t sin(t y) / y dt = (sin(gy) - gy cos(gy)) / y^3`.
pub fn radial_moment1(g: f64, y: f64) -> f64 {
    let u = g * y;
    if u < RADIAL_SERIES_THRESHOLD {
        // g^3 * sum_{k>=1} (-1)^{k+1} 2k u^{2k-2} / (2k+1)!
        let u2 = u * u;
        let mut term = 1.0 / 3.0;
        let mut fact = 6.0; // (2k+1)! at k = 1
        let mut pow = 1.0; // u^{2k-2}
        let mut sum = term;
        for k in 2..14 {
            let kk = k as f64;
            fact *= (2.0 * kk) * (2.0 * kk + 1.0);
            pow *= u2;
            term = 2.0 * kk * pow / fact;
            sum += if k % 2 == 0 { -term } else { term };
        }
        g * g * g * sum
    } else {
        let (s, c) = u.sin_cos();
        (s - u * c) / (y * y * y)
    }
}

/// `int_0^g t^3 sin(t y) / y dt`.
pub fn radial_moment3(g: f64, y: f64) -> f64 {
    let u = g * y;
    let g5 = g.powi(5);
    if u < RADIAL_SERIES_THRESHOLD {
        // g^5 * sum_k (-1)^k u^{2k} / ((2k+1)! (2k+5))
        let u2 = u * u;
        let mut pow = 1.0;
        let mut fact = 1.0;
        let mut sum = 0.0;
        for k in 0..14 {
            let kk = k as f64;
            if k > 0 {
                fact *= (2.0 * kk) * (2.0 * kk + 1.0);
                pow *= u2;
            }
            let term = pow / (fact * (2.0 * kk + 5.0));
            sum += if k % 2 == 0 { term } else { -term };
        }
        g5 * sum
    } else {
        let (s, c) = u.sin_cos();
        let u2 = u * u;
        g5 * (-c / u2 + 3.0 * s / (u2 * u) + 6.0 * c / (u2 * u2) - 6.0 * s / (u2 * u2 * u))
    }
}

/// `G2(Z)` for `4 pi B = 1`: the Fourier transform of the ball indicator.
pub fn ghat2(z: f64, g_tr: f64) -> f64 {
    4.0 * PI * radial_moment1(g_tr, z.abs())
}

/// `G1(X, Y)` for `4 pi B = 1`.
pub fn ghat1(x: f64, y: f64, g_tr: f64) -> f64 {
    let (a, b) = if x.abs() <= y.abs() {
        (x.abs(), y.abs())
    } else {
        (y.abs(), x.abs())
    };
    let g = g_tr;
    if g * b < DOUBLE_SERIES_THRESHOLD {
        // 4 pi g^3 sum_{j,k} (-1)^{j+k} u^{2j} w^{2k} / ((2j+1)! (2k+1)! (2j+2k+3))
        let (u2, w2) = ((g * a).powi(2), (g * b).powi(2));
        let mut sum = 0.0;
        let mut pu = 1.0;
        let mut fu = 1.0;
        for j in 0..10 {
            if j > 0 {
                pu *= -u2;
                fu *= (2 * j) as f64 * (2 * j + 1) as f64;
            }
            let mut pw = 1.0;
            let mut fw = 1.0;
            for k in 0..10 {
                if k > 0 {
                    pw *= -w2;
                    fw *= (2 * k) as f64 * (2 * k + 1) as f64;
                }
                sum += pu * pw / (fu * fw * (2 * j + 2 * k + 3) as f64);
            }
        }
        4.0 * PI * g * g * g * sum
    } else if g * a < SMALL_ARG_THRESHOLD {
        // sin(ta)/a = t - t^3 a^2 / 6 + O(a^4)
        4.0 * PI * (radial_moment1(g, b) - a * a / 6.0 * radial_moment3(g, b))
    } else {
        let p = a - b;
        let q = a + b;
        2.0 * PI * g / (a * b) * (sinc(g * p) - sinc(g * q))
    }
}

#[inline]
fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Closed-form Maxwell-molecule weighting function `Ghat_tr(xi, zeta)`.
pub fn ghat_maxwell(xi: [f64; 3], zeta: [f64; 3], params: &CollisionParams) -> Result<f64> {
    params.require_maxwell()?;
    let x = 0.5 * norm(zeta);
    let y = norm([
        xi[0] - 0.5 * zeta[0],
        xi[1] - 0.5 * zeta[1],
        xi[2] - 0.5 * zeta[2],
    ]);
    let z = norm(xi);
    Ok(params.prefactor() * (ghat1(x, y, params.g_tr) - ghat2(z, params.g_tr)))
}

/// Product-rule value of the ball integral at one refinement level.
fn ball_integral(
    xi: [f64; 3],
    zeta: [f64; 3],
    params: &CollisionParams,
    nr: usize,
    nt: usize,
    np: usize,
) -> Complex64 {
    let g = params.g_tr;
    let zn = norm(zeta);
    let radial: Vec<(f64, f64, f64)> = gauss_legendre(nr)
        .into_iter()
        .map(|(x, w)| {
            let r = 0.5 * g * (x + 1.0);
            let wr = 0.5 * g * w * r * r * r.powf(params.lambda);
            (r, wr, sinc(0.5 * r * zn))
        })
        .collect();
    let polar = gauss_legendre(nt);
    let dphi = 2.0 * PI / np as f64;
    let shifted = [
        0.5 * zeta[0] - xi[0],
        0.5 * zeta[1] - xi[1],
        0.5 * zeta[2] - xi[2],
    ];

    let mut total = Complex64::new(0.0, 0.0);
    for &(ct, wt) in &polar {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for j in 0..np {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            let w = [st * cp, st * sp, ct];
            let alpha = w[0] * shifted[0] + w[1] * shifted[1] + w[2] * shifted[2];
            let beta = -(w[0] * xi[0] + w[1] * xi[1] + w[2] * xi[2]);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(r, wr, s) in &radial {
                let gain = Complex64::from_polar(s, r * alpha);
                let loss = Complex64::from_polar(1.0, r * beta);
                acc += wr * (gain - loss);
            }
            total += acc * (wt * dphi);
        }
    }
    total * params.prefactor()
}

/// Direct quadrature of `int_{|g| <= g_tr} G(g, zeta) exp(-i xi.g) dg` for
/// any `0 <= lambda <= 1`.
///
/// Nested Gauss-Legendre in radius and polar cosine with a trapezoid rule in
/// azimuth; every order is doubled until two successive estimates differ by
/// less than `tol`.
pub fn ghat_quadrature(
    xi: [f64; 3],
    zeta: [f64; 3],
    params: &CollisionParams,
    tol: f64,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (mut nr, mut nt, mut np) = (16, 16, 32);
    let mut prev = ball_integral(xi, zeta, params, nr, nt, np);
    let mut diff = f64::INFINITY;
    while nr < 256 {
        nr *= 2;
        nt *= 2;
        np *= 2;
        let next = ball_integral(xi, zeta, params, nr, nt, np);
        diff = (next - prev).norm();
        prev = next;
        if diff < tol {
            return Ok(next);
        }
    }
    Err(Error::NotConverged {
        estimate: diff,
        requested: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64) -> CollisionParams {
        CollisionParams::maxwell(g).unwrap()
    }

    #[test]
    fn zero_frequency_vanishes() {
        let p = params(6.0);
        for xi in [
            [1.0, 0.0, 0.0],
            [0.3, -2.0, 1.1],
            [1e-9, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ] {
            let v = ghat_maxwell(xi, [0.0; 3], &p).unwrap();
            assert!(v.abs() <= 1e-12 * p.prefactor() * 216.0, "{xi:?}: {v:e}");
        }
    }

    #[test]
    fn rejects_nonzero_lambda() {
        let p = CollisionParams::new(0.5, 1.0, 4.0).unwrap();
        assert!(ghat_maxwell([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(CollisionParams::new(-0.1, 1.0, 4.0).is_err());
        assert!(CollisionParams::new(1.1, 1.0, 4.0).is_err());
        assert!(CollisionParams::new(0.0, 0.0, 4.0).is_err());
        assert!(CollisionParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature_generic_point() {
        let p = params(4.0);
        let xi = [1.0, 0.0, 0.0];
        let zeta = [2.0, 0.0, 0.0];
        let closed = ghat_maxwell(xi, zeta, &p).unwrap();
        let quad = ghat_quadrature(xi, zeta, &p, 1e-10).unwrap();
        assert!((closed - quad.re).abs() < 1e-8, "{closed} vs {quad}");
        assert!(quad.im.abs() < 1e-8);
    }

    #[test]
    fn quadrature_trivial_zeros() {
        let p = CollisionParams::new(1.0, 0.3, 5.0).unwrap();
        let v = ghat_quadrature([0.0; 3], [0.0; 3], &p, 1e-12).unwrap();
        assert!(v.norm() < 1e-12);
        let p0 = params(5.0);
        let v = ghat_quadrature([0.4, 0.1, -0.3], [0.0; 3], &p0, 1e-10).unwrap();
        assert!(v.norm() < 1e-10);
    }

    #[test]
    fn limits_match() {
        // G1(0, Y) = G2(Y) and G1(X, Y) is symmetric.
        for y in [1e-6, 0.01, 0.3, 1.0, 2.7] {
            let g = 7.0;
            let a = ghat1(0.0, y, g);
            let b = ghat2(y, g);
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "y = {y}");
            assert_eq!(ghat1(0.4, y, g), ghat1(y, 0.4, g));
        }
        // Value at the origin is the ball volume.
        let g: f64 = 3.0;
        assert!((ghat2(0.0, g) - 4.0 * PI * g.powi(3) / 3.0).abs() < 1e-12);
        assert!((ghat1(0.0, 0.0, g) - 4.0 * PI * g.powi(3) / 3.0).abs() < 1e-12);
    }

    fn assert_continuous<F: Fn(f64) -> f64>(f: F, at: f64) {
        let lo = f(at * (1.0 - 1e-13));
        let hi = f(at * (1.0 + 1e-13));
        let scale = lo.abs().max(hi.abs());
        assert!(
            (lo - hi).abs() <= 1e-10 * scale,
            "jump at {at}: {lo} vs {hi}"
        );
    }

    #[test]
    fn series_switches_are_continuous() {
        let g = 8.0;
        // |p| g across the sinc threshold.
        let x = 1.3;
        assert_continuous(|d| ghat1(x, x + d, g), SINC_SERIES_THRESHOLD / g);
        // Small-argument expansion.
        assert_continuous(|a| ghat1(a, 1.7, g), SMALL_ARG_THRESHOLD / g);
        assert_continuous(|a| ghat1(a, 0.2, g), SMALL_ARG_THRESHOLD / g);
        // Double series.
        assert_continuous(|b| ghat1(0.01, b, g), DOUBLE_SERIES_THRESHOLD / g);
        assert_continuous(|b| ghat1(0.5 * b, b, g), DOUBLE_SERIES_THRESHOLD / g);
        // Radial moment series.
        assert_continuous(|z| ghat2(z, g), RADIAL_SERIES_THRESHOLD / g);
        assert_continuous(|y| radial_moment3(g, y), RADIAL_SERIES_THRESHOLD / g);
    }

    #[test]
    fn radial_moments_match_quadrature() {
        let g = 5.0;
        for y in [0.05, 0.19, 0.21, 0.9, 3.0] {
            let rule = crate::quadrature::composite_gauss_legendre(20, 8, 0.0, g);
            let m1: f64 = rule.iter().map(|&(t, w)| w * t * (t * y).sin() / y).sum();
            let m3: f64 = rule
                .iter()
                .map(|&(t, w)| w * t.powi(3) * (t * y).sin() / y)
                .sum();
            assert!((radial_moment1(g, y) - m1).abs() < 1e-12 * m1.abs().max(1.0));
            assert!((radial_moment3(g, y) - m3).abs() < 1e-11 * m3.abs().max(1.0));
        }
    }

    #[test]
    fn g2_zero_spacing_is_wavelength() {
        // For large g_tr Z, G2 ~ -4 pi g_tr cos(g_tr Z) / Z^2: zeros are half a
        // wavelength 2 pi / g_tr apart.
        let g = 10.0;
        let mut zeros = Vec::new();
        let mut prev = ghat2(0.3, g);
        let mut z = 0.3;
        while z < 6.0 {
            let next_z = z + 1e-3;
            let next = ghat2(next_z, g);
            if prev.signum() != next.signum() {
                zeros.push(z);
            }
            prev = next;
            z = next_z;
        }
        let spacing: Vec<f64> = zeros.windows(2).map(|w| w[1] - w[0]).collect();
        let last = *spacing.last().unwrap();
        assert!((2.0 * last - 2.0 * PI / g).abs() < 5e-3, "spacing {last}");
    }
}
