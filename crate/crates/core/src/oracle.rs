//! Direct velocity-space quadrature of the truncated collision integral.
//!
//! Slow and simple on purpose: it takes the pdf as a function, so there is
//! no sampling or interpolation error, and it is used to cross-check the
//! spectral pipeline on small grids.
//!
//! The relative velocity `g = r omega` is integrated with composite
//! Gauss-Legendre in `r` (unit-width panels) and a sphere rule in `omega`
//! whose pole is aligned with `v`; the scattering direction `Theta` uses the
//! same sphere rule with its pole aligned with `omega`. Both alignments make
//! the result exactly invariant under rotations of `v` when `f` is isotropic.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{RealField, VelocityGrid};
use crate::kernel::CollisionParams;
use crate::quadrature::{gauss_legendre, Estimate};

/// Quadrature rule on the unit sphere, weights summing to `4 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    nodes: Vec<([f64; 3], f64)>,
    polar: usize,
    azimuth: usize,
}

impl SphereRule {
    /// Gauss-Legendre in `cos(theta)` times the trapezoid rule in `phi`.
    pub fn product(polar: usize, azimuth: usize) -> Result<Self> {
        if polar < 1 || azimuth < 1 {
            return Err(Error::InvalidParameter(format!(
                "sphere rule needs positive orders, got {polar} x {azimuth}"
            )));
        }
        let dphi = 2.0 * PI / azimuth as f64;
        let mut nodes = Vec::with_capacity(polar * azimuth);
        for (mu, w) in gauss_legendre(polar) {
            let s = (1.0 - mu * mu).sqrt();
            for j in 0..azimuth {
                let (sp, cp) = (j as f64 * dphi).sin_cos();
                nodes.push(([s * cp, s * sp, mu], w * dphi));
            }
        }
        Ok(Self {
            nodes,
            polar,
            azimuth,
        })
    }

    pub fn nodes(&self) -> &[([f64; 3], f64)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.polar, self.azimuth)
    }

    /// Highest spherical-harmonic degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.polar - 1).min(self.azimuth - 1)
    }

    /// The same family at roughly half the order, used for error estimates.
    pub fn coarsened(&self) -> Self {
        Self::product((self.polar / 2).max(1), (self.azimuth / 2).max(1)).expect("positive orders")
    }
}

/// All quadrature choices of the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRule {
    /// Gauss-Legendre nodes per unit-width radial panel.
    pub radial_nodes: usize,
    /// Rule for both the direction of `g` and the scattering direction.
    pub sphere: SphereRule,
}

impl Default for OracleRule {
    fn default() -> Self {
        Self {
            radial_nodes: 8,
            sphere: SphereRule::product(16, 32).expect("valid orders"),
        }
    }
}

impl OracleRule {
    pub fn new(radial_nodes: usize, sphere: SphereRule) -> Result<Self> {
        if radial_nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "need at least 8 radial nodes, got {radial_nodes}"
            )));
        }
        Ok(Self {
            radial_nodes,
            sphere,
        })
    }

    fn coarsened(&self) -> Self {
        Self {
            radial_nodes: self.radial_nodes / 2,
            sphere: self.sphere.coarsened(),
        }
    }
}

/// Orthonormal frame whose third axis is `dir` (the z axis for `dir = 0`).
fn frame(dir: [f64; 3]) -> [[f64; 3]; 3] {
    let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if n == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let e3 = [dir[0] / n, dir[1] / n, dir[2] / n];
    // Pick the coordinate axis least aligned with e3.
    let a = if e3[0].abs() <= e3[1].abs() && e3[0].abs() <= e3[2].abs() {
        [1.0, 0.0, 0.0]
    } else if e3[1].abs() <= e3[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = a[0] * e3[0] + a[1] * e3[1] + a[2] * e3[2];
    let mut e1 = [a[0] - d * e3[0], a[1] - d * e3[1], a[2] - d * e3[2]];
    let m = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= m);
    let e2 = [
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    ];
    [e1, e2, e3]
}

#[inline]
fn rotate(fr: &[[f64; 3]; 3], x: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = x[0] * fr[0][k] + x[1] * fr[1][k] + x[2] * fr[2][k];
    }
    out
}

/// Integral of the collision integrand over the shell `g_lo <= |g| <= g_hi`.
fn shell_value<F>(
    f: &F,
    v: [f64; 3],
    params: &CollisionParams,
    g_lo: f64,
    g_hi: f64,
    rule: &OracleRule,
) -> Result<f64>
where
    F: Fn([f64; 3]) -> f64 + ?Sized,
{
    let fv = f(v);
    if !fv.is_finite() {
        return Err(Error::NonFinite { step: None });
    }
    if g_hi <= g_lo {
        return Ok(0.0);
    }
    let panels = (g_hi - g_lo).ceil().max(1.0) as usize;
    let base = gauss_legendre(rule.radial_nodes);
    let width = (g_hi - g_lo) / panels as f64;
    let frame_v = frame(v);
    let sphere = rule.sphere.nodes();

    let mut total = 0.0;
    let mut rotated = vec![[0.0; 3]; sphere.len()];
    for p in 0..panels {
        let lo = g_lo + p as f64 * width;
        for &(x, w) in &base {
            let r = lo + 0.5 * width * (x + 1.0);
            let wr = 0.5 * width * w * r * r * r.powf(params.lambda) * params.b_tilde;
            let mut radial_sum = 0.0;
            for &(om_local, w_om) in sphere {
                let om = rotate(&frame_v, om_local);
                let c = [
                    v[0] + 0.5 * r * om[0],
                    v[1] + 0.5 * r * om[1],
                    v[2] + 0.5 * r * om[2],
                ];
                let fw = f([v[0] + r * om[0], v[1] + r * om[1], v[2] + r * om[2]]);
                let frame_g = frame(om);
                for (slot, &(th, _)) in rotated.iter_mut().zip(sphere) {
                    *slot = rotate(&frame_g, th);
                }
                let mut gain = 0.0;
                for (th, &(_, w_th)) in rotated.iter().zip(sphere) {
                    let u = [0.5 * r * th[0], 0.5 * r * th[1], 0.5 * r * th[2]];
                    let a = f([c[0] - u[0], c[1] - u[1], c[2] - u[2]]);
                    let b = f([c[0] + u[0], c[1] + u[1], c[2] + u[2]]);
                    gain += w_th * a * b;
                }
                let loss = 4.0 * PI * fv * fw;
                radial_sum += w_om * (gain - loss);
            }
            total += wr * radial_sum;
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite { step: None });
    }
    Ok(total)
}

/// Shell contribution with an error estimate from a coarser rule.
pub fn q_direct_shell<F>(
    f: &F,
    v: [f64; 3],
    params: &CollisionParams,
    g_lo: f64,
    g_hi: f64,
    rule: &OracleRule,
) -> Result<Estimate>
where
    F: Fn([f64; 3]) -> f64 + ?Sized,
{
    let value = shell_value(f, v, params, g_lo, g_hi, rule)?;
    let coarse = shell_value(f, v, params, g_lo, g_hi, &rule.coarsened())?;
    Ok(Estimate {
        value,
        error: (value - coarse).abs(),
    })
}

/// Truncated collision operator `Q^tr(v)` by direct quadrature of the
/// gain-minus-loss integral over `|g| <= g_tr` and the unit sphere.
///
/// The error is the difference from the same rule at half the orders,
/// which overestimates the error of the returned value.
pub fn q_direct<F>(
    f: &F,
    v: [f64; 3],
    params: &CollisionParams,
    rule: &OracleRule,
) -> Result<Estimate>
where
    F: Fn([f64; 3]) -> f64 + ?Sized,
{
    q_direct_shell(f, v, params, 0.0, params.g_tr, rule)
}

/// [`q_direct`] at every grid node. Returns the field and the largest
/// per-node error estimate.
pub fn q_direct_field<F>(
    f: &F,
    grid: VelocityGrid,
    params: &CollisionParams,
    rule: &OracleRule,
) -> Result<(RealField, f64)>
where
    F: Fn([f64; 3]) -> f64 + Sync + ?Sized,
{
    let est: Vec<Estimate> = (0..grid.len())
        .into_par_iter()
        .map(|idx| q_direct(f, grid.velocity(idx), params, rule))
        .collect::<Result<_>>()?;
    let err = est.iter().fold(0.0_f64, |m, e| m.max(e.error));
    let field = RealField::from_vec(grid, est.into_iter().map(|e| e.value).collect())?;
    Ok((field, err))
}

/// [`q_direct_field`] for an isotropic `f`: one evaluation per distinct
/// node speed, copied to every node with that speed. Exact to rounding
/// because the rule is rotation invariant.
pub fn q_direct_field_isotropic<F>(
    f: &F,
    grid: VelocityGrid,
    params: &CollisionParams,
    rule: &OracleRule,
) -> Result<(RealField, f64)>
where
    F: Fn([f64; 3]) -> f64 + Sync + ?Sized,
{
    let h = (grid.n() / 2) as i64;
    let key = |idx: usize| -> i64 {
        grid.unravel(idx)
            .iter()
            .map(|&k| (k as i64 - h).pow(2))
            .sum()
    };
    let mut reps: BTreeMap<i64, usize> = BTreeMap::new();
    for idx in 0..grid.len() {
        reps.entry(key(idx)).or_insert(idx);
    }
    let reps: Vec<(i64, usize)> = reps.into_iter().collect();
    let values: BTreeMap<i64, Estimate> = reps
        .par_iter()
        .map(|&(k, idx)| q_direct(f, grid.velocity(idx), params, rule).map(|e| (k, e)))
        .collect::<Result<_>>()?;
    let err = values.values().fold(0.0_f64, |m, e| m.max(e.error));
    let data = (0..grid.len()).map(|idx| values[&key(idx)].value).collect();
    Ok((RealField::from_vec(grid, data)?, err))
}
