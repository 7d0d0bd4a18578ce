//! Truncation-error bound for `g_tr`, Maxwellian envelope fits, and a
//! `g_tr` recommender built on them.
//!
//! For a pdf dominated by `c exp(-k v^2)` and kernel `B = g^lambda B`, the
//! truncation error at speed `v` is at most `c exp(-k v^2) E_rel(g_tr, v)` with
//!
//! ```text
//! E_rel = 16 pi^2 B c int_{g_tr}^inf exp(-k (v-g)^2) (1 - exp(-4kvg)) / (4kvg) g^(lambda+2) dg
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::moments::moments;
use crate::quadrature::adaptive;

/// Relative safety margin added to fitted envelope amplitudes.
pub const FIT_SAFETY: f64 = 1e-6;
/// Default relative tolerance for [`e_rel`].
pub const E_REL_TOL: f64 = 1e-10;
/// `k` resolution of [`fit_method2`].
pub const METHOD2_K_STEP: f64 = 1e-2;
/// Bisection resolution of [`recommend_gtr`].
pub const GTR_RESOLUTION: f64 = 1e-3;
/// Speed step of the sweep in [`recommend_gtr`].
pub const SWEEP_STEP: f64 = 0.1;

/// Maxwellian envelope `f(v) <= c exp(-k |v|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellBound {
    pub c: f64,
    pub k: f64,
}

impl MaxwellBound {
    pub fn new(c: f64, k: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0 && k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "envelope needs c > 0 and k > 0, got c = {c}, k = {k}"
            )));
        }
        Ok(Self { c, k })
    }

    pub fn at(&self, v: f64) -> f64 {
        self.c * (-self.k * v * v).exp()
    }
}

/// `(1 - exp(-x)) / x`, with its limit 1 at small `x`.
#[inline]
fn damping(x: f64) -> f64 {
    if x < 1e-8 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

fn check_kernel(lambda: f64, b_tilde: f64) -> Result<()> {
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
    Ok(())
}

/// Relative truncation-error bound at speed `v` for cutoff `g_tr`.
///
/// The semi-infinite integral is cut at `max(g_tr, v) + 40/sqrt(k)`, where
/// the Gaussian factor is below `exp(-1600)`, and split at `g = v`.
pub fn e_rel(
    g_tr: f64,
    v: f64,
    bound: &MaxwellBound,
    lambda: f64,
    b_tilde: f64,
    tol: f64,
) -> Result<f64> {
    check_kernel(lambda, b_tilde)?;
    if !(g_tr > 0.0 && v >= 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need g_tr > 0, v >= 0, tol > 0; got {g_tr}, {v}, {tol}"
        )));
    }
    let k = bound.k;
    let integrand =
        |g: f64| (-k * (v - g) * (v - g)).exp() * damping(4.0 * k * v * g) * g.powf(lambda + 2.0);
    let upper = g_tr.max(v) + 40.0 / k.sqrt();
    let mut pieces = vec![];
    if g_tr < v {
        pieces.push((g_tr, v));
        pieces.push((v, upper));
    } else {
        pieces.push((g_tr, upper));
    }
    let mut value = 0.0;
    let mut error = 0.0;
    for (a, b) in pieces {
        let est = adaptive(integrand, a, b, 0.1 * tol, 1e-300, 4000);
        value += est.value;
        error += est.error;
    }
    let scale = 16.0 * PI * PI * b_tilde * bound.c;
    if error > tol * value.abs() && error > 1e-300 {
        return Err(Error::NotConverged {
            estimate: scale * value,
            requested: tol,
        });
    }
    Ok(scale * value)
}

/// Large-`k`, large-`g_tr` approximation of [`e_rel`] for `lambda = 0` and
/// `B = 1/(4 pi)`. The `g_tr = v` case is used when the two agree to
/// `1e-9` relative.
pub fn e_rel_asymptotic(g_tr: f64, v: f64, bound: &MaxwellBound) -> Result<f64> {
    if !(v > 0.0 && g_tr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need g_tr > 0 and v > 0, got {g_tr}, {v}"
        )));
    }
    let MaxwellBound { c, k } = *bound;
    let plateau = c * (PI / k).powf(1.5);
    Ok(if (g_tr - v).abs() < 1e-9 * g_tr.max(v) {
        0.5 * (plateau + 1.0 / (k * g_tr))
    } else if g_tr < v {
        plateau
    } else {
        let d = g_tr - v;
        PI * c / (2.0 * k * k) * (-k * d * d).exp() / d * (g_tr / v)
    })
}

/// Absolute bound `c exp(-k v^2) E_rel(g_tr, v)`.
pub fn e_tr_ub(g_tr: f64, v: f64, bound: &MaxwellBound, lambda: f64, b_tilde: f64) -> Result<f64> {
    Ok(bound.at(v) * e_rel(g_tr, v, bound, lambda, b_tilde, E_REL_TOL)?)
}

/// Smallest amplitude with `f <= c exp(-k v^2)` at every node, plus safety.
fn envelope_amplitude(f: &RealField, k: f64) -> f64 {
    let grid = f.grid();
    let mut best = f64::NEG_INFINITY;
    for (idx, &fv) in f.data().iter().enumerate() {
        if fv <= 0.0 {
            continue;
        }
        let v = grid.velocity(idx);
        let s = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        // Compare in log space; exp(k s) overflows for large k.
        best = best.max(fv.ln() + k * s);
    }
    (1.0 + FIT_SAFETY) * best.exp()
}

/// Envelope whose width matches the equilibrium of `f`: `k = 3/(2E)` with
/// `E = int |v|^2 f / int f`, and the smallest dominating `c` on the grid.
///
/// Dominance is only checked at grid nodes.
pub fn fit_method1(f: &RealField) -> Result<MaxwellBound> {
    let m = moments(f);
    if !(m.mass > 0.0) {
        return Err(Error::InvalidParameter("pdf has no positive mass".into()));
    }
    let energy = m.energy / m.mass;
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "energy must be positive, got {energy}"
        )));
    }
    let k = 1.5 / energy;
    MaxwellBound::new(envelope_amplitude(f, k), k)
}

/// Envelope minimizing `E_rel(g_ref, v_ref)` over `k` on a grid of spacing
/// [`METHOD2_K_STEP`], with `c(k)` the smallest dominating amplitude.
pub fn fit_method2(
    f: &RealField,
    v_ref: f64,
    g_ref: f64,
    lambda: f64,
    b_tilde: f64,
) -> Result<MaxwellBound> {
    if !f.data().iter().any(|&x| x > 0.0) {
        return Err(Error::InvalidParameter("pdf has no positive values".into()));
    }
    let k_max = 10.0;
    let steps = (k_max / METHOD2_K_STEP).round() as usize;
    let scored: Vec<(f64, MaxwellBound)> = (1..=steps)
        .into_par_iter()
        .filter_map(|i| {
            let k = i as f64 * METHOD2_K_STEP;
            let c = envelope_amplitude(f, k);
            let bound = MaxwellBound::new(c, k).ok()?;
            let e = e_rel(g_ref, v_ref, &bound, lambda, b_tilde, 1e-8).ok()?;
            Some((e, bound))
        })
        .collect();
    scored
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, b)| b)
        .ok_or_else(|| Error::InvalidParameter("no finite envelope found".into()))
}

/// Speeds `0.1, 0.2, ...` up to and including `v_target`.
fn sweep(v_target: f64) -> Vec<f64> {
    let n = (v_target / SWEEP_STEP - 1e-9).ceil().max(1.0) as usize;
    (1..=n)
        .map(|i| (i as f64 * SWEEP_STEP).min(v_target))
        .collect()
}

/// Smallest `g_tr` (to [`GTR_RESOLUTION`]) with `E_rel(g_tr, v) <= tol` for
/// every `v` of a 0.1-spaced sweep up to `v_target`.
pub fn recommend_gtr(
    v_target: f64,
    tol: f64,
    bound: &MaxwellBound,
    lambda: f64,
    b_tilde: f64,
) -> Result<f64> {
    if !(v_target > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need v_target > 0 and tol > 0, got {v_target}, {tol}"
        )));
    }
    let speeds = sweep(v_target);
    let worst = |g: f64| -> Result<f64> {
        let vals: Vec<f64> = speeds
            .par_iter()
            .map(|&v| e_rel(g, v, bound, lambda, b_tilde, 1e-8))
            .collect::<Result<_>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    };
    let g_max = 10.0 * v_target;
    if worst(g_max)? > tol {
        return Err(Error::Unreachable { tol, g_max });
    }
    let (mut lo, mut hi) = (0.0, g_max);
    while hi - lo > GTR_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && worst(mid)? <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest `g_tr` (to [`GTR_RESOLUTION`]) with `E_rel(g_tr, v) <= level` at
/// one speed, or `None` if not reached below `g_max`.
pub fn level_crossing(
    v: f64,
    level: f64,
    bound: &MaxwellBound,
    lambda: f64,
    b_tilde: f64,
    g_max: f64,
) -> Result<Option<f64>> {
    if e_rel(g_max, v, bound, lambda, b_tilde, 1e-8)? > level {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, g_max);
    while hi - lo > GTR_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && e_rel(mid, v, bound, lambda, b_tilde, 1e-8)? <= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `log10 E_rel` on a rectangular grid; rows follow `speeds`, columns `cutoffs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourTable {
    pub speeds: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub log10_e_rel: Vec<Vec<f64>>,
}

impl ContourTable {
    /// Long-format CSV with header `v,g_tr,log10_e_rel`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,g_tr,log10_e_rel\n");
        for (v, row) in self.speeds.iter().zip(&self.log10_e_rel) {
            for (g, val) in self.cutoffs.iter().zip(row) {
                out.push_str(&format!("{v},{g},{val}\n"));
            }
        }
        out
    }
}

pub fn contour_table(
    speeds: &[f64],
    cutoffs: &[f64],
    bound: &MaxwellBound,
    lambda: f64,
    b_tilde: f64,
) -> Result<ContourTable> {
    if speeds.iter().chain(cutoffs).any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter(
            "contour ranges must be positive".into(),
        ));
    }
    let rows = speeds
        .par_iter()
        .map(|&v| {
            cutoffs
                .iter()
                .map(|&g| e_rel(g, v, bound, lambda, b_tilde, 1e-8).map(f64::log10))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourTable {
        speeds: speeds.to_vec(),
        cutoffs: cutoffs.to_vec(),
        log10_e_rel: rows,
    })
}
