//! Spectral evaluation of the truncated collision operator and the
//! conservation projection.
//!
//! On the Fourier grid every wavevector is an integer vector times `dzeta`,
//! so with `zeta = a dzeta` and `xi = b dzeta` the weighting function
//! depends only on the three integers `|a|^2`, `|2b - a|^2` and `|b|^2`.
//! Outputs are grouped by `|a|^2`; each group shares one lookup table for
//! the `G1` part and all outputs share one table for the `G2` part. Every
//! output is summed sequentially in a fixed order, so results do not depend
//! on the thread count.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    forward_transform, inverse_transform, RealField, SpectralField, VelocityGrid, FT_NORM,
};
use crate::kernel::{ghat1, ghat2, ghat_maxwell, CollisionParams};

/// Relative imaginary residue above which a collision evaluation is flagged.
pub const IMAG_FLAG_RATIO: f64 = 1e-8;

fn check_finite(data: &[Complex64]) -> Result<()> {
    if data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step: None })
    }
}

/// `Qhat(zeta_m) = (2 pi)^{-3/2} dzeta^3 sum_j fh(zeta_m - xi_j) fh(xi_j) G(xi_j, zeta_m)`
/// with `fh` taken as zero off the grid.
pub fn weighted_convolution(fh: &SpectralField, params: &CollisionParams) -> Result<SpectralField> {
    params.require_maxwell()?;
    check_finite(fh.data())?;
    let grid = *fh.grid();
    let n = grid.n();
    let h = n / 2;
    let hi = h as i64;
    let dz = grid.dzeta();
    let g = params.g_tr;
    let weight = FT_NORM * dz * dz * dz * params.prefactor();
    let src = fh.data();

    // |b|^2 <= 3 h^2
    let t2: Vec<f64> = (0..=3 * h * h)
        .into_par_iter()
        .map(|p| ghat2((p as f64).sqrt() * dz, g))
        .collect();

    // |2b - a| per component is at most 3h - 1.
    let q_len = 3 * (3 * h - 1) * (3 * h - 1) + 1;

    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for idx in 0..grid.len() {
        let [mx, my, mz] = grid.unravel(idx);
        let s = [mx, my, mz]
            .iter()
            .map(|&m| (m as i64 - hi).pow(2) as usize)
            .sum();
        classes.entry(s).or_default().push(idx);
    }

    let sq = |k: i64| (k * k) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (s, members) in classes {
        let x = 0.5 * (s as f64).sqrt() * dz;
        // (2b - a)_i has the parity of a_i, so |2b - a|^2 has the parity of s.
        let t1: Vec<f64> = (0..q_len)
            .into_par_iter()
            .map(|q| {
                if q % 2 == s % 2 {
                    ghat1(x, 0.5 * (q as f64).sqrt() * dz, g)
                } else {
                    0.0
                }
            })
            .collect();

        let values: Vec<(usize, Complex64)> = members
            .par_iter()
            .map(|&idx| {
                let m = grid.unravel(idx);
                let range = |mi: usize| {
                    let lo = (mi + 1).saturating_sub(h);
                    let hi_ = (mi + h).min(n - 1);
                    lo..=hi_
                };
                let q_of = |mi: usize, j: usize| sq(2 * j as i64 - mi as i64 - hi);
                let p_of = |j: usize| sq(j as i64 - hi);
                let mut acc = Complex64::new(0.0, 0.0);
                for jx in range(m[0]) {
                    let (qx, px) = (q_of(m[0], jx), p_of(jx));
                    let dx = m[0] + h - jx;
                    for jy in range(m[1]) {
                        let (qxy, pxy) = (qx + q_of(m[1], jy), px + p_of(jy));
                        let dy = m[1] + h - jy;
                        let row_b = (jx * n + jy) * n;
                        let row_d = (dx * n + dy) * n;
                        for jz in range(m[2]) {
                            let w = t1[qxy + q_of(m[2], jz)] - t2[pxy + p_of(jz)];
                            let dzi = m[2] + h - jz;
                            acc += src[row_d + dzi] * src[row_b + jz] * w;
                        }
                    }
                }
                (idx, acc * weight)
            })
            .collect();
        for (idx, v) in values {
            out[idx] = v;
        }
    }
    SpectralField::from_vec(grid, out)
}

/// Reference evaluation of [`weighted_convolution`] that calls the closed-form
/// weighting function for every pair. Small grids only.
pub fn weighted_convolution_direct(
    fh: &SpectralField,
    params: &CollisionParams,
) -> Result<SpectralField> {
    params.require_maxwell()?;
    check_finite(fh.data())?;
    let grid = *fh.grid();
    let n = grid.n() as i64;
    let h = n / 2;
    let dz = grid.dzeta();
    let weight = FT_NORM * dz * dz * dz;
    let mut out = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let a = grid.unravel(idx).map(|m| m as i64 - h);
        let mut acc = Complex64::new(0.0, 0.0);
        for jdx in 0..grid.len() {
            let b = grid.unravel(jdx).map(|j| j as i64 - h);
            let d = [a[0] - b[0] + h, a[1] - b[1] + h, a[2] - b[2] + h];
            if d.iter().any(|&c| c < 0 || c >= n) {
                continue;
            }
            let didx = grid.index(d[0] as usize, d[1] as usize, d[2] as usize);
            let zeta = a.map(|c| c as f64 * dz);
            let xi = b.map(|c| c as f64 * dz);
            let w = ghat_maxwell(xi, zeta, params)?;
            acc += fh.data()[didx] * fh.data()[jdx] * w;
        }
        out.push(acc * weight);
    }
    SpectralField::from_vec(grid, out)
}

/// Output of [`collision_operator`].
#[derive(Debug, Clone)]
pub struct Collision {
    pub q: RealField,
    /// Largest imaginary magnitude dropped by the inverse transform.
    pub imag_residue: f64,
}

impl Collision {
    /// True when the dropped imaginary part is large relative to `Q`,
    /// a sign of kernel under-resolution.
    pub fn flagged(&self) -> bool {
        self.imag_residue > IMAG_FLAG_RATIO * self.q.max_abs()
    }
}

/// Truncated collision operator of a sampled pdf: forward transform,
/// weighted convolution, inverse transform.
pub fn collision_operator(f: &RealField, params: &CollisionParams) -> Result<Collision> {
    if !f.is_finite() {
        return Err(Error::NonFinite { step: None });
    }
    let fh = forward_transform(f);
    let qh = weighted_convolution(&fh, params)?;
    let inv = inverse_transform(&qh);
    Ok(Collision {
        q: inv.field,
        imag_residue: inv.max_imag,
    })
}

/// The five collision invariants as weighted grid vectors, with an
/// orthonormal basis of their span for projection.
#[derive(Debug, Clone)]
pub struct ConservationBasis {
    grid: VelocityGrid,
    constraints: Vec<Vec<f64>>,
    gram: [[f64; 5]; 5],
    orthonormal: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConservationBasis {
    pub fn new(grid: VelocityGrid) -> Result<Self> {
        let w = grid.cell_volume();
        let mut constraints = vec![Vec::with_capacity(grid.len()); 5];
        for idx in 0..grid.len() {
            let v = grid.velocity(idx);
            let e = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            for (c, val) in constraints.iter_mut().zip([1.0, v[0], v[1], v[2], e]) {
                c.push(w * val);
            }
        }

        let mut gram = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                gram[i][j] = dot(&constraints[i], &constraints[j]);
            }
        }
        cholesky_check(&gram)?;

        // Modified Gram-Schmidt, two passes.
        let mut orthonormal: Vec<Vec<f64>> = Vec::with_capacity(5);
        for c in &constraints {
            let mut u = c.clone();
            for _ in 0..2 {
                for e in &orthonormal {
                    let r = dot(e, &u);
                    u.iter_mut().zip(e).for_each(|(x, y)| *x -= r * y);
                }
            }
            let norm = dot(&u, &u).sqrt();
            if !(norm > 1e-12 * dot(c, c).sqrt()) {
                return Err(Error::SingularGram);
            }
            u.iter_mut().for_each(|x| *x /= norm);
            orthonormal.push(u);
        }

        Ok(Self {
            grid,
            constraints,
            gram,
            orthonormal,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// Rows `dv^3 {1, v_x, v_y, v_z, |v|^2}`.
    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    pub fn gram(&self) -> &[[f64; 5]; 5] {
        &self.gram
    }

    /// `C q`: mass, momentum and energy moments of a field.
    pub fn apply(&self, q: &RealField) -> Result<[f64; 5]> {
        if q.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = [0.0; 5];
        for (o, c) in out.iter_mut().zip(&self.constraints) {
            *o = dot(c, q.data());
        }
        Ok(out)
    }
}

fn cholesky_check(a: &[[f64; 5]; 5]) -> Result<()> {
    let mut l = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 1e-14 * a[i][i].abs()) {
                    return Err(Error::SingularGram);
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(())
}

/// L2-orthogonal projection of `q` onto fields with zero mass, momentum and
/// energy: `q - C^T (C C^T)^{-1} C q`.
pub fn conserve_project(q: &RealField, basis: &ConservationBasis) -> Result<RealField> {
    if q.grid() != basis.grid() {
        return Err(Error::GridMismatch);
    }
    let mut data = q.data().to_vec();
    // A second sweep removes what rounding left behind in the first.
    for _ in 0..2 {
        for e in &basis.orthonormal {
            let r = dot(e, &data);
            data.iter_mut().zip(e).for_each(|(x, y)| *x -= r * y);
        }
    }
    RealField::from_vec(*q.grid(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spectral(grid: VelocityGrid, seed: u64) -> SpectralField {
        // Cheap deterministic pseudo-random values.
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let data = (0..grid.len())
            .map(|_| Complex64::new(next(), next()))
            .collect();
        SpectralField::from_vec(grid, data).unwrap()
    }

    #[test]
    fn fast_matches_direct_on_random_input() {
        let grid = VelocityGrid::new(4.0, 8).unwrap();
        let fh = random_spectral(grid, 7);
        let p = CollisionParams::maxwell(3.0).unwrap();
        let fast = weighted_convolution(&fh, &p).unwrap();
        let direct = weighted_convolution_direct(&fh, &p).unwrap();
        let scale = direct.max_abs();
        for (a, b) in fast.data().iter().zip(direct.data()) {
            assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_input_gives_zero() {
        let grid = VelocityGrid::new(10.0, 8).unwrap();
        let p = CollisionParams::maxwell(4.0).unwrap();
        let q = weighted_convolution(&SpectralField::zeros(grid), &p).unwrap();
        assert_eq!(q.max_abs(), 0.0);
    }

    #[test]
    fn two_impulses_match_hand_expansion() {
        // fh = delta at b1 + delta at b2: only a = 2 b1, b1 + b2, 2 b2 receive mass.
        let grid = VelocityGrid::new(5.0, 8).unwrap();
        let dz = grid.dzeta();
        let p = CollisionParams::maxwell(4.0).unwrap();
        let i1 = grid.index(5, 4, 4); // b1 = (1, 0, 0)
        let i2 = grid.index(4, 3, 4); // b2 = (0, -1, 0)
        let mut fh = SpectralField::zeros(grid);
        fh.data_mut()[i1] = Complex64::new(1.0, 0.0);
        fh.data_mut()[i2] = Complex64::new(0.0, 2.0);
        let q = weighted_convolution(&fh, &p).unwrap();

        let w = FT_NORM * dz.powi(3);
        let b1 = [dz, 0.0, 0.0];
        let b2 = [0.0, -dz, 0.0];
        let sum = [dz, -dz, 0.0];
        let g = |xi, zeta| ghat_maxwell(xi, zeta, &p).unwrap();
        let c = Complex64::new(0.0, 2.0);
        let expect_2b1 = w * g(b1, [2.0 * dz, 0.0, 0.0]);
        let expect_2b2 = w * c * c * g(b2, [0.0, -2.0 * dz, 0.0]);
        let expect_mix = w * c * (g(b1, sum) + g(b2, sum));

        let at = |ix, iy, iz| q.data()[grid.index(ix, iy, iz)];
        assert!((at(6, 4, 4) - expect_2b1).norm() < 1e-14);
        assert!((at(4, 2, 4) - expect_2b2).norm() < 1e-14);
        assert!((at(5, 3, 4) - expect_mix).norm() < 1e-14);
        let total: f64 = q.data().iter().map(|z| z.norm()).sum();
        let seen = at(6, 4, 4).norm() + at(4, 2, 4).norm() + at(5, 3, 4).norm();
        assert!((total - seen).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_maxwell_and_non_finite() {
        let grid = VelocityGrid::new(10.0, 8).unwrap();
        let p = CollisionParams::new(1.0, 0.1, 4.0).unwrap();
        assert!(weighted_convolution(&SpectralField::zeros(grid), &p).is_err());
        let mut f = RealField::zeros(grid);
        f.data_mut()[3] = f64::NAN;
        let p = CollisionParams::maxwell(4.0).unwrap();
        assert!(matches!(
            collision_operator(&f, &p),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn gram_is_positive_definite() {
        let basis = ConservationBasis::new(VelocityGrid::new(10.0, 8).unwrap()).unwrap();
        let gm = basis.gram();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(gm[i][j], gm[j][i]);
            }
        }
        assert!(cholesky_check(gm).is_ok());
    }

    #[test]
    fn projection_removes_moments_and_is_idempotent() {
        let grid = VelocityGrid::new(10.0, 12).unwrap();
        let basis = ConservationBasis::new(grid).unwrap();
        let q = RealField::from_fn(grid, |v| {
            (v[0] * 0.3).sin() + 0.1 * v[1] + (-v[2] * v[2]).exp()
        });
        let qp = conserve_project(&q, &basis).unwrap();
        let scale = q.max_abs() * 100.0;
        for m in basis.apply(&qp).unwrap() {
            assert!(m.abs() <= 1e-12 * scale, "{:?}", basis.apply(&qp).unwrap());
        }
        let qpp = conserve_project(&qp, &basis).unwrap();
        assert!(qpp.max_abs_diff(&qp).unwrap() <= 1e-13 * qp.max_abs());
    }
}
