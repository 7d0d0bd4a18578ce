//! Velocity and Fourier grids, sampled fields, and the trapezoid-rule
//! continuous Fourier transform pair.
//!
//! Both grids are cubic with `n` nodes per dimension. Velocity nodes are
//! `v_k = -L + k dv` with `dv = 2L/n`, Fourier nodes are
//! `zeta_m = -zeta_max + m dzeta` with `dzeta = pi/L`, so `dv * dzeta = 2 pi / n`.
//! The grids are left-closed: there is a node at `-L` but none at `+L`, and
//! the node `k = n/2` sits exactly at the origin.
//!
//! Fields are stored flat with the z index fastest, then y, then x:
//! `idx = (ix * n + iy) * n + iz`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(2 pi)^{-3/2}`, the normalization of the symmetric Fourier transform.
pub const FT_NORM: f64 = 0.063_493_635_934_240_97;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    half_width: f64,
    n: usize,
    dv: f64,
    dzeta: f64,
    zeta_max: f64,
}

impl VelocityGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("N must be even, got {n}")));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("N must be at least 8, got {n}")));
        }
        Ok(Self {
            half_width,
            n,
            dv: 2.0 * half_width / n as f64,
            dzeta: PI / half_width,
            zeta_max: n as f64 * PI / (2.0 * half_width),
        })
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dv(&self) -> f64 {
        self.dv
    }

    #[inline]
    pub fn dzeta(&self) -> f64 {
        self.dzeta
    }

    #[inline]
    pub fn zeta_max(&self) -> f64 {
        self.zeta_max
    }

    /// Number of nodes, `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Velocity node `k` along one axis.
    #[inline]
    pub fn v(&self, k: usize) -> f64 {
        // (k - n/2) dv is exact for the node at the origin.
        (k as f64 - (self.n / 2) as f64) * self.dv
    }

    /// Fourier node `m` along one axis.
    #[inline]
    pub fn zeta(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) * self.dzeta
    }

    pub fn nodes_v(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.v(k)).collect()
    }

    pub fn nodes_zeta(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.zeta(m)).collect()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Velocity coordinates of flat node `idx`.
    #[inline]
    pub fn velocity(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.v(i), self.v(j), self.v(k)]
    }

    /// Fourier coordinates of flat node `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.zeta(i), self.zeta(j), self.zeta(k)]
    }

    /// Trapezoid weight of every velocity node, `dv^3`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dv * self.dv * self.dv
    }

    /// Index of the node closest to zero along an axis (exactly zero here).
    #[inline]
    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    /// Nearest node index to velocity `x` along one axis, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x + self.half_width) / self.dv).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Heuristic half-width `L = 2R` with `R = 2 sqrt(2) T`.
    pub fn default_halfwidth(temperature: f64) -> Result<f64> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(4.0 * std::f64::consts::SQRT_2 * temperature)
    }
}

/// Real samples of a function on the velocity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: VelocityGrid,
    data: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            data: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_vec(grid: VelocityGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step: None });
        }
        Ok(Self { grid, data })
    }

    /// Sample `f` at every velocity node.
    pub fn from_fn<F>(grid: VelocityGrid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.velocity(idx)))
            .collect();
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.data[self.grid.index(ix, iy, iz)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Values along one axis through the grid center (the other two
    /// coordinates fixed at the node at zero). `axis` is 0, 1 or 2.
    pub fn axis_slice(&self, axis: usize) -> Vec<f64> {
        let c = self.grid.center_index();
        (0..self.grid.n())
            .map(|k| {
                let mut ijk = [c, c, c];
                ijk[axis] = k;
                self.at(ijk[0], ijk[1], ijk[2])
            })
            .collect()
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &RealField) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(RealField {
            grid: self.grid,
            data,
        })
    }

    pub fn scaled(&self, alpha: f64) -> RealField {
        RealField {
            grid: self.grid,
            data: self.data.iter().map(|x| alpha * x).collect(),
        }
    }

    /// L-infinity distance between two fields on the same grid.
    pub fn max_abs_diff(&self, other: &RealField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Complex samples on the Fourier grid; same layout as [`RealField`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: VelocityGrid,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn from_vec(grid: VelocityGrid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: data.len(),
            });
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { step: None });
        }
        Ok(Self { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> Complex64 {
        self.data[self.grid.index(ix, iy, iz)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}

/// Result of an inverse transform: the real part plus the largest
/// discarded imaginary magnitude.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub field: RealField,
    pub max_imag: f64,
}

/// 1D phase matrix `exp(sign * i * zeta_m * v_k)`, row-major in (out, in).
///
/// `zeta_m v_k = (m - n/2)(k - n/2) 2 pi / n`; the integer product is reduced
/// mod n before taking the sine and cosine so the table is exact to rounding.
fn phase_matrix(n: usize, sign: f64) -> Vec<Complex64> {
    let h = (n / 2) as i64;
    let ni = n as i64;
    let mut mat = Vec::with_capacity(n * n);
    for out in 0..ni {
        for inp in 0..ni {
            let r = ((out - h) * (inp - h)).rem_euclid(ni);
            let theta = 2.0 * PI * r as f64 / n as f64;
            mat.push(Complex64::from_polar(1.0, sign * theta));
        }
    }
    mat
}

/// Apply the same n x n matrix along one axis of an n^3 cube.
fn apply_axis(data: &[Complex64], n: usize, axis: usize, mat: &[Complex64]) -> Vec<Complex64> {
    let stride = [n * n, n, 1][axis];
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_iter_mut().enumerate().for_each(|(idx, slot)| {
        let m = (idx / stride) % n;
        let base = idx - m * stride;
        let row = &mat[m * n..(m + 1) * n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, w) in row.iter().enumerate() {
            acc += w * data[base + k * stride];
        }
        *slot = acc;
    });
    out
}

fn separable(data: Vec<Complex64>, n: usize, sign: f64, scale: f64) -> Vec<Complex64> {
    let mat = phase_matrix(n, sign);
    let mut d = apply_axis(&data, n, 2, &mat);
    d = apply_axis(&d, n, 1, &mat);
    d = apply_axis(&d, n, 0, &mat);
    for z in d.iter_mut() {
        *z *= scale;
    }
    d
}

/// Trapezoid-rule Fourier transform onto the Fourier grid,
/// `fh(zeta) = (2 pi)^{-3/2} dv^3 sum_k f(v_k) exp(-i zeta . v_k)`.
///
/// Evaluated as three 1D passes with exact phase tables; agrees with
/// [`forward_transform_direct`] to rounding.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = *f.grid();
    let data = f.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let scale = FT_NORM * grid.cell_volume();
    SpectralField {
        data: separable(data, grid.n(), -1.0, scale),
        grid,
    }
}

/// Inverse of [`forward_transform`], weight `dzeta^3 (2 pi)^{-3/2}` and
/// kernel `exp(+i zeta . v)`. Returns the real part and reports the largest
/// imaginary magnitude that was dropped.
pub fn inverse_transform(fh: &SpectralField) -> Inverse {
    let grid = *fh.grid();
    let dz = grid.dzeta();
    let scale = FT_NORM * dz * dz * dz;
    let out = separable(fh.data().to_vec(), grid.n(), 1.0, scale);
    let max_imag = out.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    Inverse {
        field: RealField {
            grid,
            data: out.into_iter().map(|z| z.re).collect(),
        },
        max_imag,
    }
}

/// [`inverse_transform`] that fails if the dropped imaginary part exceeds
/// `tolerance`.
pub fn inverse_transform_checked(fh: &SpectralField, tolerance: f64) -> Result<RealField> {
    let inv = inverse_transform(fh);
    if inv.max_imag > tolerance {
        return Err(Error::ImaginaryResidue {
            residue: inv.max_imag,
            tolerance,
        });
    }
    Ok(inv.field)
}

/// Direct O(N^6) evaluation of the forward trapezoid sum. Reference only.
pub fn forward_transform_direct(f: &RealField) -> SpectralField {
    let grid = *f.grid();
    let n = grid.n();
    let mat = phase_matrix(n, -1.0);
    let scale = FT_NORM * grid.cell_volume();
    let data = (0..grid.len())
        .into_par_iter()
        .map(|out| {
            let [mx, my, mz] = grid.unravel(out);
            let mut acc = Complex64::new(0.0, 0.0);
            for (inp, &fv) in f.data().iter().enumerate() {
                let [kx, ky, kz] = grid.unravel(inp);
                acc += fv * mat[mx * n + kx] * mat[my * n + ky] * mat[mz * n + kz];
            }
            acc * scale
        })
        .collect();
    SpectralField { grid, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn maxwellian(grid: VelocityGrid) -> RealField {
        RealField::from_fn(grid, |v| {
            let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            FT_NORM * (-v2 / 2.0).exp()
        })
    }

    #[test]
    fn grid_spacings() {
        let g = VelocityGrid::new(10.0, 48).unwrap();
        assert_relative_eq!(g.dv(), 5.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(g.dzeta(), PI / 10.0, max_relative = 1e-15);
        assert_relative_eq!(g.zeta_max(), 2.4 * PI, max_relative = 1e-15);
        assert_relative_eq!(g.dv() * g.dzeta(), 2.0 * PI / 48.0, max_relative = 1e-15);

        let g = VelocityGrid::new(5.66, 24).unwrap();
        assert_relative_eq!(g.dzeta(), PI / 5.66, max_relative = 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(VelocityGrid::new(10.0, 7).is_err());
        assert!(VelocityGrid::new(10.0, 6).is_err());
        assert!(VelocityGrid::new(0.0, 8).is_err());
        assert!(VelocityGrid::new(-1.0, 8).is_err());
    }

    #[test]
    fn nodes_increasing_and_centered() {
        let g = VelocityGrid::new(3.0, 12).unwrap();
        let v = g.nodes_v();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(v[0], -3.0);
        assert_eq!(v[g.center_index()], 0.0);
        assert_eq!(g.zeta(g.center_index()), 0.0);
        assert!((v[11] - (3.0 - g.dv())).abs() < 1e-15);
    }

    #[test]
    fn default_halfwidth_values() {
        assert!((VelocityGrid::default_halfwidth(1.0).unwrap() - 5.657).abs() < 1e-3);
        assert!((VelocityGrid::default_halfwidth(2.0).unwrap() - 11.314).abs() < 1e-3);
        assert!(VelocityGrid::default_halfwidth(0.0).is_err());
    }

    #[test]
    fn maxwellian_transform_is_gaussian() {
        let g = VelocityGrid::new(10.0, 48).unwrap();
        let fh = forward_transform(&maxwellian(g));
        let mut worst = 0.0_f64;
        for (idx, z) in fh.data().iter().enumerate() {
            let k = g.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let exact = FT_NORM * (-k2 / 2.0).exp();
            worst = worst.max((z - exact).norm());
        }
        assert!(worst <= 1e-10, "max deviation {worst:e}");
    }

    #[test]
    fn zero_in_zero_out() {
        let g = VelocityGrid::new(4.0, 8).unwrap();
        let fh = forward_transform(&RealField::zeros(g));
        assert_eq!(fh.max_abs(), 0.0);
        let inv = inverse_transform(&SpectralField::zeros(g));
        assert_eq!(inv.field.max_abs(), 0.0);
    }

    #[test]
    fn hermitian_pairing() {
        let g = VelocityGrid::new(4.0, 8).unwrap();
        let f = RealField::from_fn(g, |v| {
            (-(v[0] - 0.7).powi(2) - 2.0 * v[1] * v[1] - (v[2] + 0.3).abs()).exp()
        });
        let fh = forward_transform(&f);
        let n = g.n();
        // Node m pairs with n - m for m >= 1.
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    let a = fh.at(i, j, k);
                    let b = fh.at(n - i, n - j, n - k);
                    assert!((a - b.conj()).norm() <= 1e-15 * fh.max_abs());
                }
            }
        }
    }

    #[test]
    fn round_trip_and_direct_agree() {
        let g = VelocityGrid::new(5.0, 12).unwrap();
        let f = RealField::from_fn(g, |v| {
            (-(v[0] - 0.5).powi(2) - v[1] * v[1] / 3.0 - v[2] * v[2]).exp() * (1.0 + v[2])
        });
        let fast = forward_transform(&f);
        let slow = forward_transform_direct(&f);
        let scale = slow.max_abs();
        for (a, b) in fast.data().iter().zip(slow.data()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
        let back = inverse_transform(&fast);
        assert!(back.field.max_abs_diff(&f).unwrap() <= 1e-12 * f.max_abs());
        assert!(back.max_imag <= 1e-13 * f.max_abs());
    }

    #[test]
    fn parseval() {
        let g = VelocityGrid::new(8.0, 24).unwrap();
        let f = RealField::from_fn(g, |v| {
            (-(v[0] * v[0] + 0.5 * v[1] * v[1] + 2.0 * v[2] * v[2]) / 2.0).exp()
        });
        let fh = forward_transform(&f);
        let lhs: f64 = g.cell_volume() * f.data().iter().map(|x| x * x).sum::<f64>();
        let dz = g.dzeta();
        let rhs: f64 = dz * dz * dz * fh.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn checked_inverse_reports_residue() {
        let g = VelocityGrid::new(4.0, 8).unwrap();
        let mut fh = SpectralField::zeros(g);
        fh.data_mut()[g.index(1, 2, 3)] = Complex64::new(0.0, 1.0);
        assert!(matches!(
            inverse_transform_checked(&fh, 1e-12),
            Err(Error::ImaginaryResidue { .. })
        ));
    }
}
