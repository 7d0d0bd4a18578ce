//! Trapezoid-rule velocity moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RealField;

/// Collision invariants of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub momentum: [f64; 3],
    /// `int |v|^2 f dv`, without the factor 1/2.
    pub energy: f64,
}

impl Moments {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.mass,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            self.energy,
        ]
    }

    /// Bulk velocity `momentum / mass`.
    pub fn velocity(&self) -> Result<[f64; 3]> {
        if self.mass == 0.0 || !self.mass.is_finite() {
            return Err(Error::InvalidParameter(
                "zero mass has no bulk velocity".into(),
            ));
        }
        Ok(self.momentum.map(|p| p / self.mass))
    }

    /// Temperature of the Maxwellian with the same invariants.
    pub fn temperature(&self) -> Result<f64> {
        let u = self.velocity()?;
        let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        Ok((self.energy / self.mass - u2) / 3.0)
    }
}

/// Central moments about the bulk velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherMoments {
    /// `(1/3) int |v - u|^2 f dv`.
    pub pressure: f64,
    /// `(1/2) int (v - u) |v - u|^2 f dv`.
    pub heat_flux: [f64; 3],
    /// `int |v - u|^4 f dv`.
    pub fourth_moment: f64,
}

pub fn moments(f: &RealField) -> Moments {
    let grid = f.grid();
    let w = grid.cell_volume();
    let mut acc = [0.0; 5];
    for (idx, &fv) in f.data().iter().enumerate() {
        let v = grid.velocity(idx);
        acc[0] += fv;
        acc[1] += fv * v[0];
        acc[2] += fv * v[1];
        acc[3] += fv * v[2];
        acc[4] += fv * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    Moments {
        mass: w * acc[0],
        momentum: [w * acc[1], w * acc[2], w * acc[3]],
        energy: w * acc[4],
    }
}

pub fn higher_moments(f: &RealField) -> Result<HigherMoments> {
    let u = moments(f).velocity()?;
    let grid = f.grid();
    let w = grid.cell_volume();
    let mut p = 0.0;
    let mut q = [0.0; 3];
    let mut m4 = 0.0;
    for (idx, &fv) in f.data().iter().enumerate() {
        let v = grid.velocity(idx);
        let c = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
        let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        p += fv * c2;
        for d in 0..3 {
            q[d] += fv * c[d] * c2;
        }
        m4 += fv * c2 * c2;
    }
    Ok(HigherMoments {
        pressure: w * p / 3.0,
        heat_flux: q.map(|x| 0.5 * w * x),
        fourth_moment: w * m4,
    })
}
