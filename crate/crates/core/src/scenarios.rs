//! Analytic pdfs, the BKW exact solution and its time derivative, and the
//! source/loss model of the plasma run.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RealField, VelocityGrid};

/// Earliest BKW time accepted without an override.
pub const BKW_MIN_TIME: f64 = 5.5;

#[inline]
fn norm2(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

/// `(2 pi T)^{-3/2} exp(-|v|^2 / 2T)`.
pub fn maxwellian_pdf(v: [f64; 3], temperature: f64) -> f64 {
    (2.0 * PI * temperature).powf(-1.5) * (-0.5 * norm2(v) / temperature).exp()
}

/// Parameters of the BKW solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BkwParams {
    pub t: f64,
    #[serde(default = "one")]
    pub temperature: f64,
    /// Accept any `t` at which the pdf is still nonnegative
    /// (`t >= 6 ln(5/2)`) instead of `t >= 5.5`.
    #[serde(default)]
    pub allow_early: bool,
}

fn one() -> f64 {
    1.0
}

impl BkwParams {
    pub fn new(t: f64, temperature: f64) -> Result<Self> {
        let p = Self {
            t,
            temperature,
            allow_early: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("temperature", self.temperature)?;
        let min = if self.allow_early {
            6.0 * 2.5f64.ln()
        } else {
            BKW_MIN_TIME
        };
        if !(self.t.is_finite() && self.t >= min) {
            return Err(Error::InvalidParameter(format!(
                "BKW time must be at least {min}, got {}",
                self.t
            )));
        }
        Ok(())
    }

    /// `K = 1 - exp(-t/6)`.
    pub fn k(&self) -> f64 {
        -(-self.t / 6.0).exp_m1()
    }
}

/// Unchecked BKW density for given `K` and `T`.
fn bkw_from_k(v: [f64; 3], k: f64, temperature: f64) -> f64 {
    let s = norm2(v) / temperature;
    let pref = 1.0 / (2.0 * (2.0 * PI * k * temperature).powf(1.5));
    pref * (-0.5 * s / k).exp() * ((5.0 * k - 3.0) / k + (1.0 - k) / (k * k) * s)
}

/// BKW pdf at time `t`.
pub fn bkw_pdf(v: [f64; 3], p: &BkwParams) -> Result<f64> {
    p.validate()?;
    Ok(bkw_from_k(v, p.k(), p.temperature))
}

/// Time derivative of the BKW pdf, which equals the collision operator.
pub fn bkw_q(v: [f64; 3], p: &BkwParams) -> Result<f64> {
    p.validate()?;
    let k = p.k();
    let s = norm2(v) / p.temperature;
    let pref = 1.0 / (2.0 * (2.0 * PI * k * p.temperature).powf(1.5));
    let e = (-0.5 * s / k).exp();
    let poly = (5.0 * k - 3.0) / k + (1.0 - k) / (k * k) * s;
    // d/dK of the prefactor times the Gaussian, and of the polynomial.
    let dlog = -1.5 / k + 0.5 * s / (k * k);
    let dpoly = 3.0 / (k * k) + (1.0 / (k * k) - 2.0 / (k * k * k)) * s;
    let df_dk = pref * e * (dlog * poly + dpoly);
    let dk_dt = (1.0 - k) / 6.0;
    Ok(df_dk * dk_dt)
}

/// Cylindrically symmetric pdf: the BKW profile at `t0` with `v_x, v_y`
/// compressed by `dilation`, normalized to unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylindricalParams {
    #[serde(default = "two")]
    pub dilation: f64,
    #[serde(default = "bkw_min")]
    pub t0: f64,
    #[serde(default = "one")]
    pub temperature: f64,
}

fn two() -> f64 {
    2.0
}

fn bkw_min() -> f64 {
    BKW_MIN_TIME
}

impl Default for CylindricalParams {
    fn default() -> Self {
        Self {
            dilation: 2.0,
            t0: BKW_MIN_TIME,
            temperature: 1.0,
        }
    }
}

impl CylindricalParams {
    pub fn validate(&self) -> Result<()> {
        positive("dilation", self.dilation)?;
        BkwParams::new(self.t0, self.temperature).map(|_| ())
    }
}

pub fn cylindrical_pdf(v: [f64; 3], p: &CylindricalParams) -> Result<f64> {
    p.validate()?;
    let d = p.dilation;
    let k = -(-p.t0 / 6.0).exp_m1();
    // Substituting u = (d v_x, d v_y, v_z) turns this into a BKW density
    // in u, so the normalization gains a factor d^2.
    Ok(d * d * bkw_from_k([d * v[0], d * v[1], v[2]], k, p.temperature))
}

/// Two shifted Maxwellians, `omega M(v - v1, T1) + (1 - omega) M(v - v2, T2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureParams {
    pub omega: f64,
    pub v1: [f64; 3],
    pub v2: [f64; 3],
    pub t1: f64,
    pub t2: f64,
}

impl MixtureParams {
    /// Two equal counter-streaming beams at `(+-2, 0, 0)`, `T = 1/4`.
    pub fn two_beams() -> Self {
        Self {
            omega: 0.5,
            v1: [2.0, 0.0, 0.0],
            v2: [-2.0, 0.0, 0.0],
            t1: 0.25,
            t2: 0.25,
        }
    }

    /// A hot Maxwellian with a small cold bump on its tail.
    pub fn tail_bump() -> Self {
        Self {
            omega: 0.9999,
            v1: [0.0; 3],
            v2: [7.38, 0.0, 0.0],
            t1: 4.0,
            t2: 0.0625,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Error::InvalidParameter(format!(
                "omega must lie in [0, 1], got {}",
                self.omega
            )));
        }
        positive("T1", self.t1)?;
        positive("T2", self.t2)
    }

    /// Mass, momentum and `int |v|^2 f` of the continuous mixture.
    pub fn exact_moments(&self) -> (f64, [f64; 3], f64) {
        let w = [self.omega, 1.0 - self.omega];
        let vs = [self.v1, self.v2];
        let ts = [self.t1, self.t2];
        let mut mom = [0.0; 3];
        let mut energy = 0.0;
        for i in 0..2 {
            for d in 0..3 {
                mom[d] += w[i] * vs[i][d];
            }
            energy += w[i] * (norm2(vs[i]) + 3.0 * ts[i]);
        }
        (1.0, mom, energy)
    }
}

pub fn mixture_pdf(v: [f64; 3], p: &MixtureParams) -> Result<f64> {
    p.validate()?;
    let shift = |c: [f64; 3]| [v[0] - c[0], v[1] - c[1], v[2] - c[2]];
    Ok(p.omega * maxwellian_pdf(shift(p.v1), p.t1)
        + (1.0 - p.omega) * maxwellian_pdf(shift(p.v2), p.t2))
}

/// Gaussian source and smoothed-step loss in `v_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlasmaParams {
    pub c_s: f64,
    pub c_l: f64,
    pub v_s: [f64; 3],
    pub sigma_s: f64,
    pub v_l: f64,
    pub sigma_l: f64,
}

impl Default for PlasmaParams {
    fn default() -> Self {
        Self {
            c_s: 0.1,
            c_l: 10.0,
            v_s: [2.0, 0.0, 0.0],
            sigma_s: 0.25,
            v_l: -2.0,
            sigma_l: 1e-6,
        }
    }
}

impl PlasmaParams {
    pub fn validate(&self) -> Result<()> {
        positive("sigma_S", self.sigma_s)?;
        positive("sigma_L", self.sigma_l)?;
        if !(self.c_s >= 0.0 && self.c_l >= 0.0) {
            return Err(Error::InvalidParameter(
                "source and loss coefficients must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Source profile, `exp(-|v - v_S|^2 / 2 sigma_S^2)`.
    pub fn source(&self, v: [f64; 3]) -> f64 {
        let d = [v[0] - self.v_s[0], v[1] - self.v_s[1], v[2] - self.v_s[2]];
        (-0.5 * norm2(d) / (self.sigma_s * self.sigma_s)).exp()
    }

    /// Loss profile, `1/2 - arctan((v_x - v_L) / sigma_L) / pi`.
    pub fn loss(&self, v: [f64; 3]) -> f64 {
        0.5 - ((v[0] - self.v_l) / self.sigma_l).atan() / PI
    }

    /// True when both coefficients vanish and the model is pure collisions.
    pub fn is_inert(&self) -> bool {
        self.c_s == 0.0 && self.c_l == 0.0
    }
}

/// `c_S S(v) - c_L L(v) f`.
pub fn plasma_rhs_terms(v: [f64; 3], f_value: f64, p: &PlasmaParams) -> f64 {
    p.c_s * p.source(v) - p.c_l * p.loss(v) * f_value
}

/// Named initial conditions with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Scenario {
    Maxwellian {
        #[serde(default = "one")]
        temperature: f64,
    },
    Bkw(BkwParams),
    Cylindrical(CylindricalParams),
    Mixture(MixtureParams),
    /// A Maxwellian initial state evolved with source and loss.
    Plasma {
        #[serde(default = "one")]
        temperature: f64,
        #[serde(default)]
        plasma: PlasmaParams,
    },
}

impl Scenario {
    pub const NAMES: [&'static str; 5] = ["maxwellian", "bkw", "cylindrical", "mixture", "plasma"];

    /// Default parameters for a registry name.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "maxwellian" => Self::Maxwellian { temperature: 1.0 },
            "bkw" => Self::Bkw(BkwParams::new(BKW_MIN_TIME, 1.0)?),
            "cylindrical" => Self::Cylindrical(CylindricalParams::default()),
            "mixture" => Self::Mixture(MixtureParams::two_beams()),
            "plasma" => Self::Plasma {
                temperature: 1.0,
                plasma: PlasmaParams::default(),
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown scenario {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Maxwellian { .. } => "maxwellian",
            Self::Bkw(_) => "bkw",
            Self::Cylindrical(_) => "cylindrical",
            Self::Mixture(_) => "mixture",
            Self::Plasma { .. } => "plasma",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Maxwellian { temperature } => positive("temperature", *temperature),
            Self::Bkw(p) => p.validate(),
            Self::Cylindrical(p) => p.validate(),
            Self::Mixture(p) => p.validate(),
            Self::Plasma {
                temperature,
                plasma,
            } => {
                positive("temperature", *temperature)?;
                plasma.validate()
            }
        }
    }

    /// Start time of the scenario (the BKW time for `bkw`, else 0).
    pub fn start_time(&self) -> f64 {
        match self {
            Self::Bkw(p) => p.t,
            _ => 0.0,
        }
    }

    /// Initial pdf as a function of velocity. Parameters are validated once.
    pub fn pdf(&self) -> Result<Box<dyn Fn([f64; 3]) -> f64 + Send + Sync>> {
        self.validate()?;
        Ok(match *self {
            Self::Maxwellian { temperature } | Self::Plasma { temperature, .. } => {
                Box::new(move |v| maxwellian_pdf(v, temperature))
            }
            Self::Bkw(p) => {
                let k = p.k();
                Box::new(move |v| bkw_from_k(v, k, p.temperature))
            }
            Self::Cylindrical(p) => Box::new(move |v| cylindrical_pdf(v, &p).expect("validated")),
            Self::Mixture(p) => Box::new(move |v| mixture_pdf(v, &p).expect("validated")),
        })
    }

    /// Initial pdf sampled on a grid.
    pub fn sample(&self, grid: VelocityGrid) -> Result<RealField> {
        let f = self.pdf()?;
        Ok(RealField::from_fn(grid, f))
    }

    /// Source and loss terms, present only for `plasma`.
    pub fn plasma(&self) -> Option<&PlasmaParams> {
        match self {
            Self::Plasma { plasma, .. } => Some(plasma),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn maxwellian_peak() {
        assert_relative_eq!(maxwellian_pdf([0.0; 3], 1.0), 0.063494, max_relative = 1e-5);
    }

    #[test]
    fn bkw_k_value() {
        // 1 - exp(-11/12)
        let p = BkwParams::new(5.5, 1.0).unwrap();
        assert!((p.k() - 0.600_150_345_655_152_7).abs() < 1e-15);
    }

    #[test]
    fn bkw_rejects_early_times_without_override() {
        assert!(BkwParams::new(5.4, 1.0).is_err());
        let mut p = BkwParams {
            t: 5.499,
            temperature: 1.0,
            allow_early: true,
        };
        assert!(p.validate().is_ok());
        p.t = 5.49;
        assert!(p.validate().is_err());
        assert!(BkwParams::new(6.0, 0.0).is_err());
    }

    #[test]
    fn bkw_q_matches_finite_difference() {
        let h = 1e-5;
        for v in [[1.0, 0.0, 0.0], [0.3, -2.0, 1.1], [4.0, 0.0, 0.0]] {
            for t in [5.5, 7.0, 12.0] {
                let p = BkwParams::new(t, 1.0).unwrap();
                let at = |t| {
                    let q = BkwParams {
                        t,
                        temperature: 1.0,
                        allow_early: true,
                    };
                    bkw_pdf(v, &q).unwrap()
                };
                let (up, dn) = (at(t + h), at(t - h));
                let fd = (up - dn) / (2.0 * h);
                let q = bkw_q(v, &p).unwrap();
                assert!((q - fd).abs() <= 1e-8 * q.abs(), "{v:?} t={t}: {q} vs {fd}");
            }
        }
    }

    #[test]
    fn bkw_tends_to_maxwellian() {
        let p = BkwParams::new(400.0, 1.3).unwrap();
        for v in [[0.0; 3], [1.0, 2.0, 0.5]] {
            assert_relative_eq!(
                bkw_pdf(v, &p).unwrap(),
                maxwellian_pdf(v, 1.3),
                max_relative = 1e-12
            );
            assert!(bkw_q(v, &p).unwrap().abs() < 1e-20);
        }
    }

    #[test]
    fn cylindrical_with_unit_dilation_is_bkw() {
        let c = CylindricalParams {
            dilation: 1.0,
            t0: 5.5,
            temperature: 1.0,
        };
        let b = BkwParams::new(5.5, 1.0).unwrap();
        for v in [[0.0; 3], [1.0, -0.5, 2.0], [3.0, 3.0, 3.0]] {
            let a = cylindrical_pdf(v, &c).unwrap();
            let e = bkw_pdf(v, &b).unwrap();
            assert!((a - e).abs() <= 1e-14 * e.abs());
        }
    }

    #[test]
    fn cylindrical_anisotropy() {
        let c = CylindricalParams::default();
        // At large speed the Gaussian dominates: f(x e_x) ~ f(2x e_z).
        let fx = cylindrical_pdf([2.0, 0.0, 0.0], &c).unwrap();
        let fz = cylindrical_pdf([0.0, 0.0, 4.0], &c).unwrap();
        assert_relative_eq!(fx, fz, max_relative = 1e-14);
    }

    #[test]
    fn plasma_profiles() {
        let p = PlasmaParams::default();
        assert_relative_eq!(p.loss([-2.0, 0.0, 0.0]), 0.5, max_relative = 1e-15);
        assert!(p.loss([-50.0, 0.0, 0.0]) > 1.0 - 1e-6);
        assert!(p.loss([50.0, 0.0, 0.0]) < 1e-6);
        assert_eq!(p.source([2.0, 0.0, 0.0]), 1.0);
        assert!(p.source([2.1, 0.0, 0.0]) < 1.0);
        assert!(p.source([2.0, 0.0, 0.0]) > p.source([1.0, 0.3, 0.0]));
        let r = plasma_rhs_terms([2.0, 0.0, 0.0], 0.2, &p);
        assert_relative_eq!(r, 0.1 - 10.0 * p.loss([2.0, 0.0, 0.0]) * 0.2);
    }

    #[test]
    fn tail_bump_ratios() {
        // Bump amplitude relative to the dominant peak, and the dominant pdf
        // at the bump location relative to its own peak.
        let p = MixtureParams::tail_bump();
        let peak = p.omega * maxwellian_pdf([0.0; 3], p.t1);
        let bump = (1.0 - p.omega) * maxwellian_pdf([0.0; 3], p.t2);
        let ratio = bump / peak;
        assert!((0.04..0.06).contains(&ratio), "{ratio}");
        let there = p.omega * maxwellian_pdf(p.v2, p.t1);
        assert!((0.5e-5..2e-5).contains(&there), "{there}");
    }

    #[test]
    fn registry_round_trip() {
        for name in Scenario::NAMES {
            let s = Scenario::by_name(name).unwrap();
            assert_eq!(s.name(), name);
            let json = serde_json::to_string(&s).unwrap();
            let back: Scenario = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
        }
        assert!(Scenario::by_name("vortex").is_err());
        let s: Scenario = serde_json::from_str(r#"{"name":"bkw","t":6.0}"#).unwrap();
        assert_eq!(s.start_time(), 6.0);
        assert!(serde_json::from_str::<Scenario>(r#"{"name":"bkw","t":6.0,"x":1}"#).is_err());
    }
}
