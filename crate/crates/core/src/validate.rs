//! Acceptance criteria as runnable checks.
//!
//! Each criterion returns a [`Report`] of named measurements against pinned
//! limits. Nothing here panics on a failed check; callers decide what a
//! failure means.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::advisor::{e_rel, e_rel_asymptotic, e_tr_ub, fit_method1, MaxwellBound};
use crate::collide::{collision_operator, ConservationBasis};
use crate::error::{Error, Result};
use crate::evolve::{run_evolution, CollisionRhs, Integrator, RunOptions};
use crate::grid::{RealField, VelocityGrid};
use crate::kernel::{ghat_maxwell, ghat_quadrature, CollisionParams};
use crate::moments::moments;
use crate::oracle::{q_direct_field_isotropic, q_direct_shell, OracleRule};
use crate::scenarios::{
    bkw_pdf, bkw_q, cylindrical_pdf, maxwellian_pdf, mixture_pdf, BkwParams, CylindricalParams,
    MixtureParams, PlasmaParams,
};

/// `||Q^NC||_inf` for the unit Maxwellian, rows N = 24, 36, 48, columns
/// g_tr = 4, 8, 12, 16, 20.
pub const TABLE1_N: [usize; 3] = [24, 36, 48];
pub const TABLE1_GTR: [f64; 5] = [4.0, 8.0, 12.0, 16.0, 20.0];
pub const TABLE1: [[f64; 5]; 3] = [
    [2e-5, 3e-5, 4e-5, 2e-4, 2e-1],
    [2e-9, 4e-9, 4e-9, 2e-4, 2e-1],
    [8e-15, 1e-14, 5e-10, 2e-4, 2e-1],
];

/// Deep-truncation branch: `g_tr <= v - ASYM_LOW_OFFSET`, relative error
/// at most `ASYM_LOW_TOL`. Calibrated by a brute-force sweep over
/// `v in [1, 6]`, `g_tr in (0, 20]` at `k = 0.5`: with offset 1 the error
/// reaches 0.134 at v = 6, with offset 1.5 it stays below 0.047.
pub const ASYM_LOW_OFFSET: f64 = 1.5;
pub const ASYM_LOW_TOL: f64 = 0.05;
/// Tail branch: `g_tr >= v + ASYM_HIGH_OFFSET`. Same sweep: offset 1.5
/// reaches 0.221 at v = 6, offset 2 stays below 0.134.
pub const ASYM_HIGH_OFFSET: f64 = 2.0;
pub const ASYM_HIGH_TOL: f64 = 0.2;

const B_MAXWELL: f64 = 1.0 / (4.0 * PI);
const SEED: u64 = 20_140_605;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    AtMost,
    AtLeast,
    Below,
    Above,
}

/// One measurement against one limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn new(label: impl Into<String>, value: f64, relation: Relation, limit: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= limit,
            Relation::AtLeast => value >= limit,
            Relation::Below => value < limit,
            Relation::Above => value > limit,
        };
        Self {
            label: label.into(),
            value,
            relation,
            limit,
            passed,
        }
    }

    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(label, value, Relation::AtMost, limit)
    }

    pub fn at_least(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(label, value, Relation::AtLeast, limit)
    }

    pub fn below(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(label, value, Relation::Below, limit)
    }

    pub fn above(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(label, value, Relation::Above, limit)
    }

    /// `|log10(value / target)| <= log10(factor)`.
    pub fn within_factor(label: impl Into<String>, value: f64, target: f64, factor: f64) -> Self {
        let dev = (value / target).log10().abs();
        let mut c = Self::at_most(label, dev, factor.log10());
        if !dev.is_finite() {
            c.passed = false;
        }
        c
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
            Relation::Above => ">",
        };
        write!(
            f,
            "[{}] {}: {:.4e} {} {:.4e}",
            if self.passed { "ok" } else { "FAIL" },
            self.label,
            self.value,
            op,
            self.limit
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    Table1,
    BkwAccuracy,
    FailureDemo,
    Oracle,
    Soundness,
    Fits,
    Asymptotics,
    Conservation,
    Relaxation,
    Kernel,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::Table1,
        Criterion::BkwAccuracy,
        Criterion::FailureDemo,
        Criterion::Oracle,
        Criterion::Soundness,
        Criterion::Fits,
        Criterion::Asymptotics,
        Criterion::Conservation,
        Criterion::Relaxation,
        Criterion::Kernel,
    ];

    pub fn id(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed") + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Table1 => "table1",
            Criterion::BkwAccuracy => "bkw",
            Criterion::FailureDemo => "failure",
            Criterion::Oracle => "oracle",
            Criterion::Soundness => "soundness",
            Criterion::Fits => "fits",
            Criterion::Asymptotics => "asymptotics",
            Criterion::Conservation => "conservation",
            Criterion::Relaxation => "relaxation",
            Criterion::Kernel => "kernel",
        }
    }

    /// Accepts a name or a 1-based number.
    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s || c.id().to_string() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|c| c.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown criterion '{s}', expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Problem size for the conservation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    /// N = 32, conservation to 1e-5.
    Smoke,
    /// N = 48, conservation to 1e-12.
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub criterion: Criterion,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// One-line summary.
    pub fn line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "criterion {:>2} {:<13} {}  ({}/{} checks, {:.1} s)",
            self.criterion.id(),
            self.criterion.name(),
            if self.passed() { "PASS" } else { "FAIL" },
            ok,
            self.checks.len(),
            self.seconds
        )
    }
}

pub fn run(criterion: Criterion, scale: Scale) -> Result<Report> {
    let start = Instant::now();
    let checks = match criterion {
        Criterion::Table1 => table1()?,
        Criterion::BkwAccuracy => bkw_accuracy()?,
        Criterion::FailureDemo => failure_demo()?,
        Criterion::Oracle => oracle_equivalence()?,
        Criterion::Soundness => soundness()?,
        Criterion::Fits => fits()?,
        Criterion::Asymptotics => asymptotics()?,
        Criterion::Conservation => conservation(scale)?,
        Criterion::Relaxation => relaxation()?,
        Criterion::Kernel => kernel_identities()?,
    };
    Ok(Report {
        criterion,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn bkw55() -> BkwParams {
    BkwParams::new(5.5, 1.0).expect("t = 5.5 is valid")
}

/// Largest `|Q - Q_BKW|` and `|Q_BKW|` on the `v_x` axis through the origin.
fn bkw_slice_error(q: &RealField, p: &BkwParams) -> Result<(f64, f64)> {
    let grid = q.grid();
    let h = grid.n() / 2;
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..grid.n() {
        let exact = bkw_q([grid.v(i), 0.0, 0.0], p)?;
        err = err.max((q.at(i, h, h) - exact).abs());
        scale = scale.max(exact.abs());
    }
    Ok((err, scale))
}

fn bkw_q_nc(l: f64, n: usize, g_tr: f64) -> Result<(RealField, BkwParams)> {
    let p = bkw55();
    let grid = VelocityGrid::new(l, n)?;
    let f = RealField::from_fn(grid, |v| bkw_pdf(v, &p).unwrap_or(f64::NAN));
    Ok((
        collision_operator(&f, &CollisionParams::maxwell(g_tr)?)?.q,
        p,
    ))
}

fn table1() -> Result<Vec<Check>> {
    let mut measured = [[0.0; 5]; 3];
    for (r, &n) in TABLE1_N.iter().enumerate() {
        let grid = VelocityGrid::new(10.0, n)?;
        let f = RealField::from_fn(grid, |v| maxwellian_pdf(v, 1.0));
        for (c, &g) in TABLE1_GTR.iter().enumerate() {
            measured[r][c] = collision_operator(&f, &CollisionParams::maxwell(g)?)?
                .q
                .max_abs();
        }
    }
    let mut checks = vec![];
    for (r, &n) in TABLE1_N.iter().enumerate() {
        for (c, &g) in TABLE1_GTR.iter().enumerate() {
            checks.push(Check::within_factor(
                format!("N={n} g_tr={g}: log10 distance to {:e}", TABLE1[r][c]),
                measured[r][c],
                TABLE1[r][c],
                10.0,
            ));
        }
    }
    for c in 0..2 {
        for r in 1..3 {
            checks.push(Check::at_most(
                format!(
                    "g_tr={}: N={} over N={}",
                    TABLE1_GTR[c],
                    TABLE1_N[r],
                    TABLE1_N[r - 1]
                ),
                measured[r][c] / measured[r - 1][c],
                0.1,
            ));
        }
    }
    checks.push(Check::within_factor(
        "g_tr=12 N=48 stagnation level vs 5e-10",
        measured[2][2],
        5e-10,
        10.0,
    ));
    checks.push(Check::at_least(
        "g_tr=12 over g_tr=8 at N=48",
        measured[2][2] / measured[2][1],
        1e3,
    ));
    let col20: Vec<f64> = measured.iter().map(|row| row[4]).collect();
    let spread = col20.iter().cloned().fold(0.0, f64::max)
        / col20.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check::at_most("g_tr=20 max/min over N", spread, 1.5));
    Ok(checks)
}

fn bkw_accuracy() -> Result<Vec<Check>> {
    let (q8, p) = bkw_q_nc(10.0, 48, 8.0)?;
    let (e8, _) = bkw_slice_error(&q8, &p)?;
    let (q14, _) = bkw_q_nc(10.0, 48, 14.0)?;
    let (e14, _) = bkw_slice_error(&q14, &p)?;
    Ok(vec![
        Check::at_most("N=48 g_tr=8 slice error", e8, 1e-7),
        Check::at_least("N=48 g_tr=14 error floor", e14, 1e-10),
    ])
}

fn failure_demo() -> Result<Vec<Check>> {
    let l = 5.66;
    let (qa, p) = bkw_q_nc(l, 48, 2.0 * 3f64.sqrt() * l)?;
    let (ea, sa) = bkw_slice_error(&qa, &p)?;
    let (qb, _) = bkw_q_nc(l, 48, l)?;
    let (eb, sb) = bkw_slice_error(&qb, &p)?;
    Ok(vec![
        Check::above("g_tr=2 sqrt3 L relative slice deviation", ea / sa, 0.1),
        Check::at_most("g_tr=L relative slice deviation", eb / sb, 0.01),
    ])
}

fn oracle_equivalence() -> Result<Vec<Check>> {
    let p = bkw55();
    let params = CollisionParams::maxwell(6.0)?;
    let pdf = |v: [f64; 3]| bkw_pdf(v, &p).unwrap_or(f64::NAN);
    let g16 = VelocityGrid::new(10.0, 16)?;
    let g32 = VelocityGrid::new(10.0, 32)?;
    let (q_or, quad_err) = q_direct_field_isotropic(&pdf, g16, &params, &OracleRule::default())?;
    let q16 = collision_operator(&RealField::from_fn(g16, pdf), &params)?.q;
    let q32 = collision_operator(&RealField::from_fn(g32, pdf), &params)?.q;

    let (mut spec_est, mut gap, mut d_spec, mut d_or, mut scale) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for idx in 0..g16.len() {
        let [i, j, k] = g16.unravel(idx);
        let exact = bkw_q(g16.velocity(idx), &p)?;
        let s = q16.data()[idx];
        let o = q_or.data()[idx];
        // Node (i, j, k) of the N = 16 grid is node (2i, 2j, 2k) at N = 32.
        spec_est = spec_est.max((s - q32.at(2 * i, 2 * j, 2 * k)).abs());
        gap = gap.max((s - o).abs());
        d_spec = d_spec.max((s - exact).abs());
        d_or = d_or.max((o - exact).abs());
        scale = scale.max(exact.abs());
    }
    Ok(vec![
        Check::at_most(
            "relative gap vs quadrature + spectral estimate",
            gap / scale,
            (quad_err + spec_est) / scale,
        ),
        Check::at_most(
            "spectral over oracle distance to analytic",
            d_spec / d_or,
            2.0,
        ),
        Check::at_most(
            "oracle over spectral distance to analytic",
            d_or / d_spec,
            2.0,
        ),
    ])
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

fn soundness() -> Result<Vec<Check>> {
    let p = bkw55();
    let pdf = |v: [f64; 3]| bkw_pdf(v, &p).unwrap_or(f64::NAN);
    let bound = MaxwellBound::new(0.1, 0.5)?;
    let params = CollisionParams::maxwell(14.0)?;
    let rule = OracleRule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let points: Vec<[f64; 3]> = (0..20)
        .map(|_| {
            let r: f64 = rng.random_range(0.0..=5.0);
            unit_vector(&mut rng).map(|x| r * x)
        })
        .collect();
    let mut checks = vec![];
    for g in [4.0, 6.0, 8.0] {
        let mut violations = 0.0;
        let mut worst = 0.0_f64;
        for &v in &points {
            let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let shell = q_direct_shell(&pdf, v, &params, g, 14.0, &rule)?;
            let ub = e_tr_ub(g, speed, &bound, 0.0, B_MAXWELL)?;
            let ratio = (shell.value.abs() + shell.error) / ub;
            worst = worst.max(ratio);
            if ratio > 1.0 {
                violations += 1.0;
            }
        }
        checks.push(Check::at_most(
            format!("g_tr={g}: violations of 20"),
            violations,
            0.0,
        ));
        checks.push(Check::at_most(
            format!("g_tr={g}: worst error / bound"),
            worst,
            1.0,
        ));
    }
    Ok(checks)
}

fn fits() -> Result<Vec<Check>> {
    let grid = VelocityGrid::new(10.0, 48)?;
    let p = bkw55();
    let bkw = fit_method1(&RealField::from_fn(grid, |v| {
        bkw_pdf(v, &p).unwrap_or(f64::NAN)
    }))?;
    let cp = CylindricalParams::default();
    let cyl = fit_method1(&RealField::from_fn(grid, |v| {
        cylindrical_pdf(v, &cp).unwrap_or(f64::NAN)
    }))?;
    let mp = MixtureParams::two_beams();
    let mix = fit_method1(&RealField::from_fn(grid, |v| {
        mixture_pdf(v, &mp).unwrap_or(f64::NAN)
    }))?;

    let mut checks = vec![
        Check::at_most("BKW k - 0.5", (bkw.k - 0.5).abs(), 1e-3),
        Check::within_factor("BKW c vs 0.1, log10", bkw.c, 0.1, 1.2),
        Check::at_most(
            "cylindrical k relative to 0.9",
            (cyl.k / 0.9 - 1.0).abs(),
            5e-2,
        ),
        Check::within_factor("cylindrical c vs 1.5e5, log10", cyl.c, 1.5e5, 3.0),
        Check::at_most(
            "mixture k relative to 0.32",
            (mix.k / 0.32 - 1.0).abs(),
            5e-2,
        ),
        Check::within_factor("mixture c vs 1.1, log10", mix.c, 1.1, 3.0),
    ];
    let reading = MaxwellBound::new(0.1, 0.5)?;
    for (g, v_max) in [(6.0, 4.0), (8.0, 6.0)] {
        let n = (v_max / 0.1_f64).round() as usize;
        let worst = (1..=n)
            .map(|i| e_rel(g, i as f64 * 0.1, &reading, 0.0, B_MAXWELL, 1e-8))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::below(
            format!("max E_rel(g_tr={g}, v<={v_max})"),
            worst,
            0.1,
        ));
    }
    Ok(checks)
}

fn asymptotics() -> Result<Vec<Check>> {
    let bound = MaxwellBound::new(0.1, 0.5)?;
    let mut low = 0.0_f64;
    let mut high = 0.0_f64;
    for i in 0..25 {
        let v = 2.0 + 4.0 * i as f64 / 24.0;
        let g_low = (v - ASYM_LOW_OFFSET - 0.5 * (i % 3) as f64).max(0.25);
        let g_high = v + ASYM_HIGH_OFFSET + 0.75 * (i % 4) as f64;
        for (g, worst) in [(g_low, &mut low), (g_high, &mut high)] {
            let q = e_rel(g, v, &bound, 0.0, B_MAXWELL, 1e-10)?;
            let a = e_rel_asymptotic(g, v, &bound)?;
            *worst = worst.max((q - a).abs() / q);
        }
    }
    Ok(vec![
        Check::at_most(
            format!("g_tr <= v - {ASYM_LOW_OFFSET}: worst relative error"),
            low,
            ASYM_LOW_TOL,
        ),
        Check::at_most(
            format!("g_tr >= v + {ASYM_HIGH_OFFSET}: worst relative error"),
            high,
            ASYM_HIGH_TOL,
        ),
    ])
}

fn conservation(scale: Scale) -> Result<Vec<Check>> {
    let (n, tol) = match scale {
        Scale::Smoke => (32, 1e-5),
        Scale::Full => (48, 1e-12),
    };
    let grid = VelocityGrid::new(10.0, n)?;
    let p0 = bkw55();
    let f0 = RealField::from_fn(grid, |v| bkw_pdf(v, &p0).unwrap_or(f64::NAN));
    let rhs = CollisionRhs::new(
        CollisionParams::maxwell(8.0)?,
        Some(ConservationBasis::new(grid)?),
        None,
    );
    let options = RunOptions {
        dt: 0.05,
        t_final: 9.0,
        integrator: Integrator::Euler,
        output_times: vec![],
        negativity_abort: None,
    };
    let m0 = moments(&f0);
    let result = run_evolution(f0, 5.5, &rhs, &options, |_| {})?;
    let m1 = moments(&result.state.f);
    let momentum_scale = (m0.mass * m0.energy).sqrt();
    let dp = (0..3)
        .map(|d| (m1.momentum[d] - m0.momentum[d]).abs())
        .fold(0.0, f64::max);

    let p9 = BkwParams::new(9.0, 1.0)?;
    let h = n / 2;
    // Relative to the peak: the tails sit on the grid's aliasing floor.
    let mut err = 0.0_f64;
    let mut peak = 0.0_f64;
    for i in 0..n {
        let exact = bkw_pdf([grid.v(i), 0.0, 0.0], &p9)?;
        peak = peak.max(exact);
        err = err.max((result.state.f.at(i, h, h) - exact).abs());
    }
    let slice = err / peak;
    Ok(vec![
        Check::at_most(
            "relative mass drift",
            (m1.mass - m0.mass).abs() / m0.mass,
            tol,
        ),
        Check::at_most("relative momentum drift", dp / momentum_scale, tol),
        Check::at_most(
            "relative energy drift",
            (m1.energy - m0.energy).abs() / m0.energy,
            tol,
        ),
        Check::at_most("t=9 slice error / peak", slice, 1e-2),
    ])
}

/// Largest difference on the three axes through the origin between `f`
/// and the Maxwellian with its discrete mass, momentum and energy.
fn maxwellian_gap(f: &RealField) -> Result<f64> {
    let grid = f.grid();
    let m = moments(f);
    let u = m.velocity()?;
    let t = m.temperature()?;
    let h = grid.n() / 2;
    let mut gap = 0.0_f64;
    for axis in 0..3 {
        for i in 0..grid.n() {
            let mut k = [h, h, h];
            k[axis] = i;
            let idx = grid.index(k[0], k[1], k[2]);
            let v = grid.velocity(idx);
            let eq = m.mass * maxwellian_pdf([v[0] - u[0], v[1] - u[1], v[2] - u[2]], t);
            gap = gap.max((f.data()[idx] - eq).abs());
        }
    }
    Ok(gap)
}

fn relaxation() -> Result<Vec<Check>> {
    let params = CollisionParams::maxwell(10.0)?;
    let mut checks = vec![];

    let grid = VelocityGrid::new(10.0, 32)?;
    let basis = ConservationBasis::new(grid)?;
    let mp = MixtureParams::two_beams();
    let f0 = RealField::from_fn(grid, |v| mixture_pdf(v, &mp).unwrap_or(f64::NAN));
    let rhs = CollisionRhs::new(params, Some(basis.clone()), None);
    let options = RunOptions {
        dt: 0.2,
        t_final: 15.0,
        integrator: Integrator::Ab4,
        output_times: vec![],
        negativity_abort: None,
    };
    let mixed = run_evolution(f0, 0.0, &rhs, &options, |_| {})?;
    checks.push(Check::at_most(
        "mixture t=15 gap to Maxwellian",
        maxwellian_gap(&mixed.state.f)?,
        1e-4,
    ));

    let small = VelocityGrid::new(10.0, 16)?;
    let small_basis = ConservationBasis::new(small)?;
    let f0 = RealField::from_fn(small, |v| mixture_pdf(v, &mp).unwrap_or(f64::NAN));
    let inert = PlasmaParams {
        c_s: 0.0,
        c_l: 0.0,
        ..PlasmaParams::default()
    };
    let short = RunOptions {
        dt: 0.02,
        t_final: 0.12,
        integrator: Integrator::Ab4,
        output_times: vec![],
        negativity_abort: None,
    };
    let a = run_evolution(
        f0.clone(),
        0.0,
        &CollisionRhs::new(params, Some(small_basis.clone()), Some(inert)),
        &short,
        |_| {},
    )?;
    let b = run_evolution(
        f0,
        0.0,
        &CollisionRhs::new(params, Some(small_basis), None),
        &short,
        |_| {},
    )?;
    let differing = a
        .state
        .f
        .data()
        .iter()
        .zip(b.state.f.data())
        .filter(|(x, y)| x.to_bits() != y.to_bits())
        .count();
    checks.push(Check::at_most(
        "inert plasma vs pure collision: differing values",
        differing as f64,
        0.0,
    ));

    let f0 = RealField::from_fn(grid, |v| maxwellian_pdf(v, 1.0));
    let rhs = CollisionRhs::new(params, Some(basis), Some(PlasmaParams::default()));
    let options = RunOptions {
        dt: 0.02,
        t_final: 5.0,
        integrator: Integrator::Ab4,
        output_times: vec![],
        negativity_abort: None,
    };
    let plasma = run_evolution(f0, 0.0, &rhs, &options, |_| {})?;
    let drops = |get: fn(&crate::evolve::MomentRecord) -> f64| {
        plasma
            .moments
            .windows(2)
            .filter(|w| get(&w[1]) < get(&w[0]))
            .count() as f64
    };
    checks.push(Check::at_most(
        "plasma steps where density drops",
        drops(|m| m.mass),
        0.0,
    ));
    checks.push(Check::at_most(
        "plasma steps where energy drops",
        drops(|m| m.energy),
        0.0,
    ));
    let h = grid.n() / 2;
    let left = plasma.state.f.at(grid.nearest_index(-3.0), h, h);
    let right = plasma.state.f.at(grid.nearest_index(3.0), h, h);
    checks.push(Check::above(
        "plasma f(v_x=-3) / f(v_x=3) at t=5",
        left / right,
        2.0,
    ));
    Ok(checks)
}

fn kernel_identities() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut draw = |r: f64| -> [f64; 3] { std::array::from_fn(|_| rng.random_range(-r..r)) };
    let mut checks = vec![];
    let mut worst_zero = 0.0_f64;
    for g in [4.0, 8.0] {
        let params = CollisionParams::maxwell(g)?;
        let scale = 4.0 * PI * params.b_tilde * g.powi(3);
        for _ in 0..500 {
            let value = ghat_maxwell(draw(8.0), [0.0; 3], &params)?;
            worst_zero = worst_zero.max(value.abs() / scale);
        }
    }
    checks.push(Check::at_most(
        "max |Ghat(xi, 0)| / (4 pi B g_tr^3) over 1000 xi",
        worst_zero,
        1e-12,
    ));
    for g in [4.0, 8.0] {
        let params = CollisionParams::maxwell(g)?;
        let mut worst = 0.0_f64;
        for _ in 0..100 {
            let (xi, zeta) = (draw(4.0), draw(4.0));
            let closed = ghat_maxwell(xi, zeta, &params)?;
            let quad = ghat_quadrature(xi, zeta, &params, 1e-10)?;
            worst = worst.max((quad - closed).norm());
        }
        checks.push(Check::at_most(
            format!("g_tr={g}: closed form vs quadrature, 100 pairs"),
            worst,
            1e-8,
        ));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_relations() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::below("a", 1.0, 1.0).passed);
        assert!(Check::within_factor("a", 3e-5, 2e-5, 10.0).passed);
        assert!(!Check::within_factor("a", 3e-7, 2e-5, 10.0).passed);
        assert!(!Check::within_factor("a", 0.0, 2e-5, 10.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
    }

    #[test]
    fn criterion_names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(Criterion::parse(c.name()).unwrap(), c);
            assert_eq!(Criterion::parse(&c.id().to_string()).unwrap(), c);
        }
        assert!(Criterion::parse("nope").is_err());
    }

    #[test]
    fn empty_report_fails() {
        let r = Report {
            criterion: Criterion::Kernel,
            checks: vec![],
            seconds: 0.0,
        };
        assert!(!r.passed());
    }

    #[test]
    fn asymptotics_criterion_passes() {
        assert!(run(Criterion::Asymptotics, Scale::Smoke).unwrap().passed());
    }
}
