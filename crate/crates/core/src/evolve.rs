//! Time integration of `df/dt = Q(f, f)` plus optional source and loss.
//!
//! The history ring stores right-hand-side values at previous states, most
//! recent last. Euler and RK4 push the value at the state they step from
//! (for RK4 that is the first stage), so after four bootstrap steps the ring
//! holds `Q_0..Q_3` and Adams-Bashforth can take over from `f_4`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::collide::{collision_operator, conserve_project, ConservationBasis};
use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::kernel::CollisionParams;
use crate::moments::{higher_moments, moments};
use crate::scenarios::{plasma_rhs_terms, PlasmaParams};

/// Adams-Bashforth weights, newest first, over 24.
pub const AB4_WEIGHTS: [f64; 4] = [55.0, -59.0, 37.0, -9.0];

const HISTORY: usize = 4;

/// Right-hand side of the evolution equation.
pub trait Rhs {
    fn eval(&self, f: &RealField) -> Result<RealField>;
}

impl<F> Rhs for F
where
    F: Fn(&RealField) -> Result<RealField>,
{
    fn eval(&self, f: &RealField) -> Result<RealField> {
        self(f)
    }
}

/// Collision operator, optionally projected onto the conserving subspace,
/// plus optional source and loss terms (never projected).
#[derive(Debug, Clone)]
pub struct CollisionRhs {
    pub params: CollisionParams,
    pub basis: Option<ConservationBasis>,
    pub plasma: Option<PlasmaParams>,
}

impl CollisionRhs {
    pub fn new(
        params: CollisionParams,
        basis: Option<ConservationBasis>,
        plasma: Option<PlasmaParams>,
    ) -> Self {
        Self {
            params,
            basis,
            plasma,
        }
    }
}

impl Rhs for CollisionRhs {
    fn eval(&self, f: &RealField) -> Result<RealField> {
        let mut q = collision_operator(f, &self.params)?.q;
        if let Some(basis) = &self.basis {
            q = conserve_project(&q, basis)?;
        }
        if let Some(p) = &self.plasma {
            let grid = *f.grid();
            for (idx, (qv, &fv)) in q.data_mut().iter_mut().zip(f.data()).enumerate() {
                *qv += plasma_rhs_terms(grid.velocity(idx), fv, p);
            }
        }
        Ok(q)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub dt: f64,
    pub f: RealField,
    history: VecDeque<RealField>,
    pub step_index: usize,
}

impl EvolutionState {
    pub fn new(f: RealField, t: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !f.is_finite() {
            return Err(Error::NonFinite { step: Some(0) });
        }
        Ok(Self {
            t,
            dt,
            f,
            history: VecDeque::with_capacity(HISTORY),
            step_index: 0,
        })
    }

    /// Stored right-hand sides, oldest first.
    pub fn history(&self) -> impl Iterator<Item = &RealField> {
        self.history.iter()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    fn push(&mut self, q: RealField) {
        if self.history.len() == HISTORY {
            self.history.pop_front();
        }
        self.history.push_back(q);
    }

    fn finish(&mut self, f: RealField) -> Result<()> {
        if !f.is_finite() {
            return Err(Error::NonFinite {
                step: Some(self.step_index + 1),
            });
        }
        self.f = f;
        self.step_index += 1;
        self.t += self.dt;
        Ok(())
    }
}

pub fn step_euler<R: Rhs + ?Sized>(state: &mut EvolutionState, rhs: &R) -> Result<()> {
    let q = rhs.eval(&state.f)?;
    let f = state.f.axpy(state.dt, &q)?;
    state.push(q);
    state.finish(f)
}

pub fn step_rk4<R: Rhs + ?Sized>(state: &mut EvolutionState, rhs: &R) -> Result<()> {
    let dt = state.dt;
    let k1 = rhs.eval(&state.f)?;
    let k2 = rhs.eval(&state.f.axpy(0.5 * dt, &k1)?)?;
    let k3 = rhs.eval(&state.f.axpy(0.5 * dt, &k2)?)?;
    let k4 = rhs.eval(&state.f.axpy(dt, &k3)?)?;
    let mut f = state.f.clone();
    for (i, x) in f.data_mut().iter_mut().enumerate() {
        *x += dt / 6.0 * (k1.data()[i] + 2.0 * k2.data()[i] + 2.0 * k3.data()[i] + k4.data()[i]);
    }
    state.push(k1);
    state.finish(f)
}

/// Four-step Adams-Bashforth. Needs a full history ring.
pub fn step_ab4<R: Rhs + ?Sized>(state: &mut EvolutionState, rhs: &R) -> Result<()> {
    if state.history.len() < HISTORY {
        return Err(Error::InsufficientHistory {
            have: state.history.len(),
            need: HISTORY,
        });
    }
    let q = rhs.eval(&state.f)?;
    let h = &state.history;
    let (q1, q2, q3) = (&h[HISTORY - 1], &h[HISTORY - 2], &h[HISTORY - 3]);
    let c = state.dt / 24.0;
    let [w0, w1, w2, w3] = AB4_WEIGHTS;
    let mut f = state.f.clone();
    for (i, x) in f.data_mut().iter_mut().enumerate() {
        *x += c * (w0 * q.data()[i] + w1 * q1.data()[i] + w2 * q2.data()[i] + w3 * q3.data()[i]);
    }
    state.push(q);
    state.finish(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    Rk4,
    /// RK4 for the first four steps, then Adams-Bashforth.
    Ab4,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    /// Times at which to keep a copy of `f`.
    pub output_times: Vec<f64>,
    /// Abort when `min f < -threshold`; negativity is always logged.
    pub negativity_abort: Option<f64>,
}

/// One row of the moment log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub pressure: f64,
    pub heat_flux_x: f64,
    pub fourth_moment: f64,
}

impl MomentRecord {
    pub const CSV_HEADER: &'static str =
        "t,mass,px,py,pz,energy,pressure,heat_flux_x,fourth_moment";

    pub fn of(t: f64, f: &RealField) -> Self {
        let m = moments(f);
        let (pressure, heat_flux_x, fourth_moment) = match higher_moments(f) {
            Ok(h) => (h.pressure, h.heat_flux[0], h.fourth_moment),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        Self {
            t,
            mass: m.mass,
            momentum: m.momentum,
            energy: m.energy,
            pressure,
            heat_flux_x,
            fourth_moment,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.mass,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            self.energy,
            self.pressure,
            self.heat_flux_x,
            self.fourth_moment
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityEvent {
    pub step: usize,
    pub t: f64,
    pub min: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: EvolutionState,
    pub moments: Vec<MomentRecord>,
    pub snapshots: Vec<(f64, RealField)>,
    pub negativity: Vec<NegativityEvent>,
}

/// Number of steps of size `dt` from `t0` to `t1`; `dt` must divide the span.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    let n = (t1 - t0) / dt;
    if !(n >= 0.0) || (n - n.round()).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} does not divide [{t0}, {t1}]"
        )));
    }
    Ok(n.round() as usize)
}

/// Integrate from `f0` at `t0` to `options.t_final`, logging moments after
/// every step. `on_step` sees the state after each step.
pub fn run_evolution<R: Rhs + ?Sized>(
    f0: RealField,
    t0: f64,
    rhs: &R,
    options: &RunOptions,
    mut on_step: impl FnMut(&EvolutionState),
) -> Result<RunResult> {
    let steps = step_count(t0, options.t_final, options.dt)?;
    for &t in &options.output_times {
        step_count(t0, t, options.dt)?;
    }
    let mut state = EvolutionState::new(f0, t0, options.dt)?;
    let mut log = vec![MomentRecord::of(t0, &state.f)];
    let mut snapshots = vec![];
    let mut negativity = vec![];
    let wants = |t: f64| {
        options
            .output_times
            .iter()
            .any(|&o| (o - t).abs() < 0.5 * options.dt)
    };
    if wants(t0) {
        snapshots.push((t0, state.f.clone()));
    }

    for i in 0..steps {
        match options.integrator {
            Integrator::Euler => step_euler(&mut state, rhs)?,
            Integrator::Rk4 => step_rk4(&mut state, rhs)?,
            Integrator::Ab4 if state.history_len() < HISTORY => step_rk4(&mut state, rhs)?,
            Integrator::Ab4 => step_ab4(&mut state, rhs)?,
        }
        // Recompute t from the step count so long runs do not drift.
        state.t = t0 + (i + 1) as f64 * options.dt;
        log.push(MomentRecord::of(state.t, &state.f));
        let min = state.f.min();
        if min < 0.0 {
            negativity.push(NegativityEvent {
                step: state.step_index,
                t: state.t,
                min,
            });
            if let Some(th) = options.negativity_abort {
                if min < -th {
                    return Err(Error::InvalidParameter(format!(
                        "pdf reached {min:e} at step {}, below -{th:e}",
                        state.step_index
                    )));
                }
            }
        }
        if wants(state.t) {
            snapshots.push((state.t, state.f.clone()));
        }
        on_step(&state);
    }
    Ok(RunResult {
        state,
        moments: log,
        snapshots,
        negativity,
    })
}
