//! Damped velocity-Verlet integration and relaxation to rest.

use super::forces::ChainForces;
use super::{ChainState, SimConfig};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::loads::LoadSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxStatus {
    Converged,
    TimedOut,
}

impl RelaxStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RelaxStatus::Converged => "Converged",
            RelaxStatus::TimedOut => "TimedOut",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOutcome {
    pub status: RelaxStatus,
    pub steps: u64,
    /// Simulated time spent in this relaxation.
    pub elapsed: f64,
    /// Largest velocity component when the run stopped.
    pub residual_velocity: f64,
}

/// Half-kick, drift, half-kick. Damping `-γ v` enters the first half-kick
/// explicitly and the second implicitly, which keeps the update symmetric.
/// `forces` holds the force at the current positions on entry and at the new
/// positions on exit.
fn verlet_update<F>(state: &mut ChainState, forces: &mut [Point2], mut force_fn: F, config: &SimConfig) -> Result<()>
where
    F: FnMut(&[Point2], &mut [Point2]) -> Result<()>,
{
    let dt = state.dt;
    let c = 0.5 * dt / config.mass;
    let damp = config.gamma;
    for i in 0..state.len() {
        if state.fixed[i] {
            state.velocities[i] = Point2::ZERO;
            continue;
        }
        let v = state.velocities[i];
        let half = v + (forces[i] - v * damp) * c;
        state.velocities[i] = half;
        state.positions[i] = state.positions[i] + half * dt;
    }
    force_fn(&state.positions, forces)?;
    let denom = 1.0 + damp * c;
    for i in 0..state.len() {
        if state.fixed[i] {
            continue;
        }
        state.velocities[i] = (state.velocities[i] + forces[i] * c) * (1.0 / denom);
    }
    state.time += dt;
    state.steps += 1;
    Ok(())
}

/// One damped velocity-Verlet step of length `state.dt`. Fixed beads do not
/// move.
pub fn step_verlet<F>(state: &ChainState, mut force_fn: F, config: &SimConfig) -> Result<ChainState>
where
    F: FnMut(&[Point2], &mut [Point2]) -> Result<()>,
{
    let mut next = state.clone();
    let mut forces = vec![Point2::ZERO; state.len()];
    force_fn(&state.positions, &mut forces)?;
    verlet_update(&mut next, &mut forces, force_fn, config)?;
    Ok(next)
}

/// Time step keeping the fastest bead's displacement per step within
/// `[d_max / 2, d_max]`; inside that band the step is left alone.
pub fn adapt_timestep(state: &ChainState, config: &SimConfig) -> f64 {
    let v = state.max_speed();
    let clamp = |dt: f64| dt.clamp(config.dt_min, config.dt_max);
    if !(v > 0.0) {
        return config.dt_max;
    }
    let d = v * state.dt;
    if d > config.d_max || d < 0.5 * config.d_max {
        clamp(config.d_max / v)
    } else {
        clamp(state.dt)
    }
}

/// Integrator bound to one load case; keeps forces and the neighbour list
/// between steps.
#[derive(Debug, Clone)]
pub struct Relaxer {
    config: SimConfig,
    forces: ChainForces,
    cache: Vec<Point2>,
    cache_valid: bool,
}

impl Relaxer {
    pub fn new(config: SimConfig, spec: LoadSpec) -> Result<Self> {
        config.validate()?;
        spec.validate()?;
        Ok(Relaxer {
            forces: ChainForces::new(&config, spec),
            config,
            cache: Vec::new(),
            cache_valid: false,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn set_spec(&mut self, spec: LoadSpec) -> Result<()> {
        spec.validate()?;
        self.forces.set_spec(spec);
        self.cache_valid = false;
        Ok(())
    }

    pub fn step(&mut self, state: &mut ChainState) -> Result<()> {
        if !self.cache_valid || self.cache.len() != state.len() {
            self.cache.resize(state.len(), Point2::ZERO);
            self.forces.evaluate(&state.positions, &mut self.cache)?;
            self.cache_valid = true;
        }
        let forces = &mut self.forces;
        let result = verlet_update(state, &mut self.cache, |x, out| forces.evaluate(x, out), &self.config);
        if result.is_err() {
            self.cache_valid = false;
        }
        result
    }

    /// Integrates until every velocity component is below `v_eq` or `t_max`
    /// of simulated time has passed. Rest is only accepted after a few
    /// damping times so a state that starts at rest is not reported as
    /// converged before it has felt its loads.
    pub fn relax(&mut self, state: &mut ChainState) -> Result<RelaxOutcome> {
        let start_time = state.time;
        let start_steps = state.steps;
        let hold = if self.config.gamma > 0.0 {
            5.0 * self.config.mass / self.config.gamma
        } else {
            0.0
        };
        self.cache_valid = false;
        if !(state.dt > 0.0) {
            state.dt = self.config.dt_max;
        }
        state.dt = state.dt.clamp(self.config.dt_min, self.config.dt_max);
        loop {
            let elapsed = state.time - start_time;
            let vmax = state.max_velocity_component();
            let outcome = |status| RelaxOutcome {
                status,
                steps: state.steps - start_steps,
                elapsed,
                residual_velocity: vmax,
            };
            if state.steps > start_steps && elapsed >= hold && vmax < self.config.v_eq {
                return Ok(outcome(RelaxStatus::Converged));
            }
            if elapsed >= self.config.t_max {
                return Ok(outcome(RelaxStatus::TimedOut));
            }
            self.step(state)?;
            if state.steps % self.config.adapt_every as u64 == 0 {
                if state.positions.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
                    return Err(Error::Singular(format!(
                        "chain blew up at t = {}",
                        state.time
                    )));
                }
                state.dt = adapt_timestep(state, &self.config);
            }
        }
    }
}

/// Relaxes `state` under `spec` in place; see [`Relaxer::relax`].
pub fn relax_to_equilibrium(state: &mut ChainState, spec: &LoadSpec, config: &SimConfig) -> Result<RelaxOutcome> {
    Relaxer::new(*config, *spec)?.relax(state)
}
