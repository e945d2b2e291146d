//! Initial value problem for the intrinsic string equations
//!
//! ```text
//! dα/ds = f_n(α) / T,   dT/ds = f_t(α),   dx/ds = cos α,   dy/ds = sin α
//! ```
//!
//! integrated with classical RK4. Each step is checked against two half steps
//! (Richardson); the step is halved until the difference per unit arclength
//! is below tolerance. For single classical loads the first integral (`T cos α`
//! or `T`) is monitored and the whole run is repeated with a tighter local
//! tolerance when its drift exceeds `tol`.

use std::io::Write;

use crate::critical::CriticalSet;
use crate::error::{Error, Result};
use crate::loads::{wrap_angle, LoadSpec};

/// Tension at or below which the string is treated as slack.
pub const T_FLOOR: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Number of dense-output intervals over the integration span.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Angular tolerance for "on a critical slope".
pub const STRIPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringState {
    pub s: f64,
    pub alpha: f64,
    pub tension: f64,
    pub x: f64,
    pub y: f64,
}

impl StringState {
    /// State at the left support with the given slope and tension.
    pub fn at_origin(alpha: f64, tension: f64) -> Self {
        StringState {
            s: 0.0,
            alpha,
            tension,
            x: 0.0,
            y: 0.0,
        }
    }

    fn to_array(self) -> [f64; 4] {
        [self.alpha, self.tension, self.x, self.y]
    }

    fn from_array(s: f64, v: [f64; 4]) -> Self {
        StringState {
            s,
            alpha: v[0],
            tension: v[1],
            x: v[2],
            y: v[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedEnd,
    TensionVanished,
    StepFailure,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached_end",
            Termination::TensionVanished => "tension_vanished",
            Termination::StepFailure => "step_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<StringState>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn first(&self) -> &StringState {
        &self.states[0]
    }

    pub fn last(&self) -> &StringState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn min_tension(&self) -> f64 {
        self.states.iter().map(|s| s.tension).fold(f64::INFINITY, f64::min)
    }

    pub fn points(&self) -> Vec<crate::geometry::Point2> {
        self.states
            .iter()
            .map(|s| crate::geometry::Point2::new(s.x, s.y))
            .collect()
    }

    /// Linear interpolation of the state at arclength `s` (clamped).
    pub fn sample_at(&self, s: f64) -> StringState {
        let st = &self.states;
        if s <= st[0].s {
            return st[0];
        }
        let i = st.partition_point(|p| p.s < s);
        if i >= st.len() {
            return *self.last();
        }
        let (a, b) = (st[i - 1], st[i]);
        let t = (s - a.s) / (b.s - a.s);
        let lerp = |u: f64, v: f64| u + t * (v - u);
        StringState {
            s,
            alpha: lerp(a.alpha, b.alpha),
            tension: lerp(a.tension, b.tension),
            x: lerp(a.x, b.x),
            y: lerp(a.y, b.y),
        }
    }

    /// CSV with header `s,alpha,T,x,y` at full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,alpha,T,x,y")?;
        for p in &self.states {
            writeln!(out, "{:?},{:?},{:?},{:?},{:?}", p.s, p.alpha, p.tension, p.x, p.y)?;
        }
        Ok(())
    }
}

/// First integral of the equations for a single classical load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monitor {
    /// `T cos α`, for gravity or bridge load alone.
    HorizontalTension,
    /// `T`, for wind or pressure alone.
    Tension,
}

impl Monitor {
    pub fn eval(self, alpha: f64, tension: f64) -> f64 {
        match self {
            Monitor::HorizontalTension => tension * alpha.cos(),
            Monitor::Tension => tension,
        }
    }

    /// Relative drift between the first and last state of a trajectory.
    pub fn drift(self, traj: &Trajectory) -> f64 {
        let a = traj.first();
        let b = traj.last();
        let q0 = self.eval(a.alpha, a.tension);
        let q1 = self.eval(b.alpha, b.tension);
        (q1 - q0).abs() / q0.abs()
    }

    /// Largest relative deviation from the initial value along a trajectory.
    pub fn max_drift(self, traj: &Trajectory) -> f64 {
        let a = traj.first();
        let q0 = self.eval(a.alpha, a.tension);
        traj.states
            .iter()
            .map(|s| (self.eval(s.alpha, s.tension) - q0).abs() / q0.abs())
            .fold(0.0, f64::max)
    }
}

/// The conserved quantity for `spec`, when it is a single classical load.
pub fn invariant_monitor(spec: &LoadSpec) -> Option<Monitor> {
    if spec.active_count() != 1 {
        return None;
    }
    if spec.g > 0.0 || spec.p > 0.0 {
        Some(Monitor::HorizontalTension)
    } else {
        Some(Monitor::Tension)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    /// Target accuracy: global error per unit length and monitor drift.
    pub tol: f64,
    /// Dense output spacing; `None` means span / [`DEFAULT_SAMPLES`].
    pub output_step: Option<f64>,
    pub t_floor: f64,
    /// Smallest admissible step.
    pub s_min: f64,
    /// Upper bound on the number of refinement passes driven by the monitor.
    pub max_refinements: usize,
    /// When set, accepted internal steps are also recorded whenever the slope
    /// has turned by more than this since the last stored state, so tight
    /// loops near vanishing tension stay resolved in the polyline.
    pub max_turn: Option<f64>,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            tol: DEFAULT_TOL,
            output_step: None,
            t_floor: T_FLOOR,
            s_min: 1e-14,
            max_refinements: 4,
            max_turn: None,
        }
    }
}

impl IvpOptions {
    pub fn with_tol(tol: f64) -> Self {
        IvpOptions {
            tol,
            ..Default::default()
        }
    }
}

pub fn integrate_ivp(spec: &LoadSpec, init: StringState, s_max: f64, tol: f64) -> Result<Trajectory> {
    integrate_ivp_with(spec, init, s_max, &IvpOptions::with_tol(tol))
}

pub fn integrate_ivp_with(spec: &LoadSpec, init: StringState, s_max: f64, opts: &IvpOptions) -> Result<Trajectory> {
    if !(init.tension > 0.0) || !init.tension.is_finite() {
        return Err(Error::InvalidInput(format!(
            "initial tension must be positive, got {}",
            init.tension
        )));
    }
    if !(s_max > init.s) || !s_max.is_finite() {
        return Err(Error::InvalidInput(format!(
            "s_max ({s_max}) must exceed the initial arclength ({})",
            init.s
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    spec.validate()?;

    let monitor = invariant_monitor(spec);
    let mut local_tol = opts.tol;
    let mut traj = integrate_pass(spec, init, s_max, opts, local_tol);
    if let Some(m) = monitor {
        for _ in 0..opts.max_refinements {
            if traj.termination != Termination::ReachedEnd || m.max_drift(&traj) < opts.tol {
                break;
            }
            local_tol *= 0.05;
            traj = integrate_pass(spec, init, s_max, opts, local_tol);
        }
    }
    Ok(traj)
}

fn rhs(spec: &LoadSpec, v: &[f64; 4]) -> [f64; 4] {
    let load = spec.evaluate(v[0]);
    let (sa, ca) = v[0].sin_cos();
    [load.f_n / v[1], load.f_t, ca, sa]
}

fn rk4_step(spec: &LoadSpec, v: &[f64; 4], h: f64) -> [f64; 4] {
    let add = |a: &[f64; 4], k: &[f64; 4], c: f64| {
        [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]]
    };
    let k1 = rhs(spec, v);
    let k2 = rhs(spec, &add(v, &k1, 0.5 * h));
    let k3 = rhs(spec, &add(v, &k2, 0.5 * h));
    let k4 = rhs(spec, &add(v, &k3, h));
    let mut out = *v;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn integrate_pass(spec: &LoadSpec, init: StringState, s_max: f64, opts: &IvpOptions, tol: f64) -> Trajectory {
    let span = s_max - init.s;
    let out_step = opts
        .output_step
        .unwrap_or(span / DEFAULT_SAMPLES as f64)
        .min(span);
    let n_out = (span / out_step).ceil() as usize;
    let out_at = |k: usize| {
        if k >= n_out {
            s_max
        } else {
            init.s + k as f64 * out_step
        }
    };

    let mut states = Vec::with_capacity(n_out + 1);
    states.push(init);
    let mut s = init.s;
    let mut v = init.to_array();
    let mut next_out = 1;
    let mut h = out_step.min(0.01 * span.max(1e-3)).max(opts.s_min);
    let tension_scale = init.tension.max(1.0);

    let termination = loop {
        let target = out_at(next_out);
        let h_try = h.min(target - s);
        let full = rk4_step(spec, &v, h_try);
        let half = rk4_step(spec, &v, 0.5 * h_try);
        let fine = rk4_step(spec, &half, 0.5 * h_try);

        let slack = !(fine[1] > opts.t_floor) || !(full[1] > opts.t_floor);
        let finite = fine.iter().chain(full.iter()).all(|c| c.is_finite());
        let err = if slack || !finite {
            f64::INFINITY
        } else {
            let t_ref = v[1].abs().max(fine[1].abs());
            let e = [
                (fine[0] - full[0]).abs(),
                (fine[1] - full[1]).abs() / t_ref,
                (fine[2] - full[2]).abs(),
                (fine[3] - full[3]).abs(),
            ];
            e.iter().fold(0.0f64, |a, b| a.max(*b)) / 15.0
        };
        // error budget proportional to the step so the global error stays ~tol
        // with a floor at the rounding level of the state
        let budget = (tol * h_try / span.max(1.0)).max(64.0 * f64::EPSILON * (1.0 + v[2].abs() + v[3].abs()));

        if err <= budget {
            s = if h_try == target - s { target } else { s + h_try };
            // local extrapolation
            for i in 0..4 {
                v[i] = fine[i] + (fine[i] - full[i]) / 15.0;
            }
            if v[1] <= opts.t_floor {
                break Termination::TensionVanished;
            }
            if s >= target {
                states.push(StringState::from_array(s, v));
                next_out += 1;
                if next_out > n_out {
                    break Termination::ReachedEnd;
                }
            } else if let Some(turn) = opts.max_turn {
                let prev = states.last().map_or(init.alpha, |p| p.alpha);
                if (v[0] - prev).abs() > turn {
                    states.push(StringState::from_array(s, v));
                }
            }
            let grow = if err == 0.0 {
                2.0
            } else {
                (0.9 * (budget / err).powf(0.2)).clamp(1.0, 2.0)
            };
            h = (h_try * grow).min(out_step);
        } else {
            if slack && v[1] < 1e-6 * tension_scale && h_try < 1e-6 * span {
                break Termination::TensionVanished;
            }
            let shrink = if err.is_finite() {
                (0.9 * (budget / err).powf(0.2)).clamp(0.1, 0.5)
            } else {
                0.25
            };
            h = h_try * shrink;
            if h < opts.s_min {
                break if v[1] < 1e-6 * tension_scale {
                    Termination::TensionVanished
                } else {
                    Termination::StepFailure
                };
            }
        }
    };

    // keep the last accepted state when it fell between output points
    let last = StringState::from_array(s, v);
    if termination != Termination::ReachedEnd && states.last().map(|p| p.s) != Some(s) && v[1] > opts.t_floor {
        states.push(last);
    }
    Trajectory { states, termination }
}

/// Position of a slope relative to the critical slopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripePosition {
    /// Strictly inside stripe `k`. Stripe 0 is the one that contains `±pi`
    /// (below the first root and, periodically, above the last one); stripe
    /// `k >= 1` lies between roots `k-1` and `k`. With no roots there is a
    /// single stripe 0.
    Inside(usize),
    /// On critical slope `i` within [`STRIPE_TOL`].
    OnRoot(usize),
}

pub fn stripe_index(alpha: f64, cs: &CriticalSet) -> StripePosition {
    let a = wrap_angle(alpha);
    let roots = cs.angles();
    for (i, r) in roots.iter().enumerate() {
        if wrap_angle(a - r).abs() < STRIPE_TOL {
            return StripePosition::OnRoot(i);
        }
    }
    let k = roots.partition_point(|r| *r < a);
    if k == roots.len() {
        StripePosition::Inside(0)
    } else {
        StripePosition::Inside(k)
    }
}
