//! Damped bead-chain model of a slightly extensible string.
//!
//! `n` beads of unit mass are joined by stiff springs of unit rest length.
//! Consecutive beads interact through `k (r - 1)^2 + (σ/r)^m`; every other
//! pair within the cutoff feels the same repulsion, shifted so energy and
//! force vanish at the cutoff. The end beads are pinned. External loads are
//! lumped per segment onto its two beads and follow the segment direction.

mod dynamics;
mod forces;
pub mod neighbors;
mod sweep;

pub use dynamics::{adapt_timestep, relax_to_equilibrium, step_verlet, RelaxOutcome, RelaxStatus, Relaxer};
pub use forces::{external_forces, internal_forces, total_energy, ChainForces};
pub use sweep::{detect_self_contact, filmstrip_svg, run_sweep, SweepResult, SweepSchedule, SweepSnapshot};
pub(crate) use sweep::write_state_rows;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Numerical and physical parameters of the bead chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Spring stiffness.
    pub k: f64,
    pub mass: f64,
    /// Linear velocity damping coefficient.
    pub gamma: f64,
    /// Equilibrium is declared once no velocity component exceeds this.
    pub v_eq: f64,
    /// Give up after this much simulated time.
    pub t_max: f64,
    /// Target upper bound on per-step bead displacement.
    pub d_max: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Steps between time-step adjustments.
    pub adapt_every: usize,
    pub repulsion_range: f64,
    pub repulsion_exponent: f64,
    pub cutoff: f64,
    /// Extra reach of the neighbour list beyond the cutoff.
    pub skin: f64,
    pub contact_threshold: f64,
    /// Amplitude of the random offset added to free beads of a freshly
    /// built chain; zero disables it.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            k: 1.0e4,
            mass: 1.0,
            gamma: 2.0,
            v_eq: 1.0e-6,
            t_max: 5.0e3,
            d_max: 0.01,
            dt_min: 1.0e-6,
            dt_max: 5.0e-3,
            adapt_every: 100,
            repulsion_range: 0.8,
            repulsion_exponent: 5.0,
            cutoff: 2.0,
            skin: 0.4,
            contact_threshold: 0.85,
            jitter: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k", self.k),
            ("mass", self.mass),
            ("v_eq", self.v_eq),
            ("t_max", self.t_max),
            ("d_max", self.d_max),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
            ("repulsion_range", self.repulsion_range),
            ("repulsion_exponent", self.repulsion_exponent),
            ("cutoff", self.cutoff),
            ("contact_threshold", self.contact_threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.d_max >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "d_max must be below the rest length 1, got {}",
                self.d_max
            )));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::InvalidInput(format!("jitter must be non-negative, got {}", self.jitter)));
        }
        if !(self.skin.is_finite() && self.skin >= 0.0) {
            return Err(Error::InvalidInput(format!("skin must be non-negative, got {}", self.skin)));
        }
        if self.dt_min > self.dt_max {
            return Err(Error::InvalidInput(format!(
                "dt_min {} exceeds dt_max {}",
                self.dt_min, self.dt_max
            )));
        }
        if self.adapt_every == 0 {
            return Err(Error::InvalidInput("adapt_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which side of the chord an initial arc bulges to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bulge {
    Up,
    Down,
}

/// Positions and velocities of all beads.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub positions: Vec<Point2>,
    pub velocities: Vec<Point2>,
    pub fixed: Vec<bool>,
    pub time: f64,
    pub dt: f64,
    pub steps: u64,
}

impl ChainState {
    /// Beads at rest at `positions`, with both ends pinned.
    pub fn new(positions: Vec<Point2>, dt: f64) -> Result<Self> {
        let n = positions.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("a chain needs at least 2 beads, got {n}")));
        }
        if positions.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidInput("bead positions must be finite".into()));
        }
        let mut fixed = vec![false; n];
        fixed[0] = true;
        fixed[n - 1] = true;
        Ok(ChainState {
            positions,
            velocities: vec![Point2::ZERO; n],
            fixed,
            time: 0.0,
            dt,
            steps: 0,
        })
    }

    /// `n` beads with unit spacing on a circular arc from the origin to
    /// `(span, 0)`. A straight chain when `span == n - 1`.
    pub fn arc(n: usize, span: f64, bulge: Bulge, dt: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("a chain needs at least 2 beads, got {n}")));
        }
        let length = (n - 1) as f64;
        if !(span > 0.0 && span <= length) {
            return Err(Error::Infeasible(format!(
                "span {span} must lie in (0, {length}] for {n} beads"
            )));
        }
        let segments = (n - 1) as f64;
        // Half-angle per chord `b`: the chord polygon spans
        // sin(segments * b) / sin(b) unit chords.
        let ratio = span;
        let positions = if (length - span).abs() <= 1e-12 * length {
            (0..n).map(|i| Point2::new(i as f64, 0.0)).collect()
        } else {
            let hi = std::f64::consts::PI / segments;
            let f = |b: f64| (segments * b).sin() / b.sin() - ratio;
            let (mut lo, mut hi) = (1e-12, hi * (1.0 - 1e-12));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let b = 0.5 * (lo + hi);
            let sign = match bulge {
                Bulge::Up => 1.0,
                Bulge::Down => -1.0,
            };
            // Start direction tilted by (segments - 1) * b off the chord.
            let mut p = Point2::ZERO;
            let mut out = Vec::with_capacity(n);
            out.push(p);
            for i in 0..n - 1 {
                let theta = sign * ((segments - 1.0) * b - 2.0 * b * i as f64);
                p = p + Point2::new(theta.cos(), theta.sin());
                out.push(p);
            }
            // Remove rounding drift so the last bead sits exactly on the support.
            let last = out[n - 1];
            let correction = Point2::new(span, 0.0) - last;
            for (i, q) in out.iter_mut().enumerate() {
                *q = *q + correction * (i as f64 / segments);
            }
            out
        };
        ChainState::new(positions, dt)
    }

    /// Offsets every free bead by up to `amplitude` in each coordinate.
    pub fn jitter(&mut self, amplitude: f64, seed: u64) {
        if amplitude == 0.0 {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (p, fixed) in self.positions.iter_mut().zip(&self.fixed) {
            let (dx, dy): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if !fixed {
                *p = *p + Point2::new(dx, dy) * amplitude;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest absolute velocity component over free beads.
    pub fn max_velocity_component(&self) -> f64 {
        self.velocities
            .iter()
            .zip(&self.fixed)
            .filter(|(_, f)| !**f)
            .map(|(v, _)| v.x.abs().max(v.y.abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities
            .iter()
            .zip(&self.fixed)
            .filter(|(_, f)| !**f)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[0].distance(w[1])).collect()
    }

    /// Slope of each segment in degrees.
    pub fn segment_slopes_deg(&self) -> Vec<f64> {
        self.positions
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d.y.atan2(d.x).to_degrees()
            })
            .collect()
    }
}
