//! Shooting solver for the two-point boundary value problem: find the slope
//! and tension at the left support so that the integrated string of length
//! `L` ends at `(x0, y0)`.
//!
//! Newton's method runs on `(α(0), ln T(0))`; the logarithm keeps the tension
//! positive, so compressive branches are never visited. Converged strings are
//! classified as smooth or self-intersecting.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rayon::prelude::*;

use crate::critical::{find_critical_roots, BoundaryData};
use crate::error::{Error, Result};
use crate::geometry::{segments_intersect, Point2};
use crate::loads::{wrap_angle, LoadSpec};
use crate::ode::{integrate_ivp_with, IvpOptions, StringState, Termination, Trajectory, T_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvpStatus {
    Smooth,
    SelfIntersecting,
    NotFound,
}

impl BvpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BvpStatus::Smooth => "Smooth",
            BvpStatus::SelfIntersecting => "SelfIntersecting",
            BvpStatus::NotFound => "NotFound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    pub status: BvpStatus,
    pub trajectory: Option<Trajectory>,
    /// Shooting unknowns at the last iterate.
    pub alpha_init: f64,
    pub tension_init: f64,
    /// Euclidean norm of the end-point mismatch.
    pub residual: f64,
    pub iterations: usize,
}

impl BvpSolution {
    fn not_found(alpha_init: f64, tension_init: f64, residual: f64, iterations: usize) -> Self {
        BvpSolution {
            status: BvpStatus::NotFound,
            trajectory: None,
            alpha_init,
            tension_init,
            residual,
            iterations,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.status == BvpStatus::Smooth
    }

    /// One-line status record, e.g.
    /// `{"status":"Smooth","alpha0_init":-0.5,"T0":1.2,"residual":1e-12}`.
    pub fn status_record(&self) -> String {
        format!(
            "{{\"status\":\"{}\",\"alpha0_init\":{},\"T0\":{},\"residual\":{}}}",
            self.status.as_str(),
            json_number(self.alpha_init),
            json_number(self.tension_init),
            json_number(self.residual)
        )
    }

    /// Trajectory CSV (when a trajectory exists) followed by nothing else;
    /// the status record is written separately.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match &self.trajectory {
            Some(t) => t.write_csv(out),
            None => {
                let mut out = out;
                writeln!(out, "s,alpha,T,x,y")?;
                Ok(())
            }
        }
    }
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        "null".to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the end-point mismatch, scaled by `max(1, x0)`.
    pub residual_tol: f64,
    /// Accuracy requested from each IVP solve.
    pub ivp_tol: f64,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
    /// Dense-output intervals on the returned trajectory.
    pub output_intervals: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            max_iterations: 60,
            residual_tol: 1e-9,
            ivp_tol: 1e-10,
            fd_step: 1e-6,
            output_intervals: 1000,
        }
    }
}

#[derive(Clone, Copy)]
struct Shooter<'a> {
    spec: &'a LoadSpec,
    boundary: &'a BoundaryData,
    opts: &'a ShootOptions,
    ivp_tol: f64,
}

struct NewtonFailure {
    u: [f64; 2],
    residual: f64,
    iterations: usize,
}

impl NewtonFailure {
    fn into_solution(self, earlier: usize) -> BvpSolution {
        BvpSolution::not_found(self.u[0], self.u[1].exp(), self.residual, earlier + self.iterations)
    }
}

impl Shooter<'_> {
    fn integrate(&self, alpha: f64, log_t: f64, dense: bool) -> Option<Trajectory> {
        let tension = log_t.exp();
        if !(tension > T_FLOOR) || !tension.is_finite() {
            return None;
        }
        let l = self.boundary.length;
        let ivp = IvpOptions {
            tol: self.ivp_tol,
            output_step: Some(if dense {
                l / self.opts.output_intervals as f64
            } else {
                l
            }),
            max_turn: dense.then_some(MAX_SAMPLE_TURN),
            ..IvpOptions::default()
        };
        let traj = integrate_ivp_with(self.spec, StringState::at_origin(alpha, tension), l, &ivp).ok()?;
        (traj.termination == Termination::ReachedEnd).then_some(traj)
    }

    fn residual(&self, u: [f64; 2]) -> Option<[f64; 2]> {
        let traj = self.integrate(u[0], u[1], false)?;
        let end = traj.last();
        let r = [end.x - self.boundary.x0, end.y - self.boundary.y0];
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self, u: [f64; 2], r: [f64; 2]) -> Option<[[f64; 2]; 2]> {
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = self.opts.fd_step * u[k].abs().max(1.0);
            let mut up = u;
            up[k] += h;
            let col = match self.residual(up) {
                Some(rp) => [(rp[0] - r[0]) / h, (rp[1] - r[1]) / h],
                None => {
                    let mut down = u;
                    down[k] -= h;
                    let rm = self.residual(down)?;
                    [(r[0] - rm[0]) / h, (r[1] - rm[1]) / h]
                }
            };
            jac[0][k] = col[0];
            jac[1][k] = col[1];
        }
        Some(jac)
    }

    /// Damped Newton with an Armijo-type backtracking line search.
    fn newton(&self, mut u: [f64; 2], tol: f64, max_iterations: usize) -> std::result::Result<([f64; 2], [f64; 2], usize), NewtonFailure> {
        let fail = |u: [f64; 2], residual: f64, iterations: usize| NewtonFailure {
            u,
            residual,
            iterations,
        };
        let mut r = self.residual(u).ok_or_else(|| fail(u, f64::INFINITY, 0))?;
        let mut iterations = 0;
        while norm(r) >= tol {
            if iterations >= max_iterations {
                return Err(fail(u, norm(r), iterations));
            }
            iterations += 1;

            let j = self.jacobian(u, r).ok_or_else(|| fail(u, norm(r), iterations))?;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return Err(fail(u, norm(r), iterations));
            }
            let mut step = [
                -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
                -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
            ];
            // limit one step to half a radian in slope and a factor e^2 in tension
            let shrink = (0.5 / step[0].abs()).min(2.0 / step[1].abs()).min(1.0);
            step[0] *= shrink;
            step[1] *= shrink;

            let r_norm = norm(r);
            let mut lambda = 1.0;
            loop {
                let trial = [u[0] + lambda * step[0], u[1] + lambda * step[1]];
                if let Some(rt) = self.residual(trial) {
                    if norm(rt) <= (1.0 - 1e-4 * lambda) * r_norm {
                        u = trial;
                        r = rt;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < 1.0 / 1024.0 {
                    return Err(fail(u, r_norm, iterations));
                }
            }
        }
        Ok((u, r, iterations))
    }
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

/// Damped Newton shooting from one initial guess `(α(0), T(0))`.
pub fn shoot(spec: &LoadSpec, boundary: &BoundaryData, guess: (f64, f64)) -> Result<BvpSolution> {
    shoot_with(spec, boundary, guess, &ShootOptions::default())
}

pub fn shoot_with(spec: &LoadSpec, boundary: &BoundaryData, guess: (f64, f64), opts: &ShootOptions) -> Result<BvpSolution> {
    if !(guess.1 > 0.0) || !guess.1.is_finite() || !guess.0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "shooting guess needs finite slope and positive tension, got {guess:?}"
        )));
    }
    spec.validate()?;
    let shooter = Shooter {
        spec,
        boundary,
        opts,
        ivp_tol: opts.ivp_tol,
    };
    let tol = opts.residual_tol * boundary.x0.max(1.0);
    let u0 = [guess.0, guess.1.ln()];

    // coarse pass with a cheaper integrator, then polish at full accuracy
    let coarse = Shooter {
        ivp_tol: opts.ivp_tol * 100.0,
        ..shooter
    };
    let (u, iterations) = match coarse.newton(u0, (1e3 * tol).max(1e-7 * boundary.x0), opts.max_iterations) {
        Ok((u, _, it)) => match shooter.newton(u, tol, opts.max_iterations.saturating_sub(it)) {
            Ok((u, _, it2)) => (u, it + it2),
            Err(fail) => return Ok(fail.into_solution(it)),
        },
        Err(fail) => return Ok(fail.into_solution(0)),
    };

    let traj = match shooter.integrate(u[0], u[1], true) {
        Some(t) => t,
        None => return Ok(BvpSolution::not_found(u[0], u[1].exp(), f64::INFINITY, iterations)),
    };
    let end = traj.last();
    let residual = (end.x - boundary.x0).hypot(end.y - boundary.y0);
    let status = if traj.min_tension() <= T_FLOOR {
        BvpStatus::NotFound
    } else if self_intersects(&traj.points()) {
        BvpStatus::SelfIntersecting
    } else {
        BvpStatus::Smooth
    };
    Ok(BvpSolution {
        status,
        trajectory: Some(traj),
        alpha_init: wrap_angle(u[0]),
        tension_init: u[1].exp(),
        residual,
        iterations,
    })
}

/// Tension range of the multistart grid, before scaling by `load · L`.
pub const MULTISTART_TENSIONS: (f64, f64) = (1e-2, 1e2);
pub const MULTISTART_TENSION_COUNT: usize = 6;
pub const DEFAULT_MULTISTART: usize = 8;
/// Largest slope change between stored samples of a classified trajectory.
/// Near-kinked solutions carry loops far smaller than the output spacing;
/// without this they can hide a self-crossing.
pub const MAX_SAMPLE_TURN: f64 = 0.05;

/// Initial guesses: `alphas_per_stripe` slopes spread over each stripe whose
/// closure contains the chord slope, times log-spaced tensions.
pub fn multistart_guesses(spec: &LoadSpec, boundary: &BoundaryData, alphas_per_stripe: usize) -> Vec<(f64, f64)> {
    let alpha0 = boundary.alpha0();
    let roots = find_critical_roots(spec).angles();
    let mut stripes: Vec<(f64, f64)> = Vec::new();
    if roots.is_empty() {
        stripes.push((alpha0 - PI, alpha0 + PI));
    } else {
        let mut bounds = roots.clone();
        bounds.insert(0, roots[roots.len() - 1] - TAU);
        bounds.push(roots[0] + TAU);
        for w in bounds.windows(2) {
            if w[0] <= alpha0 && alpha0 <= w[1] && w[1] > w[0] {
                stripes.push((w[0], w[1]));
            }
        }
    }

    let scale = spec.scale().max(f64::MIN_POSITIVE) * boundary.length;
    let (t_lo, t_hi) = MULTISTART_TENSIONS;
    let n_t = MULTISTART_TENSION_COUNT;
    let tensions: Vec<f64> = (0..n_t)
        .map(|i| scale * t_lo * (t_hi / t_lo).powf(i as f64 / (n_t - 1) as f64))
        .collect();

    let m = alphas_per_stripe.max(1);
    let mut guesses = Vec::new();
    for (lo, hi) in stripes {
        for j in 0..m {
            let alpha = lo + (hi - lo) * (j as f64 + 0.5) / m as f64;
            for &t in &tensions {
                guesses.push((alpha, t));
            }
        }
    }
    guesses
}

/// Multistart shooting. Returns the smooth solution with the smallest
/// residual; otherwise a self-intersecting one; otherwise `NotFound`.
pub fn find_smooth_solution(spec: &LoadSpec, boundary: &BoundaryData, multistart: usize) -> Result<BvpSolution> {
    find_smooth_solution_with(spec, boundary, multistart, &ShootOptions::default())
}

pub fn find_smooth_solution_with(
    spec: &LoadSpec,
    boundary: &BoundaryData,
    multistart: usize,
    opts: &ShootOptions,
) -> Result<BvpSolution> {
    if multistart == 0 {
        return Err(Error::InvalidInput("multistart must be at least 1".into()));
    }
    spec.validate()?;
    let guesses = multistart_guesses(spec, boundary, multistart);
    let results: Vec<BvpSolution> = guesses
        .par_iter()
        .map(|&g| shoot_with(spec, boundary, g, opts))
        .collect::<Result<_>>()?;

    let best_of = |status: BvpStatus| {
        results
            .iter()
            .enumerate()
            .filter(|(_, r)| r.status == status)
            // ties resolved by guess index
            .min_by(|(i, a), (j, b)| a.residual.total_cmp(&b.residual).then(i.cmp(j)))
            .map(|(_, r)| r.clone())
    };
    if let Some(s) = best_of(BvpStatus::Smooth) {
        return Ok(s);
    }
    if let Some(s) = best_of(BvpStatus::SelfIntersecting) {
        return Ok(s);
    }
    let closest = results
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.residual.total_cmp(&b.residual).then(i.cmp(j)))
        .map(|(_, r)| r.clone())
        .unwrap_or_else(|| BvpSolution::not_found(f64::NAN, f64::NAN, f64::INFINITY, 0));
    Ok(BvpSolution {
        status: BvpStatus::NotFound,
        trajectory: None,
        ..closest
    })
}

/// True iff two non-adjacent segments of the polyline touch or cross.
/// Zero-length segments are ignored. For a closed polyline the first and
/// last segments count as adjacent.
pub fn self_intersects(points: &[Point2]) -> bool {
    let segs: Vec<(Point2, Point2)> = points
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| (w[0], w[1]))
        .collect();
    let closed = points.len() > 2 && points.first() == points.last();

    // bounding boxes let most pairs be skipped cheaply
    let boxes: Vec<[f64; 4]> = segs
        .iter()
        .map(|(a, b)| [a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y)])
        .collect();

    for (p, &(a, b)) in segs.iter().enumerate() {
        for (q, &(c, d)) in segs.iter().enumerate().skip(p + 1) {
            if q == p + 1 || (closed && p == 0 && q == segs.len() - 1) {
                continue;
            }
            let (bp, bq) = (boxes[p], boxes[q]);
            if bp[1] < bq[0] || bq[1] < bp[0] || bp[3] < bq[2] || bq[3] < bp[2] {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// True iff the trajectory has a tangent parallel to the chord: some sample
/// is within `tol` of `alpha0` (mod 2π), or the slope crosses `alpha0`
/// between consecutive samples.
pub fn chord_tangent_exists(traj: &Trajectory, alpha0: f64, tol: f64) -> bool {
    let offsets: Vec<f64> = traj.states.iter().map(|s| wrap_angle(s.alpha - alpha0)).collect();
    if offsets.iter().any(|d| d.abs() < tol) {
        return true;
    }
    // a sign change that is not a jump across the ±π cut
    offsets
        .windows(2)
        .any(|w| w[0].signum() != w[1].signum() && (w[0] - w[1]).abs() < PI)
}
