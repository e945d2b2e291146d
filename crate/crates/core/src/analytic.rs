//! Closed-form equilibria for the four classical loads between level
//! supports. These serve as oracles for the shooting solver and the bead
//! simulator.
//!
//! Orientation follows [`LoadSpec`]: gravity sags, the other three loads push
//! toward `+y` and produce arches.

use crate::critical::BoundaryData;
use crate::error::{Error, Result};
use crate::loads::LoadSpec;
use crate::ode::{StringState, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormKind {
    /// Gravity: catenary hanging below the supports.
    Catenary,
    /// Bridge load: parabolic arch.
    Parabola,
    /// Hydrostatic pressure: circular arch.
    Circle,
    /// Newtonian wind: inverted catenary with constant tension.
    WindCatenary,
}

impl ClosedFormKind {
    pub const ALL: [ClosedFormKind; 4] = [
        ClosedFormKind::Catenary,
        ClosedFormKind::Parabola,
        ClosedFormKind::Circle,
        ClosedFormKind::WindCatenary,
    ];

    pub fn load(self, intensity: f64) -> LoadSpec {
        match self {
            ClosedFormKind::Catenary => LoadSpec::gravity(intensity),
            ClosedFormKind::Parabola => LoadSpec::bridge(intensity),
            ClosedFormKind::Circle => LoadSpec::pressure(intensity),
            ClosedFormKind::WindCatenary => LoadSpec::wind(intensity),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormKind::Catenary => "catenary",
            ClosedFormKind::Parabola => "parabola",
            ClosedFormKind::Circle => "circle",
            ClosedFormKind::WindCatenary => "wind_catenary",
        }
    }
}

impl std::str::FromStr for ClosedFormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "catenary" | "g" | "gravity" => Ok(ClosedFormKind::Catenary),
            "parabola" | "p" | "bridge" => Ok(ClosedFormKind::Parabola),
            "circle" | "h" | "pressure" => Ok(ClosedFormKind::Circle),
            "wind_catenary" | "w" | "wind" => Ok(ClosedFormKind::WindCatenary),
            other => Err(Error::InvalidInput(format!("unknown closed-form kind `{other}`"))),
        }
    }
}

/// A closed-form equilibrium, evaluable at any arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSolution {
    pub kind: ClosedFormKind,
    pub intensity: f64,
    pub boundary: BoundaryData,
    /// `H` (horizontal tension) for gravity and bridge load, `T` for wind and
    /// pressure.
    pub shape_parameter: f64,
    /// Catenary length scale `a`, parabola curvature `c = p/H`, or circle
    /// radius `R`.
    scale: f64,
}

impl ClosedFormSolution {
    pub fn load(&self) -> LoadSpec {
        self.kind.load(self.intensity)
    }

    /// Catenary parameter `a = H/g` (or `T/w`), curvature `p/H` of the
    /// parabola, or radius of the circle.
    pub fn geometric_scale(&self) -> f64 {
        self.scale
    }

    pub fn state_at(&self, s: f64) -> StringState {
        let l = self.boundary.length;
        let x0 = self.boundary.x0;
        match self.kind {
            ClosedFormKind::Catenary | ClosedFormKind::WindCatenary => {
                let a = self.scale;
                let sigma = s - 0.5 * l;
                let u = 0.5 * x0 / a;
                let x = 0.5 * x0 + a * (sigma / a).asinh();
                let sag = a * ((1.0 + (sigma / a).powi(2)).sqrt() - u.cosh());
                let slope = (sigma / a).atan();
                if self.kind == ClosedFormKind::Catenary {
                    let tension = self.shape_parameter * (1.0 + (sigma / a).powi(2)).sqrt();
                    StringState { s, alpha: slope, tension, x, y: sag }
                } else {
                    StringState {
                        s,
                        alpha: -slope,
                        tension: self.shape_parameter,
                        x,
                        y: -sag,
                    }
                }
            }
            ClosedFormKind::Parabola => {
                let c = self.scale;
                let sigma = s - 0.5 * l;
                // signed horizontal offset from the apex with arclength sigma
                let t = invert_parabola_arc(c, sigma);
                let x = 0.5 * x0 + t;
                let y = 0.5 * c * (0.25 * x0 * x0 - t * t);
                let alpha = (-c * t).atan();
                let tension = self.shape_parameter / alpha.cos();
                StringState { s, alpha, tension, x, y }
            }
            ClosedFormKind::Circle => {
                let r = self.scale;
                let beta = 0.5 * l / r;
                let alpha = beta - s / r;
                StringState {
                    s,
                    alpha,
                    tension: self.shape_parameter,
                    x: 0.5 * x0 - r * alpha.sin(),
                    y: r * (alpha.cos() - beta.cos()),
                }
            }
        }
    }

    /// Height of the curve above abscissa `x` in `[0, x0]`.
    pub fn y_at_x(&self, x: f64) -> f64 {
        let x0 = self.boundary.x0;
        let t = x - 0.5 * x0;
        match self.kind {
            ClosedFormKind::Catenary | ClosedFormKind::WindCatenary => {
                let a = self.scale;
                let sag = a * ((t / a).cosh() - (0.5 * x0 / a).cosh());
                if self.kind == ClosedFormKind::Catenary {
                    sag
                } else {
                    -sag
                }
            }
            ClosedFormKind::Parabola => 0.5 * self.scale * (0.25 * x0 * x0 - t * t),
            ClosedFormKind::Circle => {
                let r = self.scale;
                let beta = 0.5 * self.boundary.length / r;
                (r * r - t * t).max(0.0).sqrt() - r * beta.cos()
            }
        }
    }

    /// Vertical offset of the midpoint from the chord (negative for a sag).
    pub fn midspan_offset(&self) -> f64 {
        self.y_at_x(0.5 * self.boundary.x0)
    }

    /// `intervals + 1` equally spaced states along the arclength.
    pub fn sample(&self, intervals: usize) -> Vec<StringState> {
        let l = self.boundary.length;
        (0..=intervals)
            .map(|i| self.state_at(l * i as f64 / intervals as f64))
            .collect()
    }

    pub fn to_trajectory(&self, intervals: usize) -> Trajectory {
        Trajectory {
            states: self.sample(intervals),
            termination: Termination::ReachedEnd,
        }
    }
}

/// Arclength from the apex of `y = -c t^2 / 2` to offset `t`.
fn parabola_arc(c: f64, t: f64) -> f64 {
    let q = c * t;
    if c == 0.0 {
        return t;
    }
    0.5 * (t * (1.0 + q * q).sqrt() + q.asinh() / c)
}

fn invert_parabola_arc(c: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let sign = sigma.signum();
    let target = sigma.abs();
    // arc >= |t|, so t lies in [0, target]
    let t = bisect_increasing(|t| parabola_arc(c, t) - target, 0.0, target, 0.0);
    sign * t
}

/// Bisection for an increasing function `f` on `[lo, hi]`, to the width the
/// floating-point grid allows or `|f| < tol`.
fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() < tol {
            return mid;
        }
        if v > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

const RESIDUAL_TOL: f64 = 1e-13;

/// Closed-form equilibrium for one classical load between level supports.
pub fn analytic_bvp(kind: ClosedFormKind, intensity: f64, boundary: &BoundaryData) -> Result<ClosedFormSolution> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::InvalidInput(format!("intensity must be positive, got {intensity}")));
    }
    if boundary.y0 != 0.0 {
        return Err(Error::InvalidInput("closed forms need level supports (y0 = 0)".into()));
    }
    let l = boundary.length;
    let x0 = boundary.x0;
    if l <= x0 {
        return Err(Error::Infeasible(format!("length {l} does not exceed span {x0}")));
    }
    let ratio = l / x0;

    let (shape_parameter, scale) = match kind {
        ClosedFormKind::Catenary | ClosedFormKind::WindCatenary => {
            // sinh(u)/u = L/x0, increasing in u
            let f = |u: f64| if u == 0.0 { 1.0 - ratio } else { u.sinh() / u - ratio };
            let mut hi = 1.0;
            while f(hi) < 0.0 {
                hi *= 2.0;
            }
            let u = bisect_increasing(f, 0.0, hi, RESIDUAL_TOL);
            let a = 0.5 * x0 / u;
            (intensity * a, a)
        }
        ClosedFormKind::Parabola => {
            // arclength of the arch as a function of c = p/H, increasing
            let f = |c: f64| 2.0 * parabola_arc(c, 0.5 * x0) - l;
            let mut hi = 1.0 / x0;
            while f(hi) < 0.0 {
                hi *= 2.0;
            }
            let c = bisect_increasing(f, 0.0, hi, RESIDUAL_TOL * l);
            (intensity / c, c)
        }
        ClosedFormKind::Circle => {
            if ratio > std::f64::consts::FRAC_PI_2 * (1.0 + 1e-15) {
                return Err(Error::Infeasible(format!(
                    "circular arc longer than a half circle (L/x0 = {ratio} > pi/2)"
                )));
            }
            // sin(beta)/beta = x0/L, decreasing in beta on (0, pi/2]
            let target = x0 / l;
            let f = |beta: f64| target - beta.sin() / beta;
            let beta = bisect_increasing(f, 1e-300, std::f64::consts::FRAC_PI_2, RESIDUAL_TOL);
            let r = 0.5 * l / beta;
            (intensity * r, r)
        }
    };

    Ok(ClosedFormSolution {
        kind,
        intensity,
        boundary: *boundary,
        shape_parameter,
        scale,
    })
}
