//! Slope-dependent load models.
//!
//! A string element with slope `alpha` (angle of the tangent to the `x`
//! axis) carries a normal force density `f_n` and a tangential force density
//! `f_t`. The four classical loads are
//!
//! * gravity `g` per unit arclength, pointing in `-y`;
//! * bridge load `p` per unit horizontal projection, pointing in `+y`;
//! * Newtonian wind `w`, normal to the tangent with intensity `w cos²α`;
//! * hydrostatic pressure `h` per unit arclength, along the outward normal.
//!
//! Gravity is counted positive in `f_n` (a sagging string has positive
//! curvature), the three opposing loads subtract. Bridge and wind loads see
//! only the horizontal projection `|cos α|`, so an element running right to
//! left (`cos α < 0`) is pushed the same physical way as one running left to
//! right; that is what puts critical slopes at `±(π - θ)` as well as `±θ`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Signed intensities of the four classical loads. All values are
/// non-negative; direction is fixed by the field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoadSpec {
    pub g: f64,
    pub p: f64,
    pub w: f64,
    pub h: f64,
}

/// Which opposing load is combined with gravity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoadPair {
    GravityBridge,
    GravityWind,
    GravityPressure,
}

impl LoadPair {
    pub fn name(self) -> &'static str {
        match self {
            LoadPair::GravityBridge => "g-p",
            LoadPair::GravityWind => "g-w",
            LoadPair::GravityPressure => "g-h",
        }
    }

    /// Load with unit gravity and the opposing intensity equal to `ratio`.
    pub fn with_ratio(self, ratio: f64) -> LoadSpec {
        self.with_gravity(1.0, ratio)
    }

    pub fn with_gravity(self, g: f64, ratio: f64) -> LoadSpec {
        let opposing = g * ratio;
        match self {
            LoadPair::GravityBridge => LoadSpec::new(g, opposing, 0.0, 0.0),
            LoadPair::GravityWind => LoadSpec::new(g, 0.0, opposing, 0.0),
            LoadPair::GravityPressure => LoadSpec::new(g, 0.0, 0.0, opposing),
        }
    }
}

impl std::str::FromStr for LoadPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g-p" | "gp" | "bridge" => Ok(LoadPair::GravityBridge),
            "g-w" | "gw" | "wind" => Ok(LoadPair::GravityWind),
            "g-h" | "gh" | "pressure" | "hydrostatic" => Ok(LoadPair::GravityPressure),
            other => Err(Error::InvalidInput(format!("unknown load pair `{other}`"))),
        }
    }
}

impl std::fmt::Display for LoadPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Normal and tangential force densities at one slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSample {
    pub f_n: f64,
    pub f_t: f64,
}

impl LoadSample {
    /// Radius of curvature `R = T / f_n` for tension `tension`. Infinite on a
    /// critical slope.
    pub fn curvature_radius(&self, tension: f64) -> f64 {
        tension / self.f_n
    }
}

impl LoadSpec {
    pub const fn new(g: f64, p: f64, w: f64, h: f64) -> Self {
        LoadSpec { g, p, w, h }
    }

    pub const fn gravity(g: f64) -> Self {
        LoadSpec::new(g, 0.0, 0.0, 0.0)
    }

    pub const fn bridge(p: f64) -> Self {
        LoadSpec::new(0.0, p, 0.0, 0.0)
    }

    pub const fn wind(w: f64) -> Self {
        LoadSpec::new(0.0, 0.0, w, 0.0)
    }

    pub const fn pressure(h: f64) -> Self {
        LoadSpec::new(0.0, 0.0, 0.0, h)
    }

    /// Rejects negative or non-finite intensities.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g", self.g), ("p", self.p), ("w", self.w), ("h", self.h)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "load intensity {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Number of non-zero intensities.
    pub fn active_count(&self) -> usize {
        [self.g, self.p, self.w, self.h]
            .iter()
            .filter(|v| **v != 0.0)
            .count()
    }

    /// Gravity combined with exactly one opposing load, if that is the shape
    /// of this spec.
    pub fn pair(&self) -> Option<(LoadPair, f64)> {
        if self.g <= 0.0 || self.active_count() != 2 {
            return None;
        }
        if self.p > 0.0 {
            Some((LoadPair::GravityBridge, self.p / self.g))
        } else if self.w > 0.0 {
            Some((LoadPair::GravityWind, self.w / self.g))
        } else {
            Some((LoadPair::GravityPressure, self.h / self.g))
        }
    }

    pub fn evaluate(&self, alpha: f64) -> LoadSample {
        let (s, c) = alpha.sin_cos();
        let f_n = self.g * c - (self.p + self.w) * c * c.abs() - self.h;
        let f_t = self.g * s - self.p * c.abs() * s;
        LoadSample { f_n, f_t }
    }

    /// `d f_n / d alpha`.
    pub fn fn_derivative(&self, alpha: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        -self.g * s + 2.0 * (self.p + self.w) * c.abs() * s
    }

    /// Largest magnitude any component of the load can reach; used to scale
    /// tolerances.
    pub fn scale(&self) -> f64 {
        self.g + self.p + self.w + self.h
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(alpha: f64) -> f64 {
    let mut a = alpha.rem_euclid(TAU);
    if a > std::f64::consts::PI {
        a -= TAU;
    }
    a
}
