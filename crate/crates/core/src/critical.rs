//! Critical slopes and the nonexistence test for smooth equilibria.
//!
//! A critical slope `alpha*` is a root of `f_n(alpha) = 0`; the straight line
//! at that slope solves the equilibrium equations for any tension. Consecutive
//! critical slopes split the `(alpha, T)` half-plane into invariant stripes.
//! When two of them bracket the chord slope of the supports and lie less than
//! `pi` apart, a string longer than `x̄0 / cos(δ/2)` has no smooth equilibrium
//! that avoids crossing itself.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::loads::{wrap_angle, LoadPair, LoadSpec};

/// Residual tolerance on `|f_n|` at a reported root, relative to the load scale.
pub const ROOT_TOL: f64 = 1e-12;
/// Below this `|f_n'|` a root is reported as a double (saddle-node) root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-6;
/// Number of samples on `[-pi, pi]` used by the generic scan.
pub const SCAN_POINTS: usize = 4096;
/// Relative slack on the length threshold so that interval endpoints count as
/// outside the critical range despite rounding in `cos(arccos(..))`.
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Simple,
    Double,
}

impl Multiplicity {
    pub fn as_str(self) -> &'static str {
        match self {
            Multiplicity::Simple => "simple",
            Multiplicity::Double => "double",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRoot {
    pub alpha: f64,
    pub multiplicity: Multiplicity,
}

/// Sorted critical slopes in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CriticalSet {
    roots: Vec<CriticalRoot>,
}

impl CriticalSet {
    /// Builds a set from raw angles, wrapping, sorting and merging duplicates.
    pub fn from_angles(spec: &LoadSpec, angles: impl IntoIterator<Item = f64>) -> Self {
        let mut alphas: Vec<f64> = angles.into_iter().map(wrap_angle).collect();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        // -pi and pi are the same slope; wrap_angle already maps -pi to pi
        let scale = spec.scale().max(f64::MIN_POSITIVE);
        let roots = alphas
            .into_iter()
            .map(|alpha| {
                let multiplicity = if spec.fn_derivative(alpha).abs() < DOUBLE_ROOT_TOL * scale {
                    Multiplicity::Double
                } else {
                    Multiplicity::Simple
                };
                CriticalRoot {
                    alpha,
                    multiplicity,
                }
            })
            .collect();
        CriticalSet { roots }
    }

    pub fn roots(&self) -> &[CriticalRoot] {
        &self.roots
    }

    pub fn angles(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.alpha).collect()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn has_double_root(&self) -> bool {
        self.roots
            .iter()
            .any(|r| r.multiplicity == Multiplicity::Double)
    }
}

/// Two consecutive critical slopes bracketing the chord slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevantRoots {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    /// Stripe width `alpha_hi - alpha_lo`.
    pub delta: f64,
    /// Rotation that makes the pair symmetric about zero.
    pub phi: f64,
}

impl RelevantRoots {
    fn new(alpha_lo: f64, alpha_hi: f64) -> Self {
        RelevantRoots {
            alpha_lo,
            alpha_hi,
            delta: alpha_hi - alpha_lo,
            phi: 0.5 * (alpha_lo + alpha_hi),
        }
    }

    pub fn brackets(&self, alpha: f64) -> bool {
        // allow the 2*pi shift used for the wrap-around stripe
        [-TAU, 0.0, TAU]
            .iter()
            .any(|shift| self.alpha_lo <= alpha + shift && alpha + shift <= self.alpha_hi)
    }
}

/// String length and right-hand support; the left support is the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub length: f64,
    pub x0: f64,
    pub y0: f64,
}

impl BoundaryData {
    pub fn new(length: f64, x0: f64, y0: f64) -> Result<Self> {
        if !(length.is_finite() && x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidInput("boundary values must be finite".into()));
        }
        if x0 <= 0.0 {
            return Err(Error::InvalidInput(format!("x0 must be positive, got {x0}")));
        }
        let chord = x0.hypot(y0);
        if length <= chord {
            return Err(Error::Infeasible(format!(
                "string length {length} does not exceed chord {chord}"
            )));
        }
        Ok(BoundaryData { length, x0, y0 })
    }

    /// Level supports at distance `x0`.
    pub fn level(length: f64, x0: f64) -> Result<Self> {
        BoundaryData::new(length, x0, 0.0)
    }

    pub fn chord(&self) -> f64 {
        self.x0.hypot(self.y0)
    }

    /// Slope of the chord, `arctan(y0/x0)`.
    pub fn alpha0(&self) -> f64 {
        (self.y0 / self.x0).atan()
    }

    pub fn end(&self) -> Point2 {
        Point2::new(self.x0, self.y0)
    }
}

/// All critical slopes of `spec` in `(-pi, pi]`. Gravity paired with one
/// opposing load, and each load alone, use closed forms; anything else goes
/// through the generic scan.
pub fn find_critical_roots(spec: &LoadSpec) -> CriticalSet {
    closed_form_roots(spec).unwrap_or_else(|| scan_roots(spec))
}

/// Closed-form critical slopes when `spec` is a single load or gravity plus
/// one opposing load.
pub fn closed_form_roots(spec: &LoadSpec) -> Option<CriticalSet> {
    let LoadSpec { g, p, w, h } = *spec;
    let vertical = [-FRAC_PI_2, FRAC_PI_2];
    match spec.active_count() {
        0 => Some(CriticalSet::default()),
        1 if h > 0.0 => Some(CriticalSet::default()),
        1 => Some(CriticalSet::from_angles(spec, vertical)),
        2 => {
            let (pair, ratio) = spec.pair()?;
            let angles: Vec<f64> = match pair {
                LoadPair::GravityBridge | LoadPair::GravityWind => {
                    let mut a = vertical.to_vec();
                    if ratio >= 1.0 {
                        let theta = (g / if p > 0.0 { p } else { w }).min(1.0).acos();
                        a.extend([theta, -theta, PI - theta, -(PI - theta)]);
                    }
                    a
                }
                LoadPair::GravityPressure => {
                    if ratio <= 1.0 {
                        let theta = (h / g).min(1.0).acos();
                        vec![theta, -theta]
                    } else {
                        Vec::new()
                    }
                }
            };
            Some(CriticalSet::from_angles(spec, angles))
        }
        _ => None,
    }
}

/// Generic root finder: sign-change scan plus bisection, and a second scan on
/// `f_n'` to catch tangential (double) roots.
pub fn scan_roots(spec: &LoadSpec) -> CriticalSet {
    let scale = spec.scale();
    if scale == 0.0 {
        return CriticalSet::default();
    }
    let f = |a: f64| spec.evaluate(a).f_n;
    let df = |a: f64| spec.fn_derivative(a);
    let tol = ROOT_TOL * scale;

    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| -PI + TAU * i as f64 / SCAN_POINTS as f64)
        .collect();
    let mut roots = Vec::new();

    for win in grid.windows(2) {
        let (a, b) = (win[0], win[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(f, a, b, fa));
        }
        // extremum of f_n inside (a, b): a double root hides there when the
        // extreme value touches zero
        let (da, db) = (df(a), df(b));
        if da * db < 0.0 {
            let m = bisect(df, a, b, da);
            if f(m).abs() < tol {
                roots.push(m);
            }
        }
    }
    if f(PI) == 0.0 {
        roots.push(PI);
    }
    CriticalSet::from_angles(spec, roots)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    // the endpoint with the smaller residual
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// The pair of consecutive critical slopes bracketing `alpha0`, if it exists
/// and is less than `pi` wide.
pub fn relevant_roots(cs: &CriticalSet, alpha0: f64) -> Option<RelevantRoots> {
    let a = cs.angles();
    if a.is_empty() {
        return None;
    }
    let mut candidates: Vec<(f64, f64)> = a.windows(2).map(|w| (w[0], w[1])).collect();
    // stripe that wraps through +-pi
    let first = a[0];
    let last = a[a.len() - 1];
    candidates.push((last - TAU, first));
    candidates.push((last, first + TAU));

    candidates
        .into_iter()
        .filter(|(lo, hi)| *lo <= alpha0 && alpha0 <= *hi && hi - lo < PI)
        .map(|(lo, hi)| RelevantRoots::new(lo, hi))
        .next()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonexistenceVerdict {
    /// No smooth, non-self-intersecting equilibrium exists.
    pub nonexistent: bool,
    /// The rotated half-width reached `pi/2`, so the length bound is vacuous.
    pub degenerate: bool,
    /// Length above which smooth solutions are excluded.
    pub threshold: f64,
}

/// Length test for relevant roots: rotates the frame to make the roots
/// symmetric and compares `L` with `x̄0 / cos(ᾱ*)`.
pub fn smooth_nonexistence(boundary: &BoundaryData, rel: &RelevantRoots) -> Result<NonexistenceVerdict> {
    if !rel.brackets(boundary.alpha0()) {
        return Err(Error::InvalidInput(format!(
            "relevant roots [{}, {}] do not bracket the chord slope {}",
            rel.alpha_lo,
            rel.alpha_hi,
            boundary.alpha0()
        )));
    }
    let (sin_phi, cos_phi) = rel.phi.sin_cos();
    let x_rot = boundary.x0 * cos_phi + boundary.y0 * sin_phi;
    let alpha_rot = rel.alpha_lo - rel.phi;
    let c = alpha_rot.cos();
    if c <= 0.0 {
        return Ok(NonexistenceVerdict {
            nonexistent: true,
            degenerate: true,
            threshold: f64::INFINITY,
        });
    }
    let threshold = x_rot / c;
    Ok(NonexistenceVerdict {
        nonexistent: boundary.length > threshold * (1.0 + ENDPOINT_TOL),
        degenerate: false,
        threshold,
    })
}

/// Convenience: finds relevant roots for `spec` and applies the length test.
/// `None` when the roots are not relevant (smooth solutions are not excluded).
pub fn nonexistence_for(spec: &LoadSpec, boundary: &BoundaryData) -> Result<Option<NonexistenceVerdict>> {
    let cs = find_critical_roots(spec);
    match relevant_roots(&cs, boundary.alpha0()) {
        Some(rel) => smooth_nonexistence(boundary, &rel).map(Some),
        None => Ok(None),
    }
}

fn require_level(boundary: &BoundaryData) -> Result<()> {
    if boundary.y0 != 0.0 {
        return Err(Error::InvalidInput(format!(
            "level supports (y0 = 0) required, got y0 = {}",
            boundary.y0
        )));
    }
    Ok(())
}

/// Open interval of load ratios (opposing / gravity) where level supports
/// admit no smooth equilibrium.
pub fn critical_ratio_interval(pair: LoadPair, boundary: &BoundaryData) -> Result<(f64, f64)> {
    require_level(boundary)?;
    let span = boundary.length / boundary.x0;
    Ok(match pair {
        LoadPair::GravityBridge | LoadPair::GravityWind => (1.0, span),
        LoadPair::GravityPressure => (1.0 / span, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationRow {
    pub ratio: f64,
    pub roots: CriticalSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationTable {
    pub pair: LoadPair,
    pub rows: Vec<BifurcationRow>,
}

impl BifurcationTable {
    /// Ratios at which the set contains a double root.
    pub fn saddle_nodes(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.roots.has_double_root() && r.roots.len() < self.generic_count(r.ratio))
            .map(|r| r.ratio)
            .collect()
    }

    // Pure-vertical double roots of p and w alone are not bifurcations, so
    // compare with the count just off the grid point.
    fn generic_count(&self, ratio: f64) -> usize {
        let below = find_critical_roots(&self.pair.with_ratio(ratio * (1.0 - 1e-6))).len();
        let above = find_critical_roots(&self.pair.with_ratio(ratio * (1.0 + 1e-6))).len();
        below.max(above)
    }

    /// CSV with header `ratio,root_index,alpha_star,multiplicity`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "ratio,root_index,alpha_star,multiplicity")?;
        for row in &self.rows {
            for (i, r) in row.roots.roots().iter().enumerate() {
                writeln!(
                    out,
                    "{:?},{},{:?},{}",
                    row.ratio,
                    i,
                    r.alpha,
                    r.multiplicity.as_str()
                )?;
            }
        }
        Ok(())
    }
}

/// Critical sets along a grid of load ratios with unit gravity.
pub fn bifurcation_sweep(pair: LoadPair, ratios: &[f64]) -> Result<BifurcationTable> {
    if ratios.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("ratio grid must be sorted".into()));
    }
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidInput("ratios must be finite and non-negative".into()));
    }
    let rows = ratios
        .par_iter()
        .map(|&ratio| BifurcationRow {
            ratio,
            roots: find_critical_roots(&pair.with_ratio(ratio)),
        })
        .collect();
    Ok(BifurcationTable { pair, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalEnd {
    Lower,
    Upper,
}

impl std::str::FromStr for IntervalEnd {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" => Ok(IntervalEnd::Lower),
            "upper" => Ok(IntervalEnd::Upper),
            other => Err(Error::InvalidInput(format!("unknown interval end `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimitingGeometry {
    Polyline(Vec<Point2>),
    /// Self-contact sets in before this end of the interval is reached.
    NotConstructible,
}

/// Kinked shape approached at one end of the critical ratio interval.
pub fn limiting_geometry(pair: LoadPair, boundary: &BoundaryData, end: IntervalEnd) -> Result<LimitingGeometry> {
    require_level(boundary)?;
    let (l, x0) = (boundary.length, boundary.x0);
    let wedge = |dir: f64| {
        let leg_angle = (x0 / l).acos();
        let vertex = Point2::new(0.5 * x0, dir * 0.5 * l * leg_angle.sin());
        LimitingGeometry::Polyline(vec![Point2::ZERO, vertex, Point2::new(x0, 0.0)])
    };
    Ok(match (pair, end) {
        (LoadPair::GravityPressure, IntervalEnd::Lower) => wedge(-1.0),
        (LoadPair::GravityPressure, IntervalEnd::Upper) => LimitingGeometry::NotConstructible,
        (LoadPair::GravityBridge | LoadPair::GravityWind, IntervalEnd::Upper) => wedge(1.0),
        (LoadPair::GravityBridge | LoadPair::GravityWind, IntervalEnd::Lower) => {
            let d = 0.5 * (l - x0);
            LimitingGeometry::Polyline(vec![
                Point2::ZERO,
                Point2::new(0.0, d),
                Point2::new(x0, d),
                Point2::new(x0, 0.0),
            ])
        }
    })
}
