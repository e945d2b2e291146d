//! Quasi-static load-ratio sweeps and self-contact detection.

use std::fmt::Write as _;
use std::io::Write;

use super::dynamics::{RelaxStatus, Relaxer};
use super::{Bulge, ChainState, SimConfig};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::loads::{LoadPair, LoadSpec};

/// Load ratios visited in order, each relaxed from the previous state.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSchedule {
    pub pair: LoadPair,
    pub gravity: f64,
    pub ratios: Vec<f64>,
}

impl SweepSchedule {
    /// `0, step, ..., ratio_max, ..., step, 0`.
    pub fn up_down(pair: LoadPair, gravity: f64, ratio_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("ratio step must be positive, got {step}")));
        }
        if !(ratio_max >= 0.0 && ratio_max.is_finite()) {
            return Err(Error::InvalidInput(format!("ratio_max must be non-negative, got {ratio_max}")));
        }
        let n = (ratio_max / step - 1e-9).ceil().max(0.0) as usize;
        let mut up: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
        up.push(ratio_max);
        let mut ratios = up.clone();
        ratios.extend(up.iter().rev().skip(1));
        SweepSchedule::new(pair, gravity, ratios)
    }

    pub fn new(pair: LoadPair, gravity: f64, ratios: Vec<f64>) -> Result<Self> {
        if !(gravity > 0.0 && gravity.is_finite()) {
            return Err(Error::InvalidInput(format!("gravity must be positive, got {gravity}")));
        }
        if ratios.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one ratio".into()));
        }
        if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidInput("ratios must be finite and non-negative".into()));
        }
        if ratios[0] != 0.0 || ratios[ratios.len() - 1] != 0.0 {
            return Err(Error::InvalidInput("ratio sequence must start and end at 0".into()));
        }
        Ok(SweepSchedule { pair, gravity, ratios })
    }

    pub fn spec(&self, ratio: f64) -> LoadSpec {
        self.pair.with_gravity(self.gravity, ratio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSnapshot {
    pub ratio: f64,
    pub status: RelaxStatus,
    pub state: ChainState,
    pub contacts: Vec<(usize, usize)>,
}

impl SweepSnapshot {
    pub fn converged(&self) -> bool {
        self.status == RelaxStatus::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub pair: LoadPair,
    pub snapshots: Vec<SweepSnapshot>,
}

impl SweepResult {
    /// One row per bead per snapshot:
    /// `ratio,bead_index,x,y,vx,vy,converged`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "ratio,bead_index,x,y,vx,vy,converged")?;
        for snap in &self.snapshots {
            write_state_rows(&mut out, snap.ratio, &snap.state, snap.converged())?;
        }
        Ok(())
    }

    /// Snapshots side by side, one panel per ratio, in a common scale.
    pub fn to_svg(&self) -> String {
        let states: Vec<(String, &ChainState, bool)> = self
            .snapshots
            .iter()
            .map(|s| (format!("{}={:.3}", ratio_label(self.pair), s.ratio), &s.state, !s.contacts.is_empty()))
            .collect();
        filmstrip_svg(&states)
    }
}

fn ratio_label(pair: LoadPair) -> &'static str {
    match pair {
        LoadPair::GravityBridge => "p/g",
        LoadPair::GravityWind => "w/g",
        LoadPair::GravityPressure => "h/g",
    }
}

pub(crate) fn write_state_rows<W: Write + ?Sized>(out: &mut W, ratio: f64, state: &ChainState, converged: bool) -> Result<()> {
    for (i, (p, v)) in state.positions.iter().zip(&state.velocities).enumerate() {
        writeln!(out, "{:?},{},{:?},{:?},{:?},{:?},{}", ratio, i, p.x, p.y, v.x, v.y, converged)?;
    }
    Ok(())
}

/// Renders labelled chain shapes left to right. Panels with self-contact are
/// drawn in red.
pub fn filmstrip_svg(panels: &[(String, &ChainState, bool)]) -> String {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (_, s, _) in panels {
        for p in &s.positions {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
    }
    if panels.is_empty() {
        lo = Point2::ZERO;
        hi = Point2::new(1.0, 1.0);
    }
    let (w, h) = ((hi.x - lo.x).max(1.0), (hi.y - lo.y).max(1.0));
    let panel = 200.0;
    let scale = (panel - 20.0) / w.max(h);
    let height = h * scale + 40.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="11">"#,
        panel * panels.len().max(1) as f64,
        height
    );
    for (k, (label, s, contact)) in panels.iter().enumerate() {
        let ox = k as f64 * panel + 10.0;
        let pts: Vec<String> = s
            .positions
            .iter()
            .map(|p| format!("{:.2},{:.2}", ox + (p.x - lo.x) * scale, 30.0 + (hi.y - p.y) * scale))
            .collect();
        let colour = if *contact { "#c0392b" } else { "#1f4e79" };
        let _ = writeln!(svg, r#"<text x="{:.1}" y="15">{}</text>"#, ox, label);
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            colour,
            pts.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Pairs at least two apart along the chain that sit closer than
/// `threshold`.
pub fn detect_self_contact(state: &ChainState, threshold: f64) -> Vec<(usize, usize)> {
    let x = &state.positions;
    super::neighbors::non_adjacent_pairs_within(x, threshold)
}

/// Relaxes under gravity alone from a sagging arc, then walks the schedule,
/// starting every ratio from the previous equilibrium (or last state, if it
/// timed out). The leading zero ratio is that gravity-only relaxation itself.
pub fn run_sweep(schedule: &SweepSchedule, n_beads: usize, span: f64, config: &SimConfig) -> Result<SweepResult> {
    let mut state = ChainState::arc(n_beads, span, Bulge::Down, config.dt_max)?;
    state.jitter(config.jitter, config.seed);
    let mut relaxer = Relaxer::new(*config, schedule.spec(0.0))?;
    let initial = relaxer.relax(&mut state)?;
    let mut snapshots = Vec::with_capacity(schedule.ratios.len());
    for (k, &ratio) in schedule.ratios.iter().enumerate() {
        let outcome = if k == 0 {
            initial
        } else {
            relaxer.set_spec(schedule.spec(ratio))?;
            relaxer.relax(&mut state)?
        };
        snapshots.push(SweepSnapshot {
            ratio,
            status: outcome.status,
            contacts: detect_self_contact(&state, config.contact_threshold),
            state: state.clone(),
        });
    }
    Ok(SweepResult { pair: schedule.pair, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn up_down_schedule() {
        let s = SweepSchedule::up_down(LoadPair::GravityPressure, 1.0, 0.3, 0.1).unwrap();
        let expect = [0.0, 0.1, 0.2, 0.3, 0.2, 0.1, 0.0];
        assert_eq!(s.ratios.len(), expect.len());
        for (a, b) in s.ratios.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(SweepSchedule::up_down(LoadPair::GravityPressure, 1.0, 0.3, 0.0).is_err());
        assert!(SweepSchedule::new(LoadPair::GravityBridge, 0.0, vec![0.0]).is_err());
    }

    #[test]
    fn single_zero_ratio_equals_plain_relaxation() {
        let cfg = SimConfig::default();
        let sched = SweepSchedule::new(LoadPair::GravityPressure, 1.0, vec![0.0]).unwrap();
        let res = run_sweep(&sched, 12, 8.0, &cfg).unwrap();
        assert_eq!(res.snapshots.len(), 1);
        let mut s = ChainState::arc(12, 8.0, Bulge::Down, cfg.dt_max).unwrap();
        let out = crate::chain::relax_to_equilibrium(&mut s, &LoadSpec::gravity(1.0), &cfg).unwrap();
        assert_eq!(out.status, res.snapshots[0].status);
        assert_eq!(s, res.snapshots[0].state);
        assert!(SweepSchedule::new(LoadPair::GravityPressure, 1.0, vec![0.0, 0.5]).is_err());
    }

    #[test]
    fn contact_in_hairpin() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, -1.0),
            Point2::new(0.0, -2.0),
            Point2::new(0.8, -2.0),
            Point2::new(0.8, -1.0),
            Point2::new(0.8, 0.0),
        ];
        let s = ChainState::new(pts, 1e-3).unwrap();
        let c = detect_self_contact(&s, 0.85);
        assert!(c.contains(&(0, 5)) && c.contains(&(1, 4)) && !c.contains(&(2, 3)));
        let straight = ChainState::arc(50, 49.0, Bulge::Down, 1e-3).unwrap();
        assert!(detect_self_contact(&straight, 0.85).is_empty());
    }

    #[test]
    fn csv_schema() {
        let s = ChainState::arc(3, 1.5, Bulge::Down, 1e-3).unwrap();
        let res = SweepResult {
            pair: LoadPair::GravityBridge,
            snapshots: vec![SweepSnapshot { ratio: 0.5, status: RelaxStatus::TimedOut, state: s, contacts: vec![] }],
        };
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ratio,bead_index,x,y,vx,vy,converged");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.5,0,0.0,0.0,0.0,0.0,false"));
        assert!(res.to_svg().contains("<polyline"));
    }
}
