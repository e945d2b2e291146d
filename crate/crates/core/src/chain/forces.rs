//! Chain energy, its exact gradient, and lumped follower loads.

use super::neighbors::{non_adjacent_pairs_within, NeighborList};
use super::{ChainState, SimConfig};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::loads::LoadSpec;

#[derive(Debug, Clone, Copy)]
struct PairPotential {
    k: f64,
    sigma: f64,
    m: f64,
    cutoff: f64,
    // value and derivative of the raw repulsion at the cutoff
    phi_c: f64,
    dphi_c: f64,
}

impl PairPotential {
    fn new(cfg: &SimConfig) -> Self {
        let mut p = PairPotential {
            k: cfg.k,
            sigma: cfg.repulsion_range,
            m: cfg.repulsion_exponent,
            cutoff: cfg.cutoff,
            phi_c: 0.0,
            dphi_c: 0.0,
        };
        p.phi_c = p.repulsion(cfg.cutoff);
        p.dphi_c = p.repulsion_derivative(cfg.cutoff);
        p
    }

    fn repulsion(&self, r: f64) -> f64 {
        (self.sigma / r).powf(self.m)
    }

    fn repulsion_derivative(&self, r: f64) -> f64 {
        -self.m / r * self.repulsion(r)
    }

    fn bonded(&self, r: f64) -> (f64, f64) {
        let e = self.k * (r - 1.0) * (r - 1.0) + self.repulsion(r);
        let de = 2.0 * self.k * (r - 1.0) + self.repulsion_derivative(r);
        (e, de)
    }

    /// Shifted-force repulsion: value and slope vanish at the cutoff.
    fn non_bonded(&self, r: f64) -> (f64, f64) {
        if r >= self.cutoff {
            return (0.0, 0.0);
        }
        let e = self.repulsion(r) - self.phi_c - self.dphi_c * (r - self.cutoff);
        let de = self.repulsion_derivative(r) - self.dphi_c;
        (e, de)
    }
}

fn check_coincident(r: f64, i: usize, j: usize) -> Result<()> {
    if r > 0.0 {
        Ok(())
    } else {
        Err(Error::Singular(format!("beads {i} and {j} coincide")))
    }
}

/// Total internal energy: bonded springs plus repulsion.
pub fn total_energy(state: &ChainState, config: &SimConfig) -> Result<f64> {
    let pot = PairPotential::new(config);
    let x = &state.positions;
    let mut e = 0.0;
    for i in 0..x.len().saturating_sub(1) {
        let r = x[i].distance(x[i + 1]);
        check_coincident(r, i, i + 1)?;
        e += pot.bonded(r).0;
    }
    for (i, j) in non_adjacent_pairs_within(x, config.cutoff) {
        let r = x[i].distance(x[j]);
        check_coincident(r, i, j)?;
        e += pot.non_bonded(r).0;
    }
    Ok(e)
}

fn accumulate_internal(
    pot: &PairPotential,
    x: &[Point2],
    pairs: &[(usize, usize)],
    out: &mut [Point2],
) -> Result<()> {
    for i in 0..x.len().saturating_sub(1) {
        let d = x[i] - x[i + 1];
        let r = d.norm();
        check_coincident(r, i, i + 1)?;
        let f = d * (-pot.bonded(r).1 / r);
        out[i] = out[i] + f;
        out[i + 1] = out[i + 1] - f;
    }
    for &(i, j) in pairs {
        let d = x[i] - x[j];
        let r = d.norm();
        check_coincident(r, i, j)?;
        let de = pot.non_bonded(r).1;
        if de != 0.0 {
            let f = d * (-de / r);
            out[i] = out[i] + f;
            out[j] = out[j] - f;
        }
    }
    Ok(())
}

/// Negative gradient of [`total_energy`] with respect to every bead position.
pub fn internal_forces(state: &ChainState, config: &SimConfig) -> Result<Vec<Point2>> {
    let pot = PairPotential::new(config);
    let pairs = non_adjacent_pairs_within(&state.positions, config.cutoff);
    let mut out = vec![Point2::ZERO; state.len()];
    accumulate_internal(&pot, &state.positions, &pairs, &mut out)?;
    Ok(out)
}

fn accumulate_external(spec: &LoadSpec, x: &[Point2], out: &mut [Point2]) {
    for i in 0..x.len().saturating_sub(1) {
        let d = x[i + 1] - x[i];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let t = d * (1.0 / len);
        let n = t.perp();
        let mut f = Point2::new(0.0, -spec.g * len);
        f.y += spec.p * d.x.abs();
        f = f + n * (spec.h * len);
        f = f + n * (spec.w * t.x * t.x.abs() * len);
        let half = f * 0.5;
        out[i] = out[i] + half;
        out[i + 1] = out[i + 1] + half;
    }
}

/// Loads lumped per segment, half to each end bead. Normal loads act along
/// the segment's left normal, which points up for a left-to-right chain.
pub fn external_forces(state: &ChainState, spec: &LoadSpec) -> Vec<Point2> {
    let mut out = vec![Point2::ZERO; state.len()];
    accumulate_external(spec, &state.positions, &mut out);
    out
}

/// Force evaluator reusing a neighbour list across steps.
#[derive(Debug, Clone)]
pub struct ChainForces {
    pot: PairPotential,
    spec: LoadSpec,
    neighbors: NeighborList,
}

impl ChainForces {
    pub fn new(config: &SimConfig, spec: LoadSpec) -> Self {
        ChainForces {
            pot: PairPotential::new(config),
            spec,
            neighbors: NeighborList::new(config.cutoff, config.skin),
        }
    }

    pub fn spec(&self) -> &LoadSpec {
        &self.spec
    }

    pub fn set_spec(&mut self, spec: LoadSpec) {
        self.spec = spec;
    }

    /// Writes the total force on every bead into `out`.
    pub fn evaluate(&mut self, x: &[Point2], out: &mut [Point2]) -> Result<()> {
        self.neighbors.update(x);
        out.fill(Point2::ZERO);
        accumulate_internal(&self.pot, x, self.neighbors.pairs(), out)?;
        accumulate_external(&self.spec, x, out);
        Ok(())
    }
}
