//! Seeded random states and Monte Carlo yield sweeps over initial fidelity.
//!
//! Every sample draws from its own ChaCha8 stream keyed by
//! `(seed, grid index, sample index)`, so results do not depend on how the
//! work is split across threads. All protocols at a grid point see the
//! same input states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bellstate::BellDiagonalState;
use crate::engine::{self, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::protocols::ProtocolSchedule;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_GRID: (f64, f64, f64) = (0.51, 0.99, 0.01);

/// Two sorted uniforms cut `[0, 1]` into three pieces distributed flat on
/// the 2-simplex.
fn flat_three<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
    if u > v {
        std::mem::swap(&mut u, &mut v);
    }
    [u, v - u, 1.0 - v]
}

/// Uniform on the whole simplex `a + b + c + d = 1`.
pub fn uniform_state<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalState {
    let mut u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    u.sort_by(f64::total_cmp);
    BellDiagonalState::normalized([u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]])
}

/// Uniform on `D_abcd` (some element above one half), by rejection.
pub fn distillable_state<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalState {
    loop {
        let s = uniform_state(rng);
        if s.domain().is_distillable() {
            return s;
        }
    }
}

/// `(a0, b, c, d)` with `(b, c, d)` flat on `b + c + d = 1 − a0`.
pub fn sample_at_fidelity<R: Rng + ?Sized>(a0: f64, rng: &mut R) -> Result<BellDiagonalState> {
    if !(a0 > 0.0 && a0 < 1.0) {
        return Err(Error::FidelityOutOfRange(a0));
    }
    let rest = 1.0 - a0;
    let [x, y, _] = flat_three(rng);
    let b = rest * x;
    let c = rest * (x + y) - b;
    let d = rest - rest * (x + y);
    BellDiagonalState::new(a0, b, c.max(0.0), d.max(0.0))
}

/// Independent stream for one (grid point, sample) pair.
pub fn sample_rng(seed: u64, grid_index: u64, sample_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&grid_index.to_le_bytes());
    key[16..24].copy_from_slice(&sample_index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Inclusive `start:stop:step` grid.
pub fn fidelity_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidConfig(format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Snap to 12 significant digits so 0.51 + 48·0.01 prints as 0.99.
    Ok((0..=n)
        .map(|i| format!("{:.11e}", start + i as f64 * step).parse().expect("float"))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocols: Vec<ProtocolSchedule>,
    pub fidelity_grid: Vec<f64>,
    pub samples_per_point: usize,
    pub rounds: usize,
    pub seed: u64,
    /// Emit a row for every round instead of only the last.
    pub all_rounds: bool,
}

impl SweepConfig {
    pub fn from_names<S: AsRef<str>>(
        names: &[S],
        fidelity_grid: Vec<f64>,
        samples_per_point: usize,
        rounds: usize,
        seed: u64,
    ) -> Result<Self> {
        let protocols = names.iter().map(|n| ProtocolSchedule::named(n.as_ref())).collect::<Result<_>>()?;
        let cfg = Self { protocols, fidelity_grid, samples_per_point, rounds, seed, all_rounds: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(Error::InvalidConfig("no protocols given".into()));
        }
        if self.fidelity_grid.is_empty() {
            return Err(Error::InvalidConfig("empty fidelity grid".into()));
        }
        if let Some(a0) = self.fidelity_grid.iter().find(|&&a0| !(a0 > 0.5 && a0 < 1.0)) {
            return Err(Error::InvalidConfig(format!("grid value {a0} outside (0.5, 1)")));
        }
        if self.samples_per_point == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample means for one (protocol, a0, round).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub protocol: String,
    pub a0: f64,
    pub r: usize,
    pub mean_yield: f64,
    pub mean_purity: f64,
    pub mean_entropy: f64,
    pub mean_improved_yield: f64,
    pub n: usize,
    pub seed: u64,
}

/// Rows ordered by protocol (as configured), then grid point, then round.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let first_round = if cfg.all_rounds { 1 } else { cfg.rounds };
    let mut rows = Vec::new();
    for schedule in &cfg.protocols {
        for (g, &a0) in cfg.fidelity_grid.iter().enumerate() {
            let per_sample: Vec<Vec<TrajectoryRecord>> = (0..cfg.samples_per_point)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(cfg.seed, g as u64, i as u64);
                    let s0 = sample_at_fidelity(a0, &mut rng)?;
                    let mut traj = engine::run(schedule, s0, cfg.rounds)?;
                    traj.drain(..first_round);
                    Ok(traj)
                })
                .collect::<Result<_>>()?;
            let n = cfg.samples_per_point as f64;
            for (k, r) in (first_round..=cfg.rounds).enumerate() {
                // Sequential reduction in sample order keeps the sums bit-stable.
                let mut sums = [0.0f64; 4];
                for traj in &per_sample {
                    let rec = &traj[k];
                    sums[0] += rec.pair_yield;
                    sums[1] += rec.state.a();
                    sums[2] += rec.entropy;
                    sums[3] += rec.improved_yield;
                }
                rows.push(SweepRow {
                    protocol: schedule.name().to_owned(),
                    a0,
                    r,
                    mean_yield: sums[0] / n,
                    mean_purity: sums[1] / n,
                    mean_entropy: sums[2] / n,
                    mean_improved_yield: sums[3] / n,
                    n: cfg.samples_per_point,
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(rows)
}
