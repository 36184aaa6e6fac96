//! Trajectories, yield accounting and attractor classification.

use std::fmt;

use rayon::prelude::*;

use crate::bellstate::{entropy_bits, relabel_to_target, twirl_to_werner, BellDiagonalState, PauliRelabel};
use crate::error::Result;
use crate::maps::{apply_map, MapKind};
use crate::oracle::{bell_density, bell_diagonal_of, locc_round_matrix, PairDensityMatrix};
use crate::protocols::{self, PreOp, ProtocolSchedule, RoundKind};

/// Default tolerance for the fixed-point classes.
pub const FIXED_TOL: f64 = 1e-6;
/// Default tolerance for the period-2 class.
pub const CYCLE_TOL: f64 = 1e-3;
/// Consecutive rounds the period-2 test must hold.
pub const CYCLE_STREAK: usize = 4;

/// Snapshot after round `r` (`r = 0` is the input).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub r: usize,
    pub state: BellDiagonalState,
    /// Coinciding-outcome probability of round `r`; `None` at `r = 0`.
    pub p: Option<f64>,
    /// Surviving pairs per input pair.
    pub pair_yield: f64,
    /// Entropy of the surviving state in bits.
    pub entropy: f64,
    pub improved_yield: f64,
    /// Relabel applied before this round, if any.
    pub relabel: Option<PauliRelabel>,
    /// Largest Bell-basis coherence of the survivor (zero for closed-form rounds).
    pub max_offdiag: f64,
}

/// Yield left after handing survivors to a hashing protocol.
pub fn improved_yield(pair_yield: f64, entropy: f64) -> f64 {
    if entropy < 1.0 {
        pair_yield * (1.0 - entropy)
    } else {
        0.0
    }
}

/// Working state of one trajectory. Custom rounds keep the full survivor
/// matrix; closed-form rounds act on the Bell diagonal only.
#[derive(Debug, Clone)]
struct Working {
    diag: BellDiagonalState,
    coherent: Option<PairDensityMatrix>,
}

struct Advance {
    p: f64,
    relabel: Option<PauliRelabel>,
    max_offdiag: f64,
}

impl Working {
    fn new(s: BellDiagonalState) -> Self {
        Self { diag: s, coherent: None }
    }

    fn entropy(&self) -> f64 {
        match &self.coherent {
            Some(m) => m.entropy_bits(),
            None => entropy_bits(&self.diag),
        }
    }

    fn advance(&mut self, schedule: &ProtocolSchedule, r: usize) -> Result<Advance> {
        let round = schedule.round(r);
        let mut relabel = None;
        for op in round.pre_ops {
            match op {
                PreOp::Relabel => {
                    let (s, pauli) = relabel_to_target(&self.diag);
                    self.diag = s;
                    self.coherent = self.coherent.take().map(|m| m.conjugate_alice(pauli));
                    relabel = Some(pauli);
                }
                PreOp::Twirl => {
                    self.diag = twirl_to_werner(&self.diag);
                    self.coherent = None;
                }
            }
        }
        match round.kind {
            RoundKind::Map(kind) => {
                let step = apply_map(kind, &self.diag);
                self.diag = step.state;
                self.coherent = None;
                Ok(Advance { p: step.p, relabel, max_offdiag: 0.0 })
            }
            RoundKind::Unitary(params) => {
                let rho = self.coherent.take().unwrap_or_else(|| bell_density(&self.diag));
                let out = locc_round_matrix(&rho, params.theta(), params.phi())?;
                let (diag, off) = bell_diagonal_of(&out.survivor);
                self.diag = diag;
                self.coherent = Some(out.survivor);
                Ok(Advance { p: out.p, relabel, max_offdiag: off })
            }
        }
    }
}

/// Runs `r_max` rounds of `schedule` from `s0`. Returns `r_max + 1`
/// records, the first being the input with unit yield.
///
/// Only custom schedules can fail, when a round's kept probability vanishes.
pub fn run(schedule: &ProtocolSchedule, s0: BellDiagonalState, r_max: usize) -> Result<Vec<TrajectoryRecord>> {
    let mut work = Working::new(s0);
    let s_0 = work.entropy();
    let mut records = Vec::with_capacity(r_max + 1);
    records.push(TrajectoryRecord {
        r: 0,
        state: s0,
        p: None,
        pair_yield: 1.0,
        entropy: s_0,
        improved_yield: improved_yield(1.0, s_0),
        relabel: None,
        max_offdiag: 0.0,
    });
    let mut pair_yield = 1.0;
    for r in 1..=r_max {
        let step = work.advance(schedule, r)?;
        pair_yield *= step.p / 2.0;
        let entropy = work.entropy();
        records.push(TrajectoryRecord {
            r,
            state: work.diag,
            p: Some(step.p),
            pair_yield,
            entropy,
            improved_yield: improved_yield(pair_yield, entropy),
            relabel: step.relabel,
            max_offdiag: step.max_offdiag,
        });
    }
    Ok(records)
}

/// Limit set reached by a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttractorClass {
    /// `(1, 0, 0, 0)`
    FixedTarget,
    /// `(0, 0, 1, 0)`
    FixedPsiPlus,
    Period2,
    Undecided,
}

impl AttractorClass {
    pub fn name(self) -> &'static str {
        match self {
            Self::FixedTarget => "FixedTarget",
            Self::FixedPsiPlus => "FixedPsiPlus",
            Self::Period2 => "Period2",
            Self::Undecided => "Undecided",
        }
    }
}

impl fmt::Display for AttractorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub fixed: f64,
    pub cycle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { fixed: FIXED_TOL, cycle: CYCLE_TOL }
    }
}

/// Class plus where the decision was made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: AttractorClass,
    /// Round at which the class was decided (`max_iter` when undecided).
    pub rounds: usize,
    pub state: BellDiagonalState,
    /// State one round earlier, so a period-2 pair can be inspected.
    pub previous: BellDiagonalState,
}

/// Classifies with one tolerance used for every class.
pub fn classify_attractor(
    schedule: &ProtocolSchedule,
    s0: BellDiagonalState,
    tol: f64,
    max_iter: usize,
) -> Result<AttractorClass> {
    let tols = Tolerances { fixed: tol, cycle: tol };
    classify_with(schedule, s0, tols, max_iter).map(|c| c.class)
}

/// Iterates up to `max_iter` rounds. Fixed points are declared as soon as
/// `a` (or `c`) is within `tols.fixed` of one. Period 2 needs the state to
/// match the one two rounds back within `tols.cycle` while differing from
/// the previous one by at least `10·tols.cycle`, for [`CYCLE_STREAK`]
/// consecutive rounds.
pub fn classify_with(
    schedule: &ProtocolSchedule,
    s0: BellDiagonalState,
    tols: Tolerances,
    max_iter: usize,
) -> Result<Classification> {
    let fixed = |s: &BellDiagonalState| {
        if (s.a() - 1.0).abs() < tols.fixed {
            Some(AttractorClass::FixedTarget)
        } else if (s.c() - 1.0).abs() < tols.fixed {
            Some(AttractorClass::FixedPsiPlus)
        } else {
            None
        }
    };
    if let Some(class) = fixed(&s0) {
        return Ok(Classification { class, rounds: 0, state: s0, previous: s0 });
    }

    let mut work = Working::new(s0);
    let (mut prev2, mut prev) = (s0, s0);
    let mut streak = 0;
    for r in 1..=max_iter {
        work.advance(schedule, r)?;
        let s = work.diag;
        if let Some(class) = fixed(&s) {
            return Ok(Classification { class, rounds: r, state: s, previous: prev });
        }
        if r >= 2 && s.distance(&prev2) < tols.cycle && s.distance(&prev) >= 10.0 * tols.cycle {
            streak += 1;
            if streak >= CYCLE_STREAK {
                return Ok(Classification { class: AttractorClass::Period2, rounds: r, state: s, previous: prev });
            }
        } else {
            streak = 0;
        }
        prev2 = prev;
        prev = s;
    }
    Ok(Classification { class: AttractorClass::Undecided, rounds: max_iter, state: work.diag, previous: prev })
}

/// One classified point of a basin scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinPoint {
    pub state: BellDiagonalState,
    pub class: AttractorClass,
}

/// Classifies every point `(i, j, k, l) / resolution` of the simplex that
/// lies in `D_abcd`, under the one-map protocol for `kind`. Points come
/// out in lexicographic `(i, j, k)` order.
pub fn basin_scan(kind: MapKind, resolution: usize, tols: Tolerances, max_iter: usize) -> Vec<BasinPoint> {
    let schedule = match kind {
        MapKind::Qpa => protocols::qpa_only(),
        MapKind::Xh => protocols::xh_only(),
    };
    let k = resolution as f64;
    let mut points = Vec::new();
    for i in 0..=resolution {
        for j in 0..=resolution - i {
            for l in 0..=resolution - i - j {
                let m = resolution - i - j - l;
                let w = [i, j, l, m].map(|x| x as f64 / k);
                let s = BellDiagonalState::normalized(w);
                if s.domain().is_distillable() {
                    points.push(s);
                }
            }
        }
    }
    points
        .into_par_iter()
        .map(|state| {
            let class = classify_with(&schedule, state, tols, max_iter)
                .expect("closed-form rounds cannot degenerate")
                .class;
            BasinPoint { state, class }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellstate::strategies;
    use crate::protocols::{ibm, oxford, qpa_only, tm1, tm2, xh_only};
    use proptest::prelude::*;

    fn st(a: f64, b: f64, c: f64, d: f64) -> BellDiagonalState {
        BellDiagonalState::new(a, b, c, d).unwrap()
    }

    fn named() -> Vec<ProtocolSchedule> {
        vec![ibm(), oxford(), qpa_only(), xh_only(), tm1(), tm2()]
    }

    #[test]
    fn run_from_target() {
        for s in named() {
            let traj = run(&s, BellDiagonalState::TARGET, 3).unwrap();
            assert_eq!(traj.len(), 4);
            assert_eq!(traj[0].pair_yield, 1.0);
            assert_eq!(traj[0].p, None);
            assert_eq!(traj[3].pair_yield, 0.125);
            assert!(traj[1..].iter().all(|rec| rec.p == Some(1.0) && rec.state == BellDiagonalState::TARGET));
        }
    }

    #[test]
    fn run_oxford_one_round() {
        let traj = run(&oxford(), st(0.7, 0.1, 0.1, 0.1), 1).unwrap();
        assert!((traj[1].pair_yield - 0.34).abs() < 1e-15);
        assert!((traj[1].state.a() - 25.0 / 34.0).abs() < 1e-15);
        assert_eq!(traj[1].relabel, Some(PauliRelabel::Identity));
    }

    #[test]
    fn run_xh_cycle() {
        let traj = run(&xh_only(), st(0.5, 0.0, 0.0, 0.5), 2).unwrap();
        assert_eq!(traj[1].state, st(0.5, 0.0, 0.5, 0.0));
        assert_eq!(traj[2].state, st(0.5, 0.0, 0.0, 0.5));
        assert_eq!(traj[1].p, Some(0.5));
        assert_eq!(traj[2].p, Some(1.0));
    }

    #[test]
    fn ibm_on_werner_input() {
        let traj = run(&ibm(), st(0.7, 0.1, 0.1, 0.1), 1).unwrap();
        assert!((traj[1].state.a() - 0.5 / 0.68).abs() < 1e-15);
        // the survivor is twirled again before round 2, not after round 1
        assert!((traj[1].state.d() - 0.14 / 0.68).abs() < 1e-15);
    }

    #[test]
    fn improved_yield_examples() {
        assert_eq!(improved_yield(0.125, 0.0), 0.125);
        assert_eq!(improved_yield(0.3, 1.0), 0.0);
        assert!((improved_yield(0.2, 0.5) - 0.1).abs() < 1e-15);
        assert_eq!(improved_yield(0.2, 1.7), 0.0);
    }

    #[test]
    fn classify_examples() {
        let c = classify_attractor(&xh_only(), st(0.1, 0.2, 0.6, 0.1), 1e-6, 200).unwrap();
        assert_eq!(c, AttractorClass::FixedTarget);
        let c = classify_attractor(&xh_only(), st(0.2, 0.1, 0.6, 0.1), 1e-3, 200).unwrap();
        assert_eq!(c, AttractorClass::Period2);
        let c = classify_attractor(&qpa_only(), st(0.1, 0.2, 0.6, 0.1), 1e-6, 200).unwrap();
        assert_eq!(c, AttractorClass::FixedPsiPlus);
        // with the relabel, Oxford heads for the target instead
        let c = classify_attractor(&oxford(), st(0.1, 0.2, 0.6, 0.1), 1e-6, 200).unwrap();
        assert_eq!(c, AttractorClass::FixedTarget);
    }

    #[test]
    fn exact_cycle_is_period2() {
        let c = classify_with(&xh_only(), st(0.5, 0.0, 0.0, 0.5), Tolerances { fixed: 1e-15, cycle: 1e-15 }, 10).unwrap();
        assert_eq!(c.class, AttractorClass::Period2);
        assert_eq!(c.rounds, 2 + CYCLE_STREAK - 1);
    }

    #[test]
    fn undecided_when_budget_too_small() {
        let c = classify_attractor(&xh_only(), st(0.2, 0.1, 0.6, 0.1), 1e-3, 4).unwrap();
        assert_eq!(c, AttractorClass::Undecided);
        let c = classify_attractor(&qpa_only(), BellDiagonalState::MAXIMALLY_MIXED, 1e-6, 50).unwrap();
        assert_eq!(c, AttractorClass::Undecided);
    }

    #[test]
    fn basin_scan_contains_quoted_points() {
        let pts = basin_scan(MapKind::Xh, 10, Tolerances::default(), 200);
        let find = |s: BellDiagonalState| pts.iter().find(|p| p.state.distance(&s) < 1e-12).unwrap().class;
        assert_eq!(find(st(0.1, 0.2, 0.6, 0.1)), AttractorClass::FixedTarget);
        assert_eq!(find(st(0.2, 0.1, 0.6, 0.1)), AttractorClass::Period2);
        assert!(pts.iter().all(|p| p.state.domain().is_distillable()));

        let pts = basin_scan(MapKind::Qpa, 10, Tolerances::default(), 200);
        for p in pts.iter().filter(|p| p.state.domain().in_ab()) {
            assert_eq!(p.class, AttractorClass::FixedTarget, "{}", p.state);
        }
    }

    #[test]
    fn qpa_monotone_above_point_eight_is_not_universal() {
        // Known counterexample: all the error weight on Ψ−.
        let s = st(0.81, 0.19, 0.0, 0.0);
        let next = apply_map(MapKind::Qpa, &s).state;
        assert!(next.a() < s.a());

        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut violations = Vec::new();
        for _ in 0..2000 {
            let traj = run(&qpa_only(), crate::sampler::uniform_state(&mut rng), 30).unwrap();
            for w in traj.windows(2) {
                if w[0].state.a() > 0.8 && w[1].state.a() <= w[0].state.a() {
                    violations.push(w[0].state);
                }
            }
        }
        if let Some(first) = violations.first() {
            eprintln!("warning: {} QPA steps with a > 0.8 did not increase a, e.g. {first}", violations.len());
        }
        for v in &violations {
            assert!(v.a() > 0.8 && apply_map(MapKind::Qpa, v).state.a() <= v.a());
        }
    }

    proptest! {
        #[test]
        fn yield_bounds(s in strategies::state(), pick in 0usize..6) {
            let sched = &named()[pick];
            let traj = run(sched, s, 12).unwrap();
            for rec in &traj {
                let r = rec.r as i32;
                prop_assert!(rec.pair_yield <= 2f64.powi(-r) * (1.0 + 1e-12));
                prop_assert!(rec.pair_yield >= 4f64.powi(-r) * (1.0 - 1e-12));
                prop_assert!((0.0..=2.0 + 1e-12).contains(&rec.entropy));
                prop_assert_eq!(rec.improved_yield, improved_yield(rec.pair_yield, rec.entropy));
            }
            for w in traj.windows(2) {
                prop_assert!((w[1].pair_yield - w[0].pair_yield * w[1].p.unwrap() / 2.0).abs() < 1e-15);
            }
        }

        #[test]
        fn oxford_commutes_with_relabel(s in strategies::state()) {
            let (relabeled, _) = relabel_to_target(&s);
            let a = run(&oxford(), s, 8).unwrap();
            let b = run(&oxford(), relabeled, 8).unwrap();
            for (x, y) in a.iter().zip(&b).skip(1) {
                prop_assert_eq!(x.state, y.state);
                prop_assert_eq!(x.pair_yield, y.pair_yield);
            }
        }
    }
}
