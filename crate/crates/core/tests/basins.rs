use purify::engine::{classify_attractor, AttractorClass, FIXED_TOL};
use purify::maps::qpa_step;
use purify::protocols::{self, ProtocolSchedule};
use purify::sampler::{distillable_state, uniform_state};
use purify::bellstate::werner;
use purify::{run, BellDiagonalState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PER_DOMAIN: usize = 10_000;

fn states_where(seed: u64, n: usize, keep: impl Fn(&BellDiagonalState) -> bool) -> Vec<BellDiagonalState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(|| uniform_state(&mut rng)).filter(keep).take(n).collect()
}

fn count_not(sched: &ProtocolSchedule, states: &[BellDiagonalState], want: AttractorClass) -> Vec<BellDiagonalState> {
    states
        .iter()
        .filter(|s| classify_attractor(sched, **s, FIXED_TOL, 200).unwrap() != want)
        .copied()
        .collect()
}

#[test]
fn qpa_ab_inputs_reach_target() {
    let states = states_where(1, PER_DOMAIN, |s| s.domain().in_ab());
    let bad = count_not(&protocols::qpa_only(), &states, AttractorClass::FixedTarget);
    assert!(bad.is_empty(), "{} failures, e.g. {}", bad.len(), bad[0]);
}

#[test]
fn qpa_cd_inputs_reach_psi_plus() {
    let states = states_where(2, PER_DOMAIN, |s| s.domain().in_cd());
    let bad = count_not(&protocols::qpa_only(), &states, AttractorClass::FixedPsiPlus);
    assert!(bad.is_empty(), "{} failures, e.g. {}", bad.len(), bad[0]);
}

#[test]
fn two_map_schedules_reach_target() {
    let states = states_where(3, PER_DOMAIN, |s| s.domain().is_distillable());
    for sched in [protocols::tm1(), protocols::tm2()] {
        let bad = count_not(&sched, &states, AttractorClass::FixedTarget);
        assert!(bad.is_empty(), "{}: {} failures", sched.name(), bad.len());
    }
}

#[test]
fn two_map_guarantees() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (tm1, tm2) = (protocols::tm1(), protocols::tm2());
    for _ in 0..100_000 {
        let s0 = distillable_state(&mut rng);
        let t1 = run(&tm1, s0, 2).unwrap();
        assert!(t1[2].state.a() > 0.5, "tm1 from {s0}");
        let t2 = run(&tm2, s0, 2).unwrap();
        assert!(t2[1].state.domain().in_ac(), "tm2 round 1 from {s0}");
        assert!(t2[2].state.a() > 0.5, "tm2 from {s0}");
    }
}

#[test]
fn two_map_schedules_use_no_pre_ops() {
    for sched in [protocols::tm1(), protocols::tm2()] {
        assert!(sched.is_standard_locc_only());
        assert!((1..10).all(|r| sched.round(r).pre_ops.is_empty()));
    }
    assert!(!protocols::oxford().is_standard_locc_only());
}

#[test]
fn qpa_near_target_is_mostly_monotone() {
    let states = states_where(5, PER_DOMAIN, |s| s.a() > 0.8);
    let violations = states.iter().filter(|s| qpa_step(s).state.a() <= s.a()).count();
    if violations > 0 {
        eprintln!("warning: {violations} states with a > 0.8 lose fidelity under one QPA round");
    }
    for i in 1..1000 {
        let s = werner(0.8 + 0.2 * i as f64 / 1000.0).unwrap();
        assert!(qpa_step(&s).state.a() > s.a(), "{s}");
    }
}
