//! Closed-form one-round recurrences for the two canonical local unitaries.

use std::fmt;
use std::str::FromStr;

use crate::bellstate::BellDiagonalState;
use crate::error::{Error, Result};

/// Local-unitary choice with a closed-form recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// θ = φ = π/2 (quantum privacy amplification).
    Qpa,
    /// θ = π/2, φ = 0 (the XH operator).
    Xh,
}

impl MapKind {
    /// The `(θ, φ)` pair realising this map in the circuit oracle.
    pub fn angles(self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Self::Qpa => (FRAC_PI_2, FRAC_PI_2),
            Self::Xh => (FRAC_PI_2, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Qpa => "qpa",
            Self::Xh => "xh",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qpa => "QPA",
            Self::Xh => "XH",
        })
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpa" => Ok(Self::Qpa),
            "xh" => Ok(Self::Xh),
            _ => Err(Error::InvalidConfig(format!("unknown map `{s}` (expected qpa or xh)"))),
        }
    }
}

/// Surviving control-pair state and the probability that the targets
/// gave coinciding outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub state: BellDiagonalState,
    pub p: f64,
}

pub fn qpa_step(s: &BellDiagonalState) -> StepResult {
    let [a, b, c, d] = s.as_array();
    let p = (a + b).powi(2) + (c + d).powi(2);
    let w = [a * a + b * b, 2.0 * c * d, c * c + d * d, 2.0 * a * b];
    StepResult { state: BellDiagonalState::normalized(w.map(|x| x / p)), p }
}

pub fn xh_step(s: &BellDiagonalState) -> StepResult {
    let [a, b, c, d] = s.as_array();
    let p = (a + c).powi(2) + (b + d).powi(2);
    let w = [a * a + c * c, 2.0 * b * d, b * b + d * d, 2.0 * a * c];
    StepResult { state: BellDiagonalState::normalized(w.map(|x| x / p)), p }
}

pub fn apply_map(kind: MapKind, s: &BellDiagonalState) -> StepResult {
    match kind {
        MapKind::Qpa => qpa_step(s),
        MapKind::Xh => xh_step(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellstate::strategies;
    use proptest::prelude::*;

    fn st(a: f64, b: f64, c: f64, d: f64) -> BellDiagonalState {
        BellDiagonalState::new(a, b, c, d).unwrap()
    }

    fn close(s: &BellDiagonalState, w: [f64; 4], tol: f64) -> bool {
        s.as_array().iter().zip(w).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn qpa_examples() {
        let r = qpa_step(&BellDiagonalState::TARGET);
        assert_eq!((r.state, r.p), (BellDiagonalState::TARGET, 1.0));

        let r = qpa_step(&st(0.7, 0.1, 0.1, 0.1));
        assert!((r.p - 0.68).abs() < 1e-15);
        assert!(close(&r.state, [25.0 / 34.0, 1.0 / 34.0, 1.0 / 34.0, 7.0 / 34.0], 1e-15));

        let r = qpa_step(&st(0.1, 0.2, 0.6, 0.1));
        assert!((r.p - 0.58).abs() < 1e-15);
        assert!(close(&r.state, [5.0 / 58.0, 12.0 / 58.0, 37.0 / 58.0, 4.0 / 58.0], 1e-15));

        let r = qpa_step(&BellDiagonalState::PSI_PLUS);
        assert_eq!((r.state, r.p), (BellDiagonalState::PSI_PLUS, 1.0));
    }

    #[test]
    fn xh_examples() {
        let r = xh_step(&st(0.5, 0.0, 0.0, 0.5));
        assert_eq!((r.state, r.p), (st(0.5, 0.0, 0.5, 0.0), 0.5));

        let r = xh_step(&st(0.5, 0.0, 0.5, 0.0));
        assert_eq!((r.state, r.p), (st(0.5, 0.0, 0.0, 0.5), 1.0));

        let r = xh_step(&st(0.1, 0.2, 0.6, 0.1));
        assert!((r.p - 0.58).abs() < 1e-15);
        assert!(close(&r.state, [37.0 / 58.0, 4.0 / 58.0, 5.0 / 58.0, 12.0 / 58.0], 1e-15));

        let r = xh_step(&BellDiagonalState::TARGET);
        assert_eq!((r.state, r.p), (BellDiagonalState::TARGET, 1.0));
    }

    #[test]
    fn dispatch() {
        assert_eq!(apply_map(MapKind::Qpa, &BellDiagonalState::TARGET).p, 1.0);
        let r = apply_map(MapKind::Xh, &st(0.5, 0.0, 0.0, 0.5));
        assert_eq!((r.state, r.p), (st(0.5, 0.0, 0.5, 0.0), 0.5));
        let s = st(0.7, 0.1, 0.1, 0.1);
        assert_eq!(apply_map(MapKind::Qpa, &s), qpa_step(&s));
        assert_eq!("XH".parse::<MapKind>().unwrap(), MapKind::Xh);
        assert!("hadamard".parse::<MapKind>().is_err());
    }

    proptest! {
        #[test]
        fn outputs_normalized_and_p_bounded(s in strategies::state()) {
            for kind in [MapKind::Qpa, MapKind::Xh] {
                let r = apply_map(kind, &s);
                prop_assert!((r.state.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!((0.5 - 1e-15..=1.0 + 1e-15).contains(&r.p));
            }
        }

        #[test]
        fn xh_half_distance_identities(s in strategies::state()) {
            let [a, b, c, d] = s.as_array();
            let r = xh_step(&s);
            prop_assert!((1.0 - 2.0 * r.state.a() - (1.0 - 2.0 * a) * (1.0 - 2.0 * c) / r.p).abs() < 1e-12);
            prop_assert!((1.0 - 2.0 * r.state.c() - (1.0 - 2.0 * b) * (1.0 - 2.0 * d) / r.p).abs() < 1e-12);
        }

        #[test]
        fn qpa_half_distance_identities(s in strategies::state()) {
            let [a, b, c, d] = s.as_array();
            let r = qpa_step(&s);
            prop_assert!((1.0 - 2.0 * r.state.a() - (1.0 - 2.0 * a) * (1.0 - 2.0 * b) / r.p).abs() < 1e-12);
            prop_assert!((1.0 - 2.0 * r.state.c() - (1.0 - 2.0 * c) * (1.0 - 2.0 * d) / r.p).abs() < 1e-12);
        }
    }
}
