//! Bell-diagonal two-qubit states.
//!
//! A state is the mixture `a·Φ+ + b·Ψ− + c·Ψ+ + d·Φ−` and is stored as the
//! four weights in that fixed order. `a` is the fidelity with the target
//! pair `|Φ+⟩`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::report::fmt_num;

/// Entries this far below zero are treated as rounding drift and clamped.
pub const CLAMP_TOL: f64 = 1e-12;
/// Largest accepted deviation of the entry sum from one.
pub const SUM_TOL: f64 = 1e-9;

const FIELDS: [&str; 4] = ["a", "b", "c", "d"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    w: [f64; 4],
}

impl BellDiagonalState {
    /// The target state `|Φ+⟩⟨Φ+|`.
    pub const TARGET: Self = Self { w: [1.0, 0.0, 0.0, 0.0] };
    /// The rival attractor `|Ψ+⟩⟨Ψ+|` of the QPA recurrence.
    pub const PSI_PLUS: Self = Self { w: [0.0, 0.0, 1.0, 0.0] };
    pub const MAXIMALLY_MIXED: Self = Self { w: [0.25; 4] };

    /// Validates and builds a state from the four Bell weights.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::from_array([a, b, c, d])
    }

    pub fn from_array(mut w: [f64; 4]) -> Result<Self> {
        for (x, field) in w.iter_mut().zip(FIELDS) {
            if !x.is_finite() {
                return Err(Error::InvalidState { field, reason: format!("{x} is not finite") });
            }
            if *x < -CLAMP_TOL {
                return Err(Error::InvalidState { field, reason: format!("{x} is negative") });
            }
            if *x > 1.0 + CLAMP_TOL {
                return Err(Error::InvalidState { field, reason: format!("{x} exceeds 1") });
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState {
                field: "sum",
                reason: format!("entries sum to {sum}, expected 1"),
            });
        }
        if (sum - 1.0).abs() > CLAMP_TOL {
            w.iter_mut().for_each(|x| *x /= sum);
        }
        Ok(Self { w })
    }

    /// Builds a state from non-negative weights that are only proportional
    /// to a distribution. Used by the recurrence maps after dividing by `p`.
    pub(crate) fn normalized(w: [f64; 4]) -> Self {
        let clamped = w.map(|x| x.max(0.0));
        let sum: f64 = clamped.iter().sum();
        debug_assert!(sum > 0.0 && sum.is_finite());
        Self { w: clamped.map(|x| x / sum) }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.w[0]
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.w[1]
    }
    #[inline]
    pub fn c(&self) -> f64 {
        self.w[2]
    }
    #[inline]
    pub fn d(&self) -> f64 {
        self.w[3]
    }

    /// Fidelity with the target `|Φ+⟩`.
    pub fn fidelity(&self) -> f64 {
        self.w[0]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.w
    }

    pub fn max_element(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    /// Max-norm distance between two states.
    pub fn distance(&self, other: &Self) -> f64 {
        self.w.iter().zip(other.w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn domain(&self) -> DomainLabel {
        domain_of(self)
    }
}

impl fmt::Display for BellDiagonalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", fmt_num(self.w[0]), fmt_num(self.w[1]), fmt_num(self.w[2]), fmt_num(self.w[3]))
    }
}

impl FromStr for BellDiagonalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidState {
                field: "state",
                reason: format!("expected 4 comma-separated values, got {}", parts.len()),
            });
        }
        let mut w = [0.0; 4];
        for ((slot, part), field) in w.iter_mut().zip(&parts).zip(FIELDS) {
            *slot = part.parse::<f64>().map_err(|_| Error::InvalidState {
                field,
                reason: format!("`{part}` is not a number"),
            })?;
        }
        Self::from_array(w)
    }
}

/// Which of the domains `D_a … D_d` a state lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainLabel {
    Da,
    Db,
    Dc,
    Dd,
    Outside,
}

impl DomainLabel {
    pub fn in_ab(self) -> bool {
        matches!(self, Self::Da | Self::Db)
    }
    pub fn in_cd(self) -> bool {
        matches!(self, Self::Dc | Self::Dd)
    }
    /// `D_ac = D_a ∪ D_c`.
    pub fn in_ac(self) -> bool {
        matches!(self, Self::Da | Self::Dc)
    }
    /// `D_abcd`: some element strictly exceeds one half.
    pub fn is_distillable(self) -> bool {
        self != Self::Outside
    }
}

/// Strict inequality: an element of exactly 1/2 does not select a domain.
pub fn domain_of(s: &BellDiagonalState) -> DomainLabel {
    const LABELS: [DomainLabel; 4] = [DomainLabel::Da, DomainLabel::Db, DomainLabel::Dc, DomainLabel::Dd];
    s.w.iter()
        .zip(LABELS)
        .find(|(x, _)| **x > 0.5)
        .map_or(DomainLabel::Outside, |(_, l)| l)
}

/// A Pauli applied by one party, recorded as the permutation it induces on
/// the Bell weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliRelabel {
    Identity,
    /// a↔c, b↔d
    X,
    /// a↔d, b↔c
    Z,
    /// a↔b, c↔d
    Y,
}

impl PauliRelabel {
    pub const ALL: [Self; 4] = [Self::Identity, Self::X, Self::Z, Self::Y];

    /// `out[i] = in[perm[i]]`.
    pub fn permutation(self) -> [usize; 4] {
        match self {
            Self::Identity => [0, 1, 2, 3],
            Self::X => [2, 3, 0, 1],
            Self::Z => [3, 2, 1, 0],
            Self::Y => [1, 0, 3, 2],
        }
    }

    pub fn apply(self, s: &BellDiagonalState) -> BellDiagonalState {
        let p = self.permutation();
        BellDiagonalState { w: p.map(|i| s.w[i]) }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "Identity",
            Self::X => "X-on-one-side",
            Self::Z => "Z-on-one-side",
            Self::Y => "Y-on-one-side",
        }
    }
}

impl fmt::Display for PauliRelabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Moves the dominant Bell weight into position `a` with a single-side
/// Pauli. Ties prefer a, then b, c, d.
pub fn relabel_to_target(s: &BellDiagonalState) -> (BellDiagonalState, PauliRelabel) {
    let mut best = 0;
    for i in 1..4 {
        if s.w[i] > s.w[best] {
            best = i;
        }
    }
    let op = match best {
        0 => PauliRelabel::Identity,
        1 => PauliRelabel::Y,
        2 => PauliRelabel::X,
        _ => PauliRelabel::Z,
    };
    (op.apply(s), op)
}

/// Ensemble average over random bilateral rotations: keeps `a` and spreads
/// the rest evenly.
pub fn twirl_to_werner(s: &BellDiagonalState) -> BellDiagonalState {
    let a = s.a();
    let rest = (1.0 - a) / 3.0;
    BellDiagonalState { w: [a, rest, rest, rest] }
}

/// Werner state with fidelity `f`.
pub fn werner(f: f64) -> Result<BellDiagonalState> {
    let rest = (1.0 - f) / 3.0;
    BellDiagonalState::new(f, rest, rest, rest)
}

/// Von Neumann entropy of a Bell-diagonal state in bits.
pub fn entropy_bits(s: &BellDiagonalState) -> f64 {
    shannon_bits(s.w.iter().copied())
}

pub(crate) fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum();
    h.max(0.0)
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::BellDiagonalState;
    use proptest::prelude::*;

    /// Valid states, including ones with exact zeros.
    pub fn state() -> impl Strategy<Value = BellDiagonalState> {
        let weight = prop_oneof![1 => Just(0.0), 6 => 0.0..1.0f64];
        [weight.clone(), weight.clone(), weight.clone(), weight]
            .prop_filter("non-zero total", |w| w.iter().sum::<f64>() > 1e-6)
            .prop_map(BellDiagonalState::normalized)
    }
}
