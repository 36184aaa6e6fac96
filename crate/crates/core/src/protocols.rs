//! Protocol schedules: which pre-operations and which local unitary each
//! purification round uses.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::maps::MapKind;

/// Local operation applied to the pair state before a round's LOCC step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreOp {
    Twirl,
    Relabel,
}

/// Angles of a general local unitary `U(θ, φ)`, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryParams {
    theta: f64,
    phi: f64,
}

impl UnitaryParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidAngle { name: "theta", value: theta });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidAngle { name: "phi", value: phi });
        }
        Ok(Self { theta: theta.rem_euclid(TAU), phi: phi.rem_euclid(TAU) })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// What one round does after its pre-operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoundKind {
    Map(MapKind),
    Unitary(UnitaryParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Round {
    pub pre_ops: &'static [PreOp],
    pub kind: RoundKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Ibm,
    Oxford,
    QpaOnly,
    XhOnly,
    Tm1,
    Tm2,
    Custom(Vec<UnitaryParams>),
}

/// A fixed rule assigning every round `r ≥ 1` its pre-operations and map.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSchedule {
    rule: Rule,
}

const NONE: &[PreOp] = &[];
const RELABEL: &[PreOp] = &[PreOp::Relabel];
const TWIRL: &[PreOp] = &[PreOp::Twirl];
const RELABEL_TWIRL: &[PreOp] = &[PreOp::Relabel, PreOp::Twirl];

const QPA: RoundKind = RoundKind::Map(MapKind::Qpa);
const XH: RoundKind = RoundKind::Map(MapKind::Xh);

/// Twirl to Werner form before every QPA round; the first round also
/// relabels so the Werner fidelity exceeds one half.
pub fn ibm() -> ProtocolSchedule {
    ProtocolSchedule { rule: Rule::Ibm }
}

/// QPA every round after a one-off relabel of the dominant Bell state onto Φ+.
pub fn oxford() -> ProtocolSchedule {
    ProtocolSchedule { rule: Rule::Oxford }
}

/// QPA every round with no pre-operations.
pub fn qpa_only() -> ProtocolSchedule {
    ProtocolSchedule { rule: Rule::QpaOnly }
}

pub fn xh_only() -> ProtocolSchedule {
    ProtocolSchedule { rule: Rule::XhOnly }
}

/// Two XH rounds, then QPA.
pub fn tm1() -> ProtocolSchedule {
    ProtocolSchedule { rule: Rule::Tm1 }
}

/// QPA, one XH round, then QPA.
pub fn tm2() -> ProtocolSchedule {
    ProtocolSchedule { rule: Rule::Tm2 }
}

/// Oracle-backed rounds with the given angles; rounds past the end of
/// `seq` repeat its last entry.
pub fn custom(seq: Vec<UnitaryParams>) -> Result<ProtocolSchedule> {
    if seq.is_empty() {
        return Err(Error::EmptySchedule);
    }
    Ok(ProtocolSchedule { rule: Rule::Custom(seq) })
}

impl ProtocolSchedule {
    /// Names accepted by [`ProtocolSchedule::named`].
    pub const NAMES: [&'static str; 6] = ["ibm", "oxford", "qpa", "xh", "tm1", "tm2"];

    /// Looks up a parameter-free schedule by name. `custom` needs angles and
    /// goes through [`custom`] instead.
    pub fn named(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ibm" => Ok(ibm()),
            "oxford" => Ok(oxford()),
            "qpa" => Ok(qpa_only()),
            "xh" => Ok(xh_only()),
            "tm1" => Ok(tm1()),
            "tm2" => Ok(tm2()),
            _ => Err(Error::UnknownProtocol(name.to_owned())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.rule {
            Rule::Ibm => "ibm",
            Rule::Oxford => "oxford",
            Rule::QpaOnly => "qpa",
            Rule::XhOnly => "xh",
            Rule::Tm1 => "tm1",
            Rule::Tm2 => "tm2",
            Rule::Custom(_) => "custom",
        }
    }

    /// Round `r`, counted from 1.
    pub fn round(&self, r: usize) -> Round {
        assert!(r >= 1, "rounds are numbered from 1");
        let (pre_ops, kind) = match &self.rule {
            Rule::Ibm if r == 1 => (RELABEL_TWIRL, QPA),
            Rule::Ibm => (TWIRL, QPA),
            Rule::Oxford if r == 1 => (RELABEL, QPA),
            Rule::Oxford | Rule::QpaOnly => (NONE, QPA),
            Rule::XhOnly => (NONE, XH),
            Rule::Tm1 if r <= 2 => (NONE, XH),
            Rule::Tm1 => (NONE, QPA),
            Rule::Tm2 if r == 2 => (NONE, XH),
            Rule::Tm2 => (NONE, QPA),
            Rule::Custom(seq) => {
                let params = seq.get(r - 1).or(seq.last()).copied().expect("non-empty");
                (NONE, RoundKind::Unitary(params))
            }
        };
        Round { pre_ops, kind }
    }

    /// True when no round ever uses a pre-operation.
    pub fn is_standard_locc_only(&self) -> bool {
        matches!(self.rule, Rule::QpaOnly | Rule::XhOnly | Rule::Tm1 | Rule::Tm2 | Rule::Custom(_))
    }
}

impl fmt::Display for ProtocolSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::named(s)
    }
}
