//! Exact density-matrix simulation of one purification round.
//!
//! Two copies of a pair state are laid out on qubits `[A1, B1, A2, B2]`
//! with tensor index `8·A1 + 4·B1 + 2·A2 + B2`. Alice applies `U(θ, φ)` to
//! A1 and A2, Bob applies the entrywise conjugate `U*` to B1 and B2, both
//! run a CNOT from pair 1 into pair 2, and the round keeps pair 1 when the
//! target measurements agree.

use nalgebra::{Complex, Matrix2, Matrix4, SMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bellstate::{shannon_bits, BellDiagonalState, PauliRelabel};
use crate::error::{Error, Result};
use crate::maps::{MapKind, StepResult};
use crate::sampler;

pub type C64 = Complex<f64>;
type Matrix16 = SMatrix<C64, 16, 16>;

/// Kept probability below this aborts the round.
pub const DEGENERATE_P: f64 = 1e-14;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Columns are Φ+, Ψ−, Ψ+, Φ− in the computational basis `|AB⟩`.
fn bell_basis() -> Matrix4<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = Matrix4::new(
        c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.),
        c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.),
        c(0., 0.), c(-h, 0.), c(h, 0.), c(0., 0.),
        c(h, 0.), c(0., 0.), c(0., 0.), c(-h, 0.),
    );
    m
}

/// Density matrix of one Alice–Bob pair in the basis `{|00⟩,|01⟩,|10⟩,|11⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensityMatrix {
    m: Matrix4<C64>,
}

impl PairDensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidMatrix(format!("trace {tr} is not 1")));
        }
        let out = Self { m };
        let min_eig = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(out)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.m.symmetric_eigenvalues();
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        shannon_bits(self.eigenvalues().map(|x| x.max(0.0)))
    }

    /// Conjugates by a Pauli acting on Alice's qubit.
    pub fn conjugate_alice(&self, op: PauliRelabel) -> Self {
        let sigma = match op {
            PauliRelabel::Identity => Matrix2::identity(),
            PauliRelabel::X => Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
            PauliRelabel::Y => Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
            PauliRelabel::Z => Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
        };
        let g: Matrix4<C64> = sigma.kronecker(&Matrix2::identity());
        Self { m: g * self.m * g.adjoint() }
    }

    /// Row-major `(re, im)` pairs, for debugging output.
    pub fn to_row_major_string(&self) -> String {
        let rows: Vec<String> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| format!("({:+.6},{:+.6})", self.m[(i, j)].re, self.m[(i, j)].im))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        rows.join("\n")
    }
}

/// `a|Φ+⟩⟨Φ+| + b|Ψ−⟩⟨Ψ−| + c|Ψ+⟩⟨Ψ+| + d|Φ−⟩⟨Φ−|`.
pub fn bell_density(s: &BellDiagonalState) -> PairDensityMatrix {
    let basis = bell_basis();
    let diag = Matrix4::from_diagonal(&s.as_array().map(|x| c(x, 0.)).into());
    PairDensityMatrix { m: basis * diag * basis.adjoint() }
}

/// Bell-basis diagonal of `m` (renormalised) and its largest Bell-basis
/// off-diagonal magnitude.
pub fn bell_diagonal_of(m: &PairDensityMatrix) -> (BellDiagonalState, f64) {
    let basis = bell_basis();
    let in_bell = basis.adjoint() * m.m * basis;
    let diag = [0, 1, 2, 3].map(|i| in_bell[(i, i)].re);
    let mut off = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                off = off.max(in_bell[(i, j)].norm());
            }
        }
    }
    (BellDiagonalState::normalized(diag), off)
}

/// `[[cos θ/2, −e^{−iφ} sin θ/2], [e^{iφ} sin θ/2, cos θ/2]]`.
pub fn unitary(theta: f64, phi: f64) -> Matrix2<C64> {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    Matrix2::new(c(co, 0.), -e.conj() * s, e * s, c(co, 0.))
}

/// Result of one post-selected round.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccOutcome {
    pub survivor: PairDensityMatrix,
    /// Probability the two target outcomes coincide.
    pub p: f64,
    /// Probability mass of the rejected branches; `p + discarded = 1`.
    pub discarded: f64,
}

fn bilateral_cnot() -> Matrix16 {
    let mut perm = Matrix16::zeros();
    for i in 0..16usize {
        let (a1, b1, a2, b2) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        let j = (a1 << 3) | (b1 << 2) | ((a2 ^ a1) << 1) | (b2 ^ b1);
        perm[(j, i)] = c(1., 0.);
    }
    perm
}

pub fn locc_round(s: &BellDiagonalState, theta: f64, phi: f64) -> Result<LoccOutcome> {
    locc_round_matrix(&bell_density(s), theta, phi)
}

/// One round on an arbitrary pair state (both copies equal to `rho`).
pub fn locc_round_matrix(rho: &PairDensityMatrix, theta: f64, phi: f64) -> Result<LoccOutcome> {
    let u = unitary(theta, phi);
    let pair_op: Matrix4<C64> = u.kronecker(&u.map(|z| z.conj()));
    let local: Matrix16 = pair_op.kronecker(&pair_op);
    let gate = bilateral_cnot() * local;

    let two_pair: Matrix16 = rho.m.kronecker(&rho.m);
    let evolved = gate * two_pair * gate.adjoint();

    // Targets (A2, B2) sit in the low two bits; 0 and 3 are the agreeing outcomes.
    let mut kept = Matrix4::<C64>::zeros();
    let mut discarded = 0.0;
    for k in 0..4 {
        for t in [1, 2] {
            discarded += evolved[(4 * k + t, 4 * k + t)].re;
        }
        for l in 0..4 {
            kept[(k, l)] = evolved[(4 * k, 4 * l)] + evolved[(4 * k + 3, 4 * l + 3)];
        }
    }
    let p = kept.trace().re;
    if !(p >= DEGENERATE_P) {
        return Err(Error::DegenerateRound { p, threshold: DEGENERATE_P });
    }
    let survivor = kept / c(p, 0.);
    let survivor = (survivor + survivor.adjoint()) * c(0.5, 0.);
    Ok(LoccOutcome { survivor: PairDensityMatrix { m: survivor }, p, discarded })
}

/// One oracle round projected onto the Bell diagonal.
pub fn oracle_step(kind: MapKind, s: &BellDiagonalState) -> Result<(StepResult, f64)> {
    let (theta, phi) = kind.angles();
    let out = locc_round(s, theta, phi)?;
    let (state, off) = bell_diagonal_of(&out.survivor);
    Ok((StepResult { state, p: out.p }, off))
}

/// Worst disagreement found by [`cross_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckReport {
    pub trials: usize,
    pub max_residual: f64,
    pub worst_state: BellDiagonalState,
    pub worst_kind: MapKind,
}

/// Compares a closed-form map against the circuit on `trials` seeded
/// uniform states, for both canonical maps. The residual is the largest of
/// the diagonal, `p` and Bell off-diagonal discrepancies.
pub fn cross_check<F>(trials: usize, seed: u64, closed_form: F) -> Result<CrossCheckReport>
where
    F: Fn(MapKind, &BellDiagonalState) -> StepResult,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CrossCheckReport {
        trials,
        max_residual: 0.0,
        worst_state: BellDiagonalState::TARGET,
        worst_kind: MapKind::Qpa,
    };
    for _ in 0..trials {
        let s = sampler::uniform_state(&mut rng);
        for kind in [MapKind::Qpa, MapKind::Xh] {
            let (oracle, off) = oracle_step(kind, &s)?;
            let closed = closed_form(kind, &s);
            let residual = oracle.state.distance(&closed.state).max((oracle.p - closed.p).abs()).max(off);
            if residual > report.max_residual || residual.is_nan() {
                report.max_residual = residual;
                report.worst_state = s;
                report.worst_kind = kind;
            }
        }
    }
    Ok(report)
}
