//! Two-level atom decaying into a vacuum bath: `H₀ = ½Ωσz`, one channel
//! `σ⁻` with `K = γ`, `G = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindblad::{Channel, MasterEquation};
use crate::operator::{qubit_ops, DensityMatrix, HilbertSpace, Operator};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelParams {
    pub omega: f64,
    pub gamma: f64,
    pub initial: DensityMatrix,
}

impl TwoLevelParams {
    /// Starts in the excited state.
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega = {omega}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::NegativeRate(gamma));
        }
        Ok(Self {
            omega,
            gamma,
            initial: excited_state(),
        })
    }

    pub fn with_initial(mut self, initial: DensityMatrix) -> Result<Self> {
        if initial.space() != &HilbertSpace::qubit() {
            return Err(Error::SpaceMismatch {
                left: HilbertSpace::qubit().to_string(),
                right: initial.space().to_string(),
            });
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn initial_sigma_z(&self) -> f64 {
        self.initial
            .expect(&qubit_ops().sigma_z)
            .expect("qubit space checked at construction")
            .re
    }
}

pub fn excited_state() -> DensityMatrix {
    DensityMatrix::basis(&HilbertSpace::qubit(), &[0]).expect("valid basis state")
}

pub fn ground_state() -> DensityMatrix {
    DensityMatrix::basis(&HilbertSpace::qubit(), &[1]).expect("valid basis state")
}

/// `½(I + σx)`, the state with `⟨σx⟩ = 1`.
pub fn plus_x_state() -> DensityMatrix {
    let s = HilbertSpace::qubit();
    let op = (&Operator::identity(&s) + &qubit_ops().sigma_x).scale_real(0.5);
    DensityMatrix::new(op).expect("valid state")
}

pub fn two_level_me(p: &TwoLevelParams) -> Result<MasterEquation> {
    let q = qubit_ops();
    MasterEquation::new(q.sigma_z.scale_real(0.5 * p.omega))?.with_channel(
        Channel::new(q.sigma_minus, p.omega, "atom"),
        p.gamma,
        0.0,
    )
}

/// `σ⁺σ⁻ = |e⟩⟨e|`.
pub fn excited_population() -> Operator {
    let q = qubit_ops();
    &q.sigma_plus * &q.sigma_minus
}

/// `⟨σ⁺σ⁻(t)⟩ = ⟨σ⁺σ⁻(0)⟩ e^{−γt}`.
pub fn population_exact(p: &TwoLevelParams, t: f64) -> f64 {
    p.initial.operator().entry(0, 0).re * (-p.gamma * t).exp()
}

/// `⟨σz(t)⟩ = (1 + ⟨σz(0)⟩) e^{−γt} − 1`.
pub fn sigma_z_exact(p: &TwoLevelParams, t: f64) -> f64 {
    2.0 * population_exact(p, t) - 1.0
}

/// `⟨σx(t)⟩ = 2 Re(ρ_eg(0) e^{−iΩt}) e^{−γt/2}`.
pub fn sigma_x_exact(p: &TwoLevelParams, t: f64) -> f64 {
    let c = p.initial.operator().entry(0, 1) * Complex64::from_polar(1.0, -p.omega * t);
    2.0 * c.re * (-0.5 * p.gamma * t).exp()
}

fn exp_partial_sum(x: f64, order: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=order {
        term *= x / j as f64;
        sum += term;
    }
    sum
}

/// `⟨σ⁺σ⁻(0)⟩ Σ_{j ≤ q} (−γt)ʲ / j!`, the order-`q` truncation of
/// [`population_exact`].
pub fn population_series(p: &TwoLevelParams, t: f64, order: usize) -> f64 {
    p.initial.operator().entry(0, 0).re * exp_partial_sum(-p.gamma * t, order)
}

/// `⟨σz(0)⟩ Σ_{j ≤ q} (−γt)ʲ / j!`.
///
/// Under the master equation above this truncates `⟨σz(0)⟩ e^{−γt}`, which
/// is the evolution of the excited population `σ⁺σ⁻` rather than of the
/// Pauli `σz` (see [`sigma_z_exact`]).
pub fn sigma_z_series(p: &TwoLevelParams, t: f64, order: usize) -> f64 {
    p.initial_sigma_z() * exp_partial_sum(-p.gamma * t, order)
}

/// First-order `⟨σx⟩` in the printed form `cos Ωt + γ y(t)`, where `y`
/// solves `y″ + Ω²y = 2Ω sin Ωt` with `y(0) = 0`, `y′(0) = −1`, i.e.
/// `y(t) = −t cos Ωt`. Assumes the initial state has `⟨σx(0)⟩ = 1`.
pub fn sigma_x_first_order_paper(p: &TwoLevelParams, t: f64) -> f64 {
    (p.omega * t).cos() + p.gamma * paper_sigma_x_slope(p.omega, t)
}

/// `y(t) = −t cos Ωt`.
pub fn paper_sigma_x_slope(omega: f64, t: f64) -> f64 {
    -t * (omega * t).cos()
}
