//! Master equations in eigenoperator form and their exact numerical
//! integration.
//!
//! ```text
//! dρ/dt = −i[H₀, ρ]
//!       + ½ Σₘ Kₘ (2Xₘ⁻ρXₘ⁺ − Xₘ⁺Xₘ⁻ρ − ρXₘ⁺Xₘ⁻)
//!       + ½ Σₘ Gₘ (2Xₘ⁺ρXₘ⁻ − Xₘ⁻Xₘ⁺ρ − ρXₘ⁻Xₘ⁺)
//! ```
//!
//! Each channel contributes two rate parameters, `Kₘ` (downward, jump
//! operator `Xₘ⁻`) and `Gₘ` (upward, jump operator `Xₘ⁺`). Rate parameters
//! are numbered `[K₀, G₀, K₁, G₁, …]` everywhere in the crate.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::integrate::rk4_step;
use crate::operator::{
    eigenoperator_residual, symmetrize, CMatrix, DensityMatrix, HilbertSpace, Operator, I,
    TOL_HERM,
};

/// Eigenoperator residual accepted when a channel is attached, relative to
/// `max(1, ‖H₀‖_max)`.
pub const EIGENOPERATOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    x_minus: Operator,
    omega: f64,
    label: String,
}

impl Channel {
    pub fn new(x_minus: Operator, omega: f64, label: impl Into<String>) -> Self {
        Self {
            x_minus,
            omega,
            label: label.into(),
        }
    }

    pub fn x_minus(&self) -> &Operator {
        &self.x_minus
    }

    pub fn x_plus(&self) -> Operator {
        self.x_minus.dagger()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateKind {
    /// `K`, jump operator `X⁻`.
    Down,
    /// `G`, jump operator `X⁺`.
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateParam {
    pub channel: usize,
    pub kind: RateKind,
}

impl RateParam {
    pub fn down(channel: usize) -> Self {
        Self {
            channel,
            kind: RateKind::Down,
        }
    }

    pub fn up(channel: usize) -> Self {
        Self {
            channel,
            kind: RateKind::Up,
        }
    }

    /// Position in the `[K₀, G₀, K₁, G₁, …]` layout.
    pub fn index(self) -> usize {
        2 * self.channel
            + match self.kind {
                RateKind::Down => 0,
                RateKind::Up => 1,
            }
    }

    pub fn from_index(j: usize) -> Self {
        Self {
            channel: j / 2,
            kind: if j % 2 == 0 { RateKind::Down } else { RateKind::Up },
        }
    }
}

impl fmt::Display for RateParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RateKind::Down => write!(f, "K{}", self.channel),
            RateKind::Up => write!(f, "G{}", self.channel),
        }
    }
}

/// `J`, `J†` and `½J†J` for one rate parameter.
#[derive(Debug, Clone)]
struct Jump {
    op: CMatrix,
    op_dag: CMatrix,
    half_norm: CMatrix,
}

impl Jump {
    fn new(op: CMatrix) -> Self {
        let op_dag = op.adjoint();
        let half_norm = &op_dag * &op * Complex64::new(0.5, 0.0);
        Self {
            op,
            op_dag,
            half_norm,
        }
    }

    /// `JXJ† − ½J†J X − X ½J†J`.
    fn apply(&self, x: &CMatrix) -> CMatrix {
        &self.op * x * &self.op_dag - &self.half_norm * x - x * &self.half_norm
    }
}

#[derive(Debug, Clone)]
pub struct MasterEquation {
    h0: Operator,
    channels: Vec<Channel>,
    rates: Vec<(f64, f64)>,
    minus_i_h: CMatrix,
    jumps: Vec<Jump>,
}

fn check_rate(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeRate(r))
    }
}

impl MasterEquation {
    /// A master equation with no channels. `h0` must be Hermitian.
    pub fn new(h0: Operator) -> Result<Self> {
        let herm = h0.hermiticity_error();
        if herm > TOL_HERM {
            return Err(Error::InvalidParameter(format!(
                "H0 is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let minus_i_h = h0.matrix() * (-I);
        Ok(Self {
            h0,
            channels: Vec::new(),
            rates: Vec::new(),
            minus_i_h,
            jumps: Vec::new(),
        })
    }

    /// Attaches a channel after checking that `X⁻` lowers `H₀` by `ω`.
    pub fn with_channel(self, channel: Channel, k: f64, g: f64) -> Result<Self> {
        let residual = eigenoperator_residual(&self.h0, channel.x_minus(), channel.omega())
            .ok_or_else(|| Error::SpaceMismatch {
                left: self.h0.space().to_string(),
                right: channel.x_minus().space().to_string(),
            })?;
        let scale = self.h0.max_abs().max(1.0);
        if residual > EIGENOPERATOR_TOL * scale {
            return Err(Error::NotEigenoperator {
                label: channel.label,
                omega: channel.omega,
                residual,
            });
        }
        self.with_unchecked_channel(channel, k, g)
    }

    /// Attaches a channel without the eigenoperator check.
    pub fn with_unchecked_channel(mut self, channel: Channel, k: f64, g: f64) -> Result<Self> {
        if channel.x_minus().space() != self.h0.space() {
            return Err(Error::SpaceMismatch {
                left: self.h0.space().to_string(),
                right: channel.x_minus().space().to_string(),
            });
        }
        check_rate(k)?;
        check_rate(g)?;
        let x = channel.x_minus().matrix().clone();
        self.jumps.push(Jump::new(x.clone()));
        self.jumps.push(Jump::new(x.adjoint()));
        self.channels.push(channel);
        self.rates.push((k, g));
        Ok(self)
    }

    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn space(&self) -> &HilbertSpace {
        self.h0.space()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// `(Kₘ, Gₘ)` per channel.
    pub fn rates(&self) -> &[(f64, f64)] {
        &self.rates
    }

    pub fn num_params(&self) -> usize {
        2 * self.channels.len()
    }

    /// Rates in the `[K₀, G₀, K₁, G₁, …]` layout.
    pub fn rate_vector(&self) -> Vec<f64> {
        self.rates.iter().flat_map(|&(k, g)| [k, g]).collect()
    }

    pub fn with_rates(&self, rates: &[(f64, f64)]) -> Result<Self> {
        if rates.len() != self.channels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rate pairs for {} channels",
                rates.len(),
                self.channels.len()
            )));
        }
        for &(k, g) in rates {
            check_rate(k)?;
            check_rate(g)?;
        }
        let mut out = self.clone();
        out.rates = rates.to_vec();
        Ok(out)
    }

    /// Signed rates, used by the finite-difference stencils around zero.
    pub(crate) fn with_signed_rates(&self, v: &[f64]) -> Self {
        debug_assert_eq!(v.len(), self.num_params());
        let mut out = self.clone();
        out.rates = v.chunks(2).map(|c| (c[0], c[1])).collect();
        out
    }

    pub fn param_label(&self, j: usize) -> String {
        let p = RateParam::from_index(j);
        let kind = match p.kind {
            RateKind::Down => "K",
            RateKind::Up => "G",
        };
        format!("{kind}[{}]", self.channels[p.channel].label())
    }

    /// `−i[H₀, x]`.
    pub(crate) fn hamiltonian_part(&self, x: &CMatrix) -> CMatrix {
        &self.minus_i_h * x - x * &self.minus_i_h
    }

    /// Dissipator of rate parameter `j` without its rate.
    pub(crate) fn dissipator(&self, j: usize, x: &CMatrix) -> CMatrix {
        self.jumps[j].apply(x)
    }

    pub(crate) fn rhs_matrix(&self, x: &CMatrix) -> CMatrix {
        let mut out = self.hamiltonian_part(x);
        for (j, r) in self.rate_vector().into_iter().enumerate() {
            if r != 0.0 {
                out += self.dissipator(j, x) * Complex64::new(r, 0.0);
            }
        }
        out
    }
}

/// Right-hand side of the master equation at `rho`.
pub fn lindblad_rhs(me: &MasterEquation, rho: &Operator) -> Result<Operator> {
    if rho.space() != me.space() {
        return Err(Error::SpaceMismatch {
            left: me.space().to_string(),
            right: rho.space().to_string(),
        });
    }
    Ok(Operator::from_parts(me.space().clone(), me.rhs_matrix(rho.matrix())))
}

/// Runtime guards for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Largest tolerated `|Tr ρ − 1|`.
    pub trace_tolerance: f64,
    /// Largest tolerated population on the top level of any boson factor;
    /// `None` disables the guard.
    pub leakage_threshold: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            trace_tolerance: 1e-6,
            leakage_threshold: Some(1e-6),
        }
    }
}

pub(crate) struct Guard {
    opts: EvolveOptions,
    mask: Option<Vec<bool>>,
}

impl Guard {
    pub(crate) fn new(space: &HilbertSpace, opts: EvolveOptions) -> Self {
        let mask = (space.has_boson() && opts.leakage_threshold.is_some())
            .then(|| space.top_fock_mask());
        Self { opts, mask }
    }

    pub(crate) fn check(&self, rho: &CMatrix, time: f64) -> Result<()> {
        let deviation = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        if !(deviation <= self.opts.trace_tolerance) {
            return Err(Error::TraceDrift {
                time,
                deviation,
                tolerance: self.opts.trace_tolerance,
            });
        }
        if let (Some(mask), Some(threshold)) = (&self.mask, self.opts.leakage_threshold) {
            let population: f64 = mask
                .iter()
                .enumerate()
                .filter(|(_, &top)| top)
                .map(|(i, _)| rho[(i, i)].re)
                .sum();
            if population > threshold {
                return Err(Error::FockLeakage {
                    time,
                    population,
                    threshold,
                });
            }
        }
        Ok(())
    }
}

fn check_initial(me: &MasterEquation, rho0: &DensityMatrix) -> Result<()> {
    if rho0.space() != me.space() {
        return Err(Error::SpaceMismatch {
            left: me.space().to_string(),
            right: rho0.space().to_string(),
        });
    }
    Ok(())
}

/// Integrates the master equation with fixed-step RK4 and default guards.
pub fn evolve(me: &MasterEquation, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory<Operator>> {
    evolve_with(me, rho0, grid, &EvolveOptions::default())
}

/// Integrates the master equation with fixed-step RK4. After every step the
/// state is replaced by its Hermitian part; the trace is monitored but never
/// renormalised.
pub fn evolve_with(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
) -> Result<Trajectory<Operator>> {
    check_initial(me, rho0)?;
    let guard = Guard::new(me.space(), *opts);
    let dt = grid.dt();
    let mut state = vec![rho0.operator().matrix().clone()];
    guard.check(&state[0], grid.t0())?;
    let mut samples = Vec::with_capacity(grid.len());
    samples.push(Operator::from_parts(me.space().clone(), state[0].clone()));
    for k in 1..grid.len() {
        rk4_step(&mut state, dt, |s| vec![me.rhs_matrix(&s[0])]);
        symmetrize(&mut state[0]);
        guard.check(&state[0], grid.time(k))?;
        samples.push(Operator::from_parts(me.space().clone(), state[0].clone()));
    }
    Trajectory::new(*grid, samples)
}

/// Largest entrywise difference between the trajectory on `grid` and on the
/// grid with half the step, compared at the coarse grid points.
pub fn step_halving_deviation(me: &MasterEquation, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<f64> {
    let coarse = evolve(me, rho0, grid)?;
    let fine = evolve(me, rho0, &grid.refined(2))?;
    Ok(coarse
        .samples()
        .iter()
        .enumerate()
        .map(|(k, r)| (r.matrix() - fine.samples()[2 * k].matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

/// [`evolve`] followed by a step-halving self-check against `tolerance`.
pub fn evolve_checked(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    tolerance: f64,
) -> Result<Trajectory<Operator>> {
    let coarse = evolve(me, rho0, grid)?;
    let fine = evolve(me, rho0, &grid.refined(2))?;
    let deviation = coarse
        .samples()
        .iter()
        .enumerate()
        .map(|(k, r)| (r.matrix() - fine.samples()[2 * k].matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if deviation > tolerance {
        return Err(Error::StepHalving {
            deviation,
            tolerance,
        });
    }
    Ok(coarse)
}

/// Spread between the largest and smallest eigenvalue of `H₀`, the fastest
/// free frequency of the system.
pub fn spectral_width(me: &MasterEquation) -> f64 {
    let ev = me.h0().hermitian_eigenvalues();
    ev.last().copied().unwrap_or(0.0) - ev.first().copied().unwrap_or(0.0)
}

/// Largest eigenvalue of `X⁺X⁻` or `X⁻X⁺` over all channels: the factor by
/// which a unit rate can act on the state (photon number for a cavity mode).
pub fn rate_multiplier(me: &MasterEquation) -> f64 {
    me.channels()
        .iter()
        .flat_map(|c| {
            let up = c.x_plus();
            let down = c.x_minus();
            [&up * down, down * &up]
        })
        .flat_map(|op| op.hermitian_eigenvalues())
        .fold(0.0, f64::max)
}

/// A grid on `[t0, t1]` obeying the default step ceilings for `me`.
pub fn default_grid(me: &MasterEquation, t0: f64, t1: f64) -> Result<TimeGrid> {
    let max_rate = me.rates().iter().map(|&(k, g)| k + g).fold(0.0, f64::max);
    TimeGrid::auto(t0, t1, spectral_width(me), max_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{boson_ops, qubit_ops, HilbertSpace};

    fn two_level(omega: f64, gamma: f64) -> MasterEquation {
        let q = qubit_ops();
        MasterEquation::new(q.sigma_z.scale_real(omega / 2.0))
            .unwrap()
            .with_channel(Channel::new(q.sigma_minus, omega, "atom"), gamma, 0.0)
            .unwrap()
    }

    #[test]
    fn rate_multipliers() {
        let q = qubit_ops();
        let me = MasterEquation::new(q.sigma_z.scale_real(0.5))
            .unwrap()
            .with_channel(Channel::new(q.sigma_minus, 1.0, "atom"), 0.1, 0.0)
            .unwrap();
        assert!((rate_multiplier(&me) - 1.0).abs() < 1e-12);
        let b = boson_ops(5).unwrap();
        let me = MasterEquation::new(b.n.clone())
            .unwrap()
            .with_channel(Channel::new(b.a, 1.0, "cavity"), 0.1, 0.0)
            .unwrap();
        assert!((rate_multiplier(&me) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_is_stationary() {
        let me = two_level(2.0, 0.3);
        let g = DensityMatrix::basis(&HilbertSpace::qubit(), &[1]).unwrap();
        let d = lindblad_rhs(&me, g.operator()).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn zero_rates_give_von_neumann() {
        let me = two_level(1.3, 0.0);
        let q = qubit_ops();
        let rho = DensityMatrix::pure(
            &HilbertSpace::qubit(),
            &nalgebra::DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]),
        )
        .unwrap();
        let d = lindblad_rhs(&me, rho.operator()).unwrap();
        let h = q.sigma_z.scale_real(0.65);
        let want = h.commutator(rho.operator()).unwrap().scale(-I);
        assert!((&d - &want).max_abs() < 1e-15);
    }

    #[test]
    fn cavity_dissipator_on_one_photon() {
        // κ/2 (2aρa† − a†aρ − ρa†a) at ρ = |1⟩⟨1|, written out entry by entry.
        let kappa = 0.37;
        let d = 4;
        let b = boson_ops(d).unwrap();
        let me = MasterEquation::new(b.n.scale_real(1.1))
            .unwrap()
            .with_channel(Channel::new(b.a.clone(), 1.1, "cavity"), kappa, 0.0)
            .unwrap();
        let space = HilbertSpace::boson(d).unwrap();
        let rho = DensityMatrix::basis(&space, &[1]).unwrap();
        let got = lindblad_rhs(&me, rho.operator()).unwrap();

        let mut want = CMatrix::zeros(d, d);
        // 2aρa†: a|1⟩ = |0⟩, so |0⟩⟨0| with weight 2.
        want[(0, 0)] += Complex64::new(2.0, 0.0);
        // a†a ρ and ρ a†a each contribute −1 on |1⟩⟨1|.
        want[(1, 1)] -= Complex64::new(2.0, 0.0);
        want *= Complex64::new(kappa / 2.0, 0.0);
        assert!((got.matrix() - want).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn attach_rejects_non_eigenoperator() {
        let q = qubit_ops();
        let me = MasterEquation::new(q.sigma_z.clone()).unwrap();
        let err = me
            .clone()
            .with_channel(Channel::new(q.sigma_x.clone(), 2.0, "x"), 1.0, 0.0)
            .unwrap_err();
        assert!(matches!(err, Error::NotEigenoperator { .. }));
        assert!(me
            .with_unchecked_channel(Channel::new(q.sigma_x, 2.0, "x"), 1.0, 0.0)
            .is_ok());
    }

    #[test]
    fn negative_rates_are_rejected() {
        let q = qubit_ops();
        let me = MasterEquation::new(q.sigma_z.scale_real(0.5)).unwrap();
        assert_eq!(
            me.with_channel(Channel::new(q.sigma_minus, 1.0, "a"), -0.1, 0.0)
                .unwrap_err(),
            Error::NegativeRate(-0.1)
        );
    }

    #[test]
    fn non_hermitian_hamiltonian_is_rejected() {
        let q = qubit_ops();
        assert!(MasterEquation::new(q.sigma_plus).is_err());
    }

    #[test]
    fn evolve_rejects_foreign_state() {
        let me = two_level(1.0, 0.1);
        let rho = DensityMatrix::basis(&HilbertSpace::boson(2).unwrap(), &[0]).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        assert!(matches!(evolve(&me, &rho, &grid), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn leakage_guard_trips() {
        let b = boson_ops(3).unwrap();
        let me = MasterEquation::new(b.n.clone())
            .unwrap()
            .with_channel(Channel::new(b.a.clone(), 1.0, "c"), 0.0, 0.5)
            .unwrap();
        let rho = DensityMatrix::basis(&HilbertSpace::boson(3).unwrap(), &[1]).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        assert!(matches!(evolve(&me, &rho, &grid), Err(Error::FockLeakage { .. })));
        let off = EvolveOptions {
            leakage_threshold: None,
            ..Default::default()
        };
        assert!(evolve_with(&me, &rho, &grid, &off).is_ok());
    }

    #[test]
    fn step_halving_flags_coarse_grids() {
        let me = two_level(2.0, 1.0);
        let rho = DensityMatrix::basis(&HilbertSpace::qubit(), &[0]).unwrap();
        let coarse = TimeGrid::new(0.0, 1.0, 10).unwrap();
        assert!(matches!(
            evolve_checked(&me, &rho, &coarse, 1e-9),
            Err(Error::StepHalving { .. })
        ));
        let fine = TimeGrid::new(0.0, 1.0, 2000).unwrap();
        assert!(evolve_checked(&me, &rho, &fine, 1e-9).is_ok());
    }
}
