//! `N` identical qubits, each with its own bath: `H = Σᵢ Ω σᵢᶻ` and one
//! channel `σᵢ⁻` per qubit, all with rates `(K, G)`.
//!
//! With `H` written without the usual ½, `σᵢ⁻` lowers the energy by `2Ω`,
//! so that is the channel frequency used for the eigenoperator check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::lindblad::{evolve_with, Channel, EvolveOptions, MasterEquation, RateParam};
use crate::operator::{embed, qubit_ops, CVector, DensityMatrix, HilbertSpace, Operator};

pub const DEFAULT_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DickeParams {
    pub n: usize,
    pub m: usize,
    pub omega: f64,
    pub k: f64,
    pub g: f64,
    pub max_qubits: usize,
}

impl DickeParams {
    pub fn new(n: usize, m: usize, omega: f64, k: f64, g: f64) -> Result<Self> {
        let p = Self {
            n,
            m,
            omega,
            k,
            g,
            max_qubits: DEFAULT_MAX_QUBITS,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rates from the thermal map at the qubit frequency `omega`.
    pub fn from_temperature(n: usize, m: usize, omega: f64, temperature: f64) -> Result<Self> {
        let r = thermal_rates(omega, temperature)?;
        Self::new(n, m, omega, r.k, r.g)
    }

    pub fn with_max_qubits(mut self, cap: usize) -> Result<Self> {
        self.max_qubits = cap;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptySpace);
        }
        if self.n > self.max_qubits {
            return Err(Error::InvalidParameter(format!(
                "N = {} exceeds the cap of {} qubits",
                self.n, self.max_qubits
            )));
        }
        if self.m > self.n {
            return Err(Error::InvalidParameter(format!("m = {} > N = {}", self.m, self.n)));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega = {}", self.omega)));
        }
        for r in [self.k, self.g] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::NegativeRate(r));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::qubits(self.n).expect("n ≥ 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRates {
    pub k: f64,
    pub g: f64,
}

/// `G = 1/(e^{Ω/T} − 1)`, `K = G + 1` with `ħ = k_B = 1`. `T = 0` gives
/// `G = 0`, `K = 1`.
pub fn thermal_rates(omega: f64, temperature: f64) -> Result<ThermalRates> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
    }
    if !(temperature >= 0.0) || temperature.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "temperature = {temperature} must be finite and non-negative"
        )));
    }
    let g = if temperature == 0.0 {
        0.0
    } else {
        1.0 / (omega / temperature).exp_m1()
    };
    Ok(ThermalRates { k: g + 1.0, g })
}

/// Diagonal of `Σᵢ Ω σᵢᶻ`.
pub fn dicke_energies(p: &DickeParams) -> Vec<f64> {
    let s = p.space();
    (0..s.dim())
        .map(|idx| {
            s.decompose(idx)
                .iter()
                .map(|&l| if l == 0 { p.omega } else { -p.omega })
                .sum()
        })
        .collect()
}

pub fn dicke_hamiltonian(p: &DickeParams) -> Operator {
    Operator::from_real_diagonal(&p.space(), &dicke_energies(p)).expect("dimension matches")
}

pub fn dicke_me(p: &DickeParams) -> Result<MasterEquation> {
    p.validate()?;
    let s = p.space();
    let sm = qubit_ops().sigma_minus;
    let mut me = MasterEquation::new(dicke_hamiltonian(p))?;
    for i in 0..p.n {
        me = me.with_channel(
            Channel::new(embed(&sm, i, &s)?, 2.0 * p.omega, format!("qubit{i}")),
            p.k,
            p.g,
        )?;
    }
    Ok(me)
}

/// `(|1…1 0…0⟩ + |0…0⟩)/√2` with the first `m` qubits excited; `m = 0`
/// gives the all-ground state.
pub fn dicke_initial(n: usize, m: usize) -> Result<DensityMatrix> {
    if m > n {
        return Err(Error::InvalidParameter(format!("m = {m} > N = {n}")));
    }
    dicke_initial_with(n, &(0..m).collect::<Vec<_>>())
}

/// Like [`dicke_initial`] with an arbitrary set of excited qubits.
pub fn dicke_initial_with(n: usize, excited: &[usize]) -> Result<DensityMatrix> {
    DensityMatrix::pure(&HilbertSpace::qubits(n)?, &dicke_initial_vector(n, excited)?)
}

/// State vector of [`dicke_initial_with`].
pub fn dicke_initial_vector(n: usize, excited: &[usize]) -> Result<CVector> {
    let s = HilbertSpace::qubits(n)?;
    let mut levels = vec![1; n];
    for &i in excited {
        if i >= n {
            return Err(Error::SlotOutOfRange { slot: i, factors: n });
        }
        levels[i] = 0;
    }
    let ground = s.basis_vector(&vec![1; n])?;
    let v = s.basis_vector(&levels)? + ground;
    let norm = v.norm();
    Ok(v / Complex64::new(norm, 0.0))
}

/// `⟨ψ|ρ̃(t)|ψ⟩` along a trajectory, where `ρ̃ = e^{iHt} ρ e^{−iHt}` removes
/// the free phases of the diagonal Hamiltonian `h_diag`.
pub fn interaction_fidelity(traj: &Trajectory<Operator>, h_diag: &[f64], psi: &CVector) -> Trajectory<f64> {
    let t0 = traj.grid().t0();
    let samples = traj
        .iter()
        .map(|(t, rho)| {
            let phases: Vec<Complex64> = h_diag
                .iter()
                .map(|&e| Complex64::from_polar(1.0, e * (t - t0)))
                .collect();
            // ψ̃ = e^{−iHt}ψ, so ⟨ψ|ρ̃|ψ⟩ = ⟨ψ̃|ρ|ψ̃⟩.
            let tilde = CVector::from_iterator(
                psi.len(),
                psi.iter().zip(&phases).map(|(c, ph)| c * ph.conj()),
            );
            rho.matrix_element(&tilde, &tilde).expect("dimension matches").re
        })
        .collect();
    Trajectory::new(*traj.grid(), samples).expect("same grid")
}

/// Interaction-picture fidelity from full evolution, starting from the
/// state with `excited` qubits up.
pub fn dicke_fidelity_with(p: &DickeParams, excited: &[usize], grid: &TimeGrid) -> Result<Trajectory<f64>> {
    let me = dicke_me(p)?;
    let psi = dicke_initial_vector(p.n, excited)?;
    let rho0 = DensityMatrix::pure(&p.space(), &psi)?;
    let traj = evolve_with(&me, &rho0, grid, &EvolveOptions::default())?;
    Ok(interaction_fidelity(&traj, &dicke_energies(p), &psi))
}

/// Interaction-picture fidelity of [`dicke_initial`] from full evolution.
pub fn dicke_fidelity(p: &DickeParams, grid: &TimeGrid) -> Result<Trajectory<f64>> {
    dicke_fidelity_with(p, &(0..p.m).collect::<Vec<_>>(), grid)
}

/// `F = 1 − K/Γ_K1 − K²/Γ_K2 − G/Γ_G1 − G²/Γ_G2 − GK/Γ_GK` with
///
/// ```text
/// 1/Γ_K1 =  t [2 + 2(2m−N)]     1/Γ_G1 =  t [2 − 2(2m−N)]
/// 1/Γ_K2 = −t²[2 + 2(2m−N)]     1/Γ_G2 = −t²[2 − 2(2m−N)]
/// 1/Γ_GK = ½ G K t² [4(2m−N) − 4]
/// ```
pub fn dicke_fidelity_closed(p: &DickeParams, t: f64) -> f64 {
    let s = 2.0 * p.m as f64 - p.n as f64;
    let (k, g) = (p.k, p.g);
    let inv_k1 = t * (2.0 + 2.0 * s);
    let inv_k2 = -t * t * (2.0 + 2.0 * s);
    let inv_g1 = t * (2.0 - 2.0 * s);
    let inv_g2 = -t * t * (2.0 - 2.0 * s);
    let inv_gk = 0.5 * g * k * t * t * (4.0 * s - 4.0);
    1.0 - k * inv_k1 - k * k * inv_k2 - g * inv_g1 - g * g * inv_g2 - g * k * inv_gk
}

/// `∂F/∂K` and `∂F/∂G` of the closed form at `K = G = 0`.
pub fn dicke_closed_slopes(p: &DickeParams, t: f64) -> (f64, f64) {
    let s = 2.0 * p.m as f64 - p.n as f64;
    (-t * (2.0 + 2.0 * s), -t * (2.0 - 2.0 * s))
}

/// Exact-vs-closed comparison on a grid.
#[derive(Debug, Clone)]
pub struct DickeComparison {
    pub exact: Trajectory<f64>,
    pub closed: Trajectory<f64>,
    /// `closed − exact`.
    pub gap: Trajectory<f64>,
    /// Central-difference `∂F/∂K`, `∂F/∂G` of the evolved fidelity at zero
    /// rates. Every qubit's `K` (resp. `G`) moves together.
    pub fd_slope_k: Trajectory<f64>,
    pub fd_slope_g: Trajectory<f64>,
    pub closed_slope_k: Trajectory<f64>,
    pub closed_slope_g: Trajectory<f64>,
}

impl DickeComparison {
    pub fn max_gap(&self) -> f64 {
        self.gap.samples().iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_slope_gap(&self) -> (f64, f64) {
        (
            self.fd_slope_k.max_abs_diff(&self.closed_slope_k),
            self.fd_slope_g.max_abs_diff(&self.closed_slope_g),
        )
    }
}

/// Evolves the register, evaluates the closed form and measures the
/// first-order rate slopes by central differences with step `h`.
pub fn dicke_compare(p: &DickeParams, grid: &TimeGrid, h: f64) -> Result<DickeComparison> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h}")));
    }
    let exact = dicke_fidelity(p, grid)?;
    let closed = Trajectory::new(
        *grid,
        grid.times().iter().map(|&t| dicke_fidelity_closed(p, t)).collect(),
    )?;
    let gap = Trajectory::new(
        *grid,
        closed
            .samples()
            .iter()
            .zip(exact.samples())
            .map(|(c, e)| c - e)
            .collect(),
    )?;

    let me = dicke_me(p)?;
    let excited: Vec<usize> = (0..p.m).collect();
    let psi = dicke_initial_vector(p.n, &excited)?;
    let rho0 = DensityMatrix::pure(&p.space(), &psi)?;
    let diag = dicke_energies(p);
    let opts = EvolveOptions {
        trace_tolerance: f64::INFINITY,
        leakage_threshold: None,
    };
    let fidelity_at = |kind_k: bool, sign: f64| -> Result<Trajectory<f64>> {
        let mut v = vec![0.0; me.num_params()];
        for i in 0..p.n {
            let param = if kind_k { RateParam::down(i) } else { RateParam::up(i) };
            v[param.index()] = sign * h;
        }
        let shifted = me.with_signed_rates(&v);
        let traj = evolve_with(&shifted, &rho0, grid, &opts)?;
        Ok(interaction_fidelity(&traj, &diag, &psi))
    };
    let slope = |kind_k: bool| -> Result<Trajectory<f64>> {
        let plus = fidelity_at(kind_k, 1.0)?;
        let minus = fidelity_at(kind_k, -1.0)?;
        Trajectory::new(
            *grid,
            plus.samples()
                .iter()
                .zip(minus.samples())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        )
    };
    let fd_slope_k = slope(true)?;
    let fd_slope_g = slope(false)?;
    let closed_slopes: Vec<(f64, f64)> = grid.times().iter().map(|&t| dicke_closed_slopes(p, t)).collect();
    Ok(DickeComparison {
        exact,
        closed,
        gap,
        fd_slope_k,
        fd_slope_g,
        closed_slope_k: Trajectory::new(*grid, closed_slopes.iter().map(|s| s.0).collect())?,
        closed_slope_g: Trajectory::new(*grid, closed_slopes.iter().map(|s| s.1).collect())?,
    })
}
