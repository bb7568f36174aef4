//! Two-level atom in a lossy cavity mode.
//!
//! Space is `qubit ⊗ boson(fock_dim)`, so `|e,n⟩` has index `n` and `|g,n⟩`
//! has index `fock_dim + n`. Channel 0 is atomic decay (`σ⁻`, rate γ) and
//! channel 1 is cavity loss (`a`, rate κ).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::lindblad::{Channel, MasterEquation};
use crate::models::AtomObservable;
use crate::operator::{boson_ops, embed, qubit_ops, CVector, DensityMatrix, Factor, HilbertSpace, Operator};
use crate::quadrature::cumulative_simpson;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct JcParams {
    pub omega_f: f64,
    pub omega_a: f64,
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub fock_dim: usize,
    /// Amplitudes on `|e,n⟩`, `n < fock_dim`.
    excited: Vec<Complex64>,
    /// Amplitudes on `|g,n⟩`.
    ground: Vec<Complex64>,
}

impl JcParams {
    /// Starts in `|e,0⟩`.
    pub fn new(omega_f: f64, omega_a: f64, g: f64, gamma: f64, kappa: f64, fock_dim: usize) -> Result<Self> {
        for (name, v) in [("omega_f", omega_f), ("omega_a", omega_a), ("g", g)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        for r in [gamma, kappa] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::NegativeRate(r));
            }
        }
        if fock_dim < 2 {
            return Err(Error::FockDimension(fock_dim));
        }
        let mut excited = vec![Complex64::default(); fock_dim];
        excited[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            omega_f,
            omega_a,
            g,
            gamma,
            kappa,
            fock_dim,
            excited,
            ground: vec![Complex64::default(); fock_dim],
        })
    }

    /// Replaces the initial amplitudes. Missing trailing entries are zero;
    /// the total norm must be 1.
    pub fn with_initial_amplitudes(mut self, excited: &[Complex64], ground: &[Complex64]) -> Result<Self> {
        let d = self.fock_dim;
        if excited.len() > d || ground.len() > d {
            return Err(Error::FockOverflow {
                level: excited.len().max(ground.len()) - 1,
                fock_dim: d,
            });
        }
        let norm: f64 = excited.iter().chain(ground).map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("initial amplitudes have norm² {norm}")));
        }
        self.excited = vec![Complex64::default(); d];
        self.ground = vec![Complex64::default(); d];
        self.excited[..excited.len()].copy_from_slice(excited);
        self.ground[..ground.len()].copy_from_slice(ground);
        Ok(self)
    }

    /// Starts in `|e,n⟩`.
    pub fn with_number_state(self, n: usize) -> Result<Self> {
        if n >= self.fock_dim {
            return Err(Error::FockOverflow {
                level: n,
                fock_dim: self.fock_dim,
            });
        }
        let mut e = vec![Complex64::default(); n + 1];
        e[n] = Complex64::new(1.0, 0.0);
        self.with_initial_amplitudes(&e, &[])
    }

    pub fn detuning(&self) -> f64 {
        self.omega_f - self.omega_a
    }

    pub fn excited_amplitudes(&self) -> &[Complex64] {
        &self.excited
    }

    pub fn ground_amplitudes(&self) -> &[Complex64] {
        &self.ground
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(vec![Factor::Qubit, Factor::Boson(self.fock_dim)]).expect("validated fock_dim")
    }

    pub fn initial_vector(&self) -> CVector {
        let mut v = CVector::zeros(2 * self.fock_dim);
        for n in 0..self.fock_dim {
            v[n] = self.excited[n];
            v[self.fock_dim + n] = self.ground[n];
        }
        v
    }

    pub fn initial_state(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.space(), &self.initial_vector()).expect("normalized amplitudes")
    }
}

/// `ω_f a†a + ½ω_a σz + g(a†σ⁻ + σ⁺a)`.
pub fn jc_h0(p: &JcParams) -> Operator {
    let s = p.space();
    let q = qubit_ops();
    let b = boson_ops(p.fock_dim).expect("validated fock_dim");
    let field = embed(&b.n, 1, &s).expect("slot 1 is the mode");
    let atom = embed(&q.sigma_z, 0, &s).expect("slot 0 is the atom");
    let exchange = &q.sigma_minus.kron(&b.a_dag) + &q.sigma_plus.kron(&b.a);
    &(&field.scale_real(p.omega_f) + &atom.scale_real(0.5 * p.omega_a)) + &exchange.scale_real(p.g)
}

/// `a†a + σ⁺σ⁻`.
pub fn excitation_number(p: &JcParams) -> Operator {
    let s = p.space();
    let q = qubit_ops();
    let b = boson_ops(p.fock_dim).expect("validated fock_dim");
    &embed(&b.n, 1, &s).expect("slot 1") + &embed(&(&q.sigma_plus * &q.sigma_minus), 0, &s).expect("slot 0")
}

fn channels(p: &JcParams) -> (Channel, Channel) {
    let s = p.space();
    let q = qubit_ops();
    let b = boson_ops(p.fock_dim).expect("validated fock_dim");
    (
        Channel::new(embed(&q.sigma_minus, 0, &s).expect("slot 0"), p.omega_a, "atom"),
        Channel::new(embed(&b.a, 1, &s).expect("slot 1"), p.omega_f, "cavity"),
    )
}

/// Schrödinger-picture master equation with `H₀ = jc_h0`. The jump operators
/// are not eigenoperators of the coupled Hamiltonian, so the check is skipped.
pub fn jc_me(p: &JcParams) -> Result<MasterEquation> {
    let (atom, cavity) = channels(p);
    MasterEquation::new(jc_h0(p))?
        .with_unchecked_channel(atom, p.gamma, 0.0)?
        .with_unchecked_channel(cavity, p.kappa, 0.0)
}

/// The same dissipators with no Hamiltonian part, i.e. the interaction-picture
/// equation with the jump operators frozen at `t = 0`.
pub fn jc_interaction_me(p: &JcParams) -> Result<MasterEquation> {
    let (atom, cavity) = channels(p);
    MasterEquation::new(Operator::zeros(&p.space()))?
        .with_unchecked_channel(atom, p.gamma, 0.0)?
        .with_unchecked_channel(cavity, p.kappa, 0.0)
}

/// Dressed doublet `{|e,n⟩, |g,n+1⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dressed {
    pub e_plus: f64,
    pub e_minus: f64,
    /// Mixing angle in `(0, π)`.
    pub theta: f64,
}

impl Dressed {
    /// Half the splitting.
    pub fn lambda(&self) -> f64 {
        0.5 * (self.e_plus - self.e_minus)
    }

    /// `sin²(θ/2) e^{−iE₊t} + cos²(θ/2) e^{−iE₋t}`, the `|e,n⟩` amplitude.
    pub fn excited_amplitude(&self, t: f64) -> Complex64 {
        let h = 0.5 * self.theta;
        Complex64::from_polar(h.sin().powi(2), -self.e_plus * t)
            + Complex64::from_polar(h.cos().powi(2), -self.e_minus * t)
    }

    /// `½ sin θ (e^{−iE₊t} − e^{−iE₋t})`, the `|g,n+1⟩` amplitude.
    pub fn ground_amplitude(&self, t: f64) -> Complex64 {
        (Complex64::from_polar(1.0, -self.e_plus * t) - Complex64::from_polar(1.0, -self.e_minus * t))
            * (0.5 * self.theta.sin())
    }
}

/// `E±(n+1) = (ω_f/2)(2n+1) ± ½√(δ² + 4g²(n+1))`, `θ = atan2(2g√(n+1), δ)`.
pub fn jc_dressed(p: &JcParams, n: usize) -> Dressed {
    let delta = p.detuning();
    let c = p.g * ((n + 1) as f64).sqrt();
    let half_gap = 0.5 * (delta * delta + 4.0 * c * c).sqrt();
    let mid = 0.5 * p.omega_f * (2 * n + 1) as f64;
    Dressed {
        e_plus: mid + half_gap,
        e_minus: mid - half_gap,
        theta: (2.0 * c).atan2(delta),
    }
}

/// `|ψ⁰(t)⟩` for the start `|e,n⟩` under `jc_h0`.
pub fn jc_psi0(p: &JcParams, n: usize, t: f64) -> Result<CVector> {
    if n + 1 >= p.fock_dim {
        return Err(Error::FockOverflow {
            level: n + 1,
            fock_dim: p.fock_dim,
        });
    }
    let d = jc_dressed(p, n);
    let mut v = CVector::zeros(2 * p.fock_dim);
    v[n] = d.excited_amplitude(t);
    v[p.fock_dim + n + 1] = d.ground_amplitude(t);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcTraces {
    pub tr_a: Complex64,
    pub tr_b: Complex64,
}

/// Closed-form `Tr(ρ⁰A)` and `Tr(Bρ⁰)` for the start `Σ_n w_n |e,n⟩`, with
/// `B = −4λ⁺σ⁺ − 4λ⁻σ⁻` and `Tr(ρ⁰A) = ¼Tr(Bρ⁰) + λᶻ Σ_n |w_n|² (…)`.
///
/// Cross terms between neighbouring doublets carry `conj(w_n) w_{n−1}` (λ⁺)
/// or `w_n conj(w_{n−1})` (λ⁻). Unit weights on a single `n` reproduce a
/// bare `|e,n⟩` start.
pub fn jc_trace_closed(p: &JcParams, weights: &[Complex64], a: &AtomObservable, t: f64) -> Result<JcTraces> {
    if let Some(top) = weights.iter().rposition(|w| *w != Complex64::default()) {
        if top + 1 >= p.fock_dim {
            return Err(Error::FockOverflow {
                level: top + 1,
                fock_dim: p.fock_dim,
            });
        }
    }
    let mut tr_b = Complex64::default();
    let mut z = 0.0;
    for (n, &w) in weights.iter().enumerate() {
        let upper = jc_dressed(p, n);
        let ae = upper.excited_amplitude(t);
        let s = upper.lambda() * t;
        z += w.norm_sqr() * (ae.norm_sqr() - upper.theta.sin().powi(2) * s.sin().powi(2));
        if n == 0 {
            continue;
        }
        let wp = weights[n - 1];
        // Doublet n: {|e,n−1⟩, |g,n⟩}.
        let lower = jc_dressed(p, n - 1);
        let sin_n = lower.theta.sin();
        let diff = Complex64::from_polar(1.0, -lower.e_plus * t) - Complex64::from_polar(1.0, -lower.e_minus * t);
        tr_b += a.lambda_plus * w.conj() * wp * (-2.0 * sin_n) * diff * ae.conj();
        tr_b += a.lambda_minus * w * wp.conj() * (-2.0 * sin_n) * ae * diff.conj();
    }
    Ok(JcTraces {
        tr_a: tr_b * 0.25 + a.lambda_z * z,
        tr_b,
    })
}

/// `Tr(ρ⁰A) + (γ/2)∫Tr(ρ⁰B) − (γ²/2)∫∫Tr(ρ⁰B)` truncated at `order ≤ 2`,
/// with `γ = p.gamma` and both integrals by cumulative Simpson on `grid`.
pub fn jc_gamma_series(
    p: &JcParams,
    weights: &[Complex64],
    a: &AtomObservable,
    grid: &TimeGrid,
    order: usize,
) -> Result<Trajectory<Complex64>> {
    if order > 2 {
        return Err(Error::OrderTooLarge {
            requested: order,
            limit: 2,
        });
    }
    let traces = grid
        .times()
        .into_iter()
        .map(|t| jc_trace_closed(p, weights, a, t))
        .collect::<Result<Vec<_>>>()?;
    let tr_b: Vec<Complex64> = traces.iter().map(|x| x.tr_b).collect();
    let once = cumulative_simpson(&tr_b, grid.dt());
    let twice = cumulative_simpson(&once, grid.dt());
    let g = p.gamma;
    let samples = traces
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let mut v = x.tr_a;
            if order >= 1 {
                v += once[k] * (0.5 * g);
            }
            if order >= 2 {
                v -= twice[k] * (0.5 * g * g);
            }
            v
        })
        .collect();
    Trajectory::new(*grid, samples)
}
