//! Single lossy cavity mode: `H₀ = ω_f a†a`, one channel `a` with `K = κ`.
//!
//! Besides the generic hierarchy, the κ-derivatives have a direct Fock-basis
//! recursion. In the frame rotating with the free evolution,
//! `c_k(t) = e^{i(m−n)ω_f t} ∂ᵏρ_{mn}/∂κᵏ` obeys
//!
//! ```text
//! c_k(t) = ∫₀ᵗ F_k(t′) e^{i(m−n)ω_f t′} dt′
//! F_k    = k [ √((m+1)(n+1)) ∂^{k−1}ρ_{m+1,n+1} − (m+n)/2 ∂^{k−1}ρ_{mn} ]
//! ```
//!
//! starting from `ρ⁰_{mn}(t) = ρ_{mn}(0) e^{−i(m−n)ω_f t}`. The factor `k`
//! is the multiplicity of the single loss parameter in `∂ᵏ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::lindblad::{Channel, MasterEquation};
use crate::operator::{boson_ops, CMatrix, DensityMatrix, Factor, HilbertSpace, Operator};
use crate::quadrature::cumulative_simpson;

/// Initial population tolerated on the top Fock level.
pub const TOP_LEVEL_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    pub omega_f: f64,
    pub kappa: f64,
    pub fock_dim: usize,
    pub initial: DensityMatrix,
}

impl CavityParams {
    /// `fock_dim` is taken from the space of `initial`, which must be a
    /// single boson mode.
    pub fn new(omega_f: f64, kappa: f64, initial: DensityMatrix) -> Result<Self> {
        let fock_dim = match initial.space().factors() {
            [Factor::Boson(d)] => *d,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "cavity state must live on one boson mode, got {}",
                    initial.space()
                )))
            }
        };
        if !omega_f.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_f = {omega_f}")));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::NegativeRate(kappa));
        }
        Ok(Self {
            omega_f,
            kappa,
            fock_dim,
            initial,
        })
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::boson(self.fock_dim).expect("validated fock_dim")
    }
}

/// `|n⟩⟨n|` on a `fock_dim`-level mode.
pub fn fock_state(fock_dim: usize, n: usize) -> Result<DensityMatrix> {
    if n >= fock_dim {
        return Err(Error::FockOverflow { level: n, fock_dim });
    }
    DensityMatrix::basis(&HilbertSpace::boson(fock_dim)?, &[n])
}

pub fn number_operator(fock_dim: usize) -> Result<Operator> {
    Ok(boson_ops(fock_dim)?.n)
}

pub fn cavity_me(p: &CavityParams) -> Result<MasterEquation> {
    let b = boson_ops(p.fock_dim)?;
    MasterEquation::new(b.n.scale_real(p.omega_f))?.with_channel(
        Channel::new(b.a, p.omega_f, "cavity"),
        p.kappa,
        0.0,
    )
}

/// `∂ᵏρ/∂κᵏ` at `κ = 0` for `k = 0..=q` on a shared grid.
#[derive(Debug, Clone)]
pub struct CavityExpansion {
    grid: TimeGrid,
    space: HilbertSpace,
    /// `[k][t]`.
    derivatives: Vec<Vec<CMatrix>>,
}

impl CavityExpansion {
    pub fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn derivative(&self, k: usize) -> Option<Trajectory<Operator>> {
        let d = self.derivatives.get(k)?;
        let samples = d
            .iter()
            .map(|m| Operator::from_parts(self.space.clone(), m.clone()))
            .collect();
        Trajectory::new(self.grid, samples).ok()
    }

    /// `Σ_{k ≤ q} κᵏ/k! ∂ᵏρ`.
    pub fn assemble(&self, kappa: f64, order: usize) -> Result<Trajectory<Operator>> {
        if order > self.max_order() {
            return Err(Error::OrderTooLarge {
                requested: order,
                limit: self.max_order(),
            });
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::NegativeRate(kappa));
        }
        let d = self.space.dim();
        let mut samples = Vec::with_capacity(self.grid.len());
        for t in 0..self.grid.len() {
            let mut acc = CMatrix::zeros(d, d);
            let mut w = 1.0;
            for k in 0..=order {
                if k > 0 {
                    w *= kappa / k as f64;
                }
                acc += &self.derivatives[k][t] * Complex64::new(w, 0.0);
            }
            samples.push(Operator::from_parts(self.space.clone(), acc));
        }
        Trajectory::new(self.grid, samples)
    }
}

/// κ-derivatives of the cavity state up to `order` by the Fock-basis
/// recursion, with the running integrals done by composite Simpson on `grid`.
pub fn cavity_expansion(p: &CavityParams, order: usize, grid: &TimeGrid) -> Result<CavityExpansion> {
    let d = p.fock_dim;
    let rho0 = p.initial.operator().matrix();
    let top = rho0[(d - 1, d - 1)].re;
    if top > TOP_LEVEL_THRESHOLD {
        return Err(Error::FockLeakage {
            time: grid.t0(),
            population: top,
            threshold: TOP_LEVEL_THRESHOLD,
        });
    }
    let times = grid.times();
    let dt = grid.dt();
    let t0 = grid.t0();
    // e^{−i(m−n)ω_f (t − t₀)}
    let phase = |m: usize, n: usize, t: f64| {
        Complex64::from_polar(1.0, -(m as f64 - n as f64) * p.omega_f * (t - t0))
    };

    let mut derivatives: Vec<Vec<CMatrix>> = Vec::with_capacity(order + 1);
    derivatives.push(
        times
            .iter()
            .map(|&t| CMatrix::from_fn(d, d, |m, n| rho0[(m, n)] * phase(m, n, t)))
            .collect(),
    );

    for k in 1..=order {
        let prev = &derivatives[k - 1];
        let mut next = vec![CMatrix::zeros(d, d); times.len()];
        let kf = k as f64;
        for m in 0..d {
            for n in 0..d {
                let feed = if m + 1 < d && n + 1 < d {
                    (((m + 1) * (n + 1)) as f64).sqrt()
                } else {
                    0.0
                };
                let loss = 0.5 * (m + n) as f64;
                // F_k in the rotating frame.
                let integrand: Vec<Complex64> = times
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| {
                        let upper = if feed != 0.0 { prev[i][(m + 1, n + 1)] } else { Complex64::default() };
                        let f = (upper * feed - prev[i][(m, n)] * loss) * kf;
                        f * phase(m, n, t).conj()
                    })
                    .collect();
                let c = cumulative_simpson(&integrand, dt);
                for (i, &t) in times.iter().enumerate() {
                    next[i][(m, n)] = c[i] * phase(m, n, t);
                }
            }
        }
        derivatives.push(next);
    }

    Ok(CavityExpansion {
        grid: *grid,
        space: p.space(),
        derivatives,
    })
}
