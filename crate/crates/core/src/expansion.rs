//! Taylor expansion of the density operator in the dissipation rates.
//!
//! Writing `r_j` for the rate parameters `[K₀, G₀, K₁, G₁, …]` and
//! `D_α(t) = ∂^α ρ(t)` at `r = 0`, differentiating the master equation gives
//! the lower-triangular hierarchy
//!
//! ```text
//! dD_α/dt = −i[H₀, D_α] + Σ_j α_j 𝓛_j[D_{α−e_j}]
//! ```
//!
//! with `D_0(t₀) = ρ(t₀)` and `D_α(t₀) = 0` otherwise. The truncated series is
//!
//! ```text
//! ρ(t) ≈ Σ_{|α| ≤ q} D_α(t) r^α / α!
//! ```
//!
//! Coefficients are stored as plain derivatives; the factorials are applied
//! only by [`assemble`].

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::integrate::rk4_step;
use crate::lindblad::{evolve_with, EvolveOptions, Guard, MasterEquation, RateParam};
use crate::operator::{symmetrize, trace_of_product, CMatrix, DensityMatrix, HilbertSpace, Operator};

/// Default upper bound on the expansion order.
pub const DEFAULT_ORDER_CAP: usize = 4;

/// Derivative orders per rate parameter, `[k₀, g₀, k₁, g₁, …]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(num_channels: usize) -> Self {
        Self(vec![0; 2 * num_channels])
    }

    /// From per-channel `(k_m, g_m)` pairs.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        Self(pairs.iter().flat_map(|&(k, g)| [k, g]).collect())
    }

    /// The multi-index of `∂/∂r_{p₁} ∂/∂r_{p₂} …`; the order of `params`
    /// does not matter.
    pub fn from_params(num_channels: usize, params: &[RateParam]) -> Self {
        let mut out = Self::zero(num_channels);
        for p in params {
            out.0[p.index()] += 1;
        }
        out
    }

    pub fn unit(num_channels: usize, param: RateParam) -> Self {
        Self::from_params(num_channels, &[param])
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn num_channels(&self) -> usize {
        self.0.len() / 2
    }

    pub fn num_params(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self, param: RateParam) -> u32 {
        self.0[param.index()]
    }

    pub fn total_order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn pairs(&self) -> Vec<(u32, u32)> {
        self.0.chunks(2).map(|c| (c[0], c[1])).collect()
    }

    /// `α!`, the product of the component factorials.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `Π_j r_j^{α_j}`.
    pub fn monomial(&self, rates: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(rates)
            .map(|(&a, &r)| r.powi(a as i32))
            .product()
    }

    pub fn involves(&self, param: RateParam) -> bool {
        self.order(param) > 0
    }

    /// `α − e_j`, if that stays non-negative.
    pub fn lowered(&self, j: usize) -> Option<Self> {
        if self.0[j] == 0 {
            return None;
        }
        let mut out = self.clone();
        out.0[j] -= 1;
        Some(out)
    }

    /// All multi-indices over `num_channels` channels with total order at
    /// most `max_order`, by increasing total order.
    pub fn all_up_to(num_channels: usize, max_order: usize) -> Vec<Self> {
        let n = 2 * num_channels;
        let mut out = Vec::new();
        for total in 0..=max_order as u32 {
            let mut cur = vec![0u32; n];
            compositions(&mut cur, 0, total, &mut out);
        }
        out
    }
}

fn compositions(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 >= cur.len() {
        if let Some(last) = cur.last_mut() {
            *last = remaining;
            out.push(MultiIndex(cur.clone()));
        } else if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        compositions(cur, pos + 1, remaining - a, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(j, &a)| {
                let p = RateParam::from_index(j);
                if a == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{a}")
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// Non-negative values for every rate parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAssignment(Vec<f64>);

impl RateAssignment {
    /// From per-channel `(K_m, G_m)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let v: Vec<f64> = pairs.iter().flat_map(|&(k, g)| [k, g]).collect();
        for &r in &v {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::NegativeRate(r));
            }
        }
        Ok(Self(v))
    }

    /// The rates the master equation was built with.
    pub fn of(me: &MasterEquation) -> Self {
        Self(me.rate_vector())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyOptions {
    /// Largest accepted `max_order`.
    pub order_cap: usize,
    /// Guards applied to the zeroth-order coefficient.
    pub evolve: EvolveOptions,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            order_cap: DEFAULT_ORDER_CAP,
            evolve: EvolveOptions::default(),
        }
    }
}

/// `D_α(t)` for every `|α| ≤ max_order` on a shared grid.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    grid: TimeGrid,
    max_order: usize,
    num_channels: usize,
    space: HilbertSpace,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    trajectories: Vec<Trajectory<Operator>>,
}

impl CoefficientSet {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// Multi-indices in the table, by increasing total order.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&Trajectory<Operator>> {
        self.lookup.get(alpha).map(|&i| &self.trajectories[i])
    }

    /// `Tr(D_α(t) A)` along the grid.
    pub fn traced(&self, alpha: &MultiIndex, a: &Operator) -> Result<Trajectory<Complex64>> {
        let traj = self
            .get(alpha)
            .ok_or_else(|| Error::MissingCoefficient(alpha.to_string()))?;
        if a.space() != &self.space {
            return Err(Error::SpaceMismatch {
                left: self.space.to_string(),
                right: a.space().to_string(),
            });
        }
        Ok(traj.map(|d| trace_of_product(d.matrix(), a.matrix())))
    }
}

/// Right-hand side of the equation for `D_α`, given `D_α` and every
/// `D_{α−e_j}` at the same instant.
pub fn hierarchy_rhs(
    me: &MasterEquation,
    coeffs: &HashMap<MultiIndex, Operator>,
    alpha: &MultiIndex,
) -> Result<Operator> {
    if alpha.num_channels() != me.channels().len() {
        return Err(Error::InvalidParameter(format!(
            "multi-index over {} channels for a master equation with {}",
            alpha.num_channels(),
            me.channels().len()
        )));
    }
    let fetch = |beta: &MultiIndex| {
        coeffs
            .get(beta)
            .ok_or_else(|| Error::MissingCoefficient(beta.to_string()))
    };
    let d = fetch(alpha)?;
    let mut out = me.hamiltonian_part(d.matrix());
    for j in 0..alpha.num_params() {
        if let Some(parent) = alpha.lowered(j) {
            let mult = Complex64::new(f64::from(alpha.orders()[j]), 0.0);
            out += me.dissipator(j, fetch(&parent)?.matrix()) * mult;
        }
    }
    Ok(Operator::from_parts(me.space().clone(), out))
}

/// For each coefficient: `(param j, α_j, position of α − e_j)`.
fn parent_links(indices: &[MultiIndex], lookup: &HashMap<MultiIndex, usize>) -> Vec<Vec<(usize, f64, usize)>> {
    indices
        .iter()
        .map(|alpha| {
            (0..alpha.num_params())
                .filter_map(|j| {
                    alpha
                        .lowered(j)
                        .map(|p| (j, f64::from(alpha.orders()[j]), lookup[&p]))
                })
                .collect()
        })
        .collect()
}

pub fn solve_hierarchy(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    max_order: usize,
) -> Result<CoefficientSet> {
    solve_hierarchy_with(me, rho0, grid, max_order, &HierarchyOptions::default())
}

/// Integrates every coefficient with `|α| ≤ max_order` jointly, one RK4 step
/// at a time, on the same grid and stepper as the exact solver.
pub fn solve_hierarchy_with(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    max_order: usize,
    opts: &HierarchyOptions,
) -> Result<CoefficientSet> {
    if max_order > opts.order_cap {
        return Err(Error::OrderTooLarge {
            requested: max_order,
            limit: opts.order_cap,
        });
    }
    if rho0.space() != me.space() {
        return Err(Error::SpaceMismatch {
            left: me.space().to_string(),
            right: rho0.space().to_string(),
        });
    }
    let space = me.space().clone();
    let nch = me.channels().len();
    let indices = MultiIndex::all_up_to(nch, max_order);
    let lookup: HashMap<MultiIndex, usize> = indices
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    let links = parent_links(&indices, &lookup);
    let guard = Guard::new(&space, opts.evolve);

    let d = space.dim();
    let mut state: Vec<CMatrix> = indices
        .iter()
        .map(|a| {
            if a.total_order() == 0 {
                rho0.operator().matrix().clone()
            } else {
                CMatrix::zeros(d, d)
            }
        })
        .collect();
    guard.check(&state[0], grid.t0())?;

    let mut samples: Vec<Vec<Operator>> = state
        .iter()
        .map(|m| {
            let mut v = Vec::with_capacity(grid.len());
            v.push(Operator::from_parts(space.clone(), m.clone()));
            v
        })
        .collect();

    let rhs = |s: &[CMatrix]| -> Vec<CMatrix> {
        s.iter()
            .zip(&links)
            .map(|(dm, parents)| {
                let mut out = me.hamiltonian_part(dm);
                for &(j, mult, p) in parents {
                    out += me.dissipator(j, &s[p]) * Complex64::new(mult, 0.0);
                }
                out
            })
            .collect()
    };

    let dt = grid.dt();
    for k in 1..grid.len() {
        rk4_step(&mut state, dt, rhs);
        for m in state.iter_mut() {
            symmetrize(m);
        }
        guard.check(&state[0], grid.time(k))?;
        for (traj, m) in samples.iter_mut().zip(&state) {
            traj.push(Operator::from_parts(space.clone(), m.clone()));
        }
    }

    let trajectories = samples
        .into_iter()
        .map(|s| Trajectory::new(*grid, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientSet {
        grid: *grid,
        max_order,
        num_channels: nch,
        space,
        indices,
        lookup,
        trajectories,
    })
}

/// `Σ_{|α| ≤ q} D_α r^α / α!` along the grid.
pub fn assemble(coeffs: &CoefficientSet, rates: &RateAssignment, order: usize) -> Result<Trajectory<Operator>> {
    if order > coeffs.max_order {
        return Err(Error::OrderTooLarge {
            requested: order,
            limit: coeffs.max_order,
        });
    }
    if rates.values().len() != 2 * coeffs.num_channels {
        return Err(Error::InvalidParameter(format!(
            "{} rates for {} rate parameters",
            rates.values().len(),
            2 * coeffs.num_channels
        )));
    }
    let d = coeffs.space.dim();
    let mut acc = vec![CMatrix::zeros(d, d); coeffs.grid.len()];
    for (alpha, traj) in coeffs.indices.iter().zip(&coeffs.trajectories) {
        if alpha.total_order() as usize > order {
            continue;
        }
        let w = alpha.monomial(rates.values()) / alpha.factorial();
        if w == 0.0 {
            continue;
        }
        let w = Complex64::new(w, 0.0);
        for (a, dm) in acc.iter_mut().zip(traj.samples()) {
            *a += dm.matrix() * w;
        }
    }
    let samples = acc
        .into_iter()
        .map(|m| Operator::from_parts(coeffs.space.clone(), m))
        .collect();
    Trajectory::new(coeffs.grid, samples)
}

/// Central finite-difference estimate of `D_α` from the exact solver at
/// rates displaced by `±h` around zero. Supports `|α| ∈ {1, 2}`.
pub fn finite_difference_estimate(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    alpha: &MultiIndex,
    h: f64,
) -> Result<Trajectory<Operator>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    if alpha.num_params() != me.num_params() {
        return Err(Error::InvalidParameter(format!(
            "multi-index over {} parameters for {} rate parameters",
            alpha.num_params(),
            me.num_params()
        )));
    }
    let active: Vec<usize> = alpha
        .orders()
        .iter()
        .enumerate()
        .flat_map(|(j, &a)| std::iter::repeat(j).take(a as usize))
        .collect();
    // The stencil differentiates the truncated model itself, so population
    // pumped into the top Fock level by a displaced rate is not an error here.
    let opts = EvolveOptions {
        leakage_threshold: None,
        ..EvolveOptions::default()
    };
    let run = |offsets: &[(usize, f64)]| -> Result<Trajectory<Operator>> {
        let mut v = vec![0.0; me.num_params()];
        for &(j, x) in offsets {
            v[j] += x;
        }
        evolve_with(&me.with_signed_rates(&v), rho0, grid, &opts)
    };
    // (weight, displacements) stencils.
    let stencil: Vec<(f64, Vec<(usize, f64)>)> = match active.as_slice() {
        [j] => vec![
            (0.5 / h, vec![(*j, h)]),
            (-0.5 / h, vec![(*j, -h)]),
        ],
        [j, k] if j == k => vec![
            (1.0 / (h * h), vec![(*j, h)]),
            (-2.0 / (h * h), vec![]),
            (1.0 / (h * h), vec![(*j, -h)]),
        ],
        [j, k] => {
            let w = 0.25 / (h * h);
            vec![
                (w, vec![(*j, h), (*k, h)]),
                (-w, vec![(*j, h), (*k, -h)]),
                (-w, vec![(*j, -h), (*k, h)]),
                (w, vec![(*j, -h), (*k, -h)]),
            ]
        }
        _ => return Err(Error::UnsupportedStencil(alpha.total_order())),
    };
    let d = me.space().dim();
    let mut acc = vec![CMatrix::zeros(d, d); grid.len()];
    for (w, offsets) in &stencil {
        let traj = run(offsets)?;
        let w = Complex64::new(*w, 0.0);
        for (a, r) in acc.iter_mut().zip(traj.samples()) {
            *a += r.matrix() * w;
        }
    }
    let samples = acc
        .into_iter()
        .map(|m| Operator::from_parts(me.space().clone(), m))
        .collect();
    Trajectory::new(*grid, samples)
}

/// `max_t ‖FD_h − D_α‖_max` using an already solved hierarchy.
pub fn finite_difference_deviation(
    coeffs: &CoefficientSet,
    me: &MasterEquation,
    rho0: &DensityMatrix,
    alpha: &MultiIndex,
    h: f64,
) -> Result<f64> {
    let exact = coeffs
        .get(alpha)
        .ok_or_else(|| Error::MissingCoefficient(alpha.to_string()))?;
    let fd = finite_difference_estimate(me, rho0, coeffs.grid(), alpha, h)?;
    Ok(fd.max_deviation(exact))
}

/// `max_t ‖FD_h − D_α‖_max`, solving the hierarchy to order `|α|` first.
pub fn finite_difference_check(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    alpha: &MultiIndex,
    h: f64,
) -> Result<f64> {
    let order = alpha.total_order();
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedStencil(order));
    }
    let coeffs = solve_hierarchy(me, rho0, grid, order as usize)?;
    finite_difference_deviation(&coeffs, me, rho0, alpha, h)
}
