//! Ready-made master equations and their closed-form companions.

pub mod cavity;
pub mod dicke;
pub mod jaynes_cummings;
pub mod two_level;

use num_complex::Complex64;

use crate::error::Result;
use crate::operator::{embed, qubit_ops, HilbertSpace, Operator};

/// `A = λ⁺σ⁺ + λ⁻σ⁻ + λᶻσz` on the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomObservable {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub lambda_z: f64,
}

impl AtomObservable {
    pub fn new(lambda_plus: Complex64, lambda_minus: Complex64, lambda_z: f64) -> Self {
        Self {
            lambda_plus,
            lambda_minus,
            lambda_z,
        }
    }

    pub fn sigma_x() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.0)
    }

    /// `σy = −iσ⁺ + iσ⁻`.
    pub fn sigma_y() -> Self {
        Self::new(Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), 0.0)
    }

    pub fn sigma_z() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 1.0)
    }

    pub fn is_hermitian(&self) -> bool {
        (self.lambda_minus - self.lambda_plus.conj()).norm() <= 1e-12
    }

    /// The operator on a single qubit.
    pub fn qubit_operator(&self) -> Operator {
        let q = qubit_ops();
        &(&q.sigma_plus.scale(self.lambda_plus) + &q.sigma_minus.scale(self.lambda_minus))
            + &q.sigma_z.scale_real(self.lambda_z)
    }

    /// The operator at qubit `slot` of `space`.
    pub fn operator(&self, space: &HilbertSpace, slot: usize) -> Result<Operator> {
        embed(&self.qubit_operator(), slot, space)
    }

    /// `B = −4λ⁺σ⁺ − 4λ⁻σ⁻`, the printed form of the atomic source operator
    /// in the γ-expansion of atom averages.
    pub fn printed_source(&self) -> AtomObservable {
        Self::new(self.lambda_plus * -4.0, self.lambda_minus * -4.0, 0.0)
    }
}
