//! Classical fixed-step RK4 over a block of complex matrices.
//!
//! The exact solver integrates a block of one matrix; the coefficient
//! hierarchy integrates all of its coefficients jointly with the same step.

use num_complex::Complex64;

use crate::operator::CMatrix;

fn shifted(state: &[CMatrix], slope: &[CMatrix], h: f64) -> Vec<CMatrix> {
    let h = Complex64::new(h, 0.0);
    state.iter().zip(slope).map(|(y, k)| y + k * h).collect()
}

pub(crate) fn rk4_step<F>(state: &mut [CMatrix], dt: f64, rhs: F)
where
    F: Fn(&[CMatrix]) -> Vec<CMatrix>,
{
    let k1 = rhs(state);
    let k2 = rhs(&shifted(state, &k1, 0.5 * dt));
    let k3 = rhs(&shifted(state, &k2, 0.5 * dt));
    let k4 = rhs(&shifted(state, &k3, dt));
    let w = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for (i, y) in state.iter_mut().enumerate() {
        let incr = &k1[i] + &k2[i] * two + &k3[i] * two + &k4[i];
        *y += incr * w;
    }
}
