//! Two-level states and the spin observables of the sequential measurement.
//!
//! Basis convention: index 0 is |H>, index 1 is |V>. The final measurement
//! observable `S_HV` is diagonal with |H> -> +1, |V> -> -1; the intermediate
//! observable `S_PM` distinguishes the diagonal polarizations
//! |P> = (|H>+|V>)/sqrt(2) -> +1 and |M> = (|H>-|V>)/sqrt(2) -> -1.
//! Angles are radians everywhere in this crate; degrees exist only at the
//! CLI boundary.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

/// Tolerance for state invariants (trace, hermiticity, positivity).
pub const STATE_TOL: f64 = 1e-12;

/// Dense 2x2 complex matrix. Row-major storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    m: [[Complex64; 2]; 2],
}

impl ComplexMatrix2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    /// Matrix with real entries.
    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self {
            m: [
                [Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
                [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)],
            ],
        }
    }

    pub fn zero() -> Self {
        Self::from_real([[0.0, 0.0], [0.0, 0.0]])
    }

    pub fn identity() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Outer product |a><b| of two kets.
    pub fn outer(a: [Complex64; 2], b: [Complex64; 2]) -> Self {
        let mut m = [[Complex64::ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i] * b[j].conj();
            }
        }
        Self { m }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            m: [
                [self.m[0][0].conj(), self.m[1][0].conj()],
                [self.m[0][1].conj(), self.m[1][1].conj()],
            ],
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let f = Complex64::new(factor, 0.0);
        let mut m = self.m;
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e *= f;
            }
        }
        Self { m }
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending. Uses the closed form
    /// for the 2x2 characteristic polynomial; imaginary parts are dropped,
    /// which is only valid for Hermitian input.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let tr = self.trace().re;
        let det = self.det().re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        [(tr - disc) / 2.0, (tr + disc) / 2.0]
    }

    /// Applies the matrix to a ket.
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

impl Add for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.m;
        for (row, rhs_row) in m.iter_mut().zip(rhs.m.iter()) {
            for (e, r) in row.iter_mut().zip(rhs_row.iter()) {
                *e += *r;
            }
        }
        Self { m }
    }
}

impl Sub for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn sub(self, rhs: Self) -> Self {
        let mut m = self.m;
        for (row, rhs_row) in m.iter_mut().zip(rhs.m.iter()) {
            for (e, r) in row.iter_mut().zip(rhs_row.iter()) {
                *e -= *r;
            }
        }
        Self { m }
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn mul(self, rhs: Self) -> Self {
        let mut m = [[Complex64::ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        Self { m }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("density matrix trace is {trace}, expected 1 within {STATE_TOL}")]
    NotNormalized { trace: f64 },
    #[error("density matrix is not Hermitian within {STATE_TOL}")]
    NotHermitian,
    #[error("density matrix has negative eigenvalue {eigenvalue}")]
    NotPositive { eigenvalue: f64 },
}

/// Density matrix of a two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: ComplexMatrix2,
}

impl QubitState {
    /// Validates trace, hermiticity and positivity before accepting `rho`.
    pub fn from_density(rho: ComplexMatrix2) -> Result<Self, StateError> {
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(StateError::NotNormalized { trace: trace.re });
        }
        if !rho.is_hermitian(STATE_TOL) {
            return Err(StateError::NotHermitian);
        }
        let [lo, _] = rho.hermitian_eigenvalues();
        if lo < -STATE_TOL {
            return Err(StateError::NotPositive { eigenvalue: lo });
        }
        Ok(Self { rho })
    }

    /// Pure state from an (assumed normalized) ket in the HV basis.
    pub fn from_ket(ket: [Complex64; 2]) -> Self {
        Self {
            rho: ComplexMatrix2::outer(ket, ket),
        }
    }

    /// Pure |H> state, the +1 eigenstate of `S_HV`.
    pub fn horizontal() -> Self {
        Self::from_ket([Complex64::new(1.0, 0.0), Complex64::ZERO])
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: ComplexMatrix2::identity().scale(0.5),
        }
    }

    pub fn density(&self) -> &ComplexMatrix2 {
        &self.rho
    }
}

/// Prepares the linear polarization |psi> = cos(phi)|V> + sin(phi)|H>,
/// `phi` measured from the vertical direction.
///
/// The resulting state has `<S_PM> = sin(2 phi)` and `<S_HV> = -cos(2 phi)`.
pub fn prepare_linear_polarization(phi: f64) -> QubitState {
    QubitState::from_ket([
        Complex64::new(phi.sin(), 0.0),
        Complex64::new(phi.cos(), 0.0),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinLabel {
    /// Preparation direction; never measured by the apparatus.
    S1,
    /// Intermediate (diagonal-basis) observable.
    SPm,
    /// Final (HV-basis) observable.
    SHv,
}

/// Hermitian observable with eigenvalues +/-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinObservable {
    matrix: ComplexMatrix2,
    label: SpinLabel,
}

impl SpinObservable {
    /// `S_PM = |P><P| - |M><M|`; sigma_x in the HV basis.
    pub fn pm() -> Self {
        Self {
            matrix: ComplexMatrix2::from_real([[0.0, 1.0], [1.0, 0.0]]),
            label: SpinLabel::SPm,
        }
    }

    /// `S_HV`; sigma_z in the HV basis, |H> -> +1.
    pub fn hv() -> Self {
        Self {
            matrix: ComplexMatrix2::from_real([[1.0, 0.0], [0.0, -1.0]]),
            label: SpinLabel::SHv,
        }
    }

    /// Spin direction whose +1 eigenstate is `prepare_linear_polarization(phi)`:
    /// `sin(2 phi) S_PM - cos(2 phi) S_HV`.
    pub fn preparation_axis(phi: f64) -> Self {
        let (s, c) = ((2.0 * phi).sin(), (2.0 * phi).cos());
        Self {
            matrix: ComplexMatrix2::from_real([[-c, s], [s, c]]),
            label: SpinLabel::S1,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.matrix
    }

    pub fn label(&self) -> SpinLabel {
        self.label
    }

    /// Projectors onto the +1 and -1 eigenspaces, `(I +/- S)/2`.
    pub fn projectors(&self) -> (ComplexMatrix2, ComplexMatrix2) {
        let id = ComplexMatrix2::identity();
        (
            (id + self.matrix).scale(0.5),
            (id - self.matrix).scale(0.5),
        )
    }
}

/// Expectation value `tr(rho S)`, guaranteed real for Hermitian inputs.
pub fn expectation(state: &QubitState, obs: &SpinObservable) -> f64 {
    let product = *state.density() * *obs.matrix();
    debug_assert!(product.trace().im.abs() < STATE_TOL);
    product.trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matrix_product_matches_hand_computed_values() {
        // [1 2i; 3 4] * [0 1; 1-i 2] = [2i+2 1+4i; 4-4i 11]
        let a = ComplexMatrix2::new([[c(1.0, 0.0), c(0.0, 2.0)], [c(3.0, 0.0), c(4.0, 0.0)]]);
        let b = ComplexMatrix2::new([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, -1.0), c(2.0, 0.0)]]);
        let p = a * b;
        assert_eq!(p.entry(0, 0), c(2.0, 2.0));
        assert_eq!(p.entry(0, 1), c(1.0, 4.0));
        assert_eq!(p.entry(1, 0), c(4.0, -4.0));
        assert_eq!(p.entry(1, 1), c(11.0, 0.0));
    }

    #[test]
    fn matrix_sum_and_adjoint() {
        let a = ComplexMatrix2::new([[c(1.0, 1.0), c(0.0, 2.0)], [c(3.0, 0.0), c(0.0, -4.0)]]);
        let s = a + a;
        assert_eq!(s.entry(0, 1), c(0.0, 4.0));
        let adj = a.adjoint();
        assert_eq!(adj.entry(0, 0), c(1.0, -1.0));
        assert_eq!(adj.entry(0, 1), c(3.0, 0.0));
        assert_eq!(adj.entry(1, 0), c(0.0, -2.0));
    }

    #[test]
    fn observables_square_to_identity_and_anticommute() {
        let pm = SpinObservable::pm();
        let hv = SpinObservable::hv();
        let id = ComplexMatrix2::identity();
        assert!((*pm.matrix() * *pm.matrix()).max_abs_diff(&id) < 1e-12);
        assert!((*hv.matrix() * *hv.matrix()).max_abs_diff(&id) < 1e-12);
        let anti = *pm.matrix() * *hv.matrix() + *hv.matrix() * *pm.matrix();
        assert!(anti.max_abs_diff(&ComplexMatrix2::zero()) < 1e-12);
    }

    #[test]
    fn projectors_are_idempotent_and_orthogonal() {
        for obs in [SpinObservable::pm(), SpinObservable::hv()] {
            let (p, m) = obs.projectors();
            assert!((p * p).max_abs_diff(&p) < 1e-12);
            assert!((m * m).max_abs_diff(&m) < 1e-12);
            assert!((p * m).max_abs_diff(&ComplexMatrix2::zero()) < 1e-12);
            assert!((p + m).max_abs_diff(&ComplexMatrix2::identity()) < 1e-12);
        }
    }

    #[test]
    fn vertical_input_is_an_hv_eigenstate() {
        let state = prepare_linear_polarization(0.0);
        assert_abs_diff_eq!(
            expectation(&state, &SpinObservable::hv()),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            expectation(&state, &SpinObservable::pm()),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn diagonal_input_is_a_pm_eigenstate() {
        let state = prepare_linear_polarization(FRAC_PI_4);
        assert_abs_diff_eq!(
            expectation(&state, &SpinObservable::pm()),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            expectation(&state, &SpinObservable::hv()),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn halfway_input_has_symmetric_expectations() {
        let state = prepare_linear_polarization(FRAC_PI_8);
        assert_abs_diff_eq!(
            expectation(&state, &SpinObservable::pm()),
            1.0 / SQRT_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            expectation(&state, &SpinObservable::hv()),
            -1.0 / SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pure_h_is_an_hv_plus_eigenstate() {
        let h = QubitState::from_ket([c(1.0, 0.0), c(0.0, 0.0)]);
        assert_abs_diff_eq!(expectation(&h, &SpinObservable::hv()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixed_state_has_vanishing_expectations() {
        let mixed = QubitState::maximally_mixed();
        for obs in [
            SpinObservable::pm(),
            SpinObservable::hv(),
            SpinObservable::preparation_axis(0.3),
        ] {
            assert_abs_diff_eq!(expectation(&mixed, &obs), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn preparation_axis_certifies_its_own_state() {
        for k in 0..16 {
            let phi = k as f64 * 0.13;
            let state = prepare_linear_polarization(phi);
            let axis = SpinObservable::preparation_axis(phi);
            assert_abs_diff_eq!(expectation(&state, &axis), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_polarizations_lie_on_the_bloch_circle() {
        for k in 0..64 {
            let phi = k as f64 * 0.1 - 3.0;
            let state = prepare_linear_polarization(phi);
            let pm = expectation(&state, &SpinObservable::pm());
            let hv = expectation(&state, &SpinObservable::hv());
            assert_abs_diff_eq!(pm * pm + hv * hv, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn from_density_enforces_invariants() {
        let bad_trace = ComplexMatrix2::from_real([[0.7, 0.0], [0.0, 0.7]]);
        assert!(matches!(
            QubitState::from_density(bad_trace),
            Err(StateError::NotNormalized { .. })
        ));
        let not_hermitian = ComplexMatrix2::new([
            [c(0.5, 0.0), c(0.1, 0.2)],
            [c(0.1, 0.2), c(0.5, 0.0)],
        ]);
        assert!(matches!(
            QubitState::from_density(not_hermitian),
            Err(StateError::NotHermitian)
        ));
        let not_positive = ComplexMatrix2::from_real([[1.2, 0.0], [0.0, -0.2]]);
        assert!(matches!(
            QubitState::from_density(not_positive),
            Err(StateError::NotPositive { .. })
        ));
        let pure = prepare_linear_polarization(0.4);
        assert!(QubitState::from_density(*pure.density()).is_ok());
    }
}
