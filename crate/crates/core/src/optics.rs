//! Exact 2x2 transfer matrices for the two-port interferometer elements.
//!
//! Field vectors are column vectors `[a; b]` and a chain of elements acting
//! in propagation order `e1, e2, ..., en` is the matrix product
//! `M_n ... M_2 M_1`.
//!
//! Beam splitters follow the symmetric lossless convention in which the
//! reflected field leads the transmitted one by `π/2`:
//!
//! ```text
//! BS(R) = [[ √(1-R), i√R ],
//!          [ i√R, √(1-R) ]]
//! ```
//!
//! With that convention `BS · diag(1, e^{iψ}) · BS` is exactly the `[MZI]+`
//! block of the ring and `BS · diag(e^{iψ}, 1) · BS` is `[MZI]-` including
//! its `e^{iψ}` prefactor.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Complex field amplitude (dimensionless).
pub type ComplexAmp = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// An optical phase in radians. Periodicity is left to the trig functions.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phase(f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    pub const fn new(radians: f64) -> Self {
        Phase(radians)
    }

    pub const fn radians(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    fn checked(self, what: &'static str) -> Result<f64> {
        ensure_finite(what, self.0)
    }
}

impl From<f64> for Phase {
    fn from(radians: f64) -> Self {
        Phase(radians)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

/// Amplitudes on the two ports; `a` feeds detector D1, `b` feeds D2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub a: ComplexAmp,
    pub b: ComplexAmp,
}

impl FieldPair {
    pub const fn new(a: ComplexAmp, b: ComplexAmp) -> Self {
        FieldPair { a, b }
    }

    /// The laser input `[E0; 0]`.
    pub fn input(e0: f64) -> Self {
        FieldPair::new(Complex64::new(e0, 0.0), ZERO)
    }

    /// Total power `|a|² + |b|²`.
    pub fn power(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn intensities(&self) -> (f64, f64) {
        (self.a.norm_sqr(), self.b.norm_sqr())
    }

    pub fn scale(&self, s: ComplexAmp) -> Self {
        FieldPair::new(self.a * s, self.b * s)
    }

    pub fn max_abs_diff(&self, other: &FieldPair) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

impl std::ops::Add for FieldPair {
    type Output = FieldPair;

    fn add(self, rhs: FieldPair) -> FieldPair {
        FieldPair::new(self.a + rhs.a, self.b + rhs.b)
    }
}

/// A 2x2 complex transfer matrix `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m00: ComplexAmp,
    pub m01: ComplexAmp,
    pub m10: ComplexAmp,
    pub m11: ComplexAmp,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix::new(ONE, ZERO, ZERO, ONE);

    pub const fn new(m00: ComplexAmp, m01: ComplexAmp, m10: ComplexAmp, m11: ComplexAmp) -> Self {
        TransferMatrix { m00, m01, m10, m11 }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn diagonal(d0: ComplexAmp, d1: ComplexAmp) -> Self {
        TransferMatrix::new(d0, ZERO, ZERO, d1)
    }

    /// Real rotation `[[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        TransferMatrix::new(
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        )
    }

    pub fn scaled(&self, s: ComplexAmp) -> Self {
        TransferMatrix::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        TransferMatrix::new(
            self.m00.conj(),
            self.m10.conj(),
            self.m01.conj(),
            self.m11.conj(),
        )
    }

    pub fn determinant(&self) -> ComplexAmp {
        self.m00 * self.m11 - self.m01 * self.m10
    }

    pub fn apply(&self, fields: FieldPair) -> FieldPair {
        FieldPair::new(
            self.m00 * fields.a + self.m01 * fields.b,
            self.m10 * fields.a + self.m11 * fields.b,
        )
    }

    /// `m`-th power by repeated squaring.
    pub fn pow(&self, mut m: u32) -> Self {
        let mut base = *self;
        let mut acc = Self::IDENTITY;
        while m > 0 {
            if m & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            m >>= 1;
        }
        acc
    }

    pub fn entries(&self) -> [ComplexAmp; 4] {
        [self.m00, self.m01, self.m10, self.m11]
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise deviation of `M†M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::IDENTITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix::new(
            self.m00 * rhs.m00 + self.m01 * rhs.m10,
            self.m00 * rhs.m01 + self.m01 * rhs.m11,
            self.m10 * rhs.m00 + self.m11 * rhs.m10,
            self.m10 * rhs.m01 + self.m11 * rhs.m11,
        )
    }
}

impl Mul<FieldPair> for TransferMatrix {
    type Output = FieldPair;

    fn mul(self, rhs: FieldPair) -> FieldPair {
        self.apply(rhs)
    }
}

impl fmt::Display for TransferMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |z: Complex64| format!("{:+.12} {:+.12}i", z.re, z.im);
        writeln!(f, "[ {}   {} ]", cell(self.m00), cell(self.m01))?;
        write!(f, "[ {}   {} ]", cell(self.m10), cell(self.m11))
    }
}

/// Which arm(s) of a two-path section carry a phase shifter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Upper,
    Lower,
    Both,
}

impl Arm {
    pub fn keyword(self) -> &'static str {
        match self {
            Arm::Upper => "upper",
            Arm::Lower => "lower",
            Arm::Both => "both",
        }
    }
}

/// The two asymmetric interferometers seen by counter-propagating light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MziSign {
    Plus,
    Minus,
}

/// Lossless beam splitter with power reflectance `r_power`.
pub fn bs_matrix(r_power: f64) -> Result<TransferMatrix> {
    ensure_finite("beam splitter reflectance", r_power)?;
    if !(0.0..=1.0).contains(&r_power) {
        return Err(Error::domain(
            "beam splitter reflectance",
            format!("{r_power} not in [0, 1]"),
        ));
    }
    let t = Complex64::new((1.0 - r_power).sqrt(), 0.0);
    let r = I * r_power.sqrt();
    Ok(TransferMatrix::new(t, r, r, t))
}

pub fn phase_matrix(arm: Arm, theta: Phase) -> Result<TransferMatrix> {
    let theta = theta.checked("phase")?;
    let e = Complex64::cis(theta);
    Ok(match arm {
        Arm::Upper => TransferMatrix::diagonal(e, ONE),
        Arm::Lower => TransferMatrix::diagonal(ONE, e),
        Arm::Both => TransferMatrix::diagonal(e, e),
    })
}

/// One balanced MZI with the Sagnac phase `ψ` on one arm and the common-mode
/// cavity phase `ζ` on both.
///
/// `Plus` puts `ψ` on the lower arm, `Minus` on the upper arm; `ζ` is a
/// global factor `e^{iζ}` and never changes intensities.
pub fn mzi_block(sign: MziSign, psi: Phase, zeta: Phase) -> Result<TransferMatrix> {
    psi.checked("psi")?;
    zeta.checked("zeta")?;
    let bs = bs_matrix(0.5)?;
    let arm = match sign {
        MziSign::Plus => Arm::Lower,
        MziSign::Minus => Arm::Upper,
    };
    let inner = bs * phase_matrix(arm, psi)? * bs;
    Ok(phase_matrix(Arm::Both, zeta)? * inner)
}

/// One round trip `[MZI]+ [φ] [MZI]-`, with `φ` applied to both arms.
pub fn ring_product(psi: Phase, phi: Phase, zeta: Phase) -> Result<TransferMatrix> {
    Ok(mzi_block(MziSign::Plus, psi, zeta)?
        * phase_matrix(Arm::Both, phi)?
        * mzi_block(MziSign::Minus, psi, zeta)?)
}

/// Closed-form order-`m` CBW matrix `(-1)^m g(m) R(mψ)` with `R` the real
/// rotation and `g(m) = e^{imψ}` when `include_global_phase` is set.
pub fn cbw_order_matrix(psi: Phase, m: u32, include_global_phase: bool) -> Result<TransferMatrix> {
    let psi = psi.checked("psi")?;
    if m == 0 {
        return Err(Error::domain("CBW order", "m must be at least 1"));
    }
    let angle = f64::from(m) * psi;
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    let mut prefactor = Complex64::new(sign, 0.0);
    if include_global_phase {
        prefactor *= Complex64::cis(angle);
    }
    Ok(TransferMatrix::rotation(angle).scaled(prefactor))
}

pub fn apply(matrix: &TransferMatrix, fields: FieldPair) -> FieldPair {
    matrix.apply(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: &TransferMatrix, b: &TransferMatrix, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "matrices differ by {d:e}\n{a}\n{b}");
    }

    #[test]
    fn beam_splitter_examples() {
        let s = FRAC_1_SQRT_2;
        assert_close(
            &bs_matrix(0.5).unwrap(),
            &TransferMatrix::new(c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)),
            1e-15,
        );
        assert_eq!(bs_matrix(0.0).unwrap(), TransferMatrix::IDENTITY);
        assert_close(
            &bs_matrix(1.0).unwrap(),
            &TransferMatrix::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)),
            0.0,
        );
    }

    #[test]
    fn beam_splitter_rejects_out_of_range() {
        assert!(matches!(bs_matrix(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(bs_matrix(1.5), Err(Error::Domain { .. })));
        assert!(matches!(bs_matrix(f64::NAN), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn phase_examples() {
        assert_close(
            &phase_matrix(Arm::Lower, Phase::new(PI)).unwrap(),
            &TransferMatrix::diagonal(c(1.0, 0.0), c(-1.0, 0.0)),
            1e-15,
        );
        assert_eq!(
            phase_matrix(Arm::Both, Phase::ZERO).unwrap(),
            TransferMatrix::IDENTITY
        );
        assert_close(
            &phase_matrix(Arm::Upper, Phase::new(FRAC_PI_2)).unwrap(),
            &TransferMatrix::diagonal(c(0.0, 1.0), c(1.0, 0.0)),
            1e-15,
        );
        assert!(phase_matrix(Arm::Upper, Phase::new(f64::INFINITY)).is_err());
    }

    // The printed [MZI]± matrices, written out entry by entry.
    fn printed_mzi_plus(psi: f64) -> TransferMatrix {
        let e = Complex64::cis(psi);
        TransferMatrix::new(
            (1.0 - e) * 0.5,
            I * (1.0 + e) * 0.5,
            I * (1.0 + e) * 0.5,
            -(1.0 - e) * 0.5,
        )
    }

    fn printed_mzi_minus(psi: f64) -> TransferMatrix {
        let e = Complex64::cis(psi);
        let em = Complex64::cis(-psi);
        TransferMatrix::new(1.0 - em, I * (1.0 + em), I * (1.0 + em), -(1.0 - em)).scaled(e * 0.5)
    }

    #[test]
    fn mzi_examples() {
        assert_close(
            &mzi_block(MziSign::Plus, Phase::ZERO, Phase::ZERO).unwrap(),
            &TransferMatrix::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)),
            1e-15,
        );
        let expected = TransferMatrix::new(c(-1.0, 1.0), c(-1.0, 1.0), c(-1.0, 1.0), c(1.0, -1.0))
            .scaled(c(0.5, 0.0));
        assert_close(
            &mzi_block(MziSign::Minus, Phase::new(FRAC_PI_2), Phase::ZERO).unwrap(),
            &expected,
            1e-15,
        );
    }

    #[test]
    fn mzi_blocks_match_printed_forms() {
        for k in 0..=64 {
            let psi = -2.0 * PI + f64::from(k) * PI / 16.0;
            let p = Phase::new(psi);
            assert_close(
                &mzi_block(MziSign::Plus, p, Phase::ZERO).unwrap(),
                &printed_mzi_plus(psi),
                1e-15,
            );
            assert_close(
                &mzi_block(MziSign::Minus, p, Phase::ZERO).unwrap(),
                &printed_mzi_minus(psi),
                1e-15,
            );
        }
    }

    #[test]
    fn mzi_pair_at_zero_sagnac_phase_returns_minus_input() {
        for zeta in [0.0, 0.3, FRAC_PI_2, PI, 3.0 * PI] {
            let z = Phase::new(zeta);
            let pair = mzi_block(MziSign::Plus, Phase::ZERO, z).unwrap()
                * mzi_block(MziSign::Minus, Phase::ZERO, z).unwrap();
            let out = pair.apply(FieldPair::input(1.0));
            let expected = FieldPair::new(-Complex64::cis(2.0 * zeta), c(0.0, 0.0));
            assert!(out.max_abs_diff(&expected) < 1e-15, "zeta={zeta}: {out:?}");
        }
    }

    #[test]
    fn cbw_order_examples() {
        assert_close(
            &cbw_order_matrix(Phase::new(FRAC_PI_2), 2, true).unwrap(),
            &TransferMatrix::IDENTITY,
            1e-15,
        );
        let out = cbw_order_matrix(Phase::new(FRAC_PI_3), 3, true)
            .unwrap()
            .apply(FieldPair::input(1.0));
        assert!(out.max_abs_diff(&FieldPair::input(-1.0)) < 1e-15);
        assert!(matches!(
            cbw_order_matrix(Phase::new(0.1), 0, true),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn order_one_at_pi_flips_the_input() {
        // -e^{iπ} cos π = -1: the order-1 block is diag(-1, -1) at ψ = π.
        let m = cbw_order_matrix(Phase::new(PI), 1, true).unwrap();
        let out = apply(&m, FieldPair::input(1.0));
        assert!(out.max_abs_diff(&FieldPair::input(-1.0)) < 1e-15);
        let direct = ring_product(Phase::new(PI), Phase::ZERO, Phase::ZERO).unwrap();
        assert_close(&m, &direct, 1e-15);
    }

    #[test]
    fn apply_examples() {
        let id = TransferMatrix::IDENTITY.apply(FieldPair::input(1.0));
        assert_eq!(id, FieldPair::input(1.0));
        let out = bs_matrix(0.5).unwrap().apply(FieldPair::input(1.0));
        let s = FRAC_1_SQRT_2;
        assert!(out.max_abs_diff(&FieldPair::new(c(s, 0.0), c(0.0, s))) < 1e-15);
    }

    #[test]
    fn order_one_matches_mzi_product_on_random_psi() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let psi = Phase::new(rng.gen_range(-10.0..10.0));
            let closed = cbw_order_matrix(psi, 1, true).unwrap();
            let built = ring_product(psi, Phase::ZERO, Phase::ZERO).unwrap();
            assert_close(&closed, &built, 1e-12);
        }
    }

    #[test]
    fn quantization_nulls() {
        for m in 1..=100u32 {
            for k in -(m as i32)..=(m as i32) {
                let psi = f64::from(k) * PI / f64::from(m);
                let out = cbw_order_matrix(Phase::new(psi), m, true)
                    .unwrap()
                    .apply(FieldPair::input(1.0));
                assert!(out.b.norm() < 1e-12, "m={m} k={k}: {}", out.b.norm());
            }
        }
    }

    #[test]
    fn pow_matches_rotation_composition() {
        let psi = 0.123_456_7;
        let r = TransferMatrix::rotation(psi);
        for m in [1u32, 2, 7, 100, 5000] {
            assert_close(
                &r.pow(m),
                &TransferMatrix::rotation(f64::from(m) * psi),
                1e-9,
            );
        }
    }

    proptest! {
        #[test]
        fn element_matrices_are_unitary(
            r in 0.0f64..=1.0,
            theta in -50.0f64..50.0,
            zeta in -50.0f64..50.0,
            m in 1u32..5000,
            flag in any::<bool>(),
        ) {
            let th = Phase::new(theta);
            prop_assert!(bs_matrix(r).unwrap().is_unitary(1e-12));
            for arm in [Arm::Upper, Arm::Lower, Arm::Both] {
                prop_assert!(phase_matrix(arm, th).unwrap().is_unitary(1e-12));
            }
            for sign in [MziSign::Plus, MziSign::Minus] {
                prop_assert!(mzi_block(sign, th, Phase::new(zeta)).unwrap().is_unitary(1e-12));
            }
            prop_assert!(cbw_order_matrix(th, m, flag).unwrap().is_unitary(1e-12));
        }

        #[test]
        fn round_trip_conserves_energy(psi in -50.0f64..50.0, e0 in 0.01f64..100.0) {
            let out = ring_product(Phase::new(psi), Phase::ZERO, Phase::ZERO)
                .unwrap()
                .apply(FieldPair::input(e0));
            let rel = (out.power() - e0 * e0).abs() / (e0 * e0);
            prop_assert!(rel < 1e-12);
        }

        #[test]
        fn order_matrix_without_global_phase_is_signed_rotation(psi in -10.0f64..10.0, m in 1u32..5000) {
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            let expected = TransferMatrix::rotation(f64::from(m) * psi).scaled(c(sign, 0.0));
            let got = cbw_order_matrix(Phase::new(psi), m, false).unwrap();
            prop_assert!(got.max_abs_diff(&expected) == 0.0);
        }
    }
}
