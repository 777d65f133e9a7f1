//! Dense complex linear algebra for one-, two-, and three-qubit objects.
//!
//! The basis convention is fixed once for the whole crate: a three-qubit
//! basis label `|q_A q_B q_C>` maps to the index `4*q_A + 2*q_B + q_C`, i.e.
//! lexicographic order with qubit A in the most significant position. All
//! modules and file formats share it.
//!
//! Global phase is never canonicalized: state comparisons go through
//! [`fidelity_up_to_phase`], since measurement corrections fix states only up
//! to a global phase.

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{ALGEBRAIC_TOL, COMPLETENESS_TOL};
use crate::entangle::CanonicalCoefficients;
use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// One of the three parties holding a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    /// Bit position of this party in the basis index (A most significant).
    pub(crate) fn bit(self) -> usize {
        match self {
            Party::A => 2,
            Party::B => 1,
            Party::C => 0,
        }
    }

    /// The two parties other than `self`, in A < B < C order.
    pub fn others(self) -> (Party, Party) {
        match self {
            Party::A => (Party::B, Party::C),
            Party::B => (Party::A, Party::C),
            Party::C => (Party::A, Party::B),
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Party::A => write!(f, "A"),
            Party::B => write!(f, "B"),
            Party::C => write!(f, "C"),
        }
    }
}

/// Branch index of a two-outcome measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    First,
    Second,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::First, Branch::Second];

    /// 1-based label, matching the `k = 1, 2` outcome convention.
    pub fn label(self) -> u8 {
        match self {
            Branch::First => 1,
            Branch::Second => 2,
        }
    }
}

fn finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Pure three-qubit state: eight amplitudes indexed by `|q_A q_B q_C>`.
///
/// The public constructor rejects non-finite amplitudes and the zero vector.
/// Measurement application can legitimately annihilate a state, so internal
/// construction through [`apply_local`] only enforces finiteness.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amp: [Complex; 8],
}

impl StateVector {
    pub fn new(amp: [Complex; 8]) -> Result<Self> {
        if amp.iter().any(|&z| !finite(z)) {
            return Err(Error::InvalidCoefficients(
                "state vector has non-finite amplitudes".into(),
            ));
        }
        let s = Self { amp };
        if s.norm_sqr() <= 0.0 {
            return Err(Error::InvalidCoefficients(
                "state vector has zero norm".into(),
            ));
        }
        Ok(s)
    }

    pub(crate) fn from_amplitudes_unchecked(amp: [Complex; 8]) -> Self {
        debug_assert!(amp.iter().all(|&z| finite(z)));
        Self { amp }
    }

    /// Computational basis state `|index>`.
    pub fn basis(index: usize) -> Self {
        assert!(index < 8, "basis index out of range");
        let mut amp = [ZERO; 8];
        amp[index] = ONE;
        Self { amp }
    }

    /// `(|000> + |111>)/sqrt(2)`.
    pub fn standard_ghz() -> Self {
        let h = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amp = [ZERO; 8];
        amp[0] = h;
        amp[7] = h;
        Self { amp }
    }

    /// `(|001> + |010> + |100>)/sqrt(3)`.
    pub fn standard_w() -> Self {
        let t = Complex::new(1.0 / 3f64.sqrt(), 0.0);
        let mut amp = [ZERO; 8];
        amp[1] = t;
        amp[2] = t;
        amp[4] = t;
        Self { amp }
    }

    pub fn amplitudes(&self) -> &[Complex; 8] {
        &self.amp
    }

    pub fn amplitude(&self, index: usize) -> Complex {
        self.amp[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Returns `self / ||self||`. Panics on the zero vector.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize a zero state");
        self.scaled(Complex::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, z: Complex) -> Self {
        let mut amp = self.amp;
        for a in &mut amp {
            *a *= z;
        }
        Self { amp }
    }

    /// `alpha * self + beta * other`, unnormalized.
    pub fn superpose(&self, alpha: Complex, other: &Self, beta: Complex) -> Self {
        let mut amp = [ZERO; 8];
        for (i, a) in amp.iter_mut().enumerate() {
            *a = alpha * self.amp[i] + beta * other.amp[i];
        }
        Self { amp }
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex {
        self.amp
            .iter()
            .zip(other.amp.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Single-party 2x2 operator tagged with the party it acts on.
///
/// Entries must be finite; there is no normalization requirement, since
/// measurement operators are generally non-unitary contractions. The matrix
/// is row-major: `m[r][c] = <r|M|c>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    party: Party,
    m: [[Complex; 2]; 2],
}

impl LocalOperator {
    pub fn new(party: Party, m: [[Complex; 2]; 2]) -> Result<Self> {
        if m.iter().flatten().any(|&z| !finite(z)) {
            return Err(Error::InvalidOperator(
                "operator has non-finite entries".into(),
            ));
        }
        Ok(Self { party, m })
    }

    pub fn from_real(party: Party, m: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(
            party,
            [
                [Complex::new(m[0][0], 0.0), Complex::new(m[0][1], 0.0)],
                [Complex::new(m[1][0], 0.0), Complex::new(m[1][1], 0.0)],
            ],
        )
    }

    pub fn identity(party: Party) -> Self {
        Self {
            party,
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn pauli_x(party: Party) -> Self {
        Self {
            party,
            m: [[ZERO, ONE], [ONE, ZERO]],
        }
    }

    pub fn pauli_y(party: Party) -> Self {
        Self {
            party,
            m: [
                [ZERO, Complex::new(0.0, -1.0)],
                [Complex::new(0.0, 1.0), ZERO],
            ],
        }
    }

    pub fn pauli_z(party: Party) -> Self {
        Self {
            party,
            m: [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn matrix(&self) -> &[[Complex; 2]; 2] {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            party: self.party,
            m: [
                [self.m[0][0].conj(), self.m[1][0].conj()],
                [self.m[0][1].conj(), self.m[1][1].conj()],
            ],
        }
    }

    pub fn scaled(&self, z: Complex) -> Self {
        let mut m = self.m;
        for row in &mut m {
            for e in row {
                *e *= z;
            }
        }
        Self {
            party: self.party,
            m,
        }
    }

    /// Matrix product `self * other`; both must act on the same party.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.party != other.party {
            return Err(Error::InvalidOperator(
                "cannot compose operators on different parties".into(),
            ));
        }
        let a = &self.m;
        let b = &other.m;
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Ok(Self {
            party: self.party,
            m,
        })
    }

    /// Max-norm of `M†M - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let mtm = gram(self);
        let mut defect: f64 = 0.0;
        for (r, row) in mtm.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                let expect = if r == c { ONE } else { ZERO };
                defect = defect.max((e - expect).norm());
            }
        }
        defect
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

/// `M†M` as a raw 2x2 array.
fn gram(op: &LocalOperator) -> [[Complex; 2]; 2] {
    let m = &op.m;
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = m[0][r].conj() * m[0][c] + m[1][r].conj() * m[1][c];
        }
    }
    out
}

/// Two-outcome generalized measurement `{M1, M2}` on a single party.
///
/// A pair is complete when `M1†M1 + M2†M2 = I`; completeness is checked by
/// [`povm_complete`], not enforced at construction, so deliberately corrupted
/// pairs can still be executed and diagnosed.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPair {
    m1: LocalOperator,
    m2: LocalOperator,
    label: String,
}

impl MeasurementPair {
    pub fn new(m1: LocalOperator, m2: LocalOperator, label: impl Into<String>) -> Result<Self> {
        if m1.party() != m2.party() {
            return Err(Error::InvalidOperator(
                "measurement pair must act on a single party".into(),
            ));
        }
        Ok(Self {
            m1,
            m2,
            label: label.into(),
        })
    }

    pub fn party(&self) -> Party {
        self.m1.party()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn first(&self) -> &LocalOperator {
        &self.m1
    }

    pub fn second(&self) -> &LocalOperator {
        &self.m2
    }

    pub fn operator(&self, branch: Branch) -> &LocalOperator {
        match branch {
            Branch::First => &self.m1,
            Branch::Second => &self.m2,
        }
    }

    /// Max-norm of `M1†M1 + M2†M2 - I`.
    pub fn completeness_defect(&self) -> f64 {
        let g1 = gram(&self.m1);
        let g2 = gram(&self.m2);
        let mut defect: f64 = 0.0;
        for (r, row) in g1.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                let expect = if r == c { ONE } else { ZERO };
                defect = defect.max((e + g2[r][c] - expect).norm());
            }
        }
        defect
    }

    pub fn is_complete(&self, tol: f64) -> bool {
        self.completeness_defect() <= tol
    }
}

/// True iff the pair satisfies the completeness relation within the default
/// tolerance.
pub fn povm_complete(pair: &MeasurementPair) -> bool {
    pair.is_complete(COMPLETENESS_TOL)
}

/// Per-party local unitaries restoring a measurement branch to the reference
/// output. Each factor must be unitary within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct LuCorrection {
    u_a: LocalOperator,
    u_b: LocalOperator,
    u_c: LocalOperator,
}

impl LuCorrection {
    pub fn new(u_a: LocalOperator, u_b: LocalOperator, u_c: LocalOperator) -> Result<Self> {
        if u_a.party() != Party::A || u_b.party() != Party::B || u_c.party() != Party::C {
            return Err(Error::InvalidOperator(
                "correction factors must act on parties A, B, C in order".into(),
            ));
        }
        for u in [&u_a, &u_b, &u_c] {
            if !u.is_unitary(ALGEBRAIC_TOL) {
                return Err(Error::InvalidOperator(format!(
                    "correction on party {} is not unitary (defect {:.3e})",
                    u.party(),
                    u.unitarity_defect()
                )));
            }
        }
        Ok(Self { u_a, u_b, u_c })
    }

    pub fn identity() -> Self {
        Self {
            u_a: LocalOperator::identity(Party::A),
            u_b: LocalOperator::identity(Party::B),
            u_c: LocalOperator::identity(Party::C),
        }
    }

    pub fn factor(&self, party: Party) -> &LocalOperator {
        match party {
            Party::A => &self.u_a,
            Party::B => &self.u_b,
            Party::C => &self.u_c,
        }
    }

    /// `(U_A ⊗ U_B ⊗ U_C) |s>`.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        let mut out = apply_local(&self.u_a, s);
        out = apply_local(&self.u_b, &out);
        apply_local(&self.u_c, &out)
    }
}

/// Reduced density matrix of one qubit (2x2) or a qubit pair (4x4).
///
/// Constructors enforce hermiticity and unit trace within `1e-12` and
/// eigenvalues at or above `-1e-10`. For a kept pair the 4-dimensional basis
/// is `|q_p q_q>` with the lower-ordered party most significant.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityMatrix {
    Qubit(Matrix2<Complex>),
    TwoQubit(Matrix4<Complex>),
}

impl DensityMatrix {
    pub fn qubit(m: Matrix2<Complex>) -> Result<Self> {
        let d = Self::Qubit(m);
        d.validate()?;
        Ok(d)
    }

    pub fn two_qubit(m: Matrix4<Complex>) -> Result<Self> {
        let d = Self::TwoQubit(m);
        d.validate()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Qubit(_) => 2,
            Self::TwoQubit(_) => 4,
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex {
        match self {
            Self::Qubit(m) => m[(r, c)],
            Self::TwoQubit(m) => m[(r, c)],
        }
    }

    pub fn trace(&self) -> Complex {
        match self {
            Self::Qubit(m) => m.trace(),
            Self::TwoQubit(m) => m.trace(),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                defect = defect.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        defect
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            Self::Qubit(m) => {
                let tr = m.trace().re;
                let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
                let mid = tr / 2.0;
                let disc = (mid * mid - det).max(0.0).sqrt();
                vec![mid - disc, mid + disc]
            }
            Self::TwoQubit(m) => {
                let mut ev: Vec<f64> = m
                    .clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .copied()
                    .collect();
                ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ev
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} deviates from 1"
            )));
        }
        let min = self
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// Builds the canonical-form state
/// `l0|000> + l1 e^{i phi}|100> + l2|101> + l3|110> + l4|111>`.
///
/// The output is renormalized, so the `1e-9` slack allowed on the coefficient
/// normalization never leaks into the state norm.
pub fn state_from_canonical(c: &CanonicalCoefficients) -> StateVector {
    let l = c.lambda();
    let mut amp = [ZERO; 8];
    amp[0] = Complex::new(l[0], 0.0);
    amp[4] = Complex::from_polar(l[1], c.phi());
    amp[5] = Complex::new(l[2], 0.0);
    amp[6] = Complex::new(l[3], 0.0);
    amp[7] = Complex::new(l[4], 0.0);
    StateVector::from_amplitudes_unchecked(amp).normalized()
}

/// Applies `op` to its party's tensor factor: `(I ⊗ ... M ... ⊗ I)|s>`.
///
/// Linear in `s`; the result is generally unnormalized, and its squared norm
/// is the branch probability when `s` is normalized. A measurement operator
/// may annihilate the state, so the result can be the zero vector.
pub fn apply_local(op: &LocalOperator, s: &StateVector) -> StateVector {
    let bit = 1usize << op.party().bit();
    let m = op.matrix();
    let mut amp = [ZERO; 8];
    for i0 in 0..8usize {
        if i0 & bit != 0 {
            continue;
        }
        let i1 = i0 | bit;
        amp[i0] = m[0][0] * s.amp[i0] + m[0][1] * s.amp[i1];
        amp[i1] = m[1][0] * s.amp[i0] + m[1][1] * s.amp[i1];
    }
    StateVector::from_amplitudes_unchecked(amp)
}

/// Branch probability `<s|M†M|s> = ||(M ⊗ I ⊗ I)|s>||²` for normalized `s`.
pub fn branch_probability(op: &LocalOperator, s: &StateVector) -> f64 {
    apply_local(op, s).norm_sqr()
}

/// `|<a|b>|`; the value is 1 within `1e-9` exactly when the states are equal
/// up to a global phase.
pub fn fidelity_up_to_phase(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm()
}

/// Partial trace over the complement of `keep`.
///
/// `keep` must name one or two distinct parties; anything else is a
/// "nothing traced" error.
pub fn reduced_density(s: &StateVector, keep: &[Party]) -> Result<DensityMatrix> {
    let mut kept: Vec<Party> = keep.to_vec();
    kept.sort();
    kept.dedup();
    match kept.as_slice() {
        [p] => {
            let pb = p.bit();
            let (o1, o2) = p.others();
            let (b1, b2) = (o1.bit(), o2.bit());
            let mut m = Matrix2::zeros();
            for r in 0..2 {
                for c in 0..2 {
                    let mut acc = ZERO;
                    for t in 0..4 {
                        let (t1, t2) = (t >> 1, t & 1);
                        let i = (r << pb) | (t1 << b1) | (t2 << b2);
                        let j = (c << pb) | (t1 << b1) | (t2 << b2);
                        acc += s.amp[i] * s.amp[j].conj();
                    }
                    m[(r, c)] = acc;
                }
            }
            hermitize2(&mut m);
            DensityMatrix::qubit(m)
        }
        [p, q] => {
            // p < q after sorting; p supplies the most significant pair bit.
            let (pb, qb) = (p.bit(), q.bit());
            let tb = Party::ALL
                .into_iter()
                .find(|x| x != p && x != q)
                .expect("one party traced")
                .bit();
            let mut m = Matrix4::zeros();
            for r in 0..4 {
                for c in 0..4 {
                    let mut acc = ZERO;
                    for t in 0..2 {
                        let i = ((r >> 1) << pb) | ((r & 1) << qb) | (t << tb);
                        let j = ((c >> 1) << pb) | ((c & 1) << qb) | (t << tb);
                        acc += s.amp[i] * s.amp[j].conj();
                    }
                    m[(r, c)] = acc;
                }
            }
            hermitize4(&mut m);
            DensityMatrix::two_qubit(m)
        }
        _ => Err(Error::NothingTraced),
    }
}

fn hermitize2(m: &mut Matrix2<Complex>) {
    let h = (*m + m.adjoint()) * Complex::new(0.5, 0.0);
    *m = h;
}

fn hermitize4(m: &mut Matrix4<Complex>) {
    let h = (*m + m.adjoint()) * Complex::new(0.5, 0.0);
    *m = h;
}


/// Seeded Haar-random single-qubit unitary.
///
/// A Gaussian-random complex 2x2 matrix is orthonormalized by Gram-Schmidt
/// with real-positive diagonal, which distributes the result with the Haar
/// measure on U(2). The draw is deterministic per `(seed, party)`.
pub fn random_haar_local_unitary(seed: u64, party: Party) -> LocalOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(party.bit() as u64);
    loop {
        let mut g = [[ZERO; 2]; 2];
        for row in &mut g {
            for e in row.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *e = Complex::new(re, im);
            }
        }
        // columns of g
        let c0 = [g[0][0], g[1][0]];
        let c1 = [g[0][1], g[1][1]];
        let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
        if n0 < 1e-12 {
            continue;
        }
        let q0 = [c0[0] / n0, c0[1] / n0];
        let proj = q0[0].conj() * c1[0] + q0[1].conj() * c1[1];
        let v = [c1[0] - proj * q0[0], c1[1] - proj * q0[1]];
        let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if nv < 1e-12 {
            continue;
        }
        let q1 = [v[0] / nv, v[1] / nv];
        let m = [[q0[0], q1[0]], [q0[1], q1[1]]];
        return LocalOperator::new(party, m).expect("finite by construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn canonical_state_places_amplitudes() {
        // standard GHZ coefficients
        let ghz = CanonicalCoefficients::standard_ghz();
        let s = state_from_canonical(&ghz);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitude(0).re, h, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(7).re, h, epsilon = 1e-12);
        for i in 1..7 {
            assert!(s.amplitude(i).norm() < 1e-15);
        }

        // single-term product state
        let prod = CanonicalCoefficients::new([1.0, 0.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        let s = state_from_canonical(&prod);
        assert_abs_diff_eq!(s.amplitude(0).re, 1.0, epsilon = 1e-12);

        // phase pi puts -0.3 at |100>
        let c3 = CanonicalCoefficients::new(
            [0.6, 0.3, 0.0, 0.0, 0.55f64.sqrt()],
            std::f64::consts::PI,
        )
        .unwrap();
        let s = state_from_canonical(&c3);
        assert_abs_diff_eq!(s.amplitude(4).re, -0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(4).im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_unnormalized_coefficients() {
        let r = CanonicalCoefficients::new([0.9, 0.0, 0.0, 0.0, 0.9], 0.0);
        assert!(r.is_err());
        let r = CanonicalCoefficients::new([0.6, -0.3, 0.0, 0.0, 0.55f64.sqrt()], 0.0);
        assert!(r.is_err());
    }

    #[test]
    fn apply_identity_is_identity() {
        let s = StateVector::standard_w();
        let out = apply_local(&LocalOperator::identity(Party::B), &s);
        assert!(fidelity_up_to_phase(&s.normalized(), &out.normalized()) > 1.0 - 1e-12);
        for i in 0..8 {
            assert!((out.amplitude(i) - s.amplitude(i)).norm() < 1e-15);
        }
    }

    #[test]
    fn pauli_x_on_a_permutes_basis() {
        let s = StateVector::basis(0); // |000>
        let out = apply_local(&LocalOperator::pauli_x(Party::A), &s);
        assert_abs_diff_eq!(out.amplitude(4).re, 1.0, epsilon = 1e-15);
        assert!(out.amplitude(0).norm() < 1e-15);
    }

    #[test]
    fn eq16_operator_on_ghz() {
        // M_A1 for target (0.6, 0.3, sqrt(0.55)); output should be the
        // target scaled by 1/sqrt(2), with branch probability 1/2.
        let (l0, l1, l4) = (0.6, 0.3, 0.55f64.sqrt());
        let m = LocalOperator::from_real(Party::A, [[l0, 0.0], [l1, l4]]).unwrap();
        let ghz = StateVector::standard_ghz();
        let out = apply_local(&m, &ghz);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out.amplitude(0).re, l0 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitude(4).re, l1 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitude(7).re, l4 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm_sqr(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(branch_probability(&m, &ghz), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn identity_branch_probability_is_one() {
        let s = StateVector::standard_ghz();
        let p = branch_probability(&LocalOperator::identity(Party::C), &s);
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn povm_completeness_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m1 = LocalOperator::identity(Party::A).scaled(c(h, 0.0));
        let m2 = LocalOperator::pauli_x(Party::A).scaled(c(h, 0.0));
        let pair = MeasurementPair::new(m1, m2, "hadamard-like").unwrap();
        assert!(povm_complete(&pair));

        let bad = MeasurementPair::new(
            LocalOperator::identity(Party::A),
            LocalOperator::identity(Party::A),
            "sums to 2I",
        )
        .unwrap();
        assert!(!povm_complete(&bad));
    }

    #[test]
    fn pair_rejects_mixed_parties() {
        let r = MeasurementPair::new(
            LocalOperator::identity(Party::A),
            LocalOperator::identity(Party::B),
            "mixed",
        );
        assert!(r.is_err());
    }

    #[test]
    fn reduced_density_product_state() {
        let s = StateVector::basis(0);
        let d = reduced_density(&s, &[Party::A]).unwrap();
        assert_abs_diff_eq!(d.entry(0, 0).re, 1.0, epsilon = 1e-14);
        assert!(d.entry(1, 1).norm() < 1e-14);
    }

    #[test]
    fn reduced_density_ghz_pair() {
        let s = StateVector::standard_ghz();
        let d = reduced_density(&s, &[Party::B, Party::C]).unwrap();
        assert_abs_diff_eq!(d.entry(0, 0).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.entry(3, 3).re, 0.5, epsilon = 1e-14);
        assert!(d.entry(0, 3).norm() < 1e-14);
        assert!(d.entry(1, 1).norm() < 1e-14);
    }

    #[test]
    fn reduced_density_w_single_party_eigenvalues() {
        let s = StateVector::standard_w();
        let d = reduced_density(&s, &[Party::A]).unwrap();
        let ev = d.eigenvalues();
        assert_abs_diff_eq!(ev[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_density_rejects_empty_and_full_keep() {
        let s = StateVector::standard_ghz();
        assert!(reduced_density(&s, &[]).is_err());
        assert!(reduced_density(&s, &[Party::A, Party::B, Party::C]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let s = StateVector::standard_w();
        assert_abs_diff_eq!(fidelity_up_to_phase(&s, &s), 1.0, epsilon = 1e-12);
        let phased = s.scaled(Complex::from_polar(1.0, std::f64::consts::FRAC_PI_3));
        assert_abs_diff_eq!(fidelity_up_to_phase(&s, &phased), 1.0, epsilon = 1e-12);
        let a = StateVector::basis(0);
        let b = StateVector::basis(7);
        assert_abs_diff_eq!(fidelity_up_to_phase(&a, &b), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn haar_unitary_contract() {
        for seed in [0u64, 1, 42, 12345] {
            let u = random_haar_local_unitary(seed, Party::B);
            assert!(u.unitarity_defect() <= 1e-12, "seed {seed}");
        }
        let u1 = random_haar_local_unitary(7, Party::A);
        let u2 = random_haar_local_unitary(7, Party::A);
        assert_eq!(u1, u2);
    }

    #[test]
    fn haar_first_entry_moment() {
        let n = 1000;
        let mean: f64 = (1..=n)
            .map(|seed| random_haar_local_unitary(seed, Party::A).entry(0, 0).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn unitary_preserves_norm() {
        let s = StateVector::standard_w();
        for seed in 0..20u64 {
            let u = random_haar_local_unitary(seed, Party::C);
            let out = apply_local(&u, &s);
            assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = Matrix2::zeros();
        m[(0, 0)] = c(0.7, 0.0);
        m[(1, 1)] = c(0.3, 0.0);
        m[(0, 1)] = c(0.1, 0.2);
        m[(1, 0)] = c(0.1, -0.2);
        assert!(DensityMatrix::qubit(m).is_ok());

        let mut bad = m;
        bad[(0, 1)] = c(0.9, 0.0); // breaks hermiticity and positivity
        assert!(DensityMatrix::qubit(bad).is_err());
    }
}
