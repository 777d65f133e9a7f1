//! Canonical coefficients, entanglement invariants, SLOCC classification,
//! the local-unitary partner map, and independent density-matrix oracles.
//!
//! Two routes compute the same five-component fingerprint
//! `(C_AB, C_AC, C_BC, tau, phi5)`:
//!
//! * closed-form expressions in the canonical coefficients
//!   ([`invariants_from_canonical`], [`ep_phase`]);
//! * density-matrix oracles on an arbitrary 8-amplitude state
//!   ([`invariants_from_state`]): Wootters mixed-state concurrence on the
//!   two-qubit reductions, the tangle as `4 det(rho_A) - C_AB² - C_AC²`, and
//!   the entanglement phase through a cubic invariant of the reductions (see
//!   [`ep_phase_from_state`]).
//!
//! The oracle route never reconstructs canonical coefficients, so it works on
//! any state and serves as an independent cross-check of the formulas.

use nalgebra::{Matrix2, Matrix4};

use crate::config::{ARCCOS_SLACK, EP_INDEFINITE_PRODUCT, RANK_THRESHOLD, TANGLE_THRESHOLD};
use crate::error::{Error, Result};
use crate::qcore::{
    reduced_density, Complex, DensityMatrix, Party, StateVector,
};

/// The `(l0..l4, phi)` parameterization of a three-qubit pure state:
/// `l0|000> + l1 e^{i phi}|100> + l2|101> + l3|110> + l4|111>`.
///
/// All `l_i >= 0` and the squared coefficients sum to 1 within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCoefficients {
    lambda: [f64; 5],
    phi: f64,
}

impl CanonicalCoefficients {
    pub fn new(lambda: [f64; 5], phi: f64) -> Result<Self> {
        if lambda.iter().any(|l| !l.is_finite()) || !phi.is_finite() {
            return Err(Error::InvalidCoefficients(
                "non-finite canonical coefficients".into(),
            ));
        }
        if lambda.iter().any(|&l| l < 0.0) {
            return Err(Error::InvalidCoefficients(
                "canonical coefficients must be nonnegative".into(),
            ));
        }
        let norm_sqr: f64 = lambda.iter().map(|l| l * l).sum();
        if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCoefficients(format!(
                "squared coefficients sum to {norm_sqr}, not 1"
            )));
        }
        let tau = std::f64::consts::TAU;
        let mut phi = phi % tau;
        if phi < 0.0 {
            phi += tau;
        }
        Ok(Self { lambda, phi })
    }

    /// `l0 = l4 = 1/sqrt(2)`, the standard GHZ state.
    pub fn standard_ghz() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            lambda: [h, 0.0, 0.0, 0.0, h],
            phi: 0.0,
        }
    }

    /// The standard W state after the flip on qubit A:
    /// `(|000> + |101> + |110>)/sqrt(3)`.
    pub fn standard_w_canonical() -> Self {
        let t = 1.0 / 3f64.sqrt();
        Self {
            lambda: [t, 0.0, t, t, 0.0],
            phi: 0.0,
        }
    }

    pub fn lambda(&self) -> [f64; 5] {
        self.lambda
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// The entanglement phase `phi5 in [0, pi]`, or `Indefinite` when the
/// product of bipartite concurrences vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpPhase {
    Definite(f64),
    Indefinite,
}

impl EpPhase {
    pub fn is_indefinite(&self) -> bool {
        matches!(self, EpPhase::Indefinite)
    }

    pub fn phase(&self) -> Option<f64> {
        match self {
            EpPhase::Definite(p) => Some(*p),
            EpPhase::Indefinite => None,
        }
    }
}

/// The local-unitary invariant fingerprint
/// `(C_AB, C_AC, C_BC, tau, phi5-or-indefinite)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    pub c_ab: f64,
    pub c_ac: f64,
    pub c_bc: f64,
    pub tau: f64,
    pub ep_phase: EpPhase,
}

impl InvariantSet {
    pub fn concurrence_product(&self) -> f64 {
        self.c_ab * self.c_ac * self.c_bc
    }

    /// Largest componentwise difference. The phase component is compared in
    /// cosine space, which is monotone on `[0, pi]` and stays well
    /// conditioned where arccos does not. A definite/indefinite mismatch is
    /// reported as infinity.
    pub fn max_difference(&self, other: &InvariantSet) -> f64 {
        let mut d = (self.c_ab - other.c_ab).abs();
        d = d.max((self.c_ac - other.c_ac).abs());
        d = d.max((self.c_bc - other.c_bc).abs());
        d = d.max((self.tau - other.tau).abs());
        match (&self.ep_phase, &other.ep_phase) {
            (EpPhase::Indefinite, EpPhase::Indefinite) => d,
            (EpPhase::Definite(a), EpPhase::Definite(b)) => d.max((a.cos() - b.cos()).abs()),
            _ => f64::INFINITY,
        }
    }

    pub fn agrees_within(&self, other: &InvariantSet, tol: f64) -> bool {
        self.max_difference(other) <= tol
    }
}

/// SLOCC class of a three-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassLabel {
    GhzClass,
    WClass,
    BiseparableOrProduct,
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassLabel::GhzClass => write!(f, "GHZ_CLASS"),
            ClassLabel::WClass => write!(f, "W_CLASS"),
            ClassLabel::BiseparableOrProduct => write!(f, "BISEPARABLE_OR_PRODUCT"),
        }
    }
}

/// Scale factor relating a canonical coefficient set to its local-unitary
/// partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaRelation {
    pub kappa: f64,
}

/// Closed-form invariants of a canonical coefficient set:
/// `C_AC = 2 l0 l2`, `C_AB = 2 l0 l3`, `C_BC = 2|l2 l3 - e^{i phi} l1 l4|`,
/// `tau = 4 l0² l4²`.
pub fn invariants_from_canonical(c: &CanonicalCoefficients) -> InvariantSet {
    let [l0, _, l2, l3, l4] = c.lambda();
    let z = bc_cross_term(c);
    let mut inv = InvariantSet {
        c_ab: 2.0 * l0 * l3,
        c_ac: 2.0 * l0 * l2,
        c_bc: 2.0 * z.norm(),
        tau: 4.0 * l0 * l0 * l4 * l4,
        ep_phase: EpPhase::Indefinite,
    };
    if inv.concurrence_product() > EP_INDEFINITE_PRODUCT {
        // On the definite domain Eq-form and cross-term form coincide:
        // cos(phi5) = Re(Z)/|Z|, always within [-1, 1].
        let cos_phi5 = z.re / z.norm();
        inv.ep_phase = EpPhase::Definite(cos_phi5.clamp(-1.0, 1.0).acos());
    }
    inv
}

/// `Z = l2 l3 - e^{i phi} l1 l4`; `C_BC = 2|Z|` and `cos(phi5) = Re(Z)/|Z|`.
fn bc_cross_term(c: &CanonicalCoefficients) -> Complex {
    let [_, l1, l2, l3, l4] = c.lambda();
    Complex::new(l2 * l3, 0.0) - Complex::from_polar(l1 * l4, c.phi())
}

/// Entanglement phase of a canonical coefficient set.
///
/// Indefinite when `C_AB C_AC C_BC <= 1e-12`. Otherwise the arccos argument
/// `(l0² C_BC² + l2² C_AB² - l1² tau) / (C_AB C_AC C_BC)` is clamped into
/// `[-1, 1]` when it exceeds the range by at most `1e-6`; a larger excess is
/// reported as inconsistent input.
pub fn ep_phase(c: &CanonicalCoefficients) -> Result<EpPhase> {
    let [l0, l1, l2, _, _] = c.lambda();
    let inv = invariants_from_canonical(c);
    let product = inv.concurrence_product();
    if product <= EP_INDEFINITE_PRODUCT {
        return Ok(EpPhase::Indefinite);
    }
    let numerator = l0 * l0 * inv.c_bc * inv.c_bc + l2 * l2 * inv.c_ab * inv.c_ab
        - l1 * l1 * inv.tau;
    definite_phase(numerator / product)
}

fn definite_phase(ratio: f64) -> Result<EpPhase> {
    if ratio.abs() > 1.0 + ARCCOS_SLACK {
        return Err(Error::InconsistentInvariants(format!(
            "entanglement-phase cosine {ratio} exceeds [-1, 1] beyond rounding"
        )));
    }
    Ok(EpPhase::Definite(ratio.clamp(-1.0, 1.0).acos()))
}

/// The local-unitary partner of a canonical coefficient set.
///
/// The partner shares the full invariant fingerprint; `kappa` is the scale
/// relating the two. Undefined for the degenerate families where
/// `l2² + l4²`, `l3² + l4²`, or `tau + C_BC²` vanish.
pub fn lue_partner(c: &CanonicalCoefficients) -> Result<(CanonicalCoefficients, KappaRelation)> {
    let [l0, l1, l2, l3, l4] = c.lambda();
    let d24 = l2 * l2 + l4 * l4;
    let d34 = l3 * l3 + l4 * l4;
    let inv = invariants_from_canonical(c);
    let num = inv.tau + inv.c_bc * inv.c_bc;
    if d24 <= 1e-24 || d34 <= 1e-24 || num <= 1e-24 {
        return Err(Error::InvalidCoefficients(
            "LUE partner undefined for this degenerate family".into(),
        ));
    }
    let kappa = (num / (4.0 * d24 * d34)).sqrt();

    let q = (l4 * l4 * (l2 * l2 + l3 * l3 + l4 * l4) - l2 * l2 * l3 * l3) / (d24 * d34);
    let (sin_phi, cos_phi) = c.phi().sin_cos();
    // l1' e^{i phi'} = (l1/kappa)(q cos(phi) - i sin(phi))
    //                + l2 l3 l4 (l0² + l1² - l2² - l3² - l4²) / (kappa d24 d34),
    // written with the 1/l1 pole already cancelled so l1 = 0 is fine.
    let rotated = Complex::new(q * cos_phi, -sin_phi) * (l1 / kappa);
    let offset = l2 * l3 * l4 * (l0 * l0 + l1 * l1 - l2 * l2 - l3 * l3 - l4 * l4)
        / (kappa * d24 * d34);
    let l1_term = rotated + Complex::new(offset, 0.0);

    let l1_prime = l1_term.norm();
    let phi_prime = if l1_prime <= 1e-12 { 0.0 } else { l1_term.arg() };

    let partner = CanonicalCoefficients::new(
        [l0 / kappa, l1_prime, l2 * kappa, l3 * kappa, l4 * kappa],
        phi_prime,
    )?;
    Ok((partner, KappaRelation { kappa }))
}

/// Eigenvalues below this bar are treated as the zero part of the spectrum
/// when factoring a density matrix.
const RANK_EPS: f64 = 1e-13;

/// Wootters concurrence of a two-qubit density matrix:
/// `max(0, r1 - r2 - r3 - r4)` with `r_i` the decreasing square roots of the
/// eigenvalues of `rho (sy⊗sy) rho* (sy⊗sy)`.
///
/// Factoring `rho = Psi Psi†` (columns: eigenvectors scaled by root
/// eigenvalues) turns that spectrum into the singular values of the
/// symmetric preconcurrence matrix `S = Psi^T (sy⊗sy) Psi`, whose rank
/// matches the rank of `rho`. Reductions of pure three-qubit states have
/// rank at most 2, where `sigma_1 - sigma_2` has a cancellation-free closed
/// form, so the oracle stays accurate to machine precision even at vanishing
/// concurrence.
pub fn mixed_concurrence(rho: &DensityMatrix) -> Result<f64> {
    let m = match rho {
        DensityMatrix::TwoQubit(m) => m,
        DensityMatrix::Qubit(_) => {
            return Err(Error::InvalidDensityMatrix(
                "mixed concurrence needs a two-qubit (4x4) density matrix".into(),
            ))
        }
    };
    if rho.hermiticity_defect() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(
            "mixed concurrence input is not Hermitian".into(),
        ));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(
            "mixed concurrence input trace deviates from 1".into(),
        ));
    }

    let eig = (*m).symmetric_eigen();
    let mut columns: Vec<[Complex; 4]> = Vec::new();
    for i in 0..4 {
        let l = eig.eigenvalues[i];
        if l > RANK_EPS {
            let root = Complex::new(l.sqrt(), 0.0);
            let v = eig.eigenvectors.column(i);
            columns.push([v[0] * root, v[1] * root, v[2] * root, v[3] * root]);
        }
    }
    let k = columns.len();
    if k == 0 {
        return Ok(0.0);
    }

    // S_ij = col_i^T (sy⊗sy) col_j; (sy⊗sy) maps (w0,w1,w2,w3) to
    // (-w3, w2, w1, -w0).
    let bilinear = |a: &[Complex; 4], b: &[Complex; 4]| -> Complex {
        -a[0] * b[3] + a[1] * b[2] + a[2] * b[1] - a[3] * b[0]
    };
    let s: Vec<Vec<Complex>> = (0..k)
        .map(|i| (0..k).map(|j| bilinear(&columns[i], &columns[j])).collect())
        .collect();

    let c = match k {
        1 => s[0][0].norm(),
        2 => symmetric_2x2_singular_gap(s[0][0], s[0][1], s[1][1]),
        _ => {
            let flat = nalgebra::DMatrix::from_fn(k, k, |r, c| s[r][c]);
            let mut sv: Vec<f64> = flat.singular_values().iter().copied().collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sv[0] - sv[1..].iter().sum::<f64>()
        }
    };
    Ok(c.max(0.0))
}

/// `sigma_1 - sigma_2` of the symmetric 2x2 matrix `[[a, b], [b, c]]`.
///
/// `sigma_1² = mid + radius` comes from the eigenvalue split of `S†S`
/// (differences only, stable near degeneracy), and `sigma_2 = |det S| /
/// sigma_1` avoids the square root of a cancelling tail when `sigma_2`
/// vanishes. Both regimes keep absolute machine accuracy.
fn symmetric_2x2_singular_gap(a: Complex, b: Complex, c: Complex) -> f64 {
    let h11 = a.norm_sqr() + b.norm_sqr();
    let h22 = b.norm_sqr() + c.norm_sqr();
    let h12 = a.conj() * b + b.conj() * c;
    let mid = 0.5 * (h11 + h22);
    let radius = ((0.5 * (h11 - h22)).powi(2) + h12.norm_sqr()).sqrt();
    let sigma1_sq = mid + radius;
    if sigma1_sq <= 0.0 {
        return 0.0;
    }
    let det = (a * c - b * b).norm();
    ((sigma1_sq - det) / sigma1_sq.sqrt()).max(0.0)
}

fn two_qubit_reduction(s: &StateVector, p: Party, q: Party) -> DensityMatrix {
    reduced_density(s, &[p, q]).expect("two kept parties")
}

/// Wootters concurrence of the `(p, q)` reduction of a pure state, through
/// the exact purification factor: the traced party indexes a rank-<=2
/// factorization `rho = Psi Psi†` read straight off the amplitudes, so no
/// eigendecomposition enters and the result holds machine precision even at
/// vanishing concurrence.
fn pair_concurrence_from_state(s: &StateVector, p: Party, q: Party) -> f64 {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    let traced = Party::ALL
        .into_iter()
        .find(|x| *x != p && *x != q)
        .expect("one party traced");
    let (pb, qb, tb) = (p.bit(), q.bit(), traced.bit());
    // columns of Psi: w_t[(2 v_p + v_q)] = amp[v_p, v_q, t]
    let mut w = [[Complex::new(0.0, 0.0); 4]; 2];
    for (t, col) in w.iter_mut().enumerate() {
        for (pair_index, e) in col.iter_mut().enumerate() {
            let idx = ((pair_index >> 1) << pb) | ((pair_index & 1) << qb) | (t << tb);
            *e = s.amplitude(idx);
        }
    }
    let bilinear = |a: &[Complex; 4], b: &[Complex; 4]| -> Complex {
        -a[0] * b[3] + a[1] * b[2] + a[2] * b[1] - a[3] * b[0]
    };
    symmetric_2x2_singular_gap(
        bilinear(&w[0], &w[0]),
        bilinear(&w[0], &w[1]),
        bilinear(&w[1], &w[1]),
    )
}

fn single_qubit_reduction(s: &StateVector, p: Party) -> DensityMatrix {
    reduced_density(s, &[p]).expect("one kept party")
}

fn det2(d: &DensityMatrix) -> f64 {
    match d {
        DensityMatrix::Qubit(m) => (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re,
        DensityMatrix::TwoQubit(_) => unreachable!("det2 takes a single-qubit reduction"),
    }
}

/// Three-tangle by the monogamy route:
/// `tau = C²_{A(BC)} - C²_AB - C²_AC` with `C²_{A(BC)} = 4 det(rho_A)`.
/// Tiny negatives are clamped to zero.
pub fn ckw_tangle(s: &StateVector) -> f64 {
    let s = s.normalized();
    let det_a = det2(&single_qubit_reduction(&s, Party::A));
    let c_ab = pair_concurrence_from_state(&s, Party::A, Party::B);
    let c_ac = pair_concurrence_from_state(&s, Party::A, Party::C);
    (4.0 * det_a - c_ab * c_ab - c_ac * c_ac).max(0.0)
}

/// `tr[(rho_A ⊗ rho_B) rho_AB]`, a cubic local-unitary invariant of the
/// state. Real because both factors are Hermitian.
fn pair_correlation_invariant(s: &StateVector) -> f64 {
    let rho_a = match single_qubit_reduction(s, Party::A) {
        DensityMatrix::Qubit(m) => m,
        _ => unreachable!(),
    };
    let rho_b = match single_qubit_reduction(s, Party::B) {
        DensityMatrix::Qubit(m) => m,
        _ => unreachable!(),
    };
    let rho_ab = match two_qubit_reduction(s, Party::A, Party::B) {
        DensityMatrix::TwoQubit(m) => m,
        _ => unreachable!(),
    };
    let kron = kron2(&rho_a, &rho_b);
    (kron * rho_ab).trace().re
}

fn kron2(a: &Matrix2<Complex>, b: &Matrix2<Complex>) -> Matrix4<Complex> {
    let mut out = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = a[(i >> 1, j >> 1)] * b[(i & 1, j & 1)];
        }
    }
    out
}

/// Entanglement phase computed from density matrices alone.
///
/// For a normalized state, the cubic invariant `K = tr[(rho_A ⊗ rho_B) rho_AB]`
/// satisfies the polynomial identity
///
/// `C_AB C_AC C_BC cos(phi5) = 4K - 4 + 2 C_BC² + 2 C_AC² + 3 C_AB² + 3 tau`,
///
/// so the phase follows from the same reductions that feed the concurrence
/// oracles, with no canonical decomposition anywhere.
pub fn ep_phase_from_state(s: &StateVector) -> Result<EpPhase> {
    let s = s.normalized();
    let (c_ab, c_ac, c_bc) = oracle_concurrences(&s)?;
    let product = c_ab * c_ac * c_bc;
    if product <= EP_INDEFINITE_PRODUCT {
        return Ok(EpPhase::Indefinite);
    }
    let tau = ckw_tangle(&s);
    let k = pair_correlation_invariant(&s);
    let numerator = 4.0 * k - 4.0 + 2.0 * c_bc * c_bc + 2.0 * c_ac * c_ac
        + 3.0 * c_ab * c_ab + 3.0 * tau;
    definite_phase(numerator / product)
}

fn oracle_concurrences(s: &StateVector) -> Result<(f64, f64, f64)> {
    let c_ab = pair_concurrence_from_state(s, Party::A, Party::B);
    let c_ac = pair_concurrence_from_state(s, Party::A, Party::C);
    let c_bc = pair_concurrence_from_state(s, Party::B, Party::C);
    Ok((c_ab, c_ac, c_bc))
}

/// Full oracle fingerprint of an arbitrary normalized state: Wootters
/// concurrences, monogamy tangle, and the density-matrix entanglement phase.
pub fn invariants_from_state(s: &StateVector) -> Result<InvariantSet> {
    let s = s.normalized();
    let (c_ab, c_ac, c_bc) = oracle_concurrences(&s)?;
    let tau = ckw_tangle(&s);
    let ep_phase = ep_phase_from_state(&s)?;
    Ok(InvariantSet {
        c_ab,
        c_ac,
        c_bc,
        tau,
        ep_phase,
    })
}

/// SLOCC classification: nonzero tangle marks the GHZ class; zero tangle
/// with all three single-qubit reductions of rank 2 marks the W class;
/// anything else is biseparable or product.
pub fn classify(s: &StateVector) -> ClassLabel {
    let s = s.normalized();
    if ckw_tangle(&s) > TANGLE_THRESHOLD {
        return ClassLabel::GhzClass;
    }
    let rank2 = Party::ALL.into_iter().all(|p| {
        let ev = single_qubit_reduction(&s, p).eigenvalues();
        ev[0] > RANK_THRESHOLD
    });
    if rank2 {
        ClassLabel::WClass
    } else {
        ClassLabel::BiseparableOrProduct
    }
}

/// Local-unitary equivalence through the oracle fingerprints.
///
/// Both states must be genuinely tripartite; the five invariants are not a
/// complete set on the biseparable boundary, which is reported as an error.
pub fn lue_equivalent(a: &StateVector, b: &StateVector) -> Result<bool> {
    for s in [a, b] {
        if classify(s) == ClassLabel::BiseparableOrProduct {
            return Err(Error::UnsupportedClassification(
                "local-unitary fingerprint comparison needs genuinely tripartite states".into(),
            ));
        }
    }
    let fa = invariants_from_state(a)?;
    let fb = invariants_from_state(b)?;
    Ok(fa.agrees_within(&fb, 1e-8))
}
