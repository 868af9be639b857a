//! Dense pure-state engine over named two-level systems.
//!
//! A [`StateVector`] holds `2^n` complex amplitudes for `n` labeled qubits.
//! Basis index bit `k` encodes the state of `qubits[k]`, with bit value 0
//! meaning `|R⟩` (photons) or `|↑⟩` (spins) and bit value 1 meaning `|L⟩`
//! or `|↓⟩`. States may become sub-normalized under lossy operations;
//! nothing here renormalizes implicitly except [`StateVector::measure`],
//! whose post-measurement state is defined to be unit norm.

use num_complex::Complex64;
use thiserror::Error;

/// Scalar type for all amplitudes.
pub type Amplitude = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown qubit `{0}`")]
    UnknownQubit(String),
    #[error("basis {basis:?} is not defined for a {kind:?} qubit")]
    KindMismatch { basis: Basis, kind: QubitKind },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("random draw {0} outside [0, 1)")]
    RandOutOfRange(f64),
    #[error("states are defined on different qubit registers")]
    RegisterMismatch,
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("term has {got} bits, register has {want} qubits")]
    TermLength { got: usize, want: usize },
}

/// What kind of two-level system a qubit is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitKind {
    /// Photon polarization, basis `{R, L}`.
    Photon,
    /// Electron spin, basis `{↑, ↓}`.
    Spin,
}

/// Label plus kind identifying one qubit within a register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitId {
    label: String,
    kind: QubitKind,
}

impl QubitId {
    pub fn photon(label: impl Into<String>) -> Self {
        Self { label: label.into(), kind: QubitKind::Photon }
    }

    pub fn spin(label: impl Into<String>) -> Self {
        Self { label: label.into(), kind: QubitKind::Spin }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> QubitKind {
        self.kind
    }
}

/// Measurement basis for [`StateVector::measure`].
///
/// Outcome 0 / outcome 1 project onto:
/// - `RightLeft`: `|R⟩` / `|L⟩`
/// - `Diagonal`: `(|L⟩ + i|R⟩)/√2` / `(|L⟩ − i|R⟩)/√2` (±45° linear)
/// - `SpinZ`: `|↑⟩` / `|↓⟩`
/// - `SpinX`: `(|↑⟩ + |↓⟩)/√2` / `(|↑⟩ − |↓⟩)/√2`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    RightLeft,
    Diagonal,
    SpinZ,
    SpinX,
}

impl Basis {
    fn kind(self) -> QubitKind {
        match self {
            Basis::RightLeft | Basis::Diagonal => QubitKind::Photon,
            Basis::SpinZ | Basis::SpinX => QubitKind::Spin,
        }
    }

    /// Basis vectors as `(outcome 0, outcome 1)` in `(bit0, bit1)` components.
    fn vectors(self) -> ([Amplitude; 2], [Amplitude; 2]) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rt = Complex64::new(s, 0.0);
        match self {
            Basis::RightLeft | Basis::SpinZ => (
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ),
            Basis::Diagonal => (
                [Complex64::new(0.0, s), rt],
                [Complex64::new(0.0, -s), rt],
            ),
            Basis::SpinX => ([rt, rt], [rt, -rt]),
        }
    }
}

/// Record of one projective measurement.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub qubit: QubitId,
    pub basis: Basis,
    /// 0 or 1, per the [`Basis`] outcome convention.
    pub outcome: u8,
    /// Probability of the realized outcome given the (possibly
    /// sub-normalized) input state.
    pub probability: f64,
}

/// 2×2 single-qubit operator, `m[row][col]` over the `(bit0, bit1)` basis.
pub type SingleQubitOp = [[Amplitude; 2]; 2];

/// Hadamard, mapping bit 0 to `(|0⟩+|1⟩)/√2` and bit 1 to `(|0⟩−|1⟩)/√2`.
pub fn hadamard() -> SingleQubitOp {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// Phase flip `|R⟩⟨R| − |L⟩⟨L|` (equivalently `|↑⟩⟨↑| − |↓⟩⟨↓|`).
pub fn sigma_z() -> SingleQubitOp {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
    ]
}

/// Dense pure state over an ordered register of named qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    qubits: Vec<QubitId>,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Single-qubit state `a0·|bit0⟩ + a1·|bit1⟩`.
    pub fn single(qubit: QubitId, a0: Amplitude, a1: Amplitude) -> Result<Self, StateError> {
        if !(a0.is_finite() && a1.is_finite()) {
            return Err(StateError::NonFinite);
        }
        Ok(Self { qubits: vec![qubit], amps: vec![a0, a1] })
    }

    /// State built from explicit basis terms. Each term lists one bit per
    /// register qubit, in register order, plus the amplitude of that basis
    /// state. Unlisted basis states are zero.
    pub fn from_terms(
        qubits: Vec<QubitId>,
        terms: &[(&[u8], Amplitude)],
    ) -> Result<Self, StateError> {
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].iter().any(|p| p.label == q.label) {
                return Err(StateError::DuplicateLabel(q.label.clone()));
            }
        }
        let n = qubits.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (bits, a) in terms {
            if bits.len() != n {
                return Err(StateError::TermLength { got: bits.len(), want: n });
            }
            if !a.is_finite() {
                return Err(StateError::NonFinite);
            }
            let mut idx = 0usize;
            for (k, b) in bits.iter().enumerate() {
                idx |= ((*b as usize) & 1) << k;
            }
            amps[idx] += *a;
        }
        Ok(Self { qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    /// Amplitude of the basis state whose bit `k` is `bits[k]`.
    pub fn amplitude(&self, bits: &[u8]) -> Result<Amplitude, StateError> {
        if bits.len() != self.qubits.len() {
            return Err(StateError::TermLength { got: bits.len(), want: self.qubits.len() });
        }
        let mut idx = 0usize;
        for (k, b) in bits.iter().enumerate() {
            idx |= ((*b as usize) & 1) << k;
        }
        Ok(self.amps[idx])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, q: &QubitId) -> Result<usize, StateError> {
        self.qubits
            .iter()
            .position(|p| p == q)
            .ok_or_else(|| StateError::UnknownQubit(q.label.clone()))
    }

    /// Rename a qubit in place, keeping its kind. Fails on label collision
    /// or if the new id changes the kind.
    pub fn rename(&mut self, q: &QubitId, new: QubitId) -> Result<(), StateError> {
        let pos = self.position(q)?;
        if new.kind != self.qubits[pos].kind {
            return Err(StateError::KindMismatch {
                basis: Basis::RightLeft,
                kind: new.kind,
            });
        }
        if self.qubits.iter().enumerate().any(|(i, p)| i != pos && p.label == new.label) {
            return Err(StateError::DuplicateLabel(new.label));
        }
        self.qubits[pos] = new;
        Ok(())
    }

    /// Tensor product; `self`'s qubits come first in the combined register.
    pub fn tensor(&self, other: &Self) -> Result<Self, StateError> {
        for q in &other.qubits {
            if self.qubits.iter().any(|p| p.label == q.label) {
                return Err(StateError::DuplicateLabel(q.label.clone()));
            }
        }
        let n = self.qubits.len();
        let mut qubits = self.qubits.clone();
        qubits.extend(other.qubits.iter().cloned());
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits.len()];
        for (j, bj) in other.amps.iter().enumerate() {
            if bj.norm_sqr() == 0.0 {
                continue;
            }
            for (i, ai) in self.amps.iter().enumerate() {
                amps[i | (j << n)] = ai * bj;
            }
        }
        Ok(Self { qubits, amps })
    }

    /// Apply a 2×2 operator to one qubit.
    pub fn apply_single(&self, q: &QubitId, m: &SingleQubitOp) -> Result<Self, StateError> {
        if m.iter().flatten().any(|a| !a.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let pos = self.position(q)?;
        let mask = 1usize << pos;
        let mut amps = self.amps.clone();
        for i in 0..amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(Self { qubits: self.qubits.clone(), amps })
    }

    /// Multiply each basis amplitude by `f(bits)`. The closure sees the full
    /// bit pattern of the basis state. Used for diagonal interactions.
    pub fn apply_diagonal<F>(&self, f: F) -> Self
    where
        F: Fn(usize) -> Amplitude,
    {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| a * f(i))
            .collect();
        Self { qubits: self.qubits.clone(), amps }
    }

    /// Project qubit `q` onto the single-qubit state `onto` and remove it
    /// from the register. Returns the (sub-normalized) projected state and
    /// its squared norm. No renormalization is performed.
    pub fn project(
        &self,
        q: &QubitId,
        onto: [Amplitude; 2],
    ) -> Result<(Self, f64), StateError> {
        let pos = self.position(q)?;
        let mut qubits = self.qubits.clone();
        qubits.remove(pos);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits.len()];
        let low_mask = (1usize << pos) - 1;
        for (i, a) in self.amps.iter().enumerate() {
            let b = (i >> pos) & 1;
            let rest = (i & low_mask) | ((i >> (pos + 1)) << pos);
            amps[rest] += onto[b].conj() * a;
        }
        let w = amps.iter().map(|a| a.norm_sqr()).sum();
        Ok((Self { qubits, amps }, w))
    }

    /// Projective measurement of one qubit. The outcome is 0 iff
    /// `rand < p0`; the measured qubit is removed from the register and the
    /// post-measurement state is renormalized to unit norm.
    pub fn measure(
        &self,
        q: &QubitId,
        basis: Basis,
        rand: f64,
    ) -> Result<(MeasurementRecord, Self), StateError> {
        if !(0.0..1.0).contains(&rand) {
            return Err(StateError::RandOutOfRange(rand));
        }
        let pos = self.position(q)?;
        if basis.kind() != self.qubits[pos].kind {
            return Err(StateError::KindMismatch { basis, kind: self.qubits[pos].kind });
        }
        let total = self.norm_sqr();
        if total <= 0.0 {
            return Err(StateError::ZeroNorm);
        }
        let (v0, v1) = basis.vectors();
        let (s0, w0) = self.project(q, v0)?;
        let p0 = w0 / total;
        let (outcome, mut state, w) = if rand < p0 {
            (0u8, s0, w0)
        } else {
            let (s1, w1) = self.project(q, v1)?;
            (1u8, s1, w1)
        };
        if w <= 0.0 {
            return Err(StateError::ZeroNorm);
        }
        let scale = Complex64::new(1.0 / w.sqrt(), 0.0);
        for a in &mut state.amps {
            *a *= scale;
        }
        let probability = if outcome == 0 { p0 } else { 1.0 - p0 };
        Ok((
            MeasurementRecord { qubit: self.qubits[pos].clone(), basis, outcome, probability },
            state,
        ))
    }

    /// Squared overlap `|⟨a|b⟩|² / (‖a‖²·‖b‖²)`: sub-normalized states
    /// compare by direction only. The registers must contain the same
    /// qubits; order may differ and is reconciled internally.
    pub fn fidelity(&self, other: &Self) -> Result<f64, StateError> {
        let n = self.qubits.len();
        if other.qubits.len() != n {
            return Err(StateError::RegisterMismatch);
        }
        // position of self's qubit k within other's register
        let mut perm = vec![0usize; n];
        for (k, q) in self.qubits.iter().enumerate() {
            perm[k] = other.position(q).map_err(|_| StateError::RegisterMismatch)?;
        }
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na <= 0.0 || nb <= 0.0 {
            return Err(StateError::ZeroNorm);
        }
        let mut overlap = Complex64::new(0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (k, p) in perm.iter().enumerate() {
                j |= ((i >> k) & 1) << p;
            }
            overlap += a.conj() * other.amps[j];
        }
        Ok(overlap.norm_sqr() / (na * nb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Amplitude {
        Complex64::new(re, im)
    }

    fn ket_r(label: &str) -> StateVector {
        StateVector::single(QubitId::photon(label), c(1.0, 0.0), c(0.0, 0.0)).unwrap()
    }

    fn ket_l(label: &str) -> StateVector {
        StateVector::single(QubitId::photon(label), c(0.0, 0.0), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = ket_r("x").tensor(&ket_r("y")).unwrap();
        assert_eq!(s.amplitude(&[0, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(s.amplitude(&[1, 0]).unwrap(), c(0.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_distributes_over_superposition() {
        let a = 0.6;
        let b = 0.8;
        let x = StateVector::single(QubitId::photon("x"), c(a, 0.0), c(b, 0.0)).unwrap();
        let s = x.tensor(&ket_r("y")).unwrap();
        assert_eq!(s.amplitude(&[0, 0]).unwrap(), c(a, 0.0));
        assert_eq!(s.amplitude(&[1, 0]).unwrap(), c(b, 0.0));
        assert_eq!(s.amplitude(&[0, 1]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn tensor_rejects_duplicate_labels() {
        let e = ket_r("x").tensor(&ket_l("x")).unwrap_err();
        assert_eq!(e, StateError::DuplicateLabel("x".into()));
    }

    #[test]
    fn tensor_norm_is_product_of_norms() {
        let x = StateVector::single(QubitId::photon("x"), c(0.3, 0.1), c(0.2, -0.4)).unwrap();
        let y = StateVector::single(QubitId::spin("s"), c(0.5, 0.0), c(0.1, 0.7)).unwrap();
        let s = x.tensor(&y).unwrap();
        assert!((s.norm_sqr() - x.norm_sqr() * y.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn hadamard_on_spin_up() {
        let up = StateVector::single(QubitId::spin("s"), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let out = up.apply_single(&QubitId::spin("s"), &hadamard()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(&[0]).unwrap() - c(s, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(&[1]).unwrap() - c(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let id = [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let x = StateVector::single(QubitId::photon("x"), c(0.3, 0.1), c(0.2, -0.4)).unwrap();
        let out = x.apply_single(&QubitId::photon("x"), &id).unwrap();
        assert_eq!(out.amplitudes(), x.amplitudes());
    }

    #[test]
    fn apply_single_unknown_qubit_errors() {
        let x = ket_r("x");
        let e = x.apply_single(&QubitId::photon("y"), &hadamard()).unwrap_err();
        assert_eq!(e, StateError::UnknownQubit("y".into()));
    }

    #[test]
    fn sigma_z_flips_l_component() {
        let x = StateVector::single(QubitId::photon("x"), c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let out = x.apply_single(&QubitId::photon("x"), &sigma_z()).unwrap();
        assert_eq!(out.amplitude(&[0]).unwrap(), c(0.6, 0.0));
        assert_eq!(out.amplitude(&[1]).unwrap(), c(-0.8, 0.0));
    }

    #[test]
    fn measure_eigenstate_is_deterministic() {
        let x = ket_r("x");
        for rand in [0.0, 0.5, 0.999_999] {
            let (rec, _) = x.measure(&QubitId::photon("x"), Basis::RightLeft, rand).unwrap();
            assert_eq!(rec.outcome, 0);
            assert!((rec.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_superposition_selects_by_rand() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = StateVector::single(QubitId::photon("x"), c(s, 0.0), c(s, 0.0)).unwrap();
        let (rec, post) = x.measure(&QubitId::photon("x"), Basis::RightLeft, 0.3).unwrap();
        assert_eq!(rec.outcome, 0);
        assert!((rec.probability - 0.5).abs() < 1e-12);
        assert_eq!(post.num_qubits(), 0);
        assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
        let (rec, _) = x.measure(&QubitId::photon("x"), Basis::RightLeft, 0.7).unwrap();
        assert_eq!(rec.outcome, 1);
    }

    #[test]
    fn measure_rejects_bad_rand_and_zero_norm() {
        let x = ket_r("x");
        assert_eq!(
            x.measure(&QubitId::photon("x"), Basis::RightLeft, 1.0).unwrap_err(),
            StateError::RandOutOfRange(1.0)
        );
        let zero = StateVector::single(QubitId::photon("x"), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(
            zero.measure(&QubitId::photon("x"), Basis::RightLeft, 0.5).unwrap_err(),
            StateError::ZeroNorm
        );
    }

    #[test]
    fn measure_rejects_kind_mismatch() {
        let x = ket_r("x");
        let e = x.measure(&QubitId::photon("x"), Basis::SpinZ, 0.5).unwrap_err();
        assert!(matches!(e, StateError::KindMismatch { .. }));
    }

    #[test]
    fn diagonal_basis_signs() {
        // (|L⟩ + i|R⟩)/√2 must hit outcome 0 with certainty.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::single(QubitId::photon("x"), c(0.0, s), c(s, 0.0)).unwrap();
        let (rec, _) = plus.measure(&QubitId::photon("x"), Basis::Diagonal, 0.999).unwrap();
        assert_eq!(rec.outcome, 0);
        assert!((rec.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_x_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::single(QubitId::spin("e"), c(s, 0.0), c(s, 0.0)).unwrap();
        let (rec, _) = plus.measure(&QubitId::spin("e"), Basis::SpinX, 0.999).unwrap();
        assert_eq!(rec.outcome, 0);
        assert!((rec.probability - 1.0).abs() < 1e-12);
        let minus = StateVector::single(QubitId::spin("e"), c(s, 0.0), c(-s, 0.0)).unwrap();
        let (rec, _) = minus.measure(&QubitId::spin("e"), Basis::SpinX, 0.0).unwrap();
        assert_eq!(rec.outcome, 1);
    }

    #[test]
    fn fidelity_identity_and_orthogonality() {
        let x = StateVector::single(QubitId::photon("x"), c(0.6, 0.2), c(0.7, -0.1)).unwrap();
        assert!((x.fidelity(&x).unwrap() - 1.0).abs() < 1e-12);
        assert!(ket_r("x").fidelity(&ket_l("x")).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_of_w_with_two_parameter_form() {
        // overlap of (|RRL⟩+|RLR⟩+|LRR⟩)/√3 with ν(β|RRL⟩+β|RLR⟩+γ|LRR⟩),
        // β² = 0.2, γ² = 0.6; independent oracle: (2β+γ)²/3 / (2β²+γ²)
        let beta = 0.2f64.sqrt();
        let gamma = 0.6f64.sqrt();
        let expected = (2.0 * beta + gamma).powi(2) / 3.0 / (2.0 * beta * beta + gamma * gamma);
        let qs = || {
            vec![QubitId::photon("a"), QubitId::photon("b"), QubitId::photon("c")]
        };
        let t = 1.0 / 3.0f64.sqrt();
        let w = StateVector::from_terms(
            qs(),
            &[
                (&[0, 0, 1], c(t, 0.0)),
                (&[0, 1, 0], c(t, 0.0)),
                (&[1, 0, 0], c(t, 0.0)),
            ],
        )
        .unwrap();
        let phi = StateVector::from_terms(
            qs(),
            &[
                (&[0, 0, 1], c(beta, 0.0)),
                (&[0, 1, 0], c(beta, 0.0)),
                (&[1, 0, 0], c(gamma, 0.0)),
            ],
        )
        .unwrap();
        let f = w.fidelity(&phi).unwrap();
        assert!((f - expected).abs() < 1e-12);
        assert!((f - 0.928546882018).abs() < 1e-9);
    }

    #[test]
    fn fidelity_register_reordering() {
        let qs_ab = vec![QubitId::photon("a"), QubitId::photon("b")];
        let qs_ba = vec![QubitId::photon("b"), QubitId::photon("a")];
        let s = StateVector::from_terms(qs_ab, &[(&[0, 1], c(1.0, 0.0))]).unwrap();
        let t = StateVector::from_terms(qs_ba, &[(&[1, 0], c(1.0, 0.0))]).unwrap();
        assert!((s.fidelity(&t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_register_mismatch_errors() {
        let x = ket_r("x");
        let y = ket_r("y");
        assert_eq!(x.fidelity(&y).unwrap_err(), StateError::RegisterMismatch);
    }

    #[test]
    fn tensor_then_measure_recovers_factor() {
        let a = StateVector::single(QubitId::photon("a"), c(0.6, 0.1), c(0.75, -0.2)).unwrap();
        let joint = a.tensor(&ket_r("y")).unwrap();
        let (rec, post) = joint.measure(&QubitId::photon("y"), Basis::RightLeft, 0.9).unwrap();
        assert_eq!(rec.outcome, 0);
        assert!((rec.probability - 1.0).abs() < 1e-12);
        let a_unit = {
            let n = a.norm_sqr().sqrt();
            StateVector::single(
                QubitId::photon("a"),
                a.amplitude(&[0]).unwrap() / n,
                a.amplitude(&[1]).unwrap() / n,
            )
            .unwrap()
        };
        assert!((post.fidelity(&a_unit).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rename_checks_collisions() {
        let mut s = ket_r("x").tensor(&ket_l("y")).unwrap();
        assert!(s.rename(&QubitId::photon("y"), QubitId::photon("x")).is_err());
        s.rename(&QubitId::photon("y"), QubitId::photon("z")).unwrap();
        assert!(s.position(&QubitId::photon("z")).is_ok());
    }

    proptest! {
        #[test]
        fn unitaries_preserve_norm(th in 0.0..std::f64::consts::TAU,
                                   ph in 0.0..std::f64::consts::TAU,
                                   lm in 0.0..std::f64::consts::TAU,
                                   a_re in -1.0..1.0f64, a_im in -1.0..1.0f64,
                                   b_re in -1.0..1.0f64, b_im in -1.0..1.0f64) {
            // generic SU(2) element
            let (ct, st) = ((th / 2.0).cos(), (th / 2.0).sin());
            let m: SingleQubitOp = [
                [Complex64::from_polar(ct, 0.0), -Complex64::from_polar(st, lm)],
                [Complex64::from_polar(st, ph), Complex64::from_polar(ct, ph + lm)],
            ];
            let s = StateVector::single(QubitId::photon("x"), c(a_re, a_im), c(b_re, b_im)).unwrap()
                .tensor(&ket_r("y")).unwrap();
            let out = s.apply_single(&QubitId::photon("x"), &m).unwrap();
            prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn measurement_probabilities_complete(a_re in -1.0..1.0f64, a_im in -1.0..1.0f64,
                                              b_re in -1.0..1.0f64, b_im in -1.0..1.0f64) {
            let n = (a_re * a_re + a_im * a_im + b_re * b_re + b_im * b_im).sqrt();
            prop_assume!(n > 1e-3);
            let s = StateVector::single(
                QubitId::photon("x"),
                c(a_re / n, a_im / n),
                c(b_re / n, b_im / n),
            ).unwrap();
            for basis in [Basis::RightLeft, Basis::Diagonal] {
                let (r0, _) = s.measure(&QubitId::photon("x"), basis, 0.0).unwrap();
                let p0 = if r0.outcome == 0 { r0.probability } else { 1.0 - r0.probability };
                let (r1, _) = s.measure(&QubitId::photon("x"), basis, 0.999_999_999).unwrap();
                let p1 = if r1.outcome == 1 { r1.probability } else { 1.0 - r1.probability };
                prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn fidelity_symmetric_and_phase_invariant(a_re in -1.0..1.0f64, a_im in -1.0..1.0f64,
                                                  b_re in -1.0..1.0f64, b_im in -1.0..1.0f64,
                                                  phase in 0.0..std::f64::consts::TAU) {
            let n = (a_re * a_re + a_im * a_im + b_re * b_re + b_im * b_im).sqrt();
            prop_assume!(n > 1e-3);
            let x = StateVector::single(QubitId::photon("x"), c(a_re, a_im), c(b_re, b_im)).unwrap();
            let y = StateVector::single(QubitId::photon("x"), c(0.8, 0.0), c(0.0, 0.6)).unwrap();
            let f_xy = x.fidelity(&y).unwrap();
            let f_yx = y.fidelity(&x).unwrap();
            prop_assert!((f_xy - f_yx).abs() < 1e-12);
            let ph = Complex64::from_polar(1.0, phase);
            let xp = StateVector::single(
                QubitId::photon("x"),
                ph * x.amplitude(&[0]).unwrap(),
                ph * x.amplitude(&[1]).unwrap(),
            ).unwrap();
            prop_assert!((xp.fidelity(&y).unwrap() - f_xy).abs() < 1e-12);
        }
    }
}
