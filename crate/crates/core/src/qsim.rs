//! Dense statevector simulation for small qubit registers.
//!
//! Basis indices read the ket string big-endian: qubit 0 is the leftmost
//! symbol, so `|0100>` on four qubits is index 4. Measurements keep the full
//! register; the measured pair is left in the observed Bell state.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::MAX_QUBITS;

pub type Amplitude<T> = Complex<T>;

/// Encoding operator applied by a sender to one particle.
///
/// The matrices are the ket-bra forms `I = |0><0| + |1><1|`,
/// `X = |0><1| + |1><0|`, `iY = |0><1| - |1><0|`, `Z = |0><0| - |1><1|`.
/// All four are real.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    #[serde(rename = "iY")]
    IY,
    Z,
}

impl PauliOp {
    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::IY, PauliOp::Z];
    /// Operators a follower may use.
    pub const FOLLOWER_SET: [PauliOp; 2] = [PauliOp::I, PauliOp::X];

    /// Row-major matrix entries `[[<0|U|0>, <0|U|1>], [<1|U|0>, <1|U|1>]]`.
    pub const fn matrix(self) -> [[i8; 2]; 2] {
        match self {
            PauliOp::I => [[1, 0], [0, 1]],
            PauliOp::X => [[0, 1], [1, 0]],
            PauliOp::IY => [[0, 1], [-1, 0]],
            PauliOp::Z => [[1, 0], [0, -1]],
        }
    }

    /// Effect of this operator on the first qubit of a Bell pair:
    /// `(U ⊗ I)|b> = sign · |b'>`.
    pub const fn bell_action(self, outcome: BellOutcome) -> (i8, BellOutcome) {
        use BellOutcome::*;
        match (self, outcome) {
            (PauliOp::I, b) => (1, b),
            (PauliOp::X, PhiPlus) => (1, PsiPlus),
            (PauliOp::X, PhiMinus) => (-1, PsiMinus),
            (PauliOp::X, PsiPlus) => (1, PhiPlus),
            (PauliOp::X, PsiMinus) => (-1, PhiMinus),
            (PauliOp::IY, PhiPlus) => (1, PsiMinus),
            (PauliOp::IY, PhiMinus) => (-1, PsiPlus),
            (PauliOp::IY, PsiPlus) => (1, PhiMinus),
            (PauliOp::IY, PsiMinus) => (-1, PhiPlus),
            (PauliOp::Z, PhiPlus) => (1, PhiMinus),
            (PauliOp::Z, PhiMinus) => (1, PhiPlus),
            (PauliOp::Z, PsiPlus) => (1, PsiMinus),
            (PauliOp::Z, PsiMinus) => (1, PsiPlus),
        }
    }

    pub const fn is_follower_op(self) -> bool {
        matches!(self, PauliOp::I | PauliOp::X)
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliOp::I => "I",
            PauliOp::X => "X",
            PauliOp::IY => "iY",
            PauliOp::Z => "Z",
        })
    }
}

impl FromStr for PauliOp {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "I" => Ok(PauliOp::I),
            "X" => Ok(PauliOp::X),
            "iY" => Ok(PauliOp::IY),
            "Z" => Ok(PauliOp::Z),
            other => Err(format!(
                "unknown operator `{other}` (expected I, X, iY or Z)"
            )),
        }
    }
}

/// One of the four Bell states, also used as a Bell-measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellOutcome {
    #[serde(rename = "Phi+")]
    PhiPlus,
    #[serde(rename = "Phi-")]
    PhiMinus,
    #[serde(rename = "Psi+")]
    PsiPlus,
    #[serde(rename = "Psi-")]
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn from_index(index: usize) -> BellOutcome {
        Self::ALL[index & 3]
    }

    /// Unnormalised coefficients on `|00>, |01>, |10>, |11>`; divide by √2.
    pub const fn signs(self) -> [i8; 4] {
        match self {
            BellOutcome::PhiPlus => [1, 0, 0, 1],
            BellOutcome::PhiMinus => [1, 0, 0, -1],
            BellOutcome::PsiPlus => [0, 1, 1, 0],
            BellOutcome::PsiMinus => [0, 1, -1, 0],
        }
    }

    pub const fn is_phi(self) -> bool {
        matches!(self, BellOutcome::PhiPlus | BellOutcome::PhiMinus)
    }

    pub const fn is_minus(self) -> bool {
        matches!(self, BellOutcome::PhiMinus | BellOutcome::PsiMinus)
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellOutcome::PhiPlus => "Phi+",
            BellOutcome::PhiMinus => "Phi-",
            BellOutcome::PsiPlus => "Psi+",
            BellOutcome::PsiMinus => "Psi-",
        })
    }
}

impl FromStr for BellOutcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "Phi+" | "Φ+" | "Φ⁺" | "PhiPlus" => Ok(BellOutcome::PhiPlus),
            "Phi-" | "Φ-" | "Φ⁻" | "PhiMinus" => Ok(BellOutcome::PhiMinus),
            "Psi+" | "Ψ+" | "Ψ⁺" | "PsiPlus" => Ok(BellOutcome::PsiPlus),
            "Psi-" | "Ψ-" | "Ψ⁻" | "PsiMinus" => Ok(BellOutcome::PsiMinus),
            other => Err(format!("unknown Bell outcome `{other}`")),
        }
    }
}

/// Normalised pure state of `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amplitudes: Vec<Amplitude<T>>,
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::ResourceLimit {
            requested: num_qubits,
            min: 1,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

impl<T: Real> StateVector<T> {
    /// Validates length, finiteness and normalisation.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude<T>>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "length {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_register(num_qubits)?;
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let state = StateVector {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(Error::InvalidState(format!("squared norm {norm} != 1")));
        }
        Ok(state)
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Basis state from a ket string such as `"0110"`.
    pub fn from_ket(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for c in bits.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::InvalidState(format!("bad ket string `{bits}`"))),
                };
        }
        Self::basis(bits.chars().count(), index)
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<Amplitude<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude<T>] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Amplitude<T> {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Amplitude<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Copy with the global phase fixed: the first amplitude whose modulus
    /// exceeds the tolerance becomes real and positive.
    pub fn canonical_phase(&self) -> Self {
        let tol = T::tolerance();
        let pivot = self.amplitudes.iter().find(|a| a.norm() > tol);
        let Some(pivot) = pivot else {
            return self.clone();
        };
        let phase = pivot.conj() / pivot.norm();
        StateVector {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    /// Largest amplitude-wise modulus difference. Infinite on width mismatch.
    pub fn max_deviation(&self, other: &Self) -> T {
        if self.num_qubits != other.num_qubits {
            return T::infinity();
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.max_deviation(other) <= T::tolerance()
    }

    pub fn approx_eq_up_to_phase(&self, other: &Self) -> bool {
        self.canonical_phase().approx_eq(&other.canonical_phase())
    }
}

/// `(|0...0> + |1...1>)/√2` on `n` qubits, `2 <= n <= MAX_QUBITS`.
pub fn make_ghz<T: Real>(n: usize) -> Result<StateVector<T>> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::ResourceLimit {
            requested: n,
            min: 2,
            max: MAX_QUBITS,
        });
    }
    let dim = 1usize << n;
    let h = T::lit(0.5).sqrt();
    let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
    amplitudes[0] = Complex::new(h, T::zero());
    amplitudes[dim - 1] = Complex::new(h, T::zero());
    Ok(StateVector::from_raw(n, amplitudes))
}

pub fn make_bell<T: Real>(kind: BellOutcome) -> StateVector<T> {
    let h = T::lit(0.5).sqrt();
    let amplitudes = kind
        .signs()
        .iter()
        .map(|&s| Complex::new(h * T::lit(f64::from(s)), T::zero()))
        .collect();
    StateVector::from_raw(2, amplitudes)
}

/// Applies `op` to `qubit`, identity elsewhere.
pub fn apply_single_qubit<T: Real>(
    state: &StateVector<T>,
    qubit: usize,
    op: PauliOp,
) -> Result<StateVector<T>> {
    state.check_qubit(qubit)?;
    let mask = state.mask(qubit);
    let m = op.matrix();
    let entry = |v: i8| T::lit(f64::from(v));
    let (m00, m01, m10, m11) = (
        entry(m[0][0]),
        entry(m[0][1]),
        entry(m[1][0]),
        entry(m[1][1]),
    );
    let mut out = state.amplitudes.clone();
    for i0 in (0..out.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (a0, a1) = (state.amplitudes[i0], state.amplitudes[i1]);
        out[i0] = a0 * m00 + a1 * m01;
        out[i1] = a0 * m10 + a1 * m11;
    }
    Ok(StateVector::from_raw(state.num_qubits, out))
}

/// `a ⊗ b`; `a`'s qubits come first.
pub fn tensor<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<StateVector<T>> {
    let n = a.num_qubits + b.num_qubits;
    check_register(n)?;
    let mut amplitudes = Vec::with_capacity(1 << n);
    for x in &a.amplitudes {
        for y in &b.amplitudes {
            amplitudes.push(x * y);
        }
    }
    Ok(StateVector::from_raw(n, amplitudes))
}

/// Result of projecting onto one Bell outcome.
#[derive(Clone, Debug)]
pub struct Projection<T> {
    pub probability: T,
    /// Normalised post-measurement state; absent for negligible probability.
    pub collapsed: Option<StateVector<T>>,
}

#[derive(Clone, Debug)]
pub struct Measurement<T> {
    pub outcome: BellOutcome,
    pub probability: T,
    pub collapsed: StateVector<T>,
}

fn pair_masks<T: Real>(state: &StateVector<T>, qa: usize, qb: usize) -> Result<(usize, usize)> {
    state.check_qubit(qa)?;
    state.check_qubit(qb)?;
    if qa == qb {
        return Err(Error::RepeatedQubit(qa));
    }
    Ok((state.mask(qa), state.mask(qb)))
}

/// Indices of `|00>, |01>, |10>, |11>` on the pair for every assignment of
/// the remaining qubits.
fn pair_blocks(dim: usize, ma: usize, mb: usize) -> impl Iterator<Item = [usize; 4]> {
    let (lo, hi) = if ma < mb { (ma, mb) } else { (mb, ma) };
    (0..dim / 4).map(move |r| {
        // spread r around the two cleared bit positions
        let low = r & (lo - 1);
        let mid = (r >> lo.trailing_zeros()) << (lo.trailing_zeros() + 1);
        let x = low | mid;
        let low = x & (hi - 1);
        let i = low | ((x >> hi.trailing_zeros()) << (hi.trailing_zeros() + 1));
        [i, i | mb, i | ma, i | ma | mb]
    })
}

fn bell_weights<T: Real>(outcome: BellOutcome) -> [T; 4] {
    let h = T::lit(0.5).sqrt();
    outcome.signs().map(|s| h * T::lit(f64::from(s)))
}

fn bell_overlap<T: Real>(
    amplitudes: &[Amplitude<T>],
    block: &[usize; 4],
    weights: &[T; 4],
) -> Amplitude<T> {
    block
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w != T::zero())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&i, &w)| {
            acc + amplitudes[i] * w
        })
}

/// Born probabilities of the four outcomes, in [`BellOutcome::ALL`] order.
pub fn bell_probabilities<T: Real>(state: &StateVector<T>, qa: usize, qb: usize) -> Result<[T; 4]> {
    let (ma, mb) = pair_masks(state, qa, qb)?;
    let weights = BellOutcome::ALL.map(bell_weights::<T>);
    let mut probs = [T::zero(); 4];
    for block in pair_blocks(state.amplitudes.len(), ma, mb) {
        for (p, w) in probs.iter_mut().zip(&weights) {
            *p = *p + bell_overlap(&state.amplitudes, &block, w).norm_sqr();
        }
    }
    Ok(probs)
}

/// Projects the pair `(qa, qb)` onto `outcome`.
pub fn bell_project<T: Real>(
    state: &StateVector<T>,
    qa: usize,
    qb: usize,
    outcome: BellOutcome,
) -> Result<Projection<T>> {
    let (ma, mb) = pair_masks(state, qa, qb)?;
    let weights = bell_weights::<T>(outcome);
    let overlaps: Vec<([usize; 4], Amplitude<T>)> = pair_blocks(state.amplitudes.len(), ma, mb)
        .map(|block| (block, bell_overlap(&state.amplitudes, &block, &weights)))
        .collect();
    let probability: T = overlaps.iter().map(|(_, c)| c.norm_sqr()).sum();
    if probability < T::tolerance() {
        return Ok(Projection {
            probability,
            collapsed: None,
        });
    }
    let scale = probability.sqrt().recip();
    let scaled = weights.map(|w| w * scale);
    let mut out = vec![Complex::new(T::zero(), T::zero()); state.amplitudes.len()];
    for (block, c) in overlaps {
        for (&i, &w) in block.iter().zip(&scaled) {
            out[i] = c * w;
        }
    }
    Ok(Projection {
        probability,
        collapsed: Some(StateVector::from_raw(state.num_qubits, out)),
    })
}

/// Samples a Bell measurement on `(qa, qb)` with Born probabilities.
pub fn bell_measure<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    qa: usize,
    qb: usize,
    rng: &mut R,
) -> Result<Measurement<T>> {
    let probs = bell_probabilities(state, qa, qb)?;
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    let mut chosen = None;
    for (outcome, &p) in BellOutcome::ALL.iter().zip(&probs) {
        if p < T::tolerance() {
            continue;
        }
        acc = acc + p;
        chosen = Some(*outcome);
        if u < acc {
            break;
        }
    }
    let outcome = chosen.ok_or_else(|| Error::InvalidState("state has zero norm".into()))?;
    let projection = bell_project(state, qa, qb, outcome)?;
    let collapsed = projection
        .collapsed
        .expect("sampled outcome has non-negligible probability");
    Ok(Measurement {
        outcome,
        probability: projection.probability,
        collapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type S = StateVector<f64>;
    const TOL: f64 = 1e-9;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn ghz_four_qubits() {
        let g: S = make_ghz(4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, a) in g.amplitudes().iter().enumerate() {
            let expected = if i == 0 || i == 15 { h } else { 0.0 };
            assert!((a - c(expected)).norm() < TOL, "index {i}");
        }
    }

    #[test]
    fn ghz_two_qubits_is_phi_plus() {
        let g: S = make_ghz(2).unwrap();
        assert!(g.approx_eq(&make_bell(BellOutcome::PhiPlus)));
    }

    #[test]
    fn ghz_five_qubits() {
        let g: S = make_ghz(5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.amplitude(0).re - h).abs() < TOL);
        assert!((g.amplitude(31).re - h).abs() < TOL);
        assert!((1..31).all(|i| g.amplitude(i).norm() == 0.0));
    }

    #[test]
    fn ghz_range_guard() {
        assert!(matches!(
            make_ghz::<f64>(1),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(matches!(
            make_ghz::<f64>(15),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(make_ghz::<f64>(14).is_ok());
    }

    #[test]
    fn bell_states_literal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi_m: S = make_bell(BellOutcome::PhiMinus);
        assert_eq!(phi_m.amplitudes(), &[c(h), c(0.0), c(0.0), c(-h)]);
        let psi_p: S = make_bell(BellOutcome::PsiPlus);
        assert_eq!(psi_p.amplitudes(), &[c(0.0), c(h), c(h), c(0.0)]);
        let phi_p: S = make_bell(BellOutcome::PhiPlus);
        let psi_m: S = make_bell(BellOutcome::PsiMinus);
        assert!(phi_p.inner(&psi_m).norm() < TOL);
    }

    #[test]
    fn bell_basis_orthonormal() {
        for a in BellOutcome::ALL {
            for b in BellOutcome::ALL {
                let ip = make_bell::<f64>(a).inner(&make_bell(b));
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - c(expected)).norm() < TOL);
            }
        }
    }

    #[test]
    fn single_qubit_examples() {
        let s = S::from_ket("0000").unwrap();
        let flipped = apply_single_qubit(&s, 0, PauliOp::X).unwrap();
        assert!(flipped.approx_eq(&S::from_ket("1000").unwrap()));

        let phi = make_bell::<f64>(BellOutcome::PhiPlus);
        let out = apply_single_qubit(&phi, 0, PauliOp::IY).unwrap();
        assert!(out.approx_eq(&make_bell(BellOutcome::PsiMinus)));

        let ghz: S = make_ghz(4).unwrap();
        let z = apply_single_qubit(&ghz, 0, PauliOp::Z).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut expected = vec![c(0.0); 16];
        expected[0] = c(h);
        expected[15] = c(-h);
        assert!(z.approx_eq(&S::from_amplitudes(expected).unwrap()));

        assert!(matches!(
            apply_single_qubit(&ghz, 4, PauliOp::X),
            Err(Error::QubitIndex {
                index: 4,
                num_qubits: 4
            })
        ));
    }

    #[test]
    fn bell_action_matches_matrices() {
        for op in PauliOp::ALL {
            for b in BellOutcome::ALL {
                let direct = apply_single_qubit(&make_bell::<f64>(b), 0, op).unwrap();
                let (sign, image) = op.bell_action(b);
                let mut expected = make_bell::<f64>(image);
                if sign < 0 {
                    expected = StateVector::from_raw(
                        2,
                        expected.amplitudes().iter().map(|a| -a).collect(),
                    );
                }
                assert!(direct.approx_eq(&expected), "{op} on {b}");
            }
        }
    }

    #[test]
    fn tensor_examples() {
        let zero = S::from_ket("0").unwrap();
        let one = S::from_ket("1").unwrap();
        assert!(tensor(&zero, &one)
            .unwrap()
            .approx_eq(&S::from_ket("01").unwrap()));

        let phi = make_bell::<f64>(BellOutcome::PhiPlus);
        let pp = tensor(&phi, &phi).unwrap();
        for (i, a) in pp.amplitudes().iter().enumerate() {
            let expected = if [0b0000, 0b0011, 0b1100, 0b1111].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!((a - c(expected)).norm() < TOL);
        }
        assert!((pp.norm_sqr() - 1.0).abs() < TOL);

        let big: S = make_ghz(8).unwrap();
        assert!(matches!(
            tensor(&big, &big),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn project_eigenstate() {
        let phi = make_bell::<f64>(BellOutcome::PhiPlus);
        let p = bell_project(&phi, 0, 1, BellOutcome::PhiPlus).unwrap();
        assert!((p.probability - 1.0).abs() < TOL);
        assert!(p.collapsed.unwrap().approx_eq(&phi));
        let q = bell_project(&phi, 0, 1, BellOutcome::PsiPlus).unwrap();
        assert!(q.probability < TOL && q.collapsed.is_none());
    }

    #[test]
    fn project_ghz_pair_half() {
        let g: S = make_ghz(4).unwrap();
        let gg = tensor(&g, &g).unwrap();
        let p = bell_project(&gg, 0, 4, BellOutcome::PhiPlus).unwrap();
        // each half of the pair is maximally mixed and independent
        assert!((p.probability - 0.25).abs() < TOL);
        let probs = bell_probabilities(&gg, 0, 4).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < TOL);
    }

    #[test]
    fn project_errors() {
        let g: S = make_ghz(3).unwrap();
        assert_eq!(
            bell_project(&g, 1, 1, BellOutcome::PhiPlus).unwrap_err(),
            Error::RepeatedQubit(1)
        );
        assert!(matches!(
            bell_project(&g, 0, 3, BellOutcome::PhiPlus),
            Err(Error::QubitIndex { .. })
        ));
    }

    #[test]
    fn measure_eigenstate_and_determinism() {
        let phi = make_bell::<f64>(BellOutcome::PhiPlus);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = bell_measure(&phi, 0, 1, &mut rng).unwrap();
            assert_eq!(m.outcome, BellOutcome::PhiPlus);
        }
        let g: S = make_ghz(3).unwrap();
        let gg = tensor(&g, &g).unwrap();
        let sample = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| bell_measure(&gg, 0, 3, &mut rng).unwrap().outcome)
                .collect::<Vec<_>>()
        };
        assert_eq!(sample(11), sample(11));
    }

    #[test]
    fn canonical_phase_removes_sign() {
        let phi = make_bell::<f64>(BellOutcome::PhiMinus);
        let neg = StateVector::from_raw(2, phi.amplitudes().iter().map(|a| -a).collect());
        assert!(!neg.approx_eq(&phi));
        assert!(neg.approx_eq_up_to_phase(&phi));
    }

    #[test]
    fn from_amplitudes_validation() {
        assert!(S::from_amplitudes(vec![c(1.0); 3]).is_err());
        assert!(S::from_amplitudes(vec![c(1.0), c(1.0)]).is_err());
        assert!(S::from_amplitudes(vec![c(f64::NAN), c(0.0)]).is_err());
        assert!(S::from_amplitudes(vec![c(0.0), c(1.0)]).is_ok());
    }

    #[test]
    fn pauli_and_bell_parse_roundtrip() {
        for op in PauliOp::ALL {
            assert_eq!(op.to_string().parse::<PauliOp>().unwrap(), op);
        }
        for b in BellOutcome::ALL {
            assert_eq!(b.to_string().parse::<BellOutcome>().unwrap(), b);
        }
        assert!("Y".parse::<PauliOp>().is_err());
    }
}
