//! Bell-product expansion of encoded GHZ pairs.
//!
//! Expanding `(U_0 ⊗ ... ⊗ U_{M-1}) GHZ ⊗ GHZ` over the measured pairs
//! `(k, k+M+1)` gives the swapping identity: with identity encoding only
//! patterns that are all-Φ or all-Ψ with an even number of minus outcomes
//! appear, each with coefficient `2^{-(M+1)/2}`; an encoding operator acts on
//! its sender's Bell factor through [`PauliOp::bell_action`], signs included.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{check_parties, encoded_state, measurement_pairs, OperatorTuple};
use crate::qsim::{Amplitude, BellOutcome, PauliOp, StateVector};
use crate::scalar::Real;

/// One summand `coefficient · |pattern_0> ⊗ ... ⊗ |pattern_{P-1}>`.
#[derive(Clone, Debug, PartialEq)]
pub struct BellProductTerm<T> {
    pub pattern: Vec<BellOutcome>,
    pub coefficient: Amplitude<T>,
}

fn validate_pairs(num_qubits: usize, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen = vec![false; num_qubits];
    for &(a, b) in pairs {
        for q in [a, b] {
            if q >= num_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    num_qubits,
                });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::Pairing(format!(
                    "qubit {q} appears in more than one pair"
                )));
            }
        }
    }
    if let Some(q) = seen.iter().position(|s| !s) {
        return Err(Error::Pairing(format!(
            "qubit {q} is not covered by any pair"
        )));
    }
    Ok(())
}

fn pair_index<T: Real>(
    state: &StateVector<T>,
    pairs: &[(usize, usize)],
    pattern: &[BellOutcome],
) -> usize {
    pairs
        .iter()
        .zip(pattern)
        .fold(0, |idx, (&(qa, qb), outcome)| {
            let k = outcome.index();
            let mut idx = idx;
            if k & 2 != 0 {
                idx |= state.mask(qa);
            }
            if k & 1 != 0 {
                idx |= state.mask(qb);
            }
            idx
        })
}

/// Changes every pair to (`inverse == false`) or from the Bell basis. In
/// Bell coordinates the pair's bits `(qa, qb)` hold the outcome index
/// `2·qa + qb` in [`BellOutcome::ALL`] order.
fn bell_transform<T: Real>(
    num_qubits: usize,
    amplitudes: &mut [Amplitude<T>],
    pairs: &[(usize, usize)],
    inverse: bool,
) {
    let h = T::lit(0.5).sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    for &(qa, qb) in pairs {
        let ma = 1usize << (num_qubits - 1 - qa);
        let mb = 1usize << (num_qubits - 1 - qb);
        for base in (0..amplitudes.len()).filter(|i| i & (ma | mb) == 0) {
            let block = [base, base | mb, base | ma, base | ma | mb];
            let input = block.map(|i| amplitudes[i]);
            let mut output = [zero; 4];
            for (k, outcome) in BellOutcome::ALL.iter().enumerate() {
                for (j, &s) in outcome.signs().iter().enumerate() {
                    if s == 0 {
                        continue;
                    }
                    let w = h * T::lit(f64::from(s));
                    if inverse {
                        output[j] = output[j] + input[k] * w;
                    } else {
                        output[k] = output[k] + input[j] * w;
                    }
                }
            }
            for (&i, v) in block.iter().zip(output) {
                amplitudes[i] = v;
            }
        }
    }
}

/// Nonzero coefficients of `state` over products of Bell states on `pairs`,
/// sorted lexicographically by pattern. Pairs must partition the register.
pub fn bell_product_expansion<T: Real>(
    state: &StateVector<T>,
    pairs: &[(usize, usize)],
) -> Result<Vec<BellProductTerm<T>>> {
    validate_pairs(state.num_qubits(), pairs)?;
    let mut coords = state.amplitudes().to_vec();
    bell_transform(state.num_qubits(), &mut coords, pairs, false);
    let mut terms = Vec::new();
    let mut pattern = vec![BellOutcome::PhiPlus; pairs.len()];
    for code in 0..1usize << (2 * pairs.len()) {
        for (p, slot) in pattern.iter_mut().enumerate() {
            *slot = BellOutcome::from_index(code >> (2 * (pairs.len() - 1 - p)));
        }
        let c = coords[pair_index(state, pairs, &pattern)];
        if c.norm() > T::tolerance() {
            terms.push(BellProductTerm {
                pattern: pattern.clone(),
                coefficient: c,
            });
        }
    }
    Ok(terms)
}

/// Inverse of [`bell_product_expansion`]. The result is not renormalised.
pub fn reconstruct<T: Real>(
    terms: &[BellProductTerm<T>],
    pairs: &[(usize, usize)],
    num_qubits: usize,
) -> Result<StateVector<T>> {
    validate_pairs(num_qubits, pairs)?;
    let template = StateVector::<T>::basis(num_qubits, 0)?;
    let mut coords = vec![Complex::new(T::zero(), T::zero()); 1 << num_qubits];
    for term in terms {
        if term.pattern.len() != pairs.len() {
            return Err(Error::Pairing(format!(
                "pattern of length {} for {} pairs",
                term.pattern.len(),
                pairs.len()
            )));
        }
        let idx = pair_index(&template, pairs, &term.pattern);
        coords[idx] = coords[idx] + term.coefficient;
    }
    bell_transform(num_qubits, &mut coords, pairs, true);
    Ok(StateVector::from_raw(num_qubits, coords))
}

/// The sixteen patterns of the four-party identity expansion, each with
/// coefficient 1/4, in sender A, B, C, central order.
pub const QUARTET_IDENTITY_PATTERNS: [[BellOutcome; 4]; 16] = {
    use BellOutcome::*;
    [
        [PhiPlus, PhiPlus, PhiPlus, PhiPlus],
        [PhiPlus, PhiPlus, PhiMinus, PhiMinus],
        [PhiPlus, PhiMinus, PhiPlus, PhiMinus],
        [PhiPlus, PhiMinus, PhiMinus, PhiPlus],
        [PhiMinus, PhiPlus, PhiPlus, PhiMinus],
        [PhiMinus, PhiPlus, PhiMinus, PhiPlus],
        [PhiMinus, PhiMinus, PhiPlus, PhiPlus],
        [PhiMinus, PhiMinus, PhiMinus, PhiMinus],
        [PsiPlus, PsiPlus, PsiPlus, PsiPlus],
        [PsiPlus, PsiPlus, PsiMinus, PsiMinus],
        [PsiPlus, PsiMinus, PsiPlus, PsiMinus],
        [PsiPlus, PsiMinus, PsiMinus, PsiPlus],
        [PsiMinus, PsiPlus, PsiPlus, PsiMinus],
        [PsiMinus, PsiPlus, PsiMinus, PsiPlus],
        [PsiMinus, PsiMinus, PsiPlus, PsiPlus],
        [PsiMinus, PsiMinus, PsiMinus, PsiMinus],
    ]
};

/// Identity-encoding terms for `M` senders generated from the parity law:
/// all-Φ or all-Ψ, even number of minus outcomes, coefficient
/// `2^{-(M+1)/2}`. Sorted by pattern.
pub fn identity_terms<T: Real>(parties: usize) -> Vec<BellProductTerm<T>> {
    let n = parties + 1;
    let coefficient = Complex::new(T::lit(2f64.powf(-(n as f64) / 2.0)), T::zero());
    let mut terms = Vec::with_capacity(1 << n);
    for phi in [true, false] {
        for signs in 0..1usize << n {
            if signs.count_ones() % 2 != 0 {
                continue;
            }
            let pattern = (0..n)
                .map(|k| {
                    let minus = (signs >> (n - 1 - k)) & 1 == 1;
                    match (phi, minus) {
                        (true, false) => BellOutcome::PhiPlus,
                        (true, true) => BellOutcome::PhiMinus,
                        (false, false) => BellOutcome::PsiPlus,
                        (false, true) => BellOutcome::PsiMinus,
                    }
                })
                .collect();
            terms.push(BellProductTerm {
                pattern,
                coefficient,
            });
        }
    }
    terms.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    terms
}

/// Applies each sender's operator to its Bell factor, tracking signs.
pub fn transform_terms<T: Real>(
    terms: &[BellProductTerm<T>],
    ops: &OperatorTuple,
) -> Vec<BellProductTerm<T>> {
    let ops: Vec<PauliOp> = ops.ops().collect();
    let mut out: Vec<BellProductTerm<T>> = terms
        .iter()
        .map(|term| {
            let mut coefficient = term.coefficient;
            let pattern = term
                .pattern
                .iter()
                .enumerate()
                .map(|(k, &b)| match ops.get(k) {
                    Some(op) => {
                        let (sign, image) = op.bell_action(b);
                        if sign < 0 {
                            coefficient = -coefficient;
                        }
                        image
                    }
                    None => b,
                })
                .collect();
            BellProductTerm {
                pattern,
                coefficient,
            }
        })
        .collect();
    out.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport<T> {
    pub parties: usize,
    pub operators: OperatorTuple,
    pub passed: bool,
    pub term_count: usize,
    pub expected_term_count: usize,
    /// Largest coefficient modulus of the expansion.
    pub modulus: T,
    /// All nonzero coefficients share one modulus.
    pub uniform_modulus: bool,
    /// `Σ |coefficient|²`.
    pub parseval: T,
    /// Largest amplitude difference between the directly computed state and
    /// the predicted Bell-product sum.
    pub max_deviation: T,
}

fn terms_match<T: Real>(a: &[BellProductTerm<T>], b: &[BellProductTerm<T>]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.pattern == y.pattern && (x.coefficient - y.coefficient).norm() <= T::tolerance()
        })
}

fn verify_against<T: Real>(
    ops: &OperatorTuple,
    predicted: Vec<BellProductTerm<T>>,
) -> Result<VerificationReport<T>> {
    let parties = ops.parties();
    let pairs = measurement_pairs(parties);
    let lhs = encoded_state::<T>(ops)?;
    let rhs = reconstruct(&predicted, &pairs, lhs.num_qubits())?;
    let max_deviation = lhs.max_deviation(&rhs);
    let expansion = bell_product_expansion(&lhs, &pairs)?;

    let moduli: Vec<T> = expansion.iter().map(|t| t.coefficient.norm()).collect();
    let modulus = moduli.iter().copied().fold(T::zero(), T::max);
    let uniform_modulus = moduli
        .iter()
        .all(|&m| (m - modulus).abs() <= T::tolerance());
    let parseval: T = moduli.iter().map(|&m| m * m).sum();
    let expected_term_count = 1usize << (parties + 1);
    let tol = T::tolerance();

    let passed = max_deviation <= tol
        && expansion.len() == expected_term_count
        && uniform_modulus
        && (T::count(expansion.len()) * modulus * modulus - T::one()).abs() <= tol
        && (parseval - T::one()).abs() <= tol
        && terms_match(&expansion, &predicted);

    Ok(VerificationReport {
        parties,
        operators: ops.clone(),
        passed,
        term_count: expansion.len(),
        expected_term_count,
        modulus,
        uniform_modulus,
        parseval,
        max_deviation,
    })
}

/// Four-party check against the tabulated sixteen-term expansion.
pub fn verify_quartet<T: Real>(ops: &OperatorTuple) -> Result<VerificationReport<T>> {
    if ops.parties() != 3 {
        return Err(Error::WidthMismatch {
            expected: 3,
            found: ops.parties(),
        });
    }
    let quarter = Complex::new(T::lit(0.25), T::zero());
    let table: Vec<BellProductTerm<T>> = QUARTET_IDENTITY_PATTERNS
        .iter()
        .map(|p| BellProductTerm {
            pattern: p.to_vec(),
            coefficient: quarter,
        })
        .collect();
    verify_against(ops, transform_terms(&table, ops))
}

/// Any-`M` check against the parity-law expansion.
pub fn verify_general<T: Real>(
    parties: usize,
    ops: &OperatorTuple,
) -> Result<VerificationReport<T>> {
    check_parties(parties)?;
    if ops.parties() != parties {
        return Err(Error::WidthMismatch {
            expected: parties,
            found: ops.parties(),
        });
    }
    verify_against(ops, transform_terms(&identity_terms(parties), ops))
}
