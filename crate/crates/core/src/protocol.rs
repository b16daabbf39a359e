//! Session execution and central-party decoding.
//!
//! Register layout for `M` senders: the first GHZ state occupies qubits
//! `0..=M` (senders `0..M`, central party `M`), the second occupies
//! `M+1..=2M+1`. Party `k` Bell-measures the pair `(k, k+M+1)`. Senders
//! encode on their particle of the first GHZ state only; senders measure in
//! index order and the central party measures last.
//!
//! Sender 0 is the *leader* with the four-operator set `{I, X, iY, Z}` and
//! two message bits; senders `1..M` are *followers* restricted to `{I, X}`
//! with one bit each.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qsim::{
    apply_single_qubit, bell_measure, bell_probabilities, bell_project, make_ghz, tensor,
};
use crate::qsim::{BellOutcome, PauliOp, StateVector};
use crate::scalar::Real;
use crate::MAX_PARTIES;

pub(crate) fn check_parties(parties: usize) -> Result<()> {
    if !(2..=MAX_PARTIES).contains(&parties) {
        return Err(Error::PartyCount {
            parties,
            min: 2,
            max: MAX_PARTIES,
        });
    }
    Ok(())
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// Classical payload of one session: two leader bits and one bit per
/// follower. Written `ij|l|m|...`, e.g. `10|1|0` for `M = 3`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    leader_bits: u8,
    follower_bits: Vec<bool>,
}

impl Message {
    pub fn new(leader_bits: u8, follower_bits: Vec<bool>) -> Result<Self> {
        if leader_bits > 3 {
            return Err(Error::InvalidMessage(format!(
                "leader bits {leader_bits} do not fit in two bits"
            )));
        }
        check_parties(follower_bits.len() + 1)?;
        Ok(Message {
            leader_bits,
            follower_bits,
        })
    }

    pub fn leader_bits(&self) -> u8 {
        self.leader_bits
    }

    pub fn follower_bits(&self) -> &[bool] {
        &self.follower_bits
    }

    pub fn parties(&self) -> usize {
        self.follower_bits.len() + 1
    }

    /// Always `parties() + 1`.
    pub fn bit_count(&self) -> usize {
        self.follower_bits.len() + 2
    }

    /// Position in [`Message::all`] order.
    pub fn index(&self) -> usize {
        self.follower_bits
            .iter()
            .fold(self.leader_bits as usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn from_index(parties: usize, index: usize) -> Result<Self> {
        check_parties(parties)?;
        if index >= 1 << (parties + 1) {
            return Err(Error::InvalidMessage(format!(
                "index {index} out of range for M={parties}"
            )));
        }
        let followers = parties - 1;
        let follower_bits = (0..followers)
            .map(|k| (index >> (followers - 1 - k)) & 1 == 1)
            .collect();
        Ok(Message {
            leader_bits: (index >> followers) as u8,
            follower_bits,
        })
    }

    /// All `2^(M+1)` messages in index order.
    pub fn all(parties: usize) -> Result<Vec<Message>> {
        check_parties(parties)?;
        (0..1usize << (parties + 1))
            .map(|i| Message::from_index(parties, i))
            .collect()
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.leader_bits)?;
        for &b in &self.follower_bits {
            write!(f, "|{}", b as u8)?;
        }
        Ok(())
    }
}

impl FromStr for Message {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidMessage(format!("cannot parse `{s}` (expected e.g. 10|1|0)"));
        let mut parts = s.trim().split('|');
        let leader = parts.next().ok_or_else(bad)?;
        if leader.len() != 2 {
            return Err(bad());
        }
        let leader_bits = u8::from_str_radix(leader, 2).map_err(|_| bad())?;
        let follower_bits = parts
            .map(|p| match p {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()?;
        Message::new(leader_bits, follower_bits)
    }
}

string_serde!(Message);

/// Joint encoding operation `leader ⊗ follower_1 ⊗ ... ⊗ follower_{M-1}`.
/// Written `(iY,X,I)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorTuple {
    leader: PauliOp,
    followers: Vec<PauliOp>,
}

impl OperatorTuple {
    pub fn new(leader: PauliOp, followers: Vec<PauliOp>) -> Result<Self> {
        check_parties(followers.len() + 1)?;
        if let Some(op) = followers.iter().find(|op| !op.is_follower_op()) {
            return Err(Error::InvalidOperators(format!(
                "follower operator {op} is not in {{I, X}}"
            )));
        }
        Ok(OperatorTuple { leader, followers })
    }

    pub fn identity(parties: usize) -> Result<Self> {
        OperatorTuple::new(PauliOp::I, vec![PauliOp::I; parties.saturating_sub(1)])
    }

    pub fn leader(&self) -> PauliOp {
        self.leader
    }

    pub fn followers(&self) -> &[PauliOp] {
        &self.followers
    }

    pub fn parties(&self) -> usize {
        self.followers.len() + 1
    }

    /// Operators in sender order, leader first.
    pub fn ops(&self) -> impl Iterator<Item = PauliOp> + '_ {
        std::iter::once(self.leader).chain(self.followers.iter().copied())
    }

    /// All `4 · 2^(M-1)` admissible tuples, ordered leader-major.
    pub fn all(parties: usize) -> Result<Vec<OperatorTuple>> {
        check_parties(parties)?;
        let followers = parties - 1;
        let mut out = Vec::with_capacity(4 << followers);
        for leader in PauliOp::ALL {
            for mask in 0..1usize << followers {
                let fs = (0..followers)
                    .map(|k| PauliOp::FOLLOWER_SET[(mask >> (followers - 1 - k)) & 1])
                    .collect();
                out.push(OperatorTuple {
                    leader,
                    followers: fs,
                });
            }
        }
        Ok(out)
    }
}

impl fmt::Display for OperatorTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<String> = self.ops().map(|op| op.to_string()).collect();
        write!(f, "({})", ops.join(","))
    }
}

impl FromStr for OperatorTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let ops = inner
            .split(',')
            .map(|t| t.parse::<PauliOp>().map_err(Error::InvalidOperators))
            .collect::<Result<Vec<_>>>()?;
        let (leader, followers) = ops
            .split_first()
            .ok_or_else(|| Error::InvalidOperators("empty operator tuple".into()))?;
        OperatorTuple::new(*leader, followers.to_vec())
    }
}

string_serde!(OperatorTuple);

/// Per-sender bijections from message bits to encoding operators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodingScheme {
    parties: usize,
    leader_map: [PauliOp; 4],
    follower_maps: Vec<[PauliOp; 2]>,
}

impl EncodingScheme {
    /// `leader_map[bits]` is the leader's operator for the two-bit value
    /// `bits`; `follower_maps[k][bit]` likewise for follower `k+1`.
    pub fn new(
        parties: usize,
        leader_map: [PauliOp; 4],
        follower_maps: Vec<[PauliOp; 2]>,
    ) -> Result<Self> {
        check_parties(parties)?;
        if follower_maps.len() != parties - 1 {
            return Err(Error::NotBijective(format!(
                "expected {} follower maps for M={parties}, got {}",
                parties - 1,
                follower_maps.len()
            )));
        }
        for op in PauliOp::ALL {
            if !leader_map.contains(&op) {
                return Err(Error::NotBijective(format!(
                    "leader map [{}] never uses {op}",
                    join_ops(&leader_map)
                )));
            }
        }
        for (k, map) in follower_maps.iter().enumerate() {
            if map.iter().any(|op| !op.is_follower_op()) || map[0] == map[1] {
                return Err(Error::NotBijective(format!(
                    "follower {} map [{}] is not a bijection onto {{I, X}}",
                    k + 1,
                    join_ops(map)
                )));
            }
        }
        Ok(EncodingScheme {
            parties,
            leader_map,
            follower_maps,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn leader_map(&self) -> &[PauliOp; 4] {
        &self.leader_map
    }

    pub fn follower_maps(&self) -> &[[PauliOp; 2]] {
        &self.follower_maps
    }

    fn check_width(&self, parties: usize) -> Result<()> {
        if parties != self.parties {
            return Err(Error::WidthMismatch {
                expected: self.parties,
                found: parties,
            });
        }
        Ok(())
    }

    pub fn encode(&self, msg: &Message) -> Result<OperatorTuple> {
        self.check_width(msg.parties())?;
        let followers = self
            .follower_maps
            .iter()
            .zip(msg.follower_bits())
            .map(|(map, &bit)| map[bit as usize])
            .collect();
        Ok(OperatorTuple {
            leader: self.leader_map[msg.leader_bits() as usize],
            followers,
        })
    }

    /// Inverse of [`EncodingScheme::encode`].
    pub fn message_for(&self, ops: &OperatorTuple) -> Result<Message> {
        self.check_width(ops.parties())?;
        let leader_bits = self
            .leader_map
            .iter()
            .position(|&op| op == ops.leader())
            .expect("leader map is a bijection") as u8;
        let follower_bits = self
            .follower_maps
            .iter()
            .zip(ops.followers())
            .map(|(map, op)| map[1] == *op)
            .collect();
        Message::new(leader_bits, follower_bits)
    }

    /// Content hash of the canonical scheme-file text (16 hex digits).
    pub fn id(&self) -> String {
        let digest = Sha256::digest(crate::scheme_file::to_text(self).as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn join_ops(ops: &[PauliOp]) -> String {
    ops.iter()
        .map(|o| o.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Leader `00→I, 01→X, 10→iY, 11→Z`; every follower `0→I, 1→X`.
pub fn standard_scheme(parties: usize) -> Result<EncodingScheme> {
    check_parties(parties)?;
    EncodingScheme::new(
        parties,
        [PauliOp::I, PauliOp::X, PauliOp::IY, PauliOp::Z],
        vec![[PauliOp::I, PauliOp::X]; parties - 1],
    )
}

pub fn encode_message(scheme: &EncodingScheme, msg: &Message) -> Result<OperatorTuple> {
    scheme.encode(msg)
}

/// Full tuple of Bell outcomes: one per sender plus the central party's.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub sender_outcomes: Vec<BellOutcome>,
    pub central_outcome: BellOutcome,
}

impl OutcomeRecord {
    pub fn new(sender_outcomes: Vec<BellOutcome>, central_outcome: BellOutcome) -> Self {
        OutcomeRecord {
            sender_outcomes,
            central_outcome,
        }
    }

    /// Outcomes in measurement order, central party last.
    pub fn pattern(&self) -> Vec<BellOutcome> {
        let mut p = self.sender_outcomes.clone();
        p.push(self.central_outcome);
        p
    }
}

impl fmt::Display for OutcomeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", format_outcomes(&self.sender_outcomes))?;
        write!(f, "; {})", self.central_outcome)
    }
}

pub fn format_outcomes(outcomes: &[BellOutcome]) -> String {
    outcomes
        .iter()
        .map(|o| o.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Measured pairs in protocol order: senders `0..M`, then the central party.
pub fn measurement_pairs(parties: usize) -> Vec<(usize, usize)> {
    (0..=parties).map(|k| (k, k + parties + 1)).collect()
}

/// `ops` applied to the senders' particles of `GHZ_{M+1} ⊗ GHZ_{M+1}`.
pub fn encoded_state<T: Real>(ops: &OperatorTuple) -> Result<StateVector<T>> {
    let ghz = make_ghz::<T>(ops.parties() + 1)?;
    let mut state = tensor(&ghz, &ghz)?;
    for (qubit, op) in ops.ops().enumerate() {
        if op != PauliOp::I {
            state = apply_single_qubit(&state, qubit, op)?;
        }
    }
    Ok(state)
}

/// Exact joint outcome distribution for one operator tuple, by chaining
/// projections in protocol order. Zero-probability branches are dropped.
pub fn outcome_distribution<T: Real>(ops: &OperatorTuple) -> Result<BTreeMap<OutcomeRecord, T>> {
    let state = encoded_state::<T>(ops)?;
    let pairs = measurement_pairs(ops.parties());
    let mut out = BTreeMap::new();
    let mut prefix = Vec::with_capacity(pairs.len());
    branch(&state, &pairs, &mut prefix, T::one(), &mut out)?;
    Ok(out)
}

fn branch<T: Real>(
    state: &StateVector<T>,
    pairs: &[(usize, usize)],
    prefix: &mut Vec<BellOutcome>,
    probability: T,
    out: &mut BTreeMap<OutcomeRecord, T>,
) -> Result<()> {
    let Some((&(qa, qb), rest)) = pairs.split_first() else {
        let (central, senders) = prefix.split_last().expect("at least one pair measured");
        out.insert(OutcomeRecord::new(senders.to_vec(), *central), probability);
        return Ok(());
    };
    let probs = bell_probabilities(state, qa, qb)?;
    for (outcome, p) in BellOutcome::ALL.into_iter().zip(probs) {
        if p < T::tolerance() {
            continue;
        }
        let projection = bell_project(state, qa, qb, outcome)?;
        if let Some(collapsed) = projection.collapsed {
            prefix.push(outcome);
            branch(
                &collapsed,
                rest,
                prefix,
                probability * projection.probability,
                out,
            )?;
            prefix.pop();
        }
    }
    Ok(())
}

/// Exact map from outcome records to the unique message producing them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderTable {
    parties: usize,
    scheme_id: String,
    entries: BTreeMap<OutcomeRecord, Message>,
}

impl DecoderTable {
    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn scheme_id(&self) -> &str {
        &self.scheme_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<OutcomeRecord, Message> {
        &self.entries
    }

    pub fn decode(
        &self,
        sender_outcomes: &[BellOutcome],
        central_outcome: BellOutcome,
    ) -> Result<Message> {
        let key = OutcomeRecord::new(sender_outcomes.to_vec(), central_outcome);
        self.entries
            .get(&key)
            .cloned()
            .ok_or_else(|| Error::UnknownOutcome(key.to_string()))
    }

    /// Fails unless this table was built from `scheme`.
    pub fn check_scheme(&self, scheme: &EncodingScheme) -> Result<()> {
        let id = scheme.id();
        if id != self.scheme_id {
            return Err(Error::SchemeMismatch {
                table: self.scheme_id.clone(),
                scheme: id,
            });
        }
        Ok(())
    }
}

/// Enumerates every message's exact outcome support and inverts it.
pub fn build_decoder(scheme: &EncodingScheme) -> Result<DecoderTable> {
    let messages = Message::all(scheme.parties())?;
    let supports = messages
        .par_iter()
        .map(|msg| {
            let ops = scheme.encode(msg)?;
            outcome_distribution::<f64>(&ops).map(|d| (msg.clone(), d))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut entries = BTreeMap::new();
    for (msg, dist) in supports {
        for key in dist.into_keys() {
            if let Some(prev) = entries.get(&key) {
                return Err(Error::Decodability {
                    first: format!("{prev}"),
                    second: msg.to_string(),
                    key: key.to_string(),
                });
            }
            entries.insert(key, msg.clone());
        }
    }
    Ok(DecoderTable {
        parties: scheme.parties(),
        scheme_id: scheme.id(),
        entries,
    })
}

pub fn decode(
    table: &DecoderTable,
    sender_outcomes: &[BellOutcome],
    central_outcome: BellOutcome,
) -> Result<Message> {
    table.decode(sender_outcomes, central_outcome)
}

/// Seed of one trial: trial `k` uses ChaCha stream `k` of `seed`, so any
/// trial can be replayed on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeed {
    pub seed: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(seed: u64, trial: u64) -> Self {
        TrialSeed { seed, trial }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trial);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript<T> {
    pub message: Message,
    pub operators: OperatorTuple,
    pub sender_outcomes: Vec<BellOutcome>,
    pub central_outcome: BellOutcome,
    pub joint_probability: T,
    pub decoded: Message,
    pub seed: u64,
    pub trial: u64,
}

/// Sampled outcome of one session before decoding.
#[derive(Clone, Debug)]
pub struct SessionOutcome<T> {
    pub operators: OperatorTuple,
    pub record: OutcomeRecord,
    /// Product of the sequential conditional probabilities.
    pub joint_probability: T,
}

/// Prepares, encodes and measures one session, sampling with `rng`.
pub fn simulate_session<T: Real, R: Rng + ?Sized>(
    scheme: &EncodingScheme,
    msg: &Message,
    rng: &mut R,
) -> Result<SessionOutcome<T>> {
    let operators = scheme.encode(msg)?;
    let mut state = encoded_state::<T>(&operators)?;
    let mut joint_probability = T::one();
    let mut outcomes = Vec::with_capacity(scheme.parties() + 1);
    for (qa, qb) in measurement_pairs(scheme.parties()) {
        let m = bell_measure(&state, qa, qb, rng)?;
        joint_probability = joint_probability * m.probability;
        outcomes.push(m.outcome);
        state = m.collapsed;
    }
    let central_outcome = outcomes.pop().expect("central party measured");
    Ok(SessionOutcome {
        operators,
        record: OutcomeRecord::new(outcomes, central_outcome),
        joint_probability,
    })
}

/// A scheme paired with its decoder table.
#[derive(Clone, Debug)]
pub struct Protocol {
    scheme: EncodingScheme,
    decoder: DecoderTable,
}

impl Protocol {
    pub fn new(scheme: EncodingScheme) -> Result<Self> {
        let decoder = build_decoder(&scheme)?;
        Ok(Protocol { scheme, decoder })
    }

    pub fn with_decoder(scheme: EncodingScheme, decoder: DecoderTable) -> Result<Self> {
        decoder.check_scheme(&scheme)?;
        Ok(Protocol { scheme, decoder })
    }

    pub fn scheme(&self) -> &EncodingScheme {
        &self.scheme
    }

    pub fn decoder(&self) -> &DecoderTable {
        &self.decoder
    }

    pub fn run_session<T: Real>(
        &self,
        msg: &Message,
        seed: TrialSeed,
    ) -> Result<SessionTranscript<T>> {
        let mut rng = seed.rng();
        self.run_with_rng(msg, seed, &mut rng)
    }

    /// Draws a uniformly random message from the trial stream, then runs it.
    pub fn run_trial<T: Real>(&self, seed: TrialSeed) -> Result<SessionTranscript<T>> {
        let mut rng = seed.rng();
        let index = rng.random_range(0..1usize << (self.scheme.parties() + 1));
        let msg = Message::from_index(self.scheme.parties(), index)?;
        self.run_with_rng(&msg, seed, &mut rng)
    }

    fn run_with_rng<T: Real>(
        &self,
        msg: &Message,
        seed: TrialSeed,
        rng: &mut ChaCha8Rng,
    ) -> Result<SessionTranscript<T>> {
        let outcome = simulate_session::<T, _>(&self.scheme, msg, rng)?;
        let decoded = self.decoder.decode(
            &outcome.record.sender_outcomes,
            outcome.record.central_outcome,
        )?;
        Ok(SessionTranscript {
            message: msg.clone(),
            operators: outcome.operators,
            sender_outcomes: outcome.record.sender_outcomes,
            central_outcome: outcome.record.central_outcome,
            joint_probability: outcome.joint_probability,
            decoded,
            seed: seed.seed,
            trial: seed.trial,
        })
    }
}

/// One-shot session; builds the decoder table for `scheme` first.
pub fn run_session<T: Real>(
    scheme: &EncodingScheme,
    msg: &Message,
    seed: TrialSeed,
) -> Result<SessionTranscript<T>> {
    Protocol::new(scheme.clone())?.run_session(msg, seed)
}
