//! What each observer learns about the message.
//!
//! Everything here is exact enumeration over the projective outcome
//! distributions, under a uniform prior on messages. The eavesdropper sees
//! the senders' public Bell outcomes; the central party additionally holds
//! its own outcome. Information is measured in bits.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{check_parties, outcome_distribution};
use crate::protocol::{EncodingScheme, Message, OperatorTuple, OutcomeRecord};
use crate::qsim::{BellOutcome, PauliOp};
use crate::scalar::Real;

/// Exact distribution over outcome records for one message.
pub type JointDistribution<T> = BTreeMap<OutcomeRecord, T>;

/// Distribution of each admissible operator tuple for `M` senders.
pub fn operator_distributions<T: Real>(
    parties: usize,
) -> Result<BTreeMap<OperatorTuple, JointDistribution<T>>> {
    OperatorTuple::all(parties)?
        .into_par_iter()
        .map(|ops| outcome_distribution::<T>(&ops).map(|d| (ops, d)))
        .collect()
}

pub fn enumerate_distributions<T: Real>(
    scheme: &EncodingScheme,
) -> Result<BTreeMap<Message, JointDistribution<T>>> {
    let out = Message::all(scheme.parties())?
        .into_par_iter()
        .map(|msg| {
            let ops = scheme.encode(&msg)?;
            outcome_distribution::<T>(&ops).map(|d| (msg, d))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    check_normalised(&out)?;
    Ok(out)
}

/// Per-message distributions looked up from precomputed operator
/// distributions.
pub fn distributions_from<T: Real>(
    scheme: &EncodingScheme,
    by_operators: &BTreeMap<OperatorTuple, JointDistribution<T>>,
) -> Result<BTreeMap<Message, JointDistribution<T>>> {
    let out = Message::all(scheme.parties())?
        .into_iter()
        .map(|msg| {
            let ops = scheme.encode(&msg)?;
            let dist = by_operators
                .get(&ops)
                .cloned()
                .ok_or_else(|| Error::InvalidOperators(format!("no distribution for {ops}")))?;
            Ok((msg, dist))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    check_normalised(&out)?;
    Ok(out)
}

fn check_normalised<T: Real>(dists: &BTreeMap<Message, JointDistribution<T>>) -> Result<()> {
    for (msg, dist) in dists {
        let total: T = dist.values().copied().sum();
        if (total - T::one()).abs() > T::tolerance() {
            return Err(Error::InvalidDistribution(format!(
                "outcomes of {msg} sum to {total}"
            )));
        }
    }
    Ok(())
}

/// Messages (and their operator tuples) compatible with one public
/// announcement of sender outcomes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyClass {
    pub operators: Vec<OperatorTuple>,
    pub messages: Vec<Message>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyTable {
    parties: usize,
    entries: BTreeMap<Vec<BellOutcome>, ConsistencyClass>,
}

impl ConsistencyTable {
    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn get(&self, sender_outcomes: &[BellOutcome]) -> Option<&ConsistencyClass> {
        self.entries.get(sender_outcomes)
    }

    pub fn entries(&self) -> &BTreeMap<Vec<BellOutcome>, ConsistencyClass> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The common class size, or `None` if sizes differ across keys.
    pub fn class_size(&self) -> Option<usize> {
        let mut sizes = self.entries.values().map(|c| c.messages.len());
        let first = sizes.next()?;
        sizes.all(|s| s == first).then_some(first)
    }
}

/// Groups messages by the sender-outcome tuples they can produce.
pub fn consistency_from<T: Real>(
    scheme: &EncodingScheme,
    distributions: &BTreeMap<Message, JointDistribution<T>>,
) -> Result<ConsistencyTable> {
    let mut grouped: BTreeMap<Vec<BellOutcome>, BTreeSet<Message>> = BTreeMap::new();
    for (msg, dist) in distributions {
        for (record, &p) in dist {
            if p > T::tolerance() {
                grouped
                    .entry(record.sender_outcomes.clone())
                    .or_default()
                    .insert(msg.clone());
            }
        }
    }
    let entries = grouped
        .into_iter()
        .map(|(key, messages)| {
            let mut operators = messages
                .iter()
                .map(|m| scheme.encode(m))
                .collect::<Result<Vec<_>>>()?;
            operators.sort();
            let class = ConsistencyClass {
                operators,
                messages: messages.into_iter().collect(),
            };
            Ok((key, class))
        })
        .collect::<Result<_>>()?;
    Ok(ConsistencyTable {
        parties: scheme.parties(),
        entries,
    })
}

pub fn consistency_classes(scheme: &EncodingScheme) -> Result<ConsistencyTable> {
    let dists = enumerate_distributions::<f64>(scheme)?;
    consistency_from(scheme, &dists)
}

/// `-Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_entropy<T: Real>(dist: &[T]) -> Result<T> {
    let tol = T::tolerance();
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < -tol) {
        return Err(Error::InvalidDistribution(format!("bad probability {p}")));
    }
    let total: T = dist.iter().copied().sum();
    if (total - T::one()).abs() > tol {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(entropy_of(dist.iter().copied()))
}

fn entropy_of<T: Real>(probs: impl Iterator<Item = T>) -> T {
    probs
        .filter(|&p| p > T::zero())
        .map(|p| -p * p.log2())
        .sum()
}

fn marginal<T: Real, K: Ord + Clone, A: Ord, B: Ord>(
    joint: &BTreeMap<(A, B), T>,
    key: impl Fn(&(A, B)) -> K,
) -> BTreeMap<K, T> {
    let mut out = BTreeMap::new();
    for (k, &p) in joint {
        let e = out.entry(key(k)).or_insert_with(T::zero);
        *e = *e + p;
    }
    out
}

/// `I(A; B) = H(A) + H(B) - H(A, B)` for a joint table.
pub fn mutual_information<T: Real, A: Ord + Clone, B: Ord + Clone>(
    joint: &BTreeMap<(A, B), T>,
) -> T {
    let ha = entropy_of(marginal(joint, |(a, _)| a.clone()).into_values());
    let hb = entropy_of(marginal(joint, |(_, b)| b.clone()).into_values());
    let hab = entropy_of(joint.values().copied());
    ha + hb - hab
}

/// `H(A | B) = Σ_b p(b) H(A | B = b)`, computed per conditioning value.
pub fn conditional_entropy<T: Real, A: Ord + Clone, B: Ord + Clone>(
    joint: &BTreeMap<(A, B), T>,
) -> T {
    let mut by_b: BTreeMap<&B, Vec<T>> = BTreeMap::new();
    for ((_, b), &p) in joint {
        by_b.entry(b).or_default().push(p);
    }
    by_b.into_values()
        .map(|column| {
            let pb: T = column.iter().copied().sum();
            if pb <= T::zero() {
                return T::zero();
            }
            pb * entropy_of(column.into_iter().map(|p| p / pb))
        })
        .sum()
}

/// Joint (message, observation) tables under the uniform message prior.
#[derive(Clone, Debug)]
pub struct ObserverTables<T> {
    /// Eavesdropper: message vs. announced sender outcomes.
    pub public: BTreeMap<(Message, Vec<BellOutcome>), T>,
    /// Central party: message vs. the full outcome record.
    pub central: BTreeMap<(Message, OutcomeRecord), T>,
}

pub fn observer_tables<T: Real>(
    distributions: &BTreeMap<Message, JointDistribution<T>>,
) -> ObserverTables<T> {
    let prior = T::one() / T::count(distributions.len());
    let mut public = BTreeMap::new();
    let mut central = BTreeMap::new();
    for (msg, dist) in distributions {
        for (record, &p) in dist {
            let e = public
                .entry((msg.clone(), record.sender_outcomes.clone()))
                .or_insert_with(T::zero);
            *e = *e + prior * p;
            central.insert((msg.clone(), record.clone()), prior * p);
        }
    }
    ObserverTables { public, central }
}

/// How the eavesdropper's guessing probability is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuessMethod {
    /// Brute force over every scheme in the family and every message.
    Exhaustive,
    /// Sampled sessions with Bayes-optimal guesses.
    MonteCarlo { trials: u64, seed: u64 },
}

impl GuessMethod {
    /// Exhaustive for `M <= 3`, Monte Carlo above.
    pub fn default_for(parties: usize, trials: u64, seed: u64) -> Self {
        if parties <= 3 {
            GuessMethod::Exhaustive
        } else {
            GuessMethod::MonteCarlo { trials, seed }
        }
    }
}

/// What the eavesdropper knows about the encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EveModel {
    /// The scheme is announced; the family is that single scheme.
    Public,
    /// The scheme is drawn uniformly from all per-sender bijections.
    Secret(GuessMethod),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessEstimate<T> {
    pub probability: T,
    /// Zero for exhaustive results.
    pub std_error: T,
    pub method: GuessMethod,
}

/// Product family of encoding schemes: each sender's bijection is chosen
/// independently and uniformly from its own list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeFamily {
    parties: usize,
    leader_maps: Vec<[PauliOp; 4]>,
    follower_maps: Vec<Vec<[PauliOp; 2]>>,
}

fn permutations(ops: [PauliOp; 4]) -> Vec<[PauliOp; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in (0..4).filter(|&b| b != a) {
            for c in (0..4).filter(|&c| c != a && c != b) {
                let d = 6 - a - b - c;
                out.push([ops[a], ops[b], ops[c], ops[d]]);
            }
        }
    }
    out
}

impl SchemeFamily {
    /// All `4! · 2^(M-1)` schemes with the fixed operator sets.
    pub fn uniform(parties: usize) -> Result<Self> {
        check_parties(parties)?;
        let follower = vec![[PauliOp::I, PauliOp::X], [PauliOp::X, PauliOp::I]];
        Ok(SchemeFamily {
            parties,
            leader_maps: permutations(PauliOp::ALL),
            follower_maps: vec![follower; parties - 1],
        })
    }

    pub fn singleton(scheme: &EncodingScheme) -> Self {
        SchemeFamily {
            parties: scheme.parties(),
            leader_maps: vec![*scheme.leader_map()],
            follower_maps: scheme.follower_maps().iter().map(|m| vec![*m]).collect(),
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn len(&self) -> usize {
        self.follower_maps
            .iter()
            .fold(self.leader_maps.len(), |acc, f| acc * f.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every member, in a fixed order.
    pub fn schemes(&self) -> Result<Vec<EncodingScheme>> {
        let mut out = Vec::with_capacity(self.len());
        let mut choice = vec![0usize; self.follower_maps.len()];
        for leader in &self.leader_maps {
            loop {
                let followers = choice
                    .iter()
                    .zip(&self.follower_maps)
                    .map(|(&c, maps)| maps[c])
                    .collect();
                out.push(EncodingScheme::new(self.parties, *leader, followers)?);
                // odometer over follower choices
                let mut k = choice.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    choice[k] += 1;
                    if choice[k] < self.follower_maps[k].len() {
                        break;
                    }
                    choice[k] = 0;
                }
                if choice.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        Ok(out)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EncodingScheme> {
        let leader = *self.leader_maps.choose(rng).expect("non-empty family");
        let followers = self
            .follower_maps
            .iter()
            .map(|maps| *maps.choose(rng).expect("non-empty family"))
            .collect();
        EncodingScheme::new(self.parties, leader, followers)
    }

    /// `P(ops | msg)` for a scheme drawn from the family, factorised per
    /// sender.
    pub fn operator_likelihood<T: Real>(&self, msg: &Message, ops: &OperatorTuple) -> T {
        let leader_hits = self
            .leader_maps
            .iter()
            .filter(|m| m[msg.leader_bits() as usize] == ops.leader())
            .count();
        let mut p = T::count(leader_hits) / T::count(self.leader_maps.len());
        for ((maps, &bit), op) in self
            .follower_maps
            .iter()
            .zip(msg.follower_bits())
            .zip(ops.followers())
        {
            let hits = maps.iter().filter(|m| m[bit as usize] == *op).count();
            p = p * T::count(hits) / T::count(maps.len());
        }
        p
    }
}

type SenderMarginals<T> = BTreeMap<OperatorTuple, BTreeMap<Vec<BellOutcome>, T>>;

fn sender_marginals<T: Real>(
    by_operators: &BTreeMap<OperatorTuple, JointDistribution<T>>,
) -> SenderMarginals<T> {
    by_operators
        .iter()
        .map(|(ops, dist)| {
            let mut m = BTreeMap::new();
            for (record, &p) in dist {
                let e = m
                    .entry(record.sender_outcomes.clone())
                    .or_insert_with(T::zero);
                *e = *e + p;
            }
            (ops.clone(), m)
        })
        .collect()
}

/// Eavesdropper's optimal probability of guessing the whole message from
/// the sender outcomes when the scheme is drawn uniformly from `family`.
pub fn eve_guess_for_family<T: Real>(
    family: &SchemeFamily,
    method: GuessMethod,
) -> Result<GuessEstimate<T>> {
    let by_operators = operator_distributions::<T>(family.parties())?;
    guess_with(family, method, &by_operators)
}

fn guess_with<T: Real>(
    family: &SchemeFamily,
    method: GuessMethod,
    by_operators: &BTreeMap<OperatorTuple, JointDistribution<T>>,
) -> Result<GuessEstimate<T>> {
    let marginals = sender_marginals(by_operators);
    match method {
        GuessMethod::Exhaustive => exhaustive_guess(family, &marginals),
        GuessMethod::MonteCarlo { trials, seed } => {
            monte_carlo_guess(family, &marginals, trials, seed)
        }
    }
}

fn exhaustive_guess<T: Real>(
    family: &SchemeFamily,
    marginals: &SenderMarginals<T>,
) -> Result<GuessEstimate<T>> {
    let schemes = family.schemes()?;
    let messages = Message::all(family.parties())?;
    let weight = T::one() / (T::count(schemes.len()) * T::count(messages.len()));
    // joint[s][msg index] = P(msg, s)
    let mut joint: BTreeMap<&Vec<BellOutcome>, Vec<T>> = BTreeMap::new();
    for scheme in &schemes {
        for msg in &messages {
            let ops = scheme.encode(msg)?;
            for (s, &p) in &marginals[&ops] {
                let row = joint
                    .entry(s)
                    .or_insert_with(|| vec![T::zero(); messages.len()]);
                row[msg.index()] = row[msg.index()] + weight * p;
            }
        }
    }
    let probability = joint
        .values()
        .map(|row| row.iter().copied().fold(T::zero(), T::max))
        .sum();
    Ok(GuessEstimate {
        probability,
        std_error: T::zero(),
        method: GuessMethod::Exhaustive,
    })
}

fn sample_key<T: Real, R: Rng + ?Sized>(
    dist: &BTreeMap<Vec<BellOutcome>, T>,
    rng: &mut R,
) -> Vec<BellOutcome> {
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    let mut last = None;
    for (key, &p) in dist {
        acc = acc + p;
        last = Some(key);
        if u < acc {
            return key.clone();
        }
    }
    last.expect("non-empty distribution").clone()
}

fn monte_carlo_guess<T: Real>(
    family: &SchemeFamily,
    marginals: &SenderMarginals<T>,
    trials: u64,
    seed: u64,
) -> Result<GuessEstimate<T>> {
    if trials == 0 {
        return Err(Error::InvalidDistribution(
            "Monte Carlo needs at least one trial".into(),
        ));
    }
    let messages = Message::all(family.parties())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut posteriors: HashMap<Vec<BellOutcome>, Vec<T>> = HashMap::new();
    let mut hits = 0u64;
    for _ in 0..trials {
        let scheme = family.sample(&mut rng)?;
        let msg = messages.choose(&mut rng).expect("messages exist");
        let observed = sample_key(&marginals[&scheme.encode(msg)?], &mut rng);
        let scores = posteriors.entry(observed.clone()).or_insert_with(|| {
            messages
                .iter()
                .map(|m| {
                    marginals
                        .iter()
                        .filter_map(|(ops, dist)| {
                            dist.get(&observed)
                                .map(|&p| family.operator_likelihood::<T>(m, ops) * p)
                        })
                        .sum()
                })
                .collect()
        });
        let best = scores.iter().copied().fold(T::zero(), T::max);
        let ties: Vec<usize> = (0..scores.len())
            .filter(|&i| best - scores[i] <= T::tolerance())
            .collect();
        let guess = *ties.choose(&mut rng).expect("at least one maximiser");
        if guess == msg.index() {
            hits += 1;
        }
    }
    let n = T::lit(trials as f64);
    let p = T::lit(hits as f64) / n;
    Ok(GuessEstimate {
        probability: p,
        std_error: (p * (T::one() - p) / n).sqrt(),
        method: GuessMethod::MonteCarlo { trials, seed },
    })
}

/// Guessing probability against the uniform secret-scheme family.
pub fn eve_secret_scheme_guess<T: Real>(
    parties: usize,
    method: GuessMethod,
) -> Result<GuessEstimate<T>> {
    eve_guess_for_family(&SchemeFamily::uniform(parties)?, method)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport<T> {
    pub parties: usize,
    pub message_entropy_bits: T,
    /// `I(message; sender outcomes)` with the scheme public.
    pub eve_public_info_bits: T,
    pub secret_capacity_bits: T,
    /// `I(message; all outcomes)`.
    pub diana_info_bits: T,
    pub eve_secret_scheme_guess_prob: T,
    pub eve_secret_scheme_guess_stderr: T,
    /// `None` when class sizes differ between announcements.
    pub consistency_class_size: Option<usize>,
}

pub fn analyze<T: Real>(scheme: &EncodingScheme, eve: EveModel) -> Result<CapacityReport<T>> {
    let by_operators = operator_distributions::<T>(scheme.parties())?;
    let dists = distributions_from(scheme, &by_operators)?;
    let tables = observer_tables(&dists);
    let prior = vec![T::one() / T::count(dists.len()); dists.len()];
    let message_entropy_bits = shannon_entropy(&prior)?;
    let eve_public_info_bits = mutual_information(&tables.public);
    let diana_info_bits = mutual_information(&tables.central);
    let consistency_class_size = consistency_from(scheme, &dists)?.class_size();
    let guess = match eve {
        EveModel::Public => guess_with(
            &SchemeFamily::singleton(scheme),
            GuessMethod::Exhaustive,
            &by_operators,
        )?,
        EveModel::Secret(method) => guess_with(
            &SchemeFamily::uniform(scheme.parties())?,
            method,
            &by_operators,
        )?,
    };
    Ok(CapacityReport {
        parties: scheme.parties(),
        message_entropy_bits,
        eve_public_info_bits,
        secret_capacity_bits: message_entropy_bits - eve_public_info_bits,
        diana_info_bits,
        eve_secret_scheme_guess_prob: guess.probability,
        eve_secret_scheme_guess_stderr: guess.std_error,
        consistency_class_size,
    })
}
