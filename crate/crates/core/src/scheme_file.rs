//! Textual encoding-scheme files.
//!
//! ```text
//! # comments and blank lines are ignored
//! parties = 3
//! leader = 00=I, 01=X, 10=iY, 11=Z
//! follower.1 = 0=I, 1=X
//! follower.2 = 0=I, 1=X
//! ```
//!
//! Each non-comment line is `key = value`. Keys are `parties`, `leader`
//! and `follower.<k>` for `k = 1..M-1`; every key must appear exactly once.
//! A map value is a list of `bits=operator` pairs separated by commas or
//! whitespace: four two-bit pairs for the leader, two one-bit pairs per
//! follower. Operators are spelled `I`, `X`, `iY`, `Z`. Maps that are not
//! bijections onto their operator set are rejected.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::protocol::EncodingScheme;
use crate::qsim::PauliOp;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_map(line: usize, value: &str, width: usize) -> Result<Vec<PauliOp>> {
    let size = 1usize << width;
    let mut slots: Vec<Option<PauliOp>> = vec![None; size];
    for pair in value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
    {
        let (bits, op) = pair
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected bits=operator, got `{pair}`")))?;
        if bits.len() != width || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(parse_error(
                line,
                format!("`{bits}` is not a {width}-bit value"),
            ));
        }
        let index = usize::from_str_radix(bits, 2).expect("validated binary digits");
        let op = op.parse::<PauliOp>().map_err(|e| parse_error(line, e))?;
        if slots[index].replace(op).is_some() {
            return Err(parse_error(line, format!("bits `{bits}` assigned twice")));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, op)| {
            op.ok_or_else(|| parse_error(line, format!("no operator for bits {i:0width$b}")))
        })
        .collect()
}

pub fn parse(text: &str) -> Result<EncodingScheme> {
    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, "expected `key = value`"))?;
        let key = key.trim().to_string();
        if fields
            .insert(key.clone(), (line, value.trim().to_string()))
            .is_some()
        {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }
    }

    let (line, parties) = fields
        .remove("parties")
        .ok_or_else(|| parse_error(0, "missing `parties`"))?;
    let parties: usize = parties
        .parse()
        .map_err(|_| parse_error(line, format!("`{parties}` is not a party count")))?;

    let (line, leader) = fields
        .remove("leader")
        .ok_or_else(|| parse_error(0, "missing `leader`"))?;
    let leader = parse_map(line, &leader, 2)?;
    let leader_map = [leader[0], leader[1], leader[2], leader[3]];

    let mut follower_maps = Vec::new();
    for k in 1..parties.max(1) {
        let key = format!("follower.{k}");
        let (line, value) = fields
            .remove(&key)
            .ok_or_else(|| parse_error(0, format!("missing `{key}`")))?;
        let map = parse_map(line, &value, 1)?;
        follower_maps.push([map[0], map[1]]);
    }
    if let Some((key, (line, _))) = fields.into_iter().next() {
        return Err(parse_error(line, format!("unknown key `{key}`")));
    }

    EncodingScheme::new(parties, leader_map, follower_maps)
}

/// Canonical text form; [`parse`] inverts it.
pub fn to_text(scheme: &EncodingScheme) -> String {
    let mut out = format!("parties = {}\n", scheme.parties());
    let leader: Vec<String> = scheme
        .leader_map()
        .iter()
        .enumerate()
        .map(|(bits, op)| format!("{bits:02b}={op}"))
        .collect();
    out.push_str(&format!("leader = {}\n", leader.join(", ")));
    for (k, map) in scheme.follower_maps().iter().enumerate() {
        out.push_str(&format!(
            "follower.{} = 0={}, 1={}\n",
            k + 1,
            map[0],
            map[1]
        ));
    }
    out
}
