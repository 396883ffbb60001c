//! Parties, synchronous rounds, bit-exact transcripts and public coins.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartyId(pub usize);

/// A bit string, written most significant bit first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    /// Appends `value` as a fixed-width unsigned field.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        assert!(
            width >= 64 || value < (1u64 << width),
            "{value} does not fit in {width} bits"
        );
        for i in (0..width).rev() {
            self.0.push(i < 64 && (value >> i) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.0, pos: 0 }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bad bit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sequential decoder over a bit string.
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn read_bit(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| Error::Decode("message too short".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.bits.len() {
            return Err(Error::Decode(format!(
                "{} trailing bits",
                self.bits.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: PartyId,
    pub bits: Bits,
}

impl Message {
    pub fn new(sender: usize, bits: Bits) -> Self {
        Message {
            sender: PartyId(sender),
            bits,
        }
    }
}

/// Ordered record of synchronous rounds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    rounds: Vec<Vec<Message>>,
    #[serde(default)]
    finished: bool,
}

/// The `[t, r]` profile of a finished transcript.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostProfile {
    pub rounds: usize,
    pub t: usize,
    pub total_bits: usize,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one synchronous round. Each party may send at most one message.
    pub fn round_exchange(&mut self, messages: Vec<Message>) -> Result<()> {
        if self.finished {
            return Err(Error::ProtocolStructure(
                "transcript already finished".into(),
            ));
        }
        let mut senders: Vec<_> = messages.iter().map(|m| m.sender).collect();
        senders.sort();
        if let Some(w) = senders.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::ProtocolStructure(format!(
                "party {} sent two messages in one round",
                w[0].0
            )));
        }
        self.rounds.push(messages);
        Ok(())
    }

    /// Convenience for a round in which exactly one party speaks.
    pub fn say(&mut self, sender: usize, bits: Bits) -> Result<()> {
        self.round_exchange(vec![Message::new(sender, bits)])
    }

    pub fn finish(&mut self) {
        self.finished = true;
    }

    pub fn finished(mut self) -> Self {
        self.finished = true;
        self
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn rounds(&self) -> &[Vec<Message>] {
        &self.rounds
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn total_bits(&self) -> usize {
        self.rounds.iter().flatten().map(|m| m.bits.len()).sum()
    }

    pub fn cost(&self) -> Result<CostProfile> {
        if !self.finished {
            return Err(Error::UnfinishedTranscript);
        }
        Ok(CostProfile {
            rounds: self.rounds.len(),
            t: self
                .rounds
                .iter()
                .flatten()
                .map(|m| m.bits.len())
                .max()
                .unwrap_or(0),
            total_bits: self.total_bits(),
        })
    }

    /// Bits sent by one party over the whole run.
    pub fn bits_sent_by(&self, party: usize) -> usize {
        self.rounds
            .iter()
            .flatten()
            .filter(|m| m.sender.0 == party)
            .map(|m| m.bits.len())
            .sum()
    }
}

/// Public random bits visible to every party.
///
/// Bit `p` of the stream is bit `p mod 32` (least significant first) of
/// word `p / 32` of a ChaCha20 keystream keyed by `seed` (expanded with
/// `SeedableRng::seed_from_u64`). The stream is random access, so a draw
/// depends only on `(seed, position)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicCoins {
    seed: u64,
    position: u64,
}

impl PublicCoins {
    pub fn new(seed: u64) -> Self {
        PublicCoins { seed, position: 0 }
    }

    pub fn at(seed: u64, position: u64) -> Self {
        PublicCoins { seed, position }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn draw_bits(&mut self, count: usize) -> Bits {
        let mut out = Vec::with_capacity(count);
        if count > 0 {
            let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
            let mut word_index = self.position / 32;
            rng.set_word_pos(word_index as u128);
            let mut word = rng.next_u32();
            let mut offset = (self.position % 32) as u32;
            for _ in 0..count {
                if offset == 32 {
                    word = rng.next_u32();
                    word_index += 1;
                    offset = 0;
                }
                out.push((word >> offset) & 1 == 1);
                offset += 1;
            }
            let _ = word_index;
        }
        self.position += count as u64;
        Bits(out)
    }

    pub fn draw_uint(&mut self, width: u32) -> u64 {
        self.draw_bits(width as usize)
            .as_slice()
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Uniform integer in `0..n` by rejection sampling.
    pub fn draw_below(&mut self, n: u64) -> u64 {
        assert!(n >= 1);
        if n == 1 {
            return 0;
        }
        let w = crate::rational::ceil_log2(n);
        loop {
            let x = self.draw_uint(w);
            if x < n {
                return x;
            }
        }
    }
}
