//! Pseudo-random binary sequences from a Fibonacci LFSR.
//!
//! The register holds `order` bits. Each step outputs the last stage and
//! shifts in the XOR of the stages named by the feedback polynomial's
//! exponents, so `x^14 + x^13 + x^12 + x^2 + 1` is written as taps
//! `[14, 13, 12, 2]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered binary sequence; every element is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid(format!("bit {i} is {}, not 0 or 1", bits[i])));
        }
        Ok(BitStream(bits))
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        BitStream(bits.into_iter().map(u8::from).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrbsSpec {
    pub order: u32,
    pub taps: Vec<u32>,
    pub seed: u32,
}

impl Default for PrbsSpec {
    fn default() -> Self {
        PrbsSpec { order: 14, taps: vec![14, 13, 12, 2], seed: 1 }
    }
}

impl PrbsSpec {
    /// Maximal-length polynomial for common orders.
    pub fn standard(order: u32) -> Result<Self> {
        let taps = match order {
            7 => vec![7, 6],
            9 => vec![9, 5],
            11 => vec![11, 9],
            14 => vec![14, 13, 12, 2],
            15 => vec![15, 14],
            20 => vec![20, 3],
            23 => vec![23, 18],
            _ => return Err(Error::invalid(format!("no standard polynomial for order {order}"))),
        };
        Ok(PrbsSpec { order, taps, seed: 1 })
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.order) - 1
    }
}

/// A validated LFSR.
#[derive(Debug, Clone)]
pub struct Prbs {
    spec: PrbsSpec,
    mask: u32,
    feedback: u32,
    state: u32,
}

impl Prbs {
    /// Validate `spec` and run the period self-check.
    pub fn new(spec: PrbsSpec) -> Result<Self> {
        if spec.order < 2 || spec.order > 24 {
            return Err(Error::invalid(format!("PRBS order {} outside 2..=24", spec.order)));
        }
        let mask = (1u32 << spec.order) - 1;
        if spec.seed & mask == 0 {
            return Err(Error::invalid("PRBS seed must be a nonzero register state"));
        }
        if !spec.taps.contains(&spec.order) {
            return Err(Error::invalid("feedback polynomial must include the order term"));
        }
        let mut feedback = 0u32;
        for &t in &spec.taps {
            if t == 0 || t > spec.order {
                return Err(Error::invalid(format!("tap {t} outside 1..={}", spec.order)));
            }
            feedback |= 1 << (t - 1);
        }
        let mut prbs = Prbs { mask, feedback, state: spec.seed & mask, spec };
        let start = prbs.state;
        let full = prbs.spec.period();
        let mut steps = 0u64;
        loop {
            prbs.step();
            steps += 1;
            if prbs.state == start || steps > full {
                break;
            }
        }
        if steps != full {
            return Err(Error::invalid(format!(
                "polynomial {:?} is not maximal-length: period {steps}, expected {full}",
                prbs.spec.taps
            )));
        }
        Ok(prbs)
    }

    pub fn spec(&self) -> &PrbsSpec {
        &self.spec
    }

    fn step(&mut self) -> u8 {
        let out = ((self.state >> (self.spec.order - 1)) & 1) as u8;
        let fb = (self.state & self.feedback).count_ones() & 1;
        self.state = ((self.state << 1) | fb) & self.mask;
        out
    }

    pub fn next_bit(&mut self) -> u8 {
        self.step()
    }
}

impl Iterator for Prbs {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.step())
    }
}

/// Generate `n_bits` of the sequence defined by `spec`, starting from its seed.
pub fn prbs_generate(spec: &PrbsSpec, n_bits: usize) -> Result<BitStream> {
    if n_bits == 0 {
        return Err(Error::Length("n_bits must be at least 1".into()));
    }
    let prbs = Prbs::new(spec.clone())?;
    Ok(BitStream(prbs.take(n_bits).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: naive shift register stored as a bit vector.
    fn brute_force_period(order: u32, taps: &[u32], seed: u32) -> (usize, usize) {
        let n = order as usize;
        let start: Vec<u8> = (0..n).map(|i| ((seed >> i) & 1) as u8).collect();
        let mut reg = start.clone();
        let mut ones = 0;
        let mut period = 0;
        loop {
            ones += reg[n - 1] as usize;
            let fb = taps.iter().fold(0u8, |acc, &t| acc ^ reg[t as usize - 1]);
            reg.rotate_right(1);
            reg[0] = fb;
            period += 1;
            if reg == start {
                return (period, ones);
            }
        }
    }

    #[test]
    fn period_and_balance_match_enumeration() {
        for order in [7, 14, 15] {
            let spec = PrbsSpec::standard(order).unwrap();
            let (period, ones) = brute_force_period(order, &spec.taps, spec.seed);
            assert_eq!(period as u64, spec.period());
            assert_eq!(ones, 1 << (order - 1));
            let bits = prbs_generate(&spec, period).unwrap();
            assert_eq!(bits.count_ones(), ones);
            let two = prbs_generate(&spec, 2 * period).unwrap();
            assert_eq!(&two.bits()[..period], &two.bits()[period..]);
        }
    }

    #[test]
    fn prbs14_one_period() {
        let bits = prbs_generate(&PrbsSpec::default(), 16383).unwrap();
        assert_eq!(bits.count_ones(), 8192);
        assert_eq!(bits.len() - bits.count_ones(), 8191);
    }

    #[test]
    fn zero_seed_rejected() {
        let spec = PrbsSpec { seed: 0, ..PrbsSpec::default() };
        assert!(matches!(prbs_generate(&spec, 10), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn non_maximal_polynomial_rejected() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2, period 6
        let spec = PrbsSpec { order: 4, taps: vec![4, 2], seed: 1 };
        assert!(matches!(Prbs::new(spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn deterministic_for_fixed_spec() {
        let spec = PrbsSpec { seed: 0x1abc, ..PrbsSpec::default() };
        assert_eq!(prbs_generate(&spec, 500).unwrap(), prbs_generate(&spec, 500).unwrap());
    }
}
