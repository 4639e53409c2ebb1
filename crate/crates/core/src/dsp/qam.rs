//! Gray-coded QAM mapping and hard-decision demapping.
//!
//! 4QAM: `(b1, b0) = (0,0)` sits at `(+1+j)/sqrt(2)` and labels advance
//! counter-clockwise in Gray order `00, 01, 11, 10`. Equivalently the
//! in-phase sign carries `b0` and the quadrature sign carries `b1`.
//!
//! Decisions on a boundary (a component exactly zero) resolve toward the
//! positive side, i.e. toward the first quadrant.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::prbs::BitStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModFormat {
    #[serde(rename = "4qam")]
    Qam4,
    /// Optional extension; not used by any built-in preset.
    #[serde(rename = "16qam")]
    Qam16,
}

impl ModFormat {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModFormat::Qam4 => 2,
            ModFormat::Qam16 => 4,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Constellation point for the label whose bit `k` is `(label >> k) & 1`,
    /// with bit 0 the first bit of the symbol in stream order.
    pub fn point(self, label: usize) -> Complex64 {
        match self {
            ModFormat::Qam4 => {
                let b0 = label & 1;
                let b1 = (label >> 1) & 1;
                let i = if b0 == 0 { 1.0 } else { -1.0 };
                let q = if b1 == 0 { 1.0 } else { -1.0 };
                Complex64::new(i, q) * FRAC_1_SQRT_2
            }
            ModFormat::Qam16 => {
                let scale = 1.0 / 10f64.sqrt();
                let i = gray_level4(label & 0b11);
                let q = gray_level4((label >> 2) & 0b11);
                Complex64::new(i, q) * scale
            }
        }
    }

    pub fn constellation(self) -> Vec<Complex64> {
        (0..self.order()).map(|l| self.point(l)).collect()
    }
}

// Two-bit Gray axis: 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3.
fn gray_level4(bits: usize) -> f64 {
    match bits {
        0b00 => 3.0,
        0b01 => 1.0,
        0b11 => -1.0,
        _ => -3.0,
    }
}

fn gray_decide4(x: f64, scale: f64) -> usize {
    let v = x / scale;
    if v >= 2.0 {
        0b00
    } else if v >= 0.0 {
        0b01
    } else if v >= -2.0 {
        0b11
    } else {
        0b10
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub symbols: Vec<Complex64>,
    pub format: ModFormat,
    pub baud: f64,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub fn qam_map(bits: &BitStream, format: ModFormat, baud: f64) -> Result<SymbolStream> {
    let k = format.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::Length(format!(
            "{} bits is not a multiple of {k} bits per symbol",
            bits.len()
        )));
    }
    if !(baud > 0.0) {
        return Err(Error::invalid("baud must be positive"));
    }
    let table = format.constellation();
    let symbols = bits
        .bits()
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk.iter().enumerate().fold(0usize, |acc, (j, &b)| acc | (usize::from(b) << j));
            table[label]
        })
        .collect();
    Ok(SymbolStream { symbols, format, baud })
}

/// Minimum-distance hard decision.
pub fn decide(symbol: Complex64, format: ModFormat) -> usize {
    match format {
        ModFormat::Qam4 => usize::from(symbol.re < 0.0) | (usize::from(symbol.im < 0.0) << 1),
        ModFormat::Qam16 => {
            let scale = 1.0 / 10f64.sqrt();
            gray_decide4(symbol.re, scale) | (gray_decide4(symbol.im, scale) << 2)
        }
    }
}

pub fn qam_demap(symbols: &SymbolStream) -> BitStream {
    let k = symbols.format.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for &s in &symbols.symbols {
        let label = decide(s, symbols.format);
        bits.extend((0..k).map(|j| ((label >> j) & 1) as u8));
    }
    BitStream::new(bits).expect("labels are binary")
}
