use std::collections::{BTreeMap, HashSet};

use super::ConfigError;

/// Binary code with words packed into the low `length` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCode {
    pub length: usize,
    pub words: Vec<u64>,
}

impl BinaryCode {
    /// Pairwise distance counts over ordered pairs, self-pairs included.
    pub fn distance_distribution(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for a in &self.words {
            for b in &self.words {
                *out.entry((a ^ b).count_ones()).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn min_distance(&self) -> Option<u32> {
        self.distance_distribution().into_keys().find(|&d| d > 0)
    }

    /// Words as `±1` vectors: bit 0 becomes −1, bit 1 becomes +1.
    pub fn sign_vectors(&self) -> Vec<Vec<i64>> {
        self.words
            .iter()
            .map(|w| (0..self.length).map(|i| if w >> i & 1 == 1 { 1 } else { -1 }).collect())
            .collect()
    }
}

// Generator of the octacode over Z4.
const OCTACODE: [[u8; 8]; 4] = [
    [1, 0, 0, 0, 3, 1, 2, 1],
    [0, 1, 0, 0, 1, 2, 3, 1],
    [0, 0, 1, 0, 3, 3, 3, 2],
    [0, 0, 0, 1, 2, 3, 1, 1],
];

fn gray(x: u8) -> u64 {
    match x {
        0 => 0b00,
        1 => 0b10,
        2 => 0b11,
        _ => 0b01,
    }
}

/// The (16, 256, 6) Nordstrom–Robinson code as the Gray image of the
/// octacode, checked against its parameters before being returned.
pub fn nordstrom_robinson() -> Result<BinaryCode, ConfigError> {
    let mut words = Vec::with_capacity(256);
    for msg in 0..256u32 {
        let mut cw = [0u8; 8];
        for (r, row) in OCTACODE.iter().enumerate() {
            let c = (msg >> (2 * r) & 3) as u8;
            for (k, g) in row.iter().enumerate() {
                cw[k] = (cw[k] + c * g) % 4;
            }
        }
        let w = cw.iter().enumerate().fold(0u64, |acc, (k, &x)| acc | gray(x) << (2 * k));
        words.push(w);
    }
    words.sort_unstable();
    let code = BinaryCode { length: 16, words };
    self_test(&code)?;
    Ok(code)
}

fn self_test(code: &BinaryCode) -> Result<(), ConfigError> {
    let fail = |m: String| Err(ConfigError::SelfTestFailed(m));
    let distinct: HashSet<_> = code.words.iter().collect();
    if distinct.len() != 256 {
        return fail(format!("{} distinct words", distinct.len()));
    }
    let dist = code.distance_distribution();
    if let Some(d) = dist.keys().find(|d| ![0, 6, 8, 10, 16].contains(*d)) {
        return fail(format!("distance {d} occurs"));
    }
    if code.min_distance() != Some(6) {
        return fail("minimum distance is not 6".into());
    }
    if !distinct.contains(&0) || !distinct.contains(&0xffff) {
        return fail("code is not closed under complement".into());
    }
    Ok(())
}
