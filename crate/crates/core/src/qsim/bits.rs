//! Basis-index and bitstring conventions.
//!
//! Bit `k` of a basis index is qubit `k` (little-endian). Bitstrings are
//! written most-significant qubit first, so the string `"01"` on two qubits
//! means qubit 1 is `|0⟩` and qubit 0 is `|1⟩`, i.e. basis index 1. Every
//! bitstring that crosses the library boundary goes through these two
//! functions.

use crate::error::{Error, Result};

/// Parses a printed bitstring into a basis index.
pub fn parse_bitstring(bits: &str, num_qubits: usize) -> Result<usize> {
    let bad = |reason: &str| Error::Bitstring {
        bits: bits.to_string(),
        reason: reason.to_string(),
    };
    if bits.chars().count() != num_qubits {
        return Err(bad(&format!("expected {num_qubits} characters")));
    }
    let mut index = 0usize;
    for ch in bits.chars() {
        index <<= 1;
        match ch {
            '0' => {}
            '1' => index |= 1,
            _ => return Err(bad("characters must be '0' or '1'")),
        }
    }
    Ok(index)
}

/// Prints a basis index, most-significant qubit first.
pub fn format_bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .rev()
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_order_is_msb_first() {
        assert_eq!(parse_bitstring("01", 2).unwrap(), 1);
        assert_eq!(parse_bitstring("10", 2).unwrap(), 2);
        assert_eq!(parse_bitstring("001", 3).unwrap(), 1);
        assert_eq!(format_bitstring(4, 3), "100");
        assert_eq!(format_bitstring(1, 2), "01");
    }

    #[test]
    fn round_trip_all_indices() {
        for n in 1..=5 {
            for i in 0..(1usize << n) {
                assert_eq!(parse_bitstring(&format_bitstring(i, n), n).unwrap(), i);
            }
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_bitstring("0", 2).is_err());
        assert!(parse_bitstring("012", 3).is_err());
        assert!(parse_bitstring("0a", 2).is_err());
    }
}
