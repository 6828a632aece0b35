//! Run-length coding of binary occupancy bitmaps.
//!
//! Runs alternate between zeros and ones, starting with a (possibly empty)
//! run of zeros; each run length is one LEB128 value.

use super::varint::{read_uleb, write_uleb};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RleError {
    #[error("run lengths sum to {got}, expected {expected}")]
    CorruptRuns { got: u64, expected: u64 },
}

/// Encodes a row-major 0/1 bitmap (any non-zero byte counts as 1).
pub fn rle_encode(bitmap: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut current = 0u8;
    let mut run = 0u64;
    for &b in bitmap {
        let bit = u8::from(b != 0);
        if bit == current {
            run += 1;
        } else {
            write_uleb(&mut out, run);
            current = bit;
            run = 1;
        }
    }
    if !bitmap.is_empty() {
        write_uleb(&mut out, run);
    }
    out
}

/// Decodes exactly `area` pixels; the runs must consume all of `bytes`.
pub fn rle_decode(bytes: &[u8], area: usize) -> Result<Vec<u8>, RleError> {
    let mut out = Vec::with_capacity(area);
    let mut pos = 0;
    let mut current = 0u8;
    let mut total = 0u64;
    while pos < bytes.len() {
        let run = read_uleb(bytes, &mut pos).ok_or(RleError::CorruptRuns { got: u64::MAX, expected: area as u64 })?;
        total = total.saturating_add(run);
        if total > area as u64 {
            return Err(RleError::CorruptRuns { got: total, expected: area as u64 });
        }
        out.resize(out.len() + run as usize, current);
        current ^= 1;
    }
    if total != area as u64 {
        return Err(RleError::CorruptRuns { got: total, expected: area as u64 });
    }
    Ok(out)
}

/// Number of runs in an encoding (for diagnostics and tests).
pub fn run_count(bytes: &[u8]) -> usize {
    let mut pos = 0;
    let mut n = 0;
    while pos < bytes.len() && read_uleb(bytes, &mut pos).is_some() {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_zero_is_one_run() {
        let e = rle_encode(&[0; 64]);
        assert_eq!(e, [64]);
        assert_eq!(rle_decode(&e, 64).unwrap(), vec![0; 64]);
    }

    #[test]
    fn alternating_row() {
        let bm = [1, 0, 1, 0, 1, 0, 1, 0];
        let e = rle_encode(&bm);
        assert_eq!(run_count(&e), 9);
        assert_eq!(e[0], 0);
        assert_eq!(rle_decode(&e, 8).unwrap(), bm);
    }

    #[test]
    fn empty_bitmap() {
        assert!(rle_encode(&[]).is_empty());
        assert!(rle_decode(&[], 0).unwrap().is_empty());
    }

    #[test]
    fn corrupt_runs() {
        assert_eq!(rle_decode(&[3], 4), Err(RleError::CorruptRuns { got: 3, expected: 4 }));
        assert!(rle_decode(&[3, 2], 4).is_err());
        assert!(rle_decode(&[0x80], 4).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(bm in proptest::collection::vec(0u8..2, 0..300)) {
            prop_assert_eq!(rle_decode(&rle_encode(&bm), bm.len()).unwrap(), bm);
        }
    }
}
