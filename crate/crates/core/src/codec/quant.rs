//! Uniform scalar quantization with round-half-up.

#[inline]
pub fn quantize(value: u32, qstep: u32) -> u32 {
    debug_assert!(qstep >= 1);
    (value + qstep / 2) / qstep
}

#[inline]
pub fn dequantize(level: u32, qstep: u32) -> u32 {
    level * qstep
}

/// Dequantize and clamp into `0..=max`. Clamping toward the valid range
/// never increases the error for in-range sources.
#[inline]
pub fn dequantize_clamped(level: u32, qstep: u32, max: u32) -> u32 {
    (level as u64 * qstep as u64).min(max as u64) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_identity() {
        assert_eq!(quantize(7, 1), 7);
        assert_eq!(dequantize(7, 1), 7);
    }

    #[test]
    fn step_four() {
        assert_eq!(quantize(7, 4), 2);
        assert_eq!(dequantize(2, 4), 8);
    }

    #[test]
    fn error_bound_exhaustive() {
        for q in [1u32, 2, 3, 4, 8, 16] {
            for v in 0..=1023u32 {
                let r = dequantize(quantize(v, q), q);
                assert!(2 * v.abs_diff(r) <= q, "v={v} q={q} r={r}");
                let c = dequantize_clamped(quantize(v, q), q, 1023);
                assert!(2 * v.abs_diff(c) <= q);
            }
        }
        assert_eq!(dequantize_clamped(quantize(255, 2), 2, 255), 255);
    }
}
