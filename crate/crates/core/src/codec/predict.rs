//! Spatial prediction over occupied pixels.
//!
//! Each occupied pixel is predicted from its left neighbour when that one is
//! occupied, else from the pixel above when occupied, else from 0.
//! Unoccupied pixels carry a zero residual.

#[inline]
fn predictor(values: &[i32], occupancy: &[u8], width: usize, i: usize) -> i32 {
    let x = i % width;
    if x > 0 && occupancy[i - 1] != 0 {
        values[i - 1]
    } else if i >= width && occupancy[i - width] != 0 {
        values[i - width]
    } else {
        0
    }
}

pub fn predict_residual(values: &[i32], occupancy: &[u8], width: usize) -> Vec<i32> {
    debug_assert_eq!(values.len(), occupancy.len());
    (0..values.len())
        .map(|i| if occupancy[i] != 0 { values[i] - predictor(values, occupancy, width, i) } else { 0 })
        .collect()
}

pub fn reconstruct_from_residual(residual: &[i32], occupancy: &[u8], width: usize) -> Vec<i32> {
    let mut values = vec![0i32; residual.len()];
    for i in 0..residual.len() {
        if occupancy[i] != 0 {
            values[i] = residual[i] + predictor(&values, occupancy, width, i);
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_map_has_zero_residuals_after_first() {
        let v = vec![7; 12];
        let occ = vec![1; 12];
        let r = predict_residual(&v, &occ, 4);
        assert_eq!(r[0], 7);
        assert!(r[1..].iter().all(|&x| x == 0));
    }

    #[test]
    fn single_pixel() {
        let mut occ = vec![0; 9];
        occ[4] = 1;
        let mut v = vec![0; 9];
        v[4] = 9;
        let r = predict_residual(&v, &occ, 3);
        assert_eq!(r[4], 9);
        assert_eq!(reconstruct_from_residual(&r, &occ, 3), v);
    }

    #[test]
    fn falls_back_to_up_neighbour() {
        // row 0: [5, _], row 1: [_, 8] -> pixel (1,1): left empty, up empty -> 0
        // row 0: [5, 6], row 1: [_, 8] -> up = 6
        let occ = vec![1, 1, 0, 1];
        let v = vec![5, 6, 0, 8];
        assert_eq!(predict_residual(&v, &occ, 2), vec![5, 1, 0, 2]);
    }

    proptest! {
        #[test]
        fn inverse_identity(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let n = w * h;
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) as i32 };
            let occ: Vec<u8> = (0..n).map(|_| (next() & 1) as u8).collect();
            let v: Vec<i32> = occ.iter().map(|&o| if o != 0 { next() % 1024 } else { 0 }).collect();
            let r = predict_residual(&v, &occ, w);
            prop_assert_eq!(reconstruct_from_residual(&r, &occ, w), v);
        }
    }
}
