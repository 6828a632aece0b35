use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xpcc_core::ply::{parse_ply, write_ply};
use xpcc_core::projection::project_ids;
use xpcc_core::reconstruct::{merge_sections, unproject};
use xpcc_core::{Point, PointCloud, SignedAxis};

fn random_cloud(seed: u64, n: usize, span: u32, bit_depth: u8) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..n).map(|_| [(); 3].map(|_| rng.gen_range(0..span))).collect();
    let cols = (0..n).map(|_| rng.gen()).collect();
    PointCloud::dedup(pts, cols, bit_depth).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ply_round_trip(seed in any::<u64>(), n in 0usize..300, bd in 8u8..=16) {
        let cloud = random_cloud(seed, n, 1 << 8, bd);
        let mut buf = Vec::new();
        write_ply(&cloud, &mut buf).unwrap();
        let loaded = parse_ply(&buf, bd).unwrap();
        prop_assert_eq!(loaded.duplicates, 0);
        prop_assert_eq!(loaded.cloud, cloud);
    }

    #[test]
    fn projection_accounts_for_every_point(seed in any::<u64>(), n in 1usize..300, span in 2u32..40, t in 0u32..6, code in 0u8..6) {
        let cloud = random_cloud(seed, n, span, 10);
        let ids: Vec<usize> = (0..cloud.len()).collect();
        let plane = SignedAxis::from_code(code).unwrap();
        let m = project_ids(&cloud, &ids, 0, plane, t).unwrap();
        prop_assert_eq!(m.captured() + m.lost_ids.len(), cloud.len());

        // lifted points are exactly the captured source points
        let lifted = unproject(&m, 10).unwrap();
        prop_assert_eq!(lifted.len(), m.captured());
        let merged = merge_sections(&[lifted.clone(), lifted], 0, 10).unwrap();
        prop_assert!(merged.len() <= m.captured());
        let lost: std::collections::HashSet<usize> = m.lost_ids.iter().copied().collect();
        let mut want: Vec<_> = (0..cloud.len()).filter(|i| !lost.contains(i)).map(|i| (cloud.points()[i], cloud.colors()[i])).collect();
        want.sort_unstable();
        prop_assert_eq!(merged.sorted_pairs(), want);
    }
}
