//! Property tests for the geometric and metric invariants.

use grounddepth::blend::{blend_depth, regression_loss};
use grounddepth::camera::{intrinsics_matrix, CameraModel};
use grounddepth::dataio::pfm::{read_pfm, write_pfm, PfmMap};
use grounddepth::groundgeom::{
    planar_ground_depth, slope_from_depth, soft_slope, undulated_ground_depth, SlopeBinning,
    SlopeProbabilities, SparseDepth, SparseSample,
};
use grounddepth::map::{AttentionMap, DepthMap, SlopeMap};
use grounddepth::math::{axis_angle_rotation, identity, inverse, mat_vec};
use grounddepth::metrics::depth_metrics_2d;
use grounddepth::scalar::deg_to_rad;
use proptest::prelude::*;

/// Cameras covering KITTI/DDAD-like rigs, always at least 0.3 m above the
/// ground plane so a meaningful part of the frame sees ground.
fn camera_strategy() -> impl Strategy<Value = CameraModel<f64>> {
    (
        (50.0..1500.0f64, 50.0..1500.0f64),
        (0.0..64.0f64, 0.0..48.0f64),
        [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64],
        -10.0..10.0f64,
        [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64],
        0.3..2.5f64,
    )
        .prop_map(|((fx, fy), (cx, cy), axis, angle_deg, t, above)| {
            let axis = if axis.iter().map(|a| a.abs()).sum::<f64>() < 1e-3 {
                [1.0, 0.0, 0.0]
            } else {
                axis
            };
            let r = axis_angle_rotation(axis, deg_to_rad(angle_deg));
            let k = intrinsics_matrix(fx, fy, cx, cy);
            // pick h so the optical center sits `above` meters over the ground
            let b = mat_vec(&inverse(&r).unwrap(), &[-t[0], -t[1], -t[2]]);
            let h = b[1] + above;
            CameraModel::new(k, r, t, h).expect("generated camera is valid")
        })
}

proptest! {
    #[test]
    fn project_inverts_ray_point(
        cam in camera_strategy(),
        u in -10.0..1500.0f64,
        v in -10.0..1500.0f64,
        z in 0.05..500.0f64,
    ) {
        let p = cam.ray_point(u, v, z).unwrap();
        let (u2, v2, z2) = cam.project(&p).unwrap();
        prop_assert!((u2 - u).abs() < 1e-9 * u.abs().max(1.0), "{u} -> {u2}");
        prop_assert!((v2 - v).abs() < 1e-9 * v.abs().max(1.0), "{v} -> {v2}");
        prop_assert!((z2 - z).abs() < 1e-9 * z.max(1.0), "{z} -> {z2}");
    }

    #[test]
    fn rescaled_projection_scales_pixel_coordinates(
        cam in camera_strategy(),
        sx in 0.1..8.0f64,
        sy in 0.1..8.0f64,
        u in 0.0..800.0f64,
        v in 0.0..600.0f64,
        z in 0.5..200.0f64,
    ) {
        let p = cam.ray_point(u, v, z).unwrap();
        let scaled = cam.rescale_intrinsics(sx, sy).unwrap();
        let (u1, v1, z1) = cam.project(&p).unwrap();
        let (u2, v2, z2) = scaled.project(&p).unwrap();
        prop_assert!((u2 - sx * u1).abs() < 1e-9 * (sx * u1).abs().max(1.0));
        prop_assert!((v2 - sy * v1).abs() < 1e-9 * (sy * v1).abs().max(1.0));
        prop_assert!((z2 - z1).abs() < 1e-12 * z1.max(1.0));
    }

    #[test]
    fn planar_and_sloped_maps_never_store_negatives(
        cam in camera_strategy(),
        alpha_deg in -5.0..5.0f64,
    ) {
        let planar = planar_ground_depth(&cam, 32, 24);
        prop_assert!(planar.data().iter().all(|z| *z >= 0.0 && z.is_finite()));
        let slope = SlopeMap::uniform(32, 24, deg_to_rad(alpha_deg)).unwrap();
        let sloped = undulated_ground_depth(&cam, &slope);
        prop_assert!(sloped.data().iter().all(|z| *z >= 0.0 && z.is_finite()));
    }

    #[test]
    fn slope_inversion_round_trips_over_the_admissible_range(
        cam in camera_strategy(),
        alpha_deg in -28.0..28.0f64,
    ) {
        let alpha = deg_to_rad(alpha_deg);
        let slope = SlopeMap::uniform(32, 24, alpha).unwrap();
        let map = undulated_ground_depth(&cam, &slope);
        for (x, y, z) in map.iter_valid() {
            let back = slope_from_depth(&cam, x as f64, y as f64, z).unwrap();
            prop_assert!((back - alpha).abs() < 1e-9, "alpha {alpha} -> {back}");
        }
    }

    #[test]
    fn planar_depth_decreases_down_every_column_for_level_cameras(
        f in 50.0..1500.0f64,
        cy in 0.0..48.0f64,
        h in 0.5..2.5f64,
    ) {
        let cam = CameraModel::new(
            intrinsics_matrix(f, f, 32.0, cy),
            identity(),
            [0.0; 3],
            h,
        ).unwrap();
        let map = planar_ground_depth(&cam, 64, 48);
        for x in [0usize, 31, 63] {
            let mut prev = f64::INFINITY;
            for y in 0..48 {
                let z = map.get(x, y);
                if z > 0.0 {
                    prop_assert!(z < prev, "column {x} not strictly decreasing at row {y}");
                    prev = z;
                }
            }
        }
    }

    #[test]
    fn blend_stays_between_its_inputs(
        g in 0.1..50.0f64,
        r in 0.1..50.0f64,
        w in 0.0..1.0f64,
    ) {
        let ground = DepthMap::new(1, 1, vec![g]).unwrap();
        let residual = DepthMap::new(1, 1, vec![r]).unwrap();
        let atten = AttentionMap::new(1, 1, vec![w]).unwrap();
        let out = blend_depth(&ground, &residual, &atten).unwrap().get(0, 0);
        prop_assert!(out >= g.min(r) - 1e-12 && out <= g.max(r) + 1e-12);

        let sentinel = DepthMap::new(1, 1, vec![0.0]).unwrap();
        let out = blend_depth(&sentinel, &residual, &atten).unwrap().get(0, 0);
        prop_assert_eq!(out, r);
    }

    #[test]
    fn soft_slope_lies_in_the_bin_hull(
        raw in prop::collection::vec(0.001..1.0f64, 11),
    ) {
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let bins = SlopeBinning::<f64>::default();
        let p = SlopeProbabilities::new(1, 1, 11, probs).unwrap();
        let alpha = soft_slope(&p, &bins).unwrap().angle_at(0, 0).unwrap();
        prop_assert!(alpha >= bins.taus()[0] - 1e-12);
        prop_assert!(alpha <= bins.taus()[10] + 1e-12);
    }

    #[test]
    fn silog_ignores_global_scale_and_rmse_tracks_it(
        depths in prop::collection::vec(0.5..80.0f64, 4..40),
        errs in prop::collection::vec(-0.2..0.2f64, 40),
        c in 0.2..5.0f64,
    ) {
        let n = depths.len();
        let pred_vals: Vec<f64> = depths
            .iter()
            .zip(&errs)
            .map(|(z, e)| (z * (1.0 + e)).max(0.01))
            .collect();
        let gt = SparseDepth::new(
            depths
                .iter()
                .enumerate()
                .map(|(i, &z)| SparseSample { u: i as f64, v: 0.0, z })
                .collect(),
        )
        .unwrap();

        let pred = DepthMap::new(n, 1, pred_vals.clone()).unwrap();
        let base = depth_metrics_2d(&pred, &gt, 1e6).unwrap();

        let scaled_pred = DepthMap::new(n, 1, pred_vals.iter().map(|p| c * p).collect()).unwrap();
        let scaled = depth_metrics_2d(&scaled_pred, &gt, 1e6).unwrap();
        prop_assert!((scaled.silog - base.silog).abs() < 1e-9 * base.silog.max(1.0));

        // joint scaling: abs_rel and sq_rel/c invariant, rmse scales by c
        let gt_scaled = SparseDepth::new(
            gt.samples()
                .iter()
                .map(|s| SparseSample { u: s.u, v: s.v, z: c * s.z })
                .collect(),
        )
        .unwrap();
        let joint = depth_metrics_2d(&scaled_pred, &gt_scaled, 1e6).unwrap();
        prop_assert!((joint.abs_rel - base.abs_rel).abs() < 1e-9 * base.abs_rel.max(1.0));
        prop_assert!((joint.rmse - c * base.rmse).abs() < 1e-9 * (c * base.rmse).max(1.0));
    }

    #[test]
    fn regression_loss_is_scale_invariant_at_lambda_one(
        depths in prop::collection::vec(0.5..80.0f64, 4..20),
        c in 0.2..5.0f64,
    ) {
        let n = depths.len();
        let gt = SparseDepth::new(
            depths
                .iter()
                .enumerate()
                .map(|(i, &z)| SparseSample { u: i as f64, v: 0.0, z })
                .collect(),
        )
        .unwrap();
        let pred = DepthMap::new(n, 1, depths.iter().map(|z| c * z).collect()).unwrap();
        let loss = regression_loss(&pred, &gt, 1.0).unwrap();
        prop_assert!(loss.abs() < 1e-12, "constant scaling must vanish, got {loss}");
        // and with the default weight the closed form is (1-λ)·ln²c
        let loss = regression_loss(&pred, &gt, 0.85).unwrap();
        let expect = 0.15 * c.ln() * c.ln();
        prop_assert!((loss - expect).abs() < 1e-9 * expect.max(1e-6));
    }

    #[test]
    fn pfm_round_trip_is_bit_exact(
        bits in prop::collection::vec(any::<u32>(), 1..64),
        width in 1usize..8,
    ) {
        let data: Vec<f32> = bits
            .iter()
            .map(|&b| {
                let f = f32::from_bits(b);
                if f.is_finite() { f } else { 0.0 }
            })
            .collect();
        let height = data.len() / width;
        prop_assume!(height >= 1);
        let data = data[..width * height].to_vec();
        let map = PfmMap::new(width, height, data.clone()).unwrap();
        let mut buf = Vec::new();
        write_pfm(&mut buf, &map).unwrap();
        let back = read_pfm(buf.as_slice()).unwrap();
        for (a, b) in data.iter().zip(back.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
