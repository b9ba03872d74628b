//! Depth-prediction evaluation: the five 2D error metrics, point-cloud
//! F-score and IoU, the fractional evaluation crop, and distance-binned
//! reporting.
//!
//! Over ground-truth samples `j` with error `e_j = pred_j − gt_j` and
//! log-residual `d_j = ln pred_j − ln gt_j`:
//!
//! ```text
//! abs_rel  = mean(|e|/gt)          sq_rel  = mean(e²/gt)
//! rmse     = sqrt(mean(e²))        rmse_log = sqrt(mean(d²))
//! silog    = 100·sqrt(mean(d²) − (mean d)²)
//! ```
//!
//! SILog carries the conventional ×100 factor. All reductions accumulate
//! sequentially in sample order, so totals are reproducible run to run.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groundgeom::{SparseDepth, SparseSample};
use crate::map::{pixel_index, DepthMap};
use crate::scalar::Scalar;

/// Default point-cloud matching distance in meters.
pub const DEFAULT_CLOUD_TAU: f64 = 0.1;

/// Depth caps in meters for the two common evaluation conventions.
pub const DEPTH_CAP_KITTI: f64 = 80.0;
pub const DEPTH_CAP_LONG_RANGE: f64 = 200.0;

/// A set of 3D points in meters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud<S> {
    points: Vec<[S; 3]>,
}

impl<S: Scalar> PointCloud<S> {
    pub fn new(points: Vec<[S; 3]>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        Ok(Self { points })
    }

    pub(crate) fn from_points_unchecked(points: Vec<[S; 3]>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[[S; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Every metric the evaluation reports. `f_score` and `iou` are present
/// only when point clouds were evaluated.
///
/// The point-cloud IoU counts a true positive per matched ground-truth
/// point; with that convention `f_score >= iou` holds for all
/// non-degenerate matchings (it can fail only when many ground-truth
/// points collapse onto one predicted point within τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport<S> {
    pub abs_rel: S,
    pub sq_rel: S,
    pub rmse: S,
    pub rmse_log: S,
    pub silog: S,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_score: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou: Option<S>,
    pub n_pixels: usize,
}

/// The five 2D metrics over ground-truth samples with `0 < gt <= cap`.
///
/// Samples outside the map bounds or with a non-positive prediction at a
/// selected sample are errors (the log-space metrics are undefined there);
/// an empty selection is an error.
pub fn depth_metrics_2d<S: Scalar>(
    pred: &DepthMap<S>,
    gt: &SparseDepth<S>,
    cap: S,
) -> Result<MetricReport<S>> {
    if !(cap > S::zero() && cap.is_finite()) {
        return Err(Error::validation(format!(
            "depth cap must be positive and finite, got {cap}"
        )));
    }
    let mut n = 0usize;
    let mut sum_abs_rel = S::zero();
    let mut sum_sq_rel = S::zero();
    let mut sum_e2 = S::zero();
    let mut sum_d = S::zero();
    let mut sum_d2 = S::zero();
    for s in gt.samples() {
        if s.z > cap {
            continue;
        }
        let Some((x, y)) = pixel_index(s.u, s.v, pred.width(), pred.height()) else {
            return Err(Error::validation(format!(
                "ground-truth sample at ({}, {}) falls outside the {}x{} prediction",
                s.u,
                s.v,
                pred.width(),
                pred.height()
            )));
        };
        let p = pred.get(x, y);
        if p <= S::zero() {
            return Err(Error::numeric(format!(
                "non-positive prediction {p} at sample pixel ({x}, {y}); log metrics undefined"
            )));
        }
        let e = p - s.z;
        let d = p.ln() - s.z.ln();
        sum_abs_rel = sum_abs_rel + e.abs() / s.z;
        sum_sq_rel = sum_sq_rel + e * e / s.z;
        sum_e2 = sum_e2 + e * e;
        sum_d = sum_d + d;
        sum_d2 = sum_d2 + d * d;
        n += 1;
    }
    if n == 0 {
        return Err(Error::numeric(
            "no ground-truth sample within the depth cap overlaps the prediction".to_string(),
        ));
    }
    let count = S::of_usize(n);
    let mean_d = sum_d / count;
    let mean_d2 = sum_d2 / count;
    // variance can round a hair below zero when d is constant
    let si_var = (mean_d2 - mean_d * mean_d).max(S::zero());
    Ok(MetricReport {
        abs_rel: sum_abs_rel / count,
        sq_rel: sum_sq_rel / count,
        rmse: (sum_e2 / count).sqrt(),
        rmse_log: mean_d2.sqrt(),
        silog: S::of(100.0) * si_var.sqrt(),
        f_score: None,
        iou: None,
        n_pixels: n,
    })
}

/// Fixed-radius neighbor index over a uniform grid with cell size τ.
/// Checking the 27 cells around a query covers every point within τ,
/// so membership tests are exact.
struct TauGrid<'a, S> {
    tau: S,
    tau_sq: S,
    cells: HashMap<[i64; 3], Vec<usize>>,
    points: &'a [[S; 3]],
}

impl<'a, S: Scalar> TauGrid<'a, S> {
    fn build(points: &'a [[S; 3]], tau: S) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, tau)).or_default().push(i);
        }
        Self {
            tau,
            tau_sq: tau * tau,
            cells,
            points,
        }
    }

    fn key(p: &[S; 3], tau: S) -> [i64; 3] {
        [
            (p[0] / tau).floor().to_i64().unwrap_or(i64::MAX),
            (p[1] / tau).floor().to_i64().unwrap_or(i64::MAX),
            (p[2] / tau).floor().to_i64().unwrap_or(i64::MAX),
        ]
    }

    fn has_neighbor_within_tau(&self, q: &[S; 3]) -> bool {
        let base = Self::key(q, self.tau);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    let key = [base[0] + dx, base[1] + dy, base[2] + dz];
                    let Some(bucket) = self.cells.get(&key) else {
                        continue;
                    };
                    for &i in bucket {
                        let p = &self.points[i];
                        let d0 = p[0] - q[0];
                        let d1 = p[1] - q[1];
                        let d2 = p[2] - q[2];
                        if d0 * d0 + d1 * d1 + d2 * d2 <= self.tau_sq {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Point-cloud F-score and IoU at matching distance τ.
///
/// Precision is the fraction of predicted points within τ of some
/// ground-truth point; recall the fraction of ground-truth points within τ
/// of some predicted point; `F = 2PR/(P + R)` (zero when both vanish).
/// IoU counts matched ground-truth points as true positives:
/// `|TP| / (|pred| + |gt| − |TP|)`.
pub fn pointcloud_f_iou<S: Scalar>(
    pred: &PointCloud<S>,
    gt: &PointCloud<S>,
    tau: S,
) -> Result<(S, S)> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::numeric(format!(
            "point-cloud metrics need non-empty clouds, got |pred| = {}, |gt| = {}",
            pred.len(),
            gt.len()
        )));
    }
    if !(tau > S::zero() && tau.is_finite()) {
        return Err(Error::validation(format!(
            "matching distance must be positive and finite, got {tau}"
        )));
    }

    let gt_grid = TauGrid::build(gt.points(), tau);
    let matched_pred = pred
        .points()
        .iter()
        .filter(|p| gt_grid.has_neighbor_within_tau(p))
        .count();

    let pred_grid = TauGrid::build(pred.points(), tau);
    let matched_gt = gt
        .points()
        .iter()
        .filter(|p| pred_grid.has_neighbor_within_tau(p))
        .count();

    let precision = S::of_usize(matched_pred) / S::of_usize(pred.len());
    let recall = S::of_usize(matched_gt) / S::of_usize(gt.len());
    let f_score = if precision + recall > S::zero() {
        S::of(2.0) * precision * recall / (precision + recall)
    } else {
        S::zero()
    };
    let tp = S::of_usize(matched_gt);
    let iou = tp / (S::of_usize(pred.len()) + S::of_usize(gt.len()) - tp);
    Ok((f_score, iou))
}

/// Fractional evaluation crop. Row `y` survives when
/// `floor(top·H) <= y < floor(bottom·H)`, and likewise for columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropSpec<S> {
    pub top: S,
    pub bottom: S,
    pub left: S,
    pub right: S,
}

impl<S: Scalar> CropSpec<S> {
    pub fn new(top: S, bottom: S, left: S, right: S) -> Result<Self> {
        let spec = Self {
            top,
            bottom,
            left,
            right,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The community-standard crop fractions for KITTI-sized frames.
    pub fn garg() -> Self {
        Self {
            top: S::of(0.40810811),
            bottom: S::of(0.99189189),
            left: S::of(0.03594771),
            right: S::of(0.96405229),
        }
    }

    /// Crop that keeps the whole frame.
    pub fn full() -> Self {
        Self {
            top: S::zero(),
            bottom: S::one(),
            left: S::zero(),
            right: S::one(),
        }
    }

    fn validate(&self) -> Result<()> {
        let unit = S::zero()..=S::one();
        for (name, v) in [
            ("top", self.top),
            ("bottom", self.bottom),
            ("left", self.left),
            ("right", self.right),
        ] {
            if !v.is_finite() || !unit.contains(&v) {
                return Err(Error::validation(format!(
                    "crop fraction {name} = {v} lies outside [0, 1]"
                )));
            }
        }
        let ordered = |a: S, b: S| a.partial_cmp(&b) == Some(std::cmp::Ordering::Less);
        if !ordered(self.top, self.bottom) || !ordered(self.left, self.right) {
            return Err(Error::validation(
                "degenerate crop: need top < bottom and left < right".to_string(),
            ));
        }
        Ok(())
    }

    /// Retained row range `[floor(top·H), floor(bottom·H))`.
    pub fn row_range(&self, height: usize) -> (usize, usize) {
        let h = S::of_usize(height);
        let lo = (self.top * h).floor().to_usize().unwrap_or(0);
        let hi = (self.bottom * h).floor().to_usize().unwrap_or(height);
        (lo.min(height), hi.min(height))
    }

    /// Retained column range `[floor(left·W), floor(right·W))`.
    pub fn col_range(&self, width: usize) -> (usize, usize) {
        let w = S::of_usize(width);
        let lo = (self.left * w).floor().to_usize().unwrap_or(0);
        let hi = (self.right * w).floor().to_usize().unwrap_or(width);
        (lo.min(width), hi.min(width))
    }

    /// Whether continuous pixel coordinates land inside the crop of a
    /// `width`×`height` frame.
    pub fn contains(&self, u: S, v: S, width: usize, height: usize) -> bool {
        match pixel_index(u, v, width, height) {
            Some((x, y)) => {
                let (r0, r1) = self.row_range(height);
                let (c0, c1) = self.col_range(width);
                x >= c0 && x < c1 && y >= r0 && y < r1
            }
            None => false,
        }
    }

    /// Keeps only the samples inside the crop.
    pub fn filter_sparse(
        &self,
        sparse: &SparseDepth<S>,
        width: usize,
        height: usize,
    ) -> SparseDepth<S> {
        let kept: Vec<SparseSample<S>> = sparse
            .samples()
            .iter()
            .filter(|s| self.contains(s.u, s.v, width, height))
            .copied()
            .collect();
        SparseDepth::new(kept).expect("filtered samples were already validated")
    }
}

/// Marks everything outside the crop invalid; geometry (width, height, and
/// pixel positions) is preserved.
pub fn apply_eval_crop<S: Scalar>(map: &DepthMap<S>, crop: &CropSpec<S>) -> Result<DepthMap<S>> {
    crop.validate()?;
    let (r0, r1) = crop.row_range(map.height());
    let (c0, c1) = crop.col_range(map.width());
    if r0 >= r1 || c0 >= c1 {
        return Err(Error::validation(format!(
            "crop degenerates to an empty region on a {}x{} map",
            map.width(),
            map.height()
        )));
    }
    let mut data = vec![S::zero(); map.width() * map.height()];
    for y in r0..r1 {
        for x in c0..c1 {
            data[y * map.width() + x] = map.get(x, y);
        }
    }
    Ok(DepthMap::from_raw(map.width(), map.height(), data))
}

/// Distance intervals for binned evaluation: strictly increasing edges,
/// first edge non-negative; samples go to the left-closed, right-open
/// interval containing their ground-truth depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBins<S> {
    edges: Vec<S>,
}

impl<S: Scalar> DistanceBins<S> {
    pub fn new(edges: Vec<S>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::validation(format!(
                "distance bins need at least 2 edges, got {}",
                edges.len()
            )));
        }
        if !edges[0].is_finite() || edges[0] < S::zero() {
            return Err(Error::validation(format!(
                "first bin edge must be non-negative, got {}",
                edges[0]
            )));
        }
        for i in 1..edges.len() {
            if !edges[i].is_finite() || edges[i] <= edges[i - 1] {
                return Err(Error::validation(
                    "distance bin edges must be strictly increasing".to_string(),
                ));
            }
        }
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[S] {
        &self.edges
    }

    pub fn intervals(&self) -> impl Iterator<Item = (S, S)> + '_ {
        self.edges.windows(2).map(|w| (w[0], w[1]))
    }

    fn interval_of(&self, z: S) -> Option<usize> {
        if z < self.edges[0] || z >= self.edges[self.edges.len() - 1] {
            return None;
        }
        // left-closed, right-open
        Some(self.edges.partition_point(|e| *e <= z) - 1)
    }
}

/// Metrics for one distance interval; `metrics` is absent when no sample
/// fell inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinnedReport<S> {
    pub lo: S,
    pub hi: S,
    pub n_pixels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport<S>>,
}

/// [`depth_metrics_2d`] per distance interval, assigning each sample by
/// its ground-truth depth.
pub fn binned_metrics<S: Scalar>(
    pred: &DepthMap<S>,
    gt: &SparseDepth<S>,
    bins: &DistanceBins<S>,
    cap: S,
) -> Result<Vec<BinnedReport<S>>> {
    let n_bins = bins.edges().len() - 1;
    let mut per_bin: Vec<Vec<SparseSample<S>>> = vec![Vec::new(); n_bins];
    for s in gt.samples() {
        if s.z > cap {
            continue;
        }
        if let Some(i) = bins.interval_of(s.z) {
            per_bin[i].push(*s);
        }
    }
    let mut out = Vec::with_capacity(n_bins);
    for (i, (lo, hi)) in bins.intervals().enumerate() {
        let samples = std::mem::take(&mut per_bin[i]);
        if samples.is_empty() {
            out.push(BinnedReport {
                lo,
                hi,
                n_pixels: 0,
                metrics: None,
            });
            continue;
        }
        let sparse = SparseDepth::new(samples)?;
        let report = depth_metrics_2d(pred, &sparse, cap)?;
        out.push(BinnedReport {
            lo,
            hi,
            n_pixels: report.n_pixels,
            metrics: Some(report),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundgeom::SparseSample;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn sparse(pixels: &[(f64, f64, f64)]) -> SparseDepth<f64> {
        SparseDepth::new(
            pixels
                .iter()
                .map(|&(u, v, z)| SparseSample { u, v, z })
                .collect(),
        )
        .unwrap()
    }

    fn map_from(values: &[f64], w: usize, h: usize) -> DepthMap<f64> {
        DepthMap::new(w, h, values.to_vec()).unwrap()
    }

    #[test]
    fn exact_prediction_scores_zero() {
        let pred = map_from(&[5.0, 10.0, 20.0, 40.0], 2, 2);
        let gt = sparse(&[
            (0.0, 0.0, 5.0),
            (1.0, 0.0, 10.0),
            (0.0, 1.0, 20.0),
            (1.0, 1.0, 40.0),
        ]);
        let r = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        assert_eq!(
            (r.abs_rel, r.sq_rel, r.rmse, r.rmse_log, r.silog),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(r.n_pixels, 4);
    }

    #[test]
    fn constant_ratio_closed_forms() {
        let gt_vals = [5.0, 10.0, 20.0, 40.0];
        let pred_vals: Vec<f64> = gt_vals.iter().map(|z| 1.1 * z).collect();
        let pred = map_from(&pred_vals, 2, 2);
        let gt = sparse(&[
            (0.0, 0.0, 5.0),
            (1.0, 0.0, 10.0),
            (0.0, 1.0, 20.0),
            (1.0, 1.0, 40.0),
        ]);
        let r = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        assert_close(r.abs_rel, 0.1, 1e-12);
        assert_close(r.rmse_log, 1.1f64.ln(), 1e-12);
        assert_close(r.rmse_log, 0.09531, 1e-5);
        assert_close(r.silog, 0.0, 1e-9);
    }

    #[test]
    fn cap_filters_samples() {
        let pred = map_from(&[5.0, 100.0], 2, 1);
        let gt = sparse(&[(0.0, 0.0, 5.0), (1.0, 0.0, 95.0)]);
        let r = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        assert_eq!(r.n_pixels, 1);
        assert_eq!(r.abs_rel, 0.0);
    }

    #[test]
    fn error_paths_of_metrics() {
        let pred = map_from(&[0.0, 5.0], 2, 1);
        // sample at a sentinel prediction
        let gt = sparse(&[(0.0, 0.0, 5.0)]);
        assert!(depth_metrics_2d(&pred, &gt, 80.0).is_err());
        // no overlap within the cap
        let gt = sparse(&[(1.0, 0.0, 200.0)]);
        assert!(depth_metrics_2d(&pred, &gt, 80.0).is_err());
        // out of bounds
        let gt = sparse(&[(9.0, 0.0, 5.0)]);
        assert!(depth_metrics_2d(&pred, &gt, 80.0).is_err());
    }

    #[test]
    fn silog_is_scale_invariant() {
        let pred = map_from(&[4.0, 9.0, 18.0, 35.0], 2, 2);
        let gt = sparse(&[
            (0.0, 0.0, 5.0),
            (1.0, 0.0, 10.0),
            (0.0, 1.0, 20.0),
            (1.0, 1.0, 40.0),
        ]);
        let base = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        for c in [0.5, 2.0, 7.3] {
            let scaled_pred = map_from(&[4.0 * c, 9.0 * c, 18.0 * c, 35.0 * c], 2, 2);
            let r = depth_metrics_2d(&scaled_pred, &gt, 8000.0).unwrap();
            assert_close(r.silog, base.silog, 1e-9);
        }
    }

    #[test]
    fn identical_clouds_score_one() {
        let cloud =
            PointCloud::new(vec![[0.0, 0.0, 1.0], [1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]).unwrap();
        let (f, iou) = pointcloud_f_iou(&cloud, &cloud, 0.1).unwrap();
        assert_eq!((f, iou), (1.0, 1.0));
    }

    #[test]
    fn distant_clouds_score_zero() {
        let gt = PointCloud::new(vec![[0.0, 0.0, 1.0], [1.0, 2.0, 3.0]]).unwrap();
        let tau = 0.1;
        let pred = PointCloud::new(
            gt.points()
                .iter()
                .map(|p| [p[0] + 10.0 * tau, p[1], p[2]])
                .collect(),
        )
        .unwrap();
        let (f, iou) = pointcloud_f_iou(&pred, &gt, tau).unwrap();
        assert_eq!((f, iou), (0.0, 0.0));
    }

    #[test]
    fn outlier_half_matches_hand_count() {
        // gt: 4 points; pred: the same 4 plus 4 far outliers
        let gt_pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mut pred_pts = gt_pts.clone();
        for i in 0..4 {
            pred_pts.push([100.0 + 10.0 * i as f64, 100.0, 100.0]);
        }
        let gt = PointCloud::new(gt_pts).unwrap();
        let pred = PointCloud::new(pred_pts).unwrap();
        let (f, iou) = pointcloud_f_iou(&pred, &gt, 0.25).unwrap();
        assert_close(f, 2.0 / 3.0, 1e-12);
        assert_close(iou, 0.5, 1e-12);
    }

    #[test]
    fn cloud_metrics_are_rigid_invariant() {
        let r = crate::math::axis_angle_rotation([0.1, 0.7, -0.3], 0.8f64);
        let shift = [4.0, -2.0, 9.0];
        let apply = |p: &[f64; 3]| {
            let q = crate::math::mat_vec(&r, p);
            [q[0] + shift[0], q[1] + shift[1], q[2] + shift[2]]
        };
        let gt_pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [2.0, 2.0, 2.0],
        ];
        let pred_pts = vec![[0.05, 0.0, 0.0], [1.0, 0.04, 0.0], [7.0, 7.0, 7.0]];
        let base = pointcloud_f_iou(
            &PointCloud::new(pred_pts.clone()).unwrap(),
            &PointCloud::new(gt_pts.clone()).unwrap(),
            0.1,
        )
        .unwrap();
        let moved = pointcloud_f_iou(
            &PointCloud::new(pred_pts.iter().map(apply).collect()).unwrap(),
            &PointCloud::new(gt_pts.iter().map(apply).collect()).unwrap(),
            0.1,
        )
        .unwrap();
        assert_close(base.0, moved.0, 1e-9);
        assert_close(base.1, moved.1, 1e-9);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let cloud = PointCloud::new(vec![[0.0, 0.0, 1.0]]).unwrap();
        let empty = PointCloud::<f64>::default();
        assert!(pointcloud_f_iou(&empty, &cloud, 0.1).is_err());
        assert!(pointcloud_f_iou(&cloud, &empty, 0.1).is_err());
        assert!(pointcloud_f_iou(&cloud, &cloud, 0.0).is_err());
    }

    #[test]
    fn garg_crop_on_kitti_frame() {
        let crop = CropSpec::<f64>::garg();
        assert_eq!(crop.row_range(375), (153, 371));
        assert_eq!(crop.col_range(1242), (44, 1197));
    }

    #[test]
    fn full_crop_is_identity() {
        let map = map_from(&[1.0, 2.0, 3.0, 4.0], 2, 2);
        let out = apply_eval_crop(&map, &CropSpec::full()).unwrap();
        assert_eq!(out, map);
    }

    #[test]
    fn crop_invalidates_outside_and_keeps_geometry() {
        let map = DepthMap::filled(4, 4, 7.0).unwrap();
        let crop = CropSpec::new(0.25, 0.75, 0.25, 0.75).unwrap();
        let out = apply_eval_crop(&map, &crop).unwrap();
        assert_eq!(out.width(), 4);
        assert_eq!(out.height(), 4);
        assert_eq!(out.valid_count(), 4); // rows 1..3 × cols 1..3
        assert!(out.is_valid(1, 1) && out.is_valid(2, 2));
        assert!(!out.is_valid(0, 0) && !out.is_valid(3, 3));
    }

    #[test]
    fn degenerate_crop_is_rejected() {
        let map = DepthMap::filled(4, 4, 7.0).unwrap();
        assert!(CropSpec::new(0.5, 0.5, 0.0, 1.0).is_err());
        assert!(CropSpec::new(0.0, 1.0, 0.9, 0.1).is_err());
        assert!(CropSpec::new(-0.1, 1.0, 0.0, 1.0).is_err());
        // valid fractions that floor to an empty pixel range
        let tiny = CropSpec::new(0.10, 0.12, 0.0, 1.0).unwrap();
        assert!(apply_eval_crop(&map, &tiny).is_err());
    }

    #[test]
    fn errors_outside_the_crop_do_not_count() {
        // prediction wrong only in the top rows, which the crop removes
        let mut vals = vec![99.0; 16];
        for y in 2..4 {
            for x in 0..4 {
                vals[y * 4 + x] = 10.0;
            }
        }
        let pred = map_from(&vals, 4, 4);
        let gt_all = sparse(&[(0.0, 0.0, 10.0), (1.0, 3.0, 10.0), (2.0, 2.0, 10.0)]);
        let crop = CropSpec::new(0.5, 1.0, 0.0, 1.0).unwrap();
        let gt_cropped = crop.filter_sparse(&gt_all, 4, 4);
        assert_eq!(gt_cropped.len(), 2);
        let r = depth_metrics_2d(&pred, &gt_cropped, 80.0).unwrap();
        assert_eq!(r.abs_rel, 0.0);
        assert_eq!(r.rmse, 0.0);
    }

    #[test]
    fn single_bin_equals_overall_metrics() {
        let pred = map_from(&[5.5, 9.0, 22.0, 41.0], 2, 2);
        let gt = sparse(&[
            (0.0, 0.0, 5.0),
            (1.0, 0.0, 10.0),
            (0.0, 1.0, 20.0),
            (1.0, 1.0, 40.0),
        ]);
        let overall = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        let bins = DistanceBins::new(vec![0.0, 80.0]).unwrap();
        let binned = binned_metrics(&pred, &gt, &bins, 80.0).unwrap();
        assert_eq!(binned.len(), 1);
        let m = binned[0].metrics.unwrap();
        assert_eq!(m, overall);
    }

    #[test]
    fn two_bin_hand_computation() {
        // gt at depths 5 and 25 with errors +1 and -2
        let pred = map_from(&[6.0, 23.0], 2, 1);
        let gt = sparse(&[(0.0, 0.0, 5.0), (1.0, 0.0, 25.0)]);
        let bins = DistanceBins::new(vec![0.0, 20.0, 40.0]).unwrap();
        let binned = binned_metrics(&pred, &gt, &bins, 80.0).unwrap();
        let near = binned[0].metrics.unwrap();
        assert_close(near.abs_rel, 1.0 / 5.0, 1e-12);
        assert_close(near.rmse, 1.0, 1e-12);
        assert_eq!(near.n_pixels, 1);
        let far = binned[1].metrics.unwrap();
        assert_close(far.abs_rel, 2.0 / 25.0, 1e-12);
        assert_close(far.rmse, 2.0, 1e-12);
        assert_eq!(far.n_pixels, 1);
    }

    #[test]
    fn empty_bins_are_flagged_not_errors() {
        let pred = map_from(&[5.0], 1, 1);
        let gt = sparse(&[(0.0, 0.0, 5.0)]);
        let bins = DistanceBins::new(vec![0.0, 2.0, 80.0]).unwrap();
        let binned = binned_metrics(&pred, &gt, &bins, 80.0).unwrap();
        assert_eq!(binned[0].n_pixels, 0);
        assert!(binned[0].metrics.is_none());
        assert_eq!(binned[1].n_pixels, 1);
    }

    #[test]
    fn rmse_squared_is_sample_weighted_across_bins() {
        // deterministic pseudo-random inputs
        let mut vals = Vec::new();
        let mut gts = Vec::new();
        let mut x = 7u64;
        for i in 0..64usize {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let gt_z = 1.0 + (x >> 33) as f64 / 2.0f64.powi(31) * 75.0;
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let err = ((x >> 33) as f64 / 2.0f64.powi(31) - 0.5) * 4.0;
            vals.push((gt_z + err).max(0.05));
            gts.push((i as f64, 0.0, gt_z));
        }
        let pred = map_from(&vals, 64, 1);
        let gt = sparse(&gts);
        let overall = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        let bins = DistanceBins::new(vec![0.0, 20.0, 40.0, 60.0, 80.0]).unwrap();
        let binned = binned_metrics(&pred, &gt, &bins, 80.0).unwrap();
        let mut weighted = 0.0;
        let mut count = 0usize;
        for b in &binned {
            if let Some(m) = b.metrics {
                weighted += m.rmse * m.rmse * b.n_pixels as f64;
                count += b.n_pixels;
            }
        }
        assert_eq!(count, overall.n_pixels);
        assert_close(overall.rmse * overall.rmse, weighted / count as f64, 1e-9);
    }

    #[test]
    fn distance_bins_validate_edges() {
        assert!(DistanceBins::new(vec![0.0f64]).is_err());
        assert!(DistanceBins::new(vec![-1.0f64, 10.0]).is_err());
        assert!(DistanceBins::new(vec![0.0f64, 0.0]).is_err());
        assert!(DistanceBins::new(vec![0.0f64, 20.0, 10.0]).is_err());
    }

    #[test]
    fn report_serializes_without_cloud_metrics_when_absent() {
        let pred = map_from(&[5.0], 1, 1);
        let gt = sparse(&[(0.0, 0.0, 5.0)]);
        let r = depth_metrics_2d(&pred, &gt, 80.0).unwrap();
        let json = serde_json::to_value(r).unwrap();
        assert!(json.get("f_score").is_none());
        assert_eq!(json["n_pixels"], 1);
    }
}
