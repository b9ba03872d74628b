//! Implementations behind the CLI subcommands.

use std::path::{Path, PathBuf};

use grounddepth::blend::blend_depth;
use grounddepth::camera::CameraModel;
use grounddepth::dataio::calib::{load_calibration, write_calibration, Calibration};
use grounddepth::dataio::scene::load_scene_file;
use grounddepth::dataio::sparse::{load_labels, load_sparse_text, write_labels, write_sparse_text};
use grounddepth::groundgeom::{
    planar_ground_depth, slope_labels_from_sparse, undulated_ground_depth, SlopeBinning,
    SlopeLabel, SparseDepth, SparseSample,
};
use grounddepth::map::DepthMap;
use grounddepth::metrics::{
    apply_eval_crop, binned_metrics, depth_metrics_2d, pointcloud_f_iou, BinnedReport, CropSpec,
    DistanceBins, MetricReport, PointCloud,
};
use grounddepth::oracle::{oracle_render, oracle_sparse_samples};
use grounddepth::scalar::{deg_to_rad, rad_to_deg};
use grounddepth::{Error, Result};

use crate::fileio;

pub fn run_ground(calib: &Path, slope: Option<&Path>, out: &Path) -> Result<()> {
    let calibration = load_calibration::<f64>(calib)?;
    let cam = &calibration.camera;
    let (map, mode) = match slope {
        None => (
            planar_ground_depth(cam, calibration.width, calibration.height),
            "planar",
        ),
        Some(slope_path) => {
            let slope_map = fileio::load_slope(slope_path)?;
            if slope_map.width() != calibration.width || slope_map.height() != calibration.height {
                return Err(Error::DimensionMismatch(format!(
                    "slope map is {}x{} but the calibration frame is {}x{}",
                    slope_map.width(),
                    slope_map.height(),
                    calibration.width,
                    calibration.height
                )));
            }
            (undulated_ground_depth(cam, &slope_map), "sloped")
        }
    };
    let written = fileio::save_depth_auto(out, &map)?;
    let vanishing = match map.vanishing_row() {
        Some(row) => row.to_string(),
        None => "none (no ground visible)".to_string(),
    };
    println!(
        "wrote {} ({mode}): {}x{}, {} valid pixels, vanishing row {vanishing}",
        written.display(),
        map.width(),
        map.height(),
        map.valid_count()
    );
    Ok(())
}

pub fn run_synth(scene_path: &Path, out_dir: &Path, samples: usize, seed: u64) -> Result<()> {
    let scene = load_scene_file(scene_path)?.to_scene::<f64>()?;
    std::fs::create_dir_all(out_dir)?;

    let (depth, slope) = oracle_render(&scene);
    let sparse = oracle_sparse_samples(&scene, samples, seed)?;

    let depth_path = out_dir.join("ground_depth.pfm");
    fileio::save_depth_pfm(&depth_path, &depth)?;
    let slope_path = out_dir.join("slope.pfm");
    fileio::save_slope_pfm(&slope_path, &slope)?;
    let sparse_path = out_dir.join("sparse.txt");
    let mut bytes = Vec::new();
    write_sparse_text(&mut bytes, &sparse)?;
    fileio::write_atomic(&sparse_path, &bytes)?;

    println!(
        "wrote {} ({} valid pixels)",
        depth_path.display(),
        depth.valid_count()
    );
    println!(
        "wrote {} ({} valid pixels)",
        slope_path.display(),
        slope.valid_count()
    );
    println!(
        "wrote {} ({} samples, seed {seed})",
        sparse_path.display(),
        sparse.len()
    );
    Ok(())
}

pub fn run_slope_labels(
    calib: &Path,
    sparse_path: &Path,
    out: &Path,
    bins: &SlopeBinning<f64>,
) -> Result<()> {
    let calibration = load_calibration::<f64>(calib)?;
    let sparse = load_sparse_text::<f64>(sparse_path)?;
    sparse.check_bounds(calibration.width, calibration.height)?;
    let labels = slope_labels_from_sparse(&calibration.camera, &sparse, bins)?;
    let clamped = labels.iter().filter(|l| l.clamped).count();
    let mut bytes = Vec::new();
    write_labels(&mut bytes, &labels)?;
    fileio::write_atomic(out, &bytes)?;
    println!(
        "wrote {}: {} labels over {} classes, {clamped} clamped",
        out.display(),
        labels.len(),
        bins.len()
    );
    Ok(())
}

pub fn run_blend(ground: &Path, residual: &Path, attention: &Path, out: &Path) -> Result<()> {
    let ground_map = fileio::load_depth(ground)?;
    let residual_map = fileio::load_depth(residual)?;
    let attention_map = fileio::load_attention(attention)?;
    let blended = blend_depth(&ground_map, &residual_map, &attention_map)?;
    let written = fileio::save_depth_auto(out, &blended)?;
    println!(
        "wrote {}: {}x{}, {} valid pixels",
        written.display(),
        blended.width(),
        blended.height(),
        blended.valid_count()
    );
    Ok(())
}

pub struct EvalOptions {
    pub cap: f64,
    pub crop: Option<CropSpec<f64>>,
    pub bins: Option<DistanceBins<f64>>,
    pub tau: f64,
    pub calib: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

pub fn run_eval(pred_path: &Path, gt_path: &Path, opts: &EvalOptions) -> Result<()> {
    let pred = fileio::load_depth(pred_path)?;
    let gt = load_ground_truth(gt_path, &pred)?;
    let gt = match &opts.crop {
        Some(crop) => crop.filter_sparse(&gt, pred.width(), pred.height()),
        None => gt,
    };

    let mut overall = depth_metrics_2d(&pred, &gt, opts.cap)?;

    if let Some(calib_path) = &opts.calib {
        let calibration = load_calibration::<f64>(calib_path)?;
        if calibration.width != pred.width() || calibration.height != pred.height() {
            return Err(Error::DimensionMismatch(format!(
                "calibration frame is {}x{} but the prediction is {}x{}",
                calibration.width,
                calibration.height,
                pred.width(),
                pred.height()
            )));
        }
        let (f_score, iou) = cloud_scores(&pred, &gt, &calibration.camera, opts)?;
        overall.f_score = Some(f_score);
        overall.iou = Some(iou);
    }

    let per_bin = match &opts.bins {
        Some(bins) => Some(binned_metrics(&pred, &gt, bins, opts.cap)?),
        None => None,
    };

    print_report_table(&overall, per_bin.as_deref());

    if let Some(json_path) = &opts.json {
        let doc = report_json(&overall, per_bin.as_deref(), opts);
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("report serialization");
        bytes.push(b'\n');
        fileio::write_atomic(json_path, &bytes)?;
        println!("wrote {}", json_path.display());
    }
    Ok(())
}

fn load_ground_truth(path: &Path, pred: &DepthMap<f64>) -> Result<SparseDepth<f64>> {
    let is_text = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("txt"));
    if is_text {
        return load_sparse_text(path);
    }
    let map = fileio::load_depth(path)?;
    if map.width() != pred.width() || map.height() != pred.height() {
        return Err(Error::DimensionMismatch(format!(
            "ground truth is {}x{} but the prediction is {}x{}",
            map.width(),
            map.height(),
            pred.width(),
            pred.height()
        )));
    }
    SparseDepth::new(
        map.iter_valid()
            .map(|(x, y, z)| SparseSample {
                u: x as f64,
                v: y as f64,
                z,
            })
            .collect(),
    )
}

fn cloud_scores(
    pred: &DepthMap<f64>,
    gt: &SparseDepth<f64>,
    cam: &CameraModel<f64>,
    opts: &EvalOptions,
) -> Result<(f64, f64)> {
    let cropped;
    let pred_region = match &opts.crop {
        Some(crop) => {
            cropped = apply_eval_crop(pred, crop)?;
            &cropped
        }
        None => pred,
    };
    // depth cap applies to both clouds
    let capped = DepthMap::new(
        pred_region.width(),
        pred_region.height(),
        pred_region
            .data()
            .iter()
            .map(|z| if *z <= opts.cap { *z } else { 0.0 })
            .collect(),
    )?;
    let pred_cloud = cam.unproject_depth_map(&capped);

    let mut gt_points = Vec::new();
    for s in gt.samples() {
        if s.z <= opts.cap {
            gt_points.push(cam.ray_point(s.u, s.v, s.z)?.as_array());
        }
    }
    let gt_cloud = PointCloud::new(gt_points)?;
    pointcloud_f_iou(&pred_cloud, &gt_cloud, opts.tau)
}

fn print_report_table(overall: &MetricReport<f64>, per_bin: Option<&[BinnedReport<f64>]>) {
    let fmt_opt = |v: Option<f64>| match v {
        Some(v) => format!("{v:>9.4}"),
        None => format!("{:>9}", "-"),
    };
    println!(
        "{:>14} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>8}",
        "", "Abs Rel", "Sq Rel", "RMSE", "RMSE-log", "SILog", "F-score", "IoU", "pixels"
    );
    println!(
        "{:>14} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {} {} {:>8}",
        "overall",
        overall.abs_rel,
        overall.sq_rel,
        overall.rmse,
        overall.rmse_log,
        overall.silog,
        fmt_opt(overall.f_score),
        fmt_opt(overall.iou),
        overall.n_pixels
    );
    if let Some(bins) = per_bin {
        for b in bins {
            let label = format!("[{:.0}, {:.0}) m", b.lo, b.hi);
            match &b.metrics {
                Some(m) => println!(
                    "{:>14} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {} {} {:>8}",
                    label,
                    m.abs_rel,
                    m.sq_rel,
                    m.rmse,
                    m.rmse_log,
                    m.silog,
                    fmt_opt(None),
                    fmt_opt(None),
                    b.n_pixels
                ),
                None => println!(
                    "{:>14} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>8}",
                    label, "-", "-", "-", "-", "-", "-", "-", 0
                ),
            }
        }
    }
}

fn report_json(
    overall: &MetricReport<f64>,
    per_bin: Option<&[BinnedReport<f64>]>,
    opts: &EvalOptions,
) -> serde_json::Value {
    let crop = opts
        .crop
        .as_ref()
        .map(|c| vec![c.top, c.bottom, c.left, c.right]);
    serde_json::json!({
        "cap": opts.cap,
        "crop": crop,
        "tau": opts.calib.as_ref().map(|_| opts.tau),
        "overall": overall,
        "bins": per_bin,
    })
}

pub fn run_rescale(calib: &Path, sx: f64, sy: f64, out: &Path) -> Result<()> {
    let calibration = load_calibration::<f64>(calib)?;
    let rescaled = Calibration {
        camera: calibration.camera.rescale_intrinsics(sx, sy)?,
        width: ((calibration.width as f64 * sx).round() as usize).max(1),
        height: ((calibration.height as f64 * sy).round() as usize).max(1),
    };
    let mut bytes = Vec::new();
    write_calibration(&mut bytes, &rescaled)?;
    fileio::write_atomic(out, &bytes)?;
    println!(
        "wrote {}: {}x{} -> {}x{}",
        out.display(),
        calibration.width,
        calibration.height,
        rescaled.width,
        rescaled.height
    );
    Ok(())
}

pub fn run_slope_hist(
    label_paths: &[PathBuf],
    bins: &SlopeBinning<f64>,
    json: Option<&Path>,
) -> Result<()> {
    let mut labels: Vec<SlopeLabel<f64>> = Vec::new();
    for path in label_paths {
        let file_labels = load_labels::<f64>(path)?;
        if let Some(bad) = file_labels.iter().find(|l| l.class >= bins.len()) {
            return Err(Error::Validation(format!(
                "{}: class {} exceeds the {} configured bins",
                path.display(),
                bad.class,
                bins.len()
            )));
        }
        labels.extend(file_labels);
    }
    let counts = grounddepth::groundgeom::slope_histogram(&labels, bins);

    println!("{:>8} {:>10} {:>10}", "class", "tau_deg", "count");
    for (i, (tau, count)) in bins.taus().iter().zip(&counts).enumerate() {
        println!("{i:>8} {:>10.3} {count:>10}", rad_to_deg(*tau));
    }
    println!("total: {}", labels.len());

    if let Some(json_path) = json {
        let doc = serde_json::json!({
            "taus_deg": bins.taus().iter().map(|t| rad_to_deg(*t)).collect::<Vec<_>>(),
            "counts": counts,
            "total": labels.len(),
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("histogram serialization");
        bytes.push(b'\n');
        fileio::write_atomic(json_path, &bytes)?;
        println!("wrote {}", json_path.display());
    }
    Ok(())
}

/// Builds the slope binning from CLI degree flags.
pub fn binning_from_degrees(min_deg: f64, max_deg: f64, count: usize) -> Result<SlopeBinning<f64>> {
    SlopeBinning::evenly_spaced(deg_to_rad(min_deg), deg_to_rad(max_deg), count)
}
