//! Bit-exact file I/O: calibration text, 16-bit PNG depth (KITTI
//! convention), PFM float maps, sparse-sample and label text, and JSON
//! scene descriptions.

pub mod calib;
pub mod pfm;
pub mod png16;
pub mod scene;
pub mod sparse;

pub use calib::{
    load_calibration, parse_calibration, save_calibration, write_calibration, Calibration,
};
pub use pfm::{load_pfm, read_pfm, save_pfm, write_pfm, PfmMap, SLOPE_INVALID_PFM};
pub use png16::{
    fits_png16, load_depth_png16, read_depth_png16, save_depth_png16, write_depth_png16,
    MAX_PNG16_DEPTH,
};
pub use scene::{load_scene_file, CameraBlock, SceneFile, TerrainBlock};
pub use sparse::{
    load_labels, load_sparse_text, parse_labels, parse_sparse_text, save_labels, save_sparse_text,
    write_labels, write_sparse_text,
};
