//! Scenario files shipped with the crate.

use crate::kb::KnowledgeBase;
use crate::schema::new_kb;
use crate::sxdl::{load_str, SxdlError};

pub const CAMERA: &str = include_str!("../scenarios/camera.sxdl");
pub const DETECTOR: &str = include_str!("../scenarios/detector.sxdl");
pub const ENVIRONMENT: &str = include_str!("../scenarios/environment.sxdl");
pub const ENVIRONMENT_DIM: &str = include_str!("../scenarios/environment_dim.sxdl");
pub const SEARCH: &str = include_str!("../scenarios/search.sxdl");
pub const CONDITIONS_DEGRADED: &str = include_str!("../scenarios/conditions_degraded.sxdl");
pub const VISUAL_EXPERIENCE: &str = include_str!("../scenarios/experience/visual.jsonl");
pub const ACOUSTIC_EXPERIENCE: &str = include_str!("../scenarios/experience/acoustic.jsonl");

/// Every bundled `.sxdl` file by name.
pub const SXDL_FILES: &[(&str, &str)] = &[
    ("camera.sxdl", CAMERA),
    ("detector.sxdl", DETECTOR),
    ("environment.sxdl", ENVIRONMENT),
    ("environment_dim.sxdl", ENVIRONMENT_DIM),
    ("search.sxdl", SEARCH),
    ("conditions_degraded.sxdl", CONDITIONS_DEGRADED),
];

/// A fresh KB with the given documents loaded in order.
pub fn scenario(docs: &[&str]) -> Result<KnowledgeBase, SxdlError> {
    let mut kb = new_kb();
    for d in docs {
        load_str(d, &mut kb)?;
    }
    Ok(kb)
}

/// Camera, detector and daylight environment.
pub fn camera_detector() -> KnowledgeBase {
    scenario(&[CAMERA, DETECTOR, ENVIRONMENT]).expect("bundled files load")
}

/// The search mission: camera, detector and both victim pipelines, with
/// either the normal or the dim environment.
pub fn search_mission(dim: bool) -> KnowledgeBase {
    let env = if dim { ENVIRONMENT_DIM } else { ENVIRONMENT };
    scenario(&[CAMERA, DETECTOR, env, SEARCH]).expect("bundled files load")
}
