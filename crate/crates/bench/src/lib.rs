//! Shared inputs for the benchmarks, drawn from the synthetic scene
//! generator so every run measures the same data.

use mono3d::diagnosis::DiagnosisFrame;
use mono3d::evaluation::Frame;
use mono3d::geometry::Box3D;
use mono3d::synthetic::{synthetic_scene, SceneConfig};

pub fn scene(images: usize) -> Vec<DiagnosisFrame> {
    synthetic_scene(&SceneConfig {
        seed: 7,
        images,
        ..SceneConfig::default()
    })
}

pub fn eval_frames(images: usize) -> Vec<Frame> {
    scene(images).into_iter().map(|f| Frame::new(f.gts, f.preds)).collect()
}

/// Ground-truth boxes paired with their perturbed predictions.
pub fn box_pairs(images: usize) -> Vec<(Box3D, Box3D)> {
    scene(images)
        .iter()
        .flat_map(|f| f.gts.iter().zip(&f.preds).map(|(g, p)| (g.box3d(), p.box3d())).collect::<Vec<_>>())
        .collect()
}
