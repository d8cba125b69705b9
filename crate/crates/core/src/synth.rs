//! Analytic scene renderer used as a ground-truth oracle: planes and
//! spheres with a band-limited procedural texture, seen by a rig moving
//! along a trajectory.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Camera, Intrinsics, MatrixRows, Rig, RigidTransform};
use crate::losses::{ContextFrame, FrameSet};
use crate::raster::{ColorImage, Grid, ScalarMap};

/// Ray hits closer than this (meters along the ray) are ignored.
const MIN_HIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Primitive {
    /// Points `X` with `normal · X = offset` (world frame).
    Plane { normal: [f64; 3], offset: f64 },
    Sphere { center: [f64; 3], radius: f64 },
}

impl Primitive {
    pub fn plane(normal: Vector3<f64>, offset: f64) -> Self {
        Primitive::Plane {
            normal: normal.into(),
            offset,
        }
    }

    pub fn sphere(center: Vector3<f64>, radius: f64) -> Self {
        Primitive::Sphere {
            center: center.into(),
            radius,
        }
    }

    fn validate(&self) -> Result<Self> {
        match *self {
            Primitive::Plane { normal, offset } => {
                let n = Vector3::from(normal);
                let len = n.norm();
                if !(len > 1e-12 && len.is_finite() && offset.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "plane needs a non-zero finite normal, got {normal:?}"
                    )));
                }
                Ok(Primitive::Plane {
                    normal: (n / len).into(),
                    offset: offset / len,
                })
            }
            Primitive::Sphere { center, radius } => {
                if !(radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())) {
                    return Err(Error::InvalidArgument(format!(
                        "sphere needs a finite center and positive radius, got {radius}"
                    )));
                }
                Ok(*self)
            }
        }
    }

    /// Smallest ray parameter `t > MIN_HIT` with `origin + t·dir` on the surface.
    pub fn intersect(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        match *self {
            Primitive::Plane { normal, offset } => {
                let n = Vector3::from(normal);
                let denom = n.dot(dir);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let t = (offset - n.dot(&origin.coords)) / denom;
                (t > MIN_HIT).then_some(t)
            }
            Primitive::Sphere { center, radius } => {
                let oc = origin - Point3::from(center);
                let a = dir.norm_squared();
                let half_b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = half_b * half_b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                // Stable root pair.
                let q = if half_b > 0.0 { -(half_b + sq) } else { -half_b + sq };
                let (mut t0, mut t1) = (q / a, if q != 0.0 { c / q } else { 0.0 });
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                [t0, t1].into_iter().find(|t| *t > MIN_HIT)
            }
        }
    }
}

/// Sum-of-sinusoids color over world coordinates. Directions are fixed and
/// oblique to the axes; `frequency` is in cycles per meter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Texture {
    pub frequency: f64,
    /// Peak deviation from mid-gray, at most 0.5.
    pub amplitude: f64,
}

impl Default for Texture {
    fn default() -> Self {
        Self {
            frequency: 0.35,
            amplitude: 0.3,
        }
    }
}

const TEXTURE_WAVES: [[f64; 5]; 9] = [
    // direction (x, y, z), relative frequency, phase
    [0.62, 0.48, 0.62, 1.00, 0.3],
    [-0.41, 0.77, 0.49, 0.73, 1.9],
    [0.25, -0.55, 0.80, 1.31, 4.1],
    [0.71, -0.30, -0.64, 0.87, 2.2],
    [0.12, 0.91, -0.40, 1.17, 0.7],
    [-0.66, -0.21, 0.72, 0.61, 5.3],
    [0.44, 0.44, -0.78, 1.09, 3.6],
    [-0.58, 0.68, -0.45, 0.79, 1.1],
    [0.83, 0.15, 0.54, 1.23, 2.8],
];

impl Texture {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency >= 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "texture frequency must be finite and >= 0, got {}",
                self.frequency
            )));
        }
        if !(0.0..=0.5).contains(&self.amplitude) {
            return Err(Error::InvalidArgument(format!(
                "texture amplitude must be in [0, 0.5], got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    pub fn color(&self, p: &Point3<f64>) -> [f64; 3] {
        let mut out = [0.5; 3];
        for (k, wave) in TEXTURE_WAVES.iter().enumerate() {
            let d = Vector3::new(wave[0], wave[1], wave[2]).normalize();
            let phase = TAU * self.frequency * wave[3] * d.dot(&p.coords) + wave[4];
            out[k / 3] += self.amplitude / 3.0 * phase.sin();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
    #[serde(default)]
    pub texture: Texture,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>, texture: Texture) -> Result<Self> {
        texture.validate()?;
        let primitives = primitives
            .iter()
            .map(Primitive::validate)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            primitives,
            texture,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw: Scene = read_json(path)?;
        Scene::new(raw.primitives, raw.texture)
            .map_err(|e| Error::parse(path, "primitives", e.to_string()))
    }

    /// Nearest hit along a ray: `(t, point)`.
    pub fn trace(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<(f64, Point3<f64>)> {
        self.primitives
            .iter()
            .filter_map(|p| p.intersect(origin, dir))
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
            .map(|t| (t, origin + dir * t))
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::parse(path, e.path().to_string(), e.into_inner().to_string()))
}

/// World-from-body pose for each frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub poses: Vec<RigidTransform>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryConfig {
    poses: Vec<MatrixRows>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn pose(&self, frame: usize) -> Result<&RigidTransform> {
        self.poses.get(frame).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "frame {frame} out of range for a {}-frame trajectory",
                self.poses.len()
            ))
        })
    }

    /// Body motion from `t` to `t′`: maps body coordinates at `t` into the
    /// body frame at `t′`.
    pub fn body_motion(&self, t: usize, t_prime: usize) -> Result<RigidTransform> {
        Ok(self.pose(t_prime)?.inverse().compose(self.pose(t)?))
    }

    /// Per-camera motions `E_i⁻¹ M E_i`, in rig order.
    pub fn camera_motions(&self, rig: &Rig, t: usize, t_prime: usize) -> Result<Vec<RigidTransform>> {
        let m = self.body_motion(t, t_prime)?;
        Ok(rig.cameras().iter().map(|c| c.extrinsics.conjugate(&m)).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: TrajectoryConfig = read_json(path)?;
        let poses = cfg
            .poses
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m.to_transform()
                    .map_err(|e| Error::parse(path, format!("poses[{k}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if poses.is_empty() {
            return Err(Error::parse(path, "poses", "at least one pose is required"));
        }
        Ok(Self { poses })
    }

    pub fn to_json(&self) -> String {
        let cfg = TrajectoryConfig {
            poses: self.poses.iter().map(|p| MatrixRows::Nested(p.to_rows())).collect(),
        };
        serde_json::to_string_pretty(&cfg).expect("trajectory serializes")
    }
}

/// Rendered depth and color of one camera.
#[derive(Clone, Debug, PartialEq)]
pub struct View {
    pub depth: ScalarMap,
    pub image: ColorImage,
}

/// Traces every pixel of `camera` with the body at `body_pose` (world from
/// body). Depth is the camera-frame z of the nearest hit; misses are invalid
/// in both outputs.
pub fn render_camera(scene: &Scene, camera: &Camera, body_pose: &RigidTransform) -> View {
    let world_from_cam = body_pose.compose(&camera.extrinsics);
    let origin = Point3::from(*world_from_cam.translation());
    let hits: Grid<[f64; 4]> = Grid::from_fn(camera.height, camera.width, |r, c| {
        // Camera ray with unit z, so the ray parameter is the depth.
        let ray = camera.intrinsics.ray(c as f64, r as f64);
        let dir = world_from_cam.transform_vector(&ray);
        let (t, p) = scene.trace(&origin, &dir)?;
        let [red, green, blue] = scene.texture.color(&p);
        Some([t, red, green, blue])
    });
    View {
        depth: hits.map(|h| Some(h[0])),
        image: hits.map(|h| Some([h[1], h[2], h[3]])),
    }
}

pub fn render_depth(scene: &Scene, rig: &Rig, body_pose: &RigidTransform, camera_id: usize) -> Result<ScalarMap> {
    Ok(render_camera(scene, rig.camera(camera_id)?, body_pose).depth)
}

pub fn render_image(scene: &Scene, rig: &Rig, body_pose: &RigidTransform, camera_id: usize) -> Result<ColorImage> {
    Ok(render_camera(scene, rig.camera(camera_id)?, body_pose).image)
}

/// Rig of `n` outward-facing cameras spaced evenly in yaw about the body
/// y axis (down), each `radius` meters from the body origin. Camera 1 looks
/// along body +z.
pub fn ring_rig(n: usize, radius: f64, intrinsics: Intrinsics, height: usize, width: usize) -> Result<Rig> {
    let cameras = (0..n)
        .map(|k| {
            let yaw = TAU * k as f64 / n as f64;
            let rot = RigidTransform::rot_y(yaw);
            let center = rot.transform_vector(&Vector3::new(0.0, 0.0, radius));
            Camera {
                id: k + 1,
                intrinsics,
                extrinsics: rot.with_translation(center),
                height,
                width,
            }
        })
        .collect();
    Rig::new(cameras)
}

/// Six cameras at 60° spacing, 128×160 px, `fx = fy = 120`.
pub fn default_rig() -> Rig {
    let k = Intrinsics::new(120.0, 120.0, 79.5, 63.5).expect("valid intrinsics");
    ring_rig(6, 0.25, k, 128, 160).expect("valid rig")
}

/// A closed box room around the origin: floor 1.5 m below the body origin
/// (y is down), ceiling 2 m above, walls 5–6 m away.
pub fn default_scene() -> Scene {
    Scene::new(
        vec![
            Primitive::plane(Vector3::y(), 1.5),
            Primitive::plane(Vector3::y(), -2.0),
            Primitive::plane(Vector3::x(), 5.0),
            Primitive::plane(Vector3::x(), -5.0),
            Primitive::plane(Vector3::z(), 6.0),
            Primitive::plane(Vector3::z(), -5.0),
        ],
        Texture::default(),
    )
    .expect("valid scene")
}

/// Forward motion along body z with a slow yaw, `frames` poses.
pub fn default_trajectory(frames: usize) -> Trajectory {
    let poses = (0..frames)
        .map(|k| {
            let s = k as f64;
            RigidTransform::rot_y(0.02 * s).with_translation(Vector3::new(0.05 * s, 0.0, 0.3 * s))
        })
        .collect();
    Trajectory { poses }
}

/// Ground-truth frame set at frame `t` with the given context frames:
/// rendered images, rendered depth, exact camera motions, and the rendered
/// depth doubling as the prior.
pub fn ground_truth_frame_set(
    scene: &Scene,
    rig: &Rig,
    trajectory: &Trajectory,
    t: usize,
    contexts: &[usize],
) -> Result<FrameSet> {
    let pose_t = trajectory.pose(t)?;
    let views: Vec<View> = rig.cameras().iter().map(|c| render_camera(scene, c, pose_t)).collect();
    let contexts = contexts
        .iter()
        .map(|&tp| {
            let pose = trajectory.pose(tp)?;
            Ok(ContextFrame {
                images: rig.cameras().iter().map(|c| render_camera(scene, c, pose).image).collect(),
                poses: trajectory.camera_motions(rig, t, tp)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let depths: Vec<ScalarMap> = views.iter().map(|v| v.depth.clone()).collect();
    Ok(FrameSet {
        rig: rig.clone(),
        targets: views.into_iter().map(|v| v.image).collect(),
        priors: Some(depths.clone()),
        depths,
        contexts,
        occlusion: None,
    })
}
