use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Intrinsics, RigidTransform};
use crate::error::{Error, Result};

/// Tolerance for accepting rotation blocks read from config files; entries
/// within it are snapped onto SO(3).
pub const CONFIG_ROTATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub id: usize,
    pub intrinsics: Intrinsics,
    /// Maps camera-frame coordinates into the shared body frame.
    pub extrinsics: RigidTransform,
    pub height: usize,
    pub width: usize,
}

/// Source-frame choice for view synthesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextKind {
    /// Same camera, adjacent time.
    Temporal,
    /// Adjacent camera, same time.
    Spatial,
    /// Adjacent camera, adjacent time.
    SpatialTemporal,
}

impl std::str::FromStr for ContextKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temporal" => Ok(ContextKind::Temporal),
            "spatial" => Ok(ContextKind::Spatial),
            "spatial-temporal" => Ok(ContextKind::SpatialTemporal),
            other => Err(Error::InvalidArgument(format!(
                "unknown context `{other}` (expected temporal, spatial or spatial-temporal)"
            ))),
        }
    }
}

/// A calibrated multi-camera rig. Cameras are kept sorted by id and ids
/// form a contiguous range; the lowest id is the front camera.
#[derive(Clone, Debug, PartialEq)]
pub struct Rig {
    cameras: Vec<Camera>,
}

impl Rig {
    pub fn new(mut cameras: Vec<Camera>) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::InvalidArgument("rig needs at least one camera".into()));
        }
        cameras.sort_by_key(|c| c.id);
        for (k, pair) in cameras.windows(2).enumerate() {
            if pair[1].id != pair[0].id + 1 {
                return Err(Error::InvalidArgument(format!(
                    "camera ids must be unique and contiguous (cameras[{}].id = {}, next is {})",
                    k, pair[0].id, pair[1].id
                )));
            }
        }
        if let Some(c) = cameras.iter().find(|c| c.height == 0 || c.width == 0) {
            return Err(Error::InvalidArgument(format!(
                "camera {} has empty resolution",
                c.id
            )));
        }
        Ok(Self { cameras })
    }

    pub fn cameras(&self) -> &[Camera] {
        &self.cameras
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    /// Position of camera `id` in [`Rig::cameras`].
    pub fn index_of(&self, id: usize) -> Result<usize> {
        let first = self.cameras[0].id;
        id.checked_sub(first)
            .filter(|k| *k < self.cameras.len())
            .ok_or(Error::UnknownCamera(id))
    }

    pub fn camera(&self, id: usize) -> Result<&Camera> {
        Ok(&self.cameras[self.index_of(id)?])
    }

    pub fn front(&self) -> &Camera {
        &self.cameras[0]
    }

    /// Cyclically adjacent cameras (surround order), without duplicates.
    pub fn neighbors(&self, id: usize) -> Result<Vec<usize>> {
        let k = self.index_of(id)?;
        let n = self.cameras.len();
        let mut out = Vec::with_capacity(2);
        for j in [(k + n - 1) % n, (k + 1) % n] {
            let cid = self.cameras[j].id;
            if j != k && !out.contains(&cid) {
                out.push(cid);
            }
        }
        Ok(out)
    }

    /// Same rig with every extrinsic replaced by `g ∘ E_i` (a change of body frame).
    pub fn rebased(&self, g: &RigidTransform) -> Rig {
        let cameras = self
            .cameras
            .iter()
            .map(|c| Camera {
                extrinsics: g.compose(&c.extrinsics),
                ..c.clone()
            })
            .collect();
        Rig { cameras }
    }

    /// Transform from camera `source` at time t to the frame from which
    /// view synthesis samples.
    ///
    /// `poses[k]` is the motion `T̂` of the k-th rig camera from t to t′,
    /// mapping camera-frame points at t to the same camera's frame at t′.
    /// Spatial transforms map camera-`source` coordinates into camera-`target`
    /// coordinates as `E_target⁻¹ ∘ E_source`.
    pub fn context_transform(
        &self,
        ctx: ContextKind,
        source: usize,
        target: usize,
        poses: &[RigidTransform],
    ) -> Result<RigidTransform> {
        let si = self.index_of(source)?;
        let ti = self.index_of(target)?;
        let pose = |k: usize| {
            poses.get(k).copied().ok_or_else(|| {
                Error::ShapeMismatch(format!(
                    "{} poses supplied for a {}-camera rig",
                    poses.len(),
                    self.cameras.len()
                ))
            })
        };
        let spatial = || {
            self.cameras[ti]
                .extrinsics
                .inverse()
                .compose(&self.cameras[si].extrinsics)
        };
        match ctx {
            ContextKind::Temporal => {
                if si != ti {
                    return Err(Error::CameraMismatch {
                        source_cam: source,
                        target_cam: target,
                    });
                }
                pose(si)
            }
            ContextKind::Spatial => Ok(spatial()),
            ContextKind::SpatialTemporal => Ok(pose(ti)?.compose(&spatial())),
        }
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RigConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            Error::parse(origin, field, e.into_inner().to_string())
        })?;
        cfg.into_rig(origin)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn to_config(&self) -> RigConfig {
        RigConfig {
            cameras: self
                .cameras
                .iter()
                .map(|c| CameraConfig {
                    id: c.id,
                    fx: c.intrinsics.fx,
                    fy: c.intrinsics.fy,
                    cx: c.intrinsics.cx,
                    cy: c.intrinsics.cy,
                    height: c.height,
                    width: c.width,
                    extrinsics: MatrixRows::Nested(c.extrinsics.to_rows()),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_config()).expect("rig config serializes")
    }
}

/// On-disk rig description.
///
/// ```json
/// {"cameras": [{"id": 0, "fx": 120, "fy": 120, "cx": 79.5, "cy": 63.5,
///               "height": 128, "width": 160,
///               "extrinsics": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}]}
/// ```
///
/// `extrinsics` is the row-major body-from-camera matrix, nested or flat (16 values).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigConfig {
    pub cameras: Vec<CameraConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub id: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub height: usize,
    pub width: usize,
    pub extrinsics: MatrixRows,
}

/// A 4×4 row-major matrix, either as nested rows or 16 flat values.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRows {
    Nested([[f64; 4]; 4]),
    Flat([f64; 16]),
}

impl MatrixRows {
    pub fn rows(&self) -> [[f64; 4]; 4] {
        match self {
            MatrixRows::Nested(r) => *r,
            MatrixRows::Flat(f) => {
                let mut r = [[0.0; 4]; 4];
                for (k, v) in f.iter().enumerate() {
                    r[k / 4][k % 4] = *v;
                }
                r
            }
        }
    }

    pub fn to_transform(&self) -> Result<RigidTransform> {
        RigidTransform::from_rows(&self.rows(), CONFIG_ROTATION_TOLERANCE)
    }
}

impl RigConfig {
    pub fn into_rig(self, origin: &Path) -> Result<Rig> {
        if self.cameras.is_empty() {
            return Err(Error::parse(origin, "cameras", "at least one camera is required"));
        }
        let mut cameras = Vec::with_capacity(self.cameras.len());
        for (k, c) in self.cameras.into_iter().enumerate() {
            let field = |name: &str| format!("cameras[{k}].{name}");
            for (name, v) in [("fx", c.fx), ("fy", c.fy)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::parse(origin, field(name), format!("must be positive, got {v}")));
                }
            }
            for (name, v) in [("cx", c.cx), ("cy", c.cy)] {
                if !v.is_finite() {
                    return Err(Error::parse(origin, field(name), "must be finite"));
                }
            }
            for (name, v) in [("height", c.height), ("width", c.width)] {
                if v == 0 {
                    return Err(Error::parse(origin, field(name), "must be positive"));
                }
            }
            let extrinsics = c
                .extrinsics
                .to_transform()
                .map_err(|e| Error::parse(origin, field("extrinsics"), e.to_string()))?;
            cameras.push(Camera {
                id: c.id,
                intrinsics: Intrinsics::new(c.fx, c.fy, c.cx, c.cy)?,
                extrinsics,
                height: c.height,
                width: c.width,
            });
        }
        Rig::new(cameras).map_err(|e| Error::parse(origin, "cameras", e.to_string()))
    }
}

/// Per-camera motions, on disk as
/// `{"poses": [{"id": 0, "transform": [[...4x4...]]}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSetConfig {
    pub poses: Vec<PoseEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseEntry {
    pub id: usize,
    pub transform: MatrixRows,
}

/// Reads a pose set and orders it like the rig's cameras.
pub fn load_poses(path: &Path, rig: &Rig) -> Result<Vec<RigidTransform>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let cfg: PoseSetConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::parse(path, e.path().to_string(), e.into_inner().to_string()))?;
    let mut out: Vec<Option<RigidTransform>> = vec![None; rig.len()];
    for (k, entry) in cfg.poses.iter().enumerate() {
        let slot = rig
            .index_of(entry.id)
            .map_err(|e| Error::parse(path, format!("poses[{k}].id"), e.to_string()))?;
        let t = entry
            .transform
            .to_transform()
            .map_err(|e| Error::parse(path, format!("poses[{k}].transform"), e.to_string()))?;
        if out[slot].replace(t).is_some() {
            return Err(Error::parse(path, format!("poses[{k}].id"), "duplicate camera id"));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(k, t)| {
            t.ok_or_else(|| {
                Error::parse(path, "poses", format!("missing camera {}", rig.cameras()[k].id))
            })
        })
        .collect()
}

pub fn poses_to_json(rig: &Rig, poses: &[RigidTransform]) -> String {
    let cfg = PoseSetConfig {
        poses: rig
            .cameras()
            .iter()
            .zip(poses)
            .map(|(c, t)| PoseEntry {
                id: c.id,
                transform: MatrixRows::Nested(t.to_rows()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&cfg).expect("pose set serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn cam(id: usize, extrinsics: RigidTransform) -> Camera {
        Camera {
            id,
            intrinsics: Intrinsics::new(100.0, 100.0, 50.0, 40.0).unwrap(),
            extrinsics,
            height: 80,
            width: 100,
        }
    }

    fn two_cam_rig() -> Rig {
        let e0 = RigidTransform::rot_y(0.2).with_translation(Vector3::new(0.5, 0.0, 0.1));
        let e1 = RigidTransform::rot_y(-0.9).with_translation(Vector3::new(-0.3, 0.1, 0.4));
        Rig::new(vec![cam(1, e1), cam(0, e0)]).unwrap()
    }

    #[test]
    fn rig_validation() {
        assert!(Rig::new(vec![]).is_err());
        let i = RigidTransform::identity();
        assert!(Rig::new(vec![cam(0, i), cam(2, i)]).is_err());
        assert!(Rig::new(vec![cam(0, i), cam(0, i)]).is_err());
        let rig = two_cam_rig();
        assert_eq!(rig.cameras()[0].id, 0);
        assert!(matches!(rig.camera(7), Err(Error::UnknownCamera(7))));
    }

    #[test]
    fn neighbors_are_cyclic() {
        let i = RigidTransform::identity();
        let rig = Rig::new((0..6).map(|k| cam(k, i)).collect()).unwrap();
        assert_eq!(rig.neighbors(0).unwrap(), vec![5, 1]);
        assert_eq!(rig.neighbors(3).unwrap(), vec![2, 4]);
        let two = Rig::new(vec![cam(0, i), cam(1, i)]).unwrap();
        assert_eq!(two.neighbors(0).unwrap(), vec![1]);
        let one = Rig::new(vec![cam(0, i)]).unwrap();
        assert!(one.neighbors(0).unwrap().is_empty());
    }

    #[test]
    fn context_transform_branches() {
        let i = RigidTransform::identity();
        let e = RigidTransform::rot_z(0.4).with_translation(Vector3::new(1.0, 2.0, 0.0));
        let same = Rig::new(vec![cam(0, e), cam(1, e)]).unwrap();
        let poses = [i, i];
        assert!(same
            .context_transform(ContextKind::Spatial, 0, 1, &poses)
            .unwrap()
            .max_abs_diff(&i)
            < 1e-12);
        assert_eq!(same.context_transform(ContextKind::Temporal, 0, 0, &poses).unwrap(), i);
        assert!(matches!(
            same.context_transform(ContextKind::Temporal, 0, 1, &poses),
            Err(Error::CameraMismatch { .. })
        ));

        let rig = two_cam_rig();
        let t1 = RigidTransform::exp(Vector3::new(0.01, 0.02, -0.03), Vector3::new(0.3, 0.0, 1.0));
        let poses = [RigidTransform::identity(), t1];
        let st = rig.context_transform(ContextKind::SpatialTemporal, 0, 1, &poses).unwrap();
        let spatial = rig.context_transform(ContextKind::Spatial, 0, 1, &poses).unwrap();
        let oracle = t1.to_matrix() * spatial.to_matrix();
        assert!((st.to_matrix() - oracle).amax() < 1e-12);
    }

    #[test]
    fn spatial_round_trip_is_identity() {
        let rig = two_cam_rig();
        let a = rig.context_transform(ContextKind::Spatial, 0, 1, &[]).unwrap();
        let b = rig.context_transform(ContextKind::Spatial, 1, 0, &[]).unwrap();
        assert!(a.compose(&b).max_abs_diff(&RigidTransform::identity()) < 1e-9);
    }

    #[test]
    fn config_round_trip_and_field_errors() {
        let rig = two_cam_rig();
        let json = rig.to_json();
        let back = Rig::from_json_str(&json, Path::new("rig.json")).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back.cameras()[1].extrinsics.max_abs_diff(&rig.cameras()[1].extrinsics) < 1e-12);

        let bad = json.replacen("\"fx\": 100.0", "\"fx\": -3.0", 1);
        let err = Rig::from_json_str(&bad, Path::new("rig.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("rig.json") && msg.contains("cameras[0].fx"), "{msg}");

        let typo = json.replacen("\"fy\"", "\"fyy\"", 1);
        let msg = Rig::from_json_str(&typo, Path::new("r.json")).unwrap_err().to_string();
        assert!(msg.contains("cameras[0]"), "{msg}");

        let wrong_type = json.replacen("\"height\": 80", "\"height\": \"tall\"", 1);
        let msg = Rig::from_json_str(&wrong_type, Path::new("r.json")).unwrap_err().to_string();
        assert!(msg.contains("cameras[0].height"), "{msg}");
    }

    #[test]
    fn flat_extrinsics_accepted() {
        let json = r#"{"cameras":[{"id":3,"fx":10,"fy":10,"cx":1,"cy":1,"height":4,"width":4,
            "extrinsics":[1,0,0,5, 0,1,0,0, 0,0,1,0, 0,0,0,1]}]}"#;
        let rig = Rig::from_json_str(json, Path::new("x")).unwrap();
        assert_eq!(rig.front().id, 3);
        assert_eq!(rig.front().extrinsics.translation().x, 5.0);
    }
}
