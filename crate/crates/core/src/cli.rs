//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 2 for
//! unreadable or malformed inputs, 1 for computational failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{load_poses, poses_to_json, ContextKind, Rig, RigidTransform};
use crate::losses::{dsc, rig_terms, total_loss, ContextFrame, FrameSet, FrameSetOptions, LossWeights};
use crate::metrics::evaluate;
use crate::priors::{max_angle_between, normal_map, pseudo_depth, NeighborPairs, PseudoDepthConfig};
use crate::raster::io::{read_color, read_scalar_pfm, write_pfm, write_ppm};
use crate::raster::{ColorImage, ScalarMap};
use crate::spatial_depth::{reconstruct, CrossView, Strategy};
use crate::synth::{default_rig, default_scene, default_trajectory, render_camera, read_json, Scene, Trajectory};
use crate::warp::warp_view;

/// Scales used by the scale-invariance checks.
const CHECK_SCALES: [f64; 3] = [0.5, 2.0, 10.0];

#[derive(Parser, Debug)]
#[command(
    name = "survgeo",
    version,
    about = "Surround-view depth self-supervision geometry: view synthesis, cross-view depth, normal priors, losses and metrics.",
    after_help = "Set SURVGEO_THREADS to cap the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic rig sequence: cam<id>/frame<t>.ppm (color) and
    /// cam<id>/frame<t>.pfm (depth), per-camera motions, and a loss manifest.
    Synth {
        /// Scene JSON; the built-in box room when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Rig JSON; the built-in 6-camera ring when omitted.
        #[arg(long)]
        rig: Option<PathBuf>,
        /// Trajectory JSON; a built-in forward drive when omitted.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Frame count for the built-in trajectory.
        #[arg(long, default_value_t = 3)]
        frames: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize the target view by inverse-warping a source image.
    Warp {
        #[arg(long)]
        rig: PathBuf,
        /// Target camera id; the depth map belongs to it.
        #[arg(long)]
        target: usize,
        /// Source camera id; the image is sampled from it.
        #[arg(long)]
        source: usize,
        #[arg(long, value_enum)]
        context: ContextArg,
        /// Per-camera motions JSON, required for temporal contexts.
        #[arg(long)]
        poses: Option<PathBuf>,
        /// Target-view depth PFM.
        #[arg(long)]
        depth: PathBuf,
        /// Source image (.ppm or 3-channel .pfm).
        #[arg(long)]
        image: PathBuf,
        /// Output image; `.pfm` keeps full precision, anything else is PPM.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild target-view depth from a neighboring camera's depth.
    Reconstruct {
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        target: usize,
        #[arg(long)]
        source: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Mbw)]
        strategy: StrategyArg,
        /// Source-view depth PFM.
        #[arg(long)]
        source_depth: PathBuf,
        /// Target-view depth PFM (locates samples; unused by fw).
        #[arg(long)]
        target_depth: Option<PathBuf>,
        /// Reconstructed depth PFM; pixels outside the overlap are NaN.
        #[arg(long)]
        out: PathBuf,
        /// Optional 0/1 overlap mask PFM.
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Compute a unit surface-normal map (3-channel PFM) from depth.
    Normals {
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        camera: usize,
        #[arg(long)]
        depth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn relative disparity into bounded pseudo depth.
    PseudoDepth {
        #[arg(long)]
        disparity: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        d_min: f64,
        #[arg(long, default_value_t = 200.0)]
        d_max: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every loss term and the weighted total for a manifest.
    Loss {
        /// Manifest JSON; relative paths inside resolve against its directory.
        #[arg(long)]
        manifest: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Depth metrics. Predictions are clamped to [min-depth, max-depth]
    /// after optional median scaling; only ground-truth pixels inside the
    /// range are scored.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        min_depth: f64,
        #[arg(long, default_value_t = 80.0)]
        max_depth: f64,
        /// Scale predictions by median(gt) / median(pred) first.
        #[arg(long)]
        median_scale: bool,
    },
    /// Run a geometric invariance check on a depth map; exits 1 if it fails.
    Invariance {
        #[arg(long, value_enum)]
        check: CheckArg,
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        camera: usize,
        #[arg(long)]
        depth: PathBuf,
        /// Second camera for warp-roundtrip; the first rig neighbor by default.
        #[arg(long)]
        neighbor: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ContextArg {
    Temporal,
    Spatial,
    SpatialTemporal,
}

impl From<ContextArg> for ContextKind {
    fn from(c: ContextArg) -> Self {
        match c {
            ContextArg::Temporal => ContextKind::Temporal,
            ContextArg::Spatial => ContextKind::Spatial,
            ContextArg::SpatialTemporal => ContextKind::SpatialTemporal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Fw,
    Bw,
    Mbw,
    Mfbw,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Fw => Strategy::Fw,
            StrategyArg::Bw => Strategy::Bw,
            StrategyArg::Mbw => Strategy::Mbw,
            StrategyArg::Mfbw => Strategy::Mfbw,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CheckArg {
    /// Normals of D and c·D agree (c ∈ {0.5, 2, 10}).
    NormalScale,
    /// Disparity-smoothness consistency between c·D and D vanishes.
    DscScale,
    /// Pixels lifted into a neighbor camera and back return to themselves.
    WarpRoundtrip,
}

impl CheckArg {
    fn tolerance(self) -> f64 {
        match self {
            CheckArg::NormalScale => 1e-6,
            CheckArg::DscScale => 1e-9,
            CheckArg::WarpRoundtrip => 1e-6,
        }
    }
}

/// Loss manifest. Per-camera lists follow ascending camera id.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub rig: PathBuf,
    /// Target images at time t.
    pub targets: Vec<PathBuf>,
    /// Predicted target-view depth PFMs.
    pub depths: Vec<PathBuf>,
    /// Optional prior depth PFMs (e.g. pseudo depth).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<PathBuf>>,
    /// Optional 0/1 self-occlusion masks (1 = usable pixel).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occlusion: Option<Vec<PathBuf>>,
    #[serde(default)]
    pub contexts: Vec<ManifestContext>,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default)]
    pub weights: LossWeights,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestContext {
    /// Images at time t′.
    pub images: Vec<PathBuf>,
    /// Per-camera motions t → t′.
    pub poses: PathBuf,
}

fn default_strategy() -> Strategy {
    Strategy::Mbw
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let m: Manifest = read_json(path)?;
        m.weights
            .validate()
            .map_err(|e| Error::parse(path, "weights", e.to_string()))?;
        Ok(m)
    }

    /// Reads every referenced file into a frame set.
    pub fn frame_set(&self, manifest_path: &Path) -> Result<FrameSet> {
        let base = manifest_path.parent().unwrap_or_else(|| Path::new(""));
        let resolve = |p: &PathBuf| base.join(p);
        let rig = Rig::load(&resolve(&self.rig))?;
        let n = rig.len();
        let count = |field: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::parse(
                    manifest_path,
                    field,
                    format!("{len} entries for a {n}-camera rig"),
                ))
            }
        };
        count("targets", self.targets.len())?;
        count("depths", self.depths.len())?;
        let targets = self.targets.iter().map(|p| read_color(&resolve(p))).collect::<Result<Vec<_>>>()?;
        let depths = self.depths.iter().map(|p| read_scalar_pfm(&resolve(p))).collect::<Result<Vec<_>>>()?;
        let priors = match &self.priors {
            Some(list) => {
                count("priors", list.len())?;
                Some(list.iter().map(|p| read_scalar_pfm(&resolve(p))).collect::<Result<Vec<_>>>()?)
            }
            None => None,
        };
        let occlusion = match &self.occlusion {
            Some(list) => {
                count("occlusion", list.len())?;
                Some(
                    list.iter()
                        .map(|p| Ok(read_scalar_pfm(&resolve(p))?.to_mask()))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            None => None,
        };
        let contexts = self
            .contexts
            .iter()
            .enumerate()
            .map(|(k, c)| {
                count(&format!("contexts[{k}].images"), c.images.len())?;
                Ok(ContextFrame {
                    images: c.images.iter().map(|p| read_color(&resolve(p))).collect::<Result<Vec<_>>>()?,
                    poses: load_poses(&resolve(&c.poses), &rig)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameSet {
            rig,
            targets,
            depths,
            contexts,
            priors,
            occlusion,
        })
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// exit code. Reports go to stdout, diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error[InvalidArgument]: {msg}");
        return 2;
    }
    match execute(cli.command) {
        Ok(Outcome { report, passed }) => {
            if let Some(r) = report {
                // A closed stdout (e.g. piped into `head`) is not an error.
                let _ = writeln!(std::io::stdout(), "{r}");
            }
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("SURVGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("SURVGEO_THREADS must be a positive integer, got `{raw}`"))?;
    // A pool may already exist when run() is called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

struct Outcome {
    report: Option<String>,
    passed: bool,
}

impl Outcome {
    fn report<T: Serialize>(value: &T) -> Self {
        Outcome {
            report: Some(to_json(value)),
            passed: true,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_color(img: &ColorImage, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pfm")) {
        write_pfm(img, path)
    } else {
        write_ppm(img, path)
    }
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Synth {
            scene,
            rig,
            trajectory,
            frames,
            out,
        } => synth(scene, rig, trajectory, frames, &out),
        Command::Warp {
            rig,
            target,
            source,
            context,
            poses,
            depth,
            image,
            out,
        } => {
            let rig = Rig::load(&rig)?;
            let ctx = ContextKind::from(context);
            let poses = match (ctx, poses) {
                (ContextKind::Spatial, _) => Vec::new(),
                (_, Some(p)) => load_poses(&p, &rig)?,
                (_, None) => {
                    return Err(Error::InvalidArgument(
                        "temporal contexts need --poses".into(),
                    ))
                }
            };
            let x = rig.context_transform(ctx, target, source, &poses)?;
            let depth = read_scalar_pfm(&depth)?;
            let src = read_color(&image)?;
            let (ct, cs) = (rig.camera(target)?, rig.camera(source)?);
            ensure_dims(&depth, ct, "depth")?;
            ensure_dims(&src, cs, "image")?;
            let w = warp_view(&depth, &ct.intrinsics, &cs.intrinsics, &x, &src, None)?;
            write_color(&w.synthesized, &out)?;
            Ok(Outcome::report(&CoverageReport {
                valid: w.valid_count(),
                total: w.synthesized.len(),
            }))
        }
        Command::Reconstruct {
            rig,
            target,
            source,
            strategy,
            source_depth,
            target_depth,
            out,
            mask_out,
        } => {
            let rig = Rig::load(&rig)?;
            let (ct, cs) = (rig.camera(target)?, rig.camera(source)?);
            let source_depth = read_scalar_pfm(&source_depth)?;
            ensure_dims(&source_depth, cs, "source depth")?;
            let target_depth = target_depth.map(|p| read_scalar_pfm(&p)).transpose()?;
            if let Some(d) = &target_depth {
                ensure_dims(d, ct, "target depth")?;
            }
            let view = CrossView {
                source_depth: &source_depth,
                k_source: cs.intrinsics,
                k_target: ct.intrinsics,
                target_dims: (ct.height, ct.width),
                source_to_target: rig.context_transform(ContextKind::Spatial, source, target, &[])?,
            };
            let strategy = Strategy::from(strategy);
            let rec = reconstruct(strategy, &view, target_depth.as_ref())?;
            write_pfm(&rec.depth, &out)?;
            if let Some(m) = mask_out {
                write_pfm(&ScalarMap::from_mask(ct.height, ct.width, rec.overlap())?, &m)?;
            }
            Ok(Outcome::report(&ReconstructReport {
                strategy,
                valid: rec.depth.valid_count(),
                total: rec.depth.len(),
            }))
        }
        Command::Normals {
            rig,
            camera,
            depth,
            out,
        } => {
            let rig = Rig::load(&rig)?;
            let cam = rig.camera(camera)?;
            let depth = read_scalar_pfm(&depth)?;
            ensure_dims(&depth, cam, "depth")?;
            let n = normal_map(&depth, &cam.intrinsics, &NeighborPairs::default());
            write_pfm(&n, &out)?;
            Ok(Outcome::report(&CoverageReport {
                valid: n.valid_count(),
                total: n.len(),
            }))
        }
        Command::PseudoDepth {
            disparity,
            d_min,
            d_max,
            out,
        } => {
            let raw = read_scalar_pfm(&disparity)?;
            let d = pseudo_depth(&raw, &PseudoDepthConfig::new(d_min, d_max)?)?;
            write_pfm(&d, &out)?;
            Ok(Outcome::report(&CoverageReport {
                valid: d.valid_count(),
                total: d.len(),
            }))
        }
        Command::Loss { manifest, out } => {
            let m = Manifest::load(&manifest)?;
            let fs = m.frame_set(&manifest)?;
            let opts = FrameSetOptions {
                alpha: m.weights.alpha,
                strategy: m.strategy,
                alpha_t: m.weights.alpha_t,
                alpha_r: m.weights.alpha_r,
                ..FrameSetOptions::default()
            };
            let report = total_loss(&rig_terms(&fs, &opts)?, &m.weights)?;
            let text = to_json(&report);
            if let Some(p) = out {
                write_text(&p, &format!("{text}\n"))?;
            }
            Ok(Outcome {
                report: Some(text),
                passed: true,
            })
        }
        Command::Eval {
            pred,
            gt,
            min_depth,
            max_depth,
            median_scale,
        } => {
            let pred = read_scalar_pfm(&pred)?;
            let gt = read_scalar_pfm(&gt)?;
            Ok(Outcome::report(&evaluate(&pred, &gt, min_depth, max_depth, median_scale)?))
        }
        Command::Invariance {
            check,
            rig,
            camera,
            depth,
            neighbor,
        } => {
            let rig = Rig::load(&rig)?;
            let cam = rig.camera(camera)?;
            let depth = read_scalar_pfm(&depth)?;
            ensure_dims(&depth, cam, "depth")?;
            let deviation = match check {
                CheckArg::NormalScale => normal_scale_deviation(&depth, cam)?,
                CheckArg::DscScale => dsc_scale_deviation(&depth)?,
                CheckArg::WarpRoundtrip => {
                    let j = match neighbor {
                        Some(j) => j,
                        None => *rig.neighbors(camera)?.first().ok_or_else(|| {
                            Error::InvalidArgument("warp-roundtrip needs a rig with two cameras".into())
                        })?,
                    };
                    warp_roundtrip_deviation(&depth, &rig, camera, j)?
                }
            };
            let tolerance = check.tolerance();
            let report = InvarianceReport {
                check,
                max_deviation: deviation,
                tolerance,
                passed: deviation < tolerance,
            };
            Ok(Outcome {
                passed: report.passed,
                report: Some(to_json(&report)),
            })
        }
    }
}

#[derive(Serialize)]
struct CoverageReport {
    valid: usize,
    total: usize,
}

#[derive(Serialize)]
struct ReconstructReport {
    strategy: Strategy,
    valid: usize,
    total: usize,
}

#[derive(Serialize)]
struct InvarianceReport {
    check: CheckArg,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SynthReport {
    cameras: usize,
    frames: usize,
    manifest: Option<PathBuf>,
}

fn ensure_dims<T: crate::raster::Texel>(grid: &crate::raster::Grid<T>, cam: &crate::geometry::Camera, what: &str) -> Result<()> {
    if grid.dims() != (cam.height, cam.width) {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, camera {} is {}x{}",
            grid.height(),
            grid.width(),
            cam.id,
            cam.height,
            cam.width
        )));
    }
    Ok(())
}

/// Largest angle (radians) between normals of `D` and `c·D`.
pub fn normal_scale_deviation(depth: &ScalarMap, cam: &crate::geometry::Camera) -> Result<f64> {
    let pairs = NeighborPairs::default();
    let base = normal_map(depth, &cam.intrinsics, &pairs);
    CHECK_SCALES.iter().try_fold(0.0_f64, |acc, &c| {
        let scaled = normal_map(&depth.scaled(c), &cam.intrinsics, &pairs);
        Ok(acc.max(max_angle_between(&base, &scaled, false)?))
    })
}

/// Largest `dsc(c·D, D)`.
pub fn dsc_scale_deviation(depth: &ScalarMap) -> Result<f64> {
    CHECK_SCALES
        .iter()
        .try_fold(0.0_f64, |acc, &c| Ok(acc.max(dsc(&depth.scaled(c), depth)?.value)))
}

/// Largest pixel displacement after lifting camera `i`'s pixels with their
/// depth, moving them into camera `j`, re-lifting there and returning.
pub fn warp_roundtrip_deviation(depth: &ScalarMap, rig: &Rig, i: usize, j: usize) -> Result<f64> {
    let (ci, cj) = (rig.camera(i)?, rig.camera(j)?);
    let to_j = rig.context_transform(ContextKind::Spatial, i, j, &[])?;
    let to_i = rig.context_transform(ContextKind::Spatial, j, i, &[])?;
    let mut worst = 0.0_f64;
    let mut any = false;
    for (idx, d) in depth.iter_valid() {
        let (r, c) = (idx / depth.width(), idx % depth.width());
        let Ok(p) = ci.intrinsics.unproject(c as f64, r as f64, d) else {
            continue;
        };
        let q = to_j.transform_point(&p);
        let Ok((u, v)) = cj.intrinsics.project(&q) else {
            continue;
        };
        let back = to_i.transform_point(&cj.intrinsics.unproject(u, v, q.z)?);
        let (ub, vb) = ci.intrinsics.project(&back)?;
        worst = worst.max((ub - c as f64).hypot(vb - r as f64));
        any = true;
    }
    if !any {
        return Err(Error::AllInvalid("warp round trip"));
    }
    Ok(worst)
}

fn synth(
    scene: Option<PathBuf>,
    rig: Option<PathBuf>,
    trajectory: Option<PathBuf>,
    frames: usize,
    out: &Path,
) -> Result<Outcome> {
    let scene = match scene {
        Some(p) => Scene::load(&p)?,
        None => default_scene(),
    };
    let rig = match rig {
        Some(p) => Rig::load(&p)?,
        None => default_rig(),
    };
    let trajectory = match trajectory {
        Some(p) => Trajectory::load(&p)?,
        None => {
            if frames == 0 {
                return Err(Error::InvalidArgument("--frames must be at least 1".into()));
            }
            default_trajectory(frames)
        }
    };
    write_text(&out.join("rig.json"), &format!("{}\n", rig.to_json()))?;
    write_text(&out.join("scene.json"), &format!("{}\n", to_json(&scene)))?;
    write_text(&out.join("trajectory.json"), &format!("{}\n", trajectory.to_json()))?;
    for (t, pose) in trajectory.poses.iter().enumerate() {
        for cam in rig.cameras() {
            let view = render_camera(&scene, cam, pose);
            let dir = out.join(format!("cam{}", cam.id));
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            write_ppm(&view.image, &dir.join(format!("frame{t}.ppm")))?;
            write_pfm(&view.depth, &dir.join(format!("frame{t}.pfm")))?;
        }
    }
    let n = trajectory.len();
    for t in 0..n {
        for tp in [t.checked_sub(1), Some(t + 1).filter(|v| *v < n)].into_iter().flatten() {
            let motions: Vec<RigidTransform> = trajectory.camera_motions(&rig, t, tp)?;
            write_text(
                &out.join("poses").join(format!("{t}_{tp}.json")),
                &format!("{}\n", poses_to_json(&rig, &motions)),
            )?;
        }
    }
    let manifest = if n >= 3 {
        let t = n / 2;
        let per_cam = |frame: usize, ext: &str| -> Vec<PathBuf> {
            rig.cameras()
                .iter()
                .map(|c| PathBuf::from(format!("cam{}/frame{frame}.{ext}", c.id)))
                .collect()
        };
        let m = Manifest {
            rig: "rig.json".into(),
            targets: per_cam(t, "ppm"),
            depths: per_cam(t, "pfm"),
            priors: Some(per_cam(t, "pfm")),
            occlusion: None,
            contexts: [t - 1, t + 1]
                .into_iter()
                .map(|tp| ManifestContext {
                    images: per_cam(tp, "ppm"),
                    poses: PathBuf::from(format!("poses/{t}_{tp}.json")),
                })
                .collect(),
            strategy: Strategy::Mbw,
            weights: LossWeights::default(),
        };
        write_text(&out.join("manifest.json"), &format!("{}\n", to_json(&m)))?;
        Some(PathBuf::from("manifest.json"))
    } else {
        None
    };
    Ok(Outcome::report(&SynthReport {
        cameras: rig.len(),
        frames: n,
        manifest,
    }))
}
