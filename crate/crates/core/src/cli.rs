//! Command-line front end. Every subcommand is a thin wrapper over the
//! library; angles are radians throughout.

use std::error::Error;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::color::Rgba;
use crate::export::{export_gltf, export_scene_document, BakeOptions};
use crate::figures::{motion_gradient, GradientSpec};
use crate::geometry::{convex_decomposition, convex_hull, read_mesh, write_obj, DecompParams};
use crate::kinematics::{forward_kinematics, inverse_kinematics, to_chain, IkOptions, JointState};
use crate::math::{pose, quat_to_wxyz, quat_wxyz, Pose, Vec3};
use crate::timeline::Scene;
use crate::urdd::{build_urdd, load_urdd};

/// Environment variable naming the directory URDD paths are looked up in.
pub const RESOURCES_ENV: &str = "ROBOSCENE_RESOURCES";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "roboscene",
    version,
    about = "Import, pose, animate and export robot scenes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DecompArgs {
    /// Accepted fraction of a part's hull lying outside the mesh.
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[arg(long, default_value_t = 6)]
    max_depth: u32,
}

impl DecompArgs {
    fn params(&self) -> DecompParams {
        DecompParams {
            concavity_tol: self.tol,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a URDD directory from a URDF and its meshes.
    Convert {
        urdf: PathBuf,
        #[arg(long)]
        meshes: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        decomp: DecompArgs,
    },
    /// Print a URDD's robot name, link count and degrees of freedom.
    Info { urdd: PathBuf },
    /// Print world poses for a joint state.
    Pose {
        urdd: PathBuf,
        /// Comma-separated joint values in radians or meters.
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        #[arg(long)]
        link: Option<String>,
    },
    /// Solve for a joint state placing a link at a target pose.
    Ik {
        urdd: PathBuf,
        #[arg(long)]
        link: String,
        /// x,y,z,qw,qx,qy,qz
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        seed: Option<String>,
        #[arg(long, default_value_t = 1e-4)]
        pos_tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        rot_tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
    },
    /// Write the convex hull of a mesh.
    Hull {
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write an approximate convex decomposition as numbered OBJ files.
    Decomp {
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        decomp: DecompArgs,
    },
    /// Key a trajectory and export it (`.glb` output, else a scene directory).
    Animate {
        urdd: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 24.0)]
        fps: f64,
        #[arg(long, default_value_t = 1.0)]
        stride: f64,
        #[arg(long, default_value_t = 1.0)]
        start_frame: f64,
    },
    /// Spawn color-graded copies between two states and export them.
    Gradient {
        urdd: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, allow_hyphen_values = true)]
        end: String,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value = "0.2,0.2,0.2,1")]
        start_color: String,
        #[arg(long, default_value = "1,0,0,1")]
        end_color: String,
        /// Optional per-copy alpha values.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trajectory file is empty")]
    Empty,
    #[error("row {row} has {actual} values, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("row {row}, column {column}: {value:?} is not a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("malformed trajectory: {0}")]
    Malformed(String),
}

fn check_rows(rows: &[Vec<f64>]) -> Result<(), TrajectoryError> {
    let Some(first) = rows.first() else {
        return Err(TrajectoryError::Empty);
    };
    for (i, row) in rows.iter().enumerate() {
        if row.len() != first.len() {
            return Err(TrajectoryError::Ragged {
                row: i + 1,
                expected: first.len(),
                actual: row.len(),
            });
        }
    }
    Ok(())
}

/// Parses a JSON array of arrays (text starting with `[`) or headerless CSV
/// with one state per row. Rows are numbered from 1.
pub fn parse_trajectory(text: &str) -> Result<Vec<JointState>, TrajectoryError> {
    let trimmed = text.trim_start_matches('\u{feff}').trim();
    if trimmed.is_empty() {
        return Err(TrajectoryError::Empty);
    }
    let rows: Vec<Vec<f64>> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| TrajectoryError::Malformed(e.to_string()))?
    } else {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(trimmed.as_bytes());
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| TrajectoryError::Malformed(e.to_string()))?;
            let row = record
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>()
                        .map_err(|_| TrajectoryError::NonNumeric {
                            row: i + 1,
                            column: j + 1,
                            value: cell.to_string(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        rows
    };
    check_rows(&rows)?;
    Ok(rows.into_iter().map(JointState::new).collect())
}

pub fn read_trajectory(path: &Path) -> Result<Vec<JointState>, TrajectoryError> {
    let text = fs::read_to_string(path).map_err(|source| TrajectoryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trajectory(&text)
}

#[derive(Debug, Error)]
#[error("{0}")]
struct ArgError(String);

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, ArgError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ArgError(format!("{what}: {s:?} is not a number")))
        })
        .collect()
}

fn parse_fixed<const N: usize>(text: &str, what: &str) -> Result<[f64; N], ArgError> {
    let values = parse_floats(text, what)?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| ArgError(format!("{what}: expected {N} values, got {}", v.len())))
}

/// A path as given if it exists, else joined to `$ROBOSCENE_RESOURCES`.
pub fn resolve_urdd(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    match std::env::var_os(RESOURCES_ENV) {
        Some(root) if path.is_relative() => Path::new(&root).join(path),
        _ => path.to_path_buf(),
    }
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9 + 0.0;
    format!("{r:.9}")
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_num(*v))
        .collect::<Vec<_>>()
        .join(",")
}

fn fmt_pose(p: &Pose) -> String {
    let t: [f64; 3] = p.translation.vector.into();
    format!(
        "t=[{}] q=[{}]",
        fmt_list(&t),
        fmt_list(&quat_to_wxyz(&p.rotation))
    )
}

fn is_glb(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("glb"))
}

fn export(scene: &Scene, output: &Path) -> Result<PathBuf, Box<dyn Error>> {
    Ok(if is_glb(output) {
        export_gltf(scene, output, &BakeOptions::default())?
    } else {
        export_scene_document(scene, output)?
    })
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let mut text = String::new();
    match command {
        Command::Convert {
            urdf,
            meshes,
            output,
            decomp,
        } => {
            let manifest = build_urdd(&urdf, &meshes, &output, &decomp.params())?;
            let with_mesh = manifest
                .links
                .values()
                .filter(|l| l.plain_mesh.is_some())
                .count();
            writeln!(text, "robot: {}", manifest.robot_name)?;
            writeln!(
                text,
                "links: {} ({with_mesh} with meshes)",
                manifest.links.len()
            )?;
            writeln!(text, "wrote: {}", output.display())?;
        }
        Command::Info { urdd } => {
            let (desc, _) = load_urdd(&resolve_urdd(&urdd))?;
            let chain = to_chain(&desc);
            writeln!(text, "name: {}", desc.name)?;
            writeln!(text, "links: {}", desc.links.len())?;
            writeln!(text, "dof: {}", chain.dof())?;
            writeln!(text, "joints: {}", chain.joint_names().join(","))?;
        }
        Command::Pose { urdd, state, link } => {
            let (desc, _) = load_urdd(&resolve_urdd(&urdd))?;
            let chain = to_chain(&desc);
            let state = parse_floats(&state, "--state")?;
            let fk = forward_kinematics(&chain, &state, &Pose::identity())?;
            let only = link.map(|name| chain.link_index(&name)).transpose()?;
            for (i, l) in chain.links().iter().enumerate() {
                if only.is_none_or(|k| k == i) {
                    writeln!(text, "{}: {}", l.name, fmt_pose(&fk[i]))?;
                }
            }
        }
        Command::Ik {
            urdd,
            link,
            target,
            seed,
            pos_tol,
            rot_tol,
            max_iters,
        } => {
            let (desc, _) = load_urdd(&resolve_urdd(&urdd))?;
            let chain = to_chain(&desc);
            let [x, y, z, qw, qx, qy, qz] = parse_fixed::<7>(&target, "--target")?;
            let rotation = quat_wxyz(qw, qx, qy, qz)
                .ok_or_else(|| ArgError("--target: quaternion has zero norm".into()))?;
            let target = pose(Vec3::new(x, y, z), rotation);
            let seed = match seed {
                Some(s) => JointState::new(parse_floats(&s, "--seed")?),
                None => JointState::zeros(chain.dof()),
            };
            let opts = IkOptions {
                pos_tol,
                rot_tol,
                max_iters,
                ..IkOptions::default()
            };
            let index = chain.link_index(&link)?;
            let (state, report) = inverse_kinematics(&chain, index, &target, &seed, &opts)?;
            writeln!(text, "state: {}", fmt_list(&state))?;
            writeln!(text, "converged: {}", report.converged)?;
            writeln!(text, "iterations: {}", report.iterations)?;
            writeln!(text, "position_error: {:e}", report.final_position_error)?;
            writeln!(
                text,
                "orientation_error: {:e}",
                report.final_orientation_error
            )?;
        }
        Command::Hull { mesh, output } => {
            let hull = convex_hull(read_mesh(&mesh)?.vertices())?;
            write_obj(&hull, &output)?;
            writeln!(
                text,
                "hull: {} vertices, {} triangles",
                hull.vertices().len(),
                hull.triangles().len()
            )?;
        }
        Command::Decomp {
            mesh,
            output,
            decomp,
        } => {
            let parts = convex_decomposition(&read_mesh(&mesh)?, &decomp.params())?;
            fs::create_dir_all(&output)?;
            for (i, part) in parts.iter().enumerate() {
                write_obj(part, &output.join(format!("{i}.obj")))?;
            }
            writeln!(text, "parts: {}", parts.len())?;
        }
        Command::Animate {
            urdd,
            trajectory,
            output,
            fps,
            stride,
            start_frame,
        } => {
            let (desc, assets) = load_urdd(&resolve_urdd(&urdd))?;
            let states = read_trajectory(&trajectory)?;
            let mut scene = Scene::new();
            scene.set_frame_rate(fps)?;
            let id = scene.spawn(to_chain(&desc), assets)?;
            scene
                .robot_mut(id)
                .keyframe_discrete_trajectory(&states, start_frame, stride)?;
            let path = export(&scene, &output)?;
            writeln!(text, "states: {}", states.len())?;
            writeln!(text, "wrote: {}", path.display())?;
        }
        Command::Gradient {
            urdd,
            start,
            end,
            copies,
            start_color,
            end_color,
            alpha,
            output,
        } => {
            let (desc, assets) = load_urdd(&resolve_urdd(&urdd))?;
            let spec = GradientSpec {
                start_state: JointState::new(parse_floats(&start, "--start")?),
                end_state: JointState::new(parse_floats(&end, "--end")?),
                start_color: Rgba::from(parse_fixed::<4>(&start_color, "--start-color")?),
                end_color: Rgba::from(parse_fixed::<4>(&end_color, "--end-color")?),
                num_copies: copies,
                alpha_profile: alpha.map(|a| parse_floats(&a, "--alpha")).transpose()?,
            };
            let mut scene = Scene::new();
            let ids = motion_gradient(&mut scene, Arc::new(to_chain(&desc)), assets, &spec)?;
            let path = export(&scene, &output)?;
            writeln!(text, "instances: {}", ids.len())?;
            writeln!(text, "wrote: {}", path.display())?;
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Runs the CLI on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_io(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
