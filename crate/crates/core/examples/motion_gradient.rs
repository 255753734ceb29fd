//! Nine UR5 copies sweeping between two configurations, graded from dark
//! gray to red, exported as both a scene document and a `.glb`.
//!
//! ```text
//! cargo run --example motion_gradient -- [urdd-dir] [out-dir]
//! ```
//!
//! Without a URDD argument the bundled UR5 test fixture is converted first.

use std::error::Error;
use std::f64::consts::PI;
use std::path::PathBuf;

use roboscene::color::Rgba;
use roboscene::export::{export_gltf, export_scene_document, BakeOptions};
use roboscene::figures::{motion_gradient, GradientSpec};
use roboscene::geometry::DecompParams;
use roboscene::kinematics::{to_chain, JointState};
use roboscene::timeline::Scene;
use roboscene::urdd::{build_urdd, load_urdd};

fn main() -> Result<(), Box<dyn Error>> {
    env_logger::init();
    let mut args = std::env::args_os().skip(1).map(PathBuf::from);
    let out_dir = std::env::temp_dir().join("motion_gradient");
    let urdd = match args.next() {
        Some(dir) => dir,
        None => {
            let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ur5");
            let dir = out_dir.join("ur5_urdd");
            build_urdd(
                &fixture.join("urdf/ur5.urdf"),
                &fixture,
                &dir,
                &DecompParams::default(),
            )?;
            dir
        }
    };
    let out_dir = args.next().unwrap_or(out_dir);

    let (desc, assets) = load_urdd(&urdd)?;
    let spec = GradientSpec {
        start_state: JointState::from([0.0, -PI / 3.0, PI / 4.0, 0.0, 0.0, 0.0]),
        end_state: JointState::from([-PI / 4.0, PI / 3.0, 0.0, 0.0, 0.0, 0.0]),
        start_color: Rgba::new(0.2, 0.2, 0.2, 1.0),
        end_color: Rgba::new(1.0, 0.0, 0.0, 1.0),
        num_copies: 9,
        alpha_profile: None,
    };

    let mut scene = Scene::new();
    let copies = motion_gradient(&mut scene, to_chain(&desc), assets, &spec)?;

    let doc = export_scene_document(&scene, &out_dir.join("scene"))?;
    let glb = export_gltf(
        &scene,
        &out_dir.join("gradient.glb"),
        &BakeOptions::default(),
    )?;
    println!("copies: {}", copies.len());
    println!("document: {}", doc.display());
    println!("glb: {}", glb.display());
    Ok(())
}
