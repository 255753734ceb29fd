//! Robot scene engine: URDF import, kinematics, convex geometry, keyframed
//! scenes and baked export for offline renderers.
//!
//! ```no_run
//! use roboscene::kinematics::to_chain;
//! use roboscene::timeline::Scene;
//! use roboscene::urdd::load_urdd;
//!
//! let (desc, assets) = load_urdd("ur5_urdd".as_ref()).unwrap();
//! let mut scene = Scene::new();
//! let robot = scene.spawn(to_chain(&desc), assets).unwrap();
//! scene.robot_mut(robot).set_state([1.0; 6]).unwrap();
//! scene.robot_mut(robot).keyframe_state(1.0).unwrap();
//! ```

pub mod cli;
pub mod color;
pub mod export;
pub mod figures;
pub mod geometry;
pub mod kinematics;
pub mod math;
pub mod timeline;
pub mod urdd;
pub mod urdf;
