//! Universal Robot Description Directories: a URDF bundled with per-link
//! meshes, convex hulls and convex decompositions.
//!
//! ```text
//! <robot>/manifest.json
//! <robot>/urdf/robot.urdf
//! <robot>/meshes/<link>.obj
//! <robot>/convex_hulls/<link>.obj
//! <robot>/convex_decompositions/<link>/<part_index>.obj
//! ```
//!
//! Stored meshes are expressed in their link frame: every visual of a link is
//! transformed by its origin and scale and merged into one mesh.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    convex_decomposition, convex_hull, read_mesh, write_obj, DecompParams, GeometryError, TriMesh,
};
use crate::urdf::{parse_urdf, LinkSpec, RobotDescription, UrdfError};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

const URDF_DIR: &str = "urdf";
const URDF_FILE: &str = "urdf/robot.urdf";
const MESH_DIR: &str = "meshes";
const HULL_DIR: &str = "convex_hulls";
const DECOMP_DIR: &str = "convex_decompositions";

#[derive(Debug, Error)]
pub enum UrddError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Urdf(#[from] UrdfError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("link `{link}`: cannot resolve mesh `{mesh_ref}` (tried {})", display_paths(.tried))]
    UnresolvedMesh {
        link: String,
        mesh_ref: String,
        tried: Vec<PathBuf>,
    },
    #[error("{}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("manifest does not match the directory: {} ({message})", path.display())]
    Mismatch { path: PathBuf, message: String },
    #[error("unsupported URDD format_version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
}

fn display_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> UrddError + '_ {
    move |source| UrddError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// How a link is drawn. Each link carries all three layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppearanceLayer {
    Plain,
    ConvexHull,
    ConvexDecomposition,
}

impl AppearanceLayer {
    pub const ALL: [AppearanceLayer; 3] = [
        AppearanceLayer::Plain,
        AppearanceLayer::ConvexHull,
        AppearanceLayer::ConvexDecomposition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AppearanceLayer::Plain => "plain",
            AppearanceLayer::ConvexHull => "convex_hull",
            AppearanceLayer::ConvexDecomposition => "convex_decomposition",
        }
    }
}

/// Paths are relative to the URDD directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkAssets {
    pub plain_mesh: Option<String>,
    pub hull_mesh: Option<String>,
    #[serde(default)]
    pub decomp_meshes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrddManifest {
    pub format_version: u32,
    pub robot_name: String,
    pub source_urdf: String,
    pub mesh_dir: String,
    pub hull_dir: String,
    pub decomp_dir: String,
    pub links: BTreeMap<String, LinkAssets>,
}

impl UrddManifest {
    /// Every file the manifest lists, in a stable order.
    pub fn files(&self) -> Vec<&str> {
        let mut out = vec![self.source_urdf.as_str()];
        for assets in self.links.values() {
            out.extend(assets.plain_mesh.as_deref());
            out.extend(assets.hull_mesh.as_deref());
            out.extend(assets.decomp_meshes.iter().map(String::as_str));
        }
        out
    }
}

/// Link-frame meshes keyed by link name and layer. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct AssetStore {
    meshes: HashMap<(String, AppearanceLayer), Vec<TriMesh>>,
}

impl AssetStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, link: &str, layer: AppearanceLayer, meshes: Vec<TriMesh>) {
        self.meshes.insert((link.to_string(), layer), meshes);
    }

    pub fn get(&self, link: &str, layer: AppearanceLayer) -> Option<&[TriMesh]> {
        self.meshes
            .get(&(link.to_string(), layer))
            .map(Vec::as_slice)
    }

    pub fn remove(&mut self, link: &str, layer: AppearanceLayer) -> Option<Vec<TriMesh>> {
        self.meshes.remove(&(link.to_string(), layer))
    }

    pub fn has_link(&self, link: &str) -> bool {
        self.get(link, AppearanceLayer::Plain)
            .is_some_and(|m| !m.is_empty())
    }

    pub fn len(&self) -> usize {
        self.meshes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meshes.is_empty()
    }

    /// Builds every layer in memory from the description's visuals.
    pub fn from_description(
        desc: &RobotDescription,
        mesh_root: &Path,
        params: &DecompParams,
    ) -> Result<Self, UrddError> {
        params.validate()?;
        let mut store = Self::new();
        for link in desc.visual_links() {
            let layers = link_layers(link, mesh_root, params)?;
            store.insert(&link.name, AppearanceLayer::Plain, vec![layers.plain]);
            if let Some(hull) = layers.hull {
                store.insert(&link.name, AppearanceLayer::ConvexHull, vec![hull]);
                store.insert(
                    &link.name,
                    AppearanceLayer::ConvexDecomposition,
                    layers.parts,
                );
            }
        }
        Ok(store)
    }
}

/// Finds the file a URDF mesh reference points to.
///
/// `package://pkg/rest` is tried as `mesh_root/pkg/rest`, then
/// `mesh_root/rest`, then `mesh_root/<file name>`. `file://` and absolute
/// paths are used as given; other relative paths are joined to `mesh_root`.
pub fn resolve_mesh_ref(mesh_ref: &str, mesh_root: &Path) -> Result<PathBuf, Vec<PathBuf>> {
    let mut candidates = Vec::new();
    if let Some(rest) = mesh_ref.strip_prefix("package://") {
        candidates.push(mesh_root.join(rest));
        if let Some((_, tail)) = rest.split_once('/') {
            candidates.push(mesh_root.join(tail));
        }
        if let Some(name) = Path::new(rest).file_name() {
            candidates.push(mesh_root.join(name));
        }
    } else {
        let path = Path::new(mesh_ref.strip_prefix("file://").unwrap_or(mesh_ref));
        if path.is_absolute() {
            candidates.push(path.to_path_buf());
        } else {
            candidates.push(mesh_root.join(path));
        }
    }
    candidates.dedup();
    match candidates.iter().find(|p| p.is_file()) {
        Some(p) => Ok(p.clone()),
        None => Err(candidates),
    }
}

struct LinkLayers {
    plain: TriMesh,
    hull: Option<TriMesh>,
    parts: Vec<TriMesh>,
}

fn link_layers(
    link: &LinkSpec,
    mesh_root: &Path,
    params: &DecompParams,
) -> Result<LinkLayers, UrddError> {
    let mut plain = TriMesh::empty();
    for visual in &link.visuals {
        let path = resolve_mesh_ref(&visual.mesh_ref, mesh_root).map_err(|tried| {
            UrddError::UnresolvedMesh {
                link: link.name.clone(),
                mesh_ref: visual.mesh_ref.clone(),
                tried,
            }
        })?;
        let mesh = read_mesh(&path)?;
        plain.append(&mesh.transformed(&visual.origin, &visual.scale));
    }
    let (hull, parts) = match convex_hull(plain.vertices()) {
        Ok(hull) => (Some(hull), convex_decomposition(&plain, params)?),
        Err(e) => {
            warn!("link `{}`: no convex approximation ({e})", link.name);
            (None, Vec::new())
        }
    };
    Ok(LinkLayers { plain, hull, parts })
}

/// Maps link names to distinct file stems made of `[A-Za-z0-9_-]`.
fn file_stems(desc: &RobotDescription) -> HashMap<&str, String> {
    let mut used = HashSet::new();
    let mut out = HashMap::new();
    for link in &desc.links {
        let base: String = link
            .name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        let base = if base.is_empty() {
            "link".to_string()
        } else {
            base
        };
        let mut stem = base.clone();
        let mut n = 1;
        while !used.insert(stem.clone()) {
            stem = format!("{base}_{n}");
            n += 1;
        }
        out.insert(link.name.as_str(), stem);
    }
    out
}

fn write_mesh(out_dir: &Path, rel: &str, mesh: &TriMesh) -> Result<(), UrddError> {
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    write_obj(mesh, &path)?;
    Ok(())
}

/// Converts a URDF and its meshes into a URDD at `out_dir`. Re-running on
/// the same inputs rewrites identical files.
pub fn build_urdd(
    urdf_path: &Path,
    mesh_root: &Path,
    out_dir: &Path,
    params: &DecompParams,
) -> Result<UrddManifest, UrddError> {
    params.validate()?;
    let text = fs::read_to_string(urdf_path).map_err(io_err(urdf_path))?;
    let desc = parse_urdf(&text)?;

    // compute everything before touching the output directory
    let mut computed = Vec::new();
    for link in desc.visual_links() {
        computed.push((link.name.as_str(), link_layers(link, mesh_root, params)?));
    }

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for dir in [URDF_DIR, MESH_DIR, HULL_DIR, DECOMP_DIR] {
        let path = out_dir.join(dir);
        match fs::remove_dir_all(&path) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(&path)(e)),
        }
    }
    let urdf_dir = out_dir.join(URDF_DIR);
    fs::create_dir_all(&urdf_dir).map_err(io_err(&urdf_dir))?;
    let urdf_out = out_dir.join(URDF_FILE);
    fs::write(&urdf_out, &text).map_err(io_err(&urdf_out))?;

    let stems = file_stems(&desc);
    let mut links: BTreeMap<String, LinkAssets> = desc
        .links
        .iter()
        .map(|l| (l.name.clone(), LinkAssets::default()))
        .collect();
    for (name, layers) in &computed {
        let stem = &stems[name];
        let entry = links.get_mut(*name).expect("every link has an entry");

        let rel = format!("{MESH_DIR}/{stem}.obj");
        write_mesh(out_dir, &rel, &layers.plain)?;
        entry.plain_mesh = Some(rel);

        if let Some(hull) = &layers.hull {
            let rel = format!("{HULL_DIR}/{stem}.obj");
            write_mesh(out_dir, &rel, hull)?;
            entry.hull_mesh = Some(rel);
        }
        for (i, part) in layers.parts.iter().enumerate() {
            let rel = format!("{DECOMP_DIR}/{stem}/{i}.obj");
            write_mesh(out_dir, &rel, part)?;
            entry.decomp_meshes.push(rel);
        }
    }

    let manifest = UrddManifest {
        format_version: FORMAT_VERSION,
        robot_name: desc.name.clone(),
        source_urdf: URDF_FILE.to_string(),
        mesh_dir: MESH_DIR.to_string(),
        hull_dir: HULL_DIR.to_string(),
        decomp_dir: DECOMP_DIR.to_string(),
        links,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<UrddManifest, UrddError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| UrddError::Manifest {
        path: path.clone(),
        message: format!("cannot read manifest: {e}"),
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| UrddError::Manifest {
            path: path.clone(),
            message: format!("corrupt manifest: {e}"),
        })?;
    // check the version before the rest of the schema
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64);
    match found {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(UrddError::UnsupportedVersion {
                found: u32::try_from(v).unwrap_or(u32::MAX),
            })
        }
        None => {
            return Err(UrddError::Manifest {
                path,
                message: "corrupt manifest: missing integer format_version".into(),
            })
        }
    }
    serde_json::from_value(value).map_err(|e| UrddError::Manifest {
        path,
        message: format!("corrupt manifest: {e}"),
    })
}

fn load_obj(dir: &Path, rel: &str) -> Result<TriMesh, UrddError> {
    let path = dir.join(rel);
    if !path.is_file() {
        return Err(UrddError::Mismatch {
            path,
            message: "listed file is missing".into(),
        });
    }
    Ok(read_mesh(&path)?)
}

/// Loads a URDD written by [`build_urdd`].
pub fn load_urdd(dir: &Path) -> Result<(RobotDescription, AssetStore), UrddError> {
    let manifest = read_manifest(dir)?;
    let urdf_path = dir.join(&manifest.source_urdf);
    if !urdf_path.is_file() {
        return Err(UrddError::Mismatch {
            path: urdf_path,
            message: "listed file is missing".into(),
        });
    }
    let text = fs::read_to_string(&urdf_path).map_err(io_err(&urdf_path))?;
    let desc = parse_urdf(&text)?;

    for link in &desc.links {
        if !manifest.links.contains_key(&link.name) {
            return Err(UrddError::Mismatch {
                path: dir.join(MANIFEST_FILE),
                message: format!("no entry for link `{}`", link.name),
            });
        }
    }
    if let Some(extra) = manifest.links.keys().find(|k| desc.link(k).is_none()) {
        return Err(UrddError::Mismatch {
            path: dir.join(MANIFEST_FILE),
            message: format!("entry for unknown link `{extra}`"),
        });
    }

    let mut store = AssetStore::new();
    for (link, assets) in &manifest.links {
        if let Some(rel) = &assets.plain_mesh {
            store.insert(link, AppearanceLayer::Plain, vec![load_obj(dir, rel)?]);
        }
        if let Some(rel) = &assets.hull_mesh {
            store.insert(link, AppearanceLayer::ConvexHull, vec![load_obj(dir, rel)?]);
        }
        if !assets.decomp_meshes.is_empty() {
            let parts = assets
                .decomp_meshes
                .iter()
                .map(|rel| load_obj(dir, rel))
                .collect::<Result<Vec<_>, _>>()?;
            store.insert(link, AppearanceLayer::ConvexDecomposition, parts);
        }
    }
    Ok((desc, store))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixtures() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
    }

    #[test]
    fn package_refs_fall_back_to_the_package_relative_path() {
        let root = fixtures().join("ur5");
        let found = resolve_mesh_ref("package://ur5_description/meshes/base.obj", &root).unwrap();
        assert_eq!(found, root.join("meshes/base.obj"));
        let tried = resolve_mesh_ref("package://x/nothing.obj", &root).unwrap_err();
        assert_eq!(tried.len(), 2);
    }

    #[test]
    fn stems_are_sanitized_and_distinct() {
        let desc = parse_urdf(
            r#"<robot name="r"><link name="a/b"/><link name="a_b"/>
               <joint name="j" type="fixed"><parent link="a/b"/><child link="a_b"/></joint></robot>"#,
        )
        .unwrap();
        let stems = file_stems(&desc);
        assert_eq!(stems["a/b"], "a_b");
        assert_eq!(stems["a_b"], "a_b_1");
    }

    #[test]
    fn two_link_build_and_load() {
        let out = tempfile::tempdir().unwrap();
        let dir = fixtures().join("two_link");
        let manifest = build_urdd(
            &dir.join("two_link.urdf"),
            &dir,
            out.path(),
            &DecompParams::default(),
        )
        .unwrap();
        assert_eq!(manifest.links.len(), 2);
        let base = &manifest.links["base"];
        assert_eq!(base.decomp_meshes.len(), 1);
        assert_eq!(manifest.links["arm"], LinkAssets::default());

        let (desc, store) = load_urdd(out.path()).unwrap();
        assert_eq!(desc.name, manifest.robot_name);
        assert_eq!(
            store.get("base", AppearanceLayer::ConvexHull).unwrap()[0]
                .vertices()
                .len(),
            8
        );
        assert!(!store.has_link("arm"));
    }

    #[test]
    fn unsupported_version_is_rejected() {
        let out = tempfile::tempdir().unwrap();
        fs::write(out.path().join(MANIFEST_FILE), r#"{"format_version": 2}"#).unwrap();
        assert!(matches!(
            read_manifest(out.path()),
            Err(UrddError::UnsupportedVersion { found: 2 })
        ));
        fs::write(out.path().join(MANIFEST_FILE), "{not json").unwrap();
        assert!(matches!(
            read_manifest(out.path()),
            Err(UrddError::Manifest { .. })
        ));
    }
}
