mod common;

use std::fs;

use common::{robot_fixtures, RandomRobot};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roboscene::geometry::{read_mesh, DecompParams};
use roboscene::urdd::{build_urdd, load_urdd, AppearanceLayer, UrddError, MANIFEST_FILE};
use roboscene::urdf::{parse_urdf, to_urdf_string, JointKind, RobotDescription, UrdfError};

fn parse_file(path: &std::path::Path) -> RobotDescription {
    parse_urdf(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Structural equality with poses compared to 1e-9.
fn assert_same_structure(a: &RobotDescription, b: &RobotDescription) {
    assert_eq!(a.name, b.name);
    assert_eq!(a.root_link, b.root_link);
    assert_eq!(a.links.len(), b.links.len());
    assert_eq!(a.joints.len(), b.joints.len());
    for (x, y) in a.links.iter().zip(&b.links) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.base_color, y.base_color);
        assert_eq!(x.visuals.len(), y.visuals.len());
        for (u, v) in x.visuals.iter().zip(&y.visuals) {
            assert_eq!(u.mesh_ref, v.mesh_ref);
            assert_eq!(u.scale, v.scale);
            assert!((u.origin.to_homogeneous() - v.origin.to_homogeneous()).amax() <= 1e-9);
        }
    }
    for (x, y) in a.joints.iter().zip(&b.joints) {
        assert_eq!(
            (&x.name, x.kind, &x.parent_link, &x.child_link, x.limits),
            (&y.name, y.kind, &y.parent_link, &y.child_link, y.limits)
        );
        assert!((x.axis - y.axis).amax() <= 1e-12);
        assert!((x.origin.to_homogeneous() - y.origin.to_homogeneous()).amax() <= 1e-9);
    }
}

#[test]
fn parse_examples() {
    let dir = common::fixtures();
    let two = parse_file(&dir.join("two_link/two_link.urdf"));
    assert_eq!((two.links.len(), two.joints.len()), (2, 1));
    assert_eq!(two.root_link, two.joints[0].parent_link);

    let ur5 = parse_file(&common::ur5_urdf());
    assert_eq!(ur5.dof(), 6);
    assert_eq!(ur5.joints.len(), ur5.links.len() - 1);

    let dangling = r#"<robot name="r"><link name="a"/>
        <joint name="j" type="fixed"><parent link="a"/><child link="ghost"/></joint></robot>"#;
    assert_eq!(
        parse_urdf(dangling).unwrap_err(),
        UrdfError::DanglingLink {
            joint: "j".into(),
            link: "ghost".into()
        }
    );
}

#[test]
fn defaults_for_missing_origin_and_axis() {
    let d = parse_urdf(
        r#"<robot name="r"><link name="a"/><link name="b"/>
           <joint name="j" type="revolute"><parent link="a"/><child link="b"/></joint></robot>"#,
    )
    .unwrap();
    let j = &d.joints[0];
    assert_eq!(j.kind, JointKind::Revolute);
    assert_eq!(j.origin, roboscene::math::Pose::identity());
    assert_eq!(j.axis, roboscene::math::Vec3::x());
}

#[test]
fn serialize_round_trip_on_fixtures() {
    for (urdf, _) in robot_fixtures() {
        let first = parse_file(&urdf);
        let again = parse_urdf(&to_urdf_string(&first)).unwrap();
        assert_same_structure(&first, &again);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_round_trip_on_random_trees(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let robot = RandomRobot::generate(&mut rng, 8);
        let first = parse_urdf(&robot.to_urdf()).unwrap();
        prop_assert_eq!(first.joints.len(), first.links.len() - 1);
        let again = parse_urdf(&to_urdf_string(&first)).unwrap();
        assert_same_structure(&first, &again);
    }
}

#[test]
fn build_and_load_round_trip_on_all_fixtures() {
    for (urdf, mesh_root) in robot_fixtures() {
        let out = tempfile::tempdir().unwrap();
        let manifest = build_urdd(&urdf, &mesh_root, out.path(), &DecompParams::default()).unwrap();
        let (desc, store) = load_urdd(out.path()).unwrap();
        assert_eq!(desc, parse_file(&urdf));
        assert_eq!(manifest.links.len(), desc.links.len());

        // the loader must reproduce the on-disk meshes exactly
        for (link, assets) in &manifest.links {
            let layers = [
                (
                    AppearanceLayer::Plain,
                    assets.plain_mesh.iter().cloned().collect::<Vec<_>>(),
                ),
                (
                    AppearanceLayer::ConvexHull,
                    assets.hull_mesh.iter().cloned().collect(),
                ),
                (
                    AppearanceLayer::ConvexDecomposition,
                    assets.decomp_meshes.clone(),
                ),
            ];
            for (layer, files) in layers {
                let loaded = store.get(link, layer).unwrap_or(&[]);
                assert_eq!(loaded.len(), files.len(), "{link} {layer:?}");
                for (mesh, rel) in loaded.iter().zip(&files) {
                    let disk = read_mesh(&out.path().join(rel)).unwrap();
                    assert_eq!(mesh.vertices().len(), disk.vertices().len());
                    assert_eq!(mesh.triangles().len(), disk.triangles().len());
                }
            }
        }
        for link in desc.visual_links() {
            for layer in AppearanceLayer::ALL {
                assert!(store.get(&link.name, layer).is_some_and(|m| !m.is_empty()));
            }
        }
    }
}

#[test]
fn build_counts_match_the_source_meshes() {
    let (dir, manifest) = common::ur5_urdd();
    let desc = parse_file(&common::ur5_urdf());
    let with_visuals = desc.visual_links().count();
    assert_eq!(with_visuals, 7);
    assert_eq!(
        manifest
            .links
            .values()
            .filter(|l| l.hull_mesh.is_some())
            .count(),
        with_visuals
    );

    // a single-visual link with identity origin keeps the source mesh counts
    let (_, store) = load_urdd(dir.path()).unwrap();
    let source = read_mesh(&common::fixtures().join("ur5/meshes/forearm.obj")).unwrap();
    let stored = &store.get("forearm_link", AppearanceLayer::Plain).unwrap()[0];
    assert_eq!(stored.vertices().len(), source.vertices().len());
    assert_eq!(stored.triangles().len(), source.triangles().len());
}

#[test]
fn two_link_cube_assets() {
    let dir = common::fixtures().join("two_link");
    let out = tempfile::tempdir().unwrap();
    let manifest = build_urdd(
        &dir.join("two_link.urdf"),
        &dir,
        out.path(),
        &DecompParams::default(),
    )
    .unwrap();
    let plain = manifest
        .links
        .values()
        .filter(|l| l.plain_mesh.is_some())
        .count();
    let hulls = manifest
        .links
        .values()
        .filter(|l| l.hull_mesh.is_some())
        .count();
    let parts: usize = manifest.links.values().map(|l| l.decomp_meshes.len()).sum();
    assert_eq!((plain, hulls, parts), (1, 1, 1));
    let (_, store) = load_urdd(out.path()).unwrap();
    let cube = read_mesh(&dir.join("meshes/cube.obj")).unwrap();
    let hull = &store.get("base", AppearanceLayer::ConvexHull).unwrap()[0];
    assert_eq!(
        common::sorted_points(hull.vertices()),
        common::sorted_points(cube.vertices())
    );
}

#[test]
fn rebuild_is_byte_identical() {
    let dir = common::fixtures().join("three_fixed");
    let out = tempfile::tempdir().unwrap();
    let params = DecompParams::default();
    let urdf = dir.join("three_fixed.urdf");
    let mesh_root = common::fixtures().join("meshes");
    let snapshot = |root: &std::path::Path| {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push((p.clone(), fs::read(&p).unwrap()));
                }
            }
        }
        files.sort();
        files
    };
    build_urdd(&urdf, &mesh_root, out.path(), &params).unwrap();
    let first = snapshot(out.path());
    // a stale file in a managed directory must not survive a rebuild
    fs::write(out.path().join("meshes/stale.obj"), "v 0 0 0\n").unwrap();
    build_urdd(&urdf, &mesh_root, out.path(), &params).unwrap();
    assert_eq!(first, snapshot(out.path()));
}

#[test]
fn missing_mesh_is_named() {
    let out = tempfile::tempdir().unwrap();
    let src = tempfile::tempdir().unwrap();
    let urdf = src.path().join("r.urdf");
    fs::write(
        &urdf,
        r#"<robot name="r"><link name="a"><visual><geometry>
             <mesh filename="meshes/nope.obj"/></geometry></visual></link></robot>"#,
    )
    .unwrap();
    let err = build_urdd(&urdf, src.path(), out.path(), &DecompParams::default()).unwrap_err();
    assert!(
        matches!(&err, UrddError::UnresolvedMesh { mesh_ref, .. } if mesh_ref == "meshes/nope.obj")
    );
    assert!(err.to_string().contains("nope.obj"));
}

#[test]
fn unsupported_mesh_extension() {
    let out = tempfile::tempdir().unwrap();
    let src = tempfile::tempdir().unwrap();
    fs::write(src.path().join("m.ply"), "ply\n").unwrap();
    let urdf = src.path().join("r.urdf");
    fs::write(
        &urdf,
        r#"<robot name="r"><link name="a"><visual><geometry>
             <mesh filename="m.ply"/></geometry></visual></link></robot>"#,
    )
    .unwrap();
    let err = build_urdd(&urdf, src.path(), out.path(), &DecompParams::default()).unwrap_err();
    assert!(err.to_string().contains("m.ply"), "{err}");
}

#[test]
fn deleted_hull_is_a_mismatch() {
    let (dir, manifest) = common::ur5_urdd();
    let hull = manifest.links["shoulder_link"].hull_mesh.clone().unwrap();
    fs::remove_file(dir.path().join(&hull)).unwrap();
    let err = load_urdd(dir.path()).unwrap_err();
    assert!(matches!(&err, UrddError::Mismatch { path, .. } if path.ends_with(&hull)));
    assert!(err.to_string().contains("shoulder_link.obj"));
}

#[test]
fn manifest_errors() {
    let (dir, _) = common::ur5_urdd();
    let path = dir.path().join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).unwrap();

    fs::write(
        &path,
        text.replace("\"format_version\": 1", "\"format_version\": 2"),
    )
    .unwrap();
    assert!(matches!(
        load_urdd(dir.path()),
        Err(UrddError::UnsupportedVersion { found: 2 })
    ));

    fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(
        load_urdd(dir.path()),
        Err(UrddError::Manifest { .. })
    ));

    fs::remove_file(&path).unwrap();
    assert!(matches!(
        load_urdd(dir.path()),
        Err(UrddError::Manifest { .. })
    ));
}
