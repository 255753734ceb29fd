use std::fmt::Write as _;

use super::RobotDescription;
use crate::math::{Pose, Rpy};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn origin(pose: &Pose) -> String {
    let t = pose.translation.vector;
    let r = Rpy::from_quat(&pose.rotation);
    format!(
        "<origin xyz=\"{} {} {}\" rpy=\"{} {} {}\"/>",
        t.x, t.y, t.z, r.roll, r.pitch, r.yaw
    )
}

/// Serializes the supported subset back to URDF. Parsing the result yields
/// the same structure; orientations may come back as an equivalent rpy.
pub fn to_urdf_string(desc: &RobotDescription) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\"?>");
    let _ = writeln!(out, "<robot name=\"{}\">", escape(&desc.name));
    for link in &desc.links {
        if link.visuals.is_empty() {
            let _ = writeln!(out, "  <link name=\"{}\"/>", escape(&link.name));
            continue;
        }
        let _ = writeln!(out, "  <link name=\"{}\">", escape(&link.name));
        for (i, v) in link.visuals.iter().enumerate() {
            let _ = writeln!(out, "    <visual>");
            let _ = writeln!(out, "      {}", origin(&v.origin));
            let _ = writeln!(
                out,
                "      <geometry><mesh filename=\"{}\" scale=\"{} {} {}\"/></geometry>",
                escape(&v.mesh_ref),
                v.scale.x,
                v.scale.y,
                v.scale.z
            );
            if let (0, Some(c)) = (i, link.base_color) {
                let _ = writeln!(
                    out,
                    "      <material name=\"{}_color\"><color rgba=\"{} {} {} {}\"/></material>",
                    escape(&link.name),
                    c.r(),
                    c.g(),
                    c.b(),
                    c.a()
                );
            }
            let _ = writeln!(out, "    </visual>");
        }
        let _ = writeln!(out, "  </link>");
    }
    for j in &desc.joints {
        let _ = writeln!(
            out,
            "  <joint name=\"{}\" type=\"{}\">",
            escape(&j.name),
            j.kind.as_str()
        );
        let _ = writeln!(out, "    <parent link=\"{}\"/>", escape(&j.parent_link));
        let _ = writeln!(out, "    <child link=\"{}\"/>", escape(&j.child_link));
        let _ = writeln!(out, "    {}", origin(&j.origin));
        let _ = writeln!(
            out,
            "    <axis xyz=\"{} {} {}\"/>",
            j.axis.x, j.axis.y, j.axis.z
        );
        if let Some(l) = j.limits {
            let _ = writeln!(
                out,
                "    <limit lower=\"{}\" upper=\"{}\" effort=\"0\" velocity=\"0\"/>",
                l.lower, l.upper
            );
        }
        let _ = writeln!(out, "  </joint>");
    }
    let _ = writeln!(out, "</robot>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::parse_urdf;

    #[test]
    fn names_are_escaped() {
        let xml = r#"<robot name="a&amp;b"><link name="l&lt;1"/></robot>"#;
        let d = parse_urdf(xml).unwrap();
        let again = parse_urdf(&to_urdf_string(&d)).unwrap();
        assert_eq!(again.name, "a&b");
        assert_eq!(again.links[0].name, "l<1");
    }
}
