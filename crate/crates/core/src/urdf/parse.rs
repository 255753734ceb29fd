use std::collections::{HashMap, HashSet, VecDeque};

use log::{debug, warn};
use roxmltree::Node;

use super::{JointKind, JointLimits, JointSpec, LinkSpec, RobotDescription, UrdfError, Visual};
use crate::color::Rgba;
use crate::math::{pose_from_xyz_rpy, Pose, Rpy, Vec3};

/// Parses and validates URDF text.
///
/// Unknown elements are ignored; a missing joint `<origin>` is the identity
/// and a missing `<axis>` is `(1, 0, 0)`.
pub fn parse_urdf(xml: &str) -> Result<RobotDescription, UrdfError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| UrdfError::Xml(e.to_string()))?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(UrdfError::NoRobotElement);
    }
    let name = required(&robot, "robot", "name")?.to_string();

    let mut materials = HashMap::new();
    for m in children(&robot, "material") {
        if let (Some(n), Some(c)) = (m.attribute("name"), color_of(&m)?) {
            materials.insert(n.to_string(), c);
        }
    }

    let mut links: Vec<LinkSpec> = Vec::new();
    let mut joints: Vec<JointSpec> = Vec::new();
    let mut link_names = HashSet::new();
    let mut joint_names = HashSet::new();
    let mut skipped: HashMap<&'static str, usize> = HashMap::new();
    for node in robot.children().filter(Node::is_element) {
        match node.tag_name().name() {
            "link" => {
                let link = parse_link(&node, &materials, &mut skipped)?;
                if !link_names.insert(link.name.clone()) {
                    return Err(UrdfError::DuplicateLink(link.name));
                }
                links.push(link);
            }
            "joint" => {
                let joint = parse_joint(&node)?;
                if !joint_names.insert(joint.name.clone()) {
                    return Err(UrdfError::DuplicateJoint(joint.name));
                }
                joints.push(joint);
            }
            "material" => {}
            "transmission" => *skipped.entry("transmission").or_default() += 1,
            "gazebo" => *skipped.entry("gazebo").or_default() += 1,
            "sensor" => *skipped.entry("sensor").or_default() += 1,
            other => debug!("ignoring <{other}> in robot `{name}`"),
        }
    }
    let mut skipped: Vec<_> = skipped.into_iter().collect();
    skipped.sort_unstable();
    for (tag, count) in skipped {
        warn!("robot `{name}`: skipped {count} <{tag}> element(s); only visuals are imported");
    }

    let root_link = check_tree(&links, &joints)?;
    Ok(RobotDescription {
        name,
        links,
        joints,
        root_link,
    })
}

fn children<'a, 'input: 'a>(
    node: &Node<'a, 'input>,
    tag: &'a str,
) -> impl Iterator<Item = Node<'a, 'input>> + 'a {
    node.children()
        .filter(move |c| c.is_element() && c.tag_name().name() == tag)
}

fn child<'a, 'input>(node: &Node<'a, 'input>, tag: &str) -> Option<Node<'a, 'input>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == tag)
}

fn describe(node: &Node) -> String {
    match node.attribute("name") {
        Some(n) => format!("{} name=\"{n}\"", node.tag_name().name()),
        None => node.tag_name().name().to_string(),
    }
}

fn required<'a>(
    node: &Node<'a, '_>,
    element: &str,
    attribute: &'static str,
) -> Result<&'a str, UrdfError> {
    node.attribute(attribute)
        .ok_or_else(|| UrdfError::MissingAttribute {
            element: element.to_string(),
            attribute,
        })
}

fn floats<const N: usize>(
    node: &Node,
    attribute: &'static str,
    context: &str,
) -> Result<Option<[f64; N]>, UrdfError> {
    let Some(text) = node.attribute(attribute) else {
        return Ok(None);
    };
    let invalid = || UrdfError::InvalidValue {
        element: context.to_string(),
        attribute,
        value: text.to_string(),
    };
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|_| invalid()))
        .collect::<Result<_, _>>()?;
    let array: [f64; N] = values.try_into().map_err(|_| invalid())?;
    if array.iter().any(|v| !v.is_finite()) {
        return Err(invalid());
    }
    Ok(Some(array))
}

fn parse_origin(parent: &Node, context: &str) -> Result<Pose, UrdfError> {
    let Some(origin) = child(parent, "origin") else {
        return Ok(Pose::identity());
    };
    let xyz = floats::<3>(&origin, "xyz", context)?.unwrap_or_default();
    let rpy = floats::<3>(&origin, "rpy", context)?.unwrap_or_default();
    Ok(pose_from_xyz_rpy(Vec3::from(xyz), Rpy::from(rpy)))
}

fn color_of(material: &Node) -> Result<Option<Rgba>, UrdfError> {
    let Some(color) = child(material, "color") else {
        return Ok(None);
    };
    Ok(floats::<4>(&color, "rgba", &describe(material))?.map(Rgba::from))
}

fn parse_link(
    node: &Node,
    materials: &HashMap<String, Rgba>,
    skipped: &mut HashMap<&'static str, usize>,
) -> Result<LinkSpec, UrdfError> {
    let name = required(node, "link", "name")?.to_string();
    let context = describe(node);
    let mut visuals = Vec::new();
    let mut base_color = None;
    for c in node.children().filter(Node::is_element) {
        match c.tag_name().name() {
            "visual" => {
                let Some(mesh) = child(&c, "geometry").and_then(|g| child(&g, "mesh")) else {
                    warn!("link `{name}`: skipping a visual without mesh geometry");
                    continue;
                };
                let mesh_ref = required(&mesh, "mesh", "filename")?.to_string();
                let scale =
                    floats::<3>(&mesh, "scale", &context)?.map_or(Vec3::repeat(1.0), Vec3::from);
                let origin = parse_origin(&c, &context)?;
                if base_color.is_none() {
                    if let Some(m) = child(&c, "material") {
                        base_color = match color_of(&m)? {
                            Some(color) => Some(color),
                            None => m.attribute("name").and_then(|n| materials.get(n)).copied(),
                        };
                    }
                }
                visuals.push(Visual {
                    mesh_ref,
                    origin,
                    scale,
                });
            }
            "collision" => *skipped.entry("collision").or_default() += 1,
            _ => {}
        }
    }
    Ok(LinkSpec {
        name,
        visuals,
        base_color,
    })
}

fn parse_joint(node: &Node) -> Result<JointSpec, UrdfError> {
    let name = required(node, "joint", "name")?.to_string();
    let context = describe(node);
    let kind = match required(node, &context, "type")? {
        "revolute" => JointKind::Revolute,
        "continuous" => JointKind::Continuous,
        "prismatic" => JointKind::Prismatic,
        "fixed" => JointKind::Fixed,
        other => {
            return Err(UrdfError::UnsupportedJointType {
                joint: name,
                kind: other.to_string(),
            })
        }
    };
    if child(node, "mimic").is_some() {
        return Err(UrdfError::MimicUnsupported(name));
    }
    let link_of = |tag: &str| -> Result<String, UrdfError> {
        let n = child(node, tag).ok_or_else(|| UrdfError::MissingAttribute {
            element: format!("{context}/{tag}"),
            attribute: "link",
        })?;
        Ok(required(&n, &format!("{context}/{tag}"), "link")?.to_string())
    };
    let parent_link = link_of("parent")?;
    let child_link = link_of("child")?;
    let origin = parse_origin(node, &context)?;

    let raw_axis = match child(node, "axis") {
        Some(a) => floats::<3>(&a, "xyz", &context)?.map_or(Vec3::x(), Vec3::from),
        None => Vec3::x(),
    };
    let axis = if raw_axis.norm() > 1e-12 {
        raw_axis.normalize()
    } else if kind.is_fixed() {
        Vec3::x()
    } else {
        return Err(UrdfError::ZeroAxis(name));
    };

    let limits = match (kind, child(node, "limit")) {
        (JointKind::Revolute | JointKind::Prismatic, Some(l)) => {
            let lower = floats::<1>(&l, "lower", &context)?;
            let upper = floats::<1>(&l, "upper", &context)?;
            if lower.is_none() && upper.is_none() {
                None
            } else {
                let lower = lower.map_or(0.0, |v| v[0]);
                let upper = upper.map_or(0.0, |v| v[0]);
                if lower > upper {
                    return Err(UrdfError::InvalidLimits {
                        joint: name,
                        lower,
                        upper,
                    });
                }
                Some(JointLimits { lower, upper })
            }
        }
        _ => None,
    };

    Ok(JointSpec {
        name,
        kind,
        parent_link,
        child_link,
        origin,
        axis,
        limits,
    })
}

/// Checks the joint graph is a tree and returns its root link.
fn check_tree(links: &[LinkSpec], joints: &[JointSpec]) -> Result<String, UrdfError> {
    let declared: HashSet<&str> = links.iter().map(|l| l.name.as_str()).collect();
    let mut parent_of: HashMap<&str, &str> = HashMap::new();
    let mut children_of: HashMap<&str, Vec<&str>> = HashMap::new();
    for j in joints {
        for link in [&j.child_link, &j.parent_link] {
            if !declared.contains(link.as_str()) {
                return Err(UrdfError::DanglingLink {
                    joint: j.name.clone(),
                    link: link.clone(),
                });
            }
        }
        if j.parent_link == j.child_link {
            return Err(UrdfError::Cycle(j.child_link.clone()));
        }
        if let Some(first) = parent_of.insert(&j.child_link, &j.name) {
            return Err(UrdfError::MultipleParents {
                link: j.child_link.clone(),
                first: first.to_string(),
                second: j.name.clone(),
            });
        }
        children_of
            .entry(&j.parent_link)
            .or_default()
            .push(&j.child_link);
    }

    if links.is_empty() {
        return Err(UrdfError::NoRoot);
    }
    let roots: Vec<&str> = links
        .iter()
        .map(|l| l.name.as_str())
        .filter(|n| !parent_of.contains_key(n))
        .collect();

    let mut reached: HashSet<&str> = roots.iter().copied().collect();
    let mut queue: VecDeque<&str> = roots.iter().copied().collect();
    while let Some(l) = queue.pop_front() {
        for &c in children_of.get(l).into_iter().flatten() {
            if reached.insert(c) {
                queue.push_back(c);
            }
        }
    }
    // with single parents, anything unreachable from a root lies on a cycle
    if let Some(l) = links.iter().find(|l| !reached.contains(l.name.as_str())) {
        return Err(UrdfError::Cycle(l.name.clone()));
    }
    match roots.as_slice() {
        [root] => Ok(root.to_string()),
        _ => Err(UrdfError::MultipleRoots(
            roots.iter().map(|s| s.to_string()).collect(),
        )),
    }
}
