//! Scene model and the geometric-to-symbolic abstraction.
//!
//! A scene is a set of posed cuboid bodies, each a solid or a space, plus
//! the robot base point, the hand pose, an optional held object, and an
//! optional grasp whitelist. `perceive` reads occupancy, base-side, and
//! load-side fluents off the geometry:
//!
//! - A side's associated region is the body's own box translated one full
//!   extent along that side's outward normal. Occupancy is centroid
//!   containment (closed, tiny tolerance).
//! - Space sides look for neighboring spaces; a space's interior looks for
//!   solids. Solid sides look for other exposed solids and the hand.
//! - Solids whose centroid lies inside a declared space are absorbed: the
//!   space's interior atom stands in for them and they emit no atoms of
//!   their own.
//! - The table body is pure furniture: it neither emits nor receives
//!   atoms. Placements on the bare table go through generated table parts.
//! - A held object is reported from the declared grasp, not from geometry:
//!   hand contacts on the grasped sides, free air on the rest.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::abstraction::{assoc_space_pose, legal_grasps, part_centroid, Grasp, Part, SIDES};
use crate::geom::{add, norm, scale, sub, Obb, Pose, Vec3, EZ};
use crate::symbolic::domains::Ty;
use crate::symbolic::{GroundAtom, SymbolicState};

/// Closed-containment tolerance for occupancy tests.
pub const OCCUPANCY_TOL: f64 = 1e-9;
/// A side bears load when its outward normal is within this tilt of +z.
const FORCE_TILT_DEG: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyKind {
    Solid,
    Space,
}

#[derive(Clone, Debug)]
pub struct Body {
    pub name: String,
    pub kind: BodyKind,
    pub pose: Pose,
    /// Full edge lengths along the body's local axes.
    pub size: Vec3,
}

impl Body {
    pub fn obb(&self) -> Obb {
        Obb::from_size(self.pose, self.size)
    }

    /// World region associated with one side.
    pub fn side_region(&self, side: Part) -> Obb {
        Obb::from_size(assoc_space_pose(&self.pose, side, self.size), self.size)
    }

    pub fn side_centroid(&self, side: Part) -> Vec3 {
        self.pose.transform_point(part_centroid(side, self.size))
    }
}

#[derive(Clone, Debug)]
pub struct Held {
    pub object: String,
    pub grasp: Grasp,
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub robot_base: Vec3,
    pub hand: Pose,
    /// Name of the table body, if any.
    pub table: Option<String>,
    pub bodies: Vec<Body>,
    /// Allowed grasps; empty means all legal grasps.
    pub grasps: Vec<Grasp>,
    pub held: Option<Held>,
}

impl Scene {
    pub fn body(&self, name: &str) -> Option<&Body> {
        self.bodies.iter().find(|b| b.name == name)
    }

    pub fn body_mut(&mut self, name: &str) -> Option<&mut Body> {
        self.bodies.iter_mut().find(|b| b.name == name)
    }

    pub fn whitelist(&self) -> Vec<Grasp> {
        if self.grasps.is_empty() {
            legal_grasps()
        } else {
            self.grasps.clone()
        }
    }

    /// Planning objects: every body except the table, all physical.
    pub fn objects(&self) -> Vec<(String, Ty)> {
        self.bodies
            .iter()
            .filter(|b| Some(b.name.as_str()) != self.table.as_deref())
            .map(|b| (b.name.clone(), Ty::Phys))
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PerceiveError {
    #[error("{owner} {part}: both {a} and {b} occupy the region")]
    AmbiguousOccupancy {
        owner: String,
        part: String,
        a: String,
        b: String,
    },
    #[error("table grid exhausted: requested {requested} cells, found {available}")]
    InsufficientFreeSpace { requested: usize, available: usize },
    #[error("scene declares no table")]
    NoTable,
    #[error("unknown body {name}")]
    UnknownBody { name: String },
}

fn sole_occupant<'a, I>(
    owner: &str,
    part: Part,
    region: &Obb,
    candidates: I,
) -> Result<Option<&'a str>, PerceiveError>
where
    I: Iterator<Item = (&'a str, Vec3)>,
{
    let mut found: Option<&str> = None;
    for (name, point) in candidates {
        if region.contains(point, OCCUPANCY_TOL) {
            if let Some(first) = found {
                return Err(PerceiveError::AmbiguousOccupancy {
                    owner: owner.to_string(),
                    part: part.name().to_string(),
                    a: first.to_string(),
                    b: name.to_string(),
                });
            }
            found = Some(name);
        }
    }
    Ok(found)
}

fn nearest_side(body: &Body, to: Vec3) -> Part {
    let mut best = SIDES[0];
    let mut best_d = f64::INFINITY;
    for side in SIDES {
        let d = norm(sub(body.side_centroid(side), to));
        if d < best_d {
            best_d = d;
            best = side;
        }
    }
    best
}

fn load_side(body: &Body) -> Option<Part> {
    let cos_tol = FORCE_TILT_DEG.to_radians().cos();
    SIDES
        .into_iter()
        .find(|s| crate::geom::dot(body.pose.rot.apply(s.normal()), EZ) >= cos_tol)
}

/// Reads the occupancy fluents off the scene geometry. Static relation
/// facts are not included; merge them from the domain.
pub fn perceive(scene: &Scene) -> Result<SymbolicState, PerceiveError> {
    let table = scene.table.as_deref();
    if let Some(t) = table {
        if scene.body(t).is_none() {
            return Err(PerceiveError::UnknownBody { name: t.into() });
        }
    }
    let held_name = match &scene.held {
        Some(h) => {
            if scene.body(&h.object).is_none() {
                return Err(PerceiveError::UnknownBody {
                    name: h.object.clone(),
                });
            }
            Some(h.object.as_str())
        }
        None => None,
    };

    let spaces: Vec<&Body> = scene
        .bodies
        .iter()
        .filter(|b| b.kind == BodyKind::Space)
        .collect();
    let solids: Vec<&Body> = scene
        .bodies
        .iter()
        .filter(|b| {
            b.kind == BodyKind::Solid
                && Some(b.name.as_str()) != table
                && Some(b.name.as_str()) != held_name
        })
        .collect();
    let absorbed: BTreeSet<&str> = solids
        .iter()
        .filter(|s| spaces.iter().any(|sp| sp.obb().contains(s.pose.pos, OCCUPANCY_TOL)))
        .map(|s| s.name.as_str())
        .collect();
    let exposed: Vec<&&Body> = solids
        .iter()
        .filter(|s| !absorbed.contains(s.name.as_str()))
        .collect();

    let mut state = SymbolicState::new();
    let atom = |pred: &str, args: &[&str]| GroundAtom::new(pred, args);

    for sp in &spaces {
        for side in SIDES {
            let region = sp.side_region(side);
            let cands = spaces
                .iter()
                .filter(|o| o.name != sp.name)
                .map(|o| (o.name.as_str(), o.pose.pos));
            if let Some(nb) = sole_occupant(&sp.name, side, &region, cands)? {
                state.insert(atom("oc", &[side.name(), &sp.name, nb]));
            }
        }
        let interior = sp.obb();
        let cands = solids.iter().map(|o| (o.name.as_str(), o.pose.pos));
        match sole_occupant(&sp.name, Part::In, &interior, cands)? {
            Some(o) => state.insert(atom("oc", &["in", &sp.name, o])),
            None => state.insert(atom("oc", &["in", &sp.name, "air"])),
        };
        state.insert(atom("force", &[&sp.name, "in"]));
        state.insert(atom(
            "base",
            &[&sp.name, nearest_side(sp, scene.robot_base).name()],
        ));
    }

    for so in &exposed {
        for side in SIDES {
            let region = so.side_region(side);
            let cands = exposed
                .iter()
                .filter(|o| o.name != so.name)
                .map(|o| (o.name.as_str(), o.pose.pos))
                .chain(std::iter::once(("hand", scene.hand.pos)));
            match sole_occupant(&so.name, side, &region, cands)? {
                Some(nb) => state.insert(atom("oc", &[side.name(), &so.name, nb])),
                None => state.insert(atom("oc", &[side.name(), &so.name, "air"])),
            };
        }
        state.insert(atom(
            "base",
            &[&so.name, nearest_side(so, scene.robot_base).name()],
        ));
        if let Some(side) = load_side(so) {
            state.insert(atom("force", &[&so.name, side.name()]));
        }
    }

    match &scene.held {
        Some(h) => {
            state.insert(atom("oc", &["in", "hand", &h.object]));
            let contacts = [h.grasp.palm, h.grasp.f1, h.grasp.f2];
            for side in SIDES {
                if contacts.contains(&side) {
                    state.insert(atom("oc", &[side.name(), &h.object, "hand"]));
                } else {
                    state.insert(atom("oc", &[side.name(), &h.object, "air"]));
                }
            }
        }
        None => {
            state.insert(atom("oc", &["in", "hand", "air"]));
        }
    }

    Ok(state)
}

fn is_auto(name: &str) -> bool {
    name.strip_prefix("auto")
        .map(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
        .unwrap_or(false)
}

fn next_numbered(scene: &Scene, prefix: &str) -> usize {
    1 + scene
        .bodies
        .iter()
        .filter_map(|b| b.name.strip_prefix(prefix))
        .filter(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
        .filter_map(|r| r.parse::<usize>().ok())
        .max()
        .unwrap_or(0)
}

/// Gives every declared (non-generated) space a neighbor space on each of
/// `sides`, creating empty `autoN` spaces at `pitch` offsets where none
/// exists. `pitch` must land the new centroid inside the side region, i.e.
/// between half and one-and-a-half extents. Shared gaps between adjacent
/// spaces deduplicate naturally: once an auto space fills the gap, the
/// neighbor's check sees it. Returns the created names.
pub fn ensure_clearance_spaces(scene: &mut Scene, sides: &[Part], pitch: f64) -> Vec<String> {
    let mut next = next_numbered(scene, "auto");
    let targets: Vec<usize> = scene
        .bodies
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind == BodyKind::Space && !is_auto(&b.name))
        .map(|(i, _)| i)
        .collect();
    let mut added = Vec::new();
    for idx in targets {
        for &side in sides {
            let owner = &scene.bodies[idx];
            let region = owner.side_region(side);
            let occupied = scene
                .bodies
                .iter()
                .any(|b| b.kind == BodyKind::Space && region.contains(b.pose.pos, OCCUPANCY_TOL));
            if occupied {
                continue;
            }
            let owner = &scene.bodies[idx];
            let pose = Pose::new(
                add(owner.pose.pos, owner.pose.rot.apply(scale(side.normal(), pitch))),
                owner.pose.rot,
            );
            let size = owner.size;
            let name = format!("auto{next}");
            next += 1;
            scene.bodies.push(Body {
                name: name.clone(),
                kind: BodyKind::Space,
                pose,
                size,
            });
            added.push(name);
        }
    }
    added
}

/// Creates `tableN` spaces over the table top: one congruent footprint per
/// small solid resting directly on the table outside every declared space
/// (ordered by x then y), plus `extra` free cells of size `cell` found by
/// scanning the top in +x-fastest order.
pub fn generate_table_parts(
    scene: &mut Scene,
    extra: usize,
    cell: Vec3,
) -> Result<Vec<String>, PerceiveError> {
    let table_name = scene.table.clone().ok_or(PerceiveError::NoTable)?;
    let table = scene
        .body(&table_name)
        .ok_or(PerceiveError::UnknownBody {
            name: table_name.clone(),
        })?
        .clone();
    let top = table.pose.pos[2] + table.size[2] / 2.0;
    let held_name = scene.held.as_ref().map(|h| h.object.clone());

    let spaces: Vec<Obb> = scene
        .bodies
        .iter()
        .filter(|b| b.kind == BodyKind::Space)
        .map(|b| b.obb())
        .collect();
    let mut footprints: Vec<(Vec3, Pose, Vec3)> = Vec::new();
    for b in &scene.bodies {
        if b.kind != BodyKind::Solid
            || b.name == table_name
            || Some(&b.name) == held_name.as_ref()
        {
            continue;
        }
        let bottom = b.pose.pos[2] - b.size[2] / 2.0;
        let on_top = (bottom - top).abs() <= 5e-3;
        let inside_xy = (b.pose.pos[0] - table.pose.pos[0]).abs() <= table.size[0] / 2.0
            && (b.pose.pos[1] - table.pose.pos[1]).abs() <= table.size[1] / 2.0;
        let small = b.size[0] <= cell[0] * 1.1 && b.size[1] <= cell[1] * 1.1;
        let in_space = spaces.iter().any(|s| s.contains(b.pose.pos, OCCUPANCY_TOL));
        if on_top && inside_xy && small && !in_space {
            footprints.push((b.pose.pos, b.pose, b.size));
        }
    }
    footprints.sort_by(|a, b| {
        a.0[0]
            .total_cmp(&b.0[0])
            .then(a.0[1].total_cmp(&b.0[1]))
    });

    let mut next = next_numbered(scene, "table");
    let mut added = Vec::new();
    for (_, pose, size) in footprints {
        let name = format!("table{next}");
        next += 1;
        scene.bodies.push(Body {
            name: name.clone(),
            kind: BodyKind::Space,
            pose,
            size,
        });
        added.push(name);
    }

    if extra > 0 {
        let half = [
            table.size[0] / 2.0 - cell[0] / 2.0,
            table.size[1] / 2.0 - cell[1] / 2.0,
        ];
        let z = top + cell[2] / 2.0;
        let mut found = 0usize;
        let steps_x = (table.size[0] / cell[0]).floor() as i64;
        let steps_y = (table.size[1] / cell[1]).floor() as i64;
        'scan: for iy in 0..steps_y {
            for ix in 0..steps_x {
                let x = table.pose.pos[0] - half[0] + ix as f64 * cell[0];
                let y = table.pose.pos[1] - half[1] + iy as f64 * cell[1];
                if x > table.pose.pos[0] + half[0] + OCCUPANCY_TOL
                    || y > table.pose.pos[1] + half[1] + OCCUPANCY_TOL
                {
                    continue;
                }
                let pose = Pose::new([x, y, z], table.pose.rot);
                let obb = Obb::from_size(pose, cell);
                let solid_inside = scene.bodies.iter().any(|b| {
                    b.kind == BodyKind::Solid
                        && b.name != table_name
                        && obb.contains(b.pose.pos, OCCUPANCY_TOL)
                });
                let overlaps = scene.bodies.iter().any(|b| {
                    b.name != table_name && obb.intersects(&b.obb(), OCCUPANCY_TOL)
                });
                if solid_inside || overlaps {
                    continue;
                }
                let name = format!("table{next}");
                next += 1;
                scene.bodies.push(Body {
                    name: name.clone(),
                    kind: BodyKind::Space,
                    pose,
                    size: cell,
                });
                added.push(name);
                found += 1;
                if found == extra {
                    break 'scan;
                }
            }
        }
        if found < extra {
            return Err(PerceiveError::InsufficientFreeSpace {
                requested: extra,
                available: found,
            });
        }
    }
    Ok(added)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct SceneParseError {
    pub line: usize,
    pub msg: String,
}

fn f6(v: f64) -> String {
    format!("{:.6}", v + 0.0)
}

fn pose_fields(p: &Pose) -> String {
    let rpy = p.rot.to_rpy_canonical();
    format!(
        "{} {} {} {} {} {}",
        f6(p.pos[0]),
        f6(p.pos[1]),
        f6(p.pos[2]),
        f6(rpy[0]),
        f6(rpy[1]),
        f6(rpy[2])
    )
}

/// Serializes a scene in the line-oriented v1 format.
pub fn write_scene(s: &Scene) -> String {
    let mut out = String::from("scene v1\n");
    out.push_str(&format!(
        "robot-base {} {} {}\n",
        f6(s.robot_base[0]),
        f6(s.robot_base[1]),
        f6(s.robot_base[2])
    ));
    out.push_str(&format!("hand {}\n", pose_fields(&s.hand)));
    if let Some(t) = &s.table {
        out.push_str(&format!("table {t}\n"));
    }
    for b in &s.bodies {
        let kind = match b.kind {
            BodyKind::Solid => "solid",
            BodyKind::Space => "space",
        };
        out.push_str(&format!(
            "{kind} {} {} {} {} {}\n",
            b.name,
            pose_fields(&b.pose),
            f6(b.size[0]),
            f6(b.size[1]),
            f6(b.size[2])
        ));
    }
    for g in &s.grasps {
        out.push_str(&format!(
            "grasp {} {} {}\n",
            g.palm.name(),
            g.f1.name(),
            g.f2.name()
        ));
    }
    if let Some(h) = &s.held {
        out.push_str(&format!(
            "held {} {} {} {}\n",
            h.object,
            h.grasp.palm.name(),
            h.grasp.f1.name(),
            h.grasp.f2.name()
        ));
    }
    out
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, SceneParseError> {
    tok.parse::<f64>().map_err(|_| SceneParseError {
        line,
        msg: format!("bad number {tok}"),
    })
}

fn parse_part(tok: &str, line: usize) -> Result<Part, SceneParseError> {
    tok.parse::<Part>().map_err(|_| SceneParseError {
        line,
        msg: format!("bad part {tok}"),
    })
}

fn parse_pose(toks: &[&str], line: usize) -> Result<Pose, SceneParseError> {
    let mut v = [0.0; 6];
    for (i, t) in toks.iter().enumerate() {
        v[i] = parse_f64(t, line)?;
    }
    Ok(Pose::from_rpy([v[0], v[1], v[2]], [v[3], v[4], v[5]]))
}

/// Parses the line-oriented v1 scene format.
pub fn parse_scene(src: &str) -> Result<Scene, SceneParseError> {
    let mut scene = Scene {
        robot_base: [0.0; 3],
        hand: Pose::identity(),
        table: None,
        bodies: Vec::new(),
        grasps: Vec::new(),
        held: None,
    };
    let mut saw_header = false;
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if !saw_header {
            if toks != ["scene", "v1"] {
                return Err(SceneParseError {
                    line,
                    msg: "expected header scene v1".into(),
                });
            }
            saw_header = true;
            continue;
        }
        let wrong_arity = |n: usize| SceneParseError {
            line,
            msg: format!("{} takes {} fields", toks[0], n),
        };
        match toks[0] {
            "robot-base" => {
                if toks.len() != 4 {
                    return Err(wrong_arity(3));
                }
                scene.robot_base = [
                    parse_f64(toks[1], line)?,
                    parse_f64(toks[2], line)?,
                    parse_f64(toks[3], line)?,
                ];
            }
            "hand" => {
                if toks.len() != 7 {
                    return Err(wrong_arity(6));
                }
                scene.hand = parse_pose(&toks[1..], line)?;
            }
            "table" => {
                if toks.len() != 2 {
                    return Err(wrong_arity(1));
                }
                scene.table = Some(toks[1].to_string());
            }
            "solid" | "space" => {
                if toks.len() != 11 {
                    return Err(wrong_arity(10));
                }
                let name = toks[1].to_string();
                if scene.body(&name).is_some() {
                    return Err(SceneParseError {
                        line,
                        msg: format!("duplicate body {name}"),
                    });
                }
                let pose = parse_pose(&toks[2..8], line)?;
                let size = [
                    parse_f64(toks[8], line)?,
                    parse_f64(toks[9], line)?,
                    parse_f64(toks[10], line)?,
                ];
                scene.bodies.push(Body {
                    name,
                    kind: if toks[0] == "solid" {
                        BodyKind::Solid
                    } else {
                        BodyKind::Space
                    },
                    pose,
                    size,
                });
            }
            "grasp" => {
                if toks.len() != 4 {
                    return Err(wrong_arity(3));
                }
                scene.grasps.push(Grasp {
                    palm: parse_part(toks[1], line)?,
                    f1: parse_part(toks[2], line)?,
                    f2: parse_part(toks[3], line)?,
                });
            }
            "held" => {
                if toks.len() != 5 {
                    return Err(wrong_arity(4));
                }
                scene.held = Some(Held {
                    object: toks[1].to_string(),
                    grasp: Grasp {
                        palm: parse_part(toks[2], line)?,
                        f1: parse_part(toks[3], line)?,
                        f2: parse_part(toks[4], line)?,
                    },
                });
            }
            other => {
                return Err(SceneParseError {
                    line,
                    msg: format!("unknown directive {other}"),
                });
            }
        }
    }
    if !saw_header {
        return Err(SceneParseError {
            line: 1,
            msg: "expected header scene v1".into(),
        });
    }
    if let Some(t) = &scene.table {
        if scene.body(t).is_none() {
            return Err(SceneParseError {
                line: 1,
                msg: format!("table references unknown body {t}"),
            });
        }
    }
    if let Some(h) = &scene.held {
        if scene.body(&h.object).is_none() {
            return Err(SceneParseError {
                line: 1,
                msg: format!("held references unknown body {}", h.object),
            });
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rot;

    fn cube(name: &str, kind: BodyKind, pos: Vec3) -> Body {
        Body {
            name: name.into(),
            kind,
            pose: Pose::new(pos, Rot::identity()),
            size: [0.05, 0.05, 0.05],
        }
    }

    fn base_scene() -> Scene {
        Scene {
            robot_base: [1.2, 0.0, 0.41],
            hand: Pose::new([0.5, 0.0, 0.8], Rot::identity()),
            table: Some("worktop".into()),
            bodies: vec![Body {
                name: "worktop".into(),
                kind: BodyKind::Solid,
                pose: Pose::new([0.0, 0.0, 0.4], Rot::identity()),
                size: [1.6, 1.6, 0.02],
            }],
            grasps: vec![Grasp {
                palm: Part::Front,
                f1: Part::Left,
                f2: Part::Right,
            }],
            held: None,
        }
    }

    fn a(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom::new(pred, args)
    }

    #[test]
    fn block_in_space_is_absorbed() {
        let mut scene = base_scene();
        scene.bodies.push(cube("s1", BodyKind::Space, [0.0, 0.0, 0.435]));
        scene.bodies.push(cube("b1", BodyKind::Solid, [0.0, 0.0, 0.435]));
        let added = ensure_clearance_spaces(
            &mut scene,
            &[Part::Front, Part::Left, Part::Right],
            0.07,
        );
        assert_eq!(added, ["auto1", "auto2", "auto3"]);
        let state = perceive(&scene).unwrap();
        assert!(state.contains(&a("oc", &["in", "s1", "b1"])));
        assert!(state.contains(&a("oc", &["front", "s1", "auto1"])));
        assert!(state.contains(&a("oc", &["left", "s1", "auto2"])));
        assert!(state.contains(&a("oc", &["right", "s1", "auto3"])));
        assert!(state.contains(&a("oc", &["in", "auto1", "air"])));
        assert!(state.contains(&a("force", &["s1", "in"])));
        assert!(state.contains(&a("base", &["s1", "front"])));
        assert!(state.contains(&a("oc", &["in", "hand", "air"])));
        assert!(!state.iter().any(|at| at.pred == "base" && at.args[0] == "b1"));
        assert!(!state.iter().any(|at| at.pred == "oc" && at.args[1] == "b1"));
        assert!(!state
            .iter()
            .any(|at| at.args.iter().any(|x| x == "worktop")));
    }

    #[test]
    fn exposed_solid_reports_sides_base_force() {
        let mut scene = base_scene();
        scene.bodies.push(Body {
            name: "slab".into(),
            kind: BodyKind::Solid,
            pose: Pose::new([0.0, 0.0, 0.44], Rot::identity()),
            size: [0.2, 0.2, 0.06],
        });
        scene.bodies.push(cube("b1", BodyKind::Solid, [0.0, 0.0, 0.495]));
        let state = perceive(&scene).unwrap();
        assert!(state.contains(&a("oc", &["under", "b1", "slab"])));
        assert!(state.contains(&a("oc", &["on", "slab", "b1"])));
        assert!(state.contains(&a("oc", &["on", "b1", "air"])));
        assert!(state.contains(&a("oc", &["front", "b1", "air"])));
        assert!(state.contains(&a("force", &["b1", "on"])));
        assert!(state.contains(&a("force", &["slab", "on"])));
        assert!(state.contains(&a("base", &["b1", "front"])));
        assert!(state.contains(&a("base", &["slab", "front"])));
    }

    #[test]
    fn tilted_solid_has_no_load_side() {
        let mut scene = base_scene();
        scene.bodies.push(Body {
            name: "b1".into(),
            kind: BodyKind::Solid,
            pose: Pose::from_rpy([0.0, 0.0, 0.5], [0.2, 0.0, 0.0]),
            size: [0.05, 0.05, 0.05],
        });
        let state = perceive(&scene).unwrap();
        assert!(!state.iter().any(|at| at.pred == "force" && at.args[0] == "b1"));
    }

    #[test]
    fn two_occupants_are_ambiguous() {
        let mut scene = base_scene();
        scene.bodies.push(cube("s1", BodyKind::Space, [0.0, 0.0, 0.435]));
        scene.bodies.push(cube("b1", BodyKind::Solid, [0.01, 0.0, 0.435]));
        scene.bodies.push(cube("b2", BodyKind::Solid, [-0.01, 0.0, 0.435]));
        let err = perceive(&scene).unwrap_err();
        assert_eq!(
            err,
            PerceiveError::AmbiguousOccupancy {
                owner: "s1".into(),
                part: "in".into(),
                a: "b1".into(),
                b: "b2".into(),
            }
        );
    }

    #[test]
    fn held_object_reports_grasp_contacts() {
        let mut scene = base_scene();
        scene.bodies.push(cube("s1", BodyKind::Space, [0.0, 0.0, 0.435]));
        scene.bodies.push(cube("b1", BodyKind::Solid, [0.5, 0.0, 0.74]));
        scene.held = Some(Held {
            object: "b1".into(),
            grasp: Grasp {
                palm: Part::Front,
                f1: Part::Left,
                f2: Part::Right,
            },
        });
        let state = perceive(&scene).unwrap();
        assert!(state.contains(&a("oc", &["in", "hand", "b1"])));
        assert!(state.contains(&a("oc", &["front", "b1", "hand"])));
        assert!(state.contains(&a("oc", &["left", "b1", "hand"])));
        assert!(state.contains(&a("oc", &["right", "b1", "hand"])));
        assert!(state.contains(&a("oc", &["on", "b1", "air"])));
        assert!(state.contains(&a("oc", &["under", "b1", "air"])));
        assert!(state.contains(&a("oc", &["back", "b1", "air"])));
        assert!(state.contains(&a("oc", &["in", "s1", "air"])));
        assert!(!state.iter().any(|at| at.pred == "base" && at.args[0] == "b1"));
    }

    #[test]
    fn clearance_spaces_share_gaps() {
        let mut scene = base_scene();
        scene.bodies.push(cube("sa", BodyKind::Space, [0.0, 0.0, 0.435]));
        scene.bodies.push(cube("sb", BodyKind::Space, [0.0, 0.14, 0.435]));
        let added = ensure_clearance_spaces(
            &mut scene,
            &[Part::Front, Part::Left, Part::Right],
            0.07,
        );
        assert_eq!(added.len(), 5);
        let state = perceive(&scene).unwrap();
        let left_of_sa = state
            .iter()
            .find(|at| at.pred == "oc" && at.args[0] == "left" && at.args[1] == "sa")
            .unwrap();
        let right_of_sb = state
            .iter()
            .find(|at| at.pred == "oc" && at.args[0] == "right" && at.args[1] == "sb")
            .unwrap();
        assert_eq!(left_of_sa.args[2], right_of_sb.args[2]);
        let rerun = ensure_clearance_spaces(
            &mut scene,
            &[Part::Front, Part::Left, Part::Right],
            0.07,
        );
        assert!(rerun.is_empty());
    }

    #[test]
    fn table_parts_cover_loose_solids_and_extras() {
        let mut scene = base_scene();
        scene.bodies.push(cube("g2", BodyKind::Solid, [0.28, -0.35, 0.435]));
        scene.bodies.push(cube("g1", BodyKind::Solid, [0.14, -0.35, 0.435]));
        scene.bodies.push(Body {
            name: "appliance".into(),
            kind: BodyKind::Solid,
            pose: Pose::new([-0.45, -0.33, 0.44], Rot::identity()),
            size: [0.24, 0.24, 0.06],
        });
        scene.bodies.push(cube("s1", BodyKind::Space, [0.0, 0.2, 0.435]));
        scene.bodies.push(cube("housed", BodyKind::Solid, [0.0, 0.2, 0.435]));
        let added = generate_table_parts(&mut scene, 1, [0.05, 0.05, 0.05]).unwrap();
        assert_eq!(added.len(), 3);
        assert_eq!(added[0], "table1");
        let t1 = scene.body("table1").unwrap();
        assert_eq!(t1.pose.pos, [0.14, -0.35, 0.435]);
        let t2 = scene.body("table2").unwrap();
        assert_eq!(t2.pose.pos, [0.28, -0.35, 0.435]);
        assert_eq!(scene.body("table3").unwrap().kind, BodyKind::Space);
        let state = perceive(&scene).unwrap();
        assert!(state.contains(&a("oc", &["in", "table1", "g1"])));
        assert!(state.contains(&a("oc", &["in", "table2", "g2"])));
        assert!(state.contains(&a("oc", &["in", "table3", "air"])));
        assert!(!added.iter().any(|n| {
            let b = scene.body(n).unwrap();
            b.obb().contains([-0.45, -0.33, 0.435], OCCUPANCY_TOL)
        }));
    }

    #[test]
    fn full_table_reports_insufficient_space() {
        let mut scene = base_scene();
        scene.body_mut("worktop").unwrap().size = [0.06, 0.06, 0.02];
        scene.bodies.push(cube("b", BodyKind::Solid, [0.0, 0.0, 0.435]));
        let err = generate_table_parts(&mut scene, 2, [0.05, 0.05, 0.05]).unwrap_err();
        assert_eq!(
            err,
            PerceiveError::InsufficientFreeSpace {
                requested: 2,
                available: 0
            }
        );
    }

    #[test]
    fn scene_text_round_trip() {
        let mut scene = base_scene();
        scene.bodies.push(cube("s1", BodyKind::Space, [0.07, -0.14, 0.435]));
        scene.bodies.push(cube("b1", BodyKind::Solid, [0.07, -0.14, 0.435]));
        scene.held = Some(Held {
            object: "b1".into(),
            grasp: Grasp {
                palm: Part::Front,
                f1: Part::Left,
                f2: Part::Right,
            },
        });
        let text = write_scene(&scene);
        let parsed = parse_scene(&text).unwrap();
        assert_eq!(write_scene(&parsed), text);
        assert!(text.contains("held b1 front left right"));
        assert!(text.contains("space s1 0.070000 -0.140000 0.435000"));
    }

    #[test]
    fn scene_parse_errors_carry_line_numbers() {
        let e = parse_scene("solid b 0 0 0 0 0 0 1 1 1\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.msg.contains("scene v1"));
        let e = parse_scene("scene v1\nwobble 1 2 3\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("wobble"));
        let e = parse_scene("scene v1\nsolid b 0 0 0 0 0 x 1 1 1\n").unwrap_err();
        assert!(e.msg.contains("bad number x"));
        let e = parse_scene("scene v1\ngrasp top left right\n").unwrap_err();
        assert!(e.msg.contains("bad part top"));
        let e = parse_scene("scene v1\ntable t\n").unwrap_err();
        assert!(e.msg.contains("unknown body t"));
        let e =
            parse_scene("scene v1\nsolid b 0 0 0 0 0 0 1 1 1\nsolid b 0 0 0 0 0 0 1 1 1\n")
                .unwrap_err();
        assert!(e.msg.contains("duplicate"));
    }
}
