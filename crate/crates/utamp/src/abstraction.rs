//! Object-centric state abstraction.
//!
//! Every rigid body is a box with six named side parts plus an interior
//! part. Each side part owns an outward normal, a centroid on the box
//! surface, and an associated space: a box-sized region just outside that
//! side whose occupancy is what the symbolic layer reasons about. Grasps
//! and placements are synthesized per part configuration, so the symbolic
//! planner can commit to contacts without ever touching coordinates, and
//! the executor can recover exact poses afterwards.

use crate::geom::{add, scale, sub, Pose, Rot, Vec3, EX, EY, EZ};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// The seven parts of a box-shaped body: six sides plus the interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    On,
    Under,
    Left,
    Right,
    Front,
    Back,
    In,
}

/// The six surface parts, in canonical order.
pub const SIDES: [Part; 6] = [
    Part::On,
    Part::Under,
    Part::Left,
    Part::Right,
    Part::Front,
    Part::Back,
];

/// All seven parts, surface parts first.
pub const PARTS: [Part; 7] = [
    Part::On,
    Part::Under,
    Part::Left,
    Part::Right,
    Part::Front,
    Part::Back,
    Part::In,
];

impl Part {
    /// Outward unit normal of a surface part; zero for the interior.
    pub fn normal(self) -> Vec3 {
        match self {
            Part::On => EZ,
            Part::Under => scale(EZ, -1.0),
            Part::Left => EY,
            Part::Right => scale(EY, -1.0),
            Part::Front => EX,
            Part::Back => scale(EX, -1.0),
            Part::In => [0.0; 3],
        }
    }

    /// Body-frame axis the part lies on: 0 = x, 1 = y, 2 = z. The interior
    /// reports 0; pair it with the zero normal.
    pub fn axis(self) -> usize {
        match self {
            Part::Front | Part::Back => 0,
            Part::Left | Part::Right => 1,
            Part::On | Part::Under => 2,
            Part::In => 0,
        }
    }

    pub fn opposite(self) -> Part {
        match self {
            Part::On => Part::Under,
            Part::Under => Part::On,
            Part::Left => Part::Right,
            Part::Right => Part::Left,
            Part::Front => Part::Back,
            Part::Back => Part::Front,
            Part::In => Part::In,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Part::On => "on",
            Part::Under => "under",
            Part::Left => "left",
            Part::Right => "right",
            Part::Front => "front",
            Part::Back => "back",
            Part::In => "in",
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Part {
    type Err = String;

    fn from_str(s: &str) -> Result<Part, String> {
        PARTS
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown part name: {s:?}"))
    }
}

/// Centroid of a part in the body frame, for a body of full size `size`:
/// the center of the corresponding face, or the body center for the
/// interior.
pub fn part_centroid(part: Part, size: Vec3) -> Vec3 {
    scale(part.normal(), size[part.axis()] / 2.0)
}

/// Center offset of the space associated with a part: a box congruent to
/// the body, shifted one full extent along the part normal so that it sits
/// flush against that side. The interior's associated space is the body
/// volume itself.
pub fn assoc_space_offset(part: Part, size: Vec3) -> Vec3 {
    scale(part.normal(), size[part.axis()])
}

/// Pose of a part's associated space in the world, given the owner's pose
/// and full size. Orientation follows the owner.
pub fn assoc_space_pose(owner: &Pose, part: Part, size: Vec3) -> Pose {
    Pose::new(
        owner.transform_point(assoc_space_offset(part, size)),
        owner.rot,
    )
}

/// A grasp configuration: which part faces the palm and which parts the
/// two fingers close on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grasp {
    pub palm: Part,
    pub f1: Part,
    pub f2: Part,
}

impl fmt::Display for Grasp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.palm, self.f1, self.f2)
    }
}

/// All grasp configurations a parallel-jaw hand admits on a box: the palm
/// faces one of the six sides and the fingers close on an opposite pair
/// perpendicular to it. Finger order matters, so there are 6 * 2 * 2 = 24.
pub fn legal_grasps() -> Vec<Grasp> {
    let mut out = Vec::with_capacity(24);
    for palm in SIDES {
        for f1 in SIDES {
            if f1.axis() == palm.axis() {
                continue;
            }
            out.push(Grasp {
                palm,
                f1,
                f2: f1.opposite(),
            });
        }
    }
    out
}

/// Grasp configurations whose synthesized hand frame is anchored to a
/// fixed reference value rather than derived from the contact rule.
const ANCHORED_GRASPS: [(Part, Part, Part, Vec3); 2] = [
    (Part::Right, Part::Back, Part::Front, [-PI / 2.0, 0.0, 0.0]),
    (Part::Right, Part::Under, Part::On, [-PI, 0.0, -PI / 2.0]),
];

fn cmp_rpy(a: Vec3, b: Vec3) -> std::cmp::Ordering {
    let key = |w: Vec3| [w[2].abs(), w[2], w[1].abs(), w[1], w[0].abs(), w[0]];
    let (ka, kb) = (key(a), key(b));
    for i in 0..6 {
        let c = ka[i].total_cmp(&kb[i]);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

/// Hand orientation for a grasp, as roll-pitch-yaw of the hand frame in
/// the body frame. The hand z axis points against the palm-side normal and
/// the fingers close along the hand y axis; of the two frames satisfying
/// that, the one with the smaller yaw-pitch-roll magnitude (preferring the
/// negative sign on ties) is chosen. Two configurations carry anchored
/// reference values instead.
pub fn grasp_orientation(g: Grasp) -> Vec3 {
    for (p, f1, f2, w) in ANCHORED_GRASPS {
        if g == (Grasp { palm: p, f1, f2 }) {
            return w;
        }
    }
    let z = scale(g.palm.normal(), -1.0);
    let mut best: Option<Vec3> = None;
    for y in [g.f2.normal(), g.f1.normal()] {
        let x = crate::geom::cross(y, z);
        let w = Rot::from_cols(x, y, z).to_rpy_canonical();
        match best {
            Some(b) if cmp_rpy(w, b) != std::cmp::Ordering::Less => {}
            _ => best = Some(w),
        }
    }
    best.unwrap()
}

/// Pose of the hand in the body frame when holding the body with grasp
/// `g`: the hand origin sits at the palm-side centroid, oriented per
/// [`grasp_orientation`].
pub fn grasp_pose(g: Grasp, size: Vec3) -> Pose {
    Pose::from_rpy(part_centroid(g.palm, size), grasp_orientation(g))
}

/// Approach pose for a grasp: the grasp pose pushed out to three times the
/// palm-side centroid, still in the body frame.
pub fn pre_grasp_pose(g: Grasp, size: Vec3) -> Pose {
    Pose::from_rpy(
        scale(part_centroid(g.palm, size), 3.0),
        grasp_orientation(g),
    )
}

/// World pose of the hand holding a body at `body` with grasp `g`.
pub fn hand_pose_for_grasp(body: &Pose, g: Grasp, size: Vec3) -> Pose {
    body.compose(&grasp_pose(g, size))
}

/// World pose of a body held with grasp `g` by a hand at `hand`.
pub fn body_pose_from_hand(hand: &Pose, g: Grasp, size: Vec3) -> Pose {
    hand.compose(&grasp_pose(g, size).inverse())
}

/// All surface-to-surface placement configurations: any side of the placed
/// body against any side of the support. Interior placement is the single
/// extra configuration `(in, in)`.
pub fn surface_placements() -> Vec<(Part, Part)> {
    let mut out = Vec::with_capacity(36);
    for placed in SIDES {
        for support in SIDES {
            out.push((placed, support));
        }
    }
    out
}

fn placement_rot(placed: Part, support: Part) -> Rot {
    if placed == Part::In && support == Part::In {
        return Rot::identity();
    }
    crate::geom::rotation_between(placed.normal(), scale(support.normal(), -1.0))
}

/// Pose of the placed body in the support body's frame when its `placed`
/// part rests against the support's `support` part. The rotation is the
/// smallest one turning the placed side toward the support side; the
/// position stacks the two half-extents along the support normal.
/// `(in, in)` centers the body inside the support volume.
pub fn placement_pose(
    placed: Part,
    support: Part,
    placed_size: Vec3,
    support_size: Vec3,
) -> Pose {
    let rot = placement_rot(placed, support);
    if placed == Part::In && support == Part::In {
        return Pose::new([0.0; 3], rot);
    }
    let pos = add(
        part_centroid(support, support_size),
        scale(support.normal(), placed_size[placed.axis()] / 2.0),
    );
    Pose::new(pos, rot)
}

/// Approach pose for a placement: same orientation, with the position
/// pushed out to three times the support side's associated-space offset.
/// For `(in, in)` the offset is zero and the approach coincides with the
/// placement itself.
pub fn pre_placement_pose(
    placed: Part,
    support: Part,
    placed_size: Vec3,
    support_size: Vec3,
) -> Pose {
    let _ = placed_size;
    Pose::new(
        scale(assoc_space_offset(support, support_size), 3.0),
        placement_rot(placed, support),
    )
}

/// Which side of the placed body ends up facing the same way as the
/// support's `support_base` side after placing `placed` against
/// `support_side`. The placement rotation is a signed axis permutation, so
/// exactly one side qualifies.
pub fn base_after_place(support_base: Part, support_side: Part, placed_side: Part) -> Part {
    let rot = placement_rot(placed_side, support_side);
    let target = support_base.normal();
    for c in SIDES {
        if crate::geom::norm(sub(rot.apply(c.normal()), target)) < 1e-9 {
            return c;
        }
    }
    unreachable!("placement rotation must map some side onto the base direction");
}
