//! Built-in manipulation schemas and the static relation tables they
//! consult.
//!
//! Two action families cover the two support styles. `pick`/`place` move a
//! solid resting on another solid through a mutual side-contact pair;
//! `pick-space`/`place-space` move a solid in and out of a cuboid space and
//! additionally demand that the palm- and both finger-side neighbor spaces
//! of that space are empty, since the hand sweeps through them. All four
//! demand a legal grasp, an empty or matching hand, and an approach that is
//! not opposite the robot-facing `base` side.

use crate::abstraction::{base_after_place, legal_grasps, Grasp, Part, PARTS, SIDES};
use crate::symbolic::GroundAtom;

/// Parameter and constant types. `phys` and `part` specialize `object`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ty {
    Object,
    Phys,
    Part,
}

impl Ty {
    pub fn name(self) -> &'static str {
        match self {
            Ty::Object => "object",
            Ty::Phys => "phys",
            Ty::Part => "part",
        }
    }

    /// Whether a parameter of type `self` accepts a constant of type `other`.
    pub fn accepts(self, other: Ty) -> bool {
        self == Ty::Object || self == other
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

/// A predicate over variables and constants, as used inside a schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lit {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug)]
pub struct PredDecl {
    pub name: String,
    pub arg_types: Vec<Ty>,
    /// Static predicates are never added or deleted by any action.
    pub is_static: bool,
}

#[derive(Clone, Debug)]
pub struct Schema {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub pre_pos: Vec<Lit>,
    pub pre_neg: Vec<Lit>,
    pub add: Vec<Lit>,
    pub del: Vec<Lit>,
    /// Groups of part-typed parameters whose bindings must be strictly
    /// increasing in the canonical part order. The free-side triple of a
    /// space action is symmetric under permutation; the ordering collapses
    /// each unordered triple to a single ground action.
    pub ordered_groups: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub predicates: Vec<PredDecl>,
    pub constants: Vec<(String, Ty)>,
    pub schemas: Vec<Schema>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&PredDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn is_static(&self, pred: &str) -> bool {
        self.predicate(pred).map(|p| p.is_static).unwrap_or(false)
    }

    /// Structural checks: every literal variable is a declared parameter,
    /// every literal predicate is declared with matching arity, and no
    /// action effect touches a static predicate.
    pub fn check(&self) -> Result<(), String> {
        for s in &self.schemas {
            let lists = [
                (&s.pre_pos, false),
                (&s.pre_neg, false),
                (&s.add, true),
                (&s.del, true),
            ];
            for (list, is_effect) in lists {
                for l in list.iter() {
                    let d = self
                        .predicate(&l.pred)
                        .ok_or_else(|| format!("{}: undeclared predicate {}", s.name, l.pred))?;
                    if d.arg_types.len() != l.args.len() {
                        return Err(format!("{}: arity of {}", s.name, l.pred));
                    }
                    if is_effect && d.is_static {
                        return Err(format!("{}: effect on static {}", s.name, l.pred));
                    }
                    for a in &l.args {
                        if let Term::Var(v) = a {
                            if !s.params.iter().any(|(p, _)| p == v) {
                                return Err(format!("{}: unbound variable ?{v}", s.name));
                            }
                        }
                    }
                }
            }
            for g in &s.ordered_groups {
                for v in g {
                    if !s.params.iter().any(|(p, _)| p == v) {
                        return Err(format!("{}: ordered group names unknown ?{v}", s.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which schema family a built-in domain carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// `pick`/`place` only: solids resting on solids.
    Support,
    /// `pick-space`/`place-space` only: solids held in spaces.
    Container,
    /// All four schemas.
    Hybrid,
}

fn v(n: &str) -> Term {
    Term::Var(n.to_string())
}

fn k(n: &str) -> Term {
    Term::Const(n.to_string())
}

fn lit(pred: &str, args: Vec<Term>) -> Lit {
    Lit {
        pred: pred.to_string(),
        args,
    }
}

fn pick_schema() -> Schema {
    let params = [
        ("o1", Ty::Phys),
        ("o2", Ty::Phys),
        ("p", Ty::Part),
        ("f1", Ty::Part),
        ("f2", Ty::Part),
        ("o1-o2", Ty::Part),
        ("o2-o1", Ty::Part),
        ("o1-base", Ty::Part),
        ("o1-force", Ty::Part),
    ];
    Schema {
        name: "pick".into(),
        params: params.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
        pre_pos: vec![
            lit("isgrasp", vec![v("p"), v("f1"), v("f2")]),
            lit("oc", vec![k("in"), k("hand"), k("air")]),
            lit("oc", vec![v("p"), v("o1"), k("air")]),
            lit("oc", vec![v("f1"), v("o1"), k("air")]),
            lit("oc", vec![v("f2"), v("o1"), k("air")]),
            lit("oc", vec![v("o1-o2"), v("o1"), v("o2")]),
            lit("oc", vec![v("o2-o1"), v("o2"), v("o1")]),
            lit("force", vec![v("o2"), v("o2-o1")]),
            lit("force", vec![v("o1"), v("o1-force")]),
            lit("oc", vec![v("o1-force"), v("o1"), k("air")]),
            lit("base", vec![v("o1"), v("o1-base")]),
        ],
        pre_neg: vec![lit("isopposite", vec![v("o1-base"), v("p")])],
        add: vec![
            lit("oc", vec![k("in"), k("hand"), v("o1")]),
            lit("oc", vec![v("p"), v("o1"), k("hand")]),
            lit("oc", vec![v("f1"), v("o1"), k("hand")]),
            lit("oc", vec![v("f2"), v("o1"), k("hand")]),
            lit("oc", vec![v("o2-o1"), v("o2"), k("air")]),
            // A held solid keeps a full complement of side atoms; the face
            // it rested on becomes free the moment it leaves the support.
            lit("oc", vec![v("o1-o2"), v("o1"), k("air")]),
        ],
        del: vec![
            lit("oc", vec![k("in"), k("hand"), k("air")]),
            lit("oc", vec![v("p"), v("o1"), k("air")]),
            lit("oc", vec![v("f1"), v("o1"), k("air")]),
            lit("oc", vec![v("f2"), v("o1"), k("air")]),
            lit("oc", vec![v("o1-o2"), v("o1"), v("o2")]),
            lit("oc", vec![v("o2-o1"), v("o2"), v("o1")]),
            lit("force", vec![v("o1"), v("o1-force")]),
            lit("base", vec![v("o1"), v("o1-base")]),
        ],
        ordered_groups: vec![],
    }
}

fn place_schema() -> Schema {
    let params = [
        ("o1", Ty::Phys),
        ("o2", Ty::Phys),
        ("p", Ty::Part),
        ("f1", Ty::Part),
        ("f2", Ty::Part),
        ("o1-o2", Ty::Part),
        ("o2-o1", Ty::Part),
        ("o2-base", Ty::Part),
        ("o1-base", Ty::Part),
        ("o1-force", Ty::Part),
    ];
    Schema {
        name: "place".into(),
        params: params.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
        pre_pos: vec![
            lit("isgrasp", vec![v("p"), v("f1"), v("f2")]),
            lit("oc", vec![k("in"), k("hand"), v("o1")]),
            lit("oc", vec![v("p"), v("o1"), k("hand")]),
            lit("oc", vec![v("f1"), v("o1"), k("hand")]),
            lit("oc", vec![v("f2"), v("o1"), k("hand")]),
            lit("oc", vec![v("o1-o2"), v("o1"), k("air")]),
            lit("oc", vec![v("o2-o1"), v("o2"), k("air")]),
            lit("force", vec![v("o2"), v("o2-o1")]),
            lit("base", vec![v("o2"), v("o2-base")]),
            lit("isopposite", vec![v("o1-force"), v("o1-o2")]),
            lit(
                "base2base",
                vec![v("o2-base"), v("o2-o1"), v("o1-o2"), v("o1-base")],
            ),
        ],
        pre_neg: vec![lit("isopposite", vec![v("o1-base"), v("p")])],
        add: vec![
            lit("oc", vec![v("o1-o2"), v("o1"), v("o2")]),
            lit("oc", vec![v("o2-o1"), v("o2"), v("o1")]),
            lit("oc", vec![k("in"), k("hand"), k("air")]),
            lit("oc", vec![v("p"), v("o1"), k("air")]),
            lit("oc", vec![v("f1"), v("o1"), k("air")]),
            lit("oc", vec![v("f2"), v("o1"), k("air")]),
            lit("force", vec![v("o1"), v("o1-force")]),
            lit("base", vec![v("o1"), v("o1-base")]),
        ],
        del: vec![
            lit("oc", vec![k("in"), k("hand"), v("o1")]),
            lit("oc", vec![v("p"), v("o1"), k("hand")]),
            lit("oc", vec![v("f1"), v("o1"), k("hand")]),
            lit("oc", vec![v("f2"), v("o1"), k("hand")]),
            lit("oc", vec![v("o2-o1"), v("o2"), k("air")]),
            lit("oc", vec![v("o1-o2"), v("o1"), k("air")]),
        ],
        ordered_groups: vec![],
    }
}

fn space_params() -> Vec<(String, Ty)> {
    [
        ("o1", Ty::Phys),
        ("o2", Ty::Phys),
        ("p", Ty::Part),
        ("f1", Ty::Part),
        ("f2", Ty::Part),
        ("o2-h-p", Ty::Phys),
        ("o2-h-f1", Ty::Phys),
        ("o2-h-f2", Ty::Phys),
        ("o2-base", Ty::Part),
        ("o1-bb1", Ty::Part),
        ("o1-bb2", Ty::Part),
        ("o1-bb3", Ty::Part),
    ]
    .iter()
    .map(|(n, t)| (n.to_string(), *t))
    .collect()
}

/// Neighbor-space clearance around the acted-on space: the palm-side and
/// both finger-side neighbors must exist and be empty.
fn neighbor_clearance() -> Vec<Lit> {
    vec![
        lit("oc", vec![v("p"), v("o2"), v("o2-h-p")]),
        lit("oc", vec![v("f1"), v("o2"), v("o2-h-f1")]),
        lit("oc", vec![v("f2"), v("o2"), v("o2-h-f2")]),
        lit("oc", vec![k("in"), v("o2-h-p"), k("air")]),
        lit("oc", vec![k("in"), v("o2-h-f1"), k("air")]),
        lit("oc", vec![k("in"), v("o2-h-f2"), k("air")]),
    ]
}

/// The free-side triple must be three distinct sides disjoint from the
/// hand-contact sides.
fn free_side_guards() -> Vec<Lit> {
    let mut out = Vec::new();
    for bb in ["o1-bb1", "o1-bb2", "o1-bb3"] {
        for other in ["p", "f1", "f2"] {
            out.push(lit("isequal", vec![v(bb), v(other)]));
        }
        out.push(lit("isequal", vec![v(bb), k("in")]));
    }
    out.push(lit("isequal", vec![v("o1-bb1"), v("o1-bb2")]));
    out.push(lit("isequal", vec![v("o1-bb1"), v("o1-bb3")]));
    out.push(lit("isequal", vec![v("o1-bb2"), v("o1-bb3")]));
    out
}

fn pick_space_schema() -> Schema {
    let mut pre_pos = vec![
        lit("isgrasp", vec![v("p"), v("f1"), v("f2")]),
        lit("oc", vec![k("in"), k("hand"), k("air")]),
        lit("oc", vec![k("in"), v("o2"), v("o1")]),
        lit("force", vec![v("o2"), k("in")]),
        lit("base", vec![v("o2"), v("o2-base")]),
    ];
    pre_pos.extend(neighbor_clearance());
    let mut pre_neg = vec![lit("isopposite", vec![v("o2-base"), v("p")])];
    pre_neg.extend(free_side_guards());
    Schema {
        name: "pick-space".into(),
        params: space_params(),
        pre_pos,
        pre_neg,
        add: vec![
            lit("oc", vec![k("in"), k("hand"), v("o1")]),
            lit("oc", vec![v("p"), v("o1"), k("hand")]),
            lit("oc", vec![v("f1"), v("o1"), k("hand")]),
            lit("oc", vec![v("f2"), v("o1"), k("hand")]),
            lit("oc", vec![v("o1-bb1"), v("o1"), k("air")]),
            lit("oc", vec![v("o1-bb2"), v("o1"), k("air")]),
            lit("oc", vec![v("o1-bb3"), v("o1"), k("air")]),
            lit("oc", vec![k("in"), v("o2"), k("air")]),
        ],
        del: vec![
            lit("oc", vec![k("in"), k("hand"), k("air")]),
            lit("oc", vec![k("in"), v("o2"), v("o1")]),
        ],
        ordered_groups: vec![vec![
            "o1-bb1".into(),
            "o1-bb2".into(),
            "o1-bb3".into(),
        ]],
    }
}

fn place_space_schema() -> Schema {
    let mut pre_pos = vec![
        lit("isgrasp", vec![v("p"), v("f1"), v("f2")]),
        lit("oc", vec![k("in"), k("hand"), v("o1")]),
        lit("oc", vec![v("p"), v("o1"), k("hand")]),
        lit("oc", vec![v("f1"), v("o1"), k("hand")]),
        lit("oc", vec![v("f2"), v("o1"), k("hand")]),
        lit("oc", vec![v("o1-bb1"), v("o1"), k("air")]),
        lit("oc", vec![v("o1-bb2"), v("o1"), k("air")]),
        lit("oc", vec![v("o1-bb3"), v("o1"), k("air")]),
        lit("oc", vec![k("in"), v("o2"), k("air")]),
        lit("force", vec![v("o2"), k("in")]),
        lit("base", vec![v("o2"), v("o2-base")]),
    ];
    pre_pos.extend(neighbor_clearance());
    let mut pre_neg = vec![lit("isopposite", vec![v("o2-base"), v("p")])];
    pre_neg.extend(free_side_guards());
    Schema {
        name: "place-space".into(),
        params: space_params(),
        pre_pos,
        pre_neg,
        add: vec![
            lit("oc", vec![k("in"), v("o2"), v("o1")]),
            lit("oc", vec![k("in"), k("hand"), k("air")]),
        ],
        del: vec![
            lit("oc", vec![k("in"), k("hand"), v("o1")]),
            lit("oc", vec![v("p"), v("o1"), k("hand")]),
            lit("oc", vec![v("f1"), v("o1"), k("hand")]),
            lit("oc", vec![v("f2"), v("o1"), k("hand")]),
            lit("oc", vec![v("o1-bb1"), v("o1"), k("air")]),
            lit("oc", vec![v("o1-bb2"), v("o1"), k("air")]),
            lit("oc", vec![v("o1-bb3"), v("o1"), k("air")]),
            lit("oc", vec![k("in"), v("o2"), k("air")]),
        ],
        ordered_groups: vec![vec![
            "o1-bb1".into(),
            "o1-bb2".into(),
            "o1-bb3".into(),
        ]],
    }
}

/// All relation facts that never change: the grasp table (restricted to
/// `grasps`), side opposition, part identity, and the 216-entry table
/// mapping a support's base side and a contact pair to the placed solid's
/// base side.
pub fn static_facts(grasps: &[Grasp]) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for g in grasps {
        out.push(GroundAtom::new(
            "isgrasp",
            &[g.palm.name(), g.f1.name(), g.f2.name()],
        ));
    }
    for s in SIDES {
        out.push(GroundAtom::new(
            "isopposite",
            &[s.name(), s.opposite().name()],
        ));
    }
    for p in PARTS {
        out.push(GroundAtom::new("isequal", &[p.name(), p.name()]));
    }
    for b2 in SIDES {
        for s21 in SIDES {
            for s12 in SIDES {
                let b1 = base_after_place(b2, s21, s12);
                out.push(GroundAtom::new(
                    "base2base",
                    &[b2.name(), s21.name(), s12.name(), b1.name()],
                ));
            }
        }
    }
    out
}

/// Builds one of the built-in domains together with its static facts.
/// `whitelist` restricts the grasp table; `None` admits all 24 legal
/// grasps.
pub fn builtin_domain(kind: DomainKind, whitelist: Option<&[Grasp]>) -> (Domain, Vec<GroundAtom>) {
    let (name, schemas) = match kind {
        DomainKind::Support => ("utamp-support", vec![pick_schema(), place_schema()]),
        DomainKind::Container => (
            "utamp-container",
            vec![pick_space_schema(), place_space_schema()],
        ),
        DomainKind::Hybrid => (
            "utamp-hybrid",
            vec![
                pick_schema(),
                place_schema(),
                pick_space_schema(),
                place_space_schema(),
            ],
        ),
    };
    let mut constants: Vec<(String, Ty)> = PARTS
        .iter()
        .map(|p| (p.name().to_string(), Ty::Part))
        .collect();
    constants.push(("air".into(), Ty::Object));
    constants.push(("hand".into(), Ty::Object));
    let predicates = vec![
        PredDecl {
            name: "oc".into(),
            arg_types: vec![Ty::Part, Ty::Object, Ty::Object],
            is_static: false,
        },
        PredDecl {
            name: "base".into(),
            arg_types: vec![Ty::Phys, Ty::Part],
            is_static: false,
        },
        PredDecl {
            name: "force".into(),
            arg_types: vec![Ty::Phys, Ty::Part],
            is_static: false,
        },
        PredDecl {
            name: "isgrasp".into(),
            arg_types: vec![Ty::Part, Ty::Part, Ty::Part],
            is_static: true,
        },
        PredDecl {
            name: "isopposite".into(),
            arg_types: vec![Ty::Part, Ty::Part],
            is_static: true,
        },
        PredDecl {
            name: "isequal".into(),
            arg_types: vec![Ty::Part, Ty::Part],
            is_static: true,
        },
        PredDecl {
            name: "base2base".into(),
            arg_types: vec![Ty::Part, Ty::Part, Ty::Part, Ty::Part],
            is_static: true,
        },
    ];
    let domain = Domain {
        name: name.into(),
        predicates,
        constants,
        schemas,
    };
    debug_assert!(domain.check().is_ok(), "{:?}", domain.check());
    let all;
    let grasps = match whitelist {
        Some(w) => w,
        None => {
            all = legal_grasps();
            &all
        }
    };
    let statics = static_facts(grasps);
    (domain, statics)
}

/// Canonical rank of a part name for ordered-group checks.
pub fn part_rank(name: &str) -> Option<usize> {
    PARTS.iter().position(|p| p.name() == name)
}

/// Parses a part name back into the enum, for schema-aware consumers.
pub fn part_of_name(name: &str) -> Option<Part> {
    PARTS.iter().copied().find(|p| p.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_families() {
        let (d, _) = builtin_domain(DomainKind::Support, None);
        assert_eq!(
            d.schemas.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
            ["pick", "place"]
        );
        let (d, _) = builtin_domain(DomainKind::Container, None);
        assert_eq!(
            d.schemas.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
            ["pick-space", "place-space"]
        );
        let (d, _) = builtin_domain(DomainKind::Hybrid, None);
        assert_eq!(d.schemas.len(), 4);
        assert!(d.check().is_ok());
    }

    #[test]
    fn parameter_names_are_published_interface() {
        let (d, _) = builtin_domain(DomainKind::Hybrid, None);
        let names = |n: &str| {
            d.schemas
                .iter()
                .find(|s| s.name == n)
                .unwrap()
                .params
                .iter()
                .map(|(p, _)| p.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(
            names("pick"),
            ["o1", "o2", "p", "f1", "f2", "o1-o2", "o2-o1", "o1-base", "o1-force"]
        );
        assert_eq!(
            names("place"),
            ["o1", "o2", "p", "f1", "f2", "o1-o2", "o2-o1", "o2-base", "o1-base", "o1-force"]
        );
        let space = [
            "o1", "o2", "p", "f1", "f2", "o2-h-p", "o2-h-f1", "o2-h-f2", "o2-base", "o1-bb1",
            "o1-bb2", "o1-bb3",
        ];
        assert_eq!(names("pick-space"), space);
        assert_eq!(names("place-space"), space);
    }

    #[test]
    fn static_fact_counts() {
        let facts = static_facts(&legal_grasps());
        assert_eq!(facts.len(), 24 + 6 + 7 + 216);
        assert_eq!(facts.iter().filter(|a| a.pred == "base2base").count(), 216);
        assert!(facts.contains(&GroundAtom::new("isopposite", &["on", "under"])));
        assert!(facts.contains(&GroundAtom::new("isequal", &["in", "in"])));
    }

    #[test]
    fn whitelist_restricts_grasp_table() {
        let w = [Grasp {
            palm: Part::Front,
            f1: Part::Left,
            f2: Part::Right,
        }];
        let (_, statics) = builtin_domain(DomainKind::Hybrid, Some(&w));
        let grasps: Vec<_> = statics.iter().filter(|a| a.pred == "isgrasp").collect();
        assert_eq!(grasps.len(), 1);
        assert_eq!(grasps[0].args, ["front", "left", "right"]);
    }

    #[test]
    fn effects_never_touch_statics() {
        let (d, _) = builtin_domain(DomainKind::Hybrid, None);
        for s in &d.schemas {
            for l in s.add.iter().chain(&s.del) {
                assert!(!d.is_static(&l.pred), "{} edits {}", s.name, l.pred);
            }
        }
    }

    #[test]
    fn pick_and_place_are_structural_mirrors() {
        let (d, _) = builtin_domain(DomainKind::Support, None);
        let pick = &d.schemas[0];
        let place = &d.schemas[1];
        let holds = lit("oc", vec![k("in"), k("hand"), v("o1")]);
        assert!(pick.add.contains(&holds));
        assert!(place.del.contains(&holds));
        let free = lit("oc", vec![k("in"), k("hand"), k("air")]);
        assert!(pick.del.contains(&free));
        assert!(place.add.contains(&free));
    }

    #[test]
    fn part_rank_follows_canonical_order() {
        assert_eq!(part_rank("on"), Some(0));
        assert_eq!(part_rank("in"), Some(6));
        assert_eq!(part_rank("air"), None);
        assert_eq!(part_of_name("front"), Some(Part::Front));
    }
}
