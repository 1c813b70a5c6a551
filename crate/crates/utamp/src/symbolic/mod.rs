//! STRIPS-subset planning model: ground atoms, states, ground actions,
//! plan validation, action schemas with grounding, and PDDL-subset text
//! import/export.
//!
//! States are closed-world sets of ground atoms. Predicates split into
//! fluents (`oc`, `base`, `force`, plus scenario status atoms) and statics
//! (`isgrasp`, `isopposite`, `isequal`, `base2base`) that no action ever
//! changes; negative preconditions are restricted to statics, everything
//! else is expressed through positive `air` occupancy.

pub mod domains;
pub mod ground;
pub mod pddl;

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// A predicate applied to constant arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom {
            pred: pred.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A closed-world symbolic state.
pub type SymbolicState = BTreeSet<GroundAtom>;

/// A fully bound action instance, carrying its own precondition and effect
/// sets so it can be applied without consulting the schema again.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<GroundAtom>,
    pub pre_neg: Vec<GroundAtom>,
    pub add: Vec<GroundAtom>,
    pub del: Vec<GroundAtom>,
}

impl GroundAction {
    /// Printable identity, e.g. `(pick-space bgreen1 sgreen1 front left right ...)`.
    pub fn id(&self) -> String {
        format!("({} {})", self.name, self.args.join(" "))
    }

    /// First unsatisfied precondition in `s`, if any: a missing positive
    /// atom or a present negated one.
    pub fn first_failure(&self, s: &SymbolicState) -> Option<GroundAtom> {
        for p in &self.pre_pos {
            if !s.contains(p) {
                return Some(p.clone());
            }
        }
        for n in &self.pre_neg {
            if s.contains(n) {
                return Some(n.clone());
            }
        }
        None
    }

    pub fn applicable(&self, s: &SymbolicState) -> bool {
        self.pre_pos.iter().all(|p| s.contains(p)) && self.pre_neg.iter().all(|n| !s.contains(n))
    }

    /// `(s - deletes) + adds`. Callers check applicability first.
    pub fn apply(&self, s: &SymbolicState) -> SymbolicState {
        let mut out = s.clone();
        for d in &self.del {
            out.remove(d);
        }
        for a in &self.add {
            out.insert(a.clone());
        }
        out
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("step {step} {action}: precondition {atom} violated")]
    NotApplicable {
        step: usize,
        action: String,
        atom: String,
    },
    #[error("goal atom {atom} unsatisfied after plan")]
    GoalUnsatisfied { atom: String },
}

/// Replays `plan` from `init` and checks `goal` in the final state.
/// Returns the final state, or the first violated precondition / unmet
/// goal atom.
pub fn validate(
    init: &SymbolicState,
    plan: &[GroundAction],
    goal: &BTreeSet<GroundAtom>,
) -> Result<SymbolicState, PlanError> {
    let mut s = init.clone();
    for (i, a) in plan.iter().enumerate() {
        if let Some(atom) = a.first_failure(&s) {
            return Err(PlanError::NotApplicable {
                step: i,
                action: a.id(),
                atom: atom.to_string(),
            });
        }
        s = a.apply(&s);
    }
    for g in goal {
        if !s.contains(g) {
            return Err(PlanError::GoalUnsatisfied {
                atom: g.to_string(),
            });
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom::new(pred, args)
    }

    fn toy_action() -> GroundAction {
        GroundAction {
            name: "move".into(),
            args: vec!["a".into(), "b".into()],
            pre_pos: vec![atom("at", &["a"])],
            pre_neg: vec![atom("blocked", &["b"])],
            add: vec![atom("at", &["b"])],
            del: vec![atom("at", &["a"])],
        }
    }

    #[test]
    fn apply_moves_atoms() {
        let s: SymbolicState = [atom("at", &["a"])].into_iter().collect();
        let a = toy_action();
        assert!(a.applicable(&s));
        let t = a.apply(&s);
        assert!(t.contains(&atom("at", &["b"])));
        assert!(!t.contains(&atom("at", &["a"])));
    }

    #[test]
    fn negative_precondition_blocks() {
        let s: SymbolicState = [atom("at", &["a"]), atom("blocked", &["b"])]
            .into_iter()
            .collect();
        let a = toy_action();
        assert!(!a.applicable(&s));
        assert_eq!(a.first_failure(&s), Some(atom("blocked", &["b"])));
    }

    #[test]
    fn validate_empty_plan() {
        let s: SymbolicState = [atom("at", &["a"])].into_iter().collect();
        let goal: BTreeSet<_> = [atom("at", &["a"])].into_iter().collect();
        assert!(validate(&s, &[], &goal).is_ok());
        let goal: BTreeSet<_> = [atom("at", &["b"])].into_iter().collect();
        assert_eq!(
            validate(&s, &[], &goal),
            Err(PlanError::GoalUnsatisfied {
                atom: "(at b)".into()
            })
        );
    }

    #[test]
    fn validate_reports_step() {
        let s: SymbolicState = [atom("at", &["a"])].into_iter().collect();
        let a = toy_action();
        let goal: BTreeSet<_> = [atom("at", &["a"])].into_iter().collect();
        let err = validate(&s, &[a.clone(), a.clone()], &goal).unwrap_err();
        assert_eq!(
            err,
            PlanError::NotApplicable {
                step: 1,
                action: "(move a b)".into(),
                atom: "(at a)".into(),
            }
        );
    }

    #[test]
    fn atom_display() {
        assert_eq!(atom("oc", &["on", "b1", "air"]).to_string(), "(oc on b1 air)");
    }
}
