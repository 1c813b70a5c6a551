//! Schema grounding by delete-relaxation reachability.
//!
//! Starting from the initial state, every binding whose positive
//! preconditions are reachable is instantiated and its add effects are fed
//! back in, until a fixpoint. Negative preconditions are restricted to
//! static predicates and evaluated exactly, so ignoring deletes is sound:
//! the result is a superset of the actions applicable on any forward
//! trajectory, and grounding a larger initial state never yields fewer
//! actions.
//!
//! One structural rule narrows the closure: parameters typed `phys` bind
//! pairwise-distinct objects within a single action. A solid cannot serve
//! as its own support and a space cannot be its own neighbor, but the
//! relaxed state loses the delete effects that would rule such bindings
//! out, so the rule is enforced here.

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use super::domains::{part_rank, Domain, Lit, Schema, Term, Ty};
use super::{GroundAction, GroundAtom, SymbolicState};

/// A planning problem over some domain's predicates and schemas. `init`
/// carries fluents and static facts alike.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub objects: Vec<(String, Ty)>,
    pub init: SymbolicState,
    pub goal: BTreeSet<GroundAtom>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("predicate {pred} expects {expected} arguments, got {got}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown symbol {name}")]
    UnknownSymbol { name: String },
}

type Binding = BTreeMap<String, String>;

/// Grounds every schema of `domain` against `problem`, returning the
/// reachable actions sorted by name and arguments.
pub fn ground(domain: &Domain, problem: &Problem) -> Result<Vec<GroundAction>, GroundError> {
    let mut symbols: BTreeMap<String, Ty> = BTreeMap::new();
    for (n, t) in &domain.constants {
        symbols.insert(n.clone(), *t);
    }
    for (n, t) in &problem.objects {
        symbols.insert(n.clone(), *t);
    }
    for atom in problem.init.iter().chain(problem.goal.iter()) {
        let decl = domain
            .predicate(&atom.pred)
            .ok_or_else(|| GroundError::UnknownSymbol {
                name: atom.pred.clone(),
            })?;
        if decl.arg_types.len() != atom.args.len() {
            return Err(GroundError::ArityMismatch {
                pred: atom.pred.clone(),
                expected: decl.arg_types.len(),
                got: atom.args.len(),
            });
        }
        for a in &atom.args {
            if !symbols.contains_key(a) {
                return Err(GroundError::UnknownSymbol { name: a.clone() });
            }
        }
    }

    let mut reached = problem.init.clone();
    let mut actions: BTreeMap<(String, Vec<String>), GroundAction> = BTreeMap::new();
    loop {
        let index = build_index(&reached);
        let mut pending: Vec<GroundAtom> = Vec::new();
        for schema in &domain.schemas {
            for binding in bind_schema(schema, &reached, &index, &symbols) {
                let action = instantiate(schema, &binding);
                let key = (action.name.clone(), action.args.clone());
                if !actions.contains_key(&key) {
                    pending.extend(action.add.iter().cloned());
                    actions.insert(key, action);
                }
            }
        }
        let before = reached.len();
        reached.extend(pending);
        if reached.len() == before {
            break;
        }
    }
    Ok(actions.into_values().collect())
}

fn build_index(state: &SymbolicState) -> BTreeMap<&str, Vec<&GroundAtom>> {
    let mut index: BTreeMap<&str, Vec<&GroundAtom>> = BTreeMap::new();
    for atom in state {
        index.entry(atom.pred.as_str()).or_default().push(atom);
    }
    index
}

fn bind_schema(
    schema: &Schema,
    reached: &SymbolicState,
    index: &BTreeMap<&str, Vec<&GroundAtom>>,
    symbols: &BTreeMap<String, Ty>,
) -> Vec<Binding> {
    let mut out = Vec::new();
    let literals: Vec<&Lit> = schema.pre_pos.iter().collect();
    let mut binding = Binding::new();
    join(
        schema, &literals, &mut binding, reached, index, symbols, &mut out,
    );
    out
}

/// Backtracking join over the positive preconditions, always expanding the
/// literal with the fewest matching atoms. Parameters that no positive
/// literal mentions are enumerated by type afterwards. Negative literals
/// and ordered groups prune each partial binding as soon as they are fully
/// bound.
fn join(
    schema: &Schema,
    remaining: &[&Lit],
    binding: &mut Binding,
    reached: &SymbolicState,
    index: &BTreeMap<&str, Vec<&GroundAtom>>,
    symbols: &BTreeMap<String, Ty>,
    out: &mut Vec<Binding>,
) {
    if remaining.is_empty() {
        if let Some((param, ty)) = schema
            .params
            .iter()
            .find(|(p, _)| !binding.contains_key(p))
        {
            for (name, t) in symbols {
                if !ty.accepts(*t) {
                    continue;
                }
                binding.insert(param.clone(), name.clone());
                if guards_hold(schema, binding, reached) {
                    join(schema, remaining, binding, reached, index, symbols, out);
                }
                binding.remove(param);
            }
            return;
        }
        out.push(binding.clone());
        return;
    }

    let empty = Vec::new();
    let (best, _) = remaining
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let n = index
                .get(l.pred.as_str())
                .unwrap_or(&empty)
                .iter()
                .filter(|a| matches(l, a, binding, schema, symbols).is_some())
                .count();
            (i, n)
        })
        .min_by_key(|&(_, n)| n)
        .unwrap();

    let lit = remaining[best];
    let rest: Vec<&Lit> = remaining
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, l)| *l)
        .collect();
    let atoms = index.get(lit.pred.as_str()).unwrap_or(&empty).clone();
    for atom in atoms {
        if let Some(new_vars) = matches(lit, atom, binding, schema, symbols) {
            for (k, v) in &new_vars {
                binding.insert(k.clone(), v.clone());
            }
            if guards_hold(schema, binding, reached) {
                join(schema, &rest, binding, reached, index, symbols, out);
            }
            for (k, _) in &new_vars {
                binding.remove(k);
            }
        }
    }
}

/// Checks `lit` against `atom` under `binding`; on success returns the
/// variables the match would newly bind.
fn matches(
    lit: &Lit,
    atom: &GroundAtom,
    binding: &Binding,
    schema: &Schema,
    symbols: &BTreeMap<String, Ty>,
) -> Option<Vec<(String, String)>> {
    let mut new_vars: Vec<(String, String)> = Vec::new();
    for (term, actual) in lit.args.iter().zip(&atom.args) {
        match term {
            Term::Const(c) => {
                if c != actual {
                    return None;
                }
            }
            Term::Var(v) => {
                if let Some(bound) = binding.get(v) {
                    if bound != actual {
                        return None;
                    }
                } else if let Some((_, prior)) = new_vars.iter().find(|(n, _)| n == v) {
                    if prior != actual {
                        return None;
                    }
                } else {
                    let ty = schema
                        .params
                        .iter()
                        .find(|(p, _)| p == v)
                        .map(|(_, t)| *t)
                        .unwrap_or(Ty::Object);
                    let actual_ty = symbols.get(actual)?;
                    if !ty.accepts(*actual_ty) {
                        return None;
                    }
                    new_vars.push((v.clone(), actual.clone()));
                }
            }
        }
    }
    Some(new_vars)
}

/// Evaluates every negative literal and ordered-group constraint that is
/// fully bound under `binding`, plus pairwise distinctness of bound
/// phys-typed parameters. Negative literals range over static predicates,
/// so checking them against the reachable set is exact.
fn guards_hold(schema: &Schema, binding: &Binding, reached: &SymbolicState) -> bool {
    let phys: Vec<&String> = schema
        .params
        .iter()
        .filter(|(_, t)| *t == Ty::Phys)
        .filter_map(|(p, _)| binding.get(p))
        .collect();
    for (i, a) in phys.iter().enumerate() {
        if phys[i + 1..].contains(a) {
            return false;
        }
    }
    'neg: for lit in &schema.pre_neg {
        let mut args = Vec::with_capacity(lit.args.len());
        for term in &lit.args {
            match term {
                Term::Const(c) => args.push(c.clone()),
                Term::Var(v) => match binding.get(v) {
                    Some(b) => args.push(b.clone()),
                    None => continue 'neg,
                },
            }
        }
        if reached.contains(&GroundAtom {
            pred: lit.pred.clone(),
            args,
        }) {
            return false;
        }
    }
    for group in &schema.ordered_groups {
        for pair in group.windows(2) {
            if let (Some(a), Some(b)) = (binding.get(&pair[0]), binding.get(&pair[1])) {
                match (part_rank(a), part_rank(b)) {
                    (Some(ra), Some(rb)) if ra < rb => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

fn subst(lit: &Lit, binding: &Binding) -> GroundAtom {
    GroundAtom {
        pred: lit.pred.clone(),
        args: lit
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => binding[v].clone(),
            })
            .collect(),
    }
}

fn instantiate(schema: &Schema, binding: &Binding) -> GroundAction {
    GroundAction {
        name: schema.name.clone(),
        args: schema.params.iter().map(|(p, _)| binding[p].clone()).collect(),
        pre_pos: schema.pre_pos.iter().map(|l| subst(l, binding)).collect(),
        pre_neg: schema.pre_neg.iter().map(|l| subst(l, binding)).collect(),
        add: schema.add.iter().map(|l| subst(l, binding)).collect(),
        del: schema.del.iter().map(|l| subst(l, binding)).collect(),
    }
}
