//! Reader and writer for the PDDL subset the built-in domains inhabit:
//! STRIPS with typing and negative preconditions, conjunctive goals, and
//! plan files with one parenthesized action per line.
//!
//! The writer is a pure function of the domain and problem structures, so
//! exporting, parsing the text back, and exporting again reproduces the
//! first export byte for byte. Grounding hints that PDDL cannot express
//! (ordered parameter groups) are dropped on export.

use std::collections::BTreeSet;

use thiserror::Error;

use super::domains::{Domain, Lit, PredDecl, Schema, Term, Ty};
use super::ground::Problem;
use super::{GroundAction, GroundAtom, SymbolicState};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

fn err(line: usize, col: usize, expected: &str, found: &str) -> ParseError {
    ParseError {
        line,
        col,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

#[derive(Clone, Debug)]
enum Sexp {
    Sym {
        s: String,
        line: usize,
        col: usize,
    },
    List {
        items: Vec<Sexp>,
        line: usize,
        col: usize,
    },
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Sym { line, col, .. } | Sexp::List { line, col, .. } => (*line, *col),
        }
    }

    fn sym(&self) -> Result<&str, ParseError> {
        match self {
            Sexp::Sym { s, .. } => Ok(s),
            Sexp::List { line, col, .. } => Err(err(*line, *col, "symbol", "(")),
        }
    }

    fn list(&self) -> Result<&[Sexp], ParseError> {
        match self {
            Sexp::List { items, .. } => Ok(items),
            Sexp::Sym { s, line, col } => Err(err(*line, *col, "(", s)),
        }
    }
}

fn parse_sexps(src: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut top: Vec<Sexp> = Vec::new();
    let mut line = 1usize;
    let mut col = 0usize;
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\n' {
            line += 1;
            col = 0;
            continue;
        }
        col += 1;
        match c {
            '(' => stack.push((Vec::new(), line, col)),
            ')' => {
                let (items, l, c0) = match stack.pop() {
                    Some(f) => f,
                    None => return Err(err(line, col, "(", ")")),
                };
                let sexp = Sexp::List {
                    items,
                    line: l,
                    col: c0,
                };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(sexp),
                    None => top.push(sexp),
                }
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            c => {
                let (l, c0) = (line, col);
                let mut s = String::new();
                s.push(c);
                while let Some(&n) = chars.peek() {
                    if n == '(' || n == ')' || n == ';' || n.is_whitespace() {
                        break;
                    }
                    s.push(n);
                    chars.next();
                    col += 1;
                }
                let sexp = Sexp::Sym { s, line: l, col: c0 };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(sexp),
                    None => top.push(sexp),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(err(*l, *c, ")", "end of input"));
    }
    Ok(top)
}

fn ty_of_name(s: &str, line: usize, col: usize) -> Result<Ty, ParseError> {
    match s {
        "object" => Ok(Ty::Object),
        "phys" => Ok(Ty::Phys),
        "part" => Ok(Ty::Part),
        other => Err(err(line, col, "type name", other)),
    }
}

/// Parses `a b - t c d - u ...`; names without a trailing type default to
/// `object`. When `vars` is set, names must carry the `?` prefix, which is
/// stripped.
fn typed_list(items: &[Sexp], vars: bool) -> Result<Vec<(String, Ty)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (line, col) = items[i].pos();
        let s = items[i].sym()?;
        if s == "-" {
            i += 1;
            let (l2, c2) = match items.get(i) {
                Some(x) => x.pos(),
                None => return Err(err(line, col, "type name", "end of list")),
            };
            let ty = ty_of_name(items[i].sym()?, l2, c2)?;
            for name in pending.drain(..) {
                out.push((name, ty));
            }
        } else {
            let name = if vars {
                match s.strip_prefix('?') {
                    Some(n) => n.to_string(),
                    None => return Err(err(line, col, "?variable", s)),
                }
            } else {
                s.to_string()
            };
            pending.push(name);
        }
        i += 1;
    }
    for name in pending {
        out.push((name, Ty::Object));
    }
    Ok(out)
}

fn parse_lit(sexp: &Sexp) -> Result<Lit, ParseError> {
    let items = sexp.list()?;
    let (line, col) = sexp.pos();
    if items.is_empty() {
        return Err(err(line, col, "predicate name", ")"));
    }
    let pred = items[0].sym()?.to_string();
    let mut args = Vec::new();
    for a in &items[1..] {
        let s = a.sym()?;
        match s.strip_prefix('?') {
            Some(v) => args.push(Term::Var(v.to_string())),
            None => args.push(Term::Const(s.to_string())),
        }
    }
    Ok(Lit { pred, args })
}

/// `(and L...)`, a bare literal, or `(not L)` entries; returns positives
/// and negatives.
fn parse_formula(sexp: &Sexp) -> Result<(Vec<Lit>, Vec<Lit>), ParseError> {
    let items = sexp.list()?;
    let entries: Vec<&Sexp> = match items.first() {
        Some(Sexp::Sym { s, .. }) if s == "and" => items[1..].iter().collect(),
        _ => vec![sexp],
    };
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for e in entries {
        let inner = e.list()?;
        match inner.first() {
            Some(Sexp::Sym { s, .. }) if s == "not" => {
                let (line, col) = e.pos();
                if inner.len() != 2 {
                    return Err(err(line, col, "single literal inside not", "list"));
                }
                neg.push(parse_lit(&inner[1])?);
            }
            _ => pos.push(parse_lit(e)?),
        }
    }
    Ok((pos, neg))
}

fn parse_ground_atom(sexp: &Sexp) -> Result<GroundAtom, ParseError> {
    let lit = parse_lit(sexp)?;
    let mut args = Vec::new();
    for t in lit.args {
        match t {
            Term::Const(c) => args.push(c),
            Term::Var(v) => {
                let (line, col) = sexp.pos();
                return Err(err(line, col, "constant", &format!("?{v}")));
            }
        }
    }
    Ok(GroundAtom {
        pred: lit.pred,
        args,
    })
}

fn parse_action(items: &[Sexp], line: usize, col: usize) -> Result<Schema, ParseError> {
    if items.len() < 2 {
        return Err(err(line, col, "action name", ")"));
    }
    let name = items[1].sym()?.to_string();
    let mut params = None;
    let mut pre = None;
    let mut eff = None;
    let mut i = 2;
    while i < items.len() {
        let (l, c) = items[i].pos();
        let key = items[i].sym()?;
        let val = match items.get(i + 1) {
            Some(v) => v,
            None => return Err(err(l, c, "value after keyword", "end of list")),
        };
        match key {
            ":parameters" => params = Some(typed_list(val.list()?, true)?),
            ":precondition" => pre = Some(parse_formula(val)?),
            ":effect" => eff = Some(parse_formula(val)?),
            other => return Err(err(l, c, ":parameters, :precondition or :effect", other)),
        }
        i += 2;
    }
    let params = params.ok_or_else(|| err(line, col, ":parameters", "end of action"))?;
    let (pre_pos, pre_neg) = pre.ok_or_else(|| err(line, col, ":precondition", "end of action"))?;
    let (add, del) = eff.ok_or_else(|| err(line, col, ":effect", "end of action"))?;
    Ok(Schema {
        name,
        params,
        pre_pos,
        pre_neg,
        add,
        del,
        ordered_groups: vec![],
    })
}

/// Parses a domain written by [`print_domain`] or compatible by hand.
/// Static predicates are recovered as those no action effect touches.
pub fn parse_domain(src: &str) -> Result<Domain, ParseError> {
    let top = parse_sexps(src)?;
    let define = match top.first() {
        Some(s) => s.list()?,
        None => return Err(err(1, 1, "(define ...)", "end of input")),
    };
    let (dline, dcol) = top[0].pos();
    if define.first().and_then(|s| s.sym().ok()) != Some("define") {
        return Err(err(dline, dcol, "define", "other"));
    }
    let head = define
        .get(1)
        .ok_or_else(|| err(dline, dcol, "(domain NAME)", "end of list"))?
        .list()?;
    if head.first().and_then(|s| s.sym().ok()) != Some("domain") || head.len() != 2 {
        let (l, c) = define[1].pos();
        return Err(err(l, c, "(domain NAME)", "other"));
    }
    let name = head[1].sym()?.to_string();

    let mut constants = Vec::new();
    let mut predicates: Vec<PredDecl> = Vec::new();
    let mut schemas = Vec::new();
    for section in &define[2..] {
        let items = section.list()?;
        let (l, c) = section.pos();
        let key = match items.first() {
            Some(k) => k.sym()?,
            None => return Err(err(l, c, "section keyword", ")")),
        };
        match key {
            ":requirements" => {}
            ":types" => {
                for (name, _) in typed_list(&items[1..], false)? {
                    if name != "part" && name != "phys" {
                        return Err(err(l, c, "part or phys", &name));
                    }
                }
            }
            ":constants" => constants = typed_list(&items[1..], false)?,
            ":predicates" => {
                for p in &items[1..] {
                    let decl = p.list()?;
                    let (pl, pc) = p.pos();
                    if decl.is_empty() {
                        return Err(err(pl, pc, "predicate name", ")"));
                    }
                    let pname = decl[0].sym()?.to_string();
                    let arg_types = typed_list(&decl[1..], true)?
                        .into_iter()
                        .map(|(_, t)| t)
                        .collect();
                    predicates.push(PredDecl {
                        name: pname,
                        arg_types,
                        is_static: true,
                    });
                }
            }
            ":action" => schemas.push(parse_action(items, l, c)?),
            other => return Err(err(l, c, "domain section", other)),
        }
    }
    for s in &schemas {
        for lit in s.add.iter().chain(&s.del) {
            if let Some(p) = predicates.iter_mut().find(|p| p.name == lit.pred) {
                p.is_static = false;
            }
        }
    }
    let domain = Domain {
        name,
        predicates,
        constants,
        schemas,
    };
    domain
        .check()
        .map_err(|m| err(1, 1, "well-formed domain", &m))?;
    Ok(domain)
}

/// Parses a problem written by [`print_problem`]; returns it with the
/// domain name it references.
pub fn parse_problem(src: &str) -> Result<(Problem, String), ParseError> {
    let top = parse_sexps(src)?;
    let define = match top.first() {
        Some(s) => s.list()?,
        None => return Err(err(1, 1, "(define ...)", "end of input")),
    };
    let (dline, dcol) = top[0].pos();
    if define.first().and_then(|s| s.sym().ok()) != Some("define") {
        return Err(err(dline, dcol, "define", "other"));
    }
    let head = define
        .get(1)
        .ok_or_else(|| err(dline, dcol, "(problem NAME)", "end of list"))?
        .list()?;
    if head.first().and_then(|s| s.sym().ok()) != Some("problem") || head.len() != 2 {
        let (l, c) = define[1].pos();
        return Err(err(l, c, "(problem NAME)", "other"));
    }
    let name = head[1].sym()?.to_string();

    let mut domain_name = String::new();
    let mut objects = Vec::new();
    let mut init = SymbolicState::new();
    let mut goal = BTreeSet::new();
    for section in &define[2..] {
        let items = section.list()?;
        let (l, c) = section.pos();
        let key = match items.first() {
            Some(k) => k.sym()?,
            None => return Err(err(l, c, "section keyword", ")")),
        };
        match key {
            ":domain" => {
                domain_name = items
                    .get(1)
                    .ok_or_else(|| err(l, c, "domain name", ")"))?
                    .sym()?
                    .to_string();
            }
            ":objects" => objects = typed_list(&items[1..], false)?,
            ":init" => {
                for a in &items[1..] {
                    init.insert(parse_ground_atom(a)?);
                }
            }
            ":goal" => {
                let formula = items.get(1).ok_or_else(|| err(l, c, "goal formula", ")"))?;
                let (pos, neg) = parse_formula(formula)?;
                if let Some(first) = neg.first() {
                    return Err(err(l, c, "positive goal literal", &first.pred));
                }
                for lit in pos {
                    let mut args = Vec::new();
                    for t in lit.args {
                        match t {
                            Term::Const(cst) => args.push(cst),
                            Term::Var(v) => {
                                return Err(err(l, c, "constant", &format!("?{v}")))
                            }
                        }
                    }
                    goal.insert(GroundAtom {
                        pred: lit.pred,
                        args,
                    });
                }
            }
            other => return Err(err(l, c, "problem section", other)),
        }
    }
    Ok((
        Problem {
            name,
            objects,
            init,
            goal,
        },
        domain_name,
    ))
}

fn term_str(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Const(c) => c.clone(),
    }
}

fn lit_str(l: &Lit) -> String {
    let mut s = format!("({}", l.pred);
    for a in &l.args {
        s.push(' ');
        s.push_str(&term_str(a));
    }
    s.push(')');
    s
}

/// Groups a typed list into runs sharing a type, in order.
fn runs(items: &[(String, Ty)]) -> Vec<(Vec<&str>, Ty)> {
    let mut out: Vec<(Vec<&str>, Ty)> = Vec::new();
    for (name, ty) in items {
        match out.last_mut() {
            Some((names, t)) if *t == *ty => names.push(name),
            _ => out.push((vec![name.as_str()], *ty)),
        }
    }
    out
}

pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    out.push_str(&format!("(define (domain {})\n", d.name));
    out.push_str("  (:requirements :strips :typing :negative-preconditions)\n");
    out.push_str("  (:types part phys - object)\n");
    let groups: Vec<String> = runs(&d.constants)
        .iter()
        .map(|(names, ty)| format!("{} - {}", names.join(" "), ty.name()))
        .collect();
    out.push_str(&format!("  (:constants {})\n", groups.join(" ")));
    out.push_str("  (:predicates\n");
    for (i, p) in d.predicates.iter().enumerate() {
        let args: Vec<String> = p
            .arg_types
            .iter()
            .enumerate()
            .map(|(j, t)| format!("?a{j} - {}", t.name()))
            .collect();
        let close = if i + 1 == d.predicates.len() { ")" } else { "" };
        out.push_str(&format!("    ({} {}){close}\n", p.name, args.join(" ")));
    }
    for s in &d.schemas {
        out.push_str(&format!("  (:action {}\n", s.name));
        let params: Vec<String> = s
            .params
            .iter()
            .map(|(n, t)| format!("?{n} - {}", t.name()))
            .collect();
        out.push_str(&format!("    :parameters ({})\n", params.join(" ")));
        out.push_str("    :precondition (and\n");
        let mut pre_lines: Vec<String> = s.pre_pos.iter().map(lit_str).collect();
        pre_lines.extend(s.pre_neg.iter().map(|l| format!("(not {})", lit_str(l))));
        for (i, line) in pre_lines.iter().enumerate() {
            let close = if i + 1 == pre_lines.len() { ")" } else { "" };
            out.push_str(&format!("      {line}{close}\n"));
        }
        out.push_str("    :effect (and\n");
        let mut eff_lines: Vec<String> = s.add.iter().map(lit_str).collect();
        eff_lines.extend(s.del.iter().map(|l| format!("(not {})", lit_str(l))));
        for (i, line) in eff_lines.iter().enumerate() {
            let close = if i + 1 == eff_lines.len() { "))" } else { "" };
            out.push_str(&format!("      {line}{close}\n"));
        }
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &Problem, domain_name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("(define (problem {})\n", p.name));
    out.push_str(&format!("  (:domain {domain_name})\n"));
    let groups: Vec<String> = runs(&p.objects)
        .iter()
        .map(|(names, ty)| format!("{} - {}", names.join(" "), ty.name()))
        .collect();
    out.push_str(&format!("  (:objects {})\n", groups.join(" ")));
    out.push_str("  (:init\n");
    let atoms: Vec<&GroundAtom> = p.init.iter().collect();
    for (i, a) in atoms.iter().enumerate() {
        let close = if i + 1 == atoms.len() { ")" } else { "" };
        out.push_str(&format!("    {a}{close}\n"));
    }
    if atoms.is_empty() {
        out.push_str("  )\n");
    }
    out.push_str("  (:goal (and\n");
    let goals: Vec<&GroundAtom> = p.goal.iter().collect();
    for (i, a) in goals.iter().enumerate() {
        let close = if i + 1 == goals.len() { ")))" } else { "" };
        out.push_str(&format!("    {a}{close}\n"));
    }
    if goals.is_empty() {
        out.push_str("  )))\n");
    }
    out
}

/// One action per line, arguments in schema parameter order.
pub fn print_plan(plan: &[GroundAction]) -> String {
    let mut out = String::new();
    for a in plan {
        out.push_str(&a.id());
        out.push('\n');
    }
    out
}

/// Parses a plan file into raw (name, args) steps.
pub fn parse_plan(src: &str) -> Result<Vec<(String, Vec<String>)>, ParseError> {
    let sexps = parse_sexps(src)?;
    let mut out = Vec::new();
    for s in sexps {
        let items = s.list()?;
        let (l, c) = s.pos();
        if items.is_empty() {
            return Err(err(l, c, "action name", ")"));
        }
        let name = items[0].sym()?.to_string();
        let mut args = Vec::new();
        for a in &items[1..] {
            args.push(a.sym()?.to_string());
        }
        out.push((name, args));
    }
    Ok(out)
}

/// Resolves parsed plan steps against a ground action set.
pub fn resolve_plan(
    steps: &[(String, Vec<String>)],
    actions: &[GroundAction],
) -> Result<Vec<GroundAction>, String> {
    let mut out = Vec::new();
    for (i, (name, args)) in steps.iter().enumerate() {
        match actions
            .iter()
            .find(|a| &a.name == name && &a.args == args)
        {
            Some(a) => out.push(a.clone()),
            None => {
                return Err(format!(
                    "step {}: no ground action ({} {})",
                    i + 1,
                    name,
                    args.join(" ")
                ))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{Grasp, Part};
    use crate::symbolic::domains::{builtin_domain, DomainKind};
    use crate::symbolic::ground::ground;

    #[test]
    fn domain_export_reimport_is_byte_identical() {
        for kind in [DomainKind::Support, DomainKind::Container, DomainKind::Hybrid] {
            let (d, _) = builtin_domain(kind, None);
            let text = print_domain(&d);
            let parsed = parse_domain(&text).expect("reparse");
            assert_eq!(print_domain(&parsed), text);
        }
    }

    #[test]
    fn reimported_support_domain_grounds_identically() {
        let w = [Grasp {
            palm: Part::Front,
            f1: Part::Left,
            f2: Part::Right,
        }];
        let (d, statics) = builtin_domain(DomainKind::Support, Some(&w));
        let mut init: SymbolicState = statics.into_iter().collect();
        for a in [
            GroundAtom::new("oc", &["in", "hand", "air"]),
            GroundAtom::new("oc", &["on", "b", "air"]),
            GroundAtom::new("oc", &["under", "b", "slab"]),
            GroundAtom::new("oc", &["left", "b", "air"]),
            GroundAtom::new("oc", &["right", "b", "air"]),
            GroundAtom::new("oc", &["front", "b", "air"]),
            GroundAtom::new("oc", &["back", "b", "air"]),
            GroundAtom::new("oc", &["on", "slab", "b"]),
            GroundAtom::new("force", &["b", "on"]),
            GroundAtom::new("force", &["slab", "on"]),
            GroundAtom::new("base", &["b", "front"]),
            GroundAtom::new("base", &["slab", "front"]),
        ] {
            init.insert(a);
        }
        let problem = Problem {
            name: "p".into(),
            objects: vec![("b".into(), Ty::Phys), ("slab".into(), Ty::Phys)],
            init,
            goal: BTreeSet::new(),
        };
        let before: Vec<String> = ground(&d, &problem).unwrap().iter().map(|a| a.id()).collect();
        let parsed = parse_domain(&print_domain(&d)).unwrap();
        let after: Vec<String> = ground(&parsed, &problem)
            .unwrap()
            .iter()
            .map(|a| a.id())
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn problem_export_reimport_is_byte_identical() {
        let (_, statics) = builtin_domain(DomainKind::Hybrid, None);
        let mut init: SymbolicState = statics.into_iter().collect();
        init.insert(GroundAtom::new("oc", &["in", "hand", "air"]));
        let problem = Problem {
            name: "roundtrip".into(),
            objects: vec![("b".into(), Ty::Phys), ("s".into(), Ty::Phys)],
            init,
            goal: [GroundAtom::new("oc", &["in", "s", "b"])].into_iter().collect(),
        };
        let text = print_problem(&problem, "utamp-hybrid");
        let (parsed, dname) = parse_problem(&text).expect("reparse");
        assert_eq!(dname, "utamp-hybrid");
        assert_eq!(print_problem(&parsed, &dname), text);
        assert_eq!(parsed.init, problem.init);
        assert_eq!(parsed.goal, problem.goal);
        assert_eq!(parsed.objects, problem.objects);
    }

    #[test]
    fn empty_goal_round_trips() {
        let problem = Problem {
            name: "empty".into(),
            objects: vec![("b".into(), Ty::Phys)],
            init: SymbolicState::new(),
            goal: BTreeSet::new(),
        };
        let text = print_problem(&problem, "d");
        let (parsed, _) = parse_problem(&text).expect("reparse");
        assert_eq!(print_problem(&parsed, "d"), text);
    }

    #[test]
    fn plan_file_round_trip() {
        let a = GroundAction {
            name: "pick".into(),
            args: vec!["b".into(), "slab".into(), "front".into()],
            pre_pos: vec![],
            pre_neg: vec![],
            add: vec![],
            del: vec![],
        };
        let text = print_plan(&[a.clone()]);
        assert_eq!(text, "(pick b slab front)\n");
        let steps = parse_plan(&text).unwrap();
        assert_eq!(steps, vec![("pick".into(), vec!["b".into(), "slab".into(), "front".into()])]);
        let resolved = resolve_plan(&steps, &[a.clone()]).unwrap();
        assert_eq!(resolved, vec![a]);
        assert!(resolve_plan(&steps, &[]).unwrap_err().contains("step 1"));
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_domain("(define (domain d) (:action").unwrap_err();
        assert_eq!((e.line, e.col), (1, 20));
        assert_eq!(e.expected, ")");
        let e = parse_domain("(define (domain d) (:widgets))").unwrap_err();
        assert_eq!(e.expected, "domain section");
        assert_eq!(e.found, ":widgets");
        let e = parse_problem("(define (problem p) (:init (oc ?x)))").unwrap_err();
        assert_eq!(e.expected, "constant");
        assert_eq!(e.found, "?x");
        let e = parse_sexps(")").unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
    }

    #[test]
    fn comments_and_whitespace_are_ignored()  {
        let steps = parse_plan("; a comment\n(pick b s) ; trailing\n\n(place b s)\n").unwrap();
        assert_eq!(steps.len(), 2);
    }
}
