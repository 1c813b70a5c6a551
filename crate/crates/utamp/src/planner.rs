//! Forward state-space search over a ground task: lazy greedy best-first
//! with a delete-relaxation heuristic and preferred-operator boosting.
//!
//! States compile to fixed-width bitsets over the fluent atoms; static
//! facts are checked once per action at compile time and drop out of the
//! search. Each node is evaluated when it is expanded, and its successors
//! inherit that value until their own expansion (lazy evaluation). Two
//! open queues order nodes by (h, insertion index): one holds everything,
//! one holds only successors reached through a preferred operator, and the
//! preferred queue earns `boost` extra pops whenever a new best h appears.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use crate::symbolic::domains::Domain;
use crate::symbolic::ground::Problem;
use crate::symbolic::{GroundAction, GroundAtom};

const INF: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    /// Size of an extracted relaxed plan.
    Ff,
    /// Sum of additive goal-atom costs.
    Add,
}

#[derive(Clone, Debug)]
pub struct PlannerConfig {
    pub heuristic: Heuristic,
    pub use_preferred: bool,
    /// Extra preferred-queue pops granted on each new best heuristic value.
    pub boost: u64,
    pub max_expansions: u64,
    pub time_limit: Duration,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            heuristic: Heuristic::Ff,
            use_preferred: true,
            boost: 1000,
            max_expansions: 1_000_000,
            time_limit: Duration::from_secs(60),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub evaluations: u64,
    pub duration_us: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solved(Vec<GroundAction>),
    Unsolvable,
    ResourceLimit,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

struct CompiledAction {
    pre: Vec<u32>,
    add: Vec<u32>,
    del: Vec<u32>,
    pre_mask: Vec<u64>,
    src: u32,
}

struct Task {
    natoms: usize,
    width: usize,
    init: Vec<u64>,
    goal: Vec<u32>,
    goal_mask: Vec<u64>,
    actions: Vec<CompiledAction>,
    /// atom -> actions that add it is implicit in `actions`; these two are
    /// the inverted indexes the relaxation walks.
    pre_of: Vec<Vec<u32>>,
    no_pre: Vec<u32>,
}

fn mask_set(mask: &mut [u64], i: u32) {
    mask[(i / 64) as usize] |= 1 << (i % 64);
}

fn mask_get(mask: &[u64], i: u32) -> bool {
    mask[(i / 64) as usize] & (1 << (i % 64)) != 0
}

fn mask_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Compiles the ground task. Returns `Ok(None)` when a static goal atom is
/// false, i.e. the task is trivially unsolvable. Errors are structural:
/// negated fluent preconditions or effects on static predicates.
fn compile(
    domain: &Domain,
    problem: &Problem,
    actions: &[GroundAction],
) -> Result<Option<Task>, String> {
    let statics_true: BTreeSet<&GroundAtom> = problem
        .init
        .iter()
        .filter(|a| domain.is_static(&a.pred))
        .collect();

    let mut universe: BTreeSet<&GroundAtom> = BTreeSet::new();
    for a in &problem.init {
        if !domain.is_static(&a.pred) {
            universe.insert(a);
        }
    }
    let mut goal_fluents: Vec<&GroundAtom> = Vec::new();
    for g in &problem.goal {
        if domain.is_static(&g.pred) {
            if !statics_true.contains(g) {
                return Ok(None);
            }
        } else {
            universe.insert(g);
            goal_fluents.push(g);
        }
    }
    for action in actions {
        for p in &action.pre_pos {
            if !domain.is_static(&p.pred) {
                universe.insert(p);
            }
        }
        for n in &action.pre_neg {
            if !domain.is_static(&n.pred) {
                return Err(format!(
                    "action {} has a negative precondition on fluent {}",
                    action.id(),
                    n
                ));
            }
        }
        for e in action.add.iter().chain(&action.del) {
            if domain.is_static(&e.pred) {
                return Err(format!("action {} edits static {}", action.id(), e));
            }
            universe.insert(e);
        }
    }

    let index: BTreeMap<&GroundAtom, u32> = universe
        .iter()
        .enumerate()
        .map(|(i, a)| (*a, i as u32))
        .collect();
    let natoms = index.len();
    let width = natoms.div_ceil(64).max(1);

    let mut init = vec![0u64; width];
    for a in &problem.init {
        if let Some(&i) = index.get(a) {
            mask_set(&mut init, i);
        }
    }
    let goal: Vec<u32> = goal_fluents.iter().map(|g| index[*g]).collect();
    let mut goal_mask = vec![0u64; width];
    for &g in &goal {
        mask_set(&mut goal_mask, g);
    }

    let mut compiled = Vec::new();
    'next: for (src, action) in actions.iter().enumerate() {
        let mut pre = Vec::new();
        for p in &action.pre_pos {
            if domain.is_static(&p.pred) {
                if !statics_true.contains(p) {
                    continue 'next;
                }
            } else {
                pre.push(index[p]);
            }
        }
        for n in &action.pre_neg {
            if statics_true.contains(n) {
                continue 'next;
            }
        }
        pre.sort_unstable();
        pre.dedup();
        let mut pre_mask = vec![0u64; width];
        for &i in &pre {
            mask_set(&mut pre_mask, i);
        }
        let mut add: Vec<u32> = action.add.iter().map(|a| index[a]).collect();
        add.sort_unstable();
        add.dedup();
        let mut del: Vec<u32> = action.del.iter().map(|a| index[a]).collect();
        del.sort_unstable();
        del.dedup();
        compiled.push(CompiledAction {
            pre,
            add,
            del,
            pre_mask,
            src: src as u32,
        });
    }

    let mut pre_of = vec![Vec::new(); natoms];
    let mut no_pre = Vec::new();
    for (ai, a) in compiled.iter().enumerate() {
        if a.pre.is_empty() {
            no_pre.push(ai as u32);
        }
        for &p in &a.pre {
            pre_of[p as usize].push(ai as u32);
        }
    }

    Ok(Some(Task {
        natoms,
        width,
        init,
        goal,
        goal_mask,
        actions: compiled,
        pre_of,
        no_pre,
    }))
}

/// Relaxation evaluator with reusable scratch space. Both heuristics fill
/// a best-supporter array, from which a relaxed plan is extracted; the
/// preferred operators are the relaxed-plan actions applicable right now.
struct Evaluator {
    heuristic: Heuristic,
    base_counters: Vec<u32>,
    counters: Vec<u32>,
    acc: Vec<u32>,
    cost: Vec<u32>,
    supporter: Vec<i32>,
    marked: Vec<bool>,
    queue: VecDeque<u32>,
    heap: BinaryHeap<Reverse<(u32, u32)>>,
}

impl Evaluator {
    fn new(task: &Task, heuristic: Heuristic) -> Evaluator {
        Evaluator {
            heuristic,
            base_counters: task.actions.iter().map(|a| a.pre.len() as u32).collect(),
            counters: vec![0; task.actions.len()],
            acc: vec![0; task.actions.len()],
            cost: vec![INF; task.natoms],
            supporter: vec![-1; task.natoms],
            marked: vec![false; task.natoms],
            queue: VecDeque::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Returns h for `state`; fills `preferred` with applicable
    /// relaxed-plan actions (sorted, deduplicated).
    fn eval(&mut self, task: &Task, state: &[u64], preferred: &mut Vec<u32>) -> u32 {
        preferred.clear();
        match self.heuristic {
            Heuristic::Ff => self.reach_ff(task, state),
            Heuristic::Add => self.reach_add(task, state),
        }
        for &g in &task.goal {
            if self.cost[g as usize] == INF {
                return INF;
            }
        }
        let plan_set = self.extract(task, state);
        let h = match self.heuristic {
            Heuristic::Ff => plan_set.len() as u32,
            Heuristic::Add => {
                let mut sum = 0u32;
                for &g in &task.goal {
                    sum = sum.saturating_add(self.cost[g as usize]);
                }
                sum
            }
        };
        for &a in &plan_set {
            if mask_subset(&task.actions[a as usize].pre_mask, state) {
                preferred.push(a);
            }
        }
        h
    }

    /// Uniform-cost relaxed reachability; supporters record the first
    /// achiever of each atom.
    fn reach_ff(&mut self, task: &Task, state: &[u64]) {
        self.counters.copy_from_slice(&self.base_counters);
        self.cost.fill(INF);
        self.supporter.fill(-1);
        self.queue.clear();
        for i in 0..task.natoms as u32 {
            if mask_get(state, i) {
                self.cost[i as usize] = 0;
                self.queue.push_back(i);
            }
        }
        for &a in &task.no_pre {
            self.fire_ff(task, a);
        }
        while let Some(atom) = self.queue.pop_front() {
            for k in 0..task.pre_of[atom as usize].len() {
                let a = task.pre_of[atom as usize][k];
                self.counters[a as usize] -= 1;
                if self.counters[a as usize] == 0 {
                    self.fire_ff(task, a);
                }
            }
        }
    }

    fn fire_ff(&mut self, task: &Task, a: u32) {
        for &ad in &task.actions[a as usize].add {
            if self.cost[ad as usize] == INF {
                self.cost[ad as usize] = 1;
                self.supporter[ad as usize] = a as i32;
                self.queue.push_back(ad);
            }
        }
    }

    /// Additive-cost relaxed reachability (Dijkstra over atoms); supporters
    /// record the cheapest achiever.
    fn reach_add(&mut self, task: &Task, state: &[u64]) {
        self.counters.copy_from_slice(&self.base_counters);
        self.acc.fill(0);
        self.cost.fill(INF);
        self.supporter.fill(-1);
        self.marked.fill(false);
        self.heap.clear();
        for i in 0..task.natoms as u32 {
            if mask_get(state, i) {
                self.cost[i as usize] = 0;
                self.heap.push(Reverse((0, i)));
            }
        }
        for &a in &task.no_pre {
            self.fire_add(task, a);
        }
        while let Some(Reverse((c, atom))) = self.heap.pop() {
            if self.marked[atom as usize] || c > self.cost[atom as usize] {
                continue;
            }
            self.marked[atom as usize] = true;
            for k in 0..task.pre_of[atom as usize].len() {
                let a = task.pre_of[atom as usize][k];
                self.acc[a as usize] = self.acc[a as usize].saturating_add(c);
                self.counters[a as usize] -= 1;
                if self.counters[a as usize] == 0 {
                    self.fire_add(task, a);
                }
            }
        }
    }

    fn fire_add(&mut self, task: &Task, a: u32) {
        let c = self.acc[a as usize].saturating_add(1);
        for &ad in &task.actions[a as usize].add {
            if c < self.cost[ad as usize] {
                self.cost[ad as usize] = c;
                self.supporter[ad as usize] = a as i32;
                self.heap.push(Reverse((c, ad)));
            }
        }
    }

    /// Walks supporters backward from the goal, collecting one achiever per
    /// atom outside the current state.
    fn extract(&mut self, task: &Task, state: &[u64]) -> BTreeSet<u32> {
        self.marked.fill(false);
        let mut plan = BTreeSet::new();
        let mut stack: Vec<u32> = task.goal.clone();
        while let Some(atom) = stack.pop() {
            if self.marked[atom as usize] {
                continue;
            }
            self.marked[atom as usize] = true;
            if mask_get(state, atom) && self.supporter[atom as usize] < 0 {
                continue;
            }
            let s = self.supporter[atom as usize];
            if s < 0 {
                continue;
            }
            plan.insert(s as u32);
            for &p in &task.actions[s as usize].pre {
                if !self.marked[p as usize] {
                    stack.push(p);
                }
            }
        }
        plan
    }
}

struct Node {
    state: Vec<u64>,
    parent: u32,
    act: u32,
    expanded: bool,
}

const NONE: u32 = u32::MAX;

/// Searches for a plan over the already-ground `actions`. Structural
/// errors (negated fluent preconditions, effects on statics) are reported
/// as `Err`; everything else lands in the outcome.
pub fn plan(
    domain: &Domain,
    problem: &Problem,
    actions: &[GroundAction],
    cfg: &PlannerConfig,
) -> Result<SearchResult, String> {
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let task = match compile(domain, problem, actions)? {
        Some(t) => t,
        None => {
            stats.duration_us = start.elapsed().as_micros() as u64;
            return Ok(SearchResult {
                outcome: Outcome::Unsolvable,
                stats,
            });
        }
    };

    let mut evaluator = Evaluator::new(&task, cfg.heuristic);
    let mut nodes: Vec<Node> = vec![Node {
        state: task.init.clone(),
        parent: NONE,
        act: NONE,
        expanded: false,
    }];
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    seen.insert(task.init.clone());

    let mut open_all: BinaryHeap<Reverse<(u32, u64, u32)>> = BinaryHeap::new();
    let mut open_pref: BinaryHeap<Reverse<(u32, u64, u32)>> = BinaryHeap::new();
    let mut ticket: u64 = 0;
    open_all.push(Reverse((0, ticket, 0)));
    ticket += 1;

    let mut best_h = INF;
    let mut credit: u64 = 0;
    let mut flip = false;
    let mut preferred: Vec<u32> = Vec::new();

    let finish = |outcome: Outcome, mut stats: SearchStats| {
        stats.duration_us = start.elapsed().as_micros() as u64;
        Ok(SearchResult { outcome, stats })
    };

    loop {
        if open_all.is_empty() && open_pref.is_empty() {
            return finish(Outcome::Unsolvable, stats);
        }
        if stats.expansions >= cfg.max_expansions || start.elapsed() > cfg.time_limit {
            return finish(Outcome::ResourceLimit, stats);
        }

        let pick_pref = if !cfg.use_preferred || open_pref.is_empty() {
            false
        } else if open_all.is_empty() {
            true
        } else if credit > 0 {
            credit -= 1;
            true
        } else {
            flip = !flip;
            flip
        };
        let Reverse((_, _, idx)) = if pick_pref {
            open_pref.pop().unwrap()
        } else {
            open_all.pop().unwrap()
        };
        if nodes[idx as usize].expanded {
            continue;
        }
        nodes[idx as usize].expanded = true;

        if mask_subset(&task.goal_mask, &nodes[idx as usize].state) {
            let mut steps = Vec::new();
            let mut at = idx;
            while nodes[at as usize].act != NONE {
                steps.push(actions[task.actions[nodes[at as usize].act as usize].src as usize].clone());
                at = nodes[at as usize].parent;
            }
            steps.reverse();
            return finish(Outcome::Solved(steps), stats);
        }

        let state = nodes[idx as usize].state.clone();
        let h = evaluator.eval(&task, &state, &mut preferred);
        stats.evaluations += 1;
        if h == INF {
            continue;
        }
        if h < best_h {
            best_h = h;
            credit += cfg.boost;
        }
        stats.expansions += 1;

        for (ai, action) in task.actions.iter().enumerate() {
            if !mask_subset(&action.pre_mask, &state) {
                continue;
            }
            let mut succ = state.clone();
            for &d in &action.del {
                succ[(d / 64) as usize] &= !(1 << (d % 64));
            }
            for &a in &action.add {
                succ[(a / 64) as usize] |= 1 << (a % 64);
            }
            if seen.contains(&succ) {
                continue;
            }
            seen.insert(succ.clone());
            let child = nodes.len() as u32;
            nodes.push(Node {
                state: succ,
                parent: idx,
                act: ai as u32,
                expanded: false,
            });
            stats.generated += 1;
            open_all.push(Reverse((h, ticket, child)));
            ticket += 1;
            if cfg.use_preferred && preferred.binary_search(&(ai as u32)).is_ok() {
                open_pref.push(Reverse((h, ticket, child)));
                ticket += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{Grasp, Part};
    use crate::symbolic::domains::{builtin_domain, DomainKind, Ty};
    use crate::symbolic::ground::ground;
    use crate::symbolic::{validate, SymbolicState};

    fn atom(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom::new(pred, args)
    }

    fn front_grasp() -> [Grasp; 1] {
        [Grasp {
            palm: Part::Front,
            f1: Part::Left,
            f2: Part::Right,
        }]
    }

    fn solid_atoms(init: &mut SymbolicState, name: &str, on: &str) {
        for side in ["on", "left", "right", "front", "back"] {
            init.insert(atom("oc", &[side, name, "air"]));
        }
        init.insert(atom("oc", &["under", name, on]));
        init.insert(atom("oc", &["on", on, name]));
        init.insert(atom("force", &[name, "on"]));
        init.insert(atom("base", &[name, "front"]));
    }

    /// Two blocks side by side on two slabs; the goal stacks b2 on b1.
    fn stack_world() -> (crate::symbolic::domains::Domain, Problem) {
        let w = front_grasp();
        let (domain, statics) = builtin_domain(DomainKind::Support, Some(&w));
        let mut init: SymbolicState = statics.into_iter().collect();
        init.insert(atom("oc", &["in", "hand", "air"]));
        solid_atoms(&mut init, "b1", "slab1");
        solid_atoms(&mut init, "b2", "slab2");
        init.insert(atom("force", &["slab1", "on"]));
        init.insert(atom("force", &["slab2", "on"]));
        init.insert(atom("base", &["slab1", "front"]));
        init.insert(atom("base", &["slab2", "front"]));
        let problem = Problem {
            name: "stack".into(),
            objects: vec![
                ("b1".into(), Ty::Phys),
                ("b2".into(), Ty::Phys),
                ("slab1".into(), Ty::Phys),
                ("slab2".into(), Ty::Phys),
            ],
            init,
            goal: [atom("oc", &["under", "b2", "b1"]), atom("oc", &["on", "b1", "b2"])]
                .into_iter()
                .collect(),
        };
        (domain, problem)
    }

    #[test]
    fn solves_two_step_stack() {
        let (domain, problem) = stack_world();
        let actions = ground(&domain, &problem).unwrap();
        let result = plan(&domain, &problem, &actions, &PlannerConfig::default()).unwrap();
        let steps = match result.outcome {
            Outcome::Solved(s) => s,
            other => panic!("expected solution, got {other:?}"),
        };
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].name, "pick");
        assert_eq!(steps[1].name, "place");
        validate(&problem.init, &steps, &problem.goal).unwrap();
    }

    #[test]
    fn add_heuristic_solves_too() {
        let (domain, problem) = stack_world();
        let actions = ground(&domain, &problem).unwrap();
        let cfg = PlannerConfig {
            heuristic: Heuristic::Add,
            ..Default::default()
        };
        let result = plan(&domain, &problem, &actions, &cfg).unwrap();
        match result.outcome {
            Outcome::Solved(steps) => {
                validate(&problem.init, &steps, &problem.goal).unwrap();
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn no_preferred_operators_still_solves() {
        let (domain, problem) = stack_world();
        let actions = ground(&domain, &problem).unwrap();
        let cfg = PlannerConfig {
            use_preferred: false,
            ..Default::default()
        };
        let result = plan(&domain, &problem, &actions, &cfg).unwrap();
        match result.outcome {
            Outcome::Solved(steps) => {
                validate(&problem.init, &steps, &problem.goal).unwrap();
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn reports_unsolvable_when_goal_unreachable() {
        let (domain, mut problem) = stack_world();
        problem.goal.insert(atom("oc", &["in", "hand", "hand"]));
        let actions = ground(&domain, &problem).unwrap();
        let result = plan(&domain, &problem, &actions, &PlannerConfig::default()).unwrap();
        assert_eq!(result.outcome, Outcome::Unsolvable);
    }

    #[test]
    fn statically_false_goal_is_unsolvable() {
        let (domain, mut problem) = stack_world();
        problem
            .goal
            .insert(atom("isgrasp", &["back", "left", "right"]));
        let actions = ground(&domain, &problem).unwrap();
        let result = plan(&domain, &problem, &actions, &PlannerConfig::default()).unwrap();
        assert_eq!(result.outcome, Outcome::Unsolvable);
    }

    #[test]
    fn expansion_budget_reports_resource_limit() {
        let (domain, problem) = stack_world();
        let actions = ground(&domain, &problem).unwrap();
        let cfg = PlannerConfig {
            max_expansions: 0,
            ..Default::default()
        };
        let result = plan(&domain, &problem, &actions, &cfg).unwrap();
        assert_eq!(result.outcome, Outcome::ResourceLimit);
    }

    #[test]
    fn search_is_deterministic() {
        let (domain, problem) = stack_world();
        let actions = ground(&domain, &problem).unwrap();
        let a = plan(&domain, &problem, &actions, &PlannerConfig::default()).unwrap();
        let b = plan(&domain, &problem, &actions, &PlannerConfig::default()).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.stats.expansions, b.stats.expansions);
        assert_eq!(a.stats.generated, b.stats.generated);
        assert_eq!(a.stats.evaluations, b.stats.evaluations);
    }

    /// A container shuffle: move a block between spaces whose neighbor
    /// spaces all exist and are free.
    #[test]
    fn moves_block_between_spaces() {
        let w = front_grasp();
        let (domain, statics) = builtin_domain(DomainKind::Container, Some(&w));
        let mut init: SymbolicState = statics.into_iter().collect();
        init.insert(atom("oc", &["in", "hand", "air"]));
        init.insert(atom("oc", &["in", "sa", "b"]));
        init.insert(atom("oc", &["in", "sb", "air"]));
        for (s, nf, nl, nr) in [("sa", "fa", "la", "ra"), ("sb", "fb", "lb", "rb")] {
            init.insert(atom("oc", &["front", s, nf]));
            init.insert(atom("oc", &["left", s, nl]));
            init.insert(atom("oc", &["right", s, nr]));
            init.insert(atom("oc", &["in", nf, "air"]));
            init.insert(atom("oc", &["in", nl, "air"]));
            init.insert(atom("oc", &["in", nr, "air"]));
            init.insert(atom("force", &[s, "in"]));
            init.insert(atom("base", &[s, "front"]));
        }
        let mut objects: Vec<(String, Ty)> = vec![("b".into(), Ty::Phys)];
        for s in ["sa", "sb", "fa", "la", "ra", "fb", "lb", "rb"] {
            objects.push((s.into(), Ty::Phys));
        }
        let problem = Problem {
            name: "shuffle".into(),
            objects,
            init,
            goal: [atom("oc", &["in", "sb", "b"])].into_iter().collect(),
        };
        let actions = ground(&domain, &problem).unwrap();
        let result = plan(&domain, &problem, &actions, &PlannerConfig::default()).unwrap();
        let steps = match result.outcome {
            Outcome::Solved(s) => s,
            other => panic!("expected solution, got {other:?}"),
        };
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].name, "pick-space");
        assert_eq!(steps[1].name, "place-space");
        let end = validate(&problem.init, &steps, &problem.goal).unwrap();
        assert!(end.contains(&atom("oc", &["in", "sa", "air"])));
    }
}
