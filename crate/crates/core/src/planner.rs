//! Reconfiguration planning: shortest sequences of pivot moves between two
//! connected configurations of equal size.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use pathfinding::kuhn_munkres::kuhn_munkres_min;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{apply_move_with, apply_unchecked, candidate_moves, check_move_inner, MoveLegality, MoveRules, PivotMove};
use crate::lattice::{lattice_distance, Cell, CellKind, Configuration, LatticePos, Rotation24};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bfs,
    #[default]
    AStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerOptions {
    /// Maximum number of state expansions before giving up.
    pub max_states: usize,
    pub algorithm: Algorithm,
    pub match_up_to_translation: bool,
    pub strict_stability: bool,
    /// Whether goal matching distinguishes active from passive cells.
    pub kind_sensitive: bool,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            max_states: 1_000_000,
            algorithm: Algorithm::AStar,
            match_up_to_translation: true,
            strict_stability: false,
            kind_sensitive: false,
        }
    }
}

impl PlannerOptions {
    pub fn criterion(&self) -> GoalCriterion {
        GoalCriterion { up_to_translation: self.match_up_to_translation, kind_sensitive: self.kind_sensitive }
    }

    pub fn rules(&self) -> MoveRules {
        MoveRules { strict_stability: self.strict_stability }
    }
}

/// How a configuration is compared against a goal. Orientations are never
/// compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalCriterion {
    pub up_to_translation: bool,
    pub kind_sensitive: bool,
}

impl Default for GoalCriterion {
    fn default() -> Self {
        PlannerOptions::default().criterion()
    }
}

impl GoalCriterion {
    /// The representative of `c` under this criterion: identity orientations,
    /// passive kinds unless kind-sensitive, translated to the origin if
    /// translation-invariant.
    pub fn key(&self, c: &Configuration) -> Configuration {
        let offset = match (self.up_to_translation, c.min_position()) {
            (true, Some(min)) => -min,
            _ => LatticePos::ORIGIN,
        };
        let cells = c.cells().map(|cell| Cell {
            pos: cell.pos + offset,
            kind: if self.kind_sensitive { cell.kind } else { CellKind::Passive },
            orient: Rotation24::IDENTITY,
        });
        Configuration::new(cells).expect("translation keeps positions distinct")
    }

    pub fn matches(&self, c: &Configuration, goal: &Configuration) -> bool {
        self.key(c) == self.key(goal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanStats {
    pub states_expanded: usize,
    pub frontier_peak: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub moves: Vec<PivotMove>,
    pub goal: Configuration,
    pub criterion: GoalCriterion,
    pub rules: MoveRules,
    pub stats: PlanStats,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NoPathReason {
    #[error("start has {start} cells but goal has {goal}")]
    SizeMismatch { start: usize, goal: usize },
    #[error("goal is unreachable (explored {explored} states)")]
    Unreachable { explored: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("{0} configuration is empty")]
    Empty(&'static str),
    #[error("{0} configuration is not connected")]
    Disconnected(&'static str),
    #[error("no path: {0}")]
    NoPath(NoPathReason),
    #[error("state budget exhausted after {expanded} expansions")]
    BudgetExhausted { expanded: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("move {index} is illegal: {legality}")]
    IllegalMove { index: usize, legality: MoveLegality },
    #[error("replayed configuration does not match the goal")]
    GoalMismatch,
}

/// Minimum total lattice distance over perfect matchings of `a` onto `b`.
pub fn assignment_cost(a: &[LatticePos], b: &[LatticePos]) -> u32 {
    assert_eq!(a.len(), b.len(), "assignment needs equal sizes");
    match a.len() {
        0 => 0,
        1 => lattice_distance(a[0], b[0]),
        n => {
            let costs = Matrix::from_fn(n, n, |(i, j)| i64::from(lattice_distance(a[i], b[j])));
            kuhn_munkres_min(&costs).0 as u32
        }
    }
}

/// Admissible A* bound with translation-invariant matching.
pub fn heuristic(c: &Configuration, goal: &Configuration) -> Result<u32, PlanError> {
    heuristic_with(c, goal, true)
}

/// Optimal-assignment lower bound on the number of pivots: every pivot moves
/// one cell by one lattice step. With `up_to_translation` the bound is
/// minimised over all translations of the goal.
pub fn heuristic_with(c: &Configuration, goal: &Configuration, up_to_translation: bool) -> Result<u32, PlanError> {
    if c.len() != goal.len() {
        return Err(PlanError::NoPath(NoPathReason::SizeMismatch { start: c.len(), goal: goal.len() }));
    }
    let a: Vec<LatticePos> = c.positions().collect();
    let b: Vec<LatticePos> = goal.positions().collect();
    if !up_to_translation || a.is_empty() {
        return Ok(assignment_cost(&a, &b));
    }
    Ok(translated_assignment_cost(&a, &b))
}

fn shifted(b: &[LatticePos], t: LatticePos) -> Vec<LatticePos> {
    b.iter().map(|&q| q + t).collect()
}

/// `min_t assignment_cost(a, b + t)`. The lattice metric extends to the
/// convex norm `max(‖v‖∞, ‖v‖₁/2)`, so by Jensen every matching costs at
/// least `n·N(μ − t)` with `μ` the difference of centroids; translations
/// whose bound cannot beat the incumbent are skipped.
fn translated_assignment_cost(a: &[LatticePos], b: &[LatticePos]) -> u32 {
    let n = a.len() as f64;
    let mut mu = [0.0f64; 3];
    for (p, q) in a.iter().zip(b) {
        for (k, m) in mu.iter_mut().enumerate() {
            *m += f64::from(p.to_array()[k] - q.to_array()[k]) / n;
        }
    }
    let bound = |t: [i32; 3]| {
        let v = [mu[0] - f64::from(t[0]), mu[1] - f64::from(t[1]), mu[2] - f64::from(t[2])];
        let inf = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let l1 = v.iter().map(|x| x.abs()).sum::<f64>() / 2.0;
        n * inf.max(l1)
    };
    let anchor = a[0] - b[0];
    let mut best = assignment_cost(a, &shifted(b, anchor));
    if best == 0 {
        return 0;
    }
    let reach = f64::from(best) / n;
    let range = |k: usize| (mu[k] - reach).floor() as i32..=(mu[k] + reach).ceil() as i32;
    for x in range(0) {
        for y in range(1) {
            for z in range(2) {
                let Ok(t) = LatticePos::new(x, y, z) else { continue };
                if t == anchor || bound([x, y, z]) >= f64::from(best) - 1e-9 {
                    continue;
                }
                best = best.min(assignment_cost(a, &shifted(b, t)));
            }
        }
    }
    best
}

struct Node {
    config: Configuration,
    parent: Option<(usize, PivotMove)>,
}

/// Successors of `c` in deterministic move order.
fn successors(c: &Configuration, rules: MoveRules) -> Vec<(PivotMove, Configuration)> {
    let removable: HashMap<LatticePos, bool> = c.positions().map(|p| (p, c.len() <= 2 || c.is_connected_without(p))).collect();
    candidate_moves(c)
        .into_iter()
        .filter(|m| check_move_inner(c, m, rules, || removable[&m.mover()]) == MoveLegality::Legal)
        .map(|m| (m, apply_unchecked(c, &m)))
        .collect()
}

fn validate(c: &Configuration, which: &'static str) -> Result<(), PlanError> {
    match c.is_connected() {
        Err(_) => Err(PlanError::Empty(which)),
        Ok(false) => Err(PlanError::Disconnected(which)),
        Ok(true) => Ok(()),
    }
}

/// Finds a minimum-length plan from `start` to `goal`. Both algorithms are
/// optimal; A* uses the assignment heuristic, which is consistent because a
/// pivot changes it by at most one.
pub fn plan(start: &Configuration, goal: &Configuration, opts: &PlannerOptions) -> Result<Plan, PlanError> {
    let started = Instant::now();
    validate(start, "start")?;
    validate(goal, "goal")?;
    if start.len() != goal.len() {
        return Err(PlanError::NoPath(NoPathReason::SizeMismatch { start: start.len(), goal: goal.len() }));
    }
    let criterion = opts.criterion();
    let rules = opts.rules();
    let goal_key = criterion.key(goal);
    let max_states = opts.max_states.max(1);
    let mut nodes = vec![Node { config: start.clone(), parent: None }];
    let mut stats = PlanStats::default();

    let found = match opts.algorithm {
        Algorithm::Bfs => {
            let mut seen = std::collections::HashSet::new();
            seen.insert(criterion.key(start));
            let mut queue = VecDeque::from([0usize]);
            stats.frontier_peak = 1;
            let mut found = None;
            while let Some(idx) = queue.pop_front() {
                stats.states_expanded += 1;
                if criterion.key(&nodes[idx].config) == goal_key {
                    found = Some(idx);
                    break;
                }
                if stats.states_expanded >= max_states {
                    return Err(PlanError::BudgetExhausted { expanded: stats.states_expanded });
                }
                for (m, next) in successors(&nodes[idx].config, rules) {
                    if seen.insert(criterion.key(&next)) {
                        nodes.push(Node { config: next, parent: Some((idx, m)) });
                        queue.push_back(nodes.len() - 1);
                    }
                }
                stats.frontier_peak = stats.frontier_peak.max(queue.len());
            }
            found
        }
        Algorithm::AStar => {
            let h = |c: &Configuration| {
                heuristic_with(c, goal, criterion.up_to_translation).expect("sizes checked")
            };
            // key -> (best g, closed)
            let mut best: HashMap<Configuration, (u32, bool)> = HashMap::new();
            best.insert(criterion.key(start), (0, false));
            let mut heap = BinaryHeap::new();
            let mut seq = 0u64;
            let h0 = h(start);
            heap.push(Reverse((h0, h0, seq, 0usize, 0u32)));
            stats.frontier_peak = 1;
            let mut found = None;
            while let Some(Reverse((_, _, _, idx, g))) = heap.pop() {
                let key = criterion.key(&nodes[idx].config);
                let entry = best.get_mut(&key).expect("pushed states are recorded");
                if entry.1 || entry.0 < g {
                    continue;
                }
                entry.1 = true;
                stats.states_expanded += 1;
                if key == goal_key {
                    found = Some(idx);
                    break;
                }
                if stats.states_expanded >= max_states {
                    return Err(PlanError::BudgetExhausted { expanded: stats.states_expanded });
                }
                for (m, next) in successors(&nodes[idx].config, rules) {
                    let next_key = criterion.key(&next);
                    let g2 = g + 1;
                    match best.get(&next_key) {
                        Some(&(old, closed)) if closed || old <= g2 => continue,
                        _ => {}
                    }
                    best.insert(next_key, (g2, false));
                    let h2 = h(&next);
                    nodes.push(Node { config: next, parent: Some((idx, m)) });
                    seq += 1;
                    heap.push(Reverse((g2 + h2, h2, seq, nodes.len() - 1, g2)));
                }
                stats.frontier_peak = stats.frontier_peak.max(heap.len());
            }
            found
        }
    };

    let Some(mut idx) = found else {
        return Err(PlanError::NoPath(NoPathReason::Unreachable { explored: stats.states_expanded }));
    };
    let mut moves = Vec::new();
    while let Some((parent, m)) = nodes[idx].parent {
        moves.push(m);
        idx = parent;
    }
    moves.reverse();
    stats.wall_time = started.elapsed();
    Ok(Plan { moves, goal: goal.clone(), criterion, rules, stats })
}

/// Applies the plan's moves in order and checks the result against its goal.
pub fn replay(start: &Configuration, p: &Plan) -> Result<Configuration, ReplayError> {
    let end = replay_moves(start, &p.moves, p.rules)?;
    if p.criterion.matches(&end, &p.goal) {
        Ok(end)
    } else {
        Err(ReplayError::GoalMismatch)
    }
}

/// Applies moves in order, failing on the first illegal one.
pub fn replay_moves(start: &Configuration, moves: &[PivotMove], rules: MoveRules) -> Result<Configuration, ReplayError> {
    let mut c = start.clone();
    for (index, m) in moves.iter().enumerate() {
        c = apply_move_with(&c, m, rules).map_err(|e| match e {
            crate::kinematics::KinematicsError::IllegalMove(legality) => ReplayError::IllegalMove { index, legality },
            _ => unreachable!("apply_move only reports legality failures"),
        })?;
    }
    Ok(c)
}
