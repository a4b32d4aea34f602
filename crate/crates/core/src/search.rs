//! Seeded backtracking search with counter propagation for [`ConstraintModel`]s.
//!
//! Every constraint keeps two counters: the committed weight (variables set to 1)
//! and the remaining weight (unassigned variables). With a bound of 2 these are
//! enough to derive every unit consequence:
//!
//! * a variable whose weight would push the committed weight past 2 is forced to 0;
//! * in a row equality, a variable without which the remaining weight cannot reach
//!   the deficit is forced to 1.
//!
//! The default branching picks the open row with the fewest ways to complete its
//! deficit and tries those completions in shuffled order. Randomised mode restarts
//! after a node budget that grows geometrically (or along the Luby sequence).

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ConstraintModel;

/// Generator behind every random choice of the search.
pub type SearchRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RestartSchedule {
    /// Budgets `base, base·factor, base·factor², …` nodes.
    Geometric { base: u64, factor: f64 },
    /// Budgets `unit · luby(k)` nodes.
    Luby { unit: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branching {
    RowPair,
    Activity,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub seed: u64,
    pub timeout: Duration,
    pub restart_schedule: RestartSchedule,
    pub branching: Branching,
    /// Nodes between checks of the stop signal and the clock.
    pub cancel_poll_interval: u64,
    /// Exhaustive mode refuses models with more variables than this.
    pub max_exhaustive_vars: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            timeout: Duration::from_secs(60),
            restart_schedule: RestartSchedule::Geometric {
                base: 1000,
                factor: 1.5,
            },
            branching: Branching::RowPair,
            cancel_poll_interval: 256,
            max_exhaustive_vars: 64,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig {
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::invalid("timeout must be positive"));
        }
        if self.cancel_poll_interval == 0 {
            return Err(Error::invalid("cancel poll interval must be positive"));
        }
        match self.restart_schedule {
            RestartSchedule::Geometric { base, factor } if base == 0 || !(factor >= 1.0) => Err(
                Error::invalid("geometric restarts need base > 0 and factor >= 1"),
            ),
            RestartSchedule::Luby { unit: 0 } => Err(Error::invalid("luby unit must be positive")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Sat,
    Timeout,
    Cancelled,
    Unsat,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Timeout => "timeout",
            SolveStatus::Cancelled => "cancelled",
            SolveStatus::Unsat => "unsat",
        }
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sat" => Ok(SolveStatus::Sat),
            "timeout" => Ok(SolveStatus::Timeout),
            "cancelled" => Ok(SolveStatus::Cancelled),
            "unsat" => Ok(SolveStatus::Unsat),
            other => Err(Error::invalid(format!("unknown status `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub assignment: Option<Vec<bool>>,
    /// Wall-clock seconds.
    pub elapsed: f64,
    /// Decisions taken.
    pub nodes: u64,
    pub restarts: u64,
    /// Decisions taken since the last poll that found the stop signal clear.
    pub nodes_since_clear_poll: u64,
}

/// `luby(i)` for `i >= 1`: 1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8, …
pub fn luby(i: u64) -> u64 {
    let mut i = i;
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

const UNASSIGNED: i8 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Relation {
    AtMost,
    Exactly,
}

struct Constraint {
    rel: Relation,
    terms: Vec<(u32, u32)>,
    max_weight: u32,
    total: u32,
}

#[derive(Clone, Copy)]
struct Counter {
    committed: u32,
    remaining: u32,
}

/// Validated constraint layout of one model, shared by any number of solvers.
pub struct Prepared<'m> {
    model: &'m ConstraintModel,
    cons: Vec<Constraint>,
    occurs: Vec<Vec<(u32, u32)>>,
    rows: Vec<usize>,
}

impl<'m> Prepared<'m> {
    pub fn new(model: &'m ConstraintModel) -> Result<Arc<Self>> {
        model.validate()?;
        let mut cons = Vec::with_capacity(model.num_constraints());
        let groups = [(Relation::AtMost, &model.at_most_2), (Relation::Exactly, &model.exactly_2)];
        for (rel, sums) in groups {
            for s in sums.iter() {
                cons.push(Constraint {
                    rel,
                    terms: s.terms.clone(),
                    max_weight: s.terms.iter().map(|&(_, w)| w).max().unwrap_or(0),
                    total: s.max_value(),
                });
            }
        }
        let mut occurs = vec![Vec::new(); model.num_vars];
        for (ci, c) in cons.iter().enumerate() {
            for &(v, w) in &c.terms {
                occurs[v as usize].push((ci as u32, w));
            }
        }
        let rows = (model.at_most_2.len()..cons.len()).collect();
        Ok(Arc::new(Prepared {
            model,
            cons,
            occurs,
            rows,
        }))
    }

    pub fn model(&self) -> &'m ConstraintModel {
        self.model
    }
}

enum Step {
    Solution,
    Exhausted,
    Restart,
    Paused,
    Stopped(SolveStatus),
}

enum Visit {
    Stop,
    Continue,
}

/// One open decision: candidate choices, next index, trail length before deciding.
struct Frame {
    choices: Vec<Vec<(u32, bool)>>,
    next: usize,
    mark: usize,
}

/// Search state over one model. Cheap to build; one per solve call.
struct Engine<'m> {
    shared: Arc<Prepared<'m>>,
    counts: Vec<Counter>,
    value: Vec<i8>,
    trail: Vec<u32>,
    qhead: usize,
    stack: Vec<Frame>,
    descend: bool,
    activity: Vec<f64>,
    bump: f64,
    rng: SearchRng,
    branching: Branching,
    nodes: u64,
    restarts: u64,
    poll_interval: u64,
    last_clear_poll: u64,
    deadline: Instant,
}

impl<'m> Engine<'m> {
    fn new(shared: Arc<Prepared<'m>>, cfg: &SearchConfig, launch: Instant) -> Self {
        let counts = shared
            .cons
            .iter()
            .map(|c| Counter {
                committed: 0,
                remaining: c.total,
            })
            .collect();
        let num_vars = shared.model.num_vars;
        Engine {
            shared,
            counts,
            value: vec![UNASSIGNED; num_vars],
            trail: Vec::with_capacity(num_vars),
            qhead: 0,
            stack: Vec::new(),
            descend: true,
            activity: vec![0.0; num_vars],
            bump: 1.0,
            rng: SearchRng::seed_from_u64(cfg.seed),
            branching: cfg.branching,
            nodes: 0,
            restarts: 0,
            poll_interval: cfg.cancel_poll_interval,
            last_clear_poll: 0,
            deadline: launch + cfg.timeout,
        }
    }

    fn assign(&mut self, var: u32, val: bool) {
        assign(&self.shared, &mut self.value, &mut self.trail, &mut self.counts, var, val);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            let v = var as usize;
            let val = self.value[v] == 1;
            self.value[v] = UNASSIGNED;
            for &(ci, w) in &self.shared.occurs[v] {
                let c = &mut self.counts[ci as usize];
                c.remaining += w;
                if val {
                    c.committed -= w;
                }
            }
        }
        self.qhead = self.qhead.min(mark);
    }

    /// Applies forced assignments of one constraint. Returns false on conflict.
    fn check(&mut self, ci: usize) -> bool {
        let shared = &*self.shared;
        let con = &shared.cons[ci];
        let Counter { committed, remaining } = self.counts[ci];
        if committed > 2 {
            return false;
        }
        let exact = con.rel == Relation::Exactly;
        if exact && committed + remaining < 2 {
            return false;
        }
        let over = committed + con.max_weight > 2;
        let needed = exact && committed + remaining < 2 + con.max_weight;
        if !over && !needed {
            return true;
        }
        for &(v, w) in &con.terms {
            if self.value[v as usize] != UNASSIGNED {
                continue;
            }
            if committed + w > 2 {
                assign(shared, &mut self.value, &mut self.trail, &mut self.counts, v, false);
            } else if exact && committed + remaining - w < 2 {
                assign(shared, &mut self.value, &mut self.trail, &mut self.counts, v, true);
            }
        }
        let c = self.counts[ci];
        c.committed <= 2 && !(exact && c.committed + c.remaining < 2)
    }

    /// Propagates the trail from `qhead`. On conflict returns the failing constraint.
    fn propagate(&mut self) -> std::result::Result<(), usize> {
        let shared = Arc::clone(&self.shared);
        while self.qhead < self.trail.len() {
            let v = self.trail[self.qhead] as usize;
            self.qhead += 1;
            for &(ci, _) in &shared.occurs[v] {
                if !self.check(ci as usize) {
                    return Err(ci as usize);
                }
            }
        }
        Ok(())
    }

    fn root_propagate(&mut self) -> bool {
        for ci in 0..self.counts.len() {
            if !self.check(ci) {
                return false;
            }
        }
        self.propagate().is_ok()
    }

    fn on_conflict(&mut self, ci: usize) {
        if self.branching != Branching::Activity {
            return;
        }
        for &(v, _) in &self.shared.cons[ci].terms {
            self.activity[v as usize] += self.bump;
        }
        self.bump /= 0.95;
        if self.bump > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.bump *= 1e-100;
        }
    }

    /// Candidate decisions at the current node, or `None` when every variable is set.
    fn choices(&mut self) -> Option<Vec<Vec<(u32, bool)>>> {
        if self.branching == Branching::RowPair {
            if let Some(ch) = self.row_choices() {
                return Some(ch);
            }
        }
        self.var_choices()
    }

    fn row_choices(&mut self) -> Option<Vec<Vec<(u32, bool)>>> {
        let mut best: Option<(usize, u64)> = None;
        let mut ties = 0u32;
        let shared = &*self.shared;
        for &ci in &shared.rows {
            let c = self.counts[ci];
            if c.remaining == 0 {
                continue;
            }
            let deficit = 2 - c.committed;
            let (mut ones, mut twos) = (0u64, 0u64);
            for &(v, w) in &shared.cons[ci].terms {
                if self.value[v as usize] == UNASSIGNED {
                    match w {
                        1 => ones += 1,
                        2 => twos += 1,
                        _ => {}
                    }
                }
            }
            let combos = if deficit == 2 {
                twos + ones * ones.saturating_sub(1) / 2
            } else {
                ones
            };
            match best {
                Some((_, b)) if combos > b => {}
                Some((_, b)) if combos == b => {
                    ties += 1;
                    if self.rng.gen_range(0..=ties) == 0 {
                        best = Some((ci, combos));
                    }
                }
                _ => {
                    best = Some((ci, combos));
                    ties = 0;
                }
            }
        }
        let (ci, _) = best?;
        let deficit = 2 - self.counts[ci].committed;
        let open: Vec<(u32, u32)> = shared.cons[ci]
            .terms
            .iter()
            .copied()
            .filter(|&(v, _)| self.value[v as usize] == UNASSIGNED)
            .collect();
        let mut choices = Vec::new();
        for (a, &(va, wa)) in open.iter().enumerate() {
            if wa == deficit {
                choices.push(vec![(va, true)]);
            } else if wa < deficit {
                for &(vb, wb) in &open[a + 1..] {
                    if wa + wb == deficit {
                        choices.push(vec![(va, true), (vb, true)]);
                    }
                }
            }
        }
        // A row with no completion yields no choices, which backtracks.
        choices.shuffle(&mut self.rng);
        Some(choices)
    }

    fn var_choices(&mut self) -> Option<Vec<Vec<(u32, bool)>>> {
        let mut best: Option<usize> = None;
        let mut ties = 0u32;
        for v in 0..self.value.len() {
            if self.value[v] != UNASSIGNED {
                continue;
            }
            match best {
                Some(b) if self.activity[v] < self.activity[b] => {}
                Some(b) if self.activity[v] == self.activity[b] => {
                    ties += 1;
                    if self.rng.gen_range(0..=ties) == 0 {
                        best = Some(v);
                    }
                }
                _ => {
                    best = Some(v);
                    ties = 0;
                }
            }
        }
        let v = best? as u32;
        let first = self.rng.gen_bool(0.5);
        Some(vec![vec![(v, first)], vec![(v, !first)]])
    }

    fn poll(&mut self, stop: &AtomicBool) -> Option<SolveStatus> {
        if stop.load(Ordering::Acquire) {
            return Some(SolveStatus::Cancelled);
        }
        if Instant::now() >= self.deadline {
            return Some(SolveStatus::Timeout);
        }
        self.last_clear_poll = self.nodes;
        None
    }

    fn current_assignment(&self) -> Vec<bool> {
        self.value.iter().map(|&v| v == 1).collect()
    }

    /// Discards the open decisions and returns to the propagated root.
    fn reset_to(&mut self, root: usize) {
        self.stack.clear();
        self.undo_to(root);
        self.descend = true;
    }

    /// Continues the depth-first pass. Pauses before any decision once
    /// `self.nodes` reaches `slice_end`; asks for a restart once the pass has
    /// taken `budget` decisions since `pass_start`.
    fn run(
        &mut self,
        pass_start: u64,
        budget: Option<u64>,
        slice_end: u64,
        stop: &AtomicBool,
        visit: &mut dyn FnMut(&[bool]) -> Visit,
    ) -> Step {
        loop {
            if self.descend {
                self.descend = false;
                match self.choices() {
                    None => {
                        let assignment = self.current_assignment();
                        assert!(
                            self.shared.model.is_satisfied_by(&assignment),
                            "search produced an assignment violating the model"
                        );
                        if let Visit::Stop = visit(&assignment) {
                            return Step::Solution;
                        }
                    }
                    Some(choices) => self.stack.push(Frame {
                        choices,
                        next: 0,
                        mark: self.trail.len(),
                    }),
                }
            }
            let Some(top) = self.stack.last_mut() else {
                return Step::Exhausted;
            };
            let mark = top.mark;
            if top.next == top.choices.len() {
                self.stack.pop();
                self.undo_to(mark);
                continue;
            }
            if self.nodes >= slice_end {
                return Step::Paused;
            }
            if budget.is_some_and(|b| self.nodes - pass_start >= b) {
                return Step::Restart;
            }
            let top = self.stack.last_mut().unwrap();
            let choice = std::mem::take(&mut top.choices[top.next]);
            top.next += 1;
            self.undo_to(mark);

            self.nodes += 1;
            if self.nodes.is_multiple_of(self.poll_interval) {
                if let Some(status) = self.poll(stop) {
                    return Step::Stopped(status);
                }
            }

            let mut ok = true;
            for &(v, val) in &choice {
                match self.value[v as usize] {
                    UNASSIGNED => self.assign(v, val),
                    cur if (cur == 1) != val => {
                        ok = false;
                        break;
                    }
                    _ => {}
                }
            }
            if ok {
                match self.propagate() {
                    Ok(()) => self.descend = true,
                    Err(ci) => self.on_conflict(ci),
                }
            }
        }
    }
}

fn assign(
    shared: &Prepared,
    value: &mut [i8],
    trail: &mut Vec<u32>,
    counts: &mut [Counter],
    var: u32,
    val: bool,
) {
    let v = var as usize;
    debug_assert_eq!(value[v], UNASSIGNED);
    value[v] = val as i8;
    for &(ci, w) in &shared.occurs[v] {
        let c = &mut counts[ci as usize];
        c.remaining -= w;
        if val {
            c.committed += w;
        }
    }
    trail.push(var);
}

enum Phase {
    Fresh,
    Searching { root: usize, pass_start: u64 },
    Done,
}

/// A resumable search over one model.
///
/// [`Solver::resume`] advances the search by a bounded number of decisions, so
/// a single thread can interleave several independent solvers. Timing is
/// measured from the `launch` instant given at construction.
pub struct Solver<'m> {
    engine: Engine<'m>,
    schedule: Option<RestartSchedule>,
    launch: Instant,
    phase: Phase,
}

impl<'m> Solver<'m> {
    /// Randomised restarting solver.
    pub fn new(m: &'m ConstraintModel, cfg: &SearchConfig, launch: Instant) -> Result<Self> {
        cfg.validate()?;
        Self::with_prepared(Prepared::new(m)?, cfg, launch)
    }

    /// Randomised restarting solver over an already validated layout.
    pub fn with_prepared(shared: Arc<Prepared<'m>>, cfg: &SearchConfig, launch: Instant) -> Result<Self> {
        cfg.validate()?;
        Ok(Solver {
            engine: Engine::new(shared, cfg, launch),
            schedule: Some(cfg.restart_schedule),
            launch,
            phase: Phase::Fresh,
        })
    }

    /// Complete solver without restarts.
    pub fn exhaustive(m: &'m ConstraintModel, cfg: &SearchConfig, launch: Instant) -> Result<Self> {
        exhaustive_guard(m, cfg)?;
        Ok(Solver {
            engine: Engine::new(Prepared::new(m)?, cfg, launch),
            schedule: None,
            launch,
            phase: Phase::Fresh,
        })
    }

    pub fn nodes(&self) -> u64 {
        self.engine.nodes
    }

    fn pass_budget(&self) -> Option<u64> {
        let k = self.engine.restarts;
        self.schedule.map(|s| match s {
            RestartSchedule::Geometric { base, factor } => {
                let b = base as f64 * factor.powf(k as f64);
                if b >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    (b as u64).max(1)
                }
            }
            RestartSchedule::Luby { unit } => unit.saturating_mul(luby(k + 1)),
        })
    }

    fn outcome(&mut self, status: SolveStatus, assignment: Option<Vec<bool>>) -> SolveOutcome {
        self.phase = Phase::Done;
        SolveOutcome {
            status,
            assignment,
            elapsed: self.launch.elapsed().as_secs_f64(),
            nodes: self.engine.nodes,
            restarts: self.engine.restarts,
            nodes_since_clear_poll: self.engine.nodes - self.engine.last_clear_poll,
        }
    }

    /// Ends the search without taking further decisions.
    pub fn abandon(&mut self, status: SolveStatus) -> SolveOutcome {
        self.outcome(status, None)
    }

    /// Runs at most `max_nodes` further decisions (unbounded if `None`).
    /// Returns `None` while the search is still open.
    ///
    /// # Panics
    ///
    /// If called again after an outcome was returned.
    pub fn resume(&mut self, max_nodes: Option<u64>, stop: &AtomicBool) -> Option<SolveOutcome> {
        if let Phase::Fresh = self.phase {
            if let Some(status) = self.engine.poll(stop) {
                return Some(self.outcome(status, None));
            }
            if !self.engine.root_propagate() {
                return Some(self.outcome(SolveStatus::Unsat, None));
            }
            self.phase = Phase::Searching {
                root: self.engine.trail.len(),
                pass_start: 0,
            };
        }
        let Phase::Searching { root, mut pass_start } = self.phase else {
            panic!("resume called on a finished solver");
        };
        let slice_end = max_nodes.map_or(u64::MAX, |k| self.engine.nodes.saturating_add(k));
        loop {
            let budget = self.pass_budget();
            let mut found = None;
            let step = self.engine.run(pass_start, budget, slice_end, stop, &mut |a| {
                found = Some(a.to_vec());
                Visit::Stop
            });
            match step {
                Step::Solution => return Some(self.outcome(SolveStatus::Sat, found)),
                Step::Exhausted => return Some(self.outcome(SolveStatus::Unsat, None)),
                Step::Stopped(status) => return Some(self.outcome(status, None)),
                Step::Paused => {
                    self.phase = Phase::Searching { root, pass_start };
                    return None;
                }
                Step::Restart => {
                    self.engine.reset_to(root);
                    self.engine.restarts += 1;
                    pass_start = self.engine.nodes;
                }
            }
        }
    }
}

/// Randomised restarting search. Returns sat with a verified assignment, or
/// timeout/cancelled; unsat only if a pass exhausted the whole tree.
///
/// The clock starts once the model has been compiled.
pub fn solve(m: &ConstraintModel, cfg: &SearchConfig, stop: &AtomicBool) -> Result<SolveOutcome> {
    let shared = Prepared::new(m)?;
    let mut solver = Solver::with_prepared(shared, cfg, Instant::now())?;
    Ok(solver.resume(None, stop).expect("unbounded resume always finishes"))
}

fn exhaustive_guard(m: &ConstraintModel, cfg: &SearchConfig) -> Result<()> {
    cfg.validate()?;
    if m.num_vars > cfg.max_exhaustive_vars {
        return Err(Error::invalid(format!(
            "exhaustive search over {} variables exceeds the limit of {}",
            m.num_vars, cfg.max_exhaustive_vars
        )));
    }
    Ok(())
}

/// Complete search without restarts: sat with a witness, or unsat once the tree is exhausted.
pub fn solve_exhaustive(m: &ConstraintModel, cfg: &SearchConfig) -> Result<SolveOutcome> {
    let stop = AtomicBool::new(false);
    let mut solver = Solver::exhaustive(m, cfg, Instant::now())?;
    Ok(solver.resume(None, &stop).expect("unbounded resume always finishes"))
}

/// Every satisfying assignment, found by exhausting the search tree.
///
/// Branches at each node are pairwise disjoint, so each solution is reported once.
pub fn enumerate_solutions(m: &ConstraintModel, cfg: &SearchConfig) -> Result<Vec<Vec<bool>>> {
    exhaustive_guard(m, cfg)?;
    let stop = AtomicBool::new(false);
    let mut engine = Engine::new(Prepared::new(m)?, cfg, Instant::now());
    let mut all = Vec::new();
    if !engine.root_propagate() {
        return Ok(all);
    }
    let step = engine.run(0, None, u64::MAX, &stop, &mut |a| {
        all.push(a.to_vec());
        Visit::Continue
    });
    match step {
        Step::Stopped(SolveStatus::Timeout) => Err(Error::invalid("enumeration timed out")),
        _ => Ok(all),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_direct, build_reduced, LinearSum};

    fn brute_force(m: &ConstraintModel) -> Vec<Vec<bool>> {
        assert!(m.num_vars <= 20);
        (0u32..1 << m.num_vars)
            .map(|mask| (0..m.num_vars).map(|k| mask >> k & 1 == 1).collect::<Vec<bool>>())
            .filter(|a| m.is_satisfied_by(a))
            .collect()
    }

    fn never() -> AtomicBool {
        AtomicBool::new(false)
    }

    #[test]
    fn luby_sequence() {
        let got: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn two_by_two_fills_the_grid() {
        let m = build_direct(2).unwrap();
        for seed in 0..5 {
            let out = solve(&m, &SearchConfig::with_seed(seed), &never()).unwrap();
            assert_eq!(out.status, SolveStatus::Sat);
            assert_eq!(out.assignment.unwrap(), vec![true; 4]);
        }
        let out = solve_exhaustive(&m, &SearchConfig::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Sat);
    }

    #[test]
    fn three_by_three_has_six_points() {
        let m = build_direct(3).unwrap();
        for seed in 0..8 {
            let out = solve(&m, &SearchConfig::with_seed(seed), &never()).unwrap();
            assert_eq!(out.status, SolveStatus::Sat);
            assert_eq!(out.assignment.unwrap().iter().filter(|&&x| x).count(), 6);
        }
    }

    #[test]
    fn forced_collinear_triple_is_unsat() {
        let mut m = build_direct(3).unwrap();
        for v in [0u32, 4, 8] {
            m.exactly_2.push(LinearSum::new(vec![(v, 2)]));
        }
        let out = solve_exhaustive(&m, &SearchConfig::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
        let out = solve(&m, &SearchConfig::default(), &never()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let mut models = vec![build_direct(2).unwrap(), build_direct(3).unwrap(), build_direct(4).unwrap()];
        models.extend((2..=8).map(|n| build_reduced(n).unwrap()));
        for m in models {
            if m.num_vars > 16 {
                continue;
            }
            let mut expect = brute_force(&m);
            for branching in [Branching::RowPair, Branching::Activity] {
                let cfg = SearchConfig {
                    branching,
                    ..SearchConfig::with_seed(3)
                };
                let mut got = enumerate_solutions(&m, &cfg).unwrap();
                assert_eq!(got.len(), expect.len(), "n = {} {:?}", m.n, m.kind);
                got.sort();
                expect.sort();
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn exhaustive_guard_applies() {
        let m = build_direct(9).unwrap();
        assert!(matches!(
            solve_exhaustive(&m, &SearchConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
        let cfg = SearchConfig {
            max_exhaustive_vars: 81,
            ..Default::default()
        };
        assert_eq!(solve_exhaustive(&m, &cfg).unwrap().status, SolveStatus::Sat);
    }

    #[test]
    fn exhaustive_is_deterministic() {
        let m = build_reduced(14).unwrap();
        let cfg = SearchConfig::with_seed(11);
        let a = solve_exhaustive(&m, &cfg).unwrap();
        let b = solve_exhaustive(&m, &cfg).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn rejects_malformed_input() {
        let mut m = build_direct(3).unwrap();
        m.at_most_2.push(LinearSum::unit([0, 1, 100]));
        assert!(solve(&m, &SearchConfig::default(), &never()).is_err());
        let cfg = SearchConfig {
            timeout: Duration::ZERO,
            ..Default::default()
        };
        assert!(solve(&build_direct(3).unwrap(), &cfg, &never()).is_err());
    }

    #[test]
    fn preset_stop_cancels() {
        let stop = AtomicBool::new(true);
        let out = solve(&build_reduced(10).unwrap(), &SearchConfig::default(), &stop).unwrap();
        assert_eq!(out.status, SolveStatus::Cancelled);
        assert!(out.assignment.is_none());
    }

    #[test]
    fn reduced_ten_across_seeds() {
        let m = build_reduced(10).unwrap();
        for seed in 0..16 {
            let out = solve(&m, &SearchConfig::with_seed(seed), &never()).unwrap();
            assert_eq!(out.status, SolveStatus::Sat, "seed {seed}");
            assert_eq!(m.occupied_sites(&out.assignment.unwrap()).len(), 20);
        }
    }

    #[test]
    fn sliced_resume_matches_single_call() {
        let m = build_reduced(16).unwrap();
        let cfg = SearchConfig::with_seed(9);
        let whole = solve(&m, &cfg, &never()).unwrap();
        let mut solver = Solver::new(&m, &cfg, Instant::now()).unwrap();
        let stop = never();
        let sliced = loop {
            if let Some(out) = solver.resume(Some(7), &stop) {
                break out;
            }
        };
        assert_eq!(sliced.assignment, whole.assignment);
        assert_eq!(sliced.nodes, whole.nodes);
        assert_eq!(sliced.restarts, whole.restarts);
    }

    #[test]
    fn cancellation_observed_within_poll_interval() {
        let m = build_reduced(30).unwrap();
        let cfg = SearchConfig {
            cancel_poll_interval: 50,
            ..SearchConfig::with_seed(1)
        };
        let stop = never();
        let mut solver = Solver::new(&m, &cfg, Instant::now()).unwrap();
        if solver.resume(Some(123), &stop).is_none() {
            stop.store(true, Ordering::Release);
            let out = solver.resume(None, &stop).unwrap();
            assert_eq!(out.status, SolveStatus::Cancelled);
            assert!(out.nodes - 123 <= 50);
            assert!(out.nodes_since_clear_poll <= 50);
        }
    }

    #[test]
    fn luby_restarts_also_solve() {
        let m = build_reduced(12).unwrap();
        let cfg = SearchConfig {
            restart_schedule: RestartSchedule::Luby { unit: 64 },
            ..SearchConfig::with_seed(5)
        };
        assert_eq!(solve(&m, &cfg, &never()).unwrap().status, SolveStatus::Sat);
    }
}
