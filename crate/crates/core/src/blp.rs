//! The binary program whose optimal points are CS- and EM-compatible
//! reaction-to-reaction graphs with the fewest edges, and a depth-first
//! branch-and-bound solver for it.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::deadline::{Deadline, TimedOut};
use crate::crn::Crn;
use crate::efm::FluxModeAnalysis;
use crate::r2r::R2RGraph;

/// Modes of at most this size get their subcycle rows up front; larger
/// modes are handled by cuts generated at leaves.
pub const EAGER_SUBCYCLE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowKind {
    SharedSource { family: usize, from: usize },
    ModeEdgeCount { mode: usize },
    ModeOut { mode: usize, vertex: usize },
    ModeIn { mode: usize, vertex: usize },
    Subcycle { mode: usize },
}

impl RowKind {
    fn tag(&self) -> String {
        match self {
            RowKind::SharedSource { family, from } => format!("cs_f{family}_k{from}"),
            RowKind::ModeEdgeCount { mode } => format!("em1_count_e{mode}"),
            RowKind::ModeOut { mode, vertex } => format!("em1_out_e{mode}_r{vertex}"),
            RowKind::ModeIn { mode, vertex } => format!("em1_in_e{mode}_r{vertex}"),
            RowKind::Subcycle { mode } => format!("em2_e{mode}"),
        }
    }
}

/// A linear row over binary variables with coefficients in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub kind: RowKind,
    pub terms: Vec<(usize, i8)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone)]
pub struct BlpInstance {
    pub reaction_count: usize,
    /// Candidate edges, sorted; position is the variable index.
    pub variables: Vec<(usize, usize)>,
    pub constraints: Vec<Constraint>,
    /// Mode supports, in analysis order.
    pub modes: Vec<Vec<usize>>,
    /// Modes whose subcycle exclusion is enforced by leaf cuts.
    pub lazy_modes: Vec<usize>,
    /// Per variable: `|y_p(i) - y_s(j)|_1`, scaled to integers. Used only to
    /// break ties between minimum-edge solutions.
    pub weights: Vec<i64>,
    index: HashMap<(usize, usize), usize>,
}

impl BlpInstance {
    pub fn variable(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    /// Plain-text dump, one constraint per line, variables named `x_i_j`.
    pub fn to_lp_string(&self) -> String {
        let name = |v: usize| {
            let (i, j) = self.variables[v];
            format!("x_{i}_{j}")
        };
        let mut out = String::new();
        out.push_str("minimize\n obj:");
        for v in 0..self.variables.len() {
            let _ = write!(out, " {}{}", if v == 0 { "" } else { "+ " }, name(v));
        }
        out.push_str("\nsubject to\n");
        for (c, row) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{}_{}:", c, row.kind.tag());
            if row.terms.is_empty() {
                out.push_str(" 0");
            }
            for (t, &(v, coef)) in row.terms.iter().enumerate() {
                let sign = match (t, coef > 0) {
                    (0, true) => "",
                    (0, false) => "-",
                    (_, true) => "+ ",
                    (_, false) => "- ",
                };
                let _ = write!(out, " {}{}", sign, name(v));
            }
            let op = match row.sense {
                Sense::Eq => "=",
                Sense::Le => "<=",
            };
            let _ = writeln!(out, " {} {}", op, row.rhs);
        }
        out.push_str("binary\n");
        for v in 0..self.variables.len() {
            let _ = writeln!(out, " {}", name(v));
        }
        out.push_str("end\n");
        out
    }
}

/// Sets up variables and rows from a unitary, covering mode analysis.
///
/// A pair gets a variable when both reactions occur together in some mode
/// support, or when a shared-source row demands it; every other pair is the
/// constant 0.
pub fn build_instance(analysis: &FluxModeAnalysis, crn: &Crn) -> BlpInstance {
    let r = analysis.reaction_count;
    let modes: Vec<Vec<usize>> = analysis.modes.iter().map(|m| m.support.clone()).collect();
    let family = &analysis.shared_source_family;

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for supp in &modes {
        for &i in supp {
            for &j in supp {
                if i != j {
                    pairs.insert((i, j));
                }
            }
        }
    }
    let mut member_of: Vec<Vec<usize>> = vec![Vec::new(); r];
    for (l, f) in family.iter().enumerate() {
        for &i in f {
            member_of[i].push(l);
        }
    }
    let mut work: Vec<(usize, usize)> = pairs.iter().copied().collect();
    while let Some((k, i)) = work.pop() {
        for &l in &member_of[i] {
            for &j in &family[l] {
                if j != k && pairs.insert((k, j)) {
                    work.push((k, j));
                }
            }
        }
    }

    let variables: Vec<(usize, usize)> = pairs.into_iter().collect();
    let index: HashMap<(usize, usize), usize> =
        variables.iter().enumerate().map(|(v, &p)| (p, v)).collect();
    let mut constraints = Vec::new();

    for (l, f) in family.iter().enumerate() {
        for k in 0..r {
            let vars: Vec<Option<usize>> = f.iter().map(|&i| index.get(&(k, i)).copied()).collect();
            if vars.iter().all(Option::is_none) {
                continue;
            }
            for w in vars.windows(2) {
                let terms: Vec<(usize, i8)> = match (w[0], w[1]) {
                    (Some(a), Some(b)) => vec![(a, 1), (b, -1)],
                    (Some(a), None) => vec![(a, 1)],
                    (None, Some(b)) => vec![(b, 1)],
                    (None, None) => continue,
                };
                constraints.push(Constraint {
                    kind: RowKind::SharedSource { family: l, from: k },
                    terms,
                    sense: Sense::Eq,
                    rhs: 0,
                });
            }
        }
    }

    let mut lazy_modes = Vec::new();
    for (e, supp) in modes.iter().enumerate() {
        let within = |a: &[usize]| -> Vec<(usize, i8)> {
            let mut t = Vec::new();
            for &i in a {
                for &j in a {
                    if i != j {
                        t.push((index[&(i, j)], 1));
                    }
                }
            }
            t.sort_unstable();
            t
        };
        constraints.push(Constraint {
            kind: RowKind::ModeEdgeCount { mode: e },
            terms: within(supp),
            sense: Sense::Eq,
            rhs: supp.len() as i64,
        });
        for &i in supp {
            let terms = supp.iter().filter(|&&j| j != i).map(|&j| (index[&(i, j)], 1)).collect();
            constraints.push(Constraint {
                kind: RowKind::ModeOut { mode: e, vertex: i },
                terms,
                sense: Sense::Eq,
                rhs: 1,
            });
        }
        for &j in supp {
            let terms = supp.iter().filter(|&&i| i != j).map(|&i| (index[&(i, j)], 1)).collect();
            constraints.push(Constraint {
                kind: RowKind::ModeIn { mode: e, vertex: j },
                terms,
                sense: Sense::Eq,
                rhs: 1,
            });
        }
        let l = supp.len();
        if l > EAGER_SUBCYCLE_LIMIT {
            lazy_modes.push(e);
        } else if l >= 4 {
            for size in 2..=l / 2 {
                for subset in combinations(supp, size) {
                    constraints.push(Constraint {
                        kind: RowKind::Subcycle { mode: e },
                        terms: within(&subset),
                        sense: Sense::Le,
                        rhs: size as i64 - 1,
                    });
                }
            }
        }
    }

    let weights = offset_weights(crn, &variables);
    BlpInstance {
        reaction_count: r,
        weights,
        variables,
        constraints,
        modes,
        lazy_modes,
        index,
    }
}

fn offset_weights(crn: &Crn, variables: &[(usize, usize)]) -> Vec<i64> {
    let norms: Vec<BigRational> = variables
        .iter()
        .map(|&(i, j)| {
            crn.product(i)
                .sub(crn.source(j))
                .coeffs()
                .iter()
                .map(|q| q.abs())
                .sum()
        })
        .collect();
    let scale = norms
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    norms
        .iter()
        .map(|q| {
            (q * BigRational::from(scale.clone()))
                .to_integer()
                .to_i64()
                .unwrap_or(i64::MAX / 4)
        })
        .collect()
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for t in start..items.len() {
            if items.len() - t < k - cur.len() {
                break;
            }
            cur.push(items[t]);
            rec(items, k, t + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub variables: usize,
    pub constraints: usize,
    pub nodes: u64,
    pub lazy_cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlpSolution {
    pub graph: R2RGraph,
    /// Number of edges.
    pub objective: usize,
    /// Total translation offset of the chosen edges.
    pub offset_weight: i64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlpOutcome {
    Optimal(BlpSolution),
    Infeasible(SolveStats),
}

/// Minimum-edge solution. Ties are broken first by the smallest total
/// offset weight, then by the lexicographically smallest sorted edge list.
pub fn solve(inst: &BlpInstance, deadline: &Deadline) -> Result<BlpOutcome, TimedOut> {
    let n = inst.variables.len();
    let mut s = Search::new(inst, *deadline);

    let edges = vec![1i64; n];
    s.run(Phase::Minimize, edges.clone())?;
    let Some(opt_edges) = s.best else {
        return Ok(BlpOutcome::Infeasible(s.stats()));
    };
    s.add_row((0..n).map(|v| (v, 1)).collect(), Sense::Le, opt_edges);

    s.run(Phase::Minimize, inst.weights.clone())?;
    let opt_weight = s
        .best
        .expect("edge-optimal points exist, so the weight pass finds one");
    s.add_row(
        (0..n).filter(|&v| inst.weights[v] != 0).map(|v| (v, inst.weights[v])).collect(),
        Sense::Le,
        opt_weight,
    );

    s.run(Phase::Select, edges)?;
    let values = s
        .solution
        .clone()
        .expect("an optimum found earlier must be reachable in the selection pass");
    let graph = R2RGraph::from_edges(
        inst.reaction_count,
        values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1)
            .map(|(v, _)| inst.variables[v]),
    );
    Ok(BlpOutcome::Optimal(BlpSolution {
        objective: graph.edge_count(),
        offset_weight: opt_weight,
        graph,
        stats: s.stats(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Zero-first search for the minimum of the current objective.
    Minimize,
    /// One-first search for the first feasible point.
    Select,
}

#[derive(Debug, Clone)]
struct RowState {
    sense: Sense,
    rhs: i64,
    act: i64,
    free_pos: i64,
    free_neg: i64,
    max_abs: i64,
}

const FREE: i8 = -1;

struct Search<'a> {
    inst: &'a BlpInstance,
    deadline: Deadline,
    terms: Vec<Vec<(usize, i64)>>,
    rows: Vec<RowState>,
    adj: Vec<Vec<(usize, i64)>>,
    value: Vec<i8>,
    trail: Vec<usize>,
    queue: Vec<usize>,
    cut_rows: Vec<usize>,
    out_rows: Vec<(usize, usize)>,
    in_rows: Vec<(usize, usize)>,
    need: Vec<i64>,
    objective: Vec<i64>,
    fixed_obj: i64,
    nodes: u64,
    cuts: usize,
    best: Option<i64>,
    solution: Option<Vec<i8>>,
    phase: Phase,
}

impl<'a> Search<'a> {
    fn new(inst: &'a BlpInstance, deadline: Deadline) -> Self {
        let n = inst.variables.len();
        let mut s = Search {
            inst,
            deadline,
            terms: Vec::new(),
            rows: Vec::new(),
            adj: vec![Vec::new(); n],
            value: vec![FREE; n],
            trail: Vec::new(),
            queue: Vec::new(),
            cut_rows: Vec::new(),
            out_rows: Vec::new(),
            in_rows: Vec::new(),
            need: vec![0; inst.reaction_count],
            objective: vec![0; n],
            fixed_obj: 0,
            nodes: 0,
            cuts: 0,
            best: None,
            solution: None,
            phase: Phase::Minimize,
        };
        for c in &inst.constraints {
            let terms = c.terms.iter().map(|&(v, k)| (v, k as i64)).collect();
            let id = s.add_row(terms, c.sense, c.rhs);
            match c.kind {
                RowKind::ModeOut { vertex, .. } => s.out_rows.push((vertex, id)),
                RowKind::ModeIn { vertex, .. } => s.in_rows.push((vertex, id)),
                _ => {}
            }
        }
        s
    }

    fn stats(&self) -> SolveStats {
        SolveStats {
            variables: self.inst.variables.len(),
            constraints: self.inst.constraints.len(),
            nodes: self.nodes,
            lazy_cuts: self.cuts,
        }
    }

    /// Adds a row, initialising its activity from the current assignment.
    fn add_row(&mut self, terms: Vec<(usize, i64)>, sense: Sense, rhs: i64) -> usize {
        let id = self.rows.len();
        let mut st = RowState {
            sense,
            rhs,
            act: 0,
            free_pos: 0,
            free_neg: 0,
            max_abs: terms.iter().map(|t| t.1.abs()).max().unwrap_or(0),
        };
        for &(v, c) in &terms {
            self.adj[v].push((id, c));
            match self.value[v] {
                FREE if c > 0 => st.free_pos += c,
                FREE => st.free_neg -= c,
                1 => st.act += c,
                _ => {}
            }
        }
        self.rows.push(st);
        self.terms.push(terms);
        id
    }

    fn assign(&mut self, v: usize, val: i8) {
        debug_assert_eq!(self.value[v], FREE);
        self.value[v] = val;
        self.trail.push(v);
        if val == 1 {
            self.fixed_obj += self.objective[v];
        }
        for &(r, c) in &self.adj[v] {
            let row = &mut self.rows[r];
            if c > 0 {
                row.free_pos -= c;
            } else {
                row.free_neg += c;
            }
            if val == 1 {
                row.act += c;
            }
            self.queue.push(r);
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let val = self.value[v];
            if val == 1 {
                self.fixed_obj -= self.objective[v];
            }
            for &(r, c) in &self.adj[v] {
                let row = &mut self.rows[r];
                if c > 0 {
                    row.free_pos += c;
                } else {
                    row.free_neg -= c;
                }
                if val == 1 {
                    row.act -= c;
                }
            }
            self.value[v] = FREE;
        }
        self.queue.clear();
    }

    /// Bound propagation; false on conflict.
    fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            let row = &self.rows[r];
            let lo = row.act - row.free_neg;
            let hi = row.act + row.free_pos;
            let eq = row.sense == Sense::Eq;
            let rhs = row.rhs;
            if lo > rhs || (eq && hi < rhs) {
                self.queue.clear();
                return false;
            }
            if row.free_pos + row.free_neg == 0
                || (lo + row.max_abs <= rhs && (!eq || hi - row.max_abs >= rhs))
            {
                continue;
            }
            for t in 0..self.terms[r].len() {
                let (v, c) = self.terms[r][t];
                if self.value[v] != FREE {
                    continue;
                }
                let a = c.abs();
                // Setting a positive term to 1, or a negative term to 0,
                // raises the minimum activity by |c|.
                if lo + a > rhs {
                    self.assign(v, if c > 0 { 0 } else { 1 });
                } else if eq && hi - a < rhs {
                    self.assign(v, if c > 0 { 1 } else { 0 });
                }
            }
        }
        true
    }

    /// Fixed objective plus, for every vertex still lacking an out-edge
    /// (or in-edge), the cheapest free candidate of its row.
    fn lower_bound(&mut self) -> i64 {
        let mut best_side = 0;
        let mut need = std::mem::take(&mut self.need);
        for side in [&self.out_rows, &self.in_rows] {
            need.iter_mut().for_each(|x| *x = 0);
            for &(vertex, r) in side.iter() {
                if self.rows[r].act != 0 {
                    continue;
                }
                let cheapest = self.terms[r]
                    .iter()
                    .filter(|&&(v, _)| self.value[v] == FREE)
                    .map(|&(v, _)| self.objective[v])
                    .min()
                    .unwrap_or(0);
                need[vertex] = need[vertex].max(cheapest);
            }
            best_side = best_side.max(need.iter().sum::<i64>());
        }
        self.need = need;
        self.fixed_obj + best_side
    }

    fn run(&mut self, phase: Phase, objective: Vec<i64>) -> Result<(), TimedOut> {
        self.undo_to(0);
        self.phase = phase;
        self.objective = objective;
        self.fixed_obj = 0;
        self.best = None;
        self.solution = None;
        self.queue = (0..self.rows.len()).collect();
        let out = self.dfs();
        self.undo_to(0);
        out
    }

    fn done(&self) -> bool {
        self.phase == Phase::Select && self.solution.is_some()
    }

    fn dfs(&mut self) -> Result<(), TimedOut> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(128) {
            self.deadline.check()?;
        }
        self.queue.extend(self.cut_rows.iter().copied());
        if !self.propagate() {
            return Ok(());
        }
        if self.phase == Phase::Minimize {
            let lb = self.lower_bound();
            if self.best.is_some_and(|b| lb >= b) {
                return Ok(());
            }
        }
        let Some(v) = self.value.iter().position(|&x| x == FREE) else {
            self.leaf();
            return Ok(());
        };
        let order: [i8; 2] = match self.phase {
            Phase::Minimize => [0, 1],
            Phase::Select => [1, 0],
        };
        for val in order {
            let mark = self.trail.len();
            self.assign(v, val);
            self.dfs()?;
            self.undo_to(mark);
            if self.done() {
                break;
            }
        }
        Ok(())
    }

    fn leaf(&mut self) {
        if self.add_subcycle_cuts() {
            return;
        }
        match self.phase {
            Phase::Minimize => self.best = Some(self.fixed_obj),
            Phase::Select => self.solution = Some(self.value.clone()),
        }
    }

    /// Checks large modes for short cycles at a full assignment; each one
    /// found becomes a permanent row. True if any were added.
    fn add_subcycle_cuts(&mut self) -> bool {
        let inst = self.inst;
        let mut added = false;
        for &e in &inst.lazy_modes {
            let supp = &inst.modes[e];
            let mut next: HashMap<usize, usize> = HashMap::new();
            for &i in supp {
                for &j in supp {
                    if i != j && self.value[inst.index[&(i, j)]] == 1 {
                        next.insert(i, j);
                    }
                }
            }
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            for &start in supp {
                if seen.contains(&start) {
                    continue;
                }
                let mut cycle = vec![start];
                seen.insert(start);
                let mut cur = next[&start];
                while cur != start {
                    seen.insert(cur);
                    cycle.push(cur);
                    cur = next[&cur];
                }
                if cycle.len() < supp.len() {
                    cycle.sort_unstable();
                    let mut terms = Vec::new();
                    for &i in &cycle {
                        for &j in &cycle {
                            if i != j {
                                terms.push((inst.index[&(i, j)], 1));
                            }
                        }
                    }
                    terms.sort_unstable();
                    let id = self.add_row(terms, Sense::Le, cycle.len() as i64 - 1);
                    self.cut_rows.push(id);
                    self.cuts += 1;
                    added = true;
                }
            }
        }
        added
    }
}
