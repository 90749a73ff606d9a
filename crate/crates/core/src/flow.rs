//! Bipartite assignment by successive shortest paths, with an exhaustive
//! oracle for testing.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use crate::error::{Error, Result};

/// Real costs are multiplied by this before rounding to integers.
pub const COST_SCALE: f64 = 1024.0;

/// Integer cost used by the solver: `cost * 1024`, rounded half to even.
pub fn scale_cost(cost: f64) -> i64 {
    (cost * COST_SCALE).round_ties_even() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub left: usize,
    pub right: usize,
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssignmentProblem {
    pub n_left: usize,
    pub n_right: usize,
    pub arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Right index chosen for every left item.
    pub matching: Vec<usize>,
    pub total_cost: i64,
}

impl AssignmentProblem {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        AssignmentProblem {
            n_left,
            n_right,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, left: usize, right: usize, cost: i64) {
        self.arcs.push(Arc { left, right, cost });
    }

    fn validate(&self) -> Result<()> {
        for a in &self.arcs {
            if a.left >= self.n_left || a.right >= self.n_right {
                return Err(Error::InvalidArgument(format!(
                    "arc ({}, {}) outside a {} x {} problem",
                    a.left, a.right, self.n_left, self.n_right
                )));
            }
            if a.cost < 0 {
                return Err(Error::InvalidArgument(format!("negative arc cost {}", a.cost)));
            }
        }
        Ok(())
    }

    /// Cheapest arc per (left, right) pair, grouped by left in right order.
    fn dedup(&self) -> Vec<Vec<(usize, i64)>> {
        let mut best: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for a in &self.arcs {
            let c = best.entry((a.left, a.right)).or_insert(a.cost);
            *c = (*c).min(a.cost);
        }
        let mut out = vec![Vec::new(); self.n_left];
        for ((l, r), c) in best {
            out[l].push((r, c));
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    rev: usize,
    cap: i32,
    cost: i64,
}

struct Graph {
    adj: Vec<Vec<Edge>>,
}

impl Graph {
    fn add(&mut self, from: usize, to: usize, cost: i64) -> (usize, usize) {
        let a = self.adj[from].len();
        let b = self.adj[to].len();
        self.adj[from].push(Edge { to, rev: b, cap: 1, cost });
        self.adj[to].push(Edge { to: from, rev: a, cap: 0, cost: -cost });
        (from, a)
    }

    fn push(&mut self, from: usize, e: usize) {
        let (to, rev) = (self.adj[from][e].to, self.adj[from][e].rev);
        self.adj[from][e].cap -= 1;
        self.adj[to][rev].cap += 1;
    }
}

/// Minimum-cost perfect matching of every left item.
///
/// Among optimal matchings the lexicographically smallest assignment vector
/// is returned. Errors with `Unmatchable` naming the lowest left index left
/// unmatched when no perfect matching exists.
pub fn solve_assignment(problem: &AssignmentProblem) -> Result<Assignment> {
    problem.validate()?;
    let (nl, nr) = (problem.n_left, problem.n_right);
    let arcs = problem.dedup();
    if let Some(l) = arcs.iter().position(|a| a.is_empty()) {
        return Err(Error::Unmatchable { left: l });
    }
    let s = 0;
    let t = nl + nr + 1;
    let left = |i: usize| 1 + i;
    let right = |j: usize| 1 + nl + j;
    let mut g = Graph {
        adj: vec![Vec::new(); t + 1],
    };
    for i in 0..nl {
        g.add(s, left(i), 0);
    }
    for (i, list) in arcs.iter().enumerate() {
        for &(j, c) in list {
            g.add(left(i), right(j), c);
        }
    }
    for j in 0..nr {
        g.add(right(j), t, 0);
    }

    // Reduced cost of a residual edge u -> v is cost + dual[u] - dual[v] >= 0.
    let n = t + 1;
    let mut dual = vec![0i64; n];
    let mut dist = vec![i64::MAX; n];
    let mut prev: Vec<(usize, usize)> = vec![(usize::MAX, 0); n];
    let mut done = vec![false; n];
    let mut flow = 0;
    while flow < nl {
        dist.fill(i64::MAX);
        done.fill(false);
        dist[s] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == t {
                break;
            }
            for (k, e) in g.adj[u].iter().enumerate() {
                if e.cap == 0 || done[e.to] {
                    continue;
                }
                let nd = d + e.cost + dual[u] - dual[e.to];
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = (u, k);
                    heap.push(Reverse((nd, e.to)));
                }
            }
        }
        if !done[t] {
            break;
        }
        for v in 0..n {
            if done[v] {
                dual[v] -= dist[t] - dist[v];
            }
        }
        let mut v = t;
        while v != s {
            let (u, k) = prev[v];
            g.push(u, k);
            v = u;
        }
        flow += 1;
    }

    let mate_of = |g: &Graph, i: usize| {
        g.adj[left(i)]
            .iter()
            .find(|e| e.to != s && e.cap == 0 && e.cost >= 0)
            .map(|e| e.to - 1 - nl)
    };
    if flow < nl {
        let l = (0..nl).find(|&i| mate_of(&g, i).is_none()).unwrap_or(0);
        return Err(Error::Unmatchable { left: l });
    }

    // Lexicographic tie-break: for each left in order, move it to the
    // smallest right reachable through a zero reduced-cost cycle that leaves
    // earlier lefts untouched.
    let reduced = |dual: &[i64], u: usize, e: &Edge| e.cost + dual[u] - dual[e.to];
    for i in 0..nl {
        let j0 = mate_of(&g, i).expect("perfect matching");
        for ei in 0..g.adj[left(i)].len() {
            let e = &g.adj[left(i)][ei];
            if e.to == s || e.cap == 0 || e.to - 1 - nl >= j0 || reduced(&dual, left(i), e) != 0 {
                continue;
            }
            let j = e.to;
            // BFS from j to right(j0) on zero reduced-cost residual edges.
            let mut from: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[j] = true;
            let mut queue = VecDeque::from([j]);
            let target = right(j0);
            while let Some(u) = queue.pop_front() {
                if u == target {
                    break;
                }
                for (k, e) in g.adj[u].iter().enumerate() {
                    let v = e.to;
                    if e.cap == 0 || seen[v] || v == s || (v >= 1 && v <= left(i)) {
                        continue;
                    }
                    if reduced(&dual, u, e) != 0 {
                        continue;
                    }
                    seen[v] = true;
                    from[v] = Some((u, k));
                    queue.push_back(v);
                }
            }
            if !seen[target] {
                continue;
            }
            g.push(left(i), ei);
            let mut v = target;
            while let Some((u, k)) = from[v] {
                g.push(u, k);
                v = u;
            }
            let back = g.adj[target]
                .iter()
                .position(|e| e.to == left(i) && e.cap > 0)
                .expect("matched edge has a residual reverse");
            g.push(target, back);
            break;
        }
    }

    let mut matching = Vec::with_capacity(nl);
    let mut total_cost = 0;
    for i in 0..nl {
        let j = mate_of(&g, i).expect("perfect matching");
        total_cost += arcs[i].iter().find(|a| a.0 == j).unwrap().1;
        matching.push(j);
    }
    Ok(Assignment {
        matching,
        total_cost,
    })
}

/// Largest problem the oracle accepts.
pub const ORACLE_MAX_LEFT: usize = 9;

/// Exact optimum by exhaustive search over injections.
pub fn assignment_oracle(problem: &AssignmentProblem) -> Result<i64> {
    problem.validate()?;
    if problem.n_left > ORACLE_MAX_LEFT {
        return Err(Error::InvalidArgument(format!(
            "oracle handles at most {ORACLE_MAX_LEFT} left items, got {}",
            problem.n_left
        )));
    }
    let arcs = problem.dedup();
    fn go(i: usize, arcs: &[Vec<(usize, i64)>], used: &mut Vec<bool>, cost: i64, best: &mut Option<i64>) {
        if best.is_some_and(|b| cost >= b) && i < arcs.len() {
            return;
        }
        if i == arcs.len() {
            if best.map_or(true, |b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        for &(j, c) in &arcs[i] {
            if !used[j] {
                used[j] = true;
                go(i + 1, arcs, used, cost + c, best);
                used[j] = false;
            }
        }
    }
    let mut best = None;
    go(0, &arcs, &mut vec![false; problem.n_right], 0, &mut best);
    best.ok_or(Error::Unmatchable { left: 0 })
}
