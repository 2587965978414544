//! Packing of paths into groups of vertex-disjoint paths.
//!
//! `P_ell(h)` is computed three independent ways: the closed-form recursion,
//! the round-based bin-removal procedure, and an exhaustive search over the
//! expanded graph. [`build_schedule`] produces the concrete per-round groups
//! used by the transmission scheme.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{AtomicNetworkSpec, ExpandedGraph, Node, PathId};

/// Default limit on the number of paths the exhaustive oracle accepts.
pub const DEFAULT_ORACLE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingCount {
    pub ell: usize,
    pub value: usize,
}

fn check_args(h: &[usize], ell: usize) -> Result<()> {
    if ell < 1 || ell > h.len() {
        return Err(Error::GroupSizeOutOfRange { ell, max: h.len() });
    }
    if h.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidSpec(format!("{h:?} is not sorted in descending order")));
    }
    Ok(())
}

/// Closed-form recursion for `P_ell(h)` on a descending vector. Zero entries
/// are allowed and stand for exhausted subgraphs.
pub fn packing_count_formula(h: &[usize], ell: usize) -> Result<usize> {
    check_args(h, ell)?;
    Ok(formula(h, ell))
}

fn formula(h: &[usize], ell: usize) -> usize {
    let total: usize = h.iter().sum();
    if ell == 1 {
        return total;
    }
    let rest = formula(&h[1..], ell - 1);
    if h[0] >= rest {
        rest
    } else {
        total / ell
    }
}

/// Outcome of the bin-removal procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinRun {
    pub rounds: usize,
    /// Bin contents after the last round, descending.
    pub residual: Vec<usize>,
}

/// Runs the bin-removal procedure: while at least `ell` bins are non-empty,
/// take one element from each of the `ell` fullest bins and re-sort.
pub fn run_bins(h: &[usize], ell: usize) -> Result<BinRun> {
    check_args(h, ell)?;
    let mut bins = h.to_vec();
    let mut rounds = 0;
    while bins.iter().filter(|&&b| b > 0).count() >= ell {
        for b in bins.iter_mut().take(ell) {
            *b -= 1;
        }
        rounds += 1;
        bins.sort_unstable_by(|a, b| b.cmp(a));
    }
    Ok(BinRun {
        rounds,
        residual: bins,
    })
}

pub fn packing_count_bins(h: &[usize], ell: usize) -> Result<usize> {
    run_bins(h, ell).map(|run| run.rounds)
}

/// Exact maximum number of disjoint groups of `ell` pairwise vertex-disjoint
/// paths, found by exhaustive search over the graph's paths.
///
/// Disjointness is read off the node sequences of the paths, not from their
/// subgraph coordinates. Exponential in the path count; instances with more
/// than `cap` paths are rejected.
pub fn packing_count_oracle(graph: &ExpandedGraph, ell: usize, cap: usize) -> Result<usize> {
    let paths = graph.paths();
    if ell < 1 {
        return Err(Error::GroupSizeOutOfRange { ell, max: paths.len() });
    }
    if paths.len() > cap || paths.len() > 64 {
        return Err(Error::OracleCapExceeded {
            paths: paths.len(),
            cap: cap.min(64),
        });
    }
    let interior: Vec<Vec<Node>> = paths
        .iter()
        .map(|&p| {
            graph
                .path_nodes(p)
                .expect("graph paths exist")
                .into_iter()
                .filter(|n| !n.is_terminal())
                .collect()
        })
        .collect();
    let n = paths.len();
    let mut conflict = vec![0u64; n];
    for a in 0..n {
        for b in 0..n {
            if a != b && interior[a].iter().any(|x| interior[b].contains(x)) {
                conflict[a] |= 1 << b;
            }
        }
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut search = OracleSearch {
        conflict,
        ell,
        memo: HashMap::new(),
    };
    Ok(search.best(full))
}

struct OracleSearch {
    conflict: Vec<u64>,
    ell: usize,
    memo: HashMap<u64, usize>,
}

impl OracleSearch {
    /// Most groups formable from the undecided paths in `mask`. The lowest
    /// undecided path is either left out or placed in a group together with
    /// `ell - 1` other undecided paths.
    fn best(&mut self, mask: u64) -> usize {
        if (mask.count_ones() as usize) < self.ell {
            return 0;
        }
        if let Some(&v) = self.memo.get(&mask) {
            return v;
        }
        let first = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << first);
        let mut best = self.best(rest);
        let mut groups = Vec::new();
        self.extend(rest & !self.conflict[first], self.ell - 1, 1 << first, &mut groups);
        for g in groups {
            best = best.max(1 + self.best(mask & !g));
        }
        self.memo.insert(mask, best);
        best
    }

    fn extend(&self, candidates: u64, need: usize, chosen: u64, out: &mut Vec<u64>) {
        if need == 0 {
            out.push(chosen);
            return;
        }
        let mut c = candidates;
        while c != 0 {
            let p = c.trailing_zeros() as usize;
            c &= !(1 << p);
            self.extend(c & !self.conflict[p], need - 1, chosen | (1 << p), out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub eta: usize,
    pub group_size: usize,
    pub groups: Vec<Vec<PathId>>,
}

/// Per-round path groups: round `eta` holds groups of `m_hat - eta` paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSchedule {
    pub m_hat: usize,
    pub c: usize,
    pub rounds: Vec<Round>,
}

impl RoundSchedule {
    pub fn round_sizes(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.groups.len()).collect()
    }

    /// Number of network uses, one per group.
    pub fn network_uses(&self) -> usize {
        self.rounds.iter().map(|r| r.groups.len()).sum()
    }

    /// Number of scheduled paths, i.e. packets sent.
    pub fn scheduled_paths(&self) -> usize {
        self.rounds.iter().map(|r| r.groups.len() * r.group_size).sum()
    }

    /// Groups in transmission order with their round index.
    pub fn groups(&self) -> impl Iterator<Item = (usize, &[PathId])> {
        self.rounds
            .iter()
            .flat_map(|r| r.groups.iter().map(move |g| (r.eta, g.as_slice())))
    }

    /// The first `c + 1` rounds of this schedule.
    pub fn truncated(&self, c: usize) -> RoundSchedule {
        RoundSchedule {
            m_hat: self.m_hat,
            c: c.min(self.c),
            rounds: self.rounds.iter().take(c + 1).cloned().collect(),
        }
    }
}

/// Builds rounds `0..=c`: in round `eta`, repeatedly take one unused path
/// from each of the `m_hat - eta` subgraphs with the most unused paths until
/// fewer than that many subgraphs have any left.
///
/// Ties go to the lowest subgraph index; within a subgraph the lowest unused
/// branch is taken.
pub fn build_schedule(spec: &AtomicNetworkSpec, c: usize) -> Result<RoundSchedule> {
    let m_hat = spec.m_hat();
    if c >= m_hat {
        return Err(Error::RoundsOutOfRange { c, max: m_hat - 1 });
    }
    let h = spec.h();
    let mut next_branch = vec![0usize; h.len()];
    let mut rounds = Vec::with_capacity(c + 1);
    for eta in 0..=c {
        let size = m_hat - eta;
        let mut groups = Vec::new();
        loop {
            let mut order: Vec<usize> = (0..h.len()).filter(|&i| next_branch[i] < h[i]).collect();
            if order.len() < size {
                break;
            }
            order.sort_by_key(|&i| (std::cmp::Reverse(h[i] - next_branch[i]), i));
            let mut picked: Vec<usize> = order[..size].to_vec();
            picked.sort_unstable();
            let group = picked
                .into_iter()
                .map(|i| {
                    next_branch[i] += 1;
                    PathId::new(i, next_branch[i] - 1)
                })
                .collect();
            groups.push(group);
        }
        rounds.push(Round {
            eta,
            group_size: size,
            groups,
        });
    }
    Ok(RoundSchedule { m_hat, c, rounds })
}

/// Unused-path counts per subgraph after `rounds`, sorted descending.
pub fn residual_h(h: &[usize], rounds: &[Round]) -> Vec<usize> {
    let mut left = h.to_vec();
    for p in rounds.iter().flat_map(|r| r.groups.iter().flatten()) {
        left[p.subgraph] -= 1;
    }
    left.sort_unstable_by(|a, b| b.cmp(a));
    left
}
