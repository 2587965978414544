//! Edmonds-Karp max-flow, used to cross-check the disjoint-path counts of
//! expanded graphs.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: usize,
    rev: usize,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<Arc>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: usize) {
        let rev_from = self.adj[to].len();
        let rev_to = self.adj[from].len();
        self.adj[from].push(Arc {
            to,
            cap,
            rev: rev_from,
        });
        self.adj[to].push(Arc {
            to: from,
            cap: 0,
            rev: rev_to,
        });
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut total = 0;
        loop {
            // parent[v] = (u, arc index in adj[u])
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut reached = false;
            while let Some(u) = queue.pop_front() {
                for (k, arc) in self.adj[u].iter().enumerate() {
                    if arc.cap > 0 && arc.to != s && parent[arc.to].is_none() {
                        parent[arc.to] = Some((u, k));
                        if arc.to == t {
                            reached = true;
                            break;
                        }
                        queue.push_back(arc.to);
                    }
                }
                if reached {
                    break;
                }
            }
            if !reached {
                return total;
            }
            let mut bottleneck = usize::MAX;
            let mut v = t;
            while let Some((u, k)) = parent[v] {
                bottleneck = bottleneck.min(self.adj[u][k].cap);
                v = u;
            }
            let mut v = t;
            while let Some((u, k)) = parent[v] {
                self.adj[u][k].cap -= bottleneck;
                let rev = self.adj[u][k].rev;
                self.adj[v][rev].cap += bottleneck;
                v = u;
            }
            total += bottleneck;
        }
    }
}
