//! Primal network simplex for the dense transportation problem.
//!
//! Sources `0..n` ship integer supplies to sinks `n..n+m` over all `n·m` arcs.
//! An artificial root joins every node with a big-M arc; the initial tree uses
//! only those. Trees stay strongly feasible (the leaving arc is the last
//! blocking arc met when walking the cycle from the join in the orientation of
//! the entering arc), which rules out cycling under degeneracy.

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    /// `(source, sink, flow)` for every real arc carrying positive flow.
    pub flows: Vec<(usize, usize, i64)>,
    #[allow(dead_code)]
    pub pivots: usize,
}

const NONE: usize = usize::MAX;

struct Tree {
    parent: Vec<usize>,
    /// Arc id of the edge to the parent. Real arcs are `i*m + j`, artificial ones `n*m + v`.
    pred: Vec<usize>,
    /// True when the parent edge is oriented node → parent.
    up: Vec<bool>,
    flow: Vec<i64>,
    depth: Vec<usize>,
    pot: Vec<i64>,
    first_child: Vec<usize>,
    next_sib: Vec<usize>,
    prev_sib: Vec<usize>,
}

impl Tree {
    fn add_child(&mut self, p: usize, c: usize) {
        let head = self.first_child[p];
        self.next_sib[c] = head;
        self.prev_sib[c] = NONE;
        if head != NONE {
            self.prev_sib[head] = c;
        }
        self.first_child[p] = c;
        self.parent[c] = p;
    }

    fn remove_child(&mut self, p: usize, c: usize) {
        let (prev, next) = (self.prev_sib[c], self.next_sib[c]);
        if prev == NONE {
            self.first_child[p] = next;
        } else {
            self.next_sib[prev] = next;
        }
        if next != NONE {
            self.prev_sib[next] = prev;
        }
        self.next_sib[c] = NONE;
        self.prev_sib[c] = NONE;
    }
}

pub(crate) fn solve(supply: &[i64], demand: &[i64], cost: &[i64]) -> Solution {
    let n = supply.len();
    let m = demand.len();
    debug_assert_eq!(cost.len(), n * m);
    debug_assert_eq!(supply.iter().sum::<i64>(), demand.iter().sum::<i64>());
    let nodes = n + m;
    let root = nodes;
    let real_arcs = n * m;
    let max_cost = cost.iter().copied().max().unwrap_or(0).max(0);
    let big_m = (nodes as i64 + 1) * (max_cost + 1);

    let mut t = Tree {
        parent: vec![NONE; nodes + 1],
        pred: vec![NONE; nodes + 1],
        up: vec![false; nodes + 1],
        flow: vec![0; nodes + 1],
        depth: vec![0; nodes + 1],
        pot: vec![0; nodes + 1],
        first_child: vec![NONE; nodes + 1],
        next_sib: vec![NONE; nodes + 1],
        prev_sib: vec![NONE; nodes + 1],
    };
    // Reduced cost of arc u→v is cost + pot[u] - pot[v]; tree arcs have zero.
    for v in (0..nodes).rev() {
        t.add_child(root, v);
        t.pred[v] = real_arcs + v;
        t.depth[v] = 1;
        if v < n && supply[v] > 0 {
            t.up[v] = true;
            t.flow[v] = supply[v];
            t.pot[v] = -big_m;
        } else {
            // Zero-flow artificial arcs point away from the root.
            t.up[v] = false;
            t.flow[v] = if v < n { 0 } else { demand[v - n] };
            t.pot[v] = big_m;
        }
    }

    let block = ((real_arcs as f64).sqrt().ceil() as usize).clamp(1, real_arcs.max(1));
    let mut next_arc = 0usize;
    let mut pivots = 0usize;
    let mut stack = Vec::new();

    loop {
        // Block search pricing.
        let mut best = NONE;
        let mut best_rc = 0i64;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        while scanned < real_arcs {
            let e = next_arc;
            let (i, j) = (e / m, e % m);
            let rc = cost[e] + t.pot[i] - t.pot[n + j];
            if rc < best_rc {
                best_rc = rc;
                best = e;
            }
            next_arc += 1;
            if next_arc == real_arcs {
                next_arc = 0;
            }
            scanned += 1;
            in_block += 1;
            if in_block == block {
                if best != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if best == NONE {
            break;
        }
        pivots += 1;

        let first = best / m;
        let second = n + best % m;

        // Join node.
        let (mut a, mut b) = (first, second);
        while a != b {
            if t.depth[a] >= t.depth[b] {
                a = t.parent[a];
            } else {
                b = t.parent[b];
            }
        }
        let join = a;

        // Leaving arc. Flow is pushed first→second on the entering arc, then
        // second up to join and join down to first.
        let mut delta = i64::MAX;
        let mut u_out = NONE;
        let mut on_first = false;
        let mut u = first;
        while u != join {
            if t.up[u] && t.flow[u] < delta {
                delta = t.flow[u];
                u_out = u;
                on_first = true;
            }
            u = t.parent[u];
        }
        let mut u = second;
        while u != join {
            if !t.up[u] && t.flow[u] <= delta {
                delta = t.flow[u];
                u_out = u;
                on_first = false;
            }
            u = t.parent[u];
        }
        debug_assert!(u_out != NONE, "unbounded transportation problem");

        // Augment.
        if delta > 0 {
            let mut u = first;
            while u != join {
                t.flow[u] += if t.up[u] { -delta } else { delta };
                u = t.parent[u];
            }
            let mut u = second;
            while u != join {
                t.flow[u] += if t.up[u] { delta } else { -delta };
                u = t.parent[u];
            }
        }

        // Re-hang the subtree cut off at u_out below the other end of the entering arc.
        let (u_in, v_in, in_up) = if on_first {
            (first, second, true)
        } else {
            (second, first, false)
        };
        let mut prev_node = v_in;
        let mut prev_arc = best;
        let mut prev_up = in_up;
        let mut prev_flow = delta;
        let mut w = u_in;
        loop {
            let old_parent = t.parent[w];
            let (arc, up, fl) = (t.pred[w], t.up[w], t.flow[w]);
            t.remove_child(old_parent, w);
            t.pred[w] = prev_arc;
            t.up[w] = prev_up;
            t.flow[w] = prev_flow;
            t.add_child(prev_node, w);
            if w == u_out {
                break;
            }
            prev_node = w;
            prev_arc = arc;
            prev_up = !up;
            prev_flow = fl;
            w = old_parent;
        }

        // Shift potentials and depths over the moved subtree.
        let c_in = cost[best];
        let target_pot = if in_up {
            // u_in → v_in
            t.pot[v_in] - c_in
        } else {
            t.pot[v_in] + c_in
        };
        let shift = target_pot - t.pot[u_in];
        stack.clear();
        stack.push(u_in);
        while let Some(v) = stack.pop() {
            t.pot[v] += shift;
            t.depth[v] = t.depth[t.parent[v]] + 1;
            let mut c = t.first_child[v];
            while c != NONE {
                stack.push(c);
                c = t.next_sib[c];
            }
        }
    }

    let mut flows = Vec::new();
    for v in 0..nodes {
        let e = t.pred[v];
        if e < real_arcs && t.flow[v] > 0 {
            flows.push((e / m, e % m, t.flow[v]));
        }
        debug_assert!(e < real_arcs || t.flow[v] == 0, "artificial arc left with flow");
    }
    flows.sort_unstable();
    Solution { flows, pivots }
}
