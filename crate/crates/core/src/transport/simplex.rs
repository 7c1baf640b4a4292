//! Primal network simplex for uncapacitated min-cost flow.
//!
//! The tree bookkeeping (thread order, successor counts, last successors and
//! the strongly feasible leaving-arc rule) follows the classic design of the
//! LEMON library. Arcs can be appended between solves, which is what the
//! column-generation driver in `exact` relies on.

const NONE: usize = usize::MAX;

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;

const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

/// Relative tolerance on reduced costs.
const RC_TOLERANCE: f64 = 1e-13;

pub(crate) struct NetworkSimplex {
    node_num: usize,
    root: usize,

    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<i8>,

    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,
    supply: Vec<f64>,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,

    block_size: usize,
    next_arc: usize,
    art_cost: f64,
    pub pivots: usize,
}

impl NetworkSimplex {
    /// A network with one node per supply entry (positive = supply,
    /// negative = demand) and an artificial starting basis. Arcs `0..n` are
    /// the artificial arcs; real arcs are appended with [`add_arc`].
    pub fn new(supply: &[f64], art_cost: f64) -> Self {
        let n = supply.len();
        let root = n;
        let all = n + 1;
        let mut ns = NetworkSimplex {
            node_num: n,
            root,
            source: Vec::with_capacity(n),
            target: Vec::with_capacity(n),
            cost: Vec::with_capacity(n),
            flow: Vec::with_capacity(n),
            state: Vec::with_capacity(n),
            pi: vec![0.0; all],
            parent: vec![NONE; all],
            pred: vec![NONE; all],
            thread: vec![0; all],
            rev_thread: vec![0; all],
            succ_num: vec![0; all],
            last_succ: vec![0; all],
            pred_dir: vec![DIR_UP; all],
            dirty_revs: Vec::new(),
            supply: supply.to_vec(),
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
            block_size: 10,
            next_arc: n,
            art_cost,
            pivots: 0,
        };
        ns.thread[root] = if n > 0 { 0 } else { root };
        ns.rev_thread[0] = root;
        ns.succ_num[root] = n + 1;
        ns.last_succ[root] = if n > 0 { n - 1 } else { root };
        for (u, &s) in supply.iter().enumerate() {
            ns.parent[u] = root;
            ns.pred[u] = u;
            ns.thread[u] = u + 1;
            ns.rev_thread[u + 1] = u;
            ns.succ_num[u] = 1;
            ns.last_succ[u] = u;
            if s >= 0.0 {
                ns.pred_dir[u] = DIR_UP;
                ns.source.push(u);
                ns.target.push(root);
                ns.flow.push(s);
                ns.cost.push(0.0);
                ns.pi[u] = 0.0;
            } else {
                ns.pred_dir[u] = DIR_DOWN;
                ns.source.push(root);
                ns.target.push(u);
                ns.flow.push(-s);
                ns.cost.push(art_cost);
                ns.pi[u] = art_cost;
            }
            ns.state.push(STATE_TREE);
        }
        ns
    }

    /// Replaces the starting basis by a spanning tree built from a guess.
    ///
    /// `guess` lists `(real arc, flow)` pairs. Arcs with positive flow must
    /// form a forest; each of its components is hung from the root by one
    /// artificial arc, and tree flows are then recomputed from the supplies.
    /// Nothing changes and `false` is returned when the arcs contain a cycle
    /// or the recomputed flows are not feasible.
    pub fn warm_start(&mut self, guess: &[(usize, f64)]) -> bool {
        let n = self.node_num;
        let root = self.root;
        // Supplies balance only up to rounding, and so do recomputed flows.
        let tiny = 1e-12 * self.supply.iter().map(|s| s.abs()).sum::<f64>();

        // Union-find over the guessed arcs rejects cycles.
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(k, f) in guess {
            if f <= tiny {
                continue;
            }
            let e = k + n;
            let (a, b) = (self.source[e], self.target[e]);
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra == rb {
                return false;
            }
            uf[ra] = rb;
            adj[a].push(e);
            adj[b].push(e);
        }

        // Net supply per component decides which artificial arc holds it:
        // surplus leaves through a supply node, anything else enters a
        // demand node, so a zero-flow artificial arc points away from the root.
        let mut comp_supply = vec![0.0; n];
        for u in 0..n {
            let r = find(&mut uf, u);
            comp_supply[r] += self.supply[u];
        }
        let mut anchor = vec![NONE; n];
        for u in 0..n {
            let r = find(&mut uf, u);
            let want_up = comp_supply[r] > 0.0;
            if anchor[r] == NONE && (self.supply[u] >= 0.0) == want_up {
                anchor[r] = u;
            }
        }
        // A balanced component may lack the preferred kind of node; any
        // node carries its zero artificial flow.
        for u in 0..n {
            let r = find(&mut uf, u);
            if anchor[r] == NONE {
                anchor[r] = u;
            }
        }

        // Preorder from the root: components in anchor order, each walked
        // depth first from its anchor.
        let mut parent = vec![NONE; n + 1];
        let mut pred = vec![NONE; n + 1];
        let mut pred_dir = vec![DIR_UP; n + 1];
        let mut order = Vec::with_capacity(n + 1);
        order.push(root);
        let mut stack = Vec::new();
        for r in 0..n {
            if find(&mut uf, r) != r {
                continue;
            }
            let a = anchor[r];
            parent[a] = root;
            pred[a] = a;
            pred_dir[a] = if self.source[a] == a { DIR_UP } else { DIR_DOWN };
            stack.push(a);
            while let Some(u) = stack.pop() {
                order.push(u);
                for &e in adj[u].iter().rev() {
                    let v = if self.source[e] == u { self.target[e] } else { self.source[e] };
                    if v == parent[u] && e == pred[u] {
                        continue;
                    }
                    parent[v] = u;
                    pred[v] = e;
                    pred_dir[v] = if self.source[e] == v { DIR_UP } else { DIR_DOWN };
                    stack.push(v);
                }
            }
        }
        if order.len() != n + 1 {
            return false;
        }

        // Tree flows from the supplies, leaves first.
        let mut net = self.supply.clone();
        net.push(0.0);
        let mut flow_of = vec![0.0; n + 1];
        for &u in order.iter().skip(1).rev() {
            let f = if pred_dir[u] == DIR_UP { net[u] } else { -net[u] };
            if f < -tiny {
                return false;
            }
            flow_of[u] = f.max(0.0);
            let p = parent[u];
            net[p] += net[u];
        }

        for e in 0..self.source.len() {
            self.flow[e] = 0.0;
            self.state[e] = STATE_LOWER;
        }
        let mut succ_num = vec![1usize; n + 1];
        for &u in order.iter().skip(1).rev() {
            succ_num[parent[u]] += succ_num[u];
        }
        for (k, &u) in order.iter().enumerate() {
            let next = order[(k + 1) % order.len()];
            self.thread[u] = next;
            self.rev_thread[next] = u;
            if u != root {
                self.parent[u] = parent[u];
                self.pred[u] = pred[u];
                self.pred_dir[u] = pred_dir[u];
                self.flow[pred[u]] = flow_of[u];
                self.state[pred[u]] = STATE_TREE;
            }
            self.succ_num[u] = succ_num[u];
        }
        self.parent[root] = NONE;
        // In preorder a subtree is a contiguous run starting at its root.
        let position: Vec<usize> = {
            let mut p = vec![0; n + 1];
            for (k, &u) in order.iter().enumerate() {
                p[u] = k;
            }
            p
        };
        for &u in &order {
            self.last_succ[u] = order[position[u] + succ_num[u] - 1];
        }
        self.recompute_potentials();
        true
    }

    pub fn add_arc(&mut self, s: usize, t: usize, cost: f64) {
        self.source.push(s);
        self.target.push(t);
        self.cost.push(cost);
        self.flow.push(0.0);
        self.state.push(STATE_LOWER);
    }

    pub fn arc_count(&self) -> usize {
        self.source.len() - self.node_num
    }

    /// `(source, target, flow)` of real arc `k` (0-based among real arcs).
    pub fn arc(&self, k: usize) -> (usize, usize, f64) {
        let e = k + self.node_num;
        (self.source[e], self.target[e], self.flow[e])
    }

    pub fn potentials(&self) -> &[f64] {
        &self.pi[..self.node_num]
    }

    /// Demand still served through the artificial root.
    pub fn artificial_flow(&self) -> f64 {
        (0..self.node_num)
            .filter(|&e| self.source[e] == self.root)
            .map(|e| self.flow[e])
            .sum()
    }

    pub fn art_cost(&self) -> f64 {
        self.art_cost
    }

    /// Raises the penalty on artificial demand arcs and refreshes potentials.
    pub fn set_art_cost(&mut self, c: f64) {
        for e in 0..self.node_num {
            if self.source[e] == self.root {
                self.cost[e] = c;
            }
        }
        self.art_cost = c;
        self.recompute_potentials();
    }

    /// Objective over real arcs.
    #[cfg(test)]
    pub fn real_cost(&self) -> f64 {
        (self.node_num..self.source.len())
            .map(|e| self.flow[e] * self.cost[e])
            .sum()
    }

    /// Rebuilds all potentials from the tree, discarding accumulated drift.
    pub fn recompute_potentials(&mut self) {
        self.pi[self.root] = 0.0;
        let mut u = self.thread[self.root];
        while u != self.root {
            let p = self.parent[u];
            let c = self.cost[self.pred[u]];
            self.pi[u] = if self.pred_dir[u] == DIR_UP {
                self.pi[p] - c
            } else {
                self.pi[p] + c
            };
            u = self.thread[u];
        }
    }

    /// Pivots until no real arc has a negative reduced cost.
    pub fn run(&mut self) {
        let m = self.arc_count();
        self.block_size = ((m as f64).sqrt() as usize).max(10);
        if self.next_arc < self.node_num || self.next_arc >= self.source.len() {
            self.next_arc = self.node_num;
        }
        if m == 0 {
            return;
        }
        while self.find_entering_arc() {
            self.find_join_node();
            if !self.find_leaving_arc() {
                // Uncapacitated arcs with nonnegative costs cannot form an
                // unbounded cycle; this only guards against corrupted input.
                break;
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            self.pivots += 1;
        }
    }

    #[inline]
    fn reduced_cost(&self, e: usize) -> f64 {
        self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]
    }

    #[inline]
    fn tolerance(&self, e: usize) -> f64 {
        RC_TOLERANCE
            * self.cost[e]
                .abs()
                .max(self.pi[self.source[e]].abs())
                .max(self.pi[self.target[e]].abs())
                .max(1.0)
    }

    /// Block search pivot rule.
    fn find_entering_arc(&mut self) -> bool {
        let lo = self.node_num;
        let hi = self.source.len();
        let mut min = 0.0;
        let mut best = NONE;
        let mut cnt = self.block_size;
        let ranges = [(self.next_arc, hi), (lo, self.next_arc)];
        for (a, b) in ranges {
            for e in a..b {
                if self.state[e] != STATE_TREE {
                    let c = self.reduced_cost(e);
                    if c < min {
                        min = c;
                        best = e;
                    }
                }
                cnt -= 1;
                if cnt == 0 {
                    if best != NONE && min < -self.tolerance(best) {
                        self.in_arc = best;
                        self.next_arc = e;
                        return true;
                    }
                    cnt = self.block_size;
                }
            }
        }
        if best != NONE && min < -self.tolerance(best) {
            self.in_arc = best;
            self.next_arc = best;
            return true;
        }
        false
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        // Entering arcs are always at their lower bound.
        let first = self.source[self.in_arc];
        let second = self.target[self.in_arc];
        self.delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == DIR_UP {
                let d = self.flow[self.pred[u]];
                if d < self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DIR_DOWN {
                let d = self.flow[self.pred[u]];
                if d <= self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0.0 {
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= f64::from(self.pred_dir[u]) * val;
                if self.flow[e] < 0.0 {
                    self.flow[e] = 0.0;
                }
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += f64::from(self.pred_dir[u]) * val;
                if self.flow[e] < 0.0 {
                    self.flow[e] = 0.0;
                }
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        self.flow[out] = 0.0;
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let in_arc = self.in_arc;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            // The entering and leaving arcs hang off the same node.
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            // Reverse the stem from u_in up to u_out and move the subtree.
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc += self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[self.join] == v_in {
            self.join
        } else {
            NONE
        };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }
        if self.join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != self.join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != self.join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in]
            - self.pi[self.u_in]
            - f64::from(self.pred_dir[self.u_in]) * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    #[cfg(test)]
    fn check_tree(&self) {
        // Every node is reachable along the thread and tree arcs have zero reduced cost.
        let mut seen = vec![false; self.node_num + 1];
        let mut u = self.root;
        for _ in 0..=self.node_num {
            assert!(!seen[u]);
            seen[u] = true;
            u = self.thread[u];
        }
        assert_eq!(u, self.root);
        for v in 0..self.node_num {
            let e = self.pred[v];
            assert_eq!(self.state[e], STATE_TREE);
            assert!(self.reduced_cost(e).abs() < 1e-9);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(supply: &[f64], m: usize, cost: impl Fn(usize, usize) -> f64) -> NetworkSimplex {
        let n = supply.len() - m;
        let mut ns = NetworkSimplex::new(supply, 100.0);
        for i in 0..m {
            for j in 0..n {
                ns.add_arc(i, m + j, cost(i, j));
            }
        }
        ns
    }

    #[test]
    fn two_by_two_assignment() {
        let supply = [0.5, 0.5, -0.5, -0.5];
        let c = [[1.0, 0.0], [0.0, 1.0]];
        let mut ns = complete(&supply, 2, |i, j| c[i][j]);
        ns.run();
        ns.check_tree();
        assert!(ns.real_cost().abs() < 1e-15);
        assert!(ns.artificial_flow() < 1e-15);
    }

    #[test]
    fn small_transport_matches_hand_solution() {
        // Sources 0.6, 0.4; sinks 0.3, 0.3, 0.4; costs force a split.
        let supply = [0.6, 0.4, -0.3, -0.3, -0.4];
        let c = [[1.0, 2.0, 3.0], [4.0, 1.0, 1.0]];
        let mut ns = complete(&supply, 2, |i, j| c[i][j]);
        ns.run();
        ns.check_tree();
        // 0 -> {sink0 0.3, sink1 0.3}, 1 -> sink2 0.4: 0.3 + 0.6 + 0.4
        assert!((ns.real_cost() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn arcs_can_be_added_between_runs() {
        let supply = [0.5, 0.5, -0.5, -0.5];
        let mut ns = NetworkSimplex::new(&supply, 10.0);
        ns.add_arc(0, 2, 3.0);
        ns.add_arc(1, 3, 3.0);
        ns.run();
        assert!((ns.real_cost() - 3.0).abs() < 1e-12);
        ns.add_arc(0, 3, 0.0);
        ns.add_arc(1, 2, 0.0);
        ns.run();
        ns.check_tree();
        assert!(ns.real_cost().abs() < 1e-12);
    }

    #[test]
    fn infeasible_restriction_keeps_artificial_flow() {
        let supply = [0.5, 0.5, -0.5, -0.5];
        let mut ns = NetworkSimplex::new(&supply, 10.0);
        ns.add_arc(0, 2, 1.0);
        ns.add_arc(1, 2, 1.0);
        ns.run();
        assert!((ns.artificial_flow() - 0.5).abs() < 1e-12);
        ns.set_art_cost(1000.0);
        ns.check_tree();
    }

    #[test]
    fn warm_start_reaches_the_same_optimum() {
        let supply = [0.6, 0.4, -0.3, -0.3, -0.4];
        let c = [[1.0, 2.0, 3.0], [4.0, 1.0, 1.0]];
        // North-west corner plan: arcs are numbered row by row.
        let guess = [(0, 0.3), (1, 0.3), (2, 0.0), (5, 0.4)];
        let mut ns = complete(&supply, 2, |i, j| c[i][j]);
        assert!(ns.warm_start(&guess));
        ns.check_tree();
        assert!(ns.artificial_flow() < 1e-15);
        ns.run();
        ns.check_tree();
        assert!((ns.real_cost() - 1.3).abs() < 1e-12);

        // A partial guess leaves the rest on artificial arcs.
        let mut ns = complete(&supply, 2, |i, j| c[i][j]);
        assert!(ns.warm_start(&[(1, 0.3)]));
        ns.check_tree();
        ns.run();
        assert!((ns.real_cost() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn warm_start_rejects_cycles_and_infeasible_flows() {
        let supply = [0.5, 0.5, -0.5, -0.5];
        let mut ns = complete(&supply, 2, |_, _| 1.0);
        assert!(!ns.warm_start(&[(0, 0.1), (1, 0.1), (2, 0.1), (3, 0.1)]));
        // On the path 2 <- 0 -> 3 <- 1, node 3 would have to send 0.8 back.
        let supply = [0.1, 0.9, -0.9, -0.1];
        let mut ns = complete(&supply, 2, |_, _| 1.0);
        assert!(!ns.warm_start(&[(0, 0.1), (1, 0.1), (3, 0.1)]));
        ns.run();
        ns.check_tree();
        assert!((ns.real_cost() - 1.0).abs() < 1e-12);
    }
}
