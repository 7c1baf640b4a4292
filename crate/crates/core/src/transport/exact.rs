use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::plan::TransportPlan;
use super::simplex::NetworkSimplex;
use crate::error::{Error, Result};
use crate::measures::PointCloud;

/// Tuning knobs of the exact solver. None of them affects the optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Nearest neighbours per point in the initial arc set.
    pub initial_neighbors: usize,
    /// Most-negative arcs added per source in each pricing round.
    pub arcs_per_round: usize,
    /// Seed large problems from the solution of a coarsened problem.
    pub multiscale: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            initial_neighbors: 6,
            arcs_per_round: 6,
            multiscale: true,
        }
    }
}

/// Counters describing one exact solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub rounds: usize,
    pub pivots: usize,
    pub arcs: usize,
}

/// Relative tolerance on reduced costs when pricing the full arc set.
const PRICING_TOLERANCE: f64 = 1e-11;

/// Demand left on artificial arcs below this is treated as rounding noise.
const ARTIFICIAL_TOLERANCE: f64 = 1e-12;

const MAX_ART_COST: f64 = 1e15;

/// Exact 2-Wasserstein distance between two clouds and an optimal plan.
pub fn exact_w2(pa: &PointCloud, pb: &PointCloud) -> Result<(f64, TransportPlan)> {
    exact_w2_with(pa, pb, &ExactOptions::default()).map(|(w, p, _)| (w, p))
}

/// [`exact_w2`] with explicit options, also returning solver counters.
///
/// The squared-distance transportation problem is solved by network simplex
/// on a growing subset of arcs. Large problems are first coarsened by
/// merging nearby points; the coarse optimal plan, refined to child pairs,
/// seeds the arc set. Small problems start from nearest-neighbour arcs.
/// Every round then prices all `m x n` pairs against the current potentials
/// and adds the most negative ones. The loop stops when no pair has a
/// negative reduced cost and no demand is served artificially, which
/// certifies optimality for the complete problem.
pub fn exact_w2_with(
    pa: &PointCloud,
    pb: &PointCloud,
    opts: &ExactOptions,
) -> Result<(f64, TransportPlan, SolveStats)> {
    let (sa, sb) = (pa.total_weight(), pb.total_weight());
    if (sa - sb).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "weight sums differ: {sa} vs {sb}"
        )));
    }
    let mut stats = SolveStats::default();
    let entries = solve(
        pa.points(),
        pa.weights(),
        pb.points(),
        pb.weights(),
        opts,
        &mut stats,
    )?;
    let plan = TransportPlan {
        sources: pa.len(),
        targets: pb.len(),
        entries,
    };
    plan.check_marginals(pa, pb)?;
    let w2 = plan.squared_cost(pa, pb).max(0.0);
    Ok((w2.sqrt(), plan, stats))
}

/// Problems with fewer candidate pairs than this, or fewer points than
/// `MIN_SIDE` on either side, are solved directly.
const COARSEN_BELOW: usize = 40_000;
const MIN_SIDE: usize = 32;

fn solve(
    xa: &[[f64; 2]],
    wa: &[f64],
    xb: &[[f64; 2]],
    wb: &[f64],
    opts: &ExactOptions,
    stats: &mut SolveStats,
) -> Result<Vec<(usize, usize, f64)>> {
    let (m, n) = (xa.len(), xb.len());
    let scale = cost_scale(xa, xb);
    let cost = |i: usize, j: usize| -> f64 {
        let dx = xa[i][0] - xb[j][0];
        let dy = xa[i][1] - xb[j][1];
        (dx * dx + dy * dy) / scale
    };

    let mut supply: Vec<f64> = wa.to_vec();
    supply.extend(wb.iter().map(|w| -w));
    let mut ns = NetworkSimplex::new(&supply, 10.0);
    let mut present = BitSet::new(m * n);
    let add = |ns: &mut NetworkSimplex, present: &mut BitSet, i: usize, j: usize| {
        if present.insert(i * n + j) {
            ns.add_arc(i, m + j, cost(i, j));
        }
    };

    if opts.multiscale && m * n >= COARSEN_BELOW && m.min(n) >= MIN_SIDE {
        let cell = coarse_cell(xa, xb);
        let lo = union_lo(xa, xb);
        let ca = Coarse::new(xa, wa, lo, cell);
        let cb = Coarse::new(xb, wb, lo, cell);
        let seed = solve(&ca.points, &ca.weights, &cb.points, &cb.weights, opts, stats)?;
        for &(ci, cj, _) in &seed {
            for &i in &ca.children[ci] {
                for &j in &cb.children[cj] {
                    add(&mut ns, &mut present, i, j);
                }
            }
        }
        // Arcs were added entry by entry, so the arc of a child pair is at
        // a fixed offset from its entry's first arc.
        let mut first_arc = Vec::with_capacity(seed.len());
        let mut next = 0;
        for &(ci, cj, _) in &seed {
            first_arc.push(next);
            next += ca.children[ci].len() * cb.children[cj].len();
        }
        let guess: Vec<(usize, f64)> = refine_plan(&seed, &ca.children, wa, &cb.children, wb)
            .into_iter()
            .map(|(entry, a, b, f)| (first_arc[entry] + a * cb.children[seed[entry].1].len() + b, f))
            .collect();
        ns.warm_start(&guess);
    } else {
        let k = opts.initial_neighbors.max(1);
        for (i, j) in nearest_pairs(xa, xb, k) {
            add(&mut ns, &mut present, i, j);
        }
        for (j, i) in nearest_pairs(xb, xa, k) {
            add(&mut ns, &mut present, i, j);
        }
    }

    let per_round = opts.arcs_per_round.max(1);
    // Points are grouped into buckets on both sides. A pair of buckets, and
    // then a source against a bucket, is skipped when a lower bound on the
    // reduced costs it covers is nonnegative.
    let r = scale.sqrt();
    let src = Buckets::new(xa, r, 4.0 * spacing(xa) / r);
    let dst = Buckets::new(xb, r, 4.0 * spacing(xb) / r);
    let mut src_pi = vec![0.0; src.len()];
    let mut dst_pi = vec![0.0; dst.len()];
    let mut per_source: Vec<Vec<(f64, usize)>> = vec![Vec::new(); m];
    loop {
        stats.rounds += 1;
        ns.run();
        ns.recompute_potentials();
        let pi = ns.potentials();
        let pi_scale = pi.iter().fold(1.0f64, |a, p| a.max(p.abs()));
        let tol = PRICING_TOLERANCE * pi_scale;
        let slack = tol - 1e-13 * pi_scale;
        let (pa, pb) = pi.split_at(m);
        for (k, p) in src_pi.iter_mut().enumerate() {
            *p = src.members(k).iter().map(|&i| pa[i]).fold(f64::INFINITY, f64::min);
        }
        for (k, p) in dst_pi.iter_mut().enumerate() {
            *p = dst.members(k).iter().map(|&j| pb[j]).fold(f64::NEG_INFINITY, f64::max);
        }

        for a in 0..src.len() {
            let ca = src.centers[a];
            for b in 0..dst.len() {
                let cb = dst.centers[b];
                let gap = dist(ca, cb) - src.radii[a] - dst.radii[b];
                let d = gap.max(0.0);
                if d * d + src_pi[a] - dst_pi[b] >= -slack {
                    continue;
                }
                for &i in src.members(a) {
                    let x = [xa[i][0] / r, xa[i][1] / r];
                    let d = (dist(x, cb) - dst.radii[b]).max(0.0);
                    if d * d + pa[i] - dst_pi[b] >= -slack {
                        continue;
                    }
                    for &j in dst.members(b) {
                        let rc = cost(i, j) + pa[i] - pb[j];
                        if rc < -tol && !present.contains(i * n + j) {
                            per_source[i].push((rc, j));
                        }
                    }
                }
            }
        }
        let mut found = Vec::new();
        for (i, c) in per_source.iter_mut().enumerate() {
            if c.len() > per_round {
                c.select_nth_unstable_by(per_round, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                c.truncate(per_round);
            }
            c.sort_unstable_by_key(|e| e.1);
            found.extend(c.drain(..).map(|(_, j)| (i, j)));
        }

        if found.is_empty() {
            if ns.artificial_flow() <= ARTIFICIAL_TOLERANCE {
                break;
            }
            let c = ns.art_cost() * 10.0;
            if c > MAX_ART_COST {
                return Err(Error::Solver(
                    "could not drive artificial flow to zero".into(),
                ));
            }
            ns.set_art_cost(c);
            continue;
        }
        for (i, j) in found {
            add(&mut ns, &mut present, i, j);
        }
    }
    stats.pivots += ns.pivots;
    stats.arcs = ns.arc_count();

    let mut entries = Vec::new();
    for k in 0..ns.arc_count() {
        let (s, t, f) = ns.arc(k);
        if f > 0.0 {
            entries.push((s, t - m, f));
        }
    }
    entries.sort_unstable_by_key(|a| (a.0, a.1));
    Ok(entries)
}

/// Splits every coarse plan entry between the children of its two cells.
///
/// Each coarse cell hands its children's mass to its entries in order, so
/// consecutive entries share at most one child, and each entry is then
/// filled north-west-corner style. The support stays a forest whenever the
/// coarse plan is one. Returns `(entry, child slot in source cell, child
/// slot in target cell, flow)`.
fn refine_plan(
    seed: &[(usize, usize, f64)],
    children_a: &[Vec<usize>],
    wa: &[f64],
    children_b: &[Vec<usize>],
    wb: &[f64],
) -> Vec<(usize, usize, usize, f64)> {
    // Per side: for every entry, the (child slot, amount) pieces it gets.
    fn split(
        seed: &[(usize, usize, f64)],
        cell_of: impl Fn(&(usize, usize, f64)) -> usize,
        children: &[Vec<usize>],
        w: &[f64],
    ) -> Vec<Vec<(usize, f64)>> {
        let mut by_cell: Vec<Vec<usize>> = vec![Vec::new(); children.len()];
        for (k, e) in seed.iter().enumerate() {
            by_cell[cell_of(e)].push(k);
        }
        let mut pieces = vec![Vec::new(); seed.len()];
        for (c, entries) in by_cell.iter().enumerate() {
            let kids = &children[c];
            let mut slot = 0;
            let mut left = kids.first().map_or(0.0, |&i| w[i]);
            for &k in entries {
                let mut need = seed[k].2;
                while need > 0.0 && slot < kids.len() {
                    let take = need.min(left);
                    if take > 0.0 {
                        pieces[k].push((slot, take));
                    }
                    need -= take;
                    left -= take;
                    if left <= 0.0 {
                        slot += 1;
                        left = kids.get(slot).map_or(0.0, |&i| w[i]);
                    }
                }
            }
        }
        pieces
    }
    let pa = split(seed, |e| e.0, children_a, wa);
    let pb = split(seed, |e| e.1, children_b, wb);
    let mut out = Vec::new();
    for (k, (sa, sb)) in pa.iter().zip(&pb).enumerate() {
        let (mut x, mut y) = (0, 0);
        let (mut ra, mut rb) = (sa.first().map_or(0.0, |p| p.1), sb.first().map_or(0.0, |p| p.1));
        while x < sa.len() && y < sb.len() {
            let f = ra.min(rb);
            if f > 0.0 {
                out.push((k, sa[x].0, sb[y].0, f));
            }
            ra -= f;
            rb -= f;
            if ra <= 0.0 {
                x += 1;
                ra = sa.get(x).map_or(0.0, |p| p.1);
            }
            if rb <= 0.0 {
                y += 1;
                rb = sb.get(y).map_or(0.0, |p| p.1);
            }
        }
    }
    out
}

/// Side of the square cells used to merge points, about twice the typical
/// point spacing of the denser cloud.
fn coarse_cell(xa: &[[f64; 2]], xb: &[[f64; 2]]) -> f64 {
    let s = 2.0 * spacing(xa).min(spacing(xb));
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

/// Typical distance between neighbouring points of a cloud.
fn spacing(xs: &[[f64; 2]]) -> f64 {
    let (lo, hi) = bbox(xs);
    let area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(f64::MIN_POSITIVE);
    (area / xs.len() as f64).sqrt()
}

/// Points grouped by square cell, with bounding circles in coordinates
/// divided by `unit`.
struct Buckets {
    order: Vec<usize>,
    starts: Vec<usize>,
    centers: Vec<[f64; 2]>,
    radii: Vec<f64>,
}

impl Buckets {
    fn new(xs: &[[f64; 2]], unit: f64, cell: f64) -> Self {
        let cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let scaled: Vec<[f64; 2]> = xs.iter().map(|p| [p[0] / unit, p[1] / unit]).collect();
        let (lo, _) = bbox(&scaled);
        let key = |p: &[f64; 2]| {
            (
                ((p[0] - lo[0]) / cell).floor() as i64,
                ((p[1] - lo[1]) / cell).floor() as i64,
            )
        };
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by_key(|&j| (key(&scaled[j]), j));
        let mut b = Buckets {
            order,
            starts: vec![0],
            centers: Vec::new(),
            radii: Vec::new(),
        };
        for t in 1..=xs.len() {
            if t == xs.len() || key(&scaled[b.order[t]]) != key(&scaled[b.order[t - 1]]) {
                b.starts.push(t);
            }
        }
        for k in 0..b.starts.len() - 1 {
            let members = &b.order[b.starts[k]..b.starts[k + 1]];
            let (lo, hi) = bbox(&members.iter().map(|&j| scaled[j]).collect::<Vec<_>>());
            let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
            let r = members
                .iter()
                .map(|&j| dist(scaled[j], c))
                .fold(0.0, f64::max);
            b.centers.push(c);
            // Pad for rounding in the bound.
            b.radii.push(r * (1.0 + 1e-12));
        }
        b
    }

    fn len(&self) -> usize {
        self.centers.len()
    }

    fn members(&self, k: usize) -> &[usize] {
        &self.order[self.starts[k]..self.starts[k + 1]]
    }
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    (dx * dx + dy * dy).sqrt()
}

fn union_lo(xa: &[[f64; 2]], xb: &[[f64; 2]]) -> [f64; 2] {
    let (la, _) = bbox(xa);
    let (lb, _) = bbox(xb);
    [la[0].min(lb[0]), la[1].min(lb[1])]
}

/// Points merged by cell: weight sums at weighted means.
struct Coarse {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl Coarse {
    fn new(xs: &[[f64; 2]], ws: &[f64], lo: [f64; 2], cell: f64) -> Self {
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut c = Coarse {
            points: Vec::new(),
            weights: Vec::new(),
            children: Vec::new(),
        };
        for (i, (p, &w)) in xs.iter().zip(ws).enumerate() {
            let key = (
                ((p[0] - lo[0]) / cell).floor() as i64,
                ((p[1] - lo[1]) / cell).floor() as i64,
            );
            let k = *index.entry(key).or_insert_with(|| {
                c.points.push([0.0; 2]);
                c.weights.push(0.0);
                c.children.push(Vec::new());
                c.weights.len() - 1
            });
            c.points[k][0] += w * p[0];
            c.points[k][1] += w * p[1];
            c.weights[k] += w;
            c.children[k].push(i);
        }
        for (p, &w) in c.points.iter_mut().zip(&c.weights) {
            if w > 0.0 {
                p[0] /= w;
                p[1] /= w;
            }
        }
        c
    }
}

fn bbox(xs: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in xs {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// Upper bound on the squared distance between any two points, used to
/// normalize costs into `[0, 1]`.
fn cost_scale(xa: &[[f64; 2]], xb: &[[f64; 2]]) -> f64 {
    let (la, ha) = bbox(xa);
    let (lb, hb) = bbox(xb);
    let dx = (ha[0] - lb[0]).abs().max((hb[0] - la[0]).abs());
    let dy = (ha[1] - lb[1]).abs().max((hb[1] - la[1]).abs());
    let s = dx * dx + dy * dy;
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// `(i, j)` for the `k` nearest `to[j]` of every `from[i]`.
fn nearest_pairs(from: &[[f64; 2]], to: &[[f64; 2]], k: usize) -> Vec<(usize, usize)> {
    let k = k.min(to.len());
    let mut out = Vec::with_capacity(from.len() * k);
    let mut buf: Vec<(f64, usize)> = Vec::with_capacity(to.len());
    for (i, p) in from.iter().enumerate() {
        buf.clear();
        buf.extend(to.iter().enumerate().map(|(j, q)| {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            (dx * dx + dy * dy, j)
        }));
        if buf.len() > k {
            buf.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            buf.truncate(k);
        }
        out.extend(buf.iter().map(|&(_, j)| (i, j)));
    }
    out
}

struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }

    fn contains(&self, k: usize) -> bool {
        self.0[k / 64] >> (k % 64) & 1 == 1
    }

    /// Returns whether the bit was newly set.
    fn insert(&mut self, k: usize) -> bool {
        let w = &mut self.0[k / 64];
        let bit = 1 << (k % 64);
        let new = *w & bit == 0;
        *w |= bit;
        new
    }
}
