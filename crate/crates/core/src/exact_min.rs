//! Progressive exact resolution of a snake's label minimum.
//!
//! `P(W_* < y)` estimated from the minimum of a fixed-grid sample converges
//! like `N^{-1/4}` with an O(1) constant: subtrees between grid points hide
//! label dips of order `(t/N)^{1/4}`. Percent accuracy therefore needs an
//! estimator that resolves the minimum adaptively, and adaptivity is only
//! sound if every revealed quantity belongs to one consistent object. This
//! module maintains exactly that: a single continuum snake revealed
//! progressively, so revealed labels never change and `min < y` settles the
//! indicator for `y` permanently.
//!
//! State: contour leaves (sampled driving-path values) and, between
//! neighbouring leaves, the true minimum of the driving path over that
//! window together with its realized label. All laws are exact:
//!
//! - window minima invert `P(min <= m)` of a Brownian bridge conditioned
//!   above the window floor (reflection formula, closed-form quadratic);
//! - splitting a window at its argmin uses the first-passage factorization
//!   of the argmin time (both halves are first-passage paths, i.e. Bessel(3)
//!   bridges after Williams time reversal);
//! - interior values of those zero-end pieces are norms of 3-d Gaussian
//!   bridge conditionals;
//! - labels extend along the realized tree with Brownian bridge splits of
//!   realized edges plus fresh increments, one conditional draw per new
//!   point (the realized points on any root path form the node's ancestor
//!   chain, so the enclosing edge is found by walking parents).
//!
//! Refinement policy: a window is refined while its revealed labels are
//! within `margin * delta^{1/4}` above a still-undecided threshold
//! (`delta` = window duration). A minimum far below a threshold decides it
//! immediately, far above leaves nothing in reach, and in the borderline
//! case work concentrates near the minimum, where the label occupation
//! measure grows like the fourth power of the label gap. The returned value
//! is the minimum over all revealed labels; its classification against each
//! threshold is exact up to the `margin` tail.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::Rng;
use crate::sampler::{sample_excursion, SampleConfig};

/// Tuning for the progressive minimum.
#[derive(Debug, Clone)]
pub struct ExactMinConfig {
    /// Reach multiplier for the refinement trigger.
    pub margin: f64,
    /// Safety valve: maximum number of window splits per sample.
    pub max_splits: usize,
}

impl Default for ExactMinConfig {
    fn default() -> Self {
        ExactMinConfig { margin: 8.0, max_splits: 1 << 20 }
    }
}

/// Realized point of the snake: a driving-path value with its label.
#[derive(Debug, Clone, Copy)]
struct Node {
    height: f64,
    label: f64,
    /// Next realized point down the root path (tree parent).
    parent: u32,
}

/// Contour window between two neighbouring realized leaves. The driving
/// path on it is a Brownian bridge conditioned to stay above `floor`
/// (endpoints included via first-passage conditioning when one radius is
/// zero); `branch` realizes the window's true minimum.
#[derive(Debug, Clone, Copy)]
struct Window {
    left: u32,
    right: u32,
    /// Node realizing the window minimum. Coincides with `left` or `right`
    /// for zero-end windows (first-passage pieces).
    branch: u32,
    duration: f64,
    floor: f64,
}

/// Inverse CDF sample of the minimum of a Brownian bridge from `u` to `v`
/// (heights above the floor, both > 0) over duration `s`, conditioned to
/// stay positive. `P(min <= m) = [e^{-2(u-m)(v-m)/s} - e^{-2uv/s}] /
/// [1 - e^{-2uv/s}]`; solving for `m` is a quadratic.
fn sample_window_min(u: f64, v: f64, s: f64, rng: &mut Rng) -> f64 {
    debug_assert!(u > 0.0 && v > 0.0 && s > 0.0);
    let w = 1.0 - rng.gen::<f64>(); // (0, 1]
    // q = -s/2 * ln c with c = e^{-2uv/s} + w (1 - e^{-2uv/s}), computed
    // stably for both large and tiny 2uv/s.
    let e = -(-2.0 * u * v / s).exp_m1(); // 1 - e^{-2uv/s} in (0, 1]
    let q = -0.5 * s * (-(1.0 - w) * e).ln_1p(); // in (0, uv)
    let d = (u - v) * (u - v) + 4.0 * q;
    let m = 0.5 * ((u + v) - d.sqrt());
    m.clamp(0.0, u.min(v))
}

/// Sample of the argmin time of a Brownian bridge with min gap `a` at the
/// left end and `b` at the right end, duration `s`: density proportional to
/// `t^{-3/2} (s-t)^{-3/2} exp(-a^2/2t - b^2/2(s-t))` (two first-passage
/// kernels). Numeric inversion of the CDF on a sigmoid-spaced grid.
fn sample_argmin_time(a: f64, b: f64, s: f64, rng: &mut Rng) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && s > 0.0);
    const K: usize = 96;
    // Log-density up to a constant, in the variable x with t = s*sigmoid(x).
    // Includes the Jacobian dt/dx = s * sig * (1 - sig).
    let log_f = |x: f64| -> f64 {
        let sig = 1.0 / (1.0 + (-x).exp());
        let t = s * sig;
        let r = s - t;
        if t <= 0.0 || r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        -1.5 * (t.ln() + r.ln()) - a * a / (2.0 * t) - b * b / (2.0 * r) + (s * sig * (1.0 - sig)).ln()
    };
    let lo = -16.0;
    let hi = 16.0;
    let step = (hi - lo) / (K as f64 - 1.0);
    let mut logs = [0.0f64; K];
    let mut max_log = f64::NEG_INFINITY;
    for (k, l) in logs.iter_mut().enumerate() {
        *l = log_f(lo + step * k as f64);
        if *l > max_log {
            max_log = *l;
        }
    }
    let mut cdf = [0.0f64; K];
    let mut acc = 0.0;
    for k in 1..K {
        let f0 = (logs[k - 1] - max_log).exp();
        let f1 = (logs[k] - max_log).exp();
        acc += 0.5 * (f0 + f1);
        cdf[k] = acc;
    }
    let target = (1.0 - rng.gen::<f64>()) * acc;
    let mut k = 1;
    while k < K - 1 && cdf[k] < target {
        k += 1;
    }
    let c0 = cdf[k - 1];
    let c1 = cdf[k];
    let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
    let x = lo + step * ((k - 1) as f64 + frac);
    let t = s / (1.0 + (-x).exp());
    t.clamp(s * 1e-12, s * (1.0 - 1e-12))
}

/// A progressively revealed snake sample with exact conditional laws.
pub struct RevealedSnake {
    nodes: Vec<Node>,
    windows: Vec<Window>,
    revealed_min: f64,
    splits: usize,
    base_grid: usize,
}

impl RevealedSnake {
    /// Sample the base grid of `N_x^{(t)}`: excursion values at `grid_size`
    /// uniform times, true per-window driving minima, and labels whose
    /// covariance is the exact continuum tree covariance at the leaves.
    pub fn sample(cfg: &SampleConfig, rng: &mut Rng) -> RevealedSnake {
        let n = cfg.grid_size;
        let dt = cfg.duration / n as f64;
        let heights = sample_excursion(n, cfg.duration, rng);
        // Per-window true minima of the driving path.
        let mut mins = Vec::with_capacity(n);
        for i in 0..n {
            let (u, v) = (heights[i], heights[i + 1]);
            if u == 0.0 || v == 0.0 {
                mins.push(0.0);
            } else {
                mins.push(sample_window_min(u, v, dt, rng));
            }
        }
        // Labels by the stack walk, popping to the true window minima and
        // realizing each interior branch label on the way.
        let x = cfg.start_label;
        let mut nodes: Vec<Node> = Vec::with_capacity(2 * n + 2);
        nodes.push(Node { height: 0.0, label: x, parent: 0 }); // root & leaf 0
        let mut leaf_ids = Vec::with_capacity(n + 1);
        leaf_ids.push(0u32);
        let mut branch_ids = Vec::with_capacity(n);
        // Stack of realized points on the current root path: (node id),
        // strictly increasing heights from the root.
        let mut stack: Vec<u32> = vec![0];
        for i in 0..n {
            let m = mins[i];
            let h_new = heights[i + 1];
            // Pop to the branch height m, splitting the straddling edge.
            while nodes[*stack.last().unwrap() as usize].height > m {
                let top = stack.pop().unwrap();
                let below = *stack.last().unwrap();
                let hb = nodes[below as usize].height;
                if hb < m {
                    // Realize the branch on the edge below->top.
                    let ht = nodes[top as usize].height;
                    let (lb, lt) = (nodes[below as usize].label, nodes[top as usize].label);
                    let len = ht - hb;
                    let frac = (m - hb) / len;
                    let mean = lb + (lt - lb) * frac;
                    let var = (m - hb) * (ht - m) / len;
                    let g: f64 = rng.sample(StandardNormal);
                    let id = nodes.len() as u32;
                    nodes.push(Node { height: m, label: mean + var.sqrt() * g, parent: below });
                    nodes[top as usize].parent = id;
                    stack.push(id);
                    break;
                }
                // hb == m can only happen for m == 0 (root); equal interior
                // heights have probability zero.
            }
            let attach = *stack.last().unwrap();
            debug_assert!(nodes[attach as usize].height <= m + 1e-15);
            branch_ids.push(attach);
            // Ascend to the new leaf.
            if h_new > m {
                let g: f64 = rng.sample(StandardNormal);
                let label = nodes[attach as usize].label + (h_new - m).sqrt() * g;
                let id = nodes.len() as u32;
                nodes.push(Node { height: h_new, label, parent: attach });
                stack.push(id);
                leaf_ids.push(id);
            } else {
                // Final descent to the root (h_new == 0).
                leaf_ids.push(attach);
            }
        }
        let windows: Vec<Window> = (0..n)
            .map(|i| Window {
                left: leaf_ids[i],
                right: leaf_ids[i + 1],
                branch: branch_ids[i],
                duration: dt,
                floor: mins[i],
            })
            .collect();
        let revealed_min = nodes.iter().map(|n| n.label).fold(f64::INFINITY, f64::min);
        RevealedSnake { nodes, windows, revealed_min, splits: 0, base_grid: n }
    }

    /// Minimum over all labels revealed so far.
    pub fn revealed_min(&self) -> f64 {
        self.revealed_min
    }

    pub fn splits(&self) -> usize {
        self.splits
    }

    pub fn base_grid(&self) -> usize {
        self.base_grid
    }

    fn push_node(&mut self, node: Node) -> u32 {
        if node.label < self.revealed_min {
            self.revealed_min = node.label;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        id
    }

    /// Realize the label at height `m` on the root path of `leaf`:
    /// walk the ancestor chain to the enclosing realized edge and split it
    /// with the Brownian bridge conditional. Returns the new node.
    fn split_root_path(&mut self, leaf: u32, m: f64, rng: &mut Rng) -> u32 {
        let mut hi = leaf;
        let mut lo = self.nodes[hi as usize].parent;
        while self.nodes[lo as usize].height >= m {
            hi = lo;
            lo = self.nodes[lo as usize].parent;
            debug_assert!(hi != lo, "walked past the root looking for height {m}");
        }
        let (hb, lb) = (self.nodes[lo as usize].height, self.nodes[lo as usize].label);
        let (ht, lt) = (self.nodes[hi as usize].height, self.nodes[hi as usize].label);
        debug_assert!(hb < m && m < ht);
        let len = ht - hb;
        let frac = (m - hb) / len;
        let mean = lb + (lt - lb) * frac;
        let var = (m - hb) * (ht - m) / len;
        let g: f64 = rng.sample(StandardNormal);
        let id = self.push_node(Node { height: m, label: mean + var.sqrt() * g, parent: lo });
        self.nodes[hi as usize].parent = id;
        id
    }

    /// Split window `w`, replacing it by its two children in `self.windows`
    /// (one in place, one appended).
    fn split_window(&mut self, w: usize, rng: &mut Rng) {
        let win = self.windows[w];
        let (hl, hr) = (
            self.nodes[win.left as usize].height,
            self.nodes[win.right as usize].height,
        );
        let mb = self.nodes[win.branch as usize].height;
        self.splits += 1;
        if win.branch != win.left && win.branch != win.right {
            // Interior window: expose the argmin as a contour leaf. The
            // children are first-passage pieces whose minima sit at their
            // shared end, already realized.
            let theta = sample_argmin_time(hl - mb, hr - mb, win.duration, rng);
            self.windows[w] = Window {
                left: win.left,
                right: win.branch,
                branch: win.branch,
                duration: theta,
                floor: mb,
            };
            self.windows.push(Window {
                left: win.branch,
                right: win.right,
                branch: win.branch,
                duration: win.duration - theta,
                floor: mb,
            });
        } else {
            // Zero-end window (first-passage piece): Bessel(3) bridge from
            // the high end down to the floor. Sample the time midpoint as
            // the norm of a 3-d Gaussian bridge conditional.
            let (hi_leaf, lo_leaf) = if win.branch == win.right {
                (win.left, win.right)
            } else {
                (win.right, win.left)
            };
            let f = self.nodes[lo_leaf as usize].height;
            let c = self.nodes[hi_leaf as usize].height - f;
            debug_assert!(c > 0.0);
            let s = win.duration;
            let sd = 0.5 * s.sqrt();
            let g1: f64 = rng.sample(StandardNormal);
            let g2: f64 = rng.sample(StandardNormal);
            let g3: f64 = rng.sample(StandardNormal);
            let a1 = 0.5 * c + sd * g1;
            let v = f + (a1 * a1 + sd * sd * (g2 * g2 + g3 * g3)).sqrt();
            // Interior child (high end <-> midpoint): its true minimum and
            // branch label are realized now.
            let m = f + sample_window_min(c, v - f, 0.5 * s, rng);
            let branch = self.split_root_path(hi_leaf, m, rng);
            // The midpoint leaf grows from the new branch.
            let g: f64 = rng.sample(StandardNormal);
            let label = self.nodes[branch as usize].label + (v - m).sqrt() * g;
            let mid = self.push_node(Node { height: v, label, parent: branch });
            let (first, second) = if win.branch == win.right {
                // high end on the left
                (
                    Window { left: hi_leaf, right: mid, branch, duration: 0.5 * s, floor: f },
                    Window { left: mid, right: lo_leaf, branch: lo_leaf, duration: 0.5 * s, floor: f },
                )
            } else {
                (
                    Window { left: lo_leaf, right: mid, branch: lo_leaf, duration: 0.5 * s, floor: f },
                    Window { left: mid, right: hi_leaf, branch, duration: 0.5 * s, floor: f },
                )
            };
            self.windows[w] = first;
            self.windows.push(second);
        }
    }

    /// Refine until every threshold is either dipped under by a revealed
    /// label or has no window within `margin * duration^{1/4}` reach.
    pub fn resolve(&mut self, thresholds: &[f64], cfg: &ExactMinConfig, rng: &mut Rng) {
        loop {
            let mut open: Vec<f64> = thresholds
                .iter()
                .copied()
                .filter(|y| self.revealed_min >= *y)
                .collect();
            if open.is_empty() {
                return;
            }
            open.sort_by(f64::total_cmp);
            let highest = *open.last().unwrap();
            let mut flagged: Vec<usize> = Vec::new();
            for (i, win) in self.windows.iter().enumerate() {
                let revealed = self.nodes[win.left as usize]
                    .label
                    .min(self.nodes[win.right as usize].label)
                    .min(self.nodes[win.branch as usize].label);
                let reach = cfg.margin * win.duration.powf(0.25);
                // Windows are only ever relevant below the highest open
                // threshold plus their own reach.
                if revealed < highest + reach {
                    // Check against each open threshold (revealed >= y holds
                    // whenever y is open).
                    if open.iter().any(|y| revealed - y < reach) {
                        flagged.push(i);
                    }
                }
            }
            if flagged.is_empty() {
                return;
            }
            for i in flagged {
                if self.splits >= cfg.max_splits {
                    return;
                }
                self.split_window(i, rng);
            }
        }
    }
}

/// One `N_x^{(t)}` sample's label minimum, resolved so that its comparison
/// with each threshold is exact up to the margin tail.
pub fn sample_w_star_exact(
    cfg: &SampleConfig,
    thresholds: &[f64],
    tuning: &ExactMinConfig,
    rng: &mut Rng,
) -> f64 {
    let mut snake = RevealedSnake::sample(cfg, rng);
    snake.resolve(thresholds, tuning, rng);
    snake.revealed_min()
}
