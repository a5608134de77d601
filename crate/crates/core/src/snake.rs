//! Discretized snake trajectories and the pseudo-metrics of the labelled
//! trees they encode.
//!
//! A snake trajectory is determined by its lifetime function `zeta` and its
//! tip function `w_hat`, both sampled here on a grid of `N + 1` points. The
//! lifetime array encodes a rooted real tree via the contour pseudo-distance
//!
//! ```text
//!   d_tree(s, t) = zeta_s + zeta_t - 2 * min(zeta over [s, t])
//! ```
//!
//! and the tip array carries the tree's Brownian labels. On top of these the
//! module evaluates the one-chain sphere pseudo-distance `d_circ` (with the
//! wraparound interval convention) and the slice pseudo-distance `d_tilde`
//! (wraparound forbidden).
//!
//! All minima are taken over stored values, so the pseudo-distances are zero
//! exactly (bitwise) when two grid points code the same tree or surface
//! point; quotienting never depends on a tolerance.

use std::io::{BufRead, Write};

use crate::rmq::SparseTable;

#[derive(Debug, thiserror::Error)]
pub enum SnakeError {
    #[error("invalid snake data: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite path: real labels on a uniform grid over `[0, lifetime]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePath {
    values: Vec<f64>,
    lifetime: f64,
}

impl FinitePath {
    pub fn new(values: Vec<f64>, lifetime: f64) -> Result<Self, SnakeError> {
        if !(lifetime >= 0.0) {
            return Err(SnakeError::Invalid(format!("negative lifetime {lifetime}")));
        }
        if values.is_empty() {
            return Err(SnakeError::Invalid("empty value array".into()));
        }
        if lifetime == 0.0 && values.len() != 1 {
            return Err(SnakeError::Invalid(
                "zero-lifetime path must hold exactly one value".into(),
            ));
        }
        Ok(FinitePath { values, lifetime })
    }

    /// The constant path sitting at `x` (zero lifetime).
    pub fn point(x: f64) -> Self {
        FinitePath {
            values: vec![x],
            lifetime: 0.0,
        }
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn origin(&self) -> f64 {
        self.values[0]
    }

    /// Final grid value, the path's tip.
    pub fn tip(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A grid-sampled snake trajectory: lifetime and tip arrays over `N + 1`
/// uniform grid points spanning contour time `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSnake {
    duration: f64,
    lifetime: Vec<f64>,
    tip: Vec<f64>,
}

impl DiscreteSnake {
    pub fn new(duration: f64, lifetime: Vec<f64>, tip: Vec<f64>) -> Result<Self, SnakeError> {
        if !(duration > 0.0) {
            return Err(SnakeError::Invalid(format!("duration must be positive, got {duration}")));
        }
        if lifetime.len() != tip.len() {
            return Err(SnakeError::Invalid(format!(
                "lifetime length {} != tip length {}",
                lifetime.len(),
                tip.len()
            )));
        }
        if lifetime.len() < 2 {
            return Err(SnakeError::Invalid("need at least two grid points".into()));
        }
        if lifetime.iter().any(|z| !(*z >= 0.0)) {
            return Err(SnakeError::Invalid("lifetime values must be nonnegative".into()));
        }
        let n = lifetime.len() - 1;
        if lifetime[0] != 0.0 || lifetime[n] != 0.0 {
            return Err(SnakeError::Invalid("lifetime must vanish at both endpoints".into()));
        }
        if tip[0] != tip[n] {
            return Err(SnakeError::Invalid("tip must return to the starting label".into()));
        }
        if tip.iter().any(|w| !w.is_finite()) {
            return Err(SnakeError::Invalid("tip values must be finite".into()));
        }
        Ok(DiscreteSnake { duration, lifetime, tip })
    }

    /// Number of grid steps `N` (arrays hold `N + 1` samples).
    pub fn grid_size(&self) -> usize {
        self.lifetime.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Starting (and ending) label `x`.
    pub fn origin(&self) -> f64 {
        self.tip[0]
    }

    pub fn lifetime(&self) -> &[f64] {
        &self.lifetime
    }

    pub fn tip(&self) -> &[f64] {
        &self.tip
    }

    /// Grid minimum of the tip array, `W_*` at grid scale.
    pub fn w_star(&self) -> f64 {
        self.tip.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest index attaining the tip minimum.
    pub fn s_star(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.tip.iter().enumerate() {
            if *w < self.tip[best] {
                best = i;
            }
        }
        best
    }

    /// CSV serialization: one header line `sigma,N,x`, then `N + 1` rows
    /// `zeta_i,What_i`. Floats use Rust's shortest round-trip formatting,
    /// so read-back is bit-exact.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), SnakeError> {
        writeln!(out, "{},{},{}", self.duration, self.grid_size(), self.origin())?;
        for i in 0..self.lifetime.len() {
            writeln!(out, "{},{}", self.lifetime[i], self.tip[i])?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, SnakeError> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| SnakeError::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let parts: Vec<&str> = header.trim().split(',').collect();
        if parts.len() != 3 {
            return Err(SnakeError::Parse { line: 1, msg: "header must be sigma,N,x".into() });
        }
        let parse = |s: &str, line: usize| -> Result<f64, SnakeError> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| SnakeError::Parse { line, msg: e.to_string() })
        };
        let duration = parse(parts[0], 1)?;
        let n: usize = parts[1]
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| SnakeError::Parse { line: 1, msg: e.to_string() })?;
        let x = parse(parts[2], 1)?;
        let mut lifetime = Vec::with_capacity(n + 1);
        let mut tip = Vec::with_capacity(n + 1);
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.trim().split(',').collect();
            if parts.len() != 2 {
                return Err(SnakeError::Parse { line: idx + 1, msg: "row must be zeta,tip".into() });
            }
            lifetime.push(parse(parts[0], idx + 1)?);
            tip.push(parse(parts[1], idx + 1)?);
        }
        if lifetime.len() != n + 1 {
            return Err(SnakeError::Parse {
                line: 0,
                msg: format!("expected {} rows, found {}", n + 1, lifetime.len()),
            });
        }
        let snake = DiscreteSnake::new(duration, lifetime, tip)?;
        if snake.origin() != x {
            return Err(SnakeError::Parse { line: 1, msg: "header x disagrees with tip[0]".into() });
        }
        Ok(snake)
    }
}

/// Structural view of the tree coded by a snake: range-minimum structures
/// over the lifetime and tip arrays, plus the pseudo-distance formulas.
pub struct TreeIndex {
    snake: DiscreteSnake,
    lifetime_rmq: SparseTable,
    tip_rmq: SparseTable,
    s_star: usize,
}

impl TreeIndex {
    pub fn new(snake: DiscreteSnake) -> Self {
        let lifetime_rmq = SparseTable::new(snake.lifetime());
        let tip_rmq = SparseTable::new(snake.tip());
        let s_star = tip_rmq.global_argmin();
        TreeIndex { snake, lifetime_rmq, tip_rmq, s_star }
    }

    pub fn snake(&self) -> &DiscreteSnake {
        &self.snake
    }

    pub fn grid_size(&self) -> usize {
        self.snake.grid_size()
    }

    /// Smallest grid index attaining the global tip minimum.
    pub fn s_star(&self) -> usize {
        self.s_star
    }

    /// Global tip minimum `W_*` over the grid.
    pub fn w_star(&self) -> f64 {
        self.snake.tip()[self.s_star]
    }

    /// Label of the tree point visited at grid index `s`.
    pub fn label(&self, s: usize) -> f64 {
        self.snake.tip()[s]
    }

    pub fn lifetime_at(&self, s: usize) -> f64 {
        self.snake.lifetime()[s]
    }

    fn check(&self, s: usize) {
        assert!(s <= self.grid_size(), "grid index {s} out of range 0..={}", self.grid_size());
    }

    /// Contour pseudo-distance on the tree:
    /// `zeta_s + zeta_t - 2 min(zeta over [s..t])`.
    ///
    /// Computed as a sum of two exact nonnegative gaps, so it is bitwise zero
    /// iff both lifetimes equal the interval minimum.
    pub fn tree_distance(&self, s: usize, t: usize) -> f64 {
        self.check(s);
        self.check(t);
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let m = self.lifetime_rmq.min(lo, hi);
        (self.snake.lifetime()[s] - m) + (self.snake.lifetime()[t] - m)
    }

    /// Minimum lifetime over the (non-wrapping) index range `[lo, hi]`.
    pub fn lifetime_min(&self, lo: usize, hi: usize) -> f64 {
        self.check(lo);
        self.check(hi);
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        self.lifetime_rmq.min(lo, hi)
    }

    /// Minimum tip label over the interval `[s, t]`, with the wraparound
    /// convention `[s, t] = [s, N] U [0, t]` when `t < s`.
    pub fn interval_min_label(&self, s: usize, t: usize) -> f64 {
        self.check(s);
        self.check(t);
        if s <= t {
            self.tip_rmq.min(s, t)
        } else {
            let n = self.grid_size();
            self.tip_rmq.min(s, n).min(self.tip_rmq.min(0, t))
        }
    }

    /// Argmin version of [`interval_min_label`], smallest index on ties
    /// scanning `s..`, wrapping.
    pub fn interval_argmin_label(&self, s: usize, t: usize) -> usize {
        self.check(s);
        self.check(t);
        if s <= t {
            self.tip_rmq.argmin(s, t)
        } else {
            let n = self.grid_size();
            let a = self.tip_rmq.argmin(s, n);
            let b = self.tip_rmq.argmin(0, t);
            let (va, vb) = (self.snake.tip()[a], self.snake.tip()[b]);
            if vb < va {
                b
            } else {
                a
            }
        }
    }

    /// One-chain sphere pseudo-distance between the tree points visited at
    /// `s` and `t`:
    /// `l_s + l_t - 2 max(min over [s,t], min over [t,s])`.
    ///
    /// Exactly zero iff both labels equal the better interval minimum.
    pub fn d_circ(&self, s: usize, t: usize) -> f64 {
        self.check(s);
        self.check(t);
        let m = self
            .interval_min_label(s, t)
            .max(self.interval_min_label(t, s));
        let tip = self.snake.tip();
        (tip[s] - m) + (tip[t] - m)
    }

    /// Slice pseudo-distance on contour times (wraparound forbidden):
    /// `W_s + W_t - 2 min(W over [min(s,t), max(s,t)])`.
    pub fn d_tilde(&self, s: usize, t: usize) -> f64 {
        self.check(s);
        self.check(t);
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let m = self.tip_rmq.min(lo, hi);
        let tip = self.snake.tip();
        (tip[s] - m) + (tip[t] - m)
    }

    /// Slice pseudo-distance between tree points given as lists of grid
    /// representatives: the infimum of `d_tilde` over representative pairs.
    ///
    /// Panics if either representative list is empty.
    pub fn d_tilde_circ(&self, u_reps: &[usize], v_reps: &[usize]) -> f64 {
        assert!(
            !u_reps.is_empty() && !v_reps.is_empty(),
            "d_tilde_circ needs at least one representative per class"
        );
        let mut best = f64::INFINITY;
        for &s in u_reps {
            for &t in v_reps {
                let d = self.d_tilde(s, t);
                if d < best {
                    best = d;
                }
            }
        }
        best
    }

    /// Sphere pseudo-distance between tree points given as representative
    /// lists: labels are class constants, the interval max-min is maximized
    /// over representative pairs (best pair of contour intervals).
    pub fn d_circ_classes(&self, u_reps: &[usize], v_reps: &[usize]) -> f64 {
        assert!(
            !u_reps.is_empty() && !v_reps.is_empty(),
            "d_circ_classes needs at least one representative per class"
        );
        let tip = self.snake.tip();
        let mut m = f64::NEG_INFINITY;
        for &s in u_reps {
            for &t in v_reps {
                let c = self
                    .interval_min_label(s, t)
                    .max(self.interval_min_label(t, s));
                if c > m {
                    m = c;
                }
            }
        }
        (tip[u_reps[0]] - m) + (tip[v_reps[0]] - m)
    }
}
