use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest admissible step relative to the horizon.
pub const MIN_STEP_REL: f64 = 1e-14;

/// Partition `0 = t_0 < t_1 < … < t_N = T`.
///
/// Intervals are addressed with 0-based indices: interval `j` is
/// `(t_j, t_{j+1}]` and has step `k_j = t_{j+1} - t_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid<T> {
    nodes: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if nodes[0] != T::zero() {
            return Err(Error::InvalidGrid("first node must be 0".into()));
        }
        let horizon = nodes[nodes.len() - 1];
        let min_step = T::lit(MIN_STEP_REL) * horizon;
        for (j, w) in nodes.windows(2).enumerate() {
            if !(w[1] - w[0] > min_step) {
                return Err(Error::InvalidGrid(format!(
                    "step {j} is {:e}, needs to exceed {:e}",
                    (w[1] - w[0]).to_f64_lossy(),
                    min_step.to_f64_lossy()
                )));
            }
        }
        Ok(Self { nodes })
    }

    pub fn uniform(horizon: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        let nf = T::from_usize_lossy(n);
        let mut nodes: Vec<T> = (0..=n).map(|i| horizon * T::from_usize_lossy(i) / nf).collect();
        nodes[n] = horizon;
        Self::new(nodes)
    }

    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn horizon(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn step(&self, j: usize) -> T {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn steps(&self) -> Vec<T> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(t_j, t_{j+1})`.
    pub fn interval(&self, j: usize) -> (T, T) {
        (self.nodes[j], self.nodes[j + 1])
    }

    pub fn midpoint(&self, j: usize) -> T {
        T::lit(0.5) * (self.nodes[j] + self.nodes[j + 1])
    }

    pub fn min_step(&self) -> T {
        self.steps().into_iter().fold(T::infinity(), T::min)
    }

    /// Index of the interval containing `t`, with intervals closed on the right.
    pub fn locate(&self, t: T) -> usize {
        let j = self.nodes.partition_point(|&s| s < t);
        j.saturating_sub(1).min(self.len() - 1)
    }
}

/// Per-interval constant vectors on a grid, plus the left datum.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant<T> {
    grid: TimeGrid<T>,
    initial: Vec<T>,
    values: Vec<Vec<T>>,
}

impl<T: Real> PiecewiseConstant<T> {
    pub fn new(grid: TimeGrid<T>, initial: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let r = initial.len();
        if values.iter().any(|v| v.len() != r) {
            return Err(Error::Dimension("piecewise constant values of mixed length".into()));
        }
        if values.iter().flatten().chain(&initial).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("piecewise constant values"));
        }
        Ok(Self { grid, initial, values })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    /// Value on interval `j`.
    pub fn value(&self, j: usize) -> &[T] {
        &self.values[j]
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    /// Value on interval `j - 1`, or the left datum for `j = 0`.
    pub fn previous(&self, j: usize) -> &[T] {
        if j == 0 {
            &self.initial
        } else {
            &self.values[j - 1]
        }
    }

    /// Jump `x^j - x^{j-1}` entering interval `j`.
    pub fn jump(&self, j: usize) -> Vec<T> {
        crate::numerics::sub(self.value(j), self.previous(j))
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    /// Value at time `t` (right-continuous at nodes, left datum before `t_0`).
    pub fn eval(&self, t: T) -> &[T] {
        if t <= T::zero() {
            return &self.initial;
        }
        &self.values[self.grid.locate(t)]
    }
}
