use crate::error::{Error, Result};
use crate::model::{InputSignal, PhDaeSystem};
use crate::numerics::DenseMatrix;
use crate::scalar::Real;

/// Three-state academic example on `[0, 1]` driven by a half-period sine burst.
///
/// The state `(1, 0, 0)` is replaced by the consistent state with the same
/// differential part, `(1, 0, 10)`.
pub fn build_academic<T: Real>() -> PhDaeSystem<T> {
    let l = T::lit;
    let j = DenseMatrix::from_fn(3, 3, |r, c| match (r, c) {
        (0, 1) | (2, 0) => l(1.0),
        (0, 2) | (1, 0) => l(-1.0),
        _ => T::zero(),
    });
    let sys = PhDaeSystem::new(
        DenseMatrix::from_diag(&[l(1.0), l(1.0), l(0.0)]),
        j,
        DenseMatrix::from_diag(&[l(0.5), l(0.5), l(0.1)]),
        DenseMatrix::identity(3),
        DenseMatrix::column_vector(&[l(1.0), l(0.0), l(0.0)]),
        InputSignal::SineBurst {
            amplitude: 1.0,
            frequency: 1.0,
            cutoff: 0.5,
        },
        vec![l(1.0), l(0.0), l(0.0)],
        l(1.0),
    )
    .expect("academic example is well formed");
    sys.with_consistent_x0().expect("academic example reduces")
}

/// RCL ladder of `n_s` blocks fed by an ideal voltage source.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionLineSpec {
    pub blocks: usize,
    /// `C_1..C_{n_s-1}` at the interior even nodes.
    pub capacitances: Vec<f64>,
    /// `L_1..L_{n_s}`.
    pub inductances: Vec<f64>,
    /// `R_0..R_{n_s+1}`: source shunt, the series resistors, and the load.
    pub resistances: Vec<f64>,
    /// Leakage conductance added at every even node.
    pub epsilon: f64,
    pub horizon: f64,
    pub input: InputSignal,
}

impl TransmissionLineSpec {
    pub fn uniform(blocks: usize, c: f64, l: f64, r: f64, epsilon: f64, horizon: f64, input: InputSignal) -> Self {
        Self {
            blocks,
            capacitances: vec![c; blocks.saturating_sub(1)],
            inductances: vec![l; blocks],
            resistances: vec![r; blocks + 2],
            epsilon,
            horizon,
            input,
        }
    }

    pub fn gaussian_pulse() -> InputSignal {
        InputSignal::Gaussian {
            amplitude: 50.0,
            center: 0.5,
            width: 0.05,
        }
    }

    /// 50 blocks, `R = 2`, no leakage, `T = 10`.
    pub fn waveform() -> Self {
        Self::uniform(50, 1.0, 1.0, 2.0, 0.0, 10.0, Self::gaussian_pulse())
    }

    /// 100 blocks, `R = 0.35`, unit leakage, `T = 10`.
    pub fn convergence() -> Self {
        Self::uniform(100, 1.0, 1.0, 0.35, 1.0, 10.0, Self::gaussian_pulse())
    }

    pub fn state_dim(&self) -> usize {
        3 * self.blocks + 2
    }

    /// Number of voltage nodes `e_0..e_{2n_s}`.
    pub fn nodes(&self) -> usize {
        2 * self.blocks + 1
    }

    fn validate(&self) -> Result<()> {
        let ns = self.blocks;
        if ns == 0 {
            return Err(Error::TopologyError("need at least one block".into()));
        }
        if self.capacitances.len() != ns - 1 || self.inductances.len() != ns || self.resistances.len() != ns + 2 {
            return Err(Error::TopologyError("element counts do not match the block count".into()));
        }
        let all = self.capacitances.iter().chain(&self.inductances).chain(&self.resistances);
        if all.clone().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::TopologyError("element values must be positive and finite".into()));
        }
        if !(self.epsilon >= 0.0) || !(self.horizon > 0.0) {
            return Err(Error::TopologyError("epsilon must be non-negative and the horizon positive".into()));
        }
        Ok(())
    }
}

/// Incidence matrices `(A_C, A_L, A_R, A_V)` of the ladder.
pub fn ladder_incidence<T: Real>(spec: &TransmissionLineSpec) -> [DenseMatrix<T>; 4] {
    let ns = spec.blocks;
    let nodes = spec.nodes();
    let one = T::one();
    let mut a_c = DenseMatrix::zeros(nodes, ns - 1);
    for k in 1..ns {
        a_c[(2 * k, k - 1)] = one;
    }
    let mut a_l = DenseMatrix::zeros(nodes, ns);
    for k in 1..=ns {
        a_l[(2 * k - 1, k - 1)] = one;
        a_l[(2 * k, k - 1)] = -one;
    }
    let mut a_r = DenseMatrix::zeros(nodes, ns + 2);
    a_r[(0, 0)] = one;
    for k in 1..=ns {
        a_r[(2 * k - 2, k)] = one;
        a_r[(2 * k - 1, k)] = -one;
    }
    a_r[(2 * ns, ns + 1)] = one;
    let mut a_v = DenseMatrix::zeros(nodes, 1);
    a_v[(0, 0)] = -one;
    [a_c, a_l, a_r, a_v]
}

/// Modified nodal analysis model with state `(e, ı_L, ı_V)`.
///
/// An initial state with `e_0 = 1` contradicts the source equation
/// `e_0 = u(0)`; it is replaced by the consistent state with the same
/// differential part.
pub fn build_transmission_line<T: Real>(spec: &TransmissionLineSpec) -> Result<PhDaeSystem<T>> {
    spec.validate()?;
    let ns = spec.blocks;
    let nodes = spec.nodes();
    let n = spec.state_dim();
    let l = T::lit;
    let [a_c, a_l, a_r, a_v] = ladder_incidence::<T>(spec);
    let cap = DenseMatrix::from_diag(&spec.capacitances.iter().map(|&c| l(c)).collect::<Vec<_>>());
    let cond = DenseMatrix::from_diag(&spec.resistances.iter().map(|&r| l(1.0 / r)).collect::<Vec<_>>());
    let ecc = a_c.matmul(&cap)?.matmul(&a_c.transpose())?;
    let mut grr = a_r.matmul(&cond)?.matmul(&a_r.transpose())?;
    for node in (0..nodes).step_by(2) {
        grr[(node, node)] += l(spec.epsilon);
    }
    let iv = nodes + ns;
    let mut e = DenseMatrix::zeros(n, n);
    let mut j = DenseMatrix::zeros(n, n);
    let mut r = DenseMatrix::zeros(n, n);
    for a in 0..nodes {
        for b in 0..nodes {
            e[(a, b)] = ecc[(a, b)];
            r[(a, b)] = grr[(a, b)];
        }
        for k in 0..ns {
            j[(a, nodes + k)] = -a_l[(a, k)];
            j[(nodes + k, a)] = a_l[(a, k)];
        }
        j[(a, iv)] = -a_v[(a, 0)];
        j[(iv, a)] = a_v[(a, 0)];
    }
    for k in 0..ns {
        e[(nodes + k, nodes + k)] = l(spec.inductances[k]);
    }
    let mut b = DenseMatrix::zeros(n, 1);
    b[(iv, 0)] = T::one();
    let mut x0 = vec![T::zero(); n];
    x0[0] = T::one();
    let sys = PhDaeSystem::new(e, j, r, DenseMatrix::identity(n), b, spec.input.clone(), x0, l(spec.horizon))?;
    sys.with_consistent_x0()
}
