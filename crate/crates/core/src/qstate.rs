//! State vectors, density matrices and the few linear-algebra primitives the
//! tangle computations are built from.
//!
//! Qubits are addressed by zero-based index, and qubit 0 is the most
//! significant bit of a computational-basis index. With that convention
//! `|q0 q1 q2 q3>` bitstrings transcribe literally into array positions:
//! `|0110>` is amplitude index `0b0110`.

use std::fs;
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 8;

/// Tolerance below which an eigenvalue counts as zero when deciding rank.
pub const RANK_TOL: f64 = 1e-8;
/// Entrywise Hermiticity tolerance for trace norms.
pub const HERMITIAN_TOL: f64 = 1e-10;

const NORM_WARN_TOL: f64 = 1e-6;
const SINGULAR_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Normalized pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
    /// Euclidean norm of the vector handed to the constructor.
    original_norm: f64,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCount(n_qubits, "1..=8"));
        }
        let expected = 1usize << n_qubits;
        if amplitudes.len() != expected {
            return Err(Error::AmplitudeLength { n: n_qubits, got: amplitudes.len(), expected });
        }
        let norm = vector_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amplitudes, original_norm: norm })
    }

    /// Infers the qubit count from the vector length.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::StateFile(format!("length {len} is not a power of two")));
        }
        Self::new(len.trailing_zeros() as usize, amplitudes)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits.min(MAX_QUBITS + 1);
        if index >= dim {
            return Err(Error::Parameters(format!("basis index {index} out of range")));
        }
        let mut amps = vec![C64::default(); dim];
        amps[index] = c(1.0, 0.0);
        Self::new(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn original_norm(&self) -> f64 {
        self.original_norm
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let v = DVector::from_column_slice(&self.amplitudes);
        DensityMatrix::from_raw(self.n_qubits, &v * v.adjoint())
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Reduced density matrix on `keep` (strictly increasing qubit indices).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = self.reshape(&BitSplit::new(self.n_qubits, keep)?);
        Ok(DensityMatrix::from_raw(keep.len(), &m * m.adjoint()))
    }

    /// The amplitudes reshaped into a (kept x environment) matrix `M`, so
    /// that the marginal on `keep` is `M M^dagger`. Keeping every qubit gives
    /// the state as a single column.
    pub fn marginal_factor(&self, keep: &[usize]) -> Result<DMatrix<C64>> {
        if keep.len() == self.n_qubits && keep.iter().enumerate().all(|(i, &q)| i == q) {
            return Ok(DMatrix::from_column_slice(self.dim(), 1, &self.amplitudes));
        }
        Ok(self.reshape(&BitSplit::new(self.n_qubits, keep)?))
    }

    fn reshape(&self, split: &BitSplit) -> DMatrix<C64> {
        let mut reshaped = DMatrix::<C64>::zeros(split.keep_dim(), split.env_dim());
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let (k, e) = split.split(index);
            reshaped[(k, e)] = *amp;
        }
        reshaped
    }

    pub fn to_file_format(&self) -> StateFile {
        StateFile {
            n: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Splits a basis index into the bits of a kept subset and its complement,
/// both read in increasing qubit order.
struct BitSplit {
    n: usize,
    keep: Vec<usize>,
    env: Vec<usize>,
}

impl BitSplit {
    fn new(n: usize, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.len() >= n {
            return Err(Error::Subset(format!(
                "keep set must be a nonempty strict subset of {n} qubits, got {keep:?}"
            )));
        }
        if let Some(&bad) = keep.iter().find(|&&q| q >= n) {
            return Err(Error::QubitIndex { index: bad, n });
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Subset(format!("keep set {keep:?} is not strictly increasing")));
        }
        let env = (0..n).filter(|q| !keep.contains(q)).collect();
        Ok(Self { n, keep: keep.to_vec(), env })
    }

    fn keep_dim(&self) -> usize {
        1 << self.keep.len()
    }

    fn env_dim(&self) -> usize {
        1 << self.env.len()
    }

    fn gather(&self, index: usize, qubits: &[usize]) -> usize {
        qubits.iter().fold(0, |acc, &q| (acc << 1) | ((index >> (self.n - 1 - q)) & 1))
    }

    fn split(&self, index: usize) -> (usize, usize) {
        (self.gather(index, &self.keep), self.gather(index, &self.env))
    }
}

/// Density operator on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian to 1e-12, unit trace to 1e-12 and
    /// eigenvalues no lower than -1e-10.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim < 2 || entries.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::Parameters(format!(
                "density matrix must be square with power-of-two size, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let dev = hermitian_deviation(&entries);
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Trace(tr.re));
        }
        let min = sorted_eigen(&entries).0.last().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NotPsd(min));
        }
        Ok(Self::from_raw(dim.trailing_zeros() as usize, entries))
    }

    /// Wraps a matrix that is a density operator by construction.
    pub(crate) fn from_raw(n_qubits: usize, entries: DMatrix<C64>) -> Self {
        Self { n_qubits, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = BitSplit::new(self.n_qubits, keep)?;
        let kd = split.keep_dim();
        let mut out = DMatrix::<C64>::zeros(kd, kd);
        let dim = self.dim();
        for i in 0..dim {
            let (ki, ei) = split.split(i);
            for j in 0..dim {
                let (kj, ej) = split.split(j);
                if ei == ej {
                    out[(ki, kj)] += self.entries[(i, j)];
                }
            }
        }
        Ok(DensityMatrix::from_raw(keep.len(), out))
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigen(&self.entries).0
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Hermitian eigendecomposition sorted by decreasing eigenvalue.
pub(crate) fn sorted_eigen(m: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    (values, vectors)
}

/// Rotates `v` so its first non-negligible component is real and positive.
fn fix_phase(v: &mut DVector<C64>) {
    if let Some(lead) = v.iter().find(|a| a.norm() > 1e-10).copied() {
        let phase = lead.conj() / lead.norm();
        v.iter_mut().for_each(|a| *a *= phase);
    }
}

/// Spectral form `lambda |e1><e1| + (1 - lambda) |e2><e2|` of a state of
/// rank at most two.
#[derive(Clone, Debug)]
pub struct Rank2Decomposition {
    pub lambda: f64,
    pub e1: DVector<C64>,
    pub e2: DVector<C64>,
    /// Set when the second eigenvalue is below the rank tolerance; `e2` is
    /// then an arbitrary orthogonal completion.
    pub pure: bool,
}

impl Rank2Decomposition {
    pub fn n_qubits(&self) -> usize {
        self.e1.len().trailing_zeros() as usize
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let l = c(self.lambda, 0.0);
        let r = c(1.0 - self.lambda, 0.0);
        &self.e1 * self.e1.adjoint() * l + &self.e2 * self.e2.adjoint() * r
    }

    /// `dim x 2` isometry with columns `e1`, `e2`.
    pub fn basis(&self) -> DMatrix<C64> {
        DMatrix::from_columns(&[self.e1.clone(), self.e2.clone()])
    }
}

pub fn rank2_decompose(rho: &DensityMatrix) -> Result<Rank2Decomposition> {
    let (values, mut vectors) = sorted_eigen(rho.entries());
    if let Some(&third) = values.get(2) {
        if third >= RANK_TOL {
            return Err(Error::RankExceeded(third));
        }
    }
    let l1 = values[0];
    let l2 = values[1].max(0.0);
    let pure = l2 < RANK_TOL;
    let lambda = if pure { 1.0 } else { (l1 / (l1 + l2)).clamp(0.5, 1.0) };
    let mut e2 = vectors.swap_remove(1);
    let mut e1 = vectors.swap_remove(0);
    fix_phase(&mut e1);
    fix_phase(&mut e2);
    Ok(Rank2Decomposition { lambda, e1, e2, pure })
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &DMatrix<C64>) -> Result<f64> {
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let eig = SymmetricEigen::new(m.clone());
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Applies `ops[k]` to qubit `k` and renormalizes. The returned state's
/// `original_norm` is the norm of the unnormalized image.
pub fn apply_local_operators(psi: &PureState, ops: &[Matrix2<C64>]) -> Result<PureState> {
    let n = psi.n_qubits();
    if ops.len() != n {
        return Err(Error::OperatorCount { expected: n, got: ops.len() });
    }
    for (qubit, op) in ops.iter().enumerate() {
        let det = op.determinant().norm();
        if det < SINGULAR_TOL {
            return Err(Error::SingularOperator { qubit, det });
        }
    }
    let mut amps = psi.amplitudes().to_vec();
    for (qubit, op) in ops.iter().enumerate() {
        let stride = 1usize << (n - 1 - qubit);
        for base in 0..amps.len() {
            if base & stride != 0 {
                continue;
            }
            let (a0, a1) = (amps[base], amps[base | stride]);
            amps[base] = op[(0, 0)] * a0 + op[(0, 1)] * a1;
            amps[base | stride] = op[(1, 0)] * a0 + op[(1, 1)] * a1;
        }
    }
    PureState::new(n, amps)
}

/// On-disk state format: `{"n": 4, "amplitudes": [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn into_state(self) -> Result<PureState> {
        let expected = 1usize.checked_shl(self.n as u32).unwrap_or(0);
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::StateFile(format!("\"n\" must be in 1..=8, got {}", self.n)));
        }
        if self.amplitudes.len() != expected {
            return Err(Error::StateFile(format!(
                "\"amplitudes\" has {} entries, expected 2^{} = {expected}",
                self.amplitudes.len(),
                self.n
            )));
        }
        let amps: Vec<C64> = self.amplitudes.iter().map(|[re, im]| c(*re, *im)).collect();
        let state = PureState::new(self.n, amps)?;
        if (state.original_norm() - 1.0).abs() > NORM_WARN_TOL {
            warn!("state norm is {}, normalizing", state.original_norm());
        }
        Ok(state)
    }
}

pub fn parse_state_json(text: &str) -> Result<PureState> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| Error::StateFile(format!("expected {{\"n\": int, \"amplitudes\": [[re, im], ...]}}: {e}")))?;
    file.into_state()
}

pub fn read_state_file(path: &Path) -> Result<PureState> {
    parse_state_json(&fs::read_to_string(path)?)
}

pub fn write_state_file(path: &Path, state: &PureState) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&state.to_file_format())?)?;
    Ok(())
}
