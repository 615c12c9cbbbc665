//! One-, two- and three-tangles, plus the RDL upper bound on the three-tangle
//! of rank-2 three-qubit states.
//!
//! The RDL construction works entirely inside the two-dimensional support of
//! the state. Operators on that support are handled through their 2x2
//! matrices in the eigenbasis `(e1, e2)` and, where geometry is needed,
//! through their Bloch vectors.

use std::ops::{Add, Mul, Sub};

use log::warn;
use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{
    c, rank2_decompose, sorted_eigen, trace_norm, DensityMatrix, PureState, Rank2Decomposition, C64,
};

/// Coefficients at or below this fraction of the largest one are zero.
pub const COEFF_REL_TOL: f64 = 1e-12;
/// A span polynomial whose largest coefficient is below this is identically zero.
pub const ZERO_POLY_TOL: f64 = 1e-12;
/// Trace-norm distance below which `rho` is taken to coincide with `pi`.
pub const PI_COINCIDENCE_TOL: f64 = 1e-9;
/// Barycentric weights at or above this count as nonnegative.
pub const WEIGHT_TOL: f64 = 1e-9;
/// Largest tolerated distance of `rho` from the simplex support span.
pub const SUPPORT_TOL: f64 = 1e-8;

const AFFINE_RESIDUAL_TOL: f64 = 1e-8;
const CLUSTER_RADIUS: f64 = 1e-4;

/// Single-qubit linear entropy `4 det(rho_focus)`.
pub fn one_tangle(psi: &PureState, focus: usize) -> Result<f64> {
    qubit_in_range(focus, psi.n_qubits())?;
    Ok(one_tangle_of_marginal(&psi.partial_trace(&[focus])?))
}

pub fn one_tangle_of_marginal(rho: &DensityMatrix) -> f64 {
    let m = rho.entries();
    let det = m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr();
    (4.0 * det).clamp(0.0, 1.0)
}

/// Squared Wootters concurrence of a two-qubit state.
pub fn two_tangle(rho_pair: &DensityMatrix) -> Result<f64> {
    if rho_pair.n_qubits() != 2 {
        return Err(Error::QubitCount(rho_pair.n_qubits(), "2"));
    }
    Ok(concurrence(rho_pair)?.powi(2).clamp(0.0, 1.0))
}

pub fn concurrence(rho_pair: &DensityMatrix) -> Result<f64> {
    let rho = rho_pair.entries();
    let (values, vectors) = sorted_eigen(rho);
    if let Some(&min) = values.last() {
        if min < -1e-10 {
            return Err(Error::NotPsd(min));
        }
    }
    // rho = M M^dagger with M = V sqrt(Lambda).
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for (j, (l, v)) in values.iter().zip(&vectors).enumerate() {
        m.set_column(j, &(v * c(l.max(0.0).sqrt(), 0.0)));
    }
    concurrence_of_factor(&m)
}

/// Concurrence of the two-qubit state `M M^dagger`, from the singular values
/// of `M^T (sigma_y x sigma_y) M`. These are the square roots of the spectrum
/// of R, but are obtained without taking roots of near-zero eigenvalues.
pub fn concurrence_of_factor(m: &DMatrix<C64>) -> Result<f64> {
    if m.nrows() != 4 {
        return Err(Error::QubitCount(m.nrows().trailing_zeros() as usize, "2"));
    }
    let t = m.transpose() * spin_flip() * m;
    let mut s: Vec<f64> = t.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1..].iter().sum::<f64>()).max(0.0))
}

/// Two-tangle of the pair marginal of a pure state.
pub fn two_tangle_of_pure(psi: &PureState, pair: [usize; 2]) -> Result<f64> {
    let m = psi.marginal_factor(&pair)?;
    Ok(concurrence_of_factor(&m)?.powi(2).clamp(0.0, 1.0))
}

/// sigma_y (x) sigma_y in the computational basis.
fn spin_flip() -> DMatrix<C64> {
    let mut f = DMatrix::<C64>::zeros(4, 4);
    f[(0, 3)] = c(-1.0, 0.0);
    f[(1, 2)] = c(1.0, 0.0);
    f[(2, 1)] = c(1.0, 0.0);
    f[(3, 0)] = c(-1.0, 0.0);
    f
}

/// Ring operations needed to evaluate the hyperdeterminant form.
pub trait Amplitude: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}

impl<T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T>> Amplitude for T {}

/// Cayley hyperdeterminant of the 2x2x2 amplitude array `c[rst]`, indexed
/// as `4r + 2s + t`. The pure three-tangle is four times its modulus.
pub fn hyperdeterminant<T: Amplitude>(amps: &[T; 8]) -> T {
    let [c000, c001, c010, c011, c100, c101, c110, c111] = *amps;
    let squares = c000 * c000 * c111 * c111
        + c001 * c001 * c110 * c110
        + c010 * c010 * c101 * c101
        + c100 * c100 * c011 * c011;
    let pairs = c000 * c111 * c001 * c110
        + c000 * c111 * c010 * c101
        + c000 * c111 * c100 * c011
        + c001 * c110 * c010 * c101
        + c001 * c110 * c011 * c100
        + c100 * c011 * c010 * c101;
    let quads = c000 * c011 * c101 * c110 + c111 * c100 * c010 * c001;
    squares - (pairs + pairs) + (quads + quads + quads + quads)
}

/// `4 |Det|` on raw, possibly unnormalized amplitudes. No clamping.
pub fn three_tangle_amplitudes(amps: &[C64]) -> Result<f64> {
    let arr: &[C64; 8] = amps
        .try_into()
        .map_err(|_| Error::QubitCount(amps.len().trailing_zeros() as usize, "3"))?;
    Ok(4.0 * hyperdeterminant(arr).norm())
}

pub fn three_tangle_pure(psi3: &PureState) -> Result<f64> {
    if psi3.n_qubits() != 3 {
        return Err(Error::QubitCount(psi3.n_qubits(), "3"));
    }
    Ok(three_tangle_amplitudes(psi3.amplitudes())?.clamp(0.0, 1.0))
}

/// Polynomial of degree at most four, `coeffs[k]` multiplying `z^k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Quartic {
    pub coeffs: [C64; 5],
}

impl Quartic {
    fn linear(constant: C64, slope: C64) -> Self {
        let mut coeffs = [C64::default(); 5];
        coeffs[0] = constant;
        coeffs[1] = slope;
        Self { coeffs }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::default(), |acc, &k| acc * z + k)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|k| k.norm()).fold(0.0, f64::max)
    }

    /// Three-tangle of the normalized span element `(e1 + z e2)/sqrt(1+|z|^2)`.
    pub fn normalized_tangle(&self, root: Root) -> f64 {
        match root {
            Root::Finite(z) => 4.0 * self.eval(z).norm() / (1.0 + z.norm_sqr()).powi(2),
            Root::Infinity => 4.0 * self.coeffs[4].norm(),
        }
    }
}

impl Add for Quartic {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.coeffs.iter_mut().zip(rhs.coeffs).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Quartic {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.coeffs.iter_mut().zip(rhs.coeffs).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul for Quartic {
    type Output = Self;
    // Products of the degree-1 amplitudes never exceed degree 4.
    fn mul(self, rhs: Self) -> Self {
        let mut out = [C64::default(); 5];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate().take(5 - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }
}

/// `Det(e1 + z e2)` as an explicit polynomial in `z`.
pub fn span_polynomial(e1: &DVector<C64>, e2: &DVector<C64>) -> Quartic {
    let amps: [Quartic; 8] = std::array::from_fn(|k| Quartic::linear(e1[k], e2[k]));
    hyperdeterminant(&amps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Root {
    Finite(C64),
    /// Degree deficiency; the span element is `e2` itself.
    Infinity,
}

impl Root {
    /// Coordinates of the normalized span element in the `(e1, e2)` basis.
    pub fn support_vector(self) -> [C64; 2] {
        match self {
            Root::Finite(z) => {
                let n = (1.0 + z.norm_sqr()).sqrt();
                [c(1.0 / n, 0.0), z / n]
            }
            Root::Infinity => [C64::default(), c(1.0, 0.0)],
        }
    }
}

/// Roots of `poly` (with multiplicity), padded with roots at infinity to
/// four. Returns `None` when the polynomial vanishes identically.
pub fn quartic_roots(poly: &Quartic) -> Result<Option<[Root; 4]>> {
    let scale = poly.max_coeff();
    if scale < ZERO_POLY_TOL {
        return Ok(None);
    }
    let threshold = COEFF_REL_TOL * scale;
    let significant: Vec<usize> = (0..5).filter(|&k| poly.coeffs[k].norm() > threshold).collect();
    let low = significant[0];
    let degree = *significant.last().unwrap();
    let reduced: Vec<C64> = poly.coeffs[low..=degree].to_vec();

    let mut finite: Vec<C64> = vec![C64::default(); low];
    finite.extend(reduced_roots(&reduced, poly)?);
    let mut roots = [Root::Infinity; 4];
    for (slot, z) in roots.iter_mut().zip(finite) {
        *slot = Root::Finite(z);
    }
    Ok(Some(roots))
}

/// Roots of `sum coeffs[k] z^k` with nonzero constant and leading terms.
fn reduced_roots(coeffs: &[C64], full: &Quartic) -> Result<Vec<C64>> {
    let degree = coeffs.len() - 1;
    match degree {
        0 => Ok(Vec::new()),
        1 => Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => {
            let lead = coeffs[degree];
            let mut companion = DMatrix::<C64>::zeros(degree, degree);
            for i in 1..degree {
                companion[(i, i - 1)] = c(1.0, 0.0);
            }
            for (i, k) in coeffs[..degree].iter().enumerate() {
                companion[(i, degree - 1)] = -k / lead;
            }
            let eig = nalgebra::Schur::new(companion)
                .eigenvalues()
                .ok_or_else(|| Error::Numerical("companion eigenvalues did not converge".into()))?;
            Ok(merge_clusters(eig.iter().copied().collect(), coeffs, full))
        }
    }
}

fn eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::default();
    let mut dp = C64::default();
    for &k in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + k;
    }
    (p, dp)
}

fn derivative(coeffs: &[C64], order: usize) -> Vec<C64> {
    let mut d = coeffs.to_vec();
    for _ in 0..order {
        d = d.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
    }
    d
}

fn newton_polish(coeffs: &[C64], mut z: C64) -> C64 {
    let mut best = eval_with_derivative(coeffs, z).0.norm();
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let value = eval_with_derivative(coeffs, next).0.norm();
        if !(value < best) {
            break;
        }
        best = value;
        z = next;
    }
    z
}

/// Replaces each cluster of a split multiple root by its centroid, which is
/// far better conditioned than the individual eigenvalues. A merge is kept
/// only if the centroid is at least as good a root as its members; simple
/// roots are refined by Newton steps.
fn merge_clusters(roots: Vec<C64>, coeffs: &[C64], full: &Quartic) -> Vec<C64> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::with_capacity(roots.len());
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let radius = CLUSTER_RADIUS * (1.0 + roots[i].norm());
        let members: Vec<usize> =
            (i..roots.len()).filter(|&j| !used[j] && (roots[j] - roots[i]).norm() < radius).collect();
        let centroid = members.iter().map(|&j| roots[j]).sum::<C64>() / members.len() as f64;
        let worst = members
            .iter()
            .map(|&j| full.normalized_tangle(Root::Finite(roots[j])))
            .fold(0.0, f64::max);
        if members.len() > 1 && full.normalized_tangle(Root::Finite(centroid)) <= worst {
            members.iter().for_each(|&j| used[j] = true);
            // A root of multiplicity m is a simple root of the (m-1)th derivative.
            let polished = newton_polish(&derivative(coeffs, members.len() - 1), centroid);
            let better = full.normalized_tangle(Root::Finite(polished)) <= full.normalized_tangle(Root::Finite(centroid));
            let merged = if better {
                polished
            } else {
                centroid
            };
            out.extend(std::iter::repeat(merged).take(members.len()));
        } else {
            used[i] = true;
            out.push(newton_polish(coeffs, roots[i]));
        }
    }
    out
}

/// Four W-class states of a rank-2 support and their uniform mixture.
#[derive(Clone, Debug)]
pub struct WSimplex {
    pub roots: [Root; 4],
    pub z_states: [PureState; 4],
    /// Coordinates of each `Z_l` in the `(e1, e2)` basis.
    pub z_support: [[C64; 2]; 4],
    pub pi: DensityMatrix,
    /// `pi` as a 2x2 matrix on the support.
    pub pi_support: Matrix2<C64>,
    /// `dim x 2` isometry whose columns are `e1`, `e2`.
    pub basis: DMatrix<C64>,
    pub polynomial: Quartic,
    /// Every state of the span has vanishing three-tangle. The recorded
    /// roots are then the fixed choice `{0, inf, 1, i}`.
    pub all_zero_tangle: bool,
}

pub fn wclass_roots(dec: &Rank2Decomposition) -> Result<WSimplex> {
    if dec.pure {
        return Err(Error::PureInput);
    }
    if dec.n_qubits() != 3 {
        return Err(Error::QubitCount(dec.n_qubits(), "3"));
    }
    let polynomial = span_polynomial(&dec.e1, &dec.e2);
    let (roots, all_zero_tangle) = match quartic_roots(&polynomial)? {
        Some(roots) => (roots, false),
        None => (
            [Root::Finite(c(0.0, 0.0)), Root::Infinity, Root::Finite(c(1.0, 0.0)), Root::Finite(c(0.0, 1.0))],
            true,
        ),
    };
    let basis = dec.basis();
    let z_support = roots.map(Root::support_vector);
    let mut z_states = Vec::with_capacity(4);
    let mut pi_support = Matrix2::<C64>::zeros();
    for [a, b] in z_support {
        let amps = (&dec.e1 * a + &dec.e2 * b).as_slice().to_vec();
        z_states.push(PureState::new(3, amps)?);
        let v = nalgebra::Vector2::new(a, b);
        pi_support += v * v.adjoint() * c(0.25, 0.0);
    }
    let pi = DensityMatrix::from_raw(3, embed(&basis, &pi_support));
    Ok(WSimplex {
        roots,
        z_states: z_states.try_into().expect("four states"),
        z_support,
        pi,
        pi_support,
        basis,
        polynomial,
        all_zero_tangle,
    })
}

fn embed(basis: &DMatrix<C64>, m: &Matrix2<C64>) -> DMatrix<C64> {
    let m = DMatrix::from_column_slice(2, 2, m.as_slice());
    basis * m * basis.adjoint()
}

/// Projects `rho` onto the span of `basis`, failing if it has weight outside.
fn support_matrix(rho: &DensityMatrix, basis: &DMatrix<C64>) -> Result<Matrix2<C64>> {
    let eff = basis.adjoint() * rho.entries() * basis;
    let m = Matrix2::new(eff[(0, 0)], eff[(0, 1)], eff[(1, 0)], eff[(1, 1)]);
    let residual = (rho.entries() - embed(basis, &m)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > SUPPORT_TOL {
        return Err(Error::OutsideSupport(residual));
    }
    Ok(m)
}

/// Bloch vector of a 2x2 Hermitian matrix after normalizing its trace.
fn bloch(m: &Matrix2<C64>) -> Vector3<f64> {
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    let off = m[(0, 1)] / tr;
    Vector3::new(2.0 * off.re, -2.0 * off.im, (m[(0, 0)].re - m[(1, 1)].re) / tr)
}

fn bloch_of_vector([a, b]: [C64; 2]) -> Vector3<f64> {
    let off = a * b.conj();
    Vector3::new(2.0 * off.re, -2.0 * off.im, a.norm_sqr() - b.norm_sqr())
}

/// Unit vector in the support whose projector has Bloch vector `v`.
fn vector_of_bloch(v: &Vector3<f64>) -> [C64; 2] {
    let v = v.normalize();
    if v.z >= 0.0 {
        let n = (2.0 * (1.0 + v.z)).sqrt();
        [c((1.0 + v.z) / n, 0.0), c(v.x, v.y) / n]
    } else {
        let n = (2.0 * (1.0 - v.z)).sqrt();
        [c(v.x, -v.y) / n, c((1.0 - v.z) / n, 0.0)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexMembership {
    pub member: bool,
    pub weights: [f64; 4],
}

/// Decides whether `rho` is a convex mixture of the simplex's `Z_l`.
pub fn simplex_member(rho: &DensityMatrix, ws: &WSimplex) -> Result<SimplexMembership> {
    let target = bloch(&support_matrix(rho, &ws.basis)?);
    let points = ws.z_support.map(bloch_of_vector);
    Ok(convex_weights(&points, &target))
}

fn convex_weights(points: &[Vector3<f64>; 4], target: &Vector3<f64>) -> SimplexMembership {
    let full = [0, 1, 2, 3];
    let expand = |subset: &[usize], w: &[f64]| {
        let mut weights = [0.0; 4];
        subset.iter().zip(w).for_each(|(&i, &x)| weights[i] = x);
        weights
    };
    let feasible = |w: &[f64]| w.iter().all(|&x| x >= -WEIGHT_TOL);

    if let Some(w) = affine_weights(points, &full, target) {
        // A nondegenerate tetrahedron has unique barycentric coordinates.
        return SimplexMembership { member: feasible(&w), weights: expand(&full, &w) };
    }
    for size in (1..=3).rev() {
        for subset in subsets(4, size) {
            if let Some(w) = affine_weights(points, &subset, target) {
                if feasible(&w) {
                    return SimplexMembership { member: true, weights: expand(&subset, &w) };
                }
            }
        }
    }
    SimplexMembership { member: false, weights: min_norm_weights(points, target) }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

/// Affine coordinates of `target` relative to affinely independent
/// `points[subset]`, if it lies in their affine hull.
fn affine_weights(points: &[Vector3<f64>; 4], subset: &[usize], target: &Vector3<f64>) -> Option<Vec<f64>> {
    let origin = points[subset[0]];
    let rhs = target - origin;
    if subset.len() == 1 {
        return (rhs.norm() < AFFINE_RESIDUAL_TOL).then(|| vec![1.0]);
    }
    let k = subset.len() - 1;
    let mut d = DMatrix::<f64>::zeros(3, k);
    for (col, &i) in subset[1..].iter().enumerate() {
        d.set_column(col, &(points[i] - origin));
    }
    let svd = d.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-9 * smax.max(1.0) {
        return None;
    }
    let rhs = DVector::from_column_slice(rhs.as_slice());
    let x = svd.solve(&rhs, 0.0).ok()?;
    if (&d * &x - &rhs).norm() > AFFINE_RESIDUAL_TOL {
        return None;
    }
    let mut w = vec![1.0 - x.sum()];
    w.extend(x.iter());
    Some(w)
}

fn min_norm_weights(points: &[Vector3<f64>; 4], target: &Vector3<f64>) -> [f64; 4] {
    let mut a = DMatrix::<f64>::zeros(4, 4);
    for (j, p) in points.iter().enumerate() {
        a[(0, j)] = p.x;
        a[(1, j)] = p.y;
        a[(2, j)] = p.z;
        a[(3, j)] = 1.0;
    }
    let b = DVector::from_column_slice(&[target.x, target.y, target.z, 1.0]);
    let x = a.svd(true, true).solve(&b, 1e-12).unwrap_or_else(|_| DVector::from_element(4, 0.25));
    [x[0], x[1], x[2], x[3]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    ExactPure,
    SimplexZero,
    PiCoincidence,
    RdlLine,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::ExactPure => "exact-pure",
            BoundMethod::SimplexZero => "simplex-zero",
            BoundMethod::PiCoincidence => "pi-coincidence",
            BoundMethod::RdlLine => "rdl-line",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RdlDiagnostics {
    /// Distance `kappa` travelled from `rho` along `(rho - pi)/||rho - pi||_1`.
    pub kappa: f64,
    /// Ray parameter: `|phi><phi| = (1 + t) rho - t pi`.
    pub t: f64,
    /// `||rho - pi||_1 / || |phi><phi| - pi ||_1`.
    pub trace_norm_ratio: f64,
    pub phi_tangle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TangleBoundResult {
    pub value: f64,
    pub method: BoundMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<RdlDiagnostics>,
}

impl TangleBoundResult {
    fn zero(method: BoundMethod) -> Self {
        Self { value: 0.0, method, diagnostics: None }
    }
}

/// Upper bound on the mixed-state three-tangle of a state of rank <= 2.
pub fn three_tangle_upper(rho3: &DensityMatrix) -> Result<TangleBoundResult> {
    if rho3.n_qubits() != 3 {
        return Err(Error::QubitCount(rho3.n_qubits(), "3"));
    }
    let dec = rank2_decompose(rho3)?;
    if dec.pure {
        let value = three_tangle_amplitudes(dec.e1.as_slice())?.clamp(0.0, 1.0);
        return Ok(TangleBoundResult { value, method: BoundMethod::ExactPure, diagnostics: None });
    }
    let ws = wclass_roots(&dec)?;
    if ws.all_zero_tangle {
        return Ok(TangleBoundResult::zero(BoundMethod::SimplexZero));
    }
    let rho_s = support_matrix(rho3, &ws.basis)?;
    let rho_s = rho_s / (rho_s[(0, 0)] + rho_s[(1, 1)]);
    let to_dmatrix = |m: &Matrix2<C64>| DMatrix::from_column_slice(2, 2, m.as_slice());

    let dist = trace_norm(&to_dmatrix(&(rho_s - ws.pi_support)))?;
    if dist < PI_COINCIDENCE_TOL {
        return Ok(TangleBoundResult::zero(BoundMethod::PiCoincidence));
    }
    let points = ws.z_support.map(bloch_of_vector);
    let r = bloch(&rho_s);
    if convex_weights(&points, &r).member {
        return Ok(TangleBoundResult::zero(BoundMethod::SimplexZero));
    }

    // det((1 + t) rho - t pi) = (1 - |r + t d|^2) / 4 on the support.
    let p = bloch(&ws.pi_support);
    let d = r - p;
    let qa = d.norm_squared();
    let qb = 2.0 * r.dot(&d);
    let qc = r.norm_squared() - 1.0;
    let t = smallest_positive_root(qa, qb, qc)
        .ok_or_else(|| Error::Numerical(format!("no pure state on ray (a={qa}, b={qb}, c={qc})")))?;

    let [a, b] = vector_of_bloch(&(r + d * t));
    let phi = &dec.e1 * a + &dec.e2 * b;
    let phi_tangle = three_tangle_amplitudes(phi.as_slice())?;
    let v = nalgebra::Vector2::new(a, b);
    let phi_s = v * v.adjoint();
    let phi_dist = trace_norm(&to_dmatrix(&(phi_s - ws.pi_support)))?;
    let ratio = dist / phi_dist;
    let raw = ratio * ratio * phi_tangle;
    if raw > 1.0 + 1e-9 {
        warn!("three-tangle bound {raw} exceeds 1 before clipping");
    }
    Ok(TangleBoundResult {
        value: raw.clamp(0.0, 1.0),
        method: BoundMethod::RdlLine,
        diagnostics: Some(RdlDiagnostics { kappa: t * dist, t, trace_norm_ratio: ratio, phi_tangle }),
    })
}

/// Smallest positive root of `a t^2 + b t + c`, in cancellation-free form.
fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let disc = b * b - 4.0 * a * c;
    if a <= 0.0 || disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|&t| t > 0.0 && t.is_finite())
}

fn qubit_in_range(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::QubitIndex { index: q, n });
    }
    Ok(())
}
