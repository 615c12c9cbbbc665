//! Shared helpers for the integration tests: seeded random states and a
//! brute-force convex-roof estimate of the mixed three-tangle.
#![allow(dead_code)]

use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::LBFGS;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use smono::qstate::{rank2_decompose, DensityMatrix, PureState, C64};
use smono::tangles::hyperdeterminant;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_state(n: usize, rng: &mut impl Rng) -> PureState {
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    PureState::new(n, amps).unwrap()
}

/// Random rank-2 three-qubit state, as a marginal of a random four-qubit state.
pub fn random_rank2(rng: &mut impl Rng) -> DensityMatrix {
    let psi = random_state(4, rng);
    let drop = rng.random_range(0..4usize);
    let keep: Vec<usize> = (0..4).filter(|&q| q != drop).collect();
    psi.partial_trace(&keep).unwrap()
}

/// Random 2x2 unitary.
pub fn random_unitary(rng: &mut impl Rng) -> nalgebra::Matrix2<C64> {
    let m = nalgebra::Matrix2::from_fn(|_, _| gaussian(rng));
    m.qr().q()
}

pub fn random_sl2(rng: &mut impl Rng) -> nalgebra::Matrix2<C64> {
    loop {
        let m = nalgebra::Matrix2::from_fn(|_, _| gaussian(rng));
        let d = m.determinant();
        if d.norm() > 1e-3 {
            return m / d.sqrt();
        }
    }
}

/// Three-tangle of `|psi><psi|` with the qubits permuted so that new qubit
/// `k` is old qubit `perm[k]`.
pub fn permute3(amps: &[C64], perm: [usize; 3]) -> Vec<C64> {
    let mut out = vec![C64::default(); 8];
    for (idx, slot) in out.iter_mut().enumerate() {
        let bits = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
        let mut old = [0usize; 3];
        for k in 0..3 {
            old[perm[k]] = bits[k];
        }
        *slot = amps[4 * old[0] + 2 * old[1] + old[2]];
    }
    out
}

/// Decompositions of a rank-2 state with `k` elements, parameterized by a
/// `k x 2` complex matrix whose columns are orthonormalized. `smoothing`
/// replaces `sqrt|D|` by `(|D|^2 + s^4)^(1/4)` so that gradient steps do not
/// stall at the cusps where an element becomes W-class.
#[derive(Clone)]
struct RoofCost {
    weighted: [DVector<C64>; 2],
    k: usize,
    smoothing: f64,
}

impl RoofCost {
    fn isometry(k: usize, x: &[f64]) -> DMatrix<C64> {
        let mut a = DMatrix::from_fn(k, 2, |r, col| C64::new(x[4 * r + 2 * col], x[4 * r + 2 * col + 1]));
        // Gram-Schmidt on the two columns.
        let n0 = a.column(0).norm();
        let v0 = a.column(0) / C64::new(n0.max(1e-300), 0.0);
        a.set_column(0, &v0);
        let proj = v0.dotc(&a.column(1));
        let v1 = a.column(1) - &v0 * proj;
        let n1 = v1.norm();
        a.set_column(1, &(v1 / C64::new(n1.max(1e-300), 0.0)));
        a
    }

    fn eval(&self, x: &[f64], smoothing: f64) -> f64 {
        let u = Self::isometry(self.k, x);
        let s4 = smoothing.powi(4);
        (0..self.k)
            .map(|r| {
                let v = &self.weighted[0] * u[(r, 0)] + &self.weighted[1] * u[(r, 1)];
                let amps: [C64; 8] = std::array::from_fn(|i| v[i]);
                2.0 * (hyperdeterminant(&amps).norm_sqr() + s4).powf(0.25)
            })
            .sum()
    }

    /// `sum_r p_r sqrt(tau3(psi_r))` for the decomposition given by `x`.
    fn average_root(&self, x: &[f64]) -> f64 {
        self.eval(x, 0.0)
    }
}

impl CostFunction for RoofCost {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok(self.eval(x, self.smoothing))
    }
}

impl Gradient for RoofCost {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Self::Param) -> Result<Vec<f64>, argmin::core::Error> {
        let h = 1e-7;
        let mut p = x.clone();
        Ok((0..x.len())
            .map(|i| {
                p[i] = x[i] + h;
                let up = self.eval(&p, self.smoothing);
                p[i] = x[i] - h;
                let down = self.eval(&p, self.smoothing);
                p[i] = x[i];
                (up - down) / (2.0 * h)
            })
            .collect())
    }
}

fn simplex_around(x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![x.to_vec()];
    for i in 0..x.len() {
        let mut p = x.to_vec();
        p[i] += step;
        pts.push(p);
    }
    pts
}

fn nelder_mead(cost: &RoofCost, x0: Vec<f64>, step: f64, iters: u64) -> Vec<f64> {
    let solver = NelderMead::new(simplex_around(&x0, step)).with_sd_tolerance(1e-15).unwrap();
    let res = Executor::new(RoofCost { smoothing: 0.0, ..cost.clone() }, solver)
        .configure(|s| s.max_iters(iters))
        .run()
        .unwrap();
    res.state().best_param.clone().unwrap_or(x0)
}

fn lbfgs(cost: &RoofCost, x0: Vec<f64>, smoothing: f64) -> Vec<f64> {
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 8).with_tolerance_cost(1e-14).unwrap();
    match Executor::new(RoofCost { smoothing, ..cost.clone() }, solver)
        .configure(|s| s.param(x0.clone()).max_iters(300))
        .run()
    {
        Ok(res) => res.state().best_param.clone().unwrap_or(x0),
        Err(_) => x0,
    }
}

/// One local search: smoothing continuation with L-BFGS, then a simplex
/// polish on the exact objective. Returns the best average root tangle seen.
fn local_search(cost: &RoofCost, x0: Vec<f64>) -> f64 {
    let mut x = x0;
    let mut best = cost.average_root(&x);
    for s in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4] {
        x = lbfgs(cost, x, s);
        best = best.min(cost.average_root(&x));
    }
    for step in [1e-2, 1e-3] {
        x = nelder_mead(cost, x, step, 1500);
        best = best.min(cost.average_root(&x));
    }
    best
}

/// Upper estimate of the convex-roof three-tangle of a rank-2 three-qubit
/// state: the squared minimum over four-element decompositions of the
/// average square-root tangle, with `restarts` random starts.
pub fn convex_roof_estimate(rho: &DensityMatrix, restarts: usize, seed: u64) -> f64 {
    convex_roof_estimate_with(rho, 4, restarts, seed)
}

/// As [`convex_roof_estimate`] with `k`-element decompositions.
pub fn convex_roof_estimate_with(rho: &DensityMatrix, k: usize, restarts: usize, seed: u64) -> f64 {
    let dec = rank2_decompose(rho).unwrap();
    let weighted = [
        dec.e1.map(|z| z * dec.lambda.sqrt()),
        dec.e2.map(|z| z * (1.0 - dec.lambda).max(0.0).sqrt()),
    ];
    let cost = RoofCost { weighted, k, smoothing: 0.0 };
    let mut r = rng(seed);
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let x0: Vec<f64> = (0..4 * k).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        best = best.min(local_search(&cost, x0));
    }
    best * best
}
