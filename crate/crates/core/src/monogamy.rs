//! CKW and strong-monogamy residuals built from the tangles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{PureState, C64};
use crate::states;
use crate::tangles::{one_tangle, three_tangle_pure, three_tangle_upper, two_tangle_of_pure, TangleBoundResult};

/// Exponents applied to the m-partite terms. The two-partite exponent is
/// fixed at 1; only the three-partite one is configurable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentSchedule {
    mu3: f64,
}

impl Default for ExponentSchedule {
    fn default() -> Self {
        Self { mu3: 1.5 }
    }
}

impl ExponentSchedule {
    pub fn new(mu3: f64) -> Result<Self> {
        if !(mu3 > 0.0 && mu3.is_finite()) {
            return Err(Error::Parameters(format!("mu3 must be positive, got {mu3}")));
        }
        Ok(Self { mu3 })
    }

    pub fn mu(&self, m: usize) -> Option<f64> {
        match m {
            2 => Some(1.0),
            3 => Some(self.mu3),
            _ => None,
        }
    }

    pub fn mu3(&self) -> f64 {
        self.mu3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tau2Term {
    pub partner: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tau3Term {
    /// The two non-focus qubits of the marginal.
    pub pair: (usize, usize),
    pub bound: TangleBoundResult,
}

/// Four-qubit strong-monogamy breakdown for one focus qubit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmReport {
    pub focus: usize,
    pub tau1: f64,
    pub tau2_terms: [Tau2Term; 3],
    pub tau3_bounds: [Tau3Term; 3],
    /// Not clipped: negative values are violations.
    pub residual_lower: f64,
    pub exponents: ExponentSchedule,
}

impl SmReport {
    pub fn ckw_residual(&self) -> f64 {
        self.tau2_terms.iter().fold(self.tau1, |acc, t| acc - t.value)
    }
}

/// `tau1 - sum tau2 - sum tau3^mu3`, accumulated left to right.
pub fn assemble_residual(tau1: f64, tau2: &[f64], tau3: &[f64], mu3: f64) -> f64 {
    let r = tau2.iter().fold(tau1, |acc, t| acc - t);
    tau3.iter().fold(r, |acc, t| acc - t.powf(mu3))
}

fn require_qubits(psi: &PureState, n: usize, label: &'static str) -> Result<()> {
    if psi.n_qubits() != n {
        return Err(Error::QubitCount(psi.n_qubits(), label));
    }
    Ok(())
}

fn pair_tangle(psi: &PureState, i: usize, j: usize) -> Result<f64> {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    two_tangle_of_pure(psi, [a, b])
}

/// `tau1 - sum_j tau2` for a three-qubit state, clipping noise-level
/// negatives to zero.
pub fn residual_three_tangle(psi3: &PureState, focus: usize) -> Result<f64> {
    require_qubits(psi3, 3, "3")?;
    let r = ckw_residual(psi3, focus)?;
    Ok(if r < 0.0 && r >= -1e-9 { 0.0 } else { r })
}

/// CKW residual `tau1 - sum_j tau2(focus, j)` for any n >= 3.
pub fn ckw_residual(psi: &PureState, focus: usize) -> Result<f64> {
    let n = psi.n_qubits();
    if n < 3 {
        return Err(Error::QubitCount(n, ">= 3"));
    }
    let mut r = one_tangle(psi, focus)?;
    for j in (0..n).filter(|&j| j != focus) {
        r -= pair_tangle(psi, focus, j)?;
    }
    Ok(r)
}

fn others(focus: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for q in (0..4).filter(|&q| q != focus) {
        out[k] = q;
        k += 1;
    }
    out
}

fn sorted_triple(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

/// Index into the four triples `{012, 013, 023, 123}`.
fn triple_index(t: [usize; 3]) -> usize {
    // The omitted qubit identifies the triple.
    let missing = 6 - t.iter().sum::<usize>();
    3 - missing
}

fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// All marginal tangles of a four-qubit state, shared between foci.
struct FourQubitTangles {
    tau1: [f64; 4],
    tau2: [f64; 6],
    tau3: [TangleBoundResult; 4],
}

impl FourQubitTangles {
    fn compute(psi: &PureState) -> Result<Self> {
        let mut tau1 = [0.0; 4];
        for (q, t) in tau1.iter_mut().enumerate() {
            *t = one_tangle(psi, q)?;
        }
        let mut tau2 = [0.0; 6];
        for i in 0..4 {
            for j in i + 1..4 {
                tau2[pair_index(i, j)] = pair_tangle(psi, i, j)?;
            }
        }
        let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let mut tau3 = Vec::with_capacity(4);
        for t in triples {
            tau3.push(three_tangle_upper(&psi.partial_trace(&t)?)?);
        }
        Ok(Self { tau1, tau2, tau3: tau3.try_into().expect("four triples") })
    }

    fn report(&self, focus: usize, sched: ExponentSchedule) -> SmReport {
        let [a, b, c] = others(focus);
        let tau2_terms = [a, b, c].map(|j| Tau2Term { partner: j, value: self.tau2[pair_index(focus, j)] });
        let tau3_bounds = [(a, b), (a, c), (b, c)]
            .map(|(j, k)| Tau3Term { pair: (j, k), bound: self.tau3[triple_index(sorted_triple(focus, j, k))] });
        let residual_lower = assemble_residual(
            self.tau1[focus],
            &tau2_terms.each_ref().map(|t| t.value),
            &tau3_bounds.each_ref().map(|t| t.bound.value),
            sched.mu3,
        );
        SmReport { focus, tau1: self.tau1[focus], tau2_terms, tau3_bounds, residual_lower, exponents: sched }
    }
}

/// Lower bound on the residual four-tangle with respect to `focus`.
pub fn tau4_lower_bound(psi4: &PureState, focus: usize, sched: ExponentSchedule) -> Result<SmReport> {
    require_qubits(psi4, 4, "4")?;
    if focus >= 4 {
        return Err(Error::QubitIndex { index: focus, n: 4 });
    }
    let [a, b, c] = others(focus);
    let tau1 = one_tangle(psi4, focus)?;
    let tau2_terms = [
        Tau2Term { partner: a, value: pair_tangle(psi4, focus, a)? },
        Tau2Term { partner: b, value: pair_tangle(psi4, focus, b)? },
        Tau2Term { partner: c, value: pair_tangle(psi4, focus, c)? },
    ];
    let bound = |j: usize, k: usize| -> Result<Tau3Term> {
        let t = sorted_triple(focus, j, k);
        Ok(Tau3Term { pair: (j, k), bound: three_tangle_upper(&psi4.partial_trace(&t)?)? })
    };
    let tau3_bounds = [bound(a, b)?, bound(a, c)?, bound(b, c)?];
    let residual_lower = assemble_residual(
        tau1,
        &tau2_terms.each_ref().map(|t| t.value),
        &tau3_bounds.each_ref().map(|t| t.bound.value),
        sched.mu3,
    );
    Ok(SmReport { focus, tau1, tau2_terms, tau3_bounds, residual_lower, exponents: sched })
}

/// Reports for foci 0..4, computing each shared marginal only once.
pub fn sm_report_all_foci(psi4: &PureState, sched: ExponentSchedule) -> Result<[SmReport; 4]> {
    require_qubits(psi4, 4, "4")?;
    let t = FourQubitTangles::compute(psi4)?;
    Ok([0, 1, 2, 3].map(|f| t.report(f, sched)))
}

/// Amplitudes of `alpha |0^n> + beta |W_n> + gamma |1^n>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GhzwParams {
    pub n: usize,
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
}

impl GhzwParams {
    pub fn new(n: usize, alpha: C64, beta: C64, gamma: C64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameters(format!("GHZ/W family needs n >= 3, got {n}")));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Parameters(format!("|alpha|^2 + |beta|^2 + |gamma|^2 = {norm}, expected 1")));
        }
        Ok(Self { n, alpha, beta, gamma })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GhzwAnalytic {
    pub tau1: f64,
    pub tau2_bound: f64,
    pub tau_nm1_bound: f64,
    pub residual_floor: f64,
}

pub fn ghzw_analytic(p: &GhzwParams) -> GhzwAnalytic {
    let n = p.n as f64;
    let (a2, b2, g2) = (p.alpha.norm_sqr(), p.beta.norm_sqr(), p.gamma.norm_sqr());
    GhzwAnalytic {
        tau1: 4.0 / (n * n) * (n * n * a2 * g2 + (n - 1.0) * b2 * (b2 + n * g2)),
        tau2_bound: 4.0 * b2 * b2 / (n * n),
        tau_nm1_bound: 4.0 / n * b2 * g2,
        residual_floor: 4.0 * a2 * g2,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhzwCheck {
    pub params: GhzwParams,
    pub analytic: GhzwAnalytic,
    pub tau1_numeric: f64,
    pub max_tau2_numeric: f64,
    /// Smallest residual lower bound over foci (four-qubit case only).
    pub min_residual_lower: Option<f64>,
    pub failures: Vec<String>,
}

impl GhzwCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares the closed forms with numerics on the constructed state.
pub fn ghzw_consistency_check(p: &GhzwParams) -> GhzwCheck {
    let analytic = ghzw_analytic(p);
    let mut check = GhzwCheck {
        params: *p,
        analytic,
        tau1_numeric: f64::NAN,
        max_tau2_numeric: f64::NAN,
        min_residual_lower: None,
        failures: Vec::new(),
    };
    if p.n > 6 {
        check.failures.push(format!("n = {} exceeds the supported n <= 6", p.n));
        return check;
    }
    if let Err(e) = run_ghzw_check(p, &mut check) {
        check.failures.push(format!("numerical error: {e}"));
    }
    check
}

fn run_ghzw_check(p: &GhzwParams, check: &mut GhzwCheck) -> Result<()> {
    let psi = states::ghzw(p)?;
    let a = check.analytic;
    check.tau1_numeric = one_tangle(&psi, 0)?;
    if (check.tau1_numeric - a.tau1).abs() > 1e-9 {
        check.failures.push(format!("tau1 {} differs from closed form {}", check.tau1_numeric, a.tau1));
    }
    // Permutation symmetry makes every pair equivalent to (0, 1).
    check.max_tau2_numeric = pair_tangle(&psi, 0, 1)?;
    if check.max_tau2_numeric > a.tau2_bound + 1e-9 {
        check.failures.push(format!("tau2 {} exceeds bound {}", check.max_tau2_numeric, a.tau2_bound));
    }
    if p.n == 4 {
        let reports = sm_report_all_foci(&psi, ExponentSchedule::default())?;
        let min = reports.iter().map(|r| r.residual_lower).fold(f64::INFINITY, f64::min);
        check.min_residual_lower = Some(min);
        if min < a.residual_floor - 1e-6 {
            check.failures.push(format!("residual {min} below floor {}", a.residual_floor));
        }
    }
    Ok(())
}

/// Three-qubit cross-check: the CKW residual equals the closed-form tangle.
pub fn three_qubit_residual_gap(psi3: &PureState) -> Result<f64> {
    let exact = three_tangle_pure(psi3)?;
    let mut gap: f64 = 0.0;
    for f in 0..3 {
        gap = gap.max((residual_three_tangle(psi3, f)? - exact).abs());
    }
    Ok(gap)
}
