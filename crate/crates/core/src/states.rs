//! Named states, the nine four-qubit SLOCC normal forms and a seeded sampler
//! of random SLOCC images of them.

use std::fmt;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monogamy::GhzwParams;
use crate::qstate::{apply_local_operators, c, PureState, C64, MAX_QUBITS};

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::QubitCount(n, "2..=8"));
    }
    Ok(())
}

pub fn ghz(n: usize) -> Result<PureState> {
    check_n(n)?;
    let mut amps = vec![C64::default(); 1 << n];
    amps[0] = c(1.0, 0.0);
    amps[(1 << n) - 1] = c(1.0, 0.0);
    PureState::new(n, amps)
}

pub fn w(n: usize) -> Result<PureState> {
    check_n(n)?;
    let mut amps = vec![C64::default(); 1 << n];
    for q in 0..n {
        amps[1 << q] = c(1.0, 0.0);
    }
    PureState::new(n, amps)
}

/// `alpha |0^n> + beta |W_n> + gamma |1^n>`.
pub fn ghzw(p: &GhzwParams) -> Result<PureState> {
    check_n(p.n)?;
    let n = p.n;
    let mut amps = vec![C64::default(); 1 << n];
    amps[0] += p.alpha;
    amps[(1 << n) - 1] += p.gamma;
    let wamp = p.beta / (n as f64).sqrt();
    for q in 0..n {
        amps[1 << q] += wamp;
    }
    PureState::new(n, amps)
}

/// One of the nine normal-form families, numbered 1 through 9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SloccClass(u8);

impl SloccClass {
    pub const ALL: [SloccClass; 9] =
        [Self(1), Self(2), Self(3), Self(4), Self(5), Self(6), Self(7), Self(8), Self(9)];

    pub fn new(index: u8) -> Result<Self> {
        if !(1..=9).contains(&index) {
            return Err(Error::Parameters(format!("SLOCC class must be in 1..=9, got {index}")));
        }
        Ok(Self(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Number of complex parameters the family takes.
    pub fn arity(self) -> usize {
        match self.0 {
            1 => 4,
            2 => 3,
            3 | 4 => 2,
            5 | 6 => 1,
            _ => 0,
        }
    }
}

impl TryFrom<u8> for SloccClass {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SloccClass> for u8 {
    fn from(c: SloccClass) -> u8 {
        c.0
    }
}

impl fmt::Display for SloccClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Complex parameters `a, b, c, d`; slots beyond the class arity are ignored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalFormParams {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl NormalFormParams {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let p = Self { a, b, c, d };
        p.validate()?;
        Ok(p)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(C64::from(a), C64::from(b), C64::from(c), C64::from(d))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if v.re < 0.0 || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Parameters(format!("{name} = {v} must have nonnegative real part")));
            }
        }
        Ok(())
    }

    fn as_array(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Unnormalized amplitude pattern of normal form `cls`.
pub fn normal_form_amplitudes(cls: SloccClass, p: &NormalFormParams) -> Vec<C64> {
    let mut amps = vec![C64::default(); 16];
    let mut put = |bits: &[usize], v: C64| bits.iter().for_each(|&b| amps[b] += v);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let half = 0.5;
    let (a, b, cc, d) = (p.a, p.b, p.c, p.d);
    match cls.0 {
        1 => {
            put(&[0b0000, 0b1111], (a + d) * half);
            put(&[0b0011, 0b1100], (a - d) * half);
            put(&[0b0101, 0b1010], (b + cc) * half);
            put(&[0b0110, 0b1001], (b - cc) * half);
        }
        2 => {
            put(&[0b0000, 0b1111], (a + b) * half);
            put(&[0b0011, 0b1100], (a - b) * half);
            put(&[0b0101, 0b1010], cc);
            put(&[0b0110], one);
        }
        3 => {
            put(&[0b0000, 0b1111], a);
            put(&[0b0101, 0b1010], b);
            put(&[0b0110, 0b0011], one);
        }
        4 => {
            put(&[0b0000, 0b1111], a);
            put(&[0b0101, 0b1010], (a + b) * half);
            put(&[0b0110, 0b1001], (a - b) * half);
            put(&[0b0001, 0b0010, 0b0111, 0b1011], i / 2f64.sqrt());
        }
        5 => {
            put(&[0b0000, 0b0101, 0b1010, 0b1111], a);
            put(&[0b0001], i);
            put(&[0b0110], one);
            put(&[0b1011], -i);
        }
        6 => {
            put(&[0b0000, 0b1111], a);
            put(&[0b0011, 0b0101, 0b0110], one);
        }
        7 => put(&[0b0000, 0b0101, 0b1000, 0b1110], one),
        8 => put(&[0b0000, 0b1011, 0b1101, 0b1110], one),
        9 => put(&[0b0000, 0b0111], one),
        _ => unreachable!("class index validated at construction"),
    }
    amps
}

/// Normalized normal form; `original_norm` keeps the normalization constant.
pub fn normal_form(cls: SloccClass, p: &NormalFormParams) -> Result<PureState> {
    p.validate()?;
    PureState::new(4, normal_form_amplitudes(cls, p))
}

/// Deterministically mixes `(master, class, index)` into a per-sample seed.
pub fn sub_seed(master: u64, cls: SloccClass, index: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ u64::from(cls.0));
    splitmix64(h ^ index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn draw_params(cls: SloccClass, rng: &mut impl Rng) -> NormalFormParams {
    let mut slots = [C64::default(); 4];
    for slot in slots.iter_mut().take(cls.arity()) {
        let re: f64 = rng.random_range(0.0..=1.0);
        let im: f64 = rng.random_range(-1.0..=1.0);
        *slot = c(re, im);
    }
    let [a, b, cc, d] = slots;
    NormalFormParams { a, b, c: cc, d }
}

/// Parameters with `Re ~ U[0, 1]` and `Im ~ U[-1, 1]`; unused slots are zero.
pub fn random_normal_form_params(cls: SloccClass, seed: u64) -> NormalFormParams {
    draw_params(cls, &mut ChaCha8Rng::seed_from_u64(seed))
}

const MIN_DET: f64 = 1e-6;
const MAX_DRAWS: usize = 100;

/// 2x2 matrix with standard complex normal entries, rescaled to unit
/// determinant.
fn draw_sl2(rng: &mut impl Rng) -> Result<Matrix2<C64>> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..MAX_DRAWS {
        let mut entry = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re * scale, im * scale)
        };
        let m = Matrix2::new(entry(), entry(), entry(), entry());
        let det = m.determinant();
        if det.norm() >= MIN_DET {
            return Ok(m / det.sqrt());
        }
    }
    Err(Error::Numerical(format!("{MAX_DRAWS} consecutive near-singular operator draws")))
}

/// How a sampled state was produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub class: SloccClass,
    pub seed: u64,
    pub params: NormalFormParams,
    /// Row-major entries of the operator applied to each qubit.
    pub operators: [[C64; 4]; 4],
}

#[derive(Clone, Debug)]
pub struct SloccSample {
    pub state: PureState,
    pub provenance: Provenance,
}

/// `(A1 (x) A2 (x) A3 (x) A4) |G^x(params)>`, normalized.
pub fn slocc_state_from_parts(
    cls: SloccClass,
    params: &NormalFormParams,
    ops: &[Matrix2<C64>; 4],
    seed: u64,
) -> Result<SloccSample> {
    let base = normal_form(cls, params)?;
    let state = apply_local_operators(&base, ops)?;
    let operators = ops.map(|m| [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]);
    Ok(SloccSample { state, provenance: Provenance { class: cls, seed, params: *params, operators } })
}

pub fn random_slocc_state(cls: SloccClass, seed: u64) -> Result<SloccSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = draw_params(cls, &mut rng);
    let ops = [draw_sl2(&mut rng)?, draw_sl2(&mut rng)?, draw_sl2(&mut rng)?, draw_sl2(&mut rng)?];
    slocc_state_from_parts(cls, &params, &ops, seed)
}

impl NormalFormParams {
    /// Parameters used by the class, in order `a, b, c, d`.
    pub fn used(&self, cls: SloccClass) -> Vec<C64> {
        self.as_array()[..cls.arity()].to_vec()
    }
}
