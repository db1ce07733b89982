//! Randomized and exhaustive checks of the congruences behind the
//! integrality of `T`-equivariant isometries of the Mukai lattice.
//!
//! # Randomness
//!
//! Trial `i` of a run with seed `S` draws from its own ChaCha8 stream:
//! `ChaCha8Rng::seed_from_u64(S)` followed by `set_stream(i)`. Integers in a
//! box are drawn with `Rng::random_range` on `i64`. Trials share no state, so
//! they run in parallel and the first failing trial index is the same as a
//! serial run would find.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{fixed_sublattice, is_isometry, short_vectors, FixedSublattice, Isometry, LatticeError, Sign};
use crate::linalg::{self, IntegerMatrix};
use crate::mukai::{
    h2_lattice, mukai_lattice, mukai_pairing, t_matrix, tau_star_h2, twist_t, MukaiVector, H2_RANK, MUKAI_RANK, X, Y,
    Z1, Z2, Z3,
};

pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_COORD_BOUND: u32 = 50;
pub const DEFAULT_PHI_TRIALS: u64 = 1_000;
pub const DEFAULT_WORD_LENGTH: u32 = 8;
/// Number of random `ℓ` paired against each sampled `φ(0,0,1)`.
pub const PHI_PAIRINGS_PER_TRIAL: usize = 10;
/// Entries of the exhaustive low-support pass lie in `[-EXHAUSTIVE_BOUND, EXHAUSTIVE_BOUND]`.
pub const EXHAUSTIVE_BOUND: i64 = 2;

pub const CLAIM1: &str = "claim1";
pub const CLAIM2: &str = "claim2";
pub const INVARIANT_LATTICE: &str = "invariant_lattice";
pub const PHI_INTEGRALITY: &str = "phi_integrality";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("no reflection generators available")]
    EmptyPool,
    #[error("sampled isometry does not commute with T")]
    NotEquivariant,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub seed: u64,
    pub coord_bound: u32,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { trials: DEFAULT_TRIALS, seed: DEFAULT_SEED, coord_bound: DEFAULT_COORD_BOUND }
    }
}

/// PRNG stream of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_box(rng: &mut impl Rng, len: usize, bound: u32) -> Vec<BigInt> {
    let b = i64::from(bound);
    (0..len).map(|_| BigInt::from(rng.random_range(-b..=b))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamedVector {
    pub name: String,
    #[serde(serialize_with = "serialize_bigints")]
    pub coords: Vec<BigInt>,
}

impl NamedVector {
    fn new(name: &str, coords: Vec<BigInt>) -> Self {
        NamedVector { name: name.to_string(), coords }
    }
}

fn serialize_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// A failing input, in a form that [`VerificationReport::recheck`] can re-evaluate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub description: String,
    pub vectors: Vec<NamedVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub trials: u64,
    pub seed: u64,
    pub coord_bound: u32,
    pub word_length: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub check_name: String,
    pub trials_run: u64,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
    pub config: ConfigEcho,
    /// Human-readable facts established by the run.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl VerificationReport {
    /// Re-evaluates the counterexample. `Some(true)` means the failure reproduces;
    /// `None` means there is nothing to re-check.
    pub fn recheck(&self) -> Option<bool> {
        let cx = self.counterexample.as_ref()?;
        let get = |name: &str| cx.vectors.iter().find(|v| v.name == name).map(|v| v.coords.clone());
        let reproduced = match self.check_name.as_str() {
            CLAIM1 => claim1_violation(&get("l")?).is_some(),
            CLAIM2 => {
                let v = MukaiVector::from_coords(&get("v")?).ok()?;
                let params = get("params").and_then(|p| Claim2Params::from_flat(&p));
                claim2_violation(&v, params.as_ref()).is_some()
            }
            PHI_INTEGRALITY => {
                let phi = IntegerMatrix::from_vec(MUKAI_RANK, MUKAI_RANK, get("phi")?).ok()?;
                let ls: Vec<Vec<BigInt>> =
                    cx.vectors.iter().filter(|v| v.name.starts_with("l")).map(|v| v.coords.clone()).collect();
                phi_violation(&phi, &ls).is_some()
            }
            INVARIANT_LATTICE => invariant_lattice_violation().is_some(),
            _ => return None,
        };
        Some(reproduced)
    }

    /// The entry of the `checks` array in a JSON report.
    pub fn check_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "name": self.check_name,
            "passed": self.passed,
            "trials_run": self.trials_run,
        });
        if let Some(cx) = &self.counterexample {
            obj["counterexample"] = serde_json::to_value(cx).expect("plain data");
        }
        if !self.details.is_empty() {
            obj["details"] = serde_json::to_value(&self.details).expect("plain data");
        }
        obj
    }
}

struct Outcome {
    trials_run: u64,
    counterexample: Option<Counterexample>,
}

/// Runs `check(i)` for `i in 0..trials`, stopping at the lowest failing index.
fn run_indexed<F>(trials: u64, check: F) -> Outcome
where
    F: Fn(u64) -> Option<Counterexample> + Sync,
{
    match (0..trials).into_par_iter().find_map_first(|i| check(i).map(|cx| (i, cx))) {
        Some((i, cx)) => Outcome { trials_run: i + 1, counterexample: Some(cx) },
        None => Outcome { trials_run: trials, counterexample: None },
    }
}

fn report(
    name: &str,
    config: ConfigEcho,
    outcome: Outcome,
    details: Vec<String>,
    start: Instant,
) -> VerificationReport {
    VerificationReport {
        check_name: name.to_string(),
        trials_run: outcome.trials_run,
        passed: outcome.counterexample.is_none(),
        counterexample: outcome.counterexample,
        config,
        details,
        elapsed: start.elapsed(),
    }
}

fn echo(cfg: &TrialConfig, word_length: Option<u32>) -> ConfigEcho {
    ConfigEcho { trials: cfg.trials, seed: cfg.seed, coord_bound: cfg.coord_bound, word_length }
}

fn is_divisible(x: &BigInt, m: i64) -> bool {
    x.is_multiple_of(&BigInt::from(m))
}

fn rational_to_int(q: &BigRational) -> Option<BigInt> {
    q.is_integer().then(|| q.to_integer())
}

/// `ℓ + Tℓ` for `ℓ ∈ H²`, as an integral Mukai vector.
pub fn l_plus_tl(l: &[BigInt]) -> MukaiVector {
    let lv = MukaiVector::from_h2(l.to_vec()).expect("22 coordinates");
    let tl = twist_t(&lv.to_rational()).to_integral().expect("T is integral");
    lv.add(&tl)
}

/// `2x·y + 2z1·z2 − z3²`, each factor in its own block.
pub fn tau_pairing_closed_form(l: &[BigInt]) -> BigInt {
    let h2 = h2_lattice();
    let block = |u: &[BigInt], v: &[BigInt], off: usize| -> BigInt {
        let mut a = vec![BigInt::zero(); H2_RANK];
        let mut b = vec![BigInt::zero(); H2_RANK];
        a[off..off + u.len()].clone_from_slice(u);
        b[off..off + v.len()].clone_from_slice(v);
        h2.inner_coords(&a, &b).expect("22 coordinates")
    };
    let two = BigInt::from(2);
    &two * block(&l[X], &l[Y], X.start) + &two * block(&l[Z1], &l[Z2], Z1.start) - block(&l[Z3], &l[Z3], Z3.start)
}

/// `None` if Claim 1 and its auxiliary identity hold for `ℓ`.
pub fn claim1_violation(l: &[BigInt]) -> Option<String> {
    if l.len() != H2_RANK {
        return Some(format!("expected 22 coordinates, got {}", l.len()));
    }
    let direct = h2_lattice().inner_coords(l, &tau_star_h2(l)).expect("22 coordinates");
    let closed = tau_pairing_closed_form(l);
    if direct != closed {
        return Some(format!("l.tau*l = {direct} but 2x.y + 2z1.z2 - z3^2 = {closed}"));
    }
    let w = l_plus_tl(l).to_rational();
    let square = mukai_pairing(&w, &w);
    match rational_to_int(&square) {
        Some(sq) if is_divisible(&sq, 4) => None,
        _ => Some(format!("(l + Tl)^2 = {square} is not 0 mod 4")),
    }
}

/// Parameters of the explicit family `v = (2a, x, x, z1, z1, ae + af, s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim2Params {
    pub a: BigInt,
    pub x: Vec<BigInt>,
    pub z1: Vec<BigInt>,
    pub s: BigInt,
}

impl Claim2Params {
    pub fn sample(rng: &mut impl Rng, bound: u32) -> Self {
        let mut draw = sample_box(rng, 12, bound).into_iter();
        let a = draw.next().unwrap();
        let x: Vec<BigInt> = draw.by_ref().take(8).collect();
        let z1: Vec<BigInt> = draw.by_ref().take(2).collect();
        let s = draw.next().unwrap();
        Claim2Params { a, x, z1, s }
    }

    pub fn vector(&self) -> MukaiVector {
        let mut c = Vec::with_capacity(H2_RANK);
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.z1);
        c.extend_from_slice(&self.z1);
        c.push(self.a.clone());
        c.push(self.a.clone());
        MukaiVector::new(BigInt::from(2) * &self.a, c, self.s.clone()).expect("22 coordinates")
    }

    /// `2x² + 2z1² + 2a² − 4as` with `x² ∈ −E8` and `z1² ∈ U`.
    pub fn square_closed_form(&self) -> BigInt {
        let h2 = h2_lattice();
        let mut xv = vec![BigInt::zero(); H2_RANK];
        xv[X].clone_from_slice(&self.x);
        let mut zv = vec![BigInt::zero(); H2_RANK];
        zv[Z1].clone_from_slice(&self.z1);
        let x2 = h2.inner_coords(&xv, &xv).unwrap();
        let z2 = h2.inner_coords(&zv, &zv).unwrap();
        BigInt::from(2) * (x2 + z2 + &self.a * &self.a) - BigInt::from(4) * &self.a * &self.s
    }

    /// `⟨(0,0,1), v⟩ = −2a`.
    pub fn point_pairing_closed_form(&self) -> BigInt {
        BigInt::from(-2) * &self.a
    }

    fn flat(&self) -> Vec<BigInt> {
        let mut out = vec![self.a.clone()];
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.z1);
        out.push(self.s.clone());
        out
    }

    fn from_flat(p: &[BigInt]) -> Option<Self> {
        (p.len() == 12).then(|| Claim2Params {
            a: p[0].clone(),
            x: p[1..9].to_vec(),
            z1: p[9..11].to_vec(),
            s: p[11].clone(),
        })
    }
}

/// `None` if `v` is `T`-invariant and `⟨(0,0,1), v⟩ ≡ v² (mod 4)`; with `params`,
/// the closed forms are also compared against the pairing.
pub fn claim2_violation(v: &MukaiVector, params: Option<&Claim2Params>) -> Option<String> {
    let rv = v.to_rational();
    if twist_t(&rv) != rv {
        return Some("v is not T-invariant".into());
    }
    let point = MukaiVector::point().to_rational();
    let lhs = rational_to_int(&mukai_pairing(&point, &rv))?;
    let rhs = rational_to_int(&mukai_pairing(&rv, &rv))?;
    if let Some(p) = params {
        if lhs != p.point_pairing_closed_form() {
            return Some(format!("<(0,0,1), v> = {lhs}, closed form gives {}", p.point_pairing_closed_form()));
        }
        if rhs != p.square_closed_form() {
            return Some(format!("v^2 = {rhs}, closed form gives {}", p.square_closed_form()));
        }
    }
    if !is_divisible(&(&lhs - &rhs), 4) {
        return Some(format!("<(0,0,1), v> = {lhs} and v^2 = {rhs} differ mod 4"));
    }
    None
}

/// Kernel of `T − I` on the full Mukai lattice.
pub fn invariant_sublattice() -> &'static FixedSublattice {
    static PLUS: OnceLock<FixedSublattice> = OnceLock::new();
    PLUS.get_or_init(|| fixed_sublattice(mukai_lattice(), t_matrix(), Sign::Plus))
}

/// Kernel of `T + I` on the full Mukai lattice.
pub fn anti_invariant_sublattice() -> &'static FixedSublattice {
    static MINUS: OnceLock<FixedSublattice> = OnceLock::new();
    MINUS.get_or_init(|| fixed_sublattice(mukai_lattice(), t_matrix(), Sign::Minus))
}

pub fn verify_claim1(cfg: &TrialConfig) -> VerificationReport {
    let start = Instant::now();
    let random = run_indexed(cfg.trials, |i| {
        let l = sample_box(&mut trial_rng(cfg.seed, i), H2_RANK, cfg.coord_bound);
        claim1_violation(&l)
            .map(|d| Counterexample { description: format!("trial {i}: {d}"), vectors: vec![NamedVector::new("l", l)] })
    });
    let cases = low_support_cases();
    let outcome = if random.counterexample.is_some() {
        random
    } else {
        let exhaustive = run_indexed(cases.len() as u64, |k| {
            let l = &cases[k as usize];
            claim1_violation(l).map(|d| Counterexample {
                description: format!("exhaustive case {k}: {d}"),
                vectors: vec![NamedVector::new("l", l.clone())],
            })
        });
        Outcome { trials_run: random.trials_run + exhaustive.trials_run, counterexample: exhaustive.counterexample }
    };
    let details = vec![format!(
        "{} randomized vectors in [-{b}, {b}]^22 plus {} vectors supported on at most two coordinates",
        cfg.trials,
        cases.len(),
        b = cfg.coord_bound
    )];
    report(CLAIM1, echo(cfg, None), outcome, details, start)
}

/// Every `ℓ` supported on some pair of coordinates `i < j`, entries in `[-2, 2]`.
/// Vectors with smaller support appear several times; the list is not deduplicated.
pub fn low_support_cases() -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    for i in 0..H2_RANK {
        for j in i + 1..H2_RANK {
            for a in -EXHAUSTIVE_BOUND..=EXHAUSTIVE_BOUND {
                for b in -EXHAUSTIVE_BOUND..=EXHAUSTIVE_BOUND {
                    let mut l = vec![BigInt::zero(); H2_RANK];
                    l[i] = BigInt::from(a);
                    l[j] = BigInt::from(b);
                    out.push(l);
                }
            }
        }
    }
    out
}

pub fn verify_claim2(cfg: &TrialConfig) -> VerificationReport {
    let start = Instant::now();
    let plus = invariant_sublattice();
    let outcome = run_indexed(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i);
        let params = Claim2Params::sample(&mut rng, cfg.coord_bound);
        let v = params.vector();
        if let Some(d) = claim2_violation(&v, Some(&params)) {
            return Some(Counterexample {
                description: format!("trial {i}, parametrized sampler: {d}"),
                vectors: vec![NamedVector::new("v", v.to_coords()), NamedVector::new("params", params.flat())],
            });
        }
        let coeffs = sample_box(&mut rng, plus.rank(), cfg.coord_bound);
        let w = MukaiVector::from_coords(&plus.embed(&coeffs)).expect("24 coordinates");
        claim2_violation(&w, None).map(|d| Counterexample {
            description: format!("trial {i}, kernel sampler: {d}"),
            vectors: vec![NamedVector::new("v", w.to_coords()), NamedVector::new("coeffs", coeffs)],
        })
    });
    let details = vec![format!(
        "each trial checks one vector from the explicit family and one from the rank-{} kernel of T - I",
        plus.rank()
    )];
    report(CLAIM2, echo(cfg, None), outcome, details, start)
}

/// Facts about the invariant sublattice `L+ = ker(T − I)` and its half form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantLatticeFacts {
    pub rank: usize,
    pub gram_even: bool,
    pub half_gram: Option<IntegerMatrix>,
    pub half_det: Option<BigInt>,
    pub half_odd: bool,
    /// Coordinates of `(0,0,1)` in the `L+` basis.
    pub point_coords: Option<Vec<BigInt>>,
    pub point_characteristic: bool,
}

pub fn invariant_lattice_facts() -> InvariantLatticeFacts {
    let plus = invariant_sublattice();
    let g = &plus.gram;
    let n = plus.rank();
    let gram_even = g.entries().iter().all(Integer::is_even);
    let half_gram = gram_even.then(|| {
        let entries = g.entries().iter().map(|x| x / BigInt::from(2)).collect();
        IntegerMatrix::from_vec(n, n, entries).unwrap()
    });
    let half_det = half_gram.as_ref().map(|h| linalg::determinant(h).unwrap());
    let half_odd = half_gram.as_ref().is_some_and(|h| (0..n).any(|i| h[(i, i)].is_odd()));
    let mut point = vec![BigInt::zero(); MUKAI_RANK];
    point[MUKAI_RANK - 1] = BigInt::one();
    let point_coords = linalg::solve_integer(&plus.basis, &point).unwrap();
    let point_characteristic = match (&half_gram, &point_coords) {
        (Some(h), Some(c)) => {
            let hc = h.mul_vec(c).unwrap();
            (0..n).all(|i| (&hc[i] - &h[(i, i)]).is_even())
        }
        _ => false,
    };
    InvariantLatticeFacts { rank: n, gram_even, half_gram, half_det, half_odd, point_coords, point_characteristic }
}

fn invariant_lattice_violation() -> Option<String> {
    let f = invariant_lattice_facts();
    if f.rank != 12 {
        return Some(format!("rank of L+ is {}, expected 12", f.rank));
    }
    if !f.gram_even {
        return Some("Gram of L+ has an odd entry".into());
    }
    let det = f.half_det.as_ref()?;
    if !(det.is_one() || *det == BigInt::from(-1)) {
        return Some(format!("det(Gram/2) = {det}, not unimodular"));
    }
    if !f.half_odd {
        return Some("Gram/2 is even".into());
    }
    if f.point_coords.is_none() {
        return Some("(0,0,1) is not in the span of the computed L+ basis".into());
    }
    if !f.point_characteristic {
        return Some("(0,0,1) is not characteristic for Gram/2".into());
    }
    None
}

pub fn verify_invariant_lattice() -> VerificationReport {
    let start = Instant::now();
    let facts = invariant_lattice_facts();
    let outcome = Outcome {
        trials_run: 1,
        counterexample: invariant_lattice_violation().map(|d| Counterexample {
            description: d,
            vectors: vec![NamedVector::new("gram", invariant_sublattice().gram.entries().to_vec())],
        }),
    };
    let mut details = vec![format!("rank(L+) = {}", facts.rank)];
    if let Some(det) = &facts.half_det {
        details.push(format!("det(Gram(L+)/2) = {det}"));
    }
    details.push(format!("Gram(L+)/2 is {}", if facts.half_odd { "odd" } else { "even" }));
    details.push(format!(
        "(0,0,1) is {}characteristic for Gram(L+)/2",
        if facts.point_characteristic { "" } else { "not " }
    ));
    let config = ConfigEcho { trials: 0, seed: 0, coord_bound: 0, word_length: None };
    report(INVARIANT_LATTICE, config, outcome, details, start)
}

/// One letter of an equivariant word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    /// `σ_w` with `w² = ±2` and `Tw = ±w`.
    Reflection {
        w: Vec<BigInt>,
        norm: BigInt,
    },
    T,
    NegIdentity,
}

impl Generator {
    pub fn matrix(&self) -> IntegerMatrix {
        let mut m = IntegerMatrix::identity(MUKAI_RANK);
        self.left_apply(&mut m);
        m
    }

    /// `m ← g·m`. A reflection is applied as the rank-one update `m − (2/w²)·w·(wᵀGm)`.
    pub fn left_apply(&self, m: &mut IntegerMatrix) {
        match self {
            Generator::T => *m = t_matrix().matrix() * &*m,
            Generator::NegIdentity => *m = m.neg(),
            Generator::Reflection { w, norm } => {
                let gw = mukai_lattice().gram().mul_vec(w).unwrap();
                let eps = BigInt::from(2) / norm;
                let row: Vec<BigInt> = (0..m.cols())
                    .map(|j| (0..m.rows()).filter(|&i| !gw[i].is_zero()).map(|i| &gw[i] * &m[(i, j)]).sum())
                    .collect();
                for (i, wi) in w.iter().enumerate() {
                    if wi.is_zero() {
                        continue;
                    }
                    let k = &eps * wi;
                    for (j, r) in row.iter().enumerate() {
                        if !r.is_zero() {
                            m[(i, j)] -= &k * r;
                        }
                    }
                }
            }
        }
    }
}

/// Reflection vectors of norm ±2 with coordinates in `{-1, 0, 1}` over the bases of
/// `ker(T − I)` and `ker(T + I)`, one per ± pair.
pub fn reflection_pool() -> &'static [Generator] {
    static POOL: OnceLock<Vec<Generator>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut pool = Vec::new();
        for sub in [invariant_sublattice(), anti_invariant_sublattice()] {
            let lat = sub.lattice("eigenlattice");
            for norm in [BigInt::from(2), BigInt::from(-2)] {
                for v in short_vectors(&lat, &norm, 1) {
                    let first = v.coords().iter().find(|c| !c.is_zero());
                    if first.is_some_and(|c| c > &BigInt::zero()) {
                        pool.push(Generator::Reflection { w: sub.embed(v.coords()), norm: norm.clone() });
                    }
                }
            }
        }
        pool
    })
}

/// A product of `word_length` generators, each a reflection from [`reflection_pool`]
/// with probability 8/10, `T` or `−I` with probability 1/10 each.
pub fn sample_equivariant_isometry(seed: u64, word_length: u32) -> Result<Isometry, VerifyError> {
    let pool = reflection_pool();
    if pool.is_empty() {
        return Err(VerifyError::EmptyPool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = IntegerMatrix::identity(MUKAI_RANK);
    for _ in 0..word_length {
        let g = match rng.random_range(0..10u32) {
            0 => &Generator::T,
            1 => &Generator::NegIdentity,
            _ => &pool[rng.random_range(0..pool.len())],
        };
        g.left_apply(&mut m);
    }
    let t = t_matrix().matrix();
    if &m * t != t * &m {
        return Err(VerifyError::NotEquivariant);
    }
    Ok(Isometry::new(mukai_lattice(), m)?)
}

/// `None` if `φ` is an equivariant isometry whose `φ(0,0,1)` has even degree-2 part and
/// pairs to `0 mod 4` with every `ℓ + Tℓ`.
pub fn phi_violation(phi: &IntegerMatrix, ls: &[Vec<BigInt>]) -> Option<String> {
    match is_isometry(mukai_lattice(), phi) {
        Ok(true) => {}
        _ => return Some("phi is not an isometry".into()),
    }
    let t = t_matrix().matrix();
    if phi * t != t * phi {
        return Some("phi does not commute with T".into());
    }
    let image = phi.column(MUKAI_RANK - 1);
    if let Some(k) = (1..MUKAI_RANK - 1).find(|&k| image[k].is_odd()) {
        return Some(format!("degree-2 coordinate {} of phi(0,0,1) is odd ({})", k - 1, image[k]));
    }
    for (idx, l) in ls.iter().enumerate() {
        let w = l_plus_tl(l).to_coords();
        let p = mukai_lattice().inner_coords(&image, &w).expect("24 coordinates");
        if !is_divisible(&p, 4) {
            return Some(format!("<phi(0,0,1), l + Tl> = {p} is not 0 mod 4 for l #{idx}"));
        }
    }
    None
}

pub fn verify_phi_integrality(cfg: &TrialConfig, word_length: u32) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    if reflection_pool().is_empty() {
        return Err(VerifyError::EmptyPool);
    }
    let outcome = run_indexed(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i);
        let sub_seed = rng.next_u64();
        let phi = match sample_equivariant_isometry(sub_seed, word_length) {
            Ok(phi) => phi.into_matrix(),
            Err(e) => {
                return Some(Counterexample {
                    description: format!("trial {i}: sampler failed: {e}"),
                    vectors: vec![NamedVector::new("sub_seed", vec![BigInt::from(sub_seed)])],
                })
            }
        };
        let ls: Vec<Vec<BigInt>> =
            (0..PHI_PAIRINGS_PER_TRIAL).map(|_| sample_box(&mut rng, H2_RANK, cfg.coord_bound)).collect();
        phi_violation(&phi, &ls).map(|d| {
            let mut vectors = vec![NamedVector::new("phi", phi.entries().to_vec())];
            vectors.extend(ls.iter().enumerate().map(|(k, l)| NamedVector::new(&format!("l{k}"), l.clone())));
            Counterexample { description: format!("trial {i}: {d}"), vectors }
        })
    });
    let details = vec![format!(
        "words of length {word_length} over {} reflections, T and -I; {} pairings per trial",
        reflection_pool().len(),
        PHI_PAIRINGS_PER_TRIAL
    )];
    Ok(report(PHI_INTEGRALITY, echo(cfg, Some(word_length)), outcome, details, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn claim1_on_z3_e() {
        let mut l = vec![BigInt::zero(); H2_RANK];
        l[Z3.start] = b(1);
        let w = l_plus_tl(&l);
        let mut expected = MukaiVector::zero();
        expected.s = b(-1);
        assert_eq!(w, expected);
        assert!(w.square().is_zero());
        assert_eq!(claim1_violation(&l), None);
    }

    #[test]
    fn claim1_on_zero() {
        assert_eq!(claim1_violation(&vec![BigInt::zero(); H2_RANK]), None);
    }

    #[test]
    fn claim2_worked_example() {
        let p = Claim2Params { a: b(1), x: vec![BigInt::zero(); 8], z1: vec![BigInt::zero(); 2], s: BigInt::zero() };
        let v = p.vector();
        assert_eq!(v.square(), b(2));
        assert_eq!(v.pairing(&MukaiVector::point()), b(-2));
        assert_eq!(claim2_violation(&v, Some(&p)), None);
        assert_eq!(claim2_violation(&MukaiVector::point(), None), None);
    }

    #[test]
    fn claim2_rejects_non_invariant() {
        let v = MukaiVector::new(1, vec![BigInt::zero(); H2_RANK], 0).unwrap();
        assert!(claim2_violation(&v, None).is_some());
    }

    #[test]
    fn low_support_pass_size() {
        let cases = low_support_cases();
        assert_eq!(cases.len(), 231 * 25);
    }

    #[test]
    fn trial_streams_are_stable() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(trial_rng(7, 3).next_u64(), trial_rng(7, 4).next_u64());
        assert_ne!(trial_rng(7, 3).next_u64(), trial_rng(8, 3).next_u64());
    }

    #[test]
    fn failing_check_reports_lowest_index() {
        let out = run_indexed(1000, |i| {
            (i % 97 == 41).then(|| Counterexample { description: format!("{i}"), vectors: vec![] })
        });
        assert_eq!(out.trials_run, 42);
        assert_eq!(out.counterexample.unwrap().description, "41");
    }

    #[test]
    fn recheck_reproduces_a_planted_failure() {
        // l = (0, l, 0) is a legitimate input; plant a non-invariant v for claim 2.
        let v = MukaiVector::new(1, vec![BigInt::zero(); H2_RANK], 0).unwrap();
        let rep = VerificationReport {
            check_name: CLAIM2.into(),
            trials_run: 1,
            passed: false,
            counterexample: Some(Counterexample {
                description: "planted".into(),
                vectors: vec![NamedVector::new("v", v.to_coords())],
            }),
            config: echo(&TrialConfig::default(), None),
            details: vec![],
            elapsed: Duration::ZERO,
        };
        assert_eq!(rep.recheck(), Some(true));

        let mut odd_phi = IntegerMatrix::identity(MUKAI_RANK);
        odd_phi[(1, MUKAI_RANK - 1)] = b(1);
        let rep = VerificationReport {
            check_name: PHI_INTEGRALITY.into(),
            counterexample: Some(Counterexample {
                description: "planted".into(),
                vectors: vec![NamedVector::new("phi", odd_phi.entries().to_vec())],
            }),
            ..rep
        };
        assert_eq!(rep.recheck(), Some(true));
    }

    #[test]
    fn word_of_length_zero_is_identity() {
        let phi = sample_equivariant_isometry(5, 0).unwrap();
        assert_eq!(phi.matrix(), &IntegerMatrix::identity(MUKAI_RANK));
    }

    #[test]
    fn generators_commute_with_t() {
        let t = t_matrix().matrix();
        let pool = reflection_pool();
        assert!(!pool.is_empty());
        for g in pool.iter().step_by(pool.len().div_ceil(50)).chain([&Generator::T, &Generator::NegIdentity]) {
            let m = g.matrix();
            assert_eq!(&m * t, t * &m);
            assert!(is_isometry(mukai_lattice(), &m).unwrap());
        }
    }

    #[test]
    fn left_apply_matches_reflection_matrix() {
        use crate::lattice::{reflection, LatticeVector};
        for g in reflection_pool().iter().take(20) {
            let Generator::Reflection { w, .. } = g else { unreachable!() };
            let sigma = reflection(mukai_lattice(), &LatticeVector(w.clone())).unwrap();
            assert_eq!(&g.matrix(), sigma.matrix());
        }
    }

    #[test]
    fn invariant_lattice_structure() {
        let f = invariant_lattice_facts();
        assert_eq!(f.rank, 12);
        assert!(f.gram_even);
        assert!(f.half_odd);
        assert!(f.point_characteristic);
        // −E8 ⊕ U ⊕ [[1, −1], [−1, 0]] has determinant 1·(−1)·(−1).
        assert_eq!(f.half_det, Some(b(1)));
        assert_eq!(verify_invariant_lattice().recheck(), None);
    }

    #[test]
    fn small_runs_pass_and_are_deterministic() {
        let cfg = TrialConfig { trials: 200, seed: 11, coord_bound: 50 };
        let a = verify_claim1(&cfg);
        let b = verify_claim1(&cfg);
        assert!(a.passed);
        assert_eq!(a.trials_run, 200 + 5775);
        assert_eq!(
            VerificationReport { elapsed: Duration::ZERO, ..a },
            VerificationReport { elapsed: Duration::ZERO, ..b }
        );
        assert!(verify_claim2(&cfg).passed);
        let phi = verify_phi_integrality(&TrialConfig { trials: 20, ..cfg }, 8).unwrap();
        assert!(phi.passed, "{:?}", phi.counterexample);
    }
}
