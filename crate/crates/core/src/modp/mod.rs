//! Reduction modulo a prime: `SL_d(p)` arithmetic, centrality, generation
//! of `SL_d(p)`, and the choice of a good prime for an equation.

mod primes;

pub use primes::{is_prime, prime_window, primes_up_to, window_product_check, PrimeWindow, WindowPrimes, WindowProduct};

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::cayley;
use crate::error::{Error, FailedClause, PrimeDiagnostic, Result};
use crate::intmat::{IntMatrix, MatrixGenerators};
use crate::words::{ConstWord, FreeWord};

/// Largest modulus supported: residues and their products must fit in u64.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

/// A matrix over `Z/p` with determinant one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    dim: usize,
    p: u64,
    entries: Vec<u64>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mod {} ", self.p)?;
        f.debug_list().entries(self.entries.chunks(self.dim)).finish()
    }
}

impl Serialize for ModMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .entries
            .chunks(self.dim)
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl ModMatrix {
    /// Residues are taken modulo `p`; the determinant must be 1 mod `p`.
    pub fn new(dim: usize, p: u64, entries: Vec<u64>) -> Result<Self> {
        if !is_prime(p) || p > MAX_MODULUS {
            return Err(Error::NotPrime(p));
        }
        if dim < 2 || entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for dimension {dim}",
                entries.len()
            )));
        }
        let m = ModMatrix {
            dim,
            p,
            entries: entries.into_iter().map(|e| e % p).collect(),
        };
        if m.determinant() != 1 {
            return Err(Error::InvalidMatrix(format!(
                "determinant {} != 1 mod {p}",
                m.determinant()
            )));
        }
        Ok(m)
    }

    pub(crate) fn from_raw(dim: usize, p: u64, entries: Vec<u64>) -> Self {
        ModMatrix { dim, p, entries }
    }

    pub fn identity(dim: usize, p: u64) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1 % p;
        }
        ModMatrix { dim, p, entries }
    }

    /// `λ I` for a residue `λ`; lies in `SL_d(p)` only when `λ^d = 1`.
    pub fn scalar(dim: usize, p: u64, lambda: u64) -> Result<Self> {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = lambda % p;
        }
        ModMatrix::new(dim, p, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    pub fn is_identity(&self) -> bool {
        *self == ModMatrix::identity(self.dim, self.p)
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!((self.dim, self.p), (other.dim, other.p), "incompatible matrices");
        let d = self.dim;
        let p = self.p as u128;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc += self.entries[i * d + k] as u128 * other.entries[k * d + j] as u128;
                }
                entries.push((acc % p) as u64);
            }
        }
        ModMatrix { dim: d, p: self.p, entries }
    }

    /// Determinant by Gaussian elimination over `F_p`.
    pub fn determinant(&self) -> u64 {
        let d = self.dim;
        let p = self.p;
        let mut a = self.entries.clone();
        let mut det = 1u64;
        for col in 0..d {
            let Some(pivot) = (col..d).find(|&r| a[r * d + col] != 0) else {
                return 0;
            };
            if pivot != col {
                for c in 0..d {
                    a.swap(pivot * d + c, col * d + c);
                }
                det = (p - det) % p;
            }
            let pv = a[col * d + col];
            det = mulm(det, pv, p);
            let inv = primes::pow_mod(pv, p - 2, p);
            for r in col + 1..d {
                let f = mulm(a[r * d + col], inv, p);
                if f == 0 {
                    continue;
                }
                for c in col..d {
                    let sub = mulm(f, a[col * d + c], p);
                    a[r * d + c] = (a[r * d + c] + p - sub) % p;
                }
            }
        }
        det
    }

    /// Inverse in `SL_d(p)` via the adjugate.
    pub fn inverse(&self) -> ModMatrix {
        let d = self.dim;
        let p = self.p;
        if d == 2 {
            let e = &self.entries;
            return ModMatrix {
                dim: 2,
                p,
                entries: vec![e[3], (p - e[1]) % p, (p - e[2]) % p, e[0]],
            };
        }
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                let minor: Vec<u64> = (0..d)
                    .filter(|&r| r != j)
                    .flat_map(|r| (0..d).filter(move |&c| c != i).map(move |c| self.entries[r * d + c]))
                    .collect();
                let cof = ModMatrix { dim: d - 1, p, entries: minor }.determinant_any();
                entries[i * d + j] = if (i + j) % 2 == 0 { cof } else { (p - cof) % p };
            }
        }
        ModMatrix { dim: d, p, entries }
    }

    fn determinant_any(&self) -> u64 {
        if self.dim == 1 {
            self.entries[0]
        } else {
            self.determinant()
        }
    }

    pub fn pow(&self, k: i64) -> ModMatrix {
        let mut base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = ModMatrix::identity(self.dim, self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Central in `SL_d(p)` iff scalar.
    pub fn is_central(&self) -> bool {
        is_central(self)
    }

    pub fn commutes_with(&self, other: &ModMatrix) -> bool {
        self.mul(other) == other.mul(self)
    }
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Entrywise residues of an integer matrix.
pub fn reduce_mod(x: &IntMatrix, p: u64) -> Result<ModMatrix> {
    if !is_prime(p) || p > MAX_MODULUS {
        return Err(Error::NotPrime(p));
    }
    let pb = BigInt::from(p);
    let entries = x
        .entries()
        .iter()
        .map(|e| {
            let r = ((e % &pb) + &pb) % &pb;
            r.to_u64().expect("residue fits")
        })
        .collect();
    Ok(ModMatrix {
        dim: x.dim(),
        p,
        entries,
    })
}

/// True iff `x` is a scalar matrix `λI`.
pub fn is_central(x: &ModMatrix) -> bool {
    let d = x.dim;
    let lambda = x.get(0, 0);
    (0..d).all(|i| (0..d).all(|j| x.get(i, j) == if i == j { lambda } else { 0 }))
}

/// `|SL_d(p)| = p^{d(d-1)/2} ∏_{i=2}^{d} (p^i - 1)`, or `None` on overflow.
pub fn sl_order(dim: usize, p: u64) -> Option<u128> {
    let p = p as u128;
    let mut order = p.checked_pow((dim * (dim - 1) / 2) as u32)?;
    for i in 2..=dim as u32 {
        order = order.checked_mul(p.checked_pow(i)?.checked_sub(1)?)?;
    }
    Some(order)
}

/// Generators of a free group reduced modulo `p`.
#[derive(Debug, Clone)]
pub struct ReducedGenerators {
    pub gens: Vec<ModMatrix>,
    pub inverses: Vec<ModMatrix>,
}

impl ReducedGenerators {
    pub fn new(gens: &MatrixGenerators, p: u64) -> Result<Self> {
        let g: Vec<ModMatrix> = gens
            .generators()
            .iter()
            .map(|m| reduce_mod(m, p))
            .collect::<Result<_>>()?;
        let inverses = g.iter().map(ModMatrix::inverse).collect();
        Ok(ReducedGenerators { gens: g, inverses })
    }

    pub fn from_matrices(gens: Vec<ModMatrix>) -> Self {
        let inverses = gens.iter().map(ModMatrix::inverse).collect();
        ReducedGenerators { gens, inverses }
    }

    pub fn modulus(&self) -> u64 {
        self.gens[0].p
    }

    pub fn dim(&self) -> usize {
        self.gens[0].dim
    }

    /// Generators followed by inverses in letter order `a, a^-1, b, b^-1, …`.
    pub fn symmetric(&self) -> Vec<ModMatrix> {
        self.gens
            .iter()
            .zip(&self.inverses)
            .flat_map(|(g, i)| [g.clone(), i.clone()])
            .collect()
    }
}

/// `g` evaluated over `SL_d(p)`.
pub fn eval_free_word_mod(g: &FreeWord, gens: &ReducedGenerators) -> ModMatrix {
    let mut acc = ModMatrix::identity(gens.dim(), gens.modulus());
    for s in g.syllables() {
        acc = acc.mul(&gens.gens[s.gen as usize].pow(s.exp));
    }
    acc
}

/// The reduced word map `x ↦ x^{a0} C1 x^{a1} …` with the constants already
/// reduced.
#[derive(Debug, Clone)]
pub struct ReducedWordMap {
    pub a0: i64,
    pub body: Vec<(ModMatrix, i64)>,
}

impl ReducedWordMap {
    pub fn new(w: &ConstWord, gens: &ReducedGenerators) -> Self {
        ReducedWordMap {
            a0: w.a0(),
            body: w
                .body()
                .iter()
                .map(|(c, a)| (eval_free_word_mod(c, gens), *a))
                .collect(),
        }
    }

    pub fn constants(&self) -> impl Iterator<Item = &ModMatrix> {
        self.body.iter().map(|(c, _)| c)
    }

    pub fn eval(&self, x: &ModMatrix) -> ModMatrix {
        let x_inv = x.inverse();
        let pow = |a: i64| {
            if a >= 0 {
                x.pow(a)
            } else {
                x_inv.pow(-a)
            }
        };
        let mut acc = pow(self.a0);
        for (c, a) in &self.body {
            acc = acc.mul(c);
            if *a != 0 {
                acc = acc.mul(&pow(*a));
            }
        }
        acc
    }
}

/// `w(X)` over `SL_d(p)`.
pub fn eval_const_word_mod(w: &ConstWord, x: &ModMatrix, gens: &ReducedGenerators) -> ModMatrix {
    ReducedWordMap::new(w, gens).eval(x)
}

/// Elements explored while looking for transvections before falling back
/// to a full closure.
const CERTIFICATE_BUDGET: u64 = 1 << 14;

/// Whether `gens` generate all of `SL_d(p)`.
///
/// A subgroup containing a nontrivial element of every root group
/// `{I + t E_ij}` is everything, since those groups are cyclic of order `p`
/// and together generate `SL_d(p)`. Short products of the generators are
/// searched for such elements first; otherwise the closure is enumerated,
/// stopping early once it reaches `|SL_d(p)|`.
pub fn check_generates(gens: &[ModMatrix], cap: u64) -> Result<bool> {
    let Some(first) = gens.first() else {
        return Ok(false);
    };
    let (d, p) = (first.dim, first.p);
    if gens.iter().any(|g| g.dim != d || g.p != p) {
        return Err(Error::DimensionMismatch("generators differ in dimension or modulus".into()));
    }
    let reduced = ReducedGenerators::from_matrices(gens.to_vec());
    if root_certificate(&reduced, CERTIFICATE_BUDGET.min(cap))? {
        return Ok(true);
    }
    let order = sl_order(d, p)
        .filter(|&o| o <= cap as u128)
        .ok_or_else(|| Error::Resource(format!("|SL_{d}({p})| exceeds the element cap {cap}")))?;
    let ball = cayley::explore_until(&reduced, order as u64, order as u64)?;
    Ok(ball.len() as u128 == order)
}

fn root_certificate(gens: &ReducedGenerators, budget: u64) -> Result<bool> {
    let d = gens.dim();
    let mut seen = vec![false; d * d];
    let mut missing = d * (d - 1);
    let mut mark = |m: &ModMatrix| {
        if let Some((i, j)) = root_position(m) {
            if !seen[i * d + j] {
                seen[i * d + j] = true;
                missing -= 1;
            }
        }
        missing == 0
    };
    for g in gens.gens.iter() {
        if mark(g) {
            return Ok(true);
        }
    }
    let ball = match cayley::explore_until(gens, budget, u64::MAX) {
        Ok(b) => b,
        Err(Error::Resource(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    for id in 0..ball.len() {
        if mark(&ball.element(id)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `(i, j)` when `m = I + t E_ij` with `t != 0`, `i != j`.
fn root_position(m: &ModMatrix) -> Option<(usize, usize)> {
    let d = m.dim;
    let mut found = None;
    for i in 0..d {
        for j in 0..d {
            let v = m.get(i, j);
            let expected = u64::from(i == j);
            if v != expected {
                if i == j || found.is_some() {
                    return None;
                }
                found = Some((i, j));
            }
        }
    }
    found
}

/// A prime for which the constants stay non-central and the generators
/// still generate `SL_d(p)`.
#[derive(Debug, Clone)]
pub struct GoodPrime {
    pub p: u64,
    pub reduced_gens: ReducedGenerators,
    pub reduced_constants: Vec<ModMatrix>,
    pub surjective: bool,
}

/// Options for the prime search.
#[derive(Debug, Clone, Copy)]
pub struct PrimeSearch {
    /// Element cap for generation checks.
    pub cap: u64,
    /// Give up on a window after this many rejected primes.
    pub max_attempts: usize,
}

impl Default for PrimeSearch {
    fn default() -> Self {
        PrimeSearch {
            cap: 1 << 27,
            max_attempts: 64,
        }
    }
}

/// Tests the two computable clauses at one prime. The clause about the
/// denominators of the generators is vacuous over `Z`.
pub fn test_prime(
    w: &ConstWord,
    gens: &MatrixGenerators,
    p: u64,
    cap: u64,
) -> std::result::Result<GoodPrime, PrimeDiagnostic> {
    let diag = |failed_clause, offending_constant| PrimeDiagnostic {
        prime: p,
        failed_clause,
        offending_constant,
    };
    let reduced = ReducedGenerators::new(gens, p).map_err(|_| diag(FailedClause::NotGenerating, None))?;
    let map = ReducedWordMap::new(w, &reduced);
    if let Some(i) = map.constants().position(is_central) {
        return Err(diag(FailedClause::CentralConstant, Some(i + 1)));
    }
    match check_generates(&reduced.gens, cap) {
        Ok(true) => {}
        Ok(false) => return Err(diag(FailedClause::NotGenerating, None)),
        Err(_) => return Err(diag(FailedClause::GenerationUndecided, None)),
    }
    Ok(GoodPrime {
        p,
        reduced_constants: map.body.into_iter().map(|(c, _)| c).collect(),
        reduced_gens: reduced,
        surjective: true,
    })
}

/// The smallest prime of the window `(C0 n, C0 n^2]` passing every clause,
/// or the per-prime reasons for failure.
pub fn select_good_prime(
    w: &ConstWord,
    gens: &MatrixGenerators,
    n: u64,
    c0: u64,
    search: PrimeSearch,
) -> Result<GoodPrime> {
    let window = prime_window(n, c0)?;
    let mut diagnostics = Vec::new();
    for p in window.iter() {
        if p > MAX_MODULUS {
            break;
        }
        match test_prime(w, gens, p, search.cap) {
            Ok(good) => return Ok(good),
            Err(d) => diagnostics.push(d),
        }
        if diagnostics.len() >= search.max_attempts {
            break;
        }
    }
    Err(Error::WindowExhausted {
        c0_max: c0,
        diagnostics,
    })
}
