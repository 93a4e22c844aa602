//! Exact arithmetic in `SL_d(Z)`.
//!
//! Entries are arbitrary-precision integers. Matrices are checked to have
//! determinant one on construction; products are re-checked in debug builds
//! while the entries are small enough for that to be cheap.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{BallGrower, ConstWord, FreeWord, GeneratorSet};

/// Default per-entry size limit for evaluations: 2^20 bits.
pub const DEFAULT_MAX_BITS: u64 = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl IntMatrix {
    /// Builds a matrix from row-major entries, rejecting anything outside
    /// `SL_d(Z)`.
    pub fn new(dim: usize, entries: Vec<BigInt>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMatrix(format!("dimension {dim} < 2")));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        let m = IntMatrix { dim, entries };
        let det = m.determinant();
        if !det.is_one() {
            return Err(Error::InvalidMatrix(format!("determinant {det} != 1")));
        }
        Ok(m)
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::InvalidMatrix("matrix is not square".into()));
            }
            entries.extend(r.iter().map(|&v| BigInt::from(v)));
        }
        IntMatrix::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        IntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigInt]> {
        self.entries.chunks(self.dim)
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.dim)
    }

    /// True for `λI`; in `SL_d(Z)` that means `±I`.
    pub fn is_scalar(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| i == j || self.get(i, j).is_zero()))
            && (1..d).all(|i| self.get(i, i) == self.get(0, 0))
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigInt::zero();
                for k in 0..d {
                    let (x, y) = (self.get(i, k), other.get(k, j));
                    if !x.is_zero() && !y.is_zero() {
                        acc += x * y;
                    }
                }
                entries.push(acc);
            }
        }
        let out = IntMatrix { dim: d, entries };
        debug_assert!(out.max_bits() > 512 || out.determinant().is_one());
        out
    }

    /// Fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        bareiss(self.dim, self.entries.clone())
    }

    /// Adjugate, which is the inverse since the determinant is one.
    pub fn inverse(&self) -> IntMatrix {
        let d = self.dim;
        if d == 2 {
            let e = &self.entries;
            return IntMatrix {
                dim: 2,
                entries: vec![e[3].clone(), -&e[1], -&e[2], e[0].clone()],
            };
        }
        let mut entries = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let minor: Vec<BigInt> = (0..d)
                    .filter(|&r| r != j)
                    .flat_map(|r| {
                        (0..d)
                            .filter(move |&c| c != i)
                            .map(move |c| self.get(r, c).clone())
                    })
                    .collect();
                let cof = bareiss(d - 1, minor);
                entries[i * d + j] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        IntMatrix { dim: d, entries }
    }

    /// `self^k` by repeated squaring; negative powers go through the inverse.
    pub fn pow(&self, k: i64) -> IntMatrix {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        pow_unsigned(&base, k.unsigned_abs())
    }

    /// Height: the largest absolute value of an entry.
    pub fn height(&self) -> BigInt {
        self.entries
            .iter()
            .map(|e| e.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn max_bits(&self) -> u64 {
        self.entries.iter().map(|e| e.bits()).max().unwrap_or(0)
    }

    /// Row-major decimal strings, the literal format used in files.
    pub fn to_literal(&self) -> Vec<Vec<String>> {
        self.rows()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect()
    }

    pub fn from_literal(rows: &[Vec<String>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::InvalidMatrix("matrix is not square".into()));
            }
            for s in r {
                let v: BigInt = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidMatrix(format!("{s:?} is not a decimal integer")))?;
                entries.push(v);
            }
        }
        IntMatrix::new(dim, entries)
    }
}

fn bareiss(d: usize, mut a: Vec<BigInt>) -> BigInt {
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..d.saturating_sub(1) {
        if a[k * d + k].is_zero() {
            match (k + 1..d).find(|&r| !a[r * d + k].is_zero()) {
                Some(r) => {
                    for c in 0..d {
                        a.swap(k * d + c, r * d + c);
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let v = (&a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j]) / &prev;
                a[i * d + j] = v;
            }
        }
        prev = a[k * d + k].clone();
    }
    let det = a[d * d - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn pow_unsigned(base: &IntMatrix, mut k: u64) -> IntMatrix {
    let mut result = IntMatrix::identity(base.dim);
    let mut sq = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = result.mul(&sq);
        }
        k >>= 1;
        if k > 0 {
            sq = sq.mul(&sq);
        }
    }
    result
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_literal().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        IntMatrix::from_literal(&rows).map_err(serde::de::Error::custom)
    }
}

/// Images of the free generators in `SL_d(Z)`, with their inverses and the
/// largest absolute entry `M` over both.
#[derive(Debug, Clone)]
pub struct MatrixGenerators {
    names: GeneratorSet,
    gens: Vec<IntMatrix>,
    inverses: Vec<IntMatrix>,
    max_entry: BigInt,
}

impl MatrixGenerators {
    pub fn new(names: GeneratorSet, gens: Vec<IntMatrix>) -> Result<Self> {
        if gens.len() != names.rank() {
            return Err(Error::InvalidGenerators(format!(
                "{} matrices for {} generator names",
                gens.len(),
                names.rank()
            )));
        }
        let dim = gens[0].dim();
        if gens.iter().any(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch("generators differ in dimension".into()));
        }
        let inverses: Vec<IntMatrix> = gens.iter().map(IntMatrix::inverse).collect();
        let max_entry = gens
            .iter()
            .chain(&inverses)
            .map(IntMatrix::height)
            .max()
            .expect("at least one generator");
        Ok(MatrixGenerators {
            names,
            gens,
            inverses,
            max_entry,
        })
    }

    /// Rank-2 free group: `a = [[1,2],[0,1]]`, `b = [[1,0],[2,1]]`.
    pub fn sanov() -> Self {
        let a = IntMatrix::from_rows(&[[1, 2], [0, 1]]).expect("det 1");
        let b = IntMatrix::from_rows(&[[1, 0], [2, 1]]).expect("det 1");
        MatrixGenerators::new(GeneratorSet::standard(2), vec![a, b]).expect("valid preset")
    }

    /// True for the Sanov pair, the one generating set known to be free.
    pub fn is_sanov(&self) -> bool {
        self.gens == MatrixGenerators::sanov().gens
    }

    /// The elementary transvections `I + E_ij` (`i != j`) of `SL_d(Z)`,
    /// named `e12, e13, …`. These generate `SL_d(Z)` but not freely.
    pub fn elementary(dim: usize) -> Result<Self> {
        if !(2..=9).contains(&dim) {
            return Err(Error::InvalidGenerators(format!(
                "elementary preset needs 2 <= d <= 9, got {dim}"
            )));
        }
        let mut names = Vec::new();
        let mut gens = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    let mut m = IntMatrix::identity(dim);
                    m.entries[i * dim + j] = BigInt::one();
                    gens.push(m);
                    names.push(format!("e{}{}", i + 1, j + 1));
                }
            }
        }
        MatrixGenerators::new(GeneratorSet::new(names)?, gens)
    }

    pub fn names(&self) -> &GeneratorSet {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.gens[0].dim()
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.gens
    }

    pub fn inverses(&self) -> &[IntMatrix] {
        &self.inverses
    }

    /// `M`: largest absolute entry among the generators and their inverses.
    pub fn max_entry(&self) -> &BigInt {
        &self.max_entry
    }

    /// The matrix of a letter (see [`crate::words::letter_syllable`]).
    pub fn letter(&self, letter: u32) -> &IntMatrix {
        let g = (letter >> 1) as usize;
        if letter & 1 == 0 {
            &self.gens[g]
        } else {
            &self.inverses[g]
        }
    }

    fn check_word(&self, g: &FreeWord) -> Result<()> {
        match g.max_gen() {
            Some(m) if m as usize >= self.rank() => Err(Error::InvalidGenerators(format!(
                "generator index {m} out of range for rank {}",
                self.rank()
            ))),
            _ if g.contains_var() => Err(Error::VariableInConstant),
            _ => Ok(()),
        }
    }
}

fn check_bits(m: &IntMatrix, max_bits: u64) -> Result<()> {
    if m.max_bits() > max_bits {
        Err(Error::Resource(format!(
            "matrix entry exceeds {max_bits} bits"
        )))
    } else {
        Ok(())
    }
}

/// `g` evaluated in the matrix group.
pub fn eval_free_word(g: &FreeWord, gens: &MatrixGenerators) -> IntMatrix {
    eval_free_word_capped(g, gens, u64::MAX).expect("uncapped evaluation")
}

/// As [`eval_free_word`], failing once an entry exceeds `max_bits`.
pub fn eval_free_word_capped(
    g: &FreeWord,
    gens: &MatrixGenerators,
    max_bits: u64,
) -> Result<IntMatrix> {
    gens.check_word(g)?;
    let mut acc = IntMatrix::identity(gens.dim());
    for s in g.syllables() {
        let gi = s.gen as usize;
        let factor = if s.exp > 0 {
            pow_unsigned(&gens.gens[gi], s.exp as u64)
        } else {
            pow_unsigned(&gens.inverses[gi], s.exp.unsigned_abs())
        };
        acc = acc.mul(&factor);
        check_bits(&acc, max_bits)?;
    }
    Ok(acc)
}

/// `X^{a0} C1 X^{a1} … Ck X^{ak}` with `Ci` the images of the constants.
pub fn eval_const_word(w: &ConstWord, x: &IntMatrix, gens: &MatrixGenerators) -> IntMatrix {
    eval_const_word_capped(w, x, gens, u64::MAX).expect("uncapped evaluation")
}

pub fn eval_const_word_capped(
    w: &ConstWord,
    x: &IntMatrix,
    gens: &MatrixGenerators,
    max_bits: u64,
) -> Result<IntMatrix> {
    if x.dim() != gens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "x is {}x{}, generators are {}x{}",
            x.dim(),
            x.dim(),
            gens.dim(),
            gens.dim()
        )));
    }
    let x_inv = x.inverse();
    let x_pow = |a: i64| -> IntMatrix {
        if a >= 0 {
            pow_unsigned(x, a as u64)
        } else {
            pow_unsigned(&x_inv, a.unsigned_abs())
        }
    };
    let mut acc = x_pow(w.a0());
    check_bits(&acc, max_bits)?;
    for (c, a) in w.body() {
        let cm = eval_free_word_capped(c, gens, max_bits)?;
        acc = acc.mul(&cm);
        check_bits(&acc, max_bits)?;
        if *a != 0 {
            acc = acc.mul(&x_pow(*a));
            check_bits(&acc, max_bits)?;
        }
    }
    Ok(acc)
}

pub fn height(x: &IntMatrix) -> BigInt {
    x.height()
}

/// Outcome of checking `height(g) <= (dM)^|g|` over a free-group ball.
#[derive(Debug, Clone, Serialize)]
pub struct HeightReport {
    pub radius: u32,
    pub words_checked: u64,
    /// Largest `height(g) / (dM)^|g|` seen.
    pub max_ratio: f64,
    pub max_ratio_word: String,
}

/// Checks the entry growth bound on every word of `B(radius)`.
pub fn check_height_bound(radius: u32, gens: &MatrixGenerators, cap: u64) -> Result<HeightReport> {
    let dm = BigInt::from(gens.dim()) * gens.max_entry();
    let mut grower = BallGrower::new(gens.rank(), IntMatrix::identity(gens.dim()), cap);
    for _ in 0..radius {
        grower.grow(|m, l| m.mul(gens.letter(l)))?;
    }
    let mut bound = BigInt::one();
    let mut report = HeightReport {
        radius,
        words_checked: 0,
        max_ratio: 0.0,
        max_ratio_word: String::new(),
    };
    for (depth, layer) in grower.layers().iter().enumerate() {
        if depth > 0 {
            bound *= &dm;
        }
        for (i, node) in layer.iter().enumerate() {
            let h = node.value.height();
            if h > bound {
                return Err(Error::HeightBoundViolation {
                    word: grower.word(depth, i).render(gens.names()),
                    height: h.to_string(),
                    length: depth,
                });
            }
            let ratio = ratio_f64(&h, &bound);
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.max_ratio_word = grower.word(depth, i).render(gens.names());
            }
            report.words_checked += 1;
        }
    }
    Ok(report)
}

fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    let shift = den.bits().saturating_sub(900);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}
