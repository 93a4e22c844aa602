//! Free-group words and word equations with one variable.
//!
//! A [`FreeWord`] is a freely reduced word over the generators of a free
//! group, stored as syllables `g^e` so that long powers stay cheap. A
//! [`ConstWord`] is an equation `x^{a0} c1 x^{a1} ... ck x^{ak}` in the
//! free product of the group with the infinite cyclic group on `x`.

mod ball;
mod parse;

pub use ball::{ball_size, enumerate_ball, BallGrower, BallIter, Node, ReducedSequences};
pub use parse::{parse_const_word, parse_free_word, parse_mixed};

use std::fmt;

use crate::error::{Error, Result};

/// Generator index used for the variable `x` inside mixed syllable lists.
pub const VAR: u32 = u32::MAX;

/// Names of the free generators. Inverses are negative exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidGenerators("rank must be at least 1".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(Error::InvalidGenerators(format!("{n:?} is not an identifier")));
            }
            if n == "x" {
                return Err(Error::InvalidGenerators("\"x\" is reserved for the variable".into()));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidGenerators(format!("duplicate name {n:?}")));
            }
        }
        Ok(GeneratorSet { names })
    }

    /// `a, b, c, …` skipping `x`; ranks above 25 continue as `g25, g26, …`.
    pub fn standard(rank: usize) -> Self {
        assert!(rank >= 1, "rank must be at least 1");
        let names = (0..rank)
            .map(|i| {
                let letters: Vec<char> = ('a'..='z').filter(|&c| c != 'x').collect();
                match letters.get(i) {
                    Some(c) => c.to_string(),
                    None => format!("g{i}"),
                }
            })
            .collect();
        GeneratorSet { names }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, gen: u32) -> &str {
        if gen == VAR {
            "x"
        } else {
            &self.names[gen as usize]
        }
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

/// One syllable `gen^exp` of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub gen: u32,
    pub exp: i64,
}

impl From<(u32, i64)> for Syllable {
    fn from((gen, exp): (u32, i64)) -> Self {
        Syllable { gen, exp }
    }
}

/// Letters encode a generator and a sign as `2 * gen + (exp < 0)`, so the
/// natural order is `a < a^-1 < b < b^-1 < …` and `l ^ 1` is the inverse.
pub fn letter_syllable(letter: u32) -> Syllable {
    Syllable {
        gen: letter >> 1,
        exp: if letter & 1 == 0 { 1 } else { -1 },
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord {
    syllables: Vec<Syllable>,
}

/// Freely reduces a raw syllable list.
pub fn free_reduce<I>(raw: I) -> FreeWord
where
    I: IntoIterator,
    I::Item: Into<Syllable>,
{
    let mut out = FreeWord::identity();
    for s in raw {
        out.push(s.into());
    }
    out
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord { syllables: Vec::new() }
    }

    pub fn generator(gen: u32) -> Self {
        FreeWord {
            syllables: vec![Syllable { gen, exp: 1 }],
        }
    }

    pub fn from_letters(letters: impl IntoIterator<Item = u32>) -> Self {
        free_reduce(letters.into_iter().map(letter_syllable))
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length: the sum of exponent magnitudes.
    pub fn len(&self) -> u64 {
        self.syllables.iter().map(|s| s.exp.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// Appends a syllable, cancelling against the tail.
    pub fn push(&mut self, s: Syllable) {
        if s.exp == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.gen == s.gen => {
                last.exp = last.exp.checked_add(s.exp).expect("exponent overflow");
                if last.exp == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push(s),
        }
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable { gen: s.gen, exp: -s.exp })
                .collect(),
        }
    }

    /// Appends `other` in place.
    pub fn extend(&mut self, other: &FreeWord) {
        for &s in &other.syllables {
            self.push(s);
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..k.unsigned_abs() {
            out.extend(&base);
        }
        out
    }

    /// Expands into letters (see [`letter_syllable`]).
    pub fn letters(&self) -> impl Iterator<Item = u32> + '_ {
        self.syllables.iter().flat_map(|s| {
            let l = 2 * s.gen + u32::from(s.exp < 0);
            std::iter::repeat_n(l, s.exp.unsigned_abs() as usize)
        })
    }

    pub fn contains_var(&self) -> bool {
        self.syllables.iter().any(|s| s.gen == VAR)
    }

    pub fn max_gen(&self) -> Option<u32> {
        self.syllables.iter().map(|s| s.gen).filter(|&g| g != VAR).max()
    }

    pub fn display<'a>(&'a self, gens: &'a GeneratorSet) -> impl fmt::Display + 'a {
        WordDisplay { word: self, gens }
    }

    pub fn render(&self, gens: &GeneratorSet) -> String {
        self.display(gens).to_string()
    }
}

impl FromIterator<Syllable> for FreeWord {
    fn from_iter<T: IntoIterator<Item = Syllable>>(iter: T) -> Self {
        free_reduce(iter)
    }
}

struct WordDisplay<'a> {
    word: &'a FreeWord,
    gens: &'a GeneratorSet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.word.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write_term(f, self.gens.name(s.gen), s.exp)?;
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, name: &str, exp: i64) -> fmt::Result {
    if exp == 1 {
        f.write_str(name)
    } else {
        write!(f, "{name}^{exp}")
    }
}

/// A word with constants in canonical form `x^{a0} c1 x^{a1} … ck x^{ak}`.
///
/// Every constant is a nontrivial reduced word, interior exponents
/// `a1 … a(k-1)` are nonzero, and the word as a whole is nontrivial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstWord {
    a0: i64,
    body: Vec<(FreeWord, i64)>,
}

impl ConstWord {
    pub fn new(a0: i64, body: Vec<(FreeWord, i64)>) -> Result<Self> {
        if body.is_empty() && a0 == 0 {
            return Err(Error::TrivialWord);
        }
        let k = body.len();
        for (i, (c, a)) in body.iter().enumerate() {
            if c.is_identity() {
                return Err(Error::InvalidGenerators(format!(
                    "constant c{} is trivial",
                    i + 1
                )));
            }
            if c.contains_var() {
                return Err(Error::VariableInConstant);
            }
            if *a == 0 && i + 1 < k {
                return Err(Error::InvalidGenerators(format!(
                    "interior exponent a{} is zero",
                    i + 1
                )));
            }
        }
        Ok(ConstWord { a0, body })
    }

    /// Canonical form of a reduced mixed word (constants interleaved with
    /// [`VAR`] syllables). Fails only on the identity.
    pub fn from_mixed(mixed: &FreeWord) -> Result<Self> {
        if mixed.is_identity() {
            return Err(Error::TrivialWord);
        }
        let mut a0 = 0;
        let mut body: Vec<(FreeWord, i64)> = Vec::new();
        let mut current = FreeWord::identity();
        for &s in mixed.syllables() {
            if s.gen == VAR {
                if current.is_identity() {
                    // only possible before the first constant
                    a0 += s.exp;
                } else {
                    body.push((std::mem::take(&mut current), s.exp));
                }
            } else {
                current.push(s);
            }
        }
        if !current.is_identity() {
            body.push((current, 0));
        }
        ConstWord::new(a0, body)
    }

    /// The word as a single syllable list with `x` encoded as [`VAR`].
    pub fn to_mixed(&self) -> FreeWord {
        let mut out = FreeWord::identity();
        out.push(Syllable { gen: VAR, exp: self.a0 });
        for (c, a) in &self.body {
            out.extend(c);
            out.push(Syllable { gen: VAR, exp: *a });
        }
        out
    }

    pub fn a0(&self) -> i64 {
        self.a0
    }

    pub fn body(&self) -> &[(FreeWord, i64)] {
        &self.body
    }

    /// The constants `c1 … ck`.
    pub fn constants(&self) -> impl Iterator<Item = &FreeWord> {
        self.body.iter().map(|(c, _)| c)
    }

    /// `|w|` over the generators together with `x`.
    pub fn length(&self) -> u64 {
        self.a0.unsigned_abs()
            + self
                .body
                .iter()
                .map(|(c, a)| c.len() + a.unsigned_abs())
                .sum::<u64>()
    }

    pub fn inverse(&self) -> ConstWord {
        ConstWord::from_mixed(&self.to_mixed().inverse()).expect("inverse of a nontrivial word")
    }

    /// `u w u^-1` in canonical form.
    pub fn conjugate_by(&self, u: &FreeWord) -> ConstWord {
        let mixed = u.mul(&self.to_mixed()).mul(&u.inverse());
        ConstWord::from_mixed(&mixed).expect("conjugate of a nontrivial word")
    }

    /// Sum of the `x`-exponents.
    pub fn exponent_sum(&self) -> i64 {
        self.a0 + self.body.iter().map(|(_, a)| a).sum::<i64>()
    }

    pub fn max_gen(&self) -> Option<u32> {
        self.constants().filter_map(FreeWord::max_gen).max()
    }

    pub fn display<'a>(&'a self, gens: &'a GeneratorSet) -> impl fmt::Display + 'a {
        ConstDisplay { word: self, gens }
    }

    pub fn render(&self, gens: &GeneratorSet) -> String {
        self.display(gens).to_string()
    }
}

struct ConstDisplay<'a> {
    word: &'a ConstWord,
    gens: &'a GeneratorSet,
}

impl fmt::Display for ConstDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.to_mixed().display(self.gens).fmt(f)
    }
}

/// The word map `w(g)`: replace `x` by `g` and freely reduce.
pub fn substitute(w: &ConstWord, g: &FreeWord) -> FreeWord {
    let g_inv = g.inverse();
    let mut out = FreeWord::identity();
    let push_power = |out: &mut FreeWord, a: i64| {
        let base = if a < 0 { &g_inv } else { g };
        for _ in 0..a.unsigned_abs() {
            out.extend(base);
        }
    };
    push_power(&mut out, w.a0);
    for (c, a) in &w.body {
        out.extend(c);
        push_power(&mut out, *a);
    }
    out
}

/// Length of a canonical equation; see [`ConstWord::length`].
pub fn const_word_length(w: &ConstWord) -> u64 {
    w.length()
}
