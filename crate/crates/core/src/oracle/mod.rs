//! Brute-force ground truth: exact complexity by enumeration of free-group
//! balls, the exact growth function for short words, and exhaustive search
//! for mixed identities of small finite groups.

mod finite;

pub use finite::{load_group, mixed_identity_search, FiniteGroup, MixedIdentityReport, Token};

use std::fmt;

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::sample::to_mixed;
use crate::words::{ball_size, substitute, ConstWord, FreeWord, ReducedSequences};

/// A complexity value, or a lower bound when the search radius ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chi {
    Exact(u64),
    AtLeast(u64),
}

impl Chi {
    pub fn is_resolved(self) -> bool {
        matches!(self, Chi::Exact(_))
    }

    /// The exact value or the lower bound.
    pub fn value(self) -> u64 {
        match self {
            Chi::Exact(v) | Chi::AtLeast(v) => v,
        }
    }

    /// Maximum of two values; unresolved if either is.
    pub fn max(self, other: Chi) -> Chi {
        let v = self.value().max(other.value());
        if self.is_resolved() && other.is_resolved() {
            Chi::Exact(v)
        } else {
            Chi::AtLeast(v)
        }
    }
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chi::Exact(v) => write!(f, "{v}"),
            Chi::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

impl Serialize for Chi {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Chi", 2)?;
        st.serialize_field("value", &self.value())?;
        st.serialize_field("resolved", &self.is_resolved())?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRecord {
    pub chi: Chi,
    /// A shortest `g` with `w(g) != e`, first in length-lexicographic order.
    #[serde(skip)]
    pub witness: Option<FreeWord>,
    pub radius: u32,
    /// Free-group elements examined.
    pub examined: u64,
}

/// Sequences handed to one parallel batch.
const BATCH: usize = 1 << 14;

/// Smallest length of `g` in the free group of the given rank with
/// `w(g) != e`, searching the ball of radius `r_max` shortest first.
pub fn exact_complexity(w: &ConstWord, rank: usize, r_max: u32, cap: u64) -> Result<ComplexityRecord> {
    if w.max_gen().is_some_and(|g| g as usize >= rank) {
        return Err(Error::InvalidGenerators(format!("word needs more than {rank} generators")));
    }
    match ball_size(rank, r_max) {
        Some(s) if s <= cap as u128 => {}
        _ => return Err(Error::Resource(format!("ball of radius {r_max} exceeds cap {cap}"))),
    }
    let mut examined = 0u64;
    for length in 0..=r_max {
        let mut seqs = ReducedSequences::new(rank, length as usize);
        loop {
            let mut batch: Vec<Vec<u32>> = Vec::with_capacity(BATCH);
            while batch.len() < BATCH {
                match seqs.next_seq() {
                    Some(s) => batch.push(s.to_vec()),
                    None => break,
                }
            }
            if batch.is_empty() {
                break;
            }
            let hit = par::find_map_first(&batch, |s| {
                let g = FreeWord::from_letters(s.iter().copied());
                (!substitute(w, &g).is_identity()).then_some(g)
            });
            if let Some(g) = hit {
                let pos = batch
                    .iter()
                    .position(|s| FreeWord::from_letters(s.iter().copied()) == g)
                    .expect("hit comes from the batch");
                return Ok(ComplexityRecord {
                    chi: Chi::Exact(length as u64),
                    witness: Some(g),
                    radius: r_max,
                    examined: examined + pos as u64 + 1,
                });
            }
            examined += batch.len() as u64;
        }
    }
    Ok(ComplexityRecord {
        chi: Chi::AtLeast(r_max as u64 + 1),
        witness: None,
        radius: r_max,
        examined,
    })
}

/// One value of the growth function.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEntry {
    pub n: u64,
    /// Words of length exactly `n`.
    pub words: u64,
    /// Maximum complexity over all words of length at most `n`.
    pub max_chi: Chi,
    /// Words of length exactly `n` whose complexity exceeded the radius.
    pub unresolved: u64,
}

/// Exhaustive growth function for words over the free group of the given
/// rank: every reduced word in the generators and `x` of length `1..=n_max`.
pub fn exact_growth(rank: usize, n_max: u32, r_max: u32, cap: u64) -> Result<Vec<GrowthEntry>> {
    let mut out = Vec::with_capacity(n_max as usize);
    let mut running = Chi::Exact(0);
    for n in 1..=n_max {
        let words = words_of_length(rank, n as usize, cap)?;
        let chis = par::map(&words, |w| exact_complexity(w, rank, r_max, u64::MAX).map(|r| r.chi));
        let mut unresolved = 0;
        for chi in chis {
            let chi = chi?;
            unresolved += u64::from(!chi.is_resolved());
            running = running.max(chi);
        }
        out.push(GrowthEntry {
            n: n as u64,
            words: words.len() as u64,
            max_chi: running,
            unresolved,
        });
    }
    Ok(out)
}

/// Every canonical word of exactly `length` letters over `rank` generators
/// and `x`, in lexicographic order of letter sequences.
pub fn words_of_length(rank: usize, length: usize, cap: u64) -> Result<Vec<ConstWord>> {
    match ball_size(rank + 1, length as u32) {
        Some(s) if s <= cap as u128 => {}
        _ => return Err(Error::Resource(format!("words of length {length} exceed cap {cap}"))),
    }
    let mut seqs = ReducedSequences::new(rank + 1, length);
    let mut out = Vec::new();
    while let Some(s) = seqs.next_seq() {
        out.push(ConstWord::from_mixed(&to_mixed(s, rank)).expect("reduced nonempty word"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::MatrixGenerators;
    use crate::words::{parse_const_word, GeneratorSet};
    use proptest::prelude::*;

    fn word(text: &str) -> ConstWord {
        parse_const_word(text, MatrixGenerators::sanov().names()).unwrap()
    }

    // [[x,a],[x,b]] with [u,v] = u v u^-1 v^-1
    const NESTED: &str = "x a x^-1 a^-1 x b x^-1 b^-1 a x a^-1 x^-1 b x b^-1 x^-1";

    fn render(g: &FreeWord) -> String {
        g.render(&GeneratorSet::standard(2))
    }

    #[test]
    fn complexity_examples() {
        let r = exact_complexity(&word("x"), 2, 6, u64::MAX).unwrap();
        assert_eq!(r.chi, Chi::Exact(1));
        assert_eq!(render(r.witness.as_ref().unwrap()), "a");
        let r = exact_complexity(&word("x a x^-1 a^-1"), 2, 6, u64::MAX).unwrap();
        assert_eq!(r.chi, Chi::Exact(1));
        assert_eq!(render(r.witness.as_ref().unwrap()), "b");
        let r = exact_complexity(&word(NESTED), 2, 6, u64::MAX).unwrap();
        assert_eq!(r.chi, Chi::Exact(2));
        assert_eq!(exact_complexity(&word("x a"), 2, 6, u64::MAX).unwrap().chi, Chi::Exact(0));
    }

    #[test]
    fn unresolved_is_a_value() {
        let r = exact_complexity(&word(NESTED), 2, 1, u64::MAX).unwrap();
        assert_eq!(r.chi, Chi::AtLeast(2));
        assert!(r.witness.is_none());
        assert_eq!(r.chi.to_string(), ">=2");
        assert_eq!(serde_json::to_string(&r.chi).unwrap(), r#"{"value":2,"resolved":false}"#);
        assert!(matches!(exact_complexity(&word("x"), 2, 40, 1 << 20), Err(Error::Resource(_))));
    }

    #[test]
    fn growth_starts_at_one_and_never_decreases() {
        let g = exact_growth(2, 4, 6, u64::MAX).unwrap();
        assert_eq!(g[0].max_chi, Chi::Exact(1));
        assert_eq!(g[0].words, 6);
        assert_eq!(g[1].words, 30);
        for pair in g.windows(2) {
            assert!(pair[0].max_chi.value() <= pair[1].max_chi.value());
        }
        assert!(g.iter().all(|e| e.unresolved == 0));
    }

    #[test]
    fn words_of_length_cover_every_word() {
        for len in 1..=4 {
            let ws = words_of_length(2, len, u64::MAX).unwrap();
            assert_eq!(ws.len() as u64, 6 * 5u64.pow(len as u32 - 1));
            assert!(ws.iter().all(|w| w.length() == len as u64));
            let distinct: std::collections::BTreeSet<String> =
                ws.iter().map(|w| w.render(&GeneratorSet::standard(2))).collect();
            assert_eq!(distinct.len(), ws.len());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conjugation_invariance(seed in any::<u64>(), u_len in 0usize..4) {
            let mut rng = crate::rng::SeededRng::new(seed);
            let w = crate::sample::random_balanced_word(&mut rng, 2, 8);
            let u = crate::sample::random_free_word(&mut rng, 2, u_len);
            let a = exact_complexity(&w, 2, 5, u64::MAX).unwrap().chi;
            let b = exact_complexity(&w.conjugate_by(&u), 2, 5, u64::MAX).unwrap().chi;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn witness_is_valid_and_minimal(seed in any::<u64>()) {
            let mut rng = crate::rng::SeededRng::new(seed);
            let w = crate::sample::random_const_word(&mut rng, 2, 6);
            let r = exact_complexity(&w, 2, 6, u64::MAX).unwrap();
            if let Some(g) = &r.witness {
                prop_assert!(!substitute(&w, g).is_identity());
                let shorter = crate::words::enumerate_ball(&GeneratorSet::standard(2), g.len().saturating_sub(1) as u32, u64::MAX).unwrap();
                for h in shorter.take_while(|h| h.len() < g.len()) {
                    prop_assert!(substitute(&w, &h).is_identity());
                }
            }
        }
    }

}
