//! Random words for experiments. All draws go through [`SeededRng`].

use crate::rng::SeededRng;
use crate::words::{letter_syllable, ConstWord, FreeWord, Syllable, VAR};

/// Uniform reduced letter sequence of exactly `length` letters over
/// `2 * rank` letters: the first letter uniform, each later one uniform
/// among the `2 * rank - 1` letters that do not cancel it.
pub fn random_letters(rng: &mut SeededRng, rank: usize, length: usize) -> Vec<u32> {
    let letters = 2 * rank as u64;
    let mut out: Vec<u32> = Vec::with_capacity(length);
    for i in 0..length {
        let l = if i == 0 {
            rng.below(letters) as u32
        } else {
            let forbidden = out[i - 1] ^ 1;
            let r = rng.below(letters - 1) as u32;
            if r >= forbidden {
                r + 1
            } else {
                r
            }
        };
        out.push(l);
    }
    out
}

/// Uniform reduced free word of exactly `length` letters.
pub fn random_free_word(rng: &mut SeededRng, rank: usize, length: usize) -> FreeWord {
    FreeWord::from_letters(random_letters(rng, rank, length))
}

/// Letters over `rank + 1` generators with the last one read as `x`.
pub(crate) fn to_mixed(letters: &[u32], rank: usize) -> FreeWord {
    letters
        .iter()
        .map(|&l| {
            let s = letter_syllable(l);
            if s.gen as usize == rank {
                Syllable { gen: VAR, exp: s.exp }
            } else {
                s
            }
        })
        .collect()
}

/// Uniform reduced word of exactly `length` letters over the generators and
/// `x` (which plays the role of generator `rank`), in canonical form.
pub fn random_const_word(rng: &mut SeededRng, rank: usize, length: usize) -> ConstWord {
    assert!(length >= 1, "equations have positive length");
    let letters = random_letters(rng, rank + 1, length);
    ConstWord::from_mixed(&to_mixed(&letters, rank)).expect("reduced nonempty word")
}

/// A word with `w(e) = e`: draws `u` of length `length / 2` containing `x`
/// and returns `u · u(e)^-1`, freely reduced. Its length is at most
/// `length`. Redraws until the result is nontrivial.
pub fn random_balanced_word(rng: &mut SeededRng, rank: usize, length: usize) -> ConstWord {
    let half = (length / 2).max(1);
    loop {
        let letters = random_letters(rng, rank + 1, half);
        let u = to_mixed(&letters, rank);
        if !u.contains_var() {
            continue;
        }
        let constants: FreeWord = u.syllables().iter().copied().filter(|s| s.gen != VAR).collect();
        if let Ok(w) = ConstWord::from_mixed(&u.mul(&constants.inverse())) {
            return w;
        }
    }
}

/// A word vanishing on every element of the ball `B(r)`: leaves `x g^-1`
/// for `g` in the ball, combined pairwise by commutators `[u, c v c^-1]`
/// with fresh constants `c` until one word remains. Its length grows like
/// `|B(r)|^2`, so its complexity, at least `r + 1`, is logarithmic in it.
pub fn ball_vanishing_word(rank: usize, r: u32) -> ConstWord {
    let gens = crate::words::GeneratorSet::standard(rank);
    let ball = crate::words::enumerate_ball(&gens, r, u64::MAX).expect("small ball");
    let x = FreeWord::from_iter([Syllable { gen: VAR, exp: 1 }]);
    let mut level: Vec<FreeWord> = ball.map(|g| x.mul(&g.inverse())).collect();
    let mut k = 0i64;
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            let [u, v] = pair else {
                next.push(pair[0].clone());
                continue;
            };
            loop {
                k += 1;
                let c = FreeWord::from_iter([Syllable { gen: 0, exp: k }, Syllable { gen: 1, exp: 1 }]);
                let cv = c.mul(v).mul(&c.inverse());
                let comm = u.mul(&cv).mul(&u.inverse()).mul(&cv.inverse());
                if !comm.is_identity() {
                    next.push(comm);
                    break;
                }
            }
        }
        level = next;
    }
    ConstWord::from_mixed(&level[0]).expect("commutators of non-commuting words are nontrivial")
}
