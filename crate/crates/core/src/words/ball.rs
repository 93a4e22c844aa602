//! Balls in the free group, in length-then-lexicographic order with
//! letters ordered `a < a^-1 < b < b^-1 < …`.

use super::{FreeWord, GeneratorSet};
use crate::error::{Error, Result};
use crate::par;

/// `|B(radius)|` in the free group of the given rank, or `None` on overflow.
pub fn ball_size(rank: usize, radius: u32) -> Option<u128> {
    let r = rank as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 1;
    for j in 1..=radius {
        sphere = if j == 1 {
            2 * r
        } else {
            sphere.checked_mul(2 * r - 1)?
        };
        total = total.checked_add(sphere)?;
    }
    Some(total)
}

/// Reduced letter sequences of a fixed length over `2 * rank` letters, in
/// lexicographic order. No storage beyond the current sequence.
#[derive(Debug, Clone)]
pub struct ReducedSequences {
    letters: u32,
    current: Vec<u32>,
    started: bool,
    done: bool,
}

impl ReducedSequences {
    pub fn new(rank: usize, length: usize) -> Self {
        ReducedSequences {
            letters: 2 * rank as u32,
            current: vec![0; length],
            started: false,
            done: rank == 0 && length > 0,
        }
    }

    fn smallest_after(prev: Option<u32>) -> u32 {
        // after a^-1 the letter a is forbidden
        match prev {
            Some(1) => 1,
            _ => 0,
        }
    }

    fn advance(&mut self) -> bool {
        let n = self.current.len();
        for i in (0..n).rev() {
            let prev = if i == 0 { None } else { Some(self.current[i - 1]) };
            let mut next = self.current[i] + 1;
            if prev.is_some_and(|p| p ^ 1 == next) {
                next += 1;
            }
            if next < self.letters {
                self.current[i] = next;
                for j in i + 1..n {
                    self.current[j] = Self::smallest_after(Some(self.current[j - 1]));
                }
                return true;
            }
        }
        false
    }

    /// Yields the next sequence as a borrowed slice.
    pub fn next_seq(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            for j in 1..self.current.len() {
                self.current[j] = Self::smallest_after(Some(self.current[j - 1]));
            }
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        Some(&self.current)
    }
}

/// Iterator over `B(radius)` in the free group.
#[derive(Debug, Clone)]
pub struct BallIter {
    rank: usize,
    radius: usize,
    length: usize,
    seqs: ReducedSequences,
}

impl Iterator for BallIter {
    type Item = FreeWord;

    fn next(&mut self) -> Option<FreeWord> {
        loop {
            if let Some(s) = self.seqs.next_seq() {
                return Some(FreeWord::from_letters(s.iter().copied()));
            }
            if self.length >= self.radius {
                return None;
            }
            self.length += 1;
            self.seqs = ReducedSequences::new(self.rank, self.length);
        }
    }
}

/// Every element of `B(radius)` exactly once, shortest first.
pub fn enumerate_ball(gens: &GeneratorSet, radius: u32, cap: u64) -> Result<BallIter> {
    let size = ball_size(gens.rank(), radius);
    match size {
        Some(s) if s <= cap as u128 => Ok(BallIter {
            rank: gens.rank(),
            radius: radius as usize,
            length: 0,
            seqs: ReducedSequences::new(gens.rank(), 0),
        }),
        _ => Err(Error::Resource(format!(
            "ball of radius {radius} in rank {} exceeds cap {cap}",
            gens.rank()
        ))),
    }
}

/// A vertex of the ball tree: its value, parent index in the previous
/// layer, and the letter appended to reach it.
#[derive(Debug, Clone)]
pub struct Node<T> {
    pub value: T,
    pub parent: u32,
    pub letter: u32,
}

/// Grows the free-group ball layer by layer, carrying a value per word
/// (a matrix image, a residue key, …) computed from its parent's value.
/// Within a layer, nodes are in lexicographic order of their words.
#[derive(Debug, Clone)]
pub struct BallGrower<T> {
    rank: usize,
    layers: Vec<Vec<Node<T>>>,
    total: u64,
    cap: u64,
}

impl<T: Send + Sync> BallGrower<T> {
    pub fn new(rank: usize, root: T, cap: u64) -> Self {
        BallGrower {
            rank,
            layers: vec![vec![Node {
                value: root,
                parent: u32::MAX,
                letter: u32::MAX,
            }]],
            total: 1,
            cap,
        }
    }

    pub fn radius(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn layers(&self) -> &[Vec<Node<T>>] {
        &self.layers
    }

    /// Builds the next sphere with `step(parent_value, letter)`.
    pub fn grow<F>(&mut self, step: F) -> Result<&[Node<T>]>
    where
        F: Fn(&T, u32) -> T + Sync + Send,
    {
        let last = self.layers.last().expect("root layer");
        let next_size = if self.layers.len() == 1 {
            2 * self.rank as u64
        } else {
            last.len() as u64 * (2 * self.rank as u64 - 1)
        };
        if self.total + next_size > self.cap {
            return Err(Error::Resource(format!(
                "ball of radius {} exceeds cap {}",
                self.layers.len(),
                self.cap
            )));
        }
        let letters = 2 * self.rank as u32;
        let children: Vec<Vec<Node<T>>> = par::map_range(last.len(), |i| {
            let node = &last[i];
            (0..letters)
                .filter(|&l| node.letter == u32::MAX || node.letter ^ 1 != l)
                .map(|l| Node {
                    value: step(&node.value, l),
                    parent: i as u32,
                    letter: l,
                })
                .collect()
        });
        let layer: Vec<Node<T>> = children.into_iter().flatten().collect();
        self.total += layer.len() as u64;
        self.layers.push(layer);
        Ok(self.layers.last().expect("just pushed"))
    }

    /// The word of node `index` in sphere `depth`.
    pub fn word(&self, depth: usize, index: usize) -> FreeWord {
        let mut letters = Vec::with_capacity(depth);
        let (mut d, mut i) = (depth, index);
        while d > 0 {
            let node = &self.layers[d][i];
            letters.push(node.letter);
            i = node.parent as usize;
            d -= 1;
        }
        letters.reverse();
        FreeWord::from_letters(letters)
    }

    pub fn into_layers(self) -> Vec<Vec<Node<T>>> {
        self.layers
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ball_counts() {
        let g = GeneratorSet::standard(2);
        assert_eq!(enumerate_ball(&g, 0, 100).unwrap().count(), 1);
        assert_eq!(enumerate_ball(&g, 1, 100).unwrap().count(), 5);
        assert_eq!(enumerate_ball(&g, 3, 100).unwrap().count(), 53);
        assert_eq!(ball_size(2, 3), Some(53));
        assert_eq!(ball_size(3, 2), Some(1 + 6 + 30));
        assert!(enumerate_ball(&g, 3, 52).is_err());
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for rank in 1..=3 {
            let g = GeneratorSet::standard(rank);
            for radius in 0..=5 {
                let n = enumerate_ball(&g, radius, u64::MAX).unwrap().count() as u128;
                assert_eq!(Some(n), ball_size(rank, radius), "rank {rank} radius {radius}");
            }
        }
    }

    #[test]
    fn order_is_length_then_lex() {
        let g = GeneratorSet::standard(2);
        let rendered: Vec<String> = enumerate_ball(&g, 2, 100)
            .unwrap()
            .take(10)
            .map(|w| w.render(&g))
            .collect();
        assert_eq!(
            rendered,
            ["", "a", "a^-1", "b", "b^-1", "a^2", "a b", "a b^-1", "a^-2", "a^-1 b"]
        );
    }

    #[test]
    fn no_duplicates_and_all_reduced_at_radius_6() {
        let g = GeneratorSet::standard(2);
        let words: Vec<FreeWord> = enumerate_ball(&g, 6, u64::MAX).unwrap().collect();
        let set: HashSet<&FreeWord> = words.iter().collect();
        assert_eq!(set.len(), words.len());
        assert_eq!(words.len() as u128, ball_size(2, 6).unwrap());
        for w in &words {
            let letters: Vec<u32> = w.letters().collect();
            assert!(letters.windows(2).all(|p| p[0] ^ 1 != p[1]));
            assert!(w.syllables().iter().all(|s| s.exp != 0));
        }
        assert!(words.windows(2).all(|p| p[0].len() <= p[1].len()));
    }

    #[test]
    fn grower_agrees_with_iterator() {
        let g = GeneratorSet::standard(2);
        let mut grower = BallGrower::new(2, (), u64::MAX);
        for _ in 0..4 {
            grower.grow(|_, _| ()).unwrap();
        }
        let from_grower: Vec<FreeWord> = (0..=4)
            .flat_map(|d| (0..grower.layers()[d].len()).map(move |i| (d, i)))
            .map(|(d, i)| grower.word(d, i))
            .collect();
        let from_iter: Vec<FreeWord> = enumerate_ball(&g, 4, u64::MAX).unwrap().collect();
        assert_eq!(from_grower, from_iter);
    }

    #[test]
    fn grower_respects_cap() {
        let mut grower = BallGrower::new(2, (), 10);
        grower.grow(|_, _| ()).unwrap();
        assert!(matches!(grower.grow(|_, _| ()), Err(Error::Resource(_))));
    }
}
