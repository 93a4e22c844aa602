//! Breadth-first exploration of Cayley graphs of `SL_d(p)`.
//!
//! Elements are packed into `u128` keys (`d^2` residues of `ceil(log2 p)`
//! bits each) and interned to dense ids in BFS order. Children of a layer
//! are produced in parent order and, for each parent, in label order
//! `a, a^-1, b, b^-1, …`; the first occurrence wins. Parent links therefore
//! spell geodesic words with deterministic tie-breaking, and the parallel
//! build produces exactly the sequential result.

use std::ops::Range;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intmat::MatrixGenerators;
use crate::modp::{sl_order, ModMatrix, ReducedGenerators};
use crate::par;
use crate::words::{BallGrower, FreeWord};

/// Default element cap for explorations: 2^27.
pub const DEFAULT_CAP: u64 = 1 << 27;

const MAX_ENTRIES: usize = 16;

/// Packs residues of a fixed `(d, p)` into a `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packer {
    dim: usize,
    p: u64,
    bits: u32,
}

type Entries = [u64; MAX_ENTRIES];

impl Packer {
    pub fn new(dim: usize, p: u64) -> Result<Self> {
        let bits = 64 - (p - 1).leading_zeros();
        if dim * dim > MAX_ENTRIES || (dim * dim) as u32 * bits > 128 {
            return Err(Error::Resource(format!(
                "SL_{dim}({p}) elements do not fit a 128-bit key"
            )));
        }
        Ok(Packer { dim, p, bits })
    }

    pub fn encode(&self, entries: &[u64]) -> u128 {
        entries
            .iter()
            .fold(0u128, |acc, &e| (acc << self.bits) | e as u128)
    }

    fn decode_into(&self, mut key: u128, out: &mut Entries) {
        let n = self.dim * self.dim;
        let mask = (1u128 << self.bits) - 1;
        for i in (0..n).rev() {
            out[i] = (key & mask) as u64;
            key >>= self.bits;
        }
    }

    pub fn decode(&self, key: u128) -> ModMatrix {
        let mut buf = [0; MAX_ENTRIES];
        self.decode_into(key, &mut buf);
        ModMatrix::from_raw(self.dim, self.p, buf[..self.dim * self.dim].to_vec())
    }

    fn load(&self, m: &ModMatrix) -> Entries {
        let mut buf = [0; MAX_ENTRIES];
        buf[..m.entries().len()].copy_from_slice(m.entries());
        buf
    }

    /// `key * rhs`.
    fn mul(&self, key: u128, rhs: &Entries) -> u128 {
        let d = self.dim;
        let mut lhs = [0; MAX_ENTRIES];
        self.decode_into(key, &mut lhs);
        let mut out = 0u128;
        for i in 0..d {
            for j in 0..d {
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc += lhs[i * d + k] as u128 * rhs[k * d + j] as u128;
                }
                out = (out << self.bits) | (acc % self.p as u128);
            }
        }
        out
    }

    fn mul_keys(&self, a: u128, b: u128) -> u128 {
        let mut rhs = [0; MAX_ENTRIES];
        self.decode_into(b, &mut rhs);
        self.mul(a, &rhs)
    }
}

/// A BFS ball around the identity of `SL_d(p)`.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    packer: Packer,
    keys: Vec<u128>,
    index: FxHashMap<u128, u32>,
    parent: Vec<u32>,
    label: Vec<u8>,
    /// `layer_starts[r]` is the first id at depth `r`; one past the end is
    /// appended as the last entry.
    layer_starts: Vec<usize>,
    partial: bool,
    closed: bool,
}

impl CayleyBall {
    pub fn modulus(&self) -> u64 {
        self.packer.p
    }

    pub fn dim(&self) -> usize {
        self.packer.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// True when exploration stopped at the cap rather than at closure.
    pub fn is_partial(&self) -> bool {
        self.partial
    }

    /// True when every neighbour of every element has been seen.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn element(&self, id: usize) -> ModMatrix {
        self.packer.decode(self.keys[id])
    }

    pub fn key(&self, id: usize) -> u128 {
        self.keys[id]
    }

    pub fn id_of(&self, x: &ModMatrix) -> Option<usize> {
        if x.dim() != self.dim() || x.modulus() != self.modulus() {
            return None;
        }
        self.index
            .get(&self.packer.encode(x.entries()))
            .map(|&i| i as usize)
    }

    /// Number of complete or partial layers, including depth 0.
    pub fn layers(&self) -> usize {
        self.layer_starts.len() - 1
    }

    pub fn layer(&self, depth: usize) -> Range<usize> {
        self.layer_starts[depth]..self.layer_starts[depth + 1]
    }

    pub fn layer_sizes(&self) -> Vec<u64> {
        self.layer_starts.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
    }

    pub fn depth(&self, id: usize) -> usize {
        self.layer_starts.partition_point(|&s| s <= id) - 1
    }

    /// Geodesic word for element `id`, read off the parent links.
    pub fn word(&self, id: usize) -> FreeWord {
        let mut letters = Vec::new();
        let mut cur = id;
        while cur != 0 {
            letters.push(self.label[cur] as u32);
            cur = self.parent[cur] as usize;
        }
        letters.reverse();
        FreeWord::from_letters(letters)
    }
}

/// Incremental BFS over a Cayley graph.
#[derive(Debug, Clone)]
pub struct Explorer {
    ball: CayleyBall,
    generators: Vec<Entries>,
}

impl Explorer {
    pub fn new(gens: &ReducedGenerators) -> Result<Self> {
        let (d, p) = (gens.dim(), gens.modulus());
        let packer = Packer::new(d, p)?;
        let symmetric = gens.symmetric();
        if symmetric.len() > u8::MAX as usize {
            return Err(Error::InvalidGenerators("too many generators".into()));
        }
        let id_key = packer.encode(ModMatrix::identity(d, p).entries());
        let mut index = FxHashMap::default();
        index.insert(id_key, 0);
        Ok(Explorer {
            generators: symmetric.iter().map(|m| packer.load(m)).collect(),
            ball: CayleyBall {
                packer,
                keys: vec![id_key],
                index,
                parent: vec![u32::MAX],
                label: vec![u8::MAX],
                layer_starts: vec![0, 1],
                partial: false,
                closed: false,
            },
        })
    }

    pub fn ball(&self) -> &CayleyBall {
        &self.ball
    }

    pub fn into_ball(self) -> CayleyBall {
        self.ball
    }

    /// Adds the next layer and returns its id range, or `None` once the
    /// group is closed. Stops early, marking the ball partial, when `cap`
    /// elements are reached.
    pub fn expand(&mut self, cap: u64) -> Option<Range<usize>> {
        let ball = &mut self.ball;
        if ball.closed || ball.partial {
            return None;
        }
        let frontier = ball.layer(ball.layers() - 1);
        let keys = &ball.keys[frontier.clone()];
        let packer = ball.packer;
        let gens = &self.generators;
        let children: Vec<Vec<u128>> = par::map(keys, |&k| gens.iter().map(|g| packer.mul(k, g)).collect());
        let start = ball.keys.len();
        'outer: for (offset, kids) in children.into_iter().enumerate() {
            for (label, key) in kids.into_iter().enumerate() {
                if ball.index.contains_key(&key) {
                    continue;
                }
                if ball.keys.len() as u64 >= cap {
                    ball.partial = true;
                    break 'outer;
                }
                ball.index.insert(key, ball.keys.len() as u32);
                ball.keys.push(key);
                ball.parent.push((frontier.start + offset) as u32);
                ball.label.push(label as u8);
            }
        }
        let end = ball.keys.len();
        if end == start {
            if !ball.partial {
                ball.closed = true;
            }
            return None;
        }
        ball.layer_starts.push(end);
        Some(start..end)
    }
}

/// Full BFS from the identity over the symmetric generating set.
/// If `cap` is reached the returned ball is flagged partial.
pub fn explore(gens: &[ModMatrix], cap: u64) -> Result<CayleyBall> {
    if gens.is_empty() {
        return Err(Error::InvalidGenerators("no generators".into()));
    }
    explore_until(&ReducedGenerators::from_matrices(gens.to_vec()), cap, u64::MAX)
}

/// BFS that also stops, without being flagged partial, once `stop_at`
/// elements have been found.
pub fn explore_until(gens: &ReducedGenerators, cap: u64, stop_at: u64) -> Result<CayleyBall> {
    let mut ex = Explorer::new(gens)?;
    while (ex.ball.len() as u64) < stop_at && ex.expand(cap).is_some() {}
    Ok(ex.into_ball())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiameterRecord {
    pub p: u64,
    pub diameter: u64,
    pub ball_sizes: Vec<u64>,
}

/// Exact diameter of a fully explored group.
pub fn diameter(ball: &CayleyBall) -> Result<DiameterRecord> {
    if ball.is_partial() || !ball.is_closed() {
        return Err(Error::PartialBall);
    }
    Ok(DiameterRecord {
        p: ball.modulus(),
        diameter: (ball.layers() - 1) as u64,
        ball_sizes: ball.layer_sizes(),
    })
}

/// A shortest word over the generators whose image is `target`.
pub fn lift(ball: &CayleyBall, target: &ModMatrix) -> Result<FreeWord> {
    ball.id_of(target)
        .map(|id| ball.word(id))
        .ok_or(Error::TargetNotFound)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InjectivityRecord {
    pub p: u64,
    pub radius: u64,
    /// True when no collision was found up to `radius` (the search limit).
    pub capped: bool,
}

/// Largest `r` such that reduction mod `p` is injective on the free-group
/// ball `B(r)`, found by hashing residue images of the ball in length order
/// until the first collision.
pub fn injectivity_radius(p: u64, gens: &MatrixGenerators, max_radius: u32, cap: u64) -> Result<InjectivityRecord> {
    let reduced = ReducedGenerators::new(gens, p)?;
    let packer = Packer::new(reduced.dim(), p)?;
    let letters: Vec<Entries> = reduced.symmetric().iter().map(|m| packer.load(m)).collect();
    let root = packer.encode(ModMatrix::identity(reduced.dim(), p).entries());
    let mut seen: FxHashSet<u128> = FxHashSet::default();
    seen.insert(root);
    let mut grower = BallGrower::new(gens.rank(), root, cap);
    for r in 1..=max_radius {
        let layer = grower.grow(|&k, l| packer.mul(k, &letters[l as usize]))?;
        for node in layer {
            if !seen.insert(node.value) {
                return Ok(InjectivityRecord {
                    p,
                    radius: (r - 1) as u64,
                    capped: false,
                });
            }
        }
    }
    Ok(InjectivityRecord {
        p,
        radius: max_radius as u64,
        capped: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductGrowth {
    pub radius: usize,
    pub a_size: u64,
    pub aaa_size: u64,
    /// `log|AAA| / log|A|`; 1 when `|A| = 1`.
    pub exponent: f64,
    /// `AAA` is the whole group.
    pub covers_group: bool,
}

/// Triple-product growth of `A = B(r)`.
pub fn product_growth(ball: &CayleyBall, r: usize, cap: u64) -> Result<ProductGrowth> {
    if r >= ball.layers() || (ball.is_partial() && r + 1 >= ball.layers()) {
        return Err(Error::PartialBall);
    }
    let a: Vec<u128> = ball.keys[..ball.layer(r).end].to_vec();
    let packer = ball.packer;
    let times_a = |set: &[u128]| -> Result<Vec<u128>> {
        let rows: Vec<Vec<u128>> = par::map(set, |&x| a.iter().map(|&y| packer.mul_keys(x, y)).collect());
        let mut out: FxHashSet<u128> = FxHashSet::default();
        for row in rows {
            out.extend(row);
            if out.len() as u64 > cap {
                return Err(Error::Resource(format!("product set exceeds cap {cap}")));
            }
        }
        let mut v: Vec<u128> = out.into_iter().collect();
        v.sort_unstable();
        Ok(v)
    };
    let aa = times_a(&a)?;
    let aaa = times_a(&aa)?;
    let (na, naaa) = (a.len() as u64, aaa.len() as u64);
    let order = sl_order(ball.dim(), ball.modulus());
    Ok(ProductGrowth {
        radius: r,
        a_size: na,
        aaa_size: naaa,
        exponent: if na > 1 {
            (naaa as f64).ln() / (na as f64).ln()
        } else {
            1.0
        },
        covers_group: order == Some(naaa as u128),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::eval_free_word;
    use crate::modp::{eval_free_word_mod, reduce_mod};
    use crate::words::enumerate_ball;
    use std::collections::HashSet;

    fn sanov_mod(p: u64) -> ReducedGenerators {
        ReducedGenerators::new(&MatrixGenerators::sanov(), p).unwrap()
    }

    #[test]
    fn explore_examples() {
        let b3 = explore(&sanov_mod(3).gens, DEFAULT_CAP).unwrap();
        assert_eq!(b3.len(), 24);
        assert!(b3.is_closed());
        let u = ModMatrix::new(2, 5, vec![1, 1, 0, 1]).unwrap();
        assert_eq!(explore(&[u], DEFAULT_CAP).unwrap().len(), 5);
        let id = explore(&[ModMatrix::identity(2, 5)], DEFAULT_CAP).unwrap();
        assert_eq!(id.len(), 1);
        assert_eq!(diameter(&id).unwrap().diameter, 0);
    }

    #[test]
    fn partial_exploration_is_flagged() {
        let b = explore(&sanov_mod(7).gens, 50).unwrap();
        assert!(b.is_partial());
        assert_eq!(b.len(), 50);
        assert!(matches!(diameter(&b), Err(Error::PartialBall)));
    }

    #[test]
    fn diameter_of_sl2_3_fixture() {
        let rec = diameter(&explore(&sanov_mod(3).gens, DEFAULT_CAP).unwrap()).unwrap();
        assert_eq!(rec.ball_sizes.iter().sum::<u64>(), 24);
        // frozen from the BFS oracle below
        assert_eq!(rec.diameter, brute_force_diameter(3));
    }

    /// Diameter by repeated multiplication of explicit element sets.
    fn brute_force_diameter(p: u64) -> u64 {
        let gens = sanov_mod(p).symmetric();
        let mut ball: HashSet<ModMatrix> = HashSet::from([ModMatrix::identity(2, p)]);
        let mut r = 0;
        loop {
            let next: HashSet<ModMatrix> = ball
                .iter()
                .flat_map(|x| gens.iter().map(move |g| x.mul(g)))
                .chain(ball.iter().cloned())
                .collect();
            if next.len() == ball.len() {
                return r;
            }
            ball = next;
            r += 1;
        }
    }

    #[test]
    fn diameters_match_brute_force() {
        for p in [3u64, 5, 7] {
            let rec = diameter(&explore(&sanov_mod(p).gens, DEFAULT_CAP).unwrap()).unwrap();
            assert_eq!(rec.diameter, brute_force_diameter(p), "p = {p}");
        }
    }

    #[test]
    fn everything_as_generators_gives_diameter_one() {
        let all = explore(&sanov_mod(3).gens, DEFAULT_CAP).unwrap();
        let elements: Vec<ModMatrix> = (1..all.len()).map(|i| all.element(i)).collect();
        let b = explore(&elements, DEFAULT_CAP).unwrap();
        assert_eq!(diameter(&b).unwrap().diameter, 1);
    }

    #[test]
    fn layer_closure() {
        for p in [5u64, 7] {
            let r = sanov_mod(p);
            let gens = r.symmetric();
            let ball = explore(&r.gens, DEFAULT_CAP).unwrap();
            for depth in 0..ball.layers() - 1 {
                let upto: HashSet<ModMatrix> = (0..ball.layer(depth).end).map(|i| ball.element(i)).collect();
                let mut grown = upto.clone();
                for x in &upto {
                    for g in &gens {
                        grown.insert(x.mul(g));
                    }
                }
                let next: HashSet<ModMatrix> = (0..ball.layer(depth + 1).end).map(|i| ball.element(i)).collect();
                assert_eq!(grown, next, "p = {p}, depth = {depth}");
            }
        }
    }

    #[test]
    fn lift_examples_and_round_trip() {
        let s = MatrixGenerators::sanov();
        for p in [5u64, 7, 11, 13] {
            let r = sanov_mod(p);
            let ball = explore(&r.gens, DEFAULT_CAP).unwrap();
            assert!(lift(&ball, &ModMatrix::identity(2, p)).unwrap().is_identity());
            assert_eq!(lift(&ball, &r.gens[0]).unwrap(), FreeWord::generator(0));
            for id in 0..ball.len() {
                let x = ball.element(id);
                let w = lift(&ball, &x).unwrap();
                assert_eq!(w.len() as usize, ball.depth(id));
                assert_eq!(reduce_mod(&eval_free_word(&w, &s), p).unwrap(), x);
            }
        }
        let ball = explore(&sanov_mod(5).gens, 10).unwrap();
        let far = ModMatrix::new(2, 5, vec![0, 1, 4, 0]).unwrap();
        if ball.id_of(&far).is_none() {
            assert!(matches!(lift(&ball, &far), Err(Error::TargetNotFound)));
        }
    }

    #[test]
    fn depth_is_the_word_metric() {
        let s = MatrixGenerators::sanov();
        for p in [5u64, 7] {
            let r = sanov_mod(p);
            let ball = explore(&r.gens, DEFAULT_CAP).unwrap();
            let mut shortest: FxHashMap<ModMatrix, u64> = FxHashMap::default();
            for g in enumerate_ball(s.names(), 6, u64::MAX).unwrap() {
                let x = eval_free_word_mod(&g, &r);
                shortest.entry(x).or_insert(g.len());
            }
            for (x, len) in shortest {
                assert_eq!(ball.depth(ball.id_of(&x).unwrap()) as u64, len);
            }
        }
    }

    #[test]
    fn injectivity_examples() {
        let s = MatrixGenerators::sanov();
        assert_eq!(injectivity_radius(2, &s, 10, DEFAULT_CAP).unwrap().radius, 0);
        assert!(injectivity_radius(5, &s, 10, DEFAULT_CAP).unwrap().radius >= 1);
        let capped = injectivity_radius(101, &s, 1, DEFAULT_CAP).unwrap();
        assert!(capped.capped);
        assert_eq!(capped.radius, 1);
    }

    #[test]
    fn injectivity_radius_matches_pairwise_check() {
        let s = MatrixGenerators::sanov();
        for p in [3u64, 5, 7, 11] {
            let r = sanov_mod(p);
            let got = injectivity_radius(p, &s, 10, DEFAULT_CAP).unwrap();
            // oracle: smallest radius whose ball has two words with equal residues
            let mut first_collision = None;
            for radius in 0..=10u32 {
                let words: Vec<FreeWord> = enumerate_ball(s.names(), radius, u64::MAX).unwrap().collect();
                let images: HashSet<ModMatrix> = words.iter().map(|g| eval_free_word_mod(g, &r)).collect();
                if images.len() < words.len() {
                    first_collision = Some(radius);
                    break;
                }
            }
            assert_eq!(got.radius, (first_collision.unwrap() - 1) as u64, "p = {p}");
        }
    }

    #[test]
    fn product_growth_examples() {
        let ball = explore(&sanov_mod(5).gens, DEFAULT_CAP).unwrap();
        let whole = product_growth(&ball, ball.layers() - 1, DEFAULT_CAP).unwrap();
        assert!(whole.covers_group);
        assert_eq!(whole.aaa_size, whole.a_size);
        let unit = product_growth(&ball, 0, DEFAULT_CAP).unwrap();
        assert_eq!((unit.a_size, unit.aaa_size), (1, 1));

        let ball = explore(&sanov_mod(11).gens, DEFAULT_CAP).unwrap();
        let g = product_growth(&ball, 1, DEFAULT_CAP).unwrap();
        assert_eq!(g.a_size, 5);
        // |B(1)^3| = |B(3)| for a symmetric set containing the identity
        assert_eq!(g.aaa_size, ball.layer(3).end as u64);
        assert!(g.covers_group || g.exponent > 1.0);
    }

    #[test]
    fn packing_round_trip() {
        let packer = Packer::new(3, 7).unwrap();
        let m = ModMatrix::new(3, 7, vec![1, 2, 3, 0, 1, 4, 0, 0, 1]).unwrap();
        assert_eq!(packer.decode(packer.encode(m.entries())), m);
        assert!(Packer::new(4, 1 << 20).is_err());
    }
}
