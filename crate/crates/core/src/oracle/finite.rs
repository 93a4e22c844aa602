//! Finite groups given by multiplication tables, and exhaustive search for
//! short mixed identities.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modp::is_prime;
use crate::par;
use crate::rng::SeededRng;

/// A finite group on elements `0..order` with identity `0`.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    central: Vec<bool>,
    names: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    order: usize,
    mul: Vec<Vec<u32>>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

/// Tables up to this order get a full associativity check.
const FULL_ASSOCIATIVITY: usize = 128;
const SAMPLED_TRIPLES: usize = 1 << 20;

impl FiniteGroup {
    /// Validates a table: square, a Latin square, with a two-sided identity
    /// and associative (exhaustively for small orders, sampled otherwise).
    /// Elements are relabelled so the identity is `0`.
    pub fn from_table(name: &str, rows: Vec<Vec<u32>>, names: Option<Vec<String>>) -> Result<Self> {
        let m = rows.len();
        let bad = |msg: String| Error::InvalidGroup(format!("{name}: {msg}"));
        if m == 0 {
            return Err(bad("empty table".into()));
        }
        if m > u32::MAX as usize {
            return Err(bad("order too large".into()));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != m) {
            return Err(bad(format!("row {r} has {} entries, expected {m}", rows[r].len())));
        }
        if let Some(ns) = &names {
            if ns.len() != m {
                return Err(bad(format!("{} names for {m} elements", ns.len())));
            }
        }
        let mut seen = vec![false; m];
        for (i, row) in rows.iter().enumerate() {
            seen.iter_mut().for_each(|s| *s = false);
            for &v in row {
                let v = v as usize;
                if v >= m || std::mem::replace(&mut seen[v], true) {
                    return Err(bad(format!("row {i} is not a permutation")));
                }
            }
        }
        for j in 0..m {
            seen.iter_mut().for_each(|s| *s = false);
            for row in &rows {
                if std::mem::replace(&mut seen[row[j] as usize], true) {
                    return Err(bad(format!("column {j} is not a permutation")));
                }
            }
        }
        let e = (0..m)
            .find(|&e| (0..m).all(|k| rows[e][k] as usize == k && rows[k][e] as usize == k))
            .ok_or_else(|| bad("no identity element".into()))?;
        let op = |a: usize, b: usize| rows[a][b] as usize;
        let associative = |(a, b, c): (usize, usize, usize)| op(op(a, b), c) == op(a, op(b, c));
        if m <= FULL_ASSOCIATIVITY {
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        if !associative((a, b, c)) {
                            return Err(bad(format!("not associative at ({a}, {b}, {c})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = SeededRng::new(0);
            for _ in 0..SAMPLED_TRIPLES {
                let mut pick = || rng.below(m as u64) as usize;
                let t = (pick(), pick(), pick());
                if !associative(t) {
                    return Err(bad(format!("not associative at {t:?}")));
                }
            }
        }
        // swap the identity into position 0
        let relabel = |k: usize| -> usize {
            if k == e {
                0
            } else if k == 0 {
                e
            } else {
                k
            }
        };
        let mut mul = vec![0u32; m * m];
        for a in 0..m {
            for b in 0..m {
                mul[relabel(a) * m + relabel(b)] = relabel(op(a, b)) as u32;
            }
        }
        let names = names.map(|mut ns| {
            ns.swap(0, e);
            ns
        });
        Ok(FiniteGroup::from_normalised(name, m, mul, names))
    }

    fn from_normalised(name: &str, order: usize, mul: Vec<u32>, names: Option<Vec<String>>) -> Self {
        let m = order;
        let mut inv = vec![0u32; m];
        for a in 0..m {
            inv[a] = (0..m).find(|&b| mul[a * m + b] == 0).expect("Latin square") as u32;
        }
        let central = par::map_range(m, |a| (0..m).all(|b| mul[a * m + b] == mul[b * m + a]));
        let names = names.unwrap_or_else(|| {
            (0..m)
                .map(|k| if k == 0 { "e".to_string() } else { format!("g{k}") })
                .collect()
        });
        FiniteGroup {
            name: name.to_string(),
            order,
            mul,
            inv,
            central,
            names,
        }
    }

    /// The cyclic group of order `n`, element `k` standing for `g^k`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 || n > 1 << 12 {
            return Err(Error::InvalidGroup(format!("cyclic group order {n} out of range 1..=4096")));
        }
        let mul = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
        Ok(FiniteGroup::from_normalised(&format!("c{n}"), n, mul, None))
    }

    /// `SL_2(p)`, or `PSL_2(p)` when `projective`, for primes `p <= 13`.
    pub fn sl2(p: u64, projective: bool) -> Result<Self> {
        if !is_prime(p) || p > 13 {
            return Err(Error::InvalidGroup(format!("SL_2({p}) needs a prime p <= 13")));
        }
        let canon = |m: [u64; 4]| -> [u64; 4] {
            if !projective {
                return m;
            }
            let neg = m.map(|v| (p - v) % p);
            m.min(neg)
        };
        let identity = canon([1, 0, 0, 1]);
        let mut elems: BTreeSet<[u64; 4]> = BTreeSet::new();
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if (a * d + p * p - b * c) % p == 1 {
                            elems.insert(canon([a, b, c, d]));
                        }
                    }
                }
            }
        }
        elems.remove(&identity);
        let list: Vec<[u64; 4]> = std::iter::once(identity).chain(elems).collect();
        let index: HashMap<[u64; 4], u32> = list.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
        let m = list.len();
        let mat_mul = |x: &[u64; 4], y: &[u64; 4]| {
            canon([
                (x[0] * y[0] + x[1] * y[2]) % p,
                (x[0] * y[1] + x[1] * y[3]) % p,
                (x[2] * y[0] + x[3] * y[2]) % p,
                (x[2] * y[1] + x[3] * y[3]) % p,
            ])
        };
        let rows = par::map(&list, |x| list.iter().map(|y| index[&mat_mul(x, y)]).collect::<Vec<u32>>());
        let name = format!("{}sl2-{p}", if projective { "p" } else { "" });
        Ok(FiniteGroup::from_normalised(&name, m, rows.concat(), None))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> u32 {
        0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.order + b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn is_central(&self, a: u32) -> bool {
        self.central[a as usize]
    }

    pub fn center_size(&self) -> usize {
        self.central.iter().filter(|&&c| c).count()
    }

    pub fn pow(&self, a: u32, k: i64) -> u32 {
        let base = if k < 0 { self.inv(a) } else { a };
        let mut e = k.unsigned_abs();
        let (mut acc, mut sq) = (0u32, base);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, sq);
            }
            sq = self.mul(sq, sq);
            e >>= 1;
        }
        acc
    }

    /// `w(g)` for a word in `x` and constants.
    pub fn eval(&self, word: &[Token], g: u32) -> u32 {
        let g_inv = self.inv(g);
        word.iter().fold(0, |acc, t| {
            let f = match *t {
                Token::X => g,
                Token::XInv => g_inv,
                Token::Const(c) => c,
            };
            self.mul(acc, f)
        })
    }

    /// True when `w(g) = e` for every `g`.
    pub fn vanishes(&self, word: &[Token]) -> bool {
        (0..self.order as u32).all(|g| self.eval(word, g) == 0)
    }

    pub fn render(&self, word: &[Token]) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut run = 0i64;
        let flush = |run: &mut i64, parts: &mut Vec<String>| {
            match *run {
                0 => {}
                1 => parts.push("x".into()),
                k => parts.push(format!("x^{k}")),
            }
            *run = 0;
        };
        for t in word {
            match *t {
                Token::X => run += 1,
                Token::XInv => run -= 1,
                Token::Const(c) => {
                    flush(&mut run, &mut parts);
                    parts.push(self.names[c as usize].clone());
                }
            }
        }
        flush(&mut run, &mut parts);
        parts.join(" ")
    }
}

/// A letter of a mixed word: `x`, `x^-1`, or a group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    X,
    XInv,
    Const(u32),
}

impl Token {
    /// Order used for orbit representatives: `x < x^-1 < constants by id`.
    fn code(self) -> u64 {
        match self {
            Token::X => 0,
            Token::XInv => 1,
            Token::Const(c) => 2 + c as u64,
        }
    }

    fn invert(self, g: &FiniteGroup) -> Token {
        match self {
            Token::X => Token::XInv,
            Token::XInv => Token::X,
            Token::Const(c) => Token::Const(g.inv(c)),
        }
    }

    fn is_const(self) -> bool {
        matches!(self, Token::Const(_))
    }
}

/// Built-ins: `cN`, `sl2-P`, `psl2-P` (prime `P <= 13`). Anything else is
/// read as a JSON table file `{"order": m, "mul": [[...]], "names": [...]}`.
pub fn load_group(source: &str) -> Result<FiniteGroup> {
    if let Some(n) = source.strip_prefix('c').and_then(|s| s.parse::<usize>().ok()) {
        return FiniteGroup::cyclic(n);
    }
    if let Some(p) = source.strip_prefix("psl2-").and_then(|s| s.parse::<u64>().ok()) {
        return FiniteGroup::sl2(p, true);
    }
    if let Some(p) = source.strip_prefix("sl2-").and_then(|s| s.parse::<u64>().ok()) {
        return FiniteGroup::sl2(p, false);
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(Error::UnknownGroup(source.to_string()));
    }
    let table: TableFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if table.order != table.mul.len() {
        return Err(Error::InvalidGroup(format!(
            "order {} but {} table rows",
            table.order,
            table.mul.len()
        )));
    }
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(source);
    FiniteGroup::from_table(name, table.mul, table.names)
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedIdentityReport {
    pub group: String,
    pub order: usize,
    pub max_length: usize,
    /// Canonical words of length `1..=max_length` containing `x`.
    pub candidates: u64,
    /// Orbit representatives actually evaluated.
    pub evaluated: u64,
    pub identities: Vec<String>,
}

/// Every mixed identity of length at most `max_length`, up to inversion and
/// cyclic rotation of a boundary constant past an `x`-power. Constants range
/// over the non-central elements; each costs length 1, `x^k` costs `|k|`.
/// Fails with a resource error once more than `cap` candidates are seen.
pub fn mixed_identity_search(group: &FiniteGroup, max_length: usize, cap: u64) -> Result<MixedIdentityReport> {
    let constants: Vec<u32> = (0..group.order as u32).filter(|&c| !group.is_central(c)).collect();
    let mut firsts = vec![Token::X, Token::XInv];
    firsts.extend(constants.iter().map(|&c| Token::Const(c)));
    let mut candidates = 0u64;
    let mut evaluated = 0u64;
    let mut identities = Vec::new();
    for length in 1..=max_length {
        let results = par::map(&firsts, |&t| {
            let mut st = Dfs {
                group,
                constants: &constants,
                length,
                seq: vec![t],
                candidates: 0,
                evaluated: 0,
                found: Vec::new(),
                cap,
            };
            st.run().map(|()| (st.candidates, st.evaluated, st.found))
        });
        for r in results {
            let (c, e, found) = r?;
            candidates += c;
            evaluated += e;
            identities.extend(found.iter().map(|w| group.render(w)));
        }
        if candidates > cap {
            return Err(Error::Resource(format!("more than {cap} candidate words")));
        }
    }
    Ok(MixedIdentityReport {
        group: group.name.clone(),
        order: group.order,
        max_length,
        candidates,
        evaluated,
        identities,
    })
}

struct Dfs<'a> {
    group: &'a FiniteGroup,
    constants: &'a [u32],
    length: usize,
    seq: Vec<Token>,
    candidates: u64,
    evaluated: u64,
    found: Vec<Vec<Token>>,
    cap: u64,
}

impl Dfs<'_> {
    fn run(&mut self) -> Result<()> {
        if self.seq.len() == self.length {
            if !self.seq.iter().any(|t| !t.is_const()) {
                return Ok(());
            }
            self.candidates += 1;
            if self.candidates > self.cap {
                return Err(Error::Resource(format!("more than {} candidate words", self.cap)));
            }
            if is_orbit_minimum(&self.seq, self.group) {
                self.evaluated += 1;
                if self.group.vanishes(&self.seq) {
                    self.found.push(self.seq.clone());
                }
            }
            return Ok(());
        }
        let last = *self.seq.last().expect("nonempty");
        let mut next: Vec<Token> = Vec::new();
        if last != Token::XInv {
            next.push(Token::X);
        }
        if last != Token::X {
            next.push(Token::XInv);
        }
        if !last.is_const() {
            next.extend(self.constants.iter().map(|&c| Token::Const(c)));
        }
        for t in next {
            self.seq.push(t);
            self.run()?;
            self.seq.pop();
        }
        Ok(())
    }
}

/// Whether `seq` is the smallest word in its orbit under inversion and
/// moving a leading constant to the end (or a trailing one to the front)
/// when the other end is an `x`-letter. All moves are conjugations or
/// inversion, so they preserve being an identity.
fn is_orbit_minimum(seq: &[Token], g: &FiniteGroup) -> bool {
    let key = |s: &[Token]| s.iter().map(|t| t.code()).collect::<Vec<u64>>();
    let me = key(seq);
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut stack = vec![seq.to_vec()];
    seen.insert(me.clone());
    while let Some(s) = stack.pop() {
        let mut moves = vec![s.iter().rev().map(|t| t.invert(g)).collect::<Vec<Token>>()];
        let (first, last) = (s[0], s[s.len() - 1]);
        if s.len() > 1 && first.is_const() && !last.is_const() {
            let mut r = s[1..].to_vec();
            r.push(first);
            moves.push(r);
        }
        if s.len() > 1 && last.is_const() && !first.is_const() {
            let mut r = vec![last];
            r.extend_from_slice(&s[..s.len() - 1]);
            moves.push(r);
        }
        for m in moves {
            let k = key(&m);
            if k < me {
                return false;
            }
            if seen.insert(k) {
                stack.push(m);
            }
        }
    }
    true
}
