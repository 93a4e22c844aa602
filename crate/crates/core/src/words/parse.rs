//! Recursive-descent parser for the word grammar:
//!
//! ```text
//! word   := term+
//! term   := atom ("^" int)?
//! atom   := ident | "(" word ")"
//! ident  := letter (letter|digit)*
//! int    := ("-")? digit+
//! ```
//!
//! `x` is the variable. An identifier that is not a generator name but
//! spells out single-letter names (`ab` with generators `a`, `b`) is read
//! as their product.

use super::{is_identifier, ConstWord, FreeWord, GeneratorSet, Syllable, VAR};
use crate::error::{Error, Result};

/// Upper bound on the number of syllables a parenthesised power may expand to.
const MAX_EXPANSION: usize = 1 << 24;
const MAX_EXPONENT: i64 = 1_000_000_000_000;

pub fn parse_free_word(text: &str, gens: &GeneratorSet) -> Result<FreeWord> {
    let w = parse_mixed(text, gens)?;
    if w.contains_var() {
        return Err(Error::VariableInConstant);
    }
    Ok(w)
}

pub fn parse_const_word(text: &str, gens: &GeneratorSet) -> Result<ConstWord> {
    ConstWord::from_mixed(&parse_mixed(text, gens)?)
}

/// Parses text over the generators and `x` into a reduced mixed word.
pub fn parse_mixed(text: &str, gens: &GeneratorSet) -> Result<FreeWord> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        gens,
    };
    let w = p.word()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected character"));
    }
    Ok(w)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    gens: &'a GeneratorSet,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn word(&mut self) -> Result<FreeWord> {
        let mut out = FreeWord::identity();
        let mut terms = 0;
        while let Some(c) = self.peek() {
            if c == b')' {
                break;
            }
            let t = self.term()?;
            out.extend(&t);
            terms += 1;
        }
        if terms == 0 {
            return Err(self.err("expected a term"));
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<FreeWord> {
        let atom = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(atom.into_word());
        }
        self.pos += 1;
        let e = self.int()?;
        atom.power(e)
    }

    fn atom(&mut self) -> Result<Atom> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.word()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(Atom::Group(inner))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                self.resolve(ident)
            }
            Some(_) => Err(self.err("expected an identifier or '('")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn resolve(&self, ident: &str) -> Result<Atom> {
        debug_assert!(is_identifier(ident));
        if ident == "x" {
            return Ok(Atom::Letters(vec![VAR]));
        }
        if let Some(i) = self.gens.index_of(ident) {
            return Ok(Atom::Letters(vec![i]));
        }
        let split: Option<Vec<u32>> = ident
            .chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                let s = c.encode_utf8(&mut buf);
                if s == "x" {
                    Some(VAR)
                } else {
                    self.gens.index_of(s)
                }
            })
            .collect();
        match split {
            Some(gens) if ident.len() > 1 => Ok(Atom::Letters(gens)),
            _ => Err(Error::UnknownIdentifier(ident.to_string())),
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(self.err("malformed exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<i64>() {
            Ok(v) if v.abs() <= MAX_EXPONENT => Ok(v),
            _ => Err(Error::Parse {
                pos: start,
                msg: "exponent out of range".into(),
            }),
        }
    }
}

enum Atom {
    /// Juxtaposed generators; an exponent binds to the last one.
    Letters(Vec<u32>),
    Group(FreeWord),
}

impl Atom {
    fn into_word(self) -> FreeWord {
        match self {
            Atom::Letters(ls) => ls.into_iter().map(|gen| Syllable { gen, exp: 1 }).collect(),
            Atom::Group(w) => w,
        }
    }

    fn power(self, e: i64) -> Result<FreeWord> {
        match self {
            Atom::Letters(mut ls) => {
                let last = ls.pop().expect("nonempty identifier");
                let mut w: FreeWord = ls.into_iter().map(|gen| Syllable { gen, exp: 1 }).collect();
                w.push(Syllable { gen: last, exp: e });
                Ok(w)
            }
            Atom::Group(w) => {
                let expanded = (w.syllables().len() as u128) * (e.unsigned_abs() as u128);
                if expanded > MAX_EXPANSION as u128 {
                    return Err(Error::Resource(format!(
                        "power expands to {expanded} syllables"
                    )));
                }
                Ok(w.pow(e))
            }
        }
    }
}
