//! Free-group words over an indexed alphabet.
//!
//! Words are stored exactly as written by [`parse_word`]; every algebraic
//! operation ([`Word::multiply`], [`Word::invert`], [`Word::conjugate`],
//! [`Word::commutator`]) returns a freely reduced word, so equality in the
//! free group is sequence equality of reduced words.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("generator {0} has no image in the assignment")]
    Unbound(Generator),
}

/// A generator name with an optional integer index, e.g. `b` or `b[3]`.
///
/// `b` and `b[0]` are different generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    name: String,
    index: Option<i64>,
}

impl Generator {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(!name.is_empty());
        Generator { name, index: None }
    }

    pub fn indexed(name: impl Into<String>, index: i64) -> Self {
        Generator {
            index: Some(index),
            ..Generator::new(name)
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> Option<i64> {
        self.index
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.name, i),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: Generator,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: Generator, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    /// +1 or -1.
    pub fn sign(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inverted(&self) -> Letter {
        Letter {
            generator: self.generator.clone(),
            inverse: !self.inverse,
        }
    }

    pub fn cancels(&self, other: &Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

/// Anything words can be evaluated in: a group with a fixed composition
/// convention.
pub trait GroupElement: Clone {
    fn identity() -> Self;
    /// The product `self · other`.
    fn op(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn empty() -> Self {
        Word::default()
    }

    /// The one-letter word `g`.
    pub fn generator(g: Generator) -> Self {
        Word::new(vec![Letter::new(g, false)])
    }

    /// Shorthand for the one-letter word on an unindexed generator.
    pub fn gen(name: &str) -> Self {
        Word::generator(Generator::new(name))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| !p[0].cancels(&p[1]))
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word::new(letters)
    }

    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.len());
        for l in &self.letters {
            if stack.last().is_some_and(|top| top.cancels(l)) {
                stack.pop();
            } else {
                stack.push(l.clone());
            }
        }
        Word::new(stack)
    }

    pub fn multiply(&self, other: &Word) -> Word {
        self.concat(other).free_reduce()
    }

    pub fn invert(&self) -> Word {
        Word::new(self.letters.iter().rev().map(Letter::inverted).collect()).free_reduce()
    }

    /// `self^n`, reduced. Negative powers invert.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.invert() } else { self.free_reduce() };
        let mut letters = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Word::new(letters).free_reduce()
    }

    /// `t⁻¹ · self · t`.
    pub fn conjugate(&self, t: &Word) -> Word {
        t.invert().concat(self).concat(t).free_reduce()
    }

    /// `u⁻¹ v⁻¹ u v`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.invert()
            .concat(&v.invert())
            .concat(u)
            .concat(v)
            .free_reduce()
    }

    pub fn exponent_sum(&self, g: &Generator) -> i64 {
        self.letters
            .iter()
            .filter(|l| &l.generator == g)
            .map(Letter::sign)
            .sum()
    }

    /// Image under the homomorphism induced by `assignment`, folded left to
    /// right with the target's `op`.
    pub fn evaluate<T: GroupElement>(
        &self,
        assignment: &HashMap<Generator, T>,
    ) -> Result<T, WordError> {
        let mut inverses: HashMap<&Generator, T> = HashMap::new();
        let mut acc = T::identity();
        for l in &self.letters {
            let image = assignment
                .get(&l.generator)
                .ok_or_else(|| WordError::Unbound(l.generator.clone()))?;
            if l.inverse {
                let inv = inverses
                    .entry(&l.generator)
                    .or_insert_with(|| image.inverse());
                acc = acc.op(inv);
            } else {
                acc = acc.op(image);
            }
        }
        Ok(acc)
    }
}

impl GroupElement for Word {
    fn identity() -> Self {
        Word::empty()
    }

    fn op(&self, other: &Self) -> Self {
        self.multiply(other)
    }

    fn inverse(&self) -> Self {
        self.invert()
    }
}

/// Membership in `{w : exponent sum of v in w is 0}`.
pub fn separator_membership(w: &Word, v: &Generator) -> bool {
    w.exponent_sum(v) == 0
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(self))
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_word(s)
    }
}

/// Canonical text: one factor per run of equal letters, `1` for the empty word.
pub fn format_word(w: &Word) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let mut out = String::new();
    let mut i = 0;
    let letters = w.letters();
    while i < letters.len() {
        let mut j = i + 1;
        while j < letters.len() && letters[j] == letters[i] {
            j += 1;
        }
        let exp = (j - i) as i64 * letters[i].sign();
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&letters[i].generator.to_string());
        if exp != 1 {
            out.push('^');
            out.push_str(&exp.to_string());
        }
        i = j;
    }
    out
}

/// Parses the word grammar:
///
/// ```text
/// word   := factor*
/// factor := atom ("^" integer)? | "(" word ")" ("^" integer)? | "1"
/// atom   := name ("[" integer "]")?
/// ```
///
/// Exponents are expanded eagerly; nothing is reduced.
pub fn parse_word(text: &str) -> Result<Word, WordError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let letters = p.word()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected character"));
    }
    Ok(Word::new(letters))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> WordError {
        WordError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Result<Vec<Letter>, WordError> {
        let mut letters = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(b')') => return Ok(letters),
                Some(_) => letters.extend(self.factor()?),
            }
        }
    }

    fn factor(&mut self) -> Result<Vec<Letter>, WordError> {
        let body = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.word()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                inner
            }
            Some(b'1') => {
                self.pos += 1;
                if self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    return Err(self.error("identifiers must start with a letter"));
                }
                Vec::new()
            }
            Some(c) if c.is_ascii_alphabetic() => vec![Letter::new(self.atom()?, false)],
            Some(_) => return Err(self.error("expected a generator, '(' or '1'")),
            None => return Err(self.error("unexpected end of input")),
        };
        let exp = if self.peek() == Some(b'^') {
            self.pos += 1;
            self.integer()?
        } else {
            1
        };
        let mut out = Vec::with_capacity(body.len() * exp.unsigned_abs() as usize);
        for _ in 0..exp.unsigned_abs() {
            if exp < 0 {
                out.extend(body.iter().rev().map(Letter::inverted));
            } else {
                out.extend(body.iter().cloned());
            }
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Generator, WordError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .to_string();
        if self.peek() == Some(b'[') {
            self.pos += 1;
            let index = self.integer()?;
            if self.peek() != Some(b']') {
                return Err(self.error("expected ']'"));
            }
            self.pos += 1;
            Ok(Generator::indexed(name, index))
        } else {
            Ok(Generator::new(name))
        }
    }

    fn integer(&mut self) -> Result<i64, WordError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if digits == self.pos {
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .parse()
            .map_err(|_| WordError::Syntax {
                pos: start,
                message: "integer out of range".to_string(),
            })
    }
}
