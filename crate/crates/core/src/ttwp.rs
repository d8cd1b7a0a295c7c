//! Deciding the word problem of `⟨β, σ, τ⟩` with truth-table access to the
//! coded set.
//!
//! `σ` shifts columns, `τ` swaps rows `3t+1, 3t+2` of column 0, and `β` swaps
//! rows `3t, 3t+1` of column `g(t)`. Writing `β_x = σ^x β σ^{-x}` and
//! `τ_u = σ^u τ σ^{-u}`, every word with σ-exponent 0 equals a product of
//! `β_x`'s and `τ_u`'s. Every generator preserves each column and each row
//! triple `{3t, 3t+1, 3t+2}`, so the word is the identity iff it is the
//! identity on every such cell. On a cell at most one `β_x` and one `τ_u`
//! act, and they generate the symmetric group on the three rows. [`decide`]
//! evaluates exactly that:
//!
//! * R1: each `β_x` occurs an even number of times (cells of columns with no
//!   `τ` see `β_x` alone; one exists for every `x` since `range(g)` is
//!   infinite);
//! * R2: each `τ_u` occurs an even number of times (generic triples of column
//!   `-u`, where no `β` acts, see `τ_u` alone);
//! * R3: for `x − u ∈ range(g)` the projection `w(x, u)` is the identity in
//!   `S₃` on the special triple `g(t) = x − u`.
//!
//! Only R3 consults the oracle, and the questions `{x − u}` are fixed by the
//! normal form before any answer is seen.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::coener::CodedSet;
use crate::perms::{beta_from_g, sigma_line, tau_triples, PermError, Point};
use crate::words::{Generator, GroupElement, Letter, Word, WordError};

pub const BETA: &str = "b";
pub const SIGMA: &str = "s";
pub const TAU: &str = "t";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TtError {
    #[error("letter {0} is not one of b, s, t")]
    Alphabet(Generator),
    #[error("σ-exponent sum is {0}, expected 0")]
    NonzeroSigma(i64),
    #[error("oracle has no answer for {0:?}")]
    MissingAnswers(Vec<i64>),
    #[error("the coded set has no explicit schedule")]
    ScheduleUnavailable,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Beta,
    Tau,
}

#[derive(Debug, Clone, Copy)]
enum Symbol {
    Shift(i64),
    Letter(Kind),
}

fn classify(l: &Letter) -> Result<Symbol, TtError> {
    let g = &l.generator;
    if g.index().is_some() {
        return Err(TtError::Alphabet(g.clone()));
    }
    match g.name() {
        SIGMA => Ok(Symbol::Shift(l.sign())),
        BETA => Ok(Symbol::Letter(Kind::Beta)),
        TAU => Ok(Symbol::Letter(Kind::Tau)),
        _ => Err(TtError::Alphabet(g.clone())),
    }
}

/// `β_x`/`τ_u` letters of `w` with their σ-offsets, in order. `β⁻¹ = β` and
/// `τ⁻¹ = τ`, so signs are dropped.
fn shifted_letters(w: &Word) -> Result<(Vec<(Kind, i64)>, i64), TtError> {
    let mut offset = 0i64;
    let mut out = Vec::with_capacity(w.len());
    for l in w.letters() {
        match classify(l)? {
            Symbol::Shift(s) => offset += s,
            Symbol::Letter(k) => out.push((k, offset)),
        }
    }
    Ok((out, offset))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaCheck {
    Zero,
    Nonzero(i64),
}

/// A nonzero σ-exponent sum already proves `w ≠ 1`: every other generator
/// preserves columns.
pub fn sigma_exponent_check(w: &Word) -> Result<SigmaCheck, TtError> {
    let (_, sum) = shifted_letters(w)?;
    Ok(if sum == 0 {
        SigmaCheck::Zero
    } else {
        SigmaCheck::Nonzero(sum)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub kind: Kind,
    pub indices: Vec<i64>,
}

/// Alternating β- and τ-blocks; within a block every index occurs once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    blocks: Vec<Block>,
}

impl NormalForm {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn letters(&self) -> impl Iterator<Item = (Kind, i64)> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| b.indices.iter().map(move |&i| (b.kind, i)))
    }

    fn indices(&self, kind: Kind) -> BTreeSet<i64> {
        self.letters()
            .filter(|l| l.0 == kind)
            .map(|l| l.1)
            .collect()
    }

    /// β-indices `L`.
    pub fn beta_indices(&self) -> BTreeSet<i64> {
        self.indices(Kind::Beta)
    }

    /// τ-indices `M`.
    pub fn tau_indices(&self) -> BTreeSet<i64> {
        self.indices(Kind::Tau)
    }

    pub fn count(&self, kind: Kind, index: i64) -> usize {
        self.letters().filter(|&l| l == (kind, index)).count()
    }

    /// The normal form as a word in indexed letters `b[x]`, `t[u]`.
    pub fn to_indexed_word(&self) -> Word {
        Word::new(
            self.letters()
                .map(|(k, i)| {
                    let name = if k == Kind::Beta { BETA } else { TAU };
                    Letter::new(Generator::indexed(name, i), false)
                })
                .collect(),
        )
    }

    /// Re-expands `β_x = σ^x β σ^{-x}` and `τ_u = σ^u τ σ^{-u}` into a word
    /// over `{b, s, t}`.
    pub fn to_word(&self) -> Word {
        let s = Word::gen(SIGMA);
        let mut out = Word::empty();
        for (k, i) in self.letters() {
            let name = if k == Kind::Beta { BETA } else { TAU };
            out = out.concat(&Word::gen(name).conjugate(&s.pow(-i)));
        }
        out.free_reduce()
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let name = if b.kind == Kind::Beta { BETA } else { TAU };
                let inner: Vec<String> = b.indices.iter().map(|i| format!("{name}[{i}]")).collect();
                format!("({})", inner.join(" "))
            })
            .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Keeps one copy of each index occurring an odd number of times, in order
/// of first occurrence.
fn parity_reduce(indices: &[i64]) -> Vec<i64> {
    let mut counts: HashMap<i64, usize> = HashMap::new();
    for &i in indices {
        *counts.entry(i).or_default() += 1;
    }
    let mut out = Vec::new();
    for &i in indices {
        if counts[&i] % 2 == 1 && !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Rewrites a σ-exponent-0 word as alternating blocks of `β_x`'s and
/// `τ_u`'s: each letter read at running σ-offset `a` becomes `β_a` / `τ_a`,
/// then runs of one kind are cancelled down to index parity and newly
/// adjacent runs merged, until nothing changes.
pub fn to_normal_form(w: &Word) -> Result<NormalForm, TtError> {
    let (letters, sum) = shifted_letters(w)?;
    if sum != 0 {
        return Err(TtError::NonzeroSigma(sum));
    }
    let mut blocks: Vec<Block> = Vec::new();
    for (kind, i) in letters {
        match blocks.last_mut() {
            Some(b) if b.kind == kind => b.indices.push(i),
            _ => blocks.push(Block {
                kind,
                indices: vec![i],
            }),
        }
    }
    loop {
        let mut changed = false;
        for b in &mut blocks {
            let reduced = parity_reduce(&b.indices);
            changed |= reduced.len() != b.indices.len();
            b.indices = reduced;
        }
        let mut merged: Vec<Block> = Vec::with_capacity(blocks.len());
        for b in blocks.into_iter().filter(|b| !b.indices.is_empty()) {
            match merged.last_mut() {
                Some(last) if last.kind == b.kind => {
                    last.indices.extend(b.indices);
                    changed = true;
                }
                _ => merged.push(b),
            }
        }
        blocks = merged;
        if !changed {
            return Ok(NormalForm { blocks });
        }
    }
}

/// `w(x, u)` as a kind sequence: all letters other than `β_x`, `τ_u`
/// deleted, then adjacent equal letters cancelled.
pub fn project(nf: &NormalForm, x: i64, u: i64) -> Vec<Kind> {
    let mut out: Vec<Kind> = Vec::new();
    for (k, i) in nf.letters() {
        let keep = match k {
            Kind::Beta => i == x,
            Kind::Tau => i == u,
        };
        if !keep {
            continue;
        }
        if out.last() == Some(&k) {
            out.pop();
        } else {
            out.push(k);
        }
    }
    out
}

/// `w(x, u)` as a word in `b[x]`, `t[u]`.
pub fn subword_projection(nf: &NormalForm, x: i64, u: i64) -> Word {
    Word::new(
        project(nf, x, u)
            .into_iter()
            .map(|k| match k {
                Kind::Beta => Letter::new(Generator::indexed(BETA, x), false),
                Kind::Tau => Letter::new(Generator::indexed(TAU, u), false),
            })
            .collect(),
    )
}

/// `{x − u : x ∈ L, u ∈ M}`, fixed before any oracle interaction.
pub fn query_set(nf: &NormalForm) -> BTreeSet<i64> {
    let l = nf.beta_indices();
    let m = nf.tau_indices();
    l.iter()
        .flat_map(|x| m.iter().map(move |u| x - u))
        .collect()
}

/// Answers "is `m` in the coded complement `range(g)`?".
pub trait Oracle {
    fn answer(&self, m: i64) -> Option<bool>;
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn answer(&self, m: i64) -> Option<bool> {
        (**self).answer(m)
    }
}

impl Oracle for CodedSet {
    fn answer(&self, m: i64) -> Option<bool> {
        Some(self.in_complement(m))
    }
}

/// A finite answer table. Negative integers are outside `ω` and always
/// answered "no".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableOracle {
    answers: BTreeMap<i64, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle file line {line}: {message}")]
pub struct OracleParseError {
    pub line: usize,
    pub message: String,
}

impl TableOracle {
    pub fn new(answers: impl IntoIterator<Item = (i64, bool)>) -> Self {
        TableOracle {
            answers: answers.into_iter().collect(),
        }
    }

    /// Lines `m 0|1`, 1 meaning `m` is in the coded complement.
    pub fn parse(text: &str) -> Result<Self, OracleParseError> {
        let mut answers = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| OracleParseError {
                line: i + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [m, bit] = fields[..] else {
                return Err(err("expected `m 0|1`"));
            };
            let m: i64 = m.parse().map_err(|_| err("expected an integer"))?;
            let bit = match bit {
                "0" => false,
                "1" => true,
                _ => return Err(err("answer must be 0 or 1")),
            };
            answers.insert(m, bit);
        }
        Ok(TableOracle { answers })
    }
}

impl Oracle for TableOracle {
    fn answer(&self, m: i64) -> Option<bool> {
        if m < 0 {
            return Some(false);
        }
        self.answers.get(&m).copied()
    }
}

/// Which rule settled the question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule")]
pub enum Reason {
    #[serde(rename = "sigma-exponent")]
    SigmaExponent { sum: i64 },
    /// R1.
    #[serde(rename = "R1-odd-beta")]
    OddBeta { x: i64, count: usize },
    /// R2.
    #[serde(rename = "R2-odd-tau")]
    OddTau { u: i64, count: usize },
    /// R3: the special triple of column `-u` is moved; `cell` is the image
    /// of rows `(3t, 3t+1, 3t+2)` as offsets.
    #[serde(rename = "R3-special-cell")]
    SpecialCell { x: i64, u: i64, cell: [u8; 3] },
    #[serde(rename = "all-cells-fixed")]
    AllCellsFixed,
    /// Literal procedure, case (1): odd τ-length after deleting `β_x`.
    #[serde(rename = "literal-case-1")]
    LiteralOddLength { x: i64, u: i64, length: usize },
    /// Literal procedure, case (2): `β_x τ_u` count not a multiple of 3.
    #[serde(rename = "literal-case-2-count")]
    LiteralCount { x: i64, u: i64, count: usize },
    /// Literal procedure, case (2): nonempty after cancelling `β_x τ_u`.
    #[serde(rename = "literal-case-2-residue")]
    LiteralResidue { x: i64, u: i64, residue: usize },
    #[serde(rename = "literal-all-columns-fixed")]
    AllColumnsFixed,
}

impl Reason {
    pub fn rule(&self) -> &'static str {
        match self {
            Reason::SigmaExponent { .. } => "sigma-exponent",
            Reason::OddBeta { .. } => "R1-odd-beta",
            Reason::OddTau { .. } => "R2-odd-tau",
            Reason::SpecialCell { .. } => "R3-special-cell",
            Reason::AllCellsFixed => "all-cells-fixed",
            Reason::LiteralOddLength { .. } => "literal-case-1",
            Reason::LiteralCount { .. } => "literal-case-2-count",
            Reason::LiteralResidue { .. } => "literal-case-2-residue",
            Reason::AllColumnsFixed => "literal-all-columns-fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub equal_identity: bool,
    pub reason: Reason,
    /// Every question put to the oracle, in the order asked.
    pub queries: Vec<i64>,
    pub answers: BTreeMap<i64, bool>,
}

/// Asks every question in `queries` up front.
fn ask_all(queries: &BTreeSet<i64>, oracle: &dyn Oracle) -> Result<BTreeMap<i64, bool>, TtError> {
    let mut answers = BTreeMap::new();
    let mut missing = Vec::new();
    for &m in queries {
        match oracle.answer(m) {
            Some(a) => {
                answers.insert(m, a);
            }
            None => missing.push(m),
        }
    }
    if missing.is_empty() {
        Ok(answers)
    } else {
        Err(TtError::MissingAnswers(missing))
    }
}

/// A row-triple cell permutation: `cell[i]` is the image of offset `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell(pub [u8; 3]);

impl GroupElement for Cell {
    fn identity() -> Self {
        Cell([0, 1, 2])
    }

    fn op(&self, other: &Self) -> Self {
        Cell(self.0.map(|i| other.0[i as usize]))
    }

    fn inverse(&self) -> Self {
        let mut inv = [0u8; 3];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        Cell(inv)
    }
}

/// β on a special triple swaps offsets 0, 1; τ swaps 1, 2.
fn cell_image(kinds: &[Kind]) -> Cell {
    kinds.iter().fold(Cell::identity(), |acc, k| {
        acc.op(&match k {
            Kind::Beta => Cell([1, 0, 2]),
            Kind::Tau => Cell([0, 2, 1]),
        })
    })
}

fn odd_count(nf: &NormalForm, kind: Kind, indices: &BTreeSet<i64>) -> Option<(i64, usize)> {
    indices
        .iter()
        .map(|&i| (i, nf.count(kind, i)))
        .find(|&(_, c)| c % 2 == 1)
}

fn verdict(equal_identity: bool, reason: Reason, answers: BTreeMap<i64, bool>) -> Verdict {
    Verdict {
        equal_identity,
        reason,
        queries: answers.keys().copied().collect(),
        answers,
    }
}

/// Decides whether the normal form denotes the identity, asking the oracle
/// exactly the questions in [`query_set`], all before any rule is applied.
pub fn decide(nf: &NormalForm, oracle: &dyn Oracle) -> Result<Verdict, TtError> {
    let answers = ask_all(&query_set(nf), oracle)?;
    let (l, m) = (nf.beta_indices(), nf.tau_indices());
    if let Some((x, count)) = odd_count(nf, Kind::Beta, &l) {
        return Ok(verdict(false, Reason::OddBeta { x, count }, answers));
    }
    if let Some((u, count)) = odd_count(nf, Kind::Tau, &m) {
        return Ok(verdict(false, Reason::OddTau { u, count }, answers));
    }
    for &u in &m {
        for &x in &l {
            if !answers[&(x - u)] {
                continue;
            }
            let cell = cell_image(&project(nf, x, u));
            if cell != Cell::identity() {
                let reason = Reason::SpecialCell { x, u, cell: cell.0 };
                return Ok(verdict(false, reason, answers));
            }
        }
    }
    Ok(verdict(true, Reason::AllCellsFixed, answers))
}

/// σ-exponent check, normal form, then [`decide`].
pub fn decide_word(w: &Word, oracle: &dyn Oracle) -> Result<Verdict, TtError> {
    if let SigmaCheck::Nonzero(sum) = sigma_exponent_check(w)? {
        return Ok(verdict(false, Reason::SigmaExponent { sum }, BTreeMap::new()));
    }
    decide(&to_normal_form(w)?, oracle)
}

/// `u = v` via the m-reduction `⟨u, v⟩ ↦ u v⁻¹`.
pub fn decide_pair(u: &Word, v: &Word, oracle: &dyn Oracle) -> Result<Verdict, TtError> {
    decide_word(&u.multiply(&v.invert()), oracle)
}

/// `[Cj(β, σ^{-x}), τ]`: the identity exactly when `x` is in the coded set.
pub fn m_reduction_word(x: i64) -> Word {
    let beta_x = Word::gen(BETA).conjugate(&Word::gen(SIGMA).pow(-x));
    Word::commutator(&beta_x, &Word::gen(TAU))
}

/// The printed case analysis, transcribed as stated: the β-parity rule,
/// then per `u ∈ M`, `x ∈ L`:
///
/// 1. `x − u ∉ range(g)`: delete `β_x` from `w(x, u)`; `x`-fixed iff the
///    remaining length is even;
/// 2. `x − u ∈ range(g)`: not `x`-fixed if the number of `β_x τ_u`
///    subwords is not a multiple of 3; otherwise cancel them all and call it
///    `x`-fixed iff nothing is left.
///
/// Kept for comparison with [`decide`]; the two differ, e.g. on `τ` alone
/// (`L = ∅`, accepted here) and on `(τ_u β_x)^6` with `x − u ∈ range(g)`
/// (rejected here, though it is the identity).
pub fn paper_literal_decider(nf: &NormalForm, oracle: &dyn Oracle) -> Result<Verdict, TtError> {
    let answers = ask_all(&query_set(nf), oracle)?;
    let (l, m) = (nf.beta_indices(), nf.tau_indices());
    if let Some((x, count)) = odd_count(nf, Kind::Beta, &l) {
        return Ok(verdict(false, Reason::OddBeta { x, count }, answers));
    }
    for &u in &m {
        for &x in &l {
            let w = project(nf, x, u);
            if let Some(reason) = literal_column_check(&w, x, u, answers[&(x - u)]) {
                return Ok(verdict(false, reason, answers));
            }
        }
    }
    Ok(verdict(true, Reason::AllColumnsFixed, answers))
}

/// Cases (1) and (2) of the printed procedure on one projection
/// `w(x, u)`; `None` means column `-u` is declared `x`-fixed.
pub fn literal_column_check(w: &[Kind], x: i64, u: i64, in_complement: bool) -> Option<Reason> {
    if !in_complement {
        let length = w.iter().filter(|&&k| k == Kind::Tau).count();
        return (length % 2 == 1).then_some(Reason::LiteralOddLength { x, u, length });
    }
    let count = w.windows(2).filter(|p| p == &[Kind::Beta, Kind::Tau]).count();
    if count % 3 != 0 {
        return Some(Reason::LiteralCount { x, u, count });
    }
    let mut residue = 0;
    let mut i = 0;
    while i < w.len() {
        if w[i] == Kind::Beta && w.get(i + 1) == Some(&Kind::Tau) {
            i += 2;
        } else {
            residue += 1;
            i += 1;
        }
    }
    (residue != 0).then_some(Reason::LiteralResidue { x, u, residue })
}

/// The permutations `β` (from the coded set's coder), `σ`, `τ`.
pub fn generator_assignment(coded: &CodedSet) -> HashMap<Generator, crate::perms::Permutation> {
    HashMap::from([
        (Generator::new(BETA), beta_from_g(coded.coder().clone())),
        (Generator::new(SIGMA), sigma_line()),
        (Generator::new(TAU), tau_triples()),
    ])
}

/// Points on which checking `w` suffices to decide `w = 1`: special triples
/// of the τ-columns, one generic triple per τ-column, and one β-only cell
/// per β-offset, plus the origin. Offsets are read off the raw word, so the
/// set covers whatever normal form the word has.
pub fn certificate_points(w: &Word, coded: &CodedSet) -> Result<Vec<Point>, TtError> {
    let (letters, _) = shifted_letters(w)?;
    let betas: BTreeSet<i64> = letters.iter().filter(|l| l.0 == Kind::Beta).map(|l| l.1).collect();
    let taus: BTreeSet<i64> = letters.iter().filter(|l| l.0 == Kind::Tau).map(|l| l.1).collect();
    let mut cells: BTreeSet<(i64, u64)> = BTreeSet::new();
    for &u in &taus {
        let special: BTreeSet<i64> = betas.iter().map(|x| x - u).collect();
        for &m in &special {
            if let Some(t) = coded.g_inverse(m) {
                cells.insert((-u, t));
            }
        }
        let generic = (0..)
            .find(|&t| !special.contains(&(coded.g(t) as i64)))
            .expect("g is injective");
        cells.insert((-u, generic));
    }
    for &x in &betas {
        let t = (0..)
            .find(|&t| !taus.contains(&(x - coded.g(t) as i64)))
            .expect("range(g) is infinite");
        cells.insert((coded.g(t) as i64 - x, t));
    }
    let mut points = vec![Point::new(0, 0)];
    for (c, t) in cells {
        points.extend((0..3).map(|k| Point::new(c, 3 * t + k)));
    }
    Ok(points)
}

/// Composes the raw permutations and checks `w` on [`certificate_points`].
/// Independent of the normal form and the decision rules.
pub fn brute_force_identity(w: &Word, coded: &CodedSet) -> Result<bool, TtError> {
    let p = w.evaluate(&generator_assignment(coded))?;
    for pt in certificate_points(w, coded)? {
        if p.apply(pt)? != pt {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coener::Schedule;
    use crate::words::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn nf(s: &str) -> NormalForm {
        to_normal_form(&w(s)).unwrap()
    }

    fn yes_for(ms: &[i64]) -> TableOracle {
        TableOracle::new(ms.iter().map(|&m| (m, true)))
    }

    #[test]
    fn sigma_check() {
        assert_eq!(sigma_exponent_check(&w("s")).unwrap(), SigmaCheck::Nonzero(1));
        let c = Word::commutator(&w("b"), &w("t"));
        assert_eq!(sigma_exponent_check(&c).unwrap(), SigmaCheck::Zero);
        assert_eq!(sigma_exponent_check(&w("s b s^-1")).unwrap(), SigmaCheck::Zero);
        assert!(matches!(sigma_exponent_check(&w("a")), Err(TtError::Alphabet(_))));
        assert!(matches!(sigma_exponent_check(&w("b[2]")), Err(TtError::Alphabet(_))));
    }

    #[test]
    fn normal_form_examples() {
        let n = nf("s b s^-1");
        assert_eq!(n.blocks(), &[Block { kind: Kind::Beta, indices: vec![1] }]);
        assert!(nf("b b").is_empty());
        let n = nf("b t b t");
        assert_eq!(n.blocks().len(), 4);
        assert_eq!(n.to_string(), "(b[0]) (t[0]) (b[0]) (t[0])");
        assert_eq!(n.beta_indices(), BTreeSet::from([0]));
        assert_eq!(n.tau_indices(), BTreeSet::from([0]));
        assert!(matches!(to_normal_form(&w("s")), Err(TtError::NonzeroSigma(1))));
    }

    #[test]
    fn normal_form_merges_across_cancelled_runs() {
        // β_0 τ_1 τ_1 β_2 → β_0 β_2 ; τ_1 sits at offset 1
        let n = nf("b s t t s^-1 s^2 b s^-2");
        assert_eq!(n.blocks(), &[Block { kind: Kind::Beta, indices: vec![0, 2] }]);
        // β_0 τ_0 τ_0 β_0 collapses to nothing
        assert!(nf("b t t b").is_empty());
        // inverses are the same involutions
        assert!(nf("b^-1 b").is_empty());
    }

    #[test]
    fn projections() {
        let n = nf("(b t)^3");
        assert_eq!(subword_projection(&n, 0, 0), w("(b[0] t[0])^3"));
        let n = nf("s b s^-1 t s b s^-1 t s^2 b s^-2");
        assert!(n.beta_indices().contains(&2));
        assert!(subword_projection(&n, 2, 0).letters().len() == 1);
        let n2 = nf("s b s^-1 t s b s^-1 t");
        assert!(subword_projection(&n2, 3, 0).is_empty());
        let p = subword_projection(&n, 1, 0);
        assert_eq!(p, subword_projection(&n, 1, 0));
    }

    #[test]
    fn query_sets() {
        assert_eq!(query_set(&nf("b t")), BTreeSet::from([0]));
        // L = {3, 5}, M = {1, 2}
        let n = nf("s^3 b s^-2 t s^-1 s^5 b s^-3 t s^-2");
        assert_eq!(n.beta_indices(), BTreeSet::from([3, 5]));
        assert_eq!(n.tau_indices(), BTreeSet::from([1, 2]));
        assert_eq!(query_set(&n), BTreeSet::from([1, 2, 3, 4]));
        assert!(query_set(&nf("b s b s^-1")).is_empty());
        assert!(query_set(&nf("t")).is_empty());
    }

    #[test]
    fn decide_examples() {
        let o = yes_for(&[0]);
        assert!(decide(&nf("b b"), &o).unwrap().equal_identity);
        let v = decide(&nf("(b t)^3"), &o).unwrap();
        assert!(!v.equal_identity);
        assert!(matches!(v.reason, Reason::OddBeta { x: 0, count: 3 }));
        assert!(decide(&nf("(b t)^6"), &o).unwrap().equal_identity);
        let v = decide(&nf("(b t)^2"), &o).unwrap();
        assert!(matches!(v.reason, Reason::SpecialCell { x: 0, u: 0, .. }));
        let v = decide(&nf("(b t)^2"), &TableOracle::new([(0, false)])).unwrap();
        assert!(v.equal_identity);
        assert!(matches!(
            decide(&nf("b t"), &TableOracle::default()),
            Err(TtError::MissingAnswers(m)) if m == vec![0]
        ));
    }

    #[test]
    fn decide_word_and_pairs() {
        let o = yes_for(&[]);
        let v = decide_word(&w("s"), &o).unwrap();
        assert!(!v.equal_identity);
        assert_eq!(v.reason.rule(), "sigma-exponent");
        let x = w("b s t s^-1 b");
        assert!(decide_pair(&x, &x, &o).unwrap().equal_identity);
        assert!(decide_word(&w("t"), &o).unwrap().reason == Reason::OddTau { u: 0, count: 1 });
    }

    #[test]
    fn m_reduction_shape() {
        assert_eq!(m_reduction_word(0), w("b^-1 t^-1 b t"));
        for x in -5..30 {
            let m = m_reduction_word(x);
            assert_eq!(m.exponent_sum(&Generator::new(SIGMA)), 0);
            assert_eq!(query_set(&to_normal_form(&m).unwrap()), BTreeSet::from([x]));
        }
    }

    #[test]
    fn literal_decider_cases() {
        let o = yes_for(&[0]);
        // β-parity rule fires on odd β_0
        let v = paper_literal_decider(&nf("(b t)^3"), &o).unwrap();
        assert!(matches!(v.reason, Reason::OddBeta { x: 0, count: 3 }));
        let v = paper_literal_decider(&nf("b t"), &o).unwrap();
        assert!(!v.equal_identity);
        // case (2) with a count that is a multiple of 3 and an empty residue
        assert!(paper_literal_decider(&nf("(b t)^6"), &o).unwrap().equal_identity);
        // vacuous for L = ∅
        assert!(paper_literal_decider(&nf("t"), &o).unwrap().equal_identity);
        assert!(!decide(&nf("t"), &o).unwrap().equal_identity);
        // subword counting is not rotation invariant
        let v = paper_literal_decider(&nf("(t b)^6"), &o).unwrap();
        assert!(matches!(v.reason, Reason::LiteralCount { count: 5, .. }));
        assert!(decide(&nf("(t b)^6"), &o).unwrap().equal_identity);
        // case (1)
        let no = TableOracle::new([(0, false)]);
        assert!(paper_literal_decider(&nf("(b t)^2"), &no).unwrap().equal_identity);
        let v = paper_literal_decider(&nf("b t b t t"), &no);
        assert!(!v.unwrap().equal_identity);
    }

    #[test]
    fn brute_force_examples() {
        let coded = CodedSet::new(Schedule::finite([(0, 3), (2, 10)]));
        assert!(brute_force_identity(&Word::empty(), &coded).unwrap());
        for x in 0..40 {
            let expected = coded.contains(x);
            assert_eq!(brute_force_identity(&m_reduction_word(x), &coded).unwrap(), expected, "x={x}");
        }
        assert!(!brute_force_identity(&w("s"), &coded).unwrap());
        assert!(!brute_force_identity(&w("t"), &coded).unwrap());
        assert!(brute_force_identity(&w("(t b)^6"), &coded).unwrap());
    }

    #[test]
    fn cells_form_s3() {
        let a = cell_image(&[Kind::Beta, Kind::Tau]);
        assert_ne!(a, Cell::identity());
        assert_eq!(a.op(&a).op(&a), Cell::identity());
        assert_eq!(a.op(&a.inverse()), Cell::identity());
    }
}
