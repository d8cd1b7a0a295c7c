//! Finite presentations, abelianization via Smith normal form, and the
//! strong diagonal function for isomorphism of finite presentations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::words::{parse_word, Generator, Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("line {line}: {source}")]
    Relator { line: usize, source: WordError },
    #[error("relator {relator} uses {generator}, which is not a generator")]
    UnknownGenerator { relator: usize, generator: Generator },
    #[error("generator {0} listed twice")]
    DuplicateGenerator(String),
    #[error("bad generator name {0:?}")]
    BadName(String),
}

/// `⟨x₁, …, x_n ; r₁, …, r_k⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, PresentationError> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            let valid = g.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && g.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(PresentationError::BadName(g.clone()));
            }
            if !seen.insert(g.as_str()) {
                return Err(PresentationError::DuplicateGenerator(g.clone()));
            }
        }
        for (i, r) in relators.iter().enumerate() {
            for l in r.letters() {
                let known = l.generator.index().is_none() && seen.contains(l.generator.name());
                if !known {
                    return Err(PresentationError::UnknownGenerator {
                        relator: i,
                        generator: l.generator.clone(),
                    });
                }
            }
        }
        Ok(Presentation {
            generators,
            relators,
        })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// First line: generator names. Every further nonblank line: one relator.
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        let mut lines = text.lines().enumerate();
        let generators = lines
            .next()
            .map(|(_, l)| l.split_whitespace().map(str::to_string).collect())
            .unwrap_or_default();
        let mut relators = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            relators.push(
                parse_word(line).map_err(|source| PresentationError::Relator { line: i + 1, source })?,
            );
        }
        Presentation::new(generators, relators)
    }
}

impl fmt::Display for Presentation {
    /// The file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.generators.join(" "))?;
        for r in &self.relators {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Adds `[x_i, x_j]` for all `i < j`.
pub fn abelianize(p: &Presentation) -> Presentation {
    let mut relators = p.relators.clone();
    let gens = &p.generators;
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            relators.push(Word::commutator(&Word::gen(&gens[i]), &Word::gen(&gens[j])));
        }
    }
    Presentation {
        generators: gens.clone(),
        relators,
    }
}

/// A dense matrix of unbounded integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntegerMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(cols: usize, rows: &[Vec<i64>]) -> Self {
        let mut m = IntegerMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, BigInt::from(v));
            }
        }
        m
    }

    pub fn diag(rows: usize, cols: usize, entries: &[i64]) -> Self {
        let mut m = IntegerMatrix::zeros(rows, cols);
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, BigInt::from(v));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntegerMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += factor · row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(dst, j) + factor * self.get(src, j);
            self.set(dst, j, v);
        }
    }

    /// col[dst] += factor · col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, dst) + factor * self.get(i, src);
            self.set(i, dst, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// `D = U·M·V` with `D` diagonal, `d₁ | d₂ | …`, all `dᵢ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub d: IntegerMatrix,
    pub u: Option<IntegerMatrix>,
    pub v: Option<IntegerMatrix>,
}

/// Smith normal form by unimodular row and column operations, pivoting on
/// an entry of least absolute value.
pub fn smith_normal_form(m: &IntegerMatrix, want_transforms: bool) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = want_transforms.then(|| IntegerMatrix::identity(rows));
    let mut v = want_transforms.then(|| IntegerMatrix::identity(cols));

    'outer: for k in 0..rows.min(cols) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    let e = d.get(i, j);
                    if !e.is_zero() && pivot.is_none_or(|(pi, pj)| e.abs() < d.get(pi, pj).abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                break 'outer;
            };
            d.swap_rows(k, pi);
            if let Some(u) = u.as_mut() {
                u.swap_rows(k, pi);
            }
            d.swap_cols(k, pj);
            if let Some(v) = v.as_mut() {
                v.swap_cols(k, pj);
            }

            let p = d.get(k, k).clone();
            let mut clean = true;
            for i in k + 1..rows {
                let q = -(d.get(i, k) / &p);
                if !q.is_zero() {
                    d.add_row(i, k, &q);
                    if let Some(u) = u.as_mut() {
                        u.add_row(i, k, &q);
                    }
                }
                clean &= d.get(i, k).is_zero();
            }
            for j in k + 1..cols {
                let q = -(d.get(k, j) / &p);
                if !q.is_zero() {
                    d.add_col(j, k, &q);
                    if let Some(v) = v.as_mut() {
                        v.add_col(j, k, &q);
                    }
                }
                clean &= d.get(k, j).is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (k + 1..rows)
                .find(|&i| (k + 1..cols).any(|j| !d.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row(k, i, &one);
                    if let Some(u) = u.as_mut() {
                        u.add_row(k, i, &one);
                    }
                }
                None => break,
            }
        }
        if d.get(k, k).sign() == Sign::Minus {
            d.negate_row(k);
            if let Some(u) = u.as_mut() {
                u.negate_row(k);
            }
        }
    }
    SmithForm { d, u, v }
}

/// One row per relator with a nonzero exponent-sum vector, one column per
/// generator. Relators with all sums zero (commutators among them) add
/// nothing to the abelianization and are omitted.
pub fn relation_matrix(p: &Presentation) -> IntegerMatrix {
    let gens: Vec<Generator> = p.generators.iter().map(|g| Generator::new(g.as_str())).collect();
    let rows: Vec<Vec<i64>> = p
        .relators
        .iter()
        .map(|r| gens.iter().map(|g| r.exponent_sum(g)).collect::<Vec<i64>>())
        .filter(|row| row.iter().any(|&e| e != 0))
        .collect();
    IntegerMatrix::from_rows(gens.len(), &rows)
}

/// `ℤ^free_rank ⊕ ℤ/d₁ ⊕ … ⊕ ℤ/d_k` with `1 < d₁ | d₂ | … | d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_factors")]
    pub invariant_factors: Vec<BigUint>,
}

fn serialize_factors<S: Serializer>(factors: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(factors.len()))?;
    for d in factors {
        match d.to_u64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&d.to_string())?,
        }
    }
    seq.end()
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 {
                "Z".to_string()
            } else {
                format!("Z^{}", self.free_rank)
            });
        }
        parts.extend(self.invariant_factors.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" x "))
        }
    }
}

pub fn abelian_invariants(p: &Presentation) -> AbelianInvariants {
    let snf = smith_normal_form(&relation_matrix(p), false);
    let diag = snf.d.diagonal();
    let nonzero = diag.iter().filter(|d| !d.is_zero()).count();
    AbelianInvariants {
        free_rank: p.generators.len() - nonzero,
        invariant_factors: diag
            .iter()
            .filter(|d| d > &&BigInt::one())
            .map(|d| d.magnitude().clone())
            .collect(),
    }
}

/// Isomorphism of the abelianizations.
pub fn abelian_iso(p: &Presentation, q: &Presentation) -> bool {
    abelian_invariants(p) == abelian_invariants(q)
}

/// Name given to generator `g` of the `u`-th input (1-based).
pub fn renamed(u: usize, g: &str) -> String {
    format!("g{u}_{g}")
}

pub const FRESH_GENERATOR: &str = "z";

/// The presentation of `ℤ × ∏ (G_u)_ab`: all inputs' generators renamed
/// apart, their relators, a fresh generator `z`, and every commutator of
/// two generators.
pub fn strong_diagonal(presentations: &[Presentation]) -> Presentation {
    let mut generators = Vec::new();
    let mut relators = Vec::new();
    for (i, p) in presentations.iter().enumerate() {
        let names: HashMap<&str, String> = p
            .generators
            .iter()
            .map(|g| (g.as_str(), renamed(i + 1, g)))
            .collect();
        generators.extend(p.generators.iter().map(|g| names[g.as_str()].clone()));
        relators.extend(p.relators.iter().map(|r| {
            Word::new(
                r.letters()
                    .iter()
                    .map(|l| Letter::new(Generator::new(names[l.generator.name()].as_str()), l.inverse))
                    .collect(),
            )
        }));
    }
    generators.push(FRESH_GENERATOR.to_string());
    abelianize(&Presentation {
        generators,
        relators,
    })
}

/// Whether every `[x_i, x_j]` (or its inverse) is literally a relator, so
/// the group is abelian on its face.
pub fn visibly_abelian(p: &Presentation) -> bool {
    let rels: BTreeSet<String> = p.relators.iter().map(|r| r.free_reduce().to_string()).collect();
    let gens = &p.generators;
    (0..gens.len()).all(|i| {
        (i + 1..gens.len()).all(|j| {
            let c = Word::commutator(&Word::gen(&gens[i]), &Word::gen(&gens[j]));
            rels.contains(&c.to_string()) || rels.contains(&c.invert().to_string())
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalEntry {
    pub index: usize,
    pub input: AbelianInvariants,
    /// `rank(δ(S)) > rank((G_u)_ab)`.
    pub rank_exceeds: bool,
    /// `δ(S)_ab ≅ (G_u)_ab`; must be false.
    pub abelian_iso: bool,
    /// If `G_u` is not abelian it differs from the abelian `δ(S)` outright;
    /// this records whether `G_u` is abelian on its face.
    pub visibly_abelian: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalReport {
    pub passed: bool,
    pub output: AbelianInvariants,
    pub entries: Vec<DiagonalEntry>,
}

/// Checks `δ(S) ∉ [S]` at the level of abelian invariants.
pub fn diagonal_check(delta: &Presentation, presentations: &[Presentation]) -> DiagonalReport {
    let output = abelian_invariants(delta);
    let entries: Vec<DiagonalEntry> = presentations
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let ab = abelianize(p);
            let input = abelian_invariants(&ab);
            DiagonalEntry {
                index,
                rank_exceeds: output.free_rank > input.free_rank,
                abelian_iso: output == input,
                input,
                visibly_abelian: visibly_abelian(p),
            }
        })
        .collect();
    DiagonalReport {
        passed: entries.iter().all(|e| e.rank_exceeds && !e.abelian_iso),
        output,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(text: &str) -> Presentation {
        Presentation::parse(text).unwrap()
    }

    fn factors(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&d| BigUint::from(d)).collect()
    }

    #[test]
    fn abelianize_examples() {
        assert_eq!(abelianize(&pres("x\n")).relators().len(), 0);
        let ab = abelianize(&pres("a b\n"));
        assert_eq!(ab.relators(), &[parse_word("a^-1 b^-1 a b").unwrap()]);
        assert_eq!(abelianize(&pres("a b c d e\n")).relators().len(), 10);
    }

    #[test]
    fn relation_matrices() {
        assert_eq!(relation_matrix(&pres("x\nx^2\n")), IntegerMatrix::from_rows(1, &[vec![2]]));
        assert_eq!(
            relation_matrix(&pres("a b\na^2 b^-1\n")),
            IntegerMatrix::from_rows(2, &[vec![2, -1]])
        );
        assert_eq!(relation_matrix(&abelianize(&pres("a b\n"))).rows(), 0);
    }

    #[test]
    fn snf_examples() {
        let s = smith_normal_form(&IntegerMatrix::diag(2, 2, &[2, 3]), true);
        assert_eq!(s.d, IntegerMatrix::diag(2, 2, &[1, 6]));
        let z = IntegerMatrix::zeros(2, 3);
        assert_eq!(smith_normal_form(&z, false).d, z);
        let m = IntegerMatrix::from_rows(2, &[vec![2, 4], vec![4, 8]]);
        let s = smith_normal_form(&m, true);
        assert_eq!(s.d, IntegerMatrix::diag(2, 2, &[2, 0]));
        let (u, v) = (s.u.unwrap(), s.v.unwrap());
        assert_eq!(u.mul(&m).mul(&v), s.d);
        assert_eq!(u.determinant().abs(), BigInt::one());
        assert_eq!(v.determinant().abs(), BigInt::one());
    }

    #[test]
    fn determinants() {
        let m = IntegerMatrix::from_rows(3, &[vec![0, 2, 1], vec![3, -1, 4], vec![5, 9, -2]]);
        // expanded by hand along the first row
        assert_eq!(m.determinant(), BigInt::from(-2 * (-6 - 20) + (27 + 5)));
        assert_eq!(IntegerMatrix::zeros(0, 0).determinant(), BigInt::one());
        let singular = IntegerMatrix::from_rows(2, &[vec![1, 2], vec![2, 4]]);
        assert!(singular.determinant().is_zero());
    }

    #[test]
    fn invariants_examples() {
        let i = abelian_invariants(&pres("x\nx^2\n"));
        assert_eq!((i.free_rank, i.invariant_factors.clone()), (0, factors(&[2])));
        assert_eq!(abelian_invariants(&pres("a b\n")).free_rank, 2);
        let i = abelian_invariants(&pres("a b\na^2 b^-1\n"));
        assert_eq!((i.free_rank, i.invariant_factors.len()), (1, 0));
        assert_eq!(i.to_string(), "Z");
    }

    #[test]
    fn iso_examples() {
        let p = pres("a b\na^2\nb^3\n");
        assert!(abelian_iso(&p, &p));
        assert!(abelian_iso(&p, &pres("c\nc^6\n")));
        assert!(!abelian_iso(&pres("a\n"), &pres("a b\n")));
    }

    #[test]
    fn strong_diagonal_examples() {
        let d = strong_diagonal(&[]);
        assert_eq!(d.generators(), &["z".to_string()]);
        assert_eq!(abelian_invariants(&d).free_rank, 1);

        let s = [pres("a\n")];
        let d = strong_diagonal(&s);
        assert_eq!(abelian_invariants(&d).free_rank, 2);
        let r = diagonal_check(&d, &s);
        assert!(r.passed);
        assert_eq!(r.entries[0].input.free_rank, 1);

        let s = [pres("x\nx^2\n"), pres("a\n")];
        let d = strong_diagonal(&s);
        assert_eq!(d.generators(), &["g1_x", "g2_a", "z"]);
        let inv = abelian_invariants(&d);
        assert_eq!((inv.free_rank, inv.invariant_factors), (2, factors(&[2])));
        for p in &s {
            assert!(!abelian_iso(&d, &abelianize(p)));
        }
        assert!(diagonal_check(&strong_diagonal(&[]), &[]).passed);
    }

    #[test]
    fn presentation_validation() {
        assert!(matches!(
            Presentation::parse("a\nb\n"),
            Err(PresentationError::UnknownGenerator { .. })
        ));
        assert!(matches!(
            Presentation::parse("a a\n"),
            Err(PresentationError::DuplicateGenerator(_))
        ));
        assert!(matches!(
            Presentation::parse("a\na^\n"),
            Err(PresentationError::Relator { line: 2, .. })
        ));
        let p = pres("a b\na^2 b\n\nb^3\n");
        assert_eq!(Presentation::parse(&p.to_string()).unwrap(), p);
        assert!(visibly_abelian(&abelianize(&p)));
        assert!(!visibly_abelian(&p));
    }
}
