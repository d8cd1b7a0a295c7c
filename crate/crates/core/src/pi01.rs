//! Π⁰₁ equivalence relations presented by a column function `f`
//! (`x E y ⟺ ∀n f(x,n) = f(y,n)`), the generator triple `σ, τ, α` coding
//! `f`, the terms `t_x`, and bounded checks of `∀n f(x,n)=f(y,n) ⟺ t_x = t_y`.
//!
//! Every affirmative answer here is "up to the bound `N`": the left side is
//! a Π⁰₁ statement, so only refutations are final.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::perms::{
    alpha_with_layout, first_difference, sigma_paired, tau_paired, AlphaLayout, PermError,
    Permutation, Point, Region,
};
use crate::words::{Generator, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: f({x}, {n}) = {value} exceeds {x}")]
    Bound {
        line: usize,
        x: u64,
        n: u64,
        value: u64,
    },
    #[error("missing `default` line")]
    MissingDefault,
}

/// A total `f : ω × ω → ω` that must satisfy `f(x, n) ≤ x`; checked on every
/// evaluation.
#[derive(Clone)]
pub struct ColumnFunction {
    name: Arc<str>,
    f: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
}

impl fmt::Debug for ColumnFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ColumnFunction").field(&self.name).finish()
    }
}

impl ColumnFunction {
    pub fn from_fn<F>(name: &str, f: F) -> Self
    where
        F: Fn(u64, u64) -> u64 + Send + Sync + 'static,
    {
        ColumnFunction {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `f(x, n) = x`: `E` is equality.
    pub fn identity() -> Self {
        ColumnFunction::from_fn("identity", |x, _| x)
    }

    /// `f ≡ 0`: a single class.
    pub fn trivial() -> Self {
        ColumnFunction::from_fn("trivial", |_, _| 0)
    }

    /// `f(x, n) = x mod k`.
    pub fn modulo(k: u64) -> Self {
        assert!(k > 0, "modulus must be positive");
        ColumnFunction::from_fn(&format!("mod-{k}"), move |x, _| x % k)
    }

    pub fn from_table(table: TableFunction) -> Self {
        let name = format!("table[{}]", table.name);
        ColumnFunction::from_fn(&name, move |x, n| table.value(x, n))
    }

    /// `identity`, `trivial`, or `mod:K`.
    pub fn builtin(spec: &str) -> Option<Self> {
        match spec {
            "identity" => Some(ColumnFunction::identity()),
            "trivial" => Some(ColumnFunction::trivial()),
            _ => {
                let k: u64 = spec.strip_prefix("mod:")?.parse().ok()?;
                (k > 0).then(|| ColumnFunction::modulo(k))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: u64, n: u64) -> Result<u64, PermError> {
        let value = (self.f)(x, n);
        if value > x {
            return Err(PermError::BoundViolation {
                name: self.name.to_string(),
                x,
                n,
                value,
            });
        }
        Ok(value)
    }
}

/// The rule used off the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultRule {
    X,
    Zero,
    Mod(u64),
}

impl DefaultRule {
    fn apply(self, x: u64) -> u64 {
        match self {
            DefaultRule::X => x,
            DefaultRule::Zero => 0,
            DefaultRule::Mod(k) => x % k,
        }
    }
}

/// A finite table of `f` values plus a default rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFunction {
    pub name: String,
    entries: HashMap<(u64, u64), u64>,
    default: DefaultRule,
}

impl TableFunction {
    pub fn new(
        name: &str,
        entries: impl IntoIterator<Item = (u64, u64, u64)>,
        default: DefaultRule,
    ) -> Result<Self, TableError> {
        let mut map = HashMap::new();
        for (i, (x, n, value)) in entries.into_iter().enumerate() {
            if value > x {
                return Err(TableError::Bound {
                    line: i + 1,
                    x,
                    n,
                    value,
                });
            }
            map.insert((x, n), value);
        }
        Ok(TableFunction {
            name: name.to_string(),
            entries: map,
            default,
        })
    }

    pub fn value(&self, x: u64, n: u64) -> u64 {
        self.entries
            .get(&(x, n))
            .copied()
            .unwrap_or_else(|| self.default.apply(x))
    }

    /// Parses lines `x n value` and one `default x|0|x mod k` line; `#`
    /// starts a comment. Rows with `value > x` are rejected.
    pub fn parse(name: &str, text: &str) -> Result<Self, TableError> {
        let mut entries = HashMap::new();
        let mut default = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| TableError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            if let Some(rest) = line.strip_prefix("default") {
                let words: Vec<&str> = rest.split_whitespace().collect();
                default = Some(match words.as_slice() {
                    ["x"] => DefaultRule::X,
                    ["0"] => DefaultRule::Zero,
                    ["x", "mod", k] => match k.parse::<u64>() {
                        Ok(k) if k > 0 => DefaultRule::Mod(k),
                        _ => return Err(err("modulus must be a positive integer")),
                    },
                    _ => return Err(err("default must be `x`, `0` or `x mod k`")),
                });
                continue;
            }
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| err("expected natural numbers"))?;
            let [x, n, value] = nums[..] else {
                return Err(err("expected `x n value`"));
            };
            if value > x {
                return Err(TableError::Bound {
                    line: i + 1,
                    x,
                    n,
                    value,
                });
            }
            entries.insert((x, n), value);
        }
        Ok(TableFunction {
            name: name.to_string(),
            entries,
            default: default.ok_or(TableError::MissingDefault)?,
        })
    }
}

/// `f(x, n) = f(y, n)` for all `n ≤ bound`.
pub fn relation_holds_bounded(
    f: &ColumnFunction,
    x: u64,
    y: u64,
    bound: u64,
) -> Result<bool, PermError> {
    Ok(first_disagreement(f, x, y, bound)?.is_none())
}

/// Smallest `n ≤ bound` with `f(x, n) ≠ f(y, n)`, with both values.
pub fn first_disagreement(
    f: &ColumnFunction,
    x: u64,
    y: u64,
    bound: u64,
) -> Result<Option<FWitness>, PermError> {
    for n in 0..=bound {
        let (fx, fy) = (f.eval(x, n)?, f.eval(y, n)?);
        if fx != fy {
            return Ok(Some(FWitness { n, fx, fy }));
        }
    }
    Ok(None)
}

pub const ALPHA: &str = "a";
pub const SIGMA: &str = "s";
pub const TAU: &str = "t";

/// The group generated by `σ` (paired shift), `τ` (swap of columns 0, 1) and
/// `α` coding `f`.
#[derive(Clone, Debug)]
pub struct CodedGroup {
    f: ColumnFunction,
    layout: AlphaLayout,
    sigma: Permutation,
    tau: Permutation,
    alpha: Permutation,
}

impl CodedGroup {
    pub fn new(f: ColumnFunction, layout: AlphaLayout) -> Self {
        CodedGroup {
            alpha: alpha_with_layout(f.clone(), layout),
            sigma: sigma_paired(),
            tau: tau_paired(),
            f,
            layout,
        }
    }

    pub fn f(&self) -> &ColumnFunction {
        &self.f
    }

    pub fn layout(&self) -> AlphaLayout {
        self.layout
    }

    pub fn alpha(&self) -> &Permutation {
        &self.alpha
    }

    pub fn assignment(&self) -> HashMap<Generator, Permutation> {
        HashMap::from([
            (Generator::new(ALPHA), self.alpha.clone()),
            (Generator::new(SIGMA), self.sigma.clone()),
            (Generator::new(TAU), self.tau.clone()),
        ])
    }

    /// The permutation a word over `{a, s, t}` denotes.
    pub fn evaluate(&self, w: &Word) -> Result<Permutation, crate::words::WordError> {
        w.evaluate(&self.assignment())
    }
}

/// `t_x = Cj(α, σ^{-x}) τ Cj(α^{-1}, σ^{-x})` over `{a, s, t}`.
pub fn term_t(x: u64) -> Word {
    let conj = Word::gen(SIGMA).pow(-(x as i64));
    let a = Word::gen(ALPHA);
    a.conjugate(&conj)
        .concat(&Word::gen(TAU))
        .concat(&a.invert().conjugate(&conj))
        .free_reduce()
}

/// What the cancellation analysis says `t_x` does to `pt`: columns other
/// than 0 and 1 are fixed, `⟨0, y⟩ ↦ ⟨1, α_x(y)⟩`, `⟨1, y⟩ ↦ ⟨0, α_x⁻¹(y)⟩`.
pub fn predicted_t_action(group: &CodedGroup, x: u64, pt: Point) -> Result<Point, PermError> {
    let column = 2 * x as i64;
    match pt.column {
        0 => Ok(Point::new(1, group.alpha.apply(Point::new(column, pt.row))?.row)),
        1 => Ok(Point::new(
            0,
            group.alpha.apply_inverse(Point::new(column, pt.row))?.row,
        )),
        _ => Ok(pt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FWitness {
    pub n: u64,
    pub fx: u64,
    pub fy: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointWitness {
    pub point: Point,
    pub image_x: Point,
    pub image_y: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeReport {
    pub x: u64,
    pub y: u64,
    pub bound: u64,
    pub layout: AlphaLayout,
    pub region: Region,
    /// `f(x, n) = f(y, n)` for all `n ≤ bound`.
    pub f_agree: bool,
    pub f_witness: Option<FWitness>,
    /// `t_x` and `t_y` agree on `region`.
    pub perm_agree: bool,
    pub perm_witness: Option<PointWitness>,
    pub consistent: bool,
}

/// The witness region for a pair: columns `[0, 1]`, rows
/// `[0, (bound+1)(max(x,y)+1)]`.
pub fn witness_region(x: u64, y: u64, bound: u64) -> Region {
    Region {
        cmin: 0,
        cmax: 1,
        rmax: (bound + 1) * (x.max(y) + 1),
    }
}

/// Evaluates both sides of `∀n f(x,n)=f(y,n) ⟺ t_x = t_y` at bound `N`.
pub fn verify_code_equation(
    group: &CodedGroup,
    x: u64,
    y: u64,
    bound: u64,
) -> Result<CodeReport, PermError> {
    let region = witness_region(x, y, bound);
    let f_witness = first_disagreement(&group.f, x, y, bound)?;
    let tx = group.evaluate(&term_t(x)).expect("t_x is over {a, s, t}");
    let ty = group.evaluate(&term_t(y)).expect("t_y is over {a, s, t}");
    let perm_witness = first_difference(&tx, &ty, &region)?.map(|(point, image_x, image_y)| {
        PointWitness {
            point,
            image_x,
            image_y,
        }
    });
    Ok(code_report(group, x, y, bound, region, f_witness, perm_witness))
}

fn code_report(
    group: &CodedGroup,
    x: u64,
    y: u64,
    bound: u64,
    region: Region,
    f_witness: Option<FWitness>,
    perm_witness: Option<PointWitness>,
) -> CodeReport {
    let f_agree = f_witness.is_none();
    let perm_agree = perm_witness.is_none();
    CodeReport {
        x,
        y,
        bound,
        layout: group.layout,
        region,
        f_agree,
        f_witness,
        perm_agree,
        perm_witness,
        consistent: f_agree == perm_agree,
    }
}

/// Images of every point of columns `[0, 1]` × rows `[0, rmax]` under `t_x`,
/// one table per `x ≤ max_x`, evaluated through the raw permutations.
///
/// Lets a sweep over all pairs reuse one evaluation per `x`; the per-pair
/// reports are the ones [`verify_code_equation`] produces.
pub struct TermImages {
    rmax: u64,
    images: Vec<Vec<Point>>,
}

impl TermImages {
    pub fn compute(group: &CodedGroup, max_x: u64, bound: u64) -> Result<Self, PermError> {
        let rmax = (bound + 1) * (max_x + 1);
        let region = Region {
            cmin: 0,
            cmax: 1,
            rmax,
        };
        let images = (0..=max_x)
            .map(|x| {
                let t = group.evaluate(&term_t(x)).expect("t_x is over {a, s, t}");
                region.points().map(|p| t.apply(p)).collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(TermImages { rmax, images })
    }

    fn image(&self, x: u64, p: Point) -> Point {
        let idx = p.column as u64 * (self.rmax + 1) + p.row;
        self.images[x as usize][idx as usize]
    }

    /// Same report as [`verify_code_equation`] for `x, y ≤ max_x`.
    pub fn report(
        &self,
        group: &CodedGroup,
        x: u64,
        y: u64,
        bound: u64,
    ) -> Result<CodeReport, PermError> {
        let region = witness_region(x, y, bound);
        assert!(region.rmax <= self.rmax, "pair outside the precomputed window");
        let f_witness = first_disagreement(&group.f, x, y, bound)?;
        let perm_witness = region.points().find_map(|p| {
            let (a, b) = (self.image(x, p), self.image(y, p));
            (a != b).then_some(PointWitness {
                point: p,
                image_x: a,
                image_y: b,
            })
        });
        Ok(code_report(group, x, y, bound, region, f_witness, perm_witness))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionViolation {
    pub x: u64,
    pub y: u64,
    /// `x E y` up to the bound.
    pub related: bool,
    /// The images are equal on the comparison region.
    pub images_equal: bool,
    pub point: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub bound: u64,
    pub pairs_checked: usize,
    pub violations: Vec<ReductionViolation>,
}

/// Bounded check that `x ↦ candidate(x)` reduces `E` to the word problem:
/// `x E y ⟺ candidate(x) = candidate(y)` on every sampled pair.
///
/// Images are compared on columns `[-2, 2·max+3]` × rows
/// `[0, (N+1)(max+1)]`, where `max` is the larger element of the pair.
pub fn reduction_check(
    group: &CodedGroup,
    candidate: &dyn Fn(u64) -> Word,
    sample: &[(u64, u64)],
    bound: u64,
) -> Result<ReductionReport, crate::Error> {
    let mut cache: HashMap<u64, Permutation> = HashMap::new();
    let mut image = |x: u64| -> Result<Permutation, crate::Error> {
        if let Some(p) = cache.get(&x) {
            return Ok(p.clone());
        }
        let p = group.evaluate(&candidate(x))?;
        cache.insert(x, p.clone());
        Ok(p)
    };
    let mut violations = Vec::new();
    for &(x, y) in sample {
        let related = relation_holds_bounded(&group.f, x, y, bound)?;
        let m = x.max(y);
        let region = Region::new(-2, 2 * m as i64 + 3, (bound + 1) * (m + 1))?;
        let diff = first_difference(&image(x)?, &image(y)?, &region)?;
        let images_equal = diff.is_none();
        if related != images_equal {
            violations.push(ReductionViolation {
                x,
                y,
                related,
                images_equal,
                point: diff.map(|d| d.0),
            });
        }
    }
    Ok(ReductionReport {
        bound,
        pairs_checked: sample.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn staircase() -> ColumnFunction {
        ColumnFunction::from_fn("staircase", |x, n| if n < x { 0 } else { x })
    }

    #[test]
    fn bounded_relation_examples() {
        let id = ColumnFunction::identity();
        assert!(relation_holds_bounded(&id, 3, 3, 10).unwrap());
        assert!(!relation_holds_bounded(&id, 3, 4, 0).unwrap());
        let f = staircase();
        assert!(relation_holds_bounded(&f, 2, 3, 1).unwrap());
        assert!(!relation_holds_bounded(&f, 2, 3, 3).unwrap());
        assert_eq!(
            first_disagreement(&f, 2, 3, 3).unwrap(),
            Some(FWitness { n: 2, fx: 2, fy: 0 })
        );
        let bad = ColumnFunction::from_fn("bad", |x, _| x + 1);
        assert!(matches!(
            relation_holds_bounded(&bad, 1, 1, 0),
            Err(PermError::BoundViolation { x: 1, n: 0, .. })
        ));
    }

    #[test]
    fn terms() {
        assert_eq!(term_t(0), parse_word("a t a^-1").unwrap());
        assert_eq!(term_t(1), parse_word("s a s^-1 t s a^-1 s^-1").unwrap());
        let s = Generator::new(SIGMA);
        let a = Generator::new(ALPHA);
        for x in 0..20 {
            assert_eq!(term_t(x).exponent_sum(&s), 0);
            assert_eq!(term_t(x).exponent_sum(&a), 0);
        }
    }

    #[test]
    fn predicted_action_examples() {
        let g = CodedGroup::new(ColumnFunction::trivial(), AlphaLayout::Blocked);
        assert_eq!(predicted_t_action(&g, 3, Point::new(5, 9)).unwrap(), Point::new(5, 9));
        assert_eq!(predicted_t_action(&g, 3, Point::new(0, 9)).unwrap(), Point::new(1, 9));

        let f = ColumnFunction::from_fn("f21", |x, n| u64::from(x == 2 && n == 1));
        let g = CodedGroup::new(f, AlphaLayout::Blocked);
        let predicted = predicted_t_action(&g, 2, Point::new(0, 3)).unwrap();
        assert_eq!(predicted, Point::new(1, 4));
        let actual = g.evaluate(&term_t(2)).unwrap().apply(Point::new(0, 3)).unwrap();
        assert_eq!(actual, predicted);
    }

    #[test]
    fn code_equation_examples() {
        let id = CodedGroup::new(ColumnFunction::identity(), AlphaLayout::Blocked);
        let same = verify_code_equation(&id, 3, 3, 8).unwrap();
        assert!(same.f_agree && same.perm_agree && same.consistent);

        let r = verify_code_equation(&id, 1, 2, 0).unwrap();
        assert_eq!(r.f_witness, Some(FWitness { n: 0, fx: 1, fy: 2 }));
        let w = r.perm_witness.expect("permutations differ");
        assert_eq!(w.point.column, 0);
        assert!(r.consistent);

        let triv = CodedGroup::new(ColumnFunction::trivial(), AlphaLayout::Blocked);
        for (x, y) in [(0, 5), (2, 7), (4, 4)] {
            let r = verify_code_equation(&triv, x, y, 6).unwrap();
            assert!(r.f_agree && r.perm_agree);
        }
    }

    /// `f = x mod 2` relates 1 and 3, but the blocked layout puts the
    /// cycles of column 2 and column 6 at different rows.
    #[test]
    fn blocked_layout_breaks_the_coding_for_equivalent_columns() {
        let blocked = CodedGroup::new(ColumnFunction::modulo(2), AlphaLayout::Blocked);
        let r = verify_code_equation(&blocked, 1, 3, 4).unwrap();
        assert!(r.f_agree);
        assert!(!r.perm_agree);
        assert_eq!(r.perm_witness.unwrap().point, Point::new(0, 2));

        let packed = CodedGroup::new(ColumnFunction::modulo(2), AlphaLayout::Packed);
        let r = verify_code_equation(&packed, 1, 3, 4).unwrap();
        assert!(r.f_agree && r.perm_agree && r.consistent);
    }

    #[test]
    fn term_images_match_direct_reports() {
        for layout in [AlphaLayout::Blocked, AlphaLayout::Packed] {
            let g = CodedGroup::new(ColumnFunction::modulo(3), layout);
            let table = TermImages::compute(&g, 6, 5).unwrap();
            for x in 0..=6 {
                for y in 0..=6 {
                    assert_eq!(
                        table.report(&g, x, y, 5).unwrap(),
                        verify_code_equation(&g, x, y, 5).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn reduction_examples() {
        let id = CodedGroup::new(ColumnFunction::identity(), AlphaLayout::Blocked);
        let pairs: Vec<(u64, u64)> = (0..=5).flat_map(|i| (0..=5).map(move |j| (i, j))).collect();
        let r = reduction_check(&id, &term_t, &pairs, 16).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);

        let constant = |_: u64| Word::empty();
        let r = reduction_check(&id, &constant, &pairs, 16).unwrap();
        assert_eq!((r.violations[0].x, r.violations[0].y), (0, 1));

        let triv = CodedGroup::new(ColumnFunction::trivial(), AlphaLayout::Blocked);
        assert!(reduction_check(&triv, &constant, &pairs, 4).unwrap().violations.is_empty());
        assert!(reduction_check(&triv, &term_t, &pairs, 4).unwrap().violations.is_empty());
        let distinct = |x: u64| Word::gen(SIGMA).pow(x as i64);
        assert!(!reduction_check(&triv, &distinct, &pairs, 4).unwrap().violations.is_empty());
    }

    #[test]
    fn table_parsing() {
        let t = TableFunction::parse("t", "# demo\n2 1 1\n5 0 3\ndefault x mod 3\n").unwrap();
        assert_eq!(t.value(2, 1), 1);
        assert_eq!(t.value(5, 0), 3);
        assert_eq!(t.value(5, 1), 2);
        assert!(matches!(
            TableFunction::parse("t", "2 0 3\ndefault 0\n"),
            Err(TableError::Bound { line: 1, x: 2, n: 0, value: 3 })
        ));
        assert_eq!(TableFunction::parse("t", "1 0 0\n"), Err(TableError::MissingDefault));
        assert!(TableFunction::parse("t", "default y\n").is_err());
        assert!(TableFunction::parse("t", "1 2\ndefault 0\n").is_err());
        assert!(ColumnFunction::builtin("mod:4").is_some());
        assert!(ColumnFunction::builtin("mod:0").is_none());
        assert!(ColumnFunction::builtin("bogus").is_none());
    }
}
