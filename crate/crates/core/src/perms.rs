//! Computable permutations of the lattice `ℤ × ω`.
//!
//! A [`Permutation`] carries its forward and backward maps explicitly, so
//! inverses never need search. Products are lazy: `p.compose(&q)` is the map
//! `s ↦ q(p(s))`, i.e. `p` acts first, matching the convention under which
//! words are evaluated left to right.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coener::{InjectiveCoder, StepEnumerator};
use crate::pi01::ColumnFunction;
use crate::words::GroupElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("column function {name}: f({x}, {n}) = {value} exceeds {x}")]
    BoundViolation {
        name: String,
        x: u64,
        n: u64,
        value: u64,
    },
    #[error("empty region: columns [{cmin}, {cmax}]")]
    EmptyRegion { cmin: i64, cmax: i64 },
}

/// A lattice point `⟨column, row⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    #[serde(rename = "col")]
    pub column: i64,
    pub row: u64,
}

impl Point {
    pub const fn new(column: i64, row: u64) -> Self {
        Point { column, row }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.column, self.row)
    }
}

/// Columns `[cmin, cmax]` × rows `[0, rmax]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub cmin: i64,
    pub cmax: i64,
    pub rmax: u64,
}

impl Region {
    pub fn new(cmin: i64, cmax: i64, rmax: u64) -> Result<Self, PermError> {
        if cmin > cmax {
            return Err(PermError::EmptyRegion { cmin, cmax });
        }
        Ok(Region { cmin, cmax, rmax })
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (self.cmin..=self.cmax)
            .flat_map(move |c| (0..=self.rmax).map(move |r| Point::new(c, r)))
    }

    pub fn len(&self) -> u64 {
        (self.cmax - self.cmin + 1) as u64 * (self.rmax + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

type PointMap = Arc<dyn Fn(Point) -> Result<Point, PermError> + Send + Sync>;

#[derive(Clone)]
pub struct Permutation {
    forward: PointMap,
    backward: PointMap,
    label: Arc<str>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Permutation").field(&self.label).finish()
    }
}

impl Permutation {
    /// Builds a permutation from a map and its inverse. The caller is
    /// responsible for the two being mutually inverse.
    pub fn from_maps<F, B>(label: &str, forward: F, backward: B) -> Self
    where
        F: Fn(Point) -> Result<Point, PermError> + Send + Sync + 'static,
        B: Fn(Point) -> Result<Point, PermError> + Send + Sync + 'static,
    {
        Permutation {
            forward: Arc::new(forward),
            backward: Arc::new(backward),
            label: label.into(),
        }
    }

    /// An infallible self-inverse map.
    fn involution<F>(label: &str, f: F) -> Self
    where
        F: Fn(Point) -> Point + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let g = Arc::clone(&f);
        Permutation::from_maps(label, move |p| Ok(f(p)), move |p| Ok(g(p)))
    }

    pub fn identity() -> Self {
        Permutation::involution("id", |p| p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, p: Point) -> Result<Point, PermError> {
        (self.forward)(p)
    }

    pub fn apply_inverse(&self, p: Point) -> Result<Point, PermError> {
        (self.backward)(p)
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            forward: Arc::clone(&self.backward),
            backward: Arc::clone(&self.forward),
            label: format!("({})⁻¹", self.label).into(),
        }
    }

    /// The product in which `self` acts first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let (f1, f2) = (Arc::clone(&self.forward), Arc::clone(&other.forward));
        let (b1, b2) = (Arc::clone(&self.backward), Arc::clone(&other.backward));
        Permutation {
            forward: Arc::new(move |p| f2(f1(p)?)),
            backward: Arc::new(move |p| b1(b2(p)?)),
            label: format!("{}·{}", self.label, other.label).into(),
        }
    }
}

impl GroupElement for Permutation {
    fn identity() -> Self {
        Permutation::identity()
    }

    fn op(&self, other: &Self) -> Self {
        self.compose(other)
    }

    fn inverse(&self) -> Self {
        Permutation::inverse(self)
    }
}

/// Shifts column `2x+i` to `2x+2+i`.
pub fn sigma_paired() -> Permutation {
    Permutation::from_maps(
        "σ₂",
        |p| Ok(Point::new(p.column + 2, p.row)),
        |p| Ok(Point::new(p.column - 2, p.row)),
    )
}

/// Exchanges columns 0 and 1.
pub fn tau_paired() -> Permutation {
    Permutation::involution("τ₂", |p| match p.column {
        0 => Point::new(1, p.row),
        1 => Point::new(0, p.row),
        _ => p,
    })
}

/// Shifts every column by one.
pub fn sigma_line() -> Permutation {
    Permutation::from_maps(
        "σ",
        |p| Ok(Point::new(p.column + 1, p.row)),
        |p| Ok(Point::new(p.column - 1, p.row)),
    )
}

/// The 2-cycles `(⟨0, 3t+1⟩ ⟨0, 3t+2⟩)`.
pub fn tau_triples() -> Permutation {
    Permutation::involution("τ", |p| {
        if p.column != 0 {
            return p;
        }
        match p.row % 3 {
            1 => Point::new(0, p.row + 1),
            2 => Point::new(0, p.row - 1),
            _ => p,
        }
    })
}

/// The 2-cycles `(⟨g(t), 3t⟩ ⟨g(t), 3t+1⟩)`. Whether `⟨x, r⟩` moves is a
/// single graph query `g(⌊r/3⌋) = x`.
pub fn beta_from_g(g: InjectiveCoder) -> Permutation {
    Permutation::involution("β", move |p| {
        if p.column < 0 || p.row % 3 == 2 {
            return p;
        }
        let t = p.row / 3;
        if !g.graph(t, p.column as u64) {
            return p;
        }
        if p.row % 3 == 0 {
            Point::new(p.column, p.row + 1)
        } else {
            Point::new(p.column, p.row - 1)
        }
    })
}

/// How `α` lays out the cycles coding `f(x, ·)` in column `2x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaLayout {
    /// Block `n` is rows `[n(x+1), (n+1)(x+1) - 1]`; the orbit of its first
    /// row has `f(x, n) + 1` points.
    #[default]
    Blocked,
    /// Block `n` starts right after block `n - 1` and has exactly
    /// `f(x, n) + 1` rows, all in one cycle. The layout depends only on the
    /// sequence `f(x, ·)`, not on `x`.
    Packed,
}

impl fmt::Display for AlphaLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaLayout::Blocked => "blocked",
            AlphaLayout::Packed => "packed",
        })
    }
}

/// `α` for the column function `f`, laid out in blocks of `x + 1` rows:
///
/// ```text
/// α⟨2x, n(x+1)+k⟩ = ⟨2x, n(x+1)+k+1⟩   if k < f(x,n)
///                 = ⟨2x, n(x+1)⟩       if k = f(x,n)
///                 = ⟨2x, n(x+1)+k⟩     otherwise
/// ```
///
/// Odd and negative columns are fixed. `f` is validated lazily, per query.
pub fn alpha_from_f(f: ColumnFunction) -> Permutation {
    let fb = f.clone();
    Permutation::from_maps(
        &format!("α[{}]", f.name()),
        move |p| {
            let Some(x) = alpha_column(p) else {
                return Ok(p);
            };
            let size = x + 1;
            let (n, k) = (p.row / size, p.row % size);
            let v = f.eval(x, n)?;
            Ok(if k < v {
                Point::new(p.column, p.row + 1)
            } else if k == v {
                Point::new(p.column, p.row - k)
            } else {
                p
            })
        },
        move |p| {
            let Some(x) = alpha_column(p) else {
                return Ok(p);
            };
            let size = x + 1;
            let (n, k) = (p.row / size, p.row % size);
            let v = fb.eval(x, n)?;
            Ok(if k == 0 {
                Point::new(p.column, p.row + v)
            } else if k <= v {
                Point::new(p.column, p.row - 1)
            } else {
                p
            })
        },
    )
}

/// `α` with the packed layout: column `2x` is cut into consecutive blocks of
/// `f(x,0)+1, f(x,1)+1, …` rows, each block one cycle.
pub fn alpha_packed(f: ColumnFunction) -> Permutation {
    let layout = Arc::new(PackedLayout {
        f: f.clone(),
        starts: RwLock::new(HashMap::new()),
    });
    let lb = Arc::clone(&layout);
    Permutation::from_maps(
        &format!("α·packed[{}]", f.name()),
        move |p| {
            let Some(x) = alpha_column(p) else {
                return Ok(p);
            };
            let (start, len) = layout.block(x, p.row)?;
            Ok(Point::new(p.column, start + (p.row - start + 1) % len))
        },
        move |p| {
            let Some(x) = alpha_column(p) else {
                return Ok(p);
            };
            let (start, len) = lb.block(x, p.row)?;
            Ok(Point::new(p.column, start + (p.row - start + len - 1) % len))
        },
    )
}

/// Builds `α` in the requested layout.
pub fn alpha_with_layout(f: ColumnFunction, layout: AlphaLayout) -> Permutation {
    match layout {
        AlphaLayout::Blocked => alpha_from_f(f),
        AlphaLayout::Packed => alpha_packed(f),
    }
}

fn alpha_column(p: Point) -> Option<u64> {
    (p.column >= 0 && p.column % 2 == 0).then_some((p.column / 2) as u64)
}

struct PackedLayout {
    f: ColumnFunction,
    /// Per column index `x`: block start rows, always ending with the start
    /// of the first block not yet examined.
    starts: RwLock<HashMap<u64, Vec<u64>>>,
}

impl PackedLayout {
    /// `(start, length)` of the block containing `row` in column `2x`.
    fn block(&self, x: u64, row: u64) -> Result<(u64, u64), PermError> {
        {
            let map = self.starts.read();
            if let Some(s) = map.get(&x) {
                if let Some(found) = Self::find(s, row) {
                    return Ok(found);
                }
            }
        }
        let mut map = self.starts.write();
        let s = map.entry(x).or_insert_with(|| vec![0]);
        while *s.last().expect("nonempty") <= row {
            let n = (s.len() - 1) as u64;
            let v = self.f.eval(x, n)?;
            let next = s.last().expect("nonempty") + v + 1;
            s.push(next);
        }
        Ok(Self::find(s, row).expect("extended past row"))
    }

    fn find(starts: &[u64], row: u64) -> Option<(u64, u64)> {
        if *starts.last()? <= row {
            return None;
        }
        let i = starts.partition_point(|&s| s <= row) - 1;
        Some((starts[i], starts[i + 1] - starts[i]))
    }
}

/// Column-0 permutation of `ω` that gets one fresh `n`-cycle for each value
/// `n` emitted by a step enumerator, in emission order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleAdder {
    lengths: Vec<u64>,
    starts: Vec<u64>,
}

/// Snapshots the first `steps` steps of `e` and allocates one block of
/// consecutive fresh rows per emitted value. Zero emissions are ignored.
pub fn cycle_adder(e: &dyn StepEnumerator, steps: u64) -> CycleAdder {
    let lengths: Vec<u64> = (0..steps).filter_map(|t| e.step(t)).filter(|&n| n > 0).collect();
    let mut starts = Vec::with_capacity(lengths.len() + 1);
    let mut next = 0;
    starts.push(next);
    for n in &lengths {
        next += n;
        starts.push(next);
    }
    CycleAdder { lengths, starts }
}

impl CycleAdder {
    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    /// Order of the permutation (lcm of the cycle lengths), `None` on overflow.
    pub fn order(&self) -> Option<u64> {
        self.lengths.iter().try_fold(1u64, |acc, &n| {
            let g = num_integer::gcd(acc, n);
            acc.checked_mul(n / g)
        })
    }

    fn locate(starts: &[u64], p: Point) -> Option<(u64, u64)> {
        if p.column != 0 || p.row >= *starts.last()? {
            return None;
        }
        let i = starts.partition_point(|&s| s <= p.row) - 1;
        Some((starts[i], starts[i + 1] - starts[i]))
    }

    pub fn permutation(&self) -> Permutation {
        let fs = Arc::new(self.starts.clone());
        let bs = Arc::clone(&fs);
        Permutation::from_maps(
            "p_e",
            move |p| {
                Ok(match Self::locate(&fs, p) {
                    Some((s, n)) => Point::new(0, s + (p.row - s + 1) % n),
                    None => p,
                })
            },
            move |p| {
                Ok(match Self::locate(&bs, p) {
                    Some((s, n)) => Point::new(0, s + (p.row - s + n - 1) % n),
                    None => p,
                })
            },
        )
    }
}

/// First point of `r` where `p` and `q` disagree, with both images.
pub fn first_difference(
    p: &Permutation,
    q: &Permutation,
    r: &Region,
) -> Result<Option<(Point, Point, Point)>, PermError> {
    for pt in r.points() {
        let (a, b) = (p.apply(pt)?, q.apply(pt)?);
        if a != b {
            return Ok(Some((pt, a, b)));
        }
    }
    Ok(None)
}

pub fn bounded_equal(p: &Permutation, q: &Permutation, r: &Region) -> Result<bool, PermError> {
    Ok(first_difference(p, q, r)?.is_none())
}

/// First point of `r` moved by `p`.
pub fn first_moved(p: &Permutation, r: &Region) -> Result<Option<Point>, PermError> {
    for pt in r.points() {
        if p.apply(pt)? != pt {
            return Ok(Some(pt));
        }
    }
    Ok(None)
}

pub fn is_identity_on(p: &Permutation, r: &Region) -> Result<bool, PermError> {
    Ok(first_moved(p, r)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coener::{build_g, dedup, Schedule};

    fn table_f(entries: &[(u64, u64, u64)]) -> ColumnFunction {
        let entries = entries.to_vec();
        ColumnFunction::from_fn("table", move |x, n| {
            entries
                .iter()
                .find(|e| e.0 == x && e.1 == n)
                .map_or(0, |e| e.2)
        })
    }

    #[test]
    fn identity_and_shifts() {
        let id = Permutation::identity();
        assert_eq!(id.apply(Point::new(5, 3)).unwrap(), Point::new(5, 3));
        let s = sigma_paired();
        assert_eq!(s.apply(Point::new(0, 5)).unwrap(), Point::new(2, 5));
        assert_eq!(s.apply_inverse(Point::new(2, 5)).unwrap(), Point::new(0, 5));
        assert_eq!(s.apply(Point::new(1, 0)).unwrap(), Point::new(3, 0));
        assert_eq!(s.apply(Point::new(-2, 7)).unwrap(), Point::new(0, 7));
        assert_eq!(s.apply_inverse(Point::new(0, 7)).unwrap(), Point::new(-2, 7));
        let ss = s.compose(&s);
        assert_eq!(ss.apply(Point::new(0, 9)).unwrap(), Point::new(4, 9));

        let l = sigma_line();
        assert_eq!(l.apply(Point::new(0, 9)).unwrap(), Point::new(1, 9));
        assert_eq!(l.apply(Point::new(-3, 0)).unwrap(), Point::new(-2, 0));
        assert_eq!(l.apply_inverse(Point::new(1, 9)).unwrap(), Point::new(0, 9));
    }

    #[test]
    fn taus() {
        let t = tau_paired();
        assert_eq!(t.apply(Point::new(1, 7)).unwrap(), Point::new(0, 7));
        assert_eq!(t.apply(Point::new(4, 2)).unwrap(), Point::new(4, 2));
        let r = Region::new(-3, 3, 20).unwrap();
        assert!(is_identity_on(&t.compose(&t), &r).unwrap());

        let t3 = tau_triples();
        assert_eq!(t3.apply(Point::new(0, 4)).unwrap(), Point::new(0, 5));
        assert_eq!(t3.apply(Point::new(0, 3)).unwrap(), Point::new(0, 3));
        assert_eq!(t3.apply(Point::new(2, 4)).unwrap(), Point::new(2, 4));
        assert!(is_identity_on(&t3.compose(&t3), &r).unwrap());
    }

    #[test]
    fn alpha_blocked_examples() {
        let a = alpha_from_f(table_f(&[(2, 1, 1)]));
        assert_eq!(a.apply(Point::new(4, 3)).unwrap(), Point::new(4, 4));
        assert_eq!(a.apply(Point::new(4, 4)).unwrap(), Point::new(4, 3));
        assert_eq!(a.apply(Point::new(4, 5)).unwrap(), Point::new(4, 5));
        assert_eq!(a.apply_inverse(Point::new(4, 3)).unwrap(), Point::new(4, 4));
        // odd and negative columns untouched
        assert_eq!(a.apply(Point::new(5, 3)).unwrap(), Point::new(5, 3));
        assert_eq!(a.apply(Point::new(-4, 3)).unwrap(), Point::new(-4, 3));

        let zero = alpha_from_f(ColumnFunction::trivial());
        let r = Region::new(-4, 10, 50).unwrap();
        assert!(is_identity_on(&zero, &r).unwrap());
    }

    #[test]
    fn alpha_orbit_sizes() {
        let f = ColumnFunction::modulo(3);
        let a = alpha_from_f(f.clone());
        for x in 0..7u64 {
            for n in 0..5u64 {
                let base = n * (x + 1);
                let start = Point::new(2 * x as i64, base);
                let mut orbit = vec![start];
                let mut p = a.apply(start).unwrap();
                while p != start {
                    assert!(p.row >= base && p.row <= base + x);
                    orbit.push(p);
                    p = a.apply(p).unwrap();
                }
                assert_eq!(orbit.len() as u64, f.eval(x, n).unwrap() + 1);
            }
        }
    }

    #[test]
    fn alpha_bound_violation_is_lazy() {
        let bad = ColumnFunction::from_fn("bad", |x, _| x + 1);
        let a = alpha_from_f(bad);
        assert!(a.apply(Point::new(1, 0)).is_ok());
        assert!(matches!(
            a.apply(Point::new(2, 0)),
            Err(PermError::BoundViolation { x: 1, n: 0, value: 2, .. })
        ));
    }

    #[test]
    fn alpha_packed_layout() {
        // f(1, ·) = 1, 0, 1, 0, ...: blocks {0,1}, {2}, {3,4}, {5}, ...
        let f = ColumnFunction::from_fn("alt", |x, n| if n % 2 == 0 { x.min(1) } else { 0 });
        let a = alpha_packed(f);
        let img: Vec<u64> = (0..6).map(|r| a.apply(Point::new(2, r)).unwrap().row).collect();
        assert_eq!(img, vec![1, 0, 2, 4, 3, 5]);
        for r in 0..200 {
            let p = Point::new(6, r);
            assert_eq!(a.apply_inverse(a.apply(p).unwrap()).unwrap(), p);
        }
    }

    #[test]
    fn beta_examples() {
        let g = build_g(dedup(Schedule::finite([(0, 4)])));
        assert_eq!(g.value(0), 8);
        let b = beta_from_g(g);
        assert_eq!(b.apply(Point::new(8, 0)).unwrap(), Point::new(8, 1));
        assert_eq!(b.apply(Point::new(8, 1)).unwrap(), Point::new(8, 0));
        assert_eq!(b.apply(Point::new(8, 2)).unwrap(), Point::new(8, 2));
        // g(1) = 3, g(2) = 5, ...; column 4 is never hit (4 = 2·2 needs 2 emitted)
        for r in 0..300 {
            assert_eq!(b.apply(Point::new(4, r)).unwrap(), Point::new(4, r));
        }
        assert_eq!(b.apply(Point::new(3, 3)).unwrap(), Point::new(3, 4));
    }

    #[test]
    fn bounded_comparisons() {
        let r = Region::new(-2, 2, 5).unwrap();
        let s = sigma_line();
        assert!(bounded_equal(&s, &s, &r).unwrap());
        let single = Region::new(0, 0, 0).unwrap();
        assert!(!bounded_equal(&s, &Permutation::identity(), &single).unwrap());
        assert!(is_identity_on(&s.compose(&s.inverse()), &r).unwrap());
        assert!(Region::new(1, 0, 0).is_err());
    }

    #[test]
    fn cycle_adder_examples() {
        let empty = cycle_adder(&Schedule::empty(), 100);
        assert_eq!(empty.order(), Some(1));
        let r = Region::new(0, 0, 30).unwrap();
        assert!(is_identity_on(&empty.permutation(), &r).unwrap());

        let one = cycle_adder(&Schedule::finite([(0, 1)]), 10);
        assert!(is_identity_on(&one.permutation(), &r).unwrap());

        let three = cycle_adder(&Schedule::finite([(0, 3)]), 10);
        let p = three.permutation();
        let mut orbit = vec![Point::new(0, 0)];
        let mut q = p.apply(orbit[0]).unwrap();
        while q != orbit[0] {
            orbit.push(q);
            q = p.apply(q).unwrap();
        }
        let rows: Vec<u64> = orbit.iter().map(|q| q.row).collect();
        assert_eq!(rows, vec![0, 1, 2]);
        assert_eq!(three.order(), Some(3));
        assert_eq!(p.apply(Point::new(0, 3)).unwrap(), Point::new(0, 3));

        let mixed = cycle_adder(&Schedule::finite([(0, 2), (3, 3), (4, 4)]), 10);
        assert_eq!(mixed.order(), Some(12));
        let pm = mixed.permutation();
        for row in 0..12 {
            let pt = Point::new(0, row);
            assert_eq!(pm.apply_inverse(pm.apply(pt).unwrap()).unwrap(), pt);
        }
        // p^12 = id on the support
        let mut pow = Permutation::identity();
        for _ in 0..12 {
            pow = pow.compose(&pm);
        }
        assert!(is_identity_on(&pow, &Region::new(0, 0, 12).unwrap()).unwrap());
    }
}
