//! Co-c.e. sets as step enumerators of their complements, the padding that
//! makes the complement infinite, deduplication, and the injective coder `g`.
//!
//! A [`StepEnumerator`] answers "what, if anything, is emitted at step `t`".
//! The pipeline used throughout is `build_g(dedup(pad_to_infinite(e)))`.
//! [`Schedule`] is the explicit, exactly-analysable enumerator used by test
//! harnesses; [`CodedSet`] bundles a schedule with its coder and answers
//! membership exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("prefix step {step} is not below the periodic tail start {start}")]
    Overlap { step: u64, start: u64 },
    #[error("periodic tail needs a positive step stride")]
    ZeroStride,
}

/// A deterministic schedule: step `t` emits a value or nothing.
pub trait StepEnumerator: Send + Sync {
    fn step(&self, t: u64) -> Option<u64>;
}

impl<E: StepEnumerator + ?Sized> StepEnumerator for Arc<E> {
    fn step(&self, t: u64) -> Option<u64> {
        (**self).step(t)
    }
}

impl<E: StepEnumerator + ?Sized> StepEnumerator for Box<E> {
    fn step(&self, t: u64) -> Option<u64> {
        (**self).step(t)
    }
}

/// Wraps a pure function of the step index.
pub struct FnEnumerator<F>(pub F);

impl<F> StepEnumerator for FnEnumerator<F>
where
    F: Fn(u64) -> Option<u64> + Send + Sync,
{
    fn step(&self, t: u64) -> Option<u64> {
        (self.0)(t)
    }
}

/// Arithmetic tail of an eventually-periodic schedule: steps
/// `start + k·step_stride` emit `first_value + k·value_stride`; all other
/// steps from `start` on are silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progression {
    pub start: u64,
    pub step_stride: u64,
    pub first_value: u64,
    pub value_stride: u64,
}

impl Progression {
    fn emission(&self, t: u64) -> Option<u64> {
        if t < self.start || !(t - self.start).is_multiple_of(self.step_stride) {
            return None;
        }
        let k = (t - self.start) / self.step_stride;
        Some(self.first_value + k * self.value_stride)
    }

    fn first_step_of(&self, v: u64) -> Option<u64> {
        if v < self.first_value {
            return None;
        }
        let k = match self.value_stride {
            0 if v == self.first_value => 0,
            0 => return None,
            d if (v - self.first_value).is_multiple_of(d) => (v - self.first_value) / d,
            _ => return None,
        };
        Some(self.start + k * self.step_stride)
    }
}

/// An explicit emission schedule: a finite table plus an optional
/// arithmetic tail. Everything about it is decidable, which makes it the
/// test-side source of truth.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    prefix: BTreeMap<u64, u64>,
    first_in_prefix: HashMap<u64, u64>,
    tail: Option<Progression>,
}

impl Schedule {
    /// Never emits.
    pub fn empty() -> Self {
        Schedule::default()
    }

    pub fn finite(entries: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut s = Schedule::default();
        for (t, v) in entries {
            s.prefix.insert(t, v);
        }
        s.reindex();
        s
    }

    pub fn eventually_periodic(
        entries: impl IntoIterator<Item = (u64, u64)>,
        tail: Progression,
    ) -> Result<Self, ScheduleError> {
        if tail.step_stride == 0 {
            return Err(ScheduleError::ZeroStride);
        }
        let mut s = Schedule::finite(entries);
        if let Some((&step, _)) = s.prefix.range(tail.start..).next() {
            return Err(ScheduleError::Overlap {
                step,
                start: tail.start,
            });
        }
        s.tail = Some(tail);
        Ok(s)
    }

    fn reindex(&mut self) {
        self.first_in_prefix.clear();
        for (&t, &v) in &self.prefix {
            self.first_in_prefix.entry(v).or_insert(t);
        }
    }

    pub fn prefix(&self) -> &BTreeMap<u64, u64> {
        &self.prefix
    }

    pub fn tail(&self) -> Option<Progression> {
        self.tail
    }

    /// First step at which `v` is emitted, if ever.
    pub fn first_emission(&self, v: u64) -> Option<u64> {
        let a = self.first_in_prefix.get(&v).copied();
        let b = self.tail.and_then(|p| p.first_step_of(v));
        match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Whether `v` is ever emitted, i.e. `v` lies in the enumerated set.
    pub fn emits(&self, v: u64) -> bool {
        self.first_emission(v).is_some()
    }

    /// Parses the schedule file format: lines `t v` (step `t` emits `v`),
    /// optionally one `periodic start step_stride first_value value_stride`
    /// line; `#` starts a comment. Repeated values are dropped (keeping the
    /// earliest step) and returned alongside the schedule.
    pub fn parse(text: &str) -> Result<(Schedule, Vec<(u64, u64)>), ScheduleError> {
        let mut entries: BTreeMap<u64, u64> = BTreeMap::new();
        let mut tail = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| ScheduleError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let nums = |fs: &[&str]| -> Result<Vec<u64>, ScheduleError> {
                fs.iter()
                    .map(|f| f.parse::<u64>().map_err(|_| err("expected a natural number")))
                    .collect()
            };
            if fields[0] == "periodic" {
                if fields.len() != 5 {
                    return Err(err("periodic needs four numbers"));
                }
                if tail.is_some() {
                    return Err(err("only one periodic line is allowed"));
                }
                let n = nums(&fields[1..])?;
                tail = Some(Progression {
                    start: n[0],
                    step_stride: n[1],
                    first_value: n[2],
                    value_stride: n[3],
                });
            } else {
                if fields.len() != 2 {
                    return Err(err("expected `t v`"));
                }
                let n = nums(&fields)?;
                if entries.insert(n[0], n[1]).is_some() {
                    return Err(err("step listed twice"));
                }
            }
        }
        let mut seen = HashMap::new();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (t, v) in entries {
            if seen.insert(v, t).is_some() {
                dropped.push((t, v));
            } else {
                kept.push((t, v));
            }
        }
        let schedule = match tail {
            Some(p) => Schedule::eventually_periodic(kept, p)?,
            None => Schedule::finite(kept),
        };
        Ok((schedule, dropped))
    }
}

impl fmt::Display for Schedule {
    /// The schedule file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, v) in &self.prefix {
            writeln!(f, "{t} {v}")?;
        }
        if let Some(p) = self.tail {
            writeln!(
                f,
                "periodic {} {} {} {}",
                p.start, p.step_stride, p.first_value, p.value_stride
            )?;
        }
        Ok(())
    }
}

impl StepEnumerator for Schedule {
    fn step(&self, t: u64) -> Option<u64> {
        if let Some(&v) = self.prefix.get(&t) {
            return Some(v);
        }
        self.tail.and_then(|p| p.emission(t))
    }
}

/// Enumerates `{2n : n emitted by inner} ∪ {odd numbers}`.
pub struct Padded<E> {
    inner: E,
}

pub fn pad_to_infinite<E: StepEnumerator>(e: E) -> Padded<E> {
    Padded { inner: e }
}

impl<E: StepEnumerator> StepEnumerator for Padded<E> {
    fn step(&self, t: u64) -> Option<u64> {
        if t % 2 == 1 {
            Some(t)
        } else {
            self.inner.step(t / 2).map(|v| 2 * v)
        }
    }
}

/// Suppresses every emission whose value was already emitted earlier.
///
/// The seen-set is materialised lazily in step order behind a lock, so
/// answers never depend on query order.
pub struct Dedup<E> {
    inner: E,
    state: RwLock<DedupState>,
}

#[derive(Default)]
struct DedupState {
    out: Vec<Option<u64>>,
    seen: HashMap<u64, u64>,
}

pub fn dedup<E: StepEnumerator>(e: E) -> Dedup<E> {
    Dedup {
        inner: e,
        state: RwLock::new(DedupState::default()),
    }
}

impl<E: StepEnumerator> Dedup<E> {
    fn materialize(&self, t: u64) {
        let mut st = self.state.write();
        while st.out.len() as u64 <= t {
            let s = st.out.len() as u64;
            let v = self.inner.step(s).filter(|v| !st.seen.contains_key(v));
            if let Some(v) = v {
                st.seen.insert(v, s);
            }
            st.out.push(v);
        }
    }
}

impl<E: StepEnumerator> StepEnumerator for Dedup<E> {
    fn step(&self, t: u64) -> Option<u64> {
        {
            let st = self.state.read();
            if let Some(v) = st.out.get(t as usize) {
                return *v;
            }
        }
        self.materialize(t);
        self.state.read().out[t as usize]
    }
}

/// `g(t) = 2v` when the (deduplicated) enumerator emits `v` at step `t`,
/// otherwise `g(t) = 2t + 1`.
///
/// Injective: even values are distinct by deduplication, odd values by `t`.
#[derive(Clone)]
pub struct InjectiveCoder {
    enumerator: Arc<dyn StepEnumerator>,
}

pub fn build_g(e: impl StepEnumerator + 'static) -> InjectiveCoder {
    InjectiveCoder {
        enumerator: Arc::new(e),
    }
}

impl InjectiveCoder {
    pub fn value(&self, t: u64) -> u64 {
        match self.enumerator.step(t) {
            Some(v) => 2 * v,
            None => 2 * t + 1,
        }
    }

    /// `g(t) = v`, answered with a single step query.
    pub fn graph(&self, t: u64, v: u64) -> bool {
        self.value(t) == v
    }

    pub fn enumerator(&self) -> &Arc<dyn StepEnumerator> {
        &self.enumerator
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Yes,
    NoWithinBound,
}

/// Range membership `v ∈ range(g)`. Odd values are decided by one graph
/// query; even values only by finding the emission within `step_bound`.
pub fn coded_complement_member(g: &InjectiveCoder, v: u64, step_bound: u64) -> Membership {
    if v % 2 == 1 {
        return if g.graph((v - 1) / 2, v) {
            Membership::Yes
        } else {
            Membership::NoWithinBound
        };
    }
    if (0..=step_bound).any(|t| g.graph(t, v)) {
        Membership::Yes
    } else {
        Membership::NoWithinBound
    }
}

/// The set `S′` whose complement is `range(g)` for
/// `g = build_g(dedup(pad_to_infinite(schedule)))`.
///
/// Membership is computed exactly from the schedule, independently of the
/// enumerator pipeline behind the coder.
#[derive(Clone)]
pub struct CodedSet {
    schedule: Arc<Schedule>,
    coder: InjectiveCoder,
}

impl CodedSet {
    pub fn new(schedule: Schedule) -> Self {
        let schedule = Arc::new(schedule);
        let coder = build_g(dedup(pad_to_infinite(Arc::clone(&schedule))));
        CodedSet { schedule, coder }
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn coder(&self) -> &InjectiveCoder {
        &self.coder
    }

    /// Step at which the padded, deduplicated enumerator emits `w`.
    fn padded_step_of(&self, w: u64) -> Option<u64> {
        if w % 2 == 1 {
            Some(w)
        } else {
            self.schedule.first_emission(w / 2).map(|s| 2 * s)
        }
    }

    /// Exact value of `g(t)`.
    pub fn g(&self, t: u64) -> u64 {
        let emitted = if t % 2 == 1 {
            Some(t)
        } else {
            let s = t / 2;
            self.schedule
                .step(s)
                .filter(|&v| self.schedule.first_emission(v) == Some(s))
                .map(|v| 2 * v)
        };
        match emitted {
            Some(v) => 2 * v,
            None => 2 * t + 1,
        }
    }

    /// The unique `t` with `g(t) = m`, if `m ∈ range(g)`.
    pub fn g_inverse(&self, m: i64) -> Option<u64> {
        if m < 0 {
            return None;
        }
        let m = m as u64;
        let t = if m % 2 == 1 {
            (m - 1) / 2
        } else {
            self.padded_step_of(m / 2)?
        };
        (self.g(t) == m).then_some(t)
    }

    /// `m ∈ S′^c = range(g)`. Negative integers are never in it.
    pub fn in_complement(&self, m: i64) -> bool {
        self.g_inverse(m).is_some()
    }

    /// `m ∈ S′`.
    pub fn contains(&self, m: i64) -> bool {
        m >= 0 && !self.in_complement(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule_of(e: &dyn StepEnumerator, n: u64) -> Vec<Option<u64>> {
        (0..n).map(|t| e.step(t)).collect()
    }

    #[test]
    fn padding_of_silent_enumerator_is_the_odds() {
        let p = pad_to_infinite(Schedule::empty());
        let emitted: Vec<u64> = (0..20).filter_map(|t| p.step(t)).collect();
        assert_eq!(emitted, (0..10).map(|k| 2 * k + 1).collect::<Vec<_>>());
    }

    #[test]
    fn padding_doubles_emissions() {
        let p = pad_to_infinite(Schedule::finite([(0, 4)]));
        assert_eq!(p.step(0), Some(8));
        assert_eq!(p.step(1), Some(1));
        assert_eq!(p.step(2), None);
    }

    #[test]
    fn dedup_examples() {
        let e = Schedule::finite([(0, 3), (1, 3), (2, 5)]);
        let d = dedup(e.clone());
        assert_eq!(schedule_of(&d, 3), vec![Some(3), None, Some(5)]);
        // querying out of order gives the same answers
        let d2 = dedup(e);
        assert_eq!(d2.step(2), Some(5));
        assert_eq!(d2.step(1), None);
        assert_eq!(d2.step(0), Some(3));

        let inj = Schedule::finite([(0, 1), (2, 7), (5, 0)]);
        assert_eq!(schedule_of(&dedup(inj.clone()), 10), schedule_of(&inj, 10));
    }

    #[test]
    fn dedup_is_idempotent() {
        let e = FnEnumerator(|t: u64| (t % 3 != 1).then_some((t * t) % 17));
        let once = dedup(FnEnumerator(|t: u64| (t % 3 != 1).then_some((t * t) % 17)));
        let twice = dedup(dedup(e));
        assert_eq!(schedule_of(&once, 1000), schedule_of(&twice, 1000));
    }

    #[test]
    fn g_examples() {
        let g = build_g(dedup(Schedule::finite([(0, 4)])));
        assert_eq!(g.value(1), 3);
        assert_eq!(g.value(0), 8);
        assert!(g.graph(0, 8));
        assert!(!g.graph(0, 3));
    }

    #[test]
    fn complement_membership_examples() {
        let g = build_g(dedup(Schedule::finite([(0, 4)])));
        assert_eq!(coded_complement_member(&g, 3, 0), Membership::Yes);
        assert_eq!(coded_complement_member(&g, 8, 0), Membership::Yes);
        assert_eq!(coded_complement_member(&g, 8, 10), Membership::Yes);
        for bound in [0, 5, 100] {
            assert_eq!(coded_complement_member(&g, 6, bound), Membership::NoWithinBound);
        }
    }

    #[test]
    fn progression_tail() {
        let s = Schedule::eventually_periodic(
            [(0, 9)],
            Progression {
                start: 4,
                step_stride: 3,
                first_value: 2,
                value_stride: 5,
            },
        )
        .unwrap();
        assert_eq!(s.step(4), Some(2));
        assert_eq!(s.step(5), None);
        assert_eq!(s.step(7), Some(7));
        assert_eq!(s.first_emission(12), Some(10));
        assert_eq!(s.first_emission(9), Some(0));
        assert!(!s.emits(3));
        assert!(Schedule::eventually_periodic([(4, 1)], Progression { start: 4, step_stride: 1, first_value: 0, value_stride: 1 }).is_err());
    }

    #[test]
    fn parse_schedule_file() {
        let (s, dropped) = Schedule::parse("# S^c\n0 4\n3 4\n5 1\n").unwrap();
        assert_eq!(dropped, vec![(3, 4)]);
        assert_eq!(s.step(0), Some(4));
        assert_eq!(s.step(3), None);
        assert_eq!(s.step(5), Some(1));
        let (p, _) = Schedule::parse("1 0\nperiodic 10 2 100 1\n").unwrap();
        assert_eq!(p.step(12), Some(101));
        assert!(Schedule::parse("1 2 3\n").is_err());
        assert!(Schedule::parse("1 -2\n").is_err());
        assert!(Schedule::parse("1 2\n1 3\n").is_err());
    }

    #[test]
    fn coded_set_matches_coder() {
        let sets = [
            Schedule::empty(),
            Schedule::finite([(0, 4), (1, 0), (3, 4), (6, 11)]),
            Schedule::eventually_periodic(
                [(0, 1), (2, 2)],
                Progression {
                    start: 5,
                    step_stride: 2,
                    first_value: 1,
                    value_stride: 3,
                },
            )
            .unwrap(),
        ];
        for s in sets {
            let cs = CodedSet::new(s);
            for t in 0..2000 {
                let v = cs.coder().value(t);
                assert_eq!(cs.g(t), v, "t={t}");
                assert_eq!(cs.g_inverse(v as i64), Some(t));
            }
            assert!(!cs.in_complement(-3));
            assert!(!cs.contains(-3));
        }
    }

    #[test]
    fn display_round_trips() {
        let s = Schedule::eventually_periodic(
            [(0, 4), (2, 9)],
            Progression {
                start: 5,
                step_stride: 2,
                first_value: 1,
                value_stride: 3,
            },
        )
        .unwrap();
        assert_eq!(Schedule::parse(&s.to_string()).unwrap(), (s, vec![]));
    }
}
