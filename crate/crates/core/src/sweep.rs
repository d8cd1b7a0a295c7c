//! Randomized and exhaustive property sweeps. Every case draws from its own
//! RNG stream, so reports are identical in both execution modes.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use parking_lot::Mutex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abelian::{
    abelian_invariants, abelianize, diagonal_check, smith_normal_form, strong_diagonal,
    IntegerMatrix, Presentation,
};
use crate::coener::{CodedSet, Progression, Schedule};
use crate::exec::{map_indexed, map_slice, ExecMode};
use crate::pi01::{CodeReport, CodedGroup, TermImages};
use crate::ttwp::{
    brute_force_identity, decide, decide_word, m_reduction_word, paper_literal_decider, query_set,
    to_normal_form, Oracle, Reason, Verdict, BETA, SIGMA, TAU,
};
use crate::words::{Generator, Letter, Word};
use crate::Error;

/// The RNG for case `index` of a sweep seeded with `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The three reference schedules: never emitting, a finite table, and an
/// eventually periodic one.
pub fn standard_schedules() -> Vec<(&'static str, Schedule)> {
    let tail = Progression {
        start: 4,
        step_stride: 3,
        first_value: 5,
        value_stride: 4,
    };
    vec![
        ("empty", Schedule::empty()),
        ("finite", Schedule::finite([(0, 3), (2, 10), (5, 1), (7, 4), (9, 3)])),
        (
            "eventually-periodic",
            Schedule::eventually_periodic([(0, 2), (1, 7), (2, 2)], tail).expect("tail after prefix"),
        ),
    ]
}

/// Shape of random words over `{b, s, t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordParams {
    pub max_len: usize,
    /// Largest σ-offset a gadget is placed at.
    pub max_offset: i64,
    /// Probability of closing the word to σ-exponent 0.
    pub zero_sigma: f64,
}

impl Default for WordParams {
    fn default() -> Self {
        WordParams {
            max_len: 40,
            max_offset: 6,
            zero_sigma: 0.5,
        }
    }
}

fn letter(name: &str, inverse: bool) -> Word {
    Word::new(vec![Letter::new(Generator::new(name), inverse)])
}

fn shifted(name: &str, offset: i64) -> Word {
    letter(name, false).conjugate(&Word::gen(SIGMA).pow(-offset))
}

fn sigma_sum(w: &Word) -> i64 {
    w.exponent_sum(&Generator::new(SIGMA))
}

/// One piece of a random word: a raw letter, a shifted `β_x`/`τ_u`, a
/// `(β_x τ_u)^k` gadget, an m-reduction word, or a σ-conjugate of a gadget.
fn piece<R: Rng>(rng: &mut R, p: &WordParams) -> Word {
    let off = |rng: &mut R| rng.gen_range(-p.max_offset..=p.max_offset);
    match rng.gen_range(0..100) {
        0..=39 => {
            let name = [BETA, SIGMA, TAU].choose(rng).copied().unwrap_or(BETA);
            letter(name, rng.gen_bool(0.5))
        }
        40..=59 => {
            let name = if rng.gen_bool(0.5) { BETA } else { TAU };
            shifted(name, off(rng))
        }
        60..=79 => {
            let k = *[1, 2, 3, 6].choose(rng).unwrap_or(&1);
            let (x, u) = (off(rng), off(rng));
            shifted(BETA, x).multiply(&shifted(TAU, u)).pow(k)
        }
        80..=89 => m_reduction_word(rng.gen_range(0..=p.max_offset)),
        _ => {
            let (x, u) = (off(rng), off(rng));
            let g = shifted(BETA, x).multiply(&shifted(TAU, u));
            g.conjugate(&Word::gen(SIGMA).pow(off(rng)))
        }
    }
}

/// A random word of length at most `max_len`; with probability
/// `zero_sigma` its σ-exponent sum is 0, otherwise nonzero.
pub fn random_tt_word<R: Rng>(rng: &mut R, p: &WordParams) -> Word {
    let zero = rng.gen_bool(p.zero_sigma);
    let target = rng.gen_range(0..=p.max_len);
    // one letter is kept in reserve to make the sum nonzero
    let reserve = usize::from(!zero);
    let mut w = Word::empty();
    for _ in 0..64 {
        let next = w.multiply(&piece(rng, p));
        let closing = sigma_sum(&next).unsigned_abs() as usize;
        let budget = if zero { closing } else { reserve };
        if next.len() + budget <= target {
            w = next;
        }
        if w.len() + budget + 1 > target {
            break;
        }
    }
    let sum = sigma_sum(&w);
    if zero {
        w.multiply(&Word::gen(SIGMA).pow(-sum))
    } else if sum == 0 {
        w.multiply(&letter(SIGMA, rng.gen_bool(0.5)))
    } else {
        w
    }
}

/// Deterministic word `index` of a sweep.
pub fn sweep_word(seed: u64, index: u64, p: &WordParams) -> Word {
    random_tt_word(&mut case_rng(seed, index), p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DifferentialCase {
    pub index: u64,
    pub word: String,
    pub decide: bool,
    pub rule: &'static str,
    pub brute: bool,
    pub literal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DifferentialReport {
    pub cases: u64,
    pub agree: u64,
    pub identities: u64,
    pub sigma_zero: u64,
    /// How often each rule settled a case.
    pub rules: BTreeMap<&'static str, u64>,
    /// Cases where decide and brute force differ.
    pub disagreements: Vec<DifferentialCase>,
    /// Cases where the literal procedure differs from decide on a
    /// not-identity verdict from R1 or R3.
    pub literal_r1_r3_divergences: Vec<DifferentialCase>,
    /// All other literal divergences, counted.
    pub literal_other_divergences: u64,
}

/// decide_word against brute_force_identity on `cases` random words.
pub fn differential_sweep(
    coded: &CodedSet,
    cases: u64,
    seed: u64,
    params: &WordParams,
    mode: ExecMode,
) -> Result<DifferentialReport, Error> {
    let results = map_indexed(mode, cases, |index| -> Result<DifferentialCase, Error> {
        let w = sweep_word(seed, index, params);
        let v = decide_word(&w, coded)?;
        let brute = brute_force_identity(&w, coded)?;
        let literal = match v.reason {
            Reason::SigmaExponent { .. } => v.equal_identity,
            _ => paper_literal_decider(&to_normal_form(&w)?, coded)?.equal_identity,
        };
        Ok(DifferentialCase {
            index,
            word: w.to_string(),
            decide: v.equal_identity,
            rule: v.reason.rule(),
            brute,
            literal,
        })
    });
    let mut report = DifferentialReport {
        cases,
        agree: 0,
        identities: 0,
        sigma_zero: 0,
        rules: BTreeMap::new(),
        disagreements: Vec::new(),
        literal_r1_r3_divergences: Vec::new(),
        literal_other_divergences: 0,
    };
    for case in results {
        let case = case?;
        *report.rules.entry(case.rule).or_default() += 1;
        report.identities += u64::from(case.decide);
        report.sigma_zero += u64::from(case.rule != "sigma-exponent");
        if case.literal != case.decide {
            if matches!(case.rule, "R1-odd-beta" | "R3-special-cell") {
                report.literal_r1_r3_divergences.push(case.clone());
            } else {
                report.literal_other_divergences += 1;
            }
        }
        if case.decide == case.brute {
            report.agree += 1;
        } else {
            report.disagreements.push(case);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MReductionCase {
    pub x: i64,
    pub member: bool,
    pub decide: bool,
    pub brute: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MReductionReport {
    pub lo: i64,
    pub hi: i64,
    pub members: u64,
    pub mismatches: Vec<MReductionCase>,
}

/// `x ∈ S′ ⟺ m_reduction_word(x) = 1` for every `x ∈ [lo, hi]`, with
/// membership from `member`.
pub fn mreduction_sweep(
    coded: &CodedSet,
    lo: i64,
    hi: i64,
    member: &(dyn Fn(i64) -> bool + Sync),
    mode: ExecMode,
) -> Result<MReductionReport, Error> {
    let n = (hi - lo + 1).max(0) as u64;
    let cases = map_indexed(mode, n, |i| -> Result<MReductionCase, Error> {
        let x = lo + i as i64;
        let w = m_reduction_word(x);
        Ok(MReductionCase {
            x,
            member: member(x),
            decide: decide_word(&w, coded)?.equal_identity,
            brute: brute_force_identity(&w, coded)?,
        })
    });
    let mut report = MReductionReport {
        lo,
        hi,
        members: 0,
        mismatches: Vec::new(),
    };
    for case in cases {
        let case = case?;
        report.members += u64::from(case.member);
        if case.decide != case.member || case.brute != case.member {
            report.mismatches.push(case);
        }
    }
    Ok(report)
}

/// Logs every question, in order.
pub struct RecordingOracle<O> {
    inner: O,
    log: Mutex<Vec<i64>>,
}

impl<O: Oracle> RecordingOracle<O> {
    pub fn new(inner: O) -> Self {
        RecordingOracle {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn log(&self) -> Vec<i64> {
        self.log.lock().clone()
    }
}

impl<O: Oracle> Oracle for RecordingOracle<O> {
    fn answer(&self, m: i64) -> Option<bool> {
        self.log.lock().push(m);
        self.inner.answer(m)
    }
}

/// Agrees with `base` on `keep` and answers pseudo-randomly elsewhere.
pub struct PerturbedOracle<'a, O> {
    pub base: &'a O,
    pub keep: &'a BTreeSet<i64>,
    pub salt: u64,
}

impl<O: Oracle> Oracle for PerturbedOracle<'_, O> {
    fn answer(&self, m: i64) -> Option<bool> {
        if self.keep.contains(&m) {
            return self.base.answer(m);
        }
        let mut rng = case_rng(self.salt, m as u64);
        Some(rng.gen_bool(0.5))
    }
}

/// Answers the opposite of `base` everywhere.
pub struct FlippedOracle<'a, O>(pub &'a O);

impl<O: Oracle> Oracle for FlippedOracle<'_, O> {
    fn answer(&self, m: i64) -> Option<bool> {
        self.0.answer(m).map(|a| !a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuerySetViolation {
    pub index: u64,
    pub word: String,
    pub kind: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuerySetReport {
    pub cases: u64,
    pub total_queries: u64,
    pub violations: Vec<QuerySetViolation>,
}

/// For each random σ-balanced word: the oracle is asked exactly the
/// precomputed query set; an oracle agreeing only on that set gives the
/// same verdict; an oracle flipped everywhere is asked the same questions.
pub fn queryset_sweep(
    coded: &CodedSet,
    cases: u64,
    seed: u64,
    params: &WordParams,
    mode: ExecMode,
) -> Result<QuerySetReport, Error> {
    let params = WordParams {
        zero_sigma: 1.0,
        ..*params
    };
    let results = map_indexed(mode, cases, |index| -> Result<(u64, Vec<&'static str>, String), Error> {
        let w = sweep_word(seed, index, &params);
        let nf = to_normal_form(&w)?;
        let q = query_set(&nf);
        let expected: Vec<i64> = q.iter().copied().collect();
        let mut bad = Vec::new();

        let rec = RecordingOracle::new(coded);
        let v: Verdict = decide(&nf, &rec)?;
        if rec.log() != expected || v.queries != expected {
            bad.push("queries-differ-from-query-set");
        }
        let perturbed = PerturbedOracle {
            base: coded,
            keep: &q,
            salt: seed ^ index.rotate_left(17),
        };
        if decide(&nf, &perturbed)? != v {
            bad.push("verdict-depends-on-unqueried-answers");
        }
        let flipped = RecordingOracle::new(FlippedOracle(coded));
        decide(&nf, &flipped)?;
        if flipped.log() != expected {
            bad.push("queries-depend-on-answers");
        }
        Ok((q.len() as u64, bad, w.to_string()))
    });
    let mut report = QuerySetReport {
        cases,
        total_queries: 0,
        violations: Vec::new(),
    };
    for (index, r) in results.into_iter().enumerate() {
        let (n, bad, word) = r?;
        report.total_queries += n;
        report.violations.extend(bad.into_iter().map(|kind| QuerySetViolation {
            index: index as u64,
            word: word.clone(),
            kind,
        }));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodingReport {
    pub function: String,
    pub max: u64,
    pub bound: u64,
    pub pairs: u64,
    pub related_pairs: u64,
    pub inconsistencies: Vec<CodeReport>,
}

/// The coding equation on all pairs `x, y ≤ max` at bound `N`.
pub fn coding_sweep(group: &CodedGroup, max: u64, bound: u64, mode: ExecMode) -> Result<CodingReport, Error> {
    let images = TermImages::compute(group, max, bound)?;
    let pairs: Vec<(u64, u64)> = (0..=max)
        .flat_map(|x| (x..=max).map(move |y| (x, y)))
        .collect();
    let reports = map_slice(mode, &pairs, |&(x, y)| images.report(group, x, y, bound));
    let mut out = CodingReport {
        function: group.f().name().to_string(),
        max,
        bound,
        pairs: pairs.len() as u64,
        related_pairs: 0,
        inconsistencies: Vec::new(),
    };
    for r in reports {
        let r = r?;
        out.related_pairs += u64::from(r.f_agree);
        if !r.consistent {
            out.inconsistencies.push(r);
        }
    }
    Ok(out)
}

/// A random `rows × cols` matrix, both dimensions in `[1, max_dim]`, entries
/// in `[-max_entry, max_entry]`.
pub fn random_matrix<R: Rng>(rng: &mut R, max_dim: usize, max_entry: i64) -> IntegerMatrix {
    let rows = rng.gen_range(1..=max_dim);
    let cols = rng.gen_range(1..=max_dim);
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-max_entry..=max_entry)).collect())
        .collect();
    IntegerMatrix::from_rows(cols, &data)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnfFailure {
    pub index: u64,
    pub matrix: String,
    pub problem: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnfReport {
    pub cases: u64,
    pub square_nonsingular: u64,
    pub failures: Vec<SnfFailure>,
}

/// Every invariant of a Smith form with transforms; empty when all hold.
pub fn snf_problems(m: &IntegerMatrix) -> Vec<&'static str> {
    let s = smith_normal_form(m, true);
    let (u, v) = (s.u.expect("requested"), s.v.expect("requested"));
    let mut out = Vec::new();
    if !s.d.is_diagonal() {
        out.push("not-diagonal");
    }
    let diag = s.d.diagonal();
    if diag.iter().any(|d| d.is_negative()) {
        out.push("negative-entry");
    }
    let chain = diag.windows(2).all(|p| {
        if p[0].is_zero() {
            p[1].is_zero()
        } else {
            (&p[1] % &p[0]).is_zero()
        }
    });
    if !chain {
        out.push("divisibility-chain");
    }
    if u.mul(m).mul(&v) != s.d {
        out.push("UMV-not-D");
    }
    if u.determinant().abs() != BigInt::one() || v.determinant().abs() != BigInt::one() {
        out.push("not-unimodular");
    }
    if m.rows() == m.cols() {
        let det = m.determinant();
        if !det.is_zero() && diag.iter().product::<BigInt>() != det.abs() {
            out.push("diagonal-product-not-det");
        }
    }
    out
}

pub fn snf_sweep(cases: u64, seed: u64, max_dim: usize, max_entry: i64, mode: ExecMode) -> SnfReport {
    let results = map_indexed(mode, cases, |index| {
        let m = random_matrix(&mut case_rng(seed, index), max_dim, max_entry);
        let nonsingular = m.rows() == m.cols() && !m.determinant().is_zero();
        (m.to_string(), nonsingular, snf_problems(&m))
    });
    let mut report = SnfReport {
        cases,
        square_nonsingular: 0,
        failures: Vec::new(),
    };
    for (index, (matrix, nonsingular, problems)) in results.into_iter().enumerate() {
        report.square_nonsingular += u64::from(nonsingular);
        report.failures.extend(problems.into_iter().map(|problem| SnfFailure {
            index: index as u64,
            matrix: matrix.clone(),
            problem,
        }));
    }
    report
}

/// Up to `max_gens` generators and `max_rels` relators of length at most
/// `max_len`.
pub fn random_presentation<R: Rng>(
    rng: &mut R,
    max_gens: usize,
    max_rels: usize,
    max_len: usize,
) -> Presentation {
    const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
    let n = rng.gen_range(0..=max_gens.min(NAMES.len()));
    let gens: Vec<String> = NAMES[..n].iter().map(|s| s.to_string()).collect();
    let relators = if n == 0 {
        Vec::new()
    } else {
        (0..rng.gen_range(0..=max_rels))
            .map(|_| {
                let len = rng.gen_range(1..=max_len);
                Word::new(
                    (0..len)
                        .map(|_| Letter::new(Generator::new(gens[rng.gen_range(0..n)].as_str()), rng.gen_bool(0.5)))
                        .collect(),
                )
            })
            .collect()
    };
    Presentation::new(gens, relators).expect("relators use listed generators")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalFailure {
    pub index: u64,
    pub presentations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalSweepReport {
    pub cases: u64,
    /// Cases where the output rank is `1 + Σ` input ranks.
    pub rank_sum_holds: u64,
    pub failures: Vec<DiagonalFailure>,
}

pub fn diagonal_sweep(cases: u64, seed: u64, mode: ExecMode) -> DiagonalSweepReport {
    let results = map_indexed(mode, cases, |index| {
        let mut rng = case_rng(seed, index);
        let k = rng.gen_range(0..=4);
        let set: Vec<Presentation> = (0..k).map(|_| random_presentation(&mut rng, 3, 3, 6)).collect();
        let delta = strong_diagonal(&set);
        let report = diagonal_check(&delta, &set);
        let rank_sum = 1 + set
            .iter()
            .map(|p| abelian_invariants(&abelianize(p)).free_rank)
            .sum::<usize>();
        let text = set.iter().map(|p| p.to_string()).collect();
        (report.passed, report.output.free_rank == rank_sum, text)
    });
    let mut report = DiagonalSweepReport {
        cases,
        rank_sum_holds: 0,
        failures: Vec::new(),
    };
    for (index, (passed, rank_sum, presentations)) in results.into_iter().enumerate() {
        report.rank_sum_holds += u64::from(rank_sum);
        if !passed {
            report.failures.push(DiagonalFailure {
                index: index as u64,
                presentations,
            });
        }
    }
    report
}
