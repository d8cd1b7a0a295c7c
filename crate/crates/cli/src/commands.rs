use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use wplab::abelian::{abelian_invariants, abelian_iso, diagonal_check, strong_diagonal, Presentation};
use wplab::coener::{CodedSet, Schedule};
use wplab::exec::ExecMode;
use wplab::pi01::{verify_code_equation, CodedGroup, ColumnFunction, TableFunction};
use wplab::sweep::{
    coding_sweep, diagonal_sweep, differential_sweep, mreduction_sweep, queryset_sweep, snf_sweep,
    standard_schedules, WordParams,
};
use wplab::ttwp::{
    brute_force_identity, decide_word, m_reduction_word, paper_literal_decider, query_set,
    sigma_exponent_check, to_normal_form, Oracle, SigmaCheck, TableOracle, Verdict,
};
use wplab::{parse_word, Generator, Word};

use crate::report::{read_input, Report};
use crate::{AbelianOp, Cli, Command, DecideArgs, DecideMode, FunctionSource, SweepCommon, SweepKind, VerifyArgs, WordOp};

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Word { op } => word(op),
        Command::Decide(a) => decide(a),
        Command::VerifyCode(a) => verify(a),
        Command::Abelian { op } => abelian(op),
        Command::Sweep { kind } => sweep(kind, cli.seed),
    }
}

fn parse(text: &str) -> Result<Word> {
    parse_word(text).with_context(|| format!("cannot parse {text:?}"))
}

fn parse_generator(text: &str) -> Result<Generator> {
    match parse(text)?.letters() {
        [l] if !l.inverse => Ok(l.generator.clone()),
        _ => bail!("--gen expects a single generator, got {text:?}"),
    }
}

fn word(op: &WordOp) -> Result<Report> {
    let (name, text) = match op {
        WordOp::Reduce { word } => ("reduce", word),
        WordOp::Invert { word } => ("invert", word),
        WordOp::Expsum { word, .. } => ("expsum", word),
    };
    let mut r = Report::new(&format!("word {name}"));
    r.input("word", text.as_bytes());
    let w = parse(text)?;
    match op {
        WordOp::Reduce { .. } | WordOp::Invert { .. } => {
            let out = if name == "reduce" { w.free_reduce() } else { w.invert() };
            r.result(json!({ "word": out.to_string(), "length": out.len() }));
            r.line(out.to_string());
        }
        WordOp::Expsum { generator, .. } => {
            let g = parse_generator(generator)?;
            let sum = w.exponent_sum(&g);
            r.result(json!({ "generator": g.to_string(), "exponent_sum": sum }));
            r.line(sum.to_string());
        }
    }
    Ok(r)
}

fn load_schedule(r: &mut Report, path: Option<&PathBuf>) -> Result<(String, Schedule)> {
    let Some(path) = path else {
        return Ok(("empty".to_string(), Schedule::empty()));
    };
    let text = read_input(r, "schedule", path)?;
    let (schedule, dropped) =
        Schedule::parse(&text).with_context(|| format!("in schedule {}", path.display()))?;
    if !dropped.is_empty() {
        let steps: Vec<String> = dropped.iter().map(|(t, v)| format!("{t}:{v}")).collect();
        r.line(format!("note: repeated values dropped at {}", steps.join(", ")));
    }
    Ok((path.display().to_string(), schedule))
}

fn identity_text(b: bool) -> &'static str {
    if b {
        "identity"
    } else {
        "not identity"
    }
}

fn verdict_line(label: &str, v: &Verdict) -> String {
    format!("{label}: {} (rule {})", identity_text(v.equal_identity), v.reason.rule())
}

fn decide(a: &DecideArgs) -> Result<Report> {
    let mut r = Report::new("decide");
    r.input("word", a.word.as_bytes());
    let w = parse(&a.word)?;
    let (schedule_name, schedule) = load_schedule(&mut r, a.schedule.as_ref())?;
    let coded = CodedSet::new(schedule);
    let sigma = match sigma_exponent_check(&w)? {
        SigmaCheck::Zero => 0,
        SigmaCheck::Nonzero(s) => s,
    };
    let nf = if sigma == 0 { Some(to_normal_form(&w)?) } else { None };

    r.line(format!("word: {w}"));
    r.line(format!("schedule: {schedule_name}"));
    r.line(format!("sigma exponent: {sigma}"));
    if let Some(nf) = &nf {
        let q: Vec<String> = query_set(nf).iter().map(i64::to_string).collect();
        r.line(format!("normal form: {nf}"));
        r.line(format!("query set: {{{}}}", q.join(", ")));
    }

    let mut tt = None;
    let mut literal = None;
    if a.mode != DecideMode::Brute {
        let table;
        let oracle: &dyn Oracle = match &a.oracle {
            Some(path) => {
                let text = read_input(&mut r, "oracle", path)?;
                table = TableOracle::parse(&text)?;
                &table
            }
            None => &coded,
        };
        let v = decide_word(&w, oracle)?;
        r.line(verdict_line("tt", &v));
        if let Some(nf) = &nf {
            let l = paper_literal_decider(nf, oracle)?;
            r.line(verdict_line("literal", &l));
            literal = Some(l);
        }
        tt = Some(v);
    }
    let brute = if a.mode != DecideMode::Tt {
        let b = brute_force_identity(&w, &coded)?;
        r.line(format!("brute: {}", identity_text(b)));
        Some(b)
    } else {
        None
    };
    let agreement = match (&tt, brute) {
        (Some(v), Some(b)) => {
            let agree = v.equal_identity == b;
            r.line(format!("agreement: {agree}"));
            if !agree {
                r.violation();
            }
            Some(agree)
        }
        _ => None,
    };
    let mode = format!("{:?}", a.mode).to_lowercase();
    r.bound("mode", &mode);
    r.result(json!({
        "word": w.to_string(),
        "schedule": schedule_name,
        "sigma_exponent": sigma,
        "normal_form": nf.as_ref().map(|n| n.to_string()),
        "query_set": nf.as_ref().map(query_set),
        "tt": tt,
        "literal": literal,
        "brute": brute,
        "agreement": agreement,
    }));
    Ok(r)
}

fn column_function(r: &mut Report, src: &FunctionSource) -> Result<ColumnFunction> {
    if let Some(b) = &src.builtin {
        return ColumnFunction::builtin(b)
            .ok_or_else(|| anyhow!("unknown builtin {b:?}; expected identity, trivial or mod:K"));
    }
    let path = src.table.as_ref().expect("clap requires one source");
    let text = read_input(r, "table", path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    let table = TableFunction::parse(name, &text).with_context(|| format!("in table {}", path.display()))?;
    Ok(ColumnFunction::from_table(table))
}

fn verify(a: &VerifyArgs) -> Result<Report> {
    let mut r = Report::new("verify-code");
    let f = column_function(&mut r, &a.function)?;
    r.bound("bound", a.bound);
    let group = CodedGroup::new(f.clone(), a.layout.into());
    let rep = verify_code_equation(&group, a.x, a.y, a.bound)?;
    r.line(format!(
        "f = {}, x = {}, y = {}, N = {}, layout {}",
        f.name(),
        a.x,
        a.y,
        a.bound,
        rep.layout
    ));
    r.line(match rep.f_witness {
        None => "f agreement: yes".to_string(),
        Some(w) => format!("f agreement: no, f({}, {}) = {} but f({}, {}) = {}", a.x, w.n, w.fx, a.y, w.n, w.fy),
    });
    let region = format!("columns [0, 1] x rows [0, {}]", rep.region.rmax);
    r.line(match rep.perm_witness {
        None => format!("t_x = t_y on {region}: yes"),
        Some(w) => format!(
            "t_x = t_y on {region}: no, {} goes to {} under t_{} and to {} under t_{}",
            w.point, w.image_x, a.x, w.image_y, a.y
        ),
    });
    r.line(format!("consistent: {}", rep.consistent));
    if !rep.consistent {
        r.violation();
    }
    r.result(json!({ "function": f.name(), "report": rep }));
    Ok(r)
}

fn load_presentation(r: &mut Report, name: &str, path: &PathBuf) -> Result<Presentation> {
    let text = read_input(r, name, path)?;
    Presentation::parse(&text).with_context(|| format!("in presentation {}", path.display()))
}

fn abelian(op: &AbelianOp) -> Result<Report> {
    match op {
        AbelianOp::Invariants { file } => {
            let mut r = Report::new("abelian invariants");
            let p = load_presentation(&mut r, "presentation", file)?;
            let inv = abelian_invariants(&p);
            r.line(inv.to_string());
            r.line(format!("free rank {}, invariant factors {:?}", inv.free_rank, inv.invariant_factors));
            r.result(&inv);
            Ok(r)
        }
        AbelianOp::Iso { left, right } => {
            let mut r = Report::new("abelian iso");
            let p = load_presentation(&mut r, "left", left)?;
            let q = load_presentation(&mut r, "right", right)?;
            let (a, b) = (abelian_invariants(&p), abelian_invariants(&q));
            let iso = abelian_iso(&p, &q);
            r.line(iso.to_string());
            r.line(format!("left {a}, right {b}"));
            r.result(json!({ "iso": iso, "left": a, "right": b }));
            Ok(r)
        }
        AbelianOp::Diagonal { files } => {
            let mut r = Report::new("abelian diagonal");
            let set = files
                .iter()
                .enumerate()
                .map(|(i, f)| load_presentation(&mut r, &format!("presentation[{i}]"), f))
                .collect::<Result<Vec<_>>>()?;
            let delta = strong_diagonal(&set);
            let check = diagonal_check(&delta, &set);
            r.human.push_str(&delta.to_string());
            r.line(format!("invariants: {}", check.output));
            for e in &check.entries {
                r.line(format!(
                    "input {}: {} (rank {} < {}: {}, abelian iso: {})",
                    e.index + 1,
                    e.input,
                    e.input.free_rank,
                    check.output.free_rank,
                    e.rank_exceeds,
                    e.abelian_iso
                ));
            }
            r.line(format!("check: {}", if check.passed { "passed" } else { "FAILED" }));
            if !check.passed {
                r.violation();
            }
            r.result(json!({ "presentation": delta.to_string(), "check": check }));
            Ok(r)
        }
    }
}

fn exec_mode(c: &SweepCommon) -> ExecMode {
    if c.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::available()
    }
}

fn schedules(r: &mut Report, path: Option<&PathBuf>) -> Result<Vec<(String, Schedule)>> {
    Ok(match path {
        Some(_) => vec![load_schedule(r, path)?],
        None => standard_schedules()
            .into_iter()
            .map(|(n, s)| (n.to_string(), s))
            .collect(),
    })
}

/// Writes a schedule file with the failing word in its header, so it can be
/// replayed with `decide --mode both --schedule`.
fn dump_word(path: &Path, what: &str, seed: u64, word: &str, schedule: &Schedule) -> Result<()> {
    let text = format!(
        "# {what}, seed {seed}\n# word: {word}\n# replay: wplab decide --mode both --schedule <this file> \"{word}\"\n{schedule}"
    );
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn dump_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sweep(kind: &SweepKind, seed: u64) -> Result<Report> {
    match kind {
        SweepKind::Differential {
            cases,
            schedule,
            max_len,
            zero_sigma,
            common,
        } => {
            if !(0.0..=1.0).contains(zero_sigma) {
                bail!("--zero-sigma must lie in [0, 1]");
            }
            let mut r = Report::new("sweep differential");
            r.bound("cases", cases);
            r.bound("max_len", max_len);
            r.bound("zero_sigma", zero_sigma);
            let params = WordParams {
                max_len: *max_len,
                zero_sigma: *zero_sigma,
                ..WordParams::default()
            };
            let mut results = Vec::new();
            let mut dumped = false;
            for (name, s) in schedules(&mut r, schedule.as_ref())? {
                let rep = differential_sweep(&CodedSet::new(s.clone()), *cases, seed, &params, exec_mode(common))?;
                r.line(format!("{name}: {}/{} agree", rep.agree, rep.cases));
                if let Some(first) = rep.disagreements.first() {
                    r.violation();
                    if let (Some(path), false) = (&common.dump, dumped) {
                        let what = format!("differential counterexample, case {}", first.index);
                        dump_word(path, &what, seed, &first.word, &s)?;
                        dumped = true;
                    }
                }
                results.push(json!({ "schedule": name, "report": rep }));
            }
            r.result(results);
            Ok(r)
        }
        SweepKind::Mreduction { lo, hi, schedule, common } => {
            if lo > hi {
                bail!("--lo must not exceed --hi");
            }
            let mut r = Report::new("sweep mreduction");
            r.bound("lo", lo);
            r.bound("hi", hi);
            let mut results = Vec::new();
            let mut dumped = false;
            for (name, s) in schedules(&mut r, schedule.as_ref())? {
                let coded = CodedSet::new(s.clone());
                let rep = mreduction_sweep(&coded, *lo, *hi, &|x| coded.contains(x), exec_mode(common))?;
                if rep.mismatches.is_empty() {
                    r.line(format!("{name}: exact match with membership on [{lo}, {hi}] ({} members)", rep.members));
                } else {
                    r.line(format!("{name}: {} mismatches on [{lo}, {hi}]", rep.mismatches.len()));
                    r.violation();
                    if let (Some(path), false) = (&common.dump, dumped) {
                        let x = rep.mismatches[0].x;
                        let what = format!("m-reduction counterexample, x = {x}");
                        dump_word(path, &what, seed, &m_reduction_word(x).to_string(), &s)?;
                        dumped = true;
                    }
                }
                results.push(json!({ "schedule": name, "report": rep }));
            }
            r.result(results);
            Ok(r)
        }
        SweepKind::Queryset { cases, schedule, common } => {
            let mut r = Report::new("sweep queryset");
            r.bound("cases", cases);
            let mut results = Vec::new();
            let mut dumped = false;
            for (name, s) in schedules(&mut r, schedule.as_ref())? {
                let rep = queryset_sweep(&CodedSet::new(s.clone()), *cases, seed, &WordParams::default(), exec_mode(common))?;
                if rep.violations.is_empty() {
                    r.line(format!("{name}: static under {cases} oracle swaps"));
                } else {
                    r.line(format!("{name}: {} violations", rep.violations.len()));
                    r.violation();
                    if let (Some(path), false) = (&common.dump, dumped) {
                        let v = &rep.violations[0];
                        let what = format!("query-set counterexample ({}), case {}", v.kind, v.index);
                        dump_word(path, &what, seed, &v.word, &s)?;
                        dumped = true;
                    }
                }
                results.push(json!({ "schedule": name, "report": rep }));
            }
            r.result(results);
            Ok(r)
        }
        SweepKind::Coding {
            function,
            max,
            bound,
            layout,
            common,
        } => {
            let mut r = Report::new("sweep coding");
            let f = column_function(&mut r, function)?;
            r.bound("max", max);
            r.bound("bound", bound);
            let group = CodedGroup::new(f, (*layout).into());
            let rep = coding_sweep(&group, *max, *bound, exec_mode(common))?;
            r.line(format!(
                "{} ({}): {} pairs, {} related, {} inconsistent",
                rep.function,
                group.layout(),
                rep.pairs,
                rep.related_pairs,
                rep.inconsistencies.len()
            ));
            for c in rep.inconsistencies.iter().take(5) {
                r.line(format!(
                    "  ({}, {}): f agreement {}, permutation agreement {}",
                    c.x, c.y, c.f_agree, c.perm_agree
                ));
            }
            if let Some(first) = rep.inconsistencies.first() {
                r.violation();
                if let Some(path) = &common.dump {
                    dump_text(path, &serde_json::to_string_pretty(first)?)?;
                }
            }
            r.result(&rep);
            Ok(r)
        }
        SweepKind::Snf {
            cases,
            max_dim,
            max_entry,
            common,
        } => {
            if *max_dim == 0 {
                bail!("--max-dim must be positive");
            }
            let mut r = Report::new("sweep snf");
            r.bound("cases", cases);
            r.bound("max_dim", max_dim);
            r.bound("max_entry", max_entry);
            let rep = snf_sweep(*cases, seed, *max_dim, max_entry.abs(), exec_mode(common));
            r.line(format!(
                "{} matrices ({} square nonsingular), {} failures",
                rep.cases,
                rep.square_nonsingular,
                rep.failures.len()
            ));
            if let Some(first) = rep.failures.first() {
                r.violation();
                if let Some(path) = &common.dump {
                    dump_text(path, &format!("# {}\n{}\n", first.problem, first.matrix))?;
                }
            }
            r.result(&rep);
            Ok(r)
        }
        SweepKind::Diagonal { cases, common } => {
            let mut r = Report::new("sweep diagonal");
            r.bound("cases", cases);
            let rep = diagonal_sweep(*cases, seed, exec_mode(common));
            r.line(format!("{} sets, {} failures", rep.cases, rep.failures.len()));
            if let Some(first) = rep.failures.first() {
                r.violation();
                if let Some(path) = &common.dump {
                    let parts: Vec<String> = first
                        .presentations
                        .iter()
                        .enumerate()
                        .map(|(i, p)| format!("# presentation {}\n{p}", i + 1))
                        .collect();
                    dump_text(path, &parts.concat())?;
                }
            }
            r.result(&rep);
            Ok(r)
        }
    }
}
