//! Verification suites comparing closed forms against the oracle and checking
//! the word and Zeckendorf identities. Used by `fibnim verify` and the
//! acceptance tests.

use std::fmt;

use serde::Serialize;

use crate::classify::{
    classify_34n, classify_one_pile, classify_pow2, classify_two_pile_zeck, one_pile_forms_agree, ClassifyError,
    TwoPileWordClassifier,
};
use crate::fib::{fib_value, in_wythoff_composite, nim_sum, z1, BeattyClass, ExtNat, Wythoff};
use crate::solver::{Dynamic, Outcome, Position, SolveError, Solver, TableEntry};
use crate::word::{
    fib_word_concat, fib_word_morphism, fib_word_zeck, in_ps, ps_set, HybridRules, LetterStream, WordError,
    WordSpec,
};

const INF: u64 = u64::MAX;

/// Complementary values `b` with `(i, j, b; inf)` in P, for `i, j <= 15`.
/// `INF` marks the pair with no complementary value.
pub const KNOWN_COMP_VALUES: [[u64; 16]; 16] = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15],
    [1, 0, 4, 6, 2, 9, 3, 11, 12, 5, 14, 7, 8, 17, 10, 16],
    [2, 4, 0, 7, 1, 10, 11, 3, 19, 15, 5, 6, 14, 24, 12, 9],
    [3, 6, 7, 0, INF, 11, 1, 2, 16, 12, 13, 5, 9, 10, 17, 18],
    [4, 2, 1, INF, 0, 7, 10, 5, 17, 16, 6, 18, 13, 12, 19, 69],
    [5, 9, 10, 11, 7, 0, 35, 4, 15, 1, 2, 3, 18, 22, 23, 8],
    [6, 3, 11, 1, 10, 35, 0, 8, 7, 17, 4, 2, 16, 14, 13, 26],
    [7, 11, 3, 2, 5, 4, 8, 0, 6, 13, 27, 1, 15, 9, 22, 12],
    [8, 12, 19, 16, 17, 15, 7, 6, 0, 53, 11, 10, 1, 57, 35, 5],
    [9, 5, 15, 12, 16, 1, 17, 13, 53, 0, 21, 27, 3, 7, 76, 2],
    [10, 14, 5, 13, 6, 2, 4, 27, 11, 21, 0, 8, 26, 3, 1, 24],
    [11, 7, 6, 5, 18, 3, 2, 1, 10, 27, 8, 0, 22, 21, 64, 88],
    [12, 8, 14, 9, 13, 18, 16, 15, 1, 3, 26, 22, 0, 4, 2, 7],
    [13, 17, 24, 10, 12, 22, 14, 9, 57, 7, 3, 21, 4, 0, 6, 20],
    [14, 10, 12, 17, 19, 23, 13, 22, 35, 76, 1, 64, 2, 6, 0, 21],
    [15, 16, 9, 18, 69, 8, 26, 12, 5, 2, 24, 88, 7, 20, 21, 0],
];

/// Three-pile P positions with unusually large complementary values.
pub const REMARK_POSITIONS: [[u64; 3]; 4] = [[1, 47, 72], [8, 9, 53], [2, 41, 139], [2, 93, 345]];

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Word(#[from] WordError),
}

const MAX_LISTED: usize = 10;

/// Outcome of one suite: how many cases were checked and which failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub checked: u64,
    pub failed: u64,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Report {
            suite: suite.into(),
            checked: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    /// Record one case; `describe` runs only on failure.
    pub fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_LISTED {
                self.failures.push(describe());
            }
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < MAX_LISTED {
                self.failures.push(format!("{}: {f}", other.suite));
            }
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "{}: pass ({} checked)", self.suite, self.checked)
        } else {
            write!(f, "{}: FAIL ({} of {} failed)", self.suite, self.failed, self.checked)?;
            for line in &self.failures {
                write!(f, "\n  {line}")?;
            }
            Ok(())
        }
    }
}

/// The computed complementary table for `i, j <= 15` against the known values.
pub fn table1(solver: &mut Solver, cap: u64) -> Result<Report, VerifyError> {
    let table = solver.comp_table(15, cap)?;
    let mut report = Report::new("table1");
    for (i, row) in KNOWN_COMP_VALUES.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            let got = table.get(i, j).expect("16x16 table");
            let ok = match got {
                TableEntry::Value(v) => v == want,
                TableEntry::NoneByTheorem => want == INF,
                TableEntry::UnknownUpTo(_) => false,
            };
            report.check(ok, || format!("({i},{j}): got {got}, want {}", show(want)));
        }
    }
    Ok(report)
}

fn show(v: u64) -> String {
    if v == INF {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// One-pile rule against the oracle for `n <= max_n`, `r` in `1..=n+1` and
/// `inf`; also checks the word form of the rule on the same range.
pub fn one_pile(solver: &mut Solver, max_n: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new("one-pile");
    for n in 0..=max_n {
        let threshold = solver.threshold(&[n], Dynamic::Fibonacci)?;
        let bounds = (1..=n + 1).map(ExtNat::Finite).chain([ExtNat::Inf]);
        for r in bounds {
            let oracle = outcome_from(threshold, r);
            let got = classify_one_pile(n, r)?;
            report.check(got.outcome == oracle, || format!("({n}; {r}): classifier {}, oracle {oracle}", got.outcome));
            if let Some(take) = got.winning_take {
                let next = Position::fibonacci(vec![n - take], 2 * take);
                let wins = solver.outcome(&next)? == Outcome::P;
                report.check(wins, || format!("({n}; {r}): take {take} does not win"));
            }
        }
    }
    let agree = one_pile_forms_agree(max_n, max_n + 1)?;
    report.check(agree, || "Zeckendorf and word forms disagree".into());
    Ok(report)
}

fn outcome_from(threshold: Option<u64>, bound: ExtNat) -> Outcome {
    match threshold {
        Some(t) if ExtNat::Finite(t) <= bound => Outcome::N,
        _ => Outcome::P,
    }
}

/// Two-pile classifiers on `(m, m + k; r)` for `m <= max_m`, `k <= max_k`,
/// `1 <= r <= max_r`: the Zeckendorf form against the oracle and the word
/// form against the Zeckendorf form.
pub fn two_pile(
    solver: &mut Solver,
    max_m: u64,
    max_k: u64,
    max_r: u64,
    rules: HybridRules,
) -> Result<Report, VerifyError> {
    let mut zeck = Report::new("zeckendorf form vs oracle");
    let mut word = Report::new("word form vs zeckendorf form");
    let mut words = TwoPileWordClassifier::with_rules(rules);
    for m in 0..=max_m {
        let thresholds = (0..=max_k)
            .map(|k| solver.threshold(&[m, m + k], Dynamic::Fibonacci))
            .collect::<Result<Vec<_>, _>>()?;
        for r in 1..=max_r {
            for k in 0..=max_k {
                let oracle = outcome_from(thresholds[k as usize], ExtNat::Finite(r));
                let (z, case) = classify_two_pile_zeck(m, k, r)?;
                zeck.check(z == oracle, || {
                    format!("({m},{};{r}): case {} gives {z}, oracle {oracle}", m + k, case.tag)
                });
                if m > 0 {
                    let w = words.classify(m, k, r)?;
                    word.check(w == z, || format!("({m},{};{r}): word {w}, zeckendorf {z}", m + k));
                }
            }
        }
    }
    let mut report = Report::new("two-pile");
    report.merge(zeck);
    report.merge(word);
    Ok(report)
}

/// `(3, 4, n; inf)` is N for `n <= max_n` and the Beatty reply reaches P.
pub fn three_four(solver: &mut Solver, max_n: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new("three-four-n");
    for n in 0..=max_n {
        let pos = Position::fibonacci(vec![3, 4, n], ExtNat::Inf);
        let oracle = solver.outcome(&pos)?;
        report.check(oracle == Outcome::N, || format!("{pos} is P"));
        let (_, reply) = classify_34n(n);
        let mv = reply.take.in_position(&pos);
        let reached = mv.and_then(|mv| pos.apply(mv).ok());
        report.check(reached.as_ref() == Some(&reply.successor), || {
            format!("{pos}: reply {:?} does not reach {}", reply.take, reply.successor)
        });
        let succ = solver.outcome(&reply.successor)?;
        report.check(succ == Outcome::P, || {
            format!("{pos}: {} reply leads to {} which is N", reply.class, reply.successor)
        });
    }
    Ok(report)
}

/// The four Beatty classes partition `0..=limit`, and their Zeckendorf and
/// floor-function definitions agree.
pub fn beatty(limit: u64) -> Report {
    let mut report = Report::new("beatty");
    for n in 0..=limit {
        let hits: Vec<BeattyClass> = BeattyClass::ALL.into_iter().filter(|c| c.contains(n)).collect();
        report.check(hits.len() == 1, || format!("{n} lies in {hits:?}"));
        for c in BeattyClass::ALL {
            report.check(c.contains(n) == c.contains_by_floor(n), || {
                format!("{n}: {c} predicate and floor definition disagree")
            });
        }
    }
    report
}

/// The listed large-complementary-value positions are P. The last two need
/// noticeably more memory and run only with `long`.
pub fn remarks(solver: &mut Solver, long: bool) -> Result<Report, VerifyError> {
    let mut report = Report::new("remarks");
    let count = if long { REMARK_POSITIONS.len() } else { 2 };
    for piles in &REMARK_POSITIONS[..count] {
        let pos = Position::fibonacci(piles.to_vec(), ExtNat::Inf);
        let oracle = solver.outcome(&pos)?;
        report.check(oracle == Outcome::P, || format!("{pos} is N"));
    }
    Ok(report)
}

/// Power-of-two classifier against the oracle on every multiset of at most
/// `max_piles` piles of size at most `max_size`, bounds `1..=max_r` and `inf`.
/// At `inf`, P must coincide with zero nim-sum.
pub fn pow2(solver: &mut Solver, max_piles: usize, max_size: u64, max_r: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new("pow2");
    let mut piles = Vec::new();
    multisets(max_piles, max_size, &mut piles, &mut |piles| {
        let threshold = solver.threshold(piles, Dynamic::PowerOfTwo)?;
        for r in (1..=max_r).map(ExtNat::Finite).chain([ExtNat::Inf]) {
            let oracle = outcome_from(threshold, r);
            let got = classify_pow2(piles, r)?;
            report.check(got.outcome == oracle, || {
                format!("{piles:?} bound {r}: classifier {}, oracle {oracle}", got.outcome)
            });
            if let Some(take) = got.winning_move {
                let pos = Position::power_of_two(piles.to_vec(), r);
                let next = take.in_position(&pos).and_then(|mv| pos.apply(mv).ok());
                let wins = match next {
                    Some(next) => solver.outcome(&next)? == Outcome::P,
                    None => false,
                };
                report.check(wins, || format!("{piles:?} bound {r}: {take:?} does not win"));
            }
        }
        let zero_sum = nim_sum(piles) == 0;
        let p_at_inf = threshold.is_none();
        report.check(zero_sum == p_at_inf, || {
            format!("{piles:?}: nim-sum zero is {zero_sum} but P at inf is {p_at_inf}")
        });
        Ok(())
    })?;
    Ok(report)
}

// Calls `f` on every sorted vector of 1..=max_len values in 0..=max_value.
fn multisets(
    max_len: usize,
    max_value: u64,
    prefix: &mut Vec<u64>,
    f: &mut impl FnMut(&[u64]) -> Result<(), VerifyError>,
) -> Result<(), VerifyError> {
    if !prefix.is_empty() {
        f(prefix)?;
    }
    if prefix.len() == max_len {
        return Ok(());
    }
    let start = prefix.last().copied().unwrap_or(0);
    for v in start..=max_value {
        prefix.push(v);
        multisets(max_len, max_value, prefix, f)?;
        prefix.pop();
    }
    Ok(())
}

/// Fibonacci-word identities up to `limit` letters or values: the three
/// constructions agree, partial-sum sets nest and shift, membership matches
/// enumeration, and the worked hybrid words come out letter for letter.
pub fn words(limit: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new("words");
    let len = limit as usize;
    let concat = fib_word_concat(len);
    let zeck = fib_word_zeck(len);
    let morph = fib_word_morphism(len);
    report.check(concat == zeck && zeck == morph, || "the three constructions disagree".into());

    let sets = (1..=13)
        .map(|a| ps_set(a, limit))
        .collect::<Result<Vec<_>, _>>()?;
    for a in 1..=12u32 {
        let set_a = &sets[a as usize - 1];
        for n in 0..=limit {
            report.check(set_a.contains(n) == in_ps(a, n), || format!("PS(w_{a}) membership of {n}"));
        }
        for b in 1..=a {
            let set_b = &sets[b as usize - 1];
            let nested = set_a.members().iter().all(|&n| set_b.contains(n));
            report.check(nested, || format!("PS(w_{a}) is not inside PS(w_{b})"));
        }
        report.merge(lemma4(a, limit)?);
    }

    for (m, r, want) in worked_hybrid_examples() {
        let spec = WordSpec::for_position(m, r, HybridRules::default())?;
        let got = LetterStream::new(spec).values(want.len());
        report.check(got == want, || format!("m={m} r={r}: got {got:?}"));
    }
    Ok(report)
}

/// Each `n <= bound` in `PS(w_a)` but not `PS(w_{a+1})` has
/// `n - F_{a+1}` in `PS(w_{a+2})`.
pub fn lemma4(a: u32, bound: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new(format!("shift a={a}"));
    let here = ps_set(a, bound)?;
    let next = ps_set(a + 1, bound)?;
    let two_up = ps_set(a + 2, bound)?;
    let step = fib_value(a + 1);
    for &n in here.members() {
        if next.contains(n) {
            continue;
        }
        let ok = n.checked_sub(step).is_some_and(|d| two_up.contains(d));
        report.check(ok, || format!("n = {n}"));
    }
    Ok(report)
}

/// `(m, r, letters)` for the worked hybrid words.
fn worked_hybrid_examples() -> Vec<(u64, u64, Vec<u64>)> {
    vec![
        (26, 12, vec![13, 8, 13, 21, 13, 8, 13, 13, 8, 13, 21, 13, 8, 13, 21, 13, 8, 13]),
        (26, 4, vec![8, 5, 8, 5, 3, 5, 8, 5, 8, 8, 5, 8, 5, 3, 5, 8, 5, 8]),
        (25, 7, vec![8, 5, 8, 13, 8, 5, 8, 8, 5, 8, 13, 8, 5, 8, 13]),
    ]
}

/// `z1(n - k) <= 2k` for `2 <= n <= max_n`, `1 <= k < z1(n)`, and the
/// run-sum identity `F_t + ... + F_{t+s-1} = F_{t+s+1} - F_{t+1}` for
/// `2 <= t, s <= 20` (with `s >= 1`).
pub fn identities(max_n: u64) -> Report {
    let mut report = Report::new("identities");
    for n in 2..=max_n {
        let cap = z1(n).finite().expect("n > 0");
        for k in 1..cap {
            let ok = z1(n - k) <= ExtNat::Finite(2 * k);
            report.check(ok, || format!("z1({n} - {k}) > {}", 2 * k));
        }
    }
    for t in 2..=20u32 {
        for s in 1..=20u32 {
            let sum: u64 = (t..t + s).map(fib_value).sum();
            let ok = sum == fib_value(t + s + 1) - fib_value(t + 1);
            report.check(ok, || format!("t={t} s={s}"));
        }
    }
    report
}

/// A family of three-pile positions `(a, b, z; bound)` that is P whenever
/// `z` lies in `composite - shift`. Other `z` may give P positions too.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Family {
    pub a: u64,
    pub b: u64,
    pub bound: u64,
    pub composite: &'static [Wythoff],
    pub shift: u64,
}

impl Family {
    const fn new(a: u64, b: u64, bound: u64, composite: &'static [Wythoff], shift: u64) -> Self {
        Family {
            a,
            b,
            bound,
            composite,
            shift,
        }
    }

    pub fn contains(&self, z: u64) -> bool {
        in_wythoff_composite(self.composite, z + self.shift)
    }

    pub fn set_label(&self) -> String {
        let word: String = self.composite.iter().map(|w| format!("{w:?}")).collect();
        match self.shift {
            0 => word,
            s => format!("{word}-{s}"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},z;{}) with z in {}", self.a, self.b, self.bound, self.set_label())
    }
}

const A: Wythoff = Wythoff::A;
const B: Wythoff = Wythoff::B;

/// Three-pile P families with a small fixed part.
pub const FAMILIES: [Family; 15] = [
    Family::new(0, 1, 2, &[B], 1),
    Family::new(0, 2, 4, &[A, B], 1),
    Family::new(0, 3, 2, &[A, B], 0),
    Family::new(0, 1, 6, &[B, B], 4),
    Family::new(1, 1, 2, &[B], 2),
    Family::new(1, 1, 4, &[B, B], 0),
    Family::new(1, 2, 2, &[B, B], 1),
    Family::new(1, 3, 2, &[A, B], 2),
    Family::new(2, 2, 2, &[B], 2),
    Family::new(2, 2, 4, &[B, B], 0),
    Family::new(2, 3, 2, &[A, B], 1),
    Family::new(3, 3, 2, &[B], 2),
    Family::new(2, 4, 2, &[A, B], 2),
    Family::new(1, 4, 4, &[A, B], 1),
    Family::new(0, 4, 6, &[B, B], 1),
];

/// Check a family against the oracle for members `z <= max_z`.
pub fn family(solver: &mut Solver, fam: &Family, max_z: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new(fam.to_string());
    for z in (0..=max_z).filter(|&z| fam.contains(z)) {
        let pos = Position::fibonacci(vec![fam.a, fam.b, z], fam.bound);
        let is_p = solver.outcome(&pos)? == Outcome::P;
        report.check(is_p, || format!("{pos} is N"));
    }
    Ok(report)
}

pub fn families(solver: &mut Solver, max_z: u64) -> Result<Report, VerifyError> {
    let mut report = Report::new("families");
    for fam in &FAMILIES {
        report.merge(family(solver, fam, max_z)?);
    }
    Ok(report)
}
