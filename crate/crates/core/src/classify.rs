//! Closed-form outcome classifiers. Each one is cross-checked against
//! [`Solver`](crate::solver::Solver) in the tests and by `fibnim verify`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fib::{beatty_class, fib_bracket, fib_value, nim_sum, smallest_bit, z1, zeckendorf, BeattyClass, ExtNat};
use crate::solver::{Dynamic, Move, Outcome, Position};
use crate::word::{in_ps, ps_set, HybridRules, LetterStream, PsSet, WordError, WordSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("move bound must be at least 1")]
    ZeroBound,
    #[error("pile size must be at least 1")]
    ZeroPile,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A take named by the size of the pile it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PileTake {
    pub pile_size: u64,
    pub take: u64,
}

impl PileTake {
    /// The equivalent [`Move`] in `pos`, if `pos` has a pile of that size.
    pub fn in_position(self, pos: &Position) -> Option<Move> {
        let pile = pos.piles().iter().position(|&p| p == self.pile_size)?;
        Some(Move {
            pile,
            take: self.take,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicWinner {
    FirstPlayer,
    SecondPlayer,
}

/// Classic one-pile game, where the first move may not empty the pile.
pub fn classify_classic(n: u64) -> Result<ClassicWinner, ClassifyError> {
    if n == 0 {
        return Err(ClassifyError::ZeroPile);
    }
    Ok(if zeckendorf(n).len() == 1 {
        ClassicWinner::SecondPlayer
    } else {
        ClassicWinner::FirstPlayer
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnePileVerdict {
    pub outcome: Outcome,
    /// `z1(n)` when the position is N.
    pub winning_take: Option<u64>,
}

/// `(n; r)` is P exactly when `z1(n) > r`; otherwise removing `z1(n)` wins.
pub fn classify_one_pile(n: u64, r: ExtNat) -> Result<OnePileVerdict, ClassifyError> {
    if r == ExtNat::Finite(0) {
        return Err(ClassifyError::ZeroBound);
    }
    let smallest = z1(n);
    // z1(0) = inf, which must beat every bound including inf
    let verdict = if n == 0 || smallest > r {
        OnePileVerdict {
            outcome: Outcome::P,
            winning_take: None,
        }
    } else {
        OnePileVerdict {
            outcome: Outcome::N,
            winning_take: smallest.finite(),
        }
    };
    debug_assert_eq!(Ok(verdict.outcome), one_pile_word_form(n, r));
    Ok(verdict)
}

/// Word form of the one-pile rule: with `F_t <= r < F_{t+1}`, `(n; r)` is P
/// exactly when `n` is a partial sum of `w_t`. Enumerates the word.
pub fn one_pile_word_form(n: u64, r: ExtNat) -> Result<Outcome, ClassifyError> {
    let r = match r {
        ExtNat::Finite(0) => return Err(ClassifyError::ZeroBound),
        ExtNat::Finite(r) => r,
        // any take is allowed, so only the empty pile is P
        ExtNat::Inf => return Ok(if n == 0 { Outcome::P } else { Outcome::N }),
    };
    let t = fib_bracket(r).expect("r >= 1");
    Ok(if ps_set(t, n)?.contains(n) {
        Outcome::P
    } else {
        Outcome::N
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    One,
    Two,
    Three,
    FourA,
    FourB,
    FiveA,
    FiveB,
}

impl CaseTag {
    pub fn outcome(self) -> Outcome {
        match self {
            CaseTag::One | CaseTag::FourA | CaseTag::FiveA => Outcome::N,
            CaseTag::Two | CaseTag::Three | CaseTag::FourB | CaseTag::FiveB => Outcome::P,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::One => "1",
            CaseTag::Two => "2",
            CaseTag::Three => "3",
            CaseTag::FourA => "4a",
            CaseTag::FourB => "4b",
            CaseTag::FiveA => "5a",
            CaseTag::FiveB => "5b",
        })
    }
}

/// Which branch of the two-pile classification applies, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoPileCase {
    pub tag: CaseTag,
    /// `F_t <= r < F_{t+1}`.
    pub t: u32,
    /// Number of terms `F_t + ... + F_{t+s-1}` fitting under `m` (case 4).
    pub s: Option<u32>,
    /// `z2(k) = F_{t+d}` (case 5).
    pub d: Option<u32>,
}

/// `F_t + F_{t+1} + ... + F_{t+count-1}`.
fn run_sum(t: u32, count: u32) -> u64 {
    (t..t + count).map(fib_value).fold(0u64, u64::saturating_add)
}

/// Classification of `(m, m + k; r)` through the Zeckendorf terms of `k`.
pub fn classify_two_pile_zeck(m: u64, k: u64, r: u64) -> Result<(Outcome, TwoPileCase), ClassifyError> {
    let t = fib_bracket(r).map_err(|_| ClassifyError::ZeroBound)?;
    let rep = zeckendorf(k);
    let e = rep.indices().first().copied();
    let second = rep.indices().get(1).copied();
    let case = |tag, s, d| TwoPileCase { tag, t, s, d };

    let found = match e {
        Some(e) if e <= t => case(CaseTag::One, None, None),
        // k = 0 has z1 = inf, which lands here with the mirror positions
        None => case(CaseTag::Two, None, None),
        Some(e) if e >= t + 2 => case(CaseTag::Two, None, None),
        Some(_) if m < fib_value(t) => case(CaseTag::Three, None, None),
        Some(_) => {
            // z2(k) = F_{t+d} with d >= 3, or inf
            let d = second.map(|i| i - t);
            match d {
                Some(d) if m >= run_sum(t, d - 2) => {
                    let tag = if d % 2 == 1 { CaseTag::FiveA } else { CaseTag::FiveB };
                    case(tag, None, Some(d))
                }
                _ => {
                    let mut s = 1;
                    while run_sum(t, s + 1) <= m {
                        s += 1;
                    }
                    let tag = if s % 2 == 1 { CaseTag::FourA } else { CaseTag::FourB };
                    case(tag, Some(s), d)
                }
            }
        }
    };
    Ok((found.tag.outcome(), found))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PileSide {
    Smaller,
    Larger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoPileMove {
    pub side: PileSide,
    pub take: u64,
}

impl TwoPileMove {
    /// `(m', k', bound)` after the move from `(m, m + k)`.
    pub fn successor(self, m: u64, k: u64) -> (u64, u64, u64) {
        match self.side {
            PileSide::Smaller => (m - self.take, k + self.take, 2 * self.take),
            PileSide::Larger => (m, k - self.take, 2 * self.take),
        }
    }
}

/// A winning move from `(m, m + k; r)` following the case analysis, or `None`
/// for P positions.
pub fn suggest_move_two_pile(m: u64, k: u64, r: u64) -> Result<Option<TwoPileMove>, ClassifyError> {
    let (_, case) = classify_two_pile_zeck(m, k, r)?;
    let mv = match case.tag {
        CaseTag::One => {
            let rep = zeckendorf(k);
            let e = rep.indices()[0];
            let next = rep.indices().get(1).copied();
            if next == Some(e + 2) && m >= fib_value(e + 1) {
                // F_{e-1} from the smaller pile pushes z1 of the gap past F_{e+2}
                Some(TwoPileMove {
                    side: PileSide::Smaller,
                    take: fib_value(e - 1),
                })
            } else {
                Some(TwoPileMove {
                    side: PileSide::Larger,
                    take: fib_value(e),
                })
            }
        }
        CaseTag::FourA | CaseTag::FiveA => Some(TwoPileMove {
            side: PileSide::Smaller,
            take: fib_value(case.t),
        }),
        _ => None,
    };
    Ok(mv)
}

/// `(m, m + k; r)` is P exactly when `k` lies in the partial-sum set `sigma`.
pub fn classify_two_pile_word(m: u64, k: u64, r: u64) -> Result<Outcome, ClassifyError> {
    TwoPileWordClassifier::default().classify(m, k, r)
}

/// Word classifier that caches partial-sum sets per word, for sweeps.
#[derive(Debug, Default)]
pub struct TwoPileWordClassifier {
    rules: HybridRules,
    cache: HashMap<WordSpec, PsSet>,
}

impl TwoPileWordClassifier {
    pub fn with_rules(rules: HybridRules) -> Self {
        Self {
            rules,
            cache: HashMap::new(),
        }
    }

    pub fn classify(&mut self, m: u64, k: u64, r: u64) -> Result<Outcome, ClassifyError> {
        if r == 0 {
            return Err(ClassifyError::ZeroBound);
        }
        let spec = WordSpec::for_position(m, r, self.rules)?;
        let stale = self.cache.get(&spec).is_none_or(|s| s.bound() < k);
        if stale {
            let bound = self.cache.get(&spec).map_or(k, |s| k.max(2 * s.bound()));
            let set = LetterStream::with_rules(spec, self.rules).partial_sums(bound);
            self.cache.insert(spec, set);
        }
        Ok(if self.cache[&spec].contains(k) {
            Outcome::P
        } else {
            Outcome::N
        })
    }
}

/// Winning reply from `(3, 4, n; inf)`, chosen by the Beatty class of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reply34 {
    pub class: BeattyClass,
    pub take: PileTake,
    pub successor: Position,
}

/// `(3, 4, n; inf)` is always N.
pub fn classify_34n(n: u64) -> (Outcome, Reply34) {
    let class = beatty_class(n);
    let (from, take, rest) = match class {
        BeattyClass::BMinus2 => (4, 1, [3, 3]),
        BeattyClass::ABMinus2 => (3, 1, [2, 4]),
        BeattyClass::ABMinus1 => (3, 2, [1, 4]),
        BeattyClass::BBMinus1 => (3, 3, [0, 4]),
    };
    let successor = Position::fibonacci(vec![rest[0], rest[1], n], 2 * take);
    (
        Outcome::N,
        Reply34 {
            class,
            take: PileTake { pile_size: from, take },
            successor,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pow2Verdict {
    pub outcome: Outcome,
    pub winning_move: Option<PileTake>,
}

/// Power-of-two nim: P exactly when the lowest bit of the nim-sum exceeds
/// `r`. Otherwise removing that lowest bit from any pile at least that large
/// clears it from the nim-sum and wins.
pub fn classify_pow2(piles: &[u64], r: ExtNat) -> Result<Pow2Verdict, ClassifyError> {
    if r == ExtNat::Finite(0) {
        return Err(ClassifyError::ZeroBound);
    }
    let sum = nim_sum(piles);
    let low = smallest_bit(sum);
    if sum == 0 || low > r {
        return Ok(Pow2Verdict {
            outcome: Outcome::P,
            winning_move: None,
        });
    }
    let take = low.finite().expect("finite when <= r");
    let pile_size = piles
        .iter()
        .copied()
        .filter(|&p| p >= take)
        .min()
        .expect("a pile carries the nim-sum's top bit, so one is at least its low bit");
    Ok(Pow2Verdict {
        outcome: Outcome::N,
        winning_move: Some(PileTake { pile_size, take }),
    })
}

/// A classifier's verdict on a position, for comparison with the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub classifier: String,
    pub outcome: Outcome,
    pub suggested: Option<Move>,
}

/// Every classifier whose hypotheses cover `pos`. Two-pile classifiers run on
/// the bound clamped to the largest pile, which has the same options as an
/// unbounded first move.
pub fn applicable_verdicts(pos: &Position) -> Result<Vec<ClassifierVerdict>, ClassifyError> {
    let mut out = Vec::new();
    if pos.bound() == ExtNat::Finite(0) {
        return Ok(out);
    }
    let nonzero: Vec<u64> = pos.piles().iter().copied().filter(|&p| p > 0).collect();
    let locate = |pt: Option<PileTake>| pt.and_then(|pt| pt.in_position(pos));

    match pos.dynamic() {
        Dynamic::PowerOfTwo => {
            let v = classify_pow2(pos.piles(), pos.bound())?;
            out.push(ClassifierVerdict {
                classifier: "pow2".into(),
                outcome: v.outcome,
                suggested: locate(v.winning_move),
            });
        }
        Dynamic::Fibonacci => match nonzero.as_slice() {
            [n] => {
                let v = classify_one_pile(*n, pos.bound())?;
                out.push(ClassifierVerdict {
                    classifier: "one-pile".into(),
                    outcome: v.outcome,
                    suggested: locate(v.winning_take.map(|take| PileTake { pile_size: *n, take })),
                });
            }
            [m, larger] => {
                let (m, k) = (*m, larger - m);
                let r = pos.effective_bound();
                let (outcome, case) = classify_two_pile_zeck(m, k, r)?;
                let suggested = suggest_move_two_pile(m, k, r)?.map(|mv| PileTake {
                    pile_size: match mv.side {
                        PileSide::Smaller => m,
                        PileSide::Larger => m + k,
                    },
                    take: mv.take,
                });
                out.push(ClassifierVerdict {
                    classifier: format!("two-pile-zeck(case {})", case.tag),
                    outcome,
                    suggested: locate(suggested),
                });
                out.push(ClassifierVerdict {
                    classifier: "two-pile-word".into(),
                    outcome: classify_two_pile_word(m, k, r)?,
                    suggested: None,
                });
            }
            _ => {}
        },
    }
    if pos.dynamic() == Dynamic::Fibonacci && pos.bound().is_inf() && pos.piles().len() == 3 {
        let piles = pos.piles();
        let n = if piles[..2] == [3, 4] {
            Some(piles[2])
        } else if piles[0] == 3 && piles[2] == 4 {
            Some(piles[1])
        } else if piles[1..] == [3, 4] {
            Some(piles[0])
        } else {
            None
        };
        if let Some(n) = n {
            let (outcome, reply) = classify_34n(n);
            out.push(ClassifierVerdict {
                classifier: format!("three-four-n({})", reply.class),
                outcome,
                suggested: reply.take.in_position(pos),
            });
        }
    }
    Ok(out)
}

/// Whether the Zeckendorf test and the word test of the one-pile rule agree
/// for every `n <= max_n` and `1 <= r <= max_r`.
pub fn one_pile_forms_agree(max_n: u64, max_r: u64) -> Result<bool, ClassifyError> {
    let max_t = fib_bracket(max_r.max(1)).expect("positive");
    let sets: Vec<PsSet> = (2..=max_t).map(|t| ps_set(t, max_n)).collect::<Result<_, _>>()?;
    for r in 1..=max_r {
        let t = fib_bracket(r).expect("positive");
        let set = &sets[(t - 2) as usize];
        for n in 0..=max_n {
            if (z1(n) > ExtNat::Finite(r)) != set.contains(n) || set.contains(n) != in_ps(t, n) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
