//! Fibonacci words, their partial-sum sets, and the three-letter hybrid words
//! classifying two-pile positions whose move bound is small relative to the
//! smaller pile.
//!
//! Letters are stored as Fibonacci indices, never as values, so the
//! substitutions below are index arithmetic and `F_1 = F_2` causes no
//! ambiguity. A Sturm word `w_a` uses the alphabet `(F_{a+1}, F_a)`.
//!
//! # Hybrid words
//!
//! Fix the smaller pile `m` with `F_p <= m < F_{p+1}` and let
//! `x = F_{p+1} - m`. The word for level `alpha < 0` is obtained from the
//! word at level `alpha + 1` (starting from `w_p` at level 0) by rewriting
//! every letter independently, where `hi` is the parent's largest letter:
//!
//! ```text
//! keep   F_i -> F_i
//! split  F_i -> F_{i-1} F_{i-2}
//! triple F_i -> F_{i-2} F_{i-3} F_{i-2}
//! ```
//!
//! * Generic step: `triple` on `hi`, `keep` on everything else.
//! * Special step, taken at the single level with
//!   `F_{p+alpha} < x <= F_{p+alpha+1}`. The partial sum `W` of the parent
//!   before the letter decides, through `W in PS(w_p)`:
//!   - odd `alpha`: `hi` is split when `W in PS(w_p)`, otherwise tripled;
//!   - even `alpha`: `hi - 1` is split when `W in PS(w_p)`, otherwise kept,
//!     and `hi` is tripled.
//!
//! The parity is taken of `alpha` itself. Keying it on `p + alpha` agrees with
//! the exhaustive oracle only for even `p`; see [`SpecialParity`]. On the
//! Sturm side level 0 uses `w_p` and levels `1` and `2` share `w_{p+1}`; see
//! [`SigmaPairing`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fib::{fib_bracket, fib_value, z1, z1_index, ExtNat};

/// A Fibonacci index used as a letter.
pub type Letter = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("Sturm level must be at least 1")]
    ZeroLevel,
    #[error("pile size must be positive")]
    ZeroPile,
    #[error("move bound must be positive")]
    ZeroBound,
    #[error("hybrid word needs p >= 3 and {min_alpha} <= alpha < 0, got p = {p}, alpha = {alpha}")]
    AlphaOutOfRange { p: u32, alpha: i64, min_alpha: i64 },
    #[error("hybrid offset x = {x} must lie in 1..={max} for p = {p}")]
    OffsetOutOfRange { p: u32, x: u64, max: u64 },
}

/// Abstract letters of the Fibonacci word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    X,
    Y,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::X => "x",
            Symbol::Y => "y",
        })
    }
}

/// `S_0 = x`, `S_1 = xy`, `S_n = S_{n-1} S_{n-2}`.
pub fn fib_word_concat(len: usize) -> Vec<Symbol> {
    let mut older = vec![Symbol::X];
    let mut newer = vec![Symbol::X, Symbol::Y];
    while newer.len() < len {
        let next = [newer.as_slice(), older.as_slice()].concat();
        older = std::mem::replace(&mut newer, next);
    }
    if len <= 1 {
        older.truncate(len);
        return older;
    }
    newer.truncate(len);
    newer
}

/// `f_n = y` exactly when `1` is a Zeckendorf term of `n`.
pub fn fib_word_zeck(len: usize) -> Vec<Symbol> {
    (0..len as u64)
        .map(|n| {
            if z1_index(n) == Some(2) {
                Symbol::Y
            } else {
                Symbol::X
            }
        })
        .collect()
}

/// Fixed point of `x -> xy, y -> x`, grown from `x`.
pub fn fib_word_morphism(len: usize) -> Vec<Symbol> {
    let mut word = vec![Symbol::X];
    while word.len() < len {
        word = word
            .iter()
            .flat_map(|s| match s {
                Symbol::X => &[Symbol::X, Symbol::Y][..],
                Symbol::Y => &[Symbol::X][..],
            })
            .copied()
            .collect();
    }
    word.truncate(len);
    word
}

/// How the two Sturm levels sharing a word are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SigmaPairing {
    /// Levels 1 and 2 both use `w_{p+1}`; level `alpha > 1` uses `w_{p+alpha-1}`.
    #[default]
    UpperPair,
    /// Sturm levels use `w_{p+alpha}` and the hybrid levels -1 and -2 share a
    /// word. Kept for comparison only; it disagrees with the oracle.
    LowerPair,
}

/// Which integer's parity selects the special-step variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SpecialParity {
    /// Parity of `alpha`. Agrees with the oracle on every grid tested.
    #[default]
    Alpha,
    /// Parity of `p + alpha`. Coincides with [`SpecialParity::Alpha`] for
    /// even `p` only.
    PPlusAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HybridRules {
    pub pairing: SigmaPairing,
    pub parity: SpecialParity,
}

/// Which word a letter stream enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordSpec {
    /// `w_level`, alphabet `(F_{level+1}, F_level)`.
    Sturm { level: u32 },
    /// `T^{-alpha}(w_p)` for the smaller pile `m = F_{p+1} - x`.
    Hybrid { p: u32, alpha: i64, x: u64 },
}

impl WordSpec {
    pub fn sturm(level: u32) -> Result<Self, WordError> {
        if level == 0 {
            return Err(WordError::ZeroLevel);
        }
        Ok(WordSpec::Sturm { level })
    }

    pub fn hybrid(p: u32, alpha: i64, x: u64) -> Result<Self, WordError> {
        let min_alpha = 3 - p as i64;
        if p < 3 || alpha >= 0 || alpha < min_alpha {
            return Err(WordError::AlphaOutOfRange { p, alpha, min_alpha });
        }
        let max = fib_value(p - 1);
        if x == 0 || x > max {
            return Err(WordError::OffsetOutOfRange { p, x, max });
        }
        Ok(WordSpec::Hybrid { p, alpha, x })
    }

    /// The word whose partial sums classify `(m, m + k; r)`.
    pub fn for_position(m: u64, r: u64, rules: HybridRules) -> Result<Self, WordError> {
        if m == 0 {
            return Err(WordError::ZeroPile);
        }
        let p = fib_bracket(m).map_err(|_| WordError::ZeroPile)?;
        let t = fib_bracket(r).map_err(|_| WordError::ZeroBound)?;
        let alpha = t as i64 - p as i64 + 1;
        let x = fib_value(p + 1) - m;
        match (rules.pairing, alpha) {
            (SigmaPairing::UpperPair, 0 | 1) => WordSpec::sturm((p as i64 + alpha) as u32),
            (SigmaPairing::UpperPair, a) if a > 1 => WordSpec::sturm((p as i64 + a - 1) as u32),
            (SigmaPairing::LowerPair, a) if a >= 0 => WordSpec::sturm((p as i64 + a) as u32),
            (SigmaPairing::LowerPair, a) if a < -1 => WordSpec::hybrid(p, a + 1, x),
            (_, a) => WordSpec::hybrid(p, a, x),
        }
    }

    /// Alphabet as Fibonacci indices, largest first.
    pub fn alphabet(&self) -> Vec<Letter> {
        match *self {
            WordSpec::Sturm { level } => vec![level + 1, level],
            WordSpec::Hybrid { p, alpha, .. } => {
                let low = (p as i64 + alpha - 1) as u32;
                vec![low + 2, low + 1, low]
            }
        }
    }

    /// Generate the first `len` letters from scratch.
    pub fn generate(&self, len: usize, rules: HybridRules) -> Vec<Letter> {
        match *self {
            WordSpec::Sturm { level } => sturm_letters(level, len),
            WordSpec::Hybrid { p, alpha, x } => {
                let mut word = sturm_letters(p, len);
                for level in (alpha..0).rev() {
                    word = transform_level(&word, p, level, x, rules.parity, len);
                }
                word
            }
        }
    }
}

impl fmt::Display for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordSpec::Sturm { level } => write!(f, "w_{level}"),
            WordSpec::Hybrid { p, alpha, x } => write!(f, "T^{}(w_{p}) [x={x}]", -alpha),
        }
    }
}

fn sturm_letters(level: u32, len: usize) -> Vec<Letter> {
    fib_word_morphism(len)
        .into_iter()
        .map(|s| match s {
            Symbol::X => level + 1,
            Symbol::Y => level,
        })
        .collect()
}

/// One step from the word at level `alpha + 1` to level `alpha`, truncated to
/// `len` letters. Every parent letter yields at least one letter, so a parent
/// prefix of length `len` is enough.
fn transform_level(
    parent: &[Letter],
    p: u32,
    alpha: i64,
    x: u64,
    parity: SpecialParity,
    len: usize,
) -> Vec<Letter> {
    let hi = (p as i64 + alpha + 2) as u32;
    let pa = (p as i64 + alpha) as u32;
    let special = fib_value(pa) < x && x <= fib_value(pa + 1);
    let odd = match parity {
        SpecialParity::Alpha => alpha.rem_euclid(2) == 1,
        SpecialParity::PPlusAlpha => pa % 2 == 1,
    };
    let ps_p_threshold = ExtNat::Finite(fib_value(p + 1));

    let mut out = Vec::with_capacity(len + 2);
    let mut before: u64 = 0;
    for &letter in parent {
        if out.len() >= len {
            break;
        }
        let in_ps_p = before == 0 || z1(before) >= ps_p_threshold;
        let split = |i: Letter| [i - 1, i - 2];
        let triple = |i: Letter| [i - 2, i - 3, i - 2];
        match (special, odd) {
            (false, _) if letter == hi => out.extend(triple(letter)),
            (true, true) if letter == hi && in_ps_p => out.extend(split(letter)),
            (true, true) if letter == hi => out.extend(triple(letter)),
            (true, false) if letter == hi => out.extend(triple(letter)),
            (true, false) if letter + 1 == hi && in_ps_p => out.extend(split(letter)),
            _ => out.push(letter),
        }
        before += fib_value(letter);
    }
    out.truncate(len);
    out
}

/// Lazily extended prefix of a word. Extending never rewrites earlier letters;
/// extension takes `&mut self`, so a stream shared across threads needs a lock.
#[derive(Debug, Clone)]
pub struct LetterStream {
    spec: WordSpec,
    rules: HybridRules,
    letters: Vec<Letter>,
}

impl LetterStream {
    pub fn new(spec: WordSpec) -> Self {
        Self::with_rules(spec, HybridRules::default())
    }

    pub fn with_rules(spec: WordSpec, rules: HybridRules) -> Self {
        Self {
            spec,
            rules,
            letters: Vec::new(),
        }
    }

    pub fn spec(&self) -> &WordSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> Vec<Letter> {
        self.spec.alphabet()
    }

    /// Letters generated so far.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn ensure_len(&mut self, len: usize) {
        if self.letters.len() >= len {
            return;
        }
        let target = len.max(2 * self.letters.len()).max(16);
        let grown = self.spec.generate(target, self.rules);
        debug_assert_eq!(&grown[..self.letters.len()], self.letters.as_slice());
        self.letters = grown;
    }

    pub fn prefix(&mut self, len: usize) -> &[Letter] {
        self.ensure_len(len);
        &self.letters[..len]
    }

    /// First `len` letters as values.
    pub fn values(&mut self, len: usize) -> Vec<u64> {
        self.prefix(len).iter().map(|&i| fib_value(i)).collect()
    }

    /// Partial sums up to `bound`, including the empty sum.
    pub fn partial_sums(&mut self, bound: u64) -> PsSet {
        let mut members = vec![0];
        let mut sum = 0u64;
        let mut idx = 0;
        loop {
            if idx == self.letters.len() {
                let more = self.letters.len() + 1;
                self.ensure_len(more);
            }
            sum += fib_value(self.letters[idx]);
            idx += 1;
            if sum > bound {
                break;
            }
            members.push(sum);
        }
        PsSet {
            source: self.spec,
            bound,
            members,
        }
    }
}

/// Partial sums of a word, cut at `bound`. Always contains 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsSet {
    source: WordSpec,
    bound: u64,
    members: Vec<u64>,
}

impl PsSet {
    pub fn source(&self) -> &WordSpec {
        &self.source
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    /// Membership for `n <= bound`.
    pub fn contains(&self, n: u64) -> bool {
        debug_assert!(n <= self.bound, "query {n} past bound {}", self.bound);
        self.members.binary_search(&n).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl fmt::Display for PsSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// `PS(w_a)` cut at `bound`, by enumerating the word.
pub fn ps_set(a: u32, bound: u64) -> Result<PsSet, WordError> {
    Ok(LetterStream::new(WordSpec::sturm(a)?).partial_sums(bound))
}

/// Membership in `PS(w_a)` through the Zeckendorf form `z1(n) >= F_{a+1}`.
pub fn in_ps(a: u32, n: u64) -> bool {
    assert!(a >= 1, "Sturm level must be at least 1");
    z1(n) >= ExtNat::Finite(fib_value(a + 1))
}

/// The hybrid word `T^{-alpha}(w_p)`, first `len` letters.
pub fn hybrid_word(p: u32, alpha: i64, x: u64, len: usize) -> Result<LetterStream, WordError> {
    let mut stream = LetterStream::new(WordSpec::hybrid(p, alpha, x)?);
    stream.ensure_len(len);
    Ok(stream)
}

/// The set whose membership of `k` decides `(m, m + k; r)`, cut at `bound`.
pub fn sigma(m: u64, r: u64, bound: u64) -> Result<PsSet, WordError> {
    sigma_with(m, r, bound, HybridRules::default())
}

pub fn sigma_with(m: u64, r: u64, bound: u64, rules: HybridRules) -> Result<PsSet, WordError> {
    let spec = WordSpec::for_position(m, r, rules)?;
    Ok(LetterStream::with_rules(spec, rules).partial_sums(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fib::fib;

    fn letters_of(s: &str) -> Vec<Symbol> {
        s.chars()
            .map(|c| if c == 'x' { Symbol::X } else { Symbol::Y })
            .collect()
    }

    #[test]
    fn concat_examples() {
        assert_eq!(fib_word_concat(1), letters_of("x"));
        assert_eq!(fib_word_concat(2), letters_of("xy"));
        assert_eq!(fib_word_concat(12), letters_of("xyxxyxyxxyxx"));
        assert!(fib_word_concat(0).is_empty());
    }

    #[test]
    fn printed_prefix_matches_all_constructions() {
        let printed = letters_of("xyxxyxyxxyxxyxyxxyxyxxyxxyxyxxyxxy");
        let n = printed.len();
        assert_eq!(fib_word_concat(n), printed);
        assert_eq!(fib_word_zeck(n), printed);
        assert_eq!(fib_word_morphism(n), printed);
    }

    #[test]
    fn zeck_construction_edges() {
        assert_eq!(fib_word_zeck(2), letters_of("xy"));
        assert_eq!(fib_word_morphism(5), letters_of("xyxxy"));
        assert_eq!(fib_word_morphism(1), letters_of("x"));
    }

    #[test]
    fn constructions_agree_to_ten_thousand() {
        let n = 10_000;
        let a = fib_word_concat(n);
        assert_eq!(a, fib_word_zeck(n));
        assert_eq!(a, fib_word_morphism(n));
    }

    #[test]
    fn ps_set_examples() {
        assert_eq!(ps_set(1, 10).unwrap().members(), (0..=10).collect::<Vec<_>>());
        assert_eq!(
            ps_set(3, 21).unwrap().members(),
            &[0, 3, 5, 8, 11, 13, 16, 18, 21]
        );
        assert_eq!(ps_set(4, 14).unwrap().members(), &[0, 5, 8, 13]);
        assert_eq!(ps_set(0, 5), Err(WordError::ZeroLevel));
        assert_eq!(ps_set(3, 21).unwrap().to_string(), "0,3,5,8,11,13,16,18,21");
    }

    #[test]
    fn in_ps_examples() {
        assert!(in_ps(3, 8));
        assert!(!in_ps(4, 9));
        for a in 1..40 {
            assert!(in_ps(a, 0));
        }
    }

    #[test]
    fn membership_matches_enumeration() {
        for a in 1..=12 {
            let set = ps_set(a, 10_000).unwrap();
            for n in 0..=10_000 {
                assert_eq!(in_ps(a, n), set.contains(n), "a = {a}, n = {n}");
            }
        }
    }

    #[test]
    fn partial_sums_nest() {
        let sets: Vec<PsSet> = (1..=12).map(|a| ps_set(a, 10_000).unwrap()).collect();
        for a in 1..=12usize {
            for b in 1..=a {
                for &n in sets[a - 1].members() {
                    assert!(sets[b - 1].contains(n), "a = {a}, b = {b}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn last_level_shift() {
        // n in PS(w_a) \ PS(w_{a+1})  =>  n - F_{a+1} in PS(w_{a+2})
        for a in 1..=20u32 {
            for n in 0..=10_000u64 {
                if in_ps(a, n) && !in_ps(a + 1, n) {
                    let shifted = n - fib(a + 1).unwrap();
                    assert!(in_ps(a + 2, shifted), "a = {a}, n = {n}");
                }
            }
        }
    }

    fn values(spec: WordSpec, len: usize) -> Vec<u64> {
        LetterStream::new(spec).values(len)
    }

    #[test]
    fn hybrid_generic_step() {
        // m = 26, r = 12
        let spec = WordSpec::for_position(26, 12, HybridRules::default()).unwrap();
        assert_eq!(spec, WordSpec::Hybrid { p: 8, alpha: -1, x: 8 });
        assert_eq!(
            values(spec, 18),
            [13, 8, 13, 21, 13, 8, 13, 13, 8, 13, 21, 13, 8, 13, 21, 13, 8, 13]
        );
    }

    #[test]
    fn hybrid_special_step_on_largest_letter() {
        let parent = WordSpec::for_position(26, 5, HybridRules::default()).unwrap();
        assert_eq!(
            values(parent, 11),
            [13, 8, 13, 8, 5, 8, 13, 8, 13, 13, 8]
        );
        let spec = WordSpec::for_position(26, 4, HybridRules::default()).unwrap();
        assert_eq!(spec, WordSpec::Hybrid { p: 8, alpha: -3, x: 8 });
        assert_eq!(
            values(spec, 18),
            [8, 5, 8, 5, 3, 5, 8, 5, 8, 8, 5, 8, 5, 3, 5, 8, 5, 8]
        );
    }

    #[test]
    fn hybrid_special_step_on_second_letter() {
        let parent = WordSpec::for_position(25, 8, HybridRules::default()).unwrap();
        assert_eq!(values(parent, 10), [13, 8, 13, 21, 13, 8, 13, 13, 8, 13]);
        let spec = WordSpec::for_position(25, 7, HybridRules::default()).unwrap();
        assert_eq!(spec, WordSpec::Hybrid { p: 8, alpha: -2, x: 9 });
        assert_eq!(
            values(spec, 15),
            [8, 5, 8, 13, 8, 5, 8, 8, 5, 8, 13, 8, 5, 8, 13]
        );
    }

    #[test]
    fn hybrid_rejects_out_of_range() {
        assert!(matches!(
            WordSpec::hybrid(8, 0, 8),
            Err(WordError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            WordSpec::hybrid(8, -6, 8),
            Err(WordError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            WordSpec::hybrid(2, -1, 1),
            Err(WordError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            WordSpec::hybrid(8, -1, 14),
            Err(WordError::OffsetOutOfRange { .. })
        ));
        assert!(WordSpec::hybrid(8, -5, 8).is_ok());
        assert!(hybrid_word(8, -1, 8, 18).is_ok());
    }

    #[test]
    fn smallest_and_largest_letters_of_hybrid_words() {
        for p in 3..=12u32 {
            for x in 1..=fib(p - 1).unwrap() {
                for alpha in (3 - p as i64)..0 {
                    let spec = WordSpec::hybrid(p, alpha, x).unwrap();
                    let letters = spec.generate(400, HybridRules::default());
                    let lo = *letters.iter().min().unwrap();
                    let hi = *letters.iter().max().unwrap();
                    assert_eq!(lo as i64, p as i64 + alpha - 1, "{spec}");
                    assert_eq!(hi, lo + 2, "{spec}");
                }
            }
        }
    }

    #[test]
    fn stream_extension_is_stable() {
        for spec in [
            WordSpec::sturm(5).unwrap(),
            WordSpec::hybrid(8, -3, 8).unwrap(),
            WordSpec::hybrid(9, -4, 13).unwrap(),
        ] {
            let mut stream = LetterStream::new(spec);
            let first = stream.prefix(300).to_vec();
            stream.ensure_len(600);
            assert_eq!(&stream.letters()[..300], first.as_slice());
            assert_eq!(spec.generate(300, HybridRules::default()), first);
        }
    }

    #[test]
    fn sigma_examples() {
        // w_8 starts 34, 21, 34, so 21 is not a partial sum; (26, 47; 13) is N
        assert_eq!(sigma(26, 13, 60).unwrap().members(), &[0, 34, 55]);
        let mut solver = crate::solver::Solver::new();
        let pos = crate::solver::Position::fibonacci(vec![26, 47], 13);
        assert_eq!(solver.outcome(&pos), Ok(crate::solver::Outcome::N));
        assert_eq!(
            sigma(26, 12, 89).unwrap().members(),
            &[0, 13, 21, 34, 55, 68, 76, 89]
        );
        assert_eq!(
            sigma(26, 5, 55).unwrap().members(),
            &[0, 13, 21, 34, 42, 47, 55]
        );
        assert_eq!(sigma(0, 5, 10), Err(WordError::ZeroPile));
        assert_eq!(sigma(5, 0, 10), Err(WordError::ZeroBound));
    }

    #[test]
    fn sturm_pairing() {
        // m = 26 has p = 8; r in [21, 34) gives alpha = 1, r in [34, 55) alpha = 2.
        let rules = HybridRules::default();
        assert_eq!(WordSpec::for_position(26, 13, rules), WordSpec::sturm(8));
        assert_eq!(WordSpec::for_position(26, 21, rules), WordSpec::sturm(9));
        assert_eq!(WordSpec::for_position(26, 34, rules), WordSpec::sturm(9));
        assert_eq!(WordSpec::for_position(26, 55, rules), WordSpec::sturm(10));
        assert_eq!(WordSpec::for_position(1, 1, rules), WordSpec::sturm(3));
    }
}
