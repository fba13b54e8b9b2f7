//! Fibonacci numbers, Zeckendorf representations and the integer sequences
//! built from them.
//!
//! Indexing follows `F_1 = F_2 = 1`, `F_3 = 2`, ... everywhere. Zeckendorf
//! terms always use indices `>= 2`, so the value `1` is `F_2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest index accepted by [`fib`].
pub const MAX_FIB_INDEX: u32 = 92;

// F_0 ..= F_93; F_93 is the last Fibonacci number below 2^64.
const TABLE_LEN: usize = 94;

const FIB_TABLE: [u64; TABLE_LEN] = {
    let mut t = [0u64; TABLE_LEN];
    t[1] = 1;
    let mut i = 2;
    while i < TABLE_LEN {
        t[i] = t[i - 1] + t[i - 2];
        i += 1;
    }
    t
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FibError {
    #[error("Fibonacci index must be at least 1")]
    ZeroIndex,
    #[error("Fibonacci index {0} exceeds the 64-bit range (max {MAX_FIB_INDEX})")]
    IndexOutOfRange(u32),
    #[error("argument must be positive")]
    ZeroArgument,
}

/// A nonnegative integer extended with a top element.
///
/// `Inf` is strictly greater than every finite value. No arithmetic is
/// defined on it; it only takes part in comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Finite(u64),
    Inf,
}

impl ExtNat {
    pub fn is_inf(self) -> bool {
        matches!(self, ExtNat::Inf)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Finite(v) => Some(v),
            ExtNat::Inf => None,
        }
    }

    /// `min(self, cap)` as a plain integer.
    pub fn clamp_to(self, cap: u64) -> u64 {
        match self {
            ExtNat::Finite(v) => v.min(cap),
            ExtNat::Inf => cap,
        }
    }
}

impl From<u64> for ExtNat {
    fn from(v: u64) -> Self {
        ExtNat::Finite(v)
    }
}

impl PartialEq<u64> for ExtNat {
    fn eq(&self, other: &u64) -> bool {
        *self == ExtNat::Finite(*other)
    }
}

impl PartialOrd<u64> for ExtNat {
    fn partial_cmp(&self, other: &u64) -> Option<std::cmp::Ordering> {
        Some(self.cmp(&ExtNat::Finite(*other)))
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(v) => write!(f, "{v}"),
            ExtNat::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expected a nonnegative integer or `inf`, got {0:?}")]
pub struct ParseExtNatError(String);

impl FromStr for ExtNat {
    type Err = ParseExtNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(ExtNat::Inf),
            other => other
                .parse::<u64>()
                .map(ExtNat::Finite)
                .map_err(|_| ParseExtNatError(s.to_string())),
        }
    }
}

// JSON form: a number, or the string "inf".
impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(v) => serializer.serialize_u64(*v),
            ExtNat::Inf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(ExtNat::Finite(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `F_i` for `1 <= i <= 92`.
pub fn fib(i: u32) -> Result<u64, FibError> {
    match i {
        0 => Err(FibError::ZeroIndex),
        i if i > MAX_FIB_INDEX => Err(FibError::IndexOutOfRange(i)),
        i => Ok(FIB_TABLE[i as usize]),
    }
}

/// Table lookup used internally where the index is known to be in range.
/// Indices past the table saturate to `u64::MAX`, which is larger than any
/// pile or bound this crate handles.
pub(crate) fn fib_value(i: u32) -> u64 {
    FIB_TABLE.get(i as usize).copied().unwrap_or(u64::MAX)
}

/// The index `t >= 2` with `F_t <= r < F_{t+1}`.
pub fn fib_bracket(r: u64) -> Result<u32, FibError> {
    if r == 0 {
        return Err(FibError::ZeroArgument);
    }
    // partition_point over F_2.. gives the first index with F > r
    let above = FIB_TABLE[2..].partition_point(|&f| f <= r) + 2;
    Ok(above as u32 - 1)
}

/// Zeckendorf representation: Fibonacci indices in increasing order, each at
/// least 2 and no two consecutive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ZeckRep {
    indices: Vec<u32>,
}

impl ZeckRep {
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn terms(&self) -> impl Iterator<Item = u64> + '_ {
        self.indices.iter().map(|&i| FIB_TABLE[i as usize])
    }

    pub fn value(&self) -> u64 {
        self.terms().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// True when the indices satisfy the Zeckendorf constraints.
    pub fn is_valid(&self) -> bool {
        self.indices.first().is_none_or(|&i| i >= 2)
            && self.indices.windows(2).all(|w| w[1] >= w[0] + 2)
    }
}

/// Greedy Zeckendorf decomposition.
pub fn zeckendorf(mut n: u64) -> ZeckRep {
    let mut indices = Vec::new();
    let mut i = TABLE_LEN - 1;
    while n > 0 {
        while FIB_TABLE[i] > n {
            i -= 1;
        }
        indices.push(i as u32);
        n -= FIB_TABLE[i];
        // the remainder is below F_{i-1}
        i -= 2;
    }
    indices.reverse();
    ZeckRep { indices }
}

/// The `k`-th smallest Zeckendorf term of `n` (1-based), or `Inf` when the
/// representation has fewer than `k` terms.
pub fn z_k(n: u64, k: usize) -> ExtNat {
    assert!(k >= 1, "z_k is 1-indexed");
    zeckendorf(n)
        .terms()
        .nth(k - 1)
        .map_or(ExtNat::Inf, ExtNat::Finite)
}

/// Smallest Zeckendorf term; `z1(0) = Inf`.
pub fn z1(n: u64) -> ExtNat {
    z1_index(n).map_or(ExtNat::Inf, |i| ExtNat::Finite(FIB_TABLE[i as usize]))
}

/// Fibonacci index of the smallest Zeckendorf term.
pub fn z1_index(n: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    // Strip the largest terms greedily; the last one taken is the smallest.
    let mut rest = n;
    let mut i = TABLE_LEN - 1;
    loop {
        while FIB_TABLE[i] > rest {
            i -= 1;
        }
        rest -= FIB_TABLE[i];
        if rest == 0 {
            return Some(i as u32);
        }
        i -= 2;
    }
}

pub fn nim_sum(values: &[u64]) -> u64 {
    values.iter().fold(0, |acc, v| acc ^ v)
}

/// Lowest set bit as a power of two; `Inf` for zero.
pub fn smallest_bit(n: u64) -> ExtNat {
    if n == 0 {
        ExtNat::Inf
    } else {
        ExtNat::Finite(1 << n.trailing_zeros())
    }
}

/// Lower and upper Wythoff sequences `a(n) = floor(phi n)` and
/// `b(n) = floor(phi^2 n)`, computed exactly in integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wythoff {
    A,
    B,
}

impl Wythoff {
    pub fn apply(self, n: u64) -> u64 {
        // floor(phi n) = floor((n + sqrt(5 n^2)) / 2) and sqrt(5 n^2) is
        // irrational for n > 0, so the integer square root loses nothing.
        let wide = n as u128;
        let lower = ((wide + (5 * wide * wide).isqrt()) / 2) as u64;
        match self {
            Wythoff::A => lower,
            Wythoff::B => lower + n,
        }
    }
}

/// Composition of Wythoff sequences, outermost first: `[A, B]` is `a(b(n))`.
pub fn wythoff_composite(word: &[Wythoff], n: u64) -> u64 {
    word.iter().rev().fold(n, |v, w| w.apply(v))
}

/// Values `w(n) <= limit` for `n >= 1`, ascending.
pub fn wythoff_composite_values(word: &[Wythoff], limit: u64) -> Vec<u64> {
    (1..)
        .map(|n| wythoff_composite(word, n))
        .take_while(|&v| v <= limit)
        .collect()
}

/// Membership of `v` in `{w(n) : n >= 1}`.
pub fn in_wythoff_composite(word: &[Wythoff], v: u64) -> bool {
    if v == 0 {
        return false;
    }
    // w is strictly increasing and w(n) >= n, so n ranges over 1..=v.
    let (mut lo, mut hi) = (1u64, v);
    while lo <= hi {
        let mid = lo + (hi - lo) / 2;
        match wythoff_composite(word, mid).cmp(&v) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => lo = mid + 1,
            std::cmp::Ordering::Greater => hi = mid - 1,
        }
    }
    false
}

/// The four shifted Beatty classes partitioning the nonnegative integers,
/// which drive the winning replies from `(3, 4, n; inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeattyClass {
    /// `B - 2 = {n : z1(n) >= 3}`
    BMinus2,
    /// `AB - 2 = {n : z1(n - 1) >= 5}`
    ABMinus2,
    /// `AB - 1 = {n : z1(n - 2) >= 5}`
    ABMinus1,
    /// `BB - 1 = {n : z1(n - 4) >= 8}`
    BBMinus1,
}

impl BeattyClass {
    pub const ALL: [BeattyClass; 4] = [
        BeattyClass::BMinus2,
        BeattyClass::ABMinus2,
        BeattyClass::ABMinus1,
        BeattyClass::BBMinus1,
    ];

    /// `(offset, threshold)` for the predicate `z1(n - offset) >= threshold`.
    pub fn zeckendorf_predicate(self) -> (u64, u64) {
        match self {
            BeattyClass::BMinus2 => (0, 3),
            BeattyClass::ABMinus2 => (1, 5),
            BeattyClass::ABMinus1 => (2, 5),
            BeattyClass::BBMinus1 => (4, 8),
        }
    }

    /// `(composite, shift)` so that the class is `composite - shift`.
    pub fn wythoff_definition(self) -> (&'static [Wythoff], u64) {
        use Wythoff::{A, B};
        match self {
            BeattyClass::BMinus2 => (&[B], 2),
            BeattyClass::ABMinus2 => (&[A, B], 2),
            BeattyClass::ABMinus1 => (&[A, B], 1),
            BeattyClass::BBMinus1 => (&[B, B], 1),
        }
    }

    /// Membership through the Zeckendorf predicate. A negative argument to
    /// `z1` fails the predicate.
    pub fn contains(self, n: u64) -> bool {
        let (offset, threshold) = self.zeckendorf_predicate();
        n.checked_sub(offset)
            .is_some_and(|m| z1(m) >= ExtNat::Finite(threshold))
    }

    /// Membership through the floor-function definition.
    pub fn contains_by_floor(self, n: u64) -> bool {
        let (word, shift) = self.wythoff_definition();
        in_wythoff_composite(word, n + shift)
    }

    pub fn label(self) -> &'static str {
        match self {
            BeattyClass::BMinus2 => "B-2",
            BeattyClass::ABMinus2 => "AB-2",
            BeattyClass::ABMinus1 => "AB-1",
            BeattyClass::BBMinus1 => "BB-1",
        }
    }
}

impl fmt::Display for BeattyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn beatty_class(n: u64) -> BeattyClass {
    BeattyClass::ALL
        .into_iter()
        .find(|c| c.contains(n))
        .expect("the four Beatty classes cover every nonnegative integer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fib_examples() {
        assert_eq!(fib(1), Ok(1));
        assert_eq!(fib(2), Ok(1));
        assert_eq!(fib(7), Ok(13));
        assert_eq!(fib(11), Ok(89));
        assert_eq!(fib(92), Ok(7_540_113_804_746_346_429));
        assert_eq!(fib(0), Err(FibError::ZeroIndex));
        assert_eq!(fib(93), Err(FibError::IndexOutOfRange(93)));
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(fib_bracket(1), Ok(2));
        assert_eq!(fib_bracket(2), Ok(3));
        assert_eq!(fib_bracket(12), Ok(6));
        assert_eq!(fib_bracket(13), Ok(7));
        assert_eq!(fib_bracket(0), Err(FibError::ZeroArgument));
        assert_eq!(fib_bracket(u64::MAX), Ok(93));
        for r in 1..2000u64 {
            let t = fib_bracket(r).unwrap();
            assert!(fib_value(t) <= r && r < fib_value(t + 1));
        }
    }

    #[test]
    fn zeckendorf_examples() {
        assert!(zeckendorf(0).is_empty());
        assert_eq!(zeckendorf(100).terms().collect::<Vec<_>>(), vec![3, 8, 89]);
        assert_eq!(zeckendorf(33).terms().collect::<Vec<_>>(), vec![1, 3, 8, 21]);
        assert_eq!(zeckendorf(1).indices(), &[2]);
    }

    #[test]
    fn z_k_examples() {
        assert_eq!(z_k(10, 1), ExtNat::Finite(2));
        assert_eq!(z_k(10, 2), ExtNat::Finite(8));
        assert_eq!(z_k(10, 3), ExtNat::Inf);
        assert_eq!(z_k(0, 1), ExtNat::Inf);
        assert_eq!(z1(0), ExtNat::Inf);
    }

    #[test]
    fn z1_matches_full_decomposition() {
        for n in 0..20_000u64 {
            assert_eq!(z1(n), z_k(n, 1), "n = {n}");
        }
    }

    #[test]
    fn nim_sum_and_smallest_bit() {
        assert_eq!(nim_sum(&[1, 2, 3]), 0);
        assert_eq!(nim_sum(&[5, 6]), 3);
        assert_eq!(nim_sum(&[]), 0);
        assert_eq!(smallest_bit(12), ExtNat::Finite(4));
        assert_eq!(smallest_bit(5), ExtNat::Finite(1));
        assert_eq!(smallest_bit(0), ExtNat::Inf);
    }

    #[test]
    fn ext_nat_order_and_parse() {
        assert!(ExtNat::Inf > ExtNat::Finite(u64::MAX));
        assert_eq!(ExtNat::Inf, ExtNat::Inf);
        assert_eq!("inf".parse::<ExtNat>(), Ok(ExtNat::Inf));
        assert_eq!("∞".parse::<ExtNat>(), Ok(ExtNat::Inf));
        assert_eq!(" 17 ".parse::<ExtNat>(), Ok(ExtNat::Finite(17)));
        assert!("-1".parse::<ExtNat>().is_err());
        assert_eq!(ExtNat::Inf.to_string(), "inf");
    }

    // Every subset of {F_2, F_3, ...} with nonconsecutive indices, summed.
    // Independent of the greedy routine: enumerates representations directly.
    fn all_nonconsecutive_sums(limit: u64) -> Vec<Vec<Vec<u32>>> {
        let mut by_value = vec![Vec::new(); limit as usize + 1];
        fn walk(next: u32, sum: u64, acc: &mut Vec<u32>, limit: u64, out: &mut [Vec<Vec<u32>>]) {
            out[sum as usize].push(acc.clone());
            let mut i = next;
            while FIB_TABLE[i as usize] + sum <= limit {
                acc.push(i);
                walk(i + 2, sum + FIB_TABLE[i as usize], acc, limit, out);
                acc.pop();
                i += 1;
            }
        }
        walk(2, 0, &mut Vec::new(), limit, &mut by_value);
        by_value
    }

    #[test]
    fn zeckendorf_unique_by_exhaustive_subsets() {
        let reps = all_nonconsecutive_sums(200);
        for (n, found) in reps.iter().enumerate() {
            assert_eq!(found.len(), 1, "n = {n} has {} representations", found.len());
            assert_eq!(found[0].as_slice(), zeckendorf(n as u64).indices());
        }
    }

    #[test]
    fn zeckendorf_structure_to_ten_thousand() {
        for n in 0..=10_000u64 {
            let rep = zeckendorf(n);
            assert!(rep.is_valid(), "n = {n}");
            assert_eq!(rep.value(), n);
            assert_eq!(rep.is_empty(), n == 0);
        }
    }

    #[test]
    fn small_fibonacci_lemma() {
        // n > 1 and 1 <= k < z1(n)  =>  z1(n - k) <= 2k
        for n in 2..=10_000u64 {
            let bound = z1(n).finite().unwrap();
            for k in 1..bound {
                assert!(z1(n - k) <= ExtNat::Finite(2 * k), "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn telescoping_identity() {
        for t in 2..=20u32 {
            for s in 1..=20u32 {
                let lhs: u64 = (t..t + s).map(|i| fib(i).unwrap()).sum();
                let rhs = fib(t + s + 1).unwrap() - fib(t + 1).unwrap();
                assert_eq!(lhs, rhs, "t = {t}, s = {s}");
            }
        }
    }

    #[test]
    fn wythoff_against_floating_point() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for n in 1..5000u64 {
            assert_eq!(Wythoff::A.apply(n), (phi * n as f64).floor() as u64);
            assert_eq!(Wythoff::B.apply(n), (phi * phi * n as f64).floor() as u64);
        }
    }

    #[test]
    fn beatty_examples() {
        use BeattyClass::*;
        assert_eq!(beatty_class(0), BMinus2);
        assert_eq!(beatty_class(1), ABMinus2);
        assert_eq!(beatty_class(2), ABMinus1);
        assert_eq!(beatty_class(4), BBMinus1);
        assert_eq!(beatty_class(13), BMinus2);
        assert_eq!(beatty_class(25), BBMinus1);
        let listed: [(BeattyClass, &[u64]); 4] = [
            (BMinus2, &[0, 3, 5, 8, 11, 13, 16, 18, 21]),
            (ABMinus2, &[1, 6, 9, 14, 19, 22, 27]),
            (ABMinus1, &[2, 7, 10, 15, 20, 23, 28]),
            (BBMinus1, &[4, 12, 17, 25, 33, 38]),
        ];
        for (class, members) in listed {
            let upto = *members.last().unwrap();
            let got: Vec<u64> = (0..=upto).filter(|&n| class.contains(n)).collect();
            assert_eq!(got, members, "{class}");
        }
    }

    #[test]
    fn beatty_classes_partition_and_match_floor_definitions() {
        for n in 0..=1000u64 {
            let by_z: Vec<_> = BeattyClass::ALL.iter().filter(|c| c.contains(n)).collect();
            let by_floor: Vec<_> = BeattyClass::ALL
                .iter()
                .filter(|c| c.contains_by_floor(n))
                .collect();
            assert_eq!(by_z.len(), 1, "n = {n}");
            assert_eq!(by_z, by_floor, "n = {n}");
        }
    }

    #[test]
    fn shifted_classes_are_compositions() {
        use Wythoff::{A, B};
        // (B-2)+1 = AA, (AB-2)+1 = BA, (AB-1)+1 = AB, (BB-1)+1 = BB
        let pairs: [(BeattyClass, &[Wythoff]); 4] = [
            (BeattyClass::BMinus2, &[A, A]),
            (BeattyClass::ABMinus2, &[B, A]),
            (BeattyClass::ABMinus1, &[A, B]),
            (BeattyClass::BBMinus1, &[B, B]),
        ];
        for (class, word) in pairs {
            let shifted: Vec<u64> = (0..1000).filter(|&n| class.contains(n)).map(|n| n + 1).collect();
            assert_eq!(shifted, wythoff_composite_values(word, 1000), "{class}");
        }
    }
}
