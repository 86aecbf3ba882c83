//! Permutation machinery behind the moment computations: the statistic
//! `|sigma|`, the rising-factorial identity it satisfies, the pairing class
//! `P1` and the parity-preserving pairing `sigma~`.
//!
//! `|sigma|` is read as `m` minus the number of left-to-right maxima of
//! `sigma(1), ..., sigma(m)`. This reading reproduces
//! `sum_sigma A^{m - |sigma|} = prod_i (A + i - 1)` exactly, which fixes the
//! distribution of the statistic but not its pointwise values.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Rational = Ratio<i128>;

/// Largest `m` for which full enumeration is allowed.
pub const MAX_ENUM: usize = 8;

/// A bijection of `{1, ..., m}`, stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let m = mapping.len();
        let mut seen = vec![false; m + 1];
        for &v in &mapping {
            if v == 0 || v > m || seen[v] {
                return Err(invalid("perm", format!("{mapping:?} is not a permutation of 1..{m}")));
            }
            seen[v] = true;
        }
        Ok(Perm(mapping))
    }

    pub fn identity(m: usize) -> Self {
        Perm((1..=m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sigma(i)`, 1-based.
    pub fn at(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Next permutation in lexicographic order.
    fn advance(&mut self) -> bool {
        let a = &mut self.0;
        let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
            return false;
        };
        let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).expect("pivot has a successor");
        a.swap(i - 1, j);
        a[i..].reverse();
        true
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All `m!` permutations in lexicographic order.
pub fn permutations(m: usize) -> impl Iterator<Item = Perm> {
    let mut next = Some(Perm::identity(m));
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        if succ.advance() {
            next = Some(succ);
        }
        Some(cur)
    })
}

/// `m` minus the number of left-to-right maxima.
pub fn sigma_stat(p: &Perm) -> usize {
    let mut best = 0;
    let mut records = 0;
    for &v in p.as_slice() {
        if v > best {
            best = v;
            records += 1;
        }
    }
    p.len() - records
}

/// `counts[k] = #{sigma in S_m : |sigma| = k}`.
pub fn sigma_distribution(m: usize) -> Result<Vec<u64>> {
    guard(m)?;
    let mut counts = vec![0u64; m.max(1)];
    for p in permutations(m) {
        counts[sigma_stat(&p)] += 1;
    }
    Ok(counts)
}

fn guard(m: usize) -> Result<()> {
    if (1..=MAX_ENUM).contains(&m) {
        Ok(())
    } else {
        Err(invalid("m", format!("enumeration needs 1 <= m <= {MAX_ENUM}, got {m}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub equal: bool,
}

/// `sum_{sigma in S_m} A^{m - |sigma|}` against `prod_{i=1}^m (A + i - 1)`.
pub fn lemma55_identity(m: usize, a: Rational) -> Result<IdentityCheck> {
    guard(m)?;
    let lhs = permutations(m).fold(Rational::from_integer(0), |acc, p| {
        acc + a.pow((m - sigma_stat(&p)) as i32)
    });
    let rhs = (1..=m).fold(Rational::from_integer(1), |acc, i| {
        acc * (a + Rational::from_integer(i as i128 - 1))
    });
    Ok(IdentityCheck {
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

fn check_even(m: usize) -> Result<()> {
    if m.is_multiple_of(2) && m > 0 {
        Ok(())
    } else {
        Err(invalid("m", format!("pairing class needs even m, got {m}")))
    }
}

/// True iff every position pair `{sigma(2k-1), sigma(2k)}` is a value pair `{2j-1, 2j}`.
pub fn classify_p1(p: &Perm) -> Result<bool> {
    check_even(p.len())?;
    Ok(p.as_slice().chunks(2).all(|c| {
        let (lo, hi) = (c[0].min(c[1]), c[0].max(c[1]));
        lo % 2 == 1 && hi == lo + 1
    }))
}

/// `{sigma(i), ..., sigma(m)} symmetric-difference {sigma(i)+1, ..., sigma(m)+1}`.
/// May contain `m + 1`, whose `y` is taken as 0.
pub fn a_set(p: &Perm, i: usize) -> BTreeSet<usize> {
    let tail: BTreeSet<usize> = p.as_slice()[i - 1..].iter().copied().collect();
    let shifted: BTreeSet<usize> = tail.iter().map(|v| v + 1).collect();
    tail.symmetric_difference(&shifted).copied().collect()
}

/// `A_i` read off the telescoped sum `sum_{j >= i} (y_{sigma(j)} - y_{sigma(j)+1})`:
/// the indices with a nonzero net coefficient.
pub fn a_set_by_coefficients(p: &Perm, i: usize) -> BTreeSet<usize> {
    let m = p.len();
    let mut coef = vec![0i64; m + 2];
    for &v in &p.as_slice()[i - 1..] {
        coef[v] += 1;
        coef[v + 1] -= 1;
    }
    (1..=m + 1).filter(|&k| coef[k] != 0).collect()
}

/// Pairing `sigma~` with `sigma~(j) = j (mod 2)` and `sigma~(i) in A_i` for
/// every `i`. Even `i` take the unique even element of `A_i`; odd `i` take a
/// system of distinct representatives of `A_i cap {1, 3, ..., m-1}`.
pub fn build_pairing(p: &Perm) -> Result<Perm> {
    if !classify_p1(p)? {
        return Err(invalid("perm", format!("{p} is not in the pairing class")));
    }
    let m = p.len();
    let mut out = vec![0usize; m];
    for i in (2..=m).step_by(2) {
        // unique even element: sigma(i) if even, else sigma(i - 1)
        out[i - 1] = if p.at(i).is_multiple_of(2) { p.at(i) } else { p.at(i - 1) };
    }
    let odd_positions: Vec<usize> = (1..m).step_by(2).collect();
    let candidates: Vec<Vec<usize>> = odd_positions
        .iter()
        .map(|&i| a_set(p, i).into_iter().filter(|&k| k % 2 == 1 && k < m).collect())
        .collect();
    let matching = distinct_representatives(&candidates, m)
        .ok_or_else(|| invalid("perm", format!("no distinct representatives for {p}")))?;
    for (slot, &i) in odd_positions.iter().enumerate() {
        out[i - 1] = matching[slot];
    }
    Perm::new(out)
}

/// Kuhn's augmenting-path matching of each slot to a distinct value.
fn distinct_representatives(candidates: &[Vec<usize>], max_value: usize) -> Option<Vec<usize>> {
    fn augment(slot: usize, cands: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &v in &cands[slot] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|o| augment(o, cands, owner, seen)) {
                owner[v] = Some(slot);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; max_value + 2];
    for slot in 0..candidates.len() {
        let mut seen = vec![false; max_value + 2];
        if !augment(slot, candidates, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut out = vec![0; candidates.len()];
    for (v, o) in owner.iter().enumerate() {
        if let Some(slot) = o {
            out[*slot] = v;
        }
    }
    Some(out)
}

/// `sup_{j in A_i} |y_j| >= |y_{sigma~(i)}|` for all `i`, with `y_{m+1} = 0`.
/// `y` is 1-based through `y[j - 1]`.
pub fn dominates(p: &Perm, pairing: &Perm, y: &[f64]) -> bool {
    let m = p.len();
    let val = |j: usize| if j <= m { y[j - 1].abs() } else { 0.0 };
    (1..=m).all(|i| {
        let sup = a_set(p, i).into_iter().map(val).fold(0.0, f64::max);
        sup >= val(pairing.at(i))
    })
}

/// Summary of the checks for one `m`, used by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSummary {
    pub m: usize,
    pub p1_count: usize,
    pub expected_count: usize,
    pub parity_ok: bool,
}

/// Counts `P1` and checks that every pairing is parity preserving.
pub fn pairing_summary(m: usize) -> Result<PairingSummary> {
    guard(m)?;
    check_even(m)?;
    let mut count = 0;
    let mut parity_ok = true;
    for p in permutations(m) {
        if classify_p1(&p)? {
            count += 1;
            let s = build_pairing(&p)?;
            parity_ok &= (1..=m).all(|j| s.at(j) % 2 == j % 2);
        }
    }
    let half = m / 2;
    let expected = (1usize << half) * (1..=half).product::<usize>();
    Ok(PairingSummary {
        m,
        p1_count: count,
        expected_count: expected,
        parity_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn stat_examples() {
        assert_eq!(sigma_stat(&Perm::identity(3)), 0);
        assert_eq!(sigma_stat(&Perm::new(vec![3, 2, 1]).unwrap()), 2);
        assert_eq!(sigma_distribution(3).unwrap(), vec![1, 3, 2]);
    }

    #[test]
    fn permutations_enumerated_once() {
        let all: Vec<Perm> = permutations(5).collect();
        assert_eq!(all.len(), 120);
        let set: BTreeSet<Perm> = all.iter().cloned().collect();
        assert_eq!(set.len(), 120);
        assert_eq!(permutations(1).count(), 1);
    }

    #[test]
    fn invalid_perm() {
        assert!(Perm::new(vec![1, 1]).is_err());
        assert!(Perm::new(vec![0, 1]).is_err());
        assert!(Perm::new(vec![3, 1]).is_err());
    }

    #[test]
    fn identity_examples() {
        let one = lemma55_identity(1, r(5, 3)).unwrap();
        assert!(one.equal && one.lhs == r(5, 3));
        let three = lemma55_identity(3, r(2, 1)).unwrap();
        assert_eq!((three.lhs, three.rhs), (r(24, 1), r(24, 1)));
        assert!(lemma55_identity(5, r(7, 3)).unwrap().equal);
        assert!(lemma55_identity(9, r(1, 1)).is_err());
    }

    #[test]
    fn identity_holds_up_to_seven() {
        for m in 1..=7 {
            for a in [r(1, 1), r(2, 1), r(1, 2), r(7, 3)] {
                assert!(lemma55_identity(m, a).unwrap().equal, "m={m} A={a}");
            }
        }
    }

    #[test]
    fn p1_examples() {
        assert!(classify_p1(&Perm::new(vec![1, 2]).unwrap()).unwrap());
        assert!(classify_p1(&Perm::new(vec![2, 1]).unwrap()).unwrap());
        assert!(classify_p1(&Perm::new(vec![3, 4, 1, 2]).unwrap()).unwrap());
        assert!(!classify_p1(&Perm::new(vec![2, 3, 1, 4]).unwrap()).unwrap());
        assert!(classify_p1(&Perm::identity(3)).is_err());
    }

    #[test]
    fn p1_counts_and_pairings() {
        for m in [2, 4, 6] {
            let s = pairing_summary(m).unwrap();
            assert_eq!(s.p1_count, s.expected_count);
            assert!(s.parity_ok);
        }
        assert_eq!(build_pairing(&Perm::identity(2)).unwrap(), Perm::identity(2));
        assert!(build_pairing(&Perm::new(vec![2, 3, 1, 4]).unwrap()).is_err());
    }

    #[test]
    fn pairing_lands_in_a_sets() {
        for m in [2, 4, 6] {
            for p in permutations(m).filter(|p| classify_p1(p).unwrap()) {
                let s = build_pairing(&p).unwrap();
                for i in 1..=m {
                    let a = a_set(&p, i);
                    assert!(a.contains(&s.at(i)), "{p} i={i}");
                    if i % 2 == 0 {
                        assert_eq!(a.iter().filter(|&&k| k % 2 == 0).count(), 1);
                    } else {
                        assert!(a.iter().all(|&k| k % 2 == 1));
                    }
                }
            }
        }
    }

    #[test]
    fn a_set_matches_coefficient_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        for _ in 0..500 {
            let m = rng.random_range(1..=8);
            let mut v: Vec<usize> = (1..=m).collect();
            v.shuffle(&mut rng);
            let p = Perm::new(v).unwrap();
            for i in 1..=m {
                assert_eq!(a_set(&p, i), a_set_by_coefficients(&p, i));
            }
        }
    }

    #[test]
    fn domination_on_random_regions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(56);
        let gamma: f64 = 8.0;
        let eps = 1.0;
        for m in [2, 4, 6] {
            let members: Vec<Perm> = permutations(m).filter(|p| classify_p1(p).unwrap()).collect();
            for _ in 0..1000 {
                let p = &members[rng.random_range(0..members.len())];
                let s = build_pairing(p).unwrap();
                let mut ranks: Vec<i32> = (0..(m / 2) as i32).collect();
                ranks.shuffle(&mut rng);
                let mut y = vec![0.0; m];
                for (k, yk) in y.iter_mut().enumerate() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *yk = sign
                        * if k % 2 == 0 {
                            // odd index k + 1
                            eps * rng.random_range(0.5..1.0) * gamma.powi(-2 * ranks[k / 2])
                        } else {
                            gamma * eps * (1.0 + rng.random_range(0.0..10.0))
                        };
                }
                assert!(dominates(p, &s, &y), "{p} {y:?}");
            }
        }
    }
}
