//! Permutations, the half-preserving subgroups of `S_{2k}`, integer partitions
//! and irreducible characters of `S_k`.
//!
//! Composition is `(s * p)(i) = s(p(i))` throughout.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default ceiling on the degree of exhaustively enumerated groups.
pub const DEFAULT_GROUP_BOUND: usize = 8;

/// A bijection of `{0, .., n-1}` stored in one-line notation.
///
/// Public constructors and serde use 1-based images; [`Permutation::apply`]
/// is 0-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u8>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n <= u8::MAX as usize);
        Permutation { image: (0..n as u8).collect() }
    }

    /// Build from 0-based images.
    pub fn from_zero_based(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n > u8::MAX as usize {
            return Err(Error::InvalidPermutation(format!("degree {n} too large")));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection of 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { image: image.into_iter().map(|v| v as u8).collect() })
    }

    /// Build from 1-based images, e.g. `[2, 1, 3]` is the transposition `(1 2)`.
    pub fn from_images(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::InvalidPermutation(format!("{image:?}: images are 1-based")));
        }
        Self::from_zero_based(image.iter().map(|v| v - 1).collect())
    }

    /// Build from disjoint cycles written 1-based.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cyc in cycles {
            for (pos, &a) in cyc.iter().enumerate() {
                if a == 0 || a > n || touched[a - 1] {
                    return Err(Error::InvalidPermutation(format!("bad cycle {cyc:?} in degree {n}")));
                }
                touched[a - 1] = true;
                image[a - 1] = cyc[(pos + 1) % cyc.len()] - 1;
            }
        }
        Self::from_zero_based(image)
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a, b);
        Self::from_zero_based(image).expect("transposition indices in range")
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut image: Vec<u8> = (0..n as u8).collect();
        image.shuffle(rng);
        Permutation { image }
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    /// 1-based one-line notation.
    pub fn images(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// `self * other`, i.e. `i -> self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch { left: self.degree(), right: other.degree() });
        }
        Ok(Permutation { image: other.image.iter().map(|&j| self.image[j as usize]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.degree()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize] = i as u8;
        }
        Permutation { image: inv }
    }

    /// Disjoint cycles, 0-based, fixed points included, each starting at its least element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = self.apply(i);
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    pub fn signature(&self) -> i64 {
        if (self.degree() - self.cycle_count()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn cycle_type(&self) -> IntegerPartition {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }
}

impl std::ops::Mul for &Permutation {
    type Output = Permutation;

    /// Panics on a degree mismatch; use [`Permutation::compose`] for a checked product.
    fn mul(self, rhs: &Permutation) -> Permutation {
        self.compose(rhs).expect("composing permutations of different degrees")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        for cyc in self.cycles().into_iter().filter(|c| c.len() > 1) {
            let body: Vec<String> = cyc.iter().map(|v| (v + 1).to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images())
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.images().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Permutation::from_images(&v).map_err(serde::de::Error::custom)
    }
}

/// `(eta ⊔ eta')`: `eta` on the first half of `[2k]`, `eta'` shifted onto the second.
///
/// # Panics
/// If the two degrees differ.
pub fn embed_join(eta: &Permutation, eta2: &Permutation) -> Permutation {
    assert_eq!(eta.degree(), eta2.degree(), "embed_join needs equal degrees");
    let k = eta.degree();
    let mut image = eta.image.clone();
    image.extend(eta2.image.iter().map(|&v| v + k as u8));
    Permutation { image }
}

/// Inverse of [`embed_join`]: splits a half-preserving permutation of `[2k]`.
pub fn split_join(rho: &Permutation) -> Option<(Permutation, Permutation)> {
    let n = rho.degree();
    if !n.is_multiple_of(2) {
        return None;
    }
    let k = n / 2;
    let (a, b) = rho.image.split_at(k);
    if a.iter().any(|&v| v as usize >= k) {
        return None;
    }
    Some((Permutation { image: a.to_vec() }, Permutation { image: b.iter().map(|&v| v - k as u8).collect() }))
}

/// The half swap `i <-> i+k` of `[2k]`.
pub fn tau(k: usize) -> Permutation {
    Permutation { image: (0..2 * k).map(|i| ((i + k) % (2 * k)) as u8).collect() }
}

/// Half-preserving subgroup `S_{k,k}`, optionally extended by the half swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subgroup {
    Skk,
    SkkTau,
}

/// Lexicographically least element of the right coset of `sigma`.
///
/// Left multiplication by `eta ⊔ eta'` relabels values independently inside each
/// half, so the minimum assigns the smallest unused label of the value's own
/// half, in order of first appearance.
pub fn coset_key(sigma: &Permutation, group: Subgroup) -> Permutation {
    let n = sigma.degree();
    assert!(n.is_multiple_of(2), "coset keys live in S_2k");
    let skk = |s: &Permutation| {
        let k = (n / 2) as u8;
        let (mut lo, mut hi) = (0u8, k);
        let mut relabel = vec![u8::MAX; n];
        let image = s
            .image
            .iter()
            .map(|&v| {
                if relabel[v as usize] == u8::MAX {
                    if v < k {
                        relabel[v as usize] = lo;
                        lo += 1;
                    } else {
                        relabel[v as usize] = hi;
                        hi += 1;
                    }
                }
                relabel[v as usize]
            })
            .collect();
        Permutation { image }
    };
    match group {
        Subgroup::Skk => skk(sigma),
        Subgroup::SkkTau => {
            let a = skk(sigma);
            let b = skk(&(&tau(n / 2) * sigma));
            a.min(b)
        }
    }
}

/// All `n!` permutations in lexicographic order, subject to [`DEFAULT_GROUP_BOUND`].
pub fn enumerate_group(n: usize) -> Result<Vec<Permutation>> {
    enumerate_group_bounded(n, DEFAULT_GROUP_BOUND)
}

pub fn enumerate_group_bounded(n: usize, bound: usize) -> Result<Vec<Permutation>> {
    if n > bound {
        return Err(Error::BoundExceeded { what: "group degree", value: n, bound });
    }
    let mut cur: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![Permutation { image: cur.clone() }];
    // next lexicographic permutation
    while let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) {
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Permutation { image: cur.clone() });
    }
    Ok(out)
}

/// Weakly decreasing positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not weakly decreasing and positive")));
        }
        Ok(IntegerPartition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Centralizer order `z_mu = prod_i i^{m_i} m_i!`.
    pub fn centralizer_order(&self) -> u64 {
        let mut z = 1u64;
        let mut i = 0;
        while i < self.parts.len() {
            let p = self.parts[i];
            let m = self.parts[i..].iter().take_while(|&&q| q == p).count();
            z *= (p as u64).pow(m as u32) * factorial(m);
            i += m;
        }
        z
    }

    /// Size of the conjugacy class with this cycle type.
    pub fn class_size(&self) -> u64 {
        factorial(self.size()) / self.centralizer_order()
    }
}

impl<'de> Deserialize<'de> for IntegerPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        IntegerPartition::new(Vec::<usize>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(usize::to_string).collect();
        write!(f, "({})", body.join(","))
    }
}

impl fmt::Debug for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Partitions of `k` in reverse lexicographic order, `(k)` first.
pub fn enumerate_partitions(k: usize) -> Vec<IntegerPartition> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<IntegerPartition>) {
        if rem == 0 {
            out.push(IntegerPartition { parts: cur.clone() });
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, k, &mut Vec::new(), &mut out);
    out
}

/// Memo keyed by `(lambda, mu)` parts.
type CharacterMemo = HashMap<(Vec<usize>, Vec<usize>), i64>;

thread_local! {
    static MN_MEMO: RefCell<CharacterMemo> = RefCell::new(HashMap::new());
}

/// `chi^lambda` on the class of cycle type `mu`, by Murnaghan–Nakayama on beta-sets.
pub fn character(lambda: &IntegerPartition, mu: &IntegerPartition) -> Result<i64> {
    if lambda.size() != mu.size() {
        return Err(Error::InvalidPartition(format!(
            "character of a partition of {} on a class of {}",
            lambda.size(),
            mu.size()
        )));
    }
    Ok(murnaghan_nakayama(&lambda.parts, &mu.parts))
}

fn murnaghan_nakayama(lambda: &[usize], mu: &[usize]) -> i64 {
    if mu.is_empty() {
        return i64::from(lambda.is_empty());
    }
    let key = (lambda.to_vec(), mu.to_vec());
    if let Some(v) = MN_MEMO.with(|m| m.borrow().get(&key).copied()) {
        return v;
    }
    let r = mu[0];
    let len = lambda.len();
    let beta: Vec<usize> = (0..len).map(|i| lambda[i] + len - 1 - i).collect();
    let mut total = 0;
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let nb = b - r;
        let height = beta.iter().filter(|&&x| x > nb && x < b).count();
        let mut next = beta.clone();
        next[idx] = nb;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<usize> = next.iter().enumerate().map(|(i, &x)| x - (len - 1 - i)).filter(|&p| p > 0).collect();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        total += sign * murnaghan_nakayama(&shape, &mu[1..]);
    }
    MN_MEMO.with(|m| m.borrow_mut().insert(key, total));
    total
}

/// Full character table of `S_k`; rows are irreps, columns are classes, both in
/// [`enumerate_partitions`] order.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterTable {
    pub k: usize,
    pub irreps: Vec<IntegerPartition>,
    pub classes: Vec<IntegerPartition>,
    pub class_sizes: Vec<u64>,
    pub values: Vec<Vec<i64>>,
}

impl CharacterTable {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > DEFAULT_GROUP_BOUND {
            return Err(Error::BoundExceeded { what: "character table order", value: k, bound: DEFAULT_GROUP_BOUND });
        }
        let parts = enumerate_partitions(k);
        let values =
            parts.iter().map(|l| parts.iter().map(|m| murnaghan_nakayama(&l.parts, &m.parts)).collect()).collect();
        Ok(CharacterTable {
            k,
            class_sizes: parts.iter().map(IntegerPartition::class_size).collect(),
            classes: parts.clone(),
            irreps: parts,
            values,
        })
    }

    pub fn value(&self, irrep: &IntegerPartition, class: &IntegerPartition) -> Option<i64> {
        let r = self.irreps.iter().position(|p| p == irrep)?;
        let c = self.classes.iter().position(|p| p == class)?;
        Some(self.values[r][c])
    }

    /// Value of `chi^irrep` at a permutation.
    pub fn eval(&self, irrep: &IntegerPartition, eta: &Permutation) -> Option<i64> {
        self.value(irrep, &eta.cycle_type())
    }

    pub fn dimension(&self, irrep: &IntegerPartition) -> Option<i64> {
        let r = self.irreps.iter().position(|p| p == irrep)?;
        // the identity class (1^k) comes last in reverse lexicographic order
        self.values[r].last().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("irrep");
        for c in &self.classes {
            out.push_str(&format!(",\"{c}\""));
        }
        out.push('\n');
        for (irrep, row) in self.irreps.iter().zip(&self.values) {
            out.push_str(&format!("\"{irrep}\""));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(images: &[usize]) -> Permutation {
        Permutation::from_images(images).unwrap()
    }

    fn part(v: &[usize]) -> IntegerPartition {
        IntegerPartition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn composition_examples() {
        let id3 = Permutation::identity(3);
        let t12 = p(&[2, 1, 3]);
        assert_eq!(id3.compose(&t12).unwrap(), t12);
        assert_eq!(p(&[2, 1]).compose(&p(&[2, 1])).unwrap(), Permutation::identity(2));
        let c123 = Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        let c132 = Permutation::from_cycles(3, &[&[1, 3, 2]]).unwrap();
        assert_eq!(c123.compose(&c123).unwrap(), c132);
        assert!(matches!(id3.compose(&Permutation::identity(2)), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn compose_applies_right_factor_first() {
        let a = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
        let b = Permutation::from_cycles(3, &[&[2, 3]]).unwrap();
        let ab = &a * &b;
        for i in 0..3 {
            assert_eq!(ab.apply(i), a.apply(b.apply(i)));
        }
    }

    #[test]
    fn signature_and_cycles() {
        assert_eq!(Permutation::identity(5).signature(), 1);
        assert_eq!(Permutation::transposition(4, 0, 3).signature(), -1);
        assert_eq!(Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap().signature(), 1);
        assert_eq!(Permutation::identity(4).cycle_count(), 4);
        assert_eq!(Permutation::from_cycles(4, &[&[1, 2], &[3, 4]]).unwrap().cycle_count(), 2);
        assert_eq!(Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap().cycle_count(), 1);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_images(&[1, 1]).is_err());
        assert!(Permutation::from_images(&[0, 1]).is_err());
        assert!(Permutation::from_images(&[3, 1]).is_err());
    }

    #[test]
    fn embed_join_examples() {
        let id2 = Permutation::identity(2);
        let t = p(&[2, 1]);
        assert_eq!(embed_join(&id2, &id2), Permutation::identity(4));
        assert_eq!(embed_join(&t, &id2), p(&[2, 1, 3, 4]));
        assert_eq!(embed_join(&id2, &t), p(&[1, 2, 4, 3]));
        assert_eq!(split_join(&p(&[1, 2, 4, 3])), Some((id2.clone(), t)));
        assert_eq!(split_join(&p(&[3, 2, 1, 4])), None);
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(1), p(&[2, 1]));
        assert_eq!(tau(2), Permutation::from_cycles(4, &[&[1, 3], &[2, 4]]).unwrap());
        assert!((&tau(3) * &tau(3)).is_identity());
    }

    #[test]
    fn display_uses_cycles() {
        assert_eq!(Permutation::from_cycles(4, &[&[1, 3], &[2, 4]]).unwrap().to_string(), "(1 3)(2 4)");
        assert_eq!(Permutation::identity(3).to_string(), "id");
    }

    #[test]
    fn serde_is_one_based() {
        let s = p(&[2, 3, 1]);
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, "[2,3,1]");
        let back: Permutation = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_group(1).unwrap(), vec![Permutation::identity(1)]);
        let s4 = enumerate_group(4).unwrap();
        assert_eq!(s4.len(), 24);
        let mut sorted = s4.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, s4);
        assert_eq!(enumerate_partitions(5).len(), 7);
        match enumerate_group(9) {
            Err(e) => assert!(e.to_string().contains('8')),
            Ok(_) => panic!("bound not enforced"),
        }
        assert_eq!(enumerate_group_bounded(9, 9).unwrap().len(), 362_880);
    }

    fn brute_key(sigma: &Permutation, group: Subgroup) -> Permutation {
        let k = sigma.degree() / 2;
        let sk = enumerate_group(k).unwrap();
        let mut best: Option<Permutation> = None;
        let starts = match group {
            Subgroup::Skk => vec![sigma.clone()],
            Subgroup::SkkTau => vec![sigma.clone(), &tau(k) * sigma],
        };
        for s in &starts {
            for a in &sk {
                for b in &sk {
                    let c = &embed_join(a, b) * s;
                    if best.as_ref().is_none_or(|x| c < *x) {
                        best = Some(c);
                    }
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn coset_key_matches_orbit_minimum() {
        for k in 1..=3 {
            for s in enumerate_group(2 * k).unwrap() {
                for g in [Subgroup::Skk, Subgroup::SkkTau] {
                    assert_eq!(coset_key(&s, g), brute_key(&s, g), "{s} {g:?}");
                }
            }
        }
    }

    #[test]
    fn coset_counts_at_k2() {
        let s4 = enumerate_group(4).unwrap();
        let count = |g| {
            let mut keys: Vec<_> = s4.iter().map(|s| coset_key(s, g)).collect();
            keys.sort();
            keys.dedup();
            keys.len()
        };
        assert_eq!(count(Subgroup::Skk), 6);
        assert_eq!(count(Subgroup::SkkTau), 3);
    }

    #[test]
    fn skktau_cosets_are_two_skk_cosets() {
        for k in 1..=3 {
            let g = enumerate_group(2 * k).unwrap();
            let mut by_big: HashMap<Permutation, Vec<Permutation>> = HashMap::new();
            for s in &g {
                by_big.entry(coset_key(s, Subgroup::SkkTau)).or_default().push(s.clone());
            }
            let kf = factorial(k) as usize;
            for members in by_big.values() {
                let mut small: HashMap<Permutation, usize> = HashMap::new();
                for s in members {
                    *small.entry(coset_key(s, Subgroup::Skk)).or_default() += 1;
                }
                assert_eq!(small.len(), 2);
                assert!(small.values().all(|&c| c == kf * kf));
            }
        }
    }

    #[test]
    fn characters_of_s3() {
        let std = part(&[2, 1]);
        let vals: Vec<i64> =
            [part(&[1, 1, 1]), part(&[2, 1]), part(&[3])].iter().map(|m| character(&std, m).unwrap()).collect();
        assert_eq!(vals, vec![2, 0, -1]);
        assert!(character(&std, &part(&[2, 2])).is_err());
    }

    #[test]
    fn trivial_and_sign_characters() {
        for k in 1..=6 {
            let triv = part(&[k]);
            let sign = part(&vec![1; k]);
            for s in enumerate_group(k).unwrap() {
                let mu = s.cycle_type();
                assert_eq!(character(&triv, &mu).unwrap(), 1);
                assert_eq!(character(&sign, &mu).unwrap(), s.signature());
            }
        }
    }

    #[test]
    fn standard_character_counts_fixed_points() {
        // chi^{(k-1,1)}(s) = fix(s) - 1, from the permutation representation
        for k in 2..=6 {
            let std = part(&[k - 1, 1]);
            for s in enumerate_group(k).unwrap() {
                let fix = (0..k).filter(|&i| s.apply(i) == i).count() as i64;
                assert_eq!(character(&std, &s.cycle_type()).unwrap(), fix - 1);
            }
        }
    }

    #[test]
    fn dimensions_square_sum_to_group_order() {
        for k in 1..=7 {
            let t = CharacterTable::new(k).unwrap();
            let sum: i64 = t.irreps.iter().map(|l| t.dimension(l).unwrap().pow(2)).sum();
            assert_eq!(sum as u64, factorial(k));
        }
        let t = CharacterTable::new(4).unwrap();
        assert_eq!(t.dimension(&part(&[3, 1])), Some(3));
        assert_eq!(t.dimension(&part(&[2, 2])), Some(2));
    }

    #[test]
    fn table_row_orthogonality() {
        for k in 1..=7 {
            let t = CharacterTable::new(k).unwrap();
            let kf = factorial(k) as i64;
            for (i, ri) in t.values.iter().enumerate() {
                for (j, rj) in t.values.iter().enumerate() {
                    let s: i64 = (0..t.classes.len()).map(|c| t.class_sizes[c] as i64 * ri[c] * rj[c]).sum();
                    assert_eq!(s, if i == j { kf } else { 0 });
                }
            }
            assert_eq!(t.class_sizes.iter().sum::<u64>(), factorial(k));
        }
    }

    #[test]
    fn table_csv_has_headers() {
        let csv = CharacterTable::new(3).unwrap().to_csv();
        let first = csv.lines().next().unwrap();
        assert_eq!(first, "irrep,\"(3)\",\"(2,1)\",\"(1,1,1)\"");
        assert_eq!(csv.lines().count(), 4);
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        any::<u64>().prop_map(move |seed| Permutation::random(n, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    proptest! {
        #[test]
        fn associativity(a in arb_perm(6), b in arb_perm(6), c in arb_perm(6)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn inverse_cancels(a in arb_perm(7)) {
            prop_assert!((&a * &a.inverse()).is_identity());
            prop_assert!((&a.inverse() * &a).is_identity());
        }

        #[test]
        fn embed_join_is_a_morphism(a in arb_perm(3), b in arb_perm(3), c in arb_perm(3), d in arb_perm(3)) {
            prop_assert_eq!(embed_join(&(&a * &c), &(&b * &d)), &embed_join(&a, &b) * &embed_join(&c, &d));
        }

        #[test]
        fn tau_intertwines_halves(a in arb_perm(3), b in arb_perm(3)) {
            let t = tau(3);
            prop_assert_eq!(&t * &embed_join(&a, &b), &embed_join(&b, &a) * &t);
        }

        #[test]
        fn coset_key_is_stable(s in arb_perm(8), a in arb_perm(4), b in arb_perm(4)) {
            let moved = &embed_join(&a, &b) * &s;
            prop_assert_eq!(coset_key(&moved, Subgroup::Skk), coset_key(&s, Subgroup::Skk));
            let flipped = &tau(4) * &moved;
            prop_assert_eq!(coset_key(&flipped, Subgroup::SkkTau), coset_key(&s, Subgroup::SkkTau));
        }

        #[test]
        fn signature_is_multiplicative(a in arb_perm(6), b in arb_perm(6)) {
            prop_assert_eq!((&a * &b).signature(), a.signature() * b.signature());
        }
    }
}
