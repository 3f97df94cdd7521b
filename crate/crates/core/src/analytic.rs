//! Limits of flattening words: the pair covariances of the `S_k`-circular family,
//! the non-crossing Wick recursion for `E[m_1^e1 u_1 ... m_L^eL u_L]`,
//! linear combinations of flattenings and the freeness criteria for them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElement;
use crate::perm::{
    embed_join, enumerate_group, enumerate_group_bounded, factorial, split_join, tau, CharacterTable, IntegerPartition,
    Permutation,
};
use crate::scalar::Scalar;
use crate::word::{Eps, Letter, Word};

/// Largest pairing size for [`enumerate_nc_pairings`].
pub const MAX_PAIRING_SIZE: usize = 20;
/// Largest moment order for [`predicted_moments`].
pub const MAX_MOMENT_ORDER: usize = 12;

/// `E(m_sigma^e u_eta m_sigma'^e')`.
///
/// With `rho = sigma sigma'^-1`: `(1,*)` gives `c u_a` when `rho = a ⊔ eta`;
/// `(*,1)` gives `c u_b` when `rho = eta ⊔ b`; `(1,1)` gives `c' u_b` when
/// `tau rho = eta ⊔ b`; `(*,*)` is the adjoint of `E(m_sigma' u_{eta^-1} m_sigma)`.
pub fn covariance<S: Scalar>(l: &Letter, eta: &Permutation, l2: &Letter, c: &S, cp: &S) -> GroupAlgebraElement<S> {
    let k = eta.degree();
    debug_assert_eq!(l.sigma.degree(), 2 * k);
    debug_assert_eq!(l2.sigma.degree(), 2 * k);
    let rho = &l.sigma * &l2.sigma.inverse();
    let hit = |split: Option<(Permutation, Permutation)>, left: bool, coef: &S| match split {
        Some((a, b)) if left && &b == eta => GroupAlgebraElement::term(&a, coef.clone()),
        Some((a, b)) if !left && &a == eta => GroupAlgebraElement::term(&b, coef.clone()),
        _ => GroupAlgebraElement::zero(k),
    };
    match (l.eps, l2.eps) {
        (Eps::One, Eps::Star) => hit(split_join(&rho), true, c),
        (Eps::Star, Eps::One) => hit(split_join(&rho), false, c),
        (Eps::One, Eps::One) => hit(split_join(&(&tau(k) * &rho)), false, cp),
        (Eps::Star, Eps::Star) => covariance(&l2.adjoint(), &eta.inverse(), &l.adjoint(), c, cp).adjoint(),
    }
}

/// Non-crossing pair partition of `{0, .., n-1}`; pairs `(i, j)` with `i < j`, sorted by `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NcPairPartition {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl NcPairPartition {
    pub fn new(n: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; n];
        for &(i, j) in &pairs {
            if i >= j || j >= n || seen[i] || seen[j] {
                return Err(Error::InvalidPartition(format!("bad pair ({i}, {j}) for n = {n}")));
            }
            seen[i] = true;
            seen[j] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition("pairs do not cover every point".into()));
        }
        for &(a, c) in &pairs {
            for &(b, d) in &pairs {
                if a < b && b < c && c < d {
                    return Err(Error::InvalidPartition(format!("({a}, {c}) crosses ({b}, {d})")));
                }
            }
        }
        pairs.sort_unstable();
        Ok(NcPairPartition { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Partner of each point.
    pub fn partner(&self) -> Vec<usize> {
        let mut p = vec![0; self.n];
        for &(i, j) in &self.pairs {
            p[i] = j;
            p[j] = i;
        }
        p
    }
}

impl Serialize for NcPairPartition {
    fn serialize<Sr: Serializer>(&self, s: Sr) -> std::result::Result<Sr::Ok, Sr::Error> {
        let one_based: Vec<(usize, usize)> = self.pairs.iter().map(|&(i, j)| (i + 1, j + 1)).collect();
        one_based.serialize(s)
    }
}

/// All of `NC_2(n)`; empty for odd `n`.
pub fn enumerate_nc_pairings(n: usize) -> Result<Vec<NcPairPartition>> {
    if n > MAX_PAIRING_SIZE {
        return Err(Error::BoundExceeded { what: "pairing size", value: n, bound: MAX_PAIRING_SIZE });
    }
    if n % 2 == 1 {
        return Ok(Vec::new());
    }
    fn rec(lo: usize, hi: usize) -> Vec<Vec<(usize, usize)>> {
        if lo >= hi {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for j in (lo + 1..hi).step_by(2) {
            let inner = rec(lo + 1, j);
            let outer = rec(j + 1, hi);
            for a in &inner {
                for b in &outer {
                    let mut v = Vec::with_capacity(a.len() + b.len() + 1);
                    v.push((lo, j));
                    v.extend_from_slice(a);
                    v.extend_from_slice(b);
                    out.push(v);
                }
            }
        }
        out
    }
    Ok(rec(0, n)
        .into_iter()
        .map(|mut pairs| {
            pairs.sort_unstable();
            NcPairPartition { n, pairs }
        })
        .collect())
}

/// `E[a_0 u_{eta_0} ... a_{L-1} u_{eta_{L-1}}]` for a centered `S_k`-circular
/// family, given the pair covariance `cov(i, beta, j) = E(a_i u_beta a_j)`.
///
/// Pairs position `s` with each admissible `j`, folding the inner expectation
/// into the middle argument; segment values are tabulated by length.
pub fn wick_expectation<S: Scalar>(
    k: usize,
    etas: &[Permutation],
    cov: &dyn Fn(usize, &Permutation, usize) -> GroupAlgebraElement<S>,
) -> GroupAlgebraElement<S> {
    let len = etas.len();
    // seg[s][e] = E over positions s..e (exclusive)
    let mut seg: Vec<Vec<GroupAlgebraElement<S>>> = vec![vec![GroupAlgebraElement::zero(k); len + 1]; len + 1];
    for (s, row) in seg.iter_mut().enumerate() {
        row[s] = GroupAlgebraElement::unit(k);
    }
    for width in (2..=len).step_by(2) {
        for s in 0..=len - width {
            let e = s + width;
            let mut acc = GroupAlgebraElement::zero(k);
            for j in (s + 1..e).step_by(2) {
                let inner = &seg[s + 1][j];
                let mut pair = GroupAlgebraElement::zero(k);
                for (beta, x) in inner.iter() {
                    let kc = cov(s, &(&etas[s] * beta), j);
                    if !kc.is_zero() {
                        pair = &pair + &kc.scale(x);
                    }
                }
                if pair.is_zero() {
                    continue;
                }
                let right = &GroupAlgebraElement::basis(&etas[j]) * &seg[j + 1][e];
                acc = &acc + &(&pair * &right);
            }
            seg[s][e] = acc;
        }
    }
    seg[0][len].clone()
}

/// `E` of a word over any coefficient field.
pub fn word_expectation_in<S: Scalar>(w: &Word, c: &S, cp: &S) -> GroupAlgebraElement<S> {
    let cov = |i: usize, beta: &Permutation, j: usize| covariance(&w.letters[i], beta, &w.letters[j], c, cp);
    wick_expectation(w.k, &w.etas, &cov)
}

pub fn word_expectation(w: &Word, c: f64, cp: Complex64) -> GroupAlgebraElement<Complex64> {
    word_expectation_in(w, &Complex64::new(c, 0.0), &cp)
}

/// `phi` of [`word_expectation`].
pub fn word_phi(w: &Word, c: f64, cp: Complex64) -> Complex64 {
    word_expectation(w, c, cp).phi()
}

/// Evaluates one pairing by repeatedly collapsing an interval block into the
/// element trailing its left neighbour.
pub fn pairing_contribution<S: Scalar>(w: &Word, xi: &NcPairPartition, c: &S, cp: &S) -> GroupAlgebraElement<S> {
    let k = w.k;
    let partner = xi.partner();
    let mut prefix = GroupAlgebraElement::unit(k);
    // (original position, trailing element)
    let mut items: Vec<(usize, GroupAlgebraElement<S>)> =
        w.etas.iter().enumerate().map(|(i, e)| (i, GroupAlgebraElement::basis(e))).collect();
    while !items.is_empty() {
        let p = (0..items.len() - 1)
            .find(|&p| partner[items[p].0] == items[p + 1].0)
            .expect("a non-crossing pairing always has an interval block");
        let (a, ref ta) = items[p];
        let (b, ref tb) = items[p + 1];
        let mut v = GroupAlgebraElement::zero(k);
        for (beta, x) in ta.iter() {
            v = &v + &covariance(&w.letters[a], beta, &w.letters[b], c, cp).scale(x);
        }
        let v = &v * tb;
        items.drain(p..p + 2);
        if p == 0 {
            prefix = &prefix * &v;
        } else {
            items[p - 1].1 = &items[p - 1].1 * &v;
        }
    }
    prefix
}

/// `E` of a word as an explicit sum over `NC_2(L)`.
pub fn word_expectation_brute<S: Scalar>(w: &Word, c: &S, cp: &S) -> Result<GroupAlgebraElement<S>> {
    let mut acc = GroupAlgebraElement::zero(w.k);
    for xi in enumerate_nc_pairings(w.len())? {
        acc = &acc + &pairing_contribution(w, &xi, c, cp);
    }
    Ok(acc)
}

/// The three normalized sums of flattenings whose limits are studied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum Target {
    /// `sum_sigma M_sigma / sqrt((2k)! k! c)`.
    S1,
    /// `sum_sigma sg(sigma) M_sigma / sqrt((2k)! k! c)`.
    S2,
    /// `sum_sigma (M_sigma + M_sigma^*) / sqrt(2 (2k)! k! (c + Re c'))`, Hermitian.
    S3,
}

impl Target {
    pub fn is_hermitian(self) -> bool {
        self == Target::S3
    }
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(Target::S1),
            "S2" => Ok(Target::S2),
            "S3" => Ok(Target::S3),
            other => Err(Error::InvalidInput(format!("unknown target '{other}'"))),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Normalizing constant of a target for model parameter `(c, c')`.
pub fn target_scale(which: Target, k: usize, c: f64, cp: Complex64) -> Result<f64> {
    let base = (factorial(2 * k) * factorial(k)) as f64;
    let v = match which {
        Target::S1 | Target::S2 => c,
        Target::S3 => 2.0 * (c + cp.re),
    };
    if v <= 0.0 {
        return Err(Error::InvalidModel(format!("{which} needs a positive variance, got {v}")));
    }
    Ok(1.0 / (base * v).sqrt())
}

/// Finite linear combination `sum a(sigma, eps) m_sigma^eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture<S = Complex64> {
    k: usize,
    terms: BTreeMap<(Permutation, Eps), S>,
}

impl<S: Scalar> Mixture<S> {
    pub fn new(k: usize) -> Self {
        Mixture { k, terms: BTreeMap::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn add(&mut self, sigma: Permutation, eps: Eps, coef: S) {
        assert_eq!(sigma.degree(), 2 * self.k, "mixture letter of the wrong degree");
        let slot = self.terms.entry((sigma, eps)).or_insert_with(S::zero);
        *slot = slot.clone() + coef;
    }

    pub fn terms(&self) -> impl Iterator<Item = (Letter, &S)> {
        self.terms.iter().filter(|(_, v)| !v.is_zero()).map(|((s, e), v)| (Letter::new(s.clone(), *e), v))
    }

    pub fn len(&self) -> usize {
        self.terms().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_sigma w(sigma) m_sigma` over all of `S_2k`.
    pub fn all_flattenings(k: usize, w: impl Fn(&Permutation) -> S) -> Result<Self> {
        let mut m = Self::new(k);
        for sigma in enumerate_group(2 * k)? {
            let v = w(&sigma);
            m.add(sigma, Eps::One, v);
        }
        Ok(m)
    }

    /// `sum_{eta1, eta2} a(eta1, eta2) m_{(eta1 ⊔ eta2) sigma0}`.
    pub fn from_coefficients(sigma0: &Permutation, a: impl Fn(&Permutation, &Permutation) -> S) -> Result<Self> {
        let k = sigma0.degree() / 2;
        let g = enumerate_group(k)?;
        let mut m = Self::new(k);
        for e1 in &g {
            for e2 in &g {
                m.add(&embed_join(e1, e2) * sigma0, Eps::One, a(e1, e2));
            }
        }
        Ok(m)
    }

    pub fn adjoint(&self) -> Self {
        Mixture { k: self.k, terms: self.terms.iter().map(|((s, e), v)| ((s.clone(), e.flip()), v.conj())).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        Mixture { k: self.k, terms: self.terms.iter().map(|(key, v)| (key.clone(), v.clone() * c.clone())).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((s, e), v) in &other.terms {
            out.add(s.clone(), *e, v.clone());
        }
        out
    }
}

impl Mixture<Complex64> {
    /// The limit element of a normalized target.
    pub fn target(which: Target, k: usize, c: f64, cp: Complex64) -> Result<Self> {
        let z = Complex64::new(target_scale(which, k, c, cp)?, 0.0);
        let m = match which {
            Target::S1 => Self::all_flattenings(k, |_| z)?,
            Target::S2 => Self::all_flattenings(k, |s| z * s.signature() as f64)?,
            Target::S3 => {
                let s = Self::all_flattenings(k, |_| z)?;
                s.plus(&s.adjoint())
            }
        };
        Ok(m)
    }

    /// `psi^lambda = (dim lambda / (2k)!) sum_sigma chi^lambda(sigma) m_sigma` for `lambda ⊢ 2k`.
    pub fn parastatistics(lambda: &IntegerPartition) -> Result<Self> {
        let n = lambda.size();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidPartition(format!("{lambda} is not a partition of an even integer")));
        }
        let table = CharacterTable::new(n)?;
        let dim = table.dimension(lambda).ok_or_else(|| Error::InvalidPartition(format!("{lambda}")))?;
        let kl = dim as f64 / factorial(n) as f64;
        Self::all_flattenings(n / 2, |s| Complex64::new(kl * table.eval(lambda, s).unwrap() as f64, 0.0))
    }
}

/// `E(s u_eta s')`, or `E(s u_eta s'^*)` when `conj_second`.
pub fn mixture_covariance<S: Scalar>(
    s: &Mixture<S>,
    eta: &Permutation,
    s2: &Mixture<S>,
    c: &S,
    cp: &S,
    conj_second: bool,
) -> GroupAlgebraElement<S> {
    let mut acc = GroupAlgebraElement::zero(s.k);
    for (l, a) in s.terms() {
        for (l2, b) in s2.terms() {
            let (l2, b) = if conj_second { (l2.adjoint(), b.conj()) } else { (l2, b.clone()) };
            let cv = covariance(&l, eta, &l2, c, cp);
            if !cv.is_zero() {
                acc = &acc + &cv.scale(&(a.clone() * b));
            }
        }
    }
    acc
}

/// `E[s_1 u_{eta_1} ... s_L u_{eta_L}]` for mixtures `s_i`.
pub fn mixture_word_expectation<S: Scalar>(
    items: &[Mixture<S>],
    etas: &[Permutation],
    c: &S,
    cp: &S,
) -> Result<GroupAlgebraElement<S>> {
    if items.len() != etas.len() {
        return Err(Error::InvalidInput(format!("{} mixtures but {} etas", items.len(), etas.len())));
    }
    let Some(first) = items.first() else {
        return Err(Error::InvalidInput("empty mixture word".into()));
    };
    let k = first.k;
    if items.iter().any(|m| m.k != k) || etas.iter().any(|e| e.degree() != k) {
        return Err(Error::InvalidInput("inconsistent degrees in mixture word".into()));
    }
    let cov = |i: usize, beta: &Permutation, j: usize| mixture_covariance(&items[i], beta, &items[j], c, cp, false);
    Ok(wick_expectation(k, etas, &cov))
}

/// `phi((s s^*)^n)` for `n = 1..=n_max`, or `phi(s^n)` when `hermitian`.
pub fn mixture_moments<S: Scalar>(s: &Mixture<S>, hermitian: bool, n_max: usize, c: &S, cp: &S) -> Result<Vec<S>> {
    let id = Permutation::identity(s.k);
    let adj = s.adjoint();
    (1..=n_max)
        .map(|n| {
            let items: Vec<Mixture<S>> = if hermitian {
                vec![s.clone(); n]
            } else {
                (0..2 * n).map(|i| if i % 2 == 0 { s.clone() } else { adj.clone() }).collect()
            };
            let etas = vec![id.clone(); items.len()];
            Ok(mixture_word_expectation(&items, &etas, c, cp)?.phi())
        })
        .collect()
}

/// Coefficient function `a(eta1, eta2)` over `S_k × S_k`; absent pairs are zero.
pub type CoefficientMap = BTreeMap<(Permutation, Permutation), Complex64>;

/// `a(eta1, eta2) = b(eta1) chi^rho(eta2)`.
pub fn character_coefficients(rho: &IntegerPartition, b: impl Fn(&Permutation) -> Complex64) -> Result<CoefficientMap> {
    let k = rho.size();
    let table = CharacterTable::new(k)?;
    let g = enumerate_group(k)?;
    let mut out = CoefficientMap::new();
    for e1 in &g {
        for e2 in &g {
            let chi = table.eval(rho, e2).ok_or_else(|| Error::InvalidPartition(format!("{rho}")))?;
            let v = b(e1) * chi as f64;
            if v != Complex64::zero() {
                out.insert((e1.clone(), e2.clone()), v);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FreenessReport {
    pub cross_free: bool,
    pub a_scalar: bool,
    pub a_prime_scalar: bool,
    /// Largest `|sum_mu a(eta1 mu1, eta2 mu2) conj a'(mu1, mu2)|`.
    pub max_cross_residual: f64,
    /// Largest `|sum_mu a(eta mu1, mu2) conj a(mu1, mu2)|` over `eta != id`, for `a` and `a'`.
    pub max_scalar_residual: (f64, f64),
}

fn get(a: &CoefficientMap, e1: &Permutation, e2: &Permutation) -> Complex64 {
    a.get(&(e1.clone(), e2.clone())).copied().unwrap_or_default()
}

fn correlation(
    g: &[Permutation],
    a: &CoefficientMap,
    a2: &CoefficientMap,
    e1: &Permutation,
    e2: &Permutation,
) -> Complex64 {
    let mut s = Complex64::zero();
    for m1 in g {
        for m2 in g {
            s += get(a, &(e1 * m1), &(e2 * m2)) * get(a2, m1, m2).conj();
        }
    }
    s
}

/// Checks the coefficient conditions under which `sum a m_{(eta1 ⊔ eta2) sigma}` and
/// `sum a' m_{(eta1 ⊔ eta2) sigma}` are `S_k`-free (`cross_free`) and have scalar
/// self-covariance (`a_scalar`, `a_prime_scalar`), each up to `tol`.
pub fn freeness_conditions(k: usize, a: &CoefficientMap, a2: &CoefficientMap, tol: f64) -> Result<FreenessReport> {
    let g = enumerate_group_bounded(k, 6)?;
    let mut cross: f64 = 0.0;
    for e1 in &g {
        for e2 in &g {
            cross = cross.max(correlation(&g, a, a2, e1, e2).norm());
        }
    }
    let id = Permutation::identity(k);
    let scalar = |x: &CoefficientMap| {
        g.iter().filter(|e| !e.is_identity()).map(|e| correlation(&g, x, x, e, &id).norm()).fold(0.0, f64::max)
    };
    let (sa, sb) = (scalar(a), scalar(a2));
    Ok(FreenessReport {
        cross_free: cross <= tol,
        a_scalar: sa <= tol,
        a_prime_scalar: sb <= tol,
        max_cross_residual: cross,
        max_scalar_residual: (sa, sb),
    })
}

/// True when every pair covariance `E(l^e u_id l'^e')` among the letters, for every
/// choice of `e, e'`, is a multiple of the unit.
pub fn scalar_freeness_report(letters: &[Letter], c: f64, cp: Complex64) -> bool {
    let c = Complex64::new(c, 0.0);
    for l in letters {
        let id = Permutation::identity(l.half_order());
        for l2 in letters {
            for e1 in [Eps::One, Eps::Star] {
                for e2 in [Eps::One, Eps::Star] {
                    let cv =
                        covariance(&Letter::new(l.sigma.clone(), e1), &id, &Letter::new(l2.sigma.clone(), e2), &c, &cp);
                    if cv.iter().any(|(eta, _)| !eta.is_identity()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn catalan(n: usize) -> u64 {
    (0..n as u64).fold(1u64, |acc, i| acc * 2 * (2 * i + 1) / (i + 2))
}

/// Limiting moments of a target: `phi((s s^*)^n) = Cat(n)/k!` for `S1`, `S2`;
/// for `S3`, `phi(s^j)` is `Cat(j/2)/k!` for even `j` and 0 for odd `j`.
pub fn predicted_moments(which: Target, k: usize, n_max: usize) -> Result<Vec<f64>> {
    if n_max > MAX_MOMENT_ORDER {
        return Err(Error::BoundExceeded { what: "moment order", value: n_max, bound: MAX_MOMENT_ORDER });
    }
    let kf = factorial(k) as f64;
    Ok((1..=n_max)
        .map(|n| match which {
            Target::S1 | Target::S2 => catalan(n) as f64 / kf,
            Target::S3 if n % 2 == 0 => catalan(n / 2) as f64 / kf,
            Target::S3 => 0.0,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{coset_key, Subgroup};
    use crate::{AlgebraElement, ExactAlgebraElement};
    use num_rational::Rational64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_images(v).unwrap()
    }

    #[test]
    fn covariance_k1_examples() {
        let id2 = Permutation::identity(2);
        let id1 = Permutation::identity(1);
        let v = covariance(&Letter::one(id2.clone()), &id1, &Letter::star(id2.clone()), &cx(1.0), &cx(0.0));
        assert_eq!(v, AlgebraElement::unit(1));
        let c0 = Complex64::new(0.3, -0.2);
        let v = covariance(&Letter::one(id2.clone()), &id1, &Letter::one(tau(1)), &cx(1.0), &c0);
        assert_eq!(v, AlgebraElement::term(&id1, c0));
        let v = covariance(&Letter::one(id2.clone()), &id1, &Letter::one(id2), &cx(1.0), &c0);
        assert!(v.is_zero());
    }

    #[test]
    fn different_cosets_do_not_correlate() {
        let s = p(&[1, 2, 3, 4]);
        let s2 = p(&[1, 3, 2, 4]);
        assert_ne!(coset_key(&s, Subgroup::Skk), coset_key(&s2, Subgroup::Skk));
        for eta in enumerate_group(2).unwrap() {
            let v = covariance(&Letter::one(s.clone()), &eta, &Letter::star(s2.clone()), &cx(1.0), &cx(0.0));
            assert!(v.is_zero());
        }
    }

    #[test]
    fn nc_pairing_counts() {
        assert_eq!(enumerate_nc_pairings(2).unwrap().len(), 1);
        assert_eq!(enumerate_nc_pairings(2).unwrap()[0].pairs(), &[(0, 1)]);
        assert_eq!(enumerate_nc_pairings(4).unwrap().len(), 2);
        assert_eq!(enumerate_nc_pairings(16).unwrap().len(), catalan(8) as usize);
        assert_eq!(catalan(8), 1430);
        assert!(enumerate_nc_pairings(7).unwrap().is_empty());
        assert!(enumerate_nc_pairings(22).is_err());
        for xi in enumerate_nc_pairings(10).unwrap() {
            NcPairPartition::new(10, xi.pairs().to_vec()).unwrap();
        }
        assert!(NcPairPartition::new(4, vec![(0, 2), (1, 3)]).is_err());
    }

    #[test]
    fn word_expectation_examples() {
        let s = p(&[2, 4, 1, 3]);
        let w = Word::plain(2, vec![Letter::one(s.clone()), Letter::star(s.clone())]).unwrap();
        assert!(word_expectation(&w, 1.0, cx(0.0)).approx_eq(&AlgebraElement::unit(2), 0.0));
        let w3 = Word::plain(2, vec![Letter::one(s.clone()), Letter::star(s.clone()), Letter::one(s)]).unwrap();
        assert!(word_expectation(&w3, 1.0, cx(0.7)).is_zero());
        let id = Permutation::identity(2);
        let w4 = Word::plain(
            1,
            vec![Letter::one(id.clone()), Letter::star(id.clone()), Letter::one(id.clone()), Letter::star(id)],
        )
        .unwrap();
        assert!(word_expectation(&w4, 1.0, cx(0.0))
            .approx_eq(&AlgebraElement::term(&Permutation::identity(1), cx(2.0)), 1e-15));
    }

    #[test]
    fn mp_moments_k1() {
        let id = Permutation::identity(2);
        for n in 1..=6 {
            let letters: Vec<Letter> = (0..2 * n)
                .map(|i| if i % 2 == 0 { Letter::one(id.clone()) } else { Letter::star(id.clone()) })
                .collect();
            let w = Word::plain(1, letters).unwrap();
            assert_eq!(word_phi(&w, 1.0, cx(0.0)), cx(catalan(n) as f64));
        }
        let w = Word::plain(1, vec![Letter::one(id.clone()), Letter::one(id)]).unwrap();
        assert_eq!(word_phi(&w, 1.0, cx(0.0)), cx(0.0));
    }

    #[test]
    fn s1_and_s2_covariances() {
        let s1 = Mixture::target(Target::S1, 2, 1.0, cx(0.0)).unwrap();
        let s2 = Mixture::target(Target::S2, 2, 1.0, cx(0.0)).unwrap();
        let t = p(&[2, 1]);
        let half_sum = AlgebraElement::from_fn(2, |_| cx(0.5)).unwrap();
        for eta in enumerate_group(2).unwrap() {
            let v = mixture_covariance(&s1, &eta, &s1, &cx(1.0), &cx(0.0), true);
            assert!(v.approx_eq(&half_sum, 1e-12));
        }
        let v = mixture_covariance(&s2, &Permutation::identity(2), &s2, &cx(1.0), &cx(0.0), true);
        let want = AlgebraElement::from_terms(2, [(Permutation::identity(2), cx(0.5)), (t, cx(-0.5))]).unwrap();
        assert!(v.approx_eq(&want, 1e-12));
    }

    #[test]
    fn mixtures_on_different_skk_tau_cosets() {
        let s0 = p(&[1, 2, 3, 4]);
        let s1 = p(&[1, 3, 2, 4]);
        assert_ne!(coset_key(&s0, Subgroup::SkkTau), coset_key(&s1, Subgroup::SkkTau));
        let a = Mixture::from_coefficients(&s0, |e1, e2| cx((e1.signature() + 2 * e2.signature()) as f64)).unwrap();
        let b = Mixture::from_coefficients(&s1, |_, e2| cx(e2.signature() as f64 + 0.5)).unwrap();
        let cp = Complex64::new(0.4, 0.3);
        for eta in enumerate_group(2).unwrap() {
            for conj in [false, true] {
                assert!(mixture_covariance(&a, &eta, &b, &cx(1.0), &cp, conj).is_zero());
            }
        }
    }

    #[test]
    fn parastatistics_covariance_closed_form() {
        for lambda in crate::perm::enumerate_partitions(4) {
            let psi = Mixture::parastatistics(&lambda).unwrap();
            let table = CharacterTable::new(4).unwrap();
            let kl = table.dimension(&lambda).unwrap() as f64 / 24.0;
            for eta in enumerate_group(2).unwrap() {
                let got = mixture_covariance(&psi, &eta, &psi, &cx(1.0), &cx(0.0), true);
                let want =
                    AlgebraElement::from_fn(2, |e| cx(kl * table.eval(&lambda, &embed_join(e, &eta)).unwrap() as f64))
                        .unwrap();
                assert!(got.approx_eq(&want, 1e-12), "{lambda} {eta} {got:?} {want:?}");
            }
        }
        assert!(Mixture::parastatistics(&IntegerPartition::new(vec![2, 1]).unwrap()).is_err());
    }

    #[test]
    fn freeness_examples() {
        let k = 3;
        let rho = IntegerPartition::new(vec![3]).unwrap();
        let rho2 = IntegerPartition::new(vec![2, 1]).unwrap();
        let b = |e: &Permutation| cx(1.0 + e.cycle_count() as f64);
        let a = character_coefficients(&rho, b).unwrap();
        let a2 = character_coefficients(&rho2, |e| cx(e.signature() as f64)).unwrap();
        assert!(freeness_conditions(k, &a, &a2, 1e-9).unwrap().cross_free);
        let delta = character_coefficients(&rho2, |e| cx(if e.is_identity() { 1.0 } else { 0.0 })).unwrap();
        let r = freeness_conditions(k, &delta, &delta, 1e-9).unwrap();
        assert!(r.a_scalar && r.a_prime_scalar);
        let ones: CoefficientMap = enumerate_group(k)
            .unwrap()
            .iter()
            .flat_map(|x| enumerate_group(k).unwrap().into_iter().map(move |y| ((x.clone(), y), cx(1.0))))
            .collect();
        let r = freeness_conditions(k, &ones, &ones, 1e-9).unwrap();
        assert!(!r.cross_free);
        assert!((r.max_cross_residual - 36.0).abs() < 1e-12);
    }

    #[test]
    fn freeness_conditions_match_mixture_covariance() {
        // two routes: the coefficient identity and the expanded limit covariance
        let sigma0 = p(&[3, 1, 4, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for trial in 0..8 {
            let g = enumerate_group(2).unwrap();
            let mut a = CoefficientMap::new();
            let mut a2 = CoefficientMap::new();
            for e1 in &g {
                for e2 in &g {
                    let chi = e2.signature() as f64;
                    a.insert((e1.clone(), e2.clone()), cx(rng.random_range(-1.0..1.0)));
                    // trial parity decides whether a' lives in the other isotypic component
                    let v = if trial % 2 == 0 { chi } else { 1.0 };
                    a2.insert((e1.clone(), e2.clone()), cx(v * rng.random_range(0.5..1.0)));
                }
            }
            if trial % 2 == 0 {
                // project a onto the trivial component in eta2
                for e1 in &g {
                    let m: Complex64 = g.iter().map(|e2| a[&(e1.clone(), e2.clone())]).sum::<Complex64>() / 2.0;
                    for e2 in &g {
                        a.insert((e1.clone(), e2.clone()), m);
                    }
                }
            }
            let r = freeness_conditions(2, &a, &a2, 1e-10).unwrap();
            let s = Mixture::from_coefficients(&sigma0, |x, y| get(&a, x, y)).unwrap();
            let s2 = Mixture::from_coefficients(&sigma0, |x, y| get(&a2, x, y)).unwrap();
            let mut max: f64 = 0.0;
            for eta in &g {
                let v = mixture_covariance(&s, eta, &s2, &cx(1.0), &cx(0.0), true);
                max = max.max(v.max_abs_diff(&AlgebraElement::zero(2)));
            }
            assert_eq!(r.cross_free, max <= 1e-10, "trial {trial}");
            assert!((r.max_cross_residual - max).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_freeness_examples() {
        let reps: Vec<Letter> = [p(&[1, 2, 3, 4]), p(&[1, 3, 2, 4])].into_iter().map(Letter::one).collect();
        assert!(scalar_freeness_report(&reps, 1.0, cx(0.0)));
        let s = p(&[2, 4, 1, 3]);
        let t = p(&[2, 1]);
        let moved = &embed_join(&t, &Permutation::identity(2)) * &s;
        assert!(!scalar_freeness_report(&[Letter::one(s.clone()), Letter::one(moved)], 1.0, cx(0.0)));
        let moved = &embed_join(&Permutation::identity(2), &t) * &s;
        assert!(!scalar_freeness_report(&[Letter::one(s), Letter::one(moved)], 1.0, cx(0.0)));
        let k1 = [Letter::one(Permutation::identity(2)), Letter::one(tau(1))];
        assert!(scalar_freeness_report(&k1, 1.0, cx(0.0)));
    }

    #[test]
    fn predicted_moment_examples() {
        assert_eq!(predicted_moments(Target::S1, 2, 4).unwrap(), vec![0.5, 1.0, 2.5, 7.0]);
        assert_eq!(predicted_moments(Target::S1, 1, 5).unwrap(), vec![1.0, 2.0, 5.0, 14.0, 42.0]);
        assert_eq!(predicted_moments(Target::S3, 2, 4).unwrap(), vec![0.0, 0.5, 0.0, 1.0]);
        assert!(predicted_moments(Target::S1, 2, 13).is_err());
    }

    #[test]
    fn exact_mixture_moments_match_prediction() {
        // unnormalized rational sums; the normalization is ((2k)! k!)^n, or (2 (2k)! k!)^(j/2) for S3
        let k = 2;
        let one = Rational64::from_integer(1);
        let zero = Rational64::from_integer(0);
        let base = Rational64::from_integer((factorial(2 * k) * factorial(k)) as i64);
        let s1 = Mixture::all_flattenings(k, |_| one).unwrap();
        let got = mixture_moments(&s1, false, 3, &one, &zero).unwrap();
        for (n, g) in got.iter().enumerate() {
            let want = Rational64::new(catalan(n + 1) as i64, 2);
            assert_eq!(*g / base.pow(n as i32 + 1), want);
        }
        let s2 = Mixture::all_flattenings(k, |s| Rational64::from_integer(s.signature())).unwrap();
        assert_eq!(
            mixture_moments(&s2, false, 2, &one, &zero).unwrap(),
            mixture_moments(&s1, false, 2, &one, &zero).unwrap()
        );
        let s3 = s1.plus(&s1.adjoint());
        let got = mixture_moments(&s3, true, 4, &one, &zero).unwrap();
        let b3 = base * 2;
        assert_eq!(got[0], zero);
        assert_eq!(got[1] / b3, Rational64::new(1, 2));
        assert_eq!(got[2], zero);
        assert_eq!(got[3] / (b3 * b3), Rational64::from_integer(1));
    }

    #[test]
    fn normalized_target_matches_exact_rationals() {
        let s1 = Mixture::target(Target::S1, 2, 1.0, cx(0.0)).unwrap();
        let m = mixture_moments(&s1, false, 3, &cx(1.0), &cx(0.0)).unwrap();
        for (got, want) in m.iter().zip(predicted_moments(Target::S1, 2, 3).unwrap()) {
            assert!((got - want).norm() < 1e-12);
        }
        let s3 = Mixture::target(Target::S3, 1, 1.0, Complex64::new(0.5, 0.2)).unwrap();
        let m = mixture_moments(&s3, true, 4, &cx(1.0), &Complex64::new(0.5, 0.2)).unwrap();
        for (got, want) in m.iter().zip(predicted_moments(Target::S3, 1, 4).unwrap()) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        assert!(target_scale(Target::S3, 2, 1.0, cx(-1.0)).is_err());
    }

    #[test]
    fn s1_covariance_independent_of_eta() {
        for k in [2, 3] {
            let s1 = Mixture::target(Target::S1, k, 1.0, cx(0.0)).unwrap();
            let g = enumerate_group(k).unwrap();
            let b = mixture_covariance(&s1, &g[0], &s1, &cx(1.0), &cx(0.0), true);
            for eta in g.iter().skip(1).step_by(2) {
                let a = mixture_covariance(&s1, eta, &s1, &cx(1.0), &cx(0.0), true);
                assert!(a.approx_eq(&b, 1e-12));
            }
        }
    }

    fn arb_word(k: usize, max_len: usize) -> impl Strategy<Value = Word> {
        let g = enumerate_group(2 * k).unwrap();
        let h = enumerate_group(k).unwrap();
        prop::collection::vec((0..g.len(), any::<bool>(), 0..h.len()), 0..=max_len).prop_map(move |v| {
            let letters =
                v.iter().map(|&(s, e, _)| Letter::new(g[s].clone(), if e { Eps::Star } else { Eps::One })).collect();
            let etas = v.iter().map(|&(_, _, e)| h[e].clone()).collect();
            Word::new(k, letters, etas).unwrap()
        })
    }

    fn exact_params() -> (Rational64, Rational64) {
        (Rational64::new(3, 2), Rational64::new(1, 3))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recursion_matches_pairing_sum(w in arb_word(2, 8)) {
            let (c, cp) = exact_params();
            let fast: ExactAlgebraElement = word_expectation_in(&w, &c, &cp);
            let slow = word_expectation_brute(&w, &c, &cp).unwrap();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn complex_recursion_matches_pairing_sum(w in arb_word(2, 6)) {
            let (c, cp) = (cx(1.3), Complex64::new(0.2, -0.6));
            let fast = word_expectation_in(&w, &c, &cp);
            let slow = word_expectation_brute(&w, &c, &cp).unwrap();
            prop_assert!(fast.approx_eq(&slow, 1e-12));
        }

        #[test]
        fn phi_is_rotation_invariant(w in arb_word(2, 8), r in 0usize..8) {
            let (c, cp) = exact_params();
            let r = if w.is_empty() { 0 } else { r % w.len() };
            prop_assert_eq!(word_expectation_in(&w, &c, &cp).phi(), word_expectation_in(&w.rotated(r), &c, &cp).phi());
        }

        #[test]
        fn bimodule_property(w in arb_word(2, 6), e in 0usize..2) {
            prop_assume!(!w.is_empty());
            let (c, cp) = exact_params();
            let eta = enumerate_group(2).unwrap()[e].clone();
            let base: ExactAlgebraElement = word_expectation_in(&w, &c, &cp);
            let right = word_expectation_in(&w.then(&eta), &c, &cp);
            prop_assert_eq!(right, &base * &ExactAlgebraElement::basis(&eta));
        }

        #[test]
        fn star_star_symmetry(a in 0usize..24, b in 0usize..24, e in 0usize..2) {
            let g = enumerate_group(4).unwrap();
            let eta = enumerate_group(2).unwrap()[e].clone();
            let (c, cp) = (cx(1.0), Complex64::new(0.3, 0.4));
            let lhs = covariance(&Letter::star(g[a].clone()), &eta, &Letter::star(g[b].clone()), &c, &cp);
            let rhs = covariance(&Letter::one(g[b].clone()), &eta.inverse(), &Letter::one(g[a].clone()), &c, &cp).adjoint();
            prop_assert!(lhs.approx_eq(&rhs, 0.0));
        }

        #[test]
        fn absorbed_words_have_equal_expectation(w in arb_word(2, 6)) {
            let (c, cp) = exact_params();
            let plain = Word::plain(2, w.absorbed()).unwrap();
            prop_assert_eq!(word_expectation_in(&w, &c, &cp), word_expectation_in(&plain, &c, &cp));
        }

    }
}
