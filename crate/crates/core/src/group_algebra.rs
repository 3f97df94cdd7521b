//! The group algebra `C[S_k]` with `u_a u_b = u_{ab}` and `u_a^* = u_{a^{-1}}`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perm::{enumerate_group, Permutation};
use crate::scalar::Scalar;

/// Finitely supported `S_k -> S`. Absent keys are zero; explicit zeros are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAlgebraElement<S> {
    k: usize,
    coeffs: BTreeMap<Permutation, S>,
}

impl<S: Scalar> GroupAlgebraElement<S> {
    pub fn zero(k: usize) -> Self {
        GroupAlgebraElement { k, coeffs: BTreeMap::new() }
    }

    pub fn unit(k: usize) -> Self {
        Self::basis(&Permutation::identity(k))
    }

    pub fn basis(eta: &Permutation) -> Self {
        Self::term(eta, S::one())
    }

    pub fn term(eta: &Permutation, c: S) -> Self {
        let mut x = Self::zero(eta.degree());
        x.add_term(eta, c);
        x
    }

    pub fn from_terms<I: IntoIterator<Item = (Permutation, S)>>(k: usize, terms: I) -> Result<Self> {
        let mut x = Self::zero(k);
        for (eta, c) in terms {
            if eta.degree() != k {
                return Err(Error::DegreeMismatch { left: k, right: eta.degree() });
            }
            x.add_term(&eta, c);
        }
        Ok(x)
    }

    /// `sum_eta f(eta) u_eta` over all of `S_k`.
    pub fn from_fn(k: usize, f: impl Fn(&Permutation) -> S) -> Result<Self> {
        Self::from_terms(
            k,
            enumerate_group(k)?.into_iter().map(|e| {
                let c = f(&e);
                (e, c)
            }),
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeff(&self, eta: &Permutation) -> S {
        self.coeffs.get(eta).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &S)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, eta: &Permutation, c: S) {
        debug_assert_eq!(eta.degree(), self.k);
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(eta) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.coeffs.remove(eta);
                } else {
                    *v = s;
                }
            }
            None => {
                self.coeffs.insert(eta.clone(), c);
            }
        }
    }

    /// Convolution product; the degrees must agree.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::DegreeMismatch { left: self.k, right: other.k });
        }
        let mut out = Self::zero(self.k);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                out.add_term(&(a * b), x.clone() * y.clone());
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        GroupAlgebraElement { k: self.k, coeffs: self.coeffs.iter().map(|(e, c)| (e.inverse(), c.conj())).collect() }
    }

    /// Coefficient of the unit.
    pub fn phi(&self) -> S {
        self.coeff(&Permutation::identity(self.k))
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.k);
        for (e, v) in &self.coeffs {
            out.add_term(e, v.clone() * c.clone());
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GroupAlgebraElement<T> {
        let mut out = GroupAlgebraElement::zero(self.k);
        for (e, v) in &self.coeffs {
            out.add_term(e, f(v));
        }
        out
    }

    pub fn to_complex(&self) -> GroupAlgebraElement<Complex64> {
        self.map(Scalar::to_c64)
    }

    /// `max_eta |x(eta) - y(eta)| <= tol`. Elements of different degree are never close.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.k == other.k && self.max_abs_diff(other) <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (e, v) in &self.coeffs {
            m = m.max((v.clone() - other.coeff(e)).magnitude());
        }
        for (e, v) in &other.coeffs {
            if !self.coeffs.contains_key(e) {
                m = m.max(v.magnitude());
            }
        }
        m
    }
}

impl<S: Scalar> Add for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;
    fn add(self, rhs: Self) -> GroupAlgebraElement<S> {
        assert_eq!(self.k, rhs.k, "adding group algebra elements of different degree");
        let mut out = self.clone();
        for (e, v) in &rhs.coeffs {
            out.add_term(e, v.clone());
        }
        out
    }
}

impl<S: Scalar> Neg for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;
    fn neg(self) -> GroupAlgebraElement<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Sub for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;
    fn sub(self, rhs: Self) -> GroupAlgebraElement<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Mul for &GroupAlgebraElement<S> {
    type Output = GroupAlgebraElement<S>;
    /// Panics on a degree mismatch; see [`GroupAlgebraElement::multiply`].
    fn mul(self, rhs: Self) -> GroupAlgebraElement<S> {
        self.multiply(rhs).expect("multiplying group algebra elements of different degree")
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    perm: Permutation,
    re: f64,
    im: f64,
}

impl Serialize for GroupAlgebraElement<Complex64> {
    fn serialize<Sr: Serializer>(&self, s: Sr) -> std::result::Result<Sr::Ok, Sr::Error> {
        let terms: Vec<JsonTerm> =
            self.coeffs.iter().map(|(p, c)| JsonTerm { perm: p.clone(), re: c.re, im: c.im }).collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupAlgebraElement<Complex64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<JsonTerm>::deserialize(d)?;
        let k = terms.first().map(|t| t.perm.degree()).ok_or_else(|| D::Error::custom("empty term list"))?;
        Self::from_terms(k, terms.into_iter().map(|t| (t.perm, Complex64::new(t.re, t.im)))).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{AlgebraElement, ExactAlgebraElement, IntAlgebraElement};
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn t12() -> Permutation {
        Permutation::from_images(&[2, 1]).unwrap()
    }

    #[test]
    fn basis_products() {
        let s3 = enumerate_group(3).unwrap();
        for a in &s3 {
            let x = IntAlgebraElement::basis(a);
            assert_eq!(&x * &IntAlgebraElement::basis(&a.inverse()), IntAlgebraElement::unit(3));
            for b in &s3 {
                assert_eq!(&x * &IntAlgebraElement::basis(b), IntAlgebraElement::basis(&(a * b)));
            }
        }
    }

    #[test]
    fn square_of_symmetrizer() {
        let x = IntAlgebraElement::from_terms(2, [(Permutation::identity(2), 1), (t12(), 1)]).unwrap();
        let want = IntAlgebraElement::from_terms(2, [(Permutation::identity(2), 2), (t12(), 2)]).unwrap();
        assert_eq!(&x * &x, want);
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        let a = IntAlgebraElement::unit(2);
        let b = IntAlgebraElement::unit(3);
        assert!(matches!(a.multiply(&b), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn adjoint_and_phi() {
        let c = Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(IntAlgebraElement::basis(&c).adjoint(), IntAlgebraElement::basis(&c.inverse()));
        let z = Complex64::new(1.0, 2.0);
        let x = AlgebraElement::term(&Permutation::identity(2), z);
        assert_eq!(x.adjoint().phi(), z.conj());
        assert_eq!(IntAlgebraElement::unit(3).phi(), 1);
        assert_eq!(IntAlgebraElement::basis(&t12()).phi(), 0);
        let y = IntAlgebraElement::from_terms(2, [(Permutation::identity(2), 3), (t12(), 2)]).unwrap();
        assert_eq!(y.phi(), 3);
    }

    #[test]
    fn approx_eq_examples() {
        let u = AlgebraElement::unit(2);
        assert!(u.approx_eq(&u, 0.0));
        let v = &u + &AlgebraElement::term(&t12(), Complex64::new(1e-9, 0.0));
        assert!(u.approx_eq(&v, 1e-8));
        assert!(!u.approx_eq(&AlgebraElement::basis(&t12()), 0.5));
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = ExactAlgebraElement::basis(&t12());
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let x = AlgebraElement::from_terms(
            2,
            [(Permutation::identity(2), Complex64::new(0.5, 0.0)), (t12(), Complex64::new(0.0, -1.0))],
        )
        .unwrap();
        let js = serde_json::to_string(&x).unwrap();
        assert!(js.contains("\"perm\":[2,1]"));
        let back: AlgebraElement = serde_json::from_str(&js).unwrap();
        assert_eq!(back, x);
    }

    fn arb_elem(k: usize) -> impl Strategy<Value = ExactAlgebraElement> {
        let n = crate::perm::factorial(k) as usize;
        prop::collection::vec((-4i64..=4, 1i64..=3), n).prop_map(move |cs| {
            let g = enumerate_group(k).unwrap();
            ExactAlgebraElement::from_terms(k, g.into_iter().zip(cs).map(|(e, (a, b))| (e, Rational64::new(a, b))))
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn star_algebra_axioms(x in arb_elem(3), y in arb_elem(3), z in arb_elem(3)) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!((&x * &y).adjoint(), &y.adjoint() * &x.adjoint());
            prop_assert_eq!(x.adjoint().adjoint(), x.clone());
            let u = ExactAlgebraElement::unit(3);
            prop_assert_eq!(&u * &x, x.clone());
            prop_assert_eq!(&x * &u, x.clone());
        }

        #[test]
        fn phi_is_tracial(x in arb_elem(3), y in arb_elem(3)) {
            prop_assert_eq!((&x * &y).phi(), (&y * &x).phi());
        }
    }
}
