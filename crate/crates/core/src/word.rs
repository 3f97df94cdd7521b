//! Letters `m_sigma^eps` and words `m_1^{e1} u_{eta_1} ... m_L^{eL} u_{eta_L}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{embed_join, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Eps {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "*")]
    Star,
}

impl Eps {
    pub fn flip(self) -> Eps {
        match self {
            Eps::One => Eps::Star,
            Eps::Star => Eps::One,
        }
    }

    pub fn is_star(self) -> bool {
        self == Eps::Star
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eps::One => "1",
            Eps::Star => "*",
        })
    }
}

impl std::str::FromStr for Eps {
    type Err = Error;
    fn from_str(s: &str) -> Result<Eps> {
        match s.trim() {
            "1" => Ok(Eps::One),
            "*" | "star" => Ok(Eps::Star),
            other => Err(Error::InvalidInput(format!("eps must be '1' or '*', got '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub sigma: Permutation,
    pub eps: Eps,
}

impl Letter {
    pub fn new(sigma: Permutation, eps: Eps) -> Self {
        Letter { sigma, eps }
    }

    pub fn one(sigma: Permutation) -> Self {
        Letter { sigma, eps: Eps::One }
    }

    pub fn star(sigma: Permutation) -> Self {
        Letter { sigma, eps: Eps::Star }
    }

    pub fn half_order(&self) -> usize {
        self.sigma.degree() / 2
    }

    pub fn adjoint(&self) -> Letter {
        Letter { sigma: self.sigma.clone(), eps: self.eps.flip() }
    }

    /// The letter equal to `self * u_eta`:
    /// `M_s U_eta = M_{(id ⊔ eta^-1) s}` and `M_s^* U_eta = M^*_{(eta^-1 ⊔ id) s}`.
    pub fn absorb_right(&self, eta: &Permutation) -> Letter {
        let id = Permutation::identity(eta.degree());
        let inv = eta.inverse();
        let g = match self.eps {
            Eps::One => embed_join(&id, &inv),
            Eps::Star => embed_join(&inv, &id),
        };
        Letter { sigma: &g * &self.sigma, eps: self.eps }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m[{}]", self.sigma)?;
        if self.eps.is_star() {
            f.write_str("*")?;
        }
        Ok(())
    }
}

/// Alternating word; `etas[l]` follows `letters[l]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Word {
    pub k: usize,
    pub letters: Vec<Letter>,
    pub etas: Vec<Permutation>,
}

#[derive(Deserialize)]
struct WordSpec {
    k: usize,
    letters: Vec<Letter>,
    #[serde(default)]
    etas: Option<Vec<Permutation>>,
}

impl Word {
    pub fn new(k: usize, letters: Vec<Letter>, etas: Vec<Permutation>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be positive".into()));
        }
        if letters.len() != etas.len() {
            return Err(Error::InvalidInput(format!("{} letters but {} etas", letters.len(), etas.len())));
        }
        for l in &letters {
            if l.sigma.degree() != 2 * k {
                return Err(Error::DegreeMismatch { left: 2 * k, right: l.sigma.degree() });
            }
        }
        for e in &etas {
            if e.degree() != k {
                return Err(Error::DegreeMismatch { left: k, right: e.degree() });
            }
        }
        Ok(Word { k, letters, etas })
    }

    /// Word with every `eta` the identity.
    pub fn plain(k: usize, letters: Vec<Letter>) -> Result<Self> {
        let etas = vec![Permutation::identity(k); letters.len()];
        Self::new(k, letters, etas)
    }

    /// Parse `{k, letters: [{sigma, eps}], etas}`; missing `etas` means identities.
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: WordSpec = serde_json::from_str(s)?;
        match spec.etas {
            Some(etas) => Self::new(spec.k, spec.letters, etas),
            None => Self::plain(spec.k, spec.letters),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Equal letters with all `eta` folded into the flattening indices.
    pub fn absorbed(&self) -> Vec<Letter> {
        self.letters.iter().zip(&self.etas).map(|(l, e)| l.absorb_right(e)).collect()
    }

    /// Cyclic rotation by `r` positions (letter `r` first).
    pub fn rotated(&self, r: usize) -> Word {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let idx = |i: usize| (i + r) % n;
        Word {
            k: self.k,
            letters: (0..n).map(|i| self.letters[idx(i)].clone()).collect(),
            etas: (0..n).map(|i| self.etas[idx(i)].clone()).collect(),
        }
    }

    /// Multiply on the right by `u_eta`.
    pub fn then(&self, eta: &Permutation) -> Word {
        let mut w = self.clone();
        if let Some(last) = w.etas.last_mut() {
            *last = &*last * eta;
        }
        w
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, e) in self.letters.iter().zip(&self.etas) {
            write!(f, "{l}")?;
            if !e.is_identity() {
                write!(f, " u[{e}]")?;
            }
            f.write_str(" ")?;
        }
        Ok(())
    }
}
