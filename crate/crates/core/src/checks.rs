//! Exact finite-N identities of flattenings and permutation operators, run as a
//! suite on one sampled tensor. A mutation switch corrupts `eta ⊔ eta'` so that
//! the suite's sensitivity can itself be tested.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElement;
use crate::perm::{embed_join, enumerate_group, tau, Permutation};
use crate::tensor::{
    apply_left, apply_right, apply_right_adjoint, choi_check, cond_expect_n, flatten, perm_matrix, phi_n,
    sample_tensor, TensorModel, MAX_CHOI_SIDE,
};
use crate::FlatMatrix;

/// Largest `k` run by the suite.
pub const MAX_CHECK_K: usize = 3;
/// Largest `N^k` run by the suite.
pub const MAX_CHECK_SIDE: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    /// Builds `eta' ⊔ eta` where `eta ⊔ eta'` is meant.
    SwapJoin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    /// Random flattening indices tried per identity.
    pub samples: usize,
    pub tol: f64,
    pub mutation: Mutation,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { k: 2, n: 3, seed: 0, samples: 10, tol: 1e-12, mutation: Mutation::None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub cases: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: CheckConfig,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl CheckReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

struct Acc {
    name: &'static str,
    tol: f64,
    max: f64,
    cases: usize,
}

impl Acc {
    fn new(name: &'static str, tol: f64) -> Self {
        Acc { name, tol, max: 0.0, cases: 0 }
    }

    fn push(&mut self, err: f64) {
        self.max = self.max.max(err);
        self.cases += 1;
    }

    fn finish(self) -> CheckResult {
        CheckResult { name: self.name.into(), passed: self.max <= self.tol, max_error: self.max, cases: self.cases }
    }
}

pub fn run_checks(cfg: &CheckConfig) -> Result<CheckReport> {
    let (k, n) = (cfg.k, cfg.n);
    if k == 0 || k > MAX_CHECK_K {
        return Err(Error::BoundExceeded { what: "check order k", value: k, bound: MAX_CHECK_K });
    }
    let side = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    if n == 0 || side > MAX_CHECK_SIDE {
        return Err(Error::BoundExceeded { what: "check matrix side N^k", value: side, bound: MAX_CHECK_SIDE });
    }
    let join = |a: &Permutation, b: &Permutation| match cfg.mutation {
        Mutation::None => embed_join(a, b),
        Mutation::SwapJoin => embed_join(b, a),
    };
    let t = sample_tensor::<f64>(&TensorModel::ComplexGinibre, n, k, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let sigmas: Vec<Permutation> = (0..cfg.samples).map(|_| Permutation::random(2 * k, &mut rng)).collect();
    let g = enumerate_group(k)?;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    if n < k {
        warnings
            .push(format!("N = {n} < k = {k}: the U_eta are linearly dependent, so E_N coefficients are not unique"));
    }

    let mut conj = Acc::new("conjugation U_a M_s U_b^* = M_(a⊔b)s", cfg.tol);
    let mut transpose = Acc::new("transpose M_(tau s) = M_s^T", 0.0);
    for s in &sigmas {
        let m = flatten(&t, s)?;
        for a in &g {
            for b in &g {
                let lhs = apply_right_adjoint(&apply_left(a, &m), b);
                let rhs = flatten(&t, &(&join(a, b) * s))?;
                conj.push(lhs.max_abs_diff(&rhs));
            }
        }
        transpose.push(flatten(&t, &(&tau(k) * s))?.max_abs_diff(&m.transpose()));
    }
    checks.push(conj.finish());
    checks.push(transpose.finish());

    let mut trace = Acc::new("Phi_N[U_eta] = N^(#eta - k)", cfg.tol);
    let mut rep = Acc::new("U_a U_b = U_ab", 0.0);
    for a in &g {
        let ua: FlatMatrix = perm_matrix(a, n);
        let want = (n as f64).powi(a.cycle_count() as i32 - k as i32);
        trace.push((phi_n(&ua) - want).norm());
        for b in &g {
            rep.push(ua.matmul(&perm_matrix(b, n))?.max_abs_diff(&perm_matrix(&(a * b), n)));
        }
    }
    checks.push(trace.finish());
    checks.push(rep.finish());

    let mut bimod = Acc::new("E_N(U_a A U_b) = u_a E_N(A) u_b", cfg.tol);
    for s in sigmas.iter().take(3) {
        let m = flatten(&t, s)?;
        let base = cond_expect_n(&m)?.value;
        for a in &g {
            for b in &g {
                let moved = apply_right(&apply_left(a, &m), b);
                let lhs = cond_expect_n(&moved)?.value;
                let ua = GroupAlgebraElement::<Complex64>::basis(a);
                let ub = GroupAlgebraElement::<Complex64>::basis(b);
                bimod.push(lhs.max_abs_diff(&(&(&ua * &base) * &ub)));
            }
        }
    }
    checks.push(bimod.finish());

    if n.checked_pow(2 * k as u32).is_some_and(|v| v <= MAX_CHOI_SIDE) {
        let r = choi_check(n, k)?;
        let mut choi = Acc::new("Choi matrix C >= 0 and C^2 = k! C", 1e-10);
        choi.push((-r.min_eigenvalue).max(0.0));
        choi.push(r.idempotency_defect);
        checks.push(choi.finish());
    } else {
        warnings.push(format!("Choi check skipped: N^2k exceeds {MAX_CHOI_SIDE}"));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport { config: cfg.clone(), checks, warnings, passed })
}
