//! One function per subcommand: resolve settings, run the library, build the report.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use clap::Args;
use num_complex::Complex64;
use serde_json::json;

use tensor_flattenings::analytic::{character_coefficients, covariance, freeness_conditions, word_phi, Target};
use tensor_flattenings::checks::{run_checks, CheckConfig, Mutation};
use tensor_flattenings::perm::{enumerate_group, IntegerPartition};
use tensor_flattenings::spectra::{build_target, run_experiment, ExperimentConfig, MAX_EIGEN_SIDE};
use tensor_flattenings::tensor::{cond_expect_n, phi_n, sample_tensor_stream, word_eval};
use tensor_flattenings::traffic::{
    bell, cond_expect_oracle, dependence_classes, full_trace_expect, inj_trace_expect, q_profile, quotient, to_dot,
    TestHypergraph, VertexPartition,
};
use tensor_flattenings::{Eps, FlatMatrix, Letter, Permutation, RandomTensor, Word};

use crate::config::{Defaults, RunConfig, Shared};
use crate::report::{num, CliError, Report, RngInfo, Table};

/// Largest matrix side the stochastic commands will build.
const MAX_SIDE: usize = 4096;

fn perm(s: &str, degree: usize, flag: &str) -> Result<Permutation, CliError> {
    let images: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("{flag}: {e}")))?;
    let p = Permutation::from_images(&images).map_err(|e| CliError::usage(format!("{flag}: {e}")))?;
    if p.degree() != degree {
        return Err(CliError::usage(format!("{flag}: expected {degree} images, got {}", p.degree())));
    }
    Ok(p)
}

fn partition(s: &str, flag: &str) -> Result<IntegerPartition, CliError> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("{flag}: {e}")))?;
    IntegerPartition::new(parts).map_err(|e| CliError::usage(format!("{flag}: {e}")))
}

/// A word given inline as JSON or as `@path`.
fn word(spec: &str) -> Result<Word, CliError> {
    let text = match spec.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("--word {path}: {e}")))?,
        None => spec.to_string(),
    };
    Word::from_json(&text).map_err(|e| CliError::usage(format!("--word: {e}")))
}

fn side_guard(n: usize, k: usize) -> Result<usize, CliError> {
    match n.checked_pow(k as u32) {
        Some(s) if s <= MAX_SIDE => Ok(s),
        _ => Err(CliError::usage(format!("N^k exceeds {MAX_SIDE}; lower --N or --k"))),
    }
}

fn dump(path: &Path, m: &FlatMatrix) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    m.write_binary(&mut w)?;
    Ok(())
}

fn mean_se(v: &[Complex64]) -> (Complex64, f64) {
    let t = v.len() as f64;
    let mean = v.iter().sum::<Complex64>() / t;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

fn stream_rng(seed: u64) -> RngInfo {
    RngInfo { generator: "ChaCha8Rng", seed, streams: "stream t for trial t".into() }
}

fn complex(z: Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Corrupt the join eta ⊔ eta' to test the suite's sensitivity.
    #[arg(long, value_enum, default_value = "none")]
    pub mutation: MutationArg,
    /// Random flattening indices per identity.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum MutationArg {
    None,
    SwapJoin,
}

pub fn check(shared: &Shared, a: &CheckArgs) -> Result<Report, CliError> {
    let mut cfg = RunConfig::resolve("check", shared, Defaults { k: 2, n: 3, trials: 1, tol: 1e-12, seed: Some(0) })?;
    let mutation = match a.mutation {
        MutationArg::None => Mutation::None,
        MutationArg::SwapJoin => Mutation::SwapJoin,
    };
    cfg.params = json!({ "mutation": mutation, "samples": a.samples });
    let seed = cfg.seed.unwrap_or(0);
    let r = run_checks(&CheckConfig { k: cfg.k, n: cfg.n, seed, samples: a.samples, tol: cfg.tol, mutation })?;
    let mut table = Table::new(&["check", "passed", "max_error", "cases"]);
    for c in &r.checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), num(c.max_error), c.cases.to_string()]);
    }
    let result = json!({ "checks": r.checks, "failures": r.failures() });
    let mut report = Report::new(cfg, Some(stream_rng(seed)), r.passed, result, table);
    report.warnings = r.warnings;
    Ok(report)
}

#[derive(Args, Debug, Clone)]
pub struct CovarianceArgs {
    /// First flattening index, 1-based images of [2k].
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub sigma2: Option<String>,
    /// Permutation of [k] between the two letters.
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long, default_value = "1")]
    pub eps: String,
    #[arg(long, default_value = "*")]
    pub eps2: String,
}

pub fn covariance_cmd(shared: &Shared, a: &CovarianceArgs) -> Result<Report, CliError> {
    let mut cfg = RunConfig::resolve("covariance", shared, Defaults { k: 2, n: 4, trials: 200, tol: 0.0, seed: None })?;
    let k = cfg.k;
    let id2 = Permutation::identity(2 * k);
    let s1 = a.sigma.as_deref().map(|s| perm(s, 2 * k, "--sigma")).transpose()?.unwrap_or(id2.clone());
    let s2 = a.sigma2.as_deref().map(|s| perm(s, 2 * k, "--sigma2")).transpose()?.unwrap_or(id2);
    let eta = a.eta.as_deref().map(|s| perm(s, k, "--eta")).transpose()?.unwrap_or(Permutation::identity(k));
    let e1: Eps = a.eps.parse()?;
    let e2: Eps = a.eps2.parse()?;
    cfg.params = json!({ "sigma": s1, "sigma2": s2, "eta": eta, "eps": e1, "eps2": e2 });
    side_guard(cfg.n, k)?;
    let model = cfg.model();
    let (c, cp) = model.parameter();
    let (l1, l2) = (Letter::new(s1, e1), Letter::new(s2, e2));
    let w = Word::new(k, vec![l1.clone(), l2.clone()], vec![eta.clone(), Permutation::identity(k)])?;
    let limit = covariance(&l1, &eta, &l2, &Complex64::new(c, 0.0), &cp);
    let oracle = cond_expect_oracle(&w, cfg.n, &model)?;

    let group = enumerate_group(k)?;
    let mut samples = vec![Vec::with_capacity(cfg.trials); group.len()];
    let rng = if cfg.trials > 0 {
        let seed = cfg.require_seed()?;
        for t in 0..cfg.trials as u64 {
            let tensor: RandomTensor = sample_tensor_stream(&model, cfg.n, k, seed, t)?;
            let m = word_eval(&tensor, &w)?;
            if t == 0 {
                if let Some(p) = &cfg.dump {
                    dump(p, &m)?;
                }
            }
            let e = cond_expect_n(&m)?.value;
            for (g, out) in group.iter().zip(&mut samples) {
                out.push(e.coeff(g));
            }
        }
        Some(stream_rng(seed))
    } else {
        None
    };

    let mut passed = true;
    let mut rows = Vec::new();
    let mut table =
        Table::new(&["eta'", "mc_re", "mc_im", "mc_stderr", "oracle_re", "oracle_im", "limit_re", "limit_im"]);
    for (g, s) in group.iter().zip(&samples) {
        let (o, l) = (oracle.coeff(g), limit.coeff(g));
        let (mc, se) = if s.is_empty() { (Complex64::new(f64::NAN, f64::NAN), f64::NAN) } else { mean_se(s) };
        if !s.is_empty() {
            passed &= (mc - o).norm() <= 3.0 * se + cfg.tol;
        }
        table.push(vec![g.to_string(), num(mc.re), num(mc.im), num(se), num(o.re), num(o.im), num(l.re), num(l.im)]);
        rows.push(json!({
            "eta": g,
            "mc": if s.is_empty() { serde_json::Value::Null } else { complex(mc) },
            "mc_stderr": if s.is_empty() { serde_json::Value::Null } else { json!(se) },
            "oracle": complex(o),
            "limit": complex(l),
        }));
    }
    let mut report = Report::new(cfg.clone(), rng, passed, json!({ "rows": rows }), table);
    if cfg.n < k {
        report.warnings.push(format!("N = {} < k = {k}: E_N coefficients are not unique", cfg.n));
    }
    Ok(report)
}

#[derive(Args, Debug, Clone)]
pub struct MomentsArgs {
    /// Word as JSON `{"k":..,"letters":[{"sigma":[..],"eps":"1"}],"etas":[..]}` or `@file`.
    #[arg(long)]
    pub word: String,
    /// Dimensions at which the oracle is evaluated.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
    pub n_list: Vec<usize>,
}

pub fn moments(shared: &Shared, a: &MomentsArgs) -> Result<Report, CliError> {
    let w = word(&a.word)?;
    let mut ns = a.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() || ns[0] == 0 {
        return Err(CliError::usage("--n-list needs positive dimensions"));
    }
    let mut cfg =
        RunConfig::resolve("moments", shared, Defaults { k: w.k, n: ns[0], trials: 0, tol: 1e-12, seed: None })?;
    cfg.k = w.k;
    cfg.params = json!({ "word": w, "n_list": ns });
    let model = cfg.model();
    let (c, cp) = model.parameter();
    let predicted = word_phi(&w, c, cp);
    let letters = w.absorbed();
    let mut table = Table::new(&["N", "oracle_re", "oracle_im", "predicted", "abs_diff", "bound_C_over_N"]);
    let mut rows = Vec::new();
    let mut passed = true;
    let mut c_fit = None;
    for &n in &ns {
        let r = full_trace_expect(&letters, w.k, n, &model, true)?;
        let d = (r.exact - predicted).norm();
        // the first correction is O(1/N); C is fitted at the smallest N
        let cf = *c_fit.get_or_insert(d * n as f64);
        let bound = cf / n as f64;
        passed &= d <= bound + cfg.tol;
        table.push(vec![n.to_string(), num(r.exact.re), num(r.exact.im), num(predicted.re), num(d), num(bound)]);
        rows.push(json!({ "N": n, "oracle": complex(r.exact), "abs_diff": d, "bound": bound }));
    }
    let result = json!({ "predicted": complex(predicted), "rows": rows });
    Ok(Report::new(cfg, None, passed, result, table))
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long)]
    pub word: String,
    /// Restrict to one vertex partition, given as comma-separated block labels.
    #[arg(long)]
    pub partition: Option<String>,
    /// Write the quotient graph of --partition as DOT.
    #[arg(long)]
    pub dot: Option<std::path::PathBuf>,
    /// Evaluate every partition without pruning.
    #[arg(long)]
    pub no_prune: bool,
}

pub fn oracle(shared: &Shared, a: &OracleArgs) -> Result<Report, CliError> {
    let w = word(&a.word)?;
    let mut cfg = RunConfig::resolve("oracle", shared, Defaults { k: w.k, n: 4, trials: 0, tol: 0.0, seed: None })?;
    cfg.k = w.k;
    cfg.params = json!({ "word": w, "partition": a.partition, "prune": !a.no_prune });
    let model = cfg.model();
    let letters = w.absorbed();
    let n = cfg.n;
    let mut table = Table::new(&["quantity", "value"]);
    let mut result = serde_json::Map::new();
    let mut passed = true;

    if let Some(spec) = &a.partition {
        let labels: Vec<usize> = spec
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::usage(format!("--partition: {e}")))?;
        let g = TestHypergraph::from_letters(w.k, &letters)?;
        if labels.len() != g.num_vertices() {
            return Err(CliError::usage(format!("--partition needs {} labels", g.num_vertices())));
        }
        let pi = VertexPartition::new(&labels);
        let q = quotient(&g, &pi)?;
        let classes = dependence_classes(&q);
        let v = inj_trace_expect(&q, n, &model);
        let prof = q_profile(&g, &pi)?;
        if let Some(p) = &a.dot {
            std::fs::write(p, to_dot(&q))?;
        }
        table.push(vec!["blocks".into(), q.num_vertices.to_string()]);
        table.push(vec!["classes".into(), classes.len().to_string()]);
        table.push(vec!["inj_trace_re".into(), num(v.re)]);
        table.push(vec!["inj_trace_im".into(), num(v.im)]);
        table.push(vec!["q_profile".into(), format!("{:?}", prof.sequence)]);
        result.insert("partition".into(), json!(pi.labels()));
        result.insert("classes".into(), json!(classes));
        result.insert("inj_trace".into(), complex(v));
        result.insert("q_profile".into(), json!(prof));
    } else if a.dot.is_some() {
        return Err(CliError::usage("--dot needs --partition"));
    }

    let r = full_trace_expect(&letters, w.k, n, &model, !a.no_prune)?;
    table.push(vec!["exact_re".into(), num(r.exact.re)]);
    table.push(vec!["exact_im".into(), num(r.exact.im)]);
    table.push(vec!["partitions_visited".into(), r.partitions_visited.to_string()]);
    table.push(vec!["pruned".into(), r.pruned_count.to_string()]);
    table.push(vec!["bell".into(), bell(letters.len() * w.k).to_string()]);
    result.insert("full_trace".into(), json!(r));

    let rng = if cfg.trials > 0 {
        side_guard(n, w.k)?;
        let seed = cfg.require_seed()?;
        let vals: Vec<Complex64> = (0..cfg.trials as u64)
            .map(|t| {
                let tensor: RandomTensor = sample_tensor_stream(&model, n, w.k, seed, t)?;
                Ok(phi_n(&word_eval(&tensor, &w)?))
            })
            .collect::<Result<_, CliError>>()?;
        let (m, se) = mean_se(&vals);
        passed = (m - r.exact).norm() <= 3.0 * se + cfg.tol;
        table.push(vec!["mc_re".into(), num(m.re)]);
        table.push(vec!["mc_im".into(), num(m.im)]);
        table.push(vec!["mc_stderr".into(), num(se)]);
        result.insert("mc".into(), json!({ "mean": complex(m), "stderr": se }));
        Some(stream_rng(seed))
    } else {
        None
    };
    Ok(Report::new(cfg, rng, passed, serde_json::Value::Object(result), table))
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "S1")]
    pub target: String,
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    /// Pool eigenvalues into a histogram.
    #[arg(long)]
    pub histogram: bool,
    /// Write the histogram as SVG (implies --histogram).
    #[arg(long)]
    pub svg: Option<std::path::PathBuf>,
}

pub fn spectrum(shared: &Shared, a: &SpectrumArgs) -> Result<Report, CliError> {
    let mut cfg = RunConfig::resolve("spectrum", shared, Defaults { k: 2, n: 32, trials: 20, tol: 0.10, seed: None })?;
    let target: Target = a.target.parse()?;
    let hist = a.histogram || a.svg.is_some();
    cfg.params = json!({ "target": target, "n_max": a.n_max, "histogram": hist });
    let side = side_guard(cfg.n, cfg.k)?;
    if hist && side > MAX_EIGEN_SIDE {
        return Err(CliError::usage(format!("histograms need N^k <= {MAX_EIGEN_SIDE}")));
    }
    let seed = cfg.require_seed()?;
    let model = cfg.model();
    let ec = ExperimentConfig {
        model,
        target,
        k: cfg.k,
        n: cfg.n,
        trials: cfg.trials,
        n_max: a.n_max,
        seed,
        histogram: hist,
    };
    let r = run_experiment(&ec)?;
    if let Some(p) = &cfg.dump {
        let t: RandomTensor = sample_tensor_stream(&model, cfg.n, cfg.k, seed, 0)?;
        dump(p, &build_target(&t, target, &model)?)?;
    }
    if let (Some(p), Some(h)) = (&a.svg, &r.histogram) {
        std::fs::write(p, h.to_svg(&format!("{target} k={} N={}", cfg.k, cfg.n)))?;
    }
    let mut passed = true;
    let mut table = Table::new(&["n", "predicted", "empirical", "stderr", "rel_err"]);
    for row in &r.moments {
        let se = row.stderr.unwrap_or(f64::NAN);
        let rel = if row.predicted != 0.0 {
            let rel = row.empirical / row.predicted - 1.0;
            passed &= rel.abs() <= cfg.tol;
            num(rel)
        } else {
            passed &= row.empirical.abs() <= 3.0 * se;
            "-".into()
        };
        table.push(vec![row.n.to_string(), num(row.predicted), num(row.empirical), num(se), rel]);
    }
    if let Some(h) = &r.histogram {
        table.push(vec!["zero_fraction".into(), "-".into(), num(h.zero_fraction), "-".into(), "-".into()]);
    }
    let result = serde_json::to_value(&r).expect("reports serialize");
    Ok(Report::new(cfg, Some(stream_rng(seed)), passed, result, table))
}

#[derive(Args, Debug, Clone)]
pub struct FreenessArgs {
    /// Partition of k for the first character, e.g. `3` or `2,1`.
    #[arg(long)]
    pub rho: Option<String>,
    /// Partition of k for the second character; defaults to the sign.
    #[arg(long)]
    pub rho2: Option<String>,
    /// Left factor b: `delta` (unit at the identity) or a partition of k for a character.
    #[arg(long, default_value = "delta")]
    pub b: String,
}

pub fn freeness(shared: &Shared, a: &FreenessArgs) -> Result<Report, CliError> {
    let mut cfg = RunConfig::resolve("freeness", shared, Defaults { k: 3, n: 0, trials: 0, tol: 1e-12, seed: None })?;
    let k = cfg.k;
    let rho = a.rho.as_deref().map(|s| partition(s, "--rho")).transpose()?.unwrap_or(IntegerPartition::new(vec![k])?);
    let rho2 =
        a.rho2.as_deref().map(|s| partition(s, "--rho2")).transpose()?.unwrap_or(IntegerPartition::new(vec![1; k])?);
    if rho.size() != k || rho2.size() != k {
        return Err(CliError::usage(format!("--rho and --rho2 must be partitions of k = {k}")));
    }
    cfg.params = json!({ "rho": rho.parts(), "rho2": rho2.parts(), "b": a.b });
    let table_b = if a.b == "delta" { None } else { Some(partition(&a.b, "--b")?) };
    let chars = tensor_flattenings::perm::CharacterTable::new(k)?;
    let b = |e: &Permutation| -> Complex64 {
        match &table_b {
            None => Complex64::new(if e.is_identity() { 1.0 } else { 0.0 }, 0.0),
            Some(p) => Complex64::new(chars.eval(p, e).unwrap_or(0) as f64, 0.0),
        }
    };
    let a1 = character_coefficients(&rho, b)?;
    let a2 = character_coefficients(&rho2, b)?;
    let r = freeness_conditions(k, &a1, &a2, cfg.tol)?;
    let mut table = Table::new(&["condition", "holds", "max_residual"]);
    table.push(vec!["cross".into(), r.cross_free.to_string(), num(r.max_cross_residual)]);
    table.push(vec!["scalar_first".into(), r.a_scalar.to_string(), num(r.max_scalar_residual.0)]);
    table.push(vec!["scalar_second".into(), r.a_prime_scalar.to_string(), num(r.max_scalar_residual.1)]);
    let passed = r.cross_free && r.a_scalar && r.a_prime_scalar;
    Ok(Report::new(cfg, None, passed, json!(r), table))
}
