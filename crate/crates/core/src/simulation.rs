//! Known-truth scenarios and the replicated coverage engine.
//!
//! Every uniform draw is a pure function of `(seed, replication, unit)`, so a
//! study gives bit-identical results under any thread count and samples of
//! different sizes share their leading units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::DistributionSpec;
use crate::el::{confidence_interval_fit, el_statistic, Method};
use crate::error::{Error, Result};
use crate::functional::{point_estimate_fit, Builtin, FunctionalSpec, Kind};
use crate::influence::{influence_values, sample_variance, InfluenceProfile};
use crate::km::KmFit;
use crate::quadrature::Quadrature;
use crate::roots::bisect_secant;
use crate::sample::{CensoredObservation, CensoredSample};
use crate::scaled::{scaled_interval_fit, weighted_scores};

pub const MIN_REPS: usize = 100;
pub const DEFAULT_REPS: usize = 2000;
const THETA0_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub lifetime: DistributionSpec,
    pub censoring: DistributionSpec,
    pub n: usize,
    pub functional: FunctionalSpec,
    pub theta0: f64,
    pub label: String,
}

impl ScenarioSpec {
    /// Builds a scenario, solving `E g(Y, θ₀) = 0` under `lifetime`.
    pub fn new(
        label: impl Into<String>,
        lifetime: DistributionSpec,
        censoring: DistributionSpec,
        n: usize,
        functional: FunctionalSpec,
    ) -> Result<Self> {
        lifetime.validate()?;
        censoring.validate()?;
        if n < 2 {
            return Err(Error::InvalidParameter(format!("sample size {n} < 2")));
        }
        let theta0 = true_theta(&lifetime, &functional)?;
        Ok(Self { lifetime, censoring, n, functional, theta0, label: label.into() })
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }
}

/// Serializable description of a custom study, as accepted on the command line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub label: String,
    pub lifetime: DistributionSpec,
    pub censoring: DistributionSpec,
    pub sizes: Vec<usize>,
    /// Functional descriptor such as `mean` or `mrl:t0=0.9`.
    pub functional: String,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

fn default_alphas() -> Vec<f64> {
    vec![0.05]
}

impl ScenarioConfig {
    pub fn scenarios(&self) -> Result<Vec<ScenarioSpec>> {
        let f: FunctionalSpec = self.functional.parse()?;
        let base = ScenarioSpec::new(self.label.clone(), self.lifetime, self.censoring, 2, f)?;
        if self.sizes.is_empty() {
            return Err(Error::InvalidParameter("no sample sizes given".into()));
        }
        self.sizes
            .iter()
            .map(|&n| {
                if n < 2 {
                    Err(Error::InvalidParameter(format!("sample size {n} < 2")))
                } else {
                    Ok(base.with_n(n))
                }
            })
            .collect()
    }
}

/// `E_F g(Y, θ)` by quadrature.
pub fn expected_score(lifetime: &DistributionSpec, f: &FunctionalSpec, theta: f64) -> Result<f64> {
    let q = Quadrature::new(1e-13, 1e-12);
    let mut breaks = f.breakpoints();
    breaks.push(theta);
    if let DistributionSpec::Weibull { scale, .. } = lifetime {
        breaks.push(*scale);
    }
    let lo = match lifetime {
        DistributionSpec::Uniform { lo, .. } => *lo,
        _ => 0.0,
    };
    let e = q.integrate_range(|x| f.g(x, theta) * lifetime.pdf(x), lo, lifetime.support_upper(), &breaks)?;
    Ok(e.value)
}

fn closed_form_theta(lifetime: &DistributionSpec, f: &FunctionalSpec) -> Option<f64> {
    use statrs::function::gamma::{gamma, gamma_ur};
    match (f.as_builtin()?, *lifetime) {
        (Builtin::Moment { k }, _) if k == 1.0 => Some(lifetime.mean()),
        (Builtin::Survival { y }, _) => Some(lifetime.sf(y)),
        (Builtin::Quantile { p }, _) => Some(lifetime.quantile(p)),
        (Builtin::MeanResidualLife { t0 }, DistributionSpec::Weibull { scale, shape }) => {
            let a = 1.0 / shape;
            let tail = scale / shape * gamma(a) * gamma_ur(a, (t0 / scale).powf(shape));
            Some(tail / lifetime.sf(t0))
        }
        (Builtin::MeanResidualLife { t0 }, DistributionSpec::Exponential { mean }) if t0 >= 0.0 => Some(mean),
        (Builtin::MeanResidualLife { t0 }, DistributionSpec::Uniform { lo, hi }) if t0 < hi => {
            Some(0.5 * (hi - t0.max(lo)) + (lo - t0).max(0.0))
        }
        _ => None,
    }
}

/// `θ₀` for a lifetime distribution: closed form when one is known,
/// quadrature otherwise, checked against the estimating equation.
pub fn true_theta(lifetime: &DistributionSpec, f: &FunctionalSpec) -> Result<f64> {
    let theta = match closed_form_theta(lifetime, f) {
        Some(t) => t,
        None if f.kind() == Kind::LinearInTheta => {
            let q = Quadrature::new(1e-13, 1e-12);
            let hi = lifetime.support_upper();
            let breaks = f.breakpoints();
            let a = q.integrate_range(|x| f.linear_parts(x).unwrap().0 * lifetime.pdf(x), 0.0, hi, &breaks)?;
            let b = q.integrate_range(|x| f.linear_parts(x).unwrap().1 * lifetime.pdf(x), 0.0, hi, &breaks)?;
            if b.value == 0.0 {
                return Err(Error::ZeroDenominator);
            }
            a.value / b.value
        }
        None => {
            let (lo, hi) = f.domain();
            let span = lifetime.quantile(0.999_999).min(1e6);
            let (lo, hi) = (lo.max(-span), hi.min(span));
            bisect_secant(|t| expected_score(lifetime, f, t).unwrap_or(f64::NAN), lo, hi, 1e-12, 1e-12, 200)?
        }
    };
    if f.kind() != Kind::IndicatorQuantile {
        let r = expected_score(lifetime, f, theta)?;
        if r.abs() > THETA0_RESIDUAL {
            return Err(Error::QuadratureFailure { estimate: r, error: THETA0_RESIDUAL });
        }
    }
    Ok(theta)
}

/// `t₀` with `P(Y >= t₀) = p`.
pub fn mrl_threshold(lifetime: &DistributionSpec, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {p} outside (0, 1)")));
    }
    Ok(lifetime.isf(p))
}

/// `P(δ = 0) = ∫ F̄_Y dG`.
pub fn censoring_proportion(spec: &ScenarioSpec) -> Result<f64> {
    censoring_probability(&spec.lifetime, &spec.censoring)
}

pub fn censoring_probability(lifetime: &DistributionSpec, censoring: &DistributionSpec) -> Result<f64> {
    if matches!(censoring, DistributionSpec::Never) {
        return Ok(0.0);
    }
    let q = Quadrature::new(1e-12, 1e-12);
    let mut breaks = vec![lifetime.support_upper()];
    if let DistributionSpec::Uniform { lo, .. } = lifetime {
        breaks.push(*lo);
    }
    if let DistributionSpec::Weibull { scale, .. } = lifetime {
        breaks.push(*scale);
    }
    let lo = match censoring {
        DistributionSpec::Uniform { lo, .. } => *lo,
        _ => 0.0,
    };
    let e = q.integrate_range(|c| lifetime.sf(c) * censoring.pdf(c), lo, censoring.support_upper(), &breaks)?;
    Ok(e.value)
}

fn unit_uniforms(rng: &mut ChaCha8Rng, unit: u64) -> (f64, f64) {
    // Two u64 draws per unit, i.e. four 32-bit words.
    rng.set_word_pos(u128::from(unit) * 4);
    (rng.random::<f64>(), rng.random::<f64>())
}

/// Replication `rep` of a scenario under master `seed`.
pub fn sample_replicate(spec: &ScenarioSpec, seed: u64, rep: u64) -> CensoredSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let obs = (0..spec.n as u64)
        .map(|unit| {
            let (u, v) = unit_uniforms(&mut rng, unit);
            let y = spec.lifetime.sample_from_uniform(u);
            let c = spec.censoring.sample_from_uniform(v);
            CensoredObservation::new(y.min(c), y <= c)
        })
        .collect();
    // A replicate with no events is retried on a later stream slot.
    CensoredSample::new(obs).unwrap_or_else(|_| sample_replicate(spec, seed, rep.wrapping_add(1 << 63)))
}

pub fn sample_scenario(spec: &ScenarioSpec, seed: u64) -> CensoredSample {
    sample_replicate(spec, seed, 0)
}

/// Runs `job` on a pool capped by `ELCI_THREADS` when set.
pub fn with_thread_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    let threads = threads.or_else(|| std::env::var("ELCI_THREADS").ok().and_then(|v| v.parse().ok()));
    match threads {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(job),
        _ => job(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub scenario: String,
    pub n: usize,
    pub alpha: f64,
    pub method: Method,
    pub coverage: f64,
    pub avg_width: f64,
    pub s_w2: f64,
    pub s_v2: f64,
    pub censored: f64,
    pub reps: usize,
    pub seed: u64,
    pub failures: usize,
    pub unbounded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn find(&self, scenario: &str, n: usize, alpha: f64, method: Method) -> Option<&CoverageRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.n == n && r.alpha == alpha && r.method == method)
    }
}

#[derive(Default)]
struct RepOutcome {
    /// Per (alpha, method): `None` on failure, else (covered, width).
    intervals: Vec<Option<(bool, f64)>>,
    variances: Option<(f64, f64)>,
    censored: f64,
}

/// Sample variances of `Ŵ` and `V̂` at the point estimate.
pub(crate) fn score_variances(fit: &KmFit, f: &FunctionalSpec) -> Result<(f64, f64)> {
    let theta_hat = point_estimate_fit(fit, f)?;
    let xi: Vec<f64> = fit.times().iter().map(|&t| f.g(t, theta_hat)).collect();
    let w = influence_values(fit, &xi)?;
    let v = weighted_scores(fit, &xi)?;
    Ok((sample_variance(&w), sample_variance(&v)))
}

fn run_replicate(spec: &ScenarioSpec, cells: &[(f64, Method)], seed: u64, rep: u64) -> RepOutcome {
    let sample = sample_replicate(spec, seed, rep);
    let fit = KmFit::new(&sample);
    let intervals = cells
        .iter()
        .map(|&(alpha, method)| {
            let ci = match method {
                Method::ElChi2 => confidence_interval_fit(&fit, &spec.functional, alpha),
                Method::ScaledEl => scaled_interval_fit(&fit, &spec.functional, alpha),
            };
            ci.ok().map(|ci| (ci.contains(spec.theta0), ci.width()))
        })
        .collect();
    RepOutcome {
        intervals,
        variances: score_variances(&fit, &spec.functional).ok(),
        censored: sample.censored_fraction(),
    }
}

/// Coverage and width of the requested intervals over `reps` replications of each scenario.
///
/// Replications whose point estimate or interval fails are tallied in
/// `failures` and excluded from that cell's coverage and width.
pub fn run_coverage_study(
    specs: &[ScenarioSpec],
    alphas: &[f64],
    methods: &[Method],
    reps: usize,
    seed: u64,
) -> Result<CoverageReport> {
    run_coverage_study_with_threads(specs, alphas, methods, reps, seed, None)
}

pub fn run_coverage_study_with_threads(
    specs: &[ScenarioSpec],
    alphas: &[f64],
    methods: &[Method],
    reps: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<CoverageReport> {
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!("reps must be >= {MIN_REPS}, got {reps}")));
    }
    for &a in alphas {
        crate::el::check_alpha(a)?;
    }
    let cells: Vec<(f64, Method)> = alphas
        .iter()
        .flat_map(|&a| methods.iter().map(move |&m| (a, m)))
        .collect();
    let mut rows = Vec::new();
    for spec in specs {
        let outcomes: Vec<RepOutcome> = with_thread_pool(threads, || {
            (0..reps as u64)
                .into_par_iter()
                .map(|rep| run_replicate(spec, &cells, seed, rep))
                .collect()
        });
        let (mut sw, mut sv, mut nv) = (0.0, 0.0, 0usize);
        let mut censored = 0.0;
        for o in &outcomes {
            censored += o.censored;
            if let Some((w, v)) = o.variances {
                sw += w;
                sv += v;
                nv += 1;
            }
        }
        let nv = nv.max(1) as f64;
        for (k, &(alpha, method)) in cells.iter().enumerate() {
            let (mut covered, mut ok, mut width, mut finite, mut unbounded) = (0usize, 0usize, 0.0, 0usize, 0usize);
            for o in &outcomes {
                if let Some((c, w)) = o.intervals[k] {
                    ok += 1;
                    covered += c as usize;
                    if w.is_finite() {
                        width += w;
                        finite += 1;
                    } else {
                        unbounded += 1;
                    }
                }
            }
            rows.push(CoverageRow {
                scenario: spec.label.clone(),
                n: spec.n,
                alpha,
                method,
                coverage: if ok > 0 { covered as f64 / ok as f64 } else { 0.0 },
                avg_width: if finite > 0 { width / finite as f64 } else { f64::INFINITY },
                s_w2: sw / nv,
                s_v2: sv / nv,
                censored: censored / reps as f64,
                reps,
                seed,
                failures: reps - ok,
                unbounded,
            });
        }
    }
    Ok(CoverageReport { reps, seed, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceComparison {
    pub s_w2: f64,
    pub s_v2: f64,
    /// Share of replications with `s_W²(j) < s_V²(j)`.
    pub w_smaller: f64,
    pub failures: usize,
}

/// Replication averages of the per-sample variances of `Ŵ` and `V̂`.
pub fn variance_comparison(spec: &ScenarioSpec, reps: usize, seed: u64) -> Result<VarianceComparison> {
    variance_comparison_with_threads(spec, reps, seed, None)
}

pub fn variance_comparison_with_threads(
    spec: &ScenarioSpec,
    reps: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<VarianceComparison> {
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!("reps must be >= {MIN_REPS}, got {reps}")));
    }
    let per_rep: Vec<Option<(f64, f64)>> = with_thread_pool(threads, || {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| score_variances(&KmFit::new(&sample_replicate(spec, seed, rep)), &spec.functional).ok())
            .collect()
    });
    let (mut sw, mut sv, mut less, mut ok) = (0.0, 0.0, 0usize, 0usize);
    for (w, v) in per_rep.iter().flatten() {
        sw += w;
        sv += v;
        less += (w < v) as usize;
        ok += 1;
    }
    if ok == 0 {
        return Err(Error::DegenerateSample("every replication failed".into()));
    }
    let k = ok as f64;
    Ok(VarianceComparison { s_w2: sw / k, s_v2: sv / k, w_smaller: less as f64 / k, failures: reps - ok })
}

/// `l(θ₀)` for each replication; infeasible replications give `+∞`.
pub fn statistic_at_truth(spec: &ScenarioSpec, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let out: Vec<Result<f64>> = with_thread_pool(None, || {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let fit = KmFit::new(&sample_replicate(spec, seed, rep));
                let prof = InfluenceProfile::new(&fit, &spec.functional)?;
                el_statistic(&prof.at(spec.theta0)?)
            })
            .collect()
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(c: f64, n: usize) -> ScenarioSpec {
        ScenarioSpec::new(
            "u",
            DistributionSpec::uniform(0.0, 1.0),
            DistributionSpec::uniform(0.0, c),
            n,
            FunctionalSpec::mean(),
        )
        .unwrap()
    }

    #[test]
    fn theta0_closed_forms() {
        assert!((uniform(2.5, 10).theta0 - 0.5).abs() < 1e-15);
        let w = DistributionSpec::weibull(1.0, 10.0);
        let t = true_theta(&w, &FunctionalSpec::mean()).unwrap();
        assert!((t - 0.951_350_769_866_873_2).abs() < 1e-12);
        let t0 = mrl_threshold(&w, 0.5).unwrap();
        let f = FunctionalSpec::builtin(Builtin::MeanResidualLife { t0 }).unwrap();
        let closed = true_theta(&w, &f).unwrap();
        assert!(expected_score(&w, &f, closed).unwrap().abs() < 1e-10);
    }

    #[test]
    fn theta0_by_quadrature_for_linear() {
        let f = FunctionalSpec::linear("second", |x| x * x, |_| 1.0);
        let t = true_theta(&DistributionSpec::uniform(0.0, 1.0), &f).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        let w = DistributionSpec::weibull(1.0, 10.0);
        assert!((mrl_threshold(&w, 0.5).unwrap() - 0.964_012_235_467_789_7).abs() < 1e-12);
        assert!((mrl_threshold(&w, 0.9).unwrap() - 0.798_486_887_616_428_7).abs() < 1e-12);
        assert!(mrl_threshold(&w, 1.0 - 1e-12).unwrap() < 0.1);
        assert!(mrl_threshold(&w, 1.0).is_err());
    }

    #[test]
    fn censoring_probabilities() {
        assert!((censoring_proportion(&uniform(2.5, 10)).unwrap() - 0.2).abs() < 1e-10);
        assert!((censoring_proportion(&uniform(1.3, 10)).unwrap() - 1.0 / 2.6).abs() < 1e-10);
        let e = DistributionSpec::exponential(1.0);
        assert!((censoring_probability(&e, &e).unwrap() - 0.5).abs() < 1e-10);
        let w = DistributionSpec::weibull(1.0, 10.0);
        let p = censoring_probability(&w, &DistributionSpec::exponential(4.3)).unwrap();
        assert!((p - 0.198_194).abs() < 1e-5, "{p}");
    }

    #[test]
    fn replicates_are_deterministic_and_nested() {
        let s80 = uniform(2.5, 80);
        let a = sample_replicate(&s80, 7, 3);
        assert_eq!(a, sample_replicate(&s80, 7, 3));
        assert_ne!(a, sample_replicate(&s80, 7, 4));
        let small: Vec<_> = sample_replicate(&s80.with_n(20), 7, 3).observations().to_vec();
        for o in &small {
            assert!(a.observations().contains(o));
        }
    }

    #[test]
    fn too_few_reps_rejected() {
        let r = run_coverage_study(&[uniform(2.5, 20)], &[0.05], &[Method::ElChi2], 10, 1);
        assert!(r.is_err());
    }

    #[test]
    fn no_censoring_variances_agree() {
        let spec = ScenarioSpec::new(
            "full",
            DistributionSpec::uniform(0.0, 1.0),
            DistributionSpec::Never,
            30,
            FunctionalSpec::mean(),
        )
        .unwrap();
        for rep in 0..20 {
            let fit = KmFit::new(&sample_replicate(&spec, 11, rep));
            let (w, v) = score_variances(&fit, &spec.functional).unwrap();
            assert!((w - v).abs() < 1e-14);
        }
    }
}
