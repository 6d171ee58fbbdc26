//! Empirical likelihood for a scalar mean constraint, its χ²₁ calibration,
//! and inversion of the profile into a confidence interval.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{point_estimate_fit, FunctionalSpec, Kind};
use crate::influence::InfluenceProfile;
use crate::km::KmFit;
use crate::sample::CensoredSample;

/// Solution of `(1/n) Σ w_i / (1 + λ w_i) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ELDiagnostics {
    pub lambda: f64,
    /// `(-1 / max w, -1 / min w)`: the set where every `1 + λ w_i > 0`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|h(λ)|` at the returned multiplier.
    pub score_residual: f64,
}

impl ELDiagnostics {
    /// Multinomial weights `p_i = (1/n) / (1 + λ w_i)`.
    pub fn weights(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len() as f64;
        w.iter().map(|&v| 1.0 / (n * (1.0 + self.lambda * v))).collect()
    }

    /// `-2 log R = 2 Σ log(1 + λ w_i)`.
    pub fn log_ratio(&self, w: &[f64]) -> f64 {
        let s: f64 = w.iter().map(|&v| (self.lambda * v).ln_1p()).sum();
        (2.0 * s).max(0.0)
    }
}

const LAMBDA_MAX_ITER: usize = 100;
// Σp_i - 1 = -λ·h(λ), so the stopping rule scales with 1/|λ|.
const LAMBDA_TOL: f64 = 1e-13;

/// `(h, h', mean |w_i / (1 + λ w_i)|)`; the last term sizes the roundoff in `h`.
fn lambda_score(w: &[f64], lambda: f64) -> (f64, f64, f64) {
    let n = w.len() as f64;
    let (mut h, mut dh, mut habs) = (0.0, 0.0, 0.0);
    for &v in w {
        let r = v / (1.0 + lambda * v);
        h += r;
        dh -= r * r;
        habs += r.abs();
    }
    (h / n, dh / n, habs / n)
}

/// Lagrange multiplier of the empirical likelihood with constraint `Σ p_i w_i = 0`.
///
/// Safeguarded Newton from `λ = 0` inside the open bracket on which `h` is
/// strictly decreasing; steps leaving the current enclosure are replaced by
/// bisection.
pub fn solve_lambda(w: &[f64]) -> Result<ELDiagnostics> {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    if w.is_empty() || !max.is_finite() || !min.is_finite() {
        return Err(Error::InvalidParameter("influence values must be finite".into()));
    }
    if max == 0.0 && min == 0.0 {
        return Ok(ELDiagnostics {
            lambda: 0.0,
            bracket: (f64::NEG_INFINITY, f64::INFINITY),
            iterations: 0,
            score_residual: 0.0,
        });
    }
    if max <= 0.0 || min >= 0.0 {
        return Err(Error::InfeasibleConstraint);
    }
    let bracket = (-1.0 / max, -1.0 / min);
    let (mut lo, mut hi) = bracket;
    let mut lambda = 0.0;
    let mut iterations = 0;
    loop {
        let (h, dh, habs) = lambda_score(w, lambda);
        let tol = (LAMBDA_TOL / (1.0 + lambda.abs())).max(16.0 * f64::EPSILON * habs);
        if h.abs() <= tol {
            return Ok(ELDiagnostics { lambda, bracket, iterations, score_residual: h.abs() });
        }
        if h > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        // Enclosure exhausted at floating-point resolution.
        if hi - lo <= 2.0 * f64::EPSILON * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(ELDiagnostics { lambda, bracket, iterations, score_residual: h.abs() });
        }
        if iterations >= LAMBDA_MAX_ITER {
            return Err(Error::NoConvergence(LAMBDA_MAX_ITER));
        }
        iterations += 1;
        let newton = lambda - h / dh;
        lambda = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
}

/// `-2 log R` for a vector of constraint values; `+∞` outside the convex hull.
pub fn el_statistic(w: &[f64]) -> Result<f64> {
    match solve_lambda(w) {
        Ok(d) => Ok(d.log_ratio(w)),
        Err(Error::InfeasibleConstraint) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `l(θ) = -2 log R(θ)` built from the estimated influence values at `θ`.
pub fn log_el_ratio(sample: &CensoredSample, f: &FunctionalSpec, theta: f64) -> Result<f64> {
    let fit = KmFit::new(sample);
    let prof = InfluenceProfile::new(&fit, f)?;
    el_statistic(&prof.at(theta)?)
}

/// Standard normal quantile (Wichura, AS241), accurate to about 1e-16.
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r
                + 67265.770_927_008_7)
                * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((r * 5226.495_278_852_545_5 + 28729.085_735_721_943) * r
                + 39307.895_800_092_71)
                * r
                + 21213.794_301_586_597)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        (((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// The `p` quantile of χ²₁, as the square of the normal quantile of `(1 + p) / 2`.
pub fn chi2_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {p} outside (0, 1)")));
    }
    let z = normal_quantile(0.5 + 0.5 * p);
    Ok(z * z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Influence-function empirical likelihood with standard χ²₁ calibration.
    ElChi2,
    /// Inverse-censoring-weighted scores with an estimated χ² scale.
    ScaledEl,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::ElChi2 => "el",
            Method::ScaledEl => "scaled",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// How one endpoint of an interval was located.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct EndpointDiagnostics {
    /// Profile statistic at the returned endpoint.
    pub statistic: f64,
    pub evaluations: usize,
    /// The endpoint sits on the feasibility boundary, not on a crossing of the critical value.
    pub truncated_at_hull: bool,
    /// The statistic decreased somewhere along the expansion.
    pub non_monotone: bool,
    /// No crossing was found; the endpoint is infinite.
    pub unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalResult {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub theta_hat: f64,
    pub method: Method,
    /// Threshold the statistic is compared with.
    pub critical: f64,
    /// Estimated χ² scale `r̂` (scaled method only).
    pub scale: Option<f64>,
    pub experimental: bool,
    pub lower_diag: EndpointDiagnostics,
    pub upper_diag: EndpointDiagnostics,
}

impl IntervalResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (side, d) in [("lower", &self.lower_diag), ("upper", &self.upper_diag)] {
            if d.truncated_at_hull {
                out.push(format!("{side} endpoint truncated at feasibility boundary"));
            }
            if d.non_monotone {
                out.push(format!("{side} profile non-monotone; outermost crossing kept"));
            }
            if d.unbounded {
                out.push(format!("{side} endpoint unbounded"));
            }
        }
        if self.experimental {
            out.push("experimental functional: no calibration guarantee".into());
        }
        out
    }
}

const MAX_EXPANSIONS: usize = 60;
const OVERSHOOT_PROBES: usize = 2;

/// Finds `{θ : stat(θ) <= crit}` around `theta_hat` along both directions.
pub(crate) fn invert_profile(
    stat: &impl Fn(f64) -> Result<f64>,
    theta_hat: f64,
    crit: f64,
    step0: f64,
) -> Result<((f64, EndpointDiagnostics), (f64, EndpointDiagnostics))> {
    let xtol = 1e-8 * (1.0 + theta_hat.abs());
    let base = stat(theta_hat)?;
    let lower = invert_side(stat, theta_hat, base, crit, step0, -1.0, xtol)?;
    let upper = invert_side(stat, theta_hat, base, crit, step0, 1.0, xtol)?;
    Ok((lower, upper))
}

fn invert_side(
    stat: &impl Fn(f64) -> Result<f64>,
    theta_hat: f64,
    base: f64,
    crit: f64,
    step0: f64,
    dir: f64,
    xtol: f64,
) -> Result<(f64, EndpointDiagnostics)> {
    let mut diag = EndpointDiagnostics::default();
    let mut evals = 1usize;
    let mut inside = theta_hat;
    let mut inside_val = base;
    let mut step = step0;
    let mut outside: Option<(f64, f64)> = None;

    let mut k = 0;
    while k < MAX_EXPANSIONS {
        let theta = theta_hat + dir * step;
        let v = stat(theta)?;
        evals += 1;
        if v <= crit {
            if v < inside_val - 1e-9 * (1.0 + inside_val) {
                diag.non_monotone = true;
            }
            inside = theta;
            inside_val = v;
            step *= 2.0;
            k += 1;
            continue;
        }
        // Crossing found; look a little further for a re-entry below `crit`.
        let mut reentered = false;
        let mut probe_step = step;
        for _ in 0..OVERSHOOT_PROBES {
            probe_step *= 2.0;
            let p = theta_hat + dir * probe_step;
            let pv = stat(p)?;
            evals += 1;
            if pv <= crit {
                diag.non_monotone = true;
                inside = p;
                inside_val = pv;
                step = probe_step * 2.0;
                reentered = true;
                break;
            }
        }
        if reentered {
            k += 1;
            continue;
        }
        outside = Some((theta, v));
        break;
    }

    let Some((mut out_theta, mut out_val)) = outside else {
        diag.unbounded = true;
        diag.statistic = inside_val;
        diag.evaluations = evals;
        return Ok((dir * f64::INFINITY, diag));
    };

    while (out_theta - inside).abs() > xtol {
        let mid = 0.5 * (inside + out_theta);
        if mid == inside || mid == out_theta {
            break;
        }
        let v = stat(mid)?;
        evals += 1;
        if v <= crit {
            inside = mid;
            inside_val = v;
        } else {
            out_theta = mid;
            out_val = v;
        }
    }
    diag.truncated_at_hull = out_val.is_infinite();
    diag.statistic = inside_val;
    diag.evaluations = evals;
    Ok((inside, diag))
}

/// Initial expansion step: a standard error for linear scores, a spread-based
/// scale otherwise.
pub(crate) fn initial_step(fit: &KmFit, f: &FunctionalSpec, w_at_hat: &[f64]) -> f64 {
    let n = fit.len() as f64;
    let times = fit.times();
    let spread = (times[times.len() - 1] - times[0]).max(times[times.len() - 1].abs() * 1e-3);
    let fallback = if spread > 0.0 { 0.5 * spread / n.sqrt() } else { 1.0 / n.sqrt() };
    if f.kind() != Kind::LinearInTheta {
        return fallback;
    }
    let slope: f64 = times
        .iter()
        .zip(fit.event_mass())
        .map(|(&t, &m)| if m != 0.0 { f.linear_parts(t).unwrap().1 * m } else { 0.0 })
        .sum();
    let ms = w_at_hat.iter().map(|w| w * w).sum::<f64>() / n;
    let se = (ms / n).sqrt() / slope.abs();
    if se.is_finite() && se > 0.0 {
        se
    } else {
        fallback
    }
}

/// The interval `{θ : l(θ) <= c_{1-α}}`.
pub fn confidence_interval(sample: &CensoredSample, f: &FunctionalSpec, alpha: f64) -> Result<IntervalResult> {
    confidence_interval_fit(&KmFit::new(sample), f, alpha)
}

pub fn confidence_interval_fit(fit: &KmFit, f: &FunctionalSpec, alpha: f64) -> Result<IntervalResult> {
    check_alpha(alpha)?;
    let theta_hat = point_estimate_fit(fit, f)?;
    let crit = chi2_quantile(1.0 - alpha)?;
    let prof = InfluenceProfile::new(fit, f)?;
    let step0 = initial_step(fit, f, &prof.at(theta_hat)?);
    let stat = |theta: f64| el_statistic(&prof.at(theta)?);
    let ((lower, lower_diag), (upper, upper_diag)) = invert_profile(&stat, theta_hat, crit, step0)?;
    Ok(IntervalResult {
        lower,
        upper,
        alpha,
        theta_hat,
        method: Method::ElChi2,
        critical: crit,
        scale: None,
        experimental: f.is_experimental(),
        lower_diag,
        upper_diag,
    })
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 0.5]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::CensoredObservation;

    fn sample(pairs: &[(f64, u8)]) -> CensoredSample {
        CensoredSample::new(
            pairs
                .iter()
                .map(|&(t, e)| CensoredObservation::new(t, e == 1))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lambda_zero_mean() {
        let d = solve_lambda(&[-4.0 / 3.0, 1.0 / 3.0, 1.0]).unwrap();
        assert!(d.lambda.abs() < 1e-15);
    }

    #[test]
    fn lambda_two_point() {
        let w = [-1.0, 2.0];
        let d = solve_lambda(&w).unwrap();
        assert!((d.lambda - 0.25).abs() < 1e-13);
        assert_eq!(d.bracket, (-0.5, 1.0));
        let l = d.log_ratio(&w);
        assert!((l - 2.0 * (9.0f64 / 8.0).ln()).abs() < 1e-13);
        assert!((l - 0.235_566_071_312_766_4).abs() < 1e-12);
    }

    #[test]
    fn lambda_one_signed() {
        assert!(matches!(solve_lambda(&[1.0, 2.0, 3.0]), Err(Error::InfeasibleConstraint)));
        assert!(matches!(solve_lambda(&[0.0, 2.0, 3.0]), Err(Error::InfeasibleConstraint)));
        assert!(matches!(solve_lambda(&[-1.0, 0.0]), Err(Error::InfeasibleConstraint)));
        assert_eq!(el_statistic(&[1.0, 2.0]).unwrap(), f64::INFINITY);
        assert_eq!(solve_lambda(&[0.0, 0.0]).unwrap().lambda, 0.0);
    }

    #[test]
    fn lambda_near_bracket_edge() {
        // Mean far from zero pushes λ against -1/max.
        let w = [-1e-3, 5.0, 6.0, 7.0];
        let d = solve_lambda(&w).unwrap();
        assert!(d.lambda > d.bracket.0 && d.lambda < d.bracket.1);
        let p = d.weights(&w);
        // Σ p_i = 1 - λ Σ p_i w_i, so the residual is amplified by λ.
        let tol = 1e-12 * (1.0 + d.lambda.abs());
        assert!(p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs() <= tol);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= tol * (1.0 + d.lambda.abs()));
    }

    #[test]
    fn chi2_known_values() {
        assert!((chi2_quantile(0.90).unwrap() - 2.705_543_454_095_404).abs() < 1e-10);
        assert!((chi2_quantile(0.95).unwrap() - 3.841_458_820_694_124).abs() < 1e-10);
        assert!(chi2_quantile(1e-12).unwrap() < 1e-20);
        assert!(chi2_quantile(0.0).is_err());
        assert!(chi2_quantile(1.0).is_err());
    }

    #[test]
    fn normal_quantile_values() {
        assert!((normal_quantile(0.95) - 1.644_853_626_951_472_2).abs() < 1e-14);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn chi2_quantile_matches_statrs() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let chi = ChiSquared::new(1.0).unwrap();
        for p in [0.01, 0.1, 0.5, 0.8, 0.9, 0.95, 0.99, 0.999] {
            let ours = chi2_quantile(p).unwrap();
            assert!((chi.cdf(ours) - p).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn statistic_zero_at_estimate() {
        let s = sample(&[(0.3, 1), (0.5, 0), (0.9, 1), (1.4, 0), (2.2, 1), (2.5, 1)]);
        let f = FunctionalSpec::mean();
        let t = crate::functional::point_estimate(&s, &f).unwrap();
        assert!(log_el_ratio(&s, &f, t).unwrap() < 1e-20);
    }

    #[test]
    fn interval_contains_estimate_and_hits_critical() {
        let s = sample(&[(0.3, 1), (0.5, 0), (0.9, 1), (1.4, 0), (2.2, 1), (2.5, 1), (0.7, 1), (1.8, 0), (1.1, 1)]);
        let f = FunctionalSpec::mean();
        let ci = confidence_interval(&s, &f, 0.1).unwrap();
        assert!(ci.lower < ci.theta_hat && ci.theta_hat < ci.upper);
        for (x, d) in [(ci.lower, ci.lower_diag), (ci.upper, ci.upper_diag)] {
            if !d.truncated_at_hull {
                let l = log_el_ratio(&s, &f, x).unwrap();
                assert!((l - ci.critical).abs() < 1e-5, "{l}");
            }
        }
    }

    #[test]
    fn alpha_domain() {
        let s = sample(&[(0.3, 1), (0.5, 0), (0.9, 1)]);
        assert!(confidence_interval(&s, &FunctionalSpec::mean(), 0.0).is_err());
        assert!(confidence_interval(&s, &FunctionalSpec::mean(), 0.6).is_err());
    }

    #[test]
    fn invert_quadratic_profile() {
        let stat = |t: f64| Ok(t * t);
        let ((lo, dl), (hi, dh)) = invert_profile(&stat, 0.0, 4.0, 0.1).unwrap();
        assert!((lo + 2.0).abs() < 1e-7 && (hi - 2.0).abs() < 1e-7);
        assert!(!dl.non_monotone && !dh.truncated_at_hull);
    }

    #[test]
    fn invert_truncates_at_hull() {
        let stat = |t: f64| Ok(if t.abs() > 1.0 { f64::INFINITY } else { t * t });
        let ((lo, dl), (hi, dh)) = invert_profile(&stat, 0.0, 4.0, 0.1).unwrap();
        assert!((lo + 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7);
        assert!(dl.truncated_at_hull && dh.truncated_at_hull);
    }

    #[test]
    fn invert_keeps_outermost_crossing() {
        // Bump above 4 on (0.75, 0.85), then below again until |t| = 2.
        let stat = |t: f64| Ok(if t > 0.75 && t < 0.85 { 5.0 } else { t * t });
        let (_, (hi, dh)) = invert_profile(&stat, 0.0, 4.0, 0.1).unwrap();
        assert!(dh.non_monotone);
        assert!((hi - 2.0).abs() < 1e-7, "{hi}");
    }

    #[test]
    fn invert_unbounded() {
        let stat = |t: f64| Ok(1.0 - (-t * t).exp());
        let ((lo, dl), (hi, _)) = invert_profile(&stat, 0.0, 2.0, 0.1).unwrap();
        assert!(lo == f64::NEG_INFINITY && hi == f64::INFINITY && dl.unbounded);
    }
}
