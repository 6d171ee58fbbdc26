//! Scaled-χ² empirical likelihood built from inverse-censoring-weighted
//! scores, with a delete-one jackknife estimate of the scale.

use serde::Serialize;

use crate::el::{chi2_quantile, check_alpha, el_statistic, initial_step, invert_profile, IntervalResult, Method};
use crate::error::{Error, Result};
use crate::functional::{point_estimate_fit, FunctionalSpec, Kind};
use crate::km::KmFit;
use crate::sample::CensoredSample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector {
    /// `V_ni` at `theta`.
    pub v: Vec<f64>,
    /// `V̂_ni` at the point estimate.
    pub v_hat: Vec<f64>,
    pub theta: f64,
}

impl ScoreVector {
    /// `σ₁² = (1/n) Σ (V̂_ni - V̄_n)²`.
    pub fn sigma1_sq(&self) -> f64 {
        let n = self.v_hat.len() as f64;
        let m = self.v_hat.iter().sum::<f64>() / n;
        self.v_hat.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
    }
}

/// `V_ni = ξ(Z_i) δ_i / (1 - G_n(Z_i))` for a score given at each observation.
pub(crate) fn weighted_scores(fit: &KmFit, xi: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; fit.len()];
    for (i, v) in out.iter_mut().enumerate() {
        if !fit.events()[i] {
            continue;
        }
        let gs = fit.g_surv()[i];
        if gs <= 0.0 {
            return Err(Error::DivisionByZero { index: i });
        }
        *v = xi[i] / gs;
    }
    Ok(out)
}

fn scores_at(fit: &KmFit, f: &FunctionalSpec, theta: f64) -> Result<Vec<f64>> {
    let xi: Vec<f64> = fit.times().iter().map(|&t| f.g(t, theta)).collect();
    weighted_scores(fit, &xi)
}

pub fn score_vector(sample: &CensoredSample, f: &FunctionalSpec, theta: f64) -> Result<ScoreVector> {
    let fit = KmFit::new(sample);
    let theta_hat = point_estimate_fit(&fit, f)?;
    Ok(ScoreVector {
        v: scores_at(&fit, f, theta)?,
        v_hat: scores_at(&fit, f, theta_hat)?,
        theta,
    })
}

/// `Σ ξ_j F_n^{(-skip)}{Z_j}` over the sample with one observation removed and
/// every observation at the largest remaining time counted as an event.
fn leave_one_out_integral(times: &[f64], events: &[bool], xi: &[f64], skip: usize) -> Result<f64> {
    let n = times.len();
    let last = if skip == n - 1 { n - 2 } else { n - 1 };
    let t_max = times[last];
    let mut at_risk = (n - 1) as f64;
    let mut surv = 1.0;
    let mut total = 0.0;
    let mut any_event = false;
    let mut i = 0;
    while i < n {
        let t = times[i];
        let (mut d, mut size, mut xs) = (0usize, 0usize, 0.0);
        while i < n && times[i] == t {
            if i != skip {
                size += 1;
                if events[i] || t == t_max {
                    d += 1;
                    xs += xi[i];
                }
            }
            i += 1;
        }
        if size == 0 {
            continue;
        }
        if d > 0 {
            any_event = true;
            let next = surv * (1.0 - d as f64 / at_risk);
            total += xs * (surv - next) / d as f64;
            surv = next;
        }
        at_risk -= size as f64;
    }
    if !any_event {
        return Err(Error::DegenerateSample("leave-one-out sample has no events".into()));
    }
    Ok(total)
}

/// Delete-one jackknife variance of `θ̂ = ∫ g(·, θ̂) dF_n`, recoding the largest
/// observation of each reduced sample as an event.
pub fn jackknife_variance(sample: &CensoredSample, f: &FunctionalSpec) -> Result<f64> {
    let fit = KmFit::new(sample);
    let theta_hat = point_estimate_fit(&fit, f)?;
    jackknife_variance_fit(&fit, f, theta_hat)
}

pub(crate) fn jackknife_variance_fit(fit: &KmFit, f: &FunctionalSpec, theta_hat: f64) -> Result<f64> {
    let n = fit.len();
    if n < 3 {
        return Err(Error::DegenerateSample(format!("jackknife needs n >= 3, got {n}")));
    }
    let xi: Vec<f64> = fit.times().iter().map(|&t| f.g(t, theta_hat)).collect();
    let reps = (0..n)
        .map(|i| leave_one_out_integral(fit.times(), fit.events(), &xi, i))
        .collect::<Result<Vec<f64>>>()?;
    let nf = n as f64;
    let mean = reps.iter().sum::<f64>() / nf;
    let ss: f64 = reps.iter().map(|r| (r - mean).powi(2)).sum();
    Ok((nf - 1.0) / nf * ss)
}

/// `I₂ = {θ : 2 r̂ Σ log(1 + λ V_ni(θ)) <= c_{1-α}}`.
pub fn scaled_interval(sample: &CensoredSample, f: &FunctionalSpec, alpha: f64) -> Result<IntervalResult> {
    scaled_interval_fit(&KmFit::new(sample), f, alpha)
}

pub fn scaled_interval_fit(fit: &KmFit, f: &FunctionalSpec, alpha: f64) -> Result<IntervalResult> {
    check_alpha(alpha)?;
    let theta_hat = point_estimate_fit(fit, f)?;
    let crit = chi2_quantile(1.0 - alpha)?;
    let v_hat = scores_at(fit, f, theta_hat)?;
    let n = v_hat.len() as f64;
    let m = v_hat.iter().sum::<f64>() / n;
    let sigma1_sq = v_hat.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    if !(sigma1_sq > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let jack = jackknife_variance_fit(fit, f, theta_hat)?;
    if !(jack > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let r_hat = sigma1_sq / (n * jack);

    let affine = if f.kind() == Kind::LinearInTheta {
        let (a, b): (Vec<f64>, Vec<f64>) = fit
            .times()
            .iter()
            .map(|&t| f.linear_parts(t).expect("linear kind"))
            .unzip();
        Some((weighted_scores(fit, &a)?, weighted_scores(fit, &b)?))
    } else {
        None
    };
    let scores = |theta: f64| -> Result<Vec<f64>> {
        match &affine {
            Some((va, vb)) => Ok(va.iter().zip(vb).map(|(a, b)| a - theta * b).collect()),
            None => scores_at(fit, f, theta),
        }
    };
    let stat = |theta: f64| Ok(r_hat * el_statistic(&scores(theta)?)?);
    let step0 = initial_step(fit, f, &v_hat);
    let ((lower, lower_diag), (upper, upper_diag)) = invert_profile(&stat, theta_hat, crit, step0)?;
    Ok(IntervalResult {
        lower,
        upper,
        alpha,
        theta_hat,
        method: Method::ScaledEl,
        critical: crit,
        scale: Some(r_hat),
        experimental: f.is_experimental(),
        lower_diag,
        upper_diag,
    })
}
