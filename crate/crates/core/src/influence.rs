//! Influence functions of the Kaplan-Meier integral `μ_n = ∫ ξ dF_n`.
//!
//! [`w_hat`] computes the estimated influence values `W_ni` from data alone:
//!
//! ```text
//! W_ni = ξ(Z_i) δ_i / Ḡ_n(Z_i-)
//!      + (1 - δ_i) ψ_n(Z_i) / H̄_n(Z_i-)
//!      - (1/n) Σ_j ψ_n(Z_j) I[Z_i >= Z_j] (1 - δ_j) / H̄_n(Z_j-)²
//! ```
//!
//! with `ψ_n(x) = ∫_{s >= x} ξ dF_n`. Their average equals `μ_n` exactly,
//! which is what makes the empirical likelihood of the `W_ni` self-calibrating.
//!
//! [`w_true`] and [`asymptotic_variance`] evaluate the population versions by
//! quadrature against known lifetime and censoring distributions. They exist
//! to check the estimators, not to be used on real data.

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::functional::{FunctionalSpec, Kind};
use crate::km::KmFit;
use crate::quadrature::Quadrature;
use crate::sample::CensoredSample;

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceVector {
    pub w: Vec<f64>,
    pub theta: f64,
}

impl InfluenceVector {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn mean(&self) -> f64 {
        self.w.iter().sum::<f64>() / self.w.len() as f64
    }

    /// Unbiased sample variance.
    pub fn sample_variance(&self) -> f64 {
        sample_variance(&self.w)
    }

    /// `(1/n) Σ W_i²`.
    pub fn mean_square(&self) -> f64 {
        self.w.iter().map(|w| w * w).sum::<f64>() / self.w.len() as f64
    }
}

pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
}

/// Estimated influence values for `ξ` given at each observation of `fit`.
pub fn influence_values(fit: &KmFit, xi: &[f64]) -> Result<Vec<f64>> {
    let n = fit.len();
    let nf = n as f64;
    let psi = fit.tail_sums(xi);
    let events = fit.events();
    let h_left = fit.h_surv_left();
    let g_left = fit.g_surv_left();
    let starts = fit.group_start();

    let mut w = vec![0.0; n];
    let mut compensator = 0.0;
    let mut i = 0;
    while i < n {
        let start = starts[i];
        let mut end = i;
        while end < n && starts[end] == start {
            end += 1;
        }
        // I[Z_i >= Z_j] includes every censoring tied with Z_i.
        for j in start..end {
            if !events[j] {
                compensator += psi[j] / (h_left[j] * h_left[j] * nf);
            }
        }
        for j in start..end {
            let lead = if events[j] {
                if g_left[j] <= 0.0 {
                    return Err(Error::DivisionByZero { index: j });
                }
                xi[j] / g_left[j]
            } else {
                psi[j] / h_left[j]
            };
            w[j] = lead - compensator;
        }
        i = end;
    }
    Ok(w)
}

pub fn w_hat(sample: &CensoredSample, f: &FunctionalSpec, theta: f64) -> Result<InfluenceVector> {
    let fit = KmFit::new(sample);
    let xi: Vec<f64> = fit.times().iter().map(|&t| f.g(t, theta)).collect();
    Ok(InfluenceVector {
        w: influence_values(&fit, &xi)?,
        theta,
    })
}

/// `θ ↦ (W_n1(θ), …, W_nn(θ))` for one sample.
///
/// For scores linear in `θ` the map is affine, `W(θ) = W[a] - θ W[b]`, and is
/// evaluated from two precomputed vectors.
pub struct InfluenceProfile<'a> {
    fit: &'a KmFit,
    f: &'a FunctionalSpec,
    affine: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a> InfluenceProfile<'a> {
    pub fn new(fit: &'a KmFit, f: &'a FunctionalSpec) -> Result<Self> {
        let affine = if f.kind() == Kind::LinearInTheta {
            let (a, b): (Vec<f64>, Vec<f64>) = fit
                .times()
                .iter()
                .map(|&t| f.linear_parts(t).expect("linear kind"))
                .unzip();
            Some((influence_values(fit, &a)?, influence_values(fit, &b)?))
        } else {
            None
        };
        Ok(Self { fit, f, affine })
    }

    pub fn at(&self, theta: f64) -> Result<Vec<f64>> {
        match &self.affine {
            Some((wa, wb)) => Ok(wa.iter().zip(wb).map(|(a, b)| a - theta * b).collect()),
            None => {
                let xi: Vec<f64> = self.fit.times().iter().map(|&t| self.f.g(t, theta)).collect();
                influence_values(self.fit, &xi)
            }
        }
    }
}

/// The known-truth model: lifetime `F`, censoring `G`, and a fixed score `ξ`.
pub struct Truth<'a> {
    pub lifetime: DistributionSpec,
    pub censoring: DistributionSpec,
    xi: Box<dyn Fn(f64) -> f64 + 'a>,
    breaks: Vec<f64>,
    quad: Quadrature,
}

impl<'a> Truth<'a> {
    pub fn new(
        f: &'a FunctionalSpec,
        theta: f64,
        lifetime: DistributionSpec,
        censoring: DistributionSpec,
    ) -> Result<Self> {
        lifetime.validate()?;
        censoring.validate()?;
        let mut breaks = f.breakpoints();
        if f.kind() == Kind::IndicatorQuantile {
            breaks.push(theta);
        }
        for d in [lifetime, censoring] {
            if d.support_upper().is_finite() {
                breaks.push(d.support_upper());
            } else if d != DistributionSpec::Never {
                // Anchor points where the bulk and the far tail live.
                breaks.push(d.quantile(0.5));
                breaks.push(d.isf(1e-6));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(Self {
            lifetime,
            censoring,
            xi: Box::new(f.xi(theta)),
            breaks,
            quad: Quadrature::new(1e-13, 1e-12),
        })
    }

    pub fn xi(&self, x: f64) -> f64 {
        (self.xi)(x)
    }

    /// `b_H = min(b_F, b_G)`.
    pub fn upper(&self) -> f64 {
        self.lifetime.support_upper().min(self.censoring.support_upper())
    }

    fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        Ok(self.quad.integrate_range(f, a, b, &self.breaks)?.value)
    }

    /// `μ = ∫ ξ dF`.
    pub fn mu(&self) -> Result<f64> {
        self.integrate(|x| self.xi(x) * self.lifetime.pdf(x), 0.0, self.lifetime.support_upper())
    }

    /// `ψ(s) = ∫_{x >= s} ξ dF`.
    pub fn psi(&self, s: f64) -> Result<f64> {
        let b = self.lifetime.support_upper();
        if s >= b {
            return Ok(0.0);
        }
        self.integrate(|x| self.xi(x) * self.lifetime.pdf(x), s.max(0.0), b)
    }

    /// True influence values `W_i` at every observation of `sample`.
    ///
    /// The compensator `∫_0^{Z_i} ψ(s) / H̄(s)² dH⁰(s)` is accumulated panel by
    /// panel over the sorted times, so a sample costs one pass of quadrature.
    pub fn influence(&self, sample: &CensoredSample) -> Result<Vec<f64>> {
        let mu = self.mu()?;
        let obs = sample.observations();
        let mut grid: Vec<f64> = obs.iter().map(|o| o.time).collect();
        grid.extend(self.breaks.iter().copied().filter(|&b| b.is_finite() && b < sample.max_time()));
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        // ψ at grid points, accumulated from the top down.
        let mut psi_grid = vec![0.0; grid.len()];
        let mut acc = self.psi(*grid.last().unwrap())?;
        psi_grid[grid.len() - 1] = acc;
        let local = Quadrature::new(1e-16, 1e-12);
        for k in (0..grid.len() - 1).rev() {
            acc += local
                .integrate(|x| self.xi(x) * self.lifetime.pdf(x), grid[k], grid[k + 1])?
                .value;
            psi_grid[k] = acc;
        }

        // Compensator at grid points, accumulated from the bottom up.
        let mut comp_grid = vec![0.0; grid.len()];
        if self.censoring != DistributionSpec::Never {
            let mut total = 0.0;
            for k in 1..grid.len() {
                let (a, b) = (grid[k - 1], grid[k]);
                let psi_b = psi_grid[k];
                let integrand = |s: f64| {
                    let dens = self.censoring.pdf(s);
                    let fbar = self.lifetime.sf(s);
                    if dens == 0.0 || fbar == 0.0 {
                        return 0.0;
                    }
                    let gbar = self.censoring.sf(s);
                    let psi = psi_b
                        + local
                            .integrate(|x| self.xi(x) * self.lifetime.pdf(x), s, b)
                            .map(|e| e.value)
                            .unwrap_or(f64::NAN);
                    psi * dens / (fbar * gbar * gbar)
                };
                let e = local.integrate(integrand, a, b)?;
                if !e.value.is_finite() {
                    return Err(Error::QuadratureFailure { estimate: e.value, error: e.error });
                }
                total += e.value;
                comp_grid[k] = total;
            }
        }

        let lookup = |t: f64| grid.binary_search_by(|g| g.total_cmp(&t)).expect("time on grid");
        obs.iter()
            .map(|o| {
                let k = lookup(o.time);
                let z = o.time;
                let lead = if o.event {
                    let gbar = self.censoring.sf(z);
                    if gbar <= 0.0 {
                        return Err(Error::DivisionByZero { index: k });
                    }
                    self.xi(z) / gbar
                } else {
                    let hbar = self.lifetime.sf(z) * self.censoring.sf(z);
                    if hbar <= 0.0 {
                        return Err(Error::DivisionByZero { index: k });
                    }
                    psi_grid[k] / hbar
                };
                Ok(lead - mu - comp_grid[k])
            })
            .collect()
    }
}

/// True influence values `W_i` under known `F` and `G`.
pub fn w_true(
    sample: &CensoredSample,
    f: &FunctionalSpec,
    theta: f64,
    lifetime: DistributionSpec,
    censoring: DistributionSpec,
) -> Result<InfluenceVector> {
    let truth = Truth::new(f, theta, lifetime, censoring)?;
    Ok(InfluenceVector {
        w: truth.influence(sample)?,
        theta,
    })
}

/// Asymptotic variances under known `F` and `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    /// `σ² = Var W`, from `∫ (F̄ξ - ψ)² / (F̄² Ḡ) dF`.
    pub sigma2_influence: f64,
    /// `σ²` again, from `∫ ξ²/Ḡ dF - μ² - ∫ ψ² / (F̄ Ḡ²) dG`.
    pub sigma2_influence_alt: f64,
    /// `σ₁² = ∫ ξ²/Ḡ dF - μ²`, the variance of the inverse-censoring-weighted score.
    pub sigma2_score: f64,
    /// `σ₁² / σ²`.
    pub ratio: f64,
    pub mu: f64,
}

/// Maximum disagreement tolerated between the two forms of `σ²`.
pub const VARIANCE_FORM_TOLERANCE: f64 = 1e-6;

pub fn asymptotic_variance(
    f: &FunctionalSpec,
    theta: f64,
    lifetime: DistributionSpec,
    censoring: DistributionSpec,
) -> Result<VarianceReport> {
    let truth = Truth::new(f, theta, lifetime, censoring)?;
    let b_f = lifetime.support_upper();
    if censoring.support_upper() < b_f {
        // Ḡ vanishes while F still has mass: ∫ ξ²/Ḡ dF is infinite.
        return Err(Error::DivergentIntegral);
    }
    let mu = truth.mu()?;
    let weighted = truth.integrate(
        |x| {
            let dens = lifetime.pdf(x);
            if dens == 0.0 {
                return 0.0;
            }
            let v = truth.xi(x);
            v * v * dens / censoring.sf(x)
        },
        0.0,
        b_f,
    )?;
    let compensator = truth.integrate(
        |x| {
            let dens = censoring.pdf(x);
            let fbar = lifetime.sf(x);
            if dens == 0.0 || fbar == 0.0 {
                return 0.0;
            }
            // Written via ψ/F̄ so the far tail does not underflow to 0/0.
            let r = truth.psi(x).unwrap_or(f64::NAN) / fbar;
            let gbar = censoring.sf(x);
            r * r * fbar * dens / (gbar * gbar)
        },
        0.0,
        truth.upper(),
    )?;
    let direct = truth.integrate(
        |x| {
            let dens = lifetime.pdf(x);
            let fbar = lifetime.sf(x);
            if dens == 0.0 || fbar == 0.0 {
                return 0.0;
            }
            let psi = truth.psi(x).unwrap_or(f64::NAN);
            let d = truth.xi(x) - psi / fbar;
            d * d * dens / censoring.sf(x)
        },
        0.0,
        b_f,
    )?;
    let sigma2_score = weighted - mu * mu;
    let alt = sigma2_score - compensator;
    if !(direct.is_finite() && alt.is_finite()) {
        return Err(Error::DivergentIntegral);
    }
    if (direct - alt).abs() > VARIANCE_FORM_TOLERANCE {
        return Err(Error::QuadratureFailure {
            estimate: direct,
            error: (direct - alt).abs(),
        });
    }
    Ok(VarianceReport {
        sigma2_influence: direct,
        sigma2_influence_alt: alt,
        sigma2_score,
        ratio: sigma2_score / direct,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::km::km_integral;
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
    fn three_point_hand_values() {
        let s = sample(&[(1.0, 1), (2.0, 0), (3.0, 1)]);
        let f = FunctionalSpec::mean();
        let w = w_hat(&s, &f, 7.0 / 3.0).unwrap();
        let expected = [-4.0 / 3.0, 1.0 / 3.0, 1.0];
        for (a, b) in w.w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{:?}", w.w);
        }
        assert!(w.mean().abs() < 1e-15);
    }

    #[test]
    fn zero_score_gives_zero_influence() {
        let s = sample(&[(1.0, 1), (2.0, 0), (3.0, 1), (3.5, 0)]);
        let f = FunctionalSpec::custom("zero", |_, _| 0.0, (-1.0, 1.0)).unwrap();
        let w = w_hat(&s, &f, 0.0).unwrap();
        assert!(w.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complete_data_reduces_to_score() {
        let s = sample(&[(0.4, 1), (1.1, 1), (1.9, 1), (2.5, 1)]);
        let w = w_hat(&s, &FunctionalSpec::mean(), 0.7).unwrap();
        for (o, v) in s.observations().iter().zip(&w.w) {
            assert!((v - (o.time - 0.7)).abs() < 1e-15);
        }
    }

    #[test]
    fn average_equals_km_integral_with_ties() {
        // The identity needs no-common-jump KM algebra; with ties between events
        // only it still holds.
        let s = sample(&[(0.5, 1), (0.5, 1), (1.0, 0), (1.5, 1), (2.0, 0), (2.0, 0), (3.0, 1)]);
        let f = FunctionalSpec::mean();
        let w = w_hat(&s, &f, 1.0).unwrap();
        let mu = km_integral(&s, f.xi(1.0));
        assert!((w.mean() - mu).abs() < 1e-14);
    }

    #[test]
    fn profile_matches_direct_evaluation() {
        let s = sample(&[(0.3, 1), (0.5, 0), (0.9, 1), (1.4, 0), (2.2, 1), (2.5, 1)]);
        let fit = KmFit::new(&s);
        for d in ["mean", "mrl:t0=0.6", "lb-survival:y=1", "quantile:p=0.4"] {
            let f: FunctionalSpec = d.parse().unwrap();
            let prof = InfluenceProfile::new(&fit, &f).unwrap();
            for theta in [0.2, 0.8, 1.7] {
                let a = prof.at(theta).unwrap();
                let b = w_hat(&s, &f, theta).unwrap().w;
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-13, "{d} {theta}");
                }
            }
        }
    }

    #[test]
    fn no_censoring_variance_is_score_variance() {
        let f = FunctionalSpec::mean();
        let r = asymptotic_variance(&f, 0.5, DistributionSpec::uniform(0.0, 1.0), DistributionSpec::Never).unwrap();
        assert!((r.sigma2_influence - 1.0 / 12.0).abs() < 1e-9);
        assert!((r.sigma2_score - 1.0 / 12.0).abs() < 1e-9);
        assert!((r.ratio - 1.0).abs() < 1e-8);
    }

    #[test]
    fn uniform_scenario_variance() {
        let f = FunctionalSpec::mean();
        let r = asymptotic_variance(&f, 0.5, DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(0.0, 2.5)).unwrap();
        assert!((r.sigma2_influence - r.sigma2_influence_alt).abs() < 1e-6);
        assert!(r.sigma2_score > r.sigma2_influence);
        // Closed form of ∫ (x - 1/2)² / (1 - x/2.5) dx over (0, 1).
        let c: f64 = 2.5;
        let closed = {
            // substitute u = 1 - x/c
            let q = Quadrature::new(1e-14, 1e-14);
            q.integrate(|x| (x - 0.5) * (x - 0.5) * c / (c - x), 0.0, 1.0).unwrap().value
        };
        assert!((r.sigma2_score - closed).abs() < 1e-9);
        assert!((r.sigma2_influence - 0.0934).abs() < 0.001);
    }

    #[test]
    fn short_censoring_support_diverges() {
        let f = FunctionalSpec::mean();
        let r = asymptotic_variance(&f, 0.5, DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(0.0, 0.8));
        assert!(matches!(r, Err(Error::DivergentIntegral)));
    }

    #[test]
    fn w_true_zero_score() {
        let s = sample(&[(0.2, 1), (0.5, 0), (0.7, 1)]);
        let f = FunctionalSpec::custom("zero", |_, _| 0.0, (-1.0, 1.0)).unwrap();
        let w = w_true(&s, &f, 0.0, DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(0.0, 2.5)).unwrap();
        assert!(w.w.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn w_true_complete_data() {
        let s = sample(&[(0.2, 1), (0.5, 1), (0.7, 1)]);
        let f = FunctionalSpec::mean();
        let w = w_true(&s, &f, 0.5, DistributionSpec::uniform(0.0, 1.0), DistributionSpec::Never).unwrap();
        for (o, v) in s.observations().iter().zip(&w.w) {
            assert!((v - (o.time - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn w_true_uniform_closed_form() {
        // F = U(0,1), G = U(0,c), ξ(x) = x - 1/2. Then ψ(s) = s(1-s)/2,
        // H̄(s) = (1-s)(1-s/c), dH⁰ = (1-s)/c ds, and the compensator is
        // ∫_0^z (s/2) c / (c-s)² ds = (c/2)[c/(c-z) - 1 + ln(1 - z/c)].
        let c: f64 = 2.5;
        let s = sample(&[(0.1, 1), (0.35, 0), (0.6, 1), (0.9, 0)]);
        let f = FunctionalSpec::mean();
        let w = w_true(&s, &f, 0.5, DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(0.0, c)).unwrap();
        for (o, v) in s.observations().iter().zip(&w.w) {
            let z = o.time;
            let comp = 0.5 * c * (c / (c - z) - 1.0 + (1.0 - z / c).ln());
            let lead = if o.event {
                (z - 0.5) / (1.0 - z / c)
            } else {
                0.5 * z * (1.0 - z) / ((1.0 - z) * (1.0 - z / c))
            };
            assert!((v - (lead - comp)).abs() < 1e-10, "{z}: {v} vs {}", lead - comp);
        }
    }
}
