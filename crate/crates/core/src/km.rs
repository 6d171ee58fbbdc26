//! Empirical sub-distributions, Kaplan-Meier estimators and KM integrals.
//!
//! Notation follows the usual survival conventions: `H_n^1`, `H_n^0` are the
//! empirical distributions of event and censoring times, `H_n` their sum,
//! `F_n` and `G_n` the product-limit estimators of the lifetime and
//! censoring distributions. A bar denotes `1 - ·` and a trailing `-` the
//! left limit.

use crate::sample::{CensoredSample, StepFunction};

/// `(H_n^0, H_n^1, H_n)` for one sample.
#[derive(Debug, Clone)]
pub struct EmpiricalTriple {
    pub h0: StepFunction,
    pub h1: StepFunction,
    pub h: StepFunction,
}

pub fn empirical_subdistributions(sample: &CensoredSample) -> EmpiricalTriple {
    let w = 1.0 / sample.len() as f64;
    let obs = sample.observations();
    let h1 = StepFunction::from_sorted_jumps(
        0.0,
        obs.iter().filter(|o| o.event).map(|o| (o.time, w)),
    );
    let h0 = StepFunction::from_sorted_jumps(
        0.0,
        obs.iter().filter(|o| !o.event).map(|o| (o.time, w)),
    );
    // Built from counts rather than summed floats so h terminates at exactly 1.
    let n = sample.len();
    let groups = sample.tie_groups();
    let knots: Vec<f64> = groups.iter().map(|g| g.time).collect();
    let values: Vec<f64> = groups
        .iter()
        .map(|g| (g.start + g.size()) as f64 / n as f64)
        .collect();
    let h = StepFunction::new(0.0, knots, values).expect("tie groups are strictly ascending");
    EmpiricalTriple { h0, h1, h }
}

/// Per-observation quantities shared by every KM-based estimator of one sample.
///
/// All arrays are indexed like `sample.observations()`.
#[derive(Debug, Clone)]
pub struct KmFit {
    n: usize,
    times: Vec<f64>,
    events: Vec<bool>,
    /// Start index of the tie group each observation belongs to.
    group_start: Vec<usize>,
    /// `F̄_n(Z_i-)`.
    f_surv_left: Vec<f64>,
    /// `Ḡ_n(Z_i-)`.
    g_surv_left: Vec<f64>,
    /// `Ḡ_n(Z_i)`, right-continuous.
    g_surv: Vec<f64>,
    /// `H̄_n(Z_i-)`, i.e. the at-risk fraction.
    h_surv_left: Vec<f64>,
    /// Share of `F_n{Z_i}` carried by observation `i` (zero for censorings).
    event_mass: Vec<f64>,
}

impl KmFit {
    pub fn new(sample: &CensoredSample) -> Self {
        let n = sample.len();
        let nf = n as f64;
        let obs = sample.observations();
        let mut fit = KmFit {
            n,
            times: obs.iter().map(|o| o.time).collect(),
            events: obs.iter().map(|o| o.event).collect(),
            group_start: vec![0; n],
            f_surv_left: vec![0.0; n],
            g_surv_left: vec![0.0; n],
            g_surv: vec![0.0; n],
            h_surv_left: vec![0.0; n],
            event_mass: vec![0.0; n],
        };
        let mut f_surv = 1.0;
        let mut g_surv = 1.0;
        for g in sample.tie_groups() {
            let at_risk = (n - g.start) as f64;
            let f_next = f_surv * (1.0 - g.events as f64 / at_risk);
            let g_next = g_surv * (1.0 - g.censored as f64 / at_risk);
            let mass = if g.events > 0 {
                (f_surv - f_next) / g.events as f64
            } else {
                0.0
            };
            for i in g.start..g.start + g.size() {
                fit.group_start[i] = g.start;
                fit.f_surv_left[i] = f_surv;
                fit.g_surv_left[i] = g_surv;
                fit.g_surv[i] = g_next;
                fit.h_surv_left[i] = at_risk / nf;
                if fit.events[i] {
                    fit.event_mass[i] = mass;
                }
            }
            f_surv = f_next;
            g_surv = g_next;
        }
        fit
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn f_surv_left(&self) -> &[f64] {
        &self.f_surv_left
    }

    pub fn g_surv_left(&self) -> &[f64] {
        &self.g_surv_left
    }

    pub fn g_surv(&self) -> &[f64] {
        &self.g_surv
    }

    pub fn h_surv_left(&self) -> &[f64] {
        &self.h_surv_left
    }

    pub fn event_mass(&self) -> &[f64] {
        &self.event_mass
    }

    pub(crate) fn group_start(&self) -> &[usize] {
        &self.group_start
    }

    /// Total mass of `F_n`; below one when the largest observation is censored.
    pub fn total_mass(&self) -> f64 {
        self.event_mass.iter().sum()
    }

    /// `∫ ξ dF_n` with `ξ` given at each observation.
    pub fn integrate_values(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .zip(&self.event_mass)
            .filter(|(_, &m)| m != 0.0)
            .map(|(&x, &m)| x * m)
            .sum()
    }

    pub fn integrate(&self, xi: impl Fn(f64) -> f64) -> f64 {
        self.times
            .iter()
            .zip(&self.event_mass)
            .filter(|(_, &m)| m != 0.0)
            .map(|(&t, &m)| xi(t) * m)
            .sum()
    }

    /// `ψ_n(Z_i) = Σ_{Z_j >= Z_i} ξ(Z_j) F_n{Z_j}` for each observation, given
    /// `ξ` at each observation.
    pub fn tail_sums(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        let mut i = n;
        while i > 0 {
            let start = self.group_start[i - 1];
            for j in start..i {
                if self.event_mass[j] != 0.0 {
                    acc += xi[j] * self.event_mass[j];
                }
            }
            out[start..i].fill(acc);
            i = start;
        }
        out
    }
}

pub fn km_event(sample: &CensoredSample) -> StepFunction {
    product_limit(sample, true)
}

pub fn km_censor(sample: &CensoredSample) -> StepFunction {
    product_limit(sample, false)
}

fn product_limit(sample: &CensoredSample, for_events: bool) -> StepFunction {
    let n = sample.len();
    let mut surv = 1.0;
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for g in sample.tie_groups() {
        let d = if for_events { g.events } else { g.censored };
        if d == 0 {
            continue;
        }
        let at_risk = (n - g.start) as f64;
        surv *= 1.0 - d as f64 / at_risk;
        knots.push(g.time);
        values.push(1.0 - surv);
    }
    StepFunction::new(0.0, knots, values).expect("tie groups are strictly ascending")
}

/// The tail integral `ψ_n(x) = ∫_{s >= x} ξ(s) dF_n(s)`.
///
/// Left-continuous in `x`: the jump at `x` itself is included.
#[derive(Debug, Clone)]
pub struct TailSum {
    /// Right-continuous companion `x ↦ Σ_{s > x}`, whose left limit is `ψ_n`.
    strict: StepFunction,
}

impl TailSum {
    pub fn eval(&self, x: f64) -> f64 {
        self.strict.eval_left(x)
    }

    /// `Σ_{s > x} ξ(s) F_n{s}`, the right limit of `ψ_n` at `x`.
    pub fn eval_right(&self, x: f64) -> f64 {
        self.strict.eval(x)
    }

    pub fn as_step(&self) -> &StepFunction {
        &self.strict
    }
}

pub fn psi_n(sample: &CensoredSample, xi: impl Fn(f64) -> f64) -> TailSum {
    let f = km_event(sample);
    let jumps: Vec<(f64, f64)> = f
        .jumps()
        .map(|(s, dj)| (s, xi(s) * dj))
        .collect();
    let total: f64 = jumps.iter().map(|&(_, v)| v).sum();
    // Σ_{s > x} starts at the full sum and loses each term once x reaches it.
    let mut remaining = total;
    let mut knots = Vec::with_capacity(jumps.len());
    let mut values = Vec::with_capacity(jumps.len());
    for (k, &(s, v)) in jumps.iter().enumerate() {
        remaining -= v;
        if k + 1 == jumps.len() {
            remaining = 0.0;
        }
        knots.push(s);
        values.push(remaining);
    }
    TailSum {
        strict: StepFunction::new(total, knots, values).expect("KM knots ascend"),
    }
}

/// `μ_n = ∫ ξ dF_n`.
pub fn km_integral(sample: &CensoredSample, xi: impl Fn(f64) -> f64) -> f64 {
    KmFit::new(sample).integrate(xi)
}

/// `∫ ξ(s) / Ḡ_n(s-) dH_n^1(s)`, the inverse-censoring-weighted form of `μ_n`.
pub fn km_integral_weighted(sample: &CensoredSample, xi: impl Fn(f64) -> f64) -> f64 {
    let fit = KmFit::new(sample);
    let w = 1.0 / fit.len() as f64;
    (0..fit.len())
        .filter(|&i| fit.events[i])
        .map(|i| xi(fit.times[i]) * w / fit.g_surv_left[i])
        .sum()
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

    fn three() -> CensoredSample {
        sample(&[(1.0, 1), (2.0, 0), (3.0, 1)])
    }

    const EPS: f64 = 1e-15;

    #[test]
    fn empirical_h_left_limit() {
        let t = empirical_subdistributions(&three());
        assert!((t.h.eval_left(2.0) - 1.0 / 3.0).abs() < EPS);
        assert!((t.h.eval(2.0) - 2.0 / 3.0).abs() < EPS);
        assert_eq!(t.h.terminal(), 1.0);
    }

    #[test]
    fn subdistribution_jumps() {
        let t = empirical_subdistributions(&three());
        assert_eq!(t.h1.knots(), &[1.0, 3.0]);
        assert!((t.h1.jump_at(1.0) - 1.0 / 3.0).abs() < EPS);
        assert!((t.h1.jump_at(3.0) - 1.0 / 3.0).abs() < EPS);
        assert_eq!(t.h0.knots(), &[2.0]);
        assert!((t.h0.jump_at(2.0) - 1.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn subdistributions_without_censoring() {
        let s = sample(&[(0.5, 1), (1.0, 1), (4.0, 1)]);
        let t = empirical_subdistributions(&s);
        assert!(t.h0.knots().is_empty());
        for x in [0.0, 0.5, 0.7, 1.0, 4.0, 9.0] {
            assert!((t.h1.eval(x) - t.h.eval(x)).abs() < EPS);
        }
    }

    #[test]
    fn subdistributions_with_tie() {
        let s = sample(&[(1.0, 1), (1.0, 0)]);
        let t = empirical_subdistributions(&s);
        assert_eq!(t.h1.jump_at(1.0), 0.5);
        assert_eq!(t.h0.jump_at(1.0), 0.5);
        assert_eq!(t.h.eval(1.0), 1.0);
    }

    #[test]
    fn km_event_three_point() {
        let f = km_event(&three());
        assert_eq!(f.eval(0.5), 0.0);
        assert!((f.eval(1.0) - 1.0 / 3.0).abs() < EPS);
        assert!((f.eval(2.9) - 1.0 / 3.0).abs() < EPS);
        assert!((f.eval(3.0) - 1.0).abs() < EPS);
    }

    #[test]
    fn km_event_without_censoring_is_edf() {
        let s = sample(&[(0.2, 1), (0.9, 1), (1.1, 1), (3.0, 1)]);
        let f = km_event(&s);
        for (k, x) in [0.2, 0.9, 1.1, 3.0].iter().enumerate() {
            assert!((f.eval(*x) - (k + 1) as f64 / 4.0).abs() < EPS);
        }
    }

    #[test]
    fn km_event_after_leading_censor() {
        let f = km_event(&sample(&[(1.0, 0), (2.0, 1)]));
        assert_eq!(f.eval(1.5), 0.0);
        assert_eq!(f.eval(2.0), 1.0);
    }

    #[test]
    fn km_censor_three_point() {
        let g = km_censor(&three());
        assert_eq!(g.eval(1.9), 0.0);
        assert!((g.eval(2.0) - 0.5).abs() < EPS);
        assert!((g.eval(10.0) - 0.5).abs() < EPS);
        let f = km_event(&three());
        let h = empirical_subdistributions(&three()).h;
        let lhs = (1.0 - f.eval(2.0)) * (1.0 - g.eval(2.0));
        assert!((lhs - 1.0 / 3.0).abs() < EPS);
        assert!((lhs - (1.0 - h.eval(2.0))).abs() < EPS);
    }

    #[test]
    fn km_censor_without_censoring_is_zero() {
        let g = km_censor(&sample(&[(1.0, 1), (2.0, 1)]));
        assert!(g.knots().is_empty());
        assert_eq!(g.eval(5.0), 0.0);
    }

    #[test]
    fn psi_three_point() {
        let p = psi_n(&three(), |x| x);
        assert!((p.eval(0.0) - 7.0 / 3.0).abs() < 1e-14);
        assert!((p.eval(1.0) - 7.0 / 3.0).abs() < 1e-14);
        assert!((p.eval(2.0) - 2.0).abs() < 1e-14);
        assert!((p.eval(3.0) - 2.0).abs() < 1e-14);
        assert_eq!(p.eval(3.5), 0.0);
        assert!((p.eval_right(1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn psi_zero_integrand() {
        let p = psi_n(&three(), |_| 0.0);
        for x in [0.0, 1.0, 2.0, 3.0, 4.0] {
            assert_eq!(p.eval(x), 0.0);
        }
    }

    #[test]
    fn km_integral_three_point() {
        assert!((km_integral(&three(), |x| x) - 7.0 / 3.0).abs() < 1e-14);
        assert!((km_integral_weighted(&three(), |x| x) - 7.0 / 3.0).abs() < 1e-14);
        let tail = km_integral(&three(), |x| if x > 2.0 { 1.0 } else { 0.0 });
        assert!((tail - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn km_integral_complete_data_is_mean() {
        let s = sample(&[(0.3, 1), (1.7, 1), (2.0, 1), (5.5, 1)]);
        let mean = (0.3 + 1.7 + 2.0 + 5.5) / 4.0;
        assert!((km_integral(&s, |x| x) - mean).abs() < 1e-14);
    }

    #[test]
    fn censored_tail_leaves_mass_below_one() {
        let s = sample(&[(1.0, 1), (2.0, 1), (3.0, 0)]);
        let f = km_event(&s);
        assert!((f.terminal() - 2.0 / 3.0).abs() < EPS);
        let fit = KmFit::new(&s);
        assert!((fit.total_mass() - 2.0 / 3.0).abs() < EPS);
        assert!((psi_n(&s, |_| 1.0).eval(0.0) - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn fit_tail_sums_match_psi() {
        let s = sample(&[(0.5, 0), (1.0, 1), (1.0, 0), (2.0, 1), (2.5, 0), (3.0, 1)]);
        let fit = KmFit::new(&s);
        let xi: Vec<f64> = fit.times().iter().map(|t| t * t - 1.0).collect();
        let tails = fit.tail_sums(&xi);
        let psi = psi_n(&s, |t| t * t - 1.0);
        for (i, &t) in fit.times().iter().enumerate() {
            assert!((tails[i] - psi.eval(t)).abs() < 1e-14);
        }
    }
}
