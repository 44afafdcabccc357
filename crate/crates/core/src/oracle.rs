//! Seed-deterministic numeric identity testing.
//!
//! An identity `a ≡ b` is accepted when `|a − b| ≤ tol·(1 + max(|a|, |b|))`
//! holds at every sampled point. Each trial owns a ChaCha stream derived
//! from `(seed, trial)`, so trials can run in parallel and the verdict only
//! depends on the seed.
//!
//! Samples are dyadic rationals, so a rational expression that fails in
//! floating point is re-evaluated exactly at the same point before the
//! failure is believed. Near poles the f64 cancellation error of a
//! vanishing high-order expression easily exceeds any fixed tolerance.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::expr::{EvalError, EvalMemo, EvalPoint, ExactPoint, Expr, Symbol};

pub const DEFAULT_SEED: u64 = 0x6a65_7473_796d;
pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 100;

/// Produces sample points. Returning `None` rejects the draw.
pub trait Sampler: Sync {
    fn draw(&self, symbols: &[Symbol], rng: &mut ChaCha8Rng) -> Option<EvalPoint>;
}

/// Rationals with denominator at most 64 in `[-2, 2]`, avoiding `(-1e-3, 1e-3)`.
pub fn sample_value(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let den: i64 = rng.random_range(1..=64);
        let num: i64 = rng.random_range(-2 * den..=2 * den);
        let v = num as f64 / den as f64;
        if v.abs() >= 1e-3 {
            return v;
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UniformSampler;

impl Sampler for UniformSampler {
    fn draw(&self, symbols: &[Symbol], rng: &mut ChaCha8Rng) -> Option<EvalPoint> {
        Some(symbols.iter().map(|s| (s.clone(), sample_value(rng))).collect())
    }
}

/// A failing sample: which pair failed, where, and the two values.
#[derive(Clone, Debug)]
pub struct Failure {
    pub pair: usize,
    pub point: EvalPoint,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub holds: bool,
    /// Largest `|a − b| / (1 + max(|a|, |b|))` seen over all samples.
    pub max_residual: f64,
    /// Largest absolute difference `|a − b|` seen over all samples.
    pub max_abs: f64,
    pub samples: usize,
    pub failure: Option<Failure>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oracle {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { seed: DEFAULT_SEED, trials: DEFAULT_TRIALS, tol: DEFAULT_TOL }
    }
}

struct TrialOutcome {
    draws: usize,
    values: Option<(EvalPoint, Vec<f64>)>,
}

pub fn eval_all(exprs: &[Expr], point: &EvalPoint) -> std::result::Result<Vec<f64>, EvalError> {
    let mut memo = EvalMemo::default();
    exprs.iter().map(|e| e.eval_memo(point, &mut memo)).collect()
}

pub fn scaled_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

impl Oracle {
    pub fn new(seed: u64, trials: usize, tol: f64) -> Oracle {
        Oracle { seed, trials: trials.max(1), tol }
    }

    pub fn with_trials(self, trials: usize) -> Oracle {
        Oracle { trials: trials.max(1), ..self }
    }

    pub fn with_tol(self, tol: f64) -> Oracle {
        Oracle { tol, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Oracle {
        Oracle { seed, ..self }
    }

    /// Independent RNG stream for trial `t`.
    pub fn rng(&self, t: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        rng
    }

    /// `a ≡ b` at every sampled point.
    pub fn equal(&self, a: &Expr, b: &Expr) -> Result<bool> {
        Ok(self.check_pairs(&[(a.clone(), b.clone())])?.holds)
    }

    pub fn is_zero(&self, e: &Expr) -> Result<bool> {
        Ok(self.check_zero(std::slice::from_ref(e))?.holds)
    }

    pub fn check_zero(&self, exprs: &[Expr]) -> Result<Verdict> {
        let pairs: Vec<(Expr, Expr)> = exprs.iter().map(|e| (e.clone(), Expr::zero())).collect();
        self.check_pairs(&pairs)
    }

    pub fn check_pairs(&self, pairs: &[(Expr, Expr)]) -> Result<Verdict> {
        self.check_pairs_with(pairs, &UniformSampler)
    }

    pub fn check_zero_with(&self, exprs: &[Expr], sampler: &dyn Sampler) -> Result<Verdict> {
        let pairs: Vec<(Expr, Expr)> = exprs.iter().map(|e| (e.clone(), Expr::zero())).collect();
        self.check_pairs_with(&pairs, sampler)
    }

    /// Check every pair at the same sample points drawn by `sampler`.
    pub fn check_pairs_with(&self, pairs: &[(Expr, Expr)], sampler: &dyn Sampler) -> Result<Verdict> {
        let mut set = BTreeSet::new();
        let mut exprs = Vec::with_capacity(2 * pairs.len());
        for (a, b) in pairs {
            a.collect_symbols(&mut set);
            b.collect_symbols(&mut set);
            exprs.push(a.clone());
            exprs.push(b.clone());
        }
        let symbols: Vec<Symbol> = set.into_iter().collect();
        let outcomes = self.run_trials(&exprs, &symbols, sampler);

        let mut draws = 0;
        let mut good = 0;
        let mut verdict = Verdict { holds: true, max_residual: 0.0, max_abs: 0.0, samples: 0, failure: None };
        for outcome in outcomes {
            draws += outcome.draws;
            let Some((point, values)) = outcome.values else { continue };
            good += 1;
            let mut exact_point: Option<Option<ExactPoint>> = None;
            for (k, ab) in values.chunks(2).enumerate() {
                let (a, b) = (&ab[0], &ab[1]);
                let mut r = scaled_residual(*a, *b);
                let mut abs = (a - b).abs();
                if r > self.tol && verdict.failure.is_none() {
                    let exact = exact_point.get_or_insert_with(|| exact_point_of(&point));
                    if let Some((er, eabs)) = exact.as_ref().and_then(|p| exact_residual(&exprs[2 * k], &exprs[2 * k + 1], p)) {
                        r = er;
                        abs = eabs;
                    }
                }
                verdict.max_residual = verdict.max_residual.max(r);
                verdict.max_abs = verdict.max_abs.max(abs);
                if r > self.tol && verdict.failure.is_none() {
                    verdict.holds = false;
                    verdict.failure = Some(Failure { pair: k, point: point.clone(), lhs: *a, rhs: *b });
                }
            }
        }
        verdict.samples = good;
        if good == 0 || (draws - good) as f64 > 0.9 * draws as f64 {
            return Err(Error::PersistentDomainFailure);
        }
        Ok(verdict)
    }

    fn run_trials(&self, exprs: &[Expr], symbols: &[Symbol], sampler: &dyn Sampler) -> Vec<TrialOutcome> {
        (0..self.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = self.rng(t);
                for attempt in 1..=MAX_ATTEMPTS {
                    let Some(point) = sampler.draw(symbols, &mut rng) else { continue };
                    if let Ok(vals) = eval_all(exprs, &point) {
                        return TrialOutcome { draws: attempt, values: Some((point, vals)) };
                    }
                }
                TrialOutcome { draws: MAX_ATTEMPTS, values: None }
            })
            .collect()
    }

    /// `count` points at which every expression in `exprs` evaluates.
    pub fn sample_points(&self, exprs: &[Expr], extra: &[Symbol], count: usize) -> Result<Vec<EvalPoint>> {
        self.sample_points_with(exprs, extra, count, &UniformSampler)
    }

    pub fn sample_points_with(
        &self,
        exprs: &[Expr],
        extra: &[Symbol],
        count: usize,
        sampler: &dyn Sampler,
    ) -> Result<Vec<EvalPoint>> {
        let mut set: BTreeSet<Symbol> = extra.iter().cloned().collect();
        for e in exprs {
            e.collect_symbols(&mut set);
        }
        let symbols: Vec<Symbol> = set.into_iter().collect();
        let sub = Oracle { trials: count, ..*self };
        let outcomes = sub.run_trials(exprs, &symbols, sampler);
        let draws: usize = outcomes.iter().map(|o| o.draws).sum();
        let points: Vec<EvalPoint> = outcomes.into_iter().filter_map(|o| o.values.map(|v| v.0)).collect();
        if points.len() < count || (draws - points.len()) as f64 > 0.9 * draws as f64 {
            return Err(Error::PersistentDomainFailure);
        }
        Ok(points)
    }

    /// Value of `e` if it is numerically constant over the samples.
    pub fn constant_value(&self, e: &Expr) -> Result<Option<f64>> {
        if let Some(c) = e.as_const() {
            return Ok(Some(num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN)));
        }
        let points = self.sample_points(std::slice::from_ref(e), &[], self.trials)?;
        let vals: Vec<f64> = points.iter().map(|p| e.eval(p).unwrap_or(f64::NAN)).collect();
        let first = vals[0];
        let constant = vals.iter().all(|v| scaled_residual(*v, first) <= self.tol);
        Ok(if constant { Some(first) } else { None })
    }
}

fn exact_point_of(point: &EvalPoint) -> Option<ExactPoint> {
    point.iter().map(|(s, v)| Some((s.clone(), BigRational::from_float(*v)?))).collect()
}

/// Scaled and absolute residual of `a − b` in exact arithmetic.
fn exact_residual(a: &Expr, b: &Expr, point: &ExactPoint) -> Option<(f64, f64)> {
    let (a, b) = (a.eval_exact(point)?, b.eval_exact(point)?);
    let diff = (&a - &b).abs();
    let scale = a.abs().max(b.abs()) + BigRational::from_integer(1.into());
    Some(((&diff / scale).to_f64()?, diff.to_f64()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    fn space() -> JetSpace {
        JetSpace::new(&["x"], &["u"], 2).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let s = space();
        let o = Oracle::default();
        let u = s.u(0);
        assert!(o.equal(&(&u + &u), &(&Expr::integer(2) * &u)).unwrap());
        assert!(!o.equal(&s.ode_jet(0, 1), &u).unwrap());
        let x = s.x(0);
        let pyth = &x.sin().powi(2) + &x.cos().powi(2);
        assert!(o.equal(&pyth, &Expr::one()).unwrap());
    }

    #[test]
    fn cancellation_near_poles_is_settled_exactly() {
        let s = space();
        let u = s.u(0);
        let inv = u.recip();
        let sq = (&u + &inv.powi(6)).powi(2);
        let expanded = &(&(&u * &u) + &(&Expr::integer(2) * &inv.powi(5))) + &inv.powi(12);
        // at |u| ~ 1e-3 the f64 cancellation error here is far above tol
        let o = Oracle::default().with_trials(200);
        let v = o.check_pairs(&[(sq.clone(), expanded.clone())]).unwrap();
        assert!(v.holds, "{v:?}");
        let off = &expanded + &Expr::rational(1, 1000);
        assert!(!o.check_pairs(&[(sq, off)]).unwrap().holds);
    }

    #[test]
    fn verdict_is_seed_deterministic() {
        let s = space();
        let e = s.parse("x*u - u_x^2/3").unwrap();
        let f = s.parse("x*u").unwrap();
        let a = Oracle::default().check_pairs(&[(e.clone(), f.clone())]).unwrap();
        let b = Oracle::default().check_pairs(&[(e, f)]).unwrap();
        assert_eq!(a.max_residual, b.max_residual);
        assert_eq!(a.failure.unwrap().point, b.failure.unwrap().point);
    }

    #[test]
    fn resamples_around_singularities() {
        let s = space();
        let e = s.parse("log(u) + 1/x").unwrap();
        assert!(Oracle::default().equal(&e, &e).unwrap());
    }

    #[test]
    fn persistent_domain_failure() {
        let s = space();
        let e = s.parse("log(-u^2)").unwrap();
        assert!(matches!(Oracle::default().is_zero(&e), Err(Error::PersistentDomainFailure)));
    }

    #[test]
    fn samples_avoid_origin_and_stay_in_range() {
        let o = Oracle::default();
        let mut rng = o.rng(3);
        for _ in 0..1000 {
            let v = sample_value(&mut rng);
            assert!(v.abs() >= 1e-3 && v.abs() <= 2.0);
        }
    }
}
