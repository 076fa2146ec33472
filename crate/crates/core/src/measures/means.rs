//! Operator means of discrete measures.
//!
//! Inputs are first put in a canonical order (atoms sorted by their bit
//! patterns, identical atoms merged), so the result depends only on the
//! measure and not on how it was listed.

use std::cmp::Ordering;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{stochastic_leq, Coupling, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::numlin::random::{random_pd, random_psd, rng_from_seed};
use crate::numlin::{inverse_pd, SymMatrix};
use crate::verify::{run_suite, SuiteConfig, Trial, VerificationReport};

pub const POWER_MEAN_MAX_ITERATIONS: usize = 500;
const STEP_RTOL: f64 = 1e-13;
const RESIDUAL_RTOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanSpec {
    Power(f64),
    Arithmetic,
    Harmonic,
    /// The atom with the largest top eigenvalue. Not monotone; a negative control.
    MaxEigenPick,
}

impl FromStr for MeanSpec {
    type Err = Error;

    /// `power:t`, `arithmetic` or `harmonic`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().split_once(':') {
            None if s.trim() == "arithmetic" => Ok(MeanSpec::Arithmetic),
            None if s.trim() == "harmonic" => Ok(MeanSpec::Harmonic),
            Some(("power", t)) => t
                .trim()
                .parse()
                .map(MeanSpec::Power)
                .map_err(|_| Error::InvalidParameter(format!("bad exponent '{t}'"))),
            _ => Err(Error::InvalidParameter(format!("unknown mean '{s}'; expected power:t, arithmetic or harmonic"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMean {
    pub mean: SymMatrix,
    pub iterations: usize,
    /// `‖X − Σ w_i X #_t A_i‖_F / ‖X‖_F` at the returned `X`.
    pub residual: f64,
}

fn cmp_matrices(a: &SymMatrix, b: &SymMatrix) -> Ordering {
    a.dim().cmp(&b.dim()).then_with(|| {
        a.as_matrix()
            .iter()
            .zip(b.as_matrix().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Sorted, with bit-identical atoms merged.
fn canonical(weights: &[f64], atoms: &[SymMatrix]) -> (Vec<f64>, Vec<SymMatrix>) {
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&i, &j| cmp_matrices(&atoms[i], &atoms[j]).then_with(|| weights[i].total_cmp(&weights[j])));
    let mut w: Vec<f64> = Vec::new();
    let mut a: Vec<SymMatrix> = Vec::new();
    for i in order {
        match a.last() {
            Some(last) if cmp_matrices(last, &atoms[i]).is_eq() => *w.last_mut().expect("nonempty") += weights[i],
            _ => {
                w.push(weights[i]);
                a.push(atoms[i].clone());
            }
        }
    }
    (w, a)
}

fn check_inputs(weights: &[f64], atoms: &[SymMatrix]) -> Result<()> {
    if atoms.is_empty() || atoms.len() != weights.len() {
        return Err(Error::Dimension(format!("{} atoms with {} weights", atoms.len(), weights.len())));
    }
    let n = atoms[0].dim();
    if atoms.iter().any(|a| a.dim() != n) {
        return Err(Error::Dimension("atoms have different dimensions".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

fn arithmetic(w: &[f64], a: &[SymMatrix]) -> SymMatrix {
    a.iter().zip(w).fold(SymMatrix::zeros(a[0].dim()), |acc, (x, &wi)| acc.add(&x.scale(wi)))
}

/// `Σ w_i X #_t A_i`, sharing the eigendecomposition of `X`.
fn power_map(x: &SymMatrix, w: &[f64], a: &[SymMatrix], t: f64) -> Result<SymMatrix> {
    let eig = x.eig();
    if !(eig.min() > 0.0) {
        return Err(Error::NotPd { min_eigenvalue: eig.min() });
    }
    let half = eig.map(f64::sqrt);
    let inv_half = eig.map(|v| 1.0 / v.sqrt());
    let mut sum = DMatrix::zeros(x.dim(), x.dim());
    for (ai, &wi) in a.iter().zip(w) {
        let inner = SymMatrix::symmetrized(&inv_half * ai.as_matrix() * &inv_half).eig();
        if !(inner.min() > 0.0) {
            return Err(Error::NotPd { min_eigenvalue: inner.min() });
        }
        sum += inner.map(|v| v.powf(t)) * wi;
    }
    Ok(SymMatrix::symmetrized(&half * sum * &half))
}

/// Power mean: the positive solution of `X = Σ w_i X #_t A_i`, by fixed-point
/// iteration from the arithmetic mean. `t = 1` is the arithmetic mean.
pub fn power_mean(weights: &[f64], atoms: &[SymMatrix], t: f64) -> Result<PowerMean> {
    check_inputs(weights, atoms)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("power mean exponent {t} must lie in (0, 1]")));
    }
    for a in atoms {
        let m = a.min_eigenvalue();
        if !(m > 0.0) {
            return Err(Error::NotPd { min_eigenvalue: m });
        }
    }
    let (w, a) = canonical(weights, atoms);
    if a.len() == 1 {
        return Ok(PowerMean { mean: a[0].clone(), iterations: 0, residual: 0.0 });
    }
    let mut x = arithmetic(&w, &a);
    if t == 1.0 {
        return Ok(PowerMean { mean: x, iterations: 0, residual: 0.0 });
    }
    let mut residual = f64::INFINITY;
    for it in 0..POWER_MEAN_MAX_ITERATIONS {
        let next = power_map(&x, &w, &a, t)?;
        let size = x.as_matrix().norm();
        residual = (next.as_matrix() - x.as_matrix()).norm() / size;
        if residual <= STEP_RTOL || residual <= RESIDUAL_RTOL / size.max(1.0) {
            return Ok(PowerMean { mean: x, iterations: it, residual });
        }
        x = next;
    }
    Err(Error::NonConvergence { iterations: POWER_MEAN_MAX_ITERATIONS, residual })
}

pub fn mean_of_measure(spec: MeanSpec, mu: &DiscreteMeasure) -> Result<SymMatrix> {
    let (w, a) = canonical(mu.weights(), mu.atoms());
    match spec {
        MeanSpec::Power(t) => Ok(power_mean(&w, &a, t)?.mean),
        MeanSpec::Arithmetic => Ok(arithmetic(&w, &a)),
        MeanSpec::Harmonic => {
            let mut s = SymMatrix::zeros(mu.dim());
            for (ai, &wi) in a.iter().zip(&w) {
                s = s.add(&inverse_pd(ai)?.scale(wi));
            }
            inverse_pd(&s)
        }
        MeanSpec::MaxEigenPick => {
            let mut best = 0;
            let mut top = f64::NEG_INFINITY;
            for (i, ai) in a.iter().enumerate() {
                let m = ai.eig().max();
                if m > top {
                    top = m;
                    best = i;
                }
            }
            Ok(a[best].clone())
        }
    }
}

/// `mean(μ) ⪯ mean(ν)` for generated pairs `μ ≤ ν`: `ν` moves every atom of
/// `μ` up by a random PSD increment and lists the atoms in a random order.
pub fn check_stochastic_monotone(spec: MeanSpec, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let interval = cfg.sample_interval();
    run_suite("stochastic-monotone", cfg, |n, seed, _| {
        let mut rng = rng_from_seed(seed);
        let count = rng.random_range(1..=4);
        let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let atoms: Vec<SymMatrix> = (0..count).map(|_| random_pd(n, interval, &mut rng)).collect();
        let mut up: Vec<(SymMatrix, f64)> = atoms
            .iter()
            .zip(&weights)
            .map(|(a, &w)| {
                let rank = rng.random_range(1..=n);
                let step = rng.random_range(0.0..interval.1);
                (a.add(&random_psd(n, rank, &mut rng).scale(step)), w)
            })
            .collect();
        up.shuffle(&mut rng);
        let mu = DiscreteMeasure::new(atoms, weights)?;
        let (nu_atoms, nu_weights) = up.into_iter().unzip();
        let nu = DiscreteMeasure::new(nu_atoms, nu_weights)?;
        if !stochastic_leq(&mu, &nu, crate::numlin::DEFAULT_PSD_TOL)?.holds() {
            return Ok(Trial::Skipped);
        }
        let lo = mean_of_measure(spec, &mu)?;
        let hi = mean_of_measure(spec, &nu)?;
        Ok(Trial::Margin(hi.sub(&lo).min_eigenvalue() / hi.norm().max(1.0)))
    })
}

/// `mean(γ-measure on A_i ⊕ B_j) = mean(μ) ⊕ mean(ν)` for each coupling.
pub fn check_directsum_coupling(
    spec: MeanSpec,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    couplings: &[Coupling],
    tol: f64,
) -> Result<VerificationReport> {
    if couplings.is_empty() {
        return Err(Error::InvalidParameter("no couplings to check".into()));
    }
    let expected = mean_of_measure(spec, mu)?.direct_sum(&mean_of_measure(spec, nu)?);
    let scale = expected.norm().max(1.0);
    let cfg = SuiteConfig {
        dims: vec![mu.dim() + nu.dim()],
        trials: couplings.len(),
        seed: 0,
        tol,
        interval: None,
        execution: crate::exec::Execution::Sequential,
    };
    run_suite("directsum-coupling", &cfg, |_, _, index| {
        let joint = couplings[index].direct_sum_measure(mu, nu)?;
        let got = mean_of_measure(spec, &joint)?;
        Ok(Trial::Margin(-got.sub(&expected).norm() / scale))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::couplings_sample;
    use crate::numlin::random::{random_commuting_tuple, random_pd};
    use crate::numlin::{apply_scalar_function, geometric_mean_direct};

    #[test]
    fn idempotent_and_trivial_cases() {
        let mut rng = rng_from_seed(80);
        let a = random_pd(3, (0.5, 2.0), &mut rng);
        let r = power_mean(&[0.5, 0.5], &[a.clone(), a.clone()], 0.5).unwrap();
        assert_eq!(r.mean, a);
        let b = random_pd(3, (0.5, 2.0), &mut rng);
        let r = power_mean(&[0.25, 0.75], &[a.clone(), b.clone()], 1.0).unwrap();
        assert_eq!(r.mean, a.scale(0.25).add(&b.scale(0.75)));
        assert!(power_mean(&[1.0], std::slice::from_ref(&a), 0.0).is_err());
        assert!(power_mean(&[0.5, 0.6], &[a.clone(), b], 0.5).is_err());
    }

    #[test]
    fn spec_grammar() {
        assert_eq!("power:0.5".parse::<MeanSpec>().unwrap(), MeanSpec::Power(0.5));
        assert_eq!("harmonic".parse::<MeanSpec>().unwrap(), MeanSpec::Harmonic);
        assert_eq!("arithmetic".parse::<MeanSpec>().unwrap(), MeanSpec::Arithmetic);
        for bad in ["power", "power:x", "geometric", "harmonic:1"] {
            assert!(bad.parse::<MeanSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn residual_is_small() {
        let mut rng = rng_from_seed(81);
        for &t in &[0.2, 0.5, 0.9] {
            let atoms: Vec<_> = (0..3).map(|_| random_pd(4, (0.1, 10.0), &mut rng)).collect();
            let w = [0.2, 0.5, 0.3];
            let r = power_mean(&w, &atoms, t).unwrap();
            let g = power_map(&r.mean, &w, &atoms, t).unwrap();
            let res = g.sub(&r.mean).as_matrix().norm() / r.mean.as_matrix().norm();
            assert!(res <= 1e-10, "t={t}: {res:e}");
        }
    }

    #[test]
    fn commuting_atoms_match_scalar_formula() {
        let tuple = random_commuting_tuple(3, 4, (0.2, 5.0), 82).unwrap();
        let w = [0.5, 0.2, 0.3];
        let t = 0.4;
        let r = power_mean(&w, tuple.items(), t).unwrap();
        let oracle = apply_scalar_function(
            |x| x.iter().zip(&w).map(|(a, wi)| wi * a.powf(t)).sum::<f64>().powf(1.0 / t),
            &tuple,
        )
        .unwrap();
        assert!(r.mean.sub(&oracle).norm() <= 1e-9);
    }

    #[test]
    fn two_atoms_at_half_agree_with_midpoint_equation() {
        // For two atoms with equal weights the fixed point satisfies
        // X = ½(X #½ A + X #½ B); check it through the direct geometric mean.
        let mut rng = rng_from_seed(83);
        let a = random_pd(3, (0.5, 4.0), &mut rng);
        let b = random_pd(3, (0.5, 4.0), &mut rng);
        let x = power_mean(&[0.5, 0.5], &[a.clone(), b.clone()], 0.5).unwrap().mean;
        let rhs = geometric_mean_direct(&x, &a, 0.5)
            .unwrap()
            .add(&geometric_mean_direct(&x, &b, 0.5).unwrap())
            .scale(0.5);
        assert!(x.sub(&rhs).norm() <= 1e-10 * x.norm());
    }

    #[test]
    fn permutation_and_split_invariance_is_exact() {
        let mut rng = rng_from_seed(84);
        let atoms: Vec<_> = (0..3).map(|_| random_pd(3, (0.5, 4.0), &mut rng)).collect();
        let mu = DiscreteMeasure::new(atoms.clone(), vec![0.5, 0.25, 0.25]).unwrap();
        let perm = DiscreteMeasure::new(vec![atoms[2].clone(), atoms[0].clone(), atoms[1].clone()], vec![0.25, 0.5, 0.25])
            .unwrap();
        let split = DiscreteMeasure::new(
            vec![atoms[0].clone(), atoms[1].clone(), atoms[0].clone(), atoms[2].clone()],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        for spec in [MeanSpec::Power(0.5), MeanSpec::Arithmetic, MeanSpec::Harmonic] {
            let base = mean_of_measure(spec, &mu).unwrap();
            assert_eq!(base, mean_of_measure(spec, &perm).unwrap());
            assert_eq!(base, mean_of_measure(spec, &split).unwrap());
        }
    }

    #[test]
    fn monotone_suites() {
        let cfg = SuiteConfig::new(vec![2, 3], 30, 5, 1e-8);
        for spec in [MeanSpec::Power(0.5), MeanSpec::Arithmetic, MeanSpec::Harmonic] {
            let r = check_stochastic_monotone(spec, &cfg).unwrap();
            assert!(r.pass, "{spec:?}: {r:?}");
        }
        let bad = check_stochastic_monotone(MeanSpec::MaxEigenPick, &cfg).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn direct_sums_of_couplings() {
        let mut rng = rng_from_seed(85);
        let mu = DiscreteMeasure::new((0..2).map(|_| random_pd(2, (0.5, 2.0), &mut rng)).collect(), vec![0.5, 0.5])
            .unwrap();
        let nu = DiscreteMeasure::new((0..2).map(|_| random_pd(2, (0.5, 2.0), &mut rng)).collect(), vec![0.5, 0.5])
            .unwrap();
        let cs = couplings_sample(&mu, &nu, 11, 1);
        for spec in [MeanSpec::Power(0.5), MeanSpec::Arithmetic, MeanSpec::Harmonic] {
            let r = check_directsum_coupling(spec, &mu, &nu, &cs, 1e-8).unwrap();
            assert!(r.pass, "{spec:?}: {r:?}");
        }
    }
}
