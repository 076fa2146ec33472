use nalgebra::{Complex, DMatrix};
use rand::Rng;

use super::{imaginary_part, run_suite, FreeMap, SuiteConfig, Trial, VerificationReport};
use crate::error::{Error, Result};
use crate::numlin::random::{
    commuting_tuple_with, contraction_with, isometry_with, random_orthogonal, random_pd, random_pd_tuple, random_psd,
    random_symmetric, rng_from_seed, TestRng,
};
use crate::numlin::random::make_dominated_pair;
use crate::numlin::{herm_eigenvalues, MatrixTuple, SymMatrix};

/// Largest auxiliary dimension for the Jensen suite.
const JENSEN_MAX_DIM: usize = 8;

fn check_arity<M: FreeMap + ?Sized>(map: &M) -> Result<usize> {
    match map.arity() {
        0 => Err(Error::InvalidParameter("map takes no variables".into())),
        k => Ok(k),
    }
}

/// Commuting tuples for scalar maps and on even trials; otherwise independent
/// random matrices.
fn sample<M: FreeMap + ?Sized>(map: &M, n: usize, interval: (f64, f64), index: usize, rng: &mut TestRng) -> MatrixTuple {
    let k = map.arity();
    if map.requires_commuting() || index.is_multiple_of(2) {
        commuting_tuple_with(k, n, interval, rng)
    } else {
        random_pd_tuple(k, n, interval, rng)
    }
}

/// Two tuples. With `joint`, maps that need commuting input get two tuples
/// from one shared eigenbasis, so that mixtures of them still commute.
fn sample_pair<M: FreeMap + ?Sized>(
    map: &M,
    n: usize,
    interval: (f64, f64),
    index: usize,
    joint: bool,
    rng: &mut TestRng,
) -> (MatrixTuple, MatrixTuple) {
    let k = map.arity();
    if joint && map.requires_commuting() {
        let mut items = commuting_tuple_with(2 * k, n, interval, rng).into_items();
        let second = items.split_off(k);
        let x = MatrixTuple::new(items).expect("k >= 1");
        let y = MatrixTuple::new(second).expect("k >= 1");
        (x, y)
    } else {
        let x = sample(map, n, interval, index, rng);
        let y = sample(map, n, interval, index / 2, rng);
        (x, y)
    }
}

fn scale_of(mats: &[&SymMatrix]) -> f64 {
    mats.iter().map(|m| m.norm()).fold(1.0, f64::max)
}

/// `‖F(UᵀXU) − UᵀF(X)U‖` and `‖F(X⊕Y) − F(X)⊕F(Y)‖`, normalized.
pub fn check_free_axioms<M: FreeMap + ?Sized>(map: &M, cfg: &SuiteConfig) -> Result<VerificationReport> {
    check_arity(map)?;
    let interval = cfg.sample_interval();
    run_suite("axioms", cfg, |n, seed, index| {
        let mut rng = rng_from_seed(seed);
        let (x, y) = sample_pair(map, n, interval, index, false, &mut rng);
        let u = random_orthogonal(n, &mut rng);
        let fx = map.eval(&x)?;
        let fy = map.eval(&y)?;
        let rotated = map.eval(&x.congruence(&u))?;
        let unitary = rotated.sub(&fx.congruence(&u)).norm();
        let summed = map.eval(&x.direct_sum(&y)?)?;
        let direct = summed.sub(&fx.direct_sum(&fy)).norm();
        Ok(Trial::Margin(-unitary.max(direct) / scale_of(&[&fx, &fy])))
    })
}

/// `F(X′) ⪯ F(Y)` for coordinatewise dominated pairs `X′ ⪯ Y`.
pub fn check_monotone<M: FreeMap + ?Sized>(map: &M, cfg: &SuiteConfig) -> Result<VerificationReport> {
    check_arity(map)?;
    let interval = cfg.sample_interval();
    run_suite("monotone", cfg, |n, seed, index| {
        let mut rng = rng_from_seed(seed);
        let (x, y) = sample_pair(map, n, interval, index, false, &mut rng);
        let margin = interval.0 * rng.random_range(0.01..0.5);
        let (xp, yp) = make_dominated_pair(&x, &y, margin)?;
        let fx = map.eval(&xp)?;
        let fy = map.eval(&yp)?;
        Ok(Trial::Margin(fy.sub(&fx).min_eigenvalue() / scale_of(&[&fy])))
    })
}

/// Midpoint concavity `F((X+Y)/2) ⪰ (F(X) + F(Y))/2`.
pub fn check_concave<M: FreeMap + ?Sized>(map: &M, cfg: &SuiteConfig) -> Result<VerificationReport> {
    check_arity(map)?;
    let interval = cfg.sample_interval();
    run_suite("concave", cfg, |n, seed, index| {
        let mut rng = rng_from_seed(seed);
        let (x, y) = sample_pair(map, n, interval, index, true, &mut rng);
        let fx = map.eval(&x)?;
        let fy = map.eval(&y)?;
        let fm = map.eval(&x.midpoint(&y)?)?;
        let avg = fx.add(&fy).scale(0.5);
        Ok(Trial::Margin(fm.sub(&avg).min_eigenvalue() / scale_of(&[&fm, &fx, &fy])))
    })
}

/// `F(WᵀXW) ⪰ Wᵀ F(X) W` for isometries (even trials) and contractions (odd
/// trials) `W: ℝⁿ → ℝᴺ`, `N ≤ 8`.
pub fn check_jensen_isometry<M: FreeMap + ?Sized>(map: &M, cfg: &SuiteConfig) -> Result<VerificationReport> {
    check_arity(map)?;
    let interval = cfg.sample_interval();
    run_suite("jensen", cfg, |n, seed, index| {
        let mut rng = rng_from_seed(seed);
        let big = if n >= JENSEN_MAX_DIM { n } else { rng.random_range(n..=JENSEN_MAX_DIM) };
        let w = if index % 2 == 0 {
            isometry_with(n, big, &mut rng)?
        } else {
            contraction_with(n, big, &mut rng)?
        };
        let x = sample(map, big, interval, index / 2, &mut rng);
        let wm = w.as_matrix();
        let fx = map.eval(&x)?;
        let fc = map.eval(&x.congruence(wm))?;
        let diff = fc.sub(&fx.congruence(wm));
        Ok(Trial::Margin(diff.min_eigenvalue() / scale_of(&[&fc, &fx])))
    })
}

/// Analytic continuation to tuples `A + iB` with `B ≻ 0`: `Im F ⪰ 0` and
/// `F(X̄) = conj F(X)`. A singular pivot block counts as a failure.
pub fn check_herglotz<M: FreeMap + ?Sized>(map: &M, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let k = check_arity(map)?;
    let interval = cfg.sample_interval();
    let i = Complex::new(0.0, 1.0);
    run_suite("herglotz", cfg, |n, seed, _| {
        let mut rng = rng_from_seed(seed);
        let mut x = Vec::with_capacity(k);
        let mut xbar = Vec::with_capacity(k);
        for _ in 0..k {
            let re = random_symmetric(n, &mut rng).scale(interval.1).to_complex();
            let im = random_pd(n, interval, &mut rng).to_complex();
            x.push(&re + &im * i);
            xbar.push(&re - &im * i);
        }
        let (f, fbar) = match (map.eval_complex(&x), map.eval_complex(&xbar)) {
            (Ok(f), Ok(g)) => (f, g),
            (Err(Error::SingularPivot { .. }), _) | (_, Err(Error::SingularPivot { .. })) => {
                return Ok(Trial::Margin(f64::NEG_INFINITY))
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let scale = f.norm().max(1.0);
        let positivity = herm_eigenvalues(&imaginary_part(&f))[0] / scale;
        let symmetry = (fbar - f.map(|z| z.conj())).norm() / scale;
        Ok(Trial::Margin(positivity.min(-symmetry)))
    })
}

/// Hypograph test on commuting diagonal tuples.
///
/// `X` is diagonal on `ℝ²ⁿ`, `Y = F(X) − P` with `P ⪰ 0` (zero on every
/// fourth trial), and `V: ℝⁿ → ℝ²ⁿ` is an isometry whose column `c` is
/// supported on coordinates `{2c, 2c+1}`, so `VᵀXV` stays diagonal. The check
/// is `VᵀYV ⪯ F(VᵀXV)`. For one variable, odd trials use a general isometry.
pub fn check_hypograph_saturation<M: FreeMap + ?Sized>(map: &M, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let k = check_arity(map)?;
    let (lo, hi) = cfg.sample_interval();
    run_suite("hypograph", cfg, |n, seed, index| {
        let mut rng = rng_from_seed(seed);
        let big = 2 * n;
        let items = (0..k)
            .map(|_| {
                let d: Vec<f64> = (0..big).map(|_| rng.random_range(lo..=hi)).collect();
                SymMatrix::from_diagonal(&d)
            })
            .collect();
        let x = MatrixTuple::new(items)?.certify_commuting(0.0)?;
        let fx = map.eval(&x)?;
        let y = if index % 4 == 0 {
            fx.clone()
        } else {
            let p = random_psd(big, rng.random_range(1..=big), &mut rng);
            let room = fx.min_eigenvalue().max(0.0);
            fx.sub(&p.scale(rng.random_range(0.0..1.0) * room / p.norm().max(f64::MIN_POSITIVE)))
        };
        let v = if k == 1 && index % 2 == 1 {
            isometry_with(n, big, &mut rng)?.as_matrix().clone()
        } else {
            structured_isometry(n, &mut rng)
        };
        let compressed = x.congruence(&v);
        let compressed = if k == 1 { compressed } else { compressed.certify_commuting(0.0)? };
        let fc = map.eval(&compressed)?;
        let diff = fc.sub(&y.congruence(&v));
        Ok(Trial::Margin(diff.min_eigenvalue() / scale_of(&[&fc, &fx])))
    })
}

/// Isometry `ℝⁿ → ℝ²ⁿ` with column `c` a random unit vector on `{2c, 2c+1}`.
fn structured_isometry(n: usize, rng: &mut TestRng) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(2 * n, n);
    for c in 0..n {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        v[(2 * c, c)] = theta.cos();
        v[(2 * c + 1, c)] = theta.sin();
    }
    v
}
