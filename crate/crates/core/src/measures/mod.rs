//! Finitely supported probability measures on positive definite matrices:
//! stochastic order through monotone couplings, step-function
//! representations, and operator means of measures.

mod flow;
mod means;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::numlin::random::rng_from_seed;
use crate::numlin::{loewner_leq, SymMatrix};
use flow::FlowNetwork;

pub use means::{
    check_directsum_coupling, check_stochastic_monotone, mean_of_measure, power_mean, MeanSpec, PowerMean,
    POWER_MEAN_MAX_ITERATIONS,
};

/// Largest combined support accepted by the brute-force oracle.
pub const BRUTE_FORCE_LIMIT: usize = 20;
/// Slack on the total flow when deciding feasibility.
pub const FEASIBILITY_SLACK: f64 = 1e-10;
const WEIGHT_SUM_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<SymMatrix>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<SymMatrix>, weights: Vec<f64>) -> Result<Self> {
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
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {sum}, not 1")));
        }
        for a in &atoms {
            let m = a.min_eigenvalue();
            if !(m > 0.0) {
                return Err(Error::NotPd { min_eigenvalue: m });
            }
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn dirac(a: SymMatrix) -> Result<Self> {
        Self::new(vec![a], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[SymMatrix] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Joint weights `γ` with marginals `μ` (rows) and `ν` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    gamma: DMatrix<f64>,
}

impl Coupling {
    pub fn new(gamma: DMatrix<f64>, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        if gamma.shape() != (mu.len(), nu.len()) {
            return Err(Error::Dimension(format!(
                "coupling is {}x{}, marginals have {} and {} atoms",
                gamma.nrows(),
                gamma.ncols(),
                mu.len(),
                nu.len()
            )));
        }
        if gamma.iter().any(|&g| !(g >= 0.0)) {
            return Err(Error::InvalidCoupling("entries must be nonnegative".into()));
        }
        for (i, &w) in mu.weights().iter().enumerate() {
            let s = gamma.row(i).sum();
            if (s - w).abs() > MARGINAL_TOL {
                return Err(Error::InvalidCoupling(format!("row {i} sums to {s}, expected {w}")));
            }
        }
        for (j, &w) in nu.weights().iter().enumerate() {
            let s = gamma.column(j).sum();
            if (s - w).abs() > MARGINAL_TOL {
                return Err(Error::InvalidCoupling(format!("column {j} sums to {s}, expected {w}")));
            }
        }
        Ok(Coupling { gamma })
    }

    pub fn product(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let gamma = DMatrix::from_fn(mu.len(), nu.len(), |i, j| mu.weights()[i] * nu.weights()[j]);
        Coupling { gamma }
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    /// The measure with atoms `A_i ⊕ B_j` and weights `γ_ij` (zero cells dropped).
    pub fn direct_sum_measure(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for i in 0..mu.len() {
            for j in 0..nu.len() {
                let g = self.gamma[(i, j)];
                if g > 0.0 {
                    atoms.push(mu.atoms()[i].direct_sum(&nu.atoms()[j]));
                    weights.push(g);
                }
            }
        }
        DiscreteMeasure::new(atoms, weights)
    }
}

/// Witness that `μ ≰ ν`: an upper set `U`, generated by some atoms of `μ`,
/// with `μ(U) > ν(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperSetCertificate {
    pub mu_in_u: Vec<usize>,
    pub nu_in_u: Vec<usize>,
    pub mu_mass: f64,
    pub nu_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderVerdict {
    Leq(Coupling),
    NotLeq(UpperSetCertificate),
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, OrderVerdict::Leq(_))
    }
}

fn check_same_dim(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::Dimension(format!("measures on dimensions {} and {}", mu.dim(), nu.dim())));
    }
    Ok(())
}

/// `relation[i][j] = A_i ⪯ B_j` within `tol`.
fn relation(a: &[SymMatrix], b: &[SymMatrix], tol: f64) -> Result<Vec<Vec<bool>>> {
    a.iter().map(|x| b.iter().map(|y| loewner_leq(x, y, tol)).collect()).collect()
}

/// Decides `μ ≤ ν` in the stochastic order by transportation feasibility on
/// the Loewner relation between atoms.
pub fn stochastic_leq(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: f64) -> Result<OrderVerdict> {
    check_same_dim(mu, nu)?;
    let (p, q) = (mu.len(), nu.len());
    let edges = relation(mu.atoms(), nu.atoms(), tol)?;
    let source = 0;
    let sink = p + q + 1;
    let mut g = FlowNetwork::new(p + q + 2);
    for (i, &w) in mu.weights().iter().enumerate() {
        g.add_edge(source, 1 + i, w);
    }
    for (j, &w) in nu.weights().iter().enumerate() {
        g.add_edge(1 + p + j, sink, w);
    }
    for (i, row) in edges.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            if e {
                g.add_edge(1 + i, 1 + p + j, f64::INFINITY);
            }
        }
    }
    let total = g.max_flow(source, sink);
    if total >= 1.0 - FEASIBILITY_SLACK {
        let gamma = DMatrix::from_fn(p, q, |i, j| if edges[i][j] { g.flow(1 + i, 1 + p + j) } else { 0.0 });
        return Ok(OrderVerdict::Leq(Coupling::new(gamma, mu, nu)?));
    }
    let side = g.reachable(source);
    let generators: Vec<usize> = (0..p).filter(|&i| side[1 + i]).collect();
    let mu_rel = relation(mu.atoms(), mu.atoms(), tol)?;
    let mu_in_u: Vec<usize> = (0..p).filter(|&k| generators.iter().any(|&i| mu_rel[i][k])).collect();
    let nu_in_u: Vec<usize> = (0..q).filter(|&j| generators.iter().any(|&i| edges[i][j])).collect();
    let mu_mass = mu_in_u.iter().map(|&i| mu.weights()[i]).fold(0.0, |a, w| a + w);
    let nu_mass = nu_in_u.iter().map(|&j| nu.weights()[j]).fold(0.0, |a, w| a + w);
    Ok(OrderVerdict::NotLeq(UpperSetCertificate { mu_in_u, nu_in_u, mu_mass, nu_mass }))
}

/// Exhaustive check of `μ(U) ≤ ν(U)` over every upper set of the finite poset
/// spanned by both supports (transitive closure of the Loewner relation),
/// enumerated as upward closures of antichains.
pub fn brute_force_stochastic_leq(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: f64) -> Result<bool> {
    check_same_dim(mu, nu)?;
    let size = mu.len() + nu.len();
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::SupportTooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }
    let atoms: Vec<SymMatrix> = mu.atoms().iter().chain(nu.atoms()).cloned().collect();
    let mass: Vec<(f64, f64)> = mu
        .weights()
        .iter()
        .map(|&w| (w, 0.0))
        .chain(nu.weights().iter().map(|&w| (0.0, w)))
        .collect();
    let mut leq = relation(&atoms, &atoms, tol)?;
    for k in 0..size {
        for i in 0..size {
            if leq[i][k] {
                for j in 0..size {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    // One representative per equivalence class.
    let reps: Vec<usize> = (0..size).filter(|&i| (0..i).all(|j| !(leq[i][j] && leq[j][i]))).collect();
    let mut chosen = Vec::new();
    Ok(antichains_ok(&leq, &mass, &reps, 0, &mut chosen))
}

fn antichains_ok(leq: &[Vec<bool>], mass: &[(f64, f64)], reps: &[usize], start: usize, chosen: &mut Vec<usize>) -> bool {
    if !chosen.is_empty() {
        let (mut m, mut n) = (0.0, 0.0);
        for (z, &(a, b)) in mass.iter().enumerate() {
            if chosen.iter().any(|&g| leq[g][z]) {
                m += a;
                n += b;
            }
        }
        if m > n + FEASIBILITY_SLACK {
            return false;
        }
    }
    for (pos, &r) in reps.iter().enumerate().skip(start) {
        if chosen.iter().all(|&c| !leq[c][r] && !leq[r][c]) {
            chosen.push(r);
            let ok = antichains_ok(leq, mass, reps, pos + 1, chosen);
            chosen.pop();
            if !ok {
                return false;
            }
        }
    }
    true
}

/// A step function on `[0, 1)`: interval `[t_{l}, t_{l+1})` maps to atom `atoms[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRepresentation {
    pub breakpoints: Vec<f64>,
    pub atoms: Vec<usize>,
}

impl StepRepresentation {
    /// Lebesgue measure of the preimage of each atom index `0..count`.
    pub fn pushforward(&self, count: usize) -> Vec<f64> {
        let mut w = vec![0.0; count];
        for (l, &a) in self.atoms.iter().enumerate() {
            w[a] += self.breakpoints[l + 1] - self.breakpoints[l];
        }
        w
    }
}

/// Lays the cells of a monotone coupling on `[0, 1)` in lexicographic order,
/// giving step functions `ξ_μ ⪯ ξ_ν` pointwise with laws `μ` and `ν`.
pub fn monotone_representation(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    coupling: &Coupling,
    tol: f64,
) -> Result<(StepRepresentation, StepRepresentation)> {
    check_same_dim(mu, nu)?;
    let gamma = coupling.gamma();
    if gamma.shape() != (mu.len(), nu.len()) {
        return Err(Error::Dimension("coupling does not match the measures".into()));
    }
    let mut breakpoints = vec![0.0];
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut t = 0.0;
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            let g = gamma[(i, j)];
            if g > 0.0 {
                if !loewner_leq(&mu.atoms()[i], &nu.atoms()[j], tol)? {
                    return Err(Error::InvalidCoupling(format!("mass on the unordered pair ({i}, {j})")));
                }
                t += g;
                breakpoints.push(t);
                left.push(i);
                right.push(j);
            }
        }
    }
    Ok((
        StepRepresentation { breakpoints: breakpoints.clone(), atoms: left },
        StepRepresentation { breakpoints, atoms: right },
    ))
}

/// The product coupling followed by `count − 1` northwest-corner couplings
/// under random row and column orders.
pub fn couplings_sample(mu: &DiscreteMeasure, nu: &DiscreteMeasure, count: usize, seed: u64) -> Vec<Coupling> {
    let mut rng = rng_from_seed(seed);
    let mut out = vec![Coupling::product(mu, nu)];
    let (p, q) = (mu.len(), nu.len());
    while out.len() < count {
        let mut rows: Vec<usize> = (0..p).collect();
        let mut cols: Vec<usize> = (0..q).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let mut supply: Vec<f64> = rows.iter().map(|&i| mu.weights()[i]).collect();
        let mut demand: Vec<f64> = cols.iter().map(|&j| nu.weights()[j]).collect();
        let mut gamma = DMatrix::zeros(p, q);
        let (mut a, mut b) = (0, 0);
        while a < p && b < q {
            let amount = supply[a].min(demand[b]);
            gamma[(rows[a], cols[b])] += amount;
            supply[a] -= amount;
            demand[b] -= amount;
            if supply[a] <= demand[b] {
                a += 1;
            } else {
                b += 1;
            }
        }
        out.push(Coupling { gamma });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::random::{random_pd, random_psd};

    fn d(diag: &[f64]) -> SymMatrix {
        SymMatrix::from_diagonal(diag)
    }

    #[test]
    fn dirac_examples() {
        let mu = DiscreteMeasure::dirac(d(&[1.0, 1.0])).unwrap();
        let nu = DiscreteMeasure::dirac(d(&[2.0, 2.0])).unwrap();
        match stochastic_leq(&mu, &nu, 1e-9).unwrap() {
            OrderVerdict::Leq(c) => assert_eq!(c.gamma(), &DMatrix::from_element(1, 1, 1.0)),
            other => panic!("{other:?}"),
        }
        assert!(brute_force_stochastic_leq(&mu, &nu, 1e-9).unwrap());
        assert!(!stochastic_leq(&nu, &mu, 1e-9).unwrap().holds());
    }

    #[test]
    fn two_atoms_below_one() {
        let mu = DiscreteMeasure::new(vec![d(&[1.0, 2.0]), d(&[2.0, 1.0])], vec![0.5, 0.5]).unwrap();
        let nu = DiscreteMeasure::dirac(d(&[3.0, 3.0])).unwrap();
        assert!(stochastic_leq(&mu, &nu, 1e-9).unwrap().holds());
        assert!(brute_force_stochastic_leq(&mu, &nu, 1e-9).unwrap());
    }

    #[test]
    fn incomparable_singletons_give_certificate() {
        let eps = 0.1;
        let mu = DiscreteMeasure::dirac(d(&[2.0 + eps, 0.5 + eps])).unwrap();
        let nu = DiscreteMeasure::dirac(d(&[1.0 + eps, 1.0 + eps])).unwrap();
        match stochastic_leq(&mu, &nu, 1e-9).unwrap() {
            OrderVerdict::NotLeq(c) => {
                assert_eq!(c.mu_in_u, vec![0]);
                assert!(c.nu_in_u.is_empty());
                assert!(c.mu_mass > c.nu_mass);
            }
            other => panic!("{other:?}"),
        }
        assert!(!brute_force_stochastic_leq(&mu, &nu, 1e-9).unwrap());
    }

    #[test]
    fn reflexive() {
        let mut rng = rng_from_seed(70);
        let atoms: Vec<_> = (0..4).map(|_| random_pd(3, (0.5, 2.0), &mut rng)).collect();
        let mu = DiscreteMeasure::new(atoms, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(stochastic_leq(&mu, &mu, 1e-9).unwrap().holds());
        assert!(brute_force_stochastic_leq(&mu, &mu, 1e-9).unwrap());
    }

    #[test]
    fn brute_force_limit() {
        let mut weights = vec![0.05; 10];
        weights.push(0.5);
        let mu = DiscreteMeasure::new(vec![SymMatrix::identity(1); 11], weights).unwrap();
        assert!(matches!(
            brute_force_stochastic_leq(&mu, &mu, 1e-9),
            Err(Error::SupportTooLarge { size: 22, .. })
        ));
    }

    #[test]
    fn representation_recovers_marginals() {
        let mu = DiscreteMeasure::new(vec![d(&[1.0]), d(&[2.0])], vec![0.25, 0.75]).unwrap();
        let nu = DiscreteMeasure::new(vec![d(&[3.0]), d(&[4.0])], vec![0.5, 0.5]).unwrap();
        let c = Coupling::product(&mu, &nu);
        let (a, b) = monotone_representation(&mu, &nu, &c, 1e-9).unwrap();
        assert_eq!(a.atoms.len(), 4);
        assert_eq!(a.pushforward(2), vec![0.25, 0.75]);
        assert_eq!(b.pushforward(2), vec![0.5, 0.5]);
        assert_eq!(*a.breakpoints.last().unwrap(), 1.0);

        let single = Coupling::product(&DiscreteMeasure::dirac(d(&[1.0])).unwrap(), &DiscreteMeasure::dirac(d(&[1.0])).unwrap());
        let one = DiscreteMeasure::dirac(d(&[1.0])).unwrap();
        let (a, _) = monotone_representation(&one, &one, &single, 1e-9).unwrap();
        assert_eq!(a.breakpoints, vec![0.0, 1.0]);

        let reversed = Coupling::product(&nu, &mu);
        assert!(monotone_representation(&nu, &mu, &reversed, 1e-9).is_err());
    }

    #[test]
    fn sampled_couplings_are_valid() {
        let mut rng = rng_from_seed(71);
        let mu = DiscreteMeasure::new((0..3).map(|_| random_pd(2, (1.0, 2.0), &mut rng)).collect(), vec![0.2, 0.3, 0.5])
            .unwrap();
        let nu = DiscreteMeasure::new((0..2).map(|_| random_pd(2, (1.0, 2.0), &mut rng)).collect(), vec![0.6, 0.4])
            .unwrap();
        let cs = couplings_sample(&mu, &nu, 11, 3);
        assert_eq!(cs.len(), 11);
        assert_eq!(cs[0], Coupling::product(&mu, &nu));
        for c in &cs {
            Coupling::new(c.gamma().clone(), &mu, &nu).unwrap();
        }
        let single = DiscreteMeasure::dirac(SymMatrix::identity(2)).unwrap();
        for c in couplings_sample(&single, &nu, 5, 4) {
            assert_eq!(c.gamma().row(0).transpose().as_slice(), nu.weights());
        }
    }

    #[test]
    fn increments_are_detected_as_ordered() {
        let mut rng = rng_from_seed(72);
        for _ in 0..20 {
            let atoms: Vec<_> = (0..3).map(|_| random_pd(3, (0.5, 2.0), &mut rng)).collect();
            let bigger: Vec<_> = atoms.iter().map(|a| a.add(&random_psd(3, 2, &mut rng))).collect();
            let mu = DiscreteMeasure::new(atoms, vec![0.5, 0.25, 0.25]).unwrap();
            let nu = DiscreteMeasure::new(bigger, vec![0.5, 0.25, 0.25]).unwrap();
            let v = stochastic_leq(&mu, &nu, 1e-9).unwrap();
            assert!(v.holds());
            if let OrderVerdict::Leq(c) = v {
                monotone_representation(&mu, &nu, &c, 1e-9).unwrap();
            }
        }
    }
}
