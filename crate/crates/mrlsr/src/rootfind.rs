//! The scalar reduction of the variable-exponent problem and its root
//! search.
//!
//! In the eigenbasis of the Gram matrix the whole fit collapses to one
//! scalar equation `F(C) = S(C)^(m/2 - 1) - C = 0` with
//! `S(C) = sum_i 4 d_i y_i'^2 / (2 d_i + lambda m n C)^2`.
//! For `m > 1` the function is strictly concave with `F(0) > 0`, so it has
//! exactly one root and a bracketed Newton search is guaranteed to find it.
//! For `m <= 1` several roots may exist (or none); a damped Newton search is
//! launched from ten starts spaced logarithmically between 1 and 10^4 and
//! every distinct converged point is reported.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Residual tolerance on `|F(C)|`. The double-precision analogue of the
/// reference precision; see `find_root_unique`.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Iteration cap per root search.
pub const DEFAULT_MAX_ITER: usize = 500;

/// Number of multi-start initial values for `m <= 1`.
pub const MULTISTART_COUNT: usize = 10;

/// Multi-start range `[1, 10^4]`, log-spaced.
pub const MULTISTART_RANGE: (f64, f64) = (1.0, 1e4);

/// Inputs of the scalar root problem: the Gram spectrum, the rotated
/// targets, and the scalars of the composite coefficient `a = lambda m n`.
#[derive(Debug, Clone)]
pub struct RootProblem {
    eigenvalues: DVector<f64>,
    rotated_targets: DVector<f64>,
    lambda: f64,
    m: f64,
    n: usize,
}

impl RootProblem {
    pub fn new(
        eigenvalues: DVector<f64>,
        rotated_targets: DVector<f64>,
        lambda: f64,
        m: f64,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if rotated_targets.len() != n {
            return Err(Error::DimensionMismatch {
                context: "rotated targets vs eigenvalues",
                expected: n,
                got: rotated_targets.len(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                requirement: "must be positive and finite",
            });
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                requirement: "must be positive and finite",
            });
        }
        if eigenvalues.iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidParameter {
                name: "eigenvalue",
                value: eigenvalues.min(),
                requirement: "eigenvalues must be non-negative",
            });
        }
        Ok(Self {
            eigenvalues,
            rotated_targets,
            lambda,
            m,
            n,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Composite coefficient `a = lambda * m * n`.
    pub fn coefficient(&self) -> f64 {
        self.lambda * self.m * self.n as f64
    }

    /// True when some eigen-direction carries both a positive eigenvalue
    /// and a non-zero target component. When false the targets vanish on
    /// the range of the kernel matrix and `S` is identically zero.
    pub fn has_signal(&self) -> bool {
        self.eigenvalues
            .iter()
            .zip(self.rotated_targets.iter())
            .any(|(&d, &y)| d > 0.0 && y != 0.0)
    }

    /// `S(C)` and `S'(C)`. Terms with a zero eigenvalue contribute nothing
    /// and are skipped.
    fn sum_and_derivative(&self, c: f64) -> (f64, f64) {
        let a = self.coefficient();
        let mut s = 0.0;
        let mut s_cubed = 0.0;
        for (&d, &y) in self.eigenvalues.iter().zip(self.rotated_targets.iter()) {
            if d == 0.0 {
                continue;
            }
            let denom = 2.0 * d + a * c;
            let num = 4.0 * d * y * y;
            s += num / (denom * denom);
            s_cubed += num / (denom * denom * denom);
        }
        (s, -2.0 * a * s_cubed)
    }

    fn check_domain(&self, c: f64) -> Result<()> {
        if c.is_nan() || c < 0.0 {
            return Err(Error::InvalidParameter {
                name: "C",
                value: c,
                requirement: "must be non-negative",
            });
        }
        if self.m < 2.0 && !self.has_signal() {
            return Err(Error::DegenerateTargets { m: self.m });
        }
        Ok(())
    }
}

/// Evaluate `F(C) = S(C)^(m/2 - 1) - C`.
///
/// `m = 2` short-circuits to exactly `1 - C`, avoiding the `0^0` trap when
/// `S` vanishes.
pub fn eval_f(problem: &RootProblem, c: f64) -> Result<f64> {
    problem.check_domain(c)?;
    if problem.m == 2.0 {
        return Ok(1.0 - c);
    }
    let (s, _) = problem.sum_and_derivative(c);
    Ok(s.powf(0.5 * problem.m - 1.0) - c)
}

/// Evaluate `F'(C) = (m/2 - 1) S(C)^(m/2 - 2) S'(C) - 1`.
///
/// For `m = 2` this is exactly `-1`; when `S` has decayed to zero the tail
/// slope is also `-1`.
pub fn eval_f_prime(problem: &RootProblem, c: f64) -> Result<f64> {
    problem.check_domain(c)?;
    if problem.m == 2.0 {
        return Ok(-1.0);
    }
    let (s, s_prime) = problem.sum_and_derivative(c);
    if s == 0.0 {
        return Ok(-1.0);
    }
    let exponent = 0.5 * problem.m - 1.0;
    Ok(exponent * s.powf(exponent - 1.0) * s_prime - 1.0)
}

/// How a root was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    /// Bracketed Newton on the unique root (`m > 1`).
    NewtonUnique,
    /// Damped Newton from log-spaced starts (`m <= 1`).
    MultiStart,
}

/// One accepted root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCandidate {
    pub c0: f64,
    /// `|F(c0)|` at acceptance.
    pub residual: f64,
    /// Function evaluations spent on this root.
    pub iterations: usize,
    pub start_value: f64,
}

/// Outcome of one search trajectory, converged or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start_value: f64,
    pub converged_to: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Root-search result: the distinct roots found plus per-start diagnostics.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub roots: Vec<RootCandidate>,
    pub trajectories: Vec<Trajectory>,
    pub method: RootMethod,
}

/// Find the unique root for `m > 1`.
///
/// A sign-change bracket is grown by doubling from `[0, 1]`, then refined by
/// Newton steps that fall back to bisection whenever a step leaves the
/// bracket or the derivative is unusable. `iterations` counts function
/// evaluations, bracketing included.
pub fn find_root_unique(problem: &RootProblem, tol: f64, max_iter: usize) -> Result<RootReport> {
    if problem.m <= 1.0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: problem.m,
            requirement: "unique-root search requires m > 1",
        });
    }
    let mut iterations = 0;

    let mut lo = 0.0;
    iterations += 1;
    let mut f_lo = eval_f(problem, 0.0)?;
    if f_lo.abs() <= tol {
        return Ok(report_single(
            0.0,
            f_lo,
            iterations,
            0.0,
            RootMethod::NewtonUnique,
        ));
    }
    if f_lo < 0.0 {
        // cannot happen for a valid problem: F(0) = S(0)^(m/2-1) > 0
        return Err(Error::RootNotConverged {
            max_iter,
            lo: 0.0,
            hi: 0.0,
        });
    }

    let mut hi = 1.0;
    let mut f_hi;
    loop {
        iterations += 1;
        f_hi = eval_f(problem, hi)?;
        if f_hi.abs() <= tol {
            return Ok(report_single(
                hi,
                f_hi,
                iterations,
                hi,
                RootMethod::NewtonUnique,
            ));
        }
        if f_hi < 0.0 {
            break;
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if iterations >= max_iter || !hi.is_finite() || hi > 1e300 {
            return Err(Error::RootNotConverged { max_iter, lo, hi });
        }
    }
    debug_assert!(f_lo > 0.0 && f_hi < 0.0);

    let start = 0.5 * (lo + hi);
    let mut x = start;
    while iterations < max_iter {
        iterations += 1;
        let fx = eval_f(problem, x)?;
        if fx.abs() <= tol {
            return Ok(report_single(
                x,
                fx,
                iterations,
                start,
                RootMethod::NewtonUnique,
            ));
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = eval_f_prime(problem, x)?;
        let newton = x - fx / slope;
        x = if slope.is_finite() && slope.abs() > f64::MIN_POSITIVE && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::RootNotConverged { max_iter, lo, hi })
}

fn report_single(
    c0: f64,
    f_value: f64,
    iterations: usize,
    start_value: f64,
    method: RootMethod,
) -> RootReport {
    RootReport {
        roots: vec![RootCandidate {
            c0,
            residual: f_value.abs(),
            iterations,
            start_value,
        }],
        trajectories: vec![Trajectory {
            start_value,
            converged_to: Some(c0),
            residual: f_value.abs(),
            iterations,
        }],
        method,
    }
}

/// The ten log-spaced multi-start initial values.
pub fn multistart_values() -> Vec<f64> {
    let (lo, hi) = MULTISTART_RANGE;
    let (log_lo, log_hi) = (lo.log10(), hi.log10());
    (0..MULTISTART_COUNT)
        .map(|k| {
            let t = k as f64 / (MULTISTART_COUNT - 1) as f64;
            10f64.powf(log_lo + t * (log_hi - log_lo))
        })
        .collect()
}

/// Multi-start damped Newton search for `m <= 1`, where `F` may have
/// several roots or none.
///
/// Each trajectory halves its Newton step (up to 30 times) until `|F|`
/// decreases; converged endpoints closer than `1e-8 * (1 + |C|)` are merged.
/// Failing to converge from every start is an error carrying the per-start
/// diagnostics.
pub fn find_roots_multistart(
    problem: &RootProblem,
    tol: f64,
    max_iter: usize,
) -> Result<RootReport> {
    if problem.m > 1.0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: problem.m,
            requirement: "multi-start search is for m <= 1",
        });
    }

    let mut trajectories = Vec::with_capacity(MULTISTART_COUNT);
    for start in multistart_values() {
        trajectories.push(run_trajectory(problem, start, tol, max_iter)?);
    }

    let mut converged: Vec<&Trajectory> = trajectories
        .iter()
        .filter(|t| t.converged_to.is_some())
        .collect();
    if converged.is_empty() {
        return Err(Error::NoRootFound {
            starts: trajectories.iter().map(|t| t.start_value).collect(),
            residuals: trajectories.iter().map(|t| t.residual).collect(),
        });
    }
    converged.sort_by(|a, b| {
        a.converged_to
            .unwrap()
            .partial_cmp(&b.converged_to.unwrap())
            .expect("converged roots are finite")
    });

    let mut roots: Vec<RootCandidate> = Vec::new();
    for t in converged {
        let c0 = t.converged_to.unwrap();
        let duplicate = roots
            .iter()
            .any(|r| (r.c0 - c0).abs() <= 1e-8 * (1.0 + c0.abs()));
        if !duplicate {
            roots.push(RootCandidate {
                c0,
                residual: t.residual,
                iterations: t.iterations,
                start_value: t.start_value,
            });
        }
    }

    Ok(RootReport {
        roots,
        trajectories,
        method: RootMethod::MultiStart,
    })
}

fn run_trajectory(
    problem: &RootProblem,
    start: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Trajectory> {
    let mut x = start;
    let mut fx = eval_f(problem, x)?;
    let mut iterations = 1;
    while iterations < max_iter {
        if fx.abs() <= tol {
            return Ok(Trajectory {
                start_value: start,
                converged_to: Some(x),
                residual: fx.abs(),
                iterations,
            });
        }
        let slope = eval_f_prime(problem, x)?;
        if !slope.is_finite() || slope.abs() < f64::MIN_POSITIVE || !fx.is_finite() {
            break;
        }
        let step = -fx / slope;

        // damp: halve until |F| decreases and the iterate stays in C >= 0
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..30 {
            let cand = x + t * step;
            if cand >= 0.0 {
                let f_cand = eval_f(problem, cand)?;
                iterations += 1;
                if f_cand.abs() < fx.abs() {
                    x = cand;
                    fx = f_cand;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fx.abs() <= tol {
        return Ok(Trajectory {
            start_value: start,
            converged_to: Some(x),
            residual: fx.abs(),
            iterations,
        });
    }
    Ok(Trajectory {
        start_value: start,
        converged_to: None,
        residual: fx.abs(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(d: &[f64], y: &[f64], lambda: f64, m: f64) -> RootProblem {
        RootProblem::new(
            DVector::from_row_slice(d),
            DVector::from_row_slice(y),
            lambda,
            m,
        )
        .unwrap()
    }

    fn random_problem(seed: u64, m: f64, n: usize) -> RootProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 3.0).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let lambda = 10f64.powf(rng.random::<f64>() * 3.0 - 3.0);
        problem(&d, &y, lambda, m)
    }

    #[test]
    fn quadratic_case_is_one_minus_c() {
        let p = problem(&[1.0, 0.5], &[1.0, -2.0], 0.3, 2.0);
        assert_eq!(eval_f(&p, 0.25).unwrap(), 0.75);
        assert_eq!(eval_f(&p, 7.0).unwrap(), -6.0);
        assert_eq!(eval_f_prime(&p, 0.9).unwrap(), -1.0);
    }

    #[test]
    fn hand_case_m4_at_zero() {
        // S(0) = 4 * 1 * 1 / (2 * 1)^2 = 1, so F(0) = 1^1 - 0 = 1
        let p = problem(&[1.0], &[1.0], 1.0, 4.0);
        assert_eq!(eval_f(&p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn value_matches_independent_summation() {
        let p = problem(&[2.0, 0.5], &[1.0, -1.0], 0.1, 3.0);
        let c = 1.0;
        // direct recomputation: a = 0.1 * 3 * 2 = 0.6
        let a = 0.6_f64;
        let s = 4.0 * 2.0 * 1.0 / (2.0 * 2.0 + a * c).powi(2)
            + 4.0 * 0.5 * 1.0 / (2.0 * 0.5 + a * c).powi(2);
        let want = s.powf(0.5) - c;
        assert!((eval_f(&p, c).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn zero_rank_problems_follow_the_degenerate_contract() {
        let p15 = problem(&[0.0, 0.0], &[1.0, 2.0], 1.0, 1.5);
        assert!(matches!(
            eval_f(&p15, 0.5),
            Err(Error::DegenerateTargets { .. })
        ));
        assert!(matches!(
            eval_f_prime(&p15, 0.5),
            Err(Error::DegenerateTargets { .. })
        ));

        let p2 = problem(&[0.0, 0.0], &[1.0, 2.0], 1.0, 2.0);
        assert_eq!(eval_f(&p2, 0.5).unwrap(), 0.5);
        assert_eq!(eval_f_prime(&p2, 0.5).unwrap(), -1.0);

        let p3 = problem(&[0.0, 0.0], &[1.0, 2.0], 1.0, 3.0);
        assert_eq!(eval_f(&p3, 0.5).unwrap(), -0.5); // 0^(1/2) - C
        assert_eq!(eval_f_prime(&p3, 0.5).unwrap(), -1.0);
    }

    #[test]
    fn negative_c_is_out_of_domain() {
        let p = problem(&[1.0], &[1.0], 1.0, 3.0);
        assert!(eval_f(&p, -0.1).is_err());
    }

    #[test]
    fn derivative_matches_central_difference() {
        for (i, &m) in [1.2, 1.5, 2.0, 2.5, 4.0].iter().enumerate() {
            for seed in 0..4u64 {
                let p = random_problem(100 + seed + 10 * i as u64, m, 5);
                for &c in &[0.1_f64, 0.3, 0.7, 2.0] {
                    let h = 1e-6 * (1.0 + c);
                    let fd = (eval_f(&p, c + h).unwrap() - eval_f(&p, c - h).unwrap()) / (2.0 * h);
                    let an = eval_f_prime(&p, c).unwrap();
                    assert!(
                        (fd - an).abs() <= 1e-5 * (1.0 + an.abs()),
                        "m={m} c={c}: fd={fd} analytic={an}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadratic_root_is_exactly_one_in_two_evaluations() {
        let p = random_problem(7, 2.0, 12);
        let report = find_root_unique(&p, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        let root = &report.roots[0];
        assert_eq!(root.c0, 1.0);
        assert!(root.iterations <= 2, "took {} evaluations", root.iterations);
        assert_eq!(report.method, RootMethod::NewtonUnique);
    }

    #[test]
    fn quartic_hand_problem_matches_bisection_oracle() {
        // n=1, d=1, y'=1, lambda=1, m=4 (a = 4): F(C) = 4 / (2 + 4C)^2 - C
        let p = problem(&[1.0], &[1.0], 1.0, 4.0);
        let f = |c: f64| 4.0 / (2.0 + 4.0 * c).powi(2) - c;

        // independent bisection oracle
        let (mut lo, mut hi) = (0.0, 1.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);

        let report = find_root_unique(&p, 1e-14, DEFAULT_MAX_ITER).unwrap();
        let c0 = report.roots[0].c0;
        assert!((c0 - oracle).abs() < 1e-10, "c0={c0} oracle={oracle}");
        // the root satisfies the cubic 4 = C (2 + 4C)^2
        assert!((c0 * (2.0 + 4.0 * c0).powi(2) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn unique_root_has_certificate_for_fractional_m() {
        for seed in 0..10u64 {
            let p = random_problem(300 + seed, 1.5, 3);
            let report = find_root_unique(&p, 1e-12, DEFAULT_MAX_ITER).unwrap();
            let c0 = report.roots[0].c0;
            assert!(eval_f(&p, c0).unwrap().abs() <= 1e-12);

            // verified sign change around the root
            let mut eps = 1e-9 * (1.0 + c0);
            let mut certified = false;
            while eps <= 1e-2 * (1.0 + c0) {
                let left = eval_f(&p, (c0 - eps).max(0.0)).unwrap();
                let right = eval_f(&p, c0 + eps).unwrap();
                if left > 0.0 && right < 0.0 {
                    certified = true;
                    break;
                }
                eps *= 10.0;
            }
            assert!(certified, "no sign change certificate for seed {seed}");
        }
    }

    #[test]
    fn f_is_positive_at_zero_for_m_above_one() {
        for seed in 0..20u64 {
            let m = [1.1, 1.5, 2.0, 3.0, 4.5][seed as usize % 5];
            let p = random_problem(500 + seed, m, 8);
            assert!(eval_f(&p, 0.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn unique_search_rejects_small_m() {
        let p = problem(&[1.0], &[1.0], 1.0, 0.8);
        assert!(find_root_unique(&p, 1e-12, 100).is_err());
    }

    #[test]
    fn multistart_finds_hand_root_two_thirds() {
        // m=1, n=1, d=1, y'=2, lambda=1 (a = 1):
        // S(C) = 16 / (2 + C)^2, F(C) = (2 + C) / 4 - C, root at 2/3
        let p = problem(&[1.0], &[2.0], 1.0, 1.0);
        let report = find_roots_multistart(&p, 1e-12, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(report.method, RootMethod::MultiStart);
        assert_eq!(report.roots.len(), 1, "strictly monotone F has one root");
        assert!((report.roots[0].c0 - 2.0 / 3.0).abs() < 1e-10);
        // all ten trajectories are reported even after deduplication
        assert_eq!(report.trajectories.len(), MULTISTART_COUNT);
        assert!(report.trajectories.iter().all(|t| t.converged_to.is_some()));
    }

    #[test]
    fn multistart_rejects_m_above_one() {
        let p = problem(&[1.0], &[1.0], 1.0, 1.5);
        assert!(find_roots_multistart(&p, 1e-12, 100).is_err());
    }

    #[test]
    fn multistart_values_are_log_spaced() {
        let starts = multistart_values();
        assert_eq!(starts.len(), 10);
        assert!((starts[0] - 1.0).abs() < 1e-12);
        assert!((starts[9] - 1e4).abs() < 1e-8);
        for w in starts.windows(2) {
            assert!((w[1] / w[0] - starts[1] / starts[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn every_accepted_root_satisfies_the_residual_bound() {
        for seed in 0..8u64 {
            let m = [0.3, 0.5, 0.8, 1.0][seed as usize % 4];
            let p = random_problem(900 + seed, m, 6);
            match find_roots_multistart(&p, 1e-12, DEFAULT_MAX_ITER) {
                Ok(report) => {
                    assert!(!report.roots.is_empty());
                    for r in &report.roots {
                        assert!(r.residual <= 1e-12);
                        assert!(eval_f(&p, r.c0).unwrap().abs() <= 1e-12);
                    }
                }
                Err(Error::NoRootFound { .. }) => {} // legitimate for m <= 1
                Err(other) => panic!("unexpected error: {other}"),
            }
        }
    }
}
