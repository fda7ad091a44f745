//! Seeded randomized invariant suites over the σ_k calculus and `log σ_k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symkernel::{
    check_identities, check_newton_maclaurin, f_log_sigma, in_gamma_k, lemma22_bound, ConeOrder, EigenTuple, SymMatrix2,
};

pub const IDENTITY_TOL: f64 = 1e-12;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const CONCAVITY_SLACK: f64 = 1e-10;

/// Sample counts per suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    pub identities: usize,
    pub cone: usize,
    pub mixed_bound: usize,
    pub gradient: usize,
    pub concavity: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            identities: 10_000,
            cone: 10_000,
            mixed_bound: 10_000,
            gradient: 100,
            concavity: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Largest observed defect, in the units of `tol`.
    pub worst: f64,
    pub tol: f64,
}

impl SuiteResult {
    pub fn passes(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passes(&self) -> bool {
        self.suites.iter().all(SuiteResult::passes)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

fn order(k: usize) -> ConeOrder {
    ConeOrder::new(k).expect("k >= 1")
}

fn tuple(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..=3.0)).collect()
}

/// Uniform tuple in `[-3,3]^n` conditioned into Γ_k by rejection.
pub fn sample_in_cone(rng: &mut ChaCha8Rng, n: usize, k: usize) -> EigenTuple {
    loop {
        let lam = EigenTuple::new(tuple(rng, n)).expect("finite");
        if in_gamma_k(&lam, order(k)).expect("k <= n").inside {
            return lam;
        }
    }
}

pub fn identities(rng: &mut ChaCha8Rng, samples: usize) -> SuiteResult {
    let mut r = SuiteResult {
        name: "identities",
        samples,
        failures: 0,
        worst: 0.0,
        tol: IDENTITY_TOL,
    };
    for _ in 0..samples {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(1..=n);
        let lam = EigenTuple::new(tuple(rng, n)).expect("finite");
        let res = check_identities(&lam, order(k)).expect("k <= n").max();
        r.worst = r.worst.max(res);
        if !(res <= IDENTITY_TOL) {
            r.failures += 1;
        }
    }
    r
}

pub fn cone(rng: &mut ChaCha8Rng, samples: usize) -> SuiteResult {
    let mut r = SuiteResult {
        name: "cone",
        samples,
        failures: 0,
        worst: 0.0,
        tol: IDENTITY_TOL,
    };
    for _ in 0..samples {
        let n = rng.random_range(2..=5);
        let k = rng.random_range(1..=n);
        let lam = sample_in_cone(rng, n, k);
        let rep = check_newton_maclaurin(&lam, order(k)).expect("inside the cone");
        let defect = rep
            .identities
            .max()
            .max(rep.ordering_violation)
            .max(rep.maclaurin_violation)
            .max(-rep.top_entry_slack);
        r.worst = r.worst.max(defect);
        if !rep.passes(IDENTITY_TOL) {
            r.failures += 1;
        }
    }
    r
}

pub fn mixed_bound(rng: &mut ChaCha8Rng, samples: usize) -> SuiteResult {
    let mut r = SuiteResult {
        name: "mixed_bound",
        samples,
        failures: 0,
        worst: f64::NEG_INFINITY,
        tol: 0.0,
    };
    let mut done = 0;
    while done < samples {
        let n = rng.random_range(3..=5);
        let k = rng.random_range(2..n);
        let lam = sample_in_cone(rng, n, k);
        let (l1, lmax, lmin) = (lam.values()[0], lam.max(), lam.min());
        if !(l1 > 0.0 && lmin < 0.0) {
            continue;
        }
        // μ₂ at most λ₁/λ_max and μ₁ at least λ₁/(−λ_min)
        let mu2 = (l1 / lmax) * rng.random_range(0.05..=0.999);
        let mu1 = (l1 / -lmin) * rng.random_range(1.001..=20.0);
        if mu2 > 1.0 {
            continue;
        }
        let Ok(rep) = lemma22_bound(&lam, mu1, mu2, order(k)) else {
            continue;
        };
        done += 1;
        let defect = (rep.rhs - rep.lhs) / rep.sum_f;
        r.worst = r.worst.max(defect);
        if !rep.holds {
            r.failures += 1;
        }
    }
    r
}

/// Symmetric matrix with spectrum in Γ_k, margin at least `min_margin`.
pub fn sample_admissible(rng: &mut ChaCha8Rng, k: usize, min_margin: f64) -> SymMatrix2 {
    loop {
        let lam = sample_in_cone(rng, 2, k);
        let v = lam.values();
        let m = if k == 1 {
            v[0] + v[1]
        } else {
            (v[0] + v[1]).min(v[0] * v[1])
        };
        if m < min_margin {
            continue;
        }
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        return SymMatrix2::diag(v[0], v[1]).rotated_out_of(angle);
    }
}

fn value(a: &SymMatrix2, k: usize) -> f64 {
    f_log_sigma(a, order(k)).expect("admissible").value
}

/// Worst relative mismatch between the analytic gradient and central
/// differences of the value, measured against the gradient norm.
pub fn gradient_defect(a: &SymMatrix2, k: usize) -> f64 {
    let g = f_log_sigma(a, order(k)).expect("admissible").grad;
    let h = 1e-6;
    let fd = |d: SymMatrix2| (value(&a.add(&d.scale(h)), k) - value(&a.sub(&d.scale(h)), k)) / (2.0 * h);
    let d11 = fd(SymMatrix2::new(1.0, 0.0, 0.0));
    // a12 sits in two entries
    let d12 = 0.5 * fd(SymMatrix2::new(0.0, 1.0, 0.0));
    let d22 = fd(SymMatrix2::new(0.0, 0.0, 1.0));
    let norm = (g.a11 * g.a11 + 2.0 * g.a12 * g.a12 + g.a22 * g.a22).sqrt();
    [(g.a11 - d11), (g.a12 - d12), (g.a22 - d22)]
        .iter()
        .map(|e| e.abs() / norm)
        .fold(0.0, f64::max)
}

pub fn gradient(rng: &mut ChaCha8Rng, samples: usize) -> SuiteResult {
    let mut r = SuiteResult {
        name: "gradient",
        samples,
        failures: 0,
        worst: 0.0,
        tol: GRADIENT_TOL,
    };
    for _ in 0..samples {
        let k = rng.random_range(1..=2);
        let a = sample_admissible(rng, k, 0.05);
        let e = gradient_defect(&a, k);
        r.worst = r.worst.max(e);
        if !(e <= GRADIENT_TOL) {
            r.failures += 1;
        }
    }
    r
}

pub fn concavity(rng: &mut ChaCha8Rng, samples: usize) -> SuiteResult {
    let mut r = SuiteResult {
        name: "concavity",
        samples,
        failures: 0,
        worst: f64::NEG_INFINITY,
        tol: CONCAVITY_SLACK,
    };
    for _ in 0..samples {
        let k = rng.random_range(1..=2);
        let a = sample_admissible(rng, k, 0.0);
        let b = sample_admissible(rng, k, 0.0);
        let fa = f_log_sigma(&a, order(k)).expect("admissible");
        let fb = value(&b, k);
        let defect = (fb - fa.value) - fa.grad.contract(&b.sub(&a));
        r.worst = r.worst.max(defect);
        if !(defect <= CONCAVITY_SLACK) {
            r.failures += 1;
        }
    }
    r
}

/// Smallest eigenvalue of `F^{ij}` over fresh admissible samples.
pub fn ellipticity(rng: &mut ChaCha8Rng, samples: usize) -> SuiteResult {
    let mut r = SuiteResult {
        name: "ellipticity",
        samples,
        failures: 0,
        worst: f64::INFINITY,
        tol: 0.0,
    };
    for _ in 0..samples {
        let k = rng.random_range(1..=2);
        let a = sample_admissible(rng, k, 0.0);
        let f = f_log_sigma(&a, order(k)).expect("admissible");
        let low = f.grad.eigenvalues()[1];
        r.worst = r.worst.min(low);
        if !(low > 0.0 && f.ellipticity > 0.0) {
            r.failures += 1;
        }
    }
    r
}

/// Runs every suite from one seeded stream, in a fixed order.
pub fn run(seed: u64, sizes: SuiteSizes) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suites = vec![
        identities(&mut rng, sizes.identities),
        cone(&mut rng, sizes.cone),
        mixed_bound(&mut rng, sizes.mixed_bound),
        gradient(&mut rng, sizes.gradient),
        concavity(&mut rng, sizes.concavity),
        ellipticity(&mut rng, sizes.concavity),
    ];
    SelftestReport { seed, suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let sizes = SuiteSizes {
            identities: 200,
            cone: 200,
            mixed_bound: 200,
            gradient: 20,
            concavity: 50,
        };
        let a = run(7, sizes);
        assert!(a.passes(), "{a:?}");
        assert_eq!(a, run(7, sizes));
        assert_ne!(
            a.suite("cone").unwrap().worst,
            run(8, sizes).suite("cone").unwrap().worst
        );
    }
}
