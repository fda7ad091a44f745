//! Elementary symmetric polynomials, the cones Γ_k, and the operator
//! `F(A) = log σ_k(λ(A))` on symmetric 2×2 matrices.
//!
//! Indices into an [`EigenTuple`] are zero-based throughout. `σ_0 ≡ 1`, and
//! `σ_k` of the empty tuple is `1` for `k = 0` and `0` otherwise, which makes
//! every deletion recursion total.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("order k = {k} is outside 1..={n}")]
    OrderOutOfRange { k: usize, n: usize },
    #[error("index {i} is outside 0..{n}")]
    IndexOutOfRange { i: usize, n: usize },
    #[error("eigen tuple must be non-empty with finite entries")]
    InvalidTuple,
    #[error("tuple is outside Γ_{k} (margin {margin:e})")]
    ConeViolation { k: usize, margin: f64 },
    #[error("matrix is not admissible for k = {k} (margin {margin:e})")]
    NotAdmissible { k: usize, margin: f64 },
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
}

pub type Result<T> = std::result::Result<T, SymError>;

/// Ordered real n-tuple, the argument of σ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTuple(Vec<f64>);

impl EigenTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(SymError::InvalidTuple);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `λ|i`: the tuple with entry `i` removed. May be empty.
    pub fn deleted(&self, i: usize) -> Result<Vec<f64>> {
        let n = self.len();
        if i >= n {
            return Err(SymError::IndexOutOfRange { i, n });
        }
        let mut out = Vec::with_capacity(n - 1);
        out.extend_from_slice(&self.0[..i]);
        out.extend_from_slice(&self.0[i + 1..]);
        Ok(out)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl TryFrom<&[f64]> for EigenTuple {
    type Error = SymError;
    fn try_from(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }
}

/// The order `k` of σ_k and Γ_k. Validated against a dimension at use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConeOrder(usize);

impl ConeOrder {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(SymError::OrderOutOfRange { k, n: 0 });
        }
        Ok(Self(k))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, n: usize) -> Result<usize> {
        if self.0 > n {
            Err(SymError::OrderOutOfRange { k: self.0, n })
        } else {
            Ok(self.0)
        }
    }
}

/// Coefficients `e_0..=e_m` of `∏(1 + λ_i t)` written into `out`, where
/// `m = out.len() - 1`. Entries beyond the tuple length come out zero.
pub fn elementary_into(lam: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    let m = out.len() - 1;
    for (count, &l) in lam.iter().enumerate() {
        let top = m.min(count + 1);
        for j in (1..=top).rev() {
            out[j] += l * out[j - 1];
        }
    }
}

/// Total σ_k on a slice: `σ_0 = 1`, `σ_k = 0` for `k > n`.
pub fn sigma_slice(k: usize, lam: &[f64]) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > lam.len() {
        return 0.0;
    }
    if k <= 4 {
        let mut buf = [0.0; 5];
        elementary_into(lam, &mut buf[..=k]);
        buf[k]
    } else {
        let mut buf = vec![0.0; k + 1];
        elementary_into(lam, &mut buf);
        buf[k]
    }
}

/// σ_k(λ) for `1 ≤ k ≤ n`.
pub fn sigma(k: ConeOrder, lam: &EigenTuple) -> Result<f64> {
    let k = k.check(lam.len())?;
    Ok(sigma_slice(k, lam.values()))
}

/// σ_k(λ|i) for `0 ≤ k ≤ n-1`; `k` is a plain integer because `k = 0` is allowed.
pub fn sigma_deleted(k: usize, lam: &EigenTuple, i: usize) -> Result<f64> {
    let n = lam.len();
    if i >= n {
        return Err(SymError::IndexOutOfRange { i, n });
    }
    if k > n - 1 {
        return Err(SymError::OrderOutOfRange { k, n: n - 1 });
    }
    Ok(sigma_slice(k, &lam.deleted(i)?))
}

/// `f_i = ∂σ_k/∂λ_i = σ_{k-1}(λ|i)`.
pub fn grad_sigma(k: ConeOrder, lam: &EigenTuple) -> Result<Vec<f64>> {
    let k = k.check(lam.len())?;
    (0..lam.len())
        .map(|i| Ok(sigma_slice(k - 1, &lam.deleted(i)?)))
        .collect()
}

/// Membership in Γ_k together with the margin `min_{1≤l≤k} σ_l(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMembership {
    pub inside: bool,
    pub margin: f64,
}

pub fn in_gamma_k(lam: &EigenTuple, k: ConeOrder) -> Result<ConeMembership> {
    let k = k.check(lam.len())?;
    let margin = cone_margin_slice(k, lam.values());
    Ok(ConeMembership {
        inside: margin > 0.0,
        margin,
    })
}

/// `min_{1≤l≤k} σ_l(λ)`; strictly positive iff λ ∈ Γ_k.
pub fn cone_margin_slice(k: usize, lam: &[f64]) -> f64 {
    let mut small = [0.0; 5];
    let mut big;
    let coeffs: &mut [f64] = if k <= 4 {
        &mut small[..=k]
    } else {
        big = vec![0.0; k + 1];
        &mut big
    };
    elementary_into(lam, coeffs);
    coeffs[1..].iter().copied().fold(f64::INFINITY, f64::min)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Residuals of the identities that hold for every real tuple, each
/// relative to the magnitude scale of its own terms (σ evaluated on |λ|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `σ_k(λ) = σ_k(λ|i) + λ_i σ_{k-1}(λ|i)`, worst over i.
    pub deletion: f64,
    /// `Σ λ_i σ_{k-1}(λ|i) = k σ_k(λ)`.
    pub euler: f64,
    /// `Σ σ_{k-1}(λ|i) = (n-k+1) σ_{k-1}(λ)`.
    pub trace: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.deletion.max(self.euler).max(self.trace)
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff.abs() / scale.max(f64::MIN_POSITIVE)
}

pub fn check_identities(lam: &EigenTuple, k: ConeOrder) -> Result<IdentityResiduals> {
    let n = lam.len();
    let k = k.check(n)?;
    let v = lam.values();
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let sk = sigma_slice(k, v);
    let sk_abs = sigma_slice(k, &abs);
    let skm1 = sigma_slice(k - 1, v);
    let skm1_abs = sigma_slice(k - 1, &abs);

    let mut deletion: f64 = 0.0;
    let mut euler_sum = 0.0;
    let mut trace_sum = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        let d = lam.deleted(i)?;
        let sk_d = sigma_slice(k, &d);
        let skm1_d = sigma_slice(k - 1, &d);
        deletion = deletion.max(rel(sk - (sk_d + vi * skm1_d), sk_abs));
        euler_sum += vi * skm1_d;
        trace_sum += skm1_d;
    }
    Ok(IdentityResiduals {
        deletion,
        euler: rel(euler_sum - k as f64 * sk, k as f64 * sk_abs),
        trace: rel(trace_sum - (n - k + 1) as f64 * skm1, (n - k + 1) as f64 * skm1_abs),
    })
}

/// Identities plus the inequalities valid inside Γ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct MaclaurinReport {
    pub identities: IdentityResiduals,
    /// `min_{l<k, i} σ_l(λ|i)`; must be positive. `+∞` when `k = 1`.
    pub deleted_positivity: f64,
    /// `λ_max σ_{k-1}(λ|argmax) - (k/n) σ_k`; must be nonnegative.
    pub top_entry_slack: f64,
    /// Largest `σ_{k-1}(λ|i) - σ_{k-1}(λ|j)` over pairs with `λ_i ≥ λ_j`,
    /// relative to the scale; must be `≤ 0` up to rounding.
    pub ordering_violation: f64,
    /// Largest relative excess of `(σ_k/C(n,k))^{1/k}` over `(σ_l/C(n,l))^{1/l}`.
    pub maclaurin_violation: f64,
}

impl MaclaurinReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.identities.max() <= tol
            && self.deleted_positivity > 0.0
            && self.top_entry_slack >= -tol
            && self.ordering_violation <= tol
            && self.maclaurin_violation <= tol
    }
}

pub fn check_newton_maclaurin(lam: &EigenTuple, k: ConeOrder) -> Result<MaclaurinReport> {
    let identities = check_identities(lam, k)?;
    let n = lam.len();
    let kk = k.get();
    let cone = in_gamma_k(lam, k)?;
    if !cone.inside {
        return Err(SymError::ConeViolation {
            k: kk,
            margin: cone.margin,
        });
    }
    let v = lam.values();
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let sk = sigma_slice(kk, v);

    let deleted: Vec<Vec<f64>> = (0..n).map(|i| lam.deleted(i)).collect::<Result<_>>()?;
    let mut deleted_positivity = f64::INFINITY;
    for d in &deleted {
        for l in 1..kk {
            deleted_positivity = deleted_positivity.min(sigma_slice(l, d));
        }
    }

    let grad: Vec<f64> = deleted.iter().map(|d| sigma_slice(kk - 1, d)).collect();
    let imax = (0..n).max_by(|&a, &b| v[a].total_cmp(&v[b])).expect("non-empty tuple");
    let top_entry_slack = v[imax] * grad[imax] - kk as f64 / n as f64 * sk;

    let scale = sigma_slice(kk - 1, &abs).max(f64::MIN_POSITIVE);
    let mut ordering_violation = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j && v[i] >= v[j] {
                ordering_violation = ordering_violation.max((grad[i] - grad[j]) / scale);
            }
        }
    }
    if n == 1 {
        ordering_violation = 0.0;
    }

    let mean_k = (sk / binomial(n, kk)).powf(1.0 / kk as f64);
    let mut maclaurin_violation = f64::NEG_INFINITY;
    for l in 1..=kk {
        let mean_l = (sigma_slice(l, v) / binomial(n, l)).powf(1.0 / l as f64);
        maclaurin_violation = maclaurin_violation.max((mean_k - mean_l) / mean_l);
    }

    Ok(MaclaurinReport {
        identities,
        deleted_positivity,
        top_entry_slack,
        ordering_violation,
        maclaurin_violation,
    })
}

/// Both sides of the lower bound on `f_1` for tuples in Γ_k with
/// `μ₂ λ_max ≤ λ_1 ≤ -μ₁ λ_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedBoundReport {
    pub lhs: f64,
    pub coefficient: f64,
    pub sum_f: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The bound on `f_1 = σ_{k-1}(λ|1)`; `λ_1` is the first entry of the tuple.
pub fn lemma22_bound(lam: &EigenTuple, mu1: f64, mu2: f64, k: ConeOrder) -> Result<MixedBoundReport> {
    let n = lam.len();
    let kk = k.check(n)?;
    if !(n > kk && kk >= 2) {
        return Err(SymError::HypothesisNotMet(format!(
            "need n > k >= 2, got n = {n}, k = {kk}"
        )));
    }
    if !(mu1 > 0.0 && mu2 > 0.0 && mu2 <= 1.0) {
        return Err(SymError::HypothesisNotMet(format!(
            "need mu1 > 0 and 0 < mu2 <= 1, got mu1 = {mu1}, mu2 = {mu2}"
        )));
    }
    let cone = in_gamma_k(lam, k)?;
    if !cone.inside {
        return Err(SymError::HypothesisNotMet(format!(
            "tuple outside Γ_{kk} (margin {:e})",
            cone.margin
        )));
    }
    let l1 = lam.values()[0];
    if !(mu2 * lam.max() <= l1 && l1 <= -mu1 * lam.min()) {
        return Err(SymError::HypothesisNotMet(format!(
            "chain mu2*max <= lambda_1 <= -mu1*min fails: {} <= {} <= {}",
            mu2 * lam.max(),
            l1,
            -mu1 * lam.min()
        )));
    }
    let grad = grad_sigma(k, lam)?;
    let sum_f: f64 = grad.iter().sum();
    let (nf, kf) = (n as f64, kk as f64);
    let coefficient = (mu2 / mu1).powi(2) * (kf - 1.0) / ((nf - 1.0) * (nf - 2.0 + kf) * (nf - kf + 1.0));
    let rhs = coefficient * sum_f;
    Ok(MixedBoundReport {
        lhs: grad[0],
        coefficient,
        sum_f,
        rhs,
        holds: grad[0] >= rhs,
    })
}

/// Symmetric 2×2 matrix stored by its three independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMatrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

/// Frames whose off-diagonal and diagonal split both fall below this are
/// treated as isotropic.
pub const ISOTROPIC_EPS: f64 = 1e-14;

/// Eigen-decomposition of a [`SymMatrix2`]: `values[0] ≥ values[1]` with
/// unit eigenvectors `(cos φ, sin φ)` and `(-sin φ, cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    pub values: [f64; 2],
    pub angle: f64,
    pub isotropic: bool,
}

impl SymMatrix2 {
    pub const IDENTITY: Self = Self {
        a11: 1.0,
        a12: 0.0,
        a22: 1.0,
    };

    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.a11 - o.a11, self.a12 - o.a12, self.a22 - o.a22)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    /// Frobenius pairing `Σ_ij A_ij B_ij` (off-diagonal counted twice).
    pub fn contract(&self, o: &Self) -> f64 {
        self.a11 * o.a11 + 2.0 * self.a12 * o.a12 + self.a22 * o.a22
    }

    /// Components in the frame rotated by `angle`, i.e. `Rᵀ A R` with
    /// `R = [[c, -s], [s, c]]`. For a Cartesian tensor and the polar angle
    /// this yields the (rr, rθ, θθ) components.
    pub fn rotated_into(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let a11 = c * c * self.a11 + 2.0 * c * s * self.a12 + s * s * self.a22;
        let a22 = s * s * self.a11 - 2.0 * c * s * self.a12 + c * c * self.a22;
        let a12 = -c * s * self.a11 + (c * c - s * s) * self.a12 + c * s * self.a22;
        Self::new(a11, a12, a22)
    }

    /// Inverse of [`Self::rotated_into`].
    pub fn rotated_out_of(&self, angle: f64) -> Self {
        self.rotated_into(-angle)
    }

    pub fn eigen(&self) -> Eigen2 {
        let half_diff = 0.5 * (self.a11 - self.a22);
        let mean = 0.5 * (self.a11 + self.a22);
        let isotropic = self.a12.abs() < ISOTROPIC_EPS && half_diff.abs() < ISOTROPIC_EPS;
        let rad = half_diff.hypot(self.a12);
        let angle = if isotropic {
            0.0
        } else {
            0.5 * (2.0 * self.a12).atan2(self.a11 - self.a22)
        };
        Eigen2 {
            values: [mean + rad, mean - rad],
            angle,
            isotropic,
        }
    }

    /// Eigenvalues only, nonincreasing; skips the eigenvector angle.
    #[inline]
    pub fn eigenvalues(&self) -> [f64; 2] {
        if self.a12 == 0.0 {
            return if self.a11 >= self.a22 {
                [self.a11, self.a22]
            } else {
                [self.a22, self.a11]
            };
        }
        let mean = 0.5 * (self.a11 + self.a22);
        let hd = 0.5 * (self.a11 - self.a22);
        let rad = (hd * hd + self.a12 * self.a12).sqrt();
        [mean + rad, mean - rad]
    }

    /// `Σ_a w_a v_a ⊗ v_a` for the frame of `eig`.
    pub fn from_spectral(eig: &Eigen2, w: [f64; 2]) -> Self {
        let (s, c) = eig.angle.sin_cos();
        Self::new(
            w[0] * c * c + w[1] * s * s,
            (w[0] - w[1]) * c * s,
            w[0] * s * s + w[1] * c * c,
        )
    }
}

/// Value, gradient `F^{ij}`, and spectrum of `F = log σ_k` at a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSigma {
    pub value: f64,
    pub grad: SymMatrix2,
    pub eigs: EigenTuple,
    /// Smallest eigenvalue of `grad`, the ellipticity margin.
    pub ellipticity: f64,
}

/// Scalar pieces of `log σ_k` at an eigenvalue pair, without eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEval {
    pub value: f64,
    /// `f_a / σ_k` for each eigenvalue, `f_a = σ_{k-1}(λ|a)`.
    pub weights: [f64; 2],
    pub margin: f64,
}

impl PairEval {
    pub fn trace(&self) -> f64 {
        self.weights[0] + self.weights[1]
    }
}

/// `log σ_k(λ₁, λ₂)` for `k ∈ {1, 2}`; errors outside Γ_k.
#[inline]
pub fn log_sigma_pair(k: usize, lam: [f64; 2]) -> Result<PairEval> {
    let (s1, s2) = (lam[0] + lam[1], lam[0] * lam[1]);
    match k {
        1 => {
            if s1 > 0.0 {
                let w = 1.0 / s1;
                Ok(PairEval {
                    value: s1.ln(),
                    weights: [w, w],
                    margin: s1,
                })
            } else {
                Err(SymError::NotAdmissible { k, margin: s1 })
            }
        }
        2 => {
            let margin = s1.min(s2);
            if margin > 0.0 {
                Ok(PairEval {
                    value: s2.ln(),
                    weights: [lam[1] / s2, lam[0] / s2],
                    margin,
                })
            } else {
                Err(SymError::NotAdmissible { k, margin })
            }
        }
        _ => Err(SymError::OrderOutOfRange { k, n: 2 }),
    }
}

pub fn f_log_sigma(a: &SymMatrix2, k: ConeOrder) -> Result<LogSigma> {
    let kk = k.check(2)?;
    let eig = a.eigen();
    let pe = log_sigma_pair(kk, eig.values)?;
    let grad = if eig.isotropic {
        // equal eigenvalues: f' is the same in every direction
        let w = 0.5 * (pe.weights[0] + pe.weights[1]);
        SymMatrix2::diag(w, w)
    } else {
        SymMatrix2::from_spectral(&eig, pe.weights)
    };
    Ok(LogSigma {
        value: pe.value,
        grad,
        eigs: EigenTuple(eig.values.to_vec()),
        ellipticity: pe.weights[0].min(pe.weights[1]),
    })
}
