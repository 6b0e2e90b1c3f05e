//! q-Gaussian measures on the line and m-Gaussians on the plane.
//!
//! A 1D q-Gaussian is stored by its *shape scale* `σ`: the measure is
//! `N_q(μ, Cσ²)`, whose variance is `Cσ²` with `C` from [`QParams::c`].
//! Bivariate m-Gaussians are stored by their raw covariance entries
//! (`Σ₁₁ = s₁²`, `Σ₂₂ = s₂²`, `Σ₁₂ = θ s₁ s₂`).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qmath::{q_exp, q_log_unchecked, QParams};
use crate::roots::{brent, Tolerance};

/// Closure of `{x : density > 0}`; bounds are infinite for heavy-tailed q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SupportInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("empty support [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// The 1D q-Gaussian `N_q(μ, Cσ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QGaussian1D {
    mu: f64,
    sigma: f64,
    params: QParams,
}

impl QGaussian1D {
    pub fn new(mu: f64, sigma: f64, params: QParams) -> Result<Self> {
        if params.d() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: params.d() as usize,
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "q-Gaussian needs finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
            )));
        }
        Ok(Self { mu, sigma, params })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    /// Shape scale; the variance is `C·σ²`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn params(&self) -> &QParams {
        &self.params
    }
    pub fn q(&self) -> f64 {
        self.params.q()
    }

    /// `C·σ²`.
    pub fn variance(&self) -> f64 {
        self.params.c() * self.sigma * self.sigma
    }

    pub fn with_mu_sigma(&self, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, self.params)
    }

    pub fn support(&self) -> SupportInterval {
        let r = self.params.support_radius();
        if r.is_finite() {
            let half = r * self.variance().sqrt();
            SupportInterval {
                lo: self.mu - half,
                hi: self.mu + half,
            }
        } else {
            SupportInterval::real_line()
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        density_1d(self, x)
    }

    pub fn peak(&self) -> f64 {
        self.params.c0() / self.variance().sqrt()
    }
}

/// `C₀(q,1)/√(Cσ²) · exp_q(−C₁(q,1)(x−μ)²/(2Cσ²))`.
pub fn density_1d(g: &QGaussian1D, x: f64) -> f64 {
    let p = &g.params;
    let v = g.variance();
    let z = x - g.mu;
    p.c0() / v.sqrt() * q_exp(-0.5 * p.c1() * z * z / v, p.q())
}

/// The m-Gaussian on the plane with means `(μ₁, μ₂)`, standard deviations
/// `(s₁, s₂)` and correlation `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MBivariate {
    pub mu1: f64,
    pub mu2: f64,
    pub s1: f64,
    pub s2: f64,
    pub theta: f64,
    mparams: QParams,
}

/// `m ∈ (0,1) ∪ (1, 3/2)`: where the bivariate normalisation has been
/// checked by quadrature.
pub fn in_verified_bivariate_range(m: f64) -> bool {
    m > 0.0 && m < 1.5 && m != 1.0
}

impl MBivariate {
    /// Requires the constants `C₀(m,2)`, `C₁(m,2)` to exist; `m` outside the
    /// verified range is accepted and reported by [`MBivariate::range_warning`].
    pub fn new(mu1: f64, s1: f64, mu2: f64, s2: f64, theta: f64, m: f64) -> Result<Self> {
        if !(s1 > 0.0 && s2 > 0.0) || !s1.is_finite() || !s2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bivariate scales must be positive, got {s1}, {s2}"
            )));
        }
        if !(theta.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let mparams = QParams::definable(m, 2)?;
        Ok(Self {
            mu1,
            mu2,
            s1,
            s2,
            theta,
            mparams,
        })
    }

    /// Like [`MBivariate::new`] but with the constants supplied; used to
    /// inject faults into the verification suite.
    #[doc(hidden)]
    pub fn with_params(mu1: f64, s1: f64, mu2: f64, s2: f64, theta: f64, mparams: QParams) -> Result<Self> {
        let b = Self::new(mu1, s1, mu2, s2, theta, mparams.q())?;
        Ok(Self { mparams, ..b })
    }

    /// Builds from a mean vector and a 2×2 covariance matrix.
    pub fn from_moments(mean: [f64; 2], cov: [[f64; 2]; 2], m: f64) -> Result<Self> {
        if (cov[0][1] - cov[1][0]).abs() > 1e-12 * (cov[0][1].abs() + cov[1][0].abs() + 1e-300) {
            return Err(Error::NotPositiveDefinite);
        }
        if !(cov[0][0] > 0.0 && cov[1][1] > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let s1 = cov[0][0].sqrt();
        let s2 = cov[1][1].sqrt();
        Self::new(mean[0], s1, mean[1], s2, cov[0][1] / (s1 * s2), m)
    }

    pub fn m(&self) -> f64 {
        self.mparams.q()
    }
    pub fn mparams(&self) -> &QParams {
        &self.mparams
    }
    pub fn is_verified(&self) -> bool {
        in_verified_bivariate_range(self.m())
    }
    pub fn range_warning(&self) -> Option<Error> {
        (!self.is_verified()).then(|| Error::OutsideVerifiedRange { m: self.m() })
    }
    pub fn require_verified(&self) -> Result<()> {
        match self.range_warning() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.mu1, self.mu2]
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let off = self.theta * self.s1 * self.s2;
        [[self.s1 * self.s1, off], [off, self.s2 * self.s2]]
    }

    /// `s₁² s₂² (1 − θ²)`.
    pub fn det(&self) -> f64 {
        let s = self.s1 * self.s2;
        s * s * (1.0 - self.theta) * (1.0 + self.theta)
    }

    pub fn mean_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.mean())
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let c = self.covariance();
        DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]])
    }

    /// Same means and scales, different correlation.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.mu1, self.s1, self.mu2, self.s2, theta, self.m())
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        density_2d(self, x, y)
    }
}

/// The bivariate m-Gaussian density; zero outside the elliptical support
/// when `m < 1`.
pub fn density_2d(b: &MBivariate, x: f64, y: f64) -> f64 {
    let p = &b.mparams;
    let one_minus = (1.0 - b.theta) * (1.0 + b.theta);
    let u = (x - b.mu1) / b.s1;
    let v = (y - b.mu2) / b.s2;
    let quad = (u * u + v * v - 2.0 * b.theta * u * v) / one_minus;
    p.c0() / (b.s1 * b.s2 * one_minus.sqrt()) * q_exp(-0.5 * p.c1() * quad, p.q())
}

/// `E_m(N_m(μ,Σ)) − E_m(N_m(μ,V))` from the determinants of `Σ` and `V`:
/// `(2−m) C₁ (C₀/√det V)^{1−m} log_m(√det V / √det Σ)`.
pub fn entropy_diff_closed(mp: &QParams, det_sigma: f64, det_v: f64) -> Result<f64> {
    if !(det_sigma > 0.0) || !(det_v > 0.0) {
        return Err(Error::Domain {
            what: "determinant",
            value: det_sigma.min(det_v),
        });
    }
    let m = mp.q();
    let norm = (mp.c0() / det_v.sqrt()).powf(1.0 - m);
    Ok((2.0 - m) * mp.c1() * norm * q_log_unchecked((det_v / det_sigma).sqrt(), m))
}

/// `H_m(N_m(μ_a, Σ_a) ‖ N_m(μ_b, Σ_b))` in closed form:
///
/// `½ C₁ (C₀/√det V)^{1−m} [tr(V⁻¹Σ) + ⟨μ−ν, V⁻¹(μ−ν)⟩ + 2 log_m(√det V/√det Σ) − d]`
///
/// with `Σ = Σ_a`, `V = Σ_b`. For `m < 1` this is the relative entropy only
/// when the support of the first measure lies inside that of the second;
/// otherwise it is the analytic continuation of that expression.
pub fn m_rel_entropy_closed(
    mp: &QParams,
    mu_a: &DVector<f64>,
    sigma_a: &DMatrix<f64>,
    mu_b: &DVector<f64>,
    sigma_b: &DMatrix<f64>,
) -> Result<f64> {
    let d = mp.d() as usize;
    let dims = [
        mu_a.len(),
        mu_b.len(),
        sigma_a.nrows(),
        sigma_a.ncols(),
        sigma_b.nrows(),
        sigma_b.ncols(),
    ];
    if let Some(&got) = dims.iter().find(|&&n| n != d) {
        return Err(Error::DimensionMismatch { expected: d, got });
    }
    let chol_a = checked_cholesky(sigma_a)?;
    let chol_b = checked_cholesky(sigma_b)?;
    let det_a = chol_a.determinant();
    let det_b = chol_b.determinant();

    let trace = chol_b.solve(sigma_a).trace();
    let diff = mu_a - mu_b;
    let maha = diff.dot(&chol_b.solve(&diff));

    let m = mp.q();
    let norm = (mp.c0() / det_b.sqrt()).powf(1.0 - m);
    let log_term = 2.0 * q_log_unchecked((det_b / det_a).sqrt(), m);
    Ok(0.5 * mp.c1() * norm * (trace + maha + log_term - d as f64))
}

fn checked_cholesky(s: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let sym = (s - s.transpose()).amax() <= 1e-12 * s.amax();
    if !sym {
        return Err(Error::NotPositiveDefinite);
    }
    s.clone().cholesky().ok_or(Error::NotPositiveDefinite)
}

/// Relative entropy between two bivariate m-Gaussians of the same `m`.
pub fn m_rel_entropy_bivariate(q: &MBivariate, p: &MBivariate) -> Result<f64> {
    if q.m() != p.m() {
        return Err(Error::MismatchedQ(q.m(), p.m()));
    }
    m_rel_entropy_closed(
        p.mparams(),
        &q.mean_vector(),
        &q.covariance_matrix(),
        &p.mean_vector(),
        &p.covariance_matrix(),
    )
}

/// Correlation of the minimiser of `H_m(· ‖ P)` over the m-Gaussians with
/// prescribed standard deviations `ξ₁, ξ₂` (means are irrelevant). Solves
///
/// `η/(1−η²)^{(3−m)/2} = θ/(1−θ²)^{(3−m)/2} · (ξ₁ξ₂/(s₁s₂))^{2−m}`
///
/// whose left side is odd and strictly increasing on `(−1, 1)`.
pub fn optimal_correlation(p: &MBivariate, xi1: f64, xi2: f64) -> Result<f64> {
    if !(xi1 > 0.0 && xi2 > 0.0) {
        return Err(Error::InvalidArgument("target scales must be positive".into()));
    }
    let m = p.m();
    let expo = (3.0 - m) / 2.0;
    let theta = p.theta;
    if theta == 0.0 {
        return Ok(0.0);
    }
    let one_minus = (1.0 - theta) * (1.0 + theta);
    let rhs = theta.abs() / one_minus.powf(expo) * (xi1 * xi2 / (p.s1 * p.s2)).powf(2.0 - m);
    // ln(η) − expo·ln(1−η²) − ln(rhs), increasing in η ∈ (0,1).
    let lhs = |eta: f64| eta.ln() - expo * ((1.0 - eta) * (1.0 + eta)).ln() - rhs.ln();
    let root = brent(lhs, 1e-300, 1.0 - 1e-16, Tolerance::default())?;
    Ok(root.x.copysign(theta))
}

/// Residual of the correlation equation at `eta`, relative to its right side.
pub fn optimal_correlation_residual(p: &MBivariate, xi1: f64, xi2: f64, eta: f64) -> f64 {
    let m = p.m();
    let expo = (3.0 - m) / 2.0;
    let side = |t: f64| t / ((1.0 - t) * (1.0 + t)).powf(expo);
    let rhs = side(p.theta) * (xi1 * xi2 / (p.s1 * p.s2)).powf(2.0 - m);
    let lhs = side(eta);
    (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::make_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn g(q: f64, mu: f64, sigma: f64) -> QGaussian1D {
        QGaussian1D::new(mu, sigma, make_params(q, 1).unwrap()).unwrap()
    }

    #[test]
    fn density_vanishes_outside_compact_support() {
        let x = g(0.8, 0.5, 1.2);
        let s = x.support();
        assert!(s.is_finite());
        assert_eq!(x.density(s.hi + 1e-9), 0.0);
        assert_eq!(x.density(s.lo - 1.0), 0.0);
        assert!(x.density(s.hi - 1e-6) > 0.0);
        assert!(!g(1.2, 0.0, 1.0).support().is_finite());
    }

    #[test]
    fn peak_value() {
        let x = g(1.3, -2.0, 0.7);
        assert_relative_eq!(x.density(-2.0), x.peak(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_scale() {
        let p = make_params(0.8, 1).unwrap();
        assert!(QGaussian1D::new(0.0, 0.0, p).is_err());
        assert!(QGaussian1D::new(0.0, -1.0, p).is_err());
        assert!(QGaussian1D::new(0.0, 1.0, make_params(0.8, 2).unwrap()).is_err());
    }

    #[test]
    fn bivariate_peak_and_symmetry() {
        let b = MBivariate::new(0.3, 1.1, -0.4, 0.7, 0.6, 0.5).unwrap();
        let expected = b.mparams().c0() / (1.1 * 0.7 * (1.0 - 0.36f64).sqrt());
        assert_relative_eq!(b.density(0.3, -0.4), expected, max_relative = 1e-15);
        for &(u, v) in &[(0.1, 0.2), (-0.5, 0.3), (0.9, -0.1)] {
            assert_relative_eq!(
                b.density(0.3 + u, -0.4 + v),
                b.density(0.3 - u, -0.4 - v),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn bivariate_validation() {
        assert!(matches!(
            MBivariate::new(0.0, 1.0, 0.0, 1.0, 1.0, 0.5),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(MBivariate::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.5).is_err());
        let outside = MBivariate::new(0.0, 1.0, 0.0, 1.0, 0.2, -0.5).unwrap();
        assert!(matches!(outside.range_warning(), Some(Error::OutsideVerifiedRange { .. })));
        assert!(MBivariate::new(0.0, 1.0, 0.0, 1.0, 0.2, 1.6).is_err());
    }

    #[test]
    fn from_moments_roundtrip() {
        let b = MBivariate::new(1.0, 2.0, -1.0, 0.5, -0.3, 1.2).unwrap();
        let c = MBivariate::from_moments(b.mean(), b.covariance(), 1.2).unwrap();
        assert_relative_eq!(c.theta, b.theta, max_relative = 1e-14);
        assert_relative_eq!(c.det(), b.det(), max_relative = 1e-14);
    }

    #[test]
    fn entropy_diff_closed_zero_at_equal_determinants() {
        let mp = make_params(0.7, 2).unwrap();
        assert_eq!(entropy_diff_closed(&mp, 2.5, 2.5).unwrap(), 0.0);
        assert!(entropy_diff_closed(&mp, 0.0, 1.0).is_err());
    }

    #[test]
    fn entropy_diff_closed_matches_one_dimensional_form() {
        // d = 1, m = q, V = Cσ₀², Σ = Cσ²: equals (2−q)C₁(C₀/(σ₀√C))^{1−q} log_q(σ₀/σ).
        for &q in &[0.3, 0.8, 1.2, 1.5] {
            let p = make_params(q, 1).unwrap();
            let (s0, s) = (1.3, 0.8);
            let c = p.c();
            let closed = entropy_diff_closed(&p, c * s * s, c * s0 * s0).unwrap();
            let direct = (2.0 - q)
                * p.c1()
                * (p.c0() / (s0 * c.sqrt())).powf(1.0 - q)
                * ((s0 / s).powf(1.0 - q) - 1.0)
                / (1.0 - q);
            assert_relative_eq!(closed, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn rel_entropy_classical_limit() {
        // m → 1 reproduces ½[tr(V⁻¹Σ) + ⟨δ,V⁻¹δ⟩ − ln(detΣ/detV) − d].
        let sa = DMatrix::<f64>::from_row_slice(2, 2, &[1.3, 0.4, 0.4, 0.9]);
        let sb = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, -0.3, -0.3, 1.1]);
        let ma = DVector::from_row_slice(&[0.2, -0.1]);
        let mb = DVector::from_row_slice(&[-0.5, 0.4]);
        let vinv = sb.clone().try_inverse().unwrap();
        let delta = &ma - &mb;
        let classical = 0.5
            * ((&vinv * &sa).trace() + delta.dot(&(&vinv * &delta))
                - (sa.determinant() / sb.determinant()).ln()
                - 2.0);
        for m in [1.0 - 1e-7, 1.0 + 1e-7] {
            let mp = QParams::definable(m, 2).unwrap();
            let h = m_rel_entropy_closed(&mp, &ma, &sa, &mb, &sb).unwrap();
            assert!((h - classical).abs() < 1e-5, "{h} vs {classical}");
        }
    }

    #[test]
    fn rel_entropy_rejects_indefinite() {
        let mp = make_params(1.2, 2).unwrap();
        let good = DMatrix::identity(2, 2);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let mu = DVector::zeros(2);
        assert!(matches!(
            m_rel_entropy_closed(&mp, &mu, &bad, &mu, &good),
            Err(Error::NotPositiveDefinite)
        ));
        let short = DVector::zeros(1);
        assert!(matches!(
            m_rel_entropy_closed(&mp, &short, &good, &mu, &good),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn optimal_correlation_fixed_point() {
        let p = MBivariate::new(0.0, 1.2, 0.0, 0.8, 0.55, 1.3).unwrap();
        let eta = optimal_correlation(&p, 1.2, 0.8).unwrap();
        assert_relative_eq!(eta, 0.55, max_relative = 1e-13);
        let eta = optimal_correlation(&p, 0.6, 1.9).unwrap();
        assert!(optimal_correlation_residual(&p, 0.6, 1.9, eta) < 1e-12);
        let neg = MBivariate::new(0.0, 1.2, 0.0, 0.8, -0.55, 1.3).unwrap();
        assert_relative_eq!(optimal_correlation(&neg, 0.6, 1.9).unwrap(), -eta);
    }

    proptest! {
        #[test]
        fn rel_entropy_nonnegative(
            m in prop_oneof![0.05f64..0.95, 1.05f64..1.45],
            s1 in 0.3f64..3.0, s2 in 0.3f64..3.0, t in -0.9f64..0.9,
            r1 in 0.3f64..3.0, r2 in 0.3f64..3.0, u in -0.9f64..0.9,
            d1 in -2.0f64..2.0, d2 in -2.0f64..2.0,
        ) {
            let a = MBivariate::new(d1, s1, d2, s2, t, m).unwrap();
            let b = MBivariate::new(0.0, r1, 0.0, r2, u, m).unwrap();
            let h = m_rel_entropy_bivariate(&a, &b).unwrap();
            prop_assert!(h >= -1e-12, "{h}");
            let self_h = m_rel_entropy_bivariate(&a, &a).unwrap();
            prop_assert!(self_h.abs() <= 1e-10);
        }
    }
}
