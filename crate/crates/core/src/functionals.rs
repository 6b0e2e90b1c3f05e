//! Variational functionals on the 1D q-Gaussian family.
//!
//! With `N₀ = N_q(μ₀, Cσ₀²)`, `N = N_q(μ, Cσ²)`, `m = 3 − 2/q` and
//! `D = σ_h² − σ₀²`:
//!
//! - `W₂²(N, N₀) = C(σ−σ₀)² + (μ−μ₀)²`
//! - `E_q(N) − E_q(N₀) = bC log_q(σ₀/σ)`
//! - `K_h = W₂²/(4h) + ½(E_q(N) − E_q(N₀))`
//! - `J_h(N|N₀) = H_m(Q* ‖ Q_{0→h})`, the minimal m-relative entropy between
//!   couplings of `N₀` and `N` and the bivariate law `Q_{0→h}` of the flow.
//!
//! `J_h` is evaluated in closed form once the correlation `η_h` of the
//! optimal coupling is known; `η_h` solves `η^q/(1−η²) = σ₀^q σ^{2−q}/D`.
//!
//! The rescaled functionals are written so that nothing of size `1/h` is
//! ever subtracted: they stay accurate down to `h` far below `1e-10`.
//! [`direct`] holds the literal definitions for cross-checking.

use crate::error::{Error, Result};
use crate::pme_flow::{evolve_sigma, variance_gap};
use crate::qgaussian::{MBivariate, QGaussian1D};
use crate::qmath::{power_increment_defect, q_log_unchecked, QParams};
use crate::roots::{brent, Tolerance};

fn same_family(g: &QGaussian1D, g0: &QGaussian1D) -> Result<()> {
    if g.params() != g0.params() {
        return Err(Error::MismatchedQ(g.q(), g0.q()));
    }
    Ok(())
}

fn positive_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveStep(h));
    }
    Ok(())
}

/// `C(σ₁−σ₂)² + (μ₁−μ₂)²`.
pub fn wasserstein2_sq(g1: &QGaussian1D, g2: &QGaussian1D) -> Result<f64> {
    same_family(g1, g2)?;
    let ds = g1.sigma() - g2.sigma();
    let dm = g1.mu() - g2.mu();
    Ok(g1.params().c() * ds * ds + dm * dm)
}

/// `E_q(g) − E_q(g0) = (2−q) C₁ (C₀/(σ₀√C))^{1−q} log_q(σ₀/σ)`.
pub fn entropy_diff(g: &QGaussian1D, g0: &QGaussian1D) -> Result<f64> {
    same_family(g, g0)?;
    let p = g.params();
    let q = p.q();
    let norm = (p.c0() / (g0.sigma() * p.c().sqrt())).powf(1.0 - q);
    Ok((2.0 - q) * p.c1() * norm * q_log_unchecked(g0.sigma() / g.sigma(), q))
}

/// The JKO functional `W₂²(g, g0)/(4h) + ½(E_q(g) − E_q(g0))`.
pub fn kh(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    positive_step(h)?;
    Ok(wasserstein2_sq(g, g0)? / (4.0 * h) + 0.5 * entropy_diff(g, g0)?)
}

/// Correlation of the optimal coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolve {
    pub eta: f64,
    /// `1 − η`, carried separately since it is `O(h)`.
    pub one_minus_eta: f64,
    /// `LHS/RHS − 1` of `η^q/(1−η²) = σ₀^q σ^{2−q}/D`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `η^q/(1−η²) = σ₀^q σ^{2−q}/(σ_h² − σ₀²)` for `η ∈ (0,1)`.
pub fn solve_eta(sigma: f64, sigma0: f64, sigma_h: f64, q: f64) -> Result<EtaSolve> {
    if !(sigma_h > sigma0) {
        return Err(Error::InvalidArgument(format!(
            "sigma_h = {sigma_h} must exceed sigma0 = {sigma0}"
        )));
    }
    solve_eta_with_gap(sigma, sigma0, (sigma_h - sigma0) * (sigma_h + sigma0), q)
}

/// [`solve_eta`] with the variance gap `D = σ_h² − σ₀²` supplied directly.
pub fn solve_eta_with_gap(sigma: f64, sigma0: f64, gap: f64, q: f64) -> Result<EtaSolve> {
    if !(sigma > 0.0 && sigma0 > 0.0 && gap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta equation needs positive sigma, sigma0 and gap (got {sigma}, {sigma0}, {gap})"
        )));
    }
    let ln_rhs = q * sigma0.ln() + (2.0 - q) * sigma.ln() - gap.ln();
    let tol = Tolerance {
        abs: 1e-300,
        rel: 2.0 * f64::EPSILON,
        max_iter: 300,
    };
    // The left side at η = (√5−1)/2 is ≈ 0.66^q · 1.6 > 1; below that
    // solve for η, above for s = 1 − η.
    let (eta, s, iterations) = if ln_rhs >= 0.0 {
        let f = |s: f64| q * (-s).ln_1p() - s.ln() - (2.0 - s).ln() - ln_rhs;
        let root = brent(f, 1e-300, 1.0 - 1e-16, tol)?;
        (1.0 - root.x, root.x, root.iterations)
    } else {
        let f = |e: f64| q * e.ln() - (-e).ln_1p() - e.ln_1p() - ln_rhs;
        let root = brent(f, 1e-300, 1.0 - 1e-16, tol)?;
        (root.x, 1.0 - root.x, root.iterations)
    };
    // For very small gaps s underflows against 1 and η rounds to exactly 1;
    // callers that need 1 − η use `one_minus_eta`.
    if !(eta > 0.0 && eta <= 1.0 && s > 0.0) {
        return Err(Error::NotBracketed { lo: 0.0, hi: 1.0 });
    }
    let phi = q * eta.ln() - s.ln() - (1.0 + eta).ln() - ln_rhs;
    Ok(EtaSolve {
        eta,
        one_minus_eta: s,
        residual: phi.exp_m1(),
        iterations,
    })
}

/// Expansion coefficients `a(q,σ₀)` and `b(σ₀,q)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaCoefficients {
    /// `None` when `C₀(m,2)`, `C₁(m,2)` do not exist (`q ≥ 4/3`).
    pub a: Option<f64>,
    pub b: f64,
    pub sigma0: f64,
    pub q: f64,
}

impl GammaCoefficients {
    /// `(3−q) b σ₀^{1−q} − 1`, zero by the scale identity for `C`.
    pub fn identity_defect(&self) -> f64 {
        (3.0 - self.q) * self.b * self.sigma0.powf(1.0 - self.q) - 1.0
    }
}

/// `a = 2C/C₁(m,2) · (C₀(m,2)/(Cσ₀))^{m−1}`,
/// `b = (2−q)C₁(q,1)/C · (C₀(q,1)/(σ₀√C))^{1−q}`.
pub fn coefficients(q: f64, sigma0: f64) -> Result<GammaCoefficients> {
    let p = QParams::new(q, 1)?;
    coefficients_for(&p, sigma0)
}

fn coefficients_for(p: &QParams, sigma0: f64) -> Result<GammaCoefficients> {
    if !(sigma0 > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma0 = {sigma0} must be positive")));
    }
    let q = p.q();
    let c = p.c();
    let a = QParams::definable(p.m(), 2)
        .ok()
        .map(|mp| 2.0 * c / mp.c1() * (mp.c0() / (c * sigma0)).powf(mp.q() - 1.0));
    let b = (2.0 - q) * p.c1() / c * (p.c0() / (sigma0 * c.sqrt())).powf(1.0 - q);
    Ok(GammaCoefficients { a, b, sigma0, q })
}

/// Everything about `(N₀, h)` that the functionals below share.
#[derive(Debug, Clone, Copy)]
struct Step {
    p: QParams,
    mp: QParams,
    sigma0: f64,
    mu0: f64,
    h: f64,
    sigma_h: f64,
    gap: f64,
}

impl Step {
    fn new(g0: &QGaussian1D, h: f64) -> Result<Self> {
        positive_step(h)?;
        let p = *g0.params();
        let mp = QParams::definable(p.m(), 2)?;
        let q = p.q();
        let sigma0 = g0.sigma();
        Ok(Self {
            p,
            mp,
            sigma0,
            mu0: g0.mu(),
            h,
            sigma_h: evolve_sigma(sigma0, h, q),
            gap: variance_gap(sigma0, h, q),
        })
    }

    fn eta(&self, sigma: f64) -> Result<EtaSolve> {
        solve_eta_with_gap(sigma, self.sigma0, self.gap, self.p.q())
    }
}

/// `Q_{0→h} = N_m(μ₀, Cσ₀², μ₀, Cσ_h², σ₀/σ_h)`, the joint law of the flow
/// at times 0 and `h`. Its off-diagonal covariance is `Cσ₀²`.
///
/// For `q ≤ 2/3` or `q ≥ 4/3` the value is returned with a range warning
/// ([`MBivariate::range_warning`]); `J_h` stays computable for `q < 4/3`.
pub fn q0h(g0: &QGaussian1D, h: f64) -> Result<MBivariate> {
    let st = Step::new(g0, h)?;
    let rc = st.p.c().sqrt();
    MBivariate::new(
        st.mu0,
        rc * st.sigma0,
        st.mu0,
        rc * st.sigma_h,
        st.sigma0 / st.sigma_h,
        st.mp.q(),
    )
}

/// The minimiser `Q* = N_m(μ₀, Cσ₀², μ, Cσ², η_h)` over couplings of `N₀`
/// and `g`.
pub fn q_star(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<MBivariate> {
    same_family(g, g0)?;
    let st = Step::new(g0, h)?;
    let eta = st.eta(g.sigma())?;
    let rc = st.p.c().sqrt();
    MBivariate::new(st.mu0, rc * st.sigma0, g.mu(), rc * g.sigma(), eta.eta, st.mp.q())
}

/// `J_h(g | g0)` in closed form:
///
/// `½ C₁(m,2) (C₀(m,2)/(Cσ₀√D))^{1−m} [ (σ−σ₀)²/D + 2σ₀σ(1−η_h)/D
///   + (μ−μ₀)²/(CD) + 2 log_m (σ₀/(σ η_h))^{1/(3−m)} − 1 ]`.
pub fn jh(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    same_family(g, g0)?;
    let st = Step::new(g0, h)?;
    let eta = st.eta(g.sigma())?;
    let (sigma, sigma0, d) = (g.sigma(), st.sigma0, st.gap);
    let c = st.p.c();
    let m = st.mp.q();
    let ds = sigma - sigma0;
    let dm = g.mu() - st.mu0;
    let log_term = 2.0 * q_log_unchecked((sigma0 / (sigma * eta.eta)).powf(1.0 / (3.0 - m)), m);
    let bracket = ds * ds / d
        + 2.0 * sigma0 * sigma * eta.one_minus_eta / d
        + dm * dm / (c * d)
        + log_term
        - 1.0;
    let norm = (st.mp.c0() / (c * sigma0 * d.sqrt())).powf(1.0 - m);
    Ok(0.5 * st.mp.c1() * norm * bracket)
}

/// `𝓕_h = 2η^q/(1+η) (σ₀/σ)^{1−q} + q log_q(σ₀/(ση)) − 1`.
pub fn f_h(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    same_family(g, g0)?;
    let st = Step::new(g0, h)?;
    let eta = st.eta(g.sigma())?;
    Ok(f_h_from(&st, g.sigma(), &eta))
}

fn f_h_from(st: &Step, sigma: f64, eta: &EtaSolve) -> f64 {
    let q = st.p.q();
    let ratio = st.sigma0 / sigma;
    2.0 * eta.eta.powf(q) / (1.0 + eta.eta) * ratio.powf(1.0 - q)
        + q * q_log_unchecked(ratio / eta.eta, q)
        - 1.0
}

/// `𝓕_h` from its defining expression
/// `2σ₀σ(1−η)/D + 2 log_m (σ₀/(ση))^{1/(3−m)} − 1`.
pub fn f_h_raw(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    same_family(g, g0)?;
    let st = Step::new(g0, h)?;
    let eta = st.eta(g.sigma())?;
    let m = st.mp.q();
    let sigma = g.sigma();
    Ok(2.0 * st.sigma0 * sigma * eta.one_minus_eta / st.gap
        + 2.0 * q_log_unchecked((st.sigma0 / (sigma * eta.eta)).powf(1.0 / (3.0 - m)), m)
        - 1.0)
}

/// `𝓕 = log_q(σ₀/σ)`.
pub fn f_limit(g: &QGaussian1D, g0: &QGaussian1D) -> Result<f64> {
    same_family(g, g0)?;
    Ok(q_log_unchecked(g0.sigma() / g.sigma(), g.q()))
}

/// `a (σ_h²−σ₀²)^{1/q} J_h(g|g0)`, whose `h → 0` limit is `W₂²(g, g0)`.
///
/// Evaluated as `W₂² + 2Cσ₀σ(1−η_h) + CD (q log_q(σ₀/(ση_h)) − 1)`.
pub fn rescaled_first(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    same_family(g, g0)?;
    let st = Step::new(g0, h)?;
    let eta = st.eta(g.sigma())?;
    let c = st.p.c();
    let q = st.p.q();
    let sigma = g.sigma();
    let w2 = wasserstein2_sq(g, g0)?;
    Ok(w2
        + 2.0 * c * st.sigma0 * sigma * eta.one_minus_eta
        + c * st.gap * (q * q_log_unchecked(st.sigma0 / (sigma * eta.eta), q) - 1.0))
}

/// `ab D^{(1−q)/q} J_h − (b/D) W₂²`, whose `h → 0` limit is
/// `E_q(g) − E_q(g0)`. Evaluated as `bC·𝓕_h`.
pub fn rescaled_second(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    same_family(g, g0)?;
    let st = Step::new(g0, h)?;
    let eta = st.eta(g.sigma())?;
    let coeff = coefficients_for(&st.p, st.sigma0)?;
    Ok(coeff.b * st.p.c() * f_h_from(&st, g.sigma(), &eta))
}

/// `ab D^{(1−q)/q} J_h − W₂²/(2h)`.
///
/// Equals [`rescaled_second`] plus `(b/D − 1/(2h)) W₂²`; the bracket is
/// formed without cancellation.
pub fn rescaled_third(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
    let second = rescaled_second(g, g0, h)?;
    let w2 = wasserstein2_sq(g, g0)?;
    if w2 == 0.0 {
        return Ok(second);
    }
    let st = Step::new(g0, h)?;
    Ok(second + third_minus_second_coefficient(&st)? * w2)
}

/// `b/D − 1/(2h)`, non-negative for `0 < q < 1`.
pub fn third_statement_gap(g0: &QGaussian1D, h: f64) -> Result<f64> {
    third_minus_second_coefficient(&Step::new(g0, h)?)
}

fn third_minus_second_coefficient(st: &Step) -> Result<f64> {
    let q = st.p.q();
    let coeff = coefficients_for(&st.p, st.sigma0)?;
    // b/D − 1/(2h) = [(b − b̂) + (b̂ − D/(2h))]/D with b̂ = 1/((3−q)σ₀^{1−q});
    // b̂·2h − D = σ₀²(εx − ((1+x)^ε − 1)), x = h/σ₀^{3−q}, ε = 2/(3−q).
    let b_hat = 1.0 / ((3.0 - q) * st.sigma0.powf(1.0 - q));
    let x = st.h / st.sigma0.powf(3.0 - q);
    let defect = st.sigma0 * st.sigma0 * power_increment_defect(x, 2.0 / (3.0 - q));
    Ok(((coeff.b - b_hat) + defect / (2.0 * st.h)) / st.gap)
}

/// Literal forms of the rescaled functionals, built on [`jh`]. They lose
/// precision as `h → 0` and serve as an independent route in tests.
pub mod direct {
    use super::*;

    fn parts(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<(f64, GammaCoefficients, f64, f64, f64)> {
        let st = Step::new(g0, h)?;
        let coeff = coefficients_for(&st.p, st.sigma0)?;
        let a = coeff.a.ok_or(Error::InvalidQ { q: st.mp.q(), d: 2 })?;
        Ok((a, coeff, st.gap, jh(g, g0, h)?, wasserstein2_sq(g, g0)?))
    }

    pub fn rescaled_first(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
        let (a, k, d, j, _) = parts(g, g0, h)?;
        Ok(a * d.powf(1.0 / k.q) * j)
    }

    pub fn rescaled_second(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
        let (a, k, d, j, w2) = parts(g, g0, h)?;
        Ok(a * k.b * d.powf((1.0 - k.q) / k.q) * j - k.b / d * w2)
    }

    pub fn rescaled_third(g: &QGaussian1D, g0: &QGaussian1D, h: f64) -> Result<f64> {
        let (a, k, d, j, w2) = parts(g, g0, h)?;
        Ok(a * k.b * d.powf((1.0 - k.q) / k.q) * j - w2 / (2.0 * h))
    }
}

/// One step of the minimising-movement scheme restricted to q-Gaussians.
///
/// The mean term of `K_h` is a separate non-negative quadratic, so `μ* = μ₀`.
/// The scale solves `σ − σ₀ = h b σ₀^{1−q} σ^{q−2}`, on which `K_h` is
/// strictly convex.
pub fn jko_step(g0: &QGaussian1D, h: f64) -> Result<QGaussian1D> {
    positive_step(h)?;
    let q = g0.q();
    let sigma0 = g0.sigma();
    let coeff = coefficients_for(g0.params(), sigma0)?;
    let k = h * coeff.b * sigma0.powf(1.0 - q);
    // δ = σ − σ₀; δ − k (σ₀+δ)^{q−2} is increasing and changes sign on
    // [0, k σ₀^{q−2}] because (σ₀+δ)^{q−2} ≤ σ₀^{q−2}.
    let hi = k * sigma0.powf(q - 2.0);
    let f = |delta: f64| delta - k * (sigma0 + delta).powf(q - 2.0);
    let root = brent(
        f,
        0.0,
        hi,
        Tolerance {
            abs: 1e-300,
            rel: 2.0 * f64::EPSILON,
            max_iter: 300,
        },
    )?;
    let next = g0.with_mu_sigma(g0.mu(), sigma0 + root.x)?;

    // Second derivative of K_h in σ is C/(2h) + ½bC(2−q)σ₀^{1−q}σ^{q−3} > 0.
    let p = g0.params();
    let curvature = p.c() / (2.0 * h)
        + 0.5 * coeff.b * p.c() * (2.0 - q) * sigma0.powf(1.0 - q) * next.sigma().powf(q - 3.0);
    if !(curvature > 0.0) {
        return Err(Error::InvalidArgument("stationary point is not a minimum".into()));
    }
    Ok(next)
}
