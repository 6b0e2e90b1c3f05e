//! q-exponential calculus and the normalising constants of q-Gaussians.
//!
//! All q-dependent constants live in [`QParams`]; every other module reads
//! them from there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::gamma_ratio;

/// `[1 + (1−q) t]₊^{1/(1−q)}`.
///
/// When the bracket vanishes and the exponent is negative (q > 1) the value
/// is `+∞`, following the convention `0^a = ∞` for `a < 0`. `q = 1` gives
/// the ordinary exponential.
pub fn q_exp(t: f64, q: f64) -> f64 {
    if q == 1.0 {
        return t.exp();
    }
    let k = 1.0 - q;
    let bracket = 1.0 + k * t;
    if bracket <= 0.0 {
        return if k > 0.0 { 0.0 } else { f64::INFINITY };
    }
    ((k * t).ln_1p() / k).exp()
}

/// `(t^{1−q} − 1)/(1−q)` for `t > 0`; `q = 1` gives `ln t`.
pub fn q_log(t: f64, q: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { what: "q_log argument", value: t });
    }
    Ok(q_log_unchecked(t, q))
}

pub(crate) fn q_log_unchecked(t: f64, q: f64) -> f64 {
    if q == 1.0 {
        return t.ln();
    }
    let k = 1.0 - q;
    (k * t.ln()).exp_m1() / k
}

/// `(1+x)^ε − 1`, accurate for small `x`.
pub fn power_increment(x: f64, eps: f64) -> f64 {
    (eps * x.ln_1p()).exp_m1()
}

/// `ε x − ((1+x)^ε − 1)`, the gap between the linearisation of
/// `(1+x)^ε` at 0 and the function itself.
///
/// It is `≥ 0` whenever `0 < ε < 1` and `x ≥ 0`. Small `x` uses the binomial
/// series so the result keeps full relative precision even when `x` is
/// far below machine epsilon.
pub fn power_increment_defect(x: f64, eps: f64) -> f64 {
    if x.abs() < 0.05 {
        // −Σ_{k≥2} binom(ε, k) x^k
        let mut coeff = eps; // binom(ε, 1)
        let mut xk = x;
        let mut sum = 0.0;
        for k in 2..200 {
            coeff *= (eps - (k as f64 - 1.0)) / k as f64;
            xk *= x;
            let term = coeff * xk;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        -sum
    } else {
        eps * x - power_increment(x, eps)
    }
}

/// q-dependent constants for dimension `d`.
///
/// | field | value |
/// |---|---|
/// | `m` | `3 − 2/q` |
/// | `alpha` | `1/(d(1−q)+2)` |
/// | `c1` | `2/(2+(d+2)(1−q))` |
/// | `c0` | Gamma-ratio normalisation, branch chosen by `q < 1` or `q > 1` |
/// | `a` | Barenblatt normalisation `C₀^{2α(1−q)} (α/((2−q)C₁))^{dα(1−q)}` |
/// | `b` | Barenblatt spread `(1−q)α/(2(2−q))` |
/// | `c` | scale `(2−q)C₁A/α` such that the Barenblatt profile is `N_q(0, C t^{2α})` |
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QParams {
    q: f64,
    d: u32,
    m: f64,
    alpha: f64,
    c1: f64,
    c0: f64,
    a: f64,
    b: f64,
    c: f64,
}

/// `q ∈ (0,1) ∪ (1, (d+4)/(d+2))`.
pub fn in_admissible_set(q: f64, d: u32) -> bool {
    let upper = (d as f64 + 4.0) / (d as f64 + 2.0);
    q.is_finite() && q > 0.0 && q != 1.0 && q < upper
}

/// Builds [`QParams`] for `q ∈ Q_d`.
pub fn make_params(q: f64, d: u32) -> Result<QParams> {
    QParams::new(q, d)
}

impl QParams {
    pub fn new(q: f64, d: u32) -> Result<Self> {
        if d == 0 || !in_admissible_set(q, d) {
            return Err(Error::InvalidQ { q, d });
        }
        Self::definable(q, d)
    }

    /// Constants wherever their formulas make sense, even outside `Q_d`.
    ///
    /// The bivariate constants are evaluated at `m = 3 − 2/q`, which leaves
    /// `Q₂` for `q ≤ 2/3`; the formulas for `C₀(m,2)` and `C₁(m,2)` still hold
    /// there as long as `m < 3/2` and `m ≠ 1`.
    pub fn definable(q: f64, d: u32) -> Result<Self> {
        if d == 0 || !q.is_finite() || q == 1.0 || q >= 2.0 {
            return Err(Error::InvalidQ { q, d });
        }
        let df = d as f64;
        let k = 1.0 - q;
        let c1_den = 2.0 + (df + 2.0) * k;
        let alpha_den = df * k + 2.0;
        if !(c1_den > 0.0) || !(alpha_den > 0.0) {
            return Err(Error::InvalidQ { q, d });
        }
        let c1 = 2.0 / c1_den;
        let alpha = 1.0 / alpha_den;
        let c0 = c0_formula(q, d, c1)?;
        let a = c0.powf(2.0 * alpha * k) * (alpha / ((2.0 - q) * c1)).powf(df * alpha * k);
        let b = k * alpha / (2.0 * (2.0 - q));
        let c = (2.0 - q) * c1 * a / alpha;
        Ok(Self {
            q,
            d,
            m: 3.0 - 2.0 / q,
            alpha,
            c1,
            c0,
            a,
            b,
            c,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn d(&self) -> u32 {
        self.d
    }
    /// `3 − 2/q`.
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    /// Barenblatt normalisation `A`.
    pub fn a(&self) -> f64 {
        self.a
    }
    /// Barenblatt spread `B`.
    pub fn b(&self) -> f64 {
        self.b
    }
    /// Scale `C`: the Barenblatt profile at time `t` is `N_q(0, C t^{2α})`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Half-width, in units of `√V`, of the compact support when `q < 1`:
    /// `exp_q(−C₁ r²/2) > 0` iff `r² < 2/((1−q)C₁)`.
    pub fn support_radius(&self) -> f64 {
        if self.q < 1.0 {
            (2.0 / ((1.0 - self.q) * self.c1)).sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// Largest relative deviation between the cached constants and a fresh
    /// evaluation of their formulas.
    pub fn recompute_defect(&self) -> f64 {
        let fresh = match Self::definable(self.q, self.d) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        [
            (self.m, fresh.m),
            (self.alpha, fresh.alpha),
            (self.c1, fresh.c1),
            (self.c0, fresh.c0),
            (self.a, fresh.a),
            (self.b, fresh.b),
            (self.c, fresh.c),
        ]
        .iter()
        .map(|&(cached, f)| {
            if f == 0.0 {
                cached.abs()
            } else {
                ((cached - f) / f).abs()
            }
        })
        .fold(0.0, f64::max)
    }

    /// `C^{(3−q)/2} α / ((2−q) C₁ C₀^{1−q}) − 1`, which vanishes identically
    /// for `d = 1`. Uses the cached constants.
    pub fn scale_identity_defect(&self) -> f64 {
        let q = self.q;
        self.c.powf((3.0 - q) / 2.0) * self.alpha / ((2.0 - q) * self.c1 * self.c0.powf(1.0 - q))
            - 1.0
    }

    /// Copy with the cached `C₀` scaled by `1 + rel`, leaving every other
    /// constant untouched. Used to inject faults into the verification suite.
    #[doc(hidden)]
    pub fn with_c0_perturbed(&self, rel: f64) -> Self {
        Self {
            c0: self.c0 * (1.0 + rel),
            ..*self
        }
    }
}

fn c0_formula(q: f64, d: u32, c1: f64) -> Result<f64> {
    let half_d = d as f64 / 2.0;
    let (ratio, k) = if q < 1.0 {
        let base = (2.0 - q) / (1.0 - q);
        if !(base > 0.0) {
            return Err(Error::GammaArgument { arg: base, q, d });
        }
        (gamma_ratio(base + half_d, base), 1.0 - q)
    } else {
        let base = 1.0 / (q - 1.0);
        if !(base - half_d > 0.0) {
            return Err(Error::GammaArgument { arg: base - half_d, q, d });
        }
        (gamma_ratio(base, base - half_d), q - 1.0)
    };
    Ok(ratio * (k * c1 / (2.0 * std::f64::consts::PI)).powf(half_d))
}
