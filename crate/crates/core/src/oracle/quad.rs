//! Adaptive quadrature on intervals, half-lines and the real line.
//!
//! Each panel is integrated with 15-point Gauss–Legendre on the whole panel
//! and on its two halves; the difference is the panel's error estimate and
//! the two-halves sum its value. The panel with the largest estimate is split
//! until the total estimate meets the tolerance.
//!
//! Infinite tails beyond a breakpoint `b` are mapped by `x = b ± s(eᵘ − 1)`.
//! A q-Gaussian tail decays like a power of `x`, hence exponentially in `u`;
//! the cut-off `U` is the first point where the local exponential envelope
//! `g(U)/λ` of the remaining integral falls below `tail_mass_bound` times
//! the size of the core integral (capped at 1). Tails too slow for that
//! (entropies near the edge of integrability) are cut once the decay rate
//! `λ` has settled, and `g(U)/λ` is added to the value; the error then
//! carries the first-order effect of the remaining drift in `λ`.

use std::cell::Cell;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::qgaussian::SupportInterval;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Largest discarded mass allowed when an infinite tail is cut off.
    pub tail_mass_bound: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_subdivisions: 5000,
            tail_mass_bound: 1e-15,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.tail_mass_bound > 0.0
            && self.max_subdivisions > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid quadrature config {self:?}")))
        }
    }

    /// Same policy with every tolerance scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            tail_mass_bound: self.tail_mass_bound * factor,
            ..*self
        }
    }
}

/// Where the integration range was cut, if anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Truncation {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Envelope estimate of the discarded integral, already included in
    /// [`Integral::error`].
    pub discarded: f64,
    /// Power-law tail integral added to [`Integral::value`] beyond the cuts.
    pub extrapolated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
    pub truncation: Truncation,
}

/// A one-dimensional integration domain: a chain of finite breakpoints,
/// optionally continued to infinity on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    breaks: Vec<f64>,
    lower_tail: Option<f64>,
    upper_tail: Option<f64>,
}

impl Axis {
    /// `[lo, hi]`, with optional interior breakpoints.
    pub fn finite(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("breakpoints must be finite".into()));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self {
            breaks: points,
            lower_tail: None,
            upper_tail: None,
        })
    }

    /// The whole line, with breakpoints at `c − s, c, c + s` for every
    /// `(c, s)` hint; tails use the largest hinted scale.
    pub fn real_line(hints: &[(f64, f64)]) -> Result<Self> {
        if hints.is_empty() || hints.iter().any(|&(c, s)| !c.is_finite() || !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad centre/scale hints {hints:?}")));
        }
        let scale = hints.iter().map(|h| h.1).fold(0.0, f64::max);
        let mut axis = Self::finite(hints.iter().flat_map(|&(c, s)| [c - s, c, c + s]).collect())?;
        axis.lower_tail = Some(scale);
        axis.upper_tail = Some(scale);
        Ok(axis)
    }

    /// A support interval; `centre` and `scale` place breakpoints and size
    /// the tail maps when the interval is unbounded.
    pub fn from_support(support: SupportInterval, centre: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument(format!("scale {scale} must be positive")));
        }
        let (lo, hi) = (support.lo, support.hi);
        let inside = |x: f64| x > lo && x < hi;
        let mut points: Vec<f64> = [centre - scale, centre, centre + scale]
            .into_iter()
            .filter(|&x| inside(x))
            .collect();
        if lo.is_finite() {
            points.push(lo);
        }
        if hi.is_finite() {
            points.push(hi);
        }
        if points.is_empty() {
            points.push(if lo.is_finite() { lo + scale } else if hi.is_finite() { hi - scale } else { centre });
        }
        let mut axis = Self::finite(points)?;
        axis.lower_tail = (!lo.is_finite()).then_some(scale);
        axis.upper_tail = (!hi.is_finite()).then_some(scale);
        Ok(axis)
    }

    /// True when the domain has zero length.
    pub fn is_empty(&self) -> bool {
        self.breaks.len() < 2 && self.lower_tail.is_none() && self.upper_tail.is_none()
    }
}

/// `∫ f` over a support interval with no centring information
/// (centre 0 and unit scale for unbounded ranges).
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, support: SupportInterval, cfg: &QuadratureConfig) -> Result<Integral> {
    let centre = match (support.lo.is_finite(), support.hi.is_finite()) {
        (true, true) => 0.5 * (support.lo + support.hi),
        (true, false) => support.lo + 1.0,
        (false, true) => support.hi - 1.0,
        (false, false) => 0.0,
    };
    integrate_axis(f, &Axis::from_support(support, centre, 1.0)?, cfg)
}

/// `∫ f` over an [`Axis`].
pub fn integrate_axis<F: Fn(f64) -> f64>(f: F, axis: &Axis, cfg: &QuadratureConfig) -> Result<Integral> {
    cfg.validate()?;
    let mut panels: Vec<(f64, f64)> = axis.breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let mut truncation = Truncation::default();
    let mut tails: Vec<(Box<dyn Fn(f64) -> f64 + '_>, f64)> = Vec::new();
    let f = &f;
    panels.retain(|&(a, b)| b > a);
    // Tails are cut relative to the size of the core integral, never more
    // loosely than the absolute bound; in 2D this keeps the sum of the
    // discarded slice tails below the bound as well.
    let mut core_size = 0.0;
    for &(a, b) in &panels {
        core_size += rule(f, a, b)?.abs();
    }
    let tail_bound = if core_size > 0.0 {
        cfg.tail_mass_bound * core_size.min(1.0)
    } else {
        cfg.tail_mass_bound
    };

    if let Some(s) = axis.lower_tail {
        let b = axis.breaks[0];
        let g = move |u: f64| {
            let e = u.exp();
            s * e * f(b - s * (e - 1.0))
        };
        let cut = tail_cutoff(&g, tail_bound, cfg.abs_tol)?;
        truncation.lower = Some(b - s * cut.u.exp_m1());
        truncation.discarded += cut.discarded;
        truncation.extrapolated += cut.extrapolated;
        tails.push((Box::new(g), cut.u));
    }
    if let Some(s) = axis.upper_tail {
        let b = *axis.breaks.last().expect("axis has a breakpoint");
        let g = move |u: f64| {
            let e = u.exp();
            s * e * f(b + s * (e - 1.0))
        };
        let cut = tail_cutoff(&g, tail_bound, cfg.abs_tol)?;
        truncation.upper = Some(b + s * cut.u.exp_m1());
        truncation.discarded += cut.discarded;
        truncation.extrapolated += cut.extrapolated;
        tails.push((Box::new(g), cut.u));
    }

    // All pieces share one error budget, so run them through one queue.
    let mut pieces: Vec<(&dyn Fn(f64) -> f64, f64, f64)> = Vec::new();
    let core: &dyn Fn(f64) -> f64 = f;
    for &(a, b) in &panels {
        pieces.push((core, a, b));
    }
    for (g, cut) in &tails {
        pieces.push((g.as_ref(), 0.0, *cut));
    }
    let mut result = adaptive(&pieces, cfg)?;
    result.value += truncation.extrapolated;
    result.error += truncation.discarded;
    result.truncation = truncation;
    Ok(result)
}

/// `∬ f(x, y) dy dx` with the inner domain depending on `x`.
pub fn integrate_2d<F, A>(f: F, outer: &Axis, inner: A, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: Fn(f64, f64) -> f64,
    A: Fn(f64) -> Result<Axis>,
{
    let failure: Cell<Option<Error>> = Cell::new(None);
    let evaluations = Cell::new(0usize);
    let inner_cfg = cfg.scaled(0.1);
    let slice = |x: f64| -> f64 {
        let run = || -> Result<f64> {
            let axis = inner(x)?;
            if axis.is_empty() {
                return Ok(0.0);
            }
            let r = integrate_axis(|y| f(x, y), &axis, &inner_cfg)?;
            evaluations.set(evaluations.get() + r.evaluations);
            Ok(r.value)
        };
        match run() {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let outcome = integrate_axis(slice, outer, cfg);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let mut r = outcome?;
    r.evaluations = evaluations.get();
    Ok(r)
}

const ORDER: usize = 15;

fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-17 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let (nodes, weights) = gauss_legendre();
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(c + r * x);
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "integrand is not finite near x = {}",
                c + r * x
            )));
        }
        sum += w * v;
    }
    Ok(r * sum)
}

struct Panel<'a> {
    f: &'a dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl Panel<'_> {
    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel<'_> {}
impl PartialOrd for Panel<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel<'_> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<'a>(f: &'a dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64) -> Result<Panel<'a>> {
    let c = 0.5 * (a + b);
    let left = rule(f, a, c)?;
    let right = rule(f, c, b)?;
    Ok(Panel {
        f,
        a,
        b,
        left,
        right,
        err: (whole - left - right).abs(),
    })
}

fn adaptive(pieces: &[(&dyn Fn(f64) -> f64, f64, f64)], cfg: &QuadratureConfig) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    // Panels too short to split further keep their estimate here.
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut evaluations = 0;
    for &(f, a, b) in pieces {
        let whole = rule(f, a, b)?;
        heap.push(panel(f, a, b, whole)?);
        evaluations += 3 * ORDER;
    }
    let mut subdivisions = 0;
    loop {
        let value: f64 = frozen_value + heap.iter().map(Panel::value).sum::<f64>();
        let err: f64 = frozen_err + heap.iter().map(|p| p.err).sum::<f64>();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if err <= target || heap.is_empty() {
            return Ok(Integral {
                value,
                error: err,
                subdivisions,
                evaluations,
                truncation: Truncation::default(),
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::ToleranceNotMet {
                value,
                error: err,
                subdivisions,
            });
        }
        let p = heap.pop().expect("heap is non-empty");
        let c = 0.5 * (p.a + p.b);
        if !(c > p.a && c < p.b) || (p.b - p.a) <= 64.0 * f64::EPSILON * c.abs().max(f64::MIN_POSITIVE) {
            frozen_value += p.value();
            frozen_err += p.err;
            continue;
        }
        heap.push(panel(p.f, p.a, c, p.left)?);
        heap.push(panel(p.f, c, p.b, p.right)?);
        evaluations += 4 * ORDER;
        subdivisions += 1;
    }
}

struct TailCut {
    u: f64,
    /// Bound on the dropped integral; it goes into the error.
    discarded: f64,
    /// Envelope integral beyond `u`; it goes into the value.
    extrapolated: f64,
}

/// Finds `U` such that the integral of `g` over `u > U` is either below
/// `bound` or, for a settled exponential rate, known to within `bound`.
fn tail_cutoff(g: &dyn Fn(f64) -> f64, bound: f64, abs_tol: f64) -> Result<TailCut> {
    const STEP: f64 = 0.5;
    const MAX_U: f64 = 600.0;
    let mut prev = g(0.0).abs();
    let mut prev_rate: Option<f64> = None;
    let mut u = STEP;
    let mut hits = 0;
    let mut settled = 0;
    while u <= MAX_U {
        let val = g(u);
        let cur = val.abs();
        if !cur.is_finite() {
            return Err(Error::InvalidArgument(format!("tail integrand not finite at u = {u}")));
        }
        if cur == 0.0 {
            // A zero is only trusted once decay below the bound has been
            // seen; otherwise the integrand has most likely under- or
            // overflowed with real mass still beyond it.
            if hits > 0 || prev <= bound.max(abs_tol) {
                return Ok(TailCut {
                    u,
                    discarded: 0.0,
                    extrapolated: 0.0,
                });
            }
            break;
        }
        let rate = (prev / cur).ln() / STEP;
        if rate > 0.05 {
            let remaining = cur / rate;
            if remaining <= bound {
                hits += 1;
                // Two consecutive confirmations guard against a bump.
                if hits == 2 {
                    return Ok(TailCut {
                        u,
                        discarded: remaining,
                        extrapolated: 0.0,
                    });
                }
            } else {
                hits = 0;
                // ∫ g = g/λ · (1 + λ'/λ² + …); the drift term is the uncertainty.
                let drift = prev_rate.map_or(f64::INFINITY, |p| (rate - p).abs() / STEP);
                let uncertainty = 2.0 * remaining * drift / (rate * rate);
                if uncertainty <= bound {
                    settled += 1;
                    if settled == 2 {
                        return Ok(TailCut {
                            u,
                            discarded: uncertainty,
                            extrapolated: val.signum() * remaining,
                        });
                    }
                } else {
                    settled = 0;
                }
            }
        } else {
            hits = 0;
            settled = 0;
        }
        prev_rate = Some(rate);
        prev = cur;
        u += STEP;
    }
    Err(Error::ToleranceNotMet {
        value: f64::NAN,
        error: prev,
        subdivisions: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_for_degree_29() {
        let v = rule(&|x: f64| x.powi(28), -1.0, 1.0).unwrap();
        assert_relative_eq!(v, 2.0 / 29.0, max_relative = 1e-14);
        let (_, w) = gauss_legendre();
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn smooth_and_singular_finite() {
        let cfg = QuadratureConfig::default();
        let r = integrate_1d(|x: f64| x.sin(), SupportInterval::new(0.0, std::f64::consts::PI).unwrap(), &cfg)
            .unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-13);
        let r = integrate_1d(|x: f64| x.sqrt(), SupportInterval::new(0.0, 1.0).unwrap(), &cfg).unwrap();
        assert_relative_eq!(r.value, 2.0 / 3.0, max_relative = 1e-12);
        assert!(r.error <= 1e-12);
    }

    #[test]
    fn gaussian_and_power_tails() {
        let cfg = QuadratureConfig::default();
        let r = integrate_axis(|x: f64| (-x * x / 2.0).exp(), &Axis::real_line(&[(0.0, 1.0)]).unwrap(), &cfg).unwrap();
        assert_relative_eq!(r.value, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-13);
        let r = integrate_axis(
            |x: f64| 1.0 / (1.0 + x * x),
            &Axis::real_line(&[(0.0, 1.0)]).unwrap(),
            &QuadratureConfig {
                tail_mass_bound: 1e-13,
                ..cfg
            },
        )
        .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI, max_relative = 1e-12);
        // The 1/x² tails are settled power laws: both are extrapolated.
        assert_relative_eq!(
            r.truncation.extrapolated,
            2.0 / r.truncation.upper.unwrap(),
            max_relative = 1e-3
        );
    }

    #[test]
    fn slow_power_tail_is_extrapolated() {
        // ∫₁^∞ x^{-1.05} dx = 20; a plain cut-off would need x ≈ 10^{300}.
        let s = SupportInterval::new(1.0, f64::INFINITY).unwrap();
        let r = integrate_1d(|x: f64| x.powf(-1.05), s, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(r.value, 20.0, max_relative = 1e-12);
        assert!(r.error < 1e-12);
    }

    #[test]
    fn underflow_without_decay_is_reported() {
        // Looks like a slow power law, then drops to zero far out: the zero
        // must not be read as the end of the tail.
        let f = |x: f64| if x < 1e6 { 1.0 / (1.0 + x.abs()).sqrt() } else { 0.0 };
        let r = integrate_axis(f, &Axis::real_line(&[(0.0, 1.0)]).unwrap(), &QuadratureConfig::default());
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn half_line() {
        let s = SupportInterval::new(0.0, f64::INFINITY).unwrap();
        let r = integrate_1d(|x: f64| (-x).exp(), s, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn non_decaying_tail_is_reported() {
        let r = integrate_axis(
            |x: f64| 1.0 / (1.0 + x.abs()),
            &Axis::real_line(&[(0.0, 1.0)]).unwrap(),
            &QuadratureConfig::default(),
        );
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn subdivision_limit() {
        let cfg = QuadratureConfig {
            max_subdivisions: 2,
            ..Default::default()
        };
        let r = integrate_1d(|x: f64| (50.0 * x).sin().abs(), SupportInterval::new(0.0, 10.0).unwrap(), &cfg);
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn disc_area() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let r = integrate_2d(
            |_, _| 1.0,
            &Axis::finite(vec![-1.0, 1.0]).unwrap(),
            |x| {
                let w = (1.0 - x * x).max(0.0).sqrt();
                Axis::finite(vec![-w, w])
            },
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = QuadratureConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate_1d(|x| x, SupportInterval::new(0.0, 1.0).unwrap(), &cfg).is_err());
    }
}
