//! Entropies and relative entropies by direct quadrature of their defining
//! integrals. Nothing here calls the closed forms.

use super::quad::{integrate_2d, integrate_axis, Axis, Integral, QuadratureConfig};
use crate::error::{Error, Result};
use crate::qgaussian::{MBivariate, QGaussian1D};

/// `(t^{1−m} − 1)/(1−m)`, written out rather than shared with `qmath`.
fn log_m(t: f64, m: f64) -> f64 {
    (t.powf(1.0 - m) - 1.0) / (1.0 - m)
}

/// `t log_m s`, with the limits that occur at the edge of a support or
/// where a heavy-tailed density underflows.
fn t_log_m(t: f64, s: f64, m: f64) -> f64 {
    if t == 0.0 || (s == 0.0 && m > 1.0) {
        0.0
    } else {
        t * log_m(s, m)
    }
}

/// Integration domain covering the support of a 1D q-Gaussian.
pub fn axis_1d(g: &QGaussian1D) -> Result<Axis> {
    Axis::from_support(g.support(), g.mu(), g.variance().sqrt())
}

/// Outer (first-coordinate) domain for the union of the supports.
fn outer_axis(ds: &[&MBivariate]) -> Result<Axis> {
    if ds[0].m() > 1.0 {
        return Axis::real_line(&ds.iter().map(|b| (b.mu1, b.s1)).collect::<Vec<_>>());
    }
    let mut points = Vec::new();
    for b in ds {
        let r = b.mparams().support_radius();
        points.extend([b.mu1 - r * b.s1, b.mu1, b.mu1 + r * b.s1]);
    }
    Axis::finite(points)
}

/// Inner domain at first coordinate `x`: the union of the support chords.
fn inner_axis(ds: &[&MBivariate], x: f64) -> Result<Axis> {
    let conditional = |b: &MBivariate| {
        let u = (x - b.mu1) / b.s1;
        let centre = b.mu2 + b.s2 * b.theta * u;
        let spread = b.s2 * ((1.0 - b.theta) * (1.0 + b.theta)).sqrt();
        (u, centre, spread)
    };
    if ds[0].m() > 1.0 {
        let hints: Vec<(f64, f64)> = ds
            .iter()
            .map(|b| {
                let (u, c, s) = conditional(b);
                (c, s * (1.0 + u * u).sqrt())
            })
            .collect();
        return Axis::real_line(&hints);
    }
    let mut points = Vec::new();
    for b in ds {
        let r = b.mparams().support_radius();
        let (u, c, s) = conditional(b);
        let w2 = r * r - u * u;
        if w2 > 0.0 {
            let w = s * w2.sqrt();
            points.extend([c - w, c, c + w]);
        }
    }
    Axis::finite(points)
}

/// Integrates a function of the two densities' values over the plane.
fn integrate_pair<F>(f: &MBivariate, g: &MBivariate, cfg: &QuadratureConfig, integrand: F) -> Result<Integral>
where
    F: Fn(f64, f64) -> f64,
{
    let ds = [f, g];
    integrate_2d(
        |x, y| integrand(f.density(x, y), g.density(x, y)),
        &outer_axis(&ds)?,
        |x| inner_axis(&ds, x),
        cfg,
    )
}

/// `∫ ρ log_q ρ` for a 1D q-Gaussian.
pub fn entropy_quad_1d(g: &QGaussian1D, cfg: &QuadratureConfig) -> Result<Integral> {
    let q = g.q();
    integrate_axis(|x| t_log_m(g.density(x), g.density(x), q), &axis_1d(g)?, cfg)
}

/// `∫ f log_m f` for a bivariate m-Gaussian.
pub fn entropy_quad_2d(b: &MBivariate, cfg: &QuadratureConfig) -> Result<Integral> {
    let m = b.m();
    integrate_pair(b, b, cfg, |f, _| t_log_m(f, f, m))
}

/// The two printed forms of the m-relative entropy integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelEntropyForm {
    /// `f log_m f − g log_m g − (2−m) log_m g · (f − g)`
    Bregman,
    /// `f log_m f + (1−m) g log_m g − (2−m) f log_m g`
    Expanded,
}

/// `H_m(Q ‖ P) = (1/(2−m)) ∫ [ … ]` by 2D quadrature.
pub fn m_rel_entropy_quad_form(
    q: &MBivariate,
    p: &MBivariate,
    form: RelEntropyForm,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if q.m() != p.m() {
        return Err(Error::MismatchedQ(q.m(), p.m()));
    }
    q.require_verified()?;
    let m = q.m();
    let mut r = integrate_pair(q, p, cfg, |f, g| match form {
        RelEntropyForm::Bregman => {
            let lg = if g == 0.0 && m > 1.0 { 0.0 } else { log_m(g, m) };
            t_log_m(f, f, m) - t_log_m(g, g, m) - (2.0 - m) * lg * (f - g)
        }
        RelEntropyForm::Expanded => t_log_m(f, f, m) + (1.0 - m) * t_log_m(g, g, m) - (2.0 - m) * t_log_m(f, g, m),
    })?;
    r.value /= 2.0 - m;
    r.error /= 2.0 - m;
    Ok(r)
}

/// [`m_rel_entropy_quad_form`] with the expanded integrand.
pub fn m_rel_entropy_quad(q: &MBivariate, p: &MBivariate, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(m_rel_entropy_quad_form(q, p, RelEntropyForm::Expanded, cfg)?.value)
}

/// `∫ xᵏ ρ(x) dx` for a 1D q-Gaussian, about its mean.
pub fn central_moment_1d(g: &QGaussian1D, k: i32, cfg: &QuadratureConfig) -> Result<Integral> {
    let mu = g.mu();
    integrate_axis(|x| (x - mu).powi(k) * g.density(x), &axis_1d(g)?, cfg)
}

/// `∬ ρ` for a bivariate m-Gaussian.
pub fn mass_2d(b: &MBivariate, cfg: &QuadratureConfig) -> Result<Integral> {
    integrate_pair(b, b, cfg, |f, _| f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::make_params;
    use approx::assert_relative_eq;

    #[test]
    fn log_m_helpers() {
        assert_relative_eq!(log_m(2.0, 0.5), 2.0 * (2f64.sqrt() - 1.0), max_relative = 1e-15);
        assert_eq!(t_log_m(0.0, 0.0, 0.5), 0.0);
        assert_eq!(t_log_m(1.0, 0.0, 0.5), -2.0);
        assert_eq!(t_log_m(1e-300, 0.0, 1.2), 0.0);
    }

    #[test]
    fn moments_small_set() {
        let cfg = QuadratureConfig::default();
        for &q in &[0.5, 1.3] {
            let g = QGaussian1D::new(0.4, 1.2, make_params(q, 1).unwrap()).unwrap();
            let mass = central_moment_1d(&g, 0, &cfg).unwrap();
            let var = central_moment_1d(&g, 2, &cfg).unwrap();
            assert_relative_eq!(mass.value, 1.0, max_relative = 1e-11);
            assert_relative_eq!(var.value, g.variance(), max_relative = 1e-9);
        }
    }

    #[test]
    fn self_divergence_vanishes() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-10,
            ..Default::default()
        };
        for &m in &[0.6, 1.2] {
            let p = MBivariate::new(0.1, 1.0, -0.2, 0.8, 0.3, m).unwrap();
            let h = m_rel_entropy_quad(&p, &p, &cfg).unwrap();
            assert!(h.abs() < 1e-8, "m={m}: {h}");
            let mass = mass_2d(&p, &cfg).unwrap();
            assert_relative_eq!(mass.value, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn rejects_mixed_or_unverified() {
        let cfg = QuadratureConfig::default();
        let a = MBivariate::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.6).unwrap();
        let b = MBivariate::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.7).unwrap();
        assert!(matches!(m_rel_entropy_quad(&a, &b, &cfg), Err(Error::MismatchedQ(..))));
        let c = MBivariate::new(0.0, 1.0, 0.0, 1.0, 0.0, -0.5).unwrap();
        assert!(matches!(
            m_rel_entropy_quad(&c, &c, &cfg),
            Err(Error::OutsideVerifiedRange { .. })
        ));
    }
}
