//! The exact porous-medium semigroup on 1D q-Gaussians.
//!
//! Starting from `N_q(μ₀, Cσ₀²)` the solution of `∂ₜρ = Δρ^{2−q}` at time `t`
//! is `N_q(μ₀, Cσ_t²)` with `σ_t^{3−q} = σ₀^{3−q} + t`.

use crate::error::{Error, Result};
use crate::qgaussian::QGaussian1D;
use crate::qmath::{power_increment, QParams};

/// `σ_h = (h + σ₀^{3−q})^{1/(3−q)}`.
pub fn evolve_sigma(sigma0: f64, h: f64, q: f64) -> f64 {
    let k = 3.0 - q;
    (h + sigma0.powf(k)).powf(1.0 / k)
}

/// `σ_h² − σ₀²`, computed as `σ₀² ((1 + h/σ₀^{3−q})^{2/(3−q)} − 1)` so that it
/// keeps full relative precision as `h → 0`.
pub fn variance_gap(sigma0: f64, h: f64, q: f64) -> f64 {
    let k = 3.0 - q;
    sigma0 * sigma0 * power_increment(h / sigma0.powf(k), 2.0 / k)
}

/// The 1D covariance map `Θ(V) = V^{2/(3−q)}`, which turns the flow into
/// the translation `Θ(V_t)^{(3−q)/2} = Θ(V)^{(3−q)/2} + t`.
pub fn theta_map_1d(v: f64, q: f64) -> f64 {
    v.powf(2.0 / (3.0 - q))
}

/// A q-Gaussian together with the time it has been evolved for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub g: QGaussian1D,
    pub t: f64,
}

impl FlowState {
    pub fn new(g: QGaussian1D) -> Self {
        Self { g, t: 0.0 }
    }

    /// Exact evolution by `dt ≥ 0`.
    pub fn evolve(&self, dt: f64) -> Result<Self> {
        if !(dt >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative time step {dt}")));
        }
        let sigma = evolve_sigma(self.g.sigma(), dt, self.g.q());
        Ok(Self {
            g: self.g.with_mu_sigma(self.g.mu(), sigma)?,
            t: self.t + dt,
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        self.g.density(x)
    }
}

/// Barenblatt–Pattle profile `[A t^{−dα(1−q)} − B|x|² t^{−1}]₊^{1/(1−q)}`.
pub fn barenblatt_density(t: f64, x: f64, p: &QParams) -> f64 {
    let q = p.q();
    let k = 1.0 - q;
    let bracket = p.a() * t.powf(-(p.d() as f64) * p.alpha() * k) - p.b() * x * x / t;
    // For q > 1, B < 0 and the bracket never vanishes.
    if bracket <= 0.0 {
        return 0.0;
    }
    bracket.powf(1.0 / k)
}

/// Finite-difference grid for [`pde_residual`].
#[derive(Debug, Clone, Copy)]
pub struct ResidualGrid {
    pub dx: f64,
    pub dt: f64,
    /// Grid points are kept only where the density stays above this
    /// fraction of the peak at the three stencil positions.
    pub density_floor: f64,
}

impl ResidualGrid {
    pub fn new(dx: f64, dt: f64) -> Self {
        Self {
            dx,
            dt,
            density_floor: 1e-3,
        }
    }
}

/// Max over interior grid points of `|∂ₜρ − ∂ₓₓ(ρ^{2−q})|`, both by central
/// differences, for the exact flow `ρ(t,·)` started at `g0`.
///
/// The grid is `x_k = μ₀ + k·dx`; the time derivative differences the exact
/// semigroup at `t ± dt`.
pub fn pde_residual(g0: &QGaussian1D, t: f64, grid: ResidualGrid) -> Result<f64> {
    let ResidualGrid {
        dx,
        dt,
        density_floor,
    } = grid;
    if !(dx > 0.0) || !(dt > 0.0) || !(t > dt) || !(density_floor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate grid: dx = {dx}, dt = {dt}, t = {t}"
        )));
    }
    let q = g0.q();
    let start = FlowState::new(*g0);
    let before = start.evolve(t - dt)?;
    let now = start.evolve(t)?;
    let after = start.evolve(t + dt)?;

    // The support only grows in time, so the earliest profile is the tightest.
    let floor = density_floor * before.g.peak();
    let mu = g0.mu();
    let inside = |x: f64| {
        before.density(x - dx) > floor && before.density(x + dx) > floor && now.density(x) > floor
    };

    let power = 2.0 - q;
    let flux = |x: f64| now.density(x).powf(power);
    let residual_at = |x: f64| {
        let dt_rho = (after.density(x) - before.density(x)) / (2.0 * dt);
        let lap = (flux(x + dx) - 2.0 * flux(x) + flux(x - dx)) / (dx * dx);
        (dt_rho - lap).abs()
    };

    let mut max_res: f64 = 0.0;
    let mut count = 0usize;
    for side in [1.0, -1.0] {
        let mut k: usize = if side > 0.0 { 0 } else { 1 };
        loop {
            let x = mu + side * k as f64 * dx;
            if !inside(x) {
                break;
            }
            max_res = max_res.max(residual_at(x));
            count += 1;
            k += 1;
        }
    }
    if count < 3 {
        return Err(Error::InvalidArgument(format!(
            "degenerate grid: only {count} interior points"
        )));
    }
    Ok(max_res)
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
    fn evolve_sigma_examples() {
        assert_eq!(evolve_sigma(1.7, 0.0, 0.8), 1.7f64.powf(2.2).powf(1.0 / 2.2));
        assert_relative_eq!(evolve_sigma(1.7, 0.0, 0.8), 1.7, max_relative = 1e-15);
        let s = evolve_sigma(1.0, 0.01, 0.8);
        assert_relative_eq!(s * s, 1.01f64.powf(2.0 / 2.2), max_relative = 1e-15);
        assert_relative_eq!(s * s, 1.009087, max_relative = 1e-6);
    }

    #[test]
    fn variance_gap_small_h() {
        for &q in &[0.3, 0.8, 1.2, 1.6] {
            let (s0, h) = (1.3, 1e-3);
            let direct = evolve_sigma(s0, h, q).powi(2) - s0 * s0;
            assert_relative_eq!(variance_gap(s0, h, q), direct, max_relative = 1e-10);
            // leading order 2h/((3−q)σ₀^{1−q}) for tiny h
            let tiny = 1e-18;
            assert_relative_eq!(
                variance_gap(s0, tiny, q),
                2.0 * tiny / ((3.0 - q) * s0.powf(1.0 - q)),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn theta_map_examples() {
        assert_eq!(theta_map_1d(1.0, 0.7), 1.0);
        assert_eq!(theta_map_1d(2.5, 1.0), 2.5);
        // With V = σ₀^{3−q} and V_t = V + t, Θ(V_t) − Θ(V) = σ_t² − σ₀².
        for &q in &[0.4, 0.8, 1.3] {
            let (s0, t) = (0.9f64, 0.35);
            let v = s0.powf(3.0 - q);
            let st = evolve_sigma(s0, t, q);
            assert_relative_eq!(theta_map_1d(v, q), s0 * s0, max_relative = 1e-14);
            assert_relative_eq!(
                theta_map_1d(v + t, q) - theta_map_1d(v, q),
                st * st - s0 * s0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn barenblatt_matches_q_gaussian() {
        for &q in &[0.3, 0.8, 1.2, 1.5] {
            let p = make_params(q, 1).unwrap();
            for &t in &[0.2f64, 1.0, 3.7] {
                let ref_g = QGaussian1D::new(0.0, t.powf(p.alpha()), p).unwrap();
                let peak = ref_g.peak();
                for i in 0..50 {
                    let x = -4.0 + 8.0 * i as f64 / 49.0;
                    let diff = (barenblatt_density(t, x, &p) - ref_g.density(x)).abs();
                    assert!(diff <= 1e-12 * peak, "q={q} t={t} x={x} diff={diff}");
                }
            }
        }
    }

    #[test]
    fn barenblatt_outside_support() {
        let p = make_params(0.8, 1).unwrap();
        let r = QGaussian1D::new(0.0, 1.0, p).unwrap().support().hi;
        assert_eq!(barenblatt_density(1.0, r * 1.01, &p), 0.0);
    }

    #[test]
    fn flow_state_semigroup() {
        let s = FlowState::new(g(0.7, 0.4, 1.1));
        let a = s.evolve(0.3).unwrap().evolve(0.45).unwrap();
        let b = s.evolve(0.75).unwrap();
        assert_relative_eq!(a.g.sigma(), b.g.sigma(), max_relative = 1e-14);
        assert_relative_eq!(a.t, 0.75);
        assert!(s.evolve(-1.0).is_err());
    }

    #[test]
    fn residual_second_order() {
        for &q in &[0.8, 1.2] {
            let g0 = g(q, 0.0, 1.0);
            let r1 = pde_residual(&g0, 0.5, ResidualGrid::new(0.02, 0.02)).unwrap();
            let r2 = pde_residual(&g0, 0.5, ResidualGrid::new(0.01, 0.01)).unwrap();
            let ratio = r1 / r2;
            assert!((3.4..4.6).contains(&ratio), "q={q} ratio={ratio}");
        }
    }

    #[test]
    fn residual_translation_invariant() {
        let grid = ResidualGrid::new(0.01, 0.01);
        let a = pde_residual(&g(0.8, 0.0, 1.0), 0.5, grid).unwrap();
        let b = pde_residual(&g(0.8, 3.0, 1.0), 0.5, grid).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-3);
    }

    #[test]
    fn residual_near_heat_equation() {
        // q → 1: ρ is close to a Gaussian of variance 2(t + σ₀²) solving ∂ₜρ = ρ''.
        let g0 = g(1.0 - 1e-4, 0.0, 1.0);
        let grid = ResidualGrid::new(0.01, 0.01);
        let r = pde_residual(&g0, 0.5, grid).unwrap();
        let heat = heat_residual(1.0, 0.5, grid);
        assert_relative_eq!(r, heat, max_relative = 0.05);
    }

    fn heat_residual(sigma0: f64, t: f64, grid: ResidualGrid) -> f64 {
        let rho = |t: f64, x: f64| {
            let v = 2.0 * (t + sigma0 * sigma0);
            (-x * x / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
        };
        let (dx, dt) = (grid.dx, grid.dt);
        let floor = grid.density_floor * rho(t - dt, 0.0);
        let mut best: f64 = 0.0;
        let mut k = 0i64;
        loop {
            let x = k as f64 * dx;
            if rho(t - dt, x + dx) <= floor {
                break;
            }
            let dtr = (rho(t + dt, x) - rho(t - dt, x)) / (2.0 * dt);
            let lap = (rho(t, x + dx) - 2.0 * rho(t, x) + rho(t, x - dx)) / (dx * dx);
            best = best.max((dtr - lap).abs());
            k += 1;
        }
        best
    }

    #[test]
    fn residual_rejects_degenerate_grid() {
        let g0 = g(0.8, 0.0, 1.0);
        assert!(pde_residual(&g0, 0.5, ResidualGrid::new(0.0, 0.01)).is_err());
        assert!(pde_residual(&g0, 0.005, ResidualGrid::new(0.01, 0.01)).is_err());
        assert!(pde_residual(&g0, 0.5, ResidualGrid::new(50.0, 0.01)).is_err());
    }

    proptest! {
        #[test]
        fn semigroup(s0 in 0.1f64..5.0, s in 0.0f64..3.0, u in 0.0f64..3.0,
                     q in prop_oneof![0.05f64..0.99, 1.01f64..1.66]) {
            let a = evolve_sigma(evolve_sigma(s0, s, q), u, q);
            let b = evolve_sigma(s0, s + u, q);
            prop_assert!(((a - b) / b).abs() <= 1e-13);
        }
    }
}
