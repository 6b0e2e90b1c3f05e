//! Brute-force minimisers used to check the closed-form optimality
//! conditions.

use std::cell::Cell;

use super::entropy::m_rel_entropy_quad;
use super::quad::QuadratureConfig;
use crate::error::{Error, Result};
use crate::functionals::kh;
use crate::qgaussian::{MBivariate, QGaussian1D};
use crate::roots::golden_section;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ThetaMinimum {
    pub theta: f64,
    /// `H_m(Q_θ* ‖ P)` by quadrature.
    pub value: f64,
    pub evaluations: usize,
}

/// Minimises `θ ↦ H_m(Q_θ ‖ P)` by quadrature over the m-Gaussians `Q_θ`
/// with means `(ν₁, ν₂)`, scales `(ξ₁, ξ₂)` and correlation `θ ∈ (−1, 1)`.
///
/// A coarse grid in `atanh θ` brackets the minimum, golden section narrows
/// it, and a least-squares parabola through points straddling the golden
/// result removes the noise floor of the quadrature.
pub fn minimize_theta(
    p: &MBivariate,
    nu1: f64,
    xi1: f64,
    nu2: f64,
    xi2: f64,
    cfg: &QuadratureConfig,
) -> Result<ThetaMinimum> {
    p.require_verified()?;
    let m = p.m();
    let evaluations = Cell::new(0usize);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let objective = |theta: f64| -> f64 {
        evaluations.set(evaluations.get() + 1);
        let q = MBivariate::new(nu1, xi1, nu2, xi2, theta, m).and_then(|q| m_rel_entropy_quad(&q, p, cfg));
        match q {
            Ok(v) => v,
            Err(e) => {
                let first = failure.take().unwrap_or(e);
                failure.set(Some(first));
                f64::INFINITY
            }
        }
    };

    const GRID: usize = 25;
    const Z_MAX: f64 = 3.6;
    let zs: Vec<f64> = (0..GRID)
        .map(|i| -Z_MAX + 2.0 * Z_MAX * i as f64 / (GRID - 1) as f64)
        .collect();
    let values: Vec<f64> = zs.iter().map(|&z| objective(z.tanh())).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values[best];
    if !(spread > 1e-14 * values[best].abs().max(1e-300)) {
        return Err(failure.take().unwrap_or(Error::FlatObjective));
    }

    let lo = zs[best.saturating_sub(1)].tanh();
    let hi = zs[(best + 1).min(GRID - 1)].tanh();
    let golden = golden_section(objective, lo, hi, 1e-6);

    const DELTA: f64 = 2e-4;
    let centre = golden.x.clamp(-1.0 + 4.0 * DELTA, 1.0 - 4.0 * DELTA);
    let offsets = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let samples: Vec<(f64, f64)> = offsets
        .iter()
        .map(|k| {
            let t = centre + k * DELTA;
            (k * DELTA, objective(t))
        })
        .collect();
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let theta = match parabola_vertex(&samples) {
        Some(v) if v.abs() <= 3.0 * DELTA => centre + v,
        _ => golden.x,
    };
    let value = objective(theta);
    Ok(ThetaMinimum {
        theta,
        value,
        evaluations: evaluations.get(),
    })
}

/// Vertex offset of the least-squares parabola through `(t, y)` samples
/// centred at `t = 0`; `None` when it opens downwards.
fn parabola_vertex(samples: &[(f64, f64)]) -> Option<f64> {
    // Normal equations for y = c0 + c1 t + c2 t² with symmetric abscissae.
    let n = samples.len() as f64;
    let (mut s2, mut s4, mut sy, mut sty, mut st2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let y0 = samples.iter().map(|s| s.1).sum::<f64>() / n;
    for &(t, y) in samples {
        let y = y - y0;
        s2 += t * t;
        s4 += t.powi(4);
        sy += y;
        sty += t * y;
        st2y += t * t * y;
    }
    let c1 = sty / s2;
    let c2 = (n * st2y - s2 * sy) / (n * s4 - s2 * s2);
    (c2 > 0.0).then(|| -c1 / (2.0 * c2))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PythagoreanCheck {
    /// `H_m(Q ‖ P)`
    pub total: f64,
    /// `H_m(Q* ‖ P)`
    pub projected: f64,
    /// `H_m(Q ‖ Q*)`
    pub remainder: f64,
    /// `total − projected − remainder`
    pub defect: f64,
}

/// Evaluates all three relative entropies of the Pythagorean relation by
/// quadrature. `q` and `q_star` must share their marginals.
pub fn pythagorean_defect(
    q: &MBivariate,
    q_star: &MBivariate,
    p: &MBivariate,
    cfg: &QuadratureConfig,
) -> Result<PythagoreanCheck> {
    let same_marginals = q.mu1 == q_star.mu1 && q.mu2 == q_star.mu2 && q.s1 == q_star.s1 && q.s2 == q_star.s2;
    if !same_marginals {
        return Err(Error::InvalidArgument(
            "Q and Q* must have the same means and scales".into(),
        ));
    }
    let total = m_rel_entropy_quad(q, p, cfg)?;
    let projected = m_rel_entropy_quad(q_star, p, cfg)?;
    let remainder = m_rel_entropy_quad(q, q_star, cfg)?;
    Ok(PythagoreanCheck {
        total,
        projected,
        remainder,
        defect: total - projected - remainder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridConfig {
    pub rounds: usize,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { rounds: 3, points: 101 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KhMinimum {
    pub mu: f64,
    pub sigma: f64,
    pub value: f64,
    /// Final grid spacing in `μ` and `σ`.
    pub resolution: (f64, f64),
}

/// Minimises `K_h(·, g0)` over q-Gaussians by nested grid refinement in
/// `(μ, σ)`. Each round re-centres on the best node and zooms to ±2 cells;
/// a best node on the boundary shifts the window instead of shrinking it.
pub fn minimize_kh_grid(g0: &QGaussian1D, h: f64, grid: GridConfig) -> Result<KhMinimum> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    if grid.points < 5 || grid.rounds == 0 {
        return Err(Error::InvalidArgument(format!("grid too coarse: {grid:?}")));
    }
    let s0 = g0.sigma();
    let mut half = [0.5 * s0, (0.5 * s0).min(4.0 * s0 * h.sqrt())];
    let mut centre = [g0.mu(), s0 + 0.5 * half[1]];
    let n = grid.points;
    let step = |half: f64| 2.0 * half / (n - 1) as f64;
    let node = |c: f64, half: f64, i: usize| c - half + step(half) * i as f64;

    let mut best = (g0.mu(), s0, kh(g0, g0, h)?);
    let mut rounds_done = 0;
    let mut shifts = 0;
    while rounds_done < grid.rounds {
        let mut arg = None;
        for i in 0..n {
            let mu = node(centre[0], half[0], i);
            for j in 0..n {
                let sigma = node(centre[1], half[1], j);
                if sigma <= 0.0 {
                    continue;
                }
                let v = kh(&g0.with_mu_sigma(mu, sigma)?, g0, h)?;
                if v < best.2 {
                    best = (mu, sigma, v);
                    arg = Some((i, j));
                }
            }
        }
        let on_edge = |k: usize| k == 0 || k == n - 1;
        centre = [best.0, best.1];
        if arg.is_some_and(|(i, j)| on_edge(i) || on_edge(j)) && shifts < 20 {
            shifts += 1;
            continue;
        }
        half = [2.0 * step(half[0]), 2.0 * step(half[1])];
        rounds_done += 1;
    }
    Ok(KhMinimum {
        mu: best.0,
        sigma: best.1,
        value: best.2,
        resolution: (0.5 * half[0], 0.5 * half[1]),
    })
}
