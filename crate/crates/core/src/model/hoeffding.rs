//! Convolutions against grid measures and the centered two-body statistic
//!
//! `U(x) = -1/2 sum_{i,j} [h(x_i - x_j) - h_mu(x_i) - h_mu(x_j) + h_mumu]`
//!
//! which splits the pair energy as
//! `sum_{i<j} h(x_i - x_j) = N sum_j h_mu(x_j) - N^2/2 h_mumu - N/2 h(0) - U(x)`.

use std::f64::consts::PI;

use super::ensemble::Configuration;
use super::interaction::InteractionPotential;
use super::measure::{GridMeasure, MASS_TOLERANCE};
use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;

fn ensure_normalized(mu: &GridMeasure) -> Result<()> {
    let total = mu.total_mass();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

/// `h_mu(s) = sum_c w_c h(t_c - s)` at a single point.
#[inline]
pub fn convolve_at(h: &InteractionPotential, mu: &GridMeasure, s: f64) -> f64 {
    mu.weights()
        .iter()
        .enumerate()
        .map(|(c, w)| w * h.value(mu.midpoint(c) - s))
        .sum()
}

/// Derivative `h_mu'(s) = -sum_c w_c h'(t_c - s)`.
#[inline]
pub fn convolve_derivative_at(h: &InteractionPotential, mu: &GridMeasure, s: f64) -> f64 {
    -mu.weights()
        .iter()
        .enumerate()
        .map(|(c, w)| w * h.derivative(mu.midpoint(c) - s))
        .sum::<f64>()
}

/// `h_mu` evaluated at each of `points` by exact summation over cell midpoints.
pub fn convolve(h: &InteractionPotential, mu: &GridMeasure, points: &[f64]) -> Result<Vec<f64>> {
    ensure_normalized(mu)?;
    Ok(points.iter().map(|&s| convolve_at(h, mu, s)).collect())
}

/// `h_mumu = sum_{c,c'} w_c w_c' h(t_c - t_c')`.
pub fn double_convolve(h: &InteractionPotential, mu: &GridMeasure) -> Result<f64> {
    ensure_normalized(mu)?;
    if h.terms.is_empty() {
        return Ok(0.0);
    }
    // h(t_c - t_c') only depends on c - c'.
    let n = mu.n_cells();
    let dx = mu.cell_width();
    let lag: Vec<f64> = (0..n).map(|k| h.value(k as f64 * dx)).collect();
    let w = mu.weights();
    let mut total = 0.0;
    for c in 0..n {
        if w[c] == 0.0 {
            continue;
        }
        let mut row = w[c] * lag[0];
        for d in c + 1..n {
            row += 2.0 * w[d] * lag[d - c];
        }
        total += w[c] * row;
    }
    Ok(total)
}

fn sorted_positions(x: &Configuration) -> Result<Vec<f64>> {
    x.validate()?;
    let mut p = x.positions.clone();
    p.sort_by(f64::total_cmp);
    Ok(p)
}

/// `U(x)` by direct `O(N^2)` summation. The double sum includes `i = j`.
pub fn u_direct(x: &Configuration, h: &InteractionPotential, mu: &GridMeasure) -> Result<f64> {
    ensure_normalized(mu)?;
    if h.is_zero() {
        return Ok(0.0);
    }
    let p = sorted_positions(x)?;
    let n = p.len() as f64;
    let mut pair = 0.0;
    for (i, &xi) in p.iter().enumerate() {
        for &xj in &p[i + 1..] {
            pair += h.value(xi - xj);
        }
    }
    let all_pairs = 2.0 * pair + n * h.value(0.0);
    let one_body: f64 = p.iter().map(|&s| convolve_at(h, mu, s)).sum();
    let hmm = double_convolve(h, mu)?;
    Ok(-0.5 * all_pairs + n * one_body - 0.5 * n * n * hmm)
}

/// `dU/dx_l = -sum_j h'(x_l - x_j) + N h_mu'(x_l)`.
pub fn grad_u(x: &Configuration, h: &InteractionPotential, mu: &GridMeasure) -> Result<Vec<f64>> {
    ensure_normalized(mu)?;
    x.validate()?;
    let p = &x.positions;
    let n = p.len();
    if h.is_zero() {
        return Ok(vec![0.0; n]);
    }
    let nf = n as f64;
    let mut grad: Vec<f64> = p
        .iter()
        .map(|&s| nf * convolve_derivative_at(h, mu, s))
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = h.derivative(p[i] - p[j]);
            grad[i] -= d;
            grad[j] += d;
        }
    }
    Ok(grad)
}

/// Quadrature settings for [`u_fourier`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierQuadrature {
    /// Integrate over `[-cutoff, cutoff]`; `None` picks a cutoff from the
    /// narrowest term of `h_hat`.
    pub cutoff: Option<f64>,
    /// Gauss-Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Allowed bound on the neglected tail before a warning is attached.
    pub tail_tolerance: f64,
}

impl Default for FourierQuadrature {
    fn default() -> Self {
        Self {
            cutoff: None,
            nodes_per_panel: 16,
            tail_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierEvaluation {
    pub value: f64,
    pub cutoff: f64,
    /// Upper bound on the contribution of `|t| > cutoff`.
    pub tail_bound: f64,
    pub warning: Option<String>,
}

/// `U(x) = -(2 sqrt(2 pi))^{-1} \int |u_N(t, x)|^2 h_hat(t) dt` with
/// `u_N(t, x) = sum_j e^{i t x_j} - N \int e^{its} dmu(s)`.
///
/// For even `mu` the imaginary part of the measure term vanishes and this is the
/// cosine/sine split `sum cos(t x_j) - N \int cos(ts) dmu + i sum sin(t x_j)`.
pub fn u_fourier(
    x: &Configuration,
    h: &InteractionPotential,
    mu: &GridMeasure,
    quad: &FourierQuadrature,
) -> Result<FourierEvaluation> {
    ensure_normalized(mu)?;
    let p = sorted_positions(x)?;
    if h.is_zero() {
        return Ok(FourierEvaluation {
            value: 0.0,
            cutoff: 0.0,
            tail_bound: 0.0,
            warning: None,
        });
    }
    let n = p.len() as f64;
    let b_max = h.terms.iter().map(|t| t.width).fold(0.0, f64::max);
    let cutoff = quad.cutoff.unwrap_or(14.0 * b_max.sqrt());

    let reach = p
        .iter()
        .map(|v| v.abs())
        .chain([mu.left().abs(), mu.right().abs()])
        .fold(0.0, f64::max);
    // |u_N|^2 oscillates at frequencies up to 2 * reach.
    let panels = ((cutoff * 2.0 * reach / 2.0).ceil() as usize).max(8);
    let (nodes, weights) = gauss_legendre(quad.nodes_per_panel);
    let width = cutoff / panels as f64;

    let midpoints = mu.midpoints();
    let w = mu.weights();
    let mut integral = 0.0;
    for k in 0..panels {
        let a = k as f64 * width;
        for (z, wz) in nodes.iter().zip(&weights) {
            let t = a + 0.5 * width * (z + 1.0);
            let (mut re, mut im) = (0.0, 0.0);
            for &xj in &p {
                let (s, c) = (t * xj).sin_cos();
                re += c;
                im += s;
            }
            let (mut mre, mut mim) = (0.0, 0.0);
            for (tc, wc) in midpoints.iter().zip(w) {
                if *wc == 0.0 {
                    continue;
                }
                let (s, c) = (t * tc).sin_cos();
                mre += wc * c;
                mim += wc * s;
            }
            re -= n * mre;
            im -= n * mim;
            integral += 0.5 * width * wz * (re * re + im * im) * h.fourier(t);
        }
    }
    // The integrand is even in t.
    let value = -integral / (2.0 * PI).sqrt();
    let tail_bound = 4.0 * n * n * h.fourier_tail_mass(cutoff) / (2.0 * (2.0 * PI).sqrt());
    let warning = (tail_bound > quad.tail_tolerance).then(|| {
        format!("quadrature window {cutoff} leaves a tail of up to {tail_bound:e}")
    });
    if let Some(msg) = &warning {
        log::warn!("{msg}");
    }
    Ok(FourierEvaluation {
        value,
        cutoff,
        tail_bound,
        warning,
    })
}
