//! Sum rate, MSE matrices and the closed-form `M` / `W` updates.
//!
//! Everything here works on a generic analog front end `F_s` (`M x N`): for
//! the metasurface it is `Q H_s`, for the hybrid baseline it is `W_RF^H`.

use crate::channel::SubcarrierGrid;
use crate::error::{dims, Error, Result};
use crate::linalg::{guarded_hermitian_inverse, hermitian_eigen, hermitian_part, is_finite, CMatrix, C64};

/// Eigenvalues of the noise-shaping matrix below this fraction of the largest
/// are treated as zero when evaluating the rate.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Transmit power and per-subcarrier noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Per-user transmit power `P_t` in watts.
    pub power: f64,
    /// Noise power spectral density `σ²` in W/Hz.
    pub noise_density: f64,
    /// Subcarrier bandwidth `Δ_B` in Hz.
    pub subcarrier_bandwidth: f64,
}

impl LinkBudget {
    pub fn new(power: f64, noise_density: f64, subcarrier_bandwidth: f64) -> Result<Self> {
        if !(power > 0.0 && noise_density > 0.0 && subcarrier_bandwidth > 0.0)
            || !(power.is_finite() && noise_density.is_finite() && subcarrier_bandwidth.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "power {power} W, noise density {noise_density} W/Hz and subcarrier bandwidth \
                 {subcarrier_bandwidth} Hz must be positive and finite"
            )));
        }
        Ok(Self {
            power,
            noise_density,
            subcarrier_bandwidth,
        })
    }

    /// From `P_t` in dBm and `σ²` in dBm/Hz.
    pub fn from_dbm(power_dbm: f64, noise_dbm_per_hz: f64, grid: &SubcarrierGrid) -> Result<Self> {
        Self::new(dbm_to_watts(power_dbm), dbm_to_watts(noise_dbm_per_hz), grid.spacing)
    }

    /// `Δ_B σ²`.
    pub fn noise_power(&self) -> f64 {
        self.noise_density * self.subcarrier_bandwidth
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Per-subcarrier baseband combiners `W_s` (`M x U`).
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSet(pub Vec<CMatrix>);

/// Per-subcarrier auxiliary weights `M_s` (`U x U`).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxWeightSet(pub Vec<CMatrix>);

fn check_chain(context: &'static str, frontend: &CMatrix, channel: &CMatrix, combiner: Option<&CMatrix>) -> Result<()> {
    if frontend.ncols() != channel.nrows() {
        return Err(Error::DimensionMismatch {
            context,
            expected: format!("front end with {} columns", channel.nrows()),
            actual: dims(frontend.nrows(), frontend.ncols()),
        });
    }
    if let Some(w) = combiner {
        if w.shape() != (frontend.nrows(), channel.ncols()) {
            return Err(Error::DimensionMismatch {
                context,
                expected: dims(frontend.nrows(), channel.ncols()),
                actual: dims(w.nrows(), w.ncols()),
            });
        }
    }
    Ok(())
}

/// Rate of one subcarrier, `log2 |I + N^-1 S|` with
/// `S = P W^H F G G^H F^H W` and `N = Δσ² W^H F F^H W`.
///
/// If `N` is singular the rate is taken on its column space: directions with
/// `N v = 0` also carry no signal, so dropping them is the exact limit.
pub fn subcarrier_rate(frontend: &CMatrix, channel: &CMatrix, combiner: &CMatrix, budget: &LinkBudget) -> Result<f64> {
    check_chain("subcarrier_rate", frontend, channel, Some(combiner))?;
    if !is_finite(channel) {
        return Err(Error::NonFinite("channel"));
    }
    let wf = combiner.adjoint() * frontend;
    let x = &wf * channel;
    let noise = hermitian_part(&(&wf * wf.adjoint())).scale(budget.noise_power());
    let (values, vectors) = hermitian_eigen(&noise);
    let top = values.iter().fold(0.0_f64, |a, &v| a.max(v));
    if top <= 0.0 {
        return Ok(0.0);
    }
    let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i] > RANK_TOLERANCE * top).collect();
    // T X with T = Λ^{-1/2} V^H on the kept subspace.
    let mut tx = CMatrix::zeros(kept.len(), x.ncols());
    for (row, &i) in kept.iter().enumerate() {
        let scale = 1.0 / values[i].sqrt();
        let v = vectors.column(i);
        for c in 0..x.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..x.nrows() {
                acc += v[k].conj() * x[(k, c)];
            }
            tx[(row, c)] = acc * scale;
        }
    }
    let gram = hermitian_part(&(&tx.adjoint() * &tx)).scale(budget.power);
    let (eig, _) = hermitian_eigen(&gram);
    Ok(eig.iter().map(|&v| (1.0 + v.max(0.0)).log2()).sum())
}

/// `F = U Σ V^H` restricted to the numerically nonzero singular values, and
/// the projected channel `Ĝ = V^H G`.
struct RowSpace {
    u: CMatrix,
    sigma: Vec<f64>,
    projected: CMatrix,
}

fn row_space(frontend: &CMatrix, channel: &CMatrix) -> Result<RowSpace> {
    if !is_finite(channel) {
        return Err(Error::NonFinite("channel"));
    }
    if !is_finite(frontend) {
        return Err(Error::NonFinite("front end"));
    }
    let svd = frontend.clone().svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        return Err(Error::NonFinite("front end"));
    };
    let top = svd.singular_values.iter().fold(0.0_f64, |a, &v| a.max(v));
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| top > 0.0 && svd.singular_values[i] > RANK_TOLERANCE.sqrt() * top)
        .collect();
    let mut basis = CMatrix::zeros(frontend.nrows(), kept.len());
    let mut rows = CMatrix::zeros(kept.len(), frontend.ncols());
    for (k, &i) in kept.iter().enumerate() {
        basis.set_column(k, &u.column(i));
        rows.set_row(k, &v_t.row(i));
    }
    Ok(RowSpace {
        u: basis,
        sigma: kept.iter().map(|&i| svd.singular_values[i]).collect(),
        projected: rows * channel,
    })
}

/// Rate of a front end with the best combiner,
/// `log2 |I + (P / Δσ²) G^H F^H (F F^H)^+ F G|`.
///
/// Equal to [`subcarrier_rate`] at the MMSE combiner, but evaluated through an
/// orthonormal basis of the row space of `F` (from its SVD), which stays
/// accurate at high SNR where `E` and `W^H F F^H W` are badly conditioned.
pub fn frontend_rate(frontend: &CMatrix, channel: &CMatrix, budget: &LinkBudget) -> Result<f64> {
    check_chain("frontend_rate", frontend, channel, None)?;
    let rs = row_space(frontend, channel)?;
    let gram = hermitian_part(&(rs.projected.adjoint() * &rs.projected)).scale(budget.power / budget.noise_power());
    let (eig, _) = hermitian_eigen(&gram);
    Ok(eig.iter().map(|&v| (1.0 + v.max(0.0)).log2()).sum())
}

/// MMSE combiner and `M = E^-1` at that combiner, in whitened coordinates.
///
/// With `ρ = Δσ² / P` and `Ĝ = V^H G`, the combiner of [`update_w`] is
/// `U Σ^-1 Ĝ (Ĝ^H Ĝ + ρ I)^-1` and its MSE matrix is `Δσ² (Ĝ^H Ĝ + ρ I)^-1`,
/// so `M = (Ĝ^H Ĝ + ρ I) / Δσ²` needs no inversion at all. Forming `E` from
/// its definition instead loses roughly `log10(SNR)` digits to cancellation.
pub fn mmse_update(frontend: &CMatrix, channel: &CMatrix, budget: &LinkBudget) -> Result<(CMatrix, CMatrix)> {
    check_chain("mmse_update", frontend, channel, None)?;
    let rs = row_space(frontend, channel)?;
    let sigma2 = budget.noise_power();
    let rho = sigma2 / budget.power;
    let users = channel.ncols();
    let gram = hermitian_part(&(rs.projected.adjoint() * &rs.projected));
    let shifted = &gram + CMatrix::identity(users, users).scale(rho);
    let chol = shifted.clone().cholesky().ok_or(Error::NonFinite("MMSE normal equations"))?;
    // Ĝ (Ĝ^H Ĝ + ρ I)^-1 = (chol^-1 Ĝ^H)^H
    let right = chol.solve(&rs.projected.adjoint()).adjoint();
    let mut scaled = right;
    for (k, &sv) in rs.sigma.iter().enumerate() {
        scaled.row_mut(k).unscale_mut(sv);
    }
    let w = &rs.u * scaled;
    Ok((w, shifted.unscale(sigma2)))
}

/// Aggregate rate `Σ_s` of [`subcarrier_rate`], in bits/s/Hz summed over
/// subcarriers (multiply by `Δ_B` for bits/s).
pub fn sum_rate_with_frontend(
    frontends: &[CMatrix],
    channels: &[CMatrix],
    combiners: &CombinerSet,
    budget: &LinkBudget,
) -> Result<f64> {
    let mut total = 0.0;
    for ((f, g), w) in frontends.iter().zip(channels).zip(&combiners.0) {
        total += subcarrier_rate(f, g, w, budget)?;
    }
    Ok(total)
}

/// `E = P (W^H F G − I)(·)^H + Δσ² W^H F F^H W`.
pub fn mse_matrix(frontend: &CMatrix, channel: &CMatrix, combiner: &CMatrix, budget: &LinkBudget) -> Result<CMatrix> {
    check_chain("mse_matrix", frontend, channel, Some(combiner))?;
    let wf = combiner.adjoint() * frontend;
    let u = channel.ncols();
    let err = &wf * channel - CMatrix::identity(u, u);
    let e = (&err * err.adjoint()).scale(budget.power) + (&wf * wf.adjoint()).scale(budget.noise_power());
    Ok(hermitian_part(&e))
}

/// `M = E^-1`, ridge-regularized when `E` is ill-conditioned.
pub fn update_m(mse: &CMatrix, ridge: f64) -> CMatrix {
    guarded_hermitian_inverse(mse, ridge).inverse
}

/// MMSE combiner `W = P (P F G G^H F^H + Δσ² F F^H)^-1 F G`.
///
/// The factor `P` makes `W` the actual minimizer of `tr(M E)` for every PSD
/// `M`; the sum rate itself does not depend on the scale of `W`.
pub fn update_w(frontend: &CMatrix, channel: &CMatrix, budget: &LinkBudget, ridge: f64) -> Result<CMatrix> {
    check_chain("update_w", frontend, channel, None)?;
    let fg = frontend * channel;
    let k = (&fg * fg.adjoint()).scale(budget.power) + (frontend * frontend.adjoint()).scale(budget.noise_power());
    let inv = guarded_hermitian_inverse(&k, ridge);
    Ok((inv.inverse * fg).scale(budget.power))
}

/// `Σ_s log2 |(E_s / P)^-1|`.
///
/// At the MMSE combiner this equals the sum rate. The normalization by `P`
/// matters: `log2 |E^-1|` alone is off by `U log2 P` per subcarrier.
pub fn mse_rate(mse: &[CMatrix], power: f64) -> f64 {
    mse.iter()
        .map(|e| {
            let (values, _) = hermitian_eigen(e);
            -values.iter().map(|&v| (v / power).log2()).sum::<f64>()
        })
        .sum()
}

/// `Σ_s log2 |I + (P / Δσ²) G_s^H G_s|`, the rate of the optimal unconstrained
/// linear receiver.
pub fn fully_digital_rate(channels: &[CMatrix], budget: &LinkBudget) -> Result<f64> {
    let snr = budget.power / budget.noise_power();
    let mut total = 0.0;
    for g in channels {
        if !is_finite(g) {
            return Err(Error::NonFinite("channel"));
        }
        let gram = hermitian_part(&(g.adjoint() * g)).scale(snr);
        let (values, _) = hermitian_eigen(&gram);
        total += values.iter().map(|&v| (1.0 + v.max(0.0)).log2()).sum::<f64>();
    }
    Ok(total)
}
