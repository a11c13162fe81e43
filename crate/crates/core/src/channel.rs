//! Channel synthesis for the BS → surface → MS link.
//!
//! Each hop is a Rician mix of a rank-one line-of-sight component built from
//! array responses and an i.i.d. Rayleigh component, scaled by the square
//! root of the distance-dependent power gain.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, C64};
use crate::stream::{Purpose, TrialKey};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("link distance {0} m is below the 1 m reference distance")]
    InvalidDistance(f64),
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
}

/// Node placement on the plane. The BS sits at the origin and the surface at
/// `(surface_x, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub surface_x: f64,
    pub ms_x: f64,
    pub ms_y: f64,
}

impl GeometryConfig {
    /// BS ↔ surface distance.
    pub fn d_t(&self) -> f64 {
        self.surface_x
    }

    /// Surface ↔ MS distance.
    pub fn d_r(&self) -> f64 {
        (self.surface_x - self.ms_x).hypot(self.ms_y)
    }
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            surface_x: 51.0,
            ms_x: 40.0,
            ms_y: 2.0,
        }
    }
}

/// Large- and small-scale fading parameters. A Rician factor of
/// `f64::INFINITY` means pure line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingConfig {
    /// Power gain at 1 m, linear.
    pub beta0: f64,
    pub epsilon_t: f64,
    pub epsilon_r: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            beta0: 1e-3,
            epsilon_t: 2.2,
            epsilon_r: 2.8,
            kappa_t: f64::INFINITY,
            kappa_r: 0.0,
        }
    }
}

impl FadingConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(ChannelError::InvalidConfig(format!(
                "beta0 = {}",
                self.beta0
            )));
        }
        for (name, e) in [("epsilon_t", self.epsilon_t), ("epsilon_r", self.epsilon_r)] {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(ChannelError::InvalidConfig(format!("{name} = {e}")));
            }
        }
        for (name, k) in [("kappa_t", self.kappa_t), ("kappa_r", self.kappa_r)] {
            if k.is_nan() || k < 0.0 {
                return Err(ChannelError::InvalidConfig(format!("{name} = {k}")));
            }
        }
        Ok(())
    }
}

/// Angles of one link. `None` fields are redrawn for every realization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkAngles {
    /// Angle at the linear array (BS departure or MS arrival), in `[0, 2π)`.
    pub theta_linear: Option<f64>,
    /// Azimuth at the surface, in `[0, 2π)`.
    pub theta_surface: Option<f64>,
    /// Elevation at the surface, in `[−π/2, π/2)`.
    pub phi_surface: Option<f64>,
}

/// Array sizes and orientation. The BS and MS carry ULAs, the surface a UPA
/// with `n_x` elements per row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_bs: usize,
    pub n_ms: usize,
    pub n_surface: usize,
    pub n_x: usize,
    pub transmit: LinkAngles,
    pub receive: LinkAngles,
}

impl ArrayGeometry {
    /// Near-square surface: `n_x = ⌈√N⌉`.
    pub fn new(n_bs: usize, n_ms: usize, n_surface: usize) -> Self {
        Self {
            n_bs,
            n_ms,
            n_surface,
            n_x: default_row_width(n_surface),
            transmit: LinkAngles::default(),
            receive: LinkAngles::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.n_bs == 0 || self.n_ms == 0 || self.n_surface == 0 {
            return Err(ChannelError::InvalidConfig(
                "array sizes must be positive".into(),
            ));
        }
        if self.n_x == 0 || self.n_x > self.n_surface {
            return Err(ChannelError::InvalidConfig(format!(
                "row width {} for a surface of {} elements",
                self.n_x, self.n_surface
            )));
        }
        Ok(())
    }
}

pub fn default_row_width(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, n.max(1))
}

/// BS → surface and surface → MS channels, path loss included.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    /// `N × N_t`; row `n` is `t_nᴴ`.
    pub h_t: ComplexMatrix,
    /// `N_r × N`; column `n` is `r_n`.
    pub h_r: ComplexMatrix,
}

impl ChannelPair {
    pub fn new(h_t: ComplexMatrix, h_r: ComplexMatrix) -> Result<Self, ChannelError> {
        if h_t.rows() != h_r.cols() {
            return Err(ChannelError::InvalidConfig(format!(
                "H_t has {} rows but H_r has {} columns",
                h_t.rows(),
                h_r.cols()
            )));
        }
        Ok(Self { h_t, h_r })
    }

    pub fn n_elements(&self) -> usize {
        self.h_t.rows()
    }

    pub fn n_t(&self) -> usize {
        self.h_t.cols()
    }

    pub fn n_r(&self) -> usize {
        self.h_r.rows()
    }

    /// `r_n`, the n-th column of `H_r`.
    pub fn r(&self, n: usize) -> Vec<C64> {
        self.h_r.column(n)
    }

    /// `t_n`, so that `t_nᴴ` is the n-th row of `H_t`.
    pub fn t(&self, n: usize) -> Vec<C64> {
        self.h_t.row(n).iter().map(|z| z.conj()).collect()
    }

    /// The same link restricted to the first `k` surface elements.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.n_elements());
        Self {
            h_t: self.h_t.top_left(k, self.n_t()),
            h_r: self.h_r.top_left(self.n_r(), k),
        }
    }
}

/// `β(d) = β₀·d^(−ε)` with `d` in meters.
pub fn path_gain(d: f64, beta0: f64, epsilon: f64) -> Result<f64, ChannelError> {
    if d.is_nan() || d < 1.0 {
        return Err(ChannelError::InvalidDistance(d));
    }
    Ok(beta0 * d.powf(-epsilon))
}

/// Half-wavelength ULA response; element `m` (0-based) is `e^{jπ m sin θ}`.
pub fn ula_response(theta: f64, n: usize) -> Vec<C64> {
    let s = theta.sin();
    (0..n)
        .map(|m| C64::from_polar(1.0, PI * m as f64 * s))
        .collect()
}

/// Half-wavelength UPA response with `n_x` elements per row, element 0 as
/// the phase reference.
pub fn upa_response(theta: f64, phi: f64, n: usize, n_x: usize) -> Vec<C64> {
    assert!(n_x >= 1, "UPA row width must be positive");
    let (st, sp, cp) = (theta.sin(), phi.sin(), phi.cos());
    (0..n)
        .map(|m| {
            let row = (m / n_x) as f64;
            let col = (m % n_x) as f64;
            C64::from_polar(1.0, PI * (row * st * sp + col * st * cp))
        })
        .collect()
}

/// One draw of a circularly-symmetric unit-variance complex Gaussian.
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `√(κ/(1+κ))·LoS + √(1/(1+κ))·W` with `W` i.i.d. CN(0, 1).
pub fn rician_channel(los: &ComplexMatrix, kappa: f64, rng: &mut impl Rng) -> ComplexMatrix {
    if kappa.is_infinite() {
        return los.clone();
    }
    let w = ComplexMatrix::from_fn(los.rows(), los.cols(), |_, _| complex_gaussian(rng));
    if kappa == 0.0 {
        return w;
    }
    let a = (kappa / (1.0 + kappa)).sqrt();
    let b = (1.0 / (1.0 + kappa)).sqrt();
    &los.scale_real(a) + &w.scale_real(b)
}

fn draw_angles(fixed: LinkAngles, rng: &mut impl Rng) -> (f64, f64, f64) {
    // always consume three draws so overriding one angle leaves the others unchanged
    let theta_linear = rng.random_range(0.0..TAU);
    let theta_surface = rng.random_range(0.0..TAU);
    let phi_surface = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    (
        fixed.theta_linear.unwrap_or(theta_linear),
        fixed.theta_surface.unwrap_or(theta_surface),
        fixed.phi_surface.unwrap_or(phi_surface),
    )
}

/// Draws the channel pair of one realization.
pub fn synthesize(
    geom: &GeometryConfig,
    fading: &FadingConfig,
    arrays: &ArrayGeometry,
    key: TrialKey,
) -> Result<ChannelPair, ChannelError> {
    fading.validate()?;
    arrays.validate()?;
    let beta_t = path_gain(geom.d_t(), fading.beta0, fading.epsilon_t)?;
    let beta_r = path_gain(geom.d_r(), fading.beta0, fading.epsilon_r)?;

    let mut angle_rng = key.rng(Purpose::Angles);
    let (theta_bs, theta_ht, phi_ht) = draw_angles(arrays.transmit, &mut angle_rng);
    let (theta_ms, theta_hr, phi_hr) = draw_angles(arrays.receive, &mut angle_rng);

    let los_t = ComplexMatrix::outer(
        &upa_response(theta_ht, phi_ht, arrays.n_surface, arrays.n_x),
        &ula_response(theta_bs, arrays.n_bs),
    );
    let los_r = ComplexMatrix::outer(
        &ula_response(theta_ms, arrays.n_ms),
        &upa_response(theta_hr, phi_hr, arrays.n_surface, arrays.n_x),
    );
    let h_t = rician_channel(
        &los_t,
        fading.kappa_t,
        &mut key.rng(Purpose::TransmitFading),
    )
    .scale_real(beta_t.sqrt());
    let h_r = rician_channel(&los_r, fading.kappa_r, &mut key.rng(Purpose::ReceiveFading))
        .scale_real(beta_r.sqrt());
    ChannelPair::new(h_t, h_r)
}
