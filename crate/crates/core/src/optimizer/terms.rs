//! Per-element decomposition of the rate bound.
//!
//! With every coefficient but `α_n` held fixed, the bound reads
//! `f = log₂|A_n + |α_n|²B_n + α_nC_n + α_n*C_nᴴ|`. `B_n` and `C_n` are rank
//! one (`B_n ∝ r_n r_nᴴ`, `C_n = r_n s_nᴴ`), which is what makes the scalar
//! quantities below closed-form.

use crate::channel::ChannelPair;
use crate::linalg::{
    log2_det_identity_plus, logdet, rank1_eigen, vec_norm, ComplexMatrix, LinalgError, Lu, C64,
    ZERO,
};
use crate::surface::{CoefficientState, SystemParams};
use crate::tolerances;

/// Everything the update of element `index` needs.
#[derive(Debug, Clone)]
pub struct PerElementTerms {
    pub index: usize,
    pub active: bool,
    /// `|α_n|` used to form `D_n` and `E_n`; the closed form [`g_n`] is
    /// exact for coefficients of this modulus.
    pub amplitude: f64,
    pub a_n: ComplexMatrix,
    pub b_n: ComplexMatrix,
    pub c_n: ComplexMatrix,
    pub d_n: ComplexMatrix,
    pub e_n: ComplexMatrix,
    /// Non-zero eigenvalue of `A_n⁻¹B_n`.
    pub gamma_n: f64,
    /// Non-zero eigenvalue of `E_n⁻¹C_n`.
    pub lambda_n: C64,
    /// `(V_n⁻¹)₁₁`
    pub v_n: C64,
    /// `(V_n)₁₁`
    pub v_prime_n: C64,
    /// `σ² + P_BS‖t_n‖²`
    pub xi_n: f64,
    /// `|λ_n|·√γ_n`
    pub zeta_n: f64,
    /// `λ_n` vanished (up to rounding); `v_n` and `v′_n` are then set to zero.
    pub degenerate: bool,
}

/// Cached sums over all elements, updated incrementally as coefficients
/// change so one element's terms cost `O(N_r·N_t)`.
#[derive(Debug, Clone)]
pub(crate) struct TermBuilder<'a> {
    channels: &'a ChannelPair,
    params: SystemParams,
    r: Vec<Vec<C64>>,
    t: Vec<Vec<C64>>,
    t_norm2: Vec<f64>,
    coeffs: Vec<C64>,
    active: Vec<bool>,
    /// `H_rΥH_t`
    cascaded: ComplexMatrix,
    /// `Σ_{i∈A} |α_i|² r_i r_iᴴ`
    noise: ComplexMatrix,
}

impl<'a> TermBuilder<'a> {
    pub(crate) fn new(
        channels: &'a ChannelPair,
        params: &SystemParams,
        state: &CoefficientState,
    ) -> Self {
        let n = channels.n_elements();
        let r: Vec<_> = (0..n).map(|i| channels.r(i)).collect();
        let t: Vec<_> = (0..n).map(|i| channels.t(i)).collect();
        let t_norm2 = t.iter().map(|v| vec_norm(v).powi(2)).collect();
        let mut b = Self {
            channels,
            params: *params,
            r,
            t,
            t_norm2,
            coeffs: Vec::new(),
            active: Vec::new(),
            cascaded: ComplexMatrix::zeros(channels.n_r(), channels.n_t()),
            noise: ComplexMatrix::zeros(channels.n_r(), channels.n_r()),
        };
        b.refresh(state);
        b
    }

    /// Rebuilds the cached sums from scratch, discarding accumulated rounding.
    pub(crate) fn refresh(&mut self, state: &CoefficientState) {
        assert_eq!(
            state.len(),
            self.r.len(),
            "state size does not match the channel"
        );
        self.coeffs = state.coefficients();
        self.active = (0..state.len()).map(|i| state.is_active(i)).collect();
        self.cascaded = ComplexMatrix::zeros(self.channels.n_r(), self.channels.n_t());
        self.noise = ComplexMatrix::zeros(self.channels.n_r(), self.channels.n_r());
        for i in 0..self.coeffs.len() {
            self.cascaded
                .add_outer(self.coeffs[i], &self.r[i], &self.t[i]);
            if self.active[i] {
                self.noise.add_outer(
                    C64::new(self.coeffs[i].norm_sqr(), 0.0),
                    &self.r[i],
                    &self.r[i],
                );
            }
        }
    }

    /// Records the new coefficient of element `n`.
    pub(crate) fn set(&mut self, n: usize, coeff: C64, active: bool) {
        let old = self.coeffs[n];
        self.cascaded.add_outer(coeff - old, &self.r[n], &self.t[n]);
        let old_w = if self.active[n] { old.norm_sqr() } else { 0.0 };
        let new_w = if active { coeff.norm_sqr() } else { 0.0 };
        if old_w != new_w {
            self.noise
                .add_outer(C64::new(new_w - old_w, 0.0), &self.r[n], &self.r[n]);
        }
        self.coeffs[n] = coeff;
        self.active[n] = active;
    }

    pub(crate) fn xi(&self, n: usize) -> f64 {
        self.params.sigma2 + self.params.p_bs * self.t_norm2[n]
    }

    /// Terms of element `n`, treated as active or passive per `active` and
    /// with `amplitude` entering `D_n` and `E_n`.
    pub(crate) fn terms(
        &self,
        n: usize,
        active: bool,
        amplitude: f64,
    ) -> Result<PerElementTerms, LinalgError> {
        let rho = self.params.rho();
        let n_r = self.channels.n_r();
        let r = &self.r[n];
        let t = &self.t[n];

        // everything except element n
        let mut m = self.cascaded.clone();
        m.add_outer(-self.coeffs[n], r, t);
        let mut noise = self.noise.clone();
        if self.active[n] {
            noise.add_outer(C64::new(-self.coeffs[n].norm_sqr(), 0.0), r, r);
        }

        let mut a_n = ComplexMatrix::identity(n_r);
        a_n += &noise;
        a_n += &m.gram().scale_real(rho);
        let a_n = hermitize(&a_n);

        let b_coef = if active {
            1.0 + rho * self.t_norm2[n]
        } else {
            rho * self.t_norm2[n]
        };
        let b_n = ComplexMatrix::outer(r, r).scale_real(b_coef);
        // C_n = ρ r_n t_nᴴ Mᴴ = r_n s_nᴴ with s_n = ρ M t_n
        let s: Vec<C64> = m.matvec(t).into_iter().map(|z| z * rho).collect();
        let c_n = ComplexMatrix::outer(r, &s);

        let a_lu = Lu::new(&a_n)?;
        let y = a_lu.solve_vec(r)?;
        // A⁻¹B = b·(A⁻¹r) rᴴ
        let a_inv_b = ComplexMatrix::outer(&y, r).scale_real(b_coef);
        let gamma_n = match rank1_eigen(&a_inv_b, Some(&y)) {
            Ok(e) => e.eigenvalue.re.max(0.0),
            Err(LinalgError::ZeroMatrix) => 0.0,
            Err(e) => return Err(e),
        };
        let a2 = amplitude * amplitude;
        let d_n = &ComplexMatrix::identity(n_r) + &a_inv_b.scale_real(a2);
        // A(I + |α|²A⁻¹B) = A + |α|²B
        let e_n = hermitize(&(&a_n + &b_n.scale_real(a2)));

        let e_lu = Lu::new(&e_n)?;
        let x = e_lu.solve_vec(r)?;
        // E⁻¹C = x sᴴ has the single non-zero eigenvalue sᴴx
        let lambda_n = dot(&s, &x);
        let x_norm2 = vec_norm(&x).powi(2);
        let s_norm = vec_norm(&s);
        let degenerate = x_norm2 == 0.0
            || lambda_n.norm() <= tolerances::DEGENERATE_EIGENVALUE * x_norm2.sqrt() * s_norm;
        let (v_n, v_prime_n) = if degenerate {
            (ZERO, ZERO)
        } else {
            eigen_basis_corner(r, &x, &s, lambda_n, &e_lu)?
        };

        let xi_n = self.xi(n);
        Ok(PerElementTerms {
            index: n,
            active,
            amplitude,
            a_n,
            b_n,
            c_n,
            d_n,
            e_n,
            gamma_n,
            lambda_n,
            v_n,
            v_prime_n,
            xi_n,
            zeta_n: lambda_n.norm() * gamma_n.sqrt(),
            degenerate,
        })
    }
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}

/// `(V⁻¹)₁₁` and `V₁₁` for `V = UᴴEU`, where `U` diagonalizes `E⁻¹C = x sᴴ`:
/// its first column is the eigenvector `u = x/‖x‖` and the rest span
/// `{z : sᴴz = 0}`. The first row of `U⁻¹` is then `sᴴ/(sᴴu)`, so
/// `(V⁻¹)₁₁ = ‖x‖²·sᴴE⁻¹s/|λ|²` and `V₁₁ = rᴴx/‖x‖²` for any such completion.
fn eigen_basis_corner(
    r: &[C64],
    x: &[C64],
    s: &[C64],
    lambda: C64,
    e_lu: &Lu,
) -> Result<(C64, C64), LinalgError> {
    let x_norm2 = vec_norm(x).powi(2);
    let e_inv_s = e_lu.solve_vec(s)?;
    let s_e_s = dot(s, &e_inv_s).re;
    let v = C64::new(x_norm2 * s_e_s / lambda.norm_sqr(), 0.0);
    let v_prime = C64::new(dot(r, x).re / x_norm2, 0.0);
    Ok((v, v_prime))
}

/// `aᴴb`
fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(a, b)| a.conj() * b).sum()
}

/// Terms of element `n` in `state`, built from scratch.
pub fn element_terms(
    n: usize,
    state: &CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
) -> Result<PerElementTerms, LinalgError> {
    TermBuilder::new(channels, params, state).terms(n, state.is_active(n), state.amplitude(n))
}

/// Closed-form `g_n(α) = log₂(1 + |α|²γ) + log₂(1 + |α|²|λ|² + 2Re(αλ) − |α|²v′v|λ|²)`.
///
/// Exact when `|α|` equals `terms.amplitude`.
pub fn g_n(alpha: C64, terms: &PerElementTerms) -> f64 {
    let a2 = alpha.norm_sqr();
    let lam2 = terms.lambda_n.norm_sqr();
    let coupling = (terms.v_prime_n * terms.v_n).re * lam2;
    let first = a2 * terms.gamma_n;
    let second =
        (a2 * (lam2 - coupling) + 2.0 * (alpha * terms.lambda_n).re).max(f64::MIN_POSITIVE - 1.0);
    (first.ln_1p() + second.ln_1p()) / std::f64::consts::LN_2
}

/// `g_n(α) = log₂|A_n + |α|²B_n + αC_n + α*C_nᴴ| − log₂|A_n|` by direct
/// determinant evaluation; valid for any `α`.
pub fn g_n_determinant(alpha: C64, terms: &PerElementTerms) -> Result<f64, LinalgError> {
    // |A + Δ| / |A| = |I + A⁻¹Δ|
    let mut delta = terms.b_n.scale_real(alpha.norm_sqr());
    delta += &terms.c_n.scale(alpha);
    delta += &terms.c_n.adjoint().scale(alpha.conj());
    let d = Lu::new(&terms.a_n)?.solve(&delta)?;
    log2_det_identity_plus(&d)
}

/// The bound `f` rebuilt from the terms of one element.
pub fn bound_from_terms(alpha: C64, terms: &PerElementTerms) -> Result<f64, LinalgError> {
    let mut m = &terms.a_n + &terms.b_n.scale_real(alpha.norm_sqr());
    m += &terms.c_n.scale(alpha);
    m += &terms.c_n.adjoint().scale(alpha.conj());
    logdet(&hermitize(&m))
}

/// Terms of every element at `state`, each treated as `state` has it.
pub fn all_element_terms(
    state: &CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
) -> Result<Vec<PerElementTerms>, LinalgError> {
    let builder = TermBuilder::new(channels, params, state);
    (0..state.len())
        .map(|n| builder.terms(n, state.is_active(n), state.amplitude(n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::linalg::ONE;
    use crate::surface::se_upper_bound;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_setup(
        rng: &mut ChaCha8Rng,
        n: usize,
    ) -> (ChannelPair, SystemParams, CoefficientState) {
        let n_t = rng.random_range(1..5);
        let n_r = rng.random_range(1..4);
        let ch = ChannelPair::new(
            ComplexMatrix::from_fn(n, n_t, |_, _| complex_gaussian(rng) * 0.3),
            ComplexMatrix::from_fn(n_r, n, |_, _| complex_gaussian(rng) * 0.3),
        )
        .unwrap();
        let params = SystemParams {
            p_bs: rng.random_range(0.1..3.0),
            sigma2: rng.random_range(0.05..1.0),
        };
        let mut s = CoefficientState::passive(n);
        for i in 0..n {
            s.set_phase(i, rng.random_range(0.0..6.3));
            if rng.random_bool(0.4) {
                s.activate(i, rng.random_range(0.0..3.0)).unwrap();
            }
        }
        (ch, params, s)
    }

    #[test]
    fn single_passive_element() {
        let r = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.4)];
        let t = [C64::new(0.5, -0.5), C64::new(1.0, 0.2)];
        let h_t = ComplexMatrix::from_fn(1, 2, |_, j| t[j].conj());
        let h_r = ComplexMatrix::from_fn(2, 1, |i, _| r[i]);
        let ch = ChannelPair::new(h_t, h_r).unwrap();
        let p = SystemParams {
            p_bs: 2.0,
            sigma2: 0.5,
        };
        let terms = element_terms(0, &CoefficientState::passive(1), &ch, &p).unwrap();
        assert!((&terms.a_n - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
        assert_eq!(terms.c_n.max_abs(), 0.0);
        assert_eq!(terms.lambda_n, ZERO);
        let t2: f64 = t.iter().map(|z| z.norm_sqr()).sum();
        let expected_b = ComplexMatrix::outer(&r, &r).scale_real(p.rho() * t2);
        assert!((&terms.b_n - &expected_b).max_abs() < 1e-14);
        assert!((g_n(ONE, &terms) - (1.0 + terms.gamma_n).log2()).abs() < 1e-14);
    }

    #[test]
    fn terms_rebuild_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..7);
            let (ch, p, s) = random_setup(&mut rng, n);
            let f = se_upper_bound(&s, &ch, &p).unwrap();
            let k = rng.random_range(0..n);
            let terms = element_terms(k, &s, &ch, &p).unwrap();
            assert!(terms.gamma_n >= 0.0);
            assert!(
                (bound_from_terms(s.coefficient(k), &terms).unwrap() - f).abs()
                    < 1e-9 * f.abs().max(1.0)
            );
        }
    }

    #[test]
    fn closed_form_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.random_range(1..7);
            let (ch, p, s) = random_setup(&mut rng, n);
            let k = rng.random_range(0..n);
            let terms = element_terms(k, &s, &ch, &p).unwrap();
            let alpha = C64::from_polar(terms.amplitude, rng.random_range(0.0..6.3));
            let closed = g_n(alpha, &terms);
            let det = g_n_determinant(alpha, &terms).unwrap();
            assert!(
                (closed - det).abs() <= 1e-9 * det.abs().max(1.0),
                "{closed} vs {det}"
            );
        }
    }

    #[test]
    fn incremental_cache_tracks_rebuilds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (ch, p, mut s) = random_setup(&mut rng, 6);
        let mut b = TermBuilder::new(&ch, &p, &s);
        for n in 0..6 {
            s.set_phase(n, s.phase(n) + 1.0);
            b.set(n, s.coefficient(n), s.is_active(n));
        }
        let fresh = TermBuilder::new(&ch, &p, &s);
        assert!((&b.cascaded - &fresh.cascaded).max_abs() < 1e-12);
        assert!((&b.noise - &fresh.noise).max_abs() < 1e-12);
    }
}
