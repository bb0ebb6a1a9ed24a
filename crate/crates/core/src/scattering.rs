//! Scattering amplitudes for real momentum `k > 0`.
//!
//! Conventions: the left-incidence ("diestro") state is
//! `u e^{ikz} + ρ_R γ⁰u e^{−ikz}` on the left and `σ u e^{ikz}` on the right,
//! with `A_R u e^{ikz} + B_R γ⁰u e^{−ikz}` between two deltas. The
//! right-incidence ("zurdo") state is `σ_L γ⁰u e^{−ikz}` on the left and
//! `γ⁰u e^{−ikz} + ρ_L u e^{ikz}` on the right, with `A_L`, `B_L` inside.
//! `u` is `u₊(k)` for electrons and `v₊(k)` for positrons.
//!
//! Closed forms exist for a single delta and for the pure electric and pure
//! mass-spike doubles. The interior coefficients of the doubles are not
//! symmetric under `1 ↔ 2`: `A_R` and `B_R` carry the couplings of the
//! right delta, `A_L` and `B_L` those of the left one, so `A_R = B_L` and
//! `A_L = B_R` hold only for equal couplings. The positron mass-spike
//! reflection amplitudes have the same `sin 2ak` structure as the electron
//! ones. Both points were settled against [`generic_double_amplitudes`],
//! which solves the matching equations directly and serves as the reference
//! for every closed form.
//!
//! Flipping the particle kind is equivalent to `(q, λ) → (−q, −λ)` with the
//! `γ⁰u` coefficients (`ρ_R`, `ρ_L`, `B_R`, `A_L`) changing sign.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matching::{compose_transfer, cos_sinc, t_delta, wave_basis, Coupling, DeltaConfig};
use crate::spinor::{c, ci, Mat2, ParticleKind};

/// Largest condition number accepted for the amplitude linear systems.
pub const MAX_SYSTEM_CONDITION: f64 = 1e12;

/// Coefficients of the solution between two deltas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interior {
    pub a_r: Complex64,
    pub b_r: Complex64,
    pub a_l: Complex64,
    pub b_l: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringData {
    pub k: f64,
    pub kind: ParticleKind,
    /// Transmission for left incidence.
    pub sigma: Complex64,
    /// Transmission for right incidence; equal to `sigma` for every model.
    pub sigma_l: Complex64,
    pub rho_r: Complex64,
    pub rho_l: Complex64,
    /// `None` for a single delta.
    pub interior: Option<Interior>,
}

impl ScatteringData {
    fn free(k: f64, kind: ParticleKind) -> Self {
        Self {
            k,
            kind,
            sigma: c(1.0),
            sigma_l: c(1.0),
            rho_r: c(0.0),
            rho_l: c(0.0),
            interior: None,
        }
    }

    /// Largest componentwise distance to `other` over the amplitudes both
    /// carry.
    pub fn max_distance(&self, other: &ScatteringData) -> f64 {
        let mut d = [
            (self.sigma - other.sigma).norm(),
            (self.sigma_l - other.sigma_l).norm(),
            (self.rho_r - other.rho_r).norm(),
            (self.rho_l - other.rho_l).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if let (Some(x), Some(y)) = (self.interior, other.interior) {
            for (u, v) in [(x.a_r, y.a_r), (x.b_r, y.b_r), (x.a_l, y.a_l), (x.b_l, y.b_l)] {
                d = d.max((u - v).norm());
            }
        }
        d
    }
}

/// Scattering configurations with dedicated entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Single(Coupling),
    DoubleElectric { q1: f64, q2: f64, a: f64 },
    DoubleMass { l1: f64, l2: f64, a: f64 },
    DoubleGeneric { c1: Coupling, c2: Coupling, a: f64 },
}

impl Model {
    pub fn config(&self, m: f64) -> Result<DeltaConfig> {
        match *self {
            Model::Single(cp) => DeltaConfig::single(m, cp),
            Model::DoubleElectric { q1, q2, a } => {
                DeltaConfig::double(m, a, Coupling::electric(q1), Coupling::electric(q2))
            }
            Model::DoubleMass { l1, l2, a } => DeltaConfig::double(m, a, Coupling::mass(l1), Coupling::mass(l2)),
            Model::DoubleGeneric { c1, c2, a } => DeltaConfig::double(m, a, c1, c2),
        }
    }

    /// Amplitudes from the closed form of this model, or from the linear
    /// solver for mixed doubles.
    pub fn amplitudes(&self, m: f64, k: f64, kind: ParticleKind) -> Result<ScatteringData> {
        match *self {
            Model::Single(cp) => single_delta_amplitudes(cp, kind, k, m),
            Model::DoubleElectric { q1, q2, a } => double_electric_amplitudes(q1, q2, a, m, k, kind),
            Model::DoubleMass { l1, l2, a } => double_mass_amplitudes(l1, l2, a, m, k, kind),
            Model::DoubleGeneric { .. } => generic_double_amplitudes(&self.config(m)?, k, kind),
        }
    }
}

fn check_inputs(k: f64, m: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!(
            "scattering momentum must be positive and finite, got {k}"
        )));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("mass must be finite and non-negative, got {m}")));
    }
    Ok(())
}

fn check_half_separation(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("half-separation must be positive, got {a}")));
    }
    Ok(())
}

fn nonzero(den: Complex64, k: f64, what: &str) -> Result<Complex64> {
    if den.norm() < 1e-300 {
        return Err(Error::Singular {
            k,
            reason: format!("{what} vanishes"),
        });
    }
    Ok(den)
}

/// A closed-form denominator together with the sum of the magnitudes of its
/// terms, the natural scale for deciding whether it vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Denominator {
    pub value: Complex64,
    pub scale: f64,
}

impl Denominator {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.norm()
        } else {
            self.value.norm() / self.scale
        }
    }
}

/// Denominator of the single-delta amplitudes, `i s(qω + mλ) S + kC`, with
/// `s = +1` for electrons and `−1` for positrons. Accepts complex `k`.
pub fn single_denominator(cp: Coupling, m: f64, k: Complex64, kind: ParticleKind) -> Denominator {
    let s = kind.charge_sign();
    let omega = (k * k + m * m).sqrt();
    let (cos, sinc) = cos_sinc(cp.omega_sq());
    let t1 = ci(s * sinc) * (omega * cp.q + m * cp.lambda);
    let t2 = k * cos;
    Denominator {
        value: t1 + t2,
        scale: t1.norm() + t2.norm(),
    }
}

/// Closed-form amplitudes for one delta at the origin. `ρ_R = ρ_L`.
pub fn single_delta_amplitudes(cp: Coupling, kind: ParticleKind, k: f64, m: f64) -> Result<ScatteringData> {
    check_inputs(k, m)?;
    let omega = (k * k + m * m).sqrt();
    let (_, sinc) = cos_sinc(cp.omega_sq());
    let den = nonzero(
        single_denominator(cp, m, c(k), kind).value,
        k,
        "single-delta denominator",
    )?;
    let sigma = c(k) / den;
    let rho = ci(-sinc * (omega * cp.lambda + m * cp.q)) / den;
    Ok(ScatteringData {
        k,
        kind,
        sigma,
        sigma_l: sigma,
        rho_r: rho,
        rho_l: rho,
        interior: None,
    })
}

/// `Λ(k) = k² cos(q₁+q₂) + i s k ω sin(q₁+q₂) + m² sin q₁ sin q₂ (e^{4iak} − 1)`
/// for complex `k`; its zeros at `k = iκ` are the double-electric bound states.
pub fn electric_denominator(q1: f64, q2: f64, a: f64, m: f64, k: Complex64, kind: ParticleKind) -> Denominator {
    let s = kind.charge_sign();
    let omega = (k * k + m * m).sqrt();
    let t1 = k * k * (q1 + q2).cos();
    let t2 = ci(s) * k * omega * (q1 + q2).sin();
    let t3 = (ci(4.0 * a) * k).exp_m1() * (m * m * q1.sin() * q2.sin());
    Denominator {
        value: t1 + t2 + t3,
        scale: t1.norm() + t2.norm() + t3.norm(),
    }
}

/// `Δ(k) = k² cosh(λ₁+λ₂) + ω²(e^{4iak} − 1) sinh λ₁ sinh λ₂ + i s k m sinh(λ₁+λ₂)`
/// for complex `k`.
pub fn mass_denominator(l1: f64, l2: f64, a: f64, m: f64, k: Complex64, kind: ParticleKind) -> Denominator {
    let s = kind.charge_sign();
    let omega_sq = k * k + m * m;
    let t1 = k * k * (l1 + l2).cosh();
    let t2 = omega_sq * (ci(4.0 * a) * k).exp_m1() * (l1.sinh() * l2.sinh());
    let t3 = ci(s * m) * k * (l1 + l2).sinh();
    Denominator {
        value: t1 + t2 + t3,
        scale: t1.norm() + t2.norm() + t3.norm(),
    }
}

trait ExpM1 {
    fn exp_m1(self) -> Self;
}

impl ExpM1 for Complex64 {
    /// `e^z − 1` without cancellation for small `|z|`.
    fn exp_m1(self) -> Self {
        if self.norm() < 1e-5 {
            let z = self;
            z * (c(1.0) + z * (c(0.5) + z * (c(1.0 / 6.0) + z / 24.0)))
        } else {
            self.exp() - 1.0
        }
    }
}

/// Closed-form amplitudes for electric deltas `q₁` at `−a` and `q₂` at `+a`.
pub fn double_electric_amplitudes(
    q1: f64,
    q2: f64,
    a: f64,
    m: f64,
    k: f64,
    kind: ParticleKind,
) -> Result<ScatteringData> {
    check_inputs(k, m)?;
    check_half_separation(a)?;
    let s = kind.charge_sign();
    let omega = (k * k + m * m).sqrt();
    let lam = nonzero(
        electric_denominator(q1, q2, a, m, c(k), kind).value,
        k,
        "electric double denominator",
    )?;
    let e2 = Complex64::from_polar(1.0, 2.0 * a * k);
    let (s1, c1, s2, c2) = (q1.sin(), q1.cos(), q2.sin(), q2.cos());
    let theta = e2.conj() * (c2 * s1) + e2 * (c1 * s2);
    let common = ci(-s * 2.0 * m * omega * s1 * s2 * (2.0 * a * k).sin());
    let ikm = ci(k * m);
    let rho_r = (common - ikm * theta) / lam;
    let rho_l = (common - ikm * theta.conj()) / lam;
    let sigma = c(k * k) / lam;
    let interior = Interior {
        a_r: Complex64::new(k * k * c2, s * k * omega * s2) / lam,
        b_r: -ikm * e2 * s2 / lam,
        a_l: -ikm * e2 * s1 / lam,
        b_l: Complex64::new(k * k * c1, s * k * omega * s1) / lam,
    };
    Ok(ScatteringData {
        k,
        kind,
        sigma,
        sigma_l: sigma,
        rho_r,
        rho_l,
        interior: Some(interior),
    })
}

/// Closed-form amplitudes for mass spikes `λ₁` at `−a` and `λ₂` at `+a`.
/// `ρ_R = ρ_L` exactly when `λ₁ = λ₂`.
pub fn double_mass_amplitudes(l1: f64, l2: f64, a: f64, m: f64, k: f64, kind: ParticleKind) -> Result<ScatteringData> {
    check_inputs(k, m)?;
    check_half_separation(a)?;
    let s = kind.charge_sign();
    let omega = (k * k + m * m).sqrt();
    let del = nonzero(
        mass_denominator(l1, l2, a, m, c(k), kind).value,
        k,
        "mass double denominator",
    )?;
    let e2 = Complex64::from_polar(1.0, 2.0 * a * k);
    let (sh1, ch1, sh2, ch2) = (l1.sinh(), l1.cosh(), l2.sinh(), l2.cosh());
    let upsilon = e2.conj() * (ch2 * sh1) + e2 * (ch1 * sh2);
    let common = ci(-s * 2.0 * m * omega * sh1 * sh2 * (2.0 * a * k).sin());
    let ikw = ci(k * omega);
    let rho_r = (common - ikw * upsilon) / del;
    let rho_l = (common - ikw * upsilon.conj()) / del;
    let sigma = c(k * k) / del;
    let interior = Interior {
        a_r: Complex64::new(k * k * ch2, s * k * m * sh2) / del,
        b_r: -ikw * e2 * sh2 / del,
        a_l: -ikw * e2 * sh1 / del,
        b_l: Complex64::new(k * k * ch1, s * k * m * sh1) / del,
    };
    Ok(ScatteringData {
        k,
        kind,
        sigma,
        sigma_l: sigma,
        rho_r,
        rho_l,
        interior: Some(interior),
    })
}

fn singular_values_ratio4(a: &Matrix4<Complex64>) -> f64 {
    let sv = a.svd(false, false).singular_values;
    let (max, min) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve4(a: Matrix4<Complex64>, b: Vector4<Complex64>, k: f64) -> Result<Vector4<Complex64>> {
    let cond = singular_values_ratio4(&a);
    if !(cond <= MAX_SYSTEM_CONDITION) {
        return Err(Error::Singular {
            k,
            reason: format!("matching system condition number {cond:.3e}"),
        });
    }
    a.lu().solve(&b).ok_or_else(|| Error::Singular {
        k,
        reason: "matching system is singular".into(),
    })
}

fn set_block(a: &mut Matrix4<Complex64>, row: usize, col: usize, v: &Vector2<Complex64>) {
    a[(row, col)] = v[0];
    a[(row + 1, col)] = v[1];
}

/// Amplitudes for two arbitrary deltas, from the 4×4 matching systems of
/// left and right incidence. Works for any mixture of electric and mass
/// couplings and for any two positions.
pub fn generic_double_amplitudes(cfg: &DeltaConfig, k: f64, kind: ParticleKind) -> Result<ScatteringData> {
    let m = cfg.mass();
    check_inputs(k, m)?;
    let [d1, d2] = cfg.deltas() else {
        return Err(Error::Domain(format!(
            "double-delta solver needs exactly two deltas, got {}",
            cfg.deltas().len()
        )));
    };
    let basis = wave_basis(c(k), m, kind).map_err(|e| Error::Singular {
        k,
        reason: e.to_string(),
    })?;
    let u = Vector2::new(basis[(0, 0)], basis[(1, 0)]);
    let g = Vector2::new(basis[(0, 1)], basis[(1, 1)]);
    let e = |z: f64| Complex64::from_polar(1.0, k * z);
    let (z1, z2) = (d1.position, d2.position);
    let t1 = t_delta(d1.coupling, kind).0;
    let t2 = t_delta(d2.coupling, kind).0;

    // Shared columns: the interior unknowns (A, B) enter both systems alike.
    let mut base = Matrix4::<Complex64>::zeros();
    set_block(&mut base, 0, 1, &(-u * e(z1)));
    set_block(&mut base, 0, 2, &(-g * e(-z1)));
    set_block(&mut base, 2, 1, &(t2 * u * e(z2)));
    set_block(&mut base, 2, 2, &(t2 * g * e(-z2)));
    set_block(&mut base, 0, 0, &(t1 * g * e(-z1)));
    set_block(&mut base, 2, 3, &(-u * e(z2)));

    // Left incidence: unknowns (ρ_R, A_R, B_R, σ_R).
    let mut rhs = Vector4::zeros();
    let inc = -(t1 * u) * e(z1);
    rhs[0] = inc[0];
    rhs[1] = inc[1];
    let right = solve4(base, rhs, k)?;

    // Right incidence: unknowns (σ_L, A_L, B_L, ρ_L).
    let mut rhs = Vector4::zeros();
    let inc = g * e(-z2);
    rhs[2] = inc[0];
    rhs[3] = inc[1];
    let left = solve4(base, rhs, k)?;

    Ok(ScatteringData {
        k,
        kind,
        sigma: right[3],
        sigma_l: left[0],
        rho_r: right[0],
        rho_l: left[3],
        interior: Some(Interior {
            a_r: right[1],
            b_r: right[2],
            a_l: left[1],
            b_l: left[2],
        }),
    })
}

/// Outer amplitudes for any number of deltas, from the composed transfer
/// matrix. Reflection phases refer to the origin.
pub fn transfer_amplitudes(cfg: &DeltaConfig, k: f64, kind: ParticleKind) -> Result<ScatteringData> {
    let m = cfg.mass();
    check_inputs(k, m)?;
    let (Some(first), Some(last)) = (cfg.deltas().first(), cfg.deltas().last()) else {
        return Ok(ScatteringData::free(k, kind));
    };
    let basis = wave_basis(c(k), m, kind).map_err(|e| Error::Singular {
        k,
        reason: e.to_string(),
    })?;
    let u = Vector2::new(basis[(0, 0)], basis[(1, 0)]);
    let g = Vector2::new(basis[(0, 1)], basis[(1, 1)]);
    let e = |z: f64| Complex64::from_polar(1.0, k * z);
    let omega = c((k * k + m * m).sqrt());
    let total = compose_transfer(cfg, omega, kind).map_err(|e| Error::Singular {
        k,
        reason: e.to_string(),
    })?;
    let (zl, zr) = (first.position, last.position);

    // Both incidences share the unknown columns (M γ⁰u e^{−ikz_l}, −u e^{ikz_r}).
    let col0 = total * g * e(-zl);
    let col1 = -u * e(zr);
    let sys: Mat2 = Matrix2::new(col0[0], col1[0], col0[1], col1[1]);
    let inv = sys.try_inverse().ok_or_else(|| Error::Singular {
        k,
        reason: "transfer system is singular".into(),
    })?;
    let right = inv * (-(total * u) * e(zl));
    let left = inv * (g * e(-zr));
    Ok(ScatteringData {
        k,
        kind,
        sigma: right[1],
        sigma_l: left[0],
        rho_r: right[0],
        rho_l: left[1],
        interior: None,
    })
}

/// `max(||σ|²+|ρ_R|²−1|, ||σ|²+|ρ_L|²−1|, |σρ_L* + σ*ρ_R|)`.
pub fn unitarity_defect(s: &ScatteringData) -> f64 {
    let t = s.sigma.norm_sqr();
    let d1 = (t + s.rho_r.norm_sqr() - 1.0).abs();
    let d2 = (t + s.rho_l.norm_sqr() - 1.0).abs();
    let d3 = (s.sigma * s.rho_l.conj() + s.sigma.conj() * s.rho_r).norm();
    d1.max(d2).max(d3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    use ParticleKind::{Electron, Positron};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn double(c1: Coupling, c2: Coupling, a: f64, m: f64) -> DeltaConfig {
        DeltaConfig::double(m, a, c1, c2).unwrap()
    }

    #[test]
    fn free_single_delta() {
        for kind in ParticleKind::ALL {
            let s = single_delta_amplitudes(Coupling::default(), kind, 1.0, 1.0).unwrap();
            assert!(close(s.sigma, c(1.0), 1e-15) && s.rho_r == c(0.0) && s.rho_l == c(0.0));
            assert_eq!(unitarity_defect(&s), 0.0);
        }
    }

    #[test]
    fn single_half_pi_electric() {
        let s = single_delta_amplitudes(Coupling::electric(FRAC_PI_2), Electron, 1.0, 1.0).unwrap();
        assert!(close(s.sigma, ci(-1.0 / SQRT_2), 1e-15));
        assert!((s.sigma.norm_sqr() - 0.5).abs() < 1e-15);
        let cfg = DeltaConfig::single(1.0, Coupling::electric(FRAC_PI_2)).unwrap();
        assert!(s.max_distance(&transfer_amplitudes(&cfg, 1.0, Electron).unwrap()) < 1e-14);
    }

    #[test]
    fn single_matches_transfer_route() {
        let cp = Coupling::new(1.0, 0.5);
        for kind in ParticleKind::ALL {
            let s = single_delta_amplitudes(cp, kind, 0.8, 1.0).unwrap();
            let cfg = DeltaConfig::single(1.0, cp).unwrap();
            assert!(s.max_distance(&transfer_amplitudes(&cfg, 0.8, kind).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn generic_with_one_transparent_delta_is_a_shifted_single() {
        // A single delta at −a: σ unchanged, ρ_R picks up e^{−2ika}, ρ_L e^{2ika}.
        let (cp, a, m, k) = (Coupling::new(0.7, -1.2), 0.6, 1.1, 1.9);
        for kind in ParticleKind::ALL {
            let g = generic_double_amplitudes(&double(cp, Coupling::default(), a, m), k, kind).unwrap();
            let s = single_delta_amplitudes(cp, kind, k, m).unwrap();
            assert!(close(g.sigma, s.sigma, 1e-13));
            assert!(close(
                g.rho_r,
                s.rho_r * Complex64::from_polar(1.0, -2.0 * k * a),
                1e-13
            ));
            assert!(close(g.rho_l, s.rho_l * Complex64::from_polar(1.0, 2.0 * k * a), 1e-13));
        }
    }

    #[test]
    fn electric_double_examples() {
        for kind in ParticleKind::ALL {
            let s = double_electric_amplitudes(0.0, 0.0, 1.0, 1.0, 1.3, kind).unwrap();
            assert!(close(s.sigma, c(1.0), 1e-15) && s.rho_r.norm() < 1e-15 && s.rho_l.norm() < 1e-15);

            // massless: pure phase transmission
            let (q1, q2) = (0.9, -2.3);
            let s = double_electric_amplitudes(q1, q2, 1.0, 0.0, 1.7, kind).unwrap();
            let expect = Complex64::from_polar(1.0, -kind.charge_sign() * (q1 + q2));
            assert!(close(s.sigma, expect, 1e-14), "{kind}: {}", s.sigma);
            assert!(s.rho_r.norm() < 1e-15 && s.rho_l.norm() < 1e-15);

            let closed = double_electric_amplitudes(2.0, 2.5, 1.0, 1.5, 1.2, kind).unwrap();
            let cfg = double(Coupling::electric(2.0), Coupling::electric(2.5), 1.0, 1.5);
            let oracle = generic_double_amplitudes(&cfg, 1.2, kind).unwrap();
            assert!(closed.max_distance(&oracle) <= 1e-10);
            assert!(unitarity_defect(&double_electric_amplitudes(2.0, 2.5, 1.0, 1.5, 3.0, kind).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn mass_double_examples() {
        let s = double_mass_amplitudes(0.7, 0.7, 1.0, 1.0, 0.9, Electron).unwrap();
        assert!(close(s.rho_r, s.rho_l, 1e-12));
        let s = double_mass_amplitudes(0.4, 1.1, 0.8, 1.3, 1.6, Positron).unwrap();
        let cfg = double(Coupling::mass(0.4), Coupling::mass(1.1), 0.8, 1.3);
        assert!(s.max_distance(&generic_double_amplitudes(&cfg, 1.6, Positron).unwrap()) <= 1e-10);
        assert!(!close(s.rho_r, s.rho_l, 1e-3));
        for kind in ParticleKind::ALL {
            let s = double_mass_amplitudes(0.0, 0.0, 1.0, 1.0, 0.5, kind).unwrap();
            assert!(close(s.sigma, c(1.0), 1e-15) && s.rho_r.norm() < 1e-15);
        }
    }

    /// Interior coefficients with the left coupling in every slot, i.e. the
    /// `A_R = B_L`, `A_L = B_R` pattern.
    fn symmetric_interior_electric(
        q1: f64,
        q2: f64,
        a: f64,
        m: f64,
        k: f64,
        kind: ParticleKind,
    ) -> (Complex64, Complex64) {
        let s = kind.charge_sign();
        let omega = (k * k + m * m).sqrt();
        let lam = electric_denominator(q1, q2, a, m, c(k), kind).value;
        let a_r = Complex64::new(k * k * q1.cos(), s * k * omega * q1.sin()) / lam;
        let b_r = ci(-k * m) * Complex64::from_polar(1.0, 2.0 * a * k) * q1.sin() / lam;
        (a_r, b_r)
    }

    /// Positron mass-spike reflection with `sin ak` and the couplings swapped
    /// inside `Υ`.
    fn half_angle_positron_rho(l1: f64, l2: f64, a: f64, m: f64, k: f64) -> Complex64 {
        let omega = (k * k + m * m).sqrt();
        let del = mass_denominator(l1, l2, a, m, c(k), Positron).value;
        let e2 = Complex64::from_polar(1.0, 2.0 * a * k);
        let ups = e2.conj() * (l1.cosh() * l2.sinh()) + e2 * (l2.cosh() * l1.sinh());
        (ci(2.0 * m * omega * l1.sinh() * l2.sinh() * (a * k).sin()) - ci(k * omega) * ups) / del
    }

    #[test]
    fn alternative_closed_forms_disagree_with_solver() {
        let (q1, q2, a, m, k) = (2.0, 2.5, 1.0, 1.5, 1.2);
        let oracle = generic_double_amplitudes(
            &double(Coupling::electric(q1), Coupling::electric(q2), a, m),
            k,
            Electron,
        )
        .unwrap();
        let (a_r, b_r) = symmetric_interior_electric(q1, q2, a, m, k, Electron);
        let inner = oracle.interior.unwrap();
        assert!((a_r - inner.a_r).norm() > 1e-2 && (b_r - inner.b_r).norm() > 1e-2);
        // but they are right for equal couplings
        let oracle = generic_double_amplitudes(
            &double(Coupling::electric(q1), Coupling::electric(q1), a, m),
            k,
            Electron,
        )
        .unwrap();
        let (a_r, b_r) = symmetric_interior_electric(q1, q1, a, m, k, Electron);
        assert!(close(a_r, oracle.interior.unwrap().a_r, 1e-12) && close(b_r, oracle.interior.unwrap().b_r, 1e-12));

        let (l1, l2, a, m, k) = (0.4, 1.1, 0.8, 1.3, 1.6);
        let oracle =
            generic_double_amplitudes(&double(Coupling::mass(l1), Coupling::mass(l2), a, m), k, Positron).unwrap();
        assert!((half_angle_positron_rho(l1, l2, a, m, k) - oracle.rho_r).norm() > 1e-2);
        let shipped = double_mass_amplitudes(l1, l2, a, m, k, Positron).unwrap();
        assert!(close(shipped.rho_r, oracle.rho_r, 1e-12));
    }

    #[test]
    fn transfer_route_agrees_with_four_by_four() {
        let cfg = double(Coupling::new(1.0, 0.3), Coupling::new(-0.5, 0.8), 1.0, 1.0);
        for kind in ParticleKind::ALL {
            let g = generic_double_amplitudes(&cfg, 1.0, kind).unwrap();
            let t = transfer_amplitudes(&cfg, 1.0, kind).unwrap();
            assert!(close(g.sigma, t.sigma, 1e-12) && close(g.rho_r, t.rho_r, 1e-12) && close(g.rho_l, t.rho_l, 1e-12));
            assert!(unitarity_defect(&g) <= 1e-12);
            assert!(close(g.sigma, g.sigma_l, 1e-12));
        }
    }

    #[test]
    fn three_deltas_are_unitary() {
        let deltas = [
            (-1.0, Coupling::new(0.4, 0.2)),
            (0.3, Coupling::new(-1.1, 0.9)),
            (0.9, Coupling::new(2.0, -0.4)),
        ]
        .into_iter()
        .map(|(position, coupling)| crate::PlacedDelta { position, coupling })
        .collect();
        let cfg = DeltaConfig::new(0.8, deltas).unwrap();
        for kind in ParticleKind::ALL {
            assert!(unitarity_defect(&transfer_amplitudes(&cfg, 1.3, kind).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn corrupted_sigma_is_detected() {
        let s = double_electric_amplitudes(2.0, 2.5, 1.0, 1.5, 3.0, Electron).unwrap();
        let bad = ScatteringData {
            sigma: s.sigma * 1.01,
            ..s
        };
        let expect = 0.0201 * s.sigma.norm_sqr();
        assert!((unitarity_defect(&bad) - expect).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_momentum() {
        assert!(single_delta_amplitudes(Coupling::default(), Electron, 0.0, 1.0).is_err());
        assert!(double_mass_amplitudes(0.1, 0.1, 1.0, 1.0, -1.0, Electron).is_err());
        assert!(double_electric_amplitudes(0.1, 0.1, 0.0, 1.0, 1.0, Electron).is_err());
    }

    fn negate_gamma0_part(s: ScatteringData) -> ScatteringData {
        let mut s = s;
        s.rho_r = -s.rho_r;
        s.rho_l = -s.rho_l;
        if let Some(i) = s.interior.as_mut() {
            i.b_r = -i.b_r;
            i.a_l = -i.a_l;
        }
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn closed_forms_are_unitary_and_match_solver(
            x1 in -5.0f64..5.0, x2 in -5.0f64..5.0,
            a in 1e-3f64..3.0, m in 1e-3f64..3.0, k in 1e-2f64..10.0, electron in any::<bool>(),
        ) {
            let kind = if electron { Electron } else { Positron };
            let el = double_electric_amplitudes(x1, x2, a, m, k, kind).unwrap();
            let oracle = generic_double_amplitudes(&double(Coupling::electric(x1), Coupling::electric(x2), a, m), k, kind).unwrap();
            prop_assert!(unitarity_defect(&el) <= 1e-10);
            prop_assert!(el.max_distance(&oracle) <= 1e-10, "{:?}\n{:?}", el, oracle);

            let ms = double_mass_amplitudes(x1, x2, a, m, k, kind).unwrap();
            let oracle = generic_double_amplitudes(&double(Coupling::mass(x1), Coupling::mass(x2), a, m), k, kind).unwrap();
            prop_assert!(unitarity_defect(&ms) <= 1e-10);
            prop_assert!(ms.max_distance(&oracle) <= 1e-10, "{:?}\n{:?}", ms, oracle);
        }

        #[test]
        fn kind_flip_is_coupling_reversal(
            q1 in -5.0f64..5.0, l1 in -5.0f64..5.0, q2 in -5.0f64..5.0, l2 in -5.0f64..5.0,
            a in 1e-2f64..3.0, m in 1e-2f64..3.0, k in 1e-1f64..10.0,
        ) {
            let pos = generic_double_amplitudes(&double(Coupling::new(q1, l1), Coupling::new(q2, l2), a, m), k, Positron).unwrap();
            let el = generic_double_amplitudes(&double(Coupling::new(-q1, -l1), Coupling::new(-q2, -l2), a, m), k, Electron).unwrap();
            prop_assert!(pos.max_distance(&negate_gamma0_part(el)) <= 1e-10);

            let pos = single_delta_amplitudes(Coupling::new(q1, l1), Positron, k, m).unwrap();
            let el = single_delta_amplitudes(Coupling::new(-q1, -l1), Electron, k, m).unwrap();
            prop_assert!(pos.max_distance(&negate_gamma0_part(el)) <= 1e-12);
        }
    }
}
