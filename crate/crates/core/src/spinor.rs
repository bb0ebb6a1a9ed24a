//! Clifford representation, dispersion relation and free plane-wave spinors.
//!
//! The representation is fixed: `γ⁰ = σ₃`, `γ¹ = iσ₂`, `γ² = σ₁`. Every
//! amplitude formula elsewhere in the crate assumes it.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Two-component spinor `(ψ₁, ψ₂)`.
pub type Spinor = Vector2<Complex64>;

/// Complex 2×2 matrix.
pub type Mat2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[inline]
pub(crate) fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// Generators of the 1+1 dimensional Clifford algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRep {
    pub gamma0: Mat2,
    pub gamma1: Mat2,
    pub gamma2: Mat2,
}

impl GammaRep {
    pub fn standard() -> Self {
        Self {
            gamma0: Mat2::new(ONE, ZERO, ZERO, -ONE),
            gamma1: Mat2::new(ZERO, ONE, -ONE, ZERO),
            gamma2: Mat2::new(ZERO, ONE, ONE, ZERO),
        }
    }

    /// `γ^μ` for `μ ∈ {0, 1}`, and the chirality element for `μ = 2`.
    pub fn get(&self, mu: usize) -> &Mat2 {
        match mu {
            0 => &self.gamma0,
            1 => &self.gamma1,
            2 => &self.gamma2,
            _ => panic!("gamma index {mu} out of range"),
        }
    }

    pub fn anticommutator(&self, mu: usize, nu: usize) -> Mat2 {
        let (a, b) = (self.get(mu), self.get(nu));
        a * b + b * a
    }
}

/// Minkowski metric `η = diag(1, -1)` extended with `η²² = 1` so that
/// `{γ², γ²} = 2` fits the same table.
pub fn metric(mu: usize, nu: usize) -> f64 {
    match (mu, nu) {
        (0, 0) | (2, 2) => 1.0,
        (1, 1) => -1.0,
        _ => 0.0,
    }
}

/// Electron (`H_Ψ`, mass `+m`) or positron (`H_Φ`, mass `-m`) problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParticleKind {
    Electron,
    Positron,
}

impl ParticleKind {
    pub const ALL: [ParticleKind; 2] = [ParticleKind::Electron, ParticleKind::Positron];

    /// Sign multiplying the electric coupling in the matching matrix.
    pub fn charge_sign(self) -> f64 {
        match self {
            ParticleKind::Electron => 1.0,
            ParticleKind::Positron => -1.0,
        }
    }

    /// Positive-energy plane-wave spinor of this kind: `u₊` or `v₊`.
    pub fn plane_spinor(self, k: Momentum, m: f64) -> Result<Spinor> {
        match self {
            ParticleKind::Electron => u_plus(k, m),
            ParticleKind::Positron => v_plus(k, m),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParticleKind::Electron => "electron",
            ParticleKind::Positron => "positron",
        }
    }
}

impl std::fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Momentum `k`: real for scattering states, `iκ` with `0 < κ < m` for
/// bound states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Momentum {
    /// Arbitrary complex momentum, evaluated on the principal branch.
    General(Complex64),
    /// `k = iκ`; carries `κ` exactly so no branch choice is involved.
    Bound(f64),
}

impl Momentum {
    pub fn real(k: f64) -> Self {
        Momentum::General(c(k))
    }

    pub fn bound(kappa: f64) -> Self {
        Momentum::Bound(kappa)
    }

    pub fn value(self) -> Complex64 {
        match self {
            Momentum::General(k) => k,
            Momentum::Bound(kappa) => ci(kappa),
        }
    }
}

impl From<f64> for Momentum {
    fn from(k: f64) -> Self {
        Momentum::real(k)
    }
}

impl From<Complex64> for Momentum {
    fn from(k: Complex64) -> Self {
        Momentum::General(k)
    }
}

/// `ω = √(k² + m²)`, positive for real `k` and `+√(m² − κ²)` for `k = iκ`.
pub fn dispersion(k: Momentum, m: f64) -> Result<Complex64> {
    if !(m >= 0.0) {
        return Err(Error::Domain(format!("mass must be non-negative, got {m}")));
    }
    match k {
        Momentum::Bound(kappa) => {
            if !(kappa > 0.0 && kappa < m) {
                return Err(Error::Domain(format!(
                    "bound-state momentum kappa = {kappa} must lie in (0, m = {m})"
                )));
            }
            Ok(c(((m - kappa) * (m + kappa)).sqrt()))
        }
        Momentum::General(k) => Ok((k * k + m * m).sqrt()),
    }
}

fn ratio(k: Momentum, m: f64) -> Result<Complex64> {
    let omega = dispersion(k, m)?;
    let den = omega + m;
    if den.norm() == 0.0 {
        return Err(Error::Domain("m + omega vanishes".into()));
    }
    Ok(k.value() / den)
}

/// `u₊(k) = (1, k/(m+ω))ᵀ`.
pub fn u_plus(k: Momentum, m: f64) -> Result<Spinor> {
    Ok(Spinor::new(ONE, ratio(k, m)?))
}

/// `v₊(k) = (k/(m+ω), 1)ᵀ`.
pub fn v_plus(k: Momentum, m: f64) -> Result<Spinor> {
    Ok(Spinor::new(ratio(k, m)?, ONE))
}

/// `γ⁰ ψ`, flipping the sign of the lower component.
pub fn gamma0_times(psi: &Spinor) -> Spinor {
    Spinor::new(psi[0], -psi[1])
}

/// Bilinear `ψ†γ⁰χ`.
pub fn gamma0_bilinear(psi: &Spinor, chi: &Spinor) -> Complex64 {
    psi[0].conj() * chi[0] - psi[1].conj() * chi[1]
}
