//! Matching matrices for point interactions and transfer matrices between
//! them.
//!
//! A delta of strength `(q, λ)` at `z₀` imposes `Ψ(z₀⁺) = T_δ Ψ(z₀⁻)` with
//!
//! ```text
//! T_δ = [[ C,            -i(q-λ)S ],
//!        [ -i(q+λ)S,     C        ]],   C = cos √x,  S = sin √x / √x,  x = q² - λ²
//! ```
//!
//! for electrons; positrons use `q → -q`. `C` and `S` are entire in `x`, so
//! the matrix is evaluated without ever forming `√(q² − λ²)`: the trig, the
//! hyperbolic (`x < 0`) and the `q = ±λ` cases all go through [`cos_sinc`].

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spinor::{c, ci, gamma0_times, Mat2, Momentum, ParticleKind};

/// Below this `|x|` the Taylor series is used for `cos √x` and `sin √x / √x`.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Largest condition number accepted for a plane-wave fundamental matrix.
pub const MAX_BASIS_CONDITION: f64 = 1e12;

/// `(cos √x, sin √x / √x)` as entire functions of real `x`.
pub fn cos_sinc(x: f64) -> (f64, f64) {
    if x.abs() < SERIES_THRESHOLD {
        // through x⁴
        let cos = 1.0 + x * (-1.0 / 2.0 + x * (1.0 / 24.0 + x * (-1.0 / 720.0 + x / 40320.0)));
        let sinc = 1.0 + x * (-1.0 / 6.0 + x * (1.0 / 120.0 + x * (-1.0 / 5040.0 + x / 362880.0)));
        (cos, sinc)
    } else if x > 0.0 {
        let r = x.sqrt();
        (r.cos(), r.sin() / r)
    } else {
        let r = (-x).sqrt();
        (r.cosh(), r.sinh() / r)
    }
}

/// Strength of a point interaction `(q 𝟙 + λ β) δ(z − z₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coupling {
    /// Electric strength.
    pub q: f64,
    /// Mass-spike strength.
    pub lambda: f64,
}

impl Coupling {
    pub fn new(q: f64, lambda: f64) -> Self {
        Self { q, lambda }
    }

    pub fn electric(q: f64) -> Self {
        Self { q, lambda: 0.0 }
    }

    pub fn mass(lambda: f64) -> Self {
        Self { q: 0.0, lambda }
    }

    /// `x = q² − λ²`, the square of the combined coupling `Ω`.
    pub fn omega_sq(&self) -> f64 {
        (self.q - self.lambda) * (self.q + self.lambda)
    }

    /// The coupling seen by particles of `kind` (`q → −q` for positrons).
    pub fn for_kind(self, kind: ParticleKind) -> Self {
        Self {
            q: kind.charge_sign() * self.q,
            lambda: self.lambda,
        }
    }
}

/// Matrix relating spinor values across a delta, `Ψ(z₀⁺) = T Ψ(z₀⁻)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchMatrix(pub Mat2);

impl MatchMatrix {
    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// `T₁₁T₂₂ − T₁₂T₂₁` with every product and sum carried out error-free
    /// before a single final rounding per component, so the result reflects
    /// the stored entries and nothing else.
    pub fn determinant(&self) -> Complex64 {
        let [a, b, cc, d] = [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]];
        let re = exact_dot(&[(a.re, d.re), (-a.im, d.im), (-b.re, cc.re), (b.im, cc.im)]);
        let im = exact_dot(&[(a.re, d.im), (a.im, d.re), (-b.re, cc.im), (-b.im, cc.re)]);
        Complex64::new(re, im)
    }
}

/// Dot product accurate as if computed in twice the working precision
/// (fma-based two-product plus two-sum accumulation).
fn exact_dot(terms: &[(f64, f64)]) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for &(x, y) in terms {
        let p = x * y;
        let pe = x.mul_add(y, -p);
        let s = hi + p;
        let z = s - hi;
        let se = (hi - (s - z)) + (p - z);
        hi = s;
        lo += pe + se;
    }
    hi + lo
}

/// Matching matrix `T_δ(q, λ)` for electrons, `T_δ(−q, λ)` for positrons.
pub fn t_delta(coupling: Coupling, kind: ParticleKind) -> MatchMatrix {
    let Coupling { q, lambda } = coupling.for_kind(kind);
    let (cos, sinc) = cos_sinc((q - lambda) * (q + lambda));
    MatchMatrix(Matrix2::new(
        c(cos),
        ci(-(q - lambda) * sinc),
        ci(-(q + lambda) * sinc),
        c(cos),
    ))
}

/// A delta at a given position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedDelta {
    pub position: f64,
    pub coupling: Coupling,
}

/// Particle mass plus an ordered list of point interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaConfig {
    m: f64,
    deltas: Vec<PlacedDelta>,
}

impl DeltaConfig {
    /// Positions must be strictly increasing and finite; `m ≥ 0`.
    pub fn new(m: f64, deltas: Vec<PlacedDelta>) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("mass must be finite and non-negative, got {m}")));
        }
        for d in &deltas {
            let ok = d.position.is_finite() && d.coupling.q.is_finite() && d.coupling.lambda.is_finite();
            if !ok {
                return Err(Error::Domain(format!("non-finite delta {d:?}")));
            }
        }
        if deltas.windows(2).any(|w| !(w[0].position < w[1].position)) {
            return Err(Error::Domain("delta positions must be strictly increasing".into()));
        }
        Ok(Self { m, deltas })
    }

    /// One delta at the origin.
    pub fn single(m: f64, coupling: Coupling) -> Result<Self> {
        Self::new(
            m,
            vec![PlacedDelta {
                position: 0.0,
                coupling,
            }],
        )
    }

    /// Deltas `c1` at `−a` and `c2` at `+a`.
    pub fn double(m: f64, a: f64, c1: Coupling, c2: Coupling) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("half-separation must be positive, got {a}")));
        }
        Self::new(
            m,
            vec![
                PlacedDelta {
                    position: -a,
                    coupling: c1,
                },
                PlacedDelta {
                    position: a,
                    coupling: c2,
                },
            ],
        )
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn deltas(&self) -> &[PlacedDelta] {
        &self.deltas
    }

    /// `a` for a configuration of two deltas placed symmetrically at `±a`.
    pub fn half_separation(&self) -> Option<f64> {
        match self.deltas.as_slice() {
            [l, r] if l.position == -r.position => Some(r.position),
            _ => None,
        }
    }

    /// The two couplings of a double configuration.
    pub fn pair(&self) -> Option<(Coupling, Coupling)> {
        match self.deltas.as_slice() {
            [l, r] => Some((l.coupling, r.coupling)),
            _ => None,
        }
    }

    pub fn is_pure_electric(&self) -> bool {
        self.deltas.iter().all(|d| d.coupling.lambda == 0.0)
    }

    pub fn is_pure_mass(&self) -> bool {
        self.deltas.iter().all(|d| d.coupling.q == 0.0)
    }
}

/// `k = √(ω² − m²)` on the principal branch; real `ω < m` gives `k = iκ`.
pub fn momentum_from_energy(omega: Complex64, m: f64) -> Complex64 {
    ((omega - m) * (omega + m)).sqrt()
}

/// Columns `(U, γ⁰U)` of the plane-wave basis at `z = 0`, where `U` is the
/// positive-energy spinor of `kind`. The fundamental matrix at `z` is
/// `basis · diag(e^{ikz}, e^{−ikz})`.
pub(crate) fn wave_basis(k: Complex64, m: f64, kind: ParticleKind) -> Result<Mat2> {
    if k.norm() == 0.0 {
        return Err(Error::Domain("k = 0: plane-wave basis is degenerate".into()));
    }
    let u = kind.plane_spinor(Momentum::General(k), m)?;
    let g = gamma0_times(&u);
    let basis = Matrix2::new(u[0], g[0], u[1], g[1]);
    let cond = condition_number_2x2(&basis);
    if !(cond <= MAX_BASIS_CONDITION) {
        return Err(Error::Domain(format!(
            "plane-wave basis condition number {cond:.3e} exceeds {MAX_BASIS_CONDITION:e} (k = {k})"
        )));
    }
    Ok(basis)
}

/// Ratio of singular values of a 2×2 matrix.
pub(crate) fn condition_number_2x2(a: &Mat2) -> f64 {
    let fro2 = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let det = a.determinant().norm();
    if det == 0.0 {
        return f64::INFINITY;
    }
    // σ₁² + σ₂² = ‖A‖_F², σ₁σ₂ = |det A|
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let s1 = ((fro2 + disc) / 2.0).sqrt();
    let s2 = det / s1;
    s1 / s2
}

/// Free propagator `P` with `Ψ(z_to) = P Ψ(z_from)` for any solution of the
/// free stationary equation at energy `ω`.
pub fn free_transfer(omega: Complex64, m: f64, z_from: f64, z_to: f64, kind: ParticleKind) -> Result<Mat2> {
    free_transfer_k(momentum_from_energy(omega, m), m, z_to - z_from, kind)
}

/// [`free_transfer`] over a distance `dz`, parametrised by the momentum. Near
/// the gap edges `k` carries information that `ω` has already rounded away.
pub fn free_transfer_k(k: Complex64, m: f64, dz: f64, kind: ParticleKind) -> Result<Mat2> {
    let basis = wave_basis(k, m, kind)?;
    let inv = basis
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular plane-wave basis".into()))?;
    let phase = Matrix2::new((ci(1.0) * k * dz).exp(), c(0.0), c(0.0), (ci(-1.0) * k * dz).exp());
    Ok(basis * phase * inv)
}

/// Total transfer matrix from just left of the leftmost delta to just right
/// of the rightmost one.
pub fn compose_transfer(cfg: &DeltaConfig, omega: Complex64, kind: ParticleKind) -> Result<Mat2> {
    compose_transfer_k(cfg, momentum_from_energy(omega, cfg.mass()), kind)
}

/// [`compose_transfer`] parametrised by the momentum.
pub fn compose_transfer_k(cfg: &DeltaConfig, k: Complex64, kind: ParticleKind) -> Result<Mat2> {
    let mut total = Mat2::identity();
    let mut last: Option<f64> = None;
    for d in cfg.deltas() {
        if let Some(z) = last {
            total = free_transfer_k(k, cfg.mass(), d.position - z, kind)? * total;
        }
        total = t_delta(d.coupling, kind).0 * total;
        last = Some(d.position);
    }
    Ok(total)
}
