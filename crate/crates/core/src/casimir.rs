//! Vacuum interaction energy between two opaque plates.
//!
//! A delta with `T_δ = ±𝟙` confines the field between the plates at `z = ±a`:
//! the normal modes are the zeros `k_n = nπ/(2a)` of the spectral function
//! `h(k) = (∓√(m² + k²) + m) sin 2ka`. Rotating the mode sum onto the
//! imaginary axis and dropping the pieces of `ln h(iκ)` that are constant or
//! linear in `a` leaves
//!
//! ```text
//! E_int(a, m) = (8a/π) ∫_m^∞ √(κ² − m²) / (e^{4aκ} − 1) dκ,
//! ```
//!
//! which is positive, decays like `e^{−4am}` and equals `π/(12a)` for
//! massless fermions. The prefactor of `h` is independent of `a`, so both
//! confining cases give the same energy; only its zero at `k = 0` (minus
//! case) differs, and that zero is not a mode.
//!
//! [`mode_sum_oracle`] recomputes the same number from the regularised sum
//! `−Σ 2ω_n e^{−εω_n}` in 256-bit arithmetic, as an independent check.

use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matching::{t_delta, Coupling};
use crate::quadrature::integrate;
use crate::spinor::ParticleKind;

/// Entrywise tolerance for `T_δ = ±𝟙`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Which confining boundary condition a coupling produces, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitaryCase {
    /// `T_δ = −𝟙`: `q² − λ² = π²r²` with odd `r` (e.g. `q = π`, `λ = 0`).
    MinusIdentity {
        q: f64,
        lambda: f64,
        r: u32,
    },
    /// `T_δ = +𝟙`: `q² − λ² = π²r²` with even `r`. `r = 0` only for the
    /// empty coupling `q = λ = 0`.
    PlusIdentity {
        q: f64,
        lambda: f64,
        r: u32,
    },
    NotUnitary {
        q: f64,
        lambda: f64,
    },
}

impl UnitaryCase {
    pub fn coupling(&self) -> Coupling {
        match *self {
            UnitaryCase::MinusIdentity { q, lambda, .. }
            | UnitaryCase::PlusIdentity { q, lambda, .. }
            | UnitaryCase::NotUnitary { q, lambda } => Coupling::new(q, lambda),
        }
    }

    pub fn r(&self) -> Option<u32> {
        match *self {
            UnitaryCase::MinusIdentity { r, .. } | UnitaryCase::PlusIdentity { r, .. } => Some(r),
            UnitaryCase::NotUnitary { .. } => None,
        }
    }

    /// `∓1` for the two confining cases.
    pub fn sign(&self) -> Option<f64> {
        match self {
            UnitaryCase::MinusIdentity { .. } => Some(-1.0),
            UnitaryCase::PlusIdentity { .. } => Some(1.0),
            UnitaryCase::NotUnitary { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UnitaryCase::MinusIdentity { .. } => "minus_identity",
            UnitaryCase::PlusIdentity { .. } => "plus_identity",
            UnitaryCase::NotUnitary { .. } => "not_unitary",
        }
    }

    /// The `r`-th coupling of a family at mass coupling `λ`: `q_r = √(λ² + π²r²)`.
    pub fn family(lambda: f64, r: u32) -> Self {
        let q = (lambda * lambda + (PI * r as f64).powi(2)).sqrt();
        classify_unitary(Coupling::new(q, lambda))
    }

    fn require(&self) -> Result<f64> {
        self.sign().ok_or_else(|| {
            let c = self.coupling();
            Error::NotUnitary {
                q: c.q,
                lambda: c.lambda,
            }
        })
    }
}

/// `T_δ` is `s·𝟙` within [`UNITARY_TOL`]; both particle kinds agree.
fn matrix_sign(c: Coupling) -> Option<f64> {
    [1.0, -1.0].into_iter().find(|&s| {
        ParticleKind::ALL.iter().all(|&kind| {
            let t = t_delta(c, kind).0;
            (t[(0, 0)] - s).norm() <= UNITARY_TOL
                && (t[(1, 1)] - s).norm() <= UNITARY_TOL
                && t[(0, 1)].norm() <= UNITARY_TOL
                && t[(1, 0)].norm() <= UNITARY_TOL
        })
    })
}

/// Algebraic test: `√(q² − λ²) = πr` for a positive integer `r`, or the empty
/// coupling. The tolerance on `√(q² − λ²)` is the one the entrywise matrix
/// test implies to first order: the off-diagonal entries are
/// `(q ∓ λ) sin δ / √x` with `δ = √x − πr`.
pub fn algebraic_unitary(c: Coupling) -> Option<u32> {
    let (q, lambda) = (c.q, c.lambda);
    if q == 0.0 && lambda == 0.0 {
        return Some(0);
    }
    let x = (q - lambda) * (q + lambda);
    if x <= 0.0 {
        return None;
    }
    let root = x.sqrt();
    let r = (root / PI).round();
    if r < 1.0 {
        return None;
    }
    let tol = UNITARY_TOL * root / (q.abs() + lambda.abs());
    ((root - PI * r).abs() <= tol).then_some(r as u32)
}

/// Classify a coupling by its matching matrix. The algebraic criterion is
/// checked against the matrix one; they may only disagree within a factor
/// of two of the threshold, where rounding decides.
pub fn classify_unitary(c: Coupling) -> UnitaryCase {
    let (q, lambda) = (c.q, c.lambda);
    let by_matrix = matrix_sign(c);
    let by_algebra = algebraic_unitary(c);
    debug_assert!(
        by_matrix.is_some() == by_algebra.is_some() || near_threshold(c),
        "unitary criteria disagree at (q, lambda) = ({q}, {lambda})"
    );
    match (by_matrix, by_algebra) {
        (Some(s), r) => {
            let r = r.unwrap_or_else(|| (((q - lambda) * (q + lambda)).max(0.0).sqrt() / PI).round() as u32);
            if s < 0.0 {
                UnitaryCase::MinusIdentity { q, lambda, r }
            } else {
                UnitaryCase::PlusIdentity { q, lambda, r }
            }
        }
        (None, _) => UnitaryCase::NotUnitary { q, lambda },
    }
}

/// Off-diagonal size within a factor of two of the matrix threshold.
fn near_threshold(c: Coupling) -> bool {
    let t = t_delta(c, ParticleKind::Electron).0;
    let off = t[(0, 1)].norm().max(t[(1, 0)].norm());
    off <= 2.0 * UNITARY_TOL && off > 0.5 * UNITARY_TOL
}

/// `h(k) = (∓√(m² + k²) + m) sin 2ka` on the principal branch.
pub fn spectral_function_h(k: Complex64, case: &UnitaryCase, a: f64, m: f64) -> Result<Complex64> {
    let s = case.require()?;
    let omega = (k * k + m * m).sqrt();
    Ok((s * omega + m) * (2.0 * a * k).sin())
}

/// Interaction energy with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasimirResult {
    pub e_int: f64,
    pub a: f64,
    pub m: f64,
    /// Quadrature estimate plus the analytic truncation bound.
    pub quadrature_error: f64,
}

fn check_plates(a: f64, m: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("half-separation must be positive, got a = {a}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("mass must be non-negative, got m = {m}")));
    }
    Ok(())
}

/// Bound on `∫_T^∞ 2t²√(t² + 2m) e^{−4at²} dt / (1 − e^{−4a(m+T²)})`.
fn tail_bound(t: f64, a: f64, m: f64) -> f64 {
    let b = 4.0 * a;
    let g = (-b * t * t).exp();
    let cubic = g * (b * t * t + 1.0) / (2.0 * b * b);
    let quad = t * g / (2.0 * b) + g / (4.0 * b * b * t);
    2.0 * (cubic + (2.0 * m).sqrt() * quad) / -(-b * (m + t * t)).exp_m1()
}

/// `E_int(a, m)` by adaptive Gauss–Kronrod quadrature.
///
/// With `κ = m + t²` the integrand is smooth at the gap edge, and the common
/// factor `e^{−4am}` is pulled out so that heavy fermions do not underflow.
/// The range starts at `κ_max = m + max(10/a, 10m)` and grows until the
/// truncation bound is below `1e−12` of the result.
pub fn vacuum_energy(case: &UnitaryCase, a: f64, m: f64) -> Result<CasimirResult> {
    case.require()?;
    check_plates(a, m)?;
    let b = 4.0 * a;
    let integrand = |t: f64| {
        let t2 = t * t;
        2.0 * t2 * (t2 + 2.0 * m).sqrt() * (-b * t2).exp() / -(-b * (m + t2)).exp_m1()
    };
    let knee = (1.0 / b).sqrt();
    let mut t_max = (10.0 / a).max(10.0 * m).sqrt();
    loop {
        let head = integrate(integrand, 0.0, knee.min(t_max), 0.0, 1e-13, 4000)?;
        let body = integrate(integrand, knee.min(t_max), t_max, 0.0, 1e-13, 4000)?;
        let value = head.value + body.value;
        let tail = tail_bound(t_max, a, m);
        if tail <= 1e-12 * value {
            let scale = 8.0 * a / PI * (-b * m).exp();
            let e_int = scale * value;
            let quadrature_error = scale * (head.error + body.error + tail);
            if !(quadrature_error <= 1e-8 * e_int.abs().max(1.0)) {
                return Err(Error::Quadrature(format!(
                    "error {quadrature_error:e} too large for E_int = {e_int:e} at a = {a}, m = {m}"
                )));
            }
            return Ok(CasimirResult {
                e_int,
                a,
                m,
                quadrature_error,
            });
        }
        t_max *= 1.25;
        if t_max > 1e6 {
            return Err(Error::Quadrature(format!("tail does not decay at a = {a}, m = {m}")));
        }
    }
}

/// Force between the plates, `−∂E_int/∂L` with `L = 2a`, by a central
/// difference with step `h` in `a`.
pub fn casimir_force(case: &UnitaryCase, a: f64, m: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < a) {
        return Err(Error::Domain(format!("step h = {h} must lie in (0, a = {a})")));
    }
    let up = vacuum_energy(case, a + h, m)?.e_int;
    let down = vacuum_energy(case, a - h, m)?.e_int;
    Ok(-(up - down) / (4.0 * h))
}

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;
/// Terms are summed until they fall below this fraction of the partial sum.
const SUM_CUTOFF: f64 = 1e-60;
/// Step of the trapezoidal rule for the continuum integral in `k = m sinh u`.
const CONTINUUM_STEP: f64 = 0.1;
/// Largest accepted relative change between two Richardson estimates.
pub const ORACLE_CONVERGENCE: f64 = 1e-6;

/// Mode-sum estimate of `E_int` with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub energy: f64,
    /// Extrapolation from the three finest regulators, as a convergence check.
    pub refined: f64,
    /// Regulators used, coarsest first.
    pub epsilons: Vec<f64>,
    /// Regularised energies at each regulator.
    pub regularised: Vec<f64>,
    /// Number of modes summed at each regulator.
    pub modes: Vec<usize>,
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

/// `−[Σ_{n≥1} 2ω_n e^{−εω_n} − (2a/π)∫_0^∞ 2ω e^{−εω} dk + m e^{−εm}]`, where
/// the last term removes half of the `k = 0` mode that the integral counts.
fn regularised_energy(eps: f64, a: f64, m: f64, cc: &mut Consts) -> (BigFloat, usize) {
    let (eps_b, m_b, two) = (big(eps), big(m), big(2.0));
    let pi = cc.pi(PREC, RM);
    let kstep = pi.div(&big(2.0 * a), PREC, RM);
    let cutoff = big(SUM_CUTOFF);

    let mut sum = big(0.0);
    let mut n = 1u64;
    loop {
        let k = kstep.mul(&BigFloat::from_u64(n, PREC), PREC, RM);
        let w = k
            .mul(&k, PREC, RM)
            .add(&m_b.mul(&m_b, PREC, RM), PREC, RM)
            .sqrt(PREC, RM);
        let term = two
            .mul(&w, PREC, RM)
            .mul(&eps_b.mul(&w, PREC, RM).neg().exp(PREC, RM, cc), PREC, RM);
        sum = sum.add(&term, PREC, RM);
        n += 1;
        if term.cmp(&cutoff.mul(&sum, PREC, RM)).is_some_and(|o| o < 0) {
            break;
        }
    }

    let continuum = if m == 0.0 {
        two.div(&eps_b.mul(&eps_b, PREC, RM), PREC, RM)
    } else {
        // ∫ 2ω e^{−εω} dk = 2m² ∫_0^∞ cosh²u e^{−εm cosh u} du; the trapezoidal
        // rule converges geometrically for this even, entire integrand
        let z = eps_b.mul(&m_b, PREC, RM);
        let h = big(CONTINUUM_STEP);
        let g = |u: &BigFloat, cc: &mut Consts| {
            let ch = u.cosh(PREC, RM, cc);
            ch.mul(&ch, PREC, RM)
                .mul(&z.mul(&ch, PREC, RM).neg().exp(PREC, RM, cc), PREC, RM)
        };
        let mut s = g(&big(0.0), cc).div(&two, PREC, RM);
        let mut j = 1u64;
        loop {
            let v = g(&h.mul(&BigFloat::from_u64(j, PREC), PREC, RM), cc);
            s = s.add(&v, PREC, RM);
            j += 1;
            if v.cmp(&cutoff.mul(&s, PREC, RM)).is_some_and(|o| o < 0) {
                break;
            }
        }
        two.mul(&m_b, PREC, RM)
            .mul(&m_b, PREC, RM)
            .mul(&h, PREC, RM)
            .mul(&s, PREC, RM)
    };

    let density = big(2.0 * a).div(&pi, PREC, RM);
    let zero_mode = m_b.mul(&eps_b.mul(&m_b, PREC, RM).neg().exp(PREC, RM, cc), PREC, RM);
    let r = sum
        .sub(&density.mul(&continuum, PREC, RM), PREC, RM)
        .add(&zero_mode, PREC, RM);
    (r.neg(), (n - 1) as usize)
}

/// Richardson extrapolation to `ε → 0` of values at `ε, ε/2, ε/4`, removing
/// the `ε²` and `ε⁴` terms.
fn richardson(v: &[BigFloat]) -> BigFloat {
    let w = |c: f64, x: &BigFloat| big(c).mul(x, PREC, RM);
    w(64.0, &v[2])
        .sub(&w(20.0, &v[1]), PREC, RM)
        .add(&v[0], PREC, RM)
        .div(&big(45.0), PREC, RM)
}

/// Independent estimate of `E_int` from the regularised mode sum over
/// `k_n = nπ/(2a)`, extrapolated from `ε₀, ε₀/2, ε₀/4`. A second
/// extrapolation from `ε₀/2, ε₀/4, ε₀/8` must agree to
/// [`ORACLE_CONVERGENCE`].
pub fn mode_sum_oracle(case: &UnitaryCase, a: f64, m: f64, epsilon: f64) -> Result<OracleResult> {
    case.require()?;
    check_plates(a, m)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("regulator must be positive, got {epsilon}")));
    }
    let mut cc = Consts::new().map_err(|e| Error::Extrapolation(format!("constant cache: {e:?}")))?;
    let epsilons: Vec<f64> = (0..4).map(|i| epsilon / f64::powi(2.0, i)).collect();
    let (values, modes): (Vec<BigFloat>, Vec<usize>) =
        epsilons.iter().map(|&e| regularised_energy(e, a, m, &mut cc)).unzip();
    let energy = to_f64(&richardson(&values[..3]));
    let refined = to_f64(&richardson(&values[1..]));
    let change = ((energy - refined) / refined).abs();
    if !(change <= ORACLE_CONVERGENCE) {
        return Err(Error::Extrapolation(format!(
            "halving the regulator moved the estimate by {change:e} (relative) at a = {a}, m = {m}, eps = {epsilon}"
        )));
    }
    Ok(OracleResult {
        energy,
        refined,
        epsilons,
        regularised: values.iter().map(to_f64).collect(),
        modes,
    })
}

/// Default regulator for the oracle: `ε₀ = a/10`.
pub fn default_epsilon(a: f64) -> f64 {
    0.1 * a
}
