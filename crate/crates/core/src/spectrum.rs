//! Bound states inside the gap `0 < ω < m`, i.e. `k = iκ` with `0 < κ < m`.
//!
//! For two deltas at `z₁ < z₂` the bound spinor is
//!
//! ```text
//! Ψ(z) = A₁ e^{κz} γ⁰u                         z < z₁
//!        B₂ e^{κz} γ⁰u + C₂ e^{−κz} u          z₁ < z < z₂
//!        D₃ e^{−κz} u                          z > z₂
//! ```
//!
//! with `u = u₊(iκ)` (electrons) or `v₊(iκ)` (positrons) and `A₁ = 1`.
//! Roots are located on a spectral function of `κ` chosen by the couplings:
//! the reduced exponential forms for pure electric and pure mass-spike pairs,
//! and the transfer-matrix determinant otherwise. All of them vanish at
//! `κ = 0`, which is never a bound state; scans stay a relative `1e-9`
//! inside the gap.
//!
//! Everything here depends on `a` and `m` only through `a·m`, so coupling
//! plane maps are parametrised by `p⁻¹ = a·m`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{compose_transfer_k, cos_sinc, t_delta, Coupling, DeltaConfig};
use crate::roots::{scan_roots, ScanOutcome};
use crate::spinor::{c, gamma0_times, Momentum, ParticleKind, Spinor};

pub const DEFAULT_SCAN_POINTS: usize = 2048;
pub const MAX_SCAN_POINTS: usize = 131_072;
/// Scans cover `(ε m, (1 − ε) m)`.
pub const SCAN_EDGE: f64 = 1e-9;
/// Bisection stops at `|Δκ| ≤ ROOT_TOL · m`.
pub const ROOT_TOL: f64 = 1e-12;
/// `|F|` below which a sign-preserving minimum counts as a double root.
pub const TOUCH_TOL: f64 = 1e-10;
/// `|F(m)|` below which a configuration carries a zero mode.
pub const ZERO_MODE_TOL: f64 = 1e-10;
/// Most bound states a double delta can hold.
pub const MAX_DOUBLE_ROOTS: usize = 2;
/// Tolerance for accepting a single-delta candidate against its determinant.
pub const SINGLE_RESIDUAL_TOL: f64 = 1e-8;

fn check_kappa(kappa: f64, m: f64, allow_edge: bool) -> Result<()> {
    let upper_ok = if allow_edge { kappa <= m } else { kappa < m };
    if !(kappa > 0.0 && upper_ok) {
        return Err(Error::Domain(format!("kappa = {kappa} must lie in (0, m = {m})")));
    }
    Ok(())
}

// ---------------------------------------------------------------- single delta

/// Relative residual of the single-delta bound-state condition
/// `s(qω + mλ)S + κC = 0`, the scattering denominator at `k = iκ`.
pub fn single_bound_residual(kappa: f64, cp: Coupling, kind: ParticleKind, m: f64) -> f64 {
    let s = kind.charge_sign();
    let omega = ((m - kappa) * (m + kappa)).max(0.0).sqrt();
    let (cos, sinc) = cos_sinc(cp.omega_sq());
    let t1 = s * (cp.q * omega + m * cp.lambda) * sinc;
    let t2 = kappa * cos;
    let scale = t1.abs() + t2.abs();
    if scale == 0.0 {
        0.0
    } else {
        (t1 + t2) / scale
    }
}

/// Bound-state decay constants of a single delta.
///
/// The two closed-form branches `κ± = m(±q|xS| + s λxSC)/(λ²C² − q²)` come
/// from squaring the determinant condition, so each candidate in `(0, m)` is
/// kept only when the unsquared condition holds to [`SINGLE_RESIDUAL_TOL`].
pub fn single_delta_kappas(cp: Coupling, kind: ParticleKind, m: f64) -> Result<Vec<f64>> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    let (q, lambda) = (cp.q, cp.lambda);
    let x = cp.omega_sq();
    let (cos, sinc) = cos_sinc(x);
    let den = lambda * lambda * cos * cos - q * q;
    if den == 0.0 {
        return Ok(Vec::new());
    }
    let root_part = q * (x * sinc).abs();
    let trig_part = kind.charge_sign() * lambda * x * sinc * cos;
    let mut out: Vec<f64> = [1.0, -1.0]
        .into_iter()
        .map(|sgn| m * (sgn * root_part + trig_part) / den)
        .filter(|&k| k > 0.0 && k < m && single_bound_residual(k, cp, kind, m).abs() <= SINGLE_RESIDUAL_TOL)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * m);
    Ok(out)
}

// ----------------------------------------------------------- spectral functions

/// `F(κ) = e^{−4aκ} − 1 − κ(κ cos(q₁+q₂) ± √(m²−κ²) sin(q₁+q₂)) / (m² sin q₁ sin q₂)`,
/// `+` for electrons. `κ = m` is allowed and gives the zero-mode value
/// `e^{−4am} − cot q₁ cot q₂`.
pub fn electric_spectral_residual(kappa: f64, q1: f64, q2: f64, a: f64, m: f64, kind: ParticleKind) -> Result<f64> {
    check_kappa(kappa, m, true)?;
    let (s1, s2) = (q1.sin(), q2.sin());
    if (s1 * s2).abs() < 1e-12 {
        return Err(Error::Degenerate(format!(
            "sin q1 sin q2 = 0 at (q1, q2) = ({q1}, {q2}): one delta is transparent or acts alone"
        )));
    }
    Ok(electric_f(
        kappa,
        (q1 + q2).cos(),
        (q1 + q2).sin(),
        s1 * s2,
        a,
        m,
        kind.charge_sign(),
    ))
}

#[inline]
fn electric_f(kappa: f64, cos_sum: f64, sin_sum: f64, s12: f64, a: f64, m: f64, s: f64) -> f64 {
    let omega = ((m - kappa) * (m + kappa)).max(0.0).sqrt();
    (-4.0 * a * kappa).exp_m1() - kappa * (kappa * cos_sum + s * omega * sin_sum) / (m * m * s12)
}

/// `F(κ) = e^{−4aκ} − (m + sκ coth λ₁)(m + sκ coth λ₂)/(m² − κ²)`, `s = +1`
/// for electrons and `−1` for positrons, written so that `F(0) = 0` holds
/// without cancellation. Near the gap edge the last term behaves like
/// `m(1 + c₁)(1 + c₂)/(m − κ)` with `|cᵢ| = |coth λᵢ| > 1`, so `F` diverges
/// and there are no zero modes.
pub fn mass_spectral_residual(kappa: f64, l1: f64, l2: f64, a: f64, m: f64, kind: ParticleKind) -> Result<f64> {
    check_kappa(kappa, m, false)?;
    if l1 == 0.0 || l2 == 0.0 {
        return Err(Error::Degenerate(format!(
            "lambda = 0 at (l1, l2) = ({l1}, {l2}): coth pole, one delta is transparent"
        )));
    }
    let s = kind.charge_sign();
    Ok(mass_f(kappa, s / l1.tanh(), s / l2.tanh(), a, m))
}

#[inline]
fn mass_f(kappa: f64, c1: f64, c2: f64, a: f64, m: f64) -> f64 {
    (-4.0 * a * kappa).exp_m1() - kappa * (m * (c1 + c2) + kappa * (c1 * c2 + 1.0)) / ((m - kappa) * (m + kappa))
}

/// Bound-state condition for any configuration: with `M` the total transfer
/// matrix, a decaying left tail `γ⁰u` must be carried onto a multiple of the
/// decaying right tail `u`, i.e. `det[Mγ⁰u, u] = 0`. The determinant is
/// `i` times a real number at `k = iκ`; that number is returned, normalised
/// by `|Mγ⁰u||u|`. `κ = m` is allowed.
pub fn generic_spectral_residual(kappa: f64, cfg: &DeltaConfig, kind: ParticleKind) -> Result<f64> {
    let m = cfg.mass();
    check_kappa(kappa, m, true)?;
    let total = compose_transfer_k(cfg, Complex64::new(0.0, kappa), kind)?;
    let u = kind.plane_spinor(Momentum::General(Complex64::new(0.0, kappa)), m)?;
    let left = total * gamma0_times(&u);
    let det = left[0] * u[1] - left[1] * u[0];
    Ok(det.im / (left.norm() * u.norm()))
}

/// Which spectral function a configuration is scanned with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralEquation {
    Electric {
        q1: f64,
        q2: f64,
        a: f64,
    },
    Mass {
        l1: f64,
        l2: f64,
        a: f64,
    },
    /// Transfer-matrix determinant; used for mixed couplings and for
    /// degenerate electric (`sin qᵢ = 0`) or mass (`λᵢ = 0`) pairs.
    Generic,
}

impl SpectralEquation {
    pub fn for_config(cfg: &DeltaConfig) -> Self {
        let (Some(a), Some((c1, c2))) = (cfg.half_separation(), cfg.pair()) else {
            return SpectralEquation::Generic;
        };
        if cfg.is_pure_electric() && (c1.q.sin() * c2.q.sin()).abs() >= 1e-12 {
            SpectralEquation::Electric { q1: c1.q, q2: c2.q, a }
        } else if cfg.is_pure_mass() && c1.lambda != 0.0 && c2.lambda != 0.0 {
            SpectralEquation::Mass {
                l1: c1.lambda,
                l2: c2.lambda,
                a,
            }
        } else {
            SpectralEquation::Generic
        }
    }

    /// The spectral function itself, ready for scanning.
    pub fn evaluate(&self, kappa: f64, cfg: &DeltaConfig, kind: ParticleKind) -> Result<f64> {
        let m = cfg.mass();
        match *self {
            SpectralEquation::Electric { q1, q2, a } => electric_spectral_residual(kappa, q1, q2, a, m, kind),
            SpectralEquation::Mass { l1, l2, a } => mass_spectral_residual(kappa, l1, l2, a, m, kind),
            SpectralEquation::Generic => generic_spectral_residual(kappa, cfg, kind),
        }
    }

    /// Value at the gap edge `κ = m`, when finite.
    pub fn edge_value(&self, cfg: &DeltaConfig, kind: ParticleKind) -> Result<Option<f64>> {
        match self {
            SpectralEquation::Mass { .. } => Ok(None),
            _ => self.evaluate(cfg.mass(), cfg, kind).map(Some),
        }
    }
}

/// Scan `(εm, (1−ε)m)`, quadrupling the resolution while more than
/// [`MAX_DOUBLE_ROOTS`] roots show up.
fn scan_gap<F: Fn(f64) -> f64>(f: &F, m: f64) -> Result<ScanOutcome> {
    let (lo, hi) = (SCAN_EDGE * m, (1.0 - SCAN_EDGE) * m);
    let mut n = DEFAULT_SCAN_POINTS;
    loop {
        let out = scan_roots(f, lo, hi, n, ROOT_TOL * m, TOUCH_TOL);
        if out.roots.len() <= MAX_DOUBLE_ROOTS {
            return Ok(out);
        }
        if n >= MAX_SCAN_POINTS {
            return Err(Error::TooManyRoots {
                found: out.roots.len(),
                points: n,
                limit: MAX_DOUBLE_ROOTS,
            });
        }
        n *= 4;
    }
}

fn require_double(cfg: &DeltaConfig) -> Result<()> {
    if cfg.deltas().len() != 2 {
        return Err(Error::Domain(format!(
            "bound-state search needs a double delta, got {} deltas",
            cfg.deltas().len()
        )));
    }
    if !(cfg.mass() > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {}", cfg.mass())));
    }
    Ok(())
}

/// Roots of the spectral function in `(0, m)` plus the zero-mode flag.
fn gap_roots(cfg: &DeltaConfig, kind: ParticleKind) -> Result<(Vec<f64>, bool, SpectralEquation)> {
    require_double(cfg)?;
    let eq = SpectralEquation::for_config(cfg);
    let m = cfg.mass();
    // Evaluation errors cannot occur inside the open gap once the
    // configuration passed validation; NaN makes any that did visible.
    let f = |kappa: f64| eq.evaluate(kappa, cfg, kind).unwrap_or(f64::NAN);
    let scan = scan_gap(&f, m)?;
    let zero_mode = matches!(eq.edge_value(cfg, kind)?, Some(v) if v.abs() <= ZERO_MODE_TOL);
    let roots = scan
        .roots
        .into_iter()
        .filter(|&k| !(zero_mode && m - k <= 1e-6 * m))
        .collect();
    Ok((roots, zero_mode, eq))
}

/// Number of bound states of a double delta (zero modes excluded).
pub fn count_bound_states(cfg: &DeltaConfig, kind: ParticleKind) -> Result<usize> {
    gap_roots(cfg, kind).map(|(r, _, _)| r.len())
}

// ------------------------------------------------------------------ eigenstates

/// A normalisable bound state of a double delta.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub kind: ParticleKind,
    pub kappa: f64,
    pub omega: f64,
    /// `(A₁, B₂, C₂, D₃)` with `A₁ = 1`.
    pub coefficients: [Complex64; 4],
    /// `𝒩`, so that `𝒩² ∫ Ψ†Ψ dz = 1`.
    pub norm_const: f64,
    /// Spectral function at `kappa`.
    pub residual: f64,
    /// Relative mismatch of the matching equations at the right delta,
    /// which the coefficients are not fitted to.
    pub matching_residual: f64,
    spinor: Spinor,
    positions: (f64, f64),
}

impl BoundState {
    pub fn norm_sq(&self) -> f64 {
        self.norm_const * self.norm_const
    }

    /// Positions of the two deltas.
    pub fn positions(&self) -> (f64, f64) {
        self.positions
    }

    /// `Ψ(z)` with `A₁ = 1`, not normalised.
    pub fn raw_spinor_at(&self, z: f64) -> Spinor {
        let [a1, b2, c2, d3] = self.coefficients;
        let (z1, z2) = self.positions;
        let u = self.spinor;
        let g = gamma0_times(&u);
        let grow = (self.kappa * z).exp();
        let decay = (-self.kappa * z).exp();
        if z < z1 {
            g * (a1 * grow)
        } else if z <= z2 {
            g * (b2 * grow) + u * (c2 * decay)
        } else {
            u * (d3 * decay)
        }
    }

    /// Normalised `𝒩 Ψ(z)`.
    pub fn spinor_at(&self, z: f64) -> Spinor {
        self.raw_spinor_at(z) * c(self.norm_const)
    }
}

/// `∫ Ψ†Ψ dz` for the piecewise exponential spinor, in closed form.
fn norm_integral(kappa: f64, coeffs: &[Complex64; 4], u: &Spinor, z1: f64, z2: f64) -> f64 {
    let [a1, b2, c2, d3] = *coeffs;
    let uu = u.norm_squared();
    let cross = gamma0_times(u).dotc(u); // (γ⁰u)†u, real
    let two_k = 2.0 * kappa;
    let left = a1.norm_sqr() * uu * (two_k * z1).exp() / two_k;
    let right = d3.norm_sqr() * uu * (-two_k * z2).exp() / two_k;
    let mid = b2.norm_sqr() * uu * ((two_k * z2).exp() - (two_k * z1).exp()) / two_k
        + c2.norm_sqr() * uu * ((-two_k * z1).exp() - (-two_k * z2).exp()) / two_k
        + 2.0 * (b2.conj() * c2 * cross).re * (z2 - z1);
    left + mid + right
}

/// Coefficients for a root `kappa`: the left matching equations fix
/// `(B₂, C₂)` given `A₁ = 1`, the right ones fix `D₃` by projection.
fn reconstruct(cfg: &DeltaConfig, kind: ParticleKind, kappa: f64, residual: f64) -> Result<BoundState> {
    let m = cfg.mass();
    let [d1, d2] = cfg.deltas() else {
        unreachable!("checked by require_double")
    };
    let (z1, z2) = (d1.position, d2.position);
    let u = kind.plane_spinor(Momentum::bound(kappa), m)?;
    let g = gamma0_times(&u);
    let t1 = t_delta(d1.coupling, kind).0;
    let t2 = t_delta(d2.coupling, kind).0;

    let (g1, u1) = (g * c((kappa * z1).exp()), u * c((-kappa * z1).exp()));
    let sys = Matrix2::new(g1[0], u1[0], g1[1], u1[1]);
    let rhs = t1 * g1;
    let bc = sys.try_inverse().ok_or_else(|| Error::Singular {
        k: kappa,
        reason: "bound-state matching system is singular".into(),
    })? * rhs;
    let (b2, c2) = (bc[0], bc[1]);

    let inside = t2 * (g * (b2 * (kappa * z2).exp()) + u * (c2 * (-kappa * z2).exp()));
    let tail = u * c((-kappa * z2).exp());
    let d3 = tail.dotc(&inside) / tail.norm_squared();
    let matching_residual = (inside - tail * d3).norm() / inside.norm().max(f64::MIN_POSITIVE);

    let coefficients = [c(1.0), b2, c2, d3];
    let integral = norm_integral(kappa, &coefficients, &u, z1, z2);
    Ok(BoundState {
        kind,
        kappa,
        omega: ((m - kappa) * (m + kappa)).sqrt(),
        coefficients,
        norm_const: 1.0 / integral.sqrt(),
        residual,
        matching_residual,
        spinor: u,
        positions: (z1, z2),
    })
}

/// Result of a bound-state search.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpectrum {
    /// Normalisable states in decreasing `κ` (increasing `ω`).
    pub states: Vec<BoundState>,
    /// A solution sits at the gap edge `κ = m` (`ω = 0`).
    pub zero_mode: bool,
    pub equation: SpectralEquation,
}

/// All bound states of a double delta.
pub fn find_bound_states(cfg: &DeltaConfig, kind: ParticleKind) -> Result<BoundSpectrum> {
    let (roots, zero_mode, equation) = gap_roots(cfg, kind)?;
    let mut states = roots
        .into_iter()
        .map(|kappa| {
            let residual = equation.evaluate(kappa, cfg, kind)?;
            reconstruct(cfg, kind, kappa, residual)
        })
        .collect::<Result<Vec<_>>>()?;
    states.sort_by(|a, b| b.kappa.total_cmp(&a.kappa));
    Ok(BoundSpectrum {
        states,
        zero_mode,
        equation,
    })
}

// ----------------------------------------------------------------- region maps

/// Transcendental curves that organise the coupling planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// `cot q₁ + cot q₂ = −4/p`: electron count changes by one.
    TangencyElectron,
    /// `cot q₁ + cot q₂ = 4/p`.
    TangencyPositron,
    /// `e^{−4/p} = cot q₁ cot q₂`: a zero mode exists.
    ZeroMode,
    /// `coth λ₁ + coth λ₂ = −4/p`.
    HyperbolicElectron,
    /// `coth λ₁ + coth λ₂ = 4/p`.
    HyperbolicPositron,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::TangencyElectron => "tangency_electron",
            CurveKind::TangencyPositron => "tangency_positron",
            CurveKind::ZeroMode => "zero_mode",
            CurveKind::HyperbolicElectron => "hyperbolic_electron",
            CurveKind::HyperbolicPositron => "hyperbolic_positron",
        }
    }

    fn is_electric(self) -> bool {
        matches!(
            self,
            CurveKind::TangencyElectron | CurveKind::TangencyPositron | CurveKind::ZeroMode
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCurve {
    pub kind: CurveKind,
    /// `p⁻¹ = a·m`.
    pub p_inv: f64,
}

fn arccot(v: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 - v.atan()
}

impl BoundaryCurve {
    pub fn new(kind: CurveKind, p_inv: f64) -> Result<Self> {
        if !(p_inv > 0.0 && p_inv.is_finite()) {
            return Err(Error::Domain(format!("p_inv = a*m must be positive, got {p_inv}")));
        }
        Ok(Self { kind, p_inv })
    }

    /// Implicit function whose zero set is the curve.
    pub fn residual(&self, c1: f64, c2: f64) -> f64 {
        let four = 4.0 * self.p_inv;
        let cot = |q: f64| q.cos() / q.sin();
        let coth = |l: f64| 1.0 / l.tanh();
        match self.kind {
            CurveKind::TangencyElectron => cot(c1) + cot(c2) + four,
            CurveKind::TangencyPositron => cot(c1) + cot(c2) - four,
            CurveKind::ZeroMode => (-four).exp() - cot(c1) * cot(c2),
            CurveKind::HyperbolicElectron => coth(c1) + coth(c2) + four,
            CurveKind::HyperbolicPositron => coth(c1) + coth(c2) - four,
        }
    }

    /// The second coordinates on the curve above `c1`.
    pub fn solve_second(&self, c1: f64) -> Vec<f64> {
        let four = 4.0 * self.p_inv;
        match self.kind {
            CurveKind::TangencyElectron | CurveKind::TangencyPositron | CurveKind::ZeroMode => {
                if c1.sin().abs() < 1e-12 {
                    return Vec::new();
                }
                let cot1 = c1.cos() / c1.sin();
                let target = match self.kind {
                    CurveKind::TangencyElectron => -four - cot1,
                    CurveKind::TangencyPositron => four - cot1,
                    _ => (-four).exp() / cot1,
                };
                if !target.is_finite() {
                    return Vec::new();
                }
                vec![arccot(target)]
            }
            CurveKind::HyperbolicElectron | CurveKind::HyperbolicPositron => {
                if c1 == 0.0 {
                    return Vec::new();
                }
                let sign = if self.kind == CurveKind::HyperbolicElectron {
                    -1.0
                } else {
                    1.0
                };
                let target = sign * four - 1.0 / c1.tanh();
                if target.abs() <= 1.0 {
                    Vec::new()
                } else {
                    vec![(1.0 / target).atanh()]
                }
            }
        }
    }

    /// Points of the curve inside the square `[lo, hi]²`, sampled at
    /// `samples` uniformly spaced first coordinates. Electric curves are
    /// periodic in both couplings with period `π`.
    pub fn trace(&self, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let pi = std::f64::consts::PI;
        for i in 0..samples {
            let c1 = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
            for base in self.solve_second(c1) {
                if self.kind.is_electric() {
                    let mut c2 = base + ((lo - base) / pi).ceil() * pi;
                    while c2 <= hi {
                        pts.push((c1, c2));
                        c2 += pi;
                    }
                } else if (lo..=hi).contains(&base) {
                    pts.push((c1, base));
                }
            }
        }
        pts
    }
}

/// Coupling plane of a double delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plane {
    /// `(q₁, q₂) ∈ [0, 2π]²`, no mass spikes.
    Electric,
    /// `(λ₁, λ₂) ∈ [−L, L]²`, no electric couplings.
    Mass { half_width: f64 },
}

impl Plane {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Plane::Electric => (0.0, 2.0 * std::f64::consts::PI),
            Plane::Mass { half_width } => (-half_width, half_width),
        }
    }

    pub fn curves(&self, kind: ParticleKind) -> Vec<CurveKind> {
        match (self, kind) {
            (Plane::Electric, ParticleKind::Electron) => vec![CurveKind::TangencyElectron, CurveKind::ZeroMode],
            (Plane::Electric, ParticleKind::Positron) => vec![CurveKind::TangencyPositron, CurveKind::ZeroMode],
            (Plane::Mass { .. }, ParticleKind::Electron) => vec![CurveKind::HyperbolicElectron],
            (Plane::Mass { .. }, ParticleKind::Positron) => vec![CurveKind::HyperbolicPositron],
        }
    }
}

/// One grid cell, evaluated at its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCell {
    pub c1: f64,
    pub c2: f64,
    /// `None` marks a degenerate cell (`sin qᵢ = 0` or `λᵢ = 0`).
    pub count: Option<usize>,
    /// The zero-mode curve passes through the cell (electric plane only).
    pub zero_mode: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub plane: Plane,
    pub p_inv: f64,
    pub kind: ParticleKind,
    pub n: usize,
    /// Row-major: index `i·n + j` holds `(c1_i, c2_j)`.
    pub cells: Vec<MapCell>,
    pub overlays: Vec<(BoundaryCurve, Vec<(f64, f64)>)>,
}

impl RegionMap {
    pub fn cell(&self, i: usize, j: usize) -> &MapCell {
        &self.cells[i * self.n + j]
    }

    /// Cells with 0, 1 and 2 bound states; degenerate cells are skipped.
    pub fn histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for c in &self.cells {
            if let Some(k) = c.count {
                h[k.min(2)] += 1;
            }
        }
        h
    }

    pub fn degenerate_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.count.is_none()).count()
    }
}

/// Counts at the centre of each of the `n × n` cells of `plane`, with `m = 1`
/// and `a = p⁻¹`. Cells are independent and evaluated in parallel; the
/// result does not depend on the evaluation order.
pub fn count_map(plane: Plane, p_inv: f64, n: usize, kind: ParticleKind) -> Result<RegionMap> {
    if n < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 cells per side, got {n}")));
    }
    if let Plane::Mass { half_width } = plane {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!(
                "mass plane half-width must be positive, got {half_width}"
            )));
        }
    }
    let (lo, hi) = plane.bounds();
    let h = (hi - lo) / n as f64;
    let centre = |i: usize| lo + h * (i as f64 + 0.5);
    BoundaryCurve::new(CurveKind::ZeroMode, p_inv)?;
    let (m, a, s) = (1.0, p_inv, kind.charge_sign());

    let cells = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (c1, c2) = (centre(idx / n), centre(idx % n));
            let count = match plane {
                Plane::Electric => {
                    let s12 = c1.sin() * c2.sin();
                    if s12.abs() < 1e-12 {
                        None
                    } else {
                        let (cs, sn) = ((c1 + c2).cos(), (c1 + c2).sin());
                        let f = |k: f64| electric_f(k, cs, sn, s12, a, m, s);
                        let edge = f(m).abs() <= ZERO_MODE_TOL;
                        let scan = scan_gap(&f, m)?;
                        Some(scan.roots.iter().filter(|&&k| !(edge && m - k <= 1e-6 * m)).count())
                    }
                }
                Plane::Mass { .. } => {
                    if c1 == 0.0 || c2 == 0.0 {
                        None
                    } else {
                        let (k1, k2) = (s / c1.tanh(), s / c2.tanh());
                        Some(scan_gap(&|k| mass_f(k, k1, k2, a, m), m)?.roots.len())
                    }
                }
            };
            let zero_mode = matches!(plane, Plane::Electric) && {
                let g = |x: f64, y: f64| (-4.0 * p_inv).exp() * x.sin() * y.sin() - x.cos() * y.cos();
                let corners = [
                    g(c1 - h / 2.0, c2 - h / 2.0),
                    g(c1 - h / 2.0, c2 + h / 2.0),
                    g(c1 + h / 2.0, c2 - h / 2.0),
                    g(c1 + h / 2.0, c2 + h / 2.0),
                ];
                corners.iter().any(|v| *v <= 0.0) && corners.iter().any(|v| *v >= 0.0)
            };
            Ok(MapCell {
                c1,
                c2,
                count,
                zero_mode,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let overlays = plane
        .curves(kind)
        .into_iter()
        .map(|ck| {
            let curve = BoundaryCurve::new(ck, p_inv)?;
            Ok((curve, curve.trace(lo, hi, 4 * n)))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RegionMap {
        plane,
        p_inv,
        kind,
        n,
        cells,
        overlays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::scattering::{electric_denominator, mass_denominator, single_denominator};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    use ParticleKind::{Electron, Positron};

    fn electric(q1: f64, q2: f64, a: f64, m: f64) -> DeltaConfig {
        DeltaConfig::double(m, a, Coupling::electric(q1), Coupling::electric(q2)).unwrap()
    }

    fn mass(l1: f64, l2: f64, a: f64, m: f64) -> DeltaConfig {
        DeltaConfig::double(m, a, Coupling::mass(l1), Coupling::mass(l2)).unwrap()
    }

    /// Dense sign scan of the single-delta determinant, used as the reference.
    fn single_scan(cp: Coupling, kind: ParticleKind, m: f64) -> Vec<f64> {
        let f = |k: f64| single_bound_residual(k, cp, kind, m);
        scan_roots(&f, 1e-9 * m, (1.0 - 1e-9) * m, 8001, 1e-14 * m, 0.0).roots
    }

    #[test]
    fn single_delta_examples() {
        assert!(single_delta_kappas(Coupling::default(), Electron, 1.0)
            .unwrap()
            .is_empty());
        // an electric spike binds positrons for q = 1 and electrons for q = −1
        assert!(single_delta_kappas(Coupling::electric(1.0), Electron, 1.0)
            .unwrap()
            .is_empty());
        for (cp, kind) in [
            (Coupling::electric(1.0), Positron),
            (Coupling::electric(-1.0), Electron),
        ] {
            let k = single_delta_kappas(cp, kind, 1.0).unwrap();
            assert_eq!(k.len(), 1);
            assert!((k[0] - 1f64.sin()).abs() < 1e-12);
            assert!((k[0] - single_scan(cp, kind, 1.0)[0]).abs() < 1e-10);
        }
        // an attractive mass spike (λ < 0) binds electrons; the root is the
        // pole of σ on the imaginary axis
        assert!(single_delta_kappas(Coupling::mass(1.0), Electron, 1.0)
            .unwrap()
            .is_empty());
        let k = single_delta_kappas(Coupling::mass(-1.0), Electron, 1.0).unwrap();
        assert_eq!(k.len(), 1);
        assert!((k[0] - 1f64.tanh()).abs() < 1e-12);
        let pole = single_denominator(Coupling::mass(-1.0), 1.0, Complex64::new(0.0, k[0]), Electron);
        assert!(pole.relative() < 1e-14);
    }

    proptest! {
        #[test]
        fn single_closed_form_matches_scan(q in -6.0f64..6.0, l in -6.0f64..6.0, m in 0.2f64..3.0, electron in any::<bool>()) {
            let kind = if electron { Electron } else { Positron };
            let cp = Coupling::new(q, l);
            let closed = single_delta_kappas(cp, kind, m).unwrap();
            let scan = single_scan(cp, kind, m);
            prop_assert_eq!(closed.len(), scan.len(), "closed {:?} scan {:?}", closed, scan);
            for (x, y) in closed.iter().zip(scan.iter().rev()) {
                prop_assert!((x - y).abs() <= 1e-9 * m);
            }
        }
    }

    #[test]
    fn ground_and_excited_states_of_the_reference_pair() {
        let spec = find_bound_states(&electric(2.0, 2.5, 1.0, 1.5), Electron).unwrap();
        assert_eq!(
            spec.equation,
            SpectralEquation::Electric {
                q1: 2.0,
                q2: 2.5,
                a: 1.0
            }
        );
        assert!(!spec.zero_mode);
        let [g, e] = spec.states.as_slice() else {
            panic!("expected two states, got {:?}", spec.states)
        };
        let expect = [
            (g, 1.3669, 0.6177, [-0.0052, -0.0648, 0.1222], 14.587),
            (e, 0.8552, 1.2323, [0.8941, -0.2883, -4.7115], 0.2086),
        ];
        for (s, kappa, omega, coeffs, n2) in expect {
            assert!((s.kappa - kappa).abs() < 5e-5);
            assert!((s.omega - omega).abs() < 5e-5);
            for (got, want) in s.coefficients[1..].iter().zip(coeffs) {
                assert!((got.re - want).abs() < 5e-5 && got.im.abs() < 1e-12, "{got} vs {want}");
            }
            assert!((s.norm_sq() - n2).abs() < 5e-4 * n2, "{}", s.norm_sq());
            assert!(s.matching_residual < 1e-10);
        }
    }

    #[test]
    fn empty_for_free_pair() {
        let cfg = DeltaConfig::double(1.0, 1.0, Coupling::default(), Coupling::default()).unwrap();
        assert!(find_bound_states(&cfg, Electron).unwrap().states.is_empty());
        assert_eq!(SpectralEquation::for_config(&cfg), SpectralEquation::Generic);
    }

    #[test]
    fn attractive_mass_pair_binds_twice() {
        let spec = find_bound_states(&mass(-1.0, -1.0, 1.0, 1.0), Electron).unwrap();
        assert_eq!(spec.states.len(), 2);
        let coth = 1.0 / (-1.0f64).tanh();
        assert!(2.0 * coth + 4.0 > 0.0, "below the lower branch");
    }

    fn reference_configs() -> Vec<(DeltaConfig, ParticleKind)> {
        vec![
            (electric(2.0, 2.5, 1.0, 1.5), Electron),
            (electric(-2.0, -2.5, 1.0, 1.5), Positron),
            (electric(2.8, 1.9, 0.4, 1.2), Electron),
            (mass(-1.0, -0.7, 1.0, 1.0), Electron),
            (mass(0.9, 2.0, 0.6, 1.4), Positron),
            (
                DeltaConfig::double(1.0, 0.8, Coupling::new(2.2, -0.3), Coupling::new(1.7, 0.4)).unwrap(),
                Electron,
            ),
            (
                DeltaConfig::double(1.3, 0.5, Coupling::new(-1.0, 0.6), Coupling::new(0.0, 0.9)).unwrap(),
                Positron,
            ),
        ]
    }

    #[test]
    fn states_satisfy_their_invariants() {
        for (cfg, kind) in reference_configs() {
            let m = cfg.mass();
            let spec = find_bound_states(&cfg, kind).unwrap();
            assert!(!spec.states.is_empty(), "{cfg:?}");
            for w in spec.states.windows(2) {
                assert!(w[0].kappa > w[1].kappa && w[0].omega < w[1].omega);
            }
            for s in &spec.states {
                assert!((s.omega * s.omega + s.kappa * s.kappa - m * m).abs() <= 1e-10);
                assert!(s.residual.abs() <= 1e-10, "{cfg:?} {kind} {} {}", s.kappa, s.residual);
                assert!(s.matching_residual <= 1e-9, "{}", s.matching_residual);
                assert!(generic_spectral_residual(s.kappa, &cfg, kind).unwrap().abs() <= 1e-9);

                // quadrature oracle for the closed-form normalisation
                let (z1, z2) = s.positions();
                let dens = |z: f64| s.spinor_at(z).norm_squared();
                let tail = 40.0 / s.kappa;
                let tol = (1e-14, 1e-13, 2000);
                let total = integrate(dens, z1 - tail, z1, tol.0, tol.1, tol.2).unwrap().value
                    + integrate(dens, z1, z2, tol.0, tol.1, tol.2).unwrap().value
                    + integrate(dens, z2, z2 + tail, tol.0, tol.1, tol.2).unwrap().value;
                assert!((total - 1.0).abs() <= 1e-10, "{total}");
            }
        }
    }

    #[test]
    fn generic_equation_agrees_with_reduced_forms() {
        for (cfg, kind) in reference_configs() {
            let eq = SpectralEquation::for_config(&cfg);
            if eq == SpectralEquation::Generic {
                continue;
            }
            let m = cfg.mass();
            let reduced = scan_gap(&|k| eq.evaluate(k, &cfg, kind).unwrap(), m).unwrap().roots;
            let generic = scan_gap(&|k| generic_spectral_residual(k, &cfg, kind).unwrap(), m)
                .unwrap()
                .roots;
            assert_eq!(reduced.len(), generic.len());
            for (x, y) in reduced.iter().zip(&generic) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn roots_are_poles_of_the_transmission() {
        for (cfg, kind) in reference_configs() {
            let (c1, c2) = cfg.pair().unwrap();
            let (a, m) = (cfg.half_separation().unwrap(), cfg.mass());
            for s in find_bound_states(&cfg, kind).unwrap().states {
                let k = Complex64::new(0.0, s.kappa);
                let den = match SpectralEquation::for_config(&cfg) {
                    SpectralEquation::Electric { .. } => electric_denominator(c1.q, c2.q, a, m, k, kind),
                    SpectralEquation::Mass { .. } => mass_denominator(c1.lambda, c2.lambda, a, m, k, kind),
                    SpectralEquation::Generic => continue,
                };
                assert!(den.relative() <= 1e-8, "{}", den.relative());
            }
        }
    }

    #[test]
    fn doubling_resolution_keeps_counts() {
        for (cfg, kind) in reference_configs() {
            let eq = SpectralEquation::for_config(&cfg);
            let m = cfg.mass();
            let f = |k: f64| eq.evaluate(k, &cfg, kind).unwrap();
            let base = scan_roots(
                &f,
                SCAN_EDGE * m,
                (1.0 - SCAN_EDGE) * m,
                DEFAULT_SCAN_POINTS,
                ROOT_TOL * m,
                TOUCH_TOL,
            );
            let fine = scan_roots(
                &f,
                SCAN_EDGE * m,
                (1.0 - SCAN_EDGE) * m,
                2 * DEFAULT_SCAN_POINTS,
                ROOT_TOL * m,
                TOUCH_TOL,
            );
            assert_eq!(base.roots.len(), fine.roots.len());
        }
    }

    #[test]
    fn electric_residual_examples() {
        let f = |k| electric_spectral_residual(k, 2.0, 2.5, 1.0, 1.5, Electron).unwrap();
        assert!(f(1.3669).abs() <= 1e-3 && f(0.8552).abs() <= 1e-3);
        // direct evaluation at q₁ = q₂ = π/2: cos π = −1, sin π ≈ 0
        let v = electric_spectral_residual(0.5, FRAC_PI_2, FRAC_PI_2, 1.0, 1.0, Electron).unwrap();
        let expect = (-2.0f64).exp() - 1.0 - 0.5 * (0.5 * PI.cos() + 0.75f64.sqrt() * PI.sin());
        assert!((v - expect).abs() < 1e-15);
        assert!(matches!(
            electric_spectral_residual(0.5, PI, 1.0, 1.0, 1.0, Electron),
            Err(Error::Degenerate(_))
        ));
        assert!(electric_spectral_residual(1.5, 1.0, 1.0, 1.0, 1.0, Electron).is_err());
    }

    #[test]
    fn zero_mode_locus() {
        let (a, m) = (1.0, 1.2);
        let curve = BoundaryCurve::new(CurveKind::ZeroMode, a * m).unwrap();
        for (q1, q2) in curve.trace(0.3, PI - 0.3, 20) {
            assert!(curve.residual(q1, q2).abs() < 1e-12);
            for kind in ParticleKind::ALL {
                let v = electric_spectral_residual(m, q1, q2, a, m, kind).unwrap();
                assert!(v.abs() <= 1e-10, "{v}");
                assert!(find_bound_states(&electric(q1, q2, a, m), kind).unwrap().zero_mode);
            }
        }
    }

    #[test]
    fn mass_residual_properties() {
        // tangency at κ = 0: F'(0) = −4a − (coth λ₁ + coth λ₂)/m vanishes on the hyperbola
        let (a, m) = (0.7, 1.3);
        for kind in ParticleKind::ALL {
            let curve_kind = if kind == Electron {
                CurveKind::HyperbolicElectron
            } else {
                CurveKind::HyperbolicPositron
            };
            let curve = BoundaryCurve::new(curve_kind, a * m).unwrap();
            let s = kind.charge_sign();
            for (l1, l2) in curve.trace(-3.0, 3.0, 50) {
                let h = 1e-8;
                let slope = mass_spectral_residual(h, l1, l2, a, m, kind).unwrap() / h;
                assert!(slope.abs() < 1e-5, "{slope}");
                assert!(((1.0 / l1.tanh() + 1.0 / l2.tanh()) + s * 4.0 * a * m).abs() < 1e-9);
            }
            // no zero modes: F diverges at the gap edge
            for (l1, l2) in [(0.3, -0.8), (0.3, 0.8), (-0.3, -0.8)] {
                let near = mass_spectral_residual(m * (1.0 - 1e-12), l1, l2, a, m, kind).unwrap();
                assert!(near.abs() > 1e6);
            }
        }
        assert!(matches!(
            mass_spectral_residual(0.5, 0.0, 1.0, 1.0, 1.0, Electron),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn boundary_curve_examples() {
        let p_inv = 1.2;
        let c = BoundaryCurve::new(CurveKind::TangencyElectron, p_inv).unwrap();
        let q = arccot(-2.0 * p_inv);
        assert!(c.residual(q, q).abs() < 1e-12);
        assert!(BoundaryCurve::new(CurveKind::ZeroMode, 0.0).is_err());
    }

    #[test]
    fn counts_change_by_one_across_tangency() {
        let (a, m) = (1.0, 1.2);
        for kind in ParticleKind::ALL {
            let ck = if kind == Electron {
                CurveKind::TangencyElectron
            } else {
                CurveKind::TangencyPositron
            };
            let curve = BoundaryCurve::new(ck, a * m).unwrap();
            for (q1, q2) in curve.trace(0.0, 2.0 * PI, 60) {
                if q1.sin().abs() < 0.05 || q2.sin().abs() < 0.05 {
                    continue;
                }
                let g = [-1.0 / q1.sin().powi(2), -1.0 / q2.sin().powi(2)];
                let norm = g[0].hypot(g[1]);
                let d = 1e-2;
                let plus = electric(q1 + d * g[0] / norm, q2 + d * g[1] / norm, a, m);
                let minus = electric(q1 - d * g[0] / norm, q2 - d * g[1] / norm, a, m);
                let (np, nm) = (
                    count_bound_states(&plus, kind).unwrap(),
                    count_bound_states(&minus, kind).unwrap(),
                );
                assert_eq!(np.abs_diff(nm), 1, "{kind} at ({q1}, {q2}): {np} vs {nm}");
            }
        }
    }

    /// `#{λᵢ on the binding side} − [on the far side of the hyperbola]`.
    fn mass_count_rule(l1: f64, l2: f64, p_inv: f64, kind: ParticleKind) -> usize {
        let s = kind.charge_sign();
        let binding = [l1, l2].iter().filter(|&&l| s * l < 0.0).count();
        let g = s * (1.0 / l1.tanh() + 1.0 / l2.tanh()) + 4.0 * p_inv;
        binding - usize::from(g < 0.0)
    }

    #[test]
    fn mass_plane_follows_hyperbola_branches() {
        let map = count_map(Plane::Mass { half_width: 3.0 }, 1.0, 40, Electron).unwrap();
        for cell in &map.cells {
            assert_eq!(
                cell.count,
                Some(mass_count_rule(cell.c1, cell.c2, 1.0, Electron)),
                "{cell:?}"
            );
        }
        let h = map.histogram();
        assert!(h.iter().all(|&n| n > 0));
        // along the diagonal: 2 below −arccoth 2, 1 up to the origin, 0 above
        let v = 0.5f64.atanh();
        for (l, want) in [(-v - 0.05, 2), (-v + 0.05, 1), (-0.05, 1), (0.05, 0)] {
            assert_eq!(
                count_bound_states(&mass(l, l, 1.0, 1.0), Electron).unwrap(),
                want,
                "{l}"
            );
            assert_eq!(
                count_bound_states(&mass(-l, -l, 1.0, 1.0), Positron).unwrap(),
                want,
                "{l}"
            );
        }
    }

    #[test]
    fn positron_map_mirrors_electron_map() {
        let n = 50;
        let e = count_map(Plane::Electric, 1.2, n, Electron).unwrap();
        let p = count_map(Plane::Electric, 1.2, n, Positron).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(e.cell(i, j).count, p.cell(n - 1 - i, n - 1 - j).count);
            }
        }
        assert!(e.cells.iter().all(|c| c.count.is_some_and(|k| k <= 2)));
        assert_eq!(e.degenerate_cells(), 0);
        assert!(e.cells.iter().any(|c| c.zero_mode));
    }

    #[test]
    fn map_is_deterministic() {
        let a = count_map(Plane::Electric, 0.8, 24, Positron).unwrap();
        let b = count_map(Plane::Electric, 0.8, 24, Positron).unwrap();
        assert_eq!(a, b);
    }
}
