//! Model description: end scaling `k`, cross-section spectrum, perturbation
//! coefficients with their decay classes, and the smooth cutoffs used by the
//! spectral and scattering constructions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius below which `k` is frozen when assembled on a grid.
pub const R_CLIP: f64 = 0.25;

fn mollifier(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn mollifier_prime(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// Smooth step on [0, 1]: 0 for t <= 0, 1 for t >= 1, C^infinity in between.
/// Satisfies `smooth_step(t) + smooth_step(1 - t) == 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = mollifier(t);
    let b = mollifier(1.0 - t);
    a / (a + b)
}

pub fn smooth_step_prime(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = mollifier(t);
    let b = mollifier(1.0 - t);
    let da = mollifier_prime(t);
    let db = -mollifier_prime(1.0 - t);
    (da * b - a * db) / ((a + b) * (a + b))
}

/// chi(r): 0 for r <= 1/2, 1 for r >= 1.
pub fn chi(r: f64) -> f64 {
    smooth_step(2.0 * r - 1.0)
}

pub fn chi_prime(r: f64) -> f64 {
    2.0 * smooth_step_prime(2.0 * r - 1.0)
}

/// Japanese bracket (1 + r^2)^(1/2).
pub fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

#[derive(Clone)]
pub enum ScalingKind {
    Power { alpha: f64 },
    Constant { value: f64 },
    /// User-supplied profile with analytic derivatives.
    Custom {
        k: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        dk: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        d2k: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ScalingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingKind::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            ScalingKind::Constant { value } => write!(f, "Constant {{ value: {value} }}"),
            ScalingKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// End-scaling profile k(r) together with the constants bounding its
/// logarithmic derivatives.
#[derive(Clone, Debug)]
pub struct ScalingFunction {
    pub kind: ScalingKind,
    pub c0_bound: f64,
    pub c_bound: f64,
}

impl ScalingFunction {
    /// k(r) = r^(-alpha).
    pub fn power(alpha: f64) -> Self {
        ScalingFunction {
            kind: ScalingKind::Power { alpha },
            c0_bound: alpha,
            c_bound: alpha.max(alpha * (alpha + 1.0)),
        }
    }

    pub fn constant(value: f64) -> Self {
        ScalingFunction {
            kind: ScalingKind::Constant { value },
            c0_bound: 0.0,
            c_bound: 0.0,
        }
    }

    pub fn custom<K, D, D2>(k: K, dk: D, d2k: D2, c0_bound: f64, c_bound: f64) -> Self
    where
        K: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalingFunction {
            kind: ScalingKind::Custom {
                k: Arc::new(k),
                dk: Arc::new(dk),
                d2k: Arc::new(d2k),
            },
            c0_bound,
            c_bound,
        }
    }

    pub fn k(&self, r: f64) -> f64 {
        match &self.kind {
            ScalingKind::Power { alpha } => r.powf(-alpha),
            ScalingKind::Constant { value } => *value,
            ScalingKind::Custom { k, .. } => k(r),
        }
    }

    pub fn dk(&self, r: f64) -> f64 {
        match &self.kind {
            ScalingKind::Power { alpha } => -alpha * r.powf(-alpha - 1.0),
            ScalingKind::Constant { .. } => 0.0,
            ScalingKind::Custom { dk, .. } => dk(r),
        }
    }

    pub fn d2k(&self, r: f64) -> f64 {
        match &self.kind {
            ScalingKind::Power { alpha } => alpha * (alpha + 1.0) * r.powf(-alpha - 2.0),
            ScalingKind::Constant { .. } => 0.0,
            ScalingKind::Custom { d2k, .. } => d2k(r),
        }
    }

    /// k(max(|r|, R_CLIP)): the profile used on grids that reach r = 0, and
    /// its even extension to the full line.
    pub fn k_clipped(&self, r: f64) -> f64 {
        self.k(r.abs().max(R_CLIP))
    }

    /// Derivative of the clipped even extension (zero inside the clip).
    pub fn dk_clipped(&self, r: f64) -> f64 {
        if r.abs() <= R_CLIP {
            0.0
        } else {
            r.signum() * self.dk(r.abs())
        }
    }

    /// Decay index nu_k with k(r) ~ r^(-nu_k), when it is known in closed form.
    pub fn decay_index(&self) -> Option<f64> {
        match &self.kind {
            ScalingKind::Power { alpha } => Some(*alpha),
            ScalingKind::Constant { .. } => Some(0.0),
            ScalingKind::Custom { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub c0_hat: f64,
    pub c_hat: f64,
    pub c2_hat: f64,
}

/// Empirical constants of the scaling conditions by dense log-spaced sampling
/// on [r_lo, r_hi].
pub fn validate_scaling(
    k: &ScalingFunction,
    r_lo: f64,
    r_hi: f64,
    n_samples: usize,
) -> Result<ScalingConstants> {
    if !(r_lo >= 1.0) || !(r_hi > r_lo) || n_samples < 100 {
        return Err(Error::InvalidModel(format!(
            "sampling range [{r_lo}, {r_hi}] with {n_samples} samples"
        )));
    }
    let mut c0 = f64::INFINITY;
    let mut c1 = f64::NEG_INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    let step = (r_hi / r_lo).ln() / (n_samples - 1) as f64;
    for i in 0..n_samples {
        let r = r_lo * (step * i as f64).exp();
        let kv = k.k(r);
        if !(kv > 0.0) {
            return Err(Error::NonPositiveK { r, k: kv });
        }
        let dk = k.dk(r);
        if dk > 0.0 || !dk.is_finite() {
            return Err(Error::ViolatedBound { r, ratio: -r * dk / kv });
        }
        let ratio = -r * dk / kv;
        c0 = c0.min(ratio);
        c1 = c1.max(ratio);
        c2 = c2.max(r * r * k.d2k(r).abs() / kv);
    }
    if !(c0 > 0.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::ViolatedBound { r: r_lo, ratio: c0 });
    }
    Ok(ScalingConstants { c0_hat: c0, c_hat: c1, c2_hat: c2 })
}

/// Names of the perturbation coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffName {
    #[serde(rename = "a1L")]
    A1L,
    #[serde(rename = "a1S")]
    A1S,
    #[serde(rename = "a2")]
    A2,
    #[serde(rename = "a3")]
    A3,
    #[serde(rename = "b1")]
    B1,
    #[serde(rename = "b2")]
    B2,
    V,
}

impl CoeffName {
    pub const ALL: [CoeffName; 7] = [
        CoeffName::A1L,
        CoeffName::A1S,
        CoeffName::A2,
        CoeffName::A3,
        CoeffName::B1,
        CoeffName::B2,
        CoeffName::V,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CoeffName::A1L => "a1L",
            CoeffName::A1S => "a1S",
            CoeffName::A2 => "a2",
            CoeffName::A3 => "a3",
            CoeffName::B1 => "b1",
            CoeffName::B2 => "b2",
            CoeffName::V => "V",
        }
    }
}

/// Finite Fourier series in theta, stored as complex coefficients
/// f(theta) = sum_p c_p e^{i p theta}.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSeries {
    coeffs: Vec<(i64, Complex64)>,
}

impl ThetaSeries {
    /// Constant function 1.
    pub fn constant() -> Self {
        ThetaSeries { coeffs: vec![(0, Complex64::new(1.0, 0.0))] }
    }

    /// Real series from cosine/sine amplitudes: each entry (p, a, b) adds
    /// a cos(p theta) + b sin(p theta).
    pub fn real(terms: &[(i64, f64, f64)]) -> Self {
        let mut s = ThetaSeries { coeffs: Vec::new() };
        for &(p, a, b) in terms {
            let p = p.abs();
            let sign = if p == 0 { 0.0 } else { 1.0 };
            if p == 0 {
                s.add(0, Complex64::new(a, 0.0));
            } else {
                s.add(p, Complex64::new(0.5 * a, -0.5 * b * sign));
                s.add(-p, Complex64::new(0.5 * a, 0.5 * b * sign));
            }
        }
        s
    }

    /// Raw complex coefficients; the caller is responsible for Hermitian symmetry.
    pub fn from_complex(terms: &[(i64, Complex64)]) -> Self {
        let mut s = ThetaSeries { coeffs: Vec::new() };
        for &(p, c) in terms {
            s.add(p, c);
        }
        s
    }

    fn add(&mut self, p: i64, c: Complex64) {
        match self.coeffs.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => *v += c,
            None => {
                self.coeffs.push((p, c));
                self.coeffs.sort_by_key(|(q, _)| *q);
            }
        }
    }

    pub fn coeff(&self, p: i64) -> Complex64 {
        self.coeffs
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.coeffs
    }

    pub fn max_mode(&self) -> i64 {
        self.coeffs.iter().map(|(p, _)| p.abs()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|(p, c)| *p == 0 || c.norm() == 0.0)
    }

    pub fn is_hermitian(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(p, c)| (self.coeff(-p) - c.conj()).norm() <= 1e-14 * (1.0 + c.norm()))
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(p, c)| c * Complex64::from_polar(1.0, *p as f64 * theta))
            .sum()
    }
}

/// One coefficient c * chi(r) * <r>^(-nu) * f(theta).
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub name: CoeffName,
    pub c: f64,
    pub nu: f64,
    pub theta: ThetaSeries,
}

impl Coefficient {
    pub fn radial(name: CoeffName, c: f64, nu: f64) -> Self {
        Coefficient { name, c, nu, theta: ThetaSeries::constant() }
    }

    pub fn profile(&self, r: f64) -> f64 {
        let r = r.abs();
        self.c * chi(r) * bracket(r).powf(-self.nu)
    }

    pub fn profile_prime(&self, r: f64) -> f64 {
        let s = r.signum();
        let r = r.abs();
        let b = bracket(r);
        let d = chi_prime(r) * b.powf(-self.nu) - self.nu * chi(r) * r * b.powf(-self.nu - 2.0);
        s * self.c * d
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0 || self.theta.terms().iter().all(|(_, v)| v.norm() == 0.0)
    }
}

/// Perturbation E as a list of preset coefficients. Absent names are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PerturbationCoeffs {
    pub coeffs: Vec<Coefficient>,
}

impl PerturbationCoeffs {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with(mut self, c: Coefficient) -> Self {
        self.coeffs.push(c);
        self
    }

    pub fn get(&self, name: CoeffName) -> impl Iterator<Item = &Coefficient> {
        self.coeffs.iter().filter(move |c| c.name == name && !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_theta_independent(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero() || c.theta.is_constant())
    }

    /// Sum of the radial profiles of the long-range part a1L (theta independent).
    pub fn a1l_profile(&self, r: f64) -> f64 {
        self.get(CoeffName::A1L).map(|c| c.profile(r) * c.theta.coeff(0).re).sum()
    }

    pub fn a1l_profile_prime(&self, r: f64) -> f64 {
        self.get(CoeffName::A1L).map(|c| c.profile_prime(r) * c.theta.coeff(0).re).sum()
    }

    pub fn has_a1l(&self) -> bool {
        self.get(CoeffName::A1L).next().is_some()
    }

    /// Decay indices of the present coefficients; absent coefficients are
    /// identically zero and get an infinite index.
    pub fn decay_class(&self, k: &ScalingFunction) -> DecayClass {
        let idx = |name: CoeffName| -> Option<f64> {
            Some(self.get(name).map(|c| c.nu).fold(f64::INFINITY, f64::min))
        };
        DecayClass {
            nu_a1l: idx(CoeffName::A1L),
            nu_a1s: idx(CoeffName::A1S),
            nu_a2: idx(CoeffName::A2),
            nu_a3: idx(CoeffName::A3),
            nu_b1: idx(CoeffName::B1),
            nu_b2: idx(CoeffName::B2),
            nu_v: idx(CoeffName::V),
            nu_k: k.decay_index(),
            a1l_present: self.has_a1l(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ShortRange,
    LongRangeK,
    LongRangeA1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayClass {
    pub nu_a1l: Option<f64>,
    pub nu_a1s: Option<f64>,
    pub nu_a2: Option<f64>,
    pub nu_a3: Option<f64>,
    pub nu_b1: Option<f64>,
    pub nu_b2: Option<f64>,
    pub nu_v: Option<f64>,
    pub nu_k: Option<f64>,
    pub a1l_present: bool,
}

impl DecayClass {
    fn require(v: Option<f64>, name: &'static str) -> Result<f64> {
        match v {
            Some(x) if !x.is_nan() => Ok(x),
            _ => Err(Error::IncompleteSpec(name)),
        }
    }

    pub fn classify(&self) -> Result<Classification> {
        let a1l = Self::require(self.nu_a1l, "nu_a1L")?;
        let a1s = Self::require(self.nu_a1s, "nu_a1S")?;
        let a2 = Self::require(self.nu_a2, "nu_a2")?;
        let a3 = Self::require(self.nu_a3, "nu_a3")?;
        let b1 = Self::require(self.nu_b1, "nu_b1")?;
        let b2 = Self::require(self.nu_b2, "nu_b2")?;
        let v = Self::require(self.nu_v, "nu_V")?;
        let nk = Self::require(self.nu_k, "nu_k")?;
        let others = [a1s, a2, b1, b2, v];
        if others.iter().any(|&x| x <= 1.0) || a3 < 1.0 {
            return Err(Error::NotScatteringClass(format!(
                "short-range part decays too slowly (a1S {a1s}, a2 {a2}, a3 {a3}, b1 {b1}, b2 {b2}, V {v})"
            )));
        }
        if !(nk > 0.0) {
            return Err(Error::NotScatteringClass(format!("nu_k = {nk} is not positive")));
        }
        if self.a1l_present {
            if !(a1l > 0.0) {
                return Err(Error::NotScatteringClass(format!("nu_a1L = {a1l}")));
            }
            return Ok(Classification::LongRangeA1);
        }
        if nk > 1.0 {
            Ok(Classification::ShortRange)
        } else {
            Ok(Classification::LongRangeK)
        }
    }

    /// Decay index driving the phase construction: the weaker of nu_k and nu_a1L.
    pub fn phase_nu(&self) -> Option<f64> {
        let nk = self.nu_k?;
        if self.a1l_present {
            Some(nk.min(self.nu_a1l?))
        } else {
            Some(nk)
        }
    }
}

pub fn classify_perturbation(
    coeffs: &PerturbationCoeffs,
    k: &ScalingFunction,
) -> Result<Classification> {
    coeffs.decay_class(k).classify()
}

/// Unit circle cross-section truncated to modes |m| <= M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSection {
    pub mode_cutoff: usize,
}

impl CrossSection {
    pub fn new(mode_cutoff: usize) -> Self {
        CrossSection { mode_cutoff }
    }

    pub fn n_modes(&self) -> usize {
        2 * self.mode_cutoff + 1
    }

    /// Mode number of column index j in [0, 2M].
    pub fn mode(&self, j: usize) -> i64 {
        j as i64 - self.mode_cutoff as i64
    }

    pub fn index(&self, m: i64) -> Option<usize> {
        let j = m + self.mode_cutoff as i64;
        if j >= 0 && (j as usize) < self.n_modes() {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Eigenvalue of P on mode m.
    pub fn eigenvalue(&self, m: i64) -> f64 {
        (m * m) as f64
    }
}

/// Distinct eigenvalues of P with their multiplicities.
pub fn channel_eigenvalues(cs: &CrossSection) -> Vec<(f64, usize)> {
    (0..=cs.mode_cutoff)
        .map(|m| ((m * m) as f64, if m == 0 { 1 } else { 2 }))
        .collect()
}

/// Smooth bump: 1 on [lo, hi], 0 outside [lo - width, hi + width].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64, width: f64) -> Self {
        Bump { lo, hi, width }
    }

    pub fn eval(&self, x: f64) -> f64 {
        smooth_step((x - self.lo + self.width) / self.width)
            * smooth_step((self.hi + self.width - x) / self.width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo - self.width, self.hi + self.width)
    }
}

/// Energy window Lambda with the eigenvalues found inside it by a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub excluded: Vec<f64>,
}

impl SpectralWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        SpectralWindow { lo, hi, excluded: Vec::new() }
    }

    pub fn centered(lambda0: f64, eps: f64) -> Self {
        Self::new(lambda0 - eps, lambda0 + eps)
    }

    pub fn require_positive(&self) -> Result<()> {
        if !(self.lo > 0.0) || !(self.hi > self.lo) {
            return Err(Error::WindowTouchesThreshold { lo: self.lo, hi: self.hi });
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Momentum interval |rho| in [sqrt(lo), sqrt(hi)].
    pub fn momenta(&self) -> (f64, f64) {
        (self.lo.max(0.0).sqrt(), self.hi.max(0.0).sqrt())
    }
}

/// Cutoff radius R with the derived chi_R and eta, and the energy bump psi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    pub r: f64,
    pub psi: Bump,
}

impl CutoffSpec {
    pub fn new(r: f64, psi: Bump) -> Self {
        CutoffSpec { r, psi }
    }

    pub fn chi_r(&self, x: f64) -> f64 {
        chi(x / self.r)
    }

    /// eta(r) = chi(|r| / (2R)): vanishes for |r| <= R, equals 1 for |r| >= 2R.
    pub fn eta(&self, x: f64) -> f64 {
        chi(x.abs() / (2.0 * self.r))
    }

    pub fn eta_prime(&self, x: f64) -> f64 {
        x.signum() * chi_prime(x.abs() / (2.0 * self.r)) / (2.0 * self.r)
    }

    pub fn psi(&self, energy: f64) -> f64 {
        self.psi.eval(energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_plateaus() {
        assert_eq!(chi(0.5), 0.0);
        assert_eq!(chi(0.2), 0.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(7.0), 1.0);
        assert!((chi(0.75) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=200 {
            let v = chi(0.5 + 0.5 * i as f64 / 200.0);
            assert!(v >= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn chi_prime_matches_difference() {
        for &r in &[0.55, 0.7, 0.8, 0.95] {
            let h = 1e-6;
            let fd = (chi(r + h) - chi(r - h)) / (2.0 * h);
            assert!((fd - chi_prime(r)).abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn power_scaling_constants() {
        let c = validate_scaling(&ScalingFunction::power(1.0), 1.0, 100.0, 1000).unwrap();
        assert!((c.c0_hat - 1.0).abs() < 1e-9);
        assert!((c.c_hat - 1.0).abs() < 1e-9);
        assert!((c.c2_hat - 2.0).abs() < 1e-9);
        let c = validate_scaling(&ScalingFunction::power(2.0), 1.0, 100.0, 1000).unwrap();
        assert!((c.c0_hat - 2.0).abs() < 1e-9);
        assert!((c.c2_hat - 6.0).abs() < 1e-9);
    }

    #[test]
    fn constant_k_violates() {
        let e = validate_scaling(&ScalingFunction::constant(1.0), 1.0, 100.0, 1000).unwrap_err();
        assert_eq!(e.code(), "model_core.ViolatedBound");
    }

    #[test]
    fn nonpositive_k() {
        let k = ScalingFunction::custom(|r| 1.0 - r, |_| -1.0, |_| 0.0, 0.0, 0.0);
        let e = validate_scaling(&k, 1.0, 10.0, 100).unwrap_err();
        assert_eq!(e.code(), "model_core.NonPositiveK");
    }

    #[test]
    fn increasing_k_violates() {
        let k = ScalingFunction::custom(|r| r, |_| 1.0, |_| 0.0, 0.0, 0.0);
        let e = validate_scaling(&k, 1.0, 10.0, 100).unwrap_err();
        assert_eq!(e.code(), "model_core.ViolatedBound");
    }

    fn short_coeffs(nu: f64) -> PerturbationCoeffs {
        let mut p = PerturbationCoeffs::zero();
        for name in [CoeffName::A1S, CoeffName::A2, CoeffName::B1, CoeffName::B2, CoeffName::V] {
            p = p.with(Coefficient::radial(name, 0.1, nu));
        }
        p.with(Coefficient::radial(CoeffName::A3, 0.1, 1.0))
    }

    #[test]
    fn classification_examples() {
        let p = short_coeffs(1.5);
        assert_eq!(
            classify_perturbation(&p, &ScalingFunction::power(1.2)).unwrap(),
            Classification::ShortRange
        );
        assert_eq!(
            classify_perturbation(&p, &ScalingFunction::power(0.6)).unwrap(),
            Classification::LongRangeK
        );
        let p = p.with(Coefficient::radial(CoeffName::A1L, 0.1, 0.5));
        assert_eq!(
            classify_perturbation(&p, &ScalingFunction::power(1.2)).unwrap(),
            Classification::LongRangeA1
        );
    }

    #[test]
    fn zero_perturbation_follows_k() {
        let p = PerturbationCoeffs::zero();
        assert_eq!(
            classify_perturbation(&p, &ScalingFunction::power(2.0)).unwrap(),
            Classification::ShortRange
        );
    }

    #[test]
    fn missing_index() {
        let mut d = short_coeffs(1.5).decay_class(&ScalingFunction::power(1.2));
        d.nu_b2 = None;
        assert_eq!(d.classify().unwrap_err().code(), "model_core.IncompleteSpec");
        let k = ScalingFunction::custom(|r| 1.0 / r, |r| -1.0 / (r * r), |r| 2.0 / r.powi(3), 1.0, 2.0);
        let e = classify_perturbation(&PerturbationCoeffs::zero(), &k).unwrap_err();
        assert_eq!(e.code(), "model_core.IncompleteSpec");
    }

    #[test]
    fn long_range_e_rejected() {
        let p = short_coeffs(0.8);
        let e = classify_perturbation(&p, &ScalingFunction::power(2.0)).unwrap_err();
        assert_eq!(e.code(), "model_core.NotScatteringClass");
    }

    #[test]
    fn channels() {
        assert_eq!(channel_eigenvalues(&CrossSection::new(0)), vec![(0.0, 1)]);
        assert_eq!(
            channel_eigenvalues(&CrossSection::new(2)),
            vec![(0.0, 1), (1.0, 2), (4.0, 2)]
        );
        assert_eq!(
            channel_eigenvalues(&CrossSection::new(3)),
            vec![(0.0, 1), (1.0, 2), (4.0, 2), (9.0, 2)]
        );
    }

    #[test]
    fn theta_series_real_is_hermitian() {
        let s = ThetaSeries::real(&[(0, 1.0, 0.0), (1, 0.5, 0.25), (2, -0.3, 0.0)]);
        assert!(s.is_hermitian());
        for &t in &[0.0, 0.3, 1.7, 4.0] {
            let v = s.eval(t);
            let want = 1.0 + 0.5 * t.cos() + 0.25 * t.sin() - 0.3 * (2.0 * t).cos();
            assert!((v.re - want).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
        let bad = ThetaSeries::from_complex(&[(1, Complex64::new(1.0, 0.0))]);
        assert!(!bad.is_hermitian());
    }

    #[test]
    fn coefficient_profile_support() {
        let c = Coefficient::radial(CoeffName::V, 0.3, 1.5);
        assert_eq!(c.profile(0.5), 0.0);
        assert_eq!(c.profile(0.1), 0.0);
        assert!((c.profile(4.0) - 0.3 * 17f64.powf(-0.75)).abs() < 1e-15);
        let h = 1e-6;
        for &r in &[0.7, 2.0, 9.0] {
            let fd = (c.profile(r + h) - c.profile(r - h)) / (2.0 * h);
            assert!((fd - c.profile_prime(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn bump_shape() {
        let b = Bump::new(1.0, 2.0, 0.5);
        assert_eq!(b.eval(0.5), 0.0);
        assert_eq!(b.eval(1.0), 1.0);
        assert_eq!(b.eval(1.7), 1.0);
        assert_eq!(b.eval(2.5), 0.0);
        assert!(b.eval(0.75) > 0.0 && b.eval(0.75) < 1.0);
    }

    #[test]
    fn cutoffs() {
        let c = CutoffSpec::new(8.0, Bump::new(1.0, 2.0, 0.5));
        assert_eq!(c.chi_r(4.0), 0.0);
        assert_eq!(c.chi_r(8.0), 1.0);
        assert_eq!(c.eta(8.0), 0.0);
        assert_eq!(c.eta(-16.0), 1.0);
        assert_eq!(c.eta(0.0), 0.0);
    }

    #[test]
    fn window_threshold() {
        assert!(SpectralWindow::new(-1.0, 0.0).require_positive().is_err());
        assert!(SpectralWindow::new(0.5, 1.5).require_positive().is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn power_law_recovered(alpha in 0.01f64..=3.0) {
                let c = validate_scaling(&ScalingFunction::power(alpha), 1.0, 1000.0, 500).unwrap();
                prop_assert!((c.c0_hat - alpha).abs() < 1e-6);
                prop_assert!((c.c_hat - alpha).abs() < 1e-6);
                prop_assert!((c.c2_hat - alpha * (alpha + 1.0)).abs() < 1e-6);
            }

            #[test]
            fn classification_monotone(
                nus in proptest::collection::vec(0.5f64..3.0, 7),
                which in 0usize..7,
                drop in 0.0f64..2.0,
            ) {
                let mk = |nus: &[f64]| DecayClass {
                    nu_a1l: Some(f64::INFINITY),
                    nu_a1s: Some(nus[0]),
                    nu_a2: Some(nus[1]),
                    nu_a3: Some(nus[2]),
                    nu_b1: Some(nus[3]),
                    nu_b2: Some(nus[4]),
                    nu_v: Some(nus[5]),
                    nu_k: Some(nus[6]),
                    a1l_present: false,
                };
                let before = mk(&nus).classify();
                let mut lowered = nus.clone();
                lowered[which] = (lowered[which] - drop).max(0.01);
                let after = mk(&lowered).classify();
                if !matches!(before, Ok(Classification::ShortRange)) {
                    prop_assert!(!matches!(after, Ok(Classification::ShortRange)));
                }
            }

            #[test]
            fn channel_multiplicity(m in 0usize..40) {
                let ev = channel_eigenvalues(&CrossSection::new(m));
                prop_assert_eq!(ev.iter().map(|e| e.1).sum::<usize>(), 2 * m + 1);
                for w in ev.windows(2) {
                    prop_assert!(w[1].0 > w[0].0);
                }
            }

            #[test]
            fn smooth_step_symmetry(t in -0.5f64..1.5) {
                prop_assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
            }
        }
    }
}
