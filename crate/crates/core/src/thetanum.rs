//! Lattice-sum evaluation of ϑ_δ(Ω, z) with certified truncation bounds.
//!
//! The sum runs over n = m + δ′, m ∈ ℤ^g, inside the ellipsoid
//! (n − c)ᵀ Y (n − c) ≤ R² centred at c = −Y⁻¹ Im z, where every term has
//! modulus exp(−π (n − c)ᵀY(n − c)) · exp(π Im zᵀ Y⁻¹ Im z). The omitted tail is
//! bounded by placing disjoint balls of radius √λ_min / 2 around the lattice
//! points and comparing with a radial Gaussian integral; see [`tail_moment`].
//! Reported bounds also carry a floating-point rounding estimate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::charalg::Characteristic;
use crate::error::{Error, Result};
use crate::siegel::{PeriodMatrix, MEMBERSHIP_TOL};

const EPS: f64 = f64::EPSILON;
const RADIUS_STEP: f64 = 0.25;

/// Evaluation settings shared by all theta routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    /// Absolute bound requested for every returned sum.
    pub tol: f64,
    /// Largest truncation radius √q tried before giving up.
    pub max_radius: f64,
    pub membership_tol: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            tol: 1e-10,
            max_radius: 40.0,
            membership_tol: MEMBERSHIP_TOL,
        }
    }
}

impl ThetaConfig {
    pub fn with_tol(tol: f64) -> Self {
        ThetaConfig {
            tol,
            ..ThetaConfig::default()
        }
    }
}

/// Two-threshold classification of normalized magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub tol_zero: f64,
    pub tol_nonzero: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Margins {
            tol_zero: 1e-8,
            tol_nonzero: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Zero,
    Nonzero,
    Indeterminate,
}

impl Margins {
    pub fn classify(&self, normalized: f64) -> Classification {
        if normalized < self.tol_zero {
            Classification::Zero
        } else if normalized > self.tol_nonzero {
            Classification::Nonzero
        } else {
            Classification::Indeterminate
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Bound on |value − exact sum|: truncated tail plus rounding.
    pub tail_bound: f64,
    /// Truncation radius: the sum covers (n − c)ᵀY(n − c) ≤ radius².
    pub radius: f64,
    /// Largest modulus among the retained terms.
    pub max_term: f64,
    pub terms: usize,
}

impl ThetaValue {
    /// |value| divided by the largest retained term.
    pub fn normalized(&self) -> f64 {
        if self.max_term > 0.0 {
            self.value.norm() / self.max_term
        } else {
            self.value.norm()
        }
    }
}

/// Value, z-gradient and z-Hessian of ϑ_δ(Ω, ·) at z = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct JetAtZero {
    pub value: Complex64,
    pub gradient: Vec<Complex64>,
    pub hessian: DMatrix<Complex64>,
    pub value_bound: f64,
    pub gradient_bound: f64,
    pub hessian_bound: f64,
    /// Largest retained term of each sum, by derivative order.
    pub max_terms: [f64; 3],
    pub radius: f64,
}

impl JetAtZero {
    pub fn normalized_value(&self) -> f64 {
        normalize(self.value.norm(), self.max_terms[0])
    }

    pub fn normalized_gradient(&self) -> f64 {
        let m = self.gradient.iter().map(|z| z.norm()).fold(0.0, f64::max);
        normalize(m, self.max_terms[1])
    }

    pub fn normalized_hessian(&self) -> f64 {
        let m = self.hessian.iter().map(|z| z.norm()).fold(0.0, f64::max);
        normalize(m, self.max_terms[2])
    }
}

fn normalize(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

/// Upper incomplete gamma Γ(s, x) for s a positive multiple of ½.
fn upper_gamma_half(twice_s: u32, x: f64) -> f64 {
    debug_assert!(twice_s >= 1);
    // Γ(s+1, x) = sΓ(s, x) + x^s e^{-x}
    let (mut s, mut acc) = if twice_s % 2 == 1 {
        (0.5, PI.sqrt() * erfc(x.sqrt()))
    } else {
        (1.0, (-x).exp())
    };
    while 2.0 * s < f64::from(twice_s) {
        acc = s * acc + x.powf(s) * (-x).exp();
        s += 1.0;
    }
    acc
}

/// ∫_a^∞ u^k e^{−πu²} du for a ≥ 0.
fn gaussian_moment(k: u32, a: f64) -> f64 {
    0.5 * PI.powf(-(f64::from(k) + 1.0) / 2.0) * upper_gamma_half(k + 1, PI * a * a)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Upper bound for Σ ‖x‖^p e^{−π‖x‖²} over the points x with ‖x‖ > `radius`
/// of a translated lattice in ℝ^g whose points are pairwise at distance
/// ≥ 2r.
///
/// Each omitted point is averaged over the ball B(x, r); the balls are disjoint
/// and lie outside ‖y‖ ≥ R − r, so the sum is at most
/// (g / r^g) ∫_{R−2r}^∞ (u + r)^{g−1} (u + 2r)^p e^{−πu²} du. Requires R ≥ 2r.
pub fn tail_moment(genus: usize, radius: f64, r: f64, p: u32) -> f64 {
    assert!(radius >= 2.0 * r && r > 0.0, "tail bound needs radius >= 2r > 0");
    let mut poly = vec![1.0];
    for _ in 0..genus.saturating_sub(1) {
        poly = poly_mul(&poly, &[r, 1.0]);
    }
    for _ in 0..p {
        poly = poly_mul(&poly, &[2.0 * r, 1.0]);
    }
    let a = radius - 2.0 * r;
    let integral: f64 = poly
        .iter()
        .enumerate()
        .map(|(k, c)| c * gaussian_moment(k as u32, a))
        .sum();
    genus as f64 / r.powi(genus as i32) * integral
}

/// Precomputed geometry of Y = Im Ω.
struct Lattice {
    genus: usize,
    omega: DMatrix<Complex64>,
    // upper-triangular U with Y = UᵀU
    upper: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    lambda_min: f64,
    omega_max: f64,
}

impl Lattice {
    fn new(omega: &PeriodMatrix, cfg: &ThetaConfig) -> Result<Self> {
        let lambda_min = omega.lambda_min();
        if !(lambda_min >= 10.0 * cfg.membership_tol) {
            return Err(Error::Degenerate { lambda_min });
        }
        let chol = omega.imag_part().cholesky().ok_or(Error::Degenerate { lambda_min })?;
        let upper = chol.l().transpose();
        let y_inv = chol.inverse();
        let omega_max = omega.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(Lattice {
            genus: omega.genus(),
            omega: omega.entries().clone(),
            upper,
            y_inv,
            lambda_min,
            omega_max,
        })
    }

    /// Disjoint-ball radius: lattice differences have length ≥ √λ_min.
    fn ball_radius(&self) -> f64 {
        0.5 * self.lambda_min.sqrt()
    }

    /// Tail bound for derivative order `order` (weights |2πn_j| ≤ 2π‖x‖/√λ_min,
    /// valid when the ellipsoid is centred at 0).
    fn tail(&self, radius: f64, order: u32, growth: f64) -> f64 {
        let r = self.ball_radius();
        let radius = radius.max(2.0 * r);
        let weight = (2.0 * PI / self.lambda_min.sqrt()).powi(order as i32);
        growth * weight * tail_moment(self.genus, radius, r, order)
    }

    fn choose_radius(&self, target: f64, order: u32, growth: f64, cfg: &ThetaConfig) -> Result<f64> {
        let mut radius = (2.0 * self.ball_radius()).max(1.0);
        loop {
            let bound = self.tail(radius, order, growth);
            if bound <= target {
                return Ok(radius);
            }
            if radius >= cfg.max_radius {
                return Err(Error::Truncation {
                    best_bound: bound,
                    radius,
                    tol: cfg.tol,
                });
            }
            radius = (radius + RADIUS_STEP).min(cfg.max_radius);
        }
    }

    /// Calls `visit(n)` for every n ∈ ℤ^g + shift with (n − c)ᵀY(n − c) ≤ radius².
    fn for_each_point(&self, shift: &[f64], center: &[f64], radius: f64, mut visit: impl FnMut(&[f64])) {
        let g = self.genus;
        let mut n = vec![0.0; g];
        self.descend(g, shift, center, radius * radius, 0.0, &mut n, &mut visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        level: usize,
        shift: &[f64],
        center: &[f64],
        r2: f64,
        used: f64,
        n: &mut [f64],
        visit: &mut impl FnMut(&[f64]),
    ) {
        if level == 0 {
            visit(n);
            return;
        }
        let i = level - 1;
        let g = self.genus;
        let s: f64 = ((i + 1)..g).map(|j| self.upper[(i, j)] * (n[j] - center[j])).sum();
        let uii = self.upper[(i, i)];
        let rem = r2 - used;
        if rem < 0.0 {
            return;
        }
        let half_width = rem.sqrt() / uii;
        let mid = center[i] - s / uii;
        let lo = (mid - half_width - shift[i]).ceil() as i64;
        let hi = (mid + half_width - shift[i]).floor() as i64;
        for m in lo..=hi {
            n[i] = m as f64 + shift[i];
            let row = uii * (n[i] - center[i]) + s;
            let next = used + row * row;
            if next <= r2 {
                self.descend(i, shift, center, r2, next, n, visit);
            }
        }
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Default)]
struct Accumulator {
    sum: Complex64,
    comp: Complex64,
    abs_sum: f64,
    err_sum: f64,
    max: f64,
}

impl Accumulator {
    fn add(&mut self, t: Complex64, rel_err: f64) {
        self.sum.re = neumaier(self.sum.re, t.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, t.im, &mut self.comp.im);
        let a = t.norm();
        self.abs_sum += a;
        self.err_sum += rel_err * a;
        self.max = self.max.max(a);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }

    fn rounding(&self) -> f64 {
        self.err_sum + 2.0 * EPS * self.value().norm() + 4.0 * EPS * EPS * self.abs_sum
    }
}

fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

fn check_inputs(delta: &Characteristic, omega: &PeriodMatrix, z: &[Complex64]) -> Result<()> {
    if delta.genus() != omega.genus() {
        return Err(Error::GenusMismatch {
            expected: omega.genus(),
            actual: delta.genus(),
        });
    }
    if z.len() != omega.genus() {
        return Err(Error::GenusMismatch {
            expected: omega.genus(),
            actual: z.len(),
        });
    }
    Ok(())
}

struct RawSum {
    acc: Accumulator,
    terms: usize,
}

/// Unweighted sum at a fixed radius.
fn raw_sum(lat: &Lattice, delta: &Characteristic, z: &[Complex64], radius: f64) -> RawSum {
    let g = lat.genus;
    let shift = delta.top_values();
    let bottom = delta.bottom_values();
    let im_z = DVector::from_iterator(g, z.iter().map(|w| w.im));
    let center_v = -(&lat.y_inv * &im_z);
    let center: Vec<f64> = center_v.iter().copied().collect();
    let shifted_z: Vec<Complex64> = z.iter().zip(&bottom).map(|(w, b)| w + b).collect();
    let z_max = shifted_z.iter().map(|w| w.norm()).fold(0.0, f64::max);

    let mut acc = Accumulator::default();
    let mut terms = 0usize;
    lat.for_each_point(&shift, &center, radius, |n| {
        let (phase, arg_mag) = exponent(lat, n, &shifted_z, z_max);
        let t = phase.exp();
        acc.add(t, EPS * (16.0 + 2.0 * g as f64 * arg_mag));
        terms += 1;
    });
    RawSum { acc, terms }
}

/// πi(nΩnᵀ + 2n·w) and a bound on its magnitude.
fn exponent(lat: &Lattice, n: &[f64], w: &[Complex64], w_max: f64) -> (Complex64, f64) {
    let mut quad = Complex64::new(0.0, 0.0);
    for (j, nj) in n.iter().enumerate() {
        let row: Complex64 = n.iter().enumerate().map(|(k, nk)| lat.omega[(j, k)] * nk).sum();
        quad += row * nj;
    }
    let lin: Complex64 = n.iter().zip(w).map(|(a, b)| b * *a).sum();
    let l1: f64 = n.iter().map(|x| x.abs()).sum();
    let mag = PI * (l1 * l1 * lat.omega_max + 2.0 * l1 * w_max);
    (Complex64::new(0.0, PI) * (quad + lin * 2.0), mag)
}

/// exp(π Im zᵀ Y⁻¹ Im z): growth of the largest term for complex z.
fn growth_factor(lat: &Lattice, z: &[Complex64]) -> f64 {
    let im_z = DVector::from_iterator(lat.genus, z.iter().map(|w| w.im));
    (PI * im_z.dot(&(&lat.y_inv * &im_z))).exp()
}

/// ϑ_δ(Ω, z) with |value − ϑ_δ(Ω, z)| ≤ tail_bound ≤ cfg.tol.
pub fn eval_theta(delta: &Characteristic, omega: &PeriodMatrix, z: &[Complex64], cfg: &ThetaConfig) -> Result<ThetaValue> {
    check_inputs(delta, omega, z)?;
    let lat = Lattice::new(omega, cfg)?;
    let growth = growth_factor(&lat, z);
    let radius = lat.choose_radius(cfg.tol / 2.0, 0, growth, cfg)?;
    let tail = lat.tail(radius, 0, growth);
    let raw = raw_sum(&lat, delta, z, radius);
    let bound = tail + raw.acc.rounding();
    if !(bound <= cfg.tol) {
        return Err(Error::Truncation {
            best_bound: bound,
            radius,
            tol: cfg.tol,
        });
    }
    Ok(ThetaValue {
        value: raw.acc.value(),
        tail_bound: bound,
        radius,
        max_term: raw.acc.max,
        terms: raw.terms,
    })
}

/// ϑ_δ(Ω, z) summed at a caller-chosen radius; the bound is reported, not
/// enforced.
pub fn eval_theta_at_radius(
    delta: &Characteristic,
    omega: &PeriodMatrix,
    z: &[Complex64],
    radius: f64,
    cfg: &ThetaConfig,
) -> Result<ThetaValue> {
    check_inputs(delta, omega, z)?;
    let lat = Lattice::new(omega, cfg)?;
    let growth = growth_factor(&lat, z);
    let raw = raw_sum(&lat, delta, z, radius);
    Ok(ThetaValue {
        value: raw.acc.value(),
        tail_bound: lat.tail(radius, 0, growth) + raw.acc.rounding(),
        radius,
        max_term: raw.acc.max,
        terms: raw.terms,
    })
}

/// The thetanull ϑ_δ(Ω, 0).
pub fn eval_thetanull(delta: &Characteristic, omega: &PeriodMatrix, cfg: &ThetaConfig) -> Result<ThetaValue> {
    let z = vec![Complex64::new(0.0, 0.0); omega.genus()];
    eval_theta(delta, omega, &z, cfg)
}

/// Term-wise differentiated sums for value, ∂ϑ/∂z_j and ∂²ϑ/∂z_j∂z_k at z = 0.
pub fn jet_at_zero(delta: &Characteristic, omega: &PeriodMatrix, cfg: &ThetaConfig) -> Result<JetAtZero> {
    let g = omega.genus();
    let zero = vec![Complex64::new(0.0, 0.0); g];
    check_inputs(delta, omega, &zero)?;
    let lat = Lattice::new(omega, cfg)?;
    let target = cfg.tol / 2.0;
    let radius = [0, 1, 2]
        .iter()
        .map(|&order| lat.choose_radius(target, order, 1.0, cfg))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let shift = delta.top_values();
    let bottom: Vec<Complex64> = delta.bottom_values().into_iter().map(|b| Complex64::new(b, 0.0)).collect();
    let center = vec![0.0; g];
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);

    let mut value = Accumulator::default();
    let mut grad = vec![Accumulator::default(); g];
    let mut hess = vec![Accumulator::default(); g * g];
    lat.for_each_point(&shift, &center, radius, |n| {
        let (phase, arg_mag) = exponent(&lat, n, &bottom, 0.5);
        let t = phase.exp();
        let rel = EPS * (16.0 + 2.0 * g as f64 * arg_mag);
        value.add(t, rel);
        for j in 0..g {
            grad[j].add(t * (two_pi_i * n[j]), rel);
            for k in j..g {
                hess[j * g + k].add(t * (two_pi_i * n[j]) * (two_pi_i * n[k]), rel);
            }
        }
    });

    let gradient: Vec<Complex64> = grad.iter().map(|a| a.value()).collect();
    let mut hessian = DMatrix::zeros(g, g);
    for j in 0..g {
        for k in j..g {
            hessian[(j, k)] = hess[j * g + k].value();
            hessian[(k, j)] = hessian[(j, k)];
        }
    }
    let worst = |accs: &[Accumulator]| accs.iter().map(|a| a.rounding()).fold(0.0, f64::max);
    let maxes = |accs: &[Accumulator]| accs.iter().map(|a| a.max).fold(0.0, f64::max);
    let value_bound = lat.tail(radius, 0, 1.0) + value.rounding();
    let gradient_bound = lat.tail(radius, 1, 1.0) + worst(&grad);
    let hessian_bound = lat.tail(radius, 2, 1.0) + worst(&hess);
    let best = value_bound.max(gradient_bound).max(hessian_bound);
    if !(best <= cfg.tol) {
        return Err(Error::Truncation {
            best_bound: best,
            radius,
            tol: cfg.tol,
        });
    }
    Ok(JetAtZero {
        value: value.value(),
        gradient,
        hessian,
        value_bound,
        gradient_bound,
        hessian_bound,
        max_terms: [value.max, maxes(&grad), maxes(&hess)],
        radius,
    })
}

/// Both sides of 2πi(1 + δ_jk) ∂ϑ/∂Ω_jk = ∂²ϑ/∂z_j∂z_k at z = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatResidual {
    /// 2πi(1 + δ_jk) times the central difference in Ω_jk.
    pub lhs: Complex64,
    /// Hessian entry from the differentiated series.
    pub rhs: Complex64,
    pub residual: f64,
}

impl HeatResidual {
    /// residual / max(1, |rhs|).
    pub fn relative(&self) -> f64 {
        self.residual / self.rhs.norm().max(1.0)
    }
}

/// Compares a central difference of the thetanull in Ω_jk (both symmetric
/// entries moved together) against the z-Hessian. `j`, `k` are 0-based.
pub fn heat_residual(
    delta: &Characteristic,
    omega: &PeriodMatrix,
    j: usize,
    k: usize,
    cfg: &ThetaConfig,
    fd_step: f64,
) -> Result<HeatResidual> {
    let g = omega.genus();
    if j >= g || k >= g {
        return Err(Error::InvalidArgument(format!("indices ({j}, {k}) out of range for genus {g}")));
    }
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let jet = jet_at_zero(delta, omega, cfg)?;
    let step = Complex64::new(fd_step, 0.0);
    let plus = omega
        .shifted_entry(j, k, step, cfg.membership_tol)
        .map_err(|_| Error::StepOutOfDomain)?;
    let minus = omega
        .shifted_entry(j, k, -step, cfg.membership_tol)
        .map_err(|_| Error::StepOutOfDomain)?;
    let zero = vec![Complex64::new(0.0, 0.0); g];
    // one shared radius keeps the truncation error smooth across the stencil
    let radius = [&plus, &minus]
        .iter()
        .map(|om| {
            let lat = Lattice::new(om, cfg)?;
            lat.choose_radius(cfg.tol * 1e-3, 0, 1.0, cfg)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Degenerate { .. } => Error::StepOutOfDomain,
            other => other,
        })?
        .into_iter()
        .fold(0.0, f64::max);
    let f_plus = eval_theta_at_radius(delta, &plus, &zero, radius, cfg)?.value;
    let f_minus = eval_theta_at_radius(delta, &minus, &zero, radius, cfg)?.value;
    let derivative = (f_plus - f_minus) / (2.0 * fd_step);
    let kron = if j == k { 2.0 } else { 1.0 };
    let lhs = Complex64::new(0.0, 2.0 * PI * kron) * derivative;
    let rhs = jet.hessian[(j, k)];
    Ok(HeatResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VanishingOrder {
    Zero,
    One,
    Two,
    /// Order three or more, or a magnitude fell between the margins.
    AtLeastThreeOrIndeterminate,
}

impl VanishingOrder {
    pub fn as_int(self) -> Option<u32> {
        match self {
            VanishingOrder::Zero => Some(0),
            VanishingOrder::One => Some(1),
            VanishingOrder::Two => Some(2),
            VanishingOrder::AtLeastThreeOrIndeterminate => None,
        }
    }
}

/// Smallest derivative order at z = 0 whose normalized magnitude clears
/// `margins.tol_nonzero`, provided every lower order is below
/// `margins.tol_zero`.
pub fn vanishing_order_at_zero(
    delta: &Characteristic,
    omega: &PeriodMatrix,
    cfg: &ThetaConfig,
    margins: &Margins,
) -> Result<VanishingOrder> {
    let jet = jet_at_zero(delta, omega, cfg)?;
    Ok(order_from_jet(&jet, margins))
}

pub fn order_from_jet(jet: &JetAtZero, margins: &Margins) -> VanishingOrder {
    let levels = [
        (jet.normalized_value(), VanishingOrder::Zero),
        (jet.normalized_gradient(), VanishingOrder::One),
        (jet.normalized_hessian(), VanishingOrder::Two),
    ];
    for (magnitude, order) in levels {
        match margins.classify(magnitude) {
            Classification::Nonzero => return order,
            Classification::Zero => continue,
            Classification::Indeterminate => return VanishingOrder::AtLeastThreeOrIndeterminate,
        }
    }
    VanishingOrder::AtLeastThreeOrIndeterminate
}

/// Which reference function the shift ratio divides by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftForm {
    /// r(z) = ϑ_δ(Ω, z) / ϑ₀(Ω, z + δ′ + δ″Ω).
    Plain,
    /// r(z) = ϑ_δ(Ω, z) / (exp(2πi δ′·z) ϑ₀(Ω, z + δ″ + Ωδ′)), the
    /// quasi-periodicity form, whose ratio is exactly constant in z.
    WithExponential,
}

/// Largest relative spread max_{a,b} |r(z_a) − r(z_b)| / |r(z_a)| of the shift
/// ratio over the sample points.
pub fn shift_ratio_check(
    delta: &Characteristic,
    omega: &PeriodMatrix,
    z_samples: &[Vec<Complex64>],
    cfg: &ThetaConfig,
    margins: &Margins,
    form: ShiftForm,
) -> Result<f64> {
    if z_samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two z samples".into()));
    }
    let g = omega.genus();
    let top = delta.top_values();
    let bottom = delta.bottom_values();
    let zero = Characteristic::zero(g)?;
    let om = omega.entries();
    let mut ratios = Vec::with_capacity(z_samples.len());
    for (index, z) in z_samples.iter().enumerate() {
        check_inputs(delta, omega, z)?;
        let num = eval_theta(delta, omega, z, cfg)?;
        let (arg, prefactor): (Vec<Complex64>, Complex64) = match form {
            ShiftForm::Plain => (
                (0..g)
                    .map(|i| z[i] + top[i] + (0..g).map(|j| om[(j, i)] * bottom[j]).sum::<Complex64>())
                    .collect(),
                Complex64::new(1.0, 0.0),
            ),
            ShiftForm::WithExponential => {
                let lin: Complex64 = (0..g).map(|i| z[i] * top[i]).sum();
                (
                    (0..g)
                        .map(|i| z[i] + bottom[i] + (0..g).map(|j| om[(i, j)] * top[j]).sum::<Complex64>())
                        .collect(),
                    (Complex64::new(0.0, 2.0 * PI) * lin).exp(),
                )
            }
        };
        let den = eval_theta(&zero, omega, &arg, cfg)?;
        if margins.classify(den.normalized()) != Classification::Nonzero {
            return Err(Error::ResampleNeeded { index });
        }
        ratios.push(num.value / (prefactor * den.value));
    }
    let mut worst = 0.0f64;
    for a in &ratios {
        for b in &ratios {
            worst = worst.max((a - b).norm() / a.norm());
        }
    }
    Ok(worst)
}

/// Bound on |∏a_i − ∏A_i| given |a_i − A_i| ≤ e_i.
pub fn product_bound(values: &[ThetaValue]) -> f64 {
    let full: f64 = values.iter().map(|v| v.value.norm() + v.tail_bound).product();
    let exact: f64 = values.iter().map(|v| v.value.norm()).product();
    (full - exact).max(0.0)
}
