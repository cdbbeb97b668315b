//! Fourier convergence factor of the two-subdomain optimized Schwarz
//! iteration for the Laplacian, and the min-max cost minimized when tuning
//! the Robin transmission coefficients.
//!
//! A transmission operator `p - q ∂ττ` has the Fourier symbol
//! `Λ(k) = p + q k²`, and the per-frequency contraction factor is
//!
//! ```text
//! ρ(k) = |(Λ₁(k) - k) / (Λ₁(k) + k)| · |(Λ₂(k) - k) / (Λ₂(k) + k)|
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("invalid frequency band: {0}")]
    InvalidBand(String),
    #[error("{mode} expects {expected} parameters, got {found}")]
    WrongDimension {
        mode: TransmissionMode,
        expected: usize,
        found: usize,
    },
    #[error("invalid transmission coefficients: {0}")]
    InvalidParams(String),
    #[error("unknown transmission mode `{0}`")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// Zeroth order: `A = p`.
    Oo0,
    /// Second order: `A = p - q ∂ττ`.
    Oo2,
}

/// Robin coefficients of both sides of an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionParams {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub order: Order,
    pub symmetric: bool,
}

impl TransmissionParams {
    pub fn oo0_symmetric(p: f64) -> Result<Self, RateError> {
        Self::new(p, 0.0, p, 0.0, Order::Oo0, true)
    }

    pub fn oo0_unsymmetric(p1: f64, p2: f64) -> Result<Self, RateError> {
        Self::new(p1, 0.0, p2, 0.0, Order::Oo0, false)
    }

    pub fn oo2_symmetric(p: f64, q: f64) -> Result<Self, RateError> {
        Self::new(p, q, p, q, Order::Oo2, true)
    }

    pub fn oo2_unsymmetric(p1: f64, q1: f64, p2: f64, q2: f64) -> Result<Self, RateError> {
        Self::new(p1, q1, p2, q2, Order::Oo2, false)
    }

    pub fn new(
        p1: f64,
        q1: f64,
        p2: f64,
        q2: f64,
        order: Order,
        symmetric: bool,
    ) -> Result<Self, RateError> {
        for (name, v) in [("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RateError::InvalidParams(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if order == Order::Oo0 && (q1 != 0.0 || q2 != 0.0) {
            return Err(RateError::InvalidParams(
                "zeroth-order conditions require q1 = q2 = 0".into(),
            ));
        }
        if symmetric && (p1 != p2 || q1 != q2) {
            return Err(RateError::InvalidParams(
                "symmetric conditions require equal sides".into(),
            ));
        }
        Ok(Self {
            p1,
            q1,
            p2,
            q2,
            order,
            symmetric,
        })
    }

    /// Same coefficients with the two sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p2,
            q1: self.q2,
            p2: self.p1,
            q2: self.q1,
            ..*self
        }
    }

    pub fn mode(&self) -> TransmissionMode {
        match (self.order, self.symmetric) {
            (Order::Oo0, true) => TransmissionMode::Oo0Sym,
            (Order::Oo0, false) => TransmissionMode::Oo0Unsym,
            (Order::Oo2, true) => TransmissionMode::Oo2Sym,
            (Order::Oo2, false) => TransmissionMode::Oo2Unsym,
        }
    }
}

/// Which coefficients are free in an optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransmissionMode {
    Oo0Sym,
    Oo0Unsym,
    Oo2Sym,
    Oo2Unsym,
}

impl TransmissionMode {
    pub const ALL: [TransmissionMode; 4] = [
        TransmissionMode::Oo0Sym,
        TransmissionMode::Oo0Unsym,
        TransmissionMode::Oo2Sym,
        TransmissionMode::Oo2Unsym,
    ];

    pub fn dimension(self) -> usize {
        match self {
            TransmissionMode::Oo0Sym => 1,
            TransmissionMode::Oo0Unsym | TransmissionMode::Oo2Sym => 2,
            TransmissionMode::Oo2Unsym => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransmissionMode::Oo0Sym => "oo0_sym",
            TransmissionMode::Oo0Unsym => "oo0_unsym",
            TransmissionMode::Oo2Sym => "oo2_sym",
            TransmissionMode::Oo2Unsym => "oo2_unsym",
        }
    }

    /// Vector layout: `[p]`, `[p1, p2]`, `[p, q]`, `[p1, q1, p2, q2]`.
    pub fn decode(self, x: &[f64]) -> Result<TransmissionParams, RateError> {
        if x.len() != self.dimension() {
            return Err(RateError::WrongDimension {
                mode: self,
                expected: self.dimension(),
                found: x.len(),
            });
        }
        match self {
            TransmissionMode::Oo0Sym => TransmissionParams::oo0_symmetric(x[0]),
            TransmissionMode::Oo0Unsym => TransmissionParams::oo0_unsymmetric(x[0], x[1]),
            TransmissionMode::Oo2Sym => TransmissionParams::oo2_symmetric(x[0], x[1]),
            TransmissionMode::Oo2Unsym => {
                TransmissionParams::oo2_unsymmetric(x[0], x[1], x[2], x[3])
            }
        }
    }

    pub fn encode(self, tp: &TransmissionParams) -> Vec<f64> {
        match self {
            TransmissionMode::Oo0Sym => vec![tp.p1],
            TransmissionMode::Oo0Unsym => vec![tp.p1, tp.p2],
            TransmissionMode::Oo2Sym => vec![tp.p1, tp.q1],
            TransmissionMode::Oo2Unsym => vec![tp.p1, tp.q1, tp.p2, tp.q2],
        }
    }
}

impl fmt::Display for TransmissionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransmissionMode {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| RateError::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    pub k_min: f64,
    pub k_max: f64,
    pub n_samples: usize,
}

pub const DEFAULT_SAMPLES: usize = 10_000;

impl FrequencyBand {
    /// `k_min == k_max` is accepted as the single-frequency limit.
    pub fn new(k_min: f64, k_max: f64, n_samples: usize) -> Result<Self, RateError> {
        if !(k_min > 0.0 && k_max.is_finite() && k_min <= k_max) {
            return Err(RateError::InvalidBand(format!(
                "need 0 < k_min <= k_max, got [{k_min}, {k_max}]"
            )));
        }
        if n_samples < 2 {
            return Err(RateError::InvalidBand(format!(
                "need at least 2 samples, got {n_samples}"
            )));
        }
        Ok(Self {
            k_min,
            k_max,
            n_samples,
        })
    }

    pub fn with_default_samples(k_min: f64, k_max: f64) -> Result<Self, RateError> {
        Self::new(k_min, k_max, DEFAULT_SAMPLES)
    }

    /// Band resolved by a grid: `[π / L, π / h]` with `L` the largest extent
    /// and `h` the smallest spacing.
    pub fn for_grid(grid: &crate::model::Grid) -> Self {
        use std::f64::consts::PI;
        Self {
            k_min: PI / grid.max_extent(),
            k_max: PI / grid.min_spacing(),
            n_samples: DEFAULT_SAMPLES,
        }
    }

    /// Geometrically spaced sample frequencies, endpoints included.
    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        let ratio = (self.k_max / self.k_min).ln();
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples).map(move |i| {
            if i == 0 {
                self.k_min
            } else if i == self.n_samples - 1 {
                self.k_max
            } else {
                self.k_min * (ratio * i as f64 / last).exp()
            }
        })
    }
}

/// Fourier symbol `p + q k²` of the operator `p - q ∂ττ`.
pub fn lambda_symbol(k: f64, p: f64, q: f64) -> f64 {
    p + q * k * k
}

fn side_factor(k: f64, p: f64, q: f64) -> f64 {
    let lambda = lambda_symbol(k, p, q);
    let den = lambda + k;
    if den == 0.0 {
        1.0
    } else {
        ((lambda - k) / den).abs()
    }
}

pub fn convergence_rate(k: f64, tp: &TransmissionParams) -> Result<f64, RateError> {
    if !(k > 0.0) {
        return Err(RateError::NonPositiveFrequency(k));
    }
    Ok(side_factor(k, tp.p1, tp.q1) * side_factor(k, tp.p2, tp.q2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoMax {
    pub value: f64,
    pub argmax: f64,
}

pub fn rho_max(tp: &TransmissionParams, band: &FrequencyBand) -> RhoMax {
    let mut best = RhoMax {
        value: f64::NEG_INFINITY,
        argmax: band.k_min,
    };
    for k in band.samples() {
        let r = side_factor(k, tp.p1, tp.q1) * side_factor(k, tp.p2, tp.q2);
        if r > best.value {
            best = RhoMax { value: r, argmax: k };
        }
    }
    best
}

/// Equioscillation optimum of the symmetric zeroth-order problem:
/// `p = √(k_min k_max)`, `ρ = ((√k_max - √k_min) / (√k_max + √k_min))²`.
pub fn optimal_oo0_symmetric(band: &FrequencyBand) -> (f64, f64) {
    let p = (band.k_min * band.k_max).sqrt();
    let (a, b) = (band.k_min.sqrt(), band.k_max.sqrt());
    let rho = ((b - a) / (b + a)).powi(2);
    (p, rho)
}

/// Inverts [`optimal_oo0_symmetric`]: the band whose symmetric OO0 optimum is
/// `(p, rho)`.
pub fn recover_band_from_oo0(p: f64, rho: f64) -> Result<(f64, f64), RateError> {
    if !(p > 0.0 && (0.0..1.0).contains(&rho)) {
        return Err(RateError::InvalidParams(format!(
            "need p > 0 and 0 <= rho < 1, got p={p}, rho={rho}"
        )));
    }
    let s = rho.sqrt();
    let theta = (1.0 + s) / (1.0 - s);
    Ok((p / theta, p * theta))
}

/// Min-max cost of a raw parameter vector. Points with a negative
/// coefficient score `1 + Σ max(0, -x_i)`, which is above every feasible value.
pub fn cost_function(
    x: &[f64],
    mode: TransmissionMode,
    band: &FrequencyBand,
) -> Result<f64, RateError> {
    if x.len() != mode.dimension() {
        return Err(RateError::WrongDimension {
            mode,
            expected: mode.dimension(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    let violation: f64 = x.iter().map(|v| (-v).max(0.0)).sum();
    if violation > 0.0 {
        return Ok(1.0 + violation);
    }
    Ok(rho_max(&mode.decode(x)?, band).value)
}

/// `(k, ρ(k))` at the band's sample frequencies.
pub fn rate_curve(tp: &TransmissionParams, band: &FrequencyBand) -> Vec<(f64, f64)> {
    band.samples()
        .map(|k| (k, side_factor(k, tp.p1, tp.q1) * side_factor(k, tp.p2, tp.q2)))
        .collect()
}

pub fn rate_curve_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("k,rho\n");
    for (k, r) in curve {
        let _ = writeln!(out, "{k:.12e},{r:.12e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band(a: f64, b: f64) -> FrequencyBand {
        FrequencyBand::with_default_samples(a, b).unwrap()
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(lambda_symbol(3.7, 1.0, 0.0), 1.0);
        assert_eq!(lambda_symbol(2.0, 0.0, 1.0), 4.0);
        assert!((lambda_symbol(1.0, 0.0471, 0.7050) - 0.7521).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let tp = TransmissionParams::oo0_unsymmetric(1.0, 0.3).unwrap();
        assert_eq!(convergence_rate(1.0, &tp).unwrap(), 0.0);
        let zero = TransmissionParams::oo0_symmetric(0.0).unwrap();
        assert_eq!(convergence_rate(0.37, &zero).unwrap(), 1.0);
        let one = TransmissionParams::oo0_symmetric(1.0).unwrap();
        assert!((convergence_rate(2.0, &one).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(convergence_rate(0.0, &one).is_err());
        assert!(convergence_rate(-1.0, &one).is_err());
    }

    #[test]
    fn rho_max_of_equioscillating_p() {
        let b = band(1.0, 100.0);
        let tp = TransmissionParams::oo0_symmetric(10.0).unwrap();
        let r = rho_max(&tp, &b);
        assert!((r.value - (9.0f64 / 11.0).powi(2)).abs() < 1e-12);
        let zero = TransmissionParams::oo2_symmetric(0.0, 0.0).unwrap();
        assert_eq!(rho_max(&zero, &b).value, 1.0);
    }

    #[test]
    fn enlarging_the_band_does_not_decrease_rho_max() {
        let tp = TransmissionParams::oo2_unsymmetric(0.1081, 0.3205, 0.0231, 1.5786).unwrap();
        let mut prev = 0.0;
        for (a, b) in [(0.1, 0.5), (0.05, 1.0), (0.0174, 1.9159), (0.01, 3.0)] {
            let r = rho_max(&tp, &band(a, b)).value;
            assert!(r >= prev - 1e-9, "{r} < {prev}");
            prev = r;
        }
    }

    #[test]
    fn closed_form_oo0_optimum() {
        let (p, rho) = optimal_oo0_symmetric(&band(1.0, 100.0));
        assert!((p - 10.0).abs() < 1e-12);
        assert!((rho - (9.0f64 / 11.0).powi(2)).abs() < 1e-15);

        let (p, rho) = optimal_oo0_symmetric(&band(0.7, 0.7));
        assert!((p - 0.7).abs() < 1e-15);
        assert_eq!(rho, 0.0);
    }

    #[test]
    fn closed_form_matches_grid_search_over_p() {
        let b = FrequencyBand::new(1.0, 100.0, 2001).unwrap();
        let (p_star, rho_star) = optimal_oo0_symmetric(&b);
        let search = |lo: f64, hi: f64, n: usize| {
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..n {
                let p = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let v = rho_max(&TransmissionParams::oo0_symmetric(p).unwrap(), &b).value;
                if v < best.0 {
                    best = (v, p);
                }
            }
            best
        };
        let coarse = search(1.0, 100.0, 5_000);
        assert!((coarse.1 - p_star).abs() < 0.05);
        let fine = search(coarse.1 - 0.05, coarse.1 + 0.05, 20_000);
        assert!(fine.0 >= rho_star - 1e-12);
        assert!((fine.0 - rho_star).abs() < 1e-6);
        assert!((fine.1 - p_star).abs() < 1e-4);
    }

    #[test]
    fn band_recovery_round_trip() {
        let (kmin, kmax) = recover_band_from_oo0(0.1826, 0.6823).unwrap();
        assert!((kmin - 0.0174).abs() < 5e-5, "{kmin}");
        assert!((kmax - 1.9159).abs() < 2e-3, "{kmax}");
        let (p, rho) = optimal_oo0_symmetric(&band(kmin, kmax));
        assert!((p - 0.1826).abs() < 1e-12);
        assert!((rho - 0.6823).abs() < 1e-12);
        assert!(recover_band_from_oo0(0.0, 0.5).is_err());
        assert!(recover_band_from_oo0(1.0, 1.0).is_err());
    }

    #[test]
    fn cost_function_contract() {
        let b = band(1.0, 100.0);
        let v = cost_function(&[10.0], TransmissionMode::Oo0Sym, &b).unwrap();
        assert!((v - optimal_oo0_symmetric(&b).1).abs() < 1e-12);
        let v = cost_function(&[1.0, -0.5], TransmissionMode::Oo2Sym, &b).unwrap();
        assert!(v > 1.0);
        assert!(matches!(
            cost_function(&[1.0, 2.0, 3.0], TransmissionMode::Oo2Unsym, &b),
            Err(RateError::WrongDimension { expected: 4, .. })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(TransmissionParams::oo0_symmetric(-1.0).is_err());
        assert!(TransmissionParams::new(1.0, 1.0, 1.0, 0.0, Order::Oo0, false).is_err());
        assert!(TransmissionParams::new(1.0, 0.0, 2.0, 0.0, Order::Oo0, true).is_err());
        assert!(FrequencyBand::new(0.0, 1.0, 10).is_err());
        assert!(FrequencyBand::new(2.0, 1.0, 10).is_err());
        assert!(FrequencyBand::new(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in TransmissionMode::ALL {
            assert_eq!(m.name().parse::<TransmissionMode>().unwrap(), m);
            let x: Vec<f64> = (1..=m.dimension()).map(|i| i as f64).collect();
            let tp = m.decode(&x).unwrap();
            assert_eq!(tp.mode(), m);
            assert_eq!(m.encode(&tp), x);
        }
        assert!("oo3".parse::<TransmissionMode>().is_err());
    }

    #[test]
    fn samples_are_geometric_with_exact_endpoints() {
        let b = FrequencyBand::new(0.5, 8.0, 5).unwrap();
        let s: Vec<f64> = b.samples().collect();
        assert_eq!(s[0], 0.5);
        assert_eq!(s[4], 8.0);
        assert!((s[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn flat_curve_without_damping() {
        let tp = TransmissionParams::oo2_symmetric(0.0, 0.0).unwrap();
        let curve = rate_curve(&tp, &band(0.1, 10.0));
        assert!(curve.iter().all(|&(_, r)| r == 1.0));
        let csv = rate_curve_csv(&curve[..2]);
        assert!(csv.starts_with("k,rho\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
