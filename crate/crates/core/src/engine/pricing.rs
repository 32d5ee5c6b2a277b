//! Zero-coupon bond prices and the bank account.

use crate::curve::ForwardCurve;
use crate::error::{Error, Result};

/// `P = exp(−∫₀^τ h(x) dx)` by the trapezoid rule on the curve grid; a
/// partial last cell uses the linearly interpolated endpoint.
pub fn bond_price(curve: &ForwardCurve, tau: f64) -> Result<f64> {
    let cfg = curve.config();
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("maturity offset must be >= 0, got {tau}")));
    }
    if tau > cfg.x_max * (1.0 + 1e-12) {
        return Err(Error::Range { tau, x_max: cfg.x_max });
    }
    let dx = cfg.dx();
    let v = curve.values();
    let s = tau / dx;
    // snap to the grid so that grid-aligned maturities have no partial cell
    let full = if (s - s.round()).abs() < 1e-9 { s.round() as usize } else { s.floor() as usize };
    let full = full.min(v.len() - 1);
    let mut integral: f64 = v.windows(2).take(full).map(|w| 0.5 * (w[0] + w[1]) * dx).sum();
    let rest = tau - full as f64 * dx;
    if rest > 1e-9 * dx {
        integral += 0.5 * (v[full] + curve.value_at(tau)) * rest;
    }
    Ok((-integral).exp())
}

/// `B(t) = exp(∫₀ᵗ r(s) ds)` by the trapezoid rule over the given
/// (possibly non-uniform) times.
pub fn bank_account(short_rates: &[f64], times: &[f64]) -> Result<f64> {
    if short_rates.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "{} short rates for {} times",
            short_rates.len(),
            times.len()
        )));
    }
    let integral: f64 = short_rates
        .windows(2)
        .zip(times.windows(2))
        .map(|(r, t)| 0.5 * (r[0] + r[1]) * (t[1] - t[0]))
        .sum();
    Ok(integral.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpaceConfig;

    fn cfg() -> CurveSpaceConfig {
        CurveSpaceConfig {
            x_max: 5.0,
            n_grid: 501,
            ..CurveSpaceConfig::default()
        }
    }

    #[test]
    fn bond_prices() {
        let flat = ForwardCurve::flat(cfg(), 0.03);
        assert_eq!(bond_price(&flat, 0.0).unwrap(), 1.0);
        assert!((bond_price(&flat, 2.0).unwrap() - (-0.06f64).exp()).abs() < 1e-14);
        assert!((bond_price(&flat, 2.005).unwrap() - (-0.03 * 2.005f64).exp()).abs() < 1e-14);
        let e = ForwardCurve::from_fn(cfg(), |x| (-x).exp());
        let exact = (-(1.0 - (-1.0f64).exp())).exp();
        // trapezoid error ≈ dx²/12 · (f′(1) − f′(0))
        assert!((bond_price(&e, 1.0).unwrap() - exact).abs() < 1e-5);
        assert!(matches!(bond_price(&flat, 5.5), Err(Error::Range { .. })));
    }

    #[test]
    fn bank_accounts() {
        assert_eq!(bank_account(&[0.0; 3], &[0.0, 0.5, 1.0]).unwrap(), 1.0);
        assert!((bank_account(&[0.04; 3], &[0.0, 0.2, 1.5]).unwrap() - (0.06f64).exp()).abs() < 1e-15);
        // the rule is exact for a linear ramp r(s) = s: ∫₀² s ds = 2
        let times = [0.0, 0.3, 1.1, 2.0];
        assert!((bank_account(&times, &times).unwrap() - 2.0f64.exp()).abs() < 1e-14);
        assert!(bank_account(&[0.0], &[0.0, 1.0]).is_err());
    }
}
