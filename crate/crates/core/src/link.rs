//! Link functions and their overflow-safe inverses.

/// Link connecting the effect regression scale to the outcome scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkFunction {
    Logit,
    Log,
    Identity,
}

impl LinkFunction {
    pub fn name(self) -> &'static str {
        match self {
            LinkFunction::Logit => "logit",
            LinkFunction::Log => "log",
            LinkFunction::Identity => "identity",
        }
    }
}

/// Largest double strictly below 1.
pub(crate) const ONE_MINUS_HALF_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// Numerically stable inverse logit, clamped into the open unit interval so
/// that extreme arguments saturate instead of producing exact 0 or 1.
pub fn inv_logit(x: f64) -> f64 {
    let p = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, ONE_MINUS_HALF_ULP)
}

/// Forward logit; the argument must lie strictly inside (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of `link`, saturating at the support boundary for extreme inputs.
pub fn inverse_link(x: f64, link: LinkFunction) -> f64 {
    match link {
        LinkFunction::Logit => inv_logit(x),
        LinkFunction::Log => x.exp().clamp(f64::MIN_POSITIVE, f64::MAX),
        LinkFunction::Identity => x,
    }
}

/// Forward transform of `link`.
pub fn apply_link(mean: f64, link: LinkFunction) -> f64 {
    match link {
        LinkFunction::Logit => logit(mean),
        LinkFunction::Log => mean.ln(),
        LinkFunction::Identity => mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_logit_at_zero() {
        assert_eq!(inv_logit(0.0), 0.5);
    }

    #[test]
    fn inverse_link_recovers_fixture_mean() {
        let x = logit(0.710);
        assert!((inverse_link(x, LinkFunction::Logit) - 0.710).abs() < 1e-12);
    }

    #[test]
    fn inv_logit_saturates_without_nan() {
        let lo = inv_logit(-800.0);
        assert!(lo > 0.0 && lo <= 1e-300);
        let hi = inv_logit(800.0);
        assert!(hi < 1.0 && hi > 1.0 - 1e-15);
        assert!(!inv_logit(f64::MAX).is_nan());
    }

    #[test]
    fn log_link_saturates() {
        assert!(inverse_link(-800.0, LinkFunction::Log) > 0.0);
        assert!(inverse_link(800.0, LinkFunction::Log).is_finite());
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &x in &[-20.0f64, -1.0, 0.0, 1.0, 20.0] {
            let naive = (1.0f64 + x.exp()).ln();
            assert!((softplus(x) - naive).abs() < 1e-12);
        }
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
    }
}
