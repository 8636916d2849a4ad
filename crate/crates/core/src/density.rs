//! Log densities used by the priors and likelihood.

use statrs::function::gamma::ln_gamma;

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_3;

pub fn normal_logpdf(x: f64, mean: f64, sd: f64) -> f64 {
    if !(sd > 0.0) {
        return f64::NEG_INFINITY;
    }
    let z = (x - mean) / sd;
    -sd.ln() - 0.5 * LN_2PI - 0.5 * z * z
}

pub fn cauchy_logpdf(x: f64, location: f64, scale: f64) -> f64 {
    if !(scale > 0.0) {
        return f64::NEG_INFINITY;
    }
    let z = (x - location) / scale;
    -(std::f64::consts::PI * scale).ln() - (z * z).ln_1p()
}

/// Gamma with shape/rate parameterization.
pub fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> f64 {
    if !(x > 0.0 && shape > 0.0 && rate > 0.0) {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Log-Normal with log-scale mean and sd.
pub fn lognormal_logpdf(x: f64, log_mean: f64, log_sd: f64) -> f64 {
    if !(x > 0.0 && log_sd > 0.0) {
        return f64::NEG_INFINITY;
    }
    let z = (x.ln() - log_mean) / log_sd;
    -x.ln() - log_sd.ln() - 0.5 * LN_2PI - 0.5 * z * z
}

pub fn beta_logpdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0 && a > 0.0 && b > 0.0) {
        return f64::NEG_INFINITY;
    }
    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p()
}

pub fn bernoulli_logpmf(x: f64, p: f64) -> f64 {
    if x == 1.0 {
        p.ln()
    } else if x == 0.0 {
        (-p).ln_1p()
    } else {
        f64::NEG_INFINITY
    }
}
