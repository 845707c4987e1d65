//! Smooth cutoff profile for the scale flow.
//!
//! `rho` is 1 on [0, 1/2], 0 on [1, inf), and interpolates with the
//! exponential smoothstep `h(2(1-u))` where `h(w) = f(w)/(f(w)+f(1-w))`
//! and `f(v) = exp(-1/v)`. All derivatives vanish at the matching points,
//! so `rho` is globally smooth; its slope peaks at `|rho'(3/4)| = 4`.

fn f(v: f64) -> f64 {
    if v > 0.0 {
        (-1.0 / v).exp()
    } else {
        0.0
    }
}

fn f_prime(v: f64) -> f64 {
    if v > 0.0 {
        (-1.0 / v).exp() / (v * v)
    } else {
        0.0
    }
}

fn h(w: f64) -> f64 {
    let a = f(w);
    let b = f(1.0 - w);
    a / (a + b)
}

fn h_prime(w: f64) -> f64 {
    let a = f(w);
    let b = f(1.0 - w);
    let s = a + b;
    (f_prime(w) * b + a * f_prime(1.0 - w)) / (s * s)
}

/// Cutoff profile in the scaling variable `u >= 0`.
pub fn rho(u: f64) -> f64 {
    if u <= 0.5 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        h(2.0 * (1.0 - u))
    }
}

/// Analytic derivative of the cutoff profile.
pub fn rho_prime(u: f64) -> f64 {
    if u <= 0.5 || u >= 1.0 {
        0.0
    } else {
        -2.0 * h_prime(2.0 * (1.0 - u))
    }
}

/// Scale-`t` profile evaluated at spectral weight `x = <m>`.
pub fn rho_t(x: f64, t: f64) -> f64 {
    rho(x / t)
}

/// Scale derivative of the squared profile:
/// `sigma_t^2(x) = d/dt rho_t^2(x) = (2/t) rho(w) |rho'(w)| w`, `w = x/t`.
pub fn sigma_t_sq(x: f64, t: f64) -> f64 {
    let w = x / t;
    2.0 / t * rho(w) * rho_prime(w).abs() * w
}

/// Noise multiplier of the flow: `sigma_t(x) / x`.
pub fn jt(x: f64, t: f64) -> f64 {
    sigma_t_sq(x, t).sqrt() / x
}
