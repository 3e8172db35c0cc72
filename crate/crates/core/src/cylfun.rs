//! Cylinder functions `J_ν`, `Y_ν` and their argument derivatives for real
//! non-negative order.
//!
//! Three regimes are used:
//!
//! * `x < 2`: Temme's series for `Y_μ`, `Y_{μ+1}` at a reduced order
//!   `|μ| ≤ 1/2`, with `J_ν` recovered from the continued fraction for
//!   `J_ν'/J_ν` and the Wronskian. The series is uniform in `μ`, so integer
//!   orders need no special casing.
//! * `2 ≤ x < 25 + ν²/2`: Steed's method, i.e. the same first continued
//!   fraction together with the complex continued fraction for
//!   `(J' + iY')/(J + iY)`.
//! * `x ≥ 25 + ν²/2`: Hankel's asymptotic expansion.
//!
//! All functions are pure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Largest order the toolkit supports.
pub const MAX_ORDER: f64 = 200.0;

const TEMME_LIMIT: f64 = 2.0;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 200_000;
const RESCALE_AT: f64 = 1e200;

/// Taylor coefficients of `1/Γ(1+z)` about `z = 0`.
const RGAMMA_TAYLOR: [f64; 22] = [
    1.0,
    0.577_215_664_901_532_860_6,
    -0.655_878_071_520_253_881_1,
    -0.042_002_635_034_095_235_53,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_75,
    -0.009_621_971_527_876_973_562,
    0.007_218_943_246_663_099_542,
    -0.001_165_167_591_859_065_112,
    -0.000_215_241_674_114_950_972_8,
    0.000_128_050_282_388_116_186_2,
    -0.000_020_134_854_780_788_238_66,
    -0.000_001_250_493_482_142_670_657,
    0.000_001_133_027_231_981_695_882,
    -2.056_338_416_977_607_103e-7,
    6.116_095_104_481_415_818e-9,
    5.002_007_644_469_222_930e-9,
    -1.181_274_570_487_020_145e-9,
    1.043_426_711_691_100_510e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708e-12,
    5.100_370_287_454_475_979e-13,
];

/// Order of a cylinder function: finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CylOrder(f64);

impl CylOrder {
    pub fn new(order: f64) -> Result<Self> {
        if !order.is_finite() || order < 0.0 {
            return Err(Error::Domain(format!(
                "cylinder order must be finite and >= 0, got {order}"
            )));
        }
        Ok(Self(order))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CylOrder {
    type Error = Error;

    fn try_from(order: f64) -> Result<Self> {
        Self::new(order)
    }
}

/// `J_ν`, `Y_ν`, `J_ν'` and `Y_ν'` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "cylinder argument must be finite and >= 0, got {x}"
        )));
    }
    Ok(())
}

pub fn bessel_j(order: CylOrder, x: f64) -> Result<f64> {
    Ok(cylinder(order, x)?.j)
}

pub fn bessel_y(order: CylOrder, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("Y requires x > 0, got {x}")));
    }
    Ok(cylinder(order, x)?.y)
}

pub fn bessel_j_prime(order: CylOrder, x: f64) -> Result<f64> {
    Ok(cylinder(order, x)?.jp)
}

pub fn bessel_y_prime(order: CylOrder, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("Y' requires x > 0, got {x}")));
    }
    Ok(cylinder(order, x)?.yp)
}

/// Evaluates all four cylinder quantities at once.
///
/// At `x = 0` the `J` values are the exact limits and the `Y` values are
/// `-∞`/`+∞`.
pub fn cylinder(order: CylOrder, x: f64) -> Result<Cylinder> {
    check_argument(x)?;
    let nu = order.value();
    if nu > MAX_ORDER {
        return Err(Error::Domain(format!(
            "order {nu} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    if x == 0.0 {
        let j = if nu == 0.0 { 1.0 } else { 0.0 };
        let jp = if nu == 1.0 {
            0.5
        } else if nu > 0.0 && nu < 1.0 {
            f64::INFINITY
        } else {
            0.0
        };
        return Ok(Cylinder {
            j,
            y: f64::NEG_INFINITY,
            jp,
            yp: f64::INFINITY,
        });
    }
    if x >= hankel_threshold(nu) {
        return Ok(hankel(nu, x));
    }
    steed_temme(nu, x)
}

/// Argument above which the Hankel expansion is used.
pub fn hankel_threshold(order: f64) -> f64 {
    25.0 + 0.5 * order * order
}

/// Total phase of the large-argument cosine form of `J_ν`:
/// `x − νπ/2 − π/4 + (4ν² − 1)/(8x)`.
///
/// Requires `x > max(1, 2ν)`.
pub fn asymptotic_phase(order: CylOrder, x: f64) -> Result<f64> {
    asymptotic_phase_with_threshold(order, x, 1.0)
}

/// As [`asymptotic_phase`], rejecting arguments `x ≤ factor · max(1, 2ν)`.
pub fn asymptotic_phase_with_threshold(order: CylOrder, x: f64, factor: f64) -> Result<f64> {
    check_argument(x)?;
    let nu = order.value();
    let limit = factor * f64::max(1.0, 2.0 * nu);
    if x <= limit {
        return Err(Error::Domain(format!(
            "x = {x} is outside the asymptotic regime (need x > {limit})"
        )));
    }
    Ok(x - nu * FRAC_PI_2 - FRAC_PI_4 + (4.0 * nu * nu - 1.0) / (8.0 * x))
}

/// Hankel's expansion for `P` and `Q`; valid for any real order.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu4 = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu4 - odd * odd) / (k as f64 * 8.0 * x);
        let size = term.abs();
        if size > last {
            break;
        }
        last = size;
        let signed = match k % 4 {
            1 => term,
            2 => -term,
            3 => -term,
            _ => term,
        };
        if k % 2 == 1 {
            q += signed;
        } else {
            p += signed;
        }
        if size < EPS * 1e-2 {
            break;
        }
    }
    (p, q)
}

fn hankel_jy(nu: f64, x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(nu, x);
    // cos/sin of x − (ν/2 + 1/4)π by angle addition, keeping x unrounded
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = ((0.5 * nu + 0.25) * PI).sin_cos();
    let (s, c) = (sx * cp - cx * sp, cx * cp + sx * sp);
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

fn hankel(nu: f64, x: f64) -> Cylinder {
    let (j, y) = hankel_jy(nu, x);
    let (jm, ym) = hankel_jy(nu - 1.0, x);
    Cylinder {
        j,
        y,
        jp: jm - nu / x * j,
        yp: ym - nu / x * y,
    }
}

/// Returns `(1/Γ(1+μ), 1/Γ(1−μ), gam1, gam2)` for `|μ| ≤ 1/2` where
/// `gam1 = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ)` and `gam2 = (1/Γ(1−μ) + 1/Γ(1+μ))/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut power = 1.0;
    for (k, c) in RGAMMA_TAYLOR.iter().enumerate() {
        if k % 2 == 0 {
            even += c * power;
        } else {
            odd += c * power;
        }
        if k % 2 == 1 {
            power *= mu * mu;
        }
    }
    // odd holds Σ c_{2j+1} μ^{2j}
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (gampl, gammi, -odd, even)
}

fn steed_temme(nu: f64, x: f64) -> Result<Cylinder> {
    let nl = if x < TEMME_LIMIT {
        (nu + 0.5).floor() as usize
    } else {
        (nu - x + 1.5).floor().max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: f = J_ν'/J_ν.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(TINY);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b - 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged(format!(
            "Bessel CF1 at order {nu}, x = {x}"
        )));
    }

    // Downward recurrence from ν to μ, rescaled against overflow.
    let mut rjl = isign;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    let mut rescales = 0i32;
    for _ in (1..=nl).rev() {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE_AT {
            rjl /= RESCALE_AT;
            rjpl /= RESCALE_AT;
            rescales += 1;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1) = if x < TEMME_LIMIT {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gampl, gammi, gam1, gam2) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS {
            1.0
        } else {
            pimu2.sin() / pimu2
        };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let dd = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged(format!(
                "Temme series at order {nu}, x = {x}"
            )));
        }
        let rymu = -sum;
        let ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        let rjmu = w / (rymup - f * rymu);
        (rjmu, rymu, ry1)
    } else {
        // CF2: p + iq = (J' + iY')/(J + iY) at order μ.
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut converged = false;
        for i in 2..MAX_ITER {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < TINY {
                dr = TINY;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < TINY {
                cr = TINY;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged(format!(
                "Bessel CF2 at order {nu}, x = {x}"
            )));
        }
        let gam = (p - f) / q;
        let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
        let rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        let ry1 = xmu * xi * rymu - rymup;
        (rjmu, rymu, ry1)
    };

    let ratio = rjmu / rjl;
    let (j, jp) = if rescales == 0 {
        (rjl1 * ratio, rjp1 * ratio)
    } else {
        let log_scale = rescales as f64 * RESCALE_AT.ln();
        let scaled = |v: f64| {
            let mag = v * ratio;
            if mag == 0.0 {
                0.0
            } else {
                mag.signum() * (mag.abs().ln() - log_scale).exp()
            }
        };
        (scaled(rjl1), scaled(rjp1))
    };

    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let (y, yp) = if rymu.is_finite() && ry1.is_finite() {
        (rymu, nu * xi * rymu - ry1)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    Ok(Cylinder { j, y, jp, yp })
}
