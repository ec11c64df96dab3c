//! Even test pairs (h, h-hat) with compactly supported h-hat, built from the
//! bump Psi(s) = c exp(-1/(1-s^2)) on (-1, 1) normalized to unit mass.
//!
//! Convention: h(r) = integral of h-hat(u) e^{iru} du.

use alloc::format;
use alloc::string::String;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::Quadrature;
use crate::{Error, Result};

const TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// h-hat = 1_{[-x,x]} * Psi_eps
    Indicator { x: f64, eps: f64 },
    /// h-hat = Psi(u/R)/R
    Bump { r: f64 },
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub family: Family,
    norm: f64,
    quad: Quadrature,
}

fn psi_raw(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl TestFunction {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Indicator { x, eps } => {
                if !(x > 0.0 && eps > 0.0 && eps < x) {
                    return Err(Error::pre("indicator test function needs 0 < eps < x"));
                }
            }
            Family::Bump { r } => {
                if !(r > 0.0) {
                    return Err(Error::pre("bump test function needs R > 0"));
                }
            }
        }
        let quad = Quadrature::default();
        let mass = quad.integrate(psi_raw, -1.0, 1.0, TOL);
        Ok(TestFunction { family, norm: 1.0 / mass, quad })
    }

    /// Parse `indicator:X,EPS` or `bump:R`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').ok_or_else(|| Error::pre(format!("bad test function '{s}'")))?;
        let nums: core::result::Result<alloc::vec::Vec<f64>, _> = params.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|_| Error::pre(format!("bad parameters in '{s}'")))?;
        match (name.trim(), nums.as_slice()) {
            ("indicator", [x, eps]) => Self::new(Family::Indicator { x: *x, eps: *eps }),
            ("bump", [r]) => Self::new(Family::Bump { r: *r }),
            _ => Err(Error::pre(format!("unknown test function '{s}' (indicator:X,EPS or bump:R)"))),
        }
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Indicator { x, eps } => format!("indicator:{x},{eps}"),
            Family::Bump { r } => format!("bump:{r}"),
        }
    }

    fn psi(&self, s: f64) -> f64 {
        self.norm * psi_raw(s)
    }

    fn psi_deriv(&self, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s * s;
        self.psi(s) * (-2.0 * s / (d * d))
    }

    /// Distribution function of Psi.
    fn psi_cdf(&self, s: f64) -> f64 {
        if s <= -1.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else if s <= 0.0 {
            self.quad.integrate(|v| self.psi(v), -1.0, s, TOL)
        } else {
            1.0 - self.quad.integrate(|v| self.psi(v), s, 1.0, TOL)
        }
    }

    /// int Psi(s) cos(rho s) ds
    fn psi_hat(&self, rho: f64) -> f64 {
        self.quad.integrate(|s| self.psi(s) * (rho * s).cos(), -1.0, 1.0, TOL)
    }

    /// int Psi(s) cosh(y s) ds
    fn psi_hat_imag(&self, y: f64) -> f64 {
        self.quad.integrate(|s| self.psi(s) * (y * s).cosh(), -1.0, 1.0, TOL)
    }

    /// h-hat vanishes outside [-support, support].
    pub fn support(&self) -> f64 {
        match self.family {
            Family::Indicator { x, eps } => x + eps,
            Family::Bump { r } => r,
        }
    }

    pub fn hat(&self, u: f64) -> f64 {
        match self.family {
            Family::Indicator { x, eps } => self.psi_cdf((u + x) / eps) - self.psi_cdf((u - x) / eps),
            Family::Bump { r } => self.psi(u / r) / r,
        }
    }

    pub fn hat_deriv(&self, u: f64) -> f64 {
        match self.family {
            Family::Indicator { x, eps } => (self.psi((u + x) / eps) - self.psi((u - x) / eps)) / eps,
            Family::Bump { r } => self.psi_deriv(u / r) / (r * r),
        }
    }

    /// h at a real argument.
    pub fn h(&self, r: f64) -> f64 {
        match self.family {
            Family::Indicator { x, eps } => {
                let s = if r == 0.0 { 2.0 * x } else { 2.0 * (r * x).sin() / r };
                s * self.psi_hat(eps * r)
            }
            Family::Bump { r: big } => self.psi_hat(big * r),
        }
    }

    /// h(iy) for real y.
    pub fn h_imag(&self, y: f64) -> f64 {
        match self.family {
            Family::Indicator { x, eps } => {
                let s = if y == 0.0 { 2.0 * x } else { 2.0 * (y * x).sinh() / y };
                s * self.psi_hat_imag(eps * y)
            }
            Family::Bump { r } => self.psi_hat_imag(r * y),
        }
    }

    /// Breakpoints of h-hat's smoothness on [0, support].
    fn pieces(&self) -> alloc::vec::Vec<f64> {
        match self.family {
            Family::Indicator { x, eps } => alloc::vec![0.0, x - eps, x, x + eps],
            Family::Bump { r } => alloc::vec![0.0, r / 2.0, r],
        }
    }

    /// int h(r) r tanh(pi r) dr, computed as -int h-hat'(u)/sinh(u/2) du.
    pub fn identity_integral(&self) -> f64 {
        let p = self.pieces();
        let mut s = 0.0;
        for w in p.windows(2) {
            s += self.quad.integrate(|u| self.hat_deriv(u) / (u / 2.0).sinh(), w[0], w[1], TOL);
        }
        -2.0 * s
    }

    /// h-tilde(theta, 0) = (i/4) int h-hat(u) e^{-(u + i theta)/2}
    /// (e^u - e^{i theta}) / (cosh u - cos theta) du.
    pub fn h_tilde(&self, theta: f64) -> Complex64 {
        let eit = Complex64::from_polar(1.0, theta);
        let c = theta.cos();
        let f = |u: f64| {
            let pre = Complex64::new(-u / 2.0, -theta / 2.0).exp();
            pre * (Complex64::new(u.exp(), 0.0) - eit) * (self.hat(u) / (u.cosh() - c))
        };
        let p = self.pieces();
        let mut s = Complex64::new(0.0, 0.0);
        for w in p.windows(2) {
            s += self.quad.integrate_c(f, w[0], w[1], TOL);
            s += self.quad.integrate_c(f, -w[1], -w[0], TOL);
        }
        s * Complex64::new(0.0, 0.25)
    }

    /// Real part of h-tilde(theta, 0) / sin(theta / 2); the imaginary part
    /// cancels between theta and -theta.
    pub fn elliptic_kernel(&self, theta: f64) -> f64 {
        (self.h_tilde(theta) / (theta / 2.0).sin()).re
    }
}

/// Fraction of the full circle, used in reports.
pub fn turns(theta: f64) -> f64 {
    theta / (2.0 * PI)
}
