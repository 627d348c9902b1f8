//! Log-domain scalars: signed real values `LogReal` and complex values
//! `LogComplex` stored as (log-modulus, phase). All kernel sums and radial
//! integrals are accumulated in this representation so that quantities like
//! e^{-nV} z^{2j} / h_j stay representable across the whole (n, j) range.

use num_complex::Complex64;

/// Signed real number x = sign * exp(ln). `sign == 0` encodes exact zero
/// (with `ln = -inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReal {
    pub ln: f64,
    pub sign: i8,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        ln: f64::NEG_INFINITY,
        sign: 0,
    };

    pub fn from_ln(ln: f64) -> Self {
        LogReal { ln, sign: 1 }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                ln: x.abs().ln(),
                sign: if x > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Linear-domain value; may overflow to +/-inf or underflow to 0.
    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * self.ln.exp()
    }

    pub fn mul(&self, other: &LogReal) -> LogReal {
        if self.sign == 0 || other.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal {
            ln: self.ln + other.ln,
            sign: self.sign * other.sign,
        }
    }

    pub fn div(&self, other: &LogReal) -> LogReal {
        assert!(other.sign != 0, "division by log-domain zero");
        if self.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal {
            ln: self.ln - other.ln,
            sign: self.sign * other.sign,
        }
    }

    pub fn add(&self, other: &LogReal) -> LogReal {
        if self.sign == 0 {
            return *other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (big, small) = if self.ln >= other.ln {
            (self, other)
        } else {
            (other, self)
        };
        let t = (small.sign * big.sign) as f64 * (small.ln - big.ln).exp();
        let s = 1.0 + t;
        if s == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                ln: big.ln + s.abs().ln(),
                sign: big.sign * if s > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn sub(&self, other: &LogReal) -> LogReal {
        self.add(&LogReal {
            ln: other.ln,
            sign: -other.sign,
        })
    }
}

/// Complex number z = exp(ln) * e^{i phase}. Zero is `ln = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub ln: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(ln: f64, phase: f64) -> Self {
        LogComplex { ln, phase }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            LogComplex::ZERO
        } else {
            LogComplex {
                ln: z.norm().ln(),
                phase: z.arg(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.ln.exp(), self.phase)
    }

    pub fn mul(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            ln: self.ln + other.ln,
            phase: wrap_phase(self.phase + other.phase),
        }
    }

    pub fn conj(&self) -> LogComplex {
        LogComplex {
            ln: self.ln,
            phase: -self.phase,
        }
    }

    pub fn div_ln(&self, ln: f64) -> LogComplex {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            ln: self.ln - ln,
            phase: self.phase,
        }
    }

    /// Real part in linear domain relative to a caller-chosen offset:
    /// returns Re(z) * exp(-offset).
    pub fn re_scaled(&self, offset: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        (self.ln - offset).exp() * self.phase.cos()
    }

    pub fn abs_scaled(&self, offset: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        (self.ln - offset).exp()
    }
}

fn wrap_phase(p: f64) -> f64 {
    if p > std::f64::consts::PI {
        p - 2.0 * std::f64::consts::PI
    } else if p < -std::f64::consts::PI {
        p + 2.0 * std::f64::consts::PI
    } else {
        p
    }
}

/// Phase-coherent log-domain accumulator for sums of complex terms given as
/// (log-modulus, phase). The running sum is kept in linear domain relative to
/// the largest term seen so far, so cancellation is handled correctly and no
/// intermediate ever overflows.
#[derive(Debug, Clone)]
pub struct LogComplexSum {
    anchor: f64,
    acc: Complex64,
}

/// Terms more than this far below the running anchor contribute < 1e-18
/// relatively and are dropped.
const DROP_LN: f64 = 43.0;

impl LogComplexSum {
    pub fn new() -> Self {
        LogComplexSum {
            anchor: f64::NEG_INFINITY,
            acc: Complex64::new(0.0, 0.0),
        }
    }

    pub fn push(&mut self, ln: f64, phase: f64) {
        if ln == f64::NEG_INFINITY {
            return;
        }
        if ln > self.anchor {
            let scale = if self.anchor == f64::NEG_INFINITY {
                0.0
            } else {
                (self.anchor - ln).exp()
            };
            self.acc *= scale;
            self.anchor = ln;
        } else if ln < self.anchor - DROP_LN {
            return;
        }
        self.acc += Complex64::from_polar((ln - self.anchor).exp(), phase);
    }

    pub fn value(&self) -> LogComplex {
        let m = self.acc.norm();
        if m == 0.0 || self.anchor == f64::NEG_INFINITY {
            LogComplex::ZERO
        } else {
            LogComplex {
                ln: self.anchor + m.ln(),
                phase: self.acc.arg(),
            }
        }
    }
}

impl Default for LogComplexSum {
    fn default() -> Self {
        Self::new()
    }
}

/// Log-sum-exp for nonnegative terms given by their logs.
pub fn log_sum_exp(lns: impl IntoIterator<Item = f64>) -> f64 {
    let mut anchor = f64::NEG_INFINITY;
    let mut acc = 0.0f64;
    for ln in lns {
        if ln == f64::NEG_INFINITY {
            continue;
        }
        if ln > anchor {
            acc = if anchor == f64::NEG_INFINITY {
                0.0
            } else {
                acc * (anchor - ln).exp()
            };
            anchor = ln;
        } else if ln < anchor - DROP_LN {
            continue;
        }
        acc += (ln - anchor).exp();
    }
    if anchor == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        anchor + acc.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logreal_roundtrip_and_arith() {
        let a = LogReal::from_f64(3.5);
        let b = LogReal::from_f64(-1.25);
        assert!((a.to_f64() - 3.5).abs() < 1e-15);
        assert!((a.mul(&b).to_f64() + 4.375).abs() < 1e-14);
        assert!((a.add(&b).to_f64() - 2.25).abs() < 1e-14);
        assert!((a.sub(&b).to_f64() - 4.75).abs() < 1e-14);
        assert!((a.div(&b).to_f64() + 2.8).abs() < 1e-14);
        assert!(LogReal::from_f64(1.0).sub(&LogReal::from_f64(1.0)).is_zero());
        assert!(a.mul(&LogReal::ZERO).is_zero());
    }

    #[test]
    fn logcomplex_sum_matches_direct() {
        let terms: Vec<Complex64> = (0..50)
            .map(|k| Complex64::from_polar((k as f64 * 0.3).exp(), k as f64 * 0.7))
            .collect();
        let direct: Complex64 = terms.iter().sum();
        let mut s = LogComplexSum::new();
        for t in &terms {
            let lc = LogComplex::from_complex(*t);
            s.push(lc.ln, lc.phase);
        }
        let got = s.value().to_complex();
        assert!((got - direct).norm() / direct.norm() < 1e-13);
    }

    #[test]
    fn logcomplex_sum_huge_dynamic_range() {
        // Terms at e^{1000} scale plus negligible ones: no overflow, exact anchor.
        let mut s = LogComplexSum::new();
        s.push(-2000.0, 0.3);
        s.push(1000.0, 0.0);
        s.push(1000.0 - (2.0f64).ln(), std::f64::consts::PI);
        let v = s.value();
        // e^1000 - e^1000/2 = e^1000/2
        assert!((v.ln - (1000.0 - (2.0f64).ln())).abs() < 1e-12);
        assert!(v.phase.abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_basic() {
        let got = log_sum_exp([0.0, (2.0f64).ln(), f64::NEG_INFINITY]);
        assert!((got - (3.0f64).ln()).abs() < 1e-14);
    }
}
