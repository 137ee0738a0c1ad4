use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// A complex signal `dc + up·e^{iωt} + down·e^{-iωt}` with the carrier `ω`
/// supplied at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Harmonic {
    pub dc: Complex64,
    pub up: Complex64,
    pub down: Complex64,
}

impl Harmonic {
    pub const ZERO: Harmonic = Harmonic {
        dc: Complex64::new(0.0, 0.0),
        up: Complex64::new(0.0, 0.0),
        down: Complex64::new(0.0, 0.0),
    };

    pub fn constant(dc: Complex64) -> Self {
        Self { dc, ..Self::ZERO }
    }

    pub fn real(dc: f64) -> Self {
        Self::constant(Complex64::new(dc, 0.0))
    }

    pub fn conj(self) -> Self {
        Self {
            dc: self.dc.conj(),
            up: self.down.conj(),
            down: self.up.conj(),
        }
    }

    pub fn eval(&self, t: f64, omega: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, omega * t);
        self.dc + self.up * e + self.down * e.conj()
    }

    pub fn is_static(&self) -> bool {
        self.up == Complex64::new(0.0, 0.0) && self.down == Complex64::new(0.0, 0.0)
    }
}

impl Add for Harmonic {
    type Output = Harmonic;
    fn add(self, o: Harmonic) -> Harmonic {
        Harmonic {
            dc: self.dc + o.dc,
            up: self.up + o.up,
            down: self.down + o.down,
        }
    }
}

impl Sub for Harmonic {
    type Output = Harmonic;
    fn sub(self, o: Harmonic) -> Harmonic {
        self + (-o)
    }
}

impl Neg for Harmonic {
    type Output = Harmonic;
    fn neg(self) -> Harmonic {
        self * -1.0
    }
}

impl Mul<Complex64> for Harmonic {
    type Output = Harmonic;
    fn mul(self, k: Complex64) -> Harmonic {
        Harmonic {
            dc: self.dc * k,
            up: self.up * k,
            down: self.down * k,
        }
    }
}

impl Mul<f64> for Harmonic {
    type Output = Harmonic;
    fn mul(self, k: f64) -> Harmonic {
        self * Complex64::new(k, 0.0)
    }
}
