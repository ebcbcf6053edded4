//! First-order dual numbers `a + bε`, `ε² = 0`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub derivative: f64,
}

impl Dual {
    pub fn new(value: f64, derivative: f64) -> Self {
        Self { value, derivative }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    pub fn variable(value: f64) -> Self {
        Self::new(value, 1.0)
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.derivative * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.derivative * self.value.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.derivative * e)
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Self::new(s, self.derivative / (2.0 * s))
    }

    /// `self^exponent`. A constant exponent uses the power rule, so negative
    /// bases with integer exponents stay differentiable.
    pub fn pow(self, exponent: Self) -> Self {
        let value = super::eval::real_pow(self.value, exponent.value);
        if exponent.derivative == 0.0 {
            let derivative = if exponent.value == 0.0 || self.derivative == 0.0 {
                0.0
            } else {
                exponent.value * super::eval::real_pow(self.value, exponent.value - 1.0) * self.derivative
            };
            Self::new(value, derivative)
        } else {
            // d(u^v) = u^v (v' ln u + v u'/u)
            let derivative =
                value * (exponent.derivative * self.value.ln() + exponent.value * self.derivative / self.value);
            Self::new(value, derivative)
        }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.value * rhs.derivative + self.derivative * rhs.value,
        )
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(
            self.value / rhs.value,
            (self.derivative * rhs.value - self.value * rhs.derivative) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.derivative)
    }
}
