use std::ops::{Add, Div, Mul, Neg, Sub};

/// Forward-mode scalar: a value together with its partial derivatives along
/// every seeded direction.
///
/// All duals taking part in one computation share the same number of
/// partials. Mixing lengths is a programming error and panics.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub partials: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64, dims: usize) -> Self {
        Dual {
            value,
            partials: vec![0.0; dims],
        }
    }

    /// Independent variable seeded along direction `seed` out of `dims`.
    pub fn variable(value: f64, dims: usize, seed: usize) -> Self {
        assert!(
            seed < dims,
            "seed {seed} out of range for {dims} directions"
        );
        let mut partials = vec![0.0; dims];
        partials[seed] = 1.0;
        Dual { value, partials }
    }

    pub fn dims(&self) -> usize {
        self.partials.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.partials.iter().all(|p| p.is_finite())
    }

    /// Applies the chain rule for a unary function with value `f` and derivative `df`.
    fn chain(&self, f: f64, df: f64) -> Dual {
        Dual {
            value: f,
            partials: self.partials.iter().map(|p| df * p).collect(),
        }
    }

    fn zip(&self, other: &Dual, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        assert_eq!(
            self.dims(),
            other.dims(),
            "dual numbers with different partial lengths"
        );
        self.partials
            .iter()
            .zip(&other.partials)
            .map(|(a, b)| f(*a, *b))
            .collect()
    }

    pub fn sin(&self) -> Dual {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(&self) -> Dual {
        self.chain(self.value.cos(), -self.value.sin())
    }

    pub fn tan(&self) -> Dual {
        let t = self.value.tan();
        self.chain(t, 1.0 + t * t)
    }

    pub fn exp(&self) -> Dual {
        let e = self.value.exp();
        self.chain(e, e)
    }

    pub fn ln(&self) -> Dual {
        self.chain(self.value.ln(), 1.0 / self.value)
    }

    pub fn sqrt(&self) -> Dual {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn powi(&self, n: i32) -> Dual {
        let df = if n == 0 {
            0.0
        } else {
            f64::from(n) * self.value.powi(n - 1)
        };
        self.chain(self.value.powi(n), df)
    }

    /// `atan2(self, x)`, with `self` as the ordinate.
    pub fn atan2(&self, x: &Dual) -> Dual {
        let (y0, x0) = (self.value, x.value);
        let r2 = x0 * x0 + y0 * y0;
        Dual {
            value: y0.atan2(x0),
            partials: self.zip(x, |dy, dx| (x0 * dy - y0 * dx) / r2),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value + rhs.value,
            partials: self.zip(&rhs, |a, b| a + b),
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value - rhs.value,
            partials: self.zip(&rhs, |a, b| a - b),
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Dual) -> Dual {
        let (u, v) = (self.value, rhs.value);
        Dual {
            value: u * v,
            partials: self.zip(&rhs, |du, dv| du * v + u * dv),
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Dual) -> Dual {
        let (u, v) = (self.value, rhs.value);
        Dual {
            value: u / v,
            partials: self.zip(&rhs, |du, dv| (du * v - u * dv) / (v * v)),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            value: -self.value,
            partials: self.partials.into_iter().map(|p| -p).collect(),
        }
    }
}
