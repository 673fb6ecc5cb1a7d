//! Second-order forward-mode numbers.
//!
//! A [`Taylor2`] carries a value together with its gradient and (dense,
//! symmetric) Hessian with respect to `k` seed variables. Unary functions
//! propagate through the second-order chain rule
//!
//! ```text
//! ∇φ(f)  = φ'(f) ∇f
//! ∇²φ(f) = φ'(f) ∇²f + φ''(f) ∇f ∇fᵀ
//! ```
//!
//! so every derivative is exact up to rounding.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Taylor2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `k × k`.
    pub hess: Vec<f64>,
}

impl Taylor2 {
    pub fn constant(value: f64, k: usize) -> Self {
        Self {
            value,
            grad: vec![0.0; k],
            hess: vec![0.0; k * k],
        }
    }

    pub fn seed(value: f64, k: usize, slot: usize) -> Self {
        let mut out = Self::constant(value, k);
        out.grad[slot] = 1.0;
        out
    }

    fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let k = self.dim();
        let mut hess = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                hess[a * k + b] = f1 * self.hess[a * k + b] + f2 * self.grad[a] * self.grad[b];
            }
        }
        Self {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a + b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            value: self.value - other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a - b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.dim();
        let (u, v) = (self.value, other.value);
        let grad = (0..k)
            .map(|a| self.grad[a] * v + u * other.grad[a])
            .collect();
        let mut hess = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                let ab = a * k + b;
                hess[ab] = self.hess[ab] * v
                    + u * other.hess[ab]
                    + self.grad[a] * other.grad[b]
                    + self.grad[b] * other.grad[a];
            }
        }
        Self {
            value: u * v,
            grad,
            hess,
        }
    }

    /// `self / other`; the caller guarantees `other.value != 0`.
    pub fn div(&self, other: &Self) -> Self {
        let v = other.value;
        let recip = other.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
        self.mul(&recip)
    }
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_hand_derivation() {
        // f = x*y at (1, 2): grad (2, 1), hessian [[0, 1], [1, 0]]
        let x = Taylor2::seed(1.0, 2, 0);
        let y = Taylor2::seed(2.0, 2, 1);
        let f = x.mul(&y);
        assert_eq!(f.value, 2.0);
        assert_eq!(f.grad, vec![2.0, 1.0]);
        assert_eq!(f.hess, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn quotient_second_derivative() {
        // 1/x at x = 2: -1/4, 2/8
        let x = Taylor2::seed(2.0, 1, 0);
        let one = Taylor2::constant(1.0, 1);
        let f = one.div(&x);
        assert_eq!(f.value, 0.5);
        assert_eq!(f.grad[0], -0.25);
        assert_eq!(f.hess[0], 0.25);
    }
}
