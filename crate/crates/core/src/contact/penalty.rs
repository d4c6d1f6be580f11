//! Penalty force laws `f(g) >= 0` acting against penetration.

use crate::scalar::Real;

/// Penalty law mapping gap `g` to a compressive force magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyLaw<T> {
    /// `f = -epsilon g` for `g <= 0`.
    Linear { epsilon: T },
    /// Linear below zero gap, quadratic transition up to `g_bar`, zero beyond.
    Quadratic { epsilon: T, g_bar: T },
}

impl<T: Real> PenaltyLaw<T> {
    pub fn epsilon(&self) -> T {
        match *self {
            Self::Linear { epsilon } | Self::Quadratic { epsilon, .. } => epsilon,
        }
    }

    /// Gap beyond which the force vanishes.
    pub fn cutoff(&self) -> T {
        match *self {
            Self::Linear { .. } => T::zero(),
            Self::Quadratic { g_bar, .. } => g_bar,
        }
    }

    /// Same law with a different stiffness.
    pub fn with_epsilon(&self, epsilon: T) -> Self {
        match *self {
            Self::Linear { .. } => Self::Linear { epsilon },
            Self::Quadratic { g_bar, .. } => Self::Quadratic { epsilon, g_bar },
        }
    }

    /// Force magnitude and its derivative with respect to the gap.
    pub fn evaluate(&self, g: T) -> (T, T) {
        match *self {
            Self::Linear { epsilon } => {
                if g <= T::zero() {
                    (-epsilon * g, -epsilon)
                } else {
                    (T::zero(), T::zero())
                }
            }
            Self::Quadratic { epsilon, g_bar } => {
                let f_bar = epsilon * g_bar * T::lit(0.5);
                if g <= T::zero() {
                    (f_bar - epsilon * g, -epsilon)
                } else if g <= g_bar {
                    let c = (epsilon * g_bar - f_bar) / (g_bar * g_bar);
                    (c * g * g - epsilon * g + f_bar, T::lit(2.0) * c * g - epsilon)
                } else {
                    (T::zero(), T::zero())
                }
            }
        }
    }

    pub fn force(&self, g: T) -> T {
        self.evaluate(g).0
    }

    /// Whether the law produces a nonzero force or stiffness at `g`.
    pub fn is_active(&self, g: T) -> bool {
        match *self {
            Self::Linear { .. } => g <= T::zero(),
            Self::Quadratic { g_bar, .. } => g <= g_bar,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_law_values() {
        let law = PenaltyLaw::Linear { epsilon: 500.0f64 };
        assert_eq!(law.force(-0.002), 1.0);
        assert_eq!(law.force(0.001), 0.0);
    }

    #[test]
    fn quadratic_law_is_c1_at_both_breakpoints() {
        let (eps, gb) = (1000.0f64, 0.001);
        let law = PenaltyLaw::Quadratic { epsilon: eps, g_bar: gb };
        let (f0, d0) = law.evaluate(0.0);
        assert_relative_eq!(f0, eps * gb / 2.0, max_relative = 1e-14);
        assert_relative_eq!(d0, -eps, max_relative = 1e-14);
        let (f1, d1) = law.evaluate(gb);
        assert!(f1.abs() < 1e-12 && d1.abs() < 1e-9);
        let h = 1e-9;
        let (fl, _) = law.evaluate(-h);
        let (fr, _) = law.evaluate(h);
        assert_relative_eq!((fr - fl) / (2.0 * h), -eps, max_relative = 1e-5);
    }
}
