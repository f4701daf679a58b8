use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Surrogate stand-in for the derivative of the Heaviside spike function,
/// evaluated at `u - V_th` during the backward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurrogateSpec<S: Scalar> {
    /// (1/a) on |x| < a/2, else 0.
    Rectangle { width: S },
    /// (1/g) * max(0, 1 - |x|/g).
    Triangle { half_width: S },
    /// k * sigma(kx) * (1 - sigma(kx)).
    Sigmoid { slope: S },
    /// (1+h) * N(x; 0, s^2) - h * N(x; s, (6s)^2) - h * N(x; -s, (6s)^2).
    MultiGaussian { height: S, sigma: S },
}

impl<S: Scalar> SurrogateSpec<S> {
    pub fn rectangle_default() -> Self {
        SurrogateSpec::Rectangle {
            width: S::one(),
        }
    }

    pub fn triangle_default() -> Self {
        SurrogateSpec::Triangle {
            half_width: S::one(),
        }
    }

    pub fn sigmoid_default() -> Self {
        SurrogateSpec::Sigmoid {
            slope: S::from_cfg(4.0),
        }
    }

    pub fn multi_gaussian_default() -> Self {
        SurrogateSpec::MultiGaussian {
            height: S::from_cfg(0.15),
            sigma: S::from_cfg(0.5),
        }
    }

    /// Surrogate value H(x) at membrane offset `x = u - V_th`.
    pub fn value(&self, x: S) -> S {
        match *self {
            SurrogateSpec::Rectangle { width } => {
                let half = width / S::from_cfg(2.0);
                if x.abs() < half {
                    width.recip()
                } else {
                    S::zero()
                }
            }
            SurrogateSpec::Triangle { half_width } => {
                let t = S::one() - x.abs() / half_width;
                if t > S::zero() {
                    t / half_width
                } else {
                    S::zero()
                }
            }
            SurrogateSpec::Sigmoid { slope } => {
                let s = sigmoid(slope * x);
                slope * s * (S::one() - s)
            }
            SurrogateSpec::MultiGaussian { height, sigma } => {
                let six = S::from_cfg(6.0);
                (S::one() + height) * normal_pdf(x, S::zero(), sigma)
                    - height * normal_pdf(x, sigma, six * sigma)
                    - height * normal_pdf(x, -sigma, six * sigma)
            }
        }
    }

    /// Closed-form primitive whose derivative is `value`, used by the smooth
    /// forward pass of the gradient-oracle harness. Only Sigmoid and Triangle
    /// have one in this library.
    pub fn primitive(&self, x: S) -> Result<S> {
        match *self {
            SurrogateSpec::Sigmoid { slope } => Ok(sigmoid(slope * x)),
            SurrogateSpec::Triangle { half_width } => {
                let g = half_width;
                let half = S::from_cfg(0.5);
                if x <= -g {
                    Ok(S::zero())
                } else if x >= g {
                    Ok(S::one())
                } else if x < S::zero() {
                    // integral of (1/g)(1 + t/g) from -g to x
                    Ok(half + x / g + x * x / (S::from_cfg(2.0) * g * g))
                } else {
                    Ok(half + x / g - x * x / (S::from_cfg(2.0) * g * g))
                }
            }
            _ => Err(Error::InvalidArgument(
                "smooth forward needs a surrogate with a closed-form primitive \
                 (Sigmoid or Triangle)"
                    .into(),
            )),
        }
    }
}

fn sigmoid<S: Scalar>(x: S) -> S {
    (S::one() + (-x).exp()).recip()
}

fn normal_pdf<S: Scalar>(x: S, mean: S, sd: S) -> S {
    let two_pi = S::from_cfg(std::f64::consts::TAU);
    let z = (x - mean) / sd;
    (-z * z / S::from_cfg(2.0)).exp() / (sd * two_pi.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_k4_at_zero() {
        let s = SurrogateSpec::Sigmoid { slope: 4.0f64 };
        assert!((s.value(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_values() {
        let s = SurrogateSpec::Triangle { half_width: 1.0f64 };
        assert!((s.value(0.0) - 1.0).abs() < 1e-12);
        assert_eq!(s.value(1.5), 0.0);
    }

    #[test]
    fn rectangle_outside_support() {
        let s = SurrogateSpec::Rectangle { width: 1.0f64 };
        assert_eq!(s.value(0.6), 0.0);
        assert_eq!(s.value(0.4), 1.0);
    }

    #[test]
    fn multi_gaussian_finite_everywhere() {
        let s = SurrogateSpec::<f64>::multi_gaussian_default();
        for i in -100..=100 {
            assert!(s.value(i as f64 / 10.0).is_finite());
        }
    }

    #[test]
    fn primitive_matches_value_by_finite_difference() {
        let specs = [
            SurrogateSpec::Sigmoid { slope: 4.0f64 },
            SurrogateSpec::Triangle { half_width: 0.7 },
        ];
        let h = 1e-6;
        for s in specs {
            for i in -30..=30 {
                let x = i as f64 / 10.0 + 0.013;
                let fd = (s.primitive(x + h).unwrap() - s.primitive(x - h).unwrap()) / (2.0 * h);
                assert!(
                    (fd - s.value(x)).abs() < 1e-5,
                    "primitive/value mismatch at {x}: {fd} vs {}",
                    s.value(x)
                );
            }
        }
    }

    #[test]
    fn primitive_rejects_rectangle_and_multi_gaussian() {
        assert!(SurrogateSpec::<f64>::rectangle_default()
            .primitive(0.0)
            .is_err());
        assert!(SurrogateSpec::<f64>::multi_gaussian_default()
            .primitive(0.0)
            .is_err());
    }

    #[test]
    fn sigmoid_primitive_approaches_step() {
        let s = SurrogateSpec::Sigmoid { slope: 1e6f64 };
        assert!(s.primitive(0.01).unwrap() > 0.999);
        assert!(s.primitive(-0.01).unwrap() < 0.001);
    }
}
