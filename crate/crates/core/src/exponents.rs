//! Exact exponent algebra: the bootstrap recursion for the two-arms
//! exponent, its fixed point, and the thresholds built from it.

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{strict_integer_above, Scalar};
use crate::Rational;

fn poly<T: Scalar>(d: u32, a: i64, b: i64, c: i64) -> T {
    let d = i64::from(d);
    T::from_i64(a * d * d + b * d + c)
}

fn check_dim(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// `γ' = 1/2 + (d-1) γ / (4d² + 6d - 6)`.
pub fn gamma_step<T: Scalar>(gamma: &T, d: u32) -> T {
    T::from_ratio(1, 2) + T::from_i64(i64::from(d) - 1) * gamma.clone() / poly(d, 4, 6, -6)
}

/// `γ_i`, starting from `γ_0 = 1/2`.
pub fn gamma_sequence<T: Scalar>(d: u32, i: usize) -> T {
    (0..i).fold(T::from_ratio(1, 2), |g, _| gamma_step(&g, d))
}

/// `γ_∞ = (2d² + 3d - 3) / (4d² + 5d - 5)`, the fixed point of [`gamma_step`].
pub fn gamma_limit<T: Scalar>(d: u32) -> T {
    poly::<T>(d, 2, 3, -3) / poly(d, 4, 5, -5)
}

/// Contraction factor `(d-1) / (4d² + 6d - 6)` of the recursion.
pub fn convergence_ratio<T: Scalar>(d: u32) -> T {
    T::from_i64(i64::from(d) - 1) / poly(d, 4, 6, -6)
}

/// `δ = γ / (2d² + 3d - 3)`, the choice of `k = n^δ` that balances the two
/// error terms.
pub fn delta_choice(gamma: &Rational, d: u32) -> Result<Rational> {
    check_dim(d)?;
    if !gamma.is_open_unit() {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0,1), got {gamma}")));
    }
    Ok(gamma / poly::<Rational>(d, 2, 3, -3))
}

/// Exponent obtained from a given `δ`: `1/2 + (d-1) δ / 2`.
pub fn gamma_from_delta<T: Scalar>(delta: &T, d: u32) -> T {
    T::from_ratio(1, 2) + T::from_i64(i64::from(d) - 1) * delta.clone() / T::from_i64(2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentTable {
    pub d: u32,
    pub gamma_limit: Rational,
    /// `(2d² + 2d - 2)(4d² + 5d - 5) / (2d² + 3d - 3)`.
    pub sm_threshold: Rational,
    /// `(3d - 1)(4d² + 5d - 5) / (2d² + 3d - 3)`.
    pub tm_threshold: Rational,
    /// `4d² + 4d - 3`.
    pub ftwoarms_exponent: Rational,
    /// `2(d - 1)d`.
    pub connect_exponent: Rational,
    /// Smallest integer strictly above `sm_threshold`.
    pub sm_integer: BigInt,
    /// Smallest integer strictly above `tm_threshold`.
    pub tm_integer: BigInt,
}

pub fn exponent_table(d: u32) -> Result<ExponentTable> {
    check_dim(d)?;
    let limit_den: Rational = poly(d, 4, 5, -5);
    let bootstrap: Rational = poly(d, 2, 3, -3);
    let sm_threshold = poly::<Rational>(d, 2, 2, -2) * &limit_den / &bootstrap;
    let tm_threshold = Rational::from_i64(3 * i64::from(d) - 1) * &limit_den / &bootstrap;
    Ok(ExponentTable {
        d,
        gamma_limit: gamma_limit(d),
        sm_integer: strict_integer_above(&sm_threshold),
        tm_integer: strict_integer_above(&tm_threshold),
        sm_threshold,
        tm_threshold,
        ftwoarms_exponent: poly(d, 4, 4, -3),
        connect_exponent: poly(d, 2, -2, 0),
    })
}

/// One printable row, fractions as `a/b` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentRow {
    pub d: u32,
    pub gamma_limit: String,
    pub sm_threshold: String,
    pub sm_integer: String,
    pub tm_threshold: String,
    pub tm_integer: String,
    pub ftwoarms_exponent: String,
    pub connect_exponent: String,
}

impl ExponentTable {
    pub fn row(&self) -> ExponentRow {
        ExponentRow {
            d: self.d,
            gamma_limit: self.gamma_limit.to_string(),
            sm_threshold: self.sm_threshold.to_string(),
            sm_integer: self.sm_integer.to_string(),
            tm_threshold: self.tm_threshold.to_string(),
            tm_integer: self.tm_integer.to_string(),
            ftwoarms_exponent: self.ftwoarms_exponent.to_string(),
            connect_exponent: self.connect_exponent.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn first_step_and_start() {
        assert_eq!(gamma_step(&q(1, 2), 2), q(23, 44));
        assert_eq!(gamma_step(&Rational::zero(), 3), q(1, 2));
        for d in 2..6 {
            assert_eq!(gamma_sequence::<Rational>(d, 0), q(1, 2));
        }
        assert_eq!(gamma_sequence::<Rational>(2, 1), q(23, 44));
    }

    #[test]
    fn limit_is_the_fixed_point() {
        for d in 2..=10 {
            let g: Rational = gamma_limit(d);
            assert_eq!(gamma_step(&g, d), g);
        }
        assert_eq!(gamma_limit::<Rational>(2), q(11, 21));
        assert_eq!(gamma_limit::<Rational>(3), q(12, 23));
    }

    #[test]
    fn geometric_convergence_from_below() {
        for d in 2..=4 {
            let limit: Rational = gamma_limit(d);
            let ratio: Rational = convergence_ratio(d);
            let mut g = q(1, 2);
            for _ in 0..200 {
                let next = gamma_step(&g, d);
                assert!(next > g && next < limit);
                assert_eq!((&next - &limit).abs(), &ratio * (&g - &limit).abs());
                g = next;
            }
        }
    }

    #[test]
    fn floating_instances_agree() {
        let exact: Rational = gamma_sequence(3, 12);
        let approx: f64 = gamma_sequence(3, 12);
        let single: f32 = gamma_sequence(3, 12);
        assert!((exact.to_f64() - approx).abs() < 1e-15);
        assert!((f64::from(single) - approx).abs() < 1e-6);
    }

    #[test]
    fn delta_choice_reproduces_the_step() {
        assert_eq!(delta_choice(&q(1, 2), 2).unwrap(), q(1, 22));
        assert_eq!(delta_choice(&q(1, 2), 3).unwrap(), q(1, 48));
        for d in 2..=6 {
            for g in [q(1, 2), q(3, 5), gamma_limit(d)] {
                let delta = delta_choice(&g, d).unwrap();
                assert_eq!(gamma_from_delta(&delta, d), gamma_step(&g, d));
            }
            let limit: Rational = gamma_limit(d);
            assert_eq!(delta_choice(&limit, d).unwrap() * poly::<Rational>(d, 2, 3, -3), limit);
        }
        assert!(delta_choice(&q(1, 1), 2).is_err());
        assert!(delta_choice(&q(0, 1), 2).is_err());
    }

    #[test]
    fn tables() {
        let t3 = exponent_table(3).unwrap();
        assert_eq!(t3.gamma_limit, q(12, 23));
        assert_eq!(t3.sm_threshold, q(253, 6));
        assert_eq!(t3.sm_integer, BigInt::from(43));
        assert_eq!(t3.tm_threshold, q(46, 3));
        assert_eq!(t3.tm_integer, BigInt::from(16));
        assert_eq!(t3.ftwoarms_exponent, q(45, 1));
        assert_eq!(t3.connect_exponent, q(12, 1));
        let t2 = exponent_table(2).unwrap();
        assert_eq!(t2.connect_exponent, q(4, 1));
        assert_eq!(t2.ftwoarms_exponent, q(21, 1));
        for d in 2..=8 {
            let t = exponent_table(d).unwrap();
            assert!(t.gamma_limit < q(1, 1));
            for v in [&t.gamma_limit, &t.sm_threshold, &t.tm_threshold, &t.ftwoarms_exponent, &t.connect_exponent] {
                assert!(v.is_positive());
            }
        }
        assert!(exponent_table(1).is_err());
    }

    #[test]
    fn denominators_outgrow_machine_words() {
        let g: Rational = gamma_sequence(2, 40);
        assert!(g.denom().bits() > 64);
    }
}
