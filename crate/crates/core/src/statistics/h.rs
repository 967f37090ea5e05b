use crate::error::{Error, Result};
use crate::lattice::Point;
use crate::sampler::Configuration;
use crate::scalar::Scalar;

fn check_unit<T: Scalar>(p: &T) -> Result<()> {
    if p.is_open_unit() {
        Ok(())
    } else {
        Err(Error::InvalidProbability(format!("{p:?}")))
    }
}

/// `h` of a set with `open` open and `closed` closed sites:
/// `closed/(1-p) - open/p`.
pub fn h_from_counts<T: Scalar>(open: u64, closed: u64, p: &T) -> Result<T> {
    check_unit(p)?;
    let q = T::one() - p.clone();
    let closed = T::from_i64(closed as i64);
    let open = T::from_i64(open as i64);
    Ok(closed / q - open / p.clone())
}

/// `h(A) = |closed ∩ A|/(1-p) - |open ∩ A|/p` for sites `A` inside the
/// configuration box. Instantiate with a rational `p` for exact values.
pub fn h_statistic<'a, T, I>(sites: I, config: &Configuration, p: &T) -> Result<T>
where
    T: Scalar,
    I: IntoIterator<Item = &'a Point>,
{
    let (mut open, mut closed) = (0u64, 0u64);
    for x in sites {
        match config.status(x) {
            Some(true) => open += 1,
            Some(false) => closed += 1,
            None => {
                return Err(Error::OutsideBox {
                    point: *x,
                    bbox: *config.bbox(),
                })
            }
        }
    }
    h_from_counts(open, closed, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::sampler::ConfigBuilder;
    use crate::Rational;

    #[test]
    fn single_sites_and_symmetric_pair() {
        let b = BoxSpec::centered(2, 1).unwrap();
        let o = Point::origin(2).unwrap();
        let e = Point::new(&[1, 0]).unwrap();
        let config = ConfigBuilder::closed(&b).open_site(&o).unwrap().build();
        let p = Rational::from_ratio(1, 3);
        assert_eq!(h_statistic([&e], &config, &p).unwrap(), Rational::from_ratio(3, 2));
        assert_eq!(h_statistic([&o], &config, &p).unwrap(), Rational::from_i64(-3));
        let half = Rational::from_ratio(1, 2);
        assert_eq!(h_statistic([&o, &e], &config, &half).unwrap(), Rational::from_i64(0));
        assert!((h_statistic([&o, &e], &config, &0.5f64).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_probability_and_foreign_sites() {
        let b = BoxSpec::centered(2, 1).unwrap();
        let config = ConfigBuilder::closed(&b).build();
        let o = Point::origin(2).unwrap();
        assert!(h_statistic([&o], &config, &1.0f64).is_err());
        assert!(h_statistic([&o], &config, &0.0f32).is_err());
        let far = Point::new(&[5, 0]).unwrap();
        assert!(h_statistic([&far], &config, &0.5f64).is_err());
    }
}
