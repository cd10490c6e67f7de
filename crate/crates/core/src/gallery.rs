//! Canonical sequence families used by the docs, the CLI and the acceptance suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::test_functions::{symmetrize, DomainTag, Point, PointConfig};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceFamily {
    /// `lambda_j = 1 - base^j`, `j >= 1`.
    ExponentialRadial { base: f64 },
    /// `lambda_j = 1 - j^{-power}`, `j >= 1` (so `lambda_1 = 0`).
    PolynomialRadial { power: f64 },
    /// `(lambda_j, lambda_j)` on the bidisc.
    DiagonalBidisc { inner: Box<SequenceFamily> },
    /// `symmetrize(a_j, b_j)` for two radial disc sequences.
    SymmetrizedPairs {
        first: Box<SequenceFamily>,
        second: Box<SequenceFamily>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub family: SequenceFamily,
    pub depth: usize,
}

impl SequenceSpec {
    pub fn new(family: SequenceFamily, depth: usize) -> Self {
        Self { family, depth }
    }
}

impl SequenceFamily {
    fn radial(&self, depth: usize) -> Result<Vec<f64>> {
        match *self {
            SequenceFamily::ExponentialRadial { base } => {
                if !(base > 0.0 && base < 1.0) {
                    return Err(Error::SpecError(format!(
                        "ExponentialRadial base must lie in (0, 1), got {base}"
                    )));
                }
                Ok((1..=depth).map(|j| 1.0 - base.powi(j as i32)).collect())
            }
            SequenceFamily::PolynomialRadial { power } => {
                if !(power > 0.0 && power.is_finite()) {
                    return Err(Error::SpecError(format!(
                        "PolynomialRadial power must be positive, got {power}"
                    )));
                }
                Ok((1..=depth).map(|j| 1.0 - (j as f64).powf(-power)).collect())
            }
            _ => Err(Error::SpecError(
                "expected a radial disc family (ExponentialRadial or PolynomialRadial)".into(),
            )),
        }
    }
}

pub fn generate(spec: &SequenceSpec) -> Result<PointConfig> {
    if spec.depth == 0 {
        return Err(Error::SpecError("depth must be at least 1".into()));
    }
    let real = |x: f64| C64::new(x, 0.0);
    let points = match &spec.family {
        SequenceFamily::ExponentialRadial { .. } | SequenceFamily::PolynomialRadial { .. } => {
            let r = spec.family.radial(spec.depth)?;
            PointConfig::new(
                DomainTag::Disc,
                r.into_iter()
                    .map(|x| Point::disc(real(x)))
                    .collect::<Result<_>>()?,
            )
        }
        SequenceFamily::DiagonalBidisc { inner } => {
            let r = inner.radial(spec.depth)?;
            let pts = r
                .into_iter()
                .map(|x| Point::new(DomainTag::Polydisc(2), vec![real(x), real(x)]))
                .collect::<Result<_>>()?;
            PointConfig::new(DomainTag::Polydisc(2), pts)
        }
        SequenceFamily::SymmetrizedPairs { first, second } => {
            let (a, b) = (first.radial(spec.depth)?, second.radial(spec.depth)?);
            let pts = a
                .into_iter()
                .zip(b)
                .map(|(x, y)| symmetrize(real(x), real(y)))
                .collect::<Result<_>>()?;
            PointConfig::new(DomainTag::SymmetrizedBidisc, pts)
        }
    };
    let points = points.map_err(|e| Error::SpecError(e.to_string()))?;
    points
        .check_distinct(1e-12)
        .map_err(|e| Error::SpecError(e.to_string()))?;
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exp(base: f64) -> SequenceFamily {
        SequenceFamily::ExponentialRadial { base }
    }

    fn reals(p: &PointConfig) -> Vec<Vec<f64>> {
        p.coords()
            .into_iter()
            .map(|c| c.iter().map(|z| z.re).collect())
            .collect()
    }

    #[test]
    fn examples() {
        let p = generate(&SequenceSpec::new(exp(0.5), 3)).unwrap();
        assert_eq!(reals(&p), vec![vec![0.5], vec![0.75], vec![0.875]]);

        let p = generate(&SequenceSpec::new(
            SequenceFamily::PolynomialRadial { power: 1.0 },
            3,
        ))
        .unwrap();
        let r = reals(&p);
        assert_eq!(r[0], vec![0.0]);
        assert_eq!(r[1], vec![0.5]);
        assert!((r[2][0] - 2.0 / 3.0).abs() < 1e-15);

        let p = generate(&SequenceSpec::new(
            SequenceFamily::DiagonalBidisc {
                inner: Box::new(exp(0.5)),
            },
            2,
        ))
        .unwrap();
        assert_eq!(p.domain(), DomainTag::Polydisc(2));
        assert_eq!(reals(&p), vec![vec![0.5, 0.5], vec![0.75, 0.75]]);
    }

    #[test]
    fn symmetrized_pairs() {
        let fam = SequenceFamily::SymmetrizedPairs {
            first: Box::new(exp(0.5)),
            second: Box::new(SequenceFamily::PolynomialRadial { power: 2.0 }),
        };
        let p = generate(&SequenceSpec::new(fam, 4)).unwrap();
        assert_eq!(p.domain(), DomainTag::SymmetrizedBidisc);
        // (0.5, 0) -> (s, p) = (0.5, 0)
        assert_eq!(reals(&p)[0], vec![0.5, 0.0]);
    }

    #[test]
    fn errors() {
        for bad in [
            SequenceSpec::new(exp(1.0), 3),
            SequenceSpec::new(exp(0.0), 3),
            SequenceSpec::new(exp(0.5), 0),
            SequenceSpec::new(SequenceFamily::PolynomialRadial { power: -1.0 }, 3),
            SequenceSpec::new(
                SequenceFamily::DiagonalBidisc {
                    inner: Box::new(SequenceFamily::DiagonalBidisc {
                        inner: Box::new(exp(0.5)),
                    }),
                },
                3,
            ),
        ] {
            assert!(
                matches!(generate(&bad), Err(Error::SpecError(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = SequenceSpec::new(
            SequenceFamily::DiagonalBidisc {
                inner: Box::new(exp(0.25)),
            },
            5,
        );
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SequenceSpec>(&json).unwrap(), spec);
    }

    proptest! {
        #[test]
        fn strictly_increasing_in_modulus(base in 0.05f64..0.95, power in 0.2f64..3.0, depth in 1usize..40) {
            for fam in [exp(base), SequenceFamily::PolynomialRadial { power }] {
                let Ok(p) = generate(&SequenceSpec::new(fam, depth)) else {
                    // Deep sequences can round to 1.0, which is outside the disc.
                    continue;
                };
                let m: Vec<f64> = p.points().iter().map(|x| x.coords()[0].norm()).collect();
                prop_assert!(m.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
