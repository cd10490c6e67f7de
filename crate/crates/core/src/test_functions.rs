//! Domains, points and the built-in test-function families.
//!
//! * disc: `{z}`
//! * polydisc of dimension `n`: the coordinate functions `{z_1, ..., z_n}`
//! * symmetrized bidisc `G2 = {(z1 + z2, z1 z2)}`: the functions
//!   `psi_alpha(s, p) = (2 alpha p - s) / (2 - alpha s)` with `alpha` sampled on
//!   a uniform grid of the unit circle.
//!
//! The second test-function axiom (the family generates the algebra on finite
//! sets) holds for all three families and is not checked numerically; only the
//! sup-modulus axiom is.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_GRID_SIZE: usize = 64;

/// Grid used by [`Point::new`]'s reporting of the worst `alpha` on `G2`.
pub const VALIDATION_GRID: usize = 256;

/// Denominators `|2 - alpha s|` below this are treated as singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainTag {
    Disc,
    Polydisc(usize),
    SymmetrizedBidisc,
}

impl DomainTag {
    pub fn coordinate_count(self) -> usize {
        match self {
            DomainTag::Disc => 1,
            DomainTag::Polydisc(n) => n,
            DomainTag::SymmetrizedBidisc => 2,
        }
    }

    /// Disc and `Polydisc(1)` share membership logic.
    pub fn is_polydisc_like(self) -> bool {
        matches!(self, DomainTag::Disc | DomainTag::Polydisc(_))
    }

    fn validate(self) -> Result<()> {
        match self {
            DomainTag::Polydisc(0) => Err(Error::InvalidInput(
                "polydisc dimension must be >= 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainTag::Disc => write!(f, "disc"),
            DomainTag::Polydisc(n) => write!(f, "polydisc({n})"),
            DomainTag::SymmetrizedBidisc => write!(f, "g2"),
        }
    }
}

fn format_complex(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// A validated point of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    domain: DomainTag,
    coords: Vec<C64>,
}

impl Point {
    /// Validates eagerly: polydisc coordinates must lie in the open disc and
    /// `G2` points must satisfy `|s - conj(s) p| < 1 - |p|^2` (the
    /// Agler-Young characterization, equivalent to `|psi_alpha| < 1` for every
    /// `alpha` in the closed disc).
    pub fn new(domain: DomainTag, coords: Vec<C64>) -> Result<Self> {
        domain.validate()?;
        if coords.len() != domain.coordinate_count() {
            return Err(Error::DimensionMismatch {
                expected: domain.coordinate_count(),
                found: coords.len(),
            });
        }
        if coords
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput(
                "point coordinates must be finite".into(),
            ));
        }
        match domain {
            DomainTag::Disc | DomainTag::Polydisc(_) => {
                if let Some(z) = coords.iter().find(|z| z.norm() >= 1.0) {
                    return Err(Error::NotInDisc {
                        value: format_complex(*z),
                    });
                }
            }
            DomainTag::SymmetrizedBidisc => {
                let (s, p) = (coords[0], coords[1]);
                let lhs = (s - s.conj() * p).norm();
                let rhs = 1.0 - p.norm_sqr();
                if !(s.norm() < 2.0 && lhs < rhs) {
                    let m = membership_check(domain, &coords, VALIDATION_GRID);
                    return Err(Error::NotInDomain {
                        index: 0,
                        modulus: m.worst_modulus,
                    });
                }
            }
        }
        Ok(Self { domain, coords })
    }

    pub fn disc(z: C64) -> Result<Self> {
        Self::new(DomainTag::Disc, vec![z])
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// The two disc points whose symmetrization is this `G2` point (roots of
    /// `t^2 - s t + p`), ordered by modulus.
    pub fn unsymmetrize(&self) -> Option<(C64, C64)> {
        if self.domain != DomainTag::SymmetrizedBidisc {
            return None;
        }
        let (s, p) = (self.coords[0], self.coords[1]);
        let disc = (s * s - p * 4.0).sqrt();
        let a = (s + disc) * 0.5;
        let b = (s - disc) * 0.5;
        Some(if a.norm() <= b.norm() { (a, b) } else { (b, a) })
    }

    /// Largest chordal distance between corresponding coordinates.
    pub fn chordal_distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(z, w)| (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt())
            .fold(0.0, f64::max)
    }
}

/// A finite list of points of one domain: a truncated sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    domain: DomainTag,
    points: Vec<Point>,
}

impl PointConfig {
    pub fn new(domain: DomainTag, points: Vec<Point>) -> Result<Self> {
        domain.validate()?;
        if let Some(p) = points.iter().find(|p| p.domain != domain) {
            return Err(Error::DomainMismatch {
                expected: domain.to_string(),
                found: p.domain.to_string(),
            });
        }
        Ok(Self { domain, points })
    }

    pub fn from_coords(domain: DomainTag, coords: Vec<Vec<C64>>) -> Result<Self> {
        let points = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                Point::new(domain, c).map_err(|e| match e {
                    Error::NotInDomain { modulus, .. } => Error::NotInDomain { index: i, modulus },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, points)
    }

    pub fn disc(zs: &[C64]) -> Result<Self> {
        Self::from_coords(DomainTag::Disc, zs.iter().map(|&z| vec![z]).collect())
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The first `k` points.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            domain: self.domain,
            points: self.points[..k.min(self.len())].to_vec(),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            domain: self.domain,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    /// Rejects pairs closer than `tol` in chordal distance.
    pub fn check_distinct(&self, tol: f64) -> Result<()> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = self.points[i].chordal_distance(&self.points[j]);
                if d < tol {
                    return Err(Error::DuplicatePoints {
                        first: i,
                        second: j,
                        distance: d,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn coords(&self) -> Vec<Vec<C64>> {
        self.points.iter().map(|p| p.coords.clone()).collect()
    }
}

/// One member of a test-function family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Descriptor {
    /// Coordinate function `z_{i+1}` (0-based index).
    Coordinate(usize),
    /// `psi_alpha(s, p) = (2 alpha p - s) / (2 - alpha s)`, `|alpha| <= 1`.
    MagicFunction(C64),
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Coordinate(i) => write!(f, "z{}", i + 1),
            Descriptor::MagicFunction(a) => write!(f, "psi[alpha={:.6}{:+.6}i]", a.re, a.im),
        }
    }
}

/// JSON form of a family: `{"domain": "disc"|"polydisc"|"g2", "n": .., "grid_size": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionFamily {
    domain: DomainTag,
    descriptors: Vec<Descriptor>,
    grid_size: Option<usize>,
}

impl TestFunctionFamily {
    pub fn disc() -> Self {
        Self {
            domain: DomainTag::Disc,
            descriptors: vec![Descriptor::Coordinate(0)],
            grid_size: None,
        }
    }

    pub fn polydisc(n: usize) -> Result<Self> {
        DomainTag::Polydisc(n).validate()?;
        Ok(Self {
            domain: DomainTag::Polydisc(n),
            descriptors: (0..n).map(Descriptor::Coordinate).collect(),
            grid_size: None,
        })
    }

    /// `psi_alpha` for `alpha = exp(2 pi i k / grid_size)`, `k = 0..grid_size`.
    pub fn g2(grid_size: usize) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::InvalidInput("grid_size must be positive".into()));
        }
        Ok(Self {
            domain: DomainTag::SymmetrizedBidisc,
            descriptors: circle_grid(grid_size)
                .into_iter()
                .map(Descriptor::MagicFunction)
                .collect(),
            grid_size: Some(grid_size),
        })
    }

    /// A hand-picked family; every descriptor must make sense on `domain`.
    pub fn with_descriptors(domain: DomainTag, descriptors: Vec<Descriptor>) -> Result<Self> {
        domain.validate()?;
        if descriptors.is_empty() {
            return Err(Error::InvalidInput(
                "test-function family must be nonempty".into(),
            ));
        }
        for d in &descriptors {
            match (*d, domain) {
                (Descriptor::Coordinate(i), DomainTag::Disc | DomainTag::Polydisc(_))
                    if i < domain.coordinate_count() => {}
                (Descriptor::MagicFunction(a), DomainTag::SymmetrizedBidisc)
                    if a.norm() <= 1.0 + 1e-15 => {}
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "descriptor {d} is not a test function on {domain}"
                    )));
                }
            }
        }
        Ok(Self {
            domain,
            descriptors,
            grid_size: None,
        })
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        match spec.domain.as_str() {
            "disc" => Ok(Self::disc()),
            "polydisc" => Self::polydisc(spec.n.unwrap_or(2)),
            "g2" => Self::g2(spec.grid_size.unwrap_or(DEFAULT_GRID_SIZE)),
            other => Err(Error::InvalidInput(format!("unknown domain '{other}'"))),
        }
    }

    pub fn to_spec(&self) -> FamilySpec {
        match self.domain {
            DomainTag::Disc => FamilySpec {
                domain: "disc".into(),
                n: None,
                grid_size: None,
            },
            DomainTag::Polydisc(n) => FamilySpec {
                domain: "polydisc".into(),
                n: Some(n),
                grid_size: None,
            },
            DomainTag::SymmetrizedBidisc => FamilySpec {
                domain: "g2".into(),
                n: None,
                grid_size: Some(self.grid_size.unwrap_or(self.descriptors.len())),
            },
        }
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn grid_size(&self) -> Option<usize> {
        self.grid_size
    }

    fn check_domain(&self, x: &Point) -> Result<()> {
        if x.domain != self.domain {
            return Err(Error::DomainMismatch {
                expected: self.domain.to_string(),
                found: x.domain.to_string(),
            });
        }
        Ok(())
    }

    /// `psi(x)` for one descriptor.
    pub fn evaluate(&self, descriptor: &Descriptor, x: &Point) -> Result<C64> {
        self.check_domain(x)?;
        evaluate_raw(descriptor, &x.coords)
    }

    /// `E(x)`: the vector of all test-function values at `x`, in descriptor
    /// order.
    pub fn e_vector(&self, x: &Point) -> Result<Vec<C64>> {
        self.check_domain(x)?;
        self.descriptors
            .iter()
            .map(|d| evaluate_raw(d, &x.coords))
            .collect()
    }

    /// `values[t][i] = psi_t(w_i)`.
    pub fn evaluate_all(&self, points: &PointConfig) -> Result<Vec<Vec<C64>>> {
        if points.domain() != self.domain {
            return Err(Error::DomainMismatch {
                expected: self.domain.to_string(),
                found: points.domain().to_string(),
            });
        }
        self.descriptors
            .iter()
            .map(|d| {
                points
                    .points()
                    .iter()
                    .map(|p| evaluate_raw(d, &p.coords))
                    .collect()
            })
            .collect()
    }
}

pub fn circle_grid(m: usize) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
        .collect()
}

fn evaluate_raw(descriptor: &Descriptor, coords: &[C64]) -> Result<C64> {
    match *descriptor {
        Descriptor::Coordinate(i) => coords.get(i).copied().ok_or(Error::DimensionMismatch {
            expected: i + 1,
            found: coords.len(),
        }),
        Descriptor::MagicFunction(alpha) => {
            if coords.len() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: coords.len(),
                });
            }
            magic(alpha, coords[0], coords[1])
        }
    }
}

fn magic(alpha: C64, s: C64, p: C64) -> Result<C64> {
    let den = C64::new(2.0, 0.0) - alpha * s;
    if den.norm() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularDenominator {
            modulus: den.norm(),
        });
    }
    Ok((alpha * p * 2.0 - s) / den)
}

/// `pi_2(z1, z2) = (z1 + z2, z1 z2)`.
pub fn symmetrize(z1: C64, z2: C64) -> Result<Point> {
    for z in [z1, z2] {
        if !(z.norm() < 1.0) {
            return Err(Error::NotInDisc {
                value: format_complex(z),
            });
        }
    }
    Point::new(DomainTag::SymmetrizedBidisc, vec![z1 + z2, z1 * z2])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub inside: bool,
    /// Maximizing `alpha` on the grid (`G2` only).
    pub worst_alpha: Option<C64>,
    pub worst_modulus: f64,
}

/// Sup-modulus test on raw coordinates: polydisc coordinates against the unit
/// circle, `G2` points against `|psi_alpha| < 1` on a `grid_size` circle grid.
/// Invalid input yields `inside = false`, never an error.
pub fn membership_check(domain: DomainTag, coords: &[C64], grid_size: usize) -> Membership {
    if coords.len() != domain.coordinate_count()
        || coords
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Membership {
            inside: false,
            worst_alpha: None,
            worst_modulus: f64::INFINITY,
        };
    }
    match domain {
        DomainTag::Disc | DomainTag::Polydisc(_) => {
            let worst = coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
            Membership {
                inside: worst < 1.0,
                worst_alpha: None,
                worst_modulus: worst,
            }
        }
        DomainTag::SymmetrizedBidisc => {
            let mut worst_alpha = None;
            let mut worst = f64::NEG_INFINITY;
            for alpha in circle_grid(grid_size) {
                let m = magic(alpha, coords[0], coords[1])
                    .map(|v| v.norm())
                    .unwrap_or(f64::INFINITY);
                if m > worst {
                    worst = m;
                    worst_alpha = Some(alpha);
                }
            }
            Membership {
                inside: grid_size >= 8 && worst < 1.0,
                worst_alpha,
                worst_modulus: worst,
            }
        }
    }
}

impl Point {
    pub fn membership(&self, grid_size: usize) -> Membership {
        membership_check(self.domain, &self.coords, grid_size)
    }
}
