//! Convex body representations with membership, distance, and facet
//! descriptions.
//!
//! Bodies serialize to a JSON document `{type, n, parameters, directions?}`
//! for CLI round-tripping.

use crate::error::{Error, Result};
use crate::measure::{dot, norm};
use serde_json::{json, Value};

const UNIT_NORM_TOL: f64 = 1e-12;

/// Convex bodies the estimators understand.
///
/// `HalfspaceIntersection` may be unbounded (small direction counts); the
/// gamma_p surface area stays finite because the density is integrable on
/// every hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    /// {x : |x| <= radius}
    Ball { n: usize, radius: f64 },
    /// [-half_side, half_side]^n
    Cube { n: usize, half_side: f64 },
    /// {x : |<x, normal>| <= offset}
    Slab {
        n: usize,
        offset: f64,
        normal: Vec<f64>,
    },
    /// {x : <x, d_i> <= offset for all i}; contains the origin since
    /// offset > 0.
    HalfspaceIntersection {
        n: usize,
        offset: f64,
        directions: Vec<Vec<f64>>,
    },
}

/// How a reported distance relates to the true Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceFlag {
    Exact,
    LowerBound,
}

/// One flat boundary piece: the hyperplane `<x, normal> = offset` together
/// with the membership test for the facet's defining body.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    membership: FacetMembership,
    /// A facet whose direction duplicates an earlier one contributes 0.
    covered: bool,
}

#[derive(Debug, Clone)]
enum FacetMembership {
    /// Slab facets are full hyperplanes.
    Always,
    /// Cube face orthogonal to `axis`: all other coordinates within
    /// [-half_side, half_side].
    Box { half_side: f64, axis: usize },
    /// All halfspace constraints except `skip`.
    Halfspaces {
        directions: Vec<Vec<f64>>,
        offset: f64,
        skip: usize,
    },
}

fn check_unit(v: &[f64]) -> Result<()> {
    if (norm(v) - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::domain(format!(
            "direction vector must be unit-norm within {UNIT_NORM_TOL}, got |v| = {}",
            norm(v)
        )));
    }
    Ok(())
}

impl ConvexBody {
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ball requires n >= 1"));
        }
        if !(radius > 0.0) {
            return Err(Error::domain("ball radius must be positive"));
        }
        Ok(ConvexBody::Ball { n, radius })
    }

    pub fn cube(n: usize, half_side: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("cube requires n >= 1"));
        }
        if !(half_side > 0.0) {
            return Err(Error::domain("cube half side must be positive"));
        }
        Ok(ConvexBody::Cube { n, half_side })
    }

    pub fn slab(n: usize, offset: f64, normal: Vec<f64>) -> Result<Self> {
        if normal.len() != n {
            return Err(Error::domain("slab normal dimension mismatch"));
        }
        if !(offset >= 0.0) {
            return Err(Error::domain("slab offset must be nonnegative"));
        }
        check_unit(&normal)?;
        Ok(ConvexBody::Slab { n, offset, normal })
    }

    pub fn halfspace_intersection(
        n: usize,
        offset: f64,
        directions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(offset > 0.0) {
            return Err(Error::domain(
                "halfspace intersection offset must be positive (origin inside)",
            ));
        }
        if directions.is_empty() {
            return Err(Error::domain("halfspace intersection needs >= 1 direction"));
        }
        for d in &directions {
            if d.len() != n {
                return Err(Error::domain("direction dimension mismatch"));
            }
            check_unit(d)?;
        }
        Ok(ConvexBody::HalfspaceIntersection {
            n,
            offset,
            directions,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { n, .. }
            | ConvexBody::Cube { n, .. }
            | ConvexBody::Slab { n, .. }
            | ConvexBody::HalfspaceIntersection { n, .. } => *n,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "point dimension {} does not match body dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Exact set membership.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(match self {
            ConvexBody::Ball { radius, .. } => norm(x) <= *radius,
            ConvexBody::Cube { half_side, .. } => x.iter().all(|v| v.abs() <= *half_side),
            ConvexBody::Slab { offset, normal, .. } => dot(x, normal).abs() <= *offset,
            ConvexBody::HalfspaceIntersection {
                offset, directions, ..
            } => directions.iter().all(|d| dot(x, d) <= *offset),
        })
    }

    /// Euclidean distance from `x` to the body (0 inside). Exact for Ball,
    /// Cube and Slab; the largest constraint violation, a lower bound, for
    /// HalfspaceIntersection.
    pub fn distance(&self, x: &[f64]) -> Result<(f64, DistanceFlag)> {
        self.check_dim(x)?;
        Ok(match self {
            ConvexBody::Ball { radius, .. } => ((norm(x) - radius).max(0.0), DistanceFlag::Exact),
            ConvexBody::Cube { half_side, .. } => {
                let d2: f64 = x
                    .iter()
                    .map(|v| (v.abs() - half_side).max(0.0).powi(2))
                    .sum();
                (d2.sqrt(), DistanceFlag::Exact)
            }
            ConvexBody::Slab { offset, normal, .. } => (
                (dot(x, normal).abs() - offset).max(0.0),
                DistanceFlag::Exact,
            ),
            ConvexBody::HalfspaceIntersection {
                offset, directions, ..
            } => {
                let worst = directions
                    .iter()
                    .map(|d| dot(x, d) - offset)
                    .fold(0.0_f64, f64::max);
                (worst, DistanceFlag::LowerBound)
            }
        })
    }

    /// Flat facets of the boundary. Ball has none and errors.
    pub fn facets(&self) -> Result<Vec<Facet>> {
        match self {
            ConvexBody::Ball { .. } => Err(Error::Unsupported(
                "ball has no flat facets".to_string(),
            )),
            ConvexBody::Cube { n, half_side } => {
                let mut out = Vec::with_capacity(2 * n);
                for axis in 0..*n {
                    for sign in [1.0, -1.0] {
                        let mut normal = vec![0.0; *n];
                        normal[axis] = sign;
                        out.push(Facet {
                            normal,
                            offset: *half_side,
                            membership: FacetMembership::Box {
                                half_side: *half_side,
                                axis,
                            },
                            covered: false,
                        });
                    }
                }
                Ok(out)
            }
            ConvexBody::Slab { offset, normal, .. } => Ok(vec![
                Facet {
                    normal: normal.clone(),
                    offset: *offset,
                    membership: FacetMembership::Always,
                    covered: false,
                },
                Facet {
                    normal: normal.iter().map(|v| -v).collect(),
                    offset: *offset,
                    membership: FacetMembership::Always,
                    covered: false,
                },
            ]),
            ConvexBody::HalfspaceIntersection {
                offset, directions, ..
            } => {
                let mut out = Vec::with_capacity(directions.len());
                for (i, d) in directions.iter().enumerate() {
                    let covered = directions[..i]
                        .iter()
                        .any(|e| dot(d, e) >= 1.0 - UNIT_NORM_TOL);
                    out.push(Facet {
                        normal: d.clone(),
                        offset: *offset,
                        membership: FacetMembership::Halfspaces {
                            directions: directions.clone(),
                            offset: *offset,
                            skip: i,
                        },
                        covered,
                    });
                }
                Ok(out)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ConvexBody::Ball { n, radius } => {
                json!({"type": "ball", "n": n, "parameters": {"radius": radius}})
            }
            ConvexBody::Cube { n, half_side } => {
                json!({"type": "cube", "n": n, "parameters": {"half_side": half_side}})
            }
            ConvexBody::Slab { n, offset, normal } => {
                json!({"type": "slab", "n": n, "parameters": {"offset": offset}, "directions": [normal]})
            }
            ConvexBody::HalfspaceIntersection {
                n,
                offset,
                directions,
            } => {
                json!({"type": "halfspace_intersection", "n": n, "parameters": {"offset": offset}, "directions": directions})
            }
        }
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let ty = doc
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("body document missing \"type\"".to_string()))?;
        let n = doc
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Config("body document missing \"n\"".to_string()))?
            as usize;
        let param = |key: &str| -> Result<f64> {
            doc.get("parameters")
                .and_then(|p| p.get(key))
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Config(format!("body document missing parameters.{key}")))
        };
        let directions = || -> Result<Vec<Vec<f64>>> {
            let arr = doc
                .get("directions")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Config("body document missing \"directions\"".to_string()))?;
            arr.iter()
                .map(|row| {
                    row.as_array()
                        .map(|r| r.iter().filter_map(Value::as_f64).collect::<Vec<f64>>())
                        .filter(|r| r.len() == n)
                        .ok_or_else(|| {
                            Error::Config("malformed direction row in body document".to_string())
                        })
                })
                .collect()
        };
        match ty {
            "ball" => ConvexBody::ball(n, param("radius")?),
            "cube" => ConvexBody::cube(n, param("half_side")?),
            "slab" => {
                let dirs = directions()?;
                if dirs.len() != 1 {
                    return Err(Error::Config("slab needs exactly one direction".to_string()));
                }
                ConvexBody::slab(n, param("offset")?, dirs.into_iter().next().unwrap())
            }
            "halfspace_intersection" => {
                ConvexBody::halfspace_intersection(n, param("offset")?, directions()?)
            }
            other => Err(Error::Config(format!("unknown body type \"{other}\""))),
        }
    }
}

impl Facet {
    /// Whether a point already on the facet's hyperplane belongs to the
    /// facet (all remaining constraints of the defining body hold).
    pub fn on_facet(&self, x: &[f64]) -> bool {
        if self.covered {
            return false;
        }
        match &self.membership {
            FacetMembership::Always => true,
            FacetMembership::Box { half_side, axis } => x
                .iter()
                .enumerate()
                .all(|(i, v)| i == *axis || v.abs() <= *half_side),
            FacetMembership::Halfspaces {
                directions,
                offset,
                skip,
            } => directions
                .iter()
                .enumerate()
                .all(|(i, d)| i == *skip || dot(x, d) <= *offset),
        }
    }

    pub fn is_covered(&self) -> bool {
        self.covered
    }
}
