use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::linear::babai_point;
use super::DetectorOutput;
use crate::error::{Error, Result};
use crate::model::RealModel;
use crate::numerics::{chi_square_quantile, dot, norm_sq, qr_decompose, RealMatrix};

/// Largest factor the radius may grow by through restarts.
const MAX_RESTART_GROWTH: f64 = (1u64 << 30) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusKind {
    /// Fincke-Pohst: noise-statistics radius, natural enumeration, restarts
    /// when the sphere is empty.
    LatticeIndependent,
    /// Schnorr-Euchner: radius from a starting lattice point, zig-zag
    /// enumeration, shrinking at each leaf.
    LatticeDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusPolicy {
    pub kind: RadiusKind,
    pub epsilon: f64,
    pub restart_growth: f64,
}

impl RadiusPolicy {
    pub const DEFAULT_EPSILON: f64 = 0.01;
    pub const DEFAULT_GROWTH: f64 = 2.0;

    pub fn fincke_pohst() -> Self {
        Self {
            kind: RadiusKind::LatticeIndependent,
            epsilon: Self::DEFAULT_EPSILON,
            restart_growth: Self::DEFAULT_GROWTH,
        }
    }

    pub fn schnorr_euchner() -> Self {
        Self {
            kind: RadiusKind::LatticeDependent,
            ..Self::fincke_pohst()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "radius epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.restart_growth > 1.0) || !self.restart_growth.is_finite() {
            return Err(Error::Config(format!(
                "restart growth must exceed 1, got {}",
                self.restart_growth
            )));
        }
        Ok(())
    }
}

/// Radius `R` with `P(‖n‖² ≤ R) = 1 − ε` for `dof` real noise coordinates of
/// variance `1/(2ρ)`.
pub fn fp_radius(dof: usize, rho: f64, epsilon: f64) -> Result<f64> {
    Ok(0.5 / rho * chi_square_quantile(1.0 - epsilon, dof)?)
}

/// Exact ML by depth-first search of the QR-triangularized system.
///
/// Both policies shrink the radius to the metric of each improving leaf.
/// Visited nodes count the root plus every admitted partial vector, summed
/// over restarts.
///
/// `start` seeds the lattice-dependent radius; the Babai point is used when
/// it is absent. It is ignored by the lattice-independent policy.
pub fn sphere_decode(
    model: &RealModel,
    policy: &RadiusPolicy,
    start: Option<&[f64]>,
) -> Result<DetectorOutput> {
    policy.validate()?;
    let m = model.dim();
    if m == 0 {
        return Ok(DetectorOutput {
            s_hat: Vec::new(),
            visited_nodes: 0,
            metric: norm_sq(&model.y),
            relied_indices: Vec::new(),
        });
    }
    let qr = qr_decompose(&model.h)?;
    let z = qr.project(&model.y);
    // ‖y − Hs‖² = ‖z − Rs‖² + offset for every s
    let offset = (norm_sq(&model.y) - norm_sq(&z)).max(0.0);
    let tree = Tree {
        r: &qr.r,
        z: &z,
        axis: model.axis(),
    };

    let (s_hat, visited_nodes) = match policy.kind {
        RadiusKind::LatticeIndependent => {
            let floor = 1e-12 * (norm_sq(&model.y) + 1.0);
            let initial = if model.rho.is_finite() {
                fp_radius(model.y.len(), model.rho, policy.epsilon)?.max(floor)
            } else {
                floor
            };
            tree.search_with_restarts(initial, offset, policy.restart_growth, Enumeration::Natural)?
        }
        RadiusKind::LatticeDependent => {
            let start = match start {
                Some(s) => {
                    if s.len() != m {
                        return Err(Error::DimensionMismatch(format!(
                            "start point has {} entries, need {m}",
                            s.len()
                        )));
                    }
                    s.to_vec()
                }
                None => babai_point(model)?.s_hat,
            };
            let tri = tree.triangular_metric(&start);
            let initial = tri * (1.0 + 1e-12) + f64::MIN_POSITIVE;
            tree.search_with_restarts(
                initial + offset,
                offset,
                policy.restart_growth,
                Enumeration::ZigZag,
            )?
        }
    };
    let metric = model.metric(&s_hat);
    Ok(DetectorOutput {
        s_hat,
        visited_nodes,
        metric,
        relied_indices: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Enumeration {
    /// Ascending alphabet order.
    Natural,
    /// Nearest-first around the level center.
    ZigZag,
}

struct Tree<'a> {
    r: &'a RealMatrix,
    z: &'a [f64],
    axis: &'a [f64],
}

struct Walk {
    s: Vec<f64>,
    radius: f64,
    best: Option<(f64, Vec<f64>)>,
    nodes: u64,
    order: Vec<Vec<usize>>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

impl Tree<'_> {
    fn dim(&self) -> usize {
        self.z.len()
    }

    /// `‖z − Rs‖²`, accumulated in the same order as the search.
    fn triangular_metric(&self, s: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in (0..self.dim()).rev() {
            let d = self.z[i] - dot(&self.r.row(i)[i + 1..], &s[i + 1..]) - self.r[(i, i)] * s[i];
            acc += d * d;
        }
        acc
    }

    /// Runs the search with full-metric radius `radius`, growing it until the
    /// sphere holds a lattice point.
    fn search_with_restarts(
        &self,
        radius: f64,
        offset: f64,
        growth: f64,
        enumeration: Enumeration,
    ) -> Result<(Vec<f64>, u64)> {
        let m = self.dim();
        let mut full = radius;
        let mut nodes = 0;
        loop {
            let tri = full - offset;
            if tri >= 0.0 {
                let mut walk = Walk {
                    s: vec![0.0; m],
                    radius: tri,
                    best: None,
                    // the root, an empty prefix of metric zero
                    nodes: 1,
                    order: vec![Vec::with_capacity(self.axis.len()); m],
                };
                self.descend(&mut walk, m - 1, 0.0, enumeration);
                nodes += walk.nodes;
                if let Some((_, s)) = walk.best {
                    return Ok((s, nodes));
                }
            }
            full *= growth;
            if full > radius * MAX_RESTART_GROWTH {
                return Err(Error::RestartOverflow(MAX_RESTART_GROWTH));
            }
            log::trace!("empty sphere, radius grown to {full:e}");
        }
    }

    fn descend(&self, walk: &mut Walk, i: usize, acc: f64, enumeration: Enumeration) {
        let rii = self.r[(i, i)];
        let num = self.z[i] - dot(&self.r.row(i)[i + 1..], &walk.s[i + 1..]);
        let mut order = std::mem::take(&mut walk.order[i]);
        order.clear();
        order.extend(0..self.axis.len());
        if enumeration == Enumeration::ZigZag {
            let center = num / rii;
            // nearest first; equal distances go to the smaller point
            order.sort_by(|&a, &b| {
                let (da, db) = ((self.axis[a] - center).abs(), (self.axis[b] - center).abs());
                da.partial_cmp(&db)
                    .unwrap_or(Ordering::Equal)
                    .then(a.cmp(&b))
            });
        }
        for &idx in &order {
            let value = self.axis[idx];
            let d = num - rii * value;
            let metric = acc + d * d;
            if metric > walk.radius {
                if enumeration == Enumeration::ZigZag {
                    break;
                }
                continue;
            }
            walk.nodes += 1;
            walk.s[i] = value;
            if i == 0 {
                let better = match &walk.best {
                    None => true,
                    Some((bm, bs)) => {
                        metric < *bm || (metric == *bm && lex_cmp(&walk.s, bs) == Ordering::Less)
                    }
                };
                if better {
                    walk.best = Some((metric, walk.s.clone()));
                    walk.radius = metric;
                }
            } else {
                self.descend(walk, i - 1, metric, enumeration);
            }
        }
        walk.order[i] = order;
    }
}
