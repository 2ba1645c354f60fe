//! Cell-centered tensor grids on `[-X, X]^d` with an interior domain and a
//! collar that carries the exterior data.

use serde::{Deserialize, Serialize};

use super::DiscretizeError;
use crate::geometry::{dist, Point};

/// Default cap on the node count for dense assembly.
pub const MAX_NODES: usize = 4096;

/// The open set where the equation is posed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    /// `(-half_width, half_width)^d` around `center`.
    Box { center: Point, half_width: f64 },
    Ball { center: Point, radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &Point, d: usize) -> bool {
        match *self {
            Domain::Box { center, half_width } => {
                (0..d).all(|k| (x[k] - center[k]).abs() < half_width)
            }
            Domain::Ball { center, radius } => dist(x, &center) < radius,
        }
    }

    /// Largest coordinate reach `max_k |x_k|` over the closure.
    fn reach(&self, d: usize) -> f64 {
        match *self {
            Domain::Box { center, half_width } => {
                (0..d).map(|k| center[k].abs() + half_width).fold(0.0, f64::max)
            }
            Domain::Ball { center, radius } => {
                (0..d).map(|k| center[k].abs() + radius).fold(0.0, f64::max)
            }
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Domain::Box { half_width, .. } => half_width > 0.0 && half_width.is_finite(),
            Domain::Ball { radius, .. } => radius > 0.0 && radius.is_finite(),
        }
    }
}

/// Uniform grid with nodes at `-X + (k + 1/2) h`, index `i0 + n i1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    d: usize,
    half_width: f64,
    h: f64,
    n: usize,
    domain: Domain,
    #[serde(skip)]
    nodes: Vec<Point>,
    #[serde(skip)]
    interior: Vec<bool>,
}

impl Grid {
    /// Builds the grid with the default node cap.
    pub fn new(d: usize, half_width: f64, h: f64, domain: Domain) -> Result<Self, DiscretizeError> {
        Self::with_cap(d, half_width, h, domain, MAX_NODES)
    }

    pub fn with_cap(
        d: usize,
        half_width: f64,
        h: f64,
        domain: Domain,
        cap: usize,
    ) -> Result<Self, DiscretizeError> {
        if d != 1 && d != 2 {
            return Err(DiscretizeError::Grid(format!("dimension {d} not supported")));
        }
        if !(half_width > 0.0 && h > 0.0 && h.is_finite() && half_width.is_finite()) {
            return Err(DiscretizeError::Grid("need X > 0 and h > 0".into()));
        }
        let ratio = 2.0 * half_width / h;
        let n = ratio.round();
        if n < 2.0 || (ratio - n).abs() > 1e-9 * ratio {
            return Err(DiscretizeError::Grid(format!("h = {h} does not divide 2X = {}", 2.0 * half_width)));
        }
        let n = n as usize;
        let total = n.pow(d as u32);
        if total > cap {
            return Err(DiscretizeError::TooLarge { nodes: total, cap });
        }
        if !domain.is_valid() {
            return Err(DiscretizeError::Grid("domain has nonpositive size".into()));
        }
        if domain.reach(d) > half_width - h + 1e-12 {
            return Err(DiscretizeError::Grid(format!(
                "domain reaches {} but the collar needs width >= h inside [-{half_width}, {half_width}]",
                domain.reach(d)
            )));
        }
        let coord = |k: usize| -half_width + (k as f64 + 0.5) * h;
        let nodes: Vec<Point> = (0..total)
            .map(|i| if d == 1 { [coord(i), 0.0] } else { [coord(i % n), coord(i / n)] })
            .collect();
        let interior: Vec<bool> = nodes.iter().map(|x| domain.contains(x, d)).collect();
        if !interior.iter().any(|&b| b) {
            return Err(DiscretizeError::Grid("no grid node inside the domain".into()));
        }
        Ok(Self { d, half_width, h, n, domain, nodes, interior })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Nodes per axis.
    pub fn per_axis(&self) -> usize {
        self.n
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }
    pub fn node(&self, i: usize) -> &Point {
        &self.nodes[i]
    }
    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }
    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }
    /// `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.interior[i]).collect()
    }
    pub fn collar_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.interior[i]).collect()
    }

    /// Lattice coordinates of node `i`.
    pub fn multi_index(&self, i: usize) -> [usize; 2] {
        if self.d == 1 {
            [i, 0]
        } else {
            [i % self.n, i / self.n]
        }
    }

    /// Neighbour of `i` one step along `axis` in direction `sign`, if inside the box.
    pub fn neighbor(&self, i: usize, axis: usize, sign: i64) -> Option<usize> {
        let mut m = self.multi_index(i);
        let k = m[axis] as i64 + sign;
        if k < 0 || k >= self.n as i64 {
            return None;
        }
        m[axis] = k as usize;
        Some(m[0] + self.n * m[1])
    }

    /// Nodes with `|x - z| < r`.
    pub fn ball_indices(&self, z: &Point, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| dist(&self.nodes[i], z) < r).collect()
    }

    /// Mask of nodes with `|x - z| < r`.
    pub fn ball_mask(&self, z: &Point, r: f64) -> Vec<bool> {
        self.nodes.iter().map(|x| dist(x, z) < r).collect()
    }

    /// Grid function from a closure.
    pub fn sample(&self, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    /// Same box and domain at spacing `h / 2`.
    pub fn refined(&self) -> Result<Self, DiscretizeError> {
        Self::new(self.d, self.half_width, 0.5 * self.h, self.domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_in_one_dimension() {
        let g = Grid::new(1, 4.0, 0.125, Domain::Box { center: [0.0, 0.0], half_width: 2.0 }).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.interior_indices().len(), 32);
        assert_eq!(g.node(0)[0], -4.0 + 0.0625);
    }

    #[test]
    fn counts_lattice_points_in_disc() {
        let g = Grid::new(2, 2.0, 1.0 / 16.0, Domain::Ball { center: [0.0, 0.0], radius: 1.0 }).unwrap();
        assert_eq!(g.len(), 4096);
        // independent count over half-integer lattice points (k + 1/2)/16
        let mut count = 0;
        for a in -32i64..32 {
            for b in -32i64..32 {
                let (x, y) = ((a as f64 + 0.5) / 16.0, (b as f64 + 0.5) / 16.0);
                if x * x + y * y < 1.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(g.interior_indices().len(), count);
    }

    #[test]
    fn rejects_bad_spacing_and_size() {
        let dom = Domain::Box { center: [0.0, 0.0], half_width: 1.0 };
        assert!(Grid::new(1, 2.0, 0.3, dom).is_err());
        assert!(matches!(
            Grid::new(2, 2.0, 1.0 / 64.0, dom),
            Err(DiscretizeError::TooLarge { .. })
        ));
        // collar narrower than h
        assert!(Grid::new(1, 1.0, 0.25, dom).is_err());
    }

    #[test]
    fn neighbors_stay_in_the_box() {
        let g = Grid::new(2, 1.0, 0.25, Domain::Ball { center: [0.0, 0.0], radius: 0.5 }).unwrap();
        assert_eq!(g.neighbor(0, 0, -1), None);
        assert_eq!(g.neighbor(0, 1, 1), Some(8));
    }
}
