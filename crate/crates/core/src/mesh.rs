//! Uniform interval and tensor-product rectangle meshes.
//!
//! Elements are indexed lexicographically with `x` fastest, `e = i + nx * j`.
//! Every edge stores the element on its low side (`left`) and the element or
//! boundary on its high side (`right`); the unit normal points from `left`
//! to `right`. Boundary edges keep the interior element in `left` and carry
//! the outward normal.

use crate::error::{Error, Result};

/// Boundary treatment applied to the whole boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    /// Homogeneous Neumann: the normal flux vanishes on the boundary.
    ZeroFlux,
}

/// Axis-aligned box `[lower, upper]` in one or two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.is_empty() || lower.len() > 2 || lower.len() != upper.len() {
            return Err(Error::InvalidMesh(format!(
                "domain must be 1D or 2D with matching bounds, got {} and {} values",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, (lo, hi)) in lower.iter().zip(upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidMesh(format!(
                    "degenerate domain on axis {axis}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::new(&[lower], &[upper])
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2]) -> Result<Self> {
        Self::new(&lower, &upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|a| self.length(a)).product()
    }
}

/// High side of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighbor {
    Element(usize),
    Boundary,
}

/// One face of a reference element: the axis it is normal to and whether it
/// sits at the high (`+1`) end of that axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub high: bool,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub left: usize,
    pub right: Neighbor,
    /// Axis the normal is aligned with.
    pub axis: usize,
    /// `+1.0` or `-1.0`; only boundary edges on the low side of the domain
    /// carry `-1.0`.
    pub sign: f64,
    /// Edge diameter; in 1D the element size is used.
    pub h_e: f64,
    /// Coordinate of the edge along `axis`.
    pub position: f64,
    /// For 2D edges, the element row/column index along the tangential axis.
    pub tangential_index: usize,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        matches!(self.right, Neighbor::Element(_))
    }

    pub fn normal(&self) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[self.axis] = self.sign;
        n
    }

    /// Face of the `left` element that lies on this edge.
    pub fn left_face(&self) -> Face {
        Face {
            axis: self.axis,
            high: self.sign > 0.0,
        }
    }

    /// Face of the `right` element that lies on this edge.
    pub fn right_face(&self) -> Face {
        Face {
            axis: self.axis,
            high: false,
        }
    }
}

/// Uniform partition of a [`Domain`].
#[derive(Clone, Debug)]
pub struct Mesh {
    domain: Domain,
    n: Vec<usize>,
    h: Vec<f64>,
    bc: BoundaryKind,
    edges: Vec<Edge>,
}

impl Mesh {
    /// Builds a uniform mesh with `n[axis]` elements along each axis.
    pub fn new(domain: Domain, n: &[usize], bc: BoundaryKind) -> Result<Self> {
        let dim = domain.dim();
        if n.len() != dim {
            return Err(Error::InvalidMesh(format!(
                "expected {dim} element counts, got {}",
                n.len()
            )));
        }
        if n.iter().any(|&ni| ni == 0) {
            return Err(Error::InvalidMesh("element count must be positive".into()));
        }
        let h: Vec<f64> = (0..dim).map(|a| domain.length(a) / n[a] as f64).collect();
        let edges = match dim {
            1 => edges_1d(&domain, n[0], h[0], bc),
            _ => edges_2d(&domain, [n[0], n[1]], [h[0], h[1]], bc),
        };
        Ok(Self {
            domain,
            n: n.to_vec(),
            h,
            bc,
            edges,
        })
    }

    /// Convenience constructor using the same element count on every axis.
    pub fn uniform(domain: Domain, n: usize, bc: BoundaryKind) -> Result<Self> {
        let counts = vec![n; domain.dim()];
        Self::new(domain, &counts, bc)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.bc
    }

    pub fn counts(&self) -> &[usize] {
        &self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h_min(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn element_count(&self) -> usize {
        self.n.iter().product()
    }

    pub fn element_measure(&self) -> f64 {
        self.h.iter().product()
    }

    /// Lexicographic multi-index `(i, j)` of element `e` (`j = 0` in 1D).
    pub fn element_index(&self, e: usize) -> [usize; 2] {
        let nx = self.n[0];
        [e % nx, e / nx]
    }

    /// Lower corner of element `e` (second entry is 0 in 1D).
    pub fn element_origin(&self, e: usize) -> [f64; 2] {
        let [i, j] = self.element_index(e);
        let mut p = [0.0; 2];
        p[0] = self.domain.lower[0] + i as f64 * self.h[0];
        if self.dim() == 2 {
            p[1] = self.domain.lower[1] + j as f64 * self.h[1];
        }
        p
    }

    /// Maps a reference point in `[-1, 1]^dim` to physical coordinates.
    pub fn map_to_physical(&self, e: usize, xi: &[f64]) -> [f64; 2] {
        let o = self.element_origin(e);
        let mut p = [0.0; 2];
        for a in 0..self.dim() {
            p[a] = o[a] + 0.5 * (xi[a] + 1.0) * self.h[a];
        }
        p
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Result<&Edge> {
        self.edges.get(id).ok_or(Error::OutOfRange {
            index: id,
            len: self.edges.len(),
        })
    }

    /// `(left element, right element or boundary, unit normal)` of an edge.
    pub fn edge_neighbors(&self, id: usize) -> Result<(usize, Neighbor, [f64; 2])> {
        let edge = self.edge(id)?;
        Ok((edge.left, edge.right, edge.normal()))
    }

    /// Edges touching element `e`.
    pub fn element_edges(&self, e: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, ed)| ed.left == e || ed.right == Neighbor::Element(e))
            .map(|(id, _)| id)
            .collect()
    }
}

fn edges_1d(domain: &Domain, n: usize, h: f64, bc: BoundaryKind) -> Vec<Edge> {
    let x0 = domain.lower[0];
    let interior = |left, right, i: usize| Edge {
        left,
        right: Neighbor::Element(right),
        axis: 0,
        sign: 1.0,
        h_e: h,
        position: x0 + i as f64 * h,
        tangential_index: 0,
    };
    match bc {
        BoundaryKind::Periodic => (0..n).map(|i| interior((i + n - 1) % n, i, i)).collect(),
        BoundaryKind::ZeroFlux => {
            let mut edges = Vec::with_capacity(n + 1);
            edges.push(Edge {
                left: 0,
                right: Neighbor::Boundary,
                axis: 0,
                sign: -1.0,
                h_e: h,
                position: x0,
                tangential_index: 0,
            });
            edges.extend((1..n).map(|i| interior(i - 1, i, i)));
            edges.push(Edge {
                left: n - 1,
                right: Neighbor::Boundary,
                axis: 0,
                sign: 1.0,
                h_e: h,
                position: domain.upper[0],
                tangential_index: 0,
            });
            edges
        }
    }
}

fn edges_2d(domain: &Domain, n: [usize; 2], h: [f64; 2], bc: BoundaryKind) -> Vec<Edge> {
    let elem = |i: usize, j: usize| i + n[0] * j;
    let mut edges = Vec::new();
    for axis in 0..2 {
        let t = 1 - axis;
        // edge diameter is the tangential element size
        let h_e = h[t];
        for row in 0..n[t] {
            let at = |k: usize| if axis == 0 { elem(k, row) } else { elem(row, k) };
            let pos = |k: usize| domain.lower[axis] + k as f64 * h[axis];
            match bc {
                BoundaryKind::Periodic => {
                    for k in 0..n[axis] {
                        edges.push(Edge {
                            left: at((k + n[axis] - 1) % n[axis]),
                            right: Neighbor::Element(at(k)),
                            axis,
                            sign: 1.0,
                            h_e,
                            position: pos(k),
                            tangential_index: row,
                        });
                    }
                }
                BoundaryKind::ZeroFlux => {
                    edges.push(Edge {
                        left: at(0),
                        right: Neighbor::Boundary,
                        axis,
                        sign: -1.0,
                        h_e,
                        position: pos(0),
                        tangential_index: row,
                    });
                    for k in 1..n[axis] {
                        edges.push(Edge {
                            left: at(k - 1),
                            right: Neighbor::Element(at(k)),
                            axis,
                            sign: 1.0,
                            h_e,
                            position: pos(k),
                            tangential_index: row,
                        });
                    }
                    edges.push(Edge {
                        left: at(n[axis] - 1),
                        right: Neighbor::Boundary,
                        axis,
                        sign: 1.0,
                        h_e,
                        position: domain.upper[axis],
                        tangential_index: row,
                    });
                }
            }
        }
    }
    edges
}
