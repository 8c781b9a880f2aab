//! Nodal Gauss–Lobatto tensor-product DG space and fields.
//!
//! Each element carries `(k+1)^dim` nodal values at the tensor Gauss–Lobatto
//! points, local index `a = i + (k+1) * j` with `i` along `x`. Inner products
//! in the scheme use collocated Gauss–Lobatto quadrature, so the mass matrix
//! is diagonal; error norms over-integrate with `k + 3` Gauss points per axis.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Face, Mesh, Neighbor};
use crate::quadrature::{gauss_lobatto_rule, gauss_rule, GaussLobattoRule, LagrangeBasis};

/// Basis values and physical derivatives along the face normal axis at the
/// points of one face. Indexed `[point][local dof]`.
#[derive(Clone, Debug)]
pub struct FaceTable {
    pub value: Vec<Vec<f64>>,
    /// First derivative along `+axis`.
    pub d1: Vec<Vec<f64>>,
    /// Second derivative along `+axis`.
    pub d2: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct DgSpace {
    mesh: Mesh,
    degree: usize,
    rule: GaussLobattoRule,
    basis: LagrangeBasis,
    n1: usize,
    n_loc: usize,
    /// Physical quadrature weight of each local node.
    mass: Vec<f64>,
    /// `grad[axis][q][a]`: physical derivative of local basis `a` at node `q`.
    grad: [Vec<Vec<f64>>; 2],
    /// Face tables indexed by `2 * axis + high`.
    faces: Vec<FaceTable>,
}

impl DgSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Arc<Self>> {
        if degree < 1 {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree must be at least 1, got {degree}"
            )));
        }
        let n1 = degree + 1;
        let dim = mesh.dim();
        let n_loc = n1.pow(dim as u32);
        let rule = gauss_lobatto_rule(n1)?;
        let basis = LagrangeBasis::new(&rule.nodes);
        let d_ref: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| basis.derivatives(x)).collect();

        let h = mesh.h().to_vec();
        let jac: f64 = h.iter().map(|hi| 0.5 * hi).product();
        let mass = (0..n_loc)
            .map(|a| {
                let (i, j) = (a % n1, a / n1);
                let w = if dim == 1 {
                    rule.weights[i]
                } else {
                    rule.weights[i] * rule.weights[j]
                };
                w * jac
            })
            .collect();

        let mut grad = [vec![vec![0.0; n_loc]; n_loc], vec![vec![0.0; n_loc]; n_loc]];
        for q in 0..n_loc {
            let (qi, qj) = (q % n1, q / n1);
            for a in 0..n_loc {
                let (ai, aj) = (a % n1, a / n1);
                if qj == aj {
                    grad[0][q][a] = 2.0 / h[0] * d_ref[qi][ai];
                }
                if dim == 2 && qi == ai {
                    grad[1][q][a] = 2.0 / h[1] * d_ref[qj][aj];
                }
            }
        }

        let mut faces = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            for high in [false, true] {
                let x = if high { 1.0 } else { -1.0 };
                let v = basis.values(x);
                let d = basis.derivatives(x);
                let dd = basis.second_derivatives(x);
                let s = 2.0 / h[axis];
                let npts = if dim == 1 { 1 } else { n1 };
                let mut table = FaceTable {
                    value: vec![vec![0.0; n_loc]; npts],
                    d1: vec![vec![0.0; n_loc]; npts],
                    d2: vec![vec![0.0; n_loc]; npts],
                };
                for p in 0..npts {
                    for a in 0..n_loc {
                        let (ai, aj) = (a % n1, a / n1);
                        let (normal_idx, tangential_idx) = if axis == 0 { (ai, aj) } else { (aj, ai) };
                        if dim == 2 && tangential_idx != p {
                            continue;
                        }
                        table.value[p][a] = v[normal_idx];
                        table.d1[p][a] = s * d[normal_idx];
                        table.d2[p][a] = s * s * dd[normal_idx];
                    }
                }
                faces.push(table);
            }
        }

        Ok(Arc::new(Self {
            mesh,
            degree,
            rule,
            basis,
            n1,
            n_loc,
            mass,
            grad,
            faces,
        }))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn rule(&self) -> &GaussLobattoRule {
        &self.rule
    }

    /// Nodes per axis, `k + 1`.
    pub fn nodes_per_axis(&self) -> usize {
        self.n1
    }

    /// Degrees of freedom per element.
    pub fn local_dofs(&self) -> usize {
        self.n_loc
    }

    pub fn n_dofs(&self) -> usize {
        self.n_loc * self.mesh.element_count()
    }

    /// Diagonal of the element mass matrix under nodal quadrature.
    pub fn local_mass(&self) -> &[f64] {
        &self.mass
    }

    /// Global diagonal mass matrix.
    pub fn mass_diagonal(&self) -> Vec<f64> {
        let ne = self.mesh.element_count();
        let mut m = Vec::with_capacity(self.n_dofs());
        for _ in 0..ne {
            m.extend_from_slice(&self.mass);
        }
        m
    }

    pub fn local_gradient_table(&self, axis: usize) -> &[Vec<f64>] {
        &self.grad[axis]
    }

    pub fn face_table(&self, face: Face) -> &FaceTable {
        &self.faces[2 * face.axis + face.high as usize]
    }

    /// Physical quadrature weights of the Gauss–Lobatto points along an edge.
    pub fn edge_weights(&self, edge_id: usize) -> Result<Vec<f64>> {
        let edge = self.mesh.edge(edge_id)?;
        if self.dim() == 1 {
            return Ok(vec![1.0]);
        }
        let t = 1 - edge.axis;
        let half = 0.5 * self.mesh.h()[t];
        Ok(self.rule.weights.iter().map(|w| w * half).collect())
    }

    /// Reference coordinates of local node `a`.
    pub fn node_reference(&self, a: usize) -> [f64; 2] {
        let x = &self.rule.nodes;
        if self.dim() == 1 {
            [x[a], 0.0]
        } else {
            [x[a % self.n1], x[a / self.n1]]
        }
    }

    /// Physical coordinates of local node `a` of element `e`.
    pub fn node_coordinates(&self, e: usize, a: usize) -> [f64; 2] {
        let xi = self.node_reference(a);
        self.mesh.map_to_physical(e, &xi[..self.dim()])
    }

    /// Nodal interpolant of `f(x, y)` (`y = 0` in 1D).
    pub fn interpolate<F>(self: &Arc<Self>, f: F) -> DgField
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut values = Vec::with_capacity(self.n_dofs());
        for e in 0..self.mesh.element_count() {
            for a in 0..self.n_loc {
                let p = self.node_coordinates(e, a);
                values.push(f(p[0], p[1]));
            }
        }
        DgField {
            space: Arc::clone(self),
            values,
        }
    }

    pub fn constant(self: &Arc<Self>, value: f64) -> DgField {
        DgField {
            space: Arc::clone(self),
            values: vec![value; self.n_dofs()],
        }
    }

    pub fn from_values(self: &Arc<Self>, values: Vec<f64>) -> Result<DgField> {
        if values.len() != self.n_dofs() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                self.n_dofs(),
                values.len()
            )));
        }
        Ok(DgField {
            space: Arc::clone(self),
            values,
        })
    }

    /// Tensor-product basis values at a reference point.
    pub fn basis_at(&self, xi: &[f64]) -> Vec<f64> {
        let vx = self.basis.values(xi[0]);
        if self.dim() == 1 {
            return vx;
        }
        let vy = self.basis.values(xi[1]);
        let mut out = Vec::with_capacity(self.n_loc);
        for j in 0..self.n1 {
            for i in 0..self.n1 {
                out.push(vx[i] * vy[j]);
            }
        }
        out
    }

    /// Physical gradients of the tensor basis at a reference point.
    fn basis_gradient_at(&self, xi: &[f64]) -> [Vec<f64>; 2] {
        let h = self.mesh.h();
        let vx = self.basis.values(xi[0]);
        let dx = self.basis.derivatives(xi[0]);
        if self.dim() == 1 {
            return [dx.iter().map(|d| 2.0 / h[0] * d).collect(), vec![0.0; self.n_loc]];
        }
        let vy = self.basis.values(xi[1]);
        let dy = self.basis.derivatives(xi[1]);
        let mut gx = Vec::with_capacity(self.n_loc);
        let mut gy = Vec::with_capacity(self.n_loc);
        for j in 0..self.n1 {
            for i in 0..self.n1 {
                gx.push(2.0 / h[0] * dx[i] * vy[j]);
                gy.push(2.0 / h[1] * vx[i] * dy[j]);
            }
        }
        [gx, gy]
    }

    fn check_reference(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim() || xi.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument(format!(
                "reference point {xi:?} outside [-1, 1]^{}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Per-side traces along an edge, one entry per edge quadrature point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SideTrace {
    pub w: Vec<f64>,
    /// Derivative along the edge normal `n`.
    pub dn: Vec<f64>,
    /// Second derivative along `n`.
    pub dn2: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EdgeTrace {
    pub left: SideTrace,
    /// `None` on zero-flux boundary edges.
    pub right: Option<SideTrace>,
    pub weights: Vec<f64>,
    pub h_e: f64,
}

impl EdgeTrace {
    fn combine(&self, f: impl Fn(&SideTrace) -> &Vec<f64>, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        match &self.right {
            Some(r) => f(&self.left).iter().zip(f(r)).map(|(&a, &b)| op(a, b)).collect(),
            None => vec![0.0; self.weights.len()],
        }
    }

    /// `[w] = w|right - w|left`; zero on boundary edges.
    pub fn jump(&self) -> Vec<f64> {
        self.combine(|s| &s.w, |l, r| r - l)
    }

    pub fn average(&self) -> Vec<f64> {
        match &self.right {
            Some(_) => self.combine(|s| &s.w, |l, r| 0.5 * (l + r)),
            None => self.left.w.clone(),
        }
    }

    pub fn jump_dn(&self) -> Vec<f64> {
        self.combine(|s| &s.dn, |l, r| r - l)
    }

    pub fn average_dn(&self) -> Vec<f64> {
        match &self.right {
            Some(_) => self.combine(|s| &s.dn, |l, r| 0.5 * (l + r)),
            None => self.left.dn.clone(),
        }
    }

    pub fn jump_dn2(&self) -> Vec<f64> {
        self.combine(|s| &s.dn2, |l, r| r - l)
    }
}

/// A piecewise polynomial stored by its nodal values.
#[derive(Clone, Debug)]
pub struct DgField {
    space: Arc<DgSpace>,
    values: Vec<f64>,
}

impl DgField {
    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn element_values(&self, e: usize) -> &[f64] {
        let n = self.space.n_loc;
        &self.values[e * n..(e + 1) * n]
    }

    pub fn element_values_mut(&mut self, e: usize) -> &mut [f64] {
        let n = self.space.n_loc;
        &mut self.values[e * n..(e + 1) * n]
    }

    /// New field on the same space with `f` applied to every nodal value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DgField {
        DgField {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_space(&self, other: &DgField) -> bool {
        Arc::ptr_eq(&self.space, &other.space)
            || (self.space.degree == other.space.degree
                && self.values.len() == other.values.len()
                && self.space.mesh.counts() == other.space.mesh.counts()
                && self.space.mesh.domain() == other.space.mesh.domain())
    }

    fn check_element(&self, e: usize) -> Result<()> {
        let ne = self.space.mesh.element_count();
        if e >= ne {
            return Err(Error::OutOfRange { index: e, len: ne });
        }
        Ok(())
    }

    /// Evaluates the element polynomial at a reference point.
    pub fn evaluate(&self, e: usize, xi: &[f64]) -> Result<f64> {
        self.check_element(e)?;
        self.space.check_reference(xi)?;
        let phi = self.space.basis_at(xi);
        Ok(phi.iter().zip(self.element_values(e)).map(|(p, v)| p * v).sum())
    }

    /// Physical gradient of the element polynomial at a reference point.
    pub fn evaluate_gradient(&self, e: usize, xi: &[f64]) -> Result<[f64; 2]> {
        self.check_element(e)?;
        self.space.check_reference(xi)?;
        let g = self.space.basis_gradient_at(xi);
        let v = self.element_values(e);
        Ok([
            g[0].iter().zip(v).map(|(p, v)| p * v).sum(),
            g[1].iter().zip(v).map(|(p, v)| p * v).sum(),
        ])
    }

    fn side_trace(&self, e: usize, face: Face, sign: f64) -> SideTrace {
        let table = self.space.face_table(face);
        let v = self.element_values(e);
        let dot = |row: &Vec<f64>| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        SideTrace {
            w: table.value.iter().map(dot).collect(),
            dn: table.d1.iter().map(|r| sign * dot(r)).collect(),
            dn2: table.d2.iter().map(dot).collect(),
        }
    }

    /// Traces from both sides of an edge at the edge Gauss–Lobatto points.
    pub fn edge_trace(&self, edge_id: usize) -> Result<EdgeTrace> {
        let mesh = self.space.mesh();
        let edge = mesh.edge(edge_id)?;
        let left = self.side_trace(edge.left, edge.left_face(), edge.sign);
        let right = match edge.right {
            Neighbor::Element(r) => Some(self.side_trace(r, edge.right_face(), edge.sign)),
            Neighbor::Boundary => None,
        };
        Ok(EdgeTrace {
            left,
            right,
            weights: self.space.edge_weights(edge_id)?,
            h_e: edge.h_e,
        })
    }

    /// `∫_τ v / |τ|` under nodal quadrature (exact for the element polynomial).
    pub fn cell_average(&self, e: usize) -> Result<f64> {
        self.check_element(e)?;
        let m = &self.space.mass;
        let s: f64 = m.iter().zip(self.element_values(e)).map(|(w, v)| w * v).sum();
        Ok(s / self.space.mesh.element_measure())
    }

    pub fn cell_averages(&self) -> Vec<f64> {
        (0..self.space.mesh.element_count())
            .map(|e| self.cell_average(e).expect("element in range"))
            .collect()
    }

    /// `(min, max)` over all Gauss–Lobatto nodes.
    pub fn nodal_extrema(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `∫_Ω v` under nodal quadrature.
    pub fn integral(&self) -> f64 {
        let m = &self.space.mass;
        self.values
            .chunks(self.space.n_loc)
            .map(|c| c.iter().zip(m).map(|(v, w)| v * w).sum::<f64>())
            .sum()
    }

    /// Nodal-quadrature inner product `(self, other)`.
    pub fn inner(&self, other: &DgField) -> f64 {
        let m = &self.space.mass;
        let n = self.space.n_loc;
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a * b * m[i % n])
            .sum()
    }

    /// `Σ_τ ∫ |∇v|²` under nodal quadrature, the form used by the scheme.
    pub fn broken_gradient_sq(&self) -> f64 {
        let sp = &self.space;
        let mut total = 0.0;
        for e in 0..sp.mesh.element_count() {
            let v = self.element_values(e);
            for q in 0..sp.n_loc {
                let mut g2 = 0.0;
                for axis in 0..sp.dim() {
                    let g: f64 = sp.grad[axis][q].iter().zip(v).map(|(a, b)| a * b).sum();
                    g2 += g * g;
                }
                total += sp.mass[q] * g2;
            }
        }
        total
    }

    /// Over-integrated `‖v - f‖_{L²}` with `k + 3` Gauss points per axis.
    pub fn l2_error<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64,
    {
        let sp = &self.space;
        let pts = OverIntegration::new(sp);
        let mut total = 0.0;
        for e in 0..sp.mesh.element_count() {
            let v = self.element_values(e);
            for (q, (xi, w)) in pts.points.iter().enumerate() {
                let uh: f64 = pts.values[q].iter().zip(v).map(|(a, b)| a * b).sum();
                let p = sp.mesh.map_to_physical(e, &xi[..sp.dim()]);
                let d = uh - f(p[0], p[1]);
                total += w * d * d;
            }
        }
        total.sqrt()
    }

    /// Broken `H¹` seminorm plus `h_e`-scaled interior jumps.
    pub fn energy_norm(&self) -> f64 {
        let sp = &self.space;
        let pts = OverIntegration::new(sp);
        let mut total = 0.0;
        for e in 0..sp.mesh.element_count() {
            let v = self.element_values(e);
            for (q, (_, w)) in pts.points.iter().enumerate() {
                for axis in 0..sp.dim() {
                    let g: f64 = pts.gradients[axis][q].iter().zip(v).map(|(a, b)| a * b).sum();
                    total += w * g * g;
                }
            }
        }
        // jumps are polynomial of degree k along the edge; Gauss k+3 is exact for [v]^2
        let mesh = sp.mesh();
        let gauss = gauss_rule(sp.degree + 3).expect("positive order");
        for edge in mesh.edges().iter().filter(|e| e.is_interior()) {
            let Neighbor::Element(right) = edge.right else { continue };
            let (s_pts, s_w): (Vec<f64>, Vec<f64>) = if sp.dim() == 1 {
                (vec![0.0], vec![1.0])
            } else {
                let half = 0.5 * mesh.h()[1 - edge.axis];
                (gauss.nodes.clone(), gauss.weights.iter().map(|w| w * half).collect())
            };
            for (s, w) in s_pts.iter().zip(&s_w) {
                let mut xl = [0.0; 2];
                let mut xr = [0.0; 2];
                xl[edge.axis] = if edge.left_face().high { 1.0 } else { -1.0 };
                xr[edge.axis] = -1.0;
                if sp.dim() == 2 {
                    xl[1 - edge.axis] = *s;
                    xr[1 - edge.axis] = *s;
                }
                let d =
                    self.evaluate(right, &xr[..sp.dim()]).unwrap() - self.evaluate(edge.left, &xl[..sp.dim()]).unwrap();
                total += w * d * d / edge.h_e;
            }
        }
        total.sqrt()
    }
}

/// Gauss points, weights and basis tables for over-integrated norms.
struct OverIntegration {
    points: Vec<([f64; 2], f64)>,
    values: Vec<Vec<f64>>,
    gradients: [Vec<Vec<f64>>; 2],
}

impl OverIntegration {
    fn new(sp: &DgSpace) -> Self {
        let g = gauss_rule(sp.degree + 3).expect("positive order");
        let jac: f64 = sp.mesh.h().iter().map(|h| 0.5 * h).product();
        let mut points = Vec::new();
        if sp.dim() == 1 {
            for (x, w) in g.nodes.iter().zip(&g.weights) {
                points.push(([*x, 0.0], w * jac));
            }
        } else {
            for (y, wy) in g.nodes.iter().zip(&g.weights) {
                for (x, wx) in g.nodes.iter().zip(&g.weights) {
                    points.push(([*x, *y], wx * wy * jac));
                }
            }
        }
        let dim = sp.dim();
        let values = points.iter().map(|(xi, _)| sp.basis_at(&xi[..dim])).collect();
        let mut gradients = [Vec::new(), Vec::new()];
        for (xi, _) in &points {
            let [gx, gy] = sp.basis_gradient_at(&xi[..dim]);
            gradients[0].push(gx);
            gradients[1].push(gy);
        }
        Self {
            points,
            values,
            gradients,
        }
    }
}
