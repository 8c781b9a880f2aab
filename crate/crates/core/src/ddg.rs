//! Direct DG (DDG) diffusion operator with interface correction.
//!
//! The element form is
//!
//! ```text
//! a_{φ,τ}(w, v) = -(φ ∇w, ∇v)_τ + (φ, ∂̂ₙw v + (w - {w}) ∂ₙv)_{∂τ}
//! ∂̂ₙw = β₀ [w]/h_e + {∂ₙw} + β₁ h_e [∂ₙ²w]
//! ```
//!
//! Summed over elements, each interior edge contributes
//! `-{φ} (∂̂ₙw [v] + [w] {∂ₙv})`. Zero-flux boundary edges contribute nothing.
//! With this sign convention `-a_φ` is the coercive form.

use std::sync::Arc;

use crate::dg::{DgField, DgSpace, EdgeTrace};
use crate::error::{Error, Result};
use crate::linalg::{BlockSparseBuilder, BlockSparseMatrix, LinearOperator};
use crate::mesh::{Face, Neighbor};

/// Coefficients `(β₀, β₁)` of the DDG numerical flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxParams {
    pub beta0: f64,
    pub beta1: f64,
}

impl FluxParams {
    pub fn new(beta0: f64, beta1: f64) -> Result<Self> {
        if !(beta0 > 0.0 && beta0.is_finite()) || !(beta1 >= 0.0 && beta1.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "flux coefficients need beta0 > 0 and beta1 >= 0, got ({beta0}, {beta1})"
            )));
        }
        Ok(Self { beta0, beta1 })
    }

    /// `(7/6, 0)`, the pair used for the published accuracy tests.
    pub fn reference() -> Self {
        Self {
            beta0: 7.0 / 6.0,
            beta1: 0.0,
        }
    }

    /// `(k² + 1/6, 0)`: `β₁ = 0` with the same admissibility margin `1/6`
    /// over `Γ(0) = k²` that the reference pair has for `k = 1`.
    pub fn for_degree(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        Self::new((k * k) as f64 + 1.0 / 6.0, 0.0)
    }

    /// `β₁ = 1/(2k(k+1))` with the given `β₀`.
    pub fn optimal_beta1(beta0: f64, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        Self::new(beta0, 1.0 / (2.0 * (k * (k + 1)) as f64))
    }
}

impl Default for FluxParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// `β₀ [w]/h_e + {∂ₙw} + β₁ h_e [∂ₙ²w]` at each point of an interior edge.
pub fn numerical_normal_derivative(trace: &EdgeTrace, h_e: f64, flux: FluxParams) -> Vec<f64> {
    let jump = trace.jump();
    let avg = trace.average_dn();
    let jump2 = trace.jump_dn2();
    jump.iter()
        .zip(&avg)
        .zip(&jump2)
        .map(|((j, a), j2)| flux.beta0 * j / h_e + a + flux.beta1 * h_e * j2)
        .collect()
}

/// Supremum over `v ∈ P_{k-1}` of `2 (v(1) - 2β₁ v'(1))² / ∫v²`.
///
/// The numerator is a rank-one quadratic form, so the supremum is
/// `2 bᵀ G⁻¹ b` with `G` the Gram matrix; in the Legendre basis `G` is
/// diagonal and this collapses to `Σ_{n<k} (2n+1)(1 - β₁ n(n+1))²`.
pub fn gamma_of_beta1(k: usize, beta1: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("degree must be at least 1, got {k}")));
    }
    Ok((0..k)
        .map(|n| {
            let nf = n as f64;
            let c = 1.0 - beta1 * nf * (nf + 1.0);
            (2.0 * nf + 1.0) * c * c
        })
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// `φ₀β₀ - φ₁Γ(β₁)`.
    pub margin: f64,
    pub gamma: f64,
}

/// Checks `φ₀β₀ ≥ φ₁Γ(β₁)` for mobility bounds `0 ≤ φ₀ ≤ φ₁`.
pub fn check_admissible(flux: FluxParams, phi0: f64, phi1: f64, k: usize) -> Result<Admissibility> {
    if !(0.0..=phi1).contains(&phi0) {
        return Err(Error::InvalidArgument(format!(
            "mobility bounds need 0 <= phi0 <= phi1, got ({phi0}, {phi1})"
        )));
    }
    let gamma = gamma_of_beta1(k, flux.beta1)?;
    let margin = phi0 * flux.beta0 - phi1 * gamma;
    Ok(Admissibility {
        admissible: phi0 > 0.0 && margin >= 0.0,
        margin,
        gamma,
    })
}

/// Mobility-independent pieces of `a_φ`, reused for every mobility field.
///
/// On a uniform mesh each node's volume contribution and each edge point's
/// coupling are the same up to the local mobility, so assembly reduces to
/// weighted sums into a fixed block pattern.
#[derive(Clone, Debug)]
pub struct DdgAssembler {
    space: Arc<DgSpace>,
    flux: FluxParams,
    pattern: BlockSparseMatrix,
    /// `volume[q]`: `n × n` contribution of node `q` per unit mobility.
    volume: Vec<Vec<f64>>,
    /// `kernels[kind][p][q]`: `n × n` block `q` (LL, LR, RL, RR) of the coupling of
    /// edge point `p` per unit mobility.
    kernels: Vec<Vec<[Vec<f64>; 4]>>,
    /// Left and right faces of each edge kind.
    faces: Vec<(Face, Face)>,
    edges: Vec<EdgeSlots>,
    diagonal: Vec<usize>,
}

#[derive(Clone, Debug)]
struct EdgeSlots {
    left: usize,
    right: usize,
    kind: usize,
    /// Slots of blocks `(L, L)`, `(L, R)`, `(R, L)`, `(R, R)`.
    slots: [usize; 4],
}

impl DdgAssembler {
    pub fn new(space: &Arc<DgSpace>, flux: FluxParams) -> Result<Self> {
        let mesh = space.mesh();
        let n = space.local_dofs();
        let mass = space.local_mass();

        let volume = (0..n)
            .map(|q| {
                let mut v = vec![0.0; n * n];
                for axis in 0..space.dim() {
                    let g = &space.local_gradient_table(axis)[q];
                    for a in 0..n {
                        for b in 0..n {
                            v[a * n + b] -= mass[q] * g[a] * g[b];
                        }
                    }
                }
                v
            })
            .collect();

        let mut builder = BlockSparseBuilder::new(mesh.element_count(), n);
        for e in 0..mesh.element_count() {
            builder.add(e, e, 0, 0, 0.0);
        }
        let mut kinds: Vec<(usize, i8, u64)> = Vec::new();
        let mut kernels = Vec::new();
        let mut faces = Vec::new();
        let mut raw_edges = Vec::new();
        for (id, edge) in mesh.edges().iter().enumerate() {
            let Neighbor::Element(right) = edge.right else { continue };
            let left = edge.left;
            for (r, c) in [(left, left), (left, right), (right, left), (right, right)] {
                builder.add(r, c, 0, 0, 0.0);
            }
            let key = (edge.axis, edge.sign as i8, edge.h_e.to_bits());
            let kind = match kinds.iter().position(|k| *k == key) {
                Some(k) => k,
                None => {
                    kinds.push(key);
                    let full = Self::edge_kernel(space, flux, id)?;
                    kernels.push(full.iter().map(|k| split_quarters(k, n)).collect());
                    faces.push((edge.left_face(), edge.right_face()));
                    kinds.len() - 1
                }
            };
            raw_edges.push((left, right, kind));
        }
        let mut pattern = builder.build();
        pattern.fill_zero();
        let slot = |r: usize, c: usize| pattern.block_position(r, c).expect("block in pattern");
        let edges = raw_edges
            .into_iter()
            .map(|(l, r, kind)| EdgeSlots {
                left: l,
                right: r,
                kind,
                slots: [slot(l, l), slot(l, r), slot(r, l), slot(r, r)],
            })
            .collect();
        let diagonal = (0..mesh.element_count()).map(|e| slot(e, e)).collect();
        Ok(Self {
            space: Arc::clone(space),
            flux,
            pattern,
            volume,
            kernels,
            faces,
            edges,
            diagonal,
        })
    }

    /// Per-point `2n × 2n` coupling `-w (J_i F_j + D_i J_j)` over `[left, right]` dofs,
    /// with `J` the jump, `D` the average normal derivative and `F` the flux row.
    fn edge_kernel(space: &DgSpace, flux: FluxParams, id: usize) -> Result<Vec<Vec<f64>>> {
        let edge = space.mesh().edge(id)?;
        let n = space.local_dofs();
        let tl = space.face_table(edge.left_face());
        let tr = space.face_table(edge.right_face());
        let weights = space.edge_weights(id)?;
        let (h_e, s) = (edge.h_e, edge.sign);
        Ok(weights
            .iter()
            .enumerate()
            .map(|(p, ws)| {
                let mut jump = vec![0.0; 2 * n];
                let mut avg_dn = vec![0.0; 2 * n];
                let mut jump2 = vec![0.0; 2 * n];
                for a in 0..n {
                    jump[a] = -tl.value[p][a];
                    jump[n + a] = tr.value[p][a];
                    avg_dn[a] = 0.5 * s * tl.d1[p][a];
                    avg_dn[n + a] = 0.5 * s * tr.d1[p][a];
                    jump2[a] = -tl.d2[p][a];
                    jump2[n + a] = tr.d2[p][a];
                }
                let flux_row: Vec<f64> = (0..2 * n)
                    .map(|j| flux.beta0 / h_e * jump[j] + avg_dn[j] + flux.beta1 * h_e * jump2[j])
                    .collect();
                let mut k = vec![0.0; 4 * n * n];
                for i in 0..2 * n {
                    for j in 0..2 * n {
                        k[i * 2 * n + j] = -ws * (jump[i] * flux_row[j] + avg_dn[i] * jump[j]);
                    }
                }
                k
            })
            .collect())
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    /// `A_φ` for nodal mobility `phi`, or `φ ≡ 1`.
    ///
    /// Volume terms use the nodal values of `phi`; edge terms use the
    /// average of its two traces.
    pub fn assemble(&self, phi: Option<&DgField>) -> Result<DdgOperator> {
        let space = &self.space;
        if let Some(p) = phi {
            if p.values().len() != space.n_dofs() || p.space().degree() != space.degree() {
                return Err(Error::InvalidArgument(
                    "mobility field lives on a different space".into(),
                ));
            }
        }
        let mut m = self.pattern.clone();
        for (e, &slot) in self.diagonal.iter().enumerate() {
            let blk = m.block_values_mut(slot);
            for (q, v) in self.volume.iter().enumerate() {
                let w = phi.map_or(1.0, |p| p.element_values(e)[q]);
                blk.iter_mut().zip(v).for_each(|(b, x)| *b += w * x);
            }
        }
        for edge in &self.edges {
            let (lf, rf) = self.faces[edge.kind];
            for (p, quarters) in self.kernels[edge.kind].iter().enumerate() {
                let phi_s = match phi {
                    Some(f) => {
                        let dot = |row: &[f64], e: usize| -> f64 {
                            row.iter().zip(f.element_values(e)).map(|(a, b)| a * b).sum()
                        };
                        0.5 * (dot(&space.face_table(lf).value[p], edge.left)
                            + dot(&space.face_table(rf).value[p], edge.right))
                    }
                    None => 1.0,
                };
                for (&slot, k) in edge.slots.iter().zip(quarters) {
                    let blk = m.block_values_mut(slot);
                    blk.iter_mut().zip(k).for_each(|(b, x)| *b += phi_s * x);
                }
            }
        }
        Ok(DdgOperator {
            space: Arc::clone(space),
            flux: self.flux,
            matrix: m,
        })
    }
}

fn split_quarters(k: &[f64], n: usize) -> [Vec<f64>; 4] {
    [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(bi, bj)| {
        (0..n)
            .flat_map(|i| {
                let start = (bi * n + i) * 2 * n + bj * n;
                k[start..start + n].iter().copied()
            })
            .collect()
    })
}

/// Assembled `a_φ` on a DG space: `a_φ(w, v) = vᵀ A w`.
#[derive(Clone, Debug)]
pub struct DdgOperator {
    space: Arc<DgSpace>,
    flux: FluxParams,
    matrix: BlockSparseMatrix,
}

impl DdgOperator {
    /// One-off assembly; see [`DdgAssembler`] for repeated mobility updates.
    pub fn assemble(space: &Arc<DgSpace>, flux: FluxParams, phi: Option<&DgField>) -> Result<Self> {
        DdgAssembler::new(space, flux)?.assemble(phi)
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn flux(&self) -> FluxParams {
        self.flux
    }

    pub fn matrix(&self) -> &BlockSparseMatrix {
        &self.matrix
    }

    fn check(&self, f: &DgField) -> Result<()> {
        if f.values().len() != self.space.n_dofs() || f.space().degree() != self.space.degree() {
            return Err(Error::InvalidArgument(
                "field and operator live on different spaces".into(),
            ));
        }
        Ok(())
    }

    /// Residual functional `v ↦ a_φ(w, v)` over the nodal test basis.
    pub fn apply(&self, w: &DgField) -> Result<Vec<f64>> {
        self.check(w)?;
        let mut y = vec![0.0; w.values().len()];
        self.matrix.apply(w.values(), &mut y);
        Ok(y)
    }

    /// `a_φ(w, v)`.
    pub fn bilinear(&self, w: &DgField, v: &DgField) -> Result<f64> {
        self.check(v)?;
        let aw = self.apply(w)?;
        Ok(aw.iter().zip(v.values()).map(|(a, b)| a * b).sum())
    }
}
