//! Block-sparse operators and Krylov solvers.
//!
//! Blocks are keyed by element pairs; each row of blocks holds the element
//! itself and its face neighbours. Both solvers use block-Jacobi
//! preconditioning and report the true residual `‖b - Ax‖₂` at exit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner {
    /// `z ≈ A⁻¹ r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Accumulates blocks before compression into [`BlockSparseMatrix`].
#[derive(Clone, Debug)]
pub struct BlockSparseBuilder {
    bs: usize,
    rows: Vec<Vec<(usize, Vec<f64>)>>,
}

impl BlockSparseBuilder {
    pub fn new(block_rows: usize, block_size: usize) -> Self {
        Self {
            bs: block_size,
            rows: vec![Vec::new(); block_rows],
        }
    }

    fn block_mut(&mut self, row: usize, col: usize) -> &mut Vec<f64> {
        let bs = self.bs;
        let r = &mut self.rows[row];
        let pos = match r.iter().position(|(c, _)| *c == col) {
            Some(p) => p,
            None => {
                r.push((col, vec![0.0; bs * bs]));
                r.len() - 1
            }
        };
        &mut r[pos].1
    }

    /// Adds `scale * value` to entry `(i, j)` of block `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, i: usize, j: usize, value: f64) {
        let bs = self.bs;
        self.block_mut(row, col)[i * bs + j] += value;
    }

    /// Adds a dense row-major block.
    pub fn add_block(&mut self, row: usize, col: usize, block: &[f64]) {
        let b = self.block_mut(row, col);
        for (dst, src) in b.iter_mut().zip(block) {
            *dst += src;
        }
    }

    pub fn build(mut self) -> BlockSparseMatrix {
        let mut row_ptr = Vec::with_capacity(self.rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in self.rows.iter_mut() {
            r.sort_by_key(|(c, _)| *c);
            for (c, b) in r.drain(..) {
                cols.push(c);
                vals.extend(b);
            }
            row_ptr.push(cols.len());
        }
        BlockSparseMatrix {
            bs: self.bs,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Block compressed-row matrix with square dense blocks.
#[derive(Clone, Debug)]
pub struct BlockSparseMatrix {
    bs: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl BlockSparseMatrix {
    pub fn identity(block_rows: usize, block_size: usize) -> Self {
        let mut b = BlockSparseBuilder::new(block_rows, block_size);
        for r in 0..block_rows {
            for i in 0..block_size {
                b.add(r, r, i, i, 1.0);
            }
        }
        b.build()
    }

    /// Single-block matrix from a dense row-major square array.
    pub fn from_dense(n: usize, data: &[f64]) -> Self {
        let mut b = BlockSparseBuilder::new(1, n);
        b.add_block(0, 0, data);
        b.build()
    }

    pub fn block_size(&self) -> usize {
        self.bs
    }

    pub fn block_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn blocks_in_row(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    /// Iterates `(col, block)` pairs of a block row.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, &[f64])> {
        let bs2 = self.bs * self.bs;
        (self.row_ptr[row]..self.row_ptr[row + 1]).map(move |p| (self.cols[p], &self.vals[p * bs2..(p + 1) * bs2]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let bs = self.bs;
        self.row(i / bs)
            .find(|(c, _)| *c == j / bs)
            .map(|(_, b)| b[(i % bs) * bs + j % bs])
            .unwrap_or(0.0)
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "spmv dimension mismatch: matrix {}, vector {}",
                self.dim(),
                x.len()
            )));
        }
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// Storage slot of block `(row, col)`, if present.
    pub fn block_position(&self, row: usize, col: usize) -> Option<usize> {
        (self.row_ptr[row]..self.row_ptr[row + 1]).find(|&p| self.cols[p] == col)
    }

    /// Row-major entries of the block stored in `slot`.
    pub fn block_values_mut(&mut self, slot: usize) -> &mut [f64] {
        let n = self.bs * self.bs;
        &mut self.vals[slot * n..(slot + 1) * n]
    }

    /// Copies of the diagonal blocks, zero where a block is not stored.
    pub fn diagonal_blocks(&self) -> Vec<f64> {
        let nb = self.bs * self.bs;
        let mut out = vec![0.0; self.block_rows() * nb];
        for (r, blk) in out.chunks_mut(nb).enumerate() {
            if let Some(slot) = self.block_position(r, r) {
                blk.copy_from_slice(&self.vals[slot * nb..(slot + 1) * nb]);
            }
        }
        out
    }

    pub fn fill_zero(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `self * alpha + diag(d)`; every block row must hold its diagonal block.
    pub fn scaled_plus_diagonal(&self, alpha: f64, d: &[f64]) -> Self {
        let mut out = self.clone();
        let bs = self.bs;
        for v in out.vals.iter_mut() {
            *v *= alpha;
        }
        for r in 0..self.block_rows() {
            let p = (self.row_ptr[r]..self.row_ptr[r + 1])
                .find(|&p| self.cols[p] == r)
                .expect("diagonal block present");
            for i in 0..bs {
                out.vals[p * bs * bs + i * bs + i] += d[r * bs + i];
            }
        }
        out
    }

    /// Max over entries of `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let bs = self.bs;
        let mut worst: f64 = 0.0;
        for r in 0..self.block_rows() {
            for (c, blk) in self.row(r) {
                for i in 0..bs {
                    for j in 0..bs {
                        let (gi, gj) = (r * bs + i, c * bs + j);
                        if gi < n && gj < n {
                            worst = worst.max((blk[i * bs + j] - self.get(gj, gi)).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Dense copy, for tests and small diagnostics.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let bs = self.bs;
        let mut m = DMatrix::zeros(n, n);
        for r in 0..self.block_rows() {
            for (c, blk) in self.row(r) {
                for i in 0..bs {
                    for j in 0..bs {
                        m[(r * bs + i, c * bs + j)] += blk[i * bs + j];
                    }
                }
            }
        }
        m
    }
}

impl LinearOperator for BlockSparseMatrix {
    fn dim(&self) -> usize {
        self.block_rows() * self.bs
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self.bs {
            2 => self.apply_fixed::<2>(x, y),
            3 => self.apply_fixed::<3>(x, y),
            4 => self.apply_fixed::<4>(x, y),
            9 => self.apply_fixed::<9>(x, y),
            16 => self.apply_fixed::<16>(x, y),
            _ => self.apply_dynamic(x, y),
        }
    }
}

impl BlockSparseMatrix {
    fn apply_fixed<const B: usize>(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.chunks_exact_mut(B).enumerate() {
            let mut acc = [0.0; B];
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[p];
                let xc: &[f64; B] = x[c * B..(c + 1) * B].try_into().expect("block slice");
                let blk = &self.vals[p * B * B..(p + 1) * B * B];
                for (i, a) in acc.iter_mut().enumerate() {
                    let row: &[f64; B] = blk[i * B..(i + 1) * B].try_into().expect("block row");
                    for j in 0..B {
                        *a += row[j] * xc[j];
                    }
                }
            }
            yr.copy_from_slice(&acc);
        }
    }

    fn apply_dynamic(&self, x: &[f64], y: &mut [f64]) {
        let bs = self.bs;
        for r in 0..self.block_rows() {
            let yr = &mut y[r * bs..(r + 1) * bs];
            yr.iter_mut().for_each(|v| *v = 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[p];
                let xc = &x[c * bs..(c + 1) * bs];
                let blk = &self.vals[p * bs * bs..(p + 1) * bs * bs];
                for i in 0..bs {
                    let row = &blk[i * bs..(i + 1) * bs];
                    yr[i] += row.iter().zip(xc).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
    }
}

/// Inverse diagonal blocks of a [`BlockSparseMatrix`].
pub struct BlockJacobi {
    bs: usize,
    inv: Vec<f64>,
}

impl BlockJacobi {
    pub fn new(a: &BlockSparseMatrix) -> Result<Self> {
        Self::from_blocks(a.bs, a.diagonal_blocks())
    }

    /// Inverts consecutive row-major `bs × bs` blocks in place.
    pub fn from_blocks(bs: usize, mut blocks: Vec<f64>) -> Result<Self> {
        if bs == 0 || blocks.len() % (bs * bs) != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form blocks of size {bs}",
                blocks.len()
            )));
        }
        let mut m = DMatrix::<f64>::zeros(bs, bs);
        for (r, blk) in blocks.chunks_mut(bs * bs).enumerate() {
            // row-major in, column-major nalgebra: this inverts the transpose
            m.as_mut_slice().copy_from_slice(blk);
            if !m.try_inverse_mut() {
                return Err(Error::LinearSolver(format!("singular diagonal block in block row {r}")));
            }
            blk.copy_from_slice(m.as_slice());
        }
        Ok(Self { bs, inv: blocks })
    }
}

impl Preconditioner for BlockJacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let bs = self.bs;
        for (b, (rb, zb)) in r.chunks(bs).zip(z.chunks_mut(bs)).enumerate() {
            let m = &self.inv[b * bs * bs..(b + 1) * bs * bs];
            for i in 0..bs {
                zb[i] = m[i * bs..(i + 1) * bs].iter().zip(rb).map(|(a, c)| a * c).sum();
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// True residual `‖b - Ax‖₂` recomputed at exit.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Relative tolerance on `‖b - Ax‖₂ / ‖b‖₂`.
    pub tol: f64,
    /// Absolute floor on the residual norm.
    pub abs_tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            abs_tol: 1e-300,
            max_iter: 1000,
            restart: 50,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    r
}

fn check_dims<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x0: Option<&[f64]>) -> Result<()> {
    if b.len() != a.dim() || x0.is_some_and(|x| x.len() != a.dim()) {
        return Err(Error::InvalidArgument(format!(
            "solver dimension mismatch: operator {}, rhs {}",
            a.dim(),
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolver("non-finite right-hand side".into()));
    }
    Ok(())
}

/// Preconditioned conjugate gradients for symmetric positive definite `A`.
pub fn cg_solve<A, P>(
    a: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: &P,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveStats)>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    check_dims(a, b, x0)?;
    let n = b.len();
    let target = (opts.tol * norm(b)).max(opts.abs_tol);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut r = residual(a, b, &x);
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    if norm(&r) > target {
        precond.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < opts.max_iter {
            a.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !pap.is_finite() || !rz.is_finite() {
                return Err(Error::LinearSolver("NaN encountered in CG".into()));
            }
            if pap <= 0.0 {
                return Err(Error::LinearSolver("operator is not positive definite".into()));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            if norm(&r) <= target {
                break;
            }
            precond.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
    let res = norm(&residual(a, b, &x));
    if !res.is_finite() {
        return Err(Error::LinearSolver("NaN encountered in CG".into()));
    }
    Ok((
        x,
        SolveStats {
            iterations,
            residual: res,
            converged: res <= target * (1.0 + 1e-8) || res <= opts.abs_tol,
        },
    ))
}

/// Restarted GMRES with right preconditioning.
pub fn gmres_solve<A, P>(
    a: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: &P,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveStats)>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    check_dims(a, b, x0)?;
    let n = b.len();
    let m = opts.restart.max(1);
    let target = (opts.tol * norm(b)).max(opts.abs_tol);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut iterations = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];

    'outer: while iterations < opts.max_iter {
        let r = residual(a, b, &x);
        let beta = norm(&r);
        if !beta.is_finite() {
            return Err(Error::LinearSolver("NaN encountered in GMRES".into()));
        }
        if beta <= target {
            break;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for j in 0..m {
            precond.apply(&v[j], &mut z);
            a.apply(&z, &mut w);
            // modified Gram-Schmidt
            for i in 0..=j {
                let hij = dot(&w, &v[i]);
                h[i][j] = hij;
                w.iter_mut().zip(&v[i]).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if d == 0.0 || !d.is_finite() {
                if !d.is_finite() {
                    return Err(Error::LinearSolver("NaN encountered in GMRES".into()));
                }
                k_used = j;
                break;
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iterations += 1;
            k_used = j + 1;
            let happy = hn <= 1e-14 * beta;
            if g[j + 1].abs() <= target || iterations >= opts.max_iter || happy {
                break;
            }
            v.push(w.iter().map(|wk| wk / hn).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            update.iter_mut().zip(vi).for_each(|(u, vk)| *u += yi * vk);
        }
        precond.apply(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
        if k_used == 0 {
            break 'outer;
        }
    }
    let res = norm(&residual(a, b, &x));
    if !res.is_finite() {
        return Err(Error::LinearSolver("NaN encountered in GMRES".into()));
    }
    Ok((
        x,
        SolveStats {
            iterations,
            residual: res,
            converged: res <= target * (1.0 + 1e-6) || res <= opts.abs_tol,
        },
    ))
}
