//! Decoupled semi-implicit time stepping.
//!
//! One step from `(u^m, c^m)`:
//!
//! ```text
//! β (c^{m+1} - c^m)/h_t = A₁ c^{m+1} - α c^{m+1} + u^m (+ f_c)
//! (u^{m+1} - u^m)/h_t   = χB A_{φ(u^m)} g(u^{m+1}) - χ A_{φ(u^m)} c^{m+1} (+ f_u)
//! ```
//!
//! (all in the weak form with the lumped mass), followed by the scaling
//! limiters. The `u` equation is solved by damped Newton; iterates are kept
//! inside the admissible range by a fraction-to-boundary rule.

use std::cell::RefCell;
use std::sync::{Arc, Mutex};

use crate::ddg::{DdgAssembler, DdgOperator, FluxParams};
use crate::dg::{DgField, DgSpace};
use crate::error::{Error, Result};
use crate::limiter::{self, LimiterReport};
use crate::linalg::{cg_solve, gmres_solve, BlockJacobi, BlockSparseMatrix, LinearOperator, SolveStats, SolverOptions};
use crate::model::{discrete_free_energy, KsParams, MobilityModel, SourceTerms};

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtRule {
    Fixed(f64),
    /// `factor · h_min²`.
    ScaledH2(f64),
}

impl DtRule {
    pub fn dt(&self, space: &DgSpace) -> f64 {
        match *self {
            DtRule::Fixed(dt) => dt,
            DtRule::ScaledH2(f) => f * space.mesh().h_min().powi(2),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepConfig {
    pub dt_rule: DtRule,
    /// Newton tolerance on the residual 2-norm per `√n` (nodal units).
    pub newton_tol: f64,
    pub max_newton: usize,
    /// How many times a step whose solve fails may be retried at half the
    /// size; the size grows back by doubling after each accepted step.
    pub step_cuts: usize,
    /// Fraction of the distance to the admissible boundary a Newton step may cover.
    pub sigma: f64,
    pub limiter: bool,
    pub cfl_check: bool,
    pub linear: SolverOptions,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt_rule: DtRule::ScaledH2(0.01),
            newton_tol: 1e-10,
            max_newton: 50,
            step_cuts: 0,
            sigma: 0.95,
            limiter: true,
            cfl_check: true,
            linear: SolverOptions::default(),
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        let dt_ok = match self.dt_rule {
            DtRule::Fixed(v) | DtRule::ScaledH2(v) => v > 0.0 && v.is_finite(),
        };
        if !dt_ok {
            return Err(Error::InvalidArgument("time step must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        if !(self.newton_tol > 0.0) || self.max_newton == 0 {
            return Err(Error::InvalidArgument(
                "Newton tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimulationState {
    pub t: f64,
    pub u: DgField,
    pub c: DgField,
    pub step: usize,
}

impl SimulationState {
    /// Interpolates the initial data at the nodes and limits once if the
    /// interpolant leaves the admissible range.
    pub fn from_initial<U, C>(
        space: &Arc<DgSpace>,
        model: MobilityModel,
        u0: U,
        c0: C,
    ) -> Result<(Self, Option<LimiterReport>)>
    where
        U: Fn(f64, f64) -> f64,
        C: Fn(f64, f64) -> f64,
    {
        let mut u = space.interpolate(u0);
        let mut c = space.interpolate(c0);
        let mut report = None;
        if u.values().iter().any(|&v| !model.is_admissible(v)) {
            let (lu, r) = limit_for(model, &u)?;
            u = lu;
            report = Some(r);
        }
        if c.nodal_extrema().0 < 0.0 {
            c = limiter::limit_c(&c)?.0;
        }
        Ok((Self { t: 0.0, u, c, step: 0 }, report))
    }
}

fn limit_for(model: MobilityModel, u: &DgField) -> Result<(DgField, LimiterReport)> {
    match model {
        MobilityModel::Saturated => limiter::limit_u(u),
        MobilityModel::Linear => limiter::limit_positive(u),
    }
}

#[derive(Clone, Debug, Default)]
pub struct NewtonStats {
    pub iterations: usize,
    /// Residual 2-norm (nodal units) after each iterate, starting with the guess.
    pub residuals: Vec<f64>,
    pub damping: usize,
    pub linear_iterations: usize,
    /// Set when the step needed the regularized potential.
    pub regularized: bool,
}

impl NewtonStats {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub h_t: f64,
    pub newton: NewtonStats,
    pub c_solve: SolveStats,
    /// Extremes of the `u` cell averages before limiting.
    pub u_average_range: (f64, f64),
    /// Extremes of the nodal `u` values before limiting.
    pub u_nodal_range: (f64, f64),
    pub u_limiter: Option<LimiterReport>,
    pub c_limiter: Option<LimiterReport>,
    pub mass_before: f64,
    pub mass_after: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// `φ₀ β h / h_t` with `φ₀` the smallest nodal mobility.
    pub cfl_ratio: Option<f64>,
}

impl StepReport {
    pub fn theta_min(&self) -> f64 {
        [&self.u_limiter, &self.c_limiter]
            .iter()
            .filter_map(|r| r.as_ref().map(LimiterReport::theta_min))
            .fold(1.0, f64::min)
    }
}

/// One row of the time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_u: f64,
    pub mass_c: f64,
    pub energy: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_c: f64,
    pub theta_min: f64,
}

/// Floor, relative to `max(1, ‖u^m‖∞)`, below which the fallback continues `g` linearly.
pub const REGULARIZATION: f64 = 1e-3;

/// `J = diag(d) - cb A diag(s)`, applied without forming it.
struct NewtonJacobian<'a> {
    a: &'a BlockSparseMatrix,
    cb: f64,
    cols: Vec<f64>,
    diag: Vec<f64>,
    scratch: RefCell<Vec<f64>>,
}

impl<'a> NewtonJacobian<'a> {
    fn new(a: &'a BlockSparseMatrix, cb: f64, cols: Vec<f64>, diag: Vec<f64>) -> Self {
        let n = diag.len();
        Self {
            a,
            cb,
            cols,
            diag,
            scratch: RefCell::new(vec![0.0; n]),
        }
    }

    fn block_jacobi(&self) -> Result<BlockJacobi> {
        let bs = self.a.block_size();
        let mut blocks = self.a.diagonal_blocks();
        for (r, blk) in blocks.chunks_mut(bs * bs).enumerate() {
            for i in 0..bs {
                for j in 0..bs {
                    blk[i * bs + j] *= -self.cb * self.cols[r * bs + j];
                }
                blk[i * bs + i] += self.diag[r * bs + i];
            }
        }
        BlockJacobi::from_blocks(bs, blocks)
    }
}

impl LinearOperator for NewtonJacobian<'_> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = self.scratch.borrow_mut();
        t.iter_mut().zip(x).zip(&self.cols).for_each(|((t, x), s)| *t = x * s);
        self.a.apply(&t, y);
        for ((y, x), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *y = d * x - self.cb * *y;
        }
    }
}

/// The density equation `M u - cb A g(u) = base` for one step.
struct DensitySystem<'a> {
    model: MobilityModel,
    a: &'a BlockSparseMatrix,
    mass: &'a [f64],
    base: Vec<f64>,
    cb: f64,
    tol: f64,
    step: usize,
    config: &'a StepConfig,
    // Φ exists only for symmetric A
    symmetric: bool,
}

impl DensitySystem<'_> {
    fn fail(&self, message: String) -> Error {
        Error::Newton {
            step: self.step,
            message,
        }
    }

    /// Residual in nodal units for nodal `u` and `w = g(u)`.
    fn residual(&self, u: &[f64], w: &[f64], out: &mut [f64]) -> f64 {
        self.a.apply(w, out);
        for (i, r) in out.iter_mut().enumerate() {
            *r = (self.mass[i] * u[i] - self.cb * *r - self.base[i]) / self.mass[i];
        }
        out.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    fn solve_linear(&self, jac: &NewtonJacobian, r: &[f64], stats: &mut NewtonStats) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = r.iter().zip(self.mass).map(|(ri, m)| -ri * m).collect();
        let pc = jac.block_jacobi()?;
        let (delta, ls) =
            gmres_solve(jac, &rhs, None, &pc, &self.config.linear).map_err(|e| self.fail(e.to_string()))?;
        stats.linear_iterations += ls.iterations;
        if !ls.converged {
            return Err(self.fail(format!("Jacobian solve stalled at residual {:e}", ls.residual)));
        }
        Ok(delta)
    }

    fn check_budget(&self, iterations: usize, rnorm: f64) -> Result<()> {
        if iterations >= self.config.max_newton {
            return Err(self.fail(format!(
                "no convergence after {iterations} iterations, residual {rnorm:e} (tolerance {:e})",
                self.tol
            )));
        }
        Ok(())
    }

    /// Damped Newton in `u`; iterates stay admissible by the fraction-to-boundary rule.
    fn solve_u(&self, mut u: Vec<f64>, stats: &mut NewtonStats) -> Result<Vec<f64>> {
        let n = u.len();
        let model = self.model;
        let g_of = |u: &[f64]| -> Result<Vec<f64>> { u.iter().map(|&v| model.g(v)).collect() };
        let mut r = vec![0.0; n];
        let mut rnorm = self.residual(&u, &g_of(&u)?, &mut r);
        stats.residuals.push(rnorm);
        let mut trial = vec![0.0; n];
        let mut r_trial = vec![0.0; n];
        let mut iterations = 0;
        while rnorm > self.tol {
            self.check_budget(iterations, rnorm)?;
            let gp: Vec<f64> = u.iter().map(|&v| model.g_prime(v)).collect::<Result<_>>()?;
            let jac = NewtonJacobian::new(self.a, self.cb, gp, self.mass.to_vec());
            let delta = self.solve_linear(&jac, &r, stats)?;
            let mut s: f64 = 1.0;
            for (ui, di) in u.iter().zip(&delta) {
                if let Some(d) = model.distance_to_boundary(*ui, *di) {
                    s = s.min(self.config.sigma * d / di.abs());
                }
            }
            let mut damped = s < 1.0;
            let mut halvings = 0;
            let new_norm = loop {
                for i in 0..n {
                    trial[i] = u[i] + s * delta[i];
                }
                let nn = self.residual(&trial, &g_of(&trial)?, &mut r_trial);
                if nn < rnorm || halvings >= 10 {
                    break nn;
                }
                s *= 0.5;
                halvings += 1;
                damped = true;
            };
            if damped {
                stats.damping += 1;
            }
            std::mem::swap(&mut u, &mut trial);
            std::mem::swap(&mut r, &mut r_trial);
            rnorm = new_norm;
            iterations += 1;
            stats.iterations += 1;
            stats.residuals.push(rnorm);
            if !rnorm.is_finite() {
                return Err(self.fail("residual is not finite".into()));
            }
        }
        Ok(u)
    }

    /// Newton in `w = g_δ(u)` for the potential continued linearly outside
    /// the range. With a symmetric `A` the equation is the gradient of the
    /// strictly convex `Φ(w) = Σ M_i H(w_i) - cb wᵀAw / 2 - baseᵀw`, `H' = g_δ⁻¹`,
    /// so its unique root is found by an Armijo search on `Φ`. Iterates may
    /// leave the range; the limiter restores it. Mass is conserved all the same.
    fn solve_regularized(&self, u0: &[f64], delta: f64, stats: &mut NewtonStats) -> Result<Vec<f64>> {
        let n = u0.len();
        let model = self.model;
        let inv =
            |w: &[f64]| -> (Vec<f64>, Vec<f64>) { w.iter().map(|&x| model.g_inverse_regularized(x, delta)).unzip() };
        let mut aw = vec![0.0; n];
        let mut phi = |w: &[f64]| -> f64 {
            self.a.apply(w, &mut aw);
            (0..n)
                .map(|i| {
                    self.mass[i] * model.g_inverse_antiderivative(w[i], delta)
                        - w[i] * (0.5 * self.cb * aw[i] + self.base[i])
                })
                .sum::<f64>()
        };
        let mut w: Vec<f64> = u0.iter().map(|&v| model.g_regularized(v, delta)).collect();
        let (mut u, mut du) = inv(&w);
        let mut r = vec![0.0; n];
        let mut rnorm = self.residual(&u, &w, &mut r);
        let mut energy = phi(&w);
        stats.residuals.push(rnorm);
        let (mut trial, mut r_trial) = (vec![0.0; n], vec![0.0; n]);
        let mut iterations = 0;
        while rnorm > self.tol {
            self.check_budget(iterations, rnorm)?;
            let diag: Vec<f64> = du.iter().zip(self.mass).map(|(d, m)| d * m).collect();
            let jac = NewtonJacobian::new(self.a, self.cb, vec![1.0; n], diag);
            let dw = self.solve_linear(&jac, &r, stats)?;
            // directional derivative of Φ along dw: gradient is M r
            let slope: f64 = (0..n).map(|i| self.mass[i] * r[i] * dw[i]).sum();
            let mut s = 1.0;
            let mut halvings = 0;
            let (new_norm, new_energy, tu, tdu) = loop {
                for i in 0..n {
                    trial[i] = w[i] + s * dw[i];
                }
                let (tu, tdu) = inv(&trial);
                let nn = self.residual(&tu, &trial, &mut r_trial);
                let e = if self.symmetric { phi(&trial) } else { f64::NAN };
                let accept = if self.symmetric {
                    e <= energy + 1e-4 * s * slope || nn < rnorm
                } else {
                    nn < rnorm
                };
                if (accept && nn.is_finite()) || halvings >= 40 {
                    break (nn, e, tu, tdu);
                }
                s *= 0.5;
                halvings += 1;
            };
            if halvings > 0 {
                stats.damping += 1;
            }
            std::mem::swap(&mut w, &mut trial);
            std::mem::swap(&mut r, &mut r_trial);
            (u, du) = (tu, tdu);
            rnorm = new_norm;
            energy = new_energy;
            iterations += 1;
            stats.iterations += 1;
            stats.residuals.push(rnorm);
            if !rnorm.is_finite() {
                return Err(self.fail("residual is not finite".into()));
            }
        }
        Ok(u)
    }
}

/// Everything fixed over a run.
pub struct Stepper {
    space: Arc<DgSpace>,
    params: KsParams,
    model: MobilityModel,
    flux: FluxParams,
    config: StepConfig,
    sources: Option<Arc<dyn SourceTerms>>,
    assembler: DdgAssembler,
    a1: DdgOperator,
    mass: Vec<f64>,
    // chemical system and its preconditioner for the last step size seen
    c_system: Mutex<Option<(u64, Arc<(BlockSparseMatrix, BlockJacobi)>)>>,
}

impl Stepper {
    pub fn new(
        space: &Arc<DgSpace>,
        params: KsParams,
        model: MobilityModel,
        flux: FluxParams,
        config: StepConfig,
        sources: Option<Arc<dyn SourceTerms>>,
    ) -> Result<Self> {
        config.validate()?;
        let assembler = DdgAssembler::new(space, flux)?;
        Ok(Self {
            space: Arc::clone(space),
            params,
            model,
            flux,
            a1: assembler.assemble(None)?,
            assembler,
            mass: space.mass_diagonal(),
            config,
            sources,
            c_system: Mutex::new(None),
        })
    }

    pub fn flux(&self) -> FluxParams {
        self.flux
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn params(&self) -> &KsParams {
        &self.params
    }

    pub fn model(&self) -> MobilityModel {
        self.model
    }

    pub fn dt(&self) -> f64 {
        self.config.dt_rule.dt(&self.space)
    }

    fn check(&self, f: &DgField) -> Result<()> {
        if f.values().len() != self.space.n_dofs() || f.space().degree() != self.space.degree() {
            return Err(Error::InvalidArgument("field lives on a different space".into()));
        }
        Ok(())
    }

    fn source_field(&self, t: f64, which: fn(&dyn SourceTerms, [f64; 2], f64) -> f64) -> Option<DgField> {
        self.sources
            .as_ref()
            .map(|s| self.space.interpolate(|x, y| which(s.as_ref(), [x, y], t)))
    }

    fn c_system_for(&self, h_t: f64) -> Result<Arc<(BlockSparseMatrix, BlockJacobi)>> {
        let mut cache = self.c_system.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((key, sys)) = cache.as_ref() {
            if *key == h_t.to_bits() {
                return Ok(Arc::clone(sys));
            }
        }
        let p = &self.params;
        let diag: Vec<f64> = self.mass.iter().map(|m| (p.beta / h_t + p.alpha) * m).collect();
        let k = self.a1.matrix().scaled_plus_diagonal(-1.0, &diag);
        let pc = BlockJacobi::new(&k)?;
        let sys = Arc::new((k, pc));
        *cache = Some((h_t.to_bits(), Arc::clone(&sys)));
        Ok(sys)
    }

    /// Linear implicit step for the chemical; `t_next` is where sources are sampled.
    pub fn step_c(&self, u_m: &DgField, c_m: &DgField, h_t: f64, t_next: f64) -> Result<(DgField, SolveStats)> {
        self.check(u_m)?;
        self.check(c_m)?;
        let p = &self.params;
        let s = p.beta / h_t;
        let system = self.c_system_for(h_t)?;
        let (k, pc) = (&system.0, &system.1);
        let fc = self.source_field(t_next, |s, x, t| s.f_c(x, t));
        let rhs: Vec<f64> = (0..self.mass.len())
            .map(|i| {
                let f = fc.as_ref().map_or(0.0, |f| f.values()[i]);
                self.mass[i] * (s * c_m.values()[i] + u_m.values()[i] + f)
            })
            .collect();
        let (x, stats) = match cg_solve(k, &rhs, Some(c_m.values()), pc, &self.config.linear) {
            Ok(r) if r.1.converged => r,
            // A₁ is not semidefinite for every flux pair; fall back to GMRES.
            _ => gmres_solve(k, &rhs, Some(c_m.values()), pc, &self.config.linear)?,
        };
        if !stats.converged {
            return Err(Error::LinearSolver(format!(
                "chemical solve stalled at residual {:e} after {} iterations",
                stats.residual, stats.iterations
            )));
        }
        Ok((self.space.from_values(x)?, stats))
    }

    /// Nonlinear implicit step for the density with mobility lagged at `u_m`.
    ///
    /// Newton runs in `u` first, keeping every iterate admissible. If that
    /// fails (no admissible solution, or nodes pinned near a bound) the step
    /// is re-solved with the potential continued linearly below
    /// `REGULARIZATION · max(1, ‖u^m‖∞)` and the limiter restores the bounds.
    pub fn step_u(
        &self,
        u_m: &DgField,
        c_next: &DgField,
        h_t: f64,
        t_next: f64,
        step: usize,
    ) -> Result<(DgField, NewtonStats)> {
        self.check(u_m)?;
        self.check(c_next)?;
        let model = self.model;
        let p = &self.params;
        let n = self.mass.len();
        let phi = u_m.map(|v| model.phi_unchecked(v));
        let a_phi = self.assembler.assemble(Some(&phi))?;

        // M u^m - h_t (χ A c - M f_u)
        let mut ac = vec![0.0; n];
        a_phi.matrix().apply(c_next.values(), &mut ac);
        let fu = self.source_field(t_next, |s, x, t| s.f_u(x, t));
        let base: Vec<f64> = (0..n)
            .map(|i| {
                let f = fu.as_ref().map_or(0.0, |f| f.values()[i]);
                self.mass[i] * u_m.values()[i] - h_t * (p.chi * ac[i] - self.mass[i] * f)
            })
            .collect();
        let scale = u_m.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let system = DensitySystem {
            model,
            a: a_phi.matrix(),
            mass: &self.mass,
            base,
            cb: h_t * p.chi * p.b,
            tol: self.config.newton_tol * (n as f64).sqrt() * scale,
            step,
            config: &self.config,
            symmetric: self.flux.beta1 == 0.0,
        };

        // nodes sitting exactly on a bound after limiting are nudged inside
        let eps = 1e-12 * scale;
        let u0: Vec<f64> = u_m
            .values()
            .iter()
            .map(|&v| match model {
                MobilityModel::Saturated => v.clamp(eps, 1.0 - eps),
                MobilityModel::Linear => v.max(eps),
            })
            .collect();
        let mut stats = NewtonStats::default();
        let u = match system.solve_u(u0.clone(), &mut stats) {
            Ok(u) => u,
            Err(first) => {
                stats.regularized = true;
                let delta = REGULARIZATION * scale;
                system.solve_regularized(&u0, delta, &mut stats).map_err(|second| {
                    let msg = |e: Error| match e {
                        Error::Newton { message, .. } => message,
                        other => other.to_string(),
                    };
                    system.fail(format!(
                        "{}; with the regularized potential: {}",
                        msg(first),
                        msg(second)
                    ))
                })?
            }
        };
        Ok((self.space.from_values(u)?, stats))
    }

    fn energy(&self, u: &DgField, c: &DgField) -> Result<f64> {
        Ok(discrete_free_energy(u, c, &self.params, self.model)?.total)
    }

    /// `c` first, then `u`, then the limiters.
    pub fn advance(&self, state: &SimulationState, h_t: f64) -> Result<(SimulationState, StepReport)> {
        if !(h_t > 0.0 && h_t.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {h_t}")));
        }
        let t_next = state.t + h_t;
        let step = state.step + 1;
        let mass_before = state.u.integral();
        let energy_before = self.energy(&state.u, &state.c)?;
        let (c, c_solve) = self.step_c(&state.u, &state.c, h_t, t_next)?;
        let (u, newton) = self.step_u(&state.u, &c, h_t, t_next, step)?;

        let averages = u.cell_averages();
        let u_average_range = averages
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
        let u_nodal_range = u.nodal_extrema();
        let (u, c, u_limiter, c_limiter) = if self.config.limiter {
            let (u, ru) = limit_for(self.model, &u)?;
            let (c, rc) = limiter::limit_c(&c)?;
            (u, c, Some(ru), Some(rc))
        } else {
            (u, c, None, None)
        };
        let (lo, hi) = u.nodal_extrema();
        let admissible_closed = lo >= 0.0 && (self.model == MobilityModel::Linear || hi <= 1.0);
        if !admissible_closed || !hi.is_finite() {
            return Err(Error::BoundViolation(format!(
                "u left its range at step {step}: [{lo}, {hi}]"
            )));
        }
        let cfl_ratio = self.config.cfl_check.then(|| {
            let phi0 = state
                .u
                .values()
                .iter()
                .map(|&v| self.model.phi_unchecked(v))
                .fold(f64::INFINITY, f64::min);
            phi0 * self.params.beta * self.space.mesh().h_min() / h_t
        });
        let energy_after = self.energy(&u, &c)?;
        let report = StepReport {
            h_t,
            newton,
            c_solve,
            u_average_range,
            u_nodal_range,
            u_limiter,
            c_limiter,
            mass_before,
            mass_after: u.integral(),
            energy_before,
            energy_after,
            cfl_ratio,
        };
        Ok((SimulationState { t: t_next, u, c, step }, report))
    }

    pub fn diagnostics(&self, state: &SimulationState, theta_min: f64) -> Result<DiagnosticsRecord> {
        let energy = self.energy(&state.u, &state.c)?;
        Ok(Self::record(state, energy, theta_min))
    }

    fn record(state: &SimulationState, energy: f64, theta_min: f64) -> DiagnosticsRecord {
        let (min_u, max_u) = state.u.nodal_extrema();
        DiagnosticsRecord {
            t: state.t,
            mass_u: state.u.integral(),
            mass_c: state.c.integral(),
            energy,
            min_u,
            max_u,
            min_c: state.c.nodal_extrema().0,
            theta_min,
        }
    }

    /// Marches to `t_final`, shortening the last step to land on it, and
    /// hands every accepted step to `observe`.
    pub fn run_to_time_with<F>(
        &self,
        mut state: SimulationState,
        t_final: f64,
        mut observe: F,
    ) -> Result<(SimulationState, Vec<DiagnosticsRecord>)>
    where
        F: FnMut(&SimulationState, &StepReport) -> Result<()>,
    {
        if t_final < state.t {
            return Err(Error::InvalidArgument(format!(
                "final time {t_final} is before the current time {}",
                state.t
            )));
        }
        let dt = self.dt();
        let min_h = dt / 2f64.powi(self.config.step_cuts as i32);
        let mut h_cur = dt;
        let mut records = Vec::new();
        while state.t < t_final {
            let remaining = t_final - state.t;
            let landing = remaining <= h_cur * (1.0 + 1e-9);
            let h = if landing { remaining } else { h_cur };
            let (mut next, report) = match self.advance(&state, h) {
                Ok(r) => r,
                Err(Error::Newton { .. } | Error::BoundViolation(_) | Error::Inadmissible { .. })
                    if h_cur > min_h * (1.0 + 1e-9) =>
                {
                    h_cur *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            h_cur = (2.0 * h_cur).min(dt);
            if landing {
                next.t = t_final;
            }
            observe(&next, &report)?;
            records.push(Self::record(&next, report.energy_after, report.theta_min()));
            state = next;
        }
        Ok((state, records))
    }

    pub fn run_to_time(
        &self,
        state: SimulationState,
        t_final: f64,
    ) -> Result<(SimulationState, Vec<DiagnosticsRecord>)> {
        self.run_to_time_with(state, t_final, |_, _| Ok(()))
    }
}
