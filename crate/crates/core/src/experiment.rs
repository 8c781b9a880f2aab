//! Named experiments and the convergence harness.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::ddg::{check_admissible, FluxParams};
use crate::dg::DgSpace;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, Domain, Mesh};
use crate::model::{manufactured_pair, KsParams, MmsSources, MobilityModel, SourceTerms, SpaceTimeField};
use crate::stepper::{DiagnosticsRecord, DtRule, SimulationState, StepConfig, StepReport, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Conv1d,
    Conv2d,
    Equilibrium,
    Blowup,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Conv1d => "conv1d",
            Self::Conv2d => "conv2d",
            Self::Equilibrium => "equilibrium",
            Self::Blowup => "blowup",
            Self::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "conv1d" => Self::Conv1d,
            "conv2d" => Self::Conv2d,
            "equilibrium" => Self::Equilibrium,
            "blowup" => Self::Blowup,
            "custom" => Self::Custom,
            _ => return Err(Error::Config(format!("unknown experiment '{s}'"))),
        })
    }
}

/// Initial data families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    /// `u = 0.3 s + 0.5`, `c = s + 2` with `s = sin x` (1D) or `sin x cos y` (2D).
    Manufactured,
    /// `u = 0.8 exp(-r/0.05)`, `c = 0.1 (1 + 0.1 sin 2πx sin 2πy)` about the domain centre.
    Bump,
    /// `u = 840 exp(-84 r²)`, `c = 420 exp(-42 r²)` about the domain centre.
    Focus,
    Uniform {
        u: f64,
        c: f64,
    },
}

impl InitialData {
    pub fn name(&self) -> String {
        match self {
            Self::Manufactured => "manufactured".into(),
            Self::Bump => "bump".into(),
            Self::Focus => "focus".into(),
            Self::Uniform { .. } => "uniform".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Elements per axis; several values make a sweep.
    pub n: Vec<usize>,
    pub degree: usize,
    /// `None` picks [`FluxParams::for_degree`].
    pub flux: Option<FluxParams>,
    pub params: KsParams,
    pub model: MobilityModel,
    pub boundary: BoundaryKind,
    pub dim: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub t_final: f64,
    pub dt_rule: DtRule,
    pub initial: InitialData,
    /// Adds the manufactured source terms.
    pub sources: bool,
    pub limiter: bool,
    pub newton_tol: f64,
    /// See [`StepConfig::step_cuts`].
    pub step_cuts: usize,
    pub output_dir: Option<PathBuf>,
    pub snapshot_times: Vec<f64>,
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let ex1 = KsParams::new(0.1, 0.2, 0.2, 0.01).expect("valid constants");
        let base = Self {
            kind,
            n: vec![8, 16, 32, 64, 128],
            degree: 1,
            flux: None,
            params: ex1,
            model: MobilityModel::Saturated,
            boundary: BoundaryKind::Periodic,
            dim: 1,
            lower: [0.0, 0.0],
            upper: [2.0 * PI, 2.0 * PI],
            t_final: 0.01,
            dt_rule: DtRule::ScaledH2(0.01),
            initial: InitialData::Manufactured,
            sources: true,
            limiter: true,
            newton_tol: 1e-10,
            step_cuts: 0,
            output_dir: None,
            snapshot_times: Vec::new(),
        };
        match kind {
            ExperimentKind::Conv1d | ExperimentKind::Custom => base,
            ExperimentKind::Conv2d => Self {
                n: vec![10, 20, 30, 40],
                dim: 2,
                ..base
            },
            ExperimentKind::Equilibrium => Self {
                n: vec![32],
                params: KsParams::new(0.1, 0.5, 0.02, 1.0).expect("valid constants"),
                dim: 2,
                lower: [0.0, 0.0],
                upper: [1.0, 1.0],
                t_final: 0.5,
                initial: InitialData::Bump,
                sources: false,
                snapshot_times: vec![0.0, 0.1, 0.5],
                ..base
            },
            ExperimentKind::Blowup => Self {
                n: vec![32],
                degree: 2,
                params: KsParams::from_diffusivity(1.0, 1.0, 1.0, 1.0).expect("valid constants"),
                model: MobilityModel::Linear,
                boundary: BoundaryKind::ZeroFlux,
                dim: 2,
                lower: [-0.5, -0.5],
                upper: [0.5, 0.5],
                t_final: 5e-5,
                initial: InitialData::Focus,
                sources: false,
                snapshot_times: vec![0.0, 1e-5, 5e-5],
                step_cuts: 8,
                ..base
            },
        }
    }

    /// Sweep preset for a convergence table at degree `k`.
    pub fn convergence(kind: ExperimentKind, degree: usize) -> Result<Self> {
        let n = match (kind, degree) {
            (ExperimentKind::Conv1d, 1) => vec![8, 16, 32, 64, 128],
            (ExperimentKind::Conv1d, _) => vec![4, 8, 16, 32, 64],
            (ExperimentKind::Conv2d, 1) => vec![10, 20, 30, 40],
            (ExperimentKind::Conv2d, _) => vec![4, 8, 16],
            _ => {
                return Err(Error::Config(format!(
                    "'{}' is not a convergence experiment",
                    kind.name()
                )))
            }
        };
        let cfg = Self {
            n,
            degree,
            ..Self::preset(kind)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("at least one positive element count is required".into());
        }
        if self.degree == 0 {
            return bad("degree must be at least 1".into());
        }
        if !(self.dim == 1 || self.dim == 2) {
            return bad(format!("dimension must be 1 or 2, got {}", self.dim));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("final time must be non-negative, got {}", self.t_final));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.t_final).contains(&t)) {
            return bad("snapshot times must lie in [0, t_final]".into());
        }
        if self.sources && self.initial != InitialData::Manufactured {
            return bad("source terms are only defined for the manufactured initial data".into());
        }
        if self.kind == ExperimentKind::Blowup
            && (self.model != MobilityModel::Linear || self.boundary != BoundaryKind::ZeroFlux)
        {
            return bad("blowup requires the linear model with zero-flux boundaries".into());
        }
        if let InitialData::Uniform { u, c } = self.initial {
            if !self.model.is_admissible(u) || c < 0.0 {
                return bad(format!("uniform state ({u}, {c}) is not admissible"));
            }
        }
        if let Some(f) = self.flux {
            let a = check_admissible(f, 1.0, 1.0, self.degree)?;
            if !a.admissible {
                return bad(format!(
                    "flux ({}, {}) is not admissible for degree {}: beta0 must be at least {}",
                    f.beta0, f.beta1, self.degree, a.gamma
                ));
            }
        }
        self.domain()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain> {
        if self.dim == 1 {
            Domain::interval(self.lower[0], self.upper[0])
        } else {
            Domain::rectangle(self.lower, self.upper)
        }
    }

    pub fn space(&self, n: usize) -> Result<Arc<DgSpace>> {
        let mesh = Mesh::uniform(self.domain()?, n, self.boundary)?;
        DgSpace::new(mesh, self.degree)
    }

    pub fn flux(&self) -> Result<FluxParams> {
        self.flux.map_or_else(|| FluxParams::for_degree(self.degree), Ok)
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            dt_rule: self.dt_rule,
            newton_tol: self.newton_tol,
            step_cuts: self.step_cuts,
            limiter: self.limiter,
            ..Default::default()
        }
    }

    fn centre(&self) -> [f64; 2] {
        [
            0.5 * (self.lower[0] + self.upper[0]),
            0.5 * (self.lower[1] + self.upper[1]),
        ]
    }

    /// Initial profiles `(u₀, c₀)` as functions of `(x, y)`.
    pub fn initial_profiles(&self) -> (Box<dyn Fn(f64, f64) -> f64 + Sync>, Box<dyn Fn(f64, f64) -> f64 + Sync>) {
        let [cx, cy] = self.centre();
        let dim = self.dim;
        let r2 = move |x: f64, y: f64| {
            let dy = if dim == 2 { y - cy } else { 0.0 };
            (x - cx).powi(2) + dy * dy
        };
        match self.initial {
            InitialData::Manufactured => {
                let (u, c) = manufactured_pair(self.dim == 2);
                (
                    Box::new(move |x, y| u.value([x, y], 0.0)),
                    Box::new(move |x, y| c.value([x, y], 0.0)),
                )
            }
            InitialData::Bump => (
                Box::new(move |x, y| 0.8 * (-r2(x, y).sqrt() / 0.05).exp()),
                Box::new(move |x, y| {
                    let s = if dim == 2 { (2.0 * PI * y).sin() } else { 1.0 };
                    0.1 * (1.0 + 0.1 * (2.0 * PI * x).sin() * s)
                }),
            ),
            InitialData::Focus => (
                Box::new(move |x, y| 840.0 * (-84.0 * r2(x, y)).exp()),
                Box::new(move |x, y| 420.0 * (-42.0 * r2(x, y)).exp()),
            ),
            InitialData::Uniform { u, c } => (Box::new(move |_, _| u), Box::new(move |_, _| c)),
        }
    }

    pub fn source_terms(&self) -> Option<Arc<dyn SourceTerms>> {
        self.sources.then(|| {
            let (u, c) = manufactured_pair(self.dim == 2);
            Arc::new(MmsSources::new(u, c, self.params, self.model)) as Arc<dyn SourceTerms>
        })
    }

    /// Stepper and initial state at resolution `n`.
    pub fn setup(&self, n: usize) -> Result<(Stepper, SimulationState)> {
        self.validate()?;
        let space = self.space(n)?;
        let stepper = Stepper::new(
            &space,
            self.params,
            self.model,
            self.flux()?,
            self.step_config(),
            self.source_terms(),
        )?;
        let (u0, c0) = self.initial_profiles();
        let (state, _) = SimulationState::from_initial(&space, self.model, u0, c0)?;
        Ok((stepper, state))
    }
}

/// Outcome of a single-resolution run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub n: usize,
    pub state: SimulationState,
    pub initial: DiagnosticsRecord,
    pub records: Vec<DiagnosticsRecord>,
    /// `L²` errors against the manufactured solution, when there is one.
    pub errors: Option<(f64, f64)>,
    pub newton_iterations: usize,
    pub damping: usize,
    pub limited_elements: usize,
}

/// Runs one resolution to `t_final`, stopping at each snapshot time.
pub fn simulate<F>(cfg: &ExperimentConfig, n: usize, mut observe: F) -> Result<RunOutcome>
where
    F: FnMut(&Stepper, &SimulationState, Option<&StepReport>) -> Result<()>,
{
    let (stepper, mut state) = cfg.setup(n)?;
    let initial = stepper.diagnostics(&state, 1.0)?;
    observe(&stepper, &state, None)?;
    let mut stops: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|&t| t > 0.0).collect();
    stops.push(cfg.t_final);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut records = Vec::new();
    let (mut newton_iterations, mut damping, mut limited_elements) = (0, 0, 0);
    for stop in stops {
        let (next, recs) = stepper.run_to_time_with(state, stop, |s, r| {
            newton_iterations += r.newton.iterations;
            damping += r.newton.damping;
            limited_elements += r.u_limiter.as_ref().map_or(0, |l| l.limited);
            observe(&stepper, s, Some(r))
        })?;
        records.extend(recs);
        state = next;
    }
    let errors = (cfg.initial == InitialData::Manufactured).then(|| {
        let (ue, ce) = manufactured_pair(cfg.dim == 2);
        let t = state.t;
        (
            state.u.l2_error(|x, y| ue.value([x, y], t)),
            state.c.l2_error(|x, y| ce.value([x, y], t)),
        )
    });
    Ok(RunOutcome {
        n,
        state,
        initial,
        records,
        errors,
        newton_iterations,
        damping,
        limited_elements,
    })
}

/// One row of a convergence table; rates are blank on the first row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub err_u: f64,
    pub rate_u: Option<f64>,
    pub err_c: f64,
    pub rate_c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

/// `log(e_{i-1}/e_i) / log(N_i/N_{i-1})` for consecutive rows.
pub fn convergence_rates(errors: &[(usize, f64)]) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(Error::InvalidArgument("at least two resolutions are needed".into()));
    }
    if errors.iter().any(|&(_, e)| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("errors must be positive".into()));
    }
    if errors.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("resolutions must increase".into()));
    }
    let mut out = vec![None];
    for w in errors.windows(2) {
        let (n0, e0) = w[0];
        let (n1, e1) = w[1];
        out.push(Some((e0 / e1).ln() / (n1 as f64 / n0 as f64).ln()));
    }
    Ok(out)
}

impl ConvergenceTable {
    pub fn from_errors(degree: usize, errors: &[(usize, f64, f64)]) -> Result<Self> {
        let ru = convergence_rates(&errors.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>())?;
        let rc = convergence_rates(&errors.iter().map(|e| (e.0, e.2)).collect::<Vec<_>>())?;
        Ok(Self {
            degree,
            rows: errors
                .iter()
                .zip(ru.into_iter().zip(rc))
                .map(|(&(n, eu, ec), (rate_u, rate_c))| ConvergenceRow {
                    n,
                    err_u: eu,
                    rate_u,
                    err_c: ec,
                    rate_c,
                })
                .collect(),
        })
    }

    /// Plain-text table with two-digit rates.
    pub fn render(&self) -> String {
        let mut s = format!(
            "# degree {}\n{:>6} {:>12} {:>8} {:>12} {:>8}\n",
            self.degree, "N", "err_u", "rate_u", "err_c", "rate_c"
        );
        let rate = |r: Option<f64>| r.map_or("--".to_string(), |v| format!("{v:.2}"));
        for r in &self.rows {
            s += &format!(
                "{:>6} {:>12.3e} {:>8} {:>12.3e} {:>8}\n",
                r.n,
                r.err_u,
                rate(r.rate_u),
                r.err_c,
                rate(r.rate_c)
            );
        }
        s
    }
}

/// Runs every resolution of a manufactured-solution sweep concurrently.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    if cfg.initial != InitialData::Manufactured {
        return Err(Error::Config(
            "convergence sweeps need the manufactured initial data".into(),
        ));
    }
    let sweep = ExperimentConfig {
        snapshot_times: Vec::new(),
        ..cfg.clone()
    };
    let mut errors: Vec<(usize, f64, f64)> = sweep
        .n
        .par_iter()
        .map(|&n| {
            let out = simulate(&sweep, n, |_, _, _| Ok(()))?;
            let (eu, ec) = out.errors.expect("manufactured run");
            Ok((n, eu, ec))
        })
        .collect::<Result<_>>()?;
    errors.sort_by_key(|e| e.0);
    ConvergenceTable::from_errors(cfg.degree, &errors)
}

/// Per-resolution part of a [`RunSummary`].
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub n: usize,
    pub steps: usize,
    pub initial: DiagnosticsRecord,
    pub last: DiagnosticsRecord,
    pub errors: Option<(f64, f64)>,
    pub newton_iterations: usize,
    pub damping: usize,
    pub limited_elements: usize,
    /// Largest `|mass_u(t) - mass_u(0)| / |mass_u(0)|` over the records.
    pub mass_drift: f64,
    /// Largest per-step energy increase (negative when strictly dissipative).
    pub max_energy_increase: f64,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub kind: ExperimentKind,
    pub runs: Vec<RunRecord>,
    pub table: Option<ConvergenceTable>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn render(&self) -> String {
        let mut s = format!("experiment {}\n", self.kind.name());
        for r in &self.runs {
            s += &format!(
                "N={} steps={} t={} mass_u={:e} mass_drift={:e} energy={:e} max_dE={:e} u=[{:e}, {:e}] \
                 min_c={:e} newton={} damped={} limited={}\n",
                r.n,
                r.steps,
                r.last.t,
                r.last.mass_u,
                r.mass_drift,
                r.last.energy,
                r.max_energy_increase,
                r.last.min_u,
                r.last.max_u,
                r.last.min_c,
                r.newton_iterations,
                r.damping,
                r.limited_elements,
            );
            if let Some((eu, ec)) = r.errors {
                s += &format!("  L2 errors: u {eu:e}, c {ec:e}\n");
            }
        }
        if let Some(t) = &self.table {
            s += &t.render();
        }
        s
    }
}

fn time_tag(t: f64) -> String {
    format!("{t:e}")
}

/// Runs every resolution of `cfg`, writing time series and snapshots into
/// `cfg.output_dir` when one is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
    }
    let runs: Vec<(RunRecord, Vec<PathBuf>)> = cfg
        .n
        .par_iter()
        .map(|&n| {
            let mut files = Vec::new();
            let out = simulate(cfg, n, |_, state, _| {
                let Some(dir) = &cfg.output_dir else { return Ok(()) };
                let hit = cfg
                    .snapshot_times
                    .iter()
                    .any(|&ts| (state.t - ts).abs() <= 1e-12 * ts.abs().max(1.0));
                if hit {
                    for (name, f) in [("u", &state.u), ("c", &state.c)] {
                        let path = dir.join(format!("{name}_n{n}_t{}.dat", time_tag(state.t)));
                        crate::io::save_snapshot(&path, f, name, state.t)?;
                        files.push(path);
                    }
                }
                Ok(())
            })?;
            let mut series = vec![out.initial];
            series.extend(out.records.iter().copied());
            if let Some(dir) = &cfg.output_dir {
                let path = dir.join(format!("timeseries_n{n}.csv"));
                crate::io::save_timeseries(&path, &series)?;
                files.push(path);
            }
            let m0 = out.initial.mass_u;
            let mass_drift = series
                .iter()
                .map(|r| (r.mass_u - m0).abs() / m0.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            let max_energy_increase = series
                .windows(2)
                .map(|w| w[1].energy - w[0].energy)
                .fold(f64::NEG_INFINITY, f64::max);
            let rec = RunRecord {
                n,
                steps: out.state.step,
                initial: out.initial,
                last: *series.last().expect("initial record"),
                errors: out.errors,
                newton_iterations: out.newton_iterations,
                damping: out.damping,
                limited_elements: out.limited_elements,
                mass_drift,
                max_energy_increase,
            };
            Ok((rec, files))
        })
        .collect::<Result<_>>()?;
    let mut files = Vec::new();
    let mut records = Vec::new();
    for (r, f) in runs {
        records.push(r);
        files.extend(f);
    }
    let mut errors: Vec<(usize, f64, f64)> = records
        .iter()
        .filter_map(|r| r.errors.map(|(eu, ec)| (r.n, eu, ec)))
        .collect();
    errors.sort_by_key(|e| e.0);
    errors.dedup_by_key(|e| e.0);
    let table = if errors.len() >= 2 {
        Some(ConvergenceTable::from_errors(cfg.degree, &errors)?)
    } else {
        None
    };
    let summary = RunSummary {
        kind: cfg.kind,
        runs: records,
        table,
        files,
    };
    if let Some(dir) = &cfg.output_dir {
        let path = dir.join("summary.txt");
        std::fs::write(&path, summary.render())?;
        let mut summary = summary;
        summary.files.push(path);
        return Ok(summary);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_rates_are_reproduced() {
        let r = convergence_rates(&[(8, 1.97e-2), (16, 4.91e-3)]).unwrap();
        assert!((r[1].unwrap() - 2.00).abs() < 0.01);
        let r = convergence_rates(&[(4, 9.72e-3), (8, 1.25e-3)]).unwrap();
        assert!((r[1].unwrap() - 2.96).abs() < 0.01);
    }

    #[test]
    fn synthetic_cubic_rates() {
        let e: Vec<(usize, f64)> = [10, 20, 30, 40, 50]
            .iter()
            .map(|&n| (n, 3.0 * (n as f64).powi(-3)))
            .collect();
        let r = convergence_rates(&e).unwrap();
        assert!(r[0].is_none());
        for v in &r[1..] {
            assert!((v.unwrap() - 3.0).abs() < 1e-12);
        }
        assert!(convergence_rates(&[(4, 1.0)]).is_err());
        assert!(convergence_rates(&[(4, 1.0), (8, 0.0)]).is_err());
    }

    #[test]
    fn table_one_rate_column() {
        let errs = [
            (8, 1.97e-2, 4.47e-2),
            (16, 4.91e-3, 1.06e-2),
            (32, 1.18e-3, 2.61e-3),
            (64, 2.59e-4, 6.51e-4),
            (128, 6.15e-5, 1.62e-4),
        ];
        let t = ConvergenceTable::from_errors(1, &errs).unwrap();
        let published_u = [2.00, 2.05, 2.19, 2.07];
        let published_c = [2.08, 2.02, 2.01, 2.00];
        for (i, row) in t.rows.iter().skip(1).enumerate() {
            assert!((row.rate_u.unwrap() - published_u[i]).abs() <= 0.01);
            assert!((row.rate_c.unwrap() - published_c[i]).abs() <= 0.01);
        }
        assert!(t.render().contains("--"));
    }

    #[test]
    fn presets_validate() {
        for k in [
            ExperimentKind::Conv1d,
            ExperimentKind::Conv2d,
            ExperimentKind::Equilibrium,
            ExperimentKind::Blowup,
            ExperimentKind::Custom,
        ] {
            ExperimentConfig::preset(k).validate().unwrap();
            assert_eq!(ExperimentKind::parse(k.name()).unwrap(), k);
        }
        let mut c = ExperimentConfig::preset(ExperimentKind::Blowup);
        c.model = MobilityModel::Saturated;
        assert!(c.validate().is_err());
    }

    #[test]
    fn equilibrium_mass() {
        let cfg = ExperimentConfig::preset(ExperimentKind::Equilibrium);
        let (_, s) = cfg.setup(32).unwrap();
        assert!((s.u.integral() - 0.004 * PI).abs() < 2e-4, "{}", s.u.integral());
    }

    #[test]
    fn run_writes_deterministic_artifacts() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Custom);
        cfg.n = vec![8];
        cfg.t_final = 2e-3;
        cfg.snapshot_times = vec![0.0, 1e-3];
        let bytes = |dir: &std::path::Path| {
            let mut c = cfg.clone();
            c.output_dir = Some(dir.to_path_buf());
            let summary = run_experiment(&c).unwrap();
            let mut names: Vec<_> = summary
                .files
                .iter()
                .map(|p| p.file_name().unwrap().to_owned())
                .collect();
            names.sort();
            let series = std::fs::read(dir.join("timeseries_n8.csv")).unwrap();
            (names, series, summary)
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (names, series, summary) = bytes(a.path());
        let (names2, series2, _) = bytes(b.path());
        assert_eq!(names, names2);
        assert_eq!(series, series2);
        assert!(names.iter().any(|n| n == "u_n8_t0e0.dat"));
        assert!(names.iter().any(|n| n == "c_n8_t1e-3.dat"));
        assert!(names.iter().any(|n| n == "summary.txt"));
        let recs = crate::io::load_timeseries(&a.path().join("timeseries_n8.csv")).unwrap();
        assert_eq!(recs.len(), summary.runs[0].steps + 1);
        assert!(recs.iter().all(|r| r.min_u > 0.0 && r.max_u < 1.0));
        assert!((recs.last().unwrap().t - 2e-3).abs() < 1e-15);
        assert!(summary.table.is_none());
    }

    #[test]
    fn sweep_produces_a_table() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Conv1d);
        cfg.n = vec![16, 8];
        cfg.t_final = 1e-3;
        let summary = run_experiment(&cfg).unwrap();
        let t = summary.table.clone().unwrap();
        assert_eq!(t.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![8, 16]);
        assert!(t.rows[1].rate_u.unwrap() > 1.5);
        assert!(summary.render().contains("L2 errors"));
    }
}
