//! Keller–Segel constitutive functions, free energy and manufactured sources.
//!
//! The density obeys `u_t = ∇·(χ φ(u) ∇(B g(u) - c))` and the chemical
//! `β c_t = Δc - αc + u`, a gradient flow of
//!
//! ```text
//! E[u, c] = ∫ B F(u) - u c + ½ (|∇c|² + α c²)
//! ```
//!
//! with `g = F'` and `φ = 1/g'`.

use crate::dg::DgField;
use crate::error::{Error, Result};

/// Physical constants. `B = D/χ` is stored alongside `D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsParams {
    pub chi: f64,
    pub d: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl KsParams {
    /// From `(χ, B, α, β)`, the form the experiments quote.
    pub fn new(chi: f64, b: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::validate(chi, b, alpha, beta)?;
        Ok(Self {
            chi,
            d: b * chi,
            b,
            alpha,
            beta,
        })
    }

    /// From the cell diffusivity `D` instead of `B`.
    pub fn from_diffusivity(chi: f64, d: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::validate(chi, d, alpha, beta)?;
        Ok(Self {
            chi,
            d,
            b: d / chi,
            alpha,
            beta,
        })
    }

    fn validate(chi: f64, x: f64, alpha: f64, beta: f64) -> Result<()> {
        if [chi, x, alpha, beta].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "model parameters must be positive, got chi={chi}, {x}, alpha={alpha}, beta={beta}"
            )))
        }
    }
}

/// Mobility / entropy pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MobilityModel {
    /// `F = u ln u + (1-u) ln(1-u)`, `φ = u(1-u)`, `u ∈ (0, 1)`.
    Saturated,
    /// `F = u ln u - u`, `φ = u`, `u ∈ (0, ∞)`.
    Linear,
}

impl MobilityModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::Saturated => "saturated",
            Self::Linear => "linear",
        }
    }

    /// `u` strictly inside the admissible range.
    pub fn is_admissible(self, u: f64) -> bool {
        match self {
            Self::Saturated => u > 0.0 && u < 1.0,
            Self::Linear => u > 0.0 && u < f64::INFINITY,
        }
    }

    fn check(self, u: f64) -> Result<()> {
        if self.is_admissible(u) {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                value: u,
                model: self.name(),
            })
        }
    }

    /// Distance from `u` to the admissible boundary in the direction `du`,
    /// or `None` when moving that way never leaves the range.
    pub fn distance_to_boundary(self, u: f64, du: f64) -> Option<f64> {
        match (self, du) {
            (_, d) if d < 0.0 => Some(u),
            (Self::Saturated, d) if d > 0.0 => Some(1.0 - u),
            _ => None,
        }
    }

    pub fn phi(self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(self.phi_unchecked(u))
    }

    /// Mobility without the range check; used on limited nodal data where
    /// values may sit exactly on the bound.
    pub fn phi_unchecked(self, u: f64) -> f64 {
        match self {
            Self::Saturated => (u * (1.0 - u)).max(0.0),
            Self::Linear => u.max(0.0),
        }
    }

    pub fn phi_prime(self, u: f64) -> f64 {
        match self {
            Self::Saturated => 1.0 - 2.0 * u,
            Self::Linear => 1.0,
        }
    }

    pub fn g(self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(match self {
            Self::Saturated => u.ln() - (1.0 - u).ln(),
            Self::Linear => u.ln(),
        })
    }

    pub fn g_prime(self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(match self {
            Self::Saturated => 1.0 / (u * (1.0 - u)),
            Self::Linear => 1.0 / u,
        })
    }

    /// `g` continued linearly (C¹) outside `[δ, 1-δ]` (Saturated) or below `δ` (Linear).
    pub fn g_regularized(self, u: f64, delta: f64) -> f64 {
        let (lo, hi) = self.regular_range(delta);
        let x = u.clamp(lo, hi);
        let gx = match self {
            Self::Saturated => x.ln() - (1.0 - x).ln(),
            Self::Linear => x.ln(),
        };
        gx + (u - x) * self.g_prime_regularized(x, delta)
    }

    pub fn g_prime_regularized(self, u: f64, delta: f64) -> f64 {
        let (lo, hi) = self.regular_range(delta);
        let x = u.clamp(lo, hi);
        match self {
            Self::Saturated => 1.0 / (x * (1.0 - x)),
            Self::Linear => 1.0 / x,
        }
    }

    /// Inverse of [`Self::g_regularized`] and its derivative.
    pub fn g_inverse_regularized(self, w: f64, delta: f64) -> (f64, f64) {
        let (lo, hi) = self.regular_range(delta);
        let (wl, wh) = (self.g_regularized(lo, delta), self.g_regularized(hi, delta));
        if w < wl {
            let s = 1.0 / self.g_prime_regularized(lo, delta);
            (lo + s * (w - wl), s)
        } else if w > wh {
            let s = 1.0 / self.g_prime_regularized(hi, delta);
            (hi + s * (w - wh), s)
        } else {
            let u = match self {
                Self::Saturated => 1.0 / (1.0 + (-w).exp()),
                Self::Linear => w.exp(),
            };
            (u, 1.0 / self.g_prime_regularized(u, delta))
        }
    }

    /// Antiderivative of [`Self::g_inverse_regularized`] in `w`; convex.
    pub fn g_inverse_antiderivative(self, w: f64, delta: f64) -> f64 {
        let inner = |w: f64| match self {
            Self::Saturated => w.max(0.0) + (-w.abs()).exp().ln_1p(),
            Self::Linear => w.exp(),
        };
        let (lo, hi) = self.regular_range(delta);
        let (wl, wh) = (self.g_regularized(lo, delta), self.g_regularized(hi, delta));
        let tail = |edge: f64, u: f64, x: f64| {
            let s = 1.0 / self.g_prime_regularized(u, delta);
            inner(edge) + u * x + 0.5 * s * x * x
        };
        if w < wl {
            tail(wl, lo, w - wl)
        } else if w > wh {
            tail(wh, hi, w - wh)
        } else {
            inner(w)
        }
    }

    fn regular_range(self, delta: f64) -> (f64, f64) {
        match self {
            Self::Saturated => (delta, 1.0 - delta),
            Self::Linear => (delta, f64::INFINITY),
        }
    }

    /// Entropy density `F(u)`; the closed range is allowed (`0 ln 0 = 0`).
    pub fn entropy(self, u: f64) -> Result<f64> {
        let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
        match self {
            Self::Saturated if (0.0..=1.0).contains(&u) => Ok(xlnx(u) + xlnx(1.0 - u)),
            Self::Linear if u >= 0.0 && u.is_finite() => Ok(xlnx(u) - u),
            _ => Err(Error::Inadmissible {
                value: u,
                model: self.name(),
            }),
        }
    }
}

/// Nodal field `B g(u) - c`.
pub fn chemical_potential_mu_u(u: &DgField, c: &DgField, params: &KsParams, model: MobilityModel) -> Result<DgField> {
    if !u.same_space(c) {
        return Err(Error::InvalidArgument("u and c on different spaces".into()));
    }
    let mut mu = c.clone();
    for (m, &uv) in mu.values_mut().iter_mut().zip(u.values()) {
        *m = params.b * model.g(uv)? - *m;
    }
    Ok(mu)
}

/// Discrete free energy and its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    /// `∫ B F(u)`.
    pub entropy: f64,
    /// `-∫ u c`.
    pub cross: f64,
    /// `½ ∫ |∇c|² + α c²`.
    pub chemical: f64,
}

/// Nodal quadrature for the algebraic terms and the broken gradient of `c`.
pub fn discrete_free_energy(u: &DgField, c: &DgField, params: &KsParams, model: MobilityModel) -> Result<EnergyReport> {
    if !u.same_space(c) {
        return Err(Error::InvalidArgument("u and c on different spaces".into()));
    }
    let f = u
        .values()
        .iter()
        .map(|&v| model.entropy(v))
        .collect::<Result<Vec<_>>>()?;
    let f_field = u.space().from_values(f)?;
    let entropy = params.b * f_field.integral();
    let cross = -u.inner(c);
    let chemical = 0.5 * (c.broken_gradient_sq() + params.alpha * c.inner(c));
    Ok(EnergyReport {
        total: entropy + cross + chemical,
        entropy,
        cross,
        chemical,
    })
}

/// Convex splitting `E = E_c - E_e` with parameter `γ`.
pub fn convex_split_energies(
    u: &DgField,
    c: &DgField,
    params: &KsParams,
    model: MobilityModel,
    gamma: f64,
) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    if model != MobilityModel::Saturated {
        return Err(Error::InvalidArgument(
            "the convex split is defined for the saturated entropy".into(),
        ));
    }
    let base = discrete_free_energy(u, c, params, model)?;
    let sp = u.space();
    let mix = sp.from_values(
        u.values()
            .iter()
            .zip(c.values())
            .map(|(uv, cv)| {
                let d = uv / gamma - gamma * cv;
                0.5 * d * d
            })
            .collect(),
    )?;
    let e_c = base.entropy + base.chemical + mix.integral();
    let e_e = 0.5 / (gamma * gamma) * u.inner(u) + 0.5 * gamma * gamma * c.inner(c);
    Ok((e_c, e_e))
}

/// Smooth space-time function with the derivatives the sources need.
pub trait SpaceTimeField: Send + Sync {
    fn value(&self, x: [f64; 2], t: f64) -> f64;
    fn time_derivative(&self, x: [f64; 2], t: f64) -> f64;
    fn gradient(&self, x: [f64; 2], t: f64) -> [f64; 2];
    fn laplacian(&self, x: [f64; 2], t: f64) -> f64;
}

/// Source terms added to the right-hand sides of both equations.
pub trait SourceTerms: Send + Sync {
    fn f_u(&self, x: [f64; 2], t: f64) -> f64;
    fn f_c(&self, x: [f64; 2], t: f64) -> f64;
}

/// Manufactured sources for a prescribed exact pair `(u, c)`:
///
/// ```text
/// f_u = u_t - ∇·(χ φ(u) ∇(B g(u) - c))
///     = u_t - χB Δu + χ (φ'(u) ∇u·∇c + φ(u) Δc)
/// f_c = β c_t - Δc + αc - u
/// ```
///
/// The second line uses `φ g' = 1`.
pub struct MmsSources<U, C> {
    pub u: U,
    pub c: C,
    pub params: KsParams,
    pub model: MobilityModel,
}

impl<U: SpaceTimeField, C: SpaceTimeField> MmsSources<U, C> {
    pub fn new(u: U, c: C, params: KsParams, model: MobilityModel) -> Self {
        Self { u, c, params, model }
    }

    /// Checked evaluation of both sources.
    pub fn evaluate(&self, x: [f64; 2], t: f64) -> Result<(f64, f64)> {
        let uv = self.u.value(x, t);
        self.model.phi(uv)?;
        Ok((self.f_u(x, t), self.f_c(x, t)))
    }
}

impl<U: SpaceTimeField, C: SpaceTimeField> SourceTerms for MmsSources<U, C> {
    fn f_u(&self, x: [f64; 2], t: f64) -> f64 {
        let p = &self.params;
        let uv = self.u.value(x, t);
        let gu = self.u.gradient(x, t);
        let gc = self.c.gradient(x, t);
        let phi = self.model.phi_unchecked(uv);
        let dphi = self.model.phi_prime(uv);
        self.u.time_derivative(x, t) - p.chi * p.b * self.u.laplacian(x, t)
            + p.chi * (dphi * (gu[0] * gc[0] + gu[1] * gc[1]) + phi * self.c.laplacian(x, t))
    }

    fn f_c(&self, x: [f64; 2], t: f64) -> f64 {
        let p = &self.params;
        p.beta * self.c.time_derivative(x, t) - self.c.laplacian(x, t) + p.alpha * self.c.value(x, t)
            - self.u.value(x, t)
    }
}

/// `e^{-t} (offset + amplitude · s(x, y))` with `s = sin x` in 1D or
/// `sin x cos y` in 2D.
#[derive(Clone, Copy, Debug)]
pub struct DecayingMode {
    pub offset: f64,
    pub amplitude: f64,
    pub two_dimensional: bool,
}

impl DecayingMode {
    fn shape(&self, x: [f64; 2]) -> (f64, [f64; 2], f64) {
        if self.two_dimensional {
            let (sx, cx) = x[0].sin_cos();
            let (sy, cy) = x[1].sin_cos();
            (sx * cy, [cx * cy, -sx * sy], -2.0 * sx * cy)
        } else {
            let (s, c) = x[0].sin_cos();
            (s, [c, 0.0], -s)
        }
    }
}

impl SpaceTimeField for DecayingMode {
    fn value(&self, x: [f64; 2], t: f64) -> f64 {
        (-t).exp() * (self.offset + self.amplitude * self.shape(x).0)
    }

    fn time_derivative(&self, x: [f64; 2], t: f64) -> f64 {
        -self.value(x, t)
    }

    fn gradient(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let g = self.shape(x).1;
        let s = (-t).exp() * self.amplitude;
        [s * g[0], s * g[1]]
    }

    fn laplacian(&self, x: [f64; 2], t: f64) -> f64 {
        (-t).exp() * self.amplitude * self.shape(x).2
    }
}

/// Constant in space and time.
#[derive(Clone, Copy, Debug)]
pub struct Steady(pub f64);

impl SpaceTimeField for Steady {
    fn value(&self, _: [f64; 2], _: f64) -> f64 {
        self.0
    }
    fn time_derivative(&self, _: [f64; 2], _: f64) -> f64 {
        0.0
    }
    fn gradient(&self, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn laplacian(&self, _: [f64; 2], _: f64) -> f64 {
        0.0
    }
}

/// Exact pair of the 1D (`two_dimensional = false`) or 2D accuracy test:
/// `u = e^{-t}(0.3 s + 0.5)`, `c = e^{-t}(s + 2)`.
pub fn manufactured_pair(two_dimensional: bool) -> (DecayingMode, DecayingMode) {
    (
        DecayingMode {
            offset: 0.5,
            amplitude: 0.3,
            two_dimensional,
        },
        DecayingMode {
            offset: 2.0,
            amplitude: 1.0,
            two_dimensional,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::DgSpace;
    use crate::mesh::{BoundaryKind, Domain, Mesh};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn ex1() -> KsParams {
        KsParams::new(0.1, 0.2, 0.2, 0.01).unwrap()
    }

    #[test]
    fn params_relation() {
        let p = KsParams::from_diffusivity(0.3, 0.06, 1.0, 1.0).unwrap();
        assert!((p.b - 0.2).abs() < 1e-14);
        assert!(KsParams::new(0.1, -1.0, 0.2, 0.01).is_err());
    }

    #[test]
    fn mobility_values() {
        let s = MobilityModel::Saturated;
        assert_eq!(s.phi(0.5).unwrap(), 0.25);
        assert!(s.phi(1e-12).unwrap() < 1e-11);
        assert!(s.phi(1.0 - 1e-12).unwrap() < 1e-11);
        assert!(s.phi(1.0).is_err());
        assert_eq!(MobilityModel::Linear.phi(2.0).unwrap(), 2.0);
        assert_eq!(s.g(0.5).unwrap(), 0.0);
        assert_eq!(MobilityModel::Linear.g(1.0).unwrap(), 0.0);
        assert!(s.g(0.0).is_err());
        assert!(MobilityModel::Linear.g(-1.0).is_err());
    }

    #[test]
    fn phi_times_g_prime_is_one() {
        let mut r = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let u = r.random_range(0.01..0.99);
            let s = MobilityModel::Saturated;
            assert!((s.phi(u).unwrap() * s.g_prime(u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    fn line(n: usize, k: usize) -> std::sync::Arc<DgSpace> {
        let d = Domain::interval(0.0, 2.0 * PI).unwrap();
        DgSpace::new(Mesh::uniform(d, n, BoundaryKind::Periodic).unwrap(), k).unwrap()
    }

    #[test]
    fn chemical_potential_constants() {
        let sp = line(4, 2);
        let p = ex1();
        let mu = chemical_potential_mu_u(&sp.constant(0.5), &sp.constant(0.0), &p, MobilityModel::Saturated).unwrap();
        assert!(mu.values().iter().all(|v| *v == 0.0));
        let mu = chemical_potential_mu_u(&sp.constant(0.5), &sp.constant(1.7), &p, MobilityModel::Saturated).unwrap();
        assert!(mu.values().iter().all(|v| *v == -1.7));
        let a0 = 0.3;
        let mu = chemical_potential_mu_u(
            &sp.constant(a0),
            &sp.constant(a0 / p.alpha),
            &p,
            MobilityModel::Saturated,
        )
        .unwrap();
        let (lo, hi) = mu.nodal_extrema();
        assert_eq!(lo, hi);
        assert!(chemical_potential_mu_u(&sp.constant(1.0), &sp.constant(0.0), &p, MobilityModel::Saturated).is_err());
    }

    #[test]
    fn energy_of_uniform_half() {
        let sp = line(8, 1);
        let p = ex1();
        let e = discrete_free_energy(&sp.constant(0.5), &sp.constant(0.0), &p, MobilityModel::Saturated).unwrap();
        let expected = 0.2 * 2.0 * PI * 0.5f64.ln();
        assert!((e.total - expected).abs() < 1e-13);
        assert!((e.total + 0.8710).abs() < 1e-4);
        assert_eq!(e.cross, 0.0);
        assert_eq!(e.chemical, 0.0);
        assert!((e.entropy + e.cross + e.chemical - e.total).abs() < 1e-12);
    }

    #[test]
    fn split_of_uniform_half() {
        let sp = line(8, 1);
        let (_, e_e) = convex_split_energies(
            &sp.constant(0.5),
            &sp.constant(0.0),
            &ex1(),
            MobilityModel::Saturated,
            1.0,
        )
        .unwrap();
        assert!((e_e - 0.125 * 2.0 * PI).abs() < 1e-13);
        assert!(convex_split_energies(
            &sp.constant(0.5),
            &sp.constant(0.0),
            &ex1(),
            MobilityModel::Saturated,
            0.0
        )
        .is_err());
    }

    #[test]
    fn steady_pair_has_no_sources() {
        let p = ex1();
        let a0 = 0.3;
        let s = MmsSources::new(Steady(a0), Steady(a0 / p.alpha), p, MobilityModel::Saturated);
        for x in [0.0, 1.0, 4.0] {
            let (fu, fc) = s.evaluate([x, 0.5], 0.3).unwrap();
            assert_eq!(fu, 0.0);
            assert!(fc.abs() < 1e-15);
        }
    }

    #[test]
    fn example_one_chemical_source_at_origin() {
        let (u, c) = manufactured_pair(false);
        let s = MmsSources::new(u, c, ex1(), MobilityModel::Saturated);
        // β c_t - Δc + α c - u = 0.01(-2) - 0 + 0.2·2 - 0.5
        assert!((s.f_c([0.0, 0.0], 0.0) - (-0.12)).abs() < 1e-15);
    }
    /// Conservative central differences of the flux `χ φ(u) ∇(B g(u) - c)`.
    fn fd_source_u(s: &MmsSources<DecayingMode, DecayingMode>, x: [f64; 2], t: f64, h: f64) -> f64 {
        let p = s.params;
        let m = s.model;
        let mu = |y: [f64; 2]| p.b * m.g(s.u.value(y, t)).unwrap() - s.c.value(y, t);
        let flux = |y: [f64; 2], axis: usize| {
            let mut a = y;
            let mut b = y;
            a[axis] -= 0.5 * h;
            b[axis] += 0.5 * h;
            p.chi * m.phi(s.u.value(y, t)).unwrap() * (mu(b) - mu(a)) / h
        };
        let mut div = 0.0;
        for axis in 0..2 {
            let mut a = x;
            let mut b = x;
            a[axis] -= 0.5 * h;
            b[axis] += 0.5 * h;
            div += (flux(b, axis) - flux(a, axis)) / h;
        }
        let ut = (s.u.value(x, t + h) - s.u.value(x, t - h)) / (2.0 * h);
        ut - div
    }

    #[test]
    fn sources_match_finite_difference_oracle() {
        for two_d in [false, true] {
            let (u, c) = manufactured_pair(two_d);
            let s = MmsSources::new(u, c, ex1(), MobilityModel::Saturated);
            let mut r = rand::rngs::StdRng::seed_from_u64(11);
            for _ in 0..20 {
                let x = [r.random_range(0.0..2.0 * PI), r.random_range(0.0..2.0 * PI)];
                let t = r.random_range(0.0..0.5);
                let oracle = fd_source_u(&s, x, t, 1e-4);
                assert!((s.f_u(x, t) - oracle).abs() < 1e-6, "{} vs {oracle}", s.f_u(x, t));
                let h = 1e-4;
                let lap = |f: &DecayingMode| {
                    let mut acc = -4.0 * f.value(x, t);
                    for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                        acc += f.value([x[0] + dx, x[1] + dy], t);
                    }
                    acc / (h * h)
                };
                let ct = (s.c.value(x, t + h) - s.c.value(x, t - h)) / (2.0 * h);
                let fc = s.params.beta * ct - lap(&s.c) + s.params.alpha * s.c.value(x, t) - s.u.value(x, t);
                assert!((s.f_c(x, t) - fc).abs() < 1e-5, "{} vs {fc}", s.f_c(x, t));
            }
        }
    }

    #[test]
    fn entropy_is_convex_on_samples() {
        let mut r = rand::rngs::StdRng::seed_from_u64(5);
        for m in [MobilityModel::Saturated, MobilityModel::Linear] {
            for _ in 0..200 {
                let a: f64 = r.random_range(0.0..1.0);
                let b: f64 = r.random_range(0.0..1.0);
                let l: f64 = r.random_range(0.0..1.0);
                let mid = m.entropy(l * a + (1.0 - l) * b).unwrap();
                let chord = l * m.entropy(a).unwrap() + (1.0 - l) * m.entropy(b).unwrap();
                assert!(mid <= chord + 1e-14);
            }
        }
    }

    #[test]
    fn source_at_quarter_period_matches_fine_oracle() {
        let (u, c) = manufactured_pair(false);
        let s = MmsSources::new(u, c, ex1(), MobilityModel::Saturated);
        let x = [PI / 2.0, 0.0];
        let exact = s.f_u(x, 0.0);
        let oracle = fd_source_u(&s, x, 0.0, 1e-5);
        assert!(((exact - oracle) / exact).abs() < 1e-6, "{exact} vs {oracle}");
    }

    fn random_pair(sp: &std::sync::Arc<DgSpace>, seed: u64) -> (DgField, DgField) {
        let mut r = rand::rngs::StdRng::seed_from_u64(seed);
        let n = sp.n_dofs();
        let u = sp
            .from_values((0..n).map(|_| r.random_range(0.02..0.98)).collect())
            .unwrap();
        let c = sp
            .from_values((0..n).map(|_| r.random_range(-1.0..3.0)).collect())
            .unwrap();
        (u, c)
    }

    #[test]
    fn split_parts_are_convex_along_segments() {
        let sp = line(6, 2);
        let p = ex1();
        let m = MobilityModel::Saturated;
        for seed in 0..5 {
            let (u0, c0) = random_pair(&sp, seed);
            let (u1, c1) = random_pair(&sp, seed + 100);
            let blend = |a: &DgField, b: &DgField, l: f64| {
                sp.from_values(
                    a.values()
                        .iter()
                        .zip(b.values())
                        .map(|(x, y)| l * x + (1.0 - l) * y)
                        .collect(),
                )
                .unwrap()
            };
            let (ec0, ee0) = convex_split_energies(&u0, &c0, &p, m, 0.7).unwrap();
            let (ec1, ee1) = convex_split_energies(&u1, &c1, &p, m, 0.7).unwrap();
            for l in [0.25, 0.5, 0.75] {
                let (ec, ee) = convex_split_energies(&blend(&u0, &u1, l), &blend(&c0, &c1, l), &p, m, 0.7).unwrap();
                assert!(ec <= l * ec0 + (1.0 - l) * ec1 + 1e-12);
                assert!(ee <= l * ee0 + (1.0 - l) * ee1 + 1e-12);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn split_difference_is_the_energy(seed in 0u64..1000, gamma in 0.05f64..20.0) {
            let sp = line(3, 2);
            let (u, c) = random_pair(&sp, seed);
            let p = ex1();
            let e = discrete_free_energy(&u, &c, &p, MobilityModel::Saturated).unwrap();
            let (ec, ee) = convex_split_energies(&u, &c, &p, MobilityModel::Saturated, gamma).unwrap();
            proptest::prop_assert!((ec - ee - e.total).abs() < 1e-10 * (1.0 + ec.abs()));
            proptest::prop_assert!((e.entropy + e.cross + e.chemical - e.total).abs() < 1e-12);
        }

        #[test]
        fn g_is_derivative_of_entropy(u in 0.01f64..0.99) {
            for m in [MobilityModel::Saturated, MobilityModel::Linear] {
                let h = 1e-6;
                let fd = (m.entropy(u + h).unwrap() - m.entropy(u - h).unwrap()) / (2.0 * h);
                proptest::prop_assert!((fd - m.g(u).unwrap()).abs() < 1e-7);
            }
        }

        #[test]
        fn mobility_is_reciprocal_of_g_prime(u in 1e-6f64..(1.0 - 1e-6)) {
            for m in [MobilityModel::Saturated, MobilityModel::Linear] {
                let p = m.phi(u).unwrap() * m.g_prime(u).unwrap();
                proptest::prop_assert!((p - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn regularized_potential_is_c1(delta in 1e-12f64..1e-3, t in -2.0f64..3.0) {
            for m in [MobilityModel::Saturated, MobilityModel::Linear] {
                let u = delta * (1.0 + t);
                let (g, gp) = (m.g_regularized(u, delta), m.g_prime_regularized(u, delta));
                if u >= delta && (m == MobilityModel::Linear || u <= 1.0 - delta) {
                    proptest::prop_assert!((g - m.g(u).unwrap()).abs() <= 1e-12 * g.abs());
                }
                // secant slope matches the derivative up to curvature inside the log branch
                let h = 1e-6 * delta;
                let fd = (m.g_regularized(u + h, delta) - m.g_regularized(u - h, delta)) / (2.0 * h);
                proptest::prop_assert!((fd - gp).abs() <= 1e-4 * gp, "{fd} {gp}");
                proptest::prop_assert!(gp > 0.0);
            }
        }

        #[test]
        fn regularized_inverse_round_trips(delta in 1e-12f64..1e-3, t in -2.0f64..3.0) {
            for m in [MobilityModel::Saturated, MobilityModel::Linear] {
                let u = delta * (1.0 + t);
                let w = m.g_regularized(u, delta);
                let (back, slope) = m.g_inverse_regularized(w, delta);
                proptest::prop_assert!((back - u).abs() <= 1e-9 * delta, "{back} {u}");
                proptest::prop_assert!((slope * m.g_prime_regularized(u, delta) - 1.0).abs() < 1e-9);
                let h = 1e-5 * (1.0 + w.abs());
                let fd = (m.g_inverse_antiderivative(w + h, delta) - m.g_inverse_antiderivative(w - h, delta))
                    / (2.0 * h);
                proptest::prop_assert!((fd - back).abs() <= 1e-6 * (1.0 + back.abs()), "{fd} {back}");
            }
        }
    }
}
