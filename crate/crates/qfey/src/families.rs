//! Chernoff-tangent operator families and the tangency laboratory.
//!
//! A `TangentFamily` is a map `t -> S(t)` of bounded operators with
//! `S(0) = I` whose derivative at zero matches a claimed generator. The two
//! shipped constructions sandwich a convolution between `exp(-t V / 2)`
//! multiplication factors, which keeps every `S(t)` self-adjoint. The
//! tangency of a family is never assumed: `measure_tangency` fits the decay
//! rate of `(S(t)f - f)/t - Hf` against a reference generator, and the
//! propagator only ever relies on that measured behavior.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QfeyError, Result};
use crate::grid::{Grid, Potential, WaveFunction};
use crate::kernels::{kernel_row, KernelKind};
use crate::operators::LinearOperator;

/// Claimed generator of a family, used to select the matching oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorDescriptor {
    /// `(1/2) d^2/dx^2 - V`
    HalfLaplacianMinusV(Potential),
    /// `-(-Lap)^N - V`
    NegPolyharmonicMinusV(Potential, usize),
    Custom,
}

type Builder = dyn Fn(f64) -> Result<LinearOperator> + Send + Sync;

/// A map `t -> S(t)` with metadata. Families are immutable and cheap to
/// clone; `build` is a pure function of `t`.
#[derive(Clone)]
pub struct TangentFamily {
    grid: Grid,
    builder: Arc<Builder>,
    generator: GeneratorDescriptor,
    self_adjoint: bool,
}

impl std::fmt::Debug for TangentFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TangentFamily")
            .field("grid", &self.grid)
            .field("generator", &self.generator)
            .field("self_adjoint", &self.self_adjoint)
            .finish()
    }
}

impl TangentFamily {
    /// Wrap an arbitrary builder. The builder owns the `t = 0` behavior;
    /// shipped constructors return the identity there.
    pub fn from_builder<F>(
        grid: Grid,
        generator: GeneratorDescriptor,
        self_adjoint: bool,
        builder: F,
    ) -> Self
    where
        F: Fn(f64) -> Result<LinearOperator> + Send + Sync + 'static,
    {
        TangentFamily {
            grid,
            builder: Arc::new(builder),
            generator,
            self_adjoint,
        }
    }

    /// Heat-type family built from the Gaussian kernel:
    /// `S(t) = exp(-tV/2) . gaussconv(t) . exp(-tV/2)`, `S(0) = I`.
    pub fn heat_gauss(potential: &Potential, grid: Grid) -> Result<Self> {
        if potential.grid() != grid {
            return Err(QfeyError::GridMismatch);
        }
        let v = potential.clone();
        let builder = move |t: f64| sandwich_family(&v, &KernelKind::Gauss, grid, t);
        Ok(TangentFamily::from_builder(
            grid,
            GeneratorDescriptor::HalfLaplacianMinusV(potential.clone()),
            true,
            builder,
        ))
    }

    /// Polyharmonic analogue built from the kernel `l(t, y)`:
    /// `S(t) = exp(-tV/2) . l(t)-conv . exp(-tV/2)`, `S(0) = I`.
    pub fn polyharmonic(potential: &Potential, n_order: usize, grid: Grid) -> Result<Self> {
        if potential.grid() != grid {
            return Err(QfeyError::GridMismatch);
        }
        let kind = KernelKind::polyharmonic(n_order)?;
        let v = potential.clone();
        let builder = move |t: f64| sandwich_family(&v, &kind, grid, t);
        Ok(TangentFamily::from_builder(
            grid,
            GeneratorDescriptor::NegPolyharmonicMinusV(potential.clone(), n_order),
            true,
            builder,
        ))
    }

    /// Evaluate `S(t)`. Negative `t` is rejected.
    pub fn build(&self, t: f64) -> Result<LinearOperator> {
        if !t.is_finite() || t < 0.0 {
            return Err(QfeyError::InvalidParameter(format!(
                "family parameter must satisfy t >= 0, got {t}"
            )));
        }
        (self.builder)(t)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn generator(&self) -> &GeneratorDescriptor {
        &self.generator
    }

    pub fn self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// Replace `S(t)` by its Hermitian part `(S(t) + S(t)*)/2`.
    pub fn symmetrized(&self) -> TangentFamily {
        let inner = self.builder.clone();
        TangentFamily {
            grid: self.grid,
            builder: Arc::new(move |t| Ok(inner(t)?.hermitize())),
            generator: self.generator.clone(),
            self_adjoint: true,
        }
    }

    /// Affine multi-point recombination
    /// `S'(t) = c0 I + sum_{j>=1} coeffs[j] S(scalings[j] t)`.
    ///
    /// `coeffs[0]` is the identity coefficient `c0` (its `scalings[0]` slot is
    /// ignored). Two constraints keep the result a tangent family: the
    /// coefficients must sum to one (`S'(0) = I`) and the first moment
    /// `sum coeffs[j] * scalings[j]` must be one (derivative at zero
    /// preserved).
    pub fn multipoint(&self, coeffs: &[f64], scalings: &[f64]) -> Result<TangentFamily> {
        if coeffs.is_empty() || coeffs.len() != scalings.len() {
            return Err(QfeyError::InvalidParameter(
                "multipoint needs equally long, nonempty coeffs and scalings".into(),
            ));
        }
        let affine: f64 = coeffs.iter().sum();
        if (affine - 1.0).abs() > 1e-12 {
            return Err(QfeyError::InvalidParameter(format!(
                "multipoint coefficients must sum to 1, got {affine}"
            )));
        }
        let first_moment: f64 = coeffs[1..]
            .iter()
            .zip(&scalings[1..])
            .map(|(c, s)| c * s)
            .sum();
        if (first_moment - 1.0).abs() > 1e-12 {
            return Err(QfeyError::InvalidParameter(format!(
                "multipoint first moment must be 1, got {first_moment}"
            )));
        }
        if scalings[1..].iter().any(|&s| !(s > 0.0)) {
            return Err(QfeyError::InvalidParameter(
                "multipoint scalings must be positive".into(),
            ));
        }
        let inner = self.builder.clone();
        let grid = self.grid;
        let coeffs = coeffs.to_vec();
        let scalings = scalings.to_vec();
        let builder = move |t: f64| -> Result<LinearOperator> {
            let m = grid.len();
            let mut acc = nalgebra::DMatrix::<Complex64>::identity(m, m)
                * Complex64::new(coeffs[0], 0.0);
            for (c, s) in coeffs[1..].iter().zip(&scalings[1..]) {
                let term = inner(s * t)?;
                acc += term.densify() * Complex64::new(*c, 0.0);
            }
            LinearOperator::from_dense(grid, acc)
        };
        Ok(TangentFamily {
            grid,
            builder: Arc::new(builder),
            generator: self.generator.clone(),
            self_adjoint: self.self_adjoint,
        })
    }

    /// The three-point combination with exponent
    /// `-3/2 I + 2 S(t) - 1/2 S(2t)`: as a family this is
    /// `-1/2 I + 2 S(t) - 1/2 S(2t)`, which cancels the second-order Taylor
    /// term and empirically doubles the tangency order.
    pub fn three_point(&self) -> Result<TangentFamily> {
        self.multipoint(&[-0.5, 2.0, -0.5], &[0.0, 1.0, 2.0])
    }

    /// Max-entry deviation of `S(0)` from the identity (condition CT2).
    pub fn ct2_deviation(&self) -> Result<f64> {
        let s0 = self.build(0.0)?;
        let dense = s0.densify();
        let m = self.grid.len();
        let mut dev: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dense[(i, j)] - Complex64::new(expect, 0.0)).norm());
            }
        }
        Ok(dev)
    }
}

fn sandwich_family(
    potential: &Potential,
    kind: &KernelKind,
    grid: Grid,
    t: f64,
) -> Result<LinearOperator> {
    if t == 0.0 {
        return Ok(LinearOperator::identity(grid));
    }
    let row = kernel_row(kind, t, grid)?;
    let diag: Vec<Complex64> = potential
        .values()
        .iter()
        .map(|&v| Complex64::new((-t * v / 2.0).exp(), 0.0))
        .collect();
    LinearOperator::structured(grid, diag.clone(), row, diag)
}

/// Residuals of the difference quotient `(S(t)f - f)/t` against a reference
/// generator action, with a least-squares power-law fit.
#[derive(Debug, Clone)]
pub struct TangencyReport {
    pub t_samples: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
}

/// Default probe times `1e-2 * 2^-j`, chosen so the first-order term
/// dominates both roundoff and saturation for moderately band-limited states.
pub fn default_t_samples() -> Vec<f64> {
    (0..=6).map(|j| 1e-2 * 0.5_f64.powi(j)).collect()
}

/// Measure `residual(t) = ||(S(t)f - f)/t - H f|| / ||f||` over `t_samples`
/// (positive, strictly decreasing, at least 1e-6) and fit
/// `log residual ~ slope * log t + intercept`.
pub fn measure_tangency(
    family: &TangentFamily,
    f: &WaveFunction,
    h_oracle: &LinearOperator,
    t_samples: &[f64],
) -> Result<TangencyReport> {
    let f_norm = f.l2_norm();
    if f_norm == 0.0 {
        return Err(QfeyError::InvalidParameter(
            "tangency needs a nonzero state".into(),
        ));
    }
    if t_samples.is_empty()
        || t_samples.windows(2).any(|w| w[1] >= w[0])
        || t_samples.iter().any(|&t| !(t >= 1e-6))
    {
        return Err(QfeyError::InvalidParameter(
            "t_samples must be strictly decreasing and >= 1e-6".into(),
        ));
    }
    let hf = h_oracle.apply(f)?;
    let mut residual_norms = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let sf = family.build(t)?.apply(f)?;
        let mut quotient = sf.sub(f)?;
        quotient = quotient.scale(Complex64::new(1.0 / t, 0.0));
        let residual = quotient.sub(&hf)?.l2_norm() / f_norm;
        residual_norms.push(residual);
    }
    let (fitted_slope, fitted_intercept) = log_log_fit(t_samples, &residual_norms);
    Ok(TangencyReport {
        t_samples: t_samples.to_vec(),
        residual_norms,
        fitted_slope,
        fitted_intercept,
    })
}

pub(crate) fn log_log_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x.ln(), y.max(1e-300).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::exp_bounded;
    use crate::oracle::{discretize_hamiltonian, HamiltonianKind, HamiltonianSpec, PacketParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid256() -> Grid {
        Grid::new(-20.0, 20.0, 256).unwrap()
    }

    fn band_limited_state(grid: Grid, max_mode: usize) -> WaveFunction {
        PacketParams {
            x0: 0.0,
            p0: 0.0,
            sigma: 1.0,
        }
        .sample(grid)
        .unwrap()
        .band_limited(max_mode)
    }

    fn spectral_h(kind: HamiltonianKind, v: &Potential, grid: Grid) -> LinearOperator {
        discretize_hamiltonian(&HamiltonianSpec::new(kind, v.clone(), grid).unwrap()).unwrap()
    }

    #[test]
    fn heat_gauss_ct2_and_negative_t() {
        let grid = grid256();
        let family = TangentFamily::heat_gauss(&Potential::zero(grid), grid).unwrap();
        assert!(family.ct2_deviation().unwrap() <= 1e-12);
        assert!(family.build(-0.1).is_err());
    }

    #[test]
    fn polyharmonic_ct2() {
        let grid = Grid::new(-40.0, 40.0, 128).unwrap();
        let family =
            TangentFamily::polyharmonic(&Potential::zero(grid), 2, grid).unwrap();
        assert!(family.ct2_deviation().unwrap() <= 1e-12);
        assert!(TangentFamily::polyharmonic(&Potential::zero(grid), 1, grid).is_err());
        assert!(TangentFamily::polyharmonic(&Potential::zero(grid), 9, grid).is_err());
    }

    #[test]
    fn broken_family_fails_ct2() {
        // negative control: build(0) = 2I must be caught
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let family = TangentFamily::from_builder(
            grid,
            GeneratorDescriptor::Custom,
            true,
            move |_t| {
                let m = grid.len();
                LinearOperator::from_dense(
                    grid,
                    nalgebra::DMatrix::identity(m, m) * Complex64::new(2.0, 0.0),
                )
            },
        );
        let dev = family.ct2_deviation().unwrap();
        assert!((dev - 1.0).abs() < 1e-15, "{dev}");
    }

    #[test]
    fn gauss_family_fixes_constants() {
        let grid = grid256();
        let family = TangentFamily::heat_gauss(&Potential::zero(grid), grid).unwrap();
        let ones = WaveFunction::sample(grid, |_| c(1.0, 0.0)).unwrap();
        let out = family.build(0.37).unwrap().apply(&ones).unwrap();
        assert!(out.sub(&ones).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn polyharmonic_family_fixes_constants() {
        let grid = Grid::new(-40.0, 40.0, 512).unwrap();
        let family =
            TangentFamily::polyharmonic(&Potential::zero(grid), 2, grid).unwrap();
        let ones = WaveFunction::sample(grid, |_| c(1.0, 0.0)).unwrap();
        let out = family.build(1.0).unwrap().apply(&ones).unwrap();
        assert!(out.sub(&ones).unwrap().sup_norm() < 1e-6);
    }

    #[test]
    fn constant_potential_factors_out() {
        let grid = grid256();
        let vc = 0.8;
        let family =
            TangentFamily::heat_gauss(&Potential::sample(grid, |_| vc).unwrap(), grid).unwrap();
        let free = TangentFamily::heat_gauss(&Potential::zero(grid), grid).unwrap();
        let f = PacketParams {
            x0: 0.0,
            p0: 1.0,
            sigma: 1.0,
        }
        .sample(grid)
        .unwrap();
        let t = 0.31;
        let with_v = family.build(t).unwrap().apply(&f).unwrap();
        let factored = free
            .build(t)
            .unwrap()
            .apply(&f)
            .unwrap()
            .scale(c((-t * vc).exp(), 0.0));
        assert!(with_v.sub(&factored).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn shipped_families_stay_self_adjoint() {
        let grid = Grid::new(-20.0, 20.0, 64).unwrap();
        let v = Potential::sample(grid, f64::cos).unwrap();
        for family in [
            TangentFamily::heat_gauss(&v, grid).unwrap(),
            TangentFamily::polyharmonic(&v, 2, grid).unwrap(),
        ] {
            assert!(family.self_adjoint());
            for &t in &[1e-3, 1e-2, 0.1, 1.0] {
                let dev = family.build(t).unwrap().hermiticity_deviation();
                assert!(dev <= 1e-10, "t={t}: {dev}");
            }
        }
    }

    #[test]
    fn symmetrization_fixes_one_sided_composite() {
        // F(t) . B(t) without the second factor is not self-adjoint
        let grid = Grid::new(-20.0, 20.0, 64).unwrap();
        let v = Potential::sample(grid, f64::cos).unwrap();
        let one_sided = TangentFamily::from_builder(
            grid,
            GeneratorDescriptor::Custom,
            false,
            move |t| {
                if t == 0.0 {
                    return Ok(LinearOperator::identity(grid));
                }
                let row = kernel_row(&KernelKind::Gauss, t, grid)?;
                let left: Vec<Complex64> = v
                    .values()
                    .iter()
                    .map(|&vj| c((-t * vj).exp(), 0.0))
                    .collect();
                let ones = vec![c(1.0, 0.0); grid.len()];
                LinearOperator::structured(grid, left, row, ones)
            },
        );
        let t = 0.2;
        assert!(one_sided.build(t).unwrap().hermiticity_deviation() > 1e-6);
        let symmetric = one_sided.symmetrized();
        assert!(symmetric.self_adjoint());
        assert!(symmetric.build(t).unwrap().hermiticity_deviation() <= 1e-12);
        assert!(symmetric.ct2_deviation().unwrap() <= 1e-12);
    }

    #[test]
    fn symmetrizing_self_adjoint_family_is_identity_map() {
        let grid = Grid::new(-20.0, 20.0, 64).unwrap();
        let v = Potential::sample(grid, f64::cos).unwrap();
        let family = TangentFamily::heat_gauss(&v, grid).unwrap();
        let sym = family.symmetrized();
        let t = 0.15;
        let a = family.build(t).unwrap();
        let b = sym.build(t).unwrap();
        let diff = (a.densify() - b.densify())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-10, "{diff}");
    }

    #[test]
    fn multipoint_constraints() {
        let grid = Grid::new(-10.0, 10.0, 32).unwrap();
        let family = TangentFamily::heat_gauss(&Potential::zero(grid), grid).unwrap();
        // identity combination returns the same operators
        let same = family.multipoint(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        let t = 0.2;
        let diff = (same.build(t).unwrap().densify() - family.build(t).unwrap().densify())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13);

        // first-moment violation: 2*1 - (1/2)*3 != 1
        assert!(family
            .multipoint(&[-0.5, 2.0, -0.5], &[0.0, 1.0, 3.0])
            .is_err());
        // affine violation
        assert!(family.multipoint(&[0.5, 1.0], &[0.0, 1.0]).is_err());
        // nonpositive scaling
        assert!(family.multipoint(&[0.0, 2.0, -1.0], &[0.0, 0.5, -1.0]).is_err());

        let three = family.three_point().unwrap();
        assert!(three.ct2_deviation().unwrap() <= 1e-12);
    }

    #[test]
    fn exact_semigroup_family_has_first_order_tangency() {
        let grid = Grid::new(-10.0, 10.0, 32).unwrap();
        let v = Potential::sample(grid, f64::cos).unwrap();
        let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
        let h_for_builder = h.clone();
        let family = TangentFamily::from_builder(
            grid,
            GeneratorDescriptor::Custom,
            true,
            move |t| {
                let scaled = LinearOperator::from_dense(
                    grid,
                    h_for_builder.densify() * Complex64::new(t, 0.0),
                )?;
                exp_bounded(&scaled, crate::operators::ExpMethod::scaling_squaring(1e-13))
            },
        );
        let f = band_limited_state(grid, 8);
        let report = measure_tangency(&family, &f, &h, &default_t_samples()).unwrap();
        assert!(
            (0.9..=1.1).contains(&report.fitted_slope),
            "slope {}",
            report.fitted_slope
        );
    }

    #[test]
    fn heat_gauss_tangency_slope() {
        let grid = grid256();
        let v = Potential::zero(grid);
        let family = TangentFamily::heat_gauss(&v, grid).unwrap();
        let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
        let f = WaveFunction::sample(grid, |x| c((-x * x).exp(), 0.0))
            .unwrap()
            .band_limited(32);
        let report = measure_tangency(&family, &f, &h, &default_t_samples()).unwrap();
        assert!(
            report.fitted_slope >= 0.9 && report.fitted_slope <= 1.15,
            "slope {}",
            report.fitted_slope
        );
    }

    #[test]
    fn polyharmonic_tangency_slope() {
        let grid = grid256();
        let v = Potential::sample(grid, f64::cos).unwrap();
        let family = TangentFamily::polyharmonic(&v, 2, grid).unwrap();
        let h = spectral_h(
            HamiltonianKind::NegPolyharmonicMinusV { n_order: 2 },
            &v,
            grid,
        );
        let f = band_limited_state(grid, 8);
        let report = measure_tangency(&family, &f, &h, &default_t_samples()).unwrap();
        assert!(
            report.fitted_slope >= 0.9,
            "slope {}",
            report.fitted_slope
        );
    }

    #[test]
    fn three_point_doubles_tangency_order() {
        let grid = grid256();
        let v = Potential::zero(grid);
        let family = TangentFamily::heat_gauss(&v, grid)
            .unwrap()
            .three_point()
            .unwrap();
        let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
        let f = WaveFunction::sample(grid, |x| c((-x * x).exp(), 0.0))
            .unwrap()
            .band_limited(32);
        let report = measure_tangency(&family, &f, &h, &default_t_samples()).unwrap();
        assert!(report.fitted_slope >= 1.8, "slope {}", report.fitted_slope);
    }

    #[test]
    fn strong_continuity_proxy() {
        let grid = Grid::new(-20.0, 20.0, 64).unwrap();
        let v = Potential::sample(grid, f64::cos).unwrap();
        let family = TangentFamily::heat_gauss(&v, grid).unwrap();
        let f = PacketParams {
            x0: 0.0,
            p0: 1.0,
            sigma: 1.0,
        }
        .sample(grid)
        .unwrap();
        for &t in &[0.0, 0.1, 0.5, 1.0] {
            let a = family.build(t).unwrap().apply(&f).unwrap();
            let b = family.build(t + 1e-6).unwrap().apply(&f).unwrap();
            let drift = a.sub(&b).unwrap().l2_norm();
            assert!(drift <= 1e-3 * f.l2_norm(), "t={t}: {drift}");
        }
    }

    #[test]
    fn tangency_input_validation() {
        let grid = Grid::new(-10.0, 10.0, 32).unwrap();
        let v = Potential::zero(grid);
        let family = TangentFamily::heat_gauss(&v, grid).unwrap();
        let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
        let f = band_limited_state(grid, 4);
        assert!(measure_tangency(&family, &WaveFunction::zeros(grid), &h, &[1e-2]).is_err());
        assert!(measure_tangency(&family, &f, &h, &[1e-3, 1e-2]).is_err());
        assert!(measure_tangency(&family, &f, &h, &[1e-2, 1e-7]).is_err());
        assert!(measure_tangency(&family, &f, &h, &[]).is_err());
    }
}
