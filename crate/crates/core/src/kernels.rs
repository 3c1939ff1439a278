//! Kernel functions for the first-stage regressions.
//!
//! Two configurations are supported: the standard Gaussian density
//! (second order) and a signed mixture of four Gaussians whose weights are
//! chosen so that the second, fourth and sixth moments vanish (eighth order).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Beyond this radius every Gaussian term is below 1e-300.
pub const KERNEL_CUTOFF: f64 = 40.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian2,
    MultiGauss8,
}

impl KernelFamily {
    /// Exponent `r` in the bandwidth rule `h = c * N^(-r)`.
    pub fn rate_exponent(self) -> f64 {
        match self {
            KernelFamily::Gaussian2 => 1.0 / 5.0,
            KernelFamily::MultiGauss8 => 19.0 / 360.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            KernelFamily::Gaussian2 => "gaussian2",
            KernelFamily::MultiGauss8 => "multigauss8",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    a: [f64; 4],
    b: [f64; 4],
    scale: f64,
    rate: f64,
}

impl KernelSpec {
    pub fn gaussian2(scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self {
            family: KernelFamily::Gaussian2,
            a: [0.0; 4],
            b: [0.0; 4],
            scale,
            rate: KernelFamily::Gaussian2.rate_exponent(),
        })
    }

    /// Eighth-order kernel with the default scales `b_s = s^(-1/2)`.
    pub fn multigauss8(scale: f64) -> Result<Self> {
        Self::multigauss8_with_scales(default_scales(), scale)
    }

    pub fn multigauss8_with_scales(b: [f64; 4], scale: f64) -> Result<Self> {
        check_scale(scale)?;
        let a = solve_eighth_order_coefficients(b)?;
        Ok(Self {
            family: KernelFamily::MultiGauss8,
            a,
            b,
            scale,
            rate: KernelFamily::MultiGauss8.rate_exponent(),
        })
    }

    pub fn new(family: KernelFamily, scale: f64) -> Result<Self> {
        match family {
            KernelFamily::Gaussian2 => Self::gaussian2(scale),
            KernelFamily::MultiGauss8 => Self::multigauss8(scale),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.a
    }

    pub fn scales(&self) -> [f64; 4] {
        self.b
    }

    /// Bandwidth scale `c`.
    pub fn bandwidth_scale(&self) -> f64 {
        self.scale
    }

    pub fn rate_exponent(&self) -> f64 {
        self.rate
    }

    pub fn bandwidth(&self, n: usize) -> Result<f64> {
        bandwidth(self.scale, n, self.family)
    }

    /// Evaluates the kernel, rejecting non-finite arguments.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::NonFinite("kernel argument"));
        }
        Ok(self.eval_unchecked(u))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, u: f64) -> f64 {
        if u.abs() > KERNEL_CUTOFF {
            return 0.0;
        }
        match self.family {
            KernelFamily::Gaussian2 => INV_SQRT_2PI * (-0.5 * u * u).exp(),
            KernelFamily::MultiGauss8 => {
                let mut sum = 0.0;
                for (a, b) in self.a.iter().zip(&self.b) {
                    sum += a / b.abs() * (-u * u / (2.0 * b * b)).exp();
                }
                sum
            }
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid("bandwidth_scale", format!("must be positive, got {scale}")));
    }
    Ok(())
}

/// `b_s = s^(-1/2)` for `s = 1..4`.
pub fn default_scales() -> [f64; 4] {
    [1.0, 0.5f64.sqrt(), (1.0f64 / 3.0).sqrt(), 0.5]
}

/// Standard normal density `(2π)^(-1/2) exp(-u²/2)`.
pub fn eval_gaussian2(u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite("kernel argument"));
    }
    if u.abs() > KERNEL_CUTOFF {
        return Ok(0.0);
    }
    Ok((2.0 * PI).sqrt().recip() * (-0.5 * u * u).exp())
}

/// Eighth-order kernel `Σ a_s |b_s|^(-1) exp(-u²/(2 b_s²))`.
pub fn eval_kernel8(u: f64, spec: &KernelSpec) -> Result<f64> {
    if spec.family != KernelFamily::MultiGauss8 {
        return Err(Error::invalid("spec", "eval_kernel8 needs a MultiGauss8 spec"));
    }
    spec.eval(u)
}

/// Solves `Σ a_s = 1` and `Σ a_s b_s^(2l) = 0` for `l = 1, 2, 3`.
///
/// The system is Vandermonde in the nodes `b_s²`, so `a_s` is the value at
/// zero of the `s`-th Lagrange basis polynomial over those nodes.
pub fn solve_eighth_order_coefficients(b: [f64; 4]) -> Result<[f64; 4]> {
    if !b.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::invalid("b", "scales must be positive and finite"));
    }
    let nodes = b.map(|v| v * v);
    for s in 0..4 {
        for t in (s + 1)..4 {
            if nodes[s] == nodes[t] {
                return Err(Error::SingularSystem);
            }
        }
    }
    let mut a = [0.0; 4];
    for s in 0..4 {
        let mut num = 1.0;
        let mut den = 1.0;
        for t in (0..4).filter(|&t| t != s) {
            num *= -nodes[t];
            den *= nodes[s] - nodes[t];
        }
        a[s] = num / den;
    }
    Ok(a)
}

/// Deterministic bandwidth `c * N^(-r)` with the family's rate exponent.
pub fn bandwidth(scale: f64, n: usize, family: KernelFamily) -> Result<f64> {
    check_scale(scale)?;
    if n == 0 {
        return Err(Error::invalid("n", "sample size must be at least 1"));
    }
    Ok(scale * (n as f64).powf(-family.rate_exponent()))
}

/// Largest absolute residual of the four defining constraints.
pub fn constraint_residual(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut worst = (a.iter().sum::<f64>() - 1.0).abs();
    for l in 1..=3 {
        let m: f64 = a.iter().zip(b).map(|(a, b)| a * b.powi(2 * l)).sum();
        worst = worst.max(m.abs());
    }
    worst
}

/// Composite Simpson rule on `[lo, hi]` with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_values() {
        assert_abs_diff_eq!(eval_gaussian2(0.0).unwrap(), 0.398_942_280_4, epsilon = 1e-10);
        assert_abs_diff_eq!(eval_gaussian2(1.0).unwrap(), 0.241_970_724_5, epsilon = 1e-10);
        assert_eq!(eval_gaussian2(1.0).unwrap(), eval_gaussian2(-1.0).unwrap());
        assert!(eval_gaussian2(f64::NAN).is_err());
        assert!(eval_gaussian2(f64::INFINITY).is_err());
        assert_eq!(eval_gaussian2(41.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_spec_matches_free_function() {
        let spec = KernelSpec::gaussian2(1.0).unwrap();
        for u in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            assert_abs_diff_eq!(spec.eval(u).unwrap(), eval_gaussian2(u).unwrap(), epsilon = 1e-16);
        }
    }

    #[test]
    fn duplicate_scales_are_singular() {
        assert_eq!(
            solve_eighth_order_coefficients([1.0, 0.5, 0.5, 0.25]),
            Err(Error::SingularSystem)
        );
        assert!(solve_eighth_order_coefficients([1.0, 0.5, -0.3, 0.25]).is_err());
    }

    #[test]
    fn kernel8_center_value() {
        let spec = KernelSpec::multigauss8(1.0).unwrap();
        assert_abs_diff_eq!(eval_kernel8(0.0, &spec).unwrap(), 3.440_834_9, epsilon = 1e-6);
        assert!(eval_kernel8(f64::NAN, &spec).is_err());
        let g = KernelSpec::gaussian2(1.0).unwrap();
        assert!(eval_kernel8(0.0, &g).is_err());
    }

    #[test]
    fn kernel8_takes_negative_values() {
        let spec = KernelSpec::multigauss8(1.0).unwrap();
        assert!((0..400).any(|i| spec.eval_unchecked(i as f64 * 0.01) < 0.0));
    }

    #[test]
    fn bandwidth_rules() {
        for fam in [KernelFamily::Gaussian2, KernelFamily::MultiGauss8] {
            assert_eq!(bandwidth(1.0, 1, fam).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(
            bandwidth(0.8, 1000, KernelFamily::Gaussian2).unwrap(),
            0.200_951_0,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            bandwidth(5.6, 300, KernelFamily::MultiGauss8).unwrap(),
            4.1443,
            epsilon = 1e-4
        );
        assert!(bandwidth(1.0, 0, KernelFamily::Gaussian2).is_err());
        assert!(bandwidth(0.0, 10, KernelFamily::Gaussian2).is_err());
    }

    #[test]
    fn bandwidth_monotone_and_linear() {
        for fam in [KernelFamily::Gaussian2, KernelFamily::MultiGauss8] {
            let mut prev = f64::INFINITY;
            for n in [1, 2, 10, 300, 500, 1000, 100_000] {
                let h = bandwidth(1.3, n, fam).unwrap();
                assert!(h < prev);
                prev = h;
                let h2 = bandwidth(2.6, n, fam).unwrap();
                assert_abs_diff_eq!(h2, 2.0 * h, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let v = simpson(|x| x * x * x + x * x, 0.0, 2.0, 4);
        assert_abs_diff_eq!(v, 4.0 + 8.0 / 3.0, epsilon = 1e-12);
    }
}
