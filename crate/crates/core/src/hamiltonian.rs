//! Hamiltonians `H(p)` and the Lax–Friedrichs numerical flux.

use std::fmt;

use crate::error::{config, Result};

/// Which axis carries the convex part `+|p_i|` and which the concave part `−|p_j|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaddleAxes {
    pub convex: usize,
    pub concave: usize,
}

/// A Hamiltonian given by an evaluator plus declared structure.
///
/// Lipschitz bounds are trusted by the solvers; [`HamiltonianSpec::spot_check_lipschitz`]
/// samples them.
#[derive(Clone)]
pub struct HamiltonianSpec {
    name: String,
    dim: usize,
    eval: fn(&[f64]) -> f64,
    lipschitz: Vec<f64>,
    pub is_convex: bool,
    pub saddle_axes: Option<SaddleAxes>,
    pub zero_at_origin: bool,
    /// `Some(c)` when `H(p) = Σ_i c_i |p_i|`; the morphological engine needs this form.
    separable_abs: Option<Vec<f64>>,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("is_convex", &self.is_convex)
            .field("saddle_axes", &self.saddle_axes)
            .finish()
    }
}

fn paper_saddle(p: &[f64]) -> f64 {
    p[0].abs() - p[1].abs()
}

fn abs_1d(p: &[f64]) -> f64 {
    p[0].abs()
}

impl HamiltonianSpec {
    /// `H(p_x, p_y) = |p_x| − |p_y|`.
    pub fn paper_saddle() -> Self {
        Self {
            name: "paper_saddle".into(),
            dim: 2,
            eval: paper_saddle,
            lipschitz: vec![1.0, 1.0],
            is_convex: false,
            saddle_axes: Some(SaddleAxes { convex: 0, concave: 1 }),
            zero_at_origin: true,
            separable_abs: Some(vec![1.0, -1.0]),
        }
    }

    /// `H(p) = |p|` in one dimension.
    pub fn abs_1d() -> Self {
        Self {
            name: "abs_1d".into(),
            dim: 1,
            eval: abs_1d,
            lipschitz: vec![1.0],
            is_convex: true,
            saddle_axes: None,
            zero_at_origin: true,
            separable_abs: Some(vec![1.0]),
        }
    }

    /// Hook for compiled-in Hamiltonians. Only the finite-difference engine accepts these.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        eval: fn(&[f64]) -> f64,
        lipschitz: Vec<f64>,
        is_convex: bool,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) || lipschitz.len() != dim {
            return config("custom Hamiltonian needs dimension 1 or 2 and one Lipschitz bound per axis");
        }
        if lipschitz.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return config("Lipschitz bounds must be positive and finite");
        }
        let zero = vec![0.0; dim];
        let zero_at_origin = eval(&zero) == 0.0;
        Ok(Self {
            name: name.into(),
            dim,
            eval,
            lipschitz,
            is_convex,
            saddle_axes: None,
            zero_at_origin,
            separable_abs: None,
        })
    }

    /// Looks up a built-in by its configuration name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "paper_saddle" => Ok(Self::paper_saddle()),
            "abs_1d" => Ok(Self::abs_1d()),
            "custom" => config("'custom' Hamiltonians must be constructed in code with HamiltonianSpec::custom"),
            other => config(format!("unknown Hamiltonian '{other}'")),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    pub fn separable_abs(&self) -> Option<&[f64]> {
        self.separable_abs.as_deref()
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim {
            return config(format!("gradient has {} components, {} expects {}", p.len(), self.name, self.dim));
        }
        Ok((self.eval)(p))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }

    /// Checks `|H(p) − H(q)| ≤ Σ α_i |p_i − q_i|` on `samples` pseudo-random pairs.
    /// Returns the worst ratio observed (≤ 1 when the bounds hold).
    pub fn spot_check_lipschitz(&self, samples: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut p = vec![0.0f64; self.dim];
        let mut q = vec![0.0f64; self.dim];
        for _ in 0..samples {
            for i in 0..self.dim {
                p[i] = rng.random_range(-5.0..5.0);
                q[i] = rng.random_range(-5.0..5.0);
            }
            let bound: f64 = (0..self.dim).map(|i| self.lipschitz[i] * (p[i] - q[i]).abs()).sum();
            if bound > 0.0 {
                worst = worst.max((self.eval_unchecked(&p) - self.eval_unchecked(&q)).abs() / bound);
            }
        }
        worst
    }
}

/// `Ĥ(p⁻, p⁺) = H((p⁻ + p⁺)/2) − Σ_i (α_i/2)(p⁺_i − p⁻_i)`.
///
/// Nonincreasing in every `p⁺_i` and nondecreasing in every `p⁻_i` as long as
/// `alphas` dominate the Lipschitz bounds of `h`; smaller `alphas` are rejected.
pub fn lax_friedrichs_flux(h: &HamiltonianSpec, p_minus: &[f64], p_plus: &[f64], alphas: &[f64]) -> Result<f64> {
    let d = h.dim();
    if p_minus.len() != d || p_plus.len() != d || alphas.len() != d {
        return config(format!("flux arguments must all have dimension {d}"));
    }
    check_alphas(h, alphas)?;
    Ok(flux_signed(h, 1.0, p_minus, p_plus, alphas))
}

pub(crate) fn check_alphas(h: &HamiltonianSpec, alphas: &[f64]) -> Result<()> {
    for (i, (&a, &l)) in alphas.iter().zip(h.lipschitz()).enumerate() {
        if a < l {
            return config(format!(
                "dissipation α_{i} = {a} is below the Lipschitz bound {l}; the flux would not be monotone"
            ));
        }
    }
    Ok(())
}

/// Flux of `sign·H`, the form used by the solver on decreasing segments.
#[inline]
pub(crate) fn flux_signed(h: &HamiltonianSpec, sign: f64, p_minus: &[f64], p_plus: &[f64], alphas: &[f64]) -> f64 {
    let mut mid = [0.0; 2];
    let mut dissipation = 0.0;
    for i in 0..p_minus.len() {
        mid[i] = 0.5 * (p_minus[i] + p_plus[i]);
        dissipation += 0.5 * alphas[i] * (p_plus[i] - p_minus[i]);
    }
    sign * h.eval_unchecked(&mid[..p_minus.len()]) - dissipation
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn builtin_values() {
        let h = HamiltonianSpec::paper_saddle();
        assert_eq!(h.eval(&[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(h.eval(&[0.0, 1.0]).unwrap(), -1.0);
        assert_eq!(h.eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(h.eval(&[-2.0, 0.5]).unwrap(), 1.5);
        assert_eq!(h.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(h.zero_at_origin && !h.is_convex);
        assert_eq!(h.saddle_axes, Some(SaddleAxes { convex: 0, concave: 1 }));

        let a = HamiltonianSpec::abs_1d();
        assert_eq!(a.eval(&[2.0]).unwrap(), 2.0);
        assert_eq!(a.eval(&[-3.0]).unwrap(), 3.0);
        assert_eq!(a.eval(&[0.0]).unwrap(), 0.0);
        assert_eq!(a.eval(&[-1.0]).unwrap(), 1.0);
        assert!(a.is_convex);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let h = HamiltonianSpec::paper_saddle();
        assert!(matches!(h.eval(&[1.0]), Err(crate::Error::Config(_))));
        assert!(lax_friedrichs_flux(&h, &[1.0], &[1.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn by_name_lookup() {
        assert_eq!(HamiltonianSpec::by_name("paper_saddle").unwrap().dim(), 2);
        assert_eq!(HamiltonianSpec::by_name("abs_1d").unwrap().dim(), 1);
        assert!(HamiltonianSpec::by_name("custom").is_err());
        assert!(HamiltonianSpec::by_name("eikonal").is_err());
    }

    #[test]
    fn custom_hook() {
        fn quad_capped(p: &[f64]) -> f64 {
            p[0].clamp(-1.0, 1.0).powi(2) / 2.0
        }
        let h = HamiltonianSpec::custom("capped", 1, quad_capped, vec![1.0], true).unwrap();
        assert!(h.zero_at_origin);
        assert!(h.separable_abs().is_none());
        assert!(h.spot_check_lipschitz(500, 1) <= 1.0 + 1e-12);
        assert!(HamiltonianSpec::custom("bad", 3, quad_capped, vec![1.0; 3], true).is_err());
    }

    #[test]
    fn flux_examples() {
        let h = HamiltonianSpec::paper_saddle();
        assert_eq!(lax_friedrichs_flux(&h, &[1.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(lax_friedrichs_flux(&h, &[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            lax_friedrichs_flux(&h, &[0.0, 0.0], &[0.0, 0.0], &[0.5, 1.0]),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn flux_consistency_is_exact() {
        let h = HamiltonianSpec::paper_saddle();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            assert_eq!(lax_friedrichs_flux(&h, &p, &p, &[1.0, 1.0]).unwrap(), h.eval(&p).unwrap());
        }
    }

    #[test]
    fn flux_is_monotone_by_finite_differences() {
        let h = HamiltonianSpec::paper_saddle();
        let alphas = [1.25, 1.25];
        let step = 1e-3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let pm = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let pp = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let base = lax_friedrichs_flux(&h, &pm, &pp, &alphas).unwrap();
            for i in 0..2 {
                let mut up = pp;
                up[i] += step;
                assert!(lax_friedrichs_flux(&h, &pm, &up, &alphas).unwrap() < base);
                let mut um = pm;
                um[i] += step;
                assert!(lax_friedrichs_flux(&h, &um, &pp, &alphas).unwrap() > base);
            }
        }
    }

    #[test]
    fn paper_saddle_lipschitz_bounds_hold() {
        assert!(HamiltonianSpec::paper_saddle().spot_check_lipschitz(2000, 3) <= 1.0 + 1e-12);
        assert!(HamiltonianSpec::abs_1d().spot_check_lipschitz(2000, 4) <= 1.0 + 1e-12);
    }
}
