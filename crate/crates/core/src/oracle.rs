//! Heuristic lower bounds and desk-scale ground truth: damped symmetric
//! power iteration on the gradient map, exhaustive sphere grids for n ≤ 3,
//! and eigenpair residual diagnostics.
//!
//! Everything here produces *attained* objective values, so each result is
//! a valid lower bound on the spectral norm; none of it is used for the
//! certified upper side of a bracket.

use rayon::prelude::*;

use crate::poly::{HomoPoly, PolyMap};
use crate::tensor::DenseTensor;
use crate::util::{norm2, normalize, random_unit_vector, stream_rng, Accum};
use crate::{Error, Result};

/// Options shared by the iterative lower-bound searches.
#[derive(Debug, Clone)]
pub struct ShopmOptions {
    pub starts: u32,
    pub iters: u32,
    /// Relative objective improvement below which a start is converged.
    pub tol: f64,
    /// Weight of the new direction in the damped update; `None` picks 0.9
    /// for even-degree polynomials and 0.5 for odd.
    pub damping: Option<f64>,
    pub seed: u64,
}

impl Default for ShopmOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            iters: 500,
            tol: 1e-12,
            damping: None,
            seed: 0,
        }
    }
}

/// A lower-bound witness: `value = |f(witness)|` with `‖witness‖₂ = 1`.
#[derive(Debug, Clone)]
pub struct LowerBoundWitness {
    pub value: f64,
    pub witness: Vec<f64>,
    /// `‖F(x) − f(x)·x‖₂` at the witness; small when the search converged
    /// to an eigenpair of the gradient map.
    pub residual: f64,
    pub converged: bool,
}

/// Multistart damped power iteration on the gradient map `F = (1/p)∇f`:
/// `x ← normalize((1−α)x + α·s·F(x)/‖F(x)‖)` with the sign `s` chosen to
/// increase `|f|`, accepting only non-decreasing steps. Returns the best
/// attained `|f(x)|` over unit `x`.
pub fn shopm_lower_bound(f: &HomoPoly, opts: &ShopmOptions) -> Result<LowerBoundWitness> {
    if f.degree() < 2 {
        return Err(Error::InvalidInput(format!(
            "power iteration needs degree ≥ 2, got {}",
            f.degree()
        )));
    }
    if f.is_zero() {
        let mut w = vec![0.0; f.dimension()];
        if !w.is_empty() {
            w[0] = 1.0;
        }
        return Ok(LowerBoundWitness {
            value: 0.0,
            witness: w,
            residual: 0.0,
            converged: true,
        });
    }
    let grad = f.gradient_map()?;
    let alpha0 = opts
        .damping
        .unwrap_or(if f.degree() % 2 == 0 { 0.9 } else { 0.5 });
    let n = f.dimension();

    let runs: Vec<(LowerBoundWitness, u32)> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(opts.seed, s as u64);
            let mut x = random_unit_vector(&mut rng, n);
            let mut value = f.eval(&x).expect("dimension matches").abs();
            let mut converged = false;
            for _ in 0..opts.iters {
                let g = grad.eval(&x).expect("dimension matches");
                let gnorm = norm2(&g);
                if gnorm == 0.0 {
                    converged = true;
                    break;
                }
                let sign = if f.eval(&x).unwrap() < 0.0 { -1.0 } else { 1.0 };
                let mut alpha = alpha0;
                let mut accepted = false;
                while alpha > 1e-4 {
                    let mut cand: Vec<f64> = x
                        .iter()
                        .zip(&g)
                        .map(|(xi, gi)| (1.0 - alpha) * xi + alpha * sign * gi / gnorm)
                        .collect();
                    if !normalize(&mut cand) {
                        break;
                    }
                    let cand_val = f.eval(&cand).unwrap().abs();
                    if cand_val >= value {
                        let gain = cand_val - value;
                        x = cand;
                        value = cand_val;
                        accepted = true;
                        if gain <= opts.tol * value.max(1.0) {
                            converged = true;
                        }
                        break;
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    converged = true;
                    break;
                }
                if converged {
                    break;
                }
            }
            let residual = sigma_witness_residual(f, &x).expect("dimension matches");
            (
                LowerBoundWitness {
                    value,
                    witness: x,
                    residual,
                    converged,
                },
                s,
            )
        })
        .collect();

    Ok(runs
        .into_iter()
        .max_by(|(a, sa), (b, sb)| {
            a.value
                .partial_cmp(&b.value)
                .unwrap()
                .then(sb.cmp(sa))
        })
        .map(|(w, _)| w)
        .unwrap())
}

/// Exhaustive angular grid search on the unit sphere for n ≤ 3, followed by
/// one golden-section refinement pass around the best cell. Ground truth for
/// desk-scale cross-validation.
pub fn grid_oracle(f: &HomoPoly, resolution: u32) -> Result<LowerBoundWitness> {
    grid_oracle_witness(f, resolution)
}

fn golden_max(mut lo: f64, mut hi: f64, mut eval: impl FnMut(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..80 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = eval(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn grid_oracle_witness(f: &HomoPoly, resolution: u32) -> Result<LowerBoundWitness> {
    let n = f.dimension();
    match n {
        1 => {
            let value = f.eval(&[1.0])?.abs();
            Ok(LowerBoundWitness {
                value,
                witness: vec![1.0],
                residual: 0.0,
                converged: true,
            })
        }
        2 => {
            let k = if resolution == 0 { 2000 } else { resolution } as usize;
            let eval_theta = |theta: f64| {
                f.eval(&[theta.cos(), theta.sin()]).unwrap().abs()
            };
            let mut best = (0usize, f64::NEG_INFINITY);
            // antipodal points share |f|, so half a turn covers the sphere
            for i in 0..k {
                let theta = std::f64::consts::PI * i as f64 / k as f64;
                let v = eval_theta(theta);
                if v > best.1 {
                    best = (i, v);
                }
            }
            let step = std::f64::consts::PI / k as f64;
            let center = std::f64::consts::PI * best.0 as f64 / k as f64;
            let (theta, value) = golden_max(center - step, center + step, eval_theta);
            let (theta, value) = if value >= best.1 {
                (theta, value)
            } else {
                (center, best.1)
            };
            Ok(LowerBoundWitness {
                value,
                witness: vec![theta.cos(), theta.sin()],
                residual: 0.0,
                converged: true,
            })
        }
        3 => {
            let k = if resolution == 0 { 720 } else { resolution } as usize;
            let point = |theta: f64, phi: f64| {
                [
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ]
            };
            let eval_angles =
                |theta: f64, phi: f64| f.eval(&point(theta, phi)).unwrap().abs();
            let mut best = (0.0f64, 0.0f64, f64::NEG_INFINITY);
            for i in 0..=k {
                let theta = std::f64::consts::PI * i as f64 / k as f64;
                for j in 0..k {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                    let v = eval_angles(theta, phi);
                    if v > best.2 {
                        best = (theta, phi, v);
                    }
                }
            }
            let dt = std::f64::consts::PI / k as f64;
            let dp = 2.0 * std::f64::consts::PI / k as f64;
            let (theta, _) = golden_max(best.0 - dt, best.0 + dt, |t| eval_angles(t, best.1));
            let (phi, value) = golden_max(best.1 - dp, best.1 + dp, |p| eval_angles(theta, p));
            let (theta, phi, value) = if value >= best.2 {
                (theta, phi, value)
            } else {
                (best.0, best.1, best.2)
            };
            Ok(LowerBoundWitness {
                value,
                witness: point(theta, phi).to_vec(),
                residual: 0.0,
                converged: true,
            })
        }
        _ => Err(Error::InvalidInput(format!(
            "grid oracle supports n ≤ 3, got {n}"
        ))),
    }
}

/// Heuristic estimate of the spectral norm of a polynomial map,
/// `max ‖F(x)‖₂ / ‖x‖₂^p`, by alternating over the output direction `y` and
/// a damped gradient step in `x` on `⟨y, F(x)⟩`. Works directly on the
/// sparse coordinates, so high-degree iterates never materialize as dense
/// tensors; the value agrees with the tied two-block tensor maximization.
///
/// The result is an attained value of `‖F(x)‖₂` at unit `x`: a lower bound
/// on the map spectral norm.
pub fn map_sigma_estimate(map: &PolyMap, opts: &ShopmOptions) -> Result<LowerBoundWitness> {
    let n = map.input_dimension();
    if map.is_zero() {
        return Ok(LowerBoundWitness {
            value: 0.0,
            witness: vec![0.0; n],
            residual: 0.0,
            converged: true,
        });
    }
    let p = map.degree();
    let alpha0 = opts.damping.unwrap_or(0.9);
    let runs: Vec<(LowerBoundWitness, u32)> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(opts.seed, s as u64);
            let mut x = random_unit_vector(&mut rng, n);
            let mut value = norm2(&map.eval(&x).expect("dimension matches"));
            let mut converged = false;
            if p == 0 {
                // constant map: the objective does not depend on x
                return (
                    LowerBoundWitness {
                        value,
                        witness: x,
                        residual: 0.0,
                        converged: true,
                    },
                    s,
                );
            }
            for _ in 0..opts.iters {
                let w = map.eval(&x).expect("dimension matches");
                let wnorm = norm2(&w);
                if wnorm == 0.0 {
                    converged = true;
                    break;
                }
                let y: Vec<f64> = w.iter().map(|v| v / wnorm).collect();
                let pulled =
                    HomoPoly::linear_combination(map.coords(), &y).expect("consistent coords");
                let grad_dir = pulled
                    .gradient_map()
                    .expect("degree ≥ 1")
                    .eval(&x)
                    .expect("dimension matches");
                let gnorm = norm2(&grad_dir);
                if gnorm == 0.0 {
                    converged = true;
                    break;
                }
                let mut alpha = alpha0;
                let mut accepted = false;
                while alpha > 1e-4 {
                    let mut cand: Vec<f64> = x
                        .iter()
                        .zip(&grad_dir)
                        .map(|(xi, gi)| (1.0 - alpha) * xi + alpha * gi / gnorm)
                        .collect();
                    if !normalize(&mut cand) {
                        break;
                    }
                    let cand_val = norm2(&map.eval(&cand).unwrap());
                    if cand_val >= value {
                        let gain = cand_val - value;
                        x = cand;
                        value = cand_val;
                        accepted = true;
                        if gain <= opts.tol * value.max(1.0) {
                            converged = true;
                        }
                        break;
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    converged = true;
                    break;
                }
                if converged {
                    break;
                }
            }
            (
                LowerBoundWitness {
                    value,
                    witness: x,
                    residual: 0.0,
                    converged,
                },
                s,
            )
        })
        .collect();
    Ok(runs
        .into_iter()
        .max_by(|(a, sa), (b, sb)| a.value.partial_cmp(&b.value).unwrap().then(sb.cmp(sa)))
        .map(|(w, _)| w)
        .unwrap())
}

/// `‖T×⊗^{d−1}x − λ·x^{∘(d−1)}‖₂`, the defect of `(λ, x)` as a nonlinear
/// eigenpair of an equidimensional tensor. The caller normalizes `x` in the
/// norm relevant to its eigenproblem.
pub fn eigen_residual(t: &DenseTensor, x: &[f64], lambda: f64) -> Result<f64> {
    let n = t.dims()[0];
    if t.dims().iter().any(|&d| d != n) {
        return Err(Error::ShapeMismatch(format!(
            "eigen residual needs an equidimensional tensor, got {:?}",
            t.dims()
        )));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let d = t.modes() as i32;
    let w = t.contract_power(x)?;
    let mut acc = Accum::new();
    for (wi, xi) in w.iter().zip(x) {
        let r = wi - lambda * xi.powi(d - 1);
        acc.add(r * r);
    }
    Ok(acc.value().max(0.0).sqrt())
}

/// ℓ₂ fixed-point residual `‖F(x) − f(x)·x‖₂` of a unit σ-witness for the
/// gradient map `F = (1/p)∇f`. Zero exactly at spectral-norm maximizers.
pub fn sigma_witness_residual(f: &HomoPoly, x: &[f64]) -> Result<f64> {
    let grad: PolyMap = f.gradient_map()?;
    let fx = f.eval(x)?;
    let gx = grad.eval(x)?;
    let mut acc = Accum::new();
    for (gi, xi) in gx.iter().zip(x) {
        let r = gi - fx * xi;
        acc.add(r * r);
    }
    Ok(acc.value().max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::poly_to_tensor;

    fn poly(n: usize, p: u32, terms: &[(&[u32], f64)]) -> HomoPoly {
        HomoPoly::from_terms(n, p, terms.iter().map(|(j, c)| (j.to_vec(), *c))).unwrap()
    }

    #[test]
    fn shopm_constant_on_sphere() {
        let f = poly(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)]);
        let out = shopm_lower_bound(&f, &ShopmOptions::default()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shopm_diagonal_max_at_basis_vector() {
        let f = poly(2, 4, &[(&[4, 0], 1.0), (&[0, 4], 0.5)]);
        let out = shopm_lower_bound(&f, &ShopmOptions::default()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-9, "value {}", out.value);
        assert!(out.witness[0].abs() > 1.0 - 1e-5);
        assert!(out.residual < 1e-6);
    }

    #[test]
    fn shopm_rank_one_cubic() {
        let f = HomoPoly::linear_form(&[1.0, 1.0]).unwrap().power(3).unwrap();
        let out = shopm_lower_bound(&f, &ShopmOptions::default()).unwrap();
        let expect = 2f64.powf(1.5);
        assert!((out.value - expect).abs() < 1e-9 * expect);
        let diag = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.witness[0].abs() - diag).abs() < 1e-5);
        assert!((out.witness[1].abs() - diag).abs() < 1e-5);
    }

    #[test]
    fn shopm_rejects_linear() {
        let f = HomoPoly::linear_form(&[1.0, 0.0]).unwrap();
        assert!(shopm_lower_bound(&f, &ShopmOptions::default()).is_err());
    }

    #[test]
    fn grid_cases() {
        let f = poly(2, 2, &[(&[1, 1], 1.0)]);
        let out = grid_oracle(&f, 0).unwrap();
        assert!((out.value - 0.5).abs() < 1e-10);

        let f = poly(1, 3, &[(&[3], 1.0)]);
        assert!((grid_oracle(&f, 0).unwrap().value - 1.0).abs() < 1e-15);

        // x₁³+x₂³ peaks at a basis vector, not on the diagonal
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[0, 3], 1.0)]);
        let out = grid_oracle(&f, 0).unwrap();
        assert!((out.value - 1.0).abs() < 1e-8);

        let f4 = poly(4, 2, &[(&[2, 0, 0, 0], 1.0)]);
        assert!(grid_oracle(&f4, 0).is_err());
    }

    #[test]
    fn grid_three_vars() {
        let f = poly(3, 2, &[(&[2, 0, 0], 1.0), (&[0, 2, 0], 1.0), (&[0, 0, 2], 1.0)]);
        let out = grid_oracle(&f, 180).unwrap();
        assert!((out.value - 1.0).abs() < 1e-10);

        let g = poly(3, 3, &[(&[1, 1, 1], 1.0)]);
        // max of |x y z| on the sphere is 3^{-3/2}
        let expect = 3f64.powf(-1.5);
        let out = grid_oracle(&g, 360).unwrap();
        assert!((out.value - expect).abs() < 1e-6 * expect, "got {}", out.value);
    }

    #[test]
    fn eigen_residual_cases() {
        // diagonal tensor: exact eigenpair at e₁
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        t.set(&[0, 0, 0], 1.5);
        t.set(&[1, 1, 1], 0.5);
        let r = eigen_residual(&t, &[1.0, 0.0], 1.5).unwrap();
        assert_eq!(r, 0.0);

        // all-ones 2×2×2×2 with x = (1,1): contraction is 8 per coordinate
        let ones = DenseTensor::new(vec![2; 4], vec![1.0; 16]).unwrap();
        let r = eigen_residual(&ones, &[1.0, 1.0], 8.0).unwrap();
        assert!(r < 1e-12);

        let r = eigen_residual(&t, &[0.6, 0.8], 2.0).unwrap();
        assert!(r > 0.0);
    }

    #[test]
    fn sigma_residual_zero_at_maximizer() {
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[0, 3], 1.0)]);
        assert!(sigma_witness_residual(&f, &[1.0, 0.0]).unwrap() < 1e-15);
        assert!(sigma_witness_residual(&f, &[0.6, 0.8]).unwrap() > 1e-3);
    }

    #[test]
    fn shopm_below_grid_truth() {
        let mut rng = crate::util::stream_rng(23, 0);
        for trial in 0..20 {
            let f = HomoPoly::from_terms(
                2,
                3,
                [
                    (vec![3, 0], crate::util::standard_normal(&mut rng)),
                    (vec![2, 1], crate::util::standard_normal(&mut rng)),
                    (vec![1, 2], crate::util::standard_normal(&mut rng)),
                    (vec![0, 3], crate::util::standard_normal(&mut rng)),
                ],
            )
            .unwrap();
            let grid = grid_oracle(&f, 0).unwrap().value;
            let shopm = shopm_lower_bound(
                &f,
                &ShopmOptions {
                    starts: 16,
                    seed: trial,
                    ..Default::default()
                },
            )
            .unwrap()
            .value;
            assert!(
                shopm <= grid + 1e-6 * grid.max(1.0),
                "trial {trial}: shopm {shopm} grid {grid}"
            );
        }
    }

    #[test]
    fn witness_scale_invariance() {
        let f = poly(2, 3, &[(&[3, 0], 0.3), (&[1, 2], -0.9)]);
        let x = [0.6, -0.8];
        let base = f.eval(&x).unwrap().abs();
        for t in [0.2, 1.0, 3.7] {
            let xs: Vec<f64> = x.iter().map(|v| v * t).collect();
            let scaled = f.eval(&xs).unwrap().abs() / t.powi(3);
            assert!((scaled - base).abs() <= 1e-12 * base.max(1.0));
        }
    }

    #[test]
    fn grid_rotation_invariance() {
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[2, 1], -0.5), (&[0, 3], 0.25)]);
        let c = 0.8_f64;
        let s = 0.6_f64;
        let q = [c, -s, s, c];
        let rotated = f.rotate(&q).unwrap();
        let a = grid_oracle(&f, 0).unwrap().value;
        let b = grid_oracle(&rotated, 0).unwrap().value;
        assert!((a - b).abs() < 1e-8 * a.max(1.0));
    }

    #[test]
    fn hopm_matches_poly_oracle_on_bridge() {
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[0, 3], 0.5)]);
        let t = poly_to_tensor(&f).unwrap();
        let free = crate::tensor::hopm_spectral_estimate(&t, &Default::default());
        let tied = shopm_lower_bound(&f, &ShopmOptions::default()).unwrap();
        assert!((free.value - tied.value).abs() < 1e-6 * free.value.max(1.0));
    }

    #[test]
    fn map_sigma_matches_two_block_on_small_maps() {
        use crate::poly::PolyMap;
        let mut rng = crate::util::stream_rng(7, 0);
        for trial in 0..8 {
            let coords: Vec<HomoPoly> = (0..2)
                .map(|_| {
                    HomoPoly::from_terms(
                        2,
                        2,
                        [
                            (vec![2, 0], crate::util::standard_normal(&mut rng)),
                            (vec![1, 1], crate::util::standard_normal(&mut rng)),
                            (vec![0, 2], crate::util::standard_normal(&mut rng)),
                        ],
                    )
                    .unwrap()
                })
                .collect();
            let map = PolyMap::new(2, coords).unwrap();
            // materialize the coefficient tensor of the map: mode 1 indexes
            // coordinates, trailing modes are the symmetric part
            let mut t = crate::tensor::DenseTensor::zeros(vec![2, 2, 2]).unwrap();
            for (i, c) in map.coords().iter().enumerate() {
                let ti = poly_to_tensor(c).unwrap();
                for a in 0..2 {
                    for b in 0..2 {
                        t.set(&[i, a, b], ti.get(&[a, b]));
                    }
                }
            }
            let via_tensor =
                crate::tensor::two_block_sigma_estimate(&t, &Default::default()).unwrap();
            let via_poly = map_sigma_estimate(&map, &ShopmOptions::default()).unwrap();
            assert!(
                (via_tensor.value - via_poly.value).abs()
                    <= 1e-6 * via_tensor.value.max(1.0),
                "trial {trial}: tensor {} poly {}",
                via_tensor.value,
                via_poly.value
            );
        }
    }
}
