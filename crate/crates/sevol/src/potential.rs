//! Explicit toric symplectic potentials on the moment cone and the induced
//! metric blocks. The potential
//!
//! ```text
//! G(y) = 1/2 Σ_a <y,v_a> log <y,v_a>
//!      + 1/2 <ξ,y> log <ξ,y> - 1/2 (Σ_a <v_a,y>) log (Σ_a <v_a,y>)
//!      + h(y)
//! ```
//!
//! is strictly convex on the interior for admissible `h` (smooth and
//! homogeneous of degree one); `g = G_ij dy dy + G^ij dφ dφ`.

use nalgebra::DMatrix;
use num_traits::ToPrimitive;

use crate::cone::MomentCone;
use crate::error::{Error, Result};

/// Pointwise evaluator for a homogeneous degree-one modification `h`. No
/// function-space parametrization is attempted; implementors must be
/// re-entrant.
pub trait DegreeOneFunction: Sync {
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64]) -> Vec<f64>;
    fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>>;
}

/// The default `h = 0`.
pub struct ZeroFunction;

impl DegreeOneFunction for ZeroFunction {
    fn value(&self, _y: &[f64]) -> f64 {
        0.0
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        vec![0.0; y.len()]
    }
    fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0; y.len()]; y.len()]
    }
}

/// Linear functions are the simplest degree-one family; they shift the
/// gradient and leave the metric untouched.
pub struct LinearFunction(pub Vec<f64>);

impl DegreeOneFunction for LinearFunction {
    fn value(&self, y: &[f64]) -> f64 {
        self.0.iter().zip(y).map(|(c, yi)| c * yi).sum()
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.0.len(), y.len());
        self.0.clone()
    }
    fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0; y.len()]; y.len()]
    }
}

pub struct PotentialSpec<'a> {
    pub cone: &'a MomentCone,
    pub xi: Vec<f64>,
    pub h: &'a dyn DegreeOneFunction,
}

impl<'a> PotentialSpec<'a> {
    pub fn new(cone: &'a MomentCone, xi: Vec<f64>, h: &'a dyn DegreeOneFunction) -> Self {
        PotentialSpec { cone, xi, h }
    }

    /// The canonical (quotient) metric: `ξ = Σ_a v_a` makes the ξ-dependent
    /// terms cancel identically, leaving the pure log potential.
    pub fn canonical(cone: &'a MomentCone) -> Self {
        let n = cone.dim();
        let mut xi = vec![0.0; n];
        for v in cone.normals() {
            for (x, c) in xi.iter_mut().zip(v) {
                *x += c.to_f64().unwrap();
            }
        }
        PotentialSpec {
            cone,
            xi,
            h: &ZeroFunction,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    pub hessian_inverse: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
}

fn pairings_f64(cone: &MomentCone, y: &[f64]) -> Vec<f64> {
    cone.normals()
        .iter()
        .map(|v| v.iter().zip(y).map(|(c, yi)| c.to_f64().unwrap() * yi).sum())
        .collect()
}

/// Evaluate the potential with analytic first and second derivatives and the
/// exact (to inversion tolerance) inverse Hessian.
pub fn potential(spec: &PotentialSpec, y: &[f64]) -> Result<PotentialEval> {
    let n = spec.cone.dim();
    if y.len() != n || spec.xi.len() != n {
        return Err(Error::Validation("dimension mismatch".into()));
    }
    let ls = pairings_f64(spec.cone, y);
    for (a, l) in ls.iter().enumerate() {
        if *l <= 0.0 {
            return Err(Error::BoundaryEvaluation(format!(
                "<y, v_{}> = {} is not positive",
                a + 1,
                l
            )));
        }
    }
    let lxi: f64 = spec.xi.iter().zip(y).map(|(x, yi)| x * yi).sum();
    if lxi <= 0.0 {
        return Err(Error::BoundaryEvaluation(format!(
            "<xi, y> = {lxi} is not positive"
        )));
    }
    let sigma: f64 = ls.iter().sum();
    let normals_f: Vec<Vec<f64>> = spec
        .cone
        .normals()
        .iter()
        .map(|v| v.iter().map(|c| c.to_f64().unwrap()).collect())
        .collect();
    let s: Vec<f64> = (0..n)
        .map(|j| normals_f.iter().map(|v| v[j]).sum::<f64>())
        .collect();

    let mut value = 0.5 * lxi * lxi.ln() - 0.5 * sigma * sigma.ln() + spec.h.value(y);
    for l in &ls {
        value += 0.5 * l * l.ln();
    }

    let hg = spec.h.gradient(y);
    let mut gradient = vec![0.0; n];
    for j in 0..n {
        let mut g = 0.5 * spec.xi[j] * (lxi.ln() + 1.0) - 0.5 * s[j] * (sigma.ln() + 1.0) + hg[j];
        for (v, l) in normals_f.iter().zip(&ls) {
            g += 0.5 * v[j] * (l.ln() + 1.0);
        }
        gradient[j] = g;
    }

    let hh = spec.h.hessian(y);
    let mut hessian = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in 0..n {
            let mut v2 = 0.5 * spec.xi[j] * spec.xi[k] / lxi - 0.5 * s[j] * s[k] / sigma
                + hh[j][k];
            for (v, l) in normals_f.iter().zip(&ls) {
                v2 += 0.5 * v[j] * v[k] / l;
            }
            hessian[j][k] = v2;
        }
    }

    let m = DMatrix::from_fn(n, n, |i, j| hessian[i][j]);
    let eig = m.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue <= 0.0 {
        return Err(Error::NonConvex {
            point: y.to_vec(),
            min_eig: min_eigenvalue,
        });
    }
    let inv = m.clone().try_inverse().ok_or(Error::NonConvex {
        point: y.to_vec(),
        min_eig: min_eigenvalue,
    })?;
    // inversion sanity: G_ij G^jk = delta
    let id_err = (&m * &inv - DMatrix::<f64>::identity(n, n)).abs().max();
    if id_err > 1e-10 {
        return Err(Error::Internal(format!(
            "Hessian inversion residual {id_err:e} exceeds 1e-10"
        )));
    }
    let hessian_inverse: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)]).collect())
        .collect();
    Ok(PotentialEval {
        value,
        gradient,
        hessian,
        hessian_inverse,
        min_eigenvalue,
    })
}

/// The two metric blocks `(G_ij, G^ij)`; errors with the sample point and the
/// offending eigenvalue when convexity fails.
pub fn metric_blocks(spec: &PotentialSpec, y: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let eval = potential(spec, y)?;
    Ok((eval.hessian, eval.hessian_inverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlin::mat_int;

    fn orthant() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap()
    }
    fn conifold() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1], &[1, 0, 1]]))
            .unwrap()
    }

    #[test]
    fn orthant_canonical_metric_is_flat() {
        let cone = orthant();
        let spec = PotentialSpec::canonical(&cone);
        let y = [0.7, 1.3, 2.4];
        let (g, ginv) = metric_blocks(&spec, &y).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 / (2.0 * y[i]) } else { 0.0 };
                assert!((g[i][j] - expected).abs() < 1e-12);
                let expected_inv = if i == j { 2.0 * y[i] } else { 0.0 };
                assert!((ginv[i][j] - expected_inv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn xi_terms_cancel_for_canonical_reeb() {
        let cone = conifold();
        let canonical = PotentialSpec::canonical(&cone);
        let y = [1.1, 0.3, 0.4];
        let eval = potential(&canonical, &y).unwrap();
        // pure log part computed by hand
        let mut expected = 0.0;
        for v in cone.normals() {
            let l: f64 = v
                .iter()
                .zip(&y)
                .map(|(c, yi)| c.to_f64().unwrap() * yi)
                .sum();
            expected += 0.5 * l * l.ln();
        }
        assert!((eval.value - expected).abs() < 1e-12);
    }

    #[test]
    fn hessian_is_degree_minus_one_homogeneous() {
        let cone = conifold();
        let spec = PotentialSpec::new(&cone, vec![3.0, 1.5, 1.5], &ZeroFunction);
        let y = [0.9, 0.2, 0.5];
        let lambda = 2.75;
        let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let (g1, _) = metric_blocks(&spec, &y).unwrap();
        let (g2, _) = metric_blocks(&spec, &scaled).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g2[i][j] - g1[i][j] / lambda).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_h_shifts_gradient_but_not_hessian() {
        let cone = conifold();
        let y = [1.0, 0.4, 0.3];
        let base = PotentialSpec::new(&cone, vec![3.0, 1.5, 1.5], &ZeroFunction);
        let lin = LinearFunction(vec![0.3, -0.7, 1.9]);
        let shifted = PotentialSpec::new(&cone, vec![3.0, 1.5, 1.5], &lin);
        let e0 = potential(&base, &y).unwrap();
        let e1 = potential(&shifted, &y).unwrap();
        for i in 0..3 {
            assert!((e1.gradient[i] - e0.gradient[i] - lin.0[i]).abs() < 1e-12);
            for j in 0..3 {
                assert!((e1.hessian[i][j] - e0.hessian[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cone = conifold();
        let spec = PotentialSpec::new(&cone, vec![3.0, 1.2, 1.7], &ZeroFunction);
        let y = [1.0, 0.45, 0.35];
        let eval = potential(&spec, &y).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[j] += h;
            ym[j] -= h;
            let fd = (potential(&spec, &yp).unwrap().value
                - potential(&spec, &ym).unwrap().value)
                / (2.0 * h);
            assert!((fd - eval.gradient[j]).abs() < 1e-7);
        }
    }

    #[test]
    fn conifold_metric_positive_definite_at_symmetric_point() {
        let cone = conifold();
        let spec = PotentialSpec::canonical(&cone);
        let eval = potential(&spec, &[1.0, 0.5, 0.5]).unwrap();
        assert!(eval.min_eigenvalue > 0.0);
    }

    #[test]
    fn determinant_diverges_toward_facets() {
        let cone = conifold();
        let spec = PotentialSpec::canonical(&cone);
        // approach the facet <y, (1,1,0)> = 0 along y = (t, -t + eps, 1)
        let dets: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&eps| {
                let y = [1.0, -1.0 + eps, 1.5];
                let (g, _) = metric_blocks(&spec, &y).unwrap();
                DMatrix::from_fn(3, 3, |i, j| g[i][j]).determinant()
            })
            .collect();
        assert!(dets[1] > 10.0 * dets[0]);
        assert!(dets[2] > 10.0 * dets[1]);
    }

    #[test]
    fn boundary_evaluation_rejected() {
        let cone = orthant();
        let spec = PotentialSpec::canonical(&cone);
        assert!(matches!(
            potential(&spec, &[0.0, 1.0, 1.0]),
            Err(Error::BoundaryEvaluation(_))
        ));
    }

    #[test]
    fn inverse_consistency_random_points() {
        let cone = conifold();
        let spec = PotentialSpec::new(&cone, vec![3.0, 1.5, 1.5], &ZeroFunction);
        let mut state = 42u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.1 + (state >> 40) as f64 / (1u64 << 24) as f64
        };
        for _ in 0..100 {
            let base = next();
            let y = [base + next(), next() * 0.5, next() * 0.5];
            if pairings_f64(&cone, &y).iter().any(|&l| l <= 1e-6) {
                continue;
            }
            let eval = potential(&spec, &y).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((eval.hessian[i][j] - eval.hessian[j][i]).abs() < 1e-12);
                    let delta: f64 = (0..3)
                        .map(|k| eval.hessian[i][k] * eval.hessian_inverse[k][j])
                        .sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((delta - expected).abs() < 1e-10);
                }
            }
        }
    }
}
