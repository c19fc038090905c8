//! Critical Reeb vector location. On a Gorenstein cone the Einstein
//! normalization pins the first height coordinate to `n`, leaving a strictly
//! convex volume function on the interior of the compact slice polytope `N`.
//! Damped Newton descent from the vertex centroid finds the unique critical
//! point; rational candidates are certified exactly (zero gradient in exact
//! arithmetic) whenever the minimizer is rational.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cone::MomentCone;
use crate::error::{Error, Result};
use crate::intlin as la;
use crate::volume::{
    decompose, volume_delta, volume_gradient, volume_hessian, volume_report, ReebVector,
    SimplicialDecomposition, VolumeReport,
};
use crate::{Int, Rat};

/// The compact slice `N = C ∩ {first Gorenstein coordinate = n}`.
#[derive(Debug, Clone)]
pub struct ReebPolytope {
    pub dim: usize,
    /// Fan rays scaled to the height-`n` slice.
    pub vertices: Vec<Vec<Rat>>,
    /// Vertex centroid; strictly interior by convexity.
    pub interior_start: Vec<Rat>,
}

pub fn reeb_polytope(cone: &MomentCone) -> Result<ReebPolytope> {
    let basis = cone
        .gorenstein_basis()
        .ok_or_else(|| Error::NotGorenstein("Reeb polytope needs a height-one basis".into()))?;
    let n = Rat::from_integer(Int::from(cone.dim() as u64));
    // <gamma, v_a> = 1, so the height-n representative of each fan ray is n*v_a.
    debug_assert!(cone
        .normals()
        .iter()
        .all(|v| la::dot(&basis.gamma, v).is_one()));
    let vertices: Vec<Vec<Rat>> = cone
        .normals()
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| Rat::from_integer(c.clone()) * &n)
                .collect()
        })
        .collect();
    let d = Rat::from_integer(Int::from(vertices.len() as u64));
    let dim = cone.dim();
    let interior_start: Vec<Rat> = (0..dim)
        .map(|j| {
            let sum: Rat = vertices.iter().map(|v| v[j].clone()).sum();
            sum / &d
        })
        .collect();
    Ok(ReebPolytope {
        dim,
        vertices,
        interior_start,
    })
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence threshold on the constrained (slice) gradient norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Optional slice start `(ξ_2 .. ξ_n)` in the Gorenstein frame; defaults
    /// to the vertex centroid of `N`.
    pub start: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 200,
            start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// Critical Reeb vector in the Gorenstein frame; first coordinate is
    /// exactly `n`.
    pub xi_star: ReebVector,
    /// The same point mapped back to the input-frame coordinates.
    pub xi_star_input: ReebVector,
    pub vol_report: VolumeReport,
    pub grad_norm: f64,
    pub newton_iters: usize,
    /// Smallest eigenvalue of the slice-restricted Hessian at the solution.
    pub hessian_min_eig: f64,
    /// Smallest restricted eigenvalue seen at any accepted iterate.
    pub min_eig_along_path: f64,
    /// Volume at each accepted iterate (non-increasing).
    pub accepted_volumes: Vec<f64>,
    /// True when the critical point was certified by an exactly vanishing
    /// rational gradient.
    pub exact: bool,
    /// Unimodular map from input frame to Gorenstein frame.
    pub basis: Vec<Vec<Int>>,
}

struct SliceProblem {
    dec: SimplicialDecomposition,
    n: usize,
}

impl SliceProblem {
    fn full(&self, z: &[f64]) -> Vec<f64> {
        let mut xi = Vec::with_capacity(self.n);
        xi.push(self.n as f64);
        xi.extend_from_slice(z);
        xi
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        volume_delta::<f64>(&self.dec, &self.full(z))
    }

    fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(volume_gradient::<f64>(&self.dec, &self.full(z))?[1..].to_vec())
    }

    fn hess(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let h = volume_hessian::<f64>(&self.dec, &self.full(z))?;
        let m = self.n - 1;
        Ok(DMatrix::from_fn(m, m, |i, j| h[i + 1][j + 1]))
    }

    /// Exact interiority + exactly-zero slice gradient at a rational point.
    fn certify(&self, cone: &MomentCone, z: &[Rat]) -> Option<Vec<Rat>> {
        let mut xi = Vec::with_capacity(self.n);
        xi.push(Rat::from_integer(Int::from(self.n as u64)));
        xi.extend_from_slice(z);
        for u in cone.rays() {
            if !la::dot_rat(&xi, u).is_positive() {
                return None;
            }
        }
        let grad = volume_gradient::<Rat>(&self.dec, &xi).ok()?;
        if grad[1..].iter().all(|g| g.is_zero()) {
            Some(xi)
        } else {
            None
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const ARMIJO_C: f64 = 1e-4;
const MAX_CONDITION: f64 = 1e12;
const CERTIFY_DENOMS: [u64; 12] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 48, 1_000, 1_000_000];

/// Locate the unique volume-critical Reeb vector on the normalized slice.
pub fn minimize_volume(cone: &MomentCone, opts: &SolveOptions) -> Result<CriticalPoint> {
    let basis = cone
        .gorenstein_basis()
        .ok_or_else(|| {
            Error::NotGorenstein("volume minimization needs a height-one basis".into())
        })?
        .clone();
    let identity = la::identity(cone.dim());
    let gcone = if basis.m == identity {
        cone.clone()
    } else {
        cone.transformed(&basis.m)?
    };
    let n = gcone.dim();
    let problem = SliceProblem {
        dec: decompose(&gcone)?,
        n,
    };
    let poly = reeb_polytope(&gcone)?;
    let centroid_slice: Vec<Rat> = poly.interior_start[1..].to_vec();

    let mut newton_iters = 0usize;
    let mut min_eig_along_path = f64::INFINITY;
    let mut accepted_volumes: Vec<f64> = Vec::new();

    // A rational start with an exactly vanishing gradient short-circuits the
    // descent (symmetric cones resolve at the centroid).
    if opts.start.is_none() {
        if let Some(xi) = problem.certify(&gcone, &centroid_slice) {
            return finish_exact(
                &gcone,
                &basis.m,
                &problem,
                xi,
                0,
                f64::INFINITY,
                Vec::new(),
            );
        }
    }

    let mut z: Vec<f64> = match &opts.start {
        Some(s) => {
            if s.len() != n - 1 {
                return Err(Error::Validation(format!(
                    "start has {} slice coordinates, expected {}",
                    s.len(),
                    n - 1
                )));
            }
            s.clone()
        }
        None => centroid_slice.iter().map(la::rat_to_f64).collect(),
    };
    let mut f = problem
        .value(&z)
        .map_err(|_| Error::Validation("starting point is not interior to N".into()))?;
    accepted_volumes.push(f);

    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    while newton_iters < opts.max_iter {
        let g = problem.grad(&z)?;
        grad_norm = norm(&g);
        if grad_norm < opts.tol {
            converged = true;
            break;
        }
        let h = problem.hess(&z)?;
        let eig = h.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        let max_eig = eig.eigenvalues.max();
        min_eig_along_path = min_eig_along_path.min(min_eig);
        let gv = DVector::from_column_slice(&g);
        let newton_dir = if min_eig > 0.0 && max_eig / min_eig < MAX_CONDITION {
            h.cholesky().map(|ch| -(ch.solve(&gv)))
        } else {
            None
        };
        // Ill-conditioned Hessians fall back to plain gradient descent.
        let dir = newton_dir.unwrap_or_else(|| -gv.clone());
        let slope: f64 = g.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            return Err(Error::Internal("descent direction lost".into()));
        }
        let mut alpha = 1.0f64;
        let mut accepted = false;
        while alpha > 1e-18 {
            let trial: Vec<f64> = z
                .iter()
                .zip(dir.iter())
                .map(|(zi, di)| zi + alpha * di)
                .collect();
            match problem.value(&trial) {
                Ok(ft) if ft <= f + ARMIJO_C * alpha * slope => {
                    z = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                _ => alpha *= 0.5,
            }
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iters: newton_iters,
                last: problem.full(&z),
                grad_norm,
            });
        }
        accepted_volumes.push(f);
        newton_iters += 1;
    }
    if !converged {
        return Err(Error::NonConvergence {
            iters: newton_iters,
            last: problem.full(&z),
            grad_norm,
        });
    }

    // Try to upgrade the floating minimizer to an exact rational certificate.
    for max_den in CERTIFY_DENOMS {
        let mut cand: Vec<Rat> = Vec::with_capacity(z.len());
        let mut plausible = true;
        for &zi in &z {
            match la::rational_approx(zi, max_den) {
                Some(r) if (la::rat_to_f64(&r) - zi).abs() <= 1e-6 => cand.push(r),
                _ => {
                    plausible = false;
                    break;
                }
            }
        }
        if !plausible {
            continue;
        }
        if let Some(xi) = problem.certify(&gcone, &cand) {
            return finish_exact(
                &gcone,
                &basis.m,
                &problem,
                xi,
                newton_iters,
                min_eig_along_path,
                accepted_volumes,
            );
        }
    }

    let xi_full = problem.full(&z);
    let xi = ReebVector::from_f64(xi_full.clone());
    let report = volume_report(&problem.dec, &xi)?;
    let h = problem.hess(&z)?;
    let min_eig = h.symmetric_eigen().eigenvalues.min();
    let m_inv = la::inverse_unimodular(&basis.m)?;
    let xi_input: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m_inv[i][j].to_f64().unwrap() * xi_full[j])
                .sum()
        })
        .collect();
    Ok(CriticalPoint {
        xi_star: xi,
        xi_star_input: ReebVector::from_f64(xi_input),
        vol_report: report,
        grad_norm,
        newton_iters,
        hessian_min_eig: min_eig,
        min_eig_along_path: min_eig_along_path.min(min_eig),
        accepted_volumes,
        exact: false,
        basis: basis.m.clone(),
    })
}

fn finish_exact(
    gcone: &MomentCone,
    m: &[Vec<Int>],
    problem: &SliceProblem,
    xi: Vec<Rat>,
    newton_iters: usize,
    min_eig_along_path: f64,
    mut accepted_volumes: Vec<f64>,
) -> Result<CriticalPoint> {
    let reeb = ReebVector::from_rats(xi.clone());
    let report = volume_report(&problem.dec, &reeb)?;
    let z: Vec<f64> = reeb.xs()[1..].to_vec();
    let h = problem.hess(&z)?;
    let min_eig = h.symmetric_eigen().eigenvalues.min();
    let m_inv = la::inverse_unimodular(m)?;
    let xi_input: Vec<Rat> = (0..gcone.dim())
        .map(|i| {
            (0..gcone.dim())
                .map(|j| Rat::from_integer(m_inv[i][j].clone()) * &xi[j])
                .sum()
        })
        .collect();
    accepted_volumes.push(report.vol_delta);
    Ok(CriticalPoint {
        xi_star: reeb,
        xi_star_input: ReebVector::from_rats(xi_input),
        vol_report: report,
        grad_norm: 0.0,
        newton_iters,
        hessian_min_eig: min_eig,
        min_eig_along_path: min_eig_along_path.min(min_eig),
        accepted_volumes,
        exact: true,
        basis: m.to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Futaki-type obstruction
// ---------------------------------------------------------------------------

/// Constrained volume gradient at a candidate Reeb vector. A nonzero value
/// obstructs an Einstein metric with that polarization; for quasi-regular
/// candidates it is a positive multiple of the Futaki invariant of the
/// quotient. Reported up to positive scale.
#[derive(Debug, Clone)]
pub struct FutakiReport {
    pub candidate: ReebVector,
    /// Slice components of the gradient in the Gorenstein frame.
    pub obstruction_vector: Vec<f64>,
    pub obstruction_exact: Option<Vec<Rat>>,
    pub norm: f64,
    /// Volume at the candidate; sets the scale of the obstruction.
    pub vol_scale: f64,
    pub obstructed: bool,
}

pub fn futaki_test(cone: &MomentCone, candidate: &ReebVector) -> Result<FutakiReport> {
    let basis = cone
        .gorenstein_basis()
        .ok_or_else(|| Error::NotGorenstein("Futaki test needs a height-one basis".into()))?;
    let gcone = if basis.m == la::identity(cone.dim()) {
        cone.clone()
    } else {
        cone.transformed(&basis.m)?
    };
    let n = gcone.dim();
    let dec = decompose(&gcone)?;
    if let Some(exact) = candidate.exact() {
        let xi: Vec<Rat> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rat::from_integer(basis.m[i][j].clone()) * &exact[j])
                    .sum()
            })
            .collect();
        if xi[0] != Rat::from_integer(Int::from(n as u64)) {
            return Err(Error::Validation(format!(
                "candidate is not on the normalized slice (height {} != {})",
                xi[0], n
            )));
        }
        for u in gcone.rays() {
            if !la::dot_rat(&xi, u).is_positive() {
                return Err(Error::ReebOutsideCone);
            }
        }
        let vol = volume_delta::<Rat>(&dec, &xi)?;
        let grad = volume_gradient::<Rat>(&dec, &xi)?;
        let slice: Vec<Rat> = grad[1..].to_vec();
        let obstruction: Vec<f64> = slice.iter().map(la::rat_to_f64).collect();
        let obstructed = slice.iter().any(|g| !g.is_zero());
        Ok(FutakiReport {
            candidate: candidate.clone(),
            norm: norm(&obstruction),
            obstruction_vector: obstruction,
            obstruction_exact: Some(slice),
            vol_scale: la::rat_to_f64(&vol),
            obstructed,
        })
    } else {
        let m_f: Vec<Vec<f64>> = basis
            .m
            .iter()
            .map(|row| row.iter().map(|x| x.to_f64().unwrap()).collect())
            .collect();
        let xi: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m_f[i][j] * candidate.xs()[j]).sum())
            .collect();
        if (xi[0] - n as f64).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "candidate is not on the normalized slice (height {} != {})",
                xi[0], n
            )));
        }
        let vol = volume_delta::<f64>(&dec, &xi)?;
        let grad = volume_gradient::<f64>(&dec, &xi)?;
        let obstruction = grad[1..].to_vec();
        let nrm = norm(&obstruction);
        Ok(FutakiReport {
            candidate: candidate.clone(),
            obstruction_vector: obstruction,
            obstruction_exact: None,
            norm: nrm,
            vol_scale: vol,
            obstructed: nrm > 1e-9 * vol,
        })
    }
}

// ---------------------------------------------------------------------------
// Quotient fan / regularity
// ---------------------------------------------------------------------------

/// One maximal cone of the quotient fan (one per ray of `C*`), with
/// unimodularity data.
#[derive(Debug, Clone)]
pub struct QuotientCone {
    /// Index of the `C*` ray inducing this cone.
    pub ray_index: usize,
    /// Facets of `C*` through that ray; their normals span the cone.
    pub normal_indices: Vec<usize>,
    pub generators: Vec<Vec<Int>>,
    /// `|det|` when the cone is simplicial.
    pub index: Option<Int>,
    pub unimodular: bool,
}

#[derive(Debug, Clone)]
pub struct QuotientFan {
    pub direction: Vec<Int>,
    pub projected_rays: Vec<Vec<Int>>,
    pub cones: Vec<QuotientCone>,
    pub all_simplicial: bool,
    pub smooth: bool,
}

/// Project the fan rays of `C` to `Z^(n-1)` along the primitive direction of
/// a rational Reeb vector and test the quotient for smoothness.
pub fn quotient_fan(cone: &MomentCone, xi: &ReebVector) -> Result<QuotientFan> {
    let exact = xi.exact().ok_or(Error::RequiresRationalReeb)?;
    for u in cone.rays() {
        if !la::dot_rat(exact, u).is_positive() {
            return Err(Error::ReebOutsideCone);
        }
    }
    // primitive integer direction of xi
    let mut lcm = Int::one();
    for c in exact {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<Int> = exact
        .iter()
        .map(|c| (c * Rat::from_integer(lcm.clone())).to_integer())
        .collect();
    let direction =
        la::primitivize(&ints).ok_or_else(|| Error::Validation("zero Reeb vector".into()))?;
    let reduction = la::reduction_to_e1(&direction)?;
    let project = |v: &[Int]| -> Vec<Int> { la::mat_vec(&reduction, v)[1..].to_vec() };
    let projected_rays: Vec<Vec<Int>> = cone.normals().iter().map(|v| project(v)).collect();
    let mut cones = Vec::new();
    let mut all_simplicial = true;
    let mut smooth = true;
    for (r, u) in cone.rays().iter().enumerate() {
        let normal_indices: Vec<usize> = cone
            .normals()
            .iter()
            .enumerate()
            .filter(|(_, v)| la::dot(u, v).is_zero())
            .map(|(a, _)| a)
            .collect();
        let generators: Vec<Vec<Int>> = normal_indices
            .iter()
            .map(|&a| projected_rays[a].clone())
            .collect();
        let simplicial = generators.len() == cone.dim() - 1;
        let index = if simplicial {
            Some(la::det(&generators).abs())
        } else {
            None
        };
        let unimodular = index.as_ref().map(|d| d.is_one()).unwrap_or(false);
        all_simplicial &= simplicial;
        smooth &= unimodular;
        cones.push(QuotientCone {
            ray_index: r,
            normal_indices,
            generators,
            index,
            unimodular,
        });
    }
    Ok(QuotientFan {
        direction,
        projected_rays,
        cones,
        all_simplicial,
        smooth,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    QuasiRegular,
    Irregular,
    Undetermined,
}

impl std::fmt::Display for Regularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regularity::Regular => "regular",
            Regularity::QuasiRegular => "quasi-regular",
            Regularity::Irregular => "irregular",
            Regularity::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FamilyTag {
    Ypq { p: u64, q: u64 },
}

#[derive(Debug, Clone)]
pub struct RationalApprox {
    pub coordinate: usize,
    pub value: Rat,
    pub abs_error: f64,
    /// Smallest pairing of the coordinate-wise rational approximation of the
    /// Reeb vector with the rays of `C*`.
    pub min_ray_pairing: Rat,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub verdict: Regularity,
    pub detail: String,
    pub quotient: Option<QuotientFan>,
    /// Best rational approximations of `ξ*/n` per coordinate, reported when
    /// the verdict is undetermined: floating point never certifies
    /// irrationality.
    pub approximations: Vec<RationalApprox>,
}

pub fn classify_regularity(
    cone: &MomentCone,
    critical: &CriticalPoint,
    context: Option<FamilyTag>,
) -> RegularityReport {
    if let Some(FamilyTag::Ypq { p, q }) = context {
        let disc = Int::from(4 * p * p) - Int::from(3 * q * q);
        let root = disc.sqrt();
        let square = &root * &root == disc;
        let verdict = if square {
            Regularity::QuasiRegular
        } else {
            Regularity::Irregular
        };
        return RegularityReport {
            verdict,
            detail: format!(
                "4p^2-3q^2 = {disc} is{} a perfect square",
                if square { "" } else { " not" }
            ),
            quotient: None,
            approximations: Vec::new(),
        };
    }
    if critical.exact {
        match quotient_fan(cone, &critical.xi_star_input) {
            Ok(qf) => {
                let verdict = if qf.smooth {
                    Regularity::Regular
                } else {
                    Regularity::QuasiRegular
                };
                let detail = if qf.smooth {
                    "rational Reeb vector with unimodular quotient fan".to_string()
                } else {
                    "rational Reeb vector with orbifold quotient".to_string()
                };
                return RegularityReport {
                    verdict,
                    detail,
                    quotient: Some(qf),
                    approximations: Vec::new(),
                };
            }
            Err(e) => {
                return RegularityReport {
                    verdict: Regularity::Undetermined,
                    detail: format!("quotient fan failed: {e}"),
                    quotient: None,
                    approximations: Vec::new(),
                }
            }
        }
    }
    // Floating answer: report diagnostics only.
    let n = cone.dim() as f64;
    let scaled: Vec<Rat> = critical
        .xi_star_input
        .xs()
        .iter()
        .map(|&xj| la::rational_approx(xj, 1_000_000).unwrap_or_else(Rat::zero))
        .collect();
    let mut approximations = Vec::new();
    for (i, &x) in critical.xi_star_input.xs().iter().enumerate() {
        let target = x / n;
        if let Some(r) = la::rational_approx(target, 1000) {
            let err = (la::rat_to_f64(&r) - target).abs();
            let mut approx_xi = scaled.clone();
            approx_xi[i] = &r * Rat::from_integer(Int::from(cone.dim() as u64));
            let min_pairing = cone
                .ray_pairings_exact(&approx_xi)
                .into_iter()
                .min()
                .unwrap_or_else(Rat::zero);
            approximations.push(RationalApprox {
                coordinate: i,
                value: r,
                abs_error: err,
                min_ray_pairing: min_pairing,
            });
        }
    }
    RegularityReport {
        verdict: Regularity::Undetermined,
        detail: "floating-point minimizer; no exact rational certificate found".to_string(),
        quotient: None,
        approximations,
    }
}
