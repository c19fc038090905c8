//! Closed-form volume of the Reeb polytope `Δ(ξ) = C* ∩ {<y,ξ> <= 1/2}`.
//!
//! A fan triangulation of `C*` into simplicial pieces turns the volume into
//! an explicit rational function of `ξ`:
//!
//! ```text
//! vol[Δ(ξ)] = Σ_pieces |det U| / (2^n n! Π_i <ξ, u_i>)
//! ```
//!
//! with `u_i` the primitive ray generators of each piece. One formula serves
//! evaluation, analytic first/second derivatives, and the fixed-point
//! (localization) cross-check, on both the floating and the exact rational
//! path.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cone::MomentCone;
use crate::error::{Error, Result};
use crate::intlin as la;
use crate::scalar::Scalar;
use crate::{Int, Rat};

/// A Reeb candidate: floating components, plus the exact rational value when
/// one is known. The exact half, when present, is authoritative.
#[derive(Debug, Clone)]
pub struct ReebVector {
    xs: Vec<f64>,
    exact: Option<Vec<Rat>>,
}

impl ReebVector {
    pub fn from_f64(xs: Vec<f64>) -> Self {
        ReebVector { xs, exact: None }
    }

    pub fn from_rats(rs: Vec<Rat>) -> Self {
        let xs = rs.iter().map(la::rat_to_f64).collect();
        ReebVector {
            xs,
            exact: Some(rs),
        }
    }

    pub fn dim(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn exact(&self) -> Option<&[Rat]> {
        self.exact.as_deref()
    }

    /// Strict interiority with respect to the fan cone: positive pairing with
    /// every ray generator of `C*` (exact when available).
    pub fn check_interior(&self, cone: &MomentCone) -> Result<()> {
        if let Some(ex) = &self.exact {
            for u in cone.rays() {
                if !la::dot_rat(ex, u).is_positive() {
                    return Err(Error::ReebOutsideCone);
                }
            }
        } else {
            for u in cone.rays() {
                let p: f64 = self
                    .xs
                    .iter()
                    .zip(u)
                    .map(|(x, c)| x * c.to_f64().unwrap_or(f64::NAN))
                    .sum();
                if !(p > 0.0) {
                    return Err(Error::ReebOutsideCone);
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Simplicial decomposition
// ---------------------------------------------------------------------------

/// One simplicial subcone of `C*`: n primitive generators, the absolute
/// determinant, and the orbifold chart at the corresponding fixed point
/// (weight denominators and the order of the local structure group).
#[derive(Debug, Clone)]
pub struct Piece {
    pub rays: Vec<Vec<Int>>,
    pub det: Int,
    /// `d_i`: minimal positive integers making the dual-basis vectors of this
    /// piece integral. The chart weight along direction `i` is `u_i / d_i`.
    pub chart_denoms: Vec<Int>,
    /// `d_F = Π d_i / |det|`, the order of the chart's finite structure group.
    pub chart_order: Int,
}

impl Piece {
    fn from_rays(rays: Vec<Vec<Int>>) -> Result<Piece> {
        let det = la::det(&rays).abs();
        if det.is_zero() {
            return Err(Error::Internal("degenerate simplicial piece".into()));
        }
        let inv = la::inverse_rational(&rays)
            .ok_or_else(|| Error::Internal("piece generators not invertible".into()))?;
        let n = rays.len();
        let mut denoms = Vec::with_capacity(n);
        for i in 0..n {
            let mut d = Int::one();
            for row in &inv {
                d = d.lcm(row[i].denom());
            }
            denoms.push(d);
        }
        let prod: Int = denoms.iter().product();
        let (order, rem) = prod.div_rem(&det);
        if !rem.is_zero() {
            return Err(Error::Internal("chart order is not integral".into()));
        }
        Ok(Piece {
            rays,
            det,
            chart_denoms: denoms,
            chart_order: order,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimplicialDecomposition {
    pub dim: usize,
    pub pieces: Vec<Piece>,
    /// Rays introduced by refinement, not rays of `C*` itself.
    pub added_rays: Vec<Vec<Int>>,
}

/// Fan triangulation of `C*` using only its rays, anchored (pulled) at the
/// lexicographically smallest ray; faces are triangulated recursively the
/// same way. Deterministic piece order.
pub fn decompose(cone: &MomentCone) -> Result<SimplicialDecomposition> {
    decompose_anchored(cone, 0)
}

/// Same triangulation pulled from a chosen top-level ray (index into
/// `cone.rays()`); used to check decomposition independence.
pub fn decompose_anchored(cone: &MomentCone, anchor: usize) -> Result<SimplicialDecomposition> {
    let nrays = cone.rays().len();
    if anchor >= nrays {
        return Err(Error::Validation(format!(
            "anchor ray index {anchor} out of range ({nrays} rays)"
        )));
    }
    let all: Vec<usize> = (0..nrays).collect();
    let simplices = triangulate_face(cone, &all, cone.dim(), Some(anchor));
    let pieces = simplices
        .into_iter()
        .map(|idx| {
            Piece::from_rays(idx.iter().map(|&i| cone.rays()[i].clone()).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimplicialDecomposition {
        dim: cone.dim(),
        pieces,
        added_rays: Vec::new(),
    })
}

/// Pulling triangulation of a face of `C*` given by its ray indices and rank.
/// The anchor defaults to the smallest index (rays are lex-sorted).
fn triangulate_face(
    cone: &MomentCone,
    face: &[usize],
    rank: usize,
    anchor: Option<usize>,
) -> Vec<Vec<usize>> {
    if face.len() == rank {
        return vec![face.to_vec()];
    }
    let anchor = anchor.unwrap_or(face[0]);
    debug_assert!(face.contains(&anchor));
    let mut out = Vec::new();
    for sub in face_facets(cone, face, rank) {
        if sub.contains(&anchor) {
            continue;
        }
        for mut simplex in triangulate_face(cone, &sub, rank - 1, None) {
            simplex.insert(0, anchor);
            out.push(simplex);
        }
    }
    out
}

/// Facets of a face: intersect with each cone facet, keep rank-(k-1) results,
/// dedup by ray set.
fn face_facets(cone: &MomentCone, face: &[usize], rank: usize) -> Vec<Vec<usize>> {
    let mut seen: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
    for v in cone.normals() {
        let sub: Vec<usize> = face
            .iter()
            .copied()
            .filter(|&r| la::dot(&cone.rays()[r], v).is_zero())
            .collect();
        if sub.is_empty() || sub.len() == face.len() {
            continue;
        }
        let rows: Vec<Vec<Int>> = sub.iter().map(|&r| cone.rays()[r].clone()).collect();
        if la::rank(&rows) == rank - 1 {
            seen.insert(sub);
        }
    }
    seen.into_iter().collect()
}

/// Stellar refinement until every piece is unimodular; the splitting rays are
/// lattice points of the fundamental parallelepipeds, tracked in
/// `added_rays`.
pub fn unimodular_refinement(dec: &SimplicialDecomposition) -> Result<SimplicialDecomposition> {
    let mut pieces = Vec::new();
    let mut added: Vec<Vec<Int>> = Vec::new();
    for piece in &dec.pieces {
        refine_piece(piece, &mut pieces, &mut added)?;
    }
    added.sort_by(|a, b| la::lex_cmp(a, b));
    added.dedup();
    Ok(SimplicialDecomposition {
        dim: dec.dim,
        pieces,
        added_rays: added,
    })
}

fn refine_piece(piece: &Piece, out: &mut Vec<Piece>, added: &mut Vec<Vec<Int>>) -> Result<()> {
    if piece.det.is_one() {
        out.push(piece.clone());
        return Ok(());
    }
    let pts = parallelepiped_points(&piece.rays)?;
    let w = pts
        .into_iter()
        .find(|p| !la::is_zero_vec(p))
        .ok_or_else(|| Error::Internal("non-unimodular piece with empty parallelepiped".into()))?;
    let w = la::primitivize(&w).expect("nonzero");
    let inv = la::inverse_rational(&piece.rays).expect("piece invertible");
    // coordinates of w in the piece basis
    let coords: Vec<Rat> = (0..piece.rays.len())
        .map(|i| {
            (0..piece.rays.len())
                .map(|j| Rat::from_integer(w[j].clone()) * &inv[j][i])
                .sum()
        })
        .collect();
    added.push(w.clone());
    for (i, t) in coords.iter().enumerate() {
        if !t.is_positive() {
            continue;
        }
        let mut rays = piece.rays.clone();
        rays[i] = w.clone();
        let sub = Piece::from_rays(rays)?;
        refine_piece(&sub, out, added)?;
    }
    Ok(())
}

/// Lattice points of the half-open fundamental parallelepiped
/// `{Σ t_i u_i : 0 <= t_i < 1}`, sorted lexicographically (origin included).
pub(crate) fn parallelepiped_points(rays: &[Vec<Int>]) -> Result<Vec<Vec<Int>>> {
    let n = rays[0].len();
    let inv = la::inverse_rational(rays)
        .ok_or_else(|| Error::Internal("parallelepiped of a degenerate piece".into()))?;
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for j in 0..n {
        for u in rays {
            let c = u[j]
                .to_i64()
                .ok_or_else(|| Error::CapacityExceeded("ray coordinate exceeds i64".into()))?;
            if c < 0 {
                lo[j] += c;
            } else {
                hi[j] += c;
            }
        }
    }
    let mut out = Vec::new();
    let mut cursor = lo.clone();
    'outer: loop {
        let m: Vec<Int> = cursor.iter().map(|&c| Int::from(c)).collect();
        let mut inside = true;
        for i in 0..n {
            let t: Rat = (0..n)
                .map(|j| Rat::from_integer(m[j].clone()) * &inv[j][i])
                .sum();
            if t.is_negative() || t >= Rat::one() {
                inside = false;
                break;
            }
        }
        if inside {
            out.push(m);
        }
        for j in (0..n).rev() {
            cursor[j] += 1;
            if cursor[j] <= hi[j] {
                continue 'outer;
            }
            cursor[j] = lo[j];
            if j == 0 {
                break 'outer;
            }
        }
    }
    out.sort_by(|a, b| la::lex_cmp(a, b));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn pairing<S: Scalar>(xi: &[S], u: &[Int]) -> S {
    xi.iter()
        .zip(u)
        .fold(S::zero(), |acc, (x, c)| acc + x.clone() * S::from_int(c))
}

fn checked_pairings<S: Scalar>(xi: &[S], piece: &Piece) -> Result<Vec<S>> {
    let eps = S::boundary_epsilon();
    piece
        .rays
        .iter()
        .map(|u| {
            let l = pairing(xi, u);
            if l <= S::zero() {
                return Err(Error::ReebOutsideCone);
            }
            if let Some(e) = &eps {
                if l < *e {
                    return Err(Error::ReebNearBoundary(e.approx()));
                }
            }
            Ok(l)
        })
        .collect()
}

/// `2^n n!`, the exact conversion factor between `vol[Δ]` and the
/// round-sphere volume ratio.
pub fn sphere_ratio_factor(n: usize) -> Int {
    let fact: Int = (1..=n as u64).map(Int::from).product();
    (Int::one() << n) * fact
}

/// `2n (2π)^n`: link volume per unit `vol[Δ]`.
pub fn link_volume_factor(n: usize) -> f64 {
    2.0 * n as f64 * (2.0 * std::f64::consts::PI).powi(n as i32)
}

/// Volume of the unit round sphere `S^(2n-1)`: `2 π^n / (n-1)!`.
pub fn sphere_volume(n: usize) -> f64 {
    let fact: f64 = (1..n as u32).map(f64::from).product();
    2.0 * std::f64::consts::PI.powi(n as i32) / fact
}

/// Euclidean volume of `Δ(ξ)` as the closed-form piece sum.
pub fn volume_delta<S: Scalar>(dec: &SimplicialDecomposition, xi: &[S]) -> Result<S> {
    let c = S::from_int(&sphere_ratio_factor(dec.dim));
    let mut total = S::zero();
    for piece in &dec.pieces {
        let ls = checked_pairings(xi, piece)?;
        let prod = ls.into_iter().fold(S::one(), |a, l| a * l);
        total = total + S::from_int(&piece.det) / (c.clone() * prod);
    }
    Ok(total)
}

/// Analytic gradient of `volume_delta` in the ambient `ξ` coordinates.
pub fn volume_gradient<S: Scalar>(dec: &SimplicialDecomposition, xi: &[S]) -> Result<Vec<S>> {
    let n = dec.dim;
    let c = S::from_int(&sphere_ratio_factor(n));
    let mut grad = vec![S::zero(); n];
    for piece in &dec.pieces {
        let ls = checked_pairings(xi, piece)?;
        let prod = ls.iter().cloned().fold(S::one(), |a, l| a * l);
        let t = S::from_int(&piece.det) / (c.clone() * prod);
        for j in 0..n {
            let s_j = piece
                .rays
                .iter()
                .zip(&ls)
                .fold(S::zero(), |acc, (u, l)| {
                    acc + S::from_int(&u[j]) / l.clone()
                });
            grad[j] = grad[j].clone() - t.clone() * s_j;
        }
    }
    Ok(grad)
}

/// Analytic Hessian of `volume_delta` (symmetric n x n).
pub fn volume_hessian<S: Scalar>(dec: &SimplicialDecomposition, xi: &[S]) -> Result<Vec<Vec<S>>> {
    let n = dec.dim;
    let c = S::from_int(&sphere_ratio_factor(n));
    let mut hess = vec![vec![S::zero(); n]; n];
    for piece in &dec.pieces {
        let ls = checked_pairings(xi, piece)?;
        let prod = ls.iter().cloned().fold(S::one(), |a, l| a * l);
        let t = S::from_int(&piece.det) / (c.clone() * prod);
        let s: Vec<S> = (0..n)
            .map(|j| {
                piece
                    .rays
                    .iter()
                    .zip(&ls)
                    .fold(S::zero(), |acc, (u, l)| acc + S::from_int(&u[j]) / l.clone())
            })
            .collect();
        for j in 0..n {
            for k in j..n {
                let mut q = S::zero();
                for (u, l) in piece.rays.iter().zip(&ls) {
                    q = q + S::from_int(&u[j]) * S::from_int(&u[k]) / (l.clone() * l.clone());
                }
                let add = t.clone() * (s[j].clone() * s[k].clone() + q);
                hess[j][k] = hess[j][k].clone() + add.clone();
                if j != k {
                    hess[k][j] = hess[k][j].clone() + add;
                }
            }
        }
    }
    Ok(hess)
}

/// Fixed-point sum over the pieces in orbifold-chart form:
/// `Σ (1/d_F) Π_i 1 / <ξ, u_i/d_i>`. On a unimodular refinement every
/// `d_F = 1` and the weights are the primitive generators themselves. Equals
/// `2^n n! vol[Δ(ξ)]` identically, term by term.
pub fn localization_sum<S: Scalar>(dec: &SimplicialDecomposition, xi: &[S]) -> Result<S> {
    let mut total = S::zero();
    for piece in &dec.pieces {
        let ls = checked_pairings(xi, piece)?;
        let mut prod = S::one();
        for (l, d) in ls.iter().zip(&piece.chart_denoms) {
            // weight pairing <xi, u_i/d_i> = l_i / d_i
            prod = prod * (S::from_int(d) / l.clone());
        }
        total = total + prod / S::from_int(&piece.chart_order);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Volume data at a fixed Reeb vector. Exact fields are populated when the
/// Reeb vector is rational; floating mirrors are always present.
#[derive(Debug, Clone)]
pub struct VolumeReport {
    pub dim: usize,
    pub vol_delta: f64,
    pub vol_delta_exact: Option<Rat>,
    pub vol_link: f64,
    pub sphere_ratio: f64,
    pub sphere_ratio_exact: Option<Rat>,
    pub gradient: Vec<f64>,
    pub gradient_exact: Option<Vec<Rat>>,
    pub hessian: Vec<Vec<f64>>,
}

pub fn volume_report(dec: &SimplicialDecomposition, xi: &ReebVector) -> Result<VolumeReport> {
    let n = dec.dim;
    let factor = Rat::from_integer(sphere_ratio_factor(n));
    if let Some(ex) = xi.exact() {
        let vol = volume_delta::<Rat>(dec, ex)?;
        let grad = volume_gradient::<Rat>(dec, ex)?;
        let hess = volume_hessian::<Rat>(dec, ex)?;
        let ratio = &vol * &factor;
        Ok(VolumeReport {
            dim: n,
            vol_delta: la::rat_to_f64(&vol),
            vol_link: link_volume_factor(n) * la::rat_to_f64(&vol),
            sphere_ratio: la::rat_to_f64(&ratio),
            vol_delta_exact: Some(vol),
            sphere_ratio_exact: Some(ratio),
            gradient: grad.iter().map(la::rat_to_f64).collect(),
            gradient_exact: Some(grad),
            hessian: hess
                .iter()
                .map(|row| row.iter().map(la::rat_to_f64).collect())
                .collect(),
        })
    } else {
        let xs = xi.xs();
        let vol = volume_delta::<f64>(dec, xs)?;
        Ok(VolumeReport {
            dim: n,
            vol_delta: vol,
            vol_delta_exact: None,
            vol_link: link_volume_factor(n) * vol,
            sphere_ratio: sphere_ratio_factor(n).to_f64().unwrap() * vol,
            sphere_ratio_exact: None,
            gradient: volume_gradient::<f64>(dec, xs)?,
            gradient_exact: None,
            hessian: volume_hessian::<f64>(dec, xs)?,
        })
    }
}
