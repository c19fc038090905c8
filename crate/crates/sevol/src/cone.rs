//! Exact polyhedral cone algebra for the moment cone `C*` of an affine toric
//! variety: facet/ray duality by the double description method, the goodness
//! (sublattice saturation) test, Gorenstein normalization to height-one
//! normals, kernel charge matrices, and lattice equivalence of cones.
//!
//! All arithmetic in this module is over arbitrary-precision integers and
//! rationals; there is no floating point here.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::intlin as la;
use crate::{Int, Rat};

/// Facet caps: subset enumeration for faces and the equivalence search are
/// exponential/factorial in the facet count, which is fine at desk scale.
const MAX_FACETS_FACE_ENUM: usize = 16;
const MAX_FACETS_EQUIV: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeFlags {
    pub strictly_convex: bool,
    pub good: bool,
    pub gorenstein: bool,
}

/// Height-one change of basis: `m * v_a = (1, w_a)` for every facet normal,
/// with `m` unimodular and first row `gamma`.
#[derive(Debug, Clone)]
pub struct GorensteinBasis {
    pub gamma: Vec<Int>,
    pub m: Vec<Vec<Int>>,
    pub w: Vec<Vec<Int>>,
}

/// A strictly convex rational polyhedral cone `C* = {y : <y, v_a> >= 0}`,
/// stored with both descriptions: primitive inward facet normals `v_a`
/// (which generate the dual/fan cone `C`) and primitive ray generators
/// `u_alpha` (sorted lexicographically).
#[derive(Debug, Clone)]
pub struct MomentCone {
    dim: usize,
    normals: Vec<Vec<Int>>,
    rays: Vec<Vec<Int>>,
    flags: ConeFlags,
    goodness_witness: Option<Vec<usize>>,
    gorenstein_basis: Option<GorensteinBasis>,
}

impl MomentCone {
    /// Build and fully validate a cone from inward facet normals.
    pub fn from_normals(dim: usize, raw_normals: Vec<Vec<Int>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        if raw_normals.len() < dim {
            return Err(Error::NotStrictlyConvex(format!(
                "{} normals cannot span R^{}",
                raw_normals.len(),
                dim
            )));
        }
        let mut normals = Vec::with_capacity(raw_normals.len());
        for (i, v) in raw_normals.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Validation(format!(
                    "normal {} has {} components, expected {}",
                    i + 1,
                    v.len(),
                    dim
                )));
            }
            let p = la::primitivize(v).ok_or_else(|| {
                Error::Validation(format!("normal {} is the zero vector", i + 1))
            })?;
            normals.push(p);
        }
        for i in 0..normals.len() {
            for j in (i + 1)..normals.len() {
                if normals[i] == normals[j] {
                    return Err(Error::Validation(format!(
                        "normals {} and {} coincide after primitivization",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if la::rank(&normals) < dim {
            return Err(Error::NotStrictlyConvex(
                "normals do not span; C* contains a line".into(),
            ));
        }
        let rays = dual_rays(&normals)?;
        if la::rank(&rays) < dim {
            return Err(Error::NotStrictlyConvex(
                "moment cone has empty interior (fan cone contains a line)".into(),
            ));
        }
        // Every listed normal must cut out a genuine facet.
        for (a, v) in normals.iter().enumerate() {
            let on_facet: Vec<Vec<Int>> = rays
                .iter()
                .filter(|u| la::dot(u, v).is_zero())
                .cloned()
                .collect();
            if la::rank(&on_facet) != dim - 1 {
                return Err(Error::Validation(format!(
                    "normal {} is redundant (does not support a facet)",
                    a + 1
                )));
            }
        }
        let mut cone = MomentCone {
            dim,
            normals,
            rays,
            flags: ConeFlags {
                strictly_convex: true,
                good: false,
                gorenstein: false,
            },
            goodness_witness: None,
            gorenstein_basis: None,
        };
        let (good, witness) = goodness_check(&cone)?;
        cone.flags.good = good;
        cone.goodness_witness = witness;
        if let Ok(basis) = gorenstein_basis(&cone) {
            cone.flags.gorenstein = true;
            cone.gorenstein_basis = Some(basis);
        }
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of facets.
    pub fn facets(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[Vec<Int>] {
        &self.normals
    }

    /// Primitive generators of `C*`, sorted lexicographically.
    pub fn rays(&self) -> &[Vec<Int>] {
        &self.rays
    }

    /// The normals regarded as generators of the dual (fan) cone `C`.
    pub fn fan_rays(&self) -> &[Vec<Int>] {
        &self.normals
    }

    pub fn flags(&self) -> ConeFlags {
        self.flags
    }

    pub fn goodness_witness(&self) -> Option<&[usize]> {
        self.goodness_witness.as_deref()
    }

    pub fn gorenstein_basis(&self) -> Option<&GorensteinBasis> {
        self.gorenstein_basis.as_ref()
    }

    /// Apply a unimodular change of basis `v -> m v` (rays transform by the
    /// inverse transpose), revalidating from scratch.
    pub fn transformed(&self, m: &[Vec<Int>]) -> Result<MomentCone> {
        let normals = self.normals.iter().map(|v| la::mat_vec(m, v)).collect();
        MomentCone::from_normals(self.dim, normals)
    }

    /// Exact pairings of a rational point of the fan side with all rays of `C*`.
    pub fn ray_pairings_exact(&self, xi: &[Rat]) -> Vec<Rat> {
        self.rays.iter().map(|u| la::dot_rat(xi, u)).collect()
    }
}

/// Parse the line-oriented cone-file format: one `dim <n>` line, then one
/// `normal <i1> ... <in>` line per facet; `#` starts a comment.
pub fn parse_cone(text: &str) -> Result<MomentCone> {
    let mut dim: Option<usize> = None;
    let mut dim_line = 0usize;
    let mut normals: Vec<Vec<Int>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("dim") => {
                if dim.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("duplicate dim (first at line {dim_line})"),
                    });
                }
                let v = tokens.next().ok_or(Error::Parse {
                    line: line_no,
                    msg: "dim requires a value".into(),
                })?;
                let n: usize = v.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid dimension '{v}'"),
                })?;
                if n == 0 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "dimension must be positive".into(),
                    });
                }
                if tokens.next().is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "trailing tokens after dim".into(),
                    });
                }
                dim = Some(n);
                dim_line = line_no;
            }
            Some("normal") => {
                let n = dim.ok_or(Error::Parse {
                    line: line_no,
                    msg: "normal before dim".into(),
                })?;
                let comps: Vec<Int> = tokens
                    .map(|t| {
                        t.parse::<Int>().map_err(|_| Error::Parse {
                            line: line_no,
                            msg: format!("invalid integer '{t}'"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if comps.len() != n {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("normal has {} components, expected {}", comps.len(), n),
                    });
                }
                normals.push(comps);
            }
            Some(other) => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown keyword '{other}'"),
                })
            }
            None => unreachable!(),
        }
    }
    let dim = dim.ok_or(Error::Parse {
        line: 0,
        msg: "missing dim line".into(),
    })?;
    MomentCone::from_normals(dim, normals)
}

// ---------------------------------------------------------------------------
// Dual cone by double description
// ---------------------------------------------------------------------------

/// Primitive extremal rays of the dual cone `{y : <y, g> >= 0 for all g}`,
/// sorted lexicographically. Incremental double description: start from the
/// simplicial cone of n independent halfspaces, insert the rest one at a
/// time, combining adjacent positive/negative ray pairs on each new
/// hyperplane. Fails with `NotStrictlyConvex` when the input does not span.
pub fn dual_rays(generators: &[Vec<Int>]) -> Result<Vec<Vec<Int>>> {
    if generators.is_empty() {
        return Err(Error::NotStrictlyConvex("no generators".into()));
    }
    let n = generators[0].len();
    let gens: Vec<Vec<Int>> = generators
        .iter()
        .map(|g| {
            la::primitivize(g)
                .ok_or_else(|| Error::Validation("zero generator in dual computation".into()))
        })
        .collect::<Result<_>>()?;
    let base_idx = la::independent_rows(&gens, n);
    if base_idx.len() < n {
        return Err(Error::NotStrictlyConvex(
            "generators do not span; dual cone contains a line".into(),
        ));
    }
    let base: Vec<Vec<Int>> = base_idx.iter().map(|&i| gens[i].clone()).collect();
    let inv = la::inverse_rational(&base)
        .ok_or_else(|| Error::Internal("independent rows not invertible".into()))?;
    // Dual basis: column j of inv pairs to delta_ij with the base rows.
    let mut rays: Vec<Vec<Int>> = (0..n)
        .map(|j| {
            let col: Vec<Rat> = inv.iter().map(|row| row[j].clone()).collect();
            scale_to_primitive(&col)
        })
        .collect::<Result<_>>()?;
    let mut processed: Vec<Vec<Int>> = base.clone();

    for (i, g) in gens.iter().enumerate() {
        if base_idx.contains(&i) {
            continue;
        }
        let vals: Vec<Int> = rays.iter().map(|r| la::dot(r, g)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            processed.push(g.clone());
            continue;
        }
        let mut next: Vec<Vec<Int>> = Vec::new();
        let mut seen: BTreeSet<Vec<Int>> = BTreeSet::new();
        for (r, v) in rays.iter().zip(&vals) {
            if !v.is_negative() {
                next.push(r.clone());
                seen.insert(r.clone());
            }
        }
        for (ip, rp) in rays.iter().enumerate() {
            if !vals[ip].is_positive() {
                continue;
            }
            for (im, rm) in rays.iter().enumerate() {
                if !vals[im].is_negative() {
                    continue;
                }
                if !adjacent(rp, rm, &processed, n) {
                    continue;
                }
                let combo: Vec<Int> = rp
                    .iter()
                    .zip(rm)
                    .map(|(p, m)| &vals[ip] * m - &vals[im] * p)
                    .collect();
                let prim = la::primitivize(&combo)
                    .ok_or_else(|| Error::Internal("degenerate ray combination".into()))?;
                if seen.insert(prim.clone()) {
                    next.push(prim);
                }
            }
        }
        rays = next;
        processed.push(g.clone());
    }
    rays.sort_by(|a, b| la::lex_cmp(a, b));
    Ok(rays)
}

/// Two extremal rays are adjacent iff the halfspaces tight on both span a
/// codimension-2 subspace.
fn adjacent(r: &[Int], s: &[Int], halfspaces: &[Vec<Int>], n: usize) -> bool {
    let common: Vec<Vec<Int>> = halfspaces
        .iter()
        .filter(|g| la::dot(r, g).is_zero() && la::dot(s, g).is_zero())
        .cloned()
        .collect();
    la::rank(&common) == n - 2
}

fn scale_to_primitive(col: &[Rat]) -> Result<Vec<Int>> {
    let mut lcm = Int::one();
    for c in col {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<Int> = col.iter().map(|c| (c * Rat::from_integer(lcm.clone())).to_integer()).collect();
    la::primitivize(&ints).ok_or_else(|| Error::Internal("zero dual-basis column".into()))
}

// ---------------------------------------------------------------------------
// Goodness
// ---------------------------------------------------------------------------

/// Saturation test over the proper faces of positive dimension: for each face
/// F, the normals of the facets containing F must generate a saturated
/// sublattice (all Smith elementary divisors 1). Returns the offending facet
/// index set on failure. The apex is excluded: the moment-map image of the
/// link never meets it.
fn goodness_check(cone: &MomentCone) -> Result<(bool, Option<Vec<usize>>)> {
    let d = cone.normals.len();
    if d > MAX_FACETS_FACE_ENUM {
        return Err(Error::CapacityExceeded(format!(
            "goodness face enumeration supports at most {MAX_FACETS_FACE_ENUM} facets, got {d}"
        )));
    }
    // active[r] = bitmask of facets where ray r is tight.
    let active: Vec<u32> = cone
        .rays
        .iter()
        .map(|u| {
            let mut mask = 0u32;
            for (a, v) in cone.normals.iter().enumerate() {
                if la::dot(u, v).is_zero() {
                    mask |= 1 << a;
                }
            }
            mask
        })
        .collect();
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    for subset in 1u32..(1u32 << d) {
        let rays_on_face: Vec<usize> = (0..active.len())
            .filter(|&r| active[r] & subset == subset)
            .collect();
        if rays_on_face.is_empty() {
            continue; // apex (or empty): excluded
        }
        let face_facets = rays_on_face
            .iter()
            .fold(u32::MAX >> (32 - d), |acc, &r| acc & active[r]);
        if face_facets == 0 || !seen.insert(face_facets) {
            continue;
        }
        let idx: Vec<usize> = (0..d).filter(|a| face_facets & (1 << a) != 0).collect();
        let sub: Vec<Vec<Int>> = idx.iter().map(|&a| cone.normals[a].clone()).collect();
        let divisors = la::smith_divisors(&sub);
        if divisors.iter().any(|x| !x.is_one()) {
            return Ok((false, Some(idx)));
        }
    }
    Ok((true, None))
}

/// Public goodness query: `Ok(())` plus flag access on the cone; the witness
/// names the facets meeting at the unsaturated face.
pub fn is_good(cone: &MomentCone) -> (bool, Option<Vec<usize>>) {
    (cone.flags.good, cone.goodness_witness.clone())
}

// ---------------------------------------------------------------------------
// Gorenstein normalization
// ---------------------------------------------------------------------------

fn gorenstein_basis(cone: &MomentCone) -> Result<GorensteinBasis> {
    let ones = vec![Int::one(); cone.normals.len()];
    let gamma_rat = la::solve_unique_rational(&cone.normals, &ones).ok_or_else(|| {
        Error::NotGorenstein("no covector pairs to 1 with every facet normal".into())
    })?;
    let mut gamma = Vec::with_capacity(cone.dim);
    for (i, c) in gamma_rat.iter().enumerate() {
        if !c.is_integer() {
            return Err(Error::NotGorenstein(format!(
                "height covector is not integral (component {} = {})",
                i + 1,
                c
            )));
        }
        gamma.push(c.to_integer());
    }
    let m = la::unimodular_completion_row(&gamma)?;
    let mut w = Vec::with_capacity(cone.normals.len());
    for v in &cone.normals {
        let tv = la::mat_vec(&m, v);
        if !tv[0].is_one() {
            return Err(Error::Internal("height-one transform failed".into()));
        }
        w.push(tv[1..].to_vec());
    }
    Ok(GorensteinBasis { gamma, m, w })
}

/// Unimodular `M` with `M v_a = (1, w_a)` and the list of `w_a`.
/// Identity when the normals are already at height one.
pub fn gorenstein_normalize(cone: &MomentCone) -> Result<(Vec<Vec<Int>>, Vec<Vec<Int>>)> {
    let basis = cone
        .gorenstein_basis()
        .ok_or_else(|| Error::NotGorenstein("cone admits no height-one basis".into()))?;
    Ok((basis.m.clone(), basis.w.clone()))
}

// ---------------------------------------------------------------------------
// Kernel charges
// ---------------------------------------------------------------------------

/// Primitive integer basis of the relations among the facet normals.
#[derive(Debug, Clone)]
pub struct ChargeMatrix {
    pub rows: Vec<Vec<Int>>,
}

impl ChargeMatrix {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Saturated basis of `{Q : sum_a Q^a v_a = 0}`, one row per relation
/// (`d - n` rows), sign-canonicalized.
pub fn kernel_charges(cone: &MomentCone) -> ChargeMatrix {
    let a = la::transpose(&cone.normals);
    let mut rows = la::kernel_basis(&a);
    rows.sort_by(|x, y| la::lex_cmp(x, y));
    debug_assert!(rows
        .iter()
        .all(|q| la::is_zero_vec(&la::mat_vec(&a, q))));
    ChargeMatrix { rows }
}

// ---------------------------------------------------------------------------
// Lattice equivalence
// ---------------------------------------------------------------------------

/// Search for `M` in `GL(n, Z)` mapping the fan rays of `c1` onto those of
/// `c2` as sets. Exhaustive over ordered assignments of n independent rays;
/// capacity error beyond 10 facets.
pub fn cones_equivalent(c1: &MomentCone, c2: &MomentCone) -> Result<Option<Vec<Vec<Int>>>> {
    if c1.dim != c2.dim || c1.normals.len() != c2.normals.len() {
        return Ok(None);
    }
    let d = c1.normals.len();
    if d > MAX_FACETS_EQUIV {
        return Err(Error::CapacityExceeded(format!(
            "equivalence search supports at most {MAX_FACETS_EQUIV} facets, got {d}"
        )));
    }
    let n = c1.dim;
    let set1: BTreeSet<Vec<Int>> = c1.normals.iter().cloned().collect();
    let set2: BTreeSet<Vec<Int>> = c2.normals.iter().cloned().collect();
    if set1 == set2 {
        return Ok(Some(la::identity(n)));
    }
    let base_idx = la::independent_rows(&c1.normals, n);
    debug_assert_eq!(base_idx.len(), n);
    let base: Vec<Vec<Int>> = base_idx.iter().map(|&i| c1.normals[i].clone()).collect();
    let base_inv = la::inverse_rational(&base)
        .ok_or_else(|| Error::Internal("independent rows not invertible".into()))?;

    let mut targets: Vec<usize> = (0..d).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut result: Option<Vec<Vec<Int>>> = None;
    search_assignments(
        &mut targets,
        &mut chosen,
        n,
        &mut |assignment: &[usize]| {
            if result.is_some() {
                return;
            }
            // M base_i = target_i  =>  M = T^t (B^{-1})^t computed rationally.
            let t_rows: Vec<Vec<Int>> = assignment.iter().map(|&j| c2.normals[j].clone()).collect();
            // entry (r, c) of M = sum_k T[k][r] * Binv[c][k]... derive via columns:
            // want M * b_k = t_k; with B rows b_k: M = (B^{-1}^T T^T)^T? Compute
            // directly: M = T^T * (B^T)^{-1} = T^T * (B^{-1})^T.
            let mut m_rat = vec![vec![Rat::from_integer(Int::zero()); n]; n];
            for r in 0..n {
                for c in 0..n {
                    let mut acc = Rat::from_integer(Int::zero());
                    for k in 0..n {
                        acc += Rat::from_integer(t_rows[k][r].clone()) * &base_inv[c][k];
                    }
                    m_rat[r][c] = acc;
                }
            }
            let mut m_int = Vec::with_capacity(n);
            for row in &m_rat {
                let mut irow = Vec::with_capacity(n);
                for x in row {
                    if !x.is_integer() {
                        return;
                    }
                    irow.push(x.to_integer());
                }
                m_int.push(irow);
            }
            if la::det(&m_int).abs() != Int::one() {
                return;
            }
            let image: BTreeSet<Vec<Int>> =
                c1.normals.iter().map(|v| la::mat_vec(&m_int, v)).collect();
            if image == set2 {
                result = Some(m_int);
            }
        },
    );
    Ok(result)
}

fn search_assignments(
    pool: &mut Vec<usize>,
    chosen: &mut Vec<usize>,
    want: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == want {
        visit(chosen);
        return;
    }
    for i in 0..pool.len() {
        let v = pool.remove(i);
        chosen.push(v);
        search_assignments(pool, chosen, want, visit);
        chosen.pop();
        pool.insert(i, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlin::{int, mat_int, vec_int};

    pub(crate) fn orthant() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap()
    }

    pub(crate) fn flat_c3() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]])).unwrap()
    }

    pub(crate) fn conifold() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1], &[1, 0, 1]]))
            .unwrap()
    }

    pub(crate) fn y21() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 2, 2], &[1, 0, 1]]))
            .unwrap()
    }

    #[test]
    fn parse_orthant() {
        let cone = parse_cone("dim 3\nnormal 1 0 0\nnormal 0 1 0\nnormal 0 0 1\n").unwrap();
        assert!(cone.flags().strictly_convex);
        assert_eq!(cone.facets(), 3);
    }

    #[test]
    fn parse_comments_and_primitivization() {
        let cone = parse_cone(
            "# an orthant with a scaled normal\ndim 3\nnormal 2 0 0 # doubled\nnormal 0 1 0\nnormal 0 0 1",
        )
        .unwrap();
        assert_eq!(cone.normals()[0], vec_int(&[1, 0, 0]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_cone("dim 3\nnormal 1 0\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse_cone("dim 3\nnormal 1 0 x\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn line_containing_set_rejected() {
        let err =
            MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0]]))
                .unwrap_err();
        assert!(matches!(err, Error::NotStrictlyConvex(_)));
    }

    #[test]
    fn orthant_is_self_dual() {
        let cone = orthant();
        assert_eq!(
            cone.rays(),
            &[vec_int(&[0, 0, 1]), vec_int(&[0, 1, 0]), vec_int(&[1, 0, 0])]
        );
    }

    #[test]
    fn flat_c3_rays() {
        let cone = flat_c3();
        let expected = vec![
            vec_int(&[0, 0, 1]),
            vec_int(&[0, 1, 0]),
            vec_int(&[1, -1, -1]),
        ];
        assert_eq!(cone.rays(), expected.as_slice());
    }

    #[test]
    fn y21_rays_touch_two_adjacent_normals() {
        let cone = y21();
        assert_eq!(cone.rays().len(), 4);
        for u in cone.rays() {
            let tight = cone
                .normals()
                .iter()
                .filter(|v| la::dot(u, v).is_zero())
                .count();
            assert_eq!(tight, 2);
        }
    }

    #[test]
    fn double_duality_regenerates_generators() {
        for cone in [orthant(), flat_c3(), conifold(), y21()] {
            let dual = dual_rays(cone.normals()).unwrap();
            assert_eq!(dual, cone.rays());
            let double = dual_rays(&dual).unwrap();
            let mut normals = cone.normals().to_vec();
            normals.sort_by(|a, b| la::lex_cmp(a, b));
            assert_eq!(double, normals);
        }
    }

    /// Independent oracle for ray enumeration: candidate rays from every
    /// (n-1)-subset of normals of rank n-1, kept when one sign direction
    /// satisfies all halfspaces.
    pub(crate) fn dual_rays_by_active_sets(normals: &[Vec<Int>]) -> Vec<Vec<Int>> {
        let n = normals[0].len();
        let d = normals.len();
        let mut found: BTreeSet<Vec<Int>> = BTreeSet::new();
        let mut subset: Vec<usize> = Vec::new();
        enumerate_subsets(d, n - 1, 0, &mut subset, &mut |s: &[usize]| {
            let rows: Vec<Vec<Int>> = s.iter().map(|&i| normals[i].clone()).collect();
            if la::rank(&rows) != n - 1 {
                return;
            }
            let kernel = la::kernel_basis(&rows);
            if kernel.len() != 1 {
                return;
            }
            for cand in [kernel[0].clone(), la::neg_vec(&kernel[0])] {
                if normals.iter().all(|v| !la::dot(&cand, v).is_negative()) {
                    found.insert(cand);
                }
            }
        });
        found.into_iter().collect()
    }

    fn enumerate_subsets(
        d: usize,
        k: usize,
        start: usize,
        acc: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if acc.len() == k {
            visit(acc);
            return;
        }
        for i in start..d {
            acc.push(i);
            enumerate_subsets(d, k, i + 1, acc, visit);
            acc.pop();
        }
    }

    #[test]
    fn dd_matches_active_set_oracle() {
        for cone in [orthant(), flat_c3(), conifold(), y21()] {
            let oracle = dual_rays_by_active_sets(cone.normals());
            assert_eq!(cone.rays(), oracle.as_slice());
        }
    }

    /// n=3 shortcut: rays from pairwise cross products, sign-fixed.
    fn dual_rays_cross_product(normals: &[Vec<Int>]) -> Vec<Vec<Int>> {
        let mut found: BTreeSet<Vec<Int>> = BTreeSet::new();
        for i in 0..normals.len() {
            for j in (i + 1)..normals.len() {
                let (a, b) = (&normals[i], &normals[j]);
                let cross = vec![
                    &a[1] * &b[2] - &a[2] * &b[1],
                    &a[2] * &b[0] - &a[0] * &b[2],
                    &a[0] * &b[1] - &a[1] * &b[0],
                ];
                let Some(prim) = la::primitivize(&cross) else {
                    continue;
                };
                for cand in [prim.clone(), la::neg_vec(&prim)] {
                    if normals.iter().all(|v| !la::dot(&cand, v).is_negative()) {
                        found.insert(cand);
                    }
                }
            }
        }
        found.into_iter().collect()
    }

    #[test]
    fn dd_matches_cross_product_shortcut_in_3d() {
        for cone in [orthant(), flat_c3(), conifold(), y21()] {
            assert_eq!(cone.rays(), dual_rays_cross_product(cone.normals()).as_slice());
        }
    }

    #[test]
    fn dd_handles_higher_dimension() {
        // 4d cone over the unit cube: 8 height-one normals, all facets.
        let normals = mat_int(&[
            &[1, 0, 0, 0],
            &[1, 1, 0, 0],
            &[1, 0, 1, 0],
            &[1, 0, 0, 1],
            &[1, 1, 1, 0],
            &[1, 1, 0, 1],
            &[1, 0, 1, 1],
            &[1, 1, 1, 1],
        ]);
        let cone = MomentCone::from_normals(4, normals).unwrap();
        let oracle = dual_rays_by_active_sets(cone.normals());
        assert_eq!(cone.rays(), oracle.as_slice());
    }

    #[test]
    fn goodness_examples() {
        assert!(orthant().flags().good);
        assert!(y21().flags().good);
        assert!(conifold().flags().good);
        let bad =
            MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 2, 0], &[1, 1, 1]])).unwrap();
        assert!(!bad.flags().good);
        assert_eq!(bad.goodness_witness().unwrap(), &[0, 1]);
    }

    #[test]
    fn goodness_invariant_under_unimodular_maps() {
        let maps = [
            mat_int(&[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]),
            mat_int(&[&[1, 0, 0], &[2, 1, 0], &[-1, 3, 1]]),
            mat_int(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]),
            mat_int(&[&[1, -2, 3], &[0, 1, -1], &[0, 0, 1]]),
        ];
        let bad =
            MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 2, 0], &[1, 1, 1]])).unwrap();
        for m in &maps {
            assert_eq!(la::det(m).abs(), int(1));
            for cone in [orthant(), y21(), bad.clone()] {
                let mapped = cone.transformed(m).unwrap();
                assert_eq!(cone.flags().good, mapped.flags().good);
            }
        }
    }

    #[test]
    fn gorenstein_ypq_is_identity() {
        let cone = y21();
        let (m, w) = gorenstein_normalize(&cone).unwrap();
        assert_eq!(m, la::identity(3));
        assert_eq!(
            w,
            vec![vec_int(&[0, 0]), vec_int(&[1, 0]), vec_int(&[2, 2]), vec_int(&[0, 1])]
        );
    }

    #[test]
    fn gorenstein_orthant() {
        let cone = orthant();
        let basis = cone.gorenstein_basis().unwrap();
        assert_eq!(basis.gamma, vec_int(&[1, 1, 1]));
        let mut w = basis.w.clone();
        w.sort_by(|a, b| la::lex_cmp(a, b));
        assert_eq!(w, vec![vec_int(&[0, 0]), vec_int(&[0, 1]), vec_int(&[1, 0])]);
        assert_eq!(la::det(&basis.m).abs(), int(1));
        for v in cone.normals() {
            assert!(la::mat_vec(&basis.m, v)[0].is_one());
        }
    }

    #[test]
    fn gorenstein_failure() {
        let cone = MomentCone::from_normals(2, mat_int(&[&[1, 0], &[-1, 3]])).unwrap();
        assert!(!cone.flags().gorenstein);
        assert!(matches!(
            gorenstein_normalize(&cone).unwrap_err(),
            Error::NotGorenstein(_)
        ));
    }

    #[test]
    fn kernel_charges_examples() {
        let q = kernel_charges(&y21());
        assert_eq!(q.rows.len(), 1);
        let mut comps: Vec<Int> = q.rows[0].clone();
        comps.sort();
        assert_eq!(comps, vec![int(-2), int(-2), int(1), int(3)]);

        let q = kernel_charges(&orthant());
        assert!(q.rows.is_empty());

        let q = kernel_charges(&conifold());
        assert_eq!(q.rows, vec![vec_int(&[1, -1, 1, -1])]);
    }

    #[test]
    fn equivalence_identity_and_permutation() {
        let cone = conifold();
        let m = cones_equivalent(&cone, &cone).unwrap().unwrap();
        assert_eq!(m, la::identity(3));

        let permuted =
            MomentCone::from_normals(3, mat_int(&[&[1, 1, 1], &[1, 0, 1], &[1, 0, 0], &[1, 1, 0]]))
                .unwrap();
        let m = cones_equivalent(&cone, &permuted).unwrap().unwrap();
        let image: BTreeSet<Vec<Int>> =
            cone.normals().iter().map(|v| la::mat_vec(&m, v)).collect();
        let target: BTreeSet<Vec<Int>> = permuted.normals().iter().cloned().collect();
        assert_eq!(image, target);
    }

    #[test]
    fn inequivalent_cones() {
        assert!(cones_equivalent(&conifold(), &y21()).unwrap().is_none());
    }

    #[test]
    fn equivalence_after_unimodular_shear() {
        let m = mat_int(&[&[1, 0, 0], &[1, 1, 2], &[0, 1, 1]]);
        assert_eq!(la::det(&m).abs(), int(1));
        let cone = y21();
        let sheared = cone.transformed(&m).unwrap();
        let found = cones_equivalent(&cone, &sheared).unwrap().unwrap();
        let image: BTreeSet<Vec<Int>> =
            cone.normals().iter().map(|v| la::mat_vec(&found, v)).collect();
        let target: BTreeSet<Vec<Int>> = sheared.normals().iter().cloned().collect();
        assert_eq!(image, target);
    }
}
