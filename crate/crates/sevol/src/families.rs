//! Constructors and closed-form oracles for the two explicit infinite
//! families of four-facet Gorenstein cones.

use num_integer::Integer;

use crate::cone::{kernel_charges, MomentCone};
use crate::error::{Error, Result};
use crate::intlin as la;
use crate::{Int, Rat};

/// Warning attached to every closed-form volume report for the first family.
pub const YPQ_VOLUME_WARNING: &str = "closed-form volume uses denominator \
3 p^2 (3 q^2 - 2 p^2 + p sqrt(4 p^2 - 3 q^2)); the variant without the \
factor p on the radical is non-positive for some valid (p, q) (already at \
(3, 1)) and is not used";

fn validate_ypq(p: u64, q: u64) -> Result<()> {
    if p == 0 || q == 0 || q >= p {
        return Err(Error::Validation(format!(
            "family parameters require 0 < q < p, got ({p}, {q})"
        )));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::Validation(format!(
            "family parameters require gcd(p, q) = 1, got ({p}, {q})"
        )));
    }
    Ok(())
}

/// The four-facet cone with normals `(1,0,0), (1,1,0), (1,p,p), (1,p-q-1,p-q)`.
/// Always good and Gorenstein for valid `(p, q)`.
pub fn ypq_cone(p: u64, q: u64) -> Result<MomentCone> {
    validate_ypq(p, q)?;
    let (p_i, q_i) = (p as i64, q as i64);
    let normals = vec![
        la::vec_int(&[1, 0, 0]),
        la::vec_int(&[1, 1, 0]),
        la::vec_int(&[1, p_i, p_i]),
        la::vec_int(&[1, p_i - q_i - 1, p_i - q_i]),
    ];
    let cone = MomentCone::from_normals(3, normals)?;
    if !cone.flags().good || !cone.flags().gorenstein {
        return Err(Error::Internal(format!(
            "constructed ({p}, {q}) cone fails goodness/height-one checks"
        )));
    }
    Ok(cone)
}

/// Closed-form link volume over `vol(S^5)`:
/// `q^2 (2p + s) / (3 p^2 (3 q^2 - 2 p^2 + p s))` with `s = sqrt(4p^2-3q^2)`.
pub fn ypq_volume(p: u64, q: u64) -> Result<f64> {
    validate_ypq(p, q)?;
    let (pf, qf) = (p as f64, q as f64);
    let s = (4.0 * pf * pf - 3.0 * qf * qf).sqrt();
    Ok(qf * qf * (2.0 * pf + s) / (3.0 * pf * pf * (3.0 * qf * qf - 2.0 * pf * pf + pf * s)))
}

/// The denominator variant with a bare radical. Kept as a diagnostic: it is
/// non-positive for some valid parameters, which is what motivates the
/// corrected denominator above.
pub fn ypq_volume_bare_radical_variant(p: u64, q: u64) -> Result<f64> {
    validate_ypq(p, q)?;
    let (pf, qf) = (p as f64, q as f64);
    let s = (4.0 * pf * pf - 3.0 * qf * qf).sqrt();
    Ok(qf * qf * (2.0 * pf + s) / (3.0 * pf * pf * (3.0 * qf * qf - 2.0 * pf * pf + s)))
}

/// Exact integer test: the Reeb field closes its orbits iff `4p^2 - 3q^2` is
/// a perfect square.
pub fn ypq_is_quasiregular(p: u64, q: u64) -> Result<bool> {
    validate_ypq(p, q)?;
    let disc = Int::from(4 * p * p) - Int::from(3 * q * q);
    let root = disc.sqrt();
    Ok(&root * &root == disc)
}

/// All coprime pairs `0 < q < p <= p_max`.
pub fn ypq_pairs(p_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for p in 2..=p_max {
        for q in 1..p {
            if p.gcd(&q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// Result of the second-family constructor: the cone, the realized charge
/// row, and any orbifold warnings (coprimality failures that break goodness
/// but still give a valid cone).
#[derive(Debug, Clone)]
pub struct LabcCone {
    pub cone: MomentCone,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    /// Kernel row realized on the constructed normal order: `(a, b, -c, -d)`.
    pub charge: Vec<Int>,
    pub warnings: Vec<String>,
}

/// Build the four-facet Gorenstein cone whose charge row is `(a, b, -c, -d)`
/// with `d = a + b - c`. Normals are fixed as `v1 = (1,0,0)` and
/// `v3 = (1,e,0)` (with `e = 1` in the coprime case), and the remaining two
/// solved by extended-gcd minimal representatives.
pub fn labc_cone(a: u64, b: u64, c: u64) -> Result<LabcCone> {
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::Validation("parameters must be positive".into()));
    }
    if a > b || c > b {
        return Err(Error::Validation(format!(
            "parameters require a <= b and c <= b, got ({a}, {b}, {c})"
        )));
    }
    let d = a + b - c;
    let all_gcd = a.gcd(&b).gcd(&c).gcd(&d);
    if all_gcd != 1 {
        return Err(Error::Validation(format!(
            "parameters require gcd(a, b, c, a+b-c) = 1, got gcd {all_gcd}"
        )));
    }
    let mut warnings = Vec::new();
    for (x, y, lx, ly) in [
        (a, c, "a", "c"),
        (a, d, "a", "a+b-c"),
        (b, c, "b", "c"),
        (b, d, "b", "a+b-c"),
    ] {
        if x.gcd(&y) != 1 {
            warnings.push(format!(
                "gcd({lx}, {ly}) = {} > 1: link is an orbifold, not a smooth manifold",
                x.gcd(&y)
            ));
        }
    }

    for shift in [0i64, 1] {
        match construct_labc(b as i64, c as i64, d as i64, shift) {
            Ok(built) => {
                let charges = kernel_charges(&built);
                let expected = la::vec_int(&[a as i64, b as i64, -(c as i64), -(d as i64)]);
                if charges.rows.len() != 1
                    || (charges.rows[0] != expected && la::neg_vec(&charges.rows[0]) != expected)
                {
                    continue;
                }
                if !built.flags().gorenstein {
                    continue;
                }
                if !built.flags().good && warnings.is_empty() {
                    // A coprime triple must give a good cone; a failure here
                    // means the wrong gcd representative was chosen.
                    continue;
                }
                if !built.flags().good {
                    warnings.push(
                        "goodness fails on a face: accepted as an orbifold geometry".to_string(),
                    );
                }
                return Ok(LabcCone {
                    cone: built,
                    a,
                    b,
                    c,
                    d,
                    charge: expected,
                    warnings,
                });
            }
            Err(_) => continue,
        }
    }
    Err(Error::Internal(format!(
        "no valid height-one model found for ({a}, {b}, {c})"
    )))
}

fn construct_labc(b: i64, c: i64, d: i64, shift: i64) -> Result<MomentCone> {
    let g = b.gcd(&d);
    // minimal stretch e of the v1-v3 edge making b x2 - d x4 = c e solvable
    let e = g / g.gcd(&c);
    let rhs = c * e / g;
    let (bb, dd) = (b / g, d / g);
    let (beta, delta) = ext_gcd_pair(bb, dd)?;
    let mut x2 = rhs * beta;
    let mut x4 = rhs * delta;
    // minimal nonnegative representative of x2 mod dd, plus the retry shift
    let k = x2.div_euclid(dd) - shift;
    x2 -= k * dd;
    x4 -= k * bb;
    let normals = vec![
        la::vec_int(&[1, 0, 0]),
        la::vec_int(&[1, x2, dd]),
        la::vec_int(&[1, e, 0]),
        la::vec_int(&[1, x4, bb]),
    ];
    MomentCone::from_normals(3, normals)
}

/// beta, delta with `bb * beta - dd * delta = 1` for coprime bb, dd.
fn ext_gcd_pair(bb: i64, dd: i64) -> Result<(i64, i64)> {
    let ext = bb.extended_gcd(&dd);
    if ext.gcd != 1 {
        return Err(Error::Internal("extended gcd on non-coprime pair".into()));
    }
    // bb*x + dd*y = 1  =>  beta = x, delta = -y
    Ok((ext.x, -ext.y))
}

/// Exact rational form of the corrected closed-form volume, for tests that
/// want more digits than f64: returns (rational part, coefficient of sqrt(D),
/// D) with volume = r + s*sqrt(D).
pub fn ypq_volume_surd(p: u64, q: u64) -> Result<(Rat, Rat, Int)> {
    validate_ypq(p, q)?;
    // v = q^2 (2p + s) / (3 p^2 (3 q^2 - 2 p^2 + p s)),  s^2 = D = 4p^2 - 3q^2.
    // Rationalize: multiply by the conjugate of the denominator.
    let p_i = Int::from(p);
    let q_i = Int::from(q);
    let dsc = Int::from(4u64) * &p_i * &p_i - Int::from(3u64) * &q_i * &q_i;
    let alpha = Int::from(3u64) * &q_i * &q_i - Int::from(2u64) * &p_i * &p_i; // denominator = 3p^2 (alpha + p s)
    let scale = Int::from(3u64) * &p_i * &p_i;
    // (2p + s)/(alpha + p s) = (2p + s)(alpha - p s) / (alpha^2 - p^2 D)
    let denom = &alpha * &alpha - &p_i * &p_i * &dsc;
    let rat_part = Rat::new(&q_i * &q_i * (Int::from(2u64) * &p_i * &alpha - &p_i * &dsc), &scale * &denom);
    let surd_part = Rat::new(&q_i * &q_i * (&alpha - Int::from(2u64) * &p_i * &p_i), &scale * &denom);
    Ok((rat_part, surd_part, dsc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::cones_equivalent;
    use num_traits::Zero;
    use crate::intlin::{int, vec_int};

    #[test]
    fn ypq_cone_normals() {
        let cone = ypq_cone(2, 1).unwrap();
        assert_eq!(
            cone.normals(),
            &[
                vec_int(&[1, 0, 0]),
                vec_int(&[1, 1, 0]),
                vec_int(&[1, 2, 2]),
                vec_int(&[1, 0, 1])
            ]
        );
        let cone = ypq_cone(3, 2).unwrap();
        assert_eq!(cone.normals()[2], vec_int(&[1, 3, 3]));
        assert_eq!(cone.normals()[3], vec_int(&[1, 0, 1]));
        assert!(cone.flags().good && cone.flags().gorenstein);
    }

    #[test]
    fn ypq_validation() {
        assert!(matches!(ypq_cone(2, 2), Err(Error::Validation(_))));
        assert!(matches!(ypq_cone(4, 2), Err(Error::Validation(_))));
        assert!(matches!(ypq_volume(1, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn ypq_volume_y21() {
        let v = ypq_volume(2, 1).unwrap();
        let expected = (13.0 * 13f64.sqrt() + 46.0) / 324.0;
        assert!((v - expected).abs() < 1e-15);
        let (r, s, d) = ypq_volume_surd(2, 1).unwrap();
        assert_eq!(d, int(13));
        assert_eq!(r, Rat::new(int(46), int(324)));
        assert_eq!(s, Rat::new(int(13), int(324)));
    }

    #[test]
    fn bare_radical_variant_goes_negative_at_3_1() {
        // 3 q^2 - 2 p^2 + sqrt(4p^2 - 3q^2) = 3 - 18 + sqrt(33) < 0
        let bad = ypq_volume_bare_radical_variant(3, 1).unwrap();
        assert!(bad < 0.0);
        let good = ypq_volume(3, 1).unwrap();
        assert!(good > 0.0);
    }

    #[test]
    fn corrected_volume_positive_on_sweep() {
        for (p, q) in ypq_pairs(12) {
            let v = ypq_volume(p, q).unwrap();
            assert!(v > 0.0 && v < 1.0, "vol[{p},{q}] = {v}");
        }
    }

    #[test]
    fn quasiregularity_examples() {
        assert!(ypq_is_quasiregular(7, 3).unwrap()); // 169 = 13^2
        assert!(!ypq_is_quasiregular(2, 1).unwrap()); // 13
        assert!(!ypq_is_quasiregular(5, 4).unwrap()); // 52
    }

    #[test]
    fn labc_conifold() {
        let built = labc_cone(1, 1, 1).unwrap();
        assert!(built.warnings.is_empty());
        assert_eq!(built.charge, vec_int(&[1, 1, -1, -1]));
        assert!(built.cone.flags().good);
        let conifold = MomentCone::from_normals(
            3,
            vec![
                vec_int(&[1, 0, 0]),
                vec_int(&[1, 1, 0]),
                vec_int(&[1, 1, 1]),
                vec_int(&[1, 0, 1]),
            ],
        )
        .unwrap();
        assert!(cones_equivalent(&built.cone, &conifold).unwrap().is_some());
    }

    #[test]
    fn labc_identifies_with_ypq() {
        for (p, q) in [(2u64, 1u64), (3, 2), (4, 1), (4, 3)] {
            let built = labc_cone(p - q, p + q, p).unwrap();
            assert!(built.warnings.is_empty(), "warnings: {:?}", built.warnings);
            assert!(built.cone.flags().good);
            let ypq = ypq_cone(p, q).unwrap();
            assert!(
                cones_equivalent(&built.cone, &ypq).unwrap().is_some(),
                "L({},{},{}) should match Y({p},{q})",
                p - q,
                p + q,
                p
            );
        }
    }

    #[test]
    fn labc_charge_sums_to_zero() {
        for (a, b, c) in [(1u64, 3u64, 2u64), (2, 3, 2), (1, 5, 3), (3, 5, 4)] {
            let built = labc_cone(a, b, c).unwrap();
            let total: Int = built.charge.iter().sum();
            assert!(total.is_zero());
        }
    }

    #[test]
    fn labc_validation() {
        assert!(matches!(labc_cone(2, 1, 1), Err(Error::Validation(_)))); // a > b
        assert!(matches!(labc_cone(2, 4, 2), Err(Error::Validation(_)))); // gcd 2
    }

    #[test]
    fn labc_orbifold_triples_warn() {
        // gcd(b, c) = 2 violates coprimality; cone exists but is not good
        let built = labc_cone(1, 2, 2).unwrap();
        assert!(!built.warnings.is_empty());
        assert!(!built.cone.flags().good);
        assert!(built.cone.flags().gorenstein);
    }
}
