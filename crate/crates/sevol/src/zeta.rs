//! Holomorphic spectral sums by lattice-point enumeration. Lattice points of
//! `C* ∩ Z^n` carry charge `<ξ, m>`; the truncated sum
//! `Z(t) = Σ exp(-t λ_m)` is evaluated on a geometric `t`-schedule and
//! Richardson-extrapolated to recover `lim t^n Z(t)`, which must reproduce
//! the sphere ratio of the volume engine. The same enumeration powers the
//! small-charge (Lichnerowicz) scan.

use std::collections::{HashSet, VecDeque};

use num_traits::{One, ToPrimitive};

use crate::cone::MomentCone;
use crate::error::{Error, Result};
use crate::intlin as la;
use crate::volume::{decompose, parallelepiped_points, sphere_ratio_factor, volume_delta, ReebVector};
use crate::{Int, Rat};

const COORD_BITS: u32 = 21;
const COORD_OFFSET: i64 = 1 << 20;
const MAX_PACK_DIM: usize = 6;

fn pack(m: &[i64]) -> Option<u128> {
    let mut key: u128 = 0;
    for &c in m {
        let shifted = c + COORD_OFFSET;
        if !(0..(1i64 << COORD_BITS)).contains(&shifted) {
            return None;
        }
        key = (key << COORD_BITS) | shifted as u128;
    }
    Some(key)
}

/// Generating set of the semigroup `C* ∩ Z^n`: the primitive rays plus every
/// nonzero lattice point of the fundamental parallelepiped of each simplicial
/// piece. Rays alone can miss lattice points when pieces are not unimodular.
pub fn semigroup_generators(cone: &MomentCone) -> Result<Vec<Vec<i64>>> {
    if cone.dim() > MAX_PACK_DIM {
        return Err(Error::CapacityExceeded(format!(
            "charge enumeration supports dimension <= {MAX_PACK_DIM}"
        )));
    }
    let dec = decompose(cone)?;
    let mut gens: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    let to_i64 = |v: &[Int]| -> Result<Vec<i64>> {
        v.iter()
            .map(|c| {
                c.to_i64()
                    .ok_or_else(|| Error::CapacityExceeded("generator exceeds i64".into()))
            })
            .collect()
    };
    for u in cone.rays() {
        gens.insert(to_i64(u)?);
    }
    for piece in &dec.pieces {
        for p in parallelepiped_points(&piece.rays)? {
            if !la::is_zero_vec(&p) {
                gens.insert(to_i64(&p)?);
            }
        }
    }
    Ok(gens.into_iter().collect())
}

fn enumerate_points<C, F>(
    gens: &[Vec<i64>],
    charge: F,
    cutoff: &C,
    cap: usize,
) -> Result<Vec<(Vec<i64>, C)>>
where
    C: PartialOrd + Clone,
    F: Fn(&[i64]) -> C,
{
    let n = gens.first().map(|g| g.len()).unwrap_or(0);
    let origin = vec![0i64; n];
    let mut visited: HashSet<u128> = HashSet::new();
    visited.insert(pack(&origin).expect("origin packs"));
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    queue.push_back(origin.clone());
    let mut out: Vec<(Vec<i64>, C)> = Vec::new();
    out.push((origin, charge(&vec![0i64; n])));
    while let Some(m) = queue.pop_front() {
        for g in gens {
            let next: Vec<i64> = m.iter().zip(g).map(|(a, b)| a + b).collect();
            let c = charge(&next);
            if &c > cutoff {
                continue;
            }
            let key = pack(&next).ok_or_else(|| {
                Error::CapacityExceeded("lattice point outside packable coordinate range".into())
            })?;
            if visited.insert(key) {
                if out.len() >= cap {
                    return Err(Error::CapacityExceeded(format!(
                        "lattice point cap {cap} reached"
                    )));
                }
                out.push((next.clone(), c));
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}

/// The charge multiset of `C* ∩ Z^n` up to a cutoff (charge 0 of the origin
/// included), sorted ascending.
#[derive(Debug, Clone)]
pub struct ChargeSpectrum {
    pub charges: Vec<f64>,
    pub cutoff: f64,
    pub min_nonzero: Option<(f64, Vec<i64>)>,
    pub points: usize,
}

pub fn enumerate_charges(
    cone: &MomentCone,
    xi: &ReebVector,
    cutoff: f64,
    cap: usize,
) -> Result<ChargeSpectrum> {
    if cutoff <= 0.0 {
        return Err(Error::Validation("cutoff must be positive".into()));
    }
    xi.check_interior(cone)?;
    let gens = semigroup_generators(cone)?;
    let xs = xi.xs().to_vec();
    let charge = move |m: &[i64]| -> f64 { m.iter().zip(&xs).map(|(&c, x)| c as f64 * x).sum() };
    let pts = enumerate_points(&gens, charge, &cutoff, cap)?;
    let mut charges: Vec<f64> = pts.iter().map(|(_, c)| *c).collect();
    charges.sort_by(|a, b| a.partial_cmp(b).expect("finite charges"));
    let min_nonzero = pts
        .iter()
        .filter(|(m, _)| m.iter().any(|&c| c != 0))
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite charges"))
        .map(|(m, c)| (*c, m.clone()));
    Ok(ChargeSpectrum {
        points: charges.len(),
        charges,
        cutoff,
        min_nonzero,
    })
}

fn enumerate_charges_exact(
    cone: &MomentCone,
    xi: &[Rat],
    cutoff: &Rat,
    cap: usize,
) -> Result<Vec<(Vec<i64>, Rat)>> {
    let gens = semigroup_generators(cone)?;
    let xi = xi.to_vec();
    let charge = move |m: &[i64]| -> Rat {
        m.iter()
            .zip(&xi)
            .map(|(&c, x)| Rat::from_integer(Int::from(c)) * x)
            .sum()
    };
    enumerate_points(&gens, charge, cutoff, cap)
}

// ---------------------------------------------------------------------------
// Lichnerowicz scan
// ---------------------------------------------------------------------------

/// Smallest positive charge carried by a lattice point of `C*`. The minimum
/// over all nonzero points is bounded by the smallest ray pairing (rays are
/// lattice points), which therefore serves as the scan cutoff. Charges below
/// 1 obstruct an Einstein metric with this polarization.
#[derive(Debug, Clone)]
pub struct LichnerowiczReport {
    pub min_charge: f64,
    pub min_charge_exact: Option<Rat>,
    pub witness: Vec<i64>,
    pub cutoff: f64,
    pub obstructed: bool,
}

pub const LICHNEROWICZ_SLACK: f64 = 1e-12;

pub fn lichnerowicz_scan(cone: &MomentCone, xi: &ReebVector) -> Result<LichnerowiczReport> {
    xi.check_interior(cone)?;
    let cap = 50_000_000;
    if let Some(exact) = xi.exact() {
        let cutoff = cone
            .ray_pairings_exact(exact)
            .into_iter()
            .min()
            .ok_or_else(|| Error::Internal("cone without rays".into()))?;
        let pts = enumerate_charges_exact(cone, exact, &cutoff, cap)?;
        let (m, c) = pts
            .into_iter()
            .filter(|(m, _)| m.iter().any(|&x| x != 0))
            .min_by(|a, b| a.1.cmp(&b.1))
            .ok_or_else(|| Error::Internal("no nonzero lattice point under ray cutoff".into()))?;
        Ok(LichnerowiczReport {
            min_charge: la::rat_to_f64(&c),
            obstructed: c < Rat::one(),
            min_charge_exact: Some(c),
            witness: m,
            cutoff: la::rat_to_f64(&cutoff),
        })
    } else {
        let cutoff = cone
            .rays()
            .iter()
            .map(|u| {
                u.iter()
                    .zip(xi.xs())
                    .map(|(c, x)| c.to_f64().unwrap() * x)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let spectrum = enumerate_charges(cone, xi, cutoff, cap)?;
        let (c, m) = spectrum
            .min_nonzero
            .ok_or_else(|| Error::Internal("no nonzero lattice point under ray cutoff".into()))?;
        Ok(LichnerowiczReport {
            min_charge: c,
            min_charge_exact: None,
            witness: m,
            cutoff,
            obstructed: c < 1.0 - LICHNEROWICZ_SLACK,
        })
    }
}

// ---------------------------------------------------------------------------
// Zeta limit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ZetaSchedule {
    pub t0: f64,
    pub levels: usize,
    /// Target truncation error of `t^n Z_trunc(t)` at each level.
    pub tail_tol: f64,
    pub max_points: usize,
}

impl Default for ZetaSchedule {
    fn default() -> Self {
        ZetaSchedule {
            t0: 0.5,
            levels: 6,
            tail_tol: 1e-6,
            max_points: 5_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZetaEstimate {
    pub samples: Vec<(f64, f64)>,
    pub extrapolated_limit: f64,
    pub error_bar: f64,
    pub levels_used: usize,
    /// True when the requested schedule had to be shortened to respect the
    /// lattice-point cap.
    pub capacity_limited: bool,
    pub cutoff: f64,
    pub lattice_points: usize,
    pub min_charge: f64,
    /// `E = λ(λ + 2n - 2)` for the minimal charge.
    pub eigenvalue_min: f64,
}

/// Erlang tail `P[Gamma(n) > x] = e^-x Σ_{k<n} x^k / k!`.
fn erlang_tail(n: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= x / k as f64;
        sum += term;
    }
    sum * (-x).exp()
}

/// Evaluate `t^n Z_trunc(t)` on the geometric schedule `t_k = t0 2^-k` and
/// extrapolate to `t -> 0` with a Neville tableau (3 or more Richardson
/// levels). The per-level cutoff keeps the truncation error of each sample
/// below `tail_tol`; the level count shrinks if the deepest level would
/// exceed the lattice-point cap.
pub fn zeta_limit(cone: &MomentCone, xi: &ReebVector, sched: &ZetaSchedule) -> Result<ZetaEstimate> {
    xi.check_interior(cone)?;
    let n = cone.dim();
    if sched.levels < 2 {
        return Err(Error::Validation("schedule needs at least 2 levels".into()));
    }
    let dec = decompose(cone)?;
    let ratio_est = sphere_ratio_factor(n).to_f64().unwrap()
        * volume_delta::<f64>(&dec, xi.xs())?;
    // tail exponent: smallest x with ratio * erlang_tail(n, x) <= tail_tol
    let mut lo = 1.0f64;
    let mut hi = 500.0f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ratio_est * erlang_tail(n, mid) <= sched.tail_tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tail_x = hi;
    let factorial: f64 = (1..=n as u64).map(|k| k as f64).product();

    let mut capacity_limited = false;
    let mut chosen: Option<(usize, f64, ChargeSpectrum)> = None;
    for levels in (2..=sched.levels).rev() {
        let t_min = sched.t0 * 0.5f64.powi(levels as i32 - 1);
        let cutoff = tail_x / t_min;
        let predicted = ratio_est * cutoff.powi(n as i32) / factorial;
        if predicted * 1.25 + 1000.0 > sched.max_points as f64 {
            capacity_limited = true;
            continue;
        }
        match enumerate_charges(cone, xi, cutoff, sched.max_points) {
            Ok(spec) => {
                chosen = Some((levels, cutoff, spec));
                break;
            }
            Err(Error::CapacityExceeded(_)) => {
                capacity_limited = true;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    let Some((levels, cutoff, spectrum)) = chosen else {
        return Err(Error::CapacityExceeded(format!(
            "no feasible schedule within {} lattice points",
            sched.max_points
        )));
    };

    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(levels);
    for k in 0..levels {
        let t = sched.t0 * 0.5f64.powi(k as i32);
        let level_cutoff = tail_x / t;
        // partial sums over λ <= level_cutoff, smallest terms (largest λ) first
        let upper = spectrum
            .charges
            .partition_point(|&c| c <= level_cutoff);
        let mut acc = 0.0f64;
        for &lambda in spectrum.charges[..upper].iter().rev() {
            acc += (-t * lambda).exp();
        }
        samples.push((t, t.powi(n as i32) * acc));
    }

    // Neville extrapolation to t = 0.
    let mut tableau: Vec<f64> = samples.iter().map(|&(_, s)| s).collect();
    let ts: Vec<f64> = samples.iter().map(|&(t, _)| t).collect();
    let mut last_diag = tableau[0];
    let mut prev_diag = tableau[0];
    for j in 1..levels {
        for i in 0..(levels - j) {
            tableau[i] =
                (ts[i + j] * tableau[i] - ts[i] * tableau[i + 1]) / (ts[i + j] - ts[i]);
        }
        prev_diag = last_diag;
        last_diag = tableau[0];
    }
    let error_bar = (last_diag - prev_diag).abs() + sched.tail_tol;

    let (min_charge, _) = spectrum
        .min_nonzero
        .clone()
        .ok_or_else(|| Error::Internal("no nonzero lattice point enumerated".into()))?;
    Ok(ZetaEstimate {
        samples,
        extrapolated_limit: last_diag,
        error_bar,
        levels_used: levels,
        capacity_limited,
        cutoff,
        lattice_points: spectrum.points,
        min_charge,
        eigenvalue_min: min_charge * (min_charge + 2.0 * n as f64 - 2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlin::{int, mat_int};

    fn orthant() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap()
    }
    fn flat_c3() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]])).unwrap()
    }
    fn conifold() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1], &[1, 0, 1]]))
            .unwrap()
    }
    fn y21() -> MomentCone {
        MomentCone::from_normals(3, mat_int(&[&[1, 0, 0], &[1, 1, 0], &[1, 2, 2], &[1, 0, 1]]))
            .unwrap()
    }
    fn rat(p: i64, q: i64) -> Rat {
        Rat::new(int(p), int(q))
    }

    #[test]
    fn y21_generators_include_parallelepiped_points() {
        let gens = semigroup_generators(&y21()).unwrap();
        // (1,0,0) is not a nonnegative integer combination of the four rays
        assert!(gens.contains(&vec![1, 0, 0]));
        assert!(gens.len() > 4);
    }

    #[test]
    fn orthant_layer_counts_are_binomial() {
        let xi = ReebVector::from_f64(vec![1.0, 1.0, 1.0]);
        let spec = enumerate_charges(&orthant(), &xi, 3.0 + 1e-9, 1_000_000).unwrap();
        let count = |k: f64| {
            spec.charges
                .iter()
                .filter(|&&c| (c - k).abs() < 1e-9)
                .count()
        };
        assert_eq!(count(0.0), 1);
        assert_eq!(count(1.0), 3);
        assert_eq!(count(2.0), 6);
        assert_eq!(count(3.0), 10);
        assert_eq!(spec.points, 20);
    }

    #[test]
    fn conifold_minimal_charge_at_critical_point() {
        let xi = ReebVector::from_rats(vec![rat(3, 1), rat(3, 2), rat(3, 2)]);
        let rep = lichnerowicz_scan(&conifold(), &xi).unwrap();
        assert_eq!(rep.min_charge_exact.unwrap(), rat(3, 2));
        assert!(!rep.obstructed);
        // multiplicity 4: the four ray generators all sit at charge 3/2
        let spec = enumerate_charges(&conifold(), &xi, 1.5 + 1e-9, 100_000).unwrap();
        let at_min = spec
            .charges
            .iter()
            .filter(|&&c| (c - 1.5).abs() < 1e-9)
            .count();
        assert_eq!(at_min, 4);
    }

    #[test]
    fn flat_c3_minimal_charge_is_one_with_multiplicity_three() {
        let xi = ReebVector::from_rats(vec![rat(3, 1), rat(1, 1), rat(1, 1)]);
        let rep = lichnerowicz_scan(&flat_c3(), &xi).unwrap();
        assert_eq!(rep.min_charge_exact.unwrap(), Rat::one());
        assert!(!rep.obstructed);
        let spec = enumerate_charges(&flat_c3(), &xi, 1.0 + 1e-9, 100_000).unwrap();
        let at_min = spec
            .charges
            .iter()
            .filter(|&&c| (c - 1.0).abs() < 1e-9)
            .count();
        assert_eq!(at_min, 3);
    }

    #[test]
    fn skewed_conifold_polarization_is_obstructed() {
        let xi = ReebVector::from_f64(vec![3.0, 2.9, 0.05]);
        let rep = lichnerowicz_scan(&conifold(), &xi).unwrap();
        assert!((rep.min_charge - 0.05).abs() < 1e-12);
        assert!(rep.obstructed);
        assert_eq!(rep.witness, vec![0, 0, 1]);
    }

    #[test]
    fn eigenvalue_relation_exact() {
        let xi = ReebVector::from_f64(vec![1.0, 1.0, 1.0]);
        let est = zeta_limit(
            &orthant(),
            &xi,
            &ZetaSchedule {
                levels: 4,
                max_points: 2_000_000,
                ..ZetaSchedule::default()
            },
        )
        .unwrap();
        let l = est.min_charge;
        assert_eq!(est.eigenvalue_min, l * (l + 4.0));
    }

    #[test]
    fn orthant_zeta_limit_is_one() {
        let xi = ReebVector::from_f64(vec![1.0, 1.0, 1.0]);
        let est = zeta_limit(&orthant(), &xi, &ZetaSchedule::default()).unwrap();
        assert!(
            (est.extrapolated_limit - 1.0).abs() < 1e-3,
            "limit {} err {}",
            est.extrapolated_limit,
            est.error_bar
        );
        // closed form: t^3 (1 - e^-t)^-3; samples must match it
        for &(t, s) in &est.samples {
            let exact = (t / (1.0 - (-t).exp())).powi(3);
            assert!((s - exact).abs() < 5e-6, "t={t} s={s} exact={exact}");
        }
        // monotone approach of the samples toward the limit
        let errs: Vec<f64> = est
            .samples
            .iter()
            .map(|&(_, s)| (s - est.extrapolated_limit).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn conifold_zeta_limit_matches_sphere_ratio() {
        let xi = ReebVector::from_rats(vec![rat(3, 1), rat(3, 2), rat(3, 2)]);
        let est = zeta_limit(&conifold(), &xi, &ZetaSchedule::default()).unwrap();
        assert!((est.extrapolated_limit - 16.0 / 27.0).abs() < 1e-3);
        assert!(est.capacity_limited); // 6 requested levels exceed the cap
        assert!(est.levels_used >= 3);
    }

    #[test]
    fn zeta_rejects_outside_reeb() {
        let xi = ReebVector::from_f64(vec![3.0, -1.0, 1.0]);
        assert!(matches!(
            zeta_limit(&conifold(), &xi, &ZetaSchedule::default()),
            Err(Error::ReebOutsideCone)
        ));
    }

    #[test]
    fn infeasible_cap_is_reported() {
        let xi = ReebVector::from_f64(vec![1.0, 1.0, 1.0]);
        let err = zeta_limit(
            &orthant(),
            &xi,
            &ZetaSchedule {
                max_points: 100,
                ..ZetaSchedule::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded(_)));
    }

    #[test]
    fn ehrhart_growth_of_orthant_layer_count() {
        // N(Λ) approaches (2^n n! vol) Λ^n / n! = Λ^3/6; the subleading term
        // is 3Λ^2/4, so 5% agreement needs Λ of order 10^2.
        let xi = ReebVector::from_f64(vec![1.0, 1.0, 1.0]);
        let lam = 160.0;
        let spec = enumerate_charges(&orthant(), &xi, lam + 1e-9, 5_000_000).unwrap();
        let leading = lam.powi(3) / 6.0;
        let ratio = spec.points as f64 / leading;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
        // and the count is exactly the binomial C(163, 3)
        assert_eq!(spec.points, 163 * 162 * 161 / 6);
    }

    #[test]
    fn exact_enumeration_agrees_with_float_path() {
        let xi_rat = vec![rat(3, 1), rat(5, 2), rat(9, 4)];
        let xi = ReebVector::from_rats(xi_rat.clone());
        let cutoff = rat(4, 1);
        let exact = enumerate_charges_exact(&y21(), &xi_rat, &cutoff, 100_000).unwrap();
        let float = enumerate_charges(&y21(), &xi, 4.0 + 1e-12, 100_000).unwrap();
        assert_eq!(exact.len(), float.points);
    }
}
