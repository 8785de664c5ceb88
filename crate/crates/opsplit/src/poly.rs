//! Polynomials with real coefficients in ascending degree order.
//!
//! Roots come from the eigenvalues of the companion matrix, computed by a
//! complex shifted QR iteration on its (already Hessenberg) form. Multiple roots
//! are recovered by clustering the computed eigenvalues and verifying each
//! cluster centre against the polynomial's derivatives.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::tolerances::{CLUSTER_CANDIDATE_REL, CLUSTER_REL, MULTIPLICITY_REL};
use crate::C64;

/// Eigenvalue iteration did not converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoConvergence;

/// Drops trailing (highest-degree) zero coefficients.
pub fn trim(coeffs: &[f64]) -> Vec<f64> {
    let len = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    coeffs[..len].to_vec()
}

/// Degree of a trimmed coefficient list; the zero polynomial has degree 0 here.
pub fn degree(coeffs: &[f64]) -> usize {
    coeffs.len().saturating_sub(1)
}

pub fn eval(coeffs: &[f64], z: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn eval_complex(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `Σ |c_i| |z|^i`, the magnitude against which rounding in `eval` is judged.
pub fn eval_abs(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c.abs())
}

/// Taylor coefficients `t_0..t_order` of `p(center + w)` in powers of `w`.
pub fn taylor_at(coeffs: &[f64], center: C64, order: usize) -> Vec<C64> {
    // repeated synthetic division by (z - center)
    let mut work: Vec<C64> = coeffs.iter().map(|&c| C64::new(c, 0.0)).collect();
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        if work.is_empty() {
            out.push(C64::new(0.0, 0.0));
            continue;
        }
        let n = work.len();
        let mut quotient = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut acc = C64::new(0.0, 0.0);
        for i in (0..n).rev() {
            acc = acc * center + work[i];
            if i > 0 {
                quotient[i - 1] = acc;
            }
        }
        out.push(acc);
        work = quotient;
    }
    out
}

/// Taylor coefficient magnitudes `Σ_i |c_i| C(i, j) r^{i-j}` for `j = 0..=order`.
fn taylor_abs(coeffs: &[f64], r: f64, order: usize) -> Vec<f64> {
    let abs: Vec<f64> = coeffs.iter().map(|c| c.abs()).collect();
    taylor_at(&abs, C64::new(r, 0.0), order)
        .into_iter()
        .map(|c| c.re)
        .collect()
}

/// All complex roots of `coeffs` (ascending order, nonzero leading coefficient).
pub fn roots(coeffs: &[f64]) -> Result<Vec<C64>, NoConvergence> {
    let p = trim(coeffs);
    let n = degree(&p);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p[n];
    // companion matrix in upper Hessenberg form: first row -c_{n-1..0}/lead
    let mut h = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        h[j] = C64::new(-p[n - 1 - j] / lead, 0.0);
    }
    for i in 1..n {
        h[i * n + (i - 1)] = C64::new(1.0, 0.0);
    }
    let mut eig = hessenberg_eigenvalues(n, &mut h)?;
    for z in eig.iter_mut() {
        *z = newton_polish(&p, *z);
    }
    Ok(eig)
}

/// A few guarded Newton steps; keeps the iterate only while the residual shrinks.
fn newton_polish(p: &[f64], mut z: C64) -> C64 {
    let dp: Vec<f64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect();
    let mut res = eval(p, z).norm();
    for _ in 0..3 {
        let d = eval(&dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - eval(p, z) / d;
        let cres = eval(p, cand).norm();
        if cres < res {
            z = cand;
            res = cres;
        } else {
            break;
        }
    }
    z
}

fn hessenberg_eigenvalues(n: usize, h: &mut [C64]) -> Result<Vec<C64>, NoConvergence> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut eig = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    let max_iter = 60 * n.max(1);
    let mut total = 0usize;
    while hi > 0 {
        if hi == 1 {
            eig.push(h[idx(0, 0)]);
            break;
        }
        // locate the active unreduced block [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[idx(lo, lo - 1)].norm();
            let diag = h[idx(lo - 1, lo - 1)].norm() + h[idx(lo, lo)].norm();
            if sub <= f64::EPSILON * diag || sub < f64::MIN_POSITIVE {
                h[idx(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eig.push(h[idx(hi - 1, hi - 1)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(NoConvergence);
        }
        let a = h[idx(hi - 2, hi - 2)];
        let b = h[idx(hi - 2, hi - 1)];
        let c = h[idx(hi - 1, hi - 2)];
        let d = h[idx(hi - 1, hi - 1)];
        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            d + C64::new(0.75 * c.norm(), 0.5 * c.norm())
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in lo..hi {
            h[idx(k, k)] -= mu;
        }
        let mut rots: Vec<(C64, C64)> = Vec::with_capacity(hi - lo - 1);
        for k in lo..hi - 1 {
            let x = h[idx(k, k)];
            let y = h[idx(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            for j in k..hi {
                let u = h[idx(k, j)];
                let v = h[idx(k + 1, j)];
                h[idx(k, j)] = cs.conj() * u + sn.conj() * v;
                h[idx(k + 1, j)] = -sn * u + cs * v;
            }
            rots.push((cs, sn));
        }
        for (off, &(cs, sn)) in rots.iter().enumerate() {
            let k = lo + off;
            let top = (k + 2).min(hi);
            for i in lo..top {
                let u = h[idx(i, k)];
                let v = h[idx(i, k + 1)];
                h[idx(i, k)] = u * cs + v * sn;
                h[idx(i, k + 1)] = -u * sn.conj() + v * cs.conj();
            }
        }
        for k in lo..hi {
            h[idx(k, k)] += mu;
        }
    }
    Ok(eig)
}

/// A root together with its detected multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

/// Groups computed roots of `coeffs` into distinct roots with multiplicities.
///
/// Candidate clusters are formed by single linkage at a loose radius. A cluster
/// of size `k` is accepted when its centre annihilates `p, p', …, p^(k-1)` to
/// relative accuracy; otherwise it is split at the strict clustering radius.
pub fn cluster_roots(coeffs: &[f64], computed: &[C64]) -> Vec<Root> {
    let groups = single_linkage(computed, CLUSTER_CANDIDATE_REL);
    let mut out = Vec::new();
    for group in groups {
        let members: Vec<C64> = group.iter().map(|&i| computed[i]).collect();
        let k = members.len();
        if k == 1 {
            out.push(Root {
                value: members[0],
                multiplicity: 1,
            });
            continue;
        }
        let centre = refine_multiple(coeffs, mean(&members), k);
        if is_multiple_root(coeffs, centre, k) {
            out.push(Root {
                value: centre,
                multiplicity: k,
            });
            continue;
        }
        for sub in single_linkage(&members, CLUSTER_REL) {
            let pts: Vec<C64> = sub.iter().map(|&i| members[i]).collect();
            let mult = pts.len();
            let centre = if mult == 1 {
                pts[0]
            } else {
                refine_multiple(coeffs, mean(&pts), mult)
            };
            out.push(Root {
                value: centre,
                multiplicity: mult,
            });
        }
    }
    // deterministic order: by real part, then imaginary part
    out.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                a.value
                    .im
                    .partial_cmp(&b.value.im)
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });
    out
}

fn mean(pts: &[C64]) -> C64 {
    pts.iter().sum::<C64>() / pts.len() as f64
}

fn single_linkage(pts: &[C64], rel: f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = pts[i].norm().max(pts[j].norm()).max(f64::MIN_POSITIVE);
            if (pts[i] - pts[j]).norm() <= rel * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Newton on `p^(k-1)`, which has a simple root where `p` has a `k`-fold one.
fn refine_multiple(coeffs: &[f64], start: C64, k: usize) -> C64 {
    let mut z = start;
    let resid = |z: C64| {
        let t = taylor_at(coeffs, z, k);
        (t[k - 1], t[k] * k as f64)
    };
    let (mut f, _) = resid(z);
    for _ in 0..4 {
        let (fz, dz) = resid(z);
        if dz.norm() == 0.0 {
            break;
        }
        let cand = z - fz / dz;
        let (fc, _) = resid(cand);
        if fc.norm() < f.norm() {
            z = cand;
            f = fc;
        } else {
            break;
        }
    }
    z
}

/// `true` when `p^(j)(z)/j!` is negligible for every `j < k`.
pub fn is_multiple_root(coeffs: &[f64], z: C64, k: usize) -> bool {
    let t = taylor_at(coeffs, z, k);
    let scale = taylor_abs(coeffs, z.norm(), k);
    (0..k).all(|j| t[j].norm() <= MULTIPLICITY_REL * scale[j].max(f64::MIN_POSITIVE))
}

/// Coefficients of `Π (z - r)` over the given roots (with multiplicity), monic.
pub fn from_roots(roots: &[Root]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for r in roots {
        for _ in 0..r.multiplicity {
            let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r.value;
            }
            p = next;
        }
    }
    p
}

/// Binomial expansion of `(1 - z/k)^k`.
pub fn iterated_resolvent_denominator(k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut binom = 1.0f64;
    let kf = k as f64;
    for j in 0..=k {
        out.push(binom * (-1.0 / kf).powi(j as i32));
        binom = binom * (kf - j as f64) / (j as f64 + 1.0);
    }
    out
}
