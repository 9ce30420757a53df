//! Genus-2 Fourier coefficient tables and the symmetric-space solver.
//!
//! A symmetric formal series of weight `k` truncated at `q'^M` and `q^N` is
//! parametrized by the coordinates of each `phi_m` in a basis of
//! `J_{k,m} (x) V_rho(k)`; the symmetry relation is imposed as a linear
//! system and its kernel is the truncated space.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::fjseries::{fj_is_symmetric, FormalFJSeries};
use crate::jacobi::{JacobiBasisCache, JacobiForm};
use crate::linalg::SparseMatrix;
use crate::ratio::{fmt_q64, parse_q64, Q64};
use crate::rep::{i_pow_2k, invariant_subspace, Representation};

/// Coefficients `a(T)` for `T = [[n, r/2], [r/2, m]]`, keyed by `(n, r, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelForm {
    pub weight: Q64,
    pub rep: Representation,
    pub m_trunc: usize,
    pub qprec: Q64,
    coeffs: BTreeMap<(Q64, Q64, Q64), Vec<CycNumber>>,
}

impl SiegelForm {
    pub fn coeffs(&self) -> &BTreeMap<(Q64, Q64, Q64), Vec<CycNumber>> {
        &self.coeffs
    }

    pub fn coeff(&self, n: Q64, r: Q64, m: Q64) -> Vec<CycNumber> {
        self.coeffs.get(&(n, r, m)).cloned().unwrap_or_else(|| vec![CycNumber::zero(); self.rep.dim])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// First `(n, r, m)` with `n, m <= M` where
    /// `a(m, r, n) != i^{2k} rho(delta) a(n, r, m)`.
    pub fn swap_violation(&self) -> Result<Option<(Q64, Q64, Q64)>> {
        let delta = self.rep.delta.scale(&i_pow_2k(&self.weight)?);
        let mq = Q64::from_integer(self.m_trunc as i64);
        for (&(n, r, m), v) in &self.coeffs {
            if n <= mq && m <= mq && self.coeff(m, r, n) != delta.apply(v) {
                return Ok(Some((n, r, m)));
            }
        }
        Ok(None)
    }
}

/// Table `a([[n, r/2], [r/2, m]]) = c(phi_m; n, r)` of a symmetric series.
pub fn fj_to_siegel(f: &FormalFJSeries) -> Result<SiegelForm> {
    let report = fj_is_symmetric(f)?;
    if let Some((m, n, r)) = report.first_violation {
        return Err(Error::NotSymmetric { m: m as i64, n: n as i64, r });
    }
    let mut coeffs = BTreeMap::new();
    for (m, phi) in f.coeffs().iter().enumerate() {
        let mq = Q64::from_integer(m as i64);
        for (&(n, r), v) in phi.table() {
            coeffs.insert((n, r, mq), v.clone());
        }
    }
    Ok(SiegelForm { weight: f.weight, rep: f.rep.clone(), m_trunc: f.m_trunc, qprec: f.qprec, coeffs })
}

/// Slices the table at fixed `m`.
pub fn siegel_to_fj(s: &SiegelForm) -> FormalFJSeries {
    let mut f = FormalFJSeries::zero(s.weight, s.rep.clone(), s.m_trunc, s.qprec);
    let mut phis: Vec<JacobiForm> = f.coeffs().to_vec();
    for (&(n, r, m), v) in &s.coeffs {
        if m.is_integer() && (m.to_integer() as usize) <= s.m_trunc {
            phis[m.to_integer() as usize].set(n, r, v.clone());
        }
    }
    f = FormalFJSeries::new(s.weight, s.rep.clone(), s.qprec, phis).expect("slices are coherent");
    f
}

#[derive(Serialize, Deserialize)]
struct SiegelRepr {
    weight: String,
    rep: Representation,
    #[serde(rename = "M")]
    m_trunc: usize,
    #[serde(rename = "N")]
    qprec: String,
    coeffs: Vec<(String, String, String, Vec<CycNumber>)>,
}

impl Serialize for SiegelForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SiegelRepr {
            weight: fmt_q64(&self.weight),
            rep: self.rep.clone(),
            m_trunc: self.m_trunc,
            qprec: fmt_q64(&self.qprec),
            coeffs: self
                .coeffs
                .iter()
                .map(|((n, r, m), v)| (fmt_q64(n), fmt_q64(r), fmt_q64(m), v.clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiegelForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SiegelRepr::deserialize(d)?;
        let p = |x: &str| parse_q64(x).map_err(serde::de::Error::custom);
        let mut coeffs = BTreeMap::new();
        for (n, rr, m, v) in r.coeffs {
            if v.len() != r.rep.dim {
                return Err(serde::de::Error::custom("coefficient length differs from representation dimension"));
            }
            coeffs.insert((p(&n)?, p(&rr)?, p(&m)?), v);
        }
        Ok(SiegelForm { weight: p(&r.weight)?, rep: r.rep, m_trunc: r.m_trunc, qprec: p(&r.qprec)?, coeffs })
    }
}

/// Coefficient of `t^k` in `1 / ((1-t^4)(1-t^6)(1-t^10)(1-t^12))`.
pub fn expected_dimension(k: i64) -> Result<usize> {
    if !(0..=40).contains(&k) || k % 2 != 0 {
        return Err(Error::BadWeight(k.to_string()));
    }
    let k = k as usize;
    let mut c = vec![0usize; k + 1];
    c[0] = 1;
    for g in [4, 6, 10, 12] {
        for i in g..=k {
            c[i] += c[i - g];
        }
    }
    Ok(c[k])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Require equal dimensions at `(M, N)`, `(M + 1, N)` and `(M, N + 2)`,
    /// escalating `(M, N) -> (M + 1, N + 2)` until they agree.
    pub stabilize: bool,
    pub max_escalations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { stabilize: true, max_escalations: 3 }
    }
}

/// Kernel of the truncated symmetry system at one `(M, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSpace {
    pub dimension: usize,
    pub m_trunc: usize,
    pub qprec: i64,
    /// Shape of the constraint matrix.
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<FormalFJSeries>,
    /// `(M, N, dimension)` for every truncation that was solved.
    pub trail: Vec<(usize, i64, usize)>,
}

/// Solver with memoized Jacobi bases.
#[derive(Default)]
pub struct SymmetricSolver {
    cache: JacobiBasisCache,
}

impl SymmetricSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn jacobi_cache(&self) -> &JacobiBasisCache {
        &self.cache
    }

    /// Solves at exactly `(M, N)`.
    pub fn solve_at(&self, k: &Q64, rho: &Representation, m_trunc: usize, qprec: i64) -> Result<SymmetricSpace> {
        let vs = invariant_subspace(rho, k)?;
        let nq = Q64::from_integer(qprec);
        if vs.is_empty() {
            return Ok(SymmetricSpace {
                dimension: 0,
                m_trunc,
                qprec,
                rows: 0,
                cols: 0,
                basis: vec![],
                trail: vec![(m_trunc, qprec, 0)],
            });
        }
        let bases = (0..=m_trunc)
            .map(|m| self.cache.basis(k, m as u32, qprec))
            .collect::<Result<Vec<Vec<JacobiForm>>>>()?;
        let dv = vs.len();
        let offsets: Vec<usize> = bases
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.len() * dv;
                Some(o)
            })
            .collect();
        let cols = offsets.last().unwrap() + bases.last().unwrap().len() * dv;
        let delta = rho.delta.scale(&i_pow_2k(k)?);
        // images i^{2k} rho(delta) v_j
        let dvs: Vec<Vec<CycNumber>> = vs.iter().map(|v| delta.apply(v)).collect();
        let pairs: Vec<(usize, usize)> = (0..=m_trunc).flat_map(|m| (m..=m_trunc).map(move |n| (m, n))).collect();
        let blocks: Vec<Vec<BTreeMap<usize, CycNumber>>> = pairs
            .par_iter()
            .map(|&(m, n)| {
                let mut rows = Vec::new();
                if n as i64 >= qprec {
                    return rows;
                }
                let (mq, nq_) = (Q64::from_integer(m as i64), Q64::from_integer(n as i64));
                let bound = 4 * (m * n) as i64;
                let rmax = (bound as f64).sqrt() as i64 + 1;
                for r in (-rmax..=rmax).filter(|r| r * r <= bound).map(Q64::from_integer) {
                    let mut block: Vec<BTreeMap<usize, CycNumber>> = vec![BTreeMap::new(); rho.dim];
                    let mut add = |col: usize, comp: usize, val: CycNumber| {
                        let e = block[comp].entry(col).or_insert_with(CycNumber::zero);
                        *e = &*e + &val;
                    };
                    for (b, f) in bases[m].iter().enumerate() {
                        let c = &f.coeff(nq_, r)[0];
                        if c.is_zero() {
                            continue;
                        }
                        for (j, v) in vs.iter().enumerate() {
                            for (comp, x) in v.iter().enumerate() {
                                if !x.is_zero() {
                                    add(offsets[m] + b * dv + j, comp, c * x);
                                }
                            }
                        }
                    }
                    for (b, f) in bases[n].iter().enumerate() {
                        let c = &f.coeff(mq, r)[0];
                        if c.is_zero() {
                            continue;
                        }
                        for (j, v) in dvs.iter().enumerate() {
                            for (comp, x) in v.iter().enumerate() {
                                if !x.is_zero() {
                                    add(offsets[n] + b * dv + j, comp, -(c * x));
                                }
                            }
                        }
                    }
                    for mut row in block {
                        row.retain(|_, v| !v.is_zero());
                        if !row.is_empty() {
                            rows.push(row);
                        }
                    }
                }
                rows
            })
            .collect();
        let mut mat = SparseMatrix::new(0, cols);
        for row in blocks.into_iter().flatten() {
            mat.push_row(row);
        }
        let rows = mat.rows();
        let kernel = mat.rref().kernel();
        let basis = kernel
            .iter()
            .map(|x| {
                let phis = (0..=m_trunc)
                    .map(|m| {
                        let mut phi = JacobiForm::zero(*k, Q64::from_integer(m as i64), rho.dim, nq);
                        for (b, f) in bases[m].iter().enumerate() {
                            for (j, v) in vs.iter().enumerate() {
                                let c = &x[offsets[m] + b * dv + j];
                                if !c.is_zero() {
                                    let w: Vec<CycNumber> = v.iter().map(|t| t * c).collect();
                                    phi = phi.add(&f.with_vector(&w)).expect("same shape");
                                }
                            }
                        }
                        phi
                    })
                    .collect();
                FormalFJSeries::new(*k, rho.clone(), nq, phis)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SymmetricSpace {
            dimension: basis.len(),
            m_trunc,
            qprec,
            rows,
            cols,
            basis,
            trail: vec![(m_trunc, qprec, kernel.len())],
        })
    }

    /// See [`symmetric_space`].
    pub fn solve(&self, k: &Q64, rho: &Representation, m_trunc: usize, qprec: i64, opts: SolveOptions) -> Result<SymmetricSpace> {
        let mut here = self.solve_at(k, rho, m_trunc, qprec)?;
        if !opts.stabilize || here.cols == 0 {
            return Ok(here);
        }
        let mut trail = here.trail.clone();
        for _ in 0..=opts.max_escalations {
            let (m, n) = (here.m_trunc, here.qprec);
            let more_m = self.solve_at(k, rho, m + 1, n)?;
            let more_n = self.solve_at(k, rho, m, n + 2)?;
            trail.extend(more_m.trail.iter().chain(&more_n.trail));
            if more_m.dimension == here.dimension && more_n.dimension == here.dimension {
                here.trail = trail;
                return Ok(here);
            }
            here = self.solve_at(k, rho, m + 1, n + 2)?;
            trail.extend(&here.trail);
        }
        Err(Error::PrecisionTooLow(format!(
            "symmetric space of weight {} did not stabilize; trail {:?}",
            fmt_q64(k),
            trail
        )))
    }
}

/// Truncated space of symmetric formal series of weight `k` for `rho`.
///
/// Returns dimension 0 without touching Jacobi bases when `V_rho(k) = 0`;
/// otherwise `k` must be an even integer.
pub fn symmetric_space(k: &Q64, rho: &Representation, m_trunc: usize, qprec: i64, opts: SolveOptions) -> Result<SymmetricSpace> {
    SymmetricSolver::new().solve(k, rho, m_trunc, qprec, opts)
}

/// Coordinates of a series, keyed by `(m, n, r, component)`.
fn flatten(f: &FormalFJSeries) -> BTreeMap<(usize, Q64, Q64, usize), CycNumber> {
    let mut out = BTreeMap::new();
    for (m, phi) in f.coeffs().iter().enumerate() {
        for (&(n, r), v) in phi.table() {
            for (c, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    out.insert((m, n, r, c), x.clone());
                }
            }
        }
    }
    out
}

/// Whether `f` is a linear combination of `basis` (compared on the
/// coefficients `f` shares with the basis truncation).
pub fn in_span(basis: &[FormalFJSeries], f: &FormalFJSeries) -> bool {
    let flat: Vec<_> = basis.iter().map(flatten).collect();
    let target = flatten(f);
    let keys: std::collections::BTreeSet<_> = flat.iter().flat_map(|b| b.keys().cloned()).chain(target.keys().cloned()).collect();
    let col: BTreeMap<_, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut m = SparseMatrix::new(0, col.len());
    for b in &flat {
        m.push_row(b.iter().map(|(k, v)| (col[k], v.clone())));
    }
    let mut v = vec![CycNumber::zero(); col.len()];
    for (k, x) in &target {
        v[col[k]] = x.clone();
    }
    m.rref().contains(&v)
}

/// `f` scaled so that its first nonzero coordinate is one.
pub fn normalize(f: &FormalFJSeries) -> FormalFJSeries {
    match flatten(f).values().next() {
        Some(lead) => f.scale(&(&CycNumber::one() / lead)),
        None => f.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fjseries::fj_tensor;
    use crate::rep::{rep_trivial, rep_trivial_dim, Representation};

    fn q(n: i64) -> Q64 {
        Q64::from_integer(n)
    }

    #[test]
    fn igusa_counts() {
        let want = [(0, 1), (2, 0), (4, 1), (6, 1), (8, 1), (10, 2), (12, 3)];
        for (k, d) in want {
            assert_eq!(expected_dimension(k).unwrap(), d, "k = {k}");
        }
        // brute-force monomial count
        for k in (0..=40).step_by(2) {
            let mut count = 0;
            for a in 0..=k / 4 {
                for b in 0..=k / 6 {
                    for c in 0..=k / 10 {
                        let rest = k - 4 * a - 6 * b - 10 * c;
                        count += usize::from(rest >= 0 && rest % 12 == 0);
                    }
                }
            }
            assert_eq!(expected_dimension(k).unwrap(), count, "k = {k}");
        }
        assert!(expected_dimension(3).is_err());
        assert!(expected_dimension(42).is_err());
    }

    #[test]
    fn small_weights_without_stabilization() {
        let plain = SolveOptions { stabilize: false, ..Default::default() };
        for (k, d) in [(0, 1), (2, 0), (4, 1), (6, 1)] {
            let s = symmetric_space(&q(k), &rep_trivial(), 4, 6, plain).unwrap();
            assert_eq!(s.dimension, d, "k = {k}");
        }
    }

    #[test]
    fn weight_ten_space_and_tables() {
        let s = symmetric_space(&q(10), &rep_trivial(), 4, 6, SolveOptions::default()).unwrap();
        assert_eq!(s.dimension, 2);
        for f in &s.basis {
            assert!(fj_is_symmetric(f).unwrap().symmetric);
            assert!(f.validate().is_ok());
            let t = fj_to_siegel(f).unwrap();
            assert_eq!(t.swap_violation().unwrap(), None);
            assert_eq!(siegel_to_fj(&t), *f);
            // a(n, r, m) = a(n + r + m, r + 2m, m) inside the window
            for (&(n, r, m), v) in t.coeffs() {
                let (n2, r2) = (n + r + m, r + m * 2);
                if n2 < t.qprec {
                    assert_eq!(t.coeff(n2, r2, m), *v);
                }
            }
        }
    }

    #[test]
    fn vector_valued_trivial_scales() {
        let plain = SolveOptions { stabilize: false, ..Default::default() };
        let s = symmetric_space(&q(4), &rep_trivial_dim(2), 3, 5, plain).unwrap();
        assert_eq!(s.dimension, 2);
        let s = symmetric_space(&Q64::new(1, 2), &rep_trivial(), 3, 5, plain).unwrap();
        assert_eq!(s.dimension, 0);
        let odd = Representation::character(4, CycNumber::i_pow(1), CycNumber::one(), CycNumber::from_int(-1));
        assert!(matches!(symmetric_space(&Q64::new(1, 2), &odd, 3, 5, plain), Err(Error::UnsupportedWeight(_))));
        assert!(matches!(symmetric_space(&q(5), &rep_trivial(), 3, 5, plain), Err(Error::UnsupportedWeight(_))));
    }

    #[test]
    fn products_stay_in_span() {
        let plain = SolveOptions { stabilize: false, ..Default::default() };
        let a = symmetric_space(&q(4), &rep_trivial(), 3, 5, plain).unwrap();
        let b = symmetric_space(&q(6), &rep_trivial(), 3, 5, plain).unwrap();
        let c = symmetric_space(&q(10), &rep_trivial(), 3, 5, plain).unwrap();
        let p = fj_tensor(&a.basis[0], &b.basis[0]).unwrap();
        assert!(in_span(&c.basis, &p));
        assert!(in_span(&c.basis, &normalize(&p)));
        assert!(!in_span(&c.basis[..1], &c.basis[1]));
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let s = symmetric_space(&q(4), &rep_trivial(), 2, 4, SolveOptions { stabilize: false, ..Default::default() }).unwrap();
        let mut f = s.basis[0].clone();
        f = f.add(&f).unwrap();
        let bad = FormalFJSeries::new(q(4), rep_trivial(), q(4), {
            let mut c = f.coeffs().to_vec();
            c[1] = c[1].scale(&CycNumber::from_int(3));
            c
        })
        .unwrap();
        assert!(matches!(fj_to_siegel(&bad), Err(Error::NotSymmetric { .. })));
        let zero = FormalFJSeries::zero(q(4), rep_trivial(), 2, q(4));
        assert!(fj_to_siegel(&zero).unwrap().is_zero());
    }

    #[test]
    fn siegel_serialization_round_trip() {
        let s = symmetric_space(&q(6), &rep_trivial(), 2, 4, SolveOptions { stabilize: false, ..Default::default() }).unwrap();
        let t = fj_to_siegel(&s.basis[0]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: SiegelForm = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
