//! Formal Fourier-Jacobi series `f = sum_m phi_m q'^m` and their algebra.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::jacobi::{jacobi_pair, jacobi_tensor, validate_jacobi, JacobiForm, JacobiReport};
use crate::qseries::QZSeries;
use crate::ratio::{fmt_q64, q64_str, Q64};
use crate::rep::{i_pow_2k, in_invariant_subspace, rep_hom, rep_tensor, rep_trivial, rep_trivial_dim, Representation};

/// Formal series with coefficients `phi_0, ..., phi_M`, all truncated at the
/// common `q`-precision `N` (exponents `n < N`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormalFJSeries {
    #[serde(with = "q64_str")]
    pub weight: Q64,
    pub rep: Representation,
    #[serde(rename = "M")]
    pub m_trunc: usize,
    #[serde(rename = "N", with = "q64_str")]
    pub qprec: Q64,
    coeffs: Vec<JacobiForm>,
}

impl FormalFJSeries {
    /// Checks weight, index and dimension coherence and truncates every
    /// coefficient to `qprec`.
    pub fn new(weight: Q64, rep: Representation, qprec: Q64, coeffs: Vec<JacobiForm>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::IncompatibleShapes("a formal series needs at least phi_0".into()));
        }
        let mut out = Vec::with_capacity(coeffs.len());
        for (m, c) in coeffs.into_iter().enumerate() {
            if c.index != Q64::from_integer(m as i64) || c.weight != weight || c.rep_dim != rep.dim {
                return Err(Error::IncompatibleShapes(format!(
                    "coefficient {m} has weight {}, index {}, dimension {}; expected {}, {m}, {}",
                    fmt_q64(&c.weight),
                    fmt_q64(&c.index),
                    c.rep_dim,
                    fmt_q64(&weight),
                    rep.dim
                )));
            }
            if c.prec < qprec {
                return Err(Error::IncompatiblePrecision(format!(
                    "coefficient {m} known to q^{} only, series claims {}",
                    fmt_q64(&c.prec),
                    fmt_q64(&qprec)
                )));
            }
            out.push(c.truncate(qprec));
        }
        Ok(FormalFJSeries { weight, rep, m_trunc: out.len() - 1, qprec, coeffs: out })
    }

    pub fn zero(weight: Q64, rep: Representation, m_trunc: usize, qprec: Q64) -> Self {
        let coeffs = (0..=m_trunc)
            .map(|m| JacobiForm::zero(weight, Q64::from_integer(m as i64), rep.dim, qprec))
            .collect();
        FormalFJSeries { weight, rep, m_trunc, qprec, coeffs }
    }

    /// The scalar series `1` of weight 0.
    pub fn one(m_trunc: usize, qprec: Q64) -> Self {
        let mut f = FormalFJSeries::zero(Q64::zero(), rep_trivial(), m_trunc, qprec);
        f.coeffs[0] = JacobiForm::constant(qprec);
        f
    }

    /// Weight-0 constant series whose `phi_0` is the identity of
    /// `Hom(C^d, C^d)` for the trivial representation on `C^d`.
    pub fn identity_hom(d: usize, m_trunc: usize, qprec: Q64) -> Self {
        let rep = rep_hom(&rep_trivial_dim(d), &rep_trivial_dim(d));
        let id: Vec<CycNumber> =
            (0..d * d).map(|i| if i / d == i % d { CycNumber::one() } else { CycNumber::zero() }).collect();
        let mut f = FormalFJSeries::zero(Q64::zero(), rep, m_trunc, qprec);
        f.coeffs[0] = JacobiForm::constant(qprec).with_vector(&id);
        f
    }

    pub fn coeffs(&self) -> &[JacobiForm] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> &JacobiForm {
        &self.coeffs[m]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(JacobiForm::is_zero)
    }

    pub fn truncate(&self, m_trunc: usize) -> Self {
        let m_trunc = m_trunc.min(self.m_trunc);
        FormalFJSeries { m_trunc, coeffs: self.coeffs[..=m_trunc].to_vec(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.weight != other.weight || self.rep != other.rep {
            return Err(Error::IncompatibleShapes("adding series of different weight or representation".into()));
        }
        if self.qprec != other.qprec {
            return Err(Error::IncompatiblePrecision("adding series of different q-precision".into()));
        }
        let m = self.m_trunc.min(other.m_trunc);
        let coeffs = (0..=m).map(|i| self.coeffs[i].add(&other.coeffs[i])).collect::<Result<Vec<_>>>()?;
        Ok(FormalFJSeries { m_trunc: m, coeffs, ..self.clone() })
    }

    pub fn scale(&self, c: &CycNumber) -> Self {
        FormalFJSeries { coeffs: self.coeffs.iter().map(|f| f.scale(c)).collect(), ..self.clone() }
    }

    /// `validate_jacobi` on every coefficient; returns the first failure.
    pub fn validate(&self) -> std::result::Result<(), (usize, JacobiReport)> {
        for (m, c) in self.coeffs.iter().enumerate() {
            let r = validate_jacobi(c);
            if !r.passed() {
                return Err((m, r));
            }
        }
        Ok(())
    }

    /// Whether every stored coefficient vector lies in `V_rho(k)`.
    pub fn values_invariant(&self) -> Result<bool> {
        for c in &self.coeffs {
            for v in c.table().values() {
                if !in_invariant_subspace(&self.rep, &self.weight, v)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn same_qprec(a: &FormalFJSeries, b: &FormalFJSeries) -> Result<()> {
    if a.qprec != b.qprec {
        return Err(Error::IncompatiblePrecision(format!(
            "q-precisions {} and {} differ",
            fmt_q64(&a.qprec),
            fmt_q64(&b.qprec)
        )));
    }
    Ok(())
}

fn convolve(
    f: &FormalFJSeries,
    g: &FormalFJSeries,
    weight: Q64,
    rep: Representation,
    op: impl Fn(&JacobiForm, &JacobiForm) -> Result<JacobiForm> + Sync,
) -> Result<FormalFJSeries> {
    same_qprec(f, g)?;
    let m_trunc = f.m_trunc.min(g.m_trunc);
    let n = f.qprec;
    let coeffs = (0..=m_trunc)
        .into_par_iter()
        .map(|mm| {
            let mut acc = JacobiForm::zero(weight, Q64::from_integer(mm as i64), rep.dim, n);
            for m in 0..=mm {
                acc = acc.add(&op(&f.coeffs[m], &g.coeffs[mm - m])?.truncate(n))?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FormalFJSeries { weight, rep, m_trunc, qprec: n, coeffs })
}

/// `f (x) g`: coefficient of `q'^M` is `sum_{m + m' = M} phi_m (x) psi_m'`.
pub fn fj_tensor(f: &FormalFJSeries, g: &FormalFJSeries) -> Result<FormalFJSeries> {
    convolve(f, g, f.weight + g.weight, rep_tensor(&f.rep, &g.rep), |a, b| Ok(jacobi_tensor(a, b)))
}

/// `<g, f>` for `g` valued in `Hom(V_rho, V_sigma)` and `f` in `V_rho`.
pub fn fj_pair(g: &FormalFJSeries, f: &FormalFJSeries, sigma: &Representation) -> Result<FormalFJSeries> {
    if g.rep != rep_hom(&f.rep, sigma) {
        return Err(Error::IncompatibleShapes("first series is not valued in Hom(rho, sigma)".into()));
    }
    convolve(g, f, g.weight + f.weight, sigma.clone(), jacobi_pair)
}

/// Outcome of [`fj_is_symmetric`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub symmetric: bool,
    /// First `(m, n, r)` in lexicographic order where the relation fails.
    pub first_violation: Option<(usize, usize, String)>,
    pub checked: usize,
    /// Pairs where one side lies outside the `q`-window.
    pub skipped: usize,
}

/// Checks `c(phi_m; n, r) = i^{2k} rho(delta) c(phi_n; m, r)` for all
/// `m, n <= M` and `r^2 <= 4mn`.
pub fn fj_is_symmetric(f: &FormalFJSeries) -> Result<SymmetryReport> {
    let factor = i_pow_2k(&f.weight)?;
    let delta = f.rep.delta.scale(&factor);
    let period = f.coeffs.iter().map(|c| c.period).max().unwrap_or(1) as i64;
    let pairs: Vec<(usize, usize)> = (0..=f.m_trunc).flat_map(|m| (0..=f.m_trunc).map(move |n| (m, n))).collect();
    let results: Vec<(Option<Q64>, usize, usize)> = pairs
        .par_iter()
        .map(|&(m, n)| {
            let (a, b) = (&f.coeffs[m], &f.coeffs[n]);
            let (mq, nq) = (Q64::from_integer(m as i64), Q64::from_integer(n as i64));
            let bound = 4 * (m * n) as i64;
            let rmax = ((bound as f64).sqrt() as i64 + 1) * period;
            let rs = (-rmax..=rmax).map(|j| Q64::new(j, period)).filter(|r| r * r <= Q64::from_integer(bound));
            if nq >= a.prec || mq >= b.prec {
                return (None, 0, rs.count());
            }
            let mut checked = 0;
            for r in rs {
                checked += 1;
                if a.coeff(nq, r) != delta.apply(&b.coeff(mq, r)) {
                    return (Some(r), checked, 0);
                }
            }
            (None, checked, 0)
        })
        .collect();
    let mut report = SymmetryReport { symmetric: true, first_violation: None, checked: 0, skipped: 0 };
    for (&(m, n), (bad, checked, skipped)) in pairs.iter().zip(results) {
        report.checked += checked;
        report.skipped += skipped;
        if let (Some(r), true) = (bad, report.symmetric) {
            report.symmetric = false;
            report.first_violation = Some((m, n, fmt_q64(&r)));
        }
    }
    Ok(report)
}

/// Component `c` of a Jacobi form as a two-variable series.
pub fn jacobi_component(f: &JacobiForm, c: usize) -> QZSeries {
    QZSeries::from_terms(f.table().iter().map(|(&(n, r), v)| (n, r, v[c].clone())), f.prec)
}

/// Formal series with meromorphic Jacobi-form coefficients, each stored
/// per component with its own `q`-window `[valuation, prec)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeromorphicFJSeries {
    #[serde(with = "q64_str")]
    pub weight: Q64,
    pub rep_dim: usize,
    #[serde(rename = "M")]
    pub m_trunc: usize,
    pub coeffs: Vec<Vec<QZSeries>>,
}

impl MeromorphicFJSeries {
    pub fn from_formal(f: &FormalFJSeries) -> Self {
        MeromorphicFJSeries {
            weight: f.weight,
            rep_dim: f.rep.dim,
            m_trunc: f.m_trunc,
            coeffs: f.coeffs.iter().map(|c| (0..f.rep.dim).map(|i| jacobi_component(c, i)).collect()).collect(),
        }
    }

    /// Index of the coefficient of `q'^m` (always `m`).
    pub fn index(&self, m: usize) -> Q64 {
        Q64::from_integer(m as i64)
    }

    /// `q`-window `[lowest, prec)` of coefficient `m`, over all components.
    pub fn window(&self, m: usize) -> (Q64, Q64) {
        let c = &self.coeffs[m];
        let prec = c.iter().map(QZSeries::prec).min().unwrap();
        let low = c.iter().filter(|s| !s.is_zero()).map(QZSeries::valuation).min().unwrap_or(prec);
        (low, prec)
    }

    /// Product where at least one factor is scalar.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (dim, scalar_left) = match (self.rep_dim, other.rep_dim) {
            (1, d) => (d, true),
            (d, 1) => (d, false),
            (a, b) => {
                return Err(Error::IncompatibleShapes(format!("product of {a}- and {b}-dimensional series")))
            }
        };
        let m_trunc = self.m_trunc.min(other.m_trunc);
        let coeffs = (0..=m_trunc)
            .into_par_iter()
            .map(|mm| {
                (0..dim)
                    .map(|c| {
                        let term = |m: usize| {
                            let (a, b) = (&self.coeffs[m], &other.coeffs[mm - m]);
                            if scalar_left {
                                a[0].mul(&b[c])
                            } else {
                                a[c].mul(&b[0])
                            }
                        };
                        (1..=mm).fold(term(0), |acc, m| acc.add(&term(m)))
                    })
                    .collect()
            })
            .collect();
        Ok(MeromorphicFJSeries { weight: self.weight + other.weight, rep_dim: dim, m_trunc, coeffs })
    }

    /// Equality on every commonly valid term.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.rep_dim == other.rep_dim
            && self.weight == other.weight
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.agrees_with(y)))
    }

    /// Whether the series equals the scalar `1` within its windows.
    pub fn is_one(&self) -> bool {
        self.rep_dim == 1
            && self.coeffs.iter().enumerate().all(|(m, c)| {
                let target = if m == 0 { QZSeries::one(c[0].prec()) } else { QZSeries::zero(c[0].prec()) };
                c[0].agrees_with(&target)
            })
    }
}

/// Formal inverse `chi = f^{-1}` of a scalar series with `phi_0 != 0`:
/// `chi_0 = 1 / phi_0`, `chi_m = -chi_0 sum_{j=1}^m phi_j chi_{m-j}`.
pub fn fj_invert(f: &FormalFJSeries) -> Result<MeromorphicFJSeries> {
    if f.rep.dim != 1 {
        return Err(Error::IncompatibleShapes("only scalar series can be inverted".into()));
    }
    let phi: Vec<QZSeries> = f.coeffs.iter().map(|c| jacobi_component(c, 0)).collect();
    let phi0 = phi[0].at_zeta_one();
    if phi0.is_zero() {
        return Err(Error::NonInvertibleLeadingCoefficient);
    }
    let chi0 = QZSeries::from_qseries(&phi0.inverse()?);
    let mut chi = vec![chi0.clone()];
    for m in 1..=f.m_trunc {
        let s = (2..=m).fold(phi[1].mul(&chi[m - 1]), |acc, j| acc.add(&phi[j].mul(&chi[m - j])));
        chi.push(chi0.mul(&s).neg());
    }
    Ok(MeromorphicFJSeries {
        weight: -f.weight,
        rep_dim: 1,
        m_trunc: f.m_trunc,
        coeffs: chi.into_iter().map(|c| vec![c]).collect(),
    })
}

/// Formal expansion of `g / h` for scalar `h`.
pub fn fj_meromorphic_expansion(g: &FormalFJSeries, h: &FormalFJSeries) -> Result<MeromorphicFJSeries> {
    MeromorphicFJSeries::from_formal(g).mul(&fj_invert(h)?)
}
