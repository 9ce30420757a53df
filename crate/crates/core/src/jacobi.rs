//! Jacobi forms as Fourier coefficient tables and bases of `J_{k,m}`.
//!
//! Holomorphic bases are cut out of the weak Jacobi forms
//! `M_*[phi_{-2,1}, phi_{0,1}]` by the linear conditions `c(n, r) = 0`
//! whenever `4mn - r^2 < 0`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::qseries::{eisenstein_q, eta, theta11, theta2, theta3, theta4, QSeries, QZSeries};
use crate::ratio::{fmt_q64, parse_q64, q64, rem_euclid, Q64};

/// Fourier coefficients `(n, r) -> c(n, r)`; absent keys are zero vectors.
pub type FourierTable = BTreeMap<(Q64, Q64), Vec<CycNumber>>;

fn is_zero_vec(v: &[CycNumber]) -> bool {
    v.iter().all(Zero::is_zero)
}

fn add_vec(a: &[CycNumber], b: &[CycNumber]) -> Vec<CycNumber> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn kron_vec(a: &[CycNumber], b: &[CycNumber]) -> Vec<CycNumber> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Scalar weak Jacobi form: only finitely many `zeta` powers per `q`-order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakJacobiForm {
    pub weight: Q64,
    pub index: Q64,
    pub series: QZSeries,
}

impl WeakJacobiForm {
    pub fn mul(&self, other: &Self) -> Self {
        WeakJacobiForm {
            weight: self.weight + other.weight,
            index: self.index + other.index,
            series: self.series.mul(&other.series),
        }
    }

    /// Product with an elliptic modular form of the given weight.
    pub fn mul_modular(&self, f: &QSeries, weight: Q64) -> Self {
        WeakJacobiForm { weight: self.weight + weight, index: self.index, series: self.series.mul_q(f) }
    }

    pub fn pow(&self, e: u32) -> Self {
        WeakJacobiForm {
            weight: self.weight * e as i64,
            index: self.index * e as i64,
            series: self.series.pow(e),
        }
    }

    pub fn coeff(&self, n: i64, r: i64) -> CycNumber {
        self.series.coeff(Q64::from_integer(n), Q64::from_integer(r))
    }
}

/// The standard weak generators `phi_{-2,1}` and `phi_{0,1}` to integer
/// `q`-precision `prec`.
///
/// `phi_{-2,1} = theta11^2 / eta^6` and
/// `phi_{0,1} = 4 sum_{i=2,3,4} theta_i(tau, z)^2 / theta_i(tau, 0)^2`,
/// normalized so that their `q^0` terms are `zeta - 2 + zeta^-1` and
/// `zeta + 10 + zeta^-1`.
pub fn weak_generators(prec: i64) -> (WeakJacobiForm, WeakJacobiForm) {
    let target = Q64::from_integer(prec);
    let work = target + 1;
    let eta6 = eta(work).pow(6);
    let phi_m2 = theta11(work).pow(2).mul_q(&eta6.inverse().expect("eta is a unit")).truncate(target);
    let mut phi_0 = QZSeries::zero(work);
    for th in [theta2(work), theta3(work), theta4(work)] {
        let at0 = th.at_zeta_one().pow(2);
        phi_0 = phi_0.add(&th.pow(2).mul_q(&at0.inverse().expect("theta constant is nonzero")));
    }
    let phi_0 = phi_0.scale(&CycNumber::from_int(4)).truncate(target);
    assert!(phi_m2.prec() == target && phi_0.prec() == target, "generator precision shortfall");
    assert_eq!(phi_m2.denoms(), (1, 1));
    assert_eq!(phi_0.denoms(), (1, 1));
    (
        WeakJacobiForm { weight: q64(-2, 1), index: q64(1, 1), series: phi_m2 },
        WeakJacobiForm { weight: q64(0, 1), index: q64(1, 1), series: phi_0 },
    )
}

/// A (possibly vector-valued) Jacobi form of weight `k` and index `m`,
/// truncated in `q` at `prec`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiForm {
    pub weight: Q64,
    pub index: Q64,
    pub rep_dim: usize,
    /// Exponent denominators divide `period`; `c(n, r)` depends only on
    /// `(4mn - r^2, r mod 2m * period)`.
    pub period: u32,
    pub prec: Q64,
    table: FourierTable,
}

impl JacobiForm {
    pub fn zero(weight: Q64, index: Q64, rep_dim: usize, prec: Q64) -> Self {
        JacobiForm { weight, index, rep_dim, period: 1, prec, table: BTreeMap::new() }
    }

    /// Scalar form from a weak form's series (no support check).
    pub fn from_weak(w: &WeakJacobiForm) -> Self {
        let mut f = JacobiForm::zero(w.weight, w.index, 1, w.series.prec());
        for (n, r, v) in w.series.terms() {
            f.table.insert((n, r), vec![v.clone()]);
        }
        f
    }

    /// Scalar form `f` times the constant vector `v`.
    pub fn with_vector(&self, v: &[CycNumber]) -> Self {
        assert_eq!(self.rep_dim, 1, "with_vector needs a scalar form");
        let mut out = JacobiForm { rep_dim: v.len(), table: BTreeMap::new(), ..self.clone() };
        for (k, c) in &self.table {
            let w: Vec<CycNumber> = v.iter().map(|x| x * &c[0]).collect();
            if !is_zero_vec(&w) {
                out.table.insert(*k, w);
            }
        }
        out
    }

    pub fn table(&self) -> &FourierTable {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    pub fn coeff(&self, n: Q64, r: Q64) -> Vec<CycNumber> {
        self.table.get(&(n, r)).cloned().unwrap_or_else(|| vec![CycNumber::zero(); self.rep_dim])
    }

    pub fn set(&mut self, n: Q64, r: Q64, v: Vec<CycNumber>) {
        assert_eq!(v.len(), self.rep_dim);
        if is_zero_vec(&v) {
            self.table.remove(&(n, r));
        } else {
            self.table.insert((n, r), v);
        }
    }

    /// Smallest `q`-exponent present, or `prec` when zero.
    pub fn valuation(&self) -> Q64 {
        self.table.keys().next().map_or(self.prec, |k| k.0)
    }

    pub fn truncate(&self, prec: Q64) -> Self {
        let prec = prec.min(self.prec);
        JacobiForm {
            prec,
            table: self.table.iter().filter(|(k, _)| k.0 < prec).map(|(k, v)| (*k, v.clone())).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rep_dim != other.rep_dim || self.index != other.index {
            return Err(Error::IncompatibleShapes("adding Jacobi forms of different index or dimension".into()));
        }
        let prec = self.prec.min(other.prec);
        let mut out = self.truncate(prec);
        for (k, v) in &other.table {
            if k.0 < prec {
                let s = match out.table.get(k) {
                    Some(a) => add_vec(a, v),
                    None => v.clone(),
                };
                out.set(k.0, k.1, s);
            }
        }
        out.period = self.period.max(other.period);
        Ok(out)
    }

    pub fn scale(&self, c: &CycNumber) -> Self {
        let mut out = JacobiForm { table: BTreeMap::new(), ..self.clone() };
        for (k, v) in &self.table {
            out.set(k.0, k.1, v.iter().map(|x| x * c).collect());
        }
        out
    }

    /// Applies a linear map to every coefficient vector.
    pub fn map_values(&self, out_dim: usize, f: impl Fn(&[CycNumber]) -> Vec<CycNumber>) -> Self {
        let mut out = JacobiForm { rep_dim: out_dim, table: BTreeMap::new(), ..self.clone() };
        for (k, v) in &self.table {
            out.set(k.0, k.1, f(v));
        }
        out
    }

    /// Coefficient convolution where values combine through `combine`.
    fn convolve(&self, other: &Self, out_dim: usize, combine: impl Fn(&[CycNumber], &[CycNumber]) -> Vec<CycNumber>) -> Self {
        let prec = (self.prec + other.valuation()).min(other.prec + self.valuation());
        let mut acc: FourierTable = BTreeMap::new();
        let other_min = other.valuation();
        for ((na, ra), va) in &self.table {
            if *na + other_min >= prec {
                break;
            }
            for ((nb, rb), vb) in &other.table {
                let n = na + nb;
                if n >= prec {
                    break;
                }
                let p = combine(va, vb);
                let key = (n, ra + rb);
                match acc.get_mut(&key) {
                    Some(s) => *s = add_vec(s, &p),
                    None => {
                        acc.insert(key, p);
                    }
                }
            }
        }
        acc.retain(|_, v| !is_zero_vec(v));
        JacobiForm {
            weight: self.weight + other.weight,
            index: self.index + other.index,
            rep_dim: out_dim,
            period: self.period.max(other.period),
            prec,
            table: acc,
        }
    }

    /// Validation report for the holomorphic Jacobi-form conditions.
    pub fn validate(&self) -> JacobiReport {
        validate_jacobi(self)
    }
}

/// `phi (x) psi`: weights and indices add, values are Kronecker products.
pub fn jacobi_tensor(phi: &JacobiForm, psi: &JacobiForm) -> JacobiForm {
    phi.convolve(psi, phi.rep_dim * psi.rep_dim, kron_vec)
}

/// Product of two Jacobi forms, at least one of them scalar.
pub fn jacobi_mul(phi: &JacobiForm, psi: &JacobiForm) -> Result<JacobiForm> {
    if phi.rep_dim != 1 && psi.rep_dim != 1 {
        return Err(Error::IncompatibleShapes(format!(
            "product of vector-valued forms of dimensions {} and {}",
            phi.rep_dim, psi.rep_dim
        )));
    }
    Ok(jacobi_tensor(phi, psi))
}

/// `<lambda, v>` coefficientwise: `lambda` takes values in `Hom(C^d, C^e)`
/// flattened row-major (`e * d` entries), `v` in `C^d`.
pub fn jacobi_pair(lambda: &JacobiForm, v: &JacobiForm) -> Result<JacobiForm> {
    let d = v.rep_dim;
    if d == 0 || !lambda.rep_dim.is_multiple_of(d) {
        return Err(Error::IncompatibleShapes(format!(
            "cannot pair a {}-dimensional Hom value with a {d}-vector",
            lambda.rep_dim
        )));
    }
    let e = lambda.rep_dim / d;
    Ok(lambda.convolve(v, e, |l, x| {
        (0..e)
            .map(|i| (0..d).fold(CycNumber::zero(), |acc, j| &acc + &(&l[i * d + j] * &x[j])))
            .collect()
    }))
}

/// Outcome of [`validate_jacobi`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JacobiReport {
    pub support_violations: Vec<(String, String)>,
    pub periodicity_violations: Vec<(String, String)>,
    pub denominator_violations: Vec<(String, String)>,
    pub dimension_violations: usize,
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        self.support_violations.is_empty()
            && self.periodicity_violations.is_empty()
            && self.denominator_violations.is_empty()
            && self.dimension_violations == 0
    }
}

fn pair_str(n: Q64, r: Q64) -> (String, String) {
    (fmt_q64(&n), fmt_q64(&r))
}

/// Checks holomorphic support `n >= 0, r^2 <= 4mn`, periodicity in
/// `(4mn - r^2, r mod 2m P)` and the exponent denominator bound `P`.
pub fn validate_jacobi(phi: &JacobiForm) -> JacobiReport {
    let mut report = JacobiReport::default();
    let m = phi.index;
    let p = phi.period as i64;
    for (&(n, r), v) in &phi.table {
        if v.len() != phi.rep_dim {
            report.dimension_violations += 1;
        }
        if n.is_negative() || r * r > m * n * 4 {
            report.support_violations.push(pair_str(n, r));
        }
        if !(n * p).is_integer() || !(r * p).is_integer() {
            report.denominator_violations.push(pair_str(n, r));
        }
    }
    if m.is_positive() {
        let modulus = m * 2 * p;
        let mut keys: BTreeSet<(Q64, Q64)> = phi.table.keys().filter(|k| k.0 < phi.prec).copied().collect();
        // every admissible (n, r) inside the window
        let step = q64(1, p);
        let mut n = Q64::zero();
        while n < phi.prec {
            let rmax = (m * n * 4).to_integer() as f64;
            let bound = (rmax.sqrt() as i64 + 1) * p;
            for j in -bound..=bound {
                let r = q64(j, p);
                if r * r <= m * n * 4 {
                    keys.insert((n, r));
                }
            }
            n += step;
        }
        let mut classes: BTreeMap<(Q64, Q64), ((Q64, Q64), Vec<CycNumber>)> = BTreeMap::new();
        for (n, r) in keys {
            let class = (m * n * 4 - r * r, rem_euclid(&r, &modulus));
            let value = phi.coeff(n, r);
            match classes.get(&class) {
                None => {
                    classes.insert(class, ((n, r), value));
                }
                Some((_, first)) => {
                    if *first != value {
                        report.periodicity_violations.push(pair_str(n, r));
                    }
                }
            }
        }
    }
    report
}

/// Generator powers shared by all basis computations at one precision.
pub struct WeakJacobiRing {
    prec: i64,
    e4: QSeries,
    e6: QSeries,
    phi_m2: WeakJacobiForm,
    phi_0: WeakJacobiForm,
    powers: Mutex<HashMap<(u8, u32), Arc<QZSeries>>>,
}

impl WeakJacobiRing {
    pub fn new(prec: i64) -> Self {
        let (phi_m2, phi_0) = weak_generators(prec);
        WeakJacobiRing {
            prec,
            e4: eisenstein_q(4, prec).expect("E4"),
            e6: eisenstein_q(6, prec).expect("E6"),
            phi_m2,
            phi_0,
            powers: Mutex::new(HashMap::new()),
        }
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn generators(&self) -> (&WeakJacobiForm, &WeakJacobiForm) {
        (&self.phi_m2, &self.phi_0)
    }

    fn power(&self, which: u8, e: u32) -> Arc<QZSeries> {
        if let Some(p) = self.powers.lock().unwrap().get(&(which, e)) {
            return p.clone();
        }
        let p = if e == 0 {
            QZSeries::one(Q64::from_integer(self.prec))
        } else {
            let prev = self.power(which, e - 1);
            let base = match which {
                0 => QZSeries::from_qseries(&self.e4),
                1 => QZSeries::from_qseries(&self.e6),
                2 => self.phi_m2.series.clone(),
                _ => self.phi_0.series.clone(),
            };
            prev.mul(&base)
        };
        let p = Arc::new(p);
        self.powers.lock().unwrap().insert((which, e), p.clone());
        p
    }

    /// The weak monomials `E4^a E6^b phi_{-2,1}^c1 phi_{0,1}^c2` of weight
    /// `k` and index `m`, in a fixed order (by `c1`, then `b`).
    pub fn monomials(&self, k: i64, m: u32) -> Vec<(MonomialExponents, WeakJacobiForm)> {
        let mut out = Vec::new();
        for c1 in 0..=m {
            let c2 = m - c1;
            let w = k + 2 * c1 as i64;
            if w < 0 {
                continue;
            }
            let mut b = 0;
            while 6 * b <= w {
                if (w - 6 * b) % 4 == 0 {
                    let a = (w - 6 * b) / 4;
                    let s = self
                        .power(0, a as u32)
                        .mul(&self.power(1, b as u32))
                        .mul(&self.power(2, c1))
                        .mul(&self.power(3, c2));
                    let exps = MonomialExponents { e4: a as u32, e6: b as u32, phi_m2: c1, phi_0: c2 };
                    out.push((exps, WeakJacobiForm { weight: Q64::from_integer(k), index: Q64::from_integer(m as i64), series: s }));
                }
                b += 1;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialExponents {
    pub e4: u32,
    pub e6: u32,
    pub phi_m2: u32,
    pub phi_0: u32,
}

/// Holomorphic subspace of the weak monomial span at one precision.
struct RawBasis {
    kernel_dim: usize,
    forms: Vec<JacobiForm>,
}

fn raw_basis(ring: &WeakJacobiRing, k: i64, m: u32) -> RawBasis {
    let prec = Q64::from_integer(ring.prec);
    let monos = ring.monomials(k, m);
    let mq = Q64::from_integer(m as i64);
    // one row per (n, r) with 4mn - r^2 < 0
    let mut row_index: BTreeMap<(Q64, Q64), usize> = BTreeMap::new();
    for (_, w) in &monos {
        for (n, r, _) in w.series.terms() {
            if mq * n * 4 < r * r {
                let len = row_index.len();
                row_index.entry((n, r)).or_insert(len);
            }
        }
    }
    let mut mat = SparseMatrix::new(row_index.len(), monos.len());
    for (j, (_, w)) in monos.iter().enumerate() {
        for (n, r, v) in w.series.terms() {
            if let Some(&i) = row_index.get(&(n, r)) {
                mat.set(i, j, v.clone());
            }
        }
    }
    let kernel = mat.rref().kernel();
    let kernel_dim = kernel.len();
    let combos: Vec<JacobiForm> = kernel
        .iter()
        .map(|x| {
            let mut s = QZSeries::zero(prec);
            for (c, (_, w)) in x.iter().zip(&monos) {
                if !c.is_zero() {
                    s = s.add(&w.series.scale(c));
                }
            }
            JacobiForm::from_weak(&WeakJacobiForm { weight: Q64::from_integer(k), index: mq, series: s })
        })
        .collect();
    RawBasis { kernel_dim, forms: echelonize_forms(&combos) }
}

/// Reduced echelon basis of the span of `forms`, with coordinates ordered by
/// `(n, r, component)`.
pub fn echelonize_forms(forms: &[JacobiForm]) -> Vec<JacobiForm> {
    let Some(first) = forms.first() else { return Vec::new() };
    let dim = first.rep_dim;
    let keys: BTreeSet<(Q64, Q64)> = forms.iter().flat_map(|f| f.table.keys().copied()).collect();
    let keys: Vec<(Q64, Q64)> = keys.into_iter().collect();
    let col_of: HashMap<(Q64, Q64), usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut mat = SparseMatrix::new(0, keys.len() * dim);
    for f in forms {
        mat.push_row(
            f.table.iter().flat_map(|(k, v)| v.iter().enumerate().map(|(c, x)| (col_of[k] * dim + c, x.clone()))),
        );
    }
    let prec = forms.iter().map(|f| f.prec).min().unwrap();
    mat.rref()
        .dense_rows()
        .into_iter()
        .map(|row| {
            let mut f = JacobiForm { table: BTreeMap::new(), prec, ..first.clone() };
            for (i, k) in keys.iter().enumerate() {
                f.set(k.0, k.1, row[i * dim..(i + 1) * dim].to_vec());
            }
            f
        })
        .collect()
}

/// Memoizes weak rings and raw bases across precisions.
#[derive(Default)]
pub struct JacobiBasisCache {
    rings: Mutex<HashMap<i64, Arc<WeakJacobiRing>>>,
    raw: Mutex<HashMap<(i64, u32, i64), Arc<RawBasis>>>,
}

impl JacobiBasisCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ring(&self, prec: i64) -> Arc<WeakJacobiRing> {
        if let Some(r) = self.rings.lock().unwrap().get(&prec) {
            return r.clone();
        }
        let r = Arc::new(WeakJacobiRing::new(prec));
        self.rings.lock().unwrap().entry(prec).or_insert(r).clone()
    }

    fn raw(&self, k: i64, m: u32, prec: i64) -> Arc<RawBasis> {
        if let Some(b) = self.raw.lock().unwrap().get(&(k, m, prec)) {
            return b.clone();
        }
        let b = Arc::new(raw_basis(&self.ring(prec), k, m));
        self.raw.lock().unwrap().entry((k, m, prec)).or_insert(b).clone()
    }

    /// See [`jacobi_basis`].
    pub fn basis(&self, k: &Q64, m: u32, prec: i64) -> Result<Vec<JacobiForm>> {
        if !k.is_integer() || k.to_integer() % 2 != 0 {
            return Err(Error::UnsupportedWeight(fmt_q64(k)));
        }
        let k = k.to_integer();
        // negative discriminants occur for n < m/4 only
        let needed = (m as i64 + 3) / 4;
        if prec < needed.max(1) {
            return Err(Error::PrecisionTooLow(format!("q-precision {prec} cannot see index {m} holomorphy conditions")));
        }
        let here = self.raw(k, m, prec);
        let next = self.raw(k, m, prec + 2);
        if here.forms.len() != here.kernel_dim {
            return Err(Error::PrecisionTooLow(format!(
                "J_{{{k},{m}}}: {} kernel vectors but only {} independent tables at precision {prec}",
                here.kernel_dim,
                here.forms.len()
            )));
        }
        if here.kernel_dim != next.kernel_dim || next.forms.len() != here.forms.len() {
            return Err(Error::PrecisionTooLow(format!(
                "J_{{{k},{m}}} dimension not stable between precision {prec} and {}",
                prec + 2
            )));
        }
        Ok(here.forms.clone())
    }
}

/// Echelonized basis of holomorphic `J_{k,m}` (scalar, even `k`) to
/// `q`-precision `prec`. For `m = 0` this is `M_k` spanned by `E4^a E6^b`.
pub fn jacobi_basis(k: &Q64, m: u32, prec: i64) -> Result<Vec<JacobiForm>> {
    JacobiBasisCache::new().basis(k, m, prec)
}

#[derive(Serialize, Deserialize)]
struct JacobiRepr {
    weight: String,
    index: String,
    rep_dim: usize,
    period: u32,
    prec: String,
    table: Vec<(String, String, Vec<CycNumber>)>,
}

impl Serialize for JacobiForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JacobiRepr {
            weight: fmt_q64(&self.weight),
            index: fmt_q64(&self.index),
            rep_dim: self.rep_dim,
            period: self.period,
            prec: fmt_q64(&self.prec),
            table: self.table.iter().map(|((n, r), v)| (fmt_q64(n), fmt_q64(r), v.clone())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JacobiForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = JacobiRepr::deserialize(d)?;
        let parse = |x: &str| parse_q64(x).map_err(serde::de::Error::custom);
        let mut f = JacobiForm::zero(parse(&r.weight)?, parse(&r.index)?, r.rep_dim, parse(&r.prec)?);
        f.period = r.period.max(1);
        for (n, rr, v) in r.table {
            if v.len() != r.rep_dim {
                return Err(serde::de::Error::custom("coefficient vector length differs from rep_dim"));
            }
            f.set(parse(&n)?, parse(&rr)?, v);
        }
        Ok(f)
    }
}

/// Dimension of `M_k` for even `k >= 0` (level one).
pub fn dim_modular_forms(k: i64) -> usize {
    if k < 0 || k % 2 != 0 || k == 2 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base
    } else {
        base + 1
    }
}

impl JacobiForm {
    /// The constant scalar form `1` (weight 0, index 0).
    pub fn constant(prec: Q64) -> Self {
        let mut f = JacobiForm::zero(Q64::zero(), Q64::zero(), 1, prec);
        if prec.is_positive() {
            f.set(Q64::zero(), Q64::zero(), vec![CycNumber::one()]);
        }
        f
    }
}

impl std::ops::Mul for &JacobiForm {
    type Output = JacobiForm;
    fn mul(self, rhs: Self) -> JacobiForm {
        jacobi_mul(self, rhs).expect("product of two vector-valued Jacobi forms")
    }
}
