//! Truncated Laurent series in `q` (possibly with fractional exponents) and
//! in `(q, zeta)`, plus the classical building blocks: Eisenstein series,
//! the Dedekind eta function and the Jacobi theta functions.
//!
//! Exponents are stored as integer numerators over a per-series denominator.
//! Every series carries a rational precision `prec`: coefficients of
//! exponents `< prec` are exact, everything above is unknown.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::ratio::{fmt_q64, parse_q64, q64, Q64};

/// Precision of a truncated Laurent product: `a` is exact below `pa` and
/// `b` starts at `vb`, so the unknown tail of `a` first shows up at `pa + vb`.
fn product_prec(pa: Q64, va: Q64, pb: Q64, vb: Q64) -> Q64 {
    (pa + vb).min(pb + va)
}

/// Smallest integer key `j` with `j / d >= prec`.
fn key_bound(prec: Q64, d: u32) -> i64 {
    (prec * d as i64).ceil().to_integer()
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, CycNumber>, key: K, v: CycNumber) {
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(e) => {
            if !v.is_zero() {
                e.insert(v);
            }
        }
        Entry::Occupied(mut e) => {
            let s = e.get() + &v;
            if s.is_zero() {
                e.remove();
            } else {
                e.insert(s);
            }
        }
    }
}

/// Truncated Laurent series in `q^(1/denom)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    denom: u32,
    prec: Q64,
    coeffs: BTreeMap<i64, CycNumber>,
}

impl QSeries {
    pub fn zero(prec: Q64) -> Self {
        QSeries { denom: 1, prec, coeffs: BTreeMap::new() }
    }

    pub fn one(prec: Q64) -> Self {
        Self::monomial(CycNumber::one(), q64(0, 1), prec)
    }

    pub fn monomial(c: CycNumber, exp: Q64, prec: Q64) -> Self {
        let denom = *exp.denom() as u32;
        let mut s = QSeries { denom, prec, coeffs: BTreeMap::new() };
        if exp < prec {
            add_into(&mut s.coeffs, *exp.numer(), c);
        }
        s
    }

    /// Series with integer exponents from a dense coefficient list.
    pub fn from_ints(coeffs: &[i64], prec: Q64) -> Self {
        let mut s = Self::zero(prec);
        for (i, &c) in coeffs.iter().enumerate() {
            if Q64::from_integer(i as i64) < prec {
                add_into(&mut s.coeffs, i as i64, CycNumber::from_int(c));
            }
        }
        s
    }

    /// Builds a series from `(exponent, coefficient)` pairs; terms at or
    /// beyond `prec` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (Q64, CycNumber)>, prec: Q64) -> Self {
        let terms: Vec<_> = terms.into_iter().collect();
        let denom = terms.iter().fold(1i64, |d, (e, _)| d.lcm(e.denom())) as u32;
        let mut s = QSeries { denom, prec, coeffs: BTreeMap::new() };
        for (e, c) in terms {
            if e < prec {
                add_into(&mut s.coeffs, (e * denom as i64).to_integer(), c);
            }
        }
        s.normalized()
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn prec(&self) -> Q64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest exponent with nonzero coefficient, or `prec` for zero.
    pub fn valuation(&self) -> Q64 {
        self.coeffs.keys().next().map_or(self.prec, |&k| q64(k, self.denom as i64))
    }

    pub fn coeff(&self, exp: Q64) -> CycNumber {
        let scaled = exp * self.denom as i64;
        if !scaled.is_integer() {
            return CycNumber::zero();
        }
        self.coeffs.get(&scaled.to_integer()).cloned().unwrap_or_else(CycNumber::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Q64, &CycNumber)> {
        let d = self.denom as i64;
        self.coeffs.iter().map(move |(&k, v)| (q64(k, d), v))
    }

    fn rescaled(&self, denom: u32) -> Self {
        if denom == self.denom {
            return self.clone();
        }
        let f = (denom / self.denom) as i64;
        QSeries {
            denom,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|(&k, v)| (k * f, v.clone())).collect(),
        }
    }

    /// Reduces the exponent denominator as far as the support allows.
    pub fn normalized(mut self) -> Self {
        let g = self.coeffs.keys().fold(self.denom as i64, |g, &k| g.gcd(&k));
        if g > 1 {
            self.denom /= g as u32;
            self.coeffs = self.coeffs.into_iter().map(|(k, v)| (k / g, v)).collect();
        }
        self
    }

    pub fn truncate(&self, prec: Q64) -> Self {
        let prec = prec.min(self.prec);
        let bound = key_bound(prec, self.denom);
        QSeries {
            denom: self.denom,
            prec,
            coeffs: self.coeffs.range(..bound).map(|(&k, v)| (k, v.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.denom.lcm(&other.denom);
        let (a, b) = (self.rescaled(d), other.rescaled(d));
        let prec = a.prec.min(b.prec);
        let mut out = a.truncate(prec);
        for (k, v) in b.coeffs {
            if q64(k, d as i64) < prec {
                add_into(&mut out.coeffs, k, v);
            }
        }
        out.normalized()
    }

    pub fn neg(&self) -> Self {
        QSeries { denom: self.denom, prec: self.prec, coeffs: self.coeffs.iter().map(|(&k, v)| (k, -v)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &CycNumber) -> Self {
        let mut out = QSeries::zero(self.prec);
        out.denom = self.denom;
        for (&k, v) in &self.coeffs {
            add_into(&mut out.coeffs, k, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.denom.lcm(&other.denom);
        let (a, b) = (self.rescaled(d), other.rescaled(d));
        let prec = product_prec(a.prec, a.valuation(), b.prec, b.valuation());
        let bound = key_bound(prec, d);
        let mut coeffs = BTreeMap::new();
        for (&ka, va) in &a.coeffs {
            for (&kb, vb) in &b.coeffs {
                if ka + kb >= bound {
                    break;
                }
                add_into(&mut coeffs, ka + kb, va * vb);
            }
        }
        QSeries { denom: d, prec, coeffs }.normalized()
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return QSeries::one(self.prec);
        }
        let mut acc: Option<QSeries> = None;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc.unwrap()
    }

    /// Multiplicative inverse as a Laurent series.
    pub fn inverse(&self) -> Result<Self> {
        let Some((&e, lead)) = self.coeffs.iter().next() else {
            return Err(Error::ZeroDivisor);
        };
        let d = self.denom as i64;
        let v = q64(e, d);
        // relative precision of the unit part
        let rel = key_bound(self.prec - v, self.denom);
        let unit: Vec<CycNumber> = (0..rel).map(|j| self.coeffs.get(&(e + j)).cloned().unwrap_or_else(CycNumber::zero)).collect();
        let w0 = lead.inverse()?;
        let mut w: Vec<CycNumber> = Vec::with_capacity(rel as usize);
        w.push(w0.clone());
        for j in 1..rel as usize {
            let mut s = CycNumber::zero();
            for i in 1..=j {
                if !unit[i].is_zero() && !w[j - i].is_zero() {
                    s = &s + &(&unit[i] * &w[j - i]);
                }
            }
            w.push(-(&w0 * &s));
        }
        let mut coeffs = BTreeMap::new();
        for (j, c) in w.into_iter().enumerate() {
            if !c.is_zero() {
                coeffs.insert(j as i64 - e, c);
            }
        }
        Ok(QSeries { denom: self.denom, prec: self.prec - v - v, coeffs }.normalized())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Agreement on all exponents below both precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let p = self.prec.min(other.prec);
        self.truncate(p).sub(&other.truncate(p)).is_zero()
    }
}

/// Truncated series in `q^(1/denom_q)` whose coefficients are Laurent
/// polynomials in `zeta^(1/denom_z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QZSeries {
    denom_q: u32,
    denom_z: u32,
    prec: Q64,
    coeffs: BTreeMap<(i64, i64), CycNumber>,
}

impl QZSeries {
    pub fn zero(prec: Q64) -> Self {
        QZSeries { denom_q: 1, denom_z: 1, prec, coeffs: BTreeMap::new() }
    }

    pub fn one(prec: Q64) -> Self {
        Self::from_terms([(q64(0, 1), q64(0, 1), CycNumber::one())], prec)
    }

    /// Builds a series from `(n, r, coefficient)` triples; terms with
    /// `n >= prec` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (Q64, Q64, CycNumber)>, prec: Q64) -> Self {
        let terms: Vec<_> = terms.into_iter().collect();
        let dq = terms.iter().fold(1i64, |d, (n, _, _)| d.lcm(n.denom())) as u32;
        let dz = terms.iter().fold(1i64, |d, (_, r, _)| d.lcm(r.denom())) as u32;
        let mut s = QZSeries { denom_q: dq, denom_z: dz, prec, coeffs: BTreeMap::new() };
        for (n, r, c) in terms {
            if n < prec {
                add_into(&mut s.coeffs, ((n * dq as i64).to_integer(), (r * dz as i64).to_integer()), c);
            }
        }
        s.normalized()
    }

    pub fn from_qseries(s: &QSeries) -> Self {
        QZSeries {
            denom_q: s.denom,
            denom_z: 1,
            prec: s.prec,
            coeffs: s.coeffs.iter().map(|(&k, v)| ((k, 0), v.clone())).collect(),
        }
    }

    pub fn denoms(&self) -> (u32, u32) {
        (self.denom_q, self.denom_z)
    }

    pub fn prec(&self) -> Q64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Q64 {
        self.coeffs.keys().next().map_or(self.prec, |&(k, _)| q64(k, self.denom_q as i64))
    }

    pub fn coeff(&self, n: Q64, r: Q64) -> CycNumber {
        let (sn, sr) = (n * self.denom_q as i64, r * self.denom_z as i64);
        if !sn.is_integer() || !sr.is_integer() {
            return CycNumber::zero();
        }
        self.coeffs.get(&(sn.to_integer(), sr.to_integer())).cloned().unwrap_or_else(CycNumber::zero)
    }

    /// `(n, r, coefficient)` in increasing `(n, r)` order.
    pub fn terms(&self) -> impl Iterator<Item = (Q64, Q64, &CycNumber)> {
        let (dq, dz) = (self.denom_q as i64, self.denom_z as i64);
        self.coeffs.iter().map(move |(&(a, b), v)| (q64(a, dq), q64(b, dz), v))
    }

    /// Coefficient of `q^n` as a map `r -> value`.
    pub fn zeta_poly(&self, n: Q64) -> BTreeMap<Q64, CycNumber> {
        self.terms().filter(|(m, _, _)| *m == n).map(|(_, r, v)| (r, v.clone())).collect()
    }

    fn rescaled(&self, dq: u32, dz: u32) -> Self {
        if dq == self.denom_q && dz == self.denom_z {
            return self.clone();
        }
        let (fq, fz) = ((dq / self.denom_q) as i64, (dz / self.denom_z) as i64);
        QZSeries {
            denom_q: dq,
            denom_z: dz,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|(&(a, b), v)| ((a * fq, b * fz), v.clone())).collect(),
        }
    }

    pub fn normalized(mut self) -> Self {
        let gq = self.coeffs.keys().fold(self.denom_q as i64, |g, &(a, _)| g.gcd(&a));
        let gz = self.coeffs.keys().fold(self.denom_z as i64, |g, &(_, b)| g.gcd(&b));
        if gq > 1 || gz > 1 {
            self.denom_q /= gq as u32;
            self.denom_z /= gz as u32;
            self.coeffs = self.coeffs.into_iter().map(|((a, b), v)| ((a / gq, b / gz), v)).collect();
        }
        self
    }

    pub fn truncate(&self, prec: Q64) -> Self {
        let prec = prec.min(self.prec);
        let bound = key_bound(prec, self.denom_q);
        QZSeries {
            denom_q: self.denom_q,
            denom_z: self.denom_z,
            prec,
            coeffs: self.coeffs.range(..(bound, i64::MIN)).map(|(&k, v)| (k, v.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let dq = self.denom_q.lcm(&other.denom_q);
        let dz = self.denom_z.lcm(&other.denom_z);
        let (a, b) = (self.rescaled(dq, dz), other.rescaled(dq, dz));
        let prec = a.prec.min(b.prec);
        let mut out = a.truncate(prec);
        let bound = key_bound(prec, dq);
        for (k, v) in b.coeffs {
            if k.0 < bound {
                add_into(&mut out.coeffs, k, v);
            }
        }
        out.normalized()
    }

    pub fn neg(&self) -> Self {
        QZSeries { coeffs: self.coeffs.iter().map(|(&k, v)| (k, -v)).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &CycNumber) -> Self {
        let mut coeffs = BTreeMap::new();
        for (&k, v) in &self.coeffs {
            add_into(&mut coeffs, k, v * c);
        }
        QZSeries { coeffs, ..self.clone() }
    }

    /// Multiplies by `q^n zeta^r`; the precision shifts by `n`.
    pub fn shift(&self, n: Q64, r: Q64) -> Self {
        let dq = self.denom_q.lcm(&(*n.denom() as u32));
        let dz = self.denom_z.lcm(&(*r.denom() as u32));
        let s = self.rescaled(dq, dz);
        let (sn, sr) = ((n * dq as i64).to_integer(), (r * dz as i64).to_integer());
        QZSeries {
            denom_q: dq,
            denom_z: dz,
            prec: self.prec + n,
            coeffs: s.coeffs.into_iter().map(|((a, b), v)| ((a + sn, b + sr), v)).collect(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let dq = self.denom_q.lcm(&other.denom_q);
        let dz = self.denom_z.lcm(&other.denom_z);
        let (a, b) = (self.rescaled(dq, dz), other.rescaled(dq, dz));
        let prec = product_prec(a.prec, a.valuation(), b.prec, b.valuation());
        let bound = key_bound(prec, dq);
        let mut coeffs = BTreeMap::new();
        for (&(na, ra), va) in &a.coeffs {
            if na + b.coeffs.keys().next().map_or(i64::MAX / 2, |k| k.0) >= bound {
                break;
            }
            for (&(nb, rb), vb) in &b.coeffs {
                if na + nb >= bound {
                    break;
                }
                add_into(&mut coeffs, (na + nb, ra + rb), va * vb);
            }
        }
        QZSeries { denom_q: dq, denom_z: dz, prec, coeffs }.normalized()
    }

    pub fn mul_q(&self, s: &QSeries) -> Self {
        self.mul(&QZSeries::from_qseries(s))
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return QZSeries::one(self.prec);
        }
        let mut acc: Option<QZSeries> = None;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc.unwrap()
    }

    /// Specializes `zeta = 1`.
    pub fn at_zeta_one(&self) -> QSeries {
        let mut coeffs = BTreeMap::new();
        for (&(a, _), v) in &self.coeffs {
            add_into(&mut coeffs, a, v.clone());
        }
        QSeries { denom: self.denom_q, prec: self.prec, coeffs }.normalized()
    }

    /// Agreement on all `q`-exponents below both precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let p = self.prec.min(other.prec);
        self.truncate(p).sub(&other.truncate(p)).is_zero()
    }
}

/// Truncated product `a * b`.
pub fn series_mul(a: &QZSeries, b: &QZSeries) -> QZSeries {
    a.mul(b)
}

/// Exact truncated quotient `a / b` by a pure `q`-series.
pub fn series_div(a: &QZSeries, b: &QSeries) -> Result<QZSeries> {
    Ok(a.mul_q(&b.inverse()?))
}

/// Bernoulli number `B_n` (with `B_1 = -1/2`).
pub fn bernoulli(n: usize) -> BigRational {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        // sum_{j<=m} C(m+1, j) B_j = 0
        let mut s = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b.pop().unwrap()
}

fn sigma(n: i64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            if d * d != n {
                s += BigInt::from(n / d).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// Normalized Eisenstein series `E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n`
/// to integer precision `prec`.
pub fn eisenstein_q(k: i64, prec: i64) -> Result<QSeries> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::BadWeight(k.to_string()));
    }
    let factor = -BigRational::from_integer(BigInt::from(2 * k)) / bernoulli(k as usize);
    let mut s = QSeries::zero(Q64::from_integer(prec));
    if prec > 0 {
        s.coeffs.insert(0, CycNumber::one());
    }
    for n in 1..prec {
        let c = &factor * BigRational::from_integer(sigma(n, (k - 1) as u32));
        add_into(&mut s.coeffs, n, CycNumber::from_rational(c));
    }
    Ok(s)
}

/// Dedekind eta `q^(1/24) prod (1 - q^n)` via the pentagonal number theorem.
pub fn eta(prec: Q64) -> QSeries {
    let mut terms = Vec::new();
    // exponent 1/24 + k(3k-1)/2 = (6k-1)^2 / 24
    let mut k: i64 = 0;
    loop {
        let mut any = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = q64((6 * kk - 1) * (6 * kk - 1), 24);
            if e < prec {
                any = true;
                terms.push((e, CycNumber::from_int(if kk % 2 == 0 { 1 } else { -1 })));
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    let mut s = QSeries { denom: 24, prec, coeffs: BTreeMap::new() };
    for (e, c) in terms {
        add_into(&mut s.coeffs, (e * 24).to_integer(), c);
    }
    s
}

/// `sum_{j in Z} sign(j) q^(nu^2/2) zeta^nu` with `nu = j` or `nu = j + 1/2`,
/// shared by the four Jacobi theta functions.
fn theta_sum(prec: Q64, half_shift: bool, alternating: bool) -> QZSeries {
    let bound = (2.0 * (*prec.numer() as f64 / *prec.denom() as f64)).max(0.0).sqrt() as i64 + 2;
    let terms = (-bound..=bound).filter_map(|j| {
        let nu = if half_shift { q64(2 * j + 1, 2) } else { q64(j, 1) };
        let e = nu * nu / 2;
        let sign = if alternating && j.rem_euclid(2) == 1 { -1 } else { 1 };
        (e < prec).then(|| (e, nu, CycNumber::from_int(sign)))
    });
    QZSeries::from_terms(terms.collect::<Vec<_>>(), prec)
}

/// Odd Jacobi theta `sum_n (-1)^n q^((n+1/2)^2/2) zeta^(n+1/2)`, with leading
/// term `q^(1/8)(zeta^(1/2) - zeta^(-1/2))`.
pub fn theta11(prec: Q64) -> QZSeries {
    theta_sum(prec, true, true)
}

/// `theta_2(tau, z) = sum_n q^((n+1/2)^2/2) zeta^(n+1/2)`.
pub fn theta2(prec: Q64) -> QZSeries {
    theta_sum(prec, true, false)
}

/// `theta_3(tau, z) = sum_n q^(n^2/2) zeta^n`.
pub fn theta3(prec: Q64) -> QZSeries {
    theta_sum(prec, false, false)
}

/// `theta_4(tau, z) = sum_n (-1)^n q^(n^2/2) zeta^n`.
pub fn theta4(prec: Q64) -> QZSeries {
    theta_sum(prec, false, true)
}

/// Dedekind eta and the odd Jacobi theta function to precision `prec`.
pub fn eta_theta(prec: Q64) -> (QSeries, QZSeries) {
    (eta(prec), theta11(prec))
}

/// `Delta = eta^24` to integer precision `prec`.
pub fn delta(prec: i64) -> QSeries {
    eta(Q64::from_integer(prec) - q64(23, 24)).pow(24).truncate(Q64::from_integer(prec))
}

#[derive(Serialize, Deserialize)]
struct QZRepr {
    prec: String,
    terms: Vec<(String, String, CycNumber)>,
}

impl Serialize for QZSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QZRepr {
            prec: fmt_q64(&self.prec),
            terms: self.terms().map(|(n, r, v)| (fmt_q64(&n), fmt_q64(&r), v.clone())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QZSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QZRepr::deserialize(d)?;
        let parse = |x: &str| parse_q64(x).map_err(serde::de::Error::custom);
        let prec = parse(&r.prec)?;
        let mut terms = Vec::with_capacity(r.terms.len());
        for (n, z, v) in &r.terms {
            let n = parse(n)?;
            if n >= prec {
                return Err(serde::de::Error::custom("term beyond precision"));
            }
            terms.push((n, parse(z)?, v.clone()));
        }
        Ok(QZSeries::from_terms(terms, prec))
    }
}

#[derive(Serialize, Deserialize)]
struct QRepr {
    prec: String,
    terms: Vec<(String, CycNumber)>,
}

impl Serialize for QSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QRepr { prec: fmt_q64(&self.prec), terms: self.terms().map(|(n, v)| (fmt_q64(&n), v.clone())).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QRepr::deserialize(d)?;
        let parse = |x: &str| parse_q64(x).map_err(serde::de::Error::custom);
        let prec = parse(&r.prec)?;
        let mut terms = Vec::with_capacity(r.terms.len());
        for (n, v) in &r.terms {
            terms.push((parse(n)?, v.clone()));
        }
        Ok(QSeries::from_terms(terms, prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Q64 {
        Q64::from_integer(n)
    }

    fn int_coeffs(s: &QSeries, upto: i64) -> Vec<i64> {
        (0..upto)
            .map(|n| {
                let c = s.coeff(q(n)).to_rational().unwrap();
                assert!(c.is_integer());
                i64::try_from(c.to_integer()).unwrap()
            })
            .collect()
    }

    /// Laurent polynomial in zeta from integer pairs `(r, c)`.
    fn zpoly(n: Q64, terms: &[(i64, i64)], prec: Q64) -> QZSeries {
        QZSeries::from_terms(terms.iter().map(|&(r, c)| (n, q(r), CycNumber::from_int(c))), prec)
    }

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli(2), BigRational::new(1.into(), 6.into()));
        assert_eq!(bernoulli(4), BigRational::new((-1).into(), 30.into()));
        assert_eq!(bernoulli(12), BigRational::new((-691).into(), 2730.into()));
    }

    #[test]
    fn eisenstein_series() {
        let e4 = eisenstein_q(4, 3).unwrap();
        assert_eq!(int_coeffs(&e4, 3), vec![1, 240, 2160]);
        let e6 = eisenstein_q(6, 3).unwrap();
        assert_eq!(int_coeffs(&e6, 3), vec![1, -504, -16632]);
        assert_eq!(eisenstein_q(8, 5).unwrap().coeff(q(0)), CycNumber::one());
        assert!(matches!(eisenstein_q(5, 3), Err(Error::BadWeight(_))));
        assert!(matches!(eisenstein_q(2, 3), Err(Error::BadWeight(_))));
    }

    #[test]
    fn unit_and_zeta_products() {
        let a = zpoly(q(0), &[(1, 1), (-1, 1)], q(3));
        assert_eq!(series_mul(&a, &QZSeries::one(q(3))), a);
        let b = zpoly(q(0), &[(1, 1), (-1, -1)], q(3));
        assert_eq!(series_mul(&a, &b), zpoly(q(0), &[(2, 1), (-2, -1)], q(3)));
    }

    #[test]
    fn geometric_series_and_division_by_one() {
        let one_minus_q = QSeries::from_ints(&[1, -1], q(6));
        let inv = one_minus_q.inverse().unwrap();
        assert_eq!(int_coeffs(&inv, 6), vec![1; 6]);
        assert_eq!(inv.prec(), q(6));
        let a = zpoly(q(1), &[(2, 3)], q(4));
        assert_eq!(series_div(&a, &QSeries::one(q(4))).unwrap(), a);
        assert_eq!(series_div(&a, &QSeries::zero(q(4))), Err(Error::ZeroDivisor));
    }

    #[test]
    fn inverse_of_e4_matches_recursive_oracle() {
        // oracle: w0 = 1, w_j = -sum_{i=1..j} e_i w_{j-i} with e = (1, 240, 2160)
        let e = [1i64, 240, 2160];
        let mut w = vec![1i64];
        for j in 1..3 {
            w.push(-(1..=j).map(|i| e[i] * w[j - i]).sum::<i64>());
        }
        assert_eq!(w, vec![1, -240, 55440]);
        let inv = eisenstein_q(4, 3).unwrap().inverse().unwrap();
        assert_eq!(int_coeffs(&inv, 3), w);
    }

    #[test]
    fn laurent_inverse_tracks_precision() {
        let d = delta(6);
        let inv = d.inverse().unwrap();
        assert_eq!(inv.valuation(), q(-1));
        assert_eq!(inv.prec(), q(4));
        let one = d.mul(&inv);
        assert_eq!(one.prec(), q(5));
        assert!(one.agrees_with(&QSeries::one(q(5))));
    }

    #[test]
    fn eta_and_delta() {
        let (eta, _) = eta_theta(q(3));
        assert_eq!(eta.valuation(), q64(1, 24));
        assert_eq!(eta.coeff(q64(1, 24)), CycNumber::one());
        assert_eq!(eta.denom(), 24);
        let d = delta(5);
        assert_eq!(int_coeffs(&d, 5), vec![0, 1, -24, 252, -1472]);
        // cross-check against (E4^3 - E6^2) / 1728
        let e4 = eisenstein_q(4, 5).unwrap();
        let e6 = eisenstein_q(6, 5).unwrap();
        let alt = e4.pow(3).sub(&e6.pow(2)).scale(&CycNumber::from_rational(BigRational::new(1.into(), 1728.into())));
        assert_eq!(alt, d);
    }

    #[test]
    fn theta_leading_terms() {
        let t = theta11(q(2));
        assert_eq!(t.valuation(), q64(1, 8));
        assert_eq!(t.coeff(q64(1, 8), q64(1, 2)), CycNumber::one());
        assert_eq!(t.coeff(q64(1, 8), q64(-1, 2)), CycNumber::from_int(-1));
        let sq = t.pow(2);
        let lead: BTreeMap<Q64, CycNumber> = sq.zeta_poly(q64(1, 4));
        let expect: BTreeMap<Q64, CycNumber> =
            [(q(-1), 1), (q(0), -2), (q(1), 1)].into_iter().map(|(r, c)| (r, CycNumber::from_int(c))).collect();
        assert_eq!(lead, expect);
        // theta_3 and theta_4 agree up to sign pattern
        assert_eq!(theta3(q(3)).coeff(q64(1, 2), q(1)), CycNumber::one());
        assert_eq!(theta4(q(3)).coeff(q64(1, 2), q(-1)), CycNumber::from_int(-1));
        assert_eq!(theta2(q(3)).coeff(q64(9, 8), q64(-3, 2)), CycNumber::one());
    }

    #[test]
    fn jacobi_triple_product_check() {
        // theta11 = q^(1/8)(z^(1/2) - z^(-1/2)) prod (1-q^n)(1-q^n z)(1-q^n/z)
        let prec = q(4);
        let mut prod = QZSeries::from_terms(
            [(q64(1, 8), q64(1, 2), CycNumber::one()), (q64(1, 8), q64(-1, 2), CycNumber::from_int(-1))],
            prec,
        );
        for n in 1..4 {
            for r in [0, 1, -1] {
                let f = QZSeries::from_terms(
                    [(q(0), q(0), CycNumber::one()), (q(n), q(r), CycNumber::from_int(-1))],
                    prec,
                );
                prod = prod.mul(&f);
            }
        }
        assert!(prod.agrees_with(&theta11(prec)));
    }

    #[test]
    fn serialization_is_sorted_triples() {
        let s = zpoly(q64(1, 2), &[(1, 2), (-1, 3)], q(1));
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(
            js,
            r#"{"prec":"1","terms":[["1/2","-1",{"conductor":1,"coords":["3"]}],["1/2","1",{"conductor":1,"coords":["2"]}]]}"#
        );
        let back: QZSeries = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }

    fn arb_qz() -> impl Strategy<Value = QZSeries> {
        prop::collection::vec((0i64..4, -2i64..3, -5i64..6), 1..8).prop_map(|t| {
            QZSeries::from_terms(t.into_iter().map(|(n, r, c)| (q(n), q(r), CycNumber::from_int(c))), q(4))
        })
    }

    fn arb_unit() -> impl Strategy<Value = QSeries> {
        (1i64..4, prop::collection::vec(-4i64..5, 4)).prop_map(|(lead, rest)| {
            let mut c = vec![lead];
            c.extend(rest);
            QSeries::from_ints(&c, q(4))
        })
    }

    proptest! {
        #[test]
        fn mul_commutative_associative(a in arb_qz(), b in arb_qz(), c in arb_qz()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert!(a.mul(&b).mul(&c).agrees_with(&a.mul(&b.mul(&c))));
        }

        #[test]
        fn div_undoes_mul(a in arb_qz(), b in arb_unit()) {
            let prod = a.mul_q(&b);
            let back = series_div(&prod, &b).unwrap();
            prop_assert!(back.agrees_with(&a));
        }
    }
}
