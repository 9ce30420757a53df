//! Exact elements of cyclotomic fields `Q(zeta_N)`.
//!
//! A value is stored as its coordinate vector in the power basis
//! `1, zeta, ..., zeta^(phi(N)-1)` modulo the `N`-th cyclotomic polynomial.
//! Binary operations on values of different conductors first embed both
//! into the field of the least common multiple.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratio::{fmt_big, parse_big, Q64};

/// Reduction data for one conductor.
struct CycloData {
    phi: usize,
    /// `powers[j]` holds `zeta^j` for `0 <= j < N` in the power basis.
    powers: Vec<Vec<i64>>,
}

fn cyclo_cache() -> &'static RwLock<HashMap<u32, Arc<CycloData>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<CycloData>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn poly_cache() -> &'static RwLock<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<i64>> {
    assert!(n > 0, "cyclotomic polynomial of order 0");
    if let Some(p) = poly_cache().read().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Phi_d with d | n, d < n.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let div = cyclotomic_polynomial(d);
            num = exact_monic_division(&num, &div);
        }
    }
    let p = Arc::new(num);
    poly_cache().write().unwrap().insert(n, p.clone());
    p
}

fn exact_monic_division(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quo = vec![0i64; qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd];
        quo[i] = c;
        if c != 0 {
            for (j, &b) in den.iter().enumerate() {
                rem[i + j] = rem[i + j]
                    .checked_sub(c.checked_mul(b).expect("cyclotomic coefficient overflow"))
                    .expect("cyclotomic coefficient overflow");
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quo
}

fn cyclo_data(n: u32) -> Arc<CycloData> {
    if let Some(d) = cyclo_cache().read().unwrap().get(&n) {
        return d.clone();
    }
    let poly = cyclotomic_polynomial(n);
    let phi = poly.len() - 1;
    let mut powers = Vec::with_capacity(n as usize);
    let mut cur = vec![0i64; phi];
    cur[0] = 1;
    for _ in 0..n {
        powers.push(cur.clone());
        // multiply by zeta and reduce with the monic relation
        let top = cur[phi - 1];
        let mut next = vec![0i64; phi];
        next[1..phi].copy_from_slice(&cur[..(phi - 1)]);
        if top != 0 {
            for i in 0..phi {
                next[i] -= top * poly[i];
            }
        }
        cur = next;
    }
    let data = Arc::new(CycloData { phi, powers });
    cyclo_cache().write().unwrap().insert(n, data.clone());
    data
}

/// Euler's totient.
pub fn euler_phi(n: u32) -> usize {
    cyclo_data(n).phi
}

/// An exact element of `Q(zeta_conductor)`.
#[derive(Clone, Debug)]
pub struct CycNumber {
    conductor: u32,
    coords: Vec<BigRational>,
}

impl CycNumber {
    /// Builds a value from power-basis coordinates. The coordinate count must
    /// equal `phi(conductor)`.
    pub fn new(conductor: u32, coords: Vec<BigRational>) -> Result<Self> {
        if conductor == 0 {
            return Err(Error::Parse("conductor must be positive".into()));
        }
        if coords.len() != euler_phi(conductor) {
            return Err(Error::Parse(format!(
                "conductor {conductor} needs {} coordinates, got {}",
                euler_phi(conductor),
                coords.len()
            )));
        }
        Ok(CycNumber { conductor, coords }.simplified())
    }

    pub fn from_rational(q: BigRational) -> Self {
        CycNumber { conductor: 1, coords: vec![q] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `zeta_n^k`.
    pub fn root_of_unity(n: u32, k: i64) -> Self {
        assert!(n > 0);
        let data = cyclo_data(n);
        let j = k.rem_euclid(n as i64) as usize;
        let coords = data.powers[j].iter().map(|&c| BigRational::from_integer(c.into())).collect();
        CycNumber { conductor: n, coords }.simplified()
    }

    /// `e(x) = exp(2 pi i x)` for rational `x`.
    pub fn e(x: &Q64) -> Self {
        Self::root_of_unity(*x.denom() as u32, *x.numer())
    }

    /// `i^t`.
    pub fn i_pow(t: i64) -> Self {
        Self::root_of_unity(4, t)
    }

    /// Exact `sqrt(n)` for a positive integer, via the quadratic Gauss sum
    /// `sum_{a mod 4n} zeta_{4n}^{a^2} = 2(1+i)sqrt(n)`.
    pub fn sqrt_int(n: u32) -> Self {
        assert!(n > 0);
        let r = (n as f64).sqrt().round() as u32;
        if r * r == n {
            return Self::from_int(r as i64);
        }
        let m = 4 * n;
        let mut g = CycNumber::zero();
        for a in 0..m as i64 {
            g = &g + &Self::root_of_unity(m, a * a);
        }
        let two_one_plus_i = &Self::from_int(2) * &(&Self::one() + &Self::i_pow(1));
        (&g / &two_one_plus_i).simplified()
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().skip(1).all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coords[0].clone())
    }

    fn simplified(mut self) -> Self {
        if self.conductor > 1 && self.is_rational() {
            self.coords.truncate(1);
            self.conductor = 1;
        }
        self
    }

    /// Embeds into `Q(zeta_target)`; `conductor` must divide `target`.
    pub fn embed(&self, target: u32) -> Self {
        assert!(target.is_multiple_of(self.conductor), "{} does not divide {target}", self.conductor);
        if target == self.conductor {
            return self.clone();
        }
        let data = cyclo_data(target);
        let step = (target / self.conductor) as usize;
        let mut coords = vec![BigRational::zero(); data.phi];
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &data.powers[(j * step) % target as usize];
            for (acc, &p) in coords.iter_mut().zip(row) {
                if p != 0 {
                    *acc += c * BigRational::from_integer(p.into());
                }
            }
        }
        CycNumber { conductor: target, coords }
    }

    /// Inverse of [`embed`](Self::embed): expresses the value in
    /// `Q(zeta_target)` if it lies there.
    pub fn restrict(&self, target: u32) -> Option<Self> {
        if !self.conductor.is_multiple_of(target) {
            return None;
        }
        if target == self.conductor {
            return Some(self.clone());
        }
        if self.is_rational() {
            let mut c = vec![BigRational::zero(); euler_phi(target)];
            c[0] = self.coords[0].clone();
            return Some(CycNumber { conductor: target, coords: c });
        }
        let small = euler_phi(target);
        let cols: Vec<Vec<BigRational>> = (0..small)
            .map(|j| Self::root_of_unity(target, j as i64).embed(self.conductor).coords)
            .collect();
        let y = solve_dense(&cols, &self.coords)?;
        Some(CycNumber { conductor: target, coords: y })
    }

    /// Smallest conductor whose field contains the value.
    pub fn minimal_conductor(&self) -> u32 {
        (1..=self.conductor)
            .filter(|d| self.conductor.is_multiple_of(*d))
            .find(|&d| self.restrict(d).is_some())
            .unwrap_or(self.conductor)
    }

    /// Complex conjugation, `zeta -> zeta^(-1)`.
    pub fn conj(&self) -> Self {
        if self.conductor <= 2 {
            return self.clone();
        }
        let n = self.conductor as usize;
        let data = cyclo_data(self.conductor);
        let mut coords = vec![BigRational::zero(); data.phi];
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &data.powers[(n - j) % n];
            for (acc, &p) in coords.iter_mut().zip(row) {
                if p != 0 {
                    *acc += c * BigRational::from_integer(p.into());
                }
            }
        }
        CycNumber { conductor: self.conductor, coords }.simplified()
    }

    fn lift_pair(&self, other: &Self) -> (std::borrow::Cow<'_, Self>, Self, u32) {
        use std::borrow::Cow;
        if self.conductor == other.conductor {
            return (Cow::Borrowed(self), other.clone(), self.conductor);
        }
        let l = self.conductor.lcm(&other.conductor);
        (Cow::Owned(self.embed(l)), other.embed(l), l)
    }

    fn add_ref(&self, other: &Self) -> Self {
        if self.conductor == 1 && other.conductor == 1 {
            return Self::from_rational(&self.coords[0] + &other.coords[0]);
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let (a, b, l) = self.lift_pair(other);
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
        CycNumber { conductor: l, coords }.simplified()
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if self.conductor == 1 && other.conductor == 1 {
            return Self::from_rational(&self.coords[0] * &other.coords[0]);
        }
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.conductor == 1 {
            return other.scale(&self.coords[0]);
        }
        if other.conductor == 1 {
            return self.scale(&other.coords[0]);
        }
        let (a, b, l) = self.lift_pair(other);
        let data = cyclo_data(l);
        let phi = data.phi;
        let mut prod = vec![BigRational::zero(); 2 * phi - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let mut coords: Vec<BigRational> = prod[..phi].to_vec();
        for (j, c) in prod.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            let row = &data.powers[j % l as usize];
            for (acc, &p) in coords.iter_mut().zip(row) {
                if p != 0 {
                    *acc += c * BigRational::from_integer(p.into());
                }
            }
        }
        CycNumber { conductor: l, coords }.simplified()
    }

    /// Multiplies by a rational.
    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        CycNumber { conductor: self.conductor, coords: self.coords.iter().map(|c| c * q).collect() }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Self::from_rational(self.coords[0].recip()));
        }
        // Solve (self * y) = 1 through the multiplication matrix.
        let phi = self.coords.len();
        let cols: Vec<Vec<BigRational>> = (0..phi)
            .map(|j| {
                let mut coords = self.mul_ref(&Self::root_of_unity(self.conductor, j as i64));
                if coords.conductor != self.conductor {
                    coords = coords.embed(self.conductor);
                }
                coords.coords
            })
            .collect();
        let mut rhs = vec![BigRational::zero(); phi];
        rhs[0] = BigRational::one();
        let y = solve_dense(&cols, &rhs).ok_or(Error::DivisionByZero)?;
        Ok(CycNumber { conductor: self.conductor, coords: y }.simplified())
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_ref(&other.inverse()?))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

/// Solves `sum_j y_j cols[j] = rhs` exactly; `None` if inconsistent or singular.
fn solve_dense(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let nrows = rhs.len();
    let ncols = cols.len();
    // augmented row-major system
    let mut a: Vec<Vec<BigRational>> = (0..nrows)
        .map(|i| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..=ncols {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() < ncols {
        return None;
    }
    if a[r..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    Some((0..ncols).map(|i| a[i][ncols].clone()).collect())
}

impl Zero for CycNumber {
    fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

impl One for CycNumber {
    fn one() -> Self {
        Self::from_rational(BigRational::one())
    }
}

impl PartialEq for CycNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coords == other.coords;
        }
        let (a, b, _) = self.lift_pair(other);
        a.coords == b.coords
    }
}

impl Eq for CycNumber {}

impl Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        CycNumber { conductor: self.conductor, coords: self.coords.iter().map(|c| -c).collect() }
    }
}

impl Neg for CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        -&self
    }
}

impl Add<&CycNumber> for &CycNumber {
    type Output = CycNumber;
    fn add(self, rhs: &CycNumber) -> CycNumber {
        self.add_ref(rhs)
    }
}

impl Sub<&CycNumber> for &CycNumber {
    type Output = CycNumber;
    fn sub(self, rhs: &CycNumber) -> CycNumber {
        self.add_ref(&-rhs)
    }
}

impl Mul<&CycNumber> for &CycNumber {
    type Output = CycNumber;
    fn mul(self, rhs: &CycNumber) -> CycNumber {
        self.mul_ref(rhs)
    }
}

impl Div<&CycNumber> for &CycNumber {
    type Output = CycNumber;
    /// Panics on division by zero; use [`CycNumber::checked_div`] otherwise.
    fn div(self, rhs: &CycNumber) -> CycNumber {
        self.checked_div(rhs).expect("division by zero")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<CycNumber> for CycNumber {
            type Output = CycNumber;
            fn $f(self, rhs: CycNumber) -> CycNumber { (&self).$f(&rhs) }
        }
        impl $tr<&CycNumber> for CycNumber {
            type Output = CycNumber;
            fn $f(self, rhs: &CycNumber) -> CycNumber { (&self).$f(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

/// The arithmetic operations exposed by [`cyc_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycOp {
    Add,
    Mul,
    Div,
}

pub fn cyc_arith(a: &CycNumber, b: &CycNumber, op: CycOp) -> Result<CycNumber> {
    match op {
        CycOp::Add => Ok(a + b),
        CycOp::Mul => Ok(a * b),
        CycOp::Div => a.checked_div(b),
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, abs) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{}", fmt_big(&abs))?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{}*", fmt_big(&abs))?;
                    }
                    write!(f, "z{}", self.conductor)?;
                    if j > 1 {
                        write!(f, "^{j}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycRepr {
    conductor: u32,
    coords: Vec<String>,
}

impl Serialize for CycNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycRepr { conductor: self.conductor, coords: self.coords.iter().map(fmt_big).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CycRepr::deserialize(d)?;
        let coords = r
            .coords
            .iter()
            .map(|s| parse_big(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        // keep the stored conductor so that write/read/write is byte-stable
        if r.conductor == 0 || coords.len() != euler_phi(r.conductor) {
            return Err(serde::de::Error::custom("coordinate count does not match conductor"));
        }
        Ok(CycNumber { conductor: r.conductor, coords })
    }
}
