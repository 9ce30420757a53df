//! Representations given extensionally by the images of `delta` and the two
//! central elements `(-1, 1)`, `(1, -1)` of the metaplectic group.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::linalg::{CycMatrix, SparseMatrix};
use crate::ratio::{fmt_q64, frac, parse_q64, q64, Q64};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub dim: usize,
    pub level: u32,
    pub delta: CycMatrix,
    pub c1: CycMatrix,
    pub c2: CycMatrix,
    /// Optional images of further named elements (Jacobi-group generators).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, CycMatrix>,
}

impl Representation {
    pub fn new(level: u32, delta: CycMatrix, c1: CycMatrix, c2: CycMatrix) -> Result<Self> {
        let dim = delta.nrows();
        for (name, m) in [("delta", &delta), ("c1", &c1), ("c2", &c2)] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::IncompatibleShapes(format!("{name} is not {dim}x{dim}")));
            }
        }
        Ok(Representation { dim, level: level.max(1), delta, c1, c2, extra: BTreeMap::new() })
    }

    /// One-dimensional representation with the given scalar images.
    pub fn character(level: u32, delta: CycNumber, c1: CycNumber, c2: CycNumber) -> Self {
        let m = |x: CycNumber| CycMatrix(vec![vec![x]]);
        Representation::new(level, m(delta), m(c1), m(c2)).expect("1x1 images")
    }

    pub fn is_trivial(&self) -> bool {
        self.dim == 1 && self.delta.is_identity() && self.c1.is_identity() && self.c2.is_identity()
    }
}

pub fn rep_trivial() -> Representation {
    rep_trivial_dim(1)
}

/// The trivial representation on `C^d`.
pub fn rep_trivial_dim(d: usize) -> Representation {
    let id = CycMatrix::identity(d);
    Representation::new(1, id.clone(), id.clone(), id).expect("identity images")
}

/// Contragredient: every image replaced by its transpose-inverse.
pub fn rep_dual(rho: &Representation) -> Representation {
    let ti = |m: &CycMatrix| m.inverse().expect("representation images are invertible").transpose();
    Representation {
        dim: rho.dim,
        level: rho.level,
        delta: ti(&rho.delta),
        c1: ti(&rho.c1),
        c2: ti(&rho.c2),
        extra: rho.extra.iter().map(|(k, m)| (k.clone(), ti(m))).collect(),
    }
}

/// `rho (x) sigma` with basis `e_i (x) f_j` at position `i * dim(sigma) + j`.
pub fn rep_tensor(rho: &Representation, sigma: &Representation) -> Representation {
    Representation {
        dim: rho.dim * sigma.dim,
        level: rho.level.lcm(&sigma.level),
        delta: rho.delta.kron(&sigma.delta),
        c1: rho.c1.kron(&sigma.c1),
        c2: rho.c2.kron(&sigma.c2),
        extra: rho
            .extra
            .iter()
            .filter_map(|(k, a)| sigma.extra.get(k).map(|b| (k.clone(), a.kron(b))))
            .collect(),
    }
}

/// `Hom(V_rho, V_sigma)` acting by `lambda -> sigma lambda rho^-1`, with
/// `lambda` flattened row-major (`lambda[i][j]` at `i * dim(rho) + j`).
pub fn rep_hom(rho: &Representation, sigma: &Representation) -> Representation {
    rep_tensor(sigma, &rep_dual(rho))
}

pub fn rep_dsum(rho: &Representation, sigma: &Representation) -> Representation {
    Representation {
        dim: rho.dim + sigma.dim,
        level: rho.level.lcm(&sigma.level),
        delta: rho.delta.block_diag(&sigma.delta),
        c1: rho.c1.block_diag(&sigma.c1),
        c2: rho.c2.block_diag(&sigma.c2),
        extra: rho
            .extra
            .iter()
            .filter_map(|(k, a)| sigma.extra.get(k).map(|b| (k.clone(), a.block_diag(b))))
            .collect(),
    }
}

/// `(-1)^{2k}` for a half-integer `k`.
pub fn sign_2k(k: &Q64) -> Result<i64> {
    let two_k = k * 2;
    if !two_k.is_integer() {
        return Err(Error::BadWeight(fmt_q64(k)));
    }
    Ok(if two_k.to_integer().is_even() { 1 } else { -1 })
}

/// `i^{2k} := e^{pi i k}` for a half-integer `k`.
pub fn i_pow_2k(k: &Q64) -> Result<CycNumber> {
    let two_k = k * 2;
    if !two_k.is_integer() {
        return Err(Error::BadWeight(fmt_q64(k)));
    }
    Ok(CycNumber::i_pow(two_k.to_integer()))
}

/// Basis of `V_rho(k) = { v : c1 v = v = (-1)^{2k} c2 v }` in reduced
/// echelon form.
pub fn invariant_subspace(rho: &Representation, k: &Q64) -> Result<Vec<Vec<CycNumber>>> {
    let s = CycNumber::from_int(sign_2k(k)?);
    let id = CycMatrix::identity(rho.dim);
    let a = rho.c1.sub(&id);
    let b = rho.c2.scale(&s).sub(&id);
    let mut m = SparseMatrix::new(0, rho.dim);
    for row in a.0.iter().chain(b.0.iter()) {
        m.push_row(row.iter().cloned().enumerate());
    }
    Ok(m.rref().kernel())
}

/// Whether `v` lies in `V_rho(k)`.
pub fn in_invariant_subspace(rho: &Representation, k: &Q64, v: &[CycNumber]) -> Result<bool> {
    let s = CycNumber::from_int(sign_2k(k)?);
    let c2v: Vec<CycNumber> = rho.c2.apply(v).iter().map(|x| x * &s).collect();
    Ok(rho.c1.apply(v) == v && c2v == v)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepReport {
    pub violations: Vec<String>,
}

impl RepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn is_unitary(m: &CycMatrix) -> bool {
    m.is_square() && m.mul(&m.conj_transpose()).is_identity()
}

/// Checks unitarity of all images, that `c1`, `c2` are commuting
/// involutions, and that `delta^2 = c2`.
pub fn verify_representation(rho: &Representation) -> RepReport {
    let mut v = Vec::new();
    let named = [("delta", &rho.delta), ("c1", &rho.c1), ("c2", &rho.c2)];
    for (name, m) in named.iter().copied().chain(rho.extra.iter().map(|(k, m)| (k.as_str(), m))) {
        if m.nrows() != rho.dim || m.ncols() != rho.dim {
            v.push(format!("{name}: not {0}x{0}", rho.dim));
            continue;
        }
        if !is_unitary(m) {
            v.push(format!("{name}: not unitary"));
        }
    }
    if !v.is_empty() {
        return RepReport { violations: v };
    }
    if !rho.c1.pow(2).is_identity() {
        v.push("c1: not an involution".into());
    }
    if !rho.c2.pow(2).is_identity() {
        v.push("c2: not an involution".into());
    }
    if rho.c1.mul(&rho.c2) != rho.c2.mul(&rho.c1) {
        v.push("c1, c2: do not commute".into());
    }
    if rho.delta.pow(2) != rho.c2 {
        v.push("delta^2 != c2".into());
    }
    RepReport { violations: v }
}

/// Finite quadratic module `L'/L` in invariant-factor form.
///
/// `gram_q[i][i] = q(g_i)` and `gram_q[i][j] = b(g_i, g_j)` for `i != j`,
/// all reduced into `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscriminantForm {
    pub orders: Vec<u64>,
    pub gram_q: Vec<Vec<Q64>>,
    pub signature_mod8: u8,
}

impl DiscriminantForm {
    pub fn trivial(signature_mod8: u8) -> Self {
        DiscriminantForm { orders: vec![], gram_q: vec![], signature_mod8: signature_mod8 % 8 }
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// All group elements in mixed radix, last coordinate fastest.
    pub fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &d in &self.orders {
            out = out
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (0..d as i64).map(move |a| {
                        let mut p = p.clone();
                        p.push(a);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Position of an element in [`Self::elements`].
    pub fn index_of(&self, x: &[i64]) -> usize {
        self.orders.iter().zip(x).fold(0usize, |acc, (&d, &a)| acc * d as usize + a.rem_euclid(d as i64) as usize)
    }

    pub fn neg(&self, x: &[i64]) -> Vec<i64> {
        self.orders.iter().zip(x).map(|(&d, &a)| (-a).rem_euclid(d as i64)).collect()
    }

    fn bil(&self, i: usize, j: usize) -> Q64 {
        if i == j {
            self.gram_q[i][i] * 2
        } else {
            self.gram_q[i][j]
        }
    }

    /// `q(x) mod 1`.
    pub fn q(&self, x: &[i64]) -> Q64 {
        let n = self.orders.len();
        let mut s = Q64::zero();
        for i in 0..n {
            s += self.gram_q[i][i] * (x[i] * x[i]);
            for j in i + 1..n {
                s += self.gram_q[i][j] * (x[i] * x[j]);
            }
        }
        frac(&s)
    }

    /// `b(x, y) mod 1`.
    pub fn b(&self, x: &[i64], y: &[i64]) -> Q64 {
        let n = self.orders.len();
        let mut s = Q64::zero();
        for i in 0..n {
            for j in 0..n {
                s += self.bil(i, j) * (x[i] * y[j]);
            }
        }
        frac(&s)
    }

    /// Smallest `N` with `N q(x) = 0 mod 1` for all `x`.
    pub fn level(&self) -> u32 {
        self.elements().iter().fold(1u32, |l, x| l.lcm(&(*self.q(x).denom() as u32)))
    }

    /// Consistency checks: `b` is the polarization of `q`, and every
    /// generator's order annihilates its pairings.
    pub fn check(&self) -> Result<()> {
        let n = self.orders.len();
        if self.gram_q.len() != n || self.gram_q.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidLattice("q-table shape differs from generator count".into()));
        }
        for i in 0..n {
            let d = self.orders[i] as i64;
            for j in 0..n {
                if !(self.bil(i, j) * d).is_integer() {
                    return Err(Error::InvalidLattice(format!("b(g{i}, g{j}) not killed by order {d}")));
                }
            }
            if !(self.gram_q[i][i] * (d * d)).is_integer() {
                return Err(Error::InvalidLattice(format!("q(g{i}) not compatible with order {d}")));
            }
        }
        let els = self.elements();
        for x in &els {
            for y in &els {
                let s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                if frac(&(self.q(&s) - self.q(x) - self.q(y) - self.b(x, y))) != Q64::zero() {
                    return Err(Error::InvalidLattice("b is not the polarization of q".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DiscRepr {
    orders: Vec<u64>,
    q_values: Vec<Vec<String>>,
    signature_mod8: u8,
}

impl Serialize for DiscriminantForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiscRepr {
            orders: self.orders.clone(),
            q_values: self.gram_q.iter().map(|r| r.iter().map(fmt_q64).collect()).collect(),
            signature_mod8: self.signature_mod8,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscriminantForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DiscRepr::deserialize(d)?;
        let gram_q = r
            .q_values
            .iter()
            .map(|row| row.iter().map(|x| parse_q64(x).map(|v| frac(&v))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let f = DiscriminantForm { orders: r.orders, gram_q, signature_mod8: r.signature_mod8 % 8 };
        f.check().map_err(serde::de::Error::custom)?;
        Ok(f)
    }
}

/// Images of `S` and `T` under the genus-1 Weil representation on
/// `C[L'/L]`: `T e_g = e(q(g)) e_g` and
/// `S e_g = e(-sig/8) / sqrt|D| * sum_h e(-b(g, h)) e_h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeilGenus1 {
    pub s: CycMatrix,
    pub t: CycMatrix,
}

pub fn weil_rep_genus1(d: &DiscriminantForm) -> WeilGenus1 {
    let els = d.elements();
    let n = els.len();
    let order = u32::try_from(d.order()).expect("discriminant group too large");
    let pref = &CycNumber::e(&q64(-(d.signature_mod8 as i64), 8)) / &CycNumber::sqrt_int(order);
    let mut s = CycMatrix::zeros(n, n);
    let mut t = CycMatrix::zeros(n, n);
    for (i, g) in els.iter().enumerate() {
        t.0[i][i] = CycNumber::e(&d.q(g));
        for (j, h) in els.iter().enumerate() {
            s.0[j][i] = &pref * &CycNumber::e(&-d.b(g, h));
        }
    }
    WeilGenus1 { s, t }
}

/// Representation on `C[(L'/L)^2]` with `delta` the coordinate swap scaled
/// by `zeta_8^delta_root`, `(-1, 1)` acting by `e_l -> e_{-l}` and `(1, -1)`
/// by `(-1)^sig`.
///
/// `delta^2 = c2` holds only when `i^delta_root = (-1)^sig`; the default
/// `delta_root = 0` is therefore consistent for even signature only, and
/// [`verify_representation`] reports the mismatch otherwise.
pub fn weil_rep_genus2(d: &DiscriminantForm, delta_root: u8) -> Representation {
    let els = d.elements();
    let n = els.len();
    let scalar = CycNumber::root_of_unity(8, delta_root as i64);
    let mut delta = CycMatrix::zeros(n * n, n * n);
    let mut c1 = CycMatrix::zeros(n * n, n * n);
    for (i, x) in els.iter().enumerate() {
        let mx = d.index_of(&d.neg(x));
        for (j, y) in els.iter().enumerate() {
            let my = d.index_of(&d.neg(y));
            delta.0[j * n + i][i * n + j] = scalar.clone();
            c1.0[mx * n + my][i * n + j] = CycNumber::one();
        }
    }
    let sign = if d.signature_mod8.is_multiple_of(2) { 1 } else { -1 };
    let c2 = CycMatrix::scalar(n * n, &CycNumber::from_int(sign));
    let level = d.level().lcm(&if delta_root == 0 { 1 } else { 8 });
    Representation::new(level, delta, c1, c2).expect("square images")
}
