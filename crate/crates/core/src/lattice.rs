//! Even lattices, Smith normal form and discriminant forms.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{big, frac, Q64};
use crate::rep::DiscriminantForm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenLattice {
    pub gram: Vec<Vec<i64>>,
    pub signature: (u32, u32),
}

impl EvenLattice {
    /// Validates symmetry and even diagonal. The signature is computed from
    /// the Gram matrix and, when declared, must agree with it.
    pub fn new(gram: Vec<Vec<i64>>, declared: Option<(u32, u32)>) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidLattice("gram matrix is not square".into()));
        }
        for i in 0..n {
            if gram[i][i] % 2 != 0 {
                return Err(Error::InvalidLattice(format!("odd diagonal entry at {i}")));
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!("gram not symmetric at ({i}, {j})")));
                }
            }
        }
        let (p, q, _) = inertia(&gram);
        if let Some(s) = declared {
            if s != (p, q) {
                return Err(Error::InvalidLattice(format!(
                    "declared signature {s:?} but gram has inertia ({p}, {q})"
                )));
            }
        }
        Ok(EvenLattice { gram, signature: (p, q) })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn hyperbolic_plane() -> Self {
        EvenLattice::new(vec![vec![0, 1], vec![1, 0]], Some((1, 1))).unwrap()
    }

    /// Parses whitespace-separated integer rows. `#` starts a comment and an
    /// optional line `signature: p q` declares the signature.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut declared = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("signature:") {
                let v: Vec<u32> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad signature {rest:?}"))))
                    .collect::<Result<_>>()?;
                if v.len() != 2 {
                    return Err(Error::Parse(format!("bad signature {rest:?}")));
                }
                declared = Some((v[0], v[1]));
                continue;
            }
            let row: Vec<i64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        EvenLattice::new(rows, declared)
    }
}

/// `(p, q, z)`: numbers of positive, negative and zero eigenvalues, by exact
/// symmetric Gaussian elimination over the rationals.
pub fn inertia(gram: &[Vec<i64>]) -> (u32, u32, u32) {
    let mut a: Vec<Vec<BigRational>> = gram.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect();
    let (mut p, mut q, mut z) = (0, 0, 0);
    let mut n = a.len();
    while n > 0 {
        // bring a nonzero diagonal entry to the last position
        let piv = (0..n).find(|&i| !a[i][i].is_zero());
        let piv = match piv {
            Some(i) => i,
            None => match (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero()) {
                None => {
                    z += n as u32;
                    break;
                }
                Some((i, j)) => {
                    // e_i <- e_i + e_j makes a[i][i] = 2 a[i][j] != 0
                    for k in 0..n {
                        let v = a[j][k].clone();
                        a[i][k] += v;
                    }
                    for k in 0..n {
                        let v = a[k][j].clone();
                        a[k][i] += v;
                    }
                    i
                }
            },
        };
        a.swap(piv, n - 1);
        for r in a.iter_mut() {
            r.swap(piv, n - 1);
        }
        let d = a[n - 1][n - 1].clone();
        if d.is_positive() {
            p += 1;
        } else {
            q += 1;
        }
        for i in 0..n - 1 {
            let f = &a[i][n - 1] / &d;
            if f.is_zero() {
                continue;
            }
            for j in 0..n - 1 {
                let v = &f * &a[n - 1][j];
                a[i][j] -= v;
            }
        }
        n -= 1;
        a.truncate(n);
        for r in a.iter_mut() {
            r.truncate(n);
        }
    }
    (p, q, z)
}

/// Smith normal form `U A V = D` of a square integer matrix, with
/// `d_1 | d_2 | ...` nonnegative.
pub struct Smith {
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
    pub diag: Vec<i128>,
}

fn overflow() -> Error {
    Error::InvalidLattice("integer overflow in Smith normal form".into())
}

fn row_op(m: &mut [Vec<i128>], dst: usize, src: usize, f: i128) -> Result<()> {
    for k in 0..m[dst].len() {
        let t = m[src][k].checked_mul(f).ok_or_else(overflow)?;
        m[dst][k] = m[dst][k].checked_sub(t).ok_or_else(overflow)?;
    }
    Ok(())
}

fn col_op(m: &mut [Vec<i128>], dst: usize, src: usize, f: i128) -> Result<()> {
    for row in m.iter_mut() {
        let t = row[src].checked_mul(f).ok_or_else(overflow)?;
        row[dst] = row[dst].checked_sub(t).ok_or_else(overflow)?;
    }
    Ok(())
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

pub fn smith_normal_form(a: &[Vec<i64>]) -> Result<Smith> {
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u = identity(n);
    let mut v = identity(n);
    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let Some((pi, pj)) = (t..n)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| m[i][j] != 0)
                .min_by_key(|&(i, j)| (m[i][j].unsigned_abs(), i, j))
            else {
                break;
            };
            m.swap(t, pi);
            u.swap(t, pi);
            for r in m.iter_mut().chain(v.iter_mut()) {
                r.swap(t, pj);
            }
            let p = m[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let f = m[i][t].div_euclid(p);
                row_op(&mut m, i, t, f)?;
                row_op(&mut u, i, t, f)?;
                clean &= m[i][t] == 0;
            }
            for j in t + 1..n {
                let f = m[t][j].div_euclid(p);
                col_op(&mut m, j, t, f)?;
                col_op(&mut v, j, t, f)?;
                clean &= m[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // enforce divisibility of the remaining block
            if let Some(i) = (t + 1..n).find(|&i| (t + 1..n).any(|j| m[i][j] % p != 0)) {
                row_op(&mut m, t, i, -1)?;
                row_op(&mut u, t, i, -1)?;
                continue;
            }
            break;
        }
        if m[t][t] < 0 {
            for x in m[t].iter_mut().chain(u[t].iter_mut()) {
                *x = -*x;
            }
        }
    }
    let diag = (0..n).map(|i| m[i][i]).collect();
    Ok(Smith { u, v, diag })
}

/// `L'/L` with generators `x_i = V e_i / d_i` for the invariant factors
/// `d_i > 1`, `q(x) = x^T G x / 2` and `b(x, y) = x^T G y`, both mod 1.
pub fn discriminant_form(l: &EvenLattice) -> Result<DiscriminantForm> {
    let n = l.rank();
    let sig = ((l.signature.0 as i64 - l.signature.1 as i64).rem_euclid(8)) as u8;
    if n == 0 {
        return Ok(DiscriminantForm::trivial(sig));
    }
    let snf = smith_normal_form(&l.gram)?;
    if snf.diag.contains(&0) {
        return Err(Error::DegenerateGram);
    }
    let mut gens: Vec<(u64, Vec<Q64>)> = Vec::new();
    for (i, &d) in snf.diag.iter().enumerate() {
        if d > 1 {
            let d64 = i64::try_from(d).map_err(|_| overflow())?;
            let x = (0..n)
                .map(|r| i64::try_from(snf.v[r][i]).map(|c| Q64::new(c, d64)).map_err(|_| overflow()))
                .collect::<Result<Vec<_>>>()?;
            gens.push((d as u64, x));
        }
    }
    let pair = |x: &[Q64], y: &[Q64]| {
        let mut s = Q64::zero();
        for i in 0..n {
            for j in 0..n {
                if l.gram[i][j] != 0 {
                    s += x[i] * y[j] * l.gram[i][j];
                }
            }
        }
        s
    };
    let r = gens.len();
    let mut gram_q = vec![vec![Q64::zero(); r]; r];
    for i in 0..r {
        for j in 0..r {
            let v = pair(&gens[i].1, &gens[j].1);
            gram_q[i][j] = frac(&if i == j { v / 2 } else { v });
        }
    }
    let form = DiscriminantForm { orders: gens.iter().map(|g| g.0).collect(), gram_q, signature_mod8: sig };
    form.check()?;
    Ok(form)
}

/// `dim S_{L,r} = |L'/L|^r`.
pub fn s_space_dim(d: &DiscriminantForm, r: u32) -> u64 {
    d.order().pow(r)
}

/// `|det gram|` by fraction-free elimination.
pub fn abs_det(gram: &[Vec<i64>]) -> Result<u128> {
    let snf = smith_normal_form(gram)?;
    snf.diag
        .iter()
        .try_fold(1u128, |acc, &d| acc.checked_mul(d.unsigned_abs()).ok_or_else(overflow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::q64;
    use proptest::prelude::*;

    fn lat(g: &[&[i64]]) -> EvenLattice {
        EvenLattice::new(g.iter().map(|r| r.to_vec()).collect(), None).unwrap()
    }

    fn mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let n = a.len();
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
    }

    #[test]
    fn small_examples() {
        let d = discriminant_form(&lat(&[&[2]])).unwrap();
        assert_eq!(d.orders, vec![2]);
        assert_eq!(d.gram_q, vec![vec![q64(1, 4)]]);
        assert_eq!(d.signature_mod8, 1);

        let d = discriminant_form(&lat(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!(d.orders, vec![2, 2]);
        assert_eq!(s_space_dim(&d, 2), 16);

        let u = EvenLattice::hyperbolic_plane();
        assert_eq!(u.signature, (1, 1));
        assert_eq!(discriminant_form(&u).unwrap().order(), 1);

        let a2 = discriminant_form(&lat(&[&[2, -1], &[-1, 2]])).unwrap();
        assert_eq!(a2.orders, vec![3]);
        assert_eq!(a2.q(&[1]), q64(1, 3));
        assert_eq!(s_space_dim(&a2, 1), 3);

        let empty = EvenLattice::new(vec![], None).unwrap();
        assert_eq!(discriminant_form(&empty).unwrap().order(), 1);
    }

    #[test]
    fn e8_is_unimodular() {
        let e8 = lat(&[
            &[2, -1, 0, 0, 0, 0, 0, 0],
            &[-1, 2, -1, 0, 0, 0, 0, 0],
            &[0, -1, 2, -1, 0, 0, 0, -1],
            &[0, 0, -1, 2, -1, 0, 0, 0],
            &[0, 0, 0, -1, 2, -1, 0, 0],
            &[0, 0, 0, 0, -1, 2, -1, 0],
            &[0, 0, 0, 0, 0, -1, 2, 0],
            &[0, 0, -1, 0, 0, 0, 0, 2],
        ]);
        assert_eq!(e8.signature, (8, 0));
        let d = discriminant_form(&e8).unwrap();
        assert_eq!(d.order(), 1);
        assert_eq!(d.signature_mod8, 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(EvenLattice::new(vec![vec![1]], None).is_err());
        assert!(EvenLattice::new(vec![vec![2, 1], vec![0, 2]], None).is_err());
        assert!(EvenLattice::new(vec![vec![2]], Some((0, 1))).is_err());
        let deg = lat(&[&[2, 2], &[2, 2]]);
        assert_eq!(deg.signature, (1, 0));
        assert!(matches!(discriminant_form(&deg), Err(Error::DegenerateGram)));
    }

    #[test]
    fn parses_text_format() {
        let l = EvenLattice::parse("# A1 + A1\nsignature: 2 0\n2 0\n0 2 # second row\n").unwrap();
        assert_eq!(l.gram, vec![vec![2, 0], vec![0, 2]]);
        assert!(EvenLattice::parse("2 x").is_err());
    }

    proptest! {
        #[test]
        fn smith_is_a_factorization(entries in proptest::collection::vec(-6i64..7, 9)) {
            let a: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
            let s = smith_normal_form(&a).unwrap();
            let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
            let d = mul(&mul(&s.u, &a128), &s.v);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(d[i][j], if i == j { s.diag[i] } else { 0 });
                }
            }
            for w in s.diag.windows(2) {
                prop_assert!(w[1] == 0 || (w[0] != 0 && w[1] % w[0] == 0));
            }
        }

        #[test]
        fn group_order_is_abs_det(a in -4i64..5, b in -4i64..5, c in -4i64..5) {
            let g = vec![vec![2 * a, b], vec![b, 2 * c]];
            let det = (4 * a * c - b * b).unsigned_abs() as u64;
            prop_assume!(det != 0);
            let l = EvenLattice::new(g, None).unwrap();
            let d = discriminant_form(&l).unwrap();
            prop_assert_eq!(d.order(), det);
        }

        #[test]
        fn invariant_under_base_change(a in 1i64..4, c in 1i64..4, t in -3i64..4) {
            // G' = P^T G P with P = [[1, t], [0, 1]]
            let g = vec![vec![2 * a, 1], vec![1, 2 * c]];
            let g2 = vec![
                vec![2 * a, 2 * a * t + 1],
                vec![2 * a * t + 1, 2 * a * t * t + 2 * t + 2 * c],
            ];
            let d1 = discriminant_form(&EvenLattice::new(g, None).unwrap()).unwrap();
            let d2 = discriminant_form(&EvenLattice::new(g2, None).unwrap()).unwrap();
            prop_assert_eq!(&d1.orders, &d2.orders);
            let mut q1: Vec<Q64> = d1.elements().iter().map(|x| d1.q(x)).collect();
            let mut q2: Vec<Q64> = d2.elements().iter().map(|x| d2.q(x)).collect();
            q1.sort();
            q2.sort();
            prop_assert_eq!(q1, q2);
        }
    }
}
