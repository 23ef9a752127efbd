//! Finite fields GF(p^m) with table-driven arithmetic, and the modular
//! combinatorics (Lucas, Legendre, Kummer) used by the tree computations.
//!
//! Elements are stored as the integer `Σ c_i p^i` of their coordinates in the
//! power basis of `F_p[x]/(modulus)`. The modulus is the least monic
//! irreducible polynomial of degree `m` when the coefficient tuple
//! `(c_{m-1}, …, c_0)` is read lexicographically.

use serde::Serialize;
use thiserror::Error;

/// Largest field order for which a full addition table is built.
const ADD_TABLE_LIMIT: u32 = 1400;
/// Largest supported field order (log/exp tables are dense).
const MAX_ORDER: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    BadCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {0} is too large")]
    TooLarge(u64),
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("m = {m} is outside 0 < m <= p^{k}")]
    OutOfRange { k: u32, m: u64 },
    #[error("interpolation table has {got} entries, expected {expected}")]
    IncompleteTable { expected: usize, got: usize },
}

/// An element of GF(p^m), encoded by its power-basis coordinates in base p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldParams {
    pub p: u32,
    pub m: u32,
    /// Monic modulus, coefficients from degree 0 up to degree m.
    pub modulus: Vec<u32>,
}

/// GF(p^m) with precomputed log/exp tables.
#[derive(Debug, Clone)]
pub struct Gf {
    params: FieldParams,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Polynomials over F_p as coefficient vectors (low degree first).
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r: Vec<u32> = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = super::pow_mod(m[dm] as u64, (p - 2) as u64, p as u64) as u32;
        while r.len() > dm {
            let top = r.len() - 1;
            let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
            if c != 0 {
                let shift = top - dm;
                for (i, &mi) in m.iter().enumerate() {
                    let sub = (c as u64 * mi as u64 % p as u64) as u32;
                    r[shift + i] = (r[shift + i] + p - sub) % p;
                }
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut v: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut v);
        v
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), m, p)
    }

    pub fn powmod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut base = rem(a, m, p);
        let mut acc = vec![1u32];
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, m, p);
            }
            base = mulmod(&base, &base, m, p);
            e >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out = vec![0u32; n];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Rabin's irreducibility test for a monic polynomial of degree m.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let m = f.len() - 1;
        if m == 1 {
            return true;
        }
        let x = vec![0u32, 1];
        let q = p as u64;
        // x^(p^k) mod f
        let frob_iter = |k: usize| {
            let mut t = x.clone();
            for _ in 0..k {
                t = powmod(&t, q, f, p);
            }
            t
        };
        if sub(&frob_iter(m), &x, p) != Vec::<u32>::new() {
            return false;
        }
        for d in super::prime_factors(m as u64) {
            let t = frob_iter(m / d as usize);
            let g = gcd(f, &sub(&t, &x, p), p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Least monic irreducible polynomial of degree m over F_p, comparing the
/// coefficient tuples `(c_{m-1}, …, c_0)` lexicographically.
pub fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    for code in 0..count {
        let mut coeffs = Vec::with_capacity(m as usize + 1);
        let mut c = code;
        for _ in 0..m {
            coeffs.push((c % p as u64) as u32);
            c /= p as u64;
        }
        coeffs.push(1);
        if m == 1 || fp_poly::is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Gf {
    /// GF(p^m) with the deterministic modulus.
    pub fn new(p: u32, m: u32) -> Result<Self, FieldError> {
        if p == 2 || !is_prime(p as u64) {
            return Err(FieldError::BadCharacteristic(p as u64));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        let modulus = least_irreducible(p, m);
        Ok(Self::with_modulus(FieldParams { p, m, modulus }))
    }

    fn with_modulus(params: FieldParams) -> Self {
        let p = params.p;
        let m = params.m;
        let q = p.pow(m);
        let to_poly = |code: u32| {
            let mut v = Vec::with_capacity(m as usize);
            let mut c = code;
            for _ in 0..m {
                v.push(c % p);
                c /= p;
            }
            fp_poly::trim(&mut v);
            v
        };
        let from_poly = |v: &[u32]| {
            let mut code = 0u32;
            for &c in v.iter().rev() {
                code = code * p + c;
            }
            code
        };
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let mut generator = None;
        for code in 1..q {
            let g = to_poly(code);
            let ok = factors.iter().all(|&l| {
                fp_poly::powmod(&g, order / l, &params.modulus, p) != vec![1u32]
            });
            if ok || order == 1 {
                generator = Some(g);
                break;
            }
        }
        let g = generator.expect("multiplicative group is cyclic");
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = vec![1u32];
        for k in 0..order {
            let c = from_poly(&cur);
            exp.push(c);
            log[c as usize] = k as u32;
            cur = fp_poly::mulmod(&cur, &g, &params.modulus, p);
        }
        let digit_add = |a: u32, b: u32| {
            let (mut x, mut y, mut out, mut place) = (a, b, 0u32, 1u32);
            for _ in 0..m {
                out += ((x % p + y % p) % p) * place;
                x /= p;
                y /= p;
                place *= p;
            }
            out
        };
        let neg = (0..q)
            .map(|a| {
                let (mut x, mut out, mut place) = (a, 0u32, 1u32);
                for _ in 0..m {
                    out += ((p - x % p) % p) * place;
                    x /= p;
                    place *= p;
                }
                out
            })
            .collect();
        let add = (q <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = digit_add(a, b);
                }
            }
            t
        });
        Gf { params, q, exp, log, add, neg }
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn degree(&self) -> u32 {
        self.params.m
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    /// Checked constructor from an element code.
    pub fn elem(&self, code: u32) -> FieldElem {
        assert!(code < self.q, "code {code} outside GF({})", self.q);
        FieldElem(code)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.params.p as i64) as u32)
    }

    /// Power-basis coordinates, lowest degree first.
    pub fn coords(&self, a: FieldElem) -> Vec<u32> {
        let p = self.params.p;
        let mut c = a.0;
        (0..self.params.m)
            .map(|_| {
                let d = c % p;
                c /= p;
                d
            })
            .collect()
    }

    pub fn from_coords(&self, coords: &[u32]) -> FieldElem {
        let p = self.params.p;
        let mut code = 0u32;
        for &c in coords.iter().rev() {
            code = code * p + c % p;
        }
        FieldElem(code)
    }

    /// The F_p-basis `1, x, …, x^{m-1}`.
    pub fn prime_basis(&self) -> Vec<FieldElem> {
        (0..self.params.m).map(|t| FieldElem(self.params.p.pow(t))).collect()
    }

    /// A fixed generator of the multiplicative group.
    pub fn primitive(&self) -> FieldElem {
        FieldElem(self.exp[1 % self.exp.len()])
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match &self.add {
            Some(t) => FieldElem(t[(a.0 * self.q + b.0) as usize]),
            None => {
                let p = self.params.p;
                let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
                for _ in 0..self.params.m {
                    out += ((x % p + y % p) % p) * place;
                    x /= p;
                    y /= p;
                    place *= p;
                }
                FieldElem(out)
            }
        }
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.neg[a.0 as usize])
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let n = self.exp.len();
        let k = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElem(self.exp[if k >= n { k - n } else { k }])
    }

    /// `a + b·c`, the inner step of every elimination loop.
    pub fn mul_add(&self, a: FieldElem, b: FieldElem, c: FieldElem) -> FieldElem {
        self.add(a, self.mul(b, c))
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let n = self.exp.len();
        let k = self.log[a.0 as usize] as usize;
        Ok(FieldElem(self.exp[(n - k) % n]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` with the convention `0^0 = 1`.
    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let n = self.exp.len() as u64;
        let k = (self.log[a.0 as usize] as u64 % n) * (e % n) % n;
        FieldElem(self.exp[k as usize])
    }

    /// `a^(-e)` for a unit `a`.
    pub fn pow_neg(&self, a: FieldElem, e: u64) -> Result<FieldElem, FieldError> {
        Ok(self.pow(self.inv(a)?, e))
    }

    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.params.p as u64)
    }

    /// `a^(p^j)`.
    pub fn frobenius_pow(&self, a: FieldElem, j: u32) -> FieldElem {
        let n = self.exp.len() as u64;
        let e = pow_mod(self.params.p as u64, j as u64, n.max(1));
        if a.0 == 0 {
            return a;
        }
        self.pow(a, if e == 0 { n } else { e })
    }

    /// Discrete logarithm to the base `primitive()`.
    pub fn log(&self, a: FieldElem) -> Option<u32> {
        (a.0 != 0).then(|| self.log[a.0 as usize])
    }

    pub fn sum<I: IntoIterator<Item = FieldElem>>(&self, it: I) -> FieldElem {
        it.into_iter().fold(FieldElem::ZERO, |acc, x| self.add(acc, x))
    }
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binom_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binom(nd, kd, p) % p;
        n /= p;
        k /= p;
    }
    acc % p
}

fn small_binom(n: u64, k: u64, p: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * pow_mod(den, p - 2, p) % p
}

/// Base-p digit sum.
pub fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// `ν_p(n!) = (n − s_p(n)) / (p − 1)`.
pub fn nu_p_factorial(n: u64, p: u64) -> u64 {
    (n - digit_sum(n, p)) / (p - 1)
}

/// `ν_p(C(p^k, m)) = k − ν_p(m)` for `0 < m ≤ p^k`.
pub fn nu_p_binom_prime_power(k: u32, m: u64, p: u64) -> Result<u64, FieldError> {
    let top = p.checked_pow(k).unwrap_or(u64::MAX);
    if m == 0 || m > top {
        return Err(FieldError::OutOfRange { k, m });
    }
    let mut v = 0u64;
    let mut x = m;
    while x.is_multiple_of(p) {
        v += 1;
        x /= p;
    }
    Ok(k as u64 - v)
}

/// A polynomial in `n` variables with every exponent at most `q − 1`.
///
/// Coefficients are indexed by the exponent tuple read in base q with the
/// first variable most significant, mirroring the digit order of `I_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedPoly {
    pub vars: u32,
    pub coeffs: Vec<FieldElem>,
}

impl ReducedPoly {
    pub fn evaluate(&self, gf: &Gf, point: &[FieldElem]) -> FieldElem {
        let q = gf.order() as usize;
        let mut acc = FieldElem::ZERO;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = c;
            let mut rest = idx;
            for v in (0..self.vars as usize).rev() {
                let e = rest % q;
                rest /= q;
                term = gf.mul(term, gf.pow(point[v], e as u64));
            }
            acc = gf.add(acc, term);
        }
        acc
    }

    /// Exponent tuple of a coefficient index.
    pub fn exponents(&self, gf: &Gf, idx: usize) -> Vec<u32> {
        let q = gf.order() as usize;
        let mut out = vec![0u32; self.vars as usize];
        let mut rest = idx;
        for v in (0..self.vars as usize).rev() {
            out[v] = (rest % q) as u32;
            rest /= q;
        }
        out
    }
}

/// One-variable interpolation of a function on F_q (indexed by element code)
/// into exponent-indexed coefficients.
pub fn interpolate_line(gf: &Gf, values: &[FieldElem]) -> Vec<FieldElem> {
    let q = gf.order() as usize;
    let mut out = vec![FieldElem::ZERO; q];
    out[0] = values[0];
    // sums[k] = Σ_{λ≠0} P(λ) λ^{-k}
    let mut sums = vec![FieldElem::ZERO; q - 1];
    for (code, &v) in values.iter().enumerate().skip(1) {
        if v.is_zero() {
            continue;
        }
        let lambda = FieldElem(code as u32);
        let inv = gf.inv(lambda).expect("nonzero");
        let mut pw = FieldElem::ONE;
        for s in sums.iter_mut() {
            *s = gf.add(*s, gf.mul(v, pw));
            pw = gf.mul(pw, inv);
        }
    }
    for k in 1..q - 1 {
        out[k] = gf.neg(sums[k]);
    }
    out[q - 1] = gf.neg(gf.add(sums[0], values[0]));
    out
}

/// The unique reduced polynomial agreeing with `table` on `F_q^n`.
///
/// `table` is indexed by digit codes `Σ μ_i q^{n-1-i}`.
pub fn reduced_interpolate(gf: &Gf, n: u32, table: &[FieldElem]) -> Result<ReducedPoly, FieldError> {
    let q = gf.order() as usize;
    let expected = q.pow(n);
    if table.len() != expected {
        return Err(FieldError::IncompleteTable { expected, got: table.len() });
    }
    let mut data = table.to_vec();
    let mut line = vec![FieldElem::ZERO; q];
    for axis in 0..n as usize {
        let stride = q.pow(n - 1 - axis as u32);
        for base in 0..expected {
            if !(base / stride).is_multiple_of(q) {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[base + t * stride];
            }
            let coeffs = interpolate_line(gf, &line);
            for (t, c) in coeffs.into_iter().enumerate() {
                data[base + t * stride] = c;
            }
        }
    }
    Ok(ReducedPoly { vars: n, coeffs: data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_prime_field() {
        let gf = Gf::new(5, 1).unwrap();
        assert_eq!(gf.inv(FieldElem(2)).unwrap(), FieldElem(3));
        let gf7 = Gf::new(7, 1).unwrap();
        assert_eq!(gf7.pow(FieldElem(3), 6), FieldElem::ONE);
        assert!(gf.inv(FieldElem::ZERO).is_err());
    }

    #[test]
    fn rejects_bad_characteristic() {
        assert!(Gf::new(2, 1).is_err());
        assert!(Gf::new(9, 1).is_err());
        assert!(Gf::new(7, 0).is_err());
    }

    #[test]
    fn least_modulus_is_irreducible_and_minimal() {
        // x^2 + 1 is reducible mod 5 (2^2 = -1); x^2 + 2 is the first irreducible.
        assert_eq!(least_irreducible(5, 2), vec![2, 0, 1]);
        assert_eq!(least_irreducible(7, 2), vec![1, 0, 1]);
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
    }

    #[test]
    fn frobenius_orbit_closes() {
        for (p, m) in [(5, 2), (7, 2), (3, 3), (11, 3)] {
            let gf = Gf::new(p, m).unwrap();
            for a in gf.elements().step_by(7) {
                let mut x = a;
                for _ in 0..m {
                    x = gf.frobenius(x);
                }
                assert_eq!(x, a);
                assert_eq!(gf.frobenius_pow(a, m), a);
            }
        }
    }

    #[test]
    fn frobenius_fixes_prime_field_and_is_additive() {
        let gf = Gf::new(7, 2).unwrap();
        for c in 0..7 {
            assert_eq!(gf.frobenius(FieldElem(c)), FieldElem(c));
        }
        for a in gf.elements() {
            for b in gf.elements().step_by(5) {
                assert_eq!(
                    gf.frobenius(gf.add(a, b)),
                    gf.add(gf.frobenius(a), gf.frobenius(b))
                );
            }
        }
    }

    #[test]
    fn primitive_has_full_order() {
        let gf = Gf::new(7, 2).unwrap();
        let g = gf.primitive();
        let mut seen = std::collections::BTreeSet::new();
        let mut x = FieldElem::ONE;
        for _ in 0..48 {
            seen.insert(x);
            x = gf.mul(x, g);
        }
        assert_eq!(seen.len(), 48);
        assert_eq!(x, FieldElem::ONE);
    }

    #[test]
    fn interpolation_examples() {
        let gf = Gf::new(7, 1).unwrap();
        let q = 7usize;
        let mut indicator = vec![FieldElem::ZERO; q];
        indicator[0] = FieldElem::ONE;
        let poly = reduced_interpolate(&gf, 1, &indicator).unwrap();
        let mut expect = vec![FieldElem::ZERO; q];
        expect[0] = FieldElem::ONE;
        expect[q - 1] = gf.neg(FieldElem::ONE);
        assert_eq!(poly.coeffs, expect);

        let constant = vec![FieldElem(3); q * q];
        let poly = reduced_interpolate(&gf, 2, &constant).unwrap();
        assert_eq!(poly.coeffs[0], FieldElem(3));
        assert!(poly.coeffs[1..].iter().all(|c| c.is_zero()));

        let gf5 = Gf::new(5, 1).unwrap();
        let table: Vec<_> = gf5.elements().map(|x| gf5.pow(x, 5)).collect();
        let poly = reduced_interpolate(&gf5, 1, &table).unwrap();
        assert_eq!(poly.coeffs, vec![FieldElem(0), FieldElem(1), FieldElem(0), FieldElem(0), FieldElem(0)]);

        assert!(reduced_interpolate(&gf, 2, &constant[..10]).is_err());
    }

    #[test]
    fn valuations() {
        assert_eq!(nu_p_factorial(25, 5), 6);
        assert_eq!(nu_p_binom_prime_power(3, 25, 5).unwrap(), 1);
        assert!(nu_p_binom_prime_power(2, 26, 5).is_err());
        assert!(nu_p_binom_prime_power(2, 0, 5).is_err());
    }
}
