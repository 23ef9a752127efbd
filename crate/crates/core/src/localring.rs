//! Truncated rings of integers `O_F/π^N` for a p-adic field F with residue
//! degree f and ramification index e.
//!
//! An element is stored as `Σ_{i<e} a_i π^i` with `a_i` in the unramified
//! ring `W = (Z/p^M)[x]/(lifted modulus)`, `M = ceil(N/e)`, and `π^e = p·u`.
//! The coefficient of `π^i` is kept reduced modulo `p^{ceil((N-i)/e)}`, which
//! makes the representation canonical. Callers mostly see elements through
//! their Teichmüller digit vectors.

use std::sync::Arc;

use thiserror::Error;

use crate::gfq::{FieldElem, FieldError, Gf};

/// Capacity of the inline coefficient array; `e·f` may not exceed it.
pub const MAX_COEFFS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("element is not a unit")]
    NotUnit,
    #[error("need {needed} digits of precision, ring has {have}")]
    Precision { needed: u32, have: u32 },
    #[error("e·f = {0} exceeds the supported maximum {MAX_COEFFS}")]
    TooManyCoefficients(u32),
    #[error("p^{0} does not fit the word-size arithmetic")]
    Overflow(u32),
    #[error("eisenstein unit {0} is divisible by p")]
    BadUnit(u64),
    #[error("ramification index and precision must be at least 1")]
    Degenerate,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalParams {
    pub p: u32,
    pub f: u32,
    pub e: u32,
    /// Truncation level in π-adic digits.
    pub n: u32,
    /// The unit u with `π^e = p·u`.
    pub unit: u64,
}

impl LocalParams {
    pub fn new(p: u32, f: u32, e: u32, n: u32) -> Self {
        LocalParams { p, f, e, n, unit: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalElem {
    c: [u64; MAX_COEFFS],
}

impl LocalElem {
    pub const ZERO: LocalElem = LocalElem { c: [0; MAX_COEFFS] };

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }
}

type WVec = [u64; MAX_COEFFS];

#[derive(Debug, Clone)]
pub struct LocalRing {
    gf: Arc<Gf>,
    params: LocalParams,
    p: u64,
    f: usize,
    e: usize,
    pm: u64,
    pu: u64,
    unit_inv: u64,
    modulus: Vec<u64>,
    coeff_mod: Vec<u64>,
    teich: Vec<LocalElem>,
}

impl LocalRing {
    pub fn new(params: LocalParams) -> Result<Self, LocalError> {
        let gf = Arc::new(Gf::new(params.p, params.f)?);
        Self::with_field(gf, params)
    }

    /// Builds the ring over an existing residue field `gf = F_q`.
    pub fn with_field(gf: Arc<Gf>, params: LocalParams) -> Result<Self, LocalError> {
        if params.e == 0 || params.n == 0 {
            return Err(LocalError::Degenerate);
        }
        if params.e * params.f > MAX_COEFFS as u32 {
            return Err(LocalError::TooManyCoefficients(params.e * params.f));
        }
        assert_eq!(gf.degree(), params.f, "residue field degree mismatch");
        let p = params.p as u64;
        let m = params.n.div_ceil(params.e);
        let pm = p
            .checked_pow(m)
            .filter(|&v| v < (1u64 << 32))
            .ok_or(LocalError::Overflow(m))?;
        if params.unit.is_multiple_of(p) {
            return Err(LocalError::BadUnit(params.unit));
        }
        let unit = params.unit % pm;
        let unit_inv = inverse_mod_prime_power(unit, p, pm);
        let modulus = gf.params().modulus.iter().map(|&c| c as u64).collect();
        let e = params.e as usize;
        let coeff_mod = (0..e)
            .map(|i| {
                let n = params.n as i64 - i as i64;
                if n <= 0 {
                    1
                } else {
                    p.pow((n as u64).div_ceil(params.e as u64) as u32)
                }
            })
            .collect();
        let mut ring = LocalRing {
            gf,
            params,
            p,
            f: params.f as usize,
            e,
            pm,
            pu: p * unit % pm,
            unit_inv,
            modulus,
            coeff_mod,
            teich: Vec::new(),
        };
        ring.teich = ring.gf.elements().map(|a| ring.compute_teichmuller(a)).collect();
        Ok(ring)
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.gf
    }

    pub fn params(&self) -> LocalParams {
        self.params
    }

    /// Number of π-adic digits carried.
    pub fn precision(&self) -> u32 {
        self.params.n
    }

    pub fn ramification(&self) -> u32 {
        self.params.e
    }

    // ---- arithmetic in W = (Z/p^M)[x]/(modulus) ----

    fn w_add(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        for t in 0..self.f {
            let s = a[t] + b[t];
            out[t] = if s >= self.pm { s - self.pm } else { s };
        }
    }

    fn w_mul(&self, a: &[u64], b: &[u64]) -> WVec {
        let f = self.f;
        let pm = self.pm;
        let mut prod = [0u64; 2 * MAX_COEFFS];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                prod[i + j] = (prod[i + j] + a[i] * b[j] % pm) % pm;
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for t in 0..f {
                let s = c * self.modulus[t] % pm;
                let idx = k - f + t;
                prod[idx] = (prod[idx] + pm - s) % pm;
            }
            prod[k] = 0;
        }
        let mut out = [0u64; MAX_COEFFS];
        out[..f].copy_from_slice(&prod[..f]);
        out
    }

    fn w_scale(&self, a: &[u64], s: u64) -> WVec {
        let mut out = [0u64; MAX_COEFFS];
        for t in 0..self.f {
            out[t] = a[t] * s % self.pm;
        }
        out
    }

    fn slot(&self, x: &LocalElem, i: usize) -> WVec {
        let mut out = [0u64; MAX_COEFFS];
        out[..self.f].copy_from_slice(&x.c[i * self.f..(i + 1) * self.f]);
        out
    }

    fn normalize_to(&self, mut x: LocalElem, prec: u32) -> LocalElem {
        for i in 0..self.e {
            let n = prec as i64 - i as i64;
            let md = if prec == self.params.n {
                self.coeff_mod[i]
            } else if n <= 0 {
                1
            } else {
                self.p.pow((n as u64).div_ceil(self.e as u64) as u32)
            };
            for t in 0..self.f {
                x.c[i * self.f + t] %= md;
            }
        }
        x
    }

    fn normalize(&self, x: LocalElem) -> LocalElem {
        self.normalize_to(x, self.params.n)
    }

    fn compute_teichmuller(&self, a: FieldElem) -> LocalElem {
        let mut w = [0u64; MAX_COEFFS];
        for (t, c) in self.gf.coords(a).into_iter().enumerate() {
            w[t] = c as u64;
        }
        let q = self.gf.order() as u64;
        // x ↦ x^q is a contraction onto the Teichmüller lift.
        for _ in 0..=self.params.n.div_ceil(self.params.e) {
            w = self.w_pow(&w, q);
        }
        let mut x = LocalElem::ZERO;
        x.c[..self.f].copy_from_slice(&w[..self.f]);
        self.normalize(x)
    }

    fn w_pow(&self, a: &[u64], mut e: u64) -> WVec {
        let mut acc = [0u64; MAX_COEFFS];
        acc[0] = 1 % self.pm;
        let mut base = [0u64; MAX_COEFFS];
        base[..self.f].copy_from_slice(&a[..self.f]);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.w_mul(&acc, &base);
            }
            base = self.w_mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    // ---- ring operations ----

    pub fn zero(&self) -> LocalElem {
        LocalElem::ZERO
    }

    pub fn one(&self) -> LocalElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> LocalElem {
        let mut x = LocalElem::ZERO;
        x.c[0] = n.rem_euclid(self.pm as i64) as u64;
        self.normalize(x)
    }

    /// Teichmüller lift `[a]`.
    pub fn teichmuller(&self, a: FieldElem) -> LocalElem {
        self.teich[a.code() as usize]
    }

    pub fn add(&self, a: &LocalElem, b: &LocalElem) -> LocalElem {
        let mut out = LocalElem::ZERO;
        let n = self.e * self.f;
        for k in 0..n {
            let s = a.c[k] + b.c[k];
            out.c[k] = if s >= self.pm { s - self.pm } else { s };
        }
        self.normalize(out)
    }

    pub fn neg(&self, a: &LocalElem) -> LocalElem {
        let mut out = LocalElem::ZERO;
        for k in 0..self.e * self.f {
            out.c[k] = (self.pm - a.c[k]) % self.pm;
        }
        self.normalize(out)
    }

    pub fn sub(&self, a: &LocalElem, b: &LocalElem) -> LocalElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &LocalElem, b: &LocalElem) -> LocalElem {
        let (e, f) = (self.e, self.f);
        let mut acc = [[0u64; MAX_COEFFS]; MAX_COEFFS];
        for i in 0..e {
            let ai = self.slot(a, i);
            if ai[..f].iter().all(|&v| v == 0) {
                continue;
            }
            for j in 0..e {
                let bj = self.slot(b, j);
                let mut w = self.w_mul(&ai, &bj);
                let k = if i + j < e {
                    i + j
                } else {
                    w = self.w_scale(&w, self.pu);
                    i + j - e
                };
                let cur = acc[k];
                self.w_add(&cur, &w, &mut acc[k]);
            }
        }
        let mut out = LocalElem::ZERO;
        for (k, slot) in acc.iter().enumerate().take(e) {
            out.c[k * f..(k + 1) * f].copy_from_slice(&slot[..f]);
        }
        self.normalize(out)
    }

    pub fn mul_pi(&self, a: &LocalElem) -> LocalElem {
        let (e, f) = (self.e, self.f);
        let mut out = LocalElem::ZERO;
        for i in (1..e).rev() {
            out.c[i * f..(i + 1) * f].copy_from_slice(&a.c[(i - 1) * f..i * f]);
        }
        let top = self.w_scale(&self.slot(a, e - 1), self.pu);
        out.c[..f].copy_from_slice(&top[..f]);
        self.normalize(out)
    }

    /// Residue class mod π.
    pub fn residue(&self, a: &LocalElem) -> FieldElem {
        let mut coords = [0u32; MAX_COEFFS];
        for (c, &x) in coords.iter_mut().zip(&a.c[..self.f]) {
            *c = (x % self.p) as u32;
        }
        self.gf.from_coords(&coords[..self.f])
    }

    pub fn is_unit(&self, a: &LocalElem) -> bool {
        !self.residue(a).is_zero()
    }

    /// `a/π` for `a ≡ 0 mod π`; the result is known to one digit less.
    fn div_pi_exact(&self, a: &LocalElem) -> LocalElem {
        let (e, f) = (self.e, self.f);
        let mut out = LocalElem::ZERO;
        for i in 1..e {
            out.c[(i - 1) * f..i * f].copy_from_slice(&a.c[i * f..(i + 1) * f]);
        }
        let mut low = [0u64; MAX_COEFFS];
        for (l, &x) in low.iter_mut().zip(&a.c[..f]) {
            debug_assert_eq!(x % self.p, 0);
            *l = x / self.p;
        }
        let low = self.w_scale(&low, self.unit_inv);
        out.c[(e - 1) * f..e * f].copy_from_slice(&low[..f]);
        self.normalize_to(out, self.params.n.saturating_sub(1))
    }

    /// Teichmüller digits `(μ_0, …, μ_{N-1})` with `a = Σ π^i [μ_i]`.
    pub fn digit_expand(&self, a: &LocalElem) -> Vec<FieldElem> {
        let mut x = *a;
        let mut out = Vec::with_capacity(self.params.n as usize);
        for _ in 0..self.params.n {
            let d = self.residue(&x);
            out.push(d);
            x = self.div_pi_exact(&self.sub(&x, &self.teichmuller(d)));
        }
        out
    }

    /// `Σ π^i [digits_i]`; digits past the precision are ignored.
    pub fn digit_build(&self, digits: &[FieldElem]) -> LocalElem {
        let n = digits.len().min(self.params.n as usize);
        let mut acc = LocalElem::ZERO;
        for i in (0..n).rev() {
            acc = self.add(&self.mul_pi(&acc), &self.teichmuller(digits[i]));
        }
        acc
    }

    /// Zeroes the digits at positions `≥ n`.
    pub fn truncate(&self, a: &LocalElem, n: u32) -> LocalElem {
        let mut d = self.digit_expand(a);
        for x in d.iter_mut().skip(n as usize) {
            *x = FieldElem::ZERO;
        }
        self.digit_build(&d)
    }

    /// Digit of `a` at position `i`.
    pub fn digit(&self, a: &LocalElem, i: u32) -> FieldElem {
        let mut x = *a;
        for _ in 0..i {
            let d = self.residue(&x);
            x = self.div_pi_exact(&self.sub(&x, &self.teichmuller(d)));
        }
        self.residue(&x)
    }

    /// π-adic valuation; zero has valuation N.
    pub fn valuation(&self, a: &LocalElem) -> u32 {
        let mut best = self.params.n;
        for i in 0..self.e {
            for t in 0..self.f {
                let mut v = a.c[i * self.f + t];
                if v == 0 {
                    continue;
                }
                let mut k = 0u32;
                while v.is_multiple_of(self.p) {
                    v /= self.p;
                    k += 1;
                }
                best = best.min(k * self.e as u32 + i as u32);
            }
        }
        best
    }

    /// `a / π^k` when `v(a) ≥ k`; the result carries `N − k` valid digits.
    pub fn div_pi_pow(&self, a: &LocalElem, k: u32) -> Result<LocalElem, LocalError> {
        if self.valuation(a) < k {
            return Err(LocalError::NotUnit);
        }
        let mut x = *a;
        for _ in 0..k {
            x = self.div_pi_exact(&x);
        }
        Ok(x)
    }

    /// `π^k`.
    pub fn pi_pow(&self, k: u32) -> LocalElem {
        let mut x = self.one();
        for _ in 0..k {
            x = self.mul_pi(&x);
        }
        x
    }

    pub fn inv(&self, a: &LocalElem) -> Result<LocalElem, LocalError> {
        let r = self.residue(a);
        if r.is_zero() {
            return Err(LocalError::NotUnit);
        }
        let mut y = self.teichmuller(self.gf.inv(r)?);
        let two = self.from_int(2);
        let mut correct = 1u32;
        while correct < self.params.n {
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
            correct *= 2;
        }
        debug_assert_eq!(self.mul(a, &y), self.one());
        Ok(y)
    }

    /// The carry `P_0(a, b)`: the unique `c` with
    /// `[a] + [b] ≡ [a+b] + π^e [c] (mod π^{e+1})`.
    pub fn carry_p0(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, LocalError> {
        let need = self.params.e + 1;
        if self.params.n < need {
            return Err(LocalError::Precision { needed: need, have: self.params.n });
        }
        let lhs = self.add(&self.teichmuller(a), &self.teichmuller(b));
        let diff = self.sub(&lhs, &self.teichmuller(self.gf.add(a, b)));
        Ok(self.digit(&diff, self.params.e))
    }
}

fn inverse_mod_prime_power(u: u64, p: u64, pm: u64) -> u64 {
    // Euler: u^{φ(p^M) - 1}
    let phi = pm / p * (p - 1);
    crate::gfq::pow_mod(u, phi - 1, pm)
}

/// A 2×2 matrix over F, stored as `π^central · (a b; c d)` with integral
/// entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mat2Local {
    pub a: LocalElem,
    pub b: LocalElem,
    pub c: LocalElem,
    pub d: LocalElem,
    pub central: i32,
}

impl LocalRing {
    pub fn mat(&self, a: LocalElem, b: LocalElem, c: LocalElem, d: LocalElem) -> Mat2Local {
        Mat2Local { a, b, c, d, central: 0 }
    }

    pub fn mat_identity(&self) -> Mat2Local {
        self.mat(self.one(), self.zero(), self.zero(), self.one())
    }

    pub fn mat_mul(&self, x: &Mat2Local, y: &Mat2Local) -> Mat2Local {
        let m = |p: &LocalElem, q: &LocalElem, r: &LocalElem, s: &LocalElem| {
            self.add(&self.mul(p, q), &self.mul(r, s))
        };
        Mat2Local {
            a: m(&x.a, &y.a, &x.b, &y.c),
            b: m(&x.a, &y.b, &x.b, &y.d),
            c: m(&x.c, &y.a, &x.d, &y.c),
            d: m(&x.c, &y.b, &x.d, &y.d),
            central: x.central + y.central,
        }
    }

    pub fn mat_det(&self, x: &Mat2Local) -> LocalElem {
        self.sub(&self.mul(&x.a, &x.d), &self.mul(&x.b, &x.c))
    }

    /// Inverse of a matrix whose determinant is `π^v · unit`.
    pub fn mat_inv(&self, x: &Mat2Local) -> Result<Mat2Local, LocalError> {
        let det = self.mat_det(x);
        let v = self.valuation(&det);
        if v >= self.params.n {
            return Err(LocalError::Precision { needed: v + 1, have: self.params.n });
        }
        let u = self.inv(&self.div_pi_pow(&det, v)?)?;
        Ok(Mat2Local {
            a: self.mul(&x.d, &u),
            b: self.neg(&self.mul(&x.b, &u)),
            c: self.neg(&self.mul(&x.c, &u)),
            d: self.mul(&x.a, &u),
            central: -x.central - v as i32,
        })
    }

    /// `diag(1, π)`.
    pub fn alpha(&self) -> Mat2Local {
        self.mat(self.one(), self.zero(), self.zero(), self.pi_pow(1))
    }

    /// `(0 1; π 0)`.
    pub fn beta(&self) -> Mat2Local {
        self.mat(self.zero(), self.one(), self.pi_pow(1), self.zero())
    }

    /// `(0 1; 1 0)`.
    pub fn w(&self) -> Mat2Local {
        self.mat(self.zero(), self.one(), self.one(), self.zero())
    }

    /// `(1 b; 0 1)`.
    pub fn delta_b(&self, b: LocalElem) -> Mat2Local {
        self.mat(self.one(), b, self.zero(), self.one())
    }

    /// `(1 0; πc 1)`.
    pub fn delta_c(&self, c: LocalElem) -> Mat2Local {
        self.mat(self.one(), self.zero(), self.mul_pi(&c), self.one())
    }

    /// `diag(1 + πa, 1)`.
    pub fn delta_a(&self, a: LocalElem) -> Mat2Local {
        self.mat(self.add(&self.one(), &self.mul_pi(&a)), self.zero(), self.zero(), self.one())
    }

    pub fn diag(&self, a: LocalElem, d: LocalElem) -> Mat2Local {
        self.mat(a, self.zero(), self.zero(), d)
    }

    /// `(1 0; [λ] 1)`.
    pub fn lower_unipotent(&self, lambda: FieldElem) -> Mat2Local {
        self.mat(self.one(), self.zero(), self.teichmuller(lambda), self.one())
    }

    /// Reduction mod π of an integral matrix.
    pub fn mat_residue(&self, x: &Mat2Local) -> [FieldElem; 4] {
        [self.residue(&x.a), self.residue(&x.b), self.residue(&x.c), self.residue(&x.d)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32, f: u32, e: u32, n: u32) -> LocalRing {
        LocalRing::new(LocalParams::new(p, f, e, n)).unwrap()
    }

    #[test]
    fn teichmuller_sum_example() {
        let r = ring(5, 1, 1, 2);
        let one = r.teichmuller(FieldElem(1));
        let two = r.add(&one, &one);
        assert_eq!(r.digit_expand(&two), vec![FieldElem(2), FieldElem(4)]);
        assert_eq!(r.digit_expand(&r.from_int(2)), vec![FieldElem(2), FieldElem(4)]);
        assert_eq!(r.carry_p0(FieldElem(1), FieldElem(1)).unwrap(), FieldElem(4));
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        for (p, f, e) in [(5, 2, 1), (7, 1, 2), (3, 2, 3)] {
            let r = ring(p, f, e, 6);
            let gf = r.field().clone();
            for a in gf.elements() {
                for b in gf.elements().step_by(3) {
                    let lhs = r.mul(&r.teichmuller(a), &r.teichmuller(b));
                    assert_eq!(lhs, r.teichmuller(gf.mul(a, b)));
                }
            }
        }
    }

    #[test]
    fn digits_round_trip() {
        let r = ring(7, 2, 2, 5);
        let gf = r.field().clone();
        let digits: Vec<_> = [3u32, 17, 0, 48, 5].iter().map(|&c| gf.elem(c)).collect();
        let x = r.digit_build(&digits);
        assert_eq!(r.digit_expand(&x), digits);
        assert_eq!(r.digit_expand(&r.zero()), vec![FieldElem::ZERO; 5]);
        let t = r.truncate(&x, 2);
        assert_eq!(r.digit_expand(&t)[..3], [digits[0], digits[1], FieldElem::ZERO]);
        assert_eq!(r.truncate(&x, 0), r.zero());
        assert_eq!(r.truncate(&x, 5), x);
    }

    #[test]
    fn inverse_and_valuation() {
        let r = ring(7, 1, 2, 6);
        let x = r.add(&r.from_int(3), &r.pi_pow(1));
        let y = r.inv(&x).unwrap();
        assert_eq!(r.mul(&x, &y), r.one());
        assert!(r.inv(&r.pi_pow(1)).is_err());
        assert_eq!(r.valuation(&r.pi_pow(3)), 3);
        assert_eq!(r.valuation(&r.from_int(7)), 2);
        assert_eq!(r.valuation(&r.zero()), 6);
        assert_eq!(r.div_pi_pow(&r.pi_pow(3), 2).unwrap(), r.pi_pow(1));
    }

    #[test]
    fn eisenstein_unit_changes_pi() {
        let r = LocalRing::new(LocalParams { p: 5, f: 1, e: 2, n: 6, unit: 2 }).unwrap();
        // π^2 = 5·2
        assert_eq!(r.pi_pow(2), r.from_int(10));
        assert!(LocalRing::new(LocalParams { p: 5, f: 1, e: 2, n: 6, unit: 5 }).is_err());
    }

    #[test]
    fn no_low_carry_when_ramified() {
        let r = ring(7, 1, 2, 4);
        let gf = r.field().clone();
        for a in gf.elements() {
            for b in gf.elements() {
                let s = r.add(&r.teichmuller(a), &r.teichmuller(b));
                let d = r.digit_expand(&s);
                assert_eq!(d[0], gf.add(a, b));
                assert_eq!(d[1], FieldElem::ZERO);
            }
        }
    }

    #[test]
    fn matrix_inverse() {
        let r = ring(5, 1, 1, 5);
        let b = r.beta();
        let bi = r.mat_inv(&b).unwrap();
        let prod = r.mat_mul(&b, &bi);
        assert_eq!(prod.central, -1);
        // β·β^{-1} = π^{-1}·(π 0; 0 π)
        assert_eq!(prod.a, r.pi_pow(1));
        assert_eq!(prod.d, r.pi_pow(1));
        assert!(prod.b.is_zero() && prod.c.is_zero());
    }
}
