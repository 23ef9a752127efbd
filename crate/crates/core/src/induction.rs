//! The Bruhat–Tits tree model of `ind_{KZ}^G σ`.
//!
//! A vertex is a coset `g KZ` with `g = g^0_{n,μ} = (π^n μ; 0 1)` (side 0) or
//! `g = g^1_{n,μ} = (1 0; πμ π^{n+1})` (side 1), `μ = Σ_{i<n} π^i [μ_i]`.
//! Elements are finitely supported maps from vertices to `V_σ`, read as
//! `Σ g_v ⊗ value_v`. The group acts by left translation,
//! `h·(g ⊗ v) = g' ⊗ σ(k)v` where `hg = g' k π^m`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::gfq::{FieldElem, Gf};
use crate::localring::{LocalElem, LocalError, LocalParams, LocalRing, Mat2Local};
use crate::weights::{SerreWeight, SymRep, SymVector, WeightError};

/// Digits of precision carried beyond the radius budget.
pub const PRECISION_SLACK: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InductionError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("coset normal form needs {needed} digits, have {have}")]
    Precision { needed: u32, have: u32 },
    #[error("element of radius {radius} exceeds the budget {budget}")]
    RadiusExceedsBudget { radius: u32, budget: u32 },
    #[error("matrix is singular at working precision")]
    Singular,
    #[error("invalid element parameters: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, InductionError>;

/// A tree vertex. `code = Σ μ_i q^{n−1−i}`, so the last digit is the least
/// significant and the parent is `code / q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Vertex {
    pub n: u32,
    pub side: u8,
    pub code: u64,
}

impl Vertex {
    pub const ID: Vertex = Vertex { n: 0, side: 0, code: 0 };
    pub const ALPHA: Vertex = Vertex { n: 0, side: 1, code: 0 };

    pub fn new(side: u8, digits: &[FieldElem], q: u64) -> Self {
        let code = digits.iter().fold(0u64, |acc, d| acc * q + d.code() as u64);
        Vertex { n: digits.len() as u32, side, code }
    }

    pub fn digits(&self, q: u64) -> Vec<FieldElem> {
        let mut out = vec![FieldElem::ZERO; self.n as usize];
        let mut c = self.code;
        for slot in out.iter_mut().rev() {
            *slot = FieldElem((c % q) as u32);
            c /= q;
        }
        out
    }

    /// The neighbour one step closer to the edge `{Id, α}`; for the two
    /// radius-0 vertices this is the other endpoint of the edge.
    pub fn parent(&self, q: u64) -> Vertex {
        if self.n == 0 {
            Vertex { n: 0, side: 1 - self.side, code: 0 }
        } else {
            Vertex { n: self.n - 1, side: self.side, code: self.code / q }
        }
    }

    /// Last digit `μ_{n−1}` (zero at radius 0).
    pub fn last_digit(&self, q: u64) -> FieldElem {
        if self.n == 0 {
            FieldElem::ZERO
        } else {
            FieldElem((self.code % q) as u32)
        }
    }

    pub fn child(&self, q: u64, lambda: FieldElem) -> Vertex {
        Vertex { n: self.n + 1, side: self.side, code: self.code * q + lambda.code() as u64 }
    }

    /// Distance to the vertex `Id`.
    pub fn distance_to_id(&self) -> u32 {
        self.n + self.side as u32
    }
}

/// A finitely supported element of the induced representation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InducedElement {
    pub terms: BTreeMap<Vertex, SymVector>,
}

impl InducedElement {
    pub fn zero() -> Self {
        InducedElement { terms: BTreeMap::new() }
    }

    pub fn single(v: Vertex, value: SymVector) -> Self {
        let mut x = InducedElement::zero();
        if value.iter().any(|c| !c.is_zero()) {
            x.terms.insert(v, value);
        }
        x
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn radius(&self) -> u32 {
        self.terms.keys().map(|v| v.n).max().unwrap_or(0)
    }

    /// Largest distance from `Id` over the support.
    pub fn reach(&self) -> u32 {
        self.terms.keys().map(|v| v.distance_to_id()).max().unwrap_or(0)
    }

    pub fn get(&self, v: &Vertex) -> Option<&SymVector> {
        self.terms.get(v)
    }

    /// `self += c·value` at vertex `v`.
    pub fn add_term(&mut self, gf: &Gf, v: Vertex, c: FieldElem, value: &[FieldElem]) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(v).or_insert_with(|| vec![FieldElem::ZERO; value.len()]);
        for (s, &x) in slot.iter_mut().zip(value) {
            if !x.is_zero() {
                *s = gf.mul_add(*s, c, x);
            }
        }
        if slot.iter().all(|x| x.is_zero()) {
            self.terms.remove(&v);
        }
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, gf: &Gf, c: FieldElem, other: &InducedElement) {
        for (v, val) in &other.terms {
            self.add_term(gf, *v, c, val);
        }
    }

    pub fn scaled(&self, gf: &Gf, c: FieldElem) -> InducedElement {
        let mut out = InducedElement::zero();
        out.add_scaled(gf, c, self);
        out
    }

    pub fn sub(&self, gf: &Gf, other: &InducedElement) -> InducedElement {
        let mut out = self.clone();
        out.add_scaled(gf, gf.neg(FieldElem::ONE), other);
        out
    }

    /// Part supported at radius exactly `n`.
    pub fn sphere(&self, n: u32) -> InducedElement {
        InducedElement {
            terms: self.terms.iter().filter(|(v, _)| v.n == n).map(|(v, x)| (*v, x.clone())).collect(),
        }
    }
}

/// Right-coset decomposition `M = π^central · g_vertex · k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CosetForm {
    pub vertex: Vertex,
    /// `k mod π` as `[a, b, c, d]`.
    pub k_bar: [FieldElem; 4],
    pub central: i32,
}

/// Named elements with closed-form definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Named {
    /// `s_n^k = Σ_μ μ_{n−1}^k g^0_{n,μ} ⊗ x^r`; `s_0^0 = Id ⊗ x^r`.
    S { n: u32, k: u64 },
    /// `t_n^k`: value `x_k^{r_k−1} y_k` in factor k.
    T { n: u32, k: u32 },
    /// `t_n^{k⃗}`: value `⊗ x_j^{r_j−k_j} y_j^{k_j}`.
    TVec { n: u32, k: Vec<u32> },
    /// `A_n^0 = s_n^0`.
    A0 { n: i32 },
    /// `A_n^1 = β s_n^0`.
    A1 { n: i32 },
}

/// The induced representation of one Serre weight at a fixed precision.
#[derive(Debug, Clone)]
pub struct Model {
    gf: Arc<Gf>,
    ring: Arc<LocalRing>,
    rep: SymRep,
    q: u64,
    /// `(−λ)^{exponent(idx)}` at `[λ.code · dim + idx]`.
    neg_pows: Vec<FieldElem>,
    /// `λ^{−exponent(idx)}` at `[λ.code · dim + idx]` (zero for λ = 0).
    inv_pows: Vec<FieldElem>,
}

impl Model {
    /// Model for `weight` over a field with ramification `e`, precise enough
    /// for elements up to radius `budget`.
    pub fn new(weight: &SerreWeight, e: u32, budget: u32) -> Result<Self> {
        let params = LocalParams::new(weight.p, weight.f(), e, budget + PRECISION_SLACK);
        let ring = Arc::new(LocalRing::new(params)?);
        Ok(Self::with_ring(weight, ring))
    }

    pub fn with_ring(weight: &SerreWeight, ring: Arc<LocalRing>) -> Self {
        let gf = ring.field().clone();
        assert_eq!(gf.degree(), weight.f(), "weight and ring disagree on f");
        let q = gf.order() as u64;
        let rep = SymRep::new(weight);
        let dim = rep.dim();
        let mut neg_pows = Vec::with_capacity(q as usize * dim);
        let mut inv_pows = Vec::with_capacity(q as usize * dim);
        for lambda in gf.elements() {
            let inv = gf.inv(lambda).unwrap_or(FieldElem::ZERO);
            for idx in 0..dim {
                neg_pows.push(gf.pow(gf.neg(lambda), rep.exponent(idx)));
                inv_pows.push(gf.pow(inv, rep.exponent(idx)));
            }
        }
        Model { gf, ring, rep, q, neg_pows, inv_pows }
    }

    pub fn gf(&self) -> &Arc<Gf> {
        &self.gf
    }

    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    pub fn rep(&self) -> &SymRep {
        &self.rep
    }

    pub fn weight(&self) -> &SerreWeight {
        self.rep.weight()
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Largest radius the working precision supports.
    pub fn budget(&self) -> u32 {
        self.ring.precision() - PRECISION_SLACK
    }

    /// `Σ_{i<n} π^i [μ_i]`.
    pub fn digits_elem(&self, digits: &[FieldElem]) -> LocalElem {
        self.ring.digit_build(digits)
    }

    pub fn vertex_matrix(&self, v: &Vertex) -> Mat2Local {
        let r = &self.ring;
        let mu = self.digits_elem(&v.digits(self.q));
        if v.side == 0 {
            r.mat(r.pi_pow(v.n), mu, r.zero(), r.one())
        } else {
            r.mat(r.one(), r.zero(), r.mul_pi(&mu), r.pi_pow(v.n + 1))
        }
    }

    /// Decomposes `M = π^m g k` with `g` a vertex representative, `k ∈ K`.
    pub fn coset_normal_form(&self, m: &Mat2Local) -> Result<CosetForm> {
        let r = &self.ring;
        let prec = r.precision();
        let t = [m.a, m.b, m.c, m.d].iter().map(|x| r.valuation(x)).min().unwrap();
        if t >= prec {
            return Err(InductionError::Singular);
        }
        let [a, b, c, d] = [m.a, m.b, m.c, m.d].map(|x| r.div_pi_pow(&x, t).expect("valuation checked"));
        let avail = prec - t;
        let det = r.sub(&r.mul(&a, &d), &r.mul(&b, &c));
        let vd = r.valuation(&det);
        if vd >= avail {
            return Err(InductionError::Singular);
        }
        let central = m.central + t as i32;
        if r.is_unit(&c) || r.is_unit(&d) {
            let swapped = !r.is_unit(&d);
            let (a, b, c, d) = if swapped { (b, a, d, c) } else { (a, b, c, d) };
            let n = vd;
            if n + 1 > avail {
                return Err(InductionError::Precision { needed: n + 1 + t, have: prec });
            }
            let ratio = r.mul(&b, &r.inv(&d)?);
            let digits: Vec<FieldElem> = r.digit_expand(&ratio).into_iter().take(n as usize).collect();
            let mu = r.digit_build(&digits);
            let top_a = r.sub(&a, &r.mul(&mu, &c));
            let top_b = r.sub(&b, &r.mul(&mu, &d));
            debug_assert!(r.valuation(&top_a) >= n && r.valuation(&top_b) >= n);
            let mut k = [r.digit(&top_a, n), r.digit(&top_b, n), r.residue(&c), r.residue(&d)];
            if swapped {
                k = [k[1], k[0], k[3], k[2]];
            }
            Ok(CosetForm { vertex: Vertex::new(0, &digits, self.q), k_bar: k, central })
        } else {
            let swapped = !r.is_unit(&a);
            let (a, b, c, d) = if swapped { (b, a, d, c) } else { (a, b, c, d) };
            debug_assert!(vd >= 1);
            let n = vd - 1;
            if n + 2 > avail {
                return Err(InductionError::Precision { needed: n + 2 + t, have: prec });
            }
            let z = r.mul(&c, &r.inv(&a)?);
            let z = r.div_pi_pow(&z, 1)?;
            let digits: Vec<FieldElem> = r.digit_expand(&z).into_iter().take(n as usize).collect();
            let pimu = r.mul_pi(&r.digit_build(&digits));
            let low_c = r.sub(&c, &r.mul(&pimu, &a));
            let low_d = r.sub(&d, &r.mul(&pimu, &b));
            debug_assert!(r.valuation(&low_c) > n && r.valuation(&low_d) > n);
            let mut k = [r.residue(&a), r.residue(&b), r.digit(&low_c, n + 1), r.digit(&low_d, n + 1)];
            if swapped {
                k = [k[1], k[0], k[3], k[2]];
            }
            Ok(CosetForm { vertex: Vertex::new(1, &digits, self.q), k_bar: k, central })
        }
    }

    /// `g·(v ⊗ value)`.
    pub fn act_vertex(&self, g: &Mat2Local, v: &Vertex, value: &[FieldElem]) -> Result<(Vertex, SymVector)> {
        let m = self.ring.mat_mul(g, &self.vertex_matrix(v));
        let cf = self.coset_normal_form(&m)?;
        Ok((cf.vertex, self.rep.act(&self.gf, cf.k_bar, value)?))
    }

    pub fn act(&self, g: &Mat2Local, x: &InducedElement) -> Result<InducedElement> {
        let mut out = InducedElement::zero();
        for (v, val) in &x.terms {
            let (v2, val2) = self.act_vertex(g, v, val)?;
            out.add_term(&self.gf, v2, FieldElem::ONE, &val2);
        }
        Ok(out)
    }

    /// `Σ_i c_ī (−λ)^i` with `i = Σ i_j p^j`, the top coefficient that
    /// `T(u ⊗ c)` places on the child of u with last digit λ (side 0).
    fn up_value(&self, c: &[FieldElem], lambda: FieldElem, side: u8) -> FieldElem {
        let gf = &self.gf;
        let row = &self.neg_pows[lambda.code() as usize * c.len()..][..c.len()];
        let mut acc = FieldElem::ZERO;
        for (idx, &x) in c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let i = if side == 0 { idx } else { self.rep.complement(idx) };
            acc = gf.mul_add(acc, x, row[i]);
        }
        acc
    }

    /// The value `T(u ⊗ c)` places on the parent of u.
    fn down_value(&self, u: &Vertex, c: &[FieldElem]) -> Result<Option<SymVector>> {
        let gf = &self.gf;
        let mu = u.last_digit(self.q);
        let (coef, base, g) = if u.side == 0 {
            // c_r · σ((1 μ; 0 1)) y^r
            (c[self.rep.top_y()], self.rep.top_y(), [FieldElem::ONE, mu, FieldElem::ZERO, FieldElem::ONE])
        } else {
            // c_0 · σ((1 0; μ 1)) x^r
            (c[self.rep.top_x()], self.rep.top_x(), [FieldElem::ONE, FieldElem::ZERO, mu, FieldElem::ONE])
        };
        if coef.is_zero() {
            return Ok(None);
        }
        let mut v = self.rep.act(gf, g, &self.rep.basis(base))?;
        // σ(g) carries det^w = 1 here.
        for x in v.iter_mut() {
            *x = gf.mul(*x, coef);
        }
        Ok(Some(v))
    }

    fn hecke_into(&self, u: &Vertex, c: &[FieldElem], out: &mut InducedElement) {
        let gf = &self.gf;
        let top = if u.side == 0 { self.rep.top_x() } else { self.rep.top_y() };
        let unit = self.rep.basis(top);
        for lambda in gf.elements() {
            let val = self.up_value(c, lambda, u.side);
            out.add_term(gf, u.child(self.q, lambda), val, &unit);
        }
        if let Some(v) = self.down_value(u, c).expect("unipotent matrices are invertible") {
            out.add_term(gf, u.parent(self.q), FieldElem::ONE, &v);
        }
    }

    /// The Hecke operator T, by its local formulas.
    pub fn hecke(&self, x: &InducedElement) -> InducedElement {
        let mut out = InducedElement::zero();
        for (u, c) in &x.terms {
            self.hecke_into(u, c, &mut out);
        }
        out
    }

    /// Splits `y = R(y) + T(z)` with `z` supported in radius `< radius(y)`
    /// and `R(y)` free of the in-box top monomials on every child block.
    /// `R(y) = 0` iff `y ∈ T(B_{n−1})`.
    pub fn reduce_mod_t(&self, y: &InducedElement, budget: u32) -> Result<(InducedElement, InducedElement)> {
        if y.radius() > budget {
            return Err(InductionError::RadiusExceedsBudget { radius: y.radius(), budget });
        }
        let gf = &self.gf;
        let q = self.q;
        let mut rem = y.clone();
        let mut pre = InducedElement::zero();
        let dim = self.dim();
        let lambdas: Vec<FieldElem> = gf.elements().collect();
        for m in (1..=y.radius()).rev() {
            let lo = Vertex { n: m, side: 0, code: 0 };
            let hi = Vertex { n: m + 1, side: 0, code: 0 };
            let parents: BTreeSet<Vertex> = rem.terms.range(lo..hi).map(|(v, _)| v.parent(q)).collect();
            for u in parents {
                let top = if u.side == 0 { self.rep.top_x() } else { self.rep.top_y() };
                let values: Vec<FieldElem> = lambdas
                    .iter()
                    .map(|&l| rem.get(&u.child(q, l)).map_or(FieldElem::ZERO, |v| v[top]))
                    .collect();
                if values.iter().all(|v| v.is_zero()) {
                    continue;
                }
                let mut c = vec![FieldElem::ZERO; dim];
                let mut any = false;
                for idx in 0..dim {
                    let i = self.rep.exponent(idx);
                    let a = self.poly_coefficient(&values, idx);
                    if a.is_zero() {
                        continue;
                    }
                    let sign = if i.is_multiple_of(2) { a } else { gf.neg(a) };
                    let slot = if u.side == 0 { idx } else { self.rep.complement(idx) };
                    c[slot] = sign;
                    any = true;
                }
                if !any {
                    continue;
                }
                let mut img = InducedElement::zero();
                self.hecke_into(&u, &c, &mut img);
                rem.add_scaled(gf, gf.neg(FieldElem::ONE), &img);
                pre.add_term(gf, u, FieldElem::ONE, &c);
            }
        }
        Ok((rem, pre))
    }

    /// Coefficient of `λ^{exponent(idx)}` in the reduced interpolating
    /// polynomial of the function `values[λ.code]` on F_q.
    fn poly_coefficient(&self, values: &[FieldElem], idx: usize) -> FieldElem {
        let gf = &self.gf;
        let i = self.rep.exponent(idx);
        if i == 0 {
            return values[0];
        }
        let dim = self.dim();
        let mut s = FieldElem::ZERO;
        for (code, &v) in values.iter().enumerate().skip(1) {
            if !v.is_zero() {
                s = gf.mul_add(s, v, self.inv_pows[code * dim + idx]);
            }
        }
        if i == self.q - 1 {
            gf.neg(gf.add(s, values[0]))
        } else {
            gf.neg(s)
        }
    }

    /// `Some(x)` with `T(x) = y` when `y ∈ T(B_{n−1})`, else `None`.
    pub fn im_t_membership(&self, y: &InducedElement, budget: u32) -> Result<Option<InducedElement>> {
        let (rem, pre) = self.reduce_mod_t(y, budget)?;
        Ok(rem.is_zero().then_some(pre))
    }

    /// `Σ_{μ∈I_n} Π_i μ_i^{e_i} g^0_{n,μ} ⊗ value`, with `exps` indexed by
    /// digit position (`μ_0` first).
    pub fn monomial_element(&self, exps: &[u64], value: &[FieldElem]) -> InducedElement {
        let gf = &self.gf;
        let n = exps.len() as u32;
        let mut out = InducedElement::zero();
        let total = self.q.pow(n);
        for code in 0..total {
            let v = Vertex { n, side: 0, code };
            let digits = v.digits(self.q);
            let mut c = FieldElem::ONE;
            for (d, &e) in digits.iter().zip(exps) {
                c = gf.mul(c, gf.pow(*d, e));
                if c.is_zero() {
                    break;
                }
            }
            out.add_term(gf, v, c, value);
        }
        out
    }

    pub fn build_element(&self, kind: &Named) -> Result<InducedElement> {
        let rep = &self.rep;
        let wt = self.weight();
        match kind {
            Named::S { n, k } => {
                if *k >= self.q {
                    return Err(InductionError::BadParameter(format!("s_n^k needs k < q, got {k}")));
                }
                if *n == 0 {
                    return Ok(InducedElement::single(Vertex::ID, rep.basis(rep.top_x())));
                }
                let mut exps = vec![0u64; *n as usize];
                exps[*n as usize - 1] = *k;
                Ok(self.monomial_element(&exps, &rep.basis(rep.top_x())))
            }
            Named::T { n, k } => {
                let f = wt.f();
                if *k >= f || wt.r[*k as usize] == 0 {
                    return Err(InductionError::BadParameter(format!("t_n^k needs r_k > 0, k = {k}")));
                }
                let mut multi = vec![0u32; f as usize];
                multi[*k as usize] = 1;
                Ok(self.monomial_element(&vec![0; *n as usize], &rep.basis(rep.index_of(&multi))))
            }
            Named::TVec { n, k } => {
                if k.len() != wt.r.len() || k.iter().zip(&wt.r).any(|(a, b)| a > b) {
                    return Err(InductionError::BadParameter(format!("t_n^k needs 0 <= k_j <= r_j, got {k:?}")));
                }
                Ok(self.monomial_element(&vec![0; *n as usize], &rep.basis(rep.index_of(k))))
            }
            Named::A0 { n } => {
                if *n < 0 {
                    return Ok(InducedElement::zero());
                }
                self.build_element(&Named::S { n: *n as u32, k: 0 })
            }
            Named::A1 { n } => {
                let a0 = self.build_element(&Named::A0 { n: *n })?;
                self.act(&self.ring.beta(), &a0)
            }
        }
    }

    /// `Σ_{λ∈I_1} g^0_{1,λ}·x`.
    pub fn propagate(&self, x: &InducedElement) -> Result<InducedElement> {
        let mut out = InducedElement::zero();
        for lambda in self.gf.elements() {
            let g = self.vertex_matrix(&Vertex::new(0, &[lambda], self.q));
            out.add_scaled(&self.gf, FieldElem::ONE, &self.act(&g, x)?);
        }
        Ok(out)
    }
}

/// Dense coordinates for elements supported in radius `≤ budget`:
/// `(vertex, basis index) ↦ u32`.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub q: u64,
    pub dim: usize,
    pub budget: u32,
}

impl Layout {
    pub fn new(model: &Model, budget: u32) -> Self {
        Layout { q: model.q(), dim: model.dim(), budget }
    }

    fn offset(&self, n: u32, side: u8) -> u64 {
        let below: u64 = (0..n).map(|k| 2 * self.q.pow(k)).sum();
        below + side as u64 * self.q.pow(n)
    }

    pub fn vertex_index(&self, v: &Vertex) -> u64 {
        self.offset(v.n, v.side) + v.code
    }

    pub fn index(&self, v: &Vertex, basis: usize) -> u64 {
        self.vertex_index(v) * self.dim as u64 + basis as u64
    }

    pub fn size(&self) -> u64 {
        self.offset(self.budget + 1, 0) * self.dim as u64
    }

    pub fn locate(&self, index: u64) -> (Vertex, usize) {
        let basis = (index % self.dim as u64) as usize;
        let mut vi = index / self.dim as u64;
        let mut n = 0u32;
        loop {
            let width = self.q.pow(n);
            for side in 0..2u8 {
                if vi < width {
                    return (Vertex { n, side, code: vi }, basis);
                }
                vi -= width;
            }
            n += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(p: u32, r: Vec<u32>, w: i64, e: u32, budget: u32) -> Model {
        Model::new(&SerreWeight::new(p, r, w).unwrap(), e, budget).unwrap()
    }

    #[test]
    fn vertex_matrices_are_their_own_normal_form() {
        let m = model(5, vec![2, 1], 0, 1, 3);
        let q = m.q();
        for v in [
            Vertex::ID,
            Vertex::ALPHA,
            Vertex { n: 2, side: 0, code: 17 },
            Vertex { n: 3, side: 1, code: 300 },
        ] {
            let cf = m.coset_normal_form(&m.vertex_matrix(&v)).unwrap();
            assert_eq!(cf.vertex, v, "q = {q}");
            assert_eq!(cf.k_bar, [FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE]);
        }
    }

    #[test]
    fn beta_lands_on_alpha() {
        let m = model(7, vec![3], 0, 1, 2);
        let cf = m.coset_normal_form(&m.ring().beta()).unwrap();
        assert_eq!(cf.vertex, Vertex::ALPHA);
    }

    #[test]
    fn translation_by_b_shifts_first_digit() {
        let m = model(7, vec![3, 3], 0, 1, 2);
        let gf = m.gf().clone();
        let b = gf.elem(10);
        let r = m.ring();
        let x = InducedElement::single(Vertex::new(0, &[gf.elem(4)], 49), m.rep().basis(0));
        let y = m.act(&r.delta_b(r.teichmuller(b)), &x).unwrap();
        let expect = InducedElement::single(Vertex::new(0, &[gf.add(gf.elem(4), b)], 49), m.rep().basis(0));
        assert_eq!(y, expect);
    }

    #[test]
    fn hecke_examples() {
        let m = model(7, vec![3, 3], 0, 1, 2);
        let gf = m.gf().clone();
        let id_x = InducedElement::single(Vertex::ID, m.rep().basis(m.rep().top_x()));
        let s10 = m.build_element(&Named::S { n: 1, k: 0 }).unwrap();
        assert_eq!(m.hecke(&id_x), s10);
        // T(Id ⊗ y^r) = (−1)^r s_1^r + α ⊗ y^r
        let id_y = InducedElement::single(Vertex::ID, m.rep().basis(m.rep().top_y()));
        let mut expect = m.build_element(&Named::S { n: 1, k: 24 }).unwrap();
        expect.add_term(&gf, Vertex::ALPHA, FieldElem::ONE, &m.rep().basis(m.rep().top_y()));
        assert_eq!(m.hecke(&id_y), expect);
    }

    #[test]
    fn trivial_weight_hecke() {
        let m = model(7, vec![0], 0, 1, 2);
        let a00 = m.build_element(&Named::A0 { n: 0 }).unwrap();
        let mut expect = m.build_element(&Named::A0 { n: 1 }).unwrap();
        expect.add_scaled(m.gf(), FieldElem::ONE, &m.build_element(&Named::A1 { n: 0 }).unwrap());
        assert_eq!(m.hecke(&a00), expect);
    }

    #[test]
    fn membership_examples() {
        let m = model(7, vec![3, 3], 0, 1, 2);
        let s1r = m.build_element(&Named::S { n: 1, k: 24 }).unwrap();
        assert!(m.im_t_membership(&s1r, 1).unwrap().is_none());
        let s13 = m.build_element(&Named::S { n: 1, k: 3 }).unwrap();
        assert!(m.im_t_membership(&s13, 1).unwrap().is_some());
        let s2r = m.build_element(&Named::S { n: 2, k: 24 }).unwrap();
        assert!(m.im_t_membership(&s2r, 2).unwrap().is_some());
        assert!(m.im_t_membership(&s2r, 1).is_err());
    }

    #[test]
    fn propagate_raises_radius() {
        let m = model(5, vec![2], 0, 1, 3);
        let s = m.build_element(&Named::S { n: 1, k: 3 }).unwrap();
        assert_eq!(m.propagate(&s).unwrap(), m.build_element(&Named::S { n: 2, k: 3 }).unwrap());
        let id = m.build_element(&Named::A0 { n: 0 }).unwrap();
        assert_eq!(m.propagate(&id).unwrap(), m.build_element(&Named::S { n: 1, k: 0 }).unwrap());
    }

    #[test]
    fn layout_round_trip() {
        let m = model(5, vec![2], 0, 1, 2);
        let layout = Layout::new(&m, 2);
        for idx in [0u64, 5, 17, 40, 100, layout.size() - 1] {
            let (v, b) = layout.locate(idx);
            assert_eq!(layout.index(&v, b), idx);
        }
    }
}
