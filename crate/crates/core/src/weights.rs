//! Serre weights `det^w ⊗ ⊗_j Sym^{r_j}`, their GL2(F_q) action, Iwahori
//! characters, and the weight-set combinatorics driving the staged
//! quotient (the `A_j` operators and their schedules).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::gfq::{binom_mod_p, FieldElem, Gf};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("digit r_{j} = {value} outside [0, {max}]")]
    DigitOutOfRange { j: usize, value: u32, max: u32 },
    #[error("expected {expected} digits, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("singular matrix has no action")]
    Singular,
    #[error("character ({alpha}, {beta}) is irregular: digit of {diff} equals 0 or p-1, so the weight is ambiguous")]
    Irregular { alpha: u64, beta: u64, diff: u64 },
    #[error("exponent {0} violates the digit constraints of the element")]
    BadExponent(u64),
    #[error("weight sets are only defined for e = 1 or for f = 2 with 2e < min r_j; got e = {e}, f = {f}")]
    UnsupportedRegime { e: u32, f: u32 },
    #[error("index {0} is not a digit position")]
    BadIndex(u32),
}

/// `det^w ⊗ ⊗_j Sym^{r_j}` over F_q, q = p^f.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SerreWeight {
    pub p: u32,
    pub r: Vec<u32>,
    /// Determinant twist, reduced mod q − 1.
    pub w: u64,
}

impl SerreWeight {
    pub fn new(p: u32, r: Vec<u32>, w: i64) -> Result<Self, WeightError> {
        for (j, &v) in r.iter().enumerate() {
            if v > p - 1 {
                return Err(WeightError::DigitOutOfRange { j, value: v, max: p - 1 });
            }
        }
        let q1 = (p as i64).pow(r.len() as u32) - 1;
        Ok(SerreWeight { p, r, w: w.rem_euclid(q1) as u64 })
    }

    pub fn f(&self) -> u32 {
        self.r.len() as u32
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.f())
    }

    pub fn dim(&self) -> usize {
        self.r.iter().map(|&x| x as usize + 1).product()
    }

    /// `r = Σ r_j p^j`.
    pub fn param(&self) -> u64 {
        digits_value(&self.r, self.p)
    }

    pub fn is_regular(&self) -> bool {
        self.r.iter().all(|&x| x >= 1 && x + 2 <= self.p)
    }

    /// Character of the highest vector `⊗ x_j^{r_j}`.
    pub fn highest_char(&self) -> ICharacter {
        let q1 = self.q() - 1;
        ICharacter::new(self.param() + self.w, self.w, q1)
    }

    /// `(r_0, w_0, …, r_{f-1}, w_{f-1})` with `w = Σ w_j p^j`, `0 ≤ w < q − 1`.
    pub fn tuple(&self) -> Vec<u64> {
        let wd = digits_of(self.w, self.p, self.f());
        self.r
            .iter()
            .zip(wd)
            .flat_map(|(&r, w)| [r as u64, w as u64])
            .collect()
    }
}

impl fmt::Display for SerreWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.r.iter().map(|x| x.to_string()).collect();
        write!(f, "det^{} Sym^({})", self.w, r.join(","))
    }
}

/// `χ(diag(a, d)) = a^α d^β`, exponents mod q − 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ICharacter {
    pub alpha: u64,
    pub beta: u64,
}

impl ICharacter {
    pub fn new(alpha: u64, beta: u64, q1: u64) -> Self {
        ICharacter { alpha: alpha % q1, beta: beta % q1 }
    }

    /// The form `a^{r−2k}(ad)^k` (times the twist `(ad)^w`).
    pub fn from_shift(r: i64, k: i64, w: i64, q1: u64) -> Self {
        let q1i = q1 as i64;
        ICharacter {
            alpha: (r - k + w).rem_euclid(q1i) as u64,
            beta: (k + w).rem_euclid(q1i) as u64,
        }
    }

    /// Character of `β·x` when `x` has character `self`.
    pub fn conjugate(self) -> Self {
        ICharacter { alpha: self.beta, beta: self.alpha }
    }

    pub fn eval(self, gf: &Gf, a: FieldElem, d: FieldElem) -> FieldElem {
        gf.mul(gf.pow(a, self.alpha), gf.pow(d, self.beta))
    }
}

impl fmt::Display for ICharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a^{} d^{}", self.alpha, self.beta)
    }
}

pub fn digits_value(d: &[u32], p: u32) -> u64 {
    d.iter().rev().fold(0u64, |acc, &x| acc * p as u64 + x as u64)
}

pub fn digits_of(mut v: u64, p: u32, f: u32) -> Vec<u32> {
    (0..f)
        .map(|_| {
            let d = (v % p as u64) as u32;
            v /= p as u64;
            d
        })
        .collect()
}

/// The weight whose highest vector carries `χ`: `r ≡ α − β`, `w = β`.
pub fn weight_from_char(chi: ICharacter, p: u32, f: u32) -> Result<SerreWeight, WeightError> {
    let q1 = (p as u64).pow(f) - 1;
    let diff = (chi.alpha + q1 - chi.beta) % q1;
    let r = digits_of(diff, p, f);
    if r.iter().any(|&x| x == 0 || x == p - 1) {
        return Err(WeightError::Irregular { alpha: chi.alpha, beta: chi.beta, diff });
    }
    SerreWeight::new(p, r, chi.beta as i64)
}

/// The named elements whose I-characters have closed forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementKind {
    /// `s_n^k`.
    S { k: u64 },
    /// `t_n^k`, with k a digit position.
    T { k: u32 },
    /// `t_n^{k⃗}`.
    TVec { k: Vec<u32> },
}

/// Closed-form I-character of a named invariant of `ind σ`.
pub fn char_of_element(kind: &ElementKind, weight: &SerreWeight) -> Result<ICharacter, WeightError> {
    let q = weight.q();
    let q1 = q - 1;
    let r = weight.param() as i64;
    let w = weight.w as i64;
    match kind {
        ElementKind::S { k } => {
            if *k >= q {
                return Err(WeightError::BadExponent(*k));
            }
            Ok(ICharacter::from_shift(r, *k as i64, w, q1))
        }
        ElementKind::T { k } => {
            if *k >= weight.f() || weight.r[*k as usize] == 0 {
                return Err(WeightError::BadIndex(*k));
            }
            let pk = (weight.p as i64).pow(*k);
            Ok(ICharacter::from_shift(r, pk, w, q1))
        }
        ElementKind::TVec { k } => {
            if k.len() != weight.r.len() {
                return Err(WeightError::WrongLength { expected: weight.r.len(), got: k.len() });
            }
            if k.iter().zip(&weight.r).any(|(a, b)| a > b) {
                return Err(WeightError::BadExponent(digits_value(k, weight.p)));
            }
            let kv = digits_value(k, weight.p) as i64;
            Ok(ICharacter::from_shift(r, kv, w, q1))
        }
    }
}

/// Precomputed data for the action of GL2(F_q) on a weight's space.
///
/// Basis vectors are indexed by multi-indices `(i_0, …, i_{f-1})`, the
/// vector `⊗ x_j^{r_j−i_j} y_j^{i_j}`, flattened with `i_0` most significant.
#[derive(Debug, Clone)]
pub struct SymRep {
    weight: SerreWeight,
    dims: Vec<usize>,
    strides: Vec<usize>,
    exps: Vec<u64>,
    dim: usize,
    /// Pascal's triangle mod p, as prime-field elements.
    binom: Vec<Vec<FieldElem>>,
}

pub type SymVector = Vec<FieldElem>;

impl SymRep {
    pub fn new(weight: &SerreWeight) -> Self {
        let dims: Vec<usize> = weight.r.iter().map(|&x| x as usize + 1).collect();
        let f = dims.len();
        let mut strides = vec![1usize; f];
        for j in (0..f.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }
        let dim = dims.iter().product();
        let p = weight.p as u64;
        let exps = (0..dim)
            .map(|idx| {
                (0..f)
                    .map(|j| ((idx / strides[j]) % dims[j]) as u64 * p.pow(j as u32))
                    .sum()
            })
            .collect();
        let top = weight.r.iter().copied().max().unwrap_or(0) as u64;
        let binom = (0..=top)
            .map(|n| (0..=n).map(|k| FieldElem(binom_mod_p(n, k, p) as u32)).collect())
            .collect();
        SymRep { weight: weight.clone(), dims, strides, exps, dim, binom }
    }

    pub fn weight(&self) -> &SerreWeight {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_j i_j p^j` for a basis index.
    pub fn exponent(&self, idx: usize) -> u64 {
        self.exps[idx]
    }

    /// Multi-index of a basis index.
    pub fn multi_index(&self, idx: usize) -> Vec<u32> {
        (0..self.dims.len())
            .map(|j| ((idx / self.strides[j]) % self.dims[j]) as u32)
            .collect()
    }

    pub fn index_of(&self, multi: &[u32]) -> usize {
        multi.iter().zip(&self.strides).map(|(&i, &s)| i as usize * s).sum()
    }

    /// Index of `⊗ x_j^{r_j}`.
    pub fn top_x(&self) -> usize {
        0
    }

    /// Index of `⊗ y_j^{r_j}`.
    pub fn top_y(&self) -> usize {
        self.dim - 1
    }

    /// Index of `r⃗ − ī`.
    pub fn complement(&self, idx: usize) -> usize {
        self.dim - 1 - idx
    }

    pub fn basis(&self, idx: usize) -> SymVector {
        let mut v = vec![FieldElem::ZERO; self.dim];
        v[idx] = FieldElem::ONE;
        v
    }

    pub fn zero(&self) -> SymVector {
        vec![FieldElem::ZERO; self.dim]
    }

    /// Matrix of `Sym^{r_j}` twisted by `p^j`, column i = image of basis i.
    fn factor_matrix(&self, gf: &Gf, g: [FieldElem; 4], j: usize) -> Vec<Vec<FieldElem>> {
        let r = self.weight.r[j] as usize;
        let [a, b, c, d] = g.map(|x| gf.frobenius_pow(x, j as u32));
        let powers = |x: FieldElem| {
            let mut out = Vec::with_capacity(r + 1);
            let mut acc = FieldElem::ONE;
            for _ in 0..=r {
                out.push(acc);
                acc = gf.mul(acc, x);
            }
            out
        };
        let (pa, pb, pc, pd) = (powers(a), powers(b), powers(c), powers(d));
        let mut m = vec![vec![FieldElem::ZERO; r + 1]; r + 1];
        for i in 0..=r {
            // (a x + c y)^{r-i} (b x + d y)^i, coefficient of y^{i'}
            let lhs: Vec<FieldElem> = (0..=r - i)
                .map(|s| gf.mul(self.binom[r - i][s], gf.mul(pa[r - i - s], pc[s])))
                .collect();
            let rhs: Vec<FieldElem> =
                (0..=i).map(|t| gf.mul(self.binom[i][t], gf.mul(pb[i - t], pd[t]))).collect();
            for (s, &x) in lhs.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (t, &y) in rhs.iter().enumerate() {
                    m[s + t][i] = gf.mul_add(m[s + t][i], x, y);
                }
            }
        }
        m
    }

    /// `σ(g)v` for `g = (a b; c d)` given as `[a, b, c, d]`.
    pub fn act(&self, gf: &Gf, g: [FieldElem; 4], v: &[FieldElem]) -> Result<SymVector, WeightError> {
        let det = gf.sub(gf.mul(g[0], g[3]), gf.mul(g[1], g[2]));
        if det.is_zero() {
            return Err(WeightError::Singular);
        }
        let mut cur = v.to_vec();
        let identity = g == [FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE];
        if !identity {
            for j in 0..self.dims.len() {
                let m = self.factor_matrix(gf, g, j);
                cur = self.apply_axis(gf, &m, j, &cur);
            }
        }
        let scale = gf.pow(det, self.weight.w);
        if scale != FieldElem::ONE {
            for x in cur.iter_mut() {
                *x = gf.mul(*x, scale);
            }
        }
        Ok(cur)
    }

    fn apply_axis(&self, gf: &Gf, m: &[Vec<FieldElem>], j: usize, v: &[FieldElem]) -> SymVector {
        let (d, stride) = (self.dims[j], self.strides[j]);
        let mut out = vec![FieldElem::ZERO; self.dim];
        for base in 0..self.dim {
            if (base / stride) % d != 0 {
                continue;
            }
            for i in 0..d {
                let x = v[base + i * stride];
                if x.is_zero() {
                    continue;
                }
                for (ip, row) in m.iter().enumerate() {
                    let slot = &mut out[base + ip * stride];
                    *slot = gf.mul_add(*slot, row[i], x);
                }
            }
        }
        out
    }
}

/// `A_j(r) = r − 2(r_j + 1)p^j mod q − 1`, reading `r_j` from `r` itself.
pub fn apply_a(j: u32, r: u64, p: u32, f: u32) -> u64 {
    let q1 = (p as u64).pow(f) - 1;
    let r = r % q1;
    let rj = digits_of(r, p, f)[j as usize] as u64;
    let shift = 2 * (rj + 1) * (p as u64).pow(j) % q1;
    (r + q1 - shift) % q1
}

/// One `A_j` step on a full weight: the twist grows by `(r_j + 1)p^j`, which
/// keeps `r + 2w` (the central character) fixed.
pub fn apply_a_weight(j: u32, weight: &SerreWeight) -> SerreWeight {
    let p = weight.p;
    let f = weight.f();
    let q1 = weight.q() - 1;
    let r = apply_a(j, weight.param(), p, f);
    let k = (weight.r[j as usize] as u64 + 1) * (p as u64).pow(j);
    SerreWeight { p, r: digits_of(r, p, f), w: (weight.w + k) % q1 }
}

/// The closed forms for `(r_J, w_J)` with the seed twist added to `w_J`.
pub fn r_j_w_j(j_set: &BTreeSet<u32>, seed: &SerreWeight) -> (u64, u64) {
    let p = seed.p as i64;
    let f = seed.f();
    let q1 = seed.q() as i64 - 1;
    let ind = |x: u32| j_set.contains(&(x % f));
    let mut r_j = 0i64;
    let mut w_j = 0i64;
    for j in 0..f {
        let pj = p.pow(j);
        let rj = seed.r[j as usize] as i64;
        if ind(j) {
            let sign_exp = ind(j + 1) as u32 + (j == f - 1) as u32;
            let sign = if sign_exp.is_multiple_of(2) { 1 } else { -1 };
            r_j += (p - rj - 2) * pj + sign * pj * p;
            w_j += (rj + 1) * pj - pj * p;
        } else {
            r_j += rj * pj;
        }
    }
    w_j += (ind(f - 1) && !ind(0)) as i64;
    (r_j.rem_euclid(q1) as u64, (w_j + seed.w as i64).rem_euclid(q1) as u64)
}

/// Letter string producing `r_J` from `r_∅`, first-acting letter first.
pub fn schedule_a_j(j_set: &BTreeSet<u32>, f: u32) -> Vec<u32> {
    if j_set.is_empty() {
        return Vec::new();
    }
    let desc: Vec<u32> = j_set.iter().rev().copied().collect();
    let has0 = j_set.contains(&0);
    let has_last = j_set.contains(&(f - 1));
    let outer: Vec<u32> = if !has0 && has_last {
        let min = *j_set.iter().next().unwrap();
        (0..f).filter(|j| !j_set.contains(j) && *j > min).collect()
    } else {
        (0..f).filter(|j| !j_set.contains(j)).collect()
    };
    let mut out = outer.clone();
    out.extend(desc);
    out.extend(outer);
    out
}

/// Weights visited by a letter string, starting from (and excluding) `seed`.
pub fn evaluate_schedule(seed: &SerreWeight, letters: &[u32]) -> Vec<SerreWeight> {
    let mut cur = seed.clone();
    letters
        .iter()
        .map(|&j| {
            cur = apply_a_weight(j, &cur);
            cur.clone()
        })
        .collect()
}

/// Provenance of a weight in the weight set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WeightLabel {
    pub j_set: Vec<u32>,
    pub delta: Option<(u32, u32)>,
}

impl fmt::Display for WeightLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j: Vec<String> = self.j_set.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", j.join(","))?;
        if let Some((a, b)) = self.delta {
            write!(f, ",({a},{b})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledWeight {
    pub label: WeightLabel,
    pub weight: SerreWeight,
}

/// All subsets of `{0, …, f−1}`, ordered by size then lexicographically.
pub fn subsets(f: u32) -> Vec<BTreeSet<u32>> {
    let mut out: Vec<BTreeSet<u32>> = (0..1u32 << f)
        .map(|mask| (0..f).filter(|j| mask >> j & 1 == 1).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    out
}

/// Table row for `(J, δ)` when f = 2: `(det_0, r_0, det_1, r_1)` exponents.
pub fn ramified_f2_entry(seed: &SerreWeight, e: u32, j_set: &BTreeSet<u32>, delta: (u32, u32)) -> [i64; 4] {
    let p = seed.p as i64;
    let (r0, r1) = (seed.r[0] as i64, seed.r[1] as i64);
    let e = e as i64;
    let (d0, d1) = (delta.0 as i64, delta.1 as i64);
    let has0 = j_set.contains(&0);
    let has1 = j_set.contains(&1);
    match (has0, has1) {
        (false, false) => [d0, r0 - 2 * d0, d1, r1 - 2 * d1],
        (false, true) => [d0, r0 - 2 * d0 - 1, r1 - e + d1 + 2, p - r1 + 2 * e - 2 * d1 - 4],
        (true, true) => [
            r0 - e + d0 + 1,
            p - r0 + 2 * e - 2 * d0 - 3,
            r1 - e + d1 + 2,
            p - r1 + 2 * e - 2 * d1 - 5,
        ],
        (true, false) => [r0 - e + d0 + 1, p - r0 + 2 * e - 2 * d0 - 4, p + d1 - 1, r1 - 2 * d1 + 1],
    }
}

/// The labeled weight set: `2^f` weights for e = 1 (twists read off the
/// `A_j` schedules), `4e²` weights for f = 2.
pub fn weight_set(seed: &SerreWeight, e: u32) -> Result<Vec<LabeledWeight>, WeightError> {
    let f = seed.f();
    if e == 1 {
        let mut out = Vec::new();
        for j_set in subsets(f) {
            let letters = schedule_a_j(&j_set, f);
            let weight = evaluate_schedule(seed, &letters).pop().unwrap_or_else(|| seed.clone());
            out.push(LabeledWeight {
                label: WeightLabel { j_set: j_set.iter().copied().collect(), delta: None },
                weight,
            });
        }
        return Ok(out);
    }
    let min_r = seed.r.iter().copied().min().unwrap_or(0);
    if f != 2 || 2 * e >= min_r {
        return Err(WeightError::UnsupportedRegime { e, f });
    }
    let p = seed.p as i64;
    let mut out = Vec::new();
    for d0 in 0..e {
        for d1 in 0..e {
            for j_set in subsets(2) {
                let [t0, s0, t1, s1] = ramified_f2_entry(seed, e, &j_set, (d0, d1));
                let r = vec![s0 as u32, s1 as u32];
                let weight = SerreWeight::new(seed.p, r, t0 + t1 * p + seed.w as i64)?;
                out.push(LabeledWeight {
                    label: WeightLabel { j_set: j_set.iter().copied().collect(), delta: Some((d0, d1)) },
                    weight,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u32]) -> BTreeSet<u32> {
        v.iter().copied().collect()
    }

    #[test]
    fn a_operator_examples() {
        assert_eq!(apply_a(1, 24, 7, 2), 16);
        assert_eq!(apply_a(0, 16, 7, 2), 10);
        assert_eq!(apply_a(1, 10, 7, 2), 30);
    }

    #[test]
    fn closed_form_parameters() {
        let seed = SerreWeight::new(7, vec![3, 3], 0).unwrap();
        assert_eq!(r_j_w_j(&set(&[]), &seed), (24, 0));
        assert_eq!(r_j_w_j(&set(&[1]), &seed).0, 16);
        assert_eq!(r_j_w_j(&set(&[0, 1]), &seed).0, 10);
        assert_eq!(r_j_w_j(&set(&[0]), &seed).0, 30);
    }

    #[test]
    fn schedules() {
        assert_eq!(schedule_a_j(&set(&[1]), 2), vec![1]);
        assert_eq!(schedule_a_j(&set(&[0]), 2), vec![1, 0, 1]);
        assert_eq!(schedule_a_j(&set(&[0, 1]), 2), vec![1, 0]);
        assert_eq!(schedule_a_j(&set(&[]), 2), Vec::<u32>::new());
        assert_eq!(schedule_a_j(&set(&[1]), 3), vec![0, 2, 1, 0, 2]);
        assert_eq!(schedule_a_j(&set(&[0, 2]), 3), vec![1, 2, 0, 1]);
    }

    #[test]
    fn example_weights_from_schedules() {
        let seed = SerreWeight::new(7, vec![3, 3], 0).unwrap();
        let set = weight_set(&seed, 1).unwrap();
        let got: Vec<(Vec<u32>, u64)> = set.iter().map(|lw| (lw.weight.r.clone(), lw.weight.w)).collect();
        // σ_{1}: det^{p(r_1+1)}; σ_{0,1}: det^{r_0 + p(r_1+1)}; σ_{0}: det^{r_0 + p(p−1)}
        assert_eq!(got, vec![(vec![3, 3], 0), (vec![2, 4], 45), (vec![2, 2], 28), (vec![3, 1], 31)]);
    }

    #[test]
    fn weight_from_char_round_trip() {
        let wt = SerreWeight::new(7, vec![2, 2], 28).unwrap();
        let chi = wt.highest_char();
        assert_eq!(chi, ICharacter { alpha: 44, beta: 28 });
        assert_eq!(weight_from_char(chi, 7, 2).unwrap(), wt);
        let bad = ICharacter { alpha: 6, beta: 0 };
        assert!(weight_from_char(bad, 7, 2).is_err());
    }

    #[test]
    fn named_characters() {
        let wt = SerreWeight::new(7, vec![3, 3], 0).unwrap();
        let chi = char_of_element(&ElementKind::S { k: 28 }, &wt).unwrap();
        // a^{16}(ad)^{28}
        assert_eq!(chi, ICharacter::new(16 + 28, 28, 48));
        assert_eq!(weight_from_char(chi, 7, 2).unwrap(), SerreWeight::new(7, vec![2, 2], 28).unwrap());
        let t = char_of_element(&ElementKind::T { k: 1 }, &wt).unwrap();
        assert_eq!(t, ICharacter::from_shift(24, 7, 0, 48));
        assert!(char_of_element(&ElementKind::S { k: 49 }, &wt).is_err());
    }

    #[test]
    fn sym_action_examples() {
        let gf = Gf::new(7, 2).unwrap();
        let wt = SerreWeight::new(7, vec![3, 2], 5).unwrap();
        let rep = SymRep::new(&wt);
        let v: Vec<FieldElem> = (0..rep.dim()).map(|i| gf.elem((i * 5 % 49) as u32)).collect();
        let id = [FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE];
        assert_eq!(rep.act(&gf, id, &v).unwrap(), v);
        let a = gf.elem(10);
        let d = gf.elem(33);
        let hv = rep.act(&gf, [a, FieldElem::ZERO, FieldElem::ZERO, d], &rep.basis(0)).unwrap();
        let expect = wt.highest_char().eval(&gf, a, d);
        assert_eq!(hv[0], expect);
        let w = [FieldElem::ZERO, FieldElem::ONE, FieldElem::ONE, FieldElem::ZERO];
        let wy = rep.act(&gf, w, &rep.basis(0)).unwrap();
        let sign = gf.pow(gf.neg(FieldElem::ONE), wt.w);
        assert_eq!(wy[rep.top_y()], sign);
        assert!(rep.act(&gf, [FieldElem::ONE; 4], &v).is_err());
    }

    #[test]
    fn ramified_table_reduces_to_unramified() {
        let seed = SerreWeight::new(7, vec![3, 3], 0).unwrap();
        let e1 = weight_set(&seed, 1).unwrap();
        for lw in &e1 {
            let j: BTreeSet<u32> = lw.label.j_set.iter().copied().collect();
            let [t0, s0, t1, s1] = ramified_f2_entry(&seed, 1, &j, (0, 0));
            assert_eq!(vec![s0 as u32, s1 as u32], lw.weight.r);
            assert_eq!((t0 + 7 * t1).rem_euclid(48) as u64, lw.weight.w);
        }
    }

    #[test]
    fn weight_set_sizes() {
        let seed = SerreWeight::new(11, vec![5, 5], 0).unwrap();
        let set = weight_set(&seed, 2).unwrap();
        assert_eq!(set.len(), 16);
        let distinct: BTreeSet<_> = set.iter().map(|lw| lw.weight.clone()).collect();
        assert_eq!(distinct.len(), 16);
        let f1 = SerreWeight::new(7, vec![3], 0).unwrap();
        assert_eq!(weight_set(&f1, 1).unwrap().len(), 2);
        assert!(weight_set(&seed, 3).is_err());
    }
}
