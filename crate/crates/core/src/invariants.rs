//! I(1)-invariants of `ind σ` modulo subspaces, and K-submodule certification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::gfq::FieldElem;
use crate::induction::{InducedElement, InductionError, Layout, Model, Vertex};
use crate::linalg::{to_sparse, Echelon, Insert, SparseVec};
use crate::localring::Mat2Local;
use crate::weights::{digits_of, ICharacter, SerreWeight, WeightError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error(transparent)]
    Induction(#[from] InductionError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("element is not an I-eigenvector modulo the context")]
    NotEigen,
    #[error("element is not I(1)-invariant modulo the context (witness {0})")]
    NotInvariant(GenLabel),
    #[error("element reaches distance {reach} but the context budget is {budget}")]
    OutOfBudget { reach: u32, budget: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, InvariantError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GenKind {
    /// `(1 b; 0 1)`
    B,
    /// `(1 0; πc 1)`
    C,
    /// `diag(1 + πa, 1)`
    A,
}

/// `δ_kind(π^depth [digit])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GenLabel {
    pub kind: GenKind,
    pub depth: u32,
    pub digit: FieldElem,
}

impl fmt::Display for GenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            GenKind::B => "b",
            GenKind::C => "c",
            GenKind::A => "a",
        };
        write!(f, "delta_{k}(pi^{} [{}])", self.depth, self.digit.code())
    }
}

/// Generators of I(1) acting on radius `≤ budget`: the three families with
/// parameters `π^i [λ]`, `i ≤ budget`, λ over an F_p-basis of F_q.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub gens: Vec<(GenLabel, Mat2Local)>,
}

impl GeneratorSet {
    pub fn new(model: &Model, budget: u32) -> Self {
        Self::with_digits(model, budget, &model.gf().prime_basis())
    }

    /// Variant with an arbitrary digit list, e.g. all of F_q.
    pub fn with_digits(model: &Model, budget: u32, digits: &[FieldElem]) -> Self {
        let r = model.ring();
        let mut gens = Vec::new();
        for kind in [GenKind::B, GenKind::C, GenKind::A] {
            for depth in 0..=budget {
                for &digit in digits {
                    let t = r.mul(&r.pi_pow(depth), &r.teichmuller(digit));
                    let m = match kind {
                        GenKind::B => r.delta_b(t),
                        GenKind::C => r.delta_c(t),
                        GenKind::A => r.delta_a(t),
                    };
                    gens.push((GenLabel { kind, depth, digit }, m));
                }
            }
        }
        GeneratorSet { gens }
    }

    /// The generators fixing vertex `v`.
    pub fn stabilizing(&self, model: &Model, v: &Vertex) -> Result<GeneratorSet> {
        let probe = model.rep().basis(0);
        let mut gens = Vec::new();
        for (label, g) in &self.gens {
            if model.act_vertex(g, v, &probe)?.0 == *v {
                gens.push((*label, *g));
            }
        }
        Ok(GeneratorSet { gens })
    }
}

/// A subspace of `ind σ` at radius `≤ budget`: optionally `T(B_{budget−1})`,
/// plus the span of added generators.
#[derive(Debug, Clone)]
pub struct QuotientContext {
    model: Model,
    budget: u32,
    hecke: bool,
    layout: Layout,
    extra: Echelon,
}

impl QuotientContext {
    /// `Im(T)` truncated to radius `budget`.
    pub fn new(model: &Model, budget: u32) -> Self {
        Self::build(model, budget, true)
    }

    /// The zero subspace: plain `ind σ`.
    pub fn without_hecke(model: &Model, budget: u32) -> Self {
        Self::build(model, budget, false)
    }

    fn build(model: &Model, budget: u32, hecke: bool) -> Self {
        QuotientContext {
            model: model.clone(),
            budget,
            hecke,
            layout: Layout::new(model, budget),
            extra: Echelon::new(model.gf().clone()),
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Number of independent generators beyond `Im(T)`.
    pub fn extra_rank(&self) -> usize {
        self.extra.rank()
    }

    fn check(&self, x: &InducedElement) -> Result<()> {
        if x.radius() > self.budget {
            return Err(InductionError::RadiusExceedsBudget { radius: x.radius(), budget: self.budget }.into());
        }
        Ok(())
    }

    /// Hecke-reduced form, before the extra generators.
    pub fn reduce_hecke(&self, x: &InducedElement) -> Result<InducedElement> {
        self.check(x)?;
        if self.hecke {
            Ok(self.model.reduce_mod_t(x, self.budget)?.0)
        } else {
            Ok(x.clone())
        }
    }

    /// Canonical representative in coordinates.
    pub fn reduce(&self, x: &InducedElement) -> Result<SparseVec> {
        let h = self.reduce_hecke(x)?;
        Ok(self.extra.reduce(&to_sparse(&h, &self.layout)))
    }

    pub fn contains(&self, x: &InducedElement) -> Result<bool> {
        Ok(self.reduce(x)?.is_zero())
    }

    /// Adds a generator; returns whether the subspace grew.
    pub fn add(&mut self, x: &InducedElement) -> Result<bool> {
        let h = self.reduce_hecke(x)?;
        Ok(self.extra.insert(&to_sparse(&h, &self.layout)))
    }

    /// Adds the part of `⟨x⟩_G` reachable within the budget: the K/I coset
    /// translates of `x` and their images under β. For an I-eigenvector `x`
    /// the translates span `⟨x⟩_K`. Returns the rank gained.
    pub fn add_truncated_g_span(&mut self, x: &InducedElement) -> Result<usize> {
        if x.reach() > self.budget {
            return Err(InvariantError::OutOfBudget { reach: x.reach(), budget: self.budget });
        }
        let m = self.model.clone();
        let r = m.ring();
        let before = self.extra_rank();
        let beta = r.beta();
        let mut mats: Vec<Mat2Local> = m.gf().elements().map(|l| r.lower_unipotent(l)).collect();
        mats.push(r.w());
        for g in &mats {
            let y = m.act(g, x)?;
            self.add(&y)?;
            self.add(&m.act(&beta, &y)?)?;
        }
        Ok(self.extra_rank() - before)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invariance {
    Yes,
    No { witness: GenLabel, difference: InducedElement },
}

impl Invariance {
    pub fn holds(&self) -> bool {
        matches!(self, Invariance::Yes)
    }
}

/// Whether `(γ − 1)x` lies in the context for every generator.
pub fn is_invariant(x: &InducedElement, ctx: &QuotientContext, gens: &GeneratorSet) -> Result<Invariance> {
    let m = ctx.model();
    for (label, g) in &gens.gens {
        let d = m.act(g, x)?.sub(m.gf(), x);
        if !ctx.contains(&d)? {
            return Ok(Invariance::No { witness: *label, difference: d });
        }
    }
    Ok(Invariance::Yes)
}

/// The scalar `c` with `y ≡ c·x` modulo the context, if any.
fn proportional(x: &SparseVec, y: &SparseVec, gf: &crate::gfq::Gf) -> Option<FieldElem> {
    let (i, lead) = x.leading()?;
    let c = gf.div(y.get(i), lead).ok()?;
    (x.scaled(gf, c) == *y).then_some(c)
}

/// I-character of `x` modulo the context when `x` is a torus eigenvector
/// there; `None` otherwise (or when `x` vanishes in the context).
pub fn eigen_character(x: &InducedElement, ctx: &QuotientContext) -> Result<Option<ICharacter>> {
    let m = ctx.model();
    let gf = m.gf();
    let r = m.ring();
    let g = gf.primitive();
    let base = ctx.reduce(x)?;
    if base.is_zero() {
        return Ok(None);
    }
    let mut exps = [0u64; 2];
    for (slot, h) in [r.diag(r.teichmuller(g), r.one()), r.diag(r.one(), r.teichmuller(g))].iter().enumerate() {
        let img = ctx.reduce(&m.act(h, x)?)?;
        match proportional(&base, &img, gf) {
            Some(c) if !c.is_zero() => exps[slot] = gf.log(c).expect("nonzero") as u64,
            _ => return Ok(None),
        }
    }
    Ok(Some(ICharacter::new(exps[0], exps[1], m.q() - 1)))
}

/// `⟨x⟩_K` inside the context, with its dimension and character.
#[derive(Debug, Clone)]
pub struct CertifiedSubmodule {
    pub generator: InducedElement,
    pub dimension: usize,
    pub character: ICharacter,
    /// The weight with highest character `χ` when the dimension matches it;
    /// `None` marks a reducible span.
    pub weight: Option<SerreWeight>,
    /// Canonical forms of the K/I translates that span the submodule.
    pub translates: Vec<SparseVec>,
}

impl CertifiedSubmodule {
    pub fn is_irreducible(&self) -> bool {
        self.weight.is_some()
    }
}

/// The weights with highest I-character `χ`; two when `α = β`.
pub fn weights_with_char(chi: ICharacter, p: u32, f: u32) -> Result<Vec<SerreWeight>> {
    let q1 = (p as u64).pow(f) - 1;
    let diff = (chi.alpha + q1 - chi.beta) % q1;
    let mut out = vec![SerreWeight::new(p, digits_of(diff, p, f), chi.beta as i64)?];
    if diff == 0 {
        out.push(SerreWeight::new(p, vec![p - 1; f as usize], chi.beta as i64)?);
    }
    Ok(out)
}

/// Spans the q+1 coset translates `{(1 0; [λ] 1)·x} ∪ {w·x}` of an I(1)-invariant
/// eigenvector and certifies irreducibility by comparing dimensions.
pub fn kz_closure(x: &InducedElement, ctx: &QuotientContext, gens: &GeneratorSet) -> Result<CertifiedSubmodule> {
    let m = ctx.model();
    if x.reach() > ctx.budget() {
        return Err(InvariantError::OutOfBudget { reach: x.reach(), budget: ctx.budget() });
    }
    let chi = eigen_character(x, ctx)?.ok_or(InvariantError::NotEigen)?;
    if let Invariance::No { witness, .. } = is_invariant(x, ctx, gens)? {
        return Err(InvariantError::NotInvariant(witness));
    }
    let r = m.ring();
    let mut mats: Vec<Mat2Local> = m.gf().elements().map(|l| r.lower_unipotent(l)).collect();
    mats.push(r.w());
    let mut ech = Echelon::new(m.gf().clone());
    let mut translates = Vec::with_capacity(mats.len());
    for g in &mats {
        let v = ctx.reduce(&m.act(g, x)?)?;
        ech.insert(&v);
        translates.push(v);
    }
    let dimension = ech.rank();
    let weight = weights_with_char(chi, m.weight().p, m.weight().f())?
        .into_iter()
        .find(|w| w.dim() == dimension);
    Ok(CertifiedSubmodule { generator: x.clone(), dimension, character: chi, weight, translates })
}

/// One basis vector of the invariant space.
#[derive(Debug, Clone)]
pub struct InvariantVector {
    pub element: InducedElement,
    /// Smallest radius at which the vector appears.
    pub radius: u32,
    pub character: ICharacter,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub weight: SerreWeight,
    pub e: u32,
    pub radius: u32,
    pub basis: Vec<InvariantVector>,
    pub warnings: Vec<String>,
}

impl Enumeration {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// New basis vectors per radius.
    pub fn per_radius(&self) -> Vec<usize> {
        let mut out = vec![0; self.radius as usize + 1];
        for b in &self.basis {
            out[b.radius as usize] += 1;
        }
        out
    }
}

/// Torus-eigenbasis of the coordinates on `vertices` (a set stable under
/// `diag([g], 1)`), grouped by the exponent of the eigenvalue.
fn torus_eigenbasis(model: &Model, vertices: &[Vertex]) -> Result<BTreeMap<u64, Vec<InducedElement>>> {
    let gf = model.gf();
    let r = model.ring();
    let h = r.diag(r.teichmuller(gf.primitive()), r.one());
    let dim = model.dim();
    // image of each coordinate: (coordinate', scalar)
    let mut image: BTreeMap<(Vertex, usize), ((Vertex, usize), FieldElem)> = BTreeMap::new();
    for v in vertices {
        for i in 0..dim {
            let (v2, val) = model.act_vertex(&h, v, &model.rep().basis(i))?;
            let nz: Vec<usize> = (0..dim).filter(|&k| !val[k].is_zero()).collect();
            if nz.len() != 1 {
                return Err(InvariantError::Precondition("torus action is not monomial".into()));
            }
            image.insert((*v, i), ((v2, nz[0]), val[nz[0]]));
        }
    }
    let mut seen = BTreeSet::new();
    let mut out: BTreeMap<u64, Vec<InducedElement>> = BTreeMap::new();
    for &start in image.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut orbit = vec![];
        let mut cur = start;
        loop {
            seen.insert(cur);
            let &(next, s) = image.get(&cur).ok_or_else(|| {
                InvariantError::Precondition("vertex set is not torus-stable".into())
            })?;
            orbit.push((cur, s));
            cur = next;
            if cur == start {
                break;
            }
        }
        let len = orbit.len() as u64;
        let total = orbit.iter().fold(FieldElem::ONE, |acc, &(_, s)| gf.mul(acc, s));
        for c in gf.elements().filter(|c| !c.is_zero()) {
            if gf.pow(c, len) != total {
                continue;
            }
            let cinv = gf.inv(c).expect("nonzero");
            let mut x = InducedElement::zero();
            let mut t = FieldElem::ONE;
            for &((v, i), s) in &orbit {
                x.add_term(gf, v, t, &model.rep().basis(i));
                t = gf.mul(gf.mul(t, s), cinv);
            }
            out.entry(gf.log(c).expect("nonzero") as u64).or_default().push(x);
        }
    }
    Ok(out)
}

fn all_vertices(q: u64, max_radius: u32) -> Vec<Vertex> {
    let mut out = Vec::new();
    for n in 0..=max_radius {
        for side in 0..2u8 {
            for code in 0..q.pow(n) {
                out.push(Vertex { n, side, code });
            }
        }
    }
    out
}

/// A linear map on elements, evaluated coordinate by coordinate and cached;
/// torus eigenvectors share coordinates, so this avoids recomputing actions.
struct CoordinateCache<F: Fn(&InducedElement) -> Result<SparseVec>> {
    eval: F,
    cache: HashMap<(Vertex, usize), SparseVec>,
}

impl<F: Fn(&InducedElement) -> Result<SparseVec>> CoordinateCache<F> {
    fn new(eval: F) -> Self {
        CoordinateCache { eval, cache: HashMap::new() }
    }

    fn apply(&mut self, model: &Model, u: &InducedElement) -> Result<SparseVec> {
        let gf = model.gf();
        let mut acc: BTreeMap<u64, FieldElem> = BTreeMap::new();
        for (v, val) in &u.terms {
            for (i, &c) in val.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !self.cache.contains_key(&(*v, i)) {
                    let unit = InducedElement::single(*v, model.rep().basis(i));
                    self.cache.insert((*v, i), (self.eval)(&unit)?);
                }
                for &(k, x) in &self.cache[&(*v, i)].entries {
                    let slot = acc.entry(k).or_insert(FieldElem::ZERO);
                    *slot = gf.mul_add(*slot, c, x);
                }
            }
        }
        Ok(SparseVec::from_map(acc))
    }
}

/// Concatenated `R((γ − 1)u)` over all generators.
fn defect(u: &InducedElement, ctx: &QuotientContext, gens: &GeneratorSet) -> Result<SparseVec> {
    let m = ctx.model();
    let size = ctx.layout().size();
    let mut out = SparseVec::new();
    for (k, (_, g)) in gens.gens.iter().enumerate() {
        let d = m.act(g, u)?.sub(m.gf(), u);
        out.append_shifted(k as u64 * size, &ctx.reduce(&d)?);
    }
    Ok(out)
}

/// Whether the weight satisfies the strict bounds `2 < r_j < p − 3`.
pub fn generic_hypothesis(weight: &SerreWeight) -> bool {
    weight.r.iter().all(|&r| 2 < r && r + 3 < weight.p)
}

/// A basis of the I(1)-invariants of `B_n / T(B_{n−1})`, as torus
/// eigenvectors, built radius by radius.
///
/// At radius m the sphere part of an invariant, modulo the sphere part of
/// `T(B_{m−1})`, is induced from a block of q children fixed by the
/// stabiliser of its parent; those block candidates plus the whole
/// `B_{m−1}` eigenspace are then solved against every generator.
pub fn enumerate_invariants(weight: &SerreWeight, e: u32, radius: u32) -> Result<Enumeration> {
    let mut warnings = Vec::new();
    if !generic_hypothesis(weight) {
        warnings.push(format!("weight {weight} violates 2 < r_j < p-3; the invariant count is not guaranteed"));
    }
    let model = Model::new(weight, e, radius)?;
    let q = model.q();
    let r = model.ring().clone();
    let mut basis = Vec::new();
    for m in 0..=radius {
        let ctx = QuotientContext::new(&model, m);
        let gens = GeneratorSet::new(&model, m);
        let (low, cands) = if m == 0 {
            (BTreeMap::new(), torus_eigenbasis(&model, &all_vertices(q, 0))?)
        } else {
            let low = torus_eigenbasis(&model, &all_vertices(q, m - 1))?;
            let mut cands: BTreeMap<u64, Vec<InducedElement>> = BTreeMap::new();
            for side in 0..2u8 {
                let u0 = Vertex { n: m - 1, side, code: 0 };
                let block: Vec<Vertex> = model.gf().elements().map(|l| u0.child(q, l)).collect();
                let stab = gens.stabilizing(&model, &u0)?;
                let reps: Vec<Mat2Local> = (0..q.pow(m - 1))
                    .map(|code| {
                        let digits = Vertex { n: m - 1, side, code }.digits(q);
                        let b = r.digit_build(&digits);
                        if side == 0 {
                            r.delta_b(b)
                        } else {
                            r.delta_c(b)
                        }
                    })
                    .collect();
                let size = ctx.layout().size();
                let mut cache = CoordinateCache::new(|v: &InducedElement| {
                    let mut eq = SparseVec::new();
                    for (k, (_, g)) in stab.gens.iter().enumerate() {
                        let d = model.act(g, v)?.sub(model.gf(), v);
                        let top = model.reduce_mod_t(&d, m)?.0.sphere(m);
                        eq.append_shifted(k as u64 * size, &to_sparse(&top, ctx.layout()));
                    }
                    Ok(eq)
                });
                for (chi, vecs) in torus_eigenbasis(&model, &block)? {
                    for v in block_invariants(&vecs, &ctx, &mut cache, m)? {
                        let mut induced = InducedElement::zero();
                        for rho in &reps {
                            induced.add_scaled(model.gf(), FieldElem::ONE, &model.act(rho, &v)?);
                        }
                        cands.entry(chi).or_default().push(induced);
                    }
                }
            }
            (low, cands)
        };
        let mut low_defect = CoordinateCache::new(|u: &InducedElement| defect(u, &ctx, &gens));
        for (chi, top) in &cands {
            let lows = low.get(chi).cloned().unwrap_or_default();
            let mut ech = Echelon::new(model.gf().clone());
            let unknowns: Vec<&InducedElement> = lows.iter().chain(top.iter()).collect();
            for (j, u) in unknowns.iter().enumerate() {
                let eq = if j < lows.len() || m == 0 { low_defect.apply(&model, u)? } else { defect(u, &ctx, &gens)? };
                if let Insert::Relation(combo) = ech.insert_tracked(&eq) {
                    let last = combo.entries.last().expect("contains the new vector").0 as usize;
                    if last < lows.len() {
                        continue;
                    }
                    let mut x = InducedElement::zero();
                    for &(j, c) in &combo.entries {
                        x.add_scaled(model.gf(), c, unknowns[j as usize]);
                    }
                    let x = ctx.reduce_hecke(&x)?;
                    let character = eigen_character(&x, &ctx)?.ok_or(InvariantError::NotEigen)?;
                    basis.push(InvariantVector { element: x, radius: m, character });
                }
            }
        }
    }
    Ok(Enumeration { weight: weight.clone(), e, radius, basis, warnings })
}

/// Vectors in `span(vecs)` (one block of sphere m) that are invariant under
/// `stab` modulo the sphere part of `T(B_{m−1})`, independent modulo it.
fn block_invariants(
    vecs: &[InducedElement],
    ctx: &QuotientContext,
    cache: &mut CoordinateCache<impl Fn(&InducedElement) -> Result<SparseVec>>,
    m: u32,
) -> Result<Vec<InducedElement>> {
    let model = ctx.model();
    let mut ech = Echelon::new(model.gf().clone());
    let mut kernel = Vec::new();
    for v in vecs {
        let eq = cache.apply(model, v)?;
        if let Insert::Relation(combo) = ech.insert_tracked(&eq) {
            let mut x = InducedElement::zero();
            for &(j, c) in &combo.entries {
                x.add_scaled(model.gf(), c, &vecs[j as usize]);
            }
            kernel.push(x);
        }
    }
    let mut indep = Echelon::new(model.gf().clone());
    let mut out = Vec::new();
    for x in kernel {
        let top = model.reduce_mod_t(&x, m)?.0.sphere(m);
        if indep.insert(&to_sparse(&top, ctx.layout())) {
            out.push(top);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::induction::Named;

    fn model(p: u32, r: Vec<u32>, e: u32, budget: u32) -> Model {
        Model::new(&SerreWeight::new(p, r, 0).unwrap(), e, budget).unwrap()
    }

    #[test]
    fn id_highest_vector_is_sigma() {
        let m = model(7, vec![3, 3], 1, 1);
        let ctx = QuotientContext::new(&m, 1);
        let gens = GeneratorSet::new(&m, 1);
        let x = m.build_element(&Named::A0 { n: 0 }).unwrap();
        let c = kz_closure(&x, &ctx, &gens).unwrap();
        assert_eq!(c.dimension, 16);
        assert_eq!(c.weight.as_ref().map(|w| w.param()), Some(24));
    }

    #[test]
    fn t_vector_fails_when_unramified() {
        let m = model(7, vec![3, 3], 1, 1);
        let ctx = QuotientContext::new(&m, 1);
        let gens = GeneratorSet::new(&m, 1);
        let t = m.build_element(&Named::T { n: 1, k: 0 }).unwrap();
        match is_invariant(&t, &ctx, &gens).unwrap() {
            Invariance::No { witness, .. } => assert_eq!(witness.kind, GenKind::B),
            Invariance::Yes => panic!("t_1^0 should not be invariant at e = 1"),
        }
    }

    #[test]
    fn enumeration_q7_trivial_case() {
        let en = enumerate_invariants(&SerreWeight::new(7, vec![3], 0).unwrap(), 1, 2).unwrap();
        assert_eq!(en.per_radius(), vec![2, 0, 0]);
    }
}
