//! Finite stages of the universal supersingular quotient: operator schedules,
//! Frobenius-reciprocity maps `Φ: ind σ' → V` built from certified weight
//! embeddings, the accumulated quotient context, and socle reporting.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::checks::t_context_below;
use crate::gfq::FieldElem;
use crate::induction::{InducedElement, InductionError, Model, Named, Vertex};
use crate::invariants::{eigen_character, kz_closure, GeneratorSet, InvariantError, QuotientContext};
use crate::linalg::{Echelon, Insert, SparseVec};
use crate::localring::{LocalRing, Mat2Local};
use crate::report::Report;
use crate::weights::{
    apply_a_weight, r_j_w_j, schedule_a_j, subsets, weight_set, LabeledWeight, SerreWeight, WeightError, WeightLabel,
};

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Induction(#[from] InductionError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("stage {stage} ({label}): expected {expected}, certified {observed}")]
    Certification { stage: usize, label: String, expected: String, observed: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, QuotientError>;

/// The operator strings `a_J` and the letters used at each place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StagePlan {
    pub seed: SerreWeight,
    /// `(J, letters)`, first-acting letter first.
    pub strings: Vec<(Vec<u32>, Vec<u32>)>,
    /// `levels[k]` holds the letters in place `k + 1`.
    pub levels: Vec<BTreeSet<u32>>,
}

impl StagePlan {
    pub fn new(seed: &SerreWeight) -> Self {
        let f = seed.f();
        let strings: Vec<(Vec<u32>, Vec<u32>)> = subsets(f)
            .into_iter()
            .map(|j| (j.iter().copied().collect(), schedule_a_j(&j, f)))
            .collect();
        let depth = strings.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
        let levels = (0..depth)
            .map(|k| strings.iter().filter_map(|(_, s)| s.get(k).copied()).collect())
            .collect();
        StagePlan { seed: seed.clone(), strings, levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }
}

/// `Φ: ind_KZ^G σ' → ind_KZ^G σ` determined by `Φ(Id ⊗ highest) = s`. The
/// images `Φ(Id ⊗ e_i)` are resolved once by writing each basis vector of σ'
/// through the K/I translates of the highest vector; they are meaningful
/// modulo the context in which `s` generates σ'.
#[derive(Debug, Clone)]
pub struct PhiMap {
    source: Model,
    target: Model,
    generator: InducedElement,
    /// `Φ(Id ⊗ e_i)`, resolved on first use.
    images: OnceLock<Vec<InducedElement>>,
    identity: bool,
}

/// The q + 1 elements `(1 0; [λ] 1)` and `w` whose translates of the
/// highest vector span any weight.
fn coset_mats(model: &Model) -> Vec<Mat2Local> {
    let r = model.ring();
    let mut mats: Vec<Mat2Local> = model.gf().elements().map(|l| r.lower_unipotent(l)).collect();
    mats.push(r.w());
    mats
}

impl PhiMap {
    /// The identity of `ind σ`, viewed as the embedding of σ by `Id ⊗ highest`.
    pub fn identity(model: &Model) -> Self {
        let rep = model.rep();
        let images: Vec<InducedElement> = (0..model.dim()).map(|i| InducedElement::single(Vertex::ID, rep.basis(i))).collect();
        PhiMap {
            source: model.clone(),
            target: model.clone(),
            generator: InducedElement::single(Vertex::ID, rep.basis(rep.top_x())),
            images: OnceLock::from(images),
            identity: true,
        }
    }

    /// `Φ` determined by a generator `s` of σ' inside `target`. `source`
    /// must share `target`'s ring.
    pub fn build(source: Model, s: InducedElement, target: &Model) -> Result<Self> {
        if !Arc::ptr_eq(source.ring(), target.ring()) {
            return Err(QuotientError::Precondition("source and target models must share a ring".into()));
        }
        Ok(PhiMap { source, target: target.clone(), generator: s, images: OnceLock::new(), identity: false })
    }

    fn images(&self) -> Result<&[InducedElement]> {
        if let Some(v) = self.images.get() {
            return Ok(v);
        }
        let v = self.resolve()?;
        Ok(self.images.get_or_init(|| v))
    }

    fn resolve(&self) -> Result<Vec<InducedElement>> {
        let source = &self.source;
        let gf = source.gf().clone();
        let rep = source.rep();
        let mats = coset_mats(source);
        let top = rep.basis(rep.top_x());
        let mut ech = Echelon::new(gf.clone());
        for g in &mats {
            let v = rep.act(&gf, source.ring().mat_residue(g), &top)?;
            ech.insert_tracked(&dense_to_sparse(&v));
        }
        let translates: Vec<InducedElement> =
            mats.par_iter().map(|g| self.target.act(g, &self.generator)).collect::<std::result::Result<_, _>>()?;
        let mut images = Vec::with_capacity(source.dim());
        for i in 0..source.dim() {
            let Insert::Relation(combo) = ech.insert_tracked(&dense_to_sparse(&rep.basis(i))) else {
                return Err(QuotientError::Precondition(format!(
                    "K/I translates of the highest vector do not span {}",
                    source.weight()
                )));
            };
            // combo: Σ c_j v_j + c_self e_i = 0, so e_i = −Σ (c_j / c_self) v_j.
            let own = combo.entries.last().expect("relation involves the new vector");
            let scale = gf.neg(gf.inv(own.1).expect("nonzero"));
            let mut img = InducedElement::zero();
            for &(id, c) in &combo.entries[..combo.entries.len() - 1] {
                if (id as usize) < translates.len() {
                    img.add_scaled(&gf, gf.mul(c, scale), &translates[id as usize]);
                }
            }
            images.push(img);
        }
        Ok(images)
    }

    pub fn source(&self) -> &Model {
        &self.source
    }

    pub fn generator(&self) -> &InducedElement {
        &self.generator
    }

    /// `Φ(Id ⊗ e_i)`.
    pub fn image(&self, i: usize) -> Result<&InducedElement> {
        Ok(&self.images()?[i])
    }

    /// `Φ(Σ g_v ⊗ x_v) = Σ g_v · Φ(Id ⊗ x_v)`.
    pub fn apply(&self, x: &InducedElement) -> Result<InducedElement> {
        if self.identity {
            return Ok(x.clone());
        }
        let images = self.images()?;
        let target = &self.target;
        let gf = target.gf();
        let mut out = InducedElement::zero();
        for (v, val) in &x.terms {
            let mut local = InducedElement::zero();
            for (i, &c) in val.iter().enumerate() {
                if !c.is_zero() {
                    local.add_scaled(gf, c, &images[i]);
                }
            }
            let g = self.source.vertex_matrix(v);
            out.add_scaled(gf, FieldElem::ONE, &target.act(&g, &local)?);
        }
        Ok(out)
    }

    /// Checks `Φ(k·(Id ⊗ e_i)) ≡ k·Φ(Id ⊗ e_i)` modulo `ctx` for every basis
    /// vector and every `k` given.
    pub fn is_equivariant(&self, ctx: &QuotientContext, ks: &[Mat2Local]) -> Result<bool> {
        let target = ctx.model();
        let rep = self.source.rep();
        for k in ks {
            for i in 0..self.source.dim() {
                let moved = self.source.act(k, &InducedElement::single(Vertex::ID, rep.basis(i)))?;
                let lhs = self.apply(&moved)?;
                let rhs = target.act(k, self.image(i)?)?;
                if !ctx.contains(&lhs.sub(target.gf(), &rhs))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn dense_to_sparse(v: &[FieldElem]) -> SparseVec {
    SparseVec { entries: v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, &c)| (i as u64, c)).collect() }
}

/// One weight obtained during the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    /// Place in the strings at which the weight first appears; 0 for seeds.
    pub stage: usize,
    /// Its label in the target weight set, or the first string that visited it.
    pub label: String,
    pub letter: Option<u32>,
    pub source: Option<usize>,
    pub weight: SerreWeight,
    pub tuple: Vec<u64>,
    pub predicted_param: u64,
    /// Parameter read off the certified local embedding `⟨s_1^k⟩_K ⊂ ind σ_src/(T)`.
    pub certified_param: Option<u64>,
    /// I-character of the transported generator in the seed quotient.
    pub character: Option<String>,
    /// Radius of the transported generator when materialized.
    pub radius: Option<u32>,
    pub in_target: bool,
    /// Whether the transported generator is nonzero in the final context.
    pub survived: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainRecord {
    pub label: String,
    /// Letters as scheduled, first-acting first.
    pub letters: Vec<u32>,
    /// Record indices visited, seed first.
    pub path: Vec<usize>,
    /// Letters skipped because their weight was already in the ledger.
    pub elided: usize,
    pub target: SerreWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CleanupRule {
    /// Weights outside the set obtained in the first phase are quotiented
    /// out; obtained weights only lose `Φ(T(ind σ))`.
    Obtained,
    /// Weights outside the target weight set are quotiented out entirely.
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CleanupStep {
    pub iteration: u32,
    /// Records whose whole image is quotiented (the `M_i`).
    pub removed: Vec<usize>,
    /// Records losing `Φ(T(·))` (the `N_i`).
    pub kept: Vec<usize>,
    pub rank_gained: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SocleStatus {
    Survives,
    Removed,
    /// Not materialized within the radius budget.
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SocleEntry {
    pub record: usize,
    pub label: String,
    pub weight: SerreWeight,
    pub status: SocleStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct StagedReport {
    pub seed: SerreWeight,
    pub e: u32,
    pub budget: u32,
    pub records: Vec<StageRecord>,
    pub chains: Vec<ChainRecord>,
    pub cleanup: Vec<CleanupStep>,
    pub socle: Vec<SocleEntry>,
    pub report: Report,
}

impl StagedReport {
    /// Off-target weights visited on the way to the weight labelled `label`.
    pub fn intermediates(&self, label: &str) -> Vec<&StageRecord> {
        self.chains
            .iter()
            .filter(|c| c.label == label)
            .flat_map(|c| c.path.iter().map(|&i| &self.records[i]))
            .filter(|r| !r.in_target)
            .collect()
    }
}

/// Options shared by both constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Radius budget: 0 runs the schedules only, 1 adds local certification
    /// in `ind σ_src/(T)`, ≥ 2 transports generators into the seed quotient.
    pub budget: u32,
    /// Places of the strings to execute; `None` runs them all.
    pub levels: Option<usize>,
    pub cleanup_iterations: u32,
    pub cleanup_rule: CleanupRule,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { budget: 1, levels: None, cleanup_iterations: 1, cleanup_rule: CleanupRule::Obtained }
    }
}

/// Mutable state of a run: the ledger, the maps and the seed context.
pub struct StageState {
    e: u32,
    budget: u32,
    seed_model: Option<Model>,
    ctx: Option<QuotientContext>,
    records: Vec<StageRecord>,
    phis: Vec<Option<PhiMap>>,
    hecke_added: Vec<bool>,
    targets: Vec<LabeledWeight>,
    report: Report,
}

fn label_of(j: &[u32]) -> String {
    WeightLabel { j_set: j.to_vec(), delta: None }.to_string()
}

impl StageState {
    fn new(seed: &SerreWeight, e: u32, budget: u32, targets: Vec<LabeledWeight>, claim: &str) -> Result<Self> {
        let (seed_model, ctx) = if budget >= 2 {
            let model = Model::new(seed, e, budget)?;
            let ctx = QuotientContext::new(&model, budget);
            (Some(model), Some(ctx))
        } else {
            (None, None)
        };
        let params = format!("p={} f={} e={e} r={:?} w={} budget={budget}", seed.p, seed.f(), seed.r, seed.w);
        Ok(StageState {
            e,
            budget,
            seed_model,
            ctx,
            records: Vec::new(),
            phis: Vec::new(),
            hecke_added: Vec::new(),
            targets,
            report: Report::new(claim, params),
        })
    }

    fn in_target(&self, w: &SerreWeight) -> bool {
        self.targets.iter().any(|t| &t.weight == w)
    }

    fn find(&self, w: &SerreWeight) -> Option<usize> {
        self.records.iter().position(|r| &r.weight == w)
    }

    fn push_seed(&mut self, label: String, weight: SerreWeight, phi: Option<PhiMap>) -> usize {
        let materialized = phi.as_ref().map(|p| p.generator().radius());
        self.records.push(StageRecord {
            stage: 0,
            label,
            letter: None,
            source: None,
            tuple: weight.tuple(),
            predicted_param: weight.param(),
            certified_param: None,
            character: Some(weight.highest_char().to_string()),
            radius: materialized,
            in_target: self.in_target(&weight),
            survived: None,
            weight,
        });
        self.phis.push(phi);
        self.hecke_added.push(false);
        self.records.len() - 1
    }

    fn ring(&self) -> Option<Arc<LocalRing>> {
        self.seed_model.as_ref().map(|m| m.ring().clone())
    }

    /// Certifies that `s_1^{p^j(r_j+1)}` generates `A_j(σ_src)` in
    /// `ind σ_src/(T)` and returns the certified parameter.
    fn certify_local(&self, src: &SerreWeight, j: u32, predicted: &SerreWeight) -> Result<u64> {
        let model = Model::new(src, self.e, 1)?;
        let ctx = QuotientContext::new(&model, 1);
        let gens = GeneratorSet::new(&model, 1);
        let k = (src.p as u64).pow(j) * (src.r[j as usize] as u64 + 1);
        let x = model.build_element(&Named::S { n: 1, k })?;
        let c = kz_closure(&x, &ctx, &gens)?;
        let Some(w) = c.weight else {
            return Err(QuotientError::Certification {
                stage: 0,
                label: format!("A_{j}({src})"),
                expected: predicted.to_string(),
                observed: format!("reducible span of dimension {}", c.dimension),
            });
        };
        if &w != predicted {
            return Err(QuotientError::Certification {
                stage: 0,
                label: format!("A_{j}({src})"),
                expected: predicted.to_string(),
                observed: w.to_string(),
            });
        }
        Ok(w.param())
    }

    /// Executes one letter from record `src`; reuses an existing record
    /// with the same weight.
    fn step(&mut self, stage: usize, label: &str, src: usize, j: u32) -> Result<(usize, bool)> {
        let src_weight = self.records[src].weight.clone();
        let predicted = apply_a_weight(j, &src_weight);
        if let Some(existing) = self.find(&predicted) {
            return Ok((existing, true));
        }
        let certified_param = if self.budget >= 1 {
            let param = self.certify_local(&src_weight, j, &predicted).map_err(|e| match e {
                QuotientError::Certification { expected, observed, .. } => {
                    QuotientError::Certification { stage, label: label.to_string(), expected, observed }
                }
                other => other,
            })?;
            Some(param)
        } else {
            None
        };
        let label = match self.targets.iter().find(|t| t.weight == predicted) {
            Some(t) => t.label.to_string(),
            None => format!("toward {label}"),
        };
        let mut record = StageRecord {
            stage,
            label,
            letter: Some(j),
            source: Some(src),
            tuple: predicted.tuple(),
            predicted_param: predicted.param(),
            certified_param,
            character: None,
            radius: None,
            in_target: self.in_target(&predicted),
            survived: None,
            weight: predicted.clone(),
        };
        let mut phi = None;
        if let (Some(seed_model), Some(src_phi), Some(ring)) = (&self.seed_model, &self.phis[src], self.ring()) {
            let src_model = src_phi.source().clone();
            let k = (src_weight.p as u64).pow(j) * (src_weight.r[j as usize] as u64 + 1);
            let local = src_model.build_element(&Named::S { n: 1, k })?;
            // The transported generator has radius (source radius + 1).
            if src_phi.generator().radius() < self.budget {
                let s = src_phi.apply(&local)?;
                let ctx = self.ctx.as_ref().expect("context exists with a seed model");
                let chi = eigen_character(&s, ctx)?;
                record.character = Some(chi.map_or("none".into(), |c| c.to_string()));
                record.radius = Some(s.radius());
                let new_model = Model::with_ring(&predicted, ring);
                phi = Some(PhiMap::build(new_model, s, seed_model)?);
            }
        }
        self.records.push(record);
        self.phis.push(phi);
        self.hecke_added.push(false);
        Ok((self.records.len() - 1, false))
    }

    /// Adds `Φ(T(Id ⊗ e_i))` and their β-images where they fit the budget.
    fn add_hecke_images(&mut self, idx: usize) -> Result<usize> {
        let Some(phi) = &self.phis[idx] else {
            return Ok(0);
        };
        // T raises the radius by one, so the images cannot fit otherwise.
        if self.hecke_added[idx] || phi.generator().radius() + 1 > self.budget {
            return Ok(0);
        }
        self.hecke_added[idx] = true;
        let src = phi.source();
        let beta = src.ring().beta();
        let mut sources = Vec::new();
        for i in 0..src.dim() {
            let t = src.hecke(&InducedElement::single(Vertex::ID, src.rep().basis(i)));
            for x in [src.act(&beta, &t)?, t] {
                // Φ adds at most the generator's radius.
                if x.radius() + phi.generator().radius() <= self.budget {
                    sources.push(x);
                }
            }
        }
        let images: Vec<InducedElement> =
            sources.par_iter().map(|x| phi.apply(x)).collect::<Result<_>>()?;
        let ctx = self.ctx.as_mut().expect("context exists with a seed model");
        let before = ctx.extra_rank();
        for y in images.iter().filter(|y| y.radius() <= self.budget) {
            ctx.add(y)?;
        }
        Ok(ctx.extra_rank() - before)
    }

    /// Adds `Φ(Id ⊗ e_i)` for every basis vector, killing the weight.
    fn add_whole_image(&mut self, idx: usize) -> Result<usize> {
        let Some(phi) = &self.phis[idx] else {
            return Ok(0);
        };
        let ctx = self.ctx.as_mut().expect("context exists with a seed model");
        let before = ctx.extra_rank();
        for i in 0..phi.source().dim() {
            let y = phi.image(i)?;
            if y.radius() <= self.budget {
                ctx.add(y)?;
            }
        }
        Ok(ctx.extra_rank() - before)
    }

    fn refresh_survival(&mut self) -> Result<()> {
        let Some(ctx) = &self.ctx else {
            return Ok(());
        };
        for (rec, phi) in self.records.iter_mut().zip(&self.phis) {
            rec.survived = match phi {
                Some(phi) if phi.generator().radius() <= self.budget => Some(!ctx.contains(phi.generator())?),
                _ => None,
            };
        }
        Ok(())
    }

    fn cleanup(&mut self, iterations: u32, rule: CleanupRule) -> Result<Vec<CleanupStep>> {
        let mut steps = Vec::new();
        for iteration in 1..=iterations {
            self.refresh_survival()?;
            let alive: Vec<usize> = (0..self.records.len()).filter(|&i| self.records[i].survived != Some(false)).collect();
            let (removed, kept): (Vec<usize>, Vec<usize>) = alive.into_iter().partition(|&i| match rule {
                // Every ledger weight was obtained in the first phase.
                CleanupRule::Obtained => false,
                CleanupRule::Target => !self.records[i].in_target,
            });
            let mut rank_gained = 0;
            for &i in &removed {
                rank_gained += self.add_whole_image(i)?;
            }
            for &i in &kept {
                rank_gained += self.add_hecke_images(i)?;
            }
            steps.push(CleanupStep { iteration, removed, kept, rank_gained });
        }
        self.refresh_survival()?;
        Ok(steps)
    }

    /// Ledger weights with their status in the current context.
    pub fn socle_report(&self) -> Vec<SocleEntry> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| SocleEntry {
                record: i,
                label: r.label.clone(),
                weight: r.weight.clone(),
                status: match r.survived {
                    Some(true) => SocleStatus::Survives,
                    Some(false) => SocleStatus::Removed,
                    None => SocleStatus::Unverified,
                },
            })
            .collect()
    }

    fn finish(mut self, seed: &SerreWeight, chains: Vec<ChainRecord>, cleanup: Vec<CleanupStep>) -> StagedReport {
        let socle = self.socle_report();
        for entry in &socle {
            if self.records[entry.record].in_target && entry.status == SocleStatus::Removed {
                self.report.expect(format!("{} survives in the final quotient", entry.weight), false);
            }
        }
        StagedReport {
            seed: seed.clone(),
            e: self.e,
            budget: self.budget,
            records: self.records,
            chains,
            cleanup,
            socle,
            report: self.report,
        }
    }
}

impl fmt::Display for StagedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.report)?;
        for (i, r) in self.records.iter().enumerate() {
            let src = r.source.map_or("-".into(), |s| s.to_string());
            let letter = r.letter.map_or("-".into(), |l| format!("A_{l}"));
            let status = match r.survived {
                Some(true) => "survives",
                Some(false) => "removed",
                None => "unverified",
            };
            let target = if r.in_target { "target" } else { "extra" };
            writeln!(
                f,
                "  #{i} stage {} {} from {src} via {letter}: {} tuple {:?} [{target}, {status}]",
                r.stage, r.label, r.weight, r.tuple
            )?;
        }
        Ok(())
    }
}

/// The construction over an unramified field (`e = 1`): executes the plan
/// level by level, then the cleanup iterations.
pub fn run_unramified(seed: &SerreWeight, opts: RunOptions) -> Result<StagedReport> {
    if seed.r.iter().any(|&r| r <= 2 || r + 3 >= seed.p) {
        return Err(QuotientError::Precondition(format!("need 2 < r_j < p - 3, got r={:?} at p={}", seed.r, seed.p)));
    }
    let plan = StagePlan::new(seed);
    let targets = weight_set(seed, 1)?;
    let mut st = StageState::new(seed, 1, opts.budget, targets.clone(), "universal quotient, unramified stages")?;
    let seed_phi = st.seed_model.as_ref().map(PhiMap::identity);
    let root = st.push_seed(label_of(&[]), seed.clone(), seed_phi);

    let depth = opts.levels.unwrap_or(plan.depth()).min(plan.depth());
    let mut chains: Vec<ChainRecord> = plan
        .strings
        .iter()
        .map(|(j, letters)| ChainRecord {
            label: label_of(j),
            letters: letters.clone(),
            path: vec![root],
            elided: 0,
            target: targets.iter().find(|t| t.label.j_set == *j).expect("every subset is labelled").weight.clone(),
        })
        .collect();
    for k in 0..depth {
        let mut fresh = Vec::new();
        for chain in chains.iter_mut() {
            let Some(&j) = chain.letters.get(k) else { continue };
            let src = *chain.path.last().expect("paths start at the seed");
            let (idx, reused) = st.step(k + 1, &chain.label, src, j)?;
            if reused {
                // An earlier stage already holds this weight: reuse it.
                if st.records[idx].stage < k + 1 && st.records[idx].stage > 0 && !fresh.contains(&idx) {
                    chain.elided += 1;
                }
            } else {
                fresh.push(idx);
            }
            chain.path.push(idx);
        }
        for idx in fresh {
            st.add_hecke_images(idx)?;
        }
    }

    for (j, _) in &plan.strings {
        let set: BTreeSet<u32> = j.iter().copied().collect();
        let chain = chains.iter().find(|c| c.label == label_of(j)).expect("chain per subset");
        let end = &st.records[*chain.path.last().expect("nonempty")].weight;
        let complete = depth == plan.depth();
        if complete {
            st.report.expect_eq(format!("chain {} ends at its target weight", chain.label), &chain.target, end);
        }
        let (r_closed, _) = r_j_w_j(&set, seed);
        st.report.expect_eq(format!("closed-form parameter of {}", chain.label), r_closed, chain.target.param());
    }
    let mut multiplicity_one = true;
    for (i, r) in st.records.iter().enumerate() {
        multiplicity_one &= st.records[..i].iter().all(|o| o.weight != r.weight);
    }
    st.report.expect("each weight appears once in the ledger", multiplicity_one);

    let cleanup = if st.ctx.is_some() { st.cleanup(opts.cleanup_iterations, opts.cleanup_rule)? } else { Vec::new() };
    Ok(st.finish(seed, chains, cleanup))
}

/// The construction for f = 2 and small ramification: the weights
/// `σ_(∅,δ)` come from the generalised t-elements, then each runs the
/// letters `A_1, A_0, A_1`.
pub fn run_f2_ramified(seed: &SerreWeight, e: u32, opts: RunOptions) -> Result<StagedReport> {
    if seed.f() != 2 {
        return Err(QuotientError::Precondition(format!("need f = 2, got f = {}", seed.f())));
    }
    if e < 1 || seed.r.iter().any(|&r| 2 * e >= r) {
        return Err(QuotientError::Precondition(format!("need 2e < min r_j, got e={e}, r={:?}", seed.r)));
    }
    if seed.r.iter().any(|&r| r <= 2 || r + 3 >= seed.p) {
        return Err(QuotientError::Precondition(format!("need 2 < r_j < p - 3, got r={:?} at p={}", seed.r, seed.p)));
    }
    let targets = weight_set(seed, e)?;
    // Transport is not carried through the ramified chains; the budget only
    // controls local certification.
    let mut st = StageState::new(seed, e, opts.budget.min(1), targets.clone(), "universal quotient, f = 2 ramified stages")?;
    let label_for = |j: &[u32], d: (u32, u32)| WeightLabel { j_set: j.to_vec(), delta: Some(d) };
    let lookup = |l: &WeightLabel| targets.iter().find(|t| &t.label == l).map(|t| t.weight.clone());

    let model = if opts.budget >= 1 { Some(Model::new(seed, e, 1)?) } else { None };
    let mut chains = Vec::new();
    let letters = vec![1u32, 0, 1];
    for d0 in 0..e {
        for d1 in 0..e {
            let start_label = label_for(&[], (d0, d1));
            let start = lookup(&start_label).expect("weight set covers every δ");
            if let Some(model) = &model {
                let k = vec![d0, d1];
                let ctx = t_context_below(model, &k)?;
                let gens = GeneratorSet::new(model, 1);
                // δ = 0 is the seed itself, embedded by Id ⊗ highest.
                let t = if d0 + d1 == 0 {
                    model.build_element(&Named::S { n: 0, k: 0 })?
                } else {
                    model.build_element(&Named::TVec { n: 1, k })?
                };
                let tag = format!("t^({d0},{d1}) generates {start_label}");
                match kz_closure(&t, &ctx, &gens) {
                    Ok(c) => st.report.expect_eq(&tag, &start, c.weight.map_or("reducible".into(), |w| w.to_string())),
                    Err(err) => st.report.expect_eq(&tag, &start, err.to_string()),
                }
            }
            let root = match st.find(&start) {
                Some(i) => i,
                None => st.push_seed(start_label.to_string(), start.clone(), None),
            };
            let expected = [
                label_for(&[1], (d0, e - d1 - 1)),
                label_for(&[0, 1], (e - d0 - 1, e - d1 - 1)),
                label_for(&[0], (e - d0 - 1, d1)),
            ];
            let mut path = vec![root];
            for (k, (&j, lab)) in letters.iter().zip(&expected).enumerate() {
                if opts.levels.is_some_and(|n| k >= n) {
                    break;
                }
                let src = *path.last().expect("nonempty");
                let (idx, _) = st.step(k + 1, &lab.to_string(), src, j)?;
                let want = lookup(lab).expect("weight set covers every label");
                st.report.expect_eq(format!("A_{j} step to {lab}"), &want, &st.records[idx].weight);
                path.push(idx);
            }
            chains.push(ChainRecord {
                label: expected[2].to_string(),
                letters: letters.clone(),
                path,
                elided: 0,
                target: lookup(&expected[2]).expect("labelled"),
            });
        }
    }
    let covered: BTreeSet<&SerreWeight> = st.records.iter().map(|r| &r.weight).collect();
    let distinct: BTreeSet<&SerreWeight> = targets.iter().map(|t| &t.weight).collect();
    st.report.expect_eq("distinct target weights", 4 * e * e, distinct.len());
    st.report.expect("every target weight is reached", distinct.iter().all(|w| covered.contains(w)));
    st.report.expect("every ledger weight is a target", st.records.iter().all(|r| r.in_target));
    Ok(st.finish(seed, chains, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight(p: u32, r: Vec<u32>) -> SerreWeight {
        SerreWeight::new(p, r, 0).unwrap()
    }

    #[test]
    fn plan_levels_cover_strings() {
        let plan = StagePlan::new(&weight(7, vec![3, 3]));
        assert_eq!(plan.strings.len(), 4);
        assert!(plan.strings.iter().all(|(_, s)| s.len() <= 4));
        for (_, s) in &plan.strings {
            for (k, j) in s.iter().enumerate() {
                assert!(plan.levels[k].contains(j));
            }
        }
    }

    #[test]
    fn identity_phi_is_identity() {
        let m = Model::new(&weight(7, vec![3]), 1, 2).unwrap();
        let phi = PhiMap::identity(&m);
        let x = m.build_element(&Named::S { n: 1, k: 2 }).unwrap();
        assert_eq!(phi.apply(&x).unwrap(), x);
    }

    #[test]
    fn built_phi_of_highest_vector_is_the_generator() {
        let seed = weight(7, vec![3]);
        let m = Model::new(&seed, 1, 2).unwrap();
        let phi = PhiMap::build(m.clone(), InducedElement::single(Vertex::ID, m.rep().basis(m.rep().top_x())), &m).unwrap();
        for i in 0..m.dim() {
            assert_eq!(phi.image(i).unwrap(), &InducedElement::single(Vertex::ID, m.rep().basis(i)));
        }
    }

    #[test]
    fn schedules_only_run_f2() {
        let opts = RunOptions { budget: 0, ..RunOptions::default() };
        let rep = run_unramified(&weight(7, vec![3, 3]), opts).unwrap();
        assert!(rep.report.status, "{}", rep.report);
        assert_eq!(rep.records.len(), 4);
        assert!(rep.records.iter().all(|r| r.in_target));
    }
}
