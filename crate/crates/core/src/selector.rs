//! Binary selectors.
//!
//! A level of selection splits an index set into pairs and keeps one member
//! of each; the kept half, doubled, should stay close to the whole in operator
//! norm. Existence of good selectors is not constructive, so every selection
//! here is found by search and certified afterwards.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::operators::{HermitianOp, Subspace};
use crate::rng::RunRng;
use crate::spaces::{distance_unchecked, SpaceModel};
use crate::{CVector, Complex64, Error, Result};

/// Rank-one operators `T_i = f_i f_i*` with dyadic weights `2^{-ℓ_i}`.
#[derive(Debug, Clone)]
pub struct WeightedOpFamily {
    factors: Vec<CVector>,
    exponents: Vec<u32>,
    delta: f64,
    target: HermitianOp,
}

impl WeightedOpFamily {
    /// Errors if some `tr(T_i) = ‖f_i‖²` exceeds `delta`.
    pub fn new(factors: Vec<CVector>, exponents: Vec<u32>, delta: f64) -> Result<Self> {
        let dim = factors
            .first()
            .ok_or(Error::Empty("operator family"))?
            .len();
        if exponents.len() != factors.len() {
            return Err(Error::DimensionMismatch {
                expected: factors.len(),
                got: exponents.len(),
            });
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("delta must be positive".into()));
        }
        let mut target = HermitianOp::zeros(dim);
        for (f, &l) in factors.iter().zip(&exponents) {
            let tr = f.norm_squared();
            if tr > delta * (1.0 + 1e-9) {
                return Err(Error::Hypothesis(format!(
                    "tr(T_i) = {tr} exceeds delta = {delta}"
                )));
            }
            target.add_rank_one(f, pow2(-(l as i32)))?;
        }
        Ok(Self {
            factors,
            exponents,
            delta,
            target,
        })
    }

    /// All weights 1.
    pub fn unit(factors: Vec<CVector>, delta: f64) -> Result<Self> {
        let n = factors.len();
        Self::new(factors, vec![0; n], delta)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn factor(&self, i: usize) -> &CVector {
        &self.factors[i]
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.exponents[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        pow2(-(self.exponents[i] as i32))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `T = Σ 2^{-ℓ_i} T_i`.
    pub fn target(&self) -> &HermitianOp {
        &self.target
    }

    /// Whether `T ≤ I` within 1e-9.
    pub fn target_within_identity(&self) -> Result<bool> {
        Ok(self.target.extreme_eigenvalues()?.1 <= 1.0 + 1e-9)
    }

    /// `scale · Σ_{i ∈ indices} 2^{-ℓ_i} T_i`.
    pub fn partial_sum(&self, indices: &[usize], scale: f64) -> Result<HermitianOp> {
        let mut s = HermitianOp::zeros(self.dim());
        for &i in indices {
            s.add_rank_one(&self.factors[i], scale * self.weight(i))?;
        }
        Ok(s)
    }
}

/// `2^e` exactly.
pub fn pow2(e: i32) -> f64 {
    libm::ldexp(1.0, e)
}

/// A partition of an index set into pairs and singletons; each singleton is
/// paired with a zero ("phantom") operator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub phantoms: Vec<usize>,
}

impl Pairing {
    /// Errors unless pairs and phantoms partition exactly `indices`.
    pub fn validate(&self, indices: &[usize]) -> Result<()> {
        let mut seen: Vec<usize> = self
            .pairs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(self.phantoms.iter().copied())
            .collect();
        let mut want = indices.to_vec();
        seen.sort_unstable();
        want.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("pairing repeats an index".into()));
        }
        if seen != want {
            return Err(Error::InvalidArgument(
                "pairing does not cover the index set".into(),
            ));
        }
        Ok(())
    }

    /// Number of binary choices (pairs plus phantoms).
    pub fn slots(&self) -> usize {
        self.pairs.len() + self.phantoms.len()
    }

    /// Pairs followed by phantoms, as `(first, Some(second))` or `(i, None)`.
    pub fn slot_list(&self) -> Vec<(usize, Option<usize>)> {
        self.pairs
            .iter()
            .map(|&(a, b)| (a, Some(b)))
            .chain(self.phantoms.iter().map(|&i| (i, None)))
            .collect()
    }

    /// Kept indices for a sign vector over [`Pairing::slot_list`]: `+1` keeps
    /// the first member, `-1` the second (nothing for a phantom).
    pub fn chosen(&self, signs: &[i8]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .slot_list()
            .iter()
            .zip(signs)
            .filter_map(|(&(a, b), &s)| if s > 0 { Some(a) } else { b })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Pairs indices of the same block in order of appearance, then pairs the
/// per-block leftovers across blocks in order; a final odd index becomes a
/// phantom.
pub fn pair_by_block(indices: &[usize], block_of: &dyn Fn(usize) -> usize) -> Pairing {
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    for &i in indices {
        let b = block_of(i);
        match blocks.iter_mut().find(|(id, _)| *id == b) {
            Some((_, members)) => members.push(i),
            None => blocks.push((b, vec![i])),
        }
    }
    let mut pairing = Pairing::default();
    let mut leftovers = Vec::new();
    for (_, members) in &blocks {
        for chunk in members.chunks(2) {
            match chunk {
                [a, b] => pairing.pairs.push((*a, *b)),
                [a] => leftovers.push(*a),
                _ => unreachable!(),
            }
        }
    }
    for chunk in leftovers.chunks(2) {
        match chunk {
            [a, b] => pairing.pairs.push((*a, *b)),
            [a] => pairing.phantoms.push(*a),
            _ => unreachable!(),
        }
    }
    pairing
}

/// Greedy proximity pairing in index order: each unpaired index takes the
/// first later unpaired index at distance `< threshold`; unmatched indices
/// become phantoms. `points[i]` is the point of index `i`.
pub fn pair_by_proximity<P: AsRef<[f64]>>(
    indices: &[usize],
    points: &[P],
    space: &SpaceModel,
    threshold: f64,
) -> Pairing {
    let mut used = vec![false; indices.len()];
    let mut pairing = Pairing::default();
    for a in 0..indices.len() {
        if used[a] {
            continue;
        }
        used[a] = true;
        let pa = points[indices[a]].as_ref();
        let partner = (a + 1..indices.len()).find(|&b| {
            !used[b] && distance_unchecked(space, pa, points[indices[b]].as_ref()) < threshold
        });
        match partner {
            Some(b) => {
                used[b] = true;
                pairing.pairs.push((indices[a], indices[b]));
            }
            None => pairing.phantoms.push(indices[a]),
        }
    }
    pairing
}

/// `B_0 = 1`, `B_{j+1} = B_j + 4√(2^j δ B_j) + 2^{j+1} δ`; returns
/// `B_0..=B_n`.
pub fn selector_sequence(delta: f64, n: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(n + 1);
    b.push(1.0);
    for j in 0..n {
        let bj = b[j];
        let s = pow2(j as i32) * delta;
        b.push(bj + 4.0 * libm::sqrt(s * bj) + 2.0 * s);
    }
    b
}

/// Minimal `C` with `Σ_{j<N} (B_j − 1) ≤ C √(2^N δ)` for all
/// `1 ≤ N ≤ n_max`. Requires `2^{n_max} δ < 1`.
pub fn selector_constant(delta: f64, n_max: usize) -> Result<f64> {
    if !(delta > 0.0) || n_max == 0 {
        return Err(Error::InvalidArgument(
            "need delta > 0 and N_max ≥ 1".into(),
        ));
    }
    if pow2(n_max as i32) * delta >= 1.0 {
        return Err(Error::Hypothesis(format!(
            "2^N·delta = {} is not below 1",
            pow2(n_max as i32) * delta
        )));
    }
    let b = selector_sequence(delta, n_max);
    let mut sum = 0.0;
    let mut c = 0.0_f64;
    for n in 1..=n_max {
        sum += b[n - 1] - 1.0;
        c = c.max(sum / libm::sqrt(pow2(n as i32) * delta));
    }
    Ok(c)
}

/// Largest `N` with `2^N δ < 1` (0 if none).
pub fn max_admissible_level(delta: f64) -> usize {
    let mut n = 0;
    while n < 1000 && pow2(n as i32 + 1) * delta < 1.0 {
        n += 1;
    }
    n
}

/// Constant valid uniformly over every admissible level:
/// `selector_constant(δ, max_admissible_level(δ))`.
pub fn uniform_selector_constant(delta: f64) -> Result<f64> {
    let n = max_admissible_level(delta);
    if n == 0 {
        return Err(Error::Hypothesis(format!(
            "2·delta = {} is not below 1",
            2.0 * delta
        )));
    }
    selector_constant(delta, n)
}

/// `C√(2^N δ)` with the uniform constant, or `None` when `2^N δ ≥ 1`.
pub fn guarantee_bound(delta: f64, level: usize) -> Option<f64> {
    if pow2(level as i32) * delta >= 1.0 {
        return None;
    }
    let c = uniform_selector_constant(delta).ok()?;
    Some(c * libm::sqrt(pow2(level as i32) * delta))
}

/// The unique `β ≥ 0` with `1 < 2^β q ≤ 2`.
pub fn dyadic_bracket(q: f64) -> Result<u32> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bracketing needs a positive finite value, got {q}"
        )));
    }
    if q > 2.0 {
        return Err(Error::Hypothesis(format!(
            "{q} > 2: no nonnegative β brackets it"
        )));
    }
    let mut beta = libm::floor(1.0 - libm::log2(q)).max(0.0) as i32;
    // Repair floating-point slop with exact power-of-two products.
    while beta > 0 && libm::ldexp(q, beta - 1) > 1.0 {
        beta -= 1;
    }
    while libm::ldexp(q, beta) <= 1.0 {
        beta += 1;
    }
    debug_assert!(libm::ldexp(q, beta) > 1.0 && libm::ldexp(q, beta) <= 2.0);
    Ok(beta as u32)
}

/// `β` with `1 < 2^β ε²/(C²δ) ≤ 2`.
pub fn compute_beta_block(epsilon: f64, c: f64, delta: f64) -> Result<u32> {
    dyadic_bracket(epsilon * epsilon / (c * c * delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    /// Global optimum over all sign patterns (at most
    /// [`EXHAUSTIVE_MAX_PAIRS`] slots).
    Exhaustive,
    /// Seeded multistart with single-flip descent.
    Randomized,
    /// Sequential Frobenius sign choice followed by single-flip descent.
    Greedy,
}

pub const EXHAUSTIVE_MAX_PAIRS: usize = 24;

/// Largest nested search tree enumerated by exhaustive multi-level search.
pub const EXHAUSTIVE_MAX_LEAVES: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    pub strategy: Strategy,
    /// Random starts for [`Strategy::Randomized`].
    pub starts: usize,
    /// Norm evaluations allowed per descent, as a multiple of the slot count.
    pub budget_factor: usize,
}

impl SearchConfig {
    pub fn exhaustive() -> Self {
        Self {
            strategy: Strategy::Exhaustive,
            starts: 0,
            budget_factor: 0,
        }
    }

    pub fn greedy() -> Self {
        Self {
            strategy: Strategy::Greedy,
            starts: 0,
            budget_factor: 4,
        }
    }

    pub fn randomized(starts: usize) -> Self {
        Self {
            strategy: Strategy::Randomized,
            starts,
            budget_factor: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchStats {
    /// Operator-norm evaluations.
    pub evaluations: u64,
    /// Complete sign patterns considered.
    pub candidates: u64,
}

impl SearchStats {
    fn absorb(&mut self, other: SearchStats) {
        self.evaluations += other.evaluations;
        self.candidates += other.candidates;
    }
}

/// Outcome of a (possibly multi-level) binary selection.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectorCertificate {
    pub level: usize,
    /// Kept indices, ascending.
    pub chosen: Vec<usize>,
    /// `‖2^N Σ_chosen 2^{-ℓ_i} T_i − T‖`.
    pub deviation: f64,
    /// `C√(2^N δ)`, absent when `2^N δ ≥ 1`.
    pub theoretical_bound: Option<f64>,
    pub satisfied: bool,
    pub strategy: Strategy,
    pub stats: SearchStats,
}

impl SelectorCertificate {
    /// Recomputes the deviation from `chosen`.
    pub fn replay(&self, family: &WeightedOpFamily, target: &HermitianOp) -> Result<f64> {
        family
            .partial_sum(&self.chosen, pow2(self.level as i32))?
            .sub(target)?
            .op_norm()
    }
}

/// Operator norm of a Hermitian matrix.
fn herm_norm(m: &DMatrix<Complex64>) -> f64 {
    let ev = m.symmetric_eigenvalues();
    ev.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// One binary slot: `Δ = a a* − b b*` with pre-scaled factors.
struct Slot<'a> {
    a: &'a CVector,
    b: Option<&'a CVector>,
    /// True when `Δ = 0` (both members carry the same operator).
    null: bool,
}

fn add_slot(d: &mut DMatrix<Complex64>, slot: &Slot<'_>, coeff: f64) {
    rank_one_update(d, slot.a, coeff);
    if let Some(b) = slot.b {
        rank_one_update(d, b, -coeff);
    }
}

fn rank_one_update(d: &mut DMatrix<Complex64>, f: &CVector, w: f64) {
    let n = f.len();
    for j in 0..n {
        let cj = f[j].conj() * w;
        for i in 0..n {
            d[(i, j)] += f[i] * cj;
        }
    }
}

/// `⟨D, Δ⟩_F = a*Da − b*Db`.
fn frob_with_slot(d: &DMatrix<Complex64>, slot: &Slot<'_>) -> f64 {
    let quad = |f: &CVector| f.dotc(&(d * f)).re;
    quad(slot.a) - slot.b.map(quad).unwrap_or(0.0)
}

/// Minimizes `‖Σ s_p Δ_p‖` over sign vectors. `key` maps a sign vector to
/// its chosen index set for lexicographic tie-breaks.
fn search_signs(
    slots: &[Slot<'_>],
    dim: usize,
    config: &SearchConfig,
    rng: &mut RunRng,
    key: &dyn Fn(&[i8]) -> Vec<usize>,
) -> Result<(Vec<i8>, f64, SearchStats)> {
    let p = slots.len();
    let mut stats = SearchStats::default();
    if p == 0 {
        return Ok((Vec::new(), 0.0, stats));
    }
    let tol = 1e-12;
    let better = |cand: (&[i8], f64), best: (&[i8], f64)| -> bool {
        let scale = 1.0_f64.max(best.1.abs());
        if cand.1 < best.1 - tol * scale {
            true
        } else if cand.1 <= best.1 + tol * scale {
            key(cand.0) < key(best.0)
        } else {
            false
        }
    };
    match config.strategy {
        Strategy::Exhaustive => {
            if p > EXHAUSTIVE_MAX_PAIRS {
                return Err(Error::Infeasible(format!(
                    "exhaustive search over {p} pairs exceeds the limit of {EXHAUSTIVE_MAX_PAIRS}"
                )));
            }
            // Gray-code walk over s_1..s_{p-1} with s_0 = +1; each pattern
            // stands for itself and its negation, which has the same norm.
            let mut signs = vec![1i8; p];
            let mut d = DMatrix::<Complex64>::zeros(dim, dim);
            for s in slots {
                add_slot(&mut d, s, 1.0);
            }
            let mut best = signs.clone();
            let mut best_norm = herm_norm(&d);
            stats.evaluations += 1;
            stats.candidates += 2;
            let neg: Vec<i8> = signs.iter().map(|s| -s).collect();
            if key(&neg) < key(&best) {
                best = neg;
            }
            let total: u64 = 1u64 << (p - 1);
            for g in 1..total {
                let bit = g.trailing_zeros() as usize + 1;
                signs[bit] = -signs[bit];
                add_slot(&mut d, &slots[bit], 2.0 * signs[bit] as f64);
                let norm = herm_norm(&d);
                stats.evaluations += 1;
                stats.candidates += 2;
                let neg: Vec<i8> = signs.iter().map(|s| -s).collect();
                for cand in [&signs, &neg] {
                    if better((cand, norm), (&best, best_norm)) {
                        best = cand.clone();
                        best_norm = norm;
                    }
                }
            }
            Ok((best, best_norm, stats))
        }
        Strategy::Greedy => {
            let signs = frobenius_signs(slots, dim);
            let (signs, norm, st) =
                flip_descent(slots, dim, signs, config.budget_factor.max(1) * p);
            stats.absorb(st);
            Ok((signs, norm, stats))
        }
        Strategy::Randomized => {
            let budget = config.budget_factor.max(1) * p;
            let (mut best, mut best_norm, st) =
                flip_descent(slots, dim, frobenius_signs(slots, dim), budget);
            stats.absorb(st);
            for _ in 0..config.starts {
                let start: Vec<i8> = (0..p)
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect();
                let (s, n, st) = flip_descent(slots, dim, start, budget);
                stats.absorb(st);
                if better((&s, n), (&best, best_norm)) {
                    best = s;
                    best_norm = n;
                }
            }
            Ok((best, best_norm, stats))
        }
    }
}

/// Sequential sign choice `s_p = −sign⟨D_{p−1}, Δ_p⟩_F`, ties to `+1`.
fn frobenius_signs(slots: &[Slot<'_>], dim: usize) -> Vec<i8> {
    let mut d = DMatrix::<Complex64>::zeros(dim, dim);
    let mut signs = Vec::with_capacity(slots.len());
    for s in slots {
        if s.null {
            signs.push(1);
            continue;
        }
        let sign: i8 = if frob_with_slot(&d, s) > 0.0 { -1 } else { 1 };
        add_slot(&mut d, s, sign as f64);
        signs.push(sign);
    }
    signs
}

/// First-improvement single-flip descent on the operator norm, stopping at a
/// local minimum or after `budget` evaluations.
fn flip_descent(
    slots: &[Slot<'_>],
    dim: usize,
    mut signs: Vec<i8>,
    budget: usize,
) -> (Vec<i8>, f64, SearchStats) {
    let mut stats = SearchStats::default();
    let mut d = DMatrix::<Complex64>::zeros(dim, dim);
    for (s, &sg) in slots.iter().zip(&signs) {
        add_slot(&mut d, s, sg as f64);
    }
    let mut norm = herm_norm(&d);
    stats.evaluations += 1;
    stats.candidates += 1;
    let mut improved = true;
    while improved && (stats.evaluations as usize) < budget {
        improved = false;
        for p in 0..slots.len() {
            if slots[p].null {
                continue;
            }
            if stats.evaluations as usize >= budget {
                break;
            }
            let coeff = -2.0 * signs[p] as f64;
            add_slot(&mut d, &slots[p], coeff);
            let trial = herm_norm(&d);
            stats.evaluations += 1;
            stats.candidates += 1;
            if trial < norm * (1.0 - 1e-12) {
                signs[p] = -signs[p];
                norm = trial;
                improved = true;
            } else {
                add_slot(&mut d, &slots[p], -coeff);
            }
        }
    }
    (signs, norm, stats)
}

/// Scaled factors `√w_i f_i` for the given family indices.
fn scaled_factors(family: &WeightedOpFamily, scale: f64) -> Vec<CVector> {
    (0..family.len())
        .map(|i| family.factor(i) * Complex64::new(libm::sqrt(scale * family.weight(i)), 0.0))
        .collect()
}

fn slots_for<'a>(
    pairing: &Pairing,
    factors: &'a [CVector],
    same_op: &dyn Fn(usize, usize) -> bool,
) -> Vec<Slot<'a>> {
    pairing
        .slot_list()
        .iter()
        .map(|&(a, b)| Slot {
            a: &factors[a],
            b: b.map(|b| &factors[b]),
            null: b.is_some_and(|b| same_op(a, b)),
        })
        .collect()
}

/// One level of binary selection on the indices covered by `pairing`.
///
/// The target is the weighted sum over those indices; the deviation is
/// `‖2 Σ_chosen 2^{-ℓ_i}T_i − Σ_all 2^{-ℓ_i}T_i‖`, which equals the norm of
/// `Σ ±Δ_p` and is the same for a selection and its complement.
pub fn select_level(
    family: &WeightedOpFamily,
    pairing: &Pairing,
    config: &SearchConfig,
    rng: &mut RunRng,
) -> Result<SelectorCertificate> {
    let indices: Vec<usize> = pairing
        .slot_list()
        .iter()
        .flat_map(|&(a, b)| core::iter::once(a).chain(b))
        .collect();
    pairing.validate(&indices)?;
    if let Some(&bad) = indices.iter().find(|&&i| i >= family.len()) {
        return Err(Error::InvalidArgument(format!(
            "index {bad} outside the family"
        )));
    }
    let factors = scaled_factors(family, 1.0);
    let slots = slots_for(pairing, &factors, &|_, _| false);
    let key = |s: &[i8]| pairing.chosen(s);
    let (signs, _, stats) = search_signs(&slots, family.dim(), config, rng, &key)?;
    let chosen = pairing.chosen(&signs);
    let target = family.partial_sum(&indices, 1.0)?;
    let deviation = family.partial_sum(&chosen, 2.0)?.sub(&target)?.op_norm()?;
    let max_w = indices
        .iter()
        .map(|&i| family.weight(i))
        .fold(0.0, f64::max);
    let theoretical_bound = guarantee_bound(family.delta() * max_w, 1);
    Ok(SelectorCertificate {
        level: 1,
        chosen,
        deviation,
        satisfied: theoretical_bound.is_some_and(|b| deviation <= b),
        theoretical_bound,
        strategy: config.strategy,
        stats,
    })
}

/// `N` nested levels of selection starting from every index of the family,
/// re-pairing the survivors with `policy` at each level. The certificate
/// compares `‖2^N Σ_chosen 2^{-ℓ_i}T_i − T‖` with `C√(2^N δ)`.
///
/// Exhaustive search enumerates the whole nested tree and needs it to have
/// at most [`EXHAUSTIVE_MAX_LEAVES`] leaves.
pub fn select_to_level(
    family: &WeightedOpFamily,
    levels: usize,
    policy: &dyn Fn(&[usize]) -> Pairing,
    config: &SearchConfig,
    rng: &mut RunRng,
) -> Result<SelectorCertificate> {
    if levels == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    let all: Vec<usize> = (0..family.len()).collect();
    let target = family.target().clone();
    let max_w = all.iter().map(|&i| family.weight(i)).fold(0.0, f64::max);
    let theoretical_bound = guarantee_bound(family.delta() * max_w, levels);
    let mut stats = SearchStats::default();
    let chosen = if config.strategy == Strategy::Exhaustive {
        let mut leaves: u64 = 1;
        let mut m = all.len() as u64;
        for _ in 0..levels {
            let slots = m.div_ceil(2);
            leaves = leaves.saturating_mul(1u64.checked_shl(slots as u32).unwrap_or(u64::MAX));
            m = slots;
        }
        if leaves > EXHAUSTIVE_MAX_LEAVES {
            return Err(Error::Infeasible(format!(
                "nested search tree has up to {leaves} leaves (limit {EXHAUSTIVE_MAX_LEAVES})"
            )));
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        nested_search(
            family, &target, &all, 0, levels, policy, &mut best, &mut stats,
        )?;
        best.map(|b| b.1).unwrap_or_default()
    } else {
        let mut survivors = all.clone();
        for _ in 0..levels {
            let pairing = policy(&survivors);
            let cert = select_level(family, &pairing, config, rng)?;
            stats.absorb(cert.stats);
            survivors = cert.chosen;
        }
        survivors
    };
    let deviation = family
        .partial_sum(&chosen, pow2(levels as i32))?
        .sub(&target)?
        .op_norm()?;
    Ok(SelectorCertificate {
        level: levels,
        chosen,
        deviation,
        satisfied: theoretical_bound.is_some_and(|b| deviation <= b),
        theoretical_bound,
        strategy: config.strategy,
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn nested_search(
    family: &WeightedOpFamily,
    target: &HermitianOp,
    survivors: &[usize],
    depth: usize,
    levels: usize,
    policy: &dyn Fn(&[usize]) -> Pairing,
    best: &mut Option<(f64, Vec<usize>)>,
    stats: &mut SearchStats,
) -> Result<()> {
    if depth == levels {
        let dev = family
            .partial_sum(survivors, pow2(levels as i32))?
            .sub(target)?
            .op_norm()?;
        stats.evaluations += 1;
        stats.candidates += 1;
        let take = match best {
            None => true,
            Some((b, set)) => {
                let scale = 1.0_f64.max(b.abs());
                dev < *b - 1e-12 * scale
                    || (dev <= *b + 1e-12 * scale && survivors < set.as_slice())
            }
        };
        if take {
            *best = Some((dev, survivors.to_vec()));
        }
        return Ok(());
    }
    let pairing = policy(survivors);
    let slots = pairing.slots();
    for mask in 0..(1u64 << slots) {
        let signs: Vec<i8> = (0..slots)
            .map(|k| if mask >> k & 1 == 0 { 1 } else { -1 })
            .collect();
        let next = pairing.chosen(&signs);
        nested_search(
            family,
            target,
            &next,
            depth + 1,
            levels,
            policy,
            best,
            stats,
        )?;
    }
    Ok(())
}

/// Pairs indices in the given order.
pub fn consecutive_pairing(indices: &[usize]) -> Pairing {
    pair_by_block(indices, &|_| 0)
}

/// Result of block-constrained selection.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockSelection {
    /// Kept family indices, ascending; at most one per block.
    pub chosen: Vec<usize>,
    /// Final weight is `2^{-β}`.
    pub beta: u32,
    /// Expansion exponent: every index is split into copies of weight `2^{-r}`.
    pub expansion: u32,
    /// Number of halving levels, `r − β`.
    pub levels: u32,
    /// `‖2^{-β} Σ_chosen T_i − T‖`.
    pub deviation: f64,
    /// `tr(P_K T P_K)`.
    pub compression_trace: f64,
    /// `tr(P_K (2^{-β} Σ_chosen T_i) P_K)`.
    pub selected_compression_trace: f64,
    /// Smallest eigenvalues of `εP_{K⊥} + 4√γ I + E` and `εP_{K⊥} + 4√γ I − E`
    /// with `E = 2^{-β}Σ_chosen T_i − T`.
    pub min_eig_plus: f64,
    pub min_eig_minus: f64,
    /// Both smallest eigenvalues are `≥ −1e-8`.
    pub satisfied: bool,
    /// Level deviations `‖Σ ±Δ_p‖` in order.
    pub level_deviations: Vec<f64>,
    pub stats: SearchStats,
}

/// Cap on expanded copies.
pub const MAX_EXPANDED_COPIES: u64 = 1 << 22;

/// Selects at most one index per block so that `2^{-β}Σ_chosen T_i` stays
/// close to `T = Σ 2^{-ℓ_i}T_i`, steering the compression onto `K`.
///
/// Index `i` is split into `2^{r−ℓ_i}` copies of weight `2^{-r}` with
/// `r = max(ℓ_i, β) + 1`; `r − β` halving levels follow, each pairing copies
/// of one index first, then within blocks, then across blocks. At each level
/// the sign pattern comes from `config` and, of the pattern and its
/// complement (equal deviation), the one with smaller compressed trace on
/// `K` is kept.
///
/// With `beta = None`, `β` comes from bracketing `ε²/(C²δ)` with the uniform
/// selector constant and each block must carry weight at most
/// `ε²/(2C²δ)`. With `beta = Some(b)` each block must carry at most `2^{-b}`.
pub fn block_constrained_select(
    family: &WeightedOpFamily,
    block_of: &[usize],
    k: &Subspace,
    epsilon: f64,
    beta: Option<u32>,
    config: &SearchConfig,
    rng: &mut RunRng,
) -> Result<BlockSelection> {
    let n = family.len();
    if block_of.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: block_of.len(),
        });
    }
    if k.ambient_dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: k.ambient_dim(),
        });
    }
    let mut block_mass: Vec<(usize, f64)> = Vec::new();
    for (i, &block) in block_of.iter().enumerate().take(n) {
        match block_mass.iter_mut().find(|(b, _)| *b == block) {
            Some((_, m)) => *m += family.weight(i),
            None => block_mass.push((block, family.weight(i))),
        }
    }
    let heaviest = block_mass.iter().map(|(_, m)| *m).fold(0.0, f64::max);
    let beta = match beta {
        Some(b) => {
            if heaviest > pow2(-(b as i32)) * (1.0 + 1e-12) {
                return Err(Error::Hypothesis(format!(
                    "block weight {heaviest} exceeds 2^-β = {}",
                    pow2(-(b as i32))
                )));
            }
            b
        }
        None => {
            let c = uniform_selector_constant(family.delta())?;
            let cap = epsilon * epsilon / (2.0 * c * c * family.delta());
            if heaviest > cap * (1.0 + 1e-12) {
                return Err(Error::Hypothesis(format!(
                    "block weight {heaviest} exceeds ε²/(2C²δ) = {cap}"
                )));
            }
            compute_beta_block(epsilon, c, family.delta())?
        }
    };
    let max_l = (0..n).map(|i| family.exponent(i)).max().unwrap_or(0);
    let r = max_l.max(beta) + 1;
    let copies: u64 = (0..n)
        .map(|i| 1u64 << (r - family.exponent(i)).min(62))
        .sum();
    if copies > MAX_EXPANDED_COPIES {
        return Err(Error::Infeasible(format!(
            "expansion to weight 2^-{r} needs {copies} copies (limit {MAX_EXPANDED_COPIES})"
        )));
    }
    // Items are expanded copies ordered by block, then index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (block_rank(&block_mass, block_of[i]), i));
    let mut item_src: Vec<usize> = Vec::with_capacity(copies as usize);
    for &i in &order {
        for _ in 0..(1u64 << (r - family.exponent(i))) {
            item_src.push(i);
        }
    }
    let unit: Vec<CVector> = (0..n).map(|i| family.factor(i).clone()).collect();
    let k_norms: Vec<f64> = (0..n).map(|i| k.project(&unit[i]).norm_squared()).collect();
    let item_factors: Vec<CVector> = item_src.iter().map(|&i| unit[i].clone()).collect();
    let mut survivors: Vec<usize> = (0..item_src.len()).collect();
    let mut stats = SearchStats::default();
    let mut level_deviations = Vec::new();
    let levels = r - beta;
    for _ in 0..levels {
        let src = &item_src;
        let pairing = pair_by_block(&survivors, &|item| {
            block_rank(&block_mass, block_of[src[item]])
        });
        let slots = slots_for(&pairing, &item_factors, &|a, b| src[a] == src[b]);
        let key = |s: &[i8]| {
            let mut v: Vec<usize> = pairing.chosen(s).iter().map(|&it| src[it]).collect();
            v.sort_unstable();
            v
        };
        let (signs, dev, st) = search_signs(&slots, family.dim(), config, rng, &key)?;
        stats.absorb(st);
        let neg: Vec<i8> = signs.iter().map(|s| -s).collect();
        let trace_of =
            |s: &[i8]| -> f64 { pairing.chosen(s).iter().map(|&it| k_norms[src[it]]).sum() };
        let (tp, tn) = (trace_of(&signs), trace_of(&neg));
        let pick = if tn < tp - 1e-15 || (tn <= tp + 1e-15 && key(&neg) < key(&signs)) {
            neg
        } else {
            signs
        };
        level_deviations.push(dev);
        survivors = pairing.chosen(&pick);
    }
    let mut chosen: Vec<usize> = survivors.iter().map(|&it| item_src[it]).collect();
    chosen.sort_unstable();
    for a in 0..chosen.len() {
        for b in a + 1..chosen.len() {
            if block_of[chosen[a]] == block_of[chosen[b]] {
                return Err(Error::Infeasible("two selections in one block".into()));
            }
        }
    }
    let target = family.target();
    let mut out = HermitianOp::zeros(family.dim());
    for &i in &chosen {
        out.add_rank_one(family.factor(i), pow2(-(beta as i32)))?;
    }
    let e = out.sub(target)?;
    let deviation = e.op_norm()?;
    let gamma = target.compressed_trace(k)?;
    let selected_trace = out.compressed_trace(k)?;
    let dim = family.dim();
    let comp = k.complement();
    let base = HermitianOp::from_matrix(
        comp.projector() * Complex64::new(epsilon, 0.0)
            + DMatrix::<Complex64>::identity(dim, dim)
                * Complex64::new(4.0 * libm::sqrt(gamma.max(0.0)), 0.0),
    )?;
    let min_eig_plus = base.add(&e)?.extreme_eigenvalues()?.0;
    let min_eig_minus = base.sub(&e)?.extreme_eigenvalues()?.0;
    Ok(BlockSelection {
        chosen,
        beta,
        expansion: r,
        levels,
        deviation,
        compression_trace: gamma,
        selected_compression_trace: selected_trace,
        min_eig_plus,
        min_eig_minus,
        satisfied: min_eig_plus >= -1e-8 && min_eig_minus >= -1e-8,
        level_deviations,
        stats,
    })
}

fn block_rank(blocks: &[(usize, f64)], id: usize) -> usize {
    blocks
        .iter()
        .position(|(b, _)| *b == id)
        .unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn cv(xs: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(xs.len(), xs.iter().map(|&(r, i)| Complex64::new(r, i)))
    }

    fn random_family(rng: &mut RunRng, count: usize, dim: usize, delta: f64) -> WeightedOpFamily {
        // Random directions with traces ≤ δ, scaled so that Σ ≤ I.
        let mut fs: Vec<CVector> = (0..count)
            .map(|_| {
                let v = CVector::from_iterator(
                    dim,
                    (0..dim).map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    }),
                );
                let t: f64 = rng.random_range(0.2..1.0) * delta;
                &v * Complex64::new(libm::sqrt(t) / v.norm(), 0.0)
            })
            .collect();
        let s = crate::operators::weighted_sum(&fs, &vec![1.0; count]).unwrap();
        let top = s.extreme_eigenvalues().unwrap().1;
        if top > 1.0 {
            for f in &mut fs {
                *f /= Complex64::new(libm::sqrt(top), 0.0);
            }
        }
        WeightedOpFamily::unit(fs, delta).unwrap()
    }

    #[test]
    fn selector_constant_examples() {
        assert_eq!(selector_constant(0.01, 1).unwrap(), 0.0);
        let b = selector_sequence(0.01, 1);
        assert!((b[1] - 1.42).abs() < 1e-12);
        assert!((selector_constant(0.01, 2).unwrap() - 2.1).abs() < 1e-12);
        assert!(selector_constant(0.3, 2).is_err());
        assert_eq!(max_admissible_level(0.05), 4);
    }

    #[test]
    fn selector_constant_monotone() {
        let deltas = [0.001, 0.003, 0.01, 0.02, 0.05];
        for (a, &d) in deltas.iter().enumerate() {
            let nmax = max_admissible_level(d);
            for n in 1..nmax {
                assert!(selector_constant(d, n).unwrap() <= selector_constant(d, n + 1).unwrap());
            }
            if let Some(&d2) = deltas.get(a + 1) {
                for n in 1..=max_admissible_level(d2) {
                    assert!(
                        selector_constant(d, n).unwrap()
                            <= selector_constant(d2, n).unwrap() + 1e-15
                    );
                }
            }
        }
    }

    #[test]
    fn beta_brackets() {
        assert_eq!(dyadic_bracket(0.3).unwrap(), 2);
        assert_eq!(dyadic_bracket(1.0).unwrap(), 1);
        assert_eq!(dyadic_bracket(2.0).unwrap(), 0);
        assert_eq!(dyadic_bracket(1.5 * pow2(-10)).unwrap(), 10);
        assert!(dyadic_bracket(2.5).is_err());
        for k in 0..60 {
            let q = 2.0 / (1.0 + k as f64 * 0.37);
            let b = dyadic_bracket(q).unwrap();
            assert!(libm::ldexp(q, b as i32) > 1.0 && libm::ldexp(q, b as i32) <= 2.0);
        }
        assert_eq!(compute_beta_block(libm::sqrt(0.3), 1.0, 1.0).unwrap(), 2);
    }

    #[test]
    fn pair_by_block_examples() {
        let blocks = [0usize, 0, 0, 1, 1];
        let p = pair_by_block(&[1, 2, 3], &|i| blocks[i]);
        assert_eq!(p.pairs, vec![(1, 2)]);
        assert_eq!(p.phantoms, vec![3]);
        let p = pair_by_block(&[0, 1, 2, 3], &|i| i);
        assert_eq!(p.pairs.len(), 2);
        assert!(p.phantoms.is_empty());
    }

    #[test]
    fn pair_by_block_consumes_same_block_pairs_first() {
        let mut rng = seeded(3);
        for _ in 0..200 {
            let n = rng.random_range(1..=8);
            let blocks: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let idx: Vec<usize> = (0..n).collect();
            let p = pair_by_block(&idx, &|i| blocks[i]);
            p.validate(&idx).unwrap();
            let same = p
                .pairs
                .iter()
                .filter(|(a, b)| blocks[*a] == blocks[*b])
                .count();
            let max_same: usize = (0..3)
                .map(|b| blocks.iter().filter(|&&x| x == b).count() / 2)
                .sum();
            assert_eq!(same, max_same);
            let first_cross = p
                .pairs
                .iter()
                .position(|(a, b)| blocks[*a] != blocks[*b])
                .unwrap_or(p.pairs.len());
            assert!(p.pairs[first_cross..]
                .iter()
                .all(|(a, b)| blocks[*a] != blocks[*b]));
        }
    }

    #[test]
    fn pair_by_proximity_examples() {
        let space = SpaceModel::euclidean(1);
        let pts = vec![vec![0.0], vec![0.5]];
        assert_eq!(
            pair_by_proximity(&[0, 1], &pts, &space, 1.0).pairs,
            vec![(0, 1)]
        );
        let far = vec![vec![0.0], vec![2.0], vec![4.0]];
        assert_eq!(
            pair_by_proximity(&[0, 1, 2], &far, &space, 1.0).phantoms,
            vec![0, 1, 2]
        );
        let triple = vec![vec![0.0], vec![0.1], vec![0.2]];
        let p = pair_by_proximity(&[0, 1, 2], &triple, &space, 1.0);
        assert_eq!(p.pairs, vec![(0, 1)]);
        assert_eq!(p.phantoms, vec![2]);
    }

    #[test]
    fn select_level_examples() {
        let mut rng = seeded(0);
        let f = cv(&[(0.6, 0.0), (0.0, 0.2)]);
        let fam = WeightedOpFamily::unit(vec![f.clone(), f], 1.0).unwrap();
        let pairing = Pairing {
            pairs: vec![(0, 1)],
            phantoms: vec![],
        };
        let cert = select_level(&fam, &pairing, &SearchConfig::exhaustive(), &mut rng).unwrap();
        assert!(cert.deviation < 1e-15);
        assert_eq!(cert.chosen, vec![0]);

        let e1 = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        let e2 = cv(&[(0.0, 0.0), (1.0, 0.0)]);
        let fam = WeightedOpFamily::unit(vec![e1, e2], 1.0).unwrap();
        let cert = select_level(&fam, &pairing, &SearchConfig::exhaustive(), &mut rng).unwrap();
        assert!((cert.deviation - 1.0).abs() < 1e-12);
        assert!(cert.theoretical_bound.is_none());
        assert!(!cert.satisfied);
    }

    #[test]
    fn level_one_antisymmetry() {
        let mut rng = seeded(5);
        for _ in 0..20 {
            let fam = random_family(&mut rng, 8, 4, 0.05);
            let pairing = consecutive_pairing(&(0..8).collect::<Vec<_>>());
            let signs: Vec<i8> = (0..4)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let neg: Vec<i8> = signs.iter().map(|s| -s).collect();
            let t = fam.target();
            let a = fam
                .partial_sum(&pairing.chosen(&signs), 2.0)
                .unwrap()
                .sub(t)
                .unwrap();
            let b = fam
                .partial_sum(&pairing.chosen(&neg), 2.0)
                .unwrap()
                .sub(t)
                .unwrap();
            assert!(a.add(&b).unwrap().op_norm().unwrap() < 1e-12);
            assert!((a.op_norm().unwrap() - b.op_norm().unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_matches_brute_force_and_beats_heuristics() {
        let mut rng = seeded(11);
        for _ in 0..10 {
            let fam = random_family(&mut rng, 8, 5, 0.05);
            let pairing = consecutive_pairing(&(0..8).collect::<Vec<_>>());
            let ex = select_level(&fam, &pairing, &SearchConfig::exhaustive(), &mut rng).unwrap();
            let mut brute = f64::INFINITY;
            for mask in 0..16u32 {
                let signs: Vec<i8> = (0..4)
                    .map(|k| if mask >> k & 1 == 0 { 1 } else { -1 })
                    .collect();
                let d = fam
                    .partial_sum(&pairing.chosen(&signs), 2.0)
                    .unwrap()
                    .sub(fam.target())
                    .unwrap()
                    .op_norm()
                    .unwrap();
                brute = brute.min(d);
            }
            assert!((ex.deviation - brute).abs() < 1e-12);
            assert!(ex.satisfied);
            assert!((ex.replay(&fam, fam.target()).unwrap() - ex.deviation).abs() < 1e-10);
            let gr = select_level(&fam, &pairing, &SearchConfig::greedy(), &mut rng).unwrap();
            let rd = select_level(&fam, &pairing, &SearchConfig::randomized(4), &mut rng).unwrap();
            assert!(gr.deviation >= ex.deviation - 1e-12);
            assert!(rd.deviation >= ex.deviation - 1e-12);
        }
    }

    #[test]
    fn exhaustive_limit() {
        let mut rng = seeded(1);
        let fam = random_family(&mut rng, 50, 2, 0.01);
        let pairing = consecutive_pairing(&(0..50).collect::<Vec<_>>());
        assert!(matches!(
            select_level(&fam, &pairing, &SearchConfig::exhaustive(), &mut rng),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn select_to_level_examples() {
        let mut rng = seeded(2);
        let f = cv(&[(0.2, 0.0), (0.1, 0.1)]);
        let fam = WeightedOpFamily::unit(vec![f; 8], 0.1).unwrap();
        let cert = select_to_level(
            &fam,
            3,
            &consecutive_pairing,
            &SearchConfig::exhaustive(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(cert.chosen.len(), 1);
        assert!(cert.deviation < 1e-12);

        let fam = random_family(&mut rng, 12, 4, 0.02);
        let cert = select_to_level(
            &fam,
            2,
            &consecutive_pairing,
            &SearchConfig::exhaustive(),
            &mut rng,
        )
        .unwrap();
        assert!(cert.satisfied, "{cert:?}");
        assert_eq!(cert.chosen.len(), 3);
        let one = select_to_level(
            &fam,
            1,
            &consecutive_pairing,
            &SearchConfig::exhaustive(),
            &mut rng,
        )
        .unwrap();
        let direct = select_level(
            &fam,
            &consecutive_pairing(&(0..12).collect::<Vec<_>>()),
            &SearchConfig::exhaustive(),
            &mut rng,
        )
        .unwrap();
        assert!((one.deviation - direct.deviation).abs() < 1e-12);
    }

    #[test]
    fn block_select_zero_k_and_single() {
        let mut rng = seeded(4);
        let base = random_family(&mut rng, 6, 4, 0.05);
        let fam = WeightedOpFamily::new(
            (0..6).map(|i| base.factor(i).clone()).collect(),
            vec![2; 6],
            0.05,
        )
        .unwrap();
        let blocks = [0, 0, 1, 1, 2, 2];
        let k = Subspace::zero(4);
        let sel = block_constrained_select(
            &fam,
            &blocks,
            &k,
            0.2,
            Some(1),
            &SearchConfig::exhaustive(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(sel.compression_trace, 0.0);
        assert!(sel.chosen.len() <= 3);
        // With K = 0 the certificate is exactly ‖E‖ ≤ ε.
        assert_eq!(sel.satisfied, sel.deviation <= 0.2 + 1e-8);
        assert!((sel.min_eig_plus.min(sel.min_eig_minus) - (0.2 - sel.deviation)).abs() < 1e-10);

        let f = cv(&[(0.3, 0.0), (0.0, 0.0)]);
        let fam = WeightedOpFamily::new(vec![f], vec![3], 0.1).unwrap();
        let sel = block_constrained_select(
            &fam,
            &[0],
            &Subspace::zero(2),
            1.0,
            Some(3),
            &SearchConfig::exhaustive(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(sel.chosen, vec![0]);
        assert!(sel.deviation < 1e-15);
        assert!(sel.satisfied);
    }

    #[test]
    fn block_select_random_k() {
        let mut rng = seeded(8);
        for _ in 0..5 {
            let base = random_family(&mut rng, 6, 4, 0.05);
            let factors: Vec<CVector> = (0..6).map(|i| base.factor(i).clone()).collect();
            let fam = WeightedOpFamily::new(factors, vec![2; 6], 0.05).unwrap();
            let blocks = [0, 0, 1, 1, 2, 2];
            let v = CVector::from_iterator(
                4,
                (0..4).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0)),
            );
            let w = CVector::from_iterator(
                4,
                (0..4).map(|_| Complex64::new(0.0, rng.random_range(-1.0..1.0))),
            );
            let k = Subspace::from_spanning(4, [&v, &w]).unwrap();
            assert_eq!(k.dim(), 2);
            let eps = 0.5;
            let sel = block_constrained_select(
                &fam,
                &blocks,
                &k,
                eps,
                Some(1),
                &SearchConfig::exhaustive(),
                &mut rng,
            )
            .unwrap();
            assert!(sel.satisfied, "{sel:?}");
            let mut per_block = [0; 3];
            for &i in &sel.chosen {
                per_block[blocks[i]] += 1;
            }
            assert!(per_block.iter().all(|&c| c <= 1));
        }
    }

    #[test]
    fn block_select_rejects_heavy_block() {
        let mut rng = seeded(4);
        let f = cv(&[(0.3, 0.0)]);
        let fam = WeightedOpFamily::new(vec![f.clone(), f], vec![1, 1], 0.1).unwrap();
        assert!(matches!(
            block_constrained_select(
                &fam,
                &[0, 0],
                &Subspace::zero(1),
                1.0,
                Some(1),
                &SearchConfig::greedy(),
                &mut rng
            ),
            Err(Error::Hypothesis(_))
        ));
    }
}
