//! The discretization pipeline.
//!
//! 1. [`sample_weighted`]: cut every cell of a net partition into pieces on
//!    which `Ψ` barely moves and give each piece a representative with dyadic
//!    weights `2^{-ℓ}` that add up to at most its measure.
//! 2. [`build_schedule`] and [`distinct_select`]: thin the samples block by
//!    block with block-constrained selection, leaving at most two points per
//!    cell, all with weight `2^{-β}`.
//! 3. [`uniform_select`]: run pairing cycles (proximity pairing at `2r`, then
//!    at `r`) until the points are `r`-separated; each cycle multiplies the
//!    weight by 4.
//!
//! Every stage records the operator-norm deviation it introduces, and
//! [`verify_report`] recomputes the final claims from scratch.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::constants::{theory_constants, TheoryConstants};
use crate::frames::{frame_operator, FrameModel};
use crate::operators::{HermitianOp, Subspace};
use crate::rng::substream;
use crate::selector::{
    block_constrained_select, pair_by_proximity, pow2, select_level, BlockSelection, Pairing,
    SearchConfig, SelectorCertificate, WeightedOpFamily,
};
use crate::spaces::{assign_cells, distance_unchecked, greedy_net, separation, Partition};
use crate::{CVector, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mode {
    /// Constant accounting only; no selection runs at the theoretical radius.
    Theory,
    /// The full pipeline at a user-supplied or adaptive radius, certified a
    /// posteriori.
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RadiusChoice {
    Fixed(f64),
    /// Tries `start·2^{-j}` for `j = 0..=steps` and keeps the largest radius
    /// whose run ends separated with deviation below the target.
    Adaptive {
        start: f64,
        steps: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineConfig {
    /// Relative tolerance: the deviation target is `ε·B_ref`.
    pub epsilon: f64,
    pub mode: Mode,
    /// Net radius of the cell partition.
    pub net_radius: f64,
    pub radius: RadiusChoice,
    pub search: SearchConfig,
    pub seed: u64,
    /// Trace bound at which the theory-mode selector constant is evaluated.
    pub selector_delta: f64,
}

/// A piece of a cell on which the image of `Ψ` has small diameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubCell {
    pub cell: usize,
    /// Grid indices.
    pub members: Vec<usize>,
    /// Grid index of the representative.
    pub representative: usize,
    pub measure: f64,
    /// Largest `‖Ψ(s) − Ψ(t)‖` over members.
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinedCells {
    pub target_diameter: f64,
    pub subcells: Vec<SubCell>,
}

/// Splits every cell into pieces whose `Ψ`-image has diameter at most
/// `ε/(6√D·μ_total)`, so that replacing `Ψ` by a representative on every
/// piece moves the frame operator by at most `ε/3`.
///
/// Pieces are grown around leaders (the first unassigned member, in grid
/// order) and take every unassigned member within half the target, so the
/// target holds by the triangle inequality.
pub fn refine_cells_by_image(
    frame: &FrameModel,
    partition: &Partition,
    epsilon: f64,
) -> Result<RefinedCells> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let d = frame.declared_d();
    let total: f64 = frame.weights().iter().sum();
    let target = epsilon / (6.0 * libm::sqrt(d) * total);
    let vecs = frame.vectors();
    let weights = frame.weights();
    let mut subcells = Vec::new();
    for (n, cell) in partition.cells.iter().enumerate() {
        let mut assigned = vec![false; cell.members.len()];
        for a in 0..cell.members.len() {
            if assigned[a] {
                continue;
            }
            let leader = cell.members[a];
            let mut members = Vec::new();
            for b in a..cell.members.len() {
                if !assigned[b] && (&vecs[cell.members[b]] - &vecs[leader]).norm() <= 0.5 * target {
                    assigned[b] = true;
                    members.push(cell.members[b]);
                }
            }
            let mut diameter = 0.0_f64;
            for (i, &p) in members.iter().enumerate() {
                for &q in &members[i + 1..] {
                    diameter = diameter.max((&vecs[p] - &vecs[q]).norm());
                }
            }
            if diameter > target * (1.0 + 1e-12) {
                return Err(Error::Infeasible(format!(
                    "piece of cell {n} has image diameter {diameter} above {target}"
                )));
            }
            let measure = members.iter().map(|&m| weights[m]).sum();
            subcells.push(SubCell {
                cell: n,
                members,
                representative: leader,
                measure,
                diameter,
            });
        }
    }
    Ok(RefinedCells {
        target_diameter: target,
        subcells,
    })
}

/// Greedy binary expansion of `m`: exponents `ℓ₁ < ℓ₂ < …` with
/// `Σ 2^{-ℓ} ≤ m` and `m − Σ 2^{-ℓ} < tail_cap`.
pub fn dyadic_decompose(m: f64, tail_cap: f64) -> Result<Vec<u32>> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mass must be finite and nonnegative, got {m}"
        )));
    }
    if !(tail_cap > 0.0) {
        return Err(Error::InvalidArgument("tail cap must be positive".into()));
    }
    let mut out = Vec::new();
    let mut rem = m;
    while rem >= tail_cap && rem > 0.0 {
        // Smallest ℓ ≥ 0 with 2^{-ℓ} ≤ rem.
        let mut l = libm::ceil(-libm::log2(rem)).max(0.0) as i32;
        while l > 0 && pow2(-(l - 1)) <= rem {
            l -= 1;
        }
        while pow2(-l) > rem {
            l += 1;
        }
        out.push(l as u32);
        rem -= pow2(-l);
    }
    Ok(out)
}

/// One weighted sample `(x, ℓ)` in cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleEntry {
    pub grid_index: usize,
    pub exponent: u32,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedSampleSet {
    /// Entries grouped by cell, cells in order.
    pub entries: Vec<SampleEntry>,
    /// Entries of cell `n` are `cell_offsets[n]..cell_offsets[n + 1]`.
    pub cell_offsets: Vec<usize>,
    pub cell_measures: Vec<f64>,
    /// Mass dropped by the dyadic tails.
    pub tail_mass: f64,
    /// `ℓ*`: every weight is a multiple of `2^{-ℓ*}`.
    pub floor_exponent: u32,
    pub target_diameter: f64,
    /// `‖S_quad − Σ 2^{-ℓ} T_{Ψ(x)}‖`.
    pub achieved_deviation: f64,
}

impl WeightedSampleSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        pow2(-(self.entries[i].exponent as i32))
    }

    /// `Σ 2^{-ℓ}` per cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        self.cell_offsets
            .windows(2)
            .map(|w| (w[0]..w[1]).map(|i| self.weight(i)).sum())
            .collect()
    }

    /// Errors on the first violated invariant.
    pub fn check(&self, frame: &FrameModel) -> Result<()> {
        for (n, (m, cap)) in self
            .cell_masses()
            .iter()
            .zip(&self.cell_measures)
            .enumerate()
        {
            if *m > cap + 1e-9 {
                return Err(Error::Hypothesis(format!(
                    "cell {n} carries {m} > its measure {cap}"
                )));
            }
        }
        for (n, w) in self.cell_offsets.windows(2).enumerate() {
            if self.entries[w[0]..w[1]].iter().any(|e| e.cell != n) {
                return Err(Error::Hypothesis(format!(
                    "entries of cell {n} are not contiguous"
                )));
            }
        }
        let d = frame.declared_d();
        for e in &self.entries {
            let v = frame.vectors()[e.grid_index].norm_squared();
            if v > d * (1.0 + 1e-6) {
                return Err(Error::NormBoundExceeded {
                    declared: d,
                    observed: v,
                });
            }
        }
        Ok(())
    }

    /// `Σ 2^{-ℓ} T_{Ψ(x)}`.
    pub fn operator(&self, frame: &FrameModel) -> Result<HermitianOp> {
        let mut s = HermitianOp::zeros(frame.dim());
        for (i, e) in self.entries.iter().enumerate() {
            s.add_rank_one(&frame.vectors()[e.grid_index], self.weight(i))?;
        }
        Ok(s)
    }
}

/// Weighted dyadic sampling of the frame on a partition.
///
/// All weights are multiples of `2^{-ℓ*}`, with `ℓ*` the smallest exponent
/// for which `#cells · 2^{-ℓ*} ≤ ε/(3D)`. Pieces of a cell are expanded in
/// order and the remainder below `2^{-ℓ*}` carries to the next piece of the
/// same cell, so each cell drops less than `2^{-ℓ*}` and never exceeds its
/// measure.
pub fn sample_weighted(
    frame: &FrameModel,
    partition: &Partition,
    epsilon: f64,
) -> Result<WeightedSampleSet> {
    let refined = refine_cells_by_image(frame, partition, epsilon)?;
    let budget = epsilon / (3.0 * frame.declared_d());
    let cells = partition.cells.len().max(1) as f64;
    let mut floor = libm::ceil(libm::log2(cells / budget)).max(0.0) as i32;
    while floor > 0 && cells * pow2(-(floor - 1)) <= budget {
        floor -= 1;
    }
    while cells * pow2(-floor) > budget {
        floor += 1;
    }
    let quantum = pow2(-floor);
    let mut entries = Vec::new();
    let mut cell_offsets = vec![0];
    let mut tail_mass = 0.0;
    let mut current = 0;
    let mut carry = 0.0;
    for sc in &refined.subcells {
        while current < sc.cell {
            cell_offsets.push(entries.len());
            current += 1;
            tail_mass += carry;
            carry = 0.0;
        }
        let m = sc.measure + carry;
        let ls = dyadic_decompose(m, quantum)?;
        carry = (m - ls.iter().map(|&l| pow2(-(l as i32))).sum::<f64>()).max(0.0);
        for l in ls {
            entries.push(SampleEntry {
                grid_index: sc.representative,
                exponent: l,
                cell: sc.cell,
            });
        }
    }
    tail_mass += carry;
    while cell_offsets.len() <= partition.cells.len() {
        cell_offsets.push(entries.len());
    }
    if entries.is_empty() {
        return Err(Error::Empty("weighted samples"));
    }
    let mut set = WeightedSampleSet {
        entries,
        cell_offsets,
        cell_measures: partition.cells.iter().map(|c| c.measure).collect(),
        tail_mass,
        floor_exponent: floor as u32,
        target_diameter: refined.target_diameter,
        achieved_deviation: 0.0,
    };
    let s_quad = frame_operator(frame)?;
    set.achieved_deviation = s_quad.sub(&set.operator(frame)?)?.op_norm()?;
    set.check(frame)?;
    Ok(set)
}

/// Blocks `I_k = (K_k, K_{k+1}]` (0-based half-open ranges here), the
/// orthogonal subspaces `H_k`, and the compressions `M_k`.
#[derive(Debug, Clone)]
pub struct SubspaceSchedule {
    /// `K_0 = 0, K_1 = 1, …, K_m = #samples`.
    pub cuts: Vec<usize>,
    /// `H_1, H_2, …` (pairwise orthogonal).
    pub h: Vec<Subspace>,
    /// `M_k = (H_{k+1} ⊕ H_{k+2})^⊥`, one per block.
    pub m: Vec<Subspace>,
    /// `η_k` for `k = 0..` (with `η_0 = 0`).
    pub eta: Vec<f64>,
    /// Tail trace at each cut `K_{k+1}`, `k ≥ 1`, against `η_{k+1}`.
    pub tails: Vec<f64>,
}

impl SubspaceSchedule {
    pub fn blocks(&self) -> Vec<core::ops::Range<usize>> {
        self.cuts.windows(2).map(|w| w[0]..w[1]).collect()
    }
}

/// `η_k = min(B⁻²4^{-(k+2)}ε², 1)` in absolute units; `η_0 = 0`.
pub fn eta(k: usize, epsilon: f64, b: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        (epsilon * epsilon / (b * b) * libm::pow(4.0, -((k + 2) as f64))).min(1.0)
    }
}

fn normalized_factors(frame: &FrameModel, samples: &WeightedSampleSet, b: f64) -> Vec<CVector> {
    let s = Complex64::new(1.0 / libm::sqrt(b), 0.0);
    samples
        .entries
        .iter()
        .map(|e| &frame.vectors()[e.grid_index] * s)
        .collect()
}

/// Builds the block schedule on the normalized samples `Ψ/√B`. Each cut
/// `K_{k+1}` is the first index after `K_k` whose block leaves a single cell
/// and whose remaining tail, compressed to `H_1 ⊕ … ⊕ H_{k+1}`, has trace at
/// most `η_{k+1}`; the last block takes whatever remains.
pub fn build_schedule(
    frame: &FrameModel,
    samples: &WeightedSampleSet,
    epsilon: f64,
    b: f64,
) -> Result<SubspaceSchedule> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Empty("samples"));
    }
    let dim = frame.dim();
    let f = normalized_factors(frame, samples, b);
    let mut cuts = vec![0usize, 1];
    let mut h = vec![Subspace::zero(dim)];
    let mut span = Subspace::zero(dim);
    let mut tails = Vec::new();
    let mut k = 1;
    while *cuts.last().unwrap() < n {
        let kk = cuts[k];
        // H_{k+1}: new directions contributed by samples up to K_k.
        let next = span.extension((cuts[k - 1]..kk).map(|i| &f[i]))?;
        span = span.join(&next)?;
        h.push(next);
        // Tail traces c_i = 2^{-ℓ_i}‖P Ψ'(x_i)‖² against H_1 ⊕ … ⊕ H_{k+1}.
        let c: Vec<f64> = (0..n)
            .map(|i| samples.weight(i) * span.project(&f[i]).norm_squared())
            .collect();
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + c[i];
        }
        let bound = eta(k + 1, epsilon, 1.0);
        let first_cell = samples.entries[kk].cell;
        let mut cut = n;
        for (end, &tail) in suffix.iter().enumerate().skip(kk + 1) {
            let multi_cell = samples.entries[kk..end]
                .iter()
                .any(|e| e.cell != first_cell);
            if multi_cell && tail <= bound {
                cut = end;
                break;
            }
        }
        tails.push(suffix[cut]);
        cuts.push(cut);
        k += 1;
    }
    // Close out the H sequence so every block has its M_k.
    let blocks = cuts.len() - 1;
    while h.len() < blocks + 2 {
        let start = cuts[h.len() - 1];
        let end = cuts[h.len().min(cuts.len() - 1)];
        let next = span.extension((start..end).map(|i| &f[i]))?;
        span = span.join(&next)?;
        h.push(next);
    }
    let m: Vec<Subspace> = (0..blocks)
        .map(|k| h[k + 1].join(&h[k + 2]).map(|s| s.complement()))
        .collect::<Result<_>>()?;
    let eta_list = (0..=blocks).map(|k| eta(k, epsilon, 1.0)).collect();
    Ok(SubspaceSchedule {
        cuts,
        h,
        m,
        eta: eta_list,
        tails,
    })
}

/// Smallest `β` with `2^{-β} ≥` the heaviest cell mass of the samples.
pub fn practical_beta(samples: &WeightedSampleSet) -> Result<u32> {
    let heaviest = samples.cell_masses().into_iter().fold(0.0, f64::max);
    if !(heaviest > 0.0) {
        return Err(Error::Empty("sample mass"));
    }
    let mut beta = libm::floor(-libm::log2(heaviest)).max(0.0) as i32;
    while beta > 0 && pow2(-beta) < heaviest {
        beta -= 1;
    }
    while pow2(-(beta + 1)) >= heaviest {
        beta += 1;
    }
    Ok(beta as u32)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistinctSelection {
    /// Selected sample-entry indices, ascending.
    pub indices: Vec<usize>,
    pub beta: u32,
    pub blocks: Vec<BlockSelection>,
    /// `‖Σ 2^{-ℓ}T − 2^{-β}Σ_{I'} T‖` in absolute units.
    pub deviation_from_samples: f64,
    /// `‖S_quad − 2^{-β}Σ_{I'} T‖`.
    pub deviation: f64,
    /// Largest number of selected points in one cell.
    pub max_cell_multiplicity: usize,
}

/// Block-constrained selection on every schedule block, with the cells as
/// sub-blocks and `M_k` as the steering subspace. Certificates use the
/// tolerance `ε/4` in normalized units.
#[allow(clippy::too_many_arguments)]
pub fn distinct_select(
    frame: &FrameModel,
    samples: &WeightedSampleSet,
    schedule: &SubspaceSchedule,
    epsilon: f64,
    b: f64,
    beta: Option<u32>,
    search: &SearchConfig,
    seed: u64,
) -> Result<DistinctSelection> {
    let f = normalized_factors(frame, samples, b);
    let delta = f
        .iter()
        .map(|v| v.norm_squared())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut indices = Vec::new();
    let mut blocks = Vec::new();
    let mut used_beta = None;
    for (k, range) in schedule.blocks().into_iter().enumerate() {
        let ids: Vec<usize> = range.clone().collect();
        let fam = WeightedOpFamily::new(
            ids.iter().map(|&i| f[i].clone()).collect(),
            ids.iter().map(|&i| samples.entries[i].exponent).collect(),
            delta,
        )?;
        let cells: Vec<usize> = ids.iter().map(|&i| samples.entries[i].cell).collect();
        let mut rng = substream(seed, 1 + k as u64);
        let sel = block_constrained_select(
            &fam,
            &cells,
            &schedule.m[k],
            epsilon / 4.0,
            beta,
            search,
            &mut rng,
        )
        .map_err(|e| match e {
            Error::Hypothesis(m) => Error::Hypothesis(format!("block {k}: {m}")),
            other => other,
        })?;
        if let Some(b0) = used_beta {
            if b0 != sel.beta {
                return Err(Error::Infeasible("blocks chose different β".into()));
            }
        }
        used_beta = Some(sel.beta);
        indices.extend(sel.chosen.iter().map(|&j| ids[j]));
        blocks.push(sel);
    }
    let beta = used_beta.ok_or(Error::Empty("schedule blocks"))?;
    indices.sort_unstable();
    let mut per_cell = vec![0usize; samples.cell_offsets.len().saturating_sub(1)];
    for &i in &indices {
        per_cell[samples.entries[i].cell] += 1;
    }
    let max_cell_multiplicity = per_cell.into_iter().max().unwrap_or(0);
    let mut out = HermitianOp::zeros(frame.dim());
    for &i in &indices {
        out.add_rank_one(
            &frame.vectors()[samples.entries[i].grid_index],
            pow2(-(beta as i32)),
        )?;
    }
    let deviation_from_samples = samples.operator(frame)?.sub(&out)?.op_norm()?;
    let deviation = frame_operator(frame)?.sub(&out)?.op_norm()?;
    Ok(DistinctSelection {
        indices,
        beta,
        blocks,
        deviation_from_samples,
        deviation,
        max_cell_multiplicity,
    })
}

/// One binary selection inside a pairing cycle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleStep {
    pub cycle: usize,
    /// 1: proximity pairing at `2r`; 2: pairing at `r`, then the rest.
    pub step: u8,
    pub pairs: usize,
    pub phantoms: usize,
    pub survivors: usize,
    /// `‖2w Σ_new T − w Σ_old T‖` in absolute units.
    pub increment: f64,
    pub certificate: SelectorCertificate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformSelection {
    pub r: f64,
    /// Grid indices of the final points.
    pub points: Vec<usize>,
    /// Executed cycles `L`.
    pub cycles: usize,
    /// Final weight `2^{weight_exponent}` with `weight_exponent = 2L − β`.
    pub weight_exponent: i32,
    pub steps: Vec<CycleStep>,
    /// Minimum pairwise distance (absent for fewer than two points).
    pub separation: Option<f64>,
    pub separated: bool,
    /// `‖S_quad − 2^{2L−β} Σ T‖`.
    pub deviation: f64,
}

fn is_separated(frame: &FrameModel, pts: &[usize], r: f64) -> bool {
    let space = frame.space();
    let all = frame.region().points();
    for (a, &i) in pts.iter().enumerate() {
        for &j in &pts[a + 1..] {
            if distance_unchecked(space, &all[i], &all[j]) < r {
                return false;
            }
        }
    }
    true
}

/// Pairing cycles on points of weight `2^{-β}` until they are `r`-separated
/// or `max_cycles` cycles have run.
pub fn uniform_select(
    frame: &FrameModel,
    grid_points: &[usize],
    beta: u32,
    r: f64,
    max_cycles: usize,
    search: &SearchConfig,
    seed: u64,
) -> Result<UniformSelection> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(
            "separation radius must be positive".into(),
        ));
    }
    if grid_points.is_empty() {
        return Err(Error::Empty("points to separate"));
    }
    let space = *frame.space();
    let coords = frame.region().points();
    let fam = WeightedOpFamily::unit(
        grid_points
            .iter()
            .map(|&g| frame.vectors()[g].clone())
            .collect(),
        frame.declared_d() * (1.0 + 1e-6),
    )?;
    let pts: Vec<&[f64]> = grid_points.iter().map(|&g| coords[g].as_slice()).collect();
    let mut current: Vec<usize> = (0..grid_points.len()).collect();
    let mut exponent = -(beta as i32);
    let mut steps = Vec::new();
    let mut cycles = 0;
    let current_grid = |c: &[usize]| -> Vec<usize> { c.iter().map(|&i| grid_points[i]).collect() };
    while !is_separated(frame, &current_grid(&current), r) && cycles < max_cycles {
        cycles += 1;
        // Step 1: proximity pairing at 2r; lone points face a zero operator.
        let pairing = pair_by_proximity(&current, &pts, &space, 2.0 * r);
        let lone: Vec<usize> = pairing.phantoms.clone();
        let mut rng = substream(seed, 10_000 + 2 * cycles as u64);
        let cert = select_level(&fam, &pairing, search, &mut rng)?;
        let n1 = cert.chosen.clone();
        steps.push(CycleStep {
            cycle: cycles,
            step: 1,
            pairs: pairing.pairs.len(),
            phantoms: pairing.phantoms.len(),
            survivors: n1.len(),
            increment: pow2(exponent) * cert.deviation,
            certificate: cert,
        });
        exponent += 1;
        // Step 2: lone survivors that still crowd within r are paired first,
        // the rest in order.
        let crowded: Vec<usize> = n1
            .iter()
            .copied()
            .filter(|&i| lone.contains(&i))
            .filter(|&i| {
                n1.iter()
                    .any(|&j| j != i && distance_unchecked(&space, pts[i], pts[j]) < r)
            })
            .collect();
        let mut used = vec![false; grid_points.len()];
        let mut pairing = Pairing::default();
        for &i in &crowded {
            if used[i] {
                continue;
            }
            if let Some(&j) = n1
                .iter()
                .find(|&&j| j != i && !used[j] && distance_unchecked(&space, pts[i], pts[j]) < r)
            {
                used[i] = true;
                used[j] = true;
                pairing.pairs.push((i, j));
            }
        }
        let rest: Vec<usize> = n1.iter().copied().filter(|&i| !used[i]).collect();
        for chunk in rest.chunks(2) {
            match chunk {
                [a, b] => pairing.pairs.push((*a, *b)),
                [a] => pairing.phantoms.push(*a),
                _ => unreachable!(),
            }
        }
        let mut rng = substream(seed, 10_001 + 2 * cycles as u64);
        let cert = select_level(&fam, &pairing, search, &mut rng)?;
        current = cert.chosen.clone();
        steps.push(CycleStep {
            cycle: cycles,
            step: 2,
            pairs: pairing.pairs.len(),
            phantoms: pairing.phantoms.len(),
            survivors: current.len(),
            increment: pow2(exponent) * cert.deviation,
            certificate: cert,
        });
        exponent += 1;
        if current.is_empty() {
            break;
        }
    }
    let points = current_grid(&current);
    let separated = !points.is_empty() && is_separated(frame, &points, r);
    let sep = if points.len() >= 2 {
        let p: Vec<&[f64]> = points.iter().map(|&g| coords[g].as_slice()).collect();
        Some(separation(&space, &p)?)
    } else {
        None
    };
    let mut out = HermitianOp::zeros(frame.dim());
    for &g in &points {
        out.add_rank_one(&frame.vectors()[g], pow2(exponent))?;
    }
    let deviation = frame_operator(frame)?.sub(&out)?.op_norm()?;
    Ok(UniformSelection {
        r,
        points,
        cycles,
        weight_exponent: exponent,
        steps,
        separation: sep,
        separated,
        deviation,
    })
}

/// Per-stage deviation increments and the final deviation; the sum bounds
/// the final value by the triangle inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Telescoping {
    pub sampling: f64,
    pub distinct: f64,
    pub cycles: Vec<f64>,
    pub total: f64,
    pub final_deviation: f64,
    pub holds: bool,
}

fn telescoping(
    samples: &WeightedSampleSet,
    distinct: &DistinctSelection,
    uniform: &UniformSelection,
) -> Telescoping {
    let cycles: Vec<f64> = uniform.steps.iter().map(|s| s.increment).collect();
    let total =
        samples.achieved_deviation + distinct.deviation_from_samples + cycles.iter().sum::<f64>();
    Telescoping {
        sampling: samples.achieved_deviation,
        distinct: distinct.deviation_from_samples,
        cycles,
        total,
        final_deviation: uniform.deviation,
        holds: uniform.deviation <= total + 1e-8,
    }
}

/// The radius used by a run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadiusOutcome {
    pub r: f64,
    /// Radii tried (adaptive sweep), largest first.
    pub tried: usize,
}

/// Theory-mode radius: the literal formula (possibly 0 after underflow).
pub fn compute_radius_theory(
    frame: &FrameModel,
    epsilon: f64,
    selector_delta: f64,
) -> Result<TheoryConstants> {
    let (_, b) = frame.reference_bounds();
    theory_constants(
        frame.space(),
        epsilon,
        b,
        frame.declared_d(),
        selector_delta,
    )
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscretizationReport {
    pub label: String,
    pub mode: Mode,
    pub seed: u64,
    pub generator: String,
    pub epsilon: f64,
    /// `ε·B_ref`.
    pub epsilon_abs: f64,
    pub reference_bounds: (f64, f64),
    pub declared_d: f64,
    pub constants: TheoryConstants,
    pub net_radius: f64,
    pub cells: usize,
    pub samples: usize,
    pub sample_deviation: f64,
    pub schedule_cuts: Vec<usize>,
    pub schedule_tails: Vec<f64>,
    pub distinct_count: usize,
    pub distinct_deviation: f64,
    pub max_cell_multiplicity: usize,
    pub beta: u32,
    pub block_certificates: Vec<BlockSelection>,
    pub r_used: f64,
    pub radii_tried: usize,
    pub cycles: usize,
    pub max_cycles: usize,
    pub weight_exponent: i32,
    pub cycle_steps: Vec<CycleStep>,
    /// Grid indices and coordinates of the final points.
    pub point_indices: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    pub separation: Option<f64>,
    pub deviation: f64,
    /// Extreme eigenvalues of `2^{2L−β} Σ T`.
    pub output_bounds: (f64, f64),
    /// Extreme eigenvalues of `Σ T` (unweighted frame bounds).
    pub unweighted_bounds: (f64, f64),
    pub ratio: f64,
    pub telescoping: Option<Telescoping>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Verdict {
    fn push(&mut self, name: &str, value: f64, bound: f64, ok: bool) {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            ok,
        });
    }

    fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.ok);
        self
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }
}

/// Runs the pipeline. Theory mode stops after constant accounting.
pub fn discretize(frame: &FrameModel, config: &PipelineConfig) -> Result<DiscretizationReport> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    let (a_ref, b_ref) = frame.reference_bounds();
    let eps_abs = config.epsilon * b_ref;
    if a_ref <= eps_abs {
        return Err(Error::Degenerate {
            lower: a_ref,
            target: eps_abs,
        });
    }
    let constants = compute_radius_theory(frame, config.epsilon, config.selector_delta)?;
    let max_cycles = constants.max_cycles.min(1e6) as usize;
    let mut report = DiscretizationReport {
        label: frame.label().into(),
        mode: config.mode,
        seed: config.seed,
        generator: crate::rng::GENERATOR_NAME.into(),
        epsilon: config.epsilon,
        epsilon_abs: eps_abs,
        reference_bounds: (a_ref, b_ref),
        declared_d: frame.declared_d(),
        constants,
        net_radius: config.net_radius,
        cells: 0,
        samples: 0,
        sample_deviation: 0.0,
        schedule_cuts: Vec::new(),
        schedule_tails: Vec::new(),
        distinct_count: 0,
        distinct_deviation: 0.0,
        max_cell_multiplicity: 0,
        beta: 0,
        block_certificates: Vec::new(),
        r_used: 0.0,
        radii_tried: 0,
        cycles: 0,
        max_cycles,
        weight_exponent: 0,
        cycle_steps: Vec::new(),
        point_indices: Vec::new(),
        points: Vec::new(),
        separation: None,
        deviation: f64::NAN,
        output_bounds: (f64::NAN, f64::NAN),
        unweighted_bounds: (f64::NAN, f64::NAN),
        ratio: f64::NAN,
        telescoping: None,
        verdict: Verdict::default(),
    };
    if config.mode == Mode::Theory {
        report.r_used = report.constants.r_theory;
        let mut v = Verdict::default();
        let c = &report.constants;
        v.push(
            "log2_c1_includes_doubling_term",
            c.log2_c1,
            c.doubling_exponent,
            c.log2_c1 >= c.doubling_exponent,
        );
        v.push(
            "r_theory_within_cap",
            c.log2_r_theory,
            libm::log2(frame.space().small_scale_cutoff / 4.0),
            c.log2_r_theory <= libm::log2(frame.space().small_scale_cutoff / 4.0) + 1e-12,
        );
        report.verdict = v.finish();
        return Ok(report);
    }
    let space = frame.space();
    let centers = greedy_net(space, frame.region(), config.net_radius)?;
    let partition = assign_cells(space, frame.region(), &centers, config.net_radius)?;
    partition.check(space, frame.region())?;
    let samples = sample_weighted(frame, &partition, eps_abs)?;
    let schedule = build_schedule(frame, &samples, eps_abs, b_ref)?;
    let beta = practical_beta(&samples)?;
    let distinct = distinct_select(
        frame,
        &samples,
        &schedule,
        config.epsilon,
        b_ref,
        Some(beta),
        &config.search,
        config.seed,
    )?;
    let grid: Vec<usize> = distinct
        .indices
        .iter()
        .map(|&i| samples.entries[i].grid_index)
        .collect();
    let (uniform, tried) = match config.radius {
        RadiusChoice::Fixed(r) => (
            uniform_select(
                frame,
                &grid,
                beta,
                r,
                max_cycles,
                &config.search,
                config.seed,
            )?,
            1,
        ),
        RadiusChoice::Adaptive { start, steps } => {
            let mut best = None;
            let mut tried = 0;
            for j in 0..=steps {
                let r = start * pow2(-(j as i32));
                tried += 1;
                let u = uniform_select(
                    frame,
                    &grid,
                    beta,
                    r,
                    max_cycles,
                    &config.search,
                    config.seed,
                )?;
                if u.separated && u.deviation < eps_abs {
                    best = Some(u);
                    break;
                }
                if j == steps {
                    best = Some(u);
                }
            }
            (best.ok_or(Error::Empty("radius sweep"))?, tried)
        }
    };
    report.cells = partition.cells.len();
    report.samples = samples.len();
    report.sample_deviation = samples.achieved_deviation;
    report.schedule_cuts = schedule.cuts.clone();
    report.schedule_tails = schedule.tails.clone();
    report.distinct_count = distinct.indices.len();
    report.distinct_deviation = distinct.deviation;
    report.max_cell_multiplicity = distinct.max_cell_multiplicity;
    report.beta = beta;
    report.block_certificates = distinct.blocks.clone();
    report.r_used = uniform.r;
    report.radii_tried = tried;
    report.cycles = uniform.cycles;
    report.weight_exponent = uniform.weight_exponent;
    report.cycle_steps = uniform.steps.clone();
    report.point_indices = uniform.points.clone();
    report.points = uniform
        .points
        .iter()
        .map(|&g| frame.region().points()[g].clone())
        .collect();
    report.separation = uniform.separation;
    report.deviation = uniform.deviation;
    report.telescoping = Some(telescoping(&samples, &distinct, &uniform));
    report.verdict = verify_report(&report, frame)?;
    let out = weighted_points_operator(frame, &report.point_indices, report.weight_exponent)?;
    report.output_bounds = out.extreme_eigenvalues()?;
    let w = pow2(report.weight_exponent);
    report.unweighted_bounds = (report.output_bounds.0 / w, report.output_bounds.1 / w);
    report.ratio = report.output_bounds.1 / report.output_bounds.0;
    Ok(report)
}

fn weighted_points_operator(
    frame: &FrameModel,
    points: &[usize],
    exponent: i32,
) -> Result<HermitianOp> {
    let mut out = HermitianOp::zeros(frame.dim());
    for &g in points {
        out.add_rank_one(&frame.vectors()[g], pow2(exponent))?;
    }
    Ok(out)
}

/// Recomputes the final claims of a practical-mode report from the frame.
pub fn verify_report(report: &DiscretizationReport, frame: &FrameModel) -> Result<Verdict> {
    let mut v = Verdict::default();
    let (a_ref, b_ref) = report.reference_bounds;
    let out = weighted_points_operator(frame, &report.point_indices, report.weight_exponent)?;
    let dev = frame_operator(frame)?.sub(&out)?.op_norm()?;
    v.push(
        "deviation_replay",
        dev,
        report.deviation,
        (dev - report.deviation).abs() <= 1e-9 * (1.0 + dev),
    );
    v.push(
        "deviation_below_target",
        dev,
        report.epsilon_abs,
        dev < report.epsilon_abs,
    );
    let (a_out, b_out) = if report.point_indices.is_empty() {
        (0.0, 0.0)
    } else {
        out.extreme_eigenvalues()?
    };
    v.push(
        "lower_bound",
        a_out,
        a_ref - dev,
        a_out >= a_ref - dev - 1e-9,
    );
    v.push(
        "upper_bound",
        b_out,
        b_ref + dev,
        b_out <= b_ref + dev + 1e-9,
    );
    let ratio_bound = if a_ref > dev {
        (b_ref + dev) / (a_ref - dev)
    } else {
        f64::INFINITY
    };
    let ratio = if a_out > 0.0 {
        b_out / a_out
    } else {
        f64::INFINITY
    };
    v.push(
        "ratio",
        ratio,
        ratio_bound,
        ratio <= ratio_bound * (1.0 + 1e-9),
    );
    let coords: Vec<&[f64]> = report
        .point_indices
        .iter()
        .map(|&g| frame.region().points()[g].as_slice())
        .collect();
    let sep = if coords.len() >= 2 {
        separation(frame.space(), &coords)?
    } else {
        f64::INFINITY
    };
    v.push(
        "separation",
        sep,
        report.r_used,
        report.r_used > 0.0 && sep >= report.r_used - 1e-12,
    );
    v.push(
        "cell_multiplicity",
        report.max_cell_multiplicity as f64,
        2.0,
        report.max_cell_multiplicity <= 2,
    );
    let expected = 2 * report.cycles as i32 - report.beta as i32;
    v.push(
        "weight_law",
        report.weight_exponent as f64,
        expected as f64,
        report.weight_exponent == expected,
    );
    v.push(
        "cycle_budget",
        report.cycles as f64,
        report.max_cycles as f64,
        report.cycles <= report.max_cycles,
    );
    if let Some(t) = &report.telescoping {
        v.push("telescoping", t.final_deviation, t.total, t.holds);
    }
    Ok(v.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::exponential_frame;
    use crate::spaces::{Region, SpaceModel};

    fn exp_frame(n: usize, half: f64, h: f64) -> FrameModel {
        let space = SpaceModel::euclidean(1);
        let region = Region::with_spacing(&space, &[(-half, half)], h).unwrap();
        exponential_frame(space, (0.0, 1.0), n, region).unwrap()
    }

    #[test]
    fn dyadic_examples() {
        assert_eq!(dyadic_decompose(0.75, 1e-3).unwrap(), vec![1, 2]);
        assert!(dyadic_decompose(0.0, 1e-3).unwrap().is_empty());
        let ls = dyadic_decompose(1.0 / 3.0, 1e-4).unwrap();
        assert_eq!(ls, vec![2, 4, 6, 8, 10, 12]);
        // Oracle: greedy binary expansion digit by digit.
        let mut rem = 1.0 / 3.0;
        let mut oracle = Vec::new();
        for l in 1..40u32 {
            if rem < 1e-4 {
                break;
            }
            let w = 0.5f64.powi(l as i32);
            if w <= rem {
                rem -= w;
                oracle.push(l);
            }
        }
        assert_eq!(ls, oracle);
        let s: f64 = ls.iter().map(|&l| 0.5f64.powi(l as i32)).sum();
        assert!(s <= 1.0 / 3.0 && 1.0 / 3.0 - s < 1e-4);
        assert_eq!(dyadic_decompose(3.5, 0.1).unwrap(), vec![0, 0, 0, 1]);
    }

    #[test]
    fn refine_constant_and_two_point_cells() {
        let space = SpaceModel::euclidean(1);
        let region =
            Region::from_points(&space, vec![vec![0.0], vec![0.01]], vec![0.5, 0.5]).unwrap();
        let frame = exponential_frame(space, (0.0, 1.0), 1, region.clone()).unwrap();
        // n = 1 with s = 0.5: Ψ(λ) = e^{πiλ}; the two images are 0.031 apart.
        let part = assign_cells(&space, &region, &[0], 0.01).unwrap();
        let coarse = refine_cells_by_image(&frame, &part, 1.0).unwrap();
        assert_eq!(coarse.subcells.len(), 1);
        let fine = refine_cells_by_image(&frame, &part, 0.01).unwrap();
        assert_eq!(fine.subcells.len(), 2);
        assert!(fine
            .subcells
            .iter()
            .all(|s| s.members.len() == 1 && s.diameter == 0.0));
    }

    #[test]
    fn sampling_carries_non_dyadic_weights() {
        // Weights 0.05 have no finite binary expansion.
        let frame = exp_frame(8, 2.0, 0.05);
        let space = *frame.space();
        let centers = greedy_net(&space, frame.region(), 0.25).unwrap();
        let part = assign_cells(&space, frame.region(), &centers, 0.25).unwrap();
        let eps_abs = 0.3 * frame.reference_bounds().1;
        let set = sample_weighted(&frame, &part, eps_abs).unwrap();
        let quantum = 0.5f64.powi(set.floor_exponent as i32);
        assert!(part.cells.len() as f64 * quantum <= eps_abs / (3.0 * frame.declared_d()));
        assert!(set.entries.iter().all(|e| e.exponent <= set.floor_exponent));
        let mut dropped = 0.0;
        for (mass, measure) in set.cell_masses().iter().zip(&set.cell_measures) {
            assert!(*mass <= measure + 1e-12);
            assert!(measure - mass < quantum);
            dropped += measure - mass;
        }
        assert!((dropped - set.tail_mass).abs() < 1e-12);
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(0, 0.5, 1.0), 0.0);
        assert!((eta(1, 0.5, 1.0) - 0.25 / 64.0).abs() < 1e-15);
        assert_eq!(eta(1, 100.0, 1.0), 1.0);
    }

    fn exp_pipeline(seed: u64) -> (FrameModel, DiscretizationReport) {
        let frame = exp_frame(16, 8.0, 1.0 / 64.0);
        let config = PipelineConfig {
            epsilon: 0.3,
            mode: Mode::Practical,
            net_radius: 0.0625,
            radius: RadiusChoice::Adaptive {
                start: 0.25,
                steps: 8,
            },
            search: SearchConfig::greedy(),
            seed,
            selector_delta: 0.01,
        };
        let report = discretize(&frame, &config).unwrap();
        (frame, report)
    }

    #[test]
    fn exponential_pipeline_small() {
        let (frame, report) = exp_pipeline(7);
        assert!(report.verdict.passed, "{:?}", report.verdict.failures());
        assert!(report.sample_deviation < 0.3);
        assert!(report.max_cell_multiplicity <= 2);
        assert_eq!(verify_report(&report, &frame).unwrap(), report.verdict);
    }

    #[test]
    fn schedule_properties() {
        let frame = exp_frame(8, 4.0, 1.0 / 32.0);
        let space = *frame.space();
        let centers = greedy_net(&space, frame.region(), 0.125).unwrap();
        let part = assign_cells(&space, frame.region(), &centers, 0.125).unwrap();
        let samples = sample_weighted(&frame, &part, 0.25).unwrap();
        let sched = build_schedule(&frame, &samples, 0.25, 1.0).unwrap();
        assert_eq!(&sched.cuts[..2], &[0, 1]);
        assert_eq!(*sched.cuts.last().unwrap(), samples.len());
        for (i, a) in sched.h.iter().enumerate() {
            for b in &sched.h[i + 1..] {
                if a.dim() > 0 && b.dim() > 0 {
                    let cross = a.basis().adjoint() * b.basis();
                    assert!(cross.iter().all(|z| z.norm() < 1e-9));
                }
            }
        }
        for (k, t) in sched.tails.iter().enumerate() {
            // Cuts before the last satisfy the tail bound; the last has empty tail.
            assert!(*t <= sched.eta[k + 2] + 1e-9 || *t == 0.0);
        }
    }

    #[test]
    fn separated_input_needs_no_cycle() {
        let frame = exp_frame(4, 4.0, 0.25);
        let u =
            uniform_select(&frame, &[0, 8, 16], 2, 0.5, 10, &SearchConfig::greedy(), 1).unwrap();
        assert_eq!(u.cycles, 0);
        assert_eq!(u.weight_exponent, -2);
        assert_eq!(u.points, vec![0, 8, 16]);
    }

    #[test]
    fn coincident_points_take_one_cycle() {
        let space = SpaceModel::euclidean(1);
        let region =
            Region::from_points(&space, vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).unwrap();
        let frame = exponential_frame(space, (0.0, 1.0), 2, region).unwrap();
        let u =
            uniform_select(&frame, &[0, 1], 1, 0.1, 10, &SearchConfig::exhaustive(), 1).unwrap();
        assert_eq!(u.cycles, 1);
        assert_eq!(u.weight_exponent, 1);
        assert!(u.points.len() <= 1);
    }

    #[test]
    fn degenerate_frame_rejected() {
        let frame = exp_frame(4, 1.0, 0.125);
        let (a, b) = frame.reference_bounds();
        assert!(a <= 0.3 * b);
        let config = PipelineConfig {
            epsilon: 0.3,
            mode: Mode::Practical,
            net_radius: 0.125,
            radius: RadiusChoice::Fixed(0.1),
            search: SearchConfig::greedy(),
            seed: 0,
            selector_delta: 0.01,
        };
        assert!(matches!(
            discretize(&frame, &config),
            Err(Error::Degenerate { .. })
        ));
    }
}
