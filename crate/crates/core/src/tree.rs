//! Depth-limited binary CART trees: gini for classification, squared error
//! for regression.
//!
//! Trees are grown level by level. Every column is sorted once
//! ([`Presorted`]); a level is processed with one pass per candidate feature
//! over that order, keeping a running left-side accumulator per open node.
//! Thresholds are midpoints between consecutive distinct values and rows with
//! `value <= threshold` go left. An impure node is split on its best candidate
//! even when that candidate has zero gain, so that patterns such as XOR are
//! reachable one level down.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Matrix;

/// [`best_split`] treats gains at or below this fraction of the parent
/// impurity as no gain.
const MIN_RELATIVE_GAIN: f64 = 1e-12;
const NO_SLOT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    Gini,
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub impurity: Impurity,
}

impl TreeParams {
    pub fn new(max_depth: usize, impurity: Impurity) -> Self {
        TreeParams {
            max_depth,
            min_samples_split: 2,
            impurity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Arena-backed binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    depth: usize,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
            depth: 0,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Smallest row width that covers every feature the tree reads.
    pub fn required_width(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(feature + 1),
                Node::Leaf { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Index of the leaf node `row` falls into.
    #[inline]
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let need = self.required_width();
        if row.len() < need {
            return Err(Error::WidthMismatch {
                expected: need,
                found: row.len(),
            });
        }
        Ok(self.predict_unchecked(row))
    }

    pub fn leaf_value(&self, index: usize) -> Option<f64> {
        match self.nodes.get(index) {
            Some(Node::Leaf { value }) => Some(*value),
            _ => None,
        }
    }

    /// Replaces each leaf value with `f(leaf_index, old_value)`.
    pub fn map_leaves(&mut self, mut f: impl FnMut(usize, f64) -> f64) {
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if let Node::Leaf { value } = node {
                *value = f(i, *value);
            }
        }
    }

    /// Structural validity: children in range, every node reachable once.
    #[cfg(test)]
    pub(crate) fn check(&self) -> std::result::Result<(), String> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        let mut depth = 0;
        while let Some((at, d)) = stack.pop() {
            if at >= self.nodes.len() || seen[at] {
                return Err(format!("node {at} out of range or shared"));
            }
            seen[at] = true;
            depth = depth.max(d);
            match self.nodes[at] {
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(format!("leaf {at} is not finite"))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if !threshold.is_finite() {
                        return Err(format!("threshold at {at} is not finite"));
                    }
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("unreachable nodes".into());
        }
        if depth != self.depth {
            return Err(format!("recorded depth {} but found {depth}", self.depth));
        }
        Ok(())
    }
}

/// Gini impurity `1 - p₊² - p₋²` of a node with the given class counts.
pub fn gini(n_pos: usize, n_neg: usize) -> Result<f64> {
    if n_pos + n_neg == 0 {
        return Err(Error::EmptyNode);
    }
    Ok(gini_weighted(n_pos as f64, (n_pos + n_neg) as f64))
}

#[inline]
fn gini_weighted(pos: f64, total: f64) -> f64 {
    let p = pos / total;
    let q = (total - pos) / total;
    1.0 - p * p - q * q
}

/// Weighted sufficient statistics of a node.
#[derive(Debug, Clone, Copy, Default)]
struct NodeStats {
    weight: f64,
    sum: f64,
    sum_sq: f64,
}

impl NodeStats {
    fn impurity(&self, kind: Impurity) -> f64 {
        match kind {
            Impurity::Gini => gini_weighted(self.sum, self.weight),
            Impurity::Variance => {
                let mean = self.sum / self.weight;
                (self.sum_sq / self.weight - mean * mean).max(0.0)
            }
        }
    }
}

/// Split score `q = Σ_child s²/w`. Both criteria are increasing in it: the
/// weighted gini of a binary child is `2(s - s²/w)` and its weighted squared
/// error is `Σt² - s²/w`.
#[inline]
fn split_score(parent: &NodeStats, left_w: f64, left_s: f64) -> f64 {
    let right_w = parent.weight - left_w;
    let right_s = parent.sum - left_s;
    left_s * left_s / left_w + right_s * right_s / right_w
}

/// Impurity decrease of a split with score `q`.
#[inline]
fn gain_from_score(kind: Impurity, parent: &NodeStats, parent_impurity: f64, q: f64) -> f64 {
    match kind {
        Impurity::Gini => parent_impurity - 2.0 * (parent.sum - q) / parent.weight,
        Impurity::Variance => (q - parent.sum * parent.sum / parent.weight) / parent.weight,
    }
}

#[inline]
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mut t = (lo + hi) * 0.5;
    if !t.is_finite() {
        t = lo * 0.5 + hi * 0.5;
    }
    if t >= hi {
        lo
    } else {
        t
    }
}

/// Per-row multiplicities of a training sample (bootstrap draws, subsets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSample {
    counts: Vec<u32>,
}

impl RowSample {
    pub fn all(n_rows: usize) -> Self {
        RowSample {
            counts: vec![1; n_rows],
        }
    }

    /// Counts repeated indices as repeated draws.
    pub fn from_indices(n_rows: usize, indices: &[usize]) -> Self {
        let mut counts = vec![0; n_rows];
        for &i in indices {
            counts[i] += 1;
        }
        RowSample { counts }
    }

    /// `n_rows` draws with replacement.
    pub fn bootstrap(n_rows: usize, rng: &mut impl rand::Rng) -> Self {
        let mut counts = vec![0; n_rows];
        for _ in 0..n_rows {
            counts[rng.random_range(0..n_rows)] += 1;
        }
        RowSample { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    /// Total number of draws.
    pub fn size(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }
}

/// Supplies the candidate features for each node.
pub trait FeatureSampler {
    /// Ascending feature indices drawn from `0..width`.
    fn sample(&mut self, width: usize) -> Vec<usize>;
}

/// Every feature at every node.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllFeatures;

impl FeatureSampler for AllFeatures {
    fn sample(&mut self, width: usize) -> Vec<usize> {
        (0..width).collect()
    }
}

/// A fresh uniform subset of fixed size at every node.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    size: usize,
    rng: ChaCha8Rng,
}

impl SubsetSampler {
    pub fn new(size: usize, rng: ChaCha8Rng) -> Self {
        SubsetSampler { size, rng }
    }

    pub fn seeded(size: usize, seed: u64) -> Self {
        Self::new(size, ChaCha8Rng::seed_from_u64(seed))
    }
}

impl FeatureSampler for SubsetSampler {
    fn sample(&mut self, width: usize) -> Vec<usize> {
        let k = self.size.min(width);
        let mut picked = rand::seq::index::sample(&mut self.rng, width, k).into_vec();
        picked.sort_unstable();
        picked
    }
}

/// Sorted view of a column: row indices and values in ascending value order
/// (ties by row index).
#[derive(Debug, Clone)]
struct SortedColumn {
    rows: Vec<u32>,
    values: Vec<f64>,
    /// Position range of the longest run of equal values.
    big: (usize, usize),
    /// The column in row order.
    raw: Vec<f64>,
}

fn longest_run(values: &[f64]) -> (usize, usize) {
    let mut best = (0, 0);
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] != values[start] {
            if i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i;
        }
    }
    best
}

/// Every column of a matrix sorted once, shared by all trees grown on it.
#[derive(Debug, Clone)]
pub struct Presorted {
    n_rows: usize,
    columns: Vec<SortedColumn>,
}

impl Presorted {
    pub fn new(m: &Matrix) -> Self {
        let columns = (0..m.n_cols())
            .map(|j| {
                let raw: Vec<f64> = m.column(j).collect();
                let mut pairs: Vec<(f64, u32)> = raw.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                SortedColumn {
                    rows: pairs.iter().map(|p| p.1).collect(),
                    big: longest_run(&values),
                    values,
                    raw,
                }
            })
            .collect();
        Presorted {
            n_rows: m.n_rows(),
            columns,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}

/// Running side statistics of one open node while scanning a feature.
#[derive(Clone, Copy)]
struct ScanState {
    w: f64,
    s: f64,
    /// Last value seen in scan direction.
    edge: f64,
    best: Option<(f64, f64, f64)>, // (score, lo, hi)
}

const FRESH: ScanState = ScanState {
    w: 0.0,
    s: 0.0,
    edge: 0.0,
    best: None,
};

/// An open node at the current level.
struct OpenNode {
    arena: usize,
    depth: usize,
    stats: NodeStats,
    impurity: f64,
    features: Vec<usize>,
    best: Option<SplitCandidate>,
}

impl OpenNode {
    fn score(&self, left_w: f64, left_s: f64) -> f64 {
        split_score(&self.stats, left_w, left_s)
    }
}

/// Finds the best split for every open node with one pass per feature.
///
/// With gini targets the sums are integers, so the longest run of equal
/// values in a column need not be visited: its statistics follow from the
/// node totals. The prefix before it is scanned forwards and the suffix after
/// it backwards. Candidates are still ranked in ascending threshold order.
fn scan_level(
    presorted: &Presorted,
    row_ws: &[(f64, f64)],
    slot_of: &[u32],
    open: &mut [OpenNode],
    kind: Impurity,
) {
    let width = presorted.n_cols();
    let n = presorted.n_rows();
    // users[f] = slots that consider feature f
    let mut users: Vec<Vec<u32>> = vec![Vec::new(); width];
    for (s, node) in open.iter().enumerate() {
        for &f in &node.features {
            users[f].push(s as u32);
        }
    }
    let mut uses = vec![false; open.len()];
    let mut fwd = vec![FRESH; open.len()];
    let mut bwd = vec![FRESH; open.len()];
    for (f, slots) in users.iter().enumerate() {
        if slots.is_empty() {
            continue;
        }
        for &s in slots {
            uses[s as usize] = true;
            fwd[s as usize] = FRESH;
            bwd[s as usize] = FRESH;
        }
        let col = &presorted.columns[f];
        let (b0, b1) = match kind {
            Impurity::Gini => col.big,
            Impurity::Variance => (n, n),
        };

        for i in 0..b0 {
            let r = col.rows[i] as usize;
            let s = slot_of[r];
            if s == NO_SLOT || !uses[s as usize] {
                continue;
            }
            let s = s as usize;
            let v = col.values[i];
            let st = &mut fwd[s];
            if st.w > 0.0 && v > st.edge {
                let q = open[s].score(st.w, st.s);
                if st.best.is_none_or(|b| q > b.0) {
                    st.best = Some((q, st.edge, v));
                }
            }
            let (w, ws) = row_ws[r];
            st.w += w;
            st.s += ws;
            st.edge = v;
        }

        for i in (b1..n).rev() {
            let r = col.rows[i] as usize;
            let s = slot_of[r];
            if s == NO_SLOT || !uses[s as usize] {
                continue;
            }
            let s = s as usize;
            let v = col.values[i];
            let st = &mut bwd[s];
            if st.w > 0.0 && v < st.edge {
                let node = &open[s];
                let q = node.score(node.stats.weight - st.w, node.stats.sum - st.s);
                // backwards, so `>=` keeps the lowest threshold among ties
                if st.best.is_none_or(|b| q >= b.0) {
                    st.best = Some((q, v, st.edge));
                }
            }
            let (w, ws) = row_ws[r];
            st.w += w;
            st.s += ws;
            st.edge = v;
        }

        for &s in slots {
            let s = s as usize;
            uses[s] = false;
            let node = &mut open[s];
            let (pre, suf) = (fwd[s], bwd[s]);
            let mut best = pre.best;
            let mut offer = |cand: Option<(f64, f64, f64)>| {
                if let Some(c) = cand {
                    if best.is_none_or(|b| c.0 > b.0) {
                        best = Some(c);
                    }
                }
            };
            let big_w = node.stats.weight - pre.w - suf.w;
            if big_w > 0.0 {
                let big_v = col.values[b0];
                if pre.w > 0.0 {
                    offer(Some((node.score(pre.w, pre.s), pre.edge, big_v)));
                }
                if suf.w > 0.0 {
                    let q = node.score(node.stats.weight - suf.w, node.stats.sum - suf.s);
                    offer(Some((q, big_v, suf.edge)));
                }
            } else if pre.w > 0.0 && suf.w > 0.0 {
                offer(Some((node.score(pre.w, pre.s), pre.edge, suf.edge)));
            }
            offer(suf.best);
            if let Some((q, lo, hi)) = best {
                let gain = gain_from_score(kind, &node.stats, node.impurity, q);
                if node.best.is_none_or(|b| gain > b.gain) {
                    node.best = Some(SplitCandidate {
                        feature_index: f,
                        threshold: midpoint(lo, hi),
                        gain,
                    });
                }
            }
        }
    }
}

fn check_inputs(m: &Matrix, presorted: &Presorted, targets: &[f64], rows: &RowSample) -> Result<()> {
    if targets.len() != m.n_rows() || rows.n_rows() != m.n_rows() {
        return Err(Error::LengthMismatch(format!(
            "{} rows, {} targets, {} sample counts",
            m.n_rows(),
            targets.len(),
            rows.n_rows()
        )));
    }
    if presorted.n_rows() != m.n_rows() || presorted.n_cols() != m.n_cols() {
        return Err(Error::WidthMismatch {
            expected: m.n_cols(),
            found: presorted.n_cols(),
        });
    }
    Ok(())
}

/// Best (feature, midpoint) split of the sampled rows over `features`, or
/// `None` when no split decreases impurity. Ties go to the lower feature
/// index, then the lower threshold.
pub fn best_split(
    m: &Matrix,
    targets: &[f64],
    rows: &RowSample,
    features: &[usize],
    impurity: Impurity,
) -> Result<Option<SplitCandidate>> {
    let presorted = Presorted::new(m);
    check_inputs(m, &presorted, targets, rows)?;
    if let Some(&f) = features.iter().find(|&&f| f >= m.n_cols()) {
        return Err(Error::WidthMismatch {
            expected: m.n_cols(),
            found: f + 1,
        });
    }
    if rows.size() < 2 {
        return Ok(None);
    }
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let slot_of: Vec<u32> = rows
        .counts()
        .iter()
        .map(|&c| if c > 0 { 0 } else { NO_SLOT })
        .collect();
    let stats = accumulate_stats(targets, rows.counts(), &slot_of, 1)[0];
    let parent_impurity = stats.impurity(impurity);
    if parent_impurity <= 0.0 {
        return Ok(None);
    }
    let mut open = vec![OpenNode {
        arena: 0,
        depth: 0,
        stats,
        impurity: parent_impurity,
        features,
        best: None,
    }];
    scan_level(&presorted, &weighted_targets(targets, rows.counts()), &slot_of, &mut open, impurity);
    Ok(open[0]
        .best
        .filter(|b| b.gain > 0.0 && b.gain > MIN_RELATIVE_GAIN * parent_impurity))
}

/// Per-row `(count, count · target)`.
fn weighted_targets(targets: &[f64], counts: &[u32]) -> Vec<(f64, f64)> {
    targets
        .iter()
        .zip(counts)
        .map(|(&t, &c)| (c as f64, c as f64 * t))
        .collect()
}

fn accumulate_stats(targets: &[f64], counts: &[u32], slot_of: &[u32], n_slots: usize) -> Vec<NodeStats> {
    let mut stats = vec![NodeStats::default(); n_slots];
    for ((&s, &c), &t) in slot_of.iter().zip(counts).zip(targets) {
        if s == NO_SLOT {
            continue;
        }
        let st = &mut stats[s as usize];
        let c = c as f64;
        st.weight += c;
        st.sum += c * t;
        st.sum_sq += c * t * t;
    }
    stats
}

pub fn fit_tree(
    m: &Matrix,
    targets: &[f64],
    params: &TreeParams,
    rows: &RowSample,
    sampler: &mut dyn FeatureSampler,
) -> Result<Tree> {
    fit_tree_presorted(m, &Presorted::new(m), targets, params, rows, sampler)
}

/// [`fit_tree`] with a precomputed column order of `m`.
pub fn fit_tree_presorted(
    m: &Matrix,
    presorted: &Presorted,
    targets: &[f64],
    params: &TreeParams,
    rows: &RowSample,
    sampler: &mut dyn FeatureSampler,
) -> Result<Tree> {
    params.validate()?;
    check_inputs(m, presorted, targets, rows)?;
    if rows.size() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(bad) = targets.iter().position(|t| !t.is_finite()) {
        return Err(Error::DegenerateInput(format!("target {bad} is not finite")));
    }
    if params.impurity == Impurity::Gini && targets.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::DegenerateInput("gini targets must be 0 or 1".into()));
    }

    let counts = rows.counts();
    let row_ws = weighted_targets(targets, counts);
    let width = m.n_cols();
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut depth = 0;
    let mut slot_of: Vec<u32> = counts
        .iter()
        .map(|&c| if c > 0 { 0 } else { NO_SLOT })
        .collect();
    let mut frontier: Vec<(usize, usize)> = vec![(0, 0)]; // (arena index, depth)

    while !frontier.is_empty() {
        let stats = accumulate_stats(targets, counts, &slot_of, frontier.len());
        let mut open = Vec::new();
        let mut open_slot = vec![NO_SLOT; frontier.len()];
        for (s, (&(arena, d), st)) in frontier.iter().zip(&stats).enumerate() {
            nodes[arena] = Node::Leaf {
                value: st.sum / st.weight,
            };
            let impurity = st.impurity(params.impurity);
            let splittable = d < params.max_depth
                && st.weight >= params.min_samples_split.max(2) as f64
                && impurity > 0.0;
            if splittable {
                open_slot[s] = open.len() as u32;
                open.push(OpenNode {
                    arena,
                    depth: d,
                    stats: *st,
                    impurity,
                    features: sampler.sample(width),
                    best: None,
                });
            }
        }
        for s in slot_of.iter_mut() {
            if *s != NO_SLOT {
                *s = open_slot[*s as usize];
            }
        }
        if open.is_empty() {
            break;
        }
        scan_level(presorted, &row_ws, &slot_of, &mut open, params.impurity);

        // children of split nodes become the next frontier
        let mut next = Vec::new();
        let mut child_slot = vec![(NO_SLOT, NO_SLOT); open.len()];
        for (s, node) in open.iter().enumerate() {
            let Some(best) = node.best else { continue };
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[node.arena] = Node::Split {
                feature: best.feature_index,
                threshold: best.threshold,
                left,
                right,
            };
            depth = depth.max(node.depth + 1);
            child_slot[s] = (next.len() as u32, next.len() as u32 + 1);
            next.push((left, node.depth + 1));
            next.push((right, node.depth + 1));
        }
        for (r, s) in slot_of.iter_mut().enumerate() {
            if *s == NO_SLOT {
                continue;
            }
            let node = &open[*s as usize];
            *s = match node.best {
                Some(b) => {
                    let (l, rt) = child_slot[*s as usize];
                    if presorted.columns[b.feature_index].raw[r] <= b.threshold {
                        l
                    } else {
                        rt
                    }
                }
                None => NO_SLOT,
            };
        }
        frontier = next;
    }
    Ok(Tree { nodes, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> Matrix {
        Matrix::new(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(5, 5).unwrap(), 0.5);
        assert_eq!(gini(10, 0).unwrap(), 0.0);
        assert_eq!(gini(3, 1).unwrap(), 1.0 - (0.75f64 * 0.75 + 0.25 * 0.25));
        assert!(matches!(gini(0, 0), Err(Error::EmptyNode)));
    }

    #[test]
    fn best_split_on_separable_column() {
        let m = column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [0.0, 0.0, 1.0, 1.0];
        let s = best_split(&m, &y, &RowSample::all(4), &[0], Impurity::Gini)
            .unwrap()
            .unwrap();
        assert_eq!(s.feature_index, 0);
        assert_eq!(s.threshold, 2.5);
        assert_eq!(s.gain, 0.5);
    }

    #[test]
    fn best_split_none_for_pure_labels() {
        let m = column(&[1.0, 2.0, 3.0]);
        let s = best_split(&m, &[1.0; 3], &RowSample::all(3), &[0], Impurity::Gini).unwrap();
        assert!(s.is_none());
        let v = best_split(&m, &[0.3; 3], &RowSample::all(3), &[0], Impurity::Variance).unwrap();
        assert!(v.is_none());
    }

    #[test]
    fn constant_column_loses_to_informative_one() {
        let m = Matrix::from_rows(&[
            vec![7.0, 1.0],
            vec![7.0, 2.0],
            vec![7.0, 3.0],
            vec![7.0, 4.0],
        ])
        .unwrap();
        let s = best_split(&m, &[0.0, 0.0, 1.0, 1.0], &RowSample::all(4), &[0, 1], Impurity::Gini)
            .unwrap()
            .unwrap();
        assert_eq!((s.feature_index, s.threshold), (1, 2.5));
    }

    #[test]
    fn tie_prefers_lower_feature() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let s = best_split(&m, &[0.0, 1.0], &RowSample::all(2), &[1, 0], Impurity::Gini)
            .unwrap()
            .unwrap();
        assert_eq!(s.feature_index, 0);
    }

    #[test]
    fn stump_on_separable_data() {
        let m = column(&[1.0, 2.0, 3.0, 4.0]);
        let t = fit_tree(
            &m,
            &[0.0, 0.0, 1.0, 1.0],
            &TreeParams::new(1, Impurity::Gini),
            &RowSample::all(4),
            &mut AllFeatures,
        )
        .unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(
            t.nodes()[0],
            Node::Split {
                feature: 0,
                threshold: 2.5,
                left: 1,
                right: 2
            }
        );
        assert_eq!(t.leaf_value(1), Some(0.0));
        assert_eq!(t.leaf_value(2), Some(1.0));
        // boundary goes left
        assert_eq!(t.predict(&[2.5]).unwrap(), 0.0);
        assert_eq!(t.predict(&[2.5000001]).unwrap(), 1.0);
        t.check().unwrap();
    }

    #[test]
    fn pure_input_is_single_leaf() {
        let m = column(&[1.0, 2.0, 3.0]);
        let t = fit_tree(&m, &[1.0; 3], &TreeParams::new(3, Impurity::Gini), &RowSample::all(3), &mut AllFeatures)
            .unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { value: 1.0 }]);
        assert_eq!(t.predict(&[]).unwrap(), 1.0);
    }

    fn xor() -> (Matrix, Vec<f64>) {
        let m = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        (m, vec![0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn xor_needs_depth_two() {
        let (m, y) = xor();
        assert!(best_split(&m, &y, &RowSample::all(4), &[0, 1], Impurity::Gini)
            .unwrap()
            .is_none());
        for kind in [Impurity::Gini, Impurity::Variance] {
            let stump = fit_tree(&m, &y, &TreeParams::new(1, kind), &RowSample::all(4), &mut AllFeatures).unwrap();
            assert_eq!(accuracy(&stump, &m, &y), 0.5, "{kind:?}");
            let deep = fit_tree(&m, &y, &TreeParams::new(2, kind), &RowSample::all(4), &mut AllFeatures).unwrap();
            assert_eq!(accuracy(&deep, &m, &y), 1.0, "{kind:?}");
            for (row, &yi) in m.rows().zip(&y) {
                assert_eq!(deep.predict(row).unwrap(), yi);
            }
        }
    }

    fn accuracy(t: &Tree, m: &Matrix, y: &[f64]) -> f64 {
        // a 0.5 prediction counts as half right
        m.rows()
            .zip(y)
            .map(|(r, &yi)| {
                let p = t.predict(r).unwrap();
                if p == 0.5 {
                    0.5
                } else if (p > 0.5) == (yi == 1.0) {
                    1.0
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / y.len() as f64
    }

    #[test]
    fn bootstrap_counts_act_as_duplicates() {
        let m = column(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = [0.0, 1.0, 0.0, 1.0, 1.0];
        let sample = RowSample::from_indices(5, &[0, 0, 1, 3, 3, 3]);
        let dup = Matrix::new(6, 1, vec![1.0, 1.0, 2.0, 4.0, 4.0, 4.0]).unwrap();
        let dup_y = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let p = TreeParams::new(3, Impurity::Gini);
        let a = fit_tree(&m, &y, &p, &sample, &mut AllFeatures).unwrap();
        let b = fit_tree(&dup, &dup_y, &p, &RowSample::all(6), &mut AllFeatures).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let m = column(&[1.0, 2.0, 3.0, 4.0]);
        let p = TreeParams {
            min_samples_split: 5,
            ..TreeParams::new(3, Impurity::Gini)
        };
        let t = fit_tree(&m, &[0.0, 0.0, 1.0, 1.0], &p, &RowSample::all(4), &mut AllFeatures).unwrap();
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn errors() {
        let m = column(&[1.0, 2.0]);
        let empty = RowSample::from_indices(2, &[]);
        assert!(matches!(
            fit_tree(&m, &[0.0, 1.0], &TreeParams::new(2, Impurity::Gini), &empty, &mut AllFeatures),
            Err(Error::EmptyTrainingSet)
        ));
        assert!(fit_tree(&m, &[0.0, 1.0], &TreeParams::new(0, Impurity::Gini), &RowSample::all(2), &mut AllFeatures).is_err());
        assert!(fit_tree(&m, &[0.0, 0.7], &TreeParams::new(2, Impurity::Gini), &RowSample::all(2), &mut AllFeatures).is_err());
        let t = fit_tree(&m, &[0.0, 1.0], &TreeParams::new(2, Impurity::Gini), &RowSample::all(2), &mut AllFeatures).unwrap();
        assert!(matches!(t.predict(&[]), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn subset_sampler_is_sorted_and_sized() {
        let mut s = SubsetSampler::seeded(4, 9);
        for _ in 0..20 {
            let f = s.sample(10);
            assert_eq!(f.len(), 4);
            assert!(f.windows(2).all(|w| w[0] < w[1]));
            assert!(f.iter().all(|&x| x < 10));
        }
        assert_eq!(s.sample(2), vec![0, 1]);
    }

    #[test]
    fn midpoint_never_reaches_upper_value() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(t >= lo && t < hi);
        assert_eq!(midpoint(2.0, 3.0), 2.5);
    }
}
