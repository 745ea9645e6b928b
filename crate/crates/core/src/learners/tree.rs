//! Gain-ratio decision tree with error-based pruning.
//!
//! Nominal attributes split multiway and are tested at most once on any path;
//! continuous attributes split on a binary midpoint threshold. A split is
//! admissible when at least two branches hold `min_leaf` instances. Among
//! admissible splits whose gain is at least the average gain, the one with
//! the highest gain ratio wins. Pruning replaces a subtree by a leaf whenever
//! the leaf's upper-confidence error estimate does not exceed the subtree's
//! by more than 0.1.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{argmax, Classifier, ProbVector};
use crate::data::{AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    /// Confidence factor of the pessimistic error estimate.
    pub confidence: f64,
    pub prune: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 2,
            confidence: 0.25,
            prune: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        /// Class counts used for probabilities. Empty branches copy their parent's.
        counts: Vec<usize>,
        /// Training instances that actually reached this leaf.
        covered: usize,
    },
    Nominal {
        attribute: usize,
        counts: Vec<usize>,
        children: Vec<Node>,
        /// Branch taken by missing values.
        default_child: usize,
    },
    Threshold {
        attribute: usize,
        threshold: f64,
        counts: Vec<usize>,
        left: Box<Node>,
        right: Box<Node>,
        missing_left: bool,
    },
}

impl Node {
    fn counts(&self) -> &[usize] {
        match self {
            Node::Leaf { counts, .. } | Node::Nominal { counts, .. } | Node::Threshold { counts, .. } => counts,
        }
    }

    fn covered(&self) -> usize {
        match self {
            Node::Leaf { covered, .. } => *covered,
            other => other.counts().iter().sum(),
        }
    }

    fn leaf_of(counts: Vec<usize>) -> Node {
        let covered = counts.iter().sum();
        Node::Leaf { counts, covered }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    root: Node,
    num_classes: usize,
    num_attributes: usize,
}

impl TreeModel {
    pub fn num_leaves(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Nominal { children, .. } => children.iter().map(walk).sum(),
                Node::Threshold { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Nominal { children, .. } => 1 + children.iter().map(walk).max().unwrap_or(0),
                Node::Threshold { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }

    /// Attribute tested at the root, `None` for a single-leaf tree.
    pub fn root_attribute(&self) -> Option<usize> {
        match &self.root {
            Node::Leaf { .. } => None,
            Node::Nominal { attribute, .. } | Node::Threshold { attribute, .. } => Some(*attribute),
        }
    }

    /// Class counts of the leaf `x` falls into.
    pub fn leaf_counts(&self, x: &Instance) -> &[usize] {
        let mut node = &self.root;
        loop {
            node = match node {
                Node::Leaf { counts, .. } => return counts,
                Node::Nominal {
                    attribute,
                    children,
                    default_child,
                    ..
                } => match x.values[*attribute] {
                    Value::Nominal(v) if v < children.len() => &children[v],
                    _ => &children[*default_child],
                },
                Node::Threshold {
                    attribute,
                    threshold,
                    left,
                    right,
                    missing_left,
                    ..
                } => {
                    let go_left = match x.values[*attribute] {
                        Value::Continuous(v) => v <= *threshold,
                        _ => *missing_left,
                    };
                    if go_left {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    /// Nominal attributes tested along every root-to-leaf path.
    pub fn nominal_paths(&self) -> Vec<Vec<usize>> {
        fn walk(n: &Node, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match n {
                Node::Leaf { .. } => out.push(path.clone()),
                Node::Nominal {
                    attribute, children, ..
                } => {
                    path.push(*attribute);
                    for c in children {
                        walk(c, path, out);
                    }
                    path.pop();
                }
                Node::Threshold { left, right, .. } => {
                    walk(left, path, out);
                    walk(right, path, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }
}

impl Classifier for TreeModel {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn class_probs(&self, x: &Instance) -> ProbVector {
        leaf_probs(self.leaf_counts(x))
    }
}

/// Laplace leaf estimate: the majority class gets `1 - (E+1)/(S+2)`, where
/// `E` counts the non-majority instances and `S` all of them; the remainder
/// is shared among the other classes in proportion to their counts, or
/// evenly when `E = 0`.
pub fn leaf_probs(counts: &[usize]) -> ProbVector {
    let classes = counts.len();
    let majority = argmax(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    let total: usize = counts.iter().sum();
    let errors = total - counts[majority];
    let residual = (errors as f64 + 1.0) / (total as f64 + 2.0);
    let probs = (0..classes)
        .map(|i| {
            if i == majority {
                1.0 - residual
            } else if errors == 0 {
                residual / (classes - 1) as f64
            } else {
                residual * counts[i] as f64 / errors as f64
            }
        })
        .collect();
    ProbVector(probs)
}

/// Extra errors added to `errors` observed among `n` instances by the
/// upper confidence limit at confidence factor `cf`.
pub fn add_errors(n: f64, errors: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if errors < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if errors == 0.0 {
            return base;
        }
        return base + errors * (add_errors(n, 1.0, cf) - base);
    }
    if errors + 0.5 >= n {
        return (n - errors).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - cf);
    let f = (errors + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    r * n - errors
}

fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

fn split_info(sizes: impl Iterator<Item = usize>, total: usize) -> f64 {
    let t = total as f64;
    sizes
        .filter(|&s| s > 0)
        .map(|s| {
            let p = s as f64 / t;
            -p * p.log2()
        })
        .sum()
}

enum SplitKind {
    Nominal { branches: Vec<Vec<usize>>, default_child: usize },
    Threshold { threshold: f64, left: Vec<usize>, right: Vec<usize>, missing_left: bool },
}

struct Candidate {
    attribute: usize,
    gain: f64,
    ratio: f64,
    kind: SplitKind,
}

struct Grower<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    classes: usize,
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &i in idx {
            c[self.data.class_of(i)] += 1;
        }
        c
    }

    fn grow(&self, idx: &[usize], counts: Vec<usize>, used: &mut [bool]) -> Node {
        let impure = counts.iter().filter(|&&c| c > 0).count() > 1;
        if !impure || idx.len() < 2 * self.params.min_leaf {
            return Node::leaf_of(counts);
        }
        let Some(best) = self.best_split(idx, &counts, used) else {
            return Node::leaf_of(counts);
        };
        match best.kind {
            SplitKind::Nominal { branches, default_child } => {
                used[best.attribute] = true;
                let children = branches
                    .iter()
                    .map(|b| {
                        if b.is_empty() {
                            Node::Leaf {
                                counts: counts.clone(),
                                covered: 0,
                            }
                        } else {
                            self.grow(b, self.counts(b), used)
                        }
                    })
                    .collect();
                used[best.attribute] = false;
                Node::Nominal {
                    attribute: best.attribute,
                    counts,
                    children,
                    default_child,
                }
            }
            SplitKind::Threshold {
                threshold,
                left,
                right,
                missing_left,
            } => Node::Threshold {
                attribute: best.attribute,
                threshold,
                left: Box::new(self.grow(&left, self.counts(&left), used)),
                right: Box::new(self.grow(&right, self.counts(&right), used)),
                counts,
                missing_left,
            },
        }
    }

    fn best_split(&self, idx: &[usize], counts: &[usize], used: &[bool]) -> Option<Candidate> {
        let base = entropy(counts);
        let mut candidates = Vec::new();
        for (a, attr) in self.data.schema().attributes().iter().enumerate() {
            let cand = match &attr.kind {
                AttributeKind::Continuous => self.threshold_split(a, idx, base),
                kind if !used[a] => self.nominal_split(a, kind.arity(), idx, base),
                _ => None,
            };
            candidates.extend(cand);
        }
        if candidates.is_empty() {
            return None;
        }
        let avg = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<Candidate> = None;
        for c in candidates {
            if c.gain + 1e-12 < avg {
                continue;
            }
            if best.as_ref().is_none_or(|b| c.ratio > b.ratio + 1e-12) {
                best = Some(c);
            }
        }
        best
    }

    fn admissible(&self, sizes: impl Iterator<Item = usize>) -> bool {
        sizes.filter(|&s| s >= self.params.min_leaf).count() >= 2
    }

    fn nominal_split(&self, a: usize, arity: usize, idx: &[usize], base: f64) -> Option<Candidate> {
        let mut branches = vec![Vec::new(); arity];
        let mut missing = Vec::new();
        for &i in idx {
            match self.data.instance(i).values[a] {
                Value::Nominal(v) => branches[v].push(i),
                _ => missing.push(i),
            }
        }
        let default_child = argmax(&branches.iter().map(|b| b.len() as f64).collect::<Vec<_>>());
        branches[default_child].extend(missing);
        if !self.admissible(branches.iter().map(Vec::len)) {
            return None;
        }
        let n = idx.len() as f64;
        let remainder: f64 = branches
            .iter()
            .map(|b| b.len() as f64 / n * entropy(&self.counts(b)))
            .sum();
        let gain = base - remainder;
        let info = split_info(branches.iter().map(Vec::len), idx.len());
        if gain < -1e-12 || info <= 0.0 {
            return None;
        }
        Some(Candidate {
            attribute: a,
            gain: gain.max(0.0),
            ratio: gain.max(0.0) / info,
            kind: SplitKind::Nominal { branches, default_child },
        })
    }

    fn threshold_split(&self, a: usize, idx: &[usize], base: f64) -> Option<Candidate> {
        let mut known: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        let mut missing = Vec::new();
        for &i in idx {
            match self.data.instance(i).values[a] {
                Value::Continuous(v) => known.push((v, i)),
                _ => missing.push(i),
            }
        }
        known.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let m = known.len();
        let min_leaf = self.params.min_leaf.max(1);
        if m < 2 * min_leaf {
            return None;
        }
        let total = self.counts(&known.iter().map(|k| k.1).collect::<Vec<_>>());
        let mut left = vec![0usize; self.classes];
        let mut best: Option<(f64, usize)> = None;
        let n = m as f64;
        for pos in 0..m - 1 {
            left[self.data.class_of(known[pos].1)] += 1;
            let nl = pos + 1;
            if known[pos].0 == known[pos + 1].0 || nl < min_leaf || m - nl < min_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let remainder = nl as f64 / n * entropy(&left) + (m - nl) as f64 / n * entropy(&right);
            let gain = entropy(&total) - remainder;
            if best.is_none_or(|(g, _)| gain > g + 1e-12) {
                best = Some((gain, nl));
            }
        }
        let (_, nl) = best?;
        let threshold = 0.5 * (known[nl - 1].0 + known[nl].0);
        let mut lo: Vec<usize> = known[..nl].iter().map(|k| k.1).collect();
        let mut hi: Vec<usize> = known[nl..].iter().map(|k| k.1).collect();
        let missing_left = lo.len() >= hi.len();
        if missing_left {
            lo.extend(missing);
        } else {
            hi.extend(missing);
        }
        let all = idx.len() as f64;
        let remainder = lo.len() as f64 / all * entropy(&self.counts(&lo)) + hi.len() as f64 / all * entropy(&self.counts(&hi));
        let gain = base - remainder;
        let info = split_info([lo.len(), hi.len()].into_iter(), idx.len());
        if gain < -1e-12 || info <= 0.0 {
            return None;
        }
        Some(Candidate {
            attribute: a,
            gain: gain.max(0.0),
            ratio: gain.max(0.0) / info,
            kind: SplitKind::Threshold {
                threshold,
                left: lo,
                right: hi,
                missing_left,
            },
        })
    }
}

fn leaf_estimate(counts: &[usize], covered: usize, cf: f64) -> f64 {
    if covered == 0 {
        return 0.0;
    }
    let errors = (covered - counts.iter().max().copied().unwrap_or(0)) as f64;
    errors + add_errors(covered as f64, errors, cf)
}

/// Prunes bottom-up and returns the node with its estimated error count.
fn prune(node: Node, cf: f64) -> (Node, f64) {
    match node {
        Node::Leaf { counts, covered } => {
            let est = leaf_estimate(&counts, covered, cf);
            (Node::Leaf { counts, covered }, est)
        }
        Node::Nominal {
            attribute,
            counts,
            children,
            default_child,
        } => {
            let mut subtree = 0.0;
            let children = children
                .into_iter()
                .map(|c| {
                    let (c, e) = prune(c, cf);
                    subtree += e;
                    c
                })
                .collect();
            let node = Node::Nominal {
                attribute,
                counts,
                children,
                default_child,
            };
            collapse_if_better(node, subtree, cf)
        }
        Node::Threshold {
            attribute,
            threshold,
            counts,
            left,
            right,
            missing_left,
        } => {
            let (left, el) = prune(*left, cf);
            let (right, er) = prune(*right, cf);
            let node = Node::Threshold {
                attribute,
                threshold,
                counts,
                left: Box::new(left),
                right: Box::new(right),
                missing_left,
            };
            collapse_if_better(node, el + er, cf)
        }
    }
}

fn collapse_if_better(node: Node, subtree: f64, cf: f64) -> (Node, f64) {
    let covered = node.covered();
    let as_leaf = leaf_estimate(node.counts(), covered, cf);
    if as_leaf <= subtree + 0.1 {
        (Node::leaf_of(node.counts().to_vec()), as_leaf)
    } else {
        (node, subtree)
    }
}

pub fn train_tree(train: &Dataset, params: &TreeParams) -> Result<TreeModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(params.confidence > 0.0 && params.confidence < 1.0) {
        return Err(Error::param(format!("confidence factor {} outside (0, 1)", params.confidence)));
    }
    let grower = Grower {
        data: train,
        params,
        classes: train.num_classes(),
    };
    let idx: Vec<usize> = (0..train.len()).collect();
    let mut used = vec![false; train.schema().num_attributes()];
    let mut root = grower.grow(&idx, grower.counts(&idx), &mut used);
    if params.prune {
        root = prune(root, params.confidence).0;
    }
    Ok(TreeModel {
        root,
        num_classes: train.num_classes(),
        num_attributes: train.schema().num_attributes(),
    })
}
