use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};
use crate::num::Real;

pub const MODEL_MAGIC: &str = "bitext-forest";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features examined at each node.
    pub feature_subsample: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 12,
            feature_subsample: 4,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.feature_subsample == 0 {
            return Err(Error::invalid("forest hyperparameters must be positive"));
        }
        if self.feature_subsample > N_FEATURES {
            return Err(Error::invalid(format!("feature_subsample exceeds {N_FEATURES}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node<F> {
    /// Samples with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
    /// Fraction of positive training samples that reached the leaf.
    Leaf { value: F },
}

/// Decision tree stored as a node list with the root first.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree<F> {
    pub nodes: Vec<Node<F>>,
}

impl<F: Real> Tree<F> {
    pub fn leaf(value: F) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, x: &[F; N_FEATURES]) -> F {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Model("empty tree".into()));
        }
        for (k, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf { value } => {
                    if !(*value >= F::zero() && *value <= F::one()) {
                        return Err(Error::Model(format!("leaf value {value} outside [0,1]")));
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= N_FEATURES {
                        return Err(Error::Model(format!("feature index {feature} out of range")));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::Model("non-finite threshold".into()));
                    }
                    if *left <= k || *right <= k || *left >= self.nodes.len() || *right >= self.nodes.len() {
                        return Err(Error::Model(format!("node {k} has invalid children")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel<F> {
    pub trees: Vec<Tree<F>>,
    pub params: ForestParams,
    pub training_seed: u64,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a, F> {
    x: &'a [[F; N_FEATURES]],
    y: &'a [bool],
    max_depth: usize,
    subsample: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node<F>>,
}

impl<F: Real> Builder<'_, F> {
    /// Best split among the examined features: `(feature, threshold, impurity)`.
    fn best_split(&mut self, samples: &[usize]) -> Option<(usize, F)> {
        let mut features: Vec<usize> = (0..N_FEATURES).collect();
        features.shuffle(&mut self.rng);
        let total_pos = samples.iter().filter(|&&s| self.y[s]).count();
        let n = samples.len();
        let mut best: Option<(usize, F, f64)> = None;
        let mut sorted = samples.to_vec();
        for (examined, &f) in features.iter().enumerate() {
            if examined >= self.subsample && best.is_some() {
                break;
            }
            sorted.sort_by(|&a, &b| self.x[a][f].partial_cmp(&self.x[b][f]).unwrap().then(a.cmp(&b)));
            let mut left_pos = 0;
            for k in 0..n - 1 {
                if self.y[sorted[k]] {
                    left_pos += 1;
                }
                let (lo, hi) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if lo >= hi {
                    continue;
                }
                let nl = k + 1;
                let nr = n - nl;
                let imp = (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(total_pos - left_pos, nr)) / n as f64;
                if best.is_none_or(|(_, _, b)| imp < b) {
                    let two = F::one() + F::one();
                    let mid = lo + (hi - lo) / two;
                    let thr = if mid < hi { mid } else { lo };
                    best = Some((f, thr, imp));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&mut self, samples: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let pos = samples.iter().filter(|&&s| self.y[s]).count();
        let leaf = Node::Leaf {
            value: F::of_usize(pos) / F::of_usize(samples.len()),
        };
        self.nodes.push(leaf);
        if depth >= self.max_depth || pos == 0 || pos == samples.len() || samples.len() < 2 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(samples) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&s| self.x[s][feature] <= threshold);
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Trains a random forest of CART trees: each tree sees a bootstrap sample
/// and considers `feature_subsample` random features per node, splitting on
/// Gini impurity. Tree `k` draws from stream `k` of a generator seeded with
/// `seed`, so the model does not depend on the thread count.
pub fn train_forest<F: Real>(pos: &[FeatureVector], neg: &[FeatureVector], params: ForestParams, seed: u64) -> Result<ForestModel<F>> {
    params.validate()?;
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Empty("training class"));
    }
    let x: Vec<[F; N_FEATURES]> = pos.iter().chain(neg).map(|fv| fv.values().map(F::of)).collect();
    if x.iter().any(|row| row.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let y: Vec<bool> = (0..x.len()).map(|k| k < pos.len()).collect();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let n = x.len();
            let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut b = Builder {
                x: &x,
                y: &y,
                max_depth: params.max_depth,
                subsample: params.feature_subsample,
                rng,
                nodes: Vec::new(),
            };
            b.grow(&samples, 0);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(ForestModel {
        trees,
        params,
        training_seed: seed,
    })
}

impl<F: Real> ForestModel<F> {
    /// Mean leaf value over all trees. Leaf values are summed in sorted order,
    /// so the result does not depend on the order of the trees.
    pub fn score(&self, fv: &FeatureVector) -> f64 {
        let x = fv.values().map(F::of);
        let mut leaves: Vec<f64> = self.trees.iter().map(|t| t.predict(&x).as_f64()).collect();
        leaves.sort_by(f64::total_cmp);
        leaves.iter().sum::<f64>() / leaves.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Model("forest without trees".into()));
        }
        self.trees.iter().try_for_each(Tree::validate)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        writeln!(s, "{MODEL_MAGIC} {MODEL_VERSION}").unwrap();
        writeln!(s, "n_trees {}", self.trees.len()).unwrap();
        writeln!(s, "max_depth {}", p.max_depth).unwrap();
        writeln!(s, "feature_subsample {}", p.feature_subsample).unwrap();
        writeln!(s, "seed {}", self.training_seed).unwrap();
        for (k, tree) in self.trees.iter().enumerate() {
            writeln!(s, "tree {k} {}", tree.nodes.len()).unwrap();
            for node in &tree.nodes {
                match node {
                    Node::Leaf { value } => writeln!(s, "L {value}").unwrap(),
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(s, "S {feature} {threshold} {left} {right}").unwrap(),
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        let bad = |line: usize, msg: &str| Error::Model(format!("line {line}: {msg}"));
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::Model(format!("missing {what}")));
        let (n, magic) = next("header")?;
        let mut head = magic.split(' ');
        if head.next() != Some(MODEL_MAGIC) {
            return Err(bad(n, "not a forest model"));
        }
        let version: u32 = head.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad(n, "bad version"))?;
        if version != MODEL_VERSION {
            return Err(bad(n, &format!("unsupported version {version}")));
        }
        let mut field = |key: &str| -> Result<u64> {
            let (n, line) = next(key)?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(n, &format!("expected `{key} <n>`")))
        };
        let n_trees = field("n_trees")? as usize;
        let max_depth = field("max_depth")? as usize;
        let feature_subsample = field("feature_subsample")? as usize;
        let seed = field("seed")?;
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let (n, line) = next("tree")?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 3 || parts[0] != "tree" || parts[1].parse::<usize>().ok() != Some(t) {
                return Err(bad(n, "expected `tree <index> <nodes>`"));
            }
            let count: usize = parts[2].parse().map_err(|_| bad(n, "bad node count"))?;
            let mut nodes = Vec::with_capacity(count);
            for _ in 0..count {
                let (n, line) = next("node")?;
                let p: Vec<&str> = line.split(' ').collect();
                let node = match p.as_slice() {
                    ["L", v] => Node::Leaf {
                        value: v.parse().map_err(|_| bad(n, "bad leaf value"))?,
                    },
                    ["S", f, thr, l, r] => Node::Split {
                        feature: f.parse().map_err(|_| bad(n, "bad feature"))?,
                        threshold: thr.parse().map_err(|_| bad(n, "bad threshold"))?,
                        left: l.parse().map_err(|_| bad(n, "bad child"))?,
                        right: r.parse().map_err(|_| bad(n, "bad child"))?,
                    },
                    _ => return Err(bad(n, "bad node")),
                };
                nodes.push(node);
            }
            trees.push(Tree { nodes });
        }
        if let Some((n, l)) = lines.next() {
            if !l.trim().is_empty() {
                return Err(bad(n, "trailing data"));
            }
        }
        let model = ForestModel {
            trees,
            params: ForestParams {
                n_trees,
                max_depth,
                feature_subsample,
            },
            training_seed: seed,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(first: f64) -> FeatureVector {
        let mut v = [0.5; N_FEATURES];
        v[0] = first;
        FeatureVector(v)
    }

    #[test]
    fn constant_leaf_models() {
        let one = ForestModel::<f64> {
            trees: vec![Tree::leaf(1.0); 3],
            params: ForestParams::default(),
            training_seed: 0,
        };
        assert_eq!(one.score(&fv(0.3)), 1.0);
        let half = ForestModel::<f64> {
            trees: vec![Tree::leaf(1.0), Tree::leaf(0.0)],
            params: ForestParams::default(),
            training_seed: 0,
        };
        assert_eq!(half.score(&fv(0.3)), 0.5);
    }

    #[test]
    fn single_pair_separated() {
        let m: ForestModel<f64> = train_forest(&[fv(1.0)], &[fv(0.0)], ForestParams { n_trees: 16, max_depth: 3, feature_subsample: 12 }, 1).unwrap();
        // A bootstrap may miss one class, so check the average direction.
        assert!(m.score(&fv(1.0)) > 0.5);
        assert!(m.score(&fv(0.0)) < 0.5);
    }

    #[test]
    fn bad_inputs() {
        let p = ForestParams::default();
        assert!(train_forest::<f64>(&[], &[fv(0.0)], p, 0).is_err());
        assert!(train_forest::<f64>(&[fv(1.0)], &[fv(0.0)], ForestParams { n_trees: 0, ..p }, 0).is_err());
        assert!(ForestModel::<f64>::from_text("nonsense").is_err());
        let bad_leaf = "bitext-forest 1\nn_trees 1\nmax_depth 1\nfeature_subsample 1\nseed 0\ntree 0 1\nL 1.5\n";
        assert!(ForestModel::<f64>::from_text(bad_leaf).is_err());
        let bad_feature = "bitext-forest 1\nn_trees 1\nmax_depth 1\nfeature_subsample 1\nseed 0\ntree 0 3\nS 12 0.5 1 2\nL 0\nL 1\n";
        assert!(ForestModel::<f64>::from_text(bad_feature).is_err());
    }
}
