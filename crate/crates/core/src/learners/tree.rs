//! Binary tree structure shared by CART and boosting.

use serde::{Deserialize, Serialize};

/// Tree node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        samples: usize,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        /// Class-1 frequency for classification trees, additive score for
        /// boosted trees.
        value: f64,
        samples: usize,
    },
}

impl Node {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn samples(&self) -> usize {
        match self {
            Node::Split { samples, .. } | Node::Leaf { samples, .. } => *samples,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Pre-order visit.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        if let Node::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }
}

/// Flat node storage used while growing; converted to [`Node`] at the end.
#[derive(Debug, Default)]
pub(crate) struct Arena {
    nodes: Vec<ArenaNode>,
}

#[derive(Debug)]
enum ArenaNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        samples: usize,
        left: usize,
        right: usize,
    },
}

impl Arena {
    pub fn push_leaf(&mut self, value: f64, samples: usize) -> usize {
        self.nodes.push(ArenaNode::Leaf { value, samples });
        self.nodes.len() - 1
    }

    pub fn set_leaf_value(&mut self, id: usize, v: f64) {
        if let ArenaNode::Leaf { value, .. } = &mut self.nodes[id] {
            *value = v;
        }
    }

    /// Turns leaf `id` into a split with two fresh leaf children.
    pub fn split(
        &mut self,
        id: usize,
        feature: usize,
        threshold: f64,
        left_samples: usize,
        right_samples: usize,
    ) -> (usize, usize) {
        let samples = match self.nodes[id] {
            ArenaNode::Leaf { samples, .. } => samples,
            ArenaNode::Split { .. } => panic!("node {id} already split"),
        };
        let left = self.push_leaf(0.0, left_samples);
        let right = self.push_leaf(0.0, right_samples);
        self.nodes[id] = ArenaNode::Split {
            feature,
            threshold,
            samples,
            left,
            right,
        };
        (left, right)
    }

    pub fn into_tree(self) -> Node {
        fn build(nodes: &[ArenaNode], id: usize) -> Node {
            match nodes[id] {
                ArenaNode::Leaf { value, samples } => Node::Leaf { value, samples },
                ArenaNode::Split {
                    feature,
                    threshold,
                    samples,
                    left,
                    right,
                } => Node::Split {
                    feature,
                    threshold,
                    samples,
                    left: Box::new(build(nodes, left)),
                    right: Box::new(build(nodes, right)),
                },
            }
        }
        build(&self.nodes, 0)
    }
}
