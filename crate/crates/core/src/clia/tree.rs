use num_bigint::BigInt;
use num_traits::Signed;

use super::linexpr::LinExpr;
use super::term::{Cond, Term};
use super::CliaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeKind {
    IntValued,
    BoolValued,
}

/// Value produced by a tree or by a solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeValue {
    Int(BigInt),
    Bool(bool),
}

/// Either an integer term or a condition, depending on the tree kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Body {
    Int(Term),
    Bool(Cond),
}

impl Body {
    pub fn eval(&self, vals: &[BigInt]) -> Result<TreeValue, CliaError> {
        Ok(match self {
            Body::Int(t) => TreeValue::Int(t.eval(vals)?),
            Body::Bool(c) => TreeValue::Bool(c.eval(vals)?),
        })
    }

    pub fn size(&self) -> usize {
        match self {
            Body::Int(t) => t.size(),
            Body::Bool(c) => c.size(),
        }
    }
}

/// Full binary decision tree in heap layout: node `i` has children
/// `2i + 1` (guard holds) and `2i + 2` (guard fails). Internal nodes test
/// `c·x + d ≥ 0`; leaves yield `c·x + d` or `c·x + d ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecisionTree {
    height: usize,
    nodes: Vec<LinExpr>,
    kind: TreeKind,
}

/// Number of nodes in a full tree of the given height.
pub fn node_count(height: usize) -> usize {
    (1usize << height) - 1
}

/// Nested view used to build (possibly non-full) trees before padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeShape {
    Leaf(LinExpr),
    Node(LinExpr, Box<TreeShape>, Box<TreeShape>),
}

impl TreeShape {
    pub fn depth(&self) -> usize {
        match self {
            TreeShape::Leaf(_) => 1,
            TreeShape::Node(_, t, f) => 1 + t.depth().max(f.depth()),
        }
    }
}

impl DecisionTree {
    pub fn new(height: usize, nodes: Vec<LinExpr>, kind: TreeKind) -> Result<Self, CliaError> {
        if height == 0 || height >= usize::BITS as usize {
            return Err(CliaError::InvalidTree(format!("height {height} out of range")));
        }
        if nodes.len() != node_count(height) {
            return Err(CliaError::InvalidTree(format!(
                "height {height} needs {} nodes, got {}",
                node_count(height),
                nodes.len()
            )));
        }
        Ok(DecisionTree { height, nodes, kind })
    }

    /// The all-zero tree: every guard `0 ≥ 0` holds, every leaf is 0
    /// (or `0 ≥ 0`, i.e. true, for boolean trees).
    pub fn zero(height: usize, kind: TreeKind) -> Self {
        DecisionTree { height, nodes: vec![LinExpr::zero(); node_count(height)], kind }
    }

    /// Builds a full tree, padding shallow leaves with `1 ≥ 0` guards whose
    /// true child carries the payload and whose false child is a zero leaf.
    pub fn from_shape(shape: &TreeShape, kind: TreeKind) -> Self {
        let height = shape.depth();
        let mut nodes = vec![LinExpr::zero(); node_count(height)];
        fn fill(shape: &TreeShape, idx: usize, nodes: &mut [LinExpr]) {
            let is_leaf_slot = 2 * idx + 1 >= nodes.len();
            match shape {
                TreeShape::Node(g, t, f) => {
                    nodes[idx] = g.clone();
                    fill(t, 2 * idx + 1, nodes);
                    fill(f, 2 * idx + 2, nodes);
                }
                TreeShape::Leaf(e) if is_leaf_slot => nodes[idx] = e.clone(),
                TreeShape::Leaf(_) => {
                    nodes[idx] = LinExpr::constant(1);
                    fill(shape, 2 * idx + 1, nodes);
                }
            }
        }
        fill(shape, 0, &mut nodes);
        DecisionTree { height, nodes, kind }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn nodes(&self) -> &[LinExpr] {
        &self.nodes
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        2 * i + 1 >= self.nodes.len()
    }

    pub fn children(&self, i: usize) -> Option<(usize, usize)> {
        (!self.is_leaf(i)).then_some((2 * i + 1, 2 * i + 2))
    }

    pub fn eval(&self, vals: &[BigInt]) -> TreeValue {
        let mut i = 0;
        loop {
            let v = self.nodes[i].eval(vals);
            match self.children(i) {
                Some((t, f)) => i = if v.is_negative() { f } else { t },
                None => {
                    return match self.kind {
                        TreeKind::IntValued => TreeValue::Int(v),
                        TreeKind::BoolValued => TreeValue::Bool(!v.is_negative()),
                    }
                }
            }
        }
    }

    /// Nested ite rendering; constant guards are resolved and identical
    /// branches merged.
    pub fn to_body(&self) -> Body {
        match self.kind {
            TreeKind::IntValued => Body::Int(self.int_term(0)),
            TreeKind::BoolValued => Body::Bool(self.bool_cond(0)),
        }
    }

    fn const_guard(&self, i: usize) -> Option<bool> {
        let g = &self.nodes[i];
        g.is_constant().then(|| !g.offset().is_negative())
    }

    fn guard(&self, i: usize) -> Cond {
        super::formula::pretty_geq(&self.nodes[i])
    }

    fn int_term(&self, i: usize) -> Term {
        let Some((t, f)) = self.children(i) else {
            return self.nodes[i].to_term();
        };
        match self.const_guard(i) {
            Some(true) => self.int_term(t),
            Some(false) => self.int_term(f),
            None => {
                let (a, b) = (self.int_term(t), self.int_term(f));
                if a == b {
                    a
                } else {
                    Term::ite(self.guard(i), a, b)
                }
            }
        }
    }

    fn bool_cond(&self, i: usize) -> Cond {
        let Some((t, f)) = self.children(i) else {
            let leaf = &self.nodes[i];
            if leaf.is_constant() {
                return if leaf.offset().is_negative() { Cond::False } else { Cond::True };
            }
            return self.guard(i);
        };
        match self.const_guard(i) {
            Some(true) => self.bool_cond(t),
            Some(false) => self.bool_cond(f),
            None => {
                let (a, b) = (self.bool_cond(t), self.bool_cond(f));
                if a == b {
                    a
                } else {
                    Cond::ite(self.guard(i), a, b)
                }
            }
        }
    }
}
