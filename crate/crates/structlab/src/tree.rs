//! Positional binary parse trees aligned to tokenized sentences.
//!
//! Trees arrive pre-binarized as Penn-Treebank-style s-expressions, one per
//! line, line i aligned to sentence i of the corpus file. Internal node
//! labels (NP, VP, ...) are parsed but discarded: the networks are
//! label-agnostic. Tokens containing literal parentheses must use the PTB
//! escapes `-LRB-`/`-RRB-`.
//!
//! Trees are immutable after construction and safe for shared concurrent
//! reads.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Node payload: a leaf covering one token, or an internal node with exactly
/// two children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf { token: usize },
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub id: usize,
    pub kind: NodeKind,
    pub parent: Option<usize>,
    /// Whether this node is its parent's left child; `None` for the root.
    pub is_left_child: Option<bool>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// A validated positional binary tree over a sentence's tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    nodes: Vec<TreeNode>,
    root: usize,
    /// Leaf node ids in left-to-right token order.
    leaf_order: Vec<usize>,
    /// Token strings, index-aligned with `leaf_order`.
    tokens: Vec<String>,
}

impl ParseTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn leaf_order(&self) -> &[usize] {
        &self.leaf_order
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_order.len()
    }

    /// Node ids with every child before its parent (left, right, node).
    pub fn upward_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
                continue;
            }
            stack.push((id, true));
            if let NodeKind::Internal { left, right } = self.nodes[id].kind {
                stack.push((right, false));
                stack.push((left, false));
            }
        }
        order
    }

    /// Node ids with every parent before its children; the root comes first.
    pub fn downward_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            order.push(id);
            if let NodeKind::Internal { left, right } = self.nodes[id].kind {
                stack.push(right);
                stack.push(left);
            }
        }
        order
    }

    /// Checks that the tree's leaves spell out exactly the sentence's tokens.
    pub fn align(&self, sentence: &Sentence) -> Result<()> {
        if self.leaf_count() != sentence.tokens.len() {
            return Err(Error::Alignment(format!(
                "tree has {} leaves but sentence has {} tokens",
                self.leaf_count(),
                sentence.tokens.len()
            )));
        }
        for (i, (a, b)) in self.tokens.iter().zip(&sentence.tokens).enumerate() {
            if a != b {
                return Err(Error::Alignment(format!(
                    "token mismatch at index {i}: tree has {a:?}, sentence has {b:?}"
                )));
            }
        }
        Ok(())
    }

    /// Renders the tree as a single-line s-expression with placeholder
    /// labels. Parsing the result reproduces the tree shape and tokens.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(self.root, &mut out);
        out
    }

    fn write_sexpr(&self, id: usize, out: &mut String) {
        match self.nodes[id].kind {
            NodeKind::Leaf { token } => {
                let _ = write!(out, "(X {})", self.tokens[token]);
            }
            NodeKind::Internal { left, right } => {
                out.push_str("(X ");
                self.write_sexpr(left, out);
                out.push(' ');
                self.write_sexpr(right, out);
                out.push(')');
            }
        }
    }

    /// Builds a uniformly random binary tree over the given tokens by
    /// repeatedly merging adjacent forest roots, so the in-order leaf
    /// traversal always matches token order.
    pub fn random(tokens: &[String], rng: &mut impl Rng) -> ParseTree {
        assert!(!tokens.is_empty(), "random tree needs at least one token");
        let mut nodes: Vec<TreeNode> = (0..tokens.len())
            .map(|i| TreeNode {
                id: i,
                kind: NodeKind::Leaf { token: i },
                parent: None,
                is_left_child: None,
            })
            .collect();
        let leaf_order: Vec<usize> = (0..tokens.len()).collect();
        let mut roots: Vec<usize> = (0..tokens.len()).collect();
        while roots.len() > 1 {
            let i = rng.gen_range(0..roots.len() - 1);
            let (left, right) = (roots[i], roots[i + 1]);
            let id = nodes.len();
            nodes.push(TreeNode {
                id,
                kind: NodeKind::Internal { left, right },
                parent: None,
                is_left_child: None,
            });
            nodes[left].parent = Some(id);
            nodes[left].is_left_child = Some(true);
            nodes[right].parent = Some(id);
            nodes[right].is_left_child = Some(false);
            roots[i] = id;
            roots.remove(i + 1);
        }
        ParseTree {
            root: roots[0],
            nodes,
            leaf_order,
            tokens: tokens.to_vec(),
        }
    }

    /// Smallest and one-past-largest token index covered by the subtree at `id`.
    pub fn subtree_span(&self, id: usize) -> (usize, usize) {
        match self.nodes[id].kind {
            NodeKind::Leaf { token } => (token, token + 1),
            NodeKind::Internal { left, right } => {
                let (lo, _) = self.subtree_span(left);
                let (_, hi) = self.subtree_span(right);
                (lo, hi)
            }
        }
    }
}

// Intermediate form produced by the tokenizer/reader before arity checking.
enum SExpr {
    Atom {
        text: String,
    },
    List {
        children: Vec<SExpr>,
        start: usize,
        end: usize,
    },
}

/// Parses one Penn-Treebank-style s-expression into a validated binary tree.
///
/// The first element of every list is taken as the (discarded) category
/// label; a list whose single remaining element is a bare token becomes a
/// leaf. Any internal node left with a child count other than two is
/// rejected as non-binary.
pub fn parse_sexpr(text: &str) -> Result<ParseTree> {
    let bytes: Vec<char> = text.chars().collect();
    let mut pos = 0;
    skip_ws(&bytes, &mut pos);
    if pos == bytes.len() {
        return Err(Error::Parse {
            offset: pos,
            message: "empty input".into(),
        });
    }
    if bytes[pos] != '(' {
        return Err(Error::Parse {
            offset: pos,
            message: format!("expected '(' but found {:?}", bytes[pos]),
        });
    }
    let expr = read_list(&bytes, &mut pos)?;
    skip_ws(&bytes, &mut pos);
    if pos != bytes.len() {
        return Err(Error::Parse {
            offset: pos,
            message: "trailing input after tree".into(),
        });
    }

    let mut nodes = Vec::new();
    let mut tokens = Vec::new();
    let root = build_node(text, &expr, &mut nodes, &mut tokens)?;
    nodes[root].parent = None;
    nodes[root].is_left_child = None;
    let leaf_order = nodes.iter().filter(|n| n.is_leaf()).map(|n| n.id).collect();
    Ok(ParseTree {
        nodes,
        root,
        leaf_order,
        tokens,
    })
}

fn skip_ws(bytes: &[char], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn read_list(bytes: &[char], pos: &mut usize) -> Result<SExpr> {
    let start = *pos;
    *pos += 1; // consume '('
    let mut children = Vec::new();
    loop {
        skip_ws(bytes, pos);
        match bytes.get(*pos) {
            None => {
                return Err(Error::Parse {
                    offset: start,
                    message: "unbalanced parentheses: '(' is never closed".into(),
                })
            }
            Some(')') => {
                *pos += 1;
                return Ok(SExpr::List {
                    children,
                    start,
                    end: *pos,
                });
            }
            Some('(') => children.push(read_list(bytes, pos)?),
            Some(_) => {
                let from = *pos;
                while *pos < bytes.len()
                    && !bytes[*pos].is_whitespace()
                    && bytes[*pos] != '('
                    && bytes[*pos] != ')'
                {
                    *pos += 1;
                }
                children.push(SExpr::Atom {
                    text: bytes[from..*pos].iter().collect(),
                });
            }
        }
    }
}

fn build_node(
    src: &str,
    expr: &SExpr,
    nodes: &mut Vec<TreeNode>,
    tokens: &mut Vec<String>,
) -> Result<usize> {
    let (children, start, end) = match expr {
        SExpr::List {
            children,
            start,
            end,
        } => (children, *start, *end),
        SExpr::Atom { .. } => unreachable!("atoms are handled by their parent list"),
    };
    // First child is the category label; it may be absent in bare lists.
    let body: &[SExpr] = match children.first() {
        Some(SExpr::Atom { .. }) => &children[1..],
        _ => children,
    };
    match body {
        [SExpr::Atom { text }] => {
            let id = nodes.len();
            nodes.push(TreeNode {
                id,
                kind: NodeKind::Leaf {
                    token: tokens.len(),
                },
                parent: None,
                is_left_child: None,
            });
            tokens.push(text.clone());
            Ok(id)
        }
        [a, b] => {
            let left = child_node(src, a, nodes, tokens)?;
            let right = child_node(src, b, nodes, tokens)?;
            let id = nodes.len();
            nodes.push(TreeNode {
                id,
                kind: NodeKind::Internal { left, right },
                parent: None,
                is_left_child: None,
            });
            nodes[left].parent = Some(id);
            nodes[left].is_left_child = Some(true);
            nodes[right].parent = Some(id);
            nodes[right].is_left_child = Some(false);
            Ok(id)
        }
        _ => Err(Error::Parse {
            offset: start,
            message: format!(
                "non-binary tree: node spanning {:?} has {} children (expected 2)",
                span_text(src, start, end),
                body.len()
            ),
        }),
    }
}

fn child_node(
    src: &str,
    expr: &SExpr,
    nodes: &mut Vec<TreeNode>,
    tokens: &mut Vec<String>,
) -> Result<usize> {
    match expr {
        // A bare token in child position is a leaf.
        SExpr::Atom { text } => {
            let id = nodes.len();
            nodes.push(TreeNode {
                id,
                kind: NodeKind::Leaf {
                    token: tokens.len(),
                },
                parent: None,
                is_left_child: None,
            });
            tokens.push(text.clone());
            Ok(id)
        }
        SExpr::List { .. } => build_node(src, expr, nodes, tokens),
    }
}

fn span_text(src: &str, start: usize, end: usize) -> String {
    let s: String = src.chars().skip(start).take(end - start).collect();
    if s.len() > 60 {
        format!("{}...", &s[..60])
    } else {
        s
    }
}

/// Reads one tree per line. Blank lines are not allowed: line i must align
/// with sentence i of the corpus file.
pub fn load_trees(path: impl AsRef<Path>) -> Result<Vec<ParseTree>> {
    let text = std::fs::read_to_string(path)?;
    let mut trees = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let tree = parse_sexpr(line).map_err(|e| match e {
            Error::Parse { offset, message } => Error::Data {
                line: lineno + 1,
                message: format!("parse error at offset {offset}: {message}"),
            },
            other => other,
        })?;
        trees.push(tree);
    }
    if trees.is_empty() {
        return Err(Error::data(1, "tree file contains no trees"));
    }
    Ok(trees)
}

pub fn write_trees(path: impl AsRef<Path>, trees: &[ParseTree]) -> Result<()> {
    let mut out = String::new();
    for tree in trees {
        out.push_str(&tree.to_sexpr());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
