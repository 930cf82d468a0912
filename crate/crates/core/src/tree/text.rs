//! Balanced-parentheses text format.
//!
//! A node is `(` followed by its children and `)`. Whitespace is ignored.
//! Parsed node ids follow pre-order (the order of opening parentheses).

use thiserror::Error;

use super::{Ball, NodeId, RootedTree, TreeBuilder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeParseError {
    #[error("empty input: expected '('")]
    Empty,
    #[error("unexpected character {found:?} at byte {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("unmatched ')' at byte {offset}")]
    UnmatchedClose { offset: usize },
    #[error("input ended at byte {offset} with {open} unclosed '('")]
    Unclosed { offset: usize, open: usize },
    #[error("trailing content after the tree at byte {offset}")]
    Trailing { offset: usize },
}

pub fn parse_tree(text: &str) -> Result<RootedTree, TreeParseError> {
    let mut builder: Option<TreeBuilder> = None;
    let mut stack: Vec<NodeId> = Vec::new();
    let mut closed = false;
    for (offset, ch) in text.char_indices() {
        if ch.is_whitespace() {
            continue;
        }
        if closed {
            return Err(TreeParseError::Trailing { offset });
        }
        match ch {
            '(' => match (&mut builder, stack.last()) {
                (None, _) => {
                    let b = TreeBuilder::new();
                    stack.push(b.root());
                    builder = Some(b);
                }
                (Some(b), Some(&parent)) => {
                    let id = b.add_child(parent);
                    stack.push(id);
                }
                (Some(_), None) => unreachable!("closed flag covers this"),
            },
            ')' => {
                if stack.pop().is_none() {
                    return Err(TreeParseError::UnmatchedClose { offset });
                }
                if stack.is_empty() {
                    closed = true;
                }
            }
            found => return Err(TreeParseError::UnexpectedChar { found, offset }),
        }
    }
    match builder {
        None => Err(TreeParseError::Empty),
        Some(_) if !stack.is_empty() => Err(TreeParseError::Unclosed {
            offset: text.len(),
            open: stack.len(),
        }),
        Some(b) => Ok(b.build()),
    }
}

/// One tree per non-blank line. Errors report the byte offset within the
/// whole input.
pub fn parse_trees(text: &str) -> Result<Vec<RootedTree>, TreeParseError> {
    let mut out = Vec::new();
    let mut base = 0;
    for line in text.split_inclusive('\n') {
        if !line.trim().is_empty() {
            let t = parse_tree(line).map_err(|e| shift(e, base))?;
            out.push(t);
        }
        base += line.len();
    }
    Ok(out)
}

fn shift(e: TreeParseError, base: usize) -> TreeParseError {
    use TreeParseError::*;
    match e {
        Empty => Empty,
        UnexpectedChar { found, offset } => UnexpectedChar {
            found,
            offset: offset + base,
        },
        UnmatchedClose { offset } => UnmatchedClose {
            offset: offset + base,
        },
        Unclosed { offset, open } => Unclosed {
            offset: offset + base,
            open,
        },
        Trailing { offset } => Trailing {
            offset: offset + base,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallParseError {
    #[error("ball header must read `center=<id> radius=<r>`: {0}")]
    Header(String),
    #[error(transparent)]
    Tree(#[from] TreeParseError),
    #[error("no ball of radius {radius} around node {center} is the whole tree")]
    NotABall { center: usize, radius: u32 },
}

/// A ball file: a header line `center=<id> radius=<r>` followed by the
/// ball's tree. The center id is a pre-order index.
pub fn parse_ball(text: &str) -> Result<Ball, BallParseError> {
    let text = text.trim_start();
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let (mut center, mut radius) = (None, None);
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| BallParseError::Header(format!("`{field}` is not key=value")))?;
        let bad = || BallParseError::Header(format!("bad value in `{field}`"));
        match key {
            "center" => center = Some(value.parse::<usize>().map_err(|_| bad())?),
            "radius" => radius = Some(value.parse::<u32>().map_err(|_| bad())?),
            _ => return Err(BallParseError::Header(format!("unknown key `{key}`"))),
        }
    }
    let (Some(center), Some(radius)) = (center, radius) else {
        return Err(BallParseError::Header(
            "center and radius are required".into(),
        ));
    };
    let t = parse_tree(body)?;
    let id = NodeId::from(center);
    if !t.contains_node(id) {
        return Err(BallParseError::NotABall { center, radius });
    }
    Ball::try_from_parts(t, id, radius).ok_or(BallParseError::NotABall { center, radius })
}

/// Inverse of [`parse_ball`].
pub fn format_ball(b: &Ball) -> String {
    let t = b.tree();
    let pos = t
        .preorder()
        .iter()
        .position(|&v| v == b.center())
        .expect("center is in the ball");
    format!("center={pos} radius={}\n{}\n", b.radius(), t.to_parens())
}

/// Canonical serialization.
pub fn serialize_tree(t: &RootedTree) -> String {
    t.canonical_form()
}
