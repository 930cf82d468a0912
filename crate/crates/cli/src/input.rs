//! Reading command-line values that may be literals or file paths.

use std::fmt::Display;
use std::path::Path;

use gwfo::classes::{parse_class, GammaClass};
use gwfo::logic::{parse_formula, Dialect, Formula};
use gwfo::sampler::Seed;
use gwfo::tree::{parse_ball, parse_tree, Ball, RootedTree};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
}

impl Failure {
    pub fn usage(e: impl Display) -> Failure {
        Failure::Usage(e.to_string())
    }
}

/// The contents of `arg` if it names a readable file, else `arg` itself.
pub fn read_text(arg: &str) -> Result<String, Failure> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

pub fn read_tree(arg: &str) -> Result<RootedTree, Failure> {
    parse_tree(&read_text(arg)?).map_err(|e| Failure::Usage(format!("tree: {e}")))
}

pub fn read_class(arg: &str, k: Option<u32>, depth: Option<u32>) -> Result<GammaClass, Failure> {
    parse_class(&read_text(arg)?, k, depth).map_err(|e| Failure::Usage(format!("class: {e}")))
}

pub fn read_formula(arg: &str, dialect: Dialect) -> Result<Formula, Failure> {
    parse_formula(read_text(arg)?.trim(), dialect)
        .map_err(|e| Failure::Usage(format!("formula: {e}")))
}

/// Every regular file in `dir`, in file-name order, parsed as a ball.
pub fn read_ball_dir(dir: &Path) -> Result<Vec<Ball>, Failure> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e.map_err(Failure::usage)?.path();
        if p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Usage(format!(
            "{} holds no ball files",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            parse_ball(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<Seed, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed
        .map(Seed)
        .map_err(|e| format!("invalid seed `{s}`: {e}"))
}
