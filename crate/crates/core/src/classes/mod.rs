//! Count-capped neighbourhood classes `Γ_i`.
//!
//! A depth-0 class is the unit class `*`. A depth-`i` class records, for each
//! depth-`(i-1)` class `τ`, how many children of the root have `T(v)|_{i-1}`
//! in `τ`, with counts of `k` or more collapsed to `ω`. Zero counts are
//! implicit.

mod text;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{NodeId, RootedTree, TreeBuilder};

pub use text::{parse_class, ClassParseError};

/// Default limit on `|Γ_i|` for [`enumerate_classes`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapCount {
    Exactly(u32),
    /// At least `k`.
    Omega,
}

impl CapCount {
    pub fn capped(n: usize, k: u32) -> CapCount {
        if n >= k as usize {
            CapCount::Omega
        } else {
            CapCount::Exactly(n as u32)
        }
    }

    /// All values `0, 1, …, k-1, ω`.
    pub fn all(k: u32) -> impl Iterator<Item = CapCount> {
        (0..k)
            .map(CapCount::Exactly)
            .chain(std::iter::once(CapCount::Omega))
    }

    pub fn is_zero(self) -> bool {
        self == CapCount::Exactly(0)
    }

    /// Smallest concrete count realizing this value.
    pub fn realize(self, k: u32) -> u32 {
        match self {
            CapCount::Exactly(n) => n,
            CapCount::Omega => k,
        }
    }
}

impl fmt::Display for CapCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapCount::Exactly(n) => write!(f, "{n}"),
            CapCount::Omega => f.write_str("w"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("cap parameter k must be at least 1")]
    ZeroCap,
    #[error("|Γ_{depth}| = {size} exceeds the enumeration cap {cap}")]
    TooManyClasses { depth: u32, size: String, cap: u64 },
    #[error("classes mix parameters: (k={0}, depth={1}) vs (k={2}, depth={3})")]
    MixedParameters(u32, u32, u32, u32),
    #[error("support key has depth {found}, expected {expected}")]
    KeyDepth { expected: u32, found: u32 },
    #[error("count {count} must be below k={k}; use ω")]
    CountTooLarge { count: u32, k: u32 },
    #[error("duplicate support key {0}")]
    DuplicateKey(String),
    #[error("depth-0 classes have no support")]
    SupportAtDepthZero,
    #[error("an event built from no classes has no (k, depth)")]
    EmptyEvent,
}

struct Inner {
    k: u32,
    depth: u32,
    support: Vec<(GammaClass, CapCount)>,
    canonical: String,
}

/// An element of `Γ_depth` for cap `k`. Cheap to clone.
#[derive(Clone)]
pub struct GammaClass(Arc<Inner>);

impl GammaClass {
    /// The depth-0 class.
    pub fn unit(k: u32) -> GammaClass {
        GammaClass(Arc::new(Inner {
            k,
            depth: 0,
            support: Vec::new(),
            canonical: "*".into(),
        }))
    }

    /// Builds a class from its nonzero entries; zero counts are dropped.
    pub fn new(
        k: u32,
        depth: u32,
        entries: impl IntoIterator<Item = (GammaClass, CapCount)>,
    ) -> Result<GammaClass, ClassError> {
        if k == 0 {
            return Err(ClassError::ZeroCap);
        }
        let mut support: Vec<(GammaClass, CapCount)> = Vec::new();
        for (key, count) in entries {
            if depth == 0 {
                return Err(ClassError::SupportAtDepthZero);
            }
            if key.k() != k || key.depth() + 1 != depth {
                return Err(ClassError::KeyDepth {
                    expected: depth - 1,
                    found: key.depth(),
                });
            }
            if let CapCount::Exactly(n) = count {
                if n >= k {
                    return Err(ClassError::CountTooLarge { count: n, k });
                }
            }
            if !count.is_zero() {
                support.push((key, count));
            }
        }
        if depth == 0 {
            return Ok(GammaClass::unit(k));
        }
        support.sort_by(|a, b| a.0.canonical().cmp(b.0.canonical()));
        if let Some(w) = support.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ClassError::DuplicateKey(w[0].0.canonical().to_string()));
        }
        Ok(Self::from_sorted(k, depth, support))
    }

    fn from_sorted(k: u32, depth: u32, support: Vec<(GammaClass, CapCount)>) -> GammaClass {
        if depth == 0 {
            return GammaClass::unit(k);
        }
        let mut canonical = String::from("{");
        for (i, (key, count)) in support.iter().enumerate() {
            if i > 0 {
                canonical.push(',');
            }
            canonical.push_str(&format!("{count}:{}", key.canonical()));
        }
        canonical.push('}');
        GammaClass(Arc::new(Inner {
            k,
            depth,
            support,
            canonical,
        }))
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    /// Nonzero entries, sorted by the key's canonical string.
    pub fn support(&self) -> &[(GammaClass, CapCount)] {
        &self.0.support
    }

    /// Count for `key`, zero when absent.
    pub fn count(&self, key: &GammaClass) -> CapCount {
        self.support()
            .iter()
            .find(|(c, _)| c == key)
            .map_or(CapCount::Exactly(0), |(_, n)| *n)
    }

    pub fn canonical(&self) -> &str {
        &self.0.canonical
    }

    /// Header line plus canonical string.
    pub fn to_text(&self) -> String {
        format!(
            "k={} depth={}\n{}",
            self.k(),
            self.depth(),
            self.canonical()
        )
    }
}

impl PartialEq for GammaClass {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.k() == other.k()
                && self.depth() == other.depth()
                && self.canonical() == other.canonical())
    }
}

impl Eq for GammaClass {}

impl Hash for GammaClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.k().hash(state);
        self.depth().hash(state);
        self.canonical().hash(state);
    }
}

impl Ord for GammaClass {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.k(), self.depth(), self.canonical()).cmp(&(
            other.k(),
            other.depth(),
            other.canonical(),
        ))
    }
}

impl PartialOrd for GammaClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for GammaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GammaClass(k={}, depth={}, {})",
            self.k(),
            self.depth(),
            self.canonical()
        )
    }
}

impl fmt::Display for GammaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical())
    }
}

/// The `Γ_i` class of `T|_i` for cap `k`.
///
/// # Panics
///
/// If `k == 0`.
pub fn classify(t: &RootedTree, k: u32, i: u32) -> GammaClass {
    assert!(k >= 1, "cap parameter k must be at least 1");
    // class of every node at depth d <= i, of depth i - d, computed bottom-up
    let mut class: Vec<Option<GammaClass>> = vec![None; t.len()];
    let unit = GammaClass::unit(k);
    for v in t.bfs_order().into_iter().rev() {
        let d = t.depth(v);
        if d > i {
            continue;
        }
        if d == i {
            class[v.index()] = Some(unit.clone());
            continue;
        }
        let mut counts: BTreeMap<&str, (GammaClass, usize)> = BTreeMap::new();
        for c in t.children(v) {
            let cc = class[c.index()].as_ref().expect("child classified first");
            counts
                .entry(cc.canonical())
                .or_insert_with(|| (cc.clone(), 0))
                .1 += 1;
        }
        let support = counts
            .into_values()
            .map(|(c, n)| (c, CapCount::capped(n, k)))
            .collect();
        // BTreeMap keyed by canonical string already yields sorted order
        class[v.index()] = Some(GammaClass::from_sorted(k, i - d, support));
    }
    class[t.root().index()].take().expect("root classified")
}

/// `|Γ_i|` for cap `k` when it fits in `cap`, else the error names it.
pub fn class_count(k: u32, i: u32, cap: u64) -> Result<u64, ClassError> {
    if k == 0 {
        return Err(ClassError::ZeroCap);
    }
    let base = u64::from(k) + 1;
    let mut size = 1u64;
    for depth in 1..=i {
        let next = u32::try_from(size)
            .ok()
            .and_then(|e| base.checked_pow(e))
            .filter(|n| *n <= cap);
        match next {
            Some(n) => size = n,
            None => {
                return Err(ClassError::TooManyClasses {
                    depth,
                    size: format!("{base}^{size}"),
                    cap,
                })
            }
        }
    }
    Ok(size)
}

/// All of `Γ_i` in canonical order.
pub fn enumerate_classes(k: u32, i: u32, cap: u64) -> Result<Vec<GammaClass>, ClassError> {
    class_count(k, i, cap)?;
    let mut level = vec![GammaClass::unit(k)];
    for depth in 1..=i {
        let values: Vec<CapCount> = CapCount::all(k).collect();
        let mut next = Vec::new();
        // odometer over functions level -> values
        let mut digits = vec![0usize; level.len()];
        loop {
            let entries = level
                .iter()
                .zip(&digits)
                .map(|(key, &d)| (key.clone(), values[d]));
            next.push(GammaClass::new(k, depth, entries).expect("well-formed"));
            let mut pos = 0;
            while pos < digits.len() && digits[pos] + 1 == values.len() {
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
            digits[pos] += 1;
        }
        next.sort();
        level = next;
    }
    Ok(level)
}

/// Smallest tree in the class: numeric counts realized exactly and `ω`
/// realized as `k` copies.
pub fn representative(c: &GammaClass) -> RootedTree {
    representative_with(c, c.k())
}

/// Like [`representative`] but realizing `ω` as `omega` copies (`omega >= k`).
pub fn representative_with(c: &GammaClass, omega: u32) -> RootedTree {
    assert!(omega >= c.k(), "ω needs at least k copies");
    let mut b = TreeBuilder::new();
    let root = b.root();
    grow(&mut b, root, c, omega);
    b.build()
}

fn grow(b: &mut TreeBuilder, at: NodeId, c: &GammaClass, omega: u32) {
    for (key, count) in c.support() {
        let copies = match count {
            CapCount::Exactly(n) => *n,
            CapCount::Omega => omega,
        };
        for _ in 0..copies {
            let child = b.add_child(at);
            grow(b, child, key, omega);
        }
    }
}

/// A union of classes sharing `(k, depth)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEvent {
    k: u32,
    depth: u32,
    classes: BTreeSet<GammaClass>,
}

impl ClassEvent {
    /// The empty event for `(k, depth)`.
    pub fn empty(k: u32, depth: u32) -> ClassEvent {
        ClassEvent {
            k,
            depth,
            classes: BTreeSet::new(),
        }
    }

    /// Rejects sets mixing `(k, depth)`. An empty iterator is an error since
    /// its parameters are unknown; use [`ClassEvent::empty`] instead.
    pub fn new(classes: impl IntoIterator<Item = GammaClass>) -> Result<ClassEvent, ClassError> {
        let mut it = classes.into_iter().peekable();
        let first = it.peek().cloned().ok_or(ClassError::EmptyEvent)?;
        let mut ev = ClassEvent::empty(first.k(), first.depth());
        for c in it {
            ev.insert(c)?;
        }
        Ok(ev)
    }

    pub fn insert(&mut self, c: GammaClass) -> Result<bool, ClassError> {
        if c.k() != self.k || c.depth() != self.depth {
            return Err(ClassError::MixedParameters(
                self.k,
                self.depth,
                c.k(),
                c.depth(),
            ));
        }
        Ok(self.classes.insert(c))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains(&self, c: &GammaClass) -> bool {
        self.classes.contains(c)
    }

    /// Members in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &GammaClass> {
        self.classes.iter()
    }
}

/// Shorthand for [`ClassEvent::new`].
pub fn class_event(
    classes: impl IntoIterator<Item = GammaClass>,
) -> Result<ClassEvent, ClassError> {
    ClassEvent::new(classes)
}
