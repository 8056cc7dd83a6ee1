//! Bijective representatives of coarse equivalences on finite windows.
//!
//! `ℤ` is partitioned into the blocks
//! `B_n = (n + S_g) ∖ ⋃_{i<n} (i + S_g)` for `n >= 0`. Each block lies in a
//! single translate of `S_g`, so its `d_g`-diameter is at most 2. A map `f` is
//! made injective by sending each point into the block of `f(x)`, and two such
//! injections in opposite directions are merged into a bijection by the
//! Cantor–Schröder–Bernstein chain decomposition.
//!
//! On a finite window the blocks are finite, so every step that needs room in a
//! block can fail with [`Error::WindowTooSmall`].

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadic_core::{word_length_i64, Base};
use crate::window::Window;

/// Smallest `n >= 0` with `x ∈ n + S_g`.
pub fn block_index(base: Base, x: i64) -> i64 {
    let g = base.get() as i128;
    let x = x as i128;
    let mut best = i128::MAX;
    let mut s: i128 = 1;
    loop {
        if x - s >= 0 {
            best = best.min(x - s);
        }
        if x + s >= 0 {
            best = best.min(x + s);
        }
        if s > x.abs() + 1 {
            break;
        }
        s *= g;
    }
    best as i64
}

fn is_generator(base: Base, d: i64) -> bool {
    let g = base.get() as i128;
    let d = (d as i128).abs();
    let mut s = 1i128;
    while s < d {
        s *= g;
    }
    s == d
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionCover {
    pub base: Base,
    pub window: Window,
    /// `n ↦ B_n ∩ window`, ascending, nonempty blocks only.
    pub blocks: BTreeMap<i64, Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionAudit {
    pub disjoint: bool,
    pub covers: bool,
    /// Every element `x` of `B_n` satisfies `x - n ∈ S_g`.
    pub translates_ok: bool,
    pub max_block_diameter: u64,
    pub blocks: usize,
}

impl PartitionAudit {
    pub fn is_exact_cover(&self) -> bool {
        self.disjoint && self.covers && self.translates_ok && self.max_block_diameter <= 2
    }
}

impl PartitionCover {
    pub fn block(&self, n: i64) -> &[i64] {
        self.blocks.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Rechecks the partition from the stored blocks.
    pub fn audit(&self) -> PartitionAudit {
        let mut seen = BTreeSet::new();
        let mut disjoint = true;
        let mut translates_ok = true;
        let mut max_diam = 0;
        for (&n, block) in &self.blocks {
            for &x in block {
                disjoint &= seen.insert(x);
                translates_ok &= is_generator(self.base, x - n);
            }
            for (i, &x) in block.iter().enumerate() {
                for &y in &block[i + 1..] {
                    max_diam = max_diam.max(word_length_i64(self.base, x - y));
                }
            }
        }
        let covers = seen.len() == self.window.len() && seen.iter().copied().eq(self.window.iter());
        PartitionAudit {
            disjoint,
            covers,
            translates_ok,
            max_block_diameter: max_diam,
            blocks: self.blocks.len(),
        }
    }
}

/// `B_n ∩ window` for every `n` that meets the window.
pub fn build_partition(base: Base, window: Window) -> PartitionCover {
    let mut blocks: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for x in window.iter() {
        blocks.entry(block_index(base, x)).or_default().push(x);
    }
    PartitionCover { base, window, blocks }
}

/// A map known on a window, with an optional declared closeness bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteCoarseMap {
    pub window: Window,
    pub table: Vec<i64>,
    pub declared_bound: Option<u64>,
}

impl FiniteCoarseMap {
    pub fn from_fn(window: Window, f: impl Fn(i64) -> i64) -> Self {
        FiniteCoarseMap { window, table: window.iter().map(f).collect(), declared_bound: None }
    }

    pub fn get(&self, x: i64) -> Option<i64> {
        self.window.contains(x).then(|| self.table[(x - self.window.lo) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.window.iter().zip(self.table.iter().copied())
    }
}

/// A finite injective table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InjectiveTable {
    map: BTreeMap<i64, i64>,
}

impl InjectiveTable {
    pub fn new(map: BTreeMap<i64, i64>) -> Result<Self> {
        let mut inverse: BTreeMap<i64, i64> = BTreeMap::new();
        for (&a, &b) in &map {
            if let Some(&other) = inverse.get(&b) {
                return Err(Error::NotInjective { a: other, b: a, image: b });
            }
            inverse.insert(b, a);
        }
        Ok(InjectiveTable { map })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, i64)>) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }

    pub fn get(&self, x: i64) -> Option<i64> {
        self.map.get(&x).copied()
    }

    pub fn map(&self) -> &BTreeMap<i64, i64> {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn inverse(&self) -> BTreeMap<i64, i64> {
        self.map.iter().map(|(&a, &b)| (b, a)).collect()
    }
}

/// Sends every `x` into `B_n ∩ cover.window` where `B_n` is the block of
/// `f(x)`. Blocks are filled in ascending index; inside a block, points in
/// ascending order first keep `f(x)` when it is still free, and the rest take
/// the smallest free elements.
pub fn greedy_injection(f: &FiniteCoarseMap, cover: &PartitionCover) -> Result<InjectiveTable> {
    let mut by_block: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for (x, fx) in f.iter() {
        by_block.entry(block_index(cover.base, fx)).or_default().push((x, fx));
    }
    let mut out = BTreeMap::new();
    for (n, points) in by_block {
        let room = cover.block(n);
        if room.len() < points.len() {
            return Err(Error::WindowTooSmall { block: n, needed: points.len(), available: room.len() });
        }
        let mut free: BTreeSet<i64> = room.iter().copied().collect();
        let mut pending = Vec::new();
        for (x, fx) in points {
            if free.remove(&fx) {
                out.insert(x, fx);
            } else {
                pending.push(x);
            }
        }
        for x in pending {
            let y = free.pop_first().expect("room checked above");
            out.insert(x, y);
        }
    }
    InjectiveTable::new(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CsbResult {
    pub bijection: BTreeMap<i64, i64>,
    /// Points whose image is neither `g_fwd(x)` nor `g_bwd⁻¹(x)`: chain ends
    /// cut off by the finite window, paired in ascending order.
    pub fallback: Vec<i64>,
    pub chains: usize,
    pub cycles: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    A,
    B,
}

/// Bijection `A → B` from injections `fwd: A → ℤ` and `bwd: B → ℤ`, where `A`
/// and `B` are the domains of the tables.
///
/// Edges `a → fwd(a)` (when `fwd(a) ∈ B`) and `b → bwd(b)` (when
/// `bwd(b) ∈ A`) split `A ⊔ B` into paths and cycles. Paths starting in `A`
/// use `fwd`, paths starting in `B` use `bwd⁻¹`, cycles use `fwd`.
pub fn csb_bijection(fwd: &InjectiveTable, bwd: &InjectiveTable) -> Result<CsbResult> {
    if fwd.len() != bwd.len() {
        return Err(Error::SizeMismatch { left: fwd.len(), right: bwd.len() });
    }
    let in_a = |x: i64| fwd.map.contains_key(&x);
    let in_b = |y: i64| bwd.map.contains_key(&y);
    let next = |(side, v): (Side, i64)| -> Option<(Side, i64)> {
        match side {
            Side::A => fwd.get(v).filter(|&y| in_b(y)).map(|y| (Side::B, y)),
            Side::B => bwd.get(v).filter(|&x| in_a(x)).map(|x| (Side::A, x)),
        }
    };
    let fwd_inv = fwd.inverse();
    let bwd_inv = bwd.inverse();
    let has_parent = |(side, v): (Side, i64)| match side {
        Side::A => bwd_inv.get(&v).is_some_and(|&y| in_b(y)),
        Side::B => fwd_inv.get(&v).is_some_and(|&x| in_a(x)),
    };

    let mut h: BTreeMap<i64, i64> = BTreeMap::new();
    let mut visited: BTreeSet<(Side, i64)> = BTreeSet::new();
    let mut unmatched_a = Vec::new();
    let mut unmatched_b = Vec::new();
    let mut chains = 0;
    let mut cycles = 0;

    let starts = fwd
        .map
        .keys()
        .map(|&a| (Side::A, a))
        .chain(bwd.map.keys().map(|&b| (Side::B, b)))
        .filter(|&v| !has_parent(v))
        .collect::<Vec<_>>();
    for start in starts {
        chains += 1;
        let mut path = vec![start];
        visited.insert(start);
        let mut cur = start;
        while let Some(v) = next(cur) {
            visited.insert(v);
            path.push(v);
            cur = v;
        }
        for pair in path.chunks(2) {
            match pair {
                [(Side::A, a), (Side::B, b)] => {
                    h.insert(*a, *b);
                }
                [(Side::B, b), (Side::A, a)] => {
                    h.insert(*a, *b);
                }
                [(Side::A, a)] => unmatched_a.push(*a),
                [(Side::B, b)] => unmatched_b.push(*b),
                _ => unreachable!("paths alternate sides"),
            }
        }
    }
    for &a in fwd.map.keys() {
        if visited.contains(&(Side::A, a)) {
            continue;
        }
        cycles += 1;
        let mut cur = (Side::A, a);
        while visited.insert(cur) {
            let nxt = next(cur).expect("vertices off every path lie on cycles");
            if let ((Side::A, x), (Side::B, y)) = (cur, nxt) {
                h.insert(x, y);
            }
            cur = nxt;
        }
    }

    unmatched_a.sort_unstable();
    unmatched_b.sort_unstable();
    debug_assert_eq!(unmatched_a.len(), unmatched_b.len());
    for (&a, &b) in unmatched_a.iter().zip(&unmatched_b) {
        h.insert(a, b);
    }

    let images: BTreeSet<i64> = h.values().copied().collect();
    if h.len() != fwd.len() || images.len() != h.len() || !images.iter().all(|&y| in_b(y)) {
        return Err(Error::InvalidArgument("chain decomposition did not yield a bijection".into()));
    }
    Ok(CsbResult { bijection: h, fallback: unmatched_a, chains, cycles })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub max_displacement: u64,
    pub worst_point: Option<i64>,
    pub points: usize,
    pub within_declared: Option<bool>,
}

/// `max_x d_g(h(x), f(x))` over the window of `f`.
pub fn closeness_audit(h: &BTreeMap<i64, i64>, f: &FiniteCoarseMap, target: Base) -> Result<AuditReport> {
    let mut worst: Option<(u64, i64)> = None;
    for (x, fx) in f.iter() {
        let hx = *h.get(&x).ok_or(Error::OutOfWindow { value: x, lo: f.window.lo, hi: f.window.hi })?;
        let d = word_length_i64(target, hx - fx);
        if worst.is_none_or(|(w, _)| d > w) {
            worst = Some((d, x));
        }
    }
    let max_displacement = worst.map_or(0, |(d, _)| d);
    Ok(AuditReport {
        max_displacement,
        worst_point: worst.map(|(_, x)| x),
        points: f.window.len(),
        within_declared: f.declared_bound.map(|b| max_displacement <= b),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RectifyReport {
    pub base: Base,
    /// Windows the two greedy injections were allowed to land in.
    pub forward_window: Window,
    pub backward_window: Window,
    pub forward: InjectiveTable,
    pub backward: InjectiveTable,
    pub csb: CsbResult,
    pub audit: AuditReport,
}

/// How many times a working window may be doubled before giving up.
pub const MAX_ENLARGEMENTS: u32 = 8;

fn hull(w: Window, values: &[i64]) -> Window {
    let lo = values.iter().copied().min().map_or(w.lo, |v| v.min(w.lo));
    let hi = values.iter().copied().max().map_or(w.hi, |v| v.max(w.hi));
    Window { lo, hi }
}

fn widen(w: Window) -> Window {
    let pad = (w.len() as i64).max(1);
    Window { lo: w.lo.saturating_sub(pad), hi: w.hi.saturating_add(pad) }
}

/// Greedy injection of `f` into blocks cut from the hull of `target` and the
/// image of `f`, doubling that window on [`Error::WindowTooSmall`].
pub fn greedy_with_enlargement(
    base: Base,
    f: &FiniteCoarseMap,
    target: Window,
) -> Result<(Window, InjectiveTable)> {
    let mut window = hull(target, &f.table);
    let mut attempt = 0;
    loop {
        match greedy_injection(f, &build_partition(base, window)) {
            Err(Error::WindowTooSmall { .. }) if attempt < MAX_ENLARGEMENTS => {
                window = widen(window);
                attempt += 1;
            }
            other => return other.map(|t| (window, t)),
        }
    }
}

/// Greedy injections for `f: A → B` and its coarse inverse `inverse: B → A`,
/// merged into a bijection `A → B` and audited against `f`. `A` and `B` are
/// the windows of the two maps.
pub fn rectify(base: Base, f: &FiniteCoarseMap, inverse: &FiniteCoarseMap) -> Result<RectifyReport> {
    let (forward_window, forward) = greedy_with_enlargement(base, f, inverse.window)?;
    let (backward_window, backward) = greedy_with_enlargement(base, inverse, f.window)?;
    let csb = csb_bijection(&forward, &backward)?;
    let audit = closeness_audit(&csb.bijection, f, base)?;
    Ok(RectifyReport { base, forward_window, backward_window, forward, backward, csb, audit })
}
