//! Block structure over a bandwidth ordering, zero-free and balanced
//! colourings, and the colour-switching surgery used to even out colour
//! classes.
//!
//! Colour 0 is the reserved spare colour: it participates in properness but
//! is excluded from balance counts and must stay rare. All interval and
//! block arithmetic runs over positions of a labelling; the functions here
//! take vertex-indexed colourings and a labelling and convert internally.

use crate::error::{Error, Result};
use crate::graph::{Graph, Labelling};
use crate::structure::bandwidth_of_labelling;
use serde::Serialize;

/// Vertex-indexed colour assignment with values in {0,...,r}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Colouring {
    colours: Vec<u32>,
    r: u32,
}

impl Colouring {
    pub fn new(colours: Vec<u32>, r: u32) -> Result<Self> {
        if let Some(&c) = colours.iter().find(|&&c| c > r) {
            return Err(Error::pre(format!("colour {} out of range 0..={}", c, r)));
        }
        Ok(Colouring { colours, r })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn n(&self) -> usize {
        self.colours.len()
    }

    pub fn colours(&self) -> &[u32] {
        &self.colours
    }

    pub fn get(&self, v: usize) -> u32 {
        self.colours[v]
    }

    pub fn is_proper_on(&self, g: &Graph) -> bool {
        crate::graph::is_proper_colouring(g, &self.colours)
    }

    /// Colours reordered so that index = position under the labelling.
    pub fn by_position(&self, labelling: &Labelling) -> Vec<u32> {
        (0..self.colours.len())
            .map(|p| self.colours[labelling.vertex_at(p)])
            .collect()
    }

    /// Inverse of `by_position`.
    pub fn from_positions(pos_col: Vec<u32>, labelling: &Labelling, r: u32) -> Result<Self> {
        let mut colours = vec![0u32; pos_col.len()];
        for (p, c) in pos_col.into_iter().enumerate() {
            colours[labelling.vertex_at(p)] = c;
        }
        Colouring::new(colours, r)
    }

    /// Per-colour class sizes, index 0..=r.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.r as usize + 1];
        for &c in &self.colours {
            counts[c as usize] += 1;
        }
        counts
    }
}

/// Smallest-fit proper colouring along the given vertex order, colours from 1
/// upward, 0 never used. Returns the colouring and the number of colours.
pub fn greedy_colouring(g: &Graph, order: &[usize]) -> Result<(Vec<u32>, u32)> {
    let n = g.n();
    Labelling::from_order(order.to_vec())?;
    let mut colours = vec![0u32; n];
    let mut used = 1u32;
    for &v in order {
        let mut taken = vec![false; n + 2];
        for u in g.neighbors(v) {
            if colours[u] != 0 {
                taken[colours[u] as usize] = true;
            }
        }
        let mut c = 1u32;
        while taken[c as usize] {
            c += 1;
        }
        colours[v] = c;
        used = used.max(c);
    }
    Ok((colours, used))
}

/// Consecutive position intervals of width 4rβn covering 1..n. The last
/// block absorbs the remainder so every block has the full width.
#[derive(Clone, Debug, Serialize)]
pub struct BlockStructure {
    pub n: usize,
    pub r: u32,
    pub beta: f64,
    /// Nominal block width.
    pub len: usize,
    /// Half-width of a switching window: bandwidth bound as an integer,
    /// raised to 1 for degenerate fractions.
    pub w: usize,
    pub count: usize,
}

/// Integer switching half-width for a bandwidth fraction. An integer
/// bandwidth is at most βn exactly when it is at most ⌊βn⌋; the floor is
/// raised to 1 so windows never collapse.
pub fn window_width(n: usize, beta: f64) -> usize {
    ((beta * n as f64).floor() as usize).max(1)
}

impl BlockStructure {
    /// Literal block structure: width ⌊4rβn⌋, error when that is below 1.
    pub fn new(n: usize, r: u32, beta: f64) -> Result<Self> {
        let len = (4.0 * r as f64 * beta * n as f64).floor() as usize;
        if len < 1 {
            return Err(Error::pre(format!(
                "block length 4r\u{03b2}n = {:.3} is below 1",
                4.0 * r as f64 * beta * n as f64
            )));
        }
        Ok(Self::with_len(n, r, beta, len))
    }

    /// Block structure wide enough for in-block switching: width at least
    /// 4rw where w is the window half-width. Coincides with `new` whenever
    /// βn ≥ 1.
    pub fn for_switching(n: usize, r: u32, beta: f64) -> Result<Self> {
        Self::for_switching_with(n, r, beta, window_width(n, beta))
    }

    /// Same, with the window half-width raised to at least `w`. Switch
    /// windows must dominate the labelling's actual bandwidth, which on
    /// small instances can exceed ⌊βn⌋.
    pub fn for_switching_with(n: usize, r: u32, beta: f64, w: usize) -> Result<Self> {
        let w = w.max(window_width(n, beta));
        let len = ((4.0 * r as f64 * beta * n as f64).floor() as usize).max(4 * r as usize * w);
        if len < 1 || n == 0 {
            return Err(Error::pre("empty graph or degenerate block length"));
        }
        let count = (n / len).max(1);
        Ok(BlockStructure { n, r, beta, len, w, count })
    }

    fn with_len(n: usize, r: u32, beta: f64, len: usize) -> Self {
        let count = (n / len).max(1);
        BlockStructure { n, r, beta, len, w: window_width(n, beta), count }
    }

    /// Half-open 0-based position range of block t (0-based).
    pub fn range(&self, t: usize) -> std::ops::Range<usize> {
        let start = t * self.len;
        let end = if t + 1 == self.count { self.n } else { (t + 1) * self.len };
        start..end.min(self.n)
    }

    /// Block index containing 0-based position p.
    pub fn block_of(&self, p: usize) -> usize {
        (p / self.len).min(self.count - 1)
    }

    /// Indices of blocks whose position range contains a zero colour.
    pub fn zero_blocks(&self, pos_col: &[u32]) -> Vec<usize> {
        (0..self.count)
            .filter(|&t| self.range(t).any(|p| pos_col[p] == 0))
            .collect()
    }
}

/// Blocks per the literal definition.
pub fn build_blocks(n: usize, r: u32, beta: f64) -> Result<BlockStructure> {
    BlockStructure::new(n, r, beta)
}

/// A position sequence is (ℓ,β)-zero free when every ℓ consecutive blocks
/// contain at most one block with zeros, i.e. zero blocks are at least ℓ
/// apart in block index.
pub fn is_zero_free_positions(pos_col: &[u32], blocks: &BlockStructure, ell: usize) -> bool {
    if ell <= 1 {
        return true;
    }
    let zb = blocks.zero_blocks(pos_col);
    zb.windows(2).all(|pair| pair[1] - pair[0] >= ell)
}

/// Vertex-indexed entry point: reorders by the labelling first.
pub fn is_zero_free_colouring(
    sigma: &Colouring,
    labelling: &Labelling,
    blocks: &BlockStructure,
    ell: usize,
) -> bool {
    is_zero_free_positions(&sigma.by_position(labelling), blocks, ell)
}

/// x-balanced: every position interval holds each nonzero colour class
/// within x of its proportional share, and at most x zeros overall. Index
/// order of `pos_col` is the position order. Runs in O(nr) by tracking the
/// extrema of r·(prefix count) − (prefix length) per colour: the interval
/// condition over all pairs is exactly a bound on the extrema gap.
pub fn is_balanced_positions(pos_col: &[u32], r: u32, x: f64) -> bool {
    let n = pos_col.len();
    let zeros = pos_col.iter().filter(|&&c| c == 0).count();
    if zeros as f64 > x {
        return false;
    }
    let r_us = r as usize;
    let mut g = vec![0i64; r_us];
    let mut gmax = vec![0i64; r_us];
    let mut gmin = vec![0i64; r_us];
    for t in 0..n {
        for i in 0..r_us {
            g[i] -= 1;
        }
        let c = pos_col[t] as usize;
        if c >= 1 {
            g[c - 1] += r as i64;
        }
        for i in 0..r_us {
            gmax[i] = gmax[i].max(g[i]);
            gmin[i] = gmin[i].min(g[i]);
        }
    }
    (0..r_us).all(|i| (gmax[i] - gmin[i]) as f64 <= x * r as f64)
}

pub fn is_balanced(sigma: &Colouring, labelling: &Labelling, x: f64) -> bool {
    is_balanced_positions(&sigma.by_position(labelling), sigma.r(), x)
}

/// All-pairs form of the balance definition, quadratic; kept as the oracle
/// the fast check is tested against.
pub fn is_balanced_all_pairs(pos_col: &[u32], r: u32, x: f64) -> bool {
    let n = pos_col.len();
    let zeros = pos_col.iter().filter(|&&c| c == 0).count();
    if zeros as f64 > x {
        return false;
    }
    let mut prefix = vec![vec![0i64; n + 1]; r as usize];
    for t in 0..n {
        for i in 0..r as usize {
            prefix[i][t + 1] = prefix[i][t] + ((pos_col[t] as usize == i + 1) as i64);
        }
    }
    for a in 0..=n {
        for b in a + 1..=n {
            for i in 0..r as usize {
                let count = prefix[i][b] - prefix[i][a];
                let share = (b - a) as f64 / r as f64;
                if (count as f64 - share).abs() > x {
                    return false;
                }
            }
        }
    }
    true
}

/// Adding an ascending sequence of spread at most x to a descending sequence
/// of spread at most x keeps the spread of the sums at most x. Validates the
/// hypothesis, then reports whether the conclusion holds.
pub fn even_out_check(c: &[i64], c_desc: &[i64], x: i64) -> Result<bool> {
    if c.len() != c_desc.len() || c.is_empty() {
        return Err(Error::pre("vectors must be nonempty and of equal length"));
    }
    if !c.windows(2).all(|p| p[0] <= p[1]) {
        return Err(Error::pre("first vector must be ascending"));
    }
    if !c_desc.windows(2).all(|p| p[0] >= p[1]) {
        return Err(Error::pre("second vector must be descending"));
    }
    if c[c.len() - 1] > c[0] + x {
        return Err(Error::pre("ascending vector spread exceeds x"));
    }
    if c_desc[0] > c_desc[c_desc.len() - 1] + x {
        return Err(Error::pre("descending vector spread exceeds x"));
    }
    let sums: Vec<i64> = c.iter().zip(c_desc).map(|(a, b)| a + b).collect();
    let max = *sums.iter().max().unwrap();
    let min = *sums.iter().min().unwrap();
    Ok(max <= min + x)
}

/// Position-level core of the colour switch at site s (1-based position):
/// beyond s the colours l and l' trade places, with the handover cushioned
/// by recolouring l to 0 inside [s−w, s+w]. Mutates in place.
fn switch_positions(pos_col: &mut [u32], s: usize, l: u32, lp: u32, w: usize) -> Result<()> {
    let n = pos_col.len();
    if s < 1 || s > n {
        return Err(Error::pre(format!("site {} outside 1..={}", s, n)));
    }
    let lo = s.saturating_sub(2 * w).max(1);
    let hi = (s + 2 * w).min(n);
    for p in lo..=hi {
        if pos_col[p - 1] == 0 {
            return Err(Error::pre(format!(
                "zero colour at position {} inside the protected window [{}, {}]",
                p, lo, hi
            )));
        }
    }
    let zlo = s.saturating_sub(w).max(1);
    let zhi = (s + w).min(n);
    for p in 1..=n {
        let c = pos_col[p - 1];
        if c == l && p >= zlo && p <= zhi {
            pos_col[p - 1] = 0;
        } else if c == l && p > s + w {
            pos_col[p - 1] = lp;
        } else if c == lp && p > s {
            pos_col[p - 1] = l;
        }
    }
    Ok(())
}

/// Colour switch of the balancing surgery: behind site s nothing moves,
/// beyond it l and l' swap, and the seam is padded with zeros on colour l.
/// The result is proper whenever the labelling's bandwidth fits inside the
/// window and the protected window carries no zeros.
pub fn switch_colours(
    h: &Graph,
    labelling: &Labelling,
    sigma: &Colouring,
    s: usize,
    l: u32,
    lp: u32,
    beta: f64,
) -> Result<Colouring> {
    let n = h.n();
    let r = sigma.r();
    if l < 1 || l > r || lp < 1 || lp > r {
        return Err(Error::pre("switch colours must be nonzero"));
    }
    if !sigma.is_proper_on(h) {
        return Err(Error::pre("input colouring is not proper"));
    }
    let w = window_width(n, beta);
    let bw = bandwidth_of_labelling(h, labelling);
    if bw > w {
        return Err(Error::pre(format!(
            "labelling bandwidth {} exceeds the switch window {}",
            bw, w
        )));
    }
    let mut pos_col = sigma.by_position(labelling);
    switch_positions(&mut pos_col, s, l, lp, w)?;
    let out = Colouring::from_positions(pos_col, labelling, r)?;
    if !out.is_proper_on(h) {
        return Err(Error::invariant("colour switch broke properness"));
    }
    Ok(out)
}

/// π as transpositions: each cycle (c_0 c_1 ... c_m) becomes (c_0 c_1),
/// (c_0 c_2), ..., applied left to right. At most r−1 swaps total.
fn transpositions_of(pi: &[u32]) -> Vec<(u32, u32)> {
    let r = pi.len() - 1;
    let mut seen = vec![false; r + 1];
    let mut out = Vec::new();
    for start in 1..=r as u32 {
        if seen[start as usize] || pi[start as usize] == start {
            seen[start as usize] = true;
            continue;
        }
        let mut cycle = vec![start];
        seen[start as usize] = true;
        let mut cur = pi[start as usize];
        while cur != start {
            seen[cur as usize] = true;
            cycle.push(cur);
            cur = pi[cur as usize];
        }
        for q in 1..cycle.len() {
            out.push((cycle[0], cycle[q]));
        }
    }
    out
}

fn validate_permutation(pi: &[u32], r: u32) -> Result<()> {
    if pi.len() != r as usize + 1 || pi[0] != 0 {
        return Err(Error::pre("permutation must map 0..=r with 0 fixed"));
    }
    let mut seen = vec![false; r as usize + 1];
    for &c in &pi[1..] {
        if c < 1 || c > r || seen[c as usize] {
            return Err(Error::pre("not a permutation of 1..=r"));
        }
        seen[c as usize] = true;
    }
    Ok(())
}

/// Applies a colour permutation across a zero-free block: before the block
/// nothing changes, after it every colour c becomes π(c), and the seams of
/// the at most r−1 transpositions put their zeros inside the block only.
/// Site q sits at the centre of the q-th width-4w strip of the block, so
/// every switch window stays within the block except for the single position
/// directly before it, which must also be zero free.
pub fn apply_block_permutation(
    h: &Graph,
    labelling: &Labelling,
    sigma: &Colouring,
    blocks: &BlockStructure,
    t: usize,
    pi: &[u32],
    beta: f64,
) -> Result<Colouring> {
    let n = h.n();
    let r = sigma.r();
    validate_permutation(pi, r)?;
    if t >= blocks.count {
        return Err(Error::pre(format!("block index {} out of range", t)));
    }
    let w = window_width(n, beta);
    if blocks.range(t).len() < 4 * r as usize * w {
        return Err(Error::pre(format!(
            "block of length {} cannot host {} switch strips of width {}",
            blocks.range(t).len(),
            r,
            4 * w
        )));
    }
    let bw = bandwidth_of_labelling(h, labelling);
    if bw > w {
        return Err(Error::pre(format!(
            "labelling bandwidth {} exceeds the switch window {}",
            bw, w
        )));
    }
    let mut pos_col = sigma.by_position(labelling);
    if blocks.range(t).any(|p| pos_col[p] == 0) {
        return Err(Error::pre(format!("block {} is not zero free", t)));
    }
    apply_block_permutation_positions(&mut pos_col, blocks, t, pi, w)?;
    let out = Colouring::from_positions(pos_col, labelling, r)?;
    if !out.is_proper_on(h) {
        return Err(Error::invariant("block permutation broke properness"));
    }
    Ok(out)
}

fn apply_block_permutation_positions(
    pos_col: &mut [u32],
    blocks: &BlockStructure,
    t: usize,
    pi: &[u32],
    w: usize,
) -> Result<()> {
    let start1 = blocks.range(t).start + 1;
    for (q, (l, lp)) in transpositions_of(pi).into_iter().enumerate() {
        let site = start1 - 1 + q * 4 * w + 2 * w;
        switch_positions(pos_col, site, l, lp, w)?;
    }
    Ok(())
}

/// One step of the balancing sweep, recorded for inspection.
#[derive(Clone, Debug, Serialize)]
pub struct BalanceStep {
    /// Switching block index (0-based).
    pub block: usize,
    /// Class counts (colours 1..r) over all blocks before this one.
    pub counts_before: Vec<u64>,
    /// Class counts over the chunk from this switching block to the next.
    pub chunk_counts: Vec<u64>,
    /// Permutation applied downstream, index = old colour.
    pub pi: Vec<u32>,
    /// Spread of the prefix counts once the chunk is absorbed.
    pub spread_after: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceOutcome {
    pub colouring: Colouring,
    pub blocks: BlockStructure,
    pub switching_blocks: Vec<usize>,
    pub steps: Vec<BalanceStep>,
    /// Balance slack actually verified: 6n/ℓ.
    pub x: f64,
}

/// Evens out the colour classes of a zero-sparse proper colouring. Picks
/// switching blocks greedily (earliest block at distance at least ℓ from
/// every block with zeros and every previous pick), then sweeps left to
/// right: at each switching block the downstream colours are permuted so
/// that the lightest class so far receives the heaviest class of the next
/// chunk. The output is proper, (ℓ,β)-zero free and 6n/ℓ-balanced, and all
/// three are re-verified before returning.
pub fn balance_colouring(
    h: &Graph,
    labelling: &Labelling,
    sigma: &Colouring,
    ell: usize,
    beta: f64,
) -> Result<BalanceOutcome> {
    let n = h.n();
    let r = sigma.r();
    if ell < 2 {
        return Err(Error::pre("window length must be at least 2"));
    }
    if r < 1 {
        return Err(Error::pre("need at least one nonzero colour"));
    }
    let xi = 1.0 / ell as f64;
    if beta > xi * xi / (12.0 * r as f64) + 1e-12 {
        return Err(Error::pre(format!(
            "beta {} exceeds the balancing ceiling {}",
            beta,
            xi * xi / (12.0 * r as f64)
        )));
    }
    if !sigma.is_proper_on(h) {
        return Err(Error::pre("input colouring is not proper"));
    }
    let bw = bandwidth_of_labelling(h, labelling);
    let blocks = BlockStructure::for_switching_with(n, r, beta, bw)?;
    let w = blocks.w;
    let mut pos_col = sigma.by_position(labelling);
    let zero_blocks = blocks.zero_blocks(&pos_col);
    if !zero_blocks.windows(2).all(|p| p[1] - p[0] >= 2 * ell) {
        return Err(Error::pre(format!(
            "input colouring is not ({},{})-zero free",
            2 * ell,
            beta
        )));
    }

    // Greedy switching-block selection. A pick must keep every pair of
    // special blocks (zeros or picks) at distance >= ell, and picks must
    // come often enough that no stretch of 3*ell blocks lacks one.
    let mut switching: Vec<usize> = Vec::new();
    {
        let mut last_special: Option<usize> = None;
        let mut zi = 0usize;
        for t in 0..blocks.count {
            while zi < zero_blocks.len() && zero_blocks[zi] < t {
                last_special = Some(zero_blocks[zi]);
                zi += 1;
            }
            if zi < zero_blocks.len() && zero_blocks[zi] == t {
                continue;
            }
            if let Some(ls) = last_special {
                if t - ls < ell {
                    continue;
                }
            }
            if zi < zero_blocks.len() && zero_blocks[zi] - t < ell {
                continue;
            }
            if blocks.range(t).len() < 4 * r as usize * w {
                continue;
            }
            switching.push(t);
            last_special = Some(t);
        }
    }
    {
        let mut prev = 0usize;
        for &s in switching.iter().chain(std::iter::once(&blocks.count)) {
            if s - prev > 3 * ell {
                return Err(Error::stage(format!(
                    "no admissible switching block between block {} and block {}",
                    prev, s
                )));
            }
            prev = s;
        }
    }

    let chunk_counts = |pos_col: &[u32], from_block: usize, to_block: usize| -> Vec<u64> {
        let mut c = vec![0u64; r as usize];
        let lo = blocks.range(from_block).start;
        let hi = if to_block >= blocks.count { n } else { blocks.range(to_block).start };
        for p in lo..hi {
            let col = pos_col[p];
            if col >= 1 {
                c[col as usize - 1] += 1;
            }
        }
        c
    };

    let mut steps = Vec::new();
    for (idx, &s_t) in switching.iter().enumerate() {
        let next = switching.get(idx + 1).copied().unwrap_or(blocks.count);
        let counts_before = chunk_counts(&pos_col, 0, s_t);
        let chunk = chunk_counts(&pos_col, s_t, next);
        let mut rho: Vec<u32> = (1..=r).collect();
        rho.sort_by_key(|&i| (counts_before[i as usize - 1], i));
        let mut tau: Vec<u32> = (1..=r).collect();
        tau.sort_by_key(|&i| (std::cmp::Reverse(chunk[i as usize - 1]), i));
        let mut pi = vec![0u32; r as usize + 1];
        for q in 0..r as usize {
            pi[tau[q] as usize] = rho[q];
        }
        if pi.iter().enumerate().all(|(c, &img)| c as u32 == img) {
            steps.push(BalanceStep {
                block: s_t,
                counts_before,
                chunk_counts: chunk,
                pi,
                spread_after: spread(&chunk_counts(&pos_col, 0, next)),
            });
            continue;
        }
        apply_block_permutation_positions(&mut pos_col, &blocks, s_t, &pi, w)?;
        steps.push(BalanceStep {
            block: s_t,
            counts_before,
            chunk_counts: chunk,
            pi,
            spread_after: spread(&chunk_counts(&pos_col, 0, next)),
        });
    }

    let colouring = Colouring::from_positions(pos_col.clone(), labelling, r)?;
    if !colouring.is_proper_on(h) {
        return Err(Error::invariant("balancing broke properness"));
    }
    if !is_zero_free_positions(&pos_col, &blocks, ell) {
        return Err(Error::invariant("balanced colouring is not zero free"));
    }
    let x = 6.0 * n as f64 / ell as f64;
    if !is_balanced_positions(&pos_col, r, x) {
        return Err(Error::invariant(format!(
            "balancing missed the {}-balance target",
            x
        )));
    }
    Ok(BalanceOutcome { colouring, blocks, switching_blocks: switching, steps, x })
}

fn spread(counts: &[u64]) -> u64 {
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    max - min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_power;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cyclic_colouring(n: usize, r: u32) -> Colouring {
        Colouring::new((0..n).map(|p| (p as u32 % r) + 1).collect(), r).unwrap()
    }

    #[test]
    fn blocks_literal_widths() {
        let b = build_blocks(100, 2, 1.0 / 40.0).unwrap();
        assert_eq!((b.len, b.count), (20, 5));
        let b = build_blocks(48, 2, 1.0 / 48.0).unwrap();
        assert_eq!((b.len, b.count), (8, 6));
        assert!(build_blocks(10, 1, 0.01).is_err());
    }

    #[test]
    fn last_block_absorbs_remainder() {
        let b = build_blocks(23, 1, 5.0 / 92.0).unwrap();
        assert_eq!(b.len, 5);
        assert_eq!(b.count, 4);
        assert_eq!(b.range(3), 15..23);
    }

    #[test]
    fn zero_free_windows() {
        let b = build_blocks(40, 1, 1.0 / 40.0).unwrap(); // 10 blocks of 4
        let mut col = vec![1u32; 40];
        assert!(is_zero_free_positions(&col, &b, 5));
        col[0] = 0;
        col[4] = 0; // blocks 0 and 1
        assert!(!is_zero_free_positions(&col, &b, 2));
        col[4] = 1;
        col[20] = 0; // blocks 0 and 5
        assert!(is_zero_free_positions(&col, &b, 5));
        assert!(!is_zero_free_positions(&col, &b, 6));
    }

    #[test]
    fn balanced_alternating_and_constant() {
        let pos: Vec<u32> = (0..30).map(|p| (p % 3) as u32 + 1).collect();
        assert!(is_balanced_positions(&pos, 3, 1.0));
        let all_one = vec![1u32; 10];
        assert!(!is_balanced_positions(&all_one, 2, 2.0));
    }

    #[test]
    fn balanced_matches_all_pairs_on_random_colourings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = path_power(60, 2);
        for _ in 0..40 {
            let (mut cols, _) = greedy_colouring(&g, &(0..60).collect::<Vec<_>>()).unwrap();
            for c in cols.iter_mut() {
                if rng.random_bool(0.1) {
                    *c = rng.random_range(0..=3);
                }
            }
            for &x in &[0.5, 1.0, 3.0, 7.0, 20.0] {
                assert_eq!(
                    is_balanced_positions(&cols, 3, x),
                    is_balanced_all_pairs(&cols, 3, x),
                    "x={} cols={:?}",
                    x,
                    cols
                );
            }
        }
    }

    #[test]
    fn even_out_examples() {
        assert!(even_out_check(&[1, 2, 3], &[3, 2, 1], 2).unwrap());
        assert!(even_out_check(&[0, 2], &[2, 0], 2).unwrap());
        assert!(even_out_check(&[1, 3, 2], &[3, 2, 1], 2).is_err());
        assert!(even_out_check(&[1, 2, 9], &[3, 2, 1], 2).is_err());
    }

    #[test]
    fn even_out_random_always_concludes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let r = rng.random_range(1..6usize);
            let x = rng.random_range(0..20i64);
            let base = rng.random_range(0..50i64);
            let mut c: Vec<i64> = (0..r).map(|_| base + rng.random_range(0..=x)).collect();
            c.sort();
            let base2 = rng.random_range(0..50i64);
            let mut cd: Vec<i64> = (0..r).map(|_| base2 + rng.random_range(0..=x)).collect();
            cd.sort_by(|a, b| b.cmp(a));
            assert!(even_out_check(&c, &cd, x).unwrap());
        }
    }

    #[test]
    fn switch_on_alternating_path() {
        // Positions 1..20 coloured 1,2,1,2,...; swapping 1 and 2 at site 10
        // with window 2 zeroes exactly the colour-1 vertices of [8,12].
        let g = path_power(20, 1);
        let lab = Labelling::identity(20);
        let sigma = cyclic_colouring(20, 2);
        let out = switch_colours(&g, &lab, &sigma, 10, 1, 2, 0.1).unwrap();
        assert!(out.is_proper_on(&g));
        let expect: Vec<u32> = vec![1, 2, 1, 2, 1, 2, 1, 2, 0, 2, 0, 1, 2, 1, 2, 1, 2, 1, 2, 1];
        assert_eq!(out.colours(), &expect[..]);
    }

    #[test]
    fn switch_same_colour_only_zeroes_window() {
        let g = path_power(20, 1);
        let lab = Labelling::identity(20);
        let sigma = cyclic_colouring(20, 2);
        let out = switch_colours(&g, &lab, &sigma, 10, 1, 1, 0.1).unwrap();
        for p in 0..20usize {
            let inside = (8..=12).contains(&(p + 1));
            if inside && sigma.get(p) == 1 {
                assert_eq!(out.get(p), 0);
            } else {
                assert_eq!(out.get(p), sigma.get(p));
            }
        }
    }

    #[test]
    fn switch_rejects_zero_at_site() {
        let g = path_power(20, 1);
        let lab = Labelling::identity(20);
        let mut cols: Vec<u32> = (0..20).map(|p| (p as u32 % 2) + 1).collect();
        cols[9] = 0;
        let sigma = Colouring::new(cols, 2).unwrap();
        assert!(switch_colours(&g, &lab, &sigma, 10, 1, 2, 0.1).is_err());
    }

    #[test]
    fn block_permutation_identity_and_transposition() {
        let g = path_power(96, 2);
        let lab = Labelling::identity(96);
        let sigma = cyclic_colouring(96, 3);
        let beta = 1.0 / 48.0; // w = 2, block width 24
        let blocks = build_blocks(96, 3, beta).unwrap();
        assert_eq!((blocks.len, blocks.count), (24, 4));

        let id = vec![0u32, 1, 2, 3];
        let out = apply_block_permutation(&g, &lab, &sigma, &blocks, 1, &id, beta).unwrap();
        assert_eq!(out.colours(), sigma.colours());

        let swap = vec![0u32, 2, 1, 3];
        let out = apply_block_permutation(&g, &lab, &sigma, &blocks, 1, &swap, beta).unwrap();
        assert!(out.is_proper_on(&g));
        for p in 0..24 {
            assert_eq!(out.get(p), sigma.get(p), "block before must not change");
        }
        for p in 48..96 {
            assert_eq!(out.get(p), swap[sigma.get(p) as usize]);
        }
        let zeroed = (0..96).filter(|&p| out.get(p) == 0).count();
        assert!(zeroed > 0);
        assert!((0..96).all(|p| out.get(p) != 0 || (24..48).contains(&p)));
    }

    #[test]
    fn block_permutation_three_cycle() {
        let g = path_power(96, 2);
        let lab = Labelling::identity(96);
        let sigma = cyclic_colouring(96, 3);
        let beta = 1.0 / 48.0;
        let blocks = build_blocks(96, 3, beta).unwrap();
        let cycle = vec![0u32, 2, 3, 1];
        let out = apply_block_permutation(&g, &lab, &sigma, &blocks, 1, &cycle, beta).unwrap();
        assert!(out.is_proper_on(&g));
        for p in 0..24 {
            assert_eq!(out.get(p), sigma.get(p));
        }
        for p in 48..96 {
            assert_eq!(out.get(p), cycle[sigma.get(p) as usize]);
        }
        assert!((0..96).all(|p| out.get(p) != 0 || (24..48).contains(&p)));
    }

    #[test]
    fn block_permutation_rejects_zero_block() {
        let g = path_power(96, 2);
        let lab = Labelling::identity(96);
        let mut cols: Vec<u32> = (0..96).map(|p| (p as u32 % 3) + 1).collect();
        cols[30] = 0;
        let sigma = Colouring::new(cols, 3).unwrap();
        let blocks = build_blocks(96, 3, 1.0 / 48.0).unwrap();
        let swap = vec![0u32, 2, 1, 3];
        assert!(apply_block_permutation(&g, &lab, &sigma, &blocks, 1, &swap, 1.0 / 48.0).is_err());
    }

    #[test]
    fn transposition_decomposition_sizes() {
        assert_eq!(transpositions_of(&[0, 1, 2, 3]).len(), 0);
        assert_eq!(transpositions_of(&[0, 2, 1, 3]).len(), 1);
        assert_eq!(transpositions_of(&[0, 2, 3, 1]).len(), 2);
        assert_eq!(transpositions_of(&[0, 2, 1, 4, 3]).len(), 2);
    }

    #[test]
    fn balance_skewed_path_three_colours() {
        // First half coloured 1,2,1,2,..., second half 1,3,1,3,...: classes
        // n/2, n/4, n/4. Balancing must even them out to within 6n/l.
        let n = 960;
        let g = path_power(n, 1);
        let lab = Labelling::identity(n);
        let cols: Vec<u32> = (0..n)
            .map(|p| {
                if p % 2 == 0 {
                    1
                } else if p < n / 2 {
                    2
                } else {
                    3
                }
            })
            .collect();
        let sigma = Colouring::new(cols, 3).unwrap();
        let ell = 10;
        let beta = 1.0 / (12.0 * 100.0 * 3.0);
        let out = balance_colouring(&g, &lab, &sigma, ell, beta).unwrap();
        assert!(out.colouring.is_proper_on(&g));
        let sizes = out.colouring.class_sizes();
        let spread = sizes[1..].iter().max().unwrap() - sizes[1..].iter().min().unwrap();
        assert!(spread as f64 <= 6.0 * n as f64 / ell as f64);
        // The invariant of the sweep: prefix spreads stay within n/l.
        for step in &out.steps {
            assert!(
                step.spread_after as f64 <= n as f64 / ell as f64,
                "step at block {} spread {}",
                step.block,
                step.spread_after
            );
        }
    }

    #[test]
    fn balance_spec_fixture_two_colours() {
        let n = 960;
        let g = path_power(n, 1);
        let lab = Labelling::identity(n);
        let ell = 10;
        let beta = 1.0 / (12.0 * 100.0 * 2.0);
        // Proper two-colouring with sparse zeros shifting the phase.
        let mut cols: Vec<u32> = Vec::with_capacity(n);
        let mut phase = 0u32;
        for p in 0..n {
            if p == 300 || p == 700 {
                cols.push(0);
                phase ^= 1;
            } else {
                cols.push(((p as u32 + phase) % 2) + 1);
            }
        }
        let sigma = Colouring::new(cols, 2).unwrap();
        assert!(sigma.is_proper_on(&g));
        let out = balance_colouring(&g, &lab, &sigma, ell, beta).unwrap();
        assert!(is_balanced(&out.colouring, &lab, 6.0 * n as f64 / ell as f64));
        assert!(is_zero_free_colouring(&out.colouring, &lab, &out.blocks, ell));
    }

    #[test]
    fn balance_identity_when_already_even() {
        let n = 480;
        let g = path_power(n, 1);
        let lab = Labelling::identity(n);
        let sigma = cyclic_colouring(n, 2);
        let out = balance_colouring(&g, &lab, &sigma, 10, 1.0 / 2400.0).unwrap();
        assert_eq!(out.colouring.colours(), sigma.colours());
    }

    #[test]
    fn balance_rejects_crowded_zeros() {
        let n = 480;
        let g = path_power(n, 1);
        let lab = Labelling::identity(n);
        let mut cols: Vec<u32> = (0..n).map(|p| (p as u32 % 2) + 1).collect();
        cols[10] = 0;
        cols[30] = 0;
        let sigma = Colouring::new(cols, 2).unwrap();
        let err = balance_colouring(&g, &lab, &sigma, 10, 1.0 / 2400.0);
        assert!(err.is_err());
    }

    #[test]
    fn balance_segments_are_whole_class_permutations() {
        let n = 960;
        let g = path_power(n, 1);
        let lab = Labelling::identity(n);
        let cols: Vec<u32> = (0..n)
            .map(|p| if p % 2 == 0 { 1 } else if p < n / 2 { 2 } else { 3 })
            .collect();
        let sigma = Colouring::new(cols, 3).unwrap();
        let out = balance_colouring(&g, &lab, &sigma, 10, 1.0 / 3600.0).unwrap();
        let pos_in = sigma.by_position(&lab);
        let pos_out = out.colouring.by_position(&lab);
        let in_switch = |p: usize| {
            out.switching_blocks
                .iter()
                .any(|&t| out.blocks.range(t).contains(&p))
        };
        // Zeros appear only inside switching blocks.
        for p in 0..n {
            if pos_out[p] == 0 && pos_in[p] != 0 {
                assert!(in_switch(p), "new zero at position {}", p);
            }
        }
        // Between switching blocks the recolouring is a single relabelling.
        let mut seg_map: std::collections::BTreeMap<u32, u32> = Default::default();
        for p in 0..n {
            if in_switch(p) {
                seg_map.clear();
                continue;
            }
            let (a, b) = (pos_in[p], pos_out[p]);
            if a == 0 {
                assert_eq!(b, 0);
                continue;
            }
            if let Some(&prev) = seg_map.get(&a) {
                assert_eq!(prev, b, "segment relabelling not constant at {}", p);
            } else {
                seg_map.insert(a, b);
            }
        }
    }
}
