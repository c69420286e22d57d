//! The table `D(a, x) ≤ G̃(a, x)` on the grid `a, x ∈ βℤ`, seeded from the
//! Prawitz bound and refined by eliminating the largest weight:
//!
//! ```text
//! G̃(a*, x) = ½ inf_{a ∈ (0, a*]} [ G̃(a/√(1−a²), (x−a)/√(1−a²)) + G̃(a/√(1−a²), (x+a)/√(1−a²)) ]
//! ```
//!
//! A stored value at `(i/N, j/N)` bounds every sum whose largest weight is
//! at most `i/N`, at threshold exactly `j/N`. Queries round both arguments up.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::prawitz::PrawitzConfig;

const MAGIC: &[u8; 8] = b"RSDPTBL\0";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 8 + 8 + 8;
const DIGEST_LEN: usize = 32;

/// Smallest integer `i` with `x·n ≤ i`, computed exactly.
pub fn ceil_units(x: f64, n: u32) -> i64 {
    let nf = f64::from(n);
    let mut i = (x * nf).ceil() as i64;
    // fma gives the sign of x·n − i without intermediate rounding
    while x.mul_add(nf, -(i as f64)) > 0.0 {
        i += 1;
    }
    while x.mul_add(nf, -((i - 1) as f64)) <= 0.0 {
        i -= 1;
    }
    i
}

/// Grid shape and build parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Granularity `β = 1/n`.
    pub n: u32,
    /// `x` range `[x_lo/n, x_hi/n]`.
    pub x_lo: i64,
    pub x_hi: i64,
    pub iterations: usize,
    /// Refinement stops once no entry gains more than this.
    pub epsilon: f64,
    pub prawitz: PrawitzConfig,
    /// The Prawitz bound is evaluated on every `seed_a_stride`-th `a` and
    /// every `seed_x_stride`-th `x`; other points take the value at the next
    /// larger seeded point.
    pub seed_a_stride: u32,
    pub seed_x_stride: u32,
    pub memory_budget_bytes: usize,
}

impl GridSpec {
    /// `β = 1/200`, 50 iterations, `x ∈ [−3, 3]`.
    pub fn desk() -> Self {
        GridSpec {
            n: 200,
            x_lo: -600,
            x_hi: 600,
            iterations: 50,
            epsilon: 0.0,
            prawitz: PrawitzConfig { panels: 128, ..PrawitzConfig::default() },
            seed_a_stride: 4,
            seed_x_stride: 10,
            memory_budget_bytes: 1 << 30,
        }
    }

    /// `β = 1/2000`, 1000 iterations, `x ∈ [−3, 3]`.
    pub fn full() -> Self {
        GridSpec {
            n: 2000,
            x_lo: -6000,
            x_hi: 6000,
            iterations: 1000,
            epsilon: 0.0,
            prawitz: PrawitzConfig::default(),
            seed_a_stride: 20,
            seed_x_stride: 50,
            memory_budget_bytes: 1 << 30,
        }
    }

    pub fn beta(&self) -> f64 {
        1.0 / f64::from(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("beta must be positive".into()));
        }
        if self.x_lo >= self.x_hi {
            return Err(Error::InvalidParam("empty x range".into()));
        }
        if self.seed_a_stride == 0 || self.seed_x_stride == 0 {
            return Err(Error::InvalidParam("seed strides must be positive".into()));
        }
        let cells = (self.n as usize + 1) * ((self.x_hi - self.x_lo) as usize + 1);
        let bytes = cells.saturating_mul(8 * 3);
        if bytes > self.memory_budget_bytes {
            return Err(Error::Resource(format!(
                "grid needs about {bytes} bytes, budget is {}",
                self.memory_budget_bytes
            )));
        }
        Ok(())
    }

    /// Stable identifier for caching built tables.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DPGrid {
    n: u32,
    x_lo: i64,
    x_hi: i64,
    values: Vec<f64>,
    iterations_done: usize,
}

/// Where a rounded-up `x` argument lands in a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Index(u32),
    /// Past `x_max`: the bound is 0.
    Beyond,
}

impl DPGrid {
    /// A table filled with a constant; mostly for tests.
    pub fn constant(n: u32, x_lo: i64, x_hi: i64, value: f64) -> Self {
        let cols = (x_hi - x_lo + 1) as usize;
        DPGrid { n, x_lo, x_hi, values: vec![value; (n as usize + 1) * cols], iterations_done: 0 }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        1.0 / f64::from(self.n)
    }

    pub fn a_points(&self) -> usize {
        self.n as usize + 1
    }

    pub fn x_points(&self) -> usize {
        (self.x_hi - self.x_lo + 1) as usize
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_lo as f64 / f64::from(self.n), self.x_hi as f64 / f64::from(self.n))
    }

    pub fn x_units(&self) -> (i64, i64) {
        (self.x_lo, self.x_hi)
    }

    pub fn iterations_done(&self) -> usize {
        self.iterations_done
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at grid indices (`a = ai/n`, `x = (x_lo + xi)/n`).
    pub fn at(&self, ai: usize, xi: usize) -> f64 {
        self.values[ai * self.x_points() + xi]
    }

    fn row(&self, ai: usize) -> &[f64] {
        let c = self.x_points();
        &self.values[ai * c..(ai + 1) * c]
    }

    fn slot(&self, x: f64) -> Slot {
        if x == f64::NEG_INFINITY {
            return Slot::Index(0);
        }
        if x.is_nan() || x == f64::INFINITY {
            return Slot::Beyond;
        }
        let u = ceil_units(x, self.n);
        if u > self.x_hi {
            Slot::Beyond
        } else {
            Slot::Index((u.max(self.x_lo) - self.x_lo) as u32)
        }
    }

    fn a_index(&self, a: f64) -> usize {
        ceil_units(a, self.n).clamp(0, i64::from(self.n)) as usize
    }

    fn lookup(&self, ai: usize, slot: Slot) -> f64 {
        match slot {
            Slot::Beyond => 0.0,
            Slot::Index(i) => self.at(ai, i as usize),
        }
    }

    /// Lower bound on `P(X ≥ x)` for unit-variance sums with largest weight
    /// at most `a`. Both arguments are rounded up to the grid; `x` beyond the
    /// range gives 0 and `x` below it gives the value at `x_min`.
    pub fn query(&self, a: f64, x: f64) -> Result<f64> {
        if !(a > 0.0) || a > 1.0 {
            return Err(Error::OutOfRange { what: "a", detail: format!("need 0 < a ≤ 1, got {a}") });
        }
        Ok(self.lookup(self.a_index(a), self.slot(x)))
    }

    /// [`DPGrid::query`] that treats `a ≥ 1` as the unrestricted class.
    pub(crate) fn query_clamped(&self, a: f64, x: f64) -> f64 {
        let ai = if a >= 1.0 || a.is_nan() { self.n as usize } else { self.a_index(a.max(f64::MIN_POSITIVE)) };
        self.lookup(ai, self.slot(x))
    }

    /// Enforces monotonicity in both arguments by suffix maxima. Sound
    /// because `G̃` is non-increasing in `a` and in `x`.
    fn monotone_closure(&mut self) {
        let cols = self.x_points();
        for row in self.values.chunks_mut(cols) {
            for j in (0..cols - 1).rev() {
                row[j] = row[j].max(row[j + 1]);
            }
        }
        for ai in (0..self.n as usize).rev() {
            let (head, tail) = self.values.split_at_mut((ai + 1) * cols);
            let cur = &mut head[ai * cols..];
            for (c, &next) in cur.iter_mut().zip(&tail[..cols]) {
                *c = c.max(next);
            }
        }
    }

    pub fn is_monotone(&self) -> bool {
        let cols = self.x_points();
        for ai in 0..self.a_points() {
            let row = self.row(ai);
            if row.windows(2).any(|w| w[1] > w[0]) {
                return false;
            }
            if ai + 1 < self.a_points() && row.iter().zip(self.row(ai + 1)).any(|(a, b)| b > a) {
                return false;
            }
        }
        cols > 0
    }

    /// Writes the table with a header and a SHA-256 trailer.
    pub fn persist(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(HEADER_LEN + self.values.len() * 8 + DIGEST_LEN);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.n.to_le_bytes());
        buf.extend_from_slice(&self.x_lo.to_le_bytes());
        buf.extend_from_slice(&self.x_hi.to_le_bytes());
        buf.extend_from_slice(&(self.iterations_done as u64).to_le_bytes());
        buf.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        let tmp = path.with_extension("partial");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&buf)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DPGrid> {
        let bytes = fs::read(path)?;
        if bytes.len() < HEADER_LEN + DIGEST_LEN {
            return Err(Error::Checksum);
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Checksum);
        }
        if &body[..8] != MAGIC {
            return Err(Error::Version("not a table file".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().expect("4 bytes"));
        let i64_at = |o: usize| i64::from_le_bytes(body[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(8);
        if version != FORMAT_VERSION {
            return Err(Error::Version(format!("format version {version}, expected {FORMAT_VERSION}")));
        }
        let n = u32_at(12);
        let x_lo = i64_at(16);
        let x_hi = i64_at(24);
        let iterations_done = i64_at(32) as usize;
        let count = i64_at(40) as usize;
        if body.len() != HEADER_LEN + count * 8 || n == 0 || x_hi < x_lo {
            return Err(Error::Version("inconsistent header".into()));
        }
        let values: Vec<f64> = body[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let grid = DPGrid { n, x_lo, x_hi, values, iterations_done };
        if grid.values.len() != grid.a_points() * grid.x_points() {
            return Err(Error::Version("value count does not match grid shape".into()));
        }
        Ok(grid)
    }

    /// Loads a table and checks that its granularity is `1/n`.
    pub fn load_expecting(path: &Path, n: u32) -> Result<DPGrid> {
        let g = DPGrid::load(path)?;
        if g.n != n {
            return Err(Error::Version(format!("table has beta = 1/{}, expected 1/{n}", g.n)));
        }
        Ok(g)
    }
}

/// `max(1/2, 1 − 1/(2x²))` for `x ≤ 0` (symmetry and Chebyshev), else 0.
fn elementary_bound(x_units: i64, n: u32) -> f64 {
    if x_units > 0 {
        return 0.0;
    }
    if x_units == 0 {
        return 0.5;
    }
    let x = Interval::ratio(x_units as f64, f64::from(n));
    let cheb = Interval::ONE - Interval::ONE / (Interval::point(2.0) * x.sqr());
    cheb.lo.max(0.5)
}

/// `D₀`: the Prawitz bound on a seed lattice, combined with the elementary
/// bounds and closed under monotonicity.
pub fn build_initial(spec: &GridSpec) -> Result<DPGrid> {
    spec.validate()?;
    let n = spec.n;
    let mut grid = DPGrid::constant(n, spec.x_lo, spec.x_hi, 0.0);
    let cols = grid.x_points();

    let seeds = |stride: u32, lo: i64, hi: i64| -> Vec<i64> {
        let mut v: Vec<i64> = (lo..=hi).filter(|i| i.rem_euclid(i64::from(stride)) == 0).collect();
        if v.last() != Some(&hi) {
            v.push(hi);
        }
        v
    };
    let a_seeds: Vec<i64> = seeds(spec.seed_a_stride, 1, i64::from(n));
    let x_seeds: Vec<i64> = seeds(spec.seed_x_stride, spec.x_lo, spec.x_hi);

    let seeded: Vec<Vec<f64>> = a_seeds
        .par_iter()
        .map(|&ai| -> Result<Vec<f64>> {
            let a = Interval::ratio(ai as f64, f64::from(n)).hi.min(1.0);
            let mut row = Vec::with_capacity(x_seeds.len());
            let mut exhausted = false;
            for &xu in &x_seeds {
                let v = if exhausted {
                    0.0
                } else {
                    let x = Interval::ratio(xu as f64, f64::from(n)).hi;
                    let p = spec.prawitz.optimize(a, x)?.value;
                    if p <= 0.0 && xu > 0 {
                        exhausted = true;
                    }
                    p
                };
                row.push(v);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    for ai in 1..=n as usize {
        let si = a_seeds.partition_point(|&s| s < ai as i64);
        let row = &seeded[si];
        for xi in 0..cols {
            let xu = spec.x_lo + xi as i64;
            let sx = x_seeds.partition_point(|&s| s < xu);
            let v = row[sx].max(elementary_bound(xu, n)).clamp(0.0, 1.0);
            grid.values[ai * cols + xi] = v;
        }
    }
    copy_row_one(&mut grid);
    grid.monotone_closure();
    Ok(grid)
}

fn copy_row_one(grid: &mut DPGrid) {
    let cols = grid.x_points();
    let (zero, rest) = grid.values.split_at_mut(cols);
    zero.copy_from_slice(&rest[..cols]);
}

/// Rounded-up argument indices for each elimination cell; independent of
/// the table contents, so computed once per build.
pub struct RefinePlan {
    /// Per cell `j = 1..=n`: the row of `a/√(1−a²)` rounded up.
    a_rows: Vec<usize>,
    /// Per cell and `x`: slots of `sup (x∓a)/√(1−a²)` over the cell.
    minus: Vec<Slot>,
    plus: Vec<Slot>,
}

/// `sup` of `(x + c·a)/√(1−a²)` over `a ∈ [a0, a1]`, `c = ±1`.
fn cell_sup(x: Interval, c: f64, a0: Interval, a1: Interval, a1_is_one: bool) -> f64 {
    let at = |a: Interval| (x + a * Interval::point(c)) / (Interval::ONE - a.sqr()).sqrt();
    let mut best = at(a0).hi;
    if a1_is_one {
        // limit as a → 1 is sign(x + c)·∞, or 0 when x = −c
        let s = x + Interval::point(c);
        let lim = if s.lo > 0.0 {
            f64::INFINITY
        } else if s.hi < 0.0 {
            f64::NEG_INFINITY
        } else if s.lo == 0.0 && s.hi == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        best = best.max(lim);
    } else {
        best = best.max(at(a1).hi);
    }
    // interior maximum of (x + a)/√(1−a²) at a = −1/x when x < −1
    if c > 0.0 && x.hi < -1.0 {
        let star = -(Interval::ONE / x);
        let upper_end = if a1_is_one { 1.0 } else { a1.hi };
        if star.hi >= a0.lo && star.lo <= upper_end {
            best = best.max((-(x.sqr() - Interval::ONE).sqrt()).hi);
        }
    }
    best
}

impl RefinePlan {
    pub fn new(grid: &DPGrid) -> Self {
        let n = grid.n;
        let nf = f64::from(n);
        let cols = grid.x_points();
        let mut a_rows = Vec::with_capacity(n as usize);
        let rows: Vec<(Vec<Slot>, Vec<Slot>)> = (1..=n)
            .into_par_iter()
            .map(|j| {
                let a0 = Interval::ratio(f64::from(j - 1), nf);
                let a1 = Interval::ratio(f64::from(j), nf);
                let is_one = j == n;
                let mut m = Vec::with_capacity(cols);
                let mut p = Vec::with_capacity(cols);
                for xi in 0..cols {
                    let x = Interval::ratio((grid.x_lo + xi as i64) as f64, nf);
                    m.push(grid.slot(cell_sup(x, -1.0, a0, a1, is_one)));
                    p.push(grid.slot(cell_sup(x, 1.0, a0, a1, is_one)));
                }
                (m, p)
            })
            .collect();
        for j in 1..=n {
            let a1 = Interval::ratio(f64::from(j), nf);
            let denom = Interval::ONE - a1.sqr();
            // classes with a ≥ 1 are unrestricted
            let row = if j == n || denom.lo <= 0.0 {
                n as usize
            } else {
                let arg = (a1 / denom.sqrt()).hi;
                if arg >= 1.0 {
                    n as usize
                } else {
                    grid.a_index(arg)
                }
            };
            a_rows.push(row);
        }
        let mut minus = Vec::with_capacity(n as usize * cols);
        let mut plus = Vec::with_capacity(n as usize * cols);
        for (m, p) in rows {
            minus.extend(m);
            plus.extend(p);
        }
        RefinePlan { a_rows, minus, plus }
    }
}

/// One step of the recursion. Returns the new table and the largest gain.
pub fn refine_with(grid: &DPGrid, plan: &RefinePlan) -> (DPGrid, f64) {
    let n = grid.n as usize;
    let cols = grid.x_points();
    let candidates: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let ar = plan.a_rows[j];
            (0..cols)
                .map(|xi| {
                    let d1 = grid.lookup(ar, plan.minus[j * cols + xi]);
                    let d2 = grid.lookup(ar, plan.plus[j * cols + xi]);
                    ((d1 + d2).next_down() * 0.5).max(0.0)
                })
                .collect()
        })
        .collect();
    let mut next = grid.clone();
    let mut running = vec![f64::INFINITY; cols];
    let mut gain = 0.0f64;
    for (j, cand) in candidates.iter().enumerate() {
        let ai = j + 1;
        for xi in 0..cols {
            running[xi] = running[xi].min(cand[xi]);
            let slot = &mut next.values[ai * cols + xi];
            if running[xi] > *slot {
                gain = gain.max(running[xi] - *slot);
                *slot = running[xi];
            }
        }
    }
    copy_row_one(&mut next);
    next.iterations_done = grid.iterations_done + 1;
    (next, gain)
}

pub fn refine(grid: &DPGrid) -> DPGrid {
    refine_with(grid, &RefinePlan::new(grid)).0
}

/// `build_initial` followed by up to `spec.iterations` refinements.
pub fn build(spec: &GridSpec) -> Result<DPGrid> {
    build_with_progress(spec, |_, _| {})
}

pub fn build_with_progress(spec: &GridSpec, mut progress: impl FnMut(usize, f64)) -> Result<DPGrid> {
    let mut grid = build_initial(spec)?;
    let plan = RefinePlan::new(&grid);
    for i in 0..spec.iterations {
        let (next, gain) = refine_with(&grid, &plan);
        grid = next;
        progress(i + 1, gain);
        if gain <= spec.epsilon {
            break;
        }
    }
    Ok(grid)
}

/// Path of the cached table for `spec` inside `dir`.
pub fn cache_path(dir: &Path, spec: &GridSpec) -> PathBuf {
    dir.join(format!("table-n{}-{}.bin", spec.n, spec.fingerprint()))
}

/// Loads the cached table for `spec` from `dir`, building and storing it
/// when absent or unreadable.
pub fn load_or_build(dir: &Path, spec: &GridSpec) -> Result<DPGrid> {
    let path = cache_path(dir, spec);
    if let Ok(g) = DPGrid::load_expecting(&path, spec.n) {
        return Ok(g);
    }
    let g = build(spec)?;
    fs::create_dir_all(dir)?;
    g.persist(&path)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> GridSpec {
        GridSpec {
            n: 20,
            x_lo: -60,
            x_hi: 60,
            iterations: 5,
            prawitz: PrawitzConfig { panels: 32, t_multipliers: vec![2.0, 3.0], ..PrawitzConfig::default() },
            seed_a_stride: 5,
            seed_x_stride: 10,
            ..GridSpec::desk()
        }
    }

    #[test]
    fn ceil_units_is_exact() {
        assert_eq!(ceil_units(0.5, 200), 100);
        assert_eq!(ceil_units(0.3, 200), 60); // the double 0.3 lies below 3/10
        assert_eq!(ceil_units(0.1, 200), 21); // and 0.1 above 1/10
        assert_eq!(ceil_units(-3.0, 200), -600);
        assert_eq!(ceil_units(0.0, 7), 0);
        assert_eq!(ceil_units(1.0 / 3.0, 3), 1);
        assert_eq!(ceil_units(f64::from_bits(0.5f64.to_bits() + 1), 200), 101);
    }

    #[test]
    fn query_rounding_and_clamps() {
        let mut g = DPGrid::constant(10, -30, 30, 0.0);
        for (i, v) in g.values.iter_mut().enumerate() {
            *v = 1.0 / (1.0 + i as f64);
        }
        assert_eq!(g.query(0.5, 10.0).unwrap(), 0.0);
        assert_eq!(g.query(0.5, -10.0).unwrap(), g.at(5, 0));
        assert_eq!(g.query(0.45, 0.05).unwrap(), g.at(5, 31));
        assert!(g.query(1.5, 0.0).is_err());
        assert!(g.query(0.0, 0.0).is_err());
    }

    #[test]
    fn zero_table_is_a_fixpoint() {
        let g = DPGrid::constant(10, -30, 30, 0.0);
        let r = refine(&g);
        assert!(r.values.iter().all(|&v| v == 0.0));
        assert_eq!(r.iterations_done(), 1);
    }

    #[test]
    fn initial_table_invariants() {
        let g = build_initial(&small_spec()).unwrap();
        assert!(g.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(g.is_monotone());
        // X = ε₁ has P(X ≥ 1 + β) = 0, so the bound at a = 1 must be tiny
        assert!(g.query(1.0, 1.0 + g.beta()).unwrap() <= 0.5);
        assert_eq!(g.query(0.5, 0.0).unwrap().max(0.5), g.query(0.5, 0.0).unwrap());
    }

    #[test]
    fn refinement_is_monotone_and_preserves_order() {
        let g0 = build_initial(&small_spec()).unwrap();
        let g1 = refine(&g0);
        let g2 = refine(&g1);
        for (a, b) in g0.values.iter().zip(&g1.values) {
            assert!(b >= a);
        }
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!(b >= a);
        }
        assert!(g2.is_monotone());
    }

    #[test]
    fn cell_sup_matches_sampling() {
        for &x in &[-2.5, -1.0, -0.3, 0.0, 0.7, 1.0, 1.6] {
            for &(a0, a1) in &[(0.0, 0.1), (0.3, 0.45), (0.6, 0.9), (0.9, 1.0)] {
                let one = a1 == 1.0;
                for c in [-1.0, 1.0] {
                    let sup = cell_sup(Interval::point(x), c, Interval::point(a0), Interval::point(a1), one);
                    for s in 0..=200 {
                        let a: f64 = a0 + (a1 - a0) * s as f64 / 200.0;
                        if a >= 1.0 {
                            continue;
                        }
                        let v = (x + c * a) / (1.0 - a * a).sqrt();
                        assert!(v <= sup + 1e-12, "x={x} c={c} a={a} v={v} sup={sup}");
                    }
                }
            }
        }
    }

    #[test]
    fn persistence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = refine(&build_initial(&small_spec()).unwrap());
        let p = dir.path().join("t.bin");
        g.persist(&p).unwrap();
        let back = DPGrid::load(&p).unwrap();
        assert_eq!(back, g);
        assert!(back.values.iter().zip(&g.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(matches!(DPGrid::load_expecting(&p, 21), Err(Error::Version(_))));
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(DPGrid::load(&p), Err(Error::Checksum)));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let spec = GridSpec { memory_budget_bytes: 1000, ..small_spec() };
        assert!(matches!(build_initial(&spec), Err(Error::Resource(_))));
    }
}
