//! Exact maximisation of `x ↦ |{a in A : {a·x} in (lo, hi)}|` over the circle.
//!
//! The objective is piecewise constant with breakpoints `(e + j)/a` for
//! `e in {lo, hi}` and `0 <= j < a`. [`reference_sweep`] evaluates every cell
//! of that mesh. [`fast_sweep`] reaches the same leftmost maximising cell by
//! branch and bound over dyadic intervals, classifying each element as inside,
//! outside or straddling on the whole interval, and only sweeping breakpoints
//! exactly once few elements straddle. For elements below `2^22` the bounds
//! of every interval at the finest useful level come from one flat pass.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::nat::{FiniteSet, Rational};

/// Largest number of breakpoints the reference sweep will materialise.
pub const REFERENCE_BREAKPOINT_CAP: u64 = 2_000_000;

/// Elements must be below `2^FAST_ELEMENT_BITS` for the fast path.
pub const FAST_ELEMENT_BITS: u32 = 40;
/// `lo`/`hi` denominators must be below `2^20` for the fast path.
pub const FAST_DENOM_LIMIT: u64 = 1 << 20;

const MAX_LEVEL: u32 = 60;
const LEAF_STRADDLERS: usize = 8;
const SEED_BITS: u32 = 12;
/// Below `2^GRID_ELEMENT_BITS` the bounds for every dyadic interval of the
/// finest useful level are computed in one flat pass instead of a tree walk.
const GRID_ELEMENT_BITS: u32 = 22;
const GRID_EXTRA: u32 = 1;
const LANES: usize = 16;
const TILE: usize = 4096;

/// The open target arc `(lo, hi)` with a common denominator.
#[derive(Clone, Copy, Debug)]
pub struct Arc {
    pub lo_num: u64,
    pub hi_num: u64,
    pub den: u64,
}

impl Arc {
    pub fn from_rationals(lo: &Rational, hi: &Rational) -> Option<Arc> {
        let den = lo.denom().lcm(hi.denom());
        let lo_num = (lo * Rational::from_integer(den.clone())).to_integer();
        let hi_num = (hi * Rational::from_integer(den.clone())).to_integer();
        Some(Arc {
            lo_num: lo_num.to_u64()?,
            hi_num: hi_num.to_u64()?,
            den: den.to_u64()?,
        })
    }

    fn lo(&self) -> Rational {
        Rational::new(self.lo_num.into(), self.den.into())
    }

    fn hi(&self) -> Rational {
        Rational::new(self.hi_num.into(), self.den.into())
    }
}

/// The maximum of the objective and the open mesh cell `(left, right)` where
/// it is first attained, in circle order starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub value: usize,
    pub left: Rational,
    pub right: Rational,
}

impl SweepOutcome {
    /// Midpoint of the maximising cell, reduced into `[0, 1)`.
    pub fn midpoint(&self) -> Rational {
        let mid = (&self.left + &self.right) / Rational::from_integer(2.into());
        frac(&mid)
    }
}

pub(crate) fn frac(x: &Rational) -> Rational {
    x - Rational::from_integer(x.floor().to_integer())
}

/// `{a·x} in (lo, hi)`, exactly.
pub(crate) fn lands_in(a: &BigInt, x: &Rational, lo: &Rational, hi: &Rational) -> bool {
    let y = frac(&(Rational::from_integer(a.clone()) * x));
    &y > lo && &y < hi
}

/// Evaluates the objective at every midpoint of consecutive breakpoints.
pub fn reference_sweep(values: &FiniteSet, lo: &Rational, hi: &Rational) -> Result<SweepOutcome> {
    let total: BigInt = values.iter().map(|a| a.to_bigint()).sum::<BigInt>() * 2;
    if total > BigInt::from(REFERENCE_BREAKPOINT_CAP) {
        return Err(Error::ResourceLimit {
            what: "breakpoint sweep",
            required: total.to_string(),
            cap: REFERENCE_BREAKPOINT_CAP.to_string(),
        });
    }
    let elems: Vec<BigInt> = values.iter().map(|a| a.to_bigint()).collect();
    let mut points = Vec::new();
    for a in &elems {
        let a_r = Rational::from_integer(a.clone());
        let count = a.to_u64().unwrap();
        for e in [lo, hi] {
            for j in 0..count {
                points.push((e + Rational::from_integer(j.into())) / &a_r);
            }
        }
    }
    points.sort();
    points.dedup();
    let n = points.len();
    let mut best: Option<SweepOutcome> = None;
    for i in 0..n {
        let left = points[i].clone();
        let right = if i + 1 < n {
            points[i + 1].clone()
        } else {
            &points[0] + Rational::from_integer(1.into())
        };
        let mid = frac(&((&left + &right) / Rational::from_integer(2.into())));
        let value = elems.iter().filter(|a| lands_in(a, &mid, lo, hi)).count();
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(SweepOutcome { value, left, right });
        }
    }
    Ok(best.expect("nonempty set has breakpoints"))
}

/// Whether [`fast_sweep`] can handle this input.
pub fn fast_path_applies(values: &FiniteSet, arc: &Arc) -> bool {
    arc.den < FAST_DENOM_LIMIT
        && arc.lo_num < arc.hi_num
        && arc.hi_num <= arc.den
        && values
            .max()
            .and_then(|m| m.to_u64())
            .is_some_and(|m| m < (1u64 << FAST_ELEMENT_BITS))
}

#[derive(Clone, Copy, Debug)]
enum CellStart {
    Dyadic { p: u64, level: u32 },
    Break { num: u128, den: u128 },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Inside,
    Outside,
    Straddles,
}

struct Search<'a> {
    values: &'a [u64],
    lo: u128,
    hi: u128,
    den: u128,
    best_value: usize,
    best_start: Option<CellStart>,
}

/// Branch-and-bound sweep; returns the same cell as [`reference_sweep`].
pub fn fast_sweep(values: &FiniteSet, arc: &Arc) -> SweepOutcome {
    fast_sweep_with(values, arc, true)
}

fn fast_sweep_with(values: &FiniteSet, arc: &Arc, allow_grid: bool) -> SweepOutcome {
    assert!(fast_path_applies(values, arc), "fast sweep preconditions");
    let elems = values.to_u64s().expect("checked above");
    let mut search = Search {
        values: &elems,
        lo: arc.lo_num as u128,
        hi: arc.hi_num as u128,
        den: arc.den as u128,
        best_value: 0,
        best_start: None,
    };
    search.best_value = search.seed();
    let max = *elems.last().expect("nonempty");
    if allow_grid && max < (1u64 << GRID_ELEMENT_BITS) && elems.len() <= usize::from(u16::MAX) {
        search.grid();
    } else {
        search.descend(0, 0, 0, &elems);
    }
    let start = search.best_start.expect("a cell reaching the seed value exists");
    canonical_cell(values, arc, start, search.best_value)
}

impl Search<'_> {
    /// Best value over a grid of dyadic sample points; a lower bound on the
    /// maximum cell value.
    fn seed(&self) -> usize {
        let bits = SEED_BITS + 1;
        let mask = (1u128 << bits) - 1;
        let mut best = 0;
        for j in 0..(1u128 << SEED_BITS) {
            let num = 2 * j + 1;
            let v = self
                .values
                .iter()
                .filter(|&&a| {
                    let s = (a as u128 * num) & mask;
                    s * self.den > self.lo << bits && s * self.den < self.hi << bits
                })
                .count();
            best = best.max(v);
        }
        best
    }

    fn pruned(&self, upper: usize) -> bool {
        match self.best_start {
            None => upper < self.best_value,
            Some(_) => upper <= self.best_value,
        }
    }

    fn offer(&mut self, value: usize, start: CellStart) {
        let take = match self.best_start {
            None => value >= self.best_value,
            Some(_) => value > self.best_value,
        };
        if take {
            self.best_value = value;
            self.best_start = Some(start);
        }
    }

    /// Image of `[p/2^L, (p+1)/2^L]` under `x ↦ a·x mod 1` against `(lo, hi)`.
    #[inline]
    fn classify(&self, a: u64, p: u64, level: u32) -> Class {
        if level < 64 && a >= (1u64 << level) {
            return Class::Straddles;
        }
        let mask = (1u128 << level) - 1;
        let s = ((a as u128) * (p as u128)) & mask;
        let start = s * self.den;
        let len = a as u128 * self.den;
        let lo = self.lo << level;
        let hi = self.hi << level;
        let one = self.den << level;
        if start > lo && start + len < hi {
            Class::Inside
        } else if start + len <= lo || (start >= hi && start + len <= one + lo) {
            Class::Outside
        } else {
            Class::Straddles
        }
    }

    /// Upper bounds on every interval `[j/2^L, (j+1)/2^L]` with `2^L > 2·max`,
    /// so each image is shorter than half a turn; surviving intervals are
    /// searched further, left to right.
    fn grid(&mut self) {
        let max = *self.values.last().expect("nonempty");
        let level = (64 - max.leading_zeros() + GRID_EXTRA).max(4);
        let size = 1usize << level;
        let mask = (size - 1) as u32;
        // image [y, y+a] over 2^L misses (lo, hi) iff
        // y + a <= after_lo, or y >= from_hi and y + a <= wrap_lo
        let after_lo = ((self.lo << level) / self.den) as u32;
        let from_hi = ((self.hi << level).div_ceil(self.den)) as u32;
        let wrap_lo = (((self.den + self.lo) << level) / self.den) as u32;
        let mut upper = vec![0u16; size];
        // tiles stay in L1 while every element is added in
        let lanes: Vec<([u32; LANES], u32, u32)> = self
            .values
            .iter()
            .map(|&a| {
                let a = a as u32;
                let offsets = std::array::from_fn(|t| a.wrapping_mul(t as u32) & mask);
                (offsets, a.wrapping_mul(LANES as u32) & mask, a)
            })
            .collect();
        for (tile_index, tile) in upper.chunks_mut(TILE).enumerate() {
            let tile_start = (tile_index * TILE) as u32;
            for (offsets, step, a) in &lanes {
                let a = *a;
                let mut base = a.wrapping_mul(tile_start) & mask;
                // wrapping ops cannot overflow here (everything is below 2^24
                // and counts stay below len); they keep the lane loop
                // vectorisable when overflow checks are on
                for chunk in tile.chunks_exact_mut(LANES) {
                    let chunk: &mut [u16; LANES] = chunk.try_into().expect("exact chunk");
                    for t in 0..LANES {
                        let y = base.wrapping_add(offsets[t]) & mask;
                        let end = y.wrapping_add(a);
                        let missed = (end <= after_lo) | ((y >= from_hi) & (end <= wrap_lo));
                        chunk[t] = chunk[t].wrapping_add(u16::from(!missed));
                    }
                    base = base.wrapping_add(*step) & mask;
                }
            }
        }
        let mut straddling = Vec::with_capacity(self.values.len());
        for (j, &u) in upper.iter().enumerate() {
            if self.pruned(usize::from(u)) {
                continue;
            }
            straddling.clear();
            let mut inside = 0;
            for &a in self.values {
                match self.classify(a, j as u64, level) {
                    Class::Inside => inside += 1,
                    Class::Outside => {}
                    Class::Straddles => straddling.push(a),
                }
            }
            self.descend(j as u64, level, inside, &straddling);
        }
    }

    fn descend(&mut self, p: u64, level: u32, inside: usize, straddling: &[u64]) {
        if self.pruned(inside + straddling.len()) {
            return;
        }
        let short = straddling.last().map_or(true, |&a| a < (1u64 << level));
        if level == MAX_LEVEL || (short && straddling.len() <= LEAF_STRADDLERS) {
            self.leaf(p, level, inside, straddling);
            return;
        }
        let mut next = Vec::with_capacity(straddling.len());
        for child in [2 * p, 2 * p + 1] {
            next.clear();
            let mut child_inside = inside;
            for &a in straddling {
                match self.classify(a, child, level + 1) {
                    Class::Inside => child_inside += 1,
                    Class::Outside => {}
                    Class::Straddles => next.push(a),
                }
            }
            self.descend(child, level + 1, child_inside, &next);
        }
    }

    /// Exact sweep of the breakpoints of the straddling elements inside
    /// `(p/2^L, (p+1)/2^L)`.
    fn leaf(&mut self, p: u64, level: u32, inside: usize, straddling: &[u64]) {
        let scale = 1u128 << level;
        let p128 = p as u128;
        let mut value = inside;
        // (num, den, delta): breakpoint num/den, +1 entering, -1 leaving
        let mut events: Vec<(u128, u128, i32)> = Vec::new();
        for &a in straddling {
            let a128 = a as u128;
            let s = (a128 * p128) & (scale - 1);
            let at_start = s * self.den;
            if at_start >= self.lo * scale && at_start < self.hi * scale {
                value += 1;
            }
            let whole = (a128 * p128) >> level;
            let den = a128 * self.den;
            for (e, delta) in [(self.lo, 1), (self.hi, -1)] {
                let first = whole.saturating_sub(1);
                for j in first..=whole + 1 {
                    if j >= a128 {
                        break;
                    }
                    let num = e + j * self.den;
                    let scaled = num * scale;
                    if scaled > p128 * den && scaled < (p128 + 1) * den {
                        events.push((num, den, delta));
                    }
                }
            }
        }
        events.sort_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
        self.offer(value, CellStart::Dyadic { p, level });
        let mut i = 0;
        while i < events.len() {
            let (num, den, _) = events[i];
            let mut delta = 0i64;
            while i < events.len() && events[i].0 * den == num * events[i].1 {
                delta += events[i].2 as i64;
                i += 1;
            }
            value = (value as i64 + delta) as usize;
            self.offer(value, CellStart::Break { num, den });
        }
    }
}

/// The mesh cell whose left end is the largest breakpoint `<= z`, where the
/// cell immediately right of `z` attains the maximum.
fn canonical_cell(values: &FiniteSet, arc: &Arc, start: CellStart, value: usize) -> SweepOutcome {
    let z = match start {
        CellStart::Dyadic { p, level } => {
            Rational::new(BigInt::from(p), BigInt::from(1u128 << level))
        }
        CellStart::Break { num, den } => Rational::new(BigInt::from(num), BigInt::from(den)),
    };
    let (lo, hi) = (arc.lo(), arc.hi());
    let mut left: Option<Rational> = None;
    let mut right: Option<Rational> = None;
    let mut first: Option<Rational> = None;
    for a in values {
        let a_int = a.to_bigint();
        let a_r = Rational::from_integer(a_int.clone());
        for e in [&lo, &hi] {
            let j = (&a_r * &z - e).floor().to_integer();
            if j >= BigInt::zero() {
                let bp = (e + Rational::from_integer(j.clone())) / &a_r;
                if left.as_ref().map_or(true, |l| &bp > l) {
                    left = Some(bp);
                }
            }
            let j1 = j + 1;
            if j1 < a_int {
                let j1 = if j1 < BigInt::zero() { BigInt::zero() } else { j1 };
                let bp = (e + Rational::from_integer(j1)) / &a_r;
                if right.as_ref().map_or(true, |r| &bp < r) {
                    right = Some(bp);
                }
            }
            let bp0 = e / &a_r;
            if first.as_ref().map_or(true, |f| &bp0 < f) {
                first = Some(bp0);
            }
        }
    }
    let one = Rational::from_integer(1.into());
    let first = first.expect("nonempty");
    let left = left.unwrap_or_else(|| Rational::zero());
    let right = right.unwrap_or_else(|| first + one);
    SweepOutcome { value, left, right }
}
