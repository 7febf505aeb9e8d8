//! Periodic hulls, difference kernels and the finitary density-increment
//! machinery for k-sum-free sets of positive integers.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_k, invalid, Error, Result};
use crate::nat::{rational_string, FiniteSet, Nat, Rational};
use crate::sumfree::{is_k_sum_free, u_witness};

/// Largest modulus handled by residue-level computations.
pub const DEFAULT_MODULUS_CAP: u64 = 1 << 24;

/// Largest window enumerated element by element when expanding a periodic set.
pub const DEFAULT_WINDOW_CAP: u64 = 10_000_000;

/// The Q-periodic set `{n : n mod Q in residues}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueSet {
    modulus: u64,
    residues: BTreeSet<u64>,
}

impl ResidueSet {
    pub fn new(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid("modulus must be at least 1"));
        }
        let residues: BTreeSet<u64> = residues.into_iter().collect();
        if let Some(&r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(invalid(format!("residue {r} is not below the modulus {modulus}")));
        }
        Ok(ResidueSet { modulus, residues })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &BTreeSet<u64> {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn contains_residue(&self, r: u64) -> bool {
        self.residues.contains(&r)
    }

    /// Membership of an integer in the periodic set.
    pub fn contains(&self, n: &Nat) -> bool {
        self.contains_residue(residue(n.get(), self.modulus))
    }

    /// Natural density `|residues| / Q`.
    pub fn density(&self) -> Rational {
        Rational::new(BigInt::from(self.len()), BigInt::from(self.modulus))
    }

    /// Elements of the periodic set in `[1, n]`.
    pub fn window(&self, n: u64) -> Result<Vec<u64>> {
        if n > DEFAULT_WINDOW_CAP {
            return Err(Error::ResourceLimit {
                what: "periodic window",
                required: n.to_string(),
                cap: DEFAULT_WINDOW_CAP.to_string(),
            });
        }
        Ok((1..=n).filter(|v| self.contains_residue(v % self.modulus)).collect())
    }

    fn check_cap(&self) -> Result<()> {
        if self.modulus > DEFAULT_MODULUS_CAP {
            return Err(Error::ResourceLimit {
                what: "residue modulus",
                required: self.modulus.to_string(),
                cap: DEFAULT_MODULUS_CAP.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.residues.iter().map(u64::to_string).collect();
        write!(f, "{{{}}} mod {}", items.join(","), self.modulus)
    }
}

fn residue(n: &BigUint, q: u64) -> u64 {
    (n % q).to_u64().expect("residue below a u64 modulus")
}

/// `|A ∩ [1, n]| / n`.
pub fn density(set: &FiniteSet, n: &Nat) -> Rational {
    Rational::new(BigInt::from(set.count_le(n)), n.to_bigint())
}

/// Residues mod `q` of the elements of `A ∩ [1, n0]`.
pub fn periodic_hull(set: &FiniteSet, n0: &Nat, q: u64) -> Result<ResidueSet> {
    if q == 0 {
        return Err(invalid("modulus must be at least 1"));
    }
    ResidueSet::new(q, set.truncate(n0).iter().map(|a| residue(a.get(), q)))
}

/// Layered `count`-fold sumsets mod Q. `layers[j][s]` holds the index (into
/// the residue list) of a last summand reaching `s` with `j` summands.
fn sumset_layers(r: &ResidueSet, count: usize) -> Vec<Vec<Option<u32>>> {
    let q = r.modulus as usize;
    let residues: Vec<u64> = r.residues.iter().copied().collect();
    let mut layers = Vec::with_capacity(count + 1);
    let mut base = vec![None; q];
    base[0] = Some(u32::MAX);
    layers.push(base);
    for _ in 0..count {
        let prev = layers.last().expect("layer");
        let mut next: Vec<Option<u32>> = vec![None; q];
        for (s, hit) in prev.iter().enumerate() {
            if hit.is_none() {
                continue;
            }
            for (idx, &t) in residues.iter().enumerate() {
                let v = (s + t as usize) % q;
                if next[v].is_none() {
                    next[v] = Some(idx as u32);
                }
            }
        }
        layers.push(next);
    }
    layers
}

/// Whether no k residues of R (repetition allowed) sum to a residue of R.
pub fn is_residue_k_sum_free(r: &ResidueSet, k: usize) -> Result<bool> {
    Ok(residue_violation(r, k)?.is_none())
}

/// A residue-level violation lifted to integers: representatives `x_j` in
/// `[1, Q]` with `x = x_1 + ... + x_k <= kQ` and `x mod Q` in R.
pub fn residue_violation(r: &ResidueSet, k: usize) -> Result<Option<(Vec<u64>, u64)>> {
    check_k(k)?;
    r.check_cap()?;
    let layers = sumset_layers(r, k);
    let residues: Vec<u64> = r.residues.iter().copied().collect();
    let Some(&target) = residues.iter().find(|&&t| layers[k][t as usize].is_some()) else {
        return Ok(None);
    };
    let q = r.modulus;
    let mut reps = Vec::with_capacity(k);
    let mut s = target;
    for j in (1..=k).rev() {
        let idx = layers[j][s as usize].expect("reachable residue") as usize;
        let t = residues[idx];
        reps.push(if t == 0 { q } else { t });
        s = (s + q - t) % q;
    }
    reps.sort_unstable();
    let total = reps.iter().sum();
    Ok(Some((reps, total)))
}

/// `D = {r in R : r + t_1 + ... + t_{k-1} not in R for all t_j in R}`.
///
/// Membership only depends on residues since R is periodic and each `t_j`
/// ranges over a full residue class.
pub fn difference_kernel(r: &ResidueSet, k: usize) -> Result<ResidueSet> {
    check_k(k)?;
    r.check_cap()?;
    let q = r.modulus;
    let layers = sumset_layers(r, k - 1);
    let shifts: Vec<u64> = (0..q).filter(|&s| layers[k - 1][s as usize].is_some()).collect();
    let kernel = r
        .residues
        .iter()
        .copied()
        .filter(|&x| shifts.iter().all(|&s| !r.contains_residue((x + s) % q)));
    ResidueSet::new(q, kernel)
}

/// Divisors of `q` in increasing order.
pub fn divisors(q: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= q {
        if q % d == 0 {
            small.push(d);
            if d != q / d {
                large.push(q / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// An AP `x, x+m, ..., x+(i-1)m` inside `A ∩ [1, n0]` with `m | Q`: smallest
/// `m` first, then smallest `x`.
pub fn find_ap(set: &FiniteSet, n0: &Nat, i: u64, q: u64) -> Result<Option<(Nat, u64)>> {
    if i == 0 || q == 0 {
        return Err(invalid("find_ap needs i >= 1 and Q >= 1"));
    }
    let window = set.truncate(n0);
    for m in divisors(q) {
        for x in &window {
            let hit = (1..i).all(|j| window.contains_big(&(x.get() + BigUint::from(j) * m)));
            if hit {
                return Ok(Some((x.clone(), m)));
            }
        }
    }
    Ok(None)
}

/// `(i + k - 2) / (i(k+1) + k - 3)`.
pub fn ap_ratio(k: usize, i: u64) -> Rational {
    let k = BigInt::from(k);
    let i = BigInt::from(i);
    Rational::new(&i + &k - 2, &i * (&k + 1) + &k - 3)
}

/// Minimal `i >= 1` with `ap_ratio(k, i) <= 1/(k+1) + eps/4`.
pub fn choose_i(k: usize, eps: &Rational) -> Result<u64> {
    check_k(k)?;
    if !eps.is_positive() {
        return Err(invalid("eps must be positive"));
    }
    // ap_ratio(k, i) - 1/(k+1) = (k-1)^2 / ((k+1)(i(k+1) + k - 3))
    let kk = BigInt::from(k);
    let need = Rational::from_integer(BigInt::from(4) * (&kk - 1) * (&kk - 1))
        / (Rational::from_integer(&kk + 1) * eps);
    let i = ((need - Rational::from_integer(&kk - 3)) / Rational::from_integer(&kk + 1)).ceil();
    let i = i.to_integer().max(BigInt::one());
    i.to_u64().ok_or_else(|| Error::ResourceLimit {
        what: "AP length",
        required: i.to_string(),
        cap: u64::MAX.to_string(),
    })
}

/// Upper density on multiples of a periodic set: 1 when the zero class is
/// present, 0 otherwise (every `N!·n` is divisible by Q once `Q | N!`).
pub fn upper_density_on_multiples_periodic(r: &ResidueSet) -> Rational {
    if r.contains_residue(0) {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// A finite set together with the range on which it is known. With no
/// horizon the set is taken to be all of A.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonSet {
    pub set: FiniteSet,
    pub horizon: Option<Nat>,
}

impl HorizonSet {
    pub fn complete(set: FiniteSet) -> Self {
        HorizonSet { set, horizon: None }
    }

    pub fn truncated(set: FiniteSet, horizon: Nat) -> Self {
        HorizonSet {
            set: set.truncate(&horizon),
            horizon: Some(horizon),
        }
    }

    pub fn covers(&self, n: &Nat) -> bool {
        self.horizon.as_ref().map_or(true, |h| n <= h)
    }

    pub fn density(&self, n: &Nat) -> Result<Rational> {
        if !self.covers(n) {
            return Err(invalid(format!("n = {n} is beyond the data horizon")));
        }
        Ok(density(&self.set, n))
    }
}

fn check_schedule(
    a: &HorizonSet,
    n0: &Nat,
    schedule: &[Nat],
    ratio: &Rational,
    needed: &BigUint,
) -> Result<()> {
    if BigUint::from(schedule.len()) < *needed {
        return Err(invalid(format!(
            "schedule has {} terms but must reach index k*n0 = {needed}",
            schedule.len()
        )));
    }
    let mut prev = n0;
    for (j, n) in schedule.iter().enumerate() {
        if n.to_rational() < ratio * prev.to_rational() {
            return Err(invalid(format!(
                "schedule growth fails at n_{}: {n} < {} * {prev}",
                j + 1,
                crate::nat::fmt_rational(ratio)
            )));
        }
        prev = n;
    }
    if let Some(last) = schedule.last() {
        if !a.covers(last) {
            return Err(invalid(format!("data horizon does not cover n = {last}")));
        }
    }
    Ok(())
}

fn k_times(k: usize, n: &Nat) -> BigUint {
    BigUint::from(k) * n.get()
}

/// First `l` in `1..=limit` with `d_{n_l}(A) <= bound`.
fn first_drop(a: &HorizonSet, schedule: &[Nat], limit: usize, bound: &Rational) -> Result<Option<(usize, Rational)>> {
    for (idx, n) in schedule.iter().take(limit).enumerate() {
        let d = a.density(n)?;
        if &d <= bound {
            return Ok(Some((idx + 1, d)));
        }
    }
    Ok(None)
}

/// The full input of one density-increment step, kept for replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlsInstance {
    pub set: HorizonSet,
    pub k: usize,
    pub n0: Nat,
    pub modulus: u64,
    pub i: u64,
    #[serde(with = "rational_string")]
    pub eps: Rational,
    pub schedule: Vec<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlsOutcome {
    PeriodicContainment { hull: ResidueSet },
    DensityDrop {
        index: usize,
        density: Rational,
        ap_start: Nat,
        ap_difference: u64,
    },
    ApNotFound { kernel: ResidueSet },
    Falsified(Box<FlsInstance>),
}

impl FlsOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            FlsOutcome::PeriodicContainment { .. } => "periodic-containment",
            FlsOutcome::DensityDrop { .. } => "density-drop",
            FlsOutcome::ApNotFound { .. } => "ap-not-found",
            FlsOutcome::Falsified(_) => "falsified",
        }
    }
}

/// One step of the finitary density-increment argument.
///
/// Either `A_{n0}` sits in a Q-periodic k-sum-free set, or an AP of length
/// `i` with difference dividing Q avoids the kernel and some `n_l` with
/// `l <= k n0` has density at most `1/(k+1) + eps/2`.
pub fn fls_step(instance: &FlsInstance) -> Result<FlsOutcome> {
    let FlsInstance { set: a, k, n0, modulus: q, i, eps, schedule } = instance;
    let (k, q, i) = (*k, *q, *i);
    check_k(k)?;
    if q == 0 || i == 0 {
        return Err(invalid("Q and i must be at least 1"));
    }
    if !eps.is_positive() {
        return Err(invalid("eps must be positive"));
    }
    if !a.covers(n0) {
        return Err(invalid("data horizon does not cover n0"));
    }
    if !is_k_sum_free(&a.set, k)? {
        return Err(invalid(format!("A is not {k}-sum-free")));
    }
    let kr = Rational::from_integer(BigInt::from(k));
    let base = Rational::one() / (&kr + Rational::one());
    let d0 = a.density(n0)?;
    if d0 < &base + eps {
        return Err(invalid(format!(
            "density hypothesis fails: d_n0(A) = {} < 1/(k+1) + eps",
            crate::nat::fmt_rational(&d0)
        )));
    }
    let ratio = Rational::from_integer(BigInt::from(16 * k)) / eps;
    let needed = k_times(k, n0);
    check_schedule(a, n0, schedule, &ratio, &needed)?;

    let hull = periodic_hull(&a.set, n0, q)?;
    if is_residue_k_sum_free(&hull, k)? {
        return Ok(FlsOutcome::PeriodicContainment { hull });
    }
    let kernel = difference_kernel(&hull, k)?;
    let rest = a.set.truncate(n0).filter(|v| !kernel.contains(v));
    let Some((x, m)) = find_ap(&rest, n0, i, q)? else {
        return Ok(FlsOutcome::ApNotFound { kernel });
    };
    let limit = needed.to_usize().unwrap_or(usize::MAX);
    let bound = base + eps / Rational::from_integer(BigInt::from(2));
    match first_drop(a, schedule, limit, &bound)? {
        Some((index, density)) => Ok(FlsOutcome::DensityDrop {
            index,
            density,
            ap_start: x,
            ap_difference: m,
        }),
        None => Ok(FlsOutcome::Falsified(Box::new(instance.clone()))),
    }
}

/// Result of checking that the kernel translates in the proof are disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTranslates {
    pub summands: Vec<u64>,
    pub total: u64,
    pub disjoint: bool,
    pub kernel_count: usize,
    /// `(k+1)|D_{n0}| <= n0 + (k-1)kQ`.
    pub count_bound_holds: bool,
}

/// For a hull R that is not k-sum-free, takes a violation `x_1+...+x_k = x`
/// and checks that `D, D + x_1+...+x_{k-1}, D + x + x_1+...+x_{k-2}, ...,
/// D + (k-1)x` are pairwise disjoint on `D ∩ [1, n0]`. `None` when R is
/// k-sum-free.
pub fn kernel_translates(set: &FiniteSet, n0: u64, q: u64, k: usize) -> Result<Option<KernelTranslates>> {
    let n0_nat = Nat::new(BigUint::from(n0))?;
    let hull = periodic_hull(set, &n0_nat, q)?;
    let Some((xs, x)) = residue_violation(&hull, k)? else {
        return Ok(None);
    };
    let kernel = difference_kernel(&hull, k)?;
    let window = kernel.window(n0)?;
    let mut shifts = vec![0u64];
    for s in 0..k {
        shifts.push(s as u64 * x + xs[..k - 1 - s].iter().sum::<u64>());
    }
    let mut seen: HashSet<u64> = HashSet::with_capacity(window.len() * shifts.len());
    let mut disjoint = true;
    for &shift in &shifts {
        for &d in &window {
            if !seen.insert(d + shift) {
                disjoint = false;
            }
        }
    }
    let lhs = (k as u64 + 1) * window.len() as u64;
    let rhs = n0 + (k as u64 - 1) * k as u64 * q;
    Ok(Some(KernelTranslates {
        summands: xs,
        total: x,
        disjoint,
        kernel_count: window.len(),
        count_bound_holds: lhs <= rhs,
    }))
}

/// Which way the B-set looks along the progression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `d < x`: `B = {a : a + jm in A}`.
    Forward,
    /// `d > x`: `B = {a : a - jm in A}`.
    Backward,
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Input of the density-drop lemma: an AP `x, x+m, ..., x+(i-1)m` in
/// `A_{n0}`, a difference `d` in `A_{n0} - (k-1)A_{n0}` with `d ≡ x (mod m)`,
/// and a schedule with `n_{j+1} >= n_j / eps`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityDropInstance {
    pub set: HorizonSet,
    pub k: usize,
    pub n0: Nat,
    pub x: Nat,
    pub m: u64,
    pub i: u64,
    #[serde(with = "bigint_string")]
    pub d: BigInt,
    #[serde(with = "rational_string")]
    pub eps: Rational,
    pub schedule: Vec<Nat>,
}

impl DensityDropInstance {
    pub fn orientation(&self) -> Result<Orientation> {
        let x = self.x.to_bigint();
        match self.d.cmp(&x) {
            std::cmp::Ordering::Less => Ok(Orientation::Forward),
            std::cmp::Ordering::Greater => Ok(Orientation::Backward),
            std::cmp::Ordering::Equal => Err(invalid("d equals x, impossible when A is k-sum-free")),
        }
    }

    pub fn b_set(&self) -> Result<FiniteSet> {
        Ok(b_set(&self.set.set, self.m, self.i, self.orientation()?))
    }

    /// `ap_ratio(k, i) + 4k eps`.
    pub fn bound(&self) -> Rational {
        ap_ratio(self.k, self.i) + Rational::from_integer(BigInt::from(4 * self.k)) * &self.eps
    }

    /// Checks every hypothesis, naming the first that fails.
    pub fn check_hypotheses(&self) -> Result<()> {
        let k = self.k;
        check_k(k)?;
        if self.m == 0 || self.i == 0 {
            return Err(invalid("m and i must be at least 1"));
        }
        if !self.eps.is_positive() {
            return Err(invalid("eps must be positive"));
        }
        if !self.set.covers(&self.n0) {
            return Err(invalid("data horizon does not cover n0"));
        }
        if !is_k_sum_free(&self.set.set, k)? {
            return Err(invalid(format!("A is not {k}-sum-free")));
        }
        let window = self.set.set.truncate(&self.n0);
        for j in 0..self.i {
            let v = self.x.get() + BigUint::from(j) * self.m;
            if !window.contains_big(&v) {
                return Err(invalid(format!("AP term {v} is not in A_n0")));
            }
        }
        if !(&self.d - self.x.to_bigint()).is_multiple_of(&BigInt::from(self.m)) {
            return Err(invalid("d is not congruent to x mod m"));
        }
        if u_witness(&window, &self.d, k)?.is_none() {
            return Err(invalid("d is not in A_n0 - (k-1)A_n0"));
        }
        self.orientation()?;
        let ratio = Rational::one() / &self.eps;
        check_schedule(&self.set, &self.n0, &self.schedule, &ratio, &k_times(k, &self.n0))
    }

    /// First `l <= k n0` with `d_{n_l}(A) <= bound()`, after checking hypotheses.
    pub fn drop_index(&self) -> Result<Option<(usize, Rational)>> {
        self.check_hypotheses()?;
        let limit = k_times(self.k, &self.n0).to_usize().unwrap_or(usize::MAX);
        first_drop(&self.set, &self.schedule, limit, &self.bound())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// `{a in A : a ± jm in A for some j in 1..=i}`, sign by orientation.
pub fn b_set(set: &FiniteSet, m: u64, i: u64, orientation: Orientation) -> FiniteSet {
    set.filter(|a| {
        (1..=i).any(|j| {
            let step = BigUint::from(j) * m;
            match orientation {
                Orientation::Forward => set.contains_big(&(a.get() + &step)),
                Orientation::Backward => a.get() > &step && set.contains_big(&(a.get() - &step)),
            }
        })
    })
}

/// True iff some scheduled density with `l <= k n0` is at most
/// `ap_ratio(k, i) + 4k eps`. Hypothesis failures are errors.
pub fn verify_density_drop(instance: &DensityDropInstance) -> Result<bool> {
    Ok(instance.drop_index()?.is_some())
}

/// `(i+1)|A_n| - (i-1)|B_n| <= n + (k-1)x + (i-1)m` with the forward B-set.
pub fn check_inequality_star(set: &FiniteSet, n: &Nat, x: &Nat, m: u64, i: u64, k: usize) -> Result<bool> {
    check_k(k)?;
    if m == 0 || i == 0 {
        return Err(invalid("m and i must be at least 1"));
    }
    if !is_k_sum_free(set, k)? {
        return Err(invalid(format!("A is not {k}-sum-free")));
    }
    for j in 0..i {
        let v = x.get() + BigUint::from(j) * m;
        if !set.contains_big(&v) {
            return Err(invalid(format!("AP term {v} is not in A")));
        }
    }
    let b = b_set(set, m, i, Orientation::Forward);
    let i_big = BigInt::from(i);
    let lhs = (&i_big + 1) * BigInt::from(set.count_le(n)) - (&i_big - 1) * BigInt::from(b.count_le(n));
    let rhs = n.to_bigint() + BigInt::from(k - 1) * x.to_bigint() + (&i_big - 1) * BigInt::from(m);
    Ok(lhs <= rhs)
}
