//! Finitely supported measures on N with exact rational weights, and the
//! block-averaged / contraction constructions built from uniform measures.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::nat::{fmt_rational, parse_rational, rat_int, FiniteSet, Nat, Rational};

/// Uniform measures on more points than this are refused.
pub const DEFAULT_SUPPORT_CAP: u64 = 10_000_000;

/// Finitely supported measure with strictly positive weights.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalMeasure {
    weights: BTreeMap<Nat, Rational>,
    mass: Rational,
}

impl RationalMeasure {
    pub fn zero() -> Self {
        RationalMeasure {
            weights: BTreeMap::new(),
            mass: Rational::zero(),
        }
    }

    /// Drops zero weights; rejects negative ones.
    pub fn from_weights(weights: BTreeMap<Nat, Rational>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        let mut mass = Rational::zero();
        for (p, w) in weights {
            if w < Rational::zero() {
                return Err(invalid(format!("negative weight {w} at {p}")));
            }
            if !w.is_zero() {
                mass += &w;
                kept.insert(p, w);
            }
        }
        Ok(RationalMeasure { weights: kept, mass })
    }

    pub fn point_mass(p: Nat) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(p, Rational::one());
        RationalMeasure {
            weights,
            mass: Rational::one(),
        }
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    pub fn support_max(&self) -> Option<&Nat> {
        self.weights.keys().next_back()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, p: &Nat) -> Rational {
        self.weights.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Nat, &Rational)> {
        self.weights.iter()
    }

    pub fn support(&self) -> FiniteSet {
        FiniteSet::new(self.weights.keys().cloned().collect())
    }

    /// `Σ_{a in A} weight(a)`.
    pub fn evaluate(&self, set: &FiniteSet) -> Rational {
        if set.len() < self.weights.len() {
            set.iter().filter_map(|a| self.weights.get(a)).sum()
        } else {
            self.weights
                .iter()
                .filter(|(p, _)| set.contains(p))
                .map(|(_, w)| w.clone())
                .sum()
        }
    }

    /// Recomputes the mass from the weights.
    pub fn recomputed_mass(&self) -> Rational {
        self.weights.values().sum()
    }

    /// Image under `x ↦ q·x`.
    pub fn pushforward_scale(&self, q: &Nat) -> RationalMeasure {
        RationalMeasure {
            weights: self
                .weights
                .iter()
                .map(|(p, w)| (p.checked_mul(q), w.clone()))
                .collect(),
            mass: self.mass.clone(),
        }
    }

    /// Lines `point num/den`, sorted by point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, w) in &self.weights {
            out.push_str(&format!("{p} {}\n", fmt_rational(w)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            let (p, w) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected `point weight`".into()))?;
            let p: Nat = p.parse().map_err(|e: Error| err(e.to_string()))?;
            let w = parse_rational(w).map_err(|e| err(e.to_string()))?;
            if weights.insert(p.clone(), w).is_some() {
                return Err(err(format!("duplicate point {p}")));
            }
        }
        RationalMeasure::from_weights(weights)
    }
}

/// Weight `1/n` on each of `1..=n`.
pub fn uniform_measure(n: &Nat) -> Result<RationalMeasure> {
    let count = n
        .to_u64()
        .filter(|&c| c <= DEFAULT_SUPPORT_CAP)
        .ok_or_else(|| Error::ResourceLimit {
            what: "uniform measure support",
            required: n.to_string(),
            cap: DEFAULT_SUPPORT_CAP.to_string(),
        })?;
    let w = Rational::new(1.into(), n.to_bigint());
    Ok(RationalMeasure {
        weights: (1..=count).map(|i| (Nat::from_u64(i), w.clone())).collect(),
        mass: Rational::one(),
    })
}

/// Pointwise convex combination. Coefficients must be nonnegative and sum to
/// exactly 1.
pub fn mix(coeffs: &[Rational], measures: &[RationalMeasure]) -> Result<RationalMeasure> {
    if coeffs.len() != measures.len() {
        return Err(invalid(format!(
            "{} coefficients for {} measures",
            coeffs.len(),
            measures.len()
        )));
    }
    if coeffs.iter().any(|c| c < &Rational::zero()) {
        return Err(invalid("mixture coefficients must be nonnegative"));
    }
    let total: Rational = coeffs.iter().sum();
    if !total.is_one() {
        return Err(invalid(format!("mixture coefficients sum to {total}, not 1")));
    }
    let mut weights: BTreeMap<Nat, Rational> = BTreeMap::new();
    let mut mass = Rational::zero();
    for (c, m) in coeffs.iter().zip(measures) {
        if c.is_zero() {
            continue;
        }
        for (p, w) in &m.weights {
            *weights.entry(p.clone()).or_insert_with(Rational::zero) += c * w;
        }
        mass += c * &m.mass;
    }
    Ok(RationalMeasure { weights, mass })
}

/// Index schedule for the block-averaged measure.
///
/// `n_sequence` holds `n_0 < n_1 < ... < n_{i_t}`; `block_ends` holds
/// `i_0 = 0, i_1, ..., i_t` (the implicit `i_{-1}` is `-1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuSchedule {
    n_sequence: Vec<Nat>,
    block_ends: Vec<usize>,
    eps: Rational,
    k: usize,
}

impl NuSchedule {
    /// Validates every growth condition:
    /// `n_{j+1} >= 16k/eps · n_j`, `i_{s+1} - i_s >= 2k/eps · n_{i_s}`, `t >= 2/eps`.
    pub fn new(n_sequence: Vec<Nat>, block_ends: Vec<usize>, eps: Rational, k: usize) -> Result<Self> {
        let s = NuSchedule::structural(n_sequence, block_ends, eps, k)?;
        let ratio = rat_int(16 * s.k as i64) / &s.eps;
        for (j, w) in s.n_sequence.windows(2).enumerate() {
            if w[1].to_rational() < &ratio * w[0].to_rational() {
                return Err(invalid(format!(
                    "n_{} = {} is below 16k/eps * n_{} = {}",
                    j + 1,
                    w[1],
                    j,
                    &ratio * w[0].to_rational()
                )));
            }
        }
        let block_ratio = rat_int(2 * s.k as i64) / &s.eps;
        for (idx, w) in s.block_ends.windows(2).enumerate() {
            let need = &block_ratio * s.n_sequence[w[0]].to_rational();
            if rat_int((w[1] - w[0]) as i64) < need {
                return Err(invalid(format!(
                    "i_{} - i_{} = {} is below 2k/eps * n_(i_{}) = {}",
                    idx + 1,
                    idx,
                    w[1] - w[0],
                    idx,
                    need
                )));
            }
        }
        let t = s.block_ends.len() - 1;
        if rat_int(t as i64) < rat_int(2) / &s.eps {
            return Err(invalid(format!("t = {t} is below 2/eps = {}", rat_int(2) / &s.eps)));
        }
        Ok(s)
    }

    /// Checks only the shape: increasing `n`, `i_0 = 0`, increasing block
    /// ends covering the sequence. For desk-scale schedules below the growth
    /// conditions.
    pub fn structural(n_sequence: Vec<Nat>, block_ends: Vec<usize>, eps: Rational, k: usize) -> Result<Self> {
        crate::error::check_k(k)?;
        if eps <= Rational::zero() {
            return Err(invalid("eps must be positive"));
        }
        if n_sequence.is_empty() || block_ends.first() != Some(&0) {
            return Err(invalid("schedule needs n_0 and i_0 = 0"));
        }
        if n_sequence.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_sequence must be strictly increasing"));
        }
        if block_ends.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("block indices must be strictly increasing"));
        }
        if *block_ends.last().unwrap() + 1 != n_sequence.len() {
            return Err(invalid(format!(
                "i_t = {} but n_sequence has {} entries",
                block_ends.last().unwrap(),
                n_sequence.len()
            )));
        }
        Ok(NuSchedule {
            n_sequence,
            block_ends,
            eps,
            k,
        })
    }

    /// Smallest valid schedule starting at `n0`: every inequality tight
    /// (rounded up) and `t = ceil(2/eps)`.
    pub fn minimal(n0: Nat, eps: Rational, k: usize, max_len: usize) -> Result<Self> {
        crate::error::check_k(k)?;
        if eps <= Rational::zero() {
            return Err(invalid("eps must be positive"));
        }
        let ratio = rat_int(16 * k as i64) / &eps;
        let block_ratio = rat_int(2 * k as i64) / &eps;
        let t = (rat_int(2) / &eps).ceil().to_integer();
        let t: usize = t.try_into().map_err(|_| invalid("t too large"))?;
        let mut ns = vec![n0];
        let mut ends = vec![0usize];
        for _ in 0..t {
            let last = *ends.last().unwrap();
            let gap = (&block_ratio * ns[last].to_rational()).ceil().to_integer();
            let end = usize::try_from(gap)
                .ok()
                .and_then(|g| last.checked_add(g.max(1)))
                .filter(|&e| e < max_len);
            let Some(end) = end else {
                return Err(Error::ResourceLimit {
                    what: "nu schedule length",
                    required: format!("more than {max_len}"),
                    cap: max_len.to_string(),
                });
            };
            while ns.len() <= end {
                let next = (&ratio * ns.last().unwrap().to_rational()).ceil().to_integer();
                ns.push(Nat::new(next.to_biguint().unwrap()).unwrap());
            }
            ends.push(end);
        }
        NuSchedule::new(ns, ends, eps, k)
    }

    pub fn n_sequence(&self) -> &[Nat] {
        &self.n_sequence
    }

    pub fn block_ends(&self) -> &[usize] {
        &self.block_ends
    }

    pub fn t(&self) -> usize {
        self.block_ends.len() - 1
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(index i, coefficient)` pairs such that `ν = Σ coeff_i · uniform(n_i)`.
    pub fn coefficients(&self) -> Vec<(usize, Rational)> {
        let t1 = rat_int(self.t() as i64 + 1);
        let mut out = Vec::new();
        let mut prev: i64 = -1;
        for &end in &self.block_ends {
            let width = end as i64 - prev;
            let c = Rational::one() / (&t1 * rat_int(width));
            for i in (prev + 1) as usize..=end {
                out.push((i, c.clone()));
            }
            prev = end as i64;
        }
        out
    }
}

/// `ν = (1/(t+1)) Σ_s ν_s`, `ν_s` the average of `uniform(n_i)` over block `s`.
///
/// Built from the tail sums `w(x) = Σ_{n_i >= x} c_i / n_i`, which are
/// constant on each `(n_{i-1}, n_i]`.
pub fn build_nu(schedule: &NuSchedule) -> Result<RationalMeasure> {
    let ns = schedule.n_sequence();
    let top = ns.last().unwrap();
    if top.to_u64().map_or(true, |t| t > DEFAULT_SUPPORT_CAP) {
        return Err(Error::ResourceLimit {
            what: "nu support",
            required: top.to_string(),
            cap: DEFAULT_SUPPORT_CAP.to_string(),
        });
    }
    let coeffs = schedule.coefficients();
    let mut tail = vec![Rational::zero(); ns.len() + 1];
    for (i, c) in coeffs.iter().rev() {
        tail[*i] = &tail[*i + 1] + c / ns[*i].to_rational();
    }
    let mut weights = BTreeMap::new();
    let mut from = 1u64;
    for (i, n) in ns.iter().enumerate() {
        let upto = n.to_u64().unwrap();
        for x in from..=upto {
            weights.insert(Nat::from_u64(x), tail[i].clone());
        }
        from = upto + 1;
    }
    let nu = RationalMeasure::from_weights(weights)?;
    debug_assert!(nu.mass().is_one());
    Ok(nu)
}

/// `μ_1 = ν(n_start)`, then `μ_{i+1} = k/(k+1) τ_*μ_i + 1/(k+1) ν(Q·M_i)` with
/// `τ(x) = Q·x` and `M_i` the support maximum of `μ_i`. Returns `μ_{i_max}`.
pub fn build_mu<F>(n_start: &Nat, i_max: usize, q: &Nat, k: usize, mut nu_provider: F) -> Result<RationalMeasure>
where
    F: FnMut(&Nat) -> Result<RationalMeasure>,
{
    crate::error::check_k(k)?;
    if i_max == 0 {
        return Err(invalid("i_max must be at least 1"));
    }
    let mut call = |n: &Nat| -> Result<RationalMeasure> {
        let nu = nu_provider(n)?;
        if !nu.mass().is_one() {
            return Err(invalid(format!("nu provider returned mass {} at {n}", nu.mass())));
        }
        if nu.support_max().map_or(true, |m| m < n) {
            return Err(invalid(format!("nu provider support ends below {n}")));
        }
        Ok(nu)
    };
    let mut mu = call(n_start)?;
    let k1 = rat_int(k as i64 + 1);
    let keep = rat_int(k as i64) / &k1;
    let fresh = Rational::one() / &k1;
    for _ in 1..i_max {
        let m = mu.support_max().expect("mass 1 has support").clone();
        let nu = call(&m.checked_mul(q))?;
        mu = mix(&[keep.clone(), fresh.clone()], &[mu.pushforward_scale(q), nu])?;
    }
    Ok(mu)
}

/// Minimal `i >= 1` with `(k/(k+1))^i <= 2·eps`.
pub fn contraction_index(k: usize, eps: &Rational) -> Result<usize> {
    crate::error::check_k(k)?;
    if eps <= &Rational::zero() {
        return Err(invalid("eps must be positive"));
    }
    let ratio = Rational::new((k as i64).into(), (k as i64 + 1).into());
    let target = rat_int(2) * eps;
    let mut power = ratio.clone();
    let mut i = 1;
    while power > target {
        power *= &ratio;
        i += 1;
    }
    Ok(i)
}

/// Uniform measure provider, handy for `build_mu`.
pub fn uniform_provider(n: &Nat) -> Result<RationalMeasure> {
    uniform_measure(n)
}
