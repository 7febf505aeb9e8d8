//! Multiplicative Følner grids `{p_1^e_1 ... p_r^e_r : 0 <= e_i < b}` and
//! their dilation defects `|(aF) △ F| / |F|`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::nat::{rat_int, FiniteSet, Nat, Rational};

/// Default cap on `b^r` for full enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Prime-exponent grid with `r` primes and exponents in `0..b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerGrid {
    exponent_bound: u32,
    primes: Vec<u64>,
}

impl FolnerGrid {
    pub fn new(prime_count: usize, exponent_bound: u32) -> Result<Self> {
        if prime_count == 0 || exponent_bound == 0 {
            return Err(invalid(format!(
                "grid needs r >= 1 and b >= 1, got r={prime_count} b={exponent_bound}"
            )));
        }
        Ok(FolnerGrid {
            exponent_bound,
            primes: first_primes(prime_count),
        })
    }

    /// The diagonal grid `F_m` (r = b = m).
    pub fn diagonal(m: usize) -> Result<Self> {
        FolnerGrid::new(m, m as u32)
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    pub fn exponent_bound(&self) -> u32 {
        self.exponent_bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `b^r`, exact.
    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.exponent_bound).pow(self.primes.len() as u32)
    }

    pub fn generate(&self) -> Result<FiniteSet> {
        self.generate_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    pub fn generate_with_cap(&self, cap: u64) -> Result<FiniteSet> {
        let card = self.cardinality();
        if card > BigUint::from(cap) {
            return Err(Error::ResourceLimit {
                what: "grid enumeration",
                required: card.to_string(),
                cap: cap.to_string(),
            });
        }
        let mut out = Vec::new();
        self.for_each_element(|n| out.push(Nat::new(n.clone()).unwrap()));
        Ok(FiniteSet::new(out))
    }

    /// Visits every grid element in exponent-odometer order.
    fn for_each_element<F: FnMut(&BigUint)>(&self, mut visit: F) {
        let r = self.primes.len();
        let b = self.exponent_bound;
        let mut exps = vec![0u32; r];
        loop {
            let n = self
                .primes
                .iter()
                .zip(&exps)
                .fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e));
            visit(&n);
            let mut i = 0;
            loop {
                if i == r {
                    return;
                }
                exps[i] += 1;
                if exps[i] < b {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    /// The exponent vector of `n` if it lies in the grid. Trial division by
    /// the grid primes only; a leftover cofactor means non-membership.
    pub fn contains(&self, n: &Nat) -> Option<Vec<u32>> {
        let (exps, cofactor) = self.factor_over_primes(n.get());
        if !cofactor.is_one() || exps.iter().any(|&e| e >= self.exponent_bound) {
            return None;
        }
        Some(exps)
    }

    /// Exponents of each grid prime in `n`, and the remaining cofactor.
    fn factor_over_primes(&self, n: &BigUint) -> (Vec<u32>, BigUint) {
        let mut rest = n.clone();
        let mut exps = Vec::with_capacity(self.primes.len());
        for &p in &self.primes {
            let p = BigUint::from(p);
            let mut e = 0u32;
            loop {
                let (q, r) = rest.div_rem(&p);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            exps.push(e);
        }
        (exps, rest)
    }

    /// `|(a·F) △ F| / |F|`. Counts `|aF ∩ F|` by walking every exponent
    /// vector `e` of the grid and testing whether `e + v_p(a)` stays inside,
    /// which is membership of `a·p^e` without building the integers. Grids
    /// too large to walk fall back to the exponent-shift product.
    pub fn defect(&self, a: &Nat) -> Rational {
        let card = self.cardinality();
        if card > BigUint::from(DEFAULT_ENUMERATION_CAP) {
            return self.defect_closed_form(a);
        }
        let (shift, cofactor) = self.factor_over_primes(a.get());
        let b = self.exponent_bound;
        let r = self.primes.len();
        let mut overlap = 0u64;
        if cofactor.is_one() {
            let mut exps = vec![0u32; r];
            'walk: loop {
                if exps.iter().zip(&shift).all(|(&e, &c)| e.saturating_add(c) < b) {
                    overlap += 1;
                }
                for e in exps.iter_mut() {
                    *e += 1;
                    if *e < b {
                        continue 'walk;
                    }
                    *e = 0;
                }
                break;
            }
        }
        let card = rat_int(card.try_into().unwrap());
        rat_int(2) * (rat_int(1) - rat_int(overlap as i64) / card)
    }

    /// `2·(1 − ∏_j max(0, b − c_j)/b)` where `a = ∏ p_j^{c_j}`; exactly 2 when
    /// `a` has a prime factor outside the grid.
    pub fn defect_closed_form(&self, a: &Nat) -> Rational {
        let (exps, cofactor) = self.factor_over_primes(a.get());
        if !cofactor.is_one() {
            return rat_int(2);
        }
        let b = self.exponent_bound as i64;
        let mut kept = rat_int(1);
        for c in exps {
            let c = c as i64;
            kept *= Rational::new((b - c).max(0).into(), b.into());
        }
        rat_int(2) * (rat_int(1) - kept)
    }
}

/// Grid descriptor `m` (diagonal) or `r,b`.
impl FromStr for FolnerGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid(format!("grid descriptor must be `m` or `r,b`, got {s:?}"));
        match s.split_once(',') {
            Some((r, b)) => {
                let r: usize = r.trim().parse().map_err(|_| bad())?;
                let b: u32 = b.trim().parse().map_err(|_| bad())?;
                FolnerGrid::new(r, b)
            }
            None => FolnerGrid::diagonal(s.trim().parse().map_err(|_| bad())?),
        }
    }
}

impl fmt::Display for FolnerGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.primes.len(), self.exponent_bound)
    }
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes
            .iter()
            .take_while(|&&p| p * p <= candidate)
            .all(|&p| candidate % p != 0)
        {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Direct `|(a·F) △ F| / |F|` for an arbitrary finite `F`.
pub fn set_defect(f: &FiniteSet, a: &Nat) -> Rational {
    if f.is_empty() {
        return rat_int(0);
    }
    let overlap = f.iter().filter(|x| f.contains_big(&(x.get() * a.get()))).count();
    let n = f.len() as i64;
    Rational::new((2 * (n - overlap as i64)).into(), n.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat::{rat, set_of};

    #[test]
    fn primes() {
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn generate_examples() {
        assert_eq!(FolnerGrid::new(1, 1).unwrap().generate().unwrap(), set_of(&[1]));
        assert_eq!(FolnerGrid::new(2, 2).unwrap().generate().unwrap(), set_of(&[1, 2, 3, 6]));
        let f3 = FolnerGrid::diagonal(3).unwrap().generate().unwrap();
        assert_eq!(f3.len(), 27);
        assert_eq!(f3.min().unwrap().to_u64(), Some(1));
        assert_eq!(f3.max().unwrap().to_u64(), Some(900));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = FolnerGrid::diagonal(10).unwrap();
        match g.generate() {
            Err(Error::ResourceLimit { required, .. }) => assert_eq!(required, "10000000000"),
            other => panic!("expected resource limit, got {other:?}"),
        }
        assert!(FolnerGrid::diagonal(4).unwrap().generate_with_cap(255).is_err());
    }

    #[test]
    fn contains_examples() {
        let g22 = FolnerGrid::new(2, 2).unwrap();
        assert_eq!(g22.contains(&Nat::from_u64(6)), Some(vec![1, 1]));
        assert_eq!(g22.contains(&Nat::from_u64(4)), None);
        assert_eq!(g22.contains(&Nat::from_u64(10)), None);
        let g23 = FolnerGrid::new(2, 3).unwrap();
        assert_eq!(g23.contains(&Nat::from_u64(12)), Some(vec![2, 1]));
    }

    #[test]
    fn defect_examples() {
        let g22 = FolnerGrid::new(2, 2).unwrap();
        assert_eq!(g22.defect(&Nat::from_u64(2)), rat(1, 1));
        assert_eq!(g22.defect(&Nat::one()), rat(0, 1));
        let g33 = FolnerGrid::diagonal(3).unwrap();
        assert_eq!(g33.defect(&Nat::from_u64(2)), rat(2, 3));
        assert_eq!(g33.defect_closed_form(&Nat::from_u64(2)), rat(2, 3));
        assert_eq!(g22.defect_closed_form(&Nat::from_u64(5)), rat(2, 1));
        let g23 = FolnerGrid::new(2, 3).unwrap();
        assert_eq!(g23.defect_closed_form(&Nat::from_u64(6)), rat(10, 9));
    }

    #[test]
    fn defect_matches_direct_symmetric_difference() {
        let g = FolnerGrid::new(2, 2).unwrap();
        let f = g.generate().unwrap();
        let af = f.dilate(&Nat::from_u64(2));
        let sym = f.iter().filter(|x| !af.contains(x)).count() + af.iter().filter(|x| !f.contains(x)).count();
        assert_eq!(sym, 4);
        assert_eq!(set_defect(&f, &Nat::from_u64(2)), rat(1, 1));
    }

    #[test]
    fn descriptor_parsing() {
        assert_eq!("3".parse::<FolnerGrid>().unwrap(), FolnerGrid::diagonal(3).unwrap());
        assert_eq!("2, 5".parse::<FolnerGrid>().unwrap(), FolnerGrid::new(2, 5).unwrap());
        assert!("0".parse::<FolnerGrid>().is_err());
        assert!("a,b".parse::<FolnerGrid>().is_err());
        assert_eq!(FolnerGrid::new(2, 5).unwrap().to_string(), "2,5");
    }
}
