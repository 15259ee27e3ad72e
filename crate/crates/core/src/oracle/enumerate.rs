use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::event::EventSpec;
use crate::error::{FppError, Result};
use crate::model::{big_to_f64, EdgeDistribution, LatticeBox, WeightField};
use crate::passage_time::{shortest_path_tree, QueueKind, Region};

/// Default enumeration cap on the number of configurations.
pub const DEFAULT_CAP: u128 = 1 << 24;

/// A probability, exact when the law has rational atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactProbability {
    pub exact: Option<BigRational>,
    pub value: f64,
    /// Configurations enumerated (0 for closed-form values).
    pub configurations: u128,
}

impl ExactProbability {
    pub fn from_exact(p: BigRational, configurations: u128) -> Self {
        ExactProbability { value: big_to_f64(&p), exact: Some(p), configurations }
    }

    pub fn from_f64(p: f64) -> Self {
        ExactProbability { exact: None, value: p, configurations: 0 }
    }

    pub fn numer(&self) -> Option<BigInt> {
        self.exact.as_ref().map(|p| p.numer().clone())
    }

    pub fn denom(&self) -> Option<BigInt> {
        self.exact.as_ref().map(|p| p.denom().clone())
    }

    pub fn equals_ratio(&self, num: i64, den: i64) -> bool {
        self.exact.as_ref() == Some(&BigRational::new(num.into(), den.into()))
    }
}

impl Serialize for ExactProbability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            num: Option<String>,
            den: Option<String>,
            value: f64,
            configurations: String,
        }
        Repr {
            num: self.numer().map(|n| n.to_string()),
            den: self.denom().map(|d| d.to_string()),
            value: self.value,
            configurations: self.configurations.to_string(),
        }
        .serialize(serializer)
    }
}

/// Order-preserving key of a nonnegative time (including `+inf`).
pub fn time_key(t: f64) -> u64 {
    debug_assert!(t >= 0.0);
    (t + 0.0).to_bits()
}

pub fn key_time(k: u64) -> f64 {
    f64::from_bits(k)
}

/// Exact law of an observable, keyed by its value.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLaw<K: Ord> {
    pub table: BTreeMap<K, BigRational>,
    pub configurations: u128,
}

impl<K: Ord + Clone> ExactLaw<K> {
    pub fn probability(&self, pred: impl Fn(&K) -> bool) -> ExactProbability {
        let p = self
            .table
            .iter()
            .filter(|(k, _)| pred(k))
            .fold(BigRational::zero(), |acc, (_, p)| acc + p);
        ExactProbability::from_exact(p, self.configurations)
    }

    pub fn total(&self) -> BigRational {
        self.table.values().fold(BigRational::zero(), |acc, p| acc + p)
    }
}

impl ExactLaw<u64> {
    /// `P(T <= t)` for a time-valued law.
    pub fn cdf(&self, t: f64) -> ExactProbability {
        self.probability(|&k| key_time(k) <= t)
    }
}

fn atoms_of(dist: &EdgeDistribution) -> Result<Vec<(f64, BigRational)>> {
    let atoms = dist.atoms().ok_or_else(|| {
        FppError::UnsupportedDistribution(format!(
            "exact enumeration needs a finite-support law, got {}",
            dist.kind_name()
        ))
    })?;
    Ok(atoms.into_iter().map(|(v, p)| (v, p.to_big())).collect())
}

/// Number of configurations of `m` edges with `k` states, checked against `cap`.
pub fn configuration_count(k: usize, m: usize, cap: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..m {
        total = total.saturating_mul(k as u128);
        if total > cap {
            return Err(FppError::CapExceeded { configurations: total_or_max(k, m), cap });
        }
    }
    Ok(total)
}

fn total_or_max(k: usize, m: usize) -> u128 {
    (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX)
}

/// Exact law of `observable` under i.i.d. weights on `edges` (all box edges
/// when `None`). Other edges are held at the top of the support.
///
/// Configurations are visited in mixed-radix order over disjoint index
/// ranges; counts are kept per atom composition so the final probabilities
/// are exact sums of `count * prod p_i^c_i`.
pub fn exact_law<K, F>(
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    edges: Option<Vec<usize>>,
    cap: u128,
    observable: F,
) -> Result<ExactLaw<K>>
where
    K: Ord + Hash + Clone + Send,
    F: Fn(&WeightField) -> Result<K> + Sync,
{
    let atoms = atoms_of(dist)?;
    let k = atoms.len();
    let edges = edges.unwrap_or_else(|| lattice.edges().collect());
    let m = edges.len();
    let total = configuration_count(k, m, cap)?;
    let top = atoms.last().unwrap().0;
    let base = WeightField::from_fn(lattice, dist.clone(), |_, _| top);

    let chunks = total.min(512) as u64;
    let total64 = total as u64;
    let partials: Vec<HashMap<(K, Vec<u16>), u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = total64 / chunks * c + (c.min(total64 % chunks));
            let len = total64 / chunks + u64::from(c < total64 % chunks);
            let mut w = base.clone();
            let mut digits = vec![0usize; m];
            let mut rest = start;
            for d in digits.iter_mut() {
                *d = (rest % k as u64) as usize;
                rest /= k as u64;
            }
            let mut comp = vec![0u16; k];
            for (i, &d) in digits.iter().enumerate() {
                w.set_weight(edges[i], atoms[d].0).expect("valid slot");
                comp[d] += 1;
            }
            let mut local: HashMap<(K, Vec<u16>), u64> = HashMap::new();
            for step in 0..len {
                let key = observable(&w)?;
                *local.entry((key, comp.clone())).or_insert(0) += 1;
                if step + 1 == len {
                    break;
                }
                // increment the mixed-radix counter
                for i in 0..m {
                    comp[digits[i]] -= 1;
                    digits[i] += 1;
                    if digits[i] == k {
                        digits[i] = 0;
                        comp[0] += 1;
                        w.set_weight(edges[i], atoms[0].0).expect("valid slot");
                    } else {
                        comp[digits[i]] += 1;
                        w.set_weight(edges[i], atoms[digits[i]].0).expect("valid slot");
                        break;
                    }
                }
            }
            Ok(local)
        })
        .collect::<Result<_>>()?;

    let mut counts: BTreeMap<K, BTreeMap<Vec<u16>, u64>> = BTreeMap::new();
    for part in partials {
        for ((key, comp), c) in part {
            *counts.entry(key).or_default().entry(comp).or_insert(0) += c;
        }
    }
    // p_i^j for j <= m
    let powers: Vec<Vec<BigRational>> = atoms
        .iter()
        .map(|(_, p)| {
            let mut v = vec![BigRational::one()];
            for j in 0..m {
                let next = &v[j] * p;
                v.push(next);
            }
            v
        })
        .collect();
    let table = counts
        .into_iter()
        .map(|(key, comps)| {
            let p = comps.into_iter().fold(BigRational::zero(), |acc, (comp, c)| {
                let mut term = BigRational::from_integer(BigInt::from(c));
                for (i, &e) in comp.iter().enumerate() {
                    term *= &powers[i][e as usize];
                }
                acc + term
            });
            (key, p)
        })
        .filter(|(_, p)| !p.is_zero())
        .collect();
    Ok(ExactLaw { table, configurations: total })
}

/// Exact law of `T_region(x, y)` over the edges inside the region.
pub fn exact_passage_time_law(
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    region: &Region,
    x: &[i64],
    y: &[i64],
    cap: u128,
) -> Result<ExactLaw<u64>> {
    let ev = EventSpec::PassageTimeAtMost { x: x.to_vec(), y: y.to_vec(), t: 0.0, region: region.clone() };
    ev.validate(&lattice)?;
    let mask = region.mask(&lattice)?;
    let s = lattice.index(x).unwrap();
    let t = lattice.index(y).unwrap();
    exact_law(dist, lattice, Some(ev.relevant_edges(&lattice)), cap, |w| {
        let tree = shortest_path_tree(w, mask.clone(), &[(s, 0.0)], QueueKind::Auto)?;
        Ok(time_key(tree.dist[t]))
    })
}

/// Exact probability of `event` by enumeration (default cap).
pub fn exact_event_probability(
    event: &EventSpec,
    dist: &EdgeDistribution,
    lattice: LatticeBox,
) -> Result<ExactProbability> {
    exact_event_probability_with_cap(event, dist, lattice, DEFAULT_CAP)
}

pub fn exact_event_probability_with_cap(
    event: &EventSpec,
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    cap: u128,
) -> Result<ExactProbability> {
    event.validate(&lattice)?;
    let law = exact_law(dist, lattice, Some(event.relevant_edges(&lattice)), cap, |w| event.holds(w))?;
    Ok(law.probability(|&k| k))
}
