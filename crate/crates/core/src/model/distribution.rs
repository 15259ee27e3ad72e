//! Edge passage-time laws.
//!
//! Every law is sampled by inverse transform from a single uniform variate,
//! so two laws driven by the same uniform are monotonically coupled. In
//! particular `truncate(b)` samples exactly `min(tau, b)` edgewise.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FppError, Result};

/// An exact probability in `[0, 1]`, stored as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(Ratio<u64>);

impl Prob {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer > denom {
            return Err(FppError::InvalidDistribution(format!(
                "probability {numer}/{denom} is not in [0, 1]"
            )));
        }
        Ok(Prob(Ratio::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Prob(Ratio::new(0, 1))
    }

    pub fn one() -> Self {
        Prob(Ratio::new(1, 1))
    }

    /// Best rational approximation of a float probability (denominator up to 10^6).
    pub fn from_f64(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(FppError::InvalidDistribution(format!(
                "probability {p} is not in [0, 1]"
            )));
        }
        let r = Ratio::<i64>::approximate_float(p)
            .ok_or_else(|| FppError::InvalidDistribution(format!("cannot rationalize {p}")))?;
        let r = if *r.denom() > 1_000_000 {
            let den = 1_000_000i64;
            Ratio::new((p * den as f64).round() as i64, den)
        } else {
            r
        };
        Prob::new(*r.numer() as u64, *r.denom() as u64)
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    pub fn complement(&self) -> Self {
        Prob(Ratio::one() - self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Prob {
    type Err = FppError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| FppError::InvalidDistribution(format!("bad probability {s:?}")))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| FppError::InvalidDistribution(format!("bad probability {s:?}")))?;
            return Prob::new(a, b);
        }
        // Exact decimal parsing: "0.375" -> 375/1000.
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 15 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(FppError::InvalidDistribution(format!("bad probability {s:?}")));
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().unwrap_or(u64::MAX) };
        let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().unwrap_or(0) };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_v))
            .ok_or_else(|| FppError::InvalidDistribution(format!("bad probability {s:?}")))?;
        Prob::new(num, den)
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Number(x) => Prob::from_f64(x).map_err(serde::de::Error::custom),
        }
    }
}

/// One atom of a finite-support law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub value: f64,
    pub prob: Prob,
}

/// Integrability class of a law, ordered from strongest to weakest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentClass {
    Bounded,
    AllExponentialMoments,
    MinMomentDPlusXi,
    None,
}

impl MomentClass {
    pub fn has_all_exponential_moments(self) -> bool {
        self <= MomentClass::AllExponentialMoments
    }

    pub fn satisfies_strong_shape(self) -> bool {
        self <= MomentClass::MinMomentDPlusXi
    }
}

/// The law of a single edge passage time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EdgeDistribution {
    Deterministic { value: f64 },
    /// `low` with probability `p_low`, otherwise `high`.
    TwoPoint { low: f64, high: f64, p_low: Prob },
    Uniform { low: f64, high: f64 },
    /// `shift + Exp(rate)`.
    Exponential { rate: f64, shift: f64 },
    Finite { atoms: Vec<Atom> },
    /// Law of `min(inner, cap)`.
    Capped { inner: Box<EdgeDistribution>, cap: f64 },
}

/// Analytic decomposition used for moments, CDFs and transforms.
#[derive(Clone, Debug)]
enum Piece {
    Atom { value: f64, mass: f64 },
    /// Uniform density on `[lo, hi)` carrying total mass `mass`.
    Uniform { lo: f64, hi: f64, mass: f64 },
    /// `rate * exp(-rate (x - shift))` restricted to `[shift, upper)`.
    Exp { shift: f64, rate: f64, upper: f64 },
}

fn check_value(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(FppError::InvalidDistribution(format!(
            "{name} = {v} must be finite and nonnegative"
        )));
    }
    Ok(())
}

impl EdgeDistribution {
    pub fn deterministic(value: f64) -> Result<Self> {
        let d = EdgeDistribution::Deterministic { value };
        d.validate()?;
        Ok(d)
    }

    pub fn two_point(low: f64, high: f64, p_low: Prob) -> Result<Self> {
        let d = EdgeDistribution::TwoPoint { low, high, p_low };
        d.validate()?;
        Ok(d)
    }

    /// Two-point law with `P(low) = 1/2`.
    pub fn fair_two_point(low: f64, high: f64) -> Result<Self> {
        Self::two_point(low, high, Prob::new(1, 2)?)
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        let d = EdgeDistribution::Uniform { low, high };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64, shift: f64) -> Result<Self> {
        let d = EdgeDistribution::Exponential { rate, shift };
        d.validate()?;
        Ok(d)
    }

    pub fn finite(atoms: Vec<Atom>) -> Result<Self> {
        let d = EdgeDistribution::Finite { atoms };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EdgeDistribution::Deterministic { value } => check_value("value", *value),
            EdgeDistribution::TwoPoint { low, high, .. } => {
                check_value("low", *low)?;
                check_value("high", *high)?;
                if low > high {
                    return Err(FppError::InvalidDistribution(format!(
                        "two-point law needs low <= high, got {low} > {high}"
                    )));
                }
                Ok(())
            }
            EdgeDistribution::Uniform { low, high } => {
                check_value("low", *low)?;
                check_value("high", *high)?;
                if low >= high {
                    return Err(FppError::InvalidDistribution(format!(
                        "uniform law needs low < high, got [{low}, {high}]"
                    )));
                }
                Ok(())
            }
            EdgeDistribution::Exponential { rate, shift } => {
                check_value("shift", *shift)?;
                if !rate.is_finite() || *rate <= 0.0 {
                    return Err(FppError::InvalidDistribution(format!(
                        "exponential rate {rate} must be positive"
                    )));
                }
                Ok(())
            }
            EdgeDistribution::Finite { atoms } => {
                if atoms.is_empty() {
                    return Err(FppError::InvalidDistribution("empty atom table".into()));
                }
                let mut total = BigRational::zero();
                for a in atoms {
                    check_value("atom value", a.value)?;
                    total += a.prob.to_big();
                }
                if total != BigRational::one() {
                    return Err(FppError::InvalidDistribution(format!(
                        "atom probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            EdgeDistribution::Capped { inner, cap } => {
                inner.validate()?;
                check_value("cap", *cap)?;
                if *cap < inner.support_infimum() {
                    return Err(FppError::InvalidDistribution(format!(
                        "cap {cap} below the support infimum {}",
                        inner.support_infimum()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EdgeDistribution::Deterministic { .. } => "deterministic",
            EdgeDistribution::TwoPoint { .. } => "two-point",
            EdgeDistribution::Uniform { .. } => "uniform",
            EdgeDistribution::Exponential { .. } => "exponential",
            EdgeDistribution::Finite { .. } => "finite",
            EdgeDistribution::Capped { .. } => "capped",
        }
    }

    /// Atoms with positive mass, merged by value and sorted ascending, when
    /// the law has finite support.
    pub fn atoms(&self) -> Option<Vec<(f64, Prob)>> {
        let raw: Vec<(f64, Prob)> = match self {
            EdgeDistribution::Deterministic { value } => vec![(*value, Prob::one())],
            EdgeDistribution::TwoPoint { low, high, p_low } => {
                vec![(*low, *p_low), (*high, p_low.complement())]
            }
            EdgeDistribution::Finite { atoms } => {
                atoms.iter().map(|a| (a.value, a.prob)).collect()
            }
            EdgeDistribution::Capped { inner, cap } => inner
                .atoms()?
                .into_iter()
                .map(|(v, p)| (v.min(*cap), p))
                .collect(),
            EdgeDistribution::Uniform { .. } | EdgeDistribution::Exponential { .. } => {
                return None
            }
        };
        let mut merged: Vec<(f64, Ratio<u64>)> = Vec::new();
        let mut sorted = raw;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, p) in sorted {
            if p.is_zero() {
                continue;
            }
            match merged.last_mut() {
                Some((lv, lp)) if *lv == v => *lp += p.0,
                _ => merged.push((v, p.0)),
            }
        }
        Some(merged.into_iter().map(|(v, p)| (v, Prob(p))).collect())
    }

    pub fn is_finite_support(&self) -> bool {
        self.atoms().is_some()
    }

    fn pieces(&self) -> Vec<Piece> {
        match self {
            EdgeDistribution::Uniform { low, high } => vec![Piece::Uniform {
                lo: *low,
                hi: *high,
                mass: 1.0,
            }],
            EdgeDistribution::Exponential { rate, shift } => vec![Piece::Exp {
                shift: *shift,
                rate: *rate,
                upper: f64::INFINITY,
            }],
            EdgeDistribution::Capped { inner, cap } if !inner.is_finite_support() => {
                let cap = *cap;
                let mut out = Vec::new();
                for piece in inner.pieces() {
                    match piece {
                        Piece::Atom { value, mass } => out.push(Piece::Atom {
                            value: value.min(cap),
                            mass,
                        }),
                        Piece::Uniform { lo, hi, mass } => {
                            if cap <= lo {
                                out.push(Piece::Atom { value: cap, mass });
                            } else if cap >= hi {
                                out.push(Piece::Uniform { lo, hi, mass });
                            } else {
                                let inside = mass * (cap - lo) / (hi - lo);
                                out.push(Piece::Uniform { lo, hi: cap, mass: inside });
                                out.push(Piece::Atom { value: cap, mass: mass - inside });
                            }
                        }
                        Piece::Exp { shift, rate, upper } => {
                            if cap <= shift {
                                out.push(Piece::Atom {
                                    value: cap,
                                    mass: exp_piece_mass(rate, 0.0, upper - shift),
                                });
                            } else {
                                let top = upper.min(cap);
                                out.push(Piece::Exp { shift, rate, upper: top });
                                if cap < upper {
                                    out.push(Piece::Atom {
                                        value: cap,
                                        mass: (-rate * (cap - shift)).exp()
                                            - (-rate * (upper - shift)).exp(),
                                    });
                                }
                            }
                        }
                    }
                }
                out
            }
            _ => self
                .atoms()
                .expect("finite support")
                .into_iter()
                .map(|(value, p)| Piece::Atom {
                    value,
                    mass: p.to_f64(),
                })
                .collect(),
        }
    }

    /// Infimum of the support (the constant `a` of the model).
    pub fn support_infimum(&self) -> f64 {
        match self {
            EdgeDistribution::Uniform { low, .. } => *low,
            EdgeDistribution::Exponential { shift, .. } => *shift,
            EdgeDistribution::Capped { inner, cap } if !inner.is_finite_support() => {
                inner.support_infimum().min(*cap)
            }
            _ => self.atoms().expect("finite support")[0].0,
        }
    }

    /// Supremum of the support (infinite for unbounded laws).
    pub fn support_supremum(&self) -> f64 {
        match self {
            EdgeDistribution::Uniform { high, .. } => *high,
            EdgeDistribution::Exponential { .. } => f64::INFINITY,
            EdgeDistribution::Capped { inner, cap } if !inner.is_finite_support() => {
                inner.support_supremum().min(*cap)
            }
            _ => self.atoms().expect("finite support").last().unwrap().0,
        }
    }

    pub fn moment_class(&self) -> MomentClass {
        match self {
            EdgeDistribution::Exponential { .. } => MomentClass::MinMomentDPlusXi,
            _ => MomentClass::Bounded,
        }
    }

    pub fn mean(&self) -> f64 {
        self.pieces()
            .iter()
            .map(|p| match *p {
                Piece::Atom { value, mass } => value * mass,
                Piece::Uniform { lo, hi, mass } => mass * 0.5 * (lo + hi),
                Piece::Exp { shift, rate, upper } => {
                    // integral of x * rate e^{-rate (x - shift)} over [shift, upper)
                    let len = upper - shift;
                    if len.is_infinite() {
                        shift + 1.0 / rate
                    } else {
                        let e = (-rate * len).exp();
                        shift * (1.0 - e) + (1.0 - e * (1.0 + rate * len)) / rate
                    }
                }
            })
            .sum()
    }

    /// `P(tau <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        let v: f64 = self
            .pieces()
            .iter()
            .map(|p| match *p {
                Piece::Atom { value, mass } => {
                    if value <= t {
                        mass
                    } else {
                        0.0
                    }
                }
                Piece::Uniform { lo, hi, mass } => {
                    mass * ((t.min(hi) - lo) / (hi - lo)).clamp(0.0, 1.0)
                }
                Piece::Exp { shift, rate, upper } => {
                    if t < shift {
                        0.0
                    } else {
                        exp_piece_mass(rate, 0.0, t.min(upper) - shift)
                    }
                }
            })
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// Exact `P(tau <= t)` for finite-support laws.
    pub fn exact_cdf(&self, t: f64) -> Option<BigRational> {
        let atoms = self.atoms()?;
        Some(
            atoms
                .iter()
                .filter(|(v, _)| *v <= t)
                .fold(BigRational::zero(), |acc, (_, p)| acc + p.to_big()),
        )
    }

    /// `P(tau = v)`.
    pub fn atom_mass(&self, v: f64) -> f64 {
        self.pieces()
            .iter()
            .map(|p| match *p {
                Piece::Atom { value, mass } if value == v => mass,
                _ => 0.0,
            })
            .sum()
    }

    /// Exact `P(tau = v)` for finite-support laws.
    pub fn exact_atom_mass(&self, v: f64) -> Option<BigRational> {
        let atoms = self.atoms()?;
        Some(
            atoms
                .iter()
                .filter(|(x, _)| *x == v)
                .fold(BigRational::zero(), |acc, (_, p)| acc + p.to_big()),
        )
    }

    /// `E[exp(theta (tau - center))]`, finite or [`FppError::DivergentMgf`].
    pub fn centered_mgf(&self, theta: f64, center: f64) -> Result<f64> {
        let mut total = 0.0;
        for p in self.pieces() {
            total += match p {
                Piece::Atom { value, mass } => mass * (theta * (value - center)).exp(),
                Piece::Uniform { lo, hi, mass } => {
                    let w = hi - lo;
                    let base = (theta * (lo - center)).exp();
                    let x = theta * w;
                    // (e^x - 1)/x, stable near 0
                    let ratio = if x.abs() < 1e-8 { 1.0 + 0.5 * x } else { x.exp_m1() / x };
                    mass * base * ratio
                }
                Piece::Exp { shift, rate, upper } => {
                    let len = upper - shift;
                    let k = theta - rate;
                    if len.is_infinite() && k >= 0.0 {
                        return Err(FppError::DivergentMgf(theta));
                    }
                    let base = rate * (theta * (shift - center)).exp();
                    let integral = if len.is_infinite() {
                        -1.0 / k
                    } else if (k * len).abs() < 1e-10 {
                        len
                    } else {
                        (k * len).exp_m1() / k
                    };
                    base * integral
                }
            };
        }
        if !total.is_finite() {
            return Err(FppError::DivergentMgf(theta));
        }
        Ok(total)
    }

    /// `E[exp(theta tau)]`.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        self.centered_mgf(theta, 0.0)
    }

    /// Inverse CDF; `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            EdgeDistribution::Deterministic { value } => *value,
            EdgeDistribution::TwoPoint { low, high, p_low } => {
                if u < p_low.to_f64() {
                    *low
                } else {
                    *high
                }
            }
            EdgeDistribution::Uniform { low, high } => low + u * (high - low),
            EdgeDistribution::Exponential { rate, shift } => shift - (-u).ln_1p() / rate,
            EdgeDistribution::Finite { .. } => {
                let atoms = self.atoms().expect("finite support");
                let mut cum = 0.0;
                for (v, p) in &atoms {
                    cum += p.to_f64();
                    if u < cum {
                        return *v;
                    }
                }
                atoms.last().unwrap().0
            }
            EdgeDistribution::Capped { inner, cap } => inner.quantile(u).min(*cap),
        }
    }

    /// Law of `min(tau, b)`.
    pub fn truncate(&self, b: f64) -> Result<EdgeDistribution> {
        if !(b >= self.support_infimum()) {
            return Err(FppError::InvalidArgument(format!(
                "truncation level {b} below the support infimum {}",
                self.support_infimum()
            )));
        }
        let out = match self {
            EdgeDistribution::Deterministic { value } => EdgeDistribution::Deterministic {
                value: value.min(b),
            },
            EdgeDistribution::TwoPoint { low, high, p_low } => {
                if *high <= b {
                    self.clone()
                } else if *low >= b {
                    EdgeDistribution::Deterministic { value: b }
                } else {
                    EdgeDistribution::TwoPoint {
                        low: *low,
                        high: b,
                        p_low: *p_low,
                    }
                }
            }
            EdgeDistribution::Finite { atoms } => EdgeDistribution::Finite {
                atoms: atoms
                    .iter()
                    .map(|a| Atom {
                        value: a.value.min(b),
                        prob: a.prob,
                    })
                    .collect(),
            },
            EdgeDistribution::Uniform { high, .. } if *high <= b => self.clone(),
            EdgeDistribution::Capped { inner, cap } => EdgeDistribution::Capped {
                inner: inner.clone(),
                cap: cap.min(b),
            },
            _ => EdgeDistribution::Capped {
                inner: Box::new(self.clone()),
                cap: b,
            },
        };
        Ok(out)
    }
}

fn exp_piece_mass(rate: f64, from: f64, to: f64) -> f64 {
    // mass of Exp(rate) on [from, to) measured from its origin
    (-rate * from).exp() - (-rate * to).exp()
}

/// Converts an exact rational to `f64`, saturating to 0 on underflow.
pub fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(0.0)
}
