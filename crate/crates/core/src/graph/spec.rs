//! Declarative description of an abelian Cayley graph.
//!
//! The text form is a small TOML document:
//!
//! ```text
//! family = "torus_product"
//! factors = [4, 4, 3]
//! generators = ["box", "full:2"]
//! radius = 3
//! ```
//!
//! * `family`: one of `torus_product`, `cyclic_chords`, `z_times_torus`,
//!   `explicit`.
//! * `factors`: the cyclic factors of the group, each a modulus ≥ 2 or the
//!   token `inf` for a copy of ℤ.
//! * `generators`: a union of generator terms. String terms are
//!   - `box`: {-1,0,1} on every factor not named by a `full:` term,
//!   - `full:<i>`: every element of factor `i` (zero elsewhere),
//!   - `chords:<k>`: {-k,…,k} on factor 0,
//!   - `prod:<s0>,<s1>,…`: a Cartesian product with one entry per factor,
//!     each `0`, `b` ({-1,0,1}), `f` (whole factor) or `c<k>` ({-k,…,k}).
//!
//!   Integer arrays are explicit group elements, e.g. `[1, 0, -1]`.
//! * `radius` (optional): ball radius used by commands that build balls.
//!
//! [`GraphSpec::to_text`] emits a canonical form; parsing that form and
//! emitting again reproduces the same bytes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TorusProduct,
    CyclicChords,
    ZTimesTorus,
    Explicit,
}

/// Order of one cyclic factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulus {
    Finite(u64),
    Infinite,
}

impl Modulus {
    pub fn finite(self) -> Option<u64> {
        match self {
            Modulus::Finite(m) => Some(m),
            Modulus::Infinite => None,
        }
    }

    /// Canonical representative: `[0, m)` for finite factors.
    pub fn reduce(self, x: i64) -> i64 {
        match self {
            Modulus::Finite(m) => x.rem_euclid(m as i64),
            Modulus::Infinite => x,
        }
    }
}

impl Serialize for Modulus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Modulus::Finite(m) => s.serialize_u64(*m),
            Modulus::Infinite => s.serialize_f64(f64::INFINITY),
        }
    }
}

impl<'de> Deserialize<'de> for Modulus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Int(m) if m >= 0 => Ok(Modulus::Finite(m as u64)),
            Raw::Int(m) => Err(serde::de::Error::custom(format!("negative modulus {m}"))),
            Raw::Float(x) if x.is_infinite() && x > 0.0 => Ok(Modulus::Infinite),
            Raw::Float(x) => Err(serde::de::Error::custom(format!(
                "modulus must be an integer or inf, got {x}"
            ))),
        }
    }
}

/// Per-factor component of a product generator term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorSet {
    Zero,
    Unit,
    Full,
    Chords(u64),
}

/// One term of the generator union.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GenTerm {
    Box,
    Full(usize),
    Chords(u64),
    Product(Vec<FactorSet>),
    Offset(Vec<i64>),
}

impl fmt::Display for FactorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorSet::Zero => write!(f, "0"),
            FactorSet::Unit => write!(f, "b"),
            FactorSet::Full => write!(f, "f"),
            FactorSet::Chords(k) => write!(f, "c{k}"),
        }
    }
}

impl FromStr for FactorSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(FactorSet::Zero),
            "b" => Ok(FactorSet::Unit),
            "f" => Ok(FactorSet::Full),
            _ => s
                .strip_prefix('c')
                .and_then(|k| k.parse().ok())
                .map(FactorSet::Chords)
                .ok_or_else(|| Error::Parse(format!("unknown product component `{s}`"))),
        }
    }
}

impl GenTerm {
    fn to_raw(&self) -> RawGen {
        match self {
            GenTerm::Box => RawGen::Term("box".into()),
            GenTerm::Full(i) => RawGen::Term(format!("full:{i}")),
            GenTerm::Chords(k) => RawGen::Term(format!("chords:{k}")),
            GenTerm::Product(parts) => RawGen::Term(format!(
                "prod:{}",
                parts.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
            )),
            GenTerm::Offset(v) => RawGen::Offset(v.clone()),
        }
    }

    fn from_raw(raw: RawGen) -> Result<Self> {
        let s = match raw {
            RawGen::Offset(v) => return Ok(GenTerm::Offset(v)),
            RawGen::Term(s) => s,
        };
        if s == "box" {
            return Ok(GenTerm::Box);
        }
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("unknown generator term `{s}`")))?;
        let bad = || Error::Parse(format!("malformed generator term `{s}`"));
        match head {
            "full" => tail.parse().map(GenTerm::Full).map_err(|_| bad()),
            "chords" => tail.parse().map(GenTerm::Chords).map_err(|_| bad()),
            "prod" => tail
                .split(',')
                .map(|p| p.trim().parse())
                .collect::<Result<Vec<_>>>()
                .map(GenTerm::Product),
            _ => Err(bad()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawGen {
    Term(String),
    Offset(Vec<i64>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: Family,
    factors: Vec<Modulus>,
    generators: Vec<RawGen>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<u32>,
}

/// Cayley graph family: group factors plus a generator union.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct GraphSpec {
    pub family: Family,
    pub factors: Vec<Modulus>,
    pub generators: Vec<GenTerm>,
    pub radius: Option<u32>,
}

impl TryFrom<RawSpec> for GraphSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = GraphSpec {
            family: raw.family,
            factors: raw.factors,
            generators: raw
                .generators
                .into_iter()
                .map(GenTerm::from_raw)
                .collect::<Result<_>>()?,
            radius: raw.radius,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<GraphSpec> for RawSpec {
    fn from(spec: GraphSpec) -> Self {
        RawSpec {
            family: spec.family,
            factors: spec.factors,
            generators: spec.generators.iter().map(GenTerm::to_raw).collect(),
            radius: spec.radius,
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl GraphSpec {
    pub fn new(family: Family, factors: Vec<Modulus>, generators: Vec<GenTerm>) -> Result<Self> {
        let spec = GraphSpec {
            family,
            factors,
            generators,
            radius: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_radius(mut self, radius: u32) -> Self {
        self.radius = Some(radius);
        self
    }

    /// C(ℤ/nℤ, {-k,…,k}), written Z_{n,k}; `k = 1` is the n-cycle.
    pub fn cyclic(n: u64, k: u64) -> Result<Self> {
        Self::new(Family::CyclicChords, vec![Modulus::Finite(n)], vec![GenTerm::Chords(k)])
    }

    /// (ℤ/nℤ)^d with generators {-1,0,1}^d.
    pub fn torus(n: u64, d: usize) -> Result<Self> {
        Self::new(Family::TorusProduct, vec![Modulus::Finite(n); d], vec![GenTerm::Box])
    }

    /// ℤ^d with generators {-1,0,1}^d (balls only).
    pub fn lattice(d: usize) -> Result<Self> {
        Self::new(Family::Explicit, vec![Modulus::Infinite; d], vec![GenTerm::Box])
    }

    /// ℤ ⊕ (ℤ/mℤ)^d with generators {-1,0,1}^{d+1}.
    pub fn z_times_torus(m: u64, d: usize) -> Result<Self> {
        let mut factors = vec![Modulus::Infinite];
        factors.extend(std::iter::repeat_n(Modulus::Finite(m), d));
        Self::new(Family::ZTimesTorus, factors, vec![GenTerm::Box])
    }

    /// (ℤ/nℤ)^d ⊕ ℤ/kℤ with S = ({-1,0,1}^d × {0}) ∪ ({0}^d × ℤ/kℤ).
    /// For `k = 1` the last factor is omitted.
    pub fn torus_with_full_factor(n: u64, d: usize, k: u64) -> Result<Self> {
        let mut factors = vec![Modulus::Finite(n); d];
        let mut generators = vec![GenTerm::Box];
        if k > 1 {
            factors.push(Modulus::Finite(k));
            generators.push(GenTerm::Full(d));
        }
        Self::new(Family::TorusProduct, factors, generators)
    }

    pub fn dims(&self) -> usize {
        self.factors.len()
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|m| m.finite().is_some())
    }

    /// Group order when every factor is finite.
    pub fn order(&self) -> Option<u128> {
        self.factors
            .iter()
            .try_fold(1u128, |acc, m| m.finite().map(|m| acc.saturating_mul(m as u128)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.factors.is_empty() {
            return bad("at least one factor is required".into());
        }
        for (i, m) in self.factors.iter().enumerate() {
            if let Modulus::Finite(m) = m {
                if *m < 2 {
                    return bad(format!("factor {i} has modulus {m} < 2"));
                }
                if *m > i64::MAX as u64 / 4 {
                    return bad(format!("factor {i} modulus {m} is too large"));
                }
            }
        }
        if self.generators.is_empty() {
            return bad("generator list is empty".into());
        }
        let d = self.dims();
        for g in &self.generators {
            match g {
                GenTerm::Box | GenTerm::Chords(_) => {}
                GenTerm::Full(i) => {
                    if *i >= d {
                        return bad(format!("full:{i} names a missing factor"));
                    }
                    if self.factors[*i] == Modulus::Infinite {
                        return bad(format!("full:{i} names an infinite factor"));
                    }
                }
                GenTerm::Product(parts) => {
                    if parts.len() != d {
                        return bad(format!("product term has {} parts for {d} factors", parts.len()));
                    }
                    for (i, p) in parts.iter().enumerate() {
                        if *p == FactorSet::Full && self.factors[i] == Modulus::Infinite {
                            return bad(format!("product term takes all of infinite factor {i}"));
                        }
                    }
                }
                GenTerm::Offset(v) => {
                    if v.len() != d {
                        return bad(format!("offset {v:?} has wrong length for {d} factors"));
                    }
                }
            }
        }
        let infinite = self.factors.iter().filter(|m| **m == Modulus::Infinite).count();
        match self.family {
            Family::TorusProduct if infinite > 0 => bad("torus_product factors must all be finite".into()),
            Family::CyclicChords if d != 1 || infinite > 0 => {
                bad("cyclic_chords takes exactly one finite factor".into())
            }
            Family::ZTimesTorus if self.factors[0] != Modulus::Infinite || infinite != 1 => {
                bad("z_times_torus needs factor 0 = inf and finite remaining factors".into())
            }
            _ => {
                // Generator symmetry is checked on expansion.
                self.generator_set().map(|_| ())
            }
        }
    }

    /// Expanded generating set: canonical, identity removed, sorted, and
    /// closed under negation.
    pub fn generator_set(&self) -> Result<Vec<Vec<i64>>> {
        let d = self.dims();
        let full_factors: BTreeSet<usize> = self
            .generators
            .iter()
            .filter_map(|g| match g {
                GenTerm::Full(i) => Some(*i),
                _ => None,
            })
            .collect();
        let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut explicit: Vec<Vec<i64>> = Vec::new();
        for g in &self.generators {
            let parts: Vec<FactorSet> = match g {
                GenTerm::Box => (0..d)
                    .map(|i| {
                        if full_factors.contains(&i) {
                            FactorSet::Zero
                        } else {
                            FactorSet::Unit
                        }
                    })
                    .collect(),
                GenTerm::Full(i) => (0..d)
                    .map(|j| if j == *i { FactorSet::Full } else { FactorSet::Zero })
                    .collect(),
                GenTerm::Chords(k) => (0..d)
                    .map(|j| if j == 0 { FactorSet::Chords(*k) } else { FactorSet::Zero })
                    .collect(),
                GenTerm::Product(parts) => parts.clone(),
                GenTerm::Offset(v) => {
                    explicit.push(self.canonical(v));
                    continue;
                }
            };
            let ranges: Vec<Vec<i64>> = parts
                .iter()
                .zip(&self.factors)
                .map(|(p, m)| self.component_values(*p, *m))
                .collect::<Result<_>>()?;
            let mut count: u128 = 1;
            for r in &ranges {
                count = count.saturating_mul(r.len() as u128);
            }
            if count > 10_000_000 {
                return Err(Error::InvalidSpec(format!(
                    "generator term expands to {count} elements"
                )));
            }
            let mut tuple = vec![0i64; d];
            expand(&ranges, 0, &mut tuple, &mut |t| {
                out.insert(self.canonical(t));
            });
        }
        out.extend(explicit.iter().cloned());
        let zero = vec![0i64; d];
        out.remove(&self.canonical(&zero));
        for g in &out {
            let neg: Vec<i64> = g.iter().map(|x| -x).collect();
            if !out.contains(&self.canonical(&neg)) {
                return Err(Error::InvalidSpec(format!(
                    "generating set is not symmetric: {g:?} has no inverse"
                )));
            }
        }
        Ok(out.into_iter().collect())
    }

    fn component_values(&self, part: FactorSet, m: Modulus) -> Result<Vec<i64>> {
        Ok(match part {
            FactorSet::Zero => vec![0],
            FactorSet::Unit => vec![-1, 0, 1],
            FactorSet::Chords(k) => {
                let k = match m {
                    Modulus::Finite(m) => k.min(m) as i64,
                    Modulus::Infinite => k as i64,
                };
                (-k..=k).collect()
            }
            FactorSet::Full => match m {
                Modulus::Finite(m) => (0..m as i64).collect(),
                Modulus::Infinite => return Err(Error::InvalidSpec("cannot take all of an infinite factor".into())),
            },
        })
    }

    /// Reduces a group tuple to canonical representatives.
    pub fn canonical(&self, t: &[i64]) -> Vec<i64> {
        t.iter().zip(&self.factors).map(|(&x, &m)| m.reduce(x)).collect()
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("GraphSpec always serializes")
    }

    /// Short stable identifier: first 16 hex digits of SHA-256 of the text form.
    pub fn hash_hex(&self) -> String {
        short_hash(self.to_text().as_bytes())
    }
}

pub(crate) fn short_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

fn expand(ranges: &[Vec<i64>], i: usize, tuple: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if i == ranges.len() {
        f(tuple);
        return;
    }
    for &x in &ranges[i] {
        tuple[i] = x;
        expand(ranges, i + 1, tuple, f);
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let text = "family = \"torus_product\"\nfactors = [4, 4, 3]\ngenerators = [\"box\", \"full:2\"]\nradius = 3\n";
        let spec: GraphSpec = text.parse().unwrap();
        assert_eq!(
            spec.factors,
            vec![Modulus::Finite(4), Modulus::Finite(4), Modulus::Finite(3)]
        );
        assert_eq!(spec.generators, vec![GenTerm::Box, GenTerm::Full(2)]);
        assert_eq!(spec.radius, Some(3));
        assert_eq!(spec.to_text(), text);
    }

    #[test]
    fn infinite_factor_token() {
        let text = "family = \"z_times_torus\"\nfactors = [inf, 5, 5]\ngenerators = [\"box\"]\n";
        let spec: GraphSpec = text.parse().unwrap();
        assert_eq!(spec.factors[0], Modulus::Infinite);
        assert_eq!(spec.to_text(), text);
    }

    #[test]
    fn box_plus_full_factor_has_ten_generators() {
        let spec = GraphSpec::torus_with_full_factor(4, 2, 3).unwrap();
        assert_eq!(spec.generator_set().unwrap().len(), 8 + 2);
    }

    #[test]
    fn product_term_matches_cartesian_product() {
        let spec = GraphSpec::new(
            Family::Explicit,
            vec![Modulus::Infinite, Modulus::Finite(3)],
            vec![GenTerm::Product(vec![FactorSet::Unit, FactorSet::Full])],
        )
        .unwrap();
        // 3 * 3 - identity
        assert_eq!(spec.generator_set().unwrap().len(), 8);
    }

    #[test]
    fn chords_collapse_modulo_n() {
        let spec = GraphSpec::cyclic(10, 4).unwrap();
        assert_eq!(
            spec.generator_set().unwrap(),
            vec![vec![1], vec![2], vec![3], vec![4], vec![6], vec![7], vec![8], vec![9]]
        );
        // {-5..5} in Z/10Z: 5 ≡ -5
        assert_eq!(GraphSpec::cyclic(10, 5).unwrap().generator_set().unwrap().len(), 9);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("family = \"torus_product\"\nfactors = [1]\ngenerators = [\"box\"]\n"
            .parse::<GraphSpec>()
            .is_err());
        assert!(
            "family = \"explicit\"\nfactors = [5]\ngenerators = [[1]]\n"
                .parse::<GraphSpec>()
                .is_err(),
            "asymmetric explicit set"
        );
        assert!(
            "family = \"explicit\"\nfactors = [5]\ngenerators = [\"box\"]\ncolour = 1\n"
                .parse::<GraphSpec>()
                .is_err(),
            "unknown key"
        );
        assert!("family = \"torus_product\"\nfactors = [inf]\ngenerators = [\"box\"]\n"
            .parse::<GraphSpec>()
            .is_err());
        assert!("family = \"explicit\"\nfactors = [inf]\ngenerators = [\"full:0\"]\n"
            .parse::<GraphSpec>()
            .is_err());
        assert!("family = \"explicit\"\nfactors = [5]\ngenerators = [\"nope\"]\n"
            .parse::<GraphSpec>()
            .is_err());
    }

    fn arb_spec() -> impl Strategy<Value = GraphSpec> {
        let modulus = prop_oneof![(2u64..12).prop_map(Modulus::Finite), Just(Modulus::Infinite)];
        (
            proptest::collection::vec(modulus, 1..4),
            any::<bool>(),
            proptest::option::of(0u32..40),
        )
            .prop_filter_map("valid spec", |(factors, with_offset, radius)| {
                let d = factors.len();
                let mut generators = vec![GenTerm::Box];
                if let Some(i) = factors.iter().position(|m| m.finite().is_some()) {
                    generators.push(GenTerm::Full(i));
                }
                if with_offset {
                    let mut v = vec![0i64; d];
                    v[0] = 2;
                    generators.push(GenTerm::Offset(v.clone()));
                    v[0] = -2;
                    generators.push(GenTerm::Offset(v));
                }
                let parts = factors
                    .iter()
                    .map(|m| {
                        if m.finite().is_some() {
                            FactorSet::Full
                        } else {
                            FactorSet::Chords(2)
                        }
                    })
                    .collect();
                generators.push(GenTerm::Product(parts));
                let mut spec = GraphSpec::new(Family::Explicit, factors, generators).ok()?;
                spec.radius = radius;
                Some(spec)
            })
    }

    proptest! {
        #[test]
        fn text_round_trip_is_byte_stable(spec in arb_spec()) {
            let text = spec.to_text();
            let back: GraphSpec = text.parse().unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
