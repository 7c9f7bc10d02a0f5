//! Core data model: exact rationals, residues, graded vectors, Jordan block
//! multisets, per-point local data and the module descriptor itself.
//!
//! All arithmetic is exact. Rational values use arbitrary precision;
//! multiplicities and graded counts live in machine words and overflow is a
//! hard error, never a wrap.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used for residues and point coordinates.
pub type Rational = num_rational::BigRational;

/// Checked i64 addition.
pub(crate) fn cadd(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

/// Checked i64 multiplication.
pub(crate) fn cmul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Checked u64 addition.
pub(crate) fn uadd(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

/// Checked u64 multiplication.
pub(crate) fn umul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Checked conversion of a multiplicity into a signed count.
pub(crate) fn to_i64(u: u64) -> Result<i64> {
    i64::try_from(u).map_err(|_| Error::Overflow)
}

/// Canonical text form of a rational: `n` when integral, else `n/d`.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `n` or `n/d` with arbitrary-precision integers. Rejects everything
/// else, in particular decimal floats.
pub fn rational_from_str(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("malformed rational '{s}'"));
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let parse_int = |t: &str| -> Result<BigInt> { t.parse::<BigInt>().map_err(|_| bad()) };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let numer = parse_int(n)?;
            let denom = parse_int(d)?;
            if denom.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// A monodromy residue: an exact rational in the fundamental interval [0, 1).
///
/// The residue `a` stands for the eigenvalue `exp(-2 pi i a)` of the local
/// monodromy; `a = 0` is the unipotent direction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Residue(Rational);

impl Residue {
    /// Wrap a rational already in [0, 1).
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() || value >= Rational::one() {
            return Err(Error::ResidueOutOfRange(rational_to_string(&value)));
        }
        Ok(Residue(value))
    }

    /// Reduce an arbitrary rational modulo 1 into [0, 1).
    pub fn reduced(value: &Rational) -> Self {
        Residue(value - value.floor())
    }

    pub fn zero() -> Self {
        Residue(Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// Sum modulo 1, together with the carry (true when the raw sum reached 1).
    pub fn add(&self, other: &Residue) -> (Residue, bool) {
        let raw = &self.0 + &other.0;
        let carry = raw >= Rational::one();
        (Residue::reduced(&raw), carry)
    }

    /// `(1 - a) mod 1`: the residue of the dual eigenvalue.
    pub fn complement(&self) -> Residue {
        if self.is_zero() {
            Residue::zero()
        } else {
            Residue(Rational::one() - &self.0)
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational_to_string(&self.0))
    }
}

/// A point of the compactified line: a finite coordinate or infinity.
///
/// Ordering puts finite points first (by value) and infinity last, which is
/// also the display order of every table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointId {
    Finite(Rational),
    Infinity,
}

impl PointId {
    pub fn finite(value: Rational) -> Self {
        PointId::Finite(value)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, PointId::Infinity)
    }
}

impl Ord for PointId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use PointId::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinity) => std::cmp::Ordering::Less,
            (Infinity, Finite(_)) => std::cmp::Ordering::Greater,
            (Infinity, Infinity) => std::cmp::Ordering::Equal,
        }
    }
}

impl PartialOrd for PointId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointId::Finite(v) => f.write_str(&rational_to_string(v)),
            PointId::Infinity => f.write_str("inf"),
        }
    }
}

/// Sparse vector indexed by Hodge degree. Zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedVector {
    entries: BTreeMap<i64, i64>,
}

impl GradedVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (i64, i64)>>(pairs: I) -> Result<Self> {
        let mut v = Self::new();
        for (p, n) in pairs {
            v.add_at(p, n)?;
        }
        Ok(v)
    }

    pub fn get(&self, p: i64) -> i64 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    /// Add `n` at degree `p` with overflow checking; drops the entry when it
    /// cancels to zero.
    pub fn add_at(&mut self, p: i64, n: i64) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let next = cadd(self.get(p), n)?;
        if next == 0 {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, next);
        }
        Ok(())
    }

    pub fn set(&mut self, p: i64, n: i64) {
        if n == 0 {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, n);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.entries.iter().map(|(&p, &n)| (p, n))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.values().all(|&n| n >= 0)
    }

    pub fn support_min(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn support_max(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    /// Sum of all entries.
    pub fn total(&self) -> Result<i64> {
        let mut acc = 0i64;
        for (_, n) in self.iter() {
            acc = cadd(acc, n)?;
        }
        Ok(acc)
    }

    /// Re-index degrees by `p -> p + k`.
    pub fn shifted(&self, k: i64) -> Result<GradedVector> {
        let mut out = GradedVector::new();
        for (p, n) in self.iter() {
            out.add_at(cadd(p, k)?, n)?;
        }
        Ok(out)
    }

    /// Re-index degrees by `p -> -p`.
    pub fn mirrored(&self) -> GradedVector {
        let mut out = GradedVector::new();
        for (p, n) in self.iter() {
            out.set(-p, n);
        }
        out
    }

    pub fn plus(&self, other: &GradedVector) -> Result<GradedVector> {
        let mut out = self.clone();
        for (p, n) in other.iter() {
            out.add_at(p, n)?;
        }
        Ok(out)
    }

    pub fn minus(&self, other: &GradedVector) -> Result<GradedVector> {
        let mut out = self.clone();
        for (p, n) in other.iter() {
            out.add_at(p, n.checked_neg().ok_or(Error::Overflow)?)?;
        }
        Ok(out)
    }

    /// Degree-wise convolution: `(f * g)[l] = sum_p f[p] g[l-p]`.
    pub fn convolve(&self, other: &GradedVector) -> Result<GradedVector> {
        let mut out = GradedVector::new();
        for (p, n) in self.iter() {
            for (q, m) in other.iter() {
                out.add_at(cadd(p, q)?, cmul(n, m)?)?;
            }
        }
        Ok(out)
    }
}

impl FromIterator<(i64, i64)> for GradedVector {
    fn from_iter<I: IntoIterator<Item = (i64, i64)>>(iter: I) -> Self {
        GradedVector::from_pairs(iter).expect("graded vector literal overflowed")
    }
}

/// One Jordan block family of the local monodromy with its Hodge placement:
/// `mult` copies of a block of size `size` and residue `residue` whose top
/// Hodge degree is `degree`. The block occupies one dimension in each degree
/// `degree - size + 1 ..= degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JordanBlock {
    pub degree: i64,
    pub residue: Residue,
    pub size: u64,
    pub mult: u64,
}

impl fmt::Display for JordanBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "J^{}({}, {}) x {}",
            self.degree, self.residue, self.size, self.mult
        )
    }
}

/// Multiset of Jordan blocks, merged by (residue, size, degree) key.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockSet {
    map: BTreeMap<(Residue, u64, i64), u64>,
}

impl BlockSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, degree: i64, residue: Residue, size: u64, mult: u64) -> Result<()> {
        if size == 0 {
            return Err(Error::InvalidArgument("Jordan block of size 0".into()));
        }
        if mult == 0 {
            return Ok(());
        }
        let slot = self.map.entry((residue, size, degree)).or_insert(0);
        *slot = uadd(*slot, mult)?;
        Ok(())
    }

    pub fn insert_block(&mut self, block: &JordanBlock) -> Result<()> {
        self.insert(block.degree, block.residue.clone(), block.size, block.mult)
    }

    pub fn merge(&mut self, other: &BlockSet) -> Result<()> {
        for b in other.iter() {
            self.insert_block(&b)?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = JordanBlock> + '_ {
        self.map.iter().map(|((a, l, p), &m)| JordanBlock {
            degree: *p,
            residue: a.clone(),
            size: *l,
            mult: m,
        })
    }

    /// Blocks in display order: residue ascending, then size descending,
    /// then top degree descending.
    pub fn sorted_for_display(&self) -> Vec<JordanBlock> {
        let mut v: Vec<JordanBlock> = self.iter().collect();
        v.sort_by(|x, y| {
            x.residue
                .cmp(&y.residue)
                .then(y.size.cmp(&x.size))
                .then(y.degree.cmp(&x.degree))
        });
        v
    }

    /// Total dimension: sum of size * mult.
    pub fn dimension(&self) -> Result<u64> {
        let mut acc = 0u64;
        for b in self.iter() {
            acc = uadd(acc, umul(b.size, b.mult)?)?;
        }
        Ok(acc)
    }

    /// Nearby-cycle counts per (degree, residue): each block contributes one
    /// unit to every degree it spans.
    pub fn nearby_counts(&self) -> Result<BTreeMap<(i64, Residue), u64>> {
        let mut out: BTreeMap<(i64, Residue), u64> = BTreeMap::new();
        for b in self.iter() {
            let lo = b.degree - to_i64(b.size)? + 1;
            for q in lo..=b.degree {
                let slot = out.entry((q, b.residue.clone())).or_insert(0);
                *slot = uadd(*slot, b.mult)?;
            }
        }
        Ok(out)
    }

    /// Project full block data to aggregate counts: nearby cycles for nonzero
    /// residues, vanishing cycles for the unipotent part.
    pub fn to_aggregate(&self) -> Result<AggregateData> {
        let mut agg = AggregateData::default();
        for b in self.iter() {
            let lo = b.degree - to_i64(b.size)? + 1;
            if b.residue.is_zero() {
                for q in (lo + 1)..=b.degree {
                    agg.add_mu(q, b.mult)?;
                }
            } else {
                for q in lo..=b.degree {
                    agg.add_nu(q, b.residue.clone(), b.mult)?;
                }
            }
        }
        Ok(agg)
    }
}

impl FromIterator<JordanBlock> for BlockSet {
    fn from_iter<I: IntoIterator<Item = JordanBlock>>(iter: I) -> Self {
        let mut s = BlockSet::new();
        for b in iter {
            s.insert_block(&b).expect("block literal overflowed");
        }
        s
    }
}

/// Aggregate local data: what survives when block sizes are unknown.
///
/// `nu_nonzero` holds nearby-cycle counts for nonzero residues, keyed by
/// (degree, residue). `mu_zero` holds unipotent vanishing-cycle counts by
/// degree. For nonzero residues the vanishing counts equal the nearby ones,
/// so nothing further is needed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AggregateData {
    pub nu_nonzero: BTreeMap<(i64, Residue), u64>,
    pub mu_zero: BTreeMap<i64, u64>,
}

impl AggregateData {
    pub fn add_nu(&mut self, degree: i64, residue: Residue, mult: u64) -> Result<()> {
        if residue.is_zero() {
            return Err(Error::InvalidArgument(
                "aggregate nu_nonzero entry with residue 0".into(),
            ));
        }
        if mult == 0 {
            return Ok(());
        }
        let slot = self.nu_nonzero.entry((degree, residue)).or_insert(0);
        *slot = uadd(*slot, mult)?;
        Ok(())
    }

    pub fn add_mu(&mut self, degree: i64, mult: u64) -> Result<()> {
        if mult == 0 {
            return Ok(());
        }
        let slot = self.mu_zero.entry(degree).or_insert(0);
        *slot = uadd(*slot, mult)?;
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.nu_nonzero.is_empty() && self.mu_zero.is_empty()
    }
}

/// Local data attached to one singular point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalData {
    /// Full Jordan-block decomposition with Hodge placement.
    Blocks(BlockSet),
    /// Aggregate nearby/vanishing counts only.
    Aggregate(AggregateData),
    /// Marked present but with no numerical content (partial descriptors).
    Unknown,
}

impl LocalData {
    pub fn is_unknown(&self) -> bool {
        matches!(self, LocalData::Unknown)
    }

    /// The aggregate view of this data, projecting blocks when needed.
    pub fn aggregate_view(&self) -> Result<AggregateData> {
        match self {
            LocalData::Blocks(b) => b.to_aggregate(),
            LocalData::Aggregate(a) => Ok(a.clone()),
            LocalData::Unknown => Err(Error::InvalidArgument(
                "no aggregate view of unknown local data".into(),
            )),
        }
    }
}

/// Structural assertions carried by a descriptor, stated by whoever produced
/// the data. The calculus requires irreducible nonconstant minimal extensions;
/// derived outputs may drop the irreducibility claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub irreducible: bool,
    pub nonconstant: bool,
    pub minimal_extension: bool,
}

impl Flags {
    pub fn all_set() -> Self {
        Flags {
            irreducible: true,
            nonconstant: true,
            minimal_extension: true,
        }
    }

    pub fn asserts_standard_hypotheses(&self) -> bool {
        self.irreducible && self.nonconstant && self.minimal_extension
    }
}

/// Numerical shadow of one module: generic Hodge numbers, filtration degrees,
/// local data at every singular point, and optional parabolic cohomology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleData {
    pub name: String,
    /// Hodge numbers of the generic fiber, by degree.
    pub h: GradedVector,
    /// Degrees of the Hodge bundles of the extension at the fundamental
    /// lattice; `None` when the descriptor marks them unknown.
    pub delta: Option<GradedVector>,
    /// Local data per singular point. The entry at infinity is mandatory for
    /// a fully valid module.
    pub points: BTreeMap<PointId, LocalData>,
    /// Hodge numbers of parabolic cohomology, when known.
    pub h1par: Option<GradedVector>,
    pub flags: Flags,
    /// Free-form scalar side data (used by partial constructors).
    pub annotations: BTreeMap<String, String>,
}

impl ModuleData {
    pub fn new(name: impl Into<String>) -> Self {
        ModuleData {
            name: name.into(),
            h: GradedVector::new(),
            delta: Some(GradedVector::new()),
            points: BTreeMap::new(),
            h1par: None,
            flags: Flags::default(),
            annotations: BTreeMap::new(),
        }
    }

    /// Generic rank: total of the Hodge numbers.
    pub fn rank(&self) -> Result<i64> {
        self.h.total()
    }

    pub fn delta_known(&self, op: &'static str) -> Result<&GradedVector> {
        self.delta.as_ref().ok_or(Error::UnknownField {
            module: self.name.clone(),
            field: "delta",
            op,
        })
    }

    pub fn has_infinity(&self) -> bool {
        self.points.contains_key(&PointId::Infinity)
    }

    pub fn local(&self, point: &PointId) -> Option<&LocalData> {
        self.points.get(point)
    }

    /// Block data at infinity, or an error naming the operation that needs it.
    pub fn infinity_blocks(&self, op: &'static str) -> Result<&BlockSet> {
        match self.points.get(&PointId::Infinity) {
            None => Err(Error::MissingInfinity {
                module: self.name.clone(),
            }),
            Some(LocalData::Blocks(b)) => Ok(b),
            Some(LocalData::Aggregate(_)) => Err(Error::BlocksRequired {
                module: self.name.clone(),
                point: "inf".into(),
                op,
            }),
            Some(LocalData::Unknown) => Err(Error::MissingLocalData {
                module: self.name.clone(),
                point: "inf".into(),
                op,
            }),
        }
    }

    pub fn finite_points(&self) -> impl Iterator<Item = (&Rational, &LocalData)> {
        self.points.iter().filter_map(|(p, d)| match p {
            PointId::Finite(v) => Some((v, d)),
            PointId::Infinity => None,
        })
    }

    /// The local model of a smooth point: one size-one unipotent block per
    /// Hodge cell of the generic fiber.
    pub fn smooth_model(h: &GradedVector) -> Result<BlockSet> {
        let mut out = BlockSet::new();
        for (p, n) in h.iter() {
            if n < 0 {
                return Err(Error::Unrealizable(format!("negative h at degree {p}")));
            }
            out.insert(p, Residue::zero(), 1, n as u64)?;
        }
        Ok(out)
    }

    /// Mathematical-content equality: every field except `name` and
    /// `annotations`. Points are compared at the finest common granularity:
    /// exact when both sides store the same form, via the aggregate
    /// projection when one side has blocks and the other aggregates.
    pub fn numeric_eq(&self, other: &ModuleData) -> bool {
        if self.h != other.h
            || self.delta != other.delta
            || self.h1par != other.h1par
            || self.flags != other.flags
        {
            return false;
        }
        if self.points.len() != other.points.len() {
            return false;
        }
        for ((pa, da), (pb, db)) in self.points.iter().zip(other.points.iter()) {
            if pa != pb {
                return false;
            }
            let same = match (da, db) {
                (LocalData::Unknown, LocalData::Unknown) => true,
                (LocalData::Unknown, _) | (_, LocalData::Unknown) => false,
                (LocalData::Blocks(x), LocalData::Blocks(y)) => x == y,
                (x, y) => match (x.aggregate_view(), y.aggregate_view()) {
                    (Ok(ax), Ok(ay)) => ax == ay,
                    _ => false,
                },
            };
            if !same {
                return false;
            }
        }
        true
    }
}
