//! Derived invariant tables, structural validation, parabolic cohomology,
//! and the data transforms that re-frame a module (Tate twist, translation,
//! coordinate inversion, numeric duality, relocation).

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result, ValidationReport};
use crate::model::{
    cadd, to_i64, uadd, BlockSet, GradedVector, LocalData, ModuleData, PointId, Rational, Residue,
};

/// Derived local tables at one singular point.
///
/// `nu` is the full nearby-cycle table over all residues (the unipotent row
/// is reconstructed from `h` for aggregate points). `mu_zero` is the
/// unipotent vanishing-cycle table. `omega` collects the defect
/// `nu_{!=0} + mu_0` one degree up; `kappa = nu_0 - mu_0` shifted counts
/// unipotent Jordan blocks by their top degree.
#[derive(Debug, Clone, Default)]
pub struct PointTables {
    pub nu: BTreeMap<(i64, Residue), u64>,
    pub mu_zero: BTreeMap<i64, u64>,
    pub omega: GradedVector,
    pub omega_ss: GradedVector,
    pub omega_u: GradedVector,
    pub kappa: GradedVector,
    pub omega_by_residue: BTreeMap<(i64, Residue), u64>,
}

impl PointTables {
    pub fn nu_at(&self, degree: i64, residue: &Residue) -> u64 {
        self.nu
            .get(&(degree, residue.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn mu_zero_at(&self, degree: i64) -> u64 {
        self.mu_zero.get(&degree).copied().unwrap_or(0)
    }

    /// Vanishing-cycle table re-indexed on the half-open interval (0, 1]:
    /// nonzero residues keep their nearby counts, the unipotent part moves
    /// to residue 1. This is the index convention of the finite convolution
    /// rule.
    pub fn vanishing_unit_interval(&self) -> BTreeMap<(i64, Rational), u64> {
        let mut out = BTreeMap::new();
        for ((p, a), &n) in &self.nu {
            if !a.is_zero() && n > 0 {
                out.insert((*p, a.value().clone()), n);
            }
        }
        for (&p, &n) in &self.mu_zero {
            if n > 0 {
                out.insert((p, Rational::from_integer(1.into())), n);
            }
        }
        out
    }

    fn from_counts(
        nu: BTreeMap<(i64, Residue), u64>,
        mu_zero: BTreeMap<i64, u64>,
        kappa: GradedVector,
    ) -> Result<Self> {
        let mut omega = GradedVector::new();
        let mut omega_ss = GradedVector::new();
        let mut omega_u = GradedVector::new();
        let mut omega_by_residue: BTreeMap<(i64, Residue), u64> = BTreeMap::new();
        for ((p, a), &n) in &nu {
            if a.is_zero() || n == 0 {
                continue;
            }
            omega.add_at(*p, to_i64(n)?)?;
            omega_ss.add_at(*p, to_i64(n)?)?;
            let slot = omega_by_residue.entry((*p, a.clone())).or_insert(0);
            *slot = uadd(*slot, n)?;
        }
        for (&p, &n) in &mu_zero {
            if n == 0 {
                continue;
            }
            omega.add_at(p - 1, to_i64(n)?)?;
            omega_u.add_at(p - 1, to_i64(n)?)?;
            let slot = omega_by_residue.entry((p - 1, Residue::zero())).or_insert(0);
            *slot = uadd(*slot, n)?;
        }
        Ok(PointTables {
            nu,
            mu_zero,
            omega,
            omega_ss,
            omega_u,
            kappa,
            omega_by_residue,
        })
    }

    /// Tables of block-level data.
    pub fn from_blocks(blocks: &BlockSet) -> Result<Self> {
        let nu = blocks.nearby_counts()?;
        let mut mu_zero: BTreeMap<i64, u64> = BTreeMap::new();
        let mut kappa = GradedVector::new();
        for b in blocks.iter() {
            if !b.residue.is_zero() {
                continue;
            }
            kappa.add_at(b.degree, to_i64(b.mult)?)?;
            let lo = b.degree - to_i64(b.size)? + 1;
            for q in (lo + 1)..=b.degree {
                let slot = mu_zero.entry(q).or_insert(0);
                *slot = uadd(*slot, b.mult)?;
            }
        }
        Self::from_counts(nu, mu_zero, kappa)
    }

    /// Tables of aggregate data; the unipotent nearby row is reconstructed
    /// from the generic Hodge numbers.
    pub fn from_aggregate(
        agg: &crate::model::AggregateData,
        h: &GradedVector,
        point: &PointId,
    ) -> Result<Self> {
        let mut nu: BTreeMap<(i64, Residue), u64> = BTreeMap::new();
        let mut nonzero_row = GradedVector::new();
        for ((p, a), &n) in &agg.nu_nonzero {
            if n == 0 {
                continue;
            }
            nu.insert((*p, a.clone()), n);
            nonzero_row.add_at(*p, to_i64(n)?)?;
        }
        let degrees: Vec<i64> = h
            .iter()
            .map(|(p, _)| p)
            .chain(nonzero_row.iter().map(|(p, _)| p))
            .collect();
        for p in degrees {
            let unipotent = h.get(p) - nonzero_row.get(p);
            if unipotent < 0 {
                return Err(Error::Unrealizable(format!(
                    "at {point}: nearby counts exceed h at degree {p}"
                )));
            }
            if unipotent > 0 {
                nu.insert((p, Residue::zero()), unipotent as u64);
            }
        }
        let mut kappa = GradedVector::new();
        for (&(p, ref a), &n) in &nu {
            if a.is_zero() {
                let k = to_i64(n)? - to_i64(agg.mu_zero.get(&(p + 1)).copied().unwrap_or(0))?;
                if k < 0 {
                    return Err(Error::Unrealizable(format!(
                        "at {point}: vanishing counts exceed nearby counts at degree {}",
                        p + 1
                    )));
                }
                kappa.add_at(p, k)?;
            }
        }
        for (&p, &n) in &agg.mu_zero {
            let available = nu
                .get(&(p, Residue::zero()))
                .copied()
                .unwrap_or(0);
            if n > available {
                return Err(Error::Unrealizable(format!(
                    "at {point}: unipotent vanishing count at degree {p} exceeds the nearby count"
                )));
            }
        }
        Self::from_counts(nu, agg.mu_zero.clone(), kappa)
    }
}

/// All derived tables of one module: per-point data plus global totals.
/// Totals are only available when every point is known (and, for the full
/// totals, the entry at infinity exists); accessors return descriptive
/// errors otherwise.
#[derive(Debug, Clone)]
pub struct InvariantTables {
    module: String,
    points: BTreeMap<PointId, PointTables>,
    unknown_points: Vec<PointId>,
    has_infinity: bool,
    omega_not_infinity: Option<GradedVector>,
    omega_ss_not_infinity: Option<GradedVector>,
    omega_u_not_infinity: Option<GradedVector>,
    omega_not_infinity_by_residue: Option<BTreeMap<(i64, Residue), u64>>,
    omega_total: Option<GradedVector>,
    omega_scalar: Option<i64>,
}

impl InvariantTables {
    pub fn point(&self, at: &PointId) -> Option<&PointTables> {
        self.points.get(at)
    }

    pub fn unknown_points(&self) -> &[PointId] {
        &self.unknown_points
    }

    pub fn known_points(&self) -> impl Iterator<Item = (&PointId, &PointTables)> {
        self.points.iter()
    }

    pub fn require_point(&self, at: &PointId, op: &'static str) -> Result<&PointTables> {
        self.points.get(at).ok_or_else(|| Error::MissingLocalData {
            module: self.module.clone(),
            point: at.to_string(),
            op,
        })
    }

    fn missing(&self, op: &'static str) -> Error {
        if !self.has_infinity {
            return Error::MissingInfinity {
                module: self.module.clone(),
            };
        }
        Error::MissingLocalData {
            module: self.module.clone(),
            point: self
                .unknown_points
                .first()
                .map(|p| p.to_string())
                .unwrap_or_else(|| "?".into()),
            op,
        }
    }

    pub fn omega_not_infinity(&self, op: &'static str) -> Result<&GradedVector> {
        self.omega_not_infinity.as_ref().ok_or_else(|| self.missing(op))
    }

    pub fn omega_ss_not_infinity(&self, op: &'static str) -> Result<&GradedVector> {
        self.omega_ss_not_infinity
            .as_ref()
            .ok_or_else(|| self.missing(op))
    }

    pub fn omega_u_not_infinity(&self, op: &'static str) -> Result<&GradedVector> {
        self.omega_u_not_infinity
            .as_ref()
            .ok_or_else(|| self.missing(op))
    }

    pub fn omega_not_infinity_by_residue(
        &self,
        op: &'static str,
    ) -> Result<&BTreeMap<(i64, Residue), u64>> {
        self.omega_not_infinity_by_residue
            .as_ref()
            .ok_or_else(|| self.missing(op))
    }

    pub fn omega_total(&self, op: &'static str) -> Result<&GradedVector> {
        self.omega_total.as_ref().ok_or_else(|| self.missing(op))
    }

    pub fn omega_scalar(&self, op: &'static str) -> Result<i64> {
        self.omega_scalar.ok_or_else(|| self.missing(op))
    }
}

/// Compute every derived table of a module. Errors only on numerically
/// inconsistent local data (and overflow); partial descriptors simply yield
/// partial tables.
pub fn derive_tables(m: &ModuleData) -> Result<InvariantTables> {
    let mut points = BTreeMap::new();
    let mut unknown = Vec::new();
    for (at, data) in &m.points {
        match data {
            LocalData::Blocks(b) => {
                points.insert(at.clone(), PointTables::from_blocks(b)?);
            }
            LocalData::Aggregate(a) => {
                points.insert(at.clone(), PointTables::from_aggregate(a, &m.h, at)?);
            }
            LocalData::Unknown => unknown.push(at.clone()),
        }
    }
    let has_infinity = m.has_infinity();
    let finite_complete = !m
        .points
        .iter()
        .any(|(p, d)| !p.is_infinity() && d.is_unknown());
    let infinity_known = points.contains_key(&PointId::Infinity);

    let mut tables = InvariantTables {
        module: m.name.clone(),
        points,
        unknown_points: unknown,
        has_infinity,
        omega_not_infinity: None,
        omega_ss_not_infinity: None,
        omega_u_not_infinity: None,
        omega_not_infinity_by_residue: None,
        omega_total: None,
        omega_scalar: None,
    };

    if finite_complete {
        let mut total = GradedVector::new();
        let mut ss = GradedVector::new();
        let mut uni = GradedVector::new();
        let mut by_res: BTreeMap<(i64, Residue), u64> = BTreeMap::new();
        for (at, pt) in &tables.points {
            if at.is_infinity() {
                continue;
            }
            total = total.plus(&pt.omega)?;
            ss = ss.plus(&pt.omega_ss)?;
            uni = uni.plus(&pt.omega_u)?;
            for (key, &n) in &pt.omega_by_residue {
                let slot = by_res.entry(key.clone()).or_insert(0);
                *slot = uadd(*slot, n)?;
            }
        }
        tables.omega_not_infinity = Some(total);
        tables.omega_ss_not_infinity = Some(ss);
        tables.omega_u_not_infinity = Some(uni);
        tables.omega_not_infinity_by_residue = Some(by_res);
        if infinity_known {
            let with_inf = tables
                .omega_not_infinity
                .as_ref()
                .expect("just set")
                .plus(&tables.points[&PointId::Infinity].omega)?;
            tables.omega_scalar = Some(with_inf.total()?);
            tables.omega_total = Some(with_inf);
        }
    }
    Ok(tables)
}

/// Structural validation. Never panics and never errors: every problem
/// becomes a violation (hard) or a warning (advisory).
pub fn validate_module(m: &ModuleData) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !m.h.is_nonnegative() {
        report.violation("negative-h", "h has a negative entry".into());
    }
    match m.h.total() {
        Ok(r) if r >= 1 => {}
        Ok(_) => report.violation("rank-zero", "generic rank must be at least 1".into()),
        Err(_) => report.violation("overflow", "rank computation overflowed".into()),
    }
    if let Some(delta) = &m.delta {
        for (p, d) in delta.iter() {
            if m.h.get(p) == 0 && d != 0 {
                report.violation(
                    "delta-outside-h-support",
                    format!("delta[{p}] = {d} but h[{p}] = 0"),
                );
            }
        }
    } else {
        report.warn("delta is marked unknown (partial descriptor)".into());
    }
    if !m.has_infinity() {
        report.violation(
            "missing-infinity",
            "no entry at infinity; every module is singular there".into(),
        );
    }
    for (at, data) in &m.points {
        if data.is_unknown() {
            report.warn(format!("local data at {at} is marked unknown"));
        }
    }

    let tables = match derive_tables(m) {
        Ok(t) => t,
        Err(e) => {
            report.violation("inconsistent-local-data", e.to_string());
            return report;
        }
    };
    for (at, pt) in tables.known_points() {
        if matches!(m.points.get(at), Some(LocalData::Blocks(_))) {
            let mut row_totals = GradedVector::new();
            for ((p, _), &n) in &pt.nu {
                let n = match to_i64(n) {
                    Ok(v) => v,
                    Err(_) => {
                        report.violation("overflow", format!("nearby counts at {at} overflowed"));
                        continue;
                    }
                };
                if row_totals.add_at(*p, n).is_err() {
                    report.violation("overflow", format!("nearby counts at {at} overflowed"));
                }
            }
            if row_totals != m.h {
                report.violation(
                    "local-global-mismatch",
                    format!("at {at}: sum of nearby counts per degree differs from h"),
                );
            }
        }
    }

    if let (Some(omega), Ok(rank)) = (tables.omega_scalar, m.h.total()) {
        if omega < 2 * rank {
            report.warn(format!(
                "omega = {omega} is below 2 rank = {}: no such irreducible module exists",
                2 * rank
            ));
        }
    }

    if let (Some(stored), Some(_)) = (&m.h1par, &m.delta) {
        if !stored.is_nonnegative() {
            report.violation("negative-h1par", "stored h1par has a negative entry".into());
        }
        if let Ok(computed) = h1par_from_parts(m, &tables) {
            if &computed != stored {
                report.violation(
                    "h1par-mismatch",
                    "stored h1par differs from the value derived from h, delta and omega".into(),
                );
            }
        }
    }
    report
}

fn h1par_from_parts(m: &ModuleData, tables: &InvariantTables) -> Result<GradedVector> {
    let delta = m.delta_known("h1par_hodge")?;
    let omega = tables.omega_total("h1par_hodge")?;
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for v in [&m.h, delta, omega] {
        if let (Some(a), Some(b)) = (v.support_min(), v.support_max()) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    let mut out = GradedVector::new();
    if lo > hi {
        return Ok(out);
    }
    for p in lo..=cadd(hi, 1)? {
        let t = cadd(
            cadd(
                delta.get(p - 1) - delta.get(p),
                -(m.h.get(p) + m.h.get(p - 1)),
            )?,
            omega.get(p - 1),
        )?;
        if t < 0 {
            return Err(Error::Unrealizable(format!(
                "negative parabolic Hodge number {t} at degree {p}"
            )));
        }
        out.set(p, t);
    }
    Ok(out)
}

/// Hodge numbers of parabolic cohomology, from the degree identity
/// `h1par[p] = delta[p-1] - delta[p] - h[p] - h[p-1] + omega[p-1]`.
///
/// Valid for irreducible nonconstant minimal extensions; callers holding a
/// convolution output that is not known to be irreducible must pass the
/// explicit waiver.
pub fn h1par_hodge(m: &ModuleData, waive_irreducibility: bool) -> Result<GradedVector> {
    if !m.flags.asserts_standard_hypotheses() && !waive_irreducibility {
        return Err(Error::NotIrreducible(m.name.clone()));
    }
    let tables = derive_tables(m)?;
    h1par_from_parts(m, &tables)
}

/// A change of presentation that leaves the isomorphism class of the
/// underlying geometry understood: Tate twist, coordinate translation, or
/// the coordinate inversion swapping 0 and infinity.
#[derive(Debug, Clone)]
pub enum Reframe {
    /// Shift every Hodge degree by `k` (the Tate twist by `-k`).
    TateTwist(i64),
    /// Move every finite singular point `x` to `x + c`.
    Translate(Rational),
    /// Pull back along `x -> 1/x`, exchanging the data at 0 and infinity.
    InvertCoordinate,
}

fn shift_local(data: &LocalData, k: i64) -> Result<LocalData> {
    Ok(match data {
        LocalData::Unknown => LocalData::Unknown,
        LocalData::Blocks(b) => {
            let mut out = BlockSet::new();
            for blk in b.iter() {
                out.insert(cadd(blk.degree, k)?, blk.residue, blk.size, blk.mult)?;
            }
            LocalData::Blocks(out)
        }
        LocalData::Aggregate(a) => {
            let mut out = crate::model::AggregateData::default();
            for ((p, res), &n) in &a.nu_nonzero {
                out.add_nu(cadd(*p, k)?, res.clone(), n)?;
            }
            for (&p, &n) in &a.mu_zero {
                out.add_mu(cadd(p, k)?, n)?;
            }
            LocalData::Aggregate(out)
        }
    })
}

/// Apply a reframing transform. All numerical invariants move transparently;
/// nothing is recomputed from scratch.
pub fn reframe(m: &ModuleData, op: &Reframe) -> Result<ModuleData> {
    let mut out = m.clone();
    match op {
        Reframe::TateTwist(k) => {
            out.h = m.h.shifted(*k)?;
            out.delta = match &m.delta {
                Some(d) => Some(d.shifted(*k)?),
                None => None,
            };
            out.h1par = match &m.h1par {
                Some(t) => Some(t.shifted(*k)?),
                None => None,
            };
            let mut points = BTreeMap::new();
            for (at, data) in &m.points {
                points.insert(at.clone(), shift_local(data, *k)?);
            }
            out.points = points;
        }
        Reframe::Translate(c) => {
            let mut points = BTreeMap::new();
            for (at, data) in &m.points {
                let moved = match at {
                    PointId::Finite(x) => PointId::Finite(x + c),
                    PointId::Infinity => PointId::Infinity,
                };
                points.insert(moved, data.clone());
            }
            out.points = points;
        }
        Reframe::InvertCoordinate => {
            let zero = PointId::Finite(Rational::zero());
            if !m.has_infinity() {
                return Err(Error::MissingInfinity {
                    module: m.name.clone(),
                });
            }
            let mut points: BTreeMap<PointId, LocalData> = BTreeMap::new();
            for (at, data) in &m.points {
                match at {
                    PointId::Finite(x) if x.is_zero() => {
                        points.insert(PointId::Infinity, data.clone());
                    }
                    PointId::Finite(x) => {
                        points.insert(PointId::Finite(x.recip()), data.clone());
                    }
                    PointId::Infinity => {
                        points.insert(zero.clone(), data.clone());
                    }
                }
            }
            if !points.contains_key(&PointId::Infinity) {
                points.insert(
                    PointId::Infinity,
                    LocalData::Blocks(ModuleData::smooth_model(&m.h)?),
                );
            }
            let drop_zero = match points.get(&zero) {
                Some(LocalData::Blocks(b)) => *b == ModuleData::smooth_model(&m.h)?,
                _ => false,
            };
            if drop_zero {
                points.remove(&zero);
            }
            out.points = points;
        }
    }
    Ok(out)
}

/// Relocate a module by `x -> c - x` (the substitution entering convolution
/// shifts). Local data is transported verbatim; infinity stays put.
pub fn relocate(m: &ModuleData, c: &Rational) -> ModuleData {
    let mut out = m.clone();
    let mut points = BTreeMap::new();
    for (at, data) in &m.points {
        let moved = match at {
            PointId::Finite(x) => PointId::Finite(c - x),
            PointId::Infinity => PointId::Infinity,
        };
        points.insert(moved, data.clone());
    }
    out.points = points;
    out
}

fn dual_local(data: &LocalData) -> Result<LocalData> {
    Ok(match data {
        LocalData::Unknown => LocalData::Unknown,
        LocalData::Blocks(b) => {
            let mut out = BlockSet::new();
            for blk in b.iter() {
                let top = to_i64(blk.size)? - 1 - blk.degree;
                out.insert(top, blk.residue.complement(), blk.size, blk.mult)?;
            }
            LocalData::Blocks(out)
        }
        LocalData::Aggregate(a) => {
            let mut out = crate::model::AggregateData::default();
            for ((p, res), &n) in &a.nu_nonzero {
                out.add_nu(-p, res.complement(), n)?;
            }
            for (&p, &n) in &a.mu_zero {
                out.add_mu(1 - p, n)?;
            }
            LocalData::Aggregate(out)
        }
    })
}

/// Numeric dual: blocks `(p, a, l) -> (l-1-p, (1-a) mod 1, l)` at every
/// point, `h` mirrored, and
/// `delta[p] -> -delta[-p] - sum over all points of nu_{!=0}[-p]`.
///
/// The correction term re-normalizes the dual of the canonical extension
/// back to the fundamental residue interval; it makes the transform an
/// involution and matches duality of parabolic cohomology degree for degree.
pub fn dual(m: &ModuleData) -> Result<ModuleData> {
    let mut out = m.clone();
    out.name = format!("dual({})", m.name);
    out.annotations.clear();
    out.h = m.h.mirrored();
    let mut points = BTreeMap::new();
    for (at, data) in &m.points {
        points.insert(at.clone(), dual_local(data)?);
    }
    out.points = points;
    out.delta = match &m.delta {
        None => None,
        Some(delta) => {
            let tables = derive_tables(m)?;
            let mut correction = GradedVector::new();
            for (at, _) in &m.points {
                let pt = tables.require_point(at, "dual")?;
                for ((p, a), &n) in &pt.nu {
                    if !a.is_zero() {
                        correction.add_at(*p, to_i64(n)?)?;
                    }
                }
            }
            let mut d = GradedVector::new();
            for (p, v) in delta.iter() {
                d.add_at(-p, -v)?;
            }
            for (p, v) in correction.iter() {
                d.add_at(-p, -v)?;
            }
            Some(d)
        }
    };
    out.h1par = match &m.h1par {
        None => None,
        Some(t) => {
            let mut flipped = GradedVector::new();
            for (p, v) in t.iter() {
                flipped.set(1 - p, v);
            }
            Some(flipped)
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeometric::make_kummer;
    use crate::model::{rational_from_str, AggregateData};

    fn rat(s: &str) -> Rational {
        rational_from_str(s).unwrap()
    }

    fn res(s: &str) -> Residue {
        Residue::new(rat(s)).unwrap()
    }

    /// Rank-two module with a size-two unipotent block at 0, used across the
    /// local-table tests.
    fn unipotent_example() -> ModuleData {
        let mut m = ModuleData::new("unipotent_two");
        m.h = [(0, 1), (1, 1)].into_iter().collect();
        m.delta = Some([(0, -1), (1, -1)].into_iter().collect());
        let mut at0 = BlockSet::new();
        at0.insert(1, Residue::zero(), 2, 1).unwrap();
        let mut at1 = BlockSet::new();
        at1.insert(0, res("1/2"), 1, 1).unwrap();
        at1.insert(1, res("1/2"), 1, 1).unwrap();
        let mut atinf = BlockSet::new();
        atinf.insert(0, res("1/3"), 1, 1).unwrap();
        atinf.insert(1, res("1/6"), 1, 1).unwrap();
        m.points.insert(PointId::Finite(rat("0")), LocalData::Blocks(at0));
        m.points.insert(PointId::Finite(rat("1")), LocalData::Blocks(at1));
        m.points.insert(PointId::Infinity, LocalData::Blocks(atinf));
        m.flags = crate::model::Flags::all_set();
        m
    }

    #[test]
    fn tables_of_a_unipotent_block() {
        let m = unipotent_example();
        let t = derive_tables(&m).unwrap();
        let p0 = t.point(&PointId::Finite(rat("0"))).unwrap();
        assert_eq!(p0.nu_at(0, &Residue::zero()), 1);
        assert_eq!(p0.nu_at(1, &Residue::zero()), 1);
        assert_eq!(p0.mu_zero_at(1), 1);
        assert_eq!(p0.kappa.get(1), 1);
        assert_eq!(p0.omega.get(0), 1);
        assert_eq!(p0.omega.get(1), 0);
        assert_eq!(p0.omega_u, p0.omega);
        assert!(p0.omega_ss.is_zero());
        let phi = p0.vanishing_unit_interval();
        assert_eq!(phi[&(1, rat("1"))], 1);
        assert_eq!(phi.len(), 1);
        assert_eq!(t.omega_scalar("test").unwrap(), 1 + 2 + 2);
    }

    #[test]
    fn aggregate_projection_gives_identical_tables() {
        let m = unipotent_example();
        let mut projected = m.clone();
        for (_, data) in projected.points.iter_mut() {
            *data = LocalData::Aggregate(data.aggregate_view().unwrap());
        }
        let a = derive_tables(&m).unwrap();
        let b = derive_tables(&projected).unwrap();
        for (at, pa) in a.known_points() {
            let pb = b.point(at).unwrap();
            assert_eq!(pa.nu, pb.nu, "nu at {at}");
            assert_eq!(pa.mu_zero, pb.mu_zero, "mu at {at}");
            assert_eq!(pa.omega, pb.omega, "omega at {at}");
            assert_eq!(pa.kappa, pb.kappa, "kappa at {at}");
            assert_eq!(pa.omega_by_residue, pb.omega_by_residue);
        }
    }

    #[test]
    fn kummer_is_rigid() {
        let k = make_kummer(&res("1/3")).unwrap();
        assert!(validate_module(&k).is_valid());
        let t = h1par_hodge(&k, false).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn rank_one_with_three_points_has_parabolic_rank_two() {
        let mut m = ModuleData::new("three_points");
        m.h = [(0, 1)].into_iter().collect();
        m.delta = Some([(0, -2)].into_iter().collect());
        for (x, a) in [("0", "1/3"), ("1", "1/3"), ("2", "1/2")] {
            let mut b = BlockSet::new();
            b.insert(0, res(a), 1, 1).unwrap();
            m.points.insert(PointId::Finite(rat(x)), LocalData::Blocks(b));
        }
        let mut binf = BlockSet::new();
        binf.insert(0, res("5/6"), 1, 1).unwrap();
        m.points.insert(PointId::Infinity, LocalData::Blocks(binf));
        m.flags = crate::model::Flags::all_set();
        assert!(validate_module(&m).is_valid());
        let t = h1par_hodge(&m, false).unwrap();
        assert_eq!(t, [(0, 1), (1, 1)].into_iter().collect());
    }

    #[test]
    fn validation_catches_local_global_mismatch() {
        let mut m = unipotent_example();
        let mut wrong = BlockSet::new();
        wrong.insert(0, res("1/2"), 1, 1).unwrap();
        m.points
            .insert(PointId::Finite(rat("1")), LocalData::Blocks(wrong));
        let report = validate_module(&m);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == "local-global-mismatch"));
    }

    #[test]
    fn validation_flags_missing_infinity_and_rank_zero() {
        let mut m = ModuleData::new("empty");
        let report = validate_module(&m);
        assert!(report.violations.iter().any(|v| v.code == "rank-zero"));
        assert!(report.violations.iter().any(|v| v.code == "missing-infinity"));
        m.h = [(0, 1)].into_iter().collect();
        m.delta = Some([(1, -1)].into_iter().collect());
        let report = validate_module(&m);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == "delta-outside-h-support"));
    }

    #[test]
    fn aggregate_overcount_is_unrealizable() {
        let mut agg = AggregateData::default();
        agg.add_nu(0, res("1/2"), 2).unwrap();
        let h: GradedVector = [(0, 1)].into_iter().collect();
        let e = PointTables::from_aggregate(&agg, &h, &PointId::Infinity).unwrap_err();
        assert!(matches!(e, Error::Unrealizable(_)));
    }

    #[test]
    fn tate_twist_round_trip_and_h1par_shift() {
        let m = unipotent_example();
        let t = h1par_hodge(&m, false).unwrap();
        let up = reframe(&m, &Reframe::TateTwist(3)).unwrap();
        let t_up = h1par_hodge(&up, false).unwrap();
        assert_eq!(t_up, t.shifted(3).unwrap());
        let back = reframe(&up, &Reframe::TateTwist(-3)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn translate_round_trip() {
        let m = unipotent_example();
        let moved = reframe(&m, &Reframe::Translate(rat("5/2"))).unwrap();
        assert!(moved.points.contains_key(&PointId::Finite(rat("5/2"))));
        let back = reframe(&moved, &Reframe::Translate(rat("-5/2"))).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn inversion_swaps_zero_and_infinity() {
        let m = unipotent_example();
        let inv = reframe(&m, &Reframe::InvertCoordinate).unwrap();
        let p0 = derive_tables(&m).unwrap();
        let pi = derive_tables(&inv).unwrap();
        assert_eq!(
            p0.point(&PointId::Finite(rat("0"))).unwrap().nu,
            pi.point(&PointId::Infinity).unwrap().nu
        );
        assert!(inv.points.contains_key(&PointId::Finite(rat("1"))));
        let back = reframe(&inv, &Reframe::InvertCoordinate).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn inversion_of_zero_smooth_module_synthesizes_and_drops() {
        let k = make_kummer(&res("2/5")).unwrap();
        let moved = reframe(&k, &Reframe::Translate(rat("1"))).unwrap();
        let inv = reframe(&moved, &Reframe::InvertCoordinate).unwrap();
        assert!(inv.points.contains_key(&PointId::Finite(rat("1"))));
        // the residue at infinity travels to 0 ...
        match &inv.points[&PointId::Finite(rat("0"))] {
            LocalData::Blocks(b) => {
                assert_eq!(b.sorted_for_display()[0].residue, res("3/5"));
            }
            other => panic!("expected blocks at 0, got {other:?}"),
        }
        // ... and the now-smooth infinity holds the synthesized model
        assert_eq!(
            inv.points[&PointId::Infinity],
            LocalData::Blocks(ModuleData::smooth_model(&moved.h).unwrap())
        );
        // inverting back drops the smooth model again
        let back = reframe(&inv, &Reframe::InvertCoordinate).unwrap();
        assert_eq!(back, moved);
    }

    #[test]
    fn dual_of_kummer_and_involution() {
        let k = make_kummer(&res("1/3")).unwrap();
        let d = dual(&k).unwrap();
        let expected = make_kummer(&res("2/3")).unwrap();
        assert!(d.numeric_eq(&expected));
        let dd = dual(&d).unwrap();
        assert!(dd.numeric_eq(&k));
    }

    #[test]
    fn dual_mirrors_parabolic_cohomology() {
        let m = unipotent_example();
        let t = h1par_hodge(&m, false).unwrap();
        let d = dual(&m).unwrap();
        assert!(validate_module(&d).is_valid());
        let td = h1par_hodge(&d, false).unwrap();
        let mut expected = GradedVector::new();
        for (p, v) in t.iter() {
            expected.set(1 - p, v);
        }
        assert_eq!(td, expected);
    }
}
