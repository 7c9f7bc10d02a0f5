//! The tensor-product transformation law: Jordan-block tensor rules, the
//! global law for `h` and `delta` with its carry corrections, and the Kummer
//! twist (tensor with a rank-one module of given residue).

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hypergeometric::make_kummer;
use crate::invariants::{derive_tables, h1par_hodge, relocate, PointTables};
use crate::model::{
    cadd, umul, BlockSet, Flags, GradedVector, JordanBlock, LocalData, ModuleData, PointId,
    Rational, Residue,
};

/// Tensor product of two Jordan blocks with regular-singular residues.
///
/// `J^i(a, l) (x) J^j(b, m)` decomposes along the Clebsch-Gordan pattern
/// into `min(l, m)` blocks: for `k = 1, ..., min(l, m)` one block of size
/// `l + m + 1 - 2k` with top degree `i + j + 1 - k` and residue
/// `(a + b) mod 1`. Multiplicities multiply. No degree adjustment is made
/// for a residue carry; callers that need the carry twist apply it on top.
pub fn block_tensor(x: &JordanBlock, y: &JordanBlock) -> Result<Vec<JordanBlock>> {
    let mult = umul(x.mult, y.mult)?;
    let residue = x.residue.add(&y.residue).0;
    let mut out = Vec::new();
    let smaller = x.size.min(y.size);
    for k in 1..=smaller {
        let size = x.size + y.size + 1 - 2 * k;
        let degree = cadd(cadd(x.degree, y.degree)?, 1 - k as i64)?;
        out.push(JordanBlock {
            degree,
            residue: residue.clone(),
            size,
            mult,
        });
    }
    Ok(out)
}

/// Block data at infinity of a tensor product, from the block data of the
/// factors. Residues add modulo 1 with no degree twist; the degree effect
/// of residue carries is carried by the `delta` correction terms instead.
pub fn tensor_at_infinity(v_inf: &BlockSet, l_inf: &BlockSet) -> Result<BlockSet> {
    let mut out = BlockSet::new();
    for x in v_inf.iter() {
        for y in l_inf.iter() {
            for b in block_tensor(&x, &y)? {
                out.insert_block(&b)?;
            }
        }
    }
    Ok(out)
}

/// Result of the global tensor law. `module` carries everything the law
/// determines: `h` and `delta` globally, full local data where only one
/// factor is singular, block data at infinity, and an explicit unknown
/// marker at common finite singular points (the law fixes their effect on
/// `delta` through the carry terms but not their full local tables).
#[derive(Debug, Clone)]
pub struct TensorProduct {
    pub module: ModuleData,
    /// Per-point carry corrections: at each common singular point the sum
    /// over residue pairs `a, b != 0` with `a + b >= 1` of products of
    /// nearby counts, graded by total degree.
    pub o_terms: BTreeMap<PointId, GradedVector>,
}

fn spread_by_h(data: &LocalData, h: &GradedVector, at: &PointId) -> Result<LocalData> {
    let weights: Vec<(i64, u64)> = h
        .iter()
        .map(|(j, n)| {
            u64::try_from(n).map(|u| (j, u)).map_err(|_| {
                Error::Unrealizable(format!("negative h entry while tensoring at {at}"))
            })
        })
        .collect::<Result<_>>()?;
    Ok(match data {
        LocalData::Unknown => LocalData::Unknown,
        LocalData::Blocks(b) => {
            let mut out = BlockSet::new();
            for blk in b.iter() {
                for &(j, w) in &weights {
                    out.insert(
                        cadd(blk.degree, j)?,
                        blk.residue.clone(),
                        blk.size,
                        umul(blk.mult, w)?,
                    )?;
                }
            }
            LocalData::Blocks(out)
        }
        LocalData::Aggregate(a) => {
            let mut out = crate::model::AggregateData::default();
            for ((p, res), &n) in &a.nu_nonzero {
                for &(j, w) in &weights {
                    out.add_nu(cadd(*p, j)?, res.clone(), umul(n, w)?)?;
                }
            }
            for (&p, &n) in &a.mu_zero {
                for &(j, w) in &weights {
                    out.add_mu(cadd(p, j)?, umul(n, w)?)?;
                }
            }
            LocalData::Aggregate(out)
        }
    })
}

fn carry_term(v_pt: &PointTables, l_pt: &PointTables) -> Result<GradedVector> {
    let mut o = GradedVector::new();
    for ((p, a), &nv) in &v_pt.nu {
        if a.is_zero() {
            continue;
        }
        for ((q, b), &nl) in &l_pt.nu {
            if b.is_zero() || !a.add(b).1 {
                continue;
            }
            let prod = umul(nv, nl)?;
            o.add_at(cadd(*p, *q)?, crate::model::to_i64(prod)?)?;
        }
    }
    Ok(o)
}

/// Global tensor law. With `relocation = Some(c)` the second factor is
/// first moved through `y -> c - y`, which is how tensor products enter the
/// convolution pipeline.
///
/// `h` convolves, and when both factors have known `delta` and known data at
/// every common singular point,
/// `delta = delta_V * h_L + h_V * delta_L + sum of carry terms`.
pub fn tensor_global(
    v: &ModuleData,
    l: &ModuleData,
    relocation: Option<&Rational>,
) -> Result<TensorProduct> {
    let moved;
    let l = match relocation {
        Some(c) => {
            moved = relocate(l, c);
            &moved
        }
        None => l,
    };
    let tv = derive_tables(v)?;
    let tl = derive_tables(l)?;

    let mut out = ModuleData::new(format!("tensor({}, {})", v.name, l.name));
    out.h = v.h.convolve(&l.h)?;
    out.flags = Flags::default();

    let mut o_terms = BTreeMap::new();
    let mut common_all_known = true;
    let mut points: BTreeMap<PointId, LocalData> = BTreeMap::new();
    for (at, data) in &v.points {
        match l.points.get(at) {
            None => {
                points.insert(at.clone(), spread_by_h(data, &l.h, at)?);
            }
            Some(l_data) => {
                match (tv.point(at), tl.point(at)) {
                    (Some(pv), Some(pl)) => {
                        let o = carry_term(pv, pl)?;
                        if !o.is_zero() {
                            o_terms.insert(at.clone(), o);
                        }
                    }
                    _ => common_all_known = false,
                }
                let combined = match (at, data, l_data) {
                    (PointId::Infinity, LocalData::Blocks(bv), LocalData::Blocks(bl)) => {
                        LocalData::Blocks(tensor_at_infinity(bv, bl)?)
                    }
                    _ => LocalData::Unknown,
                };
                points.insert(at.clone(), combined);
            }
        }
    }
    for (at, data) in &l.points {
        if !v.points.contains_key(at) {
            points.insert(at.clone(), spread_by_h(data, &v.h, at)?);
        }
    }
    out.points = points;

    out.delta = match (&v.delta, &l.delta) {
        (Some(dv), Some(dl)) if common_all_known => {
            let mut d = dv.convolve(&l.h)?.plus(&v.h.convolve(dl)?)?;
            for o in o_terms.values() {
                d = d.plus(o)?;
            }
            Some(d)
        }
        _ => None,
    };
    Ok(TensorProduct {
        module: out,
        o_terms,
    })
}

/// Tensor with the rank-one Kummer module of residue `mu` at 0 (or its
/// inverse when `inverse` is set, i.e. residue `1 - mu`).
///
/// Hodge degrees of local data are unchanged; residues at 0 and infinity
/// shift modulo 1 (complementarily), `delta` picks up the carry
/// corrections, and `h1par` is recomputed. Aggregate data at 0 or infinity
/// can be shifted unless a residue would collide with the unipotent slot,
/// which needs block granularity.
pub fn kummer_twist(v: &ModuleData, mu: &Residue, inverse: bool) -> Result<ModuleData> {
    if mu.is_zero() {
        return Err(Error::InvalidArgument(
            "the Kummer twist needs a nonzero residue".into(),
        ));
    }
    let eff0 = if inverse { mu.complement() } else { mu.clone() };
    let eff_inf = eff0.complement();
    let partner = make_kummer(&eff0)?;
    let law = tensor_global(v, &partner, None)?;

    let shift = |data: &LocalData, eff: &Residue, at: &PointId| -> Result<LocalData> {
        Ok(match data {
            LocalData::Unknown => LocalData::Unknown,
            LocalData::Blocks(b) => {
                let mut out = BlockSet::new();
                for blk in b.iter() {
                    out.insert(blk.degree, blk.residue.add(eff).0, blk.size, blk.mult)?;
                }
                LocalData::Blocks(out)
            }
            LocalData::Aggregate(a) => {
                if a.nu_nonzero.keys().any(|(_, r)| *r == eff.complement()) {
                    return Err(Error::BlocksRequired {
                        module: v.name.clone(),
                        point: at.to_string(),
                        op: "kummer_twist",
                    });
                }
                let full = PointTables::from_aggregate(a, &v.h, at)?;
                let mut out = crate::model::AggregateData::default();
                for ((p, res), &n) in &full.nu {
                    out.add_nu(*p, res.add(eff).0, n)?;
                }
                LocalData::Aggregate(out)
            }
        })
    };

    let mut out = v.clone();
    out.name = format!("ktwist({}, {})", v.name, eff0);
    out.annotations.clear();
    out.delta = law.module.delta;
    let zero_pt = PointId::Finite(Rational::from_integer(0.into()));
    let mut points: BTreeMap<PointId, LocalData> = BTreeMap::new();
    for (at, data) in &v.points {
        let new_data = match at {
            PointId::Infinity => shift(data, &eff_inf, at)?,
            PointId::Finite(x) if x.is_zero() => shift(data, &eff0, at)?,
            _ => data.clone(),
        };
        points.insert(at.clone(), new_data);
    }
    if !points.contains_key(&zero_pt) {
        let mut b = BlockSet::new();
        for (j, n) in v.h.iter() {
            let w = u64::try_from(n)
                .map_err(|_| Error::Unrealizable("negative h entry in kummer_twist".into()))?;
            b.insert(j, eff0.clone(), 1, w)?;
        }
        points.insert(zero_pt.clone(), LocalData::Blocks(b));
    }
    if !points.contains_key(&PointId::Infinity) {
        let mut b = BlockSet::new();
        for (j, n) in v.h.iter() {
            let w = u64::try_from(n)
                .map_err(|_| Error::Unrealizable("negative h entry in kummer_twist".into()))?;
            b.insert(j, eff_inf.clone(), 1, w)?;
        }
        points.insert(PointId::Infinity, LocalData::Blocks(b));
    }
    // a twist can cancel the 0-monodromy entirely (in particular when it
    // undoes an earlier twist of a module smooth at 0); drop the slot when
    // nothing but the smooth model remains
    if let Some(LocalData::Blocks(b)) = points.get(&zero_pt) {
        if *b == ModuleData::smooth_model(&v.h)? {
            points.remove(&zero_pt);
        }
    }
    out.points = points;
    out.h1par = if v.h1par.is_some() && out.delta.is_some() {
        Some(h1par_hodge(&out, true)?)
    } else {
        None
    };
    Ok(out)
}
