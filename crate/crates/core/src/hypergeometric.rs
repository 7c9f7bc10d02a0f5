//! Rank-one Kummer modules and hypergeometric fixtures: full descriptors
//! where the data is determined, partial descriptors (with explicit unknown
//! markers) where only the behaviour at infinity is pinned down, and the
//! closed-form prediction for the infinity data of a convolution of two
//! such modules.

use crate::error::{Error, Result};
use crate::model::{
    to_i64, BlockSet, Flags, GradedVector, JordanBlock, LocalData, ModuleData, PointId, Rational,
    Residue,
};
use crate::tensor::block_tensor;

/// The rank-one module with residue `mu` at 0 and `1 - mu` at infinity,
/// smooth elsewhere. Requires `mu != 0`.
pub fn make_kummer(mu: &Residue) -> Result<ModuleData> {
    if mu.is_zero() {
        return Err(Error::InvalidArgument(
            "a Kummer module needs a nonzero residue".into(),
        ));
    }
    let mut m = ModuleData::new(format!("kummer({mu})"));
    m.h = [(0, 1)].into_iter().collect();
    m.delta = Some([(0, -1)].into_iter().collect());
    let mut at0 = BlockSet::new();
    at0.insert(0, mu.clone(), 1, 1)?;
    let mut at_inf = BlockSet::new();
    at_inf.insert(0, mu.complement(), 1, 1)?;
    m.points
        .insert(PointId::Finite(Rational::from_integer(0.into())), LocalData::Blocks(at0));
    m.points.insert(PointId::Infinity, LocalData::Blocks(at_inf));
    m.h1par = Some(GradedVector::new());
    m.flags = Flags::all_set();
    Ok(m)
}

/// Partial descriptor of the rank-`m` hypergeometric module whose data at
/// infinity is a single Jordan block `J^{m-1}(a, m)`.
///
/// Everything the type does not pin down stays honestly unknown: `delta` is
/// unknown, and the finite singular points (0 for `m >= 2`, and 1) carry
/// unknown markers. The local defect totals the type does force are kept as
/// annotations, and rigidity is recorded through a zero `h1par`.
pub fn make_hypergeometric(m: u64, a: &Residue) -> Result<ModuleData> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "a hypergeometric module has rank at least 1".into(),
        ));
    }
    if a.is_zero() {
        return Err(Error::InvalidArgument(
            "the hypergeometric residue at infinity must be nonzero".into(),
        ));
    }
    let mut module = ModuleData::new(format!("hyp({m}, {a})"));
    let rank = to_i64(m)?;
    module.h = (0..rank).map(|p| (p, 1)).collect();
    module.delta = None;
    if m >= 2 {
        module
            .points
            .insert(PointId::Finite(Rational::from_integer(0.into())), LocalData::Unknown);
    }
    module
        .points
        .insert(PointId::Finite(Rational::from_integer(1.into())), LocalData::Unknown);
    let mut at_inf = BlockSet::new();
    at_inf.insert(rank - 1, a.clone(), m, 1)?;
    module.points.insert(PointId::Infinity, LocalData::Blocks(at_inf));
    module.h1par = Some(GradedVector::new());
    module.flags = Flags::all_set();
    module
        .annotations
        .insert("omega_0".into(), (m - 1).to_string());
    module.annotations.insert("omega_1".into(), "1".to_string());
    Ok(module)
}

/// Closed form for the infinity data of the additive middle convolution of
/// two hypergeometric modules of ranks `m`, `n` with infinity residues `a`,
/// `b`: the Clebsch-Gordan blocks of `J^{m-1}(a, m) (x) J^{n-1}(b, n)`, with
/// all degrees raised by one exactly when `a + b > 1`. Requires `a + b` to
/// be non-integral.
pub fn falt_hyp_expected(m: u64, n: u64, a: &Residue, b: &Residue) -> Result<BlockSet> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "hypergeometric ranks must be at least 1".into(),
        ));
    }
    let (sum, carry) = a.add(b);
    if sum.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "residue sum {a} + {b} is integral; the convolution degenerates"
        )));
    }
    let x = JordanBlock {
        degree: to_i64(m)? - 1,
        residue: a.clone(),
        size: m,
        mult: 1,
    };
    let y = JordanBlock {
        degree: to_i64(n)? - 1,
        residue: b.clone(),
        size: n,
        mult: 1,
    };
    let twist = if carry { 1 } else { 0 };
    let mut out = BlockSet::new();
    for blk in block_tensor(&x, &y)? {
        out.insert(blk.degree + twist, blk.residue, blk.size, blk.mult)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::validate_module;
    use crate::model::rational_from_str;

    fn res(s: &str) -> Residue {
        Residue::new(rational_from_str(s).unwrap()).unwrap()
    }

    #[test]
    fn kummer_shape() {
        let k = make_kummer(&res("2/5")).unwrap();
        assert!(validate_module(&k).is_valid());
        assert_eq!(k.rank().unwrap(), 1);
        let inf = k.infinity_blocks("test").unwrap().sorted_for_display();
        assert_eq!(inf[0].residue, res("3/5"));
        assert!(make_kummer(&Residue::zero()).is_err());
    }

    #[test]
    fn hypergeometric_partial_contract() {
        let h = make_hypergeometric(3, &res("1/4")).unwrap();
        assert_eq!(h.rank().unwrap(), 3);
        assert!(h.delta.is_none());
        assert!(matches!(
            h.points[&PointId::Finite(rational_from_str("0").unwrap())],
            LocalData::Unknown
        ));
        assert!(matches!(
            h.points[&PointId::Finite(rational_from_str("1").unwrap())],
            LocalData::Unknown
        ));
        let inf = h.infinity_blocks("test").unwrap().sorted_for_display();
        assert_eq!(inf.len(), 1);
        assert_eq!((inf[0].degree, inf[0].size), (2, 3));
        assert_eq!(h.annotations["omega_0"], "2");
        assert_eq!(h.annotations["omega_1"], "1");
        // the validation report warns about the unknowns but raises no violation
        let report = validate_module(&h);
        assert!(report.is_valid());
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn rank_one_hypergeometric_has_no_zero_point() {
        let h = make_hypergeometric(1, &res("1/4")).unwrap();
        assert!(!h
            .points
            .contains_key(&PointId::Finite(rational_from_str("0").unwrap())));
        assert_eq!(h.annotations["omega_0"], "0");
    }

    #[test]
    fn expected_infinity_data_with_and_without_carry() {
        // 1/4 + 1/3 < 1: no twist; top block J^4(7/12, 5) from sizes 2, 4
        let low = falt_hyp_expected(2, 4, &res("1/4"), &res("1/3")).unwrap();
        let blocks = low.sorted_for_display();
        assert_eq!(blocks.len(), 2);
        assert_eq!((blocks[0].degree, blocks[0].size), (4, 5));
        assert_eq!((blocks[1].degree, blocks[1].size), (3, 3));
        assert_eq!(blocks[0].residue, res("7/12"));
        assert_eq!(low.dimension().unwrap(), 8);

        // 3/4 + 1/3 > 1: every degree is raised by one
        let high = falt_hyp_expected(2, 4, &res("3/4"), &res("1/3")).unwrap();
        let blocks = high.sorted_for_display();
        assert_eq!((blocks[0].degree, blocks[0].size), (5, 5));
        assert_eq!((blocks[1].degree, blocks[1].size), (4, 3));
        assert_eq!(blocks[0].residue, res("1/12"));

        // integral residue sum degenerates
        assert!(falt_hyp_expected(2, 2, &res("1/3"), &res("2/3")).is_err());
    }
}
