//! Random genuine modules for the self-check suite.
//!
//! Everything produced here is realizable by construction: rank-one unitary
//! seeds whose residues sum to an integer, transported through operations
//! that preserve realizability (translation, Tate twist, coordinate
//! inversion, Kummer twist, and one generic Kummer convolution). The
//! generator never fabricates tables directly for higher rank; higher-rank
//! examples are always outputs of the engine itself.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::convolution::{collect_residues, kummer_mc, MuSpec};
use crate::error::{Error, Result};
use crate::invariants::{dual, reframe, relocate, Reframe};
use crate::model::{
    BlockSet, Flags, GradedVector, LocalData, ModuleData, PointId, Rational, Residue,
};
use crate::tensor::kummer_twist;

fn small_rational<R: Rng>(rng: &mut R, span: i64) -> Rational {
    let numer = rng.gen_range(-span..=span);
    let denom = rng.gen_range(1..=2i64);
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

fn random_residue<R: Rng>(rng: &mut R) -> Residue {
    let denom = rng.gen_range(2..=6i64);
    let numer = rng.gen_range(1..denom);
    Residue::new(Rational::new(BigInt::from(numer), BigInt::from(denom)))
        .expect("proper fraction is a residue")
}

/// A rank-one unitary seed: two or three semisimple finite points with
/// nonzero residues, the residue at infinity completing the sum to an
/// integer `s >= 1`, degree `-s`, and the parabolic Hodge vector forced by
/// those choices. All invariants hold by construction.
fn random_seed<R: Rng>(rng: &mut R) -> Result<ModuleData> {
    let k = rng.gen_range(2..=3usize);
    let mut xs: Vec<Rational> = Vec::new();
    while xs.len() < k {
        let x = small_rational(rng, 3);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    let mut sum = Rational::zero();
    let mut residues = Vec::new();
    for _ in 0..k {
        let a = random_residue(rng);
        sum = sum + a.value();
        residues.push(a);
    }
    let a_inf = Residue::reduced(&-&sum);
    let total = &sum + a_inf.value();
    debug_assert!(total.is_integer());
    let s: i64 = total
        .to_integer()
        .try_into()
        .map_err(|_| Error::Overflow)?;

    let tag: u32 = rng.gen();
    let mut m = ModuleData::new(format!("seed_{tag:08x}"));
    m.h = [(0, 1)].into_iter().collect();
    m.delta = Some(GradedVector::from_pairs([(0, -s)])?);
    for (x, a) in xs.into_iter().zip(residues) {
        let mut b = BlockSet::new();
        b.insert(0, a, 1, 1)?;
        m.points.insert(PointId::Finite(x), LocalData::Blocks(b));
    }
    let mut inf = BlockSet::new();
    inf.insert(0, a_inf.clone(), 1, 1)?;
    m.points.insert(PointId::Infinity, LocalData::Blocks(inf));
    let omega = k as i64 + i64::from(!a_inf.is_zero());
    m.h1par = Some(GradedVector::from_pairs([
        (0, s - 1),
        (1, omega - s - 1),
    ])?);
    m.flags = Flags::all_set();
    Ok(m)
}

/// A residue that is generic for `m`: distinct from every residue `a` of
/// `m` and from every complement `1 - a`. Falls back to a fraction whose
/// denominator exceeds all denominators in `m`, which can never collide.
pub fn random_generic_mu<R: Rng>(rng: &mut R, m: &ModuleData) -> Result<Residue> {
    let present = collect_residues(m);
    let collides = |mu: &Residue| {
        present
            .iter()
            .any(|a| mu == a || *mu == a.complement())
    };
    for _ in 0..64 {
        let mu = random_residue(rng);
        if !collides(&mu) {
            return Ok(mu);
        }
    }
    let mut max_denom = BigInt::one();
    for a in &present {
        let d = a.value().denom().abs();
        if d > max_denom {
            max_denom = d;
        }
    }
    let mu = Residue::new(Rational::new(BigInt::one(), max_denom + BigInt::one()))?;
    debug_assert!(!collides(&mu));
    Ok(mu)
}

/// A random genuine module: a rank-one seed passed through a handful of
/// structure-preserving operations, optionally finished with one generic
/// Kummer convolution (which raises the rank).
pub fn random_module<R: Rng>(rng: &mut R, allow_mc: bool) -> Result<ModuleData> {
    let mut m = random_seed(rng)?;
    let ops = rng.gen_range(0..=3);
    for _ in 0..ops {
        m = match rng.gen_range(0..4) {
            0 => reframe(&m, &Reframe::Translate(small_rational(rng, 2)))?,
            1 => reframe(&m, &Reframe::TateTwist(rng.gen_range(-2..=2)))?,
            2 => {
                // inversion swaps 0 and infinity; only safe when the 0 slot
                // is absent or held as blocks
                let zero = PointId::Finite(Rational::zero());
                let invertible =
                    matches!(m.points.get(&zero), None | Some(LocalData::Blocks(_)));
                if invertible {
                    reframe(&m, &Reframe::InvertCoordinate)?
                } else {
                    m
                }
            }
            _ => {
                let mu = random_generic_mu(rng, &m)?;
                kummer_twist(&m, &mu, rng.gen_bool(0.5))?
            }
        };
    }
    if allow_mc && rng.gen_bool(0.5) {
        let mu = random_generic_mu(rng, &m)?;
        m = kummer_mc(&m, &MuSpec::Exact(mu))?.result;
    }
    Ok(m)
}

/// Two independently generated modules ready for convolution.
pub fn random_pair<R: Rng>(rng: &mut R) -> Result<(ModuleData, ModuleData)> {
    Ok((random_module(rng, true)?, random_module(rng, false)?))
}

/// A pair whose full convolution contains exactly the declared skyscraper
/// summand: `L` is the dual of `V`, twisted by `q` and reflected through
/// `c`. Returns `(V, L, c, q)`.
pub fn skyscraper_pair<R: Rng>(rng: &mut R) -> Result<(ModuleData, ModuleData, Rational, i64)> {
    let v = random_module(rng, false)?;
    let q = rng.gen_range(-1..=1);
    let c = small_rational(rng, 2);
    let w = reframe(&v, &Reframe::TateTwist(-q))?;
    let l = relocate(&dual(&w)?, &c);
    Ok((v, l, c, q))
}

/// A full realization of the standard hypergeometric shape of rank `m` with
/// residue `a` at infinity: one unipotent block of size `m` at 0 (for
/// `m >= 2`), a pseudo-reflection at 1 whose residue is forced by the
/// integrality of the residue sum, the single block `J^{m-1}(a, m)` at
/// infinity, and degrees determined by rigidity.
pub fn realize_hypergeometric(m: u64, a: &Residue) -> Result<ModuleData> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "hypergeometric rank must be positive".into(),
        ));
    }
    let rank = i64::try_from(m).map_err(|_| Error::Overflow)?;
    let spread = Rational::from_integer(BigInt::from(rank)) * a.value();
    let reflection = Residue::reduced(&-spread);
    if reflection.is_zero() {
        return Err(Error::Unrealizable(format!(
            "hyp({m}, {a}) has trivial reflection monodromy and is not irreducible"
        )));
    }

    let mut out = ModuleData::new(format!("hyp_realized({m}, {a})"));
    out.h = GradedVector::from_pairs((0..rank).map(|p| (p, 1)))?;
    if m >= 2 {
        let mut b0 = BlockSet::new();
        b0.insert(rank - 1, Residue::zero(), m, 1)?;
        out.points
            .insert(PointId::Finite(Rational::zero()), LocalData::Blocks(b0));
    }
    let mut b1 = BlockSet::new();
    b1.insert(rank - 1, reflection, 1, 1)?;
    for p in 0..rank - 1 {
        b1.insert(p, Residue::zero(), 1, 1)?;
    }
    out.points
        .insert(PointId::Finite(Rational::one()), LocalData::Blocks(b1));
    let mut binf = BlockSet::new();
    binf.insert(rank - 1, a.clone(), m, 1)?;
    out.points.insert(PointId::Infinity, LocalData::Blocks(binf));

    // rigidity forces the degrees: the parabolic law telescopes to zero
    let tables = crate::invariants::derive_tables(&out)?;
    let omega = tables.omega_total("realize_hypergeometric")?;
    let mut delta = GradedVector::new();
    let mut prev = 0i64;
    for p in 0..rank {
        let d = prev - out.h.get(p) - out.h.get(p - 1) + omega.get(p - 1);
        delta.set(p, d);
        prev = d;
    }
    debug_assert_eq!(
        prev - out.h.get(rank) - out.h.get(rank - 1) + omega.get(rank - 1),
        0,
        "rigid telescoping must close"
    );
    out.delta = Some(delta);
    out.h1par = Some(GradedVector::new());
    out.flags = Flags::all_set();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::{
        kunneth_check, middle_convolution, skyscraper_check, ConvolutionOptions, SkyscraperMode,
    };
    use crate::invariants::{h1par_hodge, validate_module};
    use crate::model::rational_from_str;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeds_are_genuine() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_seed(&mut rng).unwrap();
            let report = validate_module(&m);
            assert!(report.is_valid(), "{:?}", report.violations);
            let stored = m.h1par.clone().unwrap();
            let computed = h1par_hodge(&m, false).unwrap();
            assert_eq!(stored, computed);
        }
    }

    #[test]
    fn random_modules_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let m = random_module(&mut rng, true).unwrap();
            let report = validate_module(&m);
            assert!(report.is_valid(), "{}: {:?}", m.name, report.violations);
            assert!(report.warnings.is_empty(), "{}: {:?}", m.name, report.warnings);
        }
    }

    #[test]
    fn generic_mu_avoids_collisions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_module(&mut rng, false).unwrap();
        for _ in 0..10 {
            let mu = random_generic_mu(&mut rng, &m).unwrap();
            for a in collect_residues(&m) {
                assert_ne!(mu, a);
                assert_ne!(mu, a.complement());
            }
        }
    }

    #[test]
    fn skyscraper_pair_detects_and_convolves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (v, l, c, q) = skyscraper_pair(&mut rng).unwrap();
        assert_eq!(skyscraper_check(&v, &l).unwrap(), Some((c.clone(), q)));
        let opts = ConvolutionOptions {
            skyscraper: SkyscraperMode::Declared { c, q },
            waive_irreducibility: false,
        };
        let report = middle_convolution(&v, &l, &opts).unwrap();
        assert!(report.all_checks_pass(), "{:?}", report.cross_checks);
        let kun = kunneth_check(&v, &l, &report, false).unwrap();
        assert!(kun.pass, "{}", kun.details);
    }

    #[test]
    fn realized_hypergeometric_is_rigid_and_coherent() {
        let a = Residue::new(rational_from_str("1/3").unwrap()).unwrap();
        let m = realize_hypergeometric(2, &a).unwrap();
        let report = validate_module(&m);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(
            m.delta.as_ref().unwrap(),
            &[(0, -1), (1, -1)].into_iter().collect()
        );
        assert!(h1par_hodge(&m, false).unwrap().is_zero());

        let partial = crate::hypergeometric::make_hypergeometric(2, &a).unwrap();
        assert_eq!(m.h, partial.h);
        assert_eq!(
            m.infinity_blocks("test").unwrap(),
            partial.infinity_blocks("test").unwrap()
        );
    }

    #[test]
    fn rank_one_realization_inverts_the_residue() {
        let a = Residue::new(rational_from_str("1/3").unwrap()).unwrap();
        let m = realize_hypergeometric(1, &a).unwrap();
        assert!(validate_module(&m).is_valid());
        // no unipotent point at 0, reflection residue 2/3 at 1
        assert!(!m
            .points
            .contains_key(&PointId::Finite(Rational::zero())));
        match &m.points[&PointId::Finite(Rational::one())] {
            LocalData::Blocks(b) => {
                let blocks = b.sorted_for_display();
                assert_eq!(blocks.len(), 1);
                assert_eq!(
                    blocks[0].residue,
                    Residue::new(rational_from_str("2/3").unwrap()).unwrap()
                );
            }
            other => panic!("expected blocks, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_reflection_is_rejected() {
        let half = Residue::new(rational_from_str("1/2").unwrap()).unwrap();
        assert!(matches!(
            realize_hypergeometric(2, &half),
            Err(Error::Unrealizable(_))
        ));
        assert!(matches!(
            realize_hypergeometric(1, &Residue::zero()),
            Err(Error::Unrealizable(_))
        ));
    }
}
