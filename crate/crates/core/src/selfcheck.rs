//! Randomized self-checks: every structural identity the engine promises,
//! exercised on generated genuine modules with a deterministic seed.
//!
//! Each check owns an independent deterministic random stream, so a report
//! for a given `(seed, cases)` pair is reproducible byte for byte.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convolution::{
    kummer_mc, kummer_mc_with, kunneth_check, middle_convolution, ConvolutionOptions, MuSpec,
    SkyscraperMode,
};
use crate::error::{Error, Result};
use crate::generate::{random_generic_mu, random_module, random_pair, skyscraper_pair};
use crate::invariants::{derive_tables, dual, h1par_hodge, reframe, validate_module, Reframe};
use crate::model::{umul, LocalData, ModuleData, Rational};
use crate::schema::{parse_module, serialize_module};
use crate::tensor::{kummer_twist, tensor_at_infinity, tensor_global};

/// Outcome of one named check over `cases` generated cases.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub detail: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// The full self-check report.
#[derive(Debug, Clone)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub cases: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

/// A case either passes (`None`) or fails with an explanation.
type CaseResult = Result<Option<String>>;

fn run_check<F>(name: &str, seed: u64, stream: u64, cases: u64, mut body: F) -> CheckOutcome
where
    F: FnMut(&mut ChaCha8Rng) -> CaseResult,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut failures = 0;
    let mut detail = String::new();
    for i in 0..cases {
        let outcome = body(&mut rng);
        let message = match outcome {
            Ok(None) => None,
            Ok(Some(msg)) => Some(msg),
            Err(e) => Some(format!("unexpected error: {e}")),
        };
        if let Some(msg) = message {
            failures += 1;
            if detail.is_empty() {
                detail = format!("case {i}: {msg}");
            }
        }
    }
    CheckOutcome {
        name: name.into(),
        cases,
        failures,
        detail: if detail.is_empty() { "ok".into() } else { detail },
    }
}

fn int_rational<R: Rng>(rng: &mut R, span: i64) -> Rational {
    Rational::from_integer(BigInt::from(rng.gen_range(-span..=span)))
}

/// Convolve, treating the two legitimate early bail-outs of random pairs
/// (an accidental skyscraper candidate or a punctual convolution) as a
/// vacuous pass.
fn convolve_or_skip(
    v: &ModuleData,
    l: &ModuleData,
) -> Result<Option<crate::convolution::ConvolutionReport>> {
    match middle_convolution(v, l, &ConvolutionOptions::default()) {
        Ok(rep) => Ok(Some(rep)),
        Err(Error::UndeclaredSkyscraper { .. }) | Err(Error::PunctualConvolution(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Run the whole suite with `cases` generated cases per check.
pub fn run_selfcheck(seed: u64, cases: u64) -> SelfCheckReport {
    let mut checks = Vec::new();
    let mut stream = 0u64;
    let mut add = |name: &str, body: &mut dyn FnMut(&mut ChaCha8Rng) -> CaseResult| {
        stream += 1;
        checks.push(run_check(name, seed, stream, cases, body));
    };

    add("schema-round-trip", &mut |rng| {
        let m = random_module(rng, true)?;
        let s1 = serialize_module(&m);
        let m2 = parse_module(&s1)?;
        let s2 = serialize_module(&m2);
        Ok((s1 != s2).then(|| "serialization changed across a parse round trip".into()))
    });

    add("aggregate-projection", &mut |rng| {
        let m = random_module(rng, true)?;
        let mut agg = m.clone();
        for (at, data) in &m.points {
            if at.is_infinity() {
                continue;
            }
            if let LocalData::Blocks(b) = data {
                agg.points
                    .insert(at.clone(), LocalData::Aggregate(b.to_aggregate()?));
            }
        }
        if !m.numeric_eq(&agg) {
            return Ok(Some("block data differs from its aggregate projection".into()));
        }
        let t1 = derive_tables(&m)?;
        let t2 = derive_tables(&agg)?;
        let same = t1.omega_total("selfcheck")? == t2.omega_total("selfcheck")?;
        Ok((!same).then(|| "defect tables differ across granularities".into()))
    });

    add("validate-clean", &mut |rng| {
        let m = random_module(rng, true)?;
        let report = validate_module(&m);
        if !report.is_valid() {
            return Ok(Some(format!("violations: {:?}", report.violations)));
        }
        Ok((!report.warnings.is_empty())
            .then(|| format!("warnings: {:?}", report.warnings)))
    });

    add("euler-h1par", &mut |rng| {
        let m = random_module(rng, true)?;
        let t = h1par_hodge(&m, false)?;
        let tables = derive_tables(&m)?;
        let expected = tables.omega_scalar("selfcheck")? - 2 * m.rank()?;
        Ok((t.total()? != expected)
            .then(|| "parabolic total differs from omega - 2 rank".into()))
    });

    add("reframe-round-trips", &mut |rng| {
        let m = random_module(rng, true)?;
        let c = int_rational(rng, 2);
        let there = reframe(&m, &Reframe::Translate(c.clone()))?;
        let back = reframe(&there, &Reframe::Translate(-c))?;
        if !back.numeric_eq(&m) {
            return Ok(Some("translation does not round trip".into()));
        }
        let k = rng.gen_range(-2..=2);
        let tw = reframe(&reframe(&m, &Reframe::TateTwist(k))?, &Reframe::TateTwist(-k))?;
        if !tw.numeric_eq(&m) {
            return Ok(Some("Tate twist does not round trip".into()));
        }
        let inv = reframe(&reframe(&m, &Reframe::InvertCoordinate)?, &Reframe::InvertCoordinate)?;
        Ok((!inv.numeric_eq(&m)).then(|| "coordinate inversion is not involutive".into()))
    });

    add("h1par-twist-equivariance", &mut |rng| {
        let m = random_module(rng, true)?;
        let k = rng.gen_range(-2..=2);
        let twisted = reframe(&m, &Reframe::TateTwist(k))?;
        let lhs = h1par_hodge(&twisted, false)?;
        let rhs = h1par_hodge(&m, false)?.shifted(k)?;
        Ok((lhs != rhs).then(|| "parabolic vector is not twist equivariant".into()))
    });

    add("tensor-symmetry", &mut |rng| {
        let (v, l) = random_pair(rng)?;
        let a = tensor_global(&v, &l, None)?;
        let b = tensor_global(&l, &v, None)?;
        if !a.module.numeric_eq(&b.module) {
            return Ok(Some("tensor module is not symmetric".into()));
        }
        Ok((a.o_terms != b.o_terms).then(|| "carry terms are not symmetric".into()))
    });

    add("tensor-infinity-dimension", &mut |rng| {
        let (v, l) = random_pair(rng)?;
        let bv = v.infinity_blocks("selfcheck")?;
        let bl = l.infinity_blocks("selfcheck")?;
        let product = tensor_at_infinity(bv, bl)?;
        let expected = umul(bv.dimension()?, bl.dimension()?)?;
        Ok((product.dimension()? != expected)
            .then(|| "block tensor does not preserve total dimension".into()))
    });

    add("kummer-twist-inverse", &mut |rng| {
        let m = random_module(rng, false)?;
        let mu = random_generic_mu(rng, &m)?;
        let round = kummer_twist(&kummer_twist(&m, &mu, false)?, &mu, true)?;
        Ok((!round.numeric_eq(&m)).then(|| "Kummer twist does not invert".into()))
    });

    add("mc-coherence", &mut |rng| {
        let (v, l) = random_pair(rng)?;
        let Some(rep) = convolve_or_skip(&v, &l)? else {
            return Ok(None);
        };
        if rep.all_checks_pass() {
            return Ok(None);
        }
        let failing: Vec<String> = rep
            .cross_checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.details))
            .collect();
        Ok(Some(failing.join("; ")))
    });

    add("mc-commutativity", &mut |rng| {
        let (v, l) = random_pair(rng)?;
        let (Some(a), Some(b)) = (convolve_or_skip(&v, &l)?, convolve_or_skip(&l, &v)?) else {
            return Ok(None);
        };
        Ok((!a.result.numeric_eq(&b.result))
            .then(|| "convolution is not symmetric in its factors".into()))
    });

    add("mc-inversion", &mut |rng| {
        let v = random_module(rng, false)?;
        let mu = random_generic_mu(rng, &v)?;
        let step = kummer_mc(&v, &MuSpec::Exact(mu.clone()))?;
        let back = kummer_mc_with(
            &step.result,
            &MuSpec::Exact(mu.complement()),
            false,
            false,
        )?;
        let expected = reframe(&v, &Reframe::TateTwist(1))?;
        Ok((!back.result.numeric_eq(&expected))
            .then(|| "inverse convolution does not recover the Tate twist".into()))
    });

    add("near-one-consistency", &mut |rng| {
        let v = random_module(rng, false)?;
        let rep = kummer_mc(&v, &MuSpec::NearOne)?;
        if rep.all_checks_pass() {
            return Ok(None);
        }
        let failing: Vec<String> = rep
            .cross_checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.details))
            .collect();
        Ok(Some(failing.join("; ")))
    });

    add("kunneth-random", &mut |rng| {
        let (v, l) = random_pair(rng)?;
        let Some(rep) = convolve_or_skip(&v, &l)? else {
            return Ok(None);
        };
        let kun = kunneth_check(&v, &l, &rep, false)?;
        Ok((!kun.pass).then(|| kun.details))
    });

    add("kunneth-skyscraper", &mut |rng| {
        let (v, l, c, q) = skyscraper_pair(rng)?;
        let opts = ConvolutionOptions {
            skyscraper: SkyscraperMode::Declared { c, q },
            waive_irreducibility: false,
        };
        let rep = middle_convolution(&v, &l, &opts)?;
        if !rep.all_checks_pass() {
            return Ok(Some("internal cross-checks failed on a skyscraper pair".into()));
        }
        let kun = kunneth_check(&v, &l, &rep, false)?;
        Ok((!kun.pass).then(|| kun.details))
    });

    add("dual-involution", &mut |rng| {
        let m = random_module(rng, true)?;
        let d = dual(&m)?;
        if !dual(&d)?.numeric_eq(&m) {
            return Ok(Some("duality is not involutive".into()));
        }
        let lhs = h1par_hodge(&d, false)?;
        let rhs = h1par_hodge(&m, false)?.mirrored().shifted(1)?;
        Ok((lhs != rhs).then(|| "parabolic vector does not mirror under duality".into()))
    });

    add("mc-translation-equivariance", &mut |rng| {
        let (v, l) = random_pair(rng)?;
        let c = int_rational(rng, 2);
        let moved_v = reframe(&v, &Reframe::Translate(c.clone()))?;
        let (Some(base), Some(moved)) =
            (convolve_or_skip(&v, &l)?, convolve_or_skip(&moved_v, &l)?)
        else {
            return Ok(None);
        };
        let expected = reframe(&base.result, &Reframe::Translate(c))?;
        Ok((!moved.result.numeric_eq(&expected))
            .then(|| "convolution does not commute with translation".into()))
    });

    SelfCheckReport {
        seed,
        cases,
        checks,
    }
}
