//! Exact arithmetic in the value group Λ.
//!
//! Λ is modeled as the ℚ-span of a unit generator (so Λ always contains the
//! rationals) together with finitely many declared irrational generators,
//! each carrying a decimal enclosure. This matches the two properties the
//! constructions actually consume: Λ is closed under addition and under
//! scaling by rationals. Value groups of algebraically closed
//! non-Archimedean fields are ℚ-vector spaces, so the model is faithful.
//!
//! A [`LambdaScalar`] is a rational number plus a finite map from generator
//! index to rational coefficient. Arithmetic is exact coefficient
//! arithmetic. Sign decisions are exact for rational values; for values with
//! irrational coefficients the sign is certified through interval arithmetic
//! over the generator enclosures. Declared generators are assumed ℚ-linearly
//! independent from 1 and from each other, so a scalar with a nonzero
//! irrational coefficient is never zero; when its enclosure interval still
//! straddles zero the comparison fails hard with
//! [`Error::UndecidableSign`] rather than guessing.
//!
//! No product of two Λ-scalars is ever formed anywhere in this crate: every
//! geometric predicate downstream factors through integer direction vectors,
//! and Λ is only ever scaled by integers and rationals.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{format_rat, parse_decimal};

/// A declared irrational generator of Λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    /// Name used in files, reports, and rendered scalars, e.g. `"g1"`.
    pub label: String,
    /// Midpoint of the decimal enclosure.
    pub midpoint: BigRational,
    /// The true value lies within `10^-digits` of `midpoint`.
    pub digits: u32,
}

impl Generator {
    /// Build a generator from a decimal enclosure string such as
    /// `"1.41421356"`. The enclosure radius is one unit in the last given
    /// decimal place.
    pub fn from_decimal(label: &str, decimal: &str) -> Result<Generator> {
        let (midpoint, digits) = parse_decimal(decimal)?;
        Ok(Generator {
            label: label.to_string(),
            midpoint,
            digits,
        })
    }

    fn radius(&self) -> BigRational {
        let ten = BigInt::from(10u32);
        BigRational::new(BigInt::one(), ten.pow(self.digits))
    }
}

/// Generator table for one value group.
///
/// The unit generator is implicit and always present; the table holds only
/// the irrational generators. An empty table is Λ = ℚ.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct LambdaContext {
    gens: Vec<Generator>,
}

impl LambdaContext {
    /// Λ = ℚ: no irrational generators.
    pub fn rationals() -> Arc<LambdaContext> {
        Arc::new(LambdaContext::default())
    }

    /// Build a context from irrational generators. Labels have to be
    /// nonempty, distinct, and must not shadow the unit label `"1"`.
    pub fn new(gens: Vec<Generator>) -> Result<Arc<LambdaContext>> {
        let mut seen = BTreeSet::new();
        for g in &gens {
            if g.label.is_empty() || g.label == "1" {
                return Err(Error::Schema {
                    message: format!("invalid generator label {:?}", g.label),
                });
            }
            if !seen.insert(g.label.clone()) {
                return Err(Error::Schema {
                    message: format!("duplicate generator label {:?}", g.label),
                });
            }
        }
        Ok(Arc::new(LambdaContext { gens }))
    }

    /// Number of irrational generators.
    pub fn len(&self) -> usize {
        self.gens.len()
    }

    /// True when Λ = ℚ.
    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Generator by index.
    pub fn generator(&self, idx: u32) -> &Generator {
        &self.gens[idx as usize]
    }

    /// Index of the generator with the given label.
    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.gens.iter().position(|g| g.label == label).map(|i| i as u32)
    }
}

/// An element of Λ: a rational part plus rational coefficients on the
/// declared irrational generators.
#[derive(Clone)]
pub struct LambdaScalar {
    rat: BigRational,
    irr: Option<Box<IrrPart>>,
}

#[derive(Clone)]
struct IrrPart {
    ctx: Arc<LambdaContext>,
    /// Nonzero coefficients only, keyed by generator index.
    coeffs: BTreeMap<u32, BigRational>,
}

impl LambdaScalar {
    /// The zero scalar.
    pub fn zero() -> LambdaScalar {
        LambdaScalar {
            rat: BigRational::zero(),
            irr: None,
        }
    }

    /// The unit scalar.
    pub fn one() -> LambdaScalar {
        LambdaScalar::from_int(1)
    }

    /// A rational element of Λ.
    pub fn from_rat(r: BigRational) -> LambdaScalar {
        LambdaScalar { rat: r, irr: None }
    }

    /// A small integer element of Λ.
    pub fn from_int(n: i64) -> LambdaScalar {
        LambdaScalar::from_rat(BigRational::from(BigInt::from(n)))
    }

    /// The generator with index `idx` in `ctx`, as a scalar.
    pub fn generator(ctx: &Arc<LambdaContext>, idx: u32) -> LambdaScalar {
        assert!((idx as usize) < ctx.len(), "generator index out of range");
        let mut coeffs = BTreeMap::new();
        coeffs.insert(idx, BigRational::one());
        LambdaScalar {
            rat: BigRational::zero(),
            irr: Some(Box::new(IrrPart {
                ctx: Arc::clone(ctx),
                coeffs,
            })),
        }
    }

    /// Build a scalar from a coefficient map keyed by generator index,
    /// with `rat` on the unit generator.
    pub fn from_coeffs(
        ctx: &Arc<LambdaContext>,
        rat: BigRational,
        coeffs: BTreeMap<u32, BigRational>,
    ) -> LambdaScalar {
        let coeffs: BTreeMap<u32, BigRational> =
            coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        for idx in coeffs.keys() {
            assert!((*idx as usize) < ctx.len(), "generator index out of range");
        }
        if coeffs.is_empty() {
            LambdaScalar { rat, irr: None }
        } else {
            LambdaScalar {
                rat,
                irr: Some(Box::new(IrrPart {
                    ctx: Arc::clone(ctx),
                    coeffs,
                })),
            }
        }
    }

    /// Rational part (coefficient on the unit generator).
    pub fn rat_part(&self) -> &BigRational {
        &self.rat
    }

    /// Coefficient on irrational generator `idx`.
    pub fn coeff(&self, idx: u32) -> BigRational {
        match &self.irr {
            Some(p) => p.coeffs.get(&idx).cloned().unwrap_or_else(BigRational::zero),
            None => BigRational::zero(),
        }
    }

    /// Iterate over the nonzero irrational coefficients.
    pub fn irr_coeffs(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.irr
            .iter()
            .flat_map(|p| p.coeffs.iter().map(|(i, c)| (*i, c)))
    }

    /// The context of the irrational part, if any.
    pub fn context(&self) -> Option<&Arc<LambdaContext>> {
        self.irr.as_ref().map(|p| &p.ctx)
    }

    /// True when every irrational coefficient vanishes.
    pub fn is_rational(&self) -> bool {
        self.irr.is_none()
    }

    /// Exact zero test. Sound because generators are declared ℚ-linearly
    /// independent: any nonzero coefficient makes the value irrational.
    pub fn is_zero(&self) -> bool {
        self.irr.is_none() && self.rat.is_zero()
    }

    /// True when the value lies in the ℚ-span of the unit generator and
    /// the `allowed` irrational generators.
    pub fn in_qspan(&self, allowed: &BTreeSet<u32>) -> bool {
        self.irr_coeffs().all(|(idx, _)| allowed.contains(&idx))
    }

    fn ctx_of(a: &LambdaScalar, b: &LambdaScalar) -> Option<Arc<LambdaContext>> {
        match (&a.irr, &b.irr) {
            (Some(pa), Some(pb)) => {
                assert!(
                    Arc::ptr_eq(&pa.ctx, &pb.ctx) || pa.ctx == pb.ctx,
                    "arithmetic across distinct value-group contexts"
                );
                Some(Arc::clone(&pa.ctx))
            }
            (Some(p), None) | (None, Some(p)) => Some(Arc::clone(&p.ctx)),
            (None, None) => None,
        }
    }

    fn rebuild(rat: BigRational, ctx: Option<Arc<LambdaContext>>, coeffs: BTreeMap<u32, BigRational>) -> LambdaScalar {
        let coeffs: BTreeMap<u32, BigRational> =
            coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if coeffs.is_empty() {
            LambdaScalar { rat, irr: None }
        } else {
            LambdaScalar {
                rat,
                irr: Some(Box::new(IrrPart {
                    ctx: ctx.expect("coefficients without a context"),
                    coeffs,
                })),
            }
        }
    }

    /// Sum.
    pub fn add(&self, other: &LambdaScalar) -> LambdaScalar {
        let ctx = Self::ctx_of(self, other);
        let rat = &self.rat + &other.rat;
        let mut coeffs: BTreeMap<u32, BigRational> = self
            .irr
            .as_ref()
            .map(|p| p.coeffs.clone())
            .unwrap_or_default();
        if let Some(p) = &other.irr {
            for (idx, c) in &p.coeffs {
                let entry = coeffs.entry(*idx).or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
        Self::rebuild(rat, ctx, coeffs)
    }

    /// Difference.
    pub fn sub(&self, other: &LambdaScalar) -> LambdaScalar {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> LambdaScalar {
        let rat = -&self.rat;
        match &self.irr {
            None => LambdaScalar { rat, irr: None },
            Some(p) => LambdaScalar {
                rat,
                irr: Some(Box::new(IrrPart {
                    ctx: Arc::clone(&p.ctx),
                    coeffs: p.coeffs.iter().map(|(i, c)| (*i, -c)).collect(),
                })),
            },
        }
    }

    /// Scale by a rational. This is the ℚ-divisibility of Λ: `q·λ ∈ Λ`
    /// for every rational `q`, exactly, by coefficient arithmetic.
    pub fn scale_rat(&self, q: &BigRational) -> LambdaScalar {
        if q.is_zero() {
            return LambdaScalar::zero();
        }
        let rat = &self.rat * q;
        match &self.irr {
            None => LambdaScalar { rat, irr: None },
            Some(p) => LambdaScalar {
                rat,
                irr: Some(Box::new(IrrPart {
                    ctx: Arc::clone(&p.ctx),
                    coeffs: p.coeffs.iter().map(|(i, c)| (*i, c * q)).collect(),
                })),
            },
        }
    }

    /// Scale by an integer.
    pub fn scale_int(&self, n: &BigInt) -> LambdaScalar {
        self.scale_rat(&BigRational::from(n.clone()))
    }

    /// Divide by a nonzero rational.
    pub fn div_rat(&self, q: &BigRational) -> LambdaScalar {
        assert!(!q.is_zero(), "division by zero");
        self.scale_rat(&q.recip())
    }

    /// Conservative rational enclosure `[lo, hi]` of the true value,
    /// from the generator enclosures. Exact (`lo = hi`) for rationals.
    pub fn approx_interval(&self) -> (BigRational, BigRational) {
        let mut lo = self.rat.clone();
        let mut hi = self.rat.clone();
        if let Some(p) = &self.irr {
            for (idx, c) in &p.coeffs {
                let g = p.ctx.generator(*idx);
                let r = g.radius();
                let glo = &g.midpoint - &r;
                let ghi = &g.midpoint + &r;
                if c.is_positive() {
                    lo += c * &glo;
                    hi += c * &ghi;
                } else {
                    lo += c * &ghi;
                    hi += c * &glo;
                }
            }
        }
        (lo, hi)
    }

    /// Certified sign: `1`, `0`, or `-1`.
    ///
    /// Exact for rational values. For values with irrational coefficients
    /// the generator enclosures give an interval around the true value; a
    /// sign is returned only when the interval excludes zero.
    pub fn sign(&self) -> Result<i32> {
        if self.irr.is_none() {
            return Ok(match self.rat.cmp(&BigRational::zero()) {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            });
        }
        let (lo, hi) = self.approx_interval();
        if lo.is_positive() {
            Ok(1)
        } else if hi.is_negative() {
            Ok(-1)
        } else {
            Err(Error::UndecidableSign {
                value: self.to_string(),
            })
        }
    }

    /// Certified comparison.
    pub fn try_cmp(&self, other: &LambdaScalar) -> Result<Ordering> {
        let d = self.sub(other);
        if d.is_zero() {
            return Ok(Ordering::Equal);
        }
        Ok(match d.sign()? {
            s if s > 0 => Ordering::Greater,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Equal,
        })
    }

    /// True when `self > 0`, failing hard on an undecidable sign.
    pub fn is_positive(&self) -> Result<bool> {
        Ok(self.sign()? > 0)
    }

    /// Absolute value.
    pub fn abs(&self) -> Result<LambdaScalar> {
        if self.sign()? < 0 {
            Ok(self.neg())
        } else {
            Ok(self.clone())
        }
    }

    /// Coefficient map for serialization: unit label `"1"` plus generator
    /// labels, zero entries omitted, but `"1"` kept when everything is zero.
    pub fn to_label_map(&self) -> BTreeMap<String, BigRational> {
        let mut out = BTreeMap::new();
        if !self.rat.is_zero() || self.irr.is_none() {
            out.insert("1".to_string(), self.rat.clone());
        }
        if let Some(p) = &self.irr {
            for (idx, c) in &p.coeffs {
                out.insert(p.ctx.generator(*idx).label.clone(), c.clone());
            }
        }
        out
    }
}

impl PartialEq for LambdaScalar {
    fn eq(&self, other: &LambdaScalar) -> bool {
        self.sub(other).is_zero()
    }
}

impl Eq for LambdaScalar {}

impl PartialOrd for LambdaScalar {
    fn partial_cmp(&self, other: &LambdaScalar) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

impl fmt::Display for LambdaScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.irr {
            None => write!(f, "{}", format_rat(&self.rat)),
            Some(p) => {
                let mut first = true;
                if !self.rat.is_zero() {
                    write!(f, "{}", format_rat(&self.rat))?;
                    first = false;
                }
                for (idx, c) in &p.coeffs {
                    let label = &p.ctx.generator(*idx).label;
                    if first {
                        write!(f, "{}*{}", format_rat(c), label)?;
                        first = false;
                    } else if c.is_negative() {
                        write!(f, " - {}*{}", format_rat(&-c), label)?;
                    } else {
                        write!(f, " + {}*{}", format_rat(c), label)?;
                    }
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for LambdaScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn sqrt2_ctx() -> Arc<LambdaContext> {
        LambdaContext::new(vec![
            Generator::from_decimal("g1", "1.41421356237309").unwrap()
        ])
        .unwrap()
    }

    #[test]
    fn rational_arithmetic_and_sign() {
        let a = LambdaScalar::from_rat(rat(2, 3));
        let b = LambdaScalar::from_rat(rat(-1, 6));
        let s = a.add(&b);
        assert_eq!(s.rat_part(), &rat(1, 2));
        assert_eq!(s.sign().unwrap(), 1);
        assert_eq!(s.sub(&s).sign().unwrap(), 0);
        assert!(s.sub(&s).is_zero());
    }

    #[test]
    fn scaling_distributes_over_coefficients() {
        let ctx = sqrt2_ctx();
        let g = LambdaScalar::generator(&ctx, 0);
        // 3 g1 - 1, scaled by -1/3: g1 appears with coefficient -1.
        let v = g.scale_int(&BigInt::from(3)).sub(&LambdaScalar::one());
        let w = v.scale_rat(&rat(-1, 3));
        assert_eq!(w.coeff(0), rat(-1, 1));
        assert_eq!(w.rat_part(), &rat(1, 3));
    }

    #[test]
    fn interval_sign_certification() {
        let ctx = sqrt2_ctx();
        let g = LambdaScalar::generator(&ctx, 0);
        // g1 - 1.4 > 0 and g1 - 1.5 < 0 are decidable at this precision.
        assert_eq!(g.sub(&LambdaScalar::from_rat(rat(7, 5))).sign().unwrap(), 1);
        assert_eq!(g.sub(&LambdaScalar::from_rat(rat(3, 2))).sign().unwrap(), -1);
        // g1 - midpoint straddles zero: hard error, never a guess.
        let mid = LambdaScalar::from_rat(ctx.generator(0).midpoint.clone());
        assert!(matches!(
            g.sub(&mid).sign(),
            Err(Error::UndecidableSign { .. })
        ));
    }

    #[test]
    fn structural_zero_needs_all_coefficients_zero() {
        let ctx = sqrt2_ctx();
        let g = LambdaScalar::generator(&ctx, 0);
        let z = g.sub(&g);
        assert!(z.is_zero());
        assert!(z.is_rational());
        let nz = g.add(&LambdaScalar::one());
        assert!(!nz.is_zero());
    }

    #[test]
    fn qspan_membership() {
        let ctx = sqrt2_ctx();
        let g = LambdaScalar::generator(&ctx, 0);
        let allowed_all: BTreeSet<u32> = [0].into_iter().collect();
        let allowed_none: BTreeSet<u32> = BTreeSet::new();
        assert!(g.in_qspan(&allowed_all));
        assert!(!g.in_qspan(&allowed_none));
        assert!(LambdaScalar::from_rat(rat(5, 7)).in_qspan(&allowed_none));
    }
}
