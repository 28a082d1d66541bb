//! Stieltjes moment sequences for the supported systems.
//!
//! Rayleigh–Schrödinger coefficients come from the built-in generators or
//! from a moment file; [`map_to_moments`] applies each system's sign and
//! index shift so that every μ_k is positive.

mod file;
mod riccati;
mod system;

pub use file::{load_moments, Convention, MomentFile};
pub use system::{Kernel, SystemId, SystemSpec};

use crate::error::{Error, Result};
use crate::numeric::{recommended_digits, BigRational, BigReal, PrecisionContext};

use riccati::{funnel_series, oscillator_series, Dyadic, Scalar};

/// Coefficient values, exact while the generator could afford rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Exact(Vec<BigRational>),
    Approx(Vec<BigReal>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Exact(v) => v.len(),
            Coefficients::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficients::Exact(_))
    }

    pub fn rounded(&self, ctx: PrecisionContext) -> Vec<BigReal> {
        match self {
            Coefficients::Exact(v) => v.iter().map(|q| BigReal::from_rational(q, ctx)).collect(),
            Coefficients::Approx(v) => v.iter().map(|x| x.to_ctx(ctx)).collect(),
        }
    }

    fn map(&self, f_exact: impl Fn(usize, &BigRational) -> BigRational, f_approx: impl Fn(usize, &BigReal) -> BigReal) -> Self {
        match self {
            Coefficients::Exact(v) => {
                Coefficients::Exact(v.iter().enumerate().map(|(i, q)| f_exact(i, q)).collect())
            }
            Coefficients::Approx(v) => {
                Coefficients::Approx(v.iter().enumerate().map(|(i, x)| f_approx(i, x)).collect())
            }
        }
    }

    fn skip(&self, n: usize) -> Self {
        match self {
            Coefficients::Exact(v) => Coefficients::Exact(v.iter().skip(n).cloned().collect()),
            Coefficients::Approx(v) => Coefficients::Approx(v.iter().skip(n).cloned().collect()),
        }
    }
}

/// Perturbation coefficients in each system's own convention:
/// `b^{(k)}` (quartic), `b_3^{(k)}` (sextic), `e_{0,k}` (PT cubic), all
/// starting at `k = 1`; `ε_k` (funnel) starting at `k = 0` with `ε_0 = 1`.
/// Custom series hold the energy coefficients `a_1, a_2, …` of
/// `E = subtraction + Σ a_k β^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RSCoefficients {
    pub system: SystemId,
    pub first_index: usize,
    pub values: Coefficients,
}

/// Controls the exact/float switch of the generators.
#[derive(Clone, Copy, Debug)]
pub struct GeneratorConfig {
    /// Highest order still generated in exact arithmetic.
    pub exact_limit: usize,
    /// Orders beyond this are refused.
    pub max_order: usize,
    /// Working precision of the float path; defaults from the order.
    pub float_ctx: Option<PrecisionContext>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            exact_limit: 300,
            max_order: 3000,
            float_ctx: None,
        }
    }
}

impl GeneratorConfig {
    fn check(&self, op: &'static str, order: usize) -> Result<()> {
        if order == 0 {
            return Err(Error::Validation {
                op,
                detail: "order must be at least 1".into(),
            });
        }
        if order > self.max_order {
            return Err(Error::ResourceLimit {
                op,
                detail: format!("order {order} exceeds the configured bound {}", self.max_order),
            });
        }
        Ok(())
    }

    fn float_ctx(&self, order: usize) -> PrecisionContext {
        self.float_ctx.unwrap_or_else(|| {
            PrecisionContext::new(recommended_digits(order) + 50).expect("at least 100 digits")
        })
    }
}

fn run<F, G>(cfg: &GeneratorConfig, order: usize, exact: F, approx: G) -> Coefficients
where
    F: FnOnce(&Dyadic) -> Vec<Dyadic>,
    G: FnOnce(&BigReal) -> Vec<BigReal>,
{
    if order <= cfg.exact_limit {
        Coefficients::Exact(exact(&Dyadic::from_i64(1)).iter().map(Dyadic::to_rational).collect())
    } else {
        Coefficients::Approx(approx(&cfg.float_ctx(order).one()))
    }
}

/// `b^{(1)} … b^{(order)}` for `p² + x² + βx⁴`.
pub fn generate_rs_quartic(order: usize, cfg: &GeneratorConfig) -> Result<RSCoefficients> {
    cfg.check("generate_rs_quartic", order)?;
    Ok(RSCoefficients {
        system: SystemId::Quartic,
        first_index: 1,
        values: run(cfg, order, |o| oscillator_series(4, order, o), |o| oscillator_series(4, order, o)),
    })
}

/// `b_3^{(1)} … b_3^{(order)}` for `p² + x² + βx⁶`.
pub fn generate_rs_sextic(order: usize, cfg: &GeneratorConfig) -> Result<RSCoefficients> {
    cfg.check("generate_rs_sextic", order)?;
    Ok(RSCoefficients {
        system: SystemId::Sextic,
        first_index: 1,
        values: run(cfg, order, |o| oscillator_series(6, order, o), |o| oscillator_series(6, order, o)),
    })
}

/// `e_{0,1} … e_{0,order}` for `p² + x² + i√β x³`.
///
/// The series is generated for the Hermitian `p² + x² + g x³`, whose odd
/// orders vanish; `g² = −β` then gives `e_{0,j} = (−1)^j E_{2j}`.
pub fn generate_rs_pt_cubic(order: usize, cfg: &GeneratorConfig) -> Result<RSCoefficients> {
    cfg.check("generate_rs_pt_cubic", order)?;
    let n = 2 * order;
    let herm = run(cfg, order, |o| oscillator_series(3, n, o), |o| oscillator_series(3, n, o));
    let even = |v: usize| 2 * v + 1;
    let values = match herm {
        Coefficients::Exact(v) => Coefficients::Exact(
            (0..order)
                .map(|j| if j % 2 == 0 { -&v[even(j)] } else { v[even(j)].clone() })
                .collect(),
        ),
        Coefficients::Approx(v) => Coefficients::Approx(
            (0..order)
                .map(|j| if j % 2 == 0 { -&v[even(j)] } else { v[even(j)].clone() })
                .collect(),
        ),
    };
    Ok(RSCoefficients {
        system: SystemId::PtCubic,
        first_index: 1,
        values,
    })
}

/// `ε_0 … ε_order` with `E(β) = −½ Σ ε_k (−β)^k` for the s-wave of
/// `p²/2 − 1/r + βr`.
pub fn generate_rs_funnel(order: usize, cfg: &GeneratorConfig) -> Result<RSCoefficients> {
    cfg.check("generate_rs_funnel", order)?;
    // ε_k = −2(−1)^k E_k
    fn to_eps<T: Scalar>(one: &T, mut e: Vec<T>) -> Vec<T> {
        for (i, v) in e.iter_mut().enumerate() {
            let k = i + 1;
            *v = v.scaled(if k % 2 == 0 { -2 } else { 2 });
            v.tidy();
        }
        e.insert(0, one.clone());
        e
    }
    let values = run(
        cfg,
        order,
        |o| to_eps(o, funnel_series(order, o)),
        |o| to_eps(o, funnel_series(order, o)),
    );
    Ok(RSCoefficients {
        system: SystemId::Funnel,
        first_index: 0,
        values,
    })
}

/// Dispatches to the built-in generator of `id`.
pub fn generate_rs(id: SystemId, order: usize, cfg: &GeneratorConfig) -> Result<RSCoefficients> {
    match id {
        SystemId::PtCubic => generate_rs_pt_cubic(order, cfg),
        SystemId::Quartic => generate_rs_quartic(order, cfg),
        SystemId::Sextic => generate_rs_sextic(order, cfg),
        SystemId::Funnel => generate_rs_funnel(order, cfg),
        SystemId::Custom => Err(Error::Validation {
            op: "generate_rs",
            detail: "custom systems have no generator; supply a moment file".into(),
        }),
    }
}

/// Where a moment sequence came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Generated,
    File,
}

/// Positive Stieltjes moments of one system. For the quadratic kernel
/// entry `k` is the even moment `μ_{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub spec: SystemSpec,
    pub mu: Vec<BigReal>,
    pub source: MomentSource,
    pub exact: Option<Vec<BigRational>>,
}

impl MomentSequence {
    /// Validates spec, length and positivity and rounds to `ctx`.
    pub fn new(
        spec: SystemSpec,
        values: Coefficients,
        source: MomentSource,
        ctx: PrecisionContext,
    ) -> Result<Self> {
        spec.validate()?;
        if values.len() < 2 {
            return Err(Error::Validation {
                op: "map_to_moments",
                detail: format!("need at least 2 moments, got {}", values.len()),
            });
        }
        let mu = values.rounded(ctx);
        if let Some(k) = mu.iter().position(|m| !m.is_positive()) {
            return Err(Error::Validation {
                op: "map_to_moments",
                detail: format!("moment {k} is {} (must be > 0)", mu[k].to_sig_string(10)),
            });
        }
        let exact = match values {
            Coefficients::Exact(v) => Some(v),
            Coefficients::Approx(_) => None,
        };
        Ok(MomentSequence {
            spec,
            mu,
            source,
            exact,
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// The moments at `ctx`, re-rounded from the exact values when known.
    pub fn at(&self, ctx: PrecisionContext) -> Vec<BigReal> {
        match &self.exact {
            Some(v) => v.iter().map(|q| BigReal::from_rational(q, ctx)).collect(),
            None => self.mu.iter().map(|x| x.to_ctx(ctx)).collect(),
        }
    }

    /// The first `n` moments.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n < 2 || n > self.len() {
            return Err(Error::Validation {
                op: "map_to_moments",
                detail: format!("cannot take {n} of {} moments", self.len()),
            });
        }
        Ok(MomentSequence {
            spec: self.spec.clone(),
            mu: self.mu[..n].to_vec(),
            source: self.source,
            exact: self.exact.as_ref().map(|v| v[..n].to_vec()),
        })
    }

    /// Coefficients of the Stieltjes series `Σ_k (−1)^k μ_k β^k` whose
    /// value times `β` is the fluctuating part of the energy.
    pub fn stieltjes_series(&self, ctx: PrecisionContext) -> Vec<BigReal> {
        self.at(ctx)
            .into_iter()
            .enumerate()
            .map(|(k, m)| if k % 2 == 0 { m } else { -m })
            .collect()
    }
}

/// Applies the system's RS → moment mapping:
/// `μ_k = (−1)^k b^{(k+1)}`, `μ_k = (−1)^k e_{0,k+1}`, `μ_{2k} = (−1)^k b_3^{(k+1)}`,
/// `μ_k = ε_{k+1}`, and for custom series `μ_k = (−1)^k a_{k+1} / prefactor`.
pub fn map_to_moments(
    rs: &RSCoefficients,
    spec: &SystemSpec,
    source: MomentSource,
    ctx: PrecisionContext,
) -> Result<MomentSequence> {
    if spec.id != rs.system {
        return Err(Error::Validation {
            op: "map_to_moments",
            detail: format!("coefficients are for {}, spec is {}", rs.system, spec.id),
        });
    }
    // Drop ε_0 so that every list starts at index 1.
    let tail = rs.values.skip(if rs.first_index == 0 { 1 } else { 0 });
    let alternating = |i: usize| i % 2 == 1;
    let values = match spec.id {
        SystemId::Funnel => tail,
        SystemId::Custom => {
            let pre = spec.prefactor.clone();
            let pre_f = BigReal::from_rational(&pre, ctx);
            tail.map(
                |i, q| {
                    let v = q / &pre;
                    if alternating(i) { -v } else { v }
                },
                |i, x| {
                    let v = x / &pre_f;
                    if alternating(i) { -v } else { v }
                },
            )
        }
        _ => tail.map(
            |i, q| if alternating(i) { -q } else { q.clone() },
            |i, x| if alternating(i) { -x } else { x.clone() },
        ),
    };
    MomentSequence::new(spec.clone(), values, source, ctx)
}

/// Generates `n` moments for a built-in system.
pub fn generate_moments(
    id: SystemId,
    n: usize,
    cfg: &GeneratorConfig,
    ctx: PrecisionContext,
) -> Result<MomentSequence> {
    let spec = SystemSpec::builtin(id)?;
    let rs = generate_rs(id, n, cfg)?;
    map_to_moments(&rs, &spec, MomentSource::Generated, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    fn exact(rs: &RSCoefficients) -> &[BigRational] {
        match &rs.values {
            Coefficients::Exact(v) => v,
            Coefficients::Approx(_) => panic!("expected exact coefficients"),
        }
    }

    #[test]
    fn quartic_first_order() {
        let rs = generate_rs_quartic(2, &GeneratorConfig::default()).unwrap();
        assert_eq!(exact(&rs)[0], BigRational::new(3, 4));
        assert!(exact(&rs)[1].is_negative());
    }

    #[test]
    fn sextic_first_order() {
        let rs = generate_rs_sextic(2, &GeneratorConfig::default()).unwrap();
        assert_eq!(exact(&rs)[0], BigRational::new(15, 8));
        assert!(exact(&rs)[1].is_negative());
    }

    #[test]
    fn pt_cubic_first_orders() {
        let rs = generate_rs_pt_cubic(3, &GeneratorConfig::default()).unwrap();
        assert_eq!(
            exact(&rs),
            [
                BigRational::new(11, 16),
                BigRational::new(-465, 256),
                BigRational::new(39709, 4096)
            ]
        );
    }

    #[test]
    fn funnel_normalization() {
        let rs = generate_rs_funnel(3, &GeneratorConfig::default()).unwrap();
        assert_eq!(rs.first_index, 0);
        assert_eq!(exact(&rs)[0], BigRational::new(1, 1));
        assert_eq!(exact(&rs)[1], BigRational::new(3, 1));
    }

    #[test]
    fn mapping_examples() {
        let cfg = GeneratorConfig::default();
        let q = generate_moments(SystemId::Quartic, 4, &cfg, ctx()).unwrap();
        assert_eq!(q.exact.as_ref().unwrap()[0], BigRational::new(3, 4));
        let rs = generate_rs_sextic(2, &cfg).unwrap();
        let s = generate_moments(SystemId::Sextic, 2, &cfg, ctx()).unwrap();
        assert_eq!(s.exact.as_ref().unwrap()[1], -&exact(&rs)[1]);
        let rs = generate_rs_funnel(3, &cfg).unwrap();
        let f = generate_moments(SystemId::Funnel, 3, &cfg, ctx()).unwrap();
        assert_eq!(f.exact.as_ref().unwrap()[0], exact(&rs)[1]);
    }

    #[test]
    fn resource_limit() {
        let cfg = GeneratorConfig {
            max_order: 10,
            ..GeneratorConfig::default()
        };
        let e = generate_rs_quartic(11, &cfg).unwrap_err();
        assert!(matches!(e, Error::ResourceLimit { .. }));
        assert!(generate_rs_quartic(0, &cfg).is_err());
    }

    #[test]
    fn float_path_beyond_threshold() {
        let cfg = GeneratorConfig {
            exact_limit: 5,
            max_order: 100,
            float_ctx: Some(ctx()),
        };
        let approx = generate_moments(SystemId::Quartic, 8, &cfg, ctx()).unwrap();
        assert!(approx.exact.is_none());
        let exact = generate_moments(SystemId::Quartic, 8, &GeneratorConfig::default(), ctx()).unwrap();
        for (a, b) in approx.mu.iter().zip(&exact.mu) {
            assert!((a - b).abs() <= &ctx().epsilon() * b);
        }
    }

    #[test]
    fn mismatched_spec_rejected() {
        let rs = generate_rs_quartic(3, &GeneratorConfig::default()).unwrap();
        let spec = SystemSpec::builtin(SystemId::Funnel).unwrap();
        assert!(map_to_moments(&rs, &spec, MomentSource::Generated, ctx()).is_err());
    }
}
