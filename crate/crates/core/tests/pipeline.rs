//! The reconstruction and summation pipeline against independent answers.

use fpi_core::moments::{
    generate_moments, Coefficients, GeneratorConfig, Kernel, MomentSequence, MomentSource, SystemId, SystemSpec,
};
use fpi_core::numeric::{gamma, pow_rational, BigRational, BigReal, PrecisionContext};
use fpi_core::quadrature::stieltjes_quadrature;
use fpi_core::reconstruction::solve_density;
use fpi_core::summation::{energy, stieltjes_value, EvaluationRequest};

fn custom_spec(nu: BigRational) -> SystemSpec {
    SystemSpec {
        id: SystemId::Custom,
        subtraction: BigRational::zero(),
        prefactor: BigRational::new(1, 1),
        kernel: Kernel::Linear,
        strong_exponent: nu.clone(),
        nu,
    }
}

/// Moments `∫ x^{n−ν} e^{-bx} Σ_l w_l x^l dx` for `n < count`.
fn moments_of(w: &[i64], b: &BigRational, nu: &BigRational, count: usize, ctx: PrecisionContext) -> Vec<BigReal> {
    let b_r = BigReal::from_rational(b, ctx);
    (0..count)
        .map(|n| {
            w.iter()
                .enumerate()
                .map(|(l, &wl)| {
                    let s = BigRational::new((n + l + 1) as i64, 1) - nu.clone();
                    let s_r = BigReal::from_rational(&s, ctx);
                    gamma(&s_r, ctx).unwrap() * ctx.int(wl) / pow_rational(&b_r, &s, ctx)
                })
                .sum()
        })
        .collect()
}

fn rel(a: &BigReal, b: &BigReal) -> f64 {
    ((a - b) / b).abs().to_f64()
}

#[test]
fn polynomial_times_half_exponential_is_recovered() {
    // g = e^{-x/2}(3 + 2x + x²) lies in the span of the first three
    // Laguerre functions, so any d ≥ 2 reproduces it to working precision.
    let ctx = PrecisionContext::new(100).unwrap();
    let nu = BigRational::new(1, 3);
    let w = [3, 2, 1];
    let mu = moments_of(&w, &BigRational::new(1, 2), &nu, 11, ctx);
    let seq = MomentSequence::new(custom_spec(nu.clone()), Coefficients::Approx(mu), MomentSource::File, ctx).unwrap();
    let density = solve_density(&seq, ctx).unwrap();
    for c in &density.c[3..] {
        assert!(c.abs().to_f64() < 1e-80, "{}", c.to_sig_string(5));
    }
    for x in [0.0, 0.5, 3.0, 20.0] {
        let x = BigReal::from_f64(x, ctx);
        let exact = (-&x / ctx.int(2)).exp() * (ctx.int(3) + &(ctx.int(2) * &x) + &x * &x);
        assert!((density.eval_g_real(&x) - exact).abs().to_f64() < 1e-80);
    }
    for beta in ["0.5", "1", "1000", "1e12"] {
        let beta = BigReal::parse(beta, ctx).unwrap();
        let fp = stieltjes_value(&density, &beta, ctx).unwrap();
        let g = |x: &BigReal| (-x / ctx.int(2)).exp() * (ctx.int(3) + &(ctx.int(2) * x) + x * x);
        let q = stieltjes_quadrature(g, &nu, Kernel::Linear, &beta, 70, ctx.widened(20)).unwrap();
        assert!(rel(&fp.stieltjes, &q.value) < 1e-65, "beta {}", beta.to_sig_string(3));
    }
    // Far inside the weak-coupling region the series in 1/β is refused
    // rather than truncated.
    let tiny = BigReal::parse("0.01", ctx).unwrap();
    assert!(stieltjes_value(&density, &tiny, ctx).unwrap_err().is_numeric());
}

#[test]
fn exponential_density_converges_with_d() {
    // g = e^{-x} needs the whole Laguerre series; the truncated fit
    // converges geometrically in d.
    let nu = BigRational::new(2, 5);
    let mut errors = Vec::new();
    for count in [11, 21, 31] {
        let ctx = PrecisionContext::new(120).unwrap();
        let mu = moments_of(&[1], &BigRational::new(1, 1), &nu, count, ctx);
        let seq = MomentSequence::new(custom_spec(nu.clone()), Coefficients::Approx(mu), MomentSource::File, ctx).unwrap();
        let density = solve_density(&seq, ctx).unwrap();
        let mut worst = 0f64;
        for beta in ["0.1", "1", "100", "1e8"] {
            let beta = BigReal::parse(beta, ctx).unwrap();
            let fp = stieltjes_value(&density, &beta, ctx).unwrap();
            let q = stieltjes_quadrature(|x| (-x).exp(), &nu, Kernel::Linear, &beta, 60, ctx).unwrap();
            worst = worst.max(rel(&fp.stieltjes, &q.value));
        }
        errors.push(worst);
    }
    assert!(errors.windows(2).all(|e| e[1] < e[0] * 1e-2), "{errors:?}");
    assert!(errors[2] < 1e-9, "{errors:?}");
}

#[test]
fn results_are_stable_under_extra_digits() {
    let cfg = GeneratorConfig::default();
    let run = |digits: u32| {
        let ctx = PrecisionContext::new(digits).unwrap();
        let seq = generate_moments(SystemId::Quartic, 40, &cfg, ctx).unwrap();
        let betas = ["0.1", "1", "100", "1e9"].map(|b| BigReal::parse(b, ctx).unwrap()).to_vec();
        let mut req = EvaluationRequest::new(seq, betas);
        req.digits = Some(digits);
        energy(&req).unwrap()
    };
    let (base, wide) = (run(100), run(200));
    for (a, b) in base.iter().zip(&wide) {
        let allowed = 100 - 10 - a.cancellation_digits as i32;
        assert!(rel(&a.total, &b.total) < 10f64.powi(-allowed), "beta {}", a.beta.to_sig_string(3));
    }
}
