//! The funnel energy against a finite-difference solution of the radial
//! equation `−u''/2 − u/r + βr u = E u`, `u(0) = u(R) = 0`.

use fpi_core::moments::{generate_moments, generate_rs, GeneratorConfig, SystemId};
use fpi_core::numeric::{BigReal, PrecisionContext};
use fpi_core::summation::{energy, EvaluationRequest};

/// Negative pivots of `T − λ` for the three-point discretisation, which
/// count the eigenvalues below `λ`.
fn count_below(beta: f64, radius: f64, steps: usize, lambda: f64) -> usize {
    let h = radius / steps as f64;
    let off2 = 1.0 / (4.0 * h.powi(4));
    let mut pivot = 1.0;
    let mut count = 0;
    for i in 1..steps {
        let r = i as f64 * h;
        let diag = 1.0 / (h * h) - 1.0 / r + beta * r - lambda;
        pivot = if i == 1 { diag } else { diag - off2 / pivot };
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenvalue by bisection on the Sturm count.
fn ground_state(beta: f64, radius: f64, steps: usize) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0 + 3.0 * beta.abs().max(1.0));
    while count_below(beta, radius, steps, hi) == 0 {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if count_below(beta, radius, steps, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two Richardson steps on the `O(h²)` discretisation error.
fn radial_energy(beta: f64, radius: f64) -> f64 {
    let e: Vec<f64> = [4000, 8000, 16000].iter().map(|&n| ground_state(beta, radius, n)).collect();
    let r1 = (4.0 * e[1] - e[0]) / 3.0;
    let r2 = (4.0 * e[2] - e[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

#[test]
fn first_order_coefficient_is_mean_radius() {
    // dE/dβ at β = 0 is ⟨r⟩ = 3/2 in the hydrogen ground state.
    let delta = 1e-4;
    let slope = (radial_energy(delta, 40.0) - radial_energy(-delta, 40.0)) / (2.0 * delta);
    assert!((slope - 1.5).abs() < 1e-5, "{slope}");
    let ctx = PrecisionContext::new(40).unwrap();
    let rs = generate_rs(SystemId::Funnel, 2, &GeneratorConfig::default()).unwrap();
    let eps = rs.values.rounded(ctx);
    // E = −½ Σ ε_k (−β)^k, so the slope is ε_1 / 2.
    assert!((eps[1].to_f64() / 2.0 - slope).abs() < 1e-5);
}

fn summed(moments: usize, beta: f64) -> f64 {
    let ctx = PrecisionContext::new(fpi_core::numeric::recommended_digits(moments - 1)).unwrap();
    let seq = generate_moments(SystemId::Funnel, moments, &GeneratorConfig::default(), ctx).unwrap();
    let request = EvaluationRequest::new(seq, vec![BigReal::from_f64(beta, ctx)]);
    energy(&request).unwrap()[0].total.to_f64()
}

#[test]
fn summed_energy_matches_radial_solution() {
    // The grid energy agrees with high-order Padé values to about 1e-10;
    // the 1.4e-8 gap is the truncation of a hundred moments.
    let fd = radial_energy(1.0, 20.0);
    let fp = summed(100, 1.0);
    assert!(((fp - fd) / fd).abs() < 1e-7, "summed {fp}, radial {fd}");
}

#[test]
fn strong_coupling_error_shrinks_with_moments() {
    // At β = 10 a hundred moments still sit 1.7e-4 below the true energy;
    // the gap closes from below as moments are added.
    let fd = radial_energy(10.0, 20.0);
    let gaps: Vec<f64> = [100, 150].iter().map(|&n| (fd - summed(n, 10.0)) / fd).collect();
    assert!(gaps[0] > 0.0 && gaps[0] < 2e-4, "{gaps:?}");
    assert!(gaps[1] > 0.0 && gaps[1] < 0.5 * gaps[0], "{gaps:?}");
}
