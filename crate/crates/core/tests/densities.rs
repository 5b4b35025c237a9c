mod common;

use bmom::densities::{
    central_interval, laplace_even_moment, mixture_check, mixture_density, LaplaceDist, NormalDist,
    ScaledExponentialDist,
};
use common::{midpoint, simpson};
use proptest::prelude::*;

const PANELS: usize = 200_000;

#[test]
fn laplace_normalizes() {
    for (m, b) in [
        (0.0, 0.5),
        (2.0, 1.0 / 6f64.sqrt()),
        (-3.0, 4.0),
        (1e3, 1e-3),
    ] {
        let d = LaplaceDist::new(m, b).unwrap();
        let half = simpson(|x| d.pdf(m + x), 0.0, 40.0 * b, PANELS);
        assert!((2.0 * half - 1.0).abs() < 1e-8, "m = {m}, b = {b}");
    }
}

#[test]
fn normal_and_exponential_normalize() {
    let n = NormalDist::new(1.5, 0.3).unwrap();
    let sd = n.std_dev();
    let total = simpson(|x| n.pdf(x), 1.5 - 12.0 * sd, 1.5 + 12.0 * sd, PANELS);
    assert!((total - 1.0).abs() < 1e-8);

    let e = ScaledExponentialDist::new(2.5).unwrap();
    let total = simpson(|x| e.eval(x).unwrap().pdf, 0.0, 2.5 * 45.0, PANELS);
    assert!((total - 1.0).abs() < 1e-8);
}

#[test]
fn w_form_even_and_odd_moments() {
    let w = LaplaceDist::standard_w();
    for r in 1..=4u32 {
        let m = 2.0 * simpson(|x| x.powi(2 * r as i32) * w.pdf(x), 0.0, 40.0, PANELS);
        let want = laplace_even_moment(r);
        assert!(
            (m - want).abs() < 1e-8 * want.max(1.0),
            "r = {r}: {m} vs {want}"
        );
    }
    for r in [1, 3, 5] {
        let odd = simpson(|x| x.powi(r) * w.pdf(x), -40.0, 40.0, PANELS);
        assert!(odd.abs() <= 1e-10, "odd moment {r}: {odd}");
    }
}

#[test]
fn kurtosis_is_six_for_every_scale() {
    for b in [1e-3, 0.5, 1.0, 7.0] {
        let d = LaplaceDist::new(0.3, b).unwrap();
        assert_eq!(d.kurtosis(), 6.0);
        let ratio = d.central_moment(4) / d.central_moment(2).powi(2);
        assert!((ratio - 6.0).abs() < 1e-14);
    }
}

#[test]
fn mixture_against_direct_integration() {
    // integrate in sigma2 directly, independent of the t = sqrt(sigma2)
    // substitution used by the library
    for (n, s2, off) in [
        (2u32, 1.0, 0.0),
        (3, 1.0, 0.7),
        (1, 4.0, -1.3),
        (10, 0.5, 0.1),
    ] {
        let nf = f64::from(n);
        let f = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let var = v / nf;
            (-off * off / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
                * (-v / s2).exp()
                / s2
        };
        // the integrand has an integrable v^(-1/2) singularity at 0 when
        // off = 0; split the range and substitute v = u² near the origin
        let near = midpoint(|u| 2.0 * u * f(u * u), 0.0, 1.0, PANELS);
        let far = simpson(f, 1.0, 60.0 * s2, PANELS);
        let numeric = mixture_density(n, s2, off).unwrap().value;
        assert!(
            (numeric - (near + far)).abs() < 1e-7,
            "n = {n}: {numeric} vs {}",
            near + far
        );
    }
}

#[test]
fn mixture_examples() {
    let at_centre = mixture_density(2, 1.0, 0.0).unwrap().value;
    assert!((at_centre - 1.0).abs() < 1e-6);
    for x in [0.3, 1.0, 2.5] {
        let a = mixture_density(1, 1.0, x).unwrap().value;
        let b = mixture_density(1, 1.0, -x).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }
    let grid: Vec<f64> = (0..21).map(|i| -3.0 + 0.3 * f64::from(i)).collect();
    assert!(mixture_check(3, 1.0, &grid).unwrap() <= 1e-6);
}

#[test]
fn laplace_interval_crosses_normal_just_below_91_percent() {
    let l = LaplaceDist::standard_z();
    let n = NormalDist::new(0.0, 1.0).unwrap();
    let diff = |level: f64| {
        central_interval(&l, level).unwrap().width() - central_interval(&n, level).unwrap().width()
    };
    let (mut lo, mut hi) = (0.85, 0.95);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if diff(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((0.905..0.91).contains(&lo), "crossover at {lo}");
    for level in [0.91, 0.93, 0.95, 0.99, 0.9999] {
        assert!(diff(level) > 0.0);
    }
}

proptest! {
    #[test]
    fn laplace_round_trip(m in -1e3f64..1e3, b in 1e-3f64..1e3, p in 1e-6f64..(1.0 - 1e-6)) {
        let d = LaplaceDist::new(m, b).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x) - p).abs() <= 1e-12);
    }

    #[test]
    fn laplace_symmetry(m in -10f64..10.0, b in 0.01f64..10.0, x in 0f64..50.0) {
        let d = LaplaceDist::new(m, b).unwrap();
        prop_assert!((d.pdf(m + x) - d.pdf(m - x)).abs() <= 1e-15 * d.pdf(m));
        prop_assert!((d.cdf(m + x) + d.cdf(m - x) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn normal_round_trip(m in -1e3f64..1e3, v in 1e-4f64..1e4, p in 1e-6f64..(1.0 - 1e-6)) {
        let d = NormalDist::new(m, v).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x) - p).abs() <= 1e-12);
    }

    #[test]
    fn exponential_round_trip(mean in 1e-3f64..1e3, p in 1e-6f64..(1.0 - 1e-6)) {
        let d = ScaledExponentialDist::new(mean).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.eval(x).unwrap().cdf - p).abs() <= 1e-12);
    }

    #[test]
    fn cdf_is_monotone(m in -5f64..5.0, b in 0.1f64..5.0, a in -30f64..30.0, step in 0f64..5.0) {
        let d = LaplaceDist::new(m, b).unwrap();
        prop_assert!(d.cdf(a) <= d.cdf(a + step));
    }

    #[test]
    fn interval_contains_level_mass(m in -5f64..5.0, v in 0.01f64..10.0, level in 0.01f64..0.999) {
        let d = LaplaceDist::from_mean_var(m, v).unwrap();
        let i = central_interval(&d, level).unwrap();
        prop_assert!((d.cdf(i.upper) - d.cdf(i.lower) - level).abs() < 1e-12);
        prop_assert!((i.midpoint() - m).abs() <= 1e-12 * m.abs().max(1.0));
    }
}
