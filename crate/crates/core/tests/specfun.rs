use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use resolvent_spectra::grid::{uniform, GridFunction};
use resolvent_spectra::specfun::quad::{hilbert_real_line, integrate_real_line};
use resolvent_spectra::specfun::*;

// w(z) = exp(-z^2) erfc(-iz) at 30 digits (mpmath).
const FADDEEVA_REF: [((f64, f64), (f64, f64)); 10] = [
    ((0.0, 1.0), (0.427_583_576_155_807_004_41, 0.0)),
    ((0.5, 0.5), (0.533_156_707_912_174_913_77, 0.230_488_231_384_458_408_71)),
    ((2.0, 0.1), (0.040_201_398_161_451_288_505, 0.331_582_687_334_563_080_67)),
    ((-3.0, 1.0), (0.065_317_777_289_046_966_769, -0.173_918_315_416_348_966_93)),
    ((5.5, 0.01), (0.000_196_625_596_409_244_616_11, 0.104_367_058_733_362_458_33)),
    ((0.1, 7.0), (0.079_784_545_146_282_251_494, 0.001_117_627_391_958_700_134)),
    ((9.0, 0.0), (6.639_677_199_580_734_400_7e-36, 0.063_082_090_059_258_286_371)),
    ((0.001, 0.001), (0.998_871_622_335_411_247_13, 0.001_126_380_671_599_866_452_9)),
    ((4.0, 4.0), (0.071_570_433_426_365_329_165, 0.069_374_518_613_771_460_701)),
    ((12.0, 0.5), (0.001_976_243_676_494_804_560_2, 0.047_097_556_962_267_810_332)),
];

#[test]
fn faddeeva_matches_high_precision_values() {
    for ((x, y), (re, im)) in FADDEEVA_REF {
        let w = faddeeva(Complex64::new(x, y)).unwrap();
        let err = (w - Complex64::new(re, im)).norm() / Complex64::new(re, im).norm();
        assert!(err < 1e-10, "w({x}+{y}i) = {w}, relative error {err:e}");
    }
}

#[test]
fn faddeeva_on_the_imaginary_axis_is_real() {
    let w = faddeeva(Complex64::new(0.0, 1.0)).unwrap();
    assert_eq!(w.im, 0.0);
    assert!((w.re - 0.427_583_576_155_807).abs() < 1e-13);
}

#[test]
fn faddeeva_large_argument_asymptote() {
    for k in 0..8 {
        let phase = 0.05 + k as f64 * (PI - 0.1) / 7.0;
        let z = Complex64::from_polar(30.0, phase);
        let w = faddeeva(z).unwrap();
        let asym = Complex64::new(0.0, 1.0 / PI.sqrt()) / z;
        assert!((w - asym).norm() / asym.norm() < 1e-3, "phase {phase}");
    }
}

#[test]
fn lorentzian_and_gaussian_normalize() {
    let chi = 0.7;
    let l = resolvent_spectra::specfun::quad::integrate(|x| lorentzian(x, chi).unwrap(), -1e4 * chi, 1e4 * chi, 1e-12);
    // mass outside +-1e4 chi is 2/(pi 1e4)
    assert!((l.value - 1.0).abs() < 1e-4 && (l.value + 2.0 / (PI * 1e4) - 1.0).abs() < 1e-6);
    assert!((lorentzian(1.0, 1.0).unwrap() - 0.5 / PI).abs() < 1e-16);
    let g = integrate_real_line(|x| gaussian(x, 1.3).unwrap(), 0.0, 1.3, 1e-13);
    assert!((g.value - 1.0).abs() < 1e-10);
    let s = 1.7;
    assert!((gaussian(s, s).unwrap() - (-0.5f64).exp() / (s * (2.0 * PI).sqrt())).abs() < 1e-16);
}

#[test]
fn voigt_limits_and_convolution() {
    let chi = 0.3;
    let sharp = ProfileParams::new(1e-7, chi).unwrap();
    for x in [0.0, 0.4, 3.0] {
        let l = lorentzian(x, chi).unwrap();
        assert!((voigt(x, &sharp) - l).abs() / l < 1e-6);
    }
    let narrow = ProfileParams::new(1.0, 1e-8).unwrap();
    for x in [0.0, 0.5, 1.5] {
        let g = gaussian(x, 1.0).unwrap();
        assert!((voigt(x, &narrow) - g).abs() / g < 1e-6);
    }
    // mpmath convolution of G(1.3) and L(0.4) at x = 0.7
    let p = ProfileParams::new(1.3, 0.4).unwrap();
    assert!((voigt(0.7, &p) - 0.217_835_825_184_547_415_33).abs() < 1e-12);
}

#[test]
fn dispersion_is_the_hilbert_transform_of_voigt() {
    let p = ProfileParams::new(1.0, 0.3).unwrap();
    assert_eq!(dispersion(0.0, &p), 0.0);
    let pv = hilbert_real_line(|t| voigt(t, &p), 1.1, 1.0, 1e-12);
    assert!((dispersion(1.1, &p) - pv).abs() < 1e-6, "{} vs {pv}", dispersion(1.1, &p));
    assert!((dispersion(1.1, &p) - 0.177_790_680_361_038_206_42).abs() < 1e-12);
    let wide = ProfileParams::new(1e6, 0.3).unwrap();
    assert!(dispersion(1.1, &wide).abs() < 1e-5);
}

#[test]
fn hilbert_pv_of_sampled_profiles() {
    let chi = 0.5;
    let x = uniform(-400.0, 400.0, 160_001);
    let f = GridFunction::from_fn(x.clone(), |l| lorentzian(l, chi).unwrap()).unwrap();
    for l in [-1.3, 0.2, 0.9] {
        let v = hilbert_pv(&f, l).unwrap().value;
        assert!((v - l / (PI * (l * l + chi * chi))).abs() < 1e-4, "{l}: {v}");
    }
    assert!(hilbert_pv(&f, 0.0).unwrap().value.abs() < 1e-12);
    let g = GridFunction::from_fn(uniform(-12.0, 12.0, 4001), |l| gaussian(l, 1.0).unwrap()).unwrap();
    for l in [0.37, 1.4, -2.2] {
        let v = hilbert_pv(&g, l).unwrap().value;
        assert!((v - gaussian_dispersion(l, 1.0)).abs() < 1e-4);
    }
}

#[test]
fn hilbert_applied_twice_negates() {
    let g = GridFunction::from_fn(uniform(-60.0, 60.0, 12_001), |l| gaussian(l - 0.3, 1.0).unwrap()).unwrap();
    let hh = hilbert_on_grid(&hilbert_on_grid(&g));
    // the first transform decays like 1/(pi x); cutting it at 60 costs ~ 2/(pi^2 60)
    for (i, &l) in g.lambdas().iter().enumerate() {
        if l.abs() < 4.0 {
            assert!((hh.values()[i] + g.values()[i]).abs() < 5e-3, "{l}: {}", hh.values()[i] + g.values()[i]);
        }
    }
}

#[test]
fn voigt_hilbert_identity_generic_point() {
    let p = ProfileParams::new(1.0, 0.3).unwrap();
    let (lp, mu1, mu2) = (0.5, 0.0, 0.2);
    let f = |l: f64| gaussian(l - mu1, 1.0).unwrap() * lorentzian(l - mu2, 0.3).unwrap();
    let pv = PI * hilbert_real_line(f, lp, 1.0, 1e-13) / voigt(mu2 - mu1, &p);
    let id = voigt_hilbert_identity(lp, mu1, mu2, &p);
    assert!((pv - id).abs() / id.abs() < 1e-6, "{pv} vs {id}");
    assert_eq!(voigt_hilbert_identity(0.4, 0.4, 0.4, &p), 0.0);
    let wide = ProfileParams::new(1e7, 0.3).unwrap();
    let d: f64 = 0.5 - 0.2;
    assert!((voigt_hilbert_identity(lp, mu1, mu2, &wide) - d / (d * d + 0.09)).abs() < 1e-5);
}

proptest! {
    #[test]
    fn voigt_is_positive(x in -50.0f64..50.0, s in 0.05f64..5.0, c in 0.01f64..5.0) {
        let p = ProfileParams::new(s, c).unwrap();
        prop_assert!(voigt(x, &p) > 0.0);
    }

    #[test]
    fn voigt_normalizes(s in 0.1f64..3.0, c in 0.05f64..2.0) {
        let p = ProfileParams::new(s, c).unwrap();
        let m = integrate_real_line(|x| voigt(x, &p), 0.0, s.max(c), 1e-12).value;
        prop_assert!((m - 1.0).abs() < 1e-6, "mass {}", m);
    }

    #[test]
    fn dispersion_is_odd(x in 0.0f64..20.0, s in 0.05f64..5.0, c in 0.01f64..5.0) {
        let p = ProfileParams::new(s, c).unwrap();
        prop_assert!((dispersion(x, &p) + dispersion(-x, &p)).abs() <= 1e-12);
    }

    #[test]
    fn faddeeva_real_axis_real_part(x in -25.0f64..25.0) {
        let w = faddeeva(Complex64::new(x, 0.0)).unwrap();
        prop_assert!((w.re - (-x * x).exp()).abs() <= 1e-12);
        let m = faddeeva(Complex64::new(-x, 0.0)).unwrap();
        prop_assert!((m - w.conj()).norm() <= 1e-14);
    }
}
