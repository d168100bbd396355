mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use resolvent_spectra::model::*;
use resolvent_spectra::oracle::diagonalize;

fn mean_gap_ratio(eigs: &[f64]) -> f64 {
    let gaps: Vec<f64> = eigs.windows(2).map(|w| w[1] - w[0]).collect();
    let r: Vec<f64> =
        gaps.windows(2).filter(|g| g[0].max(g[1]) > 0.0).map(|g| g[0].min(g[1]) / g[0].max(g[1])).collect();
    r.iter().sum::<f64>() / r.len() as f64
}

/// Eigenvalues of the open chain in the even and odd sectors of the
/// site reflection, built directly in the spin basis.
fn reflection_sectors(n: usize, j: f64, h: f64, g: f64) -> [Vec<f64>; 2] {
    let dim = 1usize << n;
    let spin = |b: usize, i: usize| if b >> i & 1 == 0 { 1.0 } else { -1.0 };
    let refl = |b: usize| (0..n).fold(0, |acc, i| acc | ((b >> i & 1) << (n - 1 - i)));
    let mut h_full = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        h_full[(b, b)] = (0..n - 1).map(|i| j * spin(b, i) * spin(b, i + 1)).sum::<f64>()
            + (0..n).map(|i| h * spin(b, i)).sum::<f64>();
        for i in 0..n {
            h_full[(b, b ^ (1 << i))] = g;
        }
    }
    let mut out = [Vec::new(), Vec::new()];
    for (sector, sign) in [(0, 1.0), (1, -1.0)] {
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
        for b in 0..dim {
            let r = refl(b);
            if r == b && sign > 0.0 {
                cols.push(vec![(b, 1.0)]);
            } else if r > b {
                let c = std::f64::consts::FRAC_1_SQRT_2;
                cols.push(vec![(b, c), (r, sign * c)]);
            }
        }
        let m = cols.len();
        let hs = DMatrix::<f64>::from_fn(m, m, |x, y| {
            cols[x]
                .iter()
                .flat_map(|&(p, cp)| cols[y].iter().map(move |&(q, cq)| (p, cp, q, cq)))
                .map(|(p, cp, q, cq)| cp * cq * h_full[(p, q)])
                .sum::<f64>()
        });
        let mut e: Vec<f64> = hs.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        out[sector] = e;
    }
    out
}

#[test]
fn ising_chain_is_chaotic_at_the_default_point() {
    let (n, j, h, g) = (8, 1.0, 0.5, 1.05);
    let sys = build_ising_chain(n, j, h, g).unwrap();
    let spec = diagonalize(&sys).unwrap();
    let sectors = reflection_sectors(n, j, h, g);
    let mut merged: Vec<f64> = sectors.concat();
    merged.sort_by(f64::total_cmp);
    for (a, b) in merged.iter().zip(&spec.eigenvalues) {
        assert!((a - b).abs() < 1e-10);
    }
    // the reflection is the only symmetry left; mixing its two sectors
    // pushes the full-spectrum statistic towards the Poisson value
    let bulk = |e: &[f64]| e[e.len() / 4..3 * e.len() / 4].to_vec();
    let r_sector = sectors.iter().map(|e| mean_gap_ratio(&bulk(e))).sum::<f64>() / 2.0;
    assert!((0.50..=0.56).contains(&r_sector), "<r> per sector = {r_sector}");
    let r_full = mean_gap_ratio(&bulk(&spec.eigenvalues));
    assert!(r_full < r_sector, "{r_full} vs {r_sector}");
}

#[test]
fn ising_without_transverse_field_is_diagonal() {
    let sys = build_ising_chain(6, 1.0, 0.5, 0.0).unwrap();
    assert!(sys.is_uncoupled());
    let spec = diagonalize(&sys).unwrap();
    for (l, a) in spec.eigenvalues.iter().zip(&sys.a) {
        assert!((l - a).abs() < 1e-12);
    }
}

#[test]
fn ising_hamiltonian_is_exactly_symmetric() {
    let sys = build_ising_chain(7, 1.0, 0.5, 1.05).unwrap();
    assert_eq!(sys.hermiticity_defect(), 0.0);
    for i in 0..sys.dim() {
        let nonzero = (0..sys.dim()).filter(|&j| sys.vcoupling[(i, j)] != 0.0).count();
        assert_eq!(nonzero, 7);
    }
}

#[test]
fn ensemble_coupling_variance_matches_profile() {
    let amp = 0.3;
    let p = EnsembleProfile::flat(-1.0, 1.0, 200, BandProfile::Constant { amplitude: amp }, 5).unwrap();
    let sys = build_banded_ensemble(200, &p).unwrap();
    let want = (-p.entropy_at(0.0)).exp() * amp;
    let mut acc = 0.0;
    let mut n = 0usize;
    for i in 0..200 {
        for j in i + 1..200 {
            acc += sys.vcoupling[(i, j)].powi(2);
            n += 1;
        }
    }
    let var = acc / n as f64;
    assert!((var / want - 1.0).abs() < 0.1, "variance {var} vs {want}");
}

#[test]
fn ensemble_variance_per_energy_difference_bin() {
    let band = BandProfile::Gaussian { amplitude: 1.0, width: 0.5 };
    let p = EnsembleProfile::flat(-2.0, 2.0, 300, band.clone(), 17).unwrap();
    let sys = build_banded_ensemble(300, &p).unwrap();
    let edges: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
    let mut num = [0.0; 8];
    let mut den = [0.0; 8];
    let mut cnt = [0usize; 8];
    for i in 0..300 {
        for j in i + 1..300 {
            let d = (sys.a[i] - sys.a[j]).abs();
            if let Some(b) = edges.windows(2).position(|e| d >= e[0] && d < e[1]) {
                let e = 0.5 * (sys.a[i] + sys.a[j]);
                num[b] += sys.vcoupling[(i, j)].powi(2);
                den[b] += p.mean_coupling_sq(e, d);
                cnt[b] += 1;
            }
        }
    }
    for b in 0..8 {
        if cnt[b] >= 100 {
            let ratio = num[b] / den[b];
            assert!((0.8..=1.2).contains(&ratio), "bin {b}: ratio {ratio} over {} pairs", cnt[b]);
        }
    }
}

#[test]
fn ensemble_is_deterministic_per_seed() {
    let p = EnsembleProfile::flat(-1.0, 1.0, 64, BandProfile::Box { amplitude: 1.0, half_width: 0.4 }, 9).unwrap();
    let a = build_banded_ensemble(64, &p).unwrap();
    let b = build_banded_ensemble(64, &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.content_hash(), b.content_hash());
    let q = EnsembleProfile { seed: 10, ..p };
    assert_ne!(build_banded_ensemble(64, &q).unwrap(), a);
}

#[test]
fn ensemble_energies_follow_the_density() {
    let p = EnsembleProfile::gaussian_dos(0.0, 1.0, 4.0, 400, BandProfile::Constant { amplitude: 0.0 }, 3).unwrap();
    let sys = build_banded_ensemble(400, &p).unwrap();
    let inside = sys.a.iter().filter(|x| x.abs() < 1.0).count() as f64 / 400.0;
    // erf(1/sqrt 2) = 0.6827
    assert!((inside - 0.6827).abs() < 0.01, "{inside}");
    assert!(sys.is_uncoupled());
}

#[test]
fn ising_entropy_is_a_concave_bell() {
    let (n, j, h, g) = (10usize, 1.0, 0.5, 1.05);
    let sys = build_ising_chain(n, j, h, g).unwrap();
    let spec = diagonalize(&sys).unwrap();
    let est = estimate_entropy(&spec.eigenvalues, 20.0 * spec.mean_spacing()).unwrap();
    let s = &est.s_of_lambda;
    let kmax = s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    // bell: mass concentrated mid-spectrum, entropy falling towards both edges
    assert!(kmax > 0 && kmax + 1 < s.len());
    assert!(s[0] < s[kmax] - 1.0 && s[s.len() - 1] < s[kmax] - 1.0);
    // a sum of many independent terms has a near-Gaussian density of width
    // sqrt(tr H^2 / dim)
    let dim = spec.dim() as f64;
    let width = ((n - 1) as f64 * j * j + n as f64 * (h * h + g * g)).sqrt();
    let s_peak = (dim / (width * (2.0 * PI).sqrt())).ln();
    assert!((s[kmax] / s_peak - 1.0).abs() < 0.1, "S max {} vs {s_peak}", s[kmax]);
    // concave on a coarse scale: second differences of a 3-shell smoothing
    let sm: Vec<f64> = s.windows(3).map(|w| (w[0] + w[1] + w[2]) / 3.0).collect();
    let bumps = sm.windows(3).filter(|w| w[0] + w[2] - 2.0 * w[1] > 0.3).count();
    assert!(bumps <= sm.len() / 5, "{bumps} convex kinks in {}", sm.len());
}

#[test]
fn system_json_round_trip() {
    let sys = common::random_system(12, 0.1, 4);
    let text = sys.to_json().unwrap();
    assert_eq!(CoupledSystem::from_json(&text).unwrap(), sys);
}
