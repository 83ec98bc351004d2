use polykernel::dpp::{empirical_intensity, predicted_mass, sample_batch, sample_configuration, sampling_radius};
use polykernel::laguerre::laguerre_assoc1;
use polykernel::quadrature::gauss_legendre_on;
use polykernel::*;

fn ginibre(q: usize, n: usize, m: f64) -> (KernelEvaluator, RadialEquilibrium) {
    let w = WeightModel::ginibre();
    let eq = RadialEquilibrium::new(&w).unwrap();
    (build_space(&w, SpaceSpec::new(q, n, m).unwrap()).unwrap(), eq)
}

#[test]
fn single_point_second_moment() {
    let (k, eq) = ginibre(1, 1, 1.0);
    let samples = sample_batch(&k, &eq, 11, 10_000).unwrap();
    let x: Vec<f64> = samples.iter().map(|s| s.points[0].norm_sqr()).collect();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn counts_and_support() {
    let (k, eq) = ginibre(2, 20, 20.0);
    let samples = sample_batch(&k, &eq, 3, 200).unwrap();
    let rs = sampling_radius(1.0, 20.0);
    for s in &samples {
        assert_eq!(s.points.len(), 40);
        assert!(s.points.iter().all(|z| z.norm() <= rs));
        assert_eq!(s.envelope_violations, 0);
        for i in 0..s.points.len() {
            for j in 0..i {
                assert!(s.points[i] != s.points[j]);
            }
        }
    }
    let edges: Vec<f64> = (0..=8).map(|i| 1.3 * i as f64 / 8.0).collect();
    let report = empirical_intensity(&k, &samples, &edges).unwrap();
    let inside: f64 = report.bins.iter().map(|b| b.mean_count).sum();
    assert!((inside + report.exterior_mean - 40.0).abs() < 1e-12);
    assert!(report.max_abs_standardized < 4.0);

    // Nothing beyond twice the droplet radius.
    let far = predicted_mass(&k, 2.0, rs);
    assert!(far < 1e-4 * 40.0, "{far}");
    let empty = samples.iter().filter(|s| s.points.iter().all(|z| z.norm() < 2.0)).count();
    assert!(empty as f64 >= 0.99 * samples.len() as f64);
}

#[test]
fn spec_mismatch_is_rejected() {
    let (k, eq) = ginibre(2, 20, 20.0);
    let (k2, _) = ginibre(1, 20, 20.0);
    let samples = sample_batch(&k, &eq, 3, 100).unwrap();
    assert!(matches!(empirical_intensity(&k2, &samples, &[0.0, 1.0]), Err(Error::Config(_))));
    assert!(empirical_intensity(&k, &samples[..50], &[0.0, 1.0]).is_err());
}

#[test]
fn deterministic_given_seed() {
    let (k, eq) = ginibre(2, 10, 10.0);
    let a = sample_configuration(&k, &eq, 42).unwrap();
    let b = sample_configuration(&k, &eq, 42).unwrap();
    assert_eq!(a.points, b.points);
    let batch = sample_batch(&k, &eq, 42, 4).unwrap();
    assert_eq!(batch[0].points, a.points);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = single.install(|| sample_batch(&k, &eq, 42, 4).unwrap());
    for (x, y) in batch.iter().zip(&serial) {
        assert_eq!(x.points, y.points);
    }
    let other = sample_configuration(&k, &eq, 43).unwrap();
    assert_ne!(other.points, a.points);
}

#[test]
fn exchangeable_joint_density() {
    let (k, eq) = ginibre(2, 4, 4.0);
    for s in sample_batch(&k, &eq, 5, 5).unwrap() {
        let forward = k.joint_density(&s.points).unwrap();
        let mut rev = s.points.clone();
        rev.reverse();
        let backward = k.joint_density(&rev).unwrap();
        assert!(forward > 0.0);
        assert!((forward - backward).abs() <= 1e-10 * forward, "{forward} {backward}");
    }
}

#[test]
fn short_range_repulsion() {
    let m = 20.0f64;
    let (k, eq) = ginibre(1, 20, m);
    let samples = sample_batch(&k, &eq, 9, 1000).unwrap();
    let s = m.sqrt();
    let (mut near, mut ring) = (0.0, 0.0);
    for c in &samples {
        for (i, z) in c.points.iter().enumerate() {
            if z.norm() > 0.5 {
                continue;
            }
            for (j, w) in c.points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let xi = (w - z).norm() * s;
                if xi < 0.2 {
                    near += 1.0;
                } else if (2.8..3.2).contains(&xi) {
                    ring += 1.0;
                }
            }
        }
    }
    let g_near = near / (0.2f64 * 0.2);
    let g_ring = ring / (3.2f64 * 3.2 - 2.8 * 2.8);
    assert!(g_ring > 0.0);
    assert!(g_near < 0.2 * g_ring, "near {g_near} ring {g_ring}");
}

fn parabola_vertex(x: &[f64], y: &[f64]) -> f64 {
    let s = |p: i32| x.iter().map(|v| v.powi(p)).sum::<f64>();
    let t = |p: i32| x.iter().zip(y).map(|(v, w)| v.powi(p) * w).sum::<f64>();
    let a = [[x.len() as f64, s(1), s(2)], [s(1), s(2), s(3)], [s(2), s(3), s(4)]];
    let r = [t(0), t(1), t(2)];
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let col = |c: usize| {
        let mut b = a;
        for i in 0..3 {
            b[i][c] = r[i];
        }
        det(b)
    };
    -col(1) / (2.0 * col(2))
}

/// Pair profile `1 − ρ₂/(ρ₁ρ₁)` around bulk points in blow-up units, with the
/// expected neighbour count taken from the exact one-point intensity.
/// Its zeros sit at the zeros of `L¹_{q−1}(ξ²)`.
#[test]
fn ring_structure_q3() {
    let m = 30.0f64;
    let (k, eq) = ginibre(3, 30, m);
    let samples = sample_batch(&k, &eq, 7, 4000).unwrap();
    let (nb, dx, r_ref, nz) = (30usize, 0.1, 0.45, 46usize);
    let (us, uw) = gauss_legendre_on(4, 0.0, 1.0);
    let n_phi = 96;
    let shell = |z: f64, b: usize| {
        let (a, c) = (b as f64 * dx / m.sqrt(), (b + 1) as f64 * dx / m.sqrt());
        let mut acc = 0.0;
        for (u, wu) in us.iter().zip(&uw) {
            let r = a + (c - a) * u;
            for j in 0..n_phi {
                let p = Complex64::new(z, 0.0) + Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / n_phi as f64);
                acc += wu * (c - a) * 2.0 * r / n_phi as f64 * k.one_point_intensity(p);
            }
        }
        acc
    };
    let table: Vec<Vec<f64>> =
        (0..nz).map(|i| (0..nb).map(|b| shell(r_ref * i as f64 / (nz - 1) as f64, b)).collect()).collect();
    let (mut observed, mut expected) = (vec![0.0; nb], vec![0.0; nb]);
    for s in &samples {
        for (i, z) in s.points.iter().enumerate() {
            if z.norm() > r_ref {
                continue;
            }
            let f = z.norm() / r_ref * (nz - 1) as f64;
            let i0 = (f as usize).min(nz - 2);
            let fr = f - i0 as f64;
            for b in 0..nb {
                expected[b] += table[i0][b] * (1.0 - fr) + table[i0 + 1][b] * fr;
            }
            for (j, w) in s.points.iter().enumerate() {
                let xi = (w - z).norm() * m.sqrt();
                if i != j && xi < nb as f64 * dx {
                    observed[(xi / dx) as usize] += 1.0;
                }
            }
        }
    }
    let xs: Vec<f64> = (0..nb).map(|b| (b as f64 + 0.5) * dx).collect();
    let profile: Vec<f64> = (0..nb).map(|b| 1.0 - observed[b] / expected[b]).collect();
    for (x0, lo, hi) in [(1.126, 0.75, 1.55), (2.175, 1.75, 2.65)] {
        let (x, y): (Vec<f64>, Vec<f64>) =
            xs.iter().zip(&profile).filter(|(x, _)| **x > lo && **x < hi).map(|(a, b)| (*a, *b)).unzip();
        let vertex = parabola_vertex(&x, &y);
        assert!((vertex - x0).abs() <= 0.25, "minimum at {vertex}, expected {x0}");
        let l = laguerre_assoc1(2, x0 * x0).unwrap();
        assert!(l.abs() < 1e-2);
    }
}
