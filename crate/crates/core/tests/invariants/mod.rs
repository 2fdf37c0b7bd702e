//! Randomized invariants shared by the property tests and the acceptance run.

use isolab::complexes::enumerate_k_simplices;
use isolab::geometry::{
    all_pairs, bounding_box, mc_region_volume_crn, miniball_radius, region_contains, torus_dist, Conn, Flavor,
    RegionSpec,
};
use isolab::isolation::{census, count_isolated_star, count_record, StarCap};
use isolab::pointprocess::{build_index_with_support, PointSet};
use proptest::prelude::*;
use proptest::test_runner::{TestError, TestRunner};

pub const CASES: u32 = 10_000;

pub type Outcome = Result<(), TestError<String>>;

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(ProptestConfig::with_cases(CASES));
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Abort(r) => TestError::Abort(r),
        TestError::Fail(r, v) => TestError::Fail(r, format!("{v:?}")),
    })
}

fn unit_coords(d: usize, count: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, d * count)
}

/// Points packed into a small patch so that faces are plentiful at small radii.
fn clustered(d: usize) -> impl Strategy<Value = PointSet> {
    (3usize..=24).prop_flat_map(move |n| {
        prop::collection::vec(0.0..0.12f64, n * d)
            .prop_map(move |c| PointSet::new(d, c.into_iter().map(|x| 0.44 + x).collect(), n as f64, 0).unwrap())
    })
}

fn dim() -> impl Strategy<Value = usize> {
    2usize..=3
}

fn rotation(d: usize, angles: &[f64]) -> Vec<Vec<f64>> {
    // product of plane rotations in each coordinate pair
    let mut m: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let mut a = angles.iter();
    for i in 0..d {
        for j in i + 1..d {
            let t = *a.next().unwrap();
            let (c, s) = (t.cos(), t.sin());
            for row in m.iter_mut() {
                let (x, y) = (row[i], row[j]);
                row[i] = c * x - s * y;
                row[j] = s * x + c * y;
            }
        }
    }
    m
}

pub fn torus_metric_axioms() -> Outcome {
    run((dim(), unit_coords(3, 3)), |(d, c)| {
        let c: Vec<f64> = c.into_iter().chain(std::iter::repeat(0.3)).take(3 * d).collect();
        let (x, y, z) = (&c[..d], &c[d..2 * d], &c[2 * d..]);
        let dxy = torus_dist(x, y).unwrap();
        prop_assert_eq!(torus_dist(x, x).unwrap(), 0.0);
        prop_assert_eq!(dxy, torus_dist(y, x).unwrap());
        prop_assert!(dxy <= torus_dist(x, z).unwrap() + torus_dist(z, y).unwrap() + 1e-12);
        prop_assert!(dxy <= (d as f64).sqrt() / 2.0 + 1e-15);
        Ok(())
    })
}

pub fn miniball_pair_identity() -> Outcome {
    run((dim(), prop::collection::vec(-5.0..5.0f64, 6)), |(d, c)| {
        let x = c[..d].to_vec();
        let y = c[3..3 + d].to_vec();
        let r = miniball_radius(&[x.clone(), y.clone()]).unwrap();
        let half = 0.5 * x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!((r - half).abs() <= 1e-15 * half.max(1.0));
        Ok(())
    })
}

pub fn miniball_rigid_motion() -> Outcome {
    run(
        (
            dim(),
            1usize..=5,
            prop::collection::vec(-1.0..1.0f64, 15),
            prop::collection::vec(0.0..std::f64::consts::TAU, 3),
            prop::collection::vec(-10.0..10.0f64, 3),
        ),
        |(d, count, c, angles, shift)| {
            let pts: Vec<Vec<f64>> = (0..count).map(|i| c[i * 3..i * 3 + d].to_vec()).collect();
            let rot = rotation(d, &angles);
            let moved: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| {
                    (0..d)
                        .map(|i| rot[i].iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + shift[i])
                        .collect()
                })
                .collect();
            let (a, b) = (miniball_radius(&pts).unwrap(), miniball_radius(&moved).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
            Ok(())
        },
    )
}

pub fn cech_region_inside_rips_region() -> Outcome {
    run(
        (
            dim(),
            1usize..=3,
            prop::collection::vec(-1.0..1.0f64, 12),
            prop::collection::vec(-3.0..3.0f64, 3),
            0.2..1.5f64,
        ),
        |(d, k, c, y, s_ratio)| {
            let centers = c[..(k + 1) * d].to_vec();
            let s = s_ratio;
            for conn in [Conn::Up, Conn::Down] {
                let cech = RegionSpec::from_flat(Flavor::Cech, conn, d, centers.clone(), 1.0, s).unwrap();
                let rips = RegionSpec::from_flat(Flavor::Rips, conn, d, centers.clone(), 1.0, s).unwrap();
                if region_contains(&cech, &y[..d]) {
                    prop_assert!(region_contains(&rips, &y[..d]));
                }
            }
            Ok(())
        },
    )
}

pub fn volume_scales_as_lambda_to_the_d() -> Outcome {
    run(
        (
            dim(),
            1usize..=2,
            prop::collection::vec(-0.9..0.9f64, 9),
            0.05..20.0f64,
            prop::collection::vec(0.0..1.0f64, 3000),
            0usize..4,
        ),
        |(d, k, c, lambda, unit, pq)| {
            let (p, q) = all_pairs()[pq];
            let region = RegionSpec::from_flat(p, q, d, c[..(k + 1) * d].to_vec(), 1.0, 1.0).unwrap();
            let samples = unit.len() / 3;
            let unit = &unit[..samples * d];
            let Ok(bx) = bounding_box(&region) else {
                // empty base region: nothing to scale
                return Ok(());
            };
            let (v, _) = mc_region_volume_crn(&region, unit).unwrap();
            let (w, _) = mc_region_volume_crn(&region.scaled(lambda).unwrap(), unit).unwrap();
            let scale = lambda.powi(d as i32);
            // identical frozen samples, so at most a boundary sample may flip under rounding
            let one_sample = scale * bx.volume() / samples as f64;
            prop_assert!(
                (w - scale * v).abs() <= one_sample * 1.001,
                "v={} w={} lambda={}",
                v,
                w,
                lambda
            );
            Ok(())
        },
    )
}

pub fn faces_monotone_in_r_and_cech_inside_rips() -> Outcome {
    run(
        (dim().prop_flat_map(clustered), 0.004..0.03f64, 0.0..0.02f64, 1usize..=2),
        |(ps, r1, dr, k)| {
            let r2 = r1 + dr;
            let idx = build_index_with_support(&ps, 2.0 * r2, 4.0 * r2).unwrap();
            let face_set = |r, f| {
                enumerate_k_simplices(&ps, &idx, r, k, f)
                    .unwrap()
                    .iter()
                    .map(<[usize]>::to_vec)
                    .collect::<std::collections::BTreeSet<_>>()
            };
            for f in Flavor::ALL {
                prop_assert!(face_set(r1, f).is_subset(&face_set(r2, f)));
            }
            prop_assert!(face_set(r1, Flavor::Cech).is_subset(&face_set(r1, Flavor::Rips)));
            Ok(())
        },
    )
}

pub fn isolated_counts_match_histogram() -> Outcome {
    run(
        (dim().prop_flat_map(clustered), 0.004..0.04f64, 1usize..=2, 0usize..4),
        |(ps, r, k, pq)| {
            let (p, q) = all_pairs()[pq];
            let (rec, star) = count_record(&ps, r, k, p, q, StarCap::default(), 0).unwrap();
            let h = rec.comp_hist.as_ref().unwrap();
            prop_assert_eq!(rec.j.unwrap(), h.get(&1).copied().unwrap_or(0));
            prop_assert!(star.j_star >= star.j);
            let idx = build_index_with_support(&ps, 2.0 * r, 4.0 * r).unwrap();
            let c = census(&ps, &idx, r, k, p, q).unwrap();
            prop_assert_eq!(c.isolated as u64, rec.j.unwrap());
            Ok(())
        },
    )
}

pub fn star_count_non_increasing() -> Outcome {
    run(
        (
            dim().prop_flat_map(clustered),
            0.004..0.02f64,
            prop::collection::vec(0.0..0.006f64, 4),
            1usize..=2,
            0usize..4,
        ),
        |(ps, r0, steps, k, pq)| {
            let (p, q) = all_pairs()[pq];
            let cap = StarCap::Absolute(0.05);
            let mut r = r0;
            let mut prev = usize::MAX;
            for s in steps {
                r += s;
                let idx = build_index_with_support(&ps, 2.0 * r, 4.0 * r).unwrap();
                let js = count_isolated_star(&ps, &idx, r, k, p, q, cap).unwrap().j_star;
                prop_assert!(js <= prev, "J*({}) = {} after {}", r, js, prev);
                prev = js;
            }
            Ok(())
        },
    )
}

/// Every invariant with its name.
#[allow(dead_code)]
pub fn all() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("torus_metric_axioms", torus_metric_axioms),
        ("miniball_pair_identity", miniball_pair_identity),
        ("miniball_rigid_motion", miniball_rigid_motion),
        ("cech_region_inside_rips_region", cech_region_inside_rips_region),
        ("volume_scales_as_lambda_to_the_d", volume_scales_as_lambda_to_the_d),
        (
            "faces_monotone_in_r_and_cech_inside_rips",
            faces_monotone_in_r_and_cech_inside_rips,
        ),
        ("isolated_counts_match_histogram", isolated_counts_match_histogram),
        ("star_count_non_increasing", star_count_non_increasing),
    ]
}
