use bdiv::io::{decode_field, encode_field, read_field, write_field};
use bdiv::norms::{lorentz_norm, lp_norm, morrey_norm, tv_norm, weak_lp_setnorm, TvVariant};
use bdiv::ops::{cumulative_primitive, discrete_divergence, forward_gradient};
use bdiv::{Grid, ScalarField, VectorField};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=3)
        .prop_flat_map(|d| {
            (
                proptest::collection::vec(2usize..7, d),
                proptest::collection::vec(any::<bool>(), d),
                proptest::collection::vec(0.2f64..3.0, d),
            )
        })
        .prop_map(|(n, per, len)| {
            let lo: Vec<f64> = len.iter().map(|l| -l / 2.0).collect();
            let hi: Vec<f64> = len.iter().map(|l| l / 2.0).collect();
            Grid::new(&n, &lo, &hi, &per).unwrap()
        })
}

fn field_on(grid: Grid) -> impl Strategy<Value = ScalarField> {
    let n = grid.len();
    proptest::collection::vec(-10.0f64..10.0, n).prop_map(move |v| ScalarField::new(grid.clone(), v).unwrap())
}

fn field_strategy() -> impl Strategy<Value = ScalarField> {
    grid_strategy().prop_flat_map(field_on)
}

fn field_pair() -> impl Strategy<Value = (ScalarField, VectorField)> {
    grid_strategy().prop_flat_map(|g| {
        let d = g.dim();
        (
            field_on(g.clone()),
            proptest::collection::vec(field_on(g), d).prop_map(|c| VectorField::new(c).unwrap()),
        )
    })
}

fn bounded_field() -> impl Strategy<Value = ScalarField> {
    grid_strategy()
        .prop_map(|g| {
            let d = g.dim();
            Grid::new(g.shape(), g.lo(), g.hi(), &vec![false; d]).unwrap()
        })
        .prop_flat_map(field_on)
}

fn scale(f: f64) -> f64 {
    f.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn divergence_is_minus_adjoint_of_gradient((g, v) in field_pair()) {
        let lhs = discrete_divergence(&v).inner(&g).unwrap();
        let rhs = -v.inner(&forward_gradient(&g)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale(lhs));
    }

    #[test]
    fn primitive_inverts_backward_difference(f in bounded_field(), axis in 0usize..3) {
        let axis = axis % f.grid().dim();
        let p = cumulative_primitive(&f, axis).unwrap();
        let v = VectorField::single(p, axis).unwrap();
        let back = discrete_divergence(&v);
        let err = back.sub(&f).unwrap().max_abs();
        prop_assert!(err <= 1e-12 * f.max_abs().max(1.0) * f.grid().shape()[axis] as f64);
    }

    #[test]
    fn io_roundtrip_is_bitwise(f in field_strategy()) {
        let bytes = encode_field(&f);
        let g = decode_field(&bytes).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(encode_field(&g), bytes);
    }

    #[test]
    fn norms_are_homogeneous(f in field_strategy(), c in -4.0f64..4.0) {
        let cf = f.scale(c).unwrap();
        for (a, b) in [
            (lp_norm(&cf, 1.0).unwrap(), lp_norm(&f, 1.0).unwrap()),
            (lp_norm(&cf, 3.0).unwrap(), lp_norm(&f, 3.0).unwrap()),
            (lorentz_norm(&cf, 2.0, 1.0).unwrap(), lorentz_norm(&f, 2.0, 1.0).unwrap()),
            (weak_lp_setnorm(&cf, 2.0).unwrap(), weak_lp_setnorm(&f, 2.0).unwrap()),
            (tv_norm(&cf, TvVariant::Isotropic), tv_norm(&f, TvVariant::Isotropic)),
        ] {
            prop_assert!((a - c.abs() * b).abs() <= 1e-10 * scale(a));
        }
    }

    #[test]
    fn norms_are_monotone(f in field_strategy(), shrink in 0.0f64..1.0) {
        // |g| <= |f| pointwise
        let g = f.map(|v| v * shrink).unwrap();
        prop_assert!(lp_norm(&g, 2.0).unwrap() <= lp_norm(&f, 2.0).unwrap() * (1.0 + 1e-12));
        prop_assert!(weak_lp_setnorm(&g, 3.0).unwrap() <= weak_lp_setnorm(&f, 3.0).unwrap() * (1.0 + 1e-12));
        prop_assert!(lorentz_norm(&g, 2.0, 1.0).unwrap() <= lorentz_norm(&f, 2.0, 1.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn weak_below_strong(f in field_strategy(), p in 1.1f64..4.0) {
        prop_assert!(weak_lp_setnorm(&f, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn lorentz_diagonal_is_lp(f in field_strategy(), p in 1.0f64..5.0) {
        let a = lorentz_norm(&f, p, p).unwrap();
        let b = lp_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * scale(b));
    }

    #[test]
    fn coarea_on_integer_fields(g in grid_strategy(), seed in proptest::collection::vec(-3i32..=3, 1..400)) {
        let v: Vec<f64> = (0..g.len()).map(|i| seed[i % seed.len()] as f64).collect();
        let f = ScalarField::new(g.clone(), v).unwrap();
        let total = tv_norm(&f, TvVariant::Anisotropic);
        let mut levels = 0.0;
        for t in -3..3 {
            let chi = f.map(|x| if x > t as f64 + 0.5 { 1.0 } else { 0.0 }).unwrap();
            levels += tv_norm(&chi, TvVariant::Anisotropic);
        }
        prop_assert!((total - levels).abs() <= 1e-10 * scale(total));
    }
}

#[test]
fn io_files_roundtrip() {
    let g = Grid::new(&[3, 4], &[0.0, -1.0], &[1.0, 1.0], &[true, false]).unwrap();
    let f = ScalarField::new(g, (0..12).map(|i| i as f64 * 0.25 - 1.0).collect()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bdiv");
    write_field(&f, &path).unwrap();
    assert_eq!(read_field(&path).unwrap(), f);
    assert!(read_field(dir.path().join("missing.bdiv")).is_err());
}

fn brute_weak(v: &[f64], cv: f64, p: f64) -> f64 {
    let n = v.len();
    let mut best = 0.0f64;
    for set in 1u32..(1 << n) {
        let (mut s, mut k) = (0.0, 0);
        for (i, x) in v.iter().enumerate() {
            if set >> i & 1 == 1 {
                s += x.abs();
                k += 1;
            }
        }
        best = best.max(s * cv / (k as f64 * cv).powf(1.0 - 1.0 / p));
    }
    best
}

#[test]
fn weak_setnorm_matches_subset_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let g = Grid::cube(2, 4, 0.0, 1.0, false).unwrap();
    for _ in 0..20 {
        let v: Vec<f64> = (0..16).map(|_| rng.random_range(-5.0..5.0)).collect();
        let f = ScalarField::new(g.clone(), v.clone()).unwrap();
        let a = weak_lp_setnorm(&f, 2.0).unwrap();
        let b = brute_weak(&v, g.cell_volume(), 2.0);
        assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
    }
}

fn brute_morrey(f: &ScalarField) -> f64 {
    let g = f.grid();
    let d = g.dim();
    let h = g.min_spacing();
    let pos: Vec<Vec<usize>> = (0..g.len()).map(|i| g.unravel(i)).collect();
    let dist = |a: &[usize], b: &[usize]| -> f64 {
        (0..d)
            .map(|k| {
                let n = g.shape()[k] as i64;
                let mut t = (a[k] as i64 - b[k] as i64).abs();
                if g.is_periodic(k) {
                    t = t.min(n - t);
                }
                let x = t as f64 * g.spacing(k);
                x * x
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut best = 0.0f64;
    for c in &pos {
        for j in 1..=40 {
            let r = j as f64 * h;
            let s: f64 = pos
                .iter()
                .zip(f.values())
                .filter(|(q, _)| dist(c, q) <= r * (1.0 + 1e-9))
                .map(|(_, v)| v.abs())
                .sum();
            best = best.max(s * g.cell_volume() / r.powi(d as i32 - 1));
        }
    }
    best
}

#[test]
fn morrey_matches_ball_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for (shape, per) in [(vec![7, 5], vec![true, false]), (vec![6, 6], vec![true, true]), (vec![4, 3, 5], vec![false, true, false])] {
        let d = shape.len();
        let g = Grid::new(&shape, &vec![0.0; d], &vec![1.0; d], &per).unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|_| if rng.random_bool(0.3) { rng.random_range(-3.0..3.0) } else { 0.0 })
            .collect();
        let f = ScalarField::new(g, v).unwrap();
        let a = morrey_norm(&f, d).unwrap();
        let b = brute_morrey(&f);
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn tv_of_rectangle_counts_faces() {
    // 3x2 block inside a bounded 8x8 unit-spacing grid: perimeter 10
    let g = Grid::new(&[8, 8], &[0.0, 0.0], &[8.0, 8.0], &[false, false]).unwrap();
    let f = bdiv::sample_function(&g, |x| if (2.0..5.0).contains(&x[0]) && (3.0..5.0).contains(&x[1]) { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(tv_norm(&f, TvVariant::Anisotropic), 10.0);
    // the same block touching the lower wall loses no faces, the upper wall drops one side
    let edge = bdiv::sample_function(&g, |x| if x[0] > 5.0 && (3.0..5.0).contains(&x[1]) { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(tv_norm(&edge, TvVariant::Anisotropic), 8.0);
}
