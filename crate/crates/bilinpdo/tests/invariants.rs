use bilinpdo::bilinear::apply;
use bilinpdo::partitions::{make_appendix_split, PartitionFamily};
use bilinpdo::sharpness::{family_s0, s0_sweep, S0Params};
use bilinpdo::spaces::lp_norm;
use bilinpdo::symbols::Symbol;
use bilinpdo::{Field, Field32, GridSpec, C64};
use num_complex::Complex;
use proptest::prelude::*;

fn field(grid: GridSpec, coef: &[(f64, f64)]) -> Field<f64> {
    Field::from_fn(grid, |x| {
        coef.iter()
            .enumerate()
            .map(|(k, &(a, b))| C64::new(a, b) * C64::from_polar(1.0, x[0] * k as f64 * 0.37) * (-(x[0] * x[0]) / (8.0 + k as f64)).exp())
            .sum()
    })
}

fn coefs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_sums_to_one_below_top_scale(k in 1usize..20, frac in 0.0..1.0f64, dim in 1usize..=2) {
        let lp = PartitionFamily::make_lp(dim, k, 1.0).unwrap();
        let r = frac * 2f64.powi(k as i32);
        prop_assert!((lp.partial_sum(k, r) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pieces_are_in_unit_interval(k in 0usize..30, r in 0.0..1e9f64) {
        let lp = PartitionFamily::make_lp(1, 30, 1.0).unwrap();
        let v = lp.piece(k, r);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn split_reassembles_each_piece(j in 1i32..12, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let fam = PartitionFamily::make_lp(2, 40, 1.0).unwrap();
        let split = make_appendix_split(&fam).unwrap();
        let top = 2f64.powi(j + 2);
        let (x, y) = (a * top, b * top);
        prop_assert!((split.reassemble(j, x, y) - fam.piece(j as usize, x.hypot(y))).abs() <= 1e-12);
    }

    #[test]
    fn dft_round_trip(c in coefs(), log_n in 5u32..10) {
        let g = GridSpec::new(1, 40.0, 1 << log_n).unwrap();
        let f = field(g, &c);
        let back = f.dft().unwrap().idft().unwrap();
        let err = f.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn dft_round_trip_single_precision(c in coefs()) {
        let g = GridSpec::new(1, 40.0, 256).unwrap();
        let f64f = field(g, &c);
        let f: Field32 = Field::from_fn(g, |x| {
            let i = ((x[0] + 20.0) / g.spacing()).round() as usize % 256;
            let z = f64f.samples()[i];
            Complex::new(z.re as f32, z.im as f32)
        });
        let back = f.dft().unwrap().idft().unwrap();
        let err = f.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).norm()).fold(0.0f32, f32::max);
        prop_assert!(err <= 1e-5 * (1.0 + f.max_abs()));
    }

    #[test]
    fn lp_norm_is_homogeneous(c in coefs(), s in 0.1..10.0f64, phase in 0.0..6.3f64, p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY])) {
        let g = GridSpec::new(1, 40.0, 256).unwrap();
        let f = field(g, &c);
        let a = lp_norm(&f, p).unwrap().value;
        let b = lp_norm(&f.scale(C64::from_polar(s, phase)), p).unwrap().value;
        prop_assert!((b - s * a).abs() <= 1e-12 * (1.0 + s * a));
    }

    #[test]
    fn unit_symbol_is_pointwise_product(c1 in coefs(), c2 in coefs()) {
        let g = GridSpec::new(1, 40.0, 256).unwrap();
        let (f, h) = (field(g, &c1), field(g, &c2));
        let t = apply(&Symbol::one(1), &f, &h).unwrap();
        let want = f.mul(&h).unwrap();
        let err = t.samples().iter().zip(want.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-9 * (1.0 + want.max_abs()));
    }

    #[test]
    fn operator_is_bilinear(c1 in coefs(), c2 in coefs(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let g = GridSpec::new(1, 40.0, 128).unwrap();
        let (f, h) = (field(g, &c1), field(g, &c2));
        let sigma = Symbol::tensor(1, None, |a| C64::new((-a[0] * a[0] / 4.0).exp(), 0.0), |b| C64::new(1.0 / (1.0 + b[0] * b[0]), 0.0));
        let z = C64::new(re, im);
        let lhs = apply(&sigma, &f.scale(z), &h).unwrap();
        let rhs = apply(&sigma, &f, &h).unwrap().scale(z);
        let err = lhs.samples().iter().zip(rhs.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10 * (1.0 + rhs.max_abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn s0_double_sum_grows_as_t_shrinks(k in 2i32..8, s0 in 0.5..3.0f64) {
        let pr = S0Params { a1: 0.5, a2: 0.5, b1: 0.6, b2: 0.6, m: 0.0, s0, r: 1.0 };
        let coarse = family_s0(&pr, 2f64.powi(-k)).unwrap();
        let fine = family_s0(&pr, 2f64.powi(-k - 1)).unwrap();
        prop_assert!(fine.double_sum > coarse.double_sum);
        prop_assert!(fine.rel_err() <= 1e-6);
    }

    #[test]
    fn sweeps_do_not_depend_on_input_order(seed in any::<u64>()) {
        let pr = S0Params { a1: 0.5, a2: 0.5, b1: 0.6, b2: 0.6, m: 0.0, s0: 2.0, r: 1.0 };
        let mut ts: Vec<f64> = (2..7).map(|k| 2f64.powi(-k)).collect();
        let (a, _) = s0_sweep(&pr, &ts).unwrap();
        let n = ts.len();
        ts.rotate_left(seed as usize % n);
        ts.reverse();
        let (b, _) = s0_sweep(&pr, &ts).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a.fitted_slope, b.fitted_slope);
    }
}
