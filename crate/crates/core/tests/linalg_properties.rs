use gravschwarz::linalg::{
    pcg, pcg_with_guess, read_matrix_market, spmv, write_matrix_market, CsrMatrix, PcgConfig,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn triplets(max_n: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1..=max_n, 1..=max_n).prop_flat_map(|(n, m)| {
        let entry = (0..n, 0..m, -10.0f64..10.0);
        (Just(n), Just(m), prop::collection::vec(entry, 0..=(n * m).min(400)))
    })
}

fn spd_system(n: usize, seed: &[f64]) -> (DMatrix<f64>, CsrMatrix) {
    let b = DMatrix::from_fn(n, n, |i, j| seed[(i * 31 + j * 17) % seed.len()]);
    let a = &b * b.transpose() + DMatrix::identity(n, n);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            entries.push((i, j, a[(i, j)]));
        }
    }
    let csr = CsrMatrix::from_triplets(n, n, &entries).unwrap();
    (a, csr)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spmv_matches_dense_product((n, m, t) in triplets(64), xs in prop::collection::vec(-1.0f64..1.0, 64)) {
        let a = CsrMatrix::from_triplets(n, m, &t).unwrap();
        let mut dense = DMatrix::<f64>::zeros(n, m);
        for &(i, j, v) in &t {
            dense[(i, j)] += v;
        }
        let x = &xs[..m];
        let y = spmv(&a, x).unwrap();
        let oracle = &dense * DVector::from_column_slice(x);
        let scale = oracle.amax().max(1.0);
        for (a, b) in y.iter().zip(oracle.iter()) {
            prop_assert!((a - b).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn matrix_market_round_trip((n, m, t) in triplets(20)) {
        let a = CsrMatrix::from_triplets(n, m, &t).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        prop_assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pcg_energy_error_is_nonincreasing(
        n in 2usize..120,
        seed in prop::collection::vec(-1.0f64..1.0, 37),
        xs in prop::collection::vec(-1.0f64..1.0, 120),
    ) {
        let (dense, a) = spd_system(n, &seed);
        let x_star = DVector::from_column_slice(&xs[..n]);
        let b = &dense * &x_star;
        let mut last = f64::INFINITY;
        for k in 1..=n.min(40) {
            let cfg = PcgConfig { tolerance: 1e-300, max_iterations: k };
            let (x, stats) = pcg(&a, b.as_slice(), &cfg).unwrap();
            if stats.iterations < k {
                break;
            }
            let e = DVector::from_vec(x) - &x_star;
            let energy = (e.transpose() * &dense * &e)[(0, 0)].max(0.0).sqrt();
            prop_assert!(energy <= last * (1.0 + 1e-9) + 1e-12);
            last = energy;
        }
    }
}

#[test]
fn warm_start_from_solution_takes_no_iterations() {
    let seed: Vec<f64> = (0..37).map(|i| ((i * 7) % 11) as f64 / 11.0 - 0.5).collect();
    let (dense, a) = spd_system(30, &seed);
    let x_star = DVector::from_fn(30, |i, _| (i as f64).sin());
    let b = &dense * &x_star;
    let (x, _) = pcg(&a, b.as_slice(), &PcgConfig::default()).unwrap();
    let (y, stats) = pcg_with_guess(&a, b.as_slice(), Some(&x), &PcgConfig::default()).unwrap();
    assert!(stats.iterations <= 1);
    assert!((DVector::from_vec(y) - x_star).amax() < 1e-8);
}
