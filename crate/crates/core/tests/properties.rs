mod common;

use common::{random_basis, random_e, random_matrix, random_vector};
use hybrid_rom::deim::{deim_select, DeimOperator};
use hybrid_rom::hybrid::{run_fom_with, run_hybrid_with, FomOptions, HybridConfig, StepFlag};
use hybrid_rom::io::{read_matrix_from, write_matrix_to, TraceFile, TraceRecord};
use hybrid_rom::models::{build_burgers, BurgersConfig};
use hybrid_rom::pod::{max_principal_angle, orthonormality_defect, pod_mos};
use hybrid_rom::sparse::CsrMatrix;
use hybrid_rom::window::SnapshotWindow;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn record(cols: (bool, bool, bool)) -> impl Strategy<Value = TraceRecord> {
    (0usize..100_000, finite(), any::<bool>(), finite(), finite(), finite(), finite(), finite()).prop_map(
        move |(k, t, rom, delta, y, a, b, c)| TraceRecord {
            k,
            t,
            flag: if rom { StepFlag::Rom } else { StepFlag::Fom },
            delta,
            y,
            y_ref: cols.0.then_some(a),
            true_err: cols.1.then_some(b),
            rho: cols.2.then_some(c),
        },
    )
}

fn trace_file() -> impl Strategy<Value = TraceFile> {
    (any::<bool>(), any::<bool>(), any::<bool>())
        .prop_flat_map(|cols| prop::collection::vec(record(cols), 0..40))
        .prop_map(|records| TraceFile { records })
}

fn bits(v: Option<f64>) -> Option<u64> {
    v.map(f64::to_bits)
}

proptest! {
    #[test]
    fn trace_csv_round_trip_is_bitwise(file in trace_file()) {
        let mut buf = Vec::new();
        file.write_to(&mut buf).unwrap();
        let back = TraceFile::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.records.len(), file.records.len());
        for (a, b) in file.records.iter().zip(&back.records) {
            prop_assert_eq!(a.k, b.k);
            prop_assert_eq!(a.flag, b.flag);
            for (x, y) in [(a.t, b.t), (a.delta, b.delta), (a.y, b.y)] {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            prop_assert_eq!(bits(a.y_ref), bits(b.y_ref));
            prop_assert_eq!(bits(a.true_err), bits(b.true_err));
            prop_assert_eq!(bits(a.rho), bits(b.rho));
        }
    }

    #[test]
    fn snapshot_round_trip_is_bitwise(
        (rows, cols, data) in (0usize..20, 0usize..20)
            .prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(any::<f64>(), r * c)))
    ) {
        let m = DMatrix::from_vec(rows, cols, data);
        let mut buf = Vec::new();
        write_matrix_to(&mut buf, &m).unwrap();
        prop_assert_eq!(buf.len(), 16 + 8 * rows * cols);
        prop_assert_eq!(&buf[..4], b"ROMS");
        let back = read_matrix_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_snapshot_is_rejected(cut in 0usize..47) {
        let m = DMatrix::from_element(2, 2, 1.5);
        let mut buf = Vec::new();
        write_matrix_to(&mut buf, &m).unwrap();
        buf.truncate(cut);
        prop_assert!(read_matrix_from(buf.as_slice()).is_err());
    }

    #[test]
    fn window_keeps_images_and_gram(seed in any::<u64>(), n in 3usize..30, width in 2usize..8, pushes in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e_dense = random_e(&mut rng, n);
        let a_dense = random_matrix(&mut rng, n, n);
        let (e, a) = (CsrMatrix::from_dense(&e_dense, 0.0), CsrMatrix::from_dense(&a_dense, 0.0));
        let mut w = SnapshotWindow::new(n, width).unwrap();
        let mut pushed: Vec<DVector<f64>> = Vec::new();
        for _ in 0..pushes {
            let x = random_vector(&mut rng, n);
            w.push(&x, &e.mul_vec(&x).unwrap(), &a.mul_vec(&x).unwrap()).unwrap();
            pushed.push(x);
        }
        prop_assert_eq!(w.count(), pushes.min(width));
        // chronological order, newest last
        let s = w.snapshots();
        let expect = &pushed[pushed.len() - w.count()..];
        for (j, x) in expect.iter().enumerate() {
            prop_assert_eq!(s.column(j).into_owned(), x.clone());
        }
        let scale = 1.0 + s.norm();
        prop_assert!((&w.e_snapshots() - &e_dense * &s).amax() <= 1e-13 * scale);
        prop_assert!((&w.a_snapshots() - &a_dense * &s).amax() <= 1e-13 * scale);
        let st = w.storage_states().into_owned();
        let g = w.gram().into_owned();
        prop_assert!((g - st.transpose() * &st).amax() <= 1e-13 * scale * scale);
    }

    #[test]
    fn deim_is_exact_on_its_span(seed in any::<u64>(), n in 4usize..40, ell_frac in 0.1f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ell = ((n as f64 * ell_frac) as usize).clamp(1, n);
        let u = random_basis(&mut rng, n, ell);
        let op = DeimOperator::from_basis(u.clone()).unwrap();
        let mut pts = op.points().to_vec();
        pts.sort_unstable();
        pts.dedup();
        prop_assert_eq!(pts.len(), ell);
        let coeffs = random_vector(&mut rng, ell);
        let f = &u * &coeffs;
        let approx = op.interpolate(&f).unwrap();
        prop_assert!((&approx - &f).amax() <= 1e-10 * (1.0 + f.amax()));
        // interpolation at the points holds for any f
        let g = random_vector(&mut rng, n);
        let gi = op.interpolate(&g).unwrap();
        for &p in op.points() {
            prop_assert!((gi[p] - g[p]).abs() <= 1e-9 * (1.0 + g.amax()));
        }
    }

    #[test]
    fn deim_select_reproduces_snapshots(seed in any::<u64>(), n in 6usize..30, rank in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_basis(&mut rng, n, rank) * random_matrix(&mut rng, rank, 3 * rank);
        let op = deim_select(f.as_view(), rank).unwrap();
        for c in f.column_iter() {
            let c = c.into_owned();
            prop_assert!((op.interpolate(&c).unwrap() - &c).amax() <= 1e-9 * (1.0 + c.amax()));
        }
    }

    #[test]
    fn pod_is_orthonormal_and_matches_svd(seed in any::<u64>(), n in 8usize..60, m in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = m.min(n);
        // separated singular values make the leading subspaces well defined
        let u = random_basis(&mut rng, n, m);
        let v = random_basis(&mut rng, m, m);
        let sigma = DMatrix::from_diagonal(&DVector::from_fn(m, |i, _| 0.5f64.powi(i as i32)));
        let s = &u * sigma * v.transpose();
        let basis = pod_mos(s.as_view(), 0.0, m).unwrap();
        prop_assert!(orthonormality_defect(basis.phi()) <= 1e-10);
        let r = basis.rank();
        prop_assert!(r >= 1 && r <= m);
        let svd = s.clone().svd(true, false);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let su = svd.u.unwrap();
        let lead = DMatrix::from_fn(n, r, |i, j| su[(i, order[j])]);
        prop_assert!(max_principal_angle(basis.phi(), &lead) <= 1e-7);
        for (j, &lam) in basis.eigenvalues().iter().take(r).enumerate() {
            let sv = svd.singular_values[order[j]];
            prop_assert!((lam - sv * sv).abs() <= 1e-10 * (1.0 + sv * sv));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn accepted_steps_respect_tol(nu_exp in -3.0f64..-1.0, w in 2usize..15, tol_exp in -7.0f64..-2.0, deim in any::<bool>()) {
        let prob = build_burgers(&BurgersConfig::new(5, 10f64.powf(nu_exp))).unwrap();
        let handle = prob.system.factorize(false).unwrap();
        let tol = 10f64.powf(tol_exp);
        let cfg = HybridConfig { use_deim: deim, ..HybridConfig::new(w, tol) };
        let tr = run_hybrid_with(&prob, &handle, &cfg).unwrap();
        prop_assert_eq!(tr.rows.len(), prob.n_t);
        // the first w steps fill the window
        prop_assert!(tr.rows.iter().take(w).all(|r| r.flag == StepFlag::Fom));
        for r in tr.rows.iter().filter(|r| r.flag == StepFlag::Rom) {
            prop_assert!(r.delta <= tol, "step {} delta {} tol {}", r.k, r.delta, tol);
        }
    }

    #[test]
    fn negative_tol_reproduces_fom(nu_exp in -3.0f64..-1.0, w in 2usize..15) {
        let prob = build_burgers(&BurgersConfig::new(5, 10f64.powf(nu_exp))).unwrap();
        let handle = prob.system.factorize(false).unwrap();
        let reference = run_fom_with(&prob, &handle, FomOptions::default()).unwrap();
        let tr = run_hybrid_with(&prob, &handle, &HybridConfig::new(w, -1.0)).unwrap();
        for (a, b) in tr.rows.iter().zip(&reference.rows) {
            prop_assert_eq!(a.flag, StepFlag::Fom);
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }
}
