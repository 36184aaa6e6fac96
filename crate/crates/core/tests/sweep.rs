use purify::sampler::{fidelity_grid, sweep, SweepConfig};

fn cfg(names: &[&str], grid: Vec<f64>, samples: usize, rounds: usize, seed: u64) -> SweepConfig {
    SweepConfig::from_names(names, grid, samples, rounds, seed).unwrap()
}

#[test]
fn near_pure_oxford() {
    let rows = sweep(&cfg(&["oxford"], vec![0.999], 100, 10, 3)).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!((row.r, row.n, row.seed), (10, 100, 3));
    assert!(row.mean_purity > 0.999, "{}", row.mean_purity);
    let want = 2f64.powi(-10);
    assert!((row.mean_yield / want - 1.0).abs() < 0.05, "{}", row.mean_yield);
}

#[test]
fn row_layout() {
    let grid = fidelity_grid(0.51, 0.99, 0.01).unwrap();
    let rows = sweep(&cfg(&["tm1", "oxford"], grid.clone(), 4, 5, 7)).unwrap();
    assert_eq!(rows.len(), 2 * grid.len());
    assert!(rows[..49].iter().all(|r| r.protocol == "tm1"));
    assert!(rows[49..].iter().all(|r| r.protocol == "oxford"));
    assert!(rows.iter().all(|r| r.r == 5));
    for (row, a0) in rows[..49].iter().zip(&grid) {
        assert_eq!(row.a0, *a0);
    }

    let mut all = cfg(&["tm2"], vec![0.6, 0.8], 4, 3, 7);
    all.all_rounds = true;
    let rows = sweep(&all).unwrap();
    let rs: Vec<_> = rows.iter().map(|r| (r.a0, r.r)).collect();
    assert_eq!(rs, [(0.6, 1), (0.6, 2), (0.6, 3), (0.8, 1), (0.8, 2), (0.8, 3)]);
}

#[test]
fn means_are_within_bounds() {
    let rows = sweep(&cfg(&["ibm", "oxford", "tm1", "tm2", "xh", "qpa"], vec![0.55, 0.75, 0.95], 200, 6, 1)).unwrap();
    for row in rows {
        let r = row.r as i32;
        assert!(row.mean_yield >= 4f64.powi(-r) && row.mean_yield <= 2f64.powi(-r), "{row:?}");
        assert!(row.mean_improved_yield >= 0.0 && row.mean_improved_yield <= row.mean_yield);
        assert!((0.0..=2.0).contains(&row.mean_entropy));
        assert!((0.0..=1.0).contains(&row.mean_purity));
    }
}

#[test]
fn partitioning_does_not_change_results() {
    let c = cfg(&["tm1", "ibm"], vec![0.52, 0.7, 0.9], 1000, 5, 42);
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(|| sweep(&c)).unwrap();
    let many = pool(7).install(|| sweep(&c)).unwrap();
    assert_eq!(one, many);
}

#[test]
fn protocols_share_inputs() {
    // Rounds 1 and 2 of tm1 and xh are the same maps on the same states.
    let rows = sweep(&cfg(&["tm1", "xh"], vec![0.6, 0.85], 300, 2, 9)).unwrap();
    assert_eq!(rows[0].mean_yield, rows[2].mean_yield);
    assert_eq!(rows[1].mean_purity, rows[3].mean_purity);
}

#[test]
fn seeds_differ() {
    let a = sweep(&cfg(&["oxford"], vec![0.7], 50, 3, 1)).unwrap();
    let b = sweep(&cfg(&["oxford"], vec![0.7], 50, 3, 2)).unwrap();
    assert_ne!(a[0].mean_yield, b[0].mean_yield);
}
