mod common;

use common::measure::reply_recovery;

#[test]
fn reply_edges_are_recovered() {
    let (hit, total) = reply_recovery(20, 11);
    let rate = hit as f64 / total as f64;
    println!("recovered {hit}/{total} = {rate:.4}");
    assert!(rate >= 0.98);
}

#[test]
fn recovery_holds_across_seeds() {
    for seed in [1, 2, 3] {
        let (hit, total) = reply_recovery(5, seed);
        assert!(
            hit as f64 >= 0.98 * total as f64,
            "seed {seed}: {hit}/{total}"
        );
    }
}
