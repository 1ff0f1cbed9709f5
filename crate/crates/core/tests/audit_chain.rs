#[path = "support/audit.rs"]
mod audit;
#[path = "support/oracle.rs"]
mod oracle;

#[test]
fn delete_then_restore_changes_nothing_visible() {
    for seed in 0..20 {
        let problems = audit::delete_restore(seed);
        assert!(problems.is_empty(), "seed {seed}: {problems:#?}");
    }
}

#[test]
fn every_flipped_byte_is_located() {
    let (trials, problems) = audit::flip_fuzz(200, 3, 11);
    assert_eq!(trials, 600);
    assert!(problems.is_empty(), "{problems:#?}");
}
