use super::TrainConfig;

/// Training iterations for `step` (0-based) of a segment in `epoch`
/// (0-based). Steps at or beyond `bg` train once.
pub fn find_train_iters(step: usize, epoch: usize, config: &TrainConfig) -> usize {
    if step >= config.bg {
        return 1;
    }
    let part_len = config.bg / config.z;
    let part = (step / part_len).min(config.z - 1);
    let row = epoch.min(config.iters_schedule.len() - 1);
    config.iters_schedule[row][part]
}

/// Closed-form backward passes per segment-batch in `epoch`:
/// `Σ_{step<bg} iters(step, epoch) + (m − bg)`.
pub fn expected_backward_passes(m: usize, epoch: usize, config: &TrainConfig) -> usize {
    let row = &config.iters_schedule[epoch.min(config.iters_schedule.len() - 1)];
    let part_len = config.bg / config.z;
    row.iter().map(|it| it * part_len).sum::<usize>() + (m - config.bg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_schedule_lookups() {
        let c = TrainConfig::default();
        assert_eq!(find_train_iters(0, 0, &c), 2);
        assert_eq!(find_train_iters(119, 2, &c), 1);
        assert_eq!(find_train_iters(79, 1, &c), 2);
        assert_eq!(find_train_iters(80, 1, &c), 1);
        for epoch in 0..8 {
            assert_eq!(find_train_iters(120, epoch, &c), 1);
        }
        // later epochs reuse the last row
        assert_eq!(find_train_iters(50, 5, &c), 1);
        assert_eq!(find_train_iters(10, 5, &c), 2);
    }

    #[test]
    fn default_counts() {
        let c = TrainConfig::default();
        assert_eq!(expected_backward_passes(200, 0, &c), 320);
        assert_eq!(expected_backward_passes(200, 1, &c), 280);
        assert_eq!(expected_backward_passes(200, 2, &c), 240);
        assert_eq!(expected_backward_passes(200, 5, &c), 240);
    }

    proptest! {
        #[test]
        fn closed_form_matches_step_counter(
            z in 1usize..5,
            parts in 0usize..40,
            extra in 0usize..60,
            schedule in proptest::collection::vec(proptest::collection::vec(1usize..4, 4), 1..4),
            epoch in 0usize..6,
        ) {
            let bg = z * parts;
            let m = bg + extra;
            prop_assume!(m > 0);
            let c = TrainConfig {
                z,
                bg,
                iters_schedule: schedule.into_iter().map(|r| r[..z].to_vec()).collect(),
                ..TrainConfig::default()
            };
            let counted: usize = (0..m).map(|s| find_train_iters(s, epoch, &c)).sum();
            prop_assert_eq!(counted, expected_backward_passes(m, epoch, &c));
        }
    }
}
