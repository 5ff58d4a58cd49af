//! Ball sizes against closed forms derived by direct counting.

use amenlab_core::group::{Group, GroupDescriptor};

fn groups() -> Vec<Group> {
    [
        GroupDescriptor::integers(),
        GroupDescriptor::free_abelian(2),
        GroupDescriptor::free_abelian(3),
        GroupDescriptor::free(&["a", "b"]),
        GroupDescriptor::free(&["a", "b", "c"]),
        GroupDescriptor::cyclic(5),
        GroupDescriptor::cyclic(12),
    ]
    .into_iter()
    .map(|d| Group::new(d).unwrap())
    .collect()
}

#[test]
fn free_group_balls_match_reduced_word_count() {
    let group = Group::new(GroupDescriptor::free(&["a", "b"])).unwrap();
    for n in 0..=8u32 {
        // 1 + Σ_{k=1}^{n} 4·3^{k−1}: four first letters, three choices after.
        let expected: u64 = 1 + (1..=n).map(|k| 4 * 3u64.pow(k - 1)).sum::<u64>();
        assert_eq!(expected, 2 * 3u64.pow(n) - 1);
        assert_eq!(group.ball(n as usize, 1 << 20).unwrap().len() as u64, expected, "n = {n}");
    }
}

#[test]
fn lattice_balls_match_point_counts() {
    let group = Group::new(GroupDescriptor::free_abelian(2)).unwrap();
    for n in 0..=8i64 {
        let count = (-n..=n).flat_map(|x| (-n..=n).map(move |y| (x, y))).filter(|(x, y)| x.abs() + y.abs() <= n).count();
        assert_eq!(group.ball(n as usize, 1 << 20).unwrap().len(), count);
    }
}

#[test]
fn balls_obey_the_exponential_bound() {
    for group in groups() {
        let mut previous = 0;
        for n in 0..=8u32 {
            let size = group.ball(n as usize, 1 << 20).unwrap().len();
            assert!(size as u128 <= group.ball_size_bound(n), "{:?} n = {n}", group.descriptor());
            assert!(size >= previous);
            previous = size;
        }
    }
}

#[test]
fn cyclic_ball_saturates_at_half_the_order() {
    let group = Group::new(GroupDescriptor::cyclic(12)).unwrap();
    let sizes: Vec<usize> = (0..=8).map(|n| group.ball(n, 100).unwrap().len()).collect();
    assert_eq!(sizes, vec![1, 3, 5, 7, 9, 11, 12, 12, 12]);
}
