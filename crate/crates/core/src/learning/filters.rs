//! Two-round redundancy filtering.
//!
//! Round one keeps only directly received values whose index is unique in
//! the inbox. Round two pools the relayed sets (plus the agent's own first
//! round result) and validates a value for index `k` once it has been seen
//! at least `3F + 1` times.

use crate::comms::ValueTuple;

/// Per-agent filter bookkeeping for one step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterState {
    /// Values accepted in round one.
    pub accepted: Vec<ValueTuple>,
    /// Pooled relay sets.
    pub pooled: Vec<ValueTuple>,
    /// Validated values, tagged with the index they were validated for.
    pub validated: Vec<ValueTuple>,
}

impl FilterState {
    /// The values pooled for index `k`.
    pub fn values_for(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.pooled.iter().filter(move |v| v.idx == k).map(|v| v.q)
    }

    pub fn validated_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.validated.iter().map(|v| v.q)
    }
}

fn index_counts(values: &[ValueTuple]) -> Vec<usize> {
    let len = values.iter().map(|v| v.idx + 1).max().unwrap_or(0);
    let mut counts = vec![0usize; len];
    for v in values {
        counts[v.idx] += 1;
    }
    counts
}

/// Drops tuples carrying `self_id` and every tuple whose index occurs more
/// than once in `received`.
pub fn first_filter(received: &[ValueTuple], self_id: usize) -> Vec<ValueTuple> {
    let counts = index_counts(received);
    received
        .iter()
        .filter(|v| v.idx != self_id && counts[v.idx] == 1)
        .copied()
        .collect()
}

/// Pools `own` with every relay set whose indices are unique. A set with a
/// repeated index cannot come from an honest sender and is discarded whole.
pub fn accept_relays<'a>(relays: impl IntoIterator<Item = &'a [ValueTuple]>, own: &[ValueTuple]) -> Vec<ValueTuple> {
    let mut pooled = own.to_vec();
    for set in relays {
        if index_counts(set).iter().all(|&c| c <= 1) {
            pooled.extend_from_slice(set);
        }
    }
    pooled
}

/// For each index other than `self_id`, every distinct value seen at least
/// `3F + 1` times in `pooled`. Output is ordered by index, then by first
/// appearance.
pub fn second_filter(pooled: &[ValueTuple], f: usize, self_id: usize) -> Vec<ValueTuple> {
    let threshold = 3 * f + 1;
    let len = pooled.iter().map(|v| v.idx + 1).max().unwrap_or(0);
    let mut buckets: Vec<Vec<(f64, usize)>> = vec![Vec::new(); len];
    for v in pooled {
        let bucket = &mut buckets[v.idx];
        match bucket.iter_mut().find(|(q, _)| *q == v.q) {
            Some((_, c)) => *c += 1,
            None => bucket.push((v.q, 1)),
        }
    }
    let mut validated = Vec::new();
    for (k, bucket) in buckets.into_iter().enumerate() {
        if k == self_id {
            continue;
        }
        validated.extend(
            bucket
                .into_iter()
                .filter(|&(_, c)| c >= threshold)
                .map(|(q, _)| ValueTuple::new(q, k)),
        );
    }
    validated
}

/// Sorts `values` and removes the `f` largest and `f` smallest. Returns
/// `None` when fewer than `2f + 1` values are available.
pub fn trim_extremes(values: &[f64], f: usize) -> Option<Vec<f64>> {
    if values.len() < 2 * f + 1 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted[f..sorted.len() - f].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vt(q: f64, idx: usize) -> ValueTuple {
        ValueTuple::new(q, idx)
    }

    #[test]
    fn first_filter_examples() {
        assert_eq!(first_filter(&[vt(5.0, 2), vt(7.0, 3)], 1), vec![vt(5.0, 2), vt(7.0, 3)]);
        assert_eq!(first_filter(&[vt(5.0, 2), vt(9.9, 2), vt(7.0, 3)], 1), vec![vt(7.0, 3)]);
        assert!(first_filter(&[vt(4.0, 1)], 1).is_empty());
        assert!(first_filter(&[], 0).is_empty());
    }

    #[test]
    fn second_filter_examples() {
        let mut pooled: Vec<_> = (0..4).map(|_| vt(8.0, 5)).collect();
        pooled.extend((0..3).map(|_| vt(10_000.0, 5)));
        assert_eq!(second_filter(&pooled, 1, 0), vec![vt(8.0, 5)]);

        assert_eq!(second_filter(&[vt(8.0, 5)], 0, 0), vec![vt(8.0, 5)]);

        let three: Vec<_> = (0..3).map(|_| vt(8.0, 5)).collect();
        assert!(second_filter(&three, 1, 0).is_empty());
    }

    #[test]
    fn second_filter_skips_own_index() {
        let pooled: Vec<_> = (0..5).map(|_| vt(1.0, 2)).collect();
        assert!(second_filter(&pooled, 1, 2).is_empty());
        assert_eq!(second_filter(&pooled, 1, 0).len(), 1);
    }

    #[test]
    fn accept_relays_examples() {
        let good = [vt(5.0, 2), vt(7.0, 3)];
        let dup = [vt(10_000.0, 2), vt(10_000.0, 2)];
        let own = [vt(1.0, 4)];
        let pooled = accept_relays([&good[..], &dup[..]], &own);
        assert_eq!(pooled, vec![vt(1.0, 4), vt(5.0, 2), vt(7.0, 3)]);

        // forged sets with distinct indices pass here and fail the count later
        let forged: Vec<_> = (0..10).map(|i| vt(10_000.0, i)).collect();
        let honest: Vec<_> = (0..4).map(|_| vec![vt(3.0, 7)]).collect();
        let mut sets: Vec<&[ValueTuple]> = honest.iter().map(|s| &s[..]).collect();
        sets.push(&forged);
        let pooled = accept_relays(sets, &[]);
        assert_eq!(pooled.len(), 14);
        assert_eq!(second_filter(&pooled, 1, 0), vec![vt(3.0, 7)]);
    }

    #[test]
    fn trim_examples() {
        assert_eq!(trim_extremes(&[3.0, 10_000.0, 5.0], 1), Some(vec![5.0]));
        assert_eq!(trim_extremes(&[3.0, 1.0], 0), Some(vec![1.0, 3.0]));
        assert_eq!(trim_extremes(&[3.0, 1.0], 1), None);
    }
}
