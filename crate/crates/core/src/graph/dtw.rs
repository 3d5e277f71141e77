use crate::geom::Vec3;

/// Monotone endpoint-anchored pairing of two sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub pairs: Vec<(usize, usize)>,
    /// Sum of embedded distances over all pairs.
    pub cost: f64,
}

/// Minimal-cost coupling of `a` and `b` under Euclidean distance.
/// Ties prefer the diagonal step, then the step advancing `b`.
pub fn dtw_couple(a: &[Vec3], b: &[Vec3]) -> Coupling {
    dtw_couple_constrained(a, b, &[])
}

/// As [`dtw_couple`], but a step advancing only `a` from `i` to `i + 1` is forbidden
/// where `breaks[i]` holds. The diagonal and `b` steps stay allowed, so a coupling
/// always exists.
pub fn dtw_couple_constrained(a: &[Vec3], b: &[Vec3], breaks: &[bool]) -> Coupling {
    assert!(!a.is_empty() && !b.is_empty(), "coupled rows are non-empty");
    let (n, m) = (a.len(), b.len());
    let blocked = |i: usize| breaks.get(i).copied().unwrap_or(false);
    let mut cost = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            let d = (a[i] - b[j]).norm();
            if i == 0 && j == 0 {
                cost[0] = d;
                continue;
            }
            let mut best = f64::INFINITY;
            if i > 0 && j > 0 {
                best = best.min(cost[at(i - 1, j - 1)]);
            }
            if j > 0 {
                best = best.min(cost[at(i, j - 1)]);
            }
            if i > 0 && !blocked(i - 1) {
                best = best.min(cost[at(i - 1, j)]);
            }
            cost[at(i, j)] = best + d;
        }
    }
    let mut pairs = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let diag = if i > 0 && j > 0 {
            cost[at(i - 1, j - 1)]
        } else {
            f64::INFINITY
        };
        let left = if j > 0 {
            cost[at(i, j - 1)]
        } else {
            f64::INFINITY
        };
        let up = if i > 0 && !blocked(i - 1) {
            cost[at(i - 1, j)]
        } else {
            f64::INFINITY
        };
        if diag <= left && diag <= up {
            i -= 1;
            j -= 1;
        } else if left <= up {
            j -= 1;
        } else {
            i -= 1;
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    Coupling {
        pairs,
        cost: cost[at(n - 1, m - 1)],
    }
}

/// Exhaustive minimum over all couplings. Exponential; for tests on short rows.
pub fn brute_force_coupling(a: &[Vec3], b: &[Vec3]) -> f64 {
    fn walk(a: &[Vec3], b: &[Vec3], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).norm();
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, y: f64) -> Vec<Vec3> {
        (0..n).map(|i| Vec3::new(i as f64, y, 0.0)).collect()
    }

    #[test]
    fn aligned_rows_couple_identically() {
        let c = dtw_couple(&row(5, 0.0), &row(5, 0.7));
        assert_eq!(c.pairs, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
        assert!((c.cost - 3.5).abs() < 1e-12);
    }

    #[test]
    fn apex_pairs_with_everything() {
        let c = dtw_couple(&[Vec3::zeros()], &row(6, 1.0));
        assert_eq!(c.pairs, (0..6).map(|j| (0, j)).collect::<Vec<_>>());
    }

    #[test]
    fn breaks_forbid_merging_across() {
        // Two a vertices close to one b vertex would merge without the break.
        let a = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.1, 0.0, 0.0),
            Vec3::new(5.0, 0.0, 0.0),
        ];
        let b = vec![Vec3::new(0.05, 1.0, 0.0), Vec3::new(5.0, 1.0, 0.0)];
        assert_eq!(dtw_couple(&a, &b).pairs, vec![(0, 0), (1, 0), (2, 1)]);
        let c = dtw_couple_constrained(&a, &b, &[true, false]);
        assert!(c
            .pairs
            .windows(2)
            .all(|w| !(w[1].0 == 1 && w[1].1 == w[0].1)));
    }
}
