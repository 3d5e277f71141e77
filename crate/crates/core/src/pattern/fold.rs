use super::{Instruction, Item, PatternSegment, Round, SegmentTrace};

/// Run-length encoding of identical consecutive instructions.
fn runs(trace: &[Instruction]) -> Vec<Item> {
    let mut out: Vec<Item> = Vec::new();
    for &ins in trace {
        match out.last_mut() {
            Some(Item::Repeat { count, instruction }) if *instruction == ins => *count += 1,
            _ => out.push(Item::Repeat {
                count: 1,
                instruction: ins,
            }),
        }
    }
    out
}

/// The repeated block with the largest coverage: `(start, period, count)`.
/// Ties go to the earliest start, then the shortest period.
fn best_repeat(trace: &[Instruction]) -> Option<(usize, usize, usize)> {
    let len = trace.len();
    let mut best: Option<(usize, usize, usize)> = None;
    for start in 0..len {
        for period in 1..=(len - start) / 2 {
            let block = &trace[start..start + period];
            let mut count = 1;
            while start + (count + 1) * period <= len
                && &trace[start + count * period..start + (count + 1) * period] == block
            {
                count += 1;
            }
            if count < 2 {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, p, c)) => period * count > p * c,
            };
            if better {
                best = Some((start, period, count));
            }
        }
    }
    best
}

/// Folds one round: the largest repeated block becomes a group, then equal neighbours
/// inside and outside it are merged into counts.
pub fn fold_round(trace: &[Instruction]) -> Vec<Item> {
    match best_repeat(trace) {
        Some((start, period, count)) if period > 1 => {
            let end = start + period * count;
            let mut out = runs(&trace[..start]);
            out.push(Item::Group {
                count,
                items: runs(&trace[start..start + period]),
            });
            out.extend(runs(&trace[end..]));
            out
        }
        _ => runs(trace),
    }
}

pub fn unfold_items(items: &[Item]) -> Vec<Instruction> {
    let mut out = Vec::new();
    for item in items {
        match item {
            Item::Repeat { count, instruction } => {
                out.extend(std::iter::repeat_n(*instruction, *count))
            }
            Item::Group { count, items } => {
                let body = unfold_items(items);
                for _ in 0..*count {
                    out.extend_from_slice(&body);
                }
            }
        }
    }
    out
}

/// Folds every round of a segment and merges identical consecutive rounds.
/// Rounds are numbered from `first_round`.
pub fn fold_trace(trace: &SegmentTrace, first_round: usize) -> PatternSegment {
    let mut rounds: Vec<Round> = Vec::new();
    for (k, flat) in trace.rounds.iter().enumerate() {
        let number = first_round + k;
        let items = fold_round(flat);
        match rounds.last_mut() {
            Some(r) if r.items == items => r.last = number,
            _ => rounds.push(Round {
                first: number,
                last: number,
                items,
            }),
        }
    }
    PatternSegment {
        id: trace.segment,
        joins: trace.joins.clone(),
        rounds,
    }
}

/// Flat rounds of a folded segment, one entry per round.
pub fn unfold_pattern(segment: &PatternSegment) -> Vec<Vec<Instruction>> {
    let mut out = Vec::new();
    for r in &segment.rounds {
        let flat = unfold_items(&r.items);
        for _ in r.first..=r.last {
            out.push(flat.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Stitch;

    fn ins(s: Stitch) -> Instruction {
        Instruction::new(s)
    }

    #[test]
    fn shortest_period_wins_ties() {
        let t = vec![ins(Stitch::Sc); 6];
        assert_eq!(best_repeat(&t), Some((0, 1, 6)));
        assert_eq!(
            fold_round(&t),
            vec![Item::Repeat {
                count: 6,
                instruction: ins(Stitch::Sc)
            }]
        );
    }

    #[test]
    fn non_repetitive_trace_is_unchanged() {
        let t = vec![ins(Stitch::Sc), ins(Stitch::Inc(3)), ins(Stitch::Dec(2))];
        assert_eq!(best_repeat(&t), None);
        assert_eq!(unfold_items(&fold_round(&t)), t);
        assert_eq!(fold_round(&t).len(), 3);
    }
}
