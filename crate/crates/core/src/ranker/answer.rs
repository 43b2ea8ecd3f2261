//! The `<answer> [2] > [3] > [1] > [4] </answer>` protocol.

use std::sync::OnceLock;

use regex::Regex;

use super::{RankerError, SlotOrder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAnswer {
    pub ordering: SlotOrder,
    pub repaired: bool,
}

fn answer_block() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<answer>(.*?)</answer>").unwrap())
}

fn bracketed_id() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*(\d+)\s*\]").unwrap())
}

fn bare_id() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+").unwrap())
}

pub fn format_answer(order: &SlotOrder) -> String {
    let chain = order
        .slots()
        .iter()
        .map(|s| format!("[{s}]"))
        .collect::<Vec<_>>()
        .join(" > ");
    format!("<answer> {chain} </answer>")
}

/// Parses the last complete `<answer>` block of `raw` into a permutation of
/// `1..=k`, repairing it if needed.
///
/// Reasoning text can quote the format itself, so only the final block
/// counts. Ids are read as `[n]`; if the block holds no bracketed ids, bare
/// integers are accepted and the answer is flagged as repaired.
pub fn parse_answer(raw: &str, k: usize) -> Result<ParsedAnswer, RankerError> {
    let block = answer_block()
        .captures_iter(raw)
        .last()
        .and_then(|c| c.get(1))
        .ok_or_else(|| RankerError::MalformedAnswer("no <answer> block".into()))?
        .as_str();

    let mut ids: Vec<usize> = bracketed_id()
        .captures_iter(block)
        .map(|c| c[1].parse().unwrap_or(usize::MAX))
        .collect();
    let mut format_repair = false;
    if ids.is_empty() {
        ids = bare_id()
            .find_iter(block)
            .map(|m| m.as_str().parse().unwrap_or(usize::MAX))
            .collect();
        format_repair = true;
    }
    if !ids.iter().any(|&s| (1..=k).contains(&s)) {
        return Err(RankerError::MalformedAnswer(format!(
            "answer block {:?} holds no slot in 1..={k}",
            block.trim()
        )));
    }
    let (ordering, repaired) = SlotOrder::repair(&ids, k);
    Ok(ParsedAnswer {
        ordering,
        repaired: repaired || format_repair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_clean_answer() {
        let p = parse_answer("<answer> [2] > [3] > [1] > [4] </answer>", 4).unwrap();
        assert_eq!(p.ordering.slots(), &[2, 3, 1, 4]);
        assert!(!p.repaired);
    }

    #[test]
    fn repairs_duplicate() {
        let p = parse_answer("<answer> [2] > [2] > [1] > [3] </answer>", 4).unwrap();
        assert_eq!(p.ordering.slots(), &[2, 1, 3, 4]);
        assert!(p.repaired);
    }

    #[test]
    fn missing_tags_is_malformed() {
        assert!(matches!(
            parse_answer("no tags here", 4),
            Err(RankerError::MalformedAnswer(_))
        ));
        assert!(matches!(
            parse_answer("<answer>   </answer>", 4),
            Err(RankerError::MalformedAnswer(_))
        ));
        assert!(matches!(
            parse_answer("<answer> [7] > [9] </answer>", 4),
            Err(RankerError::MalformedAnswer(_))
        ));
    }

    #[test]
    fn takes_last_block() {
        let raw = "<think>format is <answer> [X] > [Y] </answer>; e.g. <answer> [1] > [2] > [3] </answer></think>\n<answer> [3] > [1] > [2] </answer>";
        let p = parse_answer(raw, 3).unwrap();
        assert_eq!(p.ordering.slots(), &[3, 1, 2]);
        assert!(!p.repaired);
    }

    #[test]
    fn unclosed_trailing_block_falls_back_to_last_complete() {
        let raw = "<answer> [2] > [1] </answer> then <answer> [1] >";
        assert_eq!(parse_answer(raw, 2).unwrap().ordering.slots(), &[2, 1]);
    }

    #[test]
    fn bare_integers_are_salvaged() {
        let p = parse_answer("<answer>2 > 4 > 1 > 3</answer>", 4).unwrap();
        assert_eq!(p.ordering.slots(), &[2, 4, 1, 3]);
        assert!(p.repaired);
    }

    #[test]
    fn huge_ids_are_dropped() {
        let p = parse_answer("<answer>[99999999999999999999999] > [2]</answer>", 2).unwrap();
        assert_eq!(p.ordering.slots(), &[2, 1]);
        assert!(p.repaired);
    }

    #[test]
    fn format_round_trip_exhaustive_small_k() {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    out.push(q);
                }
            }
            out
        }
        for k in 1..=5 {
            for p in perms(k) {
                let order = SlotOrder::new(p, k).unwrap();
                let parsed = parse_answer(&format_answer(&order), k).unwrap();
                assert_eq!(parsed.ordering, order);
                assert!(!parsed.repaired);
            }
        }
    }
}
