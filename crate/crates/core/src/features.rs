//! The 32 hierarchical propagation network features.
//!
//! Canonical order (indices 0..32):
//!
//! * `S1..S9`   macro structural
//! * `T1..T8`   macro temporal
//! * `S10..S14` micro structural
//! * `T9..T13`  micro temporal
//! * `L1..L5`   micro linguistic
//!
//! A feature whose defining population is empty (no retweets, no replies, no
//! bot scores) is masked out and stored as `0.0`. All times are in seconds.
//!
//! Depth conventions differ per feature and are noted where defined: `S1`
//! counts edges from the news root, `S5` counts retweet hops from the cascade
//! tweet, `S10` counts nodes from the tweet heading the conversation.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::ingestion::{EngagementCorpus, Label, UserTable};
use crate::network::{deepest_macro_cascade, deepest_micro_cascade, MacroNetwork, MicroTree, PropagationNetwork};
use crate::sentiment::SentimentScorer;

pub const FEATURE_COUNT: usize = 32;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9", //
    "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", //
    "S10", "S11", "S12", "S13", "S14", //
    "T9", "T10", "T11", "T12", "T13", //
    "L1", "L2", "L3", "L4", "L5",
];

/// Index ranges of the five extractor blocks.
pub const MACRO_STRUCTURAL: std::ops::Range<usize> = 0..9;
pub const MACRO_TEMPORAL: std::ops::Range<usize> = 9..17;
pub const MICRO_STRUCTURAL: std::ops::Range<usize> = 17..22;
pub const MICRO_TEMPORAL: std::ops::Range<usize> = 22..27;
pub const MICRO_LINGUISTIC: std::ops::Range<usize> = 27..32;

/// Default `bot_score` at or above which a user counts as a bot.
pub const DEFAULT_BOT_THRESHOLD: f64 = 0.5;

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("news item {0} has no tweets and is excluded")]
    ExcludedItem(String),
    #[error("unknown news item {0}")]
    UnknownItem(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub news_id: String,
    pub label: Label,
    /// Masked-out entries hold `0.0`.
    pub values: [f64; FEATURE_COUNT],
    /// Bit `i` set when feature `i` is defined.
    pub mask: u32,
}

impl FeatureVector {
    pub fn from_parts(news_id: String, label: Label, parts: [Option<f64>; FEATURE_COUNT]) -> Self {
        let mut values = [0.0; FEATURE_COUNT];
        let mut mask = 0u32;
        for (i, v) in parts.into_iter().enumerate() {
            if let Some(v) = v {
                values[i] = v;
                mask |= 1 << i;
            }
        }
        Self { news_id, label, values, mask }
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.mask & (1 << i) != 0
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.is_defined(i).then_some(self.values[i])
    }

    pub fn by_name(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|i| self.get(i))
    }

    /// 32-character `0`/`1` string in canonical order.
    pub fn mask_string(&self) -> String {
        (0..FEATURE_COUNT).map(|i| if self.is_defined(i) { '1' } else { '0' }).collect()
    }

    pub fn parse_mask(s: &str) -> Option<u32> {
        if s.len() != FEATURE_COUNT {
            return None;
        }
        s.bytes().enumerate().try_fold(0u32, |m, (i, b)| match b {
            b'1' => Some(m | 1 << i),
            b'0' => Some(m),
            _ => None,
        })
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn min_tweet_ts(net: &MacroNetwork) -> i64 {
    net.tweets().map(|i| net.node(i).time()).min().expect("at least one tweet")
}

/// Tweet/retweet node with the largest out-degree; ties go to the fewest hops
/// below its cascade tweet, then the earliest timestamp, then the smaller id.
pub fn max_outdegree_node(net: &MacroNetwork) -> usize {
    (1..net.nodes().len())
        .min_by(|&a, &b| {
            let (na, nb) = (net.node(a), net.node(b));
            nb.children
                .len()
                .cmp(&na.children.len())
                .then(na.level.cmp(&nb.level))
                .then(na.time().cmp(&nb.time()))
                .then(na.node_id.cmp(&nb.node_id))
        })
        .expect("at least one tweet")
}

/// `S1..S9`.
pub fn extract_macro_structural(net: &MacroNetwork, users: &UserTable, bot_threshold: f64) -> [Option<f64>; 9] {
    let nodes = net.nodes();
    // Edges on the longest path from the news root.
    let s1 = nodes.iter().map(|n| n.level).max().unwrap_or(0);
    let s2 = nodes.len() - 1;
    let hub = max_outdegree_node(net);
    let s3 = net.node(hub).children.len();
    let s4 = net.tweet_count();
    // Retweet hops from the cascade tweet; the tweet itself is 0.
    let s5 = net.node(hub).level - 1;
    let s6 = net.tweets().filter(|&t| !net.node(t).children.is_empty()).count();
    let s7 = s6 as f64 / s4 as f64;

    let participants: HashSet<&str> = nodes[1..].iter().filter_map(|n| n.user_id.as_deref()).collect();
    let retweeters: HashSet<&str> = net.retweets().filter_map(|i| net.node(i).user_id.as_deref()).collect();
    let any_scored = participants.iter().any(|u| users.bot_score(u).is_some());
    let bots = retweeters.iter().filter(|u| users.bot_score(u).is_some_and(|s| s >= bot_threshold)).count();
    let (s8, s9) =
        if any_scored { (Some(bots as f64), Some(bots as f64 / participants.len() as f64)) } else { (None, None) };

    [
        Some(s1 as f64),
        Some(s2 as f64),
        Some(s3 as f64),
        Some(s4 as f64),
        Some(s5 as f64),
        Some(s6 as f64),
        Some(s7),
        s8,
        s9,
    ]
}

/// `T1..T8`.
pub fn extract_macro_temporal(net: &MacroNetwork) -> [Option<f64>; 8] {
    let t0 = min_tweet_ts(net);
    let tweet_times: Vec<i64> = net.tweets().map(|i| net.node(i).time()).collect();
    let t4 = tweet_times.iter().max().expect("at least one tweet") - t0;
    let t7 =
        if tweet_times.len() > 1 { mean(tweet_times.windows(2).map(|w| (w[1] - w[0]) as f64)).unwrap() } else { 0.0 };

    let delay = |i: usize| {
        let n = net.node(i);
        (n.time() - net.node(n.parent.expect("retweets have parents")).time()) as f64
    };

    let mut t = [None; 8];
    t[3] = Some(t4 as f64);
    t[6] = Some(t7);
    if net.retweet_count() == 0 {
        return t;
    }

    t[0] = mean(net.retweets().map(delay));
    let last_rt = net.retweets().map(|i| net.node(i).time()).max().unwrap();
    t[1] = Some((last_rt - t0) as f64);
    t[2] = Some((net.node(max_outdegree_node(net)).time() - t0) as f64);

    let deepest = deepest_macro_cascade(net);
    let in_deepest: Vec<usize> = net.retweets().filter(|&i| net.node(i).cascade == Some(deepest)).collect();
    if !in_deepest.is_empty() {
        let root_ts = net.node(deepest).time();
        let last = in_deepest.iter().map(|&i| net.node(i).time()).max().unwrap();
        t[4] = Some((last - root_ts) as f64);
        t[5] = mean(in_deepest.iter().map(|&i| delay(i)));
    }

    t[7] = mean(net.tweets().filter_map(|c| {
        let first = net.retweets().filter(|&i| net.node(i).cascade == Some(c)).map(|i| net.node(i).time()).min()?;
        Some((first - net.node(c).time()) as f64)
    }));
    t
}

/// `S10..S14`.
pub fn extract_micro_structural(forest: &[MicroTree], cascade_count: usize) -> [Option<f64>; 5] {
    let s13 = forest.iter().map(|t| t.cascade).collect::<HashSet<_>>().len();
    let s14 = s13 as f64 / cascade_count as f64;
    if forest.is_empty() {
        return [None, None, None, Some(0.0), Some(0.0)];
    }
    // Nodes on the longest conversation path, the tweet or retweet counted.
    let s10 = forest.iter().map(MicroTree::node_depth).max().unwrap();
    let s11: usize = forest.iter().map(|t| t.replies.len()).sum();
    let s12 = forest.iter().flat_map(|t| t.replies.iter().map(|r| r.children.len())).max().unwrap_or(0);
    [Some(s10 as f64), Some(s11 as f64), Some(s12 as f64), Some(s13 as f64), Some(s14)]
}

/// `T9..T13`.
pub fn extract_micro_temporal(forest: &[MicroTree], net: &MacroNetwork) -> [Option<f64>; 5] {
    let Ok(deepest) = deepest_micro_cascade(forest) else {
        return [None; 5];
    };
    let t0 = min_tweet_ts(net);
    let delays = |t: &MicroTree| t.replies.iter().map(|r| (r.ts - t.parent_ts(r)) as f64).collect::<Vec<_>>();
    let all_ts = || forest.iter().flat_map(|t| t.replies.iter().map(|r| r.ts));
    let t9 = mean(forest.iter().flat_map(delays));
    let t10 = (all_ts().min().unwrap() - t0) as f64;
    let t11 = (all_ts().max().unwrap() - t0) as f64;
    let t12 = mean(delays(deepest));
    let t13 = (deepest.replies.iter().map(|r| r.ts).max().unwrap() - t0) as f64;
    [t9, Some(t10), Some(t11), t12, Some(t13)]
}

/// `L1..L5`.
pub fn extract_micro_linguistic(forest: &[MicroTree], scorer: &dyn SentimentScorer) -> [Option<f64>; 5] {
    let Ok(deepest) = deepest_micro_cascade(forest) else {
        return [None; 5];
    };
    let all: Vec<_> = forest.iter().flat_map(|t| t.replies.iter().map(|r| scorer.score(&r.text))).collect();
    let positive = all.iter().filter(|c| c.is_positive()).count();
    let negative = all.iter().filter(|c| c.is_negative()).count();
    let l1 = positive as f64 / negative.max(1) as f64;
    let l2 = mean(all.iter().map(|c| c.value()));
    let l3 = mean(forest.iter().flat_map(|t| t.first_level().map(|r| scorer.score(&r.text).value())));
    let l4 = mean(deepest.replies.iter().map(|r| scorer.score(&r.text).value()));
    let l5 = deepest.first_level().next().map(|r| scorer.score(&r.text).value());
    [Some(l1), l2, l3, l4, l5]
}

/// Feature vector of an already built network.
pub fn extract_network(
    net: &PropagationNetwork,
    users: &UserTable,
    scorer: &dyn SentimentScorer,
    bot_threshold: f64,
) -> FeatureVector {
    let mut parts = [None; FEATURE_COUNT];
    parts[MACRO_STRUCTURAL].copy_from_slice(&extract_macro_structural(&net.macro_net, users, bot_threshold));
    parts[MACRO_TEMPORAL].copy_from_slice(&extract_macro_temporal(&net.macro_net));
    parts[MICRO_STRUCTURAL].copy_from_slice(&extract_micro_structural(&net.micro, net.macro_net.tweet_count()));
    parts[MICRO_TEMPORAL].copy_from_slice(&extract_micro_temporal(&net.micro, &net.macro_net));
    parts[MICRO_LINGUISTIC].copy_from_slice(&extract_micro_linguistic(&net.micro, scorer));
    FeatureVector::from_parts(net.news_id.clone(), net.label, parts)
}

pub fn extract_hpnf(
    corpus: &EngagementCorpus,
    news_id: &str,
    scorer: &dyn SentimentScorer,
    bot_threshold: f64,
) -> Result<FeatureVector, FeatureError> {
    let item = corpus.item(news_id).ok_or_else(|| FeatureError::UnknownItem(news_id.to_string()))?;
    let net =
        PropagationNetwork::build(item, corpus.users()).map_err(|_| FeatureError::ExcludedItem(news_id.to_string()))?;
    Ok(extract_network(&net, corpus.users(), scorer, bot_threshold))
}

/// Vectors of every included item, ordered by `news_id`. Runs in parallel on
/// the current rayon pool; output order does not depend on scheduling.
pub fn extract_all(corpus: &EngagementCorpus, scorer: &dyn SentimentScorer, bot_threshold: f64) -> Vec<FeatureVector> {
    let items: Vec<_> = corpus.items().filter(|i| !i.is_excluded()).collect();
    items
        .par_iter()
        .map(|item| {
            let net = PropagationNetwork::build(item, corpus.users()).expect("included items have tweets");
            extract_network(&net, corpus.users(), scorer, bot_threshold)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_cover_canonical_order() {
        assert_eq!(feature_index("S1"), Some(0));
        assert_eq!(feature_index("T1"), Some(9));
        assert_eq!(feature_index("S10"), Some(17));
        assert_eq!(feature_index("T9"), Some(22));
        assert_eq!(feature_index("L1"), Some(27));
        assert_eq!(feature_index("L5"), Some(31));
    }

    #[test]
    fn mask_string_round_trip() {
        let mut parts = [Some(1.0); FEATURE_COUNT];
        parts[3] = None;
        parts[31] = None;
        let v = FeatureVector::from_parts("n".into(), Label::Fake, parts);
        let s = v.mask_string();
        assert_eq!(&s[..5], "11101");
        assert_eq!(FeatureVector::parse_mask(&s), Some(v.mask));
        assert_eq!(v.values[3], 0.0);
        assert_eq!(FeatureVector::parse_mask("10"), None);
    }
}
