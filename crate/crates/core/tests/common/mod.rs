#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use hpnf::features::FEATURE_COUNT;
use hpnf::ingestion::{
    CorpusRecords, EngagementCorpus, Label, NewsRecord, ReplyRecord, RetweetRecord, TweetRecord, UserRecord,
};
use hpnf::sentiment::{CompoundScore, SentimentScorer};
use hpnf::FeatureVector;

pub fn news(id: &str, label: Label) -> NewsRecord {
    NewsRecord { news_id: id.into(), label, title: None }
}

pub fn tweet(id: &str, news: &str, user: &str, ts: i64) -> TweetRecord {
    TweetRecord { tweet_id: id.into(), news_id: news.into(), user_id: user.into(), ts }
}

pub fn retweet(id: &str, tweet: &str, user: &str, ts: i64) -> RetweetRecord {
    RetweetRecord { retweet_id: id.into(), tweet_id: tweet.into(), user_id: user.into(), ts }
}

pub fn reply(id: &str, news: &str, parent: &str, user: &str, ts: i64, text: &str) -> ReplyRecord {
    ReplyRecord {
        reply_id: id.into(),
        news_id: news.into(),
        parent_id: parent.into(),
        user_id: user.into(),
        ts,
        text: text.into(),
    }
}

pub fn user(id: &str, friends: &[&str], bot: Option<f64>) -> UserRecord {
    UserRecord { user_id: id.into(), friends: friends.iter().map(|s| s.to_string()).collect(), bot_score: bot }
}

/// The hand-traced worked example: item N1.
pub fn desk_records() -> CorpusRecords {
    CorpusRecords {
        news: vec![news("N1", Label::Fake)],
        tweets: vec![tweet("A", "N1", "u1", 0), tweet("B", "N1", "u2", 100)],
        retweets: vec![retweet("R1", "A", "u3", 50), retweet("R2", "A", "u4", 80), retweet("R3", "A", "u5", 90)],
        replies: vec![
            reply("P1", "N1", "A", "u6", 20, "p-one"),
            reply("P2", "N1", "P1", "u7", 60, "p-two"),
            reply("P3", "N1", "B", "u8", 150, "p-three"),
        ],
        users: vec![
            user("u1", &[], None),
            user("u2", &[], None),
            user("u3", &["u1"], None),
            user("u4", &["u3"], Some(0.9)),
            user("u5", &["u3", "u4"], None),
        ],
    }
}

pub fn desk_corpus() -> EngagementCorpus {
    EngagementCorpus::from_records(desk_records()).unwrap()
}

/// Scores fixed per text.
pub struct StipulatedScorer(pub HashMap<String, f64>);

impl StipulatedScorer {
    pub fn desk() -> Self {
        Self(
            [("p-one", 0.6), ("p-two", -0.5), ("p-three", -0.4)].into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        )
    }
}

impl SentimentScorer for StipulatedScorer {
    fn score(&self, text: &str) -> CompoundScore {
        CompoundScore::new(self.0.get(text).copied().unwrap_or(0.0))
    }
}

/// Expected desk vector, canonical order.
pub const DESK_EXPECTED: [f64; FEATURE_COUNT] = [
    4.0,
    5.0,
    1.0,
    2.0,
    0.0,
    1.0,
    0.5,
    1.0,
    0.2, // S1..S9
    30.0,
    90.0,
    0.0,
    100.0,
    90.0,
    30.0,
    100.0,
    50.0, // T1..T8
    3.0,
    3.0,
    1.0,
    2.0,
    1.0, // S10..S14
    110.0 / 3.0,
    20.0,
    150.0,
    30.0,
    60.0, // T9..T13
    0.5,
    -0.1,
    0.1,
    0.05,
    0.6, // L1..L5
];

/// Indices of integer-valued count features.
pub const COUNT_FEATURES: [usize; 11] = [0, 1, 2, 3, 4, 5, 7, 17, 18, 19, 20];

// ---------------------------------------------------------------------------
// Brute-force oracle. Works from raw records with plain maps and repeated
// scans; shares no code with the library's network or feature modules.
// ---------------------------------------------------------------------------

struct Node {
    ts: i64,
    user: String,
    parent: Option<String>,
    cascade: String,
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Features of one item recomputed from scratch.
pub fn oracle_features(
    records: &CorpusRecords,
    news_id: &str,
    score: &dyn Fn(&str) -> f64,
    bot_threshold: f64,
) -> [Option<f64>; FEATURE_COUNT] {
    let friends: HashMap<&str, HashSet<&str>> =
        records.users.iter().map(|u| (u.user_id.as_str(), u.friends.iter().map(String::as_str).collect())).collect();
    let bot: HashMap<&str, Option<f64>> = records.users.iter().map(|u| (u.user_id.as_str(), u.bot_score)).collect();

    let tweets: Vec<&TweetRecord> = records.tweets.iter().filter(|t| t.news_id == news_id).collect();
    assert!(!tweets.is_empty());
    let tweet_ids: HashSet<&str> = tweets.iter().map(|t| t.tweet_id.as_str()).collect();
    let rts: Vec<&RetweetRecord> =
        records.retweets.iter().filter(|r| tweet_ids.contains(r.tweet_id.as_str())).collect();
    let replies: Vec<&ReplyRecord> = records.replies.iter().filter(|r| r.news_id == news_id).collect();

    // Macro nodes keyed by id.
    let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
    for t in &tweets {
        nodes.insert(
            t.tweet_id.clone(),
            Node { ts: t.ts, user: t.user_id.clone(), parent: None, cascade: t.tweet_id.clone() },
        );
    }
    let empty = HashSet::new();
    for r in &rts {
        let fr = friends.get(r.user_id.as_str()).unwrap_or(&empty);
        let mut best: Option<&RetweetRecord> = None;
        for c in &rts {
            if c.tweet_id == r.tweet_id && c.ts < r.ts && fr.contains(c.user_id.as_str()) {
                let better = match best {
                    None => true,
                    Some(b) => (c.ts, &c.retweet_id) > (b.ts, &b.retweet_id),
                };
                if better {
                    best = Some(c);
                }
            }
        }
        let parent = best.map_or(r.tweet_id.clone(), |b| b.retweet_id.clone());
        nodes.insert(
            r.retweet_id.clone(),
            Node { ts: r.ts, user: r.user_id.clone(), parent: Some(parent), cascade: r.tweet_id.clone() },
        );
    }
    // Hops below the cascade tweet.
    let hops = |id: &str| {
        let mut h = 0;
        let mut cur = id.to_string();
        while let Some(p) = nodes[&cur].parent.clone() {
            h += 1;
            cur = p;
        }
        h
    };
    let outdeg = |id: &str| nodes.values().filter(|n| n.parent.as_deref() == Some(id)).count();

    let t0 = tweets.iter().map(|t| t.ts).min().unwrap();
    let s1 = nodes.keys().map(|k| hops(k) + 1).max().unwrap();
    let s2 = nodes.len();
    let mut hub: Option<(&String, usize, usize, i64)> = None;
    for (id, n) in &nodes {
        let cand = (id, outdeg(id), hops(id), n.ts);
        hub = match hub {
            None => Some(cand),
            Some(h) => {
                let better = cand.1 > h.1
                    || (cand.1 == h.1
                        && (cand.2 < h.2 || (cand.2 == h.2 && (cand.3 < h.3 || (cand.3 == h.3 && cand.0 < h.0)))));
                Some(if better { cand } else { h })
            }
        };
    }
    let hub = hub.unwrap();
    let s3 = hub.1;
    let s4 = tweets.len();
    let s5 = hub.2;
    let retweeted: BTreeSet<&str> = rts.iter().map(|r| r.tweet_id.as_str()).collect();
    let s6 = retweeted.len();
    let s7 = s6 as f64 / s4 as f64;
    let participants: BTreeSet<&str> = nodes.values().map(|n| n.user.as_str()).collect();
    let scored = participants.iter().any(|u| bot.get(u).copied().flatten().is_some());
    let rt_users: BTreeSet<&str> = rts.iter().map(|r| r.user_id.as_str()).collect();
    let bots = rt_users.iter().filter(|u| bot.get(*u).copied().flatten().is_some_and(|s| s >= bot_threshold)).count();

    let mut f: [Option<f64>; FEATURE_COUNT] = [None; FEATURE_COUNT];
    f[0] = Some(s1 as f64);
    f[1] = Some(s2 as f64);
    f[2] = Some(s3 as f64);
    f[3] = Some(s4 as f64);
    f[4] = Some(s5 as f64);
    f[5] = Some(s6 as f64);
    f[6] = Some(s7);
    if scored {
        f[7] = Some(bots as f64);
        f[8] = Some(bots as f64 / participants.len() as f64);
    }

    // Macro temporal.
    let mut tweet_ts: Vec<i64> = tweets.iter().map(|t| t.ts).collect();
    tweet_ts.sort();
    f[12] = Some((tweet_ts[tweet_ts.len() - 1] - t0) as f64);
    let gaps: Vec<f64> = tweet_ts.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    f[15] = Some(mean(&gaps).unwrap_or(0.0));
    let delay = |id: &str| {
        let n = &nodes[id];
        (n.ts - nodes[n.parent.as_ref().unwrap()].ts) as f64
    };
    if !rts.is_empty() {
        let all: Vec<f64> = rts.iter().map(|r| delay(&r.retweet_id)).collect();
        f[9] = mean(&all);
        f[10] = Some((rts.iter().map(|r| r.ts).max().unwrap() - t0) as f64);
        f[11] = Some((hub.3 - t0) as f64);
        // Deepest cascade: depth, then size, then earlier tweet, then id.
        let mut best: Option<(usize, usize, i64, &str)> = None;
        for t in &tweets {
            let members: Vec<&&RetweetRecord> = rts.iter().filter(|r| r.tweet_id == t.tweet_id).collect();
            let depth = members.iter().map(|r| hops(&r.retweet_id)).max().unwrap_or(0);
            let cand = (depth, members.len(), t.ts, t.tweet_id.as_str());
            best = match best {
                None => Some(cand),
                Some(b) => {
                    let better = cand.0 > b.0
                        || (cand.0 == b.0
                            && (cand.1 > b.1 || (cand.1 == b.1 && (cand.2 < b.2 || (cand.2 == b.2 && cand.3 < b.3)))));
                    Some(if better { cand } else { b })
                }
            };
        }
        let (_, _, root_ts, root) = best.unwrap();
        let members: Vec<&&RetweetRecord> = rts.iter().filter(|r| r.tweet_id == root).collect();
        if !members.is_empty() {
            f[13] = Some((members.iter().map(|r| r.ts).max().unwrap() - root_ts) as f64);
            let d: Vec<f64> = members.iter().map(|r| delay(&r.retweet_id)).collect();
            f[14] = mean(&d);
        }
        let firsts: Vec<f64> = tweets
            .iter()
            .filter_map(|t| {
                let first = rts.iter().filter(|r| r.tweet_id == t.tweet_id).map(|r| r.ts).min()?;
                Some((first - t.ts) as f64)
            })
            .collect();
        f[16] = mean(&firsts);
    }

    // Micro level.
    let reply_by_id: HashMap<&str, &ReplyRecord> = replies.iter().map(|r| (r.reply_id.as_str(), *r)).collect();
    let ts_of = |id: &str| -> i64 { reply_by_id.get(id).map(|r| r.ts).unwrap_or_else(|| nodes[id].ts) };
    // (root id, hops below root counting the reply itself)
    let root_of = |r: &ReplyRecord| -> (String, usize) {
        let mut d = 1;
        let mut p = r.parent_id.clone();
        while let Some(up) = reply_by_id.get(p.as_str()) {
            d += 1;
            p = up.parent_id.clone();
        }
        (p, d)
    };
    let mut trees: BTreeMap<String, Vec<(&ReplyRecord, usize)>> = BTreeMap::new();
    for r in &replies {
        let (root, d) = root_of(r);
        trees.entry(root).or_default().push((r, d));
    }
    let cascades: BTreeSet<&str> = trees.keys().map(|k| nodes[k].cascade.as_str()).collect();
    f[20] = Some(cascades.len() as f64);
    f[21] = Some(cascades.len() as f64 / s4 as f64);
    if trees.is_empty() {
        return f;
    }
    let depth_of = |t: &Vec<(&ReplyRecord, usize)>| t.iter().map(|(_, d)| d + 1).max().unwrap();
    f[17] = Some(trees.values().map(depth_of).max().unwrap() as f64);
    f[18] = Some(replies.len() as f64);
    f[19] = Some(
        replies.iter().map(|r| replies.iter().filter(|c| c.parent_id == r.reply_id).count()).max().unwrap() as f64
    );
    let reply_delay = |r: &ReplyRecord| (r.ts - ts_of(&r.parent_id)) as f64;
    let all_delays: Vec<f64> = replies.iter().map(|r| reply_delay(r)).collect();
    f[22] = mean(&all_delays);
    f[23] = Some((replies.iter().map(|r| r.ts).min().unwrap() - t0) as f64);
    f[24] = Some((replies.iter().map(|r| r.ts).max().unwrap() - t0) as f64);
    let mut deepest: Option<(&String, usize, usize, i64)> = None;
    for (root, t) in &trees {
        let cand = (root, depth_of(t), t.len(), nodes[root].ts);
        deepest = match deepest {
            None => Some(cand),
            Some(b) => {
                let better = cand.1 > b.1
                    || (cand.1 == b.1
                        && (cand.2 > b.2 || (cand.2 == b.2 && (cand.3 < b.3 || (cand.3 == b.3 && cand.0 < b.0)))));
                Some(if better { cand } else { b })
            }
        };
    }
    let deep = &trees[deepest.unwrap().0];
    let deep_delays: Vec<f64> = deep.iter().map(|(r, _)| reply_delay(r)).collect();
    f[25] = mean(&deep_delays);
    f[26] = Some((deep.iter().map(|(r, _)| r.ts).max().unwrap() - t0) as f64);

    let scores: Vec<f64> = replies.iter().map(|r| score(&r.text)).collect();
    let pos = scores.iter().filter(|c| **c > 0.05).count();
    let neg = scores.iter().filter(|c| **c < -0.05).count();
    f[27] = Some(pos as f64 / neg.max(1) as f64);
    f[28] = mean(&scores);
    let first: Vec<f64> =
        replies.iter().filter(|r| !reply_by_id.contains_key(r.parent_id.as_str())).map(|r| score(&r.text)).collect();
    f[29] = mean(&first);
    let deep_scores: Vec<f64> = deep.iter().map(|(r, _)| score(&r.text)).collect();
    f[30] = mean(&deep_scores);
    let earliest = deep
        .iter()
        .filter(|(_, d)| *d == 1)
        .min_by(|a, b| (a.0.ts, &a.0.reply_id).cmp(&(b.0.ts, &b.0.reply_id)))
        .unwrap();
    f[31] = Some(score(&earliest.0.text));
    f
}

/// First mismatch between a vector and oracle output, if any.
pub fn mismatch(v: &FeatureVector, oracle: &[Option<f64>; FEATURE_COUNT]) -> Option<String> {
    for (i, (name, want)) in hpnf::FEATURE_NAMES.iter().zip(oracle).enumerate() {
        match (v.get(i), *want) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                let ok = if COUNT_FEATURES.contains(&i) { a == b } else { (a - b).abs() <= 1e-9 * b.abs().max(1.0) };
                if !ok {
                    return Some(format!("{} {name}: got {a}, oracle {b}", v.news_id));
                }
            }
            (a, b) => return Some(format!("{} {name}: mask differs ({a:?} vs {b:?})", v.news_id)),
        }
    }
    None
}
