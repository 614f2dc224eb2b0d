//! Seeded synthetic engagement corpora.
//!
//! Each item draws a number of cascades (Poisson, at least one), posts their
//! tweets with exponential inter-arrival times and grows a Galton–Watson
//! retweet tree under every tweet (Poisson offspring, truncated at
//! `max_depth`). Every tweet and retweet gets a fresh user whose friend list
//! holds exactly the author of its true parent, so parent inference recovers
//! the generated tree. Tweets and retweets receive reply threads with
//! probability `reply_prob`; a thread has `1 + Poisson(m)` first-level
//! replies, each reply `Poisson(m)` children, again truncated at `max_depth`.
//!
//! Child timestamps are `parent + floor(Exp(mean))`, plus one second for
//! retweets so a retweet always strictly follows its parent.
//!
//! Item `i` draws from its own substream of its preset's seed, so items can
//! be generated in parallel.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ingestion::{
    CorpusRecords, EngagementCorpus, IngestError, Label, NewsRecord, ReplyRecord, RetweetRecord, TweetRecord,
    UserRecord,
};
use crate::rng::{substream, StreamRng};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    FakeLike,
    RealLike,
}

impl PresetKind {
    pub fn label(self) -> Label {
        match self {
            PresetKind::FakeLike => Label::Fake,
            PresetKind::RealLike => Label::Real,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenParams {
    pub n_items: usize,
    pub cascades_mean: f64,
    pub retweet_offspring_mean: f64,
    pub max_depth: u32,
    pub tweet_interarrival_mean_s: f64,
    pub retweet_delay_mean_s: f64,
    pub reply_prob: f64,
    pub reply_offspring_mean: f64,
    pub reply_delay_mean_s: f64,
    pub bot_fraction: f64,
    pub positive_reply_prob: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        let finite_nonneg = [
            ("cascades_mean", self.cascades_mean),
            ("retweet_offspring_mean", self.retweet_offspring_mean),
            ("reply_offspring_mean", self.reply_offspring_mean),
        ];
        for (name, v) in finite_nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        let positive = [
            ("tweet_interarrival_mean_s", self.tweet_interarrival_mean_s),
            ("retweet_delay_mean_s", self.retweet_delay_mean_s),
            ("reply_delay_mean_s", self.reply_delay_mean_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be > 0"));
            }
        }
        for (name, v) in [
            ("reply_prob", self.reply_prob),
            ("bot_fraction", self.bot_fraction),
            ("positive_reply_prob", self.positive_reply_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.max_depth < 1 {
            return bad("max_depth must be >= 1".into());
        }
        Ok(())
    }
}

/// Preset parameters.
///
/// | parameter                | fake-like | real-like |
/// |--------------------------|-----------|-----------|
/// | cascades_mean            | 4         | 4         |
/// | retweet_offspring_mean   | 1.1       | 0.8       |
/// | max_depth                | 6         | 3         |
/// | tweet_interarrival_mean_s| 1800      | 5400      |
/// | retweet_delay_mean_s     | 900       | 2400      |
/// | reply_prob               | 0.35      | 0.3       |
/// | reply_offspring_mean     | 0.7       | 0.6       |
/// | reply_delay_mean_s       | 1200      | 1800      |
/// | bot_fraction             | 0.25      | 0.08      |
/// | positive_reply_prob      | 0.35      | 0.6       |
pub fn preset_params(kind: PresetKind, seed: u64) -> GenParams {
    match kind {
        PresetKind::FakeLike => GenParams {
            n_items: 200,
            cascades_mean: 4.0,
            retweet_offspring_mean: 1.1,
            max_depth: 6,
            tweet_interarrival_mean_s: 1800.0,
            retweet_delay_mean_s: 900.0,
            reply_prob: 0.35,
            reply_offspring_mean: 0.7,
            reply_delay_mean_s: 1200.0,
            bot_fraction: 0.25,
            positive_reply_prob: 0.35,
            seed,
        },
        PresetKind::RealLike => GenParams {
            n_items: 200,
            cascades_mean: 4.0,
            retweet_offspring_mean: 0.8,
            max_depth: 3,
            tweet_interarrival_mean_s: 5400.0,
            retweet_delay_mean_s: 2400.0,
            reply_prob: 0.3,
            reply_offspring_mean: 0.6,
            reply_delay_mean_s: 1800.0,
            bot_fraction: 0.08,
            positive_reply_prob: 0.6,
            seed,
        },
    }
}

pub const POSITIVE_PHRASES: [&str; 20] = [
    "great reporting thanks",
    "this is really good news",
    "love this story",
    "excellent and honest piece",
    "wonderful to see this",
    "so happy about this",
    "thank you for the accurate update",
    "brilliant work everyone",
    "what an inspiring story",
    "this is true and important",
    "glad someone finally said it",
    "very helpful article",
    "impressive and clear reporting",
    "best news all week",
    "proud of this community",
    "such a positive outcome",
    "credible source great read",
    "hopeful and encouraging",
    "amazing thanks for sharing",
    "i agree completely great point",
];

pub const NEGATIVE_PHRASES: [&str; 20] = [
    "this is fake",
    "total lies and propaganda",
    "what a hoax",
    "terrible misleading article",
    "this is a scam",
    "disgusting and shameful",
    "stupid nonsense",
    "worst reporting ever",
    "this is wrong and dangerous",
    "pathetic fraud",
    "i hate this garbage",
    "corrupt liars again",
    "awful biased trash",
    "ridiculous and false",
    "sad and angry about this",
    "what a disaster",
    "toxic manipulation",
    "such an idiotic claim",
    "the worst kind of lie",
    "shame on you",
];

/// Generated corpus plus the generative macro edges per item.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub records: CorpusRecords,
    /// `(parent_id, child_id)` edges in generation order, root edges included
    /// (`news_id -> tweet_id`).
    pub truth: BTreeMap<String, Vec<(String, String)>>,
}

impl SyntheticCorpus {
    pub fn corpus(&self) -> Result<EngagementCorpus, IngestError> {
        EngagementCorpus::from_records(self.records.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SynthOptions {
    /// Add friends that retweeted outside the inference window.
    pub confound: bool,
}

struct ItemOutput {
    news: NewsRecord,
    tweets: Vec<TweetRecord>,
    retweets: Vec<RetweetRecord>,
    replies: Vec<ReplyRecord>,
    users: Vec<UserRecord>,
    truth: Vec<(String, String)>,
}

fn poisson(g: &mut StreamRng, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(g) as u64
    }
}

fn exp_delay(g: &mut StreamRng, mean: f64) -> i64 {
    Exp::new(1.0 / mean).expect("positive rate").sample(g).floor() as i64
}

/// Base timestamp of generated items.
const EPOCH: i64 = 1_500_000_000;

struct MacroDraft {
    id: String,
    user: String,
    ts: i64,
    parent: Option<usize>,
    cascade: usize,
}

fn generate_item(index: usize, news_id: String, label: Label, p: &GenParams, opts: SynthOptions) -> ItemOutput {
    let mut g = substream(p.seed, index as u64);
    let mut users: Vec<UserRecord> = Vec::new();
    let new_user = |users: &mut Vec<UserRecord>| {
        let id = format!("{news_id}-u{}", users.len());
        users.push(UserRecord { user_id: id.clone(), friends: Vec::new(), bot_score: None });
        id
    };

    let n_cascades = poisson(&mut g, p.cascades_mean).max(1);
    let mut nodes: Vec<MacroDraft> = Vec::new();
    let mut ts = EPOCH;
    for c in 0..n_cascades {
        if c > 0 {
            ts += exp_delay(&mut g, p.tweet_interarrival_mean_s);
        }
        let user = new_user(&mut users);
        nodes.push(MacroDraft { id: format!("{news_id}-t{c}"), user, ts, parent: None, cascade: nodes.len() });
    }
    let n_tweets = nodes.len();

    // Breadth-first Galton–Watson growth per cascade.
    let mut rt_count = 0;
    for root in 0..n_tweets {
        let mut frontier = vec![root];
        for _depth in 0..p.max_depth {
            let mut next = Vec::new();
            for &parent in &frontier {
                for _ in 0..poisson(&mut g, p.retweet_offspring_mean) {
                    let user = new_user(&mut users);
                    let child_ts = nodes[parent].ts + 1 + exp_delay(&mut g, p.retweet_delay_mean_s);
                    next.push(nodes.len());
                    nodes.push(MacroDraft {
                        id: format!("{news_id}-r{rt_count}"),
                        user,
                        ts: child_ts,
                        parent: Some(parent),
                        cascade: root,
                    });
                    rt_count += 1;
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }

    let user_index =
        |id: &str| -> usize { id.rsplit_once("-u").and_then(|(_, n)| n.parse().ok()).expect("generated user id") };

    // Friend lists reproduce the generated parents.
    for i in 0..nodes.len() {
        let author = user_index(&nodes[i].user);
        let mut friends = Vec::new();
        if let Some(parent) = nodes[i].parent {
            friends.push(nodes[parent].user.clone());
        }
        if opts.confound && nodes[i].parent.is_some() {
            friends.extend(confounders(&nodes, i, &mut g));
        }
        if nodes[i].parent.is_some() {
            let is_bot = g.random_bool(p.bot_fraction);
            users[author].bot_score = Some(if is_bot { 0.9 } else { 0.1 });
        } else {
            users[author].bot_score = Some(0.1);
        }
        users[author].friends = friends;
    }

    // Replies.
    struct ReplyDraft {
        id: String,
        parent_id: String,
        user: String,
        ts: i64,
        text: &'static str,
    }
    let mut replies: Vec<ReplyDraft> = Vec::new();
    for node in &nodes {
        if !g.random_bool(p.reply_prob) {
            continue;
        }
        let first = 1 + poisson(&mut g, p.reply_offspring_mean);
        let mut frontier: Vec<(String, i64, u64)> = vec![(node.id.clone(), node.ts, first)];
        for _depth in 0..p.max_depth {
            let mut next = Vec::new();
            for (parent_id, parent_ts, k) in frontier {
                for _ in 0..k {
                    let id = format!("{news_id}-p{}", replies.len());
                    let ts = parent_ts + exp_delay(&mut g, p.reply_delay_mean_s);
                    let pool = if g.random_bool(p.positive_reply_prob) { &POSITIVE_PHRASES } else { &NEGATIVE_PHRASES };
                    let text = *pool.choose(&mut g).expect("non-empty pool");
                    let user = new_user(&mut users);
                    next.push((id.clone(), ts, poisson(&mut g, p.reply_offspring_mean)));
                    replies.push(ReplyDraft { id, parent_id: parent_id.clone(), user, ts, text });
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }

    let truth = nodes
        .iter()
        .map(|n| {
            let parent = n.parent.map_or_else(|| news_id.clone(), |p| nodes[p].id.clone());
            (parent, n.id.clone())
        })
        .collect();
    let tweets = nodes[..n_tweets]
        .iter()
        .map(|n| TweetRecord { tweet_id: n.id.clone(), news_id: news_id.clone(), user_id: n.user.clone(), ts: n.ts })
        .collect();
    let retweets = nodes[n_tweets..]
        .iter()
        .map(|n| RetweetRecord {
            retweet_id: n.id.clone(),
            tweet_id: nodes[n.cascade].id.clone(),
            user_id: n.user.clone(),
            ts: n.ts,
        })
        .collect();
    let replies = replies
        .into_iter()
        .map(|r| ReplyRecord {
            reply_id: r.id,
            news_id: news_id.clone(),
            parent_id: r.parent_id,
            user_id: r.user,
            ts: r.ts,
            text: r.text.to_string(),
        })
        .collect();

    ItemOutput { news: NewsRecord { news_id, label, title: None }, tweets, retweets, replies, users, truth }
}

/// Extra friends of retweet `i` that must not change its inferred parent:
/// authors of same-cascade retweets strictly older than the true parent (only
/// when the parent is itself a retweet), authors of retweets strictly newer
/// than `i`, and tweet authors.
fn confounders(nodes: &[MacroDraft], i: usize, g: &mut StreamRng) -> Vec<String> {
    let node = &nodes[i];
    let parent = &nodes[node.parent.expect("retweet")];
    let parent_is_retweet = parent.parent.is_some();
    let candidates: Vec<&MacroDraft> = nodes
        .iter()
        .filter(|n| n.parent.is_some())
        .filter(|n| {
            let older = n.cascade == node.cascade && parent_is_retweet && n.ts < parent.ts;
            let newer = n.ts > node.ts;
            let other_cascade = n.cascade != node.cascade;
            older || newer || other_cascade
        })
        .collect();
    let mut out: Vec<String> = candidates.choose_multiple(g, 3).map(|n| n.user.clone()).collect();
    if let Some(t) = nodes.iter().filter(|n| n.parent.is_none()).collect::<Vec<_>>().choose(g) {
        out.push(t.user.clone());
    }
    out.sort();
    out.dedup();
    out
}

/// Generate `n_fake` items from `params_fake` followed by `n_real` items from
/// `params_real`. Items are named `n00000`, `n00001`, ... in that order.
pub fn generate_corpus(
    params_fake: &GenParams,
    params_real: &GenParams,
    n_fake: usize,
    n_real: usize,
    opts: SynthOptions,
) -> Result<SyntheticCorpus, SynthError> {
    params_fake.validate()?;
    params_real.validate()?;
    let items: Vec<ItemOutput> = (0..n_fake + n_real)
        .into_par_iter()
        .map(|i| {
            let (p, label) = if i < n_fake { (params_fake, Label::Fake) } else { (params_real, Label::Real) };
            generate_item(i, format!("n{i:05}"), label, p, opts)
        })
        .collect();

    let mut records = CorpusRecords::default();
    let mut truth = BTreeMap::new();
    for item in items {
        truth.insert(item.news.news_id.clone(), item.truth);
        records.news.push(item.news);
        records.tweets.extend(item.tweets);
        records.retweets.extend(item.retweets);
        records.replies.extend(item.replies);
        records.users.extend(item.users);
    }
    Ok(SyntheticCorpus { records, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::{Lexicon, SentimentScorer};

    #[test]
    fn presets_encode_expected_contrasts() {
        let f = preset_params(PresetKind::FakeLike, 1);
        let r = preset_params(PresetKind::RealLike, 1);
        assert!(f.max_depth > r.max_depth);
        assert!(f.retweet_offspring_mean > r.retweet_offspring_mean);
        assert!(f.tweet_interarrival_mean_s < r.tweet_interarrival_mean_s);
        assert!(f.retweet_delay_mean_s < r.retweet_delay_mean_s);
        assert!(f.bot_fraction > r.bot_fraction);
        assert!(f.positive_reply_prob < r.positive_reply_prob);
        assert_eq!(preset_params(PresetKind::FakeLike, 1), f);
        f.validate().unwrap();
        r.validate().unwrap();
    }

    #[test]
    fn degenerate_params_give_tweets_only() {
        let mut p = preset_params(PresetKind::RealLike, 3);
        p.retweet_offspring_mean = 0.0;
        p.reply_prob = 0.0;
        let s = generate_corpus(&p, &p, 5, 5, SynthOptions::default()).unwrap();
        assert!(s.records.retweets.is_empty());
        assert!(s.records.replies.is_empty());
        assert!(!s.records.tweets.is_empty());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = preset_params(PresetKind::RealLike, 3);
        p.reply_prob = 1.5;
        assert!(matches!(generate_corpus(&p, &p, 1, 1, SynthOptions::default()), Err(SynthError::InvalidParams(_))));
        let mut p = preset_params(PresetKind::RealLike, 3);
        p.max_depth = 0;
        assert!(p.validate().is_err());
        let mut p = preset_params(PresetKind::RealLike, 3);
        p.retweet_delay_mean_s = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn phrase_pools_score_with_intended_sign() {
        let lex = Lexicon::builtin();
        for p in POSITIVE_PHRASES {
            assert!(lex.score(p).is_positive(), "{p}: {}", lex.score(p).value());
        }
        for p in NEGATIVE_PHRASES {
            assert!(lex.score(p).is_negative(), "{p}: {}", lex.score(p).value());
        }
    }

    #[test]
    fn timestamps_respect_parents() {
        let f = preset_params(PresetKind::FakeLike, 8);
        let s = generate_corpus(&f, &f, 30, 0, SynthOptions { confound: true }).unwrap();
        // Validation rejects any child older than its parent.
        let corpus = s.corpus().unwrap();
        assert_eq!(corpus.len(), 30);
    }
}
