use std::collections::{HashMap, HashSet};

use hpnf::ingestion::{load_corpus, write_records, CORPUS_FILES};
use hpnf::network::PropagationNetwork;
use hpnf::synth::{generate_corpus, preset_params, GenParams, PresetKind, SynthOptions, POSITIVE_PHRASES};

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want
}

#[test]
fn empirical_means_track_parameters() {
    let p: GenParams = preset_params(PresetKind::FakeLike, 2024);
    let n_items = 2600;
    let s = generate_corpus(&p, &p, n_items, 0, SynthOptions::default()).unwrap();
    let r = &s.records;
    assert!(r.tweets.len() >= 10_000, "{} cascades", r.tweets.len());

    // Cascades per item: max(1, Poisson(m)) has mean m + P(0).
    let per_item = r.tweets.len() as f64 / n_items as f64;
    assert!(within(per_item, p.cascades_mean + (-p.cascades_mean).exp(), 0.05), "{per_item}");

    // Offspring of nodes above the depth cap.
    let mut children: HashMap<&str, usize> = HashMap::new();
    let mut hops: HashMap<&str, u32> = HashMap::new();
    for edges in s.truth.values() {
        for (parent, child) in edges {
            let h = hops.get(parent.as_str()).map_or(0, |h| h + 1);
            hops.insert(child, h);
            if hops.contains_key(parent.as_str()) {
                *children.entry(parent).or_default() += 1;
            }
        }
    }
    let eligible: Vec<&&str> = hops.iter().filter(|(_, h)| **h < p.max_depth).map(|(k, _)| k).collect();
    let total: usize = eligible.iter().map(|k| children.get(**k).copied().unwrap_or(0)).sum();
    let offspring = total as f64 / eligible.len() as f64;
    assert!(within(offspring, p.retweet_offspring_mean, 0.05), "{offspring}");

    // Delays are floored exponentials, plus one second for retweets.
    let ts: HashMap<&str, i64> = r
        .tweets
        .iter()
        .map(|t| (t.tweet_id.as_str(), t.ts))
        .chain(r.retweets.iter().map(|t| (t.retweet_id.as_str(), t.ts)))
        .collect();
    let mut delays = Vec::new();
    for edges in s.truth.values() {
        for (parent, child) in edges {
            if let Some(pt) = ts.get(parent.as_str()) {
                delays.push((ts[child.as_str()] - pt - 1) as f64);
            }
        }
    }
    let mean_delay = delays.iter().sum::<f64>() / delays.len() as f64;
    assert!(within(mean_delay + 0.5, p.retweet_delay_mean_s, 0.05), "{mean_delay}");

    let mut gaps = Vec::new();
    let mut by_news: HashMap<&str, Vec<i64>> = HashMap::new();
    for t in &r.tweets {
        by_news.entry(&t.news_id).or_default().push(t.ts);
    }
    for v in by_news.values_mut() {
        v.sort();
        gaps.extend(v.windows(2).map(|w| (w[1] - w[0]) as f64));
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(within(mean_gap + 0.5, p.tweet_interarrival_mean_s, 0.05), "{mean_gap}");

    // Reply threads, reply sentiment and bots.
    let replied: HashSet<&str> = r.replies.iter().map(|x| x.parent_id.as_str()).collect();
    let macro_nodes = r.tweets.len() + r.retweets.len();
    let threaded = ts.keys().filter(|k| replied.contains(*k)).count() as f64 / macro_nodes as f64;
    assert!(within(threaded, p.reply_prob, 0.05), "{threaded}");
    let positive = r.replies.iter().filter(|x| POSITIVE_PHRASES.contains(&x.text.as_str())).count() as f64
        / r.replies.len() as f64;
    assert!(within(positive, p.positive_reply_prob, 0.05), "{positive}");
    let bot_scores: HashMap<&str, Option<f64>> = r.users.iter().map(|u| (u.user_id.as_str(), u.bot_score)).collect();
    let bots = r.retweets.iter().filter(|x| bot_scores[x.user_id.as_str()] == Some(0.9)).count() as f64
        / r.retweets.len() as f64;
    assert!(within(bots, p.bot_fraction, 0.05), "{bots}");
}

#[test]
fn same_seed_gives_identical_files() {
    let f = preset_params(PresetKind::FakeLike, 7);
    let r = preset_params(PresetKind::RealLike, 7);
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs {
        let s = generate_corpus(&f, &r, 40, 40, SynthOptions { confound: true }).unwrap();
        write_records(d.path(), &s.records).unwrap();
    }
    for file in CORPUS_FILES {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let reloaded = load_corpus(dirs[0].path()).unwrap();
    assert_eq!(reloaded.len(), 80);
}

#[test]
fn parallel_generation_matches_serial() {
    let f = preset_params(PresetKind::FakeLike, 13);
    let r = preset_params(PresetKind::RealLike, 13);
    let par = generate_corpus(&f, &r, 30, 30, SynthOptions::default()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| generate_corpus(&f, &r, 30, 30, SynthOptions::default()).unwrap());
    assert_eq!(par, serial);
}

#[test]
fn different_seeds_differ() {
    let a = preset_params(PresetKind::FakeLike, 1);
    let b = preset_params(PresetKind::FakeLike, 2);
    let x = generate_corpus(&a, &a, 10, 0, SynthOptions::default()).unwrap();
    let y = generate_corpus(&b, &b, 10, 0, SynthOptions::default()).unwrap();
    assert_ne!(x.records, y.records);
}

#[test]
fn reconstruction_recovers_truth_under_confounding() {
    let f = preset_params(PresetKind::FakeLike, 31);
    let r = preset_params(PresetKind::RealLike, 31);
    let s = generate_corpus(&f, &r, 50, 50, SynthOptions { confound: true }).unwrap();
    let corpus = s.corpus().unwrap();
    let mut confounded = 0;
    for item in corpus.items() {
        let net = PropagationNetwork::build(item, corpus.users()).unwrap();
        let mut got = net.macro_net.edges();
        let mut want = s.truth[item.news_id()].clone();
        got.sort();
        want.sort();
        assert_eq!(got, want, "{}", item.news_id());
        confounded += item.retweets.iter().filter(|rt| corpus.users().friends_of(&rt.user_id).len() > 1).count();
    }
    assert!(confounded > 100, "{confounded}");
}
