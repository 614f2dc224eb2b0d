//! Loading and validation of the JSONL engagement corpus.
//!
//! A corpus directory holds five files, one JSON object per line:
//!
//! | file             | fields                                            |
//! |------------------|---------------------------------------------------|
//! | `news.jsonl`     | `news_id`, `label` (`"fake"`/`"real"`), `title?`  |
//! | `tweets.jsonl`   | `tweet_id`, `news_id`, `user_id`, `ts`            |
//! | `retweets.jsonl` | `retweet_id`, `tweet_id`, `user_id`, `ts`         |
//! | `replies.jsonl`  | `reply_id`, `news_id`, `parent_id`, `user_id`, `ts`, `text` |
//! | `users.jsonl`    | `user_id`, `friends`, `bot_score?`                |
//!
//! Unknown fields are ignored. A missing file is treated as empty.
//! Timestamps are integer unix seconds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NEWS_FILE: &str = "news.jsonl";
pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const RETWEETS_FILE: &str = "retweets.jsonl";
pub const REPLIES_FILE: &str = "replies.jsonl";
pub const USERS_FILE: &str = "users.jsonl";

pub const CORPUS_FILES: [&str; 5] = [NEWS_FILE, TWEETS_FILE, RETWEETS_FILE, REPLIES_FILE, USERS_FILE];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed line {line} in {file}: {message}")]
    MalformedLine { file: String, line: usize, message: String },
    #[error("dangling reference ({kind}): {id}")]
    DanglingReference { kind: &'static str, id: String },
    #[error("duplicate id ({kind}): {id}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{kind} {id} has timestamp {ts} earlier than its parent ({parent_ts})")]
    TimestampOrder { kind: &'static str, id: String, ts: i64, parent_ts: i64 },
    #[error("reply {0} does not resolve to a tweet or retweet (cyclic reply chain)")]
    ReplyCycle(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
        }
    }

    pub fn is_fake(self) -> bool {
        self == Label::Fake
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fake" => Ok(Label::Fake),
            "real" => Ok(Label::Real),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsRecord {
    pub news_id: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub news_id: String,
    pub user_id: String,
    pub ts: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetweetRecord {
    pub retweet_id: String,
    /// Root tweet of the cascade this retweet belongs to.
    pub tweet_id: String,
    pub user_id: String,
    pub ts: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyRecord {
    pub reply_id: String,
    pub news_id: String,
    /// A tweet, retweet or reply id of the same news item.
    pub parent_id: String,
    pub user_id: String,
    pub ts: i64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    /// Accounts this user follows. Ids need not resolve.
    #[serde(default)]
    pub friends: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_score: Option<f64>,
}

/// All records of one news item, each collection sorted by `(ts, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsItem {
    pub news: NewsRecord,
    pub tweets: Vec<TweetRecord>,
    pub retweets: Vec<RetweetRecord>,
    pub replies: Vec<ReplyRecord>,
}

impl NewsItem {
    pub fn news_id(&self) -> &str {
        &self.news.news_id
    }

    pub fn label(&self) -> Label {
        self.news.label
    }

    /// Items without a single tweet have no macro network and are skipped by
    /// feature extraction.
    pub fn is_excluded(&self) -> bool {
        self.tweets.is_empty()
    }
}

/// User table keyed by id, with friend lists converted to sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserTable {
    users: BTreeMap<String, UserEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserEntry {
    pub record: UserRecord,
    pub friends: HashSet<String>,
}

static EMPTY_FRIENDS: std::sync::OnceLock<HashSet<String>> = std::sync::OnceLock::new();

impl UserTable {
    pub fn get(&self, user_id: &str) -> Option<&UserRecord> {
        self.users.get(user_id).map(|e| &e.record)
    }

    /// Friend set of a user; unknown users have no friends.
    pub fn friends_of(&self, user_id: &str) -> &HashSet<String> {
        match self.users.get(user_id) {
            Some(e) => &e.friends,
            None => EMPTY_FRIENDS.get_or_init(HashSet::new),
        }
    }

    pub fn bot_score(&self, user_id: &str) -> Option<f64> {
        self.users.get(user_id).and_then(|e| e.record.bot_score)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.values().map(|e| &e.record)
    }
}

/// A validated, indexed engagement corpus. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngagementCorpus {
    items: BTreeMap<String, NewsItem>,
    users: UserTable,
}

/// Raw record collections, in any order, prior to validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusRecords {
    pub news: Vec<NewsRecord>,
    pub tweets: Vec<TweetRecord>,
    pub retweets: Vec<RetweetRecord>,
    pub replies: Vec<ReplyRecord>,
    pub users: Vec<UserRecord>,
}

impl EngagementCorpus {
    /// Validate raw records and index them by news item.
    pub fn from_records(records: CorpusRecords) -> Result<Self, IngestError> {
        let CorpusRecords { news, mut tweets, mut retweets, mut replies, users } = records;

        let mut items: BTreeMap<String, NewsItem> = BTreeMap::new();
        for n in news {
            if items.contains_key(&n.news_id) {
                return Err(IngestError::DuplicateId { kind: "news", id: n.news_id });
            }
            items.insert(
                n.news_id.clone(),
                NewsItem { news: n, tweets: Vec::new(), retweets: Vec::new(), replies: Vec::new() },
            );
        }

        // Tweet, retweet and reply ids share one namespace since reply
        // parents may point at any of them.
        let mut node_owner: HashMap<String, (String, i64)> = HashMap::new();
        let mut claim = |kind: &'static str, id: &str, news_id: &str, ts: i64| {
            if node_owner.contains_key(id) {
                return Err(IngestError::DuplicateId { kind, id: id.to_string() });
            }
            node_owner.insert(id.to_string(), (news_id.to_string(), ts));
            Ok(())
        };

        tweets.sort_by(|a, b| (a.ts, &a.tweet_id).cmp(&(b.ts, &b.tweet_id)));
        let mut tweet_news: HashMap<String, (String, i64)> = HashMap::new();
        for t in &tweets {
            if !items.contains_key(&t.news_id) {
                return Err(IngestError::DanglingReference { kind: "tweet-news", id: t.tweet_id.clone() });
            }
            claim("tweet", &t.tweet_id, &t.news_id, t.ts)?;
            tweet_news.insert(t.tweet_id.clone(), (t.news_id.clone(), t.ts));
        }

        retweets.sort_by(|a, b| (a.ts, &a.retweet_id).cmp(&(b.ts, &b.retweet_id)));
        let mut retweet_news = Vec::with_capacity(retweets.len());
        for r in &retweets {
            let Some((news_id, root_ts)) = tweet_news.get(&r.tweet_id) else {
                return Err(IngestError::DanglingReference { kind: "retweet-tweet", id: r.retweet_id.clone() });
            };
            if r.ts < *root_ts {
                return Err(IngestError::TimestampOrder {
                    kind: "retweet",
                    id: r.retweet_id.clone(),
                    ts: r.ts,
                    parent_ts: *root_ts,
                });
            }
            claim("retweet", &r.retweet_id, news_id, r.ts)?;
            retweet_news.push(news_id.clone());
        }

        replies.sort_by(|a, b| (a.ts, &a.reply_id).cmp(&(b.ts, &b.reply_id)));
        for p in &replies {
            if !items.contains_key(&p.news_id) {
                return Err(IngestError::DanglingReference { kind: "reply-news", id: p.reply_id.clone() });
            }
            claim("reply", &p.reply_id, &p.news_id, p.ts)?;
        }
        for p in &replies {
            match node_owner.get(&p.parent_id) {
                Some((news_id, parent_ts)) if *news_id == p.news_id => {
                    if p.ts < *parent_ts {
                        return Err(IngestError::TimestampOrder {
                            kind: "reply",
                            id: p.reply_id.clone(),
                            ts: p.ts,
                            parent_ts: *parent_ts,
                        });
                    }
                }
                _ => return Err(IngestError::DanglingReference { kind: "reply-parent", id: p.reply_id.clone() }),
            }
        }
        check_reply_chains(&replies)?;

        let mut user_map = BTreeMap::new();
        for u in users {
            if user_map.contains_key(&u.user_id) {
                return Err(IngestError::DuplicateId { kind: "user", id: u.user_id });
            }
            let friends = u.friends.iter().cloned().collect();
            user_map.insert(u.user_id.clone(), UserEntry { record: u, friends });
        }

        for t in tweets {
            items.get_mut(&t.news_id).expect("checked").tweets.push(t);
        }
        for (r, news_id) in retweets.into_iter().zip(retweet_news) {
            items.get_mut(&news_id).expect("checked").retweets.push(r);
        }
        for p in replies {
            items.get_mut(&p.news_id).expect("checked").replies.push(p);
        }

        Ok(Self { items, users: UserTable { users: user_map } })
    }

    pub fn item(&self, news_id: &str) -> Option<&NewsItem> {
        self.items.get(news_id)
    }

    /// Items in ascending `news_id` order.
    pub fn items(&self) -> impl Iterator<Item = &NewsItem> {
        self.items.values()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn users(&self) -> &UserTable {
        &self.users
    }

    /// Flatten back into record collections in canonical order.
    pub fn to_records(&self) -> CorpusRecords {
        let mut out = CorpusRecords::default();
        for item in self.items.values() {
            out.news.push(item.news.clone());
            out.tweets.extend(item.tweets.iter().cloned());
            out.retweets.extend(item.retweets.iter().cloned());
            out.replies.extend(item.replies.iter().cloned());
        }
        out.users = self.users.records().cloned().collect();
        out
    }
}

fn check_reply_chains(replies: &[ReplyRecord]) -> Result<(), IngestError> {
    let parent: HashMap<&str, &str> = replies.iter().map(|p| (p.reply_id.as_str(), p.parent_id.as_str())).collect();
    let mut resolved: HashSet<&str> = HashSet::new();
    for p in replies {
        let mut chain = Vec::new();
        let mut cur = p.reply_id.as_str();
        loop {
            if resolved.contains(cur) {
                break;
            }
            let Some(&next) = parent.get(cur) else {
                break;
            };
            if chain.contains(&cur) {
                return Err(IngestError::ReplyCycle(p.reply_id.clone()));
            }
            chain.push(cur);
            cur = next;
        }
        resolved.extend(chain);
    }
    Ok(())
}

fn read_jsonl<T: serde::de::DeserializeOwned>(dir: &Path, file: &str) -> Result<Vec<T>, IngestError> {
    let path = dir.join(file);
    let handle = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(IngestError::Io { path, source }),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(handle).lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io { path: path.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| IngestError::MalformedLine {
            file: file.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Read the five raw JSONL files of a corpus directory without validation.
pub fn read_records(data_dir: &Path) -> Result<CorpusRecords, IngestError> {
    let ((news, tweets), (retweets, (replies, users))) = rayon::join(
        || (read_jsonl(data_dir, NEWS_FILE), read_jsonl(data_dir, TWEETS_FILE)),
        || {
            (
                read_jsonl(data_dir, RETWEETS_FILE),
                rayon::join(|| read_jsonl(data_dir, REPLIES_FILE), || read_jsonl(data_dir, USERS_FILE)),
            )
        },
    );
    Ok(CorpusRecords { news: news?, tweets: tweets?, retweets: retweets?, replies: replies?, users: users? })
}

/// Load and validate a corpus directory.
pub fn load_corpus(data_dir: &Path) -> Result<EngagementCorpus, IngestError> {
    EngagementCorpus::from_records(read_records(data_dir)?)
}

fn write_jsonl<T: Serialize>(dir: &Path, file: &str, rows: &[T]) -> Result<(), IngestError> {
    let path = dir.join(file);
    let io_err = |source| IngestError::Io { path: path.clone(), source };
    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| io_err(e.into()))?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Write records as the five JSONL files, creating `dir` if needed.
pub fn write_records(dir: &Path, records: &CorpusRecords) -> Result<(), IngestError> {
    std::fs::create_dir_all(dir).map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
    write_jsonl(dir, NEWS_FILE, &records.news)?;
    write_jsonl(dir, TWEETS_FILE, &records.tweets)?;
    write_jsonl(dir, RETWEETS_FILE, &records.retweets)?;
    write_jsonl(dir, REPLIES_FILE, &records.replies)?;
    write_jsonl(dir, USERS_FILE, &records.users)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemReport {
    pub news_id: String,
    pub label: Label,
    pub tweets: usize,
    pub retweets: usize,
    pub replies: usize,
    pub unique_users: usize,
    /// No tweets, hence no propagation network.
    pub excluded: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub items: Vec<ItemReport>,
}

impl ValidationReport {
    pub fn excluded(&self) -> impl Iterator<Item = &ItemReport> {
        self.items.iter().filter(|r| r.excluded)
    }

    pub fn included_count(&self) -> usize {
        self.items.iter().filter(|r| !r.excluded).count()
    }
}

pub fn validate_corpus(corpus: &EngagementCorpus) -> ValidationReport {
    let items = corpus
        .items()
        .map(|item| {
            let users: HashSet<&str> = item
                .tweets
                .iter()
                .map(|t| t.user_id.as_str())
                .chain(item.retweets.iter().map(|r| r.user_id.as_str()))
                .chain(item.replies.iter().map(|p| p.user_id.as_str()))
                .collect();
            ItemReport {
                news_id: item.news_id().to_string(),
                label: item.label(),
                tweets: item.tweets.len(),
                retweets: item.retweets.len(),
                replies: item.replies.len(),
                unique_users: users.len(),
                excluded: item.is_excluded(),
            }
        })
        .collect();
    ValidationReport { items }
}
