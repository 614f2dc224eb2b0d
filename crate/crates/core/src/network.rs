//! Macro (retweet) and micro (reply) propagation networks.
//!
//! Retweet records only name the cascade's original tweet, never the retweet
//! that was actually shared. The parent of a retweet is therefore inferred
//! from the follower graph: a user who retweets after one of their friends
//! most likely saw the friend's retweet. Among several candidates the latest
//! prior friend retweet wins; without any, the retweet hangs off the original
//! tweet.
//!
//! Level convention: news root 0, tweets 1, retweets 2 and deeper.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::ingestion::{Label, NewsItem, ReplyRecord, RetweetRecord, UserTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("news item {0} has no tweets")]
    EmptyItem(String),
    #[error("news item has no micro network")]
    NoMicroNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    NewsRoot,
    Tweet,
    Retweet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroNode {
    pub node_id: String,
    pub kind: NodeKind,
    pub user_id: Option<String>,
    pub ts: Option<i64>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub level: u32,
    /// Index of the tweet heading this node's cascade (`None` for the root).
    pub cascade: Option<usize>,
}

impl MacroNode {
    /// Timestamp of a tweet or retweet node.
    pub fn time(&self) -> i64 {
        self.ts.expect("tweet/retweet nodes carry a timestamp")
    }
}

/// Rooted retweet tree. Node 0 is the news root, tweets follow in `(ts, id)`
/// order, then retweets in `(ts, id)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroNetwork {
    nodes: Vec<MacroNode>,
    tweet_count: usize,
}

impl MacroNetwork {
    pub const ROOT: usize = 0;

    pub fn nodes(&self) -> &[MacroNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &MacroNode {
        &self.nodes[idx]
    }

    /// Tweet node indices, i.e. the cascade roots.
    pub fn tweets(&self) -> std::ops::Range<usize> {
        1..1 + self.tweet_count
    }

    pub fn retweets(&self) -> std::ops::Range<usize> {
        1 + self.tweet_count..self.nodes.len()
    }

    pub fn tweet_count(&self) -> usize {
        self.tweet_count
    }

    pub fn retweet_count(&self) -> usize {
        self.nodes.len() - 1 - self.tweet_count
    }

    pub fn index_of(&self, node_id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.node_id == node_id)
    }

    /// `(parent_id, child_id)` pairs in node order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.nodes.iter().filter_map(|n| n.parent.map(|p| (self.nodes[p].node_id.clone(), n.node_id.clone()))).collect()
    }

    /// Depth in edges below the cascade's tweet and number of nodes (tweet
    /// included) for every cascade, indexed like [`Self::tweets`].
    pub fn cascade_shapes(&self) -> Vec<(u32, usize)> {
        let mut shapes = vec![(0, 0); self.tweet_count];
        for n in &self.nodes[1..] {
            let slot = &mut shapes[n.cascade.expect("non-root nodes belong to a cascade") - 1];
            slot.0 = slot.0.max(n.level - 1);
            slot.1 += 1;
        }
        shapes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplyParent {
    /// The tweet or retweet heading the micro tree.
    Root,
    Reply(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplyNode {
    pub reply_id: String,
    pub user_id: String,
    pub ts: i64,
    pub text: String,
    pub parent: ReplyParent,
    pub children: Vec<usize>,
    /// Replies on the path from the root to this node, itself included.
    pub depth: u32,
}

/// Conversation tree under one tweet or retweet.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroTree {
    /// Macro node that received the replies.
    pub root: usize,
    pub root_id: String,
    pub root_ts: i64,
    /// Tweet heading the macro cascade of `root`.
    pub cascade: usize,
    /// Replies in `(ts, id)` order.
    pub replies: Vec<ReplyNode>,
}

impl MicroTree {
    /// First-level replies, in `(ts, id)` order.
    pub fn first_level(&self) -> impl Iterator<Item = &ReplyNode> {
        self.replies.iter().filter(|r| r.parent == ReplyParent::Root)
    }

    /// Nodes on the longest root-to-leaf path, root counted.
    pub fn node_depth(&self) -> u32 {
        1 + self.replies.iter().map(|r| r.depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.replies.len()
    }

    pub fn parent_ts(&self, reply: &ReplyNode) -> i64 {
        match reply.parent {
            ReplyParent::Root => self.root_ts,
            ReplyParent::Reply(p) => self.replies[p].ts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationNetwork {
    pub news_id: String,
    pub label: Label,
    pub macro_net: MacroNetwork,
    pub micro: Vec<MicroTree>,
}

impl PropagationNetwork {
    pub fn build(item: &NewsItem, users: &UserTable) -> Result<Self, NetworkError> {
        let macro_net = build_macro_network(item, users)?;
        let micro = build_micro_network(&macro_net, &item.replies);
        Ok(Self { news_id: item.news_id().to_string(), label: item.label(), macro_net, micro })
    }

    /// Edge lists for external inspection.
    pub fn edge_dump(&self) -> EdgeDump {
        let micro_edges = self
            .micro
            .iter()
            .flat_map(|tree| {
                tree.replies.iter().map(move |r| {
                    let parent = match r.parent {
                        ReplyParent::Root => tree.root_id.clone(),
                        ReplyParent::Reply(p) => tree.replies[p].reply_id.clone(),
                    };
                    (parent, r.reply_id.clone())
                })
            })
            .collect();
        EdgeDump { news_id: self.news_id.clone(), macro_edges: self.macro_net.edges(), micro_edges }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDump {
    pub news_id: String,
    pub macro_edges: Vec<(String, String)>,
    pub micro_edges: Vec<(String, String)>,
}

/// Parent of a retweet: the latest strictly-earlier retweet of the same
/// cascade authored by a friend (ties on `ts` go to the greater id), or the
/// cascade's original tweet when there is none.
pub fn infer_retweet_parent(rt: &RetweetRecord, prior_retweets: &[RetweetRecord], friends: &HashSet<String>) -> String {
    prior_retweets
        .iter()
        .filter(|p| p.tweet_id == rt.tweet_id && p.ts < rt.ts && friends.contains(&p.user_id))
        .max_by(|a, b| (a.ts, &a.retweet_id).cmp(&(b.ts, &b.retweet_id)))
        .map(|p| p.retweet_id.clone())
        .unwrap_or_else(|| rt.tweet_id.clone())
}

pub fn build_macro_network(item: &NewsItem, users: &UserTable) -> Result<MacroNetwork, NetworkError> {
    if item.tweets.is_empty() {
        return Err(NetworkError::EmptyItem(item.news_id().to_string()));
    }
    let mut nodes = Vec::with_capacity(1 + item.tweets.len() + item.retweets.len());
    nodes.push(MacroNode {
        node_id: item.news_id().to_string(),
        kind: NodeKind::NewsRoot,
        user_id: None,
        ts: None,
        parent: None,
        children: Vec::new(),
        level: 0,
        cascade: None,
    });
    let mut index: HashMap<&str, usize> = HashMap::new();
    for t in &item.tweets {
        let idx = nodes.len();
        index.insert(&t.tweet_id, idx);
        nodes[MacroNetwork::ROOT].children.push(idx);
        nodes.push(MacroNode {
            node_id: t.tweet_id.clone(),
            kind: NodeKind::Tweet,
            user_id: Some(t.user_id.clone()),
            ts: Some(t.ts),
            parent: Some(MacroNetwork::ROOT),
            children: Vec::new(),
            level: 1,
            cascade: Some(idx),
        });
    }

    // Per-cascade retweets seen so far, in (ts, id) order.
    let mut seen: HashMap<&str, Vec<RetweetRecord>> = HashMap::new();
    for rt in &item.retweets {
        let priors = seen.entry(rt.tweet_id.as_str()).or_default();
        let parent_id = infer_retweet_parent(rt, priors, users.friends_of(&rt.user_id));
        priors.push(rt.clone());

        let parent = index[parent_id.as_str()];
        let idx = nodes.len();
        index.insert(&rt.retweet_id, idx);
        nodes[parent].children.push(idx);
        let (level, cascade) = (nodes[parent].level + 1, nodes[parent].cascade);
        nodes.push(MacroNode {
            node_id: rt.retweet_id.clone(),
            kind: NodeKind::Retweet,
            user_id: Some(rt.user_id.clone()),
            ts: Some(rt.ts),
            parent: Some(parent),
            children: Vec::new(),
            level,
            cascade,
        });
    }
    Ok(MacroNetwork { nodes, tweet_count: item.tweets.len() })
}

/// One conversation tree per tweet/retweet with at least one reply, ordered
/// by macro node index. Replies must resolve to nodes of `macro_net`.
pub fn build_micro_network(macro_net: &MacroNetwork, replies: &[ReplyRecord]) -> Vec<MicroTree> {
    let by_id: HashMap<&str, &ReplyRecord> = replies.iter().map(|r| (r.reply_id.as_str(), r)).collect();
    let macro_index: HashMap<&str, usize> =
        macro_net.nodes().iter().enumerate().skip(1).map(|(i, n)| (n.node_id.as_str(), i)).collect();

    // Macro root of every reply, memoised along each chain.
    let mut root_of: HashMap<&str, usize> = HashMap::new();
    for r in replies {
        let mut chain = vec![r.reply_id.as_str()];
        let mut cur = r.parent_id.as_str();
        let root = loop {
            if let Some(&m) = macro_index.get(cur) {
                break m;
            }
            if let Some(&m) = root_of.get(cur) {
                break m;
            }
            chain.push(cur);
            cur = by_id.get(cur).map(|p| p.parent_id.as_str()).expect("reply parents resolve after ingestion");
        };
        for id in chain {
            root_of.insert(id, root);
        }
    }

    let mut grouped: std::collections::BTreeMap<usize, Vec<&ReplyRecord>> = Default::default();
    for r in replies {
        grouped.entry(root_of[r.reply_id.as_str()]).or_default().push(r);
    }

    grouped
        .into_iter()
        .map(|(root, records)| {
            let local: HashMap<&str, usize> =
                records.iter().enumerate().map(|(i, r)| (r.reply_id.as_str(), i)).collect();
            let mut nodes: Vec<ReplyNode> = records
                .iter()
                .map(|r| ReplyNode {
                    reply_id: r.reply_id.clone(),
                    user_id: r.user_id.clone(),
                    ts: r.ts,
                    text: r.text.clone(),
                    parent: match local.get(r.parent_id.as_str()) {
                        Some(&p) => ReplyParent::Reply(p),
                        None => ReplyParent::Root,
                    },
                    children: Vec::new(),
                    depth: 0,
                })
                .collect();
            for i in 0..nodes.len() {
                if let ReplyParent::Reply(p) = nodes[i].parent {
                    nodes[p].children.push(i);
                }
            }
            // Depths top-down; a parent may sort after its child on equal ts.
            let mut stack: Vec<(usize, u32)> =
                nodes.iter().enumerate().filter(|(_, n)| n.parent == ReplyParent::Root).map(|(i, _)| (i, 1)).collect();
            while let Some((i, d)) = stack.pop() {
                nodes[i].depth = d;
                stack.extend(nodes[i].children.iter().map(|&c| (c, d + 1)));
            }
            let root_node = macro_net.node(root);
            MicroTree {
                root,
                root_id: root_node.node_id.clone(),
                root_ts: root_node.time(),
                cascade: root_node.cascade.expect("replies attach to tweets or retweets"),
                replies: nodes,
            }
        })
        .collect()
}

/// Cascade whose retweet subtree is deepest; ties go to the larger cascade,
/// then the earlier tweet, then the smaller id.
pub fn deepest_macro_cascade(net: &MacroNetwork) -> usize {
    let shapes = net.cascade_shapes();
    net.tweets()
        .min_by(|&a, &b| {
            let ((da, sa), (db, sb)) = (shapes[a - 1], shapes[b - 1]);
            let (na, nb) = (net.node(a), net.node(b));
            db.cmp(&da).then(sb.cmp(&sa)).then(na.time().cmp(&nb.time())).then(na.node_id.cmp(&nb.node_id))
        })
        .expect("network has at least one tweet")
}

/// Conversation tree with the longest root-to-leaf path (counted in nodes),
/// using the same tie-break chain as [`deepest_macro_cascade`].
pub fn deepest_micro_cascade(forest: &[MicroTree]) -> Result<&MicroTree, NetworkError> {
    forest
        .iter()
        .min_by(|a, b| {
            b.node_depth()
                .cmp(&a.node_depth())
                .then(b.size().cmp(&a.size()))
                .then(a.root_ts.cmp(&b.root_ts))
                .then(a.root_id.cmp(&b.root_id))
        })
        .ok_or(NetworkError::NoMicroNetwork)
}
