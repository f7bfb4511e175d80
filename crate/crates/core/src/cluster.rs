//! Online clustering of key frames into topics, and the run-length topic
//! notation.
//!
//! Board and sheet frames are clustered in a single pass. Each incoming
//! frame is compared with the most recent frame of each same-media topic,
//! most recently extended topic first; the first match extends that topic
//! and makes it the most recent, and a frame that matches nothing starts a
//! new topic. Other media types never take part in matching and only show
//! up in the run notation under reserved labels.

use serde::{Deserialize, Serialize};

use crate::classifier::MediaType;

pub type FrameId = u64;

/// Decides whether `newer` elaborates the content of `older`.
pub trait MatchOracle {
    fn matches(&mut self, older: FrameId, newer: FrameId) -> bool;
}

impl<F: FnMut(FrameId, FrameId) -> bool> MatchOracle for F {
    fn matches(&mut self, older: FrameId, newer: FrameId) -> bool {
        self(older, newer)
    }
}

pub const PODIUM_LABEL: &str = "X";
pub const COMPUTER_LABEL: &str = "Y";
pub const OTHER_LABEL: &str = "Z";

const TOPIC_LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVW";
const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Label of the `n`-th created topic: A..W, then AA, AB, ... so clustered
/// topics never collide with the reserved X/Y/Z labels.
pub fn topic_label(n: usize) -> String {
    if n < TOPIC_LETTERS.len() {
        return (TOPIC_LETTERS[n] as char).to_string();
    }
    // bijective base-26 starting at "AA"
    let mut k = n - TOPIC_LETTERS.len() + 27;
    let mut digits = Vec::new();
    while k > 0 {
        k -= 1;
        digits.push(ALPHABET[k % 26]);
        k /= 26;
    }
    digits.reverse();
    String::from_utf8(digits).expect("ascii")
}

/// Reserved run-notation label for frames that are not clustered.
pub fn pseudo_label(media: MediaType) -> &'static str {
    match media {
        MediaType::Podium => PODIUM_LABEL,
        MediaType::Computer => COMPUTER_LABEL,
        _ => OTHER_LABEL,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub label: String,
    pub media: MediaType,
    pub frame_ids: Vec<FrameId>,
}

impl Topic {
    pub fn most_recent_frame(&self) -> FrameId {
        *self.frame_ids.last().expect("topics are never empty")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicList {
    /// Most recently extended topic first.
    pub topics: Vec<Topic>,
}

impl TopicList {
    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn by_label(&self, label: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.label == label)
    }

    /// Topics in creation order (A, B, ...).
    pub fn in_creation_order(&self) -> Vec<&Topic> {
        let mut v: Vec<&Topic> = self.topics.iter().collect();
        v.sort_by_key(|t| t.frame_ids[0]);
        v
    }
}

/// Per-frame accounting of oracle calls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameOutcome {
    pub frame_id: FrameId,
    pub label: Option<usize>,
    pub match_calls: u64,
    pub new_topic: bool,
}

/// Incremental clusterer; feeding frames one at a time gives the same result
/// as clustering the whole list.
#[derive(Clone, Debug, Default)]
pub struct TopicClusterer {
    topics: Vec<Topic>,
    /// Indices into `topics`, most recent first.
    recency: Vec<usize>,
    outcomes: Vec<FrameOutcome>,
}

impl TopicClusterer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a board or sheet frame and returns the index of its topic in
    /// creation order.
    pub fn push(&mut self, frame_id: FrameId, media: MediaType, oracle: &mut impl MatchOracle) -> usize {
        debug_assert!(media.is_clusterable());
        let mut calls = 0u64;
        let mut found = None;
        for (pos, &t) in self.recency.iter().enumerate() {
            let topic = &self.topics[t];
            if topic.media != media {
                continue;
            }
            calls += 1;
            if oracle.matches(topic.most_recent_frame(), frame_id) {
                found = Some((pos, t));
                break;
            }
        }
        let (idx, new_topic) = match found {
            Some((pos, t)) => {
                self.topics[t].frame_ids.push(frame_id);
                self.recency.remove(pos);
                self.recency.insert(0, t);
                (t, false)
            }
            None => {
                let t = self.topics.len();
                self.topics.push(Topic {
                    label: topic_label(t),
                    media,
                    frame_ids: vec![frame_id],
                });
                self.recency.insert(0, t);
                (t, true)
            }
        };
        self.outcomes.push(FrameOutcome {
            frame_id,
            label: Some(idx),
            match_calls: calls,
            new_topic,
        });
        idx
    }

    pub fn outcomes(&self) -> &[FrameOutcome] {
        &self.outcomes
    }

    pub fn topic_count(&self) -> usize {
        self.topics.len()
    }

    pub fn topic(&self, idx: usize) -> &Topic {
        &self.topics[idx]
    }

    /// Topics, most recently extended first.
    pub fn by_recency(&self) -> impl Iterator<Item = &Topic> {
        self.recency.iter().map(|&t| &self.topics[t])
    }

    pub fn topic_list(&self) -> TopicList {
        TopicList {
            topics: self.recency.iter().map(|&t| self.topics[t].clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterRun {
    pub topics: TopicList,
    /// One label per input frame, in video order.
    pub labels: Vec<String>,
    pub outcomes: Vec<FrameOutcome>,
}

impl ClusterRun {
    pub fn total_match_calls(&self) -> u64 {
        self.outcomes.iter().map(|o| o.match_calls).sum()
    }
}

/// Clusters frames in video order. Non-clusterable frames get their reserved
/// pseudo label and cost no oracle calls.
pub fn cluster_frames(frames: &[(FrameId, MediaType)], oracle: &mut impl MatchOracle) -> ClusterRun {
    let mut c = TopicClusterer::new();
    let mut labels = Vec::with_capacity(frames.len());
    for &(id, media) in frames {
        if media.is_clusterable() {
            let t = c.push(id, media, oracle);
            labels.push(c.topic(t).label.clone());
        } else {
            labels.push(pseudo_label(media).to_string());
        }
    }
    ClusterRun {
        topics: c.topic_list(),
        labels,
        outcomes: c.outcomes.clone(),
    }
}

/// Run-length notation: maximal runs of equal labels as `label^len`,
/// space separated.
pub fn encode_runs<S: AsRef<str>>(labels: &[S]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        let l = labels[i].as_ref();
        let mut j = i + 1;
        while j < labels.len() && labels[j].as_ref() == l {
            j += 1;
        }
        out.push(format!("{l}^{}", j - i));
        i = j;
    }
    out.join(" ")
}

/// Inverse of [`encode_runs`].
pub fn decode_runs(s: &str) -> Result<Vec<String>, String> {
    let mut labels = Vec::new();
    for tok in s.split_whitespace() {
        let (label, count) = tok
            .split_once('^')
            .ok_or_else(|| format!("token {tok:?} lacks '^'"))?;
        let n: usize = count.parse().map_err(|_| format!("bad count in {tok:?}"))?;
        if label.is_empty() || n == 0 {
            return Err(format!("bad token {tok:?}"));
        }
        labels.extend(std::iter::repeat_n(label.to_string(), n));
    }
    Ok(labels)
}
