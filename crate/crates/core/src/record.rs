//! Canonical post and page records.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::{DateTime, NaiveDate, Utc};

use crate::error::{Error, Result};

/// Likes, comments and shares of a post. Either all three are known or the
/// post only carries a total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reactions {
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
}

impl Reactions {
    pub fn sum(&self) -> u64 {
        self.likes + self.comments + self.shares
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostRecord {
    pub page_id: String,
    pub post_id: String,
    pub timestamp: DateTime<Utc>,
    pub reactions: Option<Reactions>,
    pub total_interactions: u64,
    pub followers_at_posting: Option<u64>,
}

impl PostRecord {
    /// Builds a record from optional component counts, enforcing that the
    /// components are all present or all absent and that they add up to the
    /// total.
    pub fn new(
        page_id: impl Into<String>,
        post_id: impl Into<String>,
        timestamp: DateTime<Utc>,
        components: [Option<u64>; 3],
        total_interactions: u64,
        followers_at_posting: Option<u64>,
    ) -> Result<Self, RejectReason> {
        let reactions = match components {
            [Some(likes), Some(comments), Some(shares)] => {
                let r = Reactions {
                    likes,
                    comments,
                    shares,
                };
                let sum = likes
                    .checked_add(comments)
                    .and_then(|s| s.checked_add(shares));
                if sum != Some(total_interactions) {
                    return Err(RejectReason::ComponentSumMismatch);
                }
                Some(r)
            }
            [None, None, None] => None,
            _ => return Err(RejectReason::PartialComponents),
        };
        Ok(PostRecord {
            page_id: page_id.into(),
            post_id: post_id.into(),
            timestamp,
            reactions,
            total_interactions,
            followers_at_posting,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageMeta {
    pub page_id: String,
    pub name: String,
    pub created_at: NaiveDate,
    pub newsguard_score: Option<f64>,
    pub language: Option<String>,
}

impl PageMeta {
    pub fn validate_score(score: f64) -> Result<f64, RejectReason> {
        if score.is_finite() && (0.0..=100.0).contains(&score) {
            Ok(score)
        } else {
            Err(RejectReason::ScoreOutOfRange)
        }
    }
}

/// Why an input row was quarantined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    ComponentSumMismatch,
    PartialComponents,
    BadTimestamp(String),
    DuplicatePostId(String),
    UnknownPage(String),
    ScoreOutOfRange,
    Malformed(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::ComponentSumMismatch => f.write_str("component sum mismatch"),
            RejectReason::PartialComponents => {
                f.write_str("likes, comments and shares must be all present or all absent")
            }
            RejectReason::BadTimestamp(s) => write!(f, "bad timestamp: {s}"),
            RejectReason::DuplicatePostId(id) => write!(f, "duplicate post_id {id}"),
            RejectReason::UnknownPage(id) => write!(f, "unknown page_id {id}"),
            RejectReason::ScoreOutOfRange => f.write_str("newsguard_score outside [0, 100]"),
            RejectReason::Malformed(s) => write!(f, "malformed row: {s}"),
        }
    }
}

/// A quarantined row. `line` is the 1-based line in the source file, or 0
/// for rejections raised after parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    posts: Vec<PostRecord>,
    pages: BTreeMap<String, PageMeta>,
}

impl Dataset {
    /// Posts sorted by `(page_id, timestamp, post_id)`.
    pub fn posts(&self) -> &[PostRecord] {
        &self.posts
    }

    pub fn pages(&self) -> &BTreeMap<String, PageMeta> {
        &self.pages
    }

    /// Contiguous post slices, one per page, in page-id order.
    pub fn posts_by_page(&self) -> impl Iterator<Item = (&str, &[PostRecord])> {
        self.posts
            .chunk_by(|a, b| a.page_id == b.page_id)
            .map(|chunk| (chunk[0].page_id.as_str(), chunk))
    }

    /// Date of the last post in the dataset.
    pub fn end_date(&self) -> NaiveDate {
        self.posts
            .iter()
            .map(|p| p.timestamp)
            .max()
            .expect("dataset is never empty")
            .date_naive()
    }
}

/// Joins posts to page metadata. Posts of unknown pages and repeated
/// `post_id`s are returned as rejections; the surviving posts are sorted.
pub fn build_dataset(
    posts: Vec<PostRecord>,
    pages: BTreeMap<String, PageMeta>,
) -> Result<(Dataset, Vec<Rejection>)> {
    let mut rejections = Vec::new();
    let mut seen = BTreeSet::new();
    let mut kept = Vec::with_capacity(posts.len());
    for post in posts {
        if !pages.contains_key(&post.page_id) {
            rejections.push(Rejection {
                line: 0,
                reason: RejectReason::UnknownPage(post.page_id.clone()),
            });
        } else if !seen.insert(post.post_id.clone()) {
            rejections.push(Rejection {
                line: 0,
                reason: RejectReason::DuplicatePostId(post.post_id.clone()),
            });
        } else {
            kept.push(post);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoUsableData);
    }
    kept.sort_by(|a, b| {
        (&a.page_id, a.timestamp, &a.post_id).cmp(&(&b.page_id, b.timestamp, &b.post_id))
    });
    Ok((Dataset { posts: kept, pages }, rejections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use chrono::TimeZone;

    fn ts(d: u32, h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2020, 1, d, h, 0, 0).unwrap()
    }

    fn page(id: &str) -> PageMeta {
        PageMeta {
            page_id: id.to_string(),
            name: id.to_string(),
            created_at: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            newsguard_score: None,
            language: None,
        }
    }

    fn post(page: &str, id: &str, t: DateTime<Utc>) -> PostRecord {
        PostRecord::new(page, id, t, [None, None, None], 5, None).unwrap()
    }

    #[test]
    fn component_rules() {
        let t = ts(1, 0);
        let ok = PostRecord::new("p", "1", t, [Some(10), Some(20), Some(30)], 60, None).unwrap();
        assert_eq!(ok.reactions.unwrap().sum(), 60);
        let total_only = PostRecord::new("p", "2", t, [None, None, None], 60, None).unwrap();
        assert!(total_only.reactions.is_none());
        assert_eq!(
            PostRecord::new("p", "3", t, [Some(10), Some(20), Some(30)], 61, None),
            Err(RejectReason::ComponentSumMismatch)
        );
        assert_eq!(
            PostRecord::new("p", "4", t, [Some(10), None, Some(30)], 40, None),
            Err(RejectReason::PartialComponents)
        );
        assert_eq!(RejectReason::ComponentSumMismatch.to_string(), "component sum mismatch");
    }

    #[test]
    fn builds_sorted_dataset() {
        let mut pages = BTreeMap::new();
        pages.insert("a".to_string(), page("a"));
        let posts = alloc::vec![post("a", "3", ts(3, 0)), post("a", "1", ts(1, 0)), post("a", "2", ts(2, 0))];
        let (ds, rej) = build_dataset(posts, pages).unwrap();
        assert!(rej.is_empty());
        let ids: Vec<&str> = ds.posts().iter().map(|p| p.post_id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3"]);
        assert_eq!(ds.end_date(), NaiveDate::from_ymd_opt(2020, 1, 3).unwrap());
    }

    #[test]
    fn unknown_page_only_is_fatal() {
        let pages = BTreeMap::new();
        let posts = alloc::vec![post("x", "1", ts(1, 0))];
        assert_eq!(build_dataset(posts, pages), Err(Error::NoUsableData));
    }

    #[test]
    fn unknown_page_and_duplicates_are_reported() {
        let mut pages = BTreeMap::new();
        pages.insert("a".to_string(), page("a"));
        pages.insert("b".to_string(), page("b"));
        let posts = alloc::vec![
            post("b", "1", ts(1, 0)),
            post("a", "2", ts(1, 0)),
            post("z", "3", ts(1, 0)),
            post("a", "2", ts(2, 0)),
        ];
        let (ds, rej) = build_dataset(posts, pages).unwrap();
        assert_eq!(ds.posts().len(), 2);
        assert_eq!(rej.len(), 2);
        let groups: Vec<(&str, usize)> = ds.posts_by_page().map(|(p, s)| (p, s.len())).collect();
        assert_eq!(groups, [("a", 1), ("b", 1)]);
    }
}
