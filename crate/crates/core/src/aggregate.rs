//! Per-page windowed series.
//!
//! Engagement of a window is the sum of the total interactions of its posts.
//! Follower counts are not summed: each window keeps one observed value, the
//! "representative point" picked by [`select_followers`].

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{Days, NaiveDate};

use crate::calendar::{window_of, Timescale, Window};
use crate::record::{Dataset, PostRecord};

/// Which end of a quarter supplies the representative follower count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum QuarterAnchor {
    #[default]
    Latest,
    Earliest,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FollowerRule {
    pub quarter: QuarterAnchor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowStat {
    pub window: Window,
    pub engagement: u64,
    pub mean_engagement: f64,
    pub post_count: u64,
    pub followers: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedSeries {
    pub page_id: String,
    pub timescale: Timescale,
    /// Non-empty windows, strictly increasing by start date.
    pub windows: Vec<WindowStat>,
}

impl AggregatedSeries {
    pub fn total_engagement(&self) -> u64 {
        self.windows.iter().map(|w| w.engagement).sum()
    }

    pub fn max_followers(&self) -> Option<u64> {
        self.windows.iter().filter_map(|w| w.followers).max()
    }
}

/// Rolls one page's posts into windows at `scale`. Windows without posts are
/// omitted.
pub fn aggregate_engagement(
    page_id: &str,
    posts: &[PostRecord],
    scale: Timescale,
    rule: FollowerRule,
) -> AggregatedSeries {
    let mut buckets: BTreeMap<Window, Vec<&PostRecord>> = BTreeMap::new();
    for post in posts {
        debug_assert_eq!(post.page_id, page_id);
        buckets.entry(window_of(post.timestamp, scale)).or_default().push(post);
    }
    let windows = buckets
        .into_iter()
        .map(|(window, members)| {
            let engagement: u64 = members.iter().map(|p| p.total_interactions).sum();
            let post_count = members.len() as u64;
            WindowStat {
                window,
                engagement,
                mean_engagement: engagement as f64 / post_count as f64,
                post_count,
                followers: select_followers(&members, &window, rule),
            }
        })
        .collect();
    AggregatedSeries {
        page_id: page_id.to_string(),
        timescale: scale,
        windows,
    }
}

/// Picks the follower count observed at the window's representative point:
/// the earliest observation for days and weeks, the observation dated
/// closest to the 15th for months (earlier date wins ties), and the latest
/// (or, by `rule`, earliest) observation for quarters.
pub fn select_followers(
    posts: &[&PostRecord],
    window: &Window,
    rule: FollowerRule,
) -> Option<u64> {
    let observed = posts.iter().filter(|p| p.followers_at_posting.is_some());
    let chosen = match window.timescale {
        Timescale::Daily | Timescale::Weekly => observed.min_by_key(|p| (p.timestamp, &p.post_id)),
        Timescale::Monthly => {
            let centre = window.start + Days::new(14);
            observed.min_by_key(|p| {
                let date = p.timestamp.date_naive();
                (distance_in_days(date, centre), p.timestamp, &p.post_id)
            })
        }
        Timescale::Quarterly => match rule.quarter {
            QuarterAnchor::Latest => observed.max_by_key(|p| (p.timestamp, &p.post_id)),
            QuarterAnchor::Earliest => observed.min_by_key(|p| (p.timestamp, &p.post_id)),
        },
    };
    chosen.and_then(|p| p.followers_at_posting)
}

fn distance_in_days(a: NaiveDate, b: NaiveDate) -> i64 {
    (a - b).num_days().abs()
}

/// Aggregates every page of the dataset independently.
pub fn aggregate_dataset(
    ds: &Dataset,
    scale: Timescale,
    rule: FollowerRule,
) -> BTreeMap<String, AggregatedSeries> {
    ds.posts_by_page()
        .map(|(page, posts)| (page.to_string(), aggregate_engagement(page, posts, scale, rule)))
        .collect()
}
