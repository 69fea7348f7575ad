//! Reliability labels and the matched reliable sample.

mod assign;

pub use assign::{euclidean, match_cohorts, MatchResult, Protocol};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use libm::sqrt;

use crate::aggregate::AggregatedSeries;
use crate::error::Result;
use crate::record::PageMeta;

pub const RELIABLE_THRESHOLD: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reliability {
    Questionable,
    Reliable,
}

impl Reliability {
    pub fn from_score(score: f64) -> Self {
        if score >= RELIABLE_THRESHOLD {
            Reliability::Reliable
        } else {
            Reliability::Questionable
        }
    }
}

impl fmt::Display for Reliability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reliability::Questionable => "questionable",
            Reliability::Reliable => "reliable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityLabel {
    pub page_id: String,
    pub score: f64,
    pub label: Reliability,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labeling {
    pub labels: Vec<ReliabilityLabel>,
    /// Pages without a score.
    pub unscored: Vec<String>,
}

impl Labeling {
    pub fn count(&self, label: Reliability) -> usize {
        self.labels.iter().filter(|l| l.label == label).count()
    }

    pub fn ids(&self, label: Reliability) -> impl Iterator<Item = &str> {
        self.labels.iter().filter(move |l| l.label == label).map(|l| l.page_id.as_str())
    }
}

pub fn label_pages<'a>(pages: impl IntoIterator<Item = &'a PageMeta>) -> Labeling {
    let mut out = Labeling::default();
    for page in pages {
        match page.newsguard_score {
            Some(score) => out.labels.push(ReliabilityLabel {
                page_id: page.page_id.clone(),
                score,
                label: Reliability::from_score(score),
            }),
            None => out.unscored.push(page.page_id.clone()),
        }
    }
    out
}

/// `[max observed followers, days from creation to end_date]`, or `None`
/// when the series holds no follower observation.
pub fn feature_vector(page: &PageMeta, series: &AggregatedSeries, end_date: NaiveDate) -> Option<[f64; 2]> {
    let followers = series.max_followers()?;
    let lifespan = (end_date - page.created_at).num_days();
    Some([followers as f64, lifespan as f64])
}

/// Z-scores both features over the pooled points. A feature with zero
/// spread is set to zero.
pub fn standardize(points: &mut [[f64; 2]]) {
    let n = points.len();
    if n == 0 {
        return;
    }
    for d in 0..2 {
        let mean = points.iter().map(|p| p[d]).sum::<f64>() / n as f64;
        let sd = if n > 1 {
            sqrt(points.iter().map(|p| (p[d] - mean) * (p[d] - mean)).sum::<f64>() / (n - 1) as f64)
        } else {
            0.0
        };
        for p in points.iter_mut() {
            p[d] = if sd > 0.0 { (p[d] - mean) / sd } else { 0.0 };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortMember {
    pub page_id: String,
    pub label: Reliability,
    /// Unstandardized `[max followers, lifespan days]`.
    pub features: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub questionable_id: String,
    pub reliable_id: String,
    /// Distance in standardized feature space.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedSample {
    pub pairs: Vec<MatchedPair>,
    pub total_distance: f64,
    /// Every labelled page with features, questionable pages first.
    pub members: Vec<CohortMember>,
    /// Labelled pages left out for lack of a follower observation.
    pub excluded: Vec<String>,
}

impl MatchedSample {
    pub fn reliable_ids(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|p| p.reliable_id.as_str())
    }
}

/// Builds feature vectors for the labelled pages, standardizes them over the
/// union of both cohorts and pairs every questionable page with a distinct
/// reliable one.
pub fn matched_sample(
    labeling: &Labeling,
    pages: &BTreeMap<String, PageMeta>,
    series: &BTreeMap<String, AggregatedSeries>,
    end_date: NaiveDate,
    protocol: Protocol,
) -> Result<MatchedSample> {
    let mut members = Vec::new();
    let mut excluded = Vec::new();
    for wanted in [Reliability::Questionable, Reliability::Reliable] {
        for id in labeling.ids(wanted) {
            let features = pages
                .get(id)
                .zip(series.get(id))
                .and_then(|(page, s)| feature_vector(page, s, end_date));
            match features {
                Some(features) => members.push(CohortMember {
                    page_id: id.into(),
                    label: wanted,
                    features,
                }),
                None => excluded.push(id.into()),
            }
        }
    }
    let mut z: Vec<[f64; 2]> = members.iter().map(|m| m.features).collect();
    standardize(&mut z);
    let nq = members.iter().filter(|m| m.label == Reliability::Questionable).count();
    let result = match_cohorts(&z[..nq], &z[nq..], protocol)?;
    let pairs = result
        .pairs
        .iter()
        .zip(&result.distances)
        .map(|(&(q, r), &distance)| MatchedPair {
            questionable_id: members[q].page_id.clone(),
            reliable_id: members[nq + r].page_id.clone(),
            distance,
        })
        .collect();
    Ok(MatchedSample {
        pairs,
        total_distance: result.total_distance,
        members,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::WindowStat;
    use crate::calendar::{Timescale, Window};
    use crate::error::Error;
    use alloc::format;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn page(id: &str, created: NaiveDate, score: Option<f64>) -> PageMeta {
        PageMeta {
            page_id: id.into(),
            name: id.into(),
            created_at: created,
            newsguard_score: score,
            language: None,
        }
    }

    fn series(id: &str, followers: &[Option<u64>]) -> AggregatedSeries {
        let mut w = Window::containing(date(2019, 1, 1), Timescale::Monthly);
        let windows = followers
            .iter()
            .map(|f| {
                let s = WindowStat {
                    window: w,
                    engagement: 1,
                    mean_engagement: 1.0,
                    post_count: 1,
                    followers: *f,
                };
                w = w.next();
                s
            })
            .collect();
        AggregatedSeries {
            page_id: id.into(),
            timescale: Timescale::Monthly,
            windows,
        }
    }

    #[test]
    fn threshold() {
        let pages = [
            page("a", date(2010, 1, 1), Some(60.0)),
            page("b", date(2010, 1, 1), Some(59.99)),
            page("c", date(2010, 1, 1), None),
            page("d", date(2010, 1, 1), Some(100.0)),
        ];
        let l = label_pages(&pages);
        let got: Vec<_> = l.labels.iter().map(|x| (x.page_id.as_str(), x.label)).collect();
        assert_eq!(
            got,
            [("a", Reliability::Reliable), ("b", Reliability::Questionable), ("d", Reliability::Reliable)]
        );
        assert_eq!(l.unscored, ["c"]);
        assert_eq!(l.count(Reliability::Reliable) + l.count(Reliability::Questionable), 3);
    }

    #[test]
    fn features() {
        let p = page("a", date(2018, 12, 31), None);
        let s = series("a", &[Some(10), None, Some(40), Some(25)]);
        assert_eq!(feature_vector(&p, &s, date(2019, 1, 10)), Some([40.0, 10.0]));
        assert_eq!(feature_vector(&p, &series("a", &[None, None]), date(2019, 1, 10)), None);
    }

    #[test]
    fn standardized_moments() {
        let mut pts: Vec<[f64; 2]> = (0..37).map(|i| [1e5 * (i as f64).powi(2), 3.0 * i as f64 + 7.0]).collect();
        standardize(&mut pts);
        for d in 0..2 {
            let n = pts.len() as f64;
            let mean = pts.iter().map(|p| p[d]).sum::<f64>() / n;
            let var = pts.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
        let mut flat = vec![[3.0, 1.0], [3.0, 2.0]];
        standardize(&mut flat);
        assert_eq!((flat[0][0], flat[1][0]), (0.0, 0.0));
    }

    #[test]
    fn newest_page_has_smallest_lifespan() {
        let end = date(2020, 6, 30);
        let mut pts: Vec<[f64; 2]> = [date(2010, 1, 1), date(2015, 5, 5), end, date(2019, 1, 1)]
            .iter()
            .map(|c| feature_vector(&page("x", *c, None), &series("x", &[Some(5)]), end).unwrap())
            .collect();
        standardize(&mut pts);
        let min = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        assert_eq!(pts[2][1], min);
    }

    fn fixture(nq: usize, nr: usize) -> (Labeling, BTreeMap<String, PageMeta>, BTreeMap<String, AggregatedSeries>) {
        let mut pages = BTreeMap::new();
        let mut all = BTreeMap::new();
        for i in 0..nq + nr {
            let id = format!("p{i:02}");
            let score = if i < nq { 20.0 } else { 90.0 };
            let created = date(2005 + (i % 11) as i32, 1 + (i % 12) as u32, 1);
            pages.insert(id.clone(), page(&id, created, Some(score)));
            all.insert(id.clone(), series(&id, &[Some(1000 * (1 + (i * 7) % 13) as u64)]));
        }
        (label_pages(pages.values()), pages, all)
    }

    #[test]
    fn matched_sample_pairs_distinct_pages() {
        let (labels, pages, series) = fixture(5, 12);
        let m = matched_sample(&labels, &pages, &series, date(2021, 1, 1), Protocol::Optimal).unwrap();
        assert_eq!(m.pairs.len(), 5);
        let mut r: Vec<&str> = m.reliable_ids().collect();
        r.sort_unstable();
        r.dedup();
        assert_eq!(r.len(), 5);
        assert!(m.pairs.iter().all(|p| p.questionable_id.as_str() < "p05" && p.reliable_id.as_str() >= "p05"));
        let sum: f64 = m.pairs.iter().map(|p| p.distance).sum();
        assert_eq!(sum, m.total_distance);
    }

    #[test]
    fn pages_without_followers_are_excluded() {
        let (labels, pages, mut series) = fixture(3, 4);
        series.insert("p01".into(), self::series("p01", &[None]));
        series.remove("p05");
        let m = matched_sample(&labels, &pages, &series, date(2021, 1, 1), Protocol::Optimal).unwrap();
        assert_eq!(m.excluded, ["p01", "p05"]);
        assert_eq!(m.pairs.len(), 2);
    }

    #[test]
    fn small_pool_is_fatal() {
        let (labels, pages, series) = fixture(4, 3);
        assert!(matches!(
            matched_sample(&labels, &pages, &series, date(2021, 1, 1), Protocol::Optimal),
            Err(Error::PoolTooSmall { .. })
        ));
    }

    proptest! {
        #[test]
        fn rescaling_features_leaves_the_matching_unchanged(
            raw in prop::collection::vec((1.0f64..1e6, 1.0f64..5e3), 9),
            sf in 1e-3f64..1e3,
            sl in 1e-3f64..1e3,
        ) {
            let run = |scale: [f64; 2]| {
                let mut z: Vec<[f64; 2]> = raw.iter().map(|(f, l)| [f * scale[0], l * scale[1]]).collect();
                standardize(&mut z);
                match_cohorts(&z[..3], &z[3..], Protocol::Optimal).unwrap()
            };
            let (a, b) = (run([1.0, 1.0]), run([sf, sl]));
            prop_assert_eq!(a.pairs, b.pairs);
            prop_assert!((a.total_distance - b.total_distance).abs() < 1e-9 * (1.0 + a.total_distance));
        }
    }
}
