use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, Utc};
use pagegrowth_core::record::{PageMeta, RejectReason, Rejection};
use serde::{Deserialize, Serialize};

use super::posts::deserialize_message;
use super::{check_header, row_error, ParseError, Parsed};

pub const PAGE_HEADER: [&str; 5] = ["page_id", "name", "created_at", "newsguard_score", "language"];

#[derive(Debug, Serialize, Deserialize)]
struct RawPage {
    page_id: String,
    name: String,
    created_at: String,
    newsguard_score: Option<f64>,
    language: Option<String>,
}

/// `YYYY-MM-DD`, or an RFC 3339 instant whose UTC date is taken.
fn parse_date(s: &str) -> Result<NaiveDate, RejectReason> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| DateTime::parse_from_rfc3339(s).map(|t| t.with_timezone(&Utc).date_naive()))
        .map_err(|_| RejectReason::Malformed(format!("bad created_at {s:?}")))
}

impl RawPage {
    fn into_meta(self) -> Result<PageMeta, RejectReason> {
        if self.page_id.is_empty() {
            return Err(RejectReason::Malformed("empty page_id".into()));
        }
        Ok(PageMeta {
            created_at: parse_date(&self.created_at)?,
            newsguard_score: self.newsguard_score.map(PageMeta::validate_score).transpose()?,
            language: self.language.filter(|l| !l.is_empty()),
            page_id: self.page_id,
            name: self.name,
        })
    }
}

/// Parses the page metadata file. Any repeated `page_id` is fatal.
pub fn parse_pages<R: Read>(input: R) -> Result<Parsed<PageMeta>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    check_header(&mut rdr, &PAGE_HEADER)?;
    let mut out = Parsed {
        records: Vec::new(),
        rejections: Vec::new(),
        rows: 0,
    };
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for row in rdr.records() {
        out.rows += 1;
        let (line, parsed) = match row {
            Ok(rec) => {
                if let Some(id) = rec.get(0) {
                    *seen.entry(id.to_string()).or_default() += 1;
                }
                let line = rec.position().map_or(0, |p| p.line() as usize);
                let parsed = rec
                    .deserialize::<RawPage>(None)
                    .map_err(|e| RejectReason::Malformed(deserialize_message(&e)))
                    .and_then(RawPage::into_meta);
                (line, parsed)
            }
            Err(e) => {
                let (line, msg) = row_error(e)?;
                (line, Err(RejectReason::Malformed(msg)))
            }
        };
        match parsed {
            Ok(p) => out.records.push(p),
            Err(reason) => out.rejections.push(Rejection { line, reason }),
        }
    }
    let dups: Vec<String> = seen.into_iter().filter(|(_, n)| *n > 1).map(|(id, _)| id).collect();
    if !dups.is_empty() {
        return Err(ParseError::DuplicatePages(dups));
    }
    Ok(out)
}

pub fn write_pages<'a, W: Write>(out: W, pages: impl IntoIterator<Item = &'a PageMeta>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PAGE_HEADER)?;
    for p in pages {
        w.write_record([
            p.page_id.clone(),
            p.name.clone(),
            p.created_at.format("%Y-%m-%d").to_string(),
            p.newsguard_score.map(|s| s.to_string()).unwrap_or_default(),
            p.language.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(rows: &str) -> Result<Parsed<PageMeta>, ParseError> {
        parse_pages(format!("page_id,name,created_at,newsguard_score,language\n{rows}").as_bytes())
    }

    #[test]
    fn scores() {
        let p = parse("a,A,2012-03-04,92.5,en\nb,B,2012-03-04,,\nc,C,2012-03-04,100.5,fr\n").unwrap();
        assert_eq!(p.records[0].newsguard_score, Some(92.5));
        assert_eq!(p.records[0].language.as_deref(), Some("en"));
        assert_eq!((p.records[1].newsguard_score, p.records[1].language.as_deref()), (None, None));
        assert_eq!(p.rejections, [Rejection { line: 4, reason: RejectReason::ScoreOutOfRange }]);
    }

    #[test]
    fn duplicates_are_fatal() {
        match parse("a,A,2012-03-04,,\nb,B,2012-03-04,,\na,A2,2013-01-01,,\n") {
            Err(ParseError::DuplicatePages(ids)) => assert_eq!(ids, ["a"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let p = parse("a,\"Name, with comma\",2012-03-04,59.99,de\nb,B,2015-01-01T23:00:00-02:00,,\n").unwrap();
        assert_eq!(p.records[1].created_at, NaiveDate::from_ymd_opt(2015, 1, 2).unwrap());
        let mut buf = Vec::new();
        write_pages(&mut buf, &p.records).unwrap();
        assert_eq!(parse_pages(buf.as_slice()).unwrap().records, p.records);
    }
}
