use std::io::{BufRead, Read, Write};

use chrono::{DateTime, SubsecRound, Utc};
use pagegrowth_core::record::{PostRecord, RejectReason, Rejection};
use serde::{Deserialize, Serialize};

use super::{check_header, row_error, Format, ParseError, Parsed};

pub const POST_HEADER: [&str; 8] = [
    "page_id",
    "post_id",
    "timestamp",
    "likes",
    "comments",
    "shares",
    "total_interactions",
    "followers_at_posting",
];

#[derive(Debug, Serialize, Deserialize)]
struct RawPost {
    page_id: String,
    post_id: String,
    timestamp: String,
    likes: Option<u64>,
    comments: Option<u64>,
    shares: Option<u64>,
    total_interactions: u64,
    followers_at_posting: Option<u64>,
}

impl RawPost {
    fn into_record(self) -> Result<PostRecord, RejectReason> {
        if self.page_id.is_empty() || self.post_id.is_empty() {
            return Err(RejectReason::Malformed("empty page_id or post_id".into()));
        }
        let timestamp = parse_timestamp(&self.timestamp)?;
        PostRecord::new(
            self.page_id,
            self.post_id,
            timestamp,
            [self.likes, self.comments, self.shares],
            self.total_interactions,
            self.followers_at_posting,
        )
    }

    fn from_record(p: &PostRecord) -> RawPost {
        RawPost {
            page_id: p.page_id.clone(),
            post_id: p.post_id.clone(),
            timestamp: p.timestamp.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            likes: p.reactions.map(|r| r.likes),
            comments: p.reactions.map(|r| r.comments),
            shares: p.reactions.map(|r| r.shares),
            total_interactions: p.total_interactions,
            followers_at_posting: p.followers_at_posting,
        }
    }
}

/// RFC 3339 with an explicit offset, converted to UTC and truncated to
/// whole seconds.
fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, RejectReason> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
        .map_err(|e| RejectReason::BadTimestamp(format!("{s:?} ({e})")))
}

pub fn parse_posts<R: Read>(input: R, format: Format) -> Result<Parsed<PostRecord>, ParseError> {
    match format {
        Format::Csv => parse_csv(input),
        Format::Jsonl => parse_jsonl(input),
    }
}

fn parse_csv<R: Read>(input: R) -> Result<Parsed<PostRecord>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    check_header(&mut rdr, &POST_HEADER)?;
    let mut out = Parsed {
        records: Vec::new(),
        rejections: Vec::new(),
        rows: 0,
    };
    for row in rdr.records() {
        out.rows += 1;
        let (line, parsed) = match row {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line() as usize);
                let parsed = rec
                    .deserialize::<RawPost>(None)
                    .map_err(|e| RejectReason::Malformed(deserialize_message(&e)))
                    .and_then(RawPost::into_record);
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
    Ok(out)
}

fn parse_jsonl<R: Read>(input: R) -> Result<Parsed<PostRecord>, ParseError> {
    let mut out = Parsed {
        records: Vec::new(),
        rejections: Vec::new(),
        rows: 0,
    };
    for (i, line) in std::io::BufReader::new(input).lines().enumerate() {
        let line_no = i + 1;
        let text = match line {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                out.rows += 1;
                out.rejections.push(Rejection {
                    line: line_no,
                    reason: RejectReason::Malformed("invalid UTF-8".into()),
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if text.trim().is_empty() {
            continue;
        }
        out.rows += 1;
        let parsed = serde_json::from_str::<RawPost>(&text)
            .map_err(|e| RejectReason::Malformed(e.to_string()))
            .and_then(RawPost::into_record);
        match parsed {
            Ok(p) => out.records.push(p),
            Err(reason) => out.rejections.push(Rejection { line: line_no, reason }),
        }
    }
    Ok(out)
}

pub(super) fn deserialize_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(f) => format!("field {}: {}", f + 1, err.kind()),
            None => err.kind().to_string(),
        },
        _ => e.to_string(),
    }
}

pub fn write_posts<W: Write>(out: W, posts: &[PostRecord], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for p in posts {
                w.serialize(RawPost::from_record(p))?;
            }
            if posts.is_empty() {
                w.write_record(POST_HEADER)?;
            }
            w.flush()
        }
        Format::Jsonl => {
            let mut out = out;
            for p in posts {
                serde_json::to_writer(&mut out, &RawPost::from_record(p))?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "page_id,post_id,timestamp,likes,comments,shares,total_interactions,followers_at_posting\n";

    fn csv(rows: &str) -> Parsed<PostRecord> {
        parse_posts(format!("{HEADER}{rows}").as_bytes(), Format::Csv).unwrap()
    }

    #[test]
    fn component_rules() {
        let p = csv("a,1,2020-01-01T00:00:00Z,10,20,30,60,\n");
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].followers_at_posting, None);
        let p = csv("a,1,2020-01-01T00:00:00Z,,,,60,5\n");
        assert_eq!(p.records[0].reactions, None);
        assert_eq!(p.records[0].followers_at_posting, Some(5));
        let p = csv("a,1,2020-01-01T00:00:00Z,10,20,30,61,\n");
        assert_eq!(p.rejections, [Rejection { line: 2, reason: RejectReason::ComponentSumMismatch }]);
        assert_eq!(p.rejections[0].reason.to_string(), "component sum mismatch");
    }

    #[test]
    fn timestamps_are_normalised_to_utc() {
        let p = csv("a,1,2020-01-01T01:30:00+02:00,,,,1,\na,2,2020-01-01 00:00:00,,,,1,\na,3,2020-01-01T00:00:00,,,,1,\n");
        assert_eq!(p.records[0].timestamp.to_rfc3339(), "2019-12-31T23:30:00+00:00");
        assert_eq!(p.rejections.len(), 2);
        assert!(p.rejections.iter().all(|r| matches!(r.reason, RejectReason::BadTimestamp(_))));
        assert_eq!((p.rejections[0].line, p.rejections[1].line), (3, 4));
    }

    #[test]
    fn malformed_rows_are_quarantined_with_line_numbers() {
        let p = csv("a,1,2020-01-01T00:00:00Z,,,,x,\na,2,2020-01-01T00:00:00Z,,,,1\na,3,2020-01-01T00:00:00Z,,,,-4,\na,4,2020-01-02T00:00:00Z,,,,4,\n");
        assert_eq!(p.rows, 4);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.rejections.iter().map(|r| r.line).collect::<Vec<_>>(), [2, 3, 4]);
    }

    #[test]
    fn bad_header_is_fatal() {
        let err = parse_posts("page_id,post_id,timestamp\n".as_bytes(), Format::Csv).unwrap_err();
        assert!(matches!(err, ParseError::Header { .. }));
        let reordered = "post_id,page_id,timestamp,likes,comments,shares,total_interactions,followers_at_posting\n";
        assert!(parse_posts(reordered.as_bytes(), Format::Csv).is_err());
    }

    #[test]
    fn jsonl() {
        let text = r#"{"page_id":"a","post_id":"1","timestamp":"2020-01-01T00:00:00Z","likes":1,"comments":2,"shares":3,"total_interactions":6,"followers_at_posting":100}

{"page_id":"a","post_id":"2","timestamp":"2020-01-01T00:00:00Z","total_interactions":6}
{"page_id":"a","post_id":"3"
"#;
        let p = parse_posts(text.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!((p.rows, p.records.len()), (3, 2));
        assert_eq!(p.rejections[0].line, 4);
    }

    #[test]
    fn round_trip_both_formats() {
        let p = csv("a,1,2020-01-01T00:00:00.75Z,1,2,3,6,10\nb,2,2021-06-30T23:59:59-01:00,,,,6,\n");
        for format in [Format::Csv, Format::Jsonl] {
            let mut buf = Vec::new();
            write_posts(&mut buf, &p.records, format).unwrap();
            let back = parse_posts(buf.as_slice(), format).unwrap();
            assert_eq!(back.records, p.records);
            assert!(back.rejections.is_empty());
        }
    }
}
