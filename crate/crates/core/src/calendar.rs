//! UTC calendar windows at the four aggregation timescales.

use core::fmt;
use core::str::FromStr;

use chrono::{DateTime, Datelike, Days, Months, NaiveDate, Utc};

use crate::error::Error;

/// Aggregation granularity, ordered from finest to coarsest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Timescale {
    Daily,
    Weekly,
    Monthly,
    Quarterly,
}

impl Timescale {
    pub const ALL: [Timescale; 4] = [
        Timescale::Daily,
        Timescale::Weekly,
        Timescale::Monthly,
        Timescale::Quarterly,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Timescale::Daily => "D",
            Timescale::Weekly => "W",
            Timescale::Monthly => "M",
            Timescale::Quarterly => "Q",
        }
    }
}

impl fmt::Display for Timescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Timescale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "D" | "d" => Ok(Timescale::Daily),
            "W" | "w" => Ok(Timescale::Weekly),
            "M" | "m" => Ok(Timescale::Monthly),
            "Q" | "q" => Ok(Timescale::Quarterly),
            other => Err(Error::InvalidArgument(alloc::format!("unknown timescale {other:?}"))),
        }
    }
}

/// Half-open date interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Window {
    pub timescale: Timescale,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Window {
    /// The window at `scale` containing `date`. Weeks are ISO-8601 weeks
    /// starting on Monday; quarters start in January, April, July and October.
    pub fn containing(date: NaiveDate, scale: Timescale) -> Window {
        let start = match scale {
            Timescale::Daily => date,
            Timescale::Weekly => date - Days::new(u64::from(date.weekday().num_days_from_monday())),
            Timescale::Monthly => first_of_month(date.year(), date.month()),
            Timescale::Quarterly => first_of_month(date.year(), 3 * (date.month0() / 3) + 1),
        };
        Window {
            timescale: scale,
            start,
            end: advance(start, scale),
        }
    }

    /// The window immediately following this one.
    pub fn next(&self) -> Window {
        Window {
            timescale: self.timescale,
            start: self.end,
            end: advance(self.end, self.timescale),
        }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date < self.end
    }

    /// True when `later` starts exactly where this window ends.
    pub fn is_adjacent_to(&self, later: &Window) -> bool {
        self.timescale == later.timescale && self.end == later.start
    }
}

pub fn window_of(timestamp: DateTime<Utc>, scale: Timescale) -> Window {
    Window::containing(timestamp.date_naive(), scale)
}

fn first_of_month(year: i32, month: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, month, 1).expect("valid month")
}

fn advance(start: NaiveDate, scale: Timescale) -> NaiveDate {
    match scale {
        Timescale::Daily => start + Days::new(1),
        Timescale::Weekly => start + Days::new(7),
        Timescale::Monthly => start + Months::new(1),
        Timescale::Quarterly => start + Months::new(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn leap_month() {
        let w = window_of(Utc.with_ymd_and_hms(2020, 2, 29, 23, 59, 59).unwrap(), Timescale::Monthly);
        assert_eq!((w.start, w.end), (d(2020, 2, 1), d(2020, 3, 1)));
    }

    #[test]
    fn iso_week_crossing_year() {
        // 2021-01-01 is a Friday in ISO week 2020-W53.
        let w = window_of(Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(), Timescale::Weekly);
        assert_eq!((w.start, w.end), (d(2020, 12, 28), d(2021, 1, 4)));
        assert_eq!(w.start.iso_week(), d(2021, 1, 1).iso_week());
    }

    #[test]
    fn quarter() {
        let w = window_of(Utc.with_ymd_and_hms(2018, 5, 10, 12, 0, 0).unwrap(), Timescale::Quarterly);
        assert_eq!((w.start, w.end), (d(2018, 4, 1), d(2018, 7, 1)));
        let q4 = Window::containing(d(2018, 12, 31), Timescale::Quarterly);
        assert_eq!((q4.start, q4.end), (d(2018, 10, 1), d(2019, 1, 1)));
    }

    #[test]
    fn windows_tile_the_calendar() {
        for scale in Timescale::ALL {
            let mut w = Window::containing(d(2019, 12, 20), scale);
            for _ in 0..60 {
                let next = w.next();
                assert!(w.start < w.end);
                assert!(w.is_adjacent_to(&next));
                assert_eq!(Window::containing(w.end, scale), next);
                assert_eq!(Window::containing(w.end.pred_opt().unwrap(), scale), w);
                w = next;
            }
        }
    }

    #[test]
    fn ordering_and_parsing() {
        assert!(Timescale::Daily < Timescale::Weekly);
        assert!(Timescale::Monthly < Timescale::Quarterly);
        for s in Timescale::ALL {
            assert_eq!(s.code().parse::<Timescale>().unwrap(), s);
        }
        assert!("X".parse::<Timescale>().is_err());
    }
}
