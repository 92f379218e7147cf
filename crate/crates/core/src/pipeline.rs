//! Price series → negative log-returns → monthly maxima → aligned pairs.
//!
//! Input price files are CSV with a header row and ISO-8601 dates, by default
//! in columns `date` and `price`. Rows must be in strictly increasing date
//! order; gaps (weekends, holidays) are bridged, so each return spans two
//! consecutive rows.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::BivariateSample;

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| Error::parse(s, "expected YYYY-MM"))?;
        let year = y.parse().map_err(|_| Error::parse(s, "bad year"))?;
        let month = m.parse().map_err(|_| Error::parse(s, "bad month"))?;
        if !(1..=12).contains(&month) {
            return Err(Error::parse(s, "month must be 01..12"));
        }
        Ok(Self { year, month })
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub identifier: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Validates strictly increasing dates and positive prices. Row numbers in
    /// errors count observations from 1.
    pub fn new(identifier: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        for (i, &(date, price)) in observations.iter().enumerate() {
            if !(price > 0.0 && price.is_finite()) {
                return Err(Error::Ingest {
                    row: i + 1,
                    reason: format!("price must be positive and finite, got {price}"),
                });
            }
            if i > 0 {
                let prev = observations[i - 1].0;
                if date == prev {
                    return Err(Error::Ingest {
                        row: i + 1,
                        reason: format!("duplicate date {date}"),
                    });
                }
                if date < prev {
                    return Err(Error::Ingest {
                        row: i + 1,
                        reason: format!("date {date} precedes previous row {prev}"),
                    });
                }
            }
        }
        Ok(Self {
            identifier: identifier.into(),
            observations,
        })
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Column names of a price CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceColumns {
    pub date: String,
    pub price: String,
}

impl Default for PriceColumns {
    fn default() -> Self {
        Self {
            date: "date".into(),
            price: "price".into(),
        }
    }
}

/// Reads a price series from CSV.
pub fn read_price_csv<R: Read>(identifier: &str, reader: R, columns: &PriceColumns) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(name, "column not found in header"))
    };
    let (di, pi) = (find(&columns.date)?, find(&columns.price)?);
    let mut observations = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |j: usize| record.get(j).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(di), "%Y-%m-%d").map_err(|e| Error::Ingest {
            row,
            reason: format!("bad date `{}`: {e}", field(di)),
        })?;
        let price: f64 = field(pi).parse().map_err(|_| Error::Ingest {
            row,
            reason: format!("bad price `{}`", field(pi)),
        })?;
        observations.push((date, price));
    }
    PriceSeries::new(identifier, observations)
}

/// `r_t = -(ln p_t - ln p_{t-1})`, dated at the later observation.
pub fn neg_log_returns(s: &PriceSeries) -> Result<Vec<(NaiveDate, f64)>> {
    if s.len() < 2 {
        return Err(Error::Input(format!(
            "series `{}` needs at least 2 observations for returns, got {}",
            s.identifier,
            s.len()
        )));
    }
    Ok(s.observations
        .windows(2)
        .map(|w| (w[1].0, w[0].1.ln() - w[1].1.ln()))
        .collect())
}

/// Monthly block maxima, in chronological order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximaSeries {
    pub entries: Vec<(YearMonth, f64)>,
}

impl MaximaSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `month,value` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["month", "value"])?;
        for (m, v) in &self.entries {
            out.write_record([m.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut entries: Vec<(YearMonth, f64)> = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            let month: YearMonth = record.get(0).unwrap_or("").parse().map_err(|e| Error::Ingest {
                row,
                reason: format!("{e}"),
            })?;
            let value: f64 = record.get(1).unwrap_or("").parse().map_err(|_| Error::Ingest {
                row,
                reason: format!("bad value `{}`", record.get(1).unwrap_or("")),
            })?;
            if entries.last().is_some_and(|(prev, _)| *prev >= month) {
                return Err(Error::Ingest {
                    row,
                    reason: format!("month {month} is not after the previous row"),
                });
            }
            entries.push((month, value));
        }
        Ok(Self { entries })
    }
}

/// Per-month maximum. Months without observations are absent.
pub fn monthly_maxima(returns: &[(NaiveDate, f64)]) -> Result<MaximaSeries> {
    if returns.is_empty() {
        return Err(Error::Input("no returns to aggregate".into()));
    }
    let mut by_month: BTreeMap<YearMonth, f64> = BTreeMap::new();
    for &(date, r) in returns {
        by_month
            .entry(YearMonth::of(date))
            .and_modify(|m| *m = m.max(r))
            .or_insert(r);
    }
    Ok(MaximaSeries {
        entries: by_month.into_iter().collect(),
    })
}

/// Inner join of two maxima series on month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub months: Vec<YearMonth>,
    pub pairs: Vec<[f64; 2]>,
    pub dropped_first: Vec<YearMonth>,
    pub dropped_second: Vec<YearMonth>,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Fails when fewer than two months are shared.
    pub fn to_sample(&self) -> Result<BivariateSample> {
        BivariateSample::new(self.pairs.clone())
    }

    /// `month,x1,x2` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["month", "x1", "x2"])?;
        for (m, [a, b]) in self.months.iter().zip(&self.pairs) {
            out.write_record([m.to_string(), a.to_string(), b.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn report(&self) -> String {
        format!(
            "aligned {} common months; dropped {} from first series, {} from second",
            self.len(),
            self.dropped_first.len(),
            self.dropped_second.len()
        )
    }
}

pub fn align(a: &MaximaSeries, b: &MaximaSeries) -> Result<Alignment> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Alignment("cannot align an empty maxima series".into()));
    }
    let right: BTreeMap<YearMonth, f64> = b.entries.iter().copied().collect();
    let mut out = Alignment {
        months: Vec::new(),
        pairs: Vec::new(),
        dropped_first: Vec::new(),
        dropped_second: Vec::new(),
    };
    for &(m, x) in &a.entries {
        match right.get(&m) {
            Some(&y) => {
                out.months.push(m);
                out.pairs.push([x, y]);
            }
            None => out.dropped_first.push(m),
        }
    }
    let left: std::collections::BTreeSet<YearMonth> = a.entries.iter().map(|e| e.0).collect();
    out.dropped_second = b.entries.iter().map(|e| e.0).filter(|m| !left.contains(m)).collect();
    if out.is_empty() {
        return Err(Error::Alignment(
            "the two maxima series share no month".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn ms(entries: &[(&str, f64)]) -> MaximaSeries {
        MaximaSeries {
            entries: entries.iter().map(|(m, v)| (m.parse().unwrap(), *v)).collect(),
        }
    }

    #[test]
    fn returns() {
        let s = PriceSeries::new("x", vec![(d("2020-01-02"), 100.0), (d("2020-01-03"), 100.0), (d("2020-01-06"), 90.0)]).unwrap();
        let r = neg_log_returns(&s).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], (d("2020-01-03"), 0.0));
        assert!((r[1].1 - 0.105_360_515_657_826_3).abs() < 1e-15);

        let one = PriceSeries::new("x", vec![(d("2020-01-02"), 100.0)]).unwrap();
        assert!(neg_log_returns(&one).is_err());
    }

    #[test]
    fn series_validation() {
        let dup = PriceSeries::new("x", vec![(d("2020-01-02"), 1.0), (d("2020-01-02"), 2.0)]);
        assert!(matches!(dup, Err(Error::Ingest { row: 2, .. })));
        let neg = PriceSeries::new("x", vec![(d("2020-01-02"), 1.0), (d("2020-01-03"), 0.0)]);
        assert!(matches!(neg, Err(Error::Ingest { row: 2, .. })));
        let back = PriceSeries::new("x", vec![(d("2020-01-05"), 1.0), (d("2020-01-03"), 1.0)]);
        assert!(matches!(back, Err(Error::Ingest { row: 2, .. })));
    }

    #[test]
    fn csv_ingestion() {
        let text = "date,close,price\n2020-01-02,1,100\n2020-01-03,2,101.5\n";
        let s = read_price_csv("a", text.as_bytes(), &PriceColumns::default()).unwrap();
        assert_eq!(s.observations()[1], (d("2020-01-03"), 101.5));
        let cols = PriceColumns { date: "date".into(), price: "close".into() };
        let s = read_price_csv("a", text.as_bytes(), &cols).unwrap();
        assert_eq!(s.observations()[1].1, 2.0);

        let bad = "date,price\n2020-01-02,100\n2020-13-03,101\n";
        assert!(matches!(
            read_price_csv("a", bad.as_bytes(), &PriceColumns::default()),
            Err(Error::Ingest { row: 2, .. })
        ));
        let bad = "date,price\n2020-01-02,-3\n";
        assert!(matches!(
            read_price_csv("a", bad.as_bytes(), &PriceColumns::default()),
            Err(Error::Ingest { row: 1, .. })
        ));
        let missing = "day,price\n2020-01-02,3\n";
        assert!(matches!(
            read_price_csv("a", missing.as_bytes(), &PriceColumns::default()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn maxima() {
        let rows = vec![
            (d("2020-01-02"), 0.01),
            (d("2020-01-03"), 0.03),
            (d("2020-01-06"), 0.02),
            (d("2020-03-02"), -0.5),
        ];
        let m = monthly_maxima(&rows).unwrap();
        assert_eq!(m.entries, vec![("2020-01".parse().unwrap(), 0.03), ("2020-03".parse().unwrap(), -0.5)]);
        let mut shuffled = rows.clone();
        shuffled.swap(0, 2);
        shuffled.swap(1, 3);
        assert_eq!(monthly_maxima(&shuffled).unwrap(), m);
        assert!(monthly_maxima(&[]).is_err());
    }

    #[test]
    fn alignment() {
        let a = ms(&[("2020-01", 1.0), ("2020-02", 2.0), ("2020-03", 3.0)]);
        let b = ms(&[("2020-02", 20.0), ("2020-03", 30.0), ("2020-04", 40.0)]);
        let al = align(&a, &b).unwrap();
        assert_eq!(al.pairs, vec![[2.0, 20.0], [3.0, 30.0]]);
        assert_eq!(al.dropped_first.len() + al.len(), a.len());
        assert_eq!(al.dropped_second.len() + al.len(), b.len());
        assert_eq!(align(&a, &a).unwrap().len(), 3);

        let c = ms(&[("2021-01", 1.0)]);
        assert!(matches!(align(&a, &c), Err(Error::Alignment(_))));
        let e = ms(&[("2020-03", 5.0)]);
        let one = align(&a, &e).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.to_sample().is_err());

        let mut buf = Vec::new();
        al.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "month,x1,x2\n2020-02,2,20\n2020-03,3,30\n");
    }

    #[test]
    fn maxima_csv_round_trip() {
        let a = ms(&[("2020-01", 0.125), ("2020-02", 0.1)]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(MaximaSeries::read_csv(buf.as_slice()).unwrap(), a);
        assert!(MaximaSeries::read_csv("month,value\n2020-02,1\n2020-01,2\n".as_bytes()).is_err());
    }
}
