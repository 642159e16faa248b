use std::path::Path;

use bubbleci::Series;
use chrono::NaiveDate;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRecord {
    pub date: NaiveDate,
    pub price: f64,
}

/// Which columns hold what, and how to read them.
#[derive(Debug, Clone)]
pub struct ColumnSpec<'a> {
    pub date_column: &'a str,
    pub price_column: &'a str,
    pub date_format: &'a str,
    pub log_transform: bool,
}

/// A price file as a series, with observation `t` dated `dates[t]`.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub records: Vec<PriceRecord>,
    pub series: Series,
    pub dates: Vec<NaiveDate>,
}

impl Ingested {
    pub fn date(&self, index: usize) -> Option<NaiveDate> {
        self.dates.get(index).copied()
    }

    pub fn index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, Failure> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
        Failure::data(format!("{}: no column named {name:?} in the header", path.display()))
    })
}

pub fn ingest(path: &Path, spec: &ColumnSpec) -> Result<Ingested, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::data(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Failure::data(format!("{}: unreadable header: {e}", path.display())))?
        .clone();
    let dcol = column(&headers, spec.date_column, path)?;
    let pcol = column(&headers, spec.price_column, path)?;

    let mut records: Vec<PriceRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Failure::data(format!("{} line {line}: {e}", path.display()))
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let at = |msg: String| Failure::data(format!("{} line {line}: {msg}", path.display()));
        let raw_date = row.get(dcol).unwrap_or_default();
        let date = NaiveDate::parse_from_str(raw_date, spec.date_format)
            .map_err(|e| at(format!("date {raw_date:?} does not match {:?}: {e}", spec.date_format)))?;
        let raw_price = row.get(pcol).unwrap_or_default();
        let price: f64 = raw_price
            .parse()
            .map_err(|_| at(format!("price {raw_price:?} is not a number")))?;
        if !price.is_finite() {
            return Err(at(format!("price {raw_price:?} is not finite")));
        }
        if spec.log_transform && price <= 0.0 {
            return Err(at(format!("price {price} has no logarithm")));
        }
        if let Some(prev) = records.last() {
            if date <= prev.date {
                return Err(at(format!("date {date} does not follow {}", prev.date)));
            }
        }
        records.push(PriceRecord { date, price });
    }

    let values = records
        .iter()
        .map(|r| if spec.log_transform { r.price.ln() } else { r.price })
        .collect();
    let series = Series::new(values).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let dates = records.iter().map(|r| r.date).collect();
    Ok(Ingested { records, series, dates })
}
