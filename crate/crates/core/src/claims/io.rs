//! Delimited-text readers and writers for claim and enrollment files.

use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::model::{ClaimRecord, ClaimType, EnrollmentRecord};
use crate::error::{Error, Result};
use crate::month::Month;

pub const CLAIMS_HEADER: [&str; 11] = [
    "enrollee_id",
    "service_date",
    "paid_date",
    "claim_type",
    "condition",
    "therapeutic_class",
    "drug_name",
    "procedure",
    "place_of_service",
    "quantity",
    "allowed_amount",
];

pub const ENROLLMENT_HEADER: [&str; 3] = ["enrollee_id", "month", "enrolled"];

/// Describes the physical layout of a delimited file.
#[derive(Debug, Clone, Copy)]
pub struct Format {
    pub delimiter: u8,
}

impl Default for Format {
    fn default() -> Self {
        Format { delimiter: b',' }
    }
}

fn reader<R: Read>(input: R, format: Format) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::parse(
            1,
            "header",
            format!("expected `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn field<'r>(rec: &'r csv::StringRecord, line: u64, idx: usize, name: &str) -> Result<&'r str> {
    rec.get(idx)
        .map(str::trim)
        .ok_or_else(|| Error::parse(line, name, "missing field"))
}

fn date(rec: &csv::StringRecord, line: u64, idx: usize, name: &str) -> Result<NaiveDate> {
    let raw = field(rec, line, idx, name)?;
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map_err(|e| Error::parse(line, name, format!("`{raw}`: {e}")))
}

fn number(rec: &csv::StringRecord, line: u64, idx: usize, name: &str) -> Result<f64> {
    let raw = field(rec, line, idx, name)?;
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::parse(line, name, format!("`{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, name, "must be finite"));
    }
    Ok(v)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads a claims file. Row order is preserved.
pub fn parse_claims<R: Read>(input: R, format: Format) -> Result<Vec<ClaimRecord>> {
    let mut rdr = reader(input, format);
    check_header(rdr.headers()?, &CLAIMS_HEADER)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let rec = row?;
        let line = line_of(&rec);
        if rec.len() != CLAIMS_HEADER.len() {
            return Err(Error::parse(
                line,
                "row",
                format!("expected {} fields, found {}", CLAIMS_HEADER.len(), rec.len()),
            ));
        }
        let claim_type: ClaimType = field(&rec, line, 3, "claim_type")?
            .parse()
            .map_err(|e: Error| Error::parse(line, "claim_type", e.to_string()))?;
        let claim = ClaimRecord {
            enrollee_id: field(&rec, line, 0, "enrollee_id")?.to_string(),
            service_date: date(&rec, line, 1, "service_date")?,
            paid_date: date(&rec, line, 2, "paid_date")?,
            claim_type,
            condition: field(&rec, line, 4, "condition")?.to_string(),
            therapeutic_class: field(&rec, line, 5, "therapeutic_class")?.to_string(),
            drug_name: field(&rec, line, 6, "drug_name")?.to_string(),
            procedure: field(&rec, line, 7, "procedure")?.to_string(),
            place_of_service: field(&rec, line, 8, "place_of_service")?.to_string(),
            quantity: number(&rec, line, 9, "quantity")?,
            allowed_amount: number(&rec, line, 10, "allowed_amount")?,
        };
        if claim.enrollee_id.is_empty() {
            return Err(Error::parse(line, "enrollee_id", "empty"));
        }
        if claim.paid_date < claim.service_date {
            return Err(Error::parse(line, "paid_date", "precedes service_date"));
        }
        if claim.quantity < 0.0 {
            return Err(Error::parse(line, "quantity", "negative"));
        }
        claim.validate().map_err(|e| Error::parse(line, "row", e.to_string()))?;
        out.push(claim);
    }
    Ok(out)
}

pub fn write_claims<W: Write>(out: W, claims: &[ClaimRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CLAIMS_HEADER)?;
    for c in claims {
        w.write_record([
            c.enrollee_id.as_str(),
            &c.service_date.format("%Y-%m-%d").to_string(),
            &c.paid_date.format("%Y-%m-%d").to_string(),
            c.claim_type.as_str(),
            &c.condition,
            &c.therapeutic_class,
            &c.drug_name,
            &c.procedure,
            &c.place_of_service,
            &c.quantity.to_string(),
            &c.allowed_amount.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<claims writer>", e))?;
    Ok(())
}

fn boolean(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "y" | "yes" => Some(true),
        "0" | "false" | "n" | "no" => Some(false),
        _ => None,
    }
}

/// Reads an enrollment file. Exact duplicate rows are tolerated; conflicting
/// rows for the same (enrollee, month) are an error.
pub fn parse_enrollment<R: Read>(input: R, format: Format) -> Result<Vec<EnrollmentRecord>> {
    let mut rdr = reader(input, format);
    check_header(rdr.headers()?, &ENROLLMENT_HEADER)?;
    let mut seen: HashMap<(String, Month), bool> = HashMap::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let rec = row?;
        let line = line_of(&rec);
        if rec.len() != ENROLLMENT_HEADER.len() {
            return Err(Error::parse(line, "row", format!("expected 3 fields, found {}", rec.len())));
        }
        let enrollee_id = field(&rec, line, 0, "enrollee_id")?.to_string();
        let month: Month = field(&rec, line, 1, "month")?
            .parse()
            .map_err(|e: Error| Error::parse(line, "month", e.to_string()))?;
        let raw = field(&rec, line, 2, "enrolled")?;
        let enrolled =
            boolean(raw).ok_or_else(|| Error::parse(line, "enrolled", format!("`{raw}` is not a boolean")))?;
        match seen.get(&(enrollee_id.clone(), month)) {
            Some(&prev) if prev == enrolled => continue,
            Some(_) => {
                return Err(Error::parse(
                    line,
                    "enrolled",
                    format!("conflicting duplicate for {enrollee_id} {month}"),
                ))
            }
            None => {}
        }
        seen.insert((enrollee_id.clone(), month), enrolled);
        out.push(EnrollmentRecord {
            enrollee_id,
            month,
            enrolled,
        });
    }
    Ok(out)
}

pub fn write_enrollment<W: Write>(out: W, rows: &[EnrollmentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ENROLLMENT_HEADER)?;
    for r in rows {
        w.write_record([
            r.enrollee_id.as_str(),
            &r.month.to_string(),
            if r.enrolled { "1" } else { "0" },
        ])?;
    }
    w.flush().map_err(|e| Error::io("<enrollment writer>", e))?;
    Ok(())
}
