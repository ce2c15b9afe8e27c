use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::Month;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClaimType {
    #[serde(rename = "RX")]
    Rx,
    #[serde(rename = "INPATIENT")]
    Inpatient,
    #[serde(rename = "OUTPATIENT")]
    Outpatient,
}

impl ClaimType {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimType::Rx => "RX",
            ClaimType::Inpatient => "INPATIENT",
            ClaimType::Outpatient => "OUTPATIENT",
        }
    }
}

impl fmt::Display for ClaimType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RX" => Ok(ClaimType::Rx),
            "INPATIENT" => Ok(ClaimType::Inpatient),
            "OUTPATIENT" => Ok(ClaimType::Outpatient),
            other => Err(Error::invalid(format!("unknown claim_type `{other}`"))),
        }
    }
}

/// One adjudicated claim line.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimRecord {
    pub enrollee_id: String,
    pub service_date: NaiveDate,
    pub paid_date: NaiveDate,
    pub claim_type: ClaimType,
    /// Episode-group code, e.g. `DIAB2`.
    pub condition: String,
    pub therapeutic_class: String,
    pub drug_name: String,
    pub procedure: String,
    pub place_of_service: String,
    pub quantity: f64,
    /// Negative amounts are adjustments and are netted, not dropped.
    pub allowed_amount: f64,
}

impl ClaimRecord {
    pub fn validate(&self) -> Result<()> {
        if self.paid_date < self.service_date {
            return Err(Error::invalid(format!(
                "paid_date {} precedes service_date {}",
                self.paid_date, self.service_date
            )));
        }
        if !(self.quantity >= 0.0) || !self.quantity.is_finite() {
            return Err(Error::invalid(format!("quantity {} must be a finite non-negative number", self.quantity)));
        }
        if !self.allowed_amount.is_finite() {
            return Err(Error::invalid("allowed_amount must be finite"));
        }
        match self.claim_type {
            ClaimType::Rx if !self.procedure.is_empty() => {
                Err(Error::invalid("RX claims must not carry a procedure"))
            }
            ClaimType::Inpatient | ClaimType::Outpatient if !self.drug_name.is_empty() => {
                Err(Error::invalid("medical claims must not carry a drug_name"))
            }
            _ => Ok(()),
        }
    }

    pub fn service_month(&self) -> Month {
        Month::of_date(self.service_date)
    }

    /// Whole calendar months between service and payment.
    pub fn payment_lag_months(&self) -> i32 {
        Month::of_date(self.service_date).months_until(Month::of_date(self.paid_date))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollmentRecord {
    pub enrollee_id: String,
    pub month: Month,
    pub enrolled: bool,
}
