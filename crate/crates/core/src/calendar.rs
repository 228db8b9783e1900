//! Calendar month arithmetic.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A calendar month, `month` in 1..=12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseMonthError;

impl fmt::Display for ParseMonthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected a date of the form YYYY-MM or YYYY-MM-DD")
    }
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months since year 0 January; used for offset arithmetic.
    fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_ordinal(ord: i64) -> Self {
        let year = ord.div_euclid(12) as i32;
        let month = (ord.rem_euclid(12) + 1) as u8;
        Self { year, month }
    }

    pub fn add_months(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    pub fn succ(self) -> Self {
        self.add_months(1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = ParseMonthError;

    /// Accepts `YYYY-MM` and `YYYY-MM-DD`; the day is validated but ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut parts = s.split('-');
        let year = parts.next().ok_or(ParseMonthError)?;
        let month = parts.next().ok_or(ParseMonthError)?;
        let day = parts.next();
        if parts.next().is_some() || year.len() != 4 || month.len() != 2 {
            return Err(ParseMonthError);
        }
        let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(year) || !all_digits(month) {
            return Err(ParseMonthError);
        }
        if let Some(day) = day {
            if day.len() != 2 || !all_digits(day) {
                return Err(ParseMonthError);
            }
            let d: u8 = day.parse().map_err(|_| ParseMonthError)?;
            if !(1..=31).contains(&d) {
                return Err(ParseMonthError);
            }
        }
        let year: i32 = year.parse().map_err(|_| ParseMonthError)?;
        let month: u8 = month.parse().map_err(|_| ParseMonthError)?;
        YearMonth::new(year, month).ok_or(ParseMonthError)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = alloc::string::String::deserialize(deserializer)?;
        s.parse().map_err(|_| serde::de::Error::custom(ParseMonthError))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_carry() {
        let dec = YearMonth::new(1949, 12).unwrap();
        assert_eq!(dec.succ(), YearMonth::new(1950, 1).unwrap());
        assert_eq!(dec.add_months(-12), YearMonth::new(1948, 12).unwrap());
        assert_eq!(YearMonth::new(1949, 1).unwrap().months_until(dec), 11);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("1949-01".parse::<YearMonth>().unwrap(), YearMonth::new(1949, 1).unwrap());
        assert_eq!("1960-12-01".parse::<YearMonth>().unwrap(), YearMonth::new(1960, 12).unwrap());
        assert!("1949-13".parse::<YearMonth>().is_err());
        assert!("1949-1".parse::<YearMonth>().is_err());
        assert!("Jan 1949".parse::<YearMonth>().is_err());
        assert!("1949-01-40".parse::<YearMonth>().is_err());
    }

    #[test]
    fn display_round_trip() {
        let m = YearMonth::new(1958, 7).unwrap();
        assert_eq!(alloc::format!("{m}"), "1958-07");
        assert_eq!(alloc::format!("{m}").parse::<YearMonth>().unwrap(), m);
    }
}
