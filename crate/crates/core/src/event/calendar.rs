use chrono::{Datelike, NaiveDate};

/// Ordinal day on a 365-day wheel.
///
/// Leap years are collapsed onto the common-year calendar: Feb 29 and Mar 1
/// both map to 60, and every later day shifts down by one.
pub fn day_of_year(date: NaiveDate) -> u32 {
    let ordinal = date.ordinal();
    if date.leap_year() && ordinal > 60 {
        ordinal - 1
    } else {
        ordinal
    }
}
