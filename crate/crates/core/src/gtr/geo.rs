use chrono::NaiveDate;

use crate::event::{day_of_year, EventRecord, GeoPoint};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance by the haversine formula, in the units of `radius`.
pub fn haversine_km(p: GeoPoint, q: GeoPoint, radius: f64) -> f64 {
    let (phi_p, phi_q) = (p.latitude.to_radians(), q.latitude.to_radians());
    let half_dphi = (phi_q - phi_p) / 2.0;
    let half_dlambda = (q.longitude - p.longitude).to_radians() / 2.0;
    let h = half_dphi.sin().powi(2) + phi_p.cos() * phi_q.cos() * half_dlambda.sin().powi(2);
    2.0 * radius * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Point reached from `p` after travelling `distance` along the great circle
/// with initial `bearing_deg` (clockwise from north).
pub fn destination_point(p: GeoPoint, bearing_deg: f64, distance: f64, radius: f64) -> GeoPoint {
    let delta = distance / radius;
    let theta = bearing_deg.to_radians();
    let phi1 = p.latitude.to_radians();
    let lambda1 = p.longitude.to_radians();
    let phi2 = (phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * theta.cos())
        .clamp(-1.0, 1.0)
        .asin();
    let lambda2 = lambda1
        + (theta.sin() * delta.sin() * phi1.cos()).atan2(delta.cos() - phi1.sin() * phi2.sin());
    let lon = (lambda2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
    GeoPoint::new(phi2.to_degrees(), lon)
}

/// |Δlatitude| in degrees.
pub fn latitude_diff(q: &EventRecord, z: &EventRecord) -> f64 {
    (q.latitude - z.latitude).abs()
}

/// Cyclic day-of-year distance on a 365-day wheel, in [0, 182].
pub fn temporal_distance(d1: NaiveDate, d2: NaiveDate) -> u32 {
    let gap = day_of_year(d1).abs_diff(day_of_year(d2));
    gap.min(365 - gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Law-of-cosines route, independent of the haversine arithmetic.
    fn cosine_law_km(a: GeoPoint, b: GeoPoint) -> f64 {
        let (p1, p2) = (a.latitude.to_radians(), b.latitude.to_radians());
        let dl = (b.longitude - a.longitude).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
    }

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn haversine_fixed_points() {
        let origin = GeoPoint::new(0.0, 0.0);
        assert_eq!(haversine_km(origin, origin, EARTH_RADIUS_KM), 0.0);
        let half = haversine_km(origin, GeoPoint::new(0.0, 180.0), EARTH_RADIUS_KM);
        assert!((half - 20015.087).abs() < 0.001);
        assert!((half - std::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-9);
    }

    #[test]
    fn kodiak_to_sitka() {
        let kodiak = GeoPoint::new(57.790, -152.407);
        let sitka = GeoPoint::new(57.053, -135.330);
        let d = haversine_km(kodiak, sitka, EARTH_RADIUS_KM);
        // Frozen from an independent evaluation of the same formula.
        assert!((d - 1022.9953).abs() / 1022.9953 < 1e-3, "{d}");
        assert!((d - cosine_law_km(kodiak, sitka)).abs() / d < 1e-3);
    }

    #[test]
    fn latitude_diff_examples() {
        let mut a = crate::gtr::tests::event("a", 57.79, -152.4, ymd(2020, 1, 1));
        let b = crate::gtr::tests::event("b", 57.053, -135.3, ymd(2020, 1, 1));
        assert!((latitude_diff(&a, &b) - 0.737).abs() < 1e-9);
        assert_eq!(latitude_diff(&a, &b), latitude_diff(&b, &a));
        a.latitude = b.latitude;
        assert_eq!(latitude_diff(&a, &b), 0.0);
    }

    #[test]
    fn temporal_examples() {
        assert_eq!(temporal_distance(ymd(2019, 5, 14), ymd(2012, 5, 14)), 0);
        assert_eq!(temporal_distance(ymd(2023, 1, 1), ymd(2023, 12, 31)), 1);
        assert_eq!(temporal_distance(ymd(2023, 1, 1), ymd(2023, 7, 2)), 182);
        // May 2019 vs summer 2017 vs fall 2018.
        let may = ymd(2019, 5, 20);
        assert!(
            temporal_distance(may, ymd(2017, 7, 15)) < temporal_distance(may, ymd(2018, 10, 20))
        );
    }

    #[test]
    fn destination_examples() {
        let origin = GeoPoint::new(0.0, 0.0);
        let north = destination_point(
            origin,
            0.0,
            std::f64::consts::PI * EARTH_RADIUS_KM / 2.0,
            EARTH_RADIUS_KM,
        );
        assert!((north.latitude - 90.0).abs() < 1e-9);
        let east = destination_point(origin, 90.0, 111.194_926_644_558_73, EARTH_RADIUS_KM);
        assert!(east.latitude.abs() < 1e-9 && (east.longitude - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn destination_round_trip(
            la in -80.0f64..80.0, lo in -180.0f64..180.0, b in 0.0f64..360.0, d in 1.0f64..2000.0,
        ) {
            let p = GeoPoint::new(la, lo);
            let q = destination_point(p, b, d, EARTH_RADIUS_KM);
            prop_assert!(q.is_valid());
            prop_assert!((haversine_km(p, q, EARTH_RADIUS_KM) - d).abs() < 1e-6 * d.max(1.0));
        }

        #[test]
        fn haversine_matches_cosine_law(
            la1 in -89.0f64..89.0, lo1 in -180.0f64..180.0,
            la2 in -89.0f64..89.0, lo2 in -180.0f64..180.0,
        ) {
            let (a, b) = (GeoPoint::new(la1, lo1), GeoPoint::new(la2, lo2));
            let h = haversine_km(a, b, EARTH_RADIUS_KM);
            let c = cosine_law_km(a, b);
            prop_assume!(c > 10.0);
            prop_assert!((h - c).abs() / c < 1e-3);
        }

        #[test]
        fn haversine_metric_laws(
            la1 in -90.0f64..=90.0, lo1 in -180.0f64..=180.0,
            la2 in -90.0f64..=90.0, lo2 in -180.0f64..=180.0,
            la3 in -90.0f64..=90.0, lo3 in -180.0f64..=180.0,
        ) {
            let (a, b, c) = (GeoPoint::new(la1, lo1), GeoPoint::new(la2, lo2), GeoPoint::new(la3, lo3));
            let ab = haversine_km(a, b, EARTH_RADIUS_KM);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, haversine_km(b, a, EARTH_RADIUS_KM));
            prop_assert!(ab <= haversine_km(a, c, EARTH_RADIUS_KM) + haversine_km(c, b, EARTH_RADIUS_KM) + 1e-6);
        }

        #[test]
        fn temporal_laws(x in 0i64..20_000, y in 0i64..20_000) {
            let base = ymd(1970, 1, 1);
            let (d1, d2) = (base + chrono::Duration::days(x), base + chrono::Duration::days(y));
            let t = temporal_distance(d1, d2);
            prop_assert!(t <= 182);
            prop_assert_eq!(t, temporal_distance(d2, d1));
        }
    }
}
