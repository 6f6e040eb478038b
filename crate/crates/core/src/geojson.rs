//! GeoJSON views of a re-ranking result.

use serde_json::{json, Value};

use crate::event::{Corpus, EventRecord, GeoPoint};
use crate::gtr::{destination_point, FusedResult, GtrError};

/// Vertices of the distance-threshold ring.
pub const CIRCLE_SEGMENTS: usize = 64;
const LATITUDE_LINE_STEP_DEG: f64 = 5.0;

fn position(p: GeoPoint) -> Value {
    json!([p.longitude, p.latitude])
}

fn point_feature(p: GeoPoint, properties: Value) -> Value {
    json!({"type": "Feature", "geometry": {"type": "Point", "coordinates": position(p)}, "properties": properties})
}

fn line_feature(points: &[GeoPoint], properties: Value) -> Value {
    let coords: Vec<Value> = points.iter().map(|p| position(*p)).collect();
    json!({"type": "Feature", "geometry": {"type": "LineString", "coordinates": coords}, "properties": properties})
}

/// Closed ring of points at a fixed great-circle distance from `center`.
pub fn geodesic_circle(
    center: GeoPoint,
    radius_km: f64,
    earth_radius_km: f64,
    segments: usize,
) -> Vec<GeoPoint> {
    let mut ring: Vec<GeoPoint> = (0..segments)
        .map(|i| {
            destination_point(
                center,
                360.0 * i as f64 / segments as f64,
                radius_km,
                earth_radius_km,
            )
        })
        .collect();
    ring.push(ring[0]);
    ring
}

/// Parallel of latitude across every meridian.
fn latitude_line(latitude: f64) -> Vec<GeoPoint> {
    let steps = (360.0 / LATITUDE_LINE_STEP_DEG) as usize;
    (0..=steps)
        .map(|i| GeoPoint::new(latitude, -180.0 + LATITUDE_LINE_STEP_DEG * i as f64))
        .collect()
}

/// FeatureCollection with the query point, the top `n_rerank` candidates
/// (rank, score and distance in properties), query-to-candidate lines, the
/// `tau_d` ring and the two parallels at `φ_q ± tau_phi`.
pub fn rerank_geojson(
    query: &EventRecord,
    result: &FusedResult,
    corpus: &Corpus,
) -> Result<Value, GtrError> {
    let params = &result.params;
    let q = query.point();
    let mut features = vec![point_feature(
        q,
        json!({"role": "query", "id": query.id, "title": query.title, "date": query.date}),
    )];
    for cand in result.candidates.iter().take(params.n_rerank) {
        let event = corpus
            .get(&cand.id)
            .ok_or_else(|| GtrError::UnknownEvent(cand.id.clone()))?;
        let km = cand.features.distance.as_ref().map(|d| d.km);
        features.push(point_feature(
            event.point(),
            json!({
                "role": "candidate",
                "id": event.id,
                "title": event.title,
                "date": event.date,
                "rank": cand.final_rank,
                "rrf_score": cand.rrf_score,
                "distance_km": km,
            }),
        ));
        features.push(line_feature(
            &[q, event.point()],
            json!({"role": "link", "id": event.id, "rank": cand.final_rank}),
        ));
    }
    let ring: Vec<Value> =
        geodesic_circle(q, params.tau_d, params.earth_radius_km, CIRCLE_SEGMENTS)
            .into_iter()
            .map(position)
            .collect();
    features.push(json!({
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [ring]},
        "properties": {"role": "distance_threshold", "radius_km": params.tau_d},
    }));
    for (side, lat) in [
        ("north", q.latitude + params.tau_phi),
        ("south", q.latitude - params.tau_phi),
    ] {
        let lat = lat.clamp(-90.0, 90.0);
        features.push(line_feature(
            &latitude_line(lat),
            json!({"role": "latitude_band", "side": side, "latitude": lat}),
        ));
    }
    Ok(json!({"type": "FeatureCollection", "features": features}))
}
