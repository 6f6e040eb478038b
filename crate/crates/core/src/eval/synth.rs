//! Seeded synthetic corpora with planted cluster structure.
//!
//! Each cluster shares a topic vocabulary, a category tag, a 300 km disc,
//! a 3° latitude band and a 30-day seasonal window. Cluster members link to
//! each other through `related_ids`. Distractors copy exactly one of those
//! signals from a donor cluster: its topic words, its location, or its
//! season.
//!
//! Cluster centres are packed into a 4° × 8° box and their seasons into
//! early summer, so overlapping discs and windows leave text as the most
//! discriminating signal under the default semantic plant.

use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, Judgments};
use crate::event::{Corpus, EventRecord, GeoPoint};
use crate::gtr::{destination_point, EARTH_RADIUS_KM};

pub const CLUSTER_RADIUS_KM: f64 = 300.0;
pub const CLUSTER_HALF_BAND_DEG: f64 = 1.5;
pub const CLUSTER_HALF_WINDOW_DAYS: i32 = 15;
/// Events per cluster reserved before distractors are allotted.
pub const MIN_CLUSTER_SIZE: usize = 4;
/// Semantic plant only: clusters sharing one category tag.
pub const CLUSTERS_PER_TAG: usize = 5;

const TAGS: [&str; 16] = [
    "Marine Mammals",
    "Fish",
    "Birds",
    "Weather",
    "Permafrost",
    "Sea Ice",
    "Wildfire",
    "Flooding",
    "Erosion",
    "Land Mammals",
    "Plants",
    "Insects",
    "Water Quality",
    "Air Quality",
    "Infrastructure",
    "Health",
];
const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ru", "ta", "ne", "so", "vi", "pa", "de", "gu", "ri", "zo", "fe", "ba", "tu",
    "ho", "ya", "ke", "ni", "wa", "po", "ju", "le",
];
const PLACE_SUFFIXES: [&str; 6] = ["Bay", "Creek", "River", "Point", "Island", "Lake"];
const FILLER: [&str; 16] = [
    "report",
    "observed",
    "residents",
    "noticed",
    "unusual",
    "event",
    "local",
    "community",
    "near",
    "area",
    "season",
    "week",
    "water",
    "conditions",
    "recorded",
    "change",
];
const TOPIC_WORDS: usize = 6;
const FIRST_YEAR: i32 = 2012;
const LAST_YEAR: i32 = 2023;

/// Which feature carries the cluster identity most strongly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedSignal {
    /// Cluster topic words dominate the text; each category tag is shared
    /// by `CLUSTERS_PER_TAG` clusters.
    #[default]
    Semantic,
    /// Text is drawn from one shared pool; every cluster has its own tag.
    Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_events: usize,
    pub n_clusters: usize,
    /// Share of the events beyond `MIN_CLUSTER_SIZE` per cluster that become
    /// distractors.
    pub distractor_fraction: f64,
    pub planted: PlantedSignal,
}

impl SynthConfig {
    pub fn new(seed: u64, n_events: usize, n_clusters: usize) -> Self {
        Self {
            seed,
            n_events,
            n_clusters,
            distractor_fraction: 0.5,
            planted: PlantedSignal::Semantic,
        }
    }

    pub fn n_distractors(&self) -> usize {
        let spare = self
            .n_events
            .saturating_sub(MIN_CLUSTER_SIZE * self.n_clusters);
        (self.distractor_fraction * spare as f64).floor() as usize
    }
}

struct Cluster {
    topic: Vec<String>,
    tag: String,
    center: GeoPoint,
    day: i32,
    places: Vec<String>,
}

struct Words {
    used: BTreeSet<String>,
}

impl Words {
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let w: String = (0..3).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn fresh_n(&mut self, rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh(rng)).collect()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn random_point(rng: &mut ChaCha8Rng) -> GeoPoint {
    GeoPoint::new(rng.gen_range(52.0..71.0), rng.gen_range(-170.0..-130.0))
}

/// Uniform over the disc, restricted to the latitude band.
fn point_in_cluster(rng: &mut ChaCha8Rng, center: GeoPoint) -> GeoPoint {
    loop {
        let bearing = rng.gen_range(0.0..360.0);
        let dist = CLUSTER_RADIUS_KM * rng.gen::<f64>().sqrt();
        let p = destination_point(center, bearing, dist, EARTH_RADIUS_KM);
        if (p.latitude - center.latitude).abs() <= CLUSTER_HALF_BAND_DEG {
            return p;
        }
    }
}

/// Date in a random year whose non-leap day-of-year is `day` (wrapped).
fn date_on_day(rng: &mut ChaCha8Rng, day: i32) -> NaiveDate {
    let day = (day - 1).rem_euclid(365) + 1;
    let reference = NaiveDate::from_yo_opt(2023, day as u32).expect("day in 1..=365");
    let year = rng.gen_range(FIRST_YEAR..=LAST_YEAR);
    NaiveDate::from_ymd_opt(year, reference.month(), reference.day())
        .expect("non-leap month/day exists")
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

struct Draft {
    cluster: Option<usize>,
    title: String,
    summary: String,
    location_name: String,
    point: GeoPoint,
    date: NaiveDate,
    tag: String,
}

/// Title and summary built mostly from `topic`. Place names stay in the
/// location field so the narrative carries no location identity.
fn text_for(
    rng: &mut ChaCha8Rng,
    topic: &[String],
    tag: &str,
    tag_words: bool,
) -> (String, String) {
    let mut t: Vec<String> = topic.choose_multiple(rng, 3).cloned().collect();
    t.extend(FILLER.choose_multiple(rng, 2).map(|s| s.to_string()));
    t.shuffle(rng);
    let mut s: Vec<String> = topic.choose_multiple(rng, 3).cloned().collect();
    s.extend(FILLER.choose_multiple(rng, 3).map(|s| s.to_string()));
    s.shuffle(rng);
    let title = capitalize(&t.join(" "));
    let mut summary = format!("The {}", s.join(" "));
    if tag_words {
        summary.push_str(&format!(", affecting {}", tag.to_lowercase()));
    }
    summary.push('.');
    (title, summary)
}

/// Generates a corpus and its cluster judgments from `config`.
pub fn synth_with(config: &SynthConfig) -> Result<(Corpus, Judgments), EvalError> {
    if config.n_clusters == 0 || config.n_events < config.n_clusters {
        return Err(EvalError::Synth(format!(
            "need n_events >= n_clusters >= 1, got {} events and {} clusters",
            config.n_events, config.n_clusters
        )));
    }
    if !(0.0..=1.0).contains(&config.distractor_fraction) {
        return Err(EvalError::Synth(
            "distractor_fraction must be in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut words = Words {
        used: BTreeSet::new(),
    };
    let semantic = config.planted == PlantedSignal::Semantic;
    let shared_pool = words.fresh_n(&mut rng, 12);
    let n_tags = if semantic {
        config
            .n_clusters
            .div_ceil(CLUSTERS_PER_TAG)
            .clamp(1, TAGS.len())
    } else {
        config.n_clusters
    };
    let tag_name = |i: usize| {
        if i < TAGS.len() {
            TAGS[i].to_string()
        } else {
            format!("{} {}", TAGS[i % TAGS.len()], i / TAGS.len() + 1)
        }
    };

    let clusters: Vec<Cluster> = (0..config.n_clusters)
        .map(|c| Cluster {
            topic: if semantic {
                words.fresh_n(&mut rng, TOPIC_WORDS)
            } else {
                shared_pool.clone()
            },
            tag: tag_name(c % n_tags),
            center: GeoPoint::new(rng.gen_range(59.5..63.5), rng.gen_range(-156.5..-148.5)),
            day: rng.gen_range(135..=225),
            places: (0..2)
                .map(|_| {
                    format!(
                        "{} {}",
                        capitalize(&words.fresh(&mut rng)),
                        PLACE_SUFFIXES.choose(&mut rng).unwrap()
                    )
                })
                .collect(),
        })
        .collect();

    let n_distractors = config.n_distractors();
    let n_core = config.n_events - n_distractors;
    let mut drafts = Vec::with_capacity(config.n_events);
    for i in 0..n_core {
        let c = i % config.n_clusters;
        let cl = &clusters[c];
        let place = cl.places.choose(&mut rng).unwrap().clone();
        let (title, summary) = text_for(&mut rng, &cl.topic, &cl.tag, semantic);
        let day = cl.day + rng.gen_range(-CLUSTER_HALF_WINDOW_DAYS..=CLUSTER_HALF_WINDOW_DAYS);
        drafts.push(Draft {
            cluster: Some(c),
            title,
            summary,
            location_name: place,
            point: point_in_cluster(&mut rng, cl.center),
            date: date_on_day(&mut rng, day),
            tag: cl.tag.clone(),
        });
    }
    for i in 0..n_distractors {
        let donor = &clusters[rng.gen_range(0..clusters.len())];
        let other_tag = loop {
            let t = tag_name(rng.gen_range(0..n_tags.max(2)));
            if t != donor.tag || n_tags == 1 {
                break t;
            }
        };
        let own_topic = if semantic {
            words.fresh_n(&mut rng, TOPIC_WORDS)
        } else {
            shared_pool.clone()
        };
        let own_place = format!(
            "{} {}",
            capitalize(&words.fresh(&mut rng)),
            PLACE_SUFFIXES.choose(&mut rng).unwrap()
        );
        let random_day = rng.gen_range(1..=365);
        let (topic, place, point, day) = match i % 3 {
            0 => (&donor.topic, own_place, random_point(&mut rng), random_day),
            1 => {
                let place = donor.places.choose(&mut rng).unwrap().clone();
                (
                    &own_topic,
                    place,
                    point_in_cluster(&mut rng, donor.center),
                    random_day,
                )
            }
            _ => {
                let day =
                    donor.day + rng.gen_range(-CLUSTER_HALF_WINDOW_DAYS..=CLUSTER_HALF_WINDOW_DAYS);
                (&own_topic, own_place, random_point(&mut rng), day)
            }
        };
        let (title, summary) = text_for(&mut rng, topic, &other_tag, semantic);
        drafts.push(Draft {
            cluster: None,
            title,
            summary,
            location_name: place,
            point,
            date: date_on_day(&mut rng, day),
            tag: other_tag,
        });
    }

    drafts.shuffle(&mut rng);
    let width = config.n_events.to_string().len().max(3);
    let ids: Vec<String> = (0..drafts.len())
        .map(|i| format!("syn-{:0width$}", i + 1))
        .collect();
    let events = drafts
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let related_ids = match d.cluster {
                Some(c) => drafts
                    .iter()
                    .enumerate()
                    .filter(|(j, o)| *j != i && o.cluster == Some(c))
                    .map(|(j, _)| ids[j].clone())
                    .collect(),
                None => Vec::new(),
            };
            EventRecord {
                id: ids[i].clone(),
                title: d.title.clone(),
                summary: d.summary.clone(),
                location_name: format!("{}, Alaska, United States", d.location_name),
                latitude: round6(d.point.latitude),
                longitude: round6(d.point.longitude),
                date: d.date,
                categories: vec![d.tag.clone()],
                related_ids,
            }
        })
        .collect();
    let corpus = Corpus::from_events(events).map_err(|e| EvalError::Synth(e.to_string()))?;
    let judgments = Judgments::from_corpus(&corpus, false);
    Ok((corpus, judgments))
}

/// [`synth_with`] using the default distractor share and a semantic plant.
pub fn synth_corpus(
    seed: u64,
    n_events: usize,
    n_clusters: usize,
) -> Result<(Corpus, Judgments), EvalError> {
    synth_with(&SynthConfig::new(seed, n_events, n_clusters))
}
