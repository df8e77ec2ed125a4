//! Seeded generator of synthetic organic/inorganic tweet histories.
//!
//! Organic accounts post through a thinned daily-cycle arrival process and
//! draw words from a large Zipf vocabulary; inorganic accounts post on a
//! near-fixed interval and recycle a small pool of keyword-heavy,
//! hashtag-heavy templates. Every history has at least 20 tweets and the
//! whole corpus is a pure function of the seed: per-user RNG streams are
//! derived from (seed, user index), so parallel generation equals serial.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson, Zipf};

use crate::corpus::{Label, Tweet, UserHistory};
use crate::parallel::map_range;
use crate::rng::stream_rng;

/// Sentiment words the generator sprinkles into organic text and bot
/// templates; the bundled demonstration lexicons score these.
pub const POSITIVE_WORDS: [&str; 16] = [
    "good", "great", "love", "happy", "awesome", "best", "nice", "amazing", "super", "cool",
    "fun", "glad", "enjoy", "bright", "sweet", "wow",
];
pub const NEGATIVE_WORDS: [&str; 16] = [
    "bad", "sad", "hate", "angry", "awful", "worst", "ugly", "terrible", "gross", "pain",
    "cry", "fear", "mad", "annoy", "bitter", "fail",
];
const BOT_KEYWORDS: [&str; 12] = [
    "buy", "now", "free", "click", "deal", "offer", "win", "promo", "sale", "link", "follow",
    "visit",
];

const SECONDS_PER_DAY: f64 = 86_400.0;
const ONE_YEAR: i64 = 31_536_000;

/// Timing and text parameters of organic accounts.
#[derive(Debug, Clone, PartialEq)]
pub struct OrganicProfile {
    pub n_tweets_mean: f64,
    /// Mean arrival rate in tweets per day.
    pub rate_per_day: f64,
    /// Peak over trough intensity of the posting cycle.
    pub peak_trough_ratio: f64,
    /// Fraction of users on a 12-hour cycle instead of the daily one.
    pub half_cycle_fraction: f64,
    pub vocabulary_size: usize,
    pub zipf_exponent: f64,
    pub words_per_tweet: f64,
    pub hashtag_rate: f64,
    /// Chance that a word slot emits a sentiment word.
    pub sentiment_word_rate: f64,
    /// Mean positive-versus-negative tilt of sentiment words, in [-1, 1].
    pub sentiment_bias: f64,
}

impl Default for OrganicProfile {
    fn default() -> Self {
        OrganicProfile {
            n_tweets_mean: 3121.47,
            rate_per_day: 12.0,
            peak_trough_ratio: 6.0,
            half_cycle_fraction: 0.3,
            vocabulary_size: 5000,
            zipf_exponent: 0.9,
            words_per_tweet: 12.0,
            hashtag_rate: 0.3,
            sentiment_word_rate: 0.12,
            sentiment_bias: 0.2,
        }
    }
}

/// Timing and text parameters of inorganic accounts.
#[derive(Debug, Clone, PartialEq)]
pub struct InorganicProfile {
    pub n_tweets_mean: f64,
    /// Fixed posting interval in seconds.
    pub interval_secs: f64,
    pub jitter_sd_secs: f64,
    /// Template pool size per account (at most 20).
    pub pool_size: usize,
    pub template_words: usize,
    /// Keywords repeated in every template of an account.
    pub keyword_count: usize,
    pub vocabulary_size: usize,
    pub hashtag_rate: f64,
    pub sentiment_bias: f64,
}

impl Default for InorganicProfile {
    fn default() -> Self {
        InorganicProfile {
            n_tweets_mean: 2598.21,
            interval_secs: 7200.0,
            jitter_sd_secs: 45.0,
            pool_size: 12,
            template_words: 8,
            keyword_count: 3,
            vocabulary_size: 60,
            hashtag_rate: 2.5,
            sentiment_bias: 0.8,
        }
    }
}

/// Full generator configuration; defaults mirror the reference dataset
/// shape (470 organic / 373 inorganic accounts).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_organic: usize,
    pub n_inorganic: usize,
    pub organic: OrganicProfile,
    pub inorganic: InorganicProfile,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_organic: 470,
            n_inorganic: 373,
            organic: OrganicProfile::default(),
            inorganic: InorganicProfile::default(),
        }
    }
}

impl GeneratorConfig {
    /// A small corpus for quick runs: same behavioral contrasts, far fewer
    /// tweets per user.
    pub fn small(n_organic: usize, n_inorganic: usize, n_tweets_mean: f64) -> Self {
        let mut config = GeneratorConfig {
            n_organic,
            n_inorganic,
            ..Default::default()
        };
        config.organic.n_tweets_mean = n_tweets_mean;
        config.inorganic.n_tweets_mean = n_tweets_mean;
        config
    }
}

fn draw_count(rng: &mut impl Rng, mean: f64) -> usize {
    let sd = 0.08 * mean;
    let draw = Normal::new(mean, sd)
        .map(|d| d.sample(rng))
        .unwrap_or(mean);
    draw.round().max(20.0) as usize
}

fn organic_user(profile: &OrganicProfile, index: usize, seed: u64) -> UserHistory {
    let mut rng = stream_rng(seed, 0x0100_0000 + index as u64);
    let n_tweets = draw_count(&mut rng, profile.n_tweets_mean);

    // thinned inhomogeneous arrivals with a cosine intensity profile
    let cycle_secs = if rng.gen_bool(profile.half_cycle_fraction.clamp(0.0, 1.0)) {
        SECONDS_PER_DAY / 2.0
    } else {
        SECONDS_PER_DAY
    };
    let ratio = profile.peak_trough_ratio.max(1.0);
    let depth = (ratio - 1.0) / (ratio + 1.0);
    let base_rate = profile.rate_per_day / SECONDS_PER_DAY;
    let max_rate = base_rate * (1.0 + depth);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let exp = Exp::new(max_rate).expect("positive rate");

    let mut t = rng.gen_range(0..ONE_YEAR) as f64;
    let mut timestamps = Vec::with_capacity(n_tweets);
    while timestamps.len() < n_tweets {
        t += exp.sample(&mut rng);
        let intensity =
            base_rate * (1.0 + depth * (std::f64::consts::TAU * t / cycle_secs - phase).cos());
        if rng.gen_range(0.0..max_rate) < intensity {
            timestamps.push(t.round() as i64);
        }
    }

    let zipf = Zipf::new(profile.vocabulary_size as u64, profile.zipf_exponent)
        .expect("valid zipf parameters");
    let words_dist = Poisson::new(profile.words_per_tweet.max(0.1)).expect("positive mean");
    let hashtag_dist = Poisson::new(profile.hashtag_rate.max(1e-9)).expect("positive mean");
    let p_positive = (0.5 + 0.5 * profile.sentiment_bias + rng.gen_range(-0.15..0.15))
        .clamp(0.05, 0.95);

    let tweets = timestamps
        .into_iter()
        .map(|timestamp| {
            let n_words = (words_dist.sample(&mut rng) as usize).max(1);
            let mut text = String::new();
            for _ in 0..n_words {
                if !text.is_empty() {
                    text.push(' ');
                }
                if rng.gen_bool(profile.sentiment_word_rate.clamp(0.0, 1.0)) {
                    let list = if rng.gen_bool(p_positive) {
                        &POSITIVE_WORDS
                    } else {
                        &NEGATIVE_WORDS
                    };
                    text.push_str(list[rng.gen_range(0..list.len())]);
                } else {
                    let rank = zipf.sample(&mut rng) as usize;
                    text.push_str(&format!("w{rank:04}"));
                }
            }
            let n_tags = hashtag_dist.sample(&mut rng) as usize;
            for _ in 0..n_tags {
                let rank = zipf.sample(&mut rng) as usize;
                text.push_str(&format!(" #t{rank:04}"));
            }
            Tweet { timestamp, text }
        })
        .collect();
    UserHistory::new(format!("org_{index:04}"), tweets, Some(Label::Organic))
}

fn inorganic_user(profile: &InorganicProfile, index: usize, seed: u64) -> UserHistory {
    let mut rng = stream_rng(seed, 0x0200_0000 + index as u64);
    let n_tweets = draw_count(&mut rng, profile.n_tweets_mean);

    let jitter = Normal::new(0.0, profile.jitter_sd_secs.max(1e-9)).expect("valid jitter");
    let mut t = rng.gen_range(0..ONE_YEAR) as f64;
    let mut timestamps = Vec::with_capacity(n_tweets);
    for _ in 0..n_tweets {
        timestamps.push(t.round() as i64);
        t += (profile.interval_secs + jitter.sample(&mut rng)).max(0.0);
    }

    // fixed keywords recycled through every template of this account
    let mut keywords: Vec<&str> = Vec::with_capacity(profile.keyword_count);
    while keywords.len() < profile.keyword_count.min(BOT_KEYWORDS.len()) {
        let k = BOT_KEYWORDS[rng.gen_range(0..BOT_KEYWORDS.len())];
        if !keywords.contains(&k) {
            keywords.push(k);
        }
    }
    let pool_size = profile.pool_size.clamp(1, 20);
    let hashtag_dist = Poisson::new(profile.hashtag_rate.max(1e-9)).expect("positive mean");
    let filler_mean = profile
        .template_words
        .saturating_sub(keywords.len())
        .max(1) as f64;
    let filler_dist = Poisson::new(filler_mean).expect("positive mean");
    let templates: Vec<String> = (0..pool_size)
        .map(|_| {
            let mut text = keywords.join(" ");
            let filler = filler_dist.sample(&mut rng) as usize;
            for _ in 0..filler {
                text.push(' ');
                text.push_str(&format!("b{:03}", rng.gen_range(0..profile.vocabulary_size)));
            }
            // promotional tone: sentiment word tilted by the profile bias
            let p_positive = (0.5 + 0.5 * profile.sentiment_bias).clamp(0.05, 0.95);
            let list = if rng.gen_bool(p_positive) {
                &POSITIVE_WORDS
            } else {
                &NEGATIVE_WORDS
            };
            text.push(' ');
            text.push_str(list[rng.gen_range(0..list.len())]);
            let n_tags = (hashtag_dist.sample(&mut rng) as usize).max(1);
            for _ in 0..n_tags {
                text.push_str(&format!(" #{}", keywords[rng.gen_range(0..keywords.len())]));
            }
            text
        })
        .collect();

    let tweets = timestamps
        .into_iter()
        .map(|timestamp| Tweet {
            timestamp,
            text: templates[rng.gen_range(0..pool_size)].clone(),
        })
        .collect();
    UserHistory::new(format!("bot_{index:04}"), tweets, Some(Label::Inorganic))
}

/// Generate the full labeled corpus for a seed: organic users first, then
/// inorganic, each from its own RNG stream.
pub fn generate_corpus(config: &GeneratorConfig, seed: u64) -> Vec<UserHistory> {
    let total = config.n_organic + config.n_inorganic;
    map_range(total, |i| {
        if i < config.n_organic {
            organic_user(&config.organic, i, seed)
        } else {
            inorganic_user(&config.inorganic, i - config.n_organic, seed)
        }
    })
}
