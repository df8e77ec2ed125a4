//! Behavioral checks of the synthetic corpus generator: the organic and
//! inorganic populations must separate in the directions the classifier
//! relies on, and the timing processes must carry their designed cycles.

mod common;

use botsentinel::corpus::{bin_series, load_corpus_reader, save_corpus, Label, Tweet, UserHistory};
use botsentinel::pipeline::extract_features;
use botsentinel::spectrum::{dominant_periodicity, local_maxima, periodogram};
use botsentinel::synthgen::{generate_corpus, GeneratorConfig};
use botsentinel::temporal::temporal_features;
use rand::Rng;

use common::lexicons;

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

#[test]
fn reference_scale_corpus_round_trips_with_843_users() {
    // paper-scale account counts, desk-scale tweet counts
    let config = GeneratorConfig::small(470, 373, 25.0);
    let corpus = generate_corpus(&config, 1);
    let mut buf = Vec::new();
    save_corpus(&corpus, &mut buf).unwrap();
    let loaded = load_corpus_reader(std::io::Cursor::new(buf)).unwrap();
    assert_eq!(loaded.users.len(), 843);
    assert_eq!(loaded.skipped_empty, 0);
    assert_eq!(
        loaded
            .users
            .iter()
            .filter(|u| u.label == Some(Label::Organic))
            .count(),
        470
    );
}

#[test]
fn organic_periodicity_concentrates_on_daily_or_half_daily_cycles() {
    let mut hits = 0usize;
    let mut total = 0usize;
    for seed in 0..20u64 {
        let mut config = GeneratorConfig::small(12, 0, 400.0);
        config.organic.n_tweets_mean = 400.0;
        let corpus = generate_corpus(&config, seed);
        for user in &corpus {
            let binned = bin_series(user, 10_800).unwrap();
            let n = binned.counts.len() as f64;
            let pgram = periodogram(&binned).unwrap();
            let p = dominant_periodicity(&pgram);
            if p <= 0.0 {
                total += 1;
                continue;
            }
            let omega = 1.0 / p;
            // the peak can only land on the frequency grid with spacing 1/n
            let near = |target: f64| (omega - 1.0 / target).abs() <= 1.5 / n;
            if near(8.0) || near(4.0) {
                hits += 1;
            }
            total += 1;
        }
    }
    let rate = hits as f64 / total as f64;
    assert!(rate >= 0.8, "only {hits}/{total} users near period 8 or 4");
}

#[test]
fn inorganic_users_have_low_periodicity_and_tiny_error_variance() {
    let config = GeneratorConfig::small(10, 10, 150.0);
    let corpus = generate_corpus(&config, 7);
    let mut organic_var = Vec::new();
    let mut inorganic_var = Vec::new();
    for user in &corpus {
        let f = temporal_features(user).unwrap();
        match user.label.unwrap() {
            Label::Organic => organic_var.push(f.error_var),
            Label::Inorganic => {
                assert!(f.periodicity < 4.0, "{}: periodicity {}", user.user_id, f.periodicity);
                inorganic_var.push(f.error_var);
            }
        }
    }
    let org = median(&mut organic_var);
    let bot = median(&mut inorganic_var);
    assert!(
        bot < org / 100.0,
        "inorganic error_var median {bot} not tiny next to organic {org}"
    );
}

#[test]
fn semantic_contrasts_mirror_the_designed_behavior() {
    // matched tweet counts so the text contrasts drive the differences
    let config = GeneratorConfig::small(30, 30, 120.0);
    let corpus = generate_corpus(&config, 5);
    let report = extract_features(&corpus, &lexicons(), 10_800).unwrap();
    let matrix = &report.matrix;
    let col = |name: &str| {
        matrix
            .feature_names
            .iter()
            .position(|n| n == name)
            .unwrap()
    };
    let grab = |name: &str, label: Label| -> Vec<f64> {
        let j = col(name);
        matrix
            .values
            .iter()
            .zip(&matrix.labels)
            .filter(|(_, l)| **l == Some(label))
            .map(|(row, _)| row[j])
            .collect()
    };
    for (feature, organic_higher) in [
        ("lexical_diversity", true),
        ("rho1", false),
        ("hashtag_freq", false),
    ] {
        let mut org = grab(feature, Label::Organic);
        let mut bot = grab(feature, Label::Inorganic);
        let (m_org, m_bot) = (median(&mut org), median(&mut bot));
        if organic_higher {
            assert!(m_org > m_bot, "{feature}: organic {m_org} <= inorganic {m_bot}");
        } else {
            assert!(m_bot > m_org, "{feature}: inorganic {m_bot} <= organic {m_org}");
        }
    }
}

#[test]
fn unique_word_medians_separate_at_matched_tweet_counts() {
    use botsentinel::semantic::lexical_diversity;
    let config = GeneratorConfig::small(25, 25, 100.0);
    let corpus = generate_corpus(&config, 9);
    let mut org = Vec::new();
    let mut bot = Vec::new();
    for user in &corpus {
        let (_, unique) = lexical_diversity(user).unwrap();
        match user.label.unwrap() {
            Label::Organic => org.push(unique as f64),
            Label::Inorganic => bot.push(unique as f64),
        }
    }
    let (m_org, m_bot) = (median(&mut org), median(&mut bot));
    assert!(
        m_bot < m_org,
        "inorganic unique-word median {m_bot} not below organic {m_org}"
    );
}

#[test]
fn white_noise_timing_shows_several_local_maxima() {
    // users whose tweet times are uniform noise: the periodogram has no
    // dominant line, so several above-average local peaks appear
    let mut counts = Vec::new();
    for seed in 0..50u64 {
        let mut rng = botsentinel::rng::stream_rng(seed, 600);
        let mut ts: Vec<i64> = (0..300).map(|_| rng.gen_range(0..30 * 86_400)).collect();
        ts.sort_unstable();
        let user = UserHistory::new(
            format!("noise{seed}"),
            ts.into_iter()
                .map(|t| Tweet {
                    timestamp: t,
                    text: "x".into(),
                })
                .collect(),
            None,
        );
        let pgram = periodogram(&bin_series(&user, 10_800).unwrap()).unwrap();
        let (n_max, _) = local_maxima(&pgram).unwrap();
        counts.push(n_max as f64);
    }
    let med = median(&mut counts);
    assert!(med > 2.0, "median local-maxima count {med}");
}
