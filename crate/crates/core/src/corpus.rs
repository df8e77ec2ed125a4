//! Tweet-history data model, newline-delimited JSON ingestion, time binning
//! and deterministic dataset splitting.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Class label for an account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Organic,
    Inorganic,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Organic => "organic",
            Label::Inorganic => "inorganic",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "organic" => Some(Label::Organic),
            "inorganic" => Some(Label::Inorganic),
            _ => None,
        }
    }
}

/// One tweet: a UTC timestamp in seconds since the Unix epoch and its text.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tweet {
    #[serde(rename = "t")]
    pub timestamp: i64,
    pub text: String,
}

/// One account's tweet history with an optional ground-truth label.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UserHistory {
    pub user_id: String,
    pub tweets: Vec<Tweet>,
    pub label: Option<Label>,
}

impl UserHistory {
    pub fn new(user_id: impl Into<String>, mut tweets: Vec<Tweet>, label: Option<Label>) -> Self {
        tweets.sort_by_key(|t| t.timestamp);
        UserHistory {
            user_id: user_id.into(),
            tweets,
            label,
        }
    }
}

/// Tweet counts per fixed-width time window, aligned to epoch multiples of
/// the bin width so different users' series are phase comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub start: i64,
    pub bin_width: i64,
    pub counts: Vec<u32>,
}

/// Default bin width: 3 hours.
pub const DEFAULT_BIN_WIDTH: i64 = 10_800;

/// Count tweets into fixed windows of `bin_width` seconds. The first bin is
/// anchored at `floor(min_t / bin_width) * bin_width` and the last covers the
/// latest tweet.
pub fn bin_series(history: &UserHistory, bin_width: i64) -> Result<BinnedSeries> {
    if bin_width <= 0 {
        return Err(Error::InvalidParameter(format!(
            "bin_width must be positive, got {bin_width}"
        )));
    }
    if history.tweets.is_empty() {
        return Err(Error::InvalidHistory {
            user_id: history.user_id.clone(),
            message: "cannot bin an empty history".into(),
        });
    }
    let min_t = history.tweets.first().unwrap().timestamp;
    let max_t = history.tweets.last().unwrap().timestamp;
    let start = min_t.div_euclid(bin_width) * bin_width;
    let n_bins = ((max_t - start).div_euclid(bin_width) + 1) as usize;
    let mut counts = vec![0u32; n_bins];
    for tweet in &history.tweets {
        let k = ((tweet.timestamp - start).div_euclid(bin_width)) as usize;
        counts[k] += 1;
    }
    Ok(BinnedSeries {
        start,
        bin_width,
        counts,
    })
}

/// Inter-tweet gaps in seconds, length `J - 1`.
pub fn intervals(history: &UserHistory) -> Result<Vec<f64>> {
    if history.tweets.len() < 2 {
        return Err(Error::SeriesTooShort {
            need: 2,
            got: history.tweets.len(),
        });
    }
    Ok(history
        .tweets
        .windows(2)
        .map(|w| (w[1].timestamp - w[0].timestamp) as f64)
        .collect())
}

/// Result of [`load_corpus`]: parsed histories plus ingestion statistics.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub users: Vec<UserHistory>,
    /// Records dropped because their tweet list was empty.
    pub skipped_empty: usize,
}

#[derive(Deserialize)]
struct RawUser {
    user_id: String,
    tweets: Vec<Tweet>,
    #[serde(default)]
    label: Option<Label>,
}

/// Load a newline-delimited JSON corpus. One object per line:
/// `{"user_id": ..., "tweets": [{"t": secs, "text": ...}, ...], "label": ...}`.
/// Unknown keys are ignored. Tweets are sorted by timestamp on ingest.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadedCorpus> {
    let file = std::fs::File::open(path.as_ref())?;
    load_corpus_reader(BufReader::new(file))
}

/// Same as [`load_corpus`] but from any reader.
pub fn load_corpus_reader(reader: impl BufRead) -> Result<LoadedCorpus> {
    let mut users = Vec::new();
    let mut seen = BTreeSet::new();
    let mut skipped_empty = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawUser = serde_json::from_str(&line).map_err(|e| Error::CorpusParse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(raw.user_id.clone()) {
            return Err(Error::DuplicateUserId(raw.user_id));
        }
        if raw.tweets.is_empty() {
            skipped_empty += 1;
            continue;
        }
        users.push(UserHistory::new(raw.user_id, raw.tweets, raw.label));
    }
    Ok(LoadedCorpus {
        users,
        skipped_empty,
    })
}

/// Write a corpus in the same newline-delimited JSON format accepted by
/// [`load_corpus`]. Reloading the output reproduces the input exactly.
pub fn save_corpus(users: &[UserHistory], mut writer: impl Write) -> Result<()> {
    for user in users {
        #[derive(Serialize)]
        struct Row<'a> {
            user_id: &'a str,
            tweets: &'a [Tweet],
            label: &'a Option<Label>,
        }
        let line = serde_json::to_string(&Row {
            user_id: &user.user_id,
            tweets: &user.tweets,
            label: &user.label,
        })?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Disjoint train/calibration/test partition of a corpus by user id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: BTreeSet<String>,
    pub calibration: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

impl DatasetSplit {
    pub fn assignment(&self, user_id: &str) -> Option<&'static str> {
        if self.train.contains(user_id) {
            Some("train")
        } else if self.calibration.contains(user_id) {
            Some("calibration")
        } else if self.test.contains(user_id) {
            Some("test")
        } else {
            None
        }
    }
}

/// Largest-remainder apportionment of `n` into three parts proportional to
/// `fractions`. Remainder ties go to the earlier part.
fn apportion(n: usize, fractions: (f64, f64, f64)) -> [usize; 3] {
    let fr = [fractions.0, fractions.1, fractions.2];
    let exact: Vec<f64> = fr.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // sort by descending remainder, index ascending on ties
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for k in 0..(n - assigned) {
        sizes[order[k % 3]] += 1;
    }
    [sizes[0], sizes[1], sizes[2]]
}

/// Deterministic, label-stratified split. Per-label proportions land within
/// one user of the requested fractions; unlabeled users go to the test split
/// (they cannot be used for training or calibration).
pub fn split_dataset(
    corpus: &[UserHistory],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    let pairs: Vec<(String, Option<Label>)> = corpus
        .iter()
        .map(|u| (u.user_id.clone(), u.label))
        .collect();
    split_labeled_ids(&pairs, fractions, seed)
}

/// [`split_dataset`] over bare (user id, label) pairs, for callers holding
/// a feature matrix rather than raw histories.
pub fn split_labeled_ids(
    corpus: &[(String, Option<Label>)],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sum = fractions.0 + fractions.1 + fractions.2;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadFractions(sum));
    }
    for f in [fractions.0, fractions.1, fractions.2] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::BadFractions(f));
        }
    }

    let mut split = DatasetSplit {
        train: BTreeSet::new(),
        calibration: BTreeSet::new(),
        test: BTreeSet::new(),
    };

    // groups in a fixed order: organic, inorganic, unlabeled
    let groups: [(Option<Label>, u64); 3] = [
        (Some(Label::Organic), 0),
        (Some(Label::Inorganic), 1),
        (None, 2),
    ];
    for (label, stream) in groups {
        let mut ids: Vec<&str> = corpus
            .iter()
            .filter(|(_, l)| *l == label)
            .map(|(id, _)| id.as_str())
            .collect();
        if ids.is_empty() {
            continue;
        }
        ids.sort_unstable();
        if label.is_none() {
            split.test.extend(ids.into_iter().map(String::from));
            continue;
        }
        let mut rng = stream_rng(seed, stream);
        ids.shuffle(&mut rng);
        let sizes = apportion(ids.len(), fractions);
        for (k, id) in ids.into_iter().enumerate() {
            if k < sizes[0] {
                split.train.insert(id.into());
            } else if k < sizes[0] + sizes[1] {
                split.calibration.insert(id.into());
            } else {
                split.test.insert(id.into());
            }
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn hist(ts: &[i64]) -> UserHistory {
        UserHistory::new(
            "u",
            ts.iter()
                .map(|&t| Tweet {
                    timestamp: t,
                    text: String::new(),
                })
                .collect(),
            None,
        )
    }

    #[test]
    fn load_single_line() {
        let data = r#"{"user_id":"u1","tweets":[{"t":100,"text":"hi"}],"label":"organic"}"#;
        let got = load_corpus_reader(Cursor::new(data)).unwrap();
        assert_eq!(got.users.len(), 1);
        assert_eq!(got.users[0].user_id, "u1");
        assert_eq!(got.users[0].tweets.len(), 1);
        assert_eq!(got.users[0].label, Some(Label::Organic));
        assert_eq!(got.skipped_empty, 0);
    }

    #[test]
    fn load_rejects_duplicate_ids() {
        let data = "{\"user_id\":\"u1\",\"tweets\":[{\"t\":1,\"text\":\"a\"}]}\n{\"user_id\":\"u1\",\"tweets\":[{\"t\":2,\"text\":\"b\"}]}";
        match load_corpus_reader(Cursor::new(data)) {
            Err(Error::DuplicateUserId(id)) => assert_eq!(id, "u1"),
            other => panic!("expected duplicate-id error, got {other:?}"),
        }
    }

    #[test]
    fn load_reports_line_number_on_bad_json() {
        let data = "{\"user_id\":\"u1\",\"tweets\":[{\"t\":1,\"text\":\"a\"}]}\nnot json";
        match load_corpus_reader(Cursor::new(data)) {
            Err(Error::CorpusParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_skips_empty_histories_with_count() {
        let data = "{\"user_id\":\"u1\",\"tweets\":[]}\n{\"user_id\":\"u2\",\"tweets\":[{\"t\":1,\"text\":\"a\"}]}";
        let got = load_corpus_reader(Cursor::new(data)).unwrap();
        assert_eq!(got.users.len(), 1);
        assert_eq!(got.skipped_empty, 1);
    }

    #[test]
    fn load_ignores_unknown_keys_and_sorts_tweets() {
        let data = r#"{"user_id":"u1","tweets":[{"t":5,"text":"b"},{"t":1,"text":"a"}],"label":null,"extra":42}"#;
        let got = load_corpus_reader(Cursor::new(data)).unwrap();
        assert_eq!(got.users[0].tweets[0].timestamp, 1);
        assert_eq!(got.users[0].label, None);
    }

    #[test]
    fn corpus_round_trip_identity() {
        let users = vec![
            UserHistory::new(
                "a",
                vec![Tweet {
                    timestamp: 3,
                    text: "x #y".into(),
                }],
                Some(Label::Inorganic),
            ),
            UserHistory::new(
                "b",
                vec![
                    Tweet {
                        timestamp: 1,
                        text: "Ünïcødé".into(),
                    },
                    Tweet {
                        timestamp: 9,
                        text: String::new(),
                    },
                ],
                None,
            ),
        ];
        let mut buf = Vec::new();
        save_corpus(&users, &mut buf).unwrap();
        let reloaded = load_corpus_reader(Cursor::new(buf.clone())).unwrap();
        assert_eq!(reloaded.users, users);
        let mut buf2 = Vec::new();
        save_corpus(&reloaded.users, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn bin_boundary_assignment() {
        let b = bin_series(&hist(&[0, 10_799, 10_800]), 10_800).unwrap();
        assert_eq!(b.counts, vec![2, 1]);
        assert_eq!(b.start, 0);
    }

    #[test]
    fn bin_single_tweet() {
        let b = bin_series(&hist(&[5_000]), 10_800).unwrap();
        assert_eq!(b.counts, vec![1]);
    }

    #[test]
    fn bin_day_span() {
        // hand-binned oracle: t=0 -> bin 0, t=86400 -> bin 8 of 9
        let b = bin_series(&hist(&[0, 86_400]), 10_800).unwrap();
        assert_eq!(b.counts.len(), 9);
        assert_eq!(b.counts[0], 1);
        assert_eq!(b.counts[8], 1);
        assert_eq!(b.counts[1..8].iter().sum::<u32>(), 0);
    }

    #[test]
    fn bin_alignment_is_epoch_anchored() {
        let b = bin_series(&hist(&[10_801]), 10_800).unwrap();
        assert_eq!(b.start, 10_800);
    }

    #[test]
    fn bin_rejects_empty() {
        assert!(bin_series(&hist(&[]), 10_800).is_err());
    }

    #[test]
    fn intervals_basic() {
        assert_eq!(intervals(&hist(&[0, 60, 180])).unwrap(), vec![60.0, 120.0]);
        assert_eq!(
            intervals(&hist(&[0, 100, 200, 300])).unwrap(),
            vec![100.0, 100.0, 100.0]
        );
        assert_eq!(intervals(&hist(&[5, 5])).unwrap(), vec![0.0]);
        assert!(intervals(&hist(&[5])).is_err());
    }

    fn labeled(n: usize, label: Option<Label>, prefix: &str) -> Vec<UserHistory> {
        (0..n)
            .map(|i| {
                UserHistory::new(
                    format!("{prefix}{i:04}"),
                    vec![Tweet {
                        timestamp: i as i64,
                        text: String::new(),
                    }],
                    label,
                )
            })
            .collect()
    }

    #[test]
    fn split_sizes_largest_remainder() {
        let corpus = labeled(10, Some(Label::Organic), "u");
        let s = split_dataset(&corpus, (0.5, 0.25, 0.25), 7).unwrap();
        assert_eq!(s.train.len(), 5);
        // remainder tie between calibration and test goes to the earlier part
        assert_eq!(s.calibration.len(), 3);
        assert_eq!(s.test.len(), 2);
        let again = split_dataset(&corpus, (0.5, 0.25, 0.25), 7).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn split_all_train() {
        let corpus = labeled(4, Some(Label::Inorganic), "u");
        let s = split_dataset(&corpus, (1.0, 0.0, 0.0), 3).unwrap();
        assert_eq!(s.train.len(), 4);
        assert!(s.calibration.is_empty() && s.test.is_empty());
    }

    #[test]
    fn split_is_stratified_partition() {
        let mut corpus = labeled(470, Some(Label::Organic), "org");
        corpus.extend(labeled(373, Some(Label::Inorganic), "bot"));
        let s = split_dataset(&corpus, (0.4, 0.3, 0.3), 11).unwrap();
        // disjoint and covering
        assert_eq!(s.train.len() + s.calibration.len() + s.test.len(), 843);
        assert!(s.train.intersection(&s.calibration).next().is_none());
        assert!(s.train.intersection(&s.test).next().is_none());
        assert!(s.calibration.intersection(&s.test).next().is_none());
        // per-label counts within one user of the requested fractions
        let org_test = s.test.iter().filter(|id| id.starts_with("org")).count();
        let bot_test = s.test.iter().filter(|id| id.starts_with("bot")).count();
        assert!((org_test as f64 - 0.3 * 470.0).abs() <= 1.0, "{org_test}");
        assert!((bot_test as f64 - 0.3 * 373.0).abs() <= 1.0, "{bot_test}");
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let corpus = labeled(4, Some(Label::Organic), "u");
        assert!(split_dataset(&corpus, (0.5, 0.2, 0.2), 1).is_err());
    }

    #[test]
    fn unlabeled_users_go_to_test() {
        let mut corpus = labeled(6, Some(Label::Organic), "org");
        corpus.extend(labeled(2, None, "anon"));
        let s = split_dataset(&corpus, (0.5, 0.25, 0.25), 5).unwrap();
        assert!(s.test.contains("anon0000") && s.test.contains("anon0001"));
        assert!(!s.train.iter().any(|id| id.starts_with("anon")));
    }
}
