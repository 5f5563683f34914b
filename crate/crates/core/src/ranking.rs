//! Per-class spuriosity rankings, rank-based subset selection, and
//! rank-stratified evaluation slices.
//!
//! Convention: rank 1 is the highest detector score, which is the lowest
//! spuriosity. "top" subsets take ranks 1..k, "bot" the last k ranks.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::ScoreTable;
use crate::error::{Result, SpurankError};
use crate::manifest::{DatasetManifest, Split};
use crate::seeding::keyed_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedImage {
    pub image_id: String,
    pub score: f64,
}

/// Per-class image lists sorted by score descending, ties by image_id
/// ascending. rank(image) = 1-based position in its class list.
#[derive(Debug, Clone, Default)]
pub struct SpuriosityRanking {
    pub per_class: BTreeMap<u32, Vec<RankedImage>>,
}

impl SpuriosityRanking {
    pub fn class(&self, class_id: u32) -> Option<&[RankedImage]> {
        self.per_class.get(&class_id).map(Vec::as_slice)
    }

    /// 1-based rank of an image within its class.
    pub fn rank(&self, class_id: u32, image_id: &str) -> Option<usize> {
        self.per_class
            .get(&class_id)?
            .iter()
            .position(|r| r.image_id == image_id)
            .map(|i| i + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Top,
    Mid,
    Bot,
    Rnd,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Top, Strategy::Mid, Strategy::Bot, Strategy::Rnd];
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Top => write!(f, "top"),
            Strategy::Mid => write!(f, "mid"),
            Strategy::Bot => write!(f, "bot"),
            Strategy::Rnd => write!(f, "rnd"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = SpurankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(Strategy::Top),
            "mid" => Ok(Strategy::Mid),
            "bot" => Ok(Strategy::Bot),
            "rnd" => Ok(Strategy::Rnd),
            other => Err(SpurankError::Config(format!(
                "unknown strategy `{other}` (expected top, mid, bot, or rnd)"
            ))),
        }
    }
}

/// A resolved training subset: exactly k image ids per class.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSpec {
    pub strategy: Strategy,
    pub k: usize,
    pub seed: u64,
    pub resolved: BTreeMap<u32, Vec<String>>,
}

impl SubsetSpec {
    pub fn all_image_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.resolved.values().flatten().cloned().collect();
        ids.sort();
        ids
    }
}

/// Sort one class's scores: descending score, ties by ascending image_id.
pub fn rank_class(scores: &[(String, f64)]) -> Result<Vec<String>> {
    if scores.is_empty() {
        return Err(SpurankError::EmptyInput("rank_class scores".into()));
    }
    if scores.iter().any(|(_, s)| !s.is_finite()) {
        return Err(SpurankError::NonFinite("rank_class scores".into()));
    }
    let mut ordered: Vec<&(String, f64)> = scores.iter().collect();
    ordered.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ordered.into_iter().map(|(id, _)| id.clone()).collect())
}

/// Rank every class of a split from its score table entries.
pub fn build_rankings(
    table: &ScoreTable,
    manifest: &DatasetManifest,
    split: Split,
) -> Result<SpuriosityRanking> {
    let mut per_class_scores: BTreeMap<u32, Vec<(String, f64)>> = BTreeMap::new();
    for record in manifest.by_split(split) {
        let score = table
            .get(&record.image_id)
            .ok_or_else(|| SpurankError::MissingScore(record.image_id.clone()))?;
        per_class_scores
            .entry(record.class_id)
            .or_default()
            .push((record.image_id.clone(), score.score));
    }
    let mut per_class = BTreeMap::new();
    for (class_id, scores) in per_class_scores {
        let by_id: BTreeMap<&str, f64> = scores.iter().map(|(id, s)| (id.as_str(), *s)).collect();
        let ordered = rank_class(&scores)?;
        per_class.insert(
            class_id,
            ordered
                .into_iter()
                .map(|image_id| {
                    let score = by_id[image_id.as_str()];
                    RankedImage { image_id, score }
                })
                .collect(),
        );
    }
    Ok(SpuriosityRanking { per_class })
}

/// Resolve a subset of k ids per class.
///
/// top: ranks 1..k. bot: ranks N-k+1..N. mid: ranks m+1..m+k with
/// m = floor((N-k)/2). rnd: k drawn without replacement, keyed by
/// (seed, class_id) so adding classes never perturbs existing draws.
pub fn select_subset(
    ranking: &SpuriosityRanking,
    strategy: Strategy,
    k: usize,
    seed: u64,
) -> Result<SubsetSpec> {
    if k < 1 {
        return Err(SpurankError::Config("subset k must be >= 1".into()));
    }
    let mut resolved = BTreeMap::new();
    for (&class_id, ranked) in &ranking.per_class {
        let n = ranked.len();
        if k > n {
            return Err(SpurankError::SubsetTooLarge {
                class_id,
                k,
                available: n,
            });
        }
        let indices: Vec<usize> = match strategy {
            Strategy::Top => (0..k).collect(),
            Strategy::Bot => (n - k..n).collect(),
            Strategy::Mid => {
                let m = (n - k) / 2;
                (m..m + k).collect()
            }
            Strategy::Rnd => {
                let mut rng = keyed_rng(seed, "subset-rnd", &class_id.to_string());
                let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
                picked.sort_unstable();
                picked
            }
        };
        resolved.insert(
            class_id,
            indices.into_iter().map(|i| ranked[i].image_id.clone()).collect(),
        );
    }
    Ok(SubsetSpec {
        strategy,
        k,
        seed,
        resolved,
    })
}

/// Slice i holds each class's rank-i image; classes with fewer than i images
/// are recorded as skipped for that slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSlice {
    pub i: usize,
    /// (class_id, image_id) pairs, ascending by class_id.
    pub members: Vec<(u32, String)>,
    pub skipped_classes: Vec<u32>,
}

pub fn stratified_eval_sets(ranking: &SpuriosityRanking, i_max: usize) -> Result<Vec<EvalSlice>> {
    if i_max < 1 {
        return Err(SpurankError::Config("i_max must be >= 1".into()));
    }
    let mut slices = Vec::with_capacity(i_max);
    for i in 1..=i_max {
        let mut members = Vec::new();
        let mut skipped_classes = Vec::new();
        for (&class_id, ranked) in &ranking.per_class {
            match ranked.get(i - 1) {
                Some(img) => members.push((class_id, img.image_id.clone())),
                None => skipped_classes.push(class_id),
            }
        }
        slices.push(EvalSlice {
            i,
            members,
            skipped_classes,
        });
    }
    Ok(slices)
}

#[derive(Serialize, Deserialize)]
struct RankingLine<'a> {
    class_id: u32,
    image_id: &'a str,
    rank: usize,
    score: f64,
}

pub fn save_ranking(ranking: &SpuriosityRanking, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for (&class_id, ranked) in &ranking.per_class {
        for (idx, img) in ranked.iter().enumerate() {
            let line = RankingLine {
                class_id,
                image_id: &img.image_id,
                rank: idx + 1,
                score: img.score,
            };
            writeln!(out, "{}", serde_json::to_string(&line).expect("ranking json"))
                .expect("write to vec");
        }
    }
    std::fs::write(path, out).map_err(|e| SpurankError::io(path, e))
}

pub fn load_ranking(path: &Path) -> Result<SpuriosityRanking> {
    #[derive(Deserialize)]
    struct OwnedLine {
        class_id: u32,
        image_id: String,
        rank: usize,
        score: f64,
    }
    let file = std::fs::File::open(path).map_err(|e| SpurankError::io(path, e))?;
    let mut per_class: BTreeMap<u32, Vec<(usize, RankedImage)>> = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SpurankError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: OwnedLine =
            serde_json::from_str(&line).map_err(|e| SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        per_class.entry(parsed.class_id).or_default().push((
            parsed.rank,
            RankedImage {
                image_id: parsed.image_id,
                score: parsed.score,
            },
        ));
    }
    let mut out = BTreeMap::new();
    for (class_id, mut entries) in per_class {
        entries.sort_by_key(|(rank, _)| *rank);
        for (pos, (rank, _)) in entries.iter().enumerate() {
            if *rank != pos + 1 {
                return Err(SpurankError::MalformedLine {
                    path: path.to_path_buf(),
                    line: 0,
                    reason: format!("class {class_id} ranks are not contiguous from 1"),
                });
            }
        }
        out.insert(class_id, entries.into_iter().map(|(_, img)| img).collect());
    }
    Ok(SpuriosityRanking { per_class: out })
}

#[derive(Serialize, Deserialize)]
struct SubsetLine<'a> {
    class_id: u32,
    image_id: &'a str,
}

pub fn save_subset(subset: &SubsetSpec, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for (&class_id, ids) in &subset.resolved {
        for image_id in ids {
            let line = SubsetLine { class_id, image_id };
            writeln!(out, "{}", serde_json::to_string(&line).expect("subset json"))
                .expect("write to vec");
        }
    }
    std::fs::write(path, out).map_err(|e| SpurankError::io(path, e))
}

/// Load resolved subset members; strategy/k/seed provenance lives in the
/// pipeline report, not this minimal interchange file.
pub fn load_subset_members(path: &Path) -> Result<BTreeMap<u32, Vec<String>>> {
    #[derive(Deserialize)]
    struct OwnedLine {
        class_id: u32,
        image_id: String,
    }
    let file = std::fs::File::open(path).map_err(|e| SpurankError::io(path, e))?;
    let mut resolved: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SpurankError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: OwnedLine =
            serde_json::from_str(&line).map_err(|e| SpurankError::MalformedLine {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        resolved.entry(parsed.class_id).or_default().push(parsed.image_id);
    }
    Ok(resolved)
}
