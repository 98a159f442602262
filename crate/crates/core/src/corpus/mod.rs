//! Play records, TEI ingestion, genre normalization and corpus filters.

mod tei;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use tei::{parse_tei, parse_tei_with, ParsedPlay};

/// Default strict lower bound on cast size (`> 5` characters).
pub const DEFAULT_MIN_CHARACTERS: usize = 5;
/// Default strict lower bound on scene count (`> 2` scenes).
pub const DEFAULT_MIN_SCENES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Comedy,
    Tragedy,
    Other,
}

impl Genre {
    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Comedy => "comedy",
            Genre::Tragedy => "tragedy",
            Genre::Other => "other",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterRecord {
    pub id: String,
    pub name: String,
    pub is_group: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeechAct {
    pub speaker_id: String,
    pub word_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scene {
    pub act_index: usize,
    pub scene_index: usize,
    pub present_ids: BTreeSet<String>,
    pub speeches: Vec<SpeechAct>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Play {
    pub id: String,
    pub title: String,
    pub author: String,
    pub raw_genre: String,
    pub genre: Genre,
    pub characters: Vec<CharacterRecord>,
    pub scenes: Vec<Scene>,
    pub act_count: usize,
}

impl Play {
    pub fn character(&self, id: &str) -> Option<&CharacterRecord> {
        self.characters.iter().find(|c| c.id == id)
    }

    pub fn is_group(&self, id: &str) -> bool {
        self.character(id).is_some_and(|c| c.is_group)
    }

    /// Characters present in at least one scene, sorted by id.
    pub fn on_stage(&self) -> BTreeSet<&str> {
        self.scenes
            .iter()
            .flat_map(|s| s.present_ids.iter().map(String::as_str))
            .collect()
    }

    /// Number of distinct characters that appear in at least one scene.
    pub fn cast_size(&self) -> usize {
        self.on_stage().len()
    }

    /// On-stage characters without the group flag, sorted by id.
    pub fn on_stage_individuals(&self) -> Vec<&str> {
        let groups: BTreeSet<&str> = self
            .characters
            .iter()
            .filter(|c| c.is_group)
            .map(|c| c.id.as_str())
            .collect();
        self.on_stage()
            .into_iter()
            .filter(|id| !groups.contains(id))
            .collect()
    }

    /// Total words and number of speech acts per speaker.
    pub fn speech_totals(&self) -> BTreeMap<&str, (usize, usize)> {
        let mut totals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for sp in self.scenes.iter().flat_map(|s| s.speeches.iter()) {
            let entry = totals.entry(sp.speaker_id.as_str()).or_default();
            entry.0 += sp.word_count;
            entry.1 += 1;
        }
        totals
    }

    /// Re-derives `genre` from `raw_genre`.
    pub fn renormalize_genre(&mut self, history_as_tragedy: bool) {
        self.genre = normalize_genre(&self.raw_genre, history_as_tragedy);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

const COMEDY_LABELS: &[&str] = &["comedy", "lustspiel", "komödie", "komoedie"];
const TRAGEDY_LABELS: &[&str] = &["tragedy", "tragödie", "tragoedie", "trauerspiel"];
const HISTORY_LABELS: &[&str] = &["history", "history play", "histories"];

/// Maps a free-form genre label to the binary genre scheme.
///
/// Matching is case-insensitive on the trimmed label. History plays fold into
/// tragedy only when `history_as_tragedy` is set.
pub fn normalize_genre(raw_genre: &str, history_as_tragedy: bool) -> Genre {
    let label = raw_genre.trim().to_lowercase();
    let label = label.as_str();
    if COMEDY_LABELS.contains(&label) {
        Genre::Comedy
    } else if TRAGEDY_LABELS.contains(&label) || (history_as_tragedy && HISTORY_LABELS.contains(&label)) {
        Genre::Tragedy
    } else {
        Genre::Other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Genre,
    TooFewCharacters,
    TooFewScenes,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Genre => "genre",
            DropReason::TooFewCharacters => "too_few_characters",
            DropReason::TooFewScenes => "too_few_scenes",
        }
    }
}

/// Why a play fails the corpus filters, or `None` if it is retained.
///
/// Checks run in a fixed order (genre, cast size, scene count) and the first
/// failing one is reported.
pub fn drop_reason(play: &Play, min_characters: usize, min_scenes: usize) -> Option<DropReason> {
    if !matches!(play.genre, Genre::Comedy | Genre::Tragedy) {
        Some(DropReason::Genre)
    } else if play.cast_size() <= min_characters {
        Some(DropReason::TooFewCharacters)
    } else if play.scenes.len() <= min_scenes {
        Some(DropReason::TooFewScenes)
    } else {
        None
    }
}

/// Keeps comedies and tragedies with more than `min_characters` on-stage
/// characters and more than `min_scenes` scenes, preserving input order.
pub fn filter_corpus(plays: Vec<Play>, min_characters: usize, min_scenes: usize) -> Vec<Play> {
    plays
        .into_iter()
        .filter(|p| drop_reason(p, min_characters, min_scenes).is_none())
        .collect()
}

/// Genre overrides keyed by play id, read from a `play_id,genre` CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenreManifest(HashMap<String, String>);

#[derive(Debug, Deserialize)]
struct ManifestRow {
    play_id: String,
    genre: String,
}

impl GenreManifest {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut map = HashMap::new();
        for row in rdr.deserialize() {
            let row: ManifestRow = row?;
            map.insert(row.play_id, row.genre);
        }
        Ok(Self(map))
    }

    pub fn get(&self, play_id: &str) -> Option<&str> {
        self.0.get(play_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces the raw genre of a listed play and re-normalizes it.
    /// Returns whether the play was listed.
    pub fn apply(&self, play: &mut Play, history_as_tragedy: bool) -> bool {
        match self.get(&play.id) {
            Some(genre) => {
                play.raw_genre = genre.to_string();
                play.renormalize_genre(history_as_tragedy);
                true
            }
            None => false,
        }
    }
}

/// Outcome of reading a directory of TEI files.
#[derive(Debug, Default)]
pub struct LoadedCorpus {
    /// Parsed plays sorted by id.
    pub plays: Vec<Play>,
    pub failures: Vec<(PathBuf, Error)>,
    pub warnings: Vec<(String, String)>,
}

/// Parses every `*.xml` file directly inside `dir`. Plays without an id are
/// named after their file stem. Files that fail to parse are reported in
/// `failures` and do not stop the load.
pub fn load_corpus_dir(dir: &Path, history_as_tragedy: bool) -> Result<LoadedCorpus> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")))
        .collect();
    paths.sort();
    let mut out = LoadedCorpus::default();
    for path in paths {
        let parsed = std::fs::read(&path).map_err(Error::from).and_then(|b| parse_tei_with(&b, history_as_tragedy));
        match parsed {
            Ok(ParsedPlay { mut play, warnings }) => {
                if play.id.is_empty() {
                    play.id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                }
                out.warnings.extend(warnings.into_iter().map(|w| (play.id.clone(), w)));
                out.plays.push(play);
            }
            Err(e) => out.failures.push((path, e)),
        }
    }
    out.plays.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

pub fn corpus_to_json(plays: &[Play]) -> Result<String> {
    Ok(serde_json::to_string_pretty(plays)?)
}

pub fn corpus_from_json(s: &str) -> Result<Vec<Play>> {
    Ok(serde_json::from_str(s)?)
}
