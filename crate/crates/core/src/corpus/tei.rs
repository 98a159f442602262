//! Streaming reader for the structural subset of TEI drama encoding.
//!
//! Recognized elements:
//!
//! * `TEI/@xml:id` as the play id;
//! * `titleStmt/title` (first `type="main"` title, else the first title) and
//!   `titleStmt/author`;
//! * `textClass/classCode` with a Wikidata scheme and `textClass//term[@type="genreTitle"]`
//!   for the genre label (the normalized class code wins when both exist);
//! * `listPerson/person` and `listPerson/personGrp` (the latter flagged as group);
//! * `div[@type="act"]` and `div[@type="scene"]` for structure;
//! * `sp/@who` for speeches and `stage/@who` or `div/@who` for declared scene casts.
//!
//! Words are whitespace tokens of the text inside `sp`, excluding `speaker`,
//! `stage` and `note` content. Line-level elements (`p`, `l`, `lg`, `ab`, `lb`)
//! act as token boundaries.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::warn;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{normalize_genre, CharacterRecord, Play, Scene, SpeechAct};
use crate::{Error, Result};

/// A parsed play together with recoverable problems found along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPlay {
    pub play: Play,
    pub warnings: Vec<String>,
}

/// Parses a TEI document with history plays mapped to [`super::Genre::Other`].
pub fn parse_tei(xml: &[u8]) -> Result<ParsedPlay> {
    parse_tei_with(xml, false)
}

pub fn parse_tei_with(xml: &[u8], history_as_tragedy: bool) -> Result<ParsedPlay> {
    let mut reader = Reader::from_reader(xml);
    reader.check_end_names(true);
    let mut state = State::default();

    loop {
        let event = reader.read_event().map_err(|e| Error::Xml {
            offset: reader.buffer_position(),
            message: e.to_string(),
        })?;
        let offset = reader.buffer_position();
        match event {
            Event::Start(e) => {
                state.open(&e, offset)?;
            }
            Event::Empty(e) => {
                state.open(&e, offset)?;
                state.close();
            }
            Event::End(_) => state.close(),
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| Error::Xml { offset, message: e.to_string() })?;
                state.text(&text);
            }
            Event::CData(t) => {
                let raw = t.into_inner();
                state.text(&String::from_utf8_lossy(&raw));
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !state.stack.is_empty() {
        return Err(Error::Xml {
            offset: xml.len(),
            message: format!("unexpected end of input inside <{}>", state.stack.last().unwrap().name),
        });
    }
    state.finish(history_as_tragedy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Capture {
    Title { main: bool },
    Author,
    GenreTerm,
    ClassCode,
    PersonName,
}

#[derive(Debug)]
struct Frame {
    name: String,
    capture: Option<Capture>,
    opens_act: bool,
    opens_scene: bool,
    opens_speech: bool,
    skip: bool,
    boundary: bool,
}

#[derive(Debug, Default)]
struct Segment {
    declared: BTreeSet<String>,
    speeches: Vec<SpeechAct>,
}

impl Segment {
    fn is_empty(&self) -> bool {
        self.declared.is_empty() && self.speeches.is_empty()
    }
}

#[derive(Debug, Default)]
struct OpenSpeech {
    speakers: Vec<String>,
    text: String,
}

#[derive(Debug, Default)]
struct PendingPerson {
    id: String,
    is_group: bool,
    name: Option<String>,
}

#[derive(Debug, Default)]
struct State {
    stack: Vec<Frame>,
    captured: Vec<(Capture, String)>,

    play_id: String,
    titles: Vec<(bool, String)>,
    author: Option<String>,
    genre_term: Option<String>,
    class_code: Option<String>,

    characters: Vec<CharacterRecord>,
    person: Option<PendingPerson>,

    act_count: usize,
    in_act: bool,
    act_has_scene: bool,
    act_segment: Segment,
    scene: Option<Segment>,
    speech: Option<OpenSpeech>,
    skip_depth: usize,

    segments: Vec<(usize, Segment)>,
    warnings: Vec<String>,
}

fn attr(e: &BytesStart<'_>, keys: &[&[u8]]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| keys.contains(&a.key.as_ref()))
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

fn refs(value: &str) -> Vec<String> {
    value
        .split_whitespace()
        .map(|r| r.trim_start_matches('#').to_string())
        .filter(|r| !r.is_empty())
        .collect()
}

fn in_ancestors(stack: &[Frame], name: &str) -> bool {
    stack.iter().any(|f| f.name == name)
}

impl State {
    fn current_segment(&mut self) -> Option<&mut Segment> {
        if self.scene.is_some() {
            self.scene.as_mut()
        } else if self.in_act {
            Some(&mut self.act_segment)
        } else {
            None
        }
    }

    fn open(&mut self, e: &BytesStart<'_>, offset: usize) -> Result<()> {
        let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
        let mut frame = Frame {
            name: name.clone(),
            capture: None,
            opens_act: false,
            opens_scene: false,
            opens_speech: false,
            skip: false,
            boundary: false,
        };
        let in_header = in_ancestors(&self.stack, "teiHeader");
        let in_text = in_ancestors(&self.stack, "text");

        match name.as_str() {
            "TEI" if self.stack.is_empty() => {
                self.play_id = attr(e, &[b"xml:id", b"id"]).unwrap_or_default();
            }
            "title" if in_header && in_ancestors(&self.stack, "titleStmt") => {
                let main = attr(e, &[b"type"]).is_some_and(|t| t == "main");
                frame.capture = Some(Capture::Title { main });
            }
            "author" if in_header && in_ancestors(&self.stack, "titleStmt") && self.author.is_none() => {
                frame.capture = Some(Capture::Author);
            }
            "term" if in_header && attr(e, &[b"type"]).is_some_and(|t| t == "genreTitle") => {
                frame.capture = Some(Capture::GenreTerm);
            }
            "classCode"
                if in_header && attr(e, &[b"scheme"]).is_some_and(|s| s.contains("wikidata")) =>
            {
                frame.capture = Some(Capture::ClassCode);
            }
            "person" | "personGrp" if in_ancestors(&self.stack, "listPerson") => {
                match attr(e, &[b"xml:id", b"id"]) {
                    Some(id) if !id.is_empty() => {
                        self.person = Some(PendingPerson {
                            id,
                            is_group: name == "personGrp",
                            name: None,
                        });
                    }
                    _ => self.warnings.push(format!("<{name}> without id at byte {offset} ignored")),
                }
            }
            "persName" | "name" if self.person.as_ref().is_some_and(|p| p.name.is_none()) => {
                frame.capture = Some(Capture::PersonName);
            }
            "div" if in_text => match attr(e, &[b"type"]).as_deref() {
                Some("act") => {
                    self.flush_act();
                    self.act_count += 1;
                    self.in_act = true;
                    self.act_has_scene = false;
                    frame.opens_act = true;
                }
                Some("scene") if self.scene.is_none() => {
                    let mut seg = Segment::default();
                    if let Some(who) = attr(e, &[b"who"]) {
                        seg.declared.extend(refs(&who));
                    }
                    self.scene = Some(seg);
                    self.act_has_scene = true;
                    frame.opens_scene = true;
                }
                // nested scene-typed divisions stay part of the enclosing scene
                _ => {}
            },
            "sp" if in_text => {
                if let Some(speech) = self.speech.take() {
                    self.close_speech(speech);
                }
                let speakers = attr(e, &[b"who"]).map(|w| refs(&w)).unwrap_or_default();
                if speakers.is_empty() {
                    self.warnings.push(format!("<sp> without speaker reference at byte {offset} ignored"));
                } else if self.current_segment().is_none() {
                    self.warnings.push(format!("<sp> outside any act or scene at byte {offset} ignored"));
                } else {
                    self.speech = Some(OpenSpeech { speakers, text: String::new() });
                    frame.opens_speech = true;
                }
            }
            "stage" if in_text => {
                if let Some(who) = attr(e, &[b"who"]) {
                    let ids = refs(&who);
                    if let Some(seg) = self.current_segment() {
                        seg.declared.extend(ids);
                    }
                }
                frame.skip = true;
            }
            "speaker" | "note" => frame.skip = true,
            "p" | "l" | "lg" | "ab" | "lb" => frame.boundary = true,
            _ => {}
        }

        if frame.skip {
            self.skip_depth += 1;
        }
        if frame.boundary {
            self.push_spoken(" ");
        }
        if let Some(c) = frame.capture {
            self.captured.push((c, String::new()));
        }
        self.stack.push(frame);
        Ok(())
    }

    fn close(&mut self) {
        let Some(frame) = self.stack.pop() else { return };
        if frame.skip {
            self.skip_depth -= 1;
        }
        if frame.boundary {
            self.push_spoken(" ");
        }
        if frame.capture.is_some() {
            if let Some((capture, text)) = self.captured.pop() {
                self.finish_capture(capture, normalize_ws(&text));
            }
        }
        if frame.opens_speech {
            if let Some(speech) = self.speech.take() {
                self.close_speech(speech);
            }
        }
        if frame.opens_scene {
            if let Some(seg) = self.scene.take() {
                let act = self.act_count.max(1);
                self.segments.push((act, seg));
            }
        }
        if frame.opens_act {
            self.flush_act();
        }
        if matches!(frame.name.as_str(), "person" | "personGrp") {
            if let Some(p) = self.person.take() {
                let name = p.name.unwrap_or_else(|| p.id.clone());
                self.characters.push(CharacterRecord { id: p.id, name, is_group: p.is_group });
            }
        }
    }

    /// Emits the act-level segment as a scene when the act had no scene
    /// divisions of its own.
    fn flush_act(&mut self) {
        if !self.in_act {
            return;
        }
        let seg = std::mem::take(&mut self.act_segment);
        if !self.act_has_scene && !seg.is_empty() {
            self.warnings.push(format!(
                "act {} has no scene divisions; treated as a single scene",
                self.act_count
            ));
            self.segments.push((self.act_count, seg));
        } else if !seg.speeches.is_empty() {
            self.warnings.push(format!(
                "{} speech(es) in act {} outside scene divisions ignored",
                seg.speeches.len(),
                self.act_count
            ));
        }
        self.in_act = false;
    }

    fn close_speech(&mut self, speech: OpenSpeech) {
        let word_count = speech.text.split_whitespace().count();
        if let Some(seg) = self.current_segment() {
            for speaker_id in speech.speakers {
                seg.speeches.push(SpeechAct { speaker_id, word_count });
            }
        }
    }

    fn push_spoken(&mut self, s: &str) {
        if self.skip_depth == 0 {
            if let Some(speech) = self.speech.as_mut() {
                speech.text.push_str(s);
            }
        }
    }

    fn text(&mut self, s: &str) {
        for (_, buf) in self.captured.iter_mut() {
            buf.push_str(s);
        }
        self.push_spoken(s);
    }

    fn finish_capture(&mut self, capture: Capture, text: String) {
        match capture {
            Capture::Title { main } => self.titles.push((main, text)),
            Capture::Author => {
                if !text.is_empty() {
                    self.author = Some(text);
                }
            }
            Capture::GenreTerm => {
                if self.genre_term.is_none() && !text.is_empty() {
                    self.genre_term = Some(text);
                }
            }
            Capture::ClassCode => {
                if self.class_code.is_none() {
                    self.class_code = wikidata_genre(&text).map(str::to_string);
                }
            }
            Capture::PersonName => {
                if let Some(p) = self.person.as_mut() {
                    if !text.is_empty() {
                        p.name = Some(text);
                    }
                }
            }
        }
    }

    fn finish(mut self, history_as_tragedy: bool) -> Result<ParsedPlay> {
        self.flush_act();

        let mut seen: HashSet<String> = HashSet::new();
        let mut characters = Vec::with_capacity(self.characters.len());
        for c in std::mem::take(&mut self.characters) {
            if seen.insert(c.id.clone()) {
                characters.push(c);
            } else {
                self.warnings.push(format!("duplicate character id `{}` ignored", c.id));
            }
        }

        let mut per_act: BTreeMap<usize, usize> = BTreeMap::new();
        let mut scenes = Vec::with_capacity(self.segments.len());
        for (act_index, seg) in std::mem::take(&mut self.segments) {
            let mut present_ids = seg.declared;
            present_ids.extend(seg.speeches.iter().map(|s| s.speaker_id.clone()));
            if present_ids.is_empty() {
                self.warnings.push(format!("scene without any cast in act {act_index} dropped"));
                continue;
            }
            for id in &present_ids {
                if seen.insert(id.clone()) {
                    self.warnings.push(format!("undeclared character `{id}` synthesized"));
                    characters.push(CharacterRecord { id: id.clone(), name: id.clone(), is_group: false });
                }
            }
            let counter = per_act.entry(act_index).or_default();
            *counter += 1;
            scenes.push(Scene { act_index, scene_index: *counter, present_ids, speeches: seg.speeches });
        }
        if scenes.is_empty() {
            return Err(Error::NoScenes);
        }
        let act_count = scenes.iter().map(|s| s.act_index).max().unwrap_or(1);

        let title = self
            .titles
            .iter()
            .find(|(main, _)| *main)
            .or_else(|| self.titles.first())
            .map(|(_, t)| t.clone())
            .unwrap_or_default();
        let raw_genre = self.class_code.or(self.genre_term).unwrap_or_default();
        let genre = normalize_genre(&raw_genre, history_as_tragedy);

        for w in &self.warnings {
            warn!("{}: {w}", if self.play_id.is_empty() { "<unnamed>" } else { &self.play_id });
        }

        Ok(ParsedPlay {
            play: Play {
                id: self.play_id,
                title,
                author: self.author.unwrap_or_default(),
                raw_genre,
                genre,
                characters,
                scenes,
                act_count,
            },
            warnings: self.warnings,
        })
    }
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// DraCor's normalized genre classes, keyed by Wikidata item.
fn wikidata_genre(code: &str) -> Option<&'static str> {
    match code.trim() {
        "Q40831" => Some("Comedy"),
        "Q80930" => Some("Tragedy"),
        _ => None,
    }
}
