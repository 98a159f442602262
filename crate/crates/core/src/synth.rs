//! Synthetic TEI plays with planted genre structure.
//!
//! Comedies are built from crowded scenes over a single cast, speech spread
//! evenly, and a final full-cast scene. Tragedies split the cast into
//! subgroups that only meet through one or two central figures, concentrate
//! speech on the protagonist, and end with the protagonist meeting newcomers
//! one at a time.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Genre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub n_comedies: usize,
    pub n_tragedies: usize,
    pub acts: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { n_comedies: 32, n_tragedies: 28, acts: 5, seed: 7 }
    }
}

struct SceneSpec {
    cast: Vec<usize>,
    speeches: Vec<(usize, usize)>,
}

struct PlaySpec {
    id: String,
    genre: Genre,
    names: Vec<String>,
    groups: Vec<bool>,
    acts: Vec<Vec<SceneSpec>>,
}

fn speeches_for(rng: &mut ChaCha8Rng, cast: &[usize], words: impl Fn(&mut ChaCha8Rng, usize) -> usize, turns: usize) -> Vec<(usize, usize)> {
    (0..turns)
        .map(|_| {
            let who = *cast.choose(rng).unwrap();
            (who, words(rng, who))
        })
        .collect()
}

fn comedy(rng: &mut ChaCha8Rng, id: String, acts: usize) -> PlaySpec {
    let n = rng.gen_range(8..=13);
    let mut spec_acts = Vec::with_capacity(acts);
    for act in 1..=acts {
        let n_scenes = rng.gen_range(2..=3);
        let mut scenes = Vec::with_capacity(n_scenes + 1);
        for _ in 0..n_scenes {
            let size = rng.gen_range((n * 2 / 5)..=(n * 3 / 4));
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            let mut cast: Vec<usize> = all[..size].to_vec();
            cast.sort_unstable();
            let turns = rng.gen_range(cast.len()..=cast.len() * 3);
            let speeches = speeches_for(rng, &cast, |r, _| r.gen_range(15..=60), turns);
            scenes.push(SceneSpec { cast, speeches });
        }
        if act == acts {
            let cast: Vec<usize> = (0..n).collect();
            let speeches = speeches_for(rng, &cast, |r, _| r.gen_range(15..=60), n * 2);
            scenes.push(SceneSpec { cast, speeches });
        }
        spec_acts.push(scenes);
    }
    PlaySpec {
        id,
        genre: Genre::Comedy,
        names: (0..n).map(|i| format!("Figur {}", i + 1)).collect(),
        groups: vec![false; n],
        acts: spec_acts,
    }
}

fn tragedy(rng: &mut ChaCha8Rng, id: String, acts: usize) -> PlaySpec {
    // 0 = protagonist, 1 = mediator, then subgroups, then finale newcomers
    let core = rng.gen_range(10..=15);
    let newcomers = 2;
    let n = core + newcomers;
    let n_groups = rng.gen_range(3..=4);
    let members: Vec<usize> = (2..core).collect();
    let subgroups: Vec<Vec<usize>> = (0..n_groups)
        .map(|g| members.iter().copied().filter(|m| m % n_groups == g).collect())
        .collect();
    let words = |r: &mut ChaCha8Rng, who: usize| match who {
        0 => r.gen_range(120..=260),
        1 => r.gen_range(50..=110),
        _ => r.gen_range(5..=35),
    };

    let mut spec_acts = Vec::with_capacity(acts);
    for act in 1..=acts {
        let n_scenes = rng.gen_range(3..=5);
        let mut scenes = Vec::with_capacity(n_scenes + newcomers);
        for _ in 0..n_scenes {
            let group = subgroups.choose(rng).unwrap();
            let k = rng.gen_range(1..=2.min(group.len()));
            let mut cast: Vec<usize> = group.choose_multiple(rng, k).copied().collect();
            cast.push(if rng.gen_bool(0.5) { 0 } else { 1 });
            if rng.gen_bool(0.2) {
                cast.push(if cast.contains(&0) { 1 } else { 0 });
            }
            cast.sort_unstable();
            cast.dedup();
            let turns = rng.gen_range(cast.len() * 2..=cast.len() * 4);
            let speeches = speeches_for(rng, &cast, words, turns);
            scenes.push(SceneSpec { cast, speeches });
        }
        if act == acts {
            for newcomer in core..n {
                let cast = vec![0, newcomer];
                let speeches = speeches_for(rng, &cast, words, 6);
                scenes.push(SceneSpec { cast, speeches });
            }
        }
        spec_acts.push(scenes);
    }
    let mut names: Vec<String> = (0..n).map(|i| format!("Person {}", i + 1)).collect();
    names[0] = "Held".into();
    names[1] = "Vertrauter".into();
    PlaySpec { id, genre: Genre::Tragedy, names, groups: vec![false; n], acts: spec_acts }
}

fn render(spec: &PlaySpec) -> String {
    let ids: Vec<String> = (0..spec.names.len()).map(|i| format!("c{i:02}")).collect();
    let genre = match spec.genre {
        Genre::Comedy => "Comedy",
        _ => "Tragedy",
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<TEI xmlns="http://www.tei-c.org/ns/1.0" xml:id="{}">"#, spec.id);
    let _ = writeln!(out, "<teiHeader><fileDesc><titleStmt><title type=\"main\">{}</title><author>Synth</author></titleStmt></fileDesc>", spec.id);
    let _ = writeln!(out, "<profileDesc><particDesc><listPerson>");
    for (k, id) in ids.iter().enumerate() {
        let tag = if spec.groups[k] { "personGrp" } else { "person" };
        let _ = writeln!(out, r#"<{tag} xml:id="{id}"><persName>{}</persName></{tag}>"#, spec.names[k]);
    }
    let _ = writeln!(out, "</listPerson></particDesc>");
    let _ = writeln!(out, r#"<textClass><keywords><term type="genreTitle">{genre}</term></keywords></textClass>"#);
    let _ = writeln!(out, "</profileDesc></teiHeader>\n<text><body>");
    for (a, scenes) in spec.acts.iter().enumerate() {
        let _ = writeln!(out, r#"<div type="act"><head>Akt {}</head>"#, a + 1);
        for (s, scene) in scenes.iter().enumerate() {
            let who: Vec<String> = scene.cast.iter().map(|&c| format!("#{}", ids[c])).collect();
            let _ = writeln!(out, r#"<div type="scene"><head>Szene {}</head>"#, s + 1);
            let _ = writeln!(out, r#"<stage who="{}">Auftritt.</stage>"#, who.join(" "));
            for &(speaker, words) in &scene.speeches {
                let text = vec!["wort"; words].join(" ");
                let _ = writeln!(
                    out,
                    r##"<sp who="#{}"><speaker>{}.</speaker><p>{text}</p></sp>"##,
                    ids[speaker], spec.names[speaker]
                );
            }
            let _ = writeln!(out, "</div>");
        }
        let _ = writeln!(out, "</div>");
    }
    let _ = writeln!(out, "</body></text>\n</TEI>");
    out
}

/// One synthetic play as TEI XML.
pub fn synth_play(genre: Genre, id: &str, acts: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = match genre {
        Genre::Comedy => comedy(&mut rng, id.to_string(), acts),
        _ => tragedy(&mut rng, id.to_string(), acts),
    };
    render(&spec)
}

/// A corpus of `(play id, TEI XML)` pairs, comedies first.
pub fn synth_corpus(cfg: &SynthConfig) -> Vec<(String, String)> {
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n_comedies + cfg.n_tragedies);
    for (genre, count, prefix) in [(Genre::Comedy, cfg.n_comedies, "com"), (Genre::Tragedy, cfg.n_tragedies, "tra")] {
        for k in 0..count {
            let id = format!("synth_{prefix}{k:03}");
            let seed = seeds.gen();
            out.push((id.clone(), synth_play(genre, &id, cfg.acts, seed)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tei;

    #[test]
    fn generated_plays_parse() {
        for (id, xml) in synth_corpus(&SynthConfig { n_comedies: 3, n_tragedies: 3, acts: 5, seed: 1 }) {
            let parsed = parse_tei(xml.as_bytes()).unwrap();
            assert_eq!(parsed.play.id, id);
            assert_eq!(parsed.play.act_count, 5);
            assert!(parsed.warnings.is_empty());
            assert!(parsed.play.cast_size() > 5);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig { n_comedies: 2, n_tragedies: 2, acts: 3, seed: 9 };
        assert_eq!(synth_corpus(&cfg), synth_corpus(&cfg));
    }
}
