use std::io::Write;

use quick_xml::escape::escape;

use super::CharacterGraph;
use crate::corpus::Play;
use crate::Result;

/// Writes the graph as GEXF 1.3 with an edge `weight` and a boolean
/// `is_group` node attribute. Labels and group flags come from `play` when
/// given; otherwise ids double as labels.
pub fn write_gexf<W: Write>(g: &CharacterGraph, play: Option<&Play>, mut out: W) -> Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<gexf xmlns="http://gexf.net/1.3" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://gexf.net/1.3 http://gexf.net/1.3/gexf.xsd" version="1.3">"#
    )?;
    writeln!(out, "  <meta>")?;
    writeln!(out, "    <creator>dramanet</creator>")?;
    if let Some(p) = play {
        let desc = if p.title.is_empty() { p.id.as_str() } else { p.title.as_str() };
        writeln!(out, "    <description>{}</description>", escape(desc))?;
    }
    writeln!(out, "  </meta>")?;
    writeln!(out, r#"  <graph mode="static" defaultedgetype="undirected">"#)?;
    writeln!(out, r#"    <attributes class="node">"#)?;
    writeln!(out, r#"      <attribute id="is_group" title="is_group" type="boolean"/>"#)?;
    writeln!(out, "    </attributes>")?;
    writeln!(out, "    <nodes>")?;
    for id in g.node_ids() {
        let record = play.and_then(|p| p.character(id));
        let label = record.map_or(id.as_str(), |c| c.name.as_str());
        let is_group = record.is_some_and(|c| c.is_group);
        writeln!(
            out,
            r#"      <node id="{}" label="{}"><attvalues><attvalue for="is_group" value="{}"/></attvalues></node>"#,
            escape(id.as_str()),
            escape(label),
            is_group
        )?;
    }
    writeln!(out, "    </nodes>")?;
    writeln!(out, "    <edges>")?;
    for (k, (a, b, w)) in g.edges().enumerate() {
        writeln!(
            out,
            r#"      <edge id="{k}" source="{}" target="{}" weight="{w}"/>"#,
            escape(a),
            escape(b)
        )?;
    }
    writeln!(out, "    </edges>")?;
    writeln!(out, "  </graph>")?;
    writeln!(out, "</gexf>")?;
    Ok(())
}

/// Writes `source,target,weight` rows.
pub fn write_edge_list<W: Write>(g: &CharacterGraph, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["source", "target", "weight"])?;
    for (a, b, w) in g.edges() {
        wtr.write_record([a, b, &w.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
