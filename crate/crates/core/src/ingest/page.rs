//! The PAGE-XML subset used for line-level ground truth: regions, lines,
//! their outlines and baselines, and the line text.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;

use super::IngestError;

pub const PAGE_NAMESPACE: &str = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15";
const NAMESPACE_PREFIX: &str = "http://schema.primaresearch.org/PAGE/gts/pagecontent/";
const XSI_NAMESPACE: &str = "http://www.w3.org/2001/XMLSchema-instance";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

/// A polyline or polygon in pixel coordinates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Points(pub Vec<Point>);

impl Points {
    /// Parses the `points="x1,y1 x2,y2 ..."` attribute syntax.
    pub fn parse(s: &str) -> Result<Self, IngestError> {
        s.split_whitespace()
            .map(|pair| {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| IngestError::MalformedXml(format!("bad point {pair:?}")))?;
                let coord = |v: &str| {
                    v.trim()
                        .parse::<i64>()
                        .map_err(|_| IngestError::MalformedXml(format!("bad coordinate {v:?}")))
                };
                Ok(Point {
                    x: coord(x)?,
                    y: coord(y)?,
                })
            })
            .collect::<Result<_, _>>()
            .map(Points)
    }
}

impl fmt::Display for Points {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{},{}", p.x, p.y)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextLine {
    pub id: String,
    pub coords: Option<Points>,
    pub baseline: Option<Points>,
    /// Empty when the line has no transcription yet.
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextRegion {
    pub id: String,
    pub coords: Option<Points>,
    pub lines: Vec<TextLine>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    pub creator: String,
    pub created: String,
    pub last_change: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageDocument {
    /// `pcGtsId`, when present.
    pub id: Option<String>,
    pub metadata: Metadata,
    pub image_filename: String,
    pub image_width: u32,
    pub image_height: u32,
    /// Regions in document order.
    pub regions: Vec<TextRegion>,
}

impl PageDocument {
    pub fn lines(&self) -> impl Iterator<Item = &TextLine> {
        self.regions.iter().flat_map(|r| r.lines.iter())
    }

    pub fn line_count(&self) -> usize {
        self.regions.iter().map(|r| r.lines.len()).sum()
    }
}

/// Something the parser skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub element: String,
    pub context: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dropped unsupported element <{}> in {}",
            self.element, self.context
        )
    }
}

#[derive(Debug, Default)]
struct Element {
    name: String,
    in_page_ns: bool,
    attrs: Vec<(String, String)>,
    children: Vec<Node>,
}

#[derive(Debug)]
enum Node {
    Element(Element),
    Text(String),
}

impl Element {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    fn child(&self, name: &str) -> Option<&Element> {
        self.elements().find(|e| e.in_page_ns && e.name == name)
    }

    fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }
}

fn malformed(e: impl fmt::Display) -> IngestError {
    IngestError::MalformedXml(e.to_string())
}

fn is_page_namespace(ns: &str) -> bool {
    ns.strip_prefix(NAMESPACE_PREFIX)
        .and_then(|date| date.get(..4))
        .and_then(|year| year.parse::<u32>().ok())
        .is_some_and(|year| year >= 2013)
}

fn open_element(reader: &NsReader<&[u8]>, start: &BytesStart<'_>) -> Result<Element, IngestError> {
    let (ns, local) = reader.resolve_element(start.name());
    let in_page_ns = matches!(ns, ResolveResult::Bound(n) if is_page_namespace(&String::from_utf8_lossy(n.as_ref())));
    let mut attrs = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(malformed)?;
        let key = attr.key;
        if key.as_ref() == b"xmlns" || key.prefix().is_some_and(|p| p.as_ref() == b"xmlns") {
            continue;
        }
        let value = attr.unescape_value().map_err(malformed)?.into_owned();
        let local = String::from_utf8_lossy(key.local_name().as_ref()).into_owned();
        if key.prefix().is_none() {
            attrs.push((local, value));
        }
    }
    Ok(Element {
        name: String::from_utf8_lossy(local.as_ref()).into_owned(),
        in_page_ns,
        attrs,
        children: Vec::new(),
    })
}

fn read_tree(bytes: &[u8]) -> Result<Element, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| malformed(format!("not UTF-8: {e}")))?;
    let mut reader = NsReader::from_str(text);
    let mut stack: Vec<Element> = Vec::new();
    let mut root = None;

    let attach = |stack: &mut Vec<Element>, root: &mut Option<Element>, el: Element| match stack
        .last_mut()
    {
        Some(parent) => {
            parent.children.push(Node::Element(el));
            Ok(())
        }
        None if root.is_none() => {
            *root = Some(el);
            Ok(())
        }
        None => Err(malformed("more than one root element")),
    };

    loop {
        match reader.read_event().map_err(malformed)? {
            Event::Start(s) => {
                let el = open_element(&reader, &s)?;
                stack.push(el);
            }
            Event::Empty(s) => {
                let el = open_element(&reader, &s)?;
                attach(&mut stack, &mut root, el)?;
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| malformed("unbalanced end tag"))?;
                attach(&mut stack, &mut root, el)?;
            }
            Event::Text(t) => {
                let t = t.unescape().map_err(malformed)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Text(t.into_owned())),
                    None if t.trim().is_empty() => {}
                    None => return Err(malformed("text outside the root element")),
                }
            }
            Event::CData(c) => {
                let t = String::from_utf8(c.into_inner().into_owned()).map_err(malformed)?;
                stack
                    .last_mut()
                    .ok_or_else(|| malformed("CDATA outside the root element"))?
                    .children
                    .push(Node::Text(t));
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(malformed(format!(
            "unexpected end of file inside <{}>",
            stack.last().unwrap().name
        )));
    }
    root.ok_or_else(|| malformed("no root element"))
}

struct Builder {
    ids: BTreeSet<String>,
    warnings: Vec<ParseWarning>,
}

impl Builder {
    fn warn(&mut self, el: &Element, context: &str) {
        self.warnings.push(ParseWarning {
            element: el.name.clone(),
            context: context.to_owned(),
        });
    }

    fn id(&mut self, el: &Element) -> Result<String, IngestError> {
        let id = el
            .attr("id")
            .ok_or_else(|| malformed(format!("<{}> without id", el.name)))?
            .to_owned();
        if !self.ids.insert(id.clone()) {
            return Err(IngestError::DuplicateId(id));
        }
        Ok(id)
    }

    fn points(el: &Element, name: &str) -> Result<Option<Points>, IngestError> {
        el.child(name)
            .map(|c| Points::parse(c.attr("points").unwrap_or_default()))
            .transpose()
    }

    fn line(&mut self, el: &Element) -> Result<TextLine, IngestError> {
        let id = self.id(el)?;
        let mut text = None;
        for child in el.elements() {
            match (child.in_page_ns, child.name.as_str()) {
                (true, "Coords" | "Baseline") => {}
                (true, "TextEquiv") if text.is_none() => {
                    text = Some(
                        child
                            .child("Unicode")
                            .map(Element::text)
                            .unwrap_or_default(),
                    );
                }
                _ => self.warn(child, &format!("TextLine {id}")),
            }
        }
        Ok(TextLine {
            coords: Self::points(el, "Coords")?,
            baseline: Self::points(el, "Baseline")?,
            text: text.unwrap_or_default(),
            id,
        })
    }

    fn region(&mut self, el: &Element) -> Result<TextRegion, IngestError> {
        let id = self.id(el)?;
        let mut lines = Vec::new();
        for child in el.elements() {
            match (child.in_page_ns, child.name.as_str()) {
                (true, "TextLine") => lines.push(self.line(child)?),
                // Region-level text is derived from the lines.
                (true, "Coords" | "TextEquiv") => {}
                _ => self.warn(child, &format!("TextRegion {id}")),
            }
        }
        Ok(TextRegion {
            coords: Self::points(el, "Coords")?,
            lines,
            id,
        })
    }
}

/// Parses a PAGE-XML document, also returning the elements that were skipped.
pub fn parse_page_xml_with_warnings(
    bytes: &[u8],
) -> Result<(PageDocument, Vec<ParseWarning>), IngestError> {
    let root = read_tree(bytes)?;
    if root.name != "PcGts" || !root.in_page_ns {
        return Err(IngestError::UnsupportedSchema(format!(
            "root element <{}> is not a PAGE 2013 or later PcGts",
            root.name
        )));
    }
    let mut b = Builder {
        ids: BTreeSet::new(),
        warnings: Vec::new(),
    };
    let mut doc = PageDocument {
        id: root.attr("pcGtsId").map(str::to_owned),
        ..PageDocument::default()
    };

    if let Some(meta) = root.child("Metadata") {
        let field = |name| meta.child(name).map(Element::text).unwrap_or_default();
        doc.metadata = Metadata {
            creator: field("Creator"),
            created: field("Created"),
            last_change: field("LastChange"),
        };
    }
    let page = root
        .child("Page")
        .ok_or_else(|| malformed("missing <Page>"))?;
    doc.image_filename = page.attr("imageFilename").unwrap_or_default().to_owned();
    let dim = |name: &str| -> Result<u32, IngestError> {
        page.attr(name)
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| malformed(format!("bad {name} {v:?}")))
            })
            .unwrap_or(Ok(0))
    };
    doc.image_width = dim("imageWidth")?;
    doc.image_height = dim("imageHeight")?;

    for child in page.elements() {
        match (child.in_page_ns, child.name.as_str()) {
            (true, "TextRegion") => {
                let region = b.region(child)?;
                doc.regions.push(region);
            }
            _ => b.warn(child, "Page"),
        }
    }
    Ok((doc, b.warnings))
}

/// Parses a PAGE-XML document; unsupported elements are dropped.
pub fn parse_page_xml(bytes: &[u8]) -> Result<PageDocument, IngestError> {
    parse_page_xml_with_warnings(bytes).map(|(doc, _)| doc)
}

fn write_points(out: &mut String, indent: &str, name: &str, points: &Option<Points>) {
    if let Some(p) = points {
        writeln!(out, "{indent}<{name} points=\"{p}\"/>").unwrap();
    }
}

/// Serializes `doc` in the 2013-07-15 PAGE namespace. The output depends
/// only on `doc`.
pub fn write_page_xml(doc: &PageDocument) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n");
    write!(
        out,
        "<PcGts xmlns=\"{PAGE_NAMESPACE}\" xmlns:xsi=\"{XSI_NAMESPACE}\" \
         xsi:schemaLocation=\"{PAGE_NAMESPACE} {PAGE_NAMESPACE}/pagecontent.xsd\""
    )
    .unwrap();
    if let Some(id) = &doc.id {
        write!(out, " pcGtsId=\"{}\"", escape(id.as_str())).unwrap();
    }
    out.push_str(">\n  <Metadata>\n");
    let m = &doc.metadata;
    for (name, value) in [
        ("Creator", &m.creator),
        ("Created", &m.created),
        ("LastChange", &m.last_change),
    ] {
        writeln!(out, "    <{name}>{}</{name}>", escape(value.as_str())).unwrap();
    }
    out.push_str("  </Metadata>\n");
    write!(
        out,
        "  <Page imageFilename=\"{}\" imageWidth=\"{}\" imageHeight=\"{}\"",
        escape(doc.image_filename.as_str()),
        doc.image_width,
        doc.image_height
    )
    .unwrap();
    if doc.regions.is_empty() {
        out.push_str("/>\n");
    } else {
        out.push_str(">\n");
        for region in &doc.regions {
            writeln!(
                out,
                "    <TextRegion id=\"{}\">",
                escape(region.id.as_str())
            )
            .unwrap();
            write_points(&mut out, "      ", "Coords", &region.coords);
            for line in &region.lines {
                writeln!(out, "      <TextLine id=\"{}\">", escape(line.id.as_str())).unwrap();
                write_points(&mut out, "        ", "Coords", &line.coords);
                write_points(&mut out, "        ", "Baseline", &line.baseline);
                writeln!(
                    out,
                    "        <TextEquiv>\n          <Unicode>{}</Unicode>\n        </TextEquiv>",
                    escape(line.text.as_str())
                )
                .unwrap();
                out.push_str("      </TextLine>\n");
            }
            out.push_str("    </TextRegion>\n");
        }
        out.push_str("  </Page>\n");
    }
    out.push_str("</PcGts>\n");
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(body: &str) -> String {
        format!(
            "<?xml version=\"1.0\"?>\n<PcGts xmlns=\"{PAGE_NAMESPACE}\"><Metadata><Creator>t</Creator>\
             <Created>2020</Created><LastChange>2020</LastChange></Metadata>{body}</PcGts>"
        )
    }

    #[test]
    fn parses_lines_in_order() {
        let xml = page(
            "<Page imageFilename=\"p.jpg\" imageWidth=\"100\" imageHeight=\"200\">\
             <TextRegion id=\"r1\"><Coords points=\"0,0 10,0 10,10\"/>\
             <TextLine id=\"l1\"><Baseline points=\"1,5 9,5\"/><TextEquiv><Unicode>ñuruvag</Unicode></TextEquiv></TextLine>\
             <TextLine id=\"l2\"/></TextRegion></Page>",
        );
        let doc = parse_page_xml(xml.as_bytes()).unwrap();
        assert_eq!(doc.image_filename, "p.jpg");
        assert_eq!((doc.image_width, doc.image_height), (100, 200));
        assert_eq!(doc.line_count(), 2);
        let l1 = &doc.regions[0].lines[0];
        assert_eq!(l1.text, "ñuruvag");
        assert_eq!(
            l1.baseline,
            Some(Points(vec![Point { x: 1, y: 5 }, Point { x: 9, y: 5 }]))
        );
        assert_eq!(doc.regions[0].lines[1].text, "");
    }

    #[test]
    fn empty_page() {
        let doc = parse_page_xml(
            page("<Page imageFilename=\"x\" imageWidth=\"1\" imageHeight=\"1\"/>").as_bytes(),
        )
        .unwrap();
        assert!(doc.regions.is_empty());
        assert_eq!(parse_page_xml(&write_page_xml(&doc)).unwrap(), doc);
    }

    #[test]
    fn errors() {
        let xml = page("<Page><TextRegion id=\"r\"><TextLine id=\"l\">");
        assert!(matches!(
            parse_page_xml(xml.as_bytes()),
            Err(IngestError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_page_xml(b""),
            Err(IngestError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_page_xml(b"<a></b>"),
            Err(IngestError::MalformedXml(_))
        ));
        let old = "<PcGts xmlns=\"http://schema.primaresearch.org/PAGE/gts/pagecontent/2010-03-19\"><Page/></PcGts>";
        assert!(matches!(
            parse_page_xml(old.as_bytes()),
            Err(IngestError::UnsupportedSchema(_))
        ));
        assert!(matches!(
            parse_page_xml(b"<html/>"),
            Err(IngestError::UnsupportedSchema(_))
        ));
        let dup = page("<Page><TextRegion id=\"a\"><TextLine id=\"a\"/></TextRegion></Page>");
        assert!(
            matches!(parse_page_xml(dup.as_bytes()), Err(IngestError::DuplicateId(id)) if id == "a")
        );
    }

    #[test]
    fn newer_namespace_and_unknown_elements() {
        let xml = "<PcGts xmlns=\"http://schema.primaresearch.org/PAGE/gts/pagecontent/2019-07-15\">\
                   <Page><ReadingOrder/><TextRegion id=\"r\"><TextLine id=\"l\"><Word id=\"w\"/>\
                   <TextEquiv><Unicode>a &amp; b</Unicode></TextEquiv></TextLine></TextRegion></Page></PcGts>";
        let (doc, warnings) = parse_page_xml_with_warnings(xml.as_bytes()).unwrap();
        assert_eq!(doc.regions[0].lines[0].text, "a & b");
        let dropped: Vec<&str> = warnings.iter().map(|w| w.element.as_str()).collect();
        assert_eq!(dropped, ["ReadingOrder", "Word"]);
    }

    #[test]
    fn writer_round_trip_and_escaping() {
        let doc = PageDocument {
            id: Some("p<1>".into()),
            metadata: Metadata {
                creator: "otkit".into(),
                created: "c".into(),
                last_change: "d".into(),
            },
            image_filename: "a&b.jpg".into(),
            image_width: 3,
            image_height: 4,
            regions: vec![TextRegion {
                id: "r".into(),
                coords: Some(Points(vec![Point { x: -1, y: 2 }])),
                lines: vec![TextLine {
                    id: "l".into(),
                    coords: None,
                    baseline: Some(Points(vec![Point { x: 10, y: 20 }, Point { x: 30, y: 21 }])),
                    text: " \"12\" <afyas> ".into(),
                }],
            }],
        };
        let bytes = write_page_xml(&doc);
        assert_eq!(parse_page_xml(&bytes).unwrap(), doc);
        assert_eq!(write_page_xml(&doc), bytes);
        assert!(String::from_utf8(bytes)
            .unwrap()
            .contains("points=\"10,20 30,21\""));
    }

    #[test]
    fn points_syntax() {
        assert_eq!(Points::parse("").unwrap(), Points(vec![]));
        assert!(Points::parse("1;2").is_err());
        assert!(Points::parse("1,x").is_err());
        assert_eq!(Points::parse(" 1,2  3,4 ").unwrap().to_string(), "1,2 3,4");
    }
}
