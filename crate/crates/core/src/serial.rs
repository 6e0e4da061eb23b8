//! BioC XML and BioC JSON serialization.
//!
//! Both writers produce a single canonical form, and both readers are strict:
//! anything outside the BioC vocabulary is rejected instead of skipped.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{
    Annotation, Collection, Document, InfonMap, Location, Node, Passage, Relation, Sentence,
};

/// The complete BioC XML element vocabulary.
pub const XML_ELEMENTS: [&str; 15] = [
    "collection",
    "source",
    "date",
    "key",
    "infon",
    "document",
    "id",
    "passage",
    "offset",
    "text",
    "sentence",
    "annotation",
    "location",
    "relation",
    "node",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SerializationFormat {
    Xml,
    Json,
}

impl SerializationFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            SerializationFormat::Xml => "xml",
            SerializationFormat::Json => "json",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            SerializationFormat::Xml => "application/xml; charset=utf-8",
            SerializationFormat::Json => "application/json; charset=utf-8",
        }
    }

    pub fn serialize(self, collection: &Collection) -> String {
        match self {
            SerializationFormat::Xml => to_xml(collection),
            SerializationFormat::Json => to_json(collection),
        }
    }

    pub fn deserialize(self, text: &str) -> Result<Collection, SerialError> {
        match self {
            SerializationFormat::Xml => from_xml(text),
            SerializationFormat::Json => from_json(text),
        }
    }
}

impl FromStr for SerializationFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xml" => Ok(SerializationFormat::Xml),
            "json" => Ok(SerializationFormat::Json),
            other => Err(format!("unknown format {other:?} (expected xml or json)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SerialError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("unknown element <{0}>")]
    UnknownElement(String),
    #[error("element <{name}> not allowed in {path}")]
    UnexpectedElement { path: String, name: String },
    #[error("unexpected text content in {0}")]
    UnexpectedText(String),
    #[error("unknown field {0}")]
    UnknownField(String),
    #[error("missing required field {0}")]
    MissingField(String),
    #[error("type mismatch at {0}")]
    TypeMismatch(String),
    #[error("invalid value at {path}: {value:?}")]
    InvalidValue { path: String, value: String },
    #[error("duplicate infon key at {0}")]
    DuplicateKey(String),
}

// ---------------------------------------------------------------------------
// XML writer

/// Serializes a collection as BioC XML.
///
/// Control characters other than tab, newline and carriage return cannot be
/// carried by XML 1.0; they are written as character references, which
/// [`from_xml`] rejects.
pub fn to_xml(collection: &Collection) -> String {
    let mut w = XmlWriter::default();
    w.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    w.open("collection", &[]);
    w.leaf("source", &collection.source);
    w.leaf("date", &collection.date);
    w.leaf("key", &collection.key);
    w.infons(&collection.infons);
    for doc in &collection.documents {
        w.open("document", &[]);
        w.leaf("id", &doc.id);
        w.infons(&doc.infons);
        for passage in &doc.passages {
            w.open("passage", &[]);
            w.infons(&passage.infons);
            w.leaf("offset", &passage.offset.to_string());
            w.leaf("text", &passage.text);
            for sentence in &passage.sentences {
                w.open("sentence", &[]);
                w.infons(&sentence.infons);
                w.leaf("offset", &sentence.offset.to_string());
                w.leaf("text", &sentence.text);
                w.annotations(&sentence.annotations);
                w.relations(&sentence.relations);
                w.close("sentence");
            }
            w.annotations(&passage.annotations);
            w.relations(&passage.relations);
            w.close("passage");
        }
        w.relations(&doc.relations);
        w.close("document");
    }
    w.close("collection");
    w.out
}

#[derive(Default)]
struct XmlWriter {
    out: String,
    depth: usize,
}

impl XmlWriter {
    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn start_tag(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.indent();
        self.out.push('<');
        self.out.push_str(name);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"");
            escape_into(&mut self.out, v, true);
            self.out.push('"');
        }
    }

    fn open(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.start_tag(name, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.indent();
        let _ = writeln!(self.out, "</{name}>");
    }

    fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.start_tag(name, attrs);
        self.out.push_str("/>\n");
    }

    fn leaf_with(&mut self, name: &str, attrs: &[(&str, &str)], text: &str) {
        self.start_tag(name, attrs);
        self.out.push('>');
        escape_into(&mut self.out, text, false);
        let _ = writeln!(self.out, "</{name}>");
    }

    fn leaf(&mut self, name: &str, text: &str) {
        self.leaf_with(name, &[], text);
    }

    fn infons(&mut self, infons: &InfonMap) {
        for (k, v) in infons.iter() {
            self.leaf_with("infon", &[("key", k)], v);
        }
    }

    fn annotations(&mut self, annotations: &[Annotation]) {
        for ann in annotations {
            self.open("annotation", &[("id", &ann.id)]);
            self.infons(&ann.infons);
            for loc in &ann.locations {
                let (o, l) = (loc.offset.to_string(), loc.length.to_string());
                self.empty("location", &[("offset", &o), ("length", &l)]);
            }
            self.leaf("text", &ann.text);
            self.close("annotation");
        }
    }

    fn relations(&mut self, relations: &[Relation]) {
        for rel in relations {
            self.open("relation", &[("id", &rel.id)]);
            self.infons(&rel.infons);
            for node in &rel.nodes {
                self.empty("node", &[("refid", &node.refid), ("role", &node.role)]);
            }
            self.close("relation");
        }
    }
}

/// Standard XML escaping. Control characters and CR become character
/// references, as do tab and newline inside attributes.
fn escape_into(out: &mut String, s: &str, attribute: bool) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attribute => out.push_str("&quot;"),
            '\t' | '\n' if attribute => {
                let _ = write!(out, "&#x{:X};", c as u32);
            }
            '\t' | '\n' => out.push(c),
            c if (c as u32) < 0x20 || c == '\u{7F}' => {
                let _ = write!(out, "&#x{:X};", c as u32);
            }
            c => out.push(c),
        }
    }
}

// ---------------------------------------------------------------------------
// XML reader

type XNode<'a, 'input> = roxmltree::Node<'a, 'input>;

/// Parses BioC XML. A `<!DOCTYPE>` declaration is tolerated; any element
/// outside the BioC vocabulary is an error.
pub fn from_xml(text: &str) -> Result<Collection, SerialError> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(text, opts).map_err(|e| {
        let pos = e.pos();
        SerialError::Parse {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    // Vocabulary check first so a stray JATS element is named even when it
    // also sits in the wrong place.
    if let Some(bad) = root
        .descendants()
        .filter(|n| n.is_element())
        .find(|n| !XML_ELEMENTS.contains(&n.tag_name().name()))
    {
        return Err(SerialError::UnknownElement(bad.tag_name().name().to_string()));
    }
    if root.tag_name().name() != "collection" {
        return Err(SerialError::UnexpectedElement {
            path: "/".into(),
            name: root.tag_name().name().into(),
        });
    }
    read_collection(root)
}

fn name_of<'a>(n: &XNode<'a, '_>) -> &'a str {
    n.tag_name().name()
}

/// Element children of `parent`, rejecting stray non-whitespace text.
fn element_children<'a, 'input>(
    parent: XNode<'a, 'input>,
    path: &str,
) -> Result<Vec<XNode<'a, 'input>>, SerialError> {
    let mut out = Vec::new();
    for child in parent.children() {
        if child.is_element() {
            out.push(child);
        } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            return Err(SerialError::UnexpectedText(path.to_string()));
        }
    }
    Ok(out)
}

fn leaf_text(n: XNode<'_, '_>, path: &str) -> Result<String, SerialError> {
    let mut s = String::new();
    for child in n.children() {
        if child.is_element() {
            return Err(SerialError::UnexpectedElement {
                path: path.to_string(),
                name: name_of(&child).to_string(),
            });
        }
        if let Some(t) = child.text().filter(|_| child.is_text()) {
            s.push_str(t);
        }
    }
    Ok(s)
}

fn leaf_usize(n: XNode<'_, '_>, path: &str) -> Result<usize, SerialError> {
    let raw = leaf_text(n, path)?;
    parse_usize(raw.trim(), path)
}

fn parse_usize(raw: &str, path: &str) -> Result<usize, SerialError> {
    raw.parse().map_err(|_| SerialError::InvalidValue {
        path: path.to_string(),
        value: raw.to_string(),
    })
}

fn attr(n: XNode<'_, '_>, name: &str, path: &str) -> Result<String, SerialError> {
    n.attribute(name)
        .map(str::to_string)
        .ok_or_else(|| SerialError::MissingField(format!("{path}@{name}")))
}

fn unexpected(path: &str, n: &XNode<'_, '_>) -> SerialError {
    SerialError::UnexpectedElement {
        path: path.to_string(),
        name: name_of(n).to_string(),
    }
}

fn push_infon(
    infons: &mut InfonMap,
    n: XNode<'_, '_>,
    path: &str,
) -> Result<(), SerialError> {
    let ipath = format!("{path}/infon");
    let key = attr(n, "key", &ipath)?;
    let value = leaf_text(n, &ipath)?;
    if infons.insert(key.clone(), value).is_some() {
        return Err(SerialError::DuplicateKey(format!("{ipath}[@key={key:?}]")));
    }
    Ok(())
}

fn read_collection(n: XNode<'_, '_>) -> Result<Collection, SerialError> {
    let path = "collection";
    let mut c = Collection::default();
    for child in element_children(n, path)? {
        let cpath = format!("{path}/{}", name_of(&child));
        match name_of(&child) {
            "source" => c.source = leaf_text(child, &cpath)?,
            "date" => c.date = leaf_text(child, &cpath)?,
            "key" => c.key = leaf_text(child, &cpath)?,
            "infon" => push_infon(&mut c.infons, child, path)?,
            "document" => {
                let dpath = format!("{path}/document[{}]", c.documents.len());
                c.documents.push(read_document(child, &dpath)?);
            }
            _ => return Err(unexpected(path, &child)),
        }
    }
    Ok(c)
}

fn read_document(n: XNode<'_, '_>, path: &str) -> Result<Document, SerialError> {
    let mut id = None;
    let mut doc = Document::default();
    for child in element_children(n, path)? {
        match name_of(&child) {
            "id" => id = Some(leaf_text(child, &format!("{path}/id"))?),
            "infon" => push_infon(&mut doc.infons, child, path)?,
            "passage" => {
                let ppath = format!("{path}/passage[{}]", doc.passages.len());
                doc.passages.push(read_passage(child, &ppath)?);
            }
            "relation" => {
                let rpath = format!("{path}/relation[{}]", doc.relations.len());
                doc.relations.push(read_relation(child, &rpath)?);
            }
            _ => return Err(unexpected(path, &child)),
        }
    }
    doc.id = id.ok_or_else(|| SerialError::MissingField(format!("{path}/id")))?;
    Ok(doc)
}

fn read_passage(n: XNode<'_, '_>, path: &str) -> Result<Passage, SerialError> {
    let mut offset = None;
    let mut p = Passage::default();
    for child in element_children(n, path)? {
        match name_of(&child) {
            "infon" => push_infon(&mut p.infons, child, path)?,
            "offset" => offset = Some(leaf_usize(child, &format!("{path}/offset"))?),
            "text" => p.text = leaf_text(child, &format!("{path}/text"))?,
            "sentence" => {
                let spath = format!("{path}/sentence[{}]", p.sentences.len());
                p.sentences.push(read_sentence(child, &spath)?);
            }
            "annotation" => {
                let apath = format!("{path}/annotation[{}]", p.annotations.len());
                p.annotations.push(read_annotation(child, &apath)?);
            }
            "relation" => {
                let rpath = format!("{path}/relation[{}]", p.relations.len());
                p.relations.push(read_relation(child, &rpath)?);
            }
            _ => return Err(unexpected(path, &child)),
        }
    }
    p.offset = offset.ok_or_else(|| SerialError::MissingField(format!("{path}/offset")))?;
    Ok(p)
}

fn read_sentence(n: XNode<'_, '_>, path: &str) -> Result<Sentence, SerialError> {
    let mut offset = None;
    let mut s = Sentence::default();
    for child in element_children(n, path)? {
        match name_of(&child) {
            "infon" => push_infon(&mut s.infons, child, path)?,
            "offset" => offset = Some(leaf_usize(child, &format!("{path}/offset"))?),
            "text" => s.text = leaf_text(child, &format!("{path}/text"))?,
            "annotation" => {
                let apath = format!("{path}/annotation[{}]", s.annotations.len());
                s.annotations.push(read_annotation(child, &apath)?);
            }
            "relation" => {
                let rpath = format!("{path}/relation[{}]", s.relations.len());
                s.relations.push(read_relation(child, &rpath)?);
            }
            _ => return Err(unexpected(path, &child)),
        }
    }
    s.offset = offset.ok_or_else(|| SerialError::MissingField(format!("{path}/offset")))?;
    Ok(s)
}

fn read_annotation(n: XNode<'_, '_>, path: &str) -> Result<Annotation, SerialError> {
    let mut a = Annotation {
        id: attr(n, "id", path)?,
        ..Default::default()
    };
    for child in element_children(n, path)? {
        match name_of(&child) {
            "infon" => push_infon(&mut a.infons, child, path)?,
            "location" => {
                let lpath = format!("{path}/location[{}]", a.locations.len());
                leaf_text(child, &lpath)?;
                let offset = parse_usize(&attr(child, "offset", &lpath)?, &format!("{lpath}@offset"))?;
                let length = parse_usize(&attr(child, "length", &lpath)?, &format!("{lpath}@length"))?;
                a.locations.push(Location { offset, length });
            }
            "text" => a.text = leaf_text(child, &format!("{path}/text"))?,
            _ => return Err(unexpected(path, &child)),
        }
    }
    Ok(a)
}

fn read_relation(n: XNode<'_, '_>, path: &str) -> Result<Relation, SerialError> {
    let mut r = Relation {
        id: attr(n, "id", path)?,
        ..Default::default()
    };
    for child in element_children(n, path)? {
        match name_of(&child) {
            "infon" => push_infon(&mut r.infons, child, path)?,
            "node" => {
                let npath = format!("{path}/node[{}]", r.nodes.len());
                leaf_text(child, &npath)?;
                r.nodes.push(Node {
                    refid: attr(child, "refid", &npath)?,
                    role: child.attribute("role").unwrap_or_default().to_string(),
                });
            }
            _ => return Err(unexpected(path, &child)),
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// JSON writer

/// Serializes a collection as BioC JSON (pretty-printed, fixed key order).
pub fn to_json(collection: &Collection) -> String {
    let mut out = serde_json::to_string_pretty(&collection_value(collection))
        .expect("serializing a JSON value cannot fail");
    out.push('\n');
    out
}

pub fn collection_value(c: &Collection) -> Value {
    let mut m = Map::new();
    m.insert("source".into(), c.source.clone().into());
    m.insert("date".into(), c.date.clone().into());
    m.insert("key".into(), c.key.clone().into());
    m.insert("infons".into(), infons_value(&c.infons));
    m.insert(
        "documents".into(),
        c.documents.iter().map(document_value).collect(),
    );
    Value::Object(m)
}

pub fn document_value(d: &Document) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), d.id.clone().into());
    m.insert("infons".into(), infons_value(&d.infons));
    m.insert("passages".into(), d.passages.iter().map(passage_value).collect());
    m.insert("relations".into(), d.relations.iter().map(relation_value).collect());
    Value::Object(m)
}

fn passage_value(p: &Passage) -> Value {
    let mut m = Map::new();
    m.insert("infons".into(), infons_value(&p.infons));
    m.insert("offset".into(), p.offset.into());
    m.insert("text".into(), p.text.clone().into());
    m.insert("sentences".into(), p.sentences.iter().map(sentence_value).collect());
    m.insert("annotations".into(), p.annotations.iter().map(annotation_value).collect());
    m.insert("relations".into(), p.relations.iter().map(relation_value).collect());
    Value::Object(m)
}

fn sentence_value(s: &Sentence) -> Value {
    let mut m = Map::new();
    m.insert("infons".into(), infons_value(&s.infons));
    m.insert("offset".into(), s.offset.into());
    m.insert("text".into(), s.text.clone().into());
    m.insert("annotations".into(), s.annotations.iter().map(annotation_value).collect());
    m.insert("relations".into(), s.relations.iter().map(relation_value).collect());
    Value::Object(m)
}

fn annotation_value(a: &Annotation) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), a.id.clone().into());
    m.insert("infons".into(), infons_value(&a.infons));
    m.insert("text".into(), a.text.clone().into());
    let locations = a
        .locations
        .iter()
        .map(|l| {
            let mut lm = Map::new();
            lm.insert("offset".into(), l.offset.into());
            lm.insert("length".into(), l.length.into());
            Value::Object(lm)
        })
        .collect();
    m.insert("locations".into(), locations);
    Value::Object(m)
}

fn relation_value(r: &Relation) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), r.id.clone().into());
    m.insert("infons".into(), infons_value(&r.infons));
    let nodes = r
        .nodes
        .iter()
        .map(|n| {
            let mut nm = Map::new();
            nm.insert("refid".into(), n.refid.clone().into());
            nm.insert("role".into(), n.role.clone().into());
            Value::Object(nm)
        })
        .collect();
    m.insert("nodes".into(), nodes);
    Value::Object(m)
}

fn infons_value(infons: &InfonMap) -> Value {
    Value::Object(
        infons
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// JSON reader

/// Parses a BioC JSON collection.
pub fn from_json(text: &str) -> Result<Collection, SerialError> {
    let value = parse_json(text)?;
    read_collection_json(&value)
}

/// Parses a single BioC JSON document object (paths are relative to it).
pub fn document_from_json(text: &str) -> Result<Document, SerialError> {
    let value = parse_json(text)?;
    read_document_json(&value, "")
}

fn parse_json(text: &str) -> Result<Value, SerialError> {
    serde_json::from_str(text).map_err(|e| SerialError::Parse {
        line: e.line() as u32,
        column: e.column() as u32,
        message: e.to_string(),
    })
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Typed view over one JSON object that tracks which keys were consumed.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: &'a str,
    allowed: &'static [&'static str],
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &'a str, allowed: &'static [&'static str]) -> Result<Self, SerialError> {
        let map = v.as_object().ok_or_else(|| SerialError::TypeMismatch(display_path(path)))?;
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(SerialError::UnknownField(join(path, k)));
        }
        Ok(Self { map, path, allowed })
    }

    fn field(&self, key: &str) -> Option<&'a Value> {
        debug_assert!(self.allowed.contains(&key));
        self.map.get(key)
    }

    fn required(&self, key: &str) -> Result<&'a Value, SerialError> {
        self.field(key)
            .ok_or_else(|| SerialError::MissingField(join(self.path, key)))
    }

    fn string(&self, key: &str, required: bool) -> Result<String, SerialError> {
        match self.field(key) {
            None if !required => Ok(String::new()),
            None => Err(SerialError::MissingField(join(self.path, key))),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(SerialError::TypeMismatch(join(self.path, key))),
        }
    }

    fn uint(&self, key: &str) -> Result<usize, SerialError> {
        let v = self.required(key)?;
        v.as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| SerialError::TypeMismatch(join(self.path, key)))
    }

    fn infons(&self) -> Result<InfonMap, SerialError> {
        let path = join(self.path, "infons");
        match self.field("infons") {
            None => Ok(InfonMap::new()),
            Some(Value::Object(m)) => m
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => Ok((k.clone(), s.clone())),
                    _ => Err(SerialError::TypeMismatch(format!("{path}.{k}"))),
                })
                .collect(),
            Some(_) => Err(SerialError::TypeMismatch(path)),
        }
    }

    /// Reads an array of objects; a missing optional key yields an empty list.
    fn list<T>(
        &self,
        key: &str,
        required: bool,
        read: impl Fn(&Value, &str) -> Result<T, SerialError>,
    ) -> Result<Vec<T>, SerialError> {
        let path = join(self.path, key);
        match self.field(key) {
            None if !required => Ok(Vec::new()),
            None => Err(SerialError::MissingField(path)),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, item)| read(item, &format!("{path}[{i}]")))
                .collect(),
            Some(_) => Err(SerialError::TypeMismatch(path)),
        }
    }
}

fn display_path(path: &str) -> String {
    if path.is_empty() {
        "$".into()
    } else {
        path.into()
    }
}

const COLLECTION_KEYS: &[&str] = &["source", "date", "key", "infons", "documents"];
const DOCUMENT_KEYS: &[&str] = &["id", "infons", "passages", "relations"];
const PASSAGE_KEYS: &[&str] = &["infons", "offset", "text", "sentences", "annotations", "relations"];
const SENTENCE_KEYS: &[&str] = &["infons", "offset", "text", "annotations", "relations"];
const ANNOTATION_KEYS: &[&str] = &["id", "infons", "text", "locations"];
const LOCATION_KEYS: &[&str] = &["offset", "length"];
const RELATION_KEYS: &[&str] = &["id", "infons", "nodes"];
const NODE_KEYS: &[&str] = &["refid", "role"];

fn read_collection_json(v: &Value) -> Result<Collection, SerialError> {
    let o = Obj::new(v, "", COLLECTION_KEYS)?;
    Ok(Collection {
        source: o.string("source", false)?,
        date: o.string("date", false)?,
        key: o.string("key", false)?,
        infons: o.infons()?,
        documents: o.list("documents", false, read_document_json)?,
    })
}

fn read_document_json(v: &Value, path: &str) -> Result<Document, SerialError> {
    let o = Obj::new(v, path, DOCUMENT_KEYS)?;
    Ok(Document {
        id: o.string("id", true)?,
        infons: o.infons()?,
        passages: o.list("passages", false, read_passage_json)?,
        relations: o.list("relations", false, read_relation_json)?,
    })
}

fn read_passage_json(v: &Value, path: &str) -> Result<Passage, SerialError> {
    let o = Obj::new(v, path, PASSAGE_KEYS)?;
    Ok(Passage {
        infons: o.infons()?,
        offset: o.uint("offset")?,
        text: o.string("text", true)?,
        sentences: o.list("sentences", false, read_sentence_json)?,
        annotations: o.list("annotations", false, read_annotation_json)?,
        relations: o.list("relations", false, read_relation_json)?,
    })
}

fn read_sentence_json(v: &Value, path: &str) -> Result<Sentence, SerialError> {
    let o = Obj::new(v, path, SENTENCE_KEYS)?;
    Ok(Sentence {
        infons: o.infons()?,
        offset: o.uint("offset")?,
        text: o.string("text", true)?,
        annotations: o.list("annotations", false, read_annotation_json)?,
        relations: o.list("relations", false, read_relation_json)?,
    })
}

fn read_annotation_json(v: &Value, path: &str) -> Result<Annotation, SerialError> {
    let o = Obj::new(v, path, ANNOTATION_KEYS)?;
    Ok(Annotation {
        id: o.string("id", true)?,
        infons: o.infons()?,
        text: o.string("text", false)?,
        locations: o.list("locations", true, |v, p| {
            let lo = Obj::new(v, p, LOCATION_KEYS)?;
            Ok(Location {
                offset: lo.uint("offset")?,
                length: lo.uint("length")?,
            })
        })?,
    })
}

fn read_relation_json(v: &Value, path: &str) -> Result<Relation, SerialError> {
    let o = Obj::new(v, path, RELATION_KEYS)?;
    Ok(Relation {
        id: o.string("id", true)?,
        infons: o.infons()?,
        nodes: o.list("nodes", true, |v, p| {
            let no = Obj::new(v, p, NODE_KEYS)?;
            Ok(Node {
                refid: no.string("refid", true)?,
                role: no.string("role", false)?,
            })
        })?,
    })
}
