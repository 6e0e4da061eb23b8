//! BioC in-memory data model.
//!
//! A [`Collection`] holds [`Document`]s, each a linear sequence of typed
//! [`Passage`]s. Offsets everywhere are counted in Unicode code points from
//! the start of the document text, so XML and JSON renderings agree no matter
//! how the bytes are encoded.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Infon key carrying a passage's type (`paragraph`, `title_1`, ...).
pub const TYPE_KEY: &str = "type";

/// Separator used between passages when computing document offsets.
pub const DEFAULT_SEPARATOR: usize = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("passage has no \"type\" infon")]
    MissingTypeInfon,
}

/// Number of Unicode code points in `text`; the unit of every offset.
pub fn codepoint_length(text: &str) -> usize {
    text.chars().count()
}

/// Key/value metadata attached to BioC objects. Insertion order is kept so
/// serialization is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InfonMap(IndexMap<String, String>);

impl InfonMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key` to `value`, returning the previous value. An existing key
    /// keeps its original position.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> Option<String> {
        self.0.insert(key.into(), value.into())
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for InfonMap {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Collection {
    pub source: String,
    /// Opaque date string, conventionally `YYYYMMDD`.
    pub date: String,
    pub key: String,
    pub infons: InfonMap,
    pub documents: Vec<Document>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub infons: InfonMap,
    pub passages: Vec<Passage>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Passage {
    pub infons: InfonMap,
    pub offset: usize,
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub annotations: Vec<Annotation>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sentence {
    pub infons: InfonMap,
    pub offset: usize,
    pub text: String,
    pub annotations: Vec<Annotation>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotation {
    pub id: String,
    pub infons: InfonMap,
    pub locations: Vec<Location>,
    pub text: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Location {
    pub offset: usize,
    pub length: usize,
}

impl Location {
    pub fn new(offset: usize, length: usize) -> Self {
        Self { offset, length }
    }

    pub fn end(&self) -> usize {
        self.offset + self.length
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relation {
    pub id: String,
    pub infons: InfonMap,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Node {
    pub refid: String,
    pub role: String,
}

impl Collection {
    pub fn new(source: impl Into<String>, date: impl Into<String>, key: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            date: date.into(),
            key: key.into(),
            ..Default::default()
        }
    }
}

impl Document {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Default::default()
        }
    }
}

impl Passage {
    /// A passage of the given type with no stand-off markup.
    pub fn typed(kind: impl Into<String>, offset: usize, text: impl Into<String>) -> Self {
        Self {
            infons: InfonMap::new().with(TYPE_KEY, kind),
            offset,
            text: text.into(),
            ..Default::default()
        }
    }

    /// Half-open code point span `[offset, offset + len(text))`.
    pub fn span(&self) -> (usize, usize) {
        (self.offset, self.offset + codepoint_length(&self.text))
    }
}

impl Sentence {
    pub fn span(&self) -> (usize, usize) {
        (self.offset, self.offset + codepoint_length(&self.text))
    }
}

/// Value of the passage's `type` infon.
pub fn passage_type(passage: &Passage) -> Result<&str, ModelError> {
    match passage.infons.get(TYPE_KEY) {
        Some(t) if !t.is_empty() => Ok(t),
        _ => Err(ModelError::MissingTypeInfon),
    }
}

/// Lays passages end to end: the first starts at 0 and each next one starts
/// `separator` code points after the previous one ends.
///
/// Sentence offsets and annotation locations shift by the same amount as
/// their passage.
pub fn recompute_offsets(mut document: Document, separator: usize) -> Document {
    let mut next = 0usize;
    for passage in &mut document.passages {
        let old = passage.offset;
        passage.offset = next;
        if old != next {
            let shift = |o: usize| (o as i128 - old as i128 + next as i128).max(0) as usize;
            for sentence in &mut passage.sentences {
                sentence.offset = shift(sentence.offset);
                shift_annotations(&mut sentence.annotations, &shift);
            }
            shift_annotations(&mut passage.annotations, &shift);
        }
        next += codepoint_length(&passage.text) + separator;
    }
    document
}

fn shift_annotations(annotations: &mut [Annotation], shift: &impl Fn(usize) -> usize) {
    for location in annotations.iter_mut().flat_map(|a| a.locations.iter_mut()) {
        location.offset = shift(location.offset);
    }
}

/// Names of the validity rules checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    EmptyDocumentId,
    DuplicateDocumentId,
    EmptyInfonKey,
    MissingTypeInfon,
    OffsetsNotIncreasing,
    SentenceOutsidePassage,
    AnnotationOutsidePassage,
    AnnotationOutsideSentence,
    NoLocations,
    ZeroLengthLocation,
    AnnotationTextLength,
    DuplicateAnnotationId,
    NoNodes,
    EmptyRefid,
    UnresolvedRefid,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::EmptyDocumentId => "document id empty",
            Rule::DuplicateDocumentId => "duplicate document id",
            Rule::EmptyInfonKey => "empty infon key",
            Rule::MissingTypeInfon => "passage missing type infon",
            Rule::OffsetsNotIncreasing => "passage offsets not increasing",
            Rule::SentenceOutsidePassage => "sentence outside passage span",
            Rule::AnnotationOutsidePassage => "annotation outside passage span",
            Rule::AnnotationOutsideSentence => "annotation outside sentence span",
            Rule::NoLocations => "annotation has no locations",
            Rule::ZeroLengthLocation => "location length zero",
            Rule::AnnotationTextLength => "annotation text length differs from location length",
            Rule::DuplicateAnnotationId => "duplicate annotation id",
            Rule::NoNodes => "relation has no nodes",
            Rule::EmptyRefid => "node refid empty",
            Rule::UnresolvedRefid => "node refid does not resolve",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Location of the offending value, e.g. `passages[2].annotations[0]`.
    pub path: String,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, path: impl Into<String>, rule: Rule) {
        self.violations.push(Violation {
            path: path.into(),
            rule,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant and reports all violations found.
pub fn validate(document: &Document) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_into(document, "", &mut report);
    report
}

/// Validates each document plus collection-level id uniqueness.
pub fn validate_collection(collection: &Collection) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_infons(&collection.infons, "infons", &mut report);
    let mut seen = HashSet::new();
    for (i, doc) in collection.documents.iter().enumerate() {
        let prefix = format!("documents[{i}].");
        if !seen.insert(doc.id.as_str()) {
            report.push(format!("documents[{i}].id"), Rule::DuplicateDocumentId);
        }
        validate_into(doc, &prefix, &mut report);
    }
    report
}

fn validate_into(document: &Document, prefix: &str, report: &mut ValidationReport) {
    if document.id.is_empty() {
        report.push(format!("{prefix}id"), Rule::EmptyDocumentId);
    }
    check_infons(&document.infons, &format!("{prefix}infons"), report);

    let mut previous: Option<usize> = None;
    for (i, passage) in document.passages.iter().enumerate() {
        let path = format!("{prefix}passages[{i}]");
        if let Some(prev) = previous {
            if passage.offset <= prev {
                report.push(format!("{path}.offset"), Rule::OffsetsNotIncreasing);
            }
        }
        previous = Some(passage.offset);
        validate_passage(passage, &path, report);
    }

    let mut visible = HashSet::new();
    for passage in &document.passages {
        collect_ids(&passage.annotations, &passage.relations, &mut visible);
        for sentence in &passage.sentences {
            collect_ids(&sentence.annotations, &sentence.relations, &mut visible);
        }
    }
    collect_ids(&[], &document.relations, &mut visible);
    check_relations(&document.relations, &visible, &format!("{prefix}relations"), report);
}

fn validate_passage(passage: &Passage, path: &str, report: &mut ValidationReport) {
    check_infons(&passage.infons, &format!("{path}.infons"), report);
    if passage_type(passage).is_err() {
        report.push(format!("{path}.infons"), Rule::MissingTypeInfon);
    }
    let span = passage.span();

    for (j, sentence) in passage.sentences.iter().enumerate() {
        let spath = format!("{path}.sentences[{j}]");
        check_infons(&sentence.infons, &format!("{spath}.infons"), report);
        let s = sentence.span();
        if s.0 < span.0 || s.1 > span.1 {
            report.push(spath.clone(), Rule::SentenceOutsidePassage);
        }
        check_annotations(
            &sentence.annotations,
            s,
            Rule::AnnotationOutsideSentence,
            &spath,
            report,
        );
        let mut visible = HashSet::new();
        collect_ids(&sentence.annotations, &sentence.relations, &mut visible);
        check_relations(&sentence.relations, &visible, &format!("{spath}.relations"), report);
    }

    check_annotations(
        &passage.annotations,
        span,
        Rule::AnnotationOutsidePassage,
        path,
        report,
    );
    let mut visible = HashSet::new();
    collect_ids(&passage.annotations, &passage.relations, &mut visible);
    for sentence in &passage.sentences {
        collect_ids(&sentence.annotations, &sentence.relations, &mut visible);
    }
    check_relations(&passage.relations, &visible, &format!("{path}.relations"), report);
}

fn check_infons(infons: &InfonMap, path: &str, report: &mut ValidationReport) {
    if infons.iter().any(|(k, _)| k.is_empty()) {
        report.push(path, Rule::EmptyInfonKey);
    }
}

fn check_annotations(
    annotations: &[Annotation],
    (start, end): (usize, usize),
    outside: Rule,
    path: &str,
    report: &mut ValidationReport,
) {
    let mut ids = HashSet::new();
    for (k, ann) in annotations.iter().enumerate() {
        let apath = format!("{path}.annotations[{k}]");
        check_infons(&ann.infons, &format!("{apath}.infons"), report);
        if !ids.insert(ann.id.as_str()) {
            report.push(format!("{apath}.id"), Rule::DuplicateAnnotationId);
        }
        if ann.locations.is_empty() {
            report.push(apath.clone(), Rule::NoLocations);
        }
        for (l, loc) in ann.locations.iter().enumerate() {
            let lpath = format!("{apath}.locations[{l}]");
            if loc.length == 0 {
                report.push(lpath, Rule::ZeroLengthLocation);
            } else if loc.offset < start || loc.end() > end {
                report.push(lpath, outside);
            }
        }
        if let [only] = ann.locations.as_slice() {
            if only.length != 0 && codepoint_length(&ann.text) != only.length {
                report.push(format!("{apath}.text"), Rule::AnnotationTextLength);
            }
        }
    }
}

fn collect_ids<'a>(annotations: &'a [Annotation], relations: &'a [Relation], ids: &mut HashSet<&'a str>) {
    ids.extend(annotations.iter().map(|a| a.id.as_str()));
    ids.extend(relations.iter().map(|r| r.id.as_str()));
}

fn check_relations(
    relations: &[Relation],
    visible: &HashSet<&str>,
    path: &str,
    report: &mut ValidationReport,
) {
    for (k, rel) in relations.iter().enumerate() {
        let rpath = format!("{path}[{k}]");
        check_infons(&rel.infons, &format!("{rpath}.infons"), report);
        if rel.nodes.is_empty() {
            report.push(rpath.clone(), Rule::NoNodes);
        }
        for (n, node) in rel.nodes.iter().enumerate() {
            let npath = format!("{rpath}.nodes[{n}]");
            if node.refid.is_empty() {
                report.push(npath, Rule::EmptyRefid);
            } else if !visible.contains(node.refid.as_str()) {
                report.push(npath, Rule::UnresolvedRefid);
            }
        }
    }
}
