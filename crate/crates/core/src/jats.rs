//! JATS full-text article to BioC document conversion.
//!
//! The article is flattened into passages in reading order:
//!
//! | source                               | passage type            |
//! |--------------------------------------|-------------------------|
//! | `article-title`                      | `front`                 |
//! | `abstract` paragraphs                | `abstract`              |
//! | `abstract` section titles            | `abstract_title_N`      |
//! | `body` section titles                | `title_N` (N = `sec` depth) |
//! | `body` paragraphs                    | `paragraph`             |
//! | `fig` captions                       | `fig_caption`           |
//! | `table-wrap` captions                | `table_caption`         |
//!
//! Inline markup is unwrapped, citation cross references are removed along
//! with their text, and table bodies are not extracted.

use roxmltree::{Node, NodeType};
use thiserror::Error;

use crate::model::{self, Document, Passage, DEFAULT_SEPARATOR};
use crate::translit::{Encoding, TranslitTable};

pub const FRONT: &str = "front";
pub const ABSTRACT: &str = "abstract";
pub const PARAGRAPH: &str = "paragraph";
pub const FIG_CAPTION: &str = "fig_caption";
pub const TABLE_CAPTION: &str = "table_caption";
pub const TITLE_PREFIX: &str = "title_";
pub const ABSTRACT_TITLE_PREFIX: &str = "abstract_title_";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvertError {
    #[error("malformed XML at {line}:{column}: {message}")]
    Parse {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("no article title, abstract or body text found")]
    EmptyArticle,
    #[error("invalid PMC id {0:?}")]
    InvalidPmcid(String),
    #[error("no PMC id in article metadata")]
    MissingPmcid,
}

/// `PMC` followed by one or more ASCII digits.
pub fn is_pmcid(s: &str) -> bool {
    s.strip_prefix("PMC").is_some_and(is_pmid)
}

/// One or more ASCII digits.
pub fn is_pmid(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JatsSourceInfo {
    pmcid: String,
    pub pmid: Option<String>,
    pub journal: Option<String>,
}

impl JatsSourceInfo {
    pub fn new(pmcid: impl Into<String>) -> Result<Self, ConvertError> {
        let pmcid = pmcid.into();
        if !is_pmcid(&pmcid) {
            return Err(ConvertError::InvalidPmcid(pmcid));
        }
        Ok(Self {
            pmcid,
            pmid: None,
            journal: None,
        })
    }

    pub fn with_pmid(mut self, pmid: impl Into<String>) -> Self {
        self.pmid = Some(pmid.into());
        self
    }

    pub fn pmcid(&self) -> &str {
        &self.pmcid
    }

    /// Reads the PMC id, PubMed id and journal title from `article-meta` and
    /// `journal-meta`.
    pub fn from_jats(jats_xml: &str) -> Result<Self, ConvertError> {
        let doc = parse(jats_xml)?;
        let article = find_article(&doc).ok_or(ConvertError::EmptyArticle)?;
        let meta = child(article, "front").and_then(|f| child(f, "article-meta"));
        let mut pmcid = None;
        let mut pmid = None;
        for id in meta.into_iter().flat_map(|m| m.children()).filter(|n| is(n, "article-id")) {
            let value = text_of(id);
            match id.attribute("pub-id-type") {
                Some("pmc") | Some("pmcid") => {
                    let v = if value.starts_with("PMC") { value } else { format!("PMC{value}") };
                    pmcid = Some(v);
                }
                Some("pmid") => pmid = Some(value),
                _ => {}
            }
        }
        let mut info = Self::new(pmcid.ok_or(ConvertError::MissingPmcid)?)?;
        info.pmid = pmid.filter(|p| is_pmid(p));
        info.journal = child(article, "front")
            .and_then(|f| child(f, "journal-meta"))
            .and_then(|jm| jm.descendants().find(|n| is(n, "journal-title")))
            .map(|n| flatten_inline(n))
            .filter(|t| !t.is_empty());
        Ok(info)
    }

    /// Like [`from_jats`](Self::from_jats), falling back to a `PMC…` file
    /// stem such as `PMC1790863.nxml` when the metadata has no PMC id.
    pub fn from_jats_or_name(jats_xml: &str, file_name: &str) -> Result<Self, ConvertError> {
        match Self::from_jats(jats_xml) {
            Err(ConvertError::MissingPmcid) => std::path::Path::new(file_name)
                .file_stem()
                .and_then(|s| s.to_str())
                .filter(|s| is_pmcid(s))
                .ok_or(ConvertError::MissingPmcid)
                .and_then(Self::new),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConversionOptions {
    pub encoding: Encoding,
    pub separator: usize,
}

impl Default for ConversionOptions {
    fn default() -> Self {
        Self {
            encoding: Encoding::Unicode,
            separator: DEFAULT_SEPARATOR,
        }
    }
}

impl ConversionOptions {
    pub fn with_encoding(encoding: Encoding) -> Self {
        Self {
            encoding,
            ..Self::default()
        }
    }
}

/// Converts a JATS article into a BioC document with id `info.pmcid()`.
pub fn convert(
    jats_xml: &str,
    info: &JatsSourceInfo,
    options: &ConversionOptions,
) -> Result<Document, ConvertError> {
    convert_with_table(jats_xml, info, options, TranslitTable::standard())
}

pub fn convert_with_table(
    jats_xml: &str,
    info: &JatsSourceInfo,
    options: &ConversionOptions,
    table: &TranslitTable,
) -> Result<Document, ConvertError> {
    let doc = parse(jats_xml)?;
    let article = find_article(&doc).ok_or(ConvertError::EmptyArticle)?;
    let rows = passage_rows(article);
    if rows.is_empty() {
        return Err(ConvertError::EmptyArticle);
    }

    let mut document = Document::new(info.pmcid());
    for (kind, text) in rows {
        let mut passage = Passage::typed(kind.clone(), 0, text);
        if kind == FRONT {
            passage.infons.insert("article-id_pmc", info.pmcid());
            if let Some(pmid) = &info.pmid {
                passage.infons.insert("article-id_pmid", pmid.clone());
            }
            if let Some(journal) = &info.journal {
                passage.infons.insert("journal", journal.clone());
            }
        }
        document.passages.push(passage);
    }

    Ok(match options.encoding {
        Encoding::Unicode => model::recompute_offsets(document, options.separator),
        Encoding::Ascii => table.ascii_document(document, options.separator),
    })
}

/// `(type, text)` for every figure and table caption in the article, in
/// document order.
pub fn caption_passages(jats_xml: &str) -> Result<Vec<(String, String)>, ConvertError> {
    let doc = parse(jats_xml)?;
    Ok(doc
        .root_element()
        .descendants()
        .filter_map(caption_row)
        .collect())
}

fn parse(text: &str) -> Result<roxmltree::Document<'_>, ConvertError> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    roxmltree::Document::parse_with_options(text, opts).map_err(|e| {
        let pos = e.pos();
        ConvertError::Parse {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })
}

fn find_article<'a, 'i>(doc: &'a roxmltree::Document<'i>) -> Option<Node<'a, 'i>> {
    doc.root_element().descendants().find(|n| is(n, "article"))
}

fn is(n: &Node<'_, '_>, name: &str) -> bool {
    n.is_element() && n.tag_name().name() == name
}

fn child<'a, 'i>(n: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    n.children().find(|c| is(c, name))
}

fn text_of(n: Node<'_, '_>) -> String {
    n.descendants()
        .filter(|d| d.is_text())
        .filter_map(|d| d.text())
        .collect::<String>()
        .trim()
        .to_string()
}

const FLOATS: [&str; 4] = ["fig", "fig-group", "table-wrap", "table-wrap-group"];

/// Elements whose boundaries separate words.
const BLOCKS: [&str; 6] = ["p", "title", "list-item", "def-item", "disp-quote", "boxed-text"];

fn is_float(n: &Node<'_, '_>) -> bool {
    n.is_element() && FLOATS.contains(&n.tag_name().name())
}

/// The linear `(type, text)` sequence of an article, before offsets.
fn passage_rows(article: Node<'_, '_>) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    if let Some(meta) = child(article, "front").and_then(|f| child(f, "article-meta")) {
        if let Some(title) = meta.descendants().find(|n| is(n, "article-title")) {
            push_row(&mut rows, FRONT, flatten_inline(title));
        }
        for abs in meta.children().filter(|n| is(n, "abstract")) {
            walk_abstract(abs, 0, &mut rows);
        }
    }
    if let Some(body) = child(article, "body") {
        walk_body(body, 0, &mut rows);
    }
    if let Some(floats) = child(article, "floats-group") {
        walk_body(floats, 0, &mut rows);
    }
    rows
}

fn push_row(rows: &mut Vec<(String, String)>, kind: impl Into<String>, text: String) {
    if !text.is_empty() {
        rows.push((kind.into(), text));
    }
}

fn walk_abstract(node: Node<'_, '_>, depth: usize, rows: &mut Vec<(String, String)>) {
    for c in node.children().filter(Node::is_element) {
        match c.tag_name().name() {
            "sec" => {
                if let Some(title) = child(c, "title") {
                    push_row(rows, format!("{ABSTRACT_TITLE_PREFIX}{}", depth + 1), flatten_inline(title));
                }
                walk_abstract(c, depth + 1, rows);
            }
            "p" => push_row(rows, ABSTRACT, flatten_inline(c)),
            "title" | "label" | "sec-meta" => {}
            _ => walk_abstract(c, depth, rows),
        }
    }
}

fn walk_body(node: Node<'_, '_>, depth: usize, rows: &mut Vec<(String, String)>) {
    for c in node.children().filter(Node::is_element) {
        match c.tag_name().name() {
            "sec" => {
                if let Some(title) = child(c, "title") {
                    push_row(rows, format!("{TITLE_PREFIX}{}", depth + 1), flatten_inline(title));
                }
                walk_body(c, depth + 1, rows);
            }
            "p" => {
                push_row(rows, PARAGRAPH, flatten_inline(c));
                // Floats anchored inside the paragraph follow it.
                for f in c.descendants().filter(|d| is_float(d) && !has_float_ancestor(d, c)) {
                    emit_float(f, rows);
                }
            }
            "fig" | "fig-group" | "table-wrap" | "table-wrap-group" => emit_float(c, rows),
            "title" | "label" | "sec-meta" | "caption" | "table" | "ref-list" | "fn-group"
            | "supplementary-material" | "disp-formula" | "graphic" | "media" => {}
            _ => walk_body(c, depth, rows),
        }
    }
}

/// True if a float lies strictly between `n` and `top`.
fn has_float_ancestor(n: &Node<'_, '_>, top: Node<'_, '_>) -> bool {
    n.ancestors()
        .skip(1)
        .take_while(|a| *a != top)
        .any(|a| is_float(&a))
}

fn emit_float(f: Node<'_, '_>, rows: &mut Vec<(String, String)>) {
    // Groups contribute their members' captions; the group caption itself is
    // dropped.
    for d in f.descendants().filter(|d| is(d, "fig") || is(d, "table-wrap")) {
        if let Some(row) = caption_row(d) {
            push_row(rows, row.0, row.1);
        }
    }
}

fn caption_row(n: Node<'_, '_>) -> Option<(String, String)> {
    let kind = match n.tag_name().name() {
        "fig" if n.is_element() => FIG_CAPTION,
        "table-wrap" if n.is_element() => TABLE_CAPTION,
        _ => return None,
    };
    let caption = child(n, "caption")?;
    let text = flatten_inline(caption);
    (!text.is_empty()).then(|| (kind.to_string(), text))
}

/// Plain text of an inline subtree: `xref`s vanish with their text, a
/// `sup`/`sub` holding nothing but `xref`s and punctuation vanishes, other
/// formatting is unwrapped, and whitespace is collapsed and trimmed.
pub fn flatten_inline(node: Node<'_, '_>) -> String {
    let mut raw = String::new();
    collect_inline(node, &mut raw);
    collapse_whitespace(&raw)
}

/// [`flatten_inline`] over a standalone XML fragment (its root element).
pub fn flatten_inline_str(fragment: &str) -> Result<String, ConvertError> {
    let doc = parse(fragment)?;
    Ok(flatten_inline(doc.root_element()))
}

fn collect_inline(node: Node<'_, '_>, out: &mut String) {
    for c in node.children() {
        match c.node_type() {
            NodeType::Text => out.push_str(c.text().unwrap_or_default()),
            NodeType::Element => {
                let name = c.tag_name().name();
                if name == "xref" || is_float(&c) || is_citation_wrapper(c) {
                    continue;
                }
                let block = BLOCKS.contains(&name);
                if block {
                    out.push(' ');
                }
                collect_inline(c, out);
                if block {
                    out.push(' ');
                }
            }
            _ => {}
        }
    }
}

/// `<sup>`/`<sub>` whose only content is cross references plus punctuation.
fn is_citation_wrapper(n: Node<'_, '_>) -> bool {
    let name = n.tag_name().name();
    if name != "sup" && name != "sub" {
        return false;
    }
    let mut saw_xref = false;
    for c in n.children() {
        match c.node_type() {
            NodeType::Element if c.tag_name().name() == "xref" => saw_xref = true,
            NodeType::Element => return false,
            NodeType::Text if !c.text().unwrap_or_default().chars().all(is_separator_char) => {
                return false
            }
            _ => {}
        }
    }
    saw_xref
}

fn is_separator_char(c: char) -> bool {
    c.is_whitespace()
        || c.is_ascii_punctuation()
        || matches!(c, '\u{2010}'..='\u{2027}' | '\u{2212}')
}

fn is_xml_space(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

fn collapse_whitespace(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split(is_xml_space).filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Types of the passages in `doc`, for quick structural comparisons.
pub fn passage_types(doc: &Document) -> Vec<&str> {
    doc.passages
        .iter()
        .map(|p| model::passage_type(p).unwrap_or(""))
        .collect()
}
