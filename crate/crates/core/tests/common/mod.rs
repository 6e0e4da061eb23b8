#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::Compression;
use pmc_bioc::model::{
    Annotation, Collection, Document, InfonMap, Location, Node, Passage, Relation, Sentence,
};
use proptest::prelude::*;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

/// `(file name, contents)` of the three fixture articles.
pub fn fixture_articles() -> Vec<(String, String)> {
    let mut names: Vec<_> = std::fs::read_dir(fixture_dir().join("articles"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let text = fixture(&format!("articles/{n}"));
            (n, text)
        })
        .collect()
}

/// Writes a gzip tar archive holding `members` and returns its path.
pub fn write_archive(dir: &Path, name: &str, members: &[(String, Vec<u8>)]) -> PathBuf {
    let path = dir.join(name);
    let file = std::fs::File::create(&path).unwrap();
    let mut builder = tar::Builder::new(GzEncoder::new(file, Compression::fast()));
    for (member, bytes) in members {
        let mut header = tar::Header::new_gnu();
        header.set_size(bytes.len() as u64);
        header.set_mode(0o644);
        header.set_cksum();
        builder.append_data(&mut header, member, bytes.as_slice()).unwrap();
    }
    builder.into_inner().unwrap().finish().unwrap().flush().unwrap();
    path
}

/// A small synthetic JATS article with the given ids.
pub fn synthetic_article(pmcid_digits: u64, pmid: Option<u64>, paragraphs: usize) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<article><front><article-meta>");
    if let Some(pmid) = pmid {
        s.push_str(&format!("<article-id pub-id-type=\"pmid\">{pmid}</article-id>"));
    }
    s.push_str(&format!(
        "<article-id pub-id-type=\"pmc\">{pmcid_digits}</article-id>\
         <title-group><article-title>Synthetic article {pmcid_digits} on TNF-&#x3b1;</article-title></title-group>\
         <abstract><p>Abstract of {pmcid_digits}.</p></abstract></article-meta></front><body>"
    ));
    for i in 0..paragraphs {
        s.push_str(&format!(
            "<sec><title>Section {i}</title><p>Paragraph {i} cites<sup><xref ref-type=\"bibr\" rid=\"B{i}\">{i}</xref></sup> \
             work on <italic>Caf&#xe9;</italic> cells at 37&#xb0;C.</p></sec>"
        ));
    }
    s.push_str("</body></article>\n");
    s
}

/// Characters XML 1.0 can carry.
fn xml_char() -> impl Strategy<Value = char> {
    prop_oneof![
        4 => prop::char::range('a', 'z'),
        1 => Just(' '),
        1 => prop::sample::select(vec!['<', '>', '&', '"', '\'', '\n', '\t', '\r', '\u{e9}', '\u{3b1}', '\u{2013}', '\u{1F600}']),
        1 => any::<char>().prop_filter("XML 1.0 character", |c| {
            let n = *c as u32;
            matches!(n, 0x9 | 0xA | 0xD) || (0x20..=0xD7FF).contains(&n) || (0xE000..=0xFFFD).contains(&n) || n >= 0x10000
        }),
    ]
}

pub fn text(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(xml_char(), 0..max).prop_map(|v| v.into_iter().collect())
}

fn key() -> impl Strategy<Value = String> {
    "[a-z_]{1,8}"
}

pub fn infons() -> impl Strategy<Value = InfonMap> {
    prop::collection::vec((key(), text(12)), 0..4).prop_map(|pairs| pairs.into_iter().collect())
}

fn location() -> impl Strategy<Value = Location> {
    (0usize..5000, 1usize..50).prop_map(|(offset, length)| Location { offset, length })
}

fn annotation() -> impl Strategy<Value = Annotation> {
    ("[A-Z][0-9]{1,3}", infons(), prop::collection::vec(location(), 1..3), text(10))
        .prop_map(|(id, infons, locations, text)| Annotation { id, infons, locations, text })
}

fn relation() -> impl Strategy<Value = Relation> {
    (
        "R[0-9]{1,3}",
        infons(),
        prop::collection::vec(("[A-Z][0-9]{1,3}", "[a-z]{0,6}"), 1..3),
    )
        .prop_map(|(id, infons, nodes)| Relation {
            id,
            infons,
            nodes: nodes.into_iter().map(|(refid, role)| Node { refid, role }).collect(),
        })
}

fn sentence() -> impl Strategy<Value = Sentence> {
    (
        infons(),
        0usize..5000,
        text(20),
        prop::collection::vec(annotation(), 0..2),
        prop::collection::vec(relation(), 0..2),
    )
        .prop_map(|(infons, offset, text, annotations, relations)| Sentence {
            infons,
            offset,
            text,
            annotations,
            relations,
        })
}

fn passage() -> impl Strategy<Value = Passage> {
    (
        infons(),
        0usize..100_000,
        text(40),
        prop::collection::vec(sentence(), 0..2),
        prop::collection::vec(annotation(), 0..3),
        prop::collection::vec(relation(), 0..2),
    )
        .prop_map(|(mut infons, offset, text, sentences, annotations, relations)| {
            infons.insert("type", "paragraph");
            Passage {
                infons,
                offset,
                text,
                sentences,
                annotations,
                relations,
            }
        })
}

fn document() -> impl Strategy<Value = Document> {
    (
        "PMC[0-9]{1,7}",
        infons(),
        prop::collection::vec(passage(), 0..4),
        prop::collection::vec(relation(), 0..2),
    )
        .prop_map(|(id, infons, passages, relations)| Document {
            id,
            infons,
            passages,
            relations,
        })
}

/// Random collections covering every model element.
pub fn collection() -> impl Strategy<Value = Collection> {
    (text(10), "[0-9]{8}", text(10), infons(), prop::collection::vec(document(), 0..3)).prop_map(
        |(source, date, key, infons, documents)| Collection {
            source,
            date,
            key,
            infons,
            documents,
        },
    )
}

/// Every element name appearing in an XML string.
pub fn element_names(xml: &str) -> BTreeSet<String> {
    let doc = roxmltree::Document::parse(xml).unwrap();
    doc.descendants()
        .filter(|n| n.is_element())
        .map(|n| n.tag_name().name().to_string())
        .collect()
}
