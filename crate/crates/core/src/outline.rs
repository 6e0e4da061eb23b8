//! Section outline recovery from a flat passage sequence.
//!
//! `title_N` passages open a section at depth N; everything else is content
//! of the most recently opened section. Flattening the tree again yields the
//! original `(type, text)` rows.

use crate::model::{self, Passage};
use crate::jats::TITLE_PREFIX;

/// One non-title row kept under a section, with its passage type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Content {
    pub kind: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectionNode {
    pub title: Option<String>,
    /// 0 for the implicit root.
    pub depth: usize,
    pub paragraphs: Vec<Content>,
    pub children: Vec<SectionNode>,
}

impl SectionNode {
    pub fn root() -> Self {
        Self::default()
    }

    /// Paragraph texts only, without types.
    pub fn paragraph_texts(&self) -> Vec<&str> {
        self.paragraphs.iter().map(|c| c.text.as_str()).collect()
    }

    /// Number of sections below this node.
    pub fn section_count(&self) -> usize {
        self.children.iter().map(|c| 1 + c.section_count()).sum()
    }
}

/// Depth N of a `title_N` type, if it is one.
pub fn title_depth(kind: &str) -> Option<usize> {
    kind.strip_prefix(TITLE_PREFIX)
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

pub fn build_outline(passages: &[Passage]) -> SectionNode {
    build_outline_rows(
        passages
            .iter()
            .map(|p| (model::passage_type(p).unwrap_or_default(), p.text.as_str())),
    )
}

/// Builds the tree from `(type, text)` rows.
pub fn build_outline_rows<K, T, I>(rows: I) -> SectionNode
where
    K: AsRef<str>,
    T: AsRef<str>,
    I: IntoIterator<Item = (K, T)>,
{
    // Open sections, root first; each is attached to its parent when closed.
    let mut open = vec![SectionNode::root()];
    for (kind, text) in rows {
        let (kind, text) = (kind.as_ref(), text.as_ref());
        match title_depth(kind) {
            Some(depth) => {
                close_until(&mut open, depth);
                open.push(SectionNode {
                    title: Some(text.to_string()),
                    depth,
                    ..Default::default()
                });
            }
            None => open.last_mut().expect("root stays open").paragraphs.push(Content {
                kind: kind.to_string(),
                text: text.to_string(),
            }),
        }
    }
    close_until(&mut open, 1);
    open.pop().expect("root stays open")
}

/// Closes every open section with depth >= `depth`.
fn close_until(open: &mut Vec<SectionNode>, depth: usize) {
    while open.len() > 1 && open.last().is_some_and(|n| n.depth >= depth) {
        let node = open.pop().unwrap();
        open.last_mut().unwrap().children.push(node);
    }
}

/// Pre-order `(type, text)` rows: a titled node's title, then its content,
/// then its children.
pub fn flatten_outline(root: &SectionNode) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    flatten_into(root, &mut rows);
    rows
}

fn flatten_into(node: &SectionNode, rows: &mut Vec<(String, String)>) {
    if let Some(title) = &node.title {
        rows.push((format!("{TITLE_PREFIX}{}", node.depth), title.clone()));
    }
    rows.extend(node.paragraphs.iter().map(|c| (c.kind.clone(), c.text.clone())));
    for child in &node.children {
        flatten_into(child, rows);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OUTLINE_ROWS: [(&str, &str); 13] = [
        ("title_1", "Title of first section"),
        ("paragraph", "This is a paragraph in the first section"),
        ("title_2", "Title of first subsection"),
        ("paragraph", "This is a paragraph in this subsection"),
        ("paragraph", "This is another paragraph in the same subsection"),
        ("title_2", "Title of second subsection"),
        ("paragraph", "This is a paragraph in this subsection"),
        ("title_3", "Title of a subsubsection"),
        ("paragraph", "This is a paragraph in this subsubsection"),
        ("title_2", "Title of third subsection"),
        ("paragraph", "This is a paragraph in this subsection"),
        ("title_1", "Title of second section"),
        ("paragraph", "This is a paragraph in the second section"),
    ];

    fn owned(rows: &[(&str, &str)]) -> Vec<(String, String)> {
        rows.iter().map(|(k, t)| (k.to_string(), t.to_string())).collect()
    }

    #[test]
    fn outline_rows_shape() {
        let root = build_outline_rows(OUTLINE_ROWS);
        assert_eq!(root.depth, 0);
        assert!(root.title.is_none());
        assert!(root.paragraphs.is_empty());
        assert_eq!(root.children.len(), 2);
        let first = &root.children[0];
        assert_eq!(first.paragraphs.len(), 1);
        assert_eq!(first.children.len(), 3);
        assert!(first.children.iter().all(|c| c.depth == 2));
        assert_eq!(first.children[0].paragraphs.len(), 2);
        let second_sub = &first.children[1];
        assert_eq!(second_sub.children.len(), 1);
        assert_eq!(second_sub.children[0].depth, 3);
        assert_eq!(second_sub.children[0].paragraph_texts(), ["This is a paragraph in this subsubsection"]);
        assert_eq!(root.children[1].paragraphs.len(), 1);
        assert_eq!(root.section_count(), 6);
    }

    #[test]
    fn outline_rows_round_trip() {
        assert_eq!(flatten_outline(&build_outline_rows(OUTLINE_ROWS)), owned(&OUTLINE_ROWS));
    }

    #[test]
    fn empty_and_implicit_root() {
        let empty = build_outline(&[]);
        assert_eq!(empty, SectionNode::root());
        assert!(flatten_outline(&empty).is_empty());

        let root = build_outline(&[Passage::typed("paragraph", 0, "x")]);
        assert!(root.children.is_empty());
        assert_eq!(root.paragraph_texts(), ["x"]);
    }

    #[test]
    fn root_paragraphs_flatten() {
        let mut root = SectionNode::root();
        for t in ["a", "b"] {
            root.paragraphs.push(Content {
                kind: "paragraph".into(),
                text: t.into(),
            });
        }
        assert_eq!(flatten_outline(&root), owned(&[("paragraph", "a"), ("paragraph", "b")]));
    }

    #[test]
    fn depth_gap_attaches_to_nearest_shallower() {
        let rows = [("title_1", "A"), ("title_3", "deep"), ("paragraph", "p"), ("title_2", "B")];
        let root = build_outline_rows(rows);
        let a = &root.children[0];
        assert_eq!(a.children.len(), 2);
        assert_eq!(a.children[0].depth, 3);
        assert_eq!(a.children[1].depth, 2);
        assert_eq!(flatten_outline(&root), owned(&rows));
    }

    #[test]
    fn captions_are_leaf_content() {
        let rows = [
            ("front", "Article"),
            ("abstract", "Summary"),
            ("title_1", "Results"),
            ("paragraph", "p"),
            ("fig_caption", "Figure"),
            ("table_caption", "Table"),
        ];
        let root = build_outline_rows(rows);
        assert_eq!(root.paragraphs.len(), 2);
        assert_eq!(root.children[0].paragraphs.len(), 3);
        assert_eq!(flatten_outline(&root), owned(&rows));
    }

    #[test]
    fn title_depths() {
        assert_eq!(title_depth("title_1"), Some(1));
        assert_eq!(title_depth("title_12"), Some(12));
        assert_eq!(title_depth("title_0"), None);
        assert_eq!(title_depth("title_"), None);
        assert_eq!(title_depth("abstract_title_1"), None);
    }
}
