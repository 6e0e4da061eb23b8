//! Local document store: one BioC XML file per article, an identifier index,
//! and membership in the Open Access (OA) and Author Manuscript (AU) sets.
//!
//! Layout under the store root:
//!
//! ```text
//! index.json                      identifier index and set membership
//! docs/63/08/PMC1790863.xml       one single-document BioC XML collection
//! ```
//!
//! Documents are sharded by the last two and the preceding two digits of the
//! numeric part of the PMC id (zero padded).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jats::{self, is_pmcid, is_pmid, ConversionOptions, ConvertError, JatsSourceInfo};
use crate::model::{self, Collection, Document};
use crate::serial::{self, SerialError};

pub const INDEX_FILE: &str = "index.json";
pub const DOCS_DIR: &str = "docs";
pub const COLLECTION_SOURCE: &str = "local";
pub const COLLECTION_KEY: &str = "bioc.key";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdError {
    #[error("unknown id {0}")]
    UnknownId(String),
    #[error("malformed id {0:?}: expected digits (PMID) or PMC followed by digits (PMCID)")]
    MalformedId(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Id(#[from] IdError),
    #[error("document {0} not found")]
    NotFound(String),
    #[error("invalid document {id}: {reason}")]
    InvalidDocument { id: String, reason: String },
    #[error("archive unreadable: {path}: {source}")]
    ArchiveUnreadable { path: PathBuf, source: io::Error },
    #[error("id map {path}: {message}")]
    IdMap { path: PathBuf, message: String },
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("store i/o at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Which PMC text-mining set an article was ingested from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceSet {
    OpenAccess,
    AuthorManuscript,
}

impl SourceSet {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceSet::OpenAccess => "oa",
            SourceSet::AuthorManuscript => "au",
        }
    }
}

impl FromStr for SourceSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "oa" => Ok(SourceSet::OpenAccess),
            "au" => Ok(SourceSet::AuthorManuscript),
            other => Err(format!("unknown set {other:?} (expected oa or au)")),
        }
    }
}

/// PMID to PMCID mapping plus the set of known PMCIDs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdIndex {
    pmid_to_pmcid: BTreeMap<String, String>,
    pmcid_set: BTreeSet<String>,
}

impl IdIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_pmcid(&mut self, pmcid: &str) -> Result<(), IdError> {
        if !is_pmcid(pmcid) {
            return Err(IdError::MalformedId(pmcid.to_string()));
        }
        self.pmcid_set.insert(pmcid.to_string());
        Ok(())
    }

    /// Maps `pmid` to `pmcid`, registering the PMCID too.
    pub fn insert_mapping(&mut self, pmid: &str, pmcid: &str) -> Result<(), IdError> {
        if !is_pmid(pmid) {
            return Err(IdError::MalformedId(pmid.to_string()));
        }
        self.insert_pmcid(pmcid)?;
        self.pmid_to_pmcid.insert(pmid.to_string(), pmcid.to_string());
        Ok(())
    }

    pub fn contains_pmcid(&self, pmcid: &str) -> bool {
        self.pmcid_set.contains(pmcid)
    }

    pub fn pmcid_for(&self, pmid: &str) -> Option<&str> {
        self.pmid_to_pmcid.get(pmid).map(String::as_str)
    }

    pub fn mapping_count(&self) -> usize {
        self.pmid_to_pmcid.len()
    }

    /// Reads `PMID,PMCID` rows (with that header) and adds each mapping.
    /// Returns the number of rows read.
    pub fn load_csv(&mut self, reader: impl Read) -> Result<usize, String> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| format!("missing {name} column"))
        };
        let (pmid_col, pmcid_col) = (col("PMID")?, col("PMCID")?);
        let mut rows = 0;
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            let line = i + 2;
            let pmid = record.get(pmid_col).unwrap_or_default();
            let pmcid = record.get(pmcid_col).unwrap_or_default();
            self.insert_mapping(pmid, pmcid)
                .map_err(|e| format!("line {line}: {e}"))?;
            rows += 1;
        }
        Ok(rows)
    }
}

/// Resolves a raw PMID or PMCID to a known PMCID.
pub fn resolve_id(raw: &str, index: &IdIndex) -> Result<String, IdError> {
    if is_pmcid(raw) {
        if index.contains_pmcid(raw) {
            return Ok(raw.to_string());
        }
        return Err(IdError::UnknownId(raw.to_string()));
    }
    if is_pmid(raw) {
        return index
            .pmcid_for(raw)
            .map(str::to_string)
            .ok_or_else(|| IdError::UnknownId(raw.to_string()));
    }
    Err(IdError::MalformedId(raw.to_string()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("overlap {overlap} exceeds the smaller set ({oa} OA, {au} AU)")]
pub struct StatsError {
    pub oa: u64,
    pub au: u64,
    pub overlap: u64,
}

/// Set sizes with inclusion-exclusion: combined = OA + AU - overlap.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollectionStats {
    pub open_access_count: u64,
    pub author_manuscript_count: u64,
    pub overlap_count: u64,
    pub combined_count: u64,
}

impl CollectionStats {
    pub fn from_counts(oa: u64, au: u64, overlap: u64) -> Result<Self, StatsError> {
        if overlap > oa.min(au) {
            return Err(StatsError { oa, au, overlap });
        }
        Ok(Self {
            open_access_count: oa,
            author_manuscript_count: au,
            overlap_count: overlap,
            combined_count: oa + au - overlap,
        })
    }

    pub fn from_sets<T: Ord>(oa: &BTreeSet<T>, au: &BTreeSet<T>) -> Self {
        let overlap = oa.intersection(au).count() as u64;
        Self::from_counts(oa.len() as u64, au.len() as u64, overlap)
            .expect("an intersection is never larger than either set")
    }
}

impl fmt::Display for CollectionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "oa={} au={} overlap={} combined={}",
            self.open_access_count, self.author_manuscript_count, self.overlap_count, self.combined_count
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub converted: usize,
    pub failed: usize,
    pub skipped: usize,
    /// `(member name, reason)` for every failed member.
    pub errors: Vec<(String, String)>,
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.converted + self.failed + self.skipped
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "converted={} failed={} skipped={}",
            self.converted, self.failed, self.skipped
        )
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Membership {
    #[serde(default)]
    oa: bool,
    #[serde(default)]
    au: bool,
    /// Times the document body was written.
    revision: u32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct State {
    index: IdIndex,
    documents: BTreeMap<String, Membership>,
}

impl State {
    fn stats(&self) -> CollectionStats {
        let (mut oa, mut au, mut both) = (0, 0, 0);
        for m in self.documents.values() {
            oa += m.oa as u64;
            au += m.au as u64;
            both += (m.oa && m.au) as u64;
        }
        CollectionStats::from_counts(oa, au, both).expect("overlap counted from the same members")
    }
}

/// File-backed article store. Readers share a lock; writers take it
/// exclusively while a document file and the index are updated.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    state: RwLock<State>,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let docs = root.join(DOCS_DIR);
        fs::create_dir_all(&docs).map_err(io_err(&docs))?;
        let index_path = root.join(INDEX_FILE);
        let state = match fs::read_to_string(&index_path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
                path: index_path.clone(),
                message: e.to_string(),
            })?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => State::default(),
            Err(e) => return Err(io_err(&index_path)(e)),
        };
        Ok(Self {
            root,
            state: RwLock::new(state),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Path of the document file for `pmcid`.
    pub fn document_path(&self, pmcid: &str) -> PathBuf {
        let digits = pmcid.trim_start_matches("PMC");
        let padded = format!("{digits:0>4}");
        let n = padded.len();
        self.root
            .join(DOCS_DIR)
            .join(&padded[n - 2..])
            .join(&padded[n - 4..n - 2])
            .join(format!("{pmcid}.xml"))
    }

    pub fn id_index(&self) -> IdIndex {
        self.state.read().unwrap().index.clone()
    }

    pub fn resolve(&self, raw: &str) -> Result<String, IdError> {
        resolve_id(raw, &self.state.read().unwrap().index)
    }

    /// Stores `doc` (replacing any previous version) and records it as a
    /// member of `set`.
    pub fn put_document(&self, doc: &Document, set: SourceSet) -> Result<(), StoreError> {
        let mut state = self.state.write().unwrap();
        self.put_locked(&mut state, doc, set, None)?;
        self.persist(&state)
    }

    /// Records `pmid` as another name for `pmcid`.
    pub fn map_pmid(&self, pmid: &str, pmcid: &str) -> Result<(), StoreError> {
        let mut state = self.state.write().unwrap();
        state.index.insert_mapping(pmid, pmcid)?;
        self.persist(&state)
    }

    /// Loads a `PMID,PMCID` CSV into the index; returns the row count.
    pub fn import_id_map(&self, path: impl AsRef<Path>) -> Result<usize, StoreError> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut state = self.state.write().unwrap();
        let mut index = state.index.clone();
        let rows = index.load_csv(file).map_err(|message| StoreError::IdMap {
            path: path.to_path_buf(),
            message,
        })?;
        state.index = index;
        self.persist(&state)?;
        Ok(rows)
    }

    fn put_locked(
        &self,
        state: &mut State,
        doc: &Document,
        set: SourceSet,
        pmid: Option<&str>,
    ) -> Result<(), StoreError> {
        let invalid = |reason: String| StoreError::InvalidDocument {
            id: doc.id.clone(),
            reason,
        };
        if !is_pmcid(&doc.id) {
            return Err(invalid("id is not a PMC id".into()));
        }
        let report = model::validate(doc);
        if !report.is_empty() {
            return Err(invalid(report.to_string()));
        }
        if let Some(pmid) = pmid {
            if !is_pmid(pmid) {
                return Err(invalid(format!("malformed PMID {pmid:?}")));
            }
        }

        let path = self.document_path(&doc.id);
        let dir = path.parent().expect("document path has a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut collection = Collection::new(COLLECTION_SOURCE, "", COLLECTION_KEY);
        collection.documents.push(doc.clone());
        write_atomic(&path, serial::to_xml(&collection).as_bytes())?;

        state.index.insert_pmcid(&doc.id)?;
        if let Some(pmid) = pmid {
            state.index.insert_mapping(pmid, &doc.id)?;
        }
        let entry = state.documents.entry(doc.id.clone()).or_default();
        entry.revision += 1;
        match set {
            SourceSet::OpenAccess => entry.oa = true,
            SourceSet::AuthorManuscript => entry.au = true,
        }
        Ok(())
    }

    fn persist(&self, state: &State) -> Result<(), StoreError> {
        let text = serde_json::to_string_pretty(state).expect("index serializes");
        write_atomic(&self.root.join(INDEX_FILE), text.as_bytes())
    }

    pub fn get_document(&self, pmcid: &str) -> Result<Document, StoreError> {
        if !self.state.read().unwrap().documents.contains_key(pmcid) {
            return Err(StoreError::NotFound(pmcid.to_string()));
        }
        let path = self.document_path(pmcid);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let corrupt = |message: String| StoreError::Corrupt {
            path: path.clone(),
            message,
        };
        let collection = serial::from_xml(&text).map_err(|e: SerialError| corrupt(e.to_string()))?;
        collection
            .documents
            .into_iter()
            .find(|d| d.id == pmcid)
            .ok_or_else(|| corrupt(format!("no document {pmcid}")))
    }

    /// Resolves a PMID or PMCID and fetches the document.
    pub fn get_by_id(&self, raw: &str) -> Result<Document, StoreError> {
        let pmcid = self.resolve(raw)?;
        self.get_document(&pmcid)
    }

    /// How many times `pmcid` has been written (0 if absent).
    pub fn revision(&self, pmcid: &str) -> u32 {
        self.state
            .read()
            .unwrap()
            .documents
            .get(pmcid)
            .map_or(0, |m| m.revision)
    }

    pub fn document_ids(&self) -> Vec<String> {
        self.state.read().unwrap().documents.keys().cloned().collect()
    }

    pub fn stats(&self) -> CollectionStats {
        self.state.read().unwrap().stats()
    }

    /// Converts and stores every `.xml`/`.nxml` member of a gzip tar
    /// archive. Members that fail are reported and leave nothing behind;
    /// other regular files are skipped.
    pub fn ingest_archive(
        &self,
        path: impl AsRef<Path>,
        set: SourceSet,
        options: &ConversionOptions,
    ) -> Result<IngestReport, StoreError> {
        let path = path.as_ref();
        let unreadable = |source: io::Error| StoreError::ArchiveUnreadable {
            path: path.to_path_buf(),
            source,
        };
        let file = fs::File::open(path).map_err(unreadable)?;
        let mut archive = tar::Archive::new(flate2::read::GzDecoder::new(file));
        let mut report = IngestReport::default();

        let result = (|| {
            for entry in archive.entries().map_err(unreadable)? {
                let mut entry = entry.map_err(unreadable)?;
                if !entry.header().entry_type().is_file() {
                    continue;
                }
                let name = entry
                    .path()
                    .map(|p| p.to_string_lossy().into_owned())
                    .unwrap_or_else(|_| "<unnamed>".into());
                if !(name.ends_with(".xml") || name.ends_with(".nxml")) {
                    report.skipped += 1;
                    continue;
                }
                let mut bytes = Vec::new();
                entry.read_to_end(&mut bytes).map_err(unreadable)?;
                let stored = convert_member(&name, bytes, options).and_then(|(doc, pmid)| {
                    let mut state = self.state.write().unwrap();
                    self.put_locked(&mut state, &doc, set, pmid.as_deref())
                        .map_err(|e| e.to_string())
                });
                match stored {
                    Ok(()) => report.converted += 1,
                    Err(reason) => {
                        report.failed += 1;
                        report.errors.push((name, reason));
                    }
                }
            }
            Ok(())
        })();
        self.persist(&self.state.read().unwrap())?;
        result.map(|()| report)
    }
}

/// Converts one archive member, returning the document and its PMID.
fn convert_member(
    name: &str,
    bytes: Vec<u8>,
    options: &ConversionOptions,
) -> Result<(Document, Option<String>), String> {
    let text = String::from_utf8(bytes).map_err(|_| "not valid UTF-8".to_string())?;
    let info = JatsSourceInfo::from_jats_or_name(&text, name).map_err(|e| match e {
        ConvertError::MissingPmcid => "no PMC id in metadata or file name".to_string(),
        e => e.to_string(),
    })?;
    let doc = jats::convert(&text, &info, options).map_err(|e| e.to_string())?;
    Ok((doc, info.pmid))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Passage;

    fn doc(id: &str, text: &str) -> Document {
        let mut d = Document::new(id);
        d.passages.push(Passage::typed("paragraph", 0, text));
        d
    }

    fn index() -> IdIndex {
        let mut index = IdIndex::new();
        index.insert_mapping("17299597", "PMC1790863").unwrap();
        index
    }

    #[test]
    fn resolve_forms() {
        let index = index();
        assert_eq!(resolve_id("PMC1790863", &index).unwrap(), "PMC1790863");
        assert_eq!(resolve_id("17299597", &index).unwrap(), "PMC1790863");
        assert_eq!(resolve_id("PMCabc", &index), Err(IdError::MalformedId("PMCabc".into())));
        assert_eq!(resolve_id("PMC1", &index), Err(IdError::UnknownId("PMC1".into())));
        assert_eq!(resolve_id("1", &index), Err(IdError::UnknownId("1".into())));
        assert!(matches!(resolve_id("", &index), Err(IdError::MalformedId(_))));
        assert!(matches!(resolve_id("pmc1790863", &index), Err(IdError::MalformedId(_))));
    }

    #[test]
    fn csv_mapping() {
        let mut index = IdIndex::new();
        let n = index.load_csv("PMID,PMCID\n17299597,PMC1790863\n1, PMC2\n".as_bytes()).unwrap();
        assert_eq!(n, 2);
        assert_eq!(index.pmcid_for("1"), Some("PMC2"));
        assert!(index.contains_pmcid("PMC2"));
        assert!(IdIndex::new().load_csv("PMID,PMCID\nx,PMC1\n".as_bytes()).unwrap_err().contains("line 2"));
        assert!(IdIndex::new().load_csv("A,B\n1,PMC1\n".as_bytes()).is_err());
    }

    #[test]
    fn published_counts() {
        let s = CollectionStats::from_counts(1_907_370, 430_308, 19_065).unwrap();
        assert_eq!(s.combined_count, 2_318_613);
        assert!(CollectionStats::from_counts(1, 5, 2).is_err());
    }

    #[test]
    fn stats_from_sets() {
        let oa: BTreeSet<_> = ["a", "b"].into();
        let au: BTreeSet<_> = ["b", "c"].into();
        let s = CollectionStats::from_sets(&oa, &au);
        assert_eq!(
            (s.open_access_count, s.author_manuscript_count, s.overlap_count, s.combined_count),
            (2, 2, 1, 3)
        );
        assert_eq!(CollectionStats::default().to_string(), "oa=0 au=0 overlap=0 combined=0");
    }

    #[test]
    fn put_get_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(matches!(store.get_document("PMC1"), Err(StoreError::NotFound(_))));
        let d1 = doc("PMC1790863", "first");
        store.put_document(&d1, SourceSet::OpenAccess).unwrap();
        assert_eq!(store.get_document("PMC1790863").unwrap(), d1);
        let d2 = doc("PMC1790863", "second");
        store.put_document(&d2, SourceSet::OpenAccess).unwrap();
        assert_eq!(store.get_document("PMC1790863").unwrap(), d2);
        assert_eq!(store.revision("PMC1790863"), 2);
        assert!(store.document_path("PMC1790863").ends_with("docs/63/08/PMC1790863.xml"));
        assert!(store.document_path("PMC7").ends_with("docs/07/00/PMC7.xml"));

        // Reopening reads the persisted index.
        let reopened = Store::open(dir.path()).unwrap();
        assert_eq!(reopened.get_document("PMC1790863").unwrap(), d2);
        assert_eq!(reopened.stats(), store.stats());
    }

    #[test]
    fn set_membership() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.put_document(&doc("PMC5", "x"), SourceSet::OpenAccess).unwrap();
        store.put_document(&doc("PMC5", "x"), SourceSet::AuthorManuscript).unwrap();
        let s = store.stats();
        assert_eq!((s.open_access_count, s.author_manuscript_count, s.overlap_count), (1, 1, 1));

        for id in ["PMC1", "PMC2", "PMC3"] {
            store.put_document(&doc(id, "x"), SourceSet::OpenAccess).unwrap();
        }
        assert_eq!(store.stats().combined_count, 4);
    }

    #[test]
    fn invalid_documents_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let err = store.put_document(&doc("17299597", "x"), SourceSet::OpenAccess).unwrap_err();
        assert!(matches!(err, StoreError::InvalidDocument { .. }));
        let mut bad = doc("PMC9", "x");
        bad.passages.push(Passage::typed("paragraph", 0, "y"));
        assert!(matches!(
            store.put_document(&bad, SourceSet::OpenAccess),
            Err(StoreError::InvalidDocument { .. })
        ));
        assert!(store.document_ids().is_empty());
        assert!(!store.document_path("PMC9").exists());
    }

    #[test]
    fn source_set_parse() {
        assert_eq!("oa".parse::<SourceSet>(), Ok(SourceSet::OpenAccess));
        assert_eq!("AU".parse::<SourceSet>(), Ok(SourceSet::AuthorManuscript));
        assert!("pmc".parse::<SourceSet>().is_err());
    }
}
