//! Acceptance criteria 1-8, each checked against its time limit.
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{fixture, fixture_articles, synthetic_article, write_archive};
use pmc_bioc::jats::{self, passage_types, ConversionOptions, JatsSourceInfo};
use pmc_bioc::model::{Collection, Document};
use pmc_bioc::outline::{build_outline, flatten_outline};
use pmc_bioc::serial::{from_json, from_xml, to_json, to_xml, XML_ELEMENTS};
use pmc_bioc::service::Service;
use pmc_bioc::store::{CollectionStats, SourceSet, Store};
use pmc_bioc::translit::{to_ascii, Encoding};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn convert(xml: &str, encoding: Encoding) -> Document {
    let info = JatsSourceInfo::from_jats(xml).unwrap();
    jats::convert(xml, &info, &ConversionOptions::with_encoding(encoding)).unwrap()
}

fn samples<S: Strategy>(strategy: S, n: usize) -> impl Iterator<Item = S::Value> {
    let mut runner = TestRunner::new(Config::default());
    (0..n).map(move |_| strategy.new_tree(&mut runner).unwrap().current())
}

fn ac1() -> Result<String, String> {
    let doc = convert(&fixture("citation_paragraph.xml"), Encoding::Unicode);
    let expected = fixture("citation_paragraph_expected.txt");
    let expected = expected.trim_end_matches('\n');
    ensure!(passage_types(&doc) == ["paragraph"], "types {:?}", passage_types(&doc));
    ensure!(doc.passages[0].text == expected, "text differs: {:?}", doc.passages[0].text);
    ensure!(expected.contains("New Yorker,New York Times"), "fixture spacing changed");
    Ok(format!("{} code points match", expected.chars().count()))
}

fn ac2() -> Result<String, String> {
    const ROWS: [&str; 13] = [
        "title_1", "paragraph", "title_2", "paragraph", "paragraph", "title_2", "paragraph",
        "title_3", "paragraph", "title_2", "paragraph", "title_1", "paragraph",
    ];
    let doc = convert(&fixture("nested_sections.xml"), Encoding::Unicode);
    ensure!(passage_types(&doc) == ROWS, "types {:?}", passage_types(&doc));
    let rows: Vec<(String, String)> = doc
        .passages
        .iter()
        .map(|p| (p.infons.get("type").unwrap().to_string(), p.text.clone()))
        .collect();
    ensure!(flatten_outline(&build_outline(&doc.passages)) == rows, "outline round trip differs");
    Ok("13 rows, outline round trip identical".into())
}

fn ac3() -> Result<String, String> {
    let mut names = BTreeSet::new();
    let n = 1000;
    for (i, c) in samples(common::collection(), n).enumerate() {
        let xml = to_xml(&c);
        let json = to_json(&c);
        let via_xml: Collection = from_xml(&xml).map_err(|e| format!("case {i}: {e}"))?;
        let via_json: Collection = from_json(&json).map_err(|e| format!("case {i}: {e}"))?;
        ensure!(via_xml == c, "case {i}: XML round trip differs");
        ensure!(via_json == c, "case {i}: JSON round trip differs");
        ensure!(to_json(&via_xml) == json, "case {i}: formats disagree");
        names.extend(common::element_names(&xml));
    }
    let stray: Vec<_> = names.iter().filter(|n| !XML_ELEMENTS.contains(&n.as_str())).collect();
    ensure!(stray.is_empty(), "elements outside whitelist: {stray:?}");
    Ok(format!("{n} collections, {} element names used", names.len()))
}

fn ac4() -> Result<String, String> {
    let s = CollectionStats::from_counts(1_907_370, 430_308, 19_065).map_err(|e| e.to_string())?;
    ensure!(s.combined_count == 2_318_613, "combined {}", s.combined_count);
    let n = 1000;
    let set = || prop::collection::btree_set(0u16..200, 0..60);
    for (oa, au) in samples((set(), set()), n) {
        let s = CollectionStats::from_sets(&oa, &au);
        let union = oa.iter().chain(&au).collect::<BTreeSet<_>>().len() as u64;
        let both = oa.iter().filter(|x| au.contains(*x)).count() as u64;
        ensure!(s.combined_count == union && s.overlap_count == both, "{s} vs union {union}");
    }
    Ok(format!("combined=2318613, {n} random pairs"))
}

fn fixture_store(dir: &std::path::Path) -> Arc<Store> {
    let members: Vec<_> = fixture_articles().into_iter().map(|(n, t)| (n, t.into_bytes())).collect();
    let archive = write_archive(dir, "fixtures.tar.gz", &members);
    let store = Store::open(dir.join("store")).unwrap();
    let report = store
        .ingest_archive(&archive, SourceSet::OpenAccess, &ConversionOptions::default())
        .unwrap();
    assert_eq!(report.converted, 3);
    Arc::new(store)
}

fn ac5() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let service = Service::new(fixture_store(dir.path()));
    let mut checked = 0;
    for encoding in ["unicode", "ascii"] {
        for format in ["xml", "json"] {
            let mut bodies = Vec::new();
            for id in ["17299597", "PMC1790863"] {
                let path = format!("/BioC_{format}/{id}/{encoding}");
                let r = service.handle_get(&path);
                ensure!(r.status == 200, "{path}: status {}", r.status);
                let expected_type = format!("application/{format}; charset=utf-8");
                ensure!(r.content_type == expected_type, "{path}: {}", r.content_type);
                let c = if format == "xml" { from_xml(r.body_str()) } else { from_json(r.body_str()) }
                    .map_err(|e| format!("{path}: {e}"))?;
                bodies.push(c.documents[0].passages.clone());
                checked += 1;
            }
            ensure!(bodies[0] == bodies[1], "{format}/{encoding}: PMID and PMCID differ");
        }
    }
    let r = service.handle_get("/BioC_xml/PMC999999/unicode");
    ensure!(r.status == 404, "unknown id gave {}", r.status);
    let r = service.handle_get("/BioC_pdf/PMC1790863/unicode");
    ensure!(r.status == 400, "bad format gave {}", r.status);
    Ok(format!("{checked} requests, 404 and 400 cases"))
}

fn ac6() -> Result<String, String> {
    let n = 10_000;
    for s in samples(any::<String>(), n) {
        let a = to_ascii(&s);
        ensure!(a.is_ascii(), "non-ASCII output for {s:?}");
        ensure!(to_ascii(&a) == a, "not idempotent for {s:?}");
    }
    for s in samples("[ -~\t\n\r]{0,80}", n) {
        ensure!(to_ascii(&s) == s, "ASCII input changed: {s:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let service = Service::new(fixture_store(dir.path()));
    for id in ["PMC1790863", "PMC2000002", "PMC3000003"] {
        for format in ["xml", "json"] {
            let r = service.handle_get(&format!("/BioC_{format}/{id}/ascii"));
            let c = if format == "xml" { from_xml(r.body_str()) } else { from_json(r.body_str()) }
                .map_err(|e| e.to_string())?;
            ensure!(
                c.documents[0].passages.iter().all(|p| p.text.is_ascii()),
                "{id} {format}: non-ASCII passage"
            );
        }
    }
    Ok(format!("{n} random strings, {n} ASCII strings, 6 responses"))
}

fn ac7() -> Result<String, String> {
    let mut passages = 0;
    let mut sources = fixture_articles();
    sources.push(("citation".into(), fixture("citation_paragraph.xml")));
    sources.push(("sections".into(), fixture("nested_sections.xml")));
    for (name, xml) in sources {
        for encoding in [Encoding::Unicode, Encoding::Ascii] {
            let doc = convert(&xml, encoding);
            let mut expected = 0;
            for p in &doc.passages {
                ensure!(p.offset == expected, "{name}: offset {} expected {expected}", p.offset);
                // Recount by iterating UTF-8 lead bytes.
                let count = p.text.bytes().filter(|b| b & 0xC0 != 0x80).count();
                expected += count + 1;
                passages += 1;
            }
        }
    }
    Ok(format!("{passages} passages"))
}

fn ac8() -> Result<String, String> {
    const OA: u64 = 600;
    const AU: u64 = 400;
    const SHARED: u64 = 150;
    let dir = tempfile::tempdir().unwrap();
    let member = |i: u64| (format!("PMC{i}.nxml"), synthetic_article(i, Some(30_000_000 + i), 3).into_bytes());
    let oa: Vec<_> = (1..=OA).map(member).collect();
    let au: Vec<_> = (OA - SHARED + 1..=OA - SHARED + AU).map(member).collect();
    let oa_archive = write_archive(dir.path(), "oa.tar.gz", &oa);
    let au_archive = write_archive(dir.path(), "au.tar.gz", &au);

    let start = Instant::now();
    let store = Store::open(dir.path().join("store")).unwrap();
    let opts = ConversionOptions::default();
    let mut failed = 0;
    let mut converted = 0;
    for (archive, set) in [(oa_archive, SourceSet::OpenAccess), (au_archive, SourceSet::AuthorManuscript)] {
        let report = store.ingest_archive(&archive, set, &opts).map_err(|e| e.to_string())?;
        failed += report.failed;
        converted += report.converted;
    }
    let elapsed = start.elapsed();
    ensure!(failed == 0, "{failed} failures");
    ensure!(converted == (OA + AU) as usize, "converted {converted}");
    let expected = CollectionStats::from_counts(OA, AU, SHARED).unwrap();
    ensure!(store.stats() == expected, "stats {} expected {expected}", store.stats());
    Ok(format!("{converted} files ingested in {:.2}s, {}", elapsed.as_secs_f64(), store.stats()))
}

fn main() {
    let criteria: [(&str, &str, Check, Duration); 8] = [
        ("AC1", "citation paragraph golden text", ac1, Duration::from_secs(1)),
        ("AC2", "section sequence and outline", ac2, Duration::from_secs(1)),
        ("AC3", "serialization round trips", ac3, Duration::from_secs(60)),
        ("AC4", "collection arithmetic", ac4, Duration::from_secs(10)),
        ("AC5", "API contract", ac5, Duration::from_secs(5)),
        ("AC6", "ASCII properties", ac6, Duration::from_secs(30)),
        ("AC7", "offset law", ac7, Duration::from_secs(5)),
        ("AC8", "ingestion throughput", ac8, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("{id} PASS {name} ({elapsed:.2?}): {detail}"),
            Err(reason) => {
                failures += 1;
                println!("{id} FAIL {name} ({elapsed:.2?}): {reason}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
