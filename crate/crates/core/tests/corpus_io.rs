use std::fs;
use std::io::Write;
use std::path::Path;

use drafttrace::corpus::{load_corpus, load_histories, load_history};
use drafttrace::{Error, Source};

const TEXTS: [&str; 4] = ["One.", "One. Two.", "One. Two.", "One. Two. Three."];

fn snapshot_dir(root: &Path, author: &str) {
    let dir = root.join(author);
    fs::create_dir_all(&dir).unwrap();
    for (k, t) in TEXTS.iter().enumerate() {
        fs::write(dir.join(format!("{k:02}.txt")), t).unwrap();
    }
    fs::write(dir.join(".DS_Store"), b"\xff\xfe").unwrap();
}

#[test]
fn snapshot_directories() {
    let tmp = tempfile::tempdir().unwrap();
    snapshot_dir(tmp.path(), "ana");
    snapshot_dir(tmp.path(), "ben");

    let single = Source::detect(tmp.path().join("ana")).unwrap();
    assert!(matches!(single, Source::SnapshotDir(_)));
    let h = load_history(&single).unwrap();
    assert_eq!(h.author_id, "ana");
    assert_eq!(h.texts(), TEXTS);
    assert_eq!(h.source_meta["format"], "snapshot-dir");

    let corpus = Source::detect(tmp.path()).unwrap();
    assert!(matches!(corpus, Source::CorpusDir(_)));
    assert!(matches!(
        load_history(&corpus),
        Err(Error::MultipleAuthors(_, 2))
    ));
    // load_corpus deduplicates the repeated snapshot
    let c = load_corpus(&[tmp.path()]).unwrap();
    let ids: Vec<&str> = c.histories.iter().map(|h| h.author_id.as_str()).collect();
    assert_eq!(ids, ["ana", "ben"]);
    assert!(c.histories.iter().all(|h| h.len() == 3));
}

#[test]
fn record_files_group_and_order_by_time() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("drafts.jsonl");
    let lines = [
        r#"{"author_id":"b","timestamp":"2020-01-01T10:00:00Z","text":"second"}"#,
        r#"{"author_id":"a","text":"x"}"#,
        "",
        r#"{"author_id":"b","timestamp":"2020-01-01 09:00:00","text":"first"}"#,
        r#"{"author_id":"a","text":"y"}"#,
    ];
    fs::write(&path, lines.join("\n")).unwrap();
    let hs = load_histories(&Source::detect(&path).unwrap()).unwrap();
    assert_eq!(hs.len(), 2);
    assert_eq!(hs[0].author_id, "a");
    assert_eq!(hs[0].texts(), ["x", "y"]);
    assert_eq!(hs[1].texts(), ["first", "second"]);
    assert!(hs[1].versions[0].timestamp.is_some());

    fs::write(&path, "{\"author_id\":\"a\"}\n").unwrap();
    assert!(matches!(
        load_histories(&Source::detect(&path).unwrap()),
        Err(Error::BadRecord { line: 1, .. })
    ));
}

#[test]
fn zip_and_tar_archives() {
    let tmp = tempfile::tempdir().unwrap();

    let zip_path = tmp.path().join("corpus.zip");
    let mut zip = zip::ZipWriter::new(fs::File::create(&zip_path).unwrap());
    let opts = zip::write::SimpleFileOptions::default();
    for author in ["p", "q"] {
        for (k, t) in TEXTS.iter().enumerate().rev() {
            zip.start_file(format!("corpus/{author}/{k:02}.txt"), opts)
                .unwrap();
            zip.write_all(t.as_bytes()).unwrap();
        }
    }
    zip.start_file("corpus/.hidden/00.txt", opts).unwrap();
    zip.write_all(b"ignored").unwrap();
    zip.finish().unwrap();

    let tgz_path = tmp.path().join("corpus.tar.gz");
    let gz = flate2::write::GzEncoder::new(
        fs::File::create(&tgz_path).unwrap(),
        flate2::Compression::default(),
    );
    let mut tar = tar::Builder::new(gz);
    for (k, t) in TEXTS.iter().enumerate() {
        let mut header = tar::Header::new_gnu();
        header.set_size(t.len() as u64);
        header.set_mode(0o644);
        header.set_cksum();
        tar.append_data(&mut header, format!("./r/{k:02}.txt"), t.as_bytes())
            .unwrap();
    }
    tar.into_inner().unwrap().finish().unwrap();

    let zipped = load_histories(&Source::detect(&zip_path).unwrap()).unwrap();
    let ids: Vec<&str> = zipped.iter().map(|h| h.author_id.as_str()).collect();
    assert_eq!(ids, ["p", "q"]);
    assert!(zipped.iter().all(|h| h.texts() == TEXTS));

    let tarred = load_history(&Source::detect(&tgz_path).unwrap()).unwrap();
    assert_eq!(tarred.author_id, "r");
    assert_eq!(tarred.texts(), TEXTS);
}

#[test]
fn unreadable_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("bad");
    fs::create_dir_all(&dir).unwrap();
    assert!(matches!(
        load_history(&Source::detect(&dir).unwrap()),
        Err(Error::ZeroSnapshots(_))
    ));
    fs::write(dir.join("00.txt"), b"\xff\xfe\xfd").unwrap();
    assert!(matches!(
        load_history(&Source::detect(&dir).unwrap()),
        Err(Error::Undecodable(_))
    ));
    let other = tmp.path().join("notes.docx");
    fs::write(&other, b"").unwrap();
    assert!(matches!(
        Source::detect(&other),
        Err(Error::UnsupportedSource(_))
    ));
}
