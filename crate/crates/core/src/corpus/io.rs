//! JSONL thread files and CSV edge files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{validate_thread, Corpus, CorpusError, Population, Result, SocialGraph, Thread};

/// Options applied while loading.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub population: Population,
    /// Drop threads with fewer comments than this.
    pub min_length: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_corpus(threads_path: impl AsRef<Path>, edges_path: impl AsRef<Path>) -> Result<Corpus> {
    load_corpus_with(threads_path, edges_path, &LoadOptions::default())
}

pub fn load_corpus_with(
    threads_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<Corpus> {
    let threads_path = threads_path.as_ref();
    let edges_path = edges_path.as_ref();
    let threads = read_threads(BufReader::new(File::open(threads_path).map_err(io_err(threads_path))?))?;
    let graph = read_edges(File::open(edges_path).map_err(io_err(edges_path))?)?;
    let threads = threads.into_iter().filter(|t| t.len() >= options.min_length).collect();
    Corpus::new(threads, graph, options.population)
}

/// Parses one thread per non-blank line, validating each record.
pub fn read_threads<R: BufRead>(reader: R) -> Result<Vec<Thread>> {
    let mut threads = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let thread: Thread = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let violations = validate_thread(&thread);
        if !violations.is_empty() {
            return Err(CorpusError::InvalidThread {
                line: line_no,
                thread_id: thread.thread_id,
                violations,
            });
        }
        if !ids.insert(thread.thread_id.clone()) {
            return Err(CorpusError::DuplicateThreadId {
                line: line_no,
                thread_id: thread.thread_id,
            });
        }
        threads.push(thread);
    }
    Ok(threads)
}

/// Parses a headerless two-column `u,v` edge list.
pub fn read_edges<R: Read>(reader: R) -> Result<SocialGraph> {
    let mut graph = SocialGraph::new();
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    for (i, record) in csv.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| CorpusError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(CorpusError::Malformed {
                line,
                message: format!("expected 2 columns (u,v), found {}", record.len()),
            });
        }
        let (u, v) = (&record[0], &record[1]);
        if u.is_empty() || v.is_empty() {
            return Err(CorpusError::Malformed {
                line,
                message: "empty vertex id".to_string(),
            });
        }
        graph.add_edge(u, v).map_err(|_| CorpusError::SelfLoop {
            line,
            vertex: u.to_string(),
        })?;
    }
    Ok(graph)
}

pub fn write_threads<W: Write>(mut writer: W, threads: &[Thread]) -> std::io::Result<()> {
    for t in threads {
        serde_json::to_writer(&mut writer, t)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_edges<W: Write>(writer: W, graph: &SocialGraph) -> std::io::Result<()> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for (u, v) in graph.edges() {
        csv.write_record([u, v])?;
    }
    csv.flush()
}

/// Writes the canonical file pair that [`load_corpus`] reads back.
pub fn save_corpus(corpus: &Corpus, threads_path: impl AsRef<Path>, edges_path: impl AsRef<Path>) -> Result<()> {
    let threads_path = threads_path.as_ref();
    let edges_path = edges_path.as_ref();
    let f = File::create(threads_path).map_err(io_err(threads_path))?;
    write_threads(BufWriter::new(f), corpus.threads()).map_err(io_err(threads_path))?;
    let f = File::create(edges_path).map_err(io_err(edges_path))?;
    write_edges(BufWriter::new(f), corpus.graph()).map_err(io_err(edges_path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_THREAD: &str = r#"{"thread_id":"t1","poster_id":"mary","post":{"text":"Anyone there","time":0},"comments":[],"post_likes":[]}"#;

    #[test]
    fn minimal_thread_loads() {
        let threads = read_threads(ONE_THREAD.as_bytes()).unwrap();
        let corpus = Corpus::new(threads, read_edges("".as_bytes()).unwrap(), Population::Synthetic).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.threads()[0].len(), 0);
    }

    #[test]
    fn comment_before_post_names_thread_and_field() {
        let line = r#"{"thread_id":"bad","poster_id":"p","post":{"text":"x","time":100},"comments":[{"author_id":"a","text":"y","time":50,"likes":0}],"post_likes":[]}"#;
        let err = read_threads(line.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad") && msg.contains("post time"), "{msg}");
    }

    #[test]
    fn malformed_record_names_line() {
        let input = format!("{ONE_THREAD}\n{{\"thread_id\": 3}}\n");
        let err = read_threads(input.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_thread_is_rejected() {
        let input = format!("{ONE_THREAD}\n{ONE_THREAD}\n");
        let err = read_threads(input.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateThreadId { line: 2, .. }));
    }

    #[test]
    fn self_loop_edge_is_rejected() {
        let err = read_edges("a,b\nc,c\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::SelfLoop { line: 2, .. }), "{err}");
    }

    #[test]
    fn wrong_column_count_is_malformed() {
        let err = read_edges("a,b,c\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 1, .. }));
    }

    #[test]
    fn empty_corpus_writes_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let (tp, ep) = (dir.path().join("t.jsonl"), dir.path().join("e.csv"));
        save_corpus(&Corpus::empty(Population::Synthetic), &tp, &ep).unwrap();
        assert_eq!(std::fs::read(&tp).unwrap().len(), 0);
        assert_eq!(std::fs::read(&ep).unwrap().len(), 0);
    }

    #[test]
    fn single_thread_is_one_line() {
        let dir = tempfile::tempdir().unwrap();
        let (tp, ep) = (dir.path().join("t.jsonl"), dir.path().join("e.csv"));
        let corpus = Corpus::new(
            read_threads(ONE_THREAD.as_bytes()).unwrap(),
            SocialGraph::new(),
            Population::Synthetic,
        )
        .unwrap();
        save_corpus(&corpus, &tp, &ep).unwrap();
        let text = std::fs::read_to_string(&tp).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end(), ONE_THREAD);
        assert_eq!(load_corpus(&tp, &ep).unwrap(), corpus);
    }

    #[test]
    fn min_length_filter_applies_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let (tp, ep) = (dir.path().join("t.jsonl"), dir.path().join("e.csv"));
        std::fs::write(&tp, format!("{ONE_THREAD}\n")).unwrap();
        std::fs::write(&ep, "").unwrap();
        let opts = LoadOptions {
            min_length: 1,
            ..Default::default()
        };
        assert!(load_corpus_with(&tp, &ep, &opts).unwrap().is_empty());
    }
}
