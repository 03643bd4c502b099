use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Author, AuthorId, BookRef, BookRole, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    author: String,
    title: String,
    path: String,
    role: String,
}

/// Loads a `author,title,path,role` manifest. Book paths are resolved
/// relative to the manifest's directory and must be readable files.
pub fn load_manifest(manifest_path: &Path) -> Result<Corpus> {
    let file = File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);

    let manifest_err = |message: String| Error::Manifest {
        path: manifest_path.to_path_buf(),
        message,
    };
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["author", "title", "path", "role"] {
        return Err(manifest_err(format!(
            "expected header author,title,path,role, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut authors: Vec<Author> = Vec::new();
    let mut author_ids: HashMap<String, AuthorId> = HashMap::new();
    let mut seen = HashSet::new();
    let mut books = Vec::new();

    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row?;
        if row.author.is_empty() || row.title.is_empty() || row.path.is_empty() {
            return Err(manifest_err(format!("row {} has an empty field", line + 1)));
        }
        let role: BookRole = row.role.parse()?;
        if !seen.insert((row.author.clone(), row.title.clone())) {
            return Err(Error::DuplicateBook {
                author: row.author,
                title: row.title,
            });
        }
        let author = *author_ids.entry(row.author.clone()).or_insert_with(|| {
            let id = AuthorId(authors.len() as u32);
            authors.push(Author {
                id,
                name: row.author.clone(),
            });
            id
        });
        let path = base.join(&row.path);
        File::open(&path).map_err(|e| Error::io(&path, e))?;
        if !path.is_file() {
            return Err(manifest_err(format!("{} is not a file", path.display())));
        }
        books.push(BookRef {
            id: books.len(),
            author,
            title: row.title,
            path,
            role,
        });
    }

    if books.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for author in &authors {
        let mut roles = books.iter().filter(|b| b.author == author.id).map(|b| b.role);
        let first = roles.next().map(BookRole::is_ood);
        if roles.any(|r| Some(r.is_ood()) != first) {
            return Err(Error::MixedAuthorRole {
                author: author.name.clone(),
            });
        }
    }
    Ok(Corpus { authors, books })
}

/// Writes a manifest for `corpus` with paths relative to `base`.
pub fn write_manifest(corpus: &Corpus, base: &Path, out: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(out)?;
    for book in &corpus.books {
        let rel = book.path.strip_prefix(base).unwrap_or(&book.path);
        writer.serialize(Row {
            author: corpus.author(book.author).name.clone(),
            title: book.title.clone(),
            path: rel.to_string_lossy().replace('\\', "/"),
            role: book.role.as_str().to_string(),
        })?;
    }
    writer.flush().map_err(|e| Error::io(out, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn setup(rows: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("author,title,path,role\n");
        for row in rows {
            text.push_str(row);
            text.push('\n');
            let path = row.split(',').nth(2).unwrap();
            fs::write(dir.path().join(path), "Some text. More text.").unwrap();
        }
        let manifest = dir.path().join("manifest.csv");
        fs::write(&manifest, text).unwrap();
        (dir, manifest)
    }

    #[test]
    fn dense_ids_in_manifest_order() {
        let (_dir, manifest) = setup(&[
            "Bob,B1,b1.txt,known",
            "Alice,A1,a1.txt,known",
            "Bob,B2,b2.txt,known",
            "Alice,A2,a2.txt,known",
        ]);
        let corpus = load_manifest(&manifest).unwrap();
        assert_eq!(corpus.books.len(), 4);
        assert_eq!(corpus.authors.len(), 2);
        assert_eq!(corpus.authors[0].name, "Bob");
        let ids: Vec<u32> = corpus.books.iter().map(|b| b.author.0).collect();
        assert_eq!(ids, vec![0, 1, 0, 1]);
    }

    #[test]
    fn empty_manifest() {
        let (_dir, manifest) = setup(&[]);
        assert!(matches!(load_manifest(&manifest), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn mixed_roles_rejected() {
        let (_dir, manifest) = setup(&["X,T1,t1.txt,known", "X,T2,t2.txt,ood_test"]);
        assert!(matches!(load_manifest(&manifest), Err(Error::MixedAuthorRole { .. })));
    }

    #[test]
    fn ood_roles_may_mix() {
        let (_dir, manifest) = setup(&["X,T1,t1.txt,ood_validation", "X,T2,t2.txt,ood_test"]);
        assert!(load_manifest(&manifest).is_ok());
    }

    #[test]
    fn duplicate_rejected() {
        let (_dir, manifest) = setup(&["X,T1,t1.txt,known", "X,T1,t2.txt,known"]);
        assert!(matches!(load_manifest(&manifest), Err(Error::DuplicateBook { .. })));
    }

    #[test]
    fn missing_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_manifest(&dir.path().join("nope.csv")),
            Err(Error::Io { .. })
        ));
        let manifest = dir.path().join("m.csv");
        fs::write(&manifest, "author,title,path,role\nX,T,missing.txt,known\n").unwrap();
        assert!(matches!(load_manifest(&manifest), Err(Error::Io { .. })));
    }

    #[test]
    fn bad_header_and_role() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("m.csv");
        fs::write(&manifest, "who,title,path,role\n").unwrap();
        assert!(matches!(load_manifest(&manifest), Err(Error::Manifest { .. })));

        let (_dir, manifest) = setup(&["X,T1,t1.txt,maybe"]);
        assert!(matches!(load_manifest(&manifest), Err(Error::Parse { .. })));
    }

    #[test]
    fn write_then_load() {
        let (dir, manifest) = setup(&["X,T1,t1.txt,known", "Y,T2,t2.txt,ood_validation"]);
        let corpus = load_manifest(&manifest).unwrap();
        let out = dir.path().join("copy.csv");
        write_manifest(&corpus, dir.path(), &out).unwrap();
        assert_eq!(load_manifest(&out).unwrap(), corpus);
    }
}
