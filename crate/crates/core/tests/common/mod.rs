use std::path::PathBuf;

use rsess::ast::Signature;
use rsess::syntax::parse_signature;

/// Every signature under `corpus/`, by file stem, in name order.
pub fn corpus() -> Vec<(String, Signature)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "rst"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let sig = parse_signature(&text).unwrap().signature;
            (p.file_stem().unwrap().to_string_lossy().into_owned(), sig)
        })
        .collect()
}

#[allow(dead_code)]
pub fn corpus_file(name: &str) -> Signature {
    corpus().into_iter().find(|(n, _)| n == name).unwrap().1
}
