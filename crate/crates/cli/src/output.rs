use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const SUMMARY: &str = "summary.json";
pub const SWEEP: &str = "sweep.json";

/// Directory for a new result. A missing directory is created; one that
/// already holds a result gets a fresh timestamped subdirectory.
pub fn prepare(dir: &Path) -> io::Result<PathBuf> {
    if !holds_result(dir) {
        fs::create_dir_all(dir)?;
        return Ok(dir.to_path_buf());
    }
    let stamp = chrono::Local::now().format("run-%Y%m%dT%H%M%S").to_string();
    let mut sub = dir.join(&stamp);
    let mut k = 1;
    while sub.exists() {
        sub = dir.join(format!("{stamp}-{k}"));
        k += 1;
    }
    fs::create_dir_all(&sub)?;
    Ok(sub)
}

fn holds_result(dir: &Path) -> bool {
    dir.join(SUMMARY).exists() || dir.join(SWEEP).exists()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_result_goes_to_a_subdirectory() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("out");
        assert_eq!(prepare(&dir).unwrap(), dir);
        assert_eq!(prepare(&dir).unwrap(), dir);
        fs::write(dir.join(SUMMARY), "{}").unwrap();
        let a = prepare(&dir).unwrap();
        let b = prepare(&dir).unwrap();
        assert!(a.starts_with(&dir) && a != dir && a != b);
        assert!(a.file_name().unwrap().to_str().unwrap().starts_with("run-"));
    }
}
