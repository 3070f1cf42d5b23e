//! Output targets. Files and directories are staged next to the target and
//! renamed into place only once everything is written.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::{Builder, NamedTempFile};

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes `bytes` to `target`, or to standard output when `target` is `-`.
pub fn write_target(target: &str, bytes: &[u8]) -> io::Result<()> {
    if target == "-" {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        return out.flush();
    }
    let path = Path::new(target);
    let parent = parent_of(path);
    fs::create_dir_all(&parent)?;
    let mut tmp = NamedTempFile::new_in(&parent)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes a set of relative files as the directory `target`, replacing any
/// existing directory of that name.
pub fn write_directory(target: &str, files: &[(String, Vec<u8>)]) -> io::Result<()> {
    let path = Path::new(target);
    if path.exists() && !path.is_dir() {
        return Err(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("{target} exists and is not a directory"),
        ));
    }
    let parent = parent_of(path);
    fs::create_dir_all(&parent)?;
    let stage = Builder::new().prefix(".stage-").tempdir_in(&parent)?;
    for (rel, bytes) in files {
        let file = stage.path().join(rel);
        if let Some(dir) = file.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&file, bytes)?;
    }
    let staged = stage.keep();
    if path.exists() {
        let old = Builder::new().prefix(".old-").tempdir_in(&parent)?.keep();
        fs::remove_dir(&old)?;
        fs::rename(path, &old)?;
        if let Err(e) = fs::rename(&staged, path) {
            let _ = fs::rename(&old, path);
            let _ = fs::remove_dir_all(&staged);
            return Err(e);
        }
        fs::remove_dir_all(&old)?;
    } else if let Err(e) = fs::rename(&staged, path) {
        let _ = fs::remove_dir_all(&staged);
        return Err(e);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_directory_writes() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("sub/out.json");
        write_target(file.to_str().unwrap(), b"{}\n").unwrap();
        assert_eq!(fs::read(&file).unwrap(), b"{}\n");

        let out = dir.path().join("batch");
        let files = vec![("a/x.json".to_string(), b"1".to_vec())];
        write_directory(out.to_str().unwrap(), &files).unwrap();
        let files = vec![("b.json".to_string(), b"2".to_vec())];
        write_directory(out.to_str().unwrap(), &files).unwrap();
        assert!(!out.join("a").exists());
        assert_eq!(fs::read(out.join("b.json")).unwrap(), b"2");
        let leftovers = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with('.'))
            .count();
        assert_eq!(leftovers, 0);
    }
}
