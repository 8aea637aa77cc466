use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;

/// Writes `body` to `path` through a temporary file in the same directory
/// and a rename, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, timestamp: bool, body: &[u8]) -> Result<(), CliError> {
    let mut bytes = Vec::with_capacity(body.len() + 32);
    if timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        writeln!(bytes, "# generated unix={secs}").expect("writing to memory");
    }
    bytes.extend_from_slice(body);

    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(&bytes)
            .and_then(|()| out.flush())
            .map_err(|e| CliError::Io(format!("stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(&bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_atomically_with_optional_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit(Some(&path), false, b"a,b\n1,2\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,2\n");
        emit(Some(&path), true, b"x\n").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# generated unix=") && text.ends_with("\nx\n"));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_io_error() {
        let err = emit(Some(Path::new("/nonexistent-dir/out.csv")), false, b"").unwrap_err();
        assert!(matches!(err, CliError::Io(_)));
    }
}
