use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// 17 significant digits; round-trips every `f64` and is byte-stable.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Named, indexed RNG stream derived from a single experiment seed.
pub(crate) fn substream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name));
    rng.set_stream(index);
    rng
}

/// Files staged in temporaries next to their targets and renamed into place
/// together by [`OutputBatch::commit`]. Nothing is left behind on failure.
#[derive(Default)]
pub(crate) struct OutputBatch {
    staged: Vec<(tempfile::NamedTempFile, PathBuf)>,
}

impl OutputBatch {
    pub(crate) fn stage(&mut self, path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
        let path = path.as_ref();
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
        tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
        tmp.flush().map_err(|e| Error::io(path, e))?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub(crate) fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done: Vec<PathBuf> = Vec::with_capacity(self.staged.len());
        for (tmp, target) in self.staged {
            if let Err(e) = tmp.persist(&target) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(Error::io(&target, e.error));
            }
            done.push(target);
        }
        Ok(done)
    }
}

pub(crate) fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let mut batch = OutputBatch::default();
    batch.stage(path, bytes)?;
    batch.commit().map(|_| ())
}
