//! Output directory handling: an exclusive lock file and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use inr_core::data::{save_frames, save_image, ImageTensor};

use crate::error::CliError;

pub const LOCK_FILE: &str = ".inr.lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    lock: PathBuf,
    artifacts: Vec<String>,
}

fn temp_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!(".{}.tmp", name.replace('/', "_")))
}

impl OutputDir {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let lock = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self {
                    dir: dir.to_path_buf(),
                    lock,
                    artifacts: Vec::new(),
                })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked {
                dir: dir.to_path_buf(),
                lock,
            }),
            Err(e) => Err(CliError::io(&lock, e)),
        }
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Relative names of everything written so far, in write order.
    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }

    fn finish(&mut self, name: &str, tmp: &Path) -> Result<(), CliError> {
        let target = self.dir.join(name);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::rename(tmp, &target).map_err(|e| CliError::io(&target, e))?;
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        Ok(())
    }

    /// Writes `name` through a temporary file and a rename.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let tmp = temp_path(&self.dir, name);
        fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
        self.finish(name, &tmp)
    }

    /// Writes a file that is not listed as an artifact (the summary itself).
    pub fn write_unlisted(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let tmp = temp_path(&self.dir, name);
        fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
        let target = self.dir.join(name);
        fs::rename(&tmp, &target).map_err(|e| CliError::io(&target, e))
    }

    pub fn write_png(&mut self, name: &str, img: &ImageTensor) -> Result<(), CliError> {
        let tmp = temp_path(&self.dir, name);
        save_image(&tmp, img)?;
        self.finish(name, &tmp)
    }

    /// Writes frames into directory `name`, replacing any previous frames.
    pub fn write_frames(&mut self, name: &str, frames: &[ImageTensor]) -> Result<Vec<String>, CliError> {
        let tmp = temp_path(&self.dir, name);
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        }
        let written = save_frames(&tmp, frames)?;
        let target = self.dir.join(name);
        if target.exists() {
            fs::remove_dir_all(&target).map_err(|e| CliError::io(&target, e))?;
        }
        fs::rename(&tmp, &target).map_err(|e| CliError::io(&target, e))?;
        let names: Vec<String> = written
            .iter()
            .filter_map(|p| p.file_name())
            .map(|f| format!("{name}/{}", f.to_string_lossy()))
            .collect();
        for n in &names {
            if !self.artifacts.contains(n) {
                self.artifacts.push(n.clone());
            }
        }
        Ok(names)
    }

    /// Deletes files listed by an earlier run so stale outputs do not
    /// linger next to new ones.
    pub fn remove_previous(&self, previous: &[String]) -> Result<(), CliError> {
        for name in previous {
            if name.contains("..") || Path::new(name).is_absolute() {
                continue;
            }
            let p = self.dir.join(name);
            if p.is_file() {
                fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
            }
            if let Some(parent) = p.parent().filter(|d| *d != self.dir) {
                let _ = fs::remove_dir(parent);
            }
        }
        Ok(())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
