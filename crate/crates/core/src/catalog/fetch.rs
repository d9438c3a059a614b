//! Cached download of the upstream catalog page.
//!
//! Cache layout: `<cache_dir>/<sha256-of-url>.csv` holds the raw content and
//! `<cache_dir>/<sha256-of-url>.sha256` its hex digest. Writers hold an
//! advisory lock on `<cache_dir>/.lock`.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use fs2::FileExt;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_CACHE: &str = "GSTAMP_CACHE";
pub const ENV_OFFLINE: &str = "GSTAMP_OFFLINE";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("network unavailable: {0}")]
    NetworkUnavailable(String),
    #[error("checksum mismatch for cached file {0}")]
    ChecksumMismatch(PathBuf),
    #[error("cache directory {path} is not writable: {source}")]
    CacheUnwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("downloaded content is not UTF-8")]
    NotText,
}

/// Where and whether to fetch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchOptions {
    pub cache_dir: PathBuf,
    pub offline: bool,
}

impl FetchOptions {
    /// Applies `GSTAMP_CACHE` and `GSTAMP_OFFLINE=1` on top of the given
    /// defaults.
    pub fn from_env(default_cache: impl Into<PathBuf>, offline: bool) -> Self {
        let cache_dir = std::env::var_os(ENV_CACHE)
            .map(PathBuf::from)
            .unwrap_or_else(|| default_cache.into());
        let offline = offline || std::env::var(ENV_OFFLINE).map(|v| v == "1").unwrap_or(false);
        FetchOptions { cache_dir, offline }
    }
}

/// Source of bytes for a URL.
pub trait Downloader {
    fn download(&self, url: &str) -> Result<Vec<u8>, FetchError>;
}

/// Plain HTTP(S) GET.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpDownloader;

impl Downloader for HttpDownloader {
    fn download(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        let resp = ureq::get(url)
            .call()
            .map_err(|e| FetchError::NetworkUnavailable(e.to_string()))?;
        let mut buf = Vec::new();
        resp.into_reader()
            .read_to_end(&mut buf)
            .map_err(|e| FetchError::NetworkUnavailable(e.to_string()))?;
        Ok(buf)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn cache_paths(cache_dir: &Path, url: &str) -> (PathBuf, PathBuf) {
    let key = sha256_hex(url.as_bytes());
    (
        cache_dir.join(format!("{key}.csv")),
        cache_dir.join(format!("{key}.sha256")),
    )
}

fn unwritable(path: &Path) -> impl FnOnce(std::io::Error) -> FetchError + '_ {
    move |source| FetchError::CacheUnwritable {
        path: path.to_path_buf(),
        source,
    }
}

fn read_cached(data: &Path, sidecar: &Path) -> Result<Option<String>, FetchError> {
    let Ok(bytes) = fs::read(data) else {
        return Ok(None);
    };
    let expected = fs::read_to_string(sidecar).unwrap_or_default();
    if expected.trim() != sha256_hex(&bytes) {
        return Err(FetchError::ChecksumMismatch(data.to_path_buf()));
    }
    String::from_utf8(bytes).map(Some).map_err(|_| FetchError::NotText)
}

/// Returns the cached copy of `url` when present and checksum-valid,
/// otherwise downloads it and stores it with its checksum. Offline mode
/// never calls the downloader.
pub fn fetch_snapshot(
    url: &str,
    opts: &FetchOptions,
    downloader: &dyn Downloader,
) -> Result<String, FetchError> {
    let (data, sidecar) = cache_paths(&opts.cache_dir, url);
    if let Some(text) = read_cached(&data, &sidecar)? {
        return Ok(text);
    }
    if opts.offline {
        return Err(FetchError::NetworkUnavailable(format!(
            "offline mode and no cached copy of {url}"
        )));
    }

    fs::create_dir_all(&opts.cache_dir).map_err(unwritable(&opts.cache_dir))?;
    let lock_path = opts.cache_dir.join(".lock");
    let lock = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&lock_path)
        .map_err(unwritable(&lock_path))?;
    lock.lock_exclusive().map_err(unwritable(&lock_path))?;

    // Another writer may have filled the cache while we waited.
    if let Some(text) = read_cached(&data, &sidecar)? {
        return Ok(text);
    }
    let bytes = downloader.download(url)?;
    let text = String::from_utf8(bytes).map_err(|_| FetchError::NotText)?;
    write_atomic(&data, text.as_bytes())?;
    write_atomic(&sidecar, sha256_hex(text.as_bytes()).as_bytes())?;
    // Lock is released when `lock` drops.
    Ok(text)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FetchError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(unwritable(&tmp))?;
    f.write_all(bytes).map_err(unwritable(&tmp))?;
    f.sync_all().map_err(unwritable(&tmp))?;
    fs::rename(&tmp, path).map_err(unwritable(path))
}
