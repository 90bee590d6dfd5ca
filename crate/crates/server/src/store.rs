//! Append-only session ledgers: one `events.jsonl` per session directory.

use std::io;
use std::path::{Path, PathBuf};

use tokio::fs;
use tokio::io::AsyncWriteExt;

use ssoa_core::session::{LedgerRecord, Session};

const LEDGER_FILE: &str = "events.jsonl";

#[derive(Clone, Debug)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub async fn open(root: impl Into<PathBuf>) -> io::Result<Store> {
        let root = root.into();
        fs::create_dir_all(&root).await?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn ledger_path(&self, id: &str) -> PathBuf {
        self.root.join(id).join(LEDGER_FILE)
    }

    /// Writes the first records of a new session; fails if it exists.
    pub async fn create(&self, id: &str, records: &[LedgerRecord]) -> io::Result<()> {
        fs::create_dir(self.root.join(id)).await?;
        let mut f = fs::OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(self.ledger_path(id))
            .await?;
        for r in records {
            f.write_all(&line(r)).await?;
        }
        f.sync_data().await
    }

    pub async fn append(&self, id: &str, record: &LedgerRecord) -> io::Result<()> {
        let mut f = fs::OpenOptions::new().append(true).open(self.ledger_path(id)).await?;
        f.write_all(&line(record)).await?;
        f.sync_data().await
    }

    pub async fn load(&self, id: &str) -> io::Result<Session> {
        let text = fs::read_to_string(self.ledger_path(id)).await?;
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(n, l)| {
                serde_json::from_str::<LedgerRecord>(l)
                    .map_err(|e| invalid(format!("{id}/{LEDGER_FILE} line {}: {e}", n + 1)))
            })
            .collect::<io::Result<Vec<_>>>()?;
        Session::replay(records).map_err(|e| invalid(format!("{id}: {e}")))
    }

    /// Replays every session found under the root.
    pub async fn load_all(&self) -> io::Result<Vec<Session>> {
        let mut out = Vec::new();
        let mut dir = fs::read_dir(&self.root).await?;
        while let Some(entry) = dir.next_entry().await? {
            if !entry.file_type().await?.is_dir() {
                continue;
            }
            let Some(id) = entry.file_name().to_str().map(str::to_string) else {
                continue;
            };
            if fs::try_exists(self.ledger_path(&id)).await? {
                out.push(self.load(&id).await?);
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }
}

fn line(r: &LedgerRecord) -> Vec<u8> {
    let mut v = serde_json::to_vec(r).expect("ledger records serialize");
    v.push(b'\n');
    v
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}
