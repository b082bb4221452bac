use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use chrono::Utc;

use super::{ModelAdapter, PromptJob, ResponseOutcome, ResponseRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    pub concurrency: usize,
    /// Append-only progress file; records already in it are not re-queried
    /// unless they are errors.
    pub partial: Option<PathBuf>,
    /// Records from an earlier run. Successful ones are kept, errors retried.
    pub prior: Vec<ResponseRecord>,
}

/// Where an in-progress run for `out` keeps its records.
pub fn partial_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    out.with_file_name(name)
}

fn read_partial(path: &Path, model_id: &str) -> Result<Vec<ResponseRecord>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ResponseRecord>(line) {
            Ok(r) if r.model_id == model_id => out.push(r),
            Ok(r) => {
                return Err(Error::parse(
                    path.display().to_string(),
                    format!("partial file belongs to model `{}`", r.model_id),
                ))
            }
            // A crash can leave a torn final line.
            Err(e) => log::warn!("{}:{}: ignoring unreadable line ({e})", path.display(), idx + 1),
        }
    }
    Ok(out)
}

/// One record per job, in job order. Later records replace earlier ones,
/// except that an error never replaces a success.
pub fn merge_records(jobs: &[PromptJob], records: impl IntoIterator<Item = ResponseRecord>) -> Vec<ResponseRecord> {
    let mut best: HashMap<(String, u8), ResponseRecord> = HashMap::new();
    for r in records {
        let key = (r.fact_id.clone(), r.prompt_index);
        match best.get(&key) {
            Some(old) if old.is_ok() && !r.is_ok() => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    jobs.iter()
        .filter_map(|j| best.remove(&(j.fact_id.clone(), j.prompt_index)))
        .collect()
}

/// Queries every job not already answered, with bounded concurrency.
/// Failures become error records so the result always covers every job.
pub fn run_batch(adapter: &dyn ModelAdapter, jobs: &[PromptJob], options: BatchOptions) -> Result<Vec<ResponseRecord>> {
    let model_id = adapter.model_id().to_string();
    let mut known = options.prior;
    if let Some(p) = &options.partial {
        known.extend(read_partial(p, &model_id)?);
    }
    let done: std::collections::HashSet<(String, u8)> = known
        .iter()
        .filter(|r| r.is_ok() && r.model_id == model_id)
        .map(|r| (r.fact_id.clone(), r.prompt_index))
        .collect();
    let pending: Vec<&PromptJob> = jobs
        .iter()
        .filter(|j| !done.contains(&(j.fact_id.clone(), j.prompt_index)))
        .collect();
    log::info!(
        "model `{model_id}`: {} prompts, {} already answered",
        jobs.len(),
        jobs.len() - pending.len()
    );

    let sink: Option<Mutex<File>> = match &options.partial {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io(p, e))?;
            Some(Mutex::new(f))
        }
        None => None,
    };
    let next = AtomicUsize::new(0);
    let fresh: Mutex<Vec<ResponseRecord>> = Mutex::new(Vec::with_capacity(pending.len()));
    let sink_error: Mutex<Option<Error>> = Mutex::new(None);
    let workers = options.concurrency.clamp(1, pending.len().max(1));

    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = pending.get(i) else { break };
                let (queried_at, outcome) = match adapter.complete(job) {
                    Ok(out) => (out.queried_at, ResponseOutcome::Ok { raw_text: out.raw_text }),
                    Err(e) => {
                        log::warn!("{} prompt {}: {e}", job.fact_id, job.prompt_index);
                        (Utc::now(), ResponseOutcome::Error { error: e.to_string() })
                    }
                };
                let record = ResponseRecord {
                    fact_id: job.fact_id.clone(),
                    prompt_index: job.prompt_index,
                    model_id: model_id.clone(),
                    queried_at,
                    outcome,
                };
                if let Some(sink) = &sink {
                    let mut line = serde_json::to_string(&record).expect("record serializes");
                    line.push('\n');
                    let mut f = sink.lock().expect("partial sink poisoned");
                    if let Err(e) = f.write_all(line.as_bytes()).and_then(|_| f.flush()) {
                        let path = options.partial.clone().unwrap_or_default();
                        sink_error.lock().expect("poisoned").get_or_insert(Error::io(path, e));
                    }
                }
                fresh.lock().expect("batch results poisoned").push(record);
            });
        }
    });
    if let Some(e) = sink_error.into_inner().expect("poisoned") {
        return Err(e);
    }
    known.extend(fresh.into_inner().expect("batch results poisoned"));
    Ok(merge_records(jobs, known))
}
