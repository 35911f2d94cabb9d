//! A tiny scoped worker pool. Results come back in job order, so the
//! thread count never changes the output.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Worker count: `BOZK_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("BOZK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub type Job<'a, T> = Box<dyn FnOnce() -> T + Send + 'a>;

pub fn run_jobs<'a, T: Send>(jobs: Vec<Job<'a, T>>, threads: usize) -> Vec<T> {
    let n = jobs.len();
    let workers = threads.clamp(1, n.max(1));
    if workers == 1 {
        return jobs.into_iter().map(|j| j()).collect();
    }
    let queue: Vec<Mutex<Option<Job<'a, T>>>> = jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
    let results: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let job = queue[k].lock().expect("job lock").take().expect("job taken once");
                let out = job();
                *results[k].lock().expect("result lock") = Some(out);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().expect("result lock").expect("every job ran"))
        .collect()
}
