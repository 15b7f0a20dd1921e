//! Order-preserving parallel map over a slice.

use std::thread;

/// Applies `f` to every item using up to `workers` threads.
///
/// The input is cut into contiguous chunks, one per worker, and the chunk
/// results are concatenated in input order. On failure the error of the
/// earliest failing item is returned.
pub fn try_map<T, U, E, F>(items: &[T], workers: usize, f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Result<Vec<U>, E>>()))
            .collect();
        let mut out = Vec::with_capacity(items.len());
        for handle in handles {
            out.extend(handle.join().expect("worker panicked")?);
        }
        Ok(out)
    })
}
