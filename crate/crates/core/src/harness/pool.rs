use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluate `f(0) .. f(n-1)` on at most `jobs` threads (0 = rayon default)
/// and return the results in index order, so reductions over the output are
/// independent of the thread count.
pub fn ordered_map<T, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if jobs == 1 {
        return (0..n).map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let serial = ordered_map(50, 1, |i| Ok(i * i)).unwrap();
        let parallel = ordered_map(50, 4, |i| Ok(i * i)).unwrap();
        assert_eq!(serial, parallel);
        assert!(ordered_map(3, 2, |i| if i == 1 { Err(Error::Fit("x".into())) } else { Ok(i) }).is_err());
    }
}
