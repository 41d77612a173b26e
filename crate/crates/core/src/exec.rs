//! Data-parallel helpers for the per-document loops.
//!
//! With the `parallel` feature the work is spread over the current rayon
//! pool; without it, or under [`Execution::Sequential`], the same closures
//! run in order. Results are always returned in index order so downstream
//! reductions are bit-identical whatever the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work actually fans out to the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` collected in order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Apply `f` to every element; the first error in index order is returned.
pub fn try_for_each_mut<T, E, F>(exec: Execution, items: &mut [T], f: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut T) -> Result<(), E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let results: Vec<Result<(), E>> = items
            .par_iter_mut()
            .enumerate()
            .map(|(i, item)| f(i, item))
            .collect();
        return results.into_iter().collect();
    }
    let _ = exec;
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_order_in_both_modes() {
        let seq = map_range(Execution::Sequential, 1000, |i| i * i);
        let par = map_range(Execution::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn first_error_in_index_order() {
        let mut v = vec![0usize; 100];
        let r: Result<(), usize> = try_for_each_mut(Execution::Parallel, &mut v, |i, x| {
            *x = i;
            if i % 40 == 39 {
                Err(i)
            } else {
                Ok(())
            }
        });
        assert_eq!(r, Err(39));
    }
}
