//! Data-parallel helpers with a sequential fallback.
//!
//! Every sweep in the crate funnels through [`map_range`], so the choice of
//! executor never changes the order (or the bits) of the results: each output
//! slot is computed by exactly one closure call and collected in index order.
//! Building without the `parallel` feature turns [`Execution::Parallel`] into
//! a plain loop.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluate `f(i)` for `i in 0..n` and collect the results in index order.
pub fn map_range<R, F>(n: usize, exec: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fill `out[i] = f(i)` in place.
pub fn fill<R, F>(out: &mut [R], exec: Execution, f: F)
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        out.par_iter_mut()
            .enumerate()
            .with_min_len(256)
            .for_each(|(i, slot)| *slot = f(i));
        return;
    }
    let _ = exec;
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn executors_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_range(1000, Execution::Sequential, f);
        let b = map_range(1000, Execution::Parallel, f);
        assert_eq!(a, b);

        let mut x = vec![0.0; 5000];
        let mut y = vec![0.0; 5000];
        fill(&mut x, Execution::Sequential, f);
        fill(&mut y, Execution::Parallel, f);
        assert_eq!(x, y);
    }
}
