//! Data-parallel helpers. With the `parallel` feature (default) work is spread
//! over the rayon pool unless `Mode::Sequential` is requested; without it every
//! call runs sequentially. Results are always returned in input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    #[default]
    Parallel,
}

impl Mode {
    /// The mode actually used: `Parallel` degrades to `Sequential` when the
    /// feature is off.
    pub fn effective(self) -> Mode {
        if cfg!(feature = "parallel") {
            self
        } else {
            Mode::Sequential
        }
    }
}

pub fn par_map<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == Mode::Parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Map over `0..n`.
pub fn par_range<R, F>(mode: Mode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == Mode::Parallel && n > 1 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}
