//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here is order-independent (max/min, or collect in index
//! order), so the parallel and sequential paths give bit-identical results.

/// How sampling loops and independent runs are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is disabled.
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_collect<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Maximum of `f` over the items; NaN values propagate as an error marker.
pub fn max_of<T, F>(mode: ExecMode, items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    map_collect(mode, items, f).into_iter().fold(f64::NEG_INFINITY, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

/// Minimum of `f` over the items; NaN values propagate.
pub fn min_of<T, F>(mode: ExecMode, items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    map_collect(mode, items, f).into_iter().fold(f64::INFINITY, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.min(v)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 / 13.0).collect();
        let a = max_of(ExecMode::Sequential, &xs, |x| x.sin());
        let b = max_of(ExecMode::Parallel, &xs, |x| x.sin());
        assert_eq!(a.to_bits(), b.to_bits());
        let c = map_range(ExecMode::Parallel, 10, |i| i * i);
        assert_eq!(c, (0..10).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn nan_propagates() {
        let xs = [1.0, f64::NAN, 3.0];
        assert!(max_of(ExecMode::Sequential, &xs, |x| *x).is_nan());
        assert!(min_of(ExecMode::Sequential, &xs, |x| *x).is_nan());
    }
}
