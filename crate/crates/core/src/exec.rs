use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel or not; results keep index order so
/// downstream accumulation is identical either way.
pub(crate) fn map_indexed<T: Send>(parallel: bool, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}
