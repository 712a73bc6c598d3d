//! Thin data-parallelism layer. With the `parallel` feature the helpers run
//! on rayon; without it they fall back to plain sequential iteration, so the
//! crate builds and behaves identically either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every element, passing the element's index.
#[cfg(feature = "parallel")]
pub fn for_each_mut_indexed<T: Send>(items: &mut [T], f: impl Fn(usize, &mut T) + Sync + Send) {
    items
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, item)| f(i, item));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_mut_indexed<T>(items: &mut [T], f: impl Fn(usize, &mut T)) {
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Maps a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_collect<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

/// First index in `0..len` satisfying the predicate, in index order.
#[cfg(feature = "parallel")]
pub fn find_first_index(len: usize, pred: impl Fn(usize) -> bool + Sync + Send) -> Option<usize> {
    (0..len).into_par_iter().find_first(|&i| pred(i))
}

#[cfg(not(feature = "parallel"))]
pub fn find_first_index(len: usize, pred: impl Fn(usize) -> bool) -> Option<usize> {
    (0..len).find(|&i| pred(i))
}

/// All indices in `0..len` satisfying the predicate, ascending.
#[cfg(feature = "parallel")]
pub fn filter_indices(len: usize, pred: impl Fn(usize) -> bool + Sync + Send) -> Vec<usize> {
    (0..len).into_par_iter().filter(|&i| pred(i)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn filter_indices(len: usize, pred: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..len).filter(|&i| pred(i)).collect()
}
