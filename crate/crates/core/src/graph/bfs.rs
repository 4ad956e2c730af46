use std::collections::{BTreeMap, VecDeque};

use crate::corpus_io::ImageId;

/// Unweighted hop distance from `query` to every node reachable through
/// `successors`. Unreachable nodes are absent from the result.
pub fn bfs_depths<F, I>(query: ImageId, mut successors: F) -> BTreeMap<ImageId, usize>
where
    F: FnMut(ImageId) -> I,
    I: IntoIterator<Item = ImageId>,
{
    let mut depth = BTreeMap::from([(query, 0)]);
    let mut queue = VecDeque::from([query]);
    while let Some(u) = queue.pop_front() {
        let d = depth[&u];
        for v in successors(u) {
            depth.entry(v).or_insert_with(|| {
                queue.push_back(v);
                d + 1
            });
        }
    }
    depth
}

/// Same as [`bfs_depths`] over a corpus of `n` images, indexed by id.
pub(crate) fn dense_depths<F>(n: usize, query: ImageId, successors: F) -> Vec<Option<usize>>
where
    F: Fn(ImageId, &mut Vec<ImageId>),
{
    let mut depth = vec![None; n];
    depth[query.index()] = Some(0);
    let mut queue = VecDeque::from([query]);
    let mut buf = Vec::new();
    while let Some(u) = queue.pop_front() {
        let d = depth[u.index()].expect("queued nodes have a depth");
        buf.clear();
        successors(u, &mut buf);
        for &v in &buf {
            if depth[v.index()].is_none() {
                depth[v.index()] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    depth
}

/// Distance-based decay `alpha0^max(δi, δj)`; 0 when either endpoint is unreachable.
pub fn decay(alpha0: f64, depth_i: Option<usize>, depth_j: Option<usize>) -> f64 {
    match (depth_i, depth_j) {
        (Some(a), Some(b)) => alpha0.powi(a.max(b) as i32),
        _ => 0.0,
    }
}
