/// Maximum bipartite matching by augmenting paths. Left vertices are tried
/// in index order and each scans right vertices in index order, so the
/// result is deterministic. Returns the partner of each left vertex.
pub(crate) fn max_matching(compat: &[Vec<bool>], n_right: usize) -> Vec<Option<usize>> {
    let mut right_of: Vec<Option<usize>> = vec![None; n_right];
    for l in 0..compat.len() {
        let mut seen = vec![false; n_right];
        augment(l, compat, &mut seen, &mut right_of);
    }
    let mut left_of = vec![None; compat.len()];
    for (r, l) in right_of.iter().enumerate() {
        if let Some(l) = l {
            left_of[*l] = Some(r);
        }
    }
    left_of
}

fn augment(l: usize, compat: &[Vec<bool>], seen: &mut [bool], right_of: &mut [Option<usize>]) -> bool {
    for r in 0..right_of.len() {
        if !compat[l][r] || seen[r] {
            continue;
        }
        seen[r] = true;
        if right_of[r].is_none_or(|other| augment(other, compat, seen, right_of)) {
            right_of[r] = Some(l);
            return true;
        }
    }
    false
}
