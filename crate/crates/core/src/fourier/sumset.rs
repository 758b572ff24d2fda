use super::wht_in_place;
use crate::oracle::StoredSet;

/// Exact A + A. Small sets use the pairwise loop, large ones the support of
/// the integer self-convolution.
pub fn brute_sumset(a: &StoredSet) -> StoredSet {
    let m = a.len() as u128;
    let n = a.dim() as u128;
    if m * m <= (n + 1) << a.dim() {
        sumset_by_pairs(a)
    } else {
        sumset_by_transform(a)
    }
}

pub fn sumset_by_pairs(a: &StoredSet) -> StoredSet {
    let mut out = StoredSet::empty(a.dim()).expect("same dimension");
    let members: Vec<usize> = a.indices().collect();
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i..] {
            out.insert_index(x ^ y);
        }
    }
    out
}

/// Support of x ↦ #{(y, z) ∈ A² : y + z = x}, via exact integer transforms.
pub fn sumset_by_transform(a: &StoredSet) -> StoredSet {
    let mut buf: Vec<i128> = (0..a.size()).map(|i| a.contains_index(i) as i128).collect();
    wht_in_place(&mut buf);
    for v in buf.iter_mut() {
        *v *= *v;
    }
    wht_in_place(&mut buf);
    let mut out = StoredSet::empty(a.dim()).expect("same dimension");
    for (i, &c) in buf.iter().enumerate() {
        if c > 0 {
            out.insert_index(i);
        }
    }
    out
}
