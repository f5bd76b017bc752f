use crate::{Error, Result};

/// Longest common contiguous block of `a[alo..ahi]` and `b[blo..bhi]` as
/// `(i, j, len)`. Among equally long blocks the one starting earliest in `a`
/// wins, then earliest in `b`.
fn longest_match(
    a: &[char],
    b: &[char],
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> (usize, usize, usize) {
    let (mut bi, mut bj, mut best) = (alo, blo, 0);
    let mut prev = vec![0usize; bhi - blo + 1];
    let mut cur = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        for j in blo..bhi {
            let k = if a[i] == b[j] { prev[j - blo] + 1 } else { 0 };
            cur[j - blo + 1] = k;
            if k > best {
                bi = i + 1 - k;
                bj = j + 1 - k;
                best = k;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (bi, bj, best)
}

/// Characters matched by recursive longest-block matching of `a` against
/// `b`. Tie-breaking makes this depend on argument order.
pub fn matched_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut total = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_match(&a, &b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        total += k;
        stack.push((alo, i, blo, j));
        stack.push((i + k, ahi, j + k, bhi));
    }
    total
}

/// Ratcliff/Obershelp ratio `2M / (|a| + |b|)` over characters, with `M`
/// the larger of the two matching directions.
pub fn name_similarity(a: &str, b: &str) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("names must be non-empty"));
    }
    let len = a.chars().count() + b.chars().count();
    let m = matched_chars(a, b).max(matched_chars(b, a));
    Ok(2.0 * m as f64 / len as f64)
}
