//! Linear-space Myers diff over interned symbols. Produces the matched index
//! pairs of a longest common subsequence.

/// Appends `(old_index, new_index)` pairs of an LCS of `a` and `b` to `out`,
/// offset by `a_off`/`b_off`.
pub(crate) fn lcs_pairs(
    a: &[u32],
    b: &[u32],
    a_off: usize,
    b_off: usize,
    out: &mut Vec<(usize, usize)>,
) {
    // Common prefix.
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    for i in 0..prefix {
        out.push((a_off + i, b_off + i));
    }
    let a_mid = &a[prefix..];
    let b_mid = &b[prefix..];

    let suffix = a_mid
        .iter()
        .rev()
        .zip(b_mid.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let a_core = &a_mid[..a_mid.len() - suffix];
    let b_core = &b_mid[..b_mid.len() - suffix];

    if !a_core.is_empty() && !b_core.is_empty() {
        if let Some((x, y)) = middle_snake(a_core, b_core) {
            lcs_pairs(
                &a_core[..x],
                &b_core[..y],
                a_off + prefix,
                b_off + prefix,
                out,
            );
            lcs_pairs(
                &a_core[x..],
                &b_core[y..],
                a_off + prefix + x,
                b_off + prefix + y,
                out,
            );
        }
    }

    let a_tail = a_off + prefix + a_core.len();
    let b_tail = b_off + prefix + b_core.len();
    for i in 0..suffix {
        out.push((a_tail + i, b_tail + i));
    }
}

/// Finds a split point on an optimal edit path by running the forward and
/// reverse searches until they overlap. Returns `None` when the inputs share
/// no symbol on any optimal path (pure replacement).
fn middle_snake(a: &[u32], b: &[u32]) -> Option<(usize, usize)> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max_d = (n + m + 1) / 2;
    let v_offset = max_d;
    let v_len = 2 * max_d + 2;
    let mut v1 = vec![-1isize; v_len as usize];
    let mut v2 = vec![-1isize; v_len as usize];
    v1[(v_offset + 1) as usize] = 0;
    v2[(v_offset + 1) as usize] = 0;
    let delta = n - m;
    let front = delta % 2 != 0;
    let (mut k1start, mut k1end, mut k2start, mut k2end) = (0isize, 0isize, 0isize, 0isize);

    for d in 0..max_d {
        let mut k1 = -d + k1start;
        while k1 <= d - k1end {
            let k1_off = (v_offset + k1) as usize;
            let mut x1 = if k1 == -d || (k1 != d && v1[k1_off - 1] < v1[k1_off + 1]) {
                v1[k1_off + 1]
            } else {
                v1[k1_off - 1] + 1
            };
            let mut y1 = x1 - k1;
            while x1 < n && y1 < m && a[x1 as usize] == b[y1 as usize] {
                x1 += 1;
                y1 += 1;
            }
            v1[k1_off] = x1;
            if x1 > n {
                k1end += 2;
            } else if y1 > m {
                k1start += 2;
            } else if front {
                let k2_off = v_offset + delta - k1;
                if k2_off >= 0 && k2_off < v_len && v2[k2_off as usize] != -1 {
                    let x2 = n - v2[k2_off as usize];
                    if x1 >= x2 {
                        return Some((x1 as usize, y1 as usize));
                    }
                }
            }
            k1 += 2;
        }

        let mut k2 = -d + k2start;
        while k2 <= d - k2end {
            let k2_off = (v_offset + k2) as usize;
            let mut x2 = if k2 == -d || (k2 != d && v2[k2_off - 1] < v2[k2_off + 1]) {
                v2[k2_off + 1]
            } else {
                v2[k2_off - 1] + 1
            };
            let mut y2 = x2 - k2;
            while x2 < n && y2 < m && a[(n - x2 - 1) as usize] == b[(m - y2 - 1) as usize] {
                x2 += 1;
                y2 += 1;
            }
            v2[k2_off] = x2;
            if x2 > n {
                k2end += 2;
            } else if y2 > m {
                k2start += 2;
            } else if !front {
                let k1_off = v_offset + delta - k2;
                if k1_off >= 0 && k1_off < v_len && v1[k1_off as usize] != -1 {
                    let x1 = v1[k1_off as usize];
                    let y1 = v_offset + x1 - k1_off;
                    if x1 >= n - x2 {
                        return Some((x1 as usize, y1 as usize));
                    }
                }
            }
            k2 += 2;
        }
    }
    None
}
