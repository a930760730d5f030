//! Brute-force oracles and random generators shared by the integration tests.
//! Nothing here calls into the routines it is used to check.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random complete strict preferences for `m` providers over `n` consumers.
pub fn random_prefs(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut draw = |len: usize, others: usize| -> Vec<Vec<usize>> {
        (0..len)
            .map(|_| {
                let mut v: Vec<usize> = (0..others).collect();
                v.shuffle(rng);
                v
            })
            .collect()
    };
    let pp = draw(m, n);
    let cp = draw(n, m);
    (pp, cp)
}

fn rank_table(prefs: &[Vec<usize>], others: usize) -> Vec<Vec<usize>> {
    prefs
        .iter()
        .map(|list| {
            let mut r = vec![0; others];
            for (pos, &x) in list.iter().enumerate() {
                r[x] = pos;
            }
            r
        })
        .collect()
}

/// Matching as `provider → Option<consumer>`.
pub type Assignment = Vec<Option<usize>>;

/// All injections of the smaller side into the larger one.
fn maximal_assignments(m: usize, n: usize) -> Vec<Assignment> {
    fn rec(i: usize, m: usize, n: usize, used: &mut Vec<bool>, cur: &mut Assignment, out: &mut Vec<Assignment>, skips_left: usize) {
        if i == m {
            out.push(cur.clone());
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                cur[i] = Some(c);
                rec(i + 1, m, n, used, cur, out, skips_left);
                used[c] = false;
                cur[i] = None;
            }
        }
        if skips_left > 0 {
            rec(i + 1, m, n, used, cur, out, skips_left - 1);
        }
    }
    let mut out = Vec::new();
    let skips = m.saturating_sub(n);
    rec(0, m, n, &mut vec![false; n], &mut vec![None; m], &mut out, skips);
    out
}

fn blocks(a: &Assignment, pr: &[Vec<usize>], cr: &[Vec<usize>], n: usize) -> bool {
    let mut cons: Vec<Option<usize>> = vec![None; n];
    for (p, c) in a.iter().enumerate() {
        if let Some(c) = c {
            cons[*c] = Some(p);
        }
    }
    for p in 0..a.len() {
        for c in 0..n {
            if a[p] == Some(c) {
                continue;
            }
            let pw = a[p].is_none_or(|cur| pr[p][c] < pr[p][cur]);
            let cw = cons[c].is_none_or(|cur| cr[c][p] < cr[c][cur]);
            if pw && cw {
                return true;
            }
        }
    }
    false
}

/// Every stable matching of the profile, by exhaustive enumeration.
pub fn all_stable_matchings(pp: &[Vec<usize>], cp: &[Vec<usize>]) -> Vec<Assignment> {
    let m = pp.len();
    let n = cp.len();
    let pr = rank_table(pp, n);
    let cr = rank_table(cp, m);
    maximal_assignments(m, n)
        .into_iter()
        .filter(|a| !blocks(a, &pr, &cr, n))
        .collect()
}

/// The stable matching every provider weakly prefers to all others.
pub fn provider_optimal(pp: &[Vec<usize>], cp: &[Vec<usize>]) -> Option<Assignment> {
    let n = cp.len();
    let pr = rank_table(pp, n);
    let stable = all_stable_matchings(pp, cp);
    let score = |a: &Assignment, p: usize| a[p].map_or(usize::MAX, |c| pr[p][c]);
    stable
        .iter()
        .find(|a| stable.iter().all(|b| (0..pp.len()).all(|p| score(a, p) <= score(b, p))))
        .cloned()
}

/// Pure equilibria by best responses: a cell is an equilibrium when each
/// action is a best reply to the other.
pub fn best_response_nash(row: [[f64; 2]; 2], col: [[f64; 2]; 2]) -> Vec<(usize, usize)> {
    let row_best = |j: usize| -> Vec<usize> {
        let m = row[0][j].max(row[1][j]);
        (0..2).filter(|&i| row[i][j] == m).collect()
    };
    let col_best = |i: usize| -> Vec<usize> {
        let m = col[i][0].max(col[i][1]);
        (0..2).filter(|&j| col[i][j] == m).collect()
    };
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            if row_best(j).contains(&i) && col_best(i).contains(&j) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Cheapest simple path by depth-first enumeration; ties go to the
/// lexicographically smallest node sequence.
pub fn brute_force_path(n: usize, edges: &[(usize, usize, f64)], src: usize, dst: usize) -> Option<(f64, Vec<usize>)> {
    fn dfs(
        u: usize,
        dst: usize,
        cost: f64,
        edges: &[(usize, usize, f64)],
        path: &mut Vec<usize>,
        seen: &mut Vec<bool>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if u == dst {
            let better = match best {
                None => true,
                Some((c, p)) => cost < *c || (cost == *c && *path < *p),
            };
            if better {
                *best = Some((cost, path.clone()));
            }
            return;
        }
        for &(a, b, w) in edges {
            if a == u && !seen[b] {
                seen[b] = true;
                path.push(b);
                dfs(b, dst, cost + w, edges, path, seen, best);
                path.pop();
                seen[b] = false;
            }
        }
    }
    let mut seen = vec![false; n];
    seen[src] = true;
    let mut best = None;
    dfs(src, dst, 0.0, edges, &mut vec![src], &mut seen, &mut best);
    best
}

/// Random digraph with integer costs so equal-cost routes actually occur.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (usize, Vec<(usize, usize, f64)>) {
    let n = rng.gen_range(2..=max_nodes);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(0.35) {
                edges.push((a, b, rng.gen_range(0..6) as f64));
            }
        }
    }
    (n, edges)
}

/// Node names whose string order matches their index order.
pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

/// Bisection on `S(P) − D(P)` for a linear market, written independently of
/// the library's solver.
pub fn bisect_linear(a: f64, b: f64, c: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, b / c);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a * mid - (b - c * mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
