//! LLL reduction and Fincke-Pohst enumeration on exact Gram matrices.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::matrix::{ExactMatrix, Rat};

/// LLL-reduces a positive definite Gram matrix (delta = 3/4).
/// Returns (reduced Gram, T) with reduced = T * gram * T^T and T unimodular.
#[allow(clippy::needless_range_loop)]
pub fn lll_gram(gram: &ExactMatrix) -> (ExactMatrix, Vec<Vec<BigInt>>) {
    let n = gram.rows();
    let mut g: Vec<Vec<Rat>> = gram.row_vecs();
    let mut t: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    if n <= 1 {
        return (gram.clone(), t);
    }
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let delta = Rat::new(BigInt::from(3), BigInt::from(4));
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    b[0] = g[0][0].clone();
    let mut k = 1;
    let mut kmax = 0;

    let red = |k: usize, l: usize, g: &mut Vec<Vec<Rat>>, t: &mut Vec<Vec<BigInt>>, mu: &mut Vec<Vec<Rat>>| {
        if mu[k][l].abs() <= half {
            return;
        }
        let q = mu[k][l].round();
        let qi = q.to_integer();
        let tl = t[l].clone();
        for (x, y) in t[k].iter_mut().zip(&tl) {
            *x -= &qi * y;
        }
        // b_k <- b_k - q b_l on the Gram matrix
        let gkk = &g[k][k] - Rat::from_integer(BigInt::from(2)) * &q * &g[k][l] + &q * &q * &g[l][l];
        for i in 0..n {
            if i != k {
                let v = &g[k][i] - &q * &g[l][i];
                g[k][i] = v.clone();
                g[i][k] = v;
            }
        }
        g[k][k] = gkk;
        mu[k][l] -= &q;
        for i in 0..l {
            let v = &q * &mu[l][i];
            mu[k][i] -= v;
        }
    };

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..k {
                let mut s = g[k][j].clone();
                for i in 0..j {
                    s -= &mu[j][i] * &mu[k][i] * &b[i];
                }
                mu[k][j] = s / &b[j];
            }
            let mut s = g[k][k].clone();
            for j in 0..k {
                s -= &mu[k][j] * &mu[k][j] * &b[j];
            }
            b[k] = s;
        }
        red(k, k - 1, &mut g, &mut t, &mut mu);
        if b[k] < (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1] {
            // swap k and k-1
            t.swap(k, k - 1);
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            let (lo, hi) = mu.split_at_mut(k);
            lo[k - 1][..k - 1].swap_with_slice(&mut hi[0][..k - 1]);
            let m = mu[k][k - 1].clone();
            let bnew = &b[k] + &m * &m * &b[k - 1];
            mu[k][k - 1] = &m * &b[k - 1] / &bnew;
            b[k] = &b[k - 1] * &b[k] / &bnew;
            b[k - 1] = bnew;
            for i in k + 1..=kmax {
                let tt = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &m * &tt;
                mu[i][k - 1] = &tt + &mu[k][k - 1] * &mu[i][k];
            }
            k = k.saturating_sub(1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                red(k, l, &mut g, &mut t, &mut mu);
            }
            k += 1;
        }
    }
    (ExactMatrix::from_rows(&g), t)
}

/// Quadratic-form decomposition Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2.
fn cholesky(gram: &ExactMatrix) -> Vec<Vec<Rat>> {
    let n = gram.rows();
    let mut q = gram.row_vecs();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let v = &q[k][i] * &q[i][l];
                q[k][l] -= v;
            }
        }
    }
    q
}

/// All integer vectors x with (x + shift)^T gram (x + shift) <= bound.
/// With a zero shift the zero vector is included.
pub fn fincke_pohst(gram: &ExactMatrix, shift: &[Rat], bound: &Rat) -> Vec<Vec<BigInt>> {
    let n = gram.rows();
    assert_eq!(shift.len(), n);
    if n == 0 {
        return if bound >= &Rat::zero() { vec![Vec::new()] } else { Vec::new() };
    }
    let q = cholesky(gram);
    let mut out = Vec::new();
    let mut x = vec![BigInt::zero(); n];
    descend(&q, shift, n - 1, bound.clone(), &mut x, &mut out);
    out
}

fn descend(q: &[Vec<Rat>], shift: &[Rat], i: usize, budget: Rat, x: &mut Vec<BigInt>, out: &mut Vec<Vec<BigInt>>) {
    let n = q.len();
    // center: x_i + shift_i + sum_{j>i} q_ij (x_j + shift_j) = 0
    let mut c = -shift[i].clone();
    for j in i + 1..n {
        c -= &q[i][j] * (Rat::from_integer(x[j].clone()) + &shift[j]);
    }
    let start = c.round().to_integer();
    let cost = |v: &BigInt| {
        let d = Rat::from_integer(v.clone()) - &c;
        &q[i][i] * &d * &d
    };
    let visit = |v: BigInt, x: &mut Vec<BigInt>, out: &mut Vec<Vec<BigInt>>| -> bool {
        let cv = cost(&v);
        if cv > budget {
            return false;
        }
        x[i] = v;
        if i == 0 {
            out.push(x.clone());
        } else {
            descend(q, shift, i - 1, &budget - cv, x, out);
        }
        true
    };
    let mut up = start.clone();
    while visit(up.clone(), x, out) {
        up += 1;
    }
    let mut down: BigInt = start - 1;
    while visit(down.clone(), x, out) {
        down -= 1;
    }
    x[i] = BigInt::zero();
}

/// Minimum of (x + shift)^T gram (x + shift) over integer x, by depth-first
/// search visiting candidates nearest the center first and pruning on the best norm found.
pub fn min_shifted_norm(gram: &ExactMatrix, shift: &[Rat]) -> Rat {
    let n = gram.rows();
    assert_eq!(shift.len(), n);
    if n == 0 {
        return Rat::zero();
    }
    let q = cholesky(gram);
    let mut best: Option<Rat> = None;
    let mut x = vec![BigInt::zero(); n];
    closest(&q, shift, n - 1, Rat::zero(), &mut x, &mut best);
    best.expect("the search always reaches a leaf")
}

fn closest(q: &[Vec<Rat>], shift: &[Rat], i: usize, used: Rat, x: &mut Vec<BigInt>, best: &mut Option<Rat>) {
    let n = q.len();
    let mut c = -shift[i].clone();
    for j in i + 1..n {
        c -= &q[i][j] * (Rat::from_integer(x[j].clone()) + &shift[j]);
    }
    let start = c.round().to_integer();
    // zig-zag around the center so costs are nondecreasing
    let mut v = start.clone();
    let mut take_low = Rat::from_integer(start.clone()) > c;
    let (mut lo, mut hi): (BigInt, BigInt) = (&start - 1, &start + 1);
    loop {
        let d = Rat::from_integer(v.clone()) - &c;
        let total = &used + &q[i][i] * &d * &d;
        if best.as_ref().is_some_and(|b| &total >= b) {
            break;
        }
        x[i] = v;
        if i == 0 {
            *best = Some(total);
        } else {
            closest(q, shift, i - 1, total, x, best);
        }
        if take_low {
            v = lo.clone();
            lo -= 1;
        } else {
            v = hi.clone();
            hi += 1;
        }
        take_low = !take_low;
    }
    x[i] = BigInt::zero();
}
