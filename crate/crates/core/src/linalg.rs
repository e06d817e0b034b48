//! Small dense complex linear algebra: Hessenberg reduction with shifted
//! QR for general eigenvalues, one-sided Jacobi SVD, cyclic Jacobi for
//! Hermitian matrices, and LU solves.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Reduces `a` to upper Hessenberg form by Householder similarity
/// transforms. Returns `(H, Q)` with `a = Q H Q†`.
pub fn hessenberg(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = Array2::<C64>::eye(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = (k + 1..n).map(|i| h[[i, k]]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- P H P with P = I - 2 v v† acting on indices k+1..n
        for col in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[[k + 1 + i, col]]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[[k + 1 + i, col]] -= *vi * dot * 2.0;
            }
        }
        for row in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| h[[row, k + 1 + i]] * vi).sum();
            for (i, vi) in v.iter().enumerate() {
                h[[row, k + 1 + i]] -= dot * vi.conj() * 2.0;
            }
        }
        for row in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| q[[row, k + 1 + i]] * vi).sum();
            for (i, vi) in v.iter().enumerate() {
                q[[row, k + 1 + i]] -= dot * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[[i, k]] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Complex Givens rotation `G = [[c, s], [-s̄, c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// All eigenvalues of a general complex matrix via Hessenberg reduction and
/// single-shift QR with Wilkinson shifts and deflation.
pub fn eigenvalues(a: &Array2<C64>) -> Result<Vec<C64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut h, _) = hessenberg(a);
    let scale = frobenius(&h).max(f64::MIN_POSITIVE);
    let mut eig = vec![C64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_iter = 100 * n.max(10);
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[[0, 0]];
            break;
        }
        // locate the start of the trailing unreduced block
        let mut l = hi;
        while l > 0 {
            let sub = h[[l, l - 1]].norm();
            let diag = h[[l - 1, l - 1]].norm() + h[[l, l]].norm();
            let thresh = if diag > 0.0 { EPS * diag } else { EPS * scale };
            if sub <= thresh.max(EPS * EPS * scale) {
                h[[l, l - 1]] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[[hi, hi]];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NoConvergence);
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            h[[hi, hi]] + C64::new(0.75 * h[[hi, hi - 1]].norm(), 0.0)
        } else {
            let a11 = h[[hi - 1, hi - 1]];
            let a12 = h[[hi - 1, hi]];
            let a21 = h[[hi, hi - 1]];
            let a22 = h[[hi, hi]];
            let half = (a11 - a22) * 0.5;
            let disc = (half * half + a12 * a21).sqrt();
            let m1 = (a11 + a22) * 0.5 + disc;
            let m2 = (a11 + a22) * 0.5 - disc;
            if (m1 - a22).norm() < (m2 - a22).norm() {
                m1
            } else {
                m2
            }
        };
        // explicit QR step on the active block l..=hi
        for k in l..=hi {
            h[[k, k]] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[[k, k]], h[[k + 1, k]]);
            for col in k..=hi {
                let x = h[[k, col]];
                let y = h[[k + 1, col]];
                h[[k, col]] = x * c + s * y;
                h[[k + 1, col]] = -s.conj() * x + y * c;
            }
            h[[k + 1, k]] = C64::new(0.0, 0.0);
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            let top = (k + 2).min(hi);
            for row in l..=top {
                let x = h[[row, k]];
                let y = h[[row, k + 1]];
                h[[row, k]] = x * c + s.conj() * y;
                h[[row, k + 1]] = -s * x + y * c;
            }
        }
        for k in l..=hi {
            h[[k, k]] += mu;
        }
    }
    Ok(eig)
}

/// One-sided (Hestenes) Jacobi SVD. Returns singular values and the right
/// singular vectors `V` (columns), with `‖(A V)_j‖ = σ_j`. Values are not
/// sorted.
pub fn svd_jacobi(a: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let (m, n) = a.dim();
    let mut b = a.clone();
    let mut v = Array2::<C64>::eye(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for r in 0..m {
                    alpha += b[[r, i]].norm_sqr();
                    beta += b[[r, j]].norm_sqr();
                    gamma += b[[r, i]].conj() * b[[r, j]];
                }
                let g = gamma.norm();
                if g <= EPS * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // u' = c u - s e^{-iφ} v ; v' = s e^{iφ} u + c v
                for r in 0..m {
                    let u = b[[r, i]];
                    let w = b[[r, j]];
                    b[[r, i]] = u * c - phase.conj() * w * s;
                    b[[r, j]] = phase * u * s + w * c;
                }
                for r in 0..n {
                    let u = v[[r, i]];
                    let w = v[[r, j]];
                    v[[r, i]] = u * c - phase.conj() * w * s;
                    v[[r, j]] = phase * u * s + w * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..n)
        .map(|j| (0..m).map(|r| b[[r, j]].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    (sigma, v)
}

/// Orthonormal basis of the (numerical) null space of `a`: right singular
/// vectors whose singular value is at most `tol`, smallest first.
pub fn null_space(a: &Array2<C64>, tol: f64) -> Vec<(f64, Array1<C64>)> {
    let (sigma, v) = svd_jacobi(a);
    let mut idx: Vec<usize> = (0..sigma.len()).collect();
    idx.sort_by(|&x, &y| sigma[x].total_cmp(&sigma[y]));
    idx.into_iter()
        .take_while(|&j| sigma[j] <= tol)
        .map(|j| (sigma[j], v.column(j).to_owned()))
        .collect()
}

/// Right singular vectors for the `count` smallest singular values.
pub fn smallest_singular(a: &Array2<C64>, count: usize) -> Vec<(f64, Array1<C64>)> {
    let (sigma, v) = svd_jacobi(a);
    let mut idx: Vec<usize> = (0..sigma.len()).collect();
    idx.sort_by(|&x, &y| sigma[x].total_cmp(&sigma[y]));
    idx.into_iter()
        .take(count)
        .map(|j| (sigma[j], v.column(j).to_owned()))
        .collect()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix. Returns
/// eigenvalues ascending and the matching orthonormal eigenvectors as
/// columns.
pub fn hermitian_eigen(a: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = a.nrows();
    // symmetrize away rounding asymmetry
    let mut m = Array2::from_shape_fn((n, n), |(r, c)| (a[[r, c]] + a[[c, r]].conj()) * 0.5);
    let mut v = Array2::<C64>::eye(n);
    let scale = frobenius(&m).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[[r, c]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= EPS * scale * 1e-2 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                let g = apq.norm();
                if g <= EPS * 1e-3 * scale {
                    continue;
                }
                let phase = apq / g;
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q); M <- W† M W
                let wpp = C64::new(c, 0.0);
                let wpq = C64::new(s, 0.0);
                let wqp = -phase.conj() * s;
                let wqq = phase.conj() * c;
                for r in 0..n {
                    let x = m[[r, p]];
                    let y = m[[r, q]];
                    m[[r, p]] = x * wpp + y * wqp;
                    m[[r, q]] = x * wpq + y * wqq;
                }
                for r in 0..n {
                    let x = m[[p, r]];
                    let y = m[[q, r]];
                    m[[p, r]] = wpp.conj() * x + wqp.conj() * y;
                    m[[q, r]] = wpq.conj() * x + wqq.conj() * y;
                }
                m[[p, q]] = C64::new(0.0, 0.0);
                m[[q, p]] = C64::new(0.0, 0.0);
                for r in 0..n {
                    let x = v[[r, p]];
                    let y = v[[r, q]];
                    v[[r, p]] = x * wpp + y * wqp;
                    v[[r, q]] = x * wpq + y * wqq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| m[[x, x]].re.total_cmp(&m[[y, y]].re));
    let values = idx.iter().map(|&j| m[[j, j]].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, idx[c]]]);
    (values, vectors)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &Array2<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: b.len(),
        });
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[[i, k]].norm().total_cmp(&m[[j, k]].norm()))
            .unwrap();
        if m[[piv, k]].norm() <= 1e-14 * scale {
            return Err(Error::InvalidConfig("singular linear system".into()));
        }
        if piv != k {
            for c in 0..n {
                let tmp = m[[k, c]];
                m[[k, c]] = m[[piv, c]];
                m[[piv, c]] = tmp;
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[[i, k]] / m[[k, k]];
            if f.norm() == 0.0 {
                continue;
            }
            for c in k..n {
                let mkc = m[[k, c]];
                m[[i, c]] -= f * mkc;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for c in k + 1..n {
            acc -= m[[k, c]] * x[c];
        }
        x[k] = acc / m[[k, k]];
    }
    Ok(x)
}

/// Rank of an integer matrix (rows are vectors) by fraction-free Gaussian
/// elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let a = m[rank][col];
                let b = m[r][col];
                let row_rank = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(row_rank.iter()) {
                    *x = *x * a - *y * b;
                }
                let g = m[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    for x in m[r].iter_mut() {
                        *x /= g;
                    }
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
