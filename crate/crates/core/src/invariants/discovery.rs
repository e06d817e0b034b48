//! Classification of eigenoperators into the three invariant families and
//! the search for product relations.

use serde::Serialize;

use super::superop::{
    adjoint_superoperator, align_groups, eigen_operators, group_by_eigenvalue, EigenDecomposition, EigenGroup,
    GROUP_TOL,
};
use super::{evaluate_invariant, InvariantKind, InvariantSpec, Provenance};
use crate::channels::KrausChannel;
use crate::error::Result;
use crate::linalg::integer_rank;
use crate::operators::{ComplexMatrix, DensityMatrix, C64, ONE};

#[derive(Clone, Debug)]
pub struct DiscoveryOptions {
    pub group_tol: f64,
    pub max_exponent: i32,
    pub max_support: usize,
    /// Maximum number of exponent vectors examined.
    pub budget: u64,
    pub product_tol: f64,
    /// Operators to align group bases with (typically the curated set,
    /// denominators first).
    pub hints: Vec<ComplexMatrix>,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        Self {
            group_tol: GROUP_TOL,
            max_exponent: 3,
            max_support: 3,
            budget: 10_000_000,
            product_tol: 1e-8,
            hints: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Family3Search {
    pub invariants: Vec<InvariantSpec>,
    /// Accepted exponent vectors over `representatives`.
    pub vectors: Vec<Vec<i64>>,
    /// Group ids entering the search, one representative eigenvalue each.
    pub representatives: Vec<usize>,
    pub candidates: u64,
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Discovery {
    pub dim: usize,
    pub eigen: EigenDecomposition,
    pub groups: Vec<EigenGroup>,
    pub family1: Vec<InvariantSpec>,
    pub family2: Vec<InvariantSpec>,
    pub family3: Family3Search,
    #[serde(skip)]
    group_tol: f64,
}

impl Discovery {
    pub fn all(&self) -> impl Iterator<Item = &InvariantSpec> {
        self.family1.iter().chain(&self.family2).chain(&self.family3.invariants)
    }

    pub fn unit_group(&self) -> Option<&EigenGroup> {
        self.groups.iter().find(|g| g.is_unit(self.group_tol))
    }

    /// Dimension of each eigenspace, in group order.
    pub fn group_dims(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.orthonormal.len()).collect()
    }
}

fn member(g: usize, i: usize) -> String {
    format!("<g{g}.{i}>")
}

/// Every working-basis element of the `λ = 1` eigenspace, identity removed.
pub fn discover_family1(groups: &[EigenGroup], rel_tol: f64) -> Vec<InvariantSpec> {
    groups
        .iter()
        .filter(|g| g.is_unit(rel_tol))
        .flat_map(|g| {
            g.basis.iter().enumerate().map(move |(i, b)| {
                let mut inv = InvariantSpec::family1(b.clone(), member(g.id, i), Provenance::Discovered);
                inv.lambdas = vec![g.lambda];
                inv
            })
        })
        .collect()
}

/// Ratios of each member of an eigenspace (`λ ∉ {0, 1}`, dimension ≥ 2)
/// against the first basis element.
pub fn discover_family2(groups: &[EigenGroup], rel_tol: f64) -> Vec<InvariantSpec> {
    let mut out = Vec::new();
    for g in groups {
        if g.is_unit(rel_tol) || g.is_zero() || g.dim() < 2 {
            continue;
        }
        for i in 1..g.dim() {
            let mut inv = InvariantSpec::ratio(
                g.basis[i].clone(),
                g.basis[0].clone(),
                format!("{}/{}", member(g.id, i), member(g.id, 0)),
                Provenance::Discovered,
            )
            .unwrap();
            inv.lambdas = vec![g.lambda, g.lambda];
            out.push(inv);
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Visits `k`-subsets of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Nonzero exponent tuples of length `k` with entries in `[-m, m]`,
/// maximum magnitude exactly `m`, first entry positive.
fn exponent_tuples(k: usize, m: i32) -> Vec<Vec<i32>> {
    let values: Vec<i32> = (-m..=m).filter(|v| *v != 0).collect();
    let mut out = Vec::new();
    let mut cur = vec![0i32; k];
    fn rec(pos: usize, cur: &mut Vec<i32>, values: &[i32], m: i32, out: &mut Vec<Vec<i32>>) {
        if pos == cur.len() {
            if cur[0] > 0 && cur.iter().any(|v| v.abs() == m) {
                out.push(cur.clone());
            }
            return;
        }
        for &v in values {
            cur[pos] = v;
            rec(pos + 1, cur, values, m, out);
        }
    }
    rec(0, &mut cur, &values, m, &mut out);
    out
}

/// Spreads a representative exponent over distinct members of the group.
fn spread(g: &EigenGroup, r: i32) -> Vec<(usize, i32)> {
    let k = (r.unsigned_abs() as usize).min(g.dim()).max(1);
    let base = r.abs() / k as i32;
    let extra = r.unsigned_abs() as usize % k;
    (0..k)
        .map(|i| {
            let e = base + i32::from(i < extra);
            (i, e * r.signum())
        })
        .collect()
}

fn product_spec(groups: &[EigenGroup], reps: &[usize], vector: &[i64]) -> InvariantSpec {
    let mut ops = Vec::new();
    let mut exps = Vec::new();
    let mut lambdas = Vec::new();
    let mut num = String::new();
    let mut den = String::new();
    for (slot, &r) in vector.iter().enumerate() {
        if r == 0 {
            continue;
        }
        let g = &groups[reps[slot]];
        for (i, e) in spread(g, r as i32) {
            ops.push(g.basis[i].clone());
            exps.push(e);
            lambdas.push(g.lambda);
            let term = if e.abs() == 1 {
                member(g.id, i)
            } else {
                format!("{}^{}", member(g.id, i), e.abs())
            };
            if e > 0 {
                num.push_str(&term);
            } else {
                den.push_str(&term);
            }
        }
    }
    let label = match (num.is_empty(), den.is_empty()) {
        (_, true) => num,
        (true, false) => format!("1/{den}"),
        _ => format!("{num}/{den}"),
    };
    let mut inv = InvariantSpec::new(InvariantKind::Family3Product, ops, exps, label, Provenance::Discovered).unwrap();
    inv.lambdas = lambdas;
    inv
}

/// Exhaustive search for `∏ λ_g^{r_g} = 1` over group representatives
/// (`λ ∉ {0, 1}`), by support then by largest exponent. A relation is kept
/// only if it is independent (over the rationals) of those already kept.
pub fn discover_family3(groups: &[EigenGroup], opts: &DiscoveryOptions) -> Family3Search {
    let reps: Vec<usize> = groups
        .iter()
        .filter(|g| !g.is_unit(opts.group_tol) && !g.is_zero() && g.dim() > 0)
        .map(|g| g.id)
        .collect();
    let lambdas: Vec<C64> = reps.iter().map(|&id| groups[id].lambda).collect();
    let n = reps.len();
    let mut search = Family3Search {
        invariants: Vec::new(),
        vectors: Vec::new(),
        representatives: reps.clone(),
        candidates: 0,
        truncated: false,
    };
    let powers: Vec<Vec<C64>> = lambdas
        .iter()
        .map(|l| (-opts.max_exponent..=opts.max_exponent).map(|r| l.powi(r)).collect())
        .collect();
    let offset = opts.max_exponent;
    'outer: for support in 1..=opts.max_support.min(n) {
        for m in 1..=opts.max_exponent {
            let tuples = exponent_tuples(support, m);
            let mut stop = false;
            for_each_subset(n, support, |pos| {
                for t in &tuples {
                    search.candidates += 1;
                    if search.candidates > opts.budget {
                        search.truncated = true;
                        stop = true;
                        return false;
                    }
                    if t.iter().fold(0i64, |g, &x| gcd(g, x as i64)) != 1 {
                        continue;
                    }
                    let mut prod = ONE;
                    for (&p, &r) in pos.iter().zip(t) {
                        prod *= powers[p][(r + offset) as usize];
                    }
                    if (prod - ONE).norm() > opts.product_tol {
                        continue;
                    }
                    let mut v = vec![0i64; n];
                    for (&p, &r) in pos.iter().zip(t) {
                        v[p] = r as i64;
                    }
                    let before = integer_rank(&search.vectors);
                    search.vectors.push(v);
                    if integer_rank(&search.vectors) == before {
                        search.vectors.pop();
                    } else {
                        let inv = product_spec(groups, &reps, search.vectors.last().unwrap());
                        search.invariants.push(inv);
                    }
                }
                true
            });
            if stop {
                break 'outer;
            }
        }
    }
    search
}

/// Eigenanalysis plus all three families.
pub fn discover(ch: &KrausChannel, opts: &DiscoveryOptions) -> Result<Discovery> {
    let sop = adjoint_superoperator(ch)?;
    let eigen = eigen_operators(&sop, opts.group_tol)?;
    let mut groups = group_by_eigenvalue(&eigen.eigenoperators, opts.group_tol);
    align_groups(&mut groups, &opts.hints, opts.group_tol);
    let family1 = discover_family1(&groups, opts.group_tol);
    let family2 = discover_family2(&groups, opts.group_tol);
    let family3 = discover_family3(&groups, opts);
    Ok(Discovery {
        dim: ch.dim,
        eigen,
        groups,
        family1,
        family2,
        family3,
        group_tol: opts.group_tol,
    })
}

/// Whether a curated invariant is reproduced by a discovery.
#[derive(Clone, Debug, Serialize)]
pub struct CuratedMatch {
    pub label: String,
    pub matched: bool,
    /// Group containing each operator.
    pub groups: Vec<Option<usize>>,
    /// Integer coefficients on the discovered product relations.
    pub relation_coefficients: Vec<i64>,
    /// Largest relative gap between the curated value and its
    /// reconstruction from discovered invariants.
    pub max_value_error: f64,
    pub states_compared: usize,
    pub reason: Option<String>,
}

impl CuratedMatch {
    fn fail(label: &str, groups: Vec<Option<usize>>, reason: impl Into<String>) -> Self {
        Self {
            label: label.to_string(),
            matched: false,
            groups,
            relation_coefficients: Vec::new(),
            max_value_error: f64::NAN,
            states_compared: 0,
            reason: Some(reason.into()),
        }
    }
}

/// Integer `k` with `Σ k_j v_j = target`, if one exists.
fn integer_combination(vectors: &[Vec<i64>], target: &[i64]) -> Option<Vec<i64>> {
    let m = vectors.len();
    if target.iter().all(|x| *x == 0) {
        return Some(vec![0; m]);
    }
    if m == 0 {
        return None;
    }
    let n = target.len();
    // normal equations (V Vᵀ) k = V t
    let mut a = vec![vec![0.0f64; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = (0..n).map(|c| (vectors[i][c] * vectors[j][c]) as f64).sum();
        }
        a[i][m] = (0..n).map(|c| (vectors[i][c] * target[c]) as f64).sum();
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let k: Vec<i64> = (0..m).map(|i| (a[i][m] / a[i][i]).round() as i64).collect();
    let ok = (0..n).all(|c| (0..m).map(|j| k[j] * vectors[j][c]).sum::<i64>() == target[c]);
    ok.then_some(k)
}

const MATCH_FLOOR: f64 = 1e-6;

/// Checks that `curated` is recovered from the discovered invariants: every
/// operator must lie in an eigenspace; family-1 operators in the `λ = 1`
/// space; otherwise the eigenvalue exponents must be generated by the
/// discovered product relations, and the value rebuilt from discovered
/// invariants must agree with the direct value on `states`.
pub fn match_curated(disc: &Discovery, curated: &InvariantSpec, states: &[DensityMatrix]) -> CuratedMatch {
    let label = curated.label.as_str();
    let located: Vec<Option<usize>> = curated
        .operators
        .iter()
        .map(|op| disc.groups.iter().find(|g| g.contains(op)).map(|g| g.id))
        .collect();
    if let Some(i) = located.iter().position(|g| g.is_none()) {
        return CuratedMatch::fail(label, located, format!("operator {i} lies in no eigenspace"));
    }
    let gids: Vec<usize> = located.iter().map(|g| g.unwrap()).collect();
    let unit = disc.unit_group().map(|g| g.id);
    if curated.kind == InvariantKind::Family1 {
        if Some(gids[0]) == unit {
            return CuratedMatch {
                label: label.to_string(),
                matched: true,
                groups: located,
                relation_coefficients: Vec::new(),
                max_value_error: 0.0,
                states_compared: 0,
                reason: None,
            };
        }
        return CuratedMatch::fail(label, located, "operator is not in the λ = 1 eigenspace");
    }
    let reps = &disc.family3.representatives;
    let mut target = vec![0i64; reps.len()];
    for (&g, &r) in gids.iter().zip(&curated.exponents) {
        if Some(g) == unit {
            continue;
        }
        match reps.iter().position(|&x| x == g) {
            Some(slot) => target[slot] += r as i64,
            None => return CuratedMatch::fail(label, located, format!("group {g} has a vanishing eigenvalue")),
        }
    }
    let Some(k) = integer_combination(&disc.family3.vectors, &target) else {
        return CuratedMatch::fail(label, located, "eigenvalue exponents are not generated by discovered relations");
    };

    // expansion of each curated operator in its group's working basis
    let mut expansions: Vec<(C64, Vec<C64>)> = Vec::new();
    for (op, &g) in curated.operators.iter().zip(&gids) {
        let group = &disc.groups[g];
        let (shift, rest) = if Some(g) == unit {
            let s = op.trace() / op.dim() as f64;
            (s, op - &ComplexMatrix::identity(op.dim()).scale(s))
        } else {
            (C64::new(0.0, 0.0), op.clone())
        };
        match group.coefficients(&rest) {
            Ok(c) => expansions.push((shift, c)),
            Err(_) => return CuratedMatch::fail(label, located, format!("group {g} basis is singular")),
        }
    }

    let ratio_of = |g: usize, i: usize, rho: &DensityMatrix| -> Option<C64> {
        if i == 0 {
            return Some(ONE);
        }
        let want = format!("<g{g}.{i}>/<g{g}.0>");
        let inv = disc.family2.iter().find(|f| f.label == want)?;
        evaluate_invariant(inv, rho).ok()
    };
    let mut max_err: f64 = 0.0;
    let mut compared = 0;
    'states: for rho in states {
        let Ok(direct_factors) = curated.factors(rho) else { continue };
        if curated.denominators().any(|i| direct_factors[i].norm() < MATCH_FLOOR) {
            continue;
        }
        let Ok(direct) = curated.combine(&direct_factors) else { continue };
        let mut rebuilt = ONE;
        for (j, &kj) in k.iter().enumerate() {
            if kj == 0 {
                continue;
            }
            let f = &disc.family3.invariants[j];
            let Ok(vals) = f.factors(rho) else { continue 'states };
            let mut normalized = ONE;
            for (e, op) in f.exponents.iter().zip(&f.operators) {
                // <B_{g,i}> = <B_{g,0}> R_{g,i}
                let (g, i) = locate_member(disc, op);
                let Some(r) = ratio_of(g, i, rho) else { continue 'states };
                normalized *= r.powi(-*e);
            }
            let Ok(fv) = f.combine(&vals) else { continue 'states };
            rebuilt *= (fv * normalized).powi(kj as i32);
        }
        for (((shift, c), &g), &r) in expansions.iter().zip(&gids).zip(&curated.exponents) {
            let factor = if Some(g) == unit {
                let mut acc = *shift;
                for (ci, f1) in c.iter().zip(disc.family1.iter()) {
                    let Ok(v) = evaluate_invariant(f1, rho) else { continue 'states };
                    acc += ci * v;
                }
                acc
            } else {
                let mut acc = C64::new(0.0, 0.0);
                for (i, ci) in c.iter().enumerate() {
                    let Some(ri) = ratio_of(g, i, rho) else { continue 'states };
                    acc += ci * ri;
                }
                acc
            };
            rebuilt *= factor.powi(r);
        }
        let err = (rebuilt - direct).norm() / direct.norm().max(MATCH_FLOOR);
        max_err = max_err.max(err);
        compared += 1;
    }
    CuratedMatch {
        label: label.to_string(),
        matched: compared > 0 && max_err <= 1e-8,
        groups: located,
        relation_coefficients: k,
        max_value_error: max_err,
        states_compared: compared,
        reason: if compared == 0 {
            Some("no state with usable denominators".into())
        } else if max_err > 1e-8 {
            Some("reconstructed value disagrees".into())
        } else {
            None
        },
    }
}

/// Group id and basis index of a working-basis element.
fn locate_member(disc: &Discovery, op: &ComplexMatrix) -> (usize, usize) {
    for g in &disc.groups {
        for (i, b) in g.basis.iter().enumerate() {
            if b.max_abs_diff(op) == 0.0 {
                return (g.id, i);
            }
        }
    }
    unreachable!("family-3 operators are working-basis elements")
}
