//! One-to-one user/UAV association.
//!
//! Maximizing Σ α R over the relaxed constraints 0 ≤ α ≤ 1 with row and
//! column sums ≤ 1 is an assignment LP; its polytope has integral vertices,
//! so a maximum-weight bipartite matching solves the relaxation exactly and
//! needs no rounding step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Binary M×U association where every user and every UAV is in at most
/// one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    num_users: usize,
    /// Associated user of each UAV.
    user_of_uav: Vec<Option<usize>>,
}

impl Association {
    pub fn empty(num_users: usize, num_uavs: usize) -> Self {
        Self {
            num_users,
            user_of_uav: vec![None; num_uavs],
        }
    }

    pub fn from_pairs(num_users: usize, num_uavs: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(num_users, num_uavs);
        for &(m, u) in pairs {
            if m >= num_users || u >= num_uavs {
                return Err(Error::InfeasibleAssociation(format!("pair ({m}, {u}) out of range")));
            }
            if a.user_of_uav[u].is_some() {
                return Err(Error::InfeasibleAssociation(format!("UAV {u} serves two users")));
            }
            a.user_of_uav[u] = Some(m);
        }
        a.validate()?;
        Ok(a)
    }

    /// Accepts a 0/1 matrix (users × UAVs); anything else is rejected.
    pub fn from_matrix(alpha: &DMatrix<u8>) -> Result<Self> {
        let (m_count, u_count) = alpha.shape();
        let mut pairs = Vec::new();
        for m in 0..m_count {
            for u in 0..u_count {
                match alpha[(m, u)] {
                    0 => {}
                    1 => pairs.push((m, u)),
                    v => {
                        return Err(Error::InfeasibleAssociation(format!(
                            "entry ({m}, {u}) = {v} is not binary"
                        )))
                    }
                }
            }
        }
        Self::from_pairs(m_count, u_count, &pairs)
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_uavs(&self) -> usize {
        self.user_of_uav.len()
    }

    pub fn user_of(&self, u: usize) -> Option<usize> {
        self.user_of_uav[u]
    }

    pub fn uav_of(&self, m: usize) -> Option<usize> {
        self.user_of_uav.iter().position(|&x| x == Some(m))
    }

    pub fn is_associated(&self, m: usize, u: usize) -> bool {
        self.user_of_uav[u] == Some(m)
    }

    /// (user, UAV) pairs in UAV order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.user_of_uav
            .iter()
            .enumerate()
            .filter_map(|(u, m)| m.map(|m| (m, u)))
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_matrix(&self) -> DMatrix<u8> {
        let mut out = DMatrix::zeros(self.num_users, self.num_uavs());
        for (m, u) in self.pairs() {
            out[(m, u)] = 1;
        }
        out
    }

    /// Checks row sums, column sums and index ranges.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.num_users];
        for (m, u) in self.pairs() {
            if m >= self.num_users {
                return Err(Error::InfeasibleAssociation(format!("user {m} out of range")));
            }
            if seen[m] {
                return Err(Error::InfeasibleAssociation(format!(
                    "user {m} is associated with more than one UAV (second: {u})"
                )));
            }
            seen[m] = true;
        }
        Ok(())
    }

    pub fn objective(&self, rates: &DMatrix<f64>) -> f64 {
        self.pairs().map(|(m, u)| rates[(m, u)]).fold(0.0, |acc, r| acc + r)
    }
}

fn check_rates(rates: &DMatrix<f64>) -> Result<()> {
    if rates.nrows() == 0 || rates.ncols() == 0 {
        return Err(Error::DimensionMismatch("empty rate matrix".into()));
    }
    if let Some(bad) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::DimensionMismatch(format!("rate {bad} is not finite and non-negative")));
    }
    Ok(())
}

/// Exact maximizer of Σ α R under the one-to-one constraints. Pairs whose
/// rate is zero are left out; they add nothing to the objective.
pub fn solve_association(rates: &DMatrix<f64>) -> Result<Association> {
    check_rates(rates)?;
    let (m_count, u_count) = rates.shape();
    let mut pairs = Vec::new();
    if u_count <= m_count {
        // rows = UAVs, columns = users
        let cost = DMatrix::from_fn(u_count, m_count, |u, m| -rates[(m, u)]);
        for (u, m) in hungarian(&cost).into_iter().enumerate() {
            pairs.push((m, u));
        }
    } else {
        let cost = rates.map(|r| -r);
        for (m, u) in hungarian(&cost).into_iter().enumerate() {
            pairs.push((m, u));
        }
    }
    pairs.retain(|&(m, u)| rates[(m, u)] > 0.0);
    pairs.sort_by_key(|&(m, u)| (u, m));
    Association::from_pairs(m_count, u_count, &pairs)
}

/// Min-cost assignment of every row to a distinct column (rows ≤ cols),
/// O(n²m) shortest augmenting paths with potentials.
fn hungarian(cost: &DMatrix<f64>) -> Vec<usize> {
    let (n, m) = cost.shape();
    debug_assert!(n <= m);
    let inf = f64::INFINITY;
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Exhaustive search over every feasible association (test oracle).
pub fn brute_force_association(rates: &DMatrix<f64>) -> Result<Association> {
    check_rates(rates)?;
    let (m_count, u_count) = rates.shape();
    if m_count > 8 || u_count > 4 {
        return Err(Error::TooLarge {
            users: m_count,
            uavs: u_count,
        });
    }
    fn recurse(
        u: usize,
        rates: &DMatrix<f64>,
        used: &mut [bool],
        current: &mut Vec<Option<usize>>,
        value: f64,
        best: &mut (f64, Vec<Option<usize>>),
    ) {
        if u == rates.ncols() {
            if value > best.0 {
                *best = (value, current.clone());
            }
            return;
        }
        current.push(None);
        recurse(u + 1, rates, used, current, value, best);
        current.pop();
        for m in 0..rates.nrows() {
            if !used[m] {
                used[m] = true;
                current.push(Some(m));
                recurse(u + 1, rates, used, current, value + rates[(m, u)], best);
                current.pop();
                used[m] = false;
            }
        }
    }
    let mut best = (-1.0, Vec::new());
    recurse(0, rates, &mut vec![false; m_count], &mut Vec::new(), 0.0, &mut best);
    Ok(Association {
        num_users: m_count,
        user_of_uav: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    fn assert_feasible(a: &Association) {
        let x = a.to_matrix();
        for r in 0..x.nrows() {
            assert!(x.row(r).iter().map(|&v| v as u32).sum::<u32>() <= 1);
        }
        for c in 0..x.ncols() {
            assert!(x.column(c).iter().map(|&v| v as u32).sum::<u32>() <= 1);
        }
    }

    #[test]
    fn single_pair() {
        let r = m(1, 1, &[5.0]);
        let a = solve_association(&r).unwrap();
        assert_eq!(a.to_matrix(), DMatrix::from_element(1, 1, 1u8));
        assert_eq!(a.objective(&r), 5.0);
        assert_eq!(brute_force_association(&r).unwrap().objective(&r), 5.0);
    }

    #[test]
    fn diagonal_two_by_two() {
        let r = m(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let a = solve_association(&r).unwrap();
        assert!(a.is_associated(0, 0) && a.is_associated(1, 1));
        assert_eq!(a.objective(&r), 4.0);
    }

    #[test]
    fn three_users_two_uavs() {
        let r = m(3, 2, &[3.0, 0.0, 2.0, 2.0, 0.0, 3.0]);
        let a = solve_association(&r).unwrap();
        assert_eq!(a.objective(&r), 6.0);
        assert!(a.is_associated(0, 0) && a.is_associated(2, 1));
        assert_eq!(brute_force_association(&r).unwrap().objective(&r), 6.0);
    }

    #[test]
    fn ties_compare_objectives() {
        let r = DMatrix::from_element(4, 3, 1.5);
        let a = solve_association(&r).unwrap();
        let b = brute_force_association(&r).unwrap();
        assert_eq!(a.objective(&r), b.objective(&r));
        assert_eq!(a.len(), 3);
        assert_eq!(a, solve_association(&r).unwrap());
    }

    #[test]
    fn zero_rows_stay_unassociated() {
        let r = m(3, 2, &[0.0, 0.0, 0.0, 0.0, 4.0, 0.0]);
        let a = solve_association(&r).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a.is_associated(2, 0));
    }

    #[test]
    fn more_uavs_than_users() {
        let r = m(2, 3, &[1.0, 5.0, 2.0, 4.0, 6.0, 0.5]);
        let a = solve_association(&r).unwrap();
        let b = brute_force_association(&r).unwrap();
        assert!((a.objective(&r) - b.objective(&r)).abs() < 1e-12);
        assert_feasible(&a);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_association(&m(1, 2, &[1.0, f64::NAN])).is_err());
        assert!(solve_association(&m(1, 2, &[1.0, -1.0])).is_err());
        assert!(matches!(
            brute_force_association(&DMatrix::from_element(9, 2, 1.0)),
            Err(Error::TooLarge { .. })
        ));
    }

    proptest! {
        #[test]
        fn matches_enumeration(
            rows in 1usize..=6,
            cols in 1usize..=3,
            seed in proptest::collection::vec(0.0f64..10.0, 18),
        ) {
            let r = DMatrix::from_fn(rows, cols, |i, j| seed[i * 3 + j]);
            let a = solve_association(&r).unwrap();
            let b = brute_force_association(&r).unwrap();
            assert_feasible(&a);
            prop_assert!((a.objective(&r) - b.objective(&r)).abs() <= 1e-9);
        }

        #[test]
        fn shift_keeps_optimality(
            n in 1usize..=4,
            seed in proptest::collection::vec(0.0f64..10.0, 16),
            shift in 0.0f64..100.0,
        ) {
            let r = DMatrix::from_fn(n, n, |i, j| seed[i * 4 + j]);
            let shifted = r.map(|x| x + shift);
            let a = solve_association(&shifted).unwrap();
            let b = brute_force_association(&shifted).unwrap();
            prop_assert!((a.objective(&shifted) - b.objective(&shifted)).abs() <= 1e-9);
        }
    }
}
