//! Triplet assembly with Dirichlet elimination, compressed-row storage and
//! the direct solve of the global system.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{linalg::LuError, SparseColMat, Triplet};
use faer::{Mat, Par};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Residual bound enforced on every direct solve.
pub const SOLVE_TOLERANCE: f64 = 1e-8;

/// Compressed sparse rows with sorted unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Square sub-block `rows x cols` with the given index ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(rows.len(), cols.len());
        for i in rows.clone() {
            for (j, v) in self.row(i) {
                if cols.contains(&j) {
                    d[(i - rows.start, j - cols.start)] = v;
                }
            }
        }
        d
    }
}

/// Sums duplicate triplets into compressed rows.
pub fn to_compressed(triplets: &[(usize, usize, f64)], n: usize) -> Result<SparseMatrix> {
    let mut counts = vec![0usize; n + 1];
    for &(i, j, _) in triplets {
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { row: i, col: j, n });
        }
        counts[i + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let mut next = counts.clone();
    let mut cols = vec![0usize; triplets.len()];
    let mut vals = vec![0.0; triplets.len()];
    for &(i, j, v) in triplets {
        cols[next[i]] = j;
        vals[next[i]] = v;
        next[i] += 1;
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(triplets.len());
    let mut values = Vec::with_capacity(triplets.len());
    row_ptr.push(0);
    let mut order: Vec<usize> = Vec::new();
    for i in 0..n {
        order.clear();
        order.extend(counts[i]..counts[i + 1]);
        // stable: duplicates are summed in insertion order
        order.sort_by_key(|&p| cols[p]);
        for &p in &order {
            if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == cols[p] {
                *values.last_mut().unwrap() += vals[p];
            } else {
                col_idx.push(cols[p]);
                values.push(vals[p]);
            }
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseMatrix { n, row_ptr, col_idx, values })
}

/// `max |A_ij - A_ji| / ||A||_inf`; zero for the zero matrix.
pub fn symmetry_defect(a: &SparseMatrix) -> f64 {
    let norm = a.norm_inf();
    if norm == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.dim() {
        for (j, v) in a.row(i) {
            worst = worst.max((v - a.get(j, i)).abs());
        }
    }
    worst / norm
}

const REFINEMENT_STEPS: usize = 3;

/// Direct sparse LU solve with iterative refinement and a relative residual
/// check.
pub fn solve_direct(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("rhs length {} for dimension {n}", b.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    faer::set_global_parallelism(Par::Seq);
    let entries: Vec<Triplet<usize, usize, f64>> =
        (0..n).flat_map(|i| a.row(i).map(move |(j, v)| Triplet::new(i, j, v))).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::InvalidArgument(format!("sparse matrix creation failed: {e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
        LuError::Generic(g) => Error::InvalidArgument(format!("sparse LU failed: {g:?}")),
    })?;
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let mut y = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        lu.solve_in_place(y.as_mut());
        (0..n).map(|i| y[(i, 0)]).collect()
    };
    let mut x = solve(b);
    if let Some(p) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix { pivot: p });
    }
    // iterative refinement for ill-conditioned (nearly incompressible) systems
    let mut residual = relative_residual(a, &x, b);
    for _ in 0..REFINEMENT_STEPS {
        if residual <= 1e-3 * SOLVE_TOLERANCE {
            break;
        }
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
        let candidate: Vec<f64> = x.iter().zip(solve(&r)).map(|(xi, d)| xi + d).collect();
        let res = relative_residual(a, &candidate, b);
        if !(res < residual) {
            break;
        }
        (x, residual) = (candidate, res);
    }
    if residual > SOLVE_TOLERANCE {
        return Err(Error::Residual { residual, tolerance: SOLVE_TOLERANCE });
    }
    Ok(x)
}

/// `||Ax - b||_2 / ||b||_2`, or the absolute residual when `b = 0`.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Writes `i j value` lines, one per stored entry.
pub fn write_triplets(a: &SparseMatrix, mut w: impl Write) -> Result<()> {
    for i in 0..a.dim() {
        for (j, v) in a.row(i) {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
    }
    Ok(())
}

/// Global triplet list and right-hand side. Dofs flagged as fixed are
/// eliminated symmetrically when the system is finalized: their rows become
/// identity rows and their columns are moved to the right-hand side.
#[derive(Debug, Clone)]
pub struct TripletList {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    fixed: Vec<Option<f64>>,
}

impl TripletList {
    pub fn new(n: usize) -> Self {
        Self { n, triplets: Vec::new(), rhs: vec![0.0; n], fixed: vec![None; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.triplets.push((i, j, v));
    }

    pub fn add_rhs(&mut self, i: usize, v: f64) {
        self.rhs[i] += v;
    }

    pub fn fix(&mut self, i: usize, value: f64) {
        self.fixed[i] = Some(value);
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i].is_some()
    }

    /// Adds a dense block; `rows` and `cols` map local to global indices.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], block: &DMatrix<f64>) {
        debug_assert_eq!((rows.len(), cols.len()), block.shape());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                let v = block[(a, b)];
                if v != 0.0 {
                    self.triplets.push((i, j, v));
                }
            }
        }
    }

    pub fn add_vector(&mut self, rows: &[usize], v: &[f64]) {
        for (&i, &x) in rows.iter().zip(v) {
            self.rhs[i] += x;
        }
    }

    pub fn append(&mut self, other: TripletList) {
        debug_assert_eq!(self.n, other.n);
        self.triplets.extend(other.triplets);
        for (a, b) in self.rhs.iter_mut().zip(other.rhs) {
            *a += b;
        }
    }

    /// Applies the Dirichlet elimination and compresses.
    pub fn finalize(&self) -> Result<(SparseMatrix, Vec<f64>)> {
        let mut rhs = self.rhs.clone();
        let mut kept = Vec::with_capacity(self.triplets.len() + self.n);
        for &(i, j, v) in &self.triplets {
            if i >= self.n || j >= self.n {
                return Err(Error::IndexOutOfRange { row: i, col: j, n: self.n });
            }
            if self.fixed[i].is_some() {
                continue;
            }
            match self.fixed[j] {
                Some(g) => rhs[i] -= v * g,
                None => kept.push((i, j, v)),
            }
        }
        for (i, g) in self.fixed.iter().enumerate() {
            if let Some(g) = g {
                kept.push((i, i, 1.0));
                rhs[i] = *g;
            }
        }
        Ok((to_compressed(&kept, self.n)?, rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn duplicates_summed() {
        let a = to_compressed(&[(0, 0, 1.0), (0, 0, 2.0)], 1).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 1);
        let z = to_compressed(&[], 3).unwrap();
        assert_eq!(z.nnz(), 0);
        assert_eq!(z.to_dense(), DMatrix::zeros(3, 3));
        assert!(matches!(to_compressed(&[(0, 3, 1.0)], 3), Err(Error::IndexOutOfRange { col: 3, .. })));
    }

    #[test]
    fn random_triplets_match_dense_accumulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 50;
        let mut trips = Vec::new();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for _ in 0..800 {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            // dyadic values keep sums exact regardless of order
            let v = rng.random_range(-64i32..64) as f64 / 8.0;
            trips.push((i, j, v));
            dense[(i, j)] += v;
        }
        let a = to_compressed(&trips, n).unwrap();
        assert_eq!(a.to_dense(), dense);
        for i in 0..n {
            let cols: Vec<usize> = a.row(i).map(|(j, _)| j).collect();
            assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn small_solves() {
        let id = to_compressed(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], 3).unwrap();
        assert_eq!(solve_direct(&id, &[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
        let a = to_compressed(&[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)], 2).unwrap();
        let x = solve_direct(&a, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reported() {
        let a = to_compressed(&[(0, 0, 1.0), (1, 0, 1.0)], 2).unwrap();
        assert!(matches!(solve_direct(&a, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| if rng.random_bool(0.1) { rng.random_range(-1.0..1.0) } else { 0.0 });
        &m * m.transpose() + DMatrix::identity(n, n) * n as f64 * 0.1
    }

    fn dense_to_sparse(d: &DMatrix<f64>) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    t.push((i, j, d[(i, j)]));
                }
            }
        }
        to_compressed(&t, d.nrows()).unwrap()
    }

    #[test]
    fn spd_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_spd(100, &mut rng);
        let b: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = solve_direct(&dense_to_sparse(&d), &b).unwrap();
        let oracle = d.clone().lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        let err = x.iter().zip(oracle.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-9 * oracle.amax());
    }

    #[test]
    fn symmetry_defect_values() {
        let s = to_compressed(&[(0, 1, 2.0), (1, 0, 2.0), (0, 0, 1.0)], 2).unwrap();
        assert_eq!(symmetry_defect(&s), 0.0);
        let u = to_compressed(&[(0, 1, 1.0)], 2).unwrap();
        assert_eq!(symmetry_defect(&u), 1.0);
    }

    #[test]
    fn dirichlet_elimination_is_symmetric() {
        // 1D Laplacian on 4 nodes with both ends fixed.
        let mut t = TripletList::new(4);
        for e in 0..3 {
            let k = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
            t.add_block(&[e, e + 1], &[e, e + 1], &k);
        }
        t.fix(0, 1.0);
        t.fix(3, 4.0);
        let (a, b) = t.finalize().unwrap();
        assert_eq!(symmetry_defect(&a), 0.0);
        let x = solve_direct(&a, &b).unwrap();
        for (i, v) in x.iter().enumerate() {
            assert!((v - (1.0 + i as f64)).abs() < 1e-13);
        }
    }

    #[test]
    fn triplet_dump() {
        let a = to_compressed(&[(1, 0, 0.5)], 2).unwrap();
        let mut out = Vec::new();
        write_triplets(&a, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().trim(), format!("1 0 {:.17e}", 0.5));
    }

    proptest! {
        #[test]
        fn solve_of_compressed_matches_dense(seed in 0u64..1000, n in 2usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut d = DMatrix::from_fn(n, n, |_, _| if rng.random_bool(0.05) { rng.random_range(-1.0..1.0) } else { 0.0 });
            for i in 0..n {
                let off: f64 = d.row(i).iter().map(|v: &f64| v.abs()).sum();
                d[(i, i)] += 2.0 + off;
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = solve_direct(&dense_to_sparse(&d), &b).unwrap();
            let oracle = d.clone().lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
            for (a, o) in x.iter().zip(oracle.iter()) {
                prop_assert!((a - o).abs() <= 1e-9 * oracle.amax().max(1e-300));
            }
        }
    }
}
