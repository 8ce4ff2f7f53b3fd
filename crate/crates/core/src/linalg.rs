//! Dense exact-rational linear algebra.
//!
//! Provides the vector/matrix types used everywhere else, an incremental
//! row-echelon [`Basis`] with span-membership queries and provenance tags,
//! an exact linear-system solver, and LP feasibility via a phase-1 simplex
//! with Bland's rule. All arithmetic is over arbitrary-precision rationals;
//! equality is exact, there are no tolerances.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational scalar (always in lowest terms, positive
/// denominator — maintained by the underlying representation).
pub type Rat = BigRational;

/// Shorthand for small rational literals.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for small integer literals.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses the wire grammar `INT | INT "/" POSINT` (no whitespace, no
/// leading `+`, denominator strictly positive).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = |msg: &str| Error::Parse(format!("malformed rational {s:?}: {msg}"));
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let parse_int = |t: &str, allow_sign: bool| -> Result<BigInt> {
        let (negative, digits) = match t.strip_prefix('-') {
            Some(rest) if allow_sign => (true, rest),
            Some(_) => return Err(bad("denominator must be a positive integer")),
            None => (false, t),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("expected decimal digits"));
        }
        let n = digits
            .parse::<BigInt>()
            .map_err(|e| bad(&format!("integer out of form: {e}")))?;
        Ok(if negative { -n } else { n })
    };
    let num = parse_int(num_str, true)?;
    match den_str {
        None => Ok(Rat::from_integer(num)),
        Some(d) => {
            let den = parse_int(d, false)?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Renders a rational as `p` or `p/q` in lowest terms.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

/// Dense rational vector with an explicit dimension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatVector {
    data: Vec<Rat>,
}

impl RatVector {
    pub fn zeros(dim: usize) -> Self {
        RatVector { data: vec![Rat::zero(); dim] }
    }

    pub fn ones(dim: usize) -> Self {
        RatVector { data: vec![Rat::one(); dim] }
    }

    pub fn from_vec(data: Vec<Rat>) -> Self {
        RatVector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.data[i]
    }

    pub fn set(&mut self, i: usize, v: Rat) {
        self.data[i] = v;
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.data.iter()
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn dot(&self, other: &RatVector) -> Rat {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, c: &Rat) -> RatVector {
        RatVector { data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &RatVector) -> RatVector {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        RatVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &RatVector) -> RatVector {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        RatVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += c * other`, in place.
    pub fn add_scaled(&mut self, c: &Rat, other: &RatVector) {
        assert_eq!(self.dim(), other.dim(), "add_scaled: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Concatenates several vectors into one.
    pub fn concat(parts: &[RatVector]) -> RatVector {
        let mut data = Vec::new();
        for p in parts {
            data.extend(p.data.iter().cloned());
        }
        RatVector { data }
    }
}

impl std::fmt::Display for RatVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rat(x))?;
        }
        write!(f, ")")
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<RatVector>) -> Self {
        assert!(!rows.is_empty(), "from_rows: empty");
        let cols = rows[0].dim();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            assert_eq!(r.dim(), cols, "from_rows: ragged rows");
            data.extend(r.data.iter().cloned());
        }
        RatMatrix { rows: rows.len(), cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[RatVector]) -> Self {
        assert!(!cols.is_empty(), "from_cols: empty");
        let rows = cols[0].dim();
        let mut m = RatMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim(), rows, "from_cols: ragged columns");
            for i in 0..rows {
                m.set(i, j, c.get(i).clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rat) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row_vec(&self, i: usize) -> RatVector {
        RatVector {
            data: self.data[i * self.cols..(i + 1) * self.cols].to_vec(),
        }
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, v: &RatVector) -> RatVector {
        assert_eq!(self.cols, v.dim(), "mul_vec: dimension mismatch");
        let mut out = RatVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Rat::zero();
            for j in 0..self.cols {
                let c = self.get(i, j);
                if !c.is_zero() {
                    acc += c * v.get(j);
                }
            }
            out.set(i, acc);
        }
        out
    }

    /// Row-vector product `vᵀ · self`.
    pub fn vec_mul(&self, v: &RatVector) -> RatVector {
        assert_eq!(self.rows, v.dim(), "vec_mul: dimension mismatch");
        let mut out = RatVector::zeros(self.cols);
        for i in 0..self.rows {
            let c = v.get(i);
            if c.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let m = self.get(i, j);
                if !m.is_zero() {
                    let cur = out.get(j).clone();
                    out.set(j, cur + c * m);
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "mul: dimension mismatch");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j).clone();
                        out.set(i, j, cur + a * b);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// True when every entry is nonnegative and every row sums to one.
    pub fn is_row_stochastic(&self) -> bool {
        for i in 0..self.rows {
            let mut sum = Rat::zero();
            for j in 0..self.cols {
                let x = self.get(i, j);
                if x.is_negative() {
                    return false;
                }
                sum += x;
            }
            if !sum.is_one() {
                return false;
            }
        }
        true
    }
}

/// Solves `a · x = b` exactly by Gaussian elimination. Free variables are set
/// to zero; returns `None` when the system is inconsistent.
pub fn solve(a: &RatMatrix, b: &RatVector) -> Option<RatVector> {
    assert_eq!(a.rows(), b.dim(), "solve: dimension mismatch");
    let (m, n) = (a.rows(), a.cols());
    let mut aug = a.clone();
    let mut rhs: Vec<Rat> = b.iter().cloned().collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut row = 0;
    for col in 0..n {
        let Some(piv) = (row..m).find(|&i| !aug.get(i, col).is_zero()) else {
            continue;
        };
        if piv != row {
            for j in 0..n {
                let tmp = aug.get(piv, j).clone();
                aug.set(piv, j, aug.get(row, j).clone());
                aug.set(row, j, tmp);
            }
            rhs.swap(piv, row);
        }
        let inv = aug.get(row, col).clone();
        for j in 0..n {
            let v = aug.get(row, j).clone() / &inv;
            aug.set(row, j, v);
        }
        rhs[row] /= &inv;
        for i in 0..m {
            if i == row {
                continue;
            }
            let factor = aug.get(i, col).clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = aug.get(i, j).clone() - &factor * aug.get(row, j);
                aug.set(i, j, v);
            }
            let v = rhs[i].clone() - &factor * &rhs[row];
            rhs[i] = v;
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == m {
            break;
        }
    }
    // Inconsistent when a zero row has nonzero rhs.
    for i in row..m {
        if !rhs[i].is_zero() {
            return None;
        }
    }
    let mut x = RatVector::zeros(n);
    for col in 0..n {
        if let Some(r) = pivot_of_col[col] {
            x.set(col, rhs[r].clone());
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Incremental span basis
// ---------------------------------------------------------------------------

/// Row-echelon basis of a subspace of ℝ^dim, grown incrementally.
///
/// Rows are kept sorted by pivot column with each pivot scaled to one, so the
/// stored form is deterministic for a fixed insertion sequence. Each row can
/// carry a provenance tag describing the generator that produced it.
#[derive(Clone, Debug)]
pub struct Basis<T = ()> {
    dim: usize,
    rows: Vec<RatVector>,
    pivots: Vec<usize>,
    tags: Vec<Option<T>>,
}

impl<T> Basis<T> {
    pub fn new(dim: usize) -> Self {
        Basis { dim, rows: Vec::new(), pivots: Vec::new(), tags: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[RatVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn tags(&self) -> &[Option<T>] {
        &self.tags
    }

    fn reduce(&self, mut v: RatVector) -> RatVector {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v.get(p).clone();
            if !c.is_zero() {
                v.add_scaled(&(-c), row);
            }
        }
        v
    }

    /// Inserts `v` if it is independent of the current span. Returns `true`
    /// when the basis grew; the tag is attached to the new row in that case.
    pub fn insert(&mut self, v: RatVector, tag: Option<T>) -> bool {
        assert_eq!(v.dim(), self.dim, "basis insert: dimension mismatch");
        let reduced = self.reduce(v);
        let Some(pivot) = reduced.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = reduced.get(pivot).clone();
        let normalized = reduced.scale(&(Rat::one() / inv));
        let at = self.pivots.partition_point(|&p| p < pivot);
        self.rows.insert(at, normalized);
        self.pivots.insert(at, pivot);
        self.tags.insert(at, tag);
        true
    }

    /// Exact span membership.
    pub fn contains(&self, v: &RatVector) -> bool {
        assert_eq!(v.dim(), self.dim, "in_span: dimension mismatch");
        self.reduce(v.clone()).is_zero()
    }

    /// Fully back-eliminated rows: the unique reduced-echelon basis of the
    /// span, independent of insertion order. Useful as a canonical key.
    pub fn canonical_rows(&self) -> Vec<RatVector> {
        let mut rows = self.rows.clone();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                if i == j {
                    continue;
                }
                let p = self.pivots[j];
                let c = rows[i].get(p).clone();
                if !c.is_zero() {
                    let other = rows[j].clone();
                    rows[i].add_scaled(&(-c), &other);
                }
            }
        }
        rows
    }

    /// Matrix whose columns are the stored basis rows (used as the `B` in
    /// direction-point computations).
    pub fn column_matrix(&self) -> RatMatrix {
        assert!(!self.rows.is_empty(), "column_matrix: empty basis");
        RatMatrix::from_cols(&self.rows)
    }
}

// ---------------------------------------------------------------------------
// LP feasibility
// ---------------------------------------------------------------------------

/// Constraint relation. Strict inequalities are handled by the unit-slack
/// scaling convention: `c·x < b` is decided as `c·x ≤ b − 1`, exact for the
/// homogeneous direction systems generated internally (a strictly feasible
/// direction can always be scaled until the slack reaches one).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: RatVector,
    pub relation: Relation,
    pub bound: Rat,
}

/// A finite list of rational linear constraints over ℝ^dim (variables are
/// unrestricted in sign unless constrained).
#[derive(Clone, Debug)]
pub struct LinearConstraintSystem {
    pub dim: usize,
    pub constraints: Vec<Constraint>,
}

impl LinearConstraintSystem {
    pub fn new(dim: usize) -> Self {
        LinearConstraintSystem { dim, constraints: Vec::new() }
    }

    pub fn push(&mut self, coeffs: RatVector, relation: Relation, bound: Rat) {
        self.constraints.push(Constraint { coeffs, relation, bound });
    }

    /// Checks a candidate point against the original relations (strict
    /// inequalities are checked strictly).
    pub fn satisfied_by(&self, x: &RatVector) -> bool {
        self.constraints.iter().all(|c| {
            let lhs = c.coeffs.dot(x);
            match c.relation {
                Relation::Le => lhs <= c.bound,
                Relation::Lt => lhs < c.bound,
                Relation::Eq => lhs == c.bound,
            }
        })
    }
}

/// Decides feasibility of the system and returns a satisfying rational point,
/// or `None` when infeasible. Runs a phase-1 simplex with Bland's rule over
/// exact rationals; any returned point is re-checked by substitution before
/// being handed back. An empty system yields the zero vector.
pub fn lp_feasible(sys: &LinearConstraintSystem) -> Result<Option<RatVector>> {
    for c in &sys.constraints {
        if c.coeffs.dim() != sys.dim {
            return Err(Error::Precondition(format!(
                "constraint dimension {} does not match system dimension {}",
                c.coeffs.dim(),
                sys.dim
            )));
        }
    }
    if sys.constraints.is_empty() {
        return Ok(Some(RatVector::zeros(sys.dim)));
    }

    // Split each free variable into a difference of two nonnegative ones and
    // rewrite every constraint as an equality with b ≥ 0.
    let n = sys.dim;
    let m = sys.constraints.len();
    let n_slack = sys
        .constraints
        .iter()
        .filter(|c| matches!(c.relation, Relation::Le | Relation::Lt))
        .count();
    let real_cols = 2 * n;
    let art_start = real_cols + n_slack;
    let total = art_start + m;

    let mut tab = RatMatrix::zeros(m, total);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    let mut slack_idx = 0;
    for (i, c) in sys.constraints.iter().enumerate() {
        let bound = match c.relation {
            Relation::Lt => c.bound.clone() - Rat::one(),
            _ => c.bound.clone(),
        };
        let negate = bound.is_negative();
        let sign = if negate { -Rat::one() } else { Rat::one() };
        for j in 0..n {
            let a = c.coeffs.get(j);
            if !a.is_zero() {
                tab.set(i, 2 * j, a * &sign);
                tab.set(i, 2 * j + 1, -(a * &sign));
            }
        }
        if matches!(c.relation, Relation::Le | Relation::Lt) {
            tab.set(i, real_cols + slack_idx, sign.clone());
            slack_idx += 1;
        }
        tab.set(i, art_start + i, Rat::one());
        rhs.push(if negate { -bound } else { bound });
    }

    let mut basis: Vec<usize> = (art_start..total).collect();

    loop {
        // Reduced costs for the phase-1 objective (sum of artificials).
        let mut entering = None;
        for j in 0..art_start {
            let mut z = Rat::zero();
            for i in 0..m {
                if basis[i] >= art_start {
                    z += tab.get(i, j);
                }
            }
            // r_j = c_j − z_j = −z_j for non-artificial columns.
            if z.is_positive() {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { break };

        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..m {
            let a = tab.get(i, j);
            if a.is_positive() {
                let ratio = rhs[i].clone() / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && basis[i] < basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Internal(
                "phase-1 simplex reported an unbounded objective".into(),
            ));
        };

        pivot(&mut tab, &mut rhs, &mut basis, r, j);
    }

    let mut objective = Rat::zero();
    for i in 0..m {
        if basis[i] >= art_start {
            objective += &rhs[i];
        }
    }
    if !objective.is_zero() {
        return Ok(None);
    }

    // Degenerate artificials may remain basic at level zero; pivot them out
    // where possible (rows with no eligible column are redundant).
    for i in 0..m {
        if basis[i] < art_start {
            continue;
        }
        if let Some(j) = (0..art_start).find(|&j| !tab.get(i, j).is_zero()) {
            pivot(&mut tab, &mut rhs, &mut basis, i, j);
        }
    }

    let mut x = RatVector::zeros(n);
    for i in 0..m {
        let b = basis[i];
        if b < real_cols {
            let var = b / 2;
            let cur = x.get(var).clone();
            if b % 2 == 0 {
                x.set(var, cur + &rhs[i]);
            } else {
                x.set(var, cur - &rhs[i]);
            }
        }
    }

    if !sys.satisfied_by(&x) {
        return Err(Error::Internal(
            "simplex produced a point that fails substitution".into(),
        ));
    }
    Ok(Some(x))
}

fn pivot(tab: &mut RatMatrix, rhs: &mut [Rat], basis: &mut [usize], r: usize, j: usize) {
    let total = tab.cols();
    let m = tab.rows();
    let inv = tab.get(r, j).clone();
    for col in 0..total {
        let v = tab.get(r, col).clone() / &inv;
        tab.set(r, col, v);
    }
    rhs[r] /= &inv;
    for i in 0..m {
        if i == r {
            continue;
        }
        let factor = tab.get(i, j).clone();
        if factor.is_zero() {
            continue;
        }
        for col in 0..total {
            let v = tab.get(i, col).clone() - &factor * tab.get(r, col);
            tab.set(i, col, v);
        }
        let v = rhs[i].clone() - &factor * &rhs[r];
        rhs[i] = v;
    }
    basis[r] = j;
}
